use proptest::prelude::*;
use std::time::Instant;
use wandlab_core::compose::*;
use wandlab_core::params::ParameterSet;

fn tables() -> Tables {
    derive_tables(&schedule_statements()).unwrap()
}

#[test]
fn schedule_holds_through_level_200() {
    let t = tables();
    let start = Instant::now();
    let r = verify_schedule(&t, 200).unwrap();
    let secs = start.elapsed().as_secs_f64();
    assert!(r.passed());
    assert_eq!(r.levels.len(), 200);
    for l in &r.levels {
        assert_eq!(l.fg_steps, 16 * l.n + 10);
        assert_eq!(l.per_map.len(), 8);
        assert_eq!(l.composite.len(), 4);
    }
    assert_eq!(r.periodicity.len(), 2 * 804);
    assert!(r.periodicity.iter().all(|p| p.period == 1));
    assert!(r.worst_entry_margin >= 0);
    eprintln!("verify_schedule(200): {secs:.3} s");
}

#[test]
fn second_level_chase() {
    let tr = chase(&tables(), WordPattern::AlternatingFg, 8, 21).unwrap();
    assert_eq!(tr.steps.len(), 42);
    assert_eq!(tr.end, Token::region(12));
    assert_eq!(tr.first_entry(12), Some(42));
}

#[test]
fn pure_words_return_or_advance() {
    let t = tables();
    for n in 1..20u64 {
        let k = 4 * n;
        assert_eq!(chase(&t, WordPattern::PureF, k, k + 1).unwrap().end, Token::region(k));
        let g = periodicity(&t, MapId::G, k + 2);
        assert_eq!(g.cycle, vec![k + 2]);
        let g = periodicity(&t, MapId::G, k);
        assert_eq!(g.cycle, vec![k + 2]);
        assert_eq!(g.preperiod, 2);
    }
}

#[test]
fn schedules_split_into_wandering_and_preperiodic() {
    let c = classify_schedules(&tables(), 10);
    assert_eq!(c.len(), 40);
    for x in &c {
        let want = if x.word.contains('∘') { Schedule::Wandering } else { Schedule::Preperiodic };
        assert_eq!(x.schedule, want, "{} from U_{}", x.word, x.start);
    }
    let fg = c.iter().find(|x| x.word == "f∘g" && x.start == 4).unwrap();
    let quads: Vec<u64> = fg.regions.iter().copied().filter(|r| r % 4 == 0).collect();
    assert_eq!(&quads[..3], &[4, 8, 12]);
    let g = c.iter().find(|x| x.word == "g" && x.start == 4).unwrap();
    assert_eq!(g.regions, vec![4, 5, 6, 6]);
}

#[test]
fn traces_round_trip_through_json() {
    let tr = chase(&tables(), WordPattern::AlternatingGf, 4, 3).unwrap();
    let s = serde_json::to_string(&tr).unwrap();
    let back: ChaseTrace = serde_json::from_str(&s).unwrap();
    assert_eq!(back, tr);
    assert!(s.contains("\"at_landing\"") || s.contains("\"u\""));
}

#[test]
fn class_one_landings_agree_with_the_orbit_certifier() {
    let m = metric_consistency(&tables(), &ParameterSet::new(4));
    let g = m.iter().find(|a| a.map == MapId::G).unwrap();
    assert_eq!(g.target, 2);
    assert_eq!(g.certified, Some(true), "{}", g.note);
    // landing back in U_1 would move w by about 6e-4, past any admissible budget
    let f = m.iter().find(|a| a.map == MapId::F).unwrap();
    assert_eq!(f.target, 1);
    assert!(f.certified.is_none(), "{}", f.note);
}

proptest! {
    #[test]
    fn traces_respect_advance_and_parity(m in 1u64..200, reps in 1u64..300, pat in 0usize..4) {
        let p = [WordPattern::AlternatingFg, WordPattern::AlternatingGf, WordPattern::PureF, WordPattern::PureG][pat];
        let t = tables();
        let tr = chase(&t, p, m, reps).unwrap();
        prop_assert!(audit_trace(&t, &tr).is_ok());
        prop_assert_eq!(tr.steps.len() as u64, p.length(reps));
        for l in &tr.landings {
            prop_assert_eq!(l.map, p.map_at(l.step));
            if matches!(p, WordPattern::AlternatingFg) {
                prop_assert_eq!(l.map == MapId::G, l.step % 2 == 1);
            }
        }
        let (fast, end) = landings_fast(&t, p, Token::region(m), p.length(reps));
        prop_assert_eq!(fast, tr.landings.clone());
        prop_assert_eq!(end, tr.end);
    }

    #[test]
    fn landings_never_move_down(m in 1u64..10_000) {
        let t = tables();
        prop_assert!(t.f.landing(m) >= m);
        prop_assert!(t.g.landing(m) >= m);
        prop_assert!(t.f.landing(m) - m <= 1 && t.g.landing(m) - m <= 1);
    }

    #[test]
    fn shuffled_statements_give_the_same_tables(seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut s = schedule_statements();
        s.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(derive_tables(&s).unwrap().f, tables().f);
    }
}
