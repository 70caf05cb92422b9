use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Float;
use wandlab_core::interval::Interval;
use wandlab_core::tower::{prototype_step, tw_add, tw_cmp, tw_from_real, tw_mul, CertifiedOrdering, TowerReal};

// samples span 2^-67..2^997, so sums and products of two of them are exact
const PREC: u32 = 1200;

fn encloses(t: &TowerReal, v: &Float) -> bool {
    if t.sign() == 0 {
        return *v == 0;
    }
    let mut y = Float::with_val(PREC, v);
    if t.sign() < 0 {
        y = -y;
    }
    for _ in 0..t.level() {
        if y <= 0 {
            return false;
        }
        y.ln_mut();
    }
    // slack for the oracle's own rounding, far below any f64 index width
    let slack = Float::with_val(PREC, Float::i_exp(1, -1100));
    let lo = Float::with_val(PREC, &y + &slack);
    let hi = Float::with_val(PREC, &y - &slack);
    t.index().lo <= lo && hi <= t.index().hi
}

fn sample(rng: &mut ChaCha8Rng) -> f64 {
    match rng.gen_range(0..4) {
        0 => rng.gen_range(0.0..1.0),
        1 => rng.gen_range(0.0..1000.0),
        _ => 10f64.powf(rng.gen_range(-20.0..300.0)),
    }
}

#[test]
fn arithmetic_encloses_big_float_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7011_5eed);
    let mut checked = 0;
    for _ in 0..100_000 {
        let x = sample(&mut rng);
        let y = sample(&mut rng);
        let tx = tw_from_real(x).unwrap();
        let ty = tw_from_real(y).unwrap();
        let fx = Float::with_val(PREC, x);
        let fy = Float::with_val(PREC, y);
        assert!(encloses(&tx, &fx), "from_real {x}");
        let s = tw_add(&tx, &ty).unwrap();
        assert!(encloses(&s, &Float::with_val(PREC, &fx + &fy)), "add {x} {y} -> {s}");
        let p = tw_mul(&tx, &ty).unwrap();
        assert!(encloses(&p, &Float::with_val(PREC, &fx * &fy)), "mul {x} {y} -> {p}");
        if x >= 1.0 {
            let l = tx.ln().unwrap();
            assert!(encloses(&l, &Float::with_val(PREC, fx.ln_ref())), "ln {x}");
        }
        checked += 1;
    }
    assert_eq!(checked, 100_000);
}

#[test]
fn exp_encloses_oracle_for_moderate_arguments() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..20_000 {
        let x: f64 = rng.gen_range(0.0..1.0e6);
        let t = tw_from_real(x).unwrap();
        let e = t.exp().unwrap();
        let v = Float::with_val(PREC, Float::with_val(PREC, x).exp_ref());
        assert!(encloses(&e, &v), "exp {x}");
        let back = e.ln().unwrap();
        assert!(back.index().contains_interval(&t.index()) && back.level() == t.level());
    }
    for _ in 0..2_000 {
        let x: f64 = rng.gen_range(0.0..20.0);
        let ee = tw_from_real(x).unwrap().exp().unwrap().exp().unwrap();
        let mut v = Float::with_val(PREC, x);
        v.exp_mut();
        v.exp_mut();
        assert!(encloses(&ee, &v), "exp exp {x}");
    }
}

#[test]
fn prototype_step_encloses_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let lambda = Interval::pi().scale(4.0);
    for _ in 0..2_000 {
        let x: f64 = rng.gen_range(0.0..15.0);
        let f = prototype_step(&tw_from_real(x).unwrap(), &lambda).unwrap();
        let pi4 = Float::with_val(PREC, rug::float::Constant::Pi) * 4u32;
        let mut v = Float::with_val(PREC, x);
        v.sinh_mut();
        v *= pi4;
        v.cosh_mut();
        assert!(encloses(&f, &v), "step {x} -> {f}");
    }
}

fn arb_tower() -> impl Strategy<Value = TowerReal> {
    (1u32..20, 0.0f64..1.0, 0.0f64..1e-6)
        .prop_map(|(level, m, w)| TowerReal::from_parts(1, level, Interval::new(m, m + w)).unwrap())
}

proptest! {
    #[test]
    fn renormalizing_is_identity(t in arb_tower()) {
        let again = TowerReal::from_parts(t.sign(), t.level(), t.index()).unwrap();
        prop_assert_eq!(again, t);
        let parsed: TowerReal = t.to_string().parse().unwrap();
        prop_assert_eq!(parsed, t);
    }

    #[test]
    fn from_real_is_monotone(a in 0.0f64..1e300, b in 0.0f64..1e300) {
        let (x, y) = if a <= b { (a, b) } else { (b, a) };
        let c = tw_cmp(&tw_from_real(x).unwrap(), &tw_from_real(y).unwrap());
        prop_assert_ne!(c, CertifiedOrdering::Greater);
        if x < y {
            prop_assert_ne!(c, CertifiedOrdering::Equal);
        }
    }

    #[test]
    fn ln_inverts_exp(t in arb_tower(), x in 0.0f64..50.0) {
        let back = t.exp().unwrap().ln().unwrap();
        prop_assert!(back.index().contains_interval(&t.index()) && back.level() == t.level());
        let s = tw_from_real(x).unwrap();
        let back = s.exp().unwrap().ln().unwrap();
        prop_assert!(back.index().contains_interval(&s.index()) && back.level() == s.level());
    }
}
