//! Token-level chase of the two-map schedule: per-map transition tables,
//! alternating words, composite wandering and per-map periodicity.
//!
//! A token in U_m advances one step per applied map for m steps, sits at
//! its landing quarter disk (class m), and the next applied map sends it
//! to the region its table assigns to class m.

use crate::orbit::{adjust_with_targets, OrbitError, Regime};
use crate::params::ParameterSet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ComposeError {
    #[error("cannot parse statement {0:?}")]
    Parse(String),
    #[error("inconsistent statements: {first:?} and {second:?}")]
    Inconsistent { first: String, second: String },
    #[error("exponent of {0:?} does not match the advance length of its start region")]
    Advance(String),
    #[error("statements mix periods {0} and {1}")]
    Period(u64, u64),
    #[error("no statement for map {map} on residue {residue}")]
    Incomplete { map: MapId, residue: u64 },
    #[error("start region index must be at least 1, got {0}")]
    BadStart(u64),
    #[error("{what}")]
    Mismatch { what: String, trace: Box<ChaseTrace> },
    #[error("orbit: {0}")]
    Orbit(#[from] OrbitError),
}

pub type Result<T> = std::result::Result<T, ComposeError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MapId {
    #[serde(rename = "f")]
    F,
    #[serde(rename = "g")]
    G,
}

impl fmt::Display for MapId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MapId::F => "f",
            MapId::G => "g",
        })
    }
}

/// a n + b
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Affine {
    pub a: u64,
    pub b: u64,
}

impl Affine {
    pub fn at(&self, n: u64) -> u64 {
        self.a * n + self.b
    }
}

impl FromStr for Affine {
    type Err = ComposeError;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || ComposeError::Parse(s.to_string());
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let (lin, cst) = match t.split_once('+') {
            Some((l, c)) => (l, c.parse().map_err(|_| bad())?),
            None if t.ends_with('n') => (t.as_str(), 0),
            None => return Ok(Affine { a: 0, b: t.parse().map_err(|_| bad())? }),
        };
        let coef = lin.strip_suffix('n').ok_or_else(bad)?;
        let a = if coef.is_empty() { 1 } else { coef.parse().map_err(|_| bad())? };
        Ok(Affine { a, b: cst })
    }
}

/// One containment `map^{exponent}(U_{from}) ⊂ U_{to}`, parameterized by n.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Statement {
    pub map: MapId,
    pub exponent: Affine,
    pub from: Affine,
    pub to: Affine,
    pub text: String,
}

fn braced(s: &str) -> Option<(&str, &str)> {
    let s = s.trim_start();
    if let Some(r) = s.strip_prefix('{') {
        let end = r.find('}')?;
        Some((&r[..end], &r[end + 1..]))
    } else {
        let end = s.find(|c: char| !c.is_ascii_alphanumeric()).unwrap_or(s.len());
        Some((&s[..end], &s[end..]))
    }
}

impl FromStr for Statement {
    type Err = ComposeError;

    /// `f^{4n+1}(U_{4n}) ⊂ U_{4n}`; `subset` and `<=` are accepted for ⊂.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || ComposeError::Parse(s.to_string());
        let t = s.trim();
        let map = match t.chars().next() {
            Some('f') => MapId::F,
            Some('g') => MapId::G,
            _ => return Err(bad()),
        };
        let rest = t[1..].trim_start().strip_prefix('^').ok_or_else(bad)?;
        let (exp, rest) = braced(rest).ok_or_else(bad)?;
        let rest = rest.trim_start().strip_prefix("(U_").ok_or_else(bad)?;
        let (from, rest) = braced(rest).ok_or_else(bad)?;
        let rest = rest.trim_start().strip_prefix(')').ok_or_else(bad)?.trim_start();
        let rest = ["⊂", "subset", "<="].iter().find_map(|op| rest.strip_prefix(op)).ok_or_else(bad)?;
        let rest = rest.trim_start().strip_prefix("U_").ok_or_else(bad)?;
        let (to, tail) = braced(rest).ok_or_else(bad)?;
        if !tail.trim().is_empty() {
            return Err(bad());
        }
        Ok(Statement { map, exponent: exp.parse()?, from: from.parse()?, to: to.parse()?, text: t.to_string() })
    }
}

/// The eight per-map containments of the two-map schedule.
pub const SCHEDULE_STATEMENTS: [&str; 8] = [
    "f^{4n+1}(U_{4n}) ⊂ U_{4n}",
    "f^{4n+2}(U_{4n+1}) ⊂ U_{4n+1}",
    "f^{4n+3}(U_{4n+2}) ⊂ U_{4n+3}",
    "f^{4n+4}(U_{4n+3}) ⊂ U_{4n+4}",
    "g^{4n+1}(U_{4n}) ⊂ U_{4n+1}",
    "g^{4n+2}(U_{4n+1}) ⊂ U_{4n+2}",
    "g^{4n+3}(U_{4n+2}) ⊂ U_{4n+2}",
    "g^{4n+4}(U_{4n+3}) ⊂ U_{4n+3}",
];

pub fn schedule_statements() -> Vec<Statement> {
    SCHEDULE_STATEMENTS.iter().map(|s| s.parse().expect("built-in statement")).collect()
}

/// Landing rule of one map: class `period n + r` goes to region
/// `period n + targets[r]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransitionTable {
    pub map: MapId,
    pub period: u64,
    pub targets: Vec<u64>,
}

impl TransitionTable {
    pub fn landing(&self, class: u64) -> u64 {
        let n = class / self.period;
        self.period * n + self.targets[(class % self.period) as usize]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tables {
    pub f: TransitionTable,
    pub g: TransitionTable,
    pub statements: Vec<Statement>,
}

impl Tables {
    pub fn table(&self, m: MapId) -> &TransitionTable {
        match m {
            MapId::F => &self.f,
            MapId::G => &self.g,
        }
    }

    /// Classes whose landing under f is U_k: the token-level f⁻¹(U_k).
    pub fn f_preimage(&self, k: u64) -> Vec<Token> {
        (1..=k + self.f.period).filter(|&c| self.f.landing(c) == k).map(Token::landing).collect()
    }
}

pub fn derive_tables(statements: &[Statement]) -> Result<Tables> {
    let period = statements.first().ok_or(ComposeError::Incomplete { map: MapId::F, residue: 0 })?.from.a;
    if period == 0 {
        return Err(ComposeError::Parse(statements[0].text.clone()));
    }
    let mut slots: [Vec<Option<&Statement>>; 2] = [vec![None; period as usize], vec![None; period as usize]];
    for s in statements {
        for a in [s.from.a, s.to.a, s.exponent.a] {
            if a != period {
                return Err(ComposeError::Period(period, a));
            }
        }
        if s.from.b >= period {
            return Err(ComposeError::Parse(s.text.clone()));
        }
        // f^{m+1}(U_m): m advance steps, then one landing step
        if s.exponent.b != s.from.b + 1 {
            return Err(ComposeError::Advance(s.text.clone()));
        }
        let slot = &mut slots[s.map as usize][s.from.b as usize];
        match slot {
            Some(prev) if prev.to != s.to => {
                return Err(ComposeError::Inconsistent { first: prev.text.clone(), second: s.text.clone() })
            }
            _ => *slot = Some(s),
        }
    }
    let build = |map: MapId| -> Result<TransitionTable> {
        let targets = slots[map as usize]
            .iter()
            .enumerate()
            .map(|(r, s)| s.map(|s| s.to.b).ok_or(ComposeError::Incomplete { map, residue: r as u64 }))
            .collect::<Result<Vec<_>>>()?;
        Ok(TransitionTable { map, period, targets })
    };
    Ok(Tables { f: build(MapId::F)?, g: build(MapId::G)?, statements: statements.to_vec() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Token {
    U { m: u64 },
    Advancing { start: u64, steps: u64 },
    AtLanding { m: u64 },
}

impl Token {
    pub fn region(m: u64) -> Token {
        Token::U { m }
    }

    pub fn landing(m: u64) -> Token {
        Token::AtLanding { m }
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::U { m } => write!(f, "U_{m}"),
            Token::Advancing { start, steps } => write!(f, "U_{start}+{steps}"),
            Token::AtLanding { m } => write!(f, "D({m})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u64,
    pub map: MapId,
    pub before: Token,
    pub after: Token,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Landing {
    pub step: u64,
    pub map: MapId,
    pub class: u64,
    pub target: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WordPattern {
    /// f first: the word of (g∘f)^k
    AlternatingGf,
    /// g first: the word of (f∘g)^k
    AlternatingFg,
    PureF,
    PureG,
}

impl WordPattern {
    pub fn map_at(&self, step: u64) -> MapId {
        let odd = step % 2 == 1;
        match self {
            WordPattern::PureF => MapId::F,
            WordPattern::PureG => MapId::G,
            WordPattern::AlternatingGf => if odd { MapId::F } else { MapId::G },
            WordPattern::AlternatingFg => if odd { MapId::G } else { MapId::F },
        }
    }

    /// Single steps in `repetitions` copies: two per composite, one per pure map.
    pub fn length(&self, repetitions: u64) -> u64 {
        match self {
            WordPattern::AlternatingGf | WordPattern::AlternatingFg => 2 * repetitions,
            _ => repetitions,
        }
    }

    pub fn word(&self, repetitions: u64) -> Vec<MapId> {
        (1..=self.length(repetitions)).map(|s| self.map_at(s)).collect()
    }

    pub fn name(&self) -> &'static str {
        match self {
            WordPattern::AlternatingGf => "g∘f",
            WordPattern::AlternatingFg => "f∘g",
            WordPattern::PureF => "f",
            WordPattern::PureG => "g",
        }
    }
}

impl FromStr for WordPattern {
    type Err = ComposeError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alternating-gf" | "gf" | "g∘f" => Ok(WordPattern::AlternatingGf),
            "alternating-fg" | "fg" | "f∘g" => Ok(WordPattern::AlternatingFg),
            "pure-f" | "f" => Ok(WordPattern::PureF),
            "pure-g" | "g" => Ok(WordPattern::PureG),
            _ => Err(ComposeError::Parse(s.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChaseTrace {
    pub word: Vec<MapId>,
    pub start: Token,
    pub steps: Vec<StepRecord>,
    pub landings: Vec<Landing>,
    pub end: Token,
}

impl ChaseTrace {
    /// First step after which the token sits in U_k.
    pub fn first_entry(&self, k: u64) -> Option<u64> {
        self.steps.iter().find(|s| s.after == Token::region(k)).map(|s| s.step)
    }
}

pub fn advance(tables: &Tables, token: Token, map: MapId) -> (Token, Option<(u64, u64)>) {
    match token {
        Token::U { m } | Token::Advancing { start: m, .. } => {
            let s = match token {
                Token::Advancing { steps, .. } => steps + 1,
                _ => 1,
            };
            if s == m {
                (Token::landing(m), None)
            } else {
                (Token::Advancing { start: m, steps: s }, None)
            }
        }
        Token::AtLanding { m } => {
            let t = tables.table(map).landing(m);
            (Token::region(t), Some((m, t)))
        }
    }
}

fn check_token(t: Token) -> Result<()> {
    match t {
        Token::U { m: 0 } | Token::AtLanding { m: 0 } => Err(ComposeError::BadStart(0)),
        Token::Advancing { start, steps } if steps == 0 || steps >= start => Err(ComposeError::BadStart(start)),
        _ => Ok(()),
    }
}

pub fn chase_word(tables: &Tables, word: &[MapId], start: Token) -> Result<ChaseTrace> {
    check_token(start)?;
    let mut tok = start;
    let mut steps = Vec::with_capacity(word.len());
    let mut landings = Vec::new();
    for (i, &map) in word.iter().enumerate() {
        let step = i as u64 + 1;
        let (next, land) = advance(tables, tok, map);
        if let Some((class, target)) = land {
            landings.push(Landing { step, map, class, target });
        }
        steps.push(StepRecord { step, map, before: tok, after: next });
        tok = next;
    }
    Ok(ChaseTrace { word: word.to_vec(), start, steps, landings, end: tok })
}

pub fn chase(tables: &Tables, pattern: WordPattern, start: u64, repetitions: u64) -> Result<ChaseTrace> {
    if start == 0 {
        return Err(ComposeError::BadStart(0));
    }
    chase_word(tables, &pattern.word(repetitions), Token::region(start))
}

/// Landings only, computed by jumping over advance runs; `steps` caps the
/// word length.
pub fn landings_fast(tables: &Tables, pattern: WordPattern, start: Token, steps: u64) -> (Vec<Landing>, Token) {
    let mut out = Vec::new();
    let mut tok = start;
    let mut s = 0u64;
    loop {
        let (wait, class) = match tok {
            Token::U { m } => (m, m),
            Token::Advancing { start, steps } => (start - steps, start),
            Token::AtLanding { m } => (0, m),
        };
        if s + wait + 1 > steps {
            let left = steps - s;
            let tok = match tok {
                _ if left == 0 => tok,
                Token::U { m } if left == m => Token::landing(m),
                Token::U { m } => Token::Advancing { start: m, steps: left },
                Token::Advancing { start, steps } if steps + left == start => Token::landing(start),
                Token::Advancing { start, steps } => Token::Advancing { start, steps: steps + left },
                Token::AtLanding { .. } => unreachable!(),
            };
            return (out, tok);
        }
        s += wait + 1;
        let map = pattern.map_at(s);
        let target = tables.table(map).landing(class);
        out.push(Landing { step: s, map, class, target });
        tok = Token::region(target);
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimCheck {
    pub claim: String,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelReport {
    pub n: u64,
    /// Single steps until the f∘g chase from U_{4n} first enters U_{4n+4}.
    pub fg_steps: u64,
    pub per_map: Vec<ClaimCheck>,
    pub composite: Vec<ClaimCheck>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Periodicity {
    pub map: MapId,
    pub start: u64,
    /// Landings before the region sequence enters its cycle.
    pub preperiod: u64,
    pub period: u64,
    pub cycle: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleReport {
    pub n_max: u64,
    pub levels: Vec<LevelReport>,
    pub periodicity: Vec<Periodicity>,
    /// Largest preperiod + period over all starts, to compare with m + 5.
    pub worst_entry_margin: i64,
    pub scope: String,
}

impl ScheduleReport {
    pub fn passed(&self) -> bool {
        self.levels.iter().all(|l| l.per_map.iter().chain(&l.composite).all(|c| c.holds)) && self.worst_entry_margin >= 0
    }
}

fn mismatch(what: String, trace: ChaseTrace) -> ComposeError {
    ComposeError::Mismatch { what, trace: Box::new(trace) }
}

/// Parity and table consistency of every landing in a trace.
pub fn audit_trace(tables: &Tables, trace: &ChaseTrace) -> Result<()> {
    if trace.steps.len() != trace.word.len() {
        return Err(mismatch("step count differs from word length".into(), trace.clone()));
    }
    for l in &trace.landings {
        let idx = (l.step - 1) as usize;
        if trace.word[idx] != l.map {
            return Err(mismatch(format!("landing at step {} applied {} against the word", l.step, l.map), trace.clone()));
        }
        if tables.table(l.map).landing(l.class) != l.target {
            return Err(mismatch(format!("landing at step {} disagrees with the {} table", l.step, l.map), trace.clone()));
        }
    }
    for s in &trace.steps {
        if let Token::Advancing { start, steps } = s.after {
            if steps >= start {
                return Err(mismatch(format!("advance run from U_{start} overran at step {}", s.step), trace.clone()));
            }
        }
    }
    Ok(())
}

fn level(tables: &Tables, n: u64) -> Result<LevelReport> {
    let k = 4 * n;
    let mut per_map = Vec::new();
    for s in &tables.statements {
        let pattern = if s.map == MapId::F { WordPattern::PureF } else { WordPattern::PureG };
        let (from, to, e) = (s.from.at(n), s.to.at(n), s.exponent.at(n));
        let tr = chase(tables, pattern, from, e)?;
        audit_trace(tables, &tr)?;
        let holds = tr.end == Token::region(to);
        if !holds {
            return Err(mismatch(format!("{} fails at n = {n}", s.text), tr));
        }
        per_map.push(ClaimCheck { claim: format!("{}^{e}(U_{from}) ⊂ U_{to}", s.map), holds });
    }
    let mut composite = Vec::new();

    let fg = chase(tables, WordPattern::AlternatingFg, k, 8 * n + 5)?;
    audit_trace(tables, &fg)?;
    let fg_steps = fg.first_entry(k + 4).unwrap_or(0);
    if fg.end != Token::region(k + 4) || fg_steps != 16 * n + 10 {
        return Err(mismatch(format!("(f∘g)^{}(U_{k}) ends at {} after entering U_{} at step {fg_steps}", 8 * n + 5, fg.end, k + 4), fg));
    }
    composite.push(ClaimCheck { claim: format!("(f∘g)^{}(U_{k}) ⊂ U_{}", 8 * n + 5, k + 4), holds: true });

    let pre = tables.f_preimage(k);
    let gf = chase(tables, WordPattern::AlternatingGf, k, 2 * n)?;
    audit_trace(tables, &gf)?;
    if !pre.contains(&gf.end) {
        return Err(mismatch(format!("(g∘f)^{}(U_{k}) ends at {} outside f⁻¹(U_{k})", 2 * n, gf.end), gf));
    }
    composite.push(ClaimCheck { claim: format!("(g∘f)^{}(U_{k}) ⊂ f⁻¹(U_{k})", 2 * n), holds: true });

    let pre_next = tables.f_preimage(k + 4);
    for &t in &pre {
        let tr = chase_word(tables, &WordPattern::AlternatingGf.word(8 * n + 5), t)?;
        audit_trace(tables, &tr)?;
        if !pre_next.contains(&tr.end) {
            return Err(mismatch(format!("(g∘f)^{}({t}) ends at {} outside f⁻¹(U_{})", 8 * n + 5, tr.end, k + 4), tr));
        }
    }
    composite.push(ClaimCheck { claim: format!("(g∘f)^{}(f⁻¹(U_{k})) ⊂ f⁻¹(U_{})", 8 * n + 5, k + 4), holds: true });

    // two full cycles of each composite never return to U_{4n} and climb by 4 per cycle
    let reps = (8 * n + 5) + (8 * (n + 1) + 5);
    let fg2 = chase(tables, WordPattern::AlternatingFg, k, reps)?;
    let gf2 = chase_word(tables, &WordPattern::AlternatingGf.word(2 * n + reps), Token::region(k))?;
    let back = |tr: &ChaseTrace| tr.steps.iter().filter(|s| s.after == Token::region(k)).count();
    let climbs = |tr: &ChaseTrace| tr.landings.windows(2).all(|w| w[1].target >= w[0].target);
    if fg2.end != Token::region(k + 8) || back(&fg2) != 0 || !climbs(&fg2) {
        return Err(mismatch(format!("f∘g from U_{k} does not climb to U_{}", k + 8), fg2));
    }
    if !tables.f_preimage(k + 8).contains(&gf2.end) || back(&gf2) > 1 || !climbs(&gf2) {
        return Err(mismatch(format!("g∘f from U_{k} does not climb to f⁻¹(U_{})", k + 8), gf2));
    }
    composite.push(ClaimCheck { claim: format!("U_{k} is wandering at token level for f∘g and g∘f"), holds: true });
    Ok(LevelReport { n, fg_steps, per_map, composite })
}

pub fn periodicity(tables: &Tables, map: MapId, start: u64) -> Periodicity {
    let pattern = if map == MapId::F { WordPattern::PureF } else { WordPattern::PureG };
    let mut seen = vec![start];
    let mut cls = start;
    loop {
        let (l, _) = landings_fast(tables, pattern, Token::region(cls), cls + 1);
        cls = l[0].target;
        if let Some(i) = seen.iter().position(|&c| c == cls) {
            let cycle = seen[i..].to_vec();
            return Periodicity { map, start, preperiod: i as u64, period: cycle.len() as u64, cycle };
        }
        seen.push(cls);
    }
}

pub fn verify_schedule(tables: &Tables, n_max: u64) -> Result<ScheduleReport> {
    let levels = (1..=n_max).into_par_iter().map(|n| level(tables, n)).collect::<Result<Vec<_>>>()?;
    let periodicity: Vec<Periodicity> = (1..=4 * n_max + 4)
        .into_par_iter()
        .flat_map_iter(|m| [periodicity(tables, MapId::F, m), periodicity(tables, MapId::G, m)])
        .collect();
    let worst = periodicity.iter().map(|p| p.start as i64 + 5 - (p.preperiod + p.period) as i64).min().unwrap_or(0);
    Ok(ScheduleReport {
        n_max,
        levels,
        periodicity,
        worst_entry_margin: worst,
        scope: "absence of other wandering domains for f and g is assumed, not checked here".into(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    Wandering,
    Preperiodic,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub word: String,
    pub start: u64,
    pub schedule: Schedule,
    /// Region classes entered at successive landings, starting with the start.
    pub regions: Vec<u64>,
}

/// Token-level class of every (word, U_{4n}) for n = 1..=n_max. A repeated
/// (region, step parity) state is preperiodic; an alternating word is
/// wandering when each composite cycle lifts U_{4j} to U_{4j+4}, which
/// verify_schedule establishes for every j it covers.
pub fn classify_schedules(tables: &Tables, n_max: u64) -> Vec<Classification> {
    let pats = [WordPattern::AlternatingFg, WordPattern::AlternatingGf, WordPattern::PureF, WordPattern::PureG];
    (1..=n_max)
        .flat_map(|n| pats.iter().map(move |&p| (n, p)))
        .map(|(n, p)| {
            let k = 4 * n;
            let mut regions = vec![k];
            let mut seen = std::collections::HashSet::from([(k, 0u64)]);
            let mut tok = Token::region(k);
            let mut at = 0u64;
            let mut schedule = Schedule::Wandering;
            for _ in 0..12 {
                let (l, _) = landings_fast_from(tables, p, tok, at);
                at = l.step;
                tok = Token::region(l.target);
                regions.push(l.target);
                let parity = if p.length(1) == 2 { at % 2 } else { 0 };
                if !seen.insert((l.target, parity)) {
                    schedule = Schedule::Preperiodic;
                    break;
                }
            }
            let mut quads: Vec<u64> = regions.iter().copied().filter(|r| r % 4 == 0).collect();
            quads.dedup();
            if schedule == Schedule::Wandering && (quads.len() < 2 || quads.windows(2).any(|w| w[1] != w[0] + 4)) {
                schedule = Schedule::Preperiodic;
            }
            Classification { word: p.name().to_string(), start: k, schedule, regions }
        })
        .collect()
}

fn landings_fast_from(tables: &Tables, p: WordPattern, tok: Token, at: u64) -> (Landing, Token) {
    let Token::U { m } = tok else { unreachable!() };
    let step = at + m + 1;
    let map = p.map_at(step);
    let target = tables.table(map).landing(m);
    (Landing { step, map, class: m, target }, Token::region(target))
}

/// Plain-text ladder of the f∘g chase from U_{4n}: one row per region visited.
pub fn ladder(tables: &Tables, n: u64) -> Result<String> {
    let k = 4 * n;
    let tr = chase(tables, WordPattern::AlternatingFg, k, 8 * n + 5)?;
    let mut out = format!("(f∘g)^{} from U_{k}: {} single steps\n", 8 * n + 5, tr.steps.len());
    let mut from = 1u64;
    for l in &tr.landings {
        let letters: Vec<String> = (from..l.step).map(|s| tr.word[(s - 1) as usize].to_string()).collect();
        out.push_str(&format!(
            "U_{:<4} | {} | {}: D({}) -> U_{}   steps {}-{}\n",
            l.class,
            letters.join(" "),
            l.map,
            l.class,
            l.target,
            from,
            l.step
        ));
        from = l.step + 1;
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MetricAgreement {
    pub map: MapId,
    pub class: u64,
    pub target: u64,
    pub regime: Option<Regime>,
    /// Some(true) when the metric nesting certificate exists and passes.
    pub certified: Option<bool>,
    pub note: String,
}

/// Compare the landings of class 1 with the orbit certifier, the only
/// class that has a concrete pullback certificate.
pub fn metric_consistency(tables: &Tables, params: &ParameterSet) -> Vec<MetricAgreement> {
    [MapId::F, MapId::G]
        .into_iter()
        .map(|map| {
            let target = tables.table(map).landing(1);
            match adjust_with_targets(params, 1, &|_| target as usize) {
                Ok(a) => {
                    let c = &a.nesting[0];
                    MetricAgreement {
                        map,
                        class: 1,
                        target,
                        regime: Some(c.regime),
                        certified: Some(c.passed() && c.target == target as usize),
                        note: format!("margin {:?}", c.margin),
                    }
                }
                Err(e) => MetricAgreement { map, class: 1, target, regime: None, certified: None, note: e.to_string() },
            }
        })
        .collect()
}
