//! Counterexample search over random and small exhaustive instances.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::Mutex;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::Serialize;

use super::{RuleName, SearchArgs};
use crate::axioms::{
    check_core_subject_to, check_ejr, check_laminar, check_pareto, check_pigou_dalton, check_pjr, check_priceable,
    find_core_deviation, CoreProperty, SubjectOptions,
};
use crate::error::{Error, Result};
use crate::generators::gen_random;
use crate::model::{Committee, ElectionInstance};
use crate::rational::Rational;
use crate::rules::{
    dhondt_committee, pav_winners, phragmen_sequential, rule_x, rule_x_complete, seq_pav, Completion,
};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum SearchAxiom {
    Pjr,
    Ejr,
    Core,
    Core2,
    CorePriceEq,
    Priceable,
    LaminarProp,
    PigouDalton,
    Pareto,
}

const AXIOMS: [(&str, SearchAxiom); 9] = [
    ("pjr", SearchAxiom::Pjr),
    ("ejr", SearchAxiom::Ejr),
    ("core", SearchAxiom::Core),
    ("core2", SearchAxiom::Core2),
    ("core-price-eq", SearchAxiom::CorePriceEq),
    ("priceable", SearchAxiom::Priceable),
    ("laminar-prop", SearchAxiom::LaminarProp),
    ("pigou-dalton", SearchAxiom::PigouDalton),
    ("pareto", SearchAxiom::Pareto),
];

const RULES: [(&str, RuleName); 6] = [
    ("pav", RuleName::Pav),
    ("seqpav", RuleName::SeqPav),
    ("phragmen", RuleName::Phragmen),
    ("rulex", RuleName::Rulex),
    ("rulex-complete", RuleName::RulexComplete),
    ("dhondt", RuleName::Dhondt),
];

/// An axiom paired with a rule whose outputs are tested against it.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub axiom: SearchAxiom,
    pub rule: RuleName,
}

impl FromStr for Violation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            let axioms: Vec<&str> = AXIOMS.iter().map(|a| a.0).collect();
            let rules: Vec<&str> = RULES.iter().map(|r| r.0).collect();
            Error::InvalidParameters(format!(
                "unknown violation '{s}': expected AXIOM+RULE with AXIOM in {} and RULE in {}",
                axioms.join("|"),
                rules.join("|")
            ))
        };
        let (a, r) = if s == "ejr-phragmen" { ("ejr", "phragmen") } else { s.split_once('+').ok_or_else(bad)? };
        let axiom = AXIOMS.iter().find(|x| x.0 == a).ok_or_else(bad)?.1;
        let rule = RULES.iter().find(|x| x.0 == r).ok_or_else(bad)?.1;
        Ok(Violation { axiom, rule })
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = AXIOMS.iter().find(|x| x.1 == self.axiom).unwrap().0;
        let r = RULES.iter().find(|x| x.1 == self.rule).unwrap().0;
        write!(f, "{a}+{r}")
    }
}

/// A rule output violating the axiom.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub instance: String,
    pub num_voters: usize,
    pub num_candidates: usize,
    pub committee_size: usize,
    pub committee: Committee,
    pub witness: String,
}

impl Counterexample {
    fn key(&self) -> (usize, usize, usize, &str) {
        (self.num_voters, self.num_candidates, self.committee_size, &self.instance)
    }

    pub fn parse_instance(&self) -> ElectionInstance {
        ElectionInstance::parse(&self.instance).expect("search emits valid instances")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchOutcome {
    pub violation: String,
    pub seed: u64,
    pub trials: u64,
    pub max_n: usize,
    pub max_m: usize,
    pub max_k: usize,
    pub counterexample: Option<Counterexample>,
}

impl SearchOutcome {
    pub fn render(&self) -> String {
        let mut s = String::new();
        writeln!(s, "violation: {}", self.violation).unwrap();
        writeln!(
            s,
            "search: seed {} trials {} n<={} m<={} k<={}",
            self.seed, self.trials, self.max_n, self.max_m, self.max_k
        )
        .unwrap();
        match &self.counterexample {
            None => writeln!(s, "result: none found").unwrap(),
            Some(c) => {
                writeln!(s, "result: counterexample").unwrap();
                writeln!(s, "committee: {}", c.committee).unwrap();
                writeln!(s, "witness: {}", c.witness).unwrap();
                writeln!(s, "instance:").unwrap();
                s.push_str(&c.instance);
            }
        }
        s
    }
}

const DENSITIES: [(i64, i64); 5] = [(1, 4), (1, 3), (1, 2), (2, 3), (3, 4)];

/// Local-search steps per guided chain.
const GUIDED_STEPS: usize = 1000;
/// Guided chains per planted configuration are `trials / GUIDED_TRIALS_PER_CHAIN`.
const GUIDED_TRIALS_PER_CHAIN: u64 = 20;

/// Outputs of `rule`; every PAV winner counts.
fn outputs(instance: &ElectionInstance, rule: RuleName, budget: u64) -> Result<Vec<Committee>> {
    Ok(match rule {
        RuleName::Pav => pav_winners(instance, budget)?,
        RuleName::SeqPav => vec![seq_pav(instance)],
        RuleName::Phragmen => vec![phragmen_sequential(instance).committee()],
        RuleName::Rulex => vec![rule_x(instance).committee()],
        RuleName::RulexComplete => vec![rule_x_complete(instance, Completion::PhragmenContinuation).committee()],
        RuleName::Dhondt => vec![dhondt_committee(instance)?],
    })
}

/// Returns a witness description if `w` violates the axiom.
pub fn violates(instance: &ElectionInstance, w: &Committee, axiom: SearchAxiom, budget: u64) -> Result<Option<String>> {
    let dev = |d: Option<crate::axioms::Deviation>| d.map(|d| d.to_string());
    let alt = |a: Option<Committee>| a.map(|a| format!("alternative {a}"));
    Ok(match axiom {
        SearchAxiom::Pjr => dev(check_pjr(instance, w, budget)?),
        SearchAxiom::Ejr => dev(check_ejr(instance, w, budget)?),
        SearchAxiom::Core => dev(find_core_deviation(instance, w, &Rational::one(), budget)?),
        SearchAxiom::Core2 => dev(find_core_deviation(instance, w, &Rational::from_int(2), budget)?),
        SearchAxiom::CorePriceEq => {
            let opts = SubjectOptions { budget, ..SubjectOptions::default() };
            dev(check_core_subject_to(instance, w, CoreProperty::PriceEq, &opts)?)
        }
        SearchAxiom::Priceable => check_priceable(instance, w)?.is_none().then(|| "no price system".to_string()),
        SearchAxiom::LaminarProp => match check_laminar(instance) {
            Some(d) if !d.admits(w) => Some("not laminar proportional".to_string()),
            _ => None,
        },
        SearchAxiom::PigouDalton => alt(check_pigou_dalton(instance, w, budget)?),
        SearchAxiom::Pareto => alt(check_pareto(instance, w, budget)?),
    })
}

fn evaluate(instance: &ElectionInstance, v: Violation, budget: u64) -> Option<Counterexample> {
    // Instances the rule or checker cannot handle within budget are skipped.
    let committees = outputs(instance, v.rule, budget).ok()?;
    for w in committees {
        if let Ok(Some(witness)) = violates(instance, &w, v.axiom, budget) {
            return Some(Counterexample {
                instance: instance.to_text(),
                num_voters: instance.num_voters(),
                num_candidates: instance.num_candidates(),
                committee_size: instance.committee_size(),
                committee: w,
                witness,
            });
        }
    }
    None
}

/// Every profile with at most 3 voters and 3 candidates, ballots in
/// non-decreasing mask order.
fn exhaustive_small(args: &SearchArgs) -> Vec<ElectionInstance> {
    let mut out = Vec::new();
    for n in 1..=args.max_n.min(3) {
        for m in 1..=args.max_m.min(3) {
            for k in 1..=args.max_k.min(m) {
                let masks = 1usize << m;
                let mut current = vec![0usize; n];
                loop {
                    let ballots = current.iter().map(|&b| (0..m).filter(|c| b >> c & 1 == 1).collect()).collect();
                    out.push(ElectionInstance::new(m, k, ballots).expect("valid small instance"));
                    // next non-decreasing tuple
                    let mut i = n;
                    while i > 0 && current[i - 1] == masks - 1 {
                        i -= 1;
                    }
                    if i == 0 {
                        break;
                    }
                    current[i - 1] += 1;
                    let v = current[i - 1];
                    for x in &mut current[i..] {
                        *x = v;
                    }
                }
            }
        }
    }
    out
}

/// Planted-group shapes `(n, k, s)` for two commonly approved candidates and
/// `s = ⌈2n/k⌉` coalition members that could still leave every member with one
/// representative under Phragmén. Members pay at most the current price of a
/// common candidate, so their total load is below `(1 + 1/s)^s − 1`, and the
/// remaining voters must absorb the rest of the `k` units.
fn guided_configs(args: &SearchArgs) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    if args.max_m < 3 {
        return out;
    }
    for n in 3..=args.max_n {
        for k in 2..=args.max_k.min(args.max_m - 1) {
            let s = (2 * n).div_ceil(k);
            if s >= n {
                continue;
            }
            let need = (k * s + s - n) as f64 / n as f64;
            let most = (1.0 + 1.0 / s as f64).powi(s as i32) - 1.0;
            if most >= need - 1e-9 {
                out.push((n, k, s));
            }
        }
    }
    out
}

#[derive(Clone, Copy)]
struct Frac(i128, i128);

impl Frac {
    fn add(self, o: Frac) -> Option<Frac> {
        let n = self.0.checked_mul(o.1)?.checked_add(o.0.checked_mul(self.1)?)?;
        let d = self.1.checked_mul(o.1)?;
        let g = num_integer::gcd(n, d);
        Some(Frac(n / g, d / g))
    }

    fn less(self, o: Frac) -> Option<bool> {
        Some(self.0.checked_mul(o.1)? < o.0.checked_mul(self.1)?)
    }

    fn to_f64(self) -> f64 {
        self.0 as f64 / self.1 as f64
    }
}

/// Phragmén with unit price on `i128` fractions. Returns how many seats were
/// filled before some planted voter (the first `s`) got 2 representatives,
/// and how much the planted voters paid up to then; `None` on overflow.
fn planted_progress(ballots: &[Vec<bool>], k: usize, s: usize) -> Option<(usize, f64)> {
    let n = ballots.len();
    let m = ballots[0].len();
    let mut load = vec![Frac(0, 1); n];
    let mut elected = vec![false; m];
    let mut reps = vec![0; s];
    let mut paid = 0.0;
    for step in 0..k {
        let mut best: Option<(Frac, usize)> = None;
        for c in (0..m).filter(|&c| !elected[c]) {
            let mut sum = Frac(1, 1);
            let mut count = 0;
            for v in (0..n).filter(|&v| ballots[v][c]) {
                sum = sum.add(load[v])?;
                count += 1;
            }
            if count == 0 {
                continue;
            }
            let t = Frac(sum.0, sum.1.checked_mul(count)?);
            let better = match best {
                None => true,
                Some((b, _)) => t.less(b)?,
            };
            if better {
                best = Some((t, c));
            }
        }
        let Some((t, c)) = best else { return Some((step, paid)) };
        elected[c] = true;
        for v in (0..n).filter(|&v| ballots[v][c]) {
            if v < s {
                paid += t.to_f64() - load[v].to_f64();
                reps[v] += 1;
            }
            load[v] = t;
        }
        if reps.iter().any(|&r| r >= 2) {
            return Some((step, paid));
        }
    }
    Some((k, paid))
}

/// One annealing chain: voters `0..s` approve the last two candidates, the
/// rest of the profile is mutated one approval at a time.
fn guided_chain(
    (n, k, s): (usize, usize, usize),
    m: usize,
    rng: &mut ChaCha8Rng,
    v: Violation,
    budget: u64,
) -> Option<Counterexample> {
    let mut below = |b: usize| (rng.next_u64() % b as u64) as usize;
    let mut ballots: Vec<Vec<bool>> =
        (0..n).map(|i| (0..m).map(|c| if c >= m - 2 { i < s } else { below(3) == 0 }).collect()).collect();
    let score = |b: &[Vec<bool>]| planted_progress(b, k, s).map(|(j, paid)| (j, j as f64 + paid / 4.0));
    let mut current = score(&ballots).map_or(f64::MIN, |x| x.1);
    for _ in 0..GUIDED_STEPS {
        let voter = below(n);
        let cand = below(m - 2);
        ballots[voter][cand] ^= true;
        let Some((filled, value)) = score(&ballots) else {
            ballots[voter][cand] ^= true;
            continue;
        };
        if filled == k {
            let lists = ballots.iter().map(|b| (0..m).filter(|&c| b[c]).collect()).collect();
            let inst = ElectionInstance::new(m, k, lists).ok()?;
            if let Some(c) = evaluate(&inst, v, budget) {
                return Some(c);
            }
        }
        if value >= current || below(20) == 0 {
            current = value;
        } else {
            ballots[voter][cand] ^= true;
        }
    }
    None
}

fn random_params(args: &SearchArgs) -> Vec<(usize, usize, usize, u64, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut below = |b: usize| (rng.next_u64() % b as u64) as usize;
    (0..args.trials)
        .map(|_| {
            let n = 1 + below(args.max_n);
            let m = 1 + below(args.max_m);
            let k = 1 + below(args.max_k.min(m));
            let density = below(DENSITIES.len());
            let seed = ((below(1 << 31) as u64) << 32) | below(1 << 31) as u64;
            (n, m, k, seed, density)
        })
        .collect()
}

/// Runs the search and returns the smallest counterexample found, ordered by
/// `(n, m, k, instance text)`. The result does not depend on thread count.
pub fn search(args: &SearchArgs) -> Result<SearchOutcome> {
    let violation: Violation = args.violation.parse()?;
    if args.max_n == 0 || args.max_m == 0 || args.max_k == 0 {
        return Err(Error::InvalidParameters("search bounds must be positive".into()));
    }
    let best: Mutex<Option<Counterexample>> = Mutex::new(None);
    let offer = |c: Counterexample| {
        let mut guard = best.lock().unwrap();
        if guard.as_ref().is_none_or(|b| c.key() < b.key()) {
            *guard = Some(c);
        }
    };
    let dominated = |n: usize, m: usize, k: usize| {
        let guard = best.lock().unwrap();
        guard
            .as_ref()
            .is_some_and(|b| (n, m, k) > (b.num_voters, b.num_candidates, b.committee_size))
    };

    for inst in exhaustive_small(args) {
        if let Some(c) = evaluate(&inst, violation, args.budget) {
            offer(c);
        }
    }

    let params = random_params(args);
    let threads = std::thread::available_parallelism().map_or(1, |t| t.get()).min(16);
    let chunk = params.len().div_ceil(threads).max(1);
    std::thread::scope(|scope| {
        for part in params.chunks(chunk) {
            let offer = &offer;
            let dominated = &dominated;
            scope.spawn(move || {
                for &(n, m, k, seed, d) in part {
                    if dominated(n, m, k) {
                        continue;
                    }
                    let (num, den) = DENSITIES[d];
                    let inst = gen_random(seed, n, m, k, &Rational::new(num, den)).expect("valid parameters");
                    if let Some(c) = evaluate(&inst, violation, args.budget) {
                        offer(c);
                    }
                }
            });
        }
    });

    let guided = matches!(violation.rule, RuleName::Phragmen)
        && matches!(violation.axiom, SearchAxiom::Pjr | SearchAxiom::Ejr | SearchAxiom::Core);
    if guided {
        let per_config = (args.trials / GUIDED_TRIALS_PER_CHAIN).max(1);
        let m = args.max_m;
        let chains: Vec<((usize, usize, usize), u64)> = guided_configs(args)
            .into_iter()
            .flat_map(|cfg| (0..per_config).map(move |i| (cfg, i)))
            .collect();
        let chunk = chains.len().div_ceil(threads).max(1);
        std::thread::scope(|scope| {
            for part in chains.chunks(chunk) {
                let offer = &offer;
                let dominated = &dominated;
                scope.spawn(move || {
                    for &(cfg, i) in part {
                        if dominated(cfg.0, m, cfg.1) {
                            continue;
                        }
                        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
                        rng.set_stream(((cfg.0 as u64) << 48) | ((cfg.1 as u64) << 40) | i);
                        if let Some(c) = guided_chain(cfg, m, &mut rng, violation, args.budget) {
                            offer(c);
                        }
                    }
                });
            }
        });
    }

    Ok(SearchOutcome {
        violation: violation.to_string(),
        seed: args.seed,
        trials: args.trials,
        max_n: args.max_n,
        max_m: args.max_m,
        max_k: args.max_k,
        counterexample: best.into_inner().unwrap(),
    })
}

