//! Proportionality axioms and their witnesses.
//!
//! Every checker returns an explicit witness (a price system, a deviation or
//! a better committee) or `None`. Exhaustive searches take a node budget and
//! fail with [`Error::BudgetExceeded`] instead of approximating.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use itertools::Itertools;
use num_bigint::BigUint;
use num_traits::One;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exactmath::{lp_feasible, lp_maximize, Bound, LinearProgram, Relation};
use crate::model::{Committee, ElectionInstance};
use crate::rational::Rational;

/// Default node budget for exhaustive searches.
pub const DEFAULT_SEARCH_BUDGET: u64 = 50_000_000;

/// A price `p` and per-voter payments `p_i(c)`; only positive payments are
/// listed.
#[derive(Clone, Debug, PartialEq)]
pub struct PriceSystem {
    pub price: Rational,
    pub payments: Vec<Vec<(usize, Rational)>>,
}

impl PriceSystem {
    pub fn spent_by(&self, voter: usize) -> Rational {
        self.payments[voter].iter().map(|(_, a)| a).sum()
    }

    pub fn collected_for(&self, candidate: usize) -> Rational {
        self.payments
            .iter()
            .flat_map(|p| p.iter())
            .filter(|(c, _)| *c == candidate)
            .map(|(_, a)| a)
            .sum()
    }
}

impl Serialize for PriceSystem {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let payments: Vec<BTreeMap<String, String>> = self
            .payments
            .iter()
            .map(|p| {
                p.iter()
                    .map(|(c, a)| ((c + 1).to_string(), a.to_string()))
                    .collect()
            })
            .collect();
        let mut st = serializer.serialize_struct("PriceSystem", 2)?;
        st.serialize_field("price", &self.price)?;
        st.serialize_field("payments", &payments)?;
        st.end()
    }
}

/// Checks the price-system conditions directly, without any LP.
pub fn verify_price_system(
    instance: &ElectionInstance,
    w: &Committee,
    ps: &PriceSystem,
) -> std::result::Result<(), String> {
    let n = instance.num_voters();
    if !ps.price.is_positive() {
        return Err("price must be positive".into());
    }
    if ps.payments.len() != n {
        return Err(format!("{} payment lists for {} voters", ps.payments.len(), n));
    }
    let m = instance.num_candidates();
    let mut collected = vec![Rational::zero(); m];
    let mut left = Vec::with_capacity(n);
    for (i, pays) in ps.payments.iter().enumerate() {
        let mut spent = Rational::zero();
        for (c, a) in pays {
            if *c >= m {
                return Err(format!("voter {} pays for unknown candidate {}", i + 1, c + 1));
            }
            if a.is_negative() {
                return Err(format!("voter {} has a negative payment", i + 1));
            }
            if a.is_positive() && !instance.approves(i, *c) {
                return Err(format!("voter {} pays for unapproved candidate {}", i + 1, c + 1));
            }
            collected[*c] += a;
            spent += a;
        }
        if spent > Rational::one() {
            return Err(format!("voter {} spends {} > 1", i + 1, spent));
        }
        left.push(Rational::one() - spent);
    }
    for (c, total) in collected.iter().enumerate() {
        if w.contains(c) {
            if *total != ps.price {
                return Err(format!("candidate {} collects {} != {}", c + 1, total, ps.price));
            }
        } else {
            if !total.is_zero() {
                return Err(format!("unelected candidate {} collects {}", c + 1, total));
            }
            let spare: Rational = instance.supporters(c).iter().map(|&i| &left[i]).sum();
            if spare > ps.price {
                return Err(format!(
                    "supporters of unelected candidate {} hold {} > {}",
                    c + 1,
                    spare,
                    ps.price
                ));
            }
        }
    }
    Ok(())
}

/// Voters grouped by identical ballots, in first-occurrence order.
fn voter_groups(instance: &ElectionInstance) -> Vec<Vec<usize>> {
    let mut index: BTreeMap<&[usize], usize> = BTreeMap::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (v, ballot) in instance.ballots().iter().enumerate() {
        let g = *index.entry(ballot.as_slice()).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(v);
    }
    groups
}

/// The priceability program for `w`: variable 0 is the price, the others
/// are per-voter payments `x[g][c]` shared by all voters of ballot group `g`.
/// Voters with identical ballots can be assumed to pay identically, since
/// averaging any solution over them keeps it feasible with the same price.
pub struct PriceabilityProgram {
    pub lp: LinearProgram,
    groups: Vec<Vec<usize>>,
    vars: Vec<(usize, usize)>,
}

impl PriceabilityProgram {
    pub fn build(instance: &ElectionInstance, w: &Committee) -> Result<Self> {
        instance.check_committee(w)?;
        let groups = voter_groups(instance);
        let mut vars = Vec::new();
        let mut var_of: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (g, voters) in groups.iter().enumerate() {
            for &c in instance.ballot(voters[0]) {
                if w.contains(c) {
                    var_of.insert((g, c), vars.len() + 1);
                    vars.push((g, c));
                }
            }
        }
        let n = instance.num_voters();
        let mut lp = LinearProgram::new(vars.len() + 1);
        lp.bounds[0] = Bound::between(Rational::zero(), Rational::from_usize(n));
        lp.set_objective(&[(0, Rational::one())]);
        let size = |g: usize| Rational::from_usize(groups[g].len());

        for g in 0..groups.len() {
            let terms: Vec<(usize, Rational)> = vars
                .iter()
                .enumerate()
                .filter(|(_, (gg, _))| *gg == g)
                .map(|(j, _)| (j + 1, Rational::one()))
                .collect();
            if !terms.is_empty() {
                lp.add_sparse(&terms, Relation::Le, Rational::one());
            }
        }
        let mut group_of_voter = vec![0; n];
        for (g, voters) in groups.iter().enumerate() {
            for &v in voters {
                group_of_voter[v] = g;
            }
        }
        let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
        for c in 0..instance.num_candidates() {
            let mut gs: Vec<usize> = instance
                .supporters(c)
                .iter()
                .map(|&v| group_of_voter[v])
                .collect();
            gs.sort_unstable();
            gs.dedup();
            if w.contains(c) {
                let mut terms = vec![(0, Rational::from_int(-1))];
                for &g in &gs {
                    terms.push((var_of[&(g, c)], size(g)));
                }
                lp.add_sparse(&terms, Relation::Eq, Rational::zero());
            } else if !gs.is_empty() && seen.insert(gs.clone()) {
                // Σ_g n_g (1 - Σ_c' x[g][c']) <= p
                let mut terms = vec![(0, Rational::one())];
                let mut total = Rational::zero();
                for &g in &gs {
                    total += size(g);
                    for (j, (gg, _)) in vars.iter().enumerate() {
                        if *gg == g {
                            terms.push((j + 1, size(g)));
                        }
                    }
                }
                lp.add_sparse(&terms, Relation::Ge, total);
            }
        }
        Ok(PriceabilityProgram { lp, groups, vars })
    }

    fn expand(&self, n: usize, x: &[Rational]) -> PriceSystem {
        let mut payments = vec![Vec::new(); n];
        for (j, (g, c)) in self.vars.iter().enumerate() {
            let a = &x[j + 1];
            if a.is_positive() {
                for &v in &self.groups[*g] {
                    payments[v].push((*c, a.clone()));
                }
            }
        }
        PriceSystem {
            price: x[0].clone(),
            payments,
        }
    }
}

/// A price system supporting `w`, if one exists (largest feasible price).
pub fn check_priceable(instance: &ElectionInstance, w: &Committee) -> Result<Option<PriceSystem>> {
    if w.members().iter().any(|&c| instance.supporters(c).is_empty()) {
        instance.check_committee(w)?;
        return Ok(None);
    }
    let program = PriceabilityProgram::build(instance, w)?;
    let outcome = lp_maximize(&program.lp)?;
    let Some(x) = outcome.assignment else {
        return Ok(None);
    };
    if !x[0].is_positive() {
        return Ok(None);
    }
    let ps = program.expand(instance.num_voters(), &x);
    if let Err(e) = verify_price_system(instance, w, &ps) {
        panic!("LP witness failed independent verification: {e}");
    }
    Ok(Some(ps))
}

/// Node of a laminar derivation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaminarNode {
    pub voters: Vec<usize>,
    pub seats: usize,
    pub kind: LaminarKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LaminarKind {
    /// All voters share one ballot with at least `seats` candidates.
    Unanimous { candidates: Vec<usize> },
    /// A candidate approved by every voter, elected before the rest.
    CommonCandidate {
        candidate: usize,
        child: Box<LaminarNode>,
    },
    /// Disjoint parts with equal voter-to-seat ratios.
    Split { children: Vec<LaminarNode> },
}

/// A laminar derivation of a whole instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LaminarDecomposition {
    pub root: LaminarNode,
}

impl LaminarNode {
    fn admits(&self, w: &Committee) -> bool {
        match &self.kind {
            LaminarKind::Unanimous { candidates } => {
                candidates.iter().filter(|&&c| w.contains(c)).count() == self.seats
            }
            LaminarKind::CommonCandidate { candidate, child } => {
                w.contains(*candidate) && child.admits(w)
            }
            LaminarKind::Split { children } => children.iter().all(|c| c.admits(w)),
        }
    }

    fn count(&self) -> BigUint {
        match &self.kind {
            LaminarKind::Unanimous { candidates } => binomial(candidates.len(), self.seats),
            LaminarKind::CommonCandidate { child, .. } => child.count(),
            LaminarKind::Split { children } => children.iter().map(|c| c.count()).product(),
        }
    }

    fn committees(&self) -> Vec<Vec<usize>> {
        match &self.kind {
            LaminarKind::Unanimous { candidates } => candidates
                .iter()
                .copied()
                .combinations(self.seats)
                .collect(),
            LaminarKind::CommonCandidate { candidate, child } => child
                .committees()
                .into_iter()
                .map(|mut w| {
                    w.push(*candidate);
                    w
                })
                .collect(),
            LaminarKind::Split { children } => {
                let mut acc: Vec<Vec<usize>> = vec![Vec::new()];
                for child in children {
                    let parts = child.committees();
                    acc = acc
                        .iter()
                        .flat_map(|a| {
                            parts.iter().map(move |p| {
                                let mut x = a.clone();
                                x.extend(p);
                                x
                            })
                        })
                        .collect();
                }
                acc
            }
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
        let pad = "  ".repeat(depth);
        let voters = self.voters.iter().map(|v| (v + 1).to_string()).join(",");
        match &self.kind {
            LaminarKind::Unanimous { candidates } => writeln!(
                f,
                "{pad}unanimous voters={{{voters}}} k={} candidates={{{}}}",
                self.seats,
                candidates.iter().map(|c| (c + 1).to_string()).join(",")
            ),
            LaminarKind::CommonCandidate { candidate, child } => {
                writeln!(f, "{pad}common c{} voters={{{voters}}} k={}", candidate + 1, self.seats)?;
                child.write(f, depth + 1)
            }
            LaminarKind::Split { children } => {
                writeln!(f, "{pad}split voters={{{voters}}} k={}", self.seats)?;
                children.iter().try_for_each(|c| c.write(f, depth + 1))
            }
        }
    }
}

impl fmt::Display for LaminarDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.write(f, 0)
    }
}

fn binomial(n: usize, r: usize) -> BigUint {
    if r > n {
        return BigUint::from(0u32);
    }
    let mut acc = BigUint::one();
    for i in 0..r {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

impl LaminarDecomposition {
    pub fn committee_size(&self) -> usize {
        self.root.seats
    }

    /// Whether `w` is laminar proportional along this derivation.
    pub fn admits(&self, w: &Committee) -> bool {
        w.len() == self.root.seats && self.root.admits(w)
    }

    /// Number of laminar proportional committees.
    pub fn count_proportional(&self) -> BigUint {
        self.root.count()
    }

    /// All laminar proportional committees, sorted; fails above `limit`.
    pub fn proportional_committees(&self, limit: u64) -> Result<Vec<Committee>> {
        if self.count_proportional() > BigUint::from(limit) {
            return Err(Error::BudgetExceeded {
                what: "laminar proportional committees",
                budget: limit,
            });
        }
        let mut all: Vec<Committee> = self.root.committees().into_iter().map(Committee::new).collect();
        all.sort();
        Ok(all)
    }
}

/// Recognizes laminar instances and returns their derivation.
///
/// The derivation is essentially canonical. Non-unanimous profiles with
/// commonly approved candidates must strip all of them first (a split needs
/// disjoint parts), and otherwise every part of a split is a union of
/// connected components of the shared-candidate graph. A multi-way split
/// into components stands for any sequence of binary splits, which exists
/// exactly when every component's seat share `k·n_j/n` is integral.
pub fn check_laminar(instance: &ElectionInstance) -> Option<LaminarDecomposition> {
    let voters: Vec<usize> = (0..instance.num_voters()).collect();
    let mut stripped = vec![false; instance.num_candidates()];
    laminar_rec(instance, voters, instance.committee_size(), &mut stripped)
        .map(|root| LaminarDecomposition { root })
}

fn laminar_rec(
    instance: &ElectionInstance,
    voters: Vec<usize>,
    k: usize,
    stripped: &mut [bool],
) -> Option<LaminarNode> {
    let ballot = |v: usize| -> Vec<usize> {
        instance
            .ballot(v)
            .iter()
            .copied()
            .filter(|&c| !stripped[c])
            .collect()
    };
    let first = ballot(voters[0]);
    if voters.iter().all(|&v| ballot(v) == first) {
        if first.len() < k {
            return None;
        }
        return Some(LaminarNode {
            voters,
            seats: k,
            kind: LaminarKind::Unanimous { candidates: first },
        });
    }
    let common: Vec<usize> = first
        .iter()
        .copied()
        .filter(|&c| voters.iter().all(|&v| instance.approves(v, c)))
        .collect();
    if let Some(&c) = common.first() {
        if k == 0 {
            return None;
        }
        stripped[c] = true;
        let child = laminar_rec(instance, voters.clone(), k - 1, stripped)?;
        return Some(LaminarNode {
            voters,
            seats: k,
            kind: LaminarKind::CommonCandidate {
                candidate: c,
                child: Box::new(child),
            },
        });
    }

    // Connected components of voters linked by shared candidates.
    let mut parent: Vec<usize> = (0..voters.len()).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut y = x;
        while parent[y] != r {
            let next = parent[y];
            parent[y] = r;
            y = next;
        }
        r
    }
    let mut holder: BTreeMap<usize, usize> = BTreeMap::new();
    for (idx, &v) in voters.iter().enumerate() {
        for c in ballot(v) {
            match holder.get(&c) {
                Some(&other) => {
                    let (a, b) = (find(&mut parent, idx), find(&mut parent, other));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
                None => {
                    holder.insert(c, idx);
                }
            }
        }
    }
    let mut parts: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (idx, &v) in voters.iter().enumerate() {
        let root = find(&mut parent, idx);
        parts.entry(root).or_default().push(v);
    }
    if parts.len() < 2 {
        return None;
    }
    let n = voters.len();
    let mut children = Vec::with_capacity(parts.len());
    for (_, part) in parts {
        if (k * part.len()) % n != 0 {
            return None;
        }
        let share = k * part.len() / n;
        children.push(laminar_rec(instance, part, share, stripped)?);
    }
    Some(LaminarNode {
        voters,
        seats: k,
        kind: LaminarKind::Split { children },
    })
}

/// Laminar proportionality of `w`; errors on non-laminar instances.
pub fn check_laminar_proportional(instance: &ElectionInstance, w: &Committee) -> Result<bool> {
    instance.check_committee(w)?;
    let decomposition = check_laminar(instance).ok_or(Error::NotLaminar)?;
    Ok(decomposition.admits(w))
}

/// Whether the approver sets `N(c)` form a laminar family: any two are
/// disjoint or nested.
pub fn approver_family_is_laminar(instance: &ElectionInstance) -> bool {
    let sets: Vec<BTreeSet<usize>> = (0..instance.num_candidates())
        .map(|c| instance.supporters(c).iter().copied().collect())
        .collect();
    sets.iter().tuple_combinations().all(|(a, b)| {
        a.is_disjoint(b) || a.is_subset(b) || b.is_subset(a)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviationKind {
    Core,
    LambdaCore,
    Cohesive,
    PriceEq,
    Priceable,
    Pjr,
    Ejr,
}

/// A coalition `S` together with the candidate set `T` it would elect.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Deviation {
    pub coalition: Vec<usize>,
    pub alternative: Committee,
    pub kind: DeviationKind,
}

impl Deviation {
    pub fn coalition_literal(&self) -> String {
        self.coalition.iter().map(|v| (v + 1).to_string()).join(",")
    }
}

impl fmt::Display for Deviation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "S={{{}}} T={{{}}}",
            self.coalition_literal(),
            self.alternative.to_literal()
        )
    }
}

impl Serialize for Deviation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("Deviation", 3)?;
        st.serialize_field("kind", &self.kind)?;
        st.serialize_field("coalition", &self.coalition_literal())?;
        st.serialize_field("alternative", &self.alternative)?;
        st.end()
    }
}

struct Budget {
    used: u64,
    limit: u64,
    what: &'static str,
}

impl Budget {
    fn new(limit: u64, what: &'static str) -> Self {
        Budget { used: 0, limit, what }
    }

    fn tick(&mut self) -> Result<()> {
        self.used += 1;
        if self.used > self.limit {
            return Err(Error::BudgetExceeded {
                what: self.what,
                budget: self.limit,
            });
        }
        Ok(())
    }
}

/// Candidates approved by at least one voter.
fn approved_candidates(instance: &ElectionInstance) -> Vec<usize> {
    (0..instance.num_candidates())
        .filter(|&c| !instance.supporters(c).is_empty())
        .collect()
}

/// Depth-first enumeration of candidate sets `T` (in lexicographic order)
/// together with the voters approving all of `T`, pruned by `keep`.
fn cohesive_sets(
    instance: &ElectionInstance,
    budget: &mut Budget,
    keep: &dyn Fn(usize, usize) -> bool,
    visit: &mut dyn FnMut(&[usize], &[usize]) -> Result<Option<Deviation>>,
) -> Result<Option<Deviation>> {
    fn rec(
        instance: &ElectionInstance,
        start: usize,
        t: &mut Vec<usize>,
        voters: &[usize],
        budget: &mut Budget,
        keep: &dyn Fn(usize, usize) -> bool,
        visit: &mut dyn FnMut(&[usize], &[usize]) -> Result<Option<Deviation>>,
    ) -> Result<Option<Deviation>> {
        for c in start..instance.num_candidates() {
            let next: Vec<usize> = voters
                .iter()
                .copied()
                .filter(|&v| instance.approves(v, c))
                .collect();
            if !keep(t.len() + 1, next.len()) {
                continue;
            }
            budget.tick()?;
            t.push(c);
            if let Some(d) = visit(t, &next)? {
                return Ok(Some(d));
            }
            if let Some(d) = rec(instance, c + 1, t, &next, budget, keep, visit)? {
                return Ok(Some(d));
            }
            t.pop();
        }
        Ok(None)
    }
    let all: Vec<usize> = (0..instance.num_voters()).collect();
    rec(instance, 0, &mut Vec::new(), &all, budget, keep, visit)
}

/// Proportional justified representation. The group quota is `ℓ·n/|W|`
/// (`ℓ·n/k` for the empty committee).
pub fn check_pjr(instance: &ElectionInstance, w: &Committee, budget: u64) -> Result<Option<Deviation>> {
    instance.check_committee(w)?;
    let n = instance.num_voters();
    let size = if w.is_empty() { instance.committee_size() } else { w.len() };
    let mut budget = Budget::new(budget, "check_pjr");
    let mut ybudget = Budget::new(budget.limit, "check_pjr");
    let keep = |l: usize, voters: usize| voters * size >= l * n;
    let mut visit = |t: &[usize], voters: &[usize]| -> Result<Option<Deviation>> {
        let l = t.len();
        let covered: BTreeSet<usize> = voters
            .iter()
            .flat_map(|&v| instance.ballot(v).iter().copied().filter(|&c| w.contains(c)))
            .collect();
        let covered: Vec<usize> = covered.into_iter().collect();
        let pick = (l - 1).min(covered.len());
        for y in covered.iter().copied().combinations(pick) {
            ybudget.tick()?;
            let s: Vec<usize> = voters
                .iter()
                .copied()
                .filter(|&v| {
                    instance
                        .ballot(v)
                        .iter()
                        .all(|&c| !w.contains(c) || y.contains(&c))
                })
                .collect();
            if s.len() * size >= l * n {
                return Ok(Some(Deviation {
                    coalition: s,
                    alternative: Committee::new(t.iter().copied()),
                    kind: DeviationKind::Pjr,
                }));
            }
        }
        Ok(None)
    };
    cohesive_sets(instance, &mut budget, &keep, &mut visit)
}

/// Extended justified representation.
pub fn check_ejr(instance: &ElectionInstance, w: &Committee, budget: u64) -> Result<Option<Deviation>> {
    let welfare = instance.welfare_vector(w)?;
    let u = welfare.utilities();
    let n = instance.num_voters();
    let k = instance.committee_size();
    let mut budget = Budget::new(budget, "check_ejr");
    let keep = |l: usize, voters: usize| voters * k >= l * n;
    let mut visit = |t: &[usize], voters: &[usize]| -> Result<Option<Deviation>> {
        let l = t.len();
        let s: Vec<usize> = voters.iter().copied().filter(|&v| u[v] < l).collect();
        if s.len() * k >= l * n {
            return Ok(Some(Deviation {
                coalition: s,
                alternative: Committee::new(t.iter().copied()),
                kind: DeviationKind::Ejr,
            }));
        }
        Ok(None)
    };
    cohesive_sets(instance, &mut budget, &keep, &mut visit)
}

fn require_masks(instance: &ElectionInstance) -> Result<Vec<u64>> {
    instance.ballot_masks().ok_or(Error::InvalidParameters(
        "exhaustive search supports at most 64 candidates".into(),
    ))
}

fn check_lambda(lambda: &Rational) -> Result<()> {
    if *lambda < 1 {
        return Err(Error::InvalidParameters(format!("lambda must be at least 1, got {lambda}")));
    }
    Ok(())
}

/// Whether a voter with utility `u` under `W` and `a` under `T` gains enough.
fn gains(a: usize, u: usize, lambda: &Rational) -> bool {
    if *lambda == 1 {
        return a > u;
    }
    let threshold = Rational::max(lambda * Rational::from_usize(u), Rational::one());
    Rational::from_usize(a) > threshold
}

/// Calls `f` on every nonempty subset of approved candidates of size at most
/// `k`, by size and then lexicographically, until it returns a witness.
fn for_each_alternative<F>(
    instance: &ElectionInstance,
    budget: &mut Budget,
    mut f: F,
) -> Result<Option<Deviation>>
where
    F: FnMut(&[usize], u64) -> Result<Option<Deviation>>,
{
    let pool = approved_candidates(instance);
    for size in 1..=instance.committee_size().min(pool.len()) {
        for t in pool.iter().copied().combinations(size) {
            budget.tick()?;
            let mask = t.iter().fold(0u64, |acc, &c| acc | (1 << c));
            if let Some(d) = f(&t, mask)? {
                return Ok(Some(d));
            }
        }
    }
    Ok(None)
}

/// Searches for a (λ-)core deviation. For `λ = 1` members must strictly gain;
/// for `λ > 1` they need more than `max(λ·u_i, 1)` approved members of `T`.
/// The witness has the first `T` by size then lexicographic order, and the
/// largest coalition for that `T`.
pub fn find_core_deviation(
    instance: &ElectionInstance,
    w: &Committee,
    lambda: &Rational,
    budget: u64,
) -> Result<Option<Deviation>> {
    check_lambda(lambda)?;
    let welfare = instance.welfare_vector(w)?;
    let u = welfare.utilities();
    let masks = require_masks(instance)?;
    let n = instance.num_voters();
    let k = instance.committee_size();
    let kind = if *lambda == 1 { DeviationKind::Core } else { DeviationKind::LambdaCore };
    let mut budget = Budget::new(budget, "find_core_deviation");
    for_each_alternative(instance, &mut budget, |t, mask| {
        let s: Vec<usize> = (0..n)
            .filter(|&i| gains((masks[i] & mask).count_ones() as usize, u[i], lambda))
            .collect();
        if t.len() * n <= s.len() * k {
            return Ok(Some(Deviation {
                coalition: s,
                alternative: Committee::new(t.iter().copied()),
                kind,
            }));
        }
        Ok(None)
    })
}

/// The least `λ ≥ 1` for which `W` is in the λ-core (with the
/// `max(λ·u_i, 1)` threshold), or `None` if no finite λ works.
pub fn minimal_core_lambda(
    instance: &ElectionInstance,
    w: &Committee,
    budget: u64,
) -> Result<Option<Rational>> {
    let welfare = instance.welfare_vector(w)?;
    let u = welfare.utilities();
    let masks = require_masks(instance)?;
    let n = instance.num_voters();
    let k = instance.committee_size();
    let mut best = Rational::one();
    let mut infinite = false;
    let mut budget = Budget::new(budget, "minimal_core_lambda");
    for_each_alternative(instance, &mut budget, |t, mask| {
        // q-th largest ratio a_i/u_i among voters with a_i >= 2
        let q = (t.len() * n).div_ceil(k);
        let mut zero_utility = 0;
        let mut ratios: Vec<Rational> = Vec::new();
        for i in 0..n {
            let a = (masks[i] & mask).count_ones() as usize;
            if a < 2 {
                continue;
            }
            if u[i] == 0 {
                zero_utility += 1;
            } else {
                ratios.push(Rational::ratio(a, u[i]));
            }
        }
        if zero_utility >= q {
            infinite = true;
        } else if zero_utility + ratios.len() >= q {
            ratios.sort_by(|a, b| b.cmp(a));
            let r = &ratios[q - 1 - zero_utility];
            if *r > best {
                best = r.clone();
            }
        }
        Ok(None)
    })?;
    Ok(if infinite { None } else { Some(best) })
}

/// Whether `λ ≤ 2·log₂(2k) + 1`, decided exactly via `2^(λ−1) ≤ (2k)²`.
pub fn within_log_bound(lambda: &Rational, k: usize) -> bool {
    if *lambda <= 1 {
        return true;
    }
    let excess = lambda - Rational::one();
    let (Ok(p), Ok(q)) = (u32::try_from(excess.numer()), u32::try_from(excess.denom())) else {
        return false;
    };
    let lhs = BigUint::from(2u32).pow(p);
    let rhs = BigUint::from(4 * k * k).pow(q);
    lhs <= rhs
}

/// Checks a given deviation without search: `|T| ≤ k|S|/n` and every member
/// of `S` gains as required for `λ`.
pub fn verify_deviation(
    instance: &ElectionInstance,
    w: &Committee,
    deviation: &Deviation,
    lambda: &Rational,
) -> Result<bool> {
    check_lambda(lambda)?;
    instance.check_committee(&deviation.alternative)?;
    let welfare = instance.welfare_vector(w)?;
    let n = instance.num_voters();
    let s = &deviation.coalition;
    if let Some(&v) = s.iter().find(|&&v| v >= n) {
        return Err(Error::VoterOutOfRange { voter: v, num_voters: n });
    }
    let distinct: BTreeSet<usize> = s.iter().copied().collect();
    if distinct.len() != s.len() || s.is_empty() || deviation.alternative.is_empty() {
        return Ok(false);
    }
    if deviation.alternative.len() * n > s.len() * instance.committee_size() {
        return Ok(false);
    }
    Ok(s.iter().all(|&i| {
        let a = deviation.alternative.count_in(instance.ballot(i));
        gains(a, welfare.utilities()[i], lambda)
    }))
}

/// Restriction on the deviations allowed in the constrained core.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoreProperty {
    /// Every coalition member approves all of `T`.
    Cohesive,
    /// `T` is priceable in the restricted instance with equal payments.
    PriceEq,
    /// `T` is priceable in the restricted instance.
    Priceable,
}

/// Options for [`check_core_subject_to`].
#[derive(Clone, Debug)]
pub struct SubjectOptions {
    pub budget: u64,
    /// Use the restricted instance's ratio `|S|/|T|` as the per-candidate
    /// total of equal payments instead of the original `n/k`.
    pub restricted_price: bool,
}

impl Default for SubjectOptions {
    fn default() -> Self {
        SubjectOptions {
            budget: DEFAULT_SEARCH_BUDGET,
            restricted_price: false,
        }
    }
}

/// Equal-payment priceability of `T` for the coalition `S` at the given
/// per-candidate total: each approver in `S` of `c ∈ T` pays
/// `total/|N_S(c)|`, and nobody spends more than 1.
pub fn price_eq_holds(instance: &ElectionInstance, s: &[usize], t: &Committee, total: &Rational) -> bool {
    let mut share = Vec::with_capacity(t.len());
    for &c in t.members() {
        let count = s.iter().filter(|&&v| instance.approves(v, c)).count();
        if count == 0 {
            return false;
        }
        share.push(total / Rational::from_usize(count));
    }
    s.iter().all(|&v| {
        let spent: Rational = t
            .members()
            .iter()
            .zip(&share)
            .filter(|(c, _)| instance.approves(v, **c))
            .map(|(_, x)| x)
            .sum();
        spent <= Rational::one()
    })
}

/// The same equal-payment condition decided by an exact LP with one payment
/// variable per candidate of `T`.
pub fn price_eq_lp(instance: &ElectionInstance, s: &[usize], t: &Committee, total: &Rational) -> Result<bool> {
    let mut lp = LinearProgram::new(t.len());
    for (j, &c) in t.members().iter().enumerate() {
        let count = s.iter().filter(|&&v| instance.approves(v, c)).count();
        lp.add_sparse(&[(j, Rational::from_usize(count))], Relation::Eq, total.clone());
    }
    for &v in s {
        let terms: Vec<(usize, Rational)> = t
            .members()
            .iter()
            .enumerate()
            .filter(|(_, c)| instance.approves(v, **c))
            .map(|(j, _)| (j, Rational::one()))
            .collect();
        lp.add_sparse(&terms, Relation::Le, Rational::one());
    }
    Ok(lp_feasible(&lp)?.is_optimal())
}

/// Whether `T` satisfies `property` in `(P|_S, |T|)`.
pub fn deviation_has_property(
    instance: &ElectionInstance,
    s: &[usize],
    t: &Committee,
    property: CoreProperty,
    restricted_price: bool,
) -> Result<bool> {
    match property {
        CoreProperty::Cohesive => Ok(s
            .iter()
            .all(|&v| t.count_in(instance.ballot(v)) == t.len())),
        CoreProperty::PriceEq => {
            let total = if restricted_price {
                Rational::ratio(s.len(), t.len())
            } else {
                Rational::ratio(instance.num_voters(), instance.committee_size())
            };
            Ok(price_eq_holds(instance, s, t, &total))
        }
        CoreProperty::Priceable => {
            let restricted = instance.restrict(s, t.len())?;
            Ok(check_priceable(&restricted, t)?.is_some())
        }
    }
}

/// Searches for an allowed deviation: a strictly gaining coalition `S` with
/// `|T| ≤ k|S|/n` for which `T` has `property` on `(P|_S, |T|)`. Coalitions
/// are subsets of the gainers, tried from largest to smallest.
pub fn check_core_subject_to(
    instance: &ElectionInstance,
    w: &Committee,
    property: CoreProperty,
    options: &SubjectOptions,
) -> Result<Option<Deviation>> {
    let welfare = instance.welfare_vector(w)?;
    let u = welfare.utilities();
    let masks = require_masks(instance)?;
    let n = instance.num_voters();
    let k = instance.committee_size();
    let kind = match property {
        CoreProperty::Cohesive => DeviationKind::Cohesive,
        CoreProperty::PriceEq => DeviationKind::PriceEq,
        CoreProperty::Priceable => DeviationKind::Priceable,
    };
    let mut budget = Budget::new(options.budget, "check_core_subject_to");
    let mut inner = Budget::new(options.budget, "check_core_subject_to");
    for_each_alternative(instance, &mut budget, |t, mask| {
        let q = (t.len() * n).div_ceil(k);
        let gainers: Vec<usize> = (0..n)
            .filter(|&i| (masks[i] & mask).count_ones() as usize > u[i])
            .collect();
        if gainers.len() < q {
            return Ok(None);
        }
        let tc = Committee::new(t.iter().copied());
        if property == CoreProperty::Cohesive {
            let s: Vec<usize> = gainers
                .into_iter()
                .filter(|&i| masks[i] & mask == mask)
                .collect();
            return Ok((s.len() >= q).then(|| Deviation {
                coalition: s,
                alternative: tc,
                kind,
            }));
        }
        for size in (q..=gainers.len()).rev() {
            for s in gainers.iter().copied().combinations(size) {
                inner.tick()?;
                if deviation_has_property(instance, &s, &tc, property, options.restricted_price)? {
                    return Ok(Some(Deviation {
                        coalition: s,
                        alternative: tc,
                        kind,
                    }));
                }
            }
        }
        Ok(None)
    })
}

/// All committees of the given size, lexicographically, as bitmasks.
fn for_each_committee<F>(m: usize, size: usize, budget: &mut Budget, mut f: F) -> Result<Option<Committee>>
where
    F: FnMut(&[usize]) -> Option<Committee>,
{
    for c in (0..m).combinations(size) {
        budget.tick()?;
        if let Some(w) = f(&c) {
            return Ok(Some(w));
        }
    }
    Ok(None)
}

/// Searches for a same-size committee realizing a Pigou–Dalton transfer:
/// exactly two voters change utility, the sum is preserved, the richer loses
/// and the poorer gains without overtaking.
pub fn check_pigou_dalton(instance: &ElectionInstance, w: &Committee, budget: u64) -> Result<Option<Committee>> {
    let welfare = instance.welfare_vector(w)?;
    let u = welfare.utilities();
    let masks = require_masks(instance)?;
    let mut budget = Budget::new(budget, "check_pigou_dalton");
    for_each_committee(instance.num_candidates(), w.len(), &mut budget, |cand| {
        let mask = cand.iter().fold(0u64, |acc, &c| acc | (1 << c));
        let mut changed = Vec::new();
        for (i, m) in masks.iter().enumerate() {
            let v = (m & mask).count_ones() as usize;
            if v != u[i] {
                changed.push((i, v));
                if changed.len() > 2 {
                    return None;
                }
            }
        }
        if changed.len() != 2 {
            return None;
        }
        let (i, vi) = changed[0];
        let (j, vj) = changed[1];
        if u[i] + u[j] != vi + vj {
            return None;
        }
        let (rich, poor, new_rich, new_poor) = if u[i] > u[j] { (u[i], u[j], vi, vj) } else { (u[j], u[i], vj, vi) };
        let ok = rich > poor && new_rich < rich && new_poor > poor && new_rich >= new_poor;
        ok.then(|| Committee::new(cand.iter().copied()))
    })
}

/// Searches for a same-size committee that Pareto-dominates `w`.
pub fn check_pareto(instance: &ElectionInstance, w: &Committee, budget: u64) -> Result<Option<Committee>> {
    let welfare = instance.welfare_vector(w)?;
    let u = welfare.utilities();
    let masks = require_masks(instance)?;
    let mut budget = Budget::new(budget, "check_pareto");
    for_each_committee(instance.num_candidates(), w.len(), &mut budget, |cand| {
        let mask = cand.iter().fold(0u64, |acc, &c| acc | (1 << c));
        let mut strict = false;
        for (i, m) in masks.iter().enumerate() {
            let v = (m & mask).count_ones() as usize;
            if v < u[i] {
                return None;
            }
            strict |= v > u[i];
        }
        strict.then(|| Committee::new(cand.iter().copied()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn intro() -> ElectionInstance {
        ElectionInstance::parse("15 6 12\n1 2 3 4\n1 2 3 5\n1 2 3 6\n7 8 9\n10 11 12\n13 14 15\n").unwrap()
    }

    fn committee_a() -> Committee {
        Committee::from_labels([1, 2, 3, 4, 5, 6, 7, 8, 10, 11, 13, 14])
    }

    fn committee_b() -> Committee {
        Committee::from_labels([1, 2, 3, 7, 8, 9, 10, 11, 12, 13, 14, 15])
    }

    #[test]
    fn intro_priceability() {
        let inst = intro();
        let ps = check_priceable(&inst, &committee_a()).unwrap().unwrap();
        assert_eq!(ps.price, Rational::new(1, 2));
        assert!(check_priceable(&inst, &committee_b()).unwrap().is_none());
    }

    #[test]
    fn hand_built_price_system() {
        let inst = intro();
        let sixth = Rational::new(1, 6);
        let half = Rational::new(1, 2);
        let mut payments = vec![Vec::new(); 6];
        for (v, own) in [(0, 3), (1, 4), (2, 5)] {
            payments[v] = vec![(0, sixth.clone()), (1, sixth.clone()), (2, sixth.clone()), (own, half.clone())];
        }
        for (v, pair) in [(3, [6, 7]), (4, [9, 10]), (5, [12, 13])] {
            payments[v] = pair.iter().map(|&c| (c, half.clone())).collect();
        }
        let ps = PriceSystem { price: half, payments };
        assert_eq!(verify_price_system(&inst, &committee_a(), &ps), Ok(()));
        assert!(verify_price_system(&inst, &committee_b(), &ps).is_err());
    }

    #[test]
    fn intro_core() {
        let inst = intro();
        let d = find_core_deviation(&inst, &committee_b(), &Rational::one(), DEFAULT_SEARCH_BUDGET)
            .unwrap()
            .unwrap();
        assert!(verify_deviation(&inst, &committee_b(), &d, &Rational::one()).unwrap());
        let expected = Deviation {
            coalition: vec![0, 1, 2],
            alternative: Committee::from_labels(1..=6),
            kind: DeviationKind::Core,
        };
        assert!(verify_deviation(&inst, &committee_b(), &expected, &Rational::one()).unwrap());
        let eq = check_core_subject_to(&inst, &committee_b(), CoreProperty::PriceEq, &SubjectOptions::default())
            .unwrap();
        assert!(eq.is_some());
        assert!(price_eq_lp(&inst, &[0, 1, 2], &Committee::from_labels(1..=6), &Rational::new(1, 2)).unwrap());
    }

    #[test]
    fn pigou_dalton_on_intro() {
        let inst = intro();
        let w = check_pigou_dalton(&inst, &committee_a(), DEFAULT_SEARCH_BUDGET).unwrap().unwrap();
        let before = inst.welfare_vector(&committee_a()).unwrap();
        let after = inst.welfare_vector(&w).unwrap();
        assert_eq!(before.total(), after.total());
        assert!(check_pigou_dalton(&inst, &committee_b(), DEFAULT_SEARCH_BUDGET).unwrap().is_none());
    }

    #[test]
    fn laminar_recognition() {
        let inst = intro();
        let d = check_laminar(&inst).unwrap();
        assert!(d.admits(&committee_a()));
        assert!(!d.admits(&committee_b()));
        let two_one = ElectionInstance::parse("4 3 2\n1 2\n1 2\n3 4\n").unwrap();
        assert!(check_laminar(&two_one).is_none());
    }

    #[test]
    fn pjr_trivial_cases() {
        let inst = ElectionInstance::parse("1 1 1\n1\n").unwrap();
        assert!(check_pjr(&inst, &Committee::from_labels([1]), 1000).unwrap().is_none());
        let d = check_pjr(&inst, &Committee::empty(), 1000).unwrap().unwrap();
        assert_eq!(d.coalition, vec![0]);
    }

    #[test]
    fn minimal_lambda_of_intro_b() {
        let inst = intro();
        // T = {c1..c6} gives v1..v3 utility 4 against 3; q = 3.
        let l = minimal_core_lambda(&inst, &committee_b(), DEFAULT_SEARCH_BUDGET).unwrap();
        assert_eq!(l, Some(Rational::new(4, 3)));
    }
}
