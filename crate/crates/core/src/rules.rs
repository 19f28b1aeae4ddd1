//! Committee rules: PAV (exact and sequential), Phragmén's sequential rule,
//! Rule X with optional completion, and D'Hondt apportionment.
//!
//! Ties are broken by a candidate priority order; [`TieBreak::lexicographic`]
//! prefers lower indices. Traces record every exact quantity.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Committee, ElectionInstance};
use crate::rational::Rational;

/// Default node budget for the exhaustive PAV search.
pub const DEFAULT_PAV_BUDGET: u64 = 20_000_000;

/// Candidate priority order used to break ties.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TieBreak {
    rank: Vec<usize>,
}

impl TieBreak {
    pub fn lexicographic(m: usize) -> Self {
        TieBreak {
            rank: (0..m).collect(),
        }
    }

    /// Candidates listed in `order` win ties against everyone else, in that
    /// order; the remaining candidates follow by index.
    pub fn preferring(m: usize, order: &[usize]) -> Result<Self> {
        let mut rank = vec![usize::MAX; m];
        for (pos, &c) in order.iter().enumerate() {
            if c >= m {
                return Err(Error::CandidateOutOfRange {
                    candidate: c,
                    num_candidates: m,
                });
            }
            if rank[c] == usize::MAX {
                rank[c] = pos;
            }
        }
        let mut next = order.len();
        for r in rank.iter_mut() {
            if *r == usize::MAX {
                *r = next;
                next += 1;
            }
        }
        Ok(TieBreak { rank })
    }

    pub fn prefers(&self, a: usize, b: usize) -> bool {
        self.rank[a] < self.rank[b]
    }
}

/// `Σ_i H(|A_i ∩ W|)`.
pub fn pav_score(instance: &ElectionInstance, w: &Committee) -> Result<Rational> {
    let welfare = instance.welfare_vector(w)?;
    let max_u = welfare.utilities().iter().copied().max().unwrap_or(0);
    let mut counts = vec![0usize; max_u + 1];
    for &u in welfare.utilities() {
        counts[u] += 1;
    }
    Ok(counts
        .iter()
        .enumerate()
        .filter(|(u, n)| *u > 0 && **n > 0)
        .map(|(u, n)| Rational::harmonic(u) * Rational::from_usize(*n))
        .sum())
}

fn lcm_upto(k: usize) -> Option<u128> {
    let mut l: u128 = 1;
    for d in 2..=k as u128 {
        let g = num_integer::gcd(l, d);
        l = l.checked_mul(d / g)?;
    }
    Some(l)
}

/// Identical ballots merged, with candidate → group incidence.
struct Groups {
    weight: Vec<u128>,
    of_candidate: Vec<Vec<usize>>,
}

impl Groups {
    fn new(instance: &ElectionInstance) -> Self {
        let groups = instance.ballot_groups();
        let mut of_candidate = vec![Vec::new(); instance.num_candidates()];
        let mut weight = Vec::with_capacity(groups.len());
        for (g, (ballot, count)) in groups.iter().enumerate() {
            weight.push(*count as u128);
            for &c in *ballot {
                of_candidate[c].push(g);
            }
        }
        Groups {
            weight,
            of_candidate,
        }
    }
}

/// All size-`k` committees maximizing the PAV score, in lexicographic order.
///
/// Exact branch and bound: the bound adds the best remaining marginal gains,
/// which is valid because marginal gains only shrink as the committee grows.
pub fn pav_winners(instance: &ElectionInstance, budget: u64) -> Result<Vec<Committee>> {
    let k = instance.committee_size();
    let m = instance.num_candidates();
    let scale = lcm_upto(k).ok_or(Error::InvalidParameters(format!(
        "committee size {k} too large for exact PAV search"
    )))?;
    let groups = Groups::new(instance);
    // Scaled marginal value of an extra representative at utility u.
    let step: Vec<u128> = (0..=k).map(|u| scale / (u as u128 + 1)).collect();
    let total_weight: u128 = groups.weight.iter().sum();
    total_weight
        .checked_mul(scale)
        .and_then(|x| x.checked_mul(k as u128 + 1))
        .ok_or(Error::InvalidParameters("PAV scores overflow".into()))?;

    // Visit candidates by decreasing approval count for earlier pruning.
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by_key(|&c| std::cmp::Reverse(instance.supporters(c).len()));

    let mut search = PavSearch {
        groups: &groups,
        step: &step,
        order: &order,
        k,
        utility: vec![0; groups.weight.len()],
        chosen: Vec::with_capacity(k),
        best: 0,
        winners: Vec::new(),
        nodes: 0,
        budget,
    };
    search.dfs(0, 0)?;
    let mut winners: Vec<Committee> = search
        .winners
        .into_iter()
        .map(Committee::new)
        .collect();
    winners.sort();
    Ok(winners)
}

struct PavSearch<'a> {
    groups: &'a Groups,
    step: &'a [u128],
    order: &'a [usize],
    k: usize,
    utility: Vec<usize>,
    chosen: Vec<usize>,
    best: u128,
    winners: Vec<Vec<usize>>,
    nodes: u64,
    budget: u64,
}

impl PavSearch<'_> {
    fn gain(&self, c: usize) -> u128 {
        self.groups.of_candidate[c]
            .iter()
            .map(|&g| self.groups.weight[g] * self.step[self.utility[g]])
            .sum()
    }

    fn dfs(&mut self, pos: usize, score: u128) -> Result<()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::BudgetExceeded {
                what: "pav_winners",
                budget: self.budget,
            });
        }
        let need = self.k - self.chosen.len();
        if need == 0 {
            match score.cmp(&self.best) {
                Ordering::Greater => {
                    self.best = score;
                    self.winners.clear();
                    self.winners.push(self.chosen.clone());
                }
                Ordering::Equal => self.winners.push(self.chosen.clone()),
                Ordering::Less => {}
            }
            return Ok(());
        }
        let remaining = &self.order[pos..];
        if remaining.len() < need {
            return Ok(());
        }
        let mut gains: Vec<u128> = remaining.iter().map(|&c| self.gain(c)).collect();
        gains.sort_unstable_by(|a, b| b.cmp(a));
        let bound: u128 = score + gains[..need].iter().sum::<u128>();
        if bound < self.best {
            return Ok(());
        }

        let c = self.order[pos];
        let g = self.gain(c);
        for &grp in &self.groups.of_candidate[c] {
            self.utility[grp] += 1;
        }
        self.chosen.push(c);
        self.dfs(pos + 1, score + g)?;
        self.chosen.pop();
        for &grp in &self.groups.of_candidate[c] {
            self.utility[grp] -= 1;
        }
        self.dfs(pos + 1, score)
    }
}

/// Sequential PAV: add the candidate with the largest marginal score gain.
pub fn seq_pav(instance: &ElectionInstance) -> Committee {
    let groups = Groups::new(instance);
    let mut utility = vec![0usize; groups.weight.len()];
    let mut w = Committee::empty();
    for _ in 0..instance.committee_size() {
        let mut best: Option<(usize, Rational)> = None;
        for c in 0..instance.num_candidates() {
            if w.contains(c) {
                continue;
            }
            let gain: Rational = groups.of_candidate[c]
                .iter()
                .map(|&g| Rational::ratio(groups.weight[g] as usize, utility[g] + 1))
                .sum();
            if best.as_ref().is_none_or(|(_, b)| gain > *b) {
                best = Some((c, gain));
            }
        }
        let Some((c, _)) = best else { break };
        for &g in &groups.of_candidate[c] {
            utility[g] += 1;
        }
        w.insert(c);
    }
    w
}

/// Execution trace of Phragmén's sequential rule.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhragmenTrace {
    pub elected: Vec<usize>,
    /// Time at which each elected candidate was bought.
    pub election_times: Vec<Rational>,
    /// Per step, `(voter, amount)` for every approver that paid.
    pub payments: Vec<Vec<(usize, Rational)>>,
    /// Balances after the last purchase.
    pub final_balances: Vec<Rational>,
}

impl PhragmenTrace {
    pub fn committee(&self) -> Committee {
        Committee::new(self.elected.iter().copied())
    }

    /// Election times rescaled to a seat price of 1 instead of `n/k`.
    pub fn unit_price_times(&self, n: usize, k: usize) -> Vec<Rational> {
        let scale = Rational::ratio(k, n);
        self.election_times.iter().map(|t| t * &scale).collect()
    }
}

/// Phragmén's sequential rule with lexicographic tie-breaking.
pub fn phragmen_sequential(instance: &ElectionInstance) -> PhragmenTrace {
    let tb = TieBreak::lexicographic(instance.num_candidates());
    let start = vec![Rational::zero(); instance.num_voters()];
    phragmen_seeded(instance, &start, &Committee::empty(), instance.committee_size(), &tb)
        .expect("zero balances are always a valid seed")
}

/// Phragmén's process started from the given balances with `already`
/// elected, buying up to `seats` further candidates.
///
/// The seed must not let any unelected candidate's supporters hold more than
/// the price `n/k`; that is the state Rule X leaves behind when it stops.
pub fn phragmen_seeded(
    instance: &ElectionInstance,
    balances: &[Rational],
    already: &Committee,
    seats: usize,
    tie_break: &TieBreak,
) -> Result<PhragmenTrace> {
    let n = instance.num_voters();
    if balances.len() != n {
        return Err(Error::InvalidParameters(format!(
            "{} balances for {} voters",
            balances.len(),
            n
        )));
    }
    let price = Rational::ratio(n, instance.committee_size());
    let mut balance = balances.to_vec();
    let mut elected_set = already.clone();
    let mut trace = PhragmenTrace {
        elected: Vec::new(),
        election_times: Vec::new(),
        payments: Vec::new(),
        final_balances: Vec::new(),
    };
    let mut now = Rational::zero();
    for _ in 0..seats {
        let mut best: Option<(usize, Rational)> = None;
        for c in 0..instance.num_candidates() {
            let supporters = instance.supporters(c);
            if elected_set.contains(c) || supporters.is_empty() {
                continue;
            }
            let held: Rational = supporters.iter().map(|&i| &balance[i]).sum();
            if held > price {
                return Err(Error::InvalidParameters(format!(
                    "supporters of candidate {} already hold more than the price",
                    c + 1
                )));
            }
            let delay = (&price - held) / Rational::from_usize(supporters.len());
            let better = match &best {
                None => true,
                Some((b, d)) => delay < *d || (delay == *d && tie_break.prefers(c, *b)),
            };
            if better {
                best = Some((c, delay));
            }
        }
        let Some((c, delay)) = best else { break };
        now += &delay;
        if !delay.is_zero() {
            for b in balance.iter_mut() {
                *b += &delay;
            }
        }
        let mut paid = Vec::with_capacity(instance.supporters(c).len());
        for &i in instance.supporters(c) {
            let amount = std::mem::replace(&mut balance[i], Rational::zero());
            paid.push((i, amount));
        }
        elected_set.insert(c);
        trace.elected.push(c);
        trace.election_times.push(now.clone());
        trace.payments.push(paid);
    }
    trace.final_balances = balance;
    Ok(trace)
}

/// Execution trace of Rule X.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RuleXTrace {
    pub elected: Vec<usize>,
    /// Minimal `q` for each candidate elected by Rule X proper.
    pub q_values: Vec<Rational>,
    /// Voter budgets after each Rule X step.
    pub budgets: Vec<Vec<Rational>>,
    /// Whether a completion strategy appended members.
    pub completed: bool,
    /// Phragmén times of appended members, measured from the hand-over.
    pub completion_times: Vec<Rational>,
}

impl RuleXTrace {
    pub fn committee(&self) -> Committee {
        Committee::new(self.elected.iter().copied())
    }

    /// Budgets when Rule X stopped.
    pub fn final_budgets(&self, n: usize) -> Vec<Rational> {
        self.budgets
            .last()
            .cloned()
            .unwrap_or_else(|| vec![Rational::one(); n])
    }
}

/// Smallest `q` with `Σ_i min(q, b_i) ≥ price`, for budgets sorted ascending.
pub fn min_affordable_q(sorted_budgets: &[Rational], price: &Rational) -> Option<Rational> {
    let total: Rational = sorted_budgets.iter().sum();
    if total < *price {
        return None;
    }
    let a = sorted_budgets.len();
    let mut prefix = Rational::zero();
    for (j, b) in sorted_budgets.iter().enumerate() {
        let q = (price - &prefix) / Rational::from_usize(a - j);
        if q <= *b {
            return Some(q);
        }
        prefix += b;
    }
    None
}

/// Rule X with lexicographic tie-breaking and no completion.
pub fn rule_x(instance: &ElectionInstance) -> RuleXTrace {
    rule_x_with(instance, &TieBreak::lexicographic(instance.num_candidates()))
}

/// Rule X with an explicit tie-breaking order.
pub fn rule_x_with(instance: &ElectionInstance, tie_break: &TieBreak) -> RuleXTrace {
    let n = instance.num_voters();
    let k = instance.committee_size();
    let price = Rational::ratio(n, k);
    let mut budget = vec![Rational::one(); n];
    let mut elected = Committee::empty();
    let mut trace = RuleXTrace {
        elected: Vec::new(),
        q_values: Vec::new(),
        budgets: Vec::new(),
        completed: false,
        completion_times: Vec::new(),
    };
    while elected.len() < k {
        let mut best: Option<(usize, Rational)> = None;
        for c in 0..instance.num_candidates() {
            if elected.contains(c) {
                continue;
            }
            let mut held: Vec<Rational> = instance
                .supporters(c)
                .iter()
                .map(|&i| budget[i].clone())
                .collect();
            held.sort();
            let Some(q) = min_affordable_q(&held, &price) else {
                continue;
            };
            let better = match &best {
                None => true,
                Some((b, bq)) => q < *bq || (q == *bq && tie_break.prefers(c, *b)),
            };
            if better {
                best = Some((c, q));
            }
        }
        let Some((c, q)) = best else { break };
        for &i in instance.supporters(c) {
            let pay = Rational::min_of(&q, &budget[i]);
            budget[i] -= pay;
        }
        elected.insert(c);
        trace.elected.push(c);
        trace.q_values.push(q);
        trace.budgets.push(budget.clone());
    }
    trace
}

/// How to fill seats Rule X leaves empty.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Completion {
    None,
    PhragmenContinuation,
}

/// Rule X followed by the chosen completion strategy.
pub fn rule_x_complete(instance: &ElectionInstance, strategy: Completion) -> RuleXTrace {
    rule_x_complete_with(
        instance,
        strategy,
        &TieBreak::lexicographic(instance.num_candidates()),
    )
}

pub fn rule_x_complete_with(
    instance: &ElectionInstance,
    strategy: Completion,
    tie_break: &TieBreak,
) -> RuleXTrace {
    let mut trace = rule_x_with(instance, tie_break);
    let k = instance.committee_size();
    if strategy == Completion::None || trace.elected.len() >= k {
        return trace;
    }
    let budgets = trace.final_budgets(instance.num_voters());
    let cont = phragmen_seeded(
        instance,
        &budgets,
        &trace.committee(),
        k - trace.elected.len(),
        tie_break,
    )
    .expect("Rule X stops only when no candidate is affordable");
    if !cont.elected.is_empty() {
        trace.completed = true;
        trace.elected.extend(cont.elected);
        trace.completion_times = cont.election_times;
    }
    trace
}

/// D'Hondt apportionment: repeatedly award a seat to the party with the
/// largest quotient `n_z / (s_z + 1)`, ties to the lower party index.
pub fn dhondt(party_sizes: &[usize], k: usize) -> Result<Vec<usize>> {
    if party_sizes.is_empty() {
        return Err(Error::InvalidParameters("no parties".into()));
    }
    if party_sizes.contains(&0) {
        return Err(Error::InvalidParameters("party sizes must be positive".into()));
    }
    let mut seats = vec![0usize; party_sizes.len()];
    for _ in 0..k {
        let mut best = 0;
        for z in 1..party_sizes.len() {
            // n_z/(s_z+1) > n_best/(s_best+1)
            let lhs = party_sizes[z] as u128 * (seats[best] as u128 + 1);
            let rhs = party_sizes[best] as u128 * (seats[z] as u128 + 1);
            if lhs > rhs {
                best = z;
            }
        }
        seats[best] += 1;
    }
    Ok(seats)
}

/// Whether `seats` is a D'Hondt outcome under some tie-breaking order:
/// the smallest awarded quotient `n_z / s_z` is at least every next
/// quotient `n_z / (s_z + 1)`.
pub fn is_dhondt_outcome(party_sizes: &[usize], seats: &[usize], k: usize) -> bool {
    if party_sizes.len() != seats.len() || seats.iter().sum::<usize>() != k {
        return false;
    }
    for (a, (&na, &sa)) in party_sizes.iter().zip(seats).enumerate() {
        if sa == 0 {
            continue;
        }
        for (b, (&nb, &sb)) in party_sizes.iter().zip(seats).enumerate() {
            if a == b {
                continue;
            }
            // need na/sa >= nb/(sb+1)
            if (na as u128) * (sb as u128 + 1) < (nb as u128) * (sa as u128) {
                return false;
            }
        }
    }
    true
}

/// A party: voters sharing one ballot, disjoint from every other party.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Party {
    pub voters: Vec<usize>,
    pub candidates: Vec<usize>,
}

/// Recognizes party-list profiles: nonempty ballots are pairwise equal or
/// disjoint, and every voter has a nonempty ballot.
pub fn party_list(instance: &ElectionInstance) -> Option<Vec<Party>> {
    let mut parties: Vec<Party> = Vec::new();
    let mut owner = vec![usize::MAX; instance.num_candidates()];
    for (v, ballot) in instance.ballots().iter().enumerate() {
        let first = *ballot.first()?;
        match owner[first] {
            usize::MAX => {
                if ballot.iter().any(|&c| owner[c] != usize::MAX) {
                    return None;
                }
                for &c in ballot {
                    owner[c] = parties.len();
                }
                parties.push(Party {
                    voters: vec![v],
                    candidates: ballot.clone(),
                });
            }
            z => {
                if parties[z].candidates != *ballot {
                    return None;
                }
                parties[z].voters.push(v);
            }
        }
    }
    Some(parties)
}

/// D'Hondt on a party-list instance, electing each party's lowest-index
/// candidates. Parties run out of seats when they run out of candidates.
pub fn dhondt_committee(instance: &ElectionInstance) -> Result<Committee> {
    let parties = party_list(instance)
        .ok_or(Error::InvalidInstance("not a party-list profile".into()))?;
    let sizes: Vec<usize> = parties.iter().map(|p| p.voters.len()).collect();
    let k = instance.committee_size();
    let mut seats = vec![0usize; parties.len()];
    for _ in 0..k {
        let mut best: Option<usize> = None;
        for z in 0..parties.len() {
            if seats[z] >= parties[z].candidates.len() {
                continue;
            }
            let better = match best {
                None => true,
                Some(b) => {
                    sizes[z] as u128 * (seats[b] as u128 + 1) > sizes[b] as u128 * (seats[z] as u128 + 1)
                }
            };
            if better {
                best = Some(z);
            }
        }
        let Some(z) = best else { break };
        seats[z] += 1;
    }
    Ok(Committee::new(parties.iter().zip(&seats).flat_map(
        |(p, &s)| p.candidates[..s].iter().copied(),
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example21() -> ElectionInstance {
        let mut ballots = Vec::new();
        for v in 0..15 {
            let mut b = Vec::new();
            if v < 12 {
                b.extend([0, 1]);
            }
            if v < 10 {
                b.push(2);
            }
            if v >= 5 {
                b.extend([3, 4]);
            }
            ballots.push(b);
        }
        ElectionInstance::new(5, 4, ballots).unwrap()
    }

    fn r(a: i64, b: i64) -> Rational {
        Rational::new(a, b)
    }

    #[test]
    fn min_q_closed_form() {
        let budgets = vec![r(0, 1), r(3, 8), r(3, 8), r(1, 1)];
        assert_eq!(min_affordable_q(&budgets, &r(3, 2)), Some(r(3, 4)));
        assert_eq!(min_affordable_q(&budgets, &r(7, 4)), Some(r(1, 1)));
        assert_eq!(min_affordable_q(&budgets, &r(2, 1)), None);
        assert_eq!(min_affordable_q(&[], &r(1, 1)), None);
    }

    #[test]
    fn phragmen_example() {
        let t = phragmen_sequential(&example21());
        assert_eq!(t.elected, vec![0, 3, 1, 4]);
        let t1 = r(15, 48);
        let t2 = &t1 + r(9, 32);
        let t3 = &t2 + r(25, 128);
        let t4 = &t3 + r(81, 256);
        assert_eq!(t.election_times, vec![t1, t2, t3, t4]);
        for step in &t.payments {
            let total: Rational = step.iter().map(|(_, a)| a).sum();
            assert_eq!(total, r(15, 4));
        }
    }

    #[test]
    fn rule_x_both_branches() {
        let inst = example21();
        let t = rule_x(&inst);
        assert_eq!(t.elected, vec![0, 1, 2, 3]);
        assert_eq!(t.q_values, vec![r(15, 48), r(15, 48), r(15, 40), r(1, 1)]);
        let tb = TieBreak::preferring(5, &[0, 1, 3]).unwrap();
        let alt = rule_x_with(&inst, &tb);
        assert_eq!(alt.elected, vec![0, 1, 3]);
        let last = alt.budgets.last().unwrap();
        assert_eq!(last[0], r(3, 8));
        assert_eq!(last[7], r(0, 1));
        assert_eq!(last[14], r(5, 8));
        let done = rule_x_complete_with(&inst, Completion::PhragmenContinuation, &tb);
        assert!(done.completed);
        assert_eq!(done.elected, vec![0, 1, 3, 2]);
        assert_eq!(done.completion_times, vec![r(3, 16)]);
    }

    #[test]
    fn unanimous_phragmen_times() {
        let inst = ElectionInstance::new(4, 3, vec![vec![0, 1, 2, 3]; 5]).unwrap();
        let t = phragmen_sequential(&inst);
        assert_eq!(t.elected, vec![0, 1, 2]);
        assert_eq!(t.election_times, vec![r(1, 3), r(2, 3), r(1, 1)]);
        assert_eq!(t.unit_price_times(5, 3), vec![r(1, 5), r(2, 5), r(3, 5)]);
        let x = rule_x(&inst);
        assert_eq!(x.q_values, vec![r(1, 3); 3]);
        assert_eq!(seq_pav(&inst), Committee::new([0, 1, 2]));
    }

    #[test]
    fn dhondt_examples() {
        assert_eq!(dhondt(&[5, 3, 1], 3).unwrap(), vec![2, 1, 0]);
        assert_eq!(dhondt(&[30, 30, 40], 10).unwrap(), vec![3, 3, 4]);
        assert_eq!(dhondt(&[7], 5).unwrap(), vec![5]);
        assert!(dhondt(&[], 2).is_err());
        assert!(is_dhondt_outcome(&[1, 1], &[0, 1], 1));
        assert!(is_dhondt_outcome(&[1, 1], &[1, 0], 1));
        assert!(!is_dhondt_outcome(&[5, 3, 1], &[1, 1, 1], 3));
    }

    #[test]
    fn pav_search_matches_brute_force() {
        let inst = example21();
        let winners = pav_winners(&inst, DEFAULT_PAV_BUDGET).unwrap();
        let mut best = Rational::zero();
        let mut brute = Vec::new();
        for mask in 0u32..32 {
            if mask.count_ones() != 4 {
                continue;
            }
            let w = Committee::from_mask(mask as u64);
            let s = pav_score(&inst, &w).unwrap();
            if s > best {
                best = s;
                brute = vec![w];
            } else if s == best {
                brute.push(w);
            }
        }
        brute.sort();
        assert_eq!(winners, brute);
    }

    #[test]
    fn pav_budget_is_enforced() {
        let inst = example21();
        assert!(matches!(
            pav_winners(&inst, 3),
            Err(Error::BudgetExceeded { .. })
        ));
    }
}
