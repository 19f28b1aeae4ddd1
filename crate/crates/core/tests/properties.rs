use std::collections::BTreeSet;

use proptest::prelude::*;
use propvote::axioms::{
    check_core_subject_to, check_ejr, check_laminar, check_laminar_proportional, check_pareto, check_pigou_dalton,
    check_pjr, check_priceable, find_core_deviation, verify_price_system, CoreProperty, SubjectOptions,
};
use propvote::exactmath::{lp_maximize, Bound, LinearProgram, LpStatus, Relation};
use propvote::generators::{gen_laminar, gen_party_list};
use propvote::rules::{dhondt, pav_score, pav_winners, phragmen_sequential, rule_x, seq_pav};
use propvote::{Committee, ElectionInstance, Rational};

const BUDGET: u64 = 2_000_000;

fn instance(max_n: usize, max_m: usize, max_k: usize) -> impl Strategy<Value = ElectionInstance> {
    (1..=max_n, 1..=max_m)
        .prop_flat_map(move |(n, m)| (Just(m), 1..=m.min(max_k), prop::collection::vec(0u64..(1 << m), n)))
        .prop_map(|(m, k, masks)| {
            let ballots = masks.iter().map(|b| (0..m).filter(|c| b >> c & 1 == 1).collect()).collect();
            ElectionInstance::new(m, k, ballots).unwrap()
        })
}

fn with_committee(
    max_n: usize,
    max_m: usize,
    max_k: usize,
) -> impl Strategy<Value = (ElectionInstance, Committee)> {
    instance(max_n, max_m, max_k).prop_flat_map(|inst| {
        let (m, k) = (inst.num_candidates(), inst.committee_size());
        (Just(inst), prop::sample::subsequence((0..m).collect::<Vec<_>>(), k))
            .prop_map(|(inst, members)| (inst, Committee::new(members)))
    })
}

fn utilities(inst: &ElectionInstance, w: &Committee) -> Vec<usize> {
    (0..inst.num_voters()).map(|v| inst.ballot(v).iter().filter(|&&c| w.contains(c)).count()).collect()
}

/// Brute force over voter groups: `Some(true)` for a PJR-style violation,
/// `Some(false)` for an EJR-only one, `None` if EJR holds.
fn cohesive_violation(inst: &ElectionInstance, w: &Committee) -> (bool, bool) {
    let (n, k) = (inst.num_voters(), inst.committee_size());
    let u = utilities(inst, w);
    let (mut pjr, mut ejr) = (false, false);
    for s in 1u32..(1 << n) {
        let members: Vec<usize> = (0..n).filter(|v| s >> v & 1 == 1).collect();
        let common: BTreeSet<usize> = (0..inst.num_candidates())
            .filter(|&c| members.iter().all(|&v| inst.approves(v, c)))
            .collect();
        let union: BTreeSet<usize> = members.iter().flat_map(|&v| inst.ballot(v).iter().copied()).collect();
        let covered = union.iter().filter(|&&c| w.contains(c)).count();
        for l in 1..=common.len() {
            if members.len() * k < l * n {
                break;
            }
            if members.iter().all(|&v| u[v] < l) {
                ejr = true;
            }
            if covered < l {
                pjr = true;
            }
        }
    }
    (pjr, ejr)
}

/// Brute force over candidate sets `T`: some voters, at least `|T|·n/k` of
/// them, all strictly gain.
fn core_blocked(inst: &ElectionInstance, w: &Committee) -> bool {
    let (n, m, k) = (inst.num_voters(), inst.num_candidates(), inst.committee_size());
    let u = utilities(inst, w);
    (1u32..(1 << m)).any(|t| {
        let size = t.count_ones() as usize;
        let gainers = (0..n)
            .filter(|&v| inst.ballot(v).iter().filter(|&&c| t >> c & 1 == 1).count() > u[v])
            .count();
        gainers * k >= size * n && gainers > 0
    })
}

/// Every seat vector reachable by highest averages under some order of ties.
fn dhondt_reachable(sizes: &[usize], k: usize) -> BTreeSet<Vec<usize>> {
    fn go(sizes: &[usize], seats: &mut Vec<usize>, left: usize, out: &mut BTreeSet<Vec<usize>>) {
        if left == 0 {
            out.insert(seats.clone());
            return;
        }
        let best = (0..sizes.len())
            .max_by(|&a, &b| (sizes[a] * (seats[b] + 1)).cmp(&(sizes[b] * (seats[a] + 1))))
            .unwrap();
        for z in 0..sizes.len() {
            if sizes[z] * (seats[best] + 1) == sizes[best] * (seats[z] + 1) {
                seats[z] += 1;
                go(sizes, seats, left - 1, out);
                seats[z] -= 1;
            }
        }
    }
    let mut out = BTreeSet::new();
    go(sizes, &mut vec![0; sizes.len()], k, &mut out);
    out
}

fn seats_per_party(w: &Committee, cands: &[usize]) -> Vec<usize> {
    let mut start = 0;
    cands
        .iter()
        .map(|&c| {
            let s = w.members().iter().filter(|&&x| (start..start + c).contains(&x)).count();
            start += c;
            s
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn text_round_trip(inst in instance(8, 10, 6)) {
        let text = inst.to_text();
        prop_assert_eq!(ElectionInstance::parse(&text).unwrap(), inst);
    }

    #[test]
    fn welfare_is_monotone_and_sums((inst, w) in with_committee(8, 8, 6), extra in 0usize..8) {
        let base = inst.welfare_vector(&w).unwrap();
        let mut bigger = w.clone();
        bigger.insert(extra % inst.num_candidates());
        let more = inst.welfare_vector(&bigger).unwrap();
        prop_assert!(base.utilities().iter().zip(more.utilities()).all(|(a, b)| a <= b));
        let approvals: usize = w.members().iter().map(|&c| inst.supporters(c).len()).sum();
        prop_assert_eq!(base.total(), approvals);
    }

    #[test]
    fn priceable_committees_satisfy_pjr((inst, w) in with_committee(7, 7, 5)) {
        if let Some(ps) = check_priceable(&inst, &w).unwrap() {
            prop_assert!(verify_price_system(&inst, &w, &ps).is_ok());
            prop_assert!(check_pjr(&inst, &w, BUDGET).unwrap().is_none());
        }
    }

    #[test]
    fn phragmen_and_rule_x_outputs_are_priceable(inst in instance(7, 7, 5)) {
        let w = phragmen_sequential(&inst).committee();
        prop_assert!(check_priceable(&inst, &w).unwrap().is_some(), "phragmen {}", w);
        let x = rule_x(&inst).committee();
        prop_assert!(check_priceable(&inst, &x).unwrap().is_some(), "rule x {}", x);
    }

    #[test]
    fn pjr_and_ejr_match_brute_force((inst, w) in with_committee(6, 6, 4)) {
        let (pjr, ejr) = cohesive_violation(&inst, &w);
        prop_assert_eq!(check_pjr(&inst, &w, BUDGET).unwrap().is_some(), pjr);
        prop_assert_eq!(check_ejr(&inst, &w, BUDGET).unwrap().is_some(), ejr);
    }

    #[test]
    fn core_matches_brute_force((inst, w) in with_committee(6, 6, 4)) {
        let found = find_core_deviation(&inst, &w, &Rational::one(), BUDGET).unwrap();
        prop_assert_eq!(found.is_some(), core_blocked(&inst, &w));
    }

    #[test]
    fn cohesive_core_is_ejr((inst, w) in with_committee(6, 6, 4)) {
        let opts = SubjectOptions { budget: BUDGET, ..SubjectOptions::default() };
        let cohesive = check_core_subject_to(&inst, &w, CoreProperty::Cohesive, &opts).unwrap();
        prop_assert_eq!(cohesive.is_some(), check_ejr(&inst, &w, BUDGET).unwrap().is_some());
    }

    #[test]
    fn lambda_core_is_monotone((inst, w) in with_committee(6, 6, 4), a in 0i64..8, b in 0i64..8) {
        let low = Rational::one() + Rational::new(a.min(b), 4);
        let high = Rational::one() + Rational::new(a.max(b), 4);
        if find_core_deviation(&inst, &w, &low, BUDGET).unwrap().is_none() {
            prop_assert!(find_core_deviation(&inst, &w, &high, BUDGET).unwrap().is_none());
        }
    }

    #[test]
    fn priceability_on_party_lists_is_dhondt(
        counts in prop::collection::vec(1usize..5, 1..4),
        k in 1usize..6,
        pick in any::<u64>(),
    ) {
        let cands = vec![k; counts.len()];
        let (inst, _) = gen_party_list(&counts, &cands, k).unwrap();
        let vectors: Vec<Vec<usize>> = (0..counts.len())
            .map(|_| 0..=k)
            .fold(vec![vec![]], |acc, r| {
                acc.into_iter()
                    .flat_map(|v| r.clone().map(move |x| [v.clone(), vec![x]].concat()))
                    .collect()
            })
            .into_iter()
            .filter(|v| v.iter().sum::<usize>() == k)
            .collect();
        let seats = &vectors[(pick % vectors.len() as u64) as usize];
        let w = Committee::new(seats.iter().enumerate().flat_map(|(z, &s)| z * k..z * k + s));
        let priceable = check_priceable(&inst, &w).unwrap().is_some();
        prop_assert_eq!(priceable, dhondt_reachable(&counts, k).contains(seats));
    }

    #[test]
    fn rules_follow_dhondt_on_integral_party_lists(
        seats in prop::collection::vec(1usize..3, 1..4),
        scale in 1usize..3,
    ) {
        let k: usize = seats.iter().sum();
        let counts: Vec<usize> = seats.iter().map(|s| s * scale).collect();
        let cands: Vec<usize> = seats.iter().map(|s| s + 1).collect();
        let (inst, integral) = gen_party_list(&counts, &cands, k).unwrap();
        prop_assert!(integral);
        let expected = dhondt(&counts, k).unwrap();
        prop_assert_eq!(&expected, &seats);
        for w in pav_winners(&inst, BUDGET).unwrap() {
            prop_assert_eq!(&seats_per_party(&w, &cands), &expected);
        }
        prop_assert_eq!(&seats_per_party(&seq_pav(&inst), &cands), &expected);
        prop_assert_eq!(&seats_per_party(&phragmen_sequential(&inst).committee(), &cands), &expected);
        prop_assert_eq!(&seats_per_party(&rule_x(&inst).committee(), &cands), &expected);
    }

    #[test]
    fn laminar_acceptance_implies_laminar_approver_sets(inst in instance(6, 6, 4)) {
        if check_laminar(&inst).is_some() {
            let sets: Vec<BTreeSet<usize>> =
                (0..inst.num_candidates()).map(|c| inst.supporters(c).iter().copied().collect()).collect();
            for a in &sets {
                for b in &sets {
                    prop_assert!(a.is_disjoint(b) || a.is_subset(b) || b.is_subset(a));
                }
            }
        }
    }

    #[test]
    fn laminar_instances_get_proportional_committees(seed in any::<u64>(), k in 1usize..7) {
        let inst = gen_laminar(seed, 4, 14, k).unwrap();
        let n = inst.num_voters();
        prop_assert!(check_laminar(&inst).is_some());
        let t = phragmen_sequential(&inst);
        prop_assert!(check_laminar_proportional(&inst, &t.committee()).unwrap());
        prop_assert!(check_laminar_proportional(&inst, &rule_x(&inst).committee()).unwrap());
        prop_assert_eq!(t.unit_price_times(n, k).last().cloned(), Some(Rational::ratio(k, n)));
    }

    #[test]
    fn pav_winners_are_fair(inst in instance(6, 7, 4)) {
        for w in pav_winners(&inst, BUDGET).unwrap() {
            prop_assert!(find_core_deviation(&inst, &w, &Rational::from_int(2), BUDGET).unwrap().is_none());
            prop_assert!(check_pigou_dalton(&inst, &w, BUDGET).unwrap().is_none());
            prop_assert!(check_pareto(&inst, &w, BUDGET).unwrap().is_none());
        }
    }

    #[test]
    fn pav_winners_maximize_score(inst in instance(5, 6, 3)) {
        let winners = pav_winners(&inst, BUDGET).unwrap();
        let best = pav_score(&inst, &winners[0]).unwrap();
        let m = inst.num_candidates();
        for mask in 0u32..(1 << m) {
            if mask.count_ones() as usize == inst.committee_size() {
                let w = Committee::new((0..m).filter(|c| mask >> c & 1 == 1));
                let score = pav_score(&inst, &w).unwrap();
                prop_assert!(score <= best);
                prop_assert_eq!(score == best, winners.contains(&w));
            }
        }
    }

    #[test]
    fn rule_x_satisfies_ejr_and_price_eq_core(inst in instance(7, 7, 4)) {
        let w = rule_x(&inst).committee();
        prop_assert!(check_ejr(&inst, &w, BUDGET).unwrap().is_none());
        let opts = SubjectOptions { budget: BUDGET, ..SubjectOptions::default() };
        prop_assert!(check_core_subject_to(&inst, &w, CoreProperty::PriceEq, &opts).unwrap().is_none());
    }

    #[test]
    fn rule_x_spends_n_over_k_per_seat(inst in instance(8, 8, 5)) {
        let t = rule_x(&inst);
        let (n, k) = (inst.num_voters(), inst.committee_size());
        let left = t.final_budgets(n);
        prop_assert!(left.iter().all(|b| !b.is_negative()));
        let spent = left.iter().fold(Rational::from_usize(n), |acc, b| acc - b);
        prop_assert_eq!(spent, Rational::ratio(t.q_values.len() * n, k));
    }

    #[test]
    fn rules_are_deterministic(inst in instance(6, 6, 4)) {
        prop_assert_eq!(phragmen_sequential(&inst), phragmen_sequential(&inst));
        prop_assert_eq!(rule_x(&inst), rule_x(&inst));
    }

    #[test]
    fn lp_optimum_matches_vertex_enumeration(
        rows in prop::collection::vec((-3i64..4, -3i64..4, 0i64..9), 1..5),
        obj in (-3i64..4, -3i64..4),
    ) {
        let mut lp = LinearProgram::new(2);
        lp.bounds = vec![Bound::between(Rational::zero(), Rational::from_int(4)); 2];
        lp.set_objective(&[(0, Rational::from_int(obj.0)), (1, Rational::from_int(obj.1))]);
        // lines a·x + b·y = c, including the box sides
        let mut lines: Vec<(Rational, Rational, Rational)> = Vec::new();
        for &(a, b, c) in &rows {
            lp.add_sparse(&[(0, Rational::from_int(a)), (1, Rational::from_int(b))], Relation::Le, Rational::from_int(c));
            lines.push((Rational::from_int(a), Rational::from_int(b), Rational::from_int(c)));
        }
        for (a, b, c) in [(1, 0, 0), (1, 0, 4), (0, 1, 0), (0, 1, 4)] {
            lines.push((Rational::from_int(a), Rational::from_int(b), Rational::from_int(c)));
        }
        let mut best: Option<Rational> = None;
        for i in 0..lines.len() {
            for j in i + 1..lines.len() {
                let (a1, b1, c1) = &lines[i];
                let (a2, b2, c2) = &lines[j];
                let det = a1 * b2 - a2 * b1;
                if det.is_zero() {
                    continue;
                }
                let x = (c1 * b2 - c2 * b1) / &det;
                let y = (a1 * c2 - a2 * c1) / &det;
                let point = vec![x, y];
                if lp.is_feasible_point(&point) {
                    let v = lp.objective_value(&point);
                    if best.as_ref().is_none_or(|b| v > *b) {
                        best = Some(v);
                    }
                }
            }
        }
        let out = lp_maximize(&lp).unwrap();
        match best {
            None => prop_assert_eq!(out.status, LpStatus::Infeasible),
            Some(v) => {
                prop_assert_eq!(out.status, LpStatus::Optimal);
                prop_assert_eq!(out.value, Some(v));
            }
        }
    }
}
