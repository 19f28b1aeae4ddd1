//! Reproduction report: recomputes the worked examples and proof
//! constructions and a bounded version of the rule/property matrix.

use std::fmt::Write as _;

use itertools::Itertools;
use serde::Serialize;

use crate::axioms::{
    check_core_subject_to, check_ejr, check_laminar, check_pareto, check_pigou_dalton, check_pjr, check_priceable,
    deviation_has_property, find_core_deviation, minimal_core_lambda, verify_deviation, within_log_bound, verify_price_system,
    CoreProperty, Deviation, DeviationKind, PriceSystem, SubjectOptions, DEFAULT_SEARCH_BUDGET,
};
use crate::error::Result;
use crate::generators::{
    fixture, gen_laminar, gen_random, gen_rulex_lower_bound, gen_theorem51_family, marked_committees,
    rulex_lower_bound_min_l, FixtureId,
};
use crate::model::{Committee, ElectionInstance};
use crate::rational::Rational;
use crate::rules::{pav_score, pav_winners, phragmen_sequential, rule_x, rule_x_with, TieBreak, DEFAULT_PAV_BUDGET};

#[derive(Clone, Debug, Serialize)]
pub struct ReproCheck {
    pub section: String,
    pub name: String,
    pub pass: bool,
    pub expected: String,
    pub actual: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct TableCell {
    pub rule: &'static str,
    pub claimed: &'static str,
    pub observed: String,
    pub consistent: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct TableRow {
    pub property: &'static str,
    pub cells: Vec<TableCell>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReproReport {
    pub checks: Vec<ReproCheck>,
    /// Desk-scale evidence: bounded property runs, not proofs.
    pub table_bounds: String,
    pub table: Vec<TableRow>,
}

impl ReproReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass) && self.table.iter().all(|r| r.cells.iter().all(|c| c.consistent))
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let mut section = "";
        for c in &self.checks {
            if c.section != section {
                section = &c.section;
                writeln!(s, "[{section}]").unwrap();
            }
            if c.pass {
                writeln!(s, "  PASS {}: {}", c.name, c.actual).unwrap();
            } else {
                writeln!(s, "  FAIL {}: expected {} got {}", c.name, c.expected, c.actual).unwrap();
            }
        }
        writeln!(s, "[table] desk-scale evidence, not proof; {}", self.table_bounds).unwrap();
        let rules: Vec<&str> = self.table[0].cells.iter().map(|c| c.rule).collect();
        writeln!(s, "  {:<30}{}", "property", rules.iter().map(|r| format!("{r:<28}")).join("")).unwrap();
        for row in &self.table {
            let cells = row
                .cells
                .iter()
                .map(|c| {
                    let mark = if c.consistent { "" } else { " MISMATCH" };
                    let claimed = if c.claimed.is_empty() { "-" } else { c.claimed };
                    format!("{:<28}", format!("{claimed} [{}]{mark}", c.observed))
                })
                .join("");
            writeln!(s, "  {:<30}{}", row.property, cells.trim_end()).unwrap();
        }
        writeln!(s, "result: {}", if self.all_pass() { "all reproductions PASS" } else { "MISMATCH" }).unwrap();
        s
    }
}

struct Checks {
    section: String,
    out: Vec<ReproCheck>,
}

impl Checks {
    fn section(&mut self, name: &str) {
        self.section = name.to_string();
    }

    fn eq<T: PartialEq + std::fmt::Debug>(&mut self, name: &str, expected: T, actual: T) {
        self.out.push(ReproCheck {
            section: self.section.clone(),
            name: name.to_string(),
            pass: expected == actual,
            expected: format!("{expected:?}"),
            actual: format!("{actual:?}"),
        });
    }

    fn truth(&mut self, name: &str, ok: bool, detail: String) {
        self.out.push(ReproCheck {
            section: self.section.clone(),
            name: name.to_string(),
            pass: ok,
            expected: "true".into(),
            actual: detail,
        });
    }
}

fn welfare(inst: &ElectionInstance, w: &Committee) -> Vec<usize> {
    inst.welfare_vector(w).expect("committee fits instance").0
}

fn marked(id: FixtureId, label: &str) -> Committee {
    marked_committees(id)
        .into_iter()
        .find(|(l, _)| *l == label)
        .map(|(_, w)| w)
        .expect("known marked committee")
}

fn rationals(v: &[Rational]) -> Vec<String> {
    v.iter().map(|r| r.to_string()).collect()
}

pub fn repro() -> Result<ReproReport> {
    let mut c = Checks { section: String::new(), out: Vec::new() };
    let budget = DEFAULT_SEARCH_BUDGET;

    c.section("phragmen1899");
    let inst = fixture(FixtureId::Phragmen1899);
    c.eq("score {a,b1,b2,b3,c1}", "7750".to_string(), pav_score(&inst, &Committee::from_labels([1, 2, 3, 4, 6]))?.to_string());
    c.eq("score {a,b1,..,b4}", "7850".to_string(), pav_score(&inst, &Committee::from_labels([1, 2, 3, 4, 5]))?.to_string());
    let winners = pav_winners(&inst, DEFAULT_PAV_BUDGET)?;
    c.eq("pav winners", vec!["1,2,3,4,5".to_string()], winners.iter().map(|w| w.to_string()).collect());

    c.section("example21");
    let inst = fixture(FixtureId::Example21);
    let t = phragmen_sequential(&inst);
    let r = |a, b| Rational::new(a, b);
    let t1 = r(15, 48);
    let t2 = &t1 + r(9, 32);
    let t3 = &t2 + r(25, 128);
    let t4 = &t3 + r(81, 256);
    c.eq("election times", rationals(&[t1, t2, t3, t4]), rationals(&t.election_times));
    c.eq("committee", "1,2,4,5".to_string(), t.committee().to_string());

    c.section("example22");
    let t = rule_x(&inst);
    c.eq("q values", rationals(&[r(15, 48), r(15, 48), r(15, 40), r(1, 1)]), rationals(&t.q_values));
    c.eq("committee", "1,2,3,4".to_string(), t.committee().to_string());
    let forced = rule_x_with(&inst, &TieBreak::preferring(5, &[0, 1, 3])?);
    c.eq("forced c4 third", "1,2,4".to_string(), forced.committee().to_string());

    c.section("intro");
    let inst = fixture(FixtureId::Intro);
    let a = marked(FixtureId::Intro, "a");
    let b = marked(FixtureId::Intro, "b");
    c.eq("phragmen welfare", vec![4, 4, 4, 2, 2, 2], welfare(&inst, &phragmen_sequential(&inst).committee()));
    c.eq("rulex welfare", vec![4, 4, 4, 2, 2, 2], welfare(&inst, &rule_x(&inst).committee()));
    let pav: Vec<Vec<usize>> = pav_winners(&inst, DEFAULT_PAV_BUDGET)?.iter().map(|w| welfare(&inst, w)).unique().collect();
    c.eq("pav welfare", vec![vec![3; 6]], pav);
    let lam = check_laminar(&inst);
    c.eq("(a) priceable", true, check_priceable(&inst, &a)?.is_some());
    c.eq("(a) laminar proportional", Some(true), lam.as_ref().map(|d| d.admits(&a)));
    c.eq("(b) priceable", false, check_priceable(&inst, &b)?.is_some());
    c.eq("(b) laminar proportional", Some(false), lam.as_ref().map(|d| d.admits(&b)));
    let dev = find_core_deviation(&inst, &b, &Rational::one(), budget)?;
    c.eq("(b) core deviation coalition", Some(vec![0, 1, 2]), dev.as_ref().map(|d| d.coalition.clone()));

    c.section("fig3");
    let inst = fixture(FixtureId::Fig3);
    let mut blocked_ok = true;
    let mut core_count = 0;
    let mut core_without_pd = 0;
    for members in (0..15).combinations(12) {
        let w = Committee::new(members);
        let shape = [0, 1, 2].iter().all(|&x| w.contains(x)) && [3, 4, 5].iter().any(|&x| w.contains(x));
        let blocked = find_core_deviation(&inst, &w, &Rational::one(), budget)?.is_some();
        if !shape && !blocked {
            blocked_ok = false;
        }
        if !blocked {
            core_count += 1;
            if check_pigou_dalton(&inst, &w, budget)?.is_none() {
                core_without_pd += 1;
            }
        }
    }
    c.truth("committees without {c1,c2,c3} and one of {c4,c5,c6} are blocked", blocked_ok, format!("{blocked_ok}"));
    c.truth("core committees exist", core_count > 0, format!("{core_count} core committees"));
    c.eq("core committees without a Pigou-Dalton transfer", 0, core_without_pd);

    c.section("example31-33");
    for id in [FixtureId::Example31, FixtureId::Example32, FixtureId::Example33] {
        let inst = fixture(id);
        let d = check_laminar(&inst);
        c.eq(&format!("{id} laminar"), true, d.is_some());
        c.eq(&format!("{id} green committee proportional"), Some(true), d.map(|d| d.admits(&marked(id, "green"))));
    }

    c.section("example41");
    let inst = fixture(FixtureId::Example41);
    let blue = marked(FixtureId::Example41, "blue");
    let green = marked(FixtureId::Example41, "green");
    c.eq("blue priceable", true, check_priceable(&inst, &blue)?.is_some());
    c.eq("green priceable", true, check_priceable(&inst, &green)?.is_some());
    c.eq("green dominates blue", true, inst.welfare_vector(&green)?.dominates(&inst.welfare_vector(&blue)?));

    c.section("thm32");
    let inst1 = fixture(FixtureId::Thm32Instance1);
    let inst2 = fixture(FixtureId::Thm32Instance2);
    let w1 = vec![6; 8];
    let w2 = vec![7, 7, 7, 7, 5, 5, 5, 5];
    let d1 = check_laminar(&inst1).expect("instance 1 is laminar");
    let props1 = d1.proportional_committees(10_000)?;
    c.eq(
        "instance 1 proportional welfare vectors",
        vec![w1.clone()],
        props1.iter().map(|w| welfare(&inst1, w)).unique().collect(),
    );
    c.eq("instance 1 proportional committees", 25, props1.len());
    let d2 = check_laminar(&inst2).expect("instance 2 is laminar");
    let props2 = d2.proportional_committees(10_000)?;
    c.eq("instance 2 proportional committees", 1, props2.len());
    c.eq("instance 2 proportional welfare", w2.clone(), welfare(&inst2, &props2[0]));
    c.eq("instance 1 achieves w2", w2.clone(), welfare(&inst1, &marked(FixtureId::Thm32Instance1, "green")));
    c.eq("instance 2 achieves w1", w1.clone(), welfare(&inst2, &marked(FixtureId::Thm32Instance2, "green")));

    c.section("fig2");
    for (id, rich_first) in [(FixtureId::Fig2Profile1, true), (FixtureId::Fig2Profile2, false)] {
        let inst = fixture(id);
        let w1 = marked(id, "w1");
        let w2 = marked(id, "w2");
        let expected: Vec<usize> = if rich_first {
            [vec![7; 6], vec![5; 6]].concat()
        } else {
            [vec![5; 6], vec![7; 6]].concat()
        };
        c.eq(&format!("{id} w1 welfare"), expected, welfare(&inst, &w1));
        let ps = check_priceable(&inst, &w1)?;
        c.eq(&format!("{id} w1 priceable"), true, ps.is_some());
        c.eq(&format!("{id} mirrored committee priceable"), false, check_priceable(&inst, &w2)?.is_some());
        let fifth = PriceSystem {
            price: Rational::new(1, 5),
            payments: (0..12)
                .map(|v| {
                    let paying: Vec<usize> = inst.ballot(v).iter().copied().filter(|&x| w1.contains(x)).collect();
                    paying
                        .into_iter()
                        .map(|x| {
                            let share = Rational::new(1, 5) / Rational::from_usize(inst.supporters(x).len());
                            (x, share)
                        })
                        .collect()
                })
                .collect(),
        };
        c.eq(&format!("{id} w1 price 1/5 system"), Ok(()), verify_price_system(&inst, &w1, &fifth));
    }

    c.section("fig4");
    let inst = fixture(FixtureId::Fig4Profile1);
    let approved = (0..inst.num_candidates()).filter(|&x| !inst.supporters(x).is_empty()).count();
    c.eq("profile 1 approved candidates", 52, approved);
    for (id, sevens, fives) in [(FixtureId::Fig4Profile2, 3, 6), (FixtureId::Fig4Profile3, 2, 5)] {
        let inst = fixture(id);
        let w = welfare(&inst, &marked(id, "colored"));
        let count = |x| w.iter().filter(|&&u| u == x).count();
        c.eq(&format!("{id} sevens and fives"), (sevens, fives), (count(7), count(5)));
    }

    c.section("propB1");
    let inst = fixture(FixtureId::PropB1);
    let c1 = Committee::new(0..20);
    let c2 = Committee::new(20..36);
    c.eq("rulex committee", c1.clone(), rule_x(&inst).committee());
    let s: Vec<usize> = (0..40).chain(56..96).chain(112..160).collect();
    let dev = Deviation { coalition: s.clone(), alternative: c2.clone(), kind: DeviationKind::Priceable };
    c.eq("deviation verifies", true, verify_deviation(&inst, &c1, &dev, &Rational::one())?);
    c.eq("deviation restricted priceable", true, deviation_has_property(&inst, &s, &c2, CoreProperty::Priceable, false)?);
    let restricted = inst.restrict(&s, c2.len())?;
    let witness = PriceSystem {
        price: Rational::from_int(8),
        payments: (0..s.len())
            .map(|v| {
                let amount = if v < 80 { Rational::new(1, 8) } else { Rational::new(1, 2) };
                restricted.ballot(v).iter().filter(|&&x| c2.contains(x)).map(|&x| (x, amount.clone())).collect()
            })
            .collect(),
    };
    c.eq("payments 1/8 and 1/2 at price 8", Ok(()), verify_price_system(&restricted, &c2, &witness));

    c.section("remarkA1");
    let inst = fixture(FixtureId::RemarkA1);
    let w = phragmen_sequential(&inst).committee();
    let tail = (3..8).all(|x| w.contains(x)) && w.members().iter().filter(|&&x| x < 3).count() == 1;
    c.truth("phragmen picks one of c1..c3 and c4..c8", tail, w.to_string());
    c.eq("not laminar", true, check_laminar(&inst).is_none());

    c.section("overlapping_parties");
    let inst = fixture(FixtureId::OverlappingParties);
    let first = |w: &Committee| w.members().iter().filter(|&&x| x < 12).count();
    c.eq("rulex seats for the first party", 9, first(&rule_x(&inst).committee()));
    c.eq("phragmen seats for the first party", 8, first(&phragmen_sequential(&inst).committee()));

    c.section("lambda-core family");
    let inst = gen_theorem51_family(4, 2)?;
    c.eq("n, m, k", (12, 26, 18), (inst.num_voters(), inst.num_candidates(), inst.committee_size()));
    c.eq("first-group entitlement", Rational::from_int(6), Rational::ratio(18 * 4, 12));

    c.section("rulex lower bound");
    let l = rulex_lower_bound_min_l(2)?;
    let layout = gen_rulex_lower_bound(2, l)?;
    let inst = &layout.instance;
    let w = rule_x(inst).committee();
    c.eq("rulex buys exactly the blocks", layout.blocks.clone(), w.clone());
    let coalition: Vec<usize> = layout.groups.concat();
    let u = welfare(inst, &w);
    let ratio = coalition
        .iter()
        .map(|&v| Rational::ratio(layout.r.count_in(inst.ballot(v)), u[v]))
        .min()
        .expect("nonempty coalition");
    c.truth("witnessed ratio >= x-1", ratio >= Rational::one(), ratio.to_string());
    let dev = Deviation { coalition, alternative: layout.r.clone(), kind: DeviationKind::Core };
    c.eq("T = R deviation verifies", true, verify_deviation(inst, &w, &dev, &Rational::one())?);

    let (table_bounds, table) = table_one()?;
    Ok(ReproReport { checks: c.out, table_bounds, table })
}

const TABLE_INSTANCES: u64 = 40;
const TABLE_SEED: u64 = 20_240_601;

#[derive(Default)]
struct Tally {
    violations: usize,
    total: usize,
}

impl Tally {
    fn record(&mut self, violated: bool) {
        self.total += 1;
        self.violations += violated as usize;
    }

    fn observed(&self) -> String {
        format!("{}/{} violated", self.violations, self.total)
    }
}

fn table_one() -> Result<(String, Vec<TableRow>)> {
    let budget = DEFAULT_SEARCH_BUDGET;
    let rules = ["PAV", "Phragmen", "Rule X"];
    let instances: Vec<ElectionInstance> = (0..TABLE_INSTANCES)
        .map(|i| {
            let n = 2 + (i % 5) as usize;
            let m = 3 + (i % 4) as usize;
            let k = 1 + (i % 3) as usize;
            gen_random(TABLE_SEED + i, n, m, k, &Rational::new(1, 2)).expect("valid parameters")
        })
        .collect();
    let laminar: Vec<ElectionInstance> = (0..TABLE_INSTANCES)
        .map(|i| gen_laminar(TABLE_SEED + i, 3, 8, 1 + (i % 3) as usize).expect("valid parameters"))
        .collect();
    let outputs = |inst: &ElectionInstance| -> Result<Vec<Vec<Committee>>> {
        Ok(vec![
            pav_winners(inst, DEFAULT_PAV_BUDGET)?,
            vec![phragmen_sequential(inst).committee()],
            vec![rule_x(inst).committee()],
        ])
    };

    let names = [
        "laminar proportional",
        "priceable",
        "PJR",
        "EJR",
        "core (price-eq deviations)",
        "Pareto-optimal",
        "Pigou-Dalton",
    ];
    let claims: [[&str; 3]; 7] = [
        ["", "yes", "yes"],
        ["", "yes", "yes"],
        ["yes", "yes", "yes"],
        ["yes", "", "yes"],
        ["", "", "yes"],
        ["yes", "", ""],
        ["yes", "", ""],
    ];
    let mut tallies: Vec<Vec<Tally>> = (0..names.len()).map(|_| (0..3).map(|_| Tally::default()).collect()).collect();
    let mut worst_lambda: Vec<Option<Option<Rational>>> = vec![None; 3];
    let mut lambda_ok = [true; 3];

    for inst in &laminar {
        let d = check_laminar(inst).expect("generator output is laminar");
        for (r, ws) in outputs(inst)?.iter().enumerate() {
            tallies[0][r].record(ws.iter().any(|w| !d.admits(w)));
        }
    }
    for inst in &instances {
        let k = inst.committee_size();
        for (r, ws) in outputs(inst)?.iter().enumerate() {
            let mut v = [false; 7];
            for w in ws {
                v[1] |= check_priceable(inst, w)?.is_none();
                v[2] |= check_pjr(inst, w, budget)?.is_some();
                v[3] |= check_ejr(inst, w, budget)?.is_some();
                let opts = SubjectOptions { budget, ..SubjectOptions::default() };
                v[4] |= check_core_subject_to(inst, w, CoreProperty::PriceEq, &opts)?.is_some();
                v[5] |= check_pareto(inst, w, budget)?.is_some();
                v[6] |= check_pigou_dalton(inst, w, budget)?.is_some();
                let lambda = minimal_core_lambda(inst, w, budget)?;
                lambda_ok[r] &= match r {
                    0 => lambda.as_ref().is_some_and(|l| *l <= Rational::from_int(2)),
                    2 => lambda.as_ref().is_some_and(|l| within_log_bound(l, k)),
                    _ => true,
                };
                let worse = match (&worst_lambda[r], &lambda) {
                    (None, _) => true,
                    (Some(None), _) => false,
                    (Some(Some(_)), None) => true,
                    (Some(Some(a)), Some(b)) => b > a,
                };
                if worse {
                    worst_lambda[r] = Some(lambda);
                }
            }
            for (p, violated) in v.iter().enumerate().skip(1) {
                tallies[p][r].record(*violated);
            }
        }
    }

    let mut rows: Vec<TableRow> = names
        .iter()
        .zip(claims.iter())
        .zip(tallies.iter())
        .map(|((&property, claim), tally)| TableRow {
            property,
            cells: (0..3)
                .map(|r| TableCell {
                    rule: rules[r],
                    claimed: claim[r],
                    observed: tally[r].observed(),
                    consistent: claim[r].is_empty() || tally[r].violations == 0,
                })
                .collect(),
        })
        .collect();
    let core_claims = ["2-approx", "?", "O(log k)-approx"];
    rows.push(TableRow {
        property: "core (max minimal lambda)",
        cells: (0..3)
            .map(|r| TableCell {
                rule: rules[r],
                claimed: core_claims[r],
                observed: match &worst_lambda[r] {
                    Some(Some(l)) => l.to_string(),
                    Some(None) => "unbounded".into(),
                    None => "-".into(),
                },
                consistent: lambda_ok[r],
            })
            .collect(),
    });
    let bounds = format!(
        "{TABLE_INSTANCES} random instances (n 2..6, m 3..6, k 1..3, density 1/2) and {TABLE_INSTANCES} random laminar instances (depth 3, n <= 8, k 1..3); O(log k) read as lambda <= 2*log2(2k)+1"
    );
    Ok((bounds, rows))
}
