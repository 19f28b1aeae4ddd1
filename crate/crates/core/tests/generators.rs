use std::path::PathBuf;

use propvote::axioms::{check_laminar, check_laminar_proportional, verify_deviation, Deviation, DeviationKind};
use propvote::generators::{
    fixture, gen_laminar, gen_party_list, gen_random, gen_rulex_lower_bound, rulex_lower_bound_min_l, FixtureId,
};
use propvote::rules::{phragmen_sequential, rule_x};
use propvote::{Committee, ElectionInstance, Rational};

fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

#[test]
fn fixture_files_match_generators() {
    for id in FixtureId::ALL {
        let path = repo_root().join("fixtures").join(format!("{}.txt", id.name()));
        let on_disk = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        assert_eq!(on_disk, fixture(id).to_text(), "{}", id.name());
        assert_eq!(ElectionInstance::parse(&on_disk).unwrap(), fixture(id));
    }
}

#[test]
fn random_golden_file() {
    let path = repo_root().join("crates/core/tests/data/random_seed2024_n6_m8_k3.txt");
    let golden = std::fs::read_to_string(path).unwrap();
    let inst = gen_random(2024, 6, 8, 3, &Rational::new(1, 2)).unwrap();
    assert_eq!(inst.to_text(), golden);
}

#[test]
fn generators_are_deterministic() {
    for id in FixtureId::ALL {
        assert_eq!(fixture(id).digest(), fixture(id).digest());
    }
    assert_eq!(gen_laminar(11, 3, 12, 4).unwrap(), gen_laminar(11, 3, 12, 4).unwrap());
}

#[test]
fn laminar_generator_output_is_laminar() {
    for seed in 0..300 {
        let k = 1 + (seed as usize % 6);
        let inst = gen_laminar(seed, 4, 14, k).unwrap();
        assert!(check_laminar(&inst).is_some(), "seed {seed}: {}", inst.to_text());
    }
}

#[test]
fn depth_three_phragmen_is_laminar_proportional() {
    for seed in 0..50 {
        let inst = gen_laminar(seed, 3, 12, 4).unwrap();
        let w = phragmen_sequential(&inst).committee();
        assert!(check_laminar_proportional(&inst, &w).unwrap(), "seed {seed}");
    }
}

#[test]
fn party_list_integrality_matches_laminarity() {
    let cases: [(&[usize], &[usize], usize); 6] = [
        (&[3, 3, 2], &[3, 3, 2], 8),
        (&[2, 1], &[2, 2], 2),
        (&[2, 2], &[3, 3], 4),
        (&[1, 2, 3], &[2, 3, 4], 6),
        (&[1, 2, 3], &[2, 3, 4], 4),
        (&[5], &[3], 3),
    ];
    for (counts, cands, k) in cases {
        let (inst, integral) = gen_party_list(counts, cands, k).unwrap();
        assert_eq!(check_laminar(&inst).is_some(), integral, "{counts:?} k={k}");
    }
}

#[test]
fn prop_b1_rule_x_elects_first_block() {
    let inst = fixture(FixtureId::PropB1);
    assert_eq!(rule_x(&inst).committee(), Committee::new(0..20));
}

#[test]
fn overlapping_parties_split() {
    let inst = fixture(FixtureId::OverlappingParties);
    let first_party = |w: &Committee| w.members().iter().filter(|&&c| c < 12).count();
    let x = rule_x(&inst).committee();
    assert_eq!((first_party(&x), x.len()), (9, 12));
    let p = phragmen_sequential(&inst).committee();
    assert_eq!((first_party(&p), p.len()), (8, 12));
}

#[test]
fn lower_bound_construction_runs_as_designed() {
    for x in 2..=3 {
        let l = rulex_lower_bound_min_l(x).unwrap();
        for l in [l, l + 1, 2 * l + 1] {
            let layout = gen_rulex_lower_bound(x, l).unwrap();
            let inst = &layout.instance;
            let trace = rule_x(inst);
            assert_eq!(trace.committee(), layout.blocks, "x={x} L={l}");
            let welfare = inst.welfare_vector(&layout.blocks).unwrap();
            for (i, group) in layout.groups.iter().enumerate() {
                for &v in group {
                    assert_eq!(welfare.utilities()[v], layout.representatives[i]);
                    assert_eq!(layout.r.count_in(inst.ballot(v)), x.pow(i as u32 + 1));
                }
            }
            let coalition: Vec<usize> = layout.groups.concat();
            let dev = Deviation { coalition, alternative: layout.r.clone(), kind: DeviationKind::LambdaCore };
            let lambda = Rational::from_usize(x - 1);
            assert!(verify_deviation(inst, &layout.blocks, &dev, &lambda).unwrap());
        }
    }
}
