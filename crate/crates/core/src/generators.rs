//! Worked-example instances, constructions and seeded random families.
//!
//! Every generator is a pure function of its arguments. Candidate and voter
//! indices are 0-based; docs use 1-based labels (`c1` is index 0).

use std::fmt;
use std::str::FromStr;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::model::{Committee, ElectionInstance};
use crate::rational::Rational;

/// Named example instances.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FixtureId {
    Intro,
    Phragmen1899,
    Example21,
    Example22,
    Example31,
    Example32,
    Example33,
    Example41,
    Thm32Instance1,
    Thm32Instance2,
    Fig2Profile1,
    Fig2Profile2,
    Fig3,
    Fig4Profile1,
    Fig4Profile2,
    Fig4Profile3,
    PropB1,
    OverlappingParties,
    RemarkA1,
}

impl FixtureId {
    pub const ALL: [FixtureId; 19] = [
        FixtureId::Intro,
        FixtureId::Phragmen1899,
        FixtureId::Example21,
        FixtureId::Example22,
        FixtureId::Example31,
        FixtureId::Example32,
        FixtureId::Example33,
        FixtureId::Example41,
        FixtureId::Thm32Instance1,
        FixtureId::Thm32Instance2,
        FixtureId::Fig2Profile1,
        FixtureId::Fig2Profile2,
        FixtureId::Fig3,
        FixtureId::Fig4Profile1,
        FixtureId::Fig4Profile2,
        FixtureId::Fig4Profile3,
        FixtureId::PropB1,
        FixtureId::OverlappingParties,
        FixtureId::RemarkA1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FixtureId::Intro => "intro",
            FixtureId::Phragmen1899 => "phragmen1899",
            FixtureId::Example21 => "example21",
            FixtureId::Example22 => "example22",
            FixtureId::Example31 => "example31",
            FixtureId::Example32 => "example32",
            FixtureId::Example33 => "example33",
            FixtureId::Example41 => "example41",
            FixtureId::Thm32Instance1 => "thm32_instance1",
            FixtureId::Thm32Instance2 => "thm32_instance2",
            FixtureId::Fig2Profile1 => "fig2_profile1",
            FixtureId::Fig2Profile2 => "fig2_profile2",
            FixtureId::Fig3 => "fig3",
            FixtureId::Fig4Profile1 => "fig4_profile1",
            FixtureId::Fig4Profile2 => "fig4_profile2",
            FixtureId::Fig4Profile3 => "fig4_profile3",
            FixtureId::PropB1 => "propB1",
            FixtureId::OverlappingParties => "overlapping_parties",
            FixtureId::RemarkA1 => "remarkA1",
        }
    }
}

impl fmt::Display for FixtureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FixtureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FixtureId::ALL
            .iter()
            .copied()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::UnknownFixture(s.to_string()))
    }
}

/// Incremental builder: candidates are allocated in blocks and handed to
/// voter ranges.
struct Builder {
    ballots: Vec<Vec<usize>>,
    next: usize,
}

impl Builder {
    fn new(n: usize) -> Self {
        Builder { ballots: vec![Vec::new(); n], next: 0 }
    }

    /// Adds `count` fresh candidates approved by `voters`; returns the first index.
    fn block<I: IntoIterator<Item = usize> + Clone>(&mut self, count: usize, voters: I) -> usize {
        let first = self.next;
        for c in first..first + count {
            for v in voters.clone() {
                self.ballots[v].push(c);
            }
        }
        self.next += count;
        first
    }

    fn dummies(&mut self, count: usize) {
        self.next += count;
    }

    fn finish(self, k: usize) -> ElectionInstance {
        ElectionInstance::new(self.next, k, self.ballots).expect("fixture construction is valid")
    }
}

pub fn fixture(id: FixtureId) -> ElectionInstance {
    match id {
        FixtureId::Intro | FixtureId::Fig3 => intro(),
        FixtureId::Phragmen1899 => phragmen1899(),
        FixtureId::Example21 | FixtureId::Example22 => example21(),
        FixtureId::Example31 => gen_party_list(&[3, 3, 2], &[5, 5, 5], 8).expect("valid").0,
        FixtureId::Example32 => example32(),
        FixtureId::Example33 => example33(),
        FixtureId::Example41 => example41(4),
        FixtureId::Thm32Instance1 => thm32_instance1(),
        FixtureId::Thm32Instance2 => thm32_instance2(),
        FixtureId::Fig2Profile1 => fig2(false),
        FixtureId::Fig2Profile2 => fig2(true),
        FixtureId::Fig4Profile1 => fig4_profile1(),
        FixtureId::Fig4Profile2 => fig4_pairs(true),
        FixtureId::Fig4Profile3 => fig4_pairs(false),
        FixtureId::PropB1 => prop_b1(),
        FixtureId::OverlappingParties => overlapping_parties(),
        FixtureId::RemarkA1 => remark_a1(),
    }
}

/// Looks a fixture up by name.
pub fn fixture_by_name(name: &str) -> Result<ElectionInstance> {
    Ok(fixture(name.parse()?))
}

/// Committees highlighted for a fixture, with a short label.
pub fn marked_committees(id: FixtureId) -> Vec<(&'static str, Committee)> {
    let labels = |v: &[usize]| Committee::from_labels(v.iter().copied());
    let all_but = |m: usize, skip: &[usize]| {
        Committee::from_labels((1..=m).filter(|c| !skip.contains(c)))
    };
    match id {
        FixtureId::Intro | FixtureId::Fig3 => vec![
            ("a", labels(&[1, 2, 3, 4, 5, 6, 7, 8, 10, 11, 13, 14])),
            ("b", labels(&[1, 2, 3, 7, 8, 9, 10, 11, 12, 13, 14, 15])),
        ],
        FixtureId::Phragmen1899 => vec![
            ("pav", labels(&[1, 2, 3, 4, 5])),
            ("proportional", labels(&[1, 2, 3, 4, 6])),
        ],
        FixtureId::Example21 => vec![("phragmen", labels(&[1, 2, 4, 5]))],
        FixtureId::Example22 => vec![("rulex", labels(&[1, 2, 3, 4]))],
        FixtureId::Example31 => vec![("green", labels(&[1, 2, 3, 6, 7, 8, 11, 12]))],
        FixtureId::Example32 => vec![("green", labels(&[1, 2, 3, 5]))],
        FixtureId::Example33 => {
            vec![("green", labels(&[1, 2, 3, 4, 5, 6, 7, 8, 11, 12, 13, 18]))]
        }
        FixtureId::Example41 => vec![
            ("blue", labels(&[1, 2, 3, 4])),
            ("green", labels(&[5, 6, 7, 8])),
        ],
        FixtureId::Thm32Instance1 => vec![
            ("blue", all_but(22, &[9, 14])),
            ("green", all_but(22, &[18, 22])),
        ],
        FixtureId::Thm32Instance2 => vec![
            ("green", all_but(24, &[17, 18, 19, 20])),
            ("blue", all_but(24, &[21, 22, 23, 24])),
        ],
        FixtureId::Fig2Profile1 | FixtureId::Fig2Profile2 => {
            let swapped = id == FixtureId::Fig2Profile2;
            vec![("w1", fig2_committee(swapped, false)), ("w2", fig2_committee(swapped, true))]
        }
        FixtureId::Fig4Profile2 => vec![("colored", all_but(54, &[8, 20, 39, 45, 53, 54]))],
        FixtureId::Fig4Profile3 => vec![("colored", all_but(54, &[8, 38, 44, 52, 53, 54]))],
        FixtureId::PropB1 => vec![("C1", Committee::new(0..20))],
        FixtureId::Fig4Profile1 | FixtureId::OverlappingParties | FixtureId::RemarkA1 => Vec::new(),
    }
}

fn intro() -> ElectionInstance {
    let mut b = Builder::new(6);
    b.block(3, 0..3);
    for v in 0..3 {
        b.block(1, v..v + 1);
    }
    for v in 3..6 {
        b.block(3, v..v + 1);
    }
    b.finish(12)
}

fn phragmen1899() -> ElectionInstance {
    let mut b = Builder::new(4000);
    b.block(1, 0..4000);
    b.block(4, 0..3000);
    b.block(4, 3000..4000);
    b.finish(5)
}

fn example21() -> ElectionInstance {
    let mut b = Builder::new(15);
    b.block(2, 0..12);
    b.block(1, 0..10);
    b.block(2, 5..15);
    b.finish(4)
}

fn example32() -> ElectionInstance {
    let mut b = Builder::new(6);
    b.block(1, 0..6);
    b.block(3, 0..4);
    b.block(4, 4..6);
    b.finish(4)
}

fn example33() -> ElectionInstance {
    let mut b = Builder::new(9);
    b.block(4, 0..6);
    b.block(2, 0..3);
    b.block(4, 3..6);
    b.block(1, 6..9);
    b.block(6, 6..8);
    b.block(3, 8..9);
    b.finish(12)
}

/// `k` voters; voter `i` approves `c_i` and all of `c_{k+1}..c_{2k}`.
fn example41(k: usize) -> ElectionInstance {
    let mut b = Builder::new(k);
    for v in 0..k {
        b.block(1, v..v + 1);
    }
    b.block(k, 0..k);
    b.finish(k)
}

fn thm32_instance1() -> ElectionInstance {
    let mut b = Builder::new(8);
    b.block(2, 0..4);
    b.block(2, 4..8);
    b.block(5, 0..2);
    b.block(5, 2..4);
    b.block(4, 4..6);
    b.block(4, 6..8);
    b.finish(20)
}

fn thm32_instance2() -> ElectionInstance {
    let mut b = Builder::new(8);
    b.block(6, 0..4);
    b.block(5, 4..6);
    b.block(5, 6..8);
    for v in 0..8 {
        b.block(1, v..v + 1);
    }
    b.finish(20)
}

/// Twelve voters, k = 57. The half with the three shared candidates is
/// `v1..v6` in profile 1 and `v7..v12` in profile 2.
fn fig2(swapped: bool) -> ElectionInstance {
    let shared = if swapped { 6..12 } else { 0..6 };
    let mut b = Builder::new(12);
    b.block(3, shared.clone());
    for v in 0..12 {
        let count = if shared.contains(&v) { 54 } else { 57 };
        b.block(count, v..v + 1);
    }
    b.finish(57)
}

/// `w1` gives the shared half 7 and the other half 5; `w2` is its mirror image.
fn fig2_committee(swapped: bool, mirror: bool) -> Committee {
    let inst = fig2(swapped);
    let shared_half_first = !swapped;
    let mut members: Vec<usize> = vec![0, 1, 2];
    for v in 0..12 {
        let shared = (v < 6) == shared_half_first;
        let rich = shared != mirror;
        let own: Vec<usize> = inst.ballot(v).iter().copied().filter(|&c| c >= 3).collect();
        let take = match (shared, rich) {
            (true, true) => 4,
            (true, false) => 2,
            (false, true) => 7,
            (false, false) => 5,
        };
        members.extend(own.into_iter().take(take));
    }
    Committee::new(members)
}

fn fig4_profile1() -> ElectionInstance {
    let mut b = Builder::new(16);
    for v in 0..4 {
        b.block(1, v..v + 1);
    }
    b.block(6, 0..4);
    for pair in 2..8 {
        b.block(5, 2 * pair..2 * pair + 2);
    }
    for v in 4..16 {
        b.block(1, v..v + 1);
    }
    b.dummies(2);
    b.finish(48)
}

/// Profile 2 (`bridge = true`) and profile 3 of the fig4 fixtures.
fn fig4_pairs(bridge: bool) -> ElectionInstance {
    let mut b = Builder::new(16);
    b.block(7, 0..2);
    b.block(6, 2..4);
    b.block(6, 4..6);
    b.block(6, 6..8);
    if bridge {
        b.block(1, 5..7);
    }
    for pair in 4..8 {
        b.block(6, 2 * pair..2 * pair + 2);
    }
    b.block(1, 14..15);
    b.dummies(54 - b.next);
    b.finish(48)
}

fn prop_b1() -> ElectionInstance {
    let mut b = Builder::new(160);
    b.block(7, 0..56);
    b.block(7, 56..112);
    for g in 0..6 {
        b.block(1, 112 + 8 * g..120 + 8 * g);
    }
    let c2a = b.block(8, 0..40);
    let c2b = b.block(8, 56..96);
    for g in 0..8 {
        for v in 112 + 6 * g..118 + 6 * g {
            b.ballots[v].push(c2a + g);
            b.ballots[v].push(c2b + g);
        }
    }
    b.finish(20)
}

fn overlapping_parties() -> ElectionInstance {
    let mut b = Builder::new(8);
    b.block(12, 0..6);
    b.block(12, 4..8);
    b.finish(12)
}

fn remark_a1() -> ElectionInstance {
    let mut b = Builder::new(18);
    b.block(1, 0..2);
    b.block(1, 2..4);
    b.block(1, 4..6);
    b.block(5, 6..18);
    b.finish(6)
}

/// Party-list instance with disjoint parties. Returns the instance and whether
/// every `k·n_z/n` is a whole number.
pub fn gen_party_list(
    voter_counts: &[usize],
    candidates_per_party: &[usize],
    k: usize,
) -> Result<(ElectionInstance, bool)> {
    if voter_counts.len() != candidates_per_party.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} voter counts but {} candidate counts",
            voter_counts.len(),
            candidates_per_party.len()
        )));
    }
    if voter_counts.is_empty() || voter_counts.iter().chain(candidates_per_party).any(|&x| x == 0) {
        return Err(Error::InvalidParameters("party sizes must be positive".into()));
    }
    let n: usize = voter_counts.iter().sum();
    let mut b = Builder::new(n);
    let mut start = 0;
    for (&nz, &cz) in voter_counts.iter().zip(candidates_per_party) {
        b.block(cz, start..start + nz);
        start += nz;
    }
    let integral = voter_counts.iter().all(|&nz| (k * nz) % n == 0);
    Ok((ElectionInstance::new(b.next, k, b.ballots)?, integral))
}

fn below(rng: &mut ChaCha8Rng, bound: usize) -> usize {
    (rng.next_u64() % bound as u64) as usize
}

/// Random laminar instance built from a random derivation tree.
///
/// The root has `k` seats and a random number of voters up to `max_voters`.
/// Each node is a unanimous block (always at depth `max_depth`), a common
/// candidate on top of a `k−1` child, or a split into two parts that keep
/// the voters-per-seat ratio.
pub fn gen_laminar(seed: u64, max_depth: usize, max_voters: usize, k: usize) -> Result<ElectionInstance> {
    if k == 0 || max_depth == 0 || max_voters == 0 {
        return Err(Error::InvalidParameters("k, max_depth and max_voters must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = max_voters / 2 + 1 + below(&mut rng, max_voters - max_voters / 2);
    let mut b = Builder::new(n);
    let voters: Vec<usize> = (0..n).collect();
    laminar_node(&mut rng, &mut b, &voters, k, max_depth);
    Ok(b.finish(k))
}

fn laminar_node(rng: &mut ChaCha8Rng, b: &mut Builder, voters: &[usize], k: usize, depth: usize) {
    let n = voters.len();
    let g = num_integer::gcd(n, k);
    let mut options = vec![0];
    if depth > 1 {
        if k >= 2 {
            options.push(1);
        }
        if g >= 2 {
            options.push(2);
            options.push(2);
        }
    }
    match options[below(rng, options.len())] {
        1 => {
            b.block(1, voters.iter().copied());
            laminar_node(rng, b, voters, k - 1, depth - 1);
        }
        2 => {
            let parts = 1 + below(rng, g - 1);
            let split = parts * n / g;
            let seats = parts * k / g;
            laminar_node(rng, b, &voters[..split], seats, depth - 1);
            laminar_node(rng, b, &voters[split..], k - seats, depth - 1);
        }
        _ => {
            let extra = below(rng, 2);
            b.block(k + extra, voters.iter().copied());
        }
    }
}

/// The family used to show that no rule achieves a `λ`-core for small `λ`:
/// `x` voters share `y` candidates and have `y` private ones each, and `y·x`
/// further voters have `y` private candidates each.
pub fn gen_theorem51_family(x: usize, y: usize) -> Result<ElectionInstance> {
    if y < 2 || x < y * y {
        return Err(Error::InvalidParameters(format!("need y >= 2 and x >= y^2 (x = {x}, y = {y})")));
    }
    let n = x + y * x;
    let mut b = Builder::new(n);
    b.block(y, 0..x);
    for v in 0..n {
        b.block(y, v..v + 1);
    }
    debug_assert_eq!(b.next, y + y * x + y * y * x);
    Ok(b.finish(y * y * x + y))
}

/// Layout of a [`gen_rulex_lower_bound`] instance.
#[derive(Clone, Debug)]
pub struct LowerBoundLayout {
    pub instance: ElectionInstance,
    /// `groups[i]` are the voters of `S_{i+1}`.
    pub groups: Vec<Vec<usize>>,
    /// The `x^x` candidates of `R` (the last ones).
    pub r: Committee,
    /// Candidates bought block by block, in purchase order.
    pub blocks: Committee,
    /// `s_ℓ / L`: the number of representatives each `S_ℓ` voter gets from the blocks.
    pub representatives: Vec<usize>,
}

/// Smallest `L` accepted by [`gen_rulex_lower_bound`] for this `x`.
pub fn rulex_lower_bound_min_l(x: usize) -> Result<usize> {
    if x < 2 {
        return Err(Error::InvalidParameters("x must be at least 2".into()));
    }
    (1..=x.pow(x as u32))
        .find(|&l| lower_bound_divisible(x, l))
        .ok_or_else(|| Error::InvalidParameters("no feasible L".into()))
}

fn lower_bound_divisible(x: usize, l: usize) -> bool {
    let rsize = x.pow(x as u32);
    let group = l * x.pow(x as u32 - 1);
    (1..=x).all(|i| {
        let window = x.pow(i as u32);
        let s = l * (window - 1) / (x - 1);
        (group * window) % rsize == 0 && group % (rsize / window) == 0 && s % l == 0
    })
}

/// Instance on which Rule X leaves a large coalition under-represented
/// relative to what it could buy from `R`.
///
/// Block candidates come first so that lexicographic tie-breaking prefers
/// them over the equally priced candidates of `R`.
pub fn gen_rulex_lower_bound(x: usize, l: usize) -> Result<LowerBoundLayout> {
    if x < 2 || l == 0 {
        return Err(Error::InvalidParameters("need x >= 2 and L >= 1".into()));
    }
    if x > 4 {
        return Err(Error::BudgetExceeded { what: "lower-bound construction size", budget: 4 });
    }
    if !lower_bound_divisible(x, l) {
        return Err(Error::InvalidParameters(format!("L = {l} violates the divisibility constraints for x = {x}")));
    }
    let rsize = x.pow(x as u32);
    let group = l * x.pow(x as u32 - 1);
    let s = |ell: usize| l * (x.pow(ell as u32) - 1) / (x - 1);

    let groups: Vec<Vec<usize>> = (0..x).map(|i| (i * group..(i + 1) * group).collect()).collect();
    let mut ballots: Vec<Vec<usize>> = vec![Vec::new(); x * group];
    // (count, voters) for each block, in purchase order.
    let mut plan: Vec<(usize, Vec<usize>)> = Vec::new();

    let sx = s(x);
    let mut top = groups[x - 1].clone();
    let extra = sx - group;
    top.extend(ballots.len()..ballots.len() + extra);
    ballots.resize(ballots.len() + extra, Vec::new());
    plan.push((sx / l, top));

    for ell in (1..x).rev() {
        let sl = s(ell);
        let mut remaining: &[usize] = &groups[ell - 1];
        while remaining.len() >= sl {
            plan.push((sl / l, remaining[..sl].to_vec()));
            remaining = &remaining[sl..];
        }
        if !remaining.is_empty() {
            let mut voters = remaining.to_vec();
            let extra = sl - remaining.len();
            voters.extend(ballots.len()..ballots.len() + extra);
            ballots.resize(ballots.len() + extra, Vec::new());
            plan.push((sl / l, voters));
        }
    }

    let num_blocks: usize = plan.iter().map(|(c, _)| c).sum();
    let mut next = 0;
    for (count, voters) in &plan {
        for c in next..next + count {
            for &v in voters {
                ballots[v].push(c);
            }
        }
        next += count;
    }
    for (i, members) in groups.iter().enumerate() {
        let window = x.pow(i as u32 + 1);
        for (j, &v) in members.iter().enumerate() {
            let start = (j * window) % rsize;
            for offset in 0..window {
                ballots[v].push(num_blocks + (start + offset) % rsize);
            }
        }
    }
    let n = ballots.len();
    debug_assert_eq!(n % l, 0);
    let k = n / l;
    debug_assert_eq!(k, num_blocks);
    let instance = ElectionInstance::new(num_blocks + rsize, k, ballots)?;
    Ok(LowerBoundLayout {
        instance,
        groups,
        r: Committee::new(num_blocks..num_blocks + rsize),
        blocks: Committee::new(0..num_blocks),
        representatives: (1..=x).map(|ell| s(ell) / l).collect(),
    })
}

/// Independent approvals with probability `density`.
///
/// The bit stream is ChaCha8 seeded with `seed_from_u64(seed)`. Voters are
/// visited in order and, within a voter, candidates in order; each pair
/// draws one `next_u64()` value `u` and the voter approves iff
/// `u · den < num · 2^64` where `density = num/den`.
pub fn gen_random(seed: u64, n: usize, m: usize, k: usize, density: &Rational) -> Result<ElectionInstance> {
    if k == 0 || k > m || n == 0 {
        return Err(Error::InvalidParameters(format!("need n >= 1 and 1 <= k <= m (n = {n}, m = {m}, k = {k})")));
    }
    if density.is_negative() || *density > Rational::one() {
        return Err(Error::InvalidParameters(format!("density {density} outside [0, 1]")));
    }
    let den: u64 = density
        .denom()
        .try_into()
        .map_err(|_| Error::InvalidParameters(format!("density denominator of {density} exceeds 64 bits")))?;
    let num: u64 = density.numer().try_into().expect("numerator bounded by denominator");
    let (num, den) = (num as u128, den as u128);
    let threshold = num << 64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ballots = (0..n)
        .map(|_| (0..m).filter(|_| (rng.next_u64() as u128) * den < threshold).collect())
        .collect();
    ElectionInstance::new(m, k, ballots)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for id in FixtureId::ALL {
            assert_eq!(id.name().parse::<FixtureId>().unwrap(), id);
        }
        assert!("nope".parse::<FixtureId>().is_err());
    }

    #[test]
    fn sizes() {
        let dims = |id| {
            let i = fixture(id);
            (i.num_voters(), i.num_candidates(), i.committee_size())
        };
        assert_eq!(dims(FixtureId::Intro), (6, 15, 12));
        assert_eq!(dims(FixtureId::Phragmen1899), (4000, 9, 5));
        assert_eq!(dims(FixtureId::PropB1), (160, 36, 20));
        assert_eq!(dims(FixtureId::Fig2Profile1), (12, 669, 57));
        assert_eq!(dims(FixtureId::Fig4Profile1), (16, 54, 48));
        assert_eq!(dims(FixtureId::Fig4Profile2), (16, 54, 48));
        assert_eq!(dims(FixtureId::Fig4Profile3), (16, 54, 48));
        assert_eq!(dims(FixtureId::Thm32Instance1), (8, 22, 20));
        assert_eq!(dims(FixtureId::Thm32Instance2), (8, 24, 20));
    }

    #[test]
    fn marked_committee_sizes() {
        for id in FixtureId::ALL {
            let inst = fixture(id);
            for (label, w) in marked_committees(id) {
                assert_eq!(w.len(), inst.committee_size(), "{id} {label}");
            }
        }
    }

    #[test]
    fn figure_welfare_vectors() {
        let welfare = |id, label: &str| {
            let inst = fixture(id);
            let w = marked_committees(id).into_iter().find(|(l, _)| *l == label).unwrap().1;
            inst.welfare_vector(&w).unwrap().0
        };
        assert_eq!(welfare(FixtureId::Thm32Instance1, "blue"), vec![6; 8]);
        assert_eq!(welfare(FixtureId::Thm32Instance1, "green"), vec![7, 7, 7, 7, 5, 5, 5, 5]);
        assert_eq!(welfare(FixtureId::Thm32Instance2, "green"), vec![6; 8]);
        assert_eq!(welfare(FixtureId::Thm32Instance2, "blue"), vec![7, 7, 7, 7, 5, 5, 5, 5]);
        assert_eq!(welfare(FixtureId::Fig2Profile1, "w1"), [vec![7; 6], vec![5; 6]].concat());
        assert_eq!(welfare(FixtureId::Fig2Profile1, "w2"), [vec![5; 6], vec![7; 6]].concat());
        assert_eq!(welfare(FixtureId::Fig2Profile2, "w1"), [vec![5; 6], vec![7; 6]].concat());
        assert_eq!(
            welfare(FixtureId::Fig4Profile2, "colored"),
            vec![7, 7, 5, 5, 6, 7, 6, 5, 6, 6, 6, 6, 5, 5, 6, 5]
        );
        assert_eq!(
            welfare(FixtureId::Fig4Profile3, "colored"),
            vec![7, 7, 5, 5, 6, 6, 6, 6, 6, 6, 6, 6, 5, 5, 6, 5]
        );
        assert_eq!(welfare(FixtureId::Intro, "a"), vec![4, 4, 4, 2, 2, 2]);
        assert_eq!(welfare(FixtureId::Intro, "b"), vec![3; 6]);
    }

    #[test]
    fn party_list_examples() {
        let (inst, integral) = gen_party_list(&[3, 3, 2], &[3, 3, 2], 8).unwrap();
        assert!(integral);
        assert_eq!(inst.num_candidates(), 8);
        assert!(!gen_party_list(&[2, 1], &[2, 2], 2).unwrap().1);
        let (inst, integral) = gen_party_list(&[1], &[5], 5).unwrap();
        assert!(integral);
        assert_eq!(inst.ballot(0), &[0, 1, 2, 3, 4]);
        assert!(gen_party_list(&[1, 2], &[1], 1).is_err());
    }

    #[test]
    fn lambda_core_family_sizes() {
        let inst = gen_theorem51_family(4, 2).unwrap();
        assert_eq!((inst.num_voters(), inst.num_candidates(), inst.committee_size()), (12, 26, 18));
        assert_eq!(gen_theorem51_family(9, 3).unwrap().committee_size(), 84);
        assert!(gen_theorem51_family(3, 2).is_err());
        assert!(gen_theorem51_family(4, 1).is_err());
    }

    #[test]
    fn random_extremes() {
        let full = gen_random(3, 4, 5, 2, &Rational::one()).unwrap();
        assert!(full.ballots().iter().all(|b| b.len() == 5));
        let empty = gen_random(3, 4, 5, 2, &Rational::zero()).unwrap();
        assert!(empty.ballots().iter().all(|b| b.is_empty()));
        assert_eq!(
            gen_random(9, 6, 8, 3, &Rational::new(1, 2)).unwrap(),
            gen_random(9, 6, 8, 3, &Rational::new(1, 2)).unwrap()
        );
    }

    #[test]
    fn laminar_depth_one_is_unanimous() {
        let inst = gen_laminar(5, 1, 6, 3).unwrap();
        let first = inst.ballot(0).to_vec();
        assert!(first.len() >= 3);
        assert!(inst.ballots().iter().all(|b| *b == first));
        assert!(gen_laminar(5, 1, 6, 0).is_err());
    }

    #[test]
    fn lower_bound_shape() {
        assert_eq!(rulex_lower_bound_min_l(2).unwrap(), 1);
        let layout = gen_rulex_lower_bound(2, 3).unwrap();
        let inst = &layout.instance;
        assert_eq!(inst.num_voters() % 3, 0);
        assert_eq!(inst.num_voters() / inst.committee_size(), 3);
        assert_eq!(layout.representatives, vec![1, 3]);
        assert_eq!(layout.r.len(), 4);
        for (i, g) in layout.groups.iter().enumerate() {
            for &v in g {
                assert_eq!(layout.r.count_in(inst.ballot(v)), 2usize.pow(i as u32 + 1));
            }
        }
    }
}
