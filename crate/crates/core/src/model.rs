//! Election instances, committees and welfare vectors.
//!
//! Candidates and voters are dense 0-based indices in memory. The text format
//! and committee literals use 1-based indices:
//!
//! ```text
//! # comment lines start with '#'
//! m n k
//! 1 2        <- voter 1 approves candidates 1 and 2
//! 3          <- voter 2 approves candidate 3
//!            <- an empty line is an empty ballot
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, ParseError, Result};

/// An approval election `(C, N, P, k)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ElectionInstance {
    num_candidates: usize,
    committee_size: usize,
    ballots: Vec<Vec<usize>>,
    supporters: Vec<Vec<usize>>,
}

impl ElectionInstance {
    /// Builds an instance from 0-based approval sets. Ballots are sorted;
    /// duplicates and out-of-range candidates are rejected.
    pub fn new(num_candidates: usize, committee_size: usize, ballots: Vec<Vec<usize>>) -> Result<Self> {
        if num_candidates == 0 {
            return Err(Error::InvalidInstance("at least one candidate is required".into()));
        }
        if ballots.is_empty() {
            return Err(Error::InvalidInstance("at least one voter is required".into()));
        }
        if committee_size == 0 || committee_size > num_candidates {
            return Err(Error::InvalidInstance(format!(
                "committee size must satisfy 1 <= k <= m (k = {committee_size}, m = {num_candidates})"
            )));
        }
        let mut clean = Vec::with_capacity(ballots.len());
        for (voter, mut ballot) in ballots.into_iter().enumerate() {
            ballot.sort_unstable();
            for pair in ballot.windows(2) {
                if pair[0] == pair[1] {
                    return Err(Error::InvalidInstance(format!(
                        "voter {} approves candidate {} twice",
                        voter + 1,
                        pair[0] + 1
                    )));
                }
            }
            if let Some(&c) = ballot.last() {
                if c >= num_candidates {
                    return Err(Error::CandidateOutOfRange {
                        candidate: c,
                        num_candidates,
                    });
                }
            }
            clean.push(ballot);
        }
        Ok(Self::from_sorted(num_candidates, committee_size, clean))
    }

    fn from_sorted(num_candidates: usize, committee_size: usize, ballots: Vec<Vec<usize>>) -> Self {
        let mut supporters = vec![Vec::new(); num_candidates];
        for (voter, ballot) in ballots.iter().enumerate() {
            for &c in ballot {
                supporters[c].push(voter);
            }
        }
        ElectionInstance {
            num_candidates,
            committee_size,
            ballots,
            supporters,
        }
    }

    pub fn num_candidates(&self) -> usize {
        self.num_candidates
    }

    pub fn num_voters(&self) -> usize {
        self.ballots.len()
    }

    pub fn committee_size(&self) -> usize {
        self.committee_size
    }

    pub fn ballots(&self) -> &[Vec<usize>] {
        &self.ballots
    }

    pub fn ballot(&self, voter: usize) -> &[usize] {
        &self.ballots[voter]
    }

    pub fn approves(&self, voter: usize, candidate: usize) -> bool {
        self.ballots[voter].binary_search(&candidate).is_ok()
    }

    /// Voters approving `candidate` (`N(c)`), in increasing order.
    pub fn approvers(&self, candidate: usize) -> Result<&[usize]> {
        self.supporters
            .get(candidate)
            .map(Vec::as_slice)
            .ok_or(Error::CandidateOutOfRange {
                candidate,
                num_candidates: self.num_candidates,
            })
    }

    /// Same as [`approvers`](Self::approvers) for an index known to be valid.
    pub fn supporters(&self, candidate: usize) -> &[usize] {
        &self.supporters[candidate]
    }

    /// Same instance with a different committee size.
    pub fn with_committee_size(&self, k: usize) -> Result<Self> {
        Self::new(self.num_candidates, k, self.ballots.clone())
    }

    /// Restriction `P|_S` to the given voters, keeping the candidate universe.
    /// Voters are renumbered in the order given.
    pub fn restrict(&self, voters: &[usize], new_k: usize) -> Result<Self> {
        if voters.is_empty() {
            return Err(Error::EmptyVoterSet);
        }
        let mut ballots = Vec::with_capacity(voters.len());
        for &v in voters {
            let ballot = self.ballots.get(v).ok_or(Error::VoterOutOfRange {
                voter: v,
                num_voters: self.num_voters(),
            })?;
            ballots.push(ballot.clone());
        }
        Self::new(self.num_candidates, new_k, ballots)
    }

    /// Identical ballots with their multiplicities, in first-occurrence order.
    pub fn ballot_groups(&self) -> Vec<(&[usize], usize)> {
        let mut index: BTreeMap<&[usize], usize> = BTreeMap::new();
        let mut groups: Vec<(&[usize], usize)> = Vec::new();
        for ballot in &self.ballots {
            match index.get(ballot.as_slice()) {
                Some(&g) => groups[g].1 += 1,
                None => {
                    index.insert(ballot.as_slice(), groups.len());
                    groups.push((ballot.as_slice(), 1));
                }
            }
        }
        groups
    }

    /// Ballots as bitmasks; `None` when there are more than 64 candidates.
    pub fn ballot_masks(&self) -> Option<Vec<u64>> {
        if self.num_candidates > 64 {
            return None;
        }
        Some(
            self.ballots
                .iter()
                .map(|b| b.iter().fold(0u64, |acc, &c| acc | (1u64 << c)))
                .collect(),
        )
    }

    pub fn check_committee(&self, committee: &Committee) -> Result<()> {
        if let Some(&c) = committee.members().last() {
            if c >= self.num_candidates {
                return Err(Error::CandidateOutOfRange {
                    candidate: c,
                    num_candidates: self.num_candidates,
                });
            }
        }
        Ok(())
    }

    /// Welfare vector `(|A_i ∩ W|)_i`.
    pub fn welfare_vector(&self, committee: &Committee) -> Result<WelfareVector> {
        self.check_committee(committee)?;
        Ok(WelfareVector(
            self.ballots
                .iter()
                .map(|b| committee.count_in(b))
                .collect(),
        ))
    }

    /// Canonical text serialization (LF line endings, 1-based indices).
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} {} {}\n",
            self.num_candidates,
            self.num_voters(),
            self.committee_size
        );
        for ballot in &self.ballots {
            let line: Vec<String> = ballot.iter().map(|c| (c + 1).to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    /// Short content hash of the canonical serialization.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.to_text().as_bytes());
        hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    /// Parses the instance text format; errors name the offending line.
    pub fn parse(text: &str) -> std::result::Result<Self, ParseError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim_end()))
            .filter(|(_, l)| !l.trim_start().starts_with('#'));

        let (header_line, header) = lines.next().ok_or(ParseError::Header {
            line: 1,
            reason: "empty input".into(),
        })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(ParseError::Header {
                line: header_line,
                reason: format!("expected 3 fields, found {}", fields.len()),
            });
        }
        let mut nums = [0usize; 3];
        for (slot, field) in nums.iter_mut().zip(&fields) {
            *slot = field.parse().map_err(|_| ParseError::Header {
                line: header_line,
                reason: format!("`{field}` is not a nonnegative integer"),
            })?;
            if *slot == 0 {
                return Err(ParseError::Header {
                    line: header_line,
                    reason: "values must be positive".into(),
                });
            }
        }
        let [m, n, k] = nums;
        if k > m {
            return Err(ParseError::CommitteeTooLarge {
                line: header_line,
                k,
                m,
            });
        }

        let mut ballots = Vec::with_capacity(n);
        let mut last_line = header_line;
        for (line_no, line) in lines.by_ref() {
            last_line = line_no;
            if ballots.len() == n {
                if line.trim().is_empty() {
                    continue;
                }
                return Err(ParseError::TrailingContent { line: line_no });
            }
            let mut ballot = Vec::new();
            for token in line.split_whitespace() {
                let c: usize = token.parse().map_err(|_| ParseError::Token {
                    line: line_no,
                    token: token.to_string(),
                })?;
                if c == 0 || c > m {
                    return Err(ParseError::CandidateOutOfRange {
                        line: line_no,
                        candidate: c,
                        num_candidates: m,
                    });
                }
                ballot.push(c - 1);
            }
            ballot.sort_unstable();
            if let Some(pair) = ballot.windows(2).find(|p| p[0] == p[1]) {
                return Err(ParseError::DuplicateCandidate {
                    line: line_no,
                    candidate: pair[0] + 1,
                });
            }
            ballots.push(ballot);
        }
        if ballots.len() < n {
            return Err(ParseError::MissingVoters {
                line: last_line,
                expected: n,
                found: ballots.len(),
            });
        }
        Ok(Self::from_sorted(m, k, ballots))
    }
}

impl fmt::Debug for ElectionInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ElectionInstance(m={}, n={}, k={})",
            self.num_candidates,
            self.num_voters(),
            self.committee_size
        )
    }
}

impl FromStr for ElectionInstance {
    type Err = ParseError;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        ElectionInstance::parse(s)
    }
}

/// A set of candidates, stored sorted and deduplicated.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Committee(Vec<usize>);

impl Committee {
    pub fn new<I: IntoIterator<Item = usize>>(members: I) -> Self {
        let mut v: Vec<usize> = members.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Committee(v)
    }

    pub fn empty() -> Self {
        Committee(Vec::new())
    }

    /// Builds from 1-based labels, as written in instance files and on the CLI.
    pub fn from_labels<I: IntoIterator<Item = usize>>(labels: I) -> Self {
        Committee::new(labels.into_iter().map(|c| {
            assert!(c >= 1, "candidate labels are 1-based");
            c - 1
        }))
    }

    pub fn from_mask(mask: u64) -> Self {
        Committee((0..64).filter(|c| mask >> c & 1 == 1).collect())
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, candidate: usize) -> bool {
        self.0.binary_search(&candidate).is_ok()
    }

    pub fn insert(&mut self, candidate: usize) {
        if let Err(pos) = self.0.binary_search(&candidate) {
            self.0.insert(pos, candidate);
        }
    }

    pub fn remove(&mut self, candidate: usize) {
        if let Ok(pos) = self.0.binary_search(&candidate) {
            self.0.remove(pos);
        }
    }

    pub fn is_subset(&self, other: &Committee) -> bool {
        self.0.iter().all(|c| other.contains(*c))
    }

    /// `|ballot ∩ self|` for a sorted ballot.
    pub fn count_in(&self, ballot: &[usize]) -> usize {
        let (mut i, mut j, mut count) = (0, 0, 0);
        while i < ballot.len() && j < self.0.len() {
            match ballot[i].cmp(&self.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    count += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        count
    }

    pub fn mask(&self) -> Option<u64> {
        if self.0.last().is_some_and(|&c| c >= 64) {
            return None;
        }
        Some(self.0.iter().fold(0u64, |acc, &c| acc | (1u64 << c)))
    }

    /// Comma-separated 1-based literal, e.g. `1,2,4,5`.
    pub fn to_literal(&self) -> String {
        let labels: Vec<String> = self.0.iter().map(|c| (c + 1).to_string()).collect();
        labels.join(",")
    }
}

impl fmt::Display for Committee {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_literal())
    }
}

impl fmt::Debug for Committee {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.to_literal())
    }
}

impl FromStr for Committee {
    type Err = ParseError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s == "-" {
            return Ok(Committee::empty());
        }
        let mut members = Vec::new();
        for token in s.split(',') {
            let c: usize = token
                .trim()
                .parse()
                .map_err(|_| ParseError::Committee(s.to_string()))?;
            if c == 0 {
                return Err(ParseError::Committee(s.to_string()));
            }
            members.push(c - 1);
        }
        let committee = Committee::new(members.iter().copied());
        if committee.len() != members.len() {
            return Err(ParseError::Committee(s.to_string()));
        }
        Ok(committee)
    }
}

impl Serialize for Committee {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(&self.to_literal())
    }
}

/// Per-voter utilities `|A_i ∩ W|`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize)]
pub struct WelfareVector(pub Vec<usize>);

impl WelfareVector {
    pub fn utilities(&self) -> &[usize] {
        &self.0
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    /// Sorted copy, used when comparing vectors up to voter permutation.
    pub fn sorted(&self) -> Vec<usize> {
        let mut v = self.0.clone();
        v.sort_unstable();
        v
    }

    /// Entrywise `>=` with at least one strict entry.
    pub fn dominates(&self, other: &WelfareVector) -> bool {
        self.0.len() == other.0.len()
            && self.0.iter().zip(&other.0).all(|(a, b)| a >= b)
            && self.0.iter().zip(&other.0).any(|(a, b)| a > b)
    }
}

impl fmt::Display for WelfareVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|u| u.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn intro() -> ElectionInstance {
        ElectionInstance::parse(
            "15 6 12\n1 2 3 4\n1 2 3 5\n1 2 3 6\n7 8 9\n10 11 12\n13 14 15\n",
        )
        .unwrap()
    }

    #[test]
    fn parses_small_instance() {
        let inst = ElectionInstance::parse("3 2 2\n1 2\n3\n").unwrap();
        assert_eq!(inst.num_candidates(), 3);
        assert_eq!(inst.num_voters(), 2);
        assert_eq!(inst.committee_size(), 2);
        assert_eq!(inst.ballot(0), &[0, 1]);
        assert_eq!(inst.ballot(1), &[2]);
    }

    #[test]
    fn rejects_oversized_committee() {
        let err = ElectionInstance::parse("2 1 3\n1\n").unwrap_err();
        assert!(matches!(err, ParseError::CommitteeTooLarge { line: 1, k: 3, m: 2 }));
    }

    #[test]
    fn parse_errors_name_lines() {
        let err = ElectionInstance::parse("# header next\n3 2 2\n1 1\n2\n").unwrap_err();
        assert_eq!(err, ParseError::DuplicateCandidate { line: 3, candidate: 1 });
        let err = ElectionInstance::parse("3 2 2\n1 4\n2\n").unwrap_err();
        assert_eq!(err.line(), Some(2));
        let err = ElectionInstance::parse("3 x 2\n").unwrap_err();
        assert!(matches!(err, ParseError::Header { line: 1, .. }));
        let err = ElectionInstance::parse("3 3 2\n1\n2\n").unwrap_err();
        assert!(matches!(err, ParseError::MissingVoters { expected: 3, found: 2, .. }));
        let err = ElectionInstance::parse("3 1 2\n1\n2\n").unwrap_err();
        assert_eq!(err, ParseError::TrailingContent { line: 3 });
    }

    #[test]
    fn empty_lines_are_empty_ballots() {
        let inst = ElectionInstance::parse("2 3 1\n\n1  \n\n").unwrap();
        assert_eq!(inst.ballots(), &[vec![], vec![0], vec![]]);
        assert_eq!(inst.to_text(), "2 3 1\n\n1\n\n");
    }

    #[test]
    fn intro_welfare_vectors() {
        let inst = intro();
        let a = Committee::from_labels([1, 2, 3, 4, 5, 6, 7, 8, 10, 11, 13, 14]);
        let b = Committee::from_labels([1, 2, 3, 7, 8, 9, 10, 11, 12, 13, 14, 15]);
        assert_eq!(inst.welfare_vector(&a).unwrap().0, vec![4, 4, 4, 2, 2, 2]);
        assert_eq!(inst.welfare_vector(&b).unwrap().0, vec![3, 3, 3, 3, 3, 3]);
        assert_eq!(inst.welfare_vector(&a).unwrap().total(), 18);
        assert_eq!(inst.welfare_vector(&Committee::empty()).unwrap().0, vec![0; 6]);
        assert!(inst.welfare_vector(&Committee::from_labels([16])).is_err());
    }

    #[test]
    fn restriction() {
        let inst = intro();
        let all: Vec<usize> = (0..6).collect();
        assert_eq!(inst.restrict(&all, 12).unwrap(), inst);
        let firsts = inst.restrict(&[0, 1, 2], 6).unwrap();
        assert_eq!(firsts.num_voters(), 3);
        assert_eq!(firsts.committee_size(), 6);
        assert_eq!(firsts.num_candidates(), 15);
        let v4 = inst.restrict(&[3], 2).unwrap();
        assert_eq!(v4.ballots(), &[vec![6, 7, 8]]);
        assert_eq!(inst.restrict(&[], 1), Err(Error::EmptyVoterSet));
    }

    #[test]
    fn approver_sets() {
        let inst = intro();
        assert_eq!(inst.approvers(0).unwrap(), &[0, 1, 2]);
        assert_eq!(inst.approvers(3).unwrap(), &[0]);
        assert!(inst.approvers(15).is_err());
        let lonely = ElectionInstance::parse("2 1 1\n1\n").unwrap();
        assert!(lonely.approvers(1).unwrap().is_empty());
    }

    #[test]
    fn committee_literals() {
        let w: Committee = "1,2,4,5".parse().unwrap();
        assert_eq!(w.members(), &[0, 1, 3, 4]);
        assert_eq!(w.to_literal(), "1,2,4,5");
        assert_eq!("".parse::<Committee>().unwrap(), Committee::empty());
        assert!("1,1".parse::<Committee>().is_err());
        assert!("0,2".parse::<Committee>().is_err());
        assert!("a".parse::<Committee>().is_err());
    }
}
