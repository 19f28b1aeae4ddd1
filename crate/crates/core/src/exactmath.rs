//! Exact rational linear programming.
//!
//! A dense two-phase simplex over [`Rational`] with Bland's pivoting rule.
//! Programs are small, so clarity wins over speed; zero entries are skipped
//! during elimination, which keeps the sparse priceability programs cheap.

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// Per-variable bounds; `None` means unbounded on that side.
#[derive(Clone, Debug, PartialEq)]
pub struct Bound {
    pub lower: Option<Rational>,
    pub upper: Option<Rational>,
}

impl Bound {
    pub fn nonnegative() -> Self {
        Bound {
            lower: Some(Rational::zero()),
            upper: None,
        }
    }

    pub fn free() -> Self {
        Bound {
            lower: None,
            upper: None,
        }
    }

    pub fn between(lower: Rational, upper: Rational) -> Self {
        Bound {
            lower: Some(lower),
            upper: Some(upper),
        }
    }

    fn admits(&self, x: &Rational) -> bool {
        self.lower.as_ref().is_none_or(|l| x >= l) && self.upper.as_ref().is_none_or(|u| x <= u)
    }
}

/// `maximize objective·x` subject to the constraints and bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    pub num_vars: usize,
    pub objective: Vec<Rational>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<Bound>,
}

impl LinearProgram {
    /// A program with `num_vars` nonnegative variables and a zero objective.
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            num_vars,
            objective: vec![Rational::zero(); num_vars],
            constraints: Vec::new(),
            bounds: vec![Bound::nonnegative(); num_vars],
        }
    }

    pub fn set_objective(&mut self, terms: &[(usize, Rational)]) {
        self.objective = vec![Rational::zero(); self.num_vars];
        for (j, c) in terms {
            self.objective[*j] += c;
        }
    }

    /// Adds a constraint given as sparse `(variable, coefficient)` terms.
    pub fn add_sparse(&mut self, terms: &[(usize, Rational)], relation: Relation, rhs: Rational) {
        let mut coeffs = vec![Rational::zero(); self.num_vars];
        for (j, c) in terms {
            coeffs[*j] += c;
        }
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn add_constraint(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    fn validate(&self) -> Result<()> {
        if self.objective.len() != self.num_vars {
            return Err(Error::DimensionMismatch(format!(
                "objective has {} coefficients for {} variables",
                self.objective.len(),
                self.num_vars
            )));
        }
        if self.bounds.len() != self.num_vars {
            return Err(Error::DimensionMismatch(format!(
                "{} bounds for {} variables",
                self.bounds.len(),
                self.num_vars
            )));
        }
        for (i, con) in self.constraints.iter().enumerate() {
            if con.coeffs.len() != self.num_vars {
                return Err(Error::DimensionMismatch(format!(
                    "constraint {} has {} coefficients for {} variables",
                    i,
                    con.coeffs.len(),
                    self.num_vars
                )));
            }
        }
        Ok(())
    }

    /// Exact feasibility check of an assignment, independent of the solver.
    pub fn is_feasible_point(&self, x: &[Rational]) -> bool {
        if x.len() != self.num_vars {
            return false;
        }
        if !self.bounds.iter().zip(x).all(|(b, v)| b.admits(v)) {
            return false;
        }
        self.constraints.iter().all(|con| {
            let lhs: Rational = con
                .coeffs
                .iter()
                .zip(x)
                .filter(|(a, _)| !a.is_zero())
                .map(|(a, v)| a * v)
                .sum();
            match con.relation {
                Relation::Le => lhs <= con.rhs,
                Relation::Eq => lhs == con.rhs,
                Relation::Ge => lhs >= con.rhs,
            }
        })
    }

    pub fn objective_value(&self, x: &[Rational]) -> Rational {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpOutcome {
    pub status: LpStatus,
    pub value: Option<Rational>,
    pub assignment: Option<Vec<Rational>>,
}

impl LpOutcome {
    fn without_point(status: LpStatus) -> Self {
        LpOutcome {
            status,
            value: None,
            assignment: None,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

/// Maximizes the objective exactly.
pub fn lp_maximize(lp: &LinearProgram) -> Result<LpOutcome> {
    lp.validate()?;
    let std = StandardForm::build(lp);
    let outcome = match std.solve() {
        Solved::Infeasible => LpOutcome::without_point(LpStatus::Infeasible),
        Solved::Unbounded => LpOutcome::without_point(LpStatus::Unbounded),
        Solved::Optimal(y) => {
            let x = std.recover(&y);
            assert!(
                lp.is_feasible_point(&x),
                "simplex returned a point violating the program"
            );
            LpOutcome {
                status: LpStatus::Optimal,
                value: Some(lp.objective_value(&x)),
                assignment: Some(x),
            }
        }
    };
    Ok(outcome)
}

/// Finds a feasible point (the objective is ignored).
pub fn lp_feasible(lp: &LinearProgram) -> Result<LpOutcome> {
    let mut zero = lp.clone();
    zero.objective = vec![Rational::zero(); lp.num_vars];
    lp_maximize(&zero)
}

/// How an original variable is expressed through nonnegative columns.
#[derive(Clone, Debug)]
enum VarMap {
    /// `x = offset + y`
    Shifted { col: usize, offset: Rational },
    /// `x = offset - y`
    Negated { col: usize, offset: Rational },
    /// `x = y⁺ - y⁻`
    Split { pos: usize, neg: usize },
}

struct Row {
    coeffs: Vec<(usize, Rational)>,
    relation: Relation,
    rhs: Rational,
}

struct StandardForm {
    cols: usize,
    maps: Vec<VarMap>,
    objective: Vec<Rational>,
    rows: Vec<Row>,
}

enum Solved {
    Optimal(Vec<Rational>),
    Infeasible,
    Unbounded,
}

impl StandardForm {
    fn build(lp: &LinearProgram) -> Self {
        let mut cols = 0;
        let mut maps = Vec::with_capacity(lp.num_vars);
        let mut extra_rows = Vec::new();
        for bound in &lp.bounds {
            let map = match (&bound.lower, &bound.upper) {
                (Some(l), upper) => {
                    let col = cols;
                    cols += 1;
                    if let Some(u) = upper {
                        extra_rows.push(Row {
                            coeffs: vec![(col, Rational::one())],
                            relation: Relation::Le,
                            rhs: u - l,
                        });
                    }
                    VarMap::Shifted {
                        col,
                        offset: l.clone(),
                    }
                }
                (None, Some(u)) => {
                    let col = cols;
                    cols += 1;
                    VarMap::Negated {
                        col,
                        offset: u.clone(),
                    }
                }
                (None, None) => {
                    cols += 2;
                    VarMap::Split {
                        pos: cols - 2,
                        neg: cols - 1,
                    }
                }
            };
            maps.push(map);
        }

        let mut objective = vec![Rational::zero(); cols];
        for (j, c) in lp.objective.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            match &maps[j] {
                VarMap::Shifted { col, .. } => objective[*col] += c,
                VarMap::Negated { col, .. } => objective[*col] -= c,
                VarMap::Split { pos, neg } => {
                    objective[*pos] += c;
                    objective[*neg] -= c;
                }
            }
        }

        let mut rows = Vec::with_capacity(lp.constraints.len() + extra_rows.len());
        for con in &lp.constraints {
            let mut coeffs = Vec::new();
            let mut rhs = con.rhs.clone();
            for (j, a) in con.coeffs.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                match &maps[j] {
                    VarMap::Shifted { col, offset } => {
                        rhs -= a * offset;
                        coeffs.push((*col, a.clone()));
                    }
                    VarMap::Negated { col, offset } => {
                        rhs -= a * offset;
                        coeffs.push((*col, -a));
                    }
                    VarMap::Split { pos, neg } => {
                        coeffs.push((*pos, a.clone()));
                        coeffs.push((*neg, -a));
                    }
                }
            }
            rows.push(Row {
                coeffs,
                relation: con.relation,
                rhs,
            });
        }
        rows.extend(extra_rows);
        StandardForm {
            cols,
            maps,
            objective,
            rows,
        }
    }

    fn recover(&self, y: &[Rational]) -> Vec<Rational> {
        self.maps
            .iter()
            .map(|m| match m {
                VarMap::Shifted { col, offset } => offset + &y[*col],
                VarMap::Negated { col, offset } => offset - &y[*col],
                VarMap::Split { pos, neg } => &y[*pos] - &y[*neg],
            })
            .collect()
    }

    fn solve(&self) -> Solved {
        let mut tableau = Tableau::new(self);
        if !tableau.phase_one() {
            return Solved::Infeasible;
        }
        if !tableau.phase_two(&self.objective) {
            return Solved::Unbounded;
        }
        Solved::Optimal(tableau.primal(self.cols))
    }
}

/// Simplex tableau; the last entry of every row is the right-hand side.
struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    /// First artificial column; columns at or past it are artificial.
    first_artificial: usize,
    width: usize,
}

impl Tableau {
    fn new(std: &StandardForm) -> Self {
        let m = std.rows.len();
        let slack_count = std
            .rows
            .iter()
            .filter(|r| r.relation != Relation::Eq)
            .count();
        let first_slack = std.cols;
        let first_artificial = first_slack + slack_count;

        // Orient rows so that right-hand sides are nonnegative.
        let mut oriented = Vec::with_capacity(m);
        for row in &std.rows {
            if row.rhs.is_negative() {
                let relation = match row.relation {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                let coeffs = row.coeffs.iter().map(|(j, a)| (*j, -a)).collect();
                oriented.push((coeffs, relation, -&row.rhs));
            } else {
                oriented.push((row.coeffs.clone(), row.relation, row.rhs.clone()));
            }
        }
        let artificial_count = oriented
            .iter()
            .filter(|(_, rel, _)| *rel != Relation::Le)
            .count();
        let width = first_artificial + artificial_count + 1;

        let mut rows = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut next_slack = first_slack;
        let mut next_artificial = first_artificial;
        for (coeffs, relation, rhs) in oriented {
            let mut row = vec![Rational::zero(); width];
            for (j, a) in coeffs {
                row[j] += a;
            }
            match relation {
                Relation::Le => {
                    row[next_slack] = Rational::one();
                    basis.push(next_slack);
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = Rational::from_int(-1);
                    next_slack += 1;
                    row[next_artificial] = Rational::one();
                    basis.push(next_artificial);
                    next_artificial += 1;
                }
                Relation::Eq => {
                    row[next_artificial] = Rational::one();
                    basis.push(next_artificial);
                    next_artificial += 1;
                }
            }
            row[width - 1] = rhs;
            rows.push(row);
        }
        Tableau {
            rows,
            basis,
            first_artificial,
            width,
        }
    }

    fn rhs(&self) -> usize {
        self.width - 1
    }

    fn pivot(&mut self, r: usize, col: usize, obj: &mut [Rational]) {
        let inv = self.rows[r][col].recip();
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v = &*v * &inv;
            }
        }
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let nz: Vec<usize> = (0..self.width).filter(|&j| !pivot_row[j].is_zero()).collect();
        let eliminate = |target: &mut [Rational]| {
            let factor = target[col].clone();
            if factor.is_zero() {
                return;
            }
            for &j in &nz {
                target[j] -= &factor * &pivot_row[j];
            }
        };
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                eliminate(row);
            }
        }
        eliminate(obj);
        self.rows[r] = pivot_row;
        self.basis[r] = col;
    }

    /// Runs simplex iterations with Bland's rule on columns `< limit`.
    /// Returns false when the objective is unbounded.
    fn iterate(&mut self, obj: &mut [Rational], limit: usize) -> bool {
        let rhs = self.rhs();
        loop {
            let Some(col) = (0..limit).find(|&j| obj[j].is_negative()) else {
                return true;
            };
            let mut best: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[col].is_positive() {
                    continue;
                }
                let ratio = &row[rhs] / &row[col];
                let better = match &best {
                    None => true,
                    Some((bi, br)) => ratio < *br || (ratio == *br && self.basis[i] < self.basis[*bi]),
                };
                if better {
                    best = Some((i, ratio));
                }
            }
            match best {
                None => return false,
                Some((r, _)) => self.pivot(r, col, obj),
            }
        }
    }

    /// Minimizes the sum of artificials; false when the program is infeasible.
    fn phase_one(&mut self) -> bool {
        let rhs = self.rhs();
        if self.first_artificial == rhs {
            return true;
        }
        let mut obj = vec![Rational::zero(); self.width];
        for j in self.first_artificial..rhs {
            obj[j] = Rational::one();
        }
        for (i, row) in self.rows.iter().enumerate() {
            if self.basis[i] >= self.first_artificial {
                for (o, v) in obj.iter_mut().zip(row) {
                    if !v.is_zero() {
                        *o -= v;
                    }
                }
            }
        }
        self.iterate(&mut obj, rhs);
        if !obj[rhs].is_zero() {
            return false;
        }
        // Drive remaining artificials out of the basis or drop redundant rows.
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] >= self.first_artificial {
                match (0..self.first_artificial).find(|&j| !self.rows[i][j].is_zero()) {
                    Some(col) => {
                        self.pivot(i, col, &mut obj);
                        i += 1;
                    }
                    None => {
                        self.rows.remove(i);
                        self.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
        true
    }

    fn phase_two(&mut self, objective: &[Rational]) -> bool {
        let mut obj = vec![Rational::zero(); self.width];
        for (j, c) in objective.iter().enumerate() {
            obj[j] = -c;
        }
        for (i, row) in self.rows.iter().enumerate() {
            let b = self.basis[i];
            if b < objective.len() && !objective[b].is_zero() {
                let c = objective[b].clone();
                for (o, v) in obj.iter_mut().zip(row) {
                    if !v.is_zero() {
                        *o += &c * v;
                    }
                }
            }
        }
        self.iterate(&mut obj, self.first_artificial)
    }

    fn primal(&self, cols: usize) -> Vec<Rational> {
        let rhs = self.rhs();
        let mut y = vec![Rational::zero(); cols];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < cols {
                y[b] = self.rows[i][rhs].clone();
            }
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn one() -> Rational {
        Rational::one()
    }

    #[test]
    fn single_variable_upper_bound() {
        let mut lp = LinearProgram::new(1);
        lp.set_objective(&[(0, one())]);
        lp.add_sparse(&[(0, one())], Relation::Le, r(3, 1));
        let out = lp_maximize(&lp).unwrap();
        assert_eq!(out.status, LpStatus::Optimal);
        assert_eq!(out.value, Some(r(3, 1)));
    }

    #[test]
    fn contradictory_sum_is_infeasible() {
        let mut lp = LinearProgram::new(2);
        lp.set_objective(&[(0, one()), (1, one())]);
        lp.add_sparse(&[(0, one()), (1, one())], Relation::Le, one());
        lp.add_sparse(&[(0, one()), (1, one())], Relation::Ge, r(2, 1));
        assert_eq!(lp_maximize(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn feasibility_cases() {
        let mut lp = LinearProgram::new(1);
        lp.bounds[0] = Bound::between(Rational::zero(), one());
        assert_eq!(lp_feasible(&lp).unwrap().status, LpStatus::Optimal);

        let mut lp = LinearProgram::new(1);
        lp.bounds[0] = Bound::free();
        lp.add_sparse(&[(0, one())], Relation::Ge, one());
        lp.add_sparse(&[(0, one())], Relation::Le, Rational::zero());
        assert_eq!(lp_feasible(&lp).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        let mut lp = LinearProgram::new(2);
        lp.set_objective(&[(0, one())]);
        lp.add_sparse(&[(0, one()), (1, r(-1, 1))], Relation::Le, one());
        assert_eq!(lp_maximize(&lp).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn free_and_shifted_variables() {
        // maximize -x - y with x free, x >= -5/2, y in [1, 4], x + y >= -1
        let mut lp = LinearProgram::new(2);
        lp.bounds[0] = Bound::free();
        lp.bounds[1] = Bound::between(one(), r(4, 1));
        lp.set_objective(&[(0, r(-1, 1)), (1, r(-1, 1))]);
        lp.add_sparse(&[(0, one())], Relation::Ge, r(-5, 2));
        lp.add_sparse(&[(0, one()), (1, one())], Relation::Ge, r(-1, 1));
        let out = lp_maximize(&lp).unwrap();
        assert_eq!(out.value, Some(r(1, 1)));
        let x = out.assignment.unwrap();
        assert_eq!(&x[0] + &x[1], r(-1, 1));

        // upper-bounded only: maximize x with x <= 7/3
        let mut lp = LinearProgram::new(1);
        lp.bounds[0] = Bound {
            lower: None,
            upper: Some(r(7, 3)),
        };
        lp.set_objective(&[(0, one())]);
        assert_eq!(lp_maximize(&lp).unwrap().value, Some(r(7, 3)));
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(2);
        lp.set_objective(&[(0, one())]);
        lp.add_sparse(&[(0, one()), (1, one())], Relation::Eq, one());
        lp.add_sparse(&[(0, r(2, 1)), (1, r(2, 1))], Relation::Eq, r(2, 1));
        let out = lp_maximize(&lp).unwrap();
        assert_eq!(out.value, Some(one()));
    }

    #[test]
    fn dimension_mismatch() {
        let mut lp = LinearProgram::new(2);
        lp.add_constraint(vec![one()], Relation::Le, one());
        assert!(matches!(lp_maximize(&lp), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn degenerate_cycling_example() {
        // Beale's example cycles under the textbook rule; Bland's rule terminates.
        let mut lp = LinearProgram::new(4);
        lp.set_objective(&[(0, r(3, 4)), (1, r(-150, 1)), (2, r(1, 50)), (3, r(-6, 1))]);
        lp.add_sparse(
            &[(0, r(1, 4)), (1, r(-60, 1)), (2, r(-1, 25)), (3, r(9, 1))],
            Relation::Le,
            Rational::zero(),
        );
        lp.add_sparse(
            &[(0, r(1, 2)), (1, r(-90, 1)), (2, r(-1, 50)), (3, r(3, 1))],
            Relation::Le,
            Rational::zero(),
        );
        lp.add_sparse(&[(2, one())], Relation::Le, one());
        let out = lp_maximize(&lp).unwrap();
        assert_eq!(out.value, Some(r(1, 20)));
    }
}
