//! Exact Gaussian elimination over ℚ with right-hand sides in any ℚ-module.

use num_traits::{One, Zero};

use crate::error::{HodgeError, Result};
use crate::jetring::{DiffPoly, ParamPoly};
use crate::rational::{fmt_q, Q};

/// A right-hand side type: a vector space over ℚ.
pub trait Module: Clone {
    fn is_zero_elem(&self) -> bool;
    fn zero_like(&self) -> Self;
    /// self += k * other
    fn axpy(&mut self, other: &Self, k: &Q);
    fn scaled(&self, k: &Q) -> Self;
    fn describe(&self) -> String;
}

impl Module for Q {
    fn is_zero_elem(&self) -> bool {
        self.is_zero()
    }
    fn zero_like(&self) -> Self {
        Q::zero()
    }
    fn axpy(&mut self, other: &Self, k: &Q) {
        *self += other * k;
    }
    fn scaled(&self, k: &Q) -> Self {
        self * k
    }
    fn describe(&self) -> String {
        fmt_q(self)
    }
}

impl Module for ParamPoly {
    fn is_zero_elem(&self) -> bool {
        self.is_zero()
    }
    fn zero_like(&self) -> Self {
        ParamPoly::zero()
    }
    fn axpy(&mut self, other: &Self, k: &Q) {
        *self = self.add(&other.scale(k));
    }
    fn scaled(&self, k: &Q) -> Self {
        self.scale(k)
    }
    fn describe(&self) -> String {
        self.to_string()
    }
}

impl Module for DiffPoly {
    fn is_zero_elem(&self) -> bool {
        self.is_zero()
    }
    fn zero_like(&self) -> Self {
        DiffPoly::zero_in(self.context())
    }
    fn axpy(&mut self, other: &Self, k: &Q) {
        self.add_scaled(other, k);
    }
    fn scaled(&self, k: &Q) -> Self {
        self.scale(k)
    }
    fn describe(&self) -> String {
        self.canonical_text()
    }
}

#[derive(Clone, Debug)]
pub enum Outcome<R> {
    Unique(Vec<R>),
    /// Consistent but not unique: one particular solution (free variables set to zero) and a
    /// basis of the null space.
    Underdetermined { particular: Vec<R>, null_space: Vec<Vec<Q>> },
    /// Row `row` of the original system reduces to `0 = residual`.
    Inconsistent { row: usize, residual: R },
}

#[derive(Clone, Debug)]
pub struct SolveReport<R> {
    pub nrows: usize,
    pub ncols: usize,
    pub rank: usize,
    pub outcome: Outcome<R>,
}

impl<R: Module> SolveReport<R> {
    /// The unique solution, or a diagnostic error.
    pub fn unique(self, context: &str) -> Result<Vec<R>> {
        match self.outcome {
            Outcome::Unique(x) => Ok(x),
            Outcome::Underdetermined { .. } => {
                Err(HodgeError::RankDeficient { rank: self.rank, unknowns: self.ncols, context: context.to_string() })
            }
            Outcome::Inconsistent { row, residual } => Err(HodgeError::Inconsistent(format!(
                "{context}: equation {row} leaves residual {}",
                residual.describe()
            ))),
        }
    }

    pub fn is_consistent(&self) -> bool {
        !matches!(self.outcome, Outcome::Inconsistent { .. })
    }
}

/// Solve `a x = b` exactly. `zero` supplies the zero element used for unknowns without data.
pub fn solve<R: Module>(a: &[Vec<Q>], b: &[R], zero: &R) -> SolveReport<R> {
    let nrows = a.len();
    assert_eq!(nrows, b.len(), "row count mismatch");
    let ncols = a.first().map_or(0, |r| r.len());
    let mut m: Vec<Vec<Q>> = a.to_vec();
    let mut rhs: Vec<R> = b.to_vec();
    let mut origin: Vec<usize> = (0..nrows).collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == nrows {
            break;
        }
        let Some(p) = (r..nrows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        rhs.swap(r, p);
        origin.swap(r, p);
        let inv = Q::one() / &m[r][c];
        if !inv.is_one() {
            for x in m[r].iter_mut().skip(c) {
                *x *= &inv;
            }
            rhs[r] = rhs[r].scaled(&inv);
        }
        let pivot_row = m[r].clone();
        let pivot_rhs = rhs[r].clone();
        for i in 0..nrows {
            if i == r || m[i][c].is_zero() {
                continue;
            }
            let f = -m[i][c].clone();
            for (x, y) in m[i].iter_mut().zip(pivot_row.iter()).skip(c) {
                if !y.is_zero() {
                    *x += y * &f;
                }
            }
            rhs[i].axpy(&pivot_rhs, &f);
        }
        pivots.push(c);
        r += 1;
    }
    let rank = r;
    for i in rank..nrows {
        if !rhs[i].is_zero_elem() {
            return SolveReport {
                nrows,
                ncols,
                rank,
                outcome: Outcome::Inconsistent { row: origin[i], residual: rhs[i].clone() },
            };
        }
    }
    let mut x: Vec<R> = vec![zero.clone(); ncols];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = rhs[i].clone();
    }
    if rank == ncols {
        return SolveReport { nrows, ncols, rank, outcome: Outcome::Unique(x) };
    }
    let null_space = null_space_from_rref(&m[..rank], &pivots, ncols);
    SolveReport { nrows, ncols, rank, outcome: Outcome::Underdetermined { particular: x, null_space } }
}

fn null_space_from_rref(rref: &[Vec<Q>], pivots: &[usize], ncols: usize) -> Vec<Vec<Q>> {
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); ncols];
            v[f] = Q::one();
            for (i, &p) in pivots.iter().enumerate() {
                v[p] = -rref[i][f].clone();
            }
            v
        })
        .collect()
}

/// Basis of {x : a x = 0}.
pub fn null_space(a: &[Vec<Q>]) -> Vec<Vec<Q>> {
    let zeros = vec![Q::zero(); a.len()];
    match solve(a, &zeros, &Q::zero()).outcome {
        Outcome::Unique(_) => Vec::new(),
        Outcome::Underdetermined { null_space, .. } => null_space,
        Outcome::Inconsistent { .. } => unreachable!("homogeneous systems are consistent"),
    }
}

pub fn rank(a: &[Vec<Q>]) -> usize {
    let zeros = vec![Q::zero(); a.len()];
    solve(a, &zeros, &Q::zero()).rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn mat(rows: &[&[i64]]) -> Vec<Vec<Q>> {
        rows.iter().map(|r| r.iter().map(|&x| qi(x)).collect()).collect()
    }

    #[test]
    fn unique_overdetermined() {
        let a = mat(&[&[1, 1], &[1, -1], &[2, 0]]);
        let b = vec![qi(3), qi(1), qi(4)];
        let x = solve(&a, &b, &Q::zero()).unique("test").unwrap();
        assert_eq!(x, vec![qi(2), qi(1)]);
    }

    #[test]
    fn inconsistent_reports_row() {
        let a = mat(&[&[1, 1], &[1, -1], &[2, 0]]);
        let b = vec![qi(3), qi(1), qi(5)];
        let rep = solve(&a, &b, &Q::zero());
        assert!(!rep.is_consistent());
        assert!(matches!(rep.unique("t"), Err(HodgeError::Inconsistent(_))));
    }

    #[test]
    fn rank_deficient_null_space() {
        let a = mat(&[&[1, 2, 3], &[2, 4, 6]]);
        let ns = null_space(&a);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            for row in &a {
                let dot: Q = row.iter().zip(v).map(|(x, y)| x * y).sum();
                assert!(dot.is_zero());
            }
        }
        assert_eq!(rank(&a), 1);
        let rep = solve(&a, &[qi(1), qi(2)], &Q::zero());
        assert!(matches!(rep.unique("t"), Err(HodgeError::RankDeficient { rank: 1, unknowns: 3, .. })));
    }

    #[test]
    fn polynomial_right_hand_sides() {
        let a = mat(&[&[2, 0], &[0, 3], &[1, 1]]);
        let v2 = DiffPoly::jet(2);
        let v1 = DiffPoly::jet(1);
        let b = vec![v2.scale_int(2), v1.scale_int(3), &v2 + &v1];
        let x = solve(&a, &b, &DiffPoly::zero()).unique("t").unwrap();
        assert_eq!(x, vec![v2, v1.clone()]);
        let half = vec![vec![qi(2)]];
        let x = solve(&half, &[v1.clone()], &DiffPoly::zero()).unique("t").unwrap();
        assert_eq!(x[0], v1.scale(&q(1, 2)));
    }
}
