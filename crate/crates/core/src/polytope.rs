//! The max-lift polytope and exact vertex enumeration.
//!
//! For a lift bound `beta`, the polytope holds every column `w` over `X`
//! with `sum_x w_x = 1`, `w_x >= 0` and
//! `sum_x (P_{S|X}(s|x) / P_S(s)) w_x <= beta` for every `s`. Its vertices
//! are found by brute force over active sets: every choice of `|X| - 1`
//! inequalities is made tight, the square system is solved together with the
//! simplex equality, and nonsingular feasible solutions are kept.

use itertools::Itertools;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::solve_square;
use crate::measures::{linf_distance, JointDistribution, ProbVector};

pub const FEASIBILITY_SLACK: f64 = 1e-9;
pub const DEDUP_TOLERANCE: f64 = 1e-7;
pub use crate::linalg::PIVOT_THRESHOLD;

/// An inequality of the max-lift system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Constraint {
    /// `w_x >= 0`.
    NonNegative(usize),
    /// Lift row `s` at the bound.
    Lift(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaxLiftPolytope {
    lift_rows: Vec<Vec<f64>>,
    bound: f64,
}

pub fn build_polytope(joint: &JointDistribution, bound: f64) -> Result<MaxLiftPolytope> {
    MaxLiftPolytope::new(joint, bound)
}

impl MaxLiftPolytope {
    pub fn new(joint: &JointDistribution, bound: f64) -> Result<Self> {
        if !(bound > 1.0) || !bound.is_finite() {
            return Err(Error::InvalidBound(bound));
        }
        let lift_rows = (0..joint.s_size())
            .map(|s| {
                (0..joint.x_size())
                    .map(|x| joint.lift_entry(s, x))
                    .collect()
            })
            .collect();
        Ok(Self { lift_rows, bound })
    }

    pub fn dimension(&self) -> usize {
        self.lift_rows[0].len()
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn lift_rows(&self) -> &[Vec<f64>] {
        &self.lift_rows
    }

    /// Number of inequalities (`|X|` nonnegativity plus `|S|` lift rows).
    pub fn constraint_count(&self) -> usize {
        self.dimension() + self.lift_rows.len()
    }

    fn constraint(&self, index: usize) -> Constraint {
        let n = self.dimension();
        if index < n {
            Constraint::NonNegative(index)
        } else {
            Constraint::Lift(index - n)
        }
    }

    /// Coefficients and right-hand side of a constraint as an equality.
    fn row(&self, c: Constraint) -> (Vec<f64>, f64) {
        match c {
            Constraint::NonNegative(x) => {
                let mut r = vec![0.0; self.dimension()];
                r[x] = 1.0;
                (r, 0.0)
            }
            Constraint::Lift(s) => (self.lift_rows[s].clone(), self.bound),
        }
    }

    /// Lift of every `s` for the column `w`.
    pub fn lifts(&self, w: &[f64]) -> Vec<f64> {
        self.lift_rows
            .iter()
            .map(|r| r.iter().zip(w).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn contains(&self, w: &[f64]) -> Result<bool> {
        if w.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                found: w.len(),
            });
        }
        Ok(w.iter().all(|&v| v >= -FEASIBILITY_SLACK)
            && self
                .lifts(w)
                .iter()
                .all(|&l| l <= self.bound + FEASIBILITY_SLACK))
    }

    /// Constraints tight at `w` within [`FEASIBILITY_SLACK`].
    pub fn tight_constraints(&self, w: &[f64]) -> Vec<Constraint> {
        let mut out: Vec<Constraint> = w
            .iter()
            .enumerate()
            .filter(|(_, v)| v.abs() <= FEASIBILITY_SLACK)
            .map(|(x, _)| Constraint::NonNegative(x))
            .collect();
        out.extend(
            self.lifts(w)
                .iter()
                .enumerate()
                .filter(|(_, l)| (*l - self.bound).abs() <= FEASIBILITY_SLACK)
                .map(|(s, _)| Constraint::Lift(s)),
        );
        out
    }

    fn solve_active_set(&self, active: &[usize]) -> Option<Vec<f64>> {
        let n = self.dimension();
        let mut rows = Vec::with_capacity(n);
        rows.push((vec![1.0; n], 1.0));
        rows.extend(active.iter().map(|&i| self.row(self.constraint(i))));
        let w = solve_square(rows)?;
        if self.contains(&w).unwrap_or(false) {
            Some(w)
        } else {
            None
        }
    }
}

pub fn contains(poly: &MaxLiftPolytope, w: &[f64]) -> Result<bool> {
    poly.contains(w)
}

/// Vertices of a max-lift polytope, sorted lexicographically.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexSet {
    vertices: Vec<ProbVector>,
    active_sets: Vec<Vec<Constraint>>,
}

impl VertexSet {
    pub fn vertices(&self) -> &[ProbVector] {
        &self.vertices
    }

    /// Tight constraints of each vertex, in the same order as [`Self::vertices`].
    pub fn active_sets(&self) -> &[Vec<Constraint>] {
        &self.active_sets
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ProbVector> {
        self.vertices.iter()
    }

    pub fn into_vertices(self) -> Vec<ProbVector> {
        self.vertices
    }
}

pub fn enumerate_vertices(poly: &MaxLiftPolytope) -> Result<VertexSet> {
    let n = poly.dimension();
    let subsets: Vec<Vec<usize>> = (0..poly.constraint_count()).combinations(n - 1).collect();
    let mut found: Vec<Vec<f64>> = subsets
        .par_iter()
        .filter_map(|active| poly.solve_active_set(active))
        .collect();

    found.sort_by(|a, b| lex_cmp(a, b));
    let mut vertices: Vec<ProbVector> = Vec::new();
    for w in found {
        if vertices
            .iter()
            .all(|v| linf_distance(v, &w) > DEDUP_TOLERANCE)
        {
            vertices.push(ProbVector::from_computed(w));
        }
    }
    if vertices.is_empty() {
        return Err(Error::EmptyVertexSet {
            bound: poly.bound(),
        });
    }
    let active_sets = vertices.iter().map(|v| poly.tight_constraints(v)).collect();
    Ok(VertexSet {
        vertices,
        active_sets,
    })
}

pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}
