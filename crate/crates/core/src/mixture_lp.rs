//! Entropy-minimizing decomposition of `P_X` over candidate columns.
//!
//! Given candidate columns `W^1..W^M` the LP
//!
//! ```text
//! minimize   sum_i q_i h(W^i)
//! subject to sum_i q_i W^i = P_X,  q >= 0
//! ```
//!
//! is solved with a dense two-phase simplex using Bland's rule. The
//! constraint `sum_i q_i = 1` is implied by the mixture rows since every
//! candidate and `P_X` sum to one, so it is not added. Any rows that turn out
//! to be linearly dependent are dropped at the end of phase one. The returned
//! solution is basic, so at most `|X|` weights are positive.

use crate::error::{Error, Result};
use crate::linalg::solve_square;
use crate::measures::{entropy, linf_distance, ProbVector};

/// L-inf distance under which two candidates are considered the same column.
pub const DUPLICATE_TOLERANCE: f64 = 1e-9;
/// Weights at or below this are dropped when reading off the mechanism.
pub const WEIGHT_THRESHOLD: f64 = 1e-10;

const PIVOT_EPS: f64 = 1e-11;
const PHASE_ONE_TOLERANCE: f64 = 1e-9;
const MAX_PIVOTS: usize = 1_000_000;

/// A privacy mechanism as a decomposition of `P_X`: output weights `P_Y` and
/// one column `P_{X|Y}(.|y)` per output symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct Mechanism {
    p_y: ProbVector,
    columns: Vec<ProbVector>,
}

impl Mechanism {
    pub fn new(p_y: ProbVector, columns: Vec<ProbVector>) -> Result<Self> {
        if p_y.len() != columns.len() {
            return Err(Error::DimensionMismatch {
                expected: p_y.len(),
                found: columns.len(),
            });
        }
        let n_x = columns[0].len();
        if let Some(c) = columns.iter().find(|c| c.len() != n_x) {
            return Err(Error::DimensionMismatch {
                expected: n_x,
                found: c.len(),
            });
        }
        if let Some(&v) = p_y.iter().find(|&&v| v <= 0.0) {
            return Err(Error::OutOfRange {
                name: "P_Y(y)",
                value: v,
                range: "(0, 1]",
            });
        }
        Ok(Self { p_y, columns })
    }

    pub fn p_y(&self) -> &ProbVector {
        &self.p_y
    }

    pub fn columns(&self) -> &[ProbVector] {
        &self.columns
    }

    pub fn output_size(&self) -> usize {
        self.columns.len()
    }

    /// `sum_y P_Y(y) P_{X|Y}(.|y)`.
    pub fn mixture(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.columns[0].len()];
        for (py, c) in self.p_y.iter().zip(&self.columns) {
            for (o, w) in out.iter_mut().zip(c.iter()) {
                *o += py * w;
            }
        }
        out
    }
}

/// The mixture LP: deduplicated candidates, their entropies and the target.
#[derive(Clone, Debug, PartialEq)]
pub struct MixtureLp {
    candidates: Vec<ProbVector>,
    costs: Vec<f64>,
    target: ProbVector,
}

impl MixtureLp {
    /// Candidates closer than [`DUPLICATE_TOLERANCE`] to an earlier one are
    /// dropped.
    pub fn new(candidates: Vec<ProbVector>, target: ProbVector) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::Infeasible {
                residual: f64::INFINITY,
            });
        }
        let mut kept: Vec<ProbVector> = Vec::with_capacity(candidates.len());
        for c in candidates {
            if c.len() != target.len() {
                return Err(Error::DimensionMismatch {
                    expected: target.len(),
                    found: c.len(),
                });
            }
            if kept
                .iter()
                .all(|k| linf_distance(k, &c) > DUPLICATE_TOLERANCE)
            {
                kept.push(c);
            }
        }
        let costs = kept.iter().map(|c| entropy(c)).collect();
        Ok(Self {
            candidates: kept,
            costs,
            target,
        })
    }

    pub fn candidates(&self) -> &[ProbVector] {
        &self.candidates
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn target(&self) -> &ProbVector {
        &self.target
    }

    pub fn objective(&self, q: &[f64]) -> f64 {
        q.iter().zip(&self.costs).map(|(a, b)| a * b).sum()
    }
}

/// Dense simplex tableau over `rows` equality constraints. Columns
/// `0..n_real` are the candidate weights and the remaining ones are
/// artificial; the last entry of each row is the right-hand side.
struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    /// Original constraint index of each remaining row.
    origin: Vec<usize>,
    n_real: usize,
}

impl Tableau {
    fn rhs(&self, r: usize) -> f64 {
        *self.rows[r].last().unwrap()
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        self.rows[r].iter_mut().for_each(|v| *v /= p);
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                let f = row[c];
                if f != 0.0 {
                    for (v, pv) in row.iter_mut().zip(&pivot_row) {
                        *v -= f * pv;
                    }
                }
            }
        }
        self.basis[r] = c;
    }

    /// Runs Bland's rule for the given column costs. Only columns below
    /// `limit` may enter.
    fn optimize(&mut self, costs: &[f64], limit: usize) {
        for _ in 0..MAX_PIVOTS {
            let entering = (0..limit).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let reduced = costs[j]
                    - self
                        .rows
                        .iter()
                        .zip(&self.basis)
                        .map(|(row, &b)| costs[b] * row[j])
                        .sum::<f64>();
                reduced < -PIVOT_EPS
            });
            let Some(c) = entering else { return };

            let mut leaving: Option<(usize, f64)> = None;
            for r in 0..self.rows.len() {
                let a = self.rows[r][c];
                if a > PIVOT_EPS {
                    let ratio = self.rhs(r) / a;
                    leaving = match leaving {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - PIVOT_EPS
                                || (ratio <= lratio + PIVOT_EPS && self.basis[r] < self.basis[lr])
                            {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            // The feasible region is bounded, so an improving column always
            // has a positive entry.
            let Some((r, _)) = leaving else { return };
            self.pivot(r, c);
        }
    }
}

/// Solves the mixture LP and returns one weight per candidate of `lp`.
pub fn solve_mixture(lp: &MixtureLp) -> Result<Vec<f64>> {
    let m = lp.candidates.len();
    let n = lp.target.len();

    let mut rows = Vec::with_capacity(n);
    for x in 0..n {
        let mut row = vec![0.0; m + n + 1];
        for (i, c) in lp.candidates.iter().enumerate() {
            row[i] = c[x];
        }
        row[m + x] = 1.0;
        row[m + n] = lp.target[x];
        rows.push(row);
    }
    let mut t = Tableau {
        rows,
        basis: (m..m + n).collect(),
        origin: (0..n).collect(),
        n_real: m,
    };

    let mut phase_one_costs = vec![0.0; m + n];
    phase_one_costs[m..].iter_mut().for_each(|c| *c = 1.0);
    t.optimize(&phase_one_costs, m + n);
    let residual: f64 = (0..t.rows.len())
        .filter(|&r| t.basis[r] >= m)
        .map(|r| t.rhs(r).abs())
        .sum();
    if residual > PHASE_ONE_TOLERANCE {
        return Err(Error::Infeasible { residual });
    }

    // Pivot remaining artificials out, dropping rows that are combinations of
    // the others.
    let mut r = 0;
    while r < t.rows.len() {
        if t.basis[r] >= m {
            let col = (0..m).find(|&j| t.rows[r][j].abs() > PHASE_ONE_TOLERANCE);
            match col {
                Some(j) => t.pivot(r, j),
                None => {
                    t.rows.remove(r);
                    t.basis.remove(r);
                    t.origin.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }

    let mut phase_two_costs = lp.costs.clone();
    phase_two_costs.extend(std::iter::repeat_n(0.0, n));
    t.optimize(&phase_two_costs, t.n_real);

    let mut q = vec![0.0; m];
    for (r, &b) in t.basis.iter().enumerate() {
        q[b] = t.rhs(r).max(0.0);
    }
    refine(lp, &t, &mut q);
    Ok(q)
}

/// Re-solves the basic weights against the original constraint rows to clear
/// the error accumulated by tableau pivots.
fn refine(lp: &MixtureLp, t: &Tableau, q: &mut [f64]) {
    let system = t
        .origin
        .iter()
        .map(|&x| {
            let row = t.basis.iter().map(|&b| lp.candidates[b][x]).collect();
            (row, lp.target[x])
        })
        .collect();
    if let Some(sol) = solve_square(system) {
        if sol.iter().all(|&v| v >= -1e-12) {
            for (&b, v) in t.basis.iter().zip(sol) {
                q[b] = v.max(0.0);
            }
        }
    }
}

/// Reads off a mechanism from the positive weights of an LP solution.
pub fn extract_mechanism(q: &[f64], lp: &MixtureLp) -> Result<Mechanism> {
    if q.len() != lp.candidates.len() {
        return Err(Error::DimensionMismatch {
            expected: lp.candidates.len(),
            found: q.len(),
        });
    }
    let (weights, columns): (Vec<f64>, Vec<ProbVector>) = q
        .iter()
        .zip(&lp.candidates)
        .filter(|(&w, _)| w > WEIGHT_THRESHOLD)
        .map(|(&w, c)| (w, c.clone()))
        .unzip();
    if weights.is_empty() {
        return Err(Error::Infeasible { residual: 1.0 });
    }
    Mechanism::new(ProbVector::from_computed(weights), columns)
}
