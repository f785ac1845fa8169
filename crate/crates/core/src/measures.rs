//! Discrete probability kernels and lift-based leakage measures.
//!
//! Everything is in nats. For an output symbol `y` whose column over `X` is
//! `w = P_{X|Y}(.|y)`, the posterior on `S` is `P_{S|X} w` and the lift of
//! `s` is `P_{S|Y}(s|y) / P_S(s)`. The semi-pointwise measures below are all
//! functions of that posterior, and averaging them under `P_Y` gives the
//! matching average measures (mutual information, total variation and the
//! average chi-square divergence).

use std::ops::Deref;

use crate::error::{Error, Result};
use crate::mixture_lp::Mechanism;

/// Slack accepted on the total mass of user-supplied distributions.
pub const INPUT_TOLERANCE: f64 = 1e-6;
/// Slack on the total mass of distributions built internally.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;
/// L-inf tolerance for "these two distributions are equal".
pub const DISTRIBUTION_TOLERANCE: f64 = 1e-8;

/// A probability vector over a finite alphabet.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    /// Validates `entries` (nonnegative, total mass within [`INPUT_TOLERANCE`]
    /// of one) and rescales them to sum to one.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        for (i, &v) in entries.iter().enumerate() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::NegativeEntry {
                    row: 0,
                    col: i,
                    value: v,
                });
            }
        }
        let sum: f64 = entries.iter().sum();
        if entries.is_empty() || (sum - 1.0).abs() > INPUT_TOLERANCE {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self(entries.into_iter().map(|v| v / sum).collect()))
    }

    /// Wraps entries produced by internal arithmetic. Tiny negative values
    /// left by floating-point solves are clipped to zero and the result is
    /// rescaled.
    pub(crate) fn from_computed(mut entries: Vec<f64>) -> Self {
        for v in entries.iter_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let sum: f64 = entries.iter().sum();
        debug_assert!((sum - 1.0).abs() < 1e-6, "computed vector sums to {sum}");
        if sum > 0.0 && sum != 1.0 {
            for v in entries.iter_mut() {
                *v /= sum;
            }
        }
        Self(entries)
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn point_mass(n: usize, index: usize) -> Self {
        let mut v = vec![0.0; n];
        v[index] = 1.0;
        Self(v)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        entropy(&self.0)
    }
}

impl Deref for ProbVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl AsRef<[f64]> for ProbVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// `-sum p ln p` with `0 ln 0 = 0`.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| v * v.ln())
        .sum::<f64>()
}

/// L-inf distance between two equally sized vectors.
pub fn linf_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Joint distribution `P_SX` of the sensitive variable `S` (rows) and the
/// useful data `X` (columns), with cached marginals and the channel
/// `P_{S|X}`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    n_s: usize,
    n_x: usize,
    matrix: Vec<f64>,
    channel: Vec<f64>,
    p_s: ProbVector,
    p_x: ProbVector,
}

/// Validates a `|S| x |X|` matrix (given as rows) as a joint distribution.
pub fn validate_joint(rows: &[Vec<f64>]) -> Result<JointDistribution> {
    JointDistribution::from_rows(rows)
}

impl JointDistribution {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_s = rows.len();
        if n_s < 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: n_s,
            });
        }
        let n_x = rows[0].len();
        if n_x < 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: n_x,
            });
        }
        let mut matrix = Vec::with_capacity(n_s * n_x);
        for (s, row) in rows.iter().enumerate() {
            if row.len() != n_x {
                return Err(Error::DimensionMismatch {
                    expected: n_x,
                    found: row.len(),
                });
            }
            for (x, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::NegativeEntry {
                        row: s,
                        col: x,
                        value: v,
                    });
                }
                matrix.push(v);
            }
        }
        let total: f64 = matrix.iter().sum();
        if (total - 1.0).abs() > INPUT_TOLERANCE {
            return Err(Error::NotNormalized { sum: total });
        }
        for v in matrix.iter_mut() {
            *v /= total;
        }

        let mut p_s = vec![0.0; n_s];
        let mut p_x = vec![0.0; n_x];
        for s in 0..n_s {
            for x in 0..n_x {
                let v = matrix[s * n_x + x];
                p_s[s] += v;
                p_x[x] += v;
            }
        }
        if let Some(index) = p_s.iter().position(|&v| v <= 0.0) {
            return Err(Error::ZeroMarginal {
                which: "P_S",
                index,
            });
        }
        if let Some(index) = p_x.iter().position(|&v| v <= 0.0) {
            return Err(Error::ZeroMarginal {
                which: "P_X",
                index,
            });
        }

        let mut channel = vec![0.0; n_s * n_x];
        for x in 0..n_x {
            let col_sum: f64 = (0..n_s).map(|s| matrix[s * n_x + x]).sum();
            for s in 0..n_s {
                channel[s * n_x + x] = matrix[s * n_x + x] / col_sum;
            }
        }

        Ok(Self {
            n_s,
            n_x,
            matrix,
            channel,
            p_s: ProbVector::from_computed(p_s),
            p_x: ProbVector::from_computed(p_x),
        })
    }

    /// Builds `P_SX(s, x) = P_{S|X}(s|x) P_X(x)` from a channel given as rows
    /// over `S` and the marginal `P_X`.
    pub fn from_channel(channel_rows: &[Vec<f64>], p_x: &[f64]) -> Result<Self> {
        let rows: Vec<Vec<f64>> = channel_rows
            .iter()
            .map(|row| {
                if row.len() != p_x.len() {
                    return Err(Error::DimensionMismatch {
                        expected: p_x.len(),
                        found: row.len(),
                    });
                }
                Ok(row.iter().zip(p_x).map(|(c, p)| c * p).collect())
            })
            .collect::<Result<_>>()?;
        Self::from_rows(&rows)
    }

    pub fn s_size(&self) -> usize {
        self.n_s
    }

    pub fn x_size(&self) -> usize {
        self.n_x
    }

    pub fn p_s(&self) -> &ProbVector {
        &self.p_s
    }

    pub fn p_x(&self) -> &ProbVector {
        &self.p_x
    }

    pub fn prob(&self, s: usize, x: usize) -> f64 {
        self.matrix[s * self.n_x + x]
    }

    /// `P_{S|X}(s|x)`.
    pub fn channel(&self, s: usize, x: usize) -> f64 {
        self.channel[s * self.n_x + x]
    }

    /// `P_{S|X}(s|x) / P_S(s)`: the lift of `s` when `Y` reveals `X = x`.
    pub fn lift_entry(&self, s: usize, x: usize) -> f64 {
        self.channel(s, x) / self.p_s[s]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.matrix.chunks(self.n_x).map(<[f64]>::to_vec).collect()
    }

    /// `H(X)` in nats.
    pub fn entropy_x(&self) -> f64 {
        self.p_x.entropy()
    }

    /// `I(S;X)` by the direct double sum.
    pub fn mutual_information(&self) -> f64 {
        let mut total = 0.0;
        for s in 0..self.n_s {
            for x in 0..self.n_x {
                let p = self.prob(s, x);
                if p > 0.0 {
                    total += p * (p / (self.p_s[s] * self.p_x[x])).ln();
                }
            }
        }
        total
    }

    /// `P_{S|Y=y} = P_{S|X} w` for a column `w` over `X`.
    pub fn posterior(&self, w: &[f64]) -> Result<Vec<f64>> {
        if w.len() != self.n_x {
            return Err(Error::DimensionMismatch {
                expected: self.n_x,
                found: w.len(),
            });
        }
        Ok((0..self.n_s)
            .map(|s| {
                self.channel[s * self.n_x..(s + 1) * self.n_x]
                    .iter()
                    .zip(w)
                    .map(|(c, w)| c * w)
                    .sum()
            })
            .collect())
    }
}

/// Leakage statistics of a single output symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorStats {
    pub posterior: ProbVector,
    pub lifts: Vec<f64>,
    pub max_lift: f64,
    /// `sum_s P_{S|Y}(s|y) ln l(s,y)`, the per-symbol contribution to `I(S;Y)`.
    pub semi_mi: f64,
    pub ell1: f64,
    pub chi2: f64,
}

/// Posterior, lifts and the three semi-pointwise measures of column `w`.
pub fn posterior_stats(joint: &JointDistribution, w: &[f64]) -> Result<PosteriorStats> {
    let posterior = joint.posterior(w)?;
    let p_s = joint.p_s();
    let lifts: Vec<f64> = posterior
        .iter()
        .zip(p_s.iter())
        .map(|(q, p)| q / p)
        .collect();
    let max_lift = lifts.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut semi_mi = 0.0;
    let mut ell1 = 0.0;
    let mut chi2 = 0.0;
    for ((&q, &p), &l) in posterior.iter().zip(p_s.iter()).zip(&lifts) {
        let d = q - p;
        ell1 += d.abs();
        chi2 += d * d / p;
        // p * (l ln l - l + 1) is termwise nonnegative and sums to the KL
        // divergence because both distributions have unit mass.
        let dl = l - 1.0;
        semi_mi += p * ((1.0 + dl) * dl.ln_1p() - dl);
    }

    Ok(PosteriorStats {
        posterior: ProbVector::from_computed(posterior),
        lifts,
        max_lift,
        semi_mi: semi_mi.max(0.0),
        ell1,
        chi2,
    })
}

/// Average and worst-case leakage of a mechanism.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Leakage {
    /// `I(S;Y)`.
    pub mi_sy: f64,
    /// Total variation `T(S;Y)`.
    pub tv: f64,
    /// `chi^2(S;Y)`.
    pub avg_chi2: f64,
    pub max_lift: f64,
    pub max_semi_mi: f64,
    pub max_ell1: f64,
    pub max_chi2: f64,
}

pub fn mechanism_leakage(joint: &JointDistribution, mech: &Mechanism) -> Result<Leakage> {
    let mut out = Leakage {
        mi_sy: 0.0,
        tv: 0.0,
        avg_chi2: 0.0,
        max_lift: f64::NEG_INFINITY,
        max_semi_mi: 0.0,
        max_ell1: 0.0,
        max_chi2: 0.0,
    };
    for (&py, column) in mech.p_y().iter().zip(mech.columns()) {
        let st = posterior_stats(joint, column)?;
        out.mi_sy += py * st.semi_mi;
        out.tv += 0.5 * py * st.ell1;
        out.avg_chi2 += py * st.chi2;
        out.max_lift = out.max_lift.max(st.max_lift);
        out.max_semi_mi = out.max_semi_mi.max(st.semi_mi);
        out.max_ell1 = out.max_ell1.max(st.ell1);
        out.max_chi2 = out.max_chi2.max(st.chi2);
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Utility {
    /// `I(X;Y)` in nats.
    pub mi_xy: f64,
    /// `I(X;Y) / H(X)`.
    pub normalized: f64,
}

/// `I(X;Y) = H(X) - sum_y P_Y(y) h(P_{X|Y=y})`.
pub fn mechanism_utility(joint: &JointDistribution, mech: &Mechanism) -> Result<Utility> {
    let n_x = joint.x_size();
    if let Some(c) = mech.columns().iter().find(|c| c.len() != n_x) {
        return Err(Error::DimensionMismatch {
            expected: n_x,
            found: c.len(),
        });
    }
    let deviation = linf_distance(&mech.mixture(), joint.p_x());
    if deviation > INPUT_TOLERANCE {
        return Err(Error::MixtureMismatch { deviation });
    }
    let h_x = joint.entropy_x();
    let conditional: f64 = mech
        .p_y()
        .iter()
        .zip(mech.columns())
        .map(|(py, c)| py * c.entropy())
        .sum();
    let mi_xy = (h_x - conditional).max(0.0);
    Ok(Utility {
        mi_xy,
        normalized: (mi_xy / h_x).clamp(0.0, 1.0),
    })
}
