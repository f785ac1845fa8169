//! Brute-force oracles shared by the integration tests. They use nalgebra
//! decompositions and direct formulas, not the crate's own solvers.
#![allow(dead_code)]

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use privfunnel_core::experiments::{generate_joint, instance_rng};
use privfunnel_core::{JointDistribution, Mechanism, ProbVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    instance_rng(seed, 0)
}

pub fn random_joint(rng: &mut ChaCha8Rng, s: usize, x: usize) -> JointDistribution {
    generate_joint(s, x, rng).expect("generator succeeds")
}

/// Point of the simplex with i.i.d. exponential weights raised to `sharpness`
/// so that some draws sit close to faces.
pub fn random_simplex(rng: &mut ChaCha8Rng, n: usize, sharpness: f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..n)
        .map(|_| (-rng.random::<f64>().max(1e-300).ln()).powf(sharpness))
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / total).collect()
}

pub fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Vertices of `{w in simplex : sum_x P_{S|X}(s|x)/P_S(s) w_x <= beta}`.
/// Every choice of `|X| - 1` inequalities is made tight together with the
/// normalization; nonsingular, feasible solutions are kept.
pub fn vertex_oracle(joint: &JointDistribution, beta: f64) -> Vec<Vec<f64>> {
    let n = joint.x_size();
    let m = joint.s_size();
    // inequality rows a w <= b
    let mut rows: Vec<(Vec<f64>, f64)> = (0..n)
        .map(|i| {
            let mut a = vec![0.0; n];
            a[i] = -1.0;
            (a, 0.0)
        })
        .collect();
    for s in 0..m {
        let a = (0..n)
            .map(|x| joint.prob(s, x) / (joint.p_x()[x] * joint.p_s()[s]))
            .collect();
        rows.push((a, beta));
    }

    let mut out: Vec<Vec<f64>> = Vec::new();
    for active in (0..rows.len()).combinations(n - 1) {
        let mut a = DMatrix::<f64>::zeros(n, n);
        let mut b = DVector::<f64>::zeros(n);
        for (r, &k) in active.iter().enumerate() {
            for c in 0..n {
                a[(r, c)] = rows[k].0[c];
            }
            b[r] = rows[k].1;
        }
        for c in 0..n {
            a[(n - 1, c)] = 1.0;
        }
        b[n - 1] = 1.0;
        let svd = a.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if smin <= 1e-12 * smax {
            continue;
        }
        let Some(w) = a.lu().solve(&b) else { continue };
        let w: Vec<f64> = w.iter().copied().collect();
        let feasible = rows
            .iter()
            .all(|(r, rhs)| r.iter().zip(&w).map(|(p, q)| p * q).sum::<f64>() <= rhs + 1e-9);
        if feasible && out.iter().all(|v| linf(v, &w) > 1e-7) {
            out.push(w);
        }
    }
    out
}

/// Minimum of `sum_i q_i cost_i` over basic feasible solutions of
/// `sum_i q_i c_i = target, q >= 0`: every linearly independent subset of at
/// most `|X|` candidates is tried.
pub fn lp_oracle(candidates: &[Vec<f64>], costs: &[f64], target: &[f64]) -> Option<f64> {
    let n = target.len();
    let t = DVector::from_column_slice(target);
    let mut best: Option<f64> = None;
    for k in 1..=n.min(candidates.len()) {
        for subset in (0..candidates.len()).combinations(k) {
            let a = DMatrix::from_fn(n, k, |r, c| candidates[subset[c]][r]);
            let svd = a.clone().svd(true, true);
            if svd.rank(1e-10) < k {
                continue;
            }
            let Ok(q) = svd.solve(&t, 1e-12) else {
                continue;
            };
            if (&a * &q - &t).amax() > 1e-10 || q.iter().any(|&v| v < -1e-12) {
                continue;
            }
            let obj: f64 = subset
                .iter()
                .zip(q.iter())
                .map(|(&i, v)| v * costs[i])
                .sum();
            best = Some(best.map_or(obj, |b: f64| b.min(obj)));
        }
    }
    best
}

pub fn entropy(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&v| v > 0.0)
        .map(|v| v * v.ln())
        .sum::<f64>()
}

/// `P_{S|Y}` for a column `P_{X|Y=y}` computed from the joint directly.
pub fn posterior(joint: &JointDistribution, w: &[f64]) -> Vec<f64> {
    (0..joint.s_size())
        .map(|s| {
            (0..joint.x_size())
                .map(|x| joint.prob(s, x) / joint.p_x()[x] * w[x])
                .sum()
        })
        .collect()
}

/// Per-column `(max lift, KL(posterior || P_S), l1 distance, chi-square)`.
pub fn column_measures(joint: &JointDistribution, w: &[f64]) -> (f64, f64, f64, f64) {
    let post = posterior(joint, w);
    let p_s = joint.p_s();
    let mut max_lift = f64::NEG_INFINITY;
    let (mut kl, mut l1, mut chi2) = (0.0, 0.0, 0.0);
    for (q, p) in post.iter().zip(p_s.iter()) {
        max_lift = max_lift.max(q / p);
        if *q > 0.0 {
            kl += q * (q / p).ln();
        }
        l1 += (q - p).abs();
        chi2 += (q - p) * (q - p) / p;
    }
    (max_lift, kl, l1, chi2)
}

/// `P_SY` of a mechanism.
pub fn joint_sy(joint: &JointDistribution, mech: &Mechanism) -> Vec<Vec<f64>> {
    mech.p_y()
        .iter()
        .zip(mech.columns())
        .map(|(py, c)| posterior(joint, c).into_iter().map(|v| v * py).collect())
        .collect()
}

/// `(I(S;Y), T(S;Y), chi^2(S;Y))` from the joint `P_SY`.
pub fn average_leakage(joint: &JointDistribution, mech: &Mechanism) -> (f64, f64, f64) {
    let p_sy = joint_sy(joint, mech);
    let (mut mi, mut tv, mut chi2) = (0.0, 0.0, 0.0);
    for (py, col) in mech.p_y().iter().zip(&p_sy) {
        for (pj, ps) in col.iter().zip(joint.p_s().iter()) {
            let prod = ps * py;
            if *pj > 0.0 {
                mi += pj * (pj / prod).ln();
            }
            tv += 0.5 * (pj - prod).abs();
            chi2 += (pj - prod) * (pj - prod) / prod;
        }
    }
    (mi, tv, chi2)
}

/// `I(X;Y)` from `P_XY`.
pub fn utility(joint: &JointDistribution, mech: &Mechanism) -> f64 {
    let mut mi = 0.0;
    for (py, col) in mech.p_y().iter().zip(mech.columns()) {
        for (w, px) in col.iter().zip(joint.p_x().iter()) {
            if *w > 0.0 {
                mi += py * w * (w / px).ln();
            }
        }
    }
    mi
}

/// Mechanism induced by a random channel `P_{Y|X}` with `n_y` outputs.
pub fn random_mechanism(rng: &mut ChaCha8Rng, joint: &JointDistribution, n_y: usize) -> Mechanism {
    let p_x = joint.p_x();
    let channel: Vec<Vec<f64>> = (0..joint.x_size())
        .map(|_| random_simplex(rng, n_y, 1.5))
        .collect();
    let p_y: Vec<f64> = (0..n_y)
        .map(|y| (0..joint.x_size()).map(|x| p_x[x] * channel[x][y]).sum())
        .collect();
    let columns = (0..n_y)
        .map(|y| {
            let col = (0..joint.x_size())
                .map(|x| p_x[x] * channel[x][y] / p_y[y])
                .collect();
            ProbVector::new(col).unwrap()
        })
        .collect();
    Mechanism::new(ProbVector::new(p_y).unwrap(), columns).unwrap()
}
