//! Mechanism construction: the optimal max-lift mechanism and the
//! candidate-ladder heuristic for semi-pointwise budgets.
//!
//! The max-lift mechanism decomposes `P_X` over the vertices of the max-lift
//! polytope at a bound `beta(eps)` that guarantees the measure budget.
//! The heuristic seeds each budget level with those columns, carries forward
//! the previous level's solution, and adds vertices of looser max-lift
//! polytopes whose measure falls in the band `[(1 - delta) b, b]` just under
//! the budget `b`. These are the near-extreme points of the relaxed feasible
//! set that the max-lift polytope alone cannot reach.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measures::{
    mechanism_leakage, mechanism_utility, posterior_stats, JointDistribution, Leakage,
    PosteriorStats, ProbVector,
};
use crate::mixture_lp::{extract_mechanism, solve_mixture, Mechanism, MixtureLp};
use crate::polytope::{build_polytope, enumerate_vertices, lex_cmp, VertexSet};

/// Slack allowed on budget checks of emitted mechanisms.
pub const BUDGET_SLACK: f64 = 1e-8;

/// Which semi-pointwise measure the budget applies to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MeasureKind {
    /// `sum_s P_{S|Y} ln l(s,y)`, budget `eps`.
    SemiMi,
    /// `l1(y)`, budget `eps`.
    EllOne,
    /// `chi^2(y)`, budget `eps^2`.
    ChiSq,
}

impl MeasureKind {
    pub const ALL: [MeasureKind; 3] =
        [MeasureKind::SemiMi, MeasureKind::EllOne, MeasureKind::ChiSq];

    pub fn name(self) -> &'static str {
        match self {
            MeasureKind::SemiMi => "semi_mi",
            MeasureKind::EllOne => "ell1",
            MeasureKind::ChiSq => "chi2",
        }
    }

    /// Largest lift bound `beta` such that every column with max-lift at most
    /// `beta` meets the budget for `eps`.
    ///
    /// With lifts in `[0, beta]` averaging to one under `P_S`, the tight
    /// worst cases are `L(y) <= ln beta`, `l1(y) <= 2 (beta - 1) / beta` and
    /// `chi^2(y) <= beta - 1`. For `EllOne` with `eps >= 2` every column
    /// qualifies and the bound is infinite.
    pub fn lift_bound(self, eps: f64) -> f64 {
        match self {
            MeasureKind::SemiMi => eps.exp(),
            MeasureKind::EllOne if eps < 2.0 => 2.0 / (2.0 - eps),
            MeasureKind::EllOne => f64::INFINITY,
            MeasureKind::ChiSq => 1.0 + eps * eps,
        }
    }

    pub fn budget(self, eps: f64) -> f64 {
        match self {
            MeasureKind::SemiMi | MeasureKind::EllOne => eps,
            MeasureKind::ChiSq => eps * eps,
        }
    }

    pub fn measure(self, stats: &PosteriorStats) -> f64 {
        match self {
            MeasureKind::SemiMi => stats.semi_mi,
            MeasureKind::EllOne => stats.ell1,
            MeasureKind::ChiSq => stats.chi2,
        }
    }

    /// Worst case over output symbols.
    pub fn max_measure(self, leakage: &Leakage) -> f64 {
        match self {
            MeasureKind::SemiMi => leakage.max_semi_mi,
            MeasureKind::EllOne => leakage.max_ell1,
            MeasureKind::ChiSq => leakage.max_chi2,
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "semi_mi" | "semimi" | "mi" | "l" => Ok(MeasureKind::SemiMi),
            "ell1" | "ellone" | "l1" => Ok(MeasureKind::EllOne),
            "chi2" | "chisq" => Ok(MeasureKind::ChiSq),
            other => Err(Error::Config(format!("unknown measure kind `{other}`"))),
        }
    }
}

/// Budget ladder of the heuristic.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    /// Strictly increasing positive budgets.
    pub epsilons: Vec<f64>,
    /// Number of ladder points between each budget and the next one.
    pub refinement_counts: Vec<usize>,
    /// Relative width of the acceptance band under each budget.
    pub delta: f64,
    /// Upper end of the last ladder segment.
    pub epsilon_end: f64,
}

impl SweepConfig {
    pub fn new(
        epsilons: Vec<f64>,
        refinement_counts: Vec<usize>,
        delta: f64,
        epsilon_end: f64,
    ) -> Result<Self> {
        let cfg = Self {
            epsilons,
            refinement_counts,
            delta,
            epsilon_end,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `inner` ladder points for every segment except the last, which gets
    /// `last`.
    pub fn uniform(
        epsilons: Vec<f64>,
        inner: usize,
        last: usize,
        delta: f64,
        epsilon_end: f64,
    ) -> Result<Self> {
        let mut counts = vec![inner; epsilons.len()];
        if let Some(c) = counts.last_mut() {
            *c = last;
        }
        Self::new(epsilons, counts, delta, epsilon_end)
    }

    pub fn validate(&self) -> Result<()> {
        if self.epsilons.is_empty() {
            return Err(Error::Config("epsilon list is empty".into()));
        }
        if self.epsilons[0] <= 0.0 || !self.epsilons.iter().all(|e| e.is_finite()) {
            return Err(Error::Config("epsilons must be positive and finite".into()));
        }
        if self.epsilons.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("epsilons must be strictly increasing".into()));
        }
        if self.refinement_counts.len() != self.epsilons.len() {
            return Err(Error::Config(format!(
                "{} refinement counts for {} epsilons",
                self.refinement_counts.len(),
                self.epsilons.len()
            )));
        }
        if self.refinement_counts.contains(&0) {
            return Err(Error::Config("refinement counts must be at least 1".into()));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!(
                "delta {} is outside (0, 1)",
                self.delta
            )));
        }
        let last = *self.epsilons.last().unwrap();
        if !(self.epsilon_end > last) || !self.epsilon_end.is_finite() {
            return Err(Error::Config(format!(
                "epsilon_end {} must exceed the last epsilon {last}",
                self.epsilon_end
            )));
        }
        Ok(())
    }

    fn upper(&self, k: usize) -> f64 {
        self.epsilons
            .get(k + 1)
            .copied()
            .unwrap_or(self.epsilon_end)
    }

    /// Ladder points `eps_k + j (eps_{k+1} - eps_k) / n_k` for `j < n_k`.
    pub fn ladder(&self, k: usize) -> Vec<f64> {
        let lo = self.epsilons[k];
        let n = self.refinement_counts[k];
        let step = (self.upper(k) - lo) / n as f64;
        (0..n).map(|j| lo + j as f64 * step).collect()
    }
}

/// `start, start + step, ...` up to and including `stop`, computed by
/// multiplication so long grids do not drift.
pub fn epsilon_grid(start: f64, step: f64, stop: f64) -> Vec<f64> {
    if !(step > 0.0) || stop < start {
        return Vec::new();
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=count).map(|i| start + i as f64 * step).collect()
}

/// One budget level of a sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub epsilon: f64,
    pub mechanism: Mechanism,
    /// `I(X;Y)` in nats.
    pub utility: f64,
    pub normalized_utility: f64,
    /// `I(S;Y)` in nats.
    pub leakage_mi: f64,
    pub max_lift: f64,
    /// Worst-case value of the budgeted measure over output symbols.
    pub max_measure: f64,
    /// Number of distinct columns given to the LP.
    pub candidate_count: usize,
    pub leakage: Leakage,
}

impl SweepPoint {
    fn evaluate(
        joint: &JointDistribution,
        kind: MeasureKind,
        epsilon: f64,
        mechanism: Mechanism,
        candidate_count: usize,
    ) -> Result<Self> {
        let utility = mechanism_utility(joint, &mechanism)?;
        let leakage = mechanism_leakage(joint, &mechanism)?;
        Ok(Self {
            epsilon,
            utility: utility.mi_xy,
            normalized_utility: utility.normalized,
            leakage_mi: leakage.mi_sy,
            max_lift: leakage.max_lift,
            max_measure: kind.max_measure(&leakage),
            candidate_count,
            leakage,
            mechanism,
        })
    }

    /// Checks the emitted mechanism against the budget of `kind`.
    pub fn check_budget(&self, kind: MeasureKind) -> Result<()> {
        let budget = kind.budget(self.epsilon);
        if self.max_measure > budget + BUDGET_SLACK {
            return Err(Error::BudgetViolation {
                epsilon: self.epsilon,
                detail: format!("max {} = {:e} exceeds {:e}", kind, self.max_measure, budget),
            });
        }
        if kind == MeasureKind::SemiMi && self.leakage_mi > self.epsilon + BUDGET_SLACK {
            return Err(Error::BudgetViolation {
                epsilon: self.epsilon,
                detail: format!("I(S;Y) = {:e}", self.leakage_mi),
            });
        }
        Ok(())
    }
}

fn lift_bound_for(joint: &JointDistribution, kind: MeasureKind, eps: f64) -> Result<f64> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::OutOfRange {
            name: "epsilon",
            value: eps,
            range: "(0, inf)",
        });
    }
    let beta = kind.lift_bound(eps);
    if beta.is_finite() {
        return Ok(beta);
    }
    // any bound above the largest lift entry leaves the whole simplex
    let max_entry = (0..joint.s_size())
        .flat_map(|s| (0..joint.x_size()).map(move |x| (s, x)))
        .map(|(s, x)| joint.lift_entry(s, x))
        .fold(1.0, f64::max);
    Ok(max_entry + 1.0)
}

fn decompose(
    joint: &JointDistribution,
    kind: MeasureKind,
    epsilon: f64,
    candidates: Vec<ProbVector>,
) -> Result<SweepPoint> {
    let lp = MixtureLp::new(candidates, joint.p_x().clone())?;
    let q = solve_mixture(&lp)?;
    let mechanism = extract_mechanism(&q, &lp)?;
    SweepPoint::evaluate(joint, kind, epsilon, mechanism, lp.candidates().len())
}

/// Utility-optimal mechanism under the max-lift bound `kind.lift_bound(eps)`.
pub fn optimal_maxlift_mechanism(
    joint: &JointDistribution,
    epsilon: f64,
    kind: MeasureKind,
) -> Result<SweepPoint> {
    let beta = lift_bound_for(joint, kind, epsilon)?;
    let vertices = enumerate_vertices(&build_polytope(joint, beta)?)?;
    decompose(joint, kind, epsilon, vertices.into_vertices())
}

/// Vertex sets of the max-lift polytopes at every point of `grid`.
pub fn harvest_candidates(
    joint: &JointDistribution,
    grid: &[f64],
    kind: MeasureKind,
) -> Result<Vec<(f64, VertexSet)>> {
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(
            "harvest grid must be strictly increasing".into(),
        ));
    }
    grid.par_iter()
        .map(|&eps| {
            let beta = lift_bound_for(joint, kind, eps)?;
            Ok((eps, enumerate_vertices(&build_polytope(joint, beta)?)?))
        })
        .collect()
}

/// A candidate column together with its leakage statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct ColumnCandidate {
    pub column: ProbVector,
    pub stats: PosteriorStats,
    /// Value of the budgeted measure.
    pub measure: f64,
}

impl ColumnCandidate {
    pub fn new(joint: &JointDistribution, kind: MeasureKind, column: ProbVector) -> Result<Self> {
        let stats = posterior_stats(joint, &column)?;
        Ok(Self {
            measure: kind.measure(&stats),
            column,
            stats,
        })
    }
}

fn band(kind: MeasureKind, epsilon: f64, delta: f64) -> (f64, f64) {
    let budget = kind.budget(epsilon);
    ((1.0 - delta) * budget, budget)
}

/// Keeps the candidates whose measure lies in `[(1 - delta) b, b]` for the
/// budget `b` of `epsilon`.
pub fn filter_band(
    candidates: &[ProbVector],
    joint: &JointDistribution,
    kind: MeasureKind,
    epsilon: f64,
    delta: f64,
) -> Result<Vec<ColumnCandidate>> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::OutOfRange {
            name: "delta",
            value: delta,
            range: "(0, 1)",
        });
    }
    let (lo, hi) = band(kind, epsilon, delta);
    let mut out = Vec::new();
    for c in candidates {
        let cand = ColumnCandidate::new(joint, kind, c.clone())?;
        if cand.measure >= lo && cand.measure <= hi {
            out.push(cand);
        }
    }
    Ok(out)
}

/// Runs the heuristic over `cfg.epsilons`, computing the max-lift baselines
/// first.
pub fn algorithm1(
    joint: &JointDistribution,
    kind: MeasureKind,
    cfg: &SweepConfig,
) -> Result<Vec<SweepPoint>> {
    cfg.validate()?;
    let baselines: Vec<SweepPoint> = cfg
        .epsilons
        .par_iter()
        .map(|&eps| optimal_maxlift_mechanism(joint, eps, kind))
        .collect::<Result<_>>()?;
    algorithm1_with_baselines(joint, kind, cfg, &baselines)
}

/// Runs the heuristic with precomputed max-lift mechanisms, one per budget.
pub fn algorithm1_with_baselines(
    joint: &JointDistribution,
    kind: MeasureKind,
    cfg: &SweepConfig,
    baselines: &[SweepPoint],
) -> Result<Vec<SweepPoint>> {
    cfg.validate()?;
    if baselines.len() != cfg.epsilons.len() {
        return Err(Error::DimensionMismatch {
            expected: cfg.epsilons.len(),
            found: baselines.len(),
        });
    }

    let ladders: Vec<Vec<f64>> = (0..cfg.epsilons.len()).map(|k| cfg.ladder(k)).collect();
    let grid: Vec<f64> = ladders.iter().flatten().copied().collect();
    let harvested = harvest_candidates(joint, &grid, kind)?;

    // Measure values do not depend on the budget level, so score every
    // harvested vertex once per ladder segment.
    let mut segments: Vec<Vec<ColumnCandidate>> = Vec::with_capacity(ladders.len());
    let mut offset = 0;
    for ladder in &ladders {
        let seg = harvested[offset..offset + ladder.len()]
            .par_iter()
            .flat_map_iter(|(_, vs)| vs.iter().cloned())
            .map(|w| ColumnCandidate::new(joint, kind, w))
            .collect::<Result<Vec<_>>>()?;
        segments.push(seg);
        offset += ladder.len();
    }

    let mut carried: Vec<ProbVector> = Vec::new();
    let mut points = Vec::with_capacity(cfg.epsilons.len());
    for (i, &eps) in cfg.epsilons.iter().enumerate() {
        let (lo, hi) = band(kind, eps, cfg.delta);
        let mut candidates: Vec<ProbVector> = baselines[i].mechanism.columns().to_vec();
        candidates.append(&mut carried);
        for seg in &segments[i..] {
            candidates.extend(
                seg.iter()
                    .filter(|c| c.measure >= lo && c.measure <= hi)
                    .map(|c| c.column.clone()),
            );
        }
        candidates.sort_by(|a, b| lex_cmp(a, b));

        let point = decompose(joint, kind, eps, candidates)?;
        carried = point.mechanism.columns().to_vec();
        points.push(point);
    }
    Ok(points)
}

/// Coefficient of the closed-form chi-square columns for the two-symbol
/// fixture below.
pub const EXAMPLE1_COEFFICIENT: f64 = 3.2048;
/// Largest budget for which the closed form is used.
pub const EXAMPLE1_MAX_EPSILON: f64 = 0.07;

/// The two-symbol fixture: `P_{S|X} = [[0.25, 0.4], [0.75, 0.6]]`,
/// `P_X = [0.25, 0.75]`.
pub fn example1_joint() -> JointDistribution {
    JointDistribution::from_channel(&[vec![0.25, 0.4], vec![0.75, 0.6]], &[0.25, 0.75])
        .expect("fixture is a valid joint distribution")
}

/// Closed-form chi-square mechanism for [`example1_joint`]: columns
/// `[0.25 -+ c eps, 0.75 +- c eps]` with equal output weights.
pub fn example1_theoretical(epsilon: f64) -> Result<Mechanism> {
    if !(epsilon > 0.0 && epsilon <= EXAMPLE1_MAX_EPSILON) {
        return Err(Error::OutOfRange {
            name: "epsilon",
            value: epsilon,
            range: "(0, 0.07]",
        });
    }
    let d = EXAMPLE1_COEFFICIENT * epsilon;
    Mechanism::new(
        ProbVector::uniform(2),
        vec![
            ProbVector::new(vec![0.25 - d, 0.75 + d])?,
            ProbVector::new(vec![0.25 + d, 0.75 - d])?,
        ],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{linf_distance, validate_joint};

    fn small_joint() -> JointDistribution {
        validate_joint(&[
            vec![0.12, 0.08, 0.10],
            vec![0.05, 0.20, 0.05],
            vec![0.13, 0.02, 0.25],
        ])
        .unwrap()
    }

    #[test]
    fn lift_bounds_exceed_one_and_budgets_increase() {
        for kind in MeasureKind::ALL {
            let mut prev = 0.0;
            for k in 1..200 {
                let eps = k as f64 * 0.01;
                assert!(kind.lift_bound(eps) > 1.0);
                assert!(kind.budget(eps) > prev);
                prev = kind.budget(eps);
            }
        }
        assert!(MeasureKind::EllOne.lift_bound(2.5).is_infinite());
    }

    #[test]
    fn kind_names_round_trip() {
        for kind in MeasureKind::ALL {
            assert_eq!(kind.name().parse::<MeasureKind>().unwrap(), kind);
        }
        assert!("nope".parse::<MeasureKind>().is_err());
    }

    #[test]
    fn config_validation() {
        assert!(SweepConfig::uniform(vec![0.1, 0.2], 5, 10, 0.05, 1.0).is_ok());
        assert!(SweepConfig::uniform(vec![0.2, 0.1], 5, 10, 0.05, 1.0).is_err());
        assert!(SweepConfig::uniform(vec![0.0, 0.1], 5, 10, 0.05, 1.0).is_err());
        assert!(SweepConfig::uniform(vec![0.1], 0, 0, 0.05, 1.0).is_err());
        assert!(SweepConfig::uniform(vec![0.1], 5, 5, 1.0, 1.0).is_err());
        assert!(SweepConfig::uniform(vec![0.1], 5, 5, 0.05, 0.1).is_err());
        assert!(SweepConfig::new(vec![0.1, 0.2], vec![1], 0.05, 1.0).is_err());
    }

    #[test]
    fn ladder_points() {
        let cfg = SweepConfig::uniform(vec![0.1, 0.2], 4, 2, 0.05, 1.0).unwrap();
        let l0 = cfg.ladder(0);
        let l1 = cfg.ladder(1);
        let expect0 = [0.1, 0.125, 0.15, 0.175];
        for (a, b) in l0.iter().zip(expect0) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(l1.len(), 2);
        assert!((l1[1] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn grid_helper() {
        let g = epsilon_grid(0.005, 0.015, 0.17);
        assert_eq!(g.len(), 12);
        assert!((g[11] - 0.17).abs() < 1e-12);
        assert_eq!(epsilon_grid(0.005, 0.005, 0.07).len(), 14);
    }

    #[test]
    fn loose_budget_gives_identity() {
        let j = small_joint();
        for kind in MeasureKind::ALL {
            let p = optimal_maxlift_mechanism(&j, 5.0, kind).unwrap();
            assert!((p.normalized_utility - 1.0).abs() < 1e-12, "{kind}");
            assert_eq!(p.mechanism.output_size(), 3);
        }
    }

    #[test]
    fn independence_gives_zero_leakage() {
        let j = validate_joint(&[vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap();
        for kind in MeasureKind::ALL {
            let p = optimal_maxlift_mechanism(&j, 0.01, kind).unwrap();
            assert!((p.normalized_utility - 1.0).abs() < 1e-12);
            assert!(p.leakage_mi < 1e-15);
        }
    }

    #[test]
    fn maxlift_mechanism_meets_budget() {
        let j = small_joint();
        for kind in MeasureKind::ALL {
            for eps in [0.01, 0.05, 0.2] {
                let p = optimal_maxlift_mechanism(&j, eps, kind).unwrap();
                p.check_budget(kind).unwrap();
                assert!(p.max_lift <= kind.lift_bound(eps) + 1e-9);
                assert!(linf_distance(&p.mechanism.mixture(), j.p_x()) < 1e-8);
            }
        }
    }

    #[test]
    fn harvested_vertices_respect_lift_bound() {
        let j = example1_joint();
        let grid: Vec<f64> = (1..=8).map(|k| k as f64 * 0.01).collect();
        for (eps, vs) in harvest_candidates(&j, &grid, MeasureKind::ChiSq).unwrap() {
            for v in vs.iter() {
                let st = posterior_stats(&j, v).unwrap();
                assert!(st.max_lift <= 1.0 + eps + 1e-9);
                assert!(st.max_lift <= MeasureKind::ChiSq.lift_bound(eps) + 1e-9);
            }
        }
    }

    #[test]
    fn harvested_sets_nest() {
        let j = small_joint();
        let sets = harvest_candidates(&j, &[0.1, 0.2], MeasureKind::SemiMi).unwrap();
        let looser = build_polytope(&j, MeasureKind::SemiMi.lift_bound(0.2)).unwrap();
        for v in sets[0].1.iter() {
            assert!(looser.contains(v).unwrap());
        }
    }

    #[test]
    fn band_edges() {
        let j = example1_joint();
        let w = ProbVector::new(vec![0.2, 0.8]).unwrap();
        let m = posterior_stats(&j, &w).unwrap().semi_mi;
        // budget equal to the measure: upper edge is inclusive, P_X (measure 0) drops out
        let kept = filter_band(
            &[w.clone(), j.p_x().clone()],
            &j,
            MeasureKind::SemiMi,
            m,
            0.05,
        )
        .unwrap();
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].column, w);
        assert!(
            filter_band(std::slice::from_ref(&w), &j, MeasureKind::SemiMi, m * 0.999, 0.05)
                .unwrap()
                .is_empty()
        );
        assert!(
            filter_band(std::slice::from_ref(&w), &j, MeasureKind::SemiMi, m / 0.94, 0.05)
                .unwrap()
                .is_empty()
        );
        assert!(filter_band(&[w], &j, MeasureKind::SemiMi, m, 1.5).is_err());
    }

    #[test]
    fn band_for_example1() {
        let j = example1_joint();
        let eps_i = 0.05;
        let grid = epsilon_grid(0.05, 0.0005, 0.4);
        let mut all = Vec::new();
        for (_, vs) in harvest_candidates(&j, &grid, MeasureKind::ChiSq).unwrap() {
            all.extend(vs.into_vertices());
        }
        let kept = filter_band(&all, &j, MeasureKind::ChiSq, eps_i, 0.05).unwrap();
        assert!(!kept.is_empty());
        for c in &kept {
            let chi2 = posterior_stats(&j, &c.column).unwrap().chi2;
            assert!((0.95 * 0.0025..=0.0025).contains(&chi2));
        }
    }

    #[test]
    fn algorithm1_single_loose_budget() {
        let j = small_joint();
        let cfg = SweepConfig::uniform(vec![5.0], 1, 3, 0.05, 6.0).unwrap();
        let pts = algorithm1(&j, MeasureKind::SemiMi, &cfg).unwrap();
        assert_eq!(pts.len(), 1);
        assert!((pts[0].utility - j.entropy_x()).abs() < 1e-12);
    }

    #[test]
    fn algorithm1_invariants_on_small_joint() {
        let j = small_joint();
        let eps = epsilon_grid(0.01, 0.02, 0.15);
        for kind in MeasureKind::ALL {
            let cfg = SweepConfig::uniform(eps.clone(), 5, 40, 0.05, 1.0).unwrap();
            let baselines: Vec<_> = eps
                .iter()
                .map(|&e| optimal_maxlift_mechanism(&j, e, kind).unwrap())
                .collect();
            let pts = algorithm1_with_baselines(&j, kind, &cfg, &baselines).unwrap();
            for (p, b) in pts.iter().zip(&baselines) {
                p.check_budget(kind).unwrap();
                assert!(p.utility >= b.utility - 1e-9, "{kind} eps {}", p.epsilon);
                assert!(linf_distance(&p.mechanism.mixture(), j.p_x()) < 1e-8);
                assert!(p.mechanism.output_size() <= j.x_size());
            }
            for w in pts.windows(2) {
                assert!(w[1].utility >= w[0].utility - 1e-9, "{kind}");
            }
        }
    }

    #[test]
    fn example1_closed_form() {
        let m = example1_theoretical(0.05).unwrap();
        assert!((m.columns()[0][0] - 0.089760).abs() < 1e-12);
        assert!((m.columns()[0][1] - 0.910240).abs() < 1e-12);
        assert!((m.columns()[1][0] - 0.410240).abs() < 1e-12);
        assert!((m.columns()[1][1] - 0.589760).abs() < 1e-12);
        assert!(linf_distance(&m.mixture(), &[0.25, 0.75]) < 1e-15);

        let tiny = example1_theoretical(1e-9).unwrap();
        let j = example1_joint();
        assert!(mechanism_utility(&j, &tiny).unwrap().mi_xy < 1e-12);

        assert!(example1_theoretical(0.08).is_err());
        assert!(example1_theoretical(0.0).is_err());
    }

    #[test]
    fn example1_theoretical_chi2_is_below_budget() {
        let j = example1_joint();
        let leak = mechanism_leakage(&j, &example1_theoretical(0.05).unwrap()).unwrap();
        assert!(leak.avg_chi2 <= 0.05 * 0.05);
        assert!((leak.max_chi2 - 0.0025).abs() <= 0.02 * 0.0025);
    }
}
