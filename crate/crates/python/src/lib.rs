//! Python bindings. Errors from the core crate surface as `ValueError`.

use privfunnel_core as core;
use privfunnel_core::experiments;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn prob(v: Vec<f64>) -> PyResult<core::ProbVector> {
    core::ProbVector::new(v).map_err(err)
}

fn kind(name: &str) -> PyResult<core::MeasureKind> {
    name.parse().map_err(err)
}

#[pyclass(
    name = "JointDistribution",
    module = "privfunnel",
    frozen,
    skip_from_py_object
)]
#[derive(Clone)]
struct PyJoint(core::JointDistribution);

#[pymethods]
impl PyJoint {
    /// Joint `P_SX` given as rows indexed by `s`.
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        core::JointDistribution::from_rows(&rows)
            .map(Self)
            .map_err(err)
    }

    /// Joint from the channel `P_{S|X}` (rows indexed by `s`) and `P_X`.
    #[staticmethod]
    fn from_channel(channel: Vec<Vec<f64>>, p_x: Vec<f64>) -> PyResult<Self> {
        core::JointDistribution::from_channel(&channel, &p_x)
            .map(Self)
            .map_err(err)
    }

    #[getter]
    fn s_size(&self) -> usize {
        self.0.s_size()
    }

    #[getter]
    fn x_size(&self) -> usize {
        self.0.x_size()
    }

    #[getter]
    fn p_s(&self) -> Vec<f64> {
        self.0.p_s().to_vec()
    }

    #[getter]
    fn p_x(&self) -> Vec<f64> {
        self.0.p_x().to_vec()
    }

    fn rows(&self) -> Vec<Vec<f64>> {
        self.0.rows()
    }

    fn lift_entry(&self, s: usize, x: usize) -> f64 {
        self.0.lift_entry(s, x)
    }

    fn entropy_x(&self) -> f64 {
        self.0.entropy_x()
    }

    fn mutual_information(&self) -> f64 {
        self.0.mutual_information()
    }

    /// Posterior, lifts and semi-pointwise measures of column `w`.
    fn posterior_stats(&self, w: Vec<f64>) -> PyResult<PyPosteriorStats> {
        core::posterior_stats(&self.0, &w)
            .map(|st| PyPosteriorStats {
                posterior: st.posterior.to_vec(),
                lifts: st.lifts,
                max_lift: st.max_lift,
                semi_mi: st.semi_mi,
                ell1: st.ell1,
                chi2: st.chi2,
            })
            .map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("JointDistribution({:?})", self.0.rows())
    }
}

#[pyclass(
    name = "PosteriorStats",
    module = "privfunnel",
    frozen,
    get_all,
    skip_from_py_object
)]
#[derive(Clone)]
struct PyPosteriorStats {
    posterior: Vec<f64>,
    lifts: Vec<f64>,
    max_lift: f64,
    semi_mi: f64,
    ell1: f64,
    chi2: f64,
}

#[pyclass(
    name = "Leakage",
    module = "privfunnel",
    frozen,
    get_all,
    skip_from_py_object
)]
#[derive(Clone)]
struct PyLeakage {
    mi_sy: f64,
    tv: f64,
    avg_chi2: f64,
    max_lift: f64,
    max_semi_mi: f64,
    max_ell1: f64,
    max_chi2: f64,
}

impl From<core::Leakage> for PyLeakage {
    fn from(l: core::Leakage) -> Self {
        Self {
            mi_sy: l.mi_sy,
            tv: l.tv,
            avg_chi2: l.avg_chi2,
            max_lift: l.max_lift,
            max_semi_mi: l.max_semi_mi,
            max_ell1: l.max_ell1,
            max_chi2: l.max_chi2,
        }
    }
}

#[pyclass(name = "Mechanism", module = "privfunnel", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyMechanism(core::Mechanism);

#[pymethods]
impl PyMechanism {
    /// Output weights `P_Y` and columns `P_{X|Y=y}`.
    #[new]
    fn new(p_y: Vec<f64>, columns: Vec<Vec<f64>>) -> PyResult<Self> {
        let columns = columns.into_iter().map(prob).collect::<PyResult<_>>()?;
        core::Mechanism::new(prob(p_y)?, columns)
            .map(Self)
            .map_err(err)
    }

    #[getter]
    fn p_y(&self) -> Vec<f64> {
        self.0.p_y().to_vec()
    }

    #[getter]
    fn columns(&self) -> Vec<Vec<f64>> {
        self.0.columns().iter().map(|c| c.to_vec()).collect()
    }

    fn mixture(&self) -> Vec<f64> {
        self.0.mixture()
    }

    /// `I(X;Y)` in nats.
    fn utility(&self, joint: &PyJoint) -> PyResult<f64> {
        core::mechanism_utility(&joint.0, &self.0)
            .map(|u| u.mi_xy)
            .map_err(err)
    }

    fn leakage(&self, joint: &PyJoint) -> PyResult<PyLeakage> {
        core::mechanism_leakage(&joint.0, &self.0)
            .map(PyLeakage::from)
            .map_err(err)
    }

    fn __len__(&self) -> usize {
        self.0.output_size()
    }
}

#[pyclass(
    name = "SweepPoint",
    module = "privfunnel",
    frozen,
    get_all,
    skip_from_py_object
)]
#[derive(Clone)]
struct PySweepPoint {
    epsilon: f64,
    mechanism: PyMechanism,
    utility: f64,
    normalized_utility: f64,
    leakage_mi: f64,
    max_lift: f64,
    max_measure: f64,
    candidate_count: usize,
}

impl From<core::SweepPoint> for PySweepPoint {
    fn from(p: core::SweepPoint) -> Self {
        Self {
            epsilon: p.epsilon,
            utility: p.utility,
            normalized_utility: p.normalized_utility,
            leakage_mi: p.leakage_mi,
            max_lift: p.max_lift,
            max_measure: p.max_measure,
            candidate_count: p.candidate_count,
            mechanism: PyMechanism(p.mechanism),
        }
    }
}

#[pyfunction]
fn entropy(p: Vec<f64>) -> f64 {
    core::entropy(&p)
}

/// Max-lift bound used for budget `epsilon` of measure `kind`.
#[pyfunction]
fn lift_bound(kind_name: &str, epsilon: f64) -> PyResult<f64> {
    Ok(kind(kind_name)?.lift_bound(epsilon))
}

/// Vertices of the max-lift polytope with bound `beta`, sorted
/// lexicographically.
#[pyfunction]
fn enumerate_vertices(joint: &PyJoint, beta: f64) -> PyResult<Vec<Vec<f64>>> {
    let poly = core::build_polytope(&joint.0, beta).map_err(err)?;
    let vs = core::enumerate_vertices(&poly).map_err(err)?;
    Ok(vs.iter().map(|v| v.to_vec()).collect())
}

/// Minimum-entropy decomposition of `target` over `candidates`. Returns the
/// weights (one per deduplicated candidate) and the kept candidates.
#[pyfunction]
fn solve_mixture(
    candidates: Vec<Vec<f64>>,
    target: Vec<f64>,
) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
    let candidates = candidates.into_iter().map(prob).collect::<PyResult<_>>()?;
    let lp = core::MixtureLp::new(candidates, prob(target)?).map_err(err)?;
    let q = core::solve_mixture(&lp).map_err(err)?;
    Ok((q, lp.candidates().iter().map(|c| c.to_vec()).collect()))
}

#[pyfunction]
fn optimal_maxlift_mechanism(
    joint: &PyJoint,
    epsilon: f64,
    kind_name: &str,
) -> PyResult<PySweepPoint> {
    core::optimal_maxlift_mechanism(&joint.0, epsilon, kind(kind_name)?)
        .map(PySweepPoint::from)
        .map_err(err)
}

/// Heuristic sweep over increasing budgets `epsilons`.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (joint, kind_name, epsilons, refinement=5, refinement_last=100, delta=0.05, epsilon_end=1.0))]
fn algorithm1(
    py: Python<'_>,
    joint: &PyJoint,
    kind_name: &str,
    epsilons: Vec<f64>,
    refinement: usize,
    refinement_last: usize,
    delta: f64,
    epsilon_end: f64,
) -> PyResult<Vec<PySweepPoint>> {
    let kind = kind(kind_name)?;
    let cfg = core::SweepConfig::uniform(epsilons, refinement, refinement_last, delta, epsilon_end)
        .map_err(err)?;
    let joint = joint.0.clone();
    let points = py
        .detach(move || core::algorithm1(&joint, kind, &cfg))
        .map_err(err)?;
    Ok(points.into_iter().map(PySweepPoint::from).collect())
}

#[pyfunction]
fn example1_joint() -> PyJoint {
    PyJoint(core::mechanisms::example1_joint())
}

#[pyfunction]
fn example1_theoretical(epsilon: f64) -> PyResult<PyMechanism> {
    core::mechanisms::example1_theoretical(epsilon)
        .map(PyMechanism)
        .map_err(err)
}

/// Random joint drawn exactly as instance `instance` of a sweep seeded with
/// `seed`.
#[pyfunction]
#[pyo3(signature = (s_size, x_size, seed, instance=0))]
fn generate_joint(s_size: usize, x_size: usize, seed: u64, instance: usize) -> PyResult<PyJoint> {
    experiments::generate_joint(
        s_size,
        x_size,
        &mut experiments::instance_rng(seed, instance),
    )
    .map(PyJoint)
    .map_err(err)
}

#[pymodule]
fn privfunnel(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyJoint>()?;
    m.add_class::<PyMechanism>()?;
    m.add_class::<PyPosteriorStats>()?;
    m.add_class::<PyLeakage>()?;
    m.add_class::<PySweepPoint>()?;
    m.add_function(wrap_pyfunction!(entropy, m)?)?;
    m.add_function(wrap_pyfunction!(lift_bound, m)?)?;
    m.add_function(wrap_pyfunction!(enumerate_vertices, m)?)?;
    m.add_function(wrap_pyfunction!(solve_mixture, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_maxlift_mechanism, m)?)?;
    m.add_function(wrap_pyfunction!(algorithm1, m)?)?;
    m.add_function(wrap_pyfunction!(example1_joint, m)?)?;
    m.add_function(wrap_pyfunction!(example1_theoretical, m)?)?;
    m.add_function(wrap_pyfunction!(generate_joint, m)?)?;
    Ok(())
}
