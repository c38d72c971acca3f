//! Python bindings: clusterings, impact, quality, ΔRecall reasoning, IQ,
//! snapshot quality and the validation study.
//!
//! Results come back as plain dicts with the same layout as the JSON report
//! sections of the command-line tool.

use std::collections::BTreeMap;

use clusterdiff::delta_recall::{
    estimate_with_policy, ClipPolicy, DiagramInputs, RecallPolicy, Variant,
};
use clusterdiff::impact::impact_metrics;
use clusterdiff::iq;
use clusterdiff::quality::{self, IdealJudge, Sampling, Scope};
use clusterdiff::simulation::{validation_study, StudyConfig};
use clusterdiff::snapshot::{snapshot_eval, Reference, SnapshotOptions};
use clusterdiff::{ClusteringPair, Error, Partition};
use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyTuple;
use serde::Serialize;

create_exception!(pyclusterdiff, ClusterdiffError, PyValueError);
create_exception!(pyclusterdiff, InfeasibleError, ClusterdiffError);

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyOSError::new_err(e.to_string()),
        Error::Infeasible { .. } | Error::VariantInapplicable { .. } => {
            InfeasibleError::new_err(e.to_string())
        }
        other => ClusterdiffError::new_err(other.to_string()),
    }
}

fn to_dict<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| to_py(e.into()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// A clustering of weighted items.
#[pyclass(name = "Clustering", module = "pyclusterdiff", frozen)]
pub struct PyClustering {
    inner: clusterdiff::Clustering,
}

#[pymethods]
impl PyClustering {
    /// Builds a clustering from `(item, cluster)` or `(item, cluster, weight)` rows.
    #[new]
    fn new(rows: Vec<Bound<'_, PyTuple>>) -> PyResult<Self> {
        let rows = rows
            .iter()
            .map(|row| match row.len() {
                2 => {
                    let (item, cluster): (String, String) = row.extract()?;
                    Ok((item, cluster, 1.0))
                }
                3 => row.extract::<(String, String, f64)>(),
                n => Err(PyValueError::new_err(format!(
                    "rows have 2 or 3 fields, got {n}"
                ))),
            })
            .collect::<PyResult<Vec<_>>>()?;
        Ok(Self {
            inner: clusterdiff::Clustering::from_rows(rows).map_err(to_py)?,
        })
    }

    /// Builds a clustering from one cluster label per item.
    #[staticmethod]
    #[pyo3(signature = (labels, weights=None))]
    fn from_labels(
        labels: BTreeMap<String, String>,
        weights: Option<BTreeMap<String, f64>>,
    ) -> PyResult<Self> {
        let rows = labels.into_iter().map(|(item, cluster)| {
            let w = weights
                .as_ref()
                .and_then(|w| w.get(&item).copied())
                .unwrap_or(1.0);
            (item, cluster, w)
        });
        Ok(Self {
            inner: clusterdiff::Clustering::from_rows(rows).map_err(to_py)?,
        })
    }

    /// Reads `item<TAB>cluster[<TAB>weight]` lines from a file.
    #[staticmethod]
    fn load(path: std::path::PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: clusterdiff::load_clustering(path).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: clusterdiff::parse_clustering(text).map_err(to_py)?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Clustering(items={}, clusters={})",
            self.inner.len(),
            self.inner.partition().num_clusters()
        )
    }

    #[getter]
    fn items(&self) -> Vec<String> {
        self.inner.population().ids().to_vec()
    }

    #[getter]
    fn num_clusters(&self) -> usize {
        self.inner.partition().num_clusters()
    }

    fn total_weight(&self) -> f64 {
        self.inner.population().total_weight()
    }

    /// Ids of the items in the same cluster as `item`.
    fn cluster_of(&self, item: &str) -> PyResult<Vec<String>> {
        Ok(self
            .inner
            .cluster_of(item)
            .map_err(to_py)?
            .into_iter()
            .map(str::to_string)
            .collect())
    }

    fn to_tsv(&self) -> String {
        self.inner.to_tsv()
    }
}

fn pair_of(base: &PyClustering, exp: &PyClustering) -> PyResult<ClusteringPair> {
    clusterdiff::restrict_to_common(&base.inner, &exp.inner).map_err(to_py)
}

fn with_ideal(
    base: &PyClustering,
    exp: &PyClustering,
    ideal: &PyClustering,
) -> PyResult<(ClusteringPair, Partition)> {
    let pair = pair_of(base, exp)?;
    let aligned = pair.align(&ideal.inner).map_err(to_py)?;
    Ok((pair, aligned))
}

fn parse_scope(scope: &str) -> PyResult<Scope> {
    match scope {
        "population" => Ok(Scope::Population),
        "affected" => Ok(Scope::Affected),
        other => Err(PyValueError::new_err(format!("unknown scope `{other}`"))),
    }
}

/// Split, merge and Jaccard impact of `exp` relative to `base`.
#[pyfunction]
fn impact<'py>(
    py: Python<'py>,
    base: &PyClustering,
    exp: &PyClustering,
) -> PyResult<Bound<'py, PyAny>> {
    to_dict(py, &impact_metrics(&pair_of(base, exp)?))
}

/// Good/bad split and merge rates and ΔPrecision against a known Ideal.
#[pyfunction]
#[pyo3(signature = (base, exp, ideal, scope="population"))]
fn exact_quality<'py>(
    py: Python<'py>,
    base: &PyClustering,
    exp: &PyClustering,
    ideal: &PyClustering,
    scope: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let (pair, ideal) = with_ideal(base, exp, ideal)?;
    to_dict(
        py,
        &quality::exact_quality(&pair, &ideal, parse_scope(scope)?).map_err(to_py)?,
    )
}

/// Exact lifted precision, recall and their deltas against a known Ideal.
#[pyfunction]
#[pyo3(signature = (base, exp, ideal, scope="population"))]
fn exact_recall_precision<'py>(
    py: Python<'py>,
    base: &PyClustering,
    exp: &PyClustering,
    ideal: &PyClustering,
    scope: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let (pair, ideal) = with_ideal(base, exp, ideal)?;
    to_dict(
        py,
        &quality::exact_recall_precision(&pair, &ideal, parse_scope(scope)?).map_err(to_py)?,
    )
}

/// Pair-based ΔRecall(T) estimate with a 95% interval; `n=None` enumerates
/// every pair.
#[pyfunction]
#[pyo3(signature = (base, exp, ideal, n=None, seed=0))]
fn estimate_delta_recall<'py>(
    py: Python<'py>,
    base: &PyClustering,
    exp: &PyClustering,
    ideal: &PyClustering,
    n: Option<usize>,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let (pair, aligned) = with_ideal(base, exp, ideal)?;
    let sampling = match n {
        Some(n) => Sampling::Sampled { n, seed },
        None => Sampling::Exhaustive,
    };
    let weights = quality::ideal_weights(pair.population(), &aligned);
    let sample = quality::delta_recall_pairs(&pair, &weights, sampling).map_err(to_py)?;
    let est =
        quality::estimate_delta_recall(&sample, &IdealJudge::new(&ideal.inner)).map_err(to_py)?;
    to_dict(py, &est)
}

/// ΔRecall(T) from the affected-item diagram, with quality rates taken
/// exactly from `ideal`.
#[pyfunction]
#[pyo3(signature = (base, exp, ideal, variant=1, precision_base=None, recall=None, clip=true))]
#[allow(clippy::too_many_arguments)]
fn delta_recall<'py>(
    py: Python<'py>,
    base: &PyClustering,
    exp: &PyClustering,
    ideal: &PyClustering,
    variant: u8,
    precision_base: Option<f64>,
    recall: Option<f64>,
    clip: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let (pair, ideal) = with_ideal(base, exp, ideal)?;
    let variant = match (variant, precision_base) {
        (1, _) => Variant::V1,
        (2, Some(precision_base)) => Variant::V2 { precision_base },
        (2, None) => return Err(PyValueError::new_err("variant 2 needs precision_base")),
        (v, _) => return Err(PyValueError::new_err(format!("unknown variant {v}"))),
    };
    let policy = match recall {
        Some(recall) => RecallPolicy::Fixed { recall },
        None => RecallPolicy::default(),
    };
    let clip = if clip {
        ClipPolicy::Clip
    } else {
        ClipPolicy::Abort
    };
    let impact = impact_metrics(&pair);
    let rates = quality::exact_quality(&pair, &ideal, Scope::Population).map_err(to_py)?;
    let inputs = DiagramInputs::new(&impact, &rates).map_err(to_py)?;
    to_dict(
        py,
        &estimate_with_policy(&inputs, variant, policy, clip).map_err(to_py)?,
    )
}

/// Exact IQ of the change from `base` to `exp` towards `ideal`.
#[pyfunction]
fn iq_exact<'py>(
    py: Python<'py>,
    base: &PyClustering,
    exp: &PyClustering,
    ideal: &PyClustering,
) -> PyResult<Bound<'py, PyAny>> {
    let (pair, ideal) = with_ideal(base, exp, ideal)?;
    to_dict(py, &iq::iq_exact(&pair, &ideal).map_err(to_py)?)
}

/// IQ at `(x, y)` with Base at the origin and Ideal at `(0, d)`.
#[pyfunction]
fn iq_at(x: f64, y: f64, d: f64) -> Option<f64> {
    iq::iq_at(x, y, d)
}

/// Absolute precision of `snapshot` (and recall above the all-singletons
/// minimum) judged against `ideal`.
#[pyfunction]
#[pyo3(signature = (snapshot, ideal, reference="perfect_precision", allow_perfect_recall=false))]
fn snapshot<'py>(
    py: Python<'py>,
    snapshot: &PyClustering,
    ideal: &PyClustering,
    reference: &str,
    allow_perfect_recall: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let reference = match reference {
        "perfect_precision" => Reference::PerfectPrecision,
        "perfect_recall" => Reference::PerfectRecall,
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown reference `{other}`"
            )))
        }
    };
    let options = SnapshotOptions {
        reference,
        allow_perfect_recall,
        sampling: Sampling::Exhaustive,
    };
    let q =
        snapshot_eval(&snapshot.inner, &IdealJudge::new(&ideal.inner), options).map_err(to_py)?;
    to_dict(py, &q)
}

/// Runs the validation study; `config` is a JSON document, the built-in
/// default study if absent.
#[pyfunction]
#[pyo3(signature = (config=None))]
fn simulate<'py>(py: Python<'py>, config: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
    let config = match config {
        Some(text) => StudyConfig::from_json(text).map_err(to_py)?,
        None => StudyConfig::default(),
    };
    let report = py.detach(|| validation_study(&config)).map_err(to_py)?;
    to_dict(py, &report)
}

#[pymodule]
fn pyclusterdiff(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("ClusterdiffError", m.py().get_type::<ClusterdiffError>())?;
    m.add("InfeasibleError", m.py().get_type::<InfeasibleError>())?;
    m.add_class::<PyClustering>()?;
    m.add_function(wrap_pyfunction!(impact, m)?)?;
    m.add_function(wrap_pyfunction!(exact_quality, m)?)?;
    m.add_function(wrap_pyfunction!(exact_recall_precision, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_delta_recall, m)?)?;
    m.add_function(wrap_pyfunction!(delta_recall, m)?)?;
    m.add_function(wrap_pyfunction!(iq_exact, m)?)?;
    m.add_function(wrap_pyfunction!(iq_at, m)?)?;
    m.add_function(wrap_pyfunction!(snapshot, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    Ok(())
}
