//! Absolute quality of a single clustering, measured as the change towards
//! a reference clustering whose precision or recall is known to be perfect.
//!
//! With the snapshot as Base and every item in its own cluster as Exp,
//! `Precision(snapshot) = 1 − ΔPrecision` and the snapshot's recall exceeds
//! the (unknown) recall of the singleton clustering by `−ΔRecall`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Clustering, ClusteringPair, Partition, Population};
use crate::quality::{
    delta_recall_pairs, estimate_delta_recall, estimate_quality_rates, Judge, Sampling,
};

/// Every item in a cluster by itself.
pub fn perfect_precision_clustering(population: &Population) -> Result<Clustering> {
    Clustering::from_partition(population.clone(), Partition::singletons(population.len()))
}

/// All items in one cluster.
pub fn perfect_recall_clustering(population: &Population) -> Result<Clustering> {
    Clustering::from_partition(
        population.clone(),
        Partition::single_cluster(population.len()),
    )
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    #[default]
    PerfectPrecision,
    /// Rarely informative; refused unless explicitly allowed.
    PerfectRecall,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotOptions {
    pub reference: Reference,
    pub allow_perfect_recall: bool,
    pub sampling: Sampling,
}

impl Default for SnapshotOptions {
    fn default() -> Self {
        Self {
            reference: Reference::PerfectPrecision,
            allow_perfect_recall: false,
            sampling: Sampling::Exhaustive,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotQuality {
    pub reference: Reference,
    pub sampling: Sampling,
    pub delta_precision_raw: f64,
    /// Needs a judge that knows `weight(Ideal(i))`.
    pub delta_recall_raw: Option<f64>,
    /// Perfect-precision reference only.
    pub precision_absolute: Option<f64>,
    /// Recall above that of the all-singletons clustering.
    pub recall_above_minimum: Option<f64>,
    /// Perfect-recall reference only.
    pub recall_absolute: Option<f64>,
    /// Precision above that of the single-cluster clustering.
    pub precision_above_minimum: Option<f64>,
}

/// Runs the reference experiment with `snapshot` as Base.
pub fn snapshot_eval(
    snapshot: &Clustering,
    judge: &dyn Judge,
    options: SnapshotOptions,
) -> Result<SnapshotQuality> {
    let population = snapshot.population();
    let exp = match options.reference {
        Reference::PerfectPrecision => {
            if snapshot.partition().is_all_singletons() {
                return Err(Error::SnapshotIsPerfectPrecision);
            }
            Partition::singletons(population.len())
        }
        Reference::PerfectRecall => {
            if !options.allow_perfect_recall {
                return Err(Error::PerfectRecallRefused);
            }
            if snapshot.partition().num_clusters() == 1 {
                return Err(Error::ZeroDiff);
            }
            Partition::single_cluster(population.len())
        }
    };
    let pair = ClusteringPair::new(population.clone(), snapshot.partition().clone(), exp)?;
    let rates = estimate_quality_rates(&pair, judge, options.sampling)?;
    let delta_precision_raw = rates.population.delta_precision.ok_or_else(|| {
        Error::Validation(
            rates
                .delta_precision_absent_reason
                .clone()
                .unwrap_or_else(|| "ΔPrecision unavailable".into()),
        )
    })?;
    let delta_recall_raw = match judge.ideal_weights(population) {
        Some(w) => {
            let sample = delta_recall_pairs(&pair, &w, options.sampling)?;
            Some(estimate_delta_recall(&sample, judge)?.value)
        }
        None => None,
    };
    let pp = options.reference == Reference::PerfectPrecision;
    Ok(SnapshotQuality {
        reference: options.reference,
        sampling: options.sampling,
        delta_precision_raw,
        delta_recall_raw,
        precision_absolute: pp.then_some(1.0 - delta_precision_raw),
        recall_above_minimum: if pp {
            delta_recall_raw.map(|d| -d)
        } else {
            None
        },
        recall_absolute: if pp {
            None
        } else {
            delta_recall_raw.map(|d| 1.0 - d)
        },
        precision_above_minimum: (!pp).then_some(-delta_precision_raw),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quality::{exact_quality, IdealJudge, Scope, VerdictJudge};

    fn clustering(labels: &[u8]) -> Clustering {
        let ids: Vec<String> = (0..labels.len()).map(|i| format!("s{i}")).collect();
        Clustering::from_partition(
            Population::unit(ids).unwrap(),
            Partition::from_labels(labels),
        )
        .unwrap()
    }

    #[test]
    fn perfect_precision_construction() {
        let c = clustering(&[0, 0, 1]);
        let pp = perfect_precision_clustering(c.population()).unwrap();
        assert_eq!(pp.partition().num_clusters(), 3);
        let again = perfect_precision_clustering(pp.population()).unwrap();
        assert_eq!(again.partition(), pp.partition());
        let one = clustering(&[0]);
        assert_eq!(
            perfect_precision_clustering(one.population())
                .unwrap()
                .partition(),
            one.partition()
        );
    }

    #[test]
    fn ideal_snapshot_is_perfectly_precise() {
        let ideal = clustering(&[0, 0, 1, 1, 1, 2]);
        let q =
            snapshot_eval(&ideal, &IdealJudge::new(&ideal), SnapshotOptions::default()).unwrap();
        assert_eq!(q.precision_absolute, Some(1.0));
        assert!(q.recall_above_minimum.unwrap() > 0.0);
    }

    #[test]
    fn bad_pairs_only_snapshot() {
        let ideal = clustering(&[0, 1, 2, 3]);
        let snap = Clustering::from_partition(
            ideal.population().clone(),
            Partition::from_labels(&[0, 0, 1, 1]),
        )
        .unwrap();
        let judge = IdealJudge::new(&ideal);
        let q = snapshot_eval(&snap, &judge, SnapshotOptions::default()).unwrap();
        // Every item shares its cluster with one non-equivalent item.
        assert!((q.precision_absolute.unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(q.recall_above_minimum, Some(0.0));

        let pair = ClusteringPair::new(
            snap.population().clone(),
            snap.partition().clone(),
            Partition::singletons(4),
        )
        .unwrap();
        let exact = exact_quality(&pair, ideal.partition(), Scope::Population).unwrap();
        assert!((q.delta_precision_raw - exact.delta_precision.unwrap()).abs() < 1e-15);
        assert_eq!(exact.good_merge_rate + exact.bad_merge_rate, 0.0);
    }

    #[test]
    fn refusals() {
        let singles = clustering(&[0, 1, 2]);
        assert!(matches!(
            snapshot_eval(
                &singles,
                &IdealJudge::new(&singles),
                SnapshotOptions::default()
            ),
            Err(Error::SnapshotIsPerfectPrecision)
        ));
        let c = clustering(&[0, 0, 1]);
        let pr = SnapshotOptions {
            reference: Reference::PerfectRecall,
            ..Default::default()
        };
        assert!(matches!(
            snapshot_eval(&c, &IdealJudge::new(&c), pr),
            Err(Error::PerfectRecallRefused)
        ));
        let allowed = SnapshotOptions {
            allow_perfect_recall: true,
            ..pr
        };
        let q = snapshot_eval(&c, &IdealJudge::new(&c), allowed).unwrap();
        assert_eq!(q.recall_absolute, Some(1.0));
        assert!(q.precision_absolute.is_none());
    }

    #[test]
    fn verdicts_without_ideal_weights_give_no_recall() {
        let c = clustering(&[0, 0, 1]);
        let judge = VerdictJudge::parse("s0\ts1\t1\n").unwrap();
        let q = snapshot_eval(&c, &judge, SnapshotOptions::default()).unwrap();
        assert_eq!(q.precision_absolute, Some(1.0));
        assert_eq!(q.delta_recall_raw, None);
    }

    #[test]
    fn merging_distinct_ideal_clusters_does_not_raise_precision() {
        let ideal = clustering(&[0, 0, 1, 1, 2, 2]);
        let judge = IdealJudge::new(&ideal);
        let pop = ideal.population().clone();
        let precision = |labels: &[u8]| {
            let snap =
                Clustering::from_partition(pop.clone(), Partition::from_labels(labels)).unwrap();
            snapshot_eval(&snap, &judge, SnapshotOptions::default())
                .unwrap()
                .precision_absolute
                .unwrap()
        };
        let before = precision(&[0, 0, 1, 1, 2, 3]);
        let after = precision(&[0, 0, 0, 0, 2, 3]);
        assert!(after <= before);
    }
}
