//! Exact impact metrics of a clustering change.
//!
//! Pointwise metrics are defined per item and lifted to item sets as
//! weight-averaged expectations. None of them need judgements.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ratio, ClusteringPair, ItemIx, Partition, Population};

/// Cluster weights of two partitions plus the weights of their pairwise
/// cluster intersections.
pub(crate) struct Overlap {
    wa: Vec<f64>,
    wb: Vec<f64>,
    inter: HashMap<(usize, usize), f64>,
    la: Vec<usize>,
    lb: Vec<usize>,
}

impl Overlap {
    pub(crate) fn new(population: &Population, a: &Partition, b: &Partition) -> Self {
        let mut inter: HashMap<(usize, usize), f64> = HashMap::new();
        for ix in 0..population.len() {
            *inter
                .entry((a.cluster_of(ix), b.cluster_of(ix)))
                .or_insert(0.0) += population.weight(ix);
        }
        Self {
            wa: a.cluster_weights(population),
            wb: b.cluster_weights(population),
            inter,
            la: a.labels().to_vec(),
            lb: b.labels().to_vec(),
        }
    }

    /// `(weight(A(i)), weight(B(i)), weight(A(i) ∩ B(i)))`.
    pub(crate) fn terms(&self, ix: ItemIx) -> (f64, f64, f64) {
        let (ca, cb) = (self.la[ix], self.lb[ix]);
        (self.wa[ca], self.wb[cb], self.inter[&(ca, cb)])
    }

    pub(crate) fn same_clusters(&self, ix: ItemIx) -> bool {
        let (wa, wb, wab) = self.terms(ix);
        wa == wab && wb == wab
    }

    pub(crate) fn jaccard(&self, ix: ItemIx) -> f64 {
        let (wa, wb, wab) = self.terms(ix);
        1.0 - ratio(wab, wa + wb - wab)
    }
}

/// Weighted mean of `metric` over `items`.
pub fn lift(
    population: &Population,
    items: &[ItemIx],
    metric: impl Fn(ItemIx) -> f64,
) -> Result<f64> {
    let (num, den) = items.iter().fold((0.0, 0.0), |(n, d), &ix| {
        let w = population.weight(ix);
        (n + w * metric(ix), d + w)
    });
    if den > 0.0 {
        Ok(num / den)
    } else {
        Err(Error::ZeroWeight)
    }
}

pub(crate) fn all_items(population: &Population) -> Vec<ItemIx> {
    (0..population.len()).collect()
}

fn stable_terms(pair: &ClusteringPair, ix: ItemIx) -> (f64, f64, f64) {
    let pop = pair.population();
    let base = pair.base().cluster_members_of(ix);
    let exp = pair.exp();
    let e = exp.cluster_of(ix);
    let stable: f64 = base
        .iter()
        .filter(|&&m| exp.cluster_of(m) == e)
        .map(|&m| pop.weight(m))
        .sum();
    (pop.weight_of(base), pop.weight_of(exp.members(e)), stable)
}

/// Fraction of weight(Base(i)) that no longer shares a cluster with `i`.
pub fn split_rate(pair: &ClusteringPair, id: &str) -> Result<f64> {
    let (wb, _, stable) = stable_terms(pair, pair.population().lookup(id)?);
    Ok(1.0 - ratio(stable, wb))
}

/// Fraction of weight(Exp(i)) that newly shares a cluster with `i`.
pub fn merge_rate(pair: &ClusteringPair, id: &str) -> Result<f64> {
    let (_, we, stable) = stable_terms(pair, pair.population().lookup(id)?);
    Ok(1.0 - ratio(stable, we))
}

/// Pointwise Jaccard distance between Base(i) and Exp(i).
pub fn jaccard_distance(pair: &ClusteringPair, id: &str) -> Result<f64> {
    let (wb, we, stable) = stable_terms(pair, pair.population().lookup(id)?);
    Ok(1.0 - ratio(stable, wb + we - stable))
}

/// Lifted Jaccard distance between two arbitrary partitions over `items`.
pub fn lifted_jaccard_distance(
    population: &Population,
    a: &Partition,
    b: &Partition,
    items: &[ItemIx],
) -> Result<f64> {
    let overlap = Overlap::new(population, a, b);
    lift(population, items, |ix| overlap.jaccard(ix))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffectedItems {
    pub items: Vec<ItemIx>,
    pub weight: f64,
    pub fraction: f64,
}

/// Items whose Base and Exp clusters differ as member sets.
pub fn affected_items(pair: &ClusteringPair) -> AffectedItems {
    let pop = pair.population();
    let overlap = Overlap::new(pop, pair.base(), pair.exp());
    let items: Vec<ItemIx> = (0..pop.len())
        .filter(|&ix| !overlap.same_clusters(ix))
        .collect();
    let weight = pop.weight_of(&items);
    AffectedItems {
        fraction: weight / pop.total_weight(),
        items,
        weight,
    }
}

/// Lifted `weight(i) / weight(Base(i))` over `items`.
pub fn weight_fraction_of_base_cluster(pair: &ClusteringPair, items: &[ItemIx]) -> Result<f64> {
    let pop = pair.population();
    let base_weights = pair.base().cluster_weights(pop);
    lift(pop, items, |ix| {
        ratio(pop.weight(ix), base_weights[pair.base().cluster_of(ix)])
    })
}

/// Impact metrics restricted to the affected items.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffectedImpact {
    pub split_rate: f64,
    pub merge_rate: f64,
    pub jaccard_distance: f64,
    pub weight_fraction_of_base_cluster: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImpactMetrics {
    pub split_rate: f64,
    pub merge_rate: f64,
    pub jaccard_distance: f64,
    pub affected_weight_fraction: f64,
    pub affected_item_count: usize,
    /// Absent when nothing is affected.
    pub affected: Option<AffectedImpact>,
}

impl ImpactMetrics {
    pub fn weight_fraction_of_base_cluster_affected(&self) -> Option<f64> {
        self.affected
            .as_ref()
            .map(|a| a.weight_fraction_of_base_cluster)
    }
}

pub fn impact_metrics(pair: &ClusteringPair) -> ImpactMetrics {
    let pop = pair.population();
    let overlap = Overlap::new(pop, pair.base(), pair.exp());
    let split = |ix| {
        let (wb, _, s) = overlap.terms(ix);
        1.0 - ratio(s, wb)
    };
    let merge = |ix| {
        let (_, we, s) = overlap.terms(ix);
        1.0 - ratio(s, we)
    };
    let jd = |ix| overlap.jaccard(ix);
    let everyone = all_items(pop);
    let affected = affected_items(pair);
    let affected_scope = if affected.weight > 0.0 {
        let items = &affected.items;
        Some(AffectedImpact {
            split_rate: lift(pop, items, split).expect("positive weight"),
            merge_rate: lift(pop, items, merge).expect("positive weight"),
            jaccard_distance: lift(pop, items, jd).expect("positive weight"),
            weight_fraction_of_base_cluster: weight_fraction_of_base_cluster(pair, items)
                .expect("positive weight"),
        })
    } else {
        None
    };
    ImpactMetrics {
        split_rate: lift(pop, &everyone, split).expect("population weight is positive"),
        merge_rate: lift(pop, &everyone, merge).expect("population weight is positive"),
        jaccard_distance: lift(pop, &everyone, jd).expect("population weight is positive"),
        affected_weight_fraction: affected.fraction,
        affected_item_count: affected.items.len(),
        affected: affected_scope,
    }
}
