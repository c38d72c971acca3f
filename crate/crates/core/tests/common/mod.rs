#![allow(dead_code)]

use clusterdiff::{Clustering, ClusteringPair, Item, Partition, Population};
use rand::Rng;

/// Base, Exp and Ideal over one weighted population.
#[derive(Debug)]
pub struct Triple {
    pub pair: ClusteringPair,
    pub ideal: Partition,
}

impl Triple {
    pub fn ideal_clustering(&self) -> Clustering {
        Clustering::from_partition(self.pair.population().clone(), self.ideal.clone()).unwrap()
    }

    pub fn swapped(&self) -> Self {
        Self {
            pair: self.pair.swapped(),
            ideal: self.ideal.clone(),
        }
    }
}

pub fn population(weights: &[f64]) -> Population {
    Population::new(
        weights
            .iter()
            .enumerate()
            .map(|(k, &w)| Item::new(format!("t{k:03}"), w))
            .collect(),
    )
    .unwrap()
}

fn labels(rng: &mut impl Rng, n: usize, k: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..k)).collect()
}

/// A random triple where Exp moves a random subset of Base's items.
pub fn random_triple(rng: &mut impl Rng, n: usize, unit_weights: bool) -> Triple {
    let k = rng.random_range(1..=n.max(1));
    let base = labels(rng, n, k);
    let moves = rng.random_range(0..=n);
    let mut exp = base.clone();
    for _ in 0..moves {
        let ix = rng.random_range(0..n);
        exp[ix] = rng.random_range(0..k + 2);
    }
    let ideal_k = rng.random_range(1..=n.max(1));
    let ideal = labels(rng, n, ideal_k);
    let weights: Vec<f64> = (0..n)
        .map(|_| {
            if unit_weights {
                1.0
            } else {
                rng.random_range(0.1..3.0)
            }
        })
        .collect();
    Triple {
        pair: ClusteringPair::new(
            population(&weights),
            Partition::from_labels(&base),
            Partition::from_labels(&exp),
        )
        .unwrap(),
        ideal: Partition::from_labels(&ideal),
    }
}

/// A Base cluster split into two halves so that every affected item has
/// the same Venn diagram up to scale.
///
/// With `shared`, each of `classes` Ideal classes has `per` members in each
/// half; otherwise each half holds `classes` classes of its own. Every class
/// also has `outside` members in singleton clusters untouched by the change,
/// and there are `bystanders` unrelated singleton items.
pub fn symmetric_split(
    classes: usize,
    per: usize,
    shared: bool,
    outside: usize,
    bystanders: usize,
    weight: f64,
) -> Triple {
    let mut base = Vec::new();
    let mut exp = Vec::new();
    let mut ideal = Vec::new();
    let class_count = if shared { classes } else { 2 * classes };
    for half in 0..2 {
        for c in 0..classes {
            let class = if shared { c } else { half * classes + c };
            for _ in 0..per {
                base.push(0);
                exp.push(half);
                ideal.push(class);
            }
        }
    }
    let mut next = 2;
    for class in 0..class_count {
        for _ in 0..outside {
            base.push(next);
            exp.push(next);
            ideal.push(class);
            next += 1;
        }
    }
    for b in 0..bystanders {
        base.push(next);
        exp.push(next);
        ideal.push(class_count + b);
        next += 1;
    }
    let weights = vec![weight; base.len()];
    Triple {
        pair: ClusteringPair::new(
            population(&weights),
            Partition::from_labels(&base),
            Partition::from_labels(&exp),
        )
        .unwrap(),
        ideal: Partition::from_labels(&ideal),
    }
}
