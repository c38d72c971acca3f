//! The six-item, equal-weight worked example: an Ideal of three pairs, a
//! Base that groups one member of each pair, and six Exp clusterings that
//! only contain good splits and good merges.

use std::collections::BTreeMap;

use crate::model::{Clustering, ClusteringPair, Partition, Population};

pub const EXAMPLE_ITEMS: [&str; 6] = ["i1", "i2", "j1", "j2", "k1", "k2"];

/// Exp variants with their expected IQ, in percent.
pub const EXAMPLE_IQ_PERCENT: [(&str, f64); 6] = [
    ("c", 31.25),
    ("d", 37.50),
    ("e", 64.71),
    ("f", 60.00),
    ("g", 80.77),
    ("h", 100.00),
];

pub struct WorkedExample {
    pub population: Population,
    pub ideal: Partition,
    pub base: Partition,
    pub exps: BTreeMap<&'static str, Partition>,
}

impl WorkedExample {
    pub fn pair(&self, exp: &str) -> ClusteringPair {
        ClusteringPair::new(
            self.population.clone(),
            self.base.clone(),
            self.exps[exp].clone(),
        )
        .expect("fixture is consistent")
    }

    pub fn clustering(&self, partition: &Partition) -> Clustering {
        Clustering::from_partition(self.population.clone(), partition.clone())
            .expect("fixture is consistent")
    }
}

/// Labels are listed in item order: i1, i2, j1, j2, k1, k2.
pub fn worked_example() -> WorkedExample {
    let p = |labels: [u8; 6]| Partition::from_labels(&labels);
    let exps = BTreeMap::from([
        ("c", p([1, 3, 1, 3, 2, 3])),
        ("d", p([1, 4, 2, 4, 3, 4])),
        ("e", p([1, 1, 2, 3, 2, 3])),
        ("f", p([1, 1, 2, 4, 3, 5])),
        ("g", p([1, 1, 2, 2, 3, 4])),
        ("h", p([1, 1, 2, 2, 3, 3])),
    ]);
    WorkedExample {
        population: Population::unit(EXAMPLE_ITEMS).expect("fixture is consistent"),
        ideal: p([1, 1, 2, 2, 3, 3]),
        base: p([1, 2, 1, 2, 1, 2]),
        exps,
    }
}
