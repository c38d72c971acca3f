//! Synthetic worlds with a known Ideal clustering, perturbations that move
//! whole sub-clusters around, and a study comparing the approximate
//! reasoning against exact values computed from the Ideal.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Zipf};
use serde::{Deserialize, Serialize};

use crate::delta_recall::{estimate_with_policy, ClipPolicy, DiagramInputs, RecallPolicy, Variant};
use crate::error::{Error, Result};
use crate::impact::impact_metrics;
use crate::iq::{iq_approx, iq_exact};
use crate::model::{Clustering, ClusteringPair, Item, ItemIx, Partition, Population};
use crate::quality::{exact_quality, exact_recall_precision, Scope};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeDistribution {
    /// Clusters of exactly `k` items; the last one takes the remainder.
    Uniform { k: usize },
    /// Sizes drawn from a Zipf law over `1..=max` with exponent `s`.
    Zipf { s: f64, max: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightDistribution {
    Unit,
    LogNormal { mu: f64, sigma: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WorldSpec {
    pub n_items: usize,
    pub cluster_sizes: SizeDistribution,
    pub weights: WeightDistribution,
    pub seed: u64,
}

impl Default for WorldSpec {
    fn default() -> Self {
        Self {
            n_items: 2000,
            cluster_sizes: SizeDistribution::Zipf { s: 1.1, max: 40 },
            weights: WeightDistribution::LogNormal {
                mu: 0.0,
                sigma: 0.5,
            },
            seed: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct World {
    pub population: Population,
    pub ideal: Partition,
}

impl World {
    pub fn ideal_clustering(&self) -> Clustering {
        Clustering::from_partition(self.population.clone(), self.ideal.clone())
            .expect("world is consistent")
    }
}

fn cluster_sizes(spec: &WorldSpec, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    let n = spec.n_items;
    let mut sizes = Vec::new();
    match spec.cluster_sizes {
        SizeDistribution::Uniform { k } => {
            if k == 0 {
                return Err(Error::Config("cluster size must be positive".into()));
            }
            sizes.extend(std::iter::repeat_n(k, n / k));
            if !n.is_multiple_of(k) {
                sizes.push(n % k);
            }
        }
        SizeDistribution::Zipf { s, max } => {
            let zipf = Zipf::new(max as f64, s)
                .map_err(|e| Error::Config(format!("zipf({s}, {max}): {e}")))?;
            let mut left = n;
            while left > 0 {
                let size = (zipf.sample(rng) as usize).clamp(1, left);
                sizes.push(size);
                left -= size;
            }
        }
    }
    Ok(sizes)
}

/// Generates a population and its Ideal clustering; deterministic in
/// `spec`, including its seed.
pub fn generate_world(spec: &WorldSpec) -> Result<World> {
    if spec.n_items < 2 {
        return Err(Error::Config("a world needs at least 2 items".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let sizes = cluster_sizes(spec, &mut rng)?;
    let weight_dist = match spec.weights {
        WeightDistribution::Unit => None,
        WeightDistribution::LogNormal { mu, sigma } => {
            Some(LogNormal::new(mu, sigma).map_err(|e| Error::Config(format!("lognormal: {e}")))?)
        }
    };
    let width = spec.n_items.to_string().len().max(6);
    let mut items = Vec::with_capacity(spec.n_items);
    let mut labels = Vec::with_capacity(spec.n_items);
    for (cluster, &size) in sizes.iter().enumerate() {
        for _ in 0..size {
            let w = weight_dist.as_ref().map_or(1.0, |d| d.sample(&mut rng));
            items.push(Item::new(format!("i{:0width$}", items.len()), w));
            labels.push(cluster);
        }
    }
    Ok(World {
        population: Population::new(items)?,
        ideal: Partition::from_labels(&labels),
    })
}

/// A perturbation applied to each cluster with probability `p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Op {
    /// Move one Ideal class out of a cluster that mixes several.
    GoodSplit(f64),
    /// Move part of an Ideal class out of its cluster.
    BadSplit(f64),
    /// Move a cluster's share of an Ideal class into another cluster that
    /// holds more of that class.
    GoodMerge(f64),
    /// Move a cluster's share of an Ideal class into a cluster holding none
    /// of that class.
    BadMerge(f64),
    /// Move one random member to the cluster of a random item.
    RandomMove(f64),
}

impl Op {
    pub fn probability(&self) -> f64 {
        match *self {
            Op::GoodSplit(p)
            | Op::BadSplit(p)
            | Op::GoodMerge(p)
            | Op::BadMerge(p)
            | Op::RandomMove(p) => p,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Op::GoodSplit(_) => "good_split",
            Op::BadSplit(_) => "bad_split",
            Op::GoodMerge(_) => "good_merge",
            Op::BadMerge(_) => "bad_merge",
            Op::RandomMove(_) => "random_move",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub ops: Vec<Op>,
    pub seed: u64,
}

impl PerturbationSpec {
    pub fn validate(&self) -> Result<()> {
        match self
            .ops
            .iter()
            .find(|op| !(0.0..=1.0).contains(&op.probability()))
        {
            Some(op) => Err(Error::Config(format!(
                "{} probability outside [0, 1]",
                op.name()
            ))),
            None => Ok(()),
        }
    }
}

/// One applied move, with the item pairs it separated and joined counted by
/// their true equivalence.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppliedOp {
    pub op: String,
    pub moved: usize,
    pub separated_equivalent: usize,
    pub separated_distinct: usize,
    pub joined_equivalent: usize,
    pub joined_distinct: usize,
}

struct Mover<'a> {
    ideal: &'a Partition,
    labels: Vec<usize>,
    clusters: BTreeMap<usize, BTreeSet<ItemIx>>,
    next_label: usize,
    log: Vec<AppliedOp>,
}

impl<'a> Mover<'a> {
    fn new(start: &Partition, ideal: &'a Partition) -> Self {
        let labels = start.labels().to_vec();
        let mut clusters: BTreeMap<usize, BTreeSet<ItemIx>> = BTreeMap::new();
        for (ix, &l) in labels.iter().enumerate() {
            clusters.entry(l).or_default().insert(ix);
        }
        Self {
            ideal,
            next_label: start.num_clusters(),
            labels,
            clusters,
            log: Vec::new(),
        }
    }

    fn class_parts(&self, label: usize) -> BTreeMap<usize, Vec<ItemIx>> {
        let mut parts: BTreeMap<usize, Vec<ItemIx>> = BTreeMap::new();
        for &ix in &self.clusters[&label] {
            parts.entry(self.ideal.cluster_of(ix)).or_default().push(ix);
        }
        parts
    }

    fn count_pairs(
        &self,
        moved: &[ItemIx],
        others: impl Iterator<Item = ItemIx> + Clone,
    ) -> (usize, usize) {
        let (mut eq, mut ne) = (0, 0);
        for &a in moved {
            for b in others.clone() {
                if self.ideal.cluster_of(a) == self.ideal.cluster_of(b) {
                    eq += 1;
                } else {
                    ne += 1;
                }
            }
        }
        (eq, ne)
    }

    /// Moves `items` (all in cluster `from`) into `to`, or a new cluster.
    fn relocate(&mut self, op: Op, items: Vec<ItemIx>, to: Option<usize>) {
        if items.is_empty() {
            return;
        }
        let from = self.labels[items[0]];
        let to = to.unwrap_or_else(|| {
            self.next_label += 1;
            self.next_label - 1
        });
        if from == to {
            return;
        }
        let moving: BTreeSet<ItemIx> = items.iter().copied().collect();
        let stay: Vec<ItemIx> = self.clusters[&from].difference(&moving).copied().collect();
        let target: Vec<ItemIx> = self
            .clusters
            .get(&to)
            .map(|c| c.iter().copied().collect())
            .unwrap_or_default();
        let (se, sd) = self.count_pairs(&items, stay.iter().copied());
        let (je, jd) = self.count_pairs(&items, target.iter().copied());
        for &ix in &items {
            self.labels[ix] = to;
            self.clusters
                .get_mut(&from)
                .expect("source exists")
                .remove(&ix);
            self.clusters.entry(to).or_default().insert(ix);
        }
        if self.clusters[&from].is_empty() {
            self.clusters.remove(&from);
        }
        self.log.push(AppliedOp {
            op: op.name().to_string(),
            moved: items.len(),
            separated_equivalent: se,
            separated_distinct: sd,
            joined_equivalent: je,
            joined_distinct: jd,
        });
    }

    fn apply(&mut self, op: Op, class_members: &[Vec<ItemIx>], rng: &mut ChaCha8Rng) {
        let p = op.probability();
        let labels: Vec<usize> = self.clusters.keys().copied().collect();
        for label in labels {
            if !rng.random_bool(p) || !self.clusters.contains_key(&label) {
                continue;
            }
            let parts = self.class_parts(label);
            let keys: Vec<usize> = parts.keys().copied().collect();
            match op {
                Op::GoodSplit(_) => {
                    if keys.len() >= 2 {
                        let k = *keys.choose(rng).expect("non-empty");
                        self.relocate(op, parts[&k].clone(), None);
                    }
                }
                Op::BadSplit(_) => {
                    let big: Vec<usize> = keys
                        .iter()
                        .copied()
                        .filter(|k| parts[k].len() >= 2)
                        .collect();
                    if let Some(&k) = big.choose(rng) {
                        let mut part = parts[&k].clone();
                        part.shuffle(rng);
                        let take = rng.random_range(1..part.len());
                        part.truncate(take);
                        self.relocate(op, part, None);
                    }
                }
                Op::GoodMerge(_) => {
                    let k = *keys.choose(rng).expect("non-empty");
                    let targets: BTreeSet<usize> = class_members[k]
                        .iter()
                        .map(|&ix| self.labels[ix])
                        .filter(|&l| l != label)
                        .collect();
                    let targets: Vec<usize> = targets.into_iter().collect();
                    if let Some(&to) = targets.choose(rng) {
                        self.relocate(op, parts[&k].clone(), Some(to));
                    }
                }
                Op::BadMerge(_) => {
                    let k = *keys.choose(rng).expect("non-empty");
                    let holding: BTreeSet<usize> =
                        class_members[k].iter().map(|&ix| self.labels[ix]).collect();
                    for _ in 0..20 {
                        let to = self.labels[rng.random_range(0..self.labels.len())];
                        if !holding.contains(&to) {
                            self.relocate(op, parts[&k].clone(), Some(to));
                            break;
                        }
                    }
                }
                Op::RandomMove(_) => {
                    let members: Vec<ItemIx> = self.clusters[&label].iter().copied().collect();
                    let ix = *members.choose(rng).expect("non-empty");
                    let to = self.labels[rng.random_range(0..self.labels.len())];
                    self.relocate(op, vec![ix], Some(to));
                }
            }
        }
    }
}

/// Applies the ops in order to `start`, returning the perturbed partition
/// and a log of every move.
pub fn perturb_partition(
    start: &Partition,
    ideal: &Partition,
    spec: &PerturbationSpec,
) -> Result<(Partition, Vec<AppliedOp>)> {
    spec.validate()?;
    if start.len() != ideal.len() {
        return Err(Error::Validation(
            "clustering and ideal differ in size".into(),
        ));
    }
    let class_members: Vec<Vec<ItemIx>> = ideal.clusters().map(<[ItemIx]>::to_vec).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut mover = Mover::new(start, ideal);
    for &op in &spec.ops {
        mover.apply(op, &class_members, &mut rng);
    }
    Ok((Partition::from_labels(&mover.labels), mover.log))
}

pub fn perturb(
    clustering: &Clustering,
    ideal: &Clustering,
    spec: &PerturbationSpec,
) -> Result<(Clustering, Vec<AppliedOp>)> {
    if clustering.population().ids() != ideal.population().ids() {
        return Err(Error::Validation(
            "clustering and ideal cover different items".into(),
        ));
    }
    let (p, log) = perturb_partition(clustering.partition(), ideal.partition(), spec)?;
    Ok((
        Clustering::from_partition(clustering.population().clone(), p)?,
        log,
    ))
}

/// Mixes two seeds into one.
pub fn derive_seed(a: u64, b: u64) -> u64 {
    let mut z = a ^ b.wrapping_add(0x9E37_79B9_7F4A_7C15).rotate_left(17);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Missing fields take their default values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StudyConfig {
    pub world: WorldSpec,
    /// Turns the Ideal into a Base with both kinds of errors.
    pub base_noise: Vec<Op>,
    pub family: Vec<PerturbationSpec>,
    pub policy: RecallPolicy,
}

/// Split/merge sweep over `{0, 0.1, …, 0.5}²` without the diagonal.
pub fn default_family() -> Vec<PerturbationSpec> {
    let grid = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5];
    let mut family = Vec::new();
    for (a, &s) in grid.iter().enumerate() {
        for (b, &m) in grid.iter().enumerate() {
            if a == b {
                continue;
            }
            family.push(PerturbationSpec {
                ops: vec![
                    Op::GoodSplit(s),
                    Op::BadSplit(s),
                    Op::GoodMerge(m),
                    Op::BadMerge(m),
                ],
                seed: (a * grid.len() + b) as u64,
            });
        }
    }
    family
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            world: WorldSpec::default(),
            base_noise: vec![Op::BadSplit(0.3), Op::BadMerge(0.2)],
            family: default_family(),
            policy: RecallPolicy::default(),
        }
    }
}

impl StudyConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub change: usize,
    pub world_seed: u64,
    pub change_seed: u64,
    pub affected_weight_fraction: f64,
    pub exact_delta_recall: f64,
    pub approx_delta_recall: f64,
    pub exact_delta_precision: f64,
    pub approx_delta_precision: f64,
    pub variant: Option<u8>,
    pub assumed_recall: Option<f64>,
    pub clipped: bool,
    pub exact_jaccard_distance: f64,
    pub boe_jaccard_distance: f64,
    pub exact_iq: Option<f64>,
    pub approx_iq: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub pearson_r: f64,
    pub slope: f64,
    pub intercept: f64,
}

/// Least-squares fit of `ys` on `xs` with Pearson correlation.
pub fn linear_fit(xs: &[f64], ys: &[f64], what: &str) -> Result<LinearFit> {
    let n = xs.len() as f64;
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::CorrelationUndefined(format!(
            "{what}: fewer than 2 points"
        )));
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::CorrelationUndefined(format!(
            "{what}: zero variance"
        )));
    }
    let slope = sxy / sxx;
    Ok(LinearFit {
        pearson_r: sxy / (sxx * syy).sqrt(),
        slope,
        intercept: my - slope * mx,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub rows: Vec<StudyRow>,
    pub delta_recall: LinearFit,
    pub jaccard_distance: LinearFit,
    /// Absent if fewer than two rows have an IQ.
    pub iq: Option<LinearFit>,
    pub iq_sign_agreement: Option<f64>,
}

fn study_row(config: &StudyConfig, change: usize, spec: &PerturbationSpec) -> Result<StudyRow> {
    let world_seed = derive_seed(config.world.seed, spec.seed);
    let world = generate_world(&WorldSpec {
        seed: world_seed,
        ..config.world
    })?;
    let noise = PerturbationSpec {
        ops: config.base_noise.clone(),
        seed: derive_seed(world_seed, 1),
    };
    let (base, _) = perturb_partition(&world.ideal, &world.ideal, &noise)?;
    let (exp, _) = perturb_partition(&base, &world.ideal, spec)?;
    let pair = ClusteringPair::new(world.population.clone(), base, exp)?;

    let impact = impact_metrics(&pair);
    let exact = exact_recall_precision(&pair, &world.ideal, Scope::Population)?;
    let mut row = StudyRow {
        change,
        world_seed,
        change_seed: spec.seed,
        affected_weight_fraction: impact.affected_weight_fraction,
        exact_delta_recall: exact.delta_recall,
        approx_delta_recall: 0.0,
        exact_delta_precision: exact.delta_precision,
        approx_delta_precision: 0.0,
        variant: None,
        assumed_recall: None,
        clipped: false,
        exact_jaccard_distance: impact.jaccard_distance,
        boe_jaccard_distance: 0.0,
        exact_iq: None,
        approx_iq: None,
    };
    if impact.affected_weight_fraction == 0.0 {
        return Ok(row);
    }
    let rates = exact_quality(&pair, &world.ideal, Scope::Population)?;
    let inputs = DiagramInputs::new(&impact, &rates)?;
    let est = match estimate_with_policy(&inputs, Variant::V1, config.policy, ClipPolicy::Clip) {
        Err(Error::VariantInapplicable { .. }) => {
            let (lo, hi) = inputs.precision_bounds();
            let v2 = Variant::V2 {
                precision_base: (lo + hi) / 2.0,
            };
            estimate_with_policy(&inputs, v2, config.policy, ClipPolicy::Clip)?
        }
        other => other?,
    };
    row.approx_delta_recall = est.overall.delta_recall_t;
    row.approx_delta_precision = est.overall.delta_precision_t;
    row.variant = Some(est.diagram.variant);
    row.assumed_recall = Some(est.diagram.assumed_recall_base);
    row.clipped = est.diagram.clipped || est.diagram.missing_clipped;
    row.boe_jaccard_distance = est.jd_back_of_envelope;
    row.exact_iq = Some(iq_exact(&pair, &world.ideal)?.iq);
    row.approx_iq = Some(
        iq_approx(
            &est.diagram,
            impact.affected_weight_fraction,
            impact.jaccard_distance,
        )?
        .iq,
    );
    Ok(row)
}

/// Runs every change of the family and fits approximate against exact.
pub fn validation_study(config: &StudyConfig) -> Result<StudyReport> {
    if config.family.len() < 10 {
        return Err(Error::Config("a study needs at least 10 changes".into()));
    }
    config.policy.validate()?;
    let rows = config
        .family
        .iter()
        .enumerate()
        .map(|(k, spec)| study_row(config, k, spec))
        .collect::<Result<Vec<_>>>()?;
    let col = |f: fn(&StudyRow) -> f64| rows.iter().map(f).collect::<Vec<f64>>();
    let delta_recall = linear_fit(
        &col(|r| r.exact_delta_recall),
        &col(|r| r.approx_delta_recall),
        "delta recall",
    )?;
    let jaccard_distance = linear_fit(
        &col(|r| r.exact_jaccard_distance),
        &col(|r| r.boe_jaccard_distance),
        "jaccard distance",
    )?;
    let iq_pairs: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| Some((r.exact_iq?, r.approx_iq?)))
        .collect();
    let (ix, iy): (Vec<f64>, Vec<f64>) = iq_pairs.iter().copied().unzip();
    let iq = linear_fit(&ix, &iy, "iq").ok();
    let iq_sign_agreement = (!iq_pairs.is_empty()).then(|| {
        iq_pairs
            .iter()
            .filter(|(a, b)| a.signum() == b.signum())
            .count() as f64
            / iq_pairs.len() as f64
    });
    Ok(StudyReport {
        rows,
        delta_recall,
        jaccard_distance,
        iq,
        iq_sign_agreement,
    })
}

pub fn study_csv(report: &StudyReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in &report.rows {
        w.serialize(row)?;
    }
    crate::delta_recall::finish_csv(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_config_takes_defaults() {
        assert_eq!(
            StudyConfig::from_json("{}").unwrap(),
            StudyConfig::default()
        );
        let c = StudyConfig::from_json(r#"{"world": {"n_items": 500}}"#).unwrap();
        assert_eq!(c.world.n_items, 500);
        assert_eq!(c.world.seed, WorldSpec::default().seed);
        assert_eq!(c.family.len(), 30);
        assert!(StudyConfig::from_json(r#"{"world": {"n_items": "many"}}"#).is_err());
    }

    fn small_world(seed: u64) -> World {
        generate_world(&WorldSpec {
            n_items: 300,
            cluster_sizes: SizeDistribution::Zipf { s: 1.1, max: 12 },
            weights: WeightDistribution::Unit,
            seed,
        })
        .unwrap()
    }

    #[test]
    fn uniform_two_gives_three_pairs() {
        let w = generate_world(&WorldSpec {
            n_items: 6,
            cluster_sizes: SizeDistribution::Uniform { k: 2 },
            weights: WeightDistribution::Unit,
            seed: 5,
        })
        .unwrap();
        assert_eq!(w.ideal.num_clusters(), 3);
        assert!(w.ideal.clusters().all(|c| c.len() == 2));
        assert_eq!(w.population.total_weight(), 6.0);
    }

    #[test]
    fn worlds_are_deterministic() {
        let spec = WorldSpec::default();
        assert_eq!(
            generate_world(&spec).unwrap(),
            generate_world(&spec).unwrap()
        );
        let other = WorldSpec { seed: 2, ..spec };
        assert_ne!(
            generate_world(&spec).unwrap(),
            generate_world(&other).unwrap()
        );
    }

    #[test]
    fn zipf_world_mixes_sizes() {
        let w = small_world(3);
        let sizes: Vec<usize> = w.ideal.clusters().map(<[ItemIx]>::len).collect();
        assert!(sizes.contains(&1));
        assert!(sizes.iter().any(|&s| s > 1));
        assert_eq!(sizes.iter().sum::<usize>(), 300);
    }

    #[test]
    fn invalid_specs() {
        let bad = WorldSpec {
            n_items: 1,
            ..WorldSpec::default()
        };
        assert!(matches!(generate_world(&bad), Err(Error::Config(_))));
        let bad = WorldSpec {
            cluster_sizes: SizeDistribution::Uniform { k: 0 },
            ..WorldSpec::default()
        };
        assert!(generate_world(&bad).is_err());
        let spec = PerturbationSpec {
            ops: vec![Op::GoodMerge(1.5)],
            seed: 0,
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn empty_ops_is_identity() {
        let w = small_world(4);
        let (p, log) = perturb_partition(&w.ideal, &w.ideal, &PerturbationSpec::default()).unwrap();
        assert_eq!(p, w.ideal);
        assert!(log.is_empty());
    }

    #[test]
    fn bad_splits_of_ideal_lose_recall() {
        let w = small_world(6);
        let spec = PerturbationSpec {
            ops: vec![Op::BadSplit(1.0)],
            seed: 9,
        };
        let (exp, log) = perturb_partition(&w.ideal, &w.ideal, &spec).unwrap();
        assert!(log
            .iter()
            .all(|op| op.separated_distinct == 0 && op.separated_equivalent > 0));
        let pair = ClusteringPair::new(w.population.clone(), w.ideal.clone(), exp).unwrap();
        let exact = exact_recall_precision(&pair, &w.ideal, Scope::Population).unwrap();
        assert!(exact.delta_recall < 0.0);
    }

    #[test]
    fn good_merges_of_over_split_clustering_raise_iq() {
        let w = small_world(7);
        let split = PerturbationSpec {
            ops: vec![Op::BadSplit(1.0)],
            seed: 1,
        };
        let (base, _) = perturb_partition(&w.ideal, &w.ideal, &split).unwrap();
        let merge = PerturbationSpec {
            ops: vec![Op::GoodMerge(0.5)],
            seed: 2,
        };
        let (exp, log) = perturb_partition(&base, &w.ideal, &merge).unwrap();
        assert!(!log.is_empty());
        assert!(log.iter().all(|op| op.joined_distinct == 0));
        let pair = ClusteringPair::new(w.population.clone(), base, exp).unwrap();
        assert!(iq_exact(&pair, &w.ideal).unwrap().iq > 0.0);
    }

    #[test]
    fn bad_merges_join_only_distinct_items() {
        let w = small_world(8);
        let spec = PerturbationSpec {
            ops: vec![Op::BadMerge(0.5)],
            seed: 3,
        };
        let (exp, log) = perturb_partition(&w.ideal, &w.ideal, &spec).unwrap();
        assert!(log
            .iter()
            .all(|op| op.joined_equivalent == 0 && op.separated_equivalent == 0));
        let pair = ClusteringPair::new(w.population.clone(), w.ideal.clone(), exp).unwrap();
        let exact = exact_recall_precision(&pair, &w.ideal, Scope::Population).unwrap();
        assert_eq!(exact.delta_recall, 0.0);
        assert!(exact.delta_precision < 0.0);
    }

    #[test]
    fn default_family_shape() {
        let f = default_family();
        assert_eq!(f.len(), 30);
        let seeds: BTreeSet<u64> = f.iter().map(|s| s.seed).collect();
        assert_eq!(seeds.len(), 30);
    }

    #[test]
    fn identical_specs_with_different_seeds_give_distinct_rows() {
        let ops = vec![Op::BadSplit(0.2), Op::GoodMerge(0.3)];
        let family: Vec<PerturbationSpec> = (0..10)
            .map(|k| PerturbationSpec {
                ops: ops.clone(),
                seed: 100 + k % 2,
            })
            .collect();
        let config = StudyConfig {
            world: WorldSpec {
                n_items: 200,
                ..WorldSpec::default()
            },
            family,
            ..StudyConfig::default()
        };
        let report = validation_study(&config).unwrap();
        assert_eq!(report.rows.len(), 10);
        assert_ne!(report.rows[0].world_seed, report.rows[1].world_seed);
        assert_ne!(
            report.rows[0].exact_delta_recall,
            report.rows[1].exact_delta_recall
        );
    }

    #[test]
    fn pure_good_merge_family_is_recall_positive() {
        let family: Vec<PerturbationSpec> = (0..10)
            .map(|k| PerturbationSpec {
                ops: vec![Op::GoodMerge(0.05 + 0.05 * k as f64)],
                seed: k,
            })
            .collect();
        let config = StudyConfig {
            world: WorldSpec {
                n_items: 300,
                ..WorldSpec::default()
            },
            base_noise: vec![Op::BadSplit(0.5)],
            family,
            ..StudyConfig::default()
        };
        let report = validation_study(&config).unwrap();
        for r in &report.rows {
            assert!(r.exact_delta_recall >= 0.0);
            assert!(r.approx_delta_recall >= 0.0);
        }
    }

    #[test]
    fn degenerate_family_has_no_correlation() {
        let family = vec![PerturbationSpec::default(); 10];
        let report = validation_study(&StudyConfig {
            family,
            ..StudyConfig::default()
        });
        assert!(matches!(report, Err(Error::CorrelationUndefined(_))));
        let short = StudyConfig {
            family: default_family()[..5].to_vec(),
            ..StudyConfig::default()
        };
        assert!(matches!(validation_study(&short), Err(Error::Config(_))));
    }

    #[test]
    fn linear_fit_exact_line() {
        let f = linear_fit(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0], "t").unwrap();
        assert!((f.pearson_r - 1.0).abs() < 1e-12);
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!((f.intercept - 1.0).abs() < 1e-12);
    }
}
