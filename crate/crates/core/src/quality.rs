//! Quality metrics of a clustering change: the four good/bad split/merge
//! rates, ΔPrecision and ΔRecall.
//!
//! Two routes are provided. The exact route enumerates the Venn regions of
//! every item against a known Ideal clustering. The estimation route draws
//! weighted item pairs from the diff and asks a [`Judge`] whether each pair
//! is truly equivalent; with [`Sampling::Exhaustive`] it enumerates the whole
//! pair universe instead, which must reproduce the exact route.
//!
//! The pair scheme for the four rates samples split pairs `(i, j)` with
//! `j ∈ Base(i) \ Exp(i)` proportionally to
//! `weight(i)/weight(T) · weight(j)/weight(Base(i))` and merge pairs
//! analogously over `Exp(i) \ Base(i)`. It is a reconstruction in the spirit
//! of the original ABCDE stipulations, not a transcription of them.

use std::collections::HashMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::impact::{affected_items, lift};
use crate::model::{ClusteringPair, ItemIx, Partition, Population, VennTable, VennWeights};

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

/// Answers whether two items are truly equivalent.
///
/// Implementations must be reflexive and symmetric.
pub trait Judge {
    fn equivalent(&self, a: &str, b: &str) -> Result<bool>;

    /// Per-item `weight(Ideal(i))` under `population`'s weights, if this
    /// judge knows the whole Ideal clustering.
    fn ideal_weights(&self, population: &Population) -> Option<Vec<f64>> {
        let _ = population;
        None
    }
}

/// Judge backed by a known Ideal clustering.
#[derive(Clone, Debug)]
pub struct IdealJudge {
    cluster: HashMap<String, usize>,
}

impl IdealJudge {
    pub fn new(ideal: &crate::model::Clustering) -> Self {
        let pop = ideal.population();
        let cluster = (0..pop.len())
            .map(|ix| (pop.id(ix).to_string(), ideal.partition().cluster_of(ix)))
            .collect();
        Self { cluster }
    }
}

impl Judge for IdealJudge {
    fn equivalent(&self, a: &str, b: &str) -> Result<bool> {
        if a == b {
            return Ok(true);
        }
        let ca = self
            .cluster
            .get(a)
            .ok_or_else(|| Error::UnknownItem(a.into()))?;
        let cb = self
            .cluster
            .get(b)
            .ok_or_else(|| Error::UnknownItem(b.into()))?;
        Ok(ca == cb)
    }

    fn ideal_weights(&self, population: &Population) -> Option<Vec<f64>> {
        let labels: Vec<usize> = population
            .ids()
            .iter()
            .map(|id| self.cluster.get(id).copied())
            .collect::<Option<_>>()?;
        Some(ideal_weights(population, &Partition::from_labels(&labels)))
    }
}

/// Judge backed by a verdict file: `item_a<TAB>item_b<TAB>0|1`.
#[derive(Clone, Debug, Default)]
pub struct VerdictJudge {
    verdicts: HashMap<(String, String), bool>,
}

fn pair_key(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl VerdictJudge {
    pub fn parse(text: &str) -> Result<Self> {
        let mut verdicts = HashMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split('\t').map(str::trim).collect();
            let verdict = match f.as_slice() {
                [_, _, "1"] => true,
                [_, _, "0"] => false,
                _ => {
                    return Err(Error::Parse {
                        line: n + 1,
                        message: "expected item_a<TAB>item_b<TAB>0|1".into(),
                    })
                }
            };
            if let Some(prev) = verdicts.insert(pair_key(f[0], f[1]), verdict) {
                if prev != verdict {
                    return Err(Error::Validation(format!(
                        "line {}: conflicting verdicts for ({}, {})",
                        n + 1,
                        f[0],
                        f[1]
                    )));
                }
            }
        }
        Ok(Self { verdicts })
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn len(&self) -> usize {
        self.verdicts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.verdicts.is_empty()
    }
}

impl Judge for VerdictJudge {
    fn equivalent(&self, a: &str, b: &str) -> Result<bool> {
        if a == b {
            return Ok(true);
        }
        self.verdicts
            .get(&pair_key(a, b))
            .copied()
            .ok_or_else(|| Error::Unjudged(a.to_string(), b.to_string()))
    }
}

/// Judge that has no answers at all; every non-trivial pair is unjudged.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoJudge;

impl Judge for NoJudge {
    fn equivalent(&self, a: &str, b: &str) -> Result<bool> {
        if a == b {
            Ok(true)
        } else {
            Err(Error::Unjudged(a.to_string(), b.to_string()))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scope {
    Item,
    Population,
    Affected,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualityRates {
    pub scope: Scope,
    pub split_rate: f64,
    pub merge_rate: f64,
    pub good_split_rate: f64,
    pub bad_split_rate: f64,
    pub good_merge_rate: f64,
    pub bad_merge_rate: f64,
    /// Absent when the judge could not cover the stable pairs.
    pub delta_precision: Option<f64>,
}

impl QualityRates {
    fn scaled(&self, scope: Scope, factor: f64) -> Self {
        Self {
            scope,
            split_rate: self.split_rate * factor,
            merge_rate: self.merge_rate * factor,
            good_split_rate: self.good_split_rate * factor,
            bad_split_rate: self.bad_split_rate * factor,
            good_merge_rate: self.good_merge_rate * factor,
            bad_merge_rate: self.bad_merge_rate * factor,
            delta_precision: self.delta_precision.map(|d| d * factor),
        }
    }

    /// Rescales population-scope rates to the affected sub-population.
    pub fn to_affected(&self, affected_weight_fraction: f64) -> Result<Self> {
        match self.scope {
            Scope::Affected => Ok(self.clone()),
            Scope::Population if affected_weight_fraction > 0.0 => {
                Ok(self.scaled(Scope::Affected, 1.0 / affected_weight_fraction))
            }
            Scope::Population => Err(Error::NoopChange),
            Scope::Item => Err(Error::Validation(
                "per-item rates have no affected scope".into(),
            )),
        }
    }

    pub fn to_population(&self, affected_weight_fraction: f64) -> Self {
        match self.scope {
            Scope::Affected => self.scaled(Scope::Population, affected_weight_fraction),
            _ => self.clone(),
        }
    }

    /// The rates of a single item.
    pub fn of_item(v: &VennWeights) -> Self {
        Self {
            scope: Scope::Item,
            split_rate: v.split_rate(),
            merge_rate: v.merge_rate(),
            good_split_rate: v.good_split_rate(),
            bad_split_rate: v.bad_split_rate(),
            good_merge_rate: v.good_merge_rate(),
            bad_merge_rate: v.bad_merge_rate(),
            delta_precision: Some(v.delta_precision()),
        }
    }
}

fn scope_items(pair: &ClusteringPair, scope: Scope) -> Result<Vec<ItemIx>> {
    match scope {
        Scope::Item => Err(Error::Validation("item scope needs an item".into())),
        Scope::Population => Ok((0..pair.population().len()).collect()),
        Scope::Affected => {
            let affected = affected_items(pair);
            if affected.weight > 0.0 {
                Ok(affected.items)
            } else {
                Err(Error::NoopChange)
            }
        }
    }
}

fn lift_venn(
    pop: &Population,
    table: &VennTable,
    items: &[ItemIx],
    f: impl Fn(&VennWeights) -> f64,
) -> f64 {
    lift(pop, items, |ix| f(table.get(ix))).expect("scope has positive weight")
}

/// Quality rates computed exactly against a known Ideal partition.
pub fn exact_quality(
    pair: &ClusteringPair,
    ideal: &Partition,
    scope: Scope,
) -> Result<QualityRates> {
    let items = scope_items(pair, scope)?;
    let table = VennTable::new(pair, ideal)?;
    let pop = pair.population();
    let l = |f: fn(&VennWeights) -> f64| lift_venn(pop, &table, &items, f);
    Ok(QualityRates {
        scope,
        split_rate: l(VennWeights::split_rate),
        merge_rate: l(VennWeights::merge_rate),
        good_split_rate: l(VennWeights::good_split_rate),
        bad_split_rate: l(VennWeights::bad_split_rate),
        good_merge_rate: l(VennWeights::good_merge_rate),
        bad_merge_rate: l(VennWeights::bad_merge_rate),
        delta_precision: Some(l(VennWeights::delta_precision)),
    })
}

/// Lifted absolute and delta precision/recall against a known Ideal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactRecallPrecision {
    pub scope: Scope,
    pub recall_base: f64,
    pub recall_exp: f64,
    pub precision_base: f64,
    pub precision_exp: f64,
    pub delta_recall: f64,
    pub delta_precision: f64,
}

pub fn exact_recall_precision(
    pair: &ClusteringPair,
    ideal: &Partition,
    scope: Scope,
) -> Result<ExactRecallPrecision> {
    let items = scope_items(pair, scope)?;
    let table = VennTable::new(pair, ideal)?;
    let pop = pair.population();
    let l = |f: fn(&VennWeights) -> f64| lift_venn(pop, &table, &items, f);
    Ok(ExactRecallPrecision {
        scope,
        recall_base: l(VennWeights::recall_base),
        recall_exp: l(VennWeights::recall_exp),
        precision_base: l(VennWeights::precision_base),
        precision_exp: l(VennWeights::precision_exp),
        delta_recall: l(VennWeights::delta_recall),
        delta_precision: l(VennWeights::delta_precision),
    })
}

/// Per-item `weight(Ideal(i))`, indexed like the pair population.
pub fn ideal_weights(population: &Population, ideal: &Partition) -> Vec<f64> {
    let cw = ideal.cluster_weights(population);
    (0..population.len())
        .map(|ix| cw[ideal.cluster_of(ix)])
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum Sampling {
    /// Enumerate the whole pair universe with exact weights.
    Exhaustive,
    /// Draw `n` pairs with replacement per stratum.
    Sampled { n: usize, seed: u64 },
}

impl Sampling {
    fn validate(self) -> Result<Self> {
        match self {
            Sampling::Sampled { n: 0, .. } => {
                Err(Error::Config("sample size must be positive".into()))
            }
            s => Ok(s),
        }
    }
}

/// A pair `(item_a, item_b)` with its sampling weight `u` and sign `l`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedPair {
    pub item_a: String,
    pub item_b: String,
    pub u: f64,
    pub sign: i8,
}

/// One weighted pair stratum: the universe mass plus either every pair of
/// the universe (exhaustive) or draws from it proportional to `u`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSample {
    pub pairs: Vec<WeightedPair>,
    /// Sum of `u` over the whole pair universe.
    pub total_u: f64,
    pub sampling: Sampling,
}

impl PairSample {
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Universe of pairs `(i, j)` with `j` in a per-item candidate set, where
/// `u_ij = item_factor(i) · weight(j)`.
struct PairUniverse {
    /// Per item: candidate group and item factor.
    per_item: Vec<Option<(usize, f64)>>,
    groups: Vec<Vec<(ItemIx, i8)>>,
    group_weight: Vec<f64>,
}

impl PairUniverse {
    /// `candidates(ix)` returns a group key and the item factor; `members`
    /// materializes a group's signed members once per key.
    fn build<K, F, M>(pop: &Population, mut candidates: F, mut members: M) -> Self
    where
        K: std::hash::Hash + Eq + Copy,
        F: FnMut(ItemIx) -> Option<(K, f64)>,
        M: FnMut(K) -> Vec<(ItemIx, i8)>,
    {
        let mut keys: HashMap<K, usize> = HashMap::new();
        let mut groups = Vec::new();
        let mut group_weight = Vec::new();
        let mut per_item = Vec::with_capacity(pop.len());
        for ix in 0..pop.len() {
            let Some((key, factor)) = candidates(ix) else {
                per_item.push(None);
                continue;
            };
            let g = *keys.entry(key).or_insert_with(|| {
                let m = members(key);
                group_weight.push(m.iter().map(|&(j, _)| pop.weight(j)).sum());
                groups.push(m);
                groups.len() - 1
            });
            per_item.push(Some((g, factor)));
        }
        Self {
            per_item,
            groups,
            group_weight,
        }
    }

    fn item_mass(&self, ix: ItemIx) -> f64 {
        match self.per_item[ix] {
            Some((g, f)) => f * self.group_weight[g],
            None => 0.0,
        }
    }

    fn total(&self) -> f64 {
        (0..self.per_item.len()).map(|ix| self.item_mass(ix)).sum()
    }

    fn enumerate(&self, pop: &Population) -> Vec<WeightedPair> {
        let mut out = Vec::new();
        for (ix, entry) in self.per_item.iter().enumerate() {
            let Some((g, f)) = *entry else { continue };
            for &(j, sign) in &self.groups[g] {
                let u = f * pop.weight(j);
                if u > 0.0 {
                    out.push(WeightedPair {
                        item_a: pop.id(ix).to_string(),
                        item_b: pop.id(j).to_string(),
                        u,
                        sign,
                    });
                }
            }
        }
        out
    }

    fn draw(&self, pop: &Population, n: usize, rng: &mut ChaCha8Rng) -> Vec<WeightedPair> {
        let masses: Vec<f64> = (0..self.per_item.len())
            .map(|ix| self.item_mass(ix))
            .collect();
        let Ok(outer) = WeightedIndex::new(&masses) else {
            return Vec::new();
        };
        let mut inner: HashMap<usize, WeightedIndex<f64>> = HashMap::new();
        (0..n)
            .map(|_| {
                let ix = outer.sample(rng);
                let (g, f) = self.per_item[ix].expect("positive mass");
                let dist = inner.entry(g).or_insert_with(|| {
                    WeightedIndex::new(self.groups[g].iter().map(|&(j, _)| pop.weight(j)))
                        .expect("group has positive weight")
                });
                let (j, sign) = self.groups[g][dist.sample(rng)];
                WeightedPair {
                    item_a: pop.id(ix).to_string(),
                    item_b: pop.id(j).to_string(),
                    u: f * pop.weight(j),
                    sign,
                }
            })
            .collect()
    }

    fn sample(&self, pop: &Population, sampling: Sampling) -> PairSample {
        let pairs = match sampling {
            Sampling::Exhaustive => self.enumerate(pop),
            Sampling::Sampled { n, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                self.draw(pop, n, &mut rng)
            }
        };
        PairSample {
            pairs,
            total_u: self.total(),
            sampling,
        }
    }
}

fn symmetric_difference(pair: &ClusteringPair, b: usize, e: usize) -> Vec<(ItemIx, i8)> {
    let mut out: Vec<(ItemIx, i8)> = pair
        .base()
        .members(b)
        .iter()
        .filter(|&&m| pair.exp().cluster_of(m) != e)
        .map(|&m| (m, -1))
        .chain(
            pair.exp()
                .members(e)
                .iter()
                .filter(|&&m| pair.base().cluster_of(m) != b)
                .map(|&m| (m, 1)),
        )
        .collect();
    out.sort_unstable();
    out
}

fn delta_recall_universe(pair: &ClusteringPair, ideal_weights: &[f64]) -> PairUniverse {
    let pop = pair.population();
    let total = pop.total_weight();
    PairUniverse::build(
        pop,
        |ix| {
            let key = (pair.base().cluster_of(ix), pair.exp().cluster_of(ix));
            let wi = ideal_weights[ix];
            (wi > 0.0 && pop.weight(ix) > 0.0).then(|| (key, pop.weight(ix) / total / wi))
        },
        |(b, e)| symmetric_difference(pair, b, e),
    )
}

/// Draws `n` pairs from the ΔRecall pair universe, proportionally to
/// `u_ij = weight(i)/weight(T) · weight(j)/weight(Ideal(i))`.
///
/// `weight(Ideal(i))` is not knowable for real populations, so this exists
/// for validation against an oracle (desk-scale, known Ideal) only.
pub fn sample_delta_recall_pairs(
    pair: &ClusteringPair,
    ideal_weights: &[f64],
    n: usize,
    seed: u64,
) -> Result<PairSample> {
    delta_recall_pairs(pair, ideal_weights, Sampling::Sampled { n, seed })
}

/// As [`sample_delta_recall_pairs`], with a choice of sampling mode.
pub fn delta_recall_pairs(
    pair: &ClusteringPair,
    ideal_weights: &[f64],
    sampling: Sampling,
) -> Result<PairSample> {
    let sampling = sampling.validate()?;
    if ideal_weights.len() != pair.population().len() {
        return Err(Error::Validation(
            "one ideal weight per item is required".into(),
        ));
    }
    Ok(delta_recall_universe(pair, ideal_weights).sample(pair.population(), sampling))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub pairs: usize,
}

impl Estimate {
    fn exact(value: f64, pairs: usize) -> Self {
        Self {
            value,
            std_error: 0.0,
            ci_low: value,
            ci_high: value,
            pairs,
        }
    }

    fn from_draws(total: f64, xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        let value = total * mean;
        let std_error = total * (var / n).sqrt();
        Self {
            value,
            std_error,
            ci_low: value - Z_95 * std_error,
            ci_high: value + Z_95 * std_error,
            pairs: xs.len(),
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.ci_low <= x && x <= self.ci_high
    }
}

/// Signed, judge-weighted sum over a sample: mean of `l·1(i≡j)` times the
/// universe mass, or the exact weighted sum in exhaustive mode.
fn signed_estimate(sample: &PairSample, judge: &dyn Judge) -> Result<Estimate> {
    let xs = sample
        .pairs
        .iter()
        .map(|p| {
            let eq = judge.equivalent(&p.item_a, &p.item_b)?;
            Ok(if eq { f64::from(p.sign) } else { 0.0 })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(match sample.sampling {
        Sampling::Exhaustive => {
            let value = sample.pairs.iter().zip(&xs).map(|(p, x)| p.u * x).sum();
            Estimate::exact(value, xs.len())
        }
        Sampling::Sampled { .. } => Estimate::from_draws(sample.total_u, &xs),
    })
}

/// Estimates ΔRecall(T) from a ΔRecall pair sample with a 95% normal CI.
pub fn estimate_delta_recall(sample: &PairSample, judge: &dyn Judge) -> Result<Estimate> {
    if sample.pairs.is_empty() {
        return Err(Error::EmptySample);
    }
    signed_estimate(sample, judge)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stratum {
    Split,
    Merge,
    Stable,
}

/// Pair strata for estimating the four rates and ΔPrecision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualitySample {
    pub split: PairSample,
    pub merge: PairSample,
    /// Stable pairs `j ∈ Base(i) ∩ Exp(i)` carry the ΔPrecision correction
    /// `weight(i)/weight(T) · weight(j) · (1/weight(Exp(i)) − 1/weight(Base(i)))`.
    pub stable: PairSample,
}

impl QualitySample {
    pub fn strata(&self) -> [(Stratum, &PairSample); 3] {
        [
            (Stratum::Split, &self.split),
            (Stratum::Merge, &self.merge),
            (Stratum::Stable, &self.stable),
        ]
    }

    pub fn len(&self) -> usize {
        self.split.pairs.len() + self.merge.pairs.len() + self.stable.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Draws the split, merge and stable strata for quality estimation.
pub fn draw_quality_pairs(pair: &ClusteringPair, sampling: Sampling) -> Result<QualitySample> {
    let sampling = sampling.validate()?;
    let pop = pair.population();
    let total = pop.total_weight();
    let base_w = pair.base().cluster_weights(pop);
    let exp_w = pair.exp().cluster_weights(pop);
    let (base, exp) = (pair.base(), pair.exp());

    let key = |ix: ItemIx| (base.cluster_of(ix), exp.cluster_of(ix));

    let split = PairUniverse::build(
        pop,
        |ix| {
            let b = base.cluster_of(ix);
            (base_w[b] > 0.0).then(|| (key(ix), pop.weight(ix) / total / base_w[b]))
        },
        |(b, e)| {
            base.members(b)
                .iter()
                .filter(|&&m| exp.cluster_of(m) != e)
                .map(|&m| (m, -1))
                .collect()
        },
    );
    let merge = PairUniverse::build(
        pop,
        |ix| {
            let e = exp.cluster_of(ix);
            (exp_w[e] > 0.0).then(|| (key(ix), pop.weight(ix) / total / exp_w[e]))
        },
        |(b, e)| {
            exp.members(e)
                .iter()
                .filter(|&&m| base.cluster_of(m) != b)
                .map(|&m| (m, 1))
                .collect()
        },
    );
    let stable_coef = |(b, e): (usize, usize)| {
        let (wb, we) = (base_w[b], exp_w[e]);
        (wb > 0.0 && we > 0.0 && wb != we).then(|| 1.0 / we - 1.0 / wb)
    };
    let stable = PairUniverse::build(
        pop,
        |ix| stable_coef(key(ix)).map(|c| (key(ix), pop.weight(ix) / total * c.abs())),
        |(b, e)| {
            let sign: i8 = if stable_coef((b, e)).unwrap_or(0.0) > 0.0 {
                1
            } else {
                -1
            };
            base.members(b)
                .iter()
                .filter(|&&m| exp.cluster_of(m) == e)
                .map(|&m| (m, sign))
                .collect()
        },
    );
    Ok(QualitySample {
        split: split.sample(pop, sampling),
        merge: merge.sample(pop, sampling),
        stable: stable.sample(pop, sampling),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateErrors {
    pub good_split_rate: f64,
    pub bad_split_rate: f64,
    pub good_merge_rate: f64,
    pub bad_merge_rate: f64,
    pub delta_precision: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QualityEstimate {
    pub population: QualityRates,
    /// Absent for a noop change.
    pub affected: Option<QualityRates>,
    pub std_errors: RateErrors,
    pub pairs_judged: usize,
    pub sampling: Sampling,
    /// Set when ΔPrecision could not be estimated.
    pub delta_precision_absent_reason: Option<String>,
}

/// Fraction of equivalent pairs, as a share of the stratum mass.
fn equivalence_share(sample: &PairSample, judge: &dyn Judge) -> Result<(f64, f64)> {
    if sample.pairs.is_empty() {
        return Ok((0.0, 0.0));
    }
    let eq = sample
        .pairs
        .iter()
        .map(|p| judge.equivalent(&p.item_a, &p.item_b))
        .collect::<Result<Vec<bool>>>()?;
    Ok(match sample.sampling {
        Sampling::Exhaustive => {
            let v = sample
                .pairs
                .iter()
                .zip(&eq)
                .filter(|(_, &e)| e)
                .map(|(p, _)| p.u)
                .sum();
            (v, 0.0)
        }
        Sampling::Sampled { .. } => {
            let n = eq.len() as f64;
            let p = eq.iter().filter(|&&e| e).count() as f64 / n;
            (
                sample.total_u * p,
                sample.total_u * (p * (1.0 - p) / n).sqrt(),
            )
        }
    })
}

/// Estimates the quality rates from a drawn sample.
pub fn estimate_quality_from_sample(
    sample: &QualitySample,
    judge: &dyn Judge,
    affected_weight_fraction: f64,
) -> Result<QualityEstimate> {
    let (bad_split, se_split) = equivalence_share(&sample.split, judge)?;
    let (good_merge, se_merge) = equivalence_share(&sample.merge, judge)?;
    let split_rate = sample.split.total_u;
    let merge_rate = sample.merge.total_u;

    let (stable_term, absent) = if sample.stable.pairs.is_empty() {
        (Ok(Estimate::exact(0.0, 0)), None)
    } else {
        match signed_estimate(&sample.stable, judge) {
            Ok(e) => (Ok(e), None),
            Err(Error::Unjudged(a, b)) => {
                (Err(()), Some(format!("stable pair ({a}, {b}) is unjudged")))
            }
            Err(e) => return Err(e),
        }
    };
    let (delta_precision, dp_se) = match &stable_term {
        Ok(st) => (
            Some(good_merge - bad_split + st.value),
            Some((se_merge.powi(2) + se_split.powi(2) + st.std_error.powi(2)).sqrt()),
        ),
        Err(()) => (None, None),
    };
    let population = QualityRates {
        scope: Scope::Population,
        split_rate,
        merge_rate,
        good_split_rate: split_rate - bad_split,
        bad_split_rate: bad_split,
        good_merge_rate: good_merge,
        bad_merge_rate: merge_rate - good_merge,
        delta_precision,
    };
    let affected = population.to_affected(affected_weight_fraction).ok();
    Ok(QualityEstimate {
        population,
        affected,
        std_errors: RateErrors {
            good_split_rate: se_split,
            bad_split_rate: se_split,
            good_merge_rate: se_merge,
            bad_merge_rate: se_merge,
            delta_precision: dp_se,
        },
        pairs_judged: sample.len(),
        sampling: sample.split.sampling,
        delta_precision_absent_reason: absent,
    })
}

/// Draws pairs from the diff and classifies them with `judge`.
pub fn estimate_quality_rates(
    pair: &ClusteringPair,
    judge: &dyn Judge,
    sampling: Sampling,
) -> Result<QualityEstimate> {
    let sample = draw_quality_pairs(pair, sampling)?;
    let awf = affected_items(pair).fraction;
    estimate_quality_from_sample(&sample, judge, awf)
}

/// Writes pairs as a judgement manifest: `item_a<TAB>item_b<TAB>u<TAB>l`.
pub fn write_manifest<'a>(pairs: impl IntoIterator<Item = &'a WeightedPair>) -> String {
    let mut out = String::from("# item_a\titem_b\tu\tl\n");
    for p in pairs {
        out.push_str(&format!(
            "{}\t{}\t{:e}\t{}\n",
            p.item_a, p.item_b, p.u, p.sign
        ));
    }
    out
}

pub fn parse_manifest(text: &str) -> Result<Vec<WeightedPair>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(n, line)| {
            let err = |m: &str| Error::Parse {
                line: n + 1,
                message: m.to_string(),
            };
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 4 {
                return Err(err("expected item_a<TAB>item_b<TAB>u<TAB>l"));
            }
            Ok(WeightedPair {
                item_a: f[0].to_string(),
                item_b: f[1].to_string(),
                u: f[2].parse().map_err(|_| err("bad u"))?,
                sign: match f[3].trim() {
                    "1" => 1,
                    "-1" => -1,
                    _ => return Err(err("l must be 1 or -1")),
                },
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Clustering, Item};

    fn world(base: &[u8], exp: &[u8], ideal: &[u8]) -> (ClusteringPair, Partition, Clustering) {
        let ids: Vec<String> = (0..base.len()).map(|i| format!("x{i:02}")).collect();
        let pop = Population::unit(ids).unwrap();
        let ideal = Partition::from_labels(ideal);
        let pair = ClusteringPair::new(
            pop.clone(),
            Partition::from_labels(base),
            Partition::from_labels(exp),
        )
        .unwrap();
        let ideal_c = Clustering::from_partition(pop, ideal.clone()).unwrap();
        (pair, ideal, ideal_c)
    }

    #[test]
    fn identical_change_has_zero_rates() {
        let (pair, ideal, _) = world(&[0, 0, 1], &[0, 0, 1], &[0, 1, 1]);
        let r = exact_quality(&pair, &ideal, Scope::Population).unwrap();
        assert_eq!(
            r.good_split_rate + r.bad_split_rate + r.good_merge_rate + r.bad_merge_rate,
            0.0
        );
        assert_eq!(r.delta_precision, Some(0.0));
        assert!(matches!(
            exact_quality(&pair, &ideal, Scope::Affected),
            Err(Error::NoopChange)
        ));
    }

    #[test]
    fn hand_venn_example_rates() {
        // Item x00 is i: Base(i)={i,a,b}, Exp(i)={i,a}, Ideal(i)={i,a,c}.
        let (pair, ideal, _) = world(&[0, 0, 0, 1], &[0, 0, 1, 2], &[0, 0, 1, 0]);
        let table = VennTable::new(&pair, &ideal).unwrap();
        let v = table.get(0);
        assert!((v.good_split_rate() - 1.0 / 3.0).abs() < 1e-15);
        assert!((v.delta_precision() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn exp_equals_ideal_has_no_bad_merges() {
        // Base mixes {0,1,2} | {3,4,5} across ideal classes; Exp is the ideal.
        let ideal = [0, 0, 1, 1, 2, 2];
        let (pair, ideal_p, _) = world(&[0, 0, 0, 1, 1, 1], &ideal, &ideal);
        let r = exact_quality(&pair, &ideal_p, Scope::Population).unwrap();
        assert_eq!(r.bad_merge_rate, 0.0);
        assert_eq!(r.bad_split_rate, 0.0);
        // Brute force: items 0,1 lose {2} (good split 1/3 each), item 2 loses
        // {0,1} (2/3) and gains {3} (good merge 1/2); 3 loses {4,5} (2/3) and
        // gains {2} (1/2); 4,5 lose {3} (1/3).
        let gsr = (1.0 / 3.0 + 1.0 / 3.0 + 2.0 / 3.0 + 2.0 / 3.0 + 1.0 / 3.0 + 1.0 / 3.0) / 6.0;
        assert!((r.good_split_rate - gsr).abs() < 1e-15);
        assert!((r.good_merge_rate - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn empty_universe_for_noop() {
        let (pair, ideal, _) = world(&[0, 0, 1], &[0, 0, 1], &[0, 1, 1]);
        let w = ideal_weights(pair.population(), &ideal);
        let s = sample_delta_recall_pairs(&pair, &w, 10, 1).unwrap();
        assert!(s.is_empty());
        assert_eq!(s.total_u, 0.0);
        assert!(matches!(
            estimate_delta_recall(&s, &NoJudge),
            Err(Error::EmptySample)
        ));
        assert!(matches!(
            sample_delta_recall_pairs(&pair, &w, 0, 1),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn one_point_distribution() {
        // Only x00 and x01 change: x01 is split off from x00.
        let (pair, ideal, judge) = world(&[0, 0, 1], &[0, 2, 1], &[0, 0, 1]);
        let w = ideal_weights(pair.population(), &ideal);
        let s = sample_delta_recall_pairs(&pair, &w, 50, 7).unwrap();
        let first = &s.pairs[0];
        assert!(s.pairs.iter().all(|p| p.sign == -1));
        assert!(s.pairs.iter().all(|p| {
            (p.item_a == "x00" && p.item_b == "x01") || (p.item_a == "x01" && p.item_b == "x00")
        }));
        assert_eq!(first.sign, -1);
        // Both sides are bad splits: the estimate is exactly -total_u.
        let est = estimate_delta_recall(&s, &IdealJudge::new(&judge)).unwrap();
        assert!((est.value + s.total_u).abs() < 1e-15);
    }

    #[test]
    fn seeded_sampling_is_deterministic() {
        let (pair, ideal, _) = world(&[0, 0, 0, 1, 1], &[0, 1, 1, 1, 2], &[0, 0, 1, 1, 1]);
        let w = ideal_weights(pair.population(), &ideal);
        let a = sample_delta_recall_pairs(&pair, &w, 200, 42).unwrap();
        let b = sample_delta_recall_pairs(&pair, &w, 200, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_delta_recall_pairs(&pair, &w, 200, 43).unwrap();
        assert_ne!(a.pairs, c.pairs);
    }

    #[test]
    fn judge_saying_never_gives_zero() {
        struct Never;
        impl Judge for Never {
            fn equivalent(&self, a: &str, b: &str) -> Result<bool> {
                Ok(a == b)
            }
        }
        let (pair, ideal, _) = world(&[0, 0, 0, 1, 1], &[0, 1, 1, 1, 2], &[0, 0, 1, 1, 1]);
        let w = ideal_weights(pair.population(), &ideal);
        let s = sample_delta_recall_pairs(&pair, &w, 100, 3).unwrap();
        assert_eq!(estimate_delta_recall(&s, &Never).unwrap().value, 0.0);
    }

    #[test]
    fn always_equivalent_judge_saturates() {
        struct Always;
        impl Judge for Always {
            fn equivalent(&self, _: &str, _: &str) -> Result<bool> {
                Ok(true)
            }
        }
        let (pair, _, _) = world(&[0, 0, 0, 1, 1], &[0, 1, 1, 1, 2], &[0, 0, 1, 1, 1]);
        let est =
            estimate_quality_rates(&pair, &Always, Sampling::Sampled { n: 500, seed: 9 }).unwrap();
        let r = est.population;
        assert_eq!(r.good_merge_rate, r.merge_rate);
        assert_eq!(r.bad_split_rate, r.split_rate);
        assert_eq!(r.good_split_rate, 0.0);
        assert_eq!(r.bad_merge_rate, 0.0);
    }

    #[test]
    fn verdict_judge_parses_and_is_symmetric() {
        let j = VerdictJudge::parse("a\tb\t1\n# c\nb\tc\t0\n").unwrap();
        assert!(j.equivalent("b", "a").unwrap());
        assert!(!j.equivalent("c", "b").unwrap());
        assert!(j.equivalent("z", "z").unwrap());
        assert!(matches!(j.equivalent("a", "c"), Err(Error::Unjudged(..))));
        assert!(VerdictJudge::parse("a\tb\t2\n").is_err());
        assert!(VerdictJudge::parse("a\tb\t1\nb\ta\t0\n").is_err());
    }

    #[test]
    fn stable_pairs_unjudged_flags_delta_precision_absent() {
        let (pair, _, _) = world(&[0, 0, 0, 1], &[0, 0, 1, 1], &[0, 0, 1, 1]);
        let sample = draw_quality_pairs(&pair, Sampling::Exhaustive).unwrap();
        // Answer every split/merge pair, none of the stable ones.
        let mut text = String::new();
        for p in sample.split.pairs.iter().chain(&sample.merge.pairs) {
            text.push_str(&format!("{}\t{}\t0\n", p.item_a, p.item_b));
        }
        let judge = VerdictJudge::parse(&text).unwrap();
        let est = estimate_quality_from_sample(&sample, &judge, 1.0).unwrap();
        assert!(est.population.delta_precision.is_none());
        assert!(est.delta_precision_absent_reason.is_some());
    }

    #[test]
    fn manifest_roundtrip() {
        let pairs = vec![
            WeightedPair {
                item_a: "a".into(),
                item_b: "b".into(),
                u: 0.125,
                sign: -1,
            },
            WeightedPair {
                item_a: "c".into(),
                item_b: "d".into(),
                u: 1.0 / 3.0,
                sign: 1,
            },
        ];
        let back = parse_manifest(&write_manifest(&pairs)).unwrap();
        assert_eq!(back, pairs);
    }

    #[test]
    fn weighted_population_exhaustive_matches_exact() {
        let pop = Population::new(
            [("a", 1.0), ("b", 2.5), ("c", 0.5), ("d", 4.0), ("e", 1.5)]
                .iter()
                .map(|(i, w)| Item::new(*i, *w))
                .collect(),
        )
        .unwrap();
        let ideal = Partition::from_labels(&[0, 0, 1, 1, 0]);
        let pair = ClusteringPair::new(
            pop.clone(),
            Partition::from_labels(&[0, 0, 0, 1, 1]),
            Partition::from_labels(&[0, 1, 1, 1, 0]),
        )
        .unwrap();
        let judge = IdealJudge::new(&Clustering::from_partition(pop, ideal.clone()).unwrap());
        let exact = exact_quality(&pair, &ideal, Scope::Population).unwrap();
        let est = estimate_quality_rates(&pair, &judge, Sampling::Exhaustive)
            .unwrap()
            .population;
        for (a, b) in [
            (exact.good_split_rate, est.good_split_rate),
            (exact.bad_split_rate, est.bad_split_rate),
            (exact.good_merge_rate, est.good_merge_rate),
            (exact.bad_merge_rate, est.bad_merge_rate),
            (exact.delta_precision.unwrap(), est.delta_precision.unwrap()),
        ] {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }
}
