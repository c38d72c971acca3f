//! Items, weighted populations, clusterings and the Base/Exp pair view.
//!
//! Items are stored in ascending id order and referred to by their index in
//! that order. Every weight sum in the crate walks indices in ascending order,
//! so results are bit-stable across runs and platforms.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::hash::Hash;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of an item within its [`Population`] (ascending id order).
pub type ItemIx = usize;

/// Divides, treating an empty (zero-weight) denominator as a zero ratio.
///
/// Only reachable for zero-weight items, whose pointwise values never
/// contribute to a lifted metric.
pub(crate) fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Item {
    pub id: String,
    pub weight: f64,
}

impl Item {
    pub fn new(id: impl Into<String>, weight: f64) -> Self {
        Self {
            id: id.into(),
            weight,
        }
    }
}

/// A finite set of uniquely identified, non-negatively weighted items.
#[derive(Clone, Debug)]
pub struct Population {
    ids: Vec<String>,
    weights: Vec<f64>,
    index: HashMap<String, ItemIx>,
    total: f64,
}

impl PartialEq for Population {
    fn eq(&self, other: &Self) -> bool {
        self.ids == other.ids && self.weights == other.weights
    }
}

impl Population {
    pub fn new(mut items: Vec<Item>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::EmptyPopulation);
        }
        items.sort_by(|a, b| a.id.cmp(&b.id));
        for pair in items.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(Error::Validation(format!(
                    "duplicate item `{}`",
                    pair[0].id
                )));
            }
        }
        for item in &items {
            if !item.weight.is_finite() || item.weight < 0.0 {
                return Err(Error::Validation(format!(
                    "item `{}` has invalid weight {}",
                    item.id, item.weight
                )));
            }
        }
        let total: f64 = items.iter().map(|i| i.weight).sum();
        if total <= 0.0 {
            return Err(Error::Validation("population has zero total weight".into()));
        }
        let index = items
            .iter()
            .enumerate()
            .map(|(ix, item)| (item.id.clone(), ix))
            .collect();
        let (ids, weights) = items.into_iter().map(|i| (i.id, i.weight)).unzip();
        Ok(Self {
            ids,
            weights,
            index,
            total,
        })
    }

    /// Unit-weight population over the given ids.
    pub fn unit<S: Into<String>>(ids: impl IntoIterator<Item = S>) -> Result<Self> {
        Self::new(ids.into_iter().map(|id| Item::new(id, 1.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, ix: ItemIx) -> &str {
        &self.ids[ix]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, ix: ItemIx) -> f64 {
        self.weights[ix]
    }

    pub fn total_weight(&self) -> f64 {
        self.total
    }

    pub fn get(&self, id: &str) -> Option<ItemIx> {
        self.index.get(id).copied()
    }

    pub fn lookup(&self, id: &str) -> Result<ItemIx> {
        self.get(id)
            .ok_or_else(|| Error::UnknownItem(id.to_string()))
    }

    /// Sum of weights over ascending member indices.
    pub fn weight_of(&self, members: &[ItemIx]) -> f64 {
        members.iter().map(|&m| self.weights[m]).sum()
    }

    pub fn items(&self) -> impl Iterator<Item = Item> + '_ {
        self.ids
            .iter()
            .zip(&self.weights)
            .map(|(id, &w)| Item::new(id.clone(), w))
    }
}

/// A partition of the items `0..n` of some population.
///
/// Cluster numbers are canonical: clusters are numbered in order of their
/// smallest member, so two partitions are equal iff they group items the
/// same way, whatever labels they were built from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    labels: Vec<usize>,
    members: Vec<Vec<ItemIx>>,
}

impl Partition {
    pub fn from_labels<L: Hash + Eq>(labels: &[L]) -> Self {
        let mut canon: HashMap<&L, usize> = HashMap::new();
        let mut members: Vec<Vec<ItemIx>> = Vec::new();
        let labels = labels
            .iter()
            .enumerate()
            .map(|(ix, l)| {
                let next = canon.len();
                let c = *canon.entry(l).or_insert(next);
                if c == members.len() {
                    members.push(Vec::new());
                }
                members[c].push(ix);
                c
            })
            .collect();
        Self { labels, members }
    }

    /// Every item in a cluster of its own.
    pub fn singletons(n: usize) -> Self {
        Self {
            labels: (0..n).collect(),
            members: (0..n).map(|i| vec![i]).collect(),
        }
    }

    /// All items in one cluster.
    pub fn single_cluster(n: usize) -> Self {
        Self {
            labels: vec![0; n],
            members: if n == 0 {
                vec![]
            } else {
                vec![(0..n).collect()]
            },
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_clusters(&self) -> usize {
        self.members.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn cluster_of(&self, ix: ItemIx) -> usize {
        self.labels[ix]
    }

    pub fn members(&self, cluster: usize) -> &[ItemIx] {
        &self.members[cluster]
    }

    /// The members of the cluster containing `ix`, ascending.
    pub fn cluster_members_of(&self, ix: ItemIx) -> &[ItemIx] {
        &self.members[self.labels[ix]]
    }

    pub fn clusters(&self) -> impl Iterator<Item = &[ItemIx]> {
        self.members.iter().map(Vec::as_slice)
    }

    pub fn together(&self, a: ItemIx, b: ItemIx) -> bool {
        self.labels[a] == self.labels[b]
    }

    pub fn is_all_singletons(&self) -> bool {
        self.members.len() == self.labels.len()
    }

    /// Restricts to the given ascending item subset, renumbering items to
    /// `0..keep.len()`.
    pub fn restrict(&self, keep: &[ItemIx]) -> Self {
        let labels: Vec<usize> = keep.iter().map(|&ix| self.labels[ix]).collect();
        Self::from_labels(&labels)
    }

    pub(crate) fn cluster_weights(&self, population: &Population) -> Vec<f64> {
        self.members
            .iter()
            .map(|m| population.weight_of(m))
            .collect()
    }
}

/// A clustering of a weighted population, as loaded from a file.
#[derive(Clone, Debug, PartialEq)]
pub struct Clustering {
    population: Population,
    partition: Partition,
    cluster_names: Vec<String>,
}

impl Clustering {
    /// Builds a clustering from `(item, cluster, weight)` rows.
    pub fn from_rows<I, S, C>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, C, f64)>,
        S: Into<String>,
        C: Into<String>,
    {
        let mut rows: Vec<(String, String, f64)> = rows
            .into_iter()
            .map(|(i, c, w)| (i.into(), c.into(), w))
            .collect();
        let population = Population::new(
            rows.iter()
                .map(|(i, _, w)| Item::new(i.clone(), *w))
                .collect(),
        )?;
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        let cluster_ids: Vec<&str> = rows.iter().map(|r| r.1.as_str()).collect();
        let partition = Partition::from_labels(&cluster_ids);
        let mut cluster_names = vec![String::new(); partition.num_clusters()];
        for (ix, name) in cluster_ids.iter().enumerate() {
            cluster_names[partition.cluster_of(ix)] = (*name).to_string();
        }
        Ok(Self {
            population,
            partition,
            cluster_names,
        })
    }

    /// Wraps a partition; clusters are named by their canonical number.
    pub fn from_partition(population: Population, partition: Partition) -> Result<Self> {
        if population.len() != partition.len() {
            return Err(Error::Validation(format!(
                "partition covers {} items but population has {}",
                partition.len(),
                population.len()
            )));
        }
        let cluster_names = (0..partition.num_clusters())
            .map(|c| format!("c{c}"))
            .collect();
        Ok(Self {
            population,
            partition,
            cluster_names,
        })
    }

    pub fn population(&self) -> &Population {
        &self.population
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn cluster_name(&self, cluster: usize) -> &str {
        &self.cluster_names[cluster]
    }

    pub fn len(&self) -> usize {
        self.population.len()
    }

    pub fn is_empty(&self) -> bool {
        self.population.is_empty()
    }

    /// Member ids of the cluster containing `id`.
    pub fn cluster_of(&self, id: &str) -> Result<Vec<&str>> {
        let ix = self.population.lookup(id)?;
        Ok(self
            .partition
            .cluster_members_of(ix)
            .iter()
            .map(|&m| self.population.id(m))
            .collect())
    }

    /// Serializes in the TSV clustering file format.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for ix in 0..self.len() {
            let _ = writeln!(
                out,
                "{}\t{}\t{}",
                self.population.id(ix),
                self.cluster_names[self.partition.cluster_of(ix)],
                self.population.weight(ix)
            );
        }
        out
    }
}

/// Parses the TSV clustering format: `item_id<TAB>cluster_id[<TAB>weight]`,
/// with blank lines and `#` comments ignored. The weight defaults to 1.
pub fn parse_clustering(text: &str) -> Result<Clustering> {
    let mut rows = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() < 2 || fields.len() > 3 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 2 or 3 tab-separated fields, got {}", fields.len()),
            });
        }
        let (item, cluster) = (fields[0].trim(), fields[1].trim());
        if item.is_empty() || cluster.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: "empty item or cluster id".into(),
            });
        }
        let weight = match fields.get(2).map(|w| w.trim()) {
            None | Some("") => 1.0,
            Some(w) => w.parse::<f64>().map_err(|e| Error::Parse {
                line: line_no,
                message: format!("bad weight `{w}`: {e}"),
            })?,
        };
        if !weight.is_finite() || weight < 0.0 {
            return Err(Error::Validation(format!(
                "line {line_no}: item `{item}` has negative or non-finite weight {weight}"
            )));
        }
        if let Some(prev) = seen.insert(item.to_string(), line_no) {
            return Err(Error::Validation(format!(
                "line {line_no}: duplicate item `{item}` (first seen on line {prev})"
            )));
        }
        rows.push((item.to_string(), cluster.to_string(), weight));
    }
    if rows.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    Clustering::from_rows(rows)
}

pub fn load_clustering(path: impl AsRef<Path>) -> Result<Clustering> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_clustering(&text)
}

/// What [`restrict_to_common`] dropped or overrode.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RestrictionReport {
    pub dropped_base_only: usize,
    pub dropped_exp_only: usize,
    pub dropped: usize,
    /// Items whose Exp weight differed from the Base weight; Base wins.
    pub weight_conflicts: Vec<String>,
}

/// Two clusterings over one shared population.
#[derive(Clone, Debug)]
pub struct ClusteringPair {
    population: Population,
    base: Partition,
    exp: Partition,
    restriction: RestrictionReport,
}

impl ClusteringPair {
    pub fn new(population: Population, base: Partition, exp: Partition) -> Result<Self> {
        if base.len() != population.len() || exp.len() != population.len() {
            return Err(Error::Validation(
                "base and exp must cover exactly the population".into(),
            ));
        }
        Ok(Self {
            population,
            base,
            exp,
            restriction: RestrictionReport::default(),
        })
    }

    pub fn population(&self) -> &Population {
        &self.population
    }

    pub fn base(&self) -> &Partition {
        &self.base
    }

    pub fn exp(&self) -> &Partition {
        &self.exp
    }

    pub fn restriction(&self) -> &RestrictionReport {
        &self.restriction
    }

    pub fn base_clustering(&self) -> Clustering {
        Clustering::from_partition(self.population.clone(), self.base.clone())
            .expect("pair invariant")
    }

    pub fn exp_clustering(&self) -> Clustering {
        Clustering::from_partition(self.population.clone(), self.exp.clone())
            .expect("pair invariant")
    }

    /// The pair with Base and Exp swapped.
    pub fn swapped(&self) -> Self {
        Self {
            population: self.population.clone(),
            base: self.exp.clone(),
            exp: self.base.clone(),
            restriction: self.restriction.clone(),
        }
    }

    /// Projects another clustering (typically the Ideal) onto this pair's
    /// population. Items of `other` outside the population are ignored;
    /// population items missing from `other` are an error.
    pub fn align(&self, other: &Clustering) -> Result<Partition> {
        let keep = self
            .population
            .ids()
            .iter()
            .map(|id| {
                other
                    .population()
                    .get(id)
                    .ok_or_else(|| Error::UnknownItem(id.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        // `keep` is ascending because both populations are sorted by id.
        Ok(other.partition().restrict(&keep))
    }

    pub fn is_noop(&self) -> bool {
        self.base == self.exp
    }
}

/// Restricts two clusterings to the items they have in common.
pub fn restrict_to_common(base: &Clustering, exp: &Clustering) -> Result<ClusteringPair> {
    let bp = base.population();
    let ep = exp.population();
    let mut keep_base = Vec::new();
    let mut keep_exp = Vec::new();
    let mut items = Vec::new();
    let mut conflicts = Vec::new();
    for (bix, id) in bp.ids().iter().enumerate() {
        if let Some(eix) = ep.get(id) {
            keep_base.push(bix);
            keep_exp.push(eix);
            let w = bp.weight(bix);
            if ep.weight(eix) != w {
                conflicts.push(id.clone());
            }
            items.push(Item::new(id.clone(), w));
        }
    }
    if items.is_empty() {
        return Err(Error::NoCommonItems);
    }
    let population = Population::new(items)?;
    let dropped_base_only = bp.len() - keep_base.len();
    let dropped_exp_only = ep.len() - keep_exp.len();
    Ok(ClusteringPair {
        base: base.partition().restrict(&keep_base),
        exp: exp.partition().restrict(&keep_exp),
        population,
        restriction: RestrictionReport {
            dropped_base_only,
            dropped_exp_only,
            dropped: dropped_base_only + dropped_exp_only,
            weight_conflicts: conflicts,
        },
    })
}

/// The seven region weights of the Base/Exp/Ideal diagram around one item.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VennWeights {
    pub good_stable: f64,
    pub bad_stable: f64,
    pub good_split: f64,
    pub bad_split: f64,
    pub good_merge: f64,
    pub bad_merge: f64,
    pub missing: f64,
}

impl VennWeights {
    pub fn base_weight(&self) -> f64 {
        self.good_stable + self.bad_stable + self.good_split + self.bad_split
    }

    pub fn exp_weight(&self) -> f64 {
        self.good_stable + self.bad_stable + self.good_merge + self.bad_merge
    }

    pub fn ideal_weight(&self) -> f64 {
        self.good_stable + self.bad_split + self.good_merge + self.missing
    }

    pub fn stable_weight(&self) -> f64 {
        self.good_stable + self.bad_stable
    }

    pub fn split_rate(&self) -> f64 {
        ratio(self.good_split + self.bad_split, self.base_weight())
    }

    pub fn merge_rate(&self) -> f64 {
        ratio(self.good_merge + self.bad_merge, self.exp_weight())
    }

    pub fn good_split_rate(&self) -> f64 {
        ratio(self.good_split, self.base_weight())
    }

    pub fn bad_split_rate(&self) -> f64 {
        ratio(self.bad_split, self.base_weight())
    }

    pub fn good_merge_rate(&self) -> f64 {
        ratio(self.good_merge, self.exp_weight())
    }

    pub fn bad_merge_rate(&self) -> f64 {
        ratio(self.bad_merge, self.exp_weight())
    }

    pub fn precision_base(&self) -> f64 {
        ratio(self.good_stable + self.bad_split, self.base_weight())
    }

    pub fn precision_exp(&self) -> f64 {
        ratio(self.good_stable + self.good_merge, self.exp_weight())
    }

    pub fn recall_base(&self) -> f64 {
        ratio(self.good_stable + self.bad_split, self.ideal_weight())
    }

    pub fn recall_exp(&self) -> f64 {
        ratio(self.good_stable + self.good_merge, self.ideal_weight())
    }

    pub fn delta_precision(&self) -> f64 {
        self.precision_exp() - self.precision_base()
    }

    pub fn delta_recall(&self) -> f64 {
        self.recall_exp() - self.recall_base()
    }
}

fn regions(
    population: &Population,
    base: &Partition,
    exp: &Partition,
    ideal: &Partition,
    ix: ItemIx,
) -> VennWeights {
    let (b, e, d) = (
        base.cluster_of(ix),
        exp.cluster_of(ix),
        ideal.cluster_of(ix),
    );
    let mut v = VennWeights::default();
    for &m in base.members(b) {
        let w = population.weight(m);
        match (exp.cluster_of(m) == e, ideal.cluster_of(m) == d) {
            (true, true) => v.good_stable += w,
            (true, false) => v.bad_stable += w,
            (false, true) => v.bad_split += w,
            (false, false) => v.good_split += w,
        }
    }
    for &m in exp.members(e) {
        if base.cluster_of(m) == b {
            continue;
        }
        let w = population.weight(m);
        if ideal.cluster_of(m) == d {
            v.good_merge += w;
        } else {
            v.bad_merge += w;
        }
    }
    for &m in ideal.members(d) {
        if base.cluster_of(m) != b && exp.cluster_of(m) != e {
            v.missing += population.weight(m);
        }
    }
    v
}

/// Exact region weights around `id`, by enumerating Base(i) ∪ Exp(i) ∪ Ideal(i).
pub fn venn_weights(pair: &ClusteringPair, ideal: &Partition, id: &str) -> Result<VennWeights> {
    let ix = pair.population.lookup(id)?;
    if ideal.len() != pair.population.len() {
        return Err(Error::Validation(
            "ideal must cover the pair population".into(),
        ));
    }
    Ok(regions(&pair.population, &pair.base, &pair.exp, ideal, ix))
}

/// Region weights for every item of a pair against an ideal partition.
///
/// Items sharing the same (Base, Exp, Ideal) clusters share one diagram, so
/// each distinct triple is enumerated once.
#[derive(Clone, Debug)]
pub struct VennTable {
    per_item: Vec<VennWeights>,
}

impl VennTable {
    pub fn new(pair: &ClusteringPair, ideal: &Partition) -> Result<Self> {
        if ideal.len() != pair.population.len() {
            return Err(Error::Validation(
                "ideal must cover the pair population".into(),
            ));
        }
        let mut cache: HashMap<(usize, usize, usize), VennWeights> = HashMap::new();
        let per_item = (0..pair.population.len())
            .map(|ix| {
                let key = (
                    pair.base.cluster_of(ix),
                    pair.exp.cluster_of(ix),
                    ideal.cluster_of(ix),
                );
                *cache
                    .entry(key)
                    .or_insert_with(|| regions(&pair.population, &pair.base, &pair.exp, ideal, ix))
            })
            .collect();
        Ok(Self { per_item })
    }

    pub fn get(&self, ix: ItemIx) -> &VennWeights {
        &self.per_item[ix]
    }

    pub fn iter(&self) -> impl Iterator<Item = &VennWeights> {
        self.per_item.iter()
    }

    pub fn len(&self) -> usize {
        self.per_item.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_item.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clustering(rows: &[(&str, &str)]) -> Clustering {
        Clustering::from_rows(rows.iter().map(|(i, c)| (*i, *c, 1.0))).unwrap()
    }

    #[test]
    fn parses_three_rows() {
        let c = parse_clustering("a\tc1\t1.0\nb\tc1\t1.0\nc\tc2\t2.0\n").unwrap();
        assert_eq!(c.population().total_weight(), 4.0);
        assert_eq!(c.partition().num_clusters(), 2);
        assert_eq!(c.cluster_of("a").unwrap(), vec!["a", "b"]);
        assert_eq!(c.cluster_of("c").unwrap(), vec!["c"]);
    }

    #[test]
    fn comments_and_default_weight() {
        let c = parse_clustering("# header\n\nx\tk\ny\tk\t3\n").unwrap();
        assert_eq!(c.population().weights(), &[1.0, 3.0]);
    }

    #[test]
    fn empty_file_is_error() {
        assert!(matches!(parse_clustering(""), Err(Error::EmptyPopulation)));
        assert!(matches!(
            parse_clustering("# only a comment\n"),
            Err(Error::EmptyPopulation)
        ));
    }

    #[test]
    fn negative_weight_is_validation_error() {
        let err = parse_clustering("a\tc1\t-1").unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
    }

    #[test]
    fn malformed_row_reports_line() {
        let err = parse_clustering("a\tc1\nb\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_clustering("a\tc1\tx\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn duplicate_item_is_validation_error() {
        let err = parse_clustering("a\tc1\na\tc2\n").unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
    }

    #[test]
    fn restrict_drops_unshared_items() {
        let base = clustering(&[("a", "x"), ("b", "x"), ("c", "y")]);
        let exp = clustering(&[("b", "p"), ("c", "p"), ("d", "q")]);
        let pair = restrict_to_common(&base, &exp).unwrap();
        assert_eq!(pair.population().ids(), &["b", "c"]);
        assert_eq!(pair.restriction().dropped, 2);
        assert!(!pair.base().together(0, 1));
        assert!(pair.exp().together(0, 1));
    }

    #[test]
    fn restrict_identical_and_disjoint() {
        let base = clustering(&[("a", "x"), ("b", "y")]);
        let pair = restrict_to_common(&base, &base).unwrap();
        assert_eq!(pair.restriction().dropped, 0);
        assert!(pair.is_noop());

        let other = clustering(&[("z", "x")]);
        assert!(matches!(
            restrict_to_common(&base, &other),
            Err(Error::NoCommonItems)
        ));
    }

    #[test]
    fn restrict_is_idempotent() {
        let base = clustering(&[("a", "x"), ("b", "x"), ("c", "y"), ("e", "y")]);
        let exp = clustering(&[("b", "p"), ("c", "p"), ("d", "q"), ("e", "q")]);
        let once = restrict_to_common(&base, &exp).unwrap();
        let twice = restrict_to_common(&once.base_clustering(), &once.exp_clustering()).unwrap();
        assert_eq!(once.population(), twice.population());
        assert_eq!(once.base(), twice.base());
        assert_eq!(once.exp(), twice.exp());
        assert_eq!(twice.restriction().dropped, 0);
    }

    #[test]
    fn base_weight_wins_on_conflict() {
        let base = Clustering::from_rows([("a", "x", 2.0), ("b", "x", 1.0)]).unwrap();
        let exp = Clustering::from_rows([("a", "x", 5.0), ("b", "x", 1.0)]).unwrap();
        let pair = restrict_to_common(&base, &exp).unwrap();
        assert_eq!(pair.population().weight(0), 2.0);
        assert_eq!(pair.restriction().weight_conflicts, vec!["a".to_string()]);
    }

    #[test]
    fn partition_is_canonical() {
        let a = Partition::from_labels(&["q", "r", "q"]);
        let b = Partition::from_labels(&[7, 3, 7]);
        assert_eq!(a, b);
        assert_eq!(a.cluster_members_of(2), &[0, 2]);
    }

    fn venn_for(base: &[&str], exp: &[&str], ideal: &[&str], id: &str) -> VennWeights {
        let ids: Vec<String> = ["a", "b", "c", "i", "x"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let pop = Population::unit(ids.clone()).unwrap();
        let labels = |members: &[&str]| -> Partition {
            // Members form one cluster; everybody else is a singleton.
            let l: Vec<String> = ids
                .iter()
                .map(|id| {
                    if members.contains(&id.as_str()) {
                        "k".to_string()
                    } else {
                        id.clone()
                    }
                })
                .collect();
            Partition::from_labels(&l)
        };
        let pair = ClusteringPair::new(pop, labels(base), labels(exp)).unwrap();
        venn_weights(&pair, &labels(ideal), id).unwrap()
    }

    #[test]
    fn venn_hand_example() {
        let v = venn_for(&["i", "a", "b"], &["i", "a"], &["i", "a", "c"], "i");
        assert_eq!(
            v,
            VennWeights {
                good_stable: 2.0,
                bad_stable: 0.0,
                good_split: 1.0,
                bad_split: 0.0,
                good_merge: 0.0,
                bad_merge: 0.0,
                missing: 1.0,
            }
        );
        assert_eq!(v.base_weight(), 3.0);
        assert_eq!(v.exp_weight(), 2.0);
        assert_eq!(v.ideal_weight(), 3.0);
    }

    #[test]
    fn venn_singleton() {
        let v = venn_for(&["i"], &["i"], &["i"], "i");
        assert_eq!(
            v,
            VennWeights {
                good_stable: 1.0,
                ..Default::default()
            }
        );
    }

    #[test]
    fn venn_bad_stable() {
        let v = venn_for(&["i", "x"], &["i", "x"], &["i"], "i");
        assert_eq!(v.good_stable, 1.0);
        assert_eq!(v.bad_stable, 1.0);
        assert_eq!(v.base_weight(), 2.0);
        assert_eq!(v.ideal_weight(), 1.0);
    }

    #[test]
    fn venn_unknown_item() {
        let base = clustering(&[("a", "x")]);
        let pair = restrict_to_common(&base, &base).unwrap();
        let err = venn_weights(&pair, pair.base(), "nope").unwrap_err();
        assert!(matches!(err, Error::UnknownItem(_)));
    }
}
