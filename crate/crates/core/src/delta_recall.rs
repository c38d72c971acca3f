//! ΔRecall reasoning without knowing `weight(Ideal(i))`.
//!
//! Per item, the Venn diagram of Base(i), Exp(i) and Ideal(i) is completed
//! from observable rates plus an assumed baseline recall, with
//! GoodStableWeight taken either from ΔPrecision (variant 1) or from an
//! assumed baseline precision (variant 2). The aggregate reasoning builds one
//! diagram for a "typical" affected item from the affected-scope rates and
//! rescales its ΔRecall by the affected weight fraction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::impact::ImpactMetrics;
use crate::model::VennWeights;
use crate::quality::QualityRates;

/// Slack allowed when comparing against analytic bounds.
const BOUND_TOL: f64 = 1e-12;

/// `SplitRate = MergeRate` below this difference makes variant 1 inapplicable.
pub const V1_RATE_TOL: f64 = 1e-12;

/// The three Venn regions that determine the recall bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VennPartial {
    pub bad_split: f64,
    pub good_stable: f64,
    pub good_merge: f64,
}

impl From<&VennWeights> for VennPartial {
    fn from(v: &VennWeights) -> Self {
        Self {
            bad_split: v.bad_split,
            good_stable: v.good_stable,
            good_merge: v.good_merge,
        }
    }
}

impl VennPartial {
    /// Largest Recall_Base compatible with a non-negative missing weight.
    pub fn recall_bound(&self) -> f64 {
        let known = self.bad_split + self.good_stable;
        known / (known + self.good_merge)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdealFromRecall {
    pub ideal_weight: f64,
    pub missing: f64,
}

pub fn ideal_weight_from_recall(
    partial: &VennPartial,
    recall_base: f64,
) -> Result<IdealFromRecall> {
    let bound = partial.recall_bound();
    if !(recall_base > 0.0 && recall_base <= bound + BOUND_TOL) {
        return Err(Error::Infeasible {
            name: "recall_base",
            value: recall_base,
            lower: 0.0,
            upper: bound,
        });
    }
    let ideal_weight = (partial.bad_split + partial.good_stable) / recall_base;
    let missing = ideal_weight - partial.bad_split - partial.good_stable - partial.good_merge;
    Ok(IdealFromRecall {
        ideal_weight,
        missing: missing.max(0.0),
    })
}

fn v1_raw(rates: &QualityRates, w_base: f64) -> Result<f64> {
    let delta_precision = rates
        .delta_precision
        .ok_or_else(|| Error::VariantInapplicable {
            variant: 1,
            reason: "ΔPrecision is unavailable".into(),
        })?;
    let gap = rates.split_rate - rates.merge_rate;
    if gap.abs() < V1_RATE_TOL {
        return Err(Error::VariantInapplicable {
            variant: 1,
            reason: format!(
                "split rate {} equals merge rate {}",
                rates.split_rate, rates.merge_rate
            ),
        });
    }
    Ok(
        (delta_precision - rates.good_merge_rate + rates.bad_split_rate)
            * (1.0 - rates.split_rate)
            * w_base
            / gap,
    )
}

/// GoodStableWeight from ΔPrecision. The caller is responsible for clipping.
pub fn good_stable_weight_v1(rates: &QualityRates, w_base: f64) -> Result<f64> {
    v1_raw(rates, w_base)
}

/// Feasible range of Precision_Base for variant 2.
pub fn precision_bounds(rates: &QualityRates, weight_fraction_of_base: f64) -> (f64, f64) {
    (
        weight_fraction_of_base + rates.bad_split_rate,
        1.0 - rates.good_split_rate,
    )
}

fn v2_raw(precision_base: f64, rates: &QualityRates, w_base: f64) -> f64 {
    w_base * (precision_base - rates.bad_split_rate)
}

/// GoodStableWeight from an assumed Precision_Base.
///
/// `weight_fraction_of_base` is `weight(i)/weight(Base(i))`, or its lifted
/// value for the affected items.
pub fn good_stable_weight_v2(
    precision_base: f64,
    rates: &QualityRates,
    weight_fraction_of_base: f64,
    w_base: f64,
) -> Result<f64> {
    let (lower, upper) = precision_bounds(rates, weight_fraction_of_base);
    if precision_base < lower - BOUND_TOL || precision_base > upper + BOUND_TOL {
        return Err(Error::Infeasible {
            name: "precision_base",
            value: precision_base,
            lower,
            upper,
        });
    }
    Ok(v2_raw(precision_base, rates, w_base))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "variant")]
pub enum Variant {
    /// GoodStableWeight from ΔPrecision.
    V1,
    /// GoodStableWeight from an assumed Precision_Base.
    V2 { precision_base: f64 },
}

impl Variant {
    pub fn number(&self) -> u8 {
        match self {
            Variant::V1 => 1,
            Variant::V2 { .. } => 2,
        }
    }
}

/// What can be observed about one item without knowing Ideal(i) in full.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItemObservables {
    pub weight: f64,
    pub w_base: f64,
    pub w_exp: f64,
    pub rates: QualityRates,
}

impl ItemObservables {
    pub fn from_venn(v: &VennWeights, weight: f64) -> Self {
        Self {
            weight,
            w_base: v.base_weight(),
            w_exp: v.exp_weight(),
            rates: QualityRates::of_item(v),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItemReasoning {
    pub good_stable: f64,
    pub ideal_weight: f64,
    pub missing: f64,
    pub recall_exp: f64,
    pub delta_recall: f64,
}

fn recall_exp(partial: &VennPartial, missing: f64) -> f64 {
    let kept = partial.good_stable + partial.good_merge;
    kept / (kept + partial.bad_split + missing)
}

/// Completes one item's diagram and derives its ΔRecall.
pub fn per_item_delta_recall(
    obs: &ItemObservables,
    variant: Variant,
    recall_base: f64,
) -> Result<ItemReasoning> {
    let good_stable = match variant {
        Variant::V1 => good_stable_weight_v1(&obs.rates, obs.w_base)?,
        Variant::V2 { precision_base } => good_stable_weight_v2(
            precision_base,
            &obs.rates,
            obs.weight / obs.w_base,
            obs.w_base,
        )?,
    };
    let partial = VennPartial {
        bad_split: obs.rates.bad_split_rate * obs.w_base,
        good_stable,
        good_merge: obs.rates.good_merge_rate * obs.w_exp,
    };
    let ideal = ideal_weight_from_recall(&partial, recall_base)?;
    let recall_exp = recall_exp(&partial, ideal.missing);
    Ok(ItemReasoning {
        good_stable,
        ideal_weight: ideal.ideal_weight,
        missing: ideal.missing,
        recall_exp,
        delta_recall: recall_exp - recall_base,
    })
}

/// Exact inputs of the aggregate reasoning.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagramInputs {
    pub affected_weight_fraction: f64,
    pub weight_fraction_of_base_cluster: f64,
    /// Affected-scope rates.
    pub rates: QualityRates,
}

impl DiagramInputs {
    pub fn new(impact: &ImpactMetrics, rates: &QualityRates) -> Result<Self> {
        let wfbc = impact
            .weight_fraction_of_base_cluster_affected()
            .ok_or(Error::NoopChange)?;
        Ok(Self {
            affected_weight_fraction: impact.affected_weight_fraction,
            weight_fraction_of_base_cluster: wfbc,
            rates: rates.to_affected(impact.affected_weight_fraction)?,
        })
    }

    fn stable_weight(&self) -> f64 {
        1.0 - self.rates.split_rate
    }

    fn exp_weight(&self) -> Result<f64> {
        let mr = self.rates.merge_rate;
        if mr >= 1.0 {
            return Err(Error::Infeasible {
                name: "merge_rate",
                value: mr,
                lower: 0.0,
                upper: 1.0,
            });
        }
        let stable = self.stable_weight();
        Ok(stable + mr * stable / (1.0 - mr))
    }

    pub fn bad_split_weight(&self) -> f64 {
        self.rates.bad_split_rate
    }

    pub fn good_merge_weight(&self) -> Result<f64> {
        Ok(self.rates.good_merge_rate * self.exp_weight()?)
    }

    pub fn precision_bounds(&self) -> (f64, f64) {
        precision_bounds(&self.rates, self.weight_fraction_of_base_cluster)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClipPolicy {
    /// Clip out-of-range values and flag the diagram.
    #[default]
    Clip,
    /// Refuse to produce a diagram from out-of-range values.
    Abort,
}

/// Diagram of the typical affected item, with `weight(B) = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffectedDiagram {
    pub w_b: f64,
    pub w_e: f64,
    pub stable_weight: f64,
    pub good_stable: f64,
    pub bad_stable: f64,
    pub good_split: f64,
    pub bad_split: f64,
    pub good_merge: f64,
    pub bad_merge: f64,
    pub missing: f64,
    pub min_good_stable: f64,
    /// GoodStableWeight before clipping.
    pub gsw_raw: f64,
    /// Missing weight before clamping at zero.
    pub missing_raw: f64,
    pub clipped: bool,
    pub missing_clipped: bool,
    pub variant: u8,
    pub assumed_recall_base: f64,
    pub assumed_precision_base: Option<f64>,
}

impl AffectedDiagram {
    pub fn partial(&self) -> VennPartial {
        VennPartial {
            bad_split: self.bad_split,
            good_stable: self.good_stable,
            good_merge: self.good_merge,
        }
    }

    pub fn recall_bound(&self) -> f64 {
        self.partial().recall_bound()
    }
}

/// GoodStableWeight range and unclipped value for a variant.
fn good_stable_parts(inputs: &DiagramInputs, variant: Variant) -> Result<(f64, f64, f64)> {
    let stable = inputs.stable_weight();
    let min_gs = inputs.weight_fraction_of_base_cluster;
    if min_gs > stable + BOUND_TOL {
        return Err(Error::Infeasible {
            name: "min_good_stable",
            value: min_gs,
            lower: 0.0,
            upper: stable,
        });
    }
    let raw = match variant {
        Variant::V1 => v1_raw(&inputs.rates, 1.0)?,
        Variant::V2 { precision_base } => v2_raw(precision_base, &inputs.rates, 1.0),
    };
    Ok((min_gs.min(stable), stable, raw))
}

pub fn build_affected_diagram(
    inputs: &DiagramInputs,
    variant: Variant,
    recall_base: f64,
    policy: ClipPolicy,
) -> Result<AffectedDiagram> {
    if !(recall_base > 0.0 && recall_base <= 1.0) {
        return Err(Error::Infeasible {
            name: "recall_base",
            value: recall_base,
            lower: 0.0,
            upper: 1.0,
        });
    }
    let r = &inputs.rates;
    let w_b = 1.0;
    let w_e = inputs.exp_weight()?;
    let (min_good_stable, stable_weight, gsw_raw) = good_stable_parts(inputs, variant)?;
    let out_of_range = gsw_raw < min_good_stable - BOUND_TOL || gsw_raw > stable_weight + BOUND_TOL;
    if out_of_range && policy == ClipPolicy::Abort {
        return Err(match variant {
            Variant::V2 { precision_base } => {
                let (lower, upper) = inputs.precision_bounds();
                Error::Infeasible {
                    name: "precision_base",
                    value: precision_base,
                    lower,
                    upper,
                }
            }
            Variant::V1 => Error::Infeasible {
                name: "good_stable_weight",
                value: gsw_raw,
                lower: min_good_stable,
                upper: stable_weight,
            },
        });
    }
    let good_stable = gsw_raw.clamp(min_good_stable, stable_weight);
    let bad_split = r.bad_split_rate * w_b;
    let good_merge = r.good_merge_rate * w_e;
    let partial = VennPartial {
        bad_split,
        good_stable,
        good_merge,
    };
    let missing_raw =
        (bad_split + good_stable) / recall_base - bad_split - good_stable - good_merge;
    if missing_raw < -BOUND_TOL && policy == ClipPolicy::Abort {
        return Err(Error::Infeasible {
            name: "recall_base",
            value: recall_base,
            lower: 0.0,
            upper: partial.recall_bound(),
        });
    }
    Ok(AffectedDiagram {
        w_b,
        w_e,
        stable_weight,
        good_stable,
        bad_stable: stable_weight - good_stable,
        good_split: r.good_split_rate * w_b,
        bad_split,
        good_merge,
        bad_merge: r.bad_merge_rate * w_e,
        missing: missing_raw.max(0.0),
        min_good_stable,
        gsw_raw,
        missing_raw,
        clipped: out_of_range,
        missing_clipped: missing_raw < -BOUND_TOL,
        variant: variant.number(),
        assumed_recall_base: recall_base,
        assumed_precision_base: match variant {
            Variant::V1 => None,
            Variant::V2 { precision_base } => Some(precision_base),
        },
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverallEstimate {
    pub delta_recall_t: f64,
    pub delta_precision_t: f64,
    pub recall_base_affected: f64,
    pub recall_exp_affected: f64,
    pub precision_base_affected: f64,
    pub precision_exp_affected: f64,
}

/// ΔRecall(T) and ΔPrecision(T) implied by a diagram.
///
/// Precision_Base is read off the diagram, so it equals the assumed value
/// for an unclipped variant-2 diagram.
pub fn overall_delta_recall(
    diagram: &AffectedDiagram,
    affected_weight_fraction: f64,
) -> OverallEstimate {
    let d = diagram;
    let recall_exp = recall_exp(&d.partial(), d.missing);
    let precision_base = (d.bad_split + d.good_stable) / d.w_b;
    let precision_exp = (d.good_stable + d.good_merge) / d.w_e;
    OverallEstimate {
        delta_recall_t: (recall_exp - d.assumed_recall_base) * affected_weight_fraction,
        delta_precision_t: (precision_exp - precision_base) * affected_weight_fraction,
        recall_base_affected: d.assumed_recall_base,
        recall_exp_affected: recall_exp,
        precision_base_affected: precision_base,
        precision_exp_affected: precision_exp,
    }
}

/// Jaccard distance between Base and Exp estimated from the diagram alone.
pub fn jd_back_of_envelope(diagram: &AffectedDiagram, affected_weight_fraction: f64) -> f64 {
    let d = diagram;
    (1.0 - d.stable_weight / (d.w_b + d.w_e - d.stable_weight)) * affected_weight_fraction
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "policy")]
pub enum RecallPolicy {
    Fixed {
        recall: f64,
    },
    /// `lo` for recall-positive changes, `hi` otherwise.
    Dampened {
        lo: f64,
        hi: f64,
    },
}

impl Default for RecallPolicy {
    fn default() -> Self {
        RecallPolicy::Dampened { lo: 0.6, hi: 0.8 }
    }
}

impl RecallPolicy {
    pub fn fixed_default() -> Self {
        RecallPolicy::Fixed { recall: 0.7 }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |p: f64| p > 0.0 && p <= 1.0;
        let valid = match *self {
            RecallPolicy::Fixed { recall } => ok(recall),
            RecallPolicy::Dampened { lo, hi } => ok(lo) && ok(hi),
        };
        if valid {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "assumed recall must lie in (0, 1]: {self:?}"
            )))
        }
    }

    /// Assumed Recall_Base of the affected items given the diagram weights.
    pub fn assumed_recall(&self, bad_split_weight: f64, good_merge_weight: f64) -> Result<f64> {
        self.validate()?;
        Ok(match *self {
            RecallPolicy::Fixed { recall } => recall,
            RecallPolicy::Dampened { lo, hi } => {
                if bad_split_weight < good_merge_weight {
                    lo
                } else {
                    hi
                }
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyEstimate {
    pub diagram: AffectedDiagram,
    pub overall: OverallEstimate,
    pub jd_back_of_envelope: f64,
}

/// Builds the diagram with the recall assumed by `policy` and evaluates it.
pub fn estimate_with_policy(
    inputs: &DiagramInputs,
    variant: Variant,
    policy: RecallPolicy,
    clip: ClipPolicy,
) -> Result<PolicyEstimate> {
    let recall = policy.assumed_recall(inputs.bad_split_weight(), inputs.good_merge_weight()?)?;
    let diagram = build_affected_diagram(inputs, variant, recall, clip)?;
    let awf = inputs.affected_weight_fraction;
    Ok(PolicyEstimate {
        overall: overall_delta_recall(&diagram, awf),
        jd_back_of_envelope: jd_back_of_envelope(&diagram, awf),
        diagram,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub recall_base: f64,
    pub delta_recall_t: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecallCurve {
    pub variant: u8,
    pub domain_max: f64,
    pub points: Vec<CurvePoint>,
}

pub const DEFAULT_CURVE_POINTS: usize = 99;
pub const DEFAULT_HEATMAP_STEPS: usize = 50;

fn check_resolution(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::Config("grid resolution must be at least 2".into()));
    }
    Ok(())
}

/// ΔRecall(T) as a function of assumed Recall_Base over `(start, bound]`,
/// where the start is 0.01 (or half the bound if that is smaller).
pub fn recall_curve(
    inputs: &DiagramInputs,
    variant: Variant,
    points: usize,
    clip: ClipPolicy,
) -> Result<RecallCurve> {
    check_resolution(points)?;
    let bound = build_affected_diagram(inputs, variant, 1.0, clip)?.recall_bound();
    let start = 0.01_f64.min(bound / 2.0);
    let awf = inputs.affected_weight_fraction;
    let points = (0..points)
        .map(|k| {
            let recall_base = if k + 1 == points {
                bound
            } else {
                start + (bound - start) * (k + 1) as f64 / points as f64
            };
            let d = build_affected_diagram(inputs, variant, recall_base, clip)?;
            Ok(CurvePoint {
                recall_base,
                delta_recall_t: overall_delta_recall(&d, awf).delta_recall_t,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RecallCurve {
        variant: variant.number(),
        domain_max: bound,
        points,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatmapCell {
    pub precision_base: f64,
    pub recall_base: f64,
    pub delta_recall_t: Option<f64>,
    pub delta_precision_t: Option<f64>,
    pub feasible: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecallHeatmap {
    pub variant: u8,
    pub precision_steps: usize,
    pub recall_steps: usize,
    /// Row-major: precision outer, recall inner.
    pub cells: Vec<HeatmapCell>,
}

/// Variant-2 ΔRecall(T) and ΔPrecision(T) over the feasible precision range
/// and recall up to the largest plausible value. Cells whose recall exceeds
/// the bound for their precision are marked infeasible.
pub fn recall_heatmap(inputs: &DiagramInputs, steps: (usize, usize)) -> Result<RecallHeatmap> {
    let (np, nr) = steps;
    check_resolution(np)?;
    check_resolution(nr)?;
    let (lo, hi) = inputs.precision_bounds();
    if lo > hi + BOUND_TOL {
        return Err(Error::Infeasible {
            name: "precision_base",
            value: lo,
            lower: lo,
            upper: hi,
        });
    }
    let hi = hi.max(lo);
    let top = build_affected_diagram(
        inputs,
        Variant::V2 { precision_base: hi },
        1.0,
        ClipPolicy::Clip,
    )?
    .recall_bound();
    let awf = inputs.affected_weight_fraction;
    let mut cells = Vec::with_capacity(np * nr);
    for a in 0..np {
        let precision_base = lo + (hi - lo) * a as f64 / (np - 1) as f64;
        for b in 0..nr {
            let recall_base = top * (b + 1) as f64 / nr as f64;
            let variant = Variant::V2 { precision_base };
            let cell = match build_affected_diagram(inputs, variant, recall_base, ClipPolicy::Abort)
            {
                Ok(d) => {
                    let o = overall_delta_recall(&d, awf);
                    HeatmapCell {
                        precision_base,
                        recall_base,
                        delta_recall_t: Some(o.delta_recall_t),
                        delta_precision_t: Some(o.delta_precision_t),
                        feasible: true,
                    }
                }
                Err(Error::Infeasible { .. }) => HeatmapCell {
                    precision_base,
                    recall_base,
                    delta_recall_t: None,
                    delta_precision_t: None,
                    feasible: false,
                },
                Err(e) => return Err(e),
            };
            cells.push(cell);
        }
    }
    Ok(RecallHeatmap {
        variant: 2,
        precision_steps: np,
        recall_steps: nr,
        cells,
    })
}

pub fn curve_csv(curve: &RecallCurve) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["recall_base", "delta_recall_T"])?;
    for p in &curve.points {
        w.write_record([p.recall_base.to_string(), p.delta_recall_t.to_string()])?;
    }
    finish_csv(w)
}

pub fn heatmap_csv(heatmap: &RecallHeatmap) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "precision_base",
        "recall_base",
        "delta_recall_T",
        "delta_precision_T",
        "feasible",
    ])?;
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    for c in &heatmap.cells {
        w.write_record([
            c.precision_base.to_string(),
            c.recall_base.to_string(),
            opt(c.delta_recall_t),
            opt(c.delta_precision_t),
            c.feasible.to_string(),
        ])?;
    }
    finish_csv(w)
}

pub(crate) fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Validation(format!("csv flush: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quality::Scope;

    fn hand_venn() -> VennWeights {
        VennWeights {
            good_stable: 2.0,
            bad_stable: 0.0,
            good_split: 1.0,
            bad_split: 0.0,
            good_merge: 0.0,
            bad_merge: 0.0,
            missing: 1.0,
        }
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    fn affected_rates(sr: f64, mr: f64, gsr: f64, gmr: f64, dp: Option<f64>) -> QualityRates {
        QualityRates {
            scope: Scope::Affected,
            split_rate: sr,
            merge_rate: mr,
            good_split_rate: gsr,
            bad_split_rate: sr - gsr,
            good_merge_rate: gmr,
            bad_merge_rate: mr - gmr,
            delta_precision: dp,
        }
    }

    fn inputs(rates: QualityRates, wfbc: f64, awf: f64) -> DiagramInputs {
        DiagramInputs {
            affected_weight_fraction: awf,
            weight_fraction_of_base_cluster: wfbc,
            rates,
        }
    }

    #[test]
    fn ideal_weight_hand_example() {
        let p = VennPartial {
            bad_split: 0.0,
            good_stable: 2.0,
            good_merge: 0.0,
        };
        let r = ideal_weight_from_recall(&p, 2.0 / 3.0).unwrap();
        assert!(close(r.ideal_weight, 3.0));
        assert!(close(r.missing, 1.0));
    }

    #[test]
    fn ideal_weight_at_bound_and_beyond() {
        let p = VennPartial {
            bad_split: 1.0,
            good_stable: 2.0,
            good_merge: 1.0,
        };
        assert!(close(p.recall_bound(), 0.75));
        assert!(close(
            ideal_weight_from_recall(&p, 0.75).unwrap().missing,
            0.0
        ));
        match ideal_weight_from_recall(&p, 0.8) {
            Err(Error::Infeasible { upper, .. }) => assert!(close(upper, 0.75)),
            other => panic!("{other:?}"),
        }
        assert!(ideal_weight_from_recall(&p, 0.0).is_err());
    }

    #[test]
    fn v1_hand_example_and_guards() {
        let r = QualityRates::of_item(&hand_venn());
        assert!(close(good_stable_weight_v1(&r, 3.0).unwrap(), 2.0));

        let mut zero = affected_rates(0.4, 0.2, 0.1, 0.1, None);
        zero.delta_precision = Some(zero.good_merge_rate - zero.bad_split_rate);
        assert!(close(good_stable_weight_v1(&zero, 1.0).unwrap(), 0.0));

        let same = affected_rates(0.3, 0.3, 0.1, 0.1, Some(0.0));
        assert!(matches!(
            good_stable_weight_v1(&same, 1.0),
            Err(Error::VariantInapplicable { variant: 1, .. })
        ));
        let absent = affected_rates(0.3, 0.1, 0.1, 0.1, None);
        assert!(matches!(
            good_stable_weight_v1(&absent, 1.0),
            Err(Error::VariantInapplicable { variant: 1, .. })
        ));
    }

    #[test]
    fn v2_hand_example_and_bounds() {
        let r = QualityRates::of_item(&hand_venn());
        assert!(close(
            good_stable_weight_v2(2.0 / 3.0, &r, 1.0 / 3.0, 3.0).unwrap(),
            2.0
        ));
        // Lower bound gives weight(i), upper bound gives the stable weight.
        assert!(close(
            good_stable_weight_v2(1.0 / 3.0, &r, 1.0 / 3.0, 3.0).unwrap(),
            1.0
        ));
        assert!(close(
            good_stable_weight_v2(2.0 / 3.0, &r, 1.0 / 3.0, 3.0).unwrap(),
            2.0
        ));
        match good_stable_weight_v2(0.9, &r, 1.0 / 3.0, 3.0) {
            Err(Error::Infeasible { lower, upper, .. }) => {
                assert!(close(lower, 1.0 / 3.0));
                assert!(close(upper, 2.0 / 3.0));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn per_item_hand_example() {
        let obs = ItemObservables::from_venn(&hand_venn(), 1.0);
        for variant in [
            Variant::V1,
            Variant::V2 {
                precision_base: 2.0 / 3.0,
            },
        ] {
            let r = per_item_delta_recall(&obs, variant, 2.0 / 3.0).unwrap();
            assert!(close(r.recall_exp, 2.0 / 3.0));
            assert!(close(r.delta_recall, 0.0));
            assert!(close(r.missing, 1.0));
        }
    }

    #[test]
    fn per_item_direction() {
        // Pure good merge: {i, a} gains b from the ideal.
        let merge = VennWeights {
            good_stable: 2.0,
            good_merge: 1.0,
            missing: 1.0,
            ..Default::default()
        };
        let obs = ItemObservables::from_venn(&merge, 1.0);
        let r = per_item_delta_recall(
            &obs,
            Variant::V2 {
                precision_base: 1.0,
            },
            0.5,
        )
        .unwrap();
        assert!(r.delta_recall > 0.0);

        // Pure bad split: {i, a, b} loses b although b ≡ i.
        let split = VennWeights {
            good_stable: 2.0,
            bad_split: 1.0,
            ..Default::default()
        };
        let obs = ItemObservables::from_venn(&split, 1.0);
        let r = per_item_delta_recall(&obs, Variant::V1, 1.0).unwrap();
        assert!(r.delta_recall < 0.0);
    }

    #[test]
    fn diagram_without_merges() {
        let i = inputs(affected_rates(0.25, 0.0, 0.25, 0.0, Some(0.1)), 0.1, 1.0);
        let d = build_affected_diagram(
            &i,
            Variant::V2 {
                precision_base: 0.7,
            },
            0.9,
            ClipPolicy::Clip,
        )
        .unwrap();
        assert!(close(d.w_e, 0.75));
        assert!(close(d.good_merge + d.bad_merge, 0.0));
        assert!(close(d.stable_weight, 0.75));
        assert!(close(d.good_split + d.bad_split, 0.25));
    }

    #[test]
    fn clipping_contract() {
        let i = inputs(affected_rates(0.25, 0.0, 0.25, 0.0, None), 0.1, 1.0);
        let v = Variant::V2 {
            precision_base: 0.95,
        };
        let d = build_affected_diagram(&i, v, 0.5, ClipPolicy::Clip).unwrap();
        assert!(d.clipped);
        assert!(close(d.good_stable, d.stable_weight));
        assert!(matches!(
            build_affected_diagram(&i, v, 0.5, ClipPolicy::Abort),
            Err(Error::Infeasible {
                name: "precision_base",
                ..
            })
        ));
    }

    #[test]
    fn rounding_between_min_and_stable_weight() {
        // Every Base co-member is split off, so the stable part is the item alone.
        let i = inputs(
            affected_rates(0.75, 0.0, 0.75, 0.0, None),
            0.25 + 3e-16,
            1.0,
        );
        let d = build_affected_diagram(
            &i,
            Variant::V2 {
                precision_base: 1.0,
            },
            0.5,
            ClipPolicy::Clip,
        )
        .unwrap();
        assert!(d.good_stable <= d.stable_weight);
        assert!(close(d.good_stable, 0.25));
    }

    #[test]
    fn missing_clamp_and_abort() {
        let i = inputs(affected_rates(0.2, 0.3, 0.2, 0.3, None), 0.1, 1.0);
        let v = Variant::V2 {
            precision_base: 0.5,
        };
        let d = build_affected_diagram(&i, v, 1.0, ClipPolicy::Clip).unwrap();
        assert!(d.missing_clipped);
        assert_eq!(d.missing, 0.0);
        assert!(build_affected_diagram(&i, v, 1.0, ClipPolicy::Abort).is_err());
    }

    #[test]
    fn policy_examples() {
        let damp = RecallPolicy::default();
        assert_eq!(damp.assumed_recall(0.1, 0.3).unwrap(), 0.6);
        assert_eq!(damp.assumed_recall(0.3, 0.1).unwrap(), 0.8);
        let fixed = RecallPolicy::fixed_default();
        assert_eq!(fixed.assumed_recall(0.1, 0.3).unwrap(), 0.7);
        assert_eq!(fixed.assumed_recall(0.3, 0.1).unwrap(), 0.7);
        assert!(matches!(
            RecallPolicy::Fixed { recall: 1.5 }.assumed_recall(0.0, 0.0),
            Err(Error::Config(_))
        ));
        assert!(RecallPolicy::Fixed { recall: 0.0 }.validate().is_err());
    }

    #[test]
    fn jd_back_of_envelope_examples() {
        let none = inputs(affected_rates(0.0, 0.0, 0.0, 0.0, None), 0.1, 1.0);
        let d = build_affected_diagram(
            &none,
            Variant::V2 {
                precision_base: 0.5,
            },
            0.5,
            ClipPolicy::Clip,
        )
        .unwrap();
        assert!(close(jd_back_of_envelope(&d, 1.0), 0.0));

        let split = inputs(
            affected_rates(1.0 / 3.0, 0.0, 1.0 / 3.0, 0.0, None),
            0.1,
            1.0,
        );
        let d = build_affected_diagram(
            &split,
            Variant::V2 {
                precision_base: 0.5,
            },
            0.5,
            ClipPolicy::Clip,
        )
        .unwrap();
        assert!(close(jd_back_of_envelope(&d, 1.0), 1.0 / 3.0));
        assert!(close(jd_back_of_envelope(&d, 0.5), 1.0 / 6.0));
    }

    #[test]
    fn rescaling_identity() {
        let i = inputs(affected_rates(0.3, 0.2, 0.2, 0.15, Some(0.05)), 0.1, 1.0);
        let d = build_affected_diagram(&i, Variant::V1, 0.7, ClipPolicy::Clip).unwrap();
        let one = overall_delta_recall(&d, 1.0);
        let part = overall_delta_recall(&d, 0.37);
        assert!(close(part.delta_recall_t, one.delta_recall_t * 0.37));
        assert!(close(part.delta_precision_t, one.delta_precision_t * 0.37));
    }

    #[test]
    fn curve_ends_at_bound_with_no_missing() {
        let i = inputs(affected_rates(0.3, 0.2, 0.2, 0.15, None), 0.1, 0.5);
        let v = Variant::V2 {
            precision_base: 0.6,
        };
        let c = recall_curve(&i, v, DEFAULT_CURVE_POINTS, ClipPolicy::Clip).unwrap();
        assert_eq!(c.points.len(), 99);
        let last = c.points.last().unwrap();
        assert_eq!(last.recall_base, c.domain_max);
        let d = build_affected_diagram(&i, v, last.recall_base, ClipPolicy::Abort).unwrap();
        assert!(d.missing.abs() < 1e-12);
        assert!(c
            .points
            .iter()
            .all(|p| p.recall_base > 0.0 && p.recall_base <= c.domain_max));
        assert!(recall_curve(&i, v, 1, ClipPolicy::Clip).is_err());
    }

    #[test]
    fn heatmap_marks_infeasible_cells() {
        let i = inputs(affected_rates(0.3, 0.2, 0.2, 0.15, None), 0.1, 0.5);
        let h = recall_heatmap(&i, (5, 6)).unwrap();
        assert_eq!(h.cells.len(), 30);
        assert!(h.cells.iter().any(|c| !c.feasible));
        assert!(h.cells.iter().any(|c| c.feasible));
        for c in &h.cells {
            assert_eq!(c.feasible, c.delta_recall_t.is_some());
        }
        let csv = heatmap_csv(&h).unwrap();
        assert!(csv
            .starts_with("precision_base,recall_base,delta_recall_T,delta_precision_T,feasible\n"));
        assert!(csv.contains(",,false"));
    }
}
