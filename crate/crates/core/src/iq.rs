//! IQ: the improvement of the Jaccard distance to Ideal, relative to the
//! Jaccard distance between Base and Exp.

use serde::{Deserialize, Serialize};

use crate::delta_recall::{finish_csv, AffectedDiagram};
use crate::error::{Error, Result};
use crate::impact::{all_items, lifted_jaccard_distance};
use crate::model::{ClusteringPair, ItemIx, Partition};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IqMode {
    Exact,
    Approx,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IqResult {
    pub mode: IqMode,
    pub jaccard_base_exp: f64,
    pub jd_base_ideal: f64,
    pub jd_exp_ideal: f64,
    pub jd_improvement: f64,
    pub iq: f64,
    pub clipped: bool,
}

/// Lifted `JD(Base(i), Ideal(i)) − JD(Exp(i), Ideal(i))` over `items`.
pub fn jd_to_ideal_improvement(
    pair: &ClusteringPair,
    ideal: &Partition,
    items: &[ItemIx],
) -> Result<f64> {
    let pop = pair.population();
    Ok(lifted_jaccard_distance(pop, pair.base(), ideal, items)?
        - lifted_jaccard_distance(pop, pair.exp(), ideal, items)?)
}

pub fn iq_exact(pair: &ClusteringPair, ideal: &Partition) -> Result<IqResult> {
    let pop = pair.population();
    let everyone = all_items(pop);
    let jaccard_base_exp = lifted_jaccard_distance(pop, pair.base(), pair.exp(), &everyone)?;
    if jaccard_base_exp <= 0.0 {
        return Err(Error::ZeroDiff);
    }
    let jd_base_ideal = lifted_jaccard_distance(pop, pair.base(), ideal, &everyone)?;
    let jd_exp_ideal = lifted_jaccard_distance(pop, pair.exp(), ideal, &everyone)?;
    let jd_improvement = jd_base_ideal - jd_exp_ideal;
    Ok(IqResult {
        mode: IqMode::Exact,
        jaccard_base_exp,
        jd_base_ideal,
        jd_exp_ideal,
        jd_improvement,
        iq: jd_improvement / jaccard_base_exp,
        clipped: false,
    })
}

/// IQ from the typical-affected-item diagram, with the exact Base/Exp
/// Jaccard distance as denominator.
pub fn iq_approx(
    diagram: &AffectedDiagram,
    affected_weight_fraction: f64,
    jaccard_base_exp: f64,
) -> Result<IqResult> {
    if jaccard_base_exp <= 0.0 {
        return Err(Error::ZeroDiff);
    }
    let d = diagram;
    let jd_base_ideal = (1.0 - (d.bad_split + d.good_stable) / (d.w_b + d.good_merge + d.missing))
        * affected_weight_fraction;
    let jd_exp_ideal = (1.0 - (d.good_stable + d.good_merge) / (d.w_e + d.bad_split + d.missing))
        * affected_weight_fraction;
    let jd_improvement = jd_base_ideal - jd_exp_ideal;
    let raw = jd_improvement / jaccard_base_exp;
    let iq = raw.clamp(-1.0, 1.0);
    Ok(IqResult {
        mode: IqMode::Approx,
        jaccard_base_exp,
        jd_base_ideal,
        jd_exp_ideal,
        jd_improvement,
        iq,
        clipped: iq != raw,
    })
}

/// IQ of an Exp at `(x, y)` when Base sits at the origin and Ideal at
/// `(0, d)`. Undefined at the Ideal itself.
pub fn iq_at(x: f64, y: f64, d: f64) -> Option<f64> {
    let den = x.hypot(d - y);
    (den > 0.0).then(|| (d - x.hypot(y)) / den)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryGrid {
    pub d: f64,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    pub nx: usize,
    pub ny: usize,
}

impl GeometryGrid {
    /// Square grid over `[-2d, 2d]²`.
    pub fn around(d: f64, n: usize) -> Self {
        Self {
            d,
            x_range: (-2.0 * d, 2.0 * d),
            y_range: (-2.0 * d, 2.0 * d),
            nx: n,
            ny: n,
        }
    }
}

impl Default for GeometryGrid {
    fn default() -> Self {
        Self::around(1.0, 401)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometryPoint {
    pub x: f64,
    pub y: f64,
    pub f: Option<f64>,
}

fn axis(range: (f64, f64), n: usize, k: usize) -> f64 {
    range.0 + (range.1 - range.0) * k as f64 / (n - 1) as f64
}

/// Evaluates [`iq_at`] over the grid, x outer and y inner.
pub fn iq_geometry(grid: &GeometryGrid) -> Result<Vec<GeometryPoint>> {
    if !(grid.d > 0.0 && grid.d.is_finite()) {
        return Err(Error::Config("d must be positive".into()));
    }
    if grid.nx < 2 || grid.ny < 2 {
        return Err(Error::Config("grid resolution must be at least 2".into()));
    }
    let mut out = Vec::with_capacity(grid.nx * grid.ny);
    for a in 0..grid.nx {
        let x = axis(grid.x_range, grid.nx, a);
        for b in 0..grid.ny {
            let y = axis(grid.y_range, grid.ny, b);
            out.push(GeometryPoint {
                x,
                y,
                f: iq_at(x, y, grid.d),
            });
        }
    }
    Ok(out)
}

/// `x,y,f` with an empty `f` where undefined.
pub fn geometry_csv(points: &[GeometryPoint]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["x", "y", "f"])?;
    for p in points {
        w.write_record([
            p.x.to_string(),
            p.y.to_string(),
            p.f.map(|f| f.to_string()).unwrap_or_default(),
        ])?;
    }
    finish_csv(w)
}
