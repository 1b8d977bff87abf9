use super::BBox;
use crate::bounds::BoundReport;
use crate::error::Result;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    /// In the lower set, hence in the pseudospectrum.
    CertifiedIn,
    /// Outside the upper set, hence outside the pseudospectrum.
    CertifiedOut,
    Undecided,
}

impl Classification {
    pub fn of(report: &BoundReport, eps: f64) -> Self {
        if report.in_lower_set(eps) {
            Classification::CertifiedIn
        } else if !report.in_upper_set(eps) {
            Classification::CertifiedOut
        } else {
            Classification::Undecided
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridPoint {
    pub lambda: Complex64,
    pub report: BoundReport,
    /// One entry per eps.
    pub classes: Vec<Classification>,
}

/// Row-major field over an `nx x ny` grid; row `iy` has imaginary part increasing with `iy`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridField {
    pub nx: usize,
    pub ny: usize,
    pub bbox: BBox,
    pub eps_list: Vec<f64>,
    pub points: Vec<GridPoint>,
}

impl GridField {
    pub fn node(bbox: &BBox, nx: usize, ny: usize, ix: usize, iy: usize) -> Complex64 {
        let t = |i: usize, n: usize| if n > 1 { i as f64 / (n - 1) as f64 } else { 0.5 };
        Complex64::new(
            bbox.re_min + (bbox.re_max - bbox.re_min) * t(ix, nx),
            bbox.im_min + (bbox.im_max - bbox.im_min) * t(iy, ny),
        )
    }

    pub fn at(&self, ix: usize, iy: usize) -> &GridPoint {
        &self.points[iy * self.nx + ix]
    }
}

/// Evaluate the bounds at every node in parallel and classify each node for every eps.
pub fn grid_scan(
    eval: &(dyn Fn(Complex64) -> Result<BoundReport> + Sync),
    bbox: BBox,
    nx: usize,
    ny: usize,
    eps_list: &[f64],
) -> Result<GridField> {
    let nodes: Vec<Complex64> = (0..ny).flat_map(|iy| (0..nx).map(move |ix| GridField::node(&bbox, nx, ny, ix, iy))).collect();
    let points = nodes
        .par_iter()
        .map(|&lambda| {
            let report = eval(lambda)?;
            let classes = eps_list.iter().map(|&e| Classification::of(&report, e)).collect();
            Ok(GridPoint { lambda, report, classes })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GridField { nx, ny, bbox, eps_list: eps_list.to_vec(), points })
}
