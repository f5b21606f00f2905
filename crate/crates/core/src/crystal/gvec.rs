use super::{Cell, Vec3};
use std::cmp::Ordering;
use std::f64::consts::PI;

/// Relative slack applied at the cutoff sphere boundary so that vectors whose
/// kinetic energy equals the cutoff in exact arithmetic are kept.
const CUTOFF_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GVector {
    pub miller: [i32; 3],
    pub g: Vec3,
}

impl GVector {
    /// ½|G|² in hartree.
    pub fn kinetic(&self) -> f64 {
        0.5 * self.g.norm_squared()
    }

    pub fn norm_squared(&self) -> f64 {
        self.g.norm_squared()
    }
}

pub fn within_cutoff(kinetic: f64, cutoff: f64) -> bool {
    kinetic <= cutoff * (1.0 + CUTOFF_SLACK)
}

/// Largest |h|, |k|, |l| reachable inside the sphere ½|G|² ≤ cutoff.
pub fn miller_bounds(cell: &Cell, cutoff: f64) -> [i32; 3] {
    let gmax = (2.0 * cutoff.max(0.0)).sqrt();
    let mut out = [0i32; 3];
    for (i, o) in out.iter_mut().enumerate() {
        let reach = gmax * cell.vector(i).norm() / (2.0 * PI);
        *o = (reach * (1.0 + CUTOFF_SLACK) + 1e-12).floor() as i32;
    }
    out
}

/// All reciprocal vectors with ½|G|² ≤ cutoff, sorted by (½|G|², h, k, l).
pub fn gvectors_within(cell: &Cell, cutoff: f64) -> Vec<GVector> {
    let [n1, n2, n3] = miller_bounds(cell, cutoff);
    let mut out = Vec::new();
    for h in -n1..=n1 {
        for k in -n2..=n2 {
            for l in -n3..=n3 {
                let miller = [h, k, l];
                let gv = GVector {
                    miller,
                    g: cell.gvector(miller),
                };
                if miller == [0, 0, 0] || within_cutoff(gv.kinetic(), cutoff) {
                    out.push(gv);
                }
            }
        }
    }
    out.sort_by(|a, b| {
        a.kinetic()
            .partial_cmp(&b.kinetic())
            .unwrap_or(Ordering::Equal)
            .then_with(|| a.miller.cmp(&b.miller))
    });
    out
}
