use super::{Cell, Vec3};

/// Calls `f(d, r)` for every periodic image of `b` within `radius` of `a`,
/// where `r` is the displacement from `a` to the image and `d = |r|`.
pub fn for_each_image(cell: &Cell, a: &Vec3, b: &Vec3, radius: f64, mut f: impl FnMut(f64, Vec3)) {
    let frac = cell.to_fractional(&(b - a));
    let reduced = frac.map(|x| x - x.round());
    let base = cell.to_cartesian(&reduced);
    let reach = |i: usize| (radius / cell.plane_spacing(i)).ceil() as i32 + 1;
    let (n1, n2, n3) = (reach(0), reach(1), reach(2));
    let (a1, a2, a3) = (cell.vector(0), cell.vector(1), cell.vector(2));
    for i in -n1..=n1 {
        for j in -n2..=n2 {
            for k in -n3..=n3 {
                let r = base + a1 * i as f64 + a2 * j as f64 + a3 * k as f64;
                let d = r.norm();
                if d <= radius {
                    f(d, r);
                }
            }
        }
    }
}

/// Every image distance between `a` and `b` not exceeding `radius`, ascending.
pub fn image_distances(cell: &Cell, a: &Vec3, b: &Vec3, radius: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for_each_image(cell, a, b, radius, |d, _| out.push(d));
    out.sort_by(f64::total_cmp);
    out
}

pub fn min_image_distance(cell: &Cell, a: &Vec3, b: &Vec3) -> f64 {
    let frac = cell.to_fractional(&(b - a));
    let reduced = frac.map(|x| x - x.round());
    let base = cell.to_cartesian(&reduced);
    let mut best = f64::INFINITY;
    for i in -1..=1 {
        for j in -1..=1 {
            for k in -1..=1 {
                let r = base
                    + cell.vector(0) * i as f64
                    + cell.vector(1) * j as f64
                    + cell.vector(2) * k as f64;
                best = best.min(r.norm());
            }
        }
    }
    best
}
