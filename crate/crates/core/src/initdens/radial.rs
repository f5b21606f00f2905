use std::f64::consts::PI;

/// Fritsch-Carlson monotone cubic Hermite interpolant on ascending knots.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    slope: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        assert!(x.len() == y.len() && x.len() >= 2, "need at least two knots");
        let n = x.len();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i])).collect();
        let mut slope = vec![0.0; n];
        slope[0] = end_slope(x[1] - x[0], x.get(2).map_or(0.0, |x2| x2 - x[1]), delta[0], delta.get(1).copied());
        slope[n - 1] = end_slope(
            x[n - 1] - x[n - 2],
            if n > 2 { x[n - 2] - x[n - 3] } else { 0.0 },
            delta[n - 2],
            if n > 2 { Some(delta[n - 3]) } else { None },
        );
        for i in 1..n - 1 {
            slope[i] = if delta[i - 1] * delta[i] <= 0.0 {
                0.0
            } else {
                let h0 = x[i] - x[i - 1];
                let h1 = x[i + 1] - x[i];
                let w1 = 2.0 * h1 + h0;
                let w2 = h1 + 2.0 * h0;
                (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i])
            };
        }
        for i in 0..n - 1 {
            if delta[i] == 0.0 {
                slope[i] = 0.0;
                slope[i + 1] = 0.0;
            }
        }
        MonotoneCubic { x, y, slope }
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    /// Interpolated value; clamps to the end values outside the knot range.
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0];
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let i = match self.x.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(i) => return self.y[i],
            Err(i) => i - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        h00 * self.y[i] + h10 * h * self.slope[i] + h01 * self.y[i + 1] + h11 * h * self.slope[i + 1]
    }
}

/// Three-point one-sided end derivative, limited to keep the end interval monotone.
fn end_slope(h0: f64, h1: f64, d0: f64, d1: Option<f64>) -> f64 {
    let Some(d1) = d1 else { return d0 };
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

/// Spherically symmetric atomic density ρ_Z(r) (electrons/bohr³), zero past
/// the last knot.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialDensity {
    interp: MonotoneCubic,
}

impl RadialDensity {
    pub fn new(r: Vec<f64>, rho: Vec<f64>) -> Self {
        RadialDensity {
            interp: MonotoneCubic::new(r, rho),
        }
    }

    pub fn radii(&self) -> &[f64] {
        self.interp.knots()
    }

    pub fn values(&self) -> &[f64] {
        self.interp.values()
    }

    pub fn outer_radius(&self) -> f64 {
        *self.radii().last().expect("non-empty table")
    }

    pub fn eval(&self, r: f64) -> f64 {
        if r > self.outer_radius() {
            0.0
        } else {
            self.interp.eval(r).max(0.0)
        }
    }

    /// 4π∫ρ(r)r²dr by the trapezoid rule on the knots.
    pub fn electron_count(&self) -> f64 {
        radial_integral(self.radii(), self.values())
    }
}

pub(crate) fn radial_integral(r: &[f64], rho: &[f64]) -> f64 {
    let f: Vec<f64> = r.iter().zip(rho).map(|(r, v)| v * r * r).collect();
    let mut acc = 0.0;
    for i in 0..r.len() - 1 {
        acc += 0.5 * (r[i + 1] - r[i]) * (f[i] + f[i + 1]);
    }
    4.0 * PI * acc
}
