//! Scalar Green's functions for the four gauges and the per-loop covariance
//! kernels C^{αβ}(x) = σ_αβ·Ḡ(γ̄_α(x), γ̄_β(x)).

use std::fmt;

use crate::curve_geometry::AdmissibleLoop;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GaugeChoice {
    Pax,
    Ax,
    PaxMass(f64),
    PaxShift(f64),
}

impl GaugeChoice {
    /// Parses "pax", "ax", "pax_mass:<m>", "pax_shift:<c>".
    pub fn parse(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::Invalid(format!("gauge \"{s}\": {why}"));
        let s = s.trim();
        match s.split_once(':') {
            None if s == "pax" => Ok(GaugeChoice::Pax),
            None if s == "ax" => Ok(GaugeChoice::Ax),
            Some((name, p)) => {
                let v: f64 = p.parse().map_err(|_| bad("parameter is not a number"))?;
                if !(v > 0.0 && v.is_finite()) {
                    return Err(bad("parameter must be positive"));
                }
                match name {
                    "pax_mass" => Ok(GaugeChoice::PaxMass(v)),
                    "pax_shift" => Ok(GaugeChoice::PaxShift(v)),
                    _ => Err(bad("unknown gauge")),
                }
            }
            _ => Err(bad("unknown gauge")),
        }
    }

    /// True when the diagonal C^{αα} vanishes identically, so the Itô and
    /// Stratonovich transports have the same expectation.
    pub fn diagonal_vanishes(self) -> bool {
        matches!(self, GaugeChoice::Pax)
    }
}

impl fmt::Display for GaugeChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GaugeChoice::Pax => write!(f, "pax"),
            GaugeChoice::Ax => write!(f, "ax"),
            GaugeChoice::PaxMass(m) => write!(f, "pax_mass:{m}"),
            GaugeChoice::PaxShift(c) => write!(f, "pax_shift:{c}"),
        }
    }
}

pub fn green_scalar(gauge: GaugeChoice, y: f64, y2: f64) -> f64 {
    match gauge {
        GaugeChoice::Pax => -(y - y2).abs() / 2.0,
        GaugeChoice::Ax => {
            if y * y2 >= 0.0 {
                y.abs().min(y2.abs())
            } else {
                0.0
            }
        }
        GaugeChoice::PaxMass(m) => (-m * (y - y2).abs()).exp() / (2.0 * m),
        GaugeChoice::PaxShift(c) => -(y - y2).abs() / 2.0 + c / 2.0,
    }
}

/// Anything that can integrate a covariance kernel C^{αβ} over an interval.
pub trait Covariance: Sync {
    /// ∫ C^{αβ}(x) dx over [a, b] intersected with the supports of α and β.
    fn pair_integral(&self, alpha: usize, beta: usize, a: f64, b: f64) -> f64;
}

/// The covariance of a loop in a given gauge, with curve 0 the x-axis.
///
/// For `Ax` the kernel is the complete-axial-gauge C̃, i.e. the covariance
/// of M̃^α = M^α − σ_{α0}M⁰.
#[derive(Clone, Debug)]
pub struct CovarianceSpec {
    lp: AdmissibleLoop,
    gauge: GaugeChoice,
}

pub fn covariance_fn(lp: &AdmissibleLoop, gauge: GaugeChoice) -> CovarianceSpec {
    let spec = CovarianceSpec { lp: lp.clone(), gauge };
    if gauge == GaugeChoice::Ax && lp.min_y() >= 0.0 {
        debug_assert!(spec.tilde_self_check(16) < 1e-12);
    }
    spec
}

impl CovarianceSpec {
    pub fn lp(&self) -> &AdmissibleLoop {
        &self.lp
    }

    pub fn gauge(&self) -> GaugeChoice {
        self.gauge
    }

    /// Overlap of the x-ranges of α and β, if nonempty.
    pub fn overlap(&self, alpha: usize, beta: usize) -> Option<(f64, f64)> {
        let (a0, a1) = self.lp.x_range(alpha);
        let (b0, b1) = self.lp.x_range(beta);
        let (lo, hi) = (a0.max(b0), a1.min(b1));
        (hi > lo).then_some((lo, hi))
    }

    /// C^{αβ}(x); zero outside the overlap of the two pieces.
    pub fn kernel(&self, alpha: usize, beta: usize, x: f64) -> f64 {
        match self.overlap(alpha, beta) {
            Some((lo, hi)) if x >= lo && x <= hi => {
                let ya = self.lp.height(alpha, x);
                let yb = self.lp.height(beta, x);
                self.lp.sigma(alpha, beta) * green_scalar(self.gauge, ya, yb)
            }
            _ => 0.0,
        }
    }

    /// σ_αβ[Ḡp(a,b) − Ḡp(a,0) − Ḡp(0,b) + Ḡp(0,0)] with Ḡp the pax kernel: the
    /// covariance of M^α − σ_{α0}M⁰ and M^β − σ_{β0}M⁰ under pax.
    pub fn tilde_from_pax(&self, alpha: usize, beta: usize, x: f64) -> f64 {
        let g = |u, v| green_scalar(GaugeChoice::Pax, u, v);
        let ya = self.lp.height(alpha, x);
        let yb = self.lp.height(beta, x);
        self.lp.sigma(alpha, beta) * (g(ya, yb) - g(ya, 0.0) - g(0.0, yb) + g(0.0, 0.0))
    }

    /// Largest deviation between the direct ax kernel and the four-term pax
    /// combination over `samples` points per curve pair.
    pub fn tilde_self_check(&self, samples: usize) -> f64 {
        let ax = CovarianceSpec { lp: self.lp.clone(), gauge: GaugeChoice::Ax };
        let mut worst: f64 = 0.0;
        for alpha in 0..=self.lp.m() {
            for beta in 0..=self.lp.m() {
                let Some((lo, hi)) = ax.overlap(alpha, beta) else { continue };
                for k in 0..samples {
                    let x = lo + (hi - lo) * (k as f64 + 0.5) / samples as f64;
                    worst = worst.max((ax.kernel(alpha, beta, x) - ax.tilde_from_pax(alpha, beta, x)).abs());
                }
            }
        }
        worst
    }

    /// Exact ∫_a^b C^{αβ}(x) dx.
    pub fn interval_integral(&self, alpha: usize, beta: usize, a: f64, b: f64) -> f64 {
        let Some((lo, hi)) = self.overlap(alpha, beta) else { return 0.0 };
        let (a, b) = (a.max(lo), b.min(hi));
        if b <= a {
            return 0.0;
        }
        let mut pts = vec![a, b];
        for gamma in [alpha, beta] {
            pts.extend(self.lp.breakpoints(gamma).into_iter().filter(|&x| x > a && x < b));
        }
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let mut total = 0.0;
        for w in pts.windows(2) {
            let (x0, x1) = (w[0], w[1]);
            let ya = (self.lp.height(alpha, x0), self.lp.height(alpha, x1));
            let yb = (self.lp.height(beta, x0), self.lp.height(beta, x1));
            total += segment_integral(self.gauge, ya, yb, x1 - x0);
        }
        self.lp.sigma(alpha, beta) * total
    }
}

impl Covariance for CovarianceSpec {
    fn pair_integral(&self, alpha: usize, beta: usize, a: f64, b: f64) -> f64 {
        self.interval_integral(alpha, beta, a, b)
    }
}

pub fn interval_integral(spec: &CovarianceSpec, alpha: usize, beta: usize, interval: (f64, f64)) -> f64 {
    spec.interval_integral(alpha, beta, interval.0, interval.1)
}

/// ∫ Ḡ(y_a(t), y_b(t)) dt over a segment of length `len` on which both
/// heights are linear, split wherever the integrand changes form.
fn segment_integral(gauge: GaugeChoice, ya: (f64, f64), yb: (f64, f64), len: f64) -> f64 {
    let lerp = |y: (f64, f64), t: f64| y.0 + (y.1 - y.0) * t;
    let mut ts = vec![0.0, 1.0];
    let mut root = |f0: f64, f1: f64| {
        if (f0 < 0.0 && f1 > 0.0) || (f0 > 0.0 && f1 < 0.0) {
            ts.push(f0 / (f0 - f1));
        }
    };
    root(ya.0 - yb.0, ya.1 - yb.1);
    if gauge == GaugeChoice::Ax {
        root(ya.0, ya.1);
        root(yb.0, yb.1);
    }
    ts.sort_by(f64::total_cmp);
    let mut total = 0.0;
    for w in ts.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let l = (t1 - t0) * len;
        if l <= 0.0 {
            continue;
        }
        let (a0, a1) = (lerp(ya, t0), lerp(ya, t1));
        let (b0, b1) = (lerp(yb, t0), lerp(yb, t1));
        total += match gauge {
            GaugeChoice::PaxMass(m) => {
                let (d0, d1) = ((a0 - b0).abs(), (a1 - b1).abs());
                let s = m * (d1 - d0);
                let shape = if s.abs() < 1e-12 { 1.0 - s / 2.0 } else { -(-s).exp_m1() / s };
                l * (-m * d0).exp() * shape / (2.0 * m)
            }
            GaugeChoice::Ax => {
                let tm = 0.5 * (t0 + t1);
                if lerp(ya, tm) * lerp(yb, tm) < 0.0 {
                    0.0
                } else {
                    0.5 * l * (a0.abs().min(b0.abs()) + a1.abs().min(b1.abs()))
                }
            }
            _ => 0.5 * l * (green_scalar(gauge, a0, b0) + green_scalar(gauge, a1, b1)),
        };
    }
    total
}

/// Synthetic covariance with constant kernels C^{αβ}(x) ≡ c_αβ on a common
/// support [lo, hi].
#[derive(Clone, Debug)]
pub struct ConstantCovariance {
    pub matrix: Vec<Vec<f64>>,
    pub support: (f64, f64),
}

impl ConstantCovariance {
    pub fn new(matrix: Vec<Vec<f64>>, support: (f64, f64)) -> Self {
        Self { matrix, support }
    }
}

impl Covariance for ConstantCovariance {
    fn pair_integral(&self, alpha: usize, beta: usize, a: f64, b: f64) -> f64 {
        let len = (b.min(self.support.1) - a.max(self.support.0)).max(0.0);
        self.matrix[alpha][beta] * len
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve_geometry::shapes::*;
    use proptest::prelude::*;

    #[test]
    fn green_reference_values() {
        assert_eq!(green_scalar(GaugeChoice::Pax, 1.0, 4.0), -1.5);
        assert_eq!(green_scalar(GaugeChoice::Ax, 2.0, 3.0), 2.0);
        assert_eq!(green_scalar(GaugeChoice::Ax, -1.0, 2.0), 0.0);
        assert_eq!(green_scalar(GaugeChoice::PaxMass(1.0), 0.7, 0.7), 0.5);
    }

    #[test]
    fn gauge_strings_round_trip() {
        for s in ["pax", "ax", "pax_mass:0.5", "pax_shift:4"] {
            assert_eq!(GaugeChoice::parse(s).unwrap().to_string(), s);
        }
        for s in ["axial", "pax_mass:-1", "pax_shift:x", "pax_mass", "exact"] {
            assert!(GaugeChoice::parse(s).is_err(), "{s}");
        }
    }

    #[test]
    fn rectangle_kernels() {
        let r = rectangle();
        let pax = covariance_fn(&r, GaugeChoice::Pax);
        let ax = covariance_fn(&r, GaugeChoice::Ax);
        for x in [0.0, 0.3, 1.0] {
            assert_eq!(pax.kernel(1, 2, x), 0.5);
            assert_eq!(ax.kernel(1, 2, x), -1.0);
            assert_eq!(pax.kernel(1, 1, x), 0.0);
            assert_eq!(pax.kernel(2, 2, x), 0.0);
        }
        assert_eq!(pax.interval_integral(1, 2, 0.0, 0.5), 0.25);
        assert_eq!(pax.interval_integral(1, 2, 2.0, 3.0), 0.0);
    }

    #[test]
    fn crossing_heights_split_at_root() {
        let lp = AdmissibleLoop::from_vertices(vec![
            vec![(0.0, 0.0), (1.0, 1.0)],
            vec![(1.0, 0.0), (0.0, 1.0)],
        ])
        .unwrap();
        // heights x and 1−x, opposite directions: σ = −1
        let spec = covariance_fn(&lp, GaugeChoice::Pax);
        assert!((spec.interval_integral(1, 2, 0.0, 1.0) - 0.25).abs() < 1e-15);
        // same heights on two right-moving pieces of a four-piece loop
        let lp = AdmissibleLoop::from_vertices(vec![
            vec![(0.0, 0.0), (1.0, 1.0)],
            vec![(1.0, 3.0), (0.0, 3.0)],
            vec![(0.0, 1.0), (1.0, 0.0)],
            vec![(1.0, 4.0), (0.0, 4.0)],
        ])
        .unwrap();
        let spec = covariance_fn(&lp, GaugeChoice::Pax);
        assert!((spec.interval_integral(1, 3, 0.0, 1.0) + 0.25).abs() < 1e-15);
        assert!((spec.interval_integral(1, 3, 0.0, 0.5) + 0.125).abs() < 1e-15);
    }

    #[test]
    fn shift_and_mass_limits() {
        let (y, y2) = (0.3, 1.9);
        let c = 2.5;
        let d = green_scalar(GaugeChoice::PaxShift(c), y, y2) - green_scalar(GaugeChoice::Pax, y, y2);
        assert!((d - c / 2.0).abs() < 1e-15);
        let pax = green_scalar(GaugeChoice::Pax, y, y2);
        let err = |m: f64| (green_scalar(GaugeChoice::PaxMass(m), y, y2) - 1.0 / (2.0 * m) - pax).abs();
        let (e2, e3) = (err(1e-2), err(1e-3));
        assert!(e3 < 1e-3);
        let ratio = e2 / e3;
        assert!(ratio > 8.0 && ratio < 12.0, "first-order convergence, ratio {ratio}");
    }

    #[test]
    fn tilde_identity_holds_on_test_loops() {
        for lp in [rectangle(), triangle(), two_lap()] {
            assert!(covariance_fn(&lp, GaugeChoice::Ax).tilde_self_check(100) < 1e-12);
        }
    }

    fn midpoint_integral(spec: &CovarianceSpec, a: usize, b: usize, lo: f64, hi: f64) -> f64 {
        let n = 20000;
        let h = (hi - lo) / n as f64;
        (0..n).map(|k| spec.kernel(a, b, lo + (k as f64 + 0.5) * h) * h).sum()
    }

    fn zigzag() -> AdmissibleLoop {
        AdmissibleLoop::from_vertices(vec![
            vec![(0.0, -0.4), (0.3, 0.8), (0.7, -0.2), (1.0, 0.5)],
            vec![(1.0, 1.2), (0.5, 0.1), (0.0, 0.9)],
        ])
        .unwrap()
    }

    #[test]
    fn closed_form_integrals_match_quadrature() {
        let lp = zigzag();
        for gauge in [GaugeChoice::Pax, GaugeChoice::Ax, GaugeChoice::PaxMass(1.7), GaugeChoice::PaxShift(0.8)] {
            let spec = covariance_fn(&lp, gauge);
            for a in 0..=2 {
                for b in 0..=2 {
                    let exact = spec.interval_integral(a, b, 0.1, 0.93);
                    let approx = midpoint_integral(&spec, a, b, 0.1, 0.93);
                    assert!((exact - approx).abs() < 1e-6, "{gauge} {a} {b}: {exact} vs {approx}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn kernels_are_symmetric(x in 0.0f64..1.0, m in 0.1f64..3.0) {
            let lp = zigzag();
            for gauge in [GaugeChoice::Pax, GaugeChoice::Ax, GaugeChoice::PaxMass(m), GaugeChoice::PaxShift(m)] {
                let spec = covariance_fn(&lp, gauge);
                for a in 0..=2 {
                    for b in 0..=2 {
                        prop_assert_eq!(spec.kernel(a, b, x), spec.kernel(b, a, x));
                    }
                }
            }
        }

        #[test]
        fn ax_gram_matrix_is_psd(cuts in prop::collection::vec(0.0f64..1.0, 1..4)) {
            // loop above the axis; blocks over an interval family are block-diagonal
            let lp = triangle().translated(0.0, 0.3);
            let spec = covariance_fn(&lp, GaugeChoice::Ax);
            let mut xs = cuts.clone();
            xs.extend([0.0, 1.0]);
            xs.sort_by(f64::total_cmp);
            for w in xs.windows(2) {
                let g = [[spec.interval_integral(1, 1, w[0], w[1]), spec.interval_integral(1, 2, w[0], w[1])],
                         [spec.interval_integral(2, 1, w[0], w[1]), spec.interval_integral(2, 2, w[0], w[1])]];
                let tr = g[0][0] + g[1][1];
                let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
                let disc = ((tr * tr / 4.0) - det).max(0.0).sqrt();
                prop_assert!(tr / 2.0 - disc >= -1e-10);
            }
        }
    }

    #[test]
    fn constant_covariance_is_overlap_length() {
        let c = ConstantCovariance::new(vec![vec![0.0; 3], vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]], (0.0, 1.0));
        assert_eq!(c.pair_integral(1, 2, 0.25, 0.5), 0.25);
    }
}
