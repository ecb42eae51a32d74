//! Exact heat-kernel values for simple loops and disjoint products, with an
//! SU(2) character-expansion cross-check.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::lie_core::{GroupId, RepId, Representation};

/// prefactor · exp(−λ · rate).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExactValue {
    pub prefactor: f64,
    pub rate: f64,
}

impl ExactValue {
    pub fn value(&self, lambda: f64) -> f64 {
        self.prefactor * (-lambda * self.rate).exp()
    }

    /// Taylor coefficients in λ, k = 0..=max_order.
    pub fn coefficients(&self, max_order: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(max_order + 1);
        let mut c = self.prefactor;
        for k in 0..=max_order {
            if k > 0 {
                c *= -self.rate / k as f64;
            }
            out.push(c);
        }
        out
    }
}

/// dim(ρ) · exp(−λ · area · κ₂(ρ)/2).
pub fn exact_simple_loop(rep: &Representation, area: f64) -> Result<ExactValue> {
    if !(area >= 0.0 && area.is_finite()) {
        return Err(Error::Invalid(format!("area must be ≥ 0, got {area}")));
    }
    Ok(ExactValue { prefactor: rep.dim as f64, rate: area * rep.casimir_scalar / 2.0 })
}

/// Product of the simple-loop values of disjoint loops.
pub fn exact_disjoint_product(loops: &[(&Representation, f64)]) -> Result<ExactValue> {
    let mut out = ExactValue { prefactor: 1.0, rate: 0.0 };
    for &(rep, area) in loops {
        let v = exact_simple_loop(rep, area)?;
        out.prefactor *= v.prefactor;
        out.rate += v.rate;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CharacterCheck {
    pub value: f64,
    /// Sup-norm bound on the omitted heat-kernel terms.
    pub tail: f64,
    /// Set when the tail bound exceeds 1e-8.
    pub truncated: bool,
}

/// κ₂ of the spin-j representation, normalized so that κ₂(½) = 3/2.
pub fn su2_casimir(two_j: usize) -> f64 {
    let j = two_j as f64 / 2.0;
    2.0 * j * (j + 1.0)
}

fn su2_character(two_j: usize, theta: f64) -> f64 {
    let s = theta.sin();
    if s.abs() < 1e-300 {
        return (two_j + 1) as f64;
    }
    ((two_j + 1) as f64 * theta).sin() / s
}

/// ∫ χ_ρ(g) K_t(g) dg for SU(2), t = λ·area, via Weyl integration over the
/// maximal torus. The heat kernel is summed over spins j ≤ `cutoff`.
pub fn su2_character_check(rep: &Representation, area: f64, lambda: f64, cutoff: usize) -> Result<CharacterCheck> {
    if rep.group_id != GroupId::SU2 {
        return Err(Error::UnsupportedRepresentation(format!("character check needs SU(2), got {rep}")));
    }
    if cutoff < 1 {
        return Err(Error::Invalid("cutoff must be ≥ 1".into()));
    }
    let two_rho = match rep.rep_id {
        RepId::Trivial => 0,
        RepId::Fundamental => 1,
        RepId::Charge(_) => return Err(Error::UnsupportedRepresentation(rep.to_string())),
    };
    let t = lambda * area;
    let max_two_j = 2 * cutoff;
    // integrand is a trigonometric polynomial of degree ≤ max_two_j + two_rho + 2
    let m = 4 * (max_two_j + two_rho + 4);
    let h = PI / m as f64;
    let mut value = 0.0;
    for i in 1..m {
        let theta = i as f64 * h;
        let kernel: f64 = (0..=max_two_j)
            .map(|n| (n + 1) as f64 * (-t * su2_casimir(n) / 2.0).exp() * su2_character(n, theta))
            .sum();
        let weyl = 2.0 / PI * theta.sin().powi(2);
        value += weyl * su2_character(two_rho, theta) * kernel;
    }
    value *= h;
    let tail = if t <= 0.0 {
        f64::INFINITY
    } else {
        (max_two_j + 1..max_two_j + 2000)
            .map(|n| ((n + 1) as f64).powi(2) * (-t * su2_casimir(n) / 2.0).exp())
            .sum()
    };
    Ok(CharacterCheck { value, tail, truncated: tail > 1e-8 })
}
