//! Compact gauge groups as explicit matrix representations, and Lie factors
//! of chord diagrams.
//!
//! The inner product on 𝔤 is ⟨X, Y⟩ = −tr(XY) in the defining representation.
//! Every representation stores ρ(e_a) for an orthonormal basis e_a and the
//! positive Casimir scalar κ₂ with Σ_a ρ(e_a)ρ(e_a) = −κ₂·Id.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Small dense complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    n: usize,
    data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[&[Complex64]]) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            assert_eq!(r.len(), n, "matrix must be square");
            data.extend_from_slice(r);
        }
        Self { n, data }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        Self { n: self.n, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                m.set(i, j, self.get(j, i).conj());
            }
        }
        m
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    /// In-place `self += s * other`.
    pub fn axpy(&mut self, s: f64, other: &Self) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Mul for &CMat {
    type Output = CMat;
    fn mul(self, rhs: &CMat) -> CMat {
        let n = self.n;
        debug_assert_eq!(n, rhs.n);
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl Add for &CMat {
    type Output = CMat;
    fn add(self, rhs: &CMat) -> CMat {
        CMat { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect() }
    }
}

impl Sub for &CMat {
    type Output = CMat;
    fn sub(self, rhs: &CMat) -> CMat {
        CMat { n: self.n, data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GroupId {
    U1,
    SU2,
    SU3,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RepId {
    Fundamental,
    Trivial,
    /// U(1) charge q.
    Charge(f64),
}

/// A representation ρ of a compact group with an orthonormal basis of 𝔤.
#[derive(Clone, Debug)]
pub struct Representation {
    pub group_id: GroupId,
    pub rep_id: RepId,
    pub dim: usize,
    /// ρ(e_a), a = 1..dim 𝔤.
    pub basis: Vec<CMat>,
    /// The e_a in the defining representation (orthonormal under −tr).
    pub algebra_basis: Vec<CMat>,
    pub casimir_scalar: f64,
    casimir_matrix: CMat,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn pauli() -> [CMat; 3] {
    let z = c(0.0, 0.0);
    [
        CMat::from_rows(&[&[z, c(1.0, 0.0)], &[c(1.0, 0.0), z]]),
        CMat::from_rows(&[&[z, c(0.0, -1.0)], &[c(0.0, 1.0), z]]),
        CMat::from_rows(&[&[c(1.0, 0.0), z], &[z, c(-1.0, 0.0)]]),
    ]
}

fn gell_mann() -> Vec<CMat> {
    let mut out = Vec::with_capacity(8);
    let mut put = |entries: &[(usize, usize, Complex64)]| {
        let mut m = CMat::zeros(3);
        for &(i, j, v) in entries {
            m.set(i, j, v);
        }
        out.push(m);
    };
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    put(&[(0, 1, one), (1, 0, one)]);
    put(&[(0, 1, -i), (1, 0, i)]);
    put(&[(0, 0, one), (1, 1, -one)]);
    put(&[(0, 2, one), (2, 0, one)]);
    put(&[(0, 2, -i), (2, 0, i)]);
    put(&[(1, 2, one), (2, 1, one)]);
    put(&[(1, 2, -i), (2, 1, i)]);
    let s = 1.0 / 3f64.sqrt();
    put(&[(0, 0, c(s, 0.0)), (1, 1, c(s, 0.0)), (2, 2, c(-2.0 * s, 0.0))]);
    out
}

/// Hermitian h ↦ h/(i√2), anti-Hermitian with −tr(e e) = tr(h h)/2.
fn to_anti_hermitian(h: &CMat) -> CMat {
    h.scale(c(0.0, -1.0 / 2f64.sqrt()))
}

pub fn make_representation(group_id: GroupId, rep_id: RepId) -> Result<Representation> {
    let (algebra_basis, basis) = match (group_id, rep_id) {
        (GroupId::U1, RepId::Charge(q)) if q.is_finite() => {
            let e = CMat::from_rows(&[&[c(0.0, 1.0)]]);
            let r = CMat::from_rows(&[&[c(0.0, q)]]);
            (vec![e], vec![r])
        }
        (GroupId::U1, RepId::Fundamental) => {
            let e = CMat::from_rows(&[&[c(0.0, 1.0)]]);
            (vec![e.clone()], vec![e])
        }
        (GroupId::U1, RepId::Trivial) => {
            let e = CMat::from_rows(&[&[c(0.0, 1.0)]]);
            (vec![e], vec![CMat::zeros(1)])
        }
        (GroupId::SU2, RepId::Fundamental) => {
            let b: Vec<CMat> = pauli().iter().map(to_anti_hermitian).collect();
            (b.clone(), b)
        }
        (GroupId::SU2, RepId::Trivial) => {
            let b: Vec<CMat> = pauli().iter().map(to_anti_hermitian).collect();
            (b, vec![CMat::zeros(1); 3])
        }
        (GroupId::SU3, RepId::Fundamental) => {
            let b: Vec<CMat> = gell_mann().iter().map(to_anti_hermitian).collect();
            (b.clone(), b)
        }
        (GroupId::SU3, RepId::Trivial) => {
            let b: Vec<CMat> = gell_mann().iter().map(to_anti_hermitian).collect();
            (b, vec![CMat::zeros(1); 8])
        }
        _ => return Err(Error::UnsupportedRepresentation(format!("{group_id:?}/{rep_id:?}"))),
    };
    let dim = basis[0].dim();
    let mut casimir_matrix = CMat::zeros(dim);
    for e in &basis {
        casimir_matrix = &casimir_matrix + &(e * e);
    }
    let casimir_scalar = -casimir_matrix.get(0, 0).re;
    Ok(Representation { group_id, rep_id, dim, basis, algebra_basis, casimir_scalar, casimir_matrix })
}

impl Representation {
    /// Parses "u1:<q>", "su2:fund", "su2:trivial", "su3:fund", "su3:trivial".
    pub fn parse(s: &str) -> Result<Self> {
        let unsupported = || Error::UnsupportedRepresentation(s.to_string());
        let (g, r) = s.trim().split_once(':').ok_or_else(unsupported)?;
        let group = match g.to_ascii_lowercase().as_str() {
            "u1" => GroupId::U1,
            "su2" => GroupId::SU2,
            "su3" => GroupId::SU3,
            _ => return Err(unsupported()),
        };
        let rep = match (group, r) {
            (GroupId::U1, q) => RepId::Charge(q.parse::<f64>().map_err(|_| unsupported())?),
            (_, "fund") | (_, "fundamental") => RepId::Fundamental,
            (_, "trivial") => RepId::Trivial,
            _ => return Err(unsupported()),
        };
        make_representation(group, rep)
    }

    pub fn lie_dim(&self) -> usize {
        self.basis.len()
    }

    /// Σ_a ρ(e_a)ρ(e_a).
    pub fn casimir_matrix(&self) -> &CMat {
        &self.casimir_matrix
    }

    /// ρ(X) for X = Σ_a x_a e_a.
    pub fn algebra_element(&self, coords: &[f64]) -> CMat {
        let mut m = CMat::zeros(self.dim);
        for (x, e) in coords.iter().zip(&self.basis) {
            m.axpy(*x, e);
        }
        m
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = match self.group_id {
            GroupId::U1 => "u1",
            GroupId::SU2 => "su2",
            GroupId::SU3 => "su3",
        };
        match self.rep_id {
            RepId::Charge(q) => write!(f, "{g}:{q}"),
            RepId::Fundamental => write!(f, "{g}:fund"),
            RepId::Trivial => write!(f, "{g}:trivial"),
        }
    }
}

/// A perfect matching of 2n ordered slots, each attached to a curve.
///
/// Slot 0 is the leftmost letter of the trace word.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ChordDiagram {
    slot_curve: Vec<usize>,
    partner: Vec<usize>,
    tadpole: Vec<bool>,
}

impl ChordDiagram {
    /// `partner` must be a fixed-point-free involution; `tadpole[k]` marks
    /// slots belonging to same-curve adjacent tadpole chords.
    pub fn new(slot_curve: Vec<usize>, partner: Vec<usize>, tadpole: Vec<bool>) -> Result<Self> {
        let n = partner.len();
        if slot_curve.len() != n || tadpole.len() != n {
            return Err(Error::Invalid("chord diagram slot count mismatch".into()));
        }
        if n % 2 != 0 {
            return Err(Error::Invalid("odd number of slots".into()));
        }
        for (i, &p) in partner.iter().enumerate() {
            if p >= n || p == i || partner[p] != i {
                return Err(Error::Invalid(format!("pairing is not an involution at slot {i}")));
            }
            if tadpole[i] {
                if !tadpole[p] || slot_curve[i] != slot_curve[p] || i.abs_diff(p) != 1 {
                    return Err(Error::Invalid(format!("bad tadpole chord at slot {i}")));
                }
            }
        }
        Ok(Self { slot_curve, partner, tadpole })
    }

    /// Diagram on a single curve from a list of chords (0-based slot pairs).
    pub fn from_pairs(n_slots: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut partner = vec![usize::MAX; n_slots];
        for &(a, b) in pairs {
            if a >= n_slots || b >= n_slots {
                return Err(Error::Invalid("chord diagram slot count mismatch".into()));
            }
            partner[a] = b;
            partner[b] = a;
        }
        if partner.contains(&usize::MAX) {
            return Err(Error::Invalid("chord diagram slot count mismatch".into()));
        }
        Self::new(vec![1; n_slots], partner, vec![false; n_slots])
    }

    pub fn n_chords(&self) -> usize {
        self.partner.len() / 2
    }

    pub fn total_slots(&self) -> usize {
        self.partner.len()
    }

    pub fn partner(&self) -> &[usize] {
        &self.partner
    }

    pub fn slot_curve(&self) -> &[usize] {
        &self.slot_curve
    }

    pub fn is_tadpole(&self, slot: usize) -> bool {
        self.tadpole[slot]
    }

    /// Chords as (lower, upper) slot pairs, sorted.
    pub fn chords(&self) -> Vec<(usize, usize)> {
        (0..self.partner.len())
            .filter(|&i| i < self.partner[i])
            .map(|i| (i, self.partner[i]))
            .collect()
    }

    /// Rotates slot positions cyclically by `k` (slot i moves to i+k).
    pub fn rotated(&self, k: usize) -> Self {
        let n = self.partner.len();
        let mut slot_curve = vec![0; n];
        let mut partner = vec![0; n];
        let mut tadpole = vec![false; n];
        for i in 0..n {
            let j = (i + k) % n;
            slot_curve[j] = self.slot_curve[i];
            partner[j] = (self.partner[i] + k) % n;
            tadpole[j] = self.tadpole[i];
        }
        // a tadpole split across the wrap-around is no longer adjacent in the word
        for i in 0..n {
            if tadpole[i] && i.abs_diff(partner[i]) != 1 {
                tadpole[i] = false;
            }
        }
        Self { slot_curve, partner, tadpole }
    }
}

/// tr_V of the contracted word Σ_{a} ρ(e_{a_1})⋯ρ(e_{a_2n}), one summed
/// index per chord.
///
/// Chords joining adjacent slots are contracted to the Casimir matrix first;
/// this is the same sum, evaluated with fewer products.
pub fn lie_factor(rep: &Representation, diagram: &ChordDiagram) -> Result<f64> {
    let n = diagram.total_slots();
    if n == 0 {
        return Ok(rep.dim as f64);
    }
    let partner = diagram.partner();
    let mut chosen = vec![usize::MAX; n];
    let prefix = CMat::identity(rep.dim);
    let z = word_sum(rep, partner, 0, &prefix, &mut chosen);
    if z.im.abs() >= 1e-10 * (1.0 + z.re.abs()) {
        return Err(Error::Invalid(format!("Lie factor has imaginary part {}", z.im)));
    }
    Ok(z.re)
}

fn word_sum(
    rep: &Representation,
    partner: &[usize],
    pos: usize,
    prefix: &CMat,
    chosen: &mut [usize],
) -> Complex64 {
    if pos == partner.len() {
        return prefix.trace();
    }
    let p = partner[pos];
    if p == pos + 1 {
        let next = prefix * rep.casimir_matrix();
        return word_sum(rep, partner, pos + 2, &next, chosen);
    }
    if p < pos {
        let next = prefix * &rep.basis[chosen[p]];
        return word_sum(rep, partner, pos + 1, &next, chosen);
    }
    let mut total = Complex64::new(0.0, 0.0);
    for a in 0..rep.basis.len() {
        chosen[pos] = a;
        let next = prefix * &rep.basis[a];
        total += word_sum(rep, partner, pos + 1, &next, chosen);
    }
    chosen[pos] = usize::MAX;
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn su2() -> Representation {
        make_representation(GroupId::SU2, RepId::Fundamental).unwrap()
    }

    fn all_reps() -> Vec<Representation> {
        vec![
            su2(),
            make_representation(GroupId::SU3, RepId::Fundamental).unwrap(),
            make_representation(GroupId::U1, RepId::Charge(1.0)).unwrap(),
        ]
    }

    #[test]
    fn basis_is_orthonormal_antihermitian_traceless() {
        for rep in all_reps() {
            let b = &rep.algebra_basis;
            for (i, ei) in b.iter().enumerate() {
                let ah = ei + &ei.adjoint();
                assert!(ah.max_abs() < 1e-12);
                if rep.group_id != GroupId::U1 {
                    assert!(ei.trace().norm() < 1e-12);
                }
                for (j, ej) in b.iter().enumerate() {
                    let ip = -(ei * ej).trace();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((ip.re - want).abs() < 1e-12 && ip.im.abs() < 1e-12, "{rep} {i} {j}");
                }
            }
        }
    }

    #[test]
    fn casimir_is_central_scalar() {
        let cases = [
            (Representation::parse("su2:fund").unwrap(), 1.5, 2),
            (Representation::parse("su3:fund").unwrap(), 8.0 / 3.0, 3),
            (Representation::parse("u1:2").unwrap(), 4.0, 1),
            (Representation::parse("su2:trivial").unwrap(), 0.0, 1),
        ];
        for (rep, k, d) in cases {
            assert_eq!(rep.dim, d);
            assert!((rep.casimir_scalar - k).abs() < 1e-12);
            let diff = rep.casimir_matrix() + &CMat::identity(d).scale_re(k);
            assert!(diff.max_abs() < 1e-12);
        }
    }

    #[test]
    fn inner_product_is_ad_invariant() {
        let rep = Representation::parse("su3:fund").unwrap();
        let x = rep.algebra_element(&[0.3, -1.2, 0.7, 0.1, 2.0, -0.4, 0.9, 0.25]);
        for a in 0..8 {
            for b in 0..8 {
                let ca = x.commutator(&rep.basis[a]);
                let cb = x.commutator(&rep.basis[b]);
                let ab = -(&ca * &cb).trace();
                let ba = -(&cb * &ca).trace();
                assert!((ab - ba).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn unsupported_pairs_are_rejected() {
        assert!(matches!(
            make_representation(GroupId::SU2, RepId::Charge(1.0)),
            Err(Error::UnsupportedRepresentation(_))
        ));
        assert!(Representation::parse("so3:fund").is_err());
        assert!(Representation::parse("su2:adjoint").is_err());
        assert!(Representation::parse("u1:abc").is_err());
    }

    #[test]
    fn su2_reference_factors() {
        let rep = su2();
        let single = ChordDiagram::from_pairs(2, &[(0, 1)]).unwrap();
        let nested = ChordDiagram::from_pairs(4, &[(0, 3), (1, 2)]).unwrap();
        let crossing = ChordDiagram::from_pairs(4, &[(0, 2), (1, 3)]).unwrap();
        assert!((lie_factor(&rep, &single).unwrap() + 3.0).abs() < 1e-12);
        assert!((lie_factor(&rep, &nested).unwrap() - 4.5).abs() < 1e-12);
        assert!((lie_factor(&rep, &crossing).unwrap() + 1.5).abs() < 1e-12);
    }

    /// Straight sum over all index tuples, no Casimir shortcut.
    fn brute_lie_factor(rep: &Representation, partner: &[usize]) -> f64 {
        let chords: Vec<usize> = (0..partner.len()).filter(|&i| i < partner[i]).collect();
        let g = rep.lie_dim();
        let mut total = 0.0;
        for code in 0..g.pow(chords.len() as u32) {
            let mut idx = vec![0; partner.len()];
            let mut rest = code;
            for &i in &chords {
                idx[i] = rest % g;
                idx[partner[i]] = rest % g;
                rest /= g;
            }
            let mut m = CMat::identity(rep.dim);
            for &a in &idx {
                m = &m * &rep.basis[a];
            }
            total += m.trace().re;
        }
        total
    }

    fn matching_strategy(max_pairs: usize) -> impl Strategy<Value = Vec<usize>> {
        (1..=max_pairs).prop_flat_map(|n| {
            Just((0..2 * n).collect::<Vec<usize>>()).prop_shuffle().prop_map(|perm| {
                let mut partner = vec![0; perm.len()];
                for pair in perm.chunks(2) {
                    partner[pair[0]] = pair[1];
                    partner[pair[1]] = pair[0];
                }
                partner
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn matches_brute_force_and_is_cyclic(partner in matching_strategy(4), k in 0usize..8) {
            let rep = su2();
            let n = partner.len();
            let d = ChordDiagram::new(vec![1; n], partner.clone(), vec![false; n]).unwrap();
            let v = lie_factor(&rep, &d).unwrap();
            prop_assert!((v - brute_lie_factor(&rep, &partner)).abs() < 1e-10);
            let r = lie_factor(&rep, &d.rotated(k % n)).unwrap();
            prop_assert!((v - r).abs() < 1e-10);
        }

        #[test]
        fn abelian_factor_is_diagram_independent(partner in matching_strategy(4), q in 0.5f64..2.0) {
            let rep = make_representation(GroupId::U1, RepId::Charge(q)).unwrap();
            let n = partner.len();
            let d = ChordDiagram::new(vec![1; n], partner, vec![false; n]).unwrap();
            let want = (-q * q).powi((n / 2) as i32);
            prop_assert!((lie_factor(&rep, &d).unwrap() - want).abs() < 1e-10 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn fully_nested_is_casimir_power() {
        for rep in all_reps() {
            for n in 1..=4 {
                let pairs: Vec<_> = (0..n).map(|i| (i, 2 * n - 1 - i)).collect();
                let d = ChordDiagram::from_pairs(2 * n, &pairs).unwrap();
                let want = (-rep.casimir_scalar).powi(n as i32) * rep.dim as f64;
                assert!((lie_factor(&rep, &d).unwrap() - want).abs() < 1e-10 * (1.0 + want.abs()));
            }
        }
    }

    #[test]
    fn malformed_diagrams_are_rejected() {
        assert!(ChordDiagram::new(vec![1, 1], vec![0, 1], vec![false; 2]).is_err());
        assert!(ChordDiagram::new(vec![1, 1, 1], vec![1, 0], vec![false; 2]).is_err());
        assert!(ChordDiagram::new(vec![1, 2], vec![1, 0], vec![true; 2]).is_err());
        assert!(ChordDiagram::from_pairs(4, &[(0, 1)]).is_err());
    }
}
