//! Truncated formal series in interval generators M^{α,a}(I) and their
//! Wick-rule expectation.
//!
//! A monomial is an ordered word of slots (leftmost = latest along the loop).
//! The Lie index of each differential slot is implicit: slot k stands for
//! Σ_a M^{α_k,a}(I_k) e_a, so the trace of a word is a chord-diagram sum.
//! A Riemann slot is a scalar λ∫_I C^{αα} times the Casimir Σ_a e_a e_a.

use std::collections::HashMap;
use std::sync::RwLock;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gauge_covariance::Covariance;
use crate::lattice_transport::Lattice;
use crate::lie_core::{lie_factor, ChordDiagram, Representation};

/// Hard cap on the number of word positions in a single diagram.
pub const MAX_DIAGRAM_SLOTS: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SlotKind {
    Differential,
    /// Adjacent-pair expectation: λ∫_I C^{αα} times a Casimir insertion.
    Riemann,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Slot {
    pub curve: usize,
    pub a: f64,
    pub b: f64,
    pub kind: SlotKind,
}

impl Slot {
    pub fn differential(curve: usize, a: f64, b: f64) -> Self {
        Self { curve, a, b, kind: SlotKind::Differential }
    }

    pub fn riemann(curve: usize, a: f64, b: f64) -> Self {
        Self { curve, a, b, kind: SlotKind::Riemann }
    }

    /// Slot budget consumed: one per differential, two per Riemann insertion.
    pub fn weight(&self) -> usize {
        match self.kind {
            SlotKind::Differential => 1,
            SlotKind::Riemann => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub coefficient: f64,
    pub slots: Vec<Slot>,
}

impl Monomial {
    pub fn new(coefficient: f64, slots: Vec<Slot>) -> Self {
        Self { coefficient, slots }
    }

    pub fn weight(&self) -> usize {
        self.slots.iter().map(Slot::weight).sum()
    }

    pub fn n_differential(&self) -> usize {
        self.slots.iter().filter(|s| s.kind == SlotKind::Differential).count()
    }

    pub fn n_riemann(&self) -> usize {
        self.slots.len() - self.n_differential()
    }

    /// λ-order this monomial contributes to (when its differentials pair up).
    pub fn lambda_degree(&self) -> usize {
        self.n_differential() / 2 + self.n_riemann()
    }
}

/// How a series was built; lets the Stratonovich→Itô conversion re-derive
/// the iterated-sum structure instead of guessing it from words.
#[derive(Clone, Debug, PartialEq)]
pub enum SeriesOrigin {
    Generic,
    Ito { lattice: Lattice, curve: usize, x_minus: f64, x_plus: f64 },
    Stratonovich { lattice: Lattice, curve: usize, x_minus: f64, x_plus: f64 },
    Product(Vec<SeriesOrigin>),
}

/// A finite sum of monomials truncated at λ-order K (slot weight ≤ 2K).
#[derive(Clone, Debug, PartialEq)]
pub struct FormalSeries {
    monomials: Vec<Monomial>,
    order: usize,
    origin: SeriesOrigin,
}

impl FormalSeries {
    pub fn one(order: usize) -> Self {
        Self { monomials: vec![Monomial::new(1.0, Vec::new())], order, origin: SeriesOrigin::Generic }
    }

    pub fn zero(order: usize) -> Self {
        Self { monomials: Vec::new(), order, origin: SeriesOrigin::Generic }
    }

    /// Monomials above the truncation are dropped.
    pub fn from_monomials(order: usize, monomials: Vec<Monomial>) -> Self {
        let monomials = monomials.into_iter().filter(|m| m.weight() <= 2 * order).collect();
        Self { monomials, order, origin: SeriesOrigin::Generic }
    }

    pub(crate) fn with_origin(mut self, origin: SeriesOrigin) -> Self {
        self.origin = origin;
        self
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn origin(&self) -> &SeriesOrigin {
        &self.origin
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn scale(&self, s: f64) -> Self {
        let monomials =
            self.monomials.iter().map(|m| Monomial::new(m.coefficient * s, m.slots.clone())).collect();
        Self { monomials, order: self.order, origin: SeriesOrigin::Generic }
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = self.order.min(other.order);
        let monomials = self.monomials.iter().chain(&other.monomials).cloned().collect();
        Self::from_monomials(order, monomials)
    }

    /// Word concatenation `self · other`, truncated at the smaller order.
    pub fn mul(&self, other: &Self) -> Self {
        let order = self.order.min(other.order);
        let budget = 2 * order;
        let mut monomials = Vec::new();
        for p in &self.monomials {
            let wp = p.weight();
            if wp > budget {
                continue;
            }
            for q in &other.monomials {
                if wp + q.weight() > budget {
                    continue;
                }
                let mut slots = p.slots.clone();
                slots.extend_from_slice(&q.slots);
                monomials.push(Monomial::new(p.coefficient * q.coefficient, slots));
            }
        }
        let origin = match (&self.origin, &other.origin) {
            (SeriesOrigin::Generic, _) | (_, SeriesOrigin::Generic) => SeriesOrigin::Generic,
            (SeriesOrigin::Product(a), SeriesOrigin::Product(b)) => {
                SeriesOrigin::Product(a.iter().chain(b).cloned().collect())
            }
            (SeriesOrigin::Product(a), o) => {
                SeriesOrigin::Product(a.iter().cloned().chain(std::iter::once(o.clone())).collect())
            }
            (o, SeriesOrigin::Product(b)) => {
                SeriesOrigin::Product(std::iter::once(o.clone()).chain(b.iter().cloned()).collect())
            }
            (a, b) => SeriesOrigin::Product(vec![a.clone(), b.clone()]),
        };
        Self { monomials, order, origin }
    }

    pub fn product(factors: &[FormalSeries]) -> Self {
        let mut it = factors.iter();
        let Some(first) = it.next() else { return Self::one(0) };
        it.fold(first.clone(), |acc, f| acc.mul(f))
    }
}

/// ∫_{I₁∩I₂} C^{α₁α₂} for two differential slots.
pub fn pair_covariance(spec: &dyn Covariance, s1: &Slot, s2: &Slot) -> Result<f64> {
    if s1.kind != SlotKind::Differential || s2.kind != SlotKind::Differential {
        return Err(Error::Invalid("pair_covariance needs two differential slots".into()));
    }
    Ok(raw_pair(spec, s1, s2))
}

fn raw_pair(spec: &dyn Covariance, s1: &Slot, s2: &Slot) -> f64 {
    let (a, b) = (s1.a.max(s2.a), s1.b.min(s2.b));
    if b <= a {
        0.0
    } else {
        spec.pair_integral(s1.curve, s2.curve, a, b)
    }
}

/// All (n−1)!! perfect matchings of `n_slots` positions, each as a list of
/// (i, j) pairs with i < j, in lexicographic order.
pub fn enumerate_pairings(n_slots: usize, max_order: usize) -> Result<Vec<Vec<(usize, usize)>>> {
    if n_slots > 2 * max_order {
        return Err(Error::TruncationExceeded(format!("{n_slots} slots exceed 2·K = {}", 2 * max_order)));
    }
    let mut out = Vec::new();
    if n_slots % 2 == 1 {
        return Ok(out);
    }
    let mut used = vec![false; n_slots];
    let mut current = Vec::with_capacity(n_slots / 2);
    fn rec(used: &mut [bool], current: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        let Some(i) = used.iter().position(|u| !u) else {
            out.push(current.clone());
            return;
        };
        used[i] = true;
        for j in i + 1..used.len() {
            if !used[j] {
                used[j] = true;
                current.push((i, j));
                rec(used, current, out);
                current.pop();
                used[j] = false;
            }
        }
        used[i] = false;
    }
    rec(&mut used, &mut current, &mut out);
    Ok(out)
}

/// Memoised Lie factors keyed by partner vectors.
pub(crate) struct LieCache<'a> {
    rep: &'a Representation,
    map: RwLock<HashMap<Vec<u8>, f64>>,
}

impl<'a> LieCache<'a> {
    pub(crate) fn new(rep: &'a Representation) -> Self {
        Self { rep, map: RwLock::new(HashMap::new()) }
    }

    pub(crate) fn get(&self, partner: &[usize]) -> Result<f64> {
        let key: Vec<u8> = partner.iter().map(|&p| p as u8).collect();
        if let Some(v) = self.map.read().expect("lie cache poisoned").get(&key) {
            return Ok(*v);
        }
        let n = partner.len();
        let d = ChordDiagram::new(vec![1; n], partner.to_vec(), vec![false; n])?;
        let v = lie_factor(self.rep, &d)?;
        self.map.write().expect("lie cache poisoned").insert(key, v);
        Ok(v)
    }
}

/// Per-order coefficients 0..=K of E(tr series).
pub fn expectation_trace(series: &FormalSeries, rep: &Representation, spec: &dyn Covariance) -> Result<Vec<f64>> {
    let k = series.order();
    let cache = LieCache::new(rep);
    let parts: Vec<Result<Option<(usize, f64)>>> =
        series.monomials().par_iter().map(|m| monomial_expectation(m, k, spec, &cache)).collect();
    let mut out = vec![0.0; k + 1];
    for p in parts {
        if let Some((order, v)) = p? {
            out[order] += v;
        }
    }
    Ok(out)
}

/// (λ-order, value) of one monomial, or None if it vanishes or is truncated.
fn monomial_expectation(
    m: &Monomial,
    max_order: usize,
    spec: &dyn Covariance,
    cache: &LieCache,
) -> Result<Option<(usize, f64)>> {
    let d = m.n_differential();
    if d % 2 == 1 || m.coefficient == 0.0 {
        return Ok(None);
    }
    let order = m.lambda_degree();
    if order > max_order {
        return Ok(None);
    }
    if 2 * order > MAX_DIAGRAM_SLOTS {
        return Err(Error::Resource(format!("diagram with {} slots exceeds the cap {MAX_DIAGRAM_SLOTS}", 2 * order)));
    }
    // word positions: a Riemann slot occupies two adjacent, pre-paired positions
    let mut pos = Vec::with_capacity(m.slots.len());
    let mut diff_slots = Vec::with_capacity(d);
    let mut diff_pos = Vec::with_capacity(d);
    let mut scalar = m.coefficient;
    let mut partner = Vec::with_capacity(2 * order);
    for s in &m.slots {
        pos.push(partner.len());
        match s.kind {
            SlotKind::Differential => {
                diff_slots.push(*s);
                diff_pos.push(partner.len());
                partner.push(usize::MAX);
            }
            SlotKind::Riemann => {
                let w = spec.pair_integral(s.curve, s.curve, s.a, s.b);
                if w == 0.0 {
                    return Ok(None);
                }
                scalar *= w;
                let p = partner.len();
                partner.push(p + 1);
                partner.push(p);
            }
        }
    }
    let mut cov = vec![0.0; d * d];
    for i in 0..d {
        for j in i + 1..d {
            let c = raw_pair(spec, &diff_slots[i], &diff_slots[j]);
            cov[i * d + j] = c;
            cov[j * d + i] = c;
        }
    }
    let mut used = vec![false; d];
    let mut total = 0.0;
    sum_matchings(&cov, d, &diff_pos, &mut used, &mut partner, 1.0, cache, &mut total)?;
    Ok(Some((order, scalar * total)))
}

#[allow(clippy::too_many_arguments)]
fn sum_matchings(
    cov: &[f64],
    d: usize,
    diff_pos: &[usize],
    used: &mut [bool],
    partner: &mut [usize],
    weight: f64,
    cache: &LieCache,
    total: &mut f64,
) -> Result<()> {
    let Some(i) = used.iter().position(|u| !u) else {
        *total += weight * cache.get(partner)?;
        return Ok(());
    };
    used[i] = true;
    for j in i + 1..d {
        let c = cov[i * d + j];
        if used[j] || c == 0.0 {
            continue;
        }
        used[j] = true;
        partner[diff_pos[i]] = diff_pos[j];
        partner[diff_pos[j]] = diff_pos[i];
        sum_matchings(cov, d, diff_pos, used, partner, weight * c, cache, total)?;
        used[j] = false;
    }
    used[i] = false;
    Ok(())
}

/// Default cap on the number of words produced by [`gauge_conjugate`].
pub const CONJUGATE_WORD_CAP: usize = 2_000_000;

/// Replaces each differential slot M^α(J), J a union of half-cells C of the
/// lattice, by Σ_C h_{x*}⁻¹ M^α(C) h_{x*}, where x* is the midpoint of C and
/// h_x is the Itô transport of M⁰ over quarter cells from 0 to x. The result
/// is truncated at λ-order K.
pub fn gauge_conjugate(series: &FormalSeries, lattice: &Lattice, k: usize) -> Result<FormalSeries> {
    if k < series.order() {
        return Err(Error::Invalid(format!("K = {k} below the series truncation {}", series.order())));
    }
    let order = series.order();
    let budget = 2 * order;
    let quarter = lattice.dx() / 4.0;
    let half = lattice.dx() / 2.0;
    let mut out = Vec::new();
    for m in series.monomials() {
        let w = m.weight();
        if w > budget {
            continue;
        }
        let extra = budget - w;
        // each partial word tracks its own remaining budget
        let mut words: Vec<(f64, Vec<Slot>, usize)> = vec![(m.coefficient, Vec::new(), extra)];
        for s in &m.slots {
            let mut next = Vec::new();
            match s.kind {
                SlotKind::Riemann => {
                    for (c, mut word, e) in words {
                        word.push(*s);
                        next.push((c, word, e));
                    }
                }
                SlotKind::Differential => {
                    let cells = lattice.half_cells_in(s.a, s.b)?;
                    for (c, word, e) in &words {
                        for &j in &cells {
                            let (c0, c1) = (j as f64 * half, (j + 1) as f64 * half);
                            // quarter cells strictly before the midpoint: 0..2j+1
                            let nq = 2 * j + 1;
                            let q = |i: usize| Slot::differential(0, i as f64 * quarter, (i + 1) as f64 * quarter);
                            for (cl, left) in inverse_transport_words(nq, *e, &q) {
                                let rest = e - left.len();
                                for (cr, right) in transport_words(nq, rest, &q) {
                                    let mut wd = word.clone();
                                    wd.extend_from_slice(&left);
                                    wd.push(Slot::differential(s.curve, c0, c1));
                                    wd.extend_from_slice(&right);
                                    next.push((c * cl * cr, wd, rest - right.len()));
                                }
                            }
                        }
                    }
                }
            }
            if next.len() > CONJUGATE_WORD_CAP {
                return Err(Error::Resource(format!(
                    "gauge conjugation would produce more than {CONJUGATE_WORD_CAP} words"
                )));
            }
            words = next;
        }
        out.extend(words.into_iter().map(|(c, wd, _)| Monomial::new(c, wd)));
    }
    Ok(FormalSeries::from_monomials(order, out))
}

/// Words of h_x = ∏_{i descending}(1 − M⁰(q_i)) with at most `budget` letters.
fn transport_words(nq: usize, budget: usize, q: &dyn Fn(usize) -> Slot) -> Vec<(f64, Vec<Slot>)> {
    let mut out = vec![(1.0, Vec::new())];
    // strictly decreasing index sequences
    fn rec(top: usize, budget: usize, sign: f64, word: &mut Vec<Slot>, q: &dyn Fn(usize) -> Slot, out: &mut Vec<(f64, Vec<Slot>)>) {
        if budget == 0 {
            return;
        }
        for i in (0..top).rev() {
            word.push(q(i));
            out.push((-sign, word.clone()));
            rec(i, budget - 1, -sign, word, q, out);
            word.pop();
        }
    }
    rec(nq, budget, 1.0, &mut Vec::new(), q, &mut out);
    out
}

/// Words of h_x⁻¹ = ∏_{i ascending} Σ_n M⁰(q_i)ⁿ with at most `budget` letters.
fn inverse_transport_words(nq: usize, budget: usize, q: &dyn Fn(usize) -> Slot) -> Vec<(f64, Vec<Slot>)> {
    let mut out = vec![(1.0, Vec::new())];
    // weakly increasing index sequences
    fn rec(low: usize, nq: usize, budget: usize, word: &mut Vec<Slot>, q: &dyn Fn(usize) -> Slot, out: &mut Vec<(f64, Vec<Slot>)>) {
        if budget == 0 {
            return;
        }
        for i in low..nq {
            word.push(q(i));
            out.push((1.0, word.clone()));
            rec(i, nq, budget - 1, word, q, out);
            word.pop();
        }
    }
    rec(0, nq, budget, &mut Vec::new(), q, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve_geometry::shapes::*;
    use crate::gauge_covariance::{covariance_fn, ConstantCovariance, GaugeChoice};
    use crate::lie_core::CMat;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn su2() -> Representation {
        Representation::parse("su2:fund").unwrap()
    }

    #[test]
    fn pairing_counts_are_double_factorials() {
        let mut df = 1usize;
        for n in 1..=5 {
            df *= 2 * n - 1;
            assert_eq!(enumerate_pairings(2 * n, 5).unwrap().len(), df);
        }
        assert!(enumerate_pairings(3, 2).unwrap().is_empty());
        assert_eq!(enumerate_pairings(2, 1).unwrap(), vec![vec![(0, 1)]]);
        assert!(matches!(enumerate_pairings(8, 3), Err(Error::TruncationExceeded(_))));
    }

    #[test]
    fn constant_series_is_dimension() {
        let one = FormalSeries::one(3);
        let spec = covariance_fn(&rectangle(), GaugeChoice::Pax);
        assert_eq!(expectation_trace(&one, &su2(), &spec).unwrap(), vec![2.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn two_slot_chord() {
        let spec = covariance_fn(&rectangle(), GaugeChoice::Pax);
        let s = FormalSeries::from_monomials(
            1,
            vec![Monomial::new(1.0, vec![Slot::differential(1, 0.0, 1.0), Slot::differential(2, 0.0, 1.0)])],
        );
        let e = expectation_trace(&s, &su2(), &spec).unwrap();
        assert!((e[1] + 1.5).abs() < 1e-14);
    }

    #[test]
    fn pair_covariance_examples() {
        let c = ConstantCovariance::new(vec![vec![0.0; 3], vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0]], (0.0, 1.0));
        let s1 = Slot::differential(1, 0.0, 0.5);
        let s2 = Slot::differential(2, 0.25, 0.75);
        assert_eq!(pair_covariance(&c, &s1, &s2).unwrap(), 0.25);
        assert_eq!(pair_covariance(&c, &s1, &Slot::differential(2, 0.6, 0.9)).unwrap(), 0.0);
        assert!(pair_covariance(&c, &s1, &Slot::riemann(2, 0.0, 1.0)).is_err());
        let pax = covariance_fn(&triangle(), GaugeChoice::Pax);
        assert_eq!(pair_covariance(&pax, &Slot::differential(2, 0.0, 0.6), &Slot::differential(2, 0.2, 1.0)).unwrap(), 0.0);
    }

    #[test]
    fn riemann_slot_is_weighted_casimir() {
        let c = ConstantCovariance::new(vec![vec![0.0, 0.0], vec![0.0, 2.0]], (0.0, 1.0));
        let s = FormalSeries::from_monomials(1, vec![Monomial::new(1.0, vec![Slot::riemann(1, 0.0, 0.25)])]);
        let e = expectation_trace(&s, &su2(), &c).unwrap();
        assert!((e[1] - 0.5 * -3.0).abs() < 1e-14);
    }

    fn random_slot(rng: &mut ChaCha8Rng, curves: usize) -> Slot {
        let a = rng.random_range(0..4) as f64 * 0.25;
        let len = rng.random_range(1..=3) as f64 * 0.25;
        Slot::differential(rng.random_range(1..=curves), a, (a + len).min(1.0))
    }

    fn random_cov(rng: &mut ChaCha8Rng, curves: usize) -> ConstantCovariance {
        let mut m = vec![vec![0.0; curves + 1]; curves + 1];
        for i in 1..=curves {
            for j in i..=curves {
                let v = rng.random_range(-1.0..1.0);
                m[i][j] = v;
                m[j][i] = v;
            }
        }
        ConstantCovariance::new(m, (0.0, 1.0))
    }

    #[test]
    fn odd_monomials_vanish_and_expectation_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rep = su2();
        for _ in 0..20 {
            let cov = random_cov(&mut rng, 2);
            let odd = FormalSeries::from_monomials(3, vec![Monomial::new(1.0, (0..3).map(|_| random_slot(&mut rng, 2)).collect())]);
            assert!(expectation_trace(&odd, &rep, &cov).unwrap().iter().all(|&v| v == 0.0));
            let s1 = FormalSeries::from_monomials(2, vec![Monomial::new(1.0, (0..4).map(|_| random_slot(&mut rng, 2)).collect())]);
            let s2 = FormalSeries::from_monomials(2, vec![Monomial::new(1.0, (0..2).map(|_| random_slot(&mut rng, 2)).collect())]);
            let (a, b) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let lhs = expectation_trace(&s1.scale(a).add(&s2.scale(b)), &rep, &cov).unwrap();
            let e1 = expectation_trace(&s1, &rep, &cov).unwrap();
            let e2 = expectation_trace(&s2, &rep, &cov).unwrap();
            for k in 0..=2 {
                assert!((lhs[k] - (a * e1[k] + b * e2[k])).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn product_respects_truncation() {
        let x = FormalSeries::from_monomials(1, vec![Monomial::new(1.0, vec![Slot::differential(1, 0.0, 1.0)])]);
        let y = FormalSeries::one(1).add(&x);
        let yy = y.mul(&y).mul(&y);
        assert!(yy.monomials().iter().all(|m| m.weight() <= 2));
        assert_eq!(yy.len(), 1 + 3 + 3);
    }

    /// h⁻¹ h = 1 up to truncation: its word expansion cancels beyond the empty word.
    #[test]
    fn transport_and_inverse_cancel() {
        let q = |i: usize| Slot::differential(0, i as f64, i as f64 + 1.0);
        let inv = inverse_transport_words(3, 3, &q);
        let h = transport_words(3, 3, &q);
        let mut acc: HashMap<Vec<u64>, f64> = HashMap::new();
        for (c1, w1) in &inv {
            for (c2, w2) in &h {
                if w1.len() + w2.len() > 3 {
                    continue;
                }
                let key: Vec<u64> = w1.iter().chain(w2).map(|s| s.a as u64).collect();
                *acc.entry(key).or_default() += c1 * c2;
            }
        }
        for (k, v) in acc {
            let want = if k.is_empty() { 1.0 } else { 0.0 };
            assert!((v - want).abs() < 1e-15, "{k:?}");
        }
    }

    #[test]
    fn conjugation_at_order_zero_and_abelian_is_identity() {
        let lat = Lattice::new(2, 1.0).unwrap();
        let s = FormalSeries::from_monomials(
            2,
            vec![Monomial::new(0.7, vec![Slot::differential(1, 0.25, 0.75), Slot::differential(2, 0.0, 0.25)])],
        );
        let spec = covariance_fn(&triangle(), GaugeChoice::Pax);
        let u1 = Representation::parse("u1:1").unwrap();
        let before = expectation_trace(&s, &u1, &spec).unwrap();
        let after = expectation_trace(&gauge_conjugate(&s, &lat, 2).unwrap(), &u1, &spec).unwrap();
        for k in 0..=2 {
            assert!((before[k] - after[k]).abs() < 1e-12);
        }
        let s0 = FormalSeries::from_monomials(0, vec![Monomial::new(1.0, vec![])]);
        assert_eq!(gauge_conjugate(&s0, &lat, 0).unwrap(), s0);
    }

    #[test]
    fn conjugation_preserves_expectation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let lat = Lattice::new(2, 1.0).unwrap();
        let spec = covariance_fn(&triangle(), GaugeChoice::Pax);
        let rep = su2();
        for _ in 0..5 {
            let p = random_lattice_polynomial(&mut rng, &lat, 2, 3);
            let before = expectation_trace(&p, &rep, &spec).unwrap();
            let after = expectation_trace(&gauge_conjugate(&p, &lat, 2).unwrap(), &rep, &spec).unwrap();
            for k in 0..=2 {
                assert!((before[k] - after[k]).abs() < 1e-9, "order {k}: {before:?} vs {after:?}");
            }
        }
    }

    pub(crate) fn random_lattice_polynomial(rng: &mut ChaCha8Rng, lat: &Lattice, k: usize, terms: usize) -> FormalSeries {
        let strat: Vec<(f64, f64)> = (-1..=(2 * lat.n() as isize - 2)).map(|i| lat.strat_interval(i)).collect();
        let mut monos = Vec::new();
        for _ in 0..terms {
            let deg = rng.random_range(1..=4);
            let slots = (0..deg)
                .map(|_| {
                    let (a, b) = strat[rng.random_range(0..strat.len())];
                    Slot::differential(rng.random_range(0..=2), a, b)
                })
                .collect();
            monos.push(Monomial::new(rng.random_range(-1.0..1.0), slots));
        }
        FormalSeries::from_monomials(k, monos)
    }

    /// Direct S_{2n} sum over permutations and index tuples, no matchings.
    fn permutation_oracle(slots: &[Slot], rep: &Representation, cov: &dyn Covariance) -> f64 {
        let n = slots.len();
        if n % 2 == 1 {
            return 0.0;
        }
        let g = rep.lie_dim();
        let tuples = g.pow(n as u32);
        let mut traces = vec![0.0; tuples];
        for (code, t) in traces.iter_mut().enumerate() {
            let mut m = CMat::identity(rep.dim);
            let mut rest = code;
            for _ in 0..n {
                m = &m * &rep.basis[rest % g];
                rest /= g;
            }
            *t = m.trace().re;
        }
        let digit = |code: usize, k: usize| (code / g.pow(k as u32)) % g;
        let mut perm: Vec<usize> = (0..n).collect();
        let mut total = 0.0;
        loop {
            let mut w = 1.0;
            for p in perm.chunks(2) {
                w *= raw_pair(cov, &slots[p[0]], &slots[p[1]]);
            }
            if w != 0.0 {
                let lie: f64 = (0..tuples)
                    .filter(|&code| perm.chunks(2).all(|p| digit(code, p[0]) == digit(code, p[1])))
                    .map(|code| traces[code])
                    .sum();
                total += w * lie;
            }
            if !next_permutation(&mut perm) {
                break;
            }
        }
        let half = n / 2;
        total / (2f64.powi(half as i32) * (1..=half).product::<usize>() as f64)
    }

    fn next_permutation(p: &mut [usize]) -> bool {
        let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else { return false };
        let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
        p.swap(i - 1, j);
        p[i..].reverse();
        true
    }

    #[test]
    fn matches_permutation_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rep = su2();
        for trial in 0..12 {
            let cov = random_cov(&mut rng, 3);
            let n = 2 * (trial % 3 + 1);
            let slots: Vec<Slot> = (0..n).map(|_| random_slot(&mut rng, 3)).collect();
            let s = FormalSeries::from_monomials(3, vec![Monomial::new(1.0, slots.clone())]);
            let e = expectation_trace(&s, &rep, &cov).unwrap();
            let want = permutation_oracle(&slots, &rep, &cov);
            assert!((e[n / 2] - want).abs() < 1e-12, "{} vs {want}", e[n / 2]);
        }
    }
}
