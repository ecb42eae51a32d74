//! Wilson-loop series: E tr(P^m ⋯ P^1) per λ-order.
//!
//! The lattice backend sweeps the half-cells left to right, carrying every
//! partial chord diagram (events per curve, in x-order) with its accumulated
//! analytic weight. Each transport contributes at most one event per tile;
//! an event is either a chord between two curves placed in a common
//! half-cell, or a Riemann (tadpole) insertion in the tile's overlap cell.
//! This is the Wick expansion of the product of converted transports,
//! organised so that no pairing is ever enumerated twice.
//!
//! The continuum backend (pax only) runs the same state machine with
//! polynomial weights on the cells between kernel breakpoints.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::curve_geometry::{AdmissibleLoop, Direction};
use crate::error::{Error, Result};
use crate::gauge_covariance::{covariance_fn, CovarianceSpec, GaugeChoice};
use crate::lattice_transport::{ito_transport, strat_to_ito, strat_transport, Lattice, TileLayout};
use crate::lie_core::Representation;
use crate::wick_algebra::{expectation_trace, FormalSeries, LieCache};

pub const DEFAULT_BUDGET: u64 = 50_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EngineConfig {
    /// Cap on the estimated number of chord-diagram shapes.
    pub budget: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self { budget: DEFAULT_BUDGET }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesResult {
    pub gauge: GaugeChoice,
    /// Extrapolated coefficients, k = 0..=K.
    pub coefficients: Vec<f64>,
    pub error_estimate: Vec<f64>,
    pub lattice_schedule: Vec<usize>,
    /// Raw per-N coefficients, aligned with `lattice_schedule`.
    pub raw: Vec<Vec<f64>>,
    pub converged: bool,
    pub flags: Vec<String>,
}

/// Event in a partial diagram: 0 is a tadpole, c ≥ 1 a chord label.
type Ev = u8;
const TADPOLE: Ev = 0;

/// Per-curve event lists (x-order), chords labelled by first appearance.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Partial(Vec<Vec<Ev>>);

impl Partial {
    fn empty(m: usize) -> Self {
        Partial(vec![Vec::new(); m])
    }

    fn order(&self) -> usize {
        let chords: usize = self.0.iter().flatten().filter(|&&e| e != TADPOLE).count() / 2;
        let tads = self.0.iter().flatten().filter(|&&e| e == TADPOLE).count();
        chords + tads
    }

    fn next_label(&self) -> Ev {
        self.0.iter().flatten().copied().max().unwrap_or(0) + 1
    }

    fn canonical(mut self) -> Self {
        let mut map = [0u8; 256];
        let mut next = 1u8;
        for evs in &mut self.0 {
            for e in evs.iter_mut() {
                if *e == TADPOLE {
                    continue;
                }
                if map[*e as usize] == 0 {
                    map[*e as usize] = next;
                    next += 1;
                }
                *e = map[*e as usize];
            }
        }
        self
    }

    /// Partner vector of the trace word P^m ⋯ P^1.
    fn word(&self, dirs: &[Direction]) -> Vec<usize> {
        let mut partner = Vec::new();
        let mut first: HashMap<Ev, usize> = HashMap::new();
        for alpha in (0..self.0.len()).rev() {
            let evs = &self.0[alpha];
            // word order is reverse traversal order
            let ordered: Vec<Ev> = match dirs[alpha] {
                Direction::Right => evs.iter().rev().copied().collect(),
                Direction::Left => evs.clone(),
            };
            for e in ordered {
                let p = partner.len();
                if e == TADPOLE {
                    partner.push(p + 1);
                    partner.push(p);
                } else if let Some(q) = first.remove(&e) {
                    partner[q] = p;
                    partner.push(q);
                } else {
                    first.insert(e, p);
                    partner.push(usize::MAX);
                }
            }
        }
        partner
    }
}

#[derive(Clone, Copy, Debug)]
enum Event {
    Chord(usize, usize, f64),
    Tadpole(usize, f64),
}

fn estimate_shapes(spec: &CovarianceSpec, with_tadpoles: bool, k: usize) -> u64 {
    let m = spec.lp().m();
    let mut types = 0u64;
    for a in 1..=m {
        for b in a + 1..=m {
            if spec.overlap(a, b).is_some() {
                types += 1;
            }
        }
        if with_tadpoles {
            types += 1;
        }
    }
    let mut total = 0u64;
    let mut p = 1u64;
    for _ in 0..=k {
        total = total.saturating_add(p);
        p = p.saturating_mul(types.max(1));
    }
    total
}

fn check_budget(spec: &CovarianceSpec, with_tadpoles: bool, k: usize, cfg: &EngineConfig) -> Result<()> {
    let est = estimate_shapes(spec, with_tadpoles, k);
    if est > cfg.budget {
        return Err(Error::Resource(format!(
            "estimated pairing count {est} exceeds the budget {}",
            cfg.budget
        )));
    }
    Ok(())
}

/// Itô transports when the diagonal covariance vanishes, converted
/// Stratonovich transports otherwise.
pub fn layouts(lp: &AdmissibleLoop, gauge: GaugeChoice, lattice: &Lattice) -> Result<Vec<TileLayout>> {
    lp.pieces()
        .iter()
        .map(|p| {
            if gauge.diagonal_vanishes() {
                TileLayout::ito(lattice, p.x_minus(), p.x_plus())
            } else {
                TileLayout::stratonovich(lattice, p.x_minus(), p.x_plus())
            }
        })
        .collect()
}

/// Per-order coefficients of E tr(P^m ⋯ P^1) at lattice size N.
pub fn wilson_series_lattice(
    lp: &AdmissibleLoop,
    rep: &Representation,
    gauge: GaugeChoice,
    k: usize,
    n: usize,
    cfg: &EngineConfig,
) -> Result<Vec<f64>> {
    let lattice = Lattice::new(n, lp.strip_length())?;
    let spec = covariance_fn(lp, gauge);
    check_budget(&spec, !gauge.diagonal_vanishes(), k, cfg)?;
    let lay = layouts(lp, gauge, &lattice)?;
    sweep(&spec, rep, &lay, &lattice, k)
}

/// The same quantity through explicit formal series (transports, product,
/// Itô conversion, Wick expectation). Exponential in N; for small lattices.
pub fn wilson_series_lattice_explicit(
    lp: &AdmissibleLoop,
    rep: &Representation,
    gauge: GaugeChoice,
    k: usize,
    n: usize,
) -> Result<Vec<f64>> {
    let lattice = Lattice::new(n, lp.strip_length())?;
    let spec = covariance_fn(lp, gauge);
    let mut factors = Vec::new();
    for (i, p) in lp.pieces().iter().enumerate().rev() {
        let t = if gauge.diagonal_vanishes() {
            ito_transport(&lattice, i + 1, p.x_minus(), p.x_plus(), k)?
        } else {
            strat_transport(&lattice, i + 1, p.x_minus(), p.x_plus(), k)?
        };
        factors.push(t);
    }
    let mut series = FormalSeries::product(&factors);
    if !gauge.diagonal_vanishes() {
        series = strat_to_ito(&series, &spec)?;
    }
    expectation_trace(&series, rep, &spec)
}

fn sweep(spec: &CovarianceSpec, rep: &Representation, lay: &[TileLayout], lattice: &Lattice, k: usize) -> Result<Vec<f64>> {
    let m = lay.len();
    let cells = 2 * lattice.n();
    const NONE: usize = usize::MAX;
    // tile index of each half-cell per curve, and Riemann cells
    let mut tile_of = vec![vec![NONE; cells]; m];
    let mut riemann_here = vec![vec![false; cells]; m];
    for (a, l) in lay.iter().enumerate() {
        for (t, &(lo, hi)) in l.tiles.iter().enumerate() {
            for j in lo..hi {
                tile_of[a][j] = t;
            }
            if let Some(h) = l.riemann_cell[t] {
                riemann_here[a][h] = true;
            }
        }
    }
    let events_at: Vec<Vec<Event>> = (0..cells)
        .map(|j| {
            let (x0, x1) = lattice.half_cell(j);
            let mut ev = Vec::new();
            for a in 0..m {
                if tile_of[a][j] == NONE {
                    continue;
                }
                if riemann_here[a][j] {
                    let w = spec.interval_integral(a + 1, a + 1, x0, x1);
                    if w != 0.0 {
                        ev.push(Event::Tadpole(a, w));
                    }
                }
                for b in a + 1..m {
                    if tile_of[b][j] == NONE {
                        continue;
                    }
                    let w = spec.interval_integral(a + 1, b + 1, x0, x1);
                    if w != 0.0 {
                        ev.push(Event::Chord(a, b, w));
                    }
                }
            }
            ev
        })
        .collect();

    let mut states: Vec<((Partial, u32), f64)> = vec![((Partial::empty(m), 0), 1.0)];
    for j in 0..cells {
        let evs = &events_at[j];
        let mut next: Vec<((Partial, u32), f64)> = Vec::with_capacity(states.len());
        let mut index: HashMap<(Partial, u32), usize> = HashMap::with_capacity(states.len());
        let mut push = |key: (Partial, u32), w: f64, next: &mut Vec<((Partial, u32), f64)>| {
            if let Some(&i) = index.get(&key) {
                next[i].1 += w;
            } else {
                index.insert(key.clone(), next.len());
                next.push((key, w));
            }
        };
        for ((diag, mask), w) in &states {
            let room = k - diag.order();
            let usable: Vec<Event> = evs
                .iter()
                .copied()
                .filter(|e| match *e {
                    Event::Chord(a, b, _) => mask & (1 << a) == 0 && mask & (1 << b) == 0,
                    Event::Tadpole(a, _) => mask & (1 << a) == 0,
                })
                .collect();
            let mut chosen = Vec::new();
            let mut emit = |chosen: &[Event], wt: f64| {
                let mut d = diag.clone();
                let mut mk = *mask;
                let mut label = d.next_label();
                for e in chosen {
                    match *e {
                        Event::Chord(a, b, _) => {
                            d.0[a].push(label);
                            d.0[b].push(label);
                            label += 1;
                            mk |= (1 << a) | (1 << b);
                        }
                        Event::Tadpole(a, _) => {
                            d.0[a].push(TADPOLE);
                            mk |= 1 << a;
                        }
                    }
                }
                let d = if chosen.is_empty() { d } else { d.canonical() };
                push((d, mk), wt, &mut next);
            };
            subsets(&usable, 0, room, 0, &mut chosen, *w, &mut emit);
        }
        // release curves whose tile ends here
        states = Vec::with_capacity(next.len());
        let mut index: HashMap<(Partial, u32), usize> = HashMap::with_capacity(next.len());
        for ((d, mut mk), w) in next {
            for a in 0..m {
                let cur = tile_of[a][j];
                let nxt = if j + 1 < cells { tile_of[a][j + 1] } else { NONE };
                if cur != nxt {
                    mk &= !(1 << a);
                }
            }
            let key = (d, mk);
            if let Some(&i) = index.get(&key) {
                states[i].1 += w;
            } else {
                index.insert(key.clone(), states.len());
                states.push((key, w));
            }
        }
    }
    finish(states.into_iter().map(|((d, _), w)| (d, w)).collect(), lay.iter().map(|l| l.direction).collect(), rep, k)
}

/// Enumerates subsets of `usable` with pairwise disjoint curves and at most
/// `room` events, calling `emit` with each subset and its weight.
fn subsets(
    usable: &[Event],
    start: usize,
    room: usize,
    used: u32,
    chosen: &mut Vec<Event>,
    w: f64,
    emit: &mut dyn FnMut(&[Event], f64),
) {
    emit(chosen, w);
    if room == 0 {
        return;
    }
    for i in start..usable.len() {
        let (bits, ew) = match usable[i] {
            Event::Chord(a, b, ew) => ((1u32 << a) | (1 << b), ew),
            Event::Tadpole(a, ew) => (1u32 << a, ew),
        };
        if used & bits != 0 {
            continue;
        }
        chosen.push(usable[i]);
        subsets(usable, i + 1, room - 1, used | bits, chosen, w * ew, emit);
        chosen.pop();
    }
}

/// Merges final diagrams and applies Lie factors, in a fixed order.
fn finish(states: Vec<(Partial, f64)>, dirs: Vec<Direction>, rep: &Representation, k: usize) -> Result<Vec<f64>> {
    let mut merged: Vec<(Partial, f64)> = Vec::new();
    let mut index: HashMap<Partial, usize> = HashMap::new();
    for (d, w) in states {
        if let Some(&i) = index.get(&d) {
            merged[i].1 += w;
        } else {
            index.insert(d.clone(), merged.len());
            merged.push((d, w));
        }
    }
    let cache = LieCache::new(rep);
    let parts: Vec<Result<(usize, f64)>> = merged
        .par_iter()
        .map(|(d, w)| {
            let order = d.order();
            if order == 0 {
                return Ok((0, w * rep.dim as f64));
            }
            Ok((order, w * cache.get(&d.word(&dirs))?))
        })
        .collect();
    let mut out = vec![0.0; k + 1];
    for p in parts {
        let (o, v) = p?;
        out[o] += v;
    }
    Ok(out)
}

/// Direct continuum evaluation of the pax chord-diagram sum.
pub fn wilson_series_continuum_pax(lp: &AdmissibleLoop, rep: &Representation, k: usize, cfg: &EngineConfig) -> Result<Vec<f64>> {
    let spec = covariance_fn(lp, GaugeChoice::Pax);
    check_budget(&spec, false, k, cfg)?;
    let m = lp.m();
    let mut xs: Vec<f64> = vec![0.0, lp.strip_length()];
    for a in 1..=m {
        xs.extend(lp.breakpoints(a));
    }
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    // roots of γ̄_α − γ̄_β inside each segment
    let mut roots = Vec::new();
    for w in xs.windows(2) {
        for a in 1..=m {
            for b in a + 1..=m {
                let Some((lo, hi)) = spec.overlap(a, b) else { continue };
                let (x0, x1) = (w[0].max(lo), w[1].min(hi));
                if x1 <= x0 {
                    continue;
                }
                let d0 = lp.height(a, x0) - lp.height(b, x0);
                let d1 = lp.height(a, x1) - lp.height(b, x1);
                if d0 * d1 < 0.0 {
                    roots.push(x0 + (x1 - x0) * d0 / (d0 - d1));
                }
            }
        }
    }
    xs.extend(roots);
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() < 1e-15);

    let mut states: Vec<(Partial, f64)> = vec![(Partial::empty(m), 1.0)];
    let mut index: HashMap<Partial, usize> = HashMap::new();
    index.insert(Partial::empty(m), 0);
    for w in xs.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        let width = x1 - x0;
        if width <= 0.0 {
            continue;
        }
        let mut chords = Vec::new();
        for a in 1..=m {
            for b in a + 1..=m {
                let Some((lo, hi)) = spec.overlap(a, b) else { continue };
                if x0 < lo - 1e-15 || x1 > hi + 1e-15 {
                    continue;
                }
                let (k0, k1) = (spec.kernel(a, b, x0), spec.kernel(a, b, x1));
                if k0 != 0.0 || k1 != 0.0 {
                    chords.push((a - 1, b - 1, k0, (k1 - k0) / width));
                }
            }
        }
        if chords.is_empty() {
            continue;
        }
        let mut polys: Vec<Vec<f64>> = states.iter().map(|(_, v)| vec![*v]).collect();
        let mut by_order: Vec<Vec<usize>> = vec![Vec::new(); k + 1];
        for (i, (d, _)) in states.iter().enumerate() {
            by_order[d.order()].push(i);
        }
        for level in 0..k {
            let sources = by_order[level].clone();
            for s in sources {
                for &(a, b, c0, c1) in &chords {
                    let mut d = states[s].0.clone();
                    let label = d.next_label();
                    d.0[a].push(label);
                    d.0[b].push(label);
                    let d = d.canonical();
                    let t = match index.get(&d) {
                        Some(&t) => t,
                        None => {
                            let t = states.len();
                            index.insert(d.clone(), t);
                            states.push((d, 0.0));
                            polys.push(vec![0.0]);
                            by_order[level + 1].push(t);
                            t
                        }
                    };
                    let add = integrate_linear_times(c0, c1, &polys[s]);
                    let target = &mut polys[t];
                    if target.len() < add.len() {
                        target.resize(add.len(), 0.0);
                    }
                    for (x, y) in target.iter_mut().zip(&add) {
                        *x += y;
                    }
                }
            }
        }
        for (st, p) in states.iter_mut().zip(&polys) {
            st.1 = eval_poly(p, width);
        }
    }
    let dirs = lp.pieces().iter().map(|p| p.direction()).collect();
    finish(states, dirs, rep, k)
}

/// Coefficients of ∫_0^s (c0 + c1 t) p(t) dt.
fn integrate_linear_times(c0: f64, c1: f64, p: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + 2];
    for (i, &a) in p.iter().enumerate() {
        out[i + 1] += c0 * a / (i + 1) as f64;
        out[i + 2] += c1 * a / (i + 2) as f64;
    }
    out
}

fn eval_poly(p: &[f64], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// First-order Richardson extrapolation in 1/N from the last two entries.
///
/// Returns (values, error estimates, converged).
pub fn extrapolate(schedule: &[usize], raw: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>, bool) {
    let k = raw.first().map_or(0, |r| r.len());
    let s = schedule.len();
    let mut values = vec![0.0; k];
    let mut errors = vec![0.0; k];
    let mut converged = true;
    for o in 0..k {
        let e2 = raw[s - 1][o];
        if s < 2 {
            values[o] = e2;
            continue;
        }
        let e1 = raw[s - 2][o];
        let (n1, n2) = (schedule[s - 2] as f64, schedule[s - 1] as f64);
        let a = (n2 * e2 - n1 * e1) / (n2 - n1);
        values[o] = a;
        errors[o] = (e2 - e1).abs().max((a - e2).abs());
        if s >= 3 {
            let prev = (e1 - raw[s - 3][o]).abs();
            let last = (e2 - e1).abs();
            if last > prev * (1.0 + 1e-9) + 1e-13 {
                converged = false;
            }
        }
    }
    (values, errors, converged)
}

/// Runs the lattice backend over a refinement schedule and extrapolates.
pub fn wilson_series(
    lp: &AdmissibleLoop,
    rep: &Representation,
    gauge: GaugeChoice,
    k: usize,
    schedule: &[usize],
    cfg: &EngineConfig,
) -> Result<SeriesResult> {
    if schedule.len() < 3 || schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invalid(format!("lattice schedule must be increasing with ≥ 3 entries, got {schedule:?}")));
    }
    let raw: Vec<Vec<f64>> = schedule
        .par_iter()
        .map(|&n| wilson_series_lattice(lp, rep, gauge, k, n, cfg))
        .collect::<Result<_>>()?;
    let (mut coefficients, mut error_estimate, converged) = extrapolate(schedule, &raw);
    coefficients[0] = rep.dim as f64;
    error_estimate[0] = 0.0;
    let mut flags = Vec::new();
    if !converged {
        flags.push("not_converged".to_string());
    }
    if gauge == GaugeChoice::Ax && lp.crosses_axis() {
        flags.push("crosses_axis".to_string());
    }
    Ok(SeriesResult {
        gauge,
        coefficients,
        error_estimate,
        lattice_schedule: schedule.to_vec(),
        raw,
        converged,
        flags,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve_geometry::shapes::*;

    fn su2() -> Representation {
        Representation::parse("su2:fund").unwrap()
    }

    fn closed(rep: &Representation, area: f64, k: usize) -> Vec<f64> {
        let mut out = vec![rep.dim as f64];
        for n in 1..=k {
            out.push(out[n - 1] * (-rep.casimir_scalar * area / 2.0) / n as f64);
        }
        out
    }

    #[test]
    fn continuum_rectangle_is_exact() {
        let rep = su2();
        let got = wilson_series_continuum_pax(&rectangle(), &rep, 4, &EngineConfig::default()).unwrap();
        for (g, w) in got.iter().zip(closed(&rep, 1.0, 4)) {
            assert!((g - w).abs() < 1e-12, "{got:?}");
        }
        assert_eq!(wilson_series_continuum_pax(&rectangle(), &rep, 0, &EngineConfig::default()).unwrap(), vec![2.0]);
    }

    #[test]
    fn continuum_triangle_is_exact() {
        let rep = su2();
        let got = wilson_series_continuum_pax(&triangle(), &rep, 3, &EngineConfig::default()).unwrap();
        for (g, w) in got.iter().zip(closed(&rep, 0.5, 3)) {
            assert!((g - w).abs() < 1e-12, "{got:?}");
        }
    }

    #[test]
    fn sweep_matches_explicit_series() {
        let rep = su2();
        let loops = [rectangle(), triangle(), two_lap()];
        for lp in &loops {
            for gauge in [GaugeChoice::Pax, GaugeChoice::Ax, GaugeChoice::PaxMass(1.3), GaugeChoice::PaxShift(4.0)] {
                for n in [1, 2, 3] {
                    let k = if lp.m() > 2 { 2 } else { 3 };
                    let dp = wilson_series_lattice(lp, &rep, gauge, k, n, &EngineConfig::default()).unwrap();
                    let ex = wilson_series_lattice_explicit(lp, &rep, gauge, k, n).unwrap();
                    for o in 0..=k {
                        assert!((dp[o] - ex[o]).abs() < 1e-12, "{gauge} N={n} order {o}: {dp:?} vs {ex:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn lattice_rectangle_pax_order_one() {
        let rep = su2();
        let v = wilson_series_lattice(&rectangle(), &rep, GaugeChoice::Pax, 1, 64, &EngineConfig::default()).unwrap();
        assert_eq!(v[0], 2.0);
        assert!((v[1] + 1.5).abs() < 0.05);
        let a = wilson_series_lattice(&rectangle(), &rep, GaugeChoice::Ax, 1, 64, &EngineConfig::default()).unwrap();
        assert!((a[1] + 1.5).abs() < 0.1);
    }

    #[test]
    fn extrapolated_rectangle() {
        let rep = su2();
        let r = wilson_series(&rectangle(), &rep, GaugeChoice::Pax, 2, &[32, 64, 128], &EngineConfig::default()).unwrap();
        for (k, w) in closed(&rep, 1.0, 2).iter().enumerate() {
            assert!((r.coefficients[k] - w).abs() < 1e-2);
            assert!(r.error_estimate[k] < 1e-2);
            let largest = r.raw.last().unwrap()[k];
            assert!(r.error_estimate[k] >= (largest - r.coefficients[k]).abs());
        }
        let u1 = Representation::parse("u1:1").unwrap();
        let r = wilson_series(&rectangle(), &u1, GaugeChoice::Pax, 3, &[32, 64, 128], &EngineConfig::default()).unwrap();
        for (k, w) in [1.0, -0.5, 0.125, -1.0 / 48.0].iter().enumerate() {
            assert!((r.coefficients[k] - w).abs() < 1e-2);
        }
    }

    #[test]
    fn continuum_and_lattice_pax_agree() {
        let rep = su2();
        let cfg = EngineConfig::default();
        for lp in [rectangle(), triangle(), two_lap()] {
            let cont = wilson_series_continuum_pax(&lp, &rep, 2, &cfg).unwrap();
            let lat = wilson_series(&lp, &rep, GaugeChoice::Pax, 2, &[32, 64, 128], &cfg).unwrap();
            for k in 0..=2 {
                assert!((cont[k] - lat.coefficients[k]).abs() <= lat.error_estimate[k] + 1e-12, "{cont:?} vs {lat:?}");
            }
        }
        // winding two: A = 2 effectively doubles the exponent
        let c = wilson_series_continuum_pax(&two_lap(), &rep, 1, &cfg).unwrap();
        assert!((c[1] + 6.0).abs() < 1e-12);
    }

    #[test]
    fn budget_is_enforced() {
        let e = wilson_series_lattice(&two_lap(), &su2(), GaugeChoice::Ax, 3, 4, &EngineConfig { budget: 10 });
        assert!(matches!(e, Err(Error::Resource(_))));
    }

    #[test]
    fn schedule_must_be_increasing() {
        let e = wilson_series(&rectangle(), &su2(), GaugeChoice::Pax, 1, &[8, 4, 16], &EngineConfig::default());
        assert!(e.is_err());
        let e = wilson_series(&rectangle(), &su2(), GaugeChoice::Pax, 1, &[8, 16], &EngineConfig::default());
        assert!(e.is_err());
    }

    #[test]
    fn extrapolation_is_exact_for_pure_first_order() {
        let sched = [8, 16, 32];
        let raw: Vec<Vec<f64>> = sched.iter().map(|&n| vec![1.0, 3.0 + 2.0 / n as f64]).collect();
        let (v, e, ok) = extrapolate(&sched, &raw);
        assert!((v[1] - 3.0).abs() < 1e-14 && ok);
        assert!(e[1] >= (raw[2][1] - v[1]).abs());
        let bad: Vec<Vec<f64>> = vec![vec![0.0, 1.0], vec![0.0, 1.1], vec![0.0, 1.5]];
        assert!(!extrapolate(&sched, &bad).2);
    }

    #[test]
    fn word_of_nested_rectangle_diagram() {
        // two chords on curves 1 (right) and 2 (left), in the same x-order on both
        let d = Partial(vec![vec![1, 2], vec![1, 2]]);
        let p = d.word(&[Direction::Right, Direction::Left]);
        // word: curve 2 (x-order) then curve 1 (reversed): 1 2 2 1 → nested
        assert_eq!(p, vec![3, 2, 1, 0]);
    }
}
