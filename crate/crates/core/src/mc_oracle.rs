//! Monte-Carlo oracle for complete axial gauge.
//!
//! Curvature is 2D 𝔤-valued white noise. M̃^α(J) is the noise integrated
//! over the region between γ̄_α and the x-axis above J, carrying the
//! traversal sign of piece α. Each piece's finite-N Stratonovich transport
//! is evaluated exactly (the chain sum is finite) by a matrix recursion.
//!
//! Noise lives on cells of size Δx/2 × Δx/2. Per half-cell column, runs of
//! cells that every curve covers fully or not at all are merged into one
//! Gaussian band, which leaves the joint law of all M̃ unchanged.

use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::curve_geometry::{AdmissibleLoop, Direction, HorizontalCurve};
use crate::error::{Error, Result};
use crate::lattice_transport::Lattice;
use crate::lie_core::{CMat, Representation};

pub const RNG_NAME: &str = "ChaCha8 (rand_chacha), seed_from_u64(seed), stream = sample index";
const CHUNK: usize = 1024;

#[derive(Clone, Debug, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation / √(accepted samples).
    pub stderr: f64,
    pub n_samples: usize,
    pub n_rejected: usize,
    pub seed: u64,
    pub lattice_n: usize,
    pub lambda: f64,
    /// More than 1% of samples were rejected.
    pub flagged: bool,
    pub rng: &'static str,
}

/// ∫_{x0}^{x1} clamp(y(x), lo, hi) dx for y linear from y0 to y1.
fn clamp_integral(x0: f64, x1: f64, y0: f64, y1: f64, lo: f64, hi: f64) -> f64 {
    let w = x1 - x0;
    if w <= 0.0 {
        return 0.0;
    }
    let mut ts = vec![0.0, 1.0];
    for level in [lo, hi] {
        if (y0 - level) * (y1 - level) < 0.0 {
            ts.push((level - y0) / (y1 - y0));
        }
    }
    ts.sort_by(f64::total_cmp);
    let y = |t: f64| y0 + (y1 - y0) * t;
    let mut total = 0.0;
    for p in ts.windows(2) {
        let (ya, yb) = (y(p[0]), y(p[1]));
        let mid = 0.5 * (ya + yb);
        let v = if mid <= lo {
            lo
        } else if mid >= hi {
            hi
        } else {
            mid
        };
        total += v * (p[1] - p[0]);
    }
    total * w
}

/// Area of {(x, y): x ∈ [x0, x1], lo ≤ y ≤ min(γ̄(x), hi)}.
fn region_overlap(piece: &HorizontalCurve, x0: f64, x1: f64, lo: f64, hi: f64) -> f64 {
    let mut xs = vec![x0, x1];
    xs.extend(piece.breakpoints().filter(|&x| x > x0 && x < x1));
    xs.sort_by(f64::total_cmp);
    xs.windows(2)
        .map(|w| clamp_integral(w[0], w[1], piece.height(w[0]), piece.height(w[1]), lo, hi) - lo * (w[1] - w[0]))
        .sum()
}

fn check_loop(lp: &AdmissibleLoop) -> Result<()> {
    if lp.min_y() < 0.0 {
        return Err(Error::BelowAxis);
    }
    Ok(())
}

/// Independent cell values: N(0, λ·cell area) per cell and Lie index.
#[derive(Clone, Debug)]
pub struct NoiseField {
    lattice: Lattice,
    cell: f64,
    rows: usize,
    lie_dim: usize,
    values: Vec<f64>,
    pub seed: u64,
}

impl NoiseField {
    /// Columns are the half-cells of `lattice`, rows cover [0, y_max].
    pub fn sample(lattice: Lattice, y_max: f64, lie_dim: usize, lambda: f64, seed: u64, stream: u64) -> Self {
        let cell = lattice.dx() / 2.0;
        let rows = (y_max / cell - 1e-9).ceil().max(1.0) as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let sd = (lambda * cell * cell).sqrt();
        let n = 2 * lattice.n() * rows * lie_dim;
        let values = (0..n).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect();
        Self { lattice, cell, rows, lie_dim, values, seed }
    }

    pub fn cell_area(&self) -> f64 {
        self.cell * self.cell
    }

    pub fn value(&self, col: usize, row: usize, a: usize) -> f64 {
        self.values[(col * self.rows + row) * self.lie_dim + a]
    }
}

/// Oriented noise integral over the region between γ̄_α on J and the axis.
pub fn sample_tilde_m(field: &NoiseField, lp: &AdmissibleLoop, alpha: usize, j: (f64, f64)) -> Result<Vec<f64>> {
    check_loop(lp)?;
    let piece = lp.piece(alpha);
    let (lo, hi) = piece.x_range();
    if j.0 < lo - 1e-12 || j.1 > hi + 1e-12 || j.1 < j.0 {
        return Err(Error::Invalid(format!("interval {j:?} outside piece {alpha}")));
    }
    if lp.max_y() > field.rows as f64 * field.cell + 1e-12 {
        return Err(Error::Invalid("noise field does not cover the loop".into()));
    }
    let cols = field.lattice.half_cells_in(j.0, j.1)?;
    let sign = piece.direction().sign();
    let mut out = vec![0.0; field.lie_dim];
    for col in cols {
        let (x0, x1) = field.lattice.half_cell(col);
        for row in 0..field.rows {
            let (y0, y1) = (row as f64 * field.cell, (row + 1) as f64 * field.cell);
            let f = region_overlap(piece, x0, x1, y0, y1) / field.cell_area();
            if f == 0.0 {
                continue;
            }
            for (a, o) in out.iter_mut().enumerate() {
                *o += sign * f * field.value(col, row, a);
            }
        }
    }
    Ok(out)
}

/// Per-column band model: M̃^α(h_j) = Σ_b weight[α][b] · Z_b, Z_b ~ N(0, λ·area_b).
struct Column {
    /// (curve index, per-band oriented weights)
    curves: Vec<(usize, Vec<f64>)>,
    band_sd: Vec<f64>,
}

fn column_models(lp: &AdmissibleLoop, lattice: &Lattice, lambda: f64) -> Vec<Column> {
    let cell = lattice.dx() / 2.0;
    let rows = (lp.max_y() / cell - 1e-9).ceil().max(1.0) as usize;
    (0..2 * lattice.n())
        .map(|j| {
            let (x0, x1) = lattice.half_cell(j);
            let active: Vec<usize> = (1..=lp.m()).filter(|&a| lp.piece(a).covers(x0, x1)).collect();
            let mut areas: Vec<f64> = Vec::new();
            let mut weights: Vec<Vec<f64>> = vec![Vec::new(); active.len()];
            let mut run_open = false;
            for r in 0..rows {
                let (y0, y1) = (r as f64 * cell, (r + 1) as f64 * cell);
                let fr: Vec<f64> = active
                    .iter()
                    .map(|&a| region_overlap(lp.piece(a), x0, x1, y0, y1) / (cell * cell))
                    .collect();
                if fr.iter().all(|&f| f == 0.0) {
                    run_open = false;
                    continue;
                }
                let pure = fr.iter().all(|&f| (f - 1.0).abs() < 1e-12 || f.abs() < 1e-12);
                let same = run_open && weights.iter().zip(&fr).all(|(w, &f)| (w.last().unwrap().abs() - f).abs() < 1e-12);
                if pure && same {
                    *areas.last_mut().unwrap() += cell * cell;
                    continue;
                }
                areas.push(cell * cell);
                for ((w, &f), &a) in weights.iter_mut().zip(&fr).zip(&active) {
                    w.push(lp.direction(a).sign() * f);
                }
                run_open = pure;
            }
            Column {
                curves: active.into_iter().zip(weights).collect(),
                band_sd: areas.iter().map(|a| (lambda * a).sqrt()).collect(),
            }
        })
        .collect()
}

/// Exact finite-N Stratonovich transport from per-half-cell generators.
fn strat_matrix(xs: &[CMat], lattice: &Lattice, piece: &HorizontalCurve, dim: usize) -> Result<CMat> {
    let (lo, hi) = piece.x_range();
    let fam = lattice.strat_family(lo, hi)?;
    let id = CMat::identity(dim);
    if fam.is_empty() {
        return Ok(id);
    }
    let gen = |i: isize| -> CMat {
        if i < 0 {
            xs[0].clone()
        } else {
            &xs[i as usize] + &xs[i as usize + 1]
        }
    };
    // G_t: signed sum over chains whose word starts at J_t;
    // running sums over already-processed indices, split by parity
    let mut acc = [CMat::zeros(dim), CMat::zeros(dim)];
    let order: Vec<isize> = match piece.direction() {
        Direction::Right => fam.clone(),
        Direction::Left => fam.iter().rev().copied().collect(),
    };
    for &t in &order {
        let opposite = (t + 1).rem_euclid(2) as usize;
        let inner = &id + &acc[opposite];
        let v = (&gen(t) * &inner).scale_re(-1.0);
        acc[t.rem_euclid(2) as usize].axpy(1.0, &v);
    }
    let anchor = *order.last().unwrap();
    let mut out = id;
    out.axpy(1.0, &acc[anchor.rem_euclid(2) as usize]);
    Ok(out)
}

fn one_sample(lp: &AdmissibleLoop, rep: &Representation, lattice: &Lattice, cols: &[Column], seed: u64, index: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let ld = rep.lie_dim();
    let m = lp.m();
    let mut xs: Vec<Vec<CMat>> = vec![Vec::with_capacity(cols.len()); m];
    let mut z = Vec::new();
    let mut coords = vec![0.0; ld];
    for col in cols {
        z.clear();
        for sd in &col.band_sd {
            for _ in 0..ld {
                z.push(sd * rng.sample::<f64, _>(StandardNormal));
            }
        }
        let mut present = vec![false; m];
        for (a, w) in &col.curves {
            for (c, x) in coords.iter_mut().enumerate() {
                *x = w.iter().enumerate().map(|(b, wb)| wb * z[b * ld + c]).sum();
            }
            xs[a - 1].push(rep.algebra_element(&coords));
            present[a - 1] = true;
        }
        for a in 0..m {
            if !present[a] {
                xs[a].push(CMat::zeros(rep.dim));
            }
        }
    }
    let mut prod = CMat::identity(rep.dim);
    for a in (1..=m).rev() {
        let p = strat_matrix(&xs[a - 1], lattice, lp.piece(a), rep.dim)?;
        prod = &prod * &p;
    }
    Ok(prod.trace().re)
}

/// (count, mean, M2) merged left to right.
fn merge(a: (usize, f64, f64), b: (usize, f64, f64)) -> (usize, f64, f64) {
    if a.0 == 0 {
        return b;
    }
    if b.0 == 0 {
        return a;
    }
    let n = a.0 + b.0;
    let d = b.1 - a.1;
    let mean = a.1 + d * b.0 as f64 / n as f64;
    let m2 = a.2 + b.2 + d * d * (a.0 as f64 * b.0 as f64) / n as f64;
    (n, mean, m2)
}

/// Monte-Carlo estimate of ⟨tr(g̃^m ⋯ g̃^1)⟩ at coupling λ on lattice N.
pub fn mc_wilson(lp: &AdmissibleLoop, rep: &Representation, lambda: f64, n: usize, n_samples: usize, seed: u64) -> Result<McEstimate> {
    if n_samples == 0 {
        return Err(Error::Invalid("no samples requested".into()));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::Invalid("MC requires λ > 0".into()));
    }
    check_loop(lp)?;
    let lattice = Lattice::new(n, lp.strip_length())?;
    for p in lp.pieces() {
        lattice.strat_family(p.x_range().0, p.x_range().1)?;
    }
    let cols = column_models(lp, &lattice, lambda);
    let chunks: Vec<Result<((usize, f64, f64), usize)>> = (0..n_samples.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut stats = (0usize, 0.0, 0.0);
            let mut rejected = 0;
            for i in c * CHUNK..((c + 1) * CHUNK).min(n_samples) {
                let v = one_sample(lp, rep, &lattice, &cols, seed, i as u64)?;
                if v.is_finite() {
                    stats = merge(stats, (1, v, 0.0));
                } else {
                    rejected += 1;
                }
            }
            Ok((stats, rejected))
        })
        .collect();
    let mut stats = (0usize, 0.0, 0.0);
    let mut n_rejected = 0;
    for c in chunks {
        let (s, r) = c?;
        stats = merge(stats, s);
        n_rejected += r;
    }
    let (count, mean, m2) = stats;
    let stderr = if count > 1 { (m2 / (count - 1) as f64).sqrt() / (count as f64).sqrt() } else { f64::NAN };
    Ok(McEstimate {
        mean,
        stderr,
        n_samples,
        n_rejected,
        seed,
        lattice_n: n,
        lambda,
        flagged: n_rejected * 100 > n_samples,
        rng: RNG_NAME,
    })
}
