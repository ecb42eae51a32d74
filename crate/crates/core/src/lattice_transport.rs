//! Lattice interval families and discretized parallel transport.
//!
//! Λ_N = {kΔx}, Δx = L/N. Half-cells h_j = [jΔx/2, (j+1)Δx/2], j = 0..2N−1.
//! 𝓘_N tiles I_i = h_{2i} ∪ h_{2i+1}; 𝓘̃_N has J_i = h_i ∪ h_{i+1}
//! (i = 0..2N−2) plus J_{−1} = h_0.
//!
//! Generators are oriented: a left-moving piece's increments carry the
//! traversal sign, so both directions use the (−1)ⁿ series.

use crate::curve_geometry::Direction;
use crate::error::{Error, Result};
use crate::gauge_covariance::Covariance;
use crate::wick_algebra::{FormalSeries, Monomial, SeriesOrigin, Slot};

const GRID_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lattice {
    n: usize,
    length: f64,
}

impl Lattice {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Invalid("lattice needs N ≥ 1".into()));
        }
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::Invalid(format!("strip length must be positive, got {length}")));
        }
        Ok(Self { n, length })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    /// The point jΔx/2 of the half lattice Λ_{2N}.
    pub fn half_point(&self, j: usize) -> f64 {
        self.length * j as f64 / (2 * self.n) as f64
    }

    /// The point kΔx/4 of Λ_{4N}.
    pub fn quarter_point(&self, k: usize) -> f64 {
        self.length * k as f64 / (4 * self.n) as f64
    }

    pub fn half_cell(&self, j: usize) -> (f64, f64) {
        (self.half_point(j), self.half_point(j + 1))
    }

    pub fn ito_interval(&self, i: usize) -> (f64, f64) {
        (self.half_point(2 * i), self.half_point(2 * i + 2))
    }

    /// J_i for i = −1..=2N−2.
    pub fn strat_interval(&self, i: isize) -> (f64, f64) {
        if i < 0 {
            (0.0, self.half_point(1))
        } else {
            (self.half_point(i as usize), self.half_point(i as usize + 2))
        }
    }

    /// (J⁻, J⁺); J⁻_{−1} = {0} is the degenerate point interval.
    pub fn strat_split(&self, i: isize) -> ((f64, f64), (f64, f64)) {
        if i < 0 {
            ((0.0, 0.0), self.half_cell(0))
        } else {
            let i = i as usize;
            (self.half_cell(i), self.half_cell(i + 1))
        }
    }

    /// Half-lattice index of x, if x ∈ Λ_{2N}.
    pub fn half_index(&self, x: f64) -> Option<usize> {
        let t = x / self.length * (2 * self.n) as f64;
        let r = t.round();
        ((t - r).abs() < GRID_TOL && r >= 0.0 && r <= (2 * self.n) as f64).then_some(r as usize)
    }

    /// Index k with x = kΔx, if x ∈ Λ_N.
    pub fn lattice_index(&self, x: f64) -> Result<usize> {
        match self.half_index(x) {
            Some(j) if j % 2 == 0 => Ok(j / 2),
            _ => Err(Error::Invalid(format!("endpoint x = {x} is off the lattice Λ_{}", self.n))),
        }
    }

    /// Half-cells making up [a, b]; both ends must lie on Λ_{2N}.
    pub fn half_cells_in(&self, a: f64, b: f64) -> Result<Vec<usize>> {
        match (self.half_index(a), self.half_index(b)) {
            (Some(ja), Some(jb)) => Ok((ja..jb).collect()),
            _ => Err(Error::Invalid(format!("[{a}, {b}] is not a union of half-cells"))),
        }
    }

    /// Indices i with I_i ⊆ [x_lo, x_hi], ascending.
    pub fn ito_family(&self, x_lo: f64, x_hi: f64) -> Result<Vec<usize>> {
        let (lo, hi) = (self.lattice_index(x_lo)?, self.lattice_index(x_hi)?);
        Ok((lo..hi).collect())
    }

    /// Indices i with J_i ⊆ [x_lo, x_hi], ascending.
    pub fn strat_family(&self, x_lo: f64, x_hi: f64) -> Result<Vec<isize>> {
        let (lo, hi) = (2 * self.lattice_index(x_lo)?, 2 * self.lattice_index(x_hi)?);
        let mut out = Vec::new();
        if lo == 0 && hi >= 1 {
            out.push(-1);
        }
        out.extend((lo as isize..=hi as isize - 2).filter(|&i| i >= 0));
        Ok(out)
    }
}

fn direction_of(x_minus: f64, x_plus: f64) -> Direction {
    if x_plus >= x_minus {
        Direction::Right
    } else {
        Direction::Left
    }
}

/// 1 + Σₙ (−1)ⁿ Σ M^α(I_{i_n})⋯M^α(I_{i_1}) over strictly ordered tiles,
/// latest tile leftmost; at most 2K letters.
pub fn ito_transport(lattice: &Lattice, alpha: usize, x_minus: f64, x_plus: f64, k: usize) -> Result<FormalSeries> {
    let dir = direction_of(x_minus, x_plus);
    let mut fam = lattice.ito_family(x_minus.min(x_plus), x_minus.max(x_plus))?;
    if dir == Direction::Right {
        fam.reverse();
    }
    // `fam` is now in word order: each later letter is an earlier tile
    let slots: Vec<Slot> = fam
        .iter()
        .map(|&i| {
            let (a, b) = lattice.ito_interval(i);
            Slot::differential(alpha, a, b)
        })
        .collect();
    let mut monos = vec![Monomial::new(1.0, Vec::new())];
    let mut word = Vec::new();
    subsequences(&slots, 0, 2 * k, &mut word, &mut monos);
    let origin = SeriesOrigin::Ito { lattice: *lattice, curve: alpha, x_minus, x_plus };
    Ok(FormalSeries::from_monomials(k, monos).with_origin(origin))
}

fn subsequences(slots: &[Slot], start: usize, budget: usize, word: &mut Vec<Slot>, out: &mut Vec<Monomial>) {
    if budget == 0 {
        return;
    }
    for i in start..slots.len() {
        word.push(slots[i]);
        let sign = if word.len() % 2 == 0 { 1.0 } else { -1.0 };
        out.push(Monomial::new(sign, word.clone()));
        subsequences(slots, i + 1, budget - 1, word, out);
        word.pop();
    }
}

/// Stratonovich chains over 𝓘̃_N[x_lo, x_hi] in word order (first element is
/// i_n, the latest): right-moving i_+ ⪰ i_n ≻ … ≻ i_1, left-moving
/// i_− ⪯ i_n ≺ … ≺ i_1. Depth at most `max_depth`.
pub fn strat_chains(family: &[isize], dir: Direction, max_depth: usize) -> Vec<Vec<isize>> {
    let mut out = Vec::new();
    if family.is_empty() || max_depth == 0 {
        return out;
    }
    let contains = |i: isize| family.binary_search(&i).is_ok();
    let (anchor, step): (isize, isize) = match dir {
        Direction::Right => (*family.last().unwrap(), -1),
        Direction::Left => (family[0], 1),
    };
    fn extend(
        chain: &mut Vec<isize>,
        step: isize,
        max_depth: usize,
        contains: &dyn Fn(isize) -> bool,
        out: &mut Vec<Vec<isize>>,
    ) {
        out.push(chain.clone());
        if chain.len() == max_depth {
            return;
        }
        let last = *chain.last().unwrap();
        let mut next = last + step;
        while contains(next) {
            chain.push(next);
            extend(chain, step, max_depth, contains, out);
            chain.pop();
            next += 2 * step;
        }
    }
    let mut top = anchor;
    while contains(top) {
        let mut chain = vec![top];
        extend(&mut chain, step, max_depth, &contains, &mut out);
        top += 2 * step;
    }
    out
}

/// 1 + Σₙ (−1)ⁿ Σ_{chains} M^α(J_{i_n})⋯M^α(J_{i_1}); at most 2K letters.
pub fn strat_transport(lattice: &Lattice, alpha: usize, x_minus: f64, x_plus: f64, k: usize) -> Result<FormalSeries> {
    let dir = direction_of(x_minus, x_plus);
    let fam = lattice.strat_family(x_minus.min(x_plus), x_minus.max(x_plus))?;
    let mut monos = vec![Monomial::new(1.0, Vec::new())];
    for chain in strat_chains(&fam, dir, 2 * k) {
        let sign = if chain.len() % 2 == 0 { 1.0 } else { -1.0 };
        let slots = chain
            .iter()
            .map(|&i| {
                let (a, b) = lattice.strat_interval(i);
                Slot::differential(alpha, a, b)
            })
            .collect();
        monos.push(Monomial::new(sign, slots));
    }
    let origin = SeriesOrigin::Stratonovich { lattice: *lattice, curve: alpha, x_minus, x_plus };
    Ok(FormalSeries::from_monomials(k, monos).with_origin(origin))
}

/// One block of a converted Stratonovich chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Block {
    /// A single Itô-type differential.
    D,
    /// An adjacent contracted pair, i.e. a Riemann insertion.
    R,
}

/// All ways to write a depth-n chain as D (1) and R (2) blocks: F_{n+1} of them.
pub fn stratonovich_patterns(depth: usize) -> Vec<Vec<Block>> {
    if depth == 0 {
        return vec![Vec::new()];
    }
    let mut out: Vec<Vec<Block>> = stratonovich_patterns(depth - 1)
        .into_iter()
        .map(|mut p| {
            p.insert(0, Block::D);
            p
        })
        .collect();
    if depth >= 2 {
        out.extend(stratonovich_patterns(depth - 2).into_iter().map(|mut p| {
            p.insert(0, Block::R);
            p
        }));
    }
    out
}

/// Where the converted blocks of one transport live.
///
/// Tiles are the J_t (or I_t) a block may occupy; an R block at tile t
/// carries λ∫_{h} C^{αα} over the overlap half-cell h with its neighbour.
#[derive(Clone, Debug, PartialEq)]
pub struct TileLayout {
    pub direction: Direction,
    /// Tiles in x-order, as (first half-cell, one past last half-cell).
    pub tiles: Vec<(usize, usize)>,
    /// For each tile, the half-cell of its Riemann insertion, if allowed.
    pub riemann_cell: Vec<Option<usize>>,
}

impl TileLayout {
    /// Itô layout: tiles I_i, no Riemann insertions.
    pub fn ito(lattice: &Lattice, x_minus: f64, x_plus: f64) -> Result<Self> {
        let fam = lattice.ito_family(x_minus.min(x_plus), x_minus.max(x_plus))?;
        let tiles: Vec<_> = fam.iter().map(|&i| (2 * i, 2 * i + 2)).collect();
        let riemann_cell = vec![None; tiles.len()];
        Ok(Self { direction: direction_of(x_minus, x_plus), tiles, riemann_cell })
    }

    /// Layout of the Stratonovich transport after Itô conversion: tiles J_t
    /// with the parity of i_+ (right-moving) or i_− (left-moving).
    pub fn stratonovich(lattice: &Lattice, x_minus: f64, x_plus: f64) -> Result<Self> {
        let dir = direction_of(x_minus, x_plus);
        let fam = lattice.strat_family(x_minus.min(x_plus), x_minus.max(x_plus))?;
        let mut tiles = Vec::new();
        let mut riemann_cell = Vec::new();
        if let (Some(&first), Some(&last)) = (fam.first(), fam.last()) {
            let contains = |i: isize| fam.binary_search(&i).is_ok();
            let anchor = if dir == Direction::Right { last } else { first };
            for &t in fam.iter().filter(|&&t| (t - anchor).rem_euclid(2) == 0) {
                let (lo, hi) = if t < 0 { (0, 1) } else { (t as usize, t as usize + 2) };
                tiles.push((lo, hi));
                riemann_cell.push(match dir {
                    Direction::Right => contains(t - 1).then_some(t as usize),
                    Direction::Left => contains(t + 1).then_some((t + 1) as usize),
                });
            }
        }
        Ok(Self { direction: dir, tiles, riemann_cell })
    }

    /// Tiles in word order (latest first).
    fn word_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.tiles.len()).collect();
        if self.direction == Direction::Right {
            idx.reverse();
        }
        idx
    }
}

/// Explicit Itô–Riemann expansion of a Stratonovich transport (or a product
/// of them); the O(1/N) remainder of each adjacent-pair replacement is
/// dropped. Riemann insertions whose weight vanishes under `spec` are pruned.
pub fn strat_to_ito(series: &FormalSeries, spec: &dyn Covariance) -> Result<FormalSeries> {
    convert_origin(series.origin(), series.order(), spec)
}

fn convert_origin(origin: &SeriesOrigin, k: usize, spec: &dyn Covariance) -> Result<FormalSeries> {
    match origin {
        SeriesOrigin::Stratonovich { lattice, curve, x_minus, x_plus } => {
            let layout = TileLayout::stratonovich(lattice, *x_minus, *x_plus)?;
            Ok(converted_transport(lattice, &layout, *curve, k, spec))
        }
        SeriesOrigin::Product(parts) => {
            let factors = parts.iter().map(|p| convert_origin(p, k, spec)).collect::<Result<Vec<_>>>()?;
            Ok(FormalSeries::product(&factors))
        }
        other => Err(Error::NotStratonovich(format!("{other:?}"))),
    }
}

/// Σ over strictly ordered tiles, each a D or (if allowed) R block, with
/// sign (−1)^{#D}. Tiles are the converted layout's.
pub fn converted_transport(lattice: &Lattice, layout: &TileLayout, alpha: usize, k: usize, spec: &dyn Covariance) -> FormalSeries {
    let mut choices: Vec<Vec<Slot>> = Vec::new();
    for t in layout.word_order() {
        let (lo, hi) = layout.tiles[t];
        let mut c = vec![Slot::differential(alpha, lattice.half_point(lo), lattice.half_point(hi))];
        if let Some(h) = layout.riemann_cell[t] {
            let (a, b) = lattice.half_cell(h);
            if spec.pair_integral(alpha, alpha, a, b) != 0.0 {
                c.push(Slot::riemann(alpha, a, b));
            }
        }
        choices.push(c);
    }
    let mut monos = vec![Monomial::new(1.0, Vec::new())];
    fn rec(choices: &[Vec<Slot>], start: usize, budget: usize, sign: f64, word: &mut Vec<Slot>, out: &mut Vec<Monomial>) {
        for t in start..choices.len() {
            for s in &choices[t] {
                let w = s.weight();
                if w > budget {
                    continue;
                }
                let sg = if w == 1 { -sign } else { sign };
                word.push(*s);
                out.push(Monomial::new(sg, word.clone()));
                rec(choices, t + 1, budget - w, sg, word, out);
                word.pop();
            }
        }
    }
    rec(&choices, 0, 2 * k, 1.0, &mut Vec::new(), &mut monos);
    FormalSeries::from_monomials(k, monos)
}
