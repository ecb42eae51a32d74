//! Closed loops built from horizontal polyline pieces joined by implicit
//! vertical segments.
//!
//! Curve indices are 1-based (α = 1..m); index 0 denotes the x-axis, which is
//! treated as a right-moving curve of height 0 over all of [0, L].

use crate::error::{Error, Result};

const MATCH_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Right,
    Left,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Right => 1.0,
            Direction::Left => -1.0,
        }
    }
}

/// Graph of a piecewise-linear function, traversed left-to-right or right-to-left.
#[derive(Clone, Debug, PartialEq)]
pub struct HorizontalCurve {
    /// Vertices in traversal order.
    vertices: Vec<(f64, f64)>,
    /// Same vertices sorted by increasing x.
    ascending: Vec<(f64, f64)>,
    direction: Direction,
}

impl HorizontalCurve {
    pub fn new(vertices: Vec<(f64, f64)>) -> Result<Self> {
        if vertices.len() < 2 {
            return Err(Error::Invalid("a horizontal curve needs at least two vertices".into()));
        }
        if vertices.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return Err(Error::Invalid("non-finite vertex".into()));
        }
        let direction =
            if vertices[1].0 > vertices[0].0 { Direction::Right } else { Direction::Left };
        for w in vertices.windows(2) {
            let ok = match direction {
                Direction::Right => w[1].0 > w[0].0,
                Direction::Left => w[1].0 < w[0].0,
            };
            if !ok {
                return Err(Error::Invalid(format!(
                    "x must be strictly monotone along a piece (at x = {})",
                    w[1].0
                )));
            }
        }
        let mut ascending = vertices.clone();
        if direction == Direction::Left {
            ascending.reverse();
        }
        Ok(Self { vertices, ascending, direction })
    }

    pub fn vertices(&self) -> &[(f64, f64)] {
        &self.vertices
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Initial x-coordinate of the traversal.
    pub fn x_minus(&self) -> f64 {
        self.vertices[0].0
    }

    /// Terminal x-coordinate of the traversal.
    pub fn x_plus(&self) -> f64 {
        self.vertices[self.vertices.len() - 1].0
    }

    /// (min x, max x).
    pub fn x_range(&self) -> (f64, f64) {
        (self.ascending[0].0, self.ascending[self.ascending.len() - 1].0)
    }

    pub fn covers(&self, a: f64, b: f64) -> bool {
        let (lo, hi) = self.x_range();
        a >= lo - MATCH_TOL && b <= hi + MATCH_TOL
    }

    /// Vertex x-coordinates, increasing.
    pub fn breakpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.ascending.iter().map(|v| v.0)
    }

    /// γ̄(x), clamped to the end values outside the x-range.
    pub fn height(&self, x: f64) -> f64 {
        let v = &self.ascending;
        if x <= v[0].0 {
            return v[0].1;
        }
        let last = v[v.len() - 1];
        if x >= last.0 {
            return last.1;
        }
        let k = v.partition_point(|p| p.0 <= x).max(1);
        let (x0, y0) = v[k - 1];
        let (x1, y1) = v[k];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }

    /// ∫_a^b γ̄(x) dx over [a, b] ∩ x-range (trapezoid on each linear piece is exact).
    pub fn height_integral(&self, a: f64, b: f64) -> f64 {
        let (lo, hi) = self.x_range();
        let (a, b) = (a.max(lo), b.min(hi));
        if b <= a {
            return 0.0;
        }
        let mut pts = vec![a];
        pts.extend(self.breakpoints().filter(|&x| x > a && x < b));
        pts.push(b);
        pts.windows(2).map(|w| 0.5 * (w[1] - w[0]) * (self.height(w[0]) + self.height(w[1]))).sum()
    }

    fn shifted(&self, dx: f64, dy: f64) -> Self {
        let shift = |v: &Vec<(f64, f64)>| v.iter().map(|&(x, y)| (x + dx, y + dy)).collect();
        Self { vertices: shift(&self.vertices), ascending: shift(&self.ascending), direction: self.direction }
    }
}

/// A closed loop: horizontal pieces γ_1..γ_m in traversal order.
#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibleLoop {
    pieces: Vec<HorizontalCurve>,
    strip_length: f64,
}

/// Validates the matching conditions x_+^α = x_-^{α+1} (cyclically) and
/// translates the loop in x so that its support starts at 0.
pub fn build_loop(pieces: Vec<HorizontalCurve>) -> Result<AdmissibleLoop> {
    if pieces.is_empty() {
        return Err(Error::Invalid("loop has no pieces".into()));
    }
    let m = pieces.len();
    for a in 0..m {
        let end = pieces[a].x_plus();
        let start = pieces[(a + 1) % m].x_minus();
        if (end - start).abs() > MATCH_TOL * (1.0 + end.abs()) {
            return Err(Error::NotClosed(format!(
                "piece {} ends at x = {end} but piece {} starts at x = {start}",
                a + 1,
                (a + 1) % m + 1
            )));
        }
    }
    let x0 = pieces.iter().map(|p| p.x_range().0).fold(f64::INFINITY, f64::min);
    let pieces: Vec<_> = pieces.iter().map(|p| p.shifted(-x0, 0.0)).collect();
    let strip_length = pieces.iter().map(|p| p.x_range().1).fold(0.0, f64::max);
    Ok(AdmissibleLoop { pieces, strip_length })
}

impl AdmissibleLoop {
    /// Builds a loop from raw vertex lists, one per piece.
    pub fn from_vertices(pieces: Vec<Vec<(f64, f64)>>) -> Result<Self> {
        build_loop(pieces.into_iter().map(HorizontalCurve::new).collect::<Result<_>>()?)
    }

    pub fn m(&self) -> usize {
        self.pieces.len()
    }

    pub fn pieces(&self) -> &[HorizontalCurve] {
        &self.pieces
    }

    /// Piece α, 1-based.
    pub fn piece(&self, alpha: usize) -> &HorizontalCurve {
        &self.pieces[alpha - 1]
    }

    pub fn strip_length(&self) -> f64 {
        self.strip_length
    }

    /// Direction of curve α; curve 0 is the right-moving x-axis.
    pub fn direction(&self, alpha: usize) -> Direction {
        if alpha == 0 {
            Direction::Right
        } else {
            self.piece(alpha).direction()
        }
    }

    /// γ̄_α(x); the axis has height 0.
    pub fn height(&self, alpha: usize, x: f64) -> f64 {
        if alpha == 0 {
            0.0
        } else {
            self.piece(alpha).height(x)
        }
    }

    /// x-range of curve α; the axis spans the whole strip.
    pub fn x_range(&self, alpha: usize) -> (f64, f64) {
        if alpha == 0 {
            (0.0, self.strip_length)
        } else {
            self.piece(alpha).x_range()
        }
    }

    /// Vertex x-coordinates of curve α (empty for the axis).
    pub fn breakpoints(&self, alpha: usize) -> Vec<f64> {
        if alpha == 0 {
            Vec::new()
        } else {
            self.piece(alpha).breakpoints().collect()
        }
    }

    /// σ_αβ over 0..=m, without range checks.
    pub fn sigma(&self, alpha: usize, beta: usize) -> f64 {
        if self.direction(alpha) == self.direction(beta) {
            1.0
        } else {
            -1.0
        }
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        let pieces: Vec<_> = self.pieces.iter().map(|p| p.shifted(dx, dy)).collect();
        build_loop(pieces).expect("translation preserves matching")
    }

    pub fn min_y(&self) -> f64 {
        self.all_vertices().map(|v| v.1).fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_y(&self) -> f64 {
        self.all_vertices().map(|v| v.1.abs()).fold(0.0, f64::max)
    }

    pub fn max_y(&self) -> f64 {
        self.all_vertices().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max)
    }

    /// True when some piece takes both signs, or touches and leaves y = 0.
    pub fn crosses_axis(&self) -> bool {
        self.min_y() < 0.0 && self.max_y() > 0.0
    }

    fn all_vertices(&self) -> impl Iterator<Item = &(f64, f64)> {
        self.pieces.iter().flat_map(|p| p.vertices().iter())
    }

    /// Closed polygon (horizontal pieces plus vertical joins), consecutive
    /// duplicates removed.
    pub fn polygon(&self) -> Vec<(f64, f64)> {
        let mut pts: Vec<(f64, f64)> = Vec::new();
        for v in self.all_vertices() {
            if pts.last().is_none_or(|l| !same_point(*l, *v)) {
                pts.push(*v);
            }
        }
        while pts.len() > 1 && same_point(pts[0], pts[pts.len() - 1]) {
            pts.pop();
        }
        pts
    }

    /// Checks the polygon for self-intersections.
    pub fn is_simple(&self) -> bool {
        let p = self.polygon();
        let n = p.len();
        if n < 3 {
            return false;
        }
        let seg = |i: usize| (p[i], p[(i + 1) % n]);
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = seg(i);
                let (c, d) = seg(j);
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    // shared endpoint is fine unless the segments fold back onto each other
                    let (shared, u, v) = if j == i + 1 { (b, a, d) } else { (a, b, c) };
                    if collinear_overlap(shared, u, v) {
                        return false;
                    }
                } else if segments_intersect(a, b, c, d) {
                    return false;
                }
            }
        }
        true
    }

    /// Signed shoelace area of the polygon (positive for counter-clockwise).
    pub fn signed_area(&self) -> f64 {
        let p = self.polygon();
        let n = p.len();
        0.5 * (0..n).map(|i| p[i].0 * p[(i + 1) % n].1 - p[(i + 1) % n].0 * p[i].1).sum::<f64>()
    }

    /// Σ_α ±∫ γ̄_α dx with the traversal orientation; equals −∮ y dx.
    pub fn green_area(&self) -> f64 {
        -self
            .pieces
            .iter()
            .map(|p| {
                let (a, b) = p.x_range();
                p.direction().sign() * p.height_integral(a, b)
            })
            .sum::<f64>()
    }
}

/// σ_αβ for 1 ≤ α, β ≤ m.
pub fn direction_sign(lp: &AdmissibleLoop, alpha: usize, beta: usize) -> Result<i32> {
    let m = lp.m();
    if alpha == 0 || beta == 0 || alpha > m || beta > m {
        return Err(Error::Invalid(format!("curve index out of range 1..={m}: ({alpha}, {beta})")));
    }
    Ok(lp.sigma(alpha, beta) as i32)
}

/// |R| for a simple loop.
pub fn enclosed_area(lp: &AdmissibleLoop) -> Result<f64> {
    if !lp.is_simple() {
        return Err(Error::NotSimple("loop is self-intersecting; no exact reference".into()));
    }
    Ok(lp.signed_area().abs())
}

fn same_point(a: (f64, f64), b: (f64, f64)) -> bool {
    (a.0 - b.0).abs() <= MATCH_TOL && (a.1 - b.1).abs() <= MATCH_TOL
}

fn orient(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    let v = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
    if v.abs() <= 1e-13 {
        0.0
    } else {
        v
    }
}

fn on_segment(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> bool {
    p.0 >= a.0.min(b.0) - MATCH_TOL
        && p.0 <= a.0.max(b.0) + MATCH_TOL
        && p.1 >= a.1.min(b.1) - MATCH_TOL
        && p.1 <= a.1.max(b.1) + MATCH_TOL
}

fn segments_intersect(a: (f64, f64), b: (f64, f64), c: (f64, f64), d: (f64, f64)) -> bool {
    let (o1, o2, o3, o4) = (orient(a, b, c), orient(a, b, d), orient(c, d, a), orient(c, d, b));
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        return true;
    }
    (o1 == 0.0 && on_segment(a, b, c))
        || (o2 == 0.0 && on_segment(a, b, d))
        || (o3 == 0.0 && on_segment(c, d, a))
        || (o4 == 0.0 && on_segment(c, d, b))
}

/// Segments shared→u and shared→v are collinear and point the same way.
fn collinear_overlap(shared: (f64, f64), u: (f64, f64), v: (f64, f64)) -> bool {
    if orient(shared, u, v) != 0.0 {
        return false;
    }
    let dot = (u.0 - shared.0) * (v.0 - shared.0) + (u.1 - shared.1) * (v.1 - shared.1);
    dot > 0.0
}

#[cfg(test)]
pub(crate) mod shapes {
    use super::*;

    pub fn rectangle() -> AdmissibleLoop {
        AdmissibleLoop::from_vertices(vec![vec![(0.0, 1.0), (1.0, 1.0)], vec![(1.0, 2.0), (0.0, 2.0)]]).unwrap()
    }

    pub fn triangle() -> AdmissibleLoop {
        AdmissibleLoop::from_vertices(vec![vec![(0.0, 0.5), (1.0, 0.5)], vec![(1.0, 1.5), (0.0, 0.5)]]).unwrap()
    }

    pub fn two_lap() -> AdmissibleLoop {
        let lower = vec![(0.0, 1.0), (1.0, 1.0)];
        let upper = vec![(1.0, 2.0), (0.0, 2.0)];
        AdmissibleLoop::from_vertices(vec![lower.clone(), upper.clone(), lower, upper]).unwrap()
    }
}
