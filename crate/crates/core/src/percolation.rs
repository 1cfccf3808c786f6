//! Oriented site percolation on the space-time triangle `Δ_(i,t)` and its
//! coupling with the process.
//!
//! `Δ_(i,t) = {(j, s) : 0 ≤ s ≤ t, i ≤ j ≤ i + t − s}`. Vertex `(j, s+1)`
//! receives bonds from `(j, s)` and `(j+1, s)`; bonds are always open
//! upward, level-0 vertices are always open and every other vertex is
//! closed with probability α. The vertex marks are exactly the `R_α`
//! erasures, which makes "cell `(i,t)` occupied" and "apex reachable" the
//! same event sample by sample.

use alloc::vec;
use alloc::vec::Vec;

use crate::process::{advance, Configuration};
use crate::rng::RngStream;
use crate::{check_probability, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Triangle {
    pub apex: i64,
    pub height: u64,
}

impl Triangle {
    pub fn new(apex: i64, height: i64) -> Result<Self> {
        let height = u64::try_from(height)
            .map_err(|_| Error::Parameter { name: "t", reason: "apex time must be nonnegative" })?;
        Ok(Self { apex, height })
    }

    /// `(t+2)(t+1)/2`.
    pub fn vertex_count(&self) -> usize {
        let t = self.height as usize;
        (t + 2) * (t + 1) / 2
    }

    pub fn level_width(&self, s: u64) -> usize {
        (self.height - s + 1) as usize
    }

    pub fn contains(&self, j: i64, s: u64) -> bool {
        s <= self.height && j >= self.apex && j <= self.apex + (self.height - s) as i64
    }

    /// Raster index (`s` ascending, then `j` ascending).
    pub fn index(&self, j: i64, s: u64) -> Option<usize> {
        if !self.contains(j, s) {
            return None;
        }
        let t = self.height as usize;
        let s = s as usize;
        // levels 0..s hold (t+1) + t + ... + (t-s+2) vertices
        let before = s * (t + 1) - s * (s.saturating_sub(1)) / 2;
        Some(before + (j - self.apex) as usize)
    }

    /// All vertices in raster order.
    pub fn vertices(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        (0..=self.height).flat_map(move |s| (0..self.level_width(s) as i64).map(move |k| (self.apex + k, s)))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PercolationSample {
    triangle: Triangle,
    alpha: f64,
    open: Vec<bool>,
}

impl PercolationSample {
    /// Builds a sample from one uniform per non-initial vertex, in raster
    /// order; a vertex is closed iff its uniform is below α.
    pub fn from_uniforms(triangle: Triangle, alpha: f64, uniforms: &[f64]) -> Result<Self> {
        check_probability("alpha", alpha)?;
        let base = triangle.level_width(0);
        if uniforms.len() != triangle.vertex_count() - base {
            return Err(Error::Parameter { name: "uniforms", reason: "need one draw per non-initial vertex" });
        }
        let mut open = vec![true; triangle.vertex_count()];
        for (slot, &u) in open[base..].iter_mut().zip(uniforms) {
            *slot = u >= alpha;
        }
        Ok(Self { triangle, alpha, open })
    }

    pub fn triangle(&self) -> Triangle {
        self.triangle
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn vertex_count(&self) -> usize {
        self.open.len()
    }

    pub fn is_open(&self, j: i64, s: u64) -> bool {
        self.triangle.index(j, s).is_some_and(|k| self.open[k])
    }

    pub fn set_open(&mut self, j: i64, s: u64, open: bool) {
        if let Some(k) = self.triangle.index(j, s) {
            if s > 0 {
                self.open[k] = open;
            }
        }
    }
}

pub fn sample_triangle(apex: (i64, i64), alpha: f64, rng: &mut RngStream) -> Result<PercolationSample> {
    let triangle = Triangle::new(apex.0, apex.1)?;
    let uniforms = draw_table(&triangle, rng);
    PercolationSample::from_uniforms(triangle, alpha, &uniforms)
}

fn draw_table(triangle: &Triangle, rng: &mut RngStream) -> Vec<f64> {
    let n = triangle.vertex_count() - triangle.level_width(0);
    (0..n).map(|_| rng.uniform()).collect()
}

/// Whether an open directed path joins level 0 to the apex.
pub fn reachable(sample: &PercolationSample) -> bool {
    let tri = sample.triangle;
    // Level sweep from the sources: (j, s) is reached iff it is open and one
    // of (j, s-1), (j+1, s-1) is reached.
    let mut level: Vec<bool> = (0..tri.level_width(0) as i64).map(|k| sample.is_open(tri.apex + k, 0)).collect();
    for s in 1..=tri.height {
        let width = tri.level_width(s);
        let next: Vec<bool> =
            (0..width).map(|k| sample.is_open(tri.apex + k as i64, s) && (level[k] || level[k + 1])).collect();
        if !next.iter().any(|&x| x) {
            return false;
        }
        level = next;
    }
    level[0]
}

/// The two verdicts of one coupled draw.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CouplingOutcome {
    pub occupied: bool,
    pub reachable: bool,
}

impl CouplingOutcome {
    pub fn agrees(&self) -> bool {
        self.occupied == self.reachable
    }
}

/// Runs the process and the percolation off one shared table of uniforms.
pub fn coupled_outcome(apex: (i64, i64), alpha: f64, rng: &mut RngStream) -> Result<CouplingOutcome> {
    let triangle = Triangle::new(apex.0, apex.1)?;
    let table = draw_table(&triangle, rng);
    let sample = PercolationSample::from_uniforms(triangle, alpha, &table)?;

    let base = triangle.level_width(0);
    let mut c = Configuration::all_ones(triangle.apex, base)?;
    let mut from_table = |j: i64, s: u64| {
        let k = triangle.index(j, s).expect("process cell lies in the triangle");
        table[k - base]
    };
    for s in 1..=triangle.height {
        advance(&mut c, alpha, s, &mut from_table)?;
    }
    Ok(CouplingOutcome { occupied: c.cells()[0] == 1, reachable: reachable(&sample) })
}

/// Whether occupation of `(i, t)` and reachability of the apex agree on one
/// shared draw.
pub fn coupling_check(apex: (i64, i64), alpha: f64, rng: &mut RngStream) -> Result<bool> {
    coupled_outcome(apex, alpha, rng).map(|o| o.agrees())
}
