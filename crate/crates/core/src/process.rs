//! Finite-window simulation of the Stavskaya process.
//!
//! One time unit applies `D` (`y_i = max(x_i, x_{i+1})`) and then `R_α`
//! (each 1 independently becomes 0 with probability α). Windows carry no
//! boundary condition: `D` drops the rightmost cell, so observing `m` cells
//! after `t` steps needs exactly `m + t` initial cells, and every finite run
//! has the law of the infinite-lattice process restricted to the window.

use alloc::vec;
use alloc::vec::Vec;

use crate::rng::{RngStream, UniformField};
use crate::{check_probability, Error, Result};

/// A finite window of cell states; `cells[k]` is the state at lattice
/// coordinate `offset + k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    offset: i64,
    cells: Vec<u8>,
}

impl Configuration {
    pub fn new(offset: i64, cells: Vec<u8>) -> Result<Self> {
        if cells.is_empty() {
            return Err(Error::Parameter { name: "cells", reason: "window must be nonempty" });
        }
        if cells.iter().any(|&x| x > 1) {
            return Err(Error::Parameter { name: "cells", reason: "states must be 0 or 1" });
        }
        Ok(Self { offset, cells })
    }

    /// The restriction of `δ_1` to a window of `len` cells.
    pub fn all_ones(offset: i64, len: usize) -> Result<Self> {
        Self::new(offset, vec![1; len])
    }

    /// The restriction of `δ_0` to a window of `len` cells.
    pub fn all_zeros(offset: i64, len: usize) -> Result<Self> {
        Self::new(offset, vec![0; len])
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// State at lattice coordinate `j`, if it lies in the window.
    pub fn get(&self, j: i64) -> Option<u8> {
        let k = j.checked_sub(self.offset)?;
        usize::try_from(k).ok().and_then(|k| self.cells.get(k).copied())
    }

    pub fn count_ones(&self) -> usize {
        self.cells.iter().filter(|&&x| x == 1).count()
    }

    /// Fraction of 1s among the first `m` cells of the window.
    pub fn density_prefix(&self, m: usize) -> f64 {
        let m = m.min(self.cells.len());
        let ones = self.cells[..m].iter().filter(|&&x| x == 1).count();
        ones as f64 / m as f64
    }

    /// Cellwise `self ≤ other` on a shared window.
    pub fn is_dominated_by(&self, other: &Self) -> bool {
        self.offset == other.offset
            && self.cells.len() == other.cells.len()
            && self.cells.iter().zip(&other.cells).all(|(a, b)| a <= b)
    }

    fn spread_in_place(&mut self) -> Result<()> {
        if self.cells.len() < 2 {
            return Err(Error::WindowExhausted);
        }
        for k in 0..self.cells.len() - 1 {
            self.cells[k] |= self.cells[k + 1];
        }
        self.cells.pop();
        Ok(())
    }

    fn erase_in_place<S: EraseDraws + ?Sized>(&mut self, alpha: f64, time: u64, draws: &mut S) {
        let offset = self.offset;
        for (k, cell) in self.cells.iter_mut().enumerate() {
            if *cell == 1 && draws.draw(offset + k as i64, time) < alpha {
                *cell = 0;
            }
        }
    }
}

/// Source of the uniforms consumed by `R_α`.
///
/// `draw(cell, time)` is called once per 1-cell, left to right, at the
/// given time level (the level being produced, starting at 1). A cell is
/// erased iff the draw is below α.
pub trait EraseDraws {
    fn draw(&mut self, cell: i64, time: u64) -> f64;
}

impl EraseDraws for RngStream {
    #[inline]
    fn draw(&mut self, _cell: i64, _time: u64) -> f64 {
        self.uniform()
    }
}

impl EraseDraws for UniformField {
    #[inline]
    fn draw(&mut self, cell: i64, time: u64) -> f64 {
        self.at(cell, time)
    }
}

impl<F: FnMut(i64, u64) -> f64> EraseDraws for F {
    #[inline]
    fn draw(&mut self, cell: i64, time: u64) -> f64 {
        self(cell, time)
    }
}

pub fn apply_d(c: &Configuration) -> Result<Configuration> {
    let mut out = c.clone();
    out.spread_in_place()?;
    Ok(out)
}

pub fn apply_r(c: &Configuration, alpha: f64, rng: &mut RngStream) -> Result<Configuration> {
    apply_r_with(c, alpha, 1, rng)
}

/// `R_α` with an explicit draw source; `time` is forwarded to the source.
pub fn apply_r_with<S: EraseDraws + ?Sized>(
    c: &Configuration,
    alpha: f64,
    time: u64,
    draws: &mut S,
) -> Result<Configuration> {
    check_probability("alpha", alpha)?;
    let mut out = c.clone();
    out.erase_in_place(alpha, time, draws);
    Ok(out)
}

/// One time unit: `D` first, then `R_α`.
pub fn stav_step(c: &Configuration, alpha: f64, rng: &mut RngStream) -> Result<Configuration> {
    stav_step_with(c, alpha, 1, rng)
}

pub fn stav_step_with<S: EraseDraws + ?Sized>(
    c: &Configuration,
    alpha: f64,
    time: u64,
    draws: &mut S,
) -> Result<Configuration> {
    check_probability("alpha", alpha)?;
    let mut out = c.clone();
    advance(&mut out, alpha, time, draws)?;
    Ok(out)
}

/// Advances `c` in place by one step producing time level `time`.
pub fn advance<S: EraseDraws + ?Sized>(c: &mut Configuration, alpha: f64, time: u64, draws: &mut S) -> Result<()> {
    c.spread_in_place()?;
    c.erase_in_place(alpha, time, draws);
    Ok(())
}

/// Runs `t` steps from all ones on the exact dependence cone of the cells
/// `0..m`, calling `observe(s, &config)` for `s = 0..=t`.
pub fn run_cone<S, F>(m: usize, t: usize, alpha: f64, draws: &mut S, mut observe: F) -> Result<Configuration>
where
    S: EraseDraws + ?Sized,
    F: FnMut(usize, &Configuration),
{
    if m == 0 {
        return Err(Error::Parameter { name: "m", reason: "must be positive" });
    }
    check_probability("alpha", alpha)?;
    let mut c = Configuration::all_ones(0, m + t)?;
    observe(0, &c);
    for s in 1..=t {
        advance(&mut c, alpha, s as u64, draws)?;
        observe(s, &c);
    }
    Ok(c)
}

/// Density of 1s among the `m` observed cells at `t = 0..=t_max`, started
/// from all ones.
pub fn simulate_density<S: EraseDraws + ?Sized>(m: usize, t_max: usize, alpha: f64, draws: &mut S) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(t_max + 1);
    run_cone(m, t_max, alpha, draws, |_, c| out.push(c.density_prefix(m)))?;
    Ok(out)
}

/// Whether cells `0..m` are all 0 at time `t` in one run from all ones.
pub fn all_zero_at<S: EraseDraws + ?Sized>(m: usize, t: usize, alpha: f64, draws: &mut S) -> Result<bool> {
    let c = run_cone(m, t, alpha, draws, |_, _| {})?;
    Ok(c.cells()[..m].iter().all(|&x| x == 0))
}

/// A Monte Carlo proportion with its binomial standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
    pub samples: u64,
}

impl Estimate {
    pub fn from_hits(hits: u64, samples: u64) -> Self {
        let n = samples as f64;
        let mean = hits as f64 / n;
        let std_err = libm::sqrt(mean * (1.0 - mean) / n);
        Self { mean, std_err, samples }
    }
}

pub const MIN_REPLICAS: u64 = 100;

/// Estimates `P(x_1 = … = x_m = 0)` at time `t` under `δ_1`, drawing all
/// replicas sequentially from one stream.
pub fn prob_all_zero_estimate(m: usize, t: usize, alpha: f64, replicas: u64, rng: &mut RngStream) -> Result<Estimate> {
    if replicas < MIN_REPLICAS {
        return Err(Error::Parameter { name: "replicas", reason: "at least 100 replicas are required" });
    }
    let mut hits = 0;
    for _ in 0..replicas {
        if all_zero_at(m, t, alpha, rng)? {
            hits += 1;
        }
    }
    Ok(Estimate::from_hits(hits, replicas))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(cells: &[u8]) -> Configuration {
        Configuration::new(0, cells.to_vec()).unwrap()
    }

    #[test]
    fn d_examples() {
        assert_eq!(apply_d(&cfg(&[1, 1, 1, 1, 1])).unwrap(), cfg(&[1, 1, 1, 1]));
        assert_eq!(apply_d(&cfg(&[1, 0, 0, 1])).unwrap(), cfg(&[1, 0, 1]));
        assert_eq!(apply_d(&cfg(&[0, 0, 0])).unwrap(), cfg(&[0, 0]));
    }

    #[test]
    fn d_keeps_offset_and_exhausts() {
        let c = Configuration::new(-7, vec![0, 1]).unwrap();
        let d = apply_d(&c).unwrap();
        assert_eq!(d.offset(), -7);
        assert_eq!(d.cells(), &[1]);
        assert_eq!(apply_d(&d), Err(Error::WindowExhausted));
    }

    #[test]
    fn invalid_configurations() {
        assert!(Configuration::new(0, vec![]).is_err());
        assert!(Configuration::new(0, vec![0, 2]).is_err());
    }

    #[test]
    fn r_examples() {
        let mut rng = RngStream::new(1, 0);
        let c = cfg(&[1, 0, 1, 1, 0]);
        assert_eq!(apply_r(&c, 0.0, &mut rng).unwrap(), c);
        assert_eq!(apply_r(&cfg(&[1, 0, 1]), 1.0, &mut rng).unwrap(), cfg(&[0, 0, 0]));
        assert!(apply_r(&c, 1.5, &mut rng).is_err());
        assert!(apply_r(&c, -0.1, &mut rng).is_err());
    }

    #[test]
    fn r_surviving_fraction() {
        let mut rng = RngStream::new(2024, 3);
        let c = Configuration::all_ones(0, 100_000).unwrap();
        let out = apply_r(&c, 0.3, &mut rng).unwrap();
        let frac = out.count_ones() as f64 / 1e5;
        assert!((frac - 0.7).abs() < 0.005, "{frac}");
    }

    #[test]
    fn r_draws_once_per_one_cell() {
        let c = cfg(&[1, 0, 0, 1, 1, 0]);
        let mut seen = Vec::new();
        let mut src = |j: i64, _t: u64| {
            seen.push(j);
            0.9
        };
        apply_r_with(&c, 0.5, 1, &mut src).unwrap();
        assert_eq!(seen, vec![0, 3, 4]);
    }

    #[test]
    fn step_examples() {
        let mut rng = RngStream::new(5, 5);
        assert_eq!(stav_step(&cfg(&[0, 0, 0, 1]), 0.0, &mut rng).unwrap(), cfg(&[0, 0, 1]));
        let out = stav_step(&cfg(&[1, 1, 0, 1, 1]), 1.0, &mut rng).unwrap();
        assert_eq!(out, cfg(&[0, 0, 0, 0]));

        let start = Configuration::all_ones(0, 64).unwrap();
        let run = |seed| {
            let mut rng = RngStream::new(seed, 11);
            let mut c = start.clone();
            for _ in 0..8 {
                c = stav_step(&c, 0.1, &mut rng).unwrap();
            }
            c
        };
        assert_eq!(run(77), run(77));
        assert_ne!(run(77), run(78));
    }

    #[test]
    fn density_at_extreme_alphas() {
        let mut rng = RngStream::new(0, 0);
        let d = simulate_density(50, 30, 0.0, &mut rng).unwrap();
        assert_eq!(d.len(), 31);
        assert!(d.iter().all(|&x| x == 1.0));
        let d = simulate_density(50, 30, 1.0, &mut rng).unwrap();
        assert_eq!(d[0], 1.0);
        assert!(d[1..].iter().all(|&x| x == 0.0));
        assert!(simulate_density(0, 10, 0.5, &mut rng).is_err());
        assert!(simulate_density(10, 10, 2.0, &mut rng).is_err());
    }

    #[test]
    fn density_dies_above_upper_bracket() {
        let mut total = 0.0;
        for rep in 0..8 {
            let mut rng = RngStream::new(35, rep);
            let d = simulate_density(2000, 2000, 0.35, &mut rng).unwrap();
            total += d[2000];
        }
        assert!(total / 8.0 <= 1e-3, "{}", total / 8.0);
    }

    #[test]
    fn window_shrinks_by_one_per_step() {
        let mut rng = RngStream::new(8, 1);
        let mut lens = Vec::new();
        run_cone(5, 12, 0.4, &mut rng, |s, c| lens.push((s, c.len()))).unwrap();
        for (s, len) in lens {
            assert_eq!(len, 5 + 12 - s);
        }
    }

    #[test]
    fn all_zero_at_extreme_alphas() {
        let mut rng = RngStream::new(1, 2);
        let e = prob_all_zero_estimate(4, 10, 0.0, 200, &mut rng).unwrap();
        assert_eq!((e.mean, e.std_err), (0.0, 0.0));
        let e = prob_all_zero_estimate(4, 10, 1.0, 200, &mut rng).unwrap();
        assert_eq!((e.mean, e.std_err), (1.0, 0.0));
        assert!(prob_all_zero_estimate(4, 10, 0.5, 99, &mut rng).is_err());
    }

    #[test]
    fn all_zero_matches_exact_single_cell() {
        // One cell after one step from all ones: two 1s merge by D, then R erases with prob α.
        let mut rng = RngStream::new(12, 0);
        let e = prob_all_zero_estimate(1, 1, 0.4, 40_000, &mut rng).unwrap();
        assert!((e.mean - 0.4).abs() < 4.0 * e.std_err, "{e:?}");
    }
}
