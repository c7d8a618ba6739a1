//! Uniform periodic grid, DFT contract, Fourier multipliers and exact
//! evaluation of band-limited functions at arbitrary points.
//!
//! Normalization: `coeffs(xi) = (1/2^(dJ)) * sum_j values(x_j) exp(-i x_j . xi)`,
//! so a single mode `cos(k x)` has coefficients `1/2` at `xi = +-k`.

use crate::error::{CoreError, Result};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

/// Uniform grid on the torus `[0, length)^d` with `2^J` points per axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorusGrid {
    d: usize,
    j: u32,
    length: f64,
}

impl TorusGrid {
    pub fn new(d: usize, j: u32) -> Result<Self> {
        Self::with_length(d, j, 2.0 * PI)
    }

    pub fn with_length(d: usize, j: u32, length: f64) -> Result<Self> {
        if !(d == 1 || d == 2) {
            return Err(CoreError::InvalidParameter(format!("d must be 1 or 2, got {d}")));
        }
        if j < 4 {
            return Err(CoreError::InvalidParameter(format!("need 2^J >= 16, got J = {j}")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(CoreError::InvalidParameter(format!("bad period {length}")));
        }
        Ok(TorusGrid { d, j, length })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn j(&self) -> u32 {
        self.j
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        1usize << self.j
    }

    /// Total number of grid points `2^(dJ)`.
    pub fn total(&self) -> usize {
        self.n().pow(self.d as u32)
    }

    /// Grid spacing per axis.
    pub fn h(&self) -> f64 {
        self.length / self.n() as f64
    }

    /// Factor turning an integer lattice frequency into the exponent rate:
    /// the mode is `exp(i * freq_scale * x . xi)`. Equals 1 for period 2*pi.
    pub fn freq_scale(&self) -> f64 {
        2.0 * PI / self.length
    }

    /// Top dyadic block index `J - 2`.
    pub fn q_max(&self) -> u32 {
        self.j - 2
    }

    /// Coordinates of the grid point with row-major flat index `flat`.
    /// The second component is 0 for d = 1.
    pub fn point(&self, flat: usize) -> [f64; 2] {
        let n = self.n();
        let h = self.h();
        match self.d {
            1 => [flat as f64 * h, 0.0],
            _ => [(flat / n) as f64 * h, (flat % n) as f64 * h],
        }
    }

    /// Integer lattice frequency of the coefficient at flat index `flat`
    /// (FFT layout; each component lies in `[-2^(J-1), 2^(J-1))`).
    pub fn freq(&self, flat: usize) -> [i64; 2] {
        let n = self.n();
        match self.d {
            1 => [center(flat, n), 0],
            _ => [center(flat / n, n), center(flat % n, n)],
        }
    }

    pub fn freq_norm(&self, flat: usize) -> f64 {
        let f = self.freq(flat);
        match self.d {
            1 => f[0].abs() as f64,
            _ => ((f[0] * f[0] + f[1] * f[1]) as f64).sqrt(),
        }
    }

    /// Flat coefficient index for a centered lattice frequency.
    pub fn flat_of_freq(&self, xi: [i64; 2]) -> usize {
        let n = self.n() as i64;
        let wrap = |k: i64| -> usize { (((k % n) + n) % n) as usize };
        match self.d {
            1 => wrap(xi[0]),
            _ => wrap(xi[0]) * self.n() + wrap(xi[1]),
        }
    }

    /// Wrap an integer frequency difference back onto the lattice, centered.
    pub fn wrap_freq(&self, xi: [i64; 2]) -> [i64; 2] {
        let n = self.n() as i64;
        let w = |k: i64| -> i64 {
            let m = ((k % n) + n) % n;
            if m >= n / 2 {
                m - n
            } else {
                m
            }
        };
        match self.d {
            1 => [w(xi[0]), 0],
            _ => [w(xi[0]), w(xi[1])],
        }
    }
}

fn center(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

// Shared FFT plans. Planning is cheap but not free; operators call the
// transform thousands of times on the same sizes.
fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    static PLANS: OnceLock<Mutex<HashMap<(usize, bool), Arc<dyn Fft<f64>>>>> = OnceLock::new();
    let cache = PLANS.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap();
    map.entry((n, forward))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if forward {
                planner.plan_fft_forward(n)
            } else {
                planner.plan_fft_inverse(n)
            }
        })
        .clone()
}

fn transpose(data: &mut [Complex64], n: usize) {
    for r in 0..n {
        for c in (r + 1)..n {
            data.swap(r * n + c, c * n + r);
        }
    }
}

fn fft_nd(grid: &TorusGrid, data: &mut [Complex64], forward: bool) {
    let n = grid.n();
    let fft = plan(n, forward);
    match grid.d() {
        1 => fft.process(data),
        _ => {
            for r in 0..n {
                fft.process(&mut data[r * n..(r + 1) * n]);
            }
            transpose(data, n);
            for r in 0..n {
                fft.process(&mut data[r * n..(r + 1) * n]);
            }
            transpose(data, n);
        }
    }
}

/// Samples on a [`TorusGrid`] together with lazily synchronized Fourier
/// coefficients. All operations are pure; synchronization happens at most
/// once per plane and is thread-safe.
#[derive(Clone, Debug)]
pub struct GridFunction {
    grid: TorusGrid,
    values: OnceLock<Vec<Complex64>>,
    coeffs: OnceLock<Vec<Complex64>>,
    real: OnceLock<bool>,
}

impl GridFunction {
    pub fn from_values(grid: TorusGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.total() {
            return Err(CoreError::GridMismatch(format!(
                "expected {} values, got {}",
                grid.total(),
                values.len()
            )));
        }
        let f = GridFunction { grid, values: OnceLock::new(), coeffs: OnceLock::new(), real: OnceLock::new() };
        let _ = f.values.set(values);
        Ok(f)
    }

    pub fn from_real_values(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        let v: Vec<Complex64> = values.into_iter().map(|x| Complex64::new(x, 0.0)).collect();
        let f = Self::from_values(grid, v)?;
        let _ = f.real.set(true);
        Ok(f)
    }

    pub fn from_coeffs(grid: TorusGrid, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.total() {
            return Err(CoreError::GridMismatch(format!(
                "expected {} coefficients, got {}",
                grid.total(),
                coeffs.len()
            )));
        }
        let f = GridFunction { grid, values: OnceLock::new(), coeffs: OnceLock::new(), real: OnceLock::new() };
        let _ = f.coeffs.set(coeffs);
        Ok(f)
    }

    pub fn zero(grid: TorusGrid) -> Self {
        Self::from_coeffs(grid, vec![Complex64::ZERO; grid.total()]).unwrap()
    }

    pub fn constant(grid: TorusGrid, c: Complex64) -> Self {
        let mut coeffs = vec![Complex64::ZERO; grid.total()];
        coeffs[0] = c;
        Self::from_coeffs(grid, coeffs).unwrap()
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        self.values.get_or_init(|| {
            let mut data = self.coeffs.get().expect("grid function with neither plane").clone();
            fft_nd(&self.grid, &mut data, false);
            data
        })
    }

    pub fn coeffs(&self) -> &[Complex64] {
        self.coeffs.get_or_init(|| {
            let mut data = self.values.get().expect("grid function with neither plane").clone();
            fft_nd(&self.grid, &mut data, true);
            let scale = 1.0 / self.grid.total() as f64;
            for c in data.iter_mut() {
                *c *= scale;
            }
            data
        })
    }

    /// True when the samples are real up to round-off (equivalently the
    /// coefficients are Hermitian-symmetric).
    pub fn is_real(&self) -> bool {
        *self.real.get_or_init(|| {
            if let Some(v) = self.values.get() {
                let mx = v.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
                let mi = v.iter().map(|c| c.im.abs()).fold(0.0f64, f64::max);
                mi <= 1e-12 * mx.max(1e-300)
            } else {
                let c = self.coeffs.get().expect("empty grid function");
                let mx = c.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
                let mut dev = 0.0f64;
                for flat in 0..self.grid.total() {
                    let xi = self.grid.freq(flat);
                    let mirror = self.grid.flat_of_freq([-xi[0], -xi[1]]);
                    dev = dev.max((c[flat] - c[mirror].conj()).norm());
                }
                dev <= 1e-12 * mx.max(1e-300)
            }
        })
    }

    /// Force the realness flag when the caller knows it (e.g. after a real,
    /// frequency-even multiplier); no-op if already decided.
    pub(crate) fn set_real_flag(&self, real: bool) {
        let _ = self.real.set(real);
    }

    pub fn sup_norm(&self) -> f64 {
        self.values().iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `(length^d / 2^(dJ) * sum_j |f(x_j)|^2)^(1/2)`.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.values().iter().map(|c| c.norm_sqr()).sum();
        (self.grid.length().powi(self.grid.d() as i32) * s / self.grid.total() as f64).sqrt()
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_values(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_values(other, |a, b| a - b)
    }

    pub fn pointwise_mul(&self, other: &GridFunction) -> Result<GridFunction> {
        self.zip_values(other, |a, b| a * b)
    }

    pub fn scale(&self, s: Complex64) -> GridFunction {
        if let Some(c) = self.coeffs.get() {
            GridFunction::from_coeffs(self.grid, c.iter().map(|z| z * s).collect()).unwrap()
        } else {
            GridFunction::from_values(self.grid, self.values().iter().map(|z| z * s).collect()).unwrap()
        }
    }

    pub fn conj(&self) -> GridFunction {
        GridFunction::from_values(self.grid, self.values().iter().map(|z| z.conj()).collect()).unwrap()
    }

    /// Real part, as a real-flagged function.
    pub fn re(&self) -> GridFunction {
        GridFunction::from_real_values(self.grid, self.values().iter().map(|z| z.re).collect()).unwrap()
    }

    fn zip_values<F: Fn(Complex64, Complex64) -> Complex64>(&self, other: &GridFunction, f: F) -> Result<GridFunction> {
        if self.grid != other.grid {
            return Err(CoreError::GridMismatch("operands live on different grids".into()));
        }
        let v: Vec<Complex64> =
            self.values().iter().zip(other.values().iter()).map(|(&a, &b)| f(a, b)).collect();
        GridFunction::from_values(self.grid, v)
    }

    /// Spectral partial derivative along `axis`.
    pub fn derivative(&self, axis: usize) -> GridFunction {
        let scale = self.grid.freq_scale();
        fourier_multiplier(|xi| Complex64::new(0.0, scale * xi[axis] as f64), self)
    }

    /// Re-embed onto a grid of depth `j_new >= J` (exact for band-limited
    /// functions); for `j_new < J` high frequencies are dropped.
    pub fn resample(&self, j_new: u32) -> Result<GridFunction> {
        let new_grid = TorusGrid::with_length(self.grid.d(), j_new, self.grid.length())?;
        let mut coeffs = vec![Complex64::ZERO; new_grid.total()];
        let half_new = (new_grid.n() / 2) as i64;
        for flat in 0..self.grid.total() {
            let xi = self.grid.freq(flat);
            if xi[0] >= -half_new && xi[0] < half_new && (self.grid.d() < 2 || (xi[1] >= -half_new && xi[1] < half_new)) {
                coeffs[new_grid.flat_of_freq(xi)] = self.coeffs()[flat];
            }
        }
        GridFunction::from_coeffs(new_grid, coeffs)
    }

    /// Evaluate the trigonometric polynomial at one arbitrary point.
    pub fn eval_point(&self, p: [f64; 2]) -> Complex64 {
        let runs = self.nonzero_runs();
        eval_one(&self.grid, self.coeffs(), &runs, p)
    }

    /// Contiguous runs of nonzero coefficients in centered frequency order,
    /// per row (d = 2) or for the single axis (d = 1).
    fn nonzero_runs(&self) -> Vec<(usize, i64, i64)> {
        let c = self.coeffs();
        let n = self.grid.n() as i64;
        let rows = if self.grid.d() == 1 { 1 } else { self.grid.n() };
        let mut runs = Vec::new();
        for row in 0..rows {
            let mut start: Option<i64> = None;
            for xi in -n / 2..n / 2 {
                let flat = if self.grid.d() == 1 {
                    self.grid.flat_of_freq([xi, 0])
                } else {
                    self.grid.flat_of_freq([center(row, self.grid.n()), xi])
                };
                let nz = c[flat] != Complex64::ZERO;
                match (start, nz) {
                    (None, true) => start = Some(xi),
                    (Some(s), false) => {
                        runs.push((row, s, xi - 1));
                        start = None;
                    }
                    _ => {}
                }
            }
            if let Some(s) = start {
                runs.push((row, s, n / 2 - 1));
            }
        }
        runs
    }
}

/// Ensure the Fourier coefficients are materialized and return the function.
pub fn dft(f: &GridFunction) -> GridFunction {
    let _ = f.coeffs();
    f.clone()
}

/// Ensure the grid samples are materialized and return the function.
pub fn idft(f: &GridFunction) -> GridFunction {
    let _ = f.values();
    f.clone()
}

/// Apply the Fourier multiplier `m(xi)` coefficient-wise.
pub fn fourier_multiplier<F: Fn(&[i64]) -> Complex64>(m: F, f: &GridFunction) -> GridFunction {
    let grid = *f.grid();
    let coeffs: Vec<Complex64> = (0..grid.total())
        .map(|flat| {
            let xi = grid.freq(flat);
            m(&xi[..grid.d()]) * f.coeffs()[flat]
        })
        .collect();
    GridFunction::from_coeffs(grid, coeffs).unwrap()
}

/// Apply a tabulated real multiplier (one entry per lattice point, FFT layout).
pub fn multiplier_table(table: &[f64], f: &GridFunction) -> GridFunction {
    let grid = *f.grid();
    debug_assert_eq!(table.len(), grid.total());
    let coeffs: Vec<Complex64> = f.coeffs().iter().zip(table.iter()).map(|(&c, &m)| c * m).collect();
    GridFunction::from_coeffs(grid, coeffs).unwrap()
}

const RESYNC: i64 = 32;

fn eval_one(grid: &TorusGrid, coeffs: &[Complex64], runs: &[(usize, i64, i64)], p: [f64; 2]) -> Complex64 {
    let scale = grid.freq_scale();
    match grid.d() {
        1 => {
            let theta = scale * p[0];
            let step = Complex64::cis(theta);
            let mut acc = Complex64::ZERO;
            for &(_, lo, hi) in runs {
                let mut w = Complex64::cis(theta * lo as f64);
                let mut since = 0i64;
                for xi in lo..=hi {
                    if since == RESYNC {
                        w = Complex64::cis(theta * xi as f64);
                        since = 0;
                    }
                    acc += coeffs[grid.flat_of_freq([xi, 0])] * w;
                    w *= step;
                    since += 1;
                }
            }
            acc
        }
        _ => {
            let n = grid.n();
            let t0 = scale * p[0];
            let t1 = scale * p[1];
            // per-axis phase tables over the centered lattice
            let phase = |theta: f64| -> Vec<Complex64> {
                let half = n as i64 / 2;
                let step = Complex64::cis(theta);
                let mut out = vec![Complex64::ZERO; n];
                let mut w = Complex64::cis(theta * (-half) as f64);
                let mut since = 0i64;
                for xi in -half..half {
                    if since == RESYNC {
                        w = Complex64::cis(theta * xi as f64);
                        since = 0;
                    }
                    out[(xi + half) as usize] = w;
                    w *= step;
                    since += 1;
                }
                out
            };
            let ph0 = phase(t0);
            let ph1 = phase(t1);
            let half = n as i64 / 2;
            let mut acc = Complex64::ZERO;
            for &(row, lo, hi) in runs {
                let mut row_acc = Complex64::ZERO;
                for xi in lo..=hi {
                    let flat = grid.flat_of_freq([center(row, n), xi]);
                    row_acc += coeffs[flat] * ph1[(xi + half) as usize];
                }
                acc += row_acc * ph0[(center(row, n) + half) as usize];
            }
            acc
        }
    }
}

/// Evaluate the trigonometric polynomial `sum_xi coeffs(xi) exp(i p . xi)` at
/// a list of arbitrary points. Exact for band-limited data up to round-off.
pub fn evaluate_trig(f: &GridFunction, points: &[[f64; 2]]) -> Vec<Complex64> {
    let runs = f.nonzero_runs();
    let coeffs = f.coeffs();
    let grid = f.grid();
    if points.len() >= 64 {
        points.par_iter().map(|&p| eval_one(grid, coeffs, &runs, p)).collect()
    } else {
        points.iter().map(|&p| eval_one(grid, coeffs, &runs, p)).collect()
    }
}

/// Evaluate and project back to a grid function on the same grid
/// (used for compositions `f ∘ chi` with `points = chi(x_j)`).
pub fn evaluate_to_grid(f: &GridFunction, points: &[[f64; 2]]) -> Result<GridFunction> {
    let vals = evaluate_trig(f, points);
    GridFunction::from_values(*f.grid(), vals)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid1(j: u32) -> TorusGrid {
        TorusGrid::new(1, j).unwrap()
    }

    fn cos_mode(grid: TorusGrid, k: i64) -> GridFunction {
        let v: Vec<f64> = (0..grid.total()).map(|i| (k as f64 * grid.point(i)[0]).cos()).collect();
        GridFunction::from_real_values(grid, v).unwrap()
    }

    #[test]
    fn constant_has_single_coefficient() {
        let g = grid1(6);
        let f = GridFunction::from_real_values(g, vec![1.0; g.total()]).unwrap();
        let c = f.coeffs();
        assert!((c[0] - Complex64::new(1.0, 0.0)).norm() < 1e-13);
        for i in 1..g.total() {
            assert!(c[i].norm() < 1e-13);
        }
    }

    #[test]
    fn single_mode_has_half_coefficients() {
        let g = grid1(10);
        let f = cos_mode(g, 4);
        let c = f.coeffs();
        assert!((c[g.flat_of_freq([4, 0])] - Complex64::new(0.5, 0.0)).norm() < 1e-13);
        assert!((c[g.flat_of_freq([-4, 0])] - Complex64::new(0.5, 0.0)).norm() < 1e-13);
        let rest: f64 = (0..g.total())
            .filter(|&i| i != g.flat_of_freq([4, 0]) && i != g.flat_of_freq([-4, 0]))
            .map(|i| c[i].norm())
            .fold(0.0, f64::max);
        assert!(rest < 1e-13);
    }

    #[test]
    fn round_trip_identity() {
        let g = grid1(8);
        let v: Vec<Complex64> = (0..g.total())
            .map(|i| Complex64::new(((i * 37 + 11) % 101) as f64 / 101.0, ((i * 53 + 7) % 89) as f64 / 89.0))
            .collect();
        let f = GridFunction::from_values(g, v.clone()).unwrap();
        let back = idft(&dft(&f));
        let err = back
            .values()
            .iter()
            .zip(v.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        let mx = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(err <= 1e-12 * mx, "round trip error {err}");
    }

    #[test]
    fn spectral_derivative_of_cosine() {
        let g = grid1(10);
        let f = cos_mode(g, 4);
        let df = f.derivative(0);
        for i in 0..g.total() {
            let x = g.point(i)[0];
            let expect = -4.0 * (4.0 * x).sin();
            assert!((df.values()[i].re - expect).abs() < 1e-11);
            assert!(df.values()[i].im.abs() < 1e-11);
        }
    }

    #[test]
    fn sharp_projector_keeps_low_mode() {
        let g = grid1(10);
        let f = cos_mode(g, 4).add(&cos_mode(g, 32)).unwrap();
        let low = fourier_multiplier(
            |xi| {
                if xi[0].abs() <= 4 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::ZERO
                }
            },
            &f,
        );
        let want = cos_mode(g, 4);
        let err = low
            .values()
            .iter()
            .zip(want.values().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn evaluate_trig_closed_form_and_grid_consistency() {
        let g = grid1(8);
        let f = cos_mode(g, 8);
        // cos(8 * pi/16) = cos(pi/2) = 0
        let v = evaluate_trig(&f, &[[PI / 16.0, 0.0]]);
        assert!(v[0].norm() < 1e-13);
        // agreement with samples at grid points
        let pts: Vec<[f64; 2]> = (0..g.total()).map(|i| g.point(i)).collect();
        let at_grid = evaluate_trig(&f, &pts);
        let err = at_grid
            .iter()
            .zip(f.values().iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err <= 1e-12);
    }

    #[test]
    fn parseval() {
        let g = grid1(7);
        let v: Vec<Complex64> =
            (0..g.total()).map(|i| Complex64::new(((i * 29 + 3) % 97) as f64 / 97.0 - 0.5, 0.0)).collect();
        let f = GridFunction::from_values(g, v).unwrap();
        let grid_side: f64 = f.values().iter().map(|c| c.norm_sqr()).sum::<f64>() / g.total() as f64;
        let coeff_side: f64 = f.coeffs().iter().map(|c| c.norm_sqr()).sum();
        assert!((grid_side - coeff_side).abs() <= 1e-12 * grid_side.max(1e-300));
    }

    #[test]
    fn two_dimensional_round_trip_and_derivative() {
        let g = TorusGrid::new(2, 5).unwrap();
        let v: Vec<f64> = (0..g.total())
            .map(|i| {
                let p = g.point(i);
                (3.0 * p[0]).cos() * (2.0 * p[1]).sin()
            })
            .collect();
        let f = GridFunction::from_real_values(g, v.clone()).unwrap();
        let back = idft(&dft(&f));
        let err = back
            .values()
            .iter()
            .zip(v.iter())
            .map(|(a, b)| (a.re - b).abs().max(a.im.abs()))
            .fold(0.0, f64::max);
        assert!(err < 1e-12);
        let dy = f.derivative(1);
        for i in 0..g.total() {
            let p = g.point(i);
            let expect = 2.0 * (3.0 * p[0]).cos() * (2.0 * p[1]).cos();
            assert!((dy.values()[i].re - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn resample_is_exact_for_band_limited() {
        let g = grid1(6);
        let f = cos_mode(g, 5);
        let fine = f.resample(8).unwrap();
        let gf = *fine.grid();
        for i in 0..gf.total() {
            let x = gf.point(i)[0];
            assert!((fine.values()[i].re - (5.0 * x).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn real_flag_detection() {
        let g = grid1(5);
        let f = cos_mode(g, 3);
        assert!(f.is_real());
        let h = fourier_multiplier(|xi| Complex64::new(0.0, xi[0] as f64), &f);
        // i*xi multiplier of a real function is real (odd imaginary symbol)
        assert!(h.is_real());
        let c = GridFunction::from_values(g, vec![Complex64::new(0.0, 1.0); g.total()]).unwrap();
        assert!(!c.is_real());
    }
}
