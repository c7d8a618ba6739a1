//! Deterministic, seeded constructions of test functions and rough maps with
//! prescribed block decay, so every fitted exponent has a known ground truth.
//!
//! Phases are random cyclic grid shifts (aligned to a 2^8 reference grid):
//! each lacunary mode then attains its amplitude at a grid point, making the
//! advertised block norms exact on grids with J >= 8, while still exposing
//! alignment bugs.

use crate::error::{CoreError, Result};
use crate::grid::{GridFunction, TorusGrid};
use crate::map::TorusMap;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const PHASE_ALIGN_BITS: u32 = 8;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorKind {
    Weierstrass { sigma: f64, k_terms: u32 },
    SobolevSeries { s: f64 },
    Diffeo { rho: f64, eps: f64, k_terms: u32 },
    Bump { width: f64, center: Vec<f64> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeneratorSpec {
    #[serde(flatten)]
    pub kind: GeneratorKind,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn build_function(&self, grid: TorusGrid) -> Result<GridFunction> {
        match &self.kind {
            GeneratorKind::Weierstrass { sigma, k_terms } => weierstrass(*sigma, *k_terms, grid, self.seed),
            GeneratorKind::SobolevSeries { s } => Ok(sobolev_series(*s, grid, self.seed)),
            GeneratorKind::Bump { width, center } => {
                let c = [center.first().copied().unwrap_or(0.0), center.get(1).copied().unwrap_or(0.0)];
                Ok(bump(*width, c, grid))
            }
            GeneratorKind::Diffeo { .. } => {
                Err(CoreError::InvalidParameter("diffeo spec builds a map, not a function".into()))
            }
        }
    }

    pub fn build_map(&self, grid: TorusGrid) -> Result<TorusMap> {
        match &self.kind {
            GeneratorKind::Diffeo { rho, eps, k_terms } => torus_diffeo(*rho, *eps, *k_terms, grid, self.seed),
            _ => Err(CoreError::InvalidParameter("only the diffeo spec builds a map".into())),
        }
    }
}

/// Grid-aligned phase for mode 2^k: a random cyclic shift on the 2^8
/// reference grid.
fn aligned_phase(k: u32, rng: &mut ChaCha8Rng) -> f64 {
    let m = rng.random_range(0..(1u64 << PHASE_ALIGN_BITS));
    let base = 2.0 * std::f64::consts::PI * m as f64 / (1u64 << PHASE_ALIGN_BITS) as f64;
    (2f64.powi(k as i32) * base) % (2.0 * std::f64::consts::PI)
}

/// Add `amp cos(2^k x_axis + theta)` to a coefficient array.
fn add_cosine(coeffs: &mut [Complex64], grid: &TorusGrid, axis: usize, k: u32, amp: f64, theta: f64) {
    let m = 1i64 << k;
    let mut xi = [0i64; 2];
    xi[axis] = m;
    let c = Complex64::cis(theta) * (amp / 2.0);
    coeffs[grid.flat_of_freq(xi)] += c;
    xi[axis] = -m;
    coeffs[grid.flat_of_freq(xi)] += c.conj();
}

/// `sum_{k=1}^{K} 2^(-k sigma) cos(2^k x + theta_k)` with seeded aligned
/// phases (d = 2: the mean of an x-series and an independent y-series, so
/// block sup-norms stay `2^(-q sigma)`).
pub fn weierstrass(sigma: f64, k_terms: u32, grid: TorusGrid, seed: u64) -> Result<GridFunction> {
    if k_terms < 1 || k_terms > grid.j() - 2 {
        return Err(CoreError::BandOverflow(format!(
            "K = {k_terms} outside [1, {}] for J = {}",
            grid.j() - 2,
            grid.j()
        )));
    }
    if sigma <= 0.0 {
        return Err(CoreError::InvalidParameter(format!("sigma must be positive, got {sigma}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = vec![Complex64::ZERO; grid.total()];
    let axis_scale = if grid.d() == 2 { 0.5 } else { 1.0 };
    for k in 1..=k_terms {
        let amp = axis_scale * 2f64.powf(-(k as f64) * sigma);
        for axis in 0..grid.d() {
            let theta = aligned_phase(k, &mut rng);
            add_cosine(&mut coeffs, &grid, axis, k, amp, theta);
        }
    }
    let f = GridFunction::from_coeffs(grid, coeffs)?;
    Ok(f.re())
}

/// Lattice points where block q's cutoff equals 1 (positive representatives
/// only; the Hermitian mirror is added by the builder).
fn pure_zone(grid: &TorusGrid, q: u32) -> Vec<usize> {
    let lo = 1.9 * 2f64.powi(q as i32 - 1);
    let hi = if q == grid.q_max() { f64::INFINITY } else { 1.1 * 2f64.powi(q as i32) };
    let n = grid.n() as i64;
    let mut out = Vec::new();
    for flat in 0..grid.total() {
        let xi = grid.freq(flat);
        // keep one representative per +-xi pair; skip unpaired Nyquist rows
        if xi[0] == -n / 2 || xi[1] == -n / 2 {
            continue;
        }
        let positive = xi[0] > 0 || (xi[0] == 0 && xi[1] > 0);
        if !positive {
            continue;
        }
        let r = grid.freq_norm(flat);
        if r >= lo && r <= hi {
            out.push(flat);
        }
    }
    out
}

/// Random-sign series with `||u_q||_L2 = 2^(-q s)` exactly for
/// `1 <= q <= q_max` (uniform magnitude across each block's pure zone).
pub fn sobolev_series(s: f64, grid: TorusGrid, seed: u64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = vec![Complex64::ZERO; grid.total()];
    let vol = grid.length().powi(grid.d() as i32);
    for q in 1..=grid.q_max() {
        let zone = pure_zone(&grid, q);
        assert!(!zone.is_empty(), "empty pure zone at q = {q}");
        let amp = 2f64.powf(-(q as f64) * s) / (vol * 2.0 * zone.len() as f64).sqrt();
        for flat in zone {
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            let xi = grid.freq(flat);
            coeffs[flat] = Complex64::new(sign * amp, 0.0);
            coeffs[grid.flat_of_freq([-xi[0], -xi[1]])] = Complex64::new(sign * amp, 0.0);
        }
    }
    GridFunction::from_coeffs(grid, coeffs).unwrap().re()
}

/// Rough diffeomorphism `chi = x + g` with
/// `g = eps sum_{k=1}^{K} 2^(-k(1+rho)) cos(2^k x + theta_k)` per axis;
/// `D chi - I` then has exact block decay `eps 2^(-k rho)`.
pub fn torus_diffeo(rho: f64, eps: f64, k_terms: u32, grid: TorusGrid, seed: u64) -> Result<TorusMap> {
    if !(0.0..=0.4).contains(&eps) {
        return Err(CoreError::InvalidParameter(format!("eps must lie in [0, 0.4], got {eps}")));
    }
    if k_terms > grid.j().saturating_sub(3) {
        return Err(CoreError::BandOverflow(format!(
            "K = {k_terms} > J - 3 = {}",
            grid.j().saturating_sub(3)
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let axis_scale = if grid.d() == 2 { 0.5 } else { 1.0 };
    let mut g = Vec::with_capacity(grid.d());
    for _component in 0..grid.d() {
        let mut coeffs = vec![Complex64::ZERO; grid.total()];
        for k in 1..=k_terms {
            let amp = eps * axis_scale * 2f64.powf(-(k as f64) * (1.0 + rho));
            for axis in 0..grid.d() {
                let theta = aligned_phase(k, &mut rng);
                add_cosine(&mut coeffs, &grid, axis, k, amp, theta);
            }
        }
        g.push(GridFunction::from_coeffs(grid, coeffs)?.re());
    }
    // contraction check on the displacement Jacobian
    let mut sup_dg = 0.0f64;
    for gi in &g {
        for ax in 0..grid.d() {
            sup_dg = sup_dg.max(gi.derivative(ax).sup_norm() * grid.d() as f64);
        }
    }
    if sup_dg >= 0.95 {
        return Err(CoreError::NotContractive(sup_dg));
    }
    TorusMap::new(g)
}

/// Smooth periodic bump of the given width around a center.
pub fn bump(width: f64, center: [f64; 2], grid: TorusGrid) -> GridFunction {
    let l = grid.length();
    let wrap = |t: f64| -> f64 {
        let mut v = (t % l + l) % l;
        if v > l / 2.0 {
            v -= l;
        }
        v
    };
    let v: Vec<f64> = (0..grid.total())
        .map(|i| {
            let p = grid.point(i);
            let dist = match grid.d() {
                1 => wrap(p[0] - center[0]).abs(),
                _ => (wrap(p[0] - center[0]).powi(2) + wrap(p[1] - center[1]).powi(2)).sqrt(),
            };
            // reuse the partition profile shape: 1 inside, 0 outside
            crate::dyadic::profile(1.9 * dist / width.max(1e-12))
        })
        .collect();
    GridFunction::from_real_values(grid, v).unwrap()
}
