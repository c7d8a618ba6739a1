//! Quantization of symbols into operators: paraproducts, the reference
//! double-sum quantization, the factored fast path for rank-decomposed
//! symbols, operator-order probing and the product/composition remainders.

use crate::cutoff::AdmissibleCutoff;
use crate::dyadic::{least_squares, DyadicPartition};
use crate::error::{CoreError, Result};
use crate::grid::{fourier_multiplier, multiplier_table, GridFunction};
use crate::symbol::Symbol;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Largest lattice size accepted by the direct quantization.
pub const DIRECT_LIMIT: usize = 4096;

/// Paraproduct `T_a u = sum_{k>=1} P_{<=k-1} a . u_k` (pointwise products).
pub fn paraproduct(a: &GridFunction, u: &GridFunction, part: &DyadicPartition) -> Result<GridFunction> {
    if a.grid() != u.grid() || a.grid() != part.grid() {
        return Err(CoreError::GridMismatch("paraproduct operands on different grids".into()));
    }
    let mut acc = GridFunction::zero(*u.grid());
    for k in 1..=part.q_max() {
        let low = part.low_pass(a, k - 1);
        let blk = part.block(u, k);
        acc = acc.add(&low.pointwise_mul(&blk)?)?;
    }
    Ok(acc)
}

/// The assembled Fourier-side matrix of `T_a`:
/// `out(xi) = sum_eta psi(xi - eta, eta) F_x a(xi - eta, eta) u_hat(eta)`
/// with the difference wrapped on the lattice. This is the correctness
/// oracle for every fast path; building it costs O(N^2).
pub struct QuantizedOperator {
    grid: crate::grid::TorusGrid,
    /// row-major: `mat[xi_flat * total + eta_flat]`
    mat: Vec<Complex64>,
}

impl QuantizedOperator {
    pub fn build(a: &Symbol, psi: &AdmissibleCutoff) -> Result<Self> {
        let grid = *psi.grid();
        let total = grid.total();
        if total > DIRECT_LIMIT {
            return Err(CoreError::GridTooLarge { points: total, limit: DIRECT_LIMIT });
        }
        let tab = a.tabulate(&grid)?;
        let mut mat = vec![Complex64::ZERO; total * total];
        for eta_flat in 0..total {
            let col = GridFunction::from_values(grid, tab[eta_flat * total..(eta_flat + 1) * total].to_vec())?;
            let ahat = col.coeffs();
            let eta = grid.freq(eta_flat);
            for xi_flat in 0..total {
                let xi = grid.freq(xi_flat);
                let zeta = grid.wrap_freq([xi[0] - eta[0], xi[1] - eta[1]]);
                let p = psi.eval(zeta, eta_flat);
                if p != 0.0 {
                    mat[xi_flat * total + eta_flat] = p * ahat[grid.flat_of_freq(zeta)];
                }
            }
        }
        Ok(QuantizedOperator { grid, mat })
    }

    pub fn apply(&self, u: &GridFunction) -> Result<GridFunction> {
        if u.grid() != &self.grid {
            return Err(CoreError::GridMismatch("operand grid differs from operator grid".into()));
        }
        let total = self.grid.total();
        let uc = u.coeffs();
        let mut out = vec![Complex64::ZERO; total];
        for (xi_flat, o) in out.iter_mut().enumerate() {
            let row = &self.mat[xi_flat * total..(xi_flat + 1) * total];
            let mut acc = Complex64::ZERO;
            for (m, c) in row.iter().zip(uc.iter()) {
                acc += m * c;
            }
            *o = acc;
        }
        GridFunction::from_coeffs(self.grid, out)
    }

    /// Fourier-side matrix entry (output frequency `i`, input frequency `j`).
    pub fn mat_entry(&self, i: usize, j: usize) -> Complex64 {
        self.mat[i * self.grid.total() + j]
    }

    /// Exact discrete adjoint with respect to the grid inner product
    /// (conjugate transpose of the assembled matrix).
    pub fn adjoint(&self) -> QuantizedOperator {
        let total = self.grid.total();
        let mut mat = vec![Complex64::ZERO; total * total];
        for i in 0..total {
            for j in 0..total {
                mat[i * total + j] = self.mat[j * total + i].conj();
            }
        }
        QuantizedOperator { grid: self.grid, mat }
    }
}

/// Reference quantization (O(N^2), guarded by [`DIRECT_LIMIT`]).
pub fn paradiff_apply_direct(a: &Symbol, u: &GridFunction, psi: &AdmissibleCutoff) -> Result<GridFunction> {
    QuantizedOperator::build(a, psi)?.apply(u)
}

/// Fast path for `a(x, xi) = sum_r b_r(x) m_r(xi)`: per rank, multiply by
/// `m_r(D)` then run the shifted paraproduct `sum_k P_{<=k-N0} b_r . (.)_k`.
/// Algebraically identical to the direct double sum.
pub fn paradiff_apply_lowrank(a: &Symbol, u: &GridFunction, psi: &AdmissibleCutoff) -> Result<GridFunction> {
    let terms = a.rank_terms().ok_or(CoreError::NoRankDecomposition)?;
    let part = psi.partition();
    if u.grid() != part.grid() {
        return Err(CoreError::GridMismatch("operand grid differs from cutoff grid".into()));
    }
    let mut acc = GridFunction::zero(*u.grid());
    for t in terms {
        let v = fourier_multiplier(
            |xi| {
                let z = [xi[0] as f64, if xi.len() > 1 { xi[1] as f64 } else { 0.0 }];
                t.m.value(&z[..u.grid().d()])
            },
            u,
        );
        for k in 0..=part.q_max() {
            let vk = part.block(&v, k);
            let piece = match &t.b {
                Some(b) => multiplier_table(psi.shifted_lowpass(k), b).pointwise_mul(&vk)?,
                None => vk,
            };
            acc = acc.add(&piece)?;
        }
    }
    Ok(acc)
}

/// Measured order of a linear operator: least-squares slope of the log2
/// L2-gain on random band-localized probes.
#[derive(Clone, Debug)]
pub struct OrderProbeResult {
    /// NaN when fewer than 4 bands were usable.
    pub fitted_order: f64,
    pub per_band_gains: Vec<(u32, f64)>,
    /// RMS fit error; NaN for a degenerate fit.
    pub fit_residual: f64,
    pub degenerate: bool,
    pub seed: u64,
}

/// Random unit-L2 probe supported where `phi_j` is exactly 1.
pub fn band_probe(part: &DyadicPartition, j: u32, rng: &mut ChaCha8Rng) -> GridFunction {
    let grid = part.grid();
    let support: Vec<usize> =
        (0..grid.total()).filter(|&flat| part.phi_at(j, flat) == 1.0).collect();
    assert!(!support.is_empty(), "band {j} has an empty pure zone");
    let amp = 1.0 / (grid.length().powi(grid.d() as i32) * support.len() as f64).sqrt();
    let mut coeffs = vec![Complex64::ZERO; grid.total()];
    for &flat in &support {
        let phase = 2.0 * std::f64::consts::PI * rng.random::<f64>();
        coeffs[flat] = Complex64::cis(phase) * amp;
    }
    GridFunction::from_coeffs(*grid, coeffs).unwrap()
}

fn random_function(part: &DyadicPartition, rng: &mut ChaCha8Rng) -> GridFunction {
    let grid = part.grid();
    let coeffs: Vec<Complex64> = (0..grid.total())
        .map(|flat| {
            let r = grid.freq_norm(flat);
            let amp = 1.0 / (1.0 + r * r);
            Complex64::cis(2.0 * std::f64::consts::PI * rng.random::<f64>()) * amp
        })
        .collect();
    GridFunction::from_coeffs(*grid, coeffs).unwrap()
}

/// Probe the operator order of `t` on bands `j in [2, q_max - 1]`.
/// `t` must be linear (checked on random pairs to 1e-8).
pub fn probe_operator_order<T>(t: T, part: &DyadicPartition, seed: u64) -> Result<OrderProbeResult>
where
    T: Fn(&GridFunction) -> Result<GridFunction>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // linearity check
    for _ in 0..3 {
        let f = random_function(part, &mut rng);
        let g = random_function(part, &mut rng);
        let alpha = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        let beta = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        let combined = t(&f.scale(alpha).add(&g.scale(beta))?)?;
        let split = t(&f)?.scale(alpha).add(&t(&g)?.scale(beta))?;
        let diff = combined.sub(&split)?.l2_norm();
        let denom = combined.l2_norm() + split.l2_norm() + 1e-300;
        if diff / denom > 1e-8 {
            return Err(CoreError::NonlinearOperator(diff / denom));
        }
    }
    let mut gains = Vec::new();
    let mut usable = Vec::new();
    for j in 2..part.q_max() {
        let probe = band_probe(part, j, &mut rng);
        let out_norm = t(&probe)?.l2_norm();
        if out_norm <= 1e-13 {
            continue; // annihilated band, excluded from the fit
        }
        let gain = out_norm.log2();
        gains.push((j, gain));
        usable.push((j as f64, gain));
    }
    if usable.len() < 4 {
        return Ok(OrderProbeResult {
            fitted_order: f64::NAN,
            per_band_gains: gains,
            fit_residual: f64::NAN,
            degenerate: true,
            seed,
        });
    }
    let (slope, intercept) = least_squares(&usable);
    let residual = (usable
        .iter()
        .map(|&(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum::<f64>()
        / usable.len() as f64)
        .sqrt();
    Ok(OrderProbeResult {
        fitted_order: slope,
        per_band_gains: gains,
        fit_residual: residual,
        degenerate: false,
        seed,
    })
}

/// `a b - T_a b - T_b a` (the product remainder).
pub fn bony_product_remainder(a: &GridFunction, b: &GridFunction, part: &DyadicPartition) -> Result<GridFunction> {
    let prod = a.pointwise_mul(b)?;
    let tab = paraproduct(a, b, part)?;
    let tba = paraproduct(b, a, part)?;
    prod.sub(&tab)?.sub(&tba)
}

/// `F(a) - F(0) - T_{F'(a)} a` (the linearization remainder). `F` and its
/// derivative act pointwise on the (real) samples of `a`.
pub fn bony_composition_remainder<F, G>(f: F, fp: G, a: &GridFunction, part: &DyadicPartition) -> Result<GridFunction>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    let grid = *a.grid();
    let f0 = f(0.0);
    let fa: Vec<f64> = a.values().iter().map(|v| f(v.re) - f0).collect();
    let fpa: Vec<f64> = a.values().iter().map(|v| fp(v.re)).collect();
    let fa = GridFunction::from_real_values(grid, fa)?;
    let fpa = GridFunction::from_real_values(grid, fpa)?;
    fa.sub(&paraproduct(&fpa, a, part)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TorusGrid;
    use crate::symbol::FreqFn;

    fn setup(j: u32) -> (TorusGrid, DyadicPartition, AdmissibleCutoff) {
        let g = TorusGrid::new(1, j).unwrap();
        let part = DyadicPartition::new(g);
        let psi = AdmissibleCutoff::standard(&part);
        (g, part, psi)
    }

    fn cos_fn(grid: TorusGrid, k: i64, amp: f64) -> GridFunction {
        let v: Vec<f64> =
            (0..grid.total()).map(|i| amp * (k as f64 * grid.point(i)[0]).cos()).collect();
        GridFunction::from_real_values(grid, v).unwrap()
    }

    fn rel_sup(a: &GridFunction, b: &GridFunction) -> f64 {
        let d = a.sub(b).unwrap().sup_norm();
        d / b.sup_norm().max(1e-300)
    }

    #[test]
    fn paraproduct_low_frequency_factor_passes_through() {
        let (g, part, _) = setup(10);
        let a = cos_fn(g, 1, 1.0);
        let u = cos_fn(g, 32, 1.0);
        let got = paraproduct(&a, &u, &part).unwrap();
        let want = a.pointwise_mul(&u).unwrap();
        assert!(rel_sup(&got, &want) < 1e-12);
    }

    #[test]
    fn paraproduct_high_frequency_factor_dies() {
        let (g, part, _) = setup(10);
        let a = cos_fn(g, 32, 1.0);
        let u = cos_fn(g, 1, 1.0);
        let got = paraproduct(&a, &u, &part).unwrap();
        assert!(got.sup_norm() < 1e-13);
    }

    #[test]
    fn paraproduct_of_constant_drops_block_zero() {
        let (g, part, _) = setup(9);
        let a = GridFunction::constant(g, Complex64::new(1.0, 0.0));
        let u = cos_fn(g, 1, 0.7).add(&cos_fn(g, 9, 1.3)).unwrap().add(&cos_fn(g, 70, 0.4)).unwrap();
        let got = paraproduct(&a, &u, &part).unwrap();
        let u0 = part.block(&u, 0);
        let want = u.sub(&u0).unwrap();
        assert!(rel_sup(&got, &want) < 1e-12);
    }

    #[test]
    fn direct_quantization_of_one_is_identity() {
        let (g, _, psi) = setup(7);
        let a = Symbol::multiplier(1, 0.0, 1.0, FreqFn::one());
        let u = cos_fn(g, 5, 1.0).add(&cos_fn(g, 23, 0.3)).unwrap();
        let got = paradiff_apply_direct(&a, &u, &psi).unwrap();
        assert!(rel_sup(&got, &u) < 1e-12);
    }

    #[test]
    fn direct_quantization_of_multiplier_is_multiplier() {
        let (g, _, psi) = setup(7);
        let a = Symbol::multiplier(1, 1.0, 1.0, FreqFn::japanese_pow(1.0));
        let u = cos_fn(g, 5, 1.0).add(&cos_fn(g, 23, 0.3)).unwrap();
        let got = paradiff_apply_direct(&a, &u, &psi).unwrap();
        let want = fourier_multiplier(
            |xi| Complex64::new((1.0 + (xi[0] * xi[0]) as f64).sqrt(), 0.0),
            &u,
        );
        assert!(rel_sup(&got, &want) < 1e-12);
    }

    #[test]
    fn direct_quantization_matches_paraproduct_away_from_band_edges() {
        let (g, part, psi) = setup(10);
        let a_fn = cos_fn(g, 1, 1.0);
        let a = Symbol::x_function(a_fn.clone(), 1.0);
        let u = cos_fn(g, 32, 1.0);
        let got = paradiff_apply_direct(&a, &u, &psi).unwrap();
        let want = paraproduct(&a_fn, &u, &part).unwrap();
        assert!(rel_sup(&got, &want) < 1e-10);
    }

    #[test]
    fn lowrank_agrees_with_direct() {
        let (g, _, psi) = setup(9);
        let b = cos_fn(g, 1, 1.0).add(&cos_fn(g, 3, 0.4)).unwrap();
        let a = Symbol::rank1(b, FreqFn::japanese_pow(0.5), 0.5, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let part = DyadicPartition::new(g);
        let u = random_function(&part, &mut rng);
        let direct = paradiff_apply_direct(&a, &u, &psi).unwrap();
        let fast = paradiff_apply_lowrank(&a, &u, &psi).unwrap();
        let rel = direct.sub(&fast).unwrap().l2_norm() / direct.l2_norm().max(1e-300);
        assert!(rel < 1e-10, "rel = {rel:.3e}");
    }

    #[test]
    fn lowrank_trivial_cases() {
        let (g, _, psi) = setup(7);
        let a = Symbol::multiplier(1, 0.0, 1.0, FreqFn::one());
        let u = cos_fn(g, 9, 1.0);
        let got = paradiff_apply_lowrank(&a, &u, &psi).unwrap();
        assert!(rel_sup(&got, &u) < 1e-12);
        let z = GridFunction::zero(g);
        let got = paradiff_apply_lowrank(&a, &z, &psi).unwrap();
        assert!(got.sup_norm() == 0.0);
        // no rank decomposition
        let opaque = Symbol::from_closure(
            1,
            0.0,
            1.0,
            std::sync::Arc::new(|_x: &[f64], _xi: &[f64]| Complex64::new(1.0, 0.0)),
            std::collections::BTreeMap::new(),
        );
        assert!(matches!(
            paradiff_apply_lowrank(&opaque, &u, &psi),
            Err(CoreError::NoRankDecomposition)
        ));
    }

    #[test]
    fn direct_guardrail() {
        let g = TorusGrid::new(1, 13).unwrap();
        let part = DyadicPartition::new(g);
        let psi = AdmissibleCutoff::standard(&part);
        let a = Symbol::multiplier(1, 0.0, 1.0, FreqFn::one());
        let u = GridFunction::zero(g);
        assert!(matches!(
            paradiff_apply_direct(&a, &u, &psi),
            Err(CoreError::GridTooLarge { .. })
        ));
    }

    #[test]
    fn probe_identity_has_order_zero() {
        let (_, part, _) = setup(10);
        let r = probe_operator_order(|u| Ok(u.clone()), &part, 4242).unwrap();
        assert!(!r.degenerate);
        assert!(r.fitted_order.abs() <= 0.02, "order {}", r.fitted_order);
    }

    #[test]
    fn probe_bessel_multiplier_has_order_one() {
        let (_, part, _) = setup(10);
        let r = probe_operator_order(
            |u| {
                Ok(fourier_multiplier(
                    |xi| Complex64::new((1.0 + (xi[0] * xi[0]) as f64).sqrt(), 0.0),
                    u,
                ))
            },
            &part,
            4242,
        )
        .unwrap();
        assert!((r.fitted_order - 1.0).abs() <= 0.05, "order {}", r.fitted_order);
    }

    #[test]
    fn probe_low_pass_reports_degenerate_fit() {
        let (_, part, _) = setup(10);
        let part2 = part.clone();
        let r = probe_operator_order(|u| Ok(part2.low_pass(u, 3)), &part, 4242).unwrap();
        assert!(r.degenerate);
        assert!(r.fitted_order.is_nan());
        assert!(r.per_band_gains.len() < 4);
    }

    #[test]
    fn probe_rejects_nonlinear_operator() {
        let (_, part, _) = setup(8);
        let r = probe_operator_order(
            |u| {
                let v: Vec<Complex64> = u.values().iter().map(|c| c * c.norm()).collect();
                GridFunction::from_values(*u.grid(), v)
            },
            &part,
            7,
        );
        assert!(matches!(r, Err(CoreError::NonlinearOperator(_))));
    }

    #[test]
    fn two_dimensional_lowrank_agrees_with_direct() {
        let g = TorusGrid::new(2, 5).unwrap();
        let part = DyadicPartition::new(g);
        let psi = AdmissibleCutoff::standard(&part);
        let bv: Vec<f64> = (0..g.total())
            .map(|i| {
                let p = g.point(i);
                1.0 + 0.4 * p[0].cos() + 0.3 * (2.0 * p[1]).sin()
            })
            .collect();
        let b = GridFunction::from_real_values(g, bv).unwrap();
        let a = Symbol::rank1(b, FreqFn::japanese_pow(1.0), 1.0, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_function(&part, &mut rng);
        let direct = paradiff_apply_direct(&a, &u, &psi).unwrap();
        let fast = paradiff_apply_lowrank(&a, &u, &psi).unwrap();
        let rel = direct.sub(&fast).unwrap().l2_norm() / direct.l2_norm().max(1e-300);
        assert!(rel < 1e-10, "rel = {rel:.3e}");
    }

    #[test]
    fn plain_quantization_of_regularized_symbol_is_the_operator() {
        // op(sigma^psi_a) = T_a: quantizing the regularized symbol WITHOUT
        // a cutoff reproduces the cutoff quantization of the original
        let (g, _, psi) = setup(6);
        let bv: Vec<f64> = (0..g.total())
            .map(|i| {
                let x = g.point(i)[0];
                1.0 + x.cos() + 0.5 * (5.0 * x).sin() + 0.2 * (13.0 * x).cos()
            })
            .collect();
        let a = Symbol::rank1(
            GridFunction::from_real_values(g, bv).unwrap(),
            FreqFn::japanese_pow(1.0),
            1.0,
            1.5,
        );
        let sigma = crate::symbol::regularized_symbol(&a, &psi).unwrap();
        let u = cos_fn(g, 3, 1.0).add(&cos_fn(g, 17, 0.6)).unwrap();
        let want = paradiff_apply_direct(&a, &u, &psi).unwrap();
        // test-local plain double sum, no cutoff factor
        let total = g.total();
        let tab = sigma.tabulate(&g).unwrap();
        let mut out = vec![Complex64::ZERO; total];
        for eta_flat in 0..total {
            let col = GridFunction::from_values(g, tab[eta_flat * total..(eta_flat + 1) * total].to_vec()).unwrap();
            let shat = col.coeffs();
            let eta = g.freq(eta_flat);
            let uc = u.coeffs()[eta_flat];
            for (xi_flat, o) in out.iter_mut().enumerate() {
                let xi = g.freq(xi_flat);
                let zeta = g.wrap_freq([xi[0] - eta[0], xi[1] - eta[1]]);
                *o += shat[g.flat_of_freq(zeta)] * uc;
            }
        }
        let got = GridFunction::from_coeffs(g, out).unwrap();
        let rel = got.sub(&want).unwrap().l2_norm() / want.l2_norm();
        assert!(rel <= 1e-10, "rel {rel:.3e}");
    }

    #[test]
    fn adjoint_of_multiplier_is_conjugate_multiplier() {
        let (g, _, psi) = setup(6);
        let a = Symbol::multiplier(1, 1.0, 1.0, FreqFn::i_xi(0));
        let op = QuantizedOperator::build(&a, &psi).unwrap();
        let adj = op.adjoint();
        let u = cos_fn(g, 5, 1.0);
        let got = adj.apply(&u).unwrap();
        let want = fourier_multiplier(|xi| Complex64::new(0.0, -(xi[0] as f64)), &u);
        assert!(rel_sup(&got, &want) < 1e-11);
    }

    #[test]
    fn bony_remainder_trivial_cases() {
        let (g, part, _) = setup(10);
        // low (x) high: computed blocks collapse, remainder vanishes
        let a = cos_fn(g, 1, 1.0);
        let b = cos_fn(g, 32, 1.0);
        let r = bony_product_remainder(&a, &b, &part).unwrap();
        assert!(r.sup_norm() < 1e-12);
        // constants: both paraproducts vanish, remainder carries the product
        let one = GridFunction::constant(g, Complex64::new(1.0, 0.0));
        let r = bony_product_remainder(&one, &one, &part).unwrap();
        assert!((r.sup_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bony_linearization_trivial_cases() {
        let (g, part, _) = setup(9);
        // F = identity: remainder is the block-zero part of a
        let a = cos_fn(g, 1, 0.8).add(&cos_fn(g, 20, 0.5)).unwrap();
        let r = bony_composition_remainder(|t| t, |_| 1.0, &a, &part).unwrap();
        let want = part.block(&a, 0);
        assert!(rel_sup(&r, &want) < 1e-10);
        // a = 0
        let z = GridFunction::zero(g);
        let r = bony_composition_remainder(|t| t * t, |t| 2.0 * t, &z, &part).unwrap();
        assert!(r.sup_norm() == 0.0);
    }
}
