//! The acceptance suite: every criterion is a deterministic, seeded check
//! with its tolerance pinned here. `run_all` powers both the `verify` CLI
//! command and the acceptance test target.

use crate::cutoff::AdmissibleCutoff;
use crate::dyadic::{fit_regularity, sobolev_norm, zygmund_norm, DyadicPartition, NormKind};
use crate::generate::{sobolev_series, torus_diffeo, weierstrass};
use crate::grid::{evaluate_trig, GridFunction, TorusGrid};
use crate::map::TorusMap;
use crate::paracomp::{
    functorial_defect, paracompose_alinhac, paracompose_new, paralinearize, select_n,
};
use crate::paradiff::{
    bony_composition_remainder, bony_product_remainder, paradiff_apply_lowrank, paraproduct,
    probe_operator_order, QuantizedOperator,
};
use crate::symbol::{adjoint_symbol, pullback_symbol, sharp_product, FreqFn, Symbol};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

const BASE_SEED: u64 = 7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
}

#[derive(Clone, Debug, Serialize)]
pub struct Measurement {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub direction: Direction,
    pub pass: bool,
}

impl Measurement {
    fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Measurement { name: name.into(), value, bound, direction: Direction::AtMost, pass: value <= bound }
    }

    fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Measurement { name: name.into(), value, bound, direction: Direction::AtLeast, pass: value >= bound }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    pub pass: bool,
    pub measurements: Vec<Measurement>,
}

impl CriterionResult {
    fn new(id: u32, name: &str, measurements: Vec<Measurement>) -> Self {
        let pass = measurements.iter().all(|m| m.pass);
        CriterionResult { id, name: name.into(), pass, measurements }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub version: String,
    pub seed_base: u64,
    pub pass: bool,
    pub criteria: Vec<CriterionResult>,
}

/// Partition factory honoring the corruption test hook
/// (`PARACALC_TEST_CORRUPT_PARTITION=1` breaks the sum-to-one identity so
/// the negative control can watch the suite fail).
fn partition(grid: TorusGrid) -> DyadicPartition {
    let mut part = DyadicPartition::new(grid);
    if std::env::var("PARACALC_TEST_CORRUPT_PARTITION").as_deref() == Ok("1") {
        part.corrupt_block_for_tests(1, 1.01);
    }
    part
}

/// Dense-spectrum Hoelder-type factor: coefficients `(1 + |xi|)^-(r+1)` with
/// seeded signs at every frequency, plus a mean. Unlike the lacunary
/// generators its low-frequency spectrum is dense, which the band probes
/// need on coarse grids.
fn holder_series(r: f64, grid: TorusGrid, seed: u64, mean: f64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = vec![Complex64::ZERO; grid.total()];
    coeffs[0] = Complex64::new(mean, 0.0);
    for z in 1..(grid.n() as i64 / 2) {
        let amp = (1.0 + z as f64).powf(-(r + 1.0));
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        coeffs[grid.flat_of_freq([z, 0])] = Complex64::new(sign * amp, 0.0);
        coeffs[grid.flat_of_freq([-z, 0])] = Complex64::new(sign * amp, 0.0);
    }
    GridFunction::from_coeffs(grid, coeffs).unwrap().re()
}

fn random_grid_function(grid: TorusGrid, seed: u64, decay: f64, real: bool) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = vec![Complex64::ZERO; grid.total()];
    let n = grid.n() as i64;
    for flat in 0..grid.total() {
        let xi = grid.freq(flat);
        if xi[0] == -n / 2 || xi[1] == -n / 2 {
            continue;
        }
        let r = grid.freq_norm(flat);
        let amp = (1.0 + r).powf(-decay);
        coeffs[flat] = Complex64::cis(2.0 * std::f64::consts::PI * rng.random::<f64>()) * amp;
    }
    let f = GridFunction::from_coeffs(grid, coeffs).unwrap();
    if real {
        f.re()
    } else {
        f
    }
}

fn rel_sup(diff: &GridFunction, reference: &GridFunction) -> f64 {
    diff.sup_norm() / reference.sup_norm().max(1e-300)
}

// ---------------------------------------------------------------- criteria

fn c1_exact_identities() -> CriterionResult {
    let grid = TorusGrid::new(1, 10).unwrap();
    let part = partition(grid);

    // dft round trip on 50 seeded functions
    let mut rt = 0.0f64;
    for i in 0..50u64 {
        let f = random_grid_function(grid, BASE_SEED + i, 0.3, i % 2 == 0);
        let back = crate::grid::idft(&crate::grid::dft(&f));
        rt = rt.max(rel_sup(&back.sub(&f).unwrap(), &f));
    }

    // partition of unity on several lattices
    let mut part_dev = 0.0f64;
    for j in 8..=11u32 {
        let g = TorusGrid::new(1, j).unwrap();
        let p = partition(g);
        for flat in 0..g.total() {
            let s: f64 = (0..=p.q_max()).map(|q| p.phi_at(q, flat)).sum();
            part_dev = part_dev.max((s - 1.0).abs());
        }
    }
    for j in 4..=5u32 {
        let g = TorusGrid::new(2, j).unwrap();
        let p = partition(g);
        for flat in 0..g.total() {
            let s: f64 = (0..=p.q_max()).map(|q| p.phi_at(q, flat)).sum();
            part_dev = part_dev.max((s - 1.0).abs());
        }
    }

    // paracomposition at the identity map
    let id = TorusMap::identity(grid);
    let mut ident = 0.0f64;
    for i in 0..50u64 {
        let u = random_grid_function(grid, BASE_SEED + 100 + i, 0.8, true);
        let got = paracompose_new(&u, &id, &part, Some(2)).unwrap();
        ident = ident.max(rel_sup(&got.sub(&u).unwrap(), &u));
    }

    // paralinearization residual on 50 seeded (u, chi) pairs
    let mut residual = 0.0f64;
    for i in 0..50u64 {
        let sigma = 1.0 + 0.25 * (i % 5) as f64;
        let u = if i % 2 == 0 {
            weierstrass(sigma, 7, grid, BASE_SEED + 200 + i).unwrap()
        } else {
            sobolev_series(sigma + 0.5, grid, BASE_SEED + 200 + i)
        };
        let rho = 0.3 + 0.1 * (i % 3) as f64;
        let chi = torus_diffeo(rho, 0.3, 6, grid, BASE_SEED + 300 + i).unwrap();
        let res = paralinearize(&u, &chi, &part).unwrap();
        residual = residual.max(res.residual);
    }

    CriterionResult::new(
        1,
        "exact_identities",
        vec![
            Measurement::at_most("dft_round_trip_rel", rt, 1e-12),
            Measurement::at_most("partition_sum_dev", part_dev, 1e-12),
            Measurement::at_most("paracompose_identity_rel", ident, 1e-12),
            Measurement::at_most("paralinearize_residual", residual, 1e-9),
        ],
    )
}

fn c2_estimator_ground_truth() -> CriterionResult {
    let grid = TorusGrid::new(1, 10).unwrap();
    let part = partition(grid);
    let mut ms = Vec::new();
    for (i, sigma) in [0.3, 0.5, 1.2, 2.5].into_iter().enumerate() {
        let f = weierstrass(sigma, 7, grid, BASE_SEED + i as u64).unwrap();
        let dec = part.decompose(&f).unwrap();
        let rep = fit_regularity(&dec, NormKind::Zygmund, 1, 7).unwrap();
        ms.push(Measurement::at_most(format!("weierstrass_{sigma}_err"), (rep.exponent - sigma).abs(), 0.05));
    }
    for (i, s) in [0.5, 1.5, 2.0].into_iter().enumerate() {
        let f = sobolev_series(s, grid, BASE_SEED + 10 + i as u64);
        let dec = part.decompose(&f).unwrap();
        let rep = fit_regularity(&dec, NormKind::Sobolev, 1, 7).unwrap();
        ms.push(Measurement::at_most(format!("sobolev_{s}_err"), (rep.exponent - s).abs(), 0.05));
    }
    CriterionResult::new(2, "estimator_ground_truth", ms)
}

fn c3_paracomposition_boundedness() -> CriterionResult {
    // same seeded (u, chi) pairs re-embedded exactly across grids; the
    // Zygmund side uses folded (non-invertible) maps since no
    // diffeomorphism hypothesis is needed there, the Sobolev side a
    // diffeomorphism family
    let sigma = 1.5;
    let mut worst_zyg = 1.0f64;
    let mut worst_sob = 1.0f64;
    let spread = |v: &[f64]| -> f64 {
        let mx = v.iter().cloned().fold(f64::MIN, f64::max);
        let mn = v.iter().cloned().fold(f64::MAX, f64::min);
        mx / mn
    };
    for pair in 0..5u64 {
        let g8 = TorusGrid::new(1, 8).unwrap();
        let u_z8 = weierstrass(sigma, 6, g8, BASE_SEED + pair).unwrap();
        let u_s8 = sobolev_series(sigma, g8, BASE_SEED + 20 + pair);
        let chi8 = torus_diffeo(0.5, 0.3, 5, g8, BASE_SEED + 40 + pair).unwrap();
        let folded8 = chi8.displacement()[0].scale(Complex64::new(4.0, 0.0)).re();
        let (mut zyg_ratios, mut sob_ratios) = (Vec::new(), Vec::new());
        for j in 8..=11u32 {
            let grid = TorusGrid::new(1, j).unwrap();
            let part = partition(grid);
            let folded = TorusMap::new(vec![folded8.resample(j).unwrap()]).unwrap();
            debug_assert!(!folded.is_diffeo());
            let u_z = u_z8.resample(j).unwrap();
            let star = paracompose_new(&u_z, &folded, &part, None).unwrap();
            zyg_ratios.push(zygmund_norm(&star, sigma, &part) / zygmund_norm(&u_z, sigma, &part));
            let chi = TorusMap::new(vec![chi8.displacement()[0].resample(j).unwrap()]).unwrap();
            let u_s = u_s8.resample(j).unwrap();
            let star = paracompose_new(&u_s, &chi, &part, None).unwrap();
            sob_ratios.push(sobolev_norm(&star, sigma, &part) / sobolev_norm(&u_s, sigma, &part));
        }
        worst_zyg = worst_zyg.max(spread(&zyg_ratios));
        worst_sob = worst_sob.max(spread(&sob_ratios));
    }
    CriterionResult::new(
        3,
        "boundedness_stability",
        vec![
            Measurement::at_most("zygmund_ratio_spread", worst_zyg, 2.0),
            Measurement::at_most("sobolev_ratio_spread", worst_sob, 2.0),
        ],
    )
}

fn c4_paralinearization_smoothing() -> CriterionResult {
    // J = 11 gives the remainders a clean dyadic range: slopes are fitted on
    // the asymptotic window, past the low-frequency onset and before the
    // generator truncation edge. R2 decays faster than any power law here,
    // so its window is the short one.
    let grid = TorusGrid::new(1, 11).unwrap();
    let part = partition(grid);
    let (sigma, rho, s) = (1.5, 0.5, 1.5);
    let mut ms = Vec::new();
    let mut fit_res = 0.0f64;

    // Zygmund side: u in C^{1+sigma}
    let (mut r0e, mut r1e, mut r2e) = (f64::MAX, f64::MAX, f64::MAX);
    let mut residual = 0.0f64;
    for seed in 0..3u64 {
        let u = weierstrass(1.0 + sigma, 8, grid, BASE_SEED + seed).unwrap();
        let chi = torus_diffeo(rho, 0.3, 7, grid, BASE_SEED + 50 + seed).unwrap();
        let res = paralinearize(&u, &chi, &part).unwrap();
        residual = residual.max(res.residual);
        let mut refit = |f: &GridFunction, lo: u32, hi: u32| -> f64 {
            let dec = part.decompose(f).unwrap();
            let rep = fit_regularity(&dec, NormKind::Zygmund, lo, hi).unwrap();
            fit_res = fit_res.max(rep.residual);
            rep.exponent
        };
        r0e = r0e.min(refit(&res.r0, 4, 8));
        r1e = r1e.min(refit(&res.r1, 4, 8));
        r2e = r2e.min(refit(&res.r2, 5, 7));
    }
    ms.push(Measurement::at_most("zygmund_residual", residual, 1e-9));
    ms.push(Measurement::at_least("zygmund_R0_exponent", r0e, 1.0 + rho + (1.0 + rho).min(sigma) - 0.3));
    ms.push(Measurement::at_least("zygmund_R1_exponent", r1e, 1.0 + rho + sigma - 0.3));
    ms.push(Measurement::at_least("zygmund_R2_exponent", r2e, 1.0 + rho + sigma - 0.3));

    // Sobolev side: u in H^{1+s}, diffeomorphism family
    let (mut r0e, mut r1e, mut r2e) = (f64::MAX, f64::MAX, f64::MAX);
    for seed in 0..3u64 {
        let u = sobolev_series(1.0 + s, grid, BASE_SEED + 100 + seed);
        let chi = torus_diffeo(rho, 0.3, 7, grid, BASE_SEED + 150 + seed).unwrap();
        let res = paralinearize(&u, &chi, &part).unwrap();
        let mut refit = |f: &GridFunction, lo: u32, hi: u32| -> f64 {
            let dec = part.decompose(f).unwrap();
            let rep = fit_regularity(&dec, NormKind::Sobolev, lo, hi).unwrap();
            fit_res = fit_res.max(rep.residual);
            rep.exponent
        };
        r0e = r0e.min(refit(&res.r0, 4, 7));
        r1e = r1e.min(refit(&res.r1, 4, 7));
        r2e = r2e.min(refit(&res.r2, 5, 7));
    }
    ms.push(Measurement::at_least("sobolev_R0_exponent", r0e, 1.0 + rho + (1.0 + rho).min(s - 0.5) - 0.3));
    ms.push(Measurement::at_least("sobolev_R1_exponent", r1e, 1.0 + rho + s - 0.3));
    ms.push(Measurement::at_least("sobolev_R2_exponent", r2e, 1.0 + rho + s - 0.3));
    ms.push(Measurement::at_most("fit_residual", fit_res, 0.25));
    CriterionResult::new(4, "paralinearization_smoothing", ms)
}

fn c5_alinhac_difference() -> CriterionResult {
    // J = 12 so the widened-N difference shows its power-law regime [5, 8]
    // before the generator truncation.
    let grid = TorusGrid::new(1, 12).unwrap();
    let part = partition(grid);
    let (sigma, rho) = (1.5, 0.5);
    let mut r3e = f64::MAX;
    let mut rem3e = f64::MAX;
    for seed in 0..3u64 {
        let chi = torus_diffeo(rho, 0.3, 8, grid, BASE_SEED + 50 + seed).unwrap();
        let u = weierstrass(1.0 + sigma, 9, grid, BASE_SEED + seed).unwrap();
        let star_new = paracompose_new(&u, &chi, &part, None).unwrap();
        let star_alinhac = paracompose_alinhac(&u, &chi, &part, None).unwrap();
        let r3 = star_alinhac.sub(&star_new).unwrap();
        let dec = part.decompose(&r3).unwrap();
        let rep = fit_regularity(&dec, NormKind::Zygmund, 1, part.q_max() - 1).unwrap();
        r3e = r3e.min(rep.exponent);

        // widening N by 2 changes the operator by a rho-regularizing term
        let u_mid = weierstrass(sigma, 9, grid, BASE_SEED + 80 + seed).unwrap();
        let n = select_n(&chi, &part);
        let a = paracompose_new(&u_mid, &chi, &part, Some(n)).unwrap();
        let b = paracompose_new(&u_mid, &chi, &part, Some(n + 2)).unwrap();
        let dec = part.decompose(&a.sub(&b).unwrap()).unwrap();
        let rep = fit_regularity(&dec, NormKind::Zygmund, 5, 8).unwrap();
        rem3e = rem3e.min(rep.exponent);
    }
    CriterionResult::new(
        5,
        "alinhac_difference",
        vec![
            Measurement::at_least("R3_exponent", r3e, 1.0 + rho + sigma - 0.3),
            Measurement::at_least("n_widening_exponent", rem3e, sigma + rho - 0.3),
        ],
    )
}

fn c6_symbolic_calculus() -> CriterionResult {
    let mut ms = Vec::new();

    // operator boundedness for the builtin symbol set (J = 10 direct path)
    let grid = TorusGrid::new(1, 10).unwrap();
    let part = partition(grid);
    let psi = AdmissibleCutoff::standard(&part);
    let builtins: Vec<(String, Symbol, f64)> = vec![
        ("one".into(), Symbol::multiplier(1, 0.0, 2.0, FreqFn::one()), 0.0),
        ("ixi".into(), Symbol::multiplier(1, 1.0, 2.0, FreqFn::i_xi(0)), 1.0),
        ("japanese_1".into(), Symbol::multiplier(1, 1.0, 2.0, FreqFn::japanese_pow(1.0)), 1.0),
        ("japanese_-1".into(), Symbol::multiplier(1, -1.0, 2.0, FreqFn::japanese_pow(-1.0)), -1.0),
        ("abs_0.5".into(), Symbol::multiplier(1, 0.5, 2.0, FreqFn::abs_pow(0.5)), 0.5),
        (
            "rough_times_japanese".into(),
            Symbol::rank1(
                weierstrass(2.0, 7, grid, BASE_SEED + 3).unwrap(),
                FreqFn::japanese_pow(1.0),
                1.0,
                2.0,
            ),
            1.0,
        ),
    ];
    for (name, sym, m) in &builtins {
        let op = QuantizedOperator::build(sym, &psi).unwrap();
        let probe = probe_operator_order(|u| op.apply(u), &part, BASE_SEED + 600).unwrap();
        ms.push(Measurement::at_most(format!("order_{name}"), probe.fitted_order, m + 0.2));
    }

    // composition smoothing: T_a T_b - T_{a#b} has order m + m' - rho
    let rho = 1.5;
    let ba = weierstrass(rho, 7, grid, BASE_SEED + 70).unwrap();
    let bb = weierstrass(rho, 7, grid, BASE_SEED + 71).unwrap();
    let a = Symbol::rank1(ba, FreqFn::japanese_pow(1.0), 1.0, rho);
    let b = Symbol::rank1(bb, FreqFn::japanese_pow(0.5), 0.5, rho);
    let sharp = sharp_product(&a, &b, rho).unwrap();
    let op_a = QuantizedOperator::build(&a, &psi).unwrap();
    let op_b = QuantizedOperator::build(&b, &psi).unwrap();
    let op_sharp = QuantizedOperator::build(&sharp, &psi).unwrap();
    let probe = probe_operator_order(
        |u| op_a.apply(&op_b.apply(u)?)?.sub(&op_sharp.apply(u)?),
        &part,
        BASE_SEED + 601,
    )
    .unwrap();
    ms.push(Measurement::at_most("composition_defect_order", probe.fitted_order, 1.0 + 0.5 - rho + 0.3));

    // adjoint smoothing on a J = 8 grid: T_a^t - T_{a^t} has order m - rho.
    // The spatial factor needs a dense spectrum (plus a mean) so that the
    // coarse grid's low probe bands see it at all.
    let grid8 = TorusGrid::new(1, 8).unwrap();
    let part8 = partition(grid8);
    let psi8 = AdmissibleCutoff::standard(&part8);
    let ba8 = holder_series(3.5, grid8, BASE_SEED + 72, 1.0);
    let a8 = Symbol::rank1(ba8, FreqFn::japanese_pow(1.0), 1.0, rho);
    let at8 = adjoint_symbol(&a8, rho).unwrap();
    let op_a8 = QuantizedOperator::build(&a8, &psi8).unwrap();
    let op_adj = op_a8.adjoint();
    let op_at8 = QuantizedOperator::build(&at8, &psi8).unwrap();
    let probe = probe_operator_order(
        |u| op_adj.apply(u)?.sub(&op_at8.apply(u)?),
        &part8,
        BASE_SEED + 602,
    )
    .unwrap();
    ms.push(Measurement::at_most("adjoint_defect_order", probe.fitted_order, 1.0 - rho + 0.3));

    // paraproduct with a merely-Sobolev factor: order m for a in H^{d/2 - m}
    let m_rough = 0.5;
    let a_rough = sobolev_series(0.5 - m_rough, grid, BASE_SEED + 73);
    let probe = probe_operator_order(|u| paraproduct(&a_rough, u, &part), &part, BASE_SEED + 603).unwrap();
    ms.push(Measurement::at_most("rough_paraproduct_order", probe.fitted_order, m_rough + 0.3));

    // product and linearization remainders for H^2 inputs (d = 1); block 1
    // is structurally almost empty for these remainders, so the fit starts
    // at 2
    let fa = sobolev_series(2.0, grid, BASE_SEED + 74);
    let fb = sobolev_series(2.0, grid, BASE_SEED + 75);
    let rem = bony_product_remainder(&fa, &fb, &part).unwrap();
    let dec = part.decompose(&rem).unwrap();
    let rep = fit_regularity(&dec, NormKind::Sobolev, 2, part.q_max()).unwrap();
    ms.push(Measurement::at_least("product_remainder_exponent", rep.exponent, 2.0 + 2.0 - 0.5 - 0.3));

    let rem = bony_composition_remainder(|t| t * t, |t| 2.0 * t, &fa, &part).unwrap();
    let dec = part.decompose(&rem).unwrap();
    let rep = fit_regularity(&dec, NormKind::Sobolev, 2, part.q_max()).unwrap();
    ms.push(Measurement::at_least("linearization_remainder_exponent", rep.exponent, 2.0 * 2.0 - 0.5 - 0.3));

    CriterionResult::new(6, "symbolic_calculus", ms)
}

fn c7_conjugation() -> CriterionResult {
    let grid = TorusGrid::new(1, 10).unwrap();
    let part = partition(grid);
    let psi = AdmissibleCutoff::standard(&part);
    let (m, rho_chi) = (1.0, 0.5);
    let b = weierstrass(1.5, 7, grid, BASE_SEED + 80).unwrap();
    let a = Symbol::rank1(b, FreqFn::japanese_pow(1.0), m, 1.5);
    let chi = torus_diffeo(rho_chi, 0.3, 6, grid, BASE_SEED + 81).unwrap();
    let astar = pullback_symbol(&a, &chi).unwrap();
    let op_astar = QuantizedOperator::build(&astar, &psi).unwrap();
    let n = select_n(&chi, &part);
    let probe = probe_operator_order(
        |u| {
            let t_a_u = paradiff_apply_lowrank(&a, u, &psi)?;
            let left = paracompose_new(&t_a_u, &chi, &part, Some(n))?;
            let star_u = paracompose_new(u, &chi, &part, Some(n))?;
            let right = op_astar.apply(&star_u)?;
            left.sub(&right)
        },
        &part,
        BASE_SEED + 604,
    )
    .unwrap();
    CriterionResult::new(
        7,
        "conjugation",
        vec![Measurement::at_most(
            "conjugation_defect_order",
            probe.fitted_order,
            m - rho_chi.min(1.5) + 0.3,
        )],
    )
}

fn c8_oracle_equivalence() -> CriterionResult {
    // low-rank vs direct quantization on 20 seeded cases
    let grid = TorusGrid::new(1, 9).unwrap();
    let part = partition(grid);
    let psi = AdmissibleCutoff::standard(&part);
    let mut worst = 0.0f64;
    for i in 0..20u64 {
        let b1 = weierstrass(1.0 + 0.1 * (i % 4) as f64, 6, grid, BASE_SEED + 400 + i).unwrap();
        let mut terms = vec![crate::symbol::RankTerm::new(Some(b1), FreqFn::japanese_pow(0.5))];
        if i % 2 == 0 {
            let b2 = sobolev_series(1.5, grid, BASE_SEED + 420 + i);
            terms.push(crate::symbol::RankTerm::new(Some(b2), FreqFn::japanese_pow(-0.5)));
        }
        if i % 3 == 0 {
            terms.push(crate::symbol::RankTerm::new(None, FreqFn::i_xi(0)));
        }
        let a = Symbol::from_rank_terms(1, 1.0, 1.0, terms);
        let u = random_grid_function(grid, BASE_SEED + 440 + i, 0.7, false);
        let direct = crate::paradiff::paradiff_apply_direct(&a, &u, &psi).unwrap();
        let fast = paradiff_apply_lowrank(&a, &u, &psi).unwrap();
        let rel = direct.sub(&fast).unwrap().l2_norm() / direct.l2_norm().max(1e-300);
        worst = worst.max(rel);
    }

    // band-limited evaluation against an independent direct summation
    let grid10 = TorusGrid::new(1, 10).unwrap();
    let u = weierstrass(0.8, 7, grid10, BASE_SEED + 460).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(BASE_SEED + 461);
    let pts: Vec<[f64; 2]> =
        (0..100).map(|_| [rng.random::<f64>() * grid10.length(), 0.0]).collect();
    let got = evaluate_trig(&u, &pts);
    let mut ev_err = 0.0f64;
    for (p, g) in pts.iter().zip(got.iter()) {
        // independent oracle: plain term-by-term summation with a fresh
        // sin/cos per mode
        let mut acc = Complex64::ZERO;
        for flat in 0..grid10.total() {
            let c = u.coeffs()[flat];
            if c == Complex64::ZERO {
                continue;
            }
            let xi = grid10.freq(flat)[0] as f64;
            let theta = grid10.freq_scale() * p[0] * xi;
            acc += c * Complex64::new(theta.cos(), theta.sin());
        }
        ev_err = ev_err.max((acc - g).norm());
    }
    CriterionResult::new(
        8,
        "oracle_equivalence",
        vec![
            Measurement::at_most("lowrank_vs_direct_rel", worst, 1e-10),
            Measurement::at_most("evaluate_trig_vs_direct_sum", ev_err, 1e-12),
        ],
    )
}

fn c9_functorial_property() -> CriterionResult {
    // J = 12 with small map amplitudes: the defect's asymptotic slope
    // emerges on [5, 9] past the low-frequency onset.
    let grid = TorusGrid::new(1, 12).unwrap();
    let part = partition(grid);
    let (sigma, rho) = (1.5, 0.5);
    let mut worst = f64::MAX;
    for seed in 0..3u64 {
        let u = weierstrass(sigma, 10, grid, BASE_SEED + 500 + seed).unwrap();
        let chi = torus_diffeo(rho, 0.2, 9, grid, BASE_SEED + 520 + seed).unwrap();
        let chitilde = torus_diffeo(rho, 0.15, 9, grid, BASE_SEED + 540 + seed).unwrap();
        let defect = functorial_defect(&u, &chi, &chitilde, &part).unwrap();
        let dec = part.decompose(&defect).unwrap();
        let rep = fit_regularity(&dec, NormKind::Zygmund, 5, 9).unwrap();
        worst = worst.min(rep.exponent);
    }
    CriterionResult::new(
        9,
        "functorial_property",
        vec![Measurement::at_least("defect_exponent", worst, sigma + rho - 0.3)],
    )
}

/// Run the acceptance criteria (all of them, or those whose name contains
/// `only`).
pub fn run_all(only: Option<&str>) -> VerifyReport {
    let checks: Vec<(&str, fn() -> CriterionResult)> = vec![
        ("exact_identities", c1_exact_identities),
        ("estimator_ground_truth", c2_estimator_ground_truth),
        ("boundedness_stability", c3_paracomposition_boundedness),
        ("paralinearization_smoothing", c4_paralinearization_smoothing),
        ("alinhac_difference", c5_alinhac_difference),
        ("symbolic_calculus", c6_symbolic_calculus),
        ("conjugation", c7_conjugation),
        ("oracle_equivalence", c8_oracle_equivalence),
        ("functorial_property", c9_functorial_property),
    ];
    let criteria: Vec<CriterionResult> = checks
        .into_iter()
        .filter(|(name, _)| only.map(|o| name.contains(o)).unwrap_or(true))
        .map(|(_, f)| f())
        .collect();
    let pass = !criteria.is_empty() && criteria.iter().all(|c| c.pass);
    VerifyReport { version: crate::VERSION.to_string(), seed_base: BASE_SEED, pass, criteria }
}

/// One `ok`/`FAIL` line per criterion, for terminal output.
pub fn format_report(report: &VerifyReport) -> String {
    let mut out = String::new();
    for c in &report.criteria {
        out.push_str(&format!("criterion {:>2} {:<32} {}\n", c.id, c.name, if c.pass { "ok" } else { "FAIL" }));
        for m in &c.measurements {
            if !m.pass {
                let dir = match m.direction {
                    Direction::AtMost => "<=",
                    Direction::AtLeast => ">=",
                };
                out.push_str(&format!("    {}: {} (bound {} {})\n", m.name, m.value, dir, m.bound));
            }
        }
    }
    out.push_str(if report.pass { "all criteria passed\n" } else { "FAILURES present\n" });
    out
}
