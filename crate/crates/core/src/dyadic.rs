//! Dyadic partition of unity on the discrete frequency lattice, block
//! decomposition, Zygmund/Sobolev norms and block-decay regularity fits.

use crate::error::{CoreError, Result};
use crate::grid::{multiplier_table, GridFunction, TorusGrid};
use serde::{Deserialize, Serialize};

/// Smooth radial profile: 1 on `|xi| <= 1.1`, 0 on `|xi| >= 1.9`, monotone
/// in between (built from the standard exp(-1/t) mollifier).
pub fn profile(r: f64) -> f64 {
    let t = (r - 1.1) / 0.8;
    1.0 - smooth_step(t)
}

fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

/// The family `{ P_0, phi_q, P_{<=k} }` of frequency cutoffs tabulated on the
/// lattice of a fixed grid. Blocks `1 <= q < q_max` are supported in the dyadic
/// ring `2^(q-1) <= |xi| <= 2^(q+1)`; the top block absorbs the tail so the
/// partition sums to one exactly on the lattice.
#[derive(Clone, Debug)]
pub struct DyadicPartition {
    grid: TorusGrid,
    q_max: u32,
    /// p_le[k][flat] = P_{<=k}(xi); p_le[q_max] is identically 1.
    p_le: Vec<Vec<f64>>,
    /// phi[q][flat]; phi[0] = P_0, phi[q] = P_{<=q} - P_{<=q-1}.
    phi: Vec<Vec<f64>>,
    /// blocks with phi_q(xi) != 0 at each lattice point (at most two).
    active: Vec<Vec<(u32, f64)>>,
}

impl DyadicPartition {
    pub fn new(grid: TorusGrid) -> Self {
        let q_max = grid.q_max();
        let total = grid.total();
        let mut p_le: Vec<Vec<f64>> = Vec::with_capacity(q_max as usize + 1);
        for k in 0..q_max {
            let scale = (1u64 << k) as f64;
            let tab: Vec<f64> = (0..total).map(|i| profile(grid.freq_norm(i) / scale)).collect();
            p_le.push(tab);
        }
        p_le.push(vec![1.0; total]);
        let mut phi = Vec::with_capacity(q_max as usize + 1);
        phi.push(p_le[0].clone());
        for q in 1..=q_max as usize {
            let tab: Vec<f64> = (0..total).map(|i| p_le[q][i] - p_le[q - 1][i]).collect();
            phi.push(tab);
        }
        let mut active = vec![Vec::new(); total];
        for (q, tab) in phi.iter().enumerate() {
            for (i, &v) in tab.iter().enumerate() {
                if v != 0.0 {
                    active[i].push((q as u32, v));
                }
            }
        }
        DyadicPartition { grid, q_max, p_le, phi, active }
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn q_max(&self) -> u32 {
        self.q_max
    }

    pub fn phi_table(&self, q: u32) -> &[f64] {
        &self.phi[q as usize]
    }

    /// phi_q at a lattice point.
    pub fn phi_at(&self, q: u32, flat: usize) -> f64 {
        self.phi[q as usize][flat]
    }

    /// Blocks whose cutoff is nonzero at a lattice point.
    pub fn active_blocks(&self, flat: usize) -> &[(u32, f64)] {
        &self.active[flat]
    }

    /// `P_{<=k}` as a scalar evaluated at an arbitrary radius (not tabulated);
    /// negative `k` rescales the same profile upward.
    pub fn p_le_scalar(&self, k: i64, radius: f64) -> f64 {
        profile(radius * 2f64.powi(-k as i32))
    }

    /// Low-pass `P_{<=k} f`; returns `f` exactly for `k >= q_max`.
    pub fn low_pass(&self, f: &GridFunction, k: u32) -> GridFunction {
        if k >= self.q_max {
            return f.clone();
        }
        let out = multiplier_table(&self.p_le[k as usize], f);
        out.set_real_flag(f.is_real()); // the table is real and even in xi
        out
    }

    /// Low-pass allowing a negative index (zero function).
    pub fn low_pass_i(&self, f: &GridFunction, k: i64) -> GridFunction {
        if k < 0 {
            GridFunction::zero(*f.grid())
        } else {
            self.low_pass(f, k.min(self.q_max as i64) as u32)
        }
    }

    /// Block `u_q = phi_q(D) f`.
    pub fn block(&self, f: &GridFunction, q: u32) -> GridFunction {
        let out = multiplier_table(&self.phi[q as usize], f);
        out.set_real_flag(f.is_real());
        out
    }

    /// `(P_{<=hi} - P_{<=lo-1}) f` with saturation at both ends.
    pub fn band_sum(&self, f: &GridFunction, lo: i64, hi: i64) -> GridFunction {
        let hi_tab = |i: usize| -> f64 {
            if hi >= self.q_max as i64 {
                1.0
            } else if hi < 0 {
                0.0
            } else {
                self.p_le[hi as usize][i]
            }
        };
        let lo_tab = |i: usize| -> f64 {
            if lo - 1 >= self.q_max as i64 {
                1.0
            } else if lo - 1 < 0 {
                0.0
            } else {
                self.p_le[(lo - 1) as usize][i]
            }
        };
        let table: Vec<f64> = (0..self.grid.total()).map(|i| hi_tab(i) - lo_tab(i)).collect();
        let out = multiplier_table(&table, f);
        out.set_real_flag(f.is_real());
        out
    }

    pub fn decompose(&self, f: &GridFunction) -> Result<BlockDecomposition> {
        if f.grid() != &self.grid {
            return Err(CoreError::GridMismatch("function grid differs from partition grid".into()));
        }
        let blocks: Vec<GridFunction> = (0..=self.q_max).map(|q| self.block(f, q)).collect();
        let sup_norms: Vec<f64> = blocks.iter().map(|b| b.sup_norm()).collect();
        let l2_norms: Vec<f64> = blocks.iter().map(|b| b.l2_norm()).collect();
        Ok(BlockDecomposition { source: f.clone(), blocks, sup_norms, l2_norms })
    }

    /// Test hook: scale one block of the tabulated partition, breaking the
    /// sum-to-one identity. Used by the negative control in `verify`.
    #[doc(hidden)]
    pub fn corrupt_block_for_tests(&mut self, q: u32, factor: f64) {
        for v in self.phi[q as usize].iter_mut() {
            *v *= factor;
        }
    }
}

/// Littlewood-Paley pieces of one function with their per-block norms.
#[derive(Clone, Debug)]
pub struct BlockDecomposition {
    pub source: GridFunction,
    pub blocks: Vec<GridFunction>,
    pub sup_norms: Vec<f64>,
    pub l2_norms: Vec<f64>,
}

impl BlockDecomposition {
    pub fn q_max(&self) -> u32 {
        self.blocks.len() as u32 - 1
    }

    /// Sum of the blocks (reconstruction).
    pub fn reconstruct(&self) -> GridFunction {
        let mut acc = self.blocks[0].clone();
        for b in &self.blocks[1..] {
            acc = acc.add(b).expect("blocks share a grid");
        }
        acc
    }

    pub fn norm(&self, kind: NormKind, q: u32) -> f64 {
        match kind {
            NormKind::Zygmund => self.sup_norms[q as usize],
            NormKind::Sobolev => self.l2_norms[q as usize],
        }
    }
}

/// `sup_q 2^(q r) ||u_q||_inf`.
pub fn zygmund_norm(f: &GridFunction, r: f64, part: &DyadicPartition) -> f64 {
    let dec = part.decompose(f).expect("grid mismatch in zygmund_norm");
    dec.sup_norms
        .iter()
        .enumerate()
        .map(|(q, &s)| 2f64.powf(q as f64 * r) * s)
        .fold(0.0, f64::max)
}

/// `(sum_q 2^(2 q s) ||u_q||_L2^2)^(1/2)`.
pub fn sobolev_norm(f: &GridFunction, s: f64, part: &DyadicPartition) -> f64 {
    let dec = part.decompose(f).expect("grid mismatch in sobolev_norm");
    dec.l2_norms
        .iter()
        .enumerate()
        .map(|(q, &l)| 4f64.powf(q as f64 * s) * l * l)
        .sum::<f64>()
        .sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    Zygmund,
    Sobolev,
}

impl std::fmt::Display for NormKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NormKind::Zygmund => write!(f, "zygmund"),
            NormKind::Sobolev => write!(f, "sobolev"),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct BlockNorms {
    pub q: u32,
    pub sup: f64,
    pub l2: f64,
}

/// Fitted block-decay exponent. The estimator is a least-squares fit of
/// `log2(block norm)` against `q`; it is documented as unreliable for
/// exponents with magnitude below 0.1 where the block characterization
/// degenerates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RegularityReport {
    pub exponent: f64,
    pub norm_kind: NormKind,
    pub fit_range: [u32; 2],
    pub residual: f64,
    pub degenerate: bool,
    pub blocks: Vec<BlockNorms>,
    #[serde(skip)]
    pub per_block_lognorms: Vec<(u32, f64)>,
}

/// Least-squares fit of block decay over `q in [q_min, q_max_fit]`.
/// Blocks below `1e-13 x` the largest block norm in range are excluded;
/// fewer than 3 usable blocks is an error (the input is numerically a
/// finite sum of low modes).
pub fn fit_regularity(
    dec: &BlockDecomposition,
    kind: NormKind,
    q_min: u32,
    q_max_fit: u32,
) -> Result<RegularityReport> {
    if q_min >= q_max_fit || q_max_fit > dec.q_max() {
        return Err(CoreError::InvalidParameter(format!(
            "fit range [{q_min}, {q_max_fit}] invalid for q_max = {}",
            dec.q_max()
        )));
    }
    let norms: Vec<(u32, f64)> = (q_min..=q_max_fit).map(|q| (q, dec.norm(kind, q))).collect();
    let max_norm = norms.iter().map(|&(_, v)| v).fold(0.0, f64::max);
    let usable: Vec<(u32, f64)> =
        norms.iter().copied().filter(|&(_, v)| v > 1e-13 * max_norm && v > 0.0).collect();
    if usable.len() < 3 {
        return Err(CoreError::DegenerateSpectrum(format!(
            "{} usable blocks in [{q_min}, {q_max_fit}]",
            usable.len()
        )));
    }
    let pts: Vec<(f64, f64)> = usable.iter().map(|&(q, v)| (q as f64, v.log2())).collect();
    let (slope, intercept) = least_squares(&pts);
    let residual = (pts
        .iter()
        .map(|&(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum::<f64>()
        / pts.len() as f64)
        .sqrt();
    let blocks: Vec<BlockNorms> = (0..=dec.q_max())
        .map(|q| BlockNorms { q, sup: dec.sup_norms[q as usize], l2: dec.l2_norms[q as usize] })
        .collect();
    Ok(RegularityReport {
        exponent: -slope,
        norm_kind: kind,
        fit_range: [q_min, q_max_fit],
        residual,
        degenerate: false,
        blocks,
        per_block_lognorms: usable.iter().map(|&(q, v)| (q, v.log2())).collect(),
    })
}

/// Ordinary least squares y = slope x + intercept.
pub fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    let slope = if denom.abs() < 1e-300 { 0.0 } else { (n * sxy - sx * sy) / denom };
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridFunction;
    use num_complex::Complex64;

    fn grid1(j: u32) -> TorusGrid {
        TorusGrid::new(1, j).unwrap()
    }

    fn cos_mode(grid: TorusGrid, k: i64, amp: f64) -> GridFunction {
        let v: Vec<f64> =
            (0..grid.total()).map(|i| amp * (k as f64 * grid.point(i)[0]).cos()).collect();
        GridFunction::from_real_values(grid, v).unwrap()
    }

    #[test]
    fn partition_sums_to_one_on_lattice() {
        for j in [4u32, 6, 10] {
            let g = grid1(j);
            let part = DyadicPartition::new(g);
            for i in 0..g.total() {
                let s: f64 = (0..=part.q_max()).map(|q| part.phi_at(q, i)).sum();
                assert!((s - 1.0).abs() < 1e-12, "J={j} flat={i}: sum={s}");
            }
        }
        let g2 = TorusGrid::new(2, 5).unwrap();
        let part = DyadicPartition::new(g2);
        for i in 0..g2.total() {
            let s: f64 = (0..=part.q_max()).map(|q| part.phi_at(q, i)).sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn block_support_and_peak() {
        let g = grid1(10);
        let part = DyadicPartition::new(g);
        for q in 1..part.q_max() {
            for i in 0..g.total() {
                let r = g.freq_norm(i);
                let v = part.phi_at(q, i);
                assert!((0.0..=1.0 + 1e-15).contains(&v));
                if v != 0.0 {
                    let lo = 2f64.powi(q as i32 - 1);
                    let hi = 2f64.powi(q as i32 + 1);
                    assert!(r >= lo && r <= hi, "q={q} |xi|={r} phi={v}");
                }
            }
            let at_peak = part.phi_at(q, g.flat_of_freq([1 << q, 0]));
            assert!((at_peak - 1.0).abs() < 1e-15, "phi_{q}(2^{q}) = {at_peak}");
        }
    }

    #[test]
    fn decompose_single_mode_lands_in_one_block() {
        let g = grid1(10);
        let part = DyadicPartition::new(g);
        let f = cos_mode(g, 4, 1.0);
        let dec = part.decompose(&f).unwrap();
        for q in 0..=part.q_max() {
            if q == 2 {
                let err = dec.blocks[2]
                    .values()
                    .iter()
                    .zip(f.values())
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max);
                assert!(err < 1e-12);
            } else {
                assert!(dec.sup_norms[q as usize] < 1e-13, "q={q}");
            }
        }
    }

    #[test]
    fn decompose_constant_lands_in_block_zero() {
        let g = grid1(8);
        let part = DyadicPartition::new(g);
        let f = GridFunction::constant(g, Complex64::new(1.0, 0.0));
        let dec = part.decompose(&f).unwrap();
        assert!((dec.sup_norms[0] - 1.0).abs() < 1e-13);
        for q in 1..=part.q_max() {
            assert!(dec.sup_norms[q as usize] < 1e-13);
        }
    }

    #[test]
    fn lacunary_sum_block_norms() {
        // f = sum_{k=0}^{7} 2^(-k/2) cos(2^k x); oracle: each block 1 <= q <= 7
        // is exactly its own mode
        let g = grid1(10);
        let part = DyadicPartition::new(g);
        let mut f = cos_mode(g, 1, 1.0);
        for k in 1..=7u32 {
            f = f.add(&cos_mode(g, 1 << k, 2f64.powf(-(k as f64) / 2.0))).unwrap();
        }
        let dec = part.decompose(&f).unwrap();
        for q in 1..=7u32 {
            let want = cos_mode(g, 1 << q, 2f64.powf(-(q as f64) / 2.0));
            let err = dec.blocks[q as usize]
                .values()
                .iter()
                .zip(want.values())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-12, "q={q} err={err}");
            assert!((dec.sup_norms[q as usize] - 2f64.powf(-(q as f64) / 2.0)).abs() < 1e-12);
        }
        // reconstruction
        let back = dec.reconstruct();
        let err = back
            .values()
            .iter()
            .zip(f.values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err <= 1e-12 * f.sup_norm());
    }

    #[test]
    fn low_pass_examples() {
        let g = grid1(10);
        let part = DyadicPartition::new(g);
        let f = cos_mode(g, 32, 1.0);
        // P_{<=2}(32) = 0 since 32 > 1.9 * 4
        assert!(part.low_pass(&f, 2).sup_norm() < 1e-13);
        // full-band low-pass returns the function exactly
        let h = cos_mode(g, 1, 1.0).add(&cos_mode(g, 64, 1.0)).unwrap();
        let full = part.low_pass(&h, part.q_max());
        let err = full
            .values()
            .iter()
            .zip(h.values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err == 0.0);
        // band separation
        let low = part.low_pass(&h, 3);
        let want = cos_mode(g, 1, 1.0);
        let err = low
            .values()
            .iter()
            .zip(want.values())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn zygmund_norm_examples() {
        let g = grid1(10);
        let part = DyadicPartition::new(g);
        let f = cos_mode(g, 4, 1.0);
        assert!((zygmund_norm(&f, 1.0, &part) - 4.0).abs() < 1e-12);
        let zero = GridFunction::zero(g);
        assert_eq!(zygmund_norm(&zero, 1.0, &part), 0.0);
    }

    #[test]
    fn sobolev_norm_examples() {
        let g = grid1(10);
        let part = DyadicPartition::new(g);
        let f = cos_mode(g, 4, 1.0);
        // ||cos 4x||_{L2[0,2pi)}^2 = pi, block q = 2, weight 2^(2*2*1)
        let want = 4.0 * std::f64::consts::PI.sqrt();
        assert!((sobolev_norm(&f, 1.0, &part) - want).abs() < 1e-10);
        assert_eq!(sobolev_norm(&GridFunction::zero(g), 1.0, &part), 0.0);
    }

    #[test]
    fn sobolev_zero_index_is_l2_parseval_on_pure_blocks() {
        // |xi|^-2 series restricted to frequencies where some phi_q is
        // exactly 1; there the s = 0 block norm is the Parseval L2 norm
        let g = grid1(8);
        let part = DyadicPartition::new(g);
        let mut coeffs = vec![Complex64::ZERO; g.total()];
        for xi in 1..(g.n() as i64 / 2) {
            let flat = g.flat_of_freq([xi, 0]);
            if !(0..=part.q_max()).any(|q| part.phi_at(q, flat) == 1.0) {
                continue;
            }
            let c = Complex64::new(1.0 / (xi * xi) as f64, 0.0);
            coeffs[flat] = c;
            coeffs[g.flat_of_freq([-xi, 0])] = c;
        }
        let f = GridFunction::from_coeffs(g, coeffs).unwrap();
        let got = sobolev_norm(&f, 0.0, &part);
        assert!((got - f.l2_norm()).abs() <= 1e-10 * got.max(1e-300));
    }

    #[test]
    fn sobolev_zero_index_is_equivalent_to_l2_in_general() {
        // with mass in the overlap regions the two norms agree only up to
        // the partition overlap factor, bounded below by 1/sqrt(2)
        let g = grid1(8);
        let part = DyadicPartition::new(g);
        let mut coeffs = vec![Complex64::ZERO; g.total()];
        for xi in 1..(g.n() as i64 / 2) {
            let c = Complex64::new(1.0 / (xi * xi) as f64, 0.0);
            coeffs[g.flat_of_freq([xi, 0])] = c;
            coeffs[g.flat_of_freq([-xi, 0])] = c;
        }
        let f = GridFunction::from_coeffs(g, coeffs).unwrap();
        let got = sobolev_norm(&f, 0.0, &part);
        let l2 = f.l2_norm();
        assert!(got <= l2 * (1.0 + 1e-12));
        assert!(got >= l2 / 2f64.sqrt() * (1.0 - 1e-12));
    }

    #[test]
    fn fit_recovers_lacunary_decay() {
        let g = grid1(11);
        let part = DyadicPartition::new(g);
        let mut f = cos_mode(g, 2, 2f64.powf(-0.5));
        for k in 2..=8u32 {
            f = f.add(&cos_mode(g, 1 << k, 2f64.powf(-(k as f64) * 0.5))).unwrap();
        }
        let dec = part.decompose(&f).unwrap();
        let rep = fit_regularity(&dec, NormKind::Zygmund, 1, 8).unwrap();
        assert!((rep.exponent - 0.5).abs() < 0.01, "exponent {}", rep.exponent);
        assert!(rep.residual < 1e-6);
        assert!(!rep.degenerate);
    }

    #[test]
    fn fit_rejects_single_block() {
        let g = grid1(10);
        let part = DyadicPartition::new(g);
        let f = cos_mode(g, 16, 1.0);
        let dec = part.decompose(&f).unwrap();
        match fit_regularity(&dec, NormKind::Zygmund, 1, 7) {
            Err(CoreError::DegenerateSpectrum(_)) => {}
            other => panic!("expected DegenerateSpectrum, got {other:?}"),
        }
    }

    #[test]
    fn fit_rejects_zero_function() {
        let g = grid1(8);
        let part = DyadicPartition::new(g);
        let dec = part.decompose(&GridFunction::zero(g)).unwrap();
        assert!(matches!(
            fit_regularity(&dec, NormKind::Zygmund, 1, 5),
            Err(CoreError::DegenerateSpectrum(_))
        ));
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let part = DyadicPartition::new(grid1(8));
        let f = cos_mode(grid1(9), 4, 1.0);
        assert!(matches!(part.decompose(&f), Err(CoreError::GridMismatch(_))));
    }

    #[test]
    fn zygmund_monotone_in_r_for_high_blocks() {
        let g = grid1(10);
        let part = DyadicPartition::new(g);
        let f = cos_mode(g, 8, 1.0).add(&cos_mode(g, 64, 0.25)).unwrap();
        let mut prev = 0.0;
        for i in 0..20 {
            let r = 0.1 * i as f64;
            let v = zygmund_norm(&f, r, &part);
            assert!(v >= prev - 1e-12);
            prev = v;
        }
    }
}
