//! Admissible cut-off `psi(zeta, eta)` built from the same dyadic profile as
//! the partition: `psi = sum_k P_{<=k-N0}(zeta) phi_k(eta)` with `N0 >= 3`.
//! On the lattice it is 1 for `|zeta| <= eps1 (1 + |eta|)` and 0 for
//! `|zeta| >= eps2 (1 + |eta|)` with `eps1 = 1.1 * 2^-(N0+1)`,
//! `eps2 = 1.9 * 2^(1-N0)`.

use crate::dyadic::{profile, DyadicPartition};
use crate::error::{CoreError, Result};
use crate::grid::TorusGrid;
use std::sync::OnceLock;

#[derive(Clone, Debug)]
pub struct AdmissibleCutoff {
    part: DyadicPartition,
    n0: u32,
    eps1: f64,
    eps2: f64,
    /// P_{<=k-N0} tabulated on the lattice, k = 0..=q_max (built on demand).
    shifted: OnceLock<Vec<Vec<f64>>>,
}

impl AdmissibleCutoff {
    pub fn new(part: &DyadicPartition, n0: u32) -> Result<Self> {
        if n0 < 3 {
            return Err(CoreError::InvalidParameter(format!("cutoff shift N0 must be >= 3, got {n0}")));
        }
        let eps1 = 1.1 * 2f64.powi(-(n0 as i32) - 1);
        let eps2 = 1.9 * 2f64.powi(1 - n0 as i32);
        Ok(AdmissibleCutoff { part: part.clone(), n0, eps1, eps2, shifted: OnceLock::new() })
    }

    pub fn standard(part: &DyadicPartition) -> Self {
        Self::new(part, 3).expect("N0 = 3 is admissible")
    }

    pub fn n0(&self) -> u32 {
        self.n0
    }

    pub fn eps1(&self) -> f64 {
        self.eps1
    }

    pub fn eps2(&self) -> f64 {
        self.eps2
    }

    pub fn grid(&self) -> &TorusGrid {
        self.part.grid()
    }

    pub fn partition(&self) -> &DyadicPartition {
        &self.part
    }

    /// `psi(zeta, eta)` for a centered integer frequency difference `zeta`
    /// and the lattice point with flat index `eta_flat`.
    pub fn eval(&self, zeta: [i64; 2], eta_flat: usize) -> f64 {
        let grid = self.part.grid();
        let r = match grid.d() {
            1 => zeta[0].abs() as f64,
            _ => ((zeta[0] * zeta[0] + zeta[1] * zeta[1]) as f64).sqrt(),
        };
        let mut acc = 0.0;
        for &(k, phi) in self.part.active_blocks(eta_flat) {
            acc += phi * profile(r * 2f64.powi(self.n0 as i32 - k as i32));
        }
        acc
    }

    /// Multiplier table of `P_{<=k-N0}` on the lattice (the x-part cutoff used
    /// by the factored quantization of `sum_r b_r(x) m_r(xi)` symbols).
    pub fn shifted_lowpass(&self, k: u32) -> &[f64] {
        let tables = self.shifted.get_or_init(|| {
            let grid = self.part.grid();
            (0..=self.part.q_max())
                .map(|kk| {
                    let s = 2f64.powi(self.n0 as i32 - kk as i32);
                    (0..grid.total()).map(|i| profile(grid.freq_norm(i) * s)).collect()
                })
                .collect()
        });
        &tables[k as usize]
    }
}
