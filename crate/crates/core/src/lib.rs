//! Numerical toolkit for dyadic frequency analysis on the periodic grid:
//! Littlewood-Paley blocks, paradifferential quantization, paracomposition
//! and block-decay regularity estimation, together with the seeded
//! generators and the verification suite that exercise them.

pub mod cutoff;
pub mod dyadic;
pub mod error;
pub mod generate;
pub mod grid;
pub mod io;
pub mod map;
pub mod paracomp;
pub mod paradiff;
pub mod quadrature;
pub mod symbol;
pub mod verify;

pub use cutoff::AdmissibleCutoff;
pub use dyadic::{
    fit_regularity, sobolev_norm, zygmund_norm, BlockDecomposition, DyadicPartition, NormKind,
    RegularityReport,
};
pub use error::{CoreError, Result};
pub use grid::{dft, evaluate_trig, fourier_multiplier, idft, GridFunction, TorusGrid};
pub use map::TorusMap;
pub use paracomp::{
    conjugation_defect, functorial_defect, paracompose_alinhac, paracompose_new, paralinearize,
    select_n, select_n_tilde, ParalinearizationResult,
};
pub use paradiff::{
    bony_composition_remainder, bony_product_remainder, paradiff_apply_direct,
    paradiff_apply_lowrank, paraproduct, probe_operator_order, OrderProbeResult, QuantizedOperator,
};
pub use symbol::{adjoint_symbol, pullback_symbol, regularized_symbol, seminorm, FreqFn, Symbol};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Cap the global thread pool from `PARACALC_THREADS` (callers invoke this
/// once at startup; repeated calls after the pool exists are no-ops).
pub fn init_threads() {
    if let Ok(v) = std::env::var("PARACALC_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}
