//! Periodic perturbations of the identity, `chi(x) = x + g(x)` with `g`
//! periodic, together with their spectral Jacobian and invertibility
//! metadata. Maps of this form send the torus to itself; they are the
//! discrete stand-in for changes of variables.

use crate::dyadic::DyadicPartition;
use crate::error::{CoreError, Result};
use crate::grid::{evaluate_trig, GridFunction, TorusGrid};
use std::sync::OnceLock;

#[derive(Clone, Debug)]
pub struct TorusMap {
    grid: TorusGrid,
    g: Vec<GridFunction>,
    /// dg[i][j] = d g_i / d x_j (spectral derivatives).
    dg: Vec<Vec<GridFunction>>,
    min_jac: f64,
    is_diffeo: bool,
    points: OnceLock<Vec<[f64; 2]>>,
}

impl TorusMap {
    /// Build a map from its periodic displacement, one component per axis.
    pub fn new(g: Vec<GridFunction>) -> Result<Self> {
        if g.is_empty() {
            return Err(CoreError::InvalidParameter("empty displacement".into()));
        }
        let grid = *g[0].grid();
        if g.len() != grid.d() {
            return Err(CoreError::GridMismatch(format!(
                "{} displacement components for d = {}",
                g.len(),
                grid.d()
            )));
        }
        for gi in &g {
            if gi.grid() != &grid {
                return Err(CoreError::GridMismatch("displacement components on different grids".into()));
            }
            if !gi.is_real() {
                return Err(CoreError::InvalidParameter("displacement must be real-valued".into()));
            }
        }
        let dg: Vec<Vec<GridFunction>> =
            g.iter().map(|gi| (0..grid.d()).map(|ax| gi.derivative(ax)).collect()).collect();
        let mut min_jac = f64::INFINITY;
        for flat in 0..grid.total() {
            min_jac = min_jac.min(det_at(&dg, grid.d(), flat));
        }
        let is_diffeo = min_jac > 1e-6;
        Ok(TorusMap { grid, g, dg, min_jac, is_diffeo, points: OnceLock::new() })
    }

    pub fn identity(grid: TorusGrid) -> Self {
        let g = (0..grid.d()).map(|_| GridFunction::zero(grid)).collect();
        Self::new(g).expect("identity map is always valid")
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn displacement(&self) -> &[GridFunction] {
        &self.g
    }

    pub fn jacobian_g(&self) -> &[Vec<GridFunction>] {
        &self.dg
    }

    pub fn min_jac(&self) -> f64 {
        self.min_jac
    }

    pub fn is_diffeo(&self) -> bool {
        self.is_diffeo
    }

    /// Images of the grid points, `chi(x_j)`.
    pub fn points(&self) -> &[[f64; 2]] {
        self.points.get_or_init(|| {
            (0..self.grid.total())
                .map(|flat| {
                    let mut p = self.grid.point(flat);
                    for (i, gi) in self.g.iter().enumerate() {
                        p[i] += gi.values()[flat].re;
                    }
                    p
                })
                .collect()
        })
    }

    /// Jacobian `D chi = I + D g` at a grid point.
    pub fn jacobian_at(&self, flat: usize) -> [[f64; 2]; 2] {
        let mut m = [[0.0; 2]; 2];
        for i in 0..self.grid.d() {
            for j in 0..self.grid.d() {
                m[i][j] = self.dg[i][j].values()[flat].re + if i == j { 1.0 } else { 0.0 };
            }
        }
        if self.grid.d() == 1 {
            m[1][1] = 1.0;
        }
        m
    }

    /// Inverse transpose of the Jacobian at a grid point.
    pub fn inv_transpose_at(&self, flat: usize) -> Result<[[f64; 2]; 2]> {
        let m = self.jacobian_at(flat);
        invert_transpose(m, self.grid.d())
    }

    /// `chi(p)` for an arbitrary point (band-limited interpolation of g).
    pub fn apply_point(&self, p: [f64; 2]) -> [f64; 2] {
        let mut out = p;
        for (i, gi) in self.g.iter().enumerate() {
            out[i] += gi.eval_point(p).re;
        }
        out
    }

    /// `D chi(p)` for an arbitrary point.
    pub fn jacobian_point(&self, p: [f64; 2]) -> [[f64; 2]; 2] {
        let mut m = [[0.0; 2]; 2];
        for i in 0..self.grid.d() {
            for j in 0..self.grid.d() {
                m[i][j] = self.dg[i][j].eval_point(p).re + if i == j { 1.0 } else { 0.0 };
            }
        }
        if self.grid.d() == 1 {
            m[1][1] = 1.0;
        }
        m
    }

    /// Smoothed map `x + P_{<=k} g`; equals the map itself for `k >= q_max`.
    pub fn smoothed(&self, k: u32, part: &DyadicPartition) -> TorusMap {
        if k >= part.q_max() {
            return self.clone();
        }
        let g: Vec<GridFunction> = self.g.iter().map(|gi| part.low_pass(gi, k)).collect();
        TorusMap::new(g).expect("smoothing preserves validity")
    }

    /// Composition `outer(inner(x))`: displacement
    /// `g(x) = g_in(x) + g_out(x + g_in(x))`, with `g_out` evaluated exactly
    /// off-grid and re-projected to the grid.
    pub fn compose(outer: &TorusMap, inner: &TorusMap) -> Result<TorusMap> {
        if outer.grid != inner.grid {
            return Err(CoreError::GridMismatch("composed maps live on different grids".into()));
        }
        let pts = inner.points();
        let mut g = Vec::with_capacity(outer.grid.d());
        for i in 0..outer.grid.d() {
            let outer_vals = evaluate_trig(&outer.g[i], pts);
            let vals: Vec<f64> = (0..outer.grid.total())
                .map(|flat| inner.g[i].values()[flat].re + outer_vals[flat].re)
                .collect();
            g.push(GridFunction::from_real_values(outer.grid, vals)?);
        }
        TorusMap::new(g)
    }

    /// Largest operator norm of `D chi` over the grid.
    pub fn sup_jacobian_norm(&self) -> f64 {
        (0..self.grid.total())
            .map(|flat| operator_norm(self.jacobian_at(flat), self.grid.d()))
            .fold(0.0, f64::max)
    }

    /// Largest operator norm of `(D chi)^-1` over the grid.
    pub fn sup_inverse_jacobian_norm(&self) -> Result<f64> {
        let mut out: f64 = 0.0;
        for flat in 0..self.grid.total() {
            let m = self.jacobian_at(flat);
            let det = det_at(&self.dg, self.grid.d(), flat);
            if det.abs() <= 1e-6 {
                return Err(CoreError::NotDiffeomorphism(format!("Jacobian determinant {det:.3e}")));
            }
            let inv = match self.grid.d() {
                1 => [[1.0 / m[0][0], 0.0], [0.0, 1.0]],
                _ => [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]],
            };
            out = out.max(operator_norm(inv, self.grid.d()));
        }
        Ok(out)
    }
}

fn det_at(dg: &[Vec<GridFunction>], d: usize, flat: usize) -> f64 {
    match d {
        1 => 1.0 + dg[0][0].values()[flat].re,
        _ => {
            let a = 1.0 + dg[0][0].values()[flat].re;
            let b = dg[0][1].values()[flat].re;
            let c = dg[1][0].values()[flat].re;
            let e = 1.0 + dg[1][1].values()[flat].re;
            a * e - b * c
        }
    }
}

fn invert_transpose(m: [[f64; 2]; 2], d: usize) -> Result<[[f64; 2]; 2]> {
    match d {
        1 => {
            if m[0][0].abs() <= 1e-6 {
                return Err(CoreError::NotDiffeomorphism(format!("chi' = {:.3e}", m[0][0])));
            }
            Ok([[1.0 / m[0][0], 0.0], [0.0, 1.0]])
        }
        _ => {
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            if det.abs() <= 1e-6 {
                return Err(CoreError::NotDiffeomorphism(format!("det D chi = {det:.3e}")));
            }
            // inverse transpose of [[a, b], [c, e]]
            Ok([[m[1][1] / det, -m[1][0] / det], [-m[0][1] / det, m[0][0] / det]])
        }
    }
}

/// Spectral norm of a small matrix (top-left d x d block).
pub fn operator_norm(m: [[f64; 2]; 2], d: usize) -> f64 {
    match d {
        1 => m[0][0].abs(),
        _ => {
            let frob2 = m[0][0] * m[0][0] + m[0][1] * m[0][1] + m[1][0] * m[1][0] + m[1][1] * m[1][1];
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            let disc = (frob2 * frob2 - 4.0 * det * det).max(0.0).sqrt();
            (0.5 * (frob2 + disc)).sqrt()
        }
    }
}
