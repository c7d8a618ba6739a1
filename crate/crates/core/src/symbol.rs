//! Symbols `a(x, xi)` with limited spatial regularity: evaluation,
//! seminorms, and the derived symbols (sharp product, adjoint, pull-back,
//! regularization).

use crate::cutoff::AdmissibleCutoff;
use crate::error::{CoreError, Result};
use crate::grid::{evaluate_trig, GridFunction, TorusGrid};
use crate::map::TorusMap;
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::sync::Arc;

pub type SpaceFreqFn = Arc<dyn Fn(&[f64], &[f64]) -> Complex64 + Send + Sync>;
pub type FreqEval = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;

/// Multi-index over at most two axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct MIdx(pub [u8; 2]);

impl MIdx {
    pub fn zero() -> Self {
        MIdx([0, 0])
    }

    pub fn total(&self) -> u8 {
        self.0[0] + self.0[1]
    }

    pub fn factorial(&self) -> f64 {
        let f = |k: u8| -> f64 { (1..=k as u64).product::<u64>().max(1) as f64 };
        f(self.0[0]) * f(self.0[1])
    }
}

/// All multi-indices over `d` axes with total order at most `max_total`.
pub fn multi_indices(d: usize, max_total: u8) -> Vec<MIdx> {
    let mut out = Vec::new();
    for t in 0..=max_total {
        for a0 in 0..=t {
            let a1 = t - a0;
            if d == 1 && a1 > 0 {
                continue;
            }
            out.push(MIdx([a0, a1]));
        }
    }
    out
}

/// `1 / (i^|alpha| alpha!)`.
pub fn calculus_coeff(alpha: MIdx) -> Complex64 {
    let minus_i = Complex64::new(0.0, -1.0);
    minus_i.powu(alpha.total() as u32) / alpha.factorial()
}

/// A frequency multiplier with optional analytic derivatives (closed-form
/// evaluation at arbitrary real frequencies).
#[derive(Clone)]
pub struct FreqFn {
    evals: BTreeMap<MIdx, FreqEval>,
}

impl FreqFn {
    pub fn new(f: FreqEval) -> Self {
        let mut evals = BTreeMap::new();
        evals.insert(MIdx::zero(), f);
        FreqFn { evals }
    }

    pub fn with_deriv(mut self, alpha: MIdx, f: FreqEval) -> Self {
        self.evals.insert(alpha, f);
        self
    }

    pub fn value(&self, xi: &[f64]) -> Complex64 {
        (self.evals[&MIdx::zero()])(xi)
    }

    pub fn deriv_fn(&self, alpha: MIdx) -> Option<FreqEval> {
        self.evals.get(&alpha).cloned()
    }

    pub fn has_deriv(&self, alpha: MIdx) -> bool {
        self.evals.contains_key(&alpha)
    }

    /// Pointwise product scaled by a constant. First derivatives follow the
    /// Leibniz rule when both factors expose them; higher orders are dropped.
    pub fn product(a: &FreqFn, b: &FreqFn, scale: Complex64) -> FreqFn {
        let (fa, fb) = (a.deriv_fn(MIdx::zero()).unwrap(), b.deriv_fn(MIdx::zero()).unwrap());
        let (fa2, fb2) = (fa.clone(), fb.clone());
        let mut out = FreqFn::new(Arc::new(move |xi: &[f64]| scale * fa2(xi) * fb2(xi)));
        for axis in 0..2usize {
            let mut alpha = MIdx::zero();
            alpha.0[axis] = 1;
            if let (Some(da), Some(db)) = (a.deriv_fn(alpha), b.deriv_fn(alpha)) {
                let (fa3, fb3) = (fa.clone(), fb.clone());
                out = out.with_deriv(
                    alpha,
                    Arc::new(move |xi: &[f64]| scale * (da(xi) * fb3(xi) + fa3(xi) * db(xi))),
                );
            }
        }
        out
    }

    pub fn conj(&self) -> FreqFn {
        let evals = self
            .evals
            .iter()
            .map(|(&k, f)| {
                let f = f.clone();
                let g: FreqEval = Arc::new(move |xi: &[f64]| f(xi).conj());
                (k, g)
            })
            .collect();
        FreqFn { evals }
    }

    /// `scale * conj(d^alpha m)` together with every derivative the parent
    /// still exposes above `alpha` (so derived symbols keep enough structure
    /// for a further round of calculus).
    pub fn shifted_conj(&self, alpha: MIdx, scale: Complex64) -> Option<FreqFn> {
        let mut evals = BTreeMap::new();
        for (&k, f) in &self.evals {
            if k.0[0] >= alpha.0[0] && k.0[1] >= alpha.0[1] {
                let beta = MIdx([k.0[0] - alpha.0[0], k.0[1] - alpha.0[1]]);
                let f = f.clone();
                let g: FreqEval = Arc::new(move |xi: &[f64]| scale * f(xi).conj());
                evals.insert(beta, g);
            }
        }
        if !evals.contains_key(&MIdx::zero()) {
            return None;
        }
        Some(FreqFn { evals })
    }

    pub fn one() -> FreqFn {
        let mut f = FreqFn::new(Arc::new(|_: &[f64]| Complex64::new(1.0, 0.0)));
        for alpha in multi_indices(2, 2).into_iter().skip(1) {
            f = f.with_deriv(alpha, Arc::new(|_: &[f64]| Complex64::ZERO));
        }
        f
    }

    /// `i xi_axis`.
    pub fn i_xi(axis: usize) -> FreqFn {
        let mut f = FreqFn::new(Arc::new(move |xi: &[f64]| Complex64::new(0.0, xi[axis])));
        for alpha in multi_indices(2, 2).into_iter().skip(1) {
            let val = if alpha.total() == 1 && alpha.0[axis] == 1 {
                Complex64::new(0.0, 1.0)
            } else {
                Complex64::ZERO
            };
            f = f.with_deriv(alpha, Arc::new(move |_: &[f64]| val));
        }
        f
    }

    /// `|xi|^p` (p > 0; value 0 at the origin).
    pub fn abs_pow(p: f64) -> FreqFn {
        let norm = |xi: &[f64]| -> f64 { xi.iter().map(|v| v * v).sum::<f64>().sqrt() };
        let mut f = FreqFn::new(Arc::new(move |xi: &[f64]| {
            let r = norm(xi);
            Complex64::new(if r == 0.0 { 0.0 } else { r.powf(p) }, 0.0)
        }));
        for alpha in multi_indices(2, 2).into_iter().skip(1) {
            let g: FreqEval = Arc::new(move |xi: &[f64]| {
                let r = norm(xi);
                if r == 0.0 {
                    return Complex64::ZERO;
                }
                let get = |i: usize| if i < xi.len() { xi[i] } else { 0.0 };
                let v = match (alpha.0[0], alpha.0[1]) {
                    (1, 0) => p * get(0) * r.powf(p - 2.0),
                    (0, 1) => p * get(1) * r.powf(p - 2.0),
                    (2, 0) => p * (r.powf(p - 2.0) + (p - 2.0) * get(0) * get(0) * r.powf(p - 4.0)),
                    (0, 2) => p * (r.powf(p - 2.0) + (p - 2.0) * get(1) * get(1) * r.powf(p - 4.0)),
                    (1, 1) => p * (p - 2.0) * get(0) * get(1) * r.powf(p - 4.0),
                    _ => 0.0,
                };
                Complex64::new(v, 0.0)
            });
            f = f.with_deriv(alpha, g);
        }
        f
    }

    /// `(1 + |xi|^2)^(p/2)`.
    pub fn japanese_pow(p: f64) -> FreqFn {
        let w = |xi: &[f64]| -> f64 { 1.0 + xi.iter().map(|v| v * v).sum::<f64>() };
        let mut f = FreqFn::new(Arc::new(move |xi: &[f64]| Complex64::new(w(xi).powf(p / 2.0), 0.0)));
        for alpha in multi_indices(2, 2).into_iter().skip(1) {
            let g: FreqEval = Arc::new(move |xi: &[f64]| {
                let ww = w(xi);
                let get = |i: usize| if i < xi.len() { xi[i] } else { 0.0 };
                let v = match (alpha.0[0], alpha.0[1]) {
                    (1, 0) => p * get(0) * ww.powf(p / 2.0 - 1.0),
                    (0, 1) => p * get(1) * ww.powf(p / 2.0 - 1.0),
                    (2, 0) => p * ww.powf(p / 2.0 - 1.0) + p * (p - 2.0) * get(0) * get(0) * ww.powf(p / 2.0 - 2.0),
                    (0, 2) => p * ww.powf(p / 2.0 - 1.0) + p * (p - 2.0) * get(1) * get(1) * ww.powf(p / 2.0 - 2.0),
                    (1, 1) => p * (p - 2.0) * get(0) * get(1) * ww.powf(p / 2.0 - 2.0),
                    _ => 0.0,
                };
                Complex64::new(v, 0.0)
            });
            f = f.with_deriv(alpha, g);
        }
        f
    }
}

/// One separated term `b(x) m(xi)` of a rank decomposition; `b = None`
/// stands for the constant 1.
#[derive(Clone)]
pub struct RankTerm {
    pub b: Option<Arc<GridFunction>>,
    pub m: FreqFn,
    b_derivs: BTreeMap<MIdx, Arc<GridFunction>>,
}

impl RankTerm {
    pub fn new(b: Option<GridFunction>, m: FreqFn) -> Self {
        let b = b.map(Arc::new);
        let mut b_derivs = BTreeMap::new();
        if let Some(ref bf) = b {
            let d = bf.grid().d();
            for alpha in multi_indices(d, 2) {
                if alpha.total() == 0 {
                    b_derivs.insert(alpha, bf.clone());
                    continue;
                }
                let mut g: GridFunction = (**bf).clone();
                for axis in 0..d {
                    for _ in 0..alpha.0[axis] {
                        g = g.derivative(axis);
                    }
                }
                b_derivs.insert(alpha, Arc::new(g));
            }
        }
        RankTerm { b, m, b_derivs }
    }

    pub fn b_deriv(&self, alpha: MIdx) -> Option<&Arc<GridFunction>> {
        self.b_derivs.get(&alpha)
    }

    fn x_value_point(&self, alpha: MIdx, x: &[f64]) -> Complex64 {
        match self.b_derivs.get(&alpha) {
            Some(g) => g.eval_point([x[0], if x.len() > 1 { x[1] } else { 0.0 }]),
            None => {
                if alpha.total() == 0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::ZERO
                }
            }
        }
    }
}

#[derive(Clone)]
enum Backend {
    Generic {
        eval: SpaceFreqFn,
        derivs: Arc<BTreeMap<(MIdx, MIdx), SpaceFreqFn>>,
    },
    Rank(Vec<RankTerm>),
    Tabulated {
        grid: TorusGrid,
        /// lattice-major: `table[xi_flat * total + x_flat]`
        table: Arc<Vec<Complex64>>,
    },
    Pullback {
        base: Arc<Symbol>,
        chi: Arc<TorusMap>,
        pre: Arc<PullbackPre>,
    },
}

struct PullbackPre {
    chi_pts: Vec<[f64; 2]>,
    inv_t: Vec<[[f64; 2]; 2]>,
    /// base rank terms' x-parts composed with chi, evaluated at grid points
    b_at_chi: Option<Vec<Vec<Complex64>>>,
}

/// A symbol `a(x, xi)` of declared order `m` and spatial regularity `rho`.
#[derive(Clone)]
pub struct Symbol {
    d: usize,
    pub order: f64,
    pub rho: f64,
    /// evaluable at arbitrary real frequencies (needed by the pull-back)
    pub continuous_xi: bool,
    /// evaluable at off-grid spatial points
    pub continuous_x: bool,
    backend: Backend,
}

impl Symbol {
    pub fn multiplier(d: usize, order: f64, rho: f64, m: FreqFn) -> Symbol {
        Symbol {
            d,
            order,
            rho,
            continuous_xi: true,
            continuous_x: true,
            backend: Backend::Rank(vec![RankTerm::new(None, m)]),
        }
    }

    pub fn x_function(b: GridFunction, rho: f64) -> Symbol {
        let d = b.grid().d();
        Symbol {
            d,
            order: 0.0,
            rho,
            continuous_xi: true,
            continuous_x: true,
            backend: Backend::Rank(vec![RankTerm::new(Some(b), FreqFn::one())]),
        }
    }

    pub fn rank1(b: GridFunction, m: FreqFn, order: f64, rho: f64) -> Symbol {
        let d = b.grid().d();
        Symbol {
            d,
            order,
            rho,
            continuous_xi: true,
            continuous_x: true,
            backend: Backend::Rank(vec![RankTerm::new(Some(b), m)]),
        }
    }

    pub fn from_rank_terms(d: usize, order: f64, rho: f64, terms: Vec<RankTerm>) -> Symbol {
        Symbol { d, order, rho, continuous_xi: true, continuous_x: true, backend: Backend::Rank(terms) }
    }

    pub fn from_closure(
        d: usize,
        order: f64,
        rho: f64,
        eval: SpaceFreqFn,
        derivs: BTreeMap<(MIdx, MIdx), SpaceFreqFn>,
    ) -> Symbol {
        Symbol {
            d,
            order,
            rho,
            continuous_xi: true,
            continuous_x: true,
            backend: Backend::Generic { eval, derivs: Arc::new(derivs) },
        }
    }

    pub fn tabulated(grid: TorusGrid, order: f64, rho: f64, table: Vec<Complex64>) -> Result<Symbol> {
        if table.len() != grid.total() * grid.total() {
            return Err(CoreError::InvalidParameter("tabulated symbol has wrong size".into()));
        }
        Ok(Symbol {
            d: grid.d(),
            order,
            rho,
            continuous_xi: false,
            continuous_x: false,
            backend: Backend::Tabulated { grid, table: Arc::new(table) },
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn rank_terms(&self) -> Option<&[RankTerm]> {
        match &self.backend {
            Backend::Rank(t) => Some(t),
            _ => None,
        }
    }

    /// Evaluate at an arbitrary point and real frequency.
    pub fn eval(&self, x: &[f64], xi: &[f64]) -> Complex64 {
        match &self.backend {
            Backend::Generic { eval, .. } => eval(x, xi),
            Backend::Rank(terms) => {
                terms.iter().map(|t| t.x_value_point(MIdx::zero(), x) * t.m.value(xi)).sum()
            }
            Backend::Tabulated { grid, table } => {
                // nearest lattice pair; tabulated symbols are lattice-only
                let x_flat = nearest_grid_flat(grid, x);
                let xi_flat = grid.flat_of_freq([xi[0].round() as i64, if grid.d() > 1 { xi[1].round() as i64 } else { 0 }]);
                table[xi_flat * grid.total() + x_flat]
            }
            Backend::Pullback { base, chi, .. } => {
                let p = [x[0], if x.len() > 1 { x[1] } else { 0.0 }];
                let y = chi.apply_point(p);
                let jac = chi.jacobian_point(p);
                let a = inv_transpose_small(jac, self.d);
                let zeta = apply_mat(a, xi, self.d);
                base.eval(&y[..self.d], &zeta[..self.d])
            }
        }
    }

    /// Analytic derivative `d^ax_x d^axi_xi a` if the symbol exposes it.
    pub fn deriv(&self, ax: MIdx, axi: MIdx, x: &[f64], xi: &[f64]) -> Option<Complex64> {
        if ax.total() == 0 && axi.total() == 0 {
            return Some(self.eval(x, xi));
        }
        match &self.backend {
            Backend::Generic { derivs, .. } => derivs.get(&(ax, axi)).map(|f| f(x, xi)),
            Backend::Rank(terms) => {
                let mut acc = Complex64::ZERO;
                for t in terms {
                    let mf = t.m.deriv_fn(axi)?;
                    acc += t.x_value_point(ax, x) * mf(xi);
                }
                Some(acc)
            }
            _ => None,
        }
    }

    pub fn has_deriv(&self, ax: MIdx, axi: MIdx) -> bool {
        if ax.total() == 0 && axi.total() == 0 {
            return true;
        }
        match &self.backend {
            Backend::Generic { derivs, .. } => derivs.contains_key(&(ax, axi)),
            Backend::Rank(terms) => terms.iter().all(|t| t.m.has_deriv(axi)),
            _ => false,
        }
    }

    /// Tabulate on `grid x lattice`, lattice-major
    /// (`out[xi_flat * total + x_flat]`).
    pub fn tabulate(&self, grid: &TorusGrid) -> Result<Vec<Complex64>> {
        let total = grid.total();
        let scale_xi = |flat: usize| -> [f64; 2] {
            let f = grid.freq(flat);
            [f[0] as f64, f[1] as f64]
        };
        match &self.backend {
            Backend::Tabulated { grid: g, table } => {
                if g != grid {
                    return Err(CoreError::GridMismatch("tabulated symbol on a different grid".into()));
                }
                Ok((**table).clone())
            }
            Backend::Rank(terms) => {
                let mut out = vec![Complex64::ZERO; total * total];
                for t in terms {
                    let bvals: Vec<Complex64> = match &t.b {
                        Some(b) => {
                            if b.grid() != grid {
                                return Err(CoreError::GridMismatch("rank term on a different grid".into()));
                            }
                            b.values().to_vec()
                        }
                        None => vec![Complex64::new(1.0, 0.0); total],
                    };
                    for xi_flat in 0..total {
                        let mv = t.m.value(&scale_xi(xi_flat)[..self.d]);
                        let row = &mut out[xi_flat * total..(xi_flat + 1) * total];
                        for (o, bv) in row.iter_mut().zip(bvals.iter()) {
                            *o += bv * mv;
                        }
                    }
                }
                Ok(out)
            }
            Backend::Pullback { base, pre, .. } => {
                let mut out = vec![Complex64::ZERO; total * total];
                for xi_flat in 0..total {
                    let xi = scale_xi(xi_flat);
                    let row = &mut out[xi_flat * total..(xi_flat + 1) * total];
                    for (x_flat, o) in row.iter_mut().enumerate() {
                        let zeta = apply_mat(pre.inv_t[x_flat], &xi[..self.d], self.d);
                        *o = match (&pre.b_at_chi, base.rank_terms()) {
                            (Some(cache), Some(terms)) => {
                                let mut acc = Complex64::ZERO;
                                for (r, t) in terms.iter().enumerate() {
                                    acc += cache[r][x_flat] * t.m.value(&zeta[..self.d]);
                                }
                                acc
                            }
                            _ => base.eval(&pre.chi_pts[x_flat][..self.d], &zeta[..self.d]),
                        };
                    }
                }
                Ok(out)
            }
            Backend::Generic { eval, .. } => {
                let mut out = vec![Complex64::ZERO; total * total];
                for xi_flat in 0..total {
                    let xi = scale_xi(xi_flat);
                    let row = &mut out[xi_flat * total..(xi_flat + 1) * total];
                    for (x_flat, o) in row.iter_mut().enumerate() {
                        let p = grid.point(x_flat);
                        *o = eval(&p[..self.d], &xi[..self.d]);
                    }
                }
                Ok(out)
            }
        }
    }

    /// Bound constant `M` with `|a(x, xi)| <= M (1 + |xi|)^m` over a sample
    /// of the given lattice.
    pub fn bound_const(&self, grid: &TorusGrid) -> f64 {
        let total = grid.total();
        let x_step = (total / 64).max(1);
        let mut m = 0.0f64;
        for xi_flat in sample_lattice(grid) {
            let f = grid.freq(xi_flat);
            let xi = [f[0] as f64, f[1] as f64];
            let w = (1.0 + grid.freq_norm(xi_flat)).powf(self.order);
            for x_flat in (0..total).step_by(x_step) {
                let p = grid.point(x_flat);
                m = m.max(self.eval(&p[..self.d], &xi[..self.d]).norm() / w);
            }
        }
        m
    }
}

fn nearest_grid_flat(grid: &TorusGrid, x: &[f64]) -> usize {
    let n = grid.n();
    let h = grid.h();
    let idx = |v: f64| -> usize {
        let k = (v / h).round() as i64;
        (((k % n as i64) + n as i64) % n as i64) as usize
    };
    match grid.d() {
        1 => idx(x[0]),
        _ => idx(x[0]) * n + idx(x[1]),
    }
}

fn sample_lattice(grid: &TorusGrid) -> Vec<usize> {
    let total = grid.total();
    let step = (total / 128).max(1);
    (0..total).step_by(step).collect()
}

fn inv_transpose_small(m: [[f64; 2]; 2], d: usize) -> [[f64; 2]; 2] {
    match d {
        1 => [[1.0 / m[0][0], 0.0], [0.0, 1.0]],
        _ => {
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            [[m[1][1] / det, -m[1][0] / det], [-m[0][1] / det, m[0][0] / det]]
        }
    }
}

fn apply_mat(m: [[f64; 2]; 2], v: &[f64], d: usize) -> [f64; 2] {
    match d {
        1 => [m[0][0] * v[0], 0.0],
        _ => [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]],
    }
}

/// Seminorm `M^m_rho(a)` on the lattice of `grid`: max over derivative orders
/// `|alpha| <= floor(d/2) + 1 + floor(rho)` (capped at 2) and lattice
/// `|xi| >= 1` of `(1 + |xi|)^(|alpha| - m)` times the discrete Hoelder-rho
/// norm in x. Missing analytic xi-derivatives fall back to centered
/// finite differences at unit lattice step.
pub fn seminorm(a: &Symbol, m: f64, rho: f64, grid: &TorusGrid) -> f64 {
    let d = grid.d();
    let cap = ((d / 2) as u8 + 1 + rho.floor() as u8).min(2);
    let total = grid.total();
    let base = a.tabulate(grid).expect("seminorm tabulation");
    let holder_exp = rho.min(1.0);
    let h = grid.h();
    let mut best = 0.0f64;
    for alpha in multi_indices(d, cap) {
        // column of d^alpha_xi a at each lattice point
        for xi_flat in 0..total {
            let r = grid.freq_norm(xi_flat);
            if r < 1.0 {
                continue;
            }
            let col = xi_deriv_column(a, grid, &base, alpha, xi_flat);
            let col = match col {
                Some(c) => c,
                None => continue, // lattice boundary for the FD stencil
            };
            let weight = (1.0 + r).powf(alpha.total() as f64 - m);
            let sup = col.iter().map(|c| c.norm()).fold(0.0, f64::max);
            let mut quot = 0.0f64;
            if rho > 0.0 {
                for axis in 0..d {
                    for x_flat in 0..total {
                        let nb = neighbor(grid, x_flat, axis);
                        let dv = (col[nb] - col[x_flat]).norm();
                        quot = quot.max(dv / h.powf(holder_exp));
                    }
                }
            }
            best = best.max(weight * sup.max(quot));
        }
    }
    best
}

fn neighbor(grid: &TorusGrid, flat: usize, axis: usize) -> usize {
    let n = grid.n();
    match grid.d() {
        1 => (flat + 1) % n,
        _ => {
            let (i, j) = (flat / n, flat % n);
            match axis {
                0 => ((i + 1) % n) * n + j,
                _ => i * n + (j + 1) % n,
            }
        }
    }
}

/// d^alpha_xi a(., xi) over the grid: analytic when available, otherwise a
/// centered finite difference from the tabulation (`None` when the stencil
/// would leave the lattice).
fn xi_deriv_column(
    a: &Symbol,
    grid: &TorusGrid,
    base: &[Complex64],
    alpha: MIdx,
    xi_flat: usize,
) -> Option<Vec<Complex64>> {
    let total = grid.total();
    let d = grid.d();
    if alpha.total() == 0 {
        return Some(base[xi_flat * total..(xi_flat + 1) * total].to_vec());
    }
    // analytic fast path
    let f = grid.freq(xi_flat);
    let xi = [f[0] as f64, f[1] as f64];
    if a.has_deriv(MIdx::zero(), alpha) {
        let mut col = Vec::with_capacity(total);
        for x_flat in 0..total {
            let p = grid.point(x_flat);
            col.push(a.deriv(MIdx::zero(), alpha, &p[..d], &xi[..d])?);
        }
        return Some(col);
    }
    // centered finite differences on the lattice
    let half = grid.n() as i64 / 2;
    let shift = |dx: [i64; 2]| -> Option<usize> {
        let t = [f[0] + dx[0], f[1] + dx[1]];
        if t[0] < -half || t[0] >= half || (d > 1 && (t[1] < -half || t[1] >= half)) {
            return None;
        }
        Some(grid.flat_of_freq(t))
    };
    let col_of = |flat: usize| -> &[Complex64] { &base[flat * total..(flat + 1) * total] };
    let mut out = vec![Complex64::ZERO; total];
    match (alpha.0[0], alpha.0[1]) {
        (1, 0) | (0, 1) => {
            let ax = if alpha.0[0] == 1 { 0 } else { 1 };
            let mut e = [0i64; 2];
            e[ax] = 1;
            let (p, m) = (shift(e)?, shift([-e[0], -e[1]])?);
            for i in 0..total {
                out[i] = (col_of(p)[i] - col_of(m)[i]) * 0.5;
            }
        }
        (2, 0) | (0, 2) => {
            let ax = if alpha.0[0] == 2 { 0 } else { 1 };
            let mut e = [0i64; 2];
            e[ax] = 1;
            let (p, m) = (shift(e)?, shift([-e[0], -e[1]])?);
            for i in 0..total {
                out[i] = col_of(p)[i] - base[xi_flat * total + i] * 2.0 + col_of(m)[i];
            }
        }
        (1, 1) => {
            let (pp, pm, mp, mm) =
                (shift([1, 1])?, shift([1, -1])?, shift([-1, 1])?, shift([-1, -1])?);
            for i in 0..total {
                out[i] = (col_of(pp)[i] - col_of(pm)[i] - col_of(mp)[i] + col_of(mm)[i]) * 0.25;
            }
        }
        _ => return None,
    }
    Some(out)
}

/// Truncated composition symbol
/// `a # b = sum_{|alpha| < rho} 1/(i^|alpha| alpha!) d^alpha_xi a d^alpha_x b`.
pub fn sharp_product(a: &Symbol, b: &Symbol, rho: f64) -> Result<Symbol> {
    if rho <= 0.0 {
        return Err(CoreError::InvalidParameter("sharp product needs rho > 0".into()));
    }
    let d = a.d();
    let max_ord = ((rho.ceil() - 1.0) as u8).min(2);
    let alphas = multi_indices(d, max_ord);
    if let (Some(ta), Some(tb)) = (a.rank_terms(), b.rank_terms()) {
        let mut terms = Vec::new();
        for &alpha in &alphas {
            let c = calculus_coeff(alpha);
            for ra in ta {
                let ma = ra.m.deriv_fn(alpha).ok_or_else(|| {
                    CoreError::DerivativeUnavailable(format!("xi-derivative {:?} of left factor", alpha.0))
                })?;
                let ma_fn = FreqFn::new(ma);
                for rb in tb {
                    // x-derivative of the right factor's spatial part
                    let rb_deriv: Option<GridFunction> = match rb.b_deriv(alpha) {
                        Some(g) => Some((**g).clone()),
                        None if alpha.total() == 0 => None, // constant 1
                        None => continue,                   // derivative of a constant vanishes
                    };
                    let b_new = match (ra.b.as_ref(), rb_deriv) {
                        (None, None) => None,
                        (Some(l), None) => Some((**l).clone()),
                        (None, Some(r)) => Some(r),
                        (Some(l), Some(r)) => Some(l.pointwise_mul(&r)?),
                    };
                    terms.push(RankTerm::new(b_new, FreqFn::product(&ma_fn, &rb.m, c)));
                }
            }
        }
        return Ok(Symbol::from_rank_terms(d, a.order + b.order, a.rho.min(rho), terms));
    }
    // generic closures
    let mut parts: Vec<(Complex64, SpaceFreqFn, SpaceFreqFn)> = Vec::new();
    for &alpha in &alphas {
        let fa = deriv_closure(a, MIdx::zero(), alpha)?;
        let fb = deriv_closure(b, alpha, MIdx::zero())?;
        parts.push((calculus_coeff(alpha), fa, fb));
    }
    let eval: SpaceFreqFn = Arc::new(move |x: &[f64], xi: &[f64]| {
        parts.iter().map(|(c, fa, fb)| c * fa(x, xi) * fb(x, xi)).sum()
    });
    Ok(Symbol::from_closure(d, a.order + b.order, a.rho.min(rho), eval, BTreeMap::new()))
}

fn deriv_closure(s: &Symbol, ax: MIdx, axi: MIdx) -> Result<SpaceFreqFn> {
    if !s.has_deriv(ax, axi) {
        return Err(CoreError::DerivativeUnavailable(format!(
            "x-derivative {:?}, xi-derivative {:?}",
            ax.0, axi.0
        )));
    }
    let s = s.clone();
    Ok(Arc::new(move |x: &[f64], xi: &[f64]| s.deriv(ax, axi, x, xi).unwrap()))
}

/// Truncated adjoint symbol
/// `a^t = sum_{|alpha| < rho} 1/(i^|alpha| alpha!) d^alpha_xi d^alpha_x conj(a)`.
pub fn adjoint_symbol(a: &Symbol, rho: f64) -> Result<Symbol> {
    if rho <= 0.0 {
        return Err(CoreError::InvalidParameter("adjoint symbol needs rho > 0".into()));
    }
    let d = a.d();
    let max_ord = ((rho.ceil() - 1.0) as u8).min(2);
    let alphas = multi_indices(d, max_ord);
    if let Some(terms_in) = a.rank_terms() {
        let mut terms = Vec::new();
        for &alpha in &alphas {
            let c = calculus_coeff(alpha);
            for t in terms_in {
                let m_new = t.m.shifted_conj(alpha, c).ok_or_else(|| {
                    CoreError::DerivativeUnavailable(format!("xi-derivative {:?}", alpha.0))
                })?;
                let b_new = match t.b_deriv(alpha) {
                    Some(g) => Some(g.conj()),
                    None if alpha.total() == 0 => None,
                    None => continue, // derivative of the constant 1 vanishes
                };
                terms.push(RankTerm::new(b_new, m_new));
            }
        }
        return Ok(Symbol::from_rank_terms(d, a.order, a.rho.min(rho), terms));
    }
    let mut parts: Vec<(Complex64, SpaceFreqFn)> = Vec::new();
    for &alpha in &alphas {
        parts.push((calculus_coeff(alpha), deriv_closure(a, alpha, alpha)?));
    }
    let eval: SpaceFreqFn =
        Arc::new(move |x: &[f64], xi: &[f64]| parts.iter().map(|(c, f)| c * f(x, xi).conj()).sum());
    Ok(Symbol::from_closure(d, a.order, a.rho.min(rho), eval, BTreeMap::new()))
}

/// Leading-order pulled-back symbol `a*(x, xi) = a(chi(x), (D chi(x))^-t xi)`.
pub fn pullback_symbol(a: &Symbol, chi: &TorusMap) -> Result<Symbol> {
    if !chi.is_diffeo() {
        return Err(CoreError::NotDiffeomorphism(format!("min Jacobian {:.3e}", chi.min_jac())));
    }
    if !a.continuous_xi {
        return Err(CoreError::FrequencyEvalUnavailable);
    }
    let grid = *chi.grid();
    let chi_pts: Vec<[f64; 2]> = chi.points().to_vec();
    let mut inv_t = Vec::with_capacity(grid.total());
    for flat in 0..grid.total() {
        inv_t.push(chi.inv_transpose_at(flat)?);
    }
    let b_at_chi = a.rank_terms().map(|terms| {
        terms
            .iter()
            .map(|t| match &t.b {
                Some(b) => evaluate_trig(b, &chi_pts),
                None => vec![Complex64::new(1.0, 0.0); grid.total()],
            })
            .collect::<Vec<_>>()
    });
    Ok(Symbol {
        d: a.d(),
        order: a.order,
        rho: a.rho,
        continuous_xi: true,
        continuous_x: a.continuous_x,
        backend: Backend::Pullback {
            base: Arc::new(a.clone()),
            chi: Arc::new(chi.clone()),
            pre: Arc::new(PullbackPre { chi_pts, inv_t, b_at_chi }),
        },
    })
}

/// Regularized symbol: the x-spectrum is cut by the admissible cutoff,
/// `F_x sigma(zeta, eta) = psi(zeta, eta) F_x a(zeta, eta)`. The result
/// satisfies the spectral condition exactly on the lattice.
pub fn regularized_symbol(a: &Symbol, psi: &AdmissibleCutoff) -> Result<Symbol> {
    let grid = *psi.grid();
    let total = grid.total();
    let tab = a.tabulate(&grid)?;
    let mut out = vec![Complex64::ZERO; total * total];
    for xi_flat in 0..total {
        let col = GridFunction::from_values(grid, tab[xi_flat * total..(xi_flat + 1) * total].to_vec())?;
        let cut = crate::grid::fourier_multiplier(
            |zeta| {
                let z = [zeta[0], if zeta.len() > 1 { zeta[1] } else { 0 }];
                Complex64::new(psi.eval(z, xi_flat), 0.0)
            },
            &col,
        );
        out[xi_flat * total..(xi_flat + 1) * total].copy_from_slice(cut.values());
    }
    Symbol::tabulated(grid, a.order, a.rho, out)
}
