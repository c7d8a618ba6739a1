//! Command-line surface: reproducible analyses with file-based inputs and
//! JSON/CSV/SVG outputs.
//!
//! Exit codes: 0 ok, 1 verification failure, 2 input error, 3 degenerate
//! analysis, 4 identity violation.

use clap::{Parser, Subcommand, ValueEnum};
use paracalc_core::dyadic::NormKind;
use paracalc_core::generate::{bump, sobolev_series, torus_diffeo, weierstrass};
use paracalc_core::io;
use paracalc_core::paradiff::QuantizedOperator;
use paracalc_core::symbol::FreqFn;
use paracalc_core::{
    fit_regularity, paracompose_alinhac, paracompose_new, paradiff_apply_lowrank, paralinearize,
    paraproduct, probe_operator_order, sobolev_norm, verify, zygmund_norm, AdmissibleCutoff,
    CoreError, DyadicPartition, GridFunction, Symbol, TorusGrid,
};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "paracalc", version, about = "Dyadic analysis, paradifferential operators and paracomposition on the periodic grid", disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    Weierstrass,
    SobolevSeries,
    Diffeo,
    Bump,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    Zygmund,
    Sobolev,
}

impl From<NormArg> for NormKind {
    fn from(v: NormArg) -> Self {
        match v {
            NormArg::Zygmund => NormKind::Zygmund,
            NormArg::Sobolev => NormKind::Sobolev,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Emit a GridFunction or TorusMap JSON file from a seeded generator
    Gen {
        #[arg(long)]
        kind: GenKind,
        /// block-decay exponent (weierstrass)
        #[arg(long)]
        sigma: Option<f64>,
        /// block-decay exponent (sobolev-series)
        #[arg(long)]
        s: Option<f64>,
        /// Jacobian block-decay exponent (diffeo)
        #[arg(long)]
        rho: Option<f64>,
        /// displacement amplitude (diffeo)
        #[arg(long)]
        eps: Option<f64>,
        /// number of lacunary terms (weierstrass, diffeo)
        #[arg(long)]
        k_terms: Option<u32>,
        /// bump width (bump)
        #[arg(long)]
        width: Option<f64>,
        /// bump center coordinates, comma separated (bump)
        #[arg(long)]
        center: Option<String>,
        #[arg(long, default_value_t = 1)]
        grid_d: usize,
        #[arg(long)]
        grid_j: u32,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Littlewood-Paley block norms and a regularity fit
    Decompose {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = NormArg::Zygmund)]
        norm: NormArg,
        /// fit range "qmin:qmax"
        #[arg(long)]
        fit: Option<String>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Zygmund or Sobolev norm of a grid function
    Norm {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = NormArg::Zygmund)]
        norm: NormArg,
        /// regularity index (r or s)
        #[arg(long)]
        index: f64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Paraproduct T_a u with both factors given as grid functions
    Paraproduct {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        u: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Apply a paradifferential operator T_a to a grid function
    Paradiff {
        /// symbol spec: "mult:<m>", "func:<file>", "prod:<file>:<m>" with
        /// m in {one, ixi, abs^p, japanese^p}
        #[arg(long)]
        symbol: String,
        #[arg(long)]
        u: PathBuf,
        #[arg(long, default_value_t = 1.5)]
        symbol_rho: f64,
        #[arg(long, default_value_t = 3)]
        n0: u32,
        /// force the reference double-sum quantization (lattice-size guarded)
        #[arg(long, default_value_t = false)]
        direct: bool,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Paracomposition of a grid function along a torus map
    Paracompose {
        #[arg(long)]
        u: PathBuf,
        #[arg(long)]
        map: PathBuf,
        /// two-sided band truncation instead of the one-sided operator
        #[arg(long, default_value_t = false)]
        alinhac: bool,
        /// band-spread override (defaults to the selection rule)
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Full paralinearization of u ∘ chi with remainders and decay reports
    Paralinearize {
        #[arg(long)]
        u: PathBuf,
        #[arg(long)]
        map: PathBuf,
        /// fit range "qmin:qmax" for the per-component reports
        #[arg(long)]
        fit: Option<String>,
        #[arg(long, default_value_t = false)]
        emit_svg: bool,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Conjugation defect of a paradifferential operator under a map
    Conjugate {
        #[arg(long)]
        symbol: String,
        #[arg(long)]
        u: PathBuf,
        #[arg(long)]
        map: PathBuf,
        #[arg(long, default_value_t = 1.5)]
        symbol_rho: f64,
        /// probe the operator order of the defect as well
        #[arg(long, default_value_t = false)]
        probe: bool,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Run the verification suite
    Verify {
        /// run only criteria whose name contains this substring
        #[arg(long)]
        only: Option<String>,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        let code = match &e {
            CoreError::DegenerateSpectrum(_) => 3,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

fn main() -> ExitCode {
    paracalc_core::init_threads();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::new(2, format!("cannot create {}: {e}", dir.display())))
}

fn write_manifest(dir: &Path, command: &str, params: serde_json::Value) -> Result<(), Failure> {
    let manifest = json!({
        "command": command,
        "version": paracalc_core::VERSION,
        "params": params,
    });
    io::write_json(&dir.join("manifest.json"), &manifest)?;
    Ok(())
}

fn parse_fit(fit: &Option<String>, default: (u32, u32)) -> Result<(u32, u32), Failure> {
    match fit {
        None => Ok(default),
        Some(s) => {
            let parts: Vec<&str> = s.split(':').collect();
            if parts.len() != 2 {
                return Err(Failure::new(2, format!("bad fit range \"{s}\", expected \"qmin:qmax\"")));
            }
            let lo = parts[0].parse::<u32>().map_err(|_| Failure::new(2, "bad fit range"))?;
            let hi = parts[1].parse::<u32>().map_err(|_| Failure::new(2, "bad fit range"))?;
            Ok((lo, hi))
        }
    }
}

fn parse_m_expr(expr: &str, d: usize) -> Result<(FreqFn, f64), Failure> {
    if expr == "one" {
        return Ok((FreqFn::one(), 0.0));
    }
    if expr == "ixi" {
        return Ok((FreqFn::i_xi(0), 1.0));
    }
    if let Some(p) = expr.strip_prefix("abs^") {
        let p: f64 = p.parse().map_err(|_| Failure::new(2, format!("bad multiplier power in \"{expr}\"")))?;
        return Ok((FreqFn::abs_pow(p), p));
    }
    if let Some(p) = expr.strip_prefix("japanese^") {
        let p: f64 = p.parse().map_err(|_| Failure::new(2, format!("bad multiplier power in \"{expr}\"")))?;
        return Ok((FreqFn::japanese_pow(p), p));
    }
    let _ = d;
    Err(Failure::new(2, format!("unknown multiplier \"{expr}\" (use one, ixi, abs^p, japanese^p)")))
}

/// "mult:<m>", "func:<file>", "prod:<file>:<m>"
fn parse_symbol(spec: &str, rho: f64, expected_grid: Option<&TorusGrid>) -> Result<Symbol, Failure> {
    if let Some(expr) = spec.strip_prefix("mult:") {
        let d = expected_grid.map(|g| g.d()).unwrap_or(1);
        let (m, order) = parse_m_expr(expr, d)?;
        return Ok(Symbol::multiplier(d, order, rho, m));
    }
    if let Some(path) = spec.strip_prefix("func:") {
        let b = io::read_grid_function(Path::new(path))?;
        check_symbol_grid(&b, expected_grid)?;
        return Ok(Symbol::x_function(b, rho));
    }
    if let Some(rest) = spec.strip_prefix("prod:") {
        let (path, expr) = rest
            .rsplit_once(':')
            .ok_or_else(|| Failure::new(2, format!("bad symbol spec \"{spec}\"")))?;
        let b = io::read_grid_function(Path::new(path))?;
        check_symbol_grid(&b, expected_grid)?;
        let (m, order) = parse_m_expr(expr, b.grid().d())?;
        return Ok(Symbol::rank1(b, m, order, rho));
    }
    Err(Failure::new(2, format!("bad symbol spec \"{spec}\" (use mult:, func: or prod:)")))
}

fn check_symbol_grid(b: &GridFunction, expected: Option<&TorusGrid>) -> Result<(), Failure> {
    if let Some(g) = expected {
        if b.grid() != g {
            return Err(Failure::new(2, "symbol grid differs from operand grid"));
        }
    }
    Ok(())
}

fn report_json(rep: &paracalc_core::RegularityReport) -> serde_json::Value {
    json!({
        "exponent": rep.exponent,
        "norm_kind": rep.norm_kind.to_string(),
        "fit_range": rep.fit_range,
        "residual": rep.residual,
        "degenerate": rep.degenerate,
        "blocks": rep.blocks.iter().map(|b| json!({"q": b.q, "sup": b.sup, "l2": b.l2})).collect::<Vec<_>>(),
    })
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Gen { kind, sigma, s, rho, eps, k_terms, width, center, grid_d, grid_j, seed, out } => {
            let grid = TorusGrid::new(grid_d, grid_j)?;
            let mut params = json!({
                "grid_d": grid_d, "grid_j": grid_j, "seed": seed,
            });
            match kind {
                GenKind::Weierstrass => {
                    let sigma = sigma.ok_or_else(|| Failure::new(2, "weierstrass needs --sigma"))?;
                    let k = k_terms.unwrap_or(grid_j - 2);
                    let f = weierstrass(sigma, k, grid, seed)?;
                    io::write_grid_function(&out, &f)?;
                    params["kind"] = "weierstrass".into();
                    params["sigma"] = sigma.into();
                    params["k_terms"] = k.into();
                }
                GenKind::SobolevSeries => {
                    let s = s.ok_or_else(|| Failure::new(2, "sobolev-series needs --s"))?;
                    let f = sobolev_series(s, grid, seed);
                    io::write_grid_function(&out, &f)?;
                    params["kind"] = "sobolev_series".into();
                    params["s"] = s.into();
                }
                GenKind::Diffeo => {
                    let rho = rho.ok_or_else(|| Failure::new(2, "diffeo needs --rho"))?;
                    let eps = eps.ok_or_else(|| Failure::new(2, "diffeo needs --eps"))?;
                    let k = k_terms.unwrap_or(grid_j.saturating_sub(3));
                    let m = torus_diffeo(rho, eps, k, grid, seed)?;
                    io::write_torus_map(&out, &m)?;
                    params["kind"] = "diffeo".into();
                    params["rho"] = rho.into();
                    params["eps"] = eps.into();
                    params["k_terms"] = k.into();
                }
                GenKind::Bump => {
                    let width = width.ok_or_else(|| Failure::new(2, "bump needs --width"))?;
                    let c: Vec<f64> = match &center {
                        None => vec![0.0, 0.0],
                        Some(text) => text
                            .split(',')
                            .map(|t| t.trim().parse::<f64>().map_err(|_| Failure::new(2, "bad --center")))
                            .collect::<Result<_, _>>()?,
                    };
                    let f = bump(width, [c.first().copied().unwrap_or(0.0), c.get(1).copied().unwrap_or(0.0)], grid);
                    io::write_grid_function(&out, &f)?;
                    params["kind"] = "bump".into();
                    params["width"] = width.into();
                    params["center"] = c.into();
                }
            }
            let manifest_path = out.with_extension("manifest.json");
            let manifest = json!({"command": "gen", "version": paracalc_core::VERSION, "params": params});
            io::write_json(&manifest_path, &manifest)?;
            Ok(())
        }

        Command::Decompose { input, norm, fit, out_dir } => {
            let f = io::read_grid_function(&input)?;
            let part = DyadicPartition::new(*f.grid());
            let dec = part.decompose(&f)?;
            let (lo, hi) = parse_fit(&fit, (1, part.q_max().saturating_sub(1).max(2)))?;
            ensure_dir(&out_dir)?;
            let rows: Vec<(u32, f64, f64)> = (0..=part.q_max())
                .map(|q| (q, dec.sup_norms[q as usize], dec.l2_norms[q as usize]))
                .collect();
            std::fs::write(out_dir.join("blocks.csv"), io::blocks_csv(&rows))
                .map_err(CoreError::from)?;
            let rep = fit_regularity(&dec, norm.into(), lo, hi)?;
            io::write_json(&out_dir.join("report.json"), &report_json(&rep))?;
            write_manifest(
                &out_dir,
                "decompose",
                json!({"input": input.display().to_string(), "norm": NormKind::from(norm).to_string(), "fit": [lo, hi]}),
            )?;
            println!("exponent {}", io::fmt_f64(rep.exponent));
            Ok(())
        }

        Command::Norm { input, norm, index, out_dir } => {
            let f = io::read_grid_function(&input)?;
            let part = DyadicPartition::new(*f.grid());
            let value = match NormKind::from(norm) {
                NormKind::Zygmund => zygmund_norm(&f, index, &part),
                NormKind::Sobolev => sobolev_norm(&f, index, &part),
            };
            ensure_dir(&out_dir)?;
            io::write_json(
                &out_dir.join("norm.json"),
                &json!({"norm_kind": NormKind::from(norm).to_string(), "index": index, "value": value}),
            )?;
            write_manifest(
                &out_dir,
                "norm",
                json!({"input": input.display().to_string(), "norm": NormKind::from(norm).to_string(), "index": index}),
            )?;
            println!("{}", io::fmt_f64(value));
            Ok(())
        }

        Command::Paraproduct { a, u, out_dir } => {
            let fa = io::read_grid_function(&a)?;
            let fu = io::read_grid_function(&u)?;
            let part = DyadicPartition::new(*fu.grid());
            let out = paraproduct(&fa, &fu, &part)?;
            ensure_dir(&out_dir)?;
            io::write_grid_function(&out_dir.join("paraproduct.json"), &out)?;
            write_manifest(
                &out_dir,
                "paraproduct",
                json!({"a": a.display().to_string(), "u": u.display().to_string()}),
            )?;
            Ok(())
        }

        Command::Paradiff { symbol, u, symbol_rho, n0, direct, out_dir } => {
            let fu = io::read_grid_function(&u)?;
            let sym = parse_symbol(&symbol, symbol_rho, Some(fu.grid()))?;
            let part = DyadicPartition::new(*fu.grid());
            let psi = AdmissibleCutoff::new(&part, n0)?;
            let out = if !direct && sym.rank_terms().is_some() {
                paradiff_apply_lowrank(&sym, &fu, &psi)?
            } else {
                paracalc_core::paradiff_apply_direct(&sym, &fu, &psi)?
            };
            ensure_dir(&out_dir)?;
            io::write_grid_function(&out_dir.join("applied.json"), &out)?;
            write_manifest(
                &out_dir,
                "paradiff",
                json!({"symbol": symbol, "u": u.display().to_string(), "symbol_rho": symbol_rho, "n0": n0, "direct": direct}),
            )?;
            Ok(())
        }

        Command::Paracompose { u, map, alinhac, n, out_dir } => {
            let fu = io::read_grid_function(&u)?;
            let chi = io::read_torus_map(&map)?;
            let part = DyadicPartition::new(*fu.grid());
            let out = if alinhac {
                paracompose_alinhac(&fu, &chi, &part, n)?
            } else {
                paracompose_new(&fu, &chi, &part, n)?
            };
            ensure_dir(&out_dir)?;
            io::write_grid_function(&out_dir.join("composed.json"), &out)?;
            write_manifest(
                &out_dir,
                "paracompose",
                json!({"u": u.display().to_string(), "map": map.display().to_string(), "alinhac": alinhac, "n": n}),
            )?;
            Ok(())
        }

        Command::Paralinearize { u, map, fit, emit_svg, out_dir } => {
            let fu = io::read_grid_function(&u)?;
            let chi = io::read_torus_map(&map)?;
            let part = DyadicPartition::new(*fu.grid());
            let res = paralinearize(&fu, &chi, &part)?;
            let (lo, hi) = parse_fit(&fit, (1, part.q_max().saturating_sub(1).max(2)))?;
            ensure_dir(&out_dir)?;
            let named: Vec<(&str, &GridFunction)> = vec![
                ("chi_star_u", &res.chi_star_u),
                ("t_term", &res.t_term),
                ("r0", &res.r0),
                ("r1", &res.r1),
                ("r2", &res.r2),
                ("bookkeeping", &res.bookkeeping),
            ];
            let mut components = Vec::new();
            let mut csv_rows: Vec<(String, u32, f64, f64)> = Vec::new();
            let mut svg_series: Vec<(String, Vec<(f64, f64)>)> = Vec::new();
            let scale = res.chi_star_u.sup_norm().max(1e-300);
            for (name, f) in &named {
                io::write_grid_function(&out_dir.join(format!("{name}.json")), f)?;
                let dec = part.decompose(f)?;
                let mut pts = Vec::new();
                for q in 0..=part.q_max() {
                    let (sup, l2) = (dec.sup_norms[q as usize], dec.l2_norms[q as usize]);
                    csv_rows.push((name.to_string(), q, sup.log2(), l2.log2()));
                    if sup > 0.0 {
                        pts.push((q as f64, sup.log2()));
                    }
                }
                svg_series.push((name.to_string(), pts));
                // components that are numerically zero have nothing to fit
                let report = if f.sup_norm() <= 1e-13 * scale {
                    None
                } else {
                    fit_regularity(&dec, NormKind::Zygmund, lo, hi).ok()
                };
                components.push(json!({
                    "name": name,
                    "report": report.as_ref().map(report_json),
                }));
            }
            let summary = json!({
                "residual": res.residual,
                "n_used": res.n_used,
                "components": components,
            });
            io::write_json(&out_dir.join("summary.json"), &summary)?;
            std::fs::write(out_dir.join("decay.csv"), io::decay_csv(&csv_rows)).map_err(CoreError::from)?;
            if emit_svg {
                std::fs::write(out_dir.join("decay.svg"), io::decay_svg(&svg_series))
                    .map_err(CoreError::from)?;
            }
            write_manifest(
                &out_dir,
                "paralinearize",
                json!({"u": u.display().to_string(), "map": map.display().to_string(), "fit": [lo, hi], "emit_svg": emit_svg}),
            )?;
            println!("residual {}", io::fmt_f64(res.residual));
            if res.residual > 1e-9 {
                return Err(Failure::new(4, format!("decomposition identity violated: residual {:.3e}", res.residual)));
            }
            Ok(())
        }

        Command::Conjugate { symbol, u, map, symbol_rho, probe, seed, out_dir } => {
            let fu = io::read_grid_function(&u)?;
            let chi = io::read_torus_map(&map)?;
            let sym = parse_symbol(&symbol, symbol_rho, Some(fu.grid()))?;
            let part = DyadicPartition::new(*fu.grid());
            let psi = AdmissibleCutoff::standard(&part);
            let defect = paracalc_core::conjugation_defect(&sym, &fu, &chi, &part, &psi)?;
            ensure_dir(&out_dir)?;
            io::write_grid_function(&out_dir.join("defect.json"), &defect)?;
            if probe {
                let astar = paracalc_core::pullback_symbol(&sym, &chi)?;
                let op_astar = QuantizedOperator::build(&astar, &psi)?;
                let n = paracalc_core::select_n(&chi, &part);
                let result = probe_operator_order(
                    |w| {
                        let t_a_w = if sym.rank_terms().is_some() {
                            paradiff_apply_lowrank(&sym, w, &psi)?
                        } else {
                            paracalc_core::paradiff_apply_direct(&sym, w, &psi)?
                        };
                        let left = paracompose_new(&t_a_w, &chi, &part, Some(n))?;
                        let star_w = paracompose_new(w, &chi, &part, Some(n))?;
                        left.sub(&op_astar.apply(&star_w)?)
                    },
                    &part,
                    seed,
                )?;
                io::write_json(
                    &out_dir.join("probe.json"),
                    &json!({
                        "fitted_order": result.fitted_order,
                        "per_band_gains": result.per_band_gains,
                        "fit_residual": result.fit_residual,
                        "degenerate": result.degenerate,
                        "seed": result.seed,
                    }),
                )?;
            }
            write_manifest(
                &out_dir,
                "conjugate",
                json!({"symbol": symbol, "u": u.display().to_string(), "map": map.display().to_string(), "symbol_rho": symbol_rho, "probe": probe, "seed": seed}),
            )?;
            Ok(())
        }

        Command::Verify { only, out_dir } => {
            let report = verify::run_all(only.as_deref());
            if report.criteria.is_empty() {
                return Err(Failure::new(2, format!(
                    "--only {} matches no criterion",
                    only.as_deref().unwrap_or("")
                )));
            }
            ensure_dir(&out_dir)?;
            io::write_json(&out_dir.join("verify_report.json"), &report)?;
            write_manifest(&out_dir, "verify", json!({"only": only}))?;
            print!("{}", verify::format_report(&report));
            if report.pass {
                Ok(())
            } else {
                Err(Failure::new(1, "verification criteria failed"))
            }
        }
    }
}
