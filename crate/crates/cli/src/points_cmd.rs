//! Commands on the manifolds themselves: constants, minimization, kernel tables.

use std::f64::consts::PI;
use std::path::Path;

use anyhow::{bail, Context, Result};
use greensep::constants::constant_consistency_check;
use greensep::energy::{write_trace_csv, RestartSummary};
use greensep::kernel::default_grid_size;
use greensep::{
    bound_report, BoundCheck, BoundKind, ConfigurationRecord, Error, KernelTable, ManifoldId,
    MinimizeOptions, Start, StopReason,
};
use serde::Serialize;

use crate::output::{csv_table, emit, json_document, text_table, write_file, Format, Provenance};
use crate::{ConstantsArgs, KernelArgs, MinimizeArgs, Outcome};

fn parse_manifold(s: &str) -> Result<ManifoldId> {
    s.parse::<ManifoldId>().with_context(|| format!("unknown manifold {s:?}"))
}

/// Expand `2,5,10` and `2..32` (inclusive) into a list.
fn expand_counts(items: &[String]) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in items {
        if let Some((lo, hi)) = item.split_once("..") {
            let lo: usize = lo.trim().parse().with_context(|| format!("bad range {item:?}"))?;
            let hi: usize = hi.trim().trim_start_matches('=').parse().with_context(|| format!("bad range {item:?}"))?;
            if lo > hi {
                bail!("empty range {item:?}");
            }
            out.extend(lo..=hi);
        } else {
            out.push(item.trim().parse().with_context(|| format!("bad point count {item:?}"))?);
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct ConstantsConfig {
    command: &'static str,
    manifolds: Vec<ManifoldId>,
    n: Vec<usize>,
    format: Format,
}

#[derive(Serialize)]
struct ConstantsRow {
    manifold: ManifoldId,
    dim: usize,
    n_points: usize,
    c_constant: f64,
    bound_constant: f64,
    r_n: f64,
    r_n_saturated: bool,
    /// Closed form and volume quotient agree.
    consistent: bool,
    /// `r_N >= C_M (N - 1)^(-1/n)`
    r_n_dominates: bool,
}

pub fn constants(args: &ConstantsArgs) -> Result<Outcome> {
    let manifolds = args.manifold.iter().map(|s| parse_manifold(s)).collect::<Result<Vec<_>>>()?;
    let counts = expand_counts(&args.n)?;
    let prov = Provenance::new(ConstantsConfig {
        command: "constants",
        manifolds: manifolds.clone(),
        n: counts.clone(),
        format: args.format,
    });
    let mut rows = Vec::new();
    for &m in &manifolds {
        let consistent = match constant_consistency_check(m) {
            Ok(ok) => ok,
            Err(Error::Consistency { .. }) => false,
            Err(e) => return Err(e.into()),
        };
        for &n in &counts {
            let b = bound_report(m, n)?;
            rows.push(ConstantsRow {
                manifold: m,
                dim: m.dim(),
                n_points: n,
                c_constant: b.c_constant,
                bound_constant: b.bound_constant,
                r_n: b.r_n,
                r_n_saturated: b.r_n_saturated,
                consistent,
                r_n_dominates: b.r_n >= b.bound_constant,
            });
        }
    }
    let pass = rows.iter().all(|r| r.consistent && r.r_n_dominates);
    let header = ["manifold", "dim", "N", "C_M", "bound", "r_N", "saturated", "consistent", "r_N>=bound"];
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.manifold.to_string(),
                r.dim.to_string(),
                r.n_points.to_string(),
                r.c_constant.to_string(),
                r.bound_constant.to_string(),
                r.r_n.to_string(),
                r.r_n_saturated.to_string(),
                r.consistent.to_string(),
                r.r_n_dominates.to_string(),
            ]
        })
        .collect();
    let body = match args.format {
        Format::Json => json_document(&prov, &rows)?,
        Format::Csv => prov.comment_header()? + &csv_table(&header, &cells),
        Format::Text => prov.comment_header()? + &text_table(&header, &cells),
    };
    emit(args.out.as_deref(), &body)?;
    Ok(Outcome { checks_pass: pass })
}

fn kernel_table(m: ManifoldId, grid: Option<usize>, tol: f64) -> Result<KernelTable> {
    let k = grid.unwrap_or_else(|| default_grid_size(m));
    Ok(KernelTable::build(m, k, tol)?)
}

#[derive(Serialize)]
struct MinimizeConfig {
    command: &'static str,
    manifold: ManifoldId,
    n: usize,
    seed: u64,
    restarts: usize,
    grid: usize,
    options: MinimizeOptions,
    format: Format,
}

#[derive(Serialize)]
struct MinimizeSummary {
    manifold: ManifoldId,
    n_points: usize,
    energy: f64,
    dsep: f64,
    grad_norm: f64,
    iterations: usize,
    stop: StopReason,
    best_restart: usize,
    constant_bound: BoundCheck,
    radius_bound: BoundCheck,
    restarts: Vec<RestartSummary>,
}

pub fn minimize(args: &MinimizeArgs) -> Result<Outcome> {
    let m = parse_manifold(&args.manifold)?;
    if !m.supports_points() {
        bail!("{m} has no point model; minimization is not available");
    }
    let grid = args.grid.unwrap_or_else(|| default_grid_size(m));
    let opts = MinimizeOptions {
        restarts: args.restarts,
        seed: args.seed,
        grad_tol: args.tol,
        max_iters: args.max_iters,
        ..Default::default()
    };
    let prov = Provenance::new(MinimizeConfig {
        command: "minimize",
        manifold: m,
        n: args.n,
        seed: args.seed,
        restarts: args.restarts,
        grid,
        options: opts,
        format: args.format,
    });
    if args.n < 2 {
        bail!("N = {} is not allowed; minimization needs N >= 2", args.n);
    }
    let table = kernel_table(m, Some(grid), greensep::kernel::DEFAULT_TOL)?;
    let rep = greensep::minimize(&table, Start::Random(args.n), &opts)?;
    let summary = MinimizeSummary {
        manifold: m,
        n_points: args.n,
        energy: rep.energy,
        dsep: rep.dsep_final,
        grad_norm: rep.grad_norm_final,
        iterations: rep.iterations,
        stop: rep.stop,
        best_restart: rep.best_restart,
        constant_bound: rep.check(BoundKind::Constant),
        radius_bound: rep.check(BoundKind::Radius),
        restarts: rep.restarts.clone(),
    };
    let pass = summary.constant_bound.holds && summary.radius_bound.holds;

    let body = match args.format {
        Format::Json => json_document(&prov, &summary)?,
        Format::Csv => {
            let header = ["manifold", "N", "energy", "dsep", "bound_constant", "margin_constant", "r_n", "margin_r_n", "holds"];
            let row = vec![
                m.to_string(),
                args.n.to_string(),
                rep.energy.to_string(),
                rep.dsep_final.to_string(),
                summary.constant_bound.bound.to_string(),
                summary.constant_bound.margin.to_string(),
                summary.radius_bound.bound.to_string(),
                summary.radius_bound.margin.to_string(),
                pass.to_string(),
            ];
            prov.comment_header()? + &csv_table(&header, &[row])
        }
        Format::Text => {
            let mut s = prov.comment_header()?;
            s += &format!("manifold        {m}\nN               {}\n", args.n);
            s += &format!("energy          {}\n", rep.energy);
            s += &format!("dsep            {}\n", rep.dsep_final);
            s += &format!("grad norm       {:e}\n", rep.grad_norm_final);
            s += &format!("stop            {:?} after {} iterations (restart {})\n", rep.stop, rep.iterations, rep.best_restart);
            for (name, c) in [("C_M (N-1)^(-1/n)", summary.constant_bound), ("r_N", summary.radius_bound)] {
                s += &format!(
                    "bound {name:<16} {} margin {:e} {}{}\n",
                    c.bound,
                    c.margin,
                    if c.holds { "holds" } else { "VIOLATED" },
                    if c.saturated { " (saturated)" } else { "" }
                );
            }
            s
        }
    };
    emit(None, &body)?;
    if let Some(dir) = &args.out {
        write_file(&dir.join(format!("report.{}", args.format.extension())), &body)?;
        let record = ConfigurationRecord::from_report(&rep, &opts);
        write_file(&dir.join("configuration.json"), &json_document(&prov, &record)?)?;
        let mut trace = prov.comment_header()?.into_bytes();
        write_trace_csv(&rep.energy_trace, &mut trace)?;
        write_file(&dir.join("trace.csv"), &String::from_utf8(trace)?)?;
    }
    Ok(Outcome { checks_pass: pass })
}

#[derive(Serialize)]
struct KernelConfig {
    command: &'static str,
    manifold: ManifoldId,
    grid: usize,
    tol: f64,
    format: Format,
}

#[derive(Serialize)]
struct KernelSummary {
    manifold: ManifoldId,
    grid_size: usize,
    nodes: usize,
    norm_constant: f64,
    mean_residual: f64,
    /// `|mean_residual| <= 1e-8 V`
    mean_residual_ok: bool,
    phi_at_diameter: f64,
}

/// The zero-mean Green's function of the round `S^2`: `-(1/2pi) log sin(r/2) - 1/(4pi)`.
fn s2_oracle(r: f64) -> (f64, f64) {
    (-(0.5 * r).sin().ln() / (2.0 * PI) - 1.0 / (4.0 * PI), -1.0 / ((0.5 * r).tan() * 4.0 * PI))
}

fn kernel_dump(t: &KernelTable) -> String {
    let s2 = t.manifold == ManifoldId::Sphere(2);
    let mut out = String::from(if s2 { "r,phi,phi_prime,phi_oracle,phi_prime_oracle\n" } else { "r,phi,phi_prime\n" });
    for i in 0..t.grid.len() {
        out += &format!("{:e},{:e},{:e}", t.grid[i], t.phi[i], t.phi_prime[i]);
        if s2 {
            let (p, dp) = s2_oracle(t.grid[i]);
            out += &format!(",{p:e},{dp:e}");
        }
        out.push('\n');
    }
    out
}

pub fn kernel(args: &KernelArgs) -> Result<Outcome> {
    let m = parse_manifold(&args.manifold)?;
    let grid = args.grid.unwrap_or_else(|| default_grid_size(m));
    let prov = Provenance::new(KernelConfig {
        command: "kernel",
        manifold: m,
        grid,
        tol: args.tol,
        format: args.format,
    });
    let t = kernel_table(m, Some(grid), args.tol)?;
    let summary = KernelSummary {
        manifold: m,
        grid_size: t.grid_size,
        nodes: t.grid.len(),
        norm_constant: t.norm_constant,
        mean_residual: t.mean_residual,
        mean_residual_ok: t.mean_residual.abs() <= 1e-8 * t.volume,
        phi_at_diameter: t.phi[t.grid.len() - 1],
    };
    let dump = prov.comment_header()? + &kernel_dump(&t);
    let body = match args.format {
        Format::Json => json_document(&prov, &summary)?,
        Format::Csv => dump.clone(),
        Format::Text => {
            let mut s = prov.comment_header()?;
            s += &format!("manifold        {m}\ngrid size       {} ({} nodes)\n", t.grid_size, t.grid.len());
            s += &format!("norm constant   {}\nphi(D)          {}\n", t.norm_constant, summary.phi_at_diameter);
            s += &format!("mean residual   {:e} (limit {:e})\n", t.mean_residual, 1e-8 * t.volume);
            s
        }
    };
    emit(None, &body)?;
    if let Some(dir) = &args.out {
        write_kernel_file(&dir.join("kernel.json"), &t, &prov.to_value()?)?;
        write_file(&dir.join("kernel.csv"), &dump)?;
    }
    Ok(Outcome { checks_pass: summary.mean_residual_ok })
}

fn write_kernel_file(path: &Path, t: &KernelTable, prov: &serde_json::Value) -> Result<()> {
    let mut buf = Vec::new();
    t.write_json_with(&mut buf, prov)?;
    buf.push(b'\n');
    write_file(path, &String::from_utf8(buf)?)
}
