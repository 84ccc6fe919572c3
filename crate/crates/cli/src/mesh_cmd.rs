//! Mesh studies and mesh generation.

use std::path::Path;

use anyhow::{bail, Context, Result};
use greensep::mesh::{
    ball_area, check_connected, check_mvp, ellipsoid, geodesic_distances, icosphere, inner_ball_fraction, is_nested,
    mesh_green, mesh_minimize_energy, read_mesh, solve_obstacle_with, write_off, MeshEnergyOptions, SolutionRecord,
};
use greensep::{ObstacleOptions, ObstacleSolution, TriMesh};
use serde::Serialize;

use crate::output::{csv_table, emit, json_document, text_table, write_file, Format, Provenance};
use crate::{MeshGenArgs, MeshStudyArgs, Outcome};

/// Largest tolerated MVP deviation, relative to the oscillation of the boundary data.
const MVP_LIMIT: f64 = 0.05;

/// `icosphere:K`, `ellipsoid:A,B,C:K`, or a path to an OFF/OBJ file.
fn load_mesh(name: &str) -> Result<TriMesh> {
    let parts: Vec<&str> = name.split(':').collect();
    let level = |s: &str| -> Result<u32> { s.parse().with_context(|| format!("bad subdivision level in {name:?}")) };
    match parts.as_slice() {
        ["icosphere", k] => Ok(icosphere(level(k)?)?),
        ["ellipsoid", axes, k] => Ok(ellipsoid(parse_axes(axes)?, level(k)?)?),
        _ => read_mesh(Path::new(name)).with_context(|| format!("reading mesh {name}")),
    }
}

fn parse_axes(s: &str) -> Result<[f64; 3]> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().with_context(|| format!("bad axis {t:?}")))
        .collect::<Result<_>>()?;
    match v.as_slice() {
        [a, b, c] => Ok([*a, *b, *c]),
        _ => bail!("expected three semi-axes, got {s:?}"),
    }
}

#[derive(Serialize)]
struct StudyConfig<'a> {
    command: &'static str,
    mesh: &'a str,
    p: usize,
    a: &'a [f64],
    n: Option<usize>,
    seed: u64,
    restarts: usize,
    obstacle: ObstacleOptions,
    format: Format,
}

#[derive(Serialize)]
struct MeshSummary {
    vertices: usize,
    faces: usize,
    total_area: f64,
    mean_edge_length: f64,
}

#[derive(Serialize)]
struct BallRow {
    a_fraction: f64,
    a: f64,
    ball_area: f64,
    /// `(ball_area - a) / a`
    area_error: f64,
    ball_vertices: usize,
    kkt_residual: f64,
    sweeps: usize,
    connected: bool,
    mvp_relative: f64,
    inner_fraction: f64,
}

#[derive(Serialize)]
struct NestRow {
    a_small: f64,
    a_large: f64,
    nested: bool,
}

#[derive(Serialize)]
struct ExclusionRow {
    n_points: usize,
    vertices: Vec<usize>,
    energy: f64,
    pairs_checked: usize,
    violations_in_band: usize,
    hard_violations: usize,
}

#[derive(Serialize)]
struct Check {
    name: String,
    pass: bool,
}

#[derive(Serialize)]
struct StudyReport {
    mesh: MeshSummary,
    source: usize,
    balls: Vec<BallRow>,
    nesting: Vec<NestRow>,
    exclusion: Option<ExclusionRow>,
    checks: Vec<Check>,
}

pub fn study(args: &MeshStudyArgs) -> Result<Outcome> {
    let obstacle = ObstacleOptions { tol: args.tol, ..Default::default() };
    let prov = Provenance::new(StudyConfig {
        command: "mesh-study",
        mesh: &args.mesh,
        p: args.p,
        a: &args.a,
        n: args.n,
        seed: args.seed,
        restarts: args.restarts,
        obstacle,
        format: args.format,
    });
    let mesh = load_mesh(&args.mesh)?;
    if args.p >= mesh.num_vertices() {
        bail!("source vertex {} is out of range (mesh has {} vertices)", args.p, mesh.num_vertices());
    }
    if let Some(bad) = args.a.iter().find(|f| !(**f > 0.0 && **f <= 1.0)) {
        bail!("volume fractions must lie in (0, 1], got {bad}");
    }
    let mut fractions = args.a.clone();
    fractions.sort_by(f64::total_cmp);
    fractions.dedup();

    let green = mesh_green(&mesh, args.p)?;
    let dist = geodesic_distances(&mesh, args.p)?;
    let mut sols: Vec<ObstacleSolution> = Vec::new();
    let mut balls = Vec::new();
    let mut checks = Vec::new();
    for &f in &fractions {
        let a = f * mesh.total_area;
        let s = solve_obstacle_with(&mesh, &green, a, &obstacle)?;
        let area = ball_area(&mesh, &s);
        let row = BallRow {
            a_fraction: f,
            a,
            ball_area: area,
            area_error: (area - a) / a,
            ball_vertices: s.ball.len(),
            kkt_residual: s.kkt_residual,
            sweeps: s.sweeps,
            connected: check_connected(&mesh, &s),
            mvp_relative: check_mvp(&mesh, &s, 20, args.seed)?.max_relative,
            inner_fraction: inner_ball_fraction(&s, &dist),
        };
        checks.push(Check { name: format!("connected a/A={f}"), pass: row.connected });
        checks.push(Check { name: format!("mvp a/A={f}"), pass: row.mvp_relative <= MVP_LIMIT });
        checks.push(Check { name: format!("inner fraction a/A={f}"), pass: row.inner_fraction > 0.0 });
        balls.push(row);
        sols.push(s);
    }
    let nesting: Vec<NestRow> = sols
        .windows(2)
        .map(|w| NestRow { a_small: w[0].a, a_large: w[1].a, nested: is_nested(&mesh, &w[0], &w[1]) })
        .collect();
    for r in &nesting {
        checks.push(Check { name: format!("nested {} in {}", r.a_small, r.a_large), pass: r.nested });
    }
    let exclusion = match args.n {
        Some(n) => {
            let opts = MeshEnergyOptions { restarts: args.restarts, obstacle, ..Default::default() };
            let r = mesh_minimize_energy(&mesh, n, args.seed, &opts)?;
            let ex = &r.exclusion;
            checks.push(Check { name: format!("exclusion N={n}"), pass: ex.hard_violations == 0 });
            Some(ExclusionRow {
                n_points: n,
                vertices: r.vertices.clone(),
                energy: r.energy,
                pairs_checked: ex.pairs_checked,
                violations_in_band: ex.violations.len() - ex.hard_violations,
                hard_violations: ex.hard_violations,
            })
        }
        None => None,
    };
    let report = StudyReport {
        mesh: MeshSummary {
            vertices: mesh.num_vertices(),
            faces: mesh.faces.len(),
            total_area: mesh.total_area,
            mean_edge_length: mesh.mean_edge_length(),
        },
        source: args.p,
        balls,
        nesting,
        exclusion,
        checks,
    };
    let pass = report.checks.iter().all(|c| c.pass);

    let body = match args.format {
        Format::Json => json_document(&prov, &report)?,
        Format::Csv => prov.comment_header()? + &csv_table(&BALL_HEADER, &ball_cells(&report)),
        Format::Text => study_text(&prov.comment_header()?, &report),
    };
    emit(None, &body)?;
    if let Some(dir) = &args.out {
        write_file(&dir.join(format!("report.{}", args.format.extension())), &body)?;
        for (k, s) in sols.iter().enumerate() {
            let rec = SolutionRecord::new(&mesh, s);
            write_file(&dir.join(format!("ball_{k}.csv")), &(prov.comment_header()? + &solution_csv(&rec)))?;
            let boundary: Vec<String> = rec.boundary.iter().map(usize::to_string).collect();
            write_file(
                &dir.join(format!("boundary_{k}.csv")),
                &(prov.comment_header()? + &format!("# a = {}\nvertex\n", s.a) + &boundary.join("\n") + "\n"),
            )?;
        }
    }
    Ok(Outcome { checks_pass: pass })
}

const BALL_HEADER: [&str; 10] =
    ["a/A", "a", "ball_area", "area_error", "vertices", "kkt", "sweeps", "connected", "mvp", "inner_fraction"];

fn ball_cells(r: &StudyReport) -> Vec<Vec<String>> {
    r.balls
        .iter()
        .map(|b| {
            vec![
                b.a_fraction.to_string(),
                b.a.to_string(),
                b.ball_area.to_string(),
                format!("{:e}", b.area_error),
                b.ball_vertices.to_string(),
                format!("{:e}", b.kkt_residual),
                b.sweeps.to_string(),
                b.connected.to_string(),
                format!("{:e}", b.mvp_relative),
                b.inner_fraction.to_string(),
            ]
        })
        .collect()
}

fn study_text(header: &str, r: &StudyReport) -> String {
    let mut s = header.to_string();
    s += &format!(
        "mesh: {} vertices, {} faces, area {}, mean edge {}\nsource vertex {}\n\n",
        r.mesh.vertices, r.mesh.faces, r.mesh.total_area, r.mesh.mean_edge_length, r.source
    );
    s += &text_table(&BALL_HEADER, &ball_cells(r));
    if let Some(e) = &r.exclusion {
        s += &format!(
            "\nexclusion N={}: vertices {:?}, energy {}, {} pairs, {} in band, {} hard\n",
            e.n_points, e.vertices, e.energy, e.pairs_checked, e.violations_in_band, e.hard_violations
        );
    }
    s += "\n";
    for c in &r.checks {
        s += &format!("{} {}\n", if c.pass { "PASS" } else { "FAIL" }, c.name);
    }
    s
}

fn solution_csv(rec: &SolutionRecord) -> String {
    let mut on_boundary = vec![false; rec.u.len()];
    rec.boundary.iter().for_each(|&i| on_boundary[i] = true);
    let mut s = String::from("vertex,u,contact,in_ball,boundary\n");
    for i in 0..rec.u.len() {
        s += &format!("{i},{:e},{},{},{}\n", rec.u[i], rec.contact[i] as u8, rec.in_ball[i] as u8, on_boundary[i] as u8);
    }
    s
}

#[derive(Serialize)]
struct GenConfig<'a> {
    command: &'static str,
    kind: &'a str,
    subdiv: u32,
    axes: Option<[f64; 3]>,
}

pub fn generate(args: &MeshGenArgs) -> Result<Outcome> {
    let (mesh, axes) = match args.kind.as_str() {
        "icosphere" => (icosphere(args.subdiv)?, None),
        "ellipsoid" => {
            let axes = match args.axes.as_slice() {
                [a, b, c] => [*a, *b, *c],
                _ => bail!("expected three semi-axes"),
            };
            (ellipsoid(axes, args.subdiv)?, Some(axes))
        }
        other => bail!("unknown mesh kind {other:?}; use icosphere or ellipsoid"),
    };
    let prov = Provenance::new(GenConfig { command: "mesh-gen", kind: &args.kind, subdiv: args.subdiv, axes });
    let mut buf = Vec::new();
    write_off(&mesh, &mut buf)?;
    let text = String::from_utf8(buf)?;
    // comments go after the OFF keyword, which must open the file
    let (first, rest) = text.split_once('\n').unwrap_or((&text, ""));
    let body = format!("{first}\n{}{rest}", prov.comment_header()?);
    emit(args.out.as_deref(), &body)?;
    Ok(Outcome { checks_pass: true })
}
