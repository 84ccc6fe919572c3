//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero if any fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use greensep::constants::{constant_consistency_check, volume_quotient_constant};
use greensep::geometry::random_unit_tangent;
use greensep::mesh::{
    ball_area, check_connected, check_mvp, check_nested, compare_with_geodesic_ball, ellipsoid, geodesic_distances,
    icosphere, inner_ball_fraction, local_mean_value_set, mesh_green, mesh_minimize_energy, solve_obstacle_with,
    sphere_distances, within_one_ring, MeshEnergyOptions,
};
use greensep::{
    bound_report, cross_constant, exp_map, green_energy, minimize, riemannian_gradient, BoundKind, Configuration,
    KernelTable, ManifoldId, MinimizeOptions, ObstacleOptions, Result, Start, TangentVector, TriMesh,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

const POINT_SPACES: [ManifoldId; 5] = [
    ManifoldId::Sphere(2),
    ManifoldId::Sphere(3),
    ManifoldId::RealProj(2),
    ManifoldId::ComplexProj(2),
    ManifoldId::QuatProj(1),
];

fn rel(x: f64, y: f64) -> f64 {
    (x - y).abs() / y.abs()
}

/// vol(S^n) by the two-step recurrence from vol(S^0) = 2 and vol(S^1) = 2 pi.
fn sphere_volume_recurrence(n: usize) -> f64 {
    let mut v = [2.0, 2.0 * PI];
    for k in 2..=n {
        v = [v[1], 2.0 * PI * v[0] / (k - 1) as f64];
    }
    if n == 0 {
        v[0]
    } else {
        v[1]
    }
}

fn criterion_1() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    let mut fails = Vec::new();
    let s2 = cross_constant(ManifoldId::Sphere(2))?;
    if (s2 - 2.0).abs() > 1e-14 {
        fails.push(format!("C(S^2) = {s2}"));
    }
    let mut expect: Vec<(ManifoldId, f64)> = Vec::new();
    for m in 1..=3 {
        expect.push((ManifoldId::ComplexProj(m), 1.0));
    }
    for m in 1..=2usize {
        expect.push((ManifoldId::QuatProj(m), ((2 * m + 1) as f64).powf(-1.0 / (4 * m) as f64)));
    }
    expect.push((ManifoldId::OctoProj2, 165f64.powf(-1.0 / 16.0)));
    for n in 2..=16 {
        let c = (n as f64 * sphere_volume_recurrence(n) / sphere_volume_recurrence(n - 1)).powf(1.0 / n as f64);
        expect.push((ManifoldId::Sphere(n), c));
    }
    for m in 1..=16 {
        let c = (m as f64 * 0.5 * sphere_volume_recurrence(m) / sphere_volume_recurrence(m - 1)).powf(1.0 / m as f64);
        expect.push((ManifoldId::RealProj(m), c));
    }
    for (m, want) in &expect {
        let got = cross_constant(*m)?;
        let e = rel(got, *want);
        worst = worst.max(e);
        if e > 1e-12 {
            fails.push(format!("{m}: {got} vs {want}"));
        }
        let quotient = volume_quotient_constant(*m)?;
        if rel(quotient, got) > 1e-12 || constant_consistency_check(*m).is_err() {
            fails.push(format!("{m}: quotient route {quotient}"));
        }
    }
    outcome(
        fails.is_empty(),
        format!("{} spaces, worst relative error {worst:.1e}{}", expect.len(), list(&fails)),
    )
}

fn list(fails: &[String]) -> String {
    if fails.is_empty() {
        String::new()
    } else {
        format!("; failures: {}", fails.join(", "))
    }
}

fn criterion_2() -> Result<Outcome> {
    let t = KernelTable::build_default(ManifoldId::Sphere(2))?;
    let radii: Vec<f64> = (1..=200).map(|i| PI * i as f64 / 201.0).collect();
    let mut worst_prime: f64 = 0.0;
    let mut diffs = Vec::new();
    for &r in &radii {
        let oracle = -(0.5 * r).tan().recip() / (4.0 * PI);
        worst_prime = worst_prime.max(rel(t.phi_prime(r)?, oracle));
        diffs.push(t.phi(r)? + (0.5 * r).sin().ln() / (2.0 * PI));
    }
    let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let sd = (diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / diffs.len() as f64).sqrt();
    let residual = t.mean_residual.abs();
    let pass = worst_prime < 1e-8 && sd < 1e-8 && residual < 1e-8 * 4.0 * PI;
    outcome(
        pass,
        format!("max rel err phi' {worst_prime:.1e}, sd(phi - log oracle) {sd:.1e}, mean residual {residual:.1e}"),
    )
}

fn fd_error(t: &KernelTable, cfg: &Configuration, rng: &mut ChaCha8Rng) -> Result<f64> {
    let m = cfg.manifold;
    let grad = riemannian_gradient(t, cfg)?;
    let dirs: Vec<TangentVector> =
        cfg.points.iter().map(|p| random_unit_tangent(m, p, rng)).collect::<Result<_>>()?;
    let analytic: f64 = grad.iter().zip(&dirs).map(|(g, d)| g.inner(d)).sum();
    let h = 1e-6;
    let moved = |s: f64| -> Result<f64> {
        let pts = dirs.iter().map(|d| exp_map(m, &d.scaled(s))).collect::<Result<_>>()?;
        green_energy(t, &Configuration::new(m, pts)?)
    };
    let fd = (moved(h)? - moved(-h)?) / (2.0 * h);
    Ok((fd - analytic).abs() / analytic.abs())
}

fn criterion_3() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut parts = Vec::new();
    let mut pass = true;
    for m in POINT_SPACES {
        let t = KernelTable::build_default(m)?;
        let mut worst: f64 = 0.0;
        for k in 0..50 {
            let cfg = Configuration::random(m, 4 + k % 9, &mut rng)?;
            worst = worst.max(fd_error(&t, &cfg, &mut rng)?);
        }
        pass &= worst < 1e-5;
        parts.push(format!("{m} {worst:.1e}"));
    }
    outcome(pass, format!("worst relative error per space: {}", parts.join(", ")))
}

fn criterion_4() -> Result<Outcome> {
    let t = KernelTable::build_default(ManifoldId::Sphere(2))?;
    let targets = [(2, PI), (3, 2.0 * PI / 3.0), (4, (-1.0f64 / 3.0).acos()), (6, PI / 2.0)];
    let mut pass = true;
    let mut parts = Vec::new();
    for (n, want) in targets {
        let opts = MinimizeOptions { restarts: 16, seed: 4, ..Default::default() };
        let rep = minimize(&t, Start::Random(n), &opts)?;
        let err = (rep.dsep_final - want).abs();
        pass &= err < 1e-4;
        parts.push(format!("N={n} err {err:.1e}"));
    }
    outcome(pass, parts.join(", "))
}

fn criterion_5() -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    for m in POINT_SPACES {
        let t = KernelTable::build_default(m)?;
        let (mut min_c, mut min_r, mut min_gap) = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut saturated_margin = 0.0;
        let mut fails = Vec::new();
        for n in 2..=32 {
            let opts = MinimizeOptions { restarts: 4, seed: n as u64, ..Default::default() };
            let rep = minimize(&t, Start::Random(n), &opts)?;
            let c = rep.check(BoundKind::Constant);
            let r = rep.check(BoundKind::Radius);
            let b = bound_report(m, n)?;
            let gap = b.r_n - b.bound_constant;
            min_c = min_c.min(c.margin);
            if r.saturated {
                saturated_margin = r.margin;
            } else {
                min_r = min_r.min(r.margin);
            }
            min_gap = min_gap.min(gap);
            if !(c.holds && r.holds && gap >= 0.0) {
                fails.push(format!("N={n}"));
            }
        }
        pass &= fails.is_empty();
        parts.push(format!(
            "{m}: min margins C {min_c:.3}, r_N {min_r:.2e} (N=2 saturated {saturated_margin:.1e}), \
             r_N - C(N-1)^(-1/n) {min_gap:.3}{}",
            list(&fails)
        ));
    }
    outcome(pass, parts.join("; "))
}

const VOLUMES: [f64; 3] = [0.05, 0.15, 0.3];

/// Generic source vertex, away from the icosahedron's symmetry axes.
fn sphere_source(m: &TriMesh) -> usize {
    m.nearest_vertex([0.3, 0.5, 0.8])
}

fn criterion_6() -> Result<Outcome> {
    let opts = ObstacleOptions::default();
    let mut errs = vec![[0.0; 3]; 3];
    for (li, level) in [3, 4, 5].into_iter().enumerate() {
        let m = icosphere(level)?;
        let g = mesh_green(&m, sphere_source(&m))?;
        for (vi, f) in VOLUMES.iter().enumerate() {
            let a = f * m.total_area;
            let s = solve_obstacle_with(&m, &g, a, &opts)?;
            errs[vi][li] = (ball_area(&m, &s) - a).abs() / a;
        }
    }
    let mut pass = true;
    let mut parts = Vec::new();
    for (vi, f) in VOLUMES.iter().enumerate() {
        let e = errs[vi];
        let within = e[1] <= 0.02;
        let decreasing = e[0] > e[1] && e[1] > e[2];
        pass &= within && decreasing;
        parts.push(format!(
            "a/A={f}: {:.2}% / {:.2}% / {:.2}% (within 2%: {within}, decreasing: {decreasing})",
            100.0 * e[0],
            100.0 * e[1],
            100.0 * e[2]
        ));
    }
    outcome(pass, format!("relative area error at subdivisions 3/4/5: {}", parts.join(", ")))
}

fn criterion_7() -> Result<Outcome> {
    let opts = ObstacleOptions::default();
    let mut rels = vec![[0.0; 3]; 3];
    for (li, level) in [3, 4, 5].into_iter().enumerate() {
        let m = icosphere(level)?;
        let p = sphere_source(&m);
        let g = mesh_green(&m, p)?;
        let d = sphere_distances(&m, p)?;
        for (vi, f) in VOLUMES.iter().enumerate() {
            let s = solve_obstacle_with(&m, &g, f * m.total_area, &opts)?;
            rels[vi][li] = compare_with_geodesic_ball(&m, &s, &d).relative;
        }
    }
    let mut pass = true;
    let mut parts = Vec::new();
    for (vi, f) in VOLUMES.iter().enumerate() {
        let e = rels[vi];
        let within = e[1] <= 0.03;
        let decreasing = e[0] > e[1] && e[1] > e[2];
        pass &= within && decreasing;
        parts.push(format!(
            "a/A={f}: {:.2}% / {:.2}% / {:.2}% (within 3%: {within}, decreasing: {decreasing})",
            100.0 * e[0],
            100.0 * e[1],
            100.0 * e[2]
        ));
    }
    // negative control, at the finest level where the shape difference exceeds a ring
    let level = 6;
    let mut control = Vec::new();
    for (name, axes) in [("ellipsoid", [1.0, 1.0, 0.6]), ("sphere", [1.0, 1.0, 1.0])] {
        let m = ellipsoid(axes, level)?;
        let p = m.nearest_vertex([1.0, 0.0, 0.0]);
        let s = solve_obstacle_with(&m, &mesh_green(&m, p)?, 0.3 * m.total_area, &opts)?;
        let c = compare_with_geodesic_ball(&m, &s, &geodesic_distances(&m, p)?);
        control.push((name, c.outside_band_area / s.a));
    }
    let control_fails = control[0].1 > 0.0;
    let sphere_clean = control[1].1 == 0.0;
    pass &= control_fails && sphere_clean;
    outcome(
        pass,
        format!(
            "sphere symmetric difference / a at subdivisions 3/4/5: {}; control at subdivision {level}, \
             a/A=0.3, area beyond the band / a: ellipsoid {:.2e} (must be > 0: {control_fails}), \
             sphere {:.2e} (must be 0: {sphere_clean})",
            parts.join(", "),
            control[0].1,
            control[1].1
        ),
    )
}

fn criterion_8() -> Result<Outcome> {
    let opts = ObstacleOptions::default();
    let mut pass = true;
    let mut mvp = [0.0; 3];
    let mut connected = 0;
    let mut solutions = 0;
    for (li, level) in [3, 4, 5].into_iter().enumerate() {
        let m = icosphere(level)?;
        let g = mesh_green(&m, sphere_source(&m))?;
        for f in VOLUMES {
            let s = solve_obstacle_with(&m, &g, f * m.total_area, &opts)?;
            mvp[li] = f64::max(mvp[li], check_mvp(&m, &s, 20, 8)?.max_relative);
            solutions += 1;
            connected += check_connected(&m, &s) as usize;
        }
    }
    let mvp_ok = mvp[1] <= 0.05 && mvp[0] > mvp[1] && mvp[1] > mvp[2];
    pass &= mvp_ok;

    let chain = [0.05, 0.1, 0.2, 0.4];
    let mut nested = Vec::new();
    for (name, axes) in [("sphere", [1.0, 1.0, 1.0]), ("ellipsoid", [1.0, 1.0, 0.6])] {
        let m = ellipsoid(axes, 4)?;
        let g = mesh_green(&m, m.nearest_vertex([1.0, 0.2, 0.3]))?;
        let mut ok = true;
        for w in chain.windows(2) {
            ok &= check_nested(&m, &g, w[0] * m.total_area, w[1] * m.total_area, &opts)?;
        }
        for f in chain {
            let s = solve_obstacle_with(&m, &g, f * m.total_area, &opts)?;
            solutions += 1;
            connected += check_connected(&m, &s) as usize;
        }
        pass &= ok;
        nested.push(format!("{name} {ok}"));
    }
    pass &= connected == solutions;

    // inner ball fraction: sphere against pi^(-1/2), ellipsoid family bounded below
    let m = icosphere(4)?;
    let p = sphere_source(&m);
    let s = solve_obstacle_with(&m, &mesh_green(&m, p)?, 0.02 * m.total_area, &opts)?;
    let c_sphere = inner_ball_fraction(&s, &sphere_distances(&m, p)?);
    let sphere_ok = rel(c_sphere, PI.powf(-0.5)) <= 0.1;
    let mut c_min = f64::INFINITY;
    for axes in [[1.0, 1.0, 0.6], [1.0, 0.8, 0.6], [1.2, 1.0, 0.7]] {
        let m = ellipsoid(axes, 4)?;
        let p = m.nearest_vertex([1.0, 0.0, 0.0]);
        let g = mesh_green(&m, p)?;
        let d = geodesic_distances(&m, p)?;
        for f in [0.02, 0.05, 0.1] {
            let s = solve_obstacle_with(&m, &g, f * m.total_area, &opts)?;
            c_min = c_min.min(inner_ball_fraction(&s, &d));
        }
    }
    let bounded = c_min > 0.25;
    pass &= sphere_ok && bounded;
    outcome(
        pass,
        format!(
            "MVP deviation / oscillation at subdivisions 3/4/5: {:.2e} / {:.2e} / {:.2e}; nesting: {}; \
             connected {connected}/{solutions}; inner fraction sphere {c_sphere:.3} (pi^-1/2 = {:.3}), \
             ellipsoid family min {c_min:.3}",
            mvp[0],
            mvp[1],
            mvp[2],
            nested.join(", "),
            PI.powf(-0.5)
        ),
    )
}

fn criterion_9() -> Result<Outcome> {
    let opts = MeshEnergyOptions::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, axes) in [("icosphere", [1.0, 1.0, 1.0]), ("ellipsoid", [1.0, 1.0, 0.6])] {
        let m = ellipsoid(axes, 4)?;
        for n in [2, 4, 6, 8] {
            let r = mesh_minimize_energy(&m, n, 9, &opts)?;
            let ex = &r.exclusion;
            pass &= ex.hard_violations == 0 && ex.pairs_checked == n * (n - 1);
            parts.push(format!("{name} N={n}: {} hard, {} in band", ex.hard_violations, ex.violations.len() - ex.hard_violations));
        }
    }
    outcome(pass, parts.join(", "))
}

fn criterion_10() -> Result<Outcome> {
    let opts = ObstacleOptions::default();
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, axes) in [("sphere", [1.0, 1.0, 1.0]), ("ellipsoid", [1.0, 1.0, 0.6])] {
        let m = ellipsoid(axes, 4)?;
        let p = m.nearest_vertex([1.0, 0.0, 0.0]);
        let g = mesh_green(&m, p)?;
        for f in [0.04, 0.08] {
            let r = (f * m.total_area).sqrt();
            let loc = local_mean_value_set(&m, p, r, 1.2, &opts)?;
            let glob = solve_obstacle_with(&m, &g, loc.a_equivalent, &opts)?;
            let bad = within_one_ring(&m, &loc.set, &glob.ball_mask());
            let differ = loc.set.iter().zip(glob.ball_mask()).filter(|(x, y)| **x != *y).count();
            let ok = bad.is_empty() && !loc.touches_boundary && loc.set[p];
            pass &= ok;
            parts.push(format!("{name} r^2/A={f}: {differ} differing vertices, {} beyond the band", bad.len()));
        }
    }
    outcome(pass, parts.join(", "))
}

type Criterion = fn() -> Result<Outcome>;

fn main() {
    let criteria: [(&str, Criterion, Duration); 10] = [
        ("constants table", criterion_1, Duration::from_secs(1)),
        ("kernel oracle on S^2", criterion_2, Duration::from_secs(10)),
        ("gradient finite differences", criterion_3, Duration::from_secs(60)),
        ("known minimizers on S^2", criterion_4, Duration::from_secs(120)),
        ("separation bounds", criterion_5, Duration::from_secs(600)),
        ("harmonic ball volume", criterion_6, Duration::from_secs(300)),
        ("geodesic equivalence", criterion_7, Duration::from_secs(300)),
        ("MVP, nesting, connectedness", criterion_8, Duration::from_secs(300)),
        ("exclusion at mesh scale", criterion_9, Duration::from_secs(600)),
        ("local and global sets", criterion_10, Duration::from_secs(300)),
    ];
    let mut failed = 0;
    for (k, (name, run, budget)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match run() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let took = start.elapsed();
        let in_time = took <= budget;
        let ok = pass && in_time;
        failed += !ok as usize;
        println!(
            "criterion {:>2} {}: {name} [{:.1}s of {}s] {detail}",
            k + 1,
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            budget.as_secs(),
        );
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
