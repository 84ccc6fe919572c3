//! Discrete Green energy of point configurations and its minimization.

use std::cmp::Ordering;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{bound_report, BoundReport};
use crate::error::{Error, Result};
use crate::geometry::{
    self, distance_unchecked, exp_map, horizontal_projection, log_map, random_point, ManifoldId,
    Point, TangentVector,
};
use crate::kernel::KernelTable;

/// Tolerance on a saturated exclusion radius (`N = 2`, `r_N = D`). The optimum sits on
/// the cut locus, which the line search never enters, so it is only approached.
pub const SATURATION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    pub manifold: ManifoldId,
    pub points: Vec<Point>,
}

impl Configuration {
    pub fn new(manifold: ManifoldId, points: Vec<Point>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "a configuration needs N >= 2 points, got {}",
                points.len()
            )));
        }
        for p in &points {
            p.validate(manifold)?;
        }
        Ok(Configuration { manifold, points })
    }

    /// `n` independent uniform points.
    pub fn random<R: rand::Rng + ?Sized>(m: ManifoldId, n: usize, rng: &mut R) -> Result<Self> {
        let points = (0..n)
            .map(|_| random_point(m, rng))
            .collect::<Result<Vec<_>>>()?;
        Configuration::new(m, points)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Indices sorted lexicographically by ambient coordinates; the summation order
    /// of the energy, so that it does not depend on how the points are listed.
    fn canonical_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.points.len()).collect();
        idx.sort_by(|&a, &b| {
            let (pa, pb) = (self.points[a].ambient(), self.points[b].ambient());
            pa.iter()
                .zip(pb)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
                .then(a.cmp(&b))
        });
        idx
    }

    fn pair_distance(&self, i: usize, j: usize) -> f64 {
        distance_unchecked(self.manifold, self.points[i].ambient(), self.points[j].ambient())
    }
}

/// `sum_{i != j} phi(d(x_i, x_j))`, or the first coincident pair.
fn energy_or_collision(table: &KernelTable, cfg: &Configuration) -> Result<std::result::Result<f64, (usize, usize)>> {
    check_table(table, cfg)?;
    let order = cfg.canonical_order();
    let mut sum = 0.0;
    for (a, &i) in order.iter().enumerate() {
        for &j in &order[a + 1..] {
            let d = cfg.pair_distance(i, j);
            if d <= geometry::ZERO_DISTANCE {
                return Ok(Err((i.min(j), i.max(j))));
            }
            sum += table.phi(d)?;
        }
    }
    Ok(Ok(2.0 * sum))
}

fn check_table(table: &KernelTable, cfg: &Configuration) -> Result<()> {
    if table.manifold != cfg.manifold {
        return Err(Error::InvalidArgument(format!(
            "kernel table is for {}, configuration lives on {}",
            table.manifold, cfg.manifold
        )));
    }
    Ok(())
}

/// Green energy over ordered pairs. Coincident points are reported as
/// [`Error::CoincidentPoints`], the signal for infinite energy.
pub fn green_energy(table: &KernelTable, cfg: &Configuration) -> Result<f64> {
    energy_or_collision(table, cfg)?.map_err(|(i, j)| Error::CoincidentPoints { i, j })
}

/// Riemannian gradient of the energy at every point.
pub fn riemannian_gradient(table: &KernelTable, cfg: &Configuration) -> Result<Vec<TangentVector>> {
    check_table(table, cfg)?;
    let m = cfg.manifold;
    let n = cfg.len();
    let mut grads: Vec<Vec<f64>> = vec![vec![0.0; cfg.points[0].ambient().len()]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let d = cfg.pair_distance(i, j);
            if d <= geometry::ZERO_DISTANCE {
                return Err(Error::CoincidentPoints {
                    i: i.min(j),
                    j: i.max(j),
                });
            }
            // phi' vanishes at the diameter, so a pair on the cut locus exerts no force
            if m.diameter() - d < geometry::CUT_LOCUS_BAND {
                continue;
            }
            let l = log_map(m, &cfg.points[i], &cfg.points[j])?;
            let d = l.norm();
            let coeff = -2.0 * table.phi_prime(d)? / d;
            for (g, v) in grads[i].iter_mut().zip(&l.vec) {
                *g += coeff * v;
            }
        }
    }
    Ok(cfg
        .points
        .iter()
        .zip(grads)
        .map(|(p, g)| TangentVector {
            base: p.clone(),
            vec: g,
        })
        .collect())
}

/// Minimum pairwise distance.
pub fn separation(cfg: &Configuration) -> f64 {
    let n = cfg.len();
    let mut best = f64::INFINITY;
    for i in 0..n {
        for j in i + 1..n {
            best = best.min(cfg.pair_distance(i, j));
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// `dsep >= C_M (N - 1)^(-1/n)`
    Constant,
    /// `dsep >= r_N`
    Radius,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub kind: BoundKind,
    pub holds: bool,
    pub dsep: f64,
    pub bound: f64,
    /// `dsep - bound`
    pub margin: f64,
    /// The bound is the diameter and can only be approached.
    pub saturated: bool,
}

pub fn verify_separation_bound(cfg: &Configuration, kind: BoundKind) -> Result<BoundCheck> {
    let rep = bound_report(cfg.manifold, cfg.len())?;
    Ok(check_against(&rep, separation(cfg), kind))
}

fn check_against(rep: &BoundReport, dsep: f64, kind: BoundKind) -> BoundCheck {
    let (bound, saturated) = match kind {
        BoundKind::Constant => (rep.bound_constant, false),
        BoundKind::Radius => (rep.r_n, rep.r_n_saturated),
    };
    let margin = dsep - bound;
    let holds = dsep > 0.0 && if saturated { margin >= -SATURATION_TOL } else { margin >= 0.0 };
    BoundCheck {
        kind,
        holds,
        dsep,
        bound,
        margin,
        saturated,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmijoOptions {
    pub c1: f64,
    pub shrink: f64,
    pub max_backtracks: usize,
}

impl Default for ArmijoOptions {
    fn default() -> Self {
        ArmijoOptions {
            c1: 1e-4,
            shrink: 0.5,
            max_backtracks: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOptions {
    pub max_iters: usize,
    /// Gradient tolerance per point; convergence at `|grad| <= grad_tol * N`.
    pub grad_tol: f64,
    pub armijo: ArmijoOptions,
    pub restarts: usize,
    pub seed: u64,
    /// Trial steps that bring a pair closer than this are rejected.
    pub min_dist_floor: f64,
    /// Trial steps that bring a pair within this of the diameter are rejected.
    pub cut_locus_margin: f64,
    /// Largest displacement of any point in one step, as a fraction of the diameter.
    pub max_step_fraction: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            max_iters: 20_000,
            grad_tol: 1e-8,
            armijo: ArmijoOptions::default(),
            restarts: 8,
            seed: 0,
            min_dist_floor: 1e-9,
            cut_locus_margin: 1e-9,
            max_step_fraction: 0.25,
        }
    }
}

impl MinimizeOptions {
    fn validate(&self) -> Result<()> {
        let a = &self.armijo;
        if !(self.grad_tol > 0.0) {
            return Err(Error::InvalidArgument("grad_tol must be positive".into()));
        }
        if !(a.c1 > 0.0 && a.c1 < 1.0) {
            return Err(Error::InvalidArgument("Armijo c1 must lie in (0, 1)".into()));
        }
        if !(a.shrink > 0.0 && a.shrink < 1.0) {
            return Err(Error::InvalidArgument("Armijo shrink must lie in (0, 1)".into()));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("restarts must be at least 1".into()));
        }
        if !(self.min_dist_floor >= 0.0 && self.cut_locus_margin >= 0.0) {
            return Err(Error::InvalidArgument("distance guards must be non-negative".into()));
        }
        if !(self.max_step_fraction > 0.0) {
            return Err(Error::InvalidArgument("max_step_fraction must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    GradientTolerance,
    /// No step length passed the line search; the iterate is stationary to working precision.
    LineSearchStalled,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartSummary {
    pub index: usize,
    pub seed: u64,
    pub energy: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub stop: StopReason,
    pub dsep: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeReport {
    pub final_config: Configuration,
    pub energy: f64,
    /// Energy of the start and after every accepted step of the winning restart.
    pub energy_trace: Vec<f64>,
    pub grad_norm_final: f64,
    pub dsep_final: f64,
    pub bound: BoundReport,
    /// `dsep - C_M (N - 1)^(-1/n)`
    pub bound_margin: f64,
    /// `dsep - r_N`
    pub r_n_margin: f64,
    pub iterations: usize,
    pub restarts_used: usize,
    pub best_restart: usize,
    pub stop: StopReason,
    pub restarts: Vec<RestartSummary>,
}

impl MinimizeReport {
    pub fn check(&self, kind: BoundKind) -> BoundCheck {
        check_against(&self.bound, self.dsep_final, kind)
    }
}

/// Where the descent starts.
#[derive(Debug, Clone)]
pub enum Start {
    /// Independent uniform points for every restart.
    Random(usize),
    /// The first restart starts here; further restarts are uniform.
    From(Configuration),
}

/// Seed of restart `k`: a splitmix64 step, so that neighbouring seeds give unrelated streams.
pub fn restart_seed(seed: u64, k: usize) -> u64 {
    let mut z = seed.wrapping_add((k as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct RunResult {
    cfg: Configuration,
    energy: f64,
    trace: Vec<f64>,
    grad_norm: f64,
    iterations: usize,
    stop: StopReason,
}

pub fn minimize(table: &KernelTable, start: Start, opts: &MinimizeOptions) -> Result<MinimizeReport> {
    opts.validate()?;
    let m = table.manifold;
    if !m.supports_points() {
        return Err(Error::UnsupportedPointOperation(m));
    }
    let n = match &start {
        Start::Random(n) => *n,
        Start::From(cfg) => {
            check_table(table, cfg)?;
            cfg.len()
        }
    };
    if n < 2 {
        return Err(Error::InvalidArgument(format!("N = {n}; need N >= 2")));
    }
    let bound = bound_report(m, n)?;

    let runs: Vec<(usize, u64, Result<RunResult>)> = (0..opts.restarts)
        .into_par_iter()
        .map(|k| {
            let seed = restart_seed(opts.seed, k);
            let res = (|| {
                let cfg0 = match (&start, k) {
                    (Start::From(cfg), 0) => cfg.clone(),
                    _ => feasible_start(table, n, seed, opts)?,
                };
                descend(table, cfg0, opts)
            })();
            (k, seed, res)
        })
        .collect();

    let mut summaries = Vec::new();
    let mut best: Option<(usize, RunResult)> = None;
    let mut last_err = None;
    for (k, seed, res) in runs {
        match res {
            Ok(r) => {
                summaries.push(RestartSummary {
                    index: k,
                    seed,
                    energy: r.energy,
                    grad_norm: r.grad_norm,
                    iterations: r.iterations,
                    stop: r.stop,
                    dsep: separation(&r.cfg),
                });
                // ties go to the lower restart index, which comes first
                if best.as_ref().is_none_or(|(_, b)| r.energy < b.energy) {
                    best = Some((k, r));
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    let Some((k, r)) = best else {
        return Err(Error::Infeasible(format!(
            "no restart produced a feasible configuration: {}",
            last_err.map(|e| e.to_string()).unwrap_or_default()
        )));
    };
    let dsep = separation(&r.cfg);
    Ok(MinimizeReport {
        energy: r.energy,
        energy_trace: r.trace,
        grad_norm_final: r.grad_norm,
        dsep_final: dsep,
        bound_margin: dsep - bound.bound_constant,
        r_n_margin: dsep - bound.r_n,
        bound,
        iterations: r.iterations,
        restarts_used: summaries.len(),
        best_restart: k,
        stop: r.stop,
        restarts: summaries,
        final_config: r.cfg,
    })
}

fn feasible_start(table: &KernelTable, n: usize, seed: u64, opts: &MinimizeOptions) -> Result<Configuration> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..100 {
        let cfg = Configuration::random(table.manifold, n, &mut rng)?;
        if admissible(&cfg, opts) {
            return Ok(cfg);
        }
    }
    Err(Error::Infeasible(format!(
        "100 random starts with N = {n} all violated the distance guards"
    )))
}

fn admissible(cfg: &Configuration, opts: &MinimizeOptions) -> bool {
    let hi = cfg.manifold.diameter() - opts.cut_locus_margin;
    let n = cfg.len();
    (0..n).all(|i| {
        (i + 1..n).all(|j| {
            let d = cfg.pair_distance(i, j);
            d >= opts.min_dist_floor.max(geometry::ZERO_DISTANCE) && d <= hi
        })
    })
}

fn step(cfg: &Configuration, dirs: &[Vec<f64>], t: f64) -> Result<Configuration> {
    let m = cfg.manifold;
    let points = cfg
        .points
        .iter()
        .zip(dirs)
        .map(|(p, g)| {
            let v = TangentVector {
                base: p.clone(),
                vec: g.iter().map(|c| -t * c).collect(),
            };
            exp_map(m, &v)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Configuration {
        manifold: m,
        points,
    })
}

fn descend(table: &KernelTable, cfg0: Configuration, opts: &MinimizeOptions) -> Result<RunResult> {
    if !admissible(&cfg0, opts) {
        return Err(Error::Infeasible(
            "starting configuration violates the distance guards".into(),
        ));
    }
    let m = cfg0.manifold;
    let n = cfg0.len();
    let tol = opts.grad_tol * n as f64;
    let max_disp = opts.max_step_fraction * m.diameter();
    let mut cfg = cfg0;
    let mut energy = green_energy(table, &cfg)?;
    let mut trace = vec![energy];
    let mut grad: Vec<Vec<f64>> = riemannian_gradient(table, &cfg)?.into_iter().map(|g| g.vec).collect();
    let mut prev: Option<(Vec<Vec<f64>>, f64)> = None;
    let mut t_prev = 1.0;

    for iter in 0..opts.max_iters {
        let gsq: f64 = grad.iter().flatten().map(|c| c * c).sum();
        let gnorm = gsq.sqrt();
        if gnorm <= tol {
            return Ok(RunResult { cfg, energy, trace, grad_norm: gnorm, iterations: iter, stop: StopReason::GradientTolerance });
        }
        let max_g = grad
            .iter()
            .map(|g| g.iter().map(|c| c * c).sum::<f64>().sqrt())
            .fold(0.0, f64::max);

        // Barzilai-Borwein length from the previous step, transported by projection
        let mut t = match &prev {
            Some((old_grad, t_old)) => {
                let (mut ss, mut sy) = (0.0, 0.0);
                for (i, og) in old_grad.iter().enumerate() {
                    let mut s: Vec<f64> = og.iter().map(|c| -t_old * c).collect();
                    let mut o = og.clone();
                    horizontal_projection(m, cfg.points[i].ambient(), &mut s);
                    horizontal_projection(m, cfg.points[i].ambient(), &mut o);
                    for ((sv, ov), gv) in s.iter().zip(&o).zip(&grad[i]) {
                        ss += sv * sv;
                        sy += sv * (gv - ov);
                    }
                }
                if sy > 0.0 { ss / sy } else { 2.0 * t_prev }
            }
            None => 1.0 / gnorm,
        };
        t = t.min(max_disp / max_g);

        let mut accepted = None;
        for _ in 0..=opts.armijo.max_backtracks {
            let trial = step(&cfg, &grad, t)?;
            if admissible(&trial, opts) {
                if let Ok(e) = green_energy(table, &trial) {
                    if e < energy && e <= energy - opts.armijo.c1 * t * gsq {
                        accepted = Some((trial, e));
                        break;
                    }
                }
            }
            t *= opts.armijo.shrink;
        }
        let Some((next, e)) = accepted else {
            return Ok(RunResult { cfg, energy, trace, grad_norm: gnorm, iterations: iter, stop: StopReason::LineSearchStalled });
        };
        cfg = next;
        energy = e;
        trace.push(e);
        let new_grad: Vec<Vec<f64>> = riemannian_gradient(table, &cfg)?.into_iter().map(|g| g.vec).collect();
        prev = Some((std::mem::replace(&mut grad, new_grad), t));
        t_prev = t;
    }
    let gnorm = grad.iter().flatten().map(|c| c * c).sum::<f64>().sqrt();
    let stop = if gnorm <= tol { StopReason::GradientTolerance } else { StopReason::MaxIterations };
    Ok(RunResult { cfg, energy, trace, grad_norm: gnorm, iterations: opts.max_iters, stop })
}

/// Serialized configuration with the run metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigurationRecord {
    pub manifold: ManifoldId,
    pub n_points: usize,
    pub points: Vec<Vec<f64>>,
    pub seed: Option<u64>,
    pub options: Option<MinimizeOptions>,
    pub energy: Option<f64>,
    pub dsep: Option<f64>,
}

impl ConfigurationRecord {
    pub fn from_config(cfg: &Configuration) -> Self {
        ConfigurationRecord {
            manifold: cfg.manifold,
            n_points: cfg.len(),
            points: cfg.points.iter().map(|p| p.ambient().to_vec()).collect(),
            seed: None,
            options: None,
            energy: None,
            dsep: Some(separation(cfg)),
        }
    }

    pub fn from_report(rep: &MinimizeReport, opts: &MinimizeOptions) -> Self {
        ConfigurationRecord {
            seed: Some(opts.seed),
            options: Some(*opts),
            energy: Some(rep.energy),
            dsep: Some(rep.dsep_final),
            ..Self::from_config(&rep.final_config)
        }
    }

    pub fn to_config(&self) -> Result<Configuration> {
        if self.points.len() != self.n_points {
            return Err(Error::DimensionMismatch {
                expected: self.n_points,
                got: self.points.len(),
            });
        }
        let points = self
            .points
            .iter()
            .map(|p| Point::from_ambient(self.manifold, p.clone()))
            .collect::<Result<Vec<_>>>()?;
        Configuration::new(self.manifold, points)
    }
}

/// Energy trace as CSV with columns `step,energy`.
pub fn write_trace_csv<W: Write>(trace: &[f64], mut w: W) -> Result<()> {
    writeln!(w, "step,energy")?;
    for (i, e) in trace.iter().enumerate() {
        writeln!(w, "{i},{e:e}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{random_unit_tangent, Isometry};
    use rand::seq::SliceRandom;
    use std::collections::HashMap;
    use std::f64::consts::PI;
    use std::sync::{Mutex, OnceLock};

    fn table(m: ManifoldId) -> KernelTable {
        static CACHE: OnceLock<Mutex<HashMap<ManifoldId, KernelTable>>> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(t) = cache.lock().unwrap().get(&m) {
            return t.clone();
        }
        let t = KernelTable::build_default(m).unwrap();
        cache.lock().unwrap().insert(m, t.clone());
        t
    }

    fn s2(v: &[[f64; 3]]) -> Configuration {
        let m = ManifoldId::Sphere(2);
        Configuration::new(m, v.iter().map(|p| Point::from_ambient(m, p.to_vec()).unwrap()).collect()).unwrap()
    }

    fn octahedron() -> Configuration {
        s2(&[[1., 0., 0.], [-1., 0., 0.], [0., 1., 0.], [0., -1., 0.], [0., 0., 1.], [0., 0., -1.]])
    }

    fn tetrahedron() -> Configuration {
        s2(&[[1., 1., 1.], [1., -1., -1.], [-1., 1., -1.], [-1., -1., 1.]])
    }

    #[test]
    fn energy_examples() {
        let t = table(ManifoldId::Sphere(2));
        let pair = s2(&[[0., 0., 1.], [0., 0., -1.]]);
        assert_eq!(green_energy(&t, &pair).unwrap(), 2.0 * t.phi(PI).unwrap());
        let tet = tetrahedron();
        let a = (-1.0f64 / 3.0).acos();
        for i in 0..4 {
            for j in i + 1..4 {
                assert!((tet.pair_distance(i, j) - a).abs() < 1e-15);
            }
        }
        let want = 12.0 * t.phi(a).unwrap();
        assert!((green_energy(&t, &tet).unwrap() - want).abs() < 1e-13 * want.abs());
        let dup = s2(&[[0., 0., 1.], [1., 0., 0.], [0., 0., 1.]]);
        assert!(matches!(green_energy(&t, &dup), Err(Error::CoincidentPoints { i: 0, j: 2 })));
    }

    #[test]
    fn energy_is_permutation_invariant_bitwise() {
        let m = ManifoldId::ComplexProj(2);
        let t = table(m);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut cfg = Configuration::random(m, 12, &mut rng).unwrap();
        let e = green_energy(&t, &cfg).unwrap();
        for _ in 0..5 {
            cfg.points.shuffle(&mut rng);
            assert_eq!(green_energy(&t, &cfg).unwrap().to_bits(), e.to_bits());
        }
    }

    #[test]
    fn separation_examples() {
        assert_eq!(separation(&s2(&[[0., 0., 1.], [0., 0., -1.]])), PI);
        assert!((separation(&octahedron()) - PI / 2.0).abs() < 1e-15);
        assert_eq!(separation(&s2(&[[0., 0., 1.], [1., 0., 0.], [0., 0., 1.]])), 0.0);
    }

    #[test]
    fn bound_examples() {
        let c = verify_separation_bound(&tetrahedron(), BoundKind::Constant).unwrap();
        assert!(c.holds);
        assert!((c.bound - 2.0 / 3f64.sqrt()).abs() < 1e-14);
        assert!((c.margin - ((-1.0f64 / 3.0).acos() - 2.0 / 3f64.sqrt())).abs() < 1e-14);
        let five = s2(&[[1., 0., 0.], [-1., 0., 0.], [0., 1., 0.], [0., -1., 0.], [0., 0., 1.]]);
        let r = verify_separation_bound(&five, BoundKind::Radius).unwrap();
        assert!((r.bound - PI / 3.0).abs() < 1e-12);
        let dup = s2(&[[0., 0., 1.], [1., 0., 0.], [0., 0., 1.]]);
        assert!(!verify_separation_bound(&dup, BoundKind::Constant).unwrap().holds);
        assert!(!verify_separation_bound(&dup, BoundKind::Radius).unwrap().holds);
    }

    #[test]
    fn gradient_examples() {
        let t = table(ManifoldId::Sphere(2));
        let pair = s2(&[[0., 0., 1.], [0., 0., -1.]]);
        assert!(riemannian_gradient(&t, &pair).unwrap().iter().all(|g| g.norm() == 0.0));
        let g = riemannian_gradient(&t, &octahedron()).unwrap();
        let norm: f64 = g.iter().map(|v| v.norm().powi(2)).sum::<f64>().sqrt();
        assert!(norm < 1e-9, "{norm}");
    }

    /// Relative error of the gradient against a central difference along a random direction.
    fn fd_error(t: &KernelTable, cfg: &Configuration, rng: &mut ChaCha8Rng) -> f64 {
        let m = cfg.manifold;
        let grad = riemannian_gradient(t, cfg).unwrap();
        let dirs: Vec<TangentVector> = cfg.points.iter().map(|p| random_unit_tangent(m, p, rng).unwrap()).collect();
        let analytic: f64 = grad.iter().zip(&dirs).map(|(g, d)| g.inner(d)).sum();
        let h = 1e-6;
        let moved = |s: f64| {
            let pts = dirs.iter().map(|d| exp_map(m, &d.scaled(s)).unwrap()).collect();
            green_energy(t, &Configuration::new(m, pts).unwrap()).unwrap()
        };
        let fd = (moved(h) - moved(-h)) / (2.0 * h);
        (fd - analytic).abs() / analytic.abs()
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for m in [ManifoldId::Sphere(2), ManifoldId::RealProj(2), ManifoldId::QuatProj(1)] {
            let t = table(m);
            for _ in 0..10 {
                let cfg = Configuration::random(m, 6, &mut rng).unwrap();
                let err = fd_error(&t, &cfg, &mut rng);
                assert!(err < 1e-5, "{m}: {err}");
            }
        }
    }

    #[test]
    fn known_minimizers_on_s2() {
        let t = table(ManifoldId::Sphere(2));
        let opts = MinimizeOptions { restarts: 8, seed: 1, ..Default::default() };
        let rep = minimize(&t, Start::Random(2), &opts).unwrap();
        assert!((rep.dsep_final - PI).abs() < 1e-6, "{}", rep.dsep_final);
        let rep = minimize(&t, Start::Random(6), &MinimizeOptions { restarts: 16, ..opts }).unwrap();
        assert!((rep.dsep_final - PI / 2.0).abs() < 1e-4);
        assert!(rep.energy_trace.windows(2).all(|w| w[1] < w[0]));
        assert!(rep.check(BoundKind::Constant).holds && rep.check(BoundKind::Radius).holds);
    }

    #[test]
    fn minimize_is_deterministic() {
        let m = ManifoldId::RealProj(3);
        let t = table(m);
        let opts = MinimizeOptions { restarts: 4, seed: 99, max_iters: 300, ..Default::default() };
        let a = minimize(&t, Start::Random(7), &opts).unwrap();
        let b = minimize(&t, Start::Random(7), &opts).unwrap();
        assert_eq!(a.final_config, b.final_config);
        assert_eq!(a.energy.to_bits(), b.energy.to_bits());
        assert_eq!(a.energy_trace, b.energy_trace);
    }

    #[test]
    fn isometries_commute_with_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for m in [ManifoldId::Sphere(3), ManifoldId::ComplexProj(2), ManifoldId::QuatProj(1)] {
            let t = table(m);
            let cfg = Configuration::random(m, 9, &mut rng).unwrap();
            let iso = Isometry::random(m, &mut rng).unwrap();
            let moved = Configuration::new(m, cfg.points.iter().map(|p| iso.apply(p).unwrap()).collect()).unwrap();
            let (e0, e1) = (green_energy(&t, &cfg).unwrap(), green_energy(&t, &moved).unwrap());
            assert!((e0 - e1).abs() < 1e-10 * e0.abs().max(1.0), "{m}");
        }
    }

    #[test]
    fn invalid_inputs() {
        let t = table(ManifoldId::Sphere(2));
        let opts = MinimizeOptions::default();
        assert!(minimize(&t, Start::Random(1), &opts).is_err());
        let bad = MinimizeOptions { armijo: ArmijoOptions { c1: 1.5, ..Default::default() }, ..opts };
        assert!(minimize(&t, Start::Random(3), &bad).is_err());
        let other = table(ManifoldId::Sphere(3));
        assert!(green_energy(&other, &octahedron()).is_err());
    }

    #[test]
    fn record_round_trip() {
        let cfg = tetrahedron();
        let rec = ConfigurationRecord::from_config(&cfg);
        let text = serde_json::to_string(&rec).unwrap();
        let back: ConfigurationRecord = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_config().unwrap(), cfg);
        let mut csv = Vec::new();
        write_trace_csv(&[3.0, 2.0], &mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap(), "step,energy\n0,3e0\n1,2e0\n");
    }

    #[test]
    fn restart_seeds_differ() {
        let s: Vec<u64> = (0..8).map(|k| restart_seed(5, k)).collect();
        let mut u = s.clone();
        u.sort();
        u.dedup();
        assert_eq!(u.len(), s.len());
    }
}
