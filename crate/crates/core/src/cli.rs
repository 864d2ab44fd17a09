//! Command-line front end: `limit0`, `limitinf`, `solve` and `sweep`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Deserialize;

use crate::conformal::SCMap;
use crate::error::{Error, Result};
use crate::largelimit::{best_lifts, classify_states, enumerate_assignments, ClassKind, LargeLimit};
use crate::model::{director_from_tensor, BoundarySpec, MaterialParams, PTensor, PolygonSpec, Sides};
use crate::smalllimit::{locate_point_defects, trace_line_defects, DefectReport, PolarScan, SmallLimit};
use crate::solver::{
    diagnostics, hessian_min_eig, log_schedule, newton_solve, plan_branches, AnnulusGrid, BranchPlan, BranchRecord,
    DiagWeights, EntryStatus, NewtonOptions, Problem, SweepOptions,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_FAILED: i32 = 2;

pub const OUT_DIR_ENV: &str = "NEMEXT_OUT_DIR";
const MAP_TOL: f64 = 1e-14;

#[derive(Debug, Parser)]
#[command(name = "nemext", version, about = "Nematic equilibria outside regular polygons")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Small-hole limiting profile, its field dumps and defects.
    Limit0(CommonArgs),
    /// Large-hole limiting states: class manifest and one field per class.
    Limitinf(CommonArgs),
    /// One nonlinear solve at a fixed λ̄².
    Solve(CommonArgs),
    /// λ̄² continuation of every seeded branch.
    Sweep(CommonArgs),
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// TOML file with any of the options below; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of polygon sides, or `disc`.
    #[arg(long = "K")]
    pub k: Option<String>,
    /// Far-field director angle in radians.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma_star: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long = "B")]
    pub b: Option<f64>,
    #[arg(long = "C")]
    pub c: Option<f64>,
    #[arg(long = "L")]
    pub l: Option<f64>,
    #[arg(long)]
    pub lambda_bar_sq: Option<f64>,
    /// Inner radius of the mapped disc for the limiting profiles.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Radial nodes (solver grid, or field samples for the limits).
    #[arg(long)]
    pub n_r: Option<usize>,
    #[arg(long)]
    pub n_theta: Option<usize>,
    /// Physical truncation radius.
    #[arg(long)]
    pub r_max: Option<f64>,
    /// Radius of the region for the weighted moments.
    #[arg(long)]
    pub r_diag: Option<f64>,
    /// `a:b:n`, n log-spaced values from a to b.
    #[arg(long)]
    pub schedule: Option<String>,
    /// Comma-separated branch labels; all when absent.
    #[arg(long, value_delimiter = ',')]
    pub branches: Option<Vec<String>>,
    /// λ̄² values whose fields are written.
    #[arg(long, value_delimiter = ',')]
    pub snapshots: Option<Vec<f64>>,
    /// Branches solved concurrently.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(rename = "K")]
    k: Option<toml::Value>,
    gamma_star: Option<f64>,
    sigma: Option<f64>,
    #[serde(rename = "B")]
    b: Option<f64>,
    #[serde(rename = "C")]
    c: Option<f64>,
    #[serde(rename = "L")]
    l: Option<f64>,
    lambda_bar_sq: Option<f64>,
    epsilon: Option<f64>,
    n_r: Option<usize>,
    n_theta: Option<usize>,
    r_max: Option<f64>,
    r_diag: Option<f64>,
    schedule: Option<String>,
    branches: Option<Vec<String>>,
    snapshots: Option<Vec<f64>>,
    jobs: Option<usize>,
    out: Option<PathBuf>,
}

/// Validated parameters of one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: &'static str,
    pub spec: PolygonSpec,
    pub bspec: BoundarySpec,
    pub mat: MaterialParams,
    pub epsilon: f64,
    pub n_r: usize,
    pub n_theta: usize,
    pub r_max: f64,
    pub r_diag: f64,
    pub schedule_text: String,
    pub schedule: Vec<f64>,
    pub branches: Option<Vec<String>>,
    pub snapshots: Vec<f64>,
    pub jobs: usize,
    pub out_dir: PathBuf,
}

fn parse_sides(text: &str) -> Result<Sides> {
    match text.trim() {
        "disc" | "inf" => Ok(Sides::Disc),
        t => {
            let k: usize = t.parse().map_err(|_| Error::Config(format!("K must be an integer >= 3 or `disc`, got `{t}`")))?;
            if k < 3 {
                return Err(Error::Config(format!("K must be at least 3, got {k}")));
            }
            Ok(Sides::Polygon(k))
        }
    }
}

fn sides_label(s: Sides) -> String {
    s.count().map_or("disc".to_string(), |k| k.to_string())
}

fn parse_schedule(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || Error::Config(format!("schedule must look like a:b:n, got `{text}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if !(a < b) {
        return Err(Error::Config(format!("schedule must increase, got {a} to {b}")));
    }
    log_schedule(a, b, n)
}

impl RunConfig {
    pub fn resolve(command: &'static str, args: &CommonArgs) -> Result<Self> {
        let file: FileConfig = match &args.config {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
                toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
            }
            None => FileConfig::default(),
        };
        let k_text = match (&args.k, &file.k) {
            (Some(k), _) => k.clone(),
            (None, Some(toml::Value::Integer(k))) => k.to_string(),
            (None, Some(toml::Value::String(s))) => s.clone(),
            (None, Some(v)) => return Err(Error::Config(format!("K must be an integer or `disc`, got {v}"))),
            (None, None) => return Err(Error::Config("K is required (--K or the config file)".into())),
        };
        let sides = parse_sides(&k_text)?;
        let gamma_star = args.gamma_star.or(file.gamma_star).unwrap_or(0.0);
        if !gamma_star.is_finite() {
            return Err(Error::Config("gamma_star must be finite".into()));
        }
        let spec = PolygonSpec::new(sides, gamma_star).map_err(|e| Error::Config(e.to_string()))?;
        let bspec = BoundarySpec::new(args.sigma.or(file.sigma).unwrap_or(0.0)).map_err(|e| Error::Config(e.to_string()))?;
        let d = MaterialParams::default();
        let mat = MaterialParams::new(
            args.b.or(file.b).unwrap_or(d.b),
            args.c.or(file.c).unwrap_or(d.c),
            args.l.or(file.l).unwrap_or(d.l),
            args.lambda_bar_sq.or(file.lambda_bar_sq).unwrap_or(0.0),
        )
        .map_err(|e| Error::Config(e.to_string()))?;
        let limits = matches!(command, "limit0" | "limitinf");
        let epsilon = args.epsilon.or(file.epsilon).unwrap_or(1e-6);
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Config(format!("epsilon must lie in (0, 1), got {epsilon}")));
        }
        let quarter = sides.count().unwrap_or(4).div_ceil(4);
        let n_r = args.n_r.or(file.n_r).unwrap_or(if limits { 64 } else { 96 });
        let n_theta = args.n_theta.or(file.n_theta).unwrap_or(if limits { 128 } else { 64 * quarter });
        let r_max = args.r_max.or(file.r_max).unwrap_or(10.0);
        let r_diag = args.r_diag.or(file.r_diag).unwrap_or(9.0);
        if !(r_max > 1.0) {
            return Err(Error::Config(format!("r_max must exceed 1, got {r_max}")));
        }
        if !(r_diag > 1.0 && r_diag <= r_max) {
            return Err(Error::Config(format!("r_diag must lie in (1, r_max], got {r_diag}")));
        }
        if limits && (n_r < 2 || n_theta < 4) {
            return Err(Error::Config(format!("sample grid {n_r} x {n_theta} is too small")));
        }
        if !limits {
            let need = 3 * sides.count().unwrap_or(4);
            if n_r < 8 || n_theta < need {
                return Err(Error::Config(format!("grid needs n_r >= 8 and n_theta >= {need}, got {n_r} x {n_theta}")));
            }
        }
        let schedule_text = args.schedule.clone().or(file.schedule).unwrap_or_else(|| "0.1:400:40".into());
        let schedule = if command == "sweep" { parse_schedule(&schedule_text)? } else { Vec::new() };
        if command == "solve" && mat.lambda_bar_sq == 0.0 && args.lambda_bar_sq.or(file.lambda_bar_sq).is_none() {
            return Err(Error::Config("solve needs --lambda-bar-sq".into()));
        }
        let jobs = args.jobs.or(file.jobs).unwrap_or(1);
        if jobs == 0 {
            return Err(Error::Config("jobs must be at least 1".into()));
        }
        let out_dir = args
            .out
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .or(file.out)
            .unwrap_or_else(|| PathBuf::from("nemext-out"));
        let mut snapshots = args.snapshots.clone().or(file.snapshots).unwrap_or_default();
        snapshots.sort_by(f64::total_cmp);
        Ok(Self {
            command,
            spec,
            bspec,
            mat,
            epsilon,
            n_r,
            n_theta,
            r_max,
            r_diag,
            schedule_text,
            schedule,
            branches: args.branches.clone().or(file.branches),
            snapshots,
            jobs,
            out_dir,
        })
    }

    /// `#` preamble shared by every CSV of the run.
    pub fn metadata(&self) -> String {
        let mut s = format!(
            "# nemext {} {} K={} gamma_star={} sigma={} B={} C={} L={}",
            env!("CARGO_PKG_VERSION"),
            self.command,
            sides_label(self.spec.sides),
            self.spec.gamma_star,
            self.bspec.sigma,
            self.mat.b,
            self.mat.c,
            self.mat.l
        );
        match self.command {
            "limit0" | "limitinf" => {
                let _ = write!(s, " epsilon={} samples={}x{} r_max={}", self.epsilon, self.n_r, self.n_theta, self.r_max);
            }
            _ => {
                let _ = write!(
                    s,
                    " grid={}x{} r_max={} r_diag={}",
                    self.n_r, self.n_theta, self.r_max, self.r_diag
                );
                if self.command == "solve" {
                    let _ = write!(s, " lambda_bar_sq={}", self.mat.lambda_bar_sq);
                } else {
                    let _ = write!(s, " schedule={}", self.schedule_text);
                }
            }
        }
        s.push('\n');
        s
    }
}

fn e(x: f64) -> String {
    format!("{x:.10e}")
}

/// Writes through a temporary sibling so readers never see partial files.
fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let tmp = path.with_extension("csv.tmp");
    fs::write(&tmp, content)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

const FIELD_HEADER: &str = "r,theta,x,y,p11,p12,s,gamma\n";

fn field_row(out: &mut String, r: f64, theta: f64, w: Complex64, p: PTensor) {
    let d = director_from_tensor(p);
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{}",
        e(r),
        e(theta),
        e(w.re),
        e(w.im),
        e(p.p11),
        e(p.p12),
        e(d.s),
        e(d.gamma)
    );
}

/// Mapped-disc samples r ∈ [ε, 1] (log-spaced) × θ.
fn mapped_samples(cfg: &RunConfig) -> Vec<(f64, f64)> {
    let (lo, n_r, n_t) = (cfg.epsilon.ln(), cfg.n_r, cfg.n_theta);
    let mut v = Vec::with_capacity(n_r * n_t);
    for i in 0..n_r {
        let r = if i + 1 == n_r { 1.0 } else { (lo * (1.0 - i as f64 / (n_r - 1) as f64)).exp() };
        for j in 0..n_t {
            v.push((r, 2.0 * std::f64::consts::PI * j as f64 / n_t as f64));
        }
    }
    v
}

fn write_mapped_field<F: Fn(f64, f64) -> Result<PTensor>>(cfg: &RunConfig, map: &SCMap, path: &Path, f: F) -> Result<()> {
    let mut out = cfg.metadata();
    out.push_str(FIELD_HEADER);
    for (r, t) in mapped_samples(cfg) {
        let z = Complex64::from_polar(r, t);
        field_row(&mut out, r, t, map.forward(z), f(r, t)?);
    }
    write_atomic(path, &out)
}

fn defect_rows(out: &mut String, rep: &DefectReport) {
    for p in rep.interior_points() {
        let w = p.w.unwrap_or_default();
        let _ = writeln!(out, "point,,{},{},{}", e(w.re), e(w.im), e(p.winding));
    }
    for (i, l) in rep.lines.iter().enumerate() {
        for w in &l.physical {
            let _ = writeln!(out, "line,{i},{},{},", e(w.re), e(w.im));
        }
    }
}

pub fn cmd_limit0(cfg: &RunConfig) -> Result<i32> {
    let map = SCMap::for_spec(&cfg.spec, MAP_TOL)?;
    let lim = SmallLimit::new(&cfg.spec, &cfg.bspec, &cfg.mat, cfg.epsilon)?;
    fs::create_dir_all(&cfg.out_dir)?;
    write_mapped_field(cfg, &map, &cfg.out_dir.join("mapped.csv"), |r, t| lim.mapped(r, t))?;

    // physical polar sample ρ ∈ (1, r_max], outside the unit circumcircle
    let mut out = cfg.metadata();
    out.push_str(FIELD_HEADER);
    for i in 0..cfg.n_r {
        let rho = 1.0 + (cfg.r_max - 1.0) * (i as f64 + 0.5) / cfg.n_r as f64;
        for j in 0..cfg.n_theta {
            let w = Complex64::from_polar(rho, 2.0 * std::f64::consts::PI * j as f64 / cfg.n_theta as f64);
            let z = map.inverse(w, 1e-13)?;
            field_row(&mut out, z.norm(), z.arg().rem_euclid(2.0 * std::f64::consts::PI), w, lim.physical(&map, w)?);
        }
    }
    write_atomic(&cfg.out_dir.join("physical.csv"), &out)?;

    let square_lines = cfg.spec.sides == Sides::Polygon(4)
        && (cfg.spec.reduced_gamma_star - std::f64::consts::FRAC_PI_4).abs() < 1e-9;
    let rep = if square_lines {
        trace_line_defects(&lim, 65, Some(&map))?
    } else {
        locate_point_defects(&|r, t| lim.mapped(r, t).unwrap_or_default(), &PolarScan::for_epsilon(cfg.epsilon), Some(&map))?
    };
    let mut out = cfg.metadata();
    out.push_str("type,curve,x,y,winding\n");
    defect_rows(&mut out, &rep);
    write_atomic(&cfg.out_dir.join("defects.csv"), &out)?;
    println!(
        "limit0: {} interior point defect(s), {} line defect(s) -> {}",
        rep.interior_points().count(),
        rep.lines.len(),
        cfg.out_dir.display()
    );
    Ok(EXIT_OK)
}

pub fn cmd_limitinf(cfg: &RunConfig) -> Result<i32> {
    let Some(k) = cfg.spec.sides.count() else {
        return Err(Error::Config("limitinf needs a polygon".into()));
    };
    let map = SCMap::for_spec(&cfg.spec, MAP_TOL)?;
    let classes = classify_states(&enumerate_assignments(k)?, cfg.spec.gamma_star)?;
    fs::create_dir_all(&cfg.out_dir)?;
    let mut out = cfg.metadata();
    out.push_str("label,kind,bend_a,bend_b,class_size");
    for i in 1..=k {
        let _ = write!(out, ",gamma_{i}");
    }
    out.push('\n');
    for c in &classes {
        let kind = match c.kind {
            ClassKind::Orbit => "orbit",
            ClassKind::SmallLambdaBranch => "small_lambda",
        };
        let (a, b) = c.representative.bend_pair;
        let _ = write!(out, "{},{kind},{a},{b},{}", c.label, c.members.len());
        for g in &c.representative.gamma_edges {
            let _ = write!(out, ",{}", e(*g));
        }
        out.push('\n');
        if c.kind == ClassKind::Orbit {
            let lift = best_lifts(&c.representative, cfg.spec.gamma_star)[0];
            let lim = LargeLimit::new(&c.representative, lift, cfg.epsilon, &cfg.mat)?;
            let path = cfg.out_dir.join(format!("pinf_{}.csv", c.label));
            write_mapped_field(cfg, &map, &path, |r, t| lim.mapped(r, t))?;
        }
    }
    write_atomic(&cfg.out_dir.join("manifest.csv"), &out)?;
    println!("limitinf: {} classes -> {}", classes.len(), cfg.out_dir.display());
    Ok(EXIT_OK)
}

struct Setup {
    map: SCMap,
    problem: Problem,
    weights: DiagWeights,
    plans: Vec<BranchPlan>,
}

fn setup(cfg: &RunConfig) -> Result<Setup> {
    let map = SCMap::for_spec(&cfg.spec, MAP_TOL)?;
    let grid = AnnulusGrid::build(&map, cfg.n_r, cfg.n_theta, cfg.r_max)?;
    let problem = Problem::new(grid, &cfg.spec, &cfg.bspec, &cfg.mat)?;
    let weights = DiagWeights::build(&map, &problem.grid, cfg.r_diag)?;
    let mut plans = plan_branches(&cfg.spec)?;
    if let Some(want) = &cfg.branches {
        for w in want {
            if !plans.iter().any(|p| &p.label == w) {
                let known: Vec<&str> = plans.iter().map(|p| p.label.as_str()).collect();
                return Err(Error::Config(format!("unknown branch `{w}`; available: {}", known.join(", "))));
            }
        }
        plans.retain(|p| want.contains(&p.label));
    }
    Ok(Setup {
        map,
        problem,
        weights,
        plans,
    })
}

fn field_csv(cfg: &RunConfig, problem: &Problem, field: &crate::solver::SolutionField) -> String {
    let g = &problem.grid;
    let mut out = cfg.metadata();
    out.push_str(FIELD_HEADER);
    for i in 0..g.n_r {
        for j in 0..g.n_theta {
            let n = g.node(i, j);
            field_row(&mut out, g.r[i], g.theta[j], g.physical[n], field.tensor(n));
        }
    }
    out
}

/// Reaches λ̄² along the branch from its seed end when a cold start fails.
fn continue_to(cfg: &RunConfig, s: &Setup, plan: &BranchPlan, lbs: f64) -> Option<crate::solver::SolutionField> {
    let (lo, hi) = if plan.upward() { (SOLVE_FROM.0, lbs) } else { (lbs, SOLVE_FROM.1) };
    if !(lo < hi) {
        return None;
    }
    let schedule = log_schedule(lo, hi, 20).ok()?;
    let opts = SweepOptions {
        snapshots: vec![lbs],
        ..SweepOptions::default()
    };
    let rec = plan
        .run(&schedule, &s.problem, &s.map, &s.weights, &cfg.spec, &cfg.bspec, &opts)
        .ok()?;
    rec.snapshots.into_iter().next().map(|(_, f)| f)
}

/// Seed ends of the upward and downward continuation used by `solve`.
const SOLVE_FROM: (f64, f64) = (0.1, 400.0);

pub fn cmd_solve(cfg: &RunConfig) -> Result<i32> {
    let s = setup(cfg)?;
    let plan = s
        .plans
        .first()
        .ok_or_else(|| Error::Config("no branch selected".into()))?;
    let lbs = cfg.mat.lambda_bar_sq;
    let seed = plan.seed_field(&s.problem, &cfg.spec, &cfg.bspec)?;
    fs::create_dir_all(&cfg.out_dir)?;
    let field = match newton_solve(&seed, &s.problem, lbs, &NewtonOptions::default()) {
        Ok(f) => f,
        Err(err) => match continue_to(cfg, &s, plan, lbs) {
            Some(f) => f,
            None => {
                eprintln!("solve: {err}");
                return Ok(EXIT_FAILED);
            }
        },
    };
    let d = diagnostics(&field, &s.problem, &s.map, &s.weights)?;
    let mu = hessian_min_eig(&field, &s.problem, lbs, 1e-8).map_or(f64::NAN, |m| m.mu_min);
    let mut out = cfg.metadata();
    out.push_str("branch,lambda_bar_sq,energy,mu_min,m11,m12,n_point_defects,n_line_defects,iterations,residual\n");
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{},{},{}",
        plan.label,
        e(lbs),
        e(d.energy),
        e(mu),
        e(d.m11),
        e(d.m12),
        d.defects.n_point,
        d.defects.n_line,
        field.convergence.iterations,
        e(field.convergence.residual)
    );
    write_atomic(&cfg.out_dir.join("summary.csv"), &out)?;
    write_atomic(&cfg.out_dir.join(format!("field_{}.csv", plan.label)), &field_csv(cfg, &s.problem, &field))?;
    println!(
        "solve: {} at lambda_bar_sq = {lbs}: energy {:.6}, mu_min {:.3e}, {} iterations",
        plan.label, d.energy, mu, field.convergence.iterations
    );
    Ok(EXIT_OK)
}

const BRANCH_HEADER: &str =
    "branch,lambda_bar_sq,energy,mu_min,m11,m12,n_point_defects,n_line_defects,status,stable,iterations,residual,bends\n";

fn branch_rows(out: &mut String, rec: &BranchRecord) {
    for en in &rec.entries {
        let status = match &en.status {
            EntryStatus::Converged => "converged",
            EntryStatus::NewtonFailed(_) => "newton_failed",
            EntryStatus::Escaped(_) => "escaped",
        };
        let bends: Vec<String> = en.bends.iter().map(|b| b.to_string()).collect();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{status},{},{},{},{}",
            rec.label,
            e(en.lambda_bar_sq),
            e(en.energy),
            e(en.mu_min),
            e(en.m11),
            e(en.m12),
            en.n_point_defects,
            en.n_line_defects,
            u8::from(en.stable()),
            en.iterations,
            e(en.residual),
            bends.join("-")
        );
    }
}

/// Runs the sweeps; records come back in plan order.
pub fn run_sweeps(cfg: &RunConfig) -> Result<(Vec<BranchRecord>, Problem)> {
    let s = setup(cfg)?;
    let base = SweepOptions {
        snapshots: cfg.snapshots.clone(),
        ..SweepOptions::default()
    };
    let run = |p: &BranchPlan| p.run(&cfg.schedule, &s.problem, &s.map, &s.weights, &cfg.spec, &cfg.bspec, &base);
    let mut records = Vec::with_capacity(s.plans.len());
    for chunk in s.plans.chunks(cfg.jobs) {
        let done: Vec<Result<BranchRecord>> = std::thread::scope(|scope| {
            let handles: Vec<_> = chunk.iter().map(|p| scope.spawn(|| run(p))).collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| Err(Error::Config("branch worker panicked".into()))))
                .collect()
        });
        for r in done {
            records.push(r?);
        }
    }
    Ok((records, s.problem))
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<i32> {
    let (records, problem) = run_sweeps(cfg)?;
    fs::create_dir_all(&cfg.out_dir)?;
    let mut table = cfg.metadata();
    table.push_str(BRANCH_HEADER);
    for rec in &records {
        let mut out = cfg.metadata();
        out.push_str(BRANCH_HEADER);
        branch_rows(&mut out, rec);
        branch_rows(&mut table, rec);
        write_atomic(&cfg.out_dir.join(format!("branch_{}.csv", rec.label)), &out)?;
        for (lbs, field) in &rec.snapshots {
            let path = cfg.out_dir.join(format!("snapshot_{}_{lbs}.csv", rec.label));
            write_atomic(&path, &field_csv(cfg, &problem, field))?;
        }
        let n = rec.converged().count();
        match (rec.lowest(), rec.highest()) {
            (Some(lo), Some(hi)) => println!("{:>8}: {n} converged points, lambda_bar_sq in [{lo:.4}, {hi:.4}]", rec.label),
            _ => println!("{:>8}: no converged points", rec.label),
        }
    }
    write_atomic(&cfg.out_dir.join("bifurcation.csv"), &table)?;
    if records.iter().all(|r| r.converged().next().is_none()) {
        eprintln!("sweep: every branch failed");
        return Ok(EXIT_FAILED);
    }
    Ok(EXIT_OK)
}

/// Parses `args` and runs the subcommand; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let (name, common) = match &cli.command {
        Command::Limit0(a) => ("limit0", a),
        Command::Limitinf(a) => ("limitinf", a),
        Command::Solve(a) => ("solve", a),
        Command::Sweep(a) => ("sweep", a),
    };
    let cfg = match RunConfig::resolve(name, common) {
        Ok(c) => c,
        Err(err) => {
            eprintln!("error: {err}");
            return EXIT_CONFIG;
        }
    };
    let result = match name {
        "limit0" => cmd_limit0(&cfg),
        "limitinf" => cmd_limitinf(&cfg),
        "solve" => cmd_solve(&cfg),
        _ => cmd_sweep(&cfg),
    };
    match result {
        Ok(code) => code,
        Err(err @ Error::Config(_)) => {
            eprintln!("error: {err}");
            EXIT_CONFIG
        }
        Err(err) => {
            eprintln!("error: {err}");
            EXIT_FAILED
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(cmd: &'static str, argv: &[&str]) -> Result<RunConfig> {
        let mut full = vec!["nemext", cmd];
        full.extend_from_slice(argv);
        let cli = Cli::try_parse_from(full).unwrap();
        let a = match cli.command {
            Command::Limit0(a) | Command::Limitinf(a) | Command::Solve(a) | Command::Sweep(a) => a,
        };
        RunConfig::resolve(cmd, &a)
    }

    #[test]
    fn schedule_parsing() {
        let s = parse_schedule("0.1:400:40").unwrap();
        assert_eq!((s.len(), s[0], s[39]), (40, 0.1, 400.0));
        for bad in ["1:2", "a:2:3", "2:1:5", "0:1:5", "1:2:1"] {
            assert!(parse_schedule(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn defaults_follow_the_polygon() {
        let c = resolve("sweep", &["--K", "6", "--gamma-star", "0.5235987756"]).unwrap();
        assert_eq!((c.n_r, c.n_theta, c.r_max, c.r_diag), (96, 128, 10.0, 9.0));
        let c = resolve("sweep", &["--K", "4"]).unwrap();
        assert_eq!(c.n_theta, 64);
        assert_eq!(c.schedule.len(), 40);
    }

    #[test]
    fn invalid_values_are_config_errors() {
        for argv in [
            &["--K", "2"][..],
            &["--K", "four"],
            &["--K", "4", "--sigma", "0.7"],
            &["--K", "4", "--r-diag", "12"],
            &["--K", "4", "--n-theta", "8"],
            &["--K", "4", "--jobs", "0"],
            &["--K", "4", "--schedule", "5:1:3"],
            &["--gamma-star", "0.1"],
        ] {
            assert!(matches!(resolve("sweep", argv), Err(Error::Config(_))), "{argv:?}");
        }
        assert!(matches!(resolve("solve", &["--K", "4"]), Err(Error::Config(_))));
    }

    #[test]
    fn config_file_and_flag_precedence() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run.toml");
        fs::write(&p, "K = 5\ngamma_star = 0.3\nB = 6000.0\nn_theta = 80\nschedule = \"1:10:3\"\n").unwrap();
        let c = resolve("sweep", &["--config", p.to_str().unwrap(), "--gamma-star", "-0.2"]).unwrap();
        assert_eq!(c.spec.sides, Sides::Polygon(5));
        assert_eq!((c.spec.gamma_star, c.mat.b, c.n_theta, c.schedule.len()), (-0.2, 6000.0, 80, 3));
        fs::write(&p, "K = 5\nbogus = 1\n").unwrap();
        assert!(resolve("sweep", &["--config", p.to_str().unwrap()]).is_err());
    }

    #[test]
    fn metadata_is_a_single_comment_line() {
        let c = resolve("sweep", &["--K", "4", "--schedule", "1:2:2"]).unwrap();
        let m = c.metadata();
        assert!(m.starts_with("# nemext ") && m.ends_with('\n') && m.matches('\n').count() == 1);
        assert!(m.contains("schedule=1:2:2") && m.contains("K=4"));
    }
}
