use super::build::{bound_config, build_operator};
use super::selftest::selftest;
use super::spec::{BoxSpec, JobSpec, Task};
use crate::bounds::{evaluate_bounds_with_delta, start_vector, BoundConfig, BoundReport, SolverOptions};
use crate::error::{Error, Result};
use crate::operator::BandOperator;
use crate::qh::{run_sequence, RestartPolicy, StepKind};
use crate::sigma::smallest_singular_pair;
use crate::tracer::{grid_scan, trace_contour, BBox, Classification, ContourSet, GridField};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

/// What a run produced.
#[derive(Clone, Debug, Default)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    /// Human readable lines for the terminal.
    pub lines: Vec<String>,
    /// False when a self-test failed.
    pub passed: bool,
}

/// Run a validated job inside a pool of `job.threads` workers.
pub fn run(job: &JobSpec) -> Result<RunSummary> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(job.threads)
        .build()
        .map_err(|e| Error::config("threads", e.to_string()))?;
    pool.install(|| run_inner(job))
}

fn run_inner(job: &JobSpec) -> Result<RunSummary> {
    let out = job.out.clone().unwrap_or_else(|| PathBuf::from("."));
    match job.task {
        Task::Selftest => {
            let results = selftest();
            let passed = results.iter().all(|r| r.passed);
            let lines = results.iter().map(|r| r.line()).collect();
            Ok(RunSummary { files: Vec::new(), lines, passed })
        }
        Task::Contour => run_contour(job, &out),
        Task::Grid => run_grid(job, &out),
        Task::Bench => run_bench(job, &out),
    }
}

fn bbox(b: &BoxSpec) -> BBox {
    BBox::new(b[0], b[1], b[2], b[3])
}

/// Comment block carrying the resolved job.
pub fn header(kind: &str, job: &JobSpec) -> String {
    let mut s = format!("# pseudospec {kind}\n# [job]\n");
    for line in job.to_toml().lines() {
        let _ = writeln!(s, "# {line}");
    }
    s.push_str("# [end job]\n");
    s
}

/// The job embedded in a file written by this module.
pub fn embedded_job(text: &str) -> Result<JobSpec> {
    let body: String = text
        .lines()
        .skip_while(|l| *l != "# [job]")
        .skip(1)
        .take_while(|l| *l != "# [end job]")
        .map(|l| format!("{}\n", l.strip_prefix("# ").unwrap_or("")))
        .collect();
    JobSpec::from_toml(&body)
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<PathBuf> {
    let io = |p: &Path, source| Error::Io { path: p.display().to_string(), source };
    std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| io(&path, e))?;
    Ok(path)
}

/// Bound reports memoized by lambda; the first failure is kept and reported later.
struct Evaluator<'a> {
    op: &'a BandOperator,
    cfg: &'a BoundConfig,
    delta: f64,
    memo: Mutex<HashMap<(u64, u64), BoundReport>>,
    failure: Mutex<Option<Error>>,
}

impl<'a> Evaluator<'a> {
    fn new(op: &'a BandOperator, cfg: &'a BoundConfig) -> Self {
        let delta = cfg.resolve_delta(op);
        Evaluator { op, cfg, delta, memo: Mutex::default(), failure: Mutex::default() }
    }

    fn report(&self, z: Complex64) -> Result<BoundReport> {
        let key = (z.re.to_bits(), z.im.to_bits());
        if let Some(r) = self.memo.lock().expect("memo lock").get(&key) {
            return Ok(r.clone());
        }
        let r = evaluate_bounds_with_delta(self.op, z, self.cfg, self.delta)?;
        self.memo.lock().expect("memo lock").insert(key, r.clone());
        Ok(r)
    }

    /// `pick(report)`, or NaN after recording the error.
    fn value(&self, z: Complex64, pick: impl Fn(&BoundReport) -> f64) -> f64 {
        match self.report(z) {
            Ok(r) => pick(&r),
            Err(e) => {
                self.failure.lock().expect("failure lock").get_or_insert(e);
                f64::NAN
            }
        }
    }

    fn take_failure(&self) -> Result<()> {
        match self.failure.lock().expect("failure lock").take() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

fn run_contour(job: &JobSpec, out: &Path) -> Result<RunSummary> {
    let spec = job.contour.as_ref().expect("validated");
    let built = build_operator(&job.operator, None)?;
    let cfg = bound_config(job, &built)?;
    let ev = Evaluator::new(&built.op, &cfg);
    let seeds: Vec<Complex64> = spec.seeds.iter().map(|p| Complex64::new(p[0], p[1])).collect();
    let backoff = 1.0 + 10.0 * cfg.solver.tol;
    let mut summary = RunSummary { passed: true, ..Default::default() };
    for (idx, &eps) in cfg.eps_list.iter().enumerate() {
        let lower_f = |z: Complex64| ev.value(z, |r| r.f_l);
        let upper_f = |z: Complex64| ev.value(z, |r| r.f_u / backoff);
        let sides: [(&str, f64, &(dyn Fn(Complex64) -> f64 + Sync)); 2] =
            [("lower", eps - cfg.eta_d, &lower_f), ("upper", eps + cfg.eta_d + ev.delta, &upper_f)];
        for (kind, threshold, f) in sides {
            let set = trace_contour(f, threshold, bbox(&spec.bbox), spec.h, &seeds, spec.stride);
            ev.take_failure()?;
            let text = header("contour", job) + &contour_text(&set, kind, eps);
            let path = write_file(out, &format!("contour_{idx}_{kind}.txt"), &text)?;
            summary.lines.push(format!(
                "eps {eps} {kind}: {} polylines, {} triangles, {} evaluations -> {}",
                set.polylines.len(),
                set.triangles_visited,
                set.evaluations,
                path.display()
            ));
            summary.files.push(path);
        }
    }
    Ok(summary)
}

/// Line oriented contour dump: metadata, then each polyline as `re im` rows.
pub fn contour_text(set: &ContourSet, kind: &str, eps: f64) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "kind {kind}");
    let _ = writeln!(s, "eps {eps}");
    let _ = writeln!(s, "threshold {}", set.threshold);
    let _ = writeln!(s, "h {}", set.h);
    let _ = writeln!(s, "triangles_visited {}", set.triangles_visited);
    let _ = writeln!(s, "evaluations {}", set.evaluations);
    if let Some(d) = &set.diagnostic {
        let _ = writeln!(s, "diagnostic {d}");
    }
    let _ = writeln!(s, "polylines {}", set.polylines.len());
    for (i, p) in set.polylines.iter().enumerate() {
        let _ = writeln!(s, "polyline {i} {} {}", if p.closed { "closed" } else { "open" }, p.points.len());
        for z in &p.points {
            let _ = writeln!(s, "{} {}", z.re, z.im);
        }
    }
    s
}

fn run_grid(job: &JobSpec, out: &Path) -> Result<RunSummary> {
    let spec = job.grid.as_ref().expect("validated");
    let built = build_operator(&job.operator, None)?;
    let cfg = bound_config(job, &built)?;
    let delta = cfg.resolve_delta(&built.op);
    let eval = |z: Complex64| evaluate_bounds_with_delta(&built.op, z, &cfg, delta);
    let field = grid_scan(&eval, bbox(&spec.bbox), spec.nx, spec.ny, &cfg.eps_list)?;
    let text = header("grid", job) + &grid_text(&field);
    let path = write_file(out, "grid.txt", &text)?;
    let reports: Vec<BoundReport> = field.points.iter().map(|p| p.report.clone()).collect();
    let json = write_file(out, "grid_records.json", &records_json(&reports))?;
    let mut lines = vec![format!("{} x {} nodes -> {}", field.nx, field.ny, path.display())];
    for (e, eps) in cfg.eps_list.iter().enumerate() {
        let count = |c| field.points.iter().filter(|p| p.classes[e] == c).count();
        lines.push(format!(
            "eps {eps}: {} certified in, {} certified out, {} undecided",
            count(Classification::CertifiedIn),
            count(Classification::CertifiedOut),
            count(Classification::Undecided)
        ));
    }
    Ok(RunSummary { files: vec![path, json], lines, passed: true })
}

fn class_name(c: Classification) -> &'static str {
    match c {
        Classification::CertifiedIn => "in",
        Classification::CertifiedOut => "out",
        Classification::Undecided => "undecided",
    }
}

/// Row-major field dump, one node per line.
pub fn grid_text(field: &GridField) -> String {
    let mut s = String::new();
    let b = &field.bbox;
    let _ = writeln!(s, "nx {}", field.nx);
    let _ = writeln!(s, "ny {}", field.ny);
    let _ = writeln!(s, "bbox {} {} {} {}", b.re_min, b.re_max, b.im_min, b.im_max);
    let eps: Vec<String> = field.eps_list.iter().map(f64::to_string).collect();
    let _ = writeln!(s, "eps {}", eps.join(" "));
    if let Some(p) = field.points.first() {
        let _ = writeln!(s, "eta_d {}", p.report.eta_d);
        let _ = writeln!(s, "delta_N {}", p.report.delta_n);
    }
    let _ = writeln!(s, "columns re im F_l F_u{}", field.eps_list.iter().enumerate().map(|(i, _)| format!(" class_{i}")).collect::<String>());
    for p in &field.points {
        let _ = write!(s, "{} {} {} {}", p.lambda.re, p.lambda.im, p.report.f_l, p.report.f_u);
        for c in &p.classes {
            let _ = write!(s, " {}", class_name(*c));
        }
        s.push('\n');
    }
    s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchMode {
    Recycled,
    Restarted,
    Fresh,
}

/// One window of a benchmark stream.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BenchRecord {
    pub mode: BenchMode,
    pub d: usize,
    pub n: usize,
    pub k: i64,
    pub step_kind: StepKind,
    pub rotations_applied: u64,
    /// Factorization time, fresh or recycled, including completion to `R`.
    pub wall_time_ns: u64,
    pub sigma_time_ns: u64,
    pub sigma: f64,
}

/// Time `steps` consecutive windows from `k_start` under each policy, including the
/// smallest singular value of every window.
pub fn bench_stream(
    op: &BandOperator,
    lambda: Complex64,
    k_start: i64,
    steps: usize,
    n: usize,
    mode: BenchMode,
    policy: RestartPolicy,
    solver: &SolverOptions,
) -> Result<Vec<BenchRecord>> {
    let mut rng = ChaCha8Rng::seed_from_u64(solver.seed);
    let mut prev: Option<Vec<Complex64>> = None;
    let mut out = Vec::with_capacity(steps);
    for item in run_sequence(op, lambda, k_start, steps, n, policy) {
        let (k, r, rec) = item?;
        let t = Instant::now();
        let start = start_vector(&mut rng, &r, prev.as_deref().filter(|_| solver.warm_start));
        let (res, v) = smallest_singular_pair(&r, solver.tol, solver.max_iter, &start);
        let sigma_time_ns = t.elapsed().as_nanos() as u64;
        prev = v;
        out.push(BenchRecord {
            mode,
            d: op.bandwidth(),
            n,
            k,
            step_kind: rec.step_kind,
            rotations_applied: rec.rotations_applied,
            wall_time_ns: rec.wall_time_ns,
            sigma_time_ns,
            sigma: res.sigma,
        });
    }
    Ok(out)
}

fn run_bench(job: &JobSpec, out: &Path) -> Result<RunSummary> {
    let spec = job.bench.clone().unwrap_or(super::spec::BenchSpec {
        bandwidths: Vec::new(),
        steps: 40,
        lambda: [0.0, 0.0],
        restart_every: 0,
    });
    let ds: Vec<Option<usize>> =
        if spec.bandwidths.is_empty() { vec![None] } else { spec.bandwidths.iter().map(|&d| Some(d)).collect() };
    let lambda = Complex64::new(spec.lambda[0], spec.lambda[1]);
    let restarted = if spec.restart_every == 0 { RestartPolicy::Auto } else { RestartPolicy::Every(spec.restart_every) };
    let mut summary = RunSummary { passed: true, ..Default::default() };
    for d in ds {
        let built = build_operator(&job.operator, d)?;
        let bw = built.op.bandwidth();
        let b = job.bounds.b.unwrap_or(bw).max(1);
        let n = b * job.bounds.blocks;
        let k_start = -(n as i64) / 2;
        let mut text = header("bench", job);
        let mut means = Vec::new();
        for (mode, policy) in
            [(BenchMode::Recycled, RestartPolicy::Never), (BenchMode::Restarted, restarted), (BenchMode::Fresh, RestartPolicy::Every(1))]
        {
            let recs = bench_stream(&built.op, lambda, k_start, spec.steps, n, mode, policy, &job.solver)?;
            for r in &recs {
                text.push_str(&serde_json::to_string(r).expect("records serialize"));
                text.push('\n');
            }
            let steady: Vec<&BenchRecord> = recs.iter().skip(1).collect();
            let mean = if steady.is_empty() {
                0.0
            } else {
                steady.iter().map(|r| (r.wall_time_ns + r.sigma_time_ns) as f64).sum::<f64>() / steady.len() as f64
            };
            means.push(format!("{mode:?} {:.3} ms", mean * 1e-6));
        }
        let path = write_file(out, &format!("bench_d{bw}.jsonl"), &text)?;
        summary.lines.push(format!("d {bw}, n {n}: {} -> {}", means.join(", "), path.display()));
        summary.files.push(path);
    }
    Ok(summary)
}

/// Flat JSON records of a set of bound reports.
pub fn records_json(reports: &[BoundReport]) -> String {
    let recs: Vec<_> = reports.iter().map(BoundReport::record).collect();
    serde_json::to_string(&recs).expect("records serialize")
}
