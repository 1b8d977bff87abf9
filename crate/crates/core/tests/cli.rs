use proptest::prelude::*;
use pseudospec::cli::*;
use pseudospec::qh::RestartPolicy;
use pseudospec::Complex64;
use std::process::Command;

const GRID_JOB: &str = r#"
task = "grid"

[operator]
builtin = "identity"

[bounds]
blocks = 3
eps = [0.25, 0.5]

[grid]
bbox = [-1.0, 3.0, -1.5, 1.5]
nx = 9
ny = 7
"#;

#[test]
fn minimal_job_gets_defaults() {
    let job = JobSpec::from_toml(GRID_JOB).unwrap();
    assert_eq!(job.threads, 0);
    assert_eq!(job.solver.tol, 1e-8);
    assert_eq!(job.solver.restart, RestartPolicy::Never);
    assert!(job.solver.warm_start);
    assert_eq!(job.bounds.b, None);
    assert_eq!(job.out, None);
}

#[test]
fn serialized_job_parses_back() {
    let text = r#"
task = "contour"
threads = 2
out = "results"

[operator]
builtin = "fish"
d = 15

[operator.impurity]
builtin = "grcar10"
scale = 0.5
shift = [0.1, -0.2]
row = -3
col = -2

[bounds]
blocks = 200
offsets = [0, 7]
eps = [0.1]
delta_n = 0.05

[solver]
tol = 1e-9
max_iter = 100
seed = 4
restart = { every = 12 }
warm_start = false

[contour]
bbox = [-1.0, 6.0, -3.0, 3.0]
h = 0.05
stride = 4
seeds = [[0.5, 0.0]]
"#;
    let job = JobSpec::from_toml(text).unwrap();
    assert_eq!(job.solver.restart, RestartPolicy::Every(12));
    let again = JobSpec::from_toml(&job.to_toml()).unwrap();
    assert_eq!(again, job);
}

fn coeffs() -> impl Strategy<Value = Vec<[f64; 3]>> {
    prop::collection::vec((-4i64..=4, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(k, a, b)| [k as f64, a, b]), 1..6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn round_trip_of_generated_jobs(
        c in coeffs(),
        d in 4usize..9,
        blocks in 1usize..300,
        eps in prop::collection::vec(0.01..5.0f64, 1..4),
        tol in 1e-12..1e-3f64,
        seed in 0..=i64::MAX as u64,
        restart in prop_oneof![Just(RestartPolicy::Never), Just(RestartPolicy::Auto), (1usize..50).prop_map(RestartPolicy::Every)],
        nx in 2usize..50,
        bbox in (-5.0..0.0f64, 0.1..5.0f64, -5.0..0.0f64, 0.1..5.0f64),
    ) {
        let mut job = JobSpec::from_toml(GRID_JOB).unwrap();
        job.operator = OperatorSpec { builtin: None, symbol: Some(c), d: Some(d), ..Default::default() };
        job.bounds.blocks = blocks;
        job.bounds.eps = eps;
        job.solver.tol = tol;
        job.solver.seed = seed;
        job.solver.restart = restart;
        job.grid = Some(GridSpec { bbox: [bbox.0, bbox.1, bbox.2, bbox.3], nx, ny: nx + 1 });
        let again = JobSpec::from_toml(&job.to_toml()).unwrap();
        prop_assert_eq!(again, job);
    }
}

#[test]
fn overrides_win_over_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("job.toml");
    std::fs::write(&path, GRID_JOB).unwrap();
    let sets = ["bounds.blocks=9".to_string(), "grid.nx=3".into(), "solver.restart=auto".into(), "out=elsewhere".into()];
    let job = JobSpec::load(Some(&path), &sets, None).unwrap();
    assert_eq!(job.bounds.blocks, 9);
    assert_eq!(job.grid.as_ref().unwrap().nx, 3);
    assert_eq!(job.solver.restart, RestartPolicy::Auto);
    assert_eq!(job.out.as_deref(), Some(std::path::Path::new("elsewhere")));
    let job = JobSpec::load(Some(&path), &[], Some(Task::Selftest)).unwrap();
    assert_eq!(job.task, Task::Selftest);
}

fn rejected(text: &str) -> String {
    match JobSpec::from_toml(text) {
        Err(e) => {
            assert_eq!(exit_code(&e), 1);
            e.to_string()
        }
        Ok(_) => panic!("accepted: {text}"),
    }
}

#[test]
fn invalid_jobs_are_rejected_with_their_field() {
    let msg = rejected(&GRID_JOB.replace("\"identity\"", "\"whale\""));
    assert!(msg.contains("operator.builtin"), "{msg}");
    let msg = rejected(&GRID_JOB.replace("nx = 9", "nx = 1"));
    assert!(msg.contains("grid"), "{msg}");
    let msg = rejected(&GRID_JOB.replace("builtin = \"identity\"", "builtin = \"singint\"\nd = 4"));
    assert!(msg.contains("singint") && msg.contains("`b`"), "{msg}");
    let msg = rejected(&GRID_JOB.replace("builtin = \"identity\"", "builtin = \"fish\""));
    assert!(msg.contains("operator.d"), "{msg}");
    let msg = rejected(&GRID_JOB.replace("eps = [0.25, 0.5]", "eps = [-1.0]"));
    assert!(msg.contains("bounds.eps"), "{msg}");
    let msg = rejected(&format!("{GRID_JOB}\n[solver]\ntol = 2.0\n"));
    assert!(msg.contains("solver.tol"), "{msg}");
    let msg = rejected(&GRID_JOB.replace("nx = 9", "nx = 9\ncolour = 3"));
    assert!(msg.contains("colour"), "{msg}");
    let msg = rejected(&GRID_JOB.replace("task = \"grid\"", "task = \"contour\""));
    assert!(msg.contains("contour"), "{msg}");
}

#[test]
fn eps_below_truncation_error_is_rejected() {
    let text = GRID_JOB.replace("builtin = \"identity\"", "builtin = \"fish\"\nd = 15").replace("[0.25, 0.5]", "[0.00005]");
    let job = JobSpec::from_toml(&text).unwrap();
    let built = build_operator(&job.operator, None).unwrap();
    let err = bound_config(&job, &built).unwrap_err();
    assert_eq!(exit_code(&err), 1);
    let msg = err.to_string();
    assert!(msg.contains("bounds.eps") && msg.contains("eps > eta_d"), "{msg}");
}

#[test]
fn example21_builtin_has_the_displayed_entries() {
    let job = JobSpec::from_toml(&GRID_JOB.replace("\"identity\"", "\"example21\"")).unwrap();
    let op = build_operator(&job.operator, None).unwrap().op;
    assert_eq!(op.bandwidth(), 2);
    let c = |x: f64| Complex64::new(x, 0.0);
    assert_eq!(op.entry(0, 1), c(9.0));
    assert_eq!(op.entry(1, 0), c(9.0));
    assert_eq!(op.entry(1, 2), c(2.0));
    assert_eq!(op.entry(2, 1), c(2.0));
    assert_eq!(op.entry(0, 2), c(4.0));
    assert_eq!(op.entry(1, 3), c(0.0));
    assert_eq!(op.entry(0, 0), c(0.0));
    let w = op.window(Complex64::new(0.0, 0.0), 0, 4).to_dense();
    // window row r is operator row r - 2
    assert_eq!(w[(3, 0)], c(9.0));
    assert_eq!(w[(2, 2)], c(4.0));
    assert_eq!(w[(3, 2)], c(2.0));
}

#[test]
fn grcar_impurity_sits_on_the_diagonal() {
    let text = GRID_JOB.replace(
        "builtin = \"identity\"",
        "builtin = \"fish\"\nd = 15\n\n[operator.impurity]\nbuiltin = \"grcar10\"\nscale = 2.0",
    );
    let job = JobSpec::from_toml(&text).unwrap();
    let built = build_operator(&job.operator, None).unwrap();
    let fish = build_operator(&OperatorSpec { impurity: None, ..job.operator.clone() }, None).unwrap();
    assert_eq!(built.op.entry(0, 0), fish.op.entry(0, 0) + 2.0);
    assert_eq!(built.op.entry(1, 0), fish.op.entry(1, 0) - 2.0);
    assert_eq!(built.op.entry(0, 3), fish.op.entry(0, 3) + 2.0);
    assert_eq!(built.op.entry(10, 10), fish.op.entry(10, 10));
    assert!((built.eta_d - 8.0227e-5).abs() < 1e-8);
}

#[test]
fn singint_uses_both_symbols() {
    let text = GRID_JOB.replace(
        "builtin = \"identity\"",
        "builtin = \"singint\"\nd = 3\na = { builtin = \"fish\" }\nb = { coefficients = [[0, 1.0, 0.0], [1, 0.5, 0.0], [5, 0.01, 0.0]], tail = 0.001 }",
    );
    let job = JobSpec::from_toml(&text).unwrap();
    let built = build_operator(&job.operator, None).unwrap();
    assert_eq!(built.op.entry(-10, -10), Complex64::new(1.0, 0.0));
    assert_eq!(built.op.entry(-9, -10), Complex64::new(0.5, 0.0));
    assert_eq!(built.op.entry(10, 10), Complex64::new(3.1, 0.0));
    assert!(built.eta_d > 0.01 + 0.001);
}

#[test]
fn identity_grid_matches_the_resolvent() {
    let mut job = JobSpec::from_toml(GRID_JOB).unwrap();
    let dir = tempfile::tempdir().unwrap();
    job.out = Some(dir.path().to_path_buf());
    let summary = run(&job).unwrap();
    assert!(summary.passed);
    let text = std::fs::read_to_string(dir.path().join("grid.txt")).unwrap();
    assert_eq!(embedded_job(&text).unwrap(), job);
    let rows: Vec<Vec<&str>> = text
        .lines()
        .skip_while(|l| !l.starts_with("columns"))
        .skip(1)
        .map(|l| l.split_whitespace().collect())
        .collect();
    assert_eq!(rows.len(), 63);
    for r in rows {
        let z = Complex64::new(r[0].parse().unwrap(), r[1].parse().unwrap());
        let (fl, fu): (f64, f64) = (r[2].parse().unwrap(), r[3].parse().unwrap());
        let exact = (1.0 - z).norm();
        assert!((fl - exact).abs() < 1e-9 && (fu - exact).abs() < 1e-9);
        assert_eq!(r[5] == "in", exact < 0.5);
    }
    let json = std::fs::read_to_string(dir.path().join("grid_records.json")).unwrap();
    let recs: Vec<pseudospec::bounds::BoundRecord> = serde_json::from_str(&json).unwrap();
    assert_eq!(recs.len(), 63);
    assert!(json.contains("\"F_l\"") && json.contains("\"delta_N\""));
}

#[test]
fn grid_dumps_are_deterministic() {
    let text = GRID_JOB.replace("builtin = \"identity\"", "builtin = \"fish\"\nd = 4").replace("blocks = 3", "blocks = 6");
    let mut job = JobSpec::from_toml(&text).unwrap();
    let dir = tempfile::tempdir().unwrap();
    job.out = Some(dir.path().to_path_buf());
    let read = |job: &JobSpec| {
        run(job).unwrap();
        std::fs::read(dir.path().join("grid.txt")).unwrap()
    };
    let a = read(&job);
    assert_eq!(a, read(&job));
}

#[test]
fn contour_task_writes_both_sides() {
    let text = r#"
task = "contour"
[operator]
builtin = "identity"
[bounds]
blocks = 2
eps = [0.5, 1.0]
[contour]
bbox = [-1.0, 3.0, -2.0, 2.0]
h = 0.05
"#;
    let mut job = JobSpec::from_toml(text).unwrap();
    let dir = tempfile::tempdir().unwrap();
    job.out = Some(dir.path().to_path_buf());
    let summary = run(&job).unwrap();
    assert_eq!(summary.files.len(), 4);
    let lower = std::fs::read_to_string(dir.path().join("contour_1_lower.txt")).unwrap();
    assert!(lower.contains("kind lower") && lower.contains("polyline 0 closed"));
    let pts = lower.lines().skip_while(|l| !l.starts_with("polyline 0")).skip(1);
    for l in pts {
        let v: Vec<f64> = l.split_whitespace().map(|x| x.parse().unwrap()).collect();
        assert!(((Complex64::new(v[0], v[1]) - 1.0).norm() - 1.0).abs() < 0.05);
    }
}

#[test]
fn bench_writes_one_file_per_bandwidth() {
    let text = r#"
task = "bench"
[operator]
builtin = "fish"
d = 2
[bounds]
blocks = 5
[bench]
bandwidths = [2, 4]
steps = 6
restart_every = 3
"#;
    let mut job = JobSpec::from_toml(text).unwrap();
    let dir = tempfile::tempdir().unwrap();
    job.out = Some(dir.path().to_path_buf());
    run(&job).unwrap();
    for d in [2, 4] {
        let body = std::fs::read_to_string(dir.path().join(format!("bench_d{d}.jsonl"))).unwrap();
        let recs: Vec<serde_json::Value> = body.lines().filter(|l| !l.starts_with('#')).map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(recs.len(), 18);
        let kinds: Vec<&str> = recs.iter().filter(|r| r["mode"] == "restarted").map(|r| r["step_kind"].as_str().unwrap()).collect();
        assert_eq!(kinds, ["fresh", "advance", "advance", "fresh", "advance", "advance"]);
        assert!(recs.iter().filter(|r| r["mode"] == "fresh").all(|r| r["step_kind"] == "fresh"));
        let sig: Vec<f64> = recs.iter().map(|r| r["sigma"].as_f64().unwrap()).collect();
        for s in &sig {
            assert!((s - sig[0]).abs() < 1e-6 * sig[0]);
        }
    }
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pseudospec"))
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let st = bin().arg("selftest").output().unwrap();
    assert_eq!(st.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&st.stdout).lines().all(|l| l.starts_with("PASS")));

    let st = bin().args(["grid", "--set", "operator.builtin=nothing"]).output().unwrap();
    assert_eq!(st.status.code(), Some(1));

    let st = bin().args(["grid", "--config"]).arg(dir.path().join("missing.toml")).output().unwrap();
    assert_eq!(st.status.code(), Some(3));

    let path = dir.path().join("job.toml");
    std::fs::write(&path, GRID_JOB).unwrap();
    let out = dir.path().join("out");
    let st = bin().arg("grid").arg("--config").arg(&path).arg("--out").arg(&out).args(["--set", "grid.ny=3"]).output().unwrap();
    assert_eq!(st.status.code(), Some(0), "{}", String::from_utf8_lossy(&st.stderr));
    let text = std::fs::read_to_string(out.join("grid.txt")).unwrap();
    assert!(text.contains("ny 3"));

    // a file where the output directory should go
    let blocker = dir.path().join("blocker");
    std::fs::write(&blocker, "").unwrap();
    let st = bin().arg("grid").arg("--config").arg(&path).arg("--out").arg(blocker.join("x")).output().unwrap();
    assert_eq!(st.status.code(), Some(3));
}

#[test]
fn impurity_outside_band_is_a_validation_error() {
    let text = GRID_JOB.replace(
        "builtin = \"identity\"",
        "builtin = \"fish\"\nd = 2\n\n[operator.impurity]\nbuiltin = \"grcar10\"",
    );
    let job = JobSpec::from_toml(&text).unwrap();
    let err = build_operator(&job.operator, None).unwrap_err();
    assert_eq!(exit_code(&err), 1);
}
