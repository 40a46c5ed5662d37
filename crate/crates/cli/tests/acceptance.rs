//! Acceptance criteria 1-10. Prints one line per criterion and fails the
//! target when any criterion fails.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use locent::corr_theorem::check_theorem;
use locent::ent_measures::{assistance_upper_bound, concurrence_pure, max_correlation};
use locent::le_engine::{
    entanglement_length, le_constructive, le_grid_oracle, le_refine, le_sampled, linear_fit, sandwich, EngineConfig,
    LengthConfig, MeasurementPlan, Method, OracleConfig, OrderRule, RefineConfig, SampleStrategy, SandwichConfig,
};
use locent::qstate::{correlation_matrix, make_cluster, make_ghz, reduced_density, PureState};
use locent::random::{random_pure_state, DensityEnsemble};
use locent::spin_models::{ground_state, ising_saturation_mx2, ising_spec, parity_symmetric, SolverConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn ising_state(n: usize, lambda: f64, epsilon_x: f64) -> (PureState, bool) {
    let spec = ising_spec(n, lambda, epsilon_x, false).expect("valid spec");
    let gs = ground_state(&spec, &SolverConfig::default()).expect("ground state");
    (gs.state, parity_symmetric(&spec))
}

fn central_pair(n: usize, d: usize) -> (usize, usize) {
    let i = (n - d) / 2;
    (i, i + d)
}

fn plan_directions(plan: &MeasurementPlan) -> Vec<locent::qstate::MeasurementDirection> {
    match plan {
        MeasurementPlan::Product { directions, .. } => directions.clone(),
        MeasurementPlan::Adaptive { tree, .. } => tree.clone(),
    }
}

fn ghz_maximal() -> Verdict {
    let cfg = EngineConfig::default();
    for n in 3..=12 {
        let r = le_constructive(&make_ghz(n).unwrap(), 0, n - 1, &OrderRule::default(), &cfg).unwrap();
        if (r.value - 1.0).abs() > 1e-9 {
            return verdict(false, format!("N={n}: LE {}", r.value));
        }
        let plan = r.plan.expect("constructive plan");
        if let Some(d) = plan_directions(&plan).iter().find(|d| (d.theta - FRAC_PI_2).abs() > 1e-9) {
            return verdict(false, format!("N={n}: direction theta {}", d.theta));
        }
    }
    verdict(true, "N=3..12: LE = 1, all directions equatorial")
}

fn cluster_gap() -> Verdict {
    let cfg = SandwichConfig::default();
    let mut correlated = Vec::new();
    let mut worst_le: f64 = 0.0;
    for n in 5..=10 {
        let state = make_cluster(n).unwrap();
        for i in 0..n {
            for j in (i + 1)..n {
                let q = correlation_matrix(&state, i, j).unwrap().q;
                if q.iter().any(|v| v.abs() >= 1e-10) {
                    correlated.push((n, i, j));
                }
                let (_, r) = sandwich(&state, i, j, &cfg).unwrap();
                worst_le = worst_le.max((r.value - 1.0).abs());
            }
        }
    }
    let edges_only = correlated.iter().all(|&(n, i, j)| (i, j) == (0, 1) || (i, j) == (n - 2, n - 1));
    let detail = format!(
        "max |LE-1| = {worst_le:.1e} over all pairs; {} pairs carry correlations{}",
        correlated.len(),
        if correlated.is_empty() {
            String::new()
        } else if edges_only {
            " (exactly the open-chain end pairs (0,1) and (N-2,N-1), <X Z> = 1)".to_string()
        } else {
            format!(" including {:?}", correlated.iter().find(|&&(n, i, j)| (i, j) != (0, 1) && (i, j) != (n - 2, n - 1)))
        }
    );
    verdict(worst_le <= 1e-6 && correlated.is_empty(), detail)
}

fn theorem_monotone() -> Verdict {
    let mut lines = Vec::new();
    let mut pass = true;
    for (stream, ensemble) in DensityEnsemble::ALL.iter().enumerate() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        rng.set_stream(stream as u64);
        let (mut min_gain, mut bad_inertia, mut nondeg) = (f64::INFINITY, 0, 0);
        for _ in 0..10_000 {
            let rho = ensemble.sample(3, &mut rng).unwrap();
            let c = check_theorem(&rho, 0, 1, 2).unwrap();
            min_gain = min_gain.min(c.gain());
            if *ensemble == DensityEnsemble::Full && !c.degenerate {
                nondeg += 1;
                if c.inertia != (2, 2) {
                    bad_inertia += 1;
                }
            }
        }
        pass &= min_gain >= -1e-10 && bad_inertia == 0;
        lines.push(format!("{} min gain {min_gain:.2e}", ensemble.name()));
        if *ensemble == DensityEnsemble::Full {
            lines.push(format!("inertia (2,2) on {}/{nondeg}", nondeg - bad_inertia));
        }
    }
    verdict(pass, lines.join(", "))
}

fn footnote_identity() -> Verdict {
    let mut rng = ChaCha20Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let s = random_pure_state(2, &mut rng).unwrap();
        let mc = max_correlation(&correlation_matrix(&s, 0, 1).unwrap()).value;
        worst = worst.max((mc - concurrence_pure(s.amplitudes()).unwrap()).abs());
    }
    verdict(worst <= 1e-10, format!("max deviation {worst:.1e}"))
}

fn sandwich_property() -> Verdict {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let ocfg = OracleConfig { grid: 24, ..OracleConfig::default() };
    let cfg = EngineConfig::default();
    let (mut below, mut above) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for _ in 0..1000 {
        let s = random_pure_state(4, &mut rng).unwrap();
        for i in 0..4 {
            for j in (i + 1)..4 {
                let le = le_grid_oracle(&s, i, j, &ocfg, &cfg).unwrap().value;
                let lower = max_correlation(&correlation_matrix(&s, i, j).unwrap()).value;
                let upper = assistance_upper_bound(&reduced_density(&s, &[i, j]).unwrap()).unwrap();
                below = below.max(lower - le);
                above = above.max(le - upper);
            }
        }
    }
    verdict(
        below <= 1e-6 && above <= 1e-6,
        format!("6000 pairs; max(lower-LE) = {below:.1e}, max(LE-upper) = {above:.1e}"),
    )
}

fn critical_scaling() -> Verdict {
    let n = 14;
    let (state, _) = ising_state(n, 1.0, 0.0);
    let cfg = EngineConfig::default();
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    let mut dominated = true;
    for d in 1..=6 {
        let (i, j) = central_pair(n, d);
        let qxx = correlation_matrix(&state, i, j).unwrap().q[(0, 0)];
        let le = le_constructive(&state, i, j, &OrderRule::default(), &cfg).unwrap().value;
        dominated &= le >= qxx - 1e-9;
        xs.push((d as f64).ln());
        ys.push(qxx.ln());
    }
    let (slope, _, _) = linear_fit(&xs, &ys);
    verdict(
        (-0.35..=-0.15).contains(&slope) && dominated,
        format!("log-log slope of Qxx {slope:.4} (target [-0.35, -0.15]); LE >= Qxx at all distances: {dominated}"),
    )
}

fn saturation() -> Verdict {
    let n = 16;
    let (state, parity) = ising_state(n, 2.0, 0.0);
    let target = ising_saturation_mx2(2.0).unwrap();
    // Pauli operators are twice the spin-1/2 operators, so the two-point
    // function carries a factor of four relative to the closed form.
    let prefactor = 4.0;
    let cfg = SandwichConfig { parity_symmetric: parity, ..SandwichConfig::default() };
    let mut series = Vec::new();
    let mut qxx10 = 0.0;
    for d in 1..=10 {
        let (i, j) = central_pair(n, d);
        let (bounds, r) = sandwich(&state, i, j, &cfg).unwrap();
        if d == 10 {
            qxx10 = correlation_matrix(&state, i, j).unwrap().q[(0, 0)];
        }
        debug_assert!(bounds.contains(r.value, 1e-9));
        series.push((d as f64, r.value));
    }
    let rel = (qxx10 / (prefactor * target) - 1.0).abs();
    let fit = entanglement_length(&series, &LengthConfig::default()).unwrap();
    verdict(
        rel <= 0.2 && !fit.is_finite(),
        format!(
            "Qxx(d=10) = {qxx10:.5}, ratio to closed form {:.3} (prefactor 4, rel. dev. {rel:.3}); xi_E = {}",
            qxx10 / target,
            fit.xi_e
        ),
    )
}

fn parse_csv(text: &str) -> Vec<HashMap<String, String>> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<String> = lines.next().unwrap_or("").split(',').map(str::to_string).collect();
    lines.map(|l| header.iter().cloned().zip(l.split(',').map(str::to_string)).collect()).collect()
}

fn run_cli(args: &[&str], threads: Option<&str>) -> (i32, Vec<u8>) {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_locent"));
    cmd.args(args);
    match threads {
        Some(t) => cmd.env("LOCENT_THREADS", t),
        None => cmd.env_remove("LOCENT_THREADS"),
    };
    let out = cmd.output().expect("run locent");
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn figure_reproduction() -> Verdict {
    let out_dir = Path::new(env!("CARGO_TARGET_TMPDIR"));
    let path = out_dir.join("ising_symmetry_broken.csv");
    let path_s = path.to_str().unwrap();
    let (code, _) = run_cli(
        &[
            "ising-sweep", "--n", "14", "--epsilon-x", "1e-3", "--distances", "4", "--lambda-grid", "0.1:2.5:0.1",
            "--out", path_s,
        ],
        None,
    );
    if code != 0 {
        return verdict(false, format!("ising-sweep exited {code}"));
    }
    let rows = parse_csv(&std::fs::read_to_string(&path).unwrap());
    let num = |r: &HashMap<String, String>, k: &str| r[k].parse::<f64>().unwrap();
    let lambdas: Vec<f64> = rows.iter().map(|r| num(r, "lambda")).collect();
    let qxx: Vec<f64> = rows.iter().map(|r| num(r, "q_xx")).collect();
    let dominated = rows.iter().all(|r| num(r, "le_estimate") >= num(r, "q_xx") - 1e-9);
    let maxima: Vec<usize> = (1..qxx.len() - 1).filter(|&k| qxx[k] > qxx[k - 1] && qxx[k] > qxx[k + 1]).collect();
    let single = maxima.len() == 1 && (0.8..=1.6).contains(&lambdas[maxima[0]]);
    let peak = maxima.first().map_or(f64::NAN, |&k| lambdas[k]);
    verdict(
        rows.len() == 25 && single && dominated,
        format!(
            "{} points, {} interior maxima of Qxx (at lambda {peak}); le_estimate >= Qxx: {dominated}; data in {path_s}",
            rows.len(),
            maxima.len()
        ),
    )
}

fn near_tightness() -> Verdict {
    let mut worst = (f64::NEG_INFINITY, 0, 0.0, 0);
    for n in 3..=10 {
        for lambda in [0.5, 1.0, 2.0] {
            let (state, parity) = ising_state(n, lambda, 0.0);
            let cfg = SandwichConfig { parity_symmetric: parity, method: Some(Method::Refined), ..SandwichConfig::default() };
            for i in 0..n - 1 {
                let (bounds, r) = sandwich(&state, i, i + 1, &cfg).unwrap();
                let gap = r.value - bounds.lower;
                if gap > worst.0 {
                    worst = (gap, n, lambda, i);
                }
            }
        }
    }
    let (gap, n, lambda, i) = worst;
    verdict(gap <= 1e-3, format!("largest refined - lower = {gap:.2e} (N={n}, lambda={lambda}, pair ({i},{}))", i + 1))
}

fn determinism() -> Verdict {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR"));
    let state_file = dir.join("acceptance_state.txt");
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    let s = random_pure_state(5, &mut rng).unwrap();
    let mut text = "5\n".to_string();
    for a in s.amplitudes() {
        text.push_str(&format!("{:e} {:e}\n", a.re, a.im));
    }
    std::fs::write(&state_file, text).unwrap();
    let runs: Vec<Vec<&str>> = vec![
        vec!["ghz", "--n", "9"],
        vec!["cluster", "--n", "7", "--format", "json"],
        vec!["ising-sweep", "--n", "12", "--lambda-grid", "0.5:1.5:0.5", "--distances", "1,3,5", "--fit-length"],
        vec!["ising-sweep", "--n", "11", "--method", "sampled", "--samples", "400", "--seed", "9"],
        vec!["theorem-check", "--samples", "2000", "--seed", "4"],
        vec!["bounds", state_file.to_str().unwrap()],
    ];
    for args in &runs {
        let a = run_cli(args, None);
        let b = run_cli(args, None);
        let serial = run_cli(args, Some("1"));
        if a.0 != 0 || a != b || a != serial {
            return verdict(false, format!("`locent {}` not reproducible (exit {})", args.join(" "), a.0));
        }
    }

    let par = EngineConfig::default();
    let seq = EngineConfig::sequential();
    let mut worst: f64 = 0.0;
    let (state, _) = ising_state(12, 1.0, 0.0);
    let order = OrderRule::default();
    for (i, j) in [(5, 6), (3, 8), (0, 11)] {
        let c = |cfg: &EngineConfig| le_constructive(&state, i, j, &order, cfg).unwrap().value;
        worst = worst.max((c(&par) - c(&seq)).abs());
        let s = |cfg: &EngineConfig| le_sampled(&state, i, j, &SampleStrategy::Constructive, 500, 1, cfg).unwrap().value;
        worst = worst.max((s(&par) - s(&seq)).abs());
    }
    let (small, _) = ising_state(8, 0.7, 0.0);
    let r = |cfg: &EngineConfig| le_refine(&small, 2, 5, None, &RefineConfig::default(), cfg).unwrap().value;
    worst = worst.max((r(&par) - r(&seq)).abs());
    verdict(worst <= 1e-12, format!("{} CLI runs byte-identical (repeat and 1 thread); serial vs parallel max diff {worst:.1e}", runs.len()))
}

type Criterion = (&'static str, fn() -> Verdict, Duration);

fn main() {
    let criteria: [Criterion; 10] = [
        ("GHZ maximal LE", ghz_maximal, Duration::from_secs(5)),
        ("cluster bound gap", cluster_gap, Duration::from_secs(30)),
        ("measurement keeps correlation", theorem_monotone, Duration::from_secs(60)),
        ("max correlation of pure pairs", footnote_identity, Duration::from_secs(1)),
        ("sandwich on random N=4", sandwich_property, Duration::from_secs(600)),
        ("critical scaling", critical_scaling, Duration::from_secs(300)),
        ("ordered-phase saturation", saturation, Duration::from_secs(600)),
        ("symmetry-broken sweep", figure_reproduction, Duration::from_secs(900)),
        ("near-tight lower bound", near_tightness, Duration::from_secs(600)),
        ("determinism", determinism, Duration::from_secs(600)),
    ];
    let filter: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    for (k, (name, run, budget)) in criteria.iter().enumerate() {
        let id = k + 1;
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let v = run();
        let elapsed = start.elapsed();
        let pass = v.pass && elapsed <= *budget;
        println!(
            "criterion {id:>2}: {} {name} ({:.2} s, budget {} s): {}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs(),
            v.detail
        );
        if !pass {
            failed.push(id);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
