//! Acceptance criteria, run in order on one thread of control so the timing
//! budgets are not distorted by other tests. Prints one PASS/FAIL line per
//! criterion and exits nonzero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use omin_core::abel::{transexp_threshold, AbelFunction};
use omin_core::census::{
    count_nonsingular_zeros, reduce_phi_complexity, search_radius, track_path, DeformationPath, SquareSystem,
    SystemFile, DEFAULT_MAX_DEPTH, DEFAULT_RADIUS,
};
use omin_core::morse::{
    component_bound, gamma_estimate, normalize, AffineSubspace, Formula, MilnorSchedule, PipelineOptions, QFFormula,
    Rel,
};
use omin_core::oracle::{grid_zero_clusters, GridSpec};
use omin_core::term::parse_term;
use omin_core::IntervalBox;

// Criterion 1
const ABEL_SAMPLES: usize = 10_000;
const ABEL_TOL: f64 = 1e-8;
const ABEL_BUDGET: Duration = Duration::from_secs(5);

// Criterion 2
const CHAIN_TOL: f64 = 1e-7;
const MONOTONE_PAIRS: usize = 10_000;
const DOMINATION_HI: f64 = 1e8;
const SUITE_BUDGET: Duration = Duration::from_secs(30);

// Criterion 3: least points of the scan grid past which x - phi(x) > i,
// recorded from a first scan over [1e-3, 1e8].
const TRANSEXP_THRESHOLDS: [f64; 3] = [1.002305815195621, 3.134180693285879, 4.4122607032553605];
const TRANSEXP_SCAN_HI: f64 = 1e8;
const INVERSION_REL: f64 = 1e-6;

// Criterion 4: oracle cluster counts recorded from a first oracle run.
const CORPUS: &[(&str, usize)] = &[
    ("square_1d", 2),
    ("cubic_1d", 3),
    ("exp_1d", 1),
    ("log_1d", 1),
    ("phi_1d", 1),
    ("circle_line", 2),
    ("hyperbola_circle", 4),
    ("two_circles", 4),
    ("sin_parabola", 3),
    ("phi_2d", 1),
    ("sphere_diagonal", 2),
    ("cube_corners", 8),
];
const CORPUS_BUDGET: Duration = Duration::from_secs(120);

// Criterion 5
const PATH_STEPS: usize = 100;
const FOLD_STEP: usize = 50;

// Criteria 6 and 7
const MORSE_RADIUS: f64 = 2.0;
const MORSE_SEED: u64 = 11;
const GAMMA_TRIALS: usize = 50;
const GAMMA_SEED: u64 = 7;

type Verdict = Result<String, String>;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixture(rel: &str) -> PathBuf {
    root().join("fixtures").join(rel)
}

fn system(name: &str) -> (SquareSystem, Option<f64>) {
    let text = std::fs::read_to_string(fixture(&format!("systems/{name}.json"))).unwrap();
    let f: SystemFile = serde_json::from_str(&text).unwrap();
    (SquareSystem::from_file(&f).unwrap(), f.radius)
}

fn equation(vars: &[&str], eq: &str) -> QFFormula {
    normalize(&Formula::atom(parse_term(eq, vars).unwrap(), Rel::Eq), vars.len())
}

fn ensure(ok: bool, msg: String) -> Verdict {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn abel_equation(abel: &AbelFunction) -> Verdict {
    let t = Instant::now();
    let worst = (0..ABEL_SAMPLES)
        .map(|i| {
            let x = -5.0 + 10.0 * i as f64 / (ABEL_SAMPLES - 1) as f64;
            (abel.eval(x.exp()).unwrap() - abel.eval(x).unwrap() - 1.0).abs()
        })
        .fold(0.0f64, f64::max);
    let took = t.elapsed();
    ensure(
        worst <= ABEL_TOL && took < ABEL_BUDGET,
        format!("sup residual {worst:.3e} (tol {ABEL_TOL:e}) in {took:.2?}"),
    )
}

fn increasing_suite(abel: &AbelFunction) -> Verdict {
    let t = Instant::now();
    let mut fails = Vec::new();

    let chain = (0..=1000)
        .map(|i| {
            let x = -3.0 + 6.0 * i as f64 / 1000.0;
            let d = abel.eval_deriv(x).unwrap();
            (d - abel.eval_deriv(x.exp()).unwrap() * x.exp()).abs() / (1.0 + d.abs())
        })
        .fold(0.0f64, f64::max);
    if chain > CHAIN_TOL {
        fails.push(format!("chain residual {chain:e}"));
    }

    // Pairs x < x + d with x spread over [-50, 1e3].
    let mut bad_pairs = 0;
    for i in 0..MONOTONE_PAIRS {
        let x = -50.0 + 1050.0 * i as f64 / MONOTONE_PAIRS as f64;
        let d = 1e-3 * (1.0 + (i % 7) as f64);
        // Split values: plain doubles cannot resolve phi near -1 for x << 0.
        let (a, b) = (abel.eval_split(x).unwrap(), abel.eval_split(x + d).unwrap());
        let gap = (b.0 - a.0) as f64 + (b.1 - a.1);
        if !(gap > 0.0) {
            bad_pairs += 1;
        }
    }
    if bad_pairs > 0 {
        fails.push(format!("{bad_pairs} non-increasing pairs"));
    }

    let mut out_of_range = 0;
    for i in 0..1000 {
        let x = -50.0 * i as f64 / 999.0;
        let (shift, frac) = abel.eval_split(x).unwrap();
        let above = shift > -2 || (shift == -2 && frac > 0.0);
        if !(above && shift as f64 + frac <= -1.0 + abel.seed_error()) {
            out_of_range += 1;
        }
    }
    if out_of_range > 0 {
        fails.push(format!("{out_of_range} values outside (-2, -1]"));
    }

    let d: Vec<f64> = [1e2, 1e4, 1e8].iter().map(|&x| abel.eval_deriv(x).unwrap()).collect();
    if !(d[0] > d[1] && d[1] > d[2]) {
        fails.push(format!("phi' not decreasing across decades: {d:?}"));
    }

    let mut thresholds = Vec::new();
    for n in 1..=2 {
        let rep = abel.check_domination(n, std::f64::consts::E, DOMINATION_HI, 4000).unwrap();
        match rep.threshold {
            Some(x) => thresholds.push(format!("n={n} from {x:.4}")),
            None => {
                // Locate the actual threshold further out for the report.
                let far = abel.check_domination(n, 20.0, 1e300, 4000).unwrap().threshold;
                fails.push(format!(
                    "no log_{n} domination threshold in [e, {DOMINATION_HI:e}] (scan to 1e300 finds {far:?})"
                ));
            }
        }
    }

    let took = t.elapsed();
    if took >= SUITE_BUDGET {
        fails.push(format!("took {took:.2?}"));
    }
    if fails.is_empty() {
        Ok(format!("chain {chain:.2e}, 0 bad pairs, domination {}, {took:.2?}", thresholds.join(", ")))
    } else {
        Err(fails.join("; "))
    }
}

fn trans_exponential(abel: &AbelFunction) -> Verdict {
    let mut fails = Vec::new();
    for (k, &frozen) in TRANSEXP_THRESHOLDS.iter().enumerate() {
        let i = k as u32 + 1;
        let found = transexp_threshold(abel, i, TRANSEXP_SCAN_HI).unwrap();
        if found != Some(frozen) {
            fails.push(format!("X_{i} moved: {found:?} vs {frozen}"));
        }
        // Independent samples past the threshold, far beyond the scan range.
        let (a, b) = (frozen.ln(), 1e300f64.ln());
        let bad = (0..5000)
            .map(|j| (a + (b - a) * j as f64 / 4999.0).exp())
            .filter(|&x| !abel.check_transexp(i, x).unwrap())
            .count();
        if bad > 0 {
            fails.push(format!("check_transexp({i}, x) false at {bad} samples past X_{i}"));
        }
    }
    let (a, b) = (0.1f64.ln(), 1e4f64.ln());
    let inv = (0..10_000)
        .map(|j| {
            let x = (a + (b - a) * j as f64 / 9999.0).exp();
            (abel.trans_exp(abel.eval(x).unwrap()).unwrap() - x).abs() / (1.0 + x)
        })
        .fold(0.0f64, f64::max);
    if inv > INVERSION_REL {
        fails.push(format!("inversion residual {inv:e}"));
    }
    ensure(
        fails.is_empty(),
        if fails.is_empty() {
            format!("X = {TRANSEXP_THRESHOLDS:?}, inversion {inv:.2e}")
        } else {
            fails.join("; ")
        },
    )
}

fn oracle_resolution(n: usize) -> usize {
    match n {
        1 => 4096,
        2 => 512,
        _ => 64,
    }
}

fn corpus(abel: &AbelFunction) -> Verdict {
    let t = Instant::now();
    let mut fails = Vec::new();
    let mut dims = [0usize; 3];
    let mut with_phi = 0;
    for &(name, frozen) in CORPUS {
        let (s, r) = system(name);
        dims[s.dim() - 1] += 1;
        with_phi += s.has_phi() as usize;
        let radius = r.unwrap_or_else(|| search_radius(&s, DEFAULT_RADIUS, abel).unwrap().radius);
        let grid = GridSpec::uniform(IntervalBox::cube(s.dim(), radius), oracle_resolution(s.dim())).unwrap();
        let oracle = grid_zero_clusters(&s, &grid, abel).unwrap().len();
        let census = count_nonsingular_zeros(&s, radius, DEFAULT_MAX_DEPTH, abel).unwrap();
        if !(census.exact && census.certified_count == oracle && oracle == frozen) {
            fails.push(format!(
                "{name}: census {} (exact {}), oracle {oracle}, recorded {frozen}",
                census.certified_count, census.exact
            ));
        }
    }
    let took = t.elapsed();
    if CORPUS.len() < 10 || dims.contains(&0) || with_phi < 2 {
        fails.push(format!("corpus shape: dims {dims:?}, {with_phi} with phi"));
    }
    if took >= CORPUS_BUDGET {
        fails.push(format!("took {took:.2?}"));
    }
    ensure(
        fails.is_empty(),
        if fails.is_empty() {
            format!("{} systems (dims {dims:?}, {with_phi} with phi) match the oracle in {took:.2?}", CORPUS.len())
        } else {
            fails.join("; ")
        },
    )
}

fn read_path(rel: &str) -> DeformationPath {
    serde_json::from_str(&std::fs::read_to_string(fixture(rel)).unwrap()).unwrap()
}

fn paths(abel: &AbelFunction) -> Verdict {
    let (s, r) = system("circle_line");
    let shift = track_path(&s, &read_path("paths/circle_line_shift.json"), PATH_STEPS, r.unwrap(), 40, abel).unwrap();
    let steady = shift.constant && shift.steps.iter().all(|p| p.exact && p.count == 2);
    // x^2 + 0.5 - t, i.e. x^2 - (t - 0.5)
    let (f, r) = system("fold_1d");
    let fold = track_path(&f, &read_path("paths/fold_sweep.json"), PATH_STEPS, r.unwrap(), 40, abel).unwrap();
    let flagged = fold.first_failure;
    let near = flagged.is_some_and(|j| j.abs_diff(FOLD_STEP) <= 1);
    ensure(
        steady && near,
        format!(
            "circle-line: {} steps, constant {}; fold flagged at step {flagged:?} (expected {FOLD_STEP} +- 1)",
            shift.steps.len(),
            shift.constant
        ),
    )
}

fn morse(abel: &AbelFunction) -> Verdict {
    let opts = PipelineOptions {
        oracle: true,
        ..Default::default()
    };
    let schedule = MilnorSchedule::for_radius(MORSE_RADIUS).unwrap();
    let run = |q: QFFormula| {
        let full = AffineSubspace::full(q.dim);
        component_bound(&q, &full, MORSE_RADIUS, &schedule, MORSE_SEED, &opts, abel).unwrap()
    };
    let circle = run(equation(&["x", "y"], "x*x + y*y - 1"));
    let points = run(equation(&["x"], "x*x - 1"));
    let empty = run(equation(&["x", "y"], "x*x + y*y + 1"));
    let got = [
        (circle.critical_count, circle.component_bound, circle.oracle_components),
        (points.critical_count, points.component_bound, points.oracle_components),
        (empty.critical_count, empty.component_bound, empty.oracle_components),
    ];
    ensure(
        got[0].0 == 4
            && got[0].1 == 2
            && got[0].2 == Some(1)
            && got[1].1 == 2
            && got[1].2 == Some(2)
            && got[2].1 == 0,
        format!("(critical, bound, oracle): circle {:?}, two points {:?}, empty {:?}", got[0], got[1], got[2]),
    )
}

fn gamma(abel: &AbelFunction) -> Verdict {
    let opts = PipelineOptions::default();
    let c = gamma_estimate(&equation(&["x", "y"], "x*x + y*y - 1"), GAMMA_TRIALS, MORSE_RADIUS, GAMMA_SEED, &opts, abel)
        .unwrap();
    let p = gamma_estimate(&equation(&["x", "y"], "0"), GAMMA_TRIALS, MORSE_RADIUS, GAMMA_SEED, &opts, abel).unwrap();
    ensure(
        c.estimate == 2
            && p.estimate == 1
            && c.within_bounds
            && p.within_bounds
            && c.uncertified_trials == 0
            && p.uncertified_trials == 0,
        format!(
            "circle estimate {} (max bound {:?}), plane estimate {}, within bounds {} / {}",
            c.estimate, c.max_bound, p.estimate, c.within_bounds, p.within_bounds
        ),
    )
}

fn reduction(abel: &AbelFunction) -> Verdict {
    let mut seen = Vec::new();
    let mut fails = Vec::new();
    for &(name, _) in CORPUS {
        let (s, _) = system(name);
        if !s.has_phi() {
            continue;
        }
        let radius = search_radius(&s, DEFAULT_RADIUS, abel).unwrap().radius;
        let reduced = reduce_phi_complexity(&s, radius, abel).unwrap();
        let a = count_nonsingular_zeros(&s, radius, DEFAULT_MAX_DEPTH, abel).unwrap();
        let b = count_nonsingular_zeros(&reduced, radius, DEFAULT_MAX_DEPTH, abel).unwrap();
        if reduced.has_phi() || !(a.exact && b.exact) || a.certified_count != b.certified_count {
            fails.push(format!("{name}: {} vs {}", a.certified_count, b.certified_count));
        }
        seen.push(format!("{name} {}={}", a.certified_count, b.certified_count));
    }
    ensure(
        fails.is_empty() && !seen.is_empty(),
        if fails.is_empty() { seen.join(", ") } else { fails.join("; ") },
    )
}

fn omin(args: &[&str]) -> (Option<i32>, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_omin"))
        .args(args)
        .current_dir(root())
        .output()
        .unwrap();
    (out.status.code(), out.stdout)
}

fn determinism(_: &AbelFunction) -> Verdict {
    let f = |p: &str| fixture(p).to_string_lossy().into_owned();
    let (sys, phi, path, circle) = (
        f("systems/circle_line.json"),
        f("systems/phi_1d.json"),
        f("paths/circle_line_shift.json"),
        f("formulas/circle.json"),
    );
    let runs: Vec<Vec<&str>> = vec![
        vec!["slog-check"],
        vec!["eval", "phi(x) * y", "--vars", "x,y", "--at", "1.5,2", "--box", "1:2,2:3"],
        vec!["zeros", &sys, "--regular", "--seed", "3"],
        vec!["zeros", &phi, "--reduce"],
        vec!["track", &sys, &path, "--steps", "20"],
        vec!["components", &circle, "--seed", "5"],
        vec!["gamma", &circle, "--trials", "10", "--seed", "7"],
    ];
    let mut fails = Vec::new();
    for args in &runs {
        let (c1, a) = omin(args);
        let (c2, b) = omin(args);
        if c1 != Some(0) || c2 != Some(0) || a != b || a.is_empty() {
            fails.push(format!("{}: exit {c1:?}/{c2:?}, identical {}", args[0], a == b));
        }
    }
    ensure(
        fails.is_empty(),
        if fails.is_empty() {
            format!("{} commands byte-identical across two runs", runs.len())
        } else {
            fails.join("; ")
        },
    )
}

fn main() {
    let abel = AbelFunction::default_build();
    let criteria: [(&str, fn(&AbelFunction) -> Verdict); 9] = [
        ("Abel equation on [-5, 5]", abel_equation),
        ("super-logarithm property suite", increasing_suite),
        ("trans-exponential thresholds and inversion", trans_exponential),
        ("certified census equals grid oracle", corpus),
        ("path constancy and fold detection", paths),
        ("Morse bound on circle, two points, empty set", morse),
        ("gamma estimator", gamma),
        ("phi complexity reduction keeps counts", reduction),
        ("CLI determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let verdict = catch_unwind(AssertUnwindSafe(|| check(&abel)))
            .unwrap_or_else(|e| Err(format!("panicked: {:?}", e.downcast_ref::<String>().cloned().unwrap_or_default())));
        match verdict {
            Ok(msg) => println!("PASS criterion {}: {name}: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {msg}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

