//! Invariant suite for a built or loaded Abel function.

use serde::{Deserialize, Serialize};

use super::AbelFunction;
use crate::error::Result;

/// Thresholds the suite checks against. Residual-type thresholds scale with
/// the build tolerance relative to the default `1e-8`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteScale {
    pub abel_tol: f64,
    pub chain_rel: f64,
    pub inversion_rel: f64,
    pub fd_rel: f64,
    /// Upper end of the n = 2 domination scan.
    pub domination2_hi: f64,
}

impl SuiteScale {
    pub fn for_tol(tol: f64) -> Self {
        let f = (tol / 1e-8).max(1.0);
        SuiteScale {
            abel_tol: tol,
            chain_rel: 1e-7 * f,
            inversion_rel: 1e-6 * f,
            fd_rel: 1e-5 * f,
            domination2_hi: 1e300,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlogReport {
    pub order: usize,
    pub tol: f64,
    pub seed_error: f64,
    pub sup_dphi_fundamental: f64,
    pub checks: Vec<CheckResult>,
    pub pass: bool,
}

fn check(name: &str, measured: f64, threshold: f64, note: Option<String>) -> CheckResult {
    CheckResult {
        name: name.to_string(),
        measured,
        threshold,
        pass: measured <= threshold,
        note,
    }
}

fn lin(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| a + (b - a) * i as f64 / (n - 1) as f64)
}

fn geo(a: f64, b: f64, n: usize) -> impl Iterator<Item = f64> {
    lin(a.ln(), b.ln(), n).map(f64::exp)
}

/// Evaluation points shared by the monotonicity and inversion checks:
/// `[-50, 0]` uniformly, then `(0, 1e8]` log-spaced.
fn monotone_grid(n: usize) -> Vec<f64> {
    let half = n / 2;
    let mut xs: Vec<f64> = lin(-50.0, 0.0, half).collect();
    xs.extend(geo(1e-3, 1e8, n - half + 1));
    xs
}

/// Run every property check; `pass` is the conjunction.
pub fn run_invariant_suite(abel: &AbelFunction, scale: &SuiteScale) -> Result<SlogReport> {
    let mut checks = Vec::new();

    checks.push(check("abel_residual", abel.abel_residual(10_000)?, scale.abel_tol, None));

    let jumps = abel.junction_mismatch();
    let worst_jump = jumps.iter().fold(0.0f64, |m, j| m.max(j.abs()));
    checks.push(check(
        "junction_continuity",
        worst_jump,
        scale.abel_tol,
        Some(format!("value and derivative jumps at e up to order {}", abel.order())),
    ));

    // Compare split values so the check is not limited by the spacing of
    // doubles near -2.
    let xs = monotone_grid(10_001);
    let vals: Vec<(i64, f64)> = xs.iter().map(|&x| abel.eval_split(x)).collect::<Result<_>>()?;
    let violations = vals
        .windows(2)
        .filter(|w| {
            let (a, b) = (w[0], w[1]);
            let gap = if a.0 == b.0 { b.1 - a.1 } else { (b.0 - a.0) as f64 + (b.1 - a.1) };
            !(gap > 0.0)
        })
        .count();
    checks.push(check(
        "strictly_increasing",
        violations as f64,
        0.0,
        Some(format!("{} consecutive pairs over [-50, 1e8]", xs.len() - 1)),
    ));

    let mut below = 0usize;
    for x in lin(-50.0, 0.0, 1000) {
        let (shift, frac) = abel.eval_split(x)?;
        let above_minus_two = shift > -2 || (shift == -2 && frac > 0.0);
        if !(above_minus_two && (shift as f64 + frac) <= -1.0 + abel.seed_error()) {
            below += 1;
        }
    }
    checks.push(check("bounded_below", below as f64, 0.0, Some("-2 < phi(x) <= -1 for x <= 0".into())));

    let mut chain: f64 = 0.0;
    for x in lin(-3.0, 3.0, 1001) {
        let d = abel.eval_deriv(x)?;
        let r = (d - abel.eval_deriv(x.exp())? * x.exp()).abs() / (1.0 + d.abs());
        chain = chain.max(r);
    }
    checks.push(check("chain_identity", chain, scale.chain_rel, None));

    let d: Vec<f64> = [1.0, 1e2, 1e4, 1e8]
        .iter()
        .map(|&x| abel.eval_deriv(x))
        .collect::<Result<_>>()?;
    let decreasing = d.windows(2).all(|w| w[1] < w[0]) && d[3] > 0.0;
    checks.push(check(
        "derivative_decay",
        if decreasing { 0.0 } else { 1.0 },
        0.0,
        Some(format!("phi' at 1, 1e2, 1e4, 1e8 = {d:?}")),
    ));

    // phi'(x) <= sup_{[1,e]} phi' * log'(x) for x >= e
    let mut item3 = 0usize;
    for x in geo(std::f64::consts::E, 1e12, 200) {
        if abel.eval_deriv(x)? > abel.sup_dphi_fundamental() / x * (1.0 + 1e-12) {
            item3 += 1;
        }
    }
    checks.push(check("derivative_chain_bound", item3 as f64, 0.0, None));

    let mut fd: f64 = 0.0;
    for x in lin(-3.0, 100.0, 100) {
        let h = 1e-6 * (1.0 + x.abs());
        let approx = (abel.eval(x + h)? - abel.eval(x - h)?) / (2.0 * h);
        let exact = abel.eval_deriv(x)?;
        fd = fd.max((approx - exact).abs() / exact.abs());
    }
    checks.push(check("finite_difference", fd, scale.fd_rel, None));

    for (n, hi) in [(1u32, 1e8), (2u32, scale.domination2_hi)] {
        let lo = if n == 1 { std::f64::consts::E } else { 20.0 };
        let rep = abel.check_domination(n, lo, hi, 4000)?;
        checks.push(CheckResult {
            name: format!("log{n}_domination"),
            measured: rep.threshold.unwrap_or(f64::INFINITY),
            threshold: hi,
            pass: rep.threshold.is_some(),
            note: Some(format!("least sampled threshold in [{lo}, {hi:e}]")),
        });
    }

    for i in 1..=3u32 {
        let threshold = transexp_threshold(abel, i, 1e8)?;
        checks.push(CheckResult {
            name: format!("transexp_{i}"),
            measured: threshold.unwrap_or(f64::INFINITY),
            threshold: 1e8,
            pass: threshold.is_some(),
            note: Some("least sampled x past which x - phi(x) > i".into()),
        });
    }

    let mut inv: f64 = 0.0;
    for x in geo(0.1, 1e4, 2000) {
        let back = abel.trans_exp(abel.eval(x)?)?;
        inv = inv.max((back - x).abs() / (1.0 + x.abs()));
    }
    checks.push(check("inversion", inv, scale.inversion_rel, None));

    let pass = checks.iter().all(|c| c.pass);
    Ok(SlogReport {
        order: abel.order(),
        tol: abel.tol(),
        seed_error: abel.seed_error(),
        sup_dphi_fundamental: abel.sup_dphi_fundamental(),
        checks,
        pass,
    })
}

/// Least point of a log-spaced grid on `[1e-3, hi]` past which
/// `check_transexp(i, x)` holds at every grid point.
pub fn transexp_threshold(abel: &AbelFunction, i: u32, hi: f64) -> Result<Option<f64>> {
    let xs: Vec<f64> = geo(1e-3, hi, 4000).collect();
    let mut threshold = None;
    for &x in xs.iter().rev() {
        if abel.check_transexp(i, x)? {
            threshold = Some(x);
        } else {
            break;
        }
    }
    Ok(threshold)
}
