//! Built-in oracle suite behind `lefrac verify`.
//!
//! Every check compares library output against an independent computation:
//! closed forms, finite differences, bisection, or a separately coded
//! integer-order stepper.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::Serialize;

use crate::caputo::{caputo_l1, caputo_power_rule, check_lemma2, l1_weights, FractionalOrder, ScalarHistory};
use crate::error::Result;
use crate::kinetics::{equilibrium, jacobian_summary, reaction_rates, JacobianSummary, SystemParams};
use crate::solver::{make_ic, Grid, InitialCondition, Simulation, StepOptions};
use crate::stability::{critical_order, turing_band};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        CheckResult { name, passed, detail }
    }

    fn from_result(name: &'static str, r: Result<(bool, String)>) -> Self {
        match r {
            Ok((passed, detail)) => CheckResult::new(name, passed, detail),
            Err(e) => CheckResult::new(name, false, format!("error: {e}")),
        }
    }
}

pub type JacobianFn = dyn Fn(&SystemParams) -> JacobianSummary + Sync;

/// Hooks for exercising the suite against deliberately broken inputs.
pub struct VerifyOptions<'a> {
    pub jacobian: &'a JacobianFn,
}

impl Default for VerifyOptions<'_> {
    fn default() -> Self {
        VerifyOptions {
            jacobian: &jacobian_summary,
        }
    }
}

pub fn run_verification(opts: &VerifyOptions) -> Vec<CheckResult> {
    let base = SystemParams::new(15.0, 1.0, 7.0, 1.0, 10.0, 1.0).expect("valid constants");
    let turing = SystemParams::new(15.0, 1.2, 8.0, 1.0, 24.0, 1.0).expect("valid constants");
    vec![
        check_power_rule(),
        check_lemma2_margins(),
        check_equilibrium(),
        check_jacobian(&base, opts.jacobian),
        check_jacobian(&turing, opts.jacobian),
        check_turing_band(&turing),
        check_critical_order(&base),
        check_integer_order_degeneration(),
    ]
}

/// Relative L1 error for `f = t²`, `δ = 0.5` at `t = 1`.
pub fn power_rule_error(dt: f64) -> Result<f64> {
    let delta = FractionalOrder::new(0.5)?;
    let n = (1.0 / dt).round() as usize;
    let h = ScalarHistory::sample(|t| t * t, dt, n)?;
    let approx = caputo_l1(&h, &l1_weights(delta, dt, n + 1)?)?;
    let exact = caputo_power_rule(2.0, delta, 1.0)?;
    Ok(((approx - exact) / exact).abs())
}

pub fn check_power_rule() -> CheckResult {
    CheckResult::from_result(
        "L1 power rule (t^2, delta 0.5)",
        (|| {
            let coarse = power_rule_error(2e-3)?;
            let fine = power_rule_error(1e-3)?;
            let ratio = coarse / fine;
            let passed = ratio >= 2f64.powf(1.4) && fine < 1e-2;
            Ok((
                passed,
                format!(
                    "rel err {fine:.3e} at dt=1e-3, halving ratio {ratio:.3} (need >= {:.3})",
                    2f64.powf(1.4)
                ),
            ))
        })(),
    )
}

/// Test functions on `[0, 2]` for the discrete margin check.
pub type TestFunction = (&'static str, fn(f64) -> f64);

pub fn lemma2_suite() -> Vec<TestFunction> {
    vec![
        ("constant", |_| 1.7),
        ("t", |t| t),
        ("t^2", |t| t * t),
        ("exp(-t)", |t| (-t).exp()),
        ("sin", f64::sin),
    ]
}

pub fn check_lemma2_margins() -> CheckResult {
    CheckResult::from_result(
        "discrete product-rule margins",
        (|| {
            let mut worst = f64::INFINITY;
            for (_, f) in lemma2_suite() {
                let h = ScalarHistory::sample(f, 0.01, 200)?;
                for d in [0.3, 0.5, 0.7, 0.9] {
                    let m = check_lemma2(&h, FractionalOrder::new(d)?)?;
                    worst = m.into_iter().fold(worst, f64::min);
                }
            }
            Ok((worst >= -1e-8, format!("smallest margin {worst:.3e}")))
        })(),
    )
}

pub fn check_equilibrium() -> CheckResult {
    CheckResult::from_result(
        "equilibrium at a = 15",
        (|| {
            let p = SystemParams::new(15.0, 1.0, 7.0, 1.0, 10.0, 1.0)?;
            let e = equilibrium(&p);
            let (f, g) = reaction_rates(e.u_star, e.v_star, &p);
            let passed = e.u_star == 3.0 && e.v_star == 10.0 && f.abs() < 1e-14 && g.abs() < 1e-14;
            Ok((
                passed,
                format!("({}, {}), residual ({f:.1e}, {g:.1e})", e.u_star, e.v_star),
            ))
        })(),
    )
}

/// Compares the Jacobian entries against central differences of the rates.
pub fn check_jacobian(p: &SystemParams, jacobian: &JacobianFn) -> CheckResult {
    let e = equilibrium(p);
    let j = jacobian(p);
    let h = 1e-6;
    let du = |k: usize| {
        let (fp, gp) = reaction_rates(e.u_star + h, e.v_star, p);
        let (fm, gm) = reaction_rates(e.u_star - h, e.v_star, p);
        if k == 0 {
            (fp - fm) / (2.0 * h)
        } else {
            (gp - gm) / (2.0 * h)
        }
    };
    let dv = |k: usize| {
        let (fp, gp) = reaction_rates(e.u_star, e.v_star + h, p);
        let (fm, gm) = reaction_rates(e.u_star, e.v_star - h, p);
        if k == 0 {
            (fp - fm) / (2.0 * h)
        } else {
            (gp - gm) / (2.0 * h)
        }
    };
    let pairs = [
        (j.F0, du(0)),
        (j.F1, dv(0)),
        (p.sigma * j.G0, du(1)),
        (p.sigma * j.G1, dv(1)),
    ];
    let worst = pairs.iter().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    CheckResult::new(
        "Jacobian vs central differences",
        worst < 1e-6,
        format!("a={} b={} sigma={}: max deviation {worst:.2e}", p.a, p.b, p.sigma),
    )
}

pub fn check_turing_band(p: &SystemParams) -> CheckResult {
    let j = jacobian_summary(p);
    let det = |l: f64| (j.F0 - p.d1 * l) * (p.sigma * j.G1 - p.d2 * l) - j.F1 * p.sigma * j.G0;
    let bisect = |mut lo: f64, mut hi: f64| {
        let s = det(lo).signum();
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if det(mid).signum() == s {
                lo = mid
            } else {
                hi = mid
            }
        }
        0.5 * (lo + hi)
    };
    // det is a convex parabola; its minimum separates the roots.
    let vertex = (j.F0 * p.d2 + p.sigma * j.G1 * p.d1) / (2.0 * p.d1 * p.d2);
    match turing_band(p) {
        Some((lo, hi)) if det(vertex) < 0.0 => {
            let (blo, bhi) = (bisect(0.0, vertex), bisect(vertex, vertex + 1e3));
            let dev = (lo - blo).abs().max((hi - bhi).abs());
            CheckResult::new(
                "Turing band vs bisection",
                dev < 1e-9,
                format!("({lo:.6}, {hi:.6}), deviation {dev:.1e}"),
            )
        }
        other => CheckResult::new("Turing band vs bisection", false, format!("unexpected band {other:?}")),
    }
}

pub fn check_critical_order(p: &SystemParams) -> CheckResult {
    let j = jacobian_summary(p);
    let disc = Complex64::new(j.trace * j.trace - 4.0 * j.det, 0.0).sqrt();
    let lam = (Complex64::new(j.trace, 0.0) + disc) / 2.0;
    let brute = lam.arg().abs() / FRAC_PI_2;
    match critical_order(p) {
        Some(c) => CheckResult::new(
            "critical order vs direct eigenvalue",
            (c - brute).abs() < 1e-10 && (c - 0.990_177).abs() < 1e-4,
            format!("{c:.6} (direct {brute:.6})"),
        ),
        None => CheckResult::new(
            "critical order vs direct eigenvalue",
            false,
            "analyzer reported no critical order".into(),
        ),
    }
}

/// Backward Euler in diffusion, forward Euler in reaction, on a 1D grid with
/// reflected boundaries; dense assembly and Gaussian elimination.
pub fn reference_integer_step(u: &[f64], v: &[f64], p: &SystemParams, length: f64, dt: f64) -> (Vec<f64>, Vec<f64>) {
    let n = u.len();
    let h = length / (n - 1) as f64;
    let rates: Vec<(f64, f64)> = u.iter().zip(v).map(|(&a, &b)| reaction_rates(a, b, p)).collect();
    let rhs_u: Vec<f64> = (0..n).map(|i| u[i] + dt * rates[i].0).collect();
    let rhs_v: Vec<f64> = (0..n).map(|i| v[i] + dt * rates[i].1).collect();
    let system = |d: f64| {
        let c = dt * d / (h * h);
        let mut a = vec![vec![0.0; n]; n];
        for (i, row) in a.iter_mut().enumerate() {
            row[i] = 1.0 + 2.0 * c;
            let left = if i == 0 { 1 } else { i - 1 };
            let right = if i == n - 1 { n - 2 } else { i + 1 };
            row[left] -= c;
            row[right] -= c;
        }
        a
    };
    (gauss_solve(system(p.d1), rhs_u), gauss_solve(system(p.d2), rhs_v))
}

fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .expect("non-empty");
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                let (upper, lower) = a.split_at_mut(row);
                for (x, y) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                    *x -= f * y;
                }
                b[row] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    x
}

/// Largest relative deviation between the `δ = 1` stepper and the reference
/// over `steps` steps of the standard 1D setup.
pub fn integer_order_deviation(steps: usize) -> Result<f64> {
    let p = SystemParams::new(15.0, 1.0, 7.0, 1.0, 10.0, 1.0)?;
    let (length, dt) = (20.0, 1e-3);
    let grid = Grid::interval(length, 41)?;
    let init = make_ic(&InitialCondition::Sinusoidal {}, &grid, &p, 0)?;
    let (mut ru, mut rv) = (init.u.clone(), init.v.clone());
    let mut sim = Simulation::new(p, grid, dt, init, StepOptions::default())?;
    let mut worst: f64 = 0.0;
    for _ in 0..steps {
        let s = sim.advance()?;
        (ru, rv) = reference_integer_step(&ru, &rv, &p, length, dt);
        let scale = ru.iter().chain(&rv).fold(0.0f64, |m, x| m.max(x.abs()));
        let dev =
            s.u.iter()
                .zip(&ru)
                .chain(s.v.iter().zip(&rv))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
        worst = worst.max(dev / scale);
    }
    Ok(worst)
}

pub fn check_integer_order_degeneration() -> CheckResult {
    CheckResult::from_result(
        "order-one stepper vs integer-order reference",
        (|| {
            let dev = integer_order_deviation(1000)?;
            Ok((dev <= 1e-9, format!("max relative deviation {dev:.2e} over 1000 steps")))
        })(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes() {
        for r in run_verification(&VerifyOptions::default()) {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }

    #[test]
    fn flipped_jacobian_entry_is_caught() {
        let broken = |p: &SystemParams| {
            let mut j = jacobian_summary(p);
            j.F1 = -j.F1;
            j
        };
        let results = run_verification(&VerifyOptions { jacobian: &broken });
        let jac: Vec<_> = results.iter().filter(|r| r.name.starts_with("Jacobian")).collect();
        assert!(!jac.is_empty() && jac.iter().all(|r| !r.passed));
        assert!(results
            .iter()
            .filter(|r| !r.name.starts_with("Jacobian"))
            .all(|r| r.passed));
    }

    #[test]
    fn halving_dt_shrinks_power_rule_error() {
        let r = power_rule_error(2e-3).unwrap() / power_rule_error(1e-3).unwrap();
        assert!(r >= 2f64.powf(1.4), "{r}");
    }
}
