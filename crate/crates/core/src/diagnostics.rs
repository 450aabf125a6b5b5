//! Trajectory diagnostics: the Lyapunov functional, convergence metrics and
//! pattern statistics.

use serde::{Deserialize, Serialize};

use crate::caputo::{caputo_l1, l1_weights, ScalarHistory};
use crate::error::{Error, Result};
use crate::kinetics::{equilibrium, Equilibrium, SystemParams};
use crate::solver::{FieldState, Grid, ProbeSeries};

/// Relative slack allowed when checking `L(t) ≤ L(0)`.
pub const LYAPUNOV_GROWTH_SLACK: f64 = 1e-8;
/// `L(t_end)` must fall below this fraction of `L(0)`.
pub const LYAPUNOV_DECAY_FRACTION: f64 = 0.01;

/// Trapezoidal quadrature of `σb/3·U³ + σb·u*·U² + 2V²`, `U = u − u*`, `V = v − v*`.
pub fn lyapunov_value(state: &FieldState, p: &SystemParams, grid: &Grid) -> Result<f64> {
    state.check_shape(grid)?;
    let eq = equilibrium(p);
    let sb = p.sigma_b();
    let w = grid.quadrature_weights();
    Ok(state
        .u
        .iter()
        .zip(&state.v)
        .zip(&w)
        .map(|((&u, &v), &w)| {
            let uu = u - eq.u_star;
            let vv = v - eq.v_star;
            w * (sb / 3.0 * uu.powi(3) + sb * eq.u_star * uu * uu + 2.0 * vv * vv)
        })
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSample {
    pub t: f64,
    #[serde(rename = "L")]
    pub l: f64,
    /// Discrete Caputo derivative of the `L` series; absent at `t = 0` and
    /// wherever snapshot spacing is not uniform.
    #[serde(rename = "dL_fractional")]
    pub dl_fractional: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LyapunovVerdict {
    Consistent,
    Inconsistent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovReport {
    pub samples: Vec<LyapunovSample>,
    pub verdict: LyapunovVerdict,
    /// `max_n L(t_n) / L(0)` (1 when `L(0) = 0` and all samples vanish).
    pub max_ratio: f64,
    /// `L(t_end) / L(0)`.
    pub final_ratio: f64,
}

/// Evaluates `L` at each state and checks `L(t_n) ≤ L(0)(1 + 1e−8)` for all
/// `n` and `L(t_end) < 0.01 L(0)`. A trajectory that sits at the equilibrium
/// (`L ≡ 0`) is consistent.
pub fn lyapunov_monitor(states: &[FieldState], p: &SystemParams, grid: &Grid) -> Result<LyapunovReport> {
    if states.is_empty() {
        return Err(Error::Usage("Lyapunov monitor needs at least one state".into()));
    }
    let values = states
        .iter()
        .map(|s| lyapunov_value(s, p, grid))
        .collect::<Result<Vec<_>>>()?;
    let times: Vec<f64> = states.iter().map(|s| s.t).collect();
    let derivs = fractional_derivative_series(&times, &values, p)?;
    let samples = times
        .iter()
        .zip(&values)
        .zip(derivs)
        .map(|((&t, &l), d)| LyapunovSample { t, l, dl_fractional: d })
        .collect();

    let l0 = values[0];
    let last = *values.last().expect("non-empty");
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (verdict, max_ratio, final_ratio) = if l0 == 0.0 {
        let all_zero = values.iter().all(|&l| l == 0.0);
        let v = if all_zero {
            LyapunovVerdict::Consistent
        } else {
            LyapunovVerdict::Inconsistent
        };
        (
            v,
            if all_zero { 1.0 } else { f64::INFINITY },
            if all_zero { 0.0 } else { f64::INFINITY },
        )
    } else {
        let bounded = values.iter().all(|&l| l <= l0 * (1.0 + LYAPUNOV_GROWTH_SLACK));
        let decayed = last < LYAPUNOV_DECAY_FRACTION * l0;
        let v = if bounded && decayed {
            LyapunovVerdict::Consistent
        } else {
            LyapunovVerdict::Inconsistent
        };
        (v, max / l0, last / l0)
    };
    Ok(LyapunovReport {
        samples,
        verdict,
        max_ratio,
        final_ratio,
    })
}

/// L1 derivative of a sampled series at each point of its uniform prefix.
fn fractional_derivative_series(times: &[f64], values: &[f64], p: &SystemParams) -> Result<Vec<Option<f64>>> {
    let mut out = vec![None; values.len()];
    if values.len() < 2 {
        return Ok(out);
    }
    let dt = times[1] - times[0];
    if !(dt > 0.0) {
        return Ok(out);
    }
    let uniform = times
        .iter()
        .enumerate()
        .take_while(|(n, &t)| (t - times[0] - *n as f64 * dt).abs() <= 1e-9 * t.abs().max(1.0))
        .count();
    let w = l1_weights(p.delta, dt, uniform)?;
    for n in 1..uniform {
        let h = ScalarHistory::new(values[..=n].to_vec(), dt)?;
        out[n] = Some(caputo_l1(&h, &w)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceMetrics {
    /// `|(u, v)_last − (u*, v*)| / |(u*, v*)|`.
    pub final_error: f64,
    /// `max − min` of `u` over the last quarter of the samples.
    pub tail_amplitude: f64,
}

pub fn convergence_metrics(series: &ProbeSeries, eq: &Equilibrium) -> Result<ConvergenceMetrics> {
    let n = series.len();
    if n == 0 {
        return Err(Error::Usage("convergence metrics need a non-empty series".into()));
    }
    let final_error = (series.u[n - 1] - eq.u_star).hypot(series.v[n - 1] - eq.v_star) / eq.norm();
    let tail = &series.u[(3 * n) / 4..];
    let (lo, hi) = tail.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &u| {
        (lo.min(u), hi.max(u))
    });
    Ok(ConvergenceMetrics {
        final_error,
        tail_amplitude: hi - lo,
    })
}

/// Largest per-node distance to the equilibrium, relative to `|(u*, v*)|`.
pub fn sup_distance(state: &FieldState, eq: &Equilibrium) -> f64 {
    state
        .u
        .iter()
        .zip(&state.v)
        .map(|(&u, &v)| (u - eq.u_star).hypot(v - eq.v_star))
        .fold(0.0, f64::max)
        / eq.norm()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldStats {
    pub spatial_variance: f64,
    pub min: f64,
    pub max: f64,
    /// Nodes that are ≥ all 8 neighbours and > at least one of them.
    pub extrema_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatternMetrics {
    pub u: FieldStats,
    pub v: FieldStats,
}

pub fn pattern_metrics(state: &FieldState, grid: &Grid) -> Result<PatternMetrics> {
    if grid.dim() != 2 {
        return Err(Error::Usage(format!(
            "pattern metrics need a 2D state, got {}D",
            grid.dim()
        )));
    }
    state.check_shape(grid)?;
    let w = grid.quadrature_weights();
    Ok(PatternMetrics {
        u: field_stats(&state.u, &w, grid),
        v: field_stats(&state.v, &w, grid),
    })
}

fn field_stats(f: &[f64], w: &[f64], grid: &Grid) -> FieldStats {
    let total: f64 = w.iter().sum();
    let mean = f.iter().zip(w).map(|(x, w)| x * w).sum::<f64>() / total;
    let spatial_variance = f.iter().zip(w).map(|(x, w)| w * (x - mean).powi(2)).sum::<f64>() / total;
    let (min, max) = f.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
        (lo.min(x), hi.max(x))
    });

    let (nx, ny) = (grid.counts()[0], grid.counts()[1]);
    let mut extrema_count = 0;
    for j in 0..ny {
        for i in 0..nx {
            let c = f[j * nx + i];
            let mut dominates = true;
            let mut strictly = false;
            for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    if di == 0 && dj == 0 {
                        continue;
                    }
                    let (ii, jj) = (i as i64 + di, j as i64 + dj);
                    if ii < 0 || jj < 0 || ii >= nx as i64 || jj >= ny as i64 {
                        continue;
                    }
                    let n = f[jj as usize * nx + ii as usize];
                    dominates &= c >= n;
                    strictly |= c > n;
                }
            }
            if dominates && strictly {
                extrema_count += 1;
            }
        }
    }
    FieldStats {
        spatial_variance,
        min,
        max,
        extrema_count,
    }
}
