//! Discrete Caputo derivative on a uniform time grid (L1 scheme).
//!
//! For samples `f_0..f_n` spaced `dt` apart the L1 approximation of the
//! order-`δ` Caputo derivative at `t_n` is
//!
//! ```text
//! D^δ f(t_n) ≈ dt^(−δ) / Γ(2−δ) · Σ_{k=0}^{n−1} b_k (f_{n−k} − f_{n−k−1}),
//! b_k = (k+1)^(1−δ) − k^(1−δ)
//! ```
//!
//! which is accurate to `O(dt^(2−δ))` for smooth `f` and collapses to the
//! backward difference quotient when `δ = 1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gamma::gamma;

/// Order `δ ∈ (0, 1]` of the time derivative.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct FractionalOrder(f64);

impl FractionalOrder {
    pub const ONE: FractionalOrder = FractionalOrder(1.0);

    pub fn new(delta: f64) -> Result<Self> {
        if delta > 0.0 && delta <= 1.0 {
            Ok(FractionalOrder(delta))
        } else {
            Err(Error::Domain(format!(
                "fractional order must satisfy 0 < delta <= 1, got {delta}"
            )))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_integer(self) -> bool {
        self.0 == 1.0
    }
}

impl TryFrom<f64> for FractionalOrder {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        FractionalOrder::new(value)
    }
}

impl From<FractionalOrder> for f64 {
    fn from(value: FractionalOrder) -> f64 {
        value.0
    }
}

/// L1 convolution weights for a fixed order and step.
#[derive(Debug, Clone, PartialEq)]
pub struct L1Weights {
    delta: FractionalOrder,
    dt: f64,
    b: Vec<f64>,
    dt_pow: f64,
    gamma_2md: f64,
}

impl L1Weights {
    pub fn delta(&self) -> FractionalOrder {
        self.delta
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// `b_0..b_{n−1}`.
    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    /// `dt^(−δ) / Γ(2−δ)`.
    pub fn scale(&self) -> f64 {
        1.0 / (self.dt_pow * self.gamma_2md)
    }

    /// `Γ(2−δ) · dt^δ`, the inverse of [`scale`](Self::scale). This is the
    /// effective step length multiplying the right-hand side in an L1 time step.
    pub fn step_factor(&self) -> f64 {
        self.gamma_2md * self.dt_pow
    }

    /// Grows the table to at least `n` weights.
    pub fn extend_to(&mut self, n: usize) {
        let one_minus = 1.0 - self.delta.value();
        let start = self.b.len();
        self.b.extend((start..n).map(|k| weight(k, one_minus)));
    }

    /// Applies `scale` to an unscaled convolution sum. Division (rather than
    /// multiplication by a stored reciprocal) keeps the `δ = 1` case identical
    /// to `Δf / dt`.
    #[inline]
    fn apply_scale(&self, sum: f64) -> f64 {
        sum / self.dt_pow / self.gamma_2md
    }
}

#[inline]
fn weight(k: usize, one_minus: f64) -> f64 {
    if k == 0 {
        1.0
    } else {
        let k = k as f64;
        (k + 1.0).powf(one_minus) - k.powf(one_minus)
    }
}

/// Builds `b_0..b_{n−1}` and the scale factor.
pub fn l1_weights(delta: FractionalOrder, dt: f64, n: usize) -> Result<L1Weights> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Domain(format!("time step must be positive, got {dt}")));
    }
    if n == 0 {
        return Err(Error::Usage("L1 weights need n >= 1".into()));
    }
    let mut w = L1Weights {
        delta,
        dt,
        b: Vec::with_capacity(n),
        dt_pow: dt.powf(delta.value()),
        gamma_2md: gamma(2.0 - delta.value())?,
    };
    w.extend_to(n);
    Ok(w)
}

/// Uniformly spaced samples `f_0..f_n` of a scalar function.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarHistory {
    samples: Vec<f64>,
    dt: f64,
}

impl ScalarHistory {
    pub fn new(samples: Vec<f64>, dt: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Usage("history needs at least one sample".into()));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Domain(format!("sample spacing must be positive, got {dt}")));
        }
        Ok(ScalarHistory { samples, dt })
    }

    /// Samples `f(k·dt)` for `k = 0..=n`.
    pub fn sample(f: impl Fn(f64) -> f64, dt: f64, n: usize) -> Result<Self> {
        ScalarHistory::new((0..=n).map(|k| f(k as f64 * dt)).collect(), dt)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> ScalarHistory {
        ScalarHistory {
            samples: self.samples.iter().map(|&x| f(x)).collect(),
            dt: self.dt,
        }
    }
}

/// L1 Caputo derivative at the last sample of `history`.
///
/// `w` must share the history's step and hold at least `history.len() − 1`
/// weights; weights are prefix-stable, so a longer table is accepted.
pub fn caputo_l1(history: &ScalarHistory, w: &L1Weights) -> Result<f64> {
    let f = history.samples();
    if f.len() < 2 {
        return Err(Error::Usage("caputo_l1 needs at least two samples".into()));
    }
    check_compatible(history, w)?;
    Ok(caputo_at(f, f.len() - 1, w))
}

fn check_compatible(history: &ScalarHistory, w: &L1Weights) -> Result<()> {
    let n = history.len() - 1;
    if w.len() < n {
        return Err(Error::Usage(format!(
            "history has {n} intervals but only {} L1 weights were built",
            w.len()
        )));
    }
    if history.dt() != w.dt() {
        return Err(Error::Usage(format!(
            "history spacing {} differs from weight step {}",
            history.dt(),
            w.dt()
        )));
    }
    Ok(())
}

/// Derivative at node `n` using `f[0..=n]`.
fn caputo_at(f: &[f64], n: usize, w: &L1Weights) -> f64 {
    let b = w.b();
    let sum: f64 = (0..n).map(|k| b[k] * (f[n - k] - f[n - k - 1])).sum();
    w.apply_scale(sum)
}

/// Exact Caputo derivative of `t^p`, `Γ(p+1)/Γ(p+1−δ) · t^(p−δ)`, for `p ≥ 1`.
pub fn caputo_power_rule(p: f64, delta: FractionalOrder, t: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("power rule oracle needs p >= 1, got {p}")));
    }
    if !(t > 0.0) {
        return Err(Error::Domain(format!("power rule oracle needs t > 0, got {t}")));
    }
    let d = delta.value();
    Ok(gamma(p + 1.0)? / gamma(p + 1.0 - d)? * t.powf(p - d))
}

/// Discrete margins `2 f_n D^δ f(t_n) − D^δ(f²)(t_n)` for `n = 1..`.
///
/// The continuous inequality `D^δ(f²) ≤ 2 f D^δ f` makes every margin
/// non-negative; the L1 scheme inherits the property exactly because its
/// weights are positive and decreasing, so negative values beyond roundoff
/// signal a defect.
pub fn check_lemma2(history: &ScalarHistory, delta: FractionalOrder) -> Result<Vec<f64>> {
    if history.len() < 2 {
        return Err(Error::Usage("Lemma 2 check needs at least two samples".into()));
    }
    let n = history.len() - 1;
    let w = l1_weights(delta, history.dt(), n)?;
    let f = history.samples();
    let squared = history.map(|x| x * x);
    let f2 = squared.samples();
    Ok((1..=n)
        .map(|k| 2.0 * f[k] * caputo_at(f, k, &w) - caputo_at(f2, k, &w))
        .collect())
}
