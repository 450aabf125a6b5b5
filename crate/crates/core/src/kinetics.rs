//! Lengyel–Epstein reaction kinetics.
//!
//! ```text
//! F(u, v) = a − u − 4uv / (1 + u²)
//! G(u, v) = σ b (u − uv / (1 + u²))
//! ```
//!
//! together with the unique equilibrium `(α, 1 + α²)`, `α = a/5`, the invariant
//! rectangle `(0, a) × (0, 1 + a²)`, and the auxiliary function
//! `f_a(u) = (a − u)(1 + u²)/u` used by the global-stability argument.

use serde::{Deserialize, Serialize};

use crate::caputo::FractionalOrder;
use crate::error::{Error, Result};

/// Model constants plus the time-derivative order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    pub a: f64,
    pub b: f64,
    pub sigma: f64,
    pub d1: f64,
    pub d2: f64,
    pub delta: FractionalOrder,
}

impl SystemParams {
    /// Validated constructor; every constant must be finite and strictly positive.
    pub fn new(a: f64, b: f64, sigma: f64, d1: f64, d2: f64, delta: f64) -> Result<Self> {
        let p = SystemParams {
            a,
            b,
            sigma,
            d1,
            d2,
            delta: FractionalOrder::new(delta)
                .map_err(|_| Error::config("params.delta", format!("must satisfy 0 < delta <= 1, got {delta}")))?,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("a", self.a),
            ("b", self.b),
            ("sigma", self.sigma),
            ("d1", self.d1),
            ("d2", self.d2),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::config(
                    format!("params.{name}"),
                    format!("must be a finite, strictly positive constant, got {value}"),
                ));
            }
        }
        FractionalOrder::new(self.delta.value()).map_err(|e| Error::config("params.delta", e.to_string()))?;
        Ok(())
    }

    pub fn with_delta(mut self, delta: FractionalOrder) -> Self {
        self.delta = delta;
        self
    }

    /// `α = a / 5`.
    #[inline]
    pub fn alpha(&self) -> f64 {
        self.a / 5.0
    }

    #[inline]
    pub fn sigma_b(&self) -> f64 {
        self.sigma * self.b
    }
}

/// Evaluates `(F, G)` at `(u, v)`.
#[inline]
pub fn reaction_rates(u: f64, v: f64, p: &SystemParams) -> (f64, f64) {
    let q = u * v / (1.0 + u * u);
    (p.a - u - 4.0 * q, p.sigma_b() * (u - q))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub alpha: f64,
    pub u_star: f64,
    pub v_star: f64,
}

impl Equilibrium {
    /// Euclidean norm `|(u*, v*)|`.
    pub fn norm(&self) -> f64 {
        self.u_star.hypot(self.v_star)
    }
}

pub fn equilibrium(p: &SystemParams) -> Equilibrium {
    let alpha = p.alpha();
    Equilibrium {
        alpha,
        u_star: alpha,
        v_star: 1.0 + alpha * alpha,
    }
}

/// The rectangle `(0, u_max) × (0, v_max)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantRectangle {
    pub u_max: f64,
    pub v_max: f64,
}

impl InvariantRectangle {
    /// Whether `(u, v)` lies in the closed rectangle enlarged by `slack`.
    pub fn contains_closed(&self, u: f64, v: f64, slack: f64) -> bool {
        u >= -slack && u <= self.u_max + slack && v >= -slack && v <= self.v_max + slack
    }

    pub fn contains_open(&self, u: f64, v: f64) -> bool {
        u > 0.0 && u < self.u_max && v > 0.0 && v < self.v_max
    }
}

/// Samples per rectangle face used by [`invariant_rectangle`].
pub const DEFAULT_FACE_SAMPLES: usize = 1000;

/// The invariant rectangle `(0, a) × (0, 1 + a²)`, after confirming on
/// [`DEFAULT_FACE_SAMPLES`] points per face that `(F, G)` does not point outward.
pub fn invariant_rectangle(p: &SystemParams) -> Result<InvariantRectangle> {
    invariant_rectangle_sampled(p, DEFAULT_FACE_SAMPLES)
}

pub fn invariant_rectangle_sampled(p: &SystemParams, samples: usize) -> Result<InvariantRectangle> {
    let rect = InvariantRectangle {
        u_max: p.a,
        v_max: 1.0 + p.a * p.a,
    };
    let interior = |max: f64| (1..=samples).map(move |j| max * j as f64 / (samples + 1) as f64);
    for v in interior(rect.v_max) {
        let (f_left, _) = reaction_rates(0.0, v, p);
        let (f_right, _) = reaction_rates(rect.u_max, v, p);
        if f_left < 0.0 || f_right > 0.0 {
            return Err(Error::Consistency(format!(
                "u-faces not inward at v = {v}: F(0,v) = {f_left}, F(a,v) = {f_right}"
            )));
        }
    }
    for u in interior(rect.u_max) {
        let (_, g_bottom) = reaction_rates(u, 0.0, p);
        let (_, g_top) = reaction_rates(u, rect.v_max, p);
        if g_bottom < 0.0 || g_top > 0.0 {
            return Err(Error::Consistency(format!(
                "v-faces not inward at u = {u}: G(u,0) = {g_bottom}, G(u,1+a²) = {g_top}"
            )));
        }
    }
    Ok(rect)
}

/// Equilibrium Jacobian entries and invariants.
///
/// The Jacobian is `[[F0, F1], [σ G0, σ G1]]`; `G0` and `G1` are stored
/// without the factor σ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct JacobianSummary {
    pub F0: f64,
    pub F1: f64,
    pub G0: f64,
    pub G1: f64,
    pub trace: f64,
    pub det: f64,
    pub upsilon: f64,
}

pub fn jacobian_summary(p: &SystemParams) -> JacobianSummary {
    let alpha = p.alpha();
    let s = 1.0 + alpha * alpha;
    let f0 = (3.0 * alpha * alpha - 5.0) / s;
    let f1 = -4.0 * alpha / s;
    let g0 = 2.0 * p.b * alpha * alpha / s;
    let g1 = -p.b * alpha / s;
    let trace = f0 + p.sigma * g1;
    let det = 5.0 * p.sigma_b() * alpha / s;
    JacobianSummary {
        F0: f0,
        F1: f1,
        G0: g0,
        G1: g1,
        trace,
        det,
        upsilon: trace * trace - 4.0 * det,
    }
}

/// `φ(u) = u / (1 + u²)`.
#[inline]
pub fn phi(u: f64) -> f64 {
    u / (1.0 + u * u)
}

/// Returns `(φ(u), f_a(u))` with `f_a(u) = (a − u)/φ(u)`.
pub fn f_a_and_phi(u: f64, p: &SystemParams) -> Result<(f64, f64)> {
    if !(u > 0.0) {
        return Err(Error::Domain(format!("f_a has a pole at u = 0; need u > 0, got {u}")));
    }
    Ok((phi(u), (p.a - u) * (1.0 + u * u) / u))
}

/// `f_a'(u) = −a/u² + a − 2u`.
#[inline]
fn f_a_derivative(u: f64, a: f64) -> f64 {
    -a / (u * u) + a - 2.0 * u
}

/// Whether `f_a` is strictly decreasing on `(0, a)`: consecutive differences
/// over `samples` interior points are negative and the derivative is
/// non-positive at every midpoint.
pub fn f_a_decreasing(p: &SystemParams, samples: usize) -> bool {
    let samples = samples.max(2);
    let h = p.a / (samples + 1) as f64;
    let values: Vec<f64> = (1..=samples)
        .map(|j| {
            let u = j as f64 * h;
            (p.a - u) * (1.0 + u * u) / u
        })
        .collect();
    let diffs_negative = values.windows(2).all(|w| w[1] - w[0] < 0.0);
    let slopes_nonpositive = (1..samples).all(|j| f_a_derivative((j as f64 + 0.5) * h, p.a) <= 0.0);
    diffs_negative && slopes_nonpositive
}
