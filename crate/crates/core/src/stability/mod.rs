//! Local stability of the equilibrium for the fractional system.
//!
//! An equilibrium of `D^δ w = f(w)` is locally asymptotically stable iff
//! every Jacobian eigenvalue satisfies `|arg λ| > δπ/2`. For the kinetics
//! alone this yields a critical order `δ* = (2/π)|arg λ|` whenever the
//! eigenvalues are complex with positive real part; with diffusion the same
//! test is applied to each Neumann mode `J − λ_i diag(d1, d2)`.

mod modes;
mod report;

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::caputo::FractionalOrder;
use crate::error::{Error, Result};
use crate::kinetics::{jacobian_summary, SystemParams};

pub use modes::{
    d_threshold, mode_analysis, neumann_eigenvalues, turing_band, upsilon_reduced_discriminant, upsilon_roots,
    ModeAnalysis, NeumannGeometry, NeumannSpectrum,
};
pub use report::{
    global_stability_condition, pde_classify, OverallVerdict, StabilityReport, TreeOutcome, DEFAULT_MODE_COUNT,
};

/// Margins within this distance of zero are treated as marginal.
pub const MARGIN_TOLERANCE: f64 = 1e-9;

/// Roots of `x² − tr·x + det`.
///
/// Real roots are ordered `lambda1 ≤ lambda2`; complex roots are returned as
/// `lambda1 = tr/2 + i·s`, `lambda2 = conj(lambda1)` with `s > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexEigenpair {
    pub lambda1: Complex64,
    pub lambda2: Complex64,
}

impl ComplexEigenpair {
    pub fn from_trace_det(trace: f64, det: f64) -> Self {
        let disc = trace * trace - 4.0 * det;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            // Avoid cancellation: compute the larger-magnitude root first.
            let big = if trace >= 0.0 {
                0.5 * (trace + sq)
            } else {
                0.5 * (trace - sq)
            };
            let small = if big != 0.0 { det / big } else { 0.0 };
            let (lo, hi) = if big <= small { (big, small) } else { (small, big) };
            ComplexEigenpair {
                lambda1: Complex64::new(lo, 0.0),
                lambda2: Complex64::new(hi, 0.0),
            }
        } else {
            let l = Complex64::new(0.5 * trace, 0.5 * (-disc).sqrt());
            ComplexEigenpair {
                lambda1: l,
                lambda2: l.conj(),
            }
        }
    }

    pub fn is_real(&self) -> bool {
        self.lambda1.im == 0.0 && self.lambda2.im == 0.0
    }

    pub fn iter(&self) -> impl Iterator<Item = Complex64> {
        [self.lambda1, self.lambda2].into_iter()
    }

    /// `min_i |arg λ_i| − δπ/2`; a zero eigenvalue counts as exactly marginal.
    pub fn margin(&self, delta: FractionalOrder) -> f64 {
        self.iter()
            .map(|l| matignon_margin(l, delta).unwrap_or(0.0))
            .fold(f64::INFINITY, f64::min)
    }
}

/// `|arg λ| − δπ/2`. Positive means the eigenvalue satisfies the stability condition.
pub fn matignon_margin(lambda: Complex64, delta: FractionalOrder) -> Result<f64> {
    if lambda.re == 0.0 && lambda.im == 0.0 {
        return Err(Error::Domain(
            "zero eigenvalue: argument is undefined (non-hyperbolic equilibrium)".into(),
        ));
    }
    Ok(lambda.arg().abs() - delta.value() * FRAC_PI_2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    fn of(x: f64) -> Sign {
        if x > 0.0 {
            Sign::Positive
        } else if x < 0.0 {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }
}

/// Which case of the kinetic classification applied: sign of the
/// discriminant `Υ = tr² − 4 det` and sign of the trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OdeCase {
    pub discriminant: Sign,
    pub trace: Sign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OdeVerdict {
    Stable,
    Unstable,
    MarginalAtGivenDelta,
}

impl OdeVerdict {
    fn from_margin(margin: f64) -> Self {
        if margin > MARGIN_TOLERANCE {
            OdeVerdict::Stable
        } else if margin < -MARGIN_TOLERANCE {
            OdeVerdict::Unstable
        } else {
            OdeVerdict::MarginalAtGivenDelta
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeClassification {
    pub verdict: OdeVerdict,
    pub delta: FractionalOrder,
    pub eigs: ComplexEigenpair,
    pub margin: f64,
    /// `None` when stable for every order in `(0, 1]`.
    pub critical_order: Option<f64>,
    pub case: OdeCase,
}

/// Classifies the diffusion-free equilibrium at the order stored in `p`.
pub fn ode_classify(p: &SystemParams) -> OdeClassification {
    let j = jacobian_summary(p);
    let eigs = ComplexEigenpair::from_trace_det(j.trace, j.det);
    let margin = eigs.margin(p.delta);
    let case = OdeCase {
        discriminant: Sign::of(j.upsilon),
        trace: Sign::of(j.trace),
    };
    let verdict = match (case.discriminant, case.trace) {
        // Real (or repeated) eigenvalues with det > 0 share the sign of the trace,
        // so the order plays no role.
        (Sign::Positive | Sign::Zero, Sign::Negative) => OdeVerdict::Stable,
        (Sign::Positive | Sign::Zero, Sign::Positive) => OdeVerdict::Unstable,
        // Complex pair in the open left half-plane: |arg| > π/2 ≥ δπ/2.
        (Sign::Negative, Sign::Negative) => OdeVerdict::Stable,
        // Purely imaginary (stable iff δ < 1) or right half-plane (stable iff δ < δ*).
        _ => OdeVerdict::from_margin(margin),
    };
    OdeClassification {
        verdict,
        delta: p.delta,
        eigs,
        margin,
        critical_order: critical_order(p),
        case,
    }
}

/// The order at which the kinetic equilibrium changes stability.
///
/// * `None`: stable for every `δ ∈ (0, 1]`;
/// * `Some(0.0)`: unstable for every order (real positive eigenvalue);
/// * `Some(δ*)`: stable exactly for `δ < δ*`.
pub fn critical_order(p: &SystemParams) -> Option<f64> {
    let j = jacobian_summary(p);
    if j.trace < 0.0 {
        return None;
    }
    if j.upsilon >= 0.0 {
        return Some(0.0);
    }
    let eigs = ComplexEigenpair::from_trace_det(j.trace, j.det);
    Some(eigs.lambda1.arg().abs() / FRAC_PI_2)
}
