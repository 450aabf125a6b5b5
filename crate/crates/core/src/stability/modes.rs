use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{ComplexEigenpair, MARGIN_TOLERANCE};
use crate::error::{Error, Result};
use crate::kinetics::{jacobian_summary, SystemParams};

/// Domain on which the Neumann Laplacian spectrum is taken.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NeumannGeometry {
    Interval { length: f64 },
    Rectangle { lx: f64, ly: f64 },
}

impl NeumannGeometry {
    fn validate(&self) -> Result<()> {
        let ok = match *self {
            NeumannGeometry::Interval { length } => length > 0.0 && length.is_finite(),
            NeumannGeometry::Rectangle { lx, ly } => lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("domain lengths must be positive: {self:?}")))
        }
    }
}

/// Eigenvalues of `−Δ` with zero-flux boundaries, ascending, `λ_0 = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeumannSpectrum {
    pub geometry: NeumannGeometry,
    pub lambdas: Vec<f64>,
}

/// First `m + 1` eigenvalues (with multiplicity) of the Neumann Laplacian.
pub fn neumann_eigenvalues(geometry: NeumannGeometry, m: usize) -> Result<NeumannSpectrum> {
    geometry.validate()?;
    if m == 0 {
        return Err(Error::Usage("need at least one nonzero mode (m >= 1)".into()));
    }
    let lambdas = match geometry {
        NeumannGeometry::Interval { length } => (0..=m).map(|k| (k as f64 * PI / length).powi(2)).collect(),
        NeumannGeometry::Rectangle { lx, ly } => {
            // The m+1 smallest values never need an index above m on either axis.
            let mut all: Vec<f64> = (0..=m)
                .flat_map(|j| (0..=m).map(move |k| (j as f64 * PI / lx).powi(2) + (k as f64 * PI / ly).powi(2)))
                .collect();
            all.sort_by(f64::total_cmp);
            all.truncate(m + 1);
            all
        }
    };
    Ok(NeumannSpectrum { geometry, lambdas })
}

/// Linearization restricted to one Neumann mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeAnalysis {
    pub lambda: f64,
    pub trace: f64,
    pub det: f64,
    pub upsilon: f64,
    pub xi: ComplexEigenpair,
    pub margin: f64,
    pub stable: bool,
}

/// Analyzes `J_i = [[F0 − d1 λ, F1], [σG0, σG1 − d2 λ]]` at the order in `p`.
pub fn mode_analysis(p: &SystemParams, lambda: f64) -> Result<ModeAnalysis> {
    if !(lambda >= 0.0) {
        return Err(Error::Domain(format!(
            "Laplacian eigenvalue must be >= 0, got {lambda}"
        )));
    }
    let j = jacobian_summary(p);
    let c = kinetic_coupling(p);
    let trace = j.trace - (p.d1 + p.d2) * lambda;
    let det = (lambda * p.d1 - j.F0) * lambda * p.d2 + c * (lambda * p.d1 + 5.0);
    let xi = ComplexEigenpair::from_trace_det(trace, det);
    let margin = xi.margin(p.delta);
    Ok(ModeAnalysis {
        lambda,
        trace,
        det,
        upsilon: trace * trace - 4.0 * det,
        xi,
        margin,
        stable: margin > MARGIN_TOLERANCE,
    })
}

/// `σbα / (1 + α²)`, the recurring positive constant of the mode determinant.
fn kinetic_coupling(p: &SystemParams) -> f64 {
    let alpha = p.alpha();
    p.sigma_b() * alpha / (1.0 + alpha * alpha)
}

/// Roots of `a x² + b x + c` (real, ascending), or `None` if complex.
fn real_quadratic_roots(a: f64, b: f64, c: f64) -> Option<(f64, f64)> {
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let (r1, r2) = if q == 0.0 { (0.0, 0.0) } else { (q / a, c / q) };
    Some(if r1 <= r2 { (r1, r2) } else { (r2, r1) })
}

/// The open interval of Laplacian eigenvalues on which `det J_i < 0`.
///
/// `det J_i(λ) = d1 d2 λ² + (c d1 − F0 d2) λ + 5c` with `c = σbα/(1+α²)`.
/// Its roots share a sign (their product `5c/(d1 d2)` is positive); the band
/// is empty unless both are positive and distinct.
pub fn turing_band(p: &SystemParams) -> Option<(f64, f64)> {
    let j = jacobian_summary(p);
    let c = kinetic_coupling(p);
    let (lo, hi) = real_quadratic_roots(p.d1 * p.d2, c * p.d1 - j.F0 * p.d2, 5.0 * c)?;
    (lo > 0.0 && hi > lo).then_some((lo, hi))
}

/// Roots `λ01 ≤ λ02` of the mode discriminant
/// `Υ(λ) = (d1−d2)² λ² + 2(d1−d2)(σG1 − F0) λ + Υ`.
///
/// Returns `None` when `d1 = d2`: the quadratic degenerates to the constant
/// `Υ` and the kinetic classification applies unchanged.
pub fn upsilon_roots(p: &SystemParams) -> Option<(f64, f64)> {
    if p.d1 == p.d2 {
        return None;
    }
    let j = jacobian_summary(p);
    let dd = p.d1 - p.d2;
    real_quadratic_roots(dd * dd, 2.0 * dd * (p.sigma * j.G1 - j.F0), j.upsilon)
}

/// Quarter-discriminant `(b/2)² − a c` of the mode-discriminant quadratic,
/// equal to `32 (d1−d2)² σ b α³ / (1+α²)²` and hence positive whenever `d1 ≠ d2`.
pub fn upsilon_reduced_discriminant(p: &SystemParams) -> f64 {
    let j = jacobian_summary(p);
    let dd = p.d1 - p.d2;
    let half_b = dd * (p.sigma * j.G1 - j.F0);
    half_b * half_b - dd * dd * j.upsilon
}

/// Diffusivity threshold for mode `λ`: `d2` above this value makes
/// `det J_i < 0`. `None` when the mode cannot destabilize this way
/// (`λ = 0` or `λ d1 ≥ F0`).
pub fn d_threshold(p: &SystemParams, lambda: f64) -> Option<f64> {
    let j = jacobian_summary(p);
    if !(lambda > 0.0) || lambda * p.d1 >= j.F0 {
        return None;
    }
    Some(kinetic_coupling(p) * (lambda * p.d1 + 5.0) / ((j.F0 - lambda * p.d1) * lambda))
}
