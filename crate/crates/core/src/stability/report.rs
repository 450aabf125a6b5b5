use serde::{Deserialize, Serialize};

use super::modes::{
    d_threshold, mode_analysis, neumann_eigenvalues, turing_band, upsilon_roots, ModeAnalysis, NeumannGeometry,
};
use super::{ode_classify, OdeClassification, OdeVerdict, MARGIN_TOLERANCE};
use crate::error::Result;
use crate::kinetics::{equilibrium, jacobian_summary, Equilibrium, JacobianSummary, SystemParams};

/// Default number of nonzero Neumann modes to analyze.
pub const DEFAULT_MODE_COUNT: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OverallVerdict {
    Stable,
    /// The kinetics are stable but some mode has `det J_i < 0`.
    TuringUnstable,
    /// A complex pair violates the stability condition: the kinetic
    /// equilibrium itself, or a diffusion-modified mode.
    OscillatoryUnstable,
    /// The kinetic equilibrium has a real positive eigenvalue.
    HomogeneousUnstable,
    /// Some mode sits within tolerance of the stability boundary.
    Marginal,
    /// Every analyzed mode is stable but the truncated spectrum does not
    /// reach the provably stable tail and the decision tree does not apply.
    Indeterminate,
}

impl OverallVerdict {
    pub fn is_unstable(self) -> bool {
        matches!(
            self,
            OverallVerdict::TuringUnstable | OverallVerdict::OscillatoryUnstable | OverallVerdict::HomogeneousUnstable
        )
    }
}

/// Result of the sufficient-condition decision tree for the diffusive system.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", content = "detail", rename_all = "snake_case")]
pub enum TreeOutcome {
    Certified(String),
    NotCertified(String),
    NotApplicable(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub params: SystemParams,
    pub geometry: NeumannGeometry,
    pub equilibrium: Equilibrium,
    pub jacobian: JacobianSummary,
    pub ode: OdeClassification,
    pub critical_order: Option<f64>,
    pub turing_band: Option<(f64, f64)>,
    pub upsilon_roots: Option<(f64, f64)>,
    pub d_tilde: Option<f64>,
    pub global_condition: bool,
    pub modes: Vec<ModeAnalysis>,
    /// Whether the analyzed spectrum extends past the eigenvalue beyond which
    /// every mode has `tr J_i < 0` and `det J_i > 0`.
    pub tail_certified: bool,
    pub decision_tree: TreeOutcome,
    pub overall_verdict: OverallVerdict,
    pub notes: Vec<String>,
}

/// `0 < a² ≤ 27`, the sufficient condition for global stability.
///
/// A relative slack of 1e-12 admits `a = 3√3` computed in floating point.
pub fn global_stability_condition(p: &SystemParams) -> bool {
    let a2 = p.a * p.a;
    a2 > 0.0 && a2 <= 27.0 * (1.0 + 1e-12)
}

/// Per-mode analysis over the first `m + 1` Neumann eigenvalues plus the
/// diffusion-case decision tree.
///
/// Enumeration stops early once `λ · min(d1, d2) > 10|F0| + 10σ|G1|`.
pub fn pde_classify(p: &SystemParams, geometry: NeumannGeometry, m: usize) -> Result<StabilityReport> {
    p.validate()?;
    let spectrum = neumann_eigenvalues(geometry, m)?;
    let j = jacobian_summary(p);
    let ode = ode_classify(p);
    let mut notes = Vec::new();

    let cutoff = (10.0 * j.F0.abs() + 10.0 * p.sigma * j.G1.abs()) / p.d1.min(p.d2);
    let mut modes = Vec::with_capacity(spectrum.lambdas.len());
    for &lambda in &spectrum.lambdas {
        modes.push(mode_analysis(p, lambda)?);
        if lambda > cutoff {
            break;
        }
    }

    // Beyond this eigenvalue tr J_i < 0 and det J_i > 0 for every mode.
    let safe = (j.F0 / p.d1).max(j.trace / (p.d1 + p.d2)).max(0.0);
    let tail_certified = modes.last().is_some_and(|m| m.lambda > safe);
    if !tail_certified {
        notes.push(format!(
            "analyzed spectrum ends at lambda = {:.6e}; modes up to {safe:.6e} can still destabilize",
            modes.last().map_or(0.0, |m| m.lambda)
        ));
    }

    let d_tilde = modes
        .iter()
        .filter_map(|m| d_threshold(p, m.lambda))
        .min_by(f64::total_cmp);
    let roots = upsilon_roots(p);
    let decision_tree = decision_tree(p, &j, &ode, &modes, spectrum.lambdas[1], d_tilde, roots);
    if let TreeOutcome::NotApplicable(reason) = &decision_tree {
        notes.push(format!("decision tree bypassed: {reason}"));
    }

    let overall_verdict = overall(&ode, &modes, tail_certified, &decision_tree);
    if matches!(decision_tree, TreeOutcome::Certified(_)) && overall_verdict != OverallVerdict::Stable {
        notes.push("decision tree certified stability but the per-mode test did not; per-mode result reported".into());
    }

    Ok(StabilityReport {
        params: *p,
        geometry,
        equilibrium: equilibrium(p),
        jacobian: j,
        ode,
        critical_order: ode.critical_order,
        turing_band: turing_band(p),
        upsilon_roots: roots,
        d_tilde,
        global_condition: global_stability_condition(p),
        modes,
        tail_certified,
        decision_tree,
        overall_verdict,
        notes,
    })
}

fn decision_tree(
    p: &SystemParams,
    j: &JacobianSummary,
    ode: &OdeClassification,
    modes: &[ModeAnalysis],
    lambda1: f64,
    d_tilde: Option<f64>,
    roots: Option<(f64, f64)>,
) -> TreeOutcome {
    if j.F0 <= 0.0 {
        return TreeOutcome::NotApplicable(format!(
            "F0 = {:.6} <= 0; the tree assumes F0 > 0, per-mode margins decide",
            j.F0
        ));
    }
    if p.d1 == p.d2 {
        return if ode.verdict == OdeVerdict::Stable {
            TreeOutcome::Certified("equal diffusivities: kinetic verdict applies".into())
        } else {
            TreeOutcome::NotCertified("equal diffusivities: kinetics not stable".into())
        };
    }
    if !(j.trace < 0.0 && j.upsilon > 0.0) {
        return TreeOutcome::NotApplicable(format!(
            "requires trace < 0 and upsilon > 0 (trace = {:.6}, upsilon = {:.6})",
            j.trace, j.upsilon
        ));
    }
    let first_mode_damped = lambda1 * p.d1 >= j.F0;
    if p.d1 < p.d2 {
        if first_mode_damped {
            return TreeOutcome::Certified("d1 < d2 and lambda_1 d1 >= F0".into());
        }
        return match d_tilde {
            Some(dt) if p.d2 < dt => {
                TreeOutcome::Certified(format!("d1 < d2, lambda_1 d1 < F0 and d2 < d_tilde = {dt:.6}"))
            }
            Some(dt) => TreeOutcome::NotCertified(format!("d2 = {} >= d_tilde = {dt:.6}", p.d2)),
            None => TreeOutcome::NotCertified("no mode yields a finite d_tilde".into()),
        };
    }
    if !first_mode_damped {
        return TreeOutcome::NotCertified("d1 > d2 and lambda_1 d1 < F0".into());
    }
    let Some((lo, hi)) = roots else {
        return TreeOutcome::NotCertified("mode discriminant has no real roots".into());
    };
    match modes
        .iter()
        .find(|m| m.lambda > lo && m.lambda < hi && m.margin <= MARGIN_TOLERANCE)
    {
        Some(m) => TreeOutcome::NotCertified(format!(
            "mode lambda = {:.6} in ({lo:.6}, {hi:.6}) fails the argument condition",
            m.lambda
        )),
        None => TreeOutcome::Certified(format!(
            "d1 > d2, lambda_1 d1 >= F0, complex modes in ({lo:.6}, {hi:.6}) satisfy the argument condition"
        )),
    }
}

fn overall(
    ode: &OdeClassification,
    modes: &[ModeAnalysis],
    tail_certified: bool,
    tree: &TreeOutcome,
) -> OverallVerdict {
    let unstable: Vec<&ModeAnalysis> = modes.iter().filter(|m| m.margin < -MARGIN_TOLERANCE).collect();
    if !unstable.is_empty() {
        return match ode.verdict {
            OdeVerdict::Unstable if ode.eigs.is_real() => OverallVerdict::HomogeneousUnstable,
            OdeVerdict::Unstable => OverallVerdict::OscillatoryUnstable,
            _ if unstable.iter().any(|m| m.det < 0.0) => OverallVerdict::TuringUnstable,
            _ => OverallVerdict::OscillatoryUnstable,
        };
    }
    if modes.iter().any(|m| !m.stable) {
        return OverallVerdict::Marginal;
    }
    if tail_certified || matches!(tree, TreeOutcome::Certified(_)) {
        OverallVerdict::Stable
    } else {
        OverallVerdict::Indeterminate
    }
}
