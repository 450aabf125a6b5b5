//! L1-Caputo time stepping for the reaction-diffusion system.
//!
//! Each step solves, per field, `(D − μ d Δ_h) w_{n+1} = H + μ R` with
//! `μ = Γ(2−δ) dt^δ` and the L1 memory term
//! `H = w_n − Σ_{k=1}^{n} b_k (w_{n−k+1} − w_{n−k})`.

mod grid;
mod ic;
mod linalg;

use std::collections::VecDeque;

use log::{debug, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::caputo::{l1_weights, L1Weights};
use crate::error::{Error, Result};
use crate::kinetics::{invariant_rectangle, reaction_rates, InvariantRectangle, SystemParams};

pub use grid::{laplacian, Grid, GridSpec};
pub use ic::{make_ic, InitialCondition};
pub use linalg::{solve_implicit_diffusion, solve_tridiagonal, CG_TOLERANCE};

/// Below this many (node × memory-term) products the history sum runs serially.
const PARALLEL_HISTORY_WORK: usize = 1 << 16;
const HISTORY_CHUNK: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldState {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl FieldState {
    pub fn uniform(t: f64, u: f64, v: f64, grid: &Grid) -> Self {
        let n = grid.node_count();
        FieldState {
            t,
            u: vec![u; n],
            v: vec![v; n],
        }
    }

    pub fn check_shape(&self, grid: &Grid) -> Result<()> {
        let n = grid.node_count();
        if self.u.len() != n || self.v.len() != n {
            return Err(Error::Usage(format!(
                "state has {}/{} values for u/v, grid has {n} nodes",
                self.u.len(),
                self.v.len()
            )));
        }
        Ok(())
    }

    /// Largest distance by which any node lies outside the closed rectangle.
    pub fn region_excursion(&self, rect: &InvariantRectangle) -> f64 {
        let out = |x: f64, hi: f64| (-x).max(x - hi).max(0.0);
        self.u
            .iter()
            .zip(&self.v)
            .map(|(&u, &v)| out(u, rect.u_max).max(out(v, rect.v_max)))
            .fold(0.0, f64::max)
    }
}

/// How the reaction term enters the step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReactionScheme {
    /// `R(w_n)` on the right-hand side.
    #[default]
    Explicit,
    /// Loss terms taken at the new level with coefficients frozen at `w_n`:
    /// `u` loses `u(1 + 4v/(1+u²))`, `v` loses `σb·u·v/(1+u²)`. Keeps the
    /// invariant rectangle at any step size.
    LinearlyImplicit,
}

/// How much of the L1 memory enters each step.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MemoryWindow {
    #[default]
    #[serde(with = "full_keyword")]
    Full,
    /// Only the most recent `k` increments of the memory sum are kept.
    Steps(usize),
}

mod full_keyword {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("full")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        match String::deserialize(d)?.as_str() {
            "full" => Ok(()),
            other => Err(D::Error::custom(format!(
                "expected \"full\" or a step count, got {other:?}"
            ))),
        }
    }
}

impl MemoryWindow {
    pub fn steps(self) -> Option<usize> {
        match self {
            MemoryWindow::Full => None,
            MemoryWindow::Steps(k) => Some(k),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct StepOptions {
    pub memory_window: MemoryWindow,
    pub reaction: ReactionScheme,
}

/// Past levels of `u` and `v` plus the L1 weights that combine them.
///
/// All levels are kept unless a memory window is set. At `δ = 1` every memory
/// weight is exactly zero, so only the newest level is retained.
#[derive(Debug, Clone)]
pub struct L1FieldHistory {
    weights: L1Weights,
    u: VecDeque<Vec<f64>>,
    v: VecDeque<Vec<f64>>,
    completed: usize,
    window: Option<usize>,
}

impl L1FieldHistory {
    pub fn new(initial: &FieldState, weights: L1Weights, window: MemoryWindow) -> Result<Self> {
        if let Some(0) = window.steps() {
            return Err(Error::config("solver.memory_window", "must be at least 1"));
        }
        if let Some(k) = window.steps() {
            warn!("memory window of {k} steps: the L1 memory sum is truncated and the scheme is no longer the full Caputo discretization");
        }
        Ok(L1FieldHistory {
            weights,
            u: VecDeque::from([initial.u.clone()]),
            v: VecDeque::from([initial.v.clone()]),
            completed: 0,
            window: window.steps(),
        })
    }

    /// Number of time levels seen, `completed steps + 1`.
    pub fn len(&self) -> usize {
        self.completed + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn stored_levels(&self) -> usize {
        self.u.len()
    }

    pub fn completed_steps(&self) -> usize {
        self.completed
    }

    pub fn weights(&self) -> &L1Weights {
        &self.weights
    }

    pub fn dt(&self) -> f64 {
        self.weights.dt()
    }

    pub fn current(&self) -> FieldState {
        FieldState {
            t: self.completed as f64 * self.dt(),
            u: self.u.back().expect("history holds at least one level").clone(),
            v: self.v.back().expect("history holds at least one level").clone(),
        }
    }

    fn memory_terms(&self) -> usize {
        if self.weights.delta().is_integer() {
            return 0;
        }
        self.window.map_or(self.completed, |w| w.min(self.completed))
    }

    /// `H = w_n − Σ_{k=1}^{K} b_k (w_{n−k+1} − w_{n−k})` for one field, `K` the
    /// number of memory terms in use.
    fn history_term(&mut self, levels_of_u: bool) -> Vec<f64> {
        let kmax = self.memory_terms();
        self.weights.extend_to(kmax + 1);
        let levels = if levels_of_u { &self.u } else { &self.v };
        let newest = levels.len() - 1;
        let nodes = levels[newest].len();
        let b = self.weights.b();

        let accumulate = |offset: usize, out: &mut [f64]| {
            for k in 1..=kmax {
                let hi = &levels[newest + 1 - k][offset..offset + out.len()];
                let lo = &levels[newest - k][offset..offset + out.len()];
                let bk = b[k];
                for ((o, h), l) in out.iter_mut().zip(hi).zip(lo) {
                    *o += bk * (h - l);
                }
            }
        };
        let mut sum = vec![0.0; nodes];
        if kmax * nodes >= PARALLEL_HISTORY_WORK {
            sum.par_chunks_mut(HISTORY_CHUNK)
                .enumerate()
                .for_each(|(c, chunk)| accumulate(c * HISTORY_CHUNK, chunk));
        } else {
            accumulate(0, &mut sum);
        }
        for (s, w) in sum.iter_mut().zip(&levels[newest]) {
            *s = w - *s;
        }
        sum
    }

    fn push(&mut self, u: Vec<f64>, v: Vec<f64>) {
        self.u.push_back(u);
        self.v.push_back(v);
        self.completed += 1;
        let keep = if self.weights.delta().is_integer() {
            1
        } else {
            self.window.map_or(usize::MAX, |w| w + 1)
        };
        while self.u.len() > keep {
            self.u.pop_front();
            self.v.pop_front();
        }
    }
}

/// Advances one time level and appends it to `history`.
pub fn step(history: &mut L1FieldHistory, p: &SystemParams, grid: &Grid, opts: &StepOptions) -> Result<FieldState> {
    let n = grid.node_count();
    let current = history.current();
    current.check_shape(grid)?;
    let step_index = history.completed_steps() + 1;
    let mu = history.weights().step_factor();

    let mut rhs_u = history.history_term(true);
    let mut rhs_v = history.history_term(false);
    let mut diag_u = vec![1.0; n];
    let mut diag_v = vec![1.0; n];
    let sb = p.sigma_b();
    for i in 0..n {
        let (u, v) = (current.u[i], current.v[i]);
        match opts.reaction {
            ReactionScheme::Explicit => {
                let (f, g) = reaction_rates(u, v, p);
                rhs_u[i] += mu * f;
                rhs_v[i] += mu * g;
            }
            ReactionScheme::LinearlyImplicit => {
                let r = 1.0 / (1.0 + u * u);
                rhs_u[i] += mu * p.a;
                diag_u[i] += mu * (1.0 + 4.0 * v * r);
                rhs_v[i] += mu * sb * u;
                diag_v[i] += mu * sb * u * r;
            }
        }
    }

    let mut u_next = current.u;
    let mut v_next = current.v;
    solve_implicit_diffusion(grid, &diag_u, mu * p.d1, &rhs_u, &mut u_next)?;
    solve_implicit_diffusion(grid, &diag_v, mu * p.d2, &rhs_v, &mut v_next)?;
    for (field, values) in [("u", &u_next), ("v", &v_next)] {
        if let Some(node) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                step: step_index,
                field,
                node,
            });
        }
    }
    history.push(u_next, v_next);
    Ok(history.current())
}

/// Incremental driver around [`step`] that also watches the invariant region.
#[derive(Debug, Clone)]
pub struct Simulation {
    params: SystemParams,
    grid: Grid,
    opts: StepOptions,
    history: L1FieldHistory,
    rect: InvariantRectangle,
    state: FieldState,
    max_excursion: f64,
    left_region_at: Option<usize>,
}

impl Simulation {
    pub fn new(params: SystemParams, grid: Grid, dt: f64, initial: FieldState, opts: StepOptions) -> Result<Self> {
        params.validate()?;
        initial.check_shape(&grid)?;
        if let Some(node) = initial.u.iter().chain(&initial.v).position(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                step: 0,
                field: if node < grid.node_count() { "u" } else { "v" },
                node: node % grid.node_count(),
            });
        }
        let weights = l1_weights(params.delta, dt, 1)?;
        let history = L1FieldHistory::new(&initial, weights, opts.memory_window)?;
        let rect = invariant_rectangle(&params)?;
        let mut sim = Simulation {
            params,
            grid,
            opts,
            history,
            rect,
            state: FieldState { t: 0.0, ..initial },
            max_excursion: 0.0,
            left_region_at: None,
        };
        sim.watch_region();
        Ok(sim)
    }

    pub fn from_config(cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        let initial = make_ic(&cfg.ic, &cfg.grid, &cfg.params, cfg.seed)?;
        Simulation::new(cfg.params, cfg.grid.clone(), cfg.dt, initial, cfg.step_options())
    }

    pub fn advance(&mut self) -> Result<&FieldState> {
        self.state = step(&mut self.history, &self.params, &self.grid, &self.opts)?;
        self.watch_region();
        Ok(&self.state)
    }

    fn watch_region(&mut self) {
        let e = self.state.region_excursion(&self.rect);
        if e > 0.0 && self.left_region_at.is_none() {
            let step = self.history.completed_steps();
            warn!(
                "state left the invariant rectangle at step {step} (t = {}), excursion {e:.3e}",
                self.state.t
            );
            self.left_region_at = Some(step);
        }
        self.max_excursion = self.max_excursion.max(e);
    }

    pub fn state(&self) -> &FieldState {
        &self.state
    }

    pub fn steps_completed(&self) -> usize {
        self.history.completed_steps()
    }

    pub fn history(&self) -> &L1FieldHistory {
        &self.history
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Largest distance outside the closed invariant rectangle seen so far.
    pub fn max_region_excursion(&self) -> f64 {
        self.max_excursion
    }

    pub fn left_region_at(&self) -> Option<usize> {
        self.left_region_at
    }
}

/// Everything needed for a run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub params: SystemParams,
    pub grid: Grid,
    pub t_end: f64,
    pub dt: f64,
    pub ic: InitialCondition,
    pub seed: u64,
    pub snapshot_every: usize,
    pub memory_window: MemoryWindow,
    pub reaction: ReactionScheme,
    /// Probe positions in physical coordinates (empty for a point grid).
    pub probes: Vec<Vec<f64>>,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config("time.dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= self.dt && self.t_end.is_finite()) {
            return Err(Error::config(
                "time.t_end",
                format!("must be at least dt = {}, got {}", self.dt, self.t_end),
            ));
        }
        if self.snapshot_every == 0 {
            return Err(Error::config("output.snapshot_every", "must be at least 1"));
        }
        if let MemoryWindow::Steps(0) = self.memory_window {
            return Err(Error::config("solver.memory_window", "must be at least 1"));
        }
        for p in &self.probes {
            self.grid
                .nearest_node(p)
                .map_err(|e| Error::config("output.probes", e.to_string()))?;
        }
        self.ic.validate(&self.grid)
    }

    /// `round(t_end / dt)`.
    pub fn step_count(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn step_options(&self) -> StepOptions {
        StepOptions {
            memory_window: self.memory_window,
            reaction: self.reaction,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub step: usize,
    pub state: FieldState,
}

/// Dense `(t, u, v)` record at one node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeSeries {
    pub position: Vec<f64>,
    pub node: usize,
    pub t: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl ProbeSeries {
    fn record(&mut self, s: &FieldState) {
        self.t.push(s.t);
        self.u.push(s.u[self.node]);
        self.v.push(s.v[self.node]);
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutput {
    /// Step 0, every `snapshot_every`-th step, and the final step.
    pub snapshots: Vec<Snapshot>,
    pub probes: Vec<ProbeSeries>,
    pub steps: usize,
    pub max_region_excursion: f64,
    pub left_region_at: Option<usize>,
}

impl RunOutput {
    pub fn final_state(&self) -> &FieldState {
        &self
            .snapshots
            .last()
            .expect("a run has at least the initial snapshot")
            .state
    }
}

/// Integrates from `t = 0` to `t_end`. Aborts with [`Error::NonFinite`] (which
/// carries the step index) if any value blows up.
pub fn run(cfg: &SimConfig) -> Result<RunOutput> {
    let mut sim = Simulation::from_config(cfg)?;
    let steps = cfg.step_count();
    let probe_nodes = if cfg.grid.dim() == 0 && cfg.probes.is_empty() {
        vec![(vec![], 0)]
    } else {
        cfg.probes
            .iter()
            .map(|p| Ok((p.clone(), cfg.grid.nearest_node(p)?)))
            .collect::<Result<Vec<_>>>()?
    };
    let mut probes: Vec<ProbeSeries> = probe_nodes
        .into_iter()
        .map(|(position, node)| ProbeSeries {
            position,
            node,
            t: Vec::with_capacity(steps + 1),
            u: Vec::with_capacity(steps + 1),
            v: Vec::with_capacity(steps + 1),
        })
        .collect();
    let mut snapshots = vec![Snapshot {
        step: 0,
        state: sim.state().clone(),
    }];
    probes.iter_mut().for_each(|p| p.record(sim.state()));

    debug!("running {steps} steps on {} nodes", cfg.grid.node_count());
    for n in 1..=steps {
        let state = sim.advance()?;
        probes.iter_mut().for_each(|p| p.record(state));
        if n % cfg.snapshot_every == 0 || n == steps {
            snapshots.push(Snapshot {
                step: n,
                state: state.clone(),
            });
        }
    }
    Ok(RunOutput {
        snapshots,
        probes,
        steps,
        max_region_excursion: sim.max_region_excursion(),
        left_region_at: sim.left_region_at(),
    })
}
