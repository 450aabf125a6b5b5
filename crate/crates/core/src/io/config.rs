//! JSON run configuration.
//!
//! ```json
//! {
//!   "params":   { "a": 15, "b": 1, "sigma": 7, "d1": 1, "d2": 10, "delta": 0.8 },
//!   "geometry": { "dim": 1, "lengths": [20], "counts": [41] },
//!   "time":     { "t_end": 10, "dt": 0.001 },
//!   "ic":       { "kind": "sinusoidal", "seed": 0 },
//!   "output":   { "snapshot_every": 1000, "probes": [[10]] },
//!   "solver":   { "memory_window": "full", "reaction": "explicit" },
//!   "analysis": { "modes": 128 }
//! }
//! ```
//!
//! `time`, `ic` and `output` are only needed for simulation. Unknown keys are
//! rejected everywhere.

use std::path::{Path, PathBuf};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::kinetics::SystemParams;
use crate::solver::{Grid, InitialCondition, MemoryWindow, ReactionScheme, SimConfig};
use crate::stability::DEFAULT_MODE_COUNT;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub params: SystemParams,
    pub geometry: Grid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<TimeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ic: Option<IcSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub t_end: f64,
    pub dt: f64,
}

/// Initial condition plus the seed for its random kinds.
#[derive(Debug, Clone, PartialEq)]
pub struct IcSection {
    pub kind: InitialCondition,
    pub seed: u64,
}

impl Serialize for IcSection {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut value = serde_json::to_value(&self.kind).map_err(serde::ser::Error::custom)?;
        if let Some(map) = value.as_object_mut() {
            map.insert("seed".into(), self.seed.into());
        }
        value.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IcSection {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let mut map = serde_json::Map::deserialize(d)?;
        let seed = match map.remove("seed") {
            None => 0,
            Some(v) => u64::deserialize(v).map_err(|e| D::Error::custom(format!("seed: {e}")))?,
        };
        let kind = InitialCondition::deserialize(serde_json::Value::Object(map)).map_err(D::Error::custom)?;
        Ok(IcSection { kind, seed })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Used when no `--out` is given on the command line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: usize,
    #[serde(default)]
    pub probes: Vec<Vec<f64>>,
}

fn default_snapshot_every() -> usize {
    1
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default)]
    pub memory_window: MemoryWindow,
    #[serde(default)]
    pub reaction: ReactionScheme,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    /// Number of nonzero Neumann modes per axis to analyze.
    #[serde(default = "default_modes")]
    pub modes: usize,
}

fn default_modes() -> usize {
    DEFAULT_MODE_COUNT
}

impl Default for AnalysisSection {
    fn default() -> Self {
        AnalysisSection {
            modes: DEFAULT_MODE_COUNT,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." { "config".to_string() } else { path };
            Error::config(field, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Checks every constraint that applies to the sections present.
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.analysis.modes == 0 {
            return Err(Error::config("analysis.modes", "must be at least 1"));
        }
        if self.time.is_some() || self.ic.is_some() {
            self.sim_config(None)?;
        } else if let Some(out) = &self.output {
            if out.snapshot_every == 0 {
                return Err(Error::config("output.snapshot_every", "must be at least 1"));
            }
        }
        Ok(())
    }

    /// Assembles the simulation settings; `seed` overrides `ic.seed`.
    pub fn sim_config(&self, seed: Option<u64>) -> Result<SimConfig> {
        let time = self
            .time
            .ok_or_else(|| Error::config("time", "section is required for simulation"))?;
        let ic = self
            .ic
            .as_ref()
            .ok_or_else(|| Error::config("ic", "section is required for simulation"))?;
        let (snapshot_every, probes) = match &self.output {
            Some(o) => (o.snapshot_every, o.probes.clone()),
            None => (1, vec![]),
        };
        let cfg = SimConfig {
            params: self.params,
            grid: self.geometry.clone(),
            t_end: time.t_end,
            dt: time.dt,
            ic: ic.kind.clone(),
            seed: seed.unwrap_or(ic.seed),
            snapshot_every,
            memory_window: self.solver.memory_window,
            reaction: self.solver.reaction,
            probes,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn output_dir(&self) -> Option<&Path> {
        self.output.as_ref().and_then(|o| o.dir.as_deref())
    }
}

pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    RunConfig::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const BASE_1D: &str = r#"{
        "params": { "a": 15, "b": 1, "sigma": 7, "d1": 1, "d2": 10, "delta": 1 },
        "geometry": { "dim": 1, "lengths": [20], "counts": [41] },
        "time": { "t_end": 10, "dt": 0.001 },
        "ic": { "kind": "sinusoidal" },
        "output": { "snapshot_every": 1000, "probes": [[10]] }
    }"#;

    fn field_of(err: Error) -> String {
        match err {
            Error::Config { field, .. } => field,
            other => panic!("expected a config error, got {other}"),
        }
    }

    #[test]
    fn base_config_is_valid() {
        let cfg = RunConfig::from_json(BASE_1D).unwrap();
        let sim = cfg.sim_config(None).unwrap();
        assert_eq!(sim.grid.spacing(0), 0.5);
        assert_eq!(sim.step_count(), 10_000);
        assert_eq!(sim.seed, 0);
        assert_eq!(cfg.sim_config(Some(5)).unwrap().seed, 5);
    }

    #[test]
    fn constraint_violations_name_the_field() {
        let bad = BASE_1D.replace("\"d1\": 1", "\"d1\": 0");
        assert_eq!(field_of(RunConfig::from_json(&bad).unwrap_err()), "params.d1");
        let bad = BASE_1D.replace("\"delta\": 1", "\"delta\": 1.2");
        assert_eq!(field_of(RunConfig::from_json(&bad).unwrap_err()), "params.delta");
        let bad = BASE_1D.replace("\"dt\": 0.001", "\"dt\": -1");
        assert_eq!(field_of(RunConfig::from_json(&bad).unwrap_err()), "time.dt");
        let bad = BASE_1D.replace("\"counts\": [41]", "\"counts\": [2]");
        assert_eq!(field_of(RunConfig::from_json(&bad).unwrap_err()), "geometry");
        let bad = BASE_1D.replace("\"t_end\": 10,", "");
        assert_eq!(field_of(RunConfig::from_json(&bad).unwrap_err()), "time");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = BASE_1D.replace("\"sigma\": 7", "\"sigma\": 7, \"sgima\": 7");
        assert_eq!(field_of(RunConfig::from_json(&bad).unwrap_err()), "params.sgima");
        let bad = BASE_1D.replace("\"kind\": \"sinusoidal\"", "\"kind\": \"sinusoidal\", \"amplitude\": 2");
        assert_eq!(field_of(RunConfig::from_json(&bad).unwrap_err()), "ic");
        let bad = BASE_1D.replacen('{', "{ \"extra\": 1,", 1);
        assert!(RunConfig::from_json(&bad).is_err());
    }

    #[test]
    fn analysis_only_config() {
        let cfg = RunConfig::from_json(
            r#"{ "params": { "a": 5, "b": 1, "sigma": 1, "d1": 1, "d2": 1, "delta": 0.5 },
                 "geometry": { "dim": 1, "lengths": [20], "counts": [41] } }"#,
        )
        .unwrap();
        assert_eq!(cfg.analysis.modes, DEFAULT_MODE_COUNT);
        assert_eq!(field_of(cfg.sim_config(None).unwrap_err()), "time");
    }

    fn arb_ic() -> impl Strategy<Value = InitialCondition> {
        prop_oneof![
            Just(InitialCondition::Sinusoidal {}),
            Just(InitialCondition::RandomPerturbation {}),
            (prop::option::of(0.1f64..10.0), prop::option::of(0.1f64..10.0))
                .prop_map(|(u, v)| InitialCondition::Uniform { u, v }),
            (0.0f64..0.49).prop_map(|margin| InitialCondition::RegionUniform { margin }),
        ]
    }

    prop_compose! {
        fn arb_config()(
            a in 0.1f64..30.0, b in 0.1f64..5.0, sigma in 0.1f64..20.0,
            d1 in 0.01f64..50.0, d2 in 0.01f64..50.0, delta in 0.01f64..=1.0,
            dim in 0usize..=2, length in 1.0f64..100.0, count in 3usize..80,
            dt in 1e-4f64..0.1, steps in 1usize..1000,
            ic in arb_ic(), seed in any::<u64>(),
            every in 1usize..100, window in prop::option::of(1usize..500),
            implicit in any::<bool>(), modes in 1usize..300,
        ) -> RunConfig {
            let geometry = crate::solver::GridSpec {
                dim,
                lengths: vec![length; dim],
                counts: vec![count; dim],
            }.try_into().unwrap();
            let probes = if dim == 0 { vec![] } else { vec![vec![0.5 * length; dim]] };
            RunConfig {
                params: SystemParams::new(a, b, sigma, d1, d2, delta).unwrap(),
                geometry,
                time: Some(TimeSection { t_end: dt * steps as f64, dt }),
                ic: Some(IcSection { kind: ic, seed }),
                output: Some(OutputSection { dir: None, snapshot_every: every, probes }),
                solver: SolverSection {
                    memory_window: window.map_or(MemoryWindow::Full, MemoryWindow::Steps),
                    reaction: if implicit { ReactionScheme::LinearlyImplicit } else { ReactionScheme::Explicit },
                },
                analysis: AnalysisSection { modes },
            }
        }
    }

    proptest! {
        #[test]
        fn round_trip(cfg in arb_config()) {
            let text = cfg.to_json().unwrap();
            prop_assert_eq!(RunConfig::from_json(&text).unwrap(), cfg);
        }
    }
}
