use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::grid::Grid;
use super::FieldState;
use crate::error::{Error, Result};
use crate::kinetics::{equilibrium, invariant_rectangle, SystemParams};

/// Generator words reserved per node; a node's draws never depend on how
/// many words another node consumed.
const WORDS_PER_NODE: u128 = 16;

/// Initial-condition recipe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    /// `u = 1 + 0.3 sin(x/2)`, `v = 2 + 0.6 sin(x/2)`, `x` the first coordinate.
    Sinusoidal {},
    /// `u = 3.5(1 + 0.2 w_u)`, `v = 10.5(1 + 0.2 w_v)`, `w` standard normal per node.
    RandomPerturbation {},
    /// Constant fields; missing components default to the equilibrium.
    Uniform {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        u: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        v: Option<f64>,
    },
    /// Independent uniform draws per node in the invariant rectangle shrunk by
    /// `margin` (a fraction of each side) on every face.
    RegionUniform { margin: f64 },
    /// Node values given directly, in grid storage order.
    Explicit { u: Vec<f64>, v: Vec<f64> },
}

impl InitialCondition {
    pub fn validate(&self, grid: &Grid) -> Result<()> {
        match self {
            InitialCondition::RegionUniform { margin } if !(0.0..0.5).contains(margin) => Err(Error::config(
                "ic.margin",
                format!("must lie in [0, 0.5), got {margin}"),
            )),
            InitialCondition::Explicit { u, v } => {
                let n = grid.node_count();
                if u.len() != n {
                    return Err(Error::config("ic.u", format!("expected {n} values, got {}", u.len())));
                }
                if v.len() != n {
                    return Err(Error::config("ic.v", format!("expected {n} values, got {}", v.len())));
                }
                if u.iter().chain(v).any(|x| !x.is_finite()) {
                    return Err(Error::config("ic", "values must be finite"));
                }
                Ok(())
            }
            InitialCondition::Uniform { u, v } => {
                if u.iter().chain(v).any(|x| !x.is_finite()) {
                    return Err(Error::config("ic", "values must be finite"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Builds the `t = 0` state. Random kinds draw node `i` of field `f` from a
/// ChaCha stream keyed by `(seed, f)` at word offset `16 i`, so the result does
/// not depend on traversal order.
pub fn make_ic(ic: &InitialCondition, grid: &Grid, p: &SystemParams, seed: u64) -> Result<FieldState> {
    ic.validate(grid)?;
    let n = grid.node_count();
    let (u, v) = match ic {
        InitialCondition::Sinusoidal {} => (0..n)
            .map(|i| {
                let x = grid.node_position(i).first().copied().unwrap_or(0.0);
                let s = (0.5 * x).sin();
                (1.0 + 0.3 * s, 2.0 + 0.6 * s)
            })
            .unzip(),
        InitialCondition::RandomPerturbation {} => (
            node_draws(seed, 0, n, |r| 3.5 * (1.0 + 0.2 * r.sample::<f64, _>(StandardNormal))),
            node_draws(seed, 1, n, |r| 10.5 * (1.0 + 0.2 * r.sample::<f64, _>(StandardNormal))),
        ),
        InitialCondition::Uniform { u, v } => {
            let eq = equilibrium(p);
            (vec![u.unwrap_or(eq.u_star); n], vec![v.unwrap_or(eq.v_star); n])
        }
        InitialCondition::RegionUniform { margin } => {
            let rect = invariant_rectangle(p)?;
            let (ulo, uhi) = (margin * rect.u_max, (1.0 - margin) * rect.u_max);
            let (vlo, vhi) = (margin * rect.v_max, (1.0 - margin) * rect.v_max);
            (
                node_draws(seed, 0, n, |r| r.random_range(ulo..uhi)),
                node_draws(seed, 1, n, |r| r.random_range(vlo..vhi)),
            )
        }
        InitialCondition::Explicit { u, v } => (u.clone(), v.clone()),
    };
    Ok(FieldState { t: 0.0, u, v })
}

fn node_draws(seed: u64, field: u64, n: usize, draw: impl Fn(&mut ChaCha8Rng) -> f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(field);
    (0..n)
        .map(|i| {
            rng.set_word_pos(i as u128 * WORDS_PER_NODE);
            draw(&mut rng)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn base_params() -> SystemParams {
        SystemParams::new(15.0, 1.0, 7.0, 1.0, 10.0, 1.0).unwrap()
    }

    #[test]
    fn sinusoidal_values() {
        let g = Grid::interval(2.0 * PI, 3).unwrap();
        let s = make_ic(&InitialCondition::Sinusoidal {}, &g, &base_params(), 0).unwrap();
        assert_eq!((s.u[0], s.v[0]), (1.0, 2.0));
        assert!((s.u[1] - 1.3).abs() < 1e-15 && (s.v[1] - 2.6).abs() < 1e-15);
    }

    #[test]
    fn random_perturbation_mean() {
        let g = Grid::rectangle(31.5, 31.5, 64, 64).unwrap();
        for seed in [0, 1, 42, 2024] {
            let s = make_ic(&InitialCondition::RandomPerturbation {}, &g, &base_params(), seed).unwrap();
            let mean = s.u.iter().sum::<f64>() / s.u.len() as f64;
            assert!((mean - 3.5).abs() < 0.1, "seed {seed}: {mean}");
            let vmean = s.v.iter().sum::<f64>() / s.v.len() as f64;
            assert!((vmean - 10.5).abs() < 0.3);
        }
    }

    #[test]
    fn draws_do_not_depend_on_grid_size() {
        let small = Grid::interval(1.0, 5).unwrap();
        let large = Grid::interval(1.0, 50).unwrap();
        let a = make_ic(&InitialCondition::RandomPerturbation {}, &small, &base_params(), 9).unwrap();
        let b = make_ic(&InitialCondition::RandomPerturbation {}, &large, &base_params(), 9).unwrap();
        assert_eq!(a.u[..], b.u[..5]);
        assert_eq!(a.v[..], b.v[..5]);
        assert_ne!(a.u, a.v);
        let c = make_ic(&InitialCondition::RandomPerturbation {}, &small, &base_params(), 10).unwrap();
        assert_ne!(a.u, c.u);
    }

    #[test]
    fn uniform_defaults_to_equilibrium() {
        let g = Grid::interval(1.0, 4).unwrap();
        let s = make_ic(&InitialCondition::Uniform { u: None, v: Some(7.0) }, &g, &base_params(), 0).unwrap();
        assert_eq!(s.u, vec![3.0; 4]);
        assert_eq!(s.v, vec![7.0; 4]);
    }

    #[test]
    fn region_uniform_stays_inside_shrunk_rectangle() {
        let g = Grid::interval(1.0, 200).unwrap();
        let ic = InitialCondition::RegionUniform { margin: 0.05 };
        let s = make_ic(&ic, &g, &base_params(), 3).unwrap();
        assert!(s.u.iter().all(|&u| (0.75..=14.25).contains(&u)));
        assert!(s.v.iter().all(|&v| (11.3..=214.7).contains(&v)));
        assert!(make_ic(&InitialCondition::RegionUniform { margin: 0.7 }, &g, &base_params(), 3).is_err());
    }

    #[test]
    fn explicit_shape_checked() {
        let g = Grid::interval(1.0, 3).unwrap();
        let ic = InitialCondition::Explicit {
            u: vec![1.0; 3],
            v: vec![1.0; 2],
        };
        assert!(matches!(make_ic(&ic, &g, &base_params(), 0), Err(Error::Config { field, .. }) if field == "ic.v"));
    }

    #[test]
    fn serde_tags() {
        let ic: InitialCondition = serde_json::from_str(r#"{"kind":"region_uniform","margin":0.05}"#).unwrap();
        assert_eq!(ic, InitialCondition::RegionUniform { margin: 0.05 });
        assert!(serde_json::from_str::<InitialCondition>(r#"{"kind":"sinusoidal","amp":1}"#).is_err());
    }
}
