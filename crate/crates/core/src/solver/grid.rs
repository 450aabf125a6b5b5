use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stability::NeumannGeometry;

/// Uniform node-centred grid on `[0, Lx]` or `[0, Lx] × [0, Ly]`.
///
/// A grid with no axes is a single point: the diffusion-free (kinetic) system.
/// Nodes sit on the boundary, `spacing = length / (count − 1)`, and 2D fields
/// are stored row-major with `x` varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct Grid {
    lengths: Vec<f64>,
    counts: Vec<usize>,
}

/// Serialized form of [`Grid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dim: usize,
    #[serde(default)]
    pub lengths: Vec<f64>,
    #[serde(default)]
    pub counts: Vec<usize>,
}

impl TryFrom<GridSpec> for Grid {
    type Error = Error;

    fn try_from(spec: GridSpec) -> Result<Self> {
        if spec.dim > 2 {
            return Err(Error::config(
                "geometry.dim",
                format!("must be 0, 1 or 2, got {}", spec.dim),
            ));
        }
        if spec.lengths.len() != spec.dim {
            return Err(Error::config(
                "geometry.lengths",
                format!(
                    "expected {} entries for dim {}, got {}",
                    spec.dim,
                    spec.dim,
                    spec.lengths.len()
                ),
            ));
        }
        if spec.counts.len() != spec.dim {
            return Err(Error::config(
                "geometry.counts",
                format!(
                    "expected {} entries for dim {}, got {}",
                    spec.dim,
                    spec.dim,
                    spec.counts.len()
                ),
            ));
        }
        if let Some(l) = spec.lengths.iter().find(|&&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::config("geometry.lengths", format!("must be positive, got {l}")));
        }
        if let Some(c) = spec.counts.iter().find(|&&c| c < 3) {
            return Err(Error::config(
                "geometry.counts",
                format!("need at least 3 nodes per axis, got {c}"),
            ));
        }
        Ok(Grid {
            lengths: spec.lengths,
            counts: spec.counts,
        })
    }
}

impl From<Grid> for GridSpec {
    fn from(g: Grid) -> Self {
        GridSpec {
            dim: g.dim(),
            lengths: g.lengths,
            counts: g.counts,
        }
    }
}

impl Grid {
    pub fn point() -> Self {
        Grid {
            lengths: vec![],
            counts: vec![],
        }
    }

    pub fn interval(length: f64, count: usize) -> Result<Self> {
        GridSpec {
            dim: 1,
            lengths: vec![length],
            counts: vec![count],
        }
        .try_into()
    }

    pub fn rectangle(lx: f64, ly: f64, nx: usize, ny: usize) -> Result<Self> {
        GridSpec {
            dim: 2,
            lengths: vec![lx, ly],
            counts: vec![nx, ny],
        }
        .try_into()
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn node_count(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / (self.counts[axis] - 1) as f64
    }

    /// Coordinate of node `i` along `axis`.
    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        i as f64 * self.spacing(axis)
    }

    /// Physical coordinates of a flat node index.
    pub fn node_position(&self, node: usize) -> Vec<f64> {
        match self.dim() {
            0 => vec![],
            1 => vec![self.coord(0, node)],
            _ => {
                let nx = self.counts[0];
                vec![self.coord(0, node % nx), self.coord(1, node / nx)]
            }
        }
    }

    /// Flat index of the node nearest to `position` (clamped to the domain).
    pub fn nearest_node(&self, position: &[f64]) -> Result<usize> {
        if position.len() != self.dim() {
            return Err(Error::Usage(format!(
                "probe position has {} coordinates, grid is {}D",
                position.len(),
                self.dim()
            )));
        }
        let mut index = 0;
        let mut stride = 1;
        for (axis, &x) in position.iter().enumerate() {
            let n = self.counts[axis];
            let i = (x / self.spacing(axis)).round().clamp(0.0, (n - 1) as f64) as usize;
            index += i * stride;
            stride *= n;
        }
        Ok(index)
    }

    /// Domain measure (1 for a point).
    pub fn measure(&self) -> f64 {
        self.lengths.iter().product()
    }

    /// Trapezoidal quadrature weights; they sum to [`measure`](Self::measure).
    pub fn quadrature_weights(&self) -> Vec<f64> {
        let axis_weights: Vec<Vec<f64>> = (0..self.dim())
            .map(|axis| {
                let h = self.spacing(axis);
                let n = self.counts[axis];
                (0..n).map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h }).collect()
            })
            .collect();
        match self.dim() {
            0 => vec![1.0],
            1 => axis_weights[0].clone(),
            _ => axis_weights[1]
                .iter()
                .flat_map(|&wy| axis_weights[0].iter().map(move |&wx| wx * wy))
                .collect(),
        }
    }

    /// Continuous-spectrum geometry for the stability analyzer.
    pub fn neumann_geometry(&self) -> Option<NeumannGeometry> {
        match self.dim() {
            1 => Some(NeumannGeometry::Interval {
                length: self.lengths[0],
            }),
            2 => Some(NeumannGeometry::Rectangle {
                lx: self.lengths[0],
                ly: self.lengths[1],
            }),
            _ => None,
        }
    }
}

/// Second-order discrete Laplacian with zero-flux boundaries.
///
/// Boundary nodes use a reflected ghost value equal to the first interior
/// node, so `Δu_0 = 2(u_1 − u_0)/h²`.
pub fn laplacian(field: &[f64], grid: &Grid) -> Result<Vec<f64>> {
    if field.len() != grid.node_count() {
        return Err(Error::Usage(format!(
            "field has {} values, grid has {} nodes",
            field.len(),
            grid.node_count()
        )));
    }
    let mut out = vec![0.0; field.len()];
    laplacian_into(field, grid, &mut out);
    Ok(out)
}

pub(crate) fn laplacian_into(field: &[f64], grid: &Grid, out: &mut [f64]) {
    match grid.dim() {
        0 => out[0] = 0.0,
        1 => {
            let ih2 = 1.0 / grid.spacing(0).powi(2);
            second_difference_line(field, 1, grid.counts[0], ih2, out, false);
        }
        _ => {
            let (nx, ny) = (grid.counts[0], grid.counts[1]);
            let ihx2 = 1.0 / grid.spacing(0).powi(2);
            let ihy2 = 1.0 / grid.spacing(1).powi(2);
            for j in 0..ny {
                let row = j * nx;
                second_difference_line(&field[row..], 1, nx, ihx2, &mut out[row..], false);
            }
            for i in 0..nx {
                second_difference_line(&field[i..], nx, ny, ihy2, &mut out[i..], true);
            }
        }
    }
}

/// Writes (or accumulates) the reflected second difference along one line of
/// `n` nodes separated by `stride`.
#[inline]
fn second_difference_line(f: &[f64], stride: usize, n: usize, ih2: f64, out: &mut [f64], accumulate: bool) {
    let at = |i: usize| f[i * stride];
    let mut put = |i: usize, value: f64| {
        if accumulate {
            out[i * stride] += value;
        } else {
            out[i * stride] = value;
        }
    };
    put(0, 2.0 * (at(1) - at(0)) * ih2);
    for i in 1..n - 1 {
        put(i, (at(i - 1) - 2.0 * at(i) + at(i + 1)) * ih2);
    }
    put(n - 1, 2.0 * (at(n - 2) - at(n - 1)) * ih2);
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn spec_validation() {
        assert!(Grid::interval(20.0, 41).is_ok());
        assert!(Grid::interval(20.0, 2).is_err());
        assert!(Grid::interval(0.0, 10).is_err());
        assert!(Grid::rectangle(1.0, 1.0, 3, 3).is_ok());
        let bad = GridSpec {
            dim: 2,
            lengths: vec![1.0],
            counts: vec![3, 3],
        };
        assert!(Grid::try_from(bad).is_err());
        let g = Grid::interval(20.0, 41).unwrap();
        assert_eq!(g.spacing(0), 0.5);
        assert_eq!(g.nearest_node(&[10.0]).unwrap(), 20);
        assert_eq!(g.nearest_node(&[99.0]).unwrap(), 40);
    }

    #[test]
    fn laplacian_of_constant_vanishes() {
        for g in [
            Grid::interval(3.0, 7).unwrap(),
            Grid::rectangle(2.0, 5.0, 9, 6).unwrap(),
            Grid::point(),
        ] {
            let lap = laplacian(&vec![4.2; g.node_count()], &g).unwrap();
            assert!(lap.iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn laplacian_exact_for_quadratics_in_interior() {
        let g = Grid::interval(2.0, 21).unwrap();
        let f: Vec<f64> = (0..21).map(|i| g.coord(0, i).powi(2)).collect();
        let lap = laplacian(&f, &g).unwrap();
        for &x in &lap[1..20] {
            assert!((x - 2.0).abs() < 1e-10);
        }
    }

    #[test]
    fn cosine_modes_are_discrete_eigenvectors() {
        let (l, n) = (20.0, 41);
        let g = Grid::interval(l, n).unwrap();
        let h = g.spacing(0);
        for k in [1usize, 3, 7] {
            let f: Vec<f64> = (0..n).map(|i| (k as f64 * PI * g.coord(0, i) / l).cos()).collect();
            let lam = 2.0 * (1.0 - (k as f64 * PI * h / l).cos()) / (h * h);
            let lap = laplacian(&f, &g).unwrap();
            for (a, b) in lap.iter().zip(&f) {
                assert!((a + lam * b).abs() < 1e-12);
            }
        }
        // Separable product on a rectangle.
        let g = Grid::rectangle(10.0, 6.0, 11, 7).unwrap();
        let (hx, hy) = (g.spacing(0), g.spacing(1));
        let f: Vec<f64> = (0..g.node_count())
            .map(|idx| {
                let p = g.node_position(idx);
                (2.0 * PI * p[0] / 10.0).cos() * (PI * p[1] / 6.0).cos()
            })
            .collect();
        let lam =
            2.0 * (1.0 - (2.0 * PI * hx / 10.0).cos()) / (hx * hx) + 2.0 * (1.0 - (PI * hy / 6.0).cos()) / (hy * hy);
        let lap = laplacian(&f, &g).unwrap();
        for (a, b) in lap.iter().zip(&f) {
            assert!((a + lam * b).abs() < 1e-12);
        }
    }

    #[test]
    fn quadrature_weights_sum_to_measure() {
        let g = Grid::rectangle(10.0, 6.0, 11, 7).unwrap();
        let s: f64 = g.quadrature_weights().iter().sum();
        assert!((s - 60.0).abs() < 1e-12);
        assert_eq!(Grid::point().quadrature_weights(), vec![1.0]);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let g = Grid::interval(1.0, 5).unwrap();
        assert!(laplacian(&[1.0; 4], &g).is_err());
    }
}
