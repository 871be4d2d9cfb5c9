//! Uniform real-space grids and their discrete-Fourier wavenumber duals.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One uniformly spaced axis. Point `j` sits at `offset + j * step`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub n_points: usize,
    pub step: f64,
    pub offset: f64,
}

impl AxisSpec {
    pub fn new(n_points: usize, step: f64, offset: f64) -> Result<Self> {
        if n_points < 2 {
            return Err(Error::InvalidArgument(format!(
                "axis needs at least 2 points, got {n_points}"
            )));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "axis step must be positive and finite, got {step}"
            )));
        }
        if !offset.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "axis offset must be finite, got {offset}"
            )));
        }
        Ok(Self {
            n_points,
            step,
            offset,
        })
    }

    /// Axis of `n_points` points with spacing `step`, placed symmetrically
    /// about the origin. For even `n_points` the origin is not a grid point.
    pub fn centered(n_points: usize, step: f64) -> Result<Self> {
        Self::new(n_points, step, -0.5 * step * (n_points as f64 - 1.0))
    }

    /// The 32-point, 0.075 bohr axis spanning [-1.1625, 1.1625] bohr.
    pub fn reference() -> Self {
        Self {
            n_points: 32,
            step: 0.075,
            offset: -1.1625,
        }
    }

    #[inline]
    pub fn coordinate(&self, j: usize) -> f64 {
        self.offset + j as f64 * self.step
    }

    pub fn coordinates(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.coordinate(j)).collect()
    }

    /// Angular wavenumbers `2π f_j / (n step)` in standard DFT order:
    /// `f_j = j` for `j < n/2`, `f_j = j - n` otherwise.
    pub fn wavenumbers(&self) -> Vec<f64> {
        let n = self.n_points;
        let scale = 2.0 * PI / (n as f64 * self.step);
        (0..n)
            .map(|j| {
                let f = if j < (n + 1) / 2 {
                    j as f64
                } else {
                    j as f64 - n as f64
                };
                scale * f
            })
            .collect()
    }

    /// Index of the grid point equal to `value` (within a tiny fraction of a step).
    pub fn index_of(&self, value: f64) -> Option<usize> {
        let x = (value - self.offset) / self.step;
        let j = x.round();
        if j < 0.0 || j >= self.n_points as f64 || (x - j).abs() > 1e-6 {
            return None;
        }
        Some(j as usize)
    }

    /// Up to two grid coordinates bracketing `value`.
    pub fn nearest(&self, value: f64) -> Vec<f64> {
        let x = ((value - self.offset) / self.step).clamp(0.0, (self.n_points - 1) as f64);
        let lo = x.floor() as usize;
        let hi = x.ceil() as usize;
        let mut out = vec![self.coordinate(lo)];
        if hi != lo {
            out.push(self.coordinate(hi));
        }
        out
    }
}

/// Free-function form of [`AxisSpec::coordinates`].
pub fn coordinates(axis: &AxisSpec) -> Vec<f64> {
    axis.coordinates()
}

/// Free-function form of [`AxisSpec::wavenumbers`].
pub fn wavenumbers(axis: &AxisSpec) -> Vec<f64> {
    axis.wavenumbers()
}

/// Product grid over an ordered list of axes. Flattening is row-major: the
/// last axis varies fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    axes: Vec<AxisSpec>,
    labels: Vec<String>,
}

impl GridSpec {
    pub fn new(axes: Vec<AxisSpec>) -> Result<Self> {
        let labels = (0..axes.len()).map(|i| format!("x{i}")).collect();
        Self::with_labels(axes, labels)
    }

    pub fn with_labels(axes: Vec<AxisSpec>, labels: Vec<String>) -> Result<Self> {
        if axes.is_empty() {
            return Err(Error::InvalidArgument("grid needs at least one axis".into()));
        }
        if labels.len() != axes.len() {
            return Err(Error::InvalidArgument(format!(
                "{} labels for {} axes",
                labels.len(),
                axes.len()
            )));
        }
        for a in &axes {
            AxisSpec::new(a.n_points, a.step, a.offset)?;
        }
        Ok(Self { axes, labels })
    }

    /// Four copies of `axis` labelled `R_x, R_y, r_cx, r_cy`.
    pub fn reduced_h2plus(axis: AxisSpec) -> Self {
        Self {
            axes: vec![axis; 4],
            labels: ["R_x", "R_y", "r_cx", "r_cy"].map(String::from).to_vec(),
        }
    }

    pub fn axes(&self) -> &[AxisSpec] {
        &self.axes
    }

    pub fn axis(&self, i: usize) -> &AxisSpec {
        &self.axes[i]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn ndim(&self) -> usize {
        self.axes.len()
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.n_points).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.n_points).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn volume_element(&self) -> f64 {
        self.axes.iter().map(|a| a.step).product()
    }

    /// Row-major strides, in elements.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.ndim()];
        for i in (0..self.ndim().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.axes[i + 1].n_points;
        }
        strides
    }

    pub fn flat_index(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.ndim());
        index
            .iter()
            .zip(&self.axes)
            .fold(0, |acc, (&i, a)| acc * a.n_points + i)
    }

    pub fn unflatten(&self, mut flat: usize, out: &mut [usize]) {
        for (slot, a) in out.iter_mut().zip(&self.axes).rev() {
            *slot = flat % a.n_points;
            flat /= a.n_points;
        }
    }

    /// Real-space coordinates of the point with flat index `flat`.
    pub fn point(&self, flat: usize, out: &mut [f64]) {
        let mut idx = vec![0; self.ndim()];
        self.unflatten(flat, &mut idx);
        for ((o, &i), a) in out.iter_mut().zip(&idx).zip(&self.axes) {
            *o = a.coordinate(i);
        }
    }

    /// Evaluates `f` at every grid point, in flat order.
    pub fn map_points<F>(&self, mut f: F) -> Vec<f64>
    where
        F: FnMut(&[f64]) -> f64,
    {
        let coords: Vec<Vec<f64>> = self.axes.iter().map(|a| a.coordinates()).collect();
        let mut idx = vec![0usize; self.ndim()];
        let mut x: Vec<f64> = coords.iter().map(|c| c[0]).collect();
        let mut out = Vec::with_capacity(self.len());
        for _ in 0..self.len() {
            out.push(f(&x));
            // odometer increment, last axis fastest
            for d in (0..self.ndim()).rev() {
                idx[d] += 1;
                if idx[d] < self.axes[d].n_points {
                    x[d] = coords[d][idx[d]];
                    break;
                }
                idx[d] = 0;
                x[d] = coords[d][0];
            }
        }
        out
    }

    /// Sub-grid made of the listed axes, in the given order.
    pub fn sub_grid(&self, axes: &[usize]) -> Result<GridSpec> {
        GridSpec::with_labels(
            axes.iter().map(|&i| self.axes[i]).collect(),
            axes.iter().map(|&i| self.labels[i].clone()).collect(),
        )
    }

    /// Same axes (point counts, steps, offsets); labels are not compared.
    pub fn same_axes(&self, other: &GridSpec) -> bool {
        self.axes == other.axes
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_grid() {
        let a = AxisSpec::new(2, 1.0, 0.0).unwrap();
        assert_eq!(coordinates(&a), vec![0.0, 1.0]);
    }

    #[test]
    fn reference_axis_skips_origin() {
        let c = AxisSpec::reference().coordinates();
        assert_eq!(c.len(), 32);
        assert!((c[0] + 1.1625).abs() < 1e-12);
        assert!((c[31] - 1.1625).abs() < 1e-12);
        assert!(c.iter().all(|&x| x.abs() > 0.03));
        assert!((c[16] - 0.0375).abs() < 1e-12);
        assert!((c[15] + 0.0375).abs() < 1e-12);
        for w in c.windows(2) {
            assert!((w[1] - w[0] - 0.075).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_half_step_grid() {
        let a = AxisSpec::new(4, 0.5, -0.75).unwrap();
        assert_eq!(a.coordinates(), vec![-0.75, -0.25, 0.25, 0.75]);
        assert_eq!(AxisSpec::centered(4, 0.5).unwrap(), a);
    }

    #[test]
    fn dft_wavenumber_order() {
        let k = AxisSpec::new(4, 1.0, 0.0).unwrap().wavenumbers();
        let expect = [0.0, PI / 2.0, -PI, -PI / 2.0];
        for (a, b) in k.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
        let k = AxisSpec::new(2, 0.5, 0.0).unwrap().wavenumbers();
        assert_eq!(k[0], 0.0);
        assert!((k[1] + 2.0 * PI).abs() < 1e-14);
    }

    #[test]
    fn reference_max_wavenumber() {
        let k = AxisSpec::reference().wavenumbers();
        let kmax = k.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!((kmax - 41.887_902_047_863_9).abs() < 1e-9);
    }

    #[test]
    fn wavenumbers_antisymmetric_except_zero_and_nyquist() {
        for n in [2usize, 5, 8, 32] {
            let k = AxisSpec::new(n, 0.3, 0.0).unwrap().wavenumbers();
            for j in 1..n {
                if 2 * j == n {
                    continue;
                }
                assert!((k[j] + k[n - j]).abs() < 1e-12, "n={n} j={j}");
            }
        }
    }

    #[test]
    fn rejects_degenerate_axes() {
        assert!(AxisSpec::new(1, 1.0, 0.0).is_err());
        assert!(AxisSpec::new(4, 0.0, 0.0).is_err());
        assert!(AxisSpec::new(4, -1.0, 0.0).is_err());
    }

    #[test]
    fn element_count_and_volume() {
        let g = GridSpec::reduced_h2plus(AxisSpec::reference());
        assert_eq!(g.len(), 1 << 20);
        assert!((g.volume_element() - 0.075f64.powi(4)).abs() < 1e-18);
        assert_eq!(g.strides(), vec![32768, 1024, 32, 1]);
    }

    #[test]
    fn flatten_round_trip_and_map_points() {
        let g = GridSpec::new(vec![
            AxisSpec::new(3, 1.0, 0.0).unwrap(),
            AxisSpec::new(4, 0.5, -1.0).unwrap(),
        ])
        .unwrap();
        let mut idx = [0; 2];
        for f in 0..g.len() {
            g.unflatten(f, &mut idx);
            assert_eq!(g.flat_index(&idx), f);
        }
        let v = g.map_points(|x| x[0] * 10.0 + x[1]);
        let mut p = [0.0; 2];
        for (f, val) in v.iter().enumerate() {
            g.point(f, &mut p);
            assert_eq!(*val, p[0] * 10.0 + p[1]);
        }
    }

    #[test]
    fn index_lookup() {
        let a = AxisSpec::reference();
        assert_eq!(a.index_of(0.0375), Some(16));
        assert_eq!(a.index_of(0.0), None);
        assert_eq!(a.nearest(0.0).len(), 2);
    }
}
