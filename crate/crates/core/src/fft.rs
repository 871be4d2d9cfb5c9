//! Multi-dimensional FFT over row-major complex tensors.
//!
//! Convention: the forward transform is unnormalized,
//! `ψ̃_k = Σ_x ψ_x e^{-i k·x}`, and [`NdFft::inverse`] scales by `1/N`
//! (`N` = total element count), so `inverse(forward(ψ)) = ψ`. Under this
//! convention the discrete Parseval identity reads
//! `Σ_x |ψ_x|² dV = (dV / N) Σ_k |ψ̃_k|²`.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::grid::GridSpec;

/// Number of lines gathered per tile when transforming a strided axis.
const TILE: usize = 32;

/// Pre-planned forward and backward transforms for one grid shape.
pub struct NdFft {
    shape: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    backward: Vec<Arc<dyn Fft<f64>>>,
}

impl std::fmt::Debug for NdFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NdFft").field("shape", &self.shape).finish()
    }
}

impl NdFft {
    pub fn new(grid: &GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        let shape = grid.shape();
        let forward = shape
            .iter()
            .map(|&n| planner.plan_fft(n, FftDirection::Forward))
            .collect();
        let backward = shape
            .iter()
            .map(|&n| planner.plan_fft(n, FftDirection::Inverse))
            .collect();
        Self {
            shape,
            forward,
            backward,
        }
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward);
    }

    /// Inverse transform including the `1/N` factor.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.inverse_unscaled(data);
        let s = 1.0 / self.len() as f64;
        data.par_iter_mut().for_each(|z| *z *= s);
    }

    /// Inverse transform without the `1/N` factor; callers fold it into a
    /// diagonal multiplier.
    pub fn inverse_unscaled(&self, data: &mut [Complex64]) {
        self.transform(data, &self.backward);
    }

    fn transform(&self, data: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>]) {
        assert_eq!(data.len(), self.len(), "buffer does not match FFT shape");
        let mut stride = 1;
        for axis in (0..self.shape.len()).rev() {
            let n = self.shape[axis];
            transform_axis(data, n, stride, plans[axis].as_ref());
            stride *= n;
        }
    }
}

fn transform_axis(data: &mut [Complex64], n: usize, stride: usize, fft: &dyn Fft<f64>) {
    let scratch_len = fft.get_inplace_scratch_len();
    if stride == 1 {
        // contiguous lines: rustfft handles a buffer holding many lines
        let lines_per_chunk = (4096 / n).max(1);
        data.par_chunks_mut(n * lines_per_chunk).for_each_init(
            || vec![Complex64::default(); scratch_len],
            |scratch, chunk| fft.process_with_scratch(chunk, scratch),
        );
        return;
    }
    let block = n * stride;
    data.par_chunks_mut(block).for_each_init(
        || {
            (
                vec![Complex64::default(); TILE * n],
                vec![Complex64::default(); scratch_len],
            )
        },
        |(buf, scratch), block| {
            let mut col0 = 0;
            while col0 < stride {
                let w = TILE.min(stride - col0);
                let lines = &mut buf[..w * n];
                for j in 0..n {
                    let row = &block[j * stride + col0..j * stride + col0 + w];
                    for (c, &z) in row.iter().enumerate() {
                        lines[c * n + j] = z;
                    }
                }
                fft.process_with_scratch(lines, scratch);
                for j in 0..n {
                    let row = &mut block[j * stride + col0..j * stride + col0 + w];
                    for (c, z) in row.iter_mut().enumerate() {
                        *z = lines[c * n + j];
                    }
                }
                col0 += w;
            }
        },
    );
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::AxisSpec;
    use std::f64::consts::PI;

    fn naive_dft(grid: &GridSpec, data: &[Complex64]) -> Vec<Complex64> {
        let shape = grid.shape();
        let mut out = vec![Complex64::default(); data.len()];
        let mut ki = vec![0; shape.len()];
        let mut xi = vec![0; shape.len()];
        for (kf, o) in out.iter_mut().enumerate() {
            grid.unflatten(kf, &mut ki);
            for (xf, &v) in data.iter().enumerate() {
                grid.unflatten(xf, &mut xi);
                let phase: f64 = (0..shape.len())
                    .map(|d| -2.0 * PI * (ki[d] * xi[d]) as f64 / shape[d] as f64)
                    .sum();
                *o += v * Complex64::from_polar(1.0, phase);
            }
        }
        out
    }

    fn test_grid() -> GridSpec {
        GridSpec::new(vec![
            AxisSpec::new(4, 1.0, 0.0).unwrap(),
            AxisSpec::new(6, 1.0, 0.0).unwrap(),
            AxisSpec::new(8, 1.0, 0.0).unwrap(),
        ])
        .unwrap()
    }

    fn sample_data(len: usize) -> Vec<Complex64> {
        (0..len)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        let g = test_grid();
        let data = sample_data(g.len());
        let expect = naive_dft(&g, &data);
        let mut got = data.clone();
        NdFft::new(&g).forward(&mut got);
        for (a, b) in got.iter().zip(&expect) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn strided_axis_wider_than_tile() {
        let g = GridSpec::new(vec![
            AxisSpec::new(4, 1.0, 0.0).unwrap(),
            AxisSpec::new(40, 1.0, 0.0).unwrap(),
        ])
        .unwrap();
        let data = sample_data(g.len());
        let expect = naive_dft(&g, &data);
        let mut got = data.clone();
        NdFft::new(&g).forward(&mut got);
        for (a, b) in got.iter().zip(&expect) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn round_trip_and_parseval() {
        let g = test_grid();
        let data = sample_data(g.len());
        let fft = NdFft::new(&g);
        let mut z = data.clone();
        fft.forward(&mut z);
        let real: f64 = data.iter().map(|v| v.norm_sqr()).sum();
        let recip: f64 = z.iter().map(|v| v.norm_sqr()).sum::<f64>() / g.len() as f64;
        assert!((real - recip).abs() < 1e-10 * real);
        fft.inverse(&mut z);
        for (a, b) in z.iter().zip(&data) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
