//! Dense brute-force reference for small grids.
//!
//! The Hamiltonian is assembled as an explicit matrix: the kinetic part is
//! the Fourier (spectral) differentiation matrix built from closed-form
//! cosine sums, not from an FFT, and the potential is the model's diagonal.
//! Exact `e^{-Hτ}` then comes from a symmetric eigendecomposition.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::operators::HamiltonianModel;
use crate::state::WaveFunction;

/// Largest grid the dense oracle accepts.
pub const ORACLE_DIM_CAP: usize = 4096;

/// Spectral kinetic matrix of one axis for `-c d²/dx²` with periodic wrap:
/// `K_jl = (c/n) Σ_f k_f² cos(k_f (j - l) h)`.
pub fn axis_kinetic_matrix(n: usize, step: f64, coefficient: f64) -> DMatrix<f64> {
    let freqs: Vec<f64> = (0..n)
        .map(|f| {
            let m = if f < (n + 1) / 2 { f as f64 } else { f as f64 - n as f64 };
            2.0 * PI * m / (n as f64 * step)
        })
        .collect();
    DMatrix::from_fn(n, n, |j, l| {
        let d = j as f64 - l as f64;
        freqs
            .iter()
            .map(|k| k * k * (k * d * step).cos())
            .sum::<f64>()
            * coefficient
            / n as f64
    })
}

/// Explicit `H = K + diag(V)` on a grid of at most [`ORACLE_DIM_CAP`] points.
#[derive(Debug, Clone)]
pub struct DenseHamiltonian {
    pub matrix: DMatrix<f64>,
}

impl DenseHamiltonian {
    pub fn new(model: &HamiltonianModel) -> Result<Self> {
        let grid = model.grid();
        let dim = grid.len();
        if dim > ORACLE_DIM_CAP {
            return Err(Error::OracleTooLarge {
                dim,
                cap: ORACLE_DIM_CAP,
            });
        }
        let mut h = DMatrix::<f64>::from_diagonal(&DVector::from_column_slice(model.potential()));
        let strides = grid.strides();
        let mut idx = vec![0; grid.ndim()];
        for (axis, (spec, &c)) in grid.axes().iter().zip(model.inv_mass()).enumerate() {
            let k1 = axis_kinetic_matrix(spec.n_points, spec.step, c);
            let stride = strides[axis];
            // Kronecker sum: couple points that differ only along `axis`
            for row in 0..dim {
                grid.unflatten(row, &mut idx);
                let j = idx[axis];
                let base = row - j * stride;
                for l in 0..spec.n_points {
                    h[(row, base + l * stride)] += k1[(j, l)];
                }
            }
        }
        Ok(Self { matrix: h })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn max_asymmetry(&self) -> f64 {
        (&self.matrix - self.matrix.transpose()).amax()
    }

    /// `⟨ψ|H|ψ⟩ / ⟨ψ|ψ⟩` by direct matrix-vector products.
    pub fn expectation(&self, psi: &WaveFunction) -> f64 {
        let re = DVector::from_iterator(psi.len(), psi.amplitudes().iter().map(|z| z.re));
        let im = DVector::from_iterator(psi.len(), psi.amplitudes().iter().map(|z| z.im));
        let num = re.dot(&(&self.matrix * &re)) + im.dot(&(&self.matrix * &im));
        num / (re.norm_squared() + im.norm_squared())
    }
}

/// Eigendecomposition of a [`DenseHamiltonian`], eigenvalues ascending.
pub struct DenseOracle {
    model: HamiltonianModel,
    values: Vec<f64>,
    vectors: DMatrix<f64>,
}

impl DenseOracle {
    pub fn new(model: &HamiltonianModel) -> Result<Self> {
        let h = DenseHamiltonian::new(model)?;
        let eig = SymmetricEigen::new(h.matrix);
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
            eig.eigenvectors[(r, order[c])]
        });
        Ok(Self {
            model: model.clone(),
            values,
            vectors,
        })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.values
    }

    /// Lowest eigenpair; the state is normalized with the grid measure and
    /// its largest-magnitude component is real and positive.
    pub fn ground_state(&self) -> (f64, WaveFunction) {
        let col = self.vectors.column(0);
        let (imax, _) = col
            .iter()
            .enumerate()
            .fold((0, 0.0f64), |(bi, bv), (i, v)| if v.abs() > bv { (i, v.abs()) } else { (bi, bv) });
        let sign = col[imax].signum();
        let amps = col.iter().map(|v| Complex64::new(v * sign, 0.0)).collect();
        let mut psi = WaveFunction::from_amplitudes(self.model.grid().clone(), amps)
            .expect("oracle vector matches its grid");
        psi.normalize().expect("eigenvector has unit norm");
        (self.values[0], psi)
    }

    /// `e^{-Hτ} ψ₀`, renormalized.
    pub fn imaginary_evolution(&self, psi0: &WaveFunction, tau: f64) -> Result<WaveFunction> {
        if !psi0.grid().same_axes(self.model.grid()) {
            return Err(Error::GridMismatch("oracle state on a different grid".into()));
        }
        let n = psi0.len();
        let re = DVector::from_iterator(n, psi0.amplitudes().iter().map(|z| z.re));
        let im = DVector::from_iterator(n, psi0.amplitudes().iter().map(|z| z.im));
        let e0 = self.values[0];
        let damp = DVector::from_iterator(n, self.values.iter().map(|e| (-(e - e0) * tau).exp()));
        let apply = |v: &DVector<f64>| {
            let c = self.vectors.tr_mul(v).component_mul(&damp);
            &self.vectors * c
        };
        let (re, im) = (apply(&re), apply(&im));
        let amps = re.iter().zip(im.iter()).map(|(&a, &b)| Complex64::new(a, b)).collect();
        let mut psi = WaveFunction::from_amplitudes(psi0.grid().clone(), amps)?;
        psi.normalize()?;
        Ok(psi)
    }
}

pub fn exact_ground_state(model: &HamiltonianModel) -> Result<(f64, WaveFunction)> {
    Ok(DenseOracle::new(model)?.ground_state())
}

pub fn exact_imaginary_evolution(
    psi0: &WaveFunction,
    model: &HamiltonianModel,
    tau: f64,
) -> Result<WaveFunction> {
    DenseOracle::new(model)?.imaginary_evolution(psi0, tau)
}

/// `‖a - b‖` with the grid measure, after aligning the global phase of `b` to `a`.
pub fn state_distance(a: &WaveFunction, b: &WaveFunction) -> Result<f64> {
    let ov = b.inner_product(a)?;
    let phase = if ov.norm() > 0.0 { ov / ov.norm() } else { Complex64::new(1.0, 0.0) };
    let d: f64 = a
        .amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x - y * phase).norm_sqr())
        .sum();
    Ok((d * a.grid().volume_element()).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{AxisSpec, GridSpec};
    use crate::operators::build_harmonic;

    fn line(n: usize, step: f64) -> GridSpec {
        GridSpec::new(vec![AxisSpec::centered(n, step).unwrap()]).unwrap()
    }

    #[test]
    fn kinetic_matrix_acts_on_plane_waves_exactly() {
        let n = 16;
        let step = 0.3;
        let c = 0.7;
        let k1 = axis_kinetic_matrix(n, step, c);
        for m in [1i32, 3, -5] {
            let k = 2.0 * PI * m as f64 / (n as f64 * step);
            let cosv = DVector::from_fn(n, |j, _| (k * j as f64 * step).cos());
            let sinv = DVector::from_fn(n, |j, _| (k * j as f64 * step).sin());
            assert!((&k1 * &cosv - &cosv * (c * k * k)).amax() < 1e-10);
            assert!((&k1 * &sinv - &sinv * (c * k * k)).amax() < 1e-10);
        }
    }

    #[test]
    fn dense_matrix_is_symmetric() {
        let g = GridSpec::new(vec![AxisSpec::centered(6, 0.4).unwrap(), AxisSpec::centered(5, 0.3).unwrap()])
            .unwrap();
        let m = build_harmonic(&g, 1.3, 0.8).unwrap();
        let h = DenseHamiltonian::new(&m).unwrap();
        assert!(h.max_asymmetry() < 1e-12);
    }

    #[test]
    fn harmonic_ground_energy() {
        let sigma = 0.5f64.sqrt();
        let g = line(64, 12.0 * sigma / 64.0);
        let m = build_harmonic(&g, 1.0, 1.0).unwrap();
        let (e0, psi) = exact_ground_state(&m).unwrap();
        assert!((e0 - 0.5).abs() < 1e-6);
        assert!((psi.norm() - 1.0).abs() < 1e-12);
        let amax = psi.amplitudes().iter().map(|z| z.re).fold(f64::MIN, f64::max);
        assert!(amax > 0.0);
    }

    #[test]
    fn free_particle_ground_state_is_uniform() {
        let g = line(12, 0.5);
        let m = HamiltonianModel::new(g.clone(), vec![0.0; 12], vec![0.5]).unwrap();
        let (e0, psi) = exact_ground_state(&m).unwrap();
        assert!(e0.abs() < 1e-12);
        let a0 = psi.amplitudes()[0];
        for z in psi.amplitudes() {
            assert!((z - a0).norm() < 1e-10);
        }
    }

    #[test]
    fn evolution_limits() {
        let g = line(16, 0.4);
        let m = build_harmonic(&g, 1.0, 1.0).unwrap();
        let oracle = DenseOracle::new(&m).unwrap();
        let psi0 = WaveFunction::from_fn(g, |x| (-(x[0] - 0.5).powi(2)).exp() * (1.0 + x[0]));
        let mut norm0 = psi0.clone();
        norm0.normalize().unwrap();
        let same = oracle.imaginary_evolution(&psi0, 0.0).unwrap();
        assert!(state_distance(&same, &norm0).unwrap() < 1e-12);
        let late = oracle.imaginary_evolution(&psi0, 200.0).unwrap();
        let (_, gs) = oracle.ground_state();
        assert!(late.fidelity(&gs).unwrap() > 1.0 - 1e-10);
    }

    #[test]
    fn oversized_grid_is_refused() {
        let g = GridSpec::new(vec![AxisSpec::centered(65, 0.1).unwrap(); 2]).unwrap();
        let m = build_harmonic(&g, 1.0, 1.0).unwrap();
        assert!(matches!(
            DenseHamiltonian::new(&m),
            Err(Error::OracleTooLarge { dim: 4225, .. })
        ));
    }
}
