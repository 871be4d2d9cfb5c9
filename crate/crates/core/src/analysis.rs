//! Classical point-charge energy scan and the harmonic-chain zero-point model.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::operators::{build_point_charge_electronic, softened_coulomb, HamiltonianModel};
use crate::propagator::{evolve_to_ground_state, PropagationReport, PropagatorParams};
use crate::state::WaveFunction;

/// Width of the Gaussian start used for every electronic ground-state solve.
pub const ELECTRON_START_WIDTH: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct PesPoint {
    pub separation: f64,
    pub electronic: f64,
    pub total: f64,
    pub steps: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PesScan {
    pub points: Vec<PesPoint>,
    /// Separation with the lowest total energy among completed points.
    pub equilibrium: Option<f64>,
    /// First separation whose propagation failed; later points were not kept.
    pub failure: Option<(f64, String)>,
}

impl PesScan {
    pub fn separations(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.separation).collect()
    }

    pub fn energies(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.total).collect()
    }

    pub fn to_csv(&self, header: &[String]) -> String {
        let mut s = String::new();
        for h in header {
            s.push_str(&format!("# {h}\n"));
        }
        if let Some((r, msg)) = &self.failure {
            s.push_str(&format!("# INCOMPLETE: propagation failed at R = {r}: {msg}\n"));
        }
        s.push_str("R,E_electronic,E_total\n");
        for p in &self.points {
            s.push_str(&format!(
                "{:.6},{:.17e},{:.17e}\n",
                p.separation, p.electronic, p.total
            ));
        }
        s
    }
}

/// Evenly spaced separations from `start` to `stop` inclusive.
pub fn separation_range(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| start + i as f64 * step).collect()
}

/// Electronic ground state for nuclei fixed at `(±r_sep/2, 0)`.
pub fn point_charge_ground_state(
    grid: &GridSpec,
    r_sep: f64,
    cap: f64,
    params: &PropagatorParams,
) -> Result<(WaveFunction, PropagationReport)> {
    let model = build_point_charge_electronic(grid, r_sep, cap)?;
    let psi0 = WaveFunction::gaussian(grid.clone(), ELECTRON_START_WIDTH)?;
    evolve_to_ground_state(&psi0, &model, params)
}

/// Total energy `E_elec(R) + 1/R` over `separations`, each solved independently.
pub fn pes_scan(
    grid: &GridSpec,
    separations: &[f64],
    cap: f64,
    params: &PropagatorParams,
) -> Result<PesScan> {
    if separations.is_empty() {
        return Err(Error::InvalidArgument("no separations to scan".into()));
    }
    if let Some(r) = separations.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidArgument(format!(
            "separations must be positive, got {r}"
        )));
    }
    params.validate()?;
    let results: Vec<Result<PesPoint>> = separations
        .par_iter()
        .map(|&r| {
            let (_, report) = point_charge_ground_state(grid, r, cap, params)?;
            let electronic = report.final_energy;
            Ok(PesPoint {
                separation: r,
                electronic,
                total: electronic + softened_coulomb(1.0, r, cap),
                steps: report.steps_taken,
                converged: report.converged,
            })
        })
        .collect();

    let mut points = Vec::with_capacity(results.len());
    let mut failure = None;
    for (r, res) in separations.iter().zip(results) {
        match res {
            Ok(p) => points.push(p),
            Err(e) => {
                failure = Some((*r, e.to_string()));
                break;
            }
        }
    }
    let equilibrium = points
        .iter()
        .min_by(|a, b| a.total.total_cmp(&b.total))
        .map(|p| p.separation);
    Ok(PesScan {
        points,
        equilibrium,
        failure,
    })
}

/// Electronic ground-state energy of a single unit charge at the origin, on
/// the same grid and softening as the scan.
pub fn isolated_atom_energy(grid: &GridSpec, cap: f64, params: &PropagatorParams) -> Result<f64> {
    let potential = grid.map_points(|x| softened_coulomb(-1.0, (x[0] * x[0] + x[1] * x[1]).sqrt(), cap));
    let model = HamiltonianModel::new(grid.clone(), potential, vec![0.5; grid.ndim()])?;
    let psi0 = WaveFunction::gaussian(grid.clone(), ELECTRON_START_WIDTH)?;
    Ok(evolve_to_ground_state(&psi0, &model, params)?.1.final_energy)
}

/// `N` equal masses `m` joined by springs `k`, free at both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainModel {
    pub n_masses: usize,
    pub mass: f64,
    pub spring_k: f64,
}

impl ChainModel {
    pub fn new(n_masses: usize, mass: f64, spring_k: f64) -> Result<Self> {
        if n_masses < 2 {
            return Err(Error::InvalidArgument(format!(
                "chain needs at least 2 masses, got {n_masses}"
            )));
        }
        if !(mass > 0.0 && spring_k > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "chain mass and spring constant must be positive, got m={mass}, k={spring_k}"
            )));
        }
        Ok(Self {
            n_masses,
            mass,
            spring_k,
        })
    }

    /// `√(k/m)`.
    pub fn omega0(&self) -> f64 {
        (self.spring_k / self.mass).sqrt()
    }

    /// `ω⁽ⁿ⁾ = 2 ω₀ sin(nπ/N)`.
    pub fn frequency(&self, n: usize) -> f64 {
        2.0 * self.omega0() * (n as f64 * PI / self.n_masses as f64).sin()
    }

    /// Small-`n` form `2 ω₀ nπ/N`.
    pub fn frequency_small_n(&self, n: usize) -> f64 {
        2.0 * self.omega0() * n as f64 * PI / self.n_masses as f64
    }
}

/// Normal-mode frequencies for `n = 1 … N−1`.
pub fn chain_frequencies(model: &ChainModel) -> Vec<f64> {
    (1..model.n_masses).map(|n| model.frequency(n)).collect()
}

/// Ground-state width `√(1/(2 m ω))` of a harmonic mode.
pub fn harmonic_sigma(mass: f64, omega: f64) -> f64 {
    (1.0 / (2.0 * mass * omega)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroPointSigma {
    pub omega: f64,
    pub exact: f64,
    /// Width from the small-`n` frequency, `√(N/(4 m ω₀ π))` at `n = 1`;
    /// present only for the lowest mode.
    pub approx: Option<f64>,
}

pub fn zero_point_sigma(model: &ChainModel, n: usize) -> Result<ZeroPointSigma> {
    if n == 0 || n >= model.n_masses {
        return Err(Error::InvalidArgument(format!(
            "mode index must be in 1..={}, got {n}",
            model.n_masses - 1
        )));
    }
    let omega = model.frequency(n);
    let approx = (n == 1).then(|| harmonic_sigma(model.mass, model.frequency_small_n(1)));
    Ok(ZeroPointSigma {
        omega,
        exact: harmonic_sigma(model.mass, omega),
        approx,
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainRow {
    pub n_masses: usize,
    pub mode: usize,
    pub omega: f64,
    pub sigma_exact: f64,
    pub sigma_approx: f64,
}

/// Lowest-mode rows for each chain length.
pub fn chain_scaling(lengths: &[usize], mass: f64, spring_k: f64) -> Result<Vec<ChainRow>> {
    lengths
        .iter()
        .map(|&n_masses| {
            let model = ChainModel::new(n_masses, mass, spring_k)?;
            let s = zero_point_sigma(&model, 1)?;
            Ok(ChainRow {
                n_masses,
                mode: 1,
                omega: s.omega,
                sigma_exact: s.exact,
                sigma_approx: s.approx.unwrap_or(f64::NAN),
            })
        })
        .collect()
}

pub fn chain_csv(rows: &[ChainRow], header: &[String]) -> String {
    let mut s = String::new();
    for h in header {
        s.push_str(&format!("# {h}\n"));
    }
    s.push_str("N,n,omega,sigma_exact,sigma_approx\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{:.17e},{:.17e},{:.17e}\n",
            r.n_masses, r.mode, r.omega, r.sigma_exact, r.sigma_approx
        ));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowest_frequencies() {
        let two = ChainModel::new(2, 1.0, 1.0).unwrap();
        assert_eq!(chain_frequencies(&two).len(), 1);
        assert!((two.frequency(1) - 2.0).abs() < 1e-15);
        let four = ChainModel::new(4, 1.0, 1.0).unwrap();
        assert!((four.frequency(1) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn small_n_form_is_accurate_for_long_chains() {
        let m = ChainModel::new(1000, 1.0, 1.0).unwrap();
        let rel = (m.frequency(1) - m.frequency_small_n(1)).abs() / m.frequency(1);
        assert!(rel < 1e-5);
    }

    #[test]
    fn spectrum_shape() {
        let m = ChainModel::new(12, 2.0, 3.0).unwrap();
        let w = chain_frequencies(&m);
        for n in 1..6 {
            assert!(w[n] > w[n - 1]);
        }
        for n in 1..12 {
            assert!((m.frequency(n) - m.frequency(12 - n)).abs() < 1e-12);
        }
    }

    #[test]
    fn sigma_values() {
        assert!((harmonic_sigma(1.0, 1.0) - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((harmonic_sigma(2.0, 1.0) - 0.5).abs() < 1e-15);
        let m = ChainModel::new(100, 1.0, 1.0).unwrap();
        let s = zero_point_sigma(&m, 1).unwrap();
        let approx = s.approx.unwrap();
        assert!((approx - (100.0 / (4.0 * PI)).sqrt()).abs() < 1e-12);
        assert!((s.exact - approx).abs() / s.exact < 0.02);
        assert!(zero_point_sigma(&m, 2).unwrap().approx.is_none());
        assert!(zero_point_sigma(&m, 0).is_err());
        assert!(zero_point_sigma(&m, 100).is_err());
        assert!(ChainModel::new(1, 1.0, 1.0).is_err());
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [1.0, 10.0, 100.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(0.7)).collect();
        assert!((log_log_slope(&xs, &ys) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn separation_grid() {
        let r = separation_range(0.25, 0.60, 0.01);
        assert_eq!(r.len(), 36);
        assert!((r[12] - 0.37).abs() < 1e-12);
        assert!((r[35] - 0.60).abs() < 1e-12);
    }

    #[test]
    fn scan_rejects_bad_input() {
        let g = GridSpec::new(vec![crate::grid::AxisSpec::reference(); 2]).unwrap();
        let p = PropagatorParams::default();
        assert!(pes_scan(&g, &[], 9.0, &p).is_err());
        assert!(pes_scan(&g, &[-0.1], 9.0, &p).is_err());
    }
}
