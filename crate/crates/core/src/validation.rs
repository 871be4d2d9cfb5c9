//! Built-in cross-checks of the propagator against the dense oracle on small grids.

use crate::error::Result;
use crate::grid::{AxisSpec, GridSpec};
use crate::operators::{
    auto_cap, build_h2plus_reduced, build_harmonic, build_point_charge_electronic, softened_coulomb,
    HamiltonianModel, ParticleMasses, REFERENCE_PROTON_MASS,
};
use crate::oracle::{state_distance, DenseOracle};
use crate::propagator::{evolve_to_ground_state, PropagatorParams, SplitOperator};
use crate::state::WaveFunction;

/// Fidelity floor against the exact ground state.
pub const FIDELITY_FLOOR: f64 = 1.0 - 1e-6;
/// Largest step used for the fidelity checks.
pub const VALIDATION_D_TAU: f64 = 0.01;

/// A model small enough for the dense oracle, with the imaginary time the
/// engine needs to reach its ground state from a Gaussian start.
#[derive(Debug, Clone)]
pub struct SmallModel {
    pub name: &'static str,
    pub model: HamiltonianModel,
    pub alpha: f64,
    pub tau: f64,
}

fn line(n: usize, step: f64) -> Result<GridSpec> {
    GridSpec::new(vec![AxisSpec::centered(n, step)?])
}

/// Electron on the line through two unit charges at `±r_sep/2`.
pub fn two_well_line(n: usize, step: f64, r_sep: f64) -> Result<HamiltonianModel> {
    let grid = line(n, step)?;
    let cap = 1.0 / (2.0 * step * step).sqrt();
    let h = 0.5 * r_sep;
    let potential = grid.map_points(|x| softened_coulomb(-1.0, (x[0] + h).abs(), cap) + softened_coulomb(-1.0, (x[0] - h).abs(), cap));
    HamiltonianModel::new(grid, potential, vec![0.5])
}

/// The models exercised by `validate`.
pub fn shipped_small_models() -> Result<Vec<SmallModel>> {
    let sigma = 0.5f64.sqrt();
    let harmonic_1d = build_harmonic(&line(64, 12.0 * sigma / 64.0)?, 1.0, 1.0)?;
    let plane = GridSpec::new(vec![AxisSpec::centered(16, 0.5)?; 2])?;
    let harmonic_2d = build_harmonic(&plane, 1.0, 1.0)?;
    let two_well = two_well_line(64, 0.075, 0.37)?;
    let ref_plane = GridSpec::new(vec![AxisSpec::reference(); 2])?;
    let point_charge = build_point_charge_electronic(&ref_plane, 0.37, auto_cap(&ref_plane, 0, 1))?;
    let small = GridSpec::reduced_h2plus(AxisSpec::centered(6, 0.15)?);
    let reduced = build_h2plus_reduced(
        &small,
        &ParticleMasses::homonuclear(REFERENCE_PROTON_MASS)?,
        auto_cap(&small, 0, 1),
    )?;
    Ok(vec![
        SmallModel { name: "harmonic_1d_64", model: harmonic_1d, alpha: 0.5, tau: 40.0 },
        SmallModel { name: "harmonic_2d_16x16", model: harmonic_2d, alpha: 0.5, tau: 40.0 },
        SmallModel { name: "two_well_1d_64", model: two_well, alpha: 0.5, tau: 20.0 },
        SmallModel { name: "point_charge_2d_32x32", model: point_charge, alpha: 0.5, tau: 20.0 },
        SmallModel { name: "h2plus_reduced_6x6x6x6", model: reduced, alpha: 0.5, tau: 2000.0 },
    ])
}

/// Engine-versus-oracle comparison for one model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelComparison {
    pub engine_energy: f64,
    pub exact_energy: f64,
    pub fidelity: f64,
    pub max_energy_increase: f64,
    pub max_norm_deviation: f64,
}

pub fn compare_with_oracle(m: &SmallModel, d_tau: f64) -> Result<ModelComparison> {
    let oracle = DenseOracle::new(&m.model)?;
    let (exact_energy, exact) = oracle.ground_state();
    let psi0 = WaveFunction::gaussian(m.model.grid().clone(), m.alpha)?;
    let params = PropagatorParams {
        d_tau,
        max_steps: (m.tau / d_tau).ceil() as usize,
        energy_tol: 1e-300,
        renormalize_every: 1,
        check_every: 50,
    };
    let (psi, report) = evolve_to_ground_state(&psi0, &m.model, &params)?;
    let max_norm_deviation = report
        .energy_trace
        .iter()
        .map(|t| (t.state_norm - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(ModelComparison {
        engine_energy: report.final_energy,
        exact_energy,
        fidelity: psi.fidelity(&exact)?,
        max_energy_increase: report.max_energy_increase(),
        max_norm_deviation,
    })
}

/// Distance between the engine and exact `e^{-Hτ}ψ₀` for each step size.
pub fn trotter_errors(model: &HamiltonianModel, psi0: &WaveFunction, tau: f64, d_taus: &[f64]) -> Result<Vec<f64>> {
    let exact = DenseOracle::new(model)?.imaginary_evolution(psi0, tau)?;
    d_taus
        .iter()
        .map(|&dt| {
            let steps = (tau / dt).round() as usize;
            let op = SplitOperator::new(model, dt);
            let mut psi = psi0.clone();
            psi.normalize()?;
            op.run(psi.amplitudes_mut(), steps, 1)?;
            psi.normalize()?;
            state_distance(&exact, &psi)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn line(&self) -> String {
        format!("{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

/// Runs every check; numeric failures inside a check are reported as failed checks.
pub fn run_suite() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for m in shipped_small_models()? {
        let check = match compare_with_oracle(&m, VALIDATION_D_TAU) {
            Ok(c) => Check {
                name: format!("fidelity {}", m.name),
                passed: c.fidelity > FIDELITY_FLOOR && c.max_norm_deviation < 1e-12,
                detail: format!(
                    "1-F = {:.2e}, E_engine = {:.10}, E_exact = {:.10}, norm dev = {:.1e}",
                    1.0 - c.fidelity,
                    c.engine_energy,
                    c.exact_energy,
                    c.max_norm_deviation
                ),
            },
            Err(e) => Check {
                name: format!("fidelity {}", m.name),
                passed: false,
                detail: e.to_string(),
            },
        };
        checks.push(check);
    }

    let grid = line(32, 0.3)?;
    let model = build_harmonic(&grid, 1.0, 1.0)?;
    let psi0 = WaveFunction::from_fn(grid, |x| (-(x[0] - 0.7).powi(2)).exp() * (1.0 + 0.3 * x[0]));
    let errs = trotter_errors(&model, &psi0, 1.0, &[0.1, 0.05, 0.025, 0.0125])?;
    let ratios: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
    checks.push(Check {
        name: "trotter order harmonic_1d_32".into(),
        passed: ratios.iter().all(|r| (4.0 / 1.5..=4.0 * 1.5).contains(r)),
        detail: format!("error ratios {ratios:.3?}"),
    });
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn models_fit_the_oracle() {
        for m in shipped_small_models().unwrap() {
            assert!(m.model.grid().len() <= crate::oracle::ORACLE_DIM_CAP, "{}", m.name);
        }
    }

    #[test]
    fn two_well_is_symmetric() {
        let m = two_well_line(64, 0.075, 0.37).unwrap();
        let v = m.potential();
        for j in 0..64 {
            assert!((v[j] - v[63 - j]).abs() < 1e-12);
        }
    }

    #[test]
    fn check_line_format() {
        let c = Check { name: "x".into(), passed: false, detail: "d".into() };
        assert_eq!(c.line(), "FAIL x: d");
    }
}
