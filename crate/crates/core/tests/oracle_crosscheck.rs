use proptest::prelude::*;

use qdopt::grid::{AxisSpec, GridSpec};
use qdopt::operators::{build_h2plus_reduced, build_harmonic, HamiltonianModel, ParticleMasses};
use qdopt::oracle::{exact_ground_state, DenseHamiltonian};
use qdopt::propagator::{energy, evolve_to_ground_state, PropagatorParams};
use qdopt::validation::{trotter_errors, two_well_line};
use qdopt::WaveFunction;

fn line(n: usize, step: f64) -> GridSpec {
    GridSpec::new(vec![AxisSpec::centered(n, step).unwrap()]).unwrap()
}

fn params(d_tau: f64, tau: f64) -> PropagatorParams {
    PropagatorParams {
        d_tau,
        max_steps: (tau / d_tau).ceil() as usize,
        energy_tol: 1e-300,
        renormalize_every: 1,
        check_every: 100,
    }
}

#[test]
fn two_well_energy_matches_dense_eigensolver() {
    let model = two_well_line(64, 0.075, 0.37).unwrap();
    let (e0, _) = exact_ground_state(&model).unwrap();
    let psi0 = WaveFunction::gaussian(model.grid().clone(), 0.5).unwrap();
    let (_, report) = evolve_to_ground_state(&psi0, &model, &params(0.001, 10.0)).unwrap();
    assert!((report.final_energy - e0).abs() < 1e-6, "{} vs {e0}", report.final_energy);
}

#[test]
fn trotter_error_is_second_order_on_16_and_64_points() {
    for n in [16, 64] {
        let grid = line(n, 8.0 / n as f64);
        let model = build_harmonic(&grid, 1.0, 1.0).unwrap();
        let psi0 = WaveFunction::from_fn(grid, |x| (-(x[0] - 0.5).powi(2)).exp());
        let errs = trotter_errors(&model, &psi0, 1.0, &[0.1, 0.05, 0.025, 0.0125]).unwrap();
        for w in errs.windows(2) {
            let r = w[0] / w[1];
            assert!((4.0 / 1.5..=6.0).contains(&r), "n={n} ratio {r} errs {errs:?}");
        }
    }
}

#[test]
fn energy_trace_is_monotone_and_norm_preserved() {
    let grid = GridSpec::new(vec![AxisSpec::centered(16, 0.5).unwrap(); 2]).unwrap();
    let model = build_harmonic(&grid, 1.0, 1.0).unwrap();
    let psi0 = WaveFunction::from_fn(grid, |x| (-(x[0] - 1.0).powi(2) - x[1] * x[1]).exp());
    let mut p = params(0.05, 20.0);
    p.check_every = 1;
    let (_, report) = evolve_to_ground_state(&psi0, &model, &p).unwrap();
    assert!(report.max_energy_increase() <= 1e-10);
    for t in &report.energy_trace {
        assert!((t.state_norm - 1.0).abs() < 1e-12);
    }
}

#[test]
fn reduced_model_keeps_inversion_symmetry() {
    let grid = GridSpec::reduced_h2plus(AxisSpec::centered(8, 0.15).unwrap());
    let masses = ParticleMasses::homonuclear(1863.15).unwrap();
    let model = build_h2plus_reduced(&grid, &masses, 1.0 / (2.0f64 * 0.15 * 0.15).sqrt()).unwrap();
    let psi0 = WaveFunction::gaussian(grid.clone(), 0.5).unwrap();
    let (psi, _) = evolve_to_ground_state(&psi0, &model, &params(0.075, 30.0)).unwrap();
    let mut idx = [0usize; 4];
    let amps = psi.amplitudes();
    let peak = amps.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for f in 0..grid.len() {
        grid.unflatten(f, &mut idx);
        // R -> -R with r_c fixed is a symmetry for equal masses
        let mirror = grid.flat_index(&[7 - idx[0], 7 - idx[1], idx[2], idx[3]]);
        assert!((amps[f] - amps[mirror]).norm() < 1e-9 * peak);
    }
}

fn random_model(pot: Vec<f64>, c: (f64, f64)) -> HamiltonianModel {
    let grid = GridSpec::new(vec![AxisSpec::centered(6, 0.4).unwrap(), AxisSpec::centered(5, 0.3).unwrap()]).unwrap();
    HamiltonianModel::new(grid, pot, vec![c.0, c.1]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectral_energy_equals_dense_expectation(
        pot in prop::collection::vec(-5.0f64..5.0, 30),
        re in prop::collection::vec(-1.0f64..1.0, 30),
        im in prop::collection::vec(-1.0f64..1.0, 30),
        c0 in 0.01f64..2.0,
        c1 in 0.01f64..2.0,
    ) {
        let model = random_model(pot, (c0, c1));
        let amps = re.iter().zip(&im).map(|(a, b)| num_complex::Complex64::new(*a, *b)).collect();
        let psi = WaveFunction::from_amplitudes(model.grid().clone(), amps).unwrap();
        prop_assume!(psi.norm() > 1e-3);
        let fast = energy(&psi, &model).unwrap();
        let dense = DenseHamiltonian::new(&model).unwrap().expectation(&psi);
        prop_assert!((fast - dense).abs() < 1e-9 * dense.abs().max(1.0));
    }

    #[test]
    fn energy_is_bounded_below_by_exact_ground_energy(
        pot in prop::collection::vec(-5.0f64..5.0, 30),
        re in prop::collection::vec(-1.0f64..1.0, 30),
    ) {
        let model = random_model(pot, (0.5, 0.5));
        let amps = re.iter().map(|a| num_complex::Complex64::new(*a, 0.0)).collect();
        let psi = WaveFunction::from_amplitudes(model.grid().clone(), amps).unwrap();
        prop_assume!(psi.norm() > 1e-3);
        let (e0, _) = exact_ground_state(&model).unwrap();
        prop_assert!(energy(&psi, &model).unwrap() >= e0 - 1e-9);
    }
}
