//! Second-order split-operator stepping in imaginary time.
//!
//! One step applies `e^{-T dτ/2} e^{-V dτ} e^{-T dτ/2}`: the kinetic factor
//! is diagonal in wavenumber space and the potential factor in real space.
//! Consecutive kinetic half steps are fused when several steps run back to
//! back, which is algebraically identical to repeating [`trotter_step`].

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fft::NdFft;
use crate::operators::HamiltonianModel;
use crate::state::WaveFunction;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorParams {
    pub d_tau: f64,
    pub max_steps: usize,
    /// Relative energy change between consecutive checks that counts as converged.
    pub energy_tol: f64,
    pub renormalize_every: usize,
    /// Steps between energy evaluations.
    pub check_every: usize,
}

impl Default for PropagatorParams {
    fn default() -> Self {
        Self {
            d_tau: 0.075,
            max_steps: 100_000,
            energy_tol: 1e-10,
            renormalize_every: 1,
            check_every: 10,
        }
    }
}

impl PropagatorParams {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.d_tau > 0.0 && self.d_tau.is_finite()) {
            problems.push(format!("d_tau must be positive, got {}", self.d_tau));
        }
        if self.max_steps == 0 {
            problems.push("max_steps must be at least 1".to_string());
        }
        if !(self.energy_tol > 0.0) {
            problems.push(format!("energy_tol must be positive, got {}", self.energy_tol));
        }
        if self.renormalize_every == 0 {
            problems.push("renormalize_every must be at least 1".to_string());
        }
        if self.check_every == 0 {
            problems.push("check_every must be at least 1".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(problems.join("; ")))
        }
    }
}

/// One energy evaluation during an evolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub step: usize,
    pub energy: f64,
    /// Norm of the most recent step's output before renormalization (1 at step 0).
    pub norm: f64,
    /// Norm of the state the energy was evaluated on.
    pub state_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationReport {
    pub steps_taken: usize,
    pub energy_trace: Vec<TraceEntry>,
    pub converged: bool,
    pub final_energy: f64,
    pub d_tau: f64,
}

impl PropagationReport {
    /// Ground-state energy estimate `-ln(norm)/dτ` from the per-step norm decay.
    /// Only meaningful when renormalizing every step.
    pub fn norm_decay_energy(&self) -> Option<f64> {
        self.energy_trace
            .last()
            .filter(|e| e.step > 0)
            .map(|e| -e.norm.ln() / self.d_tau)
    }

    /// Largest energy increase between consecutive trace entries (0 when non-increasing).
    pub fn max_energy_increase(&self) -> f64 {
        self.energy_trace
            .windows(2)
            .map(|w| w[1].energy - w[0].energy)
            .fold(0.0, f64::max)
    }

    /// CSV with `step,energy,norm` columns; `header` lines are written as `#` comments.
    pub fn to_csv(&self, header: &[String]) -> String {
        let mut s = String::new();
        for h in header {
            s.push_str(&format!("# {h}\n"));
        }
        s.push_str("step,energy,norm\n");
        for e in &self.energy_trace {
            s.push_str(&format!("{},{:.17e},{:.17e}\n", e.step, e.energy, e.norm));
        }
        s
    }
}

/// Precomputed diagonal factors for a model at a fixed step.
pub struct SplitOperator {
    fft: NdFft,
    kinetic: Vec<f64>,
    potential: Vec<f64>,
    /// `e^{-T dτ/2} / N`
    kin_half: Vec<f64>,
    /// `e^{-V dτ}`
    pot_factor: Vec<f64>,
    d_tau: f64,
    dv: f64,
    n: usize,
}

impl SplitOperator {
    pub fn new(model: &HamiltonianModel, d_tau: f64) -> Self {
        let n = model.grid().len();
        let inv_n = 1.0 / n as f64;
        let kinetic = model.kinetic_spectrum();
        let kin_half = kinetic
            .iter()
            .map(|t| (-t * 0.5 * d_tau).exp() * inv_n)
            .collect();
        let pot_factor = model
            .potential()
            .iter()
            .map(|v| (-v * d_tau).exp())
            .collect();
        Self {
            fft: NdFft::new(model.grid()),
            kinetic,
            potential: model.potential().to_vec(),
            kin_half,
            pot_factor,
            d_tau,
            dv: model.grid().volume_element(),
            n,
        }
    }

    pub fn d_tau(&self) -> f64 {
        self.d_tau
    }

    fn check_len(&self, psi: &[Complex64]) {
        assert_eq!(psi.len(), self.n, "state does not match the model grid");
    }

    pub fn kinetic_half(&self, psi: &mut [Complex64]) {
        self.check_len(psi);
        self.fft.forward(psi);
        mul_real(psi, &self.kin_half, 1.0);
        self.fft.inverse_unscaled(psi);
    }

    pub fn potential_full(&self, psi: &mut [Complex64]) {
        self.check_len(psi);
        mul_real(psi, &self.pot_factor, 1.0);
    }

    /// `T/2 · V · T/2` without renormalization.
    pub fn step(&self, psi: &mut [Complex64]) {
        self.kinetic_half(psi);
        self.potential_full(psi);
        self.kinetic_half(psi);
    }

    /// Runs `n_steps` fused steps, renormalizing after each step whose
    /// 1-based index within the run is a multiple of `renormalize_every`
    /// and after the last one. Returns the pre-renormalization norm of the
    /// last step (relative to a unit-norm input when renormalizing every step).
    pub fn run(&self, psi: &mut [Complex64], n_steps: usize, renormalize_every: usize) -> Result<f64> {
        self.check_len(psi);
        if n_steps == 0 {
            return Ok(1.0);
        }
        let every = renormalize_every.max(1);
        self.fft.forward(psi);
        mul_real(psi, &self.kin_half, 1.0);
        self.fft.inverse_unscaled(psi);
        let mut last_norm = 1.0;
        for i in 1..=n_steps {
            mul_real(psi, &self.pot_factor, 1.0);
            self.fft.forward(psi);
            let mut scale = 1.0;
            if i % every == 0 || i == n_steps {
                // norm of ψ̃·kin_half, i.e. of the completed step in real space
                let nsq: f64 = psi
                    .par_iter()
                    .zip(self.kin_half.par_iter())
                    .map(|(z, k)| z.norm_sqr() * k * k)
                    .sum::<f64>()
                    * self.dv
                    * self.n as f64;
                let norm = nsq.sqrt();
                if !(norm > f64::MIN_POSITIVE && norm.is_finite()) {
                    return Err(Error::ZeroNorm { norm });
                }
                last_norm = norm;
                scale = 1.0 / norm;
            }
            if i == n_steps {
                mul_real(psi, &self.kin_half, scale);
            } else {
                let n = self.n as f64;
                psi.par_iter_mut()
                    .zip(self.kin_half.par_iter())
                    .for_each(|(z, k)| *z *= k * k * n * scale);
            }
            self.fft.inverse_unscaled(psi);
        }
        Ok(last_norm)
    }

    /// `⟨ψ|H|ψ⟩ / ⟨ψ|ψ⟩`, kinetic part evaluated in wavenumber space.
    pub fn energy(&self, psi: &[Complex64]) -> f64 {
        self.check_len(psi);
        let (ev, nsq) = psi
            .par_iter()
            .zip(self.potential.par_iter())
            .map(|(z, v)| {
                let p = z.norm_sqr();
                (v * p, p)
            })
            .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
        let mut buf = psi.to_vec();
        self.fft.forward(&mut buf);
        // Parseval: Σ|ψ|² = Σ|ψ̃|² / N
        let et: f64 = buf
            .par_iter()
            .zip(self.kinetic.par_iter())
            .map(|(z, t)| t * z.norm_sqr())
            .sum::<f64>()
            / self.n as f64;
        (et + ev) / nsq
    }
}

fn mul_real(psi: &mut [Complex64], factor: &[f64], scale: f64) {
    psi.par_iter_mut()
        .zip(factor.par_iter())
        .for_each(|(z, f)| *z *= f * scale);
}

fn check_grid(psi: &WaveFunction, model: &HamiltonianModel) -> Result<()> {
    if psi.grid().same_axes(model.grid()) {
        Ok(())
    } else {
        Err(Error::GridMismatch("state and model live on different grids".into()))
    }
}

pub fn kinetic_half_step(psi: &WaveFunction, model: &HamiltonianModel, d_tau: f64) -> Result<WaveFunction> {
    check_grid(psi, model)?;
    let mut out = psi.clone();
    SplitOperator::new(model, d_tau).kinetic_half(out.amplitudes_mut());
    Ok(out)
}

pub fn potential_full_step(psi: &WaveFunction, model: &HamiltonianModel, d_tau: f64) -> Result<WaveFunction> {
    check_grid(psi, model)?;
    let mut out = psi.clone();
    for (z, v) in out.amplitudes_mut().iter_mut().zip(model.potential()) {
        *z *= (-v * d_tau).exp();
    }
    Ok(out)
}

pub fn trotter_step(psi: &WaveFunction, model: &HamiltonianModel, d_tau: f64) -> Result<WaveFunction> {
    check_grid(psi, model)?;
    let mut out = psi.clone();
    SplitOperator::new(model, d_tau).step(out.amplitudes_mut());
    Ok(out)
}

pub fn energy(psi: &WaveFunction, model: &HamiltonianModel) -> Result<f64> {
    check_grid(psi, model)?;
    Ok(SplitOperator::new(model, 1.0).energy(psi.amplitudes()))
}

/// Imaginary-time evolution until the relative energy change between
/// consecutive checks drops below `energy_tol` or `max_steps` is reached.
pub fn evolve_to_ground_state(
    psi0: &WaveFunction,
    model: &HamiltonianModel,
    params: &PropagatorParams,
) -> Result<(WaveFunction, PropagationReport)> {
    evolve_with_observer(psi0, model, params, |_, _| {})
}

/// As [`evolve_to_ground_state`], calling `observer` with every traced state.
pub fn evolve_with_observer<F>(
    psi0: &WaveFunction,
    model: &HamiltonianModel,
    params: &PropagatorParams,
    mut observer: F,
) -> Result<(WaveFunction, PropagationReport)>
where
    F: FnMut(&TraceEntry, &WaveFunction),
{
    params.validate()?;
    check_grid(psi0, model)?;
    let op = SplitOperator::new(model, params.d_tau);
    let mut psi = psi0.clone();
    psi.normalize()?;

    let e0 = op.energy(psi.amplitudes());
    if !e0.is_finite() {
        return Err(Error::NonFinite {
            step: 0,
            detail: format!("initial energy {e0}"),
        });
    }
    let first = TraceEntry {
        step: 0,
        energy: e0,
        norm: 1.0,
        state_norm: psi.norm(),
    };
    observer(&first, &psi);
    let mut trace = vec![first];
    let mut steps = 0;
    let mut converged = false;
    let mut previous = e0;

    while steps < params.max_steps {
        let chunk = params.check_every.min(params.max_steps - steps);
        let norm = op.run(psi.amplitudes_mut(), chunk, params.renormalize_every)?;
        steps += chunk;
        let e = op.energy(psi.amplitudes());
        if !e.is_finite() {
            return Err(Error::NonFinite {
                step: steps,
                detail: format!("energy {e}; d_tau {} may be too large for the potential", params.d_tau),
            });
        }
        let entry = TraceEntry {
            step: steps,
            energy: e,
            norm,
            state_norm: psi.norm(),
        };
        observer(&entry, &psi);
        trace.push(entry);
        if (e - previous).abs() / e.abs().max(1.0) < params.energy_tol {
            converged = true;
            break;
        }
        previous = e;
    }

    let report = PropagationReport {
        steps_taken: steps,
        final_energy: trace.last().map(|t| t.energy).unwrap_or(e0),
        energy_trace: trace,
        converged,
        d_tau: params.d_tau,
    };
    Ok((psi, report))
}
