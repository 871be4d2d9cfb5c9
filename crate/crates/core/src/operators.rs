//! Hamiltonian models: a diagonal real-space potential plus per-axis kinetic
//! coefficients `1/(2m)` (atomic units, ħ = 1).

use crate::error::{Error, Result};
use crate::grid::GridSpec;

/// Default cap on grid elements accepted by [`build_full_cartesian`].
pub const DEFAULT_ELEMENT_CAP: usize = 1 << 26;

/// Proton mass in electron masses used by the reference runs.
pub const REFERENCE_PROTON_MASS: f64 = 1863.15;
/// Physical proton-to-electron mass ratio, available through config.
pub const PHYSICAL_PROTON_MASS: f64 = 1836.15;

#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianModel {
    grid: GridSpec,
    potential: Vec<f64>,
    inv_mass: Vec<f64>,
}

impl HamiltonianModel {
    /// `inv_mass[i]` is the kinetic coefficient `1/(2 m_i)` for axis `i`.
    pub fn new(grid: GridSpec, potential: Vec<f64>, inv_mass: Vec<f64>) -> Result<Self> {
        if potential.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "potential has {} values for {} grid elements",
                potential.len(),
                grid.len()
            )));
        }
        if inv_mass.len() != grid.ndim() {
            return Err(Error::InvalidArgument(format!(
                "{} kinetic coefficients for {} axes",
                inv_mass.len(),
                grid.ndim()
            )));
        }
        if let Some(c) = inv_mass.iter().find(|c| !(**c > 0.0 && c.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "kinetic coefficient must be positive, got {c}"
            )));
        }
        if potential.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("potential is not finite everywhere".into()));
        }
        Ok(Self {
            grid,
            potential,
            inv_mass,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    pub fn inv_mass(&self) -> &[f64] {
        &self.inv_mass
    }

    /// Kinetic energy `Σ_a c_a k_a²` of every plane wave, in DFT flat order.
    pub fn kinetic_spectrum(&self) -> Vec<f64> {
        let per_axis: Vec<Vec<f64>> = self
            .grid
            .axes()
            .iter()
            .zip(&self.inv_mass)
            .map(|(a, &c)| a.wavenumbers().into_iter().map(|k| c * k * k).collect())
            .collect();
        let mut out = vec![0.0; self.grid.len()];
        let mut idx = vec![0; self.grid.ndim()];
        for (f, t) in out.iter_mut().enumerate() {
            self.grid.unflatten(f, &mut idx);
            *t = idx.iter().zip(&per_axis).map(|(&i, ax)| ax[i]).sum();
        }
        out
    }
}

/// Masses (electron-mass units) of the two nuclei and the electron.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticleMasses {
    pub m1: f64,
    pub m2: f64,
    pub m_e: f64,
}

impl ParticleMasses {
    pub fn new(m1: f64, m2: f64, m_e: f64) -> Result<Self> {
        for (name, m) in [("m1", m1), ("m2", m2), ("m_e", m_e)] {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "mass {name} must be positive, got {m}"
                )));
            }
        }
        Ok(Self { m1, m2, m_e })
    }

    /// Homonuclear ion with nuclear mass `m` and a unit-mass electron.
    pub fn homonuclear(m: f64) -> Result<Self> {
        Self::new(m, m, 1.0)
    }

    pub fn nuclear_total(&self) -> f64 {
        self.m1 + self.m2
    }

    /// Reduced mass of the internuclear vector.
    pub fn mu_nuclear(&self) -> f64 {
        1.0 / (1.0 / self.m1 + 1.0 / self.m2)
    }

    /// Reduced mass of the electron relative to the nuclear centre of mass.
    pub fn mu_electron(&self) -> f64 {
        1.0 / (1.0 / self.m_e + 1.0 / self.nuclear_total())
    }
}

/// `q / d` with its magnitude clamped at `|q| · cap`. Zero distance returns
/// the clamped value with the sign of `q`.
#[inline]
pub fn softened_coulomb(q_product: f64, distance: f64, cap: f64) -> f64 {
    if distance * cap <= 1.0 {
        q_product * cap
    } else {
        q_product / distance
    }
}

/// `1/sqrt(dx² + dy²)` from the steps of axes `ax` and `ay`.
pub fn auto_cap(grid: &GridSpec, ax: usize, ay: usize) -> f64 {
    let dx = grid.axis(ax).step;
    let dy = grid.axis(ay).step;
    1.0 / (dx * dx + dy * dy).sqrt()
}

fn check_cap(cap: f64) -> Result<()> {
    if cap > 0.0 && cap.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "softening cap must be positive, got {cap}"
        )))
    }
}

#[inline]
fn hypot2(x: f64, y: f64) -> f64 {
    (x * x + y * y).sqrt()
}

/// Potential of the reduced two-nuclei-one-electron system at internuclear
/// vector `r` and electron position `rc` relative to the nuclear centre of mass.
pub fn h2plus_reduced_potential(r: [f64; 2], rc: [f64; 2], masses: &ParticleMasses, cap: f64) -> f64 {
    let mn = masses.nuclear_total();
    let w2 = masses.m2 / mn;
    let w1 = masses.m1 / mn;
    softened_coulomb(1.0, hypot2(r[0], r[1]), cap)
        + softened_coulomb(-1.0, hypot2(rc[0] + w2 * r[0], rc[1] + w2 * r[1]), cap)
        + softened_coulomb(-1.0, hypot2(rc[0] - w1 * r[0], rc[1] - w1 * r[1]), cap)
}

/// Reduced-coordinate model on axes `(R_x, R_y, r_cx, r_cy)`.
pub fn build_h2plus_reduced(
    grid: &GridSpec,
    masses: &ParticleMasses,
    cap: f64,
) -> Result<HamiltonianModel> {
    if grid.ndim() != 4 {
        return Err(Error::InvalidArgument(format!(
            "reduced model needs 4 axes (R_x, R_y, r_cx, r_cy), got {}",
            grid.ndim()
        )));
    }
    check_cap(cap)?;
    let potential =
        grid.map_points(|x| h2plus_reduced_potential([x[0], x[1]], [x[2], x[3]], masses, cap));
    let cr = 0.5 / masses.mu_nuclear();
    let ce = 0.5 / masses.mu_electron();
    HamiltonianModel::new(grid.clone(), potential, vec![cr, cr, ce, ce])
}

/// Electron in the field of two fixed unit charges at `(±r_sep/2, 0)`. The
/// constant internuclear repulsion is left out of the tensor.
pub fn build_point_charge_electronic(
    grid: &GridSpec,
    r_sep: f64,
    cap: f64,
) -> Result<HamiltonianModel> {
    if grid.ndim() != 2 {
        return Err(Error::InvalidArgument(format!(
            "point-charge model needs 2 axes, got {}",
            grid.ndim()
        )));
    }
    if !(r_sep >= 0.0 && r_sep.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "separation must be non-negative, got {r_sep}"
        )));
    }
    check_cap(cap)?;
    let h = 0.5 * r_sep;
    let potential = grid.map_points(|x| {
        softened_coulomb(-1.0, hypot2(x[0] + h, x[1]), cap)
            + softened_coulomb(-1.0, hypot2(x[0] - h, x[1]), cap)
    });
    HamiltonianModel::new(grid.clone(), potential, vec![0.5, 0.5])
}

/// Isotropic harmonic well `½ m ω² Σ x²` on any number of axes.
pub fn build_harmonic(grid: &GridSpec, mass: f64, omega: f64) -> Result<HamiltonianModel> {
    if !(mass > 0.0 && omega > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "harmonic model needs positive mass and frequency, got m={mass}, ω={omega}"
        )));
    }
    let k = 0.5 * mass * omega * omega;
    let potential = grid.map_points(|x| k * x.iter().map(|v| v * v).sum::<f64>());
    HamiltonianModel::new(grid.clone(), potential, vec![0.5 / mass; grid.ndim()])
}

/// A nucleus of the all-particle Cartesian model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nucleus {
    pub mass: f64,
    pub charge: f64,
}

/// Nuclei and electrons in the plane, each particle owning two consecutive
/// axes: all nuclei first, then the electrons.
#[derive(Debug, Clone, PartialEq)]
pub struct CartesianSystem {
    pub nuclei: Vec<Nucleus>,
    pub n_electrons: usize,
    pub electron_mass: f64,
    /// Electron charge magnitude (positive); attraction carries the explicit minus sign.
    pub electron_charge: f64,
}

impl CartesianSystem {
    pub fn new(nuclei: Vec<Nucleus>, n_electrons: usize) -> Self {
        Self {
            nuclei,
            n_electrons,
            electron_mass: 1.0,
            electron_charge: 1.0,
        }
    }

    pub fn n_particles(&self) -> usize {
        self.nuclei.len() + self.n_electrons
    }

    pub fn n_axes(&self) -> usize {
        2 * self.n_particles()
    }

    /// All pairwise softened Coulomb terms at flattened particle coordinates
    /// `[x_0, y_0, x_1, y_1, ...]`.
    pub fn potential_at(&self, coords: &[f64], cap: f64) -> f64 {
        let nn = self.nuclei.len();
        let pos = |p: usize| [coords[2 * p], coords[2 * p + 1]];
        let dist = |a: [f64; 2], b: [f64; 2]| hypot2(a[0] - b[0], a[1] - b[1]);
        let qe = self.electron_charge;
        let mut v = 0.0;
        for i in 0..nn {
            for j in i + 1..nn {
                let q = self.nuclei[i].charge * self.nuclei[j].charge;
                v += softened_coulomb(q, dist(pos(i), pos(j)), cap);
            }
        }
        for i in 0..self.n_electrons {
            for j in i + 1..self.n_electrons {
                v += softened_coulomb(qe * qe, dist(pos(nn + i), pos(nn + j)), cap);
            }
        }
        for (i, nuc) in self.nuclei.iter().enumerate() {
            for j in 0..self.n_electrons {
                v += softened_coulomb(-qe * nuc.charge, dist(pos(i), pos(nn + j)), cap);
            }
        }
        v
    }
}

/// All-particle Cartesian model. Refuses grids above `element_cap` elements.
pub fn build_full_cartesian(
    system: &CartesianSystem,
    grid: &GridSpec,
    cap: f64,
    element_cap: usize,
) -> Result<HamiltonianModel> {
    if grid.ndim() != system.n_axes() {
        return Err(Error::InvalidArgument(format!(
            "{} particles need {} axes, grid has {}",
            system.n_particles(),
            system.n_axes(),
            grid.ndim()
        )));
    }
    if grid.len() > element_cap {
        return Err(Error::TooManyElements {
            elements: grid.len(),
            cap: element_cap,
        });
    }
    check_cap(cap)?;
    for n in &system.nuclei {
        if !(n.mass > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "nuclear mass must be positive, got {}",
                n.mass
            )));
        }
    }
    if !(system.electron_mass > 0.0) {
        return Err(Error::InvalidArgument("electron mass must be positive".into()));
    }
    let potential = grid.map_points(|x| system.potential_at(x, cap));
    let mut inv_mass = Vec::with_capacity(grid.ndim());
    for n in &system.nuclei {
        inv_mass.extend([0.5 / n.mass; 2]);
    }
    for _ in 0..system.n_electrons {
        inv_mass.extend([0.5 / system.electron_mass; 2]);
    }
    HamiltonianModel::new(grid.clone(), potential, inv_mass)
}
