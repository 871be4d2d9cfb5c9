//! Complex wavefunction tensors over a [`GridSpec`].

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{AxisSpec, GridSpec};

pub const DUMP_MAGIC: &[u8; 4] = b"WPK1";

/// Wavefunction amplitudes in row-major axis order.
///
/// Norms use the Riemann measure `Σ |ψ|² dV`, so a normalized state has a
/// probability density that integrates to one in bohr units.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: GridSpec,
    amplitudes: Vec<Complex64>,
}

impl WaveFunction {
    pub fn from_amplitudes(grid: GridSpec, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} amplitudes for a grid of {} elements",
                amplitudes.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, amplitudes })
    }

    pub fn zeros(grid: GridSpec) -> Self {
        let n = grid.len();
        Self {
            grid,
            amplitudes: vec![Complex64::default(); n],
        }
    }

    /// Real-valued state `f(x)` sampled at every grid point (not normalized).
    pub fn from_fn<F>(grid: GridSpec, f: F) -> Self
    where
        F: FnMut(&[f64]) -> f64,
    {
        let amplitudes = grid
            .map_points(f)
            .into_iter()
            .map(|v| Complex64::new(v, 0.0))
            .collect();
        Self { grid, amplitudes }
    }

    /// Normalized isotropic Gaussian `exp(-Σ x_i² / (2 α²))` centred on the origin.
    pub fn gaussian(grid: GridSpec, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "Gaussian width must be positive, got {alpha}"
            )));
        }
        let inv = 1.0 / (2.0 * alpha * alpha);
        let mut psi = Self::from_fn(grid, |x| (-x.iter().map(|v| v * v).sum::<f64>() * inv).exp());
        psi.normalize()?;
        Ok(psi)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// `sqrt(Σ |ψ|² dV)`.
    pub fn norm(&self) -> f64 {
        (self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.volume_element())
            .sqrt()
    }

    /// Scales to unit norm and returns the norm before scaling.
    pub fn normalize(&mut self) -> Result<f64> {
        let norm = self.norm();
        if !(norm > f64::MIN_POSITIVE && norm.is_finite()) {
            return Err(Error::ZeroNorm { norm });
        }
        let s = 1.0 / norm;
        self.scale(s);
        Ok(norm)
    }

    pub fn scale(&mut self, s: f64) {
        self.amplitudes.iter_mut().for_each(|z| *z *= s);
    }

    /// `Σ conj(self) · other · dV`.
    pub fn inner_product(&self, other: &WaveFunction) -> Result<Complex64> {
        if !self.grid.same_axes(&other.grid) {
            return Err(Error::GridMismatch(
                "inner product of states on different grids".into(),
            ));
        }
        let s: Complex64 = self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(s * self.grid.volume_element())
    }

    /// `|⟨self|other⟩|² / (⟨self|self⟩⟨other|other⟩)`.
    pub fn fidelity(&self, other: &WaveFunction) -> Result<f64> {
        let ov = self.inner_product(other)?;
        let na = self.inner_product(self)?.re;
        let nb = other.inner_product(other)?.re;
        Ok(ov.norm_sqr() / (na * nb))
    }

    /// Probability density `|ψ|²` at every grid point.
    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Writes the `WPK1` little-endian dump.
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        write_header(&mut w, &self.grid)?;
        let mut buf = Vec::with_capacity(16 * self.amplitudes.len());
        for z in &self.amplitudes {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    /// Reads a `WPK1` dump. Axis labels are not stored and come back as defaults.
    pub fn read_dump<R: Read>(mut r: R) -> Result<Self> {
        let grid = read_header(&mut r)?;
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() != 16 * grid.len() {
            return Err(Error::Format(format!(
                "expected {} amplitude bytes, found {}",
                16 * grid.len(),
                bytes.len()
            )));
        }
        let amplitudes = bytes
            .chunks_exact(16)
            .map(|c| {
                Complex64::new(
                    f64::from_le_bytes(c[..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..].try_into().unwrap()),
                )
            })
            .collect();
        Self::from_amplitudes(grid, amplitudes)
    }
}

fn write_header<W: Write>(w: &mut W, grid: &GridSpec) -> Result<()> {
    w.write_all(DUMP_MAGIC)?;
    w.write_all(&(grid.ndim() as u32).to_le_bytes())?;
    for a in grid.axes() {
        w.write_all(&(a.n_points as u32).to_le_bytes())?;
        w.write_all(&a.step.to_le_bytes())?;
        w.write_all(&a.offset.to_le_bytes())?;
    }
    Ok(())
}

fn read_header<R: Read>(r: &mut R) -> Result<GridSpec> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| Error::Format("truncated header".into()))?;
    if &magic != DUMP_MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let mut u = [0u8; 4];
    let mut f = [0u8; 8];
    r.read_exact(&mut u)
        .map_err(|_| Error::Format("truncated header".into()))?;
    let n_axes = u32::from_le_bytes(u) as usize;
    if n_axes == 0 || n_axes > 64 {
        return Err(Error::Format(format!("implausible axis count {n_axes}")));
    }
    let mut axes = Vec::with_capacity(n_axes);
    for _ in 0..n_axes {
        r.read_exact(&mut u)
            .map_err(|_| Error::Format("truncated axis record".into()))?;
        let n = u32::from_le_bytes(u) as usize;
        r.read_exact(&mut f)
            .map_err(|_| Error::Format("truncated axis record".into()))?;
        let step = f64::from_le_bytes(f);
        r.read_exact(&mut f)
            .map_err(|_| Error::Format("truncated axis record".into()))?;
        let offset = f64::from_le_bytes(f);
        axes.push(AxisSpec::new(n, step, offset).map_err(|e| Error::Format(e.to_string()))?);
    }
    GridSpec::new(axes).map_err(|e| Error::Format(e.to_string()))
}

/// Writes a real field (for example a density) in the `WPK1` layout with zero
/// imaginary parts.
pub fn write_real_dump<W: Write>(mut w: W, grid: &GridSpec, values: &[f64]) -> Result<()> {
    if values.len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "{} values for a grid of {} elements",
            values.len(),
            grid.len()
        )));
    }
    write_header(&mut w, grid)?;
    let mut buf = Vec::with_capacity(16 * values.len());
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
        buf.extend_from_slice(&0f64.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}
