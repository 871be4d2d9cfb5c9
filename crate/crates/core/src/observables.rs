//! Densities, marginals and bond-length statistics of reduced-model states.

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::state::WaveFunction;

/// Relative tolerance under which two probabilities count as tied for the mode.
const MODE_TIE_RTOL: f64 = 1e-12;

/// Raw `|ψ|²` over the free axes with the remaining axes pinned.
#[derive(Debug, Clone, PartialEq)]
pub struct Slice {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    /// `Σ values`; divide by `sum · dV` to get a normalized conditional density.
    pub sum: f64,
}

/// Pins each `(axis, coordinate)` pair to a grid point and returns `|ψ|²`
/// over the other axes. The slice is not renormalized.
pub fn conditional_slice(psi: &WaveFunction, fixed: &[(usize, f64)]) -> Result<Slice> {
    let grid = psi.grid();
    let mut pinned: Vec<Option<usize>> = vec![None; grid.ndim()];
    for &(axis, value) in fixed {
        if axis >= grid.ndim() {
            return Err(Error::InvalidArgument(format!(
                "axis {axis} out of range for a {}-axis grid",
                grid.ndim()
            )));
        }
        let a = grid.axis(axis);
        let j = a.index_of(value).ok_or_else(|| Error::OffGrid {
            axis,
            value,
            nearest: a.nearest(value),
        })?;
        pinned[axis] = Some(j);
    }
    let free: Vec<usize> = (0..grid.ndim()).filter(|&i| pinned[i].is_none()).collect();
    if free.is_empty() {
        return Err(Error::InvalidArgument("every axis is pinned".into()));
    }
    let sub = grid.sub_grid(&free)?;
    let amps = psi.amplitudes();
    let mut full_idx: Vec<usize> = pinned.iter().map(|p| p.unwrap_or(0)).collect();
    let mut sub_idx = vec![0; free.len()];
    let values: Vec<f64> = (0..sub.len())
        .map(|f| {
            sub.unflatten(f, &mut sub_idx);
            for (&axis, &i) in free.iter().zip(&sub_idx) {
                full_idx[axis] = i;
            }
            amps[grid.flat_index(&full_idx)].norm_sqr()
        })
        .collect();
    let sum = values.iter().sum();
    Ok(Slice { grid: sub, values, sum })
}

/// Electron-integrated density of the internuclear vector `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarginalDensity {
    /// The two nuclear axes.
    pub grid: GridSpec,
    /// `p(R)`, normalized so that `Σ p dV_R = 1`.
    pub p: Vec<f64>,
}

impl MarginalDensity {
    pub fn new(grid: GridSpec, p: Vec<f64>) -> Result<Self> {
        if grid.ndim() != 2 || p.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "marginal needs a 2-axis grid matching {} values",
                p.len()
            )));
        }
        if p.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidArgument("marginal density must be finite and non-negative".into()));
        }
        let total: f64 = p.iter().sum::<f64>() * grid.volume_element();
        if !(total > 0.0) {
            return Err(Error::ZeroNorm { norm: total });
        }
        let p = p.into_iter().map(|v| v / total).collect();
        Ok(Self { grid, p })
    }

    /// `|R|` at each grid point, in flat order.
    pub fn bond_lengths(&self) -> Vec<f64> {
        self.grid.map_points(|x| (x[0] * x[0] + x[1] * x[1]).sqrt())
    }

    /// Probability mass `p · dV` of each grid point.
    pub fn weights(&self) -> Vec<f64> {
        let dv = self.grid.volume_element();
        self.p.iter().map(|v| v * dv).collect()
    }

    pub fn to_csv(&self, header: &[String]) -> String {
        let mut s = String::new();
        for h in header {
            s.push_str(&format!("# {h}\n"));
        }
        s.push_str("R_x,R_y,p\n");
        let mut x = [0.0; 2];
        for (f, v) in self.p.iter().enumerate() {
            self.grid.point(f, &mut x);
            s.push_str(&format!("{:.6},{:.6},{:.17e}\n", x[0], x[1], v));
        }
        s
    }
}

/// Sums `|ψ|² dV(r_c)` over the last two axes of a four-axis state.
pub fn nuclear_marginal(psi: &WaveFunction) -> Result<MarginalDensity> {
    let grid = psi.grid();
    if grid.ndim() != 4 {
        return Err(Error::InvalidArgument(format!(
            "nuclear marginal needs a 4-axis reduced state, got {} axes",
            grid.ndim()
        )));
    }
    let nuclear = grid.sub_grid(&[0, 1])?;
    let inner = grid.axis(2).n_points * grid.axis(3).n_points;
    let dv_e = grid.axis(2).step * grid.axis(3).step;
    let p = psi
        .amplitudes()
        .chunks_exact(inner)
        .map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>() * dv_e)
        .collect();
    MarginalDensity::new(nuclear, p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BondStats {
    pub mean: f64,
    pub std: f64,
    pub mode: f64,
}

/// Exact mean, standard deviation and mode of `|R|` under the marginal.
/// The mode is the `|R|` of the most probable grid point; ties go to the
/// smaller `|R|`, then to the lower flat index.
pub fn bond_length_stats(marginal: &MarginalDensity) -> BondStats {
    let lengths = marginal.bond_lengths();
    let w = marginal.weights();
    let mean: f64 = lengths.iter().zip(&w).map(|(r, w)| r * w).sum();
    let var: f64 = lengths.iter().zip(&w).map(|(r, w)| (r - mean).powi(2) * w).sum();
    let std = var.sqrt();

    let pmax = marginal.p.iter().cloned().fold(f64::MIN, f64::max);
    let mode = marginal
        .p
        .iter()
        .zip(&lengths)
        .filter(|(p, _)| (pmax - **p) <= MODE_TIE_RTOL * pmax)
        .map(|(_, r)| *r)
        .fold(f64::INFINITY, f64::min);
    BondStats { mean, std, mode }
}

/// Distinct `|R|` values realizable on a two-axis grid, sorted ascending and
/// merged within `tol`.
pub fn realizable_bond_lengths(grid: &GridSpec, tol: f64) -> Vec<f64> {
    let mut v = grid.map_points(|x| (x[0] * x[0] + x[1] * x[1]).sqrt());
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= tol);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::AxisSpec;

    fn reduced_grid(n: usize) -> GridSpec {
        GridSpec::reduced_h2plus(AxisSpec::centered(n, 0.075).unwrap())
    }

    fn product_state(grid: &GridSpec) -> WaveFunction {
        WaveFunction::from_fn(grid.clone(), |x| {
            let f = (-((x[0] - 0.1).powi(2) + x[1] * x[1]) / 0.02).exp();
            let g = (-(x[2] * x[2] + (x[3] + 0.05).powi(2)) / 0.05).exp() * (1.0 + x[2]);
            f * g
        })
    }

    #[test]
    fn slice_of_product_state_is_proportional_to_nuclear_factor() {
        let g = reduced_grid(8);
        let psi = product_state(&g);
        let a = conditional_slice(&psi, &[(2, 0.0375), (3, 0.0375)]).unwrap();
        let b = conditional_slice(&psi, &[(2, -0.1875), (3, 0.1125)]).unwrap();
        let ratio = a.values[0] / b.values[0];
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x / y - ratio).abs() < 1e-10 * ratio);
        }
        assert!((a.sum - a.values.iter().sum::<f64>()).abs() < 1e-15);
        assert_eq!(a.grid.labels(), &["R_x".to_string(), "R_y".to_string()]);
    }

    #[test]
    fn slice_rejects_off_grid_coordinate() {
        let g = reduced_grid(8);
        let psi = product_state(&g);
        match conditional_slice(&psi, &[(2, 0.0), (3, 0.0375)]) {
            Err(Error::OffGrid { axis, nearest, .. }) => {
                assert_eq!(axis, 2);
                assert_eq!(nearest.len(), 2);
                assert!((nearest[0] + 0.0375).abs() < 1e-12);
                assert!((nearest[1] - 0.0375).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn marginal_of_product_state() {
        let g = reduced_grid(8);
        let mut psi = product_state(&g);
        psi.normalize().unwrap();
        let m = nuclear_marginal(&psi).unwrap();
        let dv = m.grid.volume_element();
        assert!((m.p.iter().sum::<f64>() * dv - 1.0).abs() < 1e-12);
        // |f|², normalized on the nuclear grid
        let f: Vec<f64> = m
            .grid
            .map_points(|x| (-((x[0] - 0.1).powi(2) + x[1] * x[1]) / 0.02).exp().powi(2));
        let fsum: f64 = f.iter().sum::<f64>() * dv;
        for (p, fv) in m.p.iter().zip(&f) {
            assert!((p - fv / fsum).abs() < 1e-10);
        }
    }

    #[test]
    fn point_mass_stats() {
        let g = GridSpec::new(vec![AxisSpec::centered(4, 0.5).unwrap(); 2]).unwrap();
        let mut p = vec![0.0; 16];
        p[g.flat_index(&[3, 2])] = 1.0;
        let m = MarginalDensity::new(g, p).unwrap();
        let s = bond_length_stats(&m);
        let r0 = (0.75f64.powi(2) + 0.25f64.powi(2)).sqrt();
        assert!((s.mean - r0).abs() < 1e-14);
        assert!(s.std < 1e-12);
        assert_eq!(s.mode, r0);
    }

    #[test]
    fn two_point_mean_and_mode_tie_break() {
        let g = GridSpec::new(vec![AxisSpec::centered(4, 0.5).unwrap(); 2]).unwrap();
        let mut p = vec![0.0; 16];
        let ia = g.flat_index(&[2, 2]); // |R| = 0.25·√2
        let ib = g.flat_index(&[3, 3]); // |R| = 0.75·√2
        p[ia] = 1.0;
        p[ib] = 1.0;
        let m = MarginalDensity::new(g, p).unwrap();
        let s = bond_length_stats(&m);
        let (a, b) = (0.25 * 2f64.sqrt(), 0.75 * 2f64.sqrt());
        assert!((s.mean - (a + b) / 2.0).abs() < 1e-14);
        assert!((s.std - (b - a) / 2.0).abs() < 1e-12);
        assert_eq!(s.mode, a);
    }

    #[test]
    fn marginal_rejects_wrong_shapes() {
        let g = reduced_grid(4);
        let psi = WaveFunction::from_fn(g.sub_grid(&[0, 1, 2]).unwrap(), |_| 1.0);
        assert!(nuclear_marginal(&psi).is_err());
        let g2 = GridSpec::new(vec![AxisSpec::centered(4, 0.5).unwrap(); 2]).unwrap();
        assert!(MarginalDensity::new(g2.clone(), vec![0.0; 16]).is_err());
        assert!(MarginalDensity::new(g2, vec![-1.0; 16]).is_err());
    }

    #[test]
    fn realizable_lengths_are_sorted_and_distinct() {
        let g = GridSpec::new(vec![AxisSpec::centered(4, 1.0).unwrap(); 2]).unwrap();
        let v = realizable_bond_lengths(&g, 1e-9);
        let expect = [0.5f64.hypot(0.5), 0.5f64.hypot(1.5), 1.5f64.hypot(1.5)];
        assert_eq!(v.len(), 3);
        for (a, b) in v.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
