//! Simulated projective measurements of the internuclear vector.
//!
//! Draws use inverse-CDF sampling over the marginal flattened row-major in
//! `(R_x, R_y)`, one uniform variate per draw from a seeded ChaCha20 stream.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::observables::{BondStats, MarginalDensity};

/// Identifier recorded with every sampling run.
pub const PRNG_ID: &str = "chacha20 (rand_chacha 0.3, seed_from_u64)";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservationRecord {
    /// 1-based observation number.
    pub index: usize,
    pub r: [f64; 2],
    pub bond_length: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplingRun {
    pub seed: u64,
    pub prng_id: String,
    pub records: Vec<ObservationRecord>,
    /// `running_mean[i]` is the mean bond length of the first `i + 1` records.
    pub running_mean: Vec<f64>,
}

/// Cumulative distribution over grid points for repeated draws.
#[derive(Debug, Clone)]
pub struct InverseCdf {
    cdf: Vec<f64>,
}

impl InverseCdf {
    pub fn new(weights: &[f64]) -> Self {
        let mut acc = 0.0;
        let cdf = weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Self { cdf }
    }

    /// First index whose cumulative weight reaches `u · total`, for `u ∈ (0, 1]`.
    /// Zero-weight points are never returned.
    pub fn index(&self, u: f64) -> usize {
        let total = *self.cdf.last().expect("empty distribution");
        let target = u * total;
        self.cdf
            .partition_point(|&c| c < target)
            .min(self.cdf.len() - 1)
    }
}

pub fn sample(marginal: &MarginalDensity, n_obs: usize, seed: u64) -> SamplingRun {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let cdf = InverseCdf::new(&marginal.weights());
    let lengths = marginal.bond_lengths();
    let mut records = Vec::with_capacity(n_obs);
    let mut running_mean = Vec::with_capacity(n_obs);
    let mut sum = 0.0;
    let mut r = [0.0; 2];
    for i in 1..=n_obs {
        // gen::<f64>() is in [0, 1); flip to (0, 1]
        let u = 1.0 - rng.gen::<f64>();
        let j = cdf.index(u);
        marginal.grid.point(j, &mut r);
        let bond_length = lengths[j];
        sum += bond_length;
        records.push(ObservationRecord {
            index: i,
            r,
            bond_length,
        });
        running_mean.push(sum / i as f64);
    }
    SamplingRun {
        seed,
        prng_id: PRNG_ID.to_string(),
        records,
        running_mean,
    }
}

/// Sample mean, population standard deviation (divide by N) and the most
/// frequent bond length (ties to the smaller value). `None` for an empty run.
pub fn run_stats(run: &SamplingRun) -> Option<BondStats> {
    let n = run.records.len();
    if n == 0 {
        return None;
    }
    let values: Vec<f64> = run.records.iter().map(|r| r.bond_length).collect();
    let mean = values.iter().sum::<f64>() / n as f64;
    let std = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();

    let mut sorted = values;
    sorted.sort_by(f64::total_cmp);
    let (mut mode, mut best) = (sorted[0], 0usize);
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && (sorted[j] - sorted[i]).abs() <= 1e-12 * sorted[i].abs().max(1.0) {
            j += 1;
        }
        if j - i > best {
            best = j - i;
            mode = sorted[i];
        }
        i = j;
    }
    Some(BondStats { mean, std, mode })
}

impl SamplingRun {
    pub fn to_csv(&self, header: &[String]) -> String {
        let mut s = String::new();
        for h in header {
            s.push_str(&format!("# {h}\n"));
        }
        s.push_str(&format!("# seed = {}\n# prng_id = {}\n", self.seed, self.prng_id));
        s.push_str("index,R_x,R_y,bond_length,running_mean\n");
        for (rec, m) in self.records.iter().zip(&self.running_mean) {
            s.push_str(&format!(
                "{},{:.6},{:.6},{:.17e},{:.17e}\n",
                rec.index, rec.r[0], rec.r[1], rec.bond_length, m
            ));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{AxisSpec, GridSpec};

    fn grid4() -> GridSpec {
        GridSpec::new(vec![AxisSpec::centered(4, 0.5).unwrap(); 2]).unwrap()
    }

    #[test]
    fn point_mass_marginal() {
        let g = grid4();
        let mut p = vec![0.0; 16];
        let k = g.flat_index(&[1, 3]);
        p[k] = 2.0;
        let m = MarginalDensity::new(g, p).unwrap();
        let run = sample(&m, 50, 9);
        let r0 = (0.25f64.powi(2) + 0.75f64.powi(2)).sqrt();
        for (rec, mean) in run.records.iter().zip(&run.running_mean) {
            assert_eq!(rec.r, [-0.25, 0.75]);
            assert_eq!(rec.bond_length, r0);
            assert!((mean - r0).abs() < 1e-14);
        }
        let s = run_stats(&run).unwrap();
        assert_eq!(s.mode, r0);
        assert!(s.std < 1e-14);
    }

    #[test]
    fn two_point_frequencies() {
        let g = grid4();
        let mut p = vec![0.0; 16];
        let a = g.flat_index(&[0, 0]);
        let b = g.flat_index(&[2, 1]);
        p[a] = 1.0;
        p[b] = 1.0;
        let m = MarginalDensity::new(g, p).unwrap();
        let n = 20_000;
        let run = sample(&m, n, 1234);
        let hits = run.records.iter().filter(|r| r.r == [-0.75, -0.75]).count();
        let other = run.records.iter().filter(|r| r.r == [0.25, -0.25]).count();
        assert_eq!(hits + other, n);
        let freq = hits as f64 / n as f64;
        assert!((freq - 0.5).abs() < 4.0 / (n as f64).sqrt());
    }

    #[test]
    fn deterministic_per_seed() {
        let g = grid4();
        let p: Vec<f64> = (0..16).map(|i| 1.0 + i as f64).collect();
        let m = MarginalDensity::new(g, p).unwrap();
        assert_eq!(sample(&m, 100, 5), sample(&m, 100, 5));
        assert_ne!(sample(&m, 100, 5).records, sample(&m, 100, 6).records);
    }

    #[test]
    fn running_mean_is_prefix_mean() {
        let g = grid4();
        let p: Vec<f64> = (0..16).map(|i| (i % 5) as f64).collect();
        let m = MarginalDensity::new(g, p).unwrap();
        let run = sample(&m, 300, 77);
        let mut sum = 0.0;
        for (i, rec) in run.records.iter().enumerate() {
            sum += rec.bond_length;
            assert_eq!(run.running_mean[i], sum / (i + 1) as f64);
            assert_eq!(rec.index, i + 1);
        }
    }

    #[test]
    fn inverse_cdf_skips_empty_bins() {
        let cdf = InverseCdf::new(&[0.0, 0.5, 0.0, 0.5]);
        assert_eq!(cdf.index(f64::MIN_POSITIVE), 1);
        assert_eq!(cdf.index(0.5), 1);
        assert_eq!(cdf.index(0.500001), 3);
        assert_eq!(cdf.index(1.0), 3);
    }

    #[test]
    fn single_record_stats() {
        let run = SamplingRun {
            seed: 0,
            prng_id: PRNG_ID.into(),
            records: vec![ObservationRecord { index: 1, r: [0.3, 0.4], bond_length: 0.5 }],
            running_mean: vec![0.5],
        };
        assert_eq!(run_stats(&run), Some(BondStats { mean: 0.5, std: 0.0, mode: 0.5 }));
        let empty = SamplingRun { records: vec![], running_mean: vec![], ..run };
        assert_eq!(run_stats(&empty), None);
    }

    #[test]
    fn mode_prefers_smaller_value_on_ties() {
        let recs = [0.4, 0.3, 0.4, 0.3, 0.9]
            .iter()
            .enumerate()
            .map(|(i, &b)| ObservationRecord { index: i + 1, r: [b, 0.0], bond_length: b })
            .collect();
        let run = SamplingRun { seed: 0, prng_id: PRNG_ID.into(), records: recs, running_mean: vec![0.0; 5] };
        assert_eq!(run_stats(&run).unwrap().mode, 0.3);
    }
}
