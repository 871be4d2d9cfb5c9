//! Batch pipelines behind the command-line front-end.
//!
//! Text artifacts carry the run header as `#` comment lines. Binary dumps keep
//! the fixed `WPK1` layout and get a `.meta` text sidecar with the same header.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::analysis::{chain_csv, chain_scaling, log_log_slope, pes_scan, separation_range};
use crate::config::{Command, ModelSpec, RunConfig};
use crate::error::{Error, Result};
use crate::observables::{bond_length_stats, conditional_slice, nuclear_marginal, BondStats, Slice};
use crate::operators::{build_h2plus_reduced, build_harmonic, build_point_charge_electronic, HamiltonianModel};
use crate::propagator::{evolve_to_ground_state, PropagationReport};
use crate::sampler::{run_stats, sample, PRNG_ID};
use crate::state::{write_real_dump, WaveFunction};
use crate::validation;

/// What a pipeline produced.
#[derive(Debug, Clone, Default)]
pub struct RunSummary {
    pub artifacts: Vec<PathBuf>,
    /// Human-readable `key = value` lines, also printed by the CLI.
    pub lines: Vec<String>,
    /// False when a `validate` check failed.
    pub passed: bool,
}

struct Writer<'a> {
    cfg: &'a RunConfig,
    header: Vec<String>,
    summary: RunSummary,
}

impl<'a> Writer<'a> {
    fn new(cfg: &'a RunConfig) -> Result<Self> {
        fs::create_dir_all(&cfg.output.directory)?;
        Ok(Self {
            cfg,
            header: cfg.header_lines(),
            summary: RunSummary {
                passed: true,
                ..Default::default()
            },
        })
    }

    fn path(&self, name: &str) -> PathBuf {
        self.cfg.output.directory.join(name)
    }

    fn text(&mut self, name: &str, body: &str) -> Result<()> {
        let path = self.path(name);
        fs::write(&path, body)?;
        self.summary.artifacts.push(path);
        Ok(())
    }

    fn commented(&self) -> String {
        self.header.iter().map(|h| format!("# {h}\n")).collect()
    }

    fn stats(&mut self, name: &str, lines: &[String]) -> Result<()> {
        let mut body = self.commented();
        for l in lines {
            body.push_str(l);
            body.push('\n');
        }
        self.summary.lines.extend(lines.iter().cloned());
        self.text(name, &body)
    }

    fn binary<F>(&mut self, name: &str, write: F) -> Result<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> Result<()>,
    {
        let path = self.path(name);
        let mut w = BufWriter::new(File::create(&path)?);
        write(&mut w)?;
        w.flush()?;
        let meta = self.path(&format!("{name}.meta"));
        fs::write(&meta, self.commented())?;
        self.summary.artifacts.push(path);
        self.summary.artifacts.push(meta);
        Ok(())
    }
}

/// Builds the model described by the configuration.
pub fn build_model(cfg: &RunConfig) -> Result<HamiltonianModel> {
    let grid = cfg
        .grid
        .as_ref()
        .ok_or_else(|| Error::Config(vec!["missing `[grid]` section".into()]))?;
    match cfg.model.as_ref() {
        Some(ModelSpec::H2plusReduced { masses, cap }) => build_h2plus_reduced(grid, masses, *cap),
        Some(ModelSpec::PointCharge { separation, cap }) => build_point_charge_electronic(grid, *separation, *cap),
        Some(ModelSpec::Harmonic { mass, omega }) => build_harmonic(grid, *mass, *omega),
        None => Err(Error::Config(vec!["missing `[model]` section".into()])),
    }
}

/// Runs the configured command and writes its artifacts.
pub fn run(cfg: &RunConfig) -> Result<RunSummary> {
    let mut w = Writer::new(cfg)?;
    match cfg.command {
        Command::Optimize => {
            optimize(&mut w)?;
        }
        Command::Sample => sample_command(&mut w)?,
        Command::Scan => scan(&mut w)?,
        Command::Chain => chain(&mut w)?,
        Command::Validate => validate(&mut w)?,
    }
    Ok(w.summary)
}

fn bond_lines(prefix: &str, s: &BondStats) -> Vec<String> {
    vec![
        format!("{prefix}mean = {:.6}", s.mean),
        format!("{prefix}std = {:.6}", s.std),
        format!("{prefix}mode = {:.6}", s.mode),
    ]
}

fn slice_csv(slice: &Slice, header: &str) -> String {
    let mut s = String::from(header);
    s.push_str(&format!("# slice_sum = {:.17e}\n", slice.sum));
    let labels = slice.grid.labels().join(",");
    s.push_str(&format!("{labels},value\n"));
    let mut x = vec![0.0; slice.grid.ndim()];
    for (f, v) in slice.values.iter().enumerate() {
        slice.grid.point(f, &mut x);
        for c in &x {
            s.push_str(&format!("{c:.6},"));
        }
        s.push_str(&format!("{v:.17e}\n"));
    }
    s
}

fn optimize(w: &mut Writer<'_>) -> Result<(WaveFunction, PropagationReport)> {
    let cfg = w.cfg;
    let model = build_model(cfg)?;
    let psi0 = WaveFunction::gaussian(model.grid().clone(), cfg.alpha)?;
    let (psi, report) = evolve_to_ground_state(&psi0, &model, &cfg.propagator)?;

    if cfg.output.csv {
        let body = report.to_csv(&w.header);
        w.text("energy_trace.csv", &body)?;
    }
    if cfg.output.binary {
        w.binary("wavefunction.wpk", |f| psi.write_dump(f))?;
    }
    let mut lines = vec![
        format!("energy = {:.12}", report.final_energy),
        format!("steps = {}", report.steps_taken),
        format!("converged = {}", report.converged),
        format!("max_energy_increase = {:.3e}", report.max_energy_increase()),
    ];
    if matches!(cfg.model, Some(ModelSpec::H2plusReduced { .. })) {
        let marginal = nuclear_marginal(&psi)?;
        let stats = bond_length_stats(&marginal);
        lines.extend(bond_lines("", &stats));
        let [ex, ey] = cfg.output.slice_electron;
        let slice = conditional_slice(&psi, &[(2, ex), (3, ey)])?;
        if cfg.output.csv {
            let body = marginal.to_csv(&w.header);
            w.text("marginal.csv", &body)?;
            let body = slice_csv(&slice, &w.commented());
            w.text("slice.csv", &body)?;
        }
        if cfg.output.binary {
            w.binary("marginal.wpk", |f| write_real_dump(f, &marginal.grid, &marginal.p))?;
            w.binary("slice.wpk", |f| write_real_dump(f, &slice.grid, &slice.values))?;
        }
    }
    w.stats("bond_stats.txt", &lines)?;
    Ok((psi, report))
}

fn sample_command(w: &mut Writer<'_>) -> Result<()> {
    let cfg = w.cfg;
    let psi = match &cfg.sampling.input {
        Some(path) => read_dump(path)?,
        None => optimize(w)?.0,
    };
    let marginal = nuclear_marginal(&psi)?;
    let exact = bond_length_stats(&marginal);
    let run = sample(&marginal, cfg.sampling.n_obs, cfg.sampling.seed);
    if cfg.output.csv {
        let body = run.to_csv(&w.header);
        w.text("samples.csv", &body)?;
    }
    let sampled = run_stats(&run).expect("at least one observation");
    let mut lines = vec![
        format!("n_obs = {}", run.records.len()),
        format!("seed = {}", run.seed),
        format!("prng_id = {PRNG_ID}"),
    ];
    lines.extend(bond_lines("sample_", &sampled));
    lines.extend(bond_lines("exact_", &exact));
    w.stats("sample_stats.txt", &lines)
}

fn read_dump(path: &Path) -> Result<WaveFunction> {
    let psi = WaveFunction::read_dump(BufReader::new(File::open(path)?))?;
    if psi.grid().ndim() != 4 {
        return Err(Error::InvalidArgument(format!(
            "{} holds a {}-axis state; sampling needs the 4-axis reduced model",
            path.display(),
            psi.grid().ndim()
        )));
    }
    // restore the reduced-model labels, which the dump does not carry
    let grid = crate::grid::GridSpec::with_labels(
        psi.grid().axes().to_vec(),
        ["R_x", "R_y", "r_cx", "r_cy"].map(String::from).to_vec(),
    )?;
    WaveFunction::from_amplitudes(grid, psi.into_amplitudes())
}

fn scan(w: &mut Writer<'_>) -> Result<()> {
    let cfg = w.cfg;
    let grid = cfg.grid.as_ref().expect("validated");
    let spec = cfg.scan.expect("validated");
    let cap = match cfg.resolved.model.as_ref().and_then(|m| m.cap.as_ref()) {
        Some(toml::Value::Float(c)) => *c,
        _ => crate::operators::auto_cap(grid, 0, 1),
    };
    let seps = separation_range(spec.r_min, spec.r_max, spec.r_step);
    let result = pes_scan(grid, &seps, cap, &cfg.propagator)?;
    if cfg.output.csv {
        let mut header = w.header.clone();
        if let Some((r, msg)) = &result.failure {
            header.push(format!("failure at R = {r}: {msg}"));
        }
        let body = result.to_csv(&header);
        w.text("pes.csv", &body)?;
    }
    let mut lines = vec![format!("points = {}", result.points.len())];
    if let Some(eq) = result.equilibrium {
        lines.push(format!("equilibrium = {eq:.4}"));
    }
    if let Some((r, msg)) = &result.failure {
        lines.push(format!("failure = R {r}: {msg}"));
        w.stats("pes_stats.txt", &lines)?;
        return Err(Error::NonFinite {
            step: 0,
            detail: format!("scan aborted at R = {r}: {msg}"),
        });
    }
    w.stats("pes_stats.txt", &lines)
}

fn chain(w: &mut Writer<'_>) -> Result<()> {
    let spec = w.cfg.chain.clone().expect("validated");
    let rows = chain_scaling(&spec.lengths, spec.mass, spec.spring_k)?;
    let body = chain_csv(&rows, &w.header);
    w.text("chain.csv", &body)?;
    let xs: Vec<f64> = rows.iter().map(|r| r.n_masses as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.sigma_exact).collect();
    let max_rel = rows
        .iter()
        .map(|r| (r.sigma_approx - r.sigma_exact).abs() / r.sigma_exact)
        .fold(0.0, f64::max);
    let mut lines = vec![format!("rows = {}", rows.len())];
    if rows.len() >= 2 {
        lines.push(format!("log_log_slope = {:.6}", log_log_slope(&xs, &ys)));
    }
    lines.push(format!("max_relative_approx_error = {max_rel:.3e}"));
    w.stats("chain_stats.txt", &lines)
}

fn validate(w: &mut Writer<'_>) -> Result<()> {
    let checks = validation::run_suite()?;
    let mut lines = Vec::new();
    for c in &checks {
        lines.push(c.line());
        if !c.passed {
            w.summary.passed = false;
        }
    }
    lines.push(format!(
        "passed = {}/{}",
        checks.iter().filter(|c| c.passed).count(),
        checks.len()
    ));
    w.stats("validation.txt", &lines)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{parse, RunConfig};

    fn run_text(text: &str, command: Command) -> (tempfile::TempDir, RunSummary) {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = RunConfig::from_raw(parse(text).unwrap(), Some(command)).unwrap();
        cfg.set_output_dir(dir.path().to_path_buf());
        let s = run(&cfg).unwrap();
        (dir, s)
    }

    #[test]
    fn harmonic_optimize_writes_artifacts_with_headers() {
        let text = r#"
            [model]
            kind = "harmonic"
            [grid]
            n_points = 64
            step = 0.15
            [propagator]
            d_tau = 0.01
            energy_tol = 1e-12
        "#;
        let (dir, s) = run_text(text, Command::Optimize);
        for name in ["energy_trace.csv", "wavefunction.wpk", "wavefunction.wpk.meta", "bond_stats.txt"] {
            assert!(dir.path().join(name).exists(), "{name}");
        }
        let trace = fs::read_to_string(dir.path().join("energy_trace.csv")).unwrap();
        assert!(trace.starts_with("# version = qdopt"));
        assert!(trace.contains("step,energy,norm"));
        let e: f64 = s.lines.iter().find_map(|l| l.strip_prefix("energy = ")).unwrap().parse().unwrap();
        assert!((e - 0.5).abs() < 1e-6, "{e}");
    }

    #[test]
    fn chain_command_reports_slope() {
        let (dir, s) = run_text("[chain]\nlengths = [100, 1000, 10000]\n", Command::Chain);
        let csv = fs::read_to_string(dir.path().join("chain.csv")).unwrap();
        assert!(csv.contains("# seed = "));
        let slope: f64 = s
            .lines
            .iter()
            .find_map(|l| l.strip_prefix("log_log_slope = "))
            .unwrap()
            .parse()
            .unwrap();
        assert!((slope - 0.5).abs() < 0.02);
    }

    #[test]
    fn sampling_needs_a_reduced_state() {
        let dir = tempfile::tempdir().unwrap();
        let grid = crate::grid::GridSpec::new(vec![crate::grid::AxisSpec::reference(); 2]).unwrap();
        let psi = WaveFunction::gaussian(grid, 0.5).unwrap();
        let path = dir.path().join("two_axis.wpk");
        psi.write_dump(File::create(&path).unwrap()).unwrap();
        let err = read_dump(&path).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }
}
