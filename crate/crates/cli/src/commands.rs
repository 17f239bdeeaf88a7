use std::fs;
use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use bipartite_core::analysis::{
    collapse, eigenbasis_coefficients, entropy, expectation, hermiticity_defect, position_density, reduced_density,
    transition_probabilities, Observable, Side,
};
use bipartite_core::evolution::{evolve_bipartite_grid, evolve_bipartite_spectral};
use bipartite_core::experiments::{
    duality_scan, gap_spectroscopy, make_screen_modes, make_two_slit_modes, particle_coefficients, two_slit_kernel,
    wave_coefficients, TwoSlitFamily,
};
use bipartite_core::field::{kernel_from_coefficients, orthonormality_defect};
use bipartite_core::hamiltonian::{build_hamiltonian, solve_spectrum, DiscreteHamiltonian, PotentialSpec, Spectrum};
use bipartite_core::{CoefficientMatrix, Execution, KernelField, ScalarField, C64};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{ConfigError, InitialState, ModeFamily, RunConfig};
use crate::error::{CliError, Result};
use crate::output::{Cell, Manifest, Table};
use crate::RNG_ALGORITHM;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    /// Lowest eigenpairs of the Hamiltonian.
    Eigs,
    /// Grid evolution of the bipartite equation with invariant tracking.
    Evolve,
    /// Entropy and fringe visibility along the wave–particle family.
    DualityScan,
    /// Energy gaps from stationary-state phases.
    GapScan,
    /// Seeded sampling of collapse outcomes.
    CollapseStats,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Eigs => "eigs",
            Command::Evolve => "evolve",
            Command::DualityScan => "duality-scan",
            Command::GapScan => "gap-scan",
            Command::CollapseStats => "collapse-stats",
        }
    }
}

/// Tables and invariant checks produced by one command, before any I/O.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub tables: Vec<Table>,
    pub checks: Vec<(String, String)>,
}

impl Outcome {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn check(&self, name: &str) -> Option<&str> {
        self.checks.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub outcome: Outcome,
    pub files: Vec<PathBuf>,
    pub manifest_path: PathBuf,
    pub manifest: Manifest,
}

pub fn compute(command: Command, cfg: &RunConfig) -> Result<Outcome> {
    match command {
        Command::Eigs => eigs(cfg),
        Command::Evolve => evolve(cfg),
        Command::DualityScan => duality(cfg),
        Command::GapScan => gaps(cfg),
        Command::CollapseStats => collapse_stats(cfg),
    }
}

/// Runs `command`, writes its CSV files and `manifest.txt` into the output
/// directory.
pub fn run_command(command: Command, cfg: &RunConfig) -> Result<RunReport> {
    let started = Instant::now();
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let outcome = compute(command, cfg)?;

    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.clone(),
        source,
    })?;
    let files = outcome
        .tables
        .iter()
        .map(|t| t.write(dir))
        .collect::<Result<Vec<_>>>()?;

    let mut manifest = Manifest::default();
    manifest.set("command", command.name());
    manifest.set("tool.name", env!("CARGO_PKG_NAME"));
    manifest.set("tool.version", env!("CARGO_PKG_VERSION"));
    manifest.set("tool.parallel", cfg!(feature = "parallel"));
    manifest.set("rng.algorithm", RNG_ALGORITHM);
    manifest.set("timestamp.unix", timestamp);
    for (k, v) in cfg.echo() {
        manifest.set(format!("config.{k}"), v);
    }
    for (k, v) in &outcome.checks {
        manifest.set(format!("check.{k}"), v);
    }
    for t in &outcome.tables {
        manifest.set("output", &t.name);
    }
    manifest.set("wall_time_s", format!("{:.6}", started.elapsed().as_secs_f64()));
    let manifest_path = dir.join("manifest.txt");
    manifest.write(&manifest_path)?;
    Ok(RunReport {
        outcome,
        files,
        manifest_path,
        manifest,
    })
}

fn system(cfg: &RunConfig) -> Result<(DiscreteHamiltonian, Spectrum)> {
    let h = build_hamiltonian(&cfg.grid, &cfg.potential, &cfg.constants)?;
    let s = solve_spectrum(&h, cfg.levels)?;
    Ok((h, s))
}

/// Closed-form level `n` (0-based) for the well and the oscillator.
pub fn analytic_energy(cfg: &RunConfig, n: usize) -> Option<f64> {
    let (hbar, mass) = (cfg.constants.hbar(), cfg.constants.mass());
    match cfg.potential {
        PotentialSpec::InfiniteWell => {
            let k = (n + 1) as f64 * std::f64::consts::PI / cfg.grid.length();
            Some(hbar * hbar * k * k / (2.0 * mass))
        }
        PotentialSpec::Harmonic { omega } => Some(hbar * omega * (n as f64 + 0.5)),
        _ => None,
    }
}

fn missing_seed(why: &str) -> CliError {
    CliError::Config(ConfigError::new(None, format!("`seed` is required for {why}")))
}

/// Initial coefficient matrix in the eigenbasis; the generator is used only
/// for random states.
fn initial_coefficients(cfg: &RunConfig, rng: Option<&mut ChaCha8Rng>) -> Result<CoefficientMatrix> {
    Ok(match cfg.initial {
        InitialState::Product => {
            let a = &cfg.amplitudes;
            let w: f64 = a.iter().map(|x| x * x).sum();
            CoefficientMatrix::from_fn(a.len(), |n, m| C64::new(a[n] * a[m] / w, 0.0))?
        }
        InitialState::Wave => wave_coefficients(),
        InitialState::Particle => particle_coefficients(),
        InitialState::RandomHermitian => {
            let rng = rng.ok_or_else(|| missing_seed("initial.state = random_hermitian"))?;
            random_hermitian(rng, cfg.levels)?
        }
    })
}

fn random_hermitian(rng: &mut impl Rng, dim: usize) -> Result<CoefficientMatrix> {
    let mut upper = vec![C64::new(0.0, 0.0); dim * dim];
    for n in 0..dim {
        for m in n..dim {
            let re = rng.random_range(-1.0..1.0);
            let im = if n == m { 0.0 } else { rng.random_range(-1.0..1.0) };
            upper[n * dim + m] = C64::new(re, im);
        }
    }
    let c = CoefficientMatrix::from_fn(dim, |n, m| {
        if n <= m {
            upper[n * dim + m]
        } else {
            upper[m * dim + n].conj()
        }
    })?;
    Ok(c.normalized()?)
}

fn initial_kernel(c: &CoefficientMatrix, spectrum: &Spectrum) -> Result<KernelField> {
    Ok(kernel_from_coefficients(c, &spectrum.states()[..c.dim()])?)
}

fn seeded(cfg: &RunConfig) -> Option<ChaCha8Rng> {
    cfg.seed.map(ChaCha8Rng::seed_from_u64)
}

fn check(name: &str, value: impl ToString) -> (String, String) {
    (name.to_string(), value.to_string())
}

fn fmt(v: f64) -> String {
    crate::output::format_float(v)
}

fn eigs(cfg: &RunConfig) -> Result<Outcome> {
    let (_, s) = system(cfg)?;
    let mut levels = Table::new(
        "eigs.csv",
        &["level", "energy", "analytic_energy", "relative_error", "residual"],
    );
    for (n, (&e, &r)) in s.energies().iter().zip(s.residuals()).enumerate() {
        let exact = analytic_energy(cfg, n);
        let rel = exact.map(|x| (e - x).abs() / x.abs());
        levels.push(vec![n.into(), e.into(), exact.into(), rel.into(), r.into()]);
    }
    let mut headers = vec!["x".to_string()];
    headers.extend((0..s.count()).map(|n| format!("psi_{n}")));
    let mut states = Table {
        name: "states.csv".into(),
        headers,
        rows: Vec::new(),
    };
    for i in 0..cfg.grid.n_points() {
        let mut row = vec![Cell::Float(cfg.grid.x(i))];
        row.extend(s.states().iter().map(|psi| Cell::Float(psi.values()[i].re)));
        states.push(row);
    }
    let (ortho, _, _) = orthonormality_defect(s.states())?;
    let max_residual = s.residuals().iter().cloned().fold(0.0, f64::max);
    Ok(Outcome {
        tables: vec![levels, states],
        checks: vec![
            check("max_residual", fmt(max_residual)),
            check("orthonormality_defect", fmt(ortho)),
        ],
    })
}

fn evolve(cfg: &RunConfig) -> Result<Outcome> {
    let (h, s) = system(cfg)?;
    let c0 = initial_coefficients(cfg, seeded(cfg).as_mut())?;
    let k0 = initial_kernel(&c0, &s)?;
    let series = evolve_bipartite_grid(&k0, &h, &cfg.evolution)?;
    let basis = &s.states()[..c0.dim()];
    let energy = Observable::Hamiltonian(h.clone());

    struct Row {
        norm: f64,
        defect: f64,
        entropy: f64,
        energy: f64,
        position: f64,
        spectral: f64,
    }
    let snaps: Vec<(f64, &KernelField)> = series.iter().collect();
    let rows = Execution::default().try_map(snaps.len(), |i| -> Result<Row> {
        let (t, k) = snaps[i];
        let reference = kernel_from_coefficients(&evolve_bipartite_spectral(&c0, &s, t)?, basis)?;
        Ok(Row {
            norm: k.norm_sqr(),
            defect: hermiticity_defect(k),
            entropy: entropy(k)?,
            energy: expectation(k, &energy)?,
            position: expectation(k, &Observable::Position)?,
            spectral: k.max_abs_diff(&reference),
        })
    })?;

    let mut table = Table::new(
        "evolve.csv",
        &[
            "time",
            "norm",
            "hermiticity_defect",
            "entropy",
            "energy",
            "position_mean",
            "spectral_deviation",
        ],
    );
    for ((t, _), r) in snaps.iter().zip(&rows) {
        table.push(vec![
            (*t).into(),
            r.norm.into(),
            r.defect.into(),
            r.entropy.into(),
            r.energy.into(),
            r.position.into(),
            r.spectral.into(),
        ]);
    }
    let last = series.last().expect("series holds the initial snapshot");
    let (d0, d1) = (position_density(&k0)?, position_density(last)?);
    let mut density = Table::new("density.csv", &["x", "density_initial", "density_final"]);
    for i in 0..cfg.grid.n_points() {
        density.push(vec![cfg.grid.x(i).into(), d0[i].into(), d1[i].into()]);
    }

    let max = |f: &dyn Fn(&Row) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    let (n0, s0, e0) = (rows[0].norm, rows[0].entropy, rows[0].energy);
    Ok(Outcome {
        tables: vec![table, density],
        checks: vec![
            check("max_norm_drift", fmt(max(&|r| (r.norm - n0).abs()))),
            check("max_hermiticity_defect", fmt(max(&|r| r.defect))),
            check("max_entropy_drift", fmt(max(&|r| (r.entropy - s0).abs()))),
            check("max_energy_drift", fmt(max(&|r| (r.energy - e0).abs()))),
            check("max_spectral_deviation", fmt(max(&|r| r.spectral))),
        ],
    })
}

fn modes(cfg: &RunConfig) -> Result<(ScalarField, ScalarField)> {
    Ok(match cfg.modes {
        ModeFamily::Screen { fringes } => make_screen_modes(&cfg.grid, fringes)?,
        ModeFamily::Slits { separation, width } => make_two_slit_modes(&cfg.grid, separation, width)?,
    })
}

fn duality(cfg: &RunConfig) -> Result<Outcome> {
    let (m1, m2) = modes(cfg)?;
    let points = duality_scan(&m1, &m2, &cfg.lambdas)?;
    let mut scan = Table::new("duality.csv", &["lambda", "entropy", "visibility"]);
    for p in &points {
        scan.push(vec![p.lambda.into(), p.entropy.into(), p.visibility.into()]);
    }
    let endpoint = |c: CoefficientMatrix| -> Result<KernelField> {
        Ok(two_slit_kernel(&TwoSlitFamily::new(m1.clone(), m2.clone(), c)?)?)
    };
    let (kw, kp) = (endpoint(wave_coefficients())?, endpoint(particle_coefficients())?);
    let (dw, dp) = (position_density(&kw)?, position_density(&kp)?);
    let mut density = Table::new("duality_density.csv", &["x", "density_wave", "density_particle"]);
    for i in 0..cfg.grid.n_points() {
        density.push(vec![cfg.grid.x(i).into(), dw[i].into(), dp[i].into()]);
    }
    let ordered_by = |key: &dyn Fn(&(usize, usize)) -> bool| (1..points.len()).map(|i| (i - 1, i)).all(|p| key(&p));
    let entropy_up = ordered_by(&|&(a, b)| points[b].entropy >= points[a].entropy - 1e-12);
    let visibility_down = ordered_by(&|&(a, b)| points[b].visibility <= points[a].visibility + 1e-12);
    Ok(Outcome {
        tables: vec![scan, density],
        checks: vec![
            check("entropy_nondecreasing", entropy_up),
            check("visibility_nonincreasing", visibility_down),
            check("entropy_wave", fmt(entropy(&kw)?)),
            check("entropy_particle", fmt(entropy(&kp)?)),
            check(
                "entropy_particle_reduced_density",
                fmt(reduced_density(&kp, Side::X)?.entropy()?),
            ),
        ],
    })
}

fn gaps(cfg: &RunConfig) -> Result<Outcome> {
    if cfg.pairs.is_empty() {
        return Err(CliError::Config(ConfigError::new(
            None,
            "gap-scan needs at least one pair in `gap.pairs`",
        )));
    }
    let (h, s) = system(cfg)?;
    let found = gap_spectroscopy(&s, &cfg.pairs, &h, &cfg.evolution)?;
    let mut table = Table::new(
        "gaps.csv",
        &[
            "n",
            "m",
            "measured_gap",
            "reference_gap",
            "relative_error",
            "analytic_gap",
            "analytic_relative_error",
            "fit_residual",
        ],
    );
    let mut worst_analytic: Option<f64> = None;
    for g in &found {
        let exact = analytic_energy(cfg, g.n)
            .zip(analytic_energy(cfg, g.m))
            .map(|(a, b)| a - b);
        let rel = exact.map(|x| {
            let d = (g.measured_gap - x).abs();
            if x == 0.0 {
                d
            } else {
                d / x.abs()
            }
        });
        if let Some(r) = rel {
            worst_analytic = Some(worst_analytic.map_or(r, |w| w.max(r)));
        }
        table.push(vec![
            g.n.into(),
            g.m.into(),
            g.measured_gap.into(),
            g.reference_gap.into(),
            g.relative_error.into(),
            exact.into(),
            rel.into(),
            g.fit_residual.into(),
        ]);
    }
    let worst = found.iter().map(|g| g.relative_error).fold(0.0, f64::max);
    let mut checks = vec![check("max_relative_error", fmt(worst))];
    if let Some(w) = worst_analytic {
        checks.push(check("max_analytic_relative_error", fmt(w)));
    }
    Ok(Outcome {
        tables: vec![table],
        checks,
    })
}

fn collapse_stats(cfg: &RunConfig) -> Result<Outcome> {
    let seed = cfg.seed.ok_or_else(|| missing_seed("collapse-stats"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (_, s) = system(cfg)?;
    let c0 = initial_coefficients(cfg, Some(&mut rng))?;
    let kernel = initial_kernel(&c0, &s)?;
    let expansion = eigenbasis_coefficients(&kernel, &s, cfg.levels)?;
    let report = transition_probabilities(&expansion.coefficients, &s)?;
    let p = &report.probabilities;

    let dist =
        WeightedIndex::new(p).map_err(|e| bipartite_core::Error::Invalid(format!("transition probabilities: {e}")))?;
    let samples = cfg.collapse_samples;
    let mut counts = vec![0usize; p.len()];
    for _ in 0..samples {
        counts[dist.sample(&mut rng)] += 1;
    }
    let m_f = samples as f64;

    let mut table = Table::new(
        "collapse.csv",
        &[
            "level",
            "probability",
            "energy_shift",
            "count",
            "frequency",
            "sigma",
            "z_score",
        ],
    );
    let mut max_z: f64 = 0.0;
    let mut collapsed_entropy: f64 = 0.0;
    for (m, (&pm, &count)) in p.iter().zip(&counts).enumerate() {
        let freq = count as f64 / m_f;
        let sigma = (pm * (1.0 - pm) / m_f).sqrt();
        let z = if sigma > 0.0 { (freq - pm) / sigma } else { 0.0 };
        max_z = max_z.max(z.abs());
        if pm > bipartite_core::tol::ZERO_PROBABILITY {
            collapsed_entropy = collapsed_entropy.max(entropy(&collapse(&kernel, &s, m)?.kernel)?);
        }
        table.push(vec![
            m.into(),
            pm.into(),
            report.energy_shifts[m].into(),
            count.into(),
            freq.into(),
            sigma.into(),
            z.into(),
        ]);
    }

    let shifts = &report.energy_shifts;
    let empirical: f64 = counts.iter().zip(shifts).map(|(c, d)| *c as f64 * d).sum::<f64>() / m_f;
    let second: f64 = p.iter().zip(shifts).map(|(p, d)| p * d * d).sum();
    let standard_error = ((second - report.expected_shift.powi(2)).max(0.0) / m_f).sqrt();
    let mut shift = Table::new(
        "collapse_shift.csv",
        &["samples", "expected_shift", "empirical_mean_shift", "standard_error"],
    );
    shift.push(vec![
        samples.into(),
        report.expected_shift.into(),
        empirical.into(),
        standard_error.into(),
    ]);

    Ok(Outcome {
        tables: vec![table, shift],
        checks: vec![
            check("captured_weight", fmt(expansion.captured_weight)),
            check("probability_sum", fmt(p.iter().sum())),
            check("max_abs_z_score", fmt(max_z)),
            check("within_3_sigma", max_z <= 3.0),
            check("max_collapsed_entropy", fmt(collapsed_entropy)),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    fn cfg(text: &str) -> RunConfig {
        parse_config(text).unwrap()
    }

    fn column(t: &Table, name: &str) -> Vec<f64> {
        let c = t.column(name).unwrap();
        t.rows
            .iter()
            .map(|r| match r[c] {
                Cell::Float(v) => v,
                Cell::Int(v) => v as f64,
                _ => f64::NAN,
            })
            .collect()
    }

    #[test]
    fn eigs_reports_analytic_well_levels() {
        let o = compute(Command::Eigs, &cfg("grid.n_points = 200\nlevels = 3")).unwrap();
        let t = o.table("eigs.csv").unwrap();
        assert_eq!(t.rows.len(), 3);
        assert!(column(t, "relative_error").iter().all(|r| *r < 1e-3));
        assert_eq!(o.table("states.csv").unwrap().headers.len(), 4);
    }

    #[test]
    fn double_well_has_no_analytic_column() {
        let o = compute(
            Command::Eigs,
            &cfg("potential = double_well\ngrid.n_points = 80\nlevels = 2"),
        )
        .unwrap();
        let t = o.table("eigs.csv").unwrap();
        assert_eq!(t.rows[0][t.column("analytic_energy").unwrap()], Cell::Empty);
    }

    #[test]
    fn evolve_tracks_invariants() {
        let c = cfg("grid.n_points = 64\nlevels = 3\nevolution.n_steps = 50\nevolution.record_every = 10");
        let o = compute(Command::Evolve, &c).unwrap();
        assert_eq!(o.table("evolve.csv").unwrap().rows.len(), 6);
        let drift: f64 = o.check("max_norm_drift").unwrap().parse().unwrap();
        assert!(drift < 1e-12);
    }

    #[test]
    fn random_states_need_a_seed() {
        let c = cfg("grid.n_points = 40\nlevels = 3\ninitial.state = random_hermitian\nevolution.n_steps = 2");
        let e = compute(Command::Evolve, &c).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let e = compute(Command::CollapseStats, &cfg("grid.n_points = 40")).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn gap_scan_well_pairs() {
        let c = cfg("grid.n_points = 512\nlevels = 3\ngap.pairs = 1-0, 2-0\nevolution.n_steps = 200");
        let o = compute(Command::GapScan, &c).unwrap();
        let t = o.table("gaps.csv").unwrap();
        assert_eq!(t.rows.len(), 2);
        assert!(
            column(t, "analytic_relative_error").iter().all(|r| *r < 5e-3),
            "{:?}",
            t.rows
        );
    }

    #[test]
    fn duality_scan_rows_and_monotonicity() {
        let c = cfg("grid.x_min = -1\ngrid.n_points = 201");
        let o = compute(Command::DualityScan, &c).unwrap();
        let s = column(o.table("duality.csv").unwrap(), "entropy");
        assert_eq!(s.len(), 11);
        assert!(s.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        assert_eq!(o.check("entropy_nondecreasing"), Some("true"));
    }

    #[test]
    fn collapse_wave_state_splits_evenly() {
        let c = cfg("grid.n_points = 64\nlevels = 2\ninitial.state = wave\nseed = 3\ncollapse.samples = 100000");
        let o = compute(Command::CollapseStats, &c).unwrap();
        let f = column(o.table("collapse.csv").unwrap(), "frequency");
        assert!((f[0] - 0.5).abs() < 0.005);
        assert_eq!(o, compute(Command::CollapseStats, &c).unwrap());
    }
}
