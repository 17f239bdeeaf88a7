//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p bipartite-cli --test acceptance`.

use std::f64::consts::{LN_2, PI};
use std::fs;
use std::panic;
use std::process::ExitCode;
use std::time::Instant;

use bipartite_cli::output::read_table;
use bipartite_cli::{parse_config, run_command, Command};
use bipartite_core::analysis::{
    eigenbasis_coefficients, entropy, expectation, hermiticity_defect, position_density, reduced_density,
    transition_probabilities, Observable, Side,
};
use bipartite_core::evolution::{
    evolve_bipartite_grid, evolve_bipartite_spectral, evolve_schrodinger, EvolutionParams,
};
use bipartite_core::experiments::{
    duality_scan, gap_spectroscopy, make_screen_modes, make_two_slit_modes, particle_coefficients, two_slit_kernel,
    wave_coefficients, TwoSlitFamily,
};
use bipartite_core::field::{kernel_from_coefficients, kernel_from_product};
use bipartite_core::hamiltonian::{build_hamiltonian, solve_spectrum, DiscreteHamiltonian, PotentialSpec, Spectrum};
use bipartite_core::{CoefficientMatrix, Grid1D, PhysicalConstants, ScalarField, C64};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = (bool, String);
type Criterion = (&'static str, fn() -> Verdict);

fn system(potential: PotentialSpec, x_min: f64, x_max: f64, n: usize, k: usize) -> (DiscreteHamiltonian, Spectrum) {
    let g = Grid1D::new(x_min, x_max, n).unwrap();
    let h = build_hamiltonian(&g, &potential, &PhysicalConstants::default()).unwrap();
    let s = solve_spectrum(&h, k).unwrap();
    (h, s)
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn random_hermitian(rng: &mut impl Rng, dim: usize) -> CoefficientMatrix {
    let a = DMatrix::from_fn(dim, dim, |_, _| {
        c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let h = (&a + a.adjoint()).scale(0.5);
    CoefficientMatrix::new(h).unwrap().normalized().unwrap()
}

fn product_equivalence() -> Verdict {
    let (h, s) = system(PotentialSpec::InfiniteWell, 0.0, 1.0, 256, 3);
    let st = s.states();
    let third = c(1.0 / 3f64.sqrt(), 0.0);
    let psi0 = st[0]
        .combine(third, &st[1], third)
        .unwrap()
        .combine(c(1.0, 0.0), &st[2], third)
        .unwrap();
    let psi0 = psi0.normalized().unwrap();
    let p = EvolutionParams::new(1e-3, 1000, 100).unwrap();
    let waves = evolve_schrodinger(&psi0, &h, &p).unwrap();
    let kernels = evolve_bipartite_grid(&kernel_from_product(&psi0, &psi0).unwrap(), &h, &p).unwrap();
    let mut worst: f64 = 0.0;
    for (psi, k) in waves.snapshots.iter().zip(&kernels.snapshots) {
        worst = worst.max(k.max_abs_diff(&kernel_from_product(psi, psi).unwrap()));
    }
    let t = kernels.times.last().copied().unwrap_or(0.0);
    (
        worst <= 1e-6,
        format!("max |Ψ − ψψ*| over t ∈ [0, {t}] = {worst:.3e} (≤ 1e-6)"),
    )
}

fn gap_spectroscopy_criterion() -> Verdict {
    let (h, s) = system(PotentialSpec::InfiniteWell, 0.0, 1.0, 512, 3);
    let p = EvolutionParams::new(1e-3, 200, 10).unwrap();
    let well = gap_spectroscopy(&s, &[(1, 0), (2, 0), (2, 1)], &h, &p).unwrap();
    let exact = |n: usize| ((n + 1) as f64).powi(2) * PI * PI / 2.0;
    let well_err = well
        .iter()
        .map(|g| (g.measured_gap - (exact(g.n) - exact(g.m))).abs() / (exact(g.n) - exact(g.m)))
        .fold(0.0, f64::max);

    let (h, s) = system(PotentialSpec::Harmonic { omega: 1.0 }, -10.0, 10.0, 512, 3);
    let osc = gap_spectroscopy(&s, &[(1, 0), (2, 1)], &h, &EvolutionParams::new(1e-2, 200, 10).unwrap()).unwrap();
    let spacing = (osc[0].measured_gap - osc[1].measured_gap).abs() / osc[0].measured_gap;
    let quantum = osc.iter().map(|g| (g.measured_gap - 1.0).abs()).fold(0.0, f64::max);
    (
        well_err <= 5e-3 && spacing <= 2e-3 && quantum <= 5e-3,
        format!(
            "well (1,2),(1,3),(2,3) max rel err {well_err:.3e} (≤ 5e-3); oscillator gaps {:.6}, {:.6}: spacing mismatch {spacing:.3e} (≤ 2e-3), |gap − ħω| ≤ {quantum:.3e}",
            osc[0].measured_gap, osc[1].measured_gap
        ),
    )
}

fn entropy_endpoints() -> Verdict {
    let g = Grid1D::new(-6.0, 6.0, 241).unwrap();
    let (m1, m2) = make_two_slit_modes(&g, 4.0, 0.5).unwrap();
    let kernel = |a| two_slit_kernel(&TwoSlitFamily::new(m1.clone(), m2.clone(), a).unwrap()).unwrap();
    let (kw, kp) = (kernel(wave_coefficients()), kernel(particle_coefficients()));
    let sw = entropy(&kw).unwrap();
    let sp_schmidt = entropy(&kp).unwrap();
    let sp_x = reduced_density(&kp, Side::X).unwrap().entropy().unwrap();
    let sp_y = reduced_density(&kp, Side::Y).unwrap().entropy().unwrap();

    // Closed-form 2×2 oracle: eigenvalues of a·a† for a = I/√2.
    let a = particle_coefficients();
    let rho = a.entries() * a.entries().adjoint();
    let (p, q, b) = (rho[(0, 0)].re, rho[(1, 1)].re, rho[(0, 1)]);
    let r = (0.25 * (p - q).powi(2) + b.norm_sqr()).sqrt();
    let eig = [0.5 * (p + q) - r, 0.5 * (p + q) + r];
    let oracle: f64 = eig.iter().filter(|l| **l > 0.0).map(|l| -l * l.ln()).sum();

    let ok = sw <= 1e-9
        && (sp_schmidt - LN_2).abs() <= 1e-9
        && (sp_x - LN_2).abs() <= 1e-9
        && (sp_y - LN_2).abs() <= 1e-9
        && (sp_schmidt - sp_x).abs() <= 1e-8
        && (oracle - LN_2).abs() <= 1e-15;
    (
        ok,
        format!(
            "S(Ψ_W) = {sw:.2e}; S(Ψ_P): Schmidt {sp_schmidt:.12}, ρ_x {sp_x:.12}, ρ_y {sp_y:.12}, 2×2 oracle {oracle:.12} (ln 2 = {LN_2:.12}; ½ ln 2 not reproduced)"
        ),
    )
}

fn duality_scan_criterion() -> Verdict {
    let g = Grid1D::new(-1.0, 1.0, 257).unwrap();
    let (m1, m2) = make_screen_modes(&g, 6).unwrap();
    let lambdas: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    let pts = duality_scan(&m1, &m2, &lambdas).unwrap();
    let s_up = pts.windows(2).all(|w| w[1].entropy >= w[0].entropy - 1e-12);
    let v_down = pts.windows(2).all(|w| w[1].visibility <= w[0].visibility + 1e-12);

    let (a, b) = (m1.values(), m2.values());
    let wave: Vec<f64> = a.iter().zip(b).map(|(x, y)| 0.5 * (x + y).norm_sqr()).collect();
    let particle: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| 0.5 * (x.norm_sqr() + y.norm_sqr()))
        .collect();
    let mut worst: f64 = 0.0;
    for (coeffs, closed) in [(wave_coefficients(), wave), (particle_coefficients(), particle)] {
        let k = two_slit_kernel(&TwoSlitFamily::new(m1.clone(), m2.clone(), coeffs).unwrap()).unwrap();
        let d = position_density(&k).unwrap();
        worst = worst.max(d.iter().zip(&closed).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max));
    }
    let (first, last) = (pts[0], pts[pts.len() - 1]);
    (
        s_up && v_down && worst <= 1e-8,
        format!(
            "11 points: entropy nondecreasing {s_up}, visibility nonincreasing {v_down}; S {:.3e} → {:.6}, V {:.4} → {:.2e}; endpoint density error {worst:.2e} (≤ 1e-8)",
            first.entropy, last.entropy, first.visibility, last.visibility
        ),
    )
}

fn conservation() -> Verdict {
    let (h, s) = system(PotentialSpec::InfiniteWell, 0.0, 1.0, 128, 4);
    let c0 = random_hermitian(&mut ChaCha8Rng::seed_from_u64(5), 4);
    let k0 = kernel_from_coefficients(&c0, s.states()).unwrap();
    let series = evolve_bipartite_grid(&k0, &h, &EvolutionParams::new(1e-3, 1000, 10).unwrap()).unwrap();
    let (n0, s0) = (k0.norm_sqr(), entropy(&k0).unwrap());
    let (mut dn, mut dh, mut ds): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for k in &series.snapshots {
        dn = dn.max((k.norm_sqr() - n0).abs());
        dh = dh.max(hermiticity_defect(k));
        ds = ds.max((entropy(k).unwrap() - s0).abs());
    }
    (
        dn <= 1e-10 && dh <= 1e-9 && ds <= 1e-8,
        format!(
            "1000 steps, {} snapshots: norm drift {dn:.2e} (≤ 1e-10), Hermiticity defect {dh:.2e} (≤ 1e-9), entropy drift {ds:.2e} (≤ 1e-8)",
            series.len()
        ),
    )
}

fn transition_bookkeeping() -> Verdict {
    let (_, s) = system(PotentialSpec::InfiniteWell, 0.0, 1.0, 64, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut dp, mut de): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let dim = rng.random_range(1..=8);
        let r = transition_probabilities(&random_hermitian(&mut rng, dim), &s).unwrap();
        dp = dp.max((r.probabilities.iter().sum::<f64>() - 1.0).abs());
        de = de.max(r.expected_shift.abs());
    }
    (
        dp <= 1e-10 && de <= 1e-9,
        format!("100 matrices: max |Σ p_m − 1| = {dp:.2e} (≤ 1e-10), max |Σ p_m ΔE_m| = {de:.2e} (≤ 1e-9)"),
    )
}

fn expectation_consistency() -> Verdict {
    let g = Grid1D::new(0.0, 1.0, 48).unwrap();
    let n = g.n_points();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let mut v: Vec<C64> = (0..n)
            .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        v[0] = c(0.0, 0.0);
        v[n - 1] = c(0.0, 0.0);
        let psi = ScalarField::new(g, v).unwrap().normalized().unwrap();
        let a = DMatrix::from_fn(n, n, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let half = (&a + a.adjoint()).scale(0.5);
        let o = DMatrix::from_fn(n, n, |i, j| if i <= j { half[(i, j)] } else { half[(j, i)].conj() });
        let col = DVector::from_column_slice(psi.values());
        let direct = (col.adjoint() * &o * &col)[(0, 0)].re * g.spacing();
        let kernel = expectation(&kernel_from_product(&psi, &psi).unwrap(), &Observable::Matrix(o)).unwrap();
        worst = worst.max((kernel - direct).abs());
    }
    (
        worst <= 1e-8,
        format!("50 product kernels: max |Tr(Ψ†OΨ) − ⟨ψ|O|ψ⟩| = {worst:.2e} (≤ 1e-8)"),
    )
}

fn spectral_vs_grid() -> Verdict {
    let (h, s) = system(PotentialSpec::InfiniteWell, 0.0, 10.0, 160, 5);
    let c0 = random_hermitian(&mut ChaCha8Rng::seed_from_u64(8), 5);
    let k0 = kernel_from_coefficients(&c0, s.states()).unwrap();
    let series = evolve_bipartite_grid(&k0, &h, &EvolutionParams::new(1e-3, 1000, 250).unwrap()).unwrap();
    let mut worst: f64 = 0.0;
    for (t, k) in series.iter() {
        let spectral = kernel_from_coefficients(&evolve_bipartite_spectral(&c0, &s, t).unwrap(), s.states()).unwrap();
        worst = worst.max(k.max_abs_diff(&spectral));
    }
    let back = eigenbasis_coefficients(series.last().unwrap(), &s, 5).unwrap();
    (
        worst <= 1e-6,
        format!(
            "well L = 10, 5 levels, T = 1: max |Ψ_grid − Ψ_spectral| = {worst:.2e} (≤ 1e-6); captured weight {:.12}",
            back.captured_weight
        ),
    )
}

fn collapse_determinism() -> Verdict {
    let tmp = tempfile::tempdir().unwrap();
    let mut lines = Vec::new();
    let mut ok = true;
    for (label, text) in [
        (
            "Ψ_W",
            "grid.n_points = 128\nlevels = 2\ninitial.state = wave\nseed = 2024\ncollapse.samples = 100000\n",
        ),
        (
            "random 5-level",
            "grid.n_points = 128\nlevels = 5\ninitial.state = random_hermitian\nseed = 99\ncollapse.samples = 100000\n",
        ),
    ] {
        let mut bytes = Vec::new();
        let mut max_z: f64 = 0.0;
        let mut freq0: f64 = 0.0;
        for run in 0..2 {
            let mut cfg = parse_config(text).unwrap();
            cfg.set_output_dir(tmp.path().join(format!("{label}-{run}")));
            let report = run_command(Command::CollapseStats, &cfg).unwrap();
            let csvs: Vec<Vec<u8>> = report.files.iter().map(|f| fs::read(f).unwrap()).collect();
            bytes.push(csvs);
            let path = report.files.iter().find(|f| f.ends_with("collapse.csv")).unwrap();
            let (headers, rows) = read_table(path).unwrap();
            let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
            let (p, f) = (col("probability"), col("frequency"));
            freq0 = rows[0][f].parse().unwrap();
            for row in &rows {
                let (pm, fm): (f64, f64) = (row[p].parse().unwrap(), row[f].parse().unwrap());
                let sigma = (pm * (1.0 - pm) / 1e5).sqrt();
                if sigma > 0.0 {
                    max_z = max_z.max((fm - pm).abs() / sigma);
                }
            }
        }
        let identical = bytes[0] == bytes[1];
        ok &= identical && max_z <= 3.0;
        lines.push(format!(
            "{label}: byte-identical {identical}, max |z| = {max_z:.2} (≤ 3), f_0 = {freq0:.5}"
        ));
        if label == "Ψ_W" {
            ok &= (freq0 - 0.5).abs() <= 0.005;
        }
    }
    (ok, lines.join("; "))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("product-form equivalence", product_equivalence),
        ("gap spectroscopy", gap_spectroscopy_criterion),
        ("entropy endpoints", entropy_endpoints),
        ("duality scan", duality_scan_criterion),
        ("conservation suite", conservation),
        ("transition bookkeeping", transition_bookkeeping),
        ("expectation consistency", expectation_consistency),
        ("spectral vs grid propagator", spectral_vs_grid),
        ("collapse determinism and statistics", collapse_determinism),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        });
        failures += usize::from(!ok);
        println!(
            "criterion {} {} {name} [{:.1}s]: {detail}",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
