use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::analysis::{entropy, position_density};
use crate::error::{Error, Result};
use crate::field::{
    inner_product, kernel_from_coefficients, orthonormality_defect, CoefficientMatrix, KernelField, ScalarField,
};
use crate::grid::Grid1D;
use crate::par::Execution;
use crate::tol;
use crate::C64;

/// Minimum fraction of each slit mode's norm inside `±3·width`.
const LOCALIZATION: f64 = 0.99;

/// Symmetric (Löwdin) orthonormalization of a normalized pair.
fn symmetric_orthonormalize(a: &ScalarField, b: &ScalarField) -> Result<(ScalarField, ScalarField)> {
    let s = inner_product(a, b)?;
    let r = s.norm();
    if r >= 1.0 - 1e-12 {
        return Err(Error::invalid("modes are linearly dependent"));
    }
    if r == 0.0 {
        return Ok((a.clone(), b.clone()));
    }
    let p = 1.0 / (1.0 + r).sqrt();
    let q = 1.0 / (1.0 - r).sqrt();
    let alpha = C64::new(0.5 * (p + q), 0.0);
    let beta = 0.5 * (p - q) / r;
    let first = a.combine(alpha, b, s.conj() * beta)?;
    let second = a.combine(s * beta, b, alpha)?;
    Ok((first, second))
}

/// Two Gaussian slit modes centred at `grid.center() ± separation/2`,
/// symmetrically orthonormalized.
///
/// Each packet is `exp(−(x − c)² / (2·width²))`, normalized on the grid.
pub fn make_two_slit_modes(grid: &Grid1D, separation: f64, width: f64) -> Result<(ScalarField, ScalarField)> {
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::invalid(format!("slit width must be > 0, got {width}")));
    }
    if !(separation > 4.0 * width) {
        return Err(Error::invalid(format!(
            "slit separation {separation} must exceed 4·width = {}",
            4.0 * width
        )));
    }
    let c = grid.center();
    let centers = [c - 0.5 * separation, c + 0.5 * separation];
    if centers[0] - 3.0 * width < grid.x_min() || centers[1] + 3.0 * width > grid.x_max() {
        return Err(Error::invalid("slit modes do not fit inside the grid"));
    }
    let packet = |x0: f64| {
        ScalarField::from_real(*grid, move |x| (-(x - x0).powi(2) / (2.0 * width * width)).exp()).normalized()
    };
    let (m1, m2) = symmetric_orthonormalize(&packet(centers[0])?, &packet(centers[1])?)?;
    for (mode, x0) in [(&m1, centers[0]), (&m2, centers[1])] {
        let inside: f64 = mode
            .values()
            .iter()
            .enumerate()
            .filter(|(i, _)| (grid.x(*i) - x0).abs() <= 3.0 * width)
            .map(|(_, v)| v.norm_sqr())
            .sum::<f64>()
            * grid.spacing();
        if inside < LOCALIZATION {
            return Err(Error::invalid(format!(
                "slit overlap too large: only {inside:.4} of a mode's norm stays within 3·width of its slit"
            )));
        }
    }
    Ok((m1, m2))
}

/// The two slit waves as they arrive at a detection screen spanning the grid.
///
/// Both share a flat-topped envelope `exp(−((x − c)/(0.42 L))¹⁶)` and carry
/// opposite transverse wave numbers `±κ/2`, with `κ` chosen so that the
/// central half of the grid holds `fringes` interference fringes. The pair
/// is symmetrically orthonormalized.
pub fn make_screen_modes(grid: &Grid1D, fringes: usize) -> Result<(ScalarField, ScalarField)> {
    if fringes == 0 {
        return Err(Error::invalid("screen modes need at least one fringe"));
    }
    let l = grid.length();
    let c = grid.center();
    let kappa = 4.0 * PI * fringes as f64 / l;
    if kappa * grid.spacing() > 0.5 {
        return Err(Error::invalid(format!(
            "{fringes} fringes are not resolved by {} grid points",
            grid.n_points()
        )));
    }
    let envelope = move |x: f64| (-((x - c) / (0.42 * l)).powi(16)).exp();
    let tilt = |sign: f64| {
        ScalarField::from_fn(*grid, move |x| {
            C64::from_polar(envelope(x), sign * 0.5 * kappa * (x - c))
        })
        .normalized()
    };
    symmetric_orthonormalize(&tilt(1.0)?, &tilt(-1.0)?)
}

/// Coefficients `½·[[1, 1], [1, 1]]`: the coherent superposition.
pub fn wave_coefficients() -> CoefficientMatrix {
    CoefficientMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).expect("2×2")
}

/// Coefficients `(1/√2)·I`: the equal diagonal mixture.
pub fn particle_coefficients() -> CoefficientMatrix {
    CoefficientMatrix::from_real_rows(&[&[FRAC_1_SQRT_2, 0.0], &[0.0, FRAC_1_SQRT_2]]).expect("2×2")
}

/// `normalize((1 − λ)·a_W + λ·a_P)`.
pub fn interpolated_coefficients(lambda: f64) -> Result<CoefficientMatrix> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::invalid(format!(
            "interpolation parameter {lambda} outside [0, 1]"
        )));
    }
    let w = wave_coefficients();
    let p = particle_coefficients();
    CoefficientMatrix::new(w.entries().scale(1.0 - lambda) + p.entries().scale(lambda))?.normalized()
}

/// Two orthonormal modes and a Hermitian, normalized 2×2 coefficient matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSlitFamily {
    mode_1: ScalarField,
    mode_2: ScalarField,
    coefficients: CoefficientMatrix,
}

impl TwoSlitFamily {
    pub fn new(mode_1: ScalarField, mode_2: ScalarField, coefficients: CoefficientMatrix) -> Result<Self> {
        mode_1.grid().ensure_same(mode_2.grid(), "TwoSlitFamily")?;
        let (dev, i, j) = orthonormality_defect(&[mode_1.clone(), mode_2.clone()])?;
        if dev > tol::ALGEBRAIC {
            return Err(Error::NotOrthonormal { i, j, deviation: dev });
        }
        if coefficients.dim() != 2 {
            return Err(Error::Dimension {
                context: "TwoSlitFamily coefficients",
                expected: 2,
                found: coefficients.dim(),
            });
        }
        if !coefficients.is_hermitian() || !coefficients.is_normalized() {
            return Err(Error::invalid(
                "two-slit coefficients must be Hermitian with unit total weight",
            ));
        }
        Ok(Self {
            mode_1,
            mode_2,
            coefficients,
        })
    }

    pub fn modes(&self) -> (&ScalarField, &ScalarField) {
        (&self.mode_1, &self.mode_2)
    }

    pub fn coefficients(&self) -> &CoefficientMatrix {
        &self.coefficients
    }
}

/// `Ψ = Σ_{ij} a_ij ψ_i(x) ψ_j*(y)`.
pub fn two_slit_kernel(family: &TwoSlitFamily) -> Result<KernelField> {
    kernel_from_coefficients(&family.coefficients, &[family.mode_1.clone(), family.mode_2.clone()])
}

/// `(max d − min d) / (max d + min d)` over the central half of the grid.
pub fn fringe_visibility(grid: &Grid1D, density: &[f64]) -> Result<f64> {
    let c = grid.center();
    let half = 0.25 * grid.length();
    let (lo, hi) = density
        .iter()
        .enumerate()
        .filter(|(i, _)| (grid.x(*i) - c).abs() <= half)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, d)| {
            (lo.min(*d), hi.max(*d))
        });
    if !(hi + lo > 0.0) {
        return Err(Error::numeric(
            "fringe_visibility",
            "density vanishes in the fringe window",
        ));
    }
    Ok(((hi - lo) / (hi + lo)).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualityPoint {
    pub lambda: f64,
    pub entropy: f64,
    pub visibility: f64,
}

pub fn duality_scan(mode_1: &ScalarField, mode_2: &ScalarField, lambdas: &[f64]) -> Result<Vec<DualityPoint>> {
    duality_scan_with(mode_1, mode_2, lambdas, Execution::default())
}

/// Entropy and fringe visibility along the wave-to-particle interpolation.
pub fn duality_scan_with(
    mode_1: &ScalarField,
    mode_2: &ScalarField,
    lambdas: &[f64],
    exec: Execution,
) -> Result<Vec<DualityPoint>> {
    if let Some(bad) = lambdas.iter().find(|l| !(0.0..=1.0).contains(*l)) {
        return Err(Error::invalid(format!("interpolation parameter {bad} outside [0, 1]")));
    }
    let grid = *mode_1.grid();
    exec.try_map(lambdas.len(), |k| {
        let lambda = lambdas[k];
        let family = TwoSlitFamily::new(mode_1.clone(), mode_2.clone(), interpolated_coefficients(lambda)?)?;
        let kernel = two_slit_kernel(&family)?;
        let density = position_density(&kernel)?;
        Ok(DualityPoint {
            lambda,
            entropy: entropy(&kernel)?,
            visibility: fringe_visibility(&grid, &density)?,
        })
    })
}
