//! Finite-difference Hamiltonian `H = −ħ²/(2m) ∂²ₓ + U(x)` with hard walls at
//! the grid endpoints, and its lowest eigenpairs.

use crate::error::{Error, Result};
use crate::field::{orthonormality_defect, ScalarField};
use crate::grid::{Grid1D, PhysicalConstants};
use crate::par::Execution;
use crate::tol;
use crate::tridiag::SymTridiagonal;
use crate::C64;

/// External potential `U(x)`.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    /// Zero potential between the hard walls.
    InfiniteWell,
    /// `U = ½ m ω² x²`, centred at `x = 0`.
    Harmonic { omega: f64 },
    /// Square barrier of the given height centred on the grid midpoint.
    DoubleWell {
        barrier_height: f64,
        barrier_half_width: f64,
    },
    /// One value per grid point.
    Tabulated(Vec<f64>),
}

impl PotentialSpec {
    pub fn name(&self) -> &'static str {
        match self {
            PotentialSpec::InfiniteWell => "infinite_well",
            PotentialSpec::Harmonic { .. } => "harmonic",
            PotentialSpec::DoubleWell { .. } => "double_well",
            PotentialSpec::Tabulated(_) => "tabulated",
        }
    }

    pub fn validate(&self, grid: &Grid1D) -> Result<()> {
        match self {
            PotentialSpec::InfiniteWell => Ok(()),
            PotentialSpec::Harmonic { omega } => {
                if *omega > 0.0 && omega.is_finite() {
                    Ok(())
                } else {
                    Err(Error::invalid(format!("harmonic omega must be > 0, got {omega}")))
                }
            }
            PotentialSpec::DoubleWell {
                barrier_height,
                barrier_half_width,
            } => {
                if !(*barrier_height >= 0.0 && barrier_height.is_finite()) {
                    return Err(Error::invalid(format!(
                        "double_well barrier_height must be ≥ 0, got {barrier_height}"
                    )));
                }
                if !(*barrier_half_width > 0.0 && *barrier_half_width < 0.5 * grid.length()) {
                    return Err(Error::invalid(format!(
                        "double_well barrier_half_width must lie in (0, {}), got {barrier_half_width}",
                        0.5 * grid.length()
                    )));
                }
                Ok(())
            }
            PotentialSpec::Tabulated(values) => {
                if values.len() != grid.n_points() {
                    return Err(Error::Dimension {
                        context: "tabulated potential",
                        expected: grid.n_points(),
                        found: values.len(),
                    });
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::invalid("tabulated potential contains non-finite values"));
                }
                Ok(())
            }
        }
    }

    /// `U(x_i)` for every grid point.
    pub fn sample(&self, grid: &Grid1D, constants: &PhysicalConstants) -> Result<Vec<f64>> {
        self.validate(grid)?;
        Ok(match self {
            PotentialSpec::InfiniteWell => vec![0.0; grid.n_points()],
            PotentialSpec::Harmonic { omega } => grid
                .points()
                .into_iter()
                .map(|x| 0.5 * constants.mass() * omega * omega * x * x)
                .collect(),
            PotentialSpec::DoubleWell {
                barrier_height,
                barrier_half_width,
            } => {
                let c = grid.center();
                grid.points()
                    .into_iter()
                    .map(|x| {
                        if (x - c).abs() < *barrier_half_width {
                            *barrier_height
                        } else {
                            0.0
                        }
                    })
                    .collect()
            }
            PotentialSpec::Tabulated(values) => values.clone(),
        })
    }
}

/// Real symmetric tridiagonal Hamiltonian on the grid.
///
/// Only interior points are dynamical; the endpoints are pinned to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteHamiltonian {
    grid: Grid1D,
    constants: PhysicalConstants,
    diagonal: Vec<f64>,
    off_diagonal: f64,
}

pub fn build_hamiltonian(
    grid: &Grid1D,
    potential: &PotentialSpec,
    constants: &PhysicalConstants,
) -> Result<DiscreteHamiltonian> {
    let u = potential.sample(grid, constants)?;
    let h2 = grid.spacing() * grid.spacing();
    let kinetic = constants.hbar() * constants.hbar() / (constants.mass() * h2);
    Ok(DiscreteHamiltonian {
        grid: *grid,
        constants: *constants,
        diagonal: u.into_iter().map(|v| kinetic + v).collect(),
        off_diagonal: -0.5 * kinetic,
    })
}

impl DiscreteHamiltonian {
    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn constants(&self) -> &PhysicalConstants {
        &self.constants
    }

    /// `ħ²/(m h²) + U(x_i)` for every grid point, walls included.
    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// `−ħ²/(2 m h²)`.
    pub fn off_diagonal(&self) -> f64 {
        self.off_diagonal
    }

    /// The same operator with `U → U − energy`.
    pub fn shifted(&self, energy: f64) -> Self {
        Self {
            diagonal: self.diagonal.iter().map(|d| d - energy).collect(),
            ..self.clone()
        }
    }

    pub(crate) fn interior_matrix(&self) -> SymTridiagonal {
        let n = self.grid.n_points();
        SymTridiagonal {
            diag: self.diagonal[1..n - 1].to_vec(),
            off: vec![self.off_diagonal; n - 3],
        }
    }

    /// Tridiagonal product on raw samples; wall values are treated as zero.
    pub(crate) fn apply_slice(&self, psi: &[C64], out: &mut [C64]) {
        let n = psi.len();
        out[0] = C64::new(0.0, 0.0);
        out[n - 1] = C64::new(0.0, 0.0);
        for i in 1..n - 1 {
            let mut acc = psi[i] * self.diagonal[i];
            if i > 1 {
                acc += psi[i - 1] * self.off_diagonal;
            }
            if i + 2 < n {
                acc += psi[i + 1] * self.off_diagonal;
            }
            out[i] = acc;
        }
    }

    /// Rayleigh quotient `⟨ψ, Hψ⟩ / ⟨ψ, ψ⟩`.
    pub fn rayleigh_quotient(&self, psi: &ScalarField) -> Result<f64> {
        let hpsi = apply_hamiltonian(self, psi)?;
        let num = crate::field::inner_product(psi, &hpsi)?;
        Ok(num.re / psi.norm_sqr())
    }
}

/// `Hψ` with hard walls.
pub fn apply_hamiltonian(h: &DiscreteHamiltonian, psi: &ScalarField) -> Result<ScalarField> {
    h.grid.ensure_same(psi.grid(), "apply_hamiltonian")?;
    let mut out = vec![C64::new(0.0, 0.0); psi.values().len()];
    h.apply_slice(psi.values(), &mut out);
    ScalarField::new(h.grid, out)
}

/// Lowest eigenpairs of the discrete Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    hbar: f64,
    energies: Vec<f64>,
    states: Vec<ScalarField>,
    residuals: Vec<f64>,
}

impl Spectrum {
    /// Ascending eigenvalues `E_n`.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Orthonormal eigenfunctions `ψ_n`, in energy order.
    pub fn states(&self) -> &[ScalarField] {
        &self.states
    }

    pub fn count(&self) -> usize {
        self.energies.len()
    }

    /// ħ of the Hamiltonian this spectrum came from.
    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// `‖Hψ_n − E_n ψ_n‖` for every retained pair.
    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn grid(&self) -> &Grid1D {
        self.states[0].grid()
    }

    /// Keeps the lowest `k` pairs.
    pub fn truncated(&self, k: usize) -> Result<Spectrum> {
        if k == 0 || k > self.count() {
            return Err(Error::invalid(format!(
                "cannot keep {k} of {} eigenpairs",
                self.count()
            )));
        }
        Ok(Spectrum {
            hbar: self.hbar,
            energies: self.energies[..k].to_vec(),
            states: self.states[..k].to_vec(),
            residuals: self.residuals[..k].to_vec(),
        })
    }
}

pub fn solve_spectrum(h: &DiscreteHamiltonian, k: usize) -> Result<Spectrum> {
    solve_spectrum_with(h, k, Execution::default())
}

/// [`solve_spectrum`] with an explicit execution policy.
///
/// Each eigenvector has its global sign fixed so that the first component
/// (scanning from `x_min`) above `1e-6` of its peak is positive.
pub fn solve_spectrum_with(h: &DiscreteHamiltonian, k: usize, exec: Execution) -> Result<Spectrum> {
    let grid = h.grid;
    let interior = grid.interior();
    if k == 0 || k > interior {
        return Err(Error::invalid(format!(
            "requested {k} eigenpairs but the grid has {interior} interior points"
        )));
    }
    let t = h.interior_matrix();
    let (energies, vectors) = t.lowest_eigenpairs(k, exec)?;
    let scale = 1.0 / grid.spacing().sqrt();

    let states: Vec<ScalarField> = exec.map(k, |j| {
        let v = &vectors[j];
        let peak = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let sign = v.iter().find(|x| x.abs() > 1e-6 * peak).map_or(1.0, |x| x.signum());
        let mut values = Vec::with_capacity(grid.n_points());
        values.push(C64::new(0.0, 0.0));
        values.extend(v.iter().map(|x| C64::new(sign * scale * x, 0.0)));
        values.push(C64::new(0.0, 0.0));
        ScalarField::new(grid, values).expect("length matches grid")
    });

    let residuals = exec.try_map(k, |j| {
        let hpsi = apply_hamiltonian(h, &states[j])?;
        let r = hpsi.combine(C64::new(1.0, 0.0), &states[j], C64::new(-energies[j], 0.0))?;
        Ok::<f64, Error>(r.norm())
    })?;
    for (j, (&r, &e)) in residuals.iter().zip(&energies).enumerate() {
        if !(r <= tol::EIGEN_RESIDUAL * (1.0 + e.abs())) {
            return Err(Error::NoConvergence {
                index: j,
                iterations: 0,
                residual: r,
            });
        }
    }
    let (dev, i, j) = orthonormality_defect(&states)?;
    if dev > tol::ALGEBRAIC {
        return Err(Error::numeric(
            "solve_spectrum",
            format!("eigenvectors ({i}, {j}) deviate from orthonormality by {dev:.3e}"),
        ));
    }
    Ok(Spectrum {
        hbar: h.constants.hbar(),
        energies,
        states,
        residuals,
    })
}
