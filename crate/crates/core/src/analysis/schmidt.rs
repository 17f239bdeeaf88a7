use nalgebra::{DMatrix, SymmetricEigen, SVD};

use super::require_normalized;
use crate::error::{Error, Result};
use crate::field::{KernelField, ScalarField};
use crate::tol;
use crate::C64;

const MAX_SWEEPS: usize = 10_000;

/// `Ψ(x, y) = Σ μ_n · left_n(x) · right_n*(y)` with descending `μ_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtDecomposition {
    pub coefficients: Vec<f64>,
    pub left_modes: Vec<ScalarField>,
    pub right_modes: Vec<ScalarField>,
}

impl SchmidtDecomposition {
    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    pub fn entropy(&self) -> f64 {
        entropy_of_weights(self.coefficients.iter().map(|m| m * m))
    }

    /// Rebuilds the kernel from its modes.
    pub fn reconstruct(&self) -> Result<KernelField> {
        let grid = *self.left_modes[0].grid();
        let n = grid.n_points();
        let mut values = DMatrix::zeros(n, n);
        for ((mu, l), r) in self.coefficients.iter().zip(&self.left_modes).zip(&self.right_modes) {
            for j in 0..n {
                let rj = r.values()[j].conj() * *mu;
                for i in 0..n {
                    values[(i, j)] += l.values()[i] * rj;
                }
            }
        }
        KernelField::new(grid, values)
    }
}

fn keep_above_cutoff(sorted_desc: &[f64]) -> usize {
    let Some(&first) = sorted_desc.first() else {
        return 0;
    };
    sorted_desc
        .iter()
        .take_while(|&&m| m > 0.0 && m >= tol::SCHMIDT_CUTOFF * first)
        .count()
}

fn svd(psi: &KernelField, vectors: bool) -> Result<SVD<C64, nalgebra::Dyn, nalgebra::Dyn>> {
    SVD::try_new(psi.operator_matrix(), vectors, vectors, f64::EPSILON, MAX_SWEEPS).ok_or_else(|| {
        Error::numeric(
            "schmidt_decompose",
            format!("SVD did not converge in {MAX_SWEEPS} sweeps"),
        )
    })
}

/// Singular value decomposition of the quadrature-weighted kernel.
///
/// Coefficients below `1e-12 · μ_1` are dropped. Modes are normalized under
/// the grid inner product.
pub fn schmidt_decompose(psi: &KernelField) -> Result<SchmidtDecomposition> {
    require_normalized(psi, "schmidt_decompose")?;
    let grid = *psi.grid();
    let n = grid.n_points();
    let d = svd(psi, true)?;
    let u = d.u.as_ref().expect("requested");
    let v_t = d.v_t.as_ref().expect("requested");

    let mut order: Vec<usize> = (0..d.singular_values.len()).collect();
    order.sort_by(|&a, &b| d.singular_values[b].total_cmp(&d.singular_values[a]));
    let sorted: Vec<f64> = order.iter().map(|&k| d.singular_values[k]).collect();
    let rank = keep_above_cutoff(&sorted);

    let scale = 1.0 / grid.spacing().sqrt();
    let mut left_modes = Vec::with_capacity(rank);
    let mut right_modes = Vec::with_capacity(rank);
    for &k in &order[..rank] {
        let l = (0..n).map(|i| u[(i, k)] * scale).collect();
        let r = (0..n).map(|j| v_t[(k, j)].conj() * scale).collect();
        left_modes.push(ScalarField::new(grid, l)?);
        right_modes.push(ScalarField::new(grid, r)?);
    }
    Ok(SchmidtDecomposition {
        coefficients: sorted[..rank].to_vec(),
        left_modes,
        right_modes,
    })
}

/// Schmidt coefficients only (no modes), descending, after the cutoff.
pub fn schmidt_coefficients(psi: &KernelField) -> Result<Vec<f64>> {
    require_normalized(psi, "schmidt_coefficients")?;
    let d = svd(psi, false)?;
    let mut mu: Vec<f64> = d.singular_values.iter().copied().collect();
    mu.sort_by(|a, b| b.total_cmp(a));
    let rank = keep_above_cutoff(&mu);
    mu.truncate(rank);
    Ok(mu)
}

/// `−Σ w ln w` over the positive weights, with `0 · ln 0 = 0`.
pub fn entropy_of_weights(weights: impl IntoIterator<Item = f64>) -> f64 {
    let s: f64 = weights.into_iter().filter(|w| *w > 0.0).map(|w| -w * w.ln()).sum();
    s.max(0.0)
}

/// Entanglement entropy `S = −Σ μ_n² ln μ_n²` from the Schmidt coefficients.
pub fn entropy(psi: &KernelField) -> Result<f64> {
    Ok(entropy_of_weights(
        schmidt_coefficients(psi)?.into_iter().map(|m| m * m),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Trace over `y`, leaving an operator on `x`.
    X,
    /// Trace over `x`, leaving an operator on `y`.
    Y,
}

/// Reduced density as an operator matrix on the grid (quadrature weights
/// folded in), so its plain trace is `‖Ψ‖²`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDensity {
    pub matrix: DMatrix<C64>,
    pub trace: f64,
}

impl ReducedDensity {
    pub fn hermiticity_defect(&self) -> f64 {
        crate::field::hermiticity_defect_of(&self.matrix)
    }

    /// Ascending real eigenvalues.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let n = self.matrix.nrows();
        let eig = SymmetricEigen::try_new(self.matrix.clone(), f64::EPSILON, MAX_SWEEPS * n.max(1))
            .ok_or_else(|| Error::numeric("reduced density", "Hermitian eigensolver did not converge"))?;
        let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        values.sort_by(f64::total_cmp);
        Ok(values)
    }

    /// von Neumann entropy `−tr ϱ ln ϱ`; eigenvalues below the Schmidt
    /// cutoff (squared, relative to the largest) count as zero.
    pub fn entropy(&self) -> Result<f64> {
        let values = self.eigenvalues()?;
        let top = values.last().copied().unwrap_or(0.0);
        let floor = tol::SCHMIDT_CUTOFF * tol::SCHMIDT_CUTOFF * top;
        Ok(entropy_of_weights(values.into_iter().filter(|&w| w >= floor)))
    }
}

/// `ϱ_x(i, j) = Σ_k Ψ(x_i, y_k) Ψ*(x_j, y_k) · spacing`, or the `y` analogue,
/// returned in operator form (one more factor of `spacing`).
pub fn reduced_density(psi: &KernelField, side: Side) -> Result<ReducedDensity> {
    require_normalized(psi, "reduced_density")?;
    let k = psi.operator_matrix();
    let matrix = match side {
        Side::X => &k * k.adjoint(),
        Side::Y => k.transpose() * k.map(|v| v.conj()),
    };
    let trace = matrix.diagonal().iter().map(|v| v.re).sum();
    Ok(ReducedDensity { matrix, trace })
}
