use nalgebra::DMatrix;

use super::require_normalized;
use crate::error::{Error, Result};
use crate::field::{hermiticity_defect_of, KernelField, ScalarField};
use crate::grid::Grid1D;
use crate::hamiltonian::DiscreteHamiltonian;
use crate::tol;
use crate::C64;

/// Hermitian operator acting on grid samples.
#[derive(Debug, Clone, PartialEq)]
pub enum Observable {
    /// Multiplication by `x`.
    Position,
    /// Multiplication by a real function sampled on the grid.
    Function(Vec<f64>),
    /// The tridiagonal Hamiltonian, with hard walls.
    Hamiltonian(DiscreteHamiltonian),
    /// A dense matrix acting on grid sample vectors.
    Matrix(DMatrix<C64>),
}

impl Observable {
    fn validate(&self, grid: &Grid1D) -> Result<()> {
        let n = grid.n_points();
        match self {
            Observable::Position => Ok(()),
            Observable::Function(f) if f.len() != n => Err(Error::Dimension {
                context: "observable function",
                expected: n,
                found: f.len(),
            }),
            Observable::Function(f) if f.iter().any(|v| !v.is_finite()) => {
                Err(Error::invalid("observable function has non-finite values"))
            }
            Observable::Function(_) => Ok(()),
            Observable::Hamiltonian(h) => h.grid().ensure_same(grid, "observable Hamiltonian"),
            Observable::Matrix(m) => {
                if m.nrows() != n || m.ncols() != n {
                    return Err(Error::Dimension {
                        context: "observable matrix",
                        expected: n,
                        found: m.nrows(),
                    });
                }
                let scale = m.iter().fold(1.0_f64, |a, v| a.max(v.norm()));
                let defect = hermiticity_defect_of(m);
                if defect > tol::STRUCTURAL * scale {
                    Err(Error::invalid(format!(
                        "observable is not Hermitian (defect {defect:.3e})"
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }

    fn apply(&self, grid: &Grid1D, v: &[C64], out: &mut [C64]) {
        match self {
            Observable::Position => {
                for (i, (o, x)) in out.iter_mut().zip(v).enumerate() {
                    *o = x * grid.x(i);
                }
            }
            Observable::Function(f) => {
                for ((o, x), w) in out.iter_mut().zip(v).zip(f) {
                    *o = x * *w;
                }
            }
            Observable::Hamiltonian(h) => h.apply_slice(v, out),
            Observable::Matrix(m) => {
                for (i, o) in out.iter_mut().enumerate() {
                    *o = (0..v.len()).map(|j| m[(i, j)] * v[j]).sum();
                }
            }
        }
    }

    /// `⟨ψ|Ô|ψ⟩` for an ordinary wave function.
    pub fn expectation_in(&self, psi: &ScalarField) -> Result<f64> {
        self.validate(psi.grid())?;
        let mut out = vec![C64::new(0.0, 0.0); psi.values().len()];
        self.apply(psi.grid(), psi.values(), &mut out);
        let s: C64 = psi.values().iter().zip(&out).map(|(a, b)| a.conj() * b).sum();
        Ok(s.re * psi.grid().spacing())
    }
}

pub(crate) fn expectation_complex(psi: &KernelField, observable: &Observable) -> Result<C64> {
    require_normalized(psi, "expectation")?;
    let grid = psi.grid();
    observable.validate(grid)?;
    let k = psi.operator_matrix();
    let n = grid.n_points();
    let mut out = vec![C64::new(0.0, 0.0); n];
    let mut total = C64::new(0.0, 0.0);
    for col in k.column_iter() {
        let col = col.as_slice();
        observable.apply(grid, col, &mut out);
        total += col.iter().zip(&out).map(|(a, b)| a.conj() * b).sum::<C64>();
    }
    Ok(total)
}

/// `Tr[ϱ_Ψ† Ô ϱ_Ψ]` with `ϱ_Ψ` the quadrature-weighted kernel operator.
pub fn expectation(psi: &KernelField, observable: &Observable) -> Result<f64> {
    Ok(expectation_complex(psi, observable)?.re)
}

/// `d(x_i) = Σ_j |Ψ(x_i, y_j)|² · spacing`.
pub fn position_density(psi: &KernelField) -> Result<Vec<f64>> {
    require_normalized(psi, "position_density")?;
    let h = psi.grid().spacing();
    let v = psi.values();
    Ok((0..v.nrows())
        .map(|i| v.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>() * h)
        .collect())
}
