//! Wave functions, bipartite kernels and coefficient matrices on a grid.
//!
//! Quadrature is uniform: every grid point carries weight `spacing`. Under
//! hard walls the endpoints hold zero amplitude, so this matches the
//! trapezoid rule for every evolved or diagonalized field.
//!
//! Kernels are stored as `n × n` matrices with the row index running over
//! `x` and the column index over `y`. Where a kernel acts as an operator
//! (Schmidt decomposition, traces, expectation values) the matrix used is
//! `Ψ(x_i, y_j) · spacing`, so continuum formulas become plain matrix
//! algebra.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::tol;
use crate::C64;

/// Complex wave function sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid1D,
    values: Vec<C64>,
    normalized: bool,
}

impl ScalarField {
    pub fn new(grid: Grid1D, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::Dimension {
                context: "ScalarField::new",
                expected: grid.n_points(),
                found: values.len(),
            });
        }
        let norm_sqr = values.iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.spacing();
        Ok(Self {
            grid,
            values,
            normalized: (norm_sqr - 1.0).abs() <= tol::STRUCTURAL,
        })
    }

    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> C64) -> Self {
        let values = grid.points().into_iter().map(f).collect();
        Self::new(grid, values).expect("length matches grid")
    }

    pub fn from_real(grid: Grid1D, f: impl Fn(f64) -> f64) -> Self {
        Self::from_fn(grid, |x| C64::new(f(x), 0.0))
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self::new(grid, vec![C64::new(0.0, 0.0); grid.n_points()]).expect("length matches grid")
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    /// Verdict of the normalization check made at construction.
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// `‖ψ‖² = Σ |ψ_i|² · spacing`.
    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.spacing()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::invalid("cannot normalize a zero field"));
        }
        Ok(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, a: C64) -> Self {
        let values = self.values.iter().map(|v| v * a).collect();
        Self::new(self.grid, values).expect("same length")
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: C64, other: &ScalarField, b: C64) -> Result<Self> {
        self.grid.ensure_same(&other.grid, "ScalarField::combine")?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(u, v)| a * u + b * v)
            .collect();
        Self::new(self.grid, values)
    }

    pub fn conj(&self) -> Self {
        let values = self.values.iter().map(|v| v.conj()).collect();
        Self::new(self.grid, values).expect("same length")
    }

    /// Pointwise `|ψ(x_i)|²`.
    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// `⟨f, g⟩ = Σ f*(x_i) g(x_i) · spacing`.
pub fn inner_product(f: &ScalarField, g: &ScalarField) -> Result<C64> {
    f.grid.ensure_same(&g.grid, "inner_product")?;
    let sum: C64 = f.values.iter().zip(&g.values).map(|(a, b)| a.conj() * b).sum();
    Ok(sum * f.grid.spacing())
}

/// Complex kernel `Ψ(x_i, y_j)` on the product grid.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelField {
    grid: Grid1D,
    values: DMatrix<C64>,
    hermitian: bool,
    normalized: bool,
}

impl KernelField {
    pub fn new(grid: Grid1D, values: DMatrix<C64>) -> Result<Self> {
        let n = grid.n_points();
        if values.nrows() != n || values.ncols() != n {
            return Err(Error::Dimension {
                context: "KernelField::new",
                expected: n,
                found: if values.nrows() != n {
                    values.nrows()
                } else {
                    values.ncols()
                },
            });
        }
        let hermitian = hermiticity_defect_of(&values) <= tol::STRUCTURAL;
        let norm_sqr = values.iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.spacing().powi(2);
        Ok(Self {
            grid,
            values,
            hermitian,
            normalized: (norm_sqr - 1.0).abs() <= tol::STRUCTURAL,
        })
    }

    pub fn zeros(grid: Grid1D) -> Self {
        let n = grid.n_points();
        Self::new(grid, DMatrix::zeros(n, n)).expect("square")
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    /// Raw samples, rows indexed by `x`, columns by `y`.
    pub fn values(&self) -> &DMatrix<C64> {
        &self.values
    }

    pub fn into_values(self) -> DMatrix<C64> {
        self.values
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.values[(i, j)]
    }

    /// Verdict of the `Ψ*(x, y) = Ψ(y, x)` check made at construction.
    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// `‖Ψ‖² = Σ |Ψ_ij|² · spacing²`.
    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.spacing().powi(2)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// The kernel as an operator matrix: `Ψ(x_i, y_j) · spacing`.
    pub fn operator_matrix(&self) -> DMatrix<C64> {
        self.values.scale(self.grid.spacing())
    }

    pub fn scaled(&self, a: C64) -> Self {
        Self::new(self.grid, self.values.map(|v| v * a)).expect("same shape")
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::invalid("cannot normalize a zero kernel"));
        }
        Ok(self.scaled(C64::new(1.0 / n, 0.0)))
    }

    /// `max |Ψ(x_i, y_j) − Ψ*(y_j, x_i)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect_of(&self.values)
    }

    pub fn max_abs_diff(&self, other: &KernelField) -> f64 {
        self.values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn hermiticity_defect_of(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for j in 0..n {
        for i in j..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Product kernel `Ψ(x, y) = ψ(x) φ*(y)`.
pub fn kernel_from_product(psi: &ScalarField, phi: &ScalarField) -> Result<KernelField> {
    psi.grid.ensure_same(&phi.grid, "kernel_from_product")?;
    let n = psi.grid.n_points();
    let values = DMatrix::from_fn(n, n, |i, j| psi.values[i] * phi.values[j].conj());
    KernelField::new(psi.grid, values)
}

/// Square matrix of expansion amplitudes `c_{n,m}` in a finite basis.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix {
    entries: DMatrix<C64>,
    hermitian: bool,
    normalized: bool,
}

impl CoefficientMatrix {
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return Err(Error::Dimension {
                context: "CoefficientMatrix::new",
                expected: entries.nrows(),
                found: entries.ncols(),
            });
        }
        let hermitian = hermiticity_defect_of(&entries) <= tol::STRUCTURAL;
        let weight = entries.iter().map(|v| v.norm_sqr()).sum::<f64>();
        Ok(Self {
            entries,
            hermitian,
            normalized: (weight - 1.0).abs() <= tol::STRUCTURAL,
        })
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        Self::new(DMatrix::from_fn(dim, dim, f))
    }

    /// Real coefficients given row by row.
    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::invalid("coefficient rows must form a square matrix"));
        }
        Self::from_fn(dim, |n, m| C64::new(rows[n][m], 0.0))
    }

    pub fn diagonal(values: &[C64]) -> Result<Self> {
        Self::from_fn(values.len(), |n, m| if n == m { values[n] } else { C64::new(0.0, 0.0) })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn get(&self, n: usize, m: usize) -> C64 {
        self.entries[(n, m)]
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// `Σ |c_{n,m}|²`.
    pub fn weight(&self) -> f64 {
        self.entries.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect_of(&self.entries)
    }

    pub fn normalized(&self) -> Result<Self> {
        let w = self.weight().sqrt();
        if w == 0.0 || !w.is_finite() {
            return Err(Error::invalid("cannot normalize a zero coefficient matrix"));
        }
        Self::new(self.entries.unscale(w))
    }

    pub fn max_abs_diff(&self, other: &CoefficientMatrix) -> f64 {
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Worst deviation of the Gram matrix of `basis` from the identity, with
/// the offending pair.
pub fn orthonormality_defect(basis: &[ScalarField]) -> Result<(f64, usize, usize)> {
    let mut worst = (0.0, 0, 0);
    for (i, f) in basis.iter().enumerate() {
        for (j, g) in basis.iter().enumerate().skip(i) {
            let target = if i == j { 1.0 } else { 0.0 };
            let dev = (inner_product(f, g)? - target).norm();
            if dev > worst.0 {
                worst = (dev, i, j);
            }
        }
    }
    Ok(worst)
}

/// Columns of the returned `n × k` matrix are the basis functions.
pub(crate) fn basis_matrix(basis: &[ScalarField]) -> DMatrix<C64> {
    let n = basis[0].grid.n_points();
    DMatrix::from_fn(n, basis.len(), |i, k| basis[k].values[i])
}

/// `Ψ(x, y) = Σ c_{n,m} ψ_n(x) ψ_m*(y)` over an orthonormal basis.
pub fn kernel_from_coefficients(c: &CoefficientMatrix, basis: &[ScalarField]) -> Result<KernelField> {
    if basis.len() != c.dim() {
        return Err(Error::Dimension {
            context: "kernel_from_coefficients",
            expected: c.dim(),
            found: basis.len(),
        });
    }
    let grid = *basis[0].grid();
    for f in basis {
        grid.ensure_same(f.grid(), "kernel_from_coefficients")?;
    }
    let (dev, i, j) = orthonormality_defect(basis)?;
    if dev > tol::ALGEBRAIC {
        return Err(Error::NotOrthonormal { i, j, deviation: dev });
    }
    let b = basis_matrix(basis);
    let values = &b * &c.entries * b.adjoint();
    KernelField::new(grid, values)
}
