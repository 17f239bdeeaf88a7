#![allow(dead_code)]

use bipartite_core::hamiltonian::{build_hamiltonian, solve_spectrum, DiscreteHamiltonian, PotentialSpec, Spectrum};
use bipartite_core::{CoefficientMatrix, Grid1D, PhysicalConstants, ScalarField, C64};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn well(l: f64, n: usize, k: usize) -> (DiscreteHamiltonian, Spectrum) {
    let g = Grid1D::new(0.0, l, n).unwrap();
    let h = build_hamiltonian(&g, &PotentialSpec::InfiniteWell, &PhysicalConstants::default()).unwrap();
    let s = solve_spectrum(&h, k).unwrap();
    (h, s)
}

pub fn random_c64(rng: &mut impl Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Random Hermitian coefficient matrix with unit total weight.
pub fn random_hermitian(rng: &mut impl Rng, dim: usize) -> CoefficientMatrix {
    let a = DMatrix::from_fn(dim, dim, |_, _| random_c64(rng));
    let h = (&a + a.adjoint()).scale(0.5);
    CoefficientMatrix::new(h).unwrap().normalized().unwrap()
}

/// Random (not necessarily Hermitian) normalized coefficient matrix.
pub fn random_general(rng: &mut impl Rng, dim: usize) -> CoefficientMatrix {
    CoefficientMatrix::new(DMatrix::from_fn(dim, dim, |_, _| random_c64(rng)))
        .unwrap()
        .normalized()
        .unwrap()
}

/// Random normalized field vanishing at the walls.
pub fn random_field(rng: &mut impl Rng, grid: Grid1D) -> ScalarField {
    let n = grid.n_points();
    let mut v: Vec<C64> = (0..n).map(|_| random_c64(rng)).collect();
    v[0] = C64::new(0.0, 0.0);
    v[n - 1] = C64::new(0.0, 0.0);
    ScalarField::new(grid, v).unwrap().normalized().unwrap()
}

/// Random Hermitian dense grid operator.
pub fn random_observable(rng: &mut impl Rng, n: usize) -> DMatrix<C64> {
    let a = DMatrix::from_fn(n, n, |_, _| random_c64(rng));
    let h = (&a + a.adjoint()).scale(0.5);
    // Exact Hermitian symmetry of the stored entries.
    DMatrix::from_fn(n, n, |i, j| if i <= j { h[(i, j)] } else { h[(j, i)].conj() })
}

/// `h · Σ ψ_i* (O ψ)_i` evaluated directly.
pub fn direct_expectation(psi: &ScalarField, o: &DMatrix<C64>) -> C64 {
    let v = nalgebra::DVector::from_column_slice(psi.values());
    (v.adjoint() * o * &v)[(0, 0)] * psi.grid().spacing()
}

/// Eigenvalues of a 2×2 Hermitian matrix `[[a, b], [b*, d]]` in closed form.
pub fn hermitian_2x2_eigenvalues(a: f64, b: C64, d: f64) -> (f64, f64) {
    let mean = 0.5 * (a + d);
    let r = (0.25 * (a - d).powi(2) + b.norm_sqr()).sqrt();
    (mean - r, mean + r)
}
