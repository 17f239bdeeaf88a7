//! Measurement-free analysis of bipartite kernels: Schmidt structure,
//! entropy, reduced densities, expectation values, eigenbasis expansions,
//! transition statistics and collapse.

mod observable;
mod schmidt;
mod transition;

pub use observable::{expectation, position_density, Observable};
pub use schmidt::{
    entropy, entropy_of_weights, reduced_density, schmidt_coefficients, schmidt_decompose, ReducedDensity,
    SchmidtDecomposition, Side,
};
pub use transition::{
    collapse, eigenbasis_coefficients, project_onto_eigenbasis, transition_probabilities, Collapse, Expansion,
    TransitionReport,
};

use crate::field::KernelField;

/// `max |Ψ(x_i, y_j) − Ψ*(y_j, x_i)|`; zero exactly for Hermitian kernels.
pub fn hermiticity_defect(psi: &KernelField) -> f64 {
    psi.hermiticity_defect()
}

fn require_normalized(psi: &KernelField, context: &str) -> crate::Result<()> {
    if psi.is_normalized() {
        Ok(())
    } else {
        Err(crate::Error::Invalid(format!(
            "{context} requires a normalized kernel (‖Ψ‖² = {})",
            psi.norm_sqr()
        )))
    }
}
