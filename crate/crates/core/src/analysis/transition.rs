use super::require_normalized;
use crate::error::{Error, Result};
use crate::field::{basis_matrix, kernel_from_product, CoefficientMatrix, KernelField};
use crate::hamiltonian::Spectrum;
use crate::tol;

/// Eigenbasis amplitudes with the fraction of `‖Ψ‖²` they capture.
#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    pub coefficients: CoefficientMatrix,
    pub captured_weight: f64,
}

/// `c_{n,m} = ∬ ψ_n*(x) ψ_m(y) Ψ(x, y) dx dy` for the lowest `k` levels,
/// without a truncation check.
pub fn project_onto_eigenbasis(psi: &KernelField, spectrum: &Spectrum, k: usize) -> Result<Expansion> {
    if k == 0 || k > spectrum.count() {
        return Err(Error::Dimension {
            context: "eigenbasis_coefficients",
            expected: spectrum.count(),
            found: k,
        });
    }
    spectrum.grid().ensure_same(psi.grid(), "eigenbasis_coefficients")?;
    let b = basis_matrix(&spectrum.states()[..k]);
    let h2 = psi.grid().spacing().powi(2);
    let c = (b.adjoint() * psi.values() * &b).scale(h2);
    let coefficients = CoefficientMatrix::new(c)?;
    let captured_weight = coefficients.weight() / psi.norm_sqr();
    Ok(Expansion {
        coefficients,
        captured_weight,
    })
}

/// Eigenbasis expansion of a normalized kernel; fails with
/// [`Error::Truncation`] when the retained levels capture less than 0.999
/// of the weight.
pub fn eigenbasis_coefficients(psi: &KernelField, spectrum: &Spectrum, k: usize) -> Result<Expansion> {
    require_normalized(psi, "eigenbasis_coefficients")?;
    let e = project_onto_eigenbasis(psi, spectrum, k)?;
    if e.captured_weight < tol::CAPTURED_WEIGHT {
        return Err(Error::Truncation {
            captured: e.captured_weight,
            deficit: 1.0 - e.captured_weight,
        });
    }
    Ok(e)
}

/// Level statistics of a coefficient matrix.
///
/// * `probabilities[m] = Σ_n |c_{n,m}|²`
/// * `weighted_shifts[m] = Σ_n |c_{n,m}|² (E_n − E_m)`
/// * `energy_shifts[m] = weighted_shifts[m] / probabilities[m]`, the energy
///   change given that level `m` is reached (zero when `p_m = 0`)
/// * `expected_shift = Σ_m p_m · energy_shifts[m]`
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionReport {
    pub probabilities: Vec<f64>,
    pub energy_shifts: Vec<f64>,
    pub weighted_shifts: Vec<f64>,
    pub expected_shift: f64,
}

pub fn transition_probabilities(c: &CoefficientMatrix, spectrum: &Spectrum) -> Result<TransitionReport> {
    let k = c.dim();
    if k > spectrum.count() {
        return Err(Error::Dimension {
            context: "transition_probabilities",
            expected: spectrum.count(),
            found: k,
        });
    }
    let e = spectrum.energies();
    let mut probabilities = vec![0.0; k];
    let mut weighted_shifts = vec![0.0; k];
    for m in 0..k {
        for n in 0..k {
            let w = c.get(n, m).norm_sqr();
            probabilities[m] += w;
            weighted_shifts[m] += w * (e[n] - e[m]);
        }
    }
    let energy_shifts: Vec<f64> = weighted_shifts
        .iter()
        .zip(&probabilities)
        .map(|(s, p)| if *p > 0.0 { s / p } else { 0.0 })
        .collect();
    let expected_shift = probabilities.iter().zip(&energy_shifts).map(|(p, s)| p * s).sum();
    Ok(TransitionReport {
        probabilities,
        energy_shifts,
        weighted_shifts,
        expected_shift,
    })
}

/// Result of collapsing onto level `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct Collapse {
    pub kernel: KernelField,
    pub probability: f64,
    pub energy_shift: f64,
}

/// Replaces `Ψ` by `ψ_m(x) ψ_m*(y)` and reports `p_m` and the energy change.
pub fn collapse(psi: &KernelField, spectrum: &Spectrum, m: usize) -> Result<Collapse> {
    require_normalized(psi, "collapse")?;
    if m >= spectrum.count() {
        return Err(Error::invalid(format!(
            "level {m} is outside the {} retained levels",
            spectrum.count()
        )));
    }
    let e = project_onto_eigenbasis(psi, spectrum, spectrum.count())?;
    let report = transition_probabilities(&e.coefficients, spectrum)?;
    let probability = report.probabilities[m];
    if probability <= tol::ZERO_PROBABILITY {
        return Err(Error::ZeroProbability { level: m, probability });
    }
    let psi_m = &spectrum.states()[m];
    Ok(Collapse {
        kernel: kernel_from_product(psi_m, psi_m)?,
        probability,
        energy_shift: report.energy_shifts[m],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{entropy, hermiticity_defect};
    use crate::field::kernel_from_coefficients;
    use crate::grid::{Grid1D, PhysicalConstants};
    use crate::hamiltonian::{build_hamiltonian, solve_spectrum, PotentialSpec};
    use crate::C64;

    fn spectrum() -> Spectrum {
        let g = Grid1D::new(0.0, 1.0, 101).unwrap();
        let h = build_hamiltonian(&g, &PotentialSpec::InfiniteWell, &PhysicalConstants::default()).unwrap();
        solve_spectrum(&h, 4).unwrap()
    }

    fn wave_block() -> CoefficientMatrix {
        CoefficientMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]).unwrap()
    }

    #[test]
    fn basis_element_expands_to_single_entry() {
        let s = spectrum();
        let k = kernel_from_product(&s.states()[1], &s.states()[1]).unwrap();
        let e = eigenbasis_coefficients(&k, &s, 4).unwrap();
        for n in 0..4 {
            for m in 0..4 {
                let target = if (n, m) == (1, 1) { 1.0 } else { 0.0 };
                assert!((e.coefficients.get(n, m) - target).norm() <= 1e-8);
            }
        }
    }

    #[test]
    fn wave_kernel_expands_to_uniform_block() {
        let s = spectrum();
        let k = kernel_from_coefficients(&wave_block(), &s.states()[..2]).unwrap();
        let e = eigenbasis_coefficients(&k, &s, 2).unwrap();
        assert!(e.coefficients.max_abs_diff(&wave_block()) <= 1e-8);
        assert!(e.coefficients.is_hermitian());
    }

    #[test]
    fn truncation_is_reported_with_deficit() {
        let s = spectrum();
        let k = kernel_from_product(&s.states()[3], &s.states()[3]).unwrap();
        match eigenbasis_coefficients(&k, &s, 2) {
            Err(Error::Truncation { deficit, .. }) => assert!((deficit - 1.0).abs() < 1e-8),
            other => panic!("expected truncation, got {other:?}"),
        }
    }

    #[test]
    fn single_transition() {
        let s = spectrum();
        let c = CoefficientMatrix::from_fn(3, |n, m| C64::new(if (n, m) == (2, 0) { 1.0 } else { 0.0 }, 0.0)).unwrap();
        let r = transition_probabilities(&c, &s).unwrap();
        assert_eq!(r.probabilities, vec![1.0, 0.0, 0.0]);
        assert!((r.energy_shifts[0] - (s.energies()[2] - s.energies()[0])).abs() < 1e-12);
    }

    #[test]
    fn wave_block_statistics() {
        let s = spectrum();
        let r = transition_probabilities(&wave_block(), &s).unwrap();
        let gap = s.energies()[1] - s.energies()[0];
        assert!((r.probabilities[0] - 0.5).abs() < 1e-15 && (r.probabilities[1] - 0.5).abs() < 1e-15);
        assert!((r.energy_shifts[0] - gap / 2.0).abs() < 1e-12);
        assert!((r.energy_shifts[1] + gap / 2.0).abs() < 1e-12);
        assert!((r.weighted_shifts[0] - gap / 4.0).abs() < 1e-12);
        assert!(r.expected_shift.abs() < 1e-9);
    }

    #[test]
    fn collapse_examples() {
        let s = spectrum();
        let gap = s.energies()[1] - s.energies()[0];

        let fixed = kernel_from_product(&s.states()[2], &s.states()[2]).unwrap();
        let c = collapse(&fixed, &s, 2).unwrap();
        assert!(c.kernel.max_abs_diff(&fixed) < 1e-12);
        assert!((c.probability - 1.0).abs() < 1e-8 && c.energy_shift.abs() < 1e-8);

        let wave = kernel_from_coefficients(&wave_block(), &s.states()[..2]).unwrap();
        let c = collapse(&wave, &s, 0).unwrap();
        assert!((c.probability - 0.5).abs() < 1e-8);
        assert!((c.energy_shift - gap / 2.0).abs() < 1e-8 * gap);
        assert!(entropy(&c.kernel).unwrap() < 1e-9);
        assert!(hermiticity_defect(&c.kernel) <= 1e-12);

        let r = 1.0 / 2f64.sqrt();
        let particle = CoefficientMatrix::from_real_rows(&[&[r, 0.0], &[0.0, r]]).unwrap();
        let pk = kernel_from_coefficients(&particle, &s.states()[..2]).unwrap();
        let c = collapse(&pk, &s, 1).unwrap();
        assert!((c.probability - 0.5).abs() < 1e-8 && c.energy_shift.abs() < 1e-8);
        assert!(
            c.kernel
                .max_abs_diff(&kernel_from_product(&s.states()[1], &s.states()[1]).unwrap())
                < 1e-12
        );

        assert!(matches!(
            collapse(&pk, &s, 3),
            Err(Error::ZeroProbability { level: 3, .. })
        ));
    }
}
