//! Time propagation of wave functions and bipartite kernels.
//!
//! Grid propagation uses the Cayley form of Crank–Nicolson,
//! `U = (1 + i dt H / 2ħ)⁻¹ (1 − i dt H / 2ħ)`, which is exactly unitary up to
//! the tridiagonal solve. A kernel step is `Ψ ← U Ψ U†`: `U` acts down every
//! column (the `x` index) and `Ū` along every row (the `y` index). Wall
//! samples are projected to zero before stepping.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::field::{CoefficientMatrix, KernelField, ScalarField};
use crate::hamiltonian::{DiscreteHamiltonian, Spectrum};
use crate::par::Execution;
use crate::tridiag::ComplexTridiagonalLu;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionParams {
    dt: f64,
    n_steps: usize,
    record_every: usize,
}

impl EvolutionParams {
    pub fn new(dt: f64, n_steps: usize, record_every: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid(format!("dt must be > 0, got {dt}")));
        }
        if n_steps == 0 {
            return Err(Error::invalid("n_steps must be ≥ 1"));
        }
        if record_every == 0 || record_every > n_steps {
            return Err(Error::invalid(format!(
                "record_every must lie in [1, n_steps = {n_steps}], got {record_every}"
            )));
        }
        Ok(Self {
            dt,
            n_steps,
            record_every,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn record_every(&self) -> usize {
        self.record_every
    }

    pub fn final_time(&self) -> f64 {
        self.dt * self.n_steps as f64
    }

    fn records(&self, step: usize) -> bool {
        step.is_multiple_of(self.record_every) || step == self.n_steps
    }
}

/// Owned snapshots with their times; includes `t = 0` and the final time.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T> {
    pub times: Vec<f64>,
    pub snapshots: Vec<T>,
}

impl<T> TimeSeries<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&T> {
        self.snapshots.last()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &T)> {
        self.times.iter().copied().zip(self.snapshots.iter())
    }
}

/// One Cayley step on the interior of a field.
#[derive(Debug, Clone)]
pub struct CayleyPropagator {
    diag: Vec<f64>,
    off: f64,
    beta: f64,
    lu: ComplexTridiagonalLu,
}

impl CayleyPropagator {
    /// Propagator for `exp(−i H dt / ħ)`.
    pub fn new(h: &DiscreteHamiltonian, dt: f64) -> Result<Self> {
        Self::with_beta(h, dt / (2.0 * h.constants().hbar()))
    }

    /// Complex conjugate propagator, `exp(+i H dt / ħ)`.
    pub fn conjugate(h: &DiscreteHamiltonian, dt: f64) -> Result<Self> {
        Self::with_beta(h, -dt / (2.0 * h.constants().hbar()))
    }

    fn with_beta(h: &DiscreteHamiltonian, beta: f64) -> Result<Self> {
        let n = h.grid().n_points();
        let diag: Vec<f64> = h.diagonal()[1..n - 1].to_vec();
        let off = h.off_diagonal();
        let a: Vec<C64> = diag.iter().map(|d| C64::new(1.0, beta * d)).collect();
        let b = vec![C64::new(0.0, beta * off); diag.len().saturating_sub(1)];
        let lu = ComplexTridiagonalLu::factor(&a, &b)?;
        Ok(Self { diag, off, beta, lu })
    }

    /// Advances a full-length sample vector (walls included) by one step.
    pub fn step(&self, psi: &mut [C64], scratch: &mut [C64]) {
        let n = psi.len();
        let interior = &psi[1..n - 1];
        let m = interior.len();
        let ib = C64::new(0.0, -self.beta);
        for i in 0..m {
            let mut hx = interior[i] * self.diag[i];
            if i > 0 {
                hx += interior[i - 1] * self.off;
            }
            if i + 1 < m {
                hx += interior[i + 1] * self.off;
            }
            scratch[i] = interior[i] + ib * hx;
        }
        self.lu.solve_in_place(&mut scratch[..m]);
        psi[0] = C64::new(0.0, 0.0);
        psi[n - 1] = C64::new(0.0, 0.0);
        psi[1..n - 1].copy_from_slice(&scratch[..m]);
    }
}

/// Schrödinger evolution `iħ ∂ψ/∂t = Hψ`.
pub fn evolve_schrodinger(
    psi0: &ScalarField,
    h: &DiscreteHamiltonian,
    p: &EvolutionParams,
) -> Result<TimeSeries<ScalarField>> {
    h.grid().ensure_same(psi0.grid(), "evolve_schrodinger")?;
    if !psi0.is_normalized() {
        return Err(Error::invalid(format!(
            "initial wave function must be normalized (‖ψ‖² = {})",
            psi0.norm_sqr()
        )));
    }
    let u = CayleyPropagator::new(h, p.dt)?;
    let grid = *psi0.grid();
    let mut psi = psi0.values().to_vec();
    let n = psi.len();
    psi[0] = C64::new(0.0, 0.0);
    psi[n - 1] = C64::new(0.0, 0.0);
    let mut scratch = vec![C64::new(0.0, 0.0); n];
    let mut series = TimeSeries {
        times: vec![0.0],
        snapshots: vec![ScalarField::new(grid, psi.clone())?],
    };
    for step in 1..=p.n_steps {
        u.step(&mut psi, &mut scratch);
        if p.records(step) {
            series.times.push(step as f64 * p.dt);
            series.snapshots.push(ScalarField::new(grid, psi.clone())?);
        }
    }
    Ok(series)
}

/// Kernel stepper realizing `Ψ ← U Ψ U†` as two sweeps of tridiagonal solves.
#[derive(Debug, Clone)]
pub struct BipartiteStepper {
    forward: CayleyPropagator,
    backward: CayleyPropagator,
    exec: Execution,
}

impl BipartiteStepper {
    pub fn new(h: &DiscreteHamiltonian, dt: f64, exec: Execution) -> Result<Self> {
        Ok(Self {
            forward: CayleyPropagator::new(h, dt)?,
            backward: CayleyPropagator::conjugate(h, dt)?,
            exec,
        })
    }

    /// One step in place. `values` rows index `x`, columns index `y`.
    pub fn step(&self, values: &mut DMatrix<C64>) {
        let n = values.nrows();
        // Column-major storage: each column (fixed y) is contiguous, so the
        // x sweep solves one column at a time.
        self.exec.for_each_chunk(values.as_mut_slice(), n, |_, col| {
            let mut scratch = vec![C64::new(0.0, 0.0); n];
            self.forward.step(col, &mut scratch);
        });
        self.sweep_rows(values);
    }

    /// Applies the conjugate propagator along `y` to every row at once,
    /// running the tridiagonal recurrences over whole columns.
    fn sweep_rows(&self, values: &mut DMatrix<C64>) {
        let n = values.nrows();
        let m = n - 2;
        let prop = &self.backward;
        let (lu_off, inv_den, upper) = (prop.lu.off(), prop.lu.inv_den(), prop.lu.upper());
        let ib = C64::new(0.0, -prop.beta);
        let data = values.as_mut_slice();
        let zero = C64::new(0.0, 0.0);
        data[..n].fill(zero);
        data[(n - 1) * n..].fill(zero);

        // Forward pass: explicit half step fused with elimination. `prev_old`
        // keeps the pre-step column j − 1.
        let mut prev_old = vec![zero; n];
        let mut cur_old = vec![zero; n];
        for j in 0..m {
            let col = j + 1;
            cur_old.copy_from_slice(&data[col * n..(col + 1) * n]);
            let (before, rest) = data.split_at_mut(col * n);
            let (current, after) = rest.split_at_mut(n);
            let next = if j + 1 < m { Some(&after[..n]) } else { None };
            let prev_new = if j > 0 { Some(&before[(col - 1) * n..]) } else { None };
            let d = prop.diag[j];
            for r in 0..n {
                let v = cur_old[r];
                let mut hx = v * d;
                if j > 0 {
                    hx += prev_old[r] * prop.off;
                }
                if let Some(nx) = next {
                    hx += nx[r] * prop.off;
                }
                let mut w = v + ib * hx;
                if let Some(p) = prev_new {
                    w -= lu_off[j - 1] * p[r];
                }
                current[r] = w * inv_den[j];
            }
            std::mem::swap(&mut prev_old, &mut cur_old);
        }
        for j in (0..m.saturating_sub(1)).rev() {
            let col = j + 1;
            let (head, tail) = data.split_at_mut((col + 1) * n);
            let current = &mut head[col * n..];
            let next = &tail[..n];
            let u = upper[j];
            for r in 0..n {
                current[r] -= u * next[r];
            }
        }
    }
}

/// Bipartite evolution `iħ ∂Ψ/∂t = (H(x) − H(y)) Ψ` on the grid.
pub fn evolve_bipartite_grid(
    psi0: &KernelField,
    h: &DiscreteHamiltonian,
    p: &EvolutionParams,
) -> Result<TimeSeries<KernelField>> {
    evolve_bipartite_grid_with(psi0, h, p, Execution::default())
}

pub fn evolve_bipartite_grid_with(
    psi0: &KernelField,
    h: &DiscreteHamiltonian,
    p: &EvolutionParams,
    exec: Execution,
) -> Result<TimeSeries<KernelField>> {
    h.grid().ensure_same(psi0.grid(), "evolve_bipartite_grid")?;
    if !psi0.is_normalized() {
        return Err(Error::invalid(format!(
            "initial kernel must be normalized (‖Ψ‖² = {})",
            psi0.norm_sqr()
        )));
    }
    let stepper = BipartiteStepper::new(h, p.dt, exec)?;
    let grid = *psi0.grid();
    let mut values = psi0.values().clone();
    zero_walls(&mut values);
    let mut series = TimeSeries {
        times: vec![0.0],
        snapshots: vec![KernelField::new(grid, values.clone())?],
    };
    for step in 1..=p.n_steps {
        stepper.step(&mut values);
        if p.records(step) {
            series.times.push(step as f64 * p.dt);
            series.snapshots.push(KernelField::new(grid, values.clone())?);
        }
    }
    Ok(series)
}

fn zero_walls(m: &mut DMatrix<C64>) {
    let n = m.nrows();
    let zero = C64::new(0.0, 0.0);
    for k in 0..n {
        m[(0, k)] = zero;
        m[(n - 1, k)] = zero;
        m[(k, 0)] = zero;
        m[(k, n - 1)] = zero;
    }
}

/// Exact evolution in the eigenbasis:
/// `c_{n,m}(t) = c_{n,m}(0) · exp(−i (E_n − E_m) t / ħ)`.
pub fn evolve_bipartite_spectral(c0: &CoefficientMatrix, spectrum: &Spectrum, t: f64) -> Result<CoefficientMatrix> {
    let k = c0.dim();
    if k > spectrum.count() {
        return Err(Error::Dimension {
            context: "evolve_bipartite_spectral",
            expected: spectrum.count(),
            found: k,
        });
    }
    let e = spectrum.energies();
    let hbar = spectrum.hbar();
    CoefficientMatrix::from_fn(k, |n, m| {
        if n == m {
            c0.get(n, m)
        } else {
            c0.get(n, m) * C64::from_polar(1.0, -(e[n] - e[m]) * t / hbar)
        }
    })
}
