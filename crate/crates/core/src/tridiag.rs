//! Real symmetric and complex symmetric tridiagonal kernels: Sturm-sequence
//! bisection, inverse iteration, and a pre-factored Thomas solver.

use crate::error::{Error, Result};
use crate::par::Execution;
use crate::tol;
use crate::C64;

const MAX_BISECTION_STEPS: usize = 256;
const MAX_INVERSE_ITERATIONS: usize = 8;
/// Eigenvalues closer than this fraction of `‖T‖` are refined as a cluster.
const CLUSTER_GAP: f64 = 1e-7;

/// Real symmetric tridiagonal matrix: `diag.len() == off.len() + 1`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    pub fn norm_bound(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE)
    }

    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        let n = self.dim();
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.off[i] * x[i + 1];
            }
            out[i] = acc;
        }
    }

    /// Number of eigenvalues strictly below `x`.
    fn sturm_count(&self, x: f64, pivmin: f64) -> usize {
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.dim() {
            q = self.diag[i] - x - self.off[i - 1] * self.off[i - 1] / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn pivmin(&self) -> f64 {
        let emax = self.off.iter().fold(1.0_f64, |m, e| m.max(e * e));
        f64::MIN_POSITIVE * emax
    }

    /// The `index`-th smallest eigenvalue (0-based) by bisection to full precision.
    pub fn eigenvalue(&self, index: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        let pad = f64::EPSILON * self.norm_bound() * self.dim() as f64 + self.pivmin();
        lo -= pad;
        hi += pad;
        let pivmin = self.pivmin();
        for _ in 0..MAX_BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.sturm_count(mid, pivmin) > index {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// Lowest `k` eigenpairs; eigenvectors are unit vectors in the Euclidean norm.
    pub fn lowest_eigenpairs(&self, k: usize, exec: Execution) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let n = self.dim();
        if k == 0 || k > n {
            return Err(Error::invalid(format!(
                "requested {k} eigenpairs from a matrix of dimension {n}"
            )));
        }
        let values = exec.map(k, |j| self.eigenvalue(j));
        let norm = self.norm_bound();

        let mut clusters: Vec<(usize, usize)> = Vec::new();
        let mut start = 0;
        for j in 1..=k {
            if j == k || values[j] - values[j - 1] > CLUSTER_GAP * norm {
                clusters.push((start, j));
                start = j;
            }
        }

        let per_cluster = exec.try_map(clusters.len(), |c| {
            let (a, b) = clusters[c];
            self.cluster_vectors(&values[a..b], a, norm)
        })?;
        Ok((values, per_cluster.into_iter().flatten().collect()))
    }

    fn cluster_vectors(&self, lambdas: &[f64], first_index: usize, norm: f64) -> Result<Vec<Vec<f64>>> {
        let n = self.dim();
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(lambdas.len());
        let mut shift_prev = f64::NEG_INFINITY;
        for (offset, &lambda) in lambdas.iter().enumerate() {
            // Coincident eigenvalues would give identical iterates; separate the shifts.
            let mut shift = lambda;
            if shift - shift_prev < 10.0 * f64::EPSILON * norm {
                shift = shift_prev + 10.0 * f64::EPSILON * norm;
            }
            shift_prev = shift;

            let lu = PivotedTridiagonalLu::factor(self, shift, norm);
            let mut x: Vec<f64> = (0..n)
                .map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * 0.618_033_988_749_895 * (offset + 1) as f64).sin())
                .collect();
            normalize(&mut x);
            let mut scratch = vec![0.0; n];
            let mut residual = f64::INFINITY;
            let bound = tol::EIGEN_RESIDUAL * 1e-3 * (1.0 + lambda.abs());
            let mut iterations = 0;
            while iterations < MAX_INVERSE_ITERATIONS {
                iterations += 1;
                lu.solve(&mut x);
                for v in &vectors {
                    let proj: f64 = v.iter().zip(&x).map(|(a, b)| a * b).sum();
                    x.iter_mut().zip(v).for_each(|(xi, vi)| *xi -= proj * vi);
                }
                if !normalize(&mut x) {
                    return Err(Error::NoConvergence {
                        index: first_index + offset,
                        iterations,
                        residual: f64::NAN,
                    });
                }
                self.mul_vec(&x, &mut scratch);
                residual = scratch
                    .iter()
                    .zip(&x)
                    .map(|(hx, xi)| (hx - lambda * xi).powi(2))
                    .sum::<f64>()
                    .sqrt();
                if iterations >= 2 && residual <= bound {
                    break;
                }
            }
            if !(residual <= tol::EIGEN_RESIDUAL * (1.0 + lambda.abs())) {
                return Err(Error::NoConvergence {
                    index: first_index + offset,
                    iterations,
                    residual,
                });
            }
            vectors.push(x);
        }
        Ok(vectors)
    }
}

fn normalize(x: &mut [f64]) -> bool {
    let n = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if n == 0.0 || !n.is_finite() {
        return false;
    }
    x.iter_mut().for_each(|v| *v /= n);
    true
}

/// LU factorization of `T − shift·I` with partial (row) pivoting.
struct PivotedTridiagonalLu {
    d: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    mult: Vec<f64>,
    swapped: Vec<bool>,
}

impl PivotedTridiagonalLu {
    fn factor(t: &SymTridiagonal, shift: f64, norm: f64) -> Self {
        let n = t.dim();
        let tiny = f64::EPSILON * norm;
        let mut d: Vec<f64> = t.diag.iter().map(|v| v - shift).collect();
        let mut u1 = t.off.clone();
        let mut u2 = vec![0.0; n.saturating_sub(2)];
        let mut mult = vec![0.0; n.saturating_sub(1)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for k in 0..n.saturating_sub(1) {
            let sub = t.off[k];
            if d[k].abs() >= sub.abs() {
                if d[k] == 0.0 {
                    d[k] = tiny;
                }
                let m = sub / d[k];
                mult[k] = m;
                d[k + 1] -= m * u1[k];
            } else {
                let m = d[k] / sub;
                mult[k] = m;
                swapped[k] = true;
                let (dk1, u1k) = (d[k + 1], u1[k]);
                d[k] = sub;
                u1[k] = dk1;
                d[k + 1] = u1k - m * dk1;
                if k + 2 < n {
                    let u1k1 = u1[k + 1];
                    u2[k] = u1k1;
                    u1[k + 1] = -m * u1k1;
                }
            }
        }
        for v in d.iter_mut() {
            if v.abs() < tiny {
                *v = if *v < 0.0 { -tiny } else { tiny };
            }
        }
        Self {
            d,
            u1,
            u2,
            mult,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.d.len();
        for k in 0..n.saturating_sub(1) {
            if self.swapped[k] {
                b.swap(k, k + 1);
            }
            b[k + 1] -= self.mult[k] * b[k];
        }
        for k in (0..n).rev() {
            let mut acc = b[k];
            if k + 1 < n {
                acc -= self.u1[k] * b[k + 1];
            }
            if k + 2 < n {
                acc -= self.u2[k] * b[k + 2];
            }
            b[k] = acc / self.d[k];
        }
    }
}

/// Pre-factored Thomas solver for the complex symmetric tridiagonal matrix
/// with diagonal `diag` and constant-position off-diagonal `off`.
#[derive(Debug, Clone)]
pub(crate) struct ComplexTridiagonalLu {
    off: Vec<C64>,
    inv_den: Vec<C64>,
    upper: Vec<C64>,
}

impl ComplexTridiagonalLu {
    pub fn factor(diag: &[C64], off: &[C64]) -> Result<Self> {
        let n = diag.len();
        let mut inv_den = Vec::with_capacity(n);
        let mut upper = Vec::with_capacity(n.saturating_sub(1));
        let mut den = diag[0];
        for i in 0..n {
            if i > 0 {
                den = diag[i] - off[i - 1] * upper[i - 1];
            }
            if !(den.norm() > f64::MIN_POSITIVE * 1e4) || !den.is_finite() {
                return Err(Error::numeric(
                    "tridiagonal solve",
                    format!("vanishing pivot {den} at row {i}"),
                ));
            }
            let inv = den.inv();
            inv_den.push(inv);
            if i + 1 < n {
                upper.push(off[i] * inv);
            }
        }
        Ok(Self {
            off: off.to_vec(),
            inv_den,
            upper,
        })
    }

    pub fn inv_den(&self) -> &[C64] {
        &self.inv_den
    }

    pub fn off(&self) -> &[C64] {
        &self.off
    }

    pub fn upper(&self) -> &[C64] {
        &self.upper
    }

    pub fn solve_in_place(&self, b: &mut [C64]) {
        let n = self.inv_den.len();
        b[0] *= self.inv_den[0];
        for i in 1..n {
            b[i] = (b[i] - self.off[i - 1] * b[i - 1]) * self.inv_den[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            b[i] -= self.upper[i] * b[i + 1];
        }
    }
}
