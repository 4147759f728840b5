//! Tridiagonal kernels: Thomas solves and a symmetric tridiagonal
//! eigensolver (Sturm bisection + shifted inverse iteration).

use crate::error::{Error, Result};

/// Solves a general tridiagonal system in place. `lower[i]` couples row i+1 to
/// column i, `upper[i]` couples row i to column i+1.
pub fn solve_tridiag(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    assert_eq!(rhs.len(), n);
    assert_eq!(lower.len(), n.saturating_sub(1));
    assert_eq!(upper.len(), n.saturating_sub(1));

    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut piv = diag[0];
    if piv.abs() < f64::MIN_POSITIVE {
        return Err(Error::numerical("tridiagonal solve: zero pivot", piv.abs()));
    }
    if n > 1 {
        c[0] = upper[0] / piv;
    }
    d[0] = rhs[0] / piv;
    for i in 1..n {
        piv = diag[i] - lower[i - 1] * c[i - 1];
        if piv.abs() < f64::MIN_POSITIVE {
            return Err(Error::numerical("tridiagonal solve: zero pivot", piv.abs()));
        }
        if i + 1 < n {
            c[i] = upper[i] / piv;
        }
        d[i] = (rhs[i] - lower[i - 1] * d[i - 1]) / piv;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Symmetric tridiagonal matrix (standard Euclidean inner product).
#[derive(Debug, Clone)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn n(&self) -> usize {
        self.diag.len()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut v = self.diag[i] * x[i];
            if i > 0 {
                v += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                v += self.off[i] * x[i + 1];
            }
            y[i] = v;
        }
        y
    }

    /// Number of eigenvalues below `x` (Sturm / LDL^T sign count). A pivot
    /// that underflows is clamped to -pivmin, large enough in magnitude that
    /// the next division cannot overflow (the LAPACK dstebz convention).
    fn count_below(&self, x: f64) -> usize {
        let pivmin = f64::MIN_POSITIVE
            * self
                .off
                .iter()
                .map(|e| e * e)
                .fold(1.0_f64, f64::max);
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.n() {
            let e2 = if i > 0 {
                self.off[i - 1] * self.off[i - 1]
            } else {
                0.0
            };
            q = self.diag[i] - x - e2 / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.n();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            if i > 0 {
                r += self.off[i - 1].abs();
            }
            if i + 1 < n {
                r += self.off[i].abs();
            }
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The k-th smallest eigenvalue (0-based), by bisection to machine
    /// precision (terminates when the midpoint no longer separates the
    /// bracket, i.e. lo and hi are adjacent floats).
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let (mut lo, mut hi) = self.gershgorin();
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                return mid;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
    }

    /// Eigenvector for an eigenvalue estimate `lambda` by inverse iteration,
    /// Euclidean-orthogonalized against `deflate`.
    pub fn eigenvector(&self, lambda: f64, deflate: &[Vec<f64>]) -> Result<Vec<f64>> {
        let n = self.n();
        let scale: f64 = self
            .diag
            .iter()
            .map(|d| d.abs())
            .fold(1.0_f64, f64::max);
        let mut shift = lambda;
        let lower: Vec<f64> = self.off.clone();
        let upper: Vec<f64> = self.off.clone();

        // deterministic quasi-random start
        let mut x: Vec<f64> = (0..n)
            .map(|i| ((i as f64 * 12.9898).sin() * 43758.5453).fract() - 0.5)
            .collect();
        orthogonalize(&mut x, deflate);
        normalize(&mut x);

        for attempt in 0..3 {
            let diag_shifted: Vec<f64> = self.diag.iter().map(|d| d - shift).collect();
            let mut converged = false;
            for _ in 0..200 {
                let mut y = match solve_tridiag(&lower, &diag_shifted, &upper, &x) {
                    Ok(y) => y,
                    Err(_) => break,
                };
                orthogonalize(&mut y, deflate);
                let norm = normalize(&mut y);
                if !norm.is_finite() || norm == 0.0 {
                    break;
                }
                let resid = residual_norm(self, &y, lambda);
                x = y;
                if resid <= 1e-12 * scale.max(lambda.abs()) {
                    converged = true;
                    break;
                }
            }
            if converged {
                return Ok(x);
            }
            // nudge the shift off an exact eigenvalue
            shift = lambda + (attempt as f64 + 1.0) * 1e-10 * scale;
        }
        let resid = residual_norm(self, &x, lambda);
        if resid <= 1e-8 * scale.max(lambda.abs()) {
            Ok(x)
        } else {
            Err(Error::numerical("inverse iteration did not converge", resid))
        }
    }
}

fn residual_norm(t: &SymTridiag, x: &[f64], lambda: f64) -> f64 {
    let ax = t.matvec(x);
    ax.iter()
        .zip(x)
        .map(|(a, v)| (a - lambda * v) * (a - lambda * v))
        .sum::<f64>()
        .sqrt()
}

fn orthogonalize(x: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let dot: f64 = x.iter().zip(b).map(|(a, c)| a * c).sum();
        for (xi, bi) in x.iter_mut().zip(b) {
            *xi -= dot * bi;
        }
    }
}

fn normalize(x: &mut [f64]) -> f64 {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in x.iter_mut() {
            *v /= norm;
        }
    }
    norm
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn thomas_solves_known_system() {
        // [2 -1; -1 2] x = [1; 0] -> x = [2/3, 1/3]
        let x = solve_tridiag(&[-1.0], &[2.0, 2.0], &[-1.0], &[1.0, 0.0]).unwrap();
        assert_relative_eq!(x[0], 2.0 / 3.0, epsilon = 1e-14);
        assert_relative_eq!(x[1], 1.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn eigenvalues_of_discrete_laplacian() {
        // 1D Dirichlet Laplacian on (0, pi), n interior nodes:
        // analytic discrete eigenvalues (2 - 2cos(k h)) / h^2.
        let n = 50;
        let h = std::f64::consts::PI / (n as f64 + 1.0);
        let t = SymTridiag {
            diag: vec![2.0 / (h * h); n],
            off: vec![-1.0 / (h * h); n - 1],
        };
        for k in 1..=3usize {
            let exact = (2.0 - 2.0 * (k as f64 * h).cos()) / (h * h);
            assert_relative_eq!(t.eigenvalue(k - 1), exact, max_relative = 1e-12);
        }
    }

    #[test]
    fn eigenvector_matches_sine_mode() {
        let n = 40;
        let h = std::f64::consts::PI / (n as f64 + 1.0);
        let t = SymTridiag {
            diag: vec![2.0 / (h * h); n],
            off: vec![-1.0 / (h * h); n - 1],
        };
        let lam = t.eigenvalue(0);
        let v = t.eigenvector(lam, &[]).unwrap();
        let sign = v[n / 2].signum();
        let mut exact: Vec<f64> = (1..=n).map(|i| (i as f64 * h).sin()).collect();
        let norm = exact.iter().map(|x| x * x).sum::<f64>().sqrt();
        for e in exact.iter_mut() {
            *e /= norm;
        }
        for i in 0..n {
            assert_relative_eq!(sign * v[i], exact[i], epsilon = 1e-9);
        }
    }
}
