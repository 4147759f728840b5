//! Discrete Dirichlet Laplacian, its lowest eigenpairs, the intrinsic
//! Poincare inequality and the Singer et al. spectral-gap bounds.
//!
//! The radial discretization sees only radial modes, so on a ball its
//! "second eigenvalue" is the second *radial* eigenvalue, which overestimates
//! the true lambda_2. Ball experiments use radially symmetric data, for which
//! the radial gap is the operative constant.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{
    integrate, weighted_dirichlet_form, weighted_stiffness, BoundaryExtension, Domain, DomainKind,
    Field,
};
use crate::linalg::SymTridiag;

/// Tridiagonal form of -Laplacian with zero Dirichlet data, symmetric with
/// respect to the quadrature inner product.
#[derive(Debug, Clone)]
pub struct DirichletOperator {
    domain: Arc<Domain>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub lambda: f64,
    pub phi: Field,
}

/// Geometry-derived bracket for the spectral gap of a convex domain:
/// pi^2/diam^2 < lambda_2 - lambda_1 <= d pi^2/inr^2.
#[derive(Debug, Clone, Copy)]
pub struct GapBounds {
    pub lower: f64,
    pub upper: f64,
    pub diam: f64,
    pub inr: f64,
}

pub fn assemble_laplacian(domain: &Arc<Domain>) -> DirichletOperator {
    let n = domain.n;
    let h = domain.h;
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n - 1];
    let mut lower = vec![0.0; n - 1];
    match domain.kind {
        DomainKind::Interval => {
            for d in diag.iter_mut() {
                *d = 2.0 / (h * h);
            }
            for u in upper.iter_mut() {
                *u = -1.0 / (h * h);
            }
            lower.copy_from_slice(&upper);
        }
        DomainKind::RadialBall => {
            // conservative flux form of -(1/r^{d-1}) (r^{d-1} u')'; the flux
            // through the origin vanishes by reflection symmetry
            let e = domain.dim as i32 - 1;
            let half = |r: f64| r.powi(e);
            for i in 0..n {
                let r = domain.nodes[i];
                let flux_in = if i == 0 { 0.0 } else { half(r - 0.5 * h) };
                let flux_out = half(r + 0.5 * h);
                diag[i] = (flux_in + flux_out) / (half(r) * h * h);
                if i + 1 < n {
                    upper[i] = -flux_out / (half(r) * h * h);
                    lower[i] = -flux_out / (half(domain.nodes[i + 1]) * h * h);
                }
            }
        }
    }
    DirichletOperator {
        domain: Arc::clone(domain),
        diag,
        upper,
        lower,
    }
}

impl DirichletOperator {
    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn apply(&self, f: &Field) -> Result<Field> {
        if **f.domain() != *self.domain {
            return Err(Error::DomainMismatch);
        }
        let x = f.values();
        let n = x.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut v = self.diag[i] * x[i];
            if i > 0 {
                v += self.lower[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                v += self.upper[i] * x[i + 1];
            }
            y[i] = v;
        }
        Field::new(Arc::clone(&self.domain), y)
    }

    /// Similarity transform W^{1/2} A W^{-1/2} onto a Euclidean-symmetric
    /// tridiagonal matrix (W = quadrature weights).
    pub fn symmetrized(&self) -> SymTridiag {
        let w = &self.domain.quad_weights;
        let n = self.diag.len();
        let mut off = vec![0.0; n - 1];
        for i in 0..n - 1 {
            off[i] = self.upper[i] * (w[i] / w[i + 1]).sqrt();
        }
        SymTridiag {
            diag: self.diag.clone(),
            off,
        }
    }
}

/// The `k` smallest eigenpairs, ordered nondecreasing, each normalized to
/// unit quadrature L^2 norm; the ground state is strictly positive.
pub fn eigenpairs(op: &DirichletOperator, k: usize) -> Result<Vec<EigenPair>> {
    if k == 0 || k > 16 || k > op.domain.n {
        return Err(Error::invalid(
            "eigenpair count must be between 1 and min(16, n)",
        ));
    }
    let sym = op.symmetrized();
    let w = &op.domain.quad_weights;
    let mut pairs = Vec::with_capacity(k);
    let mut deflate: Vec<Vec<f64>> = Vec::new();
    for j in 0..k {
        let lambda = sym.eigenvalue(j);
        let x = sym.eigenvector(lambda, &deflate)?;
        deflate.push(x.clone());
        // map back: phi = W^{-1/2} x, then normalize in quadrature L^2
        let mut vals: Vec<f64> = x.iter().zip(w).map(|(xi, wi)| xi / wi.sqrt()).collect();
        let norm: f64 = vals
            .iter()
            .zip(w)
            .map(|(v, wi)| v * v * wi)
            .sum::<f64>()
            .sqrt();
        let mut idx_max = 0;
        for (i, v) in vals.iter().enumerate() {
            if v.abs() > vals[idx_max].abs() {
                idx_max = i;
            }
        }
        let sign = vals[idx_max].signum();
        for v in vals.iter_mut() {
            *v *= sign / norm;
        }
        let phi = Field::new(Arc::clone(&op.domain), vals)?;
        let residual = eigen_residual(op, lambda, &phi)?;
        if residual > 1e-10 * lambda.abs().max(1.0) {
            return Err(Error::numerical(
                format!("eigenpair {j} residual too large"),
                residual,
            ));
        }
        pairs.push(EigenPair { lambda, phi });
    }
    Ok(pairs)
}

fn eigen_residual(op: &DirichletOperator, lambda: f64, phi: &Field) -> Result<f64> {
    let aphi = op.apply(phi)?;
    let r = aphi.zip_map(phi, |a, p| a - lambda * p)?;
    crate::grid::norm_lq(&r, 2.0)
}

pub fn spectral_gap_bounds(domain: &Arc<Domain>) -> GapBounds {
    let (diam, inr) = match domain.kind {
        DomainKind::Interval => (domain.extent, domain.extent / 2.0),
        DomainKind::RadialBall => (2.0 * domain.extent, domain.extent),
    };
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    GapBounds {
        lower: pi2 / (diam * diam),
        upper: domain.dim as f64 * pi2 / (inr * inr),
        diam,
        inr,
    }
}

/// Weighted mean of g against `weight`: integral(g w) / integral(w).
pub fn weighted_mean(g: &Field, weight: &Field) -> Result<f64> {
    let total = integrate(weight, None)?;
    if !(total > 0.0) {
        return Err(Error::invalid("weighted mean needs positive total weight"));
    }
    Ok(integrate(g, Some(weight))? / total)
}

/// Residual of the intrinsic Poincare inequality
/// (lambda_2 - lambda_1) int |g - g_bar|^2 Phi_1^2 <= int |grad g|^2 Phi_1^2,
/// reported as RHS - gap * LHS-integral (nonnegative up to discretization).
pub fn intrinsic_poincare_residual(g: &Field, pairs: &[EigenPair]) -> Result<f64> {
    if pairs.len() < 2 {
        return Err(Error::invalid("need the first two eigenpairs"));
    }
    let phi1 = &pairs[0].phi;
    let gap = pairs[1].lambda - pairs[0].lambda;
    let weight = phi1.map(|v| v * v);
    let mean = weighted_mean(g, &weight)?;
    let lhs = integrate(&g.map(|v| (v - mean) * (v - mean)), Some(&weight))?;
    let rhs = weighted_dirichlet_form(g, &weight, BoundaryExtension::Extend)?;
    Ok(rhs - gap * lhs)
}

/// Smallest generalized eigenvalue of the pencil
/// (weighted stiffness with weight `w_grad`, diagonal mass `w_mass`)
/// restricted to the mean-zero subspace, i.e. the optimal constant in
/// int w_grad |grad g|^2 >= C int w_mass |g - g_bar|^2.
pub fn pencil_gap(w_grad: &Field, w_mass: &Field) -> Result<f64> {
    w_grad.check_same_domain(w_mass)?;
    let stiff = weighted_stiffness(w_grad, BoundaryExtension::Extend)?;
    let dom = w_grad.domain();
    let mass: Vec<f64> = w_mass
        .values()
        .iter()
        .zip(&dom.quad_weights)
        .map(|(m, q)| m * q)
        .collect();
    if mass.iter().any(|&m| !(m > 0.0)) {
        return Err(Error::invalid("pencil mass weight must be strictly positive"));
    }
    // similarity onto M^{-1/2} K M^{-1/2}; the constant mode maps to the
    // zero eigenvalue, the gap is the second-smallest
    let n = stiff.n();
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n - 1];
    for i in 0..n {
        diag[i] = stiff.diag[i] / mass[i];
    }
    for i in 0..n - 1 {
        off[i] = stiff.off[i] / (mass[i] * mass[i + 1]).sqrt();
    }
    let b = SymTridiag { diag, off };
    Ok(b.eigenvalue(1))
}
