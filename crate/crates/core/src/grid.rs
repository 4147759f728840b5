//! Discretized spatial domains: 1D interval and radially reduced ball,
//! with fields on interior nodes, quadrature, norms and the distance to
//! the boundary. Boundary values are structurally zero; the radial origin
//! carries a reflection condition, not a Dirichlet one.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::SymTridiag;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    Interval,
    RadialBall,
}

/// How a field behaves at the Dirichlet boundary when its gradient is needed.
///
/// Fields that vanish on the boundary (solutions, eigenfunctions) use `Zero`
/// ghost values. Quotient fields such as g = f / Phi_1, which extend to a
/// finite nonzero boundary value, use `Extend` (copy the nearest interior
/// value, so boundary edges carry no gradient). The continuum forms weight
/// boundary edges by Phi_1^2 or S^{2m}, which vanish there, so this choice
/// only enters at O(h).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryExtension {
    Zero,
    Extend,
}

#[derive(Debug, Clone)]
pub struct Domain {
    pub kind: DomainKind,
    pub dim: u32,
    pub extent: f64,
    pub n: usize,
    pub h: f64,
    pub nodes: Vec<f64>,
    pub quad_weights: Vec<f64>,
}

impl PartialEq for Domain {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.dim == other.dim
            && self.extent == other.extent
            && self.n == other.n
    }
}

/// Volume of the unit ball in R^d.
pub fn unit_ball_volume(d: u32) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        2 => std::f64::consts::PI,
        _ => unit_ball_volume(d - 2) * 2.0 * std::f64::consts::PI / d as f64,
    }
}

/// Surface measure of the unit sphere S^{d-1} in R^d.
pub fn unit_sphere_area(d: u32) -> f64 {
    d as f64 * unit_ball_volume(d)
}

pub fn build_interval(length: f64, n: usize) -> Result<Arc<Domain>> {
    if !(length > 0.0) {
        return Err(Error::invalid(format!("interval length must be positive, got {length}")));
    }
    if n < 3 {
        return Err(Error::invalid(format!("need at least 3 interior nodes, got {n}")));
    }
    let h = length / (n as f64 + 1.0);
    let nodes: Vec<f64> = (1..=n).map(|i| i as f64 * h).collect();
    let quad_weights = vec![h; n];
    Ok(Arc::new(Domain {
        kind: DomainKind::Interval,
        dim: 1,
        extent: length,
        n,
        h,
        nodes,
        quad_weights,
    }))
}

pub fn build_radial_ball(d: u32, radius: f64, n: usize) -> Result<Arc<Domain>> {
    if d < 2 {
        return Err(Error::invalid("radial ball needs d >= 2; use an interval for d = 1"));
    }
    if !(radius > 0.0) {
        return Err(Error::invalid(format!("ball radius must be positive, got {radius}")));
    }
    if n < 3 {
        return Err(Error::invalid(format!("need at least 3 interior nodes, got {n}")));
    }
    let h = radius / (n as f64 + 1.0);
    let area = unit_sphere_area(d);
    let nodes: Vec<f64> = (1..=n).map(|i| i as f64 * h).collect();
    let quad_weights: Vec<f64> = nodes
        .iter()
        .map(|r| area * r.powi(d as i32 - 1) * h)
        .collect();
    Ok(Arc::new(Domain {
        kind: DomainKind::RadialBall,
        dim: d,
        extent: radius,
        n,
        h,
        nodes,
        quad_weights,
    }))
}

impl Domain {
    pub fn volume(&self) -> f64 {
        match self.kind {
            DomainKind::Interval => self.extent,
            DomainKind::RadialBall => unit_ball_volume(self.dim) * self.extent.powi(self.dim as i32),
        }
    }

    /// Geometric factor r^{d-1} scaled by the sphere area, at radius `r`.
    fn edge_measure(&self, r: f64) -> f64 {
        match self.kind {
            DomainKind::Interval => 1.0,
            DomainKind::RadialBall => unit_sphere_area(self.dim) * r.powi(self.dim as i32 - 1),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Field {
    domain: Arc<Domain>,
    values: Vec<f64>,
}

impl Field {
    pub fn new(domain: Arc<Domain>, values: Vec<f64>) -> Result<Self> {
        if values.len() != domain.n {
            return Err(Error::invalid(format!(
                "field length {} does not match domain with {} nodes",
                values.len(),
                domain.n
            )));
        }
        Ok(Field { domain, values })
    }

    pub fn constant(domain: &Arc<Domain>, c: f64) -> Self {
        Field {
            values: vec![c; domain.n],
            domain: Arc::clone(domain),
        }
    }

    pub fn from_fn(domain: &Arc<Domain>, f: impl Fn(f64) -> f64) -> Self {
        Field {
            values: domain.nodes.iter().map(|&x| f(x)).collect(),
            domain: Arc::clone(domain),
        }
    }

    pub fn domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            domain: Arc::clone(&self.domain),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        self.check_same_domain(other)?;
        Ok(Field {
            domain: Arc::clone(&self.domain),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn scale(&self, c: f64) -> Field {
        self.map(|v| c * v)
    }

    pub fn is_nonneg(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    pub fn check_same_domain(&self, other: &Field) -> Result<()> {
        if *self.domain == *other.domain {
            Ok(())
        } else {
            Err(Error::DomainMismatch)
        }
    }
}

/// d(x) = dist(x, boundary): min(x, L - x) on the interval, R - r on the ball.
pub fn distance_to_boundary(domain: &Arc<Domain>) -> Field {
    match domain.kind {
        DomainKind::Interval => {
            let l = domain.extent;
            Field::from_fn(domain, move |x| x.min(l - x))
        }
        DomainKind::RadialBall => {
            let r = domain.extent;
            Field::from_fn(domain, move |x| r - x)
        }
    }
}

/// Quadrature integral of f, optionally against a pointwise weight.
pub fn integrate(f: &Field, weight: Option<&Field>) -> Result<f64> {
    if let Some(w) = weight {
        f.check_same_domain(w)?;
    }
    let mut sum = 0.0;
    for i in 0..f.len() {
        let w = weight.map_or(1.0, |w| w.values[i]);
        sum += f.domain.quad_weights[i] * f.values[i] * w;
    }
    Ok(sum)
}

/// L^q quadrature norm, q in (0, inf]; `f64::INFINITY` gives the sup norm.
pub fn norm_lq(f: &Field, q: f64) -> Result<f64> {
    if q.is_infinite() && q > 0.0 {
        return Ok(f
            .values
            .iter()
            .fold(0.0_f64, |acc, &v| acc.max(v.abs())));
    }
    if !(q > 0.0) {
        return Err(Error::invalid(format!("norm exponent must be positive, got {q}")));
    }
    let mut sum = 0.0;
    for i in 0..f.len() {
        sum += f.domain.quad_weights[i] * f.values[i].abs().powf(q);
    }
    Ok(sum.powf(1.0 / q))
}

/// Per-edge gradient coefficients for the weighted Dirichlet form
/// sum_edges w_edge |grad g|^2 (geometric measure).
///
/// Returns interior edge coefficients `c[j]` (edge between nodes j, j+1) and
/// the boundary diagonal contributions `(b_first, b_last)` that apply when the
/// field uses `Zero` ghost values. The radial origin edge always carries zero
/// gradient (reflection), so it never contributes.
fn edge_coefficients(w: &Field, bc: BoundaryExtension) -> (Vec<f64>, f64, f64) {
    let dom = w.domain();
    let n = dom.n;
    let h = dom.h;
    let mut interior = Vec::with_capacity(n - 1);
    for j in 0..n - 1 {
        let mid = 0.5 * (dom.nodes[j] + dom.nodes[j + 1]);
        let w_edge = 0.5 * (w.values[j] + w.values[j + 1]);
        interior.push(w_edge * dom.edge_measure(mid) / h);
    }
    let (mut b_first, mut b_last) = (0.0, 0.0);
    if bc == BoundaryExtension::Zero {
        // one-sided weight at boundary edges
        match dom.kind {
            DomainKind::Interval => {
                b_first = w.values[0] * dom.edge_measure(0.5 * dom.nodes[0]) / h;
                let mid = 0.5 * (dom.nodes[n - 1] + dom.extent);
                b_last = w.values[n - 1] * dom.edge_measure(mid) / h;
            }
            DomainKind::RadialBall => {
                let mid = 0.5 * (dom.nodes[n - 1] + dom.extent);
                b_last = w.values[n - 1] * dom.edge_measure(mid) / h;
            }
        }
    }
    (interior, b_first, b_last)
}

/// Discrete weighted Dirichlet form sum w |grad g|^2 over edges.
pub fn weighted_dirichlet_form(g: &Field, w: &Field, bc: BoundaryExtension) -> Result<f64> {
    g.check_same_domain(w)?;
    if !w.is_nonneg() {
        return Err(Error::invalid("Dirichlet form weight must be nonnegative"));
    }
    let (interior, b_first, b_last) = edge_coefficients(w, bc);
    let n = g.len();
    let mut sum = 0.0;
    for (j, c) in interior.iter().enumerate() {
        let dg = g.values[j + 1] - g.values[j];
        sum += c * dg * dg;
    }
    sum += b_first * g.values[0] * g.values[0];
    sum += b_last * g.values[n - 1] * g.values[n - 1];
    Ok(sum)
}

/// Euclidean-symmetric stiffness matrix K with g^T K f equal to the weighted
/// Dirichlet form. Used by the generalized eigenvalue (pencil) solvers.
pub fn weighted_stiffness(w: &Field, bc: BoundaryExtension) -> Result<SymTridiag> {
    if !w.is_nonneg() {
        return Err(Error::invalid("Dirichlet form weight must be nonnegative"));
    }
    let (interior, b_first, b_last) = edge_coefficients(w, bc);
    let n = w.len();
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n - 1];
    for (j, &c) in interior.iter().enumerate() {
        diag[j] += c;
        diag[j + 1] += c;
        off[j] = -c;
    }
    diag[0] += b_first;
    diag[n - 1] += b_last;
    Ok(SymTridiag { diag, off })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn interval_nodes_and_spacing() {
        let dom = build_interval(PI, 3).unwrap();
        assert_relative_eq!(dom.h, PI / 4.0, epsilon = 1e-15);
        assert_relative_eq!(dom.nodes[0], PI / 4.0, epsilon = 1e-15);
        assert_relative_eq!(dom.nodes[1], PI / 2.0, epsilon = 1e-15);
        assert_relative_eq!(dom.nodes[2], 3.0 * PI / 4.0, epsilon = 1e-15);
    }

    #[test]
    fn interval_weights_sum() {
        let dom = build_interval(PI, 399).unwrap();
        let total: f64 = dom.quad_weights.iter().sum();
        assert_relative_eq!(total, PI * 399.0 / 400.0, epsilon = 1e-12);
    }

    #[test]
    fn constant_integral_misses_boundary_cells() {
        let dom = build_interval(1.0, 100).unwrap();
        let one = Field::constant(&dom, 1.0);
        // interior trapezoid mass is n h = n/(n+1): the two boundary half-cells
        // are not represented.
        assert_relative_eq!(integrate(&one, None).unwrap(), 100.0 / 101.0, epsilon = 1e-12);
    }

    #[test]
    fn invalid_interval_arguments() {
        assert!(build_interval(-1.0, 10).is_err());
        assert!(build_interval(1.0, 2).is_err());
        assert!(build_radial_ball(1, 1.0, 10).is_err());
    }

    #[test]
    fn ball_weights_converge_to_volume() {
        for (d, vol) in [(3u32, 4.0 * PI / 3.0), (2, PI)] {
            let dom = build_radial_ball(d, 1.0, 4000).unwrap();
            let total: f64 = dom.quad_weights.iter().sum();
            assert_relative_eq!(total, vol, max_relative = 2e-3);
        }
    }

    #[test]
    fn ball_volume_quadrature_within_one_percent() {
        let dom = build_radial_ball(3, PI, 400).unwrap();
        let total: f64 = dom.quad_weights.iter().sum();
        let exact = 4.0 / 3.0 * PI * PI.powi(3);
        assert!((total - exact).abs() / exact < 0.01);
    }

    #[test]
    fn distance_field_values() {
        let dom = build_interval(PI, 399).unwrap();
        let d = distance_to_boundary(&dom);
        let mid = dom.n / 2;
        assert_relative_eq!(d.values()[mid], PI / 2.0, epsilon = 1e-12);

        let ball = build_radial_ball(3, 1.0, 9).unwrap();
        let db = distance_to_boundary(&ball);
        assert_relative_eq!(db.values()[2], 0.7, epsilon = 1e-12);
    }

    #[test]
    fn distance_is_one_lipschitz() {
        let dom = build_interval(PI, 101).unwrap();
        let d = distance_to_boundary(&dom);
        let mut max_slope: f64 = 0.0;
        for i in 0..dom.n - 1 {
            max_slope = max_slope.max((d.values()[i + 1] - d.values()[i]).abs() / dom.h);
        }
        assert!(max_slope <= 1.0 + 1e-12);
    }

    #[test]
    fn integrate_ground_state() {
        let dom = build_interval(PI, 400).unwrap();
        let phi = Field::from_fn(&dom, |x| (2.0 / PI).sqrt() * x.sin());
        let exact = 2.0 * (2.0 / PI).sqrt();
        assert_relative_eq!(integrate(&phi, None).unwrap(), exact, max_relative = 1e-4);
    }

    #[test]
    fn integrate_is_linear() {
        let dom = build_interval(2.0, 50).unwrap();
        let f = Field::from_fn(&dom, |x| x * x);
        let g = Field::from_fn(&dom, |x| x.cos());
        let combo = f.zip_map(&g, |a, b| 3.0 * a - 2.0 * b).unwrap();
        let lhs = integrate(&combo, None).unwrap();
        let rhs = 3.0 * integrate(&f, None).unwrap() - 2.0 * integrate(&g, None).unwrap();
        assert_relative_eq!(lhs, rhs, epsilon = 1e-13);
    }

    #[test]
    fn norms() {
        let dom = build_interval(PI, 800).unwrap();
        let phi = Field::from_fn(&dom, |x| (2.0 / PI).sqrt() * x.sin());
        assert_relative_eq!(norm_lq(&phi, 2.0).unwrap(), 1.0, max_relative = 1e-5);
        let one = Field::constant(&dom, 1.0);
        assert_relative_eq!(norm_lq(&one, 1.0).unwrap(), PI, max_relative = 1e-2);
        let mut f = Field::constant(&dom, 1.0);
        f.values_mut()[0] = -2.0;
        assert_relative_eq!(norm_lq(&f, f64::INFINITY).unwrap(), 2.0, epsilon = 1e-15);
        assert!(norm_lq(&one, 0.0).is_err());
    }

    #[test]
    fn dirichlet_form_rayleigh_quotient() {
        let dom = build_interval(PI, 800).unwrap();
        let phi = Field::from_fn(&dom, |x| (2.0 / PI).sqrt() * x.sin());
        let w = Field::constant(&dom, 1.0);
        let form = weighted_dirichlet_form(&phi, &w, BoundaryExtension::Zero).unwrap();
        let mass = integrate(&phi.map(|v| v * v), None).unwrap();
        assert_relative_eq!(form / mass, 1.0, max_relative = 1e-5);
    }

    #[test]
    fn dirichlet_form_basics() {
        let dom = build_interval(PI, 50).unwrap();
        let g = Field::constant(&dom, 5.0);
        let w = Field::from_fn(&dom, |x| 1.0 + x);
        assert_relative_eq!(
            weighted_dirichlet_form(&g, &w, BoundaryExtension::Extend).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        let f = Field::from_fn(&dom, |x| x.sin());
        let a = weighted_dirichlet_form(&f, &w, BoundaryExtension::Zero).unwrap();
        let b = weighted_dirichlet_form(&f.scale(3.0), &w, BoundaryExtension::Zero).unwrap();
        assert_relative_eq!(b, 9.0 * a, max_relative = 1e-13);
        let neg = Field::constant(&dom, -1.0);
        assert!(weighted_dirichlet_form(&f, &neg, BoundaryExtension::Zero).is_err());
    }

    #[test]
    fn quadrature_is_second_order() {
        // halving h should shrink the error by about 4
        let exact = 2.0; // integral of sin on (0, pi)
        let mut errors = Vec::new();
        for n in [100usize, 200] {
            let dom = build_interval(PI, n).unwrap();
            let f = Field::from_fn(&dom, |x| x.sin());
            errors.push((integrate(&f, None).unwrap() - exact).abs());
        }
        let ratio = errors[0] / errors[1];
        assert!(ratio > 3.0 && ratio < 5.0, "ratio {ratio}");
    }
}
