//! Relative error function phi = v^m/S^m - 1, the linear-in-(t, d) barrier
//! Phi(t,x) = C - B d(x) - A(t - t0), admissibility of its parameters,
//! discrete supersolution verification on the parabolic region
//! Sigma_Phi = {Phi >= -1}, and measurement of uniform relative-error
//! convergence on rescaled runs.

use crate::elliptic::StationaryProfile;
use crate::error::{Error, Result};
use crate::evolution::EvolutionTrace;
use crate::grid::{distance_to_boundary, Domain, DomainKind, Field};

/// Parameters of the barrier Phi(t,x) = C - B d(x) - A(t - t0) together with
/// the boundary-strip geometry it is certified on: strip width xi1, boundary
/// gradient lower bound beta0 (grad V . grad d >= beta0 on the strip), the
/// combined constant beta = -k_dist C1^m xi1 + 2 beta0 > 0, and the bound
/// k_dist on |Laplacian d| over the strip.
#[derive(Debug, Clone, Copy)]
pub struct BarrierParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub t0: f64,
    pub xi1: f64,
    pub beta0: f64,
    pub beta: f64,
    pub k_dist: f64,
}

/// Relative error function phi = v^m/S^m - 1 with its sup norm and the
/// measured envelope (c2, c3), c2 <= phi <= c3.
#[derive(Debug, Clone)]
pub struct RefPhi {
    pub phi: Field,
    pub sup_abs: f64,
    pub c2: f64,
    pub c3: f64,
}

/// Per-snapshot sup norms of the relative errors, split into the inner
/// region d(x) > delta and the boundary strip d(x) <= delta.
#[derive(Debug, Clone, Copy)]
pub struct ConvergencePoint {
    pub t: f64,
    pub phi_sup: f64,
    pub theta_sup: f64,
    pub phi_inner_sup: f64,
    pub phi_strip_sup: f64,
}

/// A-posteriori barrier comparison on the strip d < delta over the window
/// [t0, t0 + h_{eps,delta}].
#[derive(Debug, Clone, Copy)]
pub struct ComparisonReport {
    pub eps: f64,
    pub delta: f64,
    /// End of the comparison window, t0 + (C - B delta - eps)/A.
    pub horizon: f64,
    /// phi <= Phi held on the initial section and the inner lateral boundary.
    pub boundary_ok: bool,
    /// min over strip nodes and window snapshots of Phi - phi.
    pub min_margin: f64,
    pub holds: bool,
}

/// phi = (v/S)^m - 1 node-wise, with its sup norm and measured envelope.
pub fn ref_phi(v: &Field, s: &Field, m: f64) -> Result<RefPhi> {
    v.check_same_domain(s)?;
    if s.values().iter().any(|&x| x <= 0.0) {
        return Err(Error::invalid("relative error function requires S > 0 interior"));
    }
    let phi = v.zip_map(s, |a, b| (a.max(0.0) / b).powf(m) - 1.0)?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &x in phi.values() {
        lo = lo.min(x);
        hi = hi.max(x);
    }
    Ok(RefPhi {
        sup_abs: lo.abs().max(hi.abs()),
        c2: lo,
        c3: hi,
        phi,
    })
}

fn ghosted_gradient(vals: &[f64], h: f64, left: f64, right: f64) -> Vec<f64> {
    let n = vals.len();
    (0..n)
        .map(|i| {
            let lo = if i == 0 { left } else { vals[i - 1] };
            let hi = if i + 1 == n { right } else { vals[i + 1] };
            (hi - lo) / (2.0 * h)
        })
        .collect()
}

fn ghosted_laplacian(dom: &Domain, vals: &[f64], left: f64, right: f64) -> Vec<f64> {
    let h = dom.h;
    let n = vals.len();
    (0..n)
        .map(|i| {
            let lo = if i == 0 { left } else { vals[i - 1] };
            let hi = if i + 1 == n { right } else { vals[i + 1] };
            let second = (lo - 2.0 * vals[i] + hi) / (h * h);
            match dom.kind {
                DomainKind::Interval => second,
                DomainKind::RadialBall => {
                    second + (dom.dim as f64 - 1.0) / dom.nodes[i] * (hi - lo) / (2.0 * h)
                }
            }
        })
        .collect()
}

/// Ghost values of the distance function just outside the node range: zero at
/// Dirichlet walls, the full radius at the radial origin.
fn distance_ghosts(dom: &Domain) -> (f64, f64) {
    match dom.kind {
        DomainKind::Interval => (0.0, 0.0),
        DomainKind::RadialBall => (dom.extent, 0.0),
    }
}

/// Ghost values for a field vanishing on the Dirichlet boundary; the radial
/// origin reflects (even extension).
fn dirichlet_ghosts(dom: &Domain, vals: &[f64]) -> (f64, f64) {
    match dom.kind {
        DomainKind::Interval => (0.0, 0.0),
        DomainKind::RadialBall => (vals[0], 0.0),
    }
}

/// beta0 = min over the strip d(x) < xi0 of the discrete grad V . grad d.
pub fn boundary_gradient_lower(v: &Field, xi0: f64) -> Result<f64> {
    let dom = v.domain();
    if !(xi0 > 0.0 && xi0 < 0.5 * dom.extent) {
        return Err(Error::invalid(format!(
            "strip width must lie in (0, extent/2), got {xi0}"
        )));
    }
    let d = distance_to_boundary(dom);
    let (dl, dr) = distance_ghosts(dom);
    let grad_d = ghosted_gradient(d.values(), dom.h, dl, dr);
    let (vl, vr) = dirichlet_ghosts(dom, v.values());
    let grad_v = ghosted_gradient(v.values(), dom.h, vl, vr);
    let mut beta0 = f64::INFINITY;
    for i in 0..dom.n {
        if d.values()[i] < xi0 {
            beta0 = beta0.min(grad_v[i] * grad_d[i]);
        }
    }
    if beta0.is_infinite() {
        return Err(Error::invalid("boundary strip contains no grid nodes"));
    }
    Ok(beta0)
}

/// Sufficient supersolution condition
/// [A/m + (1+C)/(1-m)] (1+C)^{1/m-1} <= beta B / xi1^{1/m}.
pub fn barrier_admissible(p: &BarrierParams, m: f64) -> bool {
    let lhs = (p.a / m + (1.0 + p.c) / (1.0 - m)) * (1.0 + p.c).powf(1.0 / m - 1.0);
    lhs <= p.beta * p.b / p.xi1.powf(1.0 / m)
}

/// Simplified small-xi1 form of the condition:
/// (1 + C + (1-m) A / m) xi1 <= (beta B)^m.
pub fn cond1abc(p: &BarrierParams, m: f64) -> bool {
    (1.0 + p.c + (1.0 - m) / m * p.a) * p.xi1 <= (p.beta * p.b).powf(m)
}

/// Reaction term of the relative-error equation,
/// F(phi) = c [(1+phi)^{1/m} - (1+phi)].
pub fn f_barrier(phi: f64, m: f64, c: f64) -> f64 {
    c * ((1.0 + phi).powf(1.0 / m) - (1.0 + phi))
}

/// Minimum over Sigma_Phi (restricted to the strip d < xi1 and the given
/// times) of LHS - RHS of the supersolution inequality
/// (1/m)(1+Phi)^{1/m-1} Phi_t >= V^{1-1/m} Lap(Phi)
///   + 2 (grad V / V^{1/m}) . grad Phi + F(Phi),
/// with the discrete Lap(Phi) = -B Lap_h d, grad Phi = -B grad_h d and
/// V = S^m. A nonnegative return certifies the discrete supersolution
/// property; +infinity means the region is empty.
pub fn supersolution_residual(
    p: &BarrierParams,
    s: &Field,
    m: f64,
    c: f64,
    t_grid: &[f64],
) -> Result<f64> {
    if s.values().iter().any(|&x| x <= 0.0) {
        return Err(Error::invalid("supersolution residual requires S > 0 interior"));
    }
    let dom = s.domain();
    let d = distance_to_boundary(dom);
    let (dl, dr) = distance_ghosts(dom);
    let grad_d = ghosted_gradient(d.values(), dom.h, dl, dr);
    let lap_d = ghosted_laplacian(dom, d.values(), dl, dr);
    let v: Vec<f64> = s.values().iter().map(|&x| x.powf(m)).collect();
    let (vl, vr) = dirichlet_ghosts(dom, &v);
    let grad_v = ghosted_gradient(&v, dom.h, vl, vr);
    let mut min_res = f64::INFINITY;
    for i in 0..dom.n {
        if d.values()[i] >= p.xi1 {
            continue;
        }
        // V-dependent part of the RHS: (-B / V^{1/m}) [V Lap d + 2 grad V . grad d]
        let q = -p.b / s.values()[i] * (v[i] * lap_d[i] + 2.0 * grad_v[i] * grad_d[i]);
        for &t in t_grid {
            let phi = p.c - p.b * d.values()[i] - p.a * (t - p.t0);
            if phi < -1.0 + 1e-6 {
                continue;
            }
            let lhs = -(p.a / m) * (1.0 + phi).powf(1.0 / m - 1.0);
            let rhs = q + f_barrier(phi, m, c);
            min_res = min_res.min(lhs - rhs);
        }
    }
    Ok(min_res)
}

/// Per-snapshot sup norms of phi = v^m/S^m - 1 and theta = v/S - 1, split
/// into the inner region d > delta and the boundary strip d <= delta.
pub fn rel_error_convergence(
    trace: &EvolutionTrace,
    profile: &StationaryProfile,
    delta: f64,
) -> Result<Vec<ConvergencePoint>> {
    let dom = profile.s.domain();
    let d = distance_to_boundary(dom);
    let mut out = Vec::with_capacity(trace.snapshots.len());
    for (t, v) in &trace.snapshots {
        let re = ref_phi(v, &profile.s, profile.m)?;
        let theta = v.zip_map(&profile.s, |a, b| a / b - 1.0)?;
        let mut inner = 0.0_f64;
        let mut strip = 0.0_f64;
        let mut theta_sup = 0.0_f64;
        for i in 0..dom.n {
            let ap = re.phi.values()[i].abs();
            if d.values()[i] > delta {
                inner = inner.max(ap);
            } else {
                strip = strip.max(ap);
            }
            theta_sup = theta_sup.max(theta.values()[i].abs());
        }
        out.push(ConvergencePoint {
            t: *t,
            phi_sup: re.sup_abs,
            theta_sup,
            phi_inner_sup: inner,
            phi_strip_sup: strip,
        });
    }
    Ok(out)
}

/// Global Harnack envelope of a snapshot: (C0, C1) with
/// C0 d(x)^{1/m} <= v <= C1 d(x)^{1/m} node-wise. A non-positive node
/// forces C0 = 0.
pub fn global_harnack_envelope(v: &Field, m: f64) -> (f64, f64) {
    let dom = v.domain();
    let d = distance_to_boundary(dom);
    let mut c0 = f64::INFINITY;
    let mut c1 = 0.0_f64;
    for i in 0..dom.n {
        let ratio = v.values()[i] / d.values()[i].powf(1.0 / m);
        c0 = c0.min(ratio);
        c1 = c1.max(ratio);
    }
    if v.values().iter().any(|&x| x <= 0.0) {
        c0 = 0.0;
    }
    (c0, c1)
}

/// Convergence delay h_{eps,delta} = (C - B delta - eps)/A of the barrier.
pub fn h_eps_delta(p: &BarrierParams, eps: f64, delta: f64) -> f64 {
    (p.c - p.b * delta - eps) / p.a
}

/// Measured strip geometry for a stationary profile: beta0 on the strip of
/// width xi0, the discrete bound k_dist on |Lap d| there, the width
/// xi1 = min(xi0, 2 beta0/(k_dist C1)) and beta = -k_dist C1^m xi1 + 2 beta0.
fn strip_constants(profile: &StationaryProfile, xi0: f64) -> Result<(f64, f64, f64, f64)> {
    let beta0 = boundary_gradient_lower(&profile.v, xi0)?;
    if beta0 <= 0.0 {
        return Err(Error::invalid("boundary gradient lower bound is not positive"));
    }
    let dom = profile.s.domain();
    let d = distance_to_boundary(dom);
    let (dl, dr) = distance_ghosts(dom);
    let lap_d = ghosted_laplacian(dom, d.values(), dl, dr);
    let mut k_dist = 0.0_f64;
    for i in 0..dom.n {
        if d.values()[i] < xi0 {
            k_dist = k_dist.max(lap_d[i].abs());
        }
    }
    let (_, c1) = global_harnack_envelope(&profile.s, profile.m);
    let xi1 = if k_dist * c1 > 0.0 {
        xi0.min(2.0 * beta0 / (k_dist * c1))
    } else {
        xi0
    };
    let beta = -k_dist * c1.powf(profile.m) * xi1 + 2.0 * beta0;
    if beta <= 0.0 {
        return Err(Error::invalid("combined strip constant beta is not positive"));
    }
    Ok((beta0, k_dist, xi1, beta))
}

/// Grid search over (A, B, C) in logarithmic ranges, returning the first
/// parameter tuple with C >= c_min passing both the admissibility condition
/// and a nonnegative discrete supersolution residual at the given times.
/// Exhaustive optimality is not attempted.
pub fn barrier_search(
    profile: &StationaryProfile,
    xi0: f64,
    t0: f64,
    t_grid: &[f64],
    c_min: f64,
) -> Result<Option<BarrierParams>> {
    if !(c_min > 0.0) {
        return Err(Error::invalid("barrier search needs a positive lower bound for C"));
    }
    let (beta0, k_dist, xi1, beta) = strip_constants(profile, xi0)?;
    let mut c = c_min;
    for _ in 0..8 {
        let mut a = 0.05;
        while a <= 10.0 {
            let mut b = 1e-2;
            while b <= 1e3 {
                let p = BarrierParams {
                    a,
                    b,
                    c,
                    t0,
                    xi1,
                    beta0,
                    beta,
                    k_dist,
                };
                if barrier_admissible(&p, profile.m)
                    && supersolution_residual(&p, &profile.s, profile.m, profile.c, t_grid)?
                        >= 0.0
                {
                    return Ok(Some(p));
                }
                b *= 2.0;
            }
            a *= 2.0;
        }
        c *= 1.5;
    }
    Ok(None)
}

/// A-posteriori parabolic comparison phi <= Phi on the strip d < delta over
/// the window [t0, t0 + h_{eps,delta}], where eps is the measured inner sup
/// of |phi| from t0 on. Checks the initial section and the inner lateral
/// boundary separately; combined with a nonnegative supersolution residual
/// this realizes the discrete comparison argument.
pub fn barrier_comparison_check(
    trace: &EvolutionTrace,
    profile: &StationaryProfile,
    p: &BarrierParams,
    delta: f64,
) -> Result<ComparisonReport> {
    let dom = profile.s.domain();
    if !(delta > 0.0 && delta < p.xi1) {
        return Err(Error::invalid(format!(
            "comparison strip width must lie in (0, xi1), got {delta}"
        )));
    }
    let d = distance_to_boundary(dom);
    let series = rel_error_convergence(trace, profile, delta)?;
    let eps = series
        .iter()
        .filter(|pt| pt.t >= p.t0)
        .fold(0.0_f64, |acc, pt| acc.max(pt.phi_inner_sup));
    let horizon = p.t0 + h_eps_delta(p, eps, delta);
    let slack = 1e-8 * (1.0 + p.c);

    let mut boundary_ok = true;
    let mut min_margin = f64::INFINITY;
    let mut first = true;
    for (t, v) in &trace.snapshots {
        if *t < p.t0 || *t > horizon {
            continue;
        }
        let phi = ref_phi(v, &profile.s, profile.m)?.phi;
        for i in 0..dom.n {
            let barrier = p.c - p.b * d.values()[i] - p.a * (*t - p.t0);
            let in_strip = d.values()[i] < delta;
            let next_in_strip = i + 1 < dom.n && d.values()[i + 1] < delta;
            let prev_in_strip = i > 0 && d.values()[i - 1] < delta;
            let on_inner_boundary = !in_strip && (next_in_strip || prev_in_strip);
            if in_strip {
                min_margin = min_margin.min(barrier - phi.values()[i]);
                if first && phi.values()[i] > barrier + slack {
                    boundary_ok = false;
                }
            } else if on_inner_boundary && phi.values()[i] > barrier + slack {
                boundary_ok = false;
            }
        }
        first = false;
    }
    let holds = boundary_ok && min_margin >= -slack;
    Ok(ComparisonReport {
        eps,
        delta,
        horizon,
        boundary_ok,
        min_margin,
        holds,
    })
}
