//! Relative error θ = v/S - 1, the entropy E[θ] = ½∫|θ-θ̄|²S^{1+m} and
//! its dissipation, weighted Poincaré constants (empirical and formula
//! based), decay-rate fitting, and the inequality checks behind the
//! entropy decay theorems.

use crate::error::{Error, Result};
use crate::evolution::EvolutionTrace;
use crate::grid::{integrate, weighted_dirichlet_form, BoundaryExtension, Field};
use crate::spectral::{pencil_gap, weighted_mean};

/// Relative error of a rescaled state against the stationary profile.
#[derive(Debug, Clone)]
pub struct RelError {
    pub theta: Field,
    /// Weighted mean of θ with weight S^{1+m}.
    pub theta_bar: f64,
    pub eps_sup: f64,
}

/// Entropy/dissipation series sampled at the snapshots of a rescaled run.
#[derive(Debug, Clone)]
pub struct EntropyTrace {
    pub times: Vec<f64>,
    pub e: Vec<f64>,
    pub d: Vec<f64>,
    /// ∫θ² S^{1+m}
    pub n2: Vec<f64>,
    pub theta_bar: Vec<f64>,
    pub eps: Vec<f64>,
}

/// Weighted Poincaré constant and the decay rate derived from it.
#[derive(Debug, Clone, Copy)]
pub struct PoincareEstimate {
    pub k_emp: f64,
    pub k_paper: Option<f64>,
    /// λ₀ = mK - 2(1-m)
    pub lambda0: f64,
    /// γ₀ = λ₀ c
    pub gamma0: f64,
    /// F(m) = mK(m) - 2(1-m); the decay assumption requires F > 0.
    pub f: f64,
    pub assumption_holds: bool,
}

/// A violated interval of a discrete entropy inequality.
#[derive(Debug, Clone, Copy)]
pub struct Violation {
    pub index: usize,
    pub lhs: f64,
    pub rhs: f64,
}

pub fn rel_error(v: &Field, s: &Field, m: f64) -> Result<RelError> {
    v.check_same_domain(s)?;
    if s.values().iter().any(|&x| x <= 0.0) {
        return Err(Error::invalid("relative error requires S > 0 interior"));
    }
    let theta = v.zip_map(s, |a, b| a / b - 1.0)?;
    let weight = s.map(|x| x.powf(1.0 + m));
    let theta_bar = weighted_mean(&theta, &weight)?;
    let eps_sup = theta.values().iter().fold(0.0_f64, |a, &b| a.max(b.abs()));
    Ok(RelError {
        theta,
        theta_bar,
        eps_sup,
    })
}

/// E = ½∫|θ-θ̄|²S^{1+m} by quadrature and D = ∫|∇θ|²S^{2m} by the
/// weighted Dirichlet form (θ is a quotient field: extended, not zeroed,
/// at the boundary).
pub fn entropy_and_dissipation(re: &RelError, s: &Field, m: f64) -> Result<(f64, f64)> {
    let w_mass = s.map(|x| x.powf(1.0 + m));
    let centered = re.theta.map(|x| (x - re.theta_bar) * (x - re.theta_bar));
    let e = 0.5 * integrate(&centered, Some(&w_mass))?;
    let w_grad = s.map(|x| x.powf(2.0 * m));
    let d = weighted_dirichlet_form(&re.theta, &w_grad, BoundaryExtension::Extend)?;
    Ok((e, d))
}

/// Samples E, D, ∫θ²S^{1+m}, θ̄ and ‖θ‖_∞ at every stored snapshot of a
/// rescaled run.
pub fn entropy_trace(run: &EvolutionTrace, s: &Field, m: f64) -> Result<EntropyTrace> {
    let mut out = EntropyTrace {
        times: Vec::new(),
        e: Vec::new(),
        d: Vec::new(),
        n2: Vec::new(),
        theta_bar: Vec::new(),
        eps: Vec::new(),
    };
    let w_mass = s.map(|x| x.powf(1.0 + m));
    for (t, v) in &run.snapshots {
        let re = rel_error(v, s, m)?;
        let (e, d) = entropy_and_dissipation(&re, s, m)?;
        let n2 = integrate(&re.theta.map(|x| x * x), Some(&w_mass))?;
        out.times.push(*t);
        out.e.push(e);
        out.d.push(d);
        out.n2.push(n2);
        out.theta_bar.push(re.theta_bar);
        out.eps.push(re.eps_sup);
    }
    Ok(out)
}

/// Checks the discrete entropy production inequality on every interval:
/// FDE: -dE/dt >= m(1+ε)^{m-1} D - 2c(1-m+ε)E;
/// PME: -dE/dt >= m(1-ε)^{m-1} D + 2c(m-1-ε)E.
/// A 5% relative slack plus an absolute floor absorbs discretization.
pub fn entropy_inequality_check(trace: &EntropyTrace, m: f64, c: f64) -> Vec<Violation> {
    let mut out = Vec::new();
    for k in 0..trace.times.len().saturating_sub(1) {
        let dt = trace.times[k + 1] - trace.times[k];
        if dt <= 0.0 {
            continue;
        }
        let lhs = -(trace.e[k + 1] - trace.e[k]) / dt;
        // centered check: the difference quotient approximates dE/dt at the
        // interval midpoint, so the right-hand side uses midpoint values
        let eps = 0.5 * (trace.eps[k] + trace.eps[k + 1]);
        let e_mid = 0.5 * (trace.e[k] + trace.e[k + 1]);
        let d_mid = 0.5 * (trace.d[k] + trace.d[k + 1]);
        let rhs = if m <= 1.0 {
            m * (1.0 + eps).powf(m - 1.0) * d_mid - 2.0 * c * (1.0 - m + eps) * e_mid
        } else {
            if eps >= 1.0 {
                continue;
            }
            m * (1.0 - eps).powf(m - 1.0) * d_mid + 2.0 * c * (m - 1.0 - eps) * e_mid
        };
        let slack = 0.05 * rhs.abs() + 1e-10;
        if lhs < rhs - slack {
            out.push(Violation { index: k, lhs, rhs });
        }
    }
    out
}

/// Empirical GWPI constant: the minimum over nonconstant mean-zero g of
/// ∫S^{2m}|∇g|² / (c∫S^{1+m}|g-ḡ|²), computed as the second-smallest
/// eigenvalue of the (stiffness, mass) pencil divided by c.
pub fn gwpi_constant_empirical(s: &Field, m: f64, c: f64) -> Result<f64> {
    if c <= 0.0 {
        return Err(Error::invalid("gwpi constant requires c > 0"));
    }
    let w_grad = s.map(|x| x.powf(2.0 * m));
    let w_mass = s.map(|x| x.powf(1.0 + m));
    Ok(pencil_gap(&w_grad, &w_mass)? / c)
}

/// Closed-form cross-check constant
/// K(m) = (λ₂-λ₁)k₀²/(λ₁k₁²)·[(S₂λ₁)^{d/2}|Ω|]^{(1-m)/(1+m)}.
#[allow(clippy::too_many_arguments)]
pub fn k_paper(m: f64, lam1: f64, lam2: f64, s2: f64, d: u32, vol: f64, k0: f64, k1: f64) -> f64 {
    let bracket = ((s2 * lam1).powf(d as f64 / 2.0) * vol).powf((1.0 - m) / (1.0 + m));
    (lam2 - lam1) * k0 * k0 / (lam1 * k1 * k1) * bracket
}

/// λ₀ = mK - 2(1-m) and γ₀ = λ₀c. `assumption_holds` is false when
/// F(m) = λ₀ <= 0, in which case no decay rate is claimed.
pub fn gamma0(m: f64, c: f64, k: f64) -> PoincareEstimate {
    let lambda0 = m * k - 2.0 * (1.0 - m);
    PoincareEstimate {
        k_emp: k,
        k_paper: None,
        lambda0,
        gamma0: lambda0 * c,
        f: lambda0,
        assumption_holds: lambda0 > 0.0,
    }
}

/// Least-squares exponential rate: slope of log y against t over the
/// window, negated, with the r² of the fit.
pub fn fit_decay_rate(series: &[(f64, f64)], window: (f64, f64)) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> = series
        .iter()
        .filter(|(t, _)| *t >= window.0 && *t <= window.1)
        .cloned()
        .collect();
    if pts.len() < 10 {
        return Err(Error::invalid("rate fit requires at least 10 samples"));
    }
    if pts.iter().any(|(_, y)| *y <= 0.0) {
        return Err(Error::invalid("rate fit requires positive samples"));
    }
    let logs: Vec<(f64, f64)> = pts.iter().map(|(t, y)| (*t, y.ln())).collect();
    let n = logs.len() as f64;
    let st: f64 = logs.iter().map(|p| p.0).sum();
    let sy: f64 = logs.iter().map(|p| p.1).sum();
    let stt: f64 = logs.iter().map(|p| p.0 * p.0).sum();
    let sty: f64 = logs.iter().map(|p| p.0 * p.1).sum();
    let syy: f64 = logs.iter().map(|p| p.1 * p.1).sum();
    let denom = n * stt - st * st;
    if denom.abs() < f64::MIN_POSITIVE {
        return Err(Error::invalid("rate fit window has no time spread"));
    }
    let b = (n * sty - st * sy) / denom;
    let var_y = n * syy - sy * sy;
    let r2 = if var_y > 0.0 {
        (n * sty - st * sy) * (n * sty - st * sy) / (denom * var_y)
    } else {
        1.0
    };
    Ok((-b, r2))
}

/// Fitting window: burn-in ends at the first sample with ‖θ‖_∞ < 0.1;
/// the window is the last 60% of what follows.
pub fn post_burnin_window(trace: &EntropyTrace) -> Option<(f64, f64)> {
    let start = trace.eps.iter().position(|&e| e < 0.1)?;
    let t_b = trace.times[start];
    let t_end = *trace.times.last()?;
    if t_end <= t_b {
        return None;
    }
    Some((t_b + 0.4 * (t_end - t_b), t_end))
}

/// f(θ) = (1+θ) - (1+θ)^m.
pub fn f_nonlinearity(theta: f64, m: f64) -> Result<f64> {
    if 1.0 + theta <= 0.0 {
        return Err(Error::invalid("f requires 1 + θ > 0"));
    }
    Ok((1.0 + theta) - (1.0 + theta).powf(m))
}

/// f'(θ) = 1 - m(1+θ)^{m-1}.
pub fn f_prime(theta: f64, m: f64) -> Result<f64> {
    if 1.0 + theta <= 0.0 {
        return Err(Error::invalid("f requires 1 + θ > 0"));
    }
    Ok(1.0 - m * (1.0 + theta).powf(m - 1.0))
}

/// f''(θ) = m(1-m)(1+θ)^{m-2}.
pub fn f_second(theta: f64, m: f64) -> Result<f64> {
    if 1.0 + theta <= 0.0 {
        return Err(Error::invalid("f requires 1 + θ > 0"));
    }
    Ok(m * (1.0 - m) * (1.0 + theta).powf(m - 2.0))
}

/// F(φ) = c[(1+φ)^{1/m} - (1+φ)], the nonlinearity of the φ equation.
pub fn f_big(phi: f64, m: f64, c: f64) -> Result<f64> {
    if 1.0 + phi <= 0.0 {
        return Err(Error::invalid("F requires 1 + φ > 0"));
    }
    Ok(c * ((1.0 + phi).powf(1.0 / m) - (1.0 + phi)))
}

/// Report of the weighted-mean ODE checks along a converged run.
#[derive(Debug, Clone, Copy)]
pub struct MeanOdeReport {
    /// max θ̄ over the second half of the trace (FDE: must end <= slack)
    pub late_mean_max: f64,
    /// min over intervals of θ̄' - c(1-m)θ̄ (FDE lower ODE bound margin)
    pub min_margin: f64,
    /// fitted decay rate of |θ̄| (PME), when θ̄ stays nonzero
    pub mean_rate: Option<f64>,
    pub pass: bool,
}

/// FDE: θ̄ is eventually nonpositive and satisfies θ̄' >= c(1-m)θ̄ up to
/// slack. PME: |θ̄| decays with fitted rate >= 0.9.
pub fn mean_ode_check(trace: &EntropyTrace, m: f64, c: f64) -> MeanOdeReport {
    let n = trace.times.len();
    let half = n / 2;
    let late_mean_max = trace.theta_bar[half..]
        .iter()
        .fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let scale = trace
        .theta_bar
        .iter()
        .fold(0.0_f64, |a, &b| a.max(b.abs()))
        .max(1e-300);
    let mut min_margin = f64::INFINITY;
    for k in 0..n.saturating_sub(1) {
        let dt = trace.times[k + 1] - trace.times[k];
        if dt <= 0.0 {
            continue;
        }
        let deriv = (trace.theta_bar[k + 1] - trace.theta_bar[k]) / dt;
        let mid = 0.5 * (trace.theta_bar[k] + trace.theta_bar[k + 1]);
        let margin = deriv - c * (1.0 - m) * mid;
        min_margin = min_margin.min(margin);
    }
    let mean_rate = if m > 1.0 {
        let series: Vec<(f64, f64)> = trace
            .times
            .iter()
            .zip(&trace.theta_bar)
            .map(|(&t, &b)| (t, b.abs()))
            .collect();
        post_burnin_window(trace).and_then(|w| fit_decay_rate(&series, w).ok().map(|(g, _)| g))
    } else {
        None
    };
    let slack = 0.05 * scale + 1e-10;
    let pass = if m < 1.0 {
        late_mean_max <= slack && min_margin >= -slack * c.max(1.0)
    } else {
        mean_rate.map(|g| g >= 0.9).unwrap_or(false)
    };
    MeanOdeReport {
        late_mean_max,
        min_margin,
        mean_rate,
        pass,
    }
}

/// Fitted rates of the entropy and of the weighted norm ∫θ²S^{1+m} over
/// the post-burn-in window.
#[derive(Debug, Clone, Copy)]
pub struct NormDecayReport {
    pub entropy_rate: f64,
    pub entropy_r2: f64,
    pub norm_rate: f64,
    pub norm_r2: f64,
}

pub fn norm_decay_check(trace: &EntropyTrace) -> Result<NormDecayReport> {
    let window = post_burnin_window(trace)
        .ok_or_else(|| Error::invalid("trace never reaches the burn-in threshold"))?;
    let e_series: Vec<(f64, f64)> = trace.times.iter().zip(&trace.e).map(|(&t, &y)| (t, y)).collect();
    let n_series: Vec<(f64, f64)> = trace
        .times
        .iter()
        .zip(&trace.n2)
        .map(|(&t, &y)| (t, y))
        .collect();
    let (entropy_rate, entropy_r2) = fit_decay_rate(&e_series, window)?;
    let (norm_rate, norm_r2) = fit_decay_rate(&n_series, window)?;
    Ok(NormDecayReport {
        entropy_rate,
        entropy_r2,
        norm_rate,
        norm_r2,
    })
}

/// Minimality of the weighted mean: ∫|g-c|²w - ∫|g-ḡ|²w, which is
/// nonnegative and equals (c-ḡ)²∫w.
pub fn mean_minimality_gap(g: &Field, weight: &Field, c: f64) -> Result<f64> {
    let gbar = weighted_mean(g, weight)?;
    let at_c = integrate(&g.map(|x| (x - c) * (x - c)), Some(weight))?;
    let at_bar = integrate(&g.map(|x| (x - gbar) * (x - gbar)), Some(weight))?;
    Ok(at_c - at_bar)
}
