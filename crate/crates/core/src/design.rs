//! System-side lounge design: weighted congestion cost of a candidate
//! queue threshold, the discrete optimum, and the closed-form
//! provide-a-lounge rule in the heavy-traffic regime.

use serde::Serialize;

use crate::analytic::{
    approx_stationary, b1_stationary_with_threshold, geometric_second_moment_tail,
    mm1_second_moment, truncation_point,
};
use crate::dist::{StationaryDistribution, TruncationAxis};
use crate::error::{Error, Result};
use crate::params::SystemParams;

/// Truncation target used for design-cost evaluations; tighter than the
/// distribution default so cost gaps resolve to ~1e-9.
pub const DESIGN_TAIL_TOL: f64 = 1e-16;

/// Weighted second-moment congestion cost `sum (q^2 + omega l^2) pi(q,l)`,
/// with an axis-appropriate bound on the truncated tail's contribution.
/// Fails if the bound exceeds 1e-6 of the value itself.
pub fn congestion_cost(dist: &StationaryDistribution, omega: f64) -> Result<f64> {
    assert!(omega > 0.0);
    let value: f64 = dist
        .iter()
        .map(|(q, l, p)| ((q as f64).powi(2) + omega * (l as f64).powi(2)) * p)
        .sum();
    let rho = dist.rho;
    let tail_bound = match dist.truncation_axis {
        TruncationAxis::Queue => {
            // Omitted states have q > q_max and l <= l_max; per total count n
            // the omitted mass is below the rho^n (1-rho) marginal.
            (1.0 - rho) * geometric_second_moment_tail(rho, dist.q_max + 1)
                + omega * (dist.l_max as f64).powi(2) * dist.tail_mass_bound
        }
        TruncationAxis::Lounge => {
            // Omitted layers l > l_max are geometric continuations of the
            // stored top layer.
            let top: f64 = (0..=dist.q_max).map(|q| dist.get(q, dist.l_max)).sum();
            let coeff = top / rho.powi(dist.l_max as i32);
            coeff
                * ((dist.q_max as f64).powi(2) * rho.powi(dist.l_max as i32 + 1) / (1.0 - rho)
                    + omega * geometric_second_moment_tail(rho, dist.l_max + 1))
        }
    };
    if tail_bound > 1e-6 * value.abs() {
        return Err(Error::TruncationTooCoarse { tail_bound, value });
    }
    Ok(value)
}

/// Design cost `G(A)` of running the system at queue threshold `A` in the
/// vanishing-`nu` approximation; depends on the primitives only through
/// `rho`.
pub fn g_of_a(rho: f64, a: u32, omega: f64) -> Result<f64> {
    let l_max = truncation_point(rho, DESIGN_TAIL_TOL);
    congestion_cost(&approx_stationary(rho, a, l_max), omega)
}

/// Closed-form design cost of the A=0, B=1 lounge:
/// `G(0) = (nu + rho mu)/(nu + mu) * G_o + rho^2 mu/(nu + mu) * (omega + (1-rho)/rho)`.
pub fn b1_g0_closed(rho: f64, mu: f64, nu: f64, omega: f64) -> f64 {
    let g_o = mm1_second_moment(rho);
    (nu + rho * mu) / (nu + mu) * g_o + rho * rho * mu / (nu + mu) * (omega + (1.0 - rho) / rho)
}

/// Numerical counterpart of [`b1_g0_closed`], via the exact B=1 stationary
/// distribution.
pub fn b1_g0_numeric(rho: f64, mu: f64, nu: f64, omega: f64) -> Result<f64> {
    // alpha/beta never enter: the threshold A = 0 is imposed directly.
    let params = SystemParams::new(rho * mu, mu, nu, 1.0, 0.01)?;
    let q_max = truncation_point(rho, DESIGN_TAIL_TOL).max(3);
    let dist = b1_stationary_with_threshold(&params, 0, q_max)?;
    congestion_cost(&dist, omega)
}

/// Should the designer build the lounge?
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    ProvideLounge,
    NoLounge,
}

/// One evaluated threshold in the design sweep.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GPoint {
    pub a: u32,
    pub g: f64,
}

/// Outcome of optimizing the lounge design at one `(rho, omega)` point.
#[derive(Debug, Clone, Serialize)]
pub struct DesignResult {
    pub mu: f64,
    pub nu: f64,
    pub rho: f64,
    pub omega: f64,
    /// No-lounge baseline `G_o = rho (1 + rho) / (1 - rho)^2`.
    pub g_o: f64,
    pub a_star: u32,
    pub g_star: f64,
    /// Lounge size the optimal threshold induces,
    /// `ceil((mu - lambda)/nu - a_star)`.
    pub b_of_a_star: u32,
    pub verdict: Verdict,
    /// Closed-form comfort-weight cutoff `(3 - rho)/(1 - rho)`; only
    /// meaningful (and only set) in the regime `mu - lambda <= nu`.
    pub omega_bar: Option<f64>,
    /// The full evaluated curve `A -> G(A)`.
    pub g_curve: Vec<GPoint>,
}

/// Minimizes `G(A)` over `A in {0, ..., ceil((mu - lambda)/nu - 1)}` and
/// compares the optimum against the no-lounge baseline. Ties between
/// thresholds resolve to the smaller `A`; the verdict is `ProvideLounge`
/// only when the optimum is strictly below the baseline.
pub fn optimize_design(mu: f64, nu: f64, rho: f64, omega: f64) -> Result<DesignResult> {
    assert!(mu > 0.0 && nu > 0.0 && omega > 0.0);
    assert!(rho > 0.0 && rho < 1.0);
    let lambda = rho * mu;
    let slack = mu - lambda;
    let a_max = ((slack / nu - 1.0).ceil()).max(0.0) as u32;

    let mut g_curve = Vec::with_capacity(a_max as usize + 1);
    let (mut a_star, mut g_star) = (0u32, f64::INFINITY);
    for a in 0..=a_max {
        let g = g_of_a(rho, a, omega)?;
        g_curve.push(GPoint { a, g });
        if g < g_star {
            a_star = a;
            g_star = g;
        }
    }
    let g_o = mm1_second_moment(rho);
    let verdict = if g_star < g_o {
        Verdict::ProvideLounge
    } else {
        Verdict::NoLounge
    };
    let omega_bar = (slack <= nu).then(|| (3.0 - rho) / (1.0 - rho));
    Ok(DesignResult {
        mu,
        nu,
        rho,
        omega,
        g_o,
        a_star,
        g_star,
        b_of_a_star: (slack / nu - a_star as f64).ceil().max(0.0) as u32,
        verdict,
        omega_bar,
        g_curve,
    })
}

/// The closed-form heavy-traffic rule.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RegimeDecision {
    pub rho: f64,
    pub omega: f64,
    /// Cutoff `(3 - rho)/(1 - rho)`.
    pub omega_bar: f64,
    /// `G(0) - G_o = rho^2 mu / (mu + nu) * (omega - omega_bar)`.
    pub g_gap: f64,
    pub verdict: Verdict,
}

/// In the regime `mu - lambda <= nu` the only viable lounge is A=0, B=1 and
/// the comparison against no lounge collapses to a comfort-weight cutoff:
/// provide the lounge iff `omega < (3 - rho)/(1 - rho)`.
pub fn regime_decision(rho: f64, mu: f64, nu: f64, omega: f64) -> Result<RegimeDecision> {
    assert!(rho > 0.0 && rho < 1.0 && omega > 0.0);
    let slack = mu * (1.0 - rho);
    if slack > nu {
        return Err(Error::RegimeViolation { slack, nu });
    }
    let omega_bar = (3.0 - rho) / (1.0 - rho);
    let g_gap = rho * rho * mu / (mu + nu) * (omega - omega_bar);
    let verdict = if g_gap < 0.0 {
        Verdict::ProvideLounge
    } else {
        Verdict::NoLounge
    };
    Ok(RegimeDecision {
        rho,
        omega,
        omega_bar,
        g_gap,
        verdict,
    })
}

/// Evaluates [`optimize_design`] over the `(omega, rho)` grid.
pub fn design_sweep(mu: f64, nu: f64, omegas: &[f64], rhos: &[f64]) -> Result<Vec<DesignResult>> {
    let mut out = Vec::with_capacity(omegas.len() * rhos.len());
    for &omega in omegas {
        for &rho in rhos {
            out.push(optimize_design(mu, nu, rho, omega)?);
        }
    }
    Ok(out)
}
