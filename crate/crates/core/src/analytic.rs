//! Closed-form stationary distributions: the M/M/1 baseline, the exact B=1
//! lounge system, and the vanishing-`nu` approximating system.

use crate::dist::{SourceTag, StationaryDistribution, TruncationAxis};
use crate::error::{Error, Result};
use crate::params::{derive_thresholds, SystemParams};

/// Default analytic truncation target for geometric tails.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

/// Smallest `n` such that the geometric tail mass `rho^(n+1) / (1 - rho)`
/// falls below `tol`.
pub fn truncation_point(rho: f64, tol: f64) -> u32 {
    assert!(rho > 0.0 && rho < 1.0 && tol > 0.0);
    // rho^(n+1) < tol * (1 - rho)
    let target = (tol * (1.0 - rho)).ln() / rho.ln() - 1.0;
    let mut n = target.ceil().max(1.0) as u32;
    // guard against log rounding right at the boundary
    while rho.powi(n as i32 + 1) / (1.0 - rho) >= tol {
        n += 1;
    }
    n
}

/// M/M/1 stationary pmf: `P(N = n) = rho^n (1 - rho)`.
pub fn mm1_pmf(rho: f64, n: u32) -> f64 {
    assert!(rho > 0.0 && rho < 1.0);
    rho.powi(n as i32) * (1.0 - rho)
}

/// Second moment of the M/M/1 occupancy, `sum_n n^2 rho^n (1-rho)`, in
/// closed form `rho (1 + rho) / (1 - rho)^2`. This is the no-lounge
/// congestion baseline.
pub fn mm1_second_moment(rho: f64) -> f64 {
    assert!(rho > 0.0 && rho < 1.0);
    rho * (1.0 + rho) / (1.0 - rho).powi(2)
}

/// `sum_{n >= n_start} n^2 rho^n`, summed forward so the result stays a
/// valid (tiny) upper bound even when it is many orders below the full sum.
pub fn geometric_second_moment_tail(rho: f64, n_start: u32) -> f64 {
    assert!(rho > 0.0 && rho < 1.0);
    let mut acc = 0.0;
    let mut n = n_start as f64;
    let mut pow = rho.powi(n_start as i32);
    loop {
        let term = n * n * pow;
        acc += term;
        if term < acc * 1e-18 + 1e-300 {
            break;
        }
        n += 1.0;
        pow *= rho;
    }
    acc
}

/// The second-order linear recursion behind the B=1 interior probabilities:
/// `m_0 = 1`, `m_1 = theta/mu`, `m_q = (theta/mu) m_{q-1} - rho m_{q-2}`,
/// with `theta = lambda + mu + nu`.
///
/// Values grow like `r_plus^q` with `r_plus > 1`, so they are stored in
/// scaled form and consumed through [`ratio`](MSequence::ratio); the closed
/// form only ever needs ratios `m_i / m_j`.
#[derive(Debug, Clone)]
pub struct MSequence {
    pub theta_over_mu: f64,
    pub rho: f64,
    /// Larger characteristic root (the paper reuses alpha/beta for these;
    /// renamed to avoid collision with the cost rates).
    pub r_plus: f64,
    /// Smaller characteristic root.
    pub r_minus: f64,
    scaled: Vec<f64>,
    log_scale: Vec<f64>,
}

const RESCALE_AT: f64 = 1e150;

impl MSequence {
    /// Computes `m_0 ..= m_k`.
    pub fn new(params: &SystemParams, k: u32) -> Self {
        let rho = params.rho();
        let theta_over_mu = (params.lambda + params.mu + params.nu) / params.mu;
        let disc = theta_over_mu * theta_over_mu - 4.0 * rho;
        let sqrt_disc = disc.max(0.0).sqrt();
        let r_plus = (theta_over_mu + sqrt_disc) / 2.0;
        let r_minus = (theta_over_mu - sqrt_disc) / 2.0;

        let mut scaled = Vec::with_capacity(k as usize + 1);
        let mut log_scale = Vec::with_capacity(k as usize + 1);
        let (mut prev, mut curr) = (1.0_f64, theta_over_mu);
        let mut ls = 0.0_f64;
        scaled.push(prev);
        log_scale.push(ls);
        if k >= 1 {
            scaled.push(curr);
            log_scale.push(ls);
        }
        for _ in 2..=k {
            let next = theta_over_mu * curr - rho * prev;
            prev = curr;
            curr = next;
            if curr > RESCALE_AT {
                prev /= RESCALE_AT;
                curr /= RESCALE_AT;
                ls += RESCALE_AT.ln();
            }
            scaled.push(curr);
            log_scale.push(ls);
        }
        MSequence {
            theta_over_mu,
            rho,
            r_plus,
            r_minus,
            scaled,
            log_scale,
        }
    }

    pub fn len(&self) -> usize {
        self.scaled.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scaled.is_empty()
    }

    /// `m_q` as a plain float; may overflow to infinity for very large `q`.
    pub fn value(&self, q: u32) -> f64 {
        self.scaled[q as usize] * self.log_scale[q as usize].exp()
    }

    /// `m_i / m_j`, evaluated with the scaling factored out.
    pub fn ratio(&self, i: u32, j: u32) -> f64 {
        let (i, j) = (i as usize, j as usize);
        self.scaled[i] / self.scaled[j] * (self.log_scale[i] - self.log_scale[j]).exp()
    }

    /// Closed form `U r_plus^q + V r_minus^q`; `None` when the roots are too
    /// close for the closed form to be trustworthy (the recursion is always
    /// valid and is the authoritative route).
    pub fn closed_form(&self, q: u32) -> Option<f64> {
        let disc = self.theta_over_mu * self.theta_over_mu - 4.0 * self.rho;
        if disc < 1e-9 {
            return None;
        }
        let span = self.r_plus - self.r_minus;
        let u = (self.theta_over_mu - self.r_minus) / span;
        let v = (self.r_plus - self.theta_over_mu) / span;
        Some(u * self.r_plus.powi(q as i32) + v * self.r_minus.powi(q as i32))
    }
}

/// Exact stationary distribution of the lounge system when the effective
/// lounge threshold is B = 1, truncated at `q_max`.
///
/// Uses the derived integer queue threshold; a warning is logged when the
/// derived `b_int` differs from 1 (the distribution then describes the
/// B=1 *design*, not the system the customers would actually produce —
/// exactly what the high-load design comparison needs).
pub fn b1_stationary(params: &SystemParams, q_max: u32) -> Result<StationaryDistribution> {
    let t = derive_thresholds(params);
    if t.b_int != 1 {
        log::warn!(
            "b1_stationary: derived b_int = {} != 1; result describes the A={}, B=1 design",
            t.b_int,
            t.a_int
        );
    }
    b1_stationary_with_threshold(params, t.a_int, q_max)
}

/// Same closed form with an explicit queue threshold `a_int`, regardless of
/// what the cost parameters would derive. The design optimizer evaluates the
/// A=0, B=1 lounge through this entry point.
pub fn b1_stationary_with_threshold(
    params: &SystemParams,
    a_int: u32,
    q_max: u32,
) -> Result<StationaryDistribution> {
    let a = a_int;
    if q_max < a + 2 {
        return Err(Error::TruncationTooSmall {
            given: q_max,
            required: a + 2,
        });
    }
    let rho = params.rho();
    let psi = (1.0 - rho) / (params.mu + params.nu);
    let m = MSequence::new(params, a);
    // rho^(a+2) * psi * mu, the common factor of the interior terms
    let interior = rho.powi(a as i32 + 2) * psi * params.mu;

    let mut entries = Vec::new();
    entries.push(((0, 0), 1.0 - rho));
    entries.push(((1, 0), rho * (1.0 - rho)));
    // pi_{0,1} = 0 by A.1 (queue refills instantly): no entry.
    for q in 2..=q_max {
        let p = if q < a + 2 {
            // interior: subtract the l=1 companion of the same total count
            (rho.powi(q as i32) * (1.0 - rho) - m.ratio(q - 2, a) * interior).max(0.0)
        } else {
            rho.powi(q as i32) * psi * params.nu
        };
        entries.push(((q, 0), p));
    }
    for q in 1..=q_max {
        let p = if q < a + 1 {
            m.ratio(q - 1, a) * interior
        } else {
            rho.powi(q as i32 + 1) * psi * params.mu
        };
        entries.push(((q, 1), p));
    }

    // Omitted mass is psi*(nu + rho*mu)*rho^(q_max+1)/(1-rho), which the
    // plain geometric tail dominates.
    let tail = rho.powi(q_max as i32 + 1);
    Ok(StationaryDistribution::new(
        entries,
        q_max,
        1,
        tail,
        rho,
        TruncationAxis::Queue,
        SourceTag::B1ClosedForm,
    ))
}

/// Stationary distribution of the approximating system (`nu -> 0` with
/// `beta/nu` fixed): queue bounded by `A+1`, lounge unbounded, truncated at
/// `l_max`. States with `q > A+1` are transient and carry no mass.
pub fn approx_stationary(rho: f64, a_int: u32, l_max: u32) -> StationaryDistribution {
    assert!(rho > 0.0 && rho < 1.0);
    assert!(l_max >= 1);
    let a = a_int as i32;
    let denom = 1.0 - rho.powi(a + 1);
    // geometric layer coefficient: pi_{q,l} = layer * rho^l on the lounge-
    // occupied part of the space
    let layer = rho.powi(a + 1) * (1.0 - rho) * (1.0 - rho) / denom;

    let mut entries = Vec::new();
    entries.push(((0, 0), 1.0 - rho));
    for q in 1..=a_int {
        let p = (1.0 - rho) * rho.powi(q as i32) * (1.0 - rho.powi(a + 2 - q as i32)) / denom;
        entries.push(((q, 0), p));
    }
    entries.push(((a_int + 1, 0), layer));
    for l in 1..=l_max {
        let p = layer * rho.powi(l as i32);
        for q in 1..=a_int + 1 {
            entries.push(((q, l), p));
        }
    }

    let tail = (a_int + 1) as f64 * layer * rho.powi(l_max as i32 + 1) / (1.0 - rho);
    StationaryDistribution::new(
        entries,
        a_int + 1,
        l_max,
        tail,
        rho,
        TruncationAxis::Lounge,
        SourceTag::ApproxClosedForm,
    )
}
