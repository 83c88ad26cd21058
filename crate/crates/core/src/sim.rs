//! Event-driven simulation of the queue-lounge system under a chosen
//! decision rule, plus the closed-form-vs-system sweep used to probe how the
//! approximating system tracks the original one as `nu` shrinks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::Serialize;

use crate::analytic::{approx_stationary, truncation_point, DEFAULT_TAIL_TOL};
use crate::ctmc::{build_generator, solve_stationary, DIRECT_TOL};
use crate::dist::{sup_distance, SourceTag, StationaryDistribution, TruncationAxis};
use crate::error::{Error, Result};
use crate::params::{derive_thresholds, DerivedThresholds, SystemParams};
use crate::policy::{decide, decide_threshold, Action, ObservedState};

/// Which decision rule arriving customers follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyVariant {
    /// The raw cost comparison.
    CostRule,
    /// The equivalent integer-threshold rule.
    Threshold,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SimConfig {
    /// Events per replication (every transition counts as one event).
    pub events: u64,
    /// Fraction of simulated time discarded as warmup.
    pub warmup_fraction: f64,
    pub replications: u32,
    pub seed: u64,
    pub policy: PolicyVariant,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            events: 10_000_000,
            warmup_fraction: 0.1,
            replications: 1,
            seed: 0x10_0256,
            policy: PolicyVariant::Threshold,
        }
    }
}

impl SimConfig {
    fn validate(&self) -> Result<()> {
        if self.events == 0 || self.replications == 0 {
            return Err(Error::Config(
                "events and replications must be positive".into(),
            ));
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return Err(Error::Config(format!(
                "warmup_fraction must lie in [0, 1), got {}",
                self.warmup_fraction
            )));
        }
        Ok(())
    }
}

/// Post-warmup statistics of a single replication.
#[derive(Debug, Clone, Serialize)]
pub struct ReplicationStats {
    pub seed: u64,
    pub events: u64,
    /// Total simulated time, including warmup.
    pub sim_time: f64,
    /// Simulated time retained after warmup.
    pub measured_time: f64,
    pub mean_q: f64,
    pub mean_l: f64,
    /// Fraction of post-warmup arrivals that chose the lounge.
    pub lounge_fraction: f64,
    pub arrivals: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimResult {
    /// Time-weighted occupancy distribution pooled over replications.
    pub distribution: StationaryDistribution,
    pub replications: Vec<ReplicationStats>,
}

/// Runs `config.replications` independent replications. Replication `r`
/// is seeded with `config.seed ^ r`, so results are a pure function of the
/// configuration.
pub fn simulate(params: &SystemParams, config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let thresholds = derive_thresholds(params);
    let mut stats = Vec::with_capacity(config.replications as usize);
    let mut pooled: std::collections::BTreeMap<(u32, u32), f64> = Default::default();
    let mut pooled_time = 0.0;
    for rep in 0..config.replications {
        let seed = config.seed ^ rep as u64;
        let (rep_stats, weights) = run_replication(params, &thresholds, config, seed);
        pooled_time += rep_stats.measured_time;
        for ((q, l), w) in weights {
            *pooled.entry((q, l)).or_insert(0.0) += w;
        }
        stats.push(rep_stats);
    }
    let q_max = pooled.keys().map(|&(q, _)| q).max().unwrap_or(0);
    let l_max = pooled.keys().map(|&(_, l)| l).max().unwrap_or(0);
    let distribution = StationaryDistribution::new(
        pooled.into_iter().map(|(s, w)| (s, w / pooled_time)),
        q_max,
        l_max,
        0.0,
        params.rho(),
        TruncationAxis::Queue,
        SourceTag::Simulation,
    );
    Ok(SimResult {
        distribution,
        replications: stats,
    })
}

/// One replication, two passes over the same random stream: the first pass
/// only measures total simulated time so the warmup cutoff is an exact
/// fraction of it, the second replays the identical event sequence and
/// accumulates statistics past the cutoff.
fn run_replication(
    params: &SystemParams,
    thresholds: &DerivedThresholds,
    config: &SimConfig,
    seed: u64,
) -> (
    ReplicationStats,
    std::collections::BTreeMap<(u32, u32), f64>,
) {
    let mut sim_time = 0.0;
    drive(params, thresholds, config, seed, |_, _, dt, _| {
        sim_time += dt;
    });
    let warmup_end = config.warmup_fraction * sim_time;

    let mut weights: std::collections::BTreeMap<(u32, u32), f64> = Default::default();
    let mut t = 0.0;
    let mut weighted_q = 0.0;
    let mut weighted_l = 0.0;
    let mut arrivals = 0u64;
    let mut lounge_joins = 0u64;
    drive(params, thresholds, config, seed, |q, l, dt, arrival| {
        let start = t;
        t += dt;
        let kept = (t.min(sim_time) - start.max(warmup_end)).max(0.0);
        if kept > 0.0 {
            *weights.entry((q, l)).or_insert(0.0) += kept;
            weighted_q += q as f64 * kept;
            weighted_l += l as f64 * kept;
        }
        // PASTA: the decision happens at the end of this interval, in the
        // pre-arrival state; attribute it to the measured window iff the
        // arrival instant lies past the warmup cutoff.
        if t >= warmup_end {
            match arrival {
                Some(Action::JoinQueue) => arrivals += 1,
                Some(Action::JoinLounge) => {
                    arrivals += 1;
                    lounge_joins += 1;
                }
                None => {}
            }
        }
    });
    let measured_time = sim_time - warmup_end;
    let stats = ReplicationStats {
        seed,
        events: config.events,
        sim_time,
        measured_time,
        mean_q: weighted_q / measured_time,
        mean_l: weighted_l / measured_time,
        lounge_fraction: if arrivals == 0 {
            0.0
        } else {
            lounge_joins as f64 / arrivals as f64
        },
        arrivals,
    };
    (stats, weights)
}

/// Core event loop. For every event the callback receives the state the
/// system spent the elapsed interval in, the interval length, and the
/// arriving customer's action if the event was an arrival.
fn drive(
    params: &SystemParams,
    thresholds: &DerivedThresholds,
    config: &SimConfig,
    seed: u64,
    mut on_event: impl FnMut(u32, u32, f64, Option<Action>),
) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lambda, mu, nu) = (params.lambda, params.mu, params.nu);
    let (mut q, mut l) = (0u32, 0u32);
    for _ in 0..config.events {
        let service = if q >= 1 { mu } else { 0.0 };
        let total = lambda + service + l as f64 * nu;
        let dt = rng.sample::<f64, _>(Exp1) / total;
        let u: f64 = rng.gen::<f64>() * total;
        let (prev_q, prev_l) = (q, l);
        let mut action = None;
        if u < lambda {
            // arrival; competing clocks make the observed state PASTA-exact
            let state = ObservedState::new(q, l);
            let a = match config.policy {
                PolicyVariant::CostRule => decide(state, params),
                PolicyVariant::Threshold => decide_threshold(state, thresholds),
            };
            match a {
                Action::JoinQueue => q += 1,
                Action::JoinLounge => l += 1,
            }
            action = Some(a);
        } else if u < lambda + service {
            // service completion; an emptied queue refills from the lounge
            if q >= 2 {
                q -= 1;
            } else if l > 0 {
                l -= 1;
            } else {
                q = 0;
            }
        } else {
            // a lounge occupant's patience clock fires
            l -= 1;
            q += 1;
        }
        on_event(prev_q, prev_l, dt, action);
    }
}

/// How [`conjecture_sweep`] obtains the original system's distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMethod {
    Oracle,
    MonteCarlo,
}

/// One row of the sweep: the distance between the original system and the
/// approximating closed form at a given `nu`, with `beta = eta * nu`.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub nu: f64,
    pub beta: f64,
    pub a_int: u32,
    pub b_int: u32,
    pub distance: f64,
    /// Half-width of a 95% confidence interval over replications
    /// (Monte Carlo with at least two replications only).
    pub ci_half_width: Option<f64>,
}

/// Sweeps `nu` downward holding `lambda`, `mu`, `alpha` and the scaled
/// patience cost `eta = beta / nu` fixed, and measures the sup-norm distance
/// between the original system's stationary distribution and the
/// approximating closed form.
pub fn conjecture_sweep(
    lambda: f64,
    mu: f64,
    alpha: f64,
    eta: f64,
    nus: &[f64],
    method: SweepMethod,
    sim_config: &SimConfig,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(nus.len());
    for &nu in nus {
        let params = SystemParams::new(lambda, mu, nu, alpha, eta * nu)?;
        let t = derive_thresholds(&params);
        let rho = params.rho();
        let l_max = truncation_point(rho, DEFAULT_TAIL_TOL);
        let approx = approx_stationary(rho, t.a_int, l_max);
        let (distance, ci_half_width) = match method {
            SweepMethod::Oracle => {
                let q_max = truncation_point(rho, DEFAULT_TAIL_TOL).max(t.a_int + t.b_int + 3);
                let gen = build_generator(&params, &t, q_max)?;
                let d = solve_stationary(&gen, DIRECT_TOL)?;
                (sup_distance(&approx, &d), None)
            }
            SweepMethod::MonteCarlo => {
                let result = simulate(&params, sim_config)?;
                let pooled = sup_distance(&approx, &result.distribution);
                let ci = if sim_config.replications >= 2 {
                    let per_rep: Vec<f64> = (0..sim_config.replications)
                        .map(|rep| {
                            let mut one = *sim_config;
                            one.replications = 1;
                            one.seed = sim_config.seed ^ rep as u64;
                            simulate(&params, &one).map(|r| sup_distance(&approx, &r.distribution))
                        })
                        .collect::<Result<_>>()?;
                    let n = per_rep.len() as f64;
                    let mean = per_rep.iter().sum::<f64>() / n;
                    let var = per_rep.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
                    Some(1.96 * (var / n).sqrt())
                } else {
                    None
                };
                (pooled, ci)
            }
        };
        rows.push(SweepRow {
            nu,
            beta: eta * nu,
            a_int: t.a_int,
            b_int: t.b_int,
            distance,
            ci_half_width,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{b1_stationary, mm1_pmf};

    fn b1_instance() -> SystemParams {
        SystemParams::new(2.0, 2.5, 0.2, 1.0, 0.176).unwrap()
    }

    fn quick_config(events: u64) -> SimConfig {
        SimConfig {
            events,
            ..SimConfig::default()
        }
    }

    #[test]
    fn same_seed_reproduces_exactly() {
        let p = b1_instance();
        let cfg = quick_config(50_000);
        let r1 = simulate(&p, &cfg).unwrap();
        let r2 = simulate(&p, &cfg).unwrap();
        let e1: Vec<_> = r1.distribution.iter().collect();
        let e2: Vec<_> = r2.distribution.iter().collect();
        assert_eq!(e1, e2);
        assert_eq!(
            r1.replications[0].sim_time.to_bits(),
            r2.replications[0].sim_time.to_bits()
        );
    }

    #[test]
    fn different_seed_differs() {
        let p = b1_instance();
        let mut cfg = quick_config(50_000);
        let r1 = simulate(&p, &cfg).unwrap();
        cfg.seed ^= 0xDEAD;
        let r2 = simulate(&p, &cfg).unwrap();
        assert_ne!(
            r1.replications[0].sim_time.to_bits(),
            r2.replications[0].sim_time.to_bits()
        );
    }

    #[test]
    fn high_load_never_uses_lounge() {
        // rho = 0.92 >= delta = 0.8: the lounge is provably never chosen
        let p = SystemParams::new(2.3, 2.5, 0.3, 1.0, 0.2).unwrap();
        let r = simulate(&p, &quick_config(200_000)).unwrap();
        assert_eq!(r.replications[0].lounge_fraction, 0.0);
        for (_, l, _) in r.distribution.iter() {
            assert_eq!(l, 0);
        }
        // and the marginal tracks plain M/M/1
        for n in 0..=8 {
            let err = (r.distribution.marginal_total(n) - mm1_pmf(p.rho(), n)).abs();
            assert!(err < 2e-2, "n={n}: {err}");
        }
    }

    #[test]
    fn no_dwell_at_empty_queue() {
        let p = b1_instance();
        let r = simulate(&p, &quick_config(200_000)).unwrap();
        for (q, l, _) in r.distribution.iter() {
            assert!(!(q == 0 && l > 0), "mass at (0, {l})");
        }
    }

    #[test]
    fn empirical_matches_closed_form() {
        let p = b1_instance();
        let r = simulate(&p, &quick_config(2_000_000)).unwrap();
        let closed = b1_stationary(&p, 60).unwrap();
        let d = sup_distance(&closed, &r.distribution);
        assert!(d < 5e-3, "sup distance {d}");
    }

    #[test]
    fn cost_rule_and_threshold_policy_agree() {
        let p = b1_instance();
        let mut cfg = quick_config(50_000);
        let r1 = simulate(&p, &cfg).unwrap();
        cfg.policy = PolicyVariant::CostRule;
        let r2 = simulate(&p, &cfg).unwrap();
        assert_eq!(
            r1.replications[0].sim_time.to_bits(),
            r2.replications[0].sim_time.to_bits()
        );
        assert_eq!(
            r1.replications[0].lounge_fraction,
            r2.replications[0].lounge_fraction
        );
    }

    #[test]
    fn replications_are_pooled() {
        let p = b1_instance();
        let cfg = SimConfig {
            events: 30_000,
            replications: 3,
            ..SimConfig::default()
        };
        let r = simulate(&p, &cfg).unwrap();
        assert_eq!(r.replications.len(), 3);
        assert!((r.distribution.total_mass() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let p = b1_instance();
        let mut cfg = quick_config(0);
        assert!(simulate(&p, &cfg).is_err());
        cfg.events = 100;
        cfg.warmup_fraction = 1.0;
        assert!(simulate(&p, &cfg).is_err());
    }

    #[test]
    fn oracle_sweep_distance_shrinks_with_nu() {
        let rows = conjecture_sweep(
            6.0,
            7.2,
            0.45,
            0.35,
            &[0.4, 0.1],
            SweepMethod::Oracle,
            &SimConfig::default(),
        )
        .unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[1].distance < rows[0].distance);
        assert!(rows.iter().all(|r| r.a_int == 5));
    }
}
