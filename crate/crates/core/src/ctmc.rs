//! Brute-force oracle: exact generator of the truncated queue-lounge CTMC
//! under the threshold policy, and a numerical stationary solve. Deliberately
//! the dumbest correct thing — no exploitation of the quasi-birth-death
//! block structure.

use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::dist::{SourceTag, StationaryDistribution, TruncationAxis};
use crate::error::{Error, Result};
use crate::params::{DerivedThresholds, SystemParams};

/// Enumerated truncated state space with a dense index bijection.
/// States `(0, l)` with `l > 0` are unreachable under A.1 and excluded
/// by construction.
#[derive(Debug, Clone)]
pub enum StateSpace {
    /// Original system: `q <= q_max`, `l <= b` (lounge capped by the
    /// customers' own threshold).
    Original { q_max: u32, b: u32 },
    /// Approximating system: `q <= a + 1`, `l <= l_max`.
    Approximating { a: u32, l_max: u32 },
}

impl StateSpace {
    pub fn len(&self) -> usize {
        match *self {
            StateSpace::Original { q_max, b } => 1 + q_max as usize * (b as usize + 1),
            StateSpace::Approximating { a, l_max } => 1 + (a as usize + 1) * (l_max as usize + 1),
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Dense index of `(q, l)`, or `None` if outside the space.
    pub fn index_of(&self, q: u32, l: u32) -> Option<usize> {
        if q == 0 {
            return (l == 0).then_some(0);
        }
        match *self {
            StateSpace::Original { q_max, b } => {
                (q <= q_max && l <= b).then(|| 1 + (q as usize - 1) * (b as usize + 1) + l as usize)
            }
            StateSpace::Approximating { a, l_max } => (q <= a + 1 && l <= l_max)
                .then(|| 1 + l as usize * (a as usize + 1) + (q as usize - 1)),
        }
    }

    pub fn state_of(&self, index: usize) -> (u32, u32) {
        if index == 0 {
            return (0, 0);
        }
        let i = index - 1;
        match *self {
            StateSpace::Original { b, .. } => {
                let width = b as usize + 1;
                ((i / width) as u32 + 1, (i % width) as u32)
            }
            StateSpace::Approximating { a, .. } => {
                let width = a as usize + 1;
                ((i % width) as u32 + 1, (i / width) as u32)
            }
        }
    }

    pub fn states(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.len()).map(|i| self.state_of(i))
    }
}

/// Sparse transition-rate matrix over a [`StateSpace`]. Off-diagonal rates
/// are nonnegative and each diagonal entry is minus its row's off-diagonal
/// sum, so rows sum to zero exactly.
#[derive(Debug, Clone)]
pub struct Generator {
    pub space: StateSpace,
    /// `(from, to, rate)` off-diagonal entries.
    rates: Vec<(usize, usize, f64)>,
    diagonal: Vec<f64>,
    pub truncation_note: String,
}

impl Generator {
    fn new(space: StateSpace, truncation_note: String) -> Self {
        let n = space.len();
        Generator {
            space,
            rates: Vec::new(),
            diagonal: vec![0.0; n],
            truncation_note,
        }
    }

    fn add(&mut self, from: usize, to: usize, rate: f64) {
        debug_assert!(rate >= 0.0 && from != to);
        if rate > 0.0 {
            self.rates.push((from, to, rate));
            self.diagonal[from] -= rate;
        }
    }

    pub fn len(&self) -> usize {
        self.diagonal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diagonal.is_empty()
    }

    pub fn off_diagonals(&self) -> &[(usize, usize, f64)] {
        &self.rates
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// Largest total exit rate, the uniformization constant.
    pub fn max_exit_rate(&self) -> f64 {
        self.diagonal.iter().fold(0.0, |m, &d| m.max(-d))
    }

    /// Row sums including the diagonal; all zero up to float accumulation.
    pub fn row_sums(&self) -> Vec<f64> {
        let mut sums = self.diagonal.clone();
        for &(from, _, rate) in &self.rates {
            sums[from] += rate;
        }
        sums
    }

    /// `y = pi * Q` for a row vector `pi`.
    pub fn apply_left(&self, pi: &[f64], y: &mut [f64]) {
        for (yi, (&p, &d)) in y.iter_mut().zip(pi.iter().zip(&self.diagonal)) {
            *yi = p * d;
        }
        for &(from, to, rate) in &self.rates {
            y[to] += pi[from] * rate;
        }
    }

    /// Writes the sparse triplets as `row,col,rate` CSV (diagonal included).
    pub fn write_triplet_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "row,col,rate")?;
        let mut all: Vec<(usize, usize, f64)> = self
            .diagonal
            .iter()
            .enumerate()
            .filter(|(_, &d)| d != 0.0)
            .map(|(i, &d)| (i, i, d))
            .chain(self.rates.iter().copied())
            .collect();
        all.sort_by_key(|&(r, c, _)| (r, c));
        for (r, c, rate) in all {
            writeln!(w, "{},{},{}", r, c, rate)?;
        }
        Ok(())
    }
}

/// Builds the generator of the original system under the integer-threshold
/// policy `(a, b)`, truncated at `q_max`. Arrivals at the truncation edge
/// (and the lounge exits that would cross it) are dropped; with geometric
/// tails this biases mass down by at most the recorded tail bound.
pub fn build_generator_with_thresholds(
    params: &SystemParams,
    a: u32,
    b: u32,
    q_max: u32,
) -> Result<Generator> {
    if q_max <= a + b + 2 {
        return Err(Error::TruncationTooSmall {
            given: q_max,
            required: a + b + 3,
        });
    }
    let space = StateSpace::Original { q_max, b };
    let mut gen = Generator::new(
        space,
        format!("arrivals and lounge exits dropped at q = {q_max}"),
    );
    let (lambda, mu, nu) = (params.lambda, params.mu, params.nu);
    for i in 0..gen.len() {
        let (q, l) = gen.space.state_of(i);
        // arrival: lounge iff q > a and l < b, else queue
        if q > a && l < b {
            let to = gen.space.index_of(q, l + 1).unwrap();
            gen.add(i, to, lambda);
        } else if q < q_max {
            let to = gen.space.index_of(q + 1, l).unwrap();
            gen.add(i, to, lambda);
        }
        // service completion; an emptied queue refills from the lounge (A.1)
        if q >= 2 {
            let to = gen.space.index_of(q - 1, l).unwrap();
            gen.add(i, to, mu);
        } else if q == 1 {
            let to = if l > 0 {
                gen.space.index_of(1, l - 1).unwrap()
            } else {
                0
            };
            gen.add(i, to, mu);
        }
        // lounge exits, one Exp(nu) clock per occupant
        if q >= 1 && l > 0 && q < q_max {
            let to = gen.space.index_of(q + 1, l - 1).unwrap();
            gen.add(i, to, l as f64 * nu);
        }
    }
    Ok(gen)
}

/// As [`build_generator_with_thresholds`] with the thresholds the customers
/// themselves would derive.
pub fn build_generator(
    params: &SystemParams,
    thresholds: &DerivedThresholds,
    q_max: u32,
) -> Result<Generator> {
    build_generator_with_thresholds(params, thresholds.a_int, thresholds.b_int, q_max)
}

/// Generator of the approximating system (`nu = 0` dynamics): arrivals grow
/// the queue up to `A+1` and the lounge beyond it; the lounge drains only
/// through an idle server. Rates are expressed with `mu = 1`, which leaves
/// the stationary distribution unchanged.
pub fn build_generator_approx(rho: f64, a: u32, l_max: u32) -> Generator {
    assert!(rho > 0.0 && rho < 1.0);
    assert!(l_max >= 2);
    let space = StateSpace::Approximating { a, l_max };
    let mut gen = Generator::new(space, format!("lounge arrivals dropped at l = {l_max}"));
    let (lambda, mu) = (rho, 1.0);
    for i in 0..gen.len() {
        let (q, l) = gen.space.state_of(i);
        if q <= a {
            let to = gen.space.index_of(q + 1, l).unwrap();
            gen.add(i, to, lambda);
        } else if l < l_max {
            let to = gen.space.index_of(q, l + 1).unwrap();
            gen.add(i, to, lambda);
        }
        if q >= 2 {
            let to = gen.space.index_of(q - 1, l).unwrap();
            gen.add(i, to, mu);
        } else if q == 1 {
            let to = if l > 0 {
                gen.space.index_of(1, l - 1).unwrap()
            } else {
                0
            };
            gen.add(i, to, mu);
        }
    }
    gen
}

/// How [`solve_stationary_with`] picks its algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    /// Dense linear solve up to [`DIRECT_SOLVE_LIMIT`] states, iterative
    /// beyond.
    Auto,
    Direct,
    PowerIteration,
}

/// State-count cutover from the dense solve to uniformization.
pub const DIRECT_SOLVE_LIMIT: usize = 5000;
/// Default residual tolerance for the direct solve.
pub const DIRECT_TOL: f64 = 1e-12;
/// Default residual tolerance for the iterative solve.
pub const ITERATIVE_TOL: f64 = 1e-10;
const MAX_ITERATIONS: u64 = 10_000_000;

/// Solves `pi * Q = 0`, `sum(pi) = 1` for the retained communicating class
/// and checks the residual `||pi * Q||_inf < tol`.
pub fn solve_stationary(gen: &Generator, tol: f64) -> Result<StationaryDistribution> {
    solve_stationary_with(gen, tol, SolveMethod::Auto)
}

pub fn solve_stationary_with(
    gen: &Generator,
    tol: f64,
    method: SolveMethod,
) -> Result<StationaryDistribution> {
    assert!(tol > 0.0);
    let n = gen.len();
    let direct = match method {
        SolveMethod::Auto => n <= DIRECT_SOLVE_LIMIT,
        SolveMethod::Direct => true,
        SolveMethod::PowerIteration => false,
    };
    let pi = if direct {
        solve_direct(gen, tol)?
    } else {
        solve_power_iteration(gen, tol)?
    };
    Ok(distribution_from_vector(gen, &pi))
}

/// Dense route: transpose the generator, replace the balance equation of
/// state 0 with the normalization row, LU-solve, then polish with two steps
/// of iterative refinement so the residual check at 1e-12 is meaningful.
fn solve_direct(gen: &Generator, tol: f64) -> Result<Vec<f64>> {
    let n = gen.len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (i, &d) in gen.diagonal().iter().enumerate() {
        m[(i, i)] = d;
    }
    for &(from, to, rate) in gen.off_diagonals() {
        m[(to, from)] = rate;
    }
    for j in 0..n {
        m[(0, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(n);
    b[0] = 1.0;

    let lu = m.clone().lu();
    let mut x = lu.solve(&b).ok_or(Error::SingularSystem)?;
    for _ in 0..2 {
        let r = &b - &m * &x;
        if let Some(dx) = lu.solve(&r) {
            x += dx;
        }
    }

    let mut pi: Vec<f64> = x.iter().copied().collect();
    normalize(&mut pi);
    let residual = residual_inf(gen, &pi);
    if residual >= tol {
        return Err(Error::NonConvergence {
            iterations: 0,
            residual,
            tol,
        });
    }
    Ok(pi)
}

/// Iterative route: uniformize with the maximum exit rate and power-iterate
/// `pi <- pi (I + Q/Lambda)` until the successive sup-norm change drops
/// below `tol / Lambda`.
fn solve_power_iteration(gen: &Generator, tol: f64) -> Result<Vec<f64>> {
    let n = gen.len();
    let big_lambda = gen.max_exit_rate();
    let mut pi = vec![1.0 / n as f64; n];
    let mut y = vec![0.0; n];
    let mut iterations = 0u64;
    loop {
        gen.apply_left(&pi, &mut y);
        let mut change: f64 = 0.0;
        for (p, yi) in pi.iter_mut().zip(&y) {
            let step = yi / big_lambda;
            change = change.max(step.abs());
            *p += step;
        }
        iterations += 1;
        if change < tol / big_lambda {
            break;
        }
        if iterations >= MAX_ITERATIONS {
            normalize(&mut pi);
            return Err(Error::NonConvergence {
                iterations,
                residual: residual_inf(gen, &pi),
                tol,
            });
        }
        if iterations.is_multiple_of(1000) {
            normalize(&mut pi);
        }
    }
    normalize(&mut pi);
    let residual = residual_inf(gen, &pi);
    if residual >= tol {
        return Err(Error::NonConvergence {
            iterations,
            residual,
            tol,
        });
    }
    Ok(pi)
}

fn normalize(pi: &mut [f64]) {
    for p in pi.iter_mut() {
        if *p < 0.0 {
            *p = 0.0;
        }
    }
    let total: f64 = pi.iter().sum();
    for p in pi.iter_mut() {
        *p /= total;
    }
}

fn residual_inf(gen: &Generator, pi: &[f64]) -> f64 {
    let mut y = vec![0.0; pi.len()];
    gen.apply_left(pi, &mut y);
    y.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn distribution_from_vector(gen: &Generator, pi: &[f64]) -> StationaryDistribution {
    let rho_tail;
    let (q_max, l_max, axis) = match gen.space {
        StateSpace::Original { q_max, b } => {
            rho_tail = q_max;
            (q_max, b, TruncationAxis::Queue)
        }
        StateSpace::Approximating { a, l_max } => {
            rho_tail = l_max;
            (a + 1, l_max, TruncationAxis::Lounge)
        }
    };
    // The truncated chain renormalizes onto the retained states; the
    // geometric tail bound records the bias relative to the infinite chain.
    let rho = estimate_rho(gen);
    let tail = rho.powi(rho_tail as i32 + 1);
    let entries = gen
        .space
        .states()
        .enumerate()
        .map(|(i, (q, l))| ((q, l), pi[i]));
    StationaryDistribution::new(entries, q_max, l_max, tail, rho, axis, SourceTag::Oracle)
}

fn estimate_rho(gen: &Generator) -> f64 {
    // lambda = rate out of (0,0); mu = service rate out of (1,0)
    let lambda: f64 = gen
        .off_diagonals()
        .iter()
        .filter(|&&(from, _, _)| from == 0)
        .map(|&(_, _, r)| r)
        .sum();
    let i10 = gen.space.index_of(1, 0).unwrap();
    let mu: f64 = gen
        .off_diagonals()
        .iter()
        .filter(|&&(from, to, _)| from == i10 && to == 0)
        .map(|&(_, _, r)| r)
        .sum();
    lambda / mu
}
