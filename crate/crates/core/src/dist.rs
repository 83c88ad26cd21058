//! Sparse stationary distributions over `(q, l)` states, with truncation
//! metadata and the comparison/serialization helpers shared by the closed
//! forms, the CTMC oracle and the simulator.

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

/// Which construction produced a distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceTag {
    B1ClosedForm,
    ApproxClosedForm,
    Oracle,
    Simulation,
}

impl SourceTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            SourceTag::B1ClosedForm => "b1-closed-form",
            SourceTag::ApproxClosedForm => "approx-closed-form",
            SourceTag::Oracle => "oracle",
            SourceTag::Simulation => "simulation",
        }
    }
}

/// Axis along which the state space was truncated; the tail bound of
/// a second-moment sum depends on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TruncationAxis {
    /// States with `q > q_max` omitted (original system: `l` is bounded by B).
    Queue,
    /// States with `l > l_max` omitted (approximating system: `q <= A+1`).
    Lounge,
}

/// A probability mass function over `(q, l)`, stored sparsely.
///
/// Invariants: all probabilities lie in `[0, 1]`, the stored mass plus
/// `tail_mass_bound` covers 1 up to 1e-12, and assumption A.1 forbids mass at
/// `(0, l)` for `l > 0`.
#[derive(Debug, Clone, Serialize)]
pub struct StationaryDistribution {
    #[serde(serialize_with = "serialize_entries")]
    entries: BTreeMap<(u32, u32), f64>,
    pub q_max: u32,
    pub l_max: u32,
    /// Upper bound on the probability mass outside the stored support.
    pub tail_mass_bound: f64,
    pub rho: f64,
    pub truncation_axis: TruncationAxis,
    pub source_tag: SourceTag,
}

impl StationaryDistribution {
    /// Builds a distribution from raw entries; zero entries are dropped.
    ///
    /// Panics (debug) if an entry violates A.1 or lies outside `[0, 1]`.
    pub fn new(
        entries: impl IntoIterator<Item = ((u32, u32), f64)>,
        q_max: u32,
        l_max: u32,
        tail_mass_bound: f64,
        rho: f64,
        truncation_axis: TruncationAxis,
        source_tag: SourceTag,
    ) -> Self {
        let mut map = BTreeMap::new();
        for ((q, l), p) in entries {
            debug_assert!(!(q == 0 && l > 0), "A.1 violated: mass at (0, {l})");
            debug_assert!((-1e-12..=1.0 + 1e-12).contains(&p), "p({q},{l}) = {p}");
            if p > 0.0 {
                map.insert((q, l), p);
            }
        }
        StationaryDistribution {
            entries: map,
            q_max,
            l_max,
            tail_mass_bound,
            rho,
            truncation_axis,
            source_tag,
        }
    }

    pub fn get(&self, q: u32, l: u32) -> f64 {
        self.entries.get(&(q, l)).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        self.entries.iter().map(|(&(q, l), &p)| (q, l, p))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.entries.values().sum()
    }

    /// `P(Q + L = n)` over the stored support.
    pub fn marginal_total(&self, n: u32) -> f64 {
        (0..=n).map(|l| self.get(n - l, l)).sum()
    }

    pub fn mean_q(&self) -> f64 {
        self.iter().map(|(q, _, p)| q as f64 * p).sum()
    }

    pub fn mean_l(&self) -> f64 {
        self.iter().map(|(_, l, p)| l as f64 * p).sum()
    }

    pub fn second_moment_q(&self) -> f64 {
        self.iter().map(|(q, _, p)| (q as f64).powi(2) * p).sum()
    }

    pub fn second_moment_l(&self) -> f64 {
        self.iter().map(|(_, l, p)| (l as f64).powi(2) * p).sum()
    }

    /// Writes `q,l,probability,source_tag` rows (RFC-4180, header included).
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "q,l,probability,source_tag")?;
        for (q, l, p) in self.iter() {
            writeln!(w, "{},{},{},{}", q, l, p, self.source_tag.as_str())?;
        }
        Ok(())
    }
}

/// JSON-friendly form of the sparse map: a sequence of `{q, l, probability}`
/// records (tuple keys are not representable as JSON object keys).
fn serialize_entries<S: serde::Serializer>(
    entries: &BTreeMap<(u32, u32), f64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    #[derive(Serialize)]
    struct Entry {
        q: u32,
        l: u32,
        probability: f64,
    }
    s.collect_seq(
        entries
            .iter()
            .map(|(&(q, l), &probability)| Entry { q, l, probability }),
    )
}

/// Sup-norm distance over the union of supports.
pub fn sup_distance(d1: &StationaryDistribution, d2: &StationaryDistribution) -> f64 {
    let mut sup: f64 = 0.0;
    for (q, l, p) in d1.iter() {
        sup = sup.max((p - d2.get(q, l)).abs());
    }
    for (q, l, p) in d2.iter() {
        sup = sup.max((p - d1.get(q, l)).abs());
    }
    sup
}
