//! Deterministic evolution on the rotation-reduced state space.
//!
//! A rule commutes with translations, so it maps whole orbits onto whole
//! orbits and the dynamics reduces to a function on representative indices.
//! Distributions store the total probability of each orbit; pushing them
//! forward is then plain accumulation.

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::necklaces::NecklaceIndex;
use crate::rules::RuleTable;

/// Absolute tolerance used to decide that two distributions coincide.
pub const PERIOD_TOLERANCE: f64 = 1e-12;

/// Representative-to-representative map advancing `steps` time steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuccessorMap {
    next: Vec<u32>,
    steps: u64,
    rule: u8,
    n: u32,
}

impl SuccessorMap {
    /// The zero-step map.
    pub fn identity(rule: RuleTable, index: &NecklaceIndex) -> Self {
        Self {
            next: (0..index.len() as u32).collect(),
            steps: 0,
            rule: rule.number(),
            n: index.n(),
        }
    }

    pub fn next(&self) -> &[u32] {
        &self.next
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn rule(&self) -> u8 {
        self.rule
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.next.len()
    }

    pub fn is_empty(&self) -> bool {
        self.next.is_empty()
    }

    #[inline]
    pub fn image(&self, i: usize) -> usize {
        self.next[i] as usize
    }
}

/// One-step map: `next[i]` is the orbit of the rule applied to representative `i`.
pub fn build_successor(rule: RuleTable, index: &NecklaceIndex) -> SuccessorMap {
    let n = index.n();
    let next: Vec<u32> = index
        .representatives()
        .par_iter()
        .map(|&rep| index.index_of(rule.apply_bits(rep, n)) as u32)
        .collect();
    SuccessorMap {
        next,
        steps: 1,
        rule: rule.number(),
        n,
    }
}

/// Apply `a` then `b`.
pub fn compose(a: &SuccessorMap, b: &SuccessorMap) -> Result<SuccessorMap> {
    if a.rule != b.rule || a.n != b.n || a.next.len() != b.next.len() {
        return invalid(format!(
            "cannot compose maps for (rule {}, N={}) and (rule {}, N={})",
            a.rule, a.n, b.rule, b.n
        ));
    }
    let steps = a
        .steps
        .checked_add(b.steps)
        .ok_or_else(|| crate::error::Error::InvalidArgument("step count overflow".into()))?;
    let next = a.next.par_iter().map(|&j| b.next[j as usize]).collect();
    Ok(SuccessorMap {
        next,
        steps,
        rule: a.rule,
        n: a.n,
    })
}

fn square_into(src: &SuccessorMap, dst: &mut Vec<u32>) {
    dst.par_iter_mut()
        .zip(src.next.par_iter())
        .for_each(|(d, &j)| *d = src.next[j as usize]);
}

/// Map advancing `2^doublings` steps, obtained by repeated squaring of `one_step`.
pub fn doubled_map(one_step: &SuccessorMap, doublings: u32) -> SuccessorMap {
    let mut cur = one_step.clone();
    let mut buf = vec![0u32; cur.next.len()];
    for _ in 0..doublings {
        square_into(&cur, &mut buf);
        std::mem::swap(&mut cur.next, &mut buf);
        cur.steps = cur.steps.saturating_mul(2);
    }
    cur
}

/// Map advancing `2^N` steps. No cycle of an `N`-site ring is longer than
/// `2^N`, so every image lies on its limit cycle.
pub fn jump_map(rule: RuleTable, index: &NecklaceIndex) -> SuccessorMap {
    let one = build_successor(rule, index);
    doubled_map(&one, index.n())
}

/// Probability mass per orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedDistribution {
    orbit_mass: Vec<f64>,
    n: u32,
    q: f64,
}

impl ReducedDistribution {
    pub fn from_masses(orbit_mass: Vec<f64>, n: u32, q: f64) -> Self {
        Self { orbit_mass, n, q }
    }

    pub fn orbit_mass(&self) -> &[f64] {
        &self.orbit_mass
    }

    pub(crate) fn orbit_mass_mut(&mut self) -> &mut [f64] {
        &mut self.orbit_mass
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn len(&self) -> usize {
        self.orbit_mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbit_mass.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        crate::info::compensated_sum(self.orbit_mass.iter().copied())
    }

    /// Probability of each individual state in orbit `i`.
    pub fn state_probability(&self, index: &NecklaceIndex, i: usize) -> f64 {
        self.orbit_mass[i] / index.orbit_size(i) as f64
    }

    /// Largest absolute difference of orbit masses.
    pub fn max_abs_diff(&self, other: &ReducedDistribution) -> f64 {
        self.orbit_mass
            .iter()
            .zip(&other.orbit_mass)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Product ensemble with fill probability `q` for every site.
pub fn initial_distribution(index: &NecklaceIndex, q: f64) -> Result<ReducedDistribution> {
    if !(0.0..=1.0).contains(&q) {
        return invalid(format!("fill probability {q} outside [0, 1]"));
    }
    let n = index.n();
    // q^w (1-q)^(N-w) for every popcount w.
    let weights: Vec<f64> = (0..=n as i32)
        .map(|w| q.powi(w) * (1.0 - q).powi(n as i32 - w))
        .collect();
    let orbit_mass = index
        .representatives()
        .iter()
        .zip(index.orbit_sizes())
        .map(|(&rep, &size)| size as f64 * weights[rep.count_ones() as usize])
        .collect();
    Ok(ReducedDistribution { orbit_mass, n, q })
}

/// `out[j] = Σ_{i: next[i] = j} d[i]`.
pub fn push_forward(d: &ReducedDistribution, m: &SuccessorMap) -> ReducedDistribution {
    let mut out = vec![0.0; d.orbit_mass.len()];
    push_forward_into(d, m, &mut out);
    ReducedDistribution {
        orbit_mass: out,
        n: d.n,
        q: d.q,
    }
}

/// In-place variant reusing `out` as the destination buffer.
pub fn push_forward_into(d: &ReducedDistribution, m: &SuccessorMap, out: &mut [f64]) {
    assert_eq!(d.orbit_mass.len(), m.next.len(), "distribution and map sizes differ");
    out.iter_mut().for_each(|x| *x = 0.0);
    // Serial scatter keeps the summation order fixed.
    for (&mass, &j) in d.orbit_mass.iter().zip(&m.next) {
        if mass != 0.0 {
            out[j as usize] += mass;
        }
    }
}

/// Smallest `T ≤ t_max` with `‖p(t+T) − p(t)‖_∞ ≤ 1e-12`, if any.
pub fn detect_period(
    d_late: &ReducedDistribution,
    one_step: &SuccessorMap,
    t_max: u32,
) -> Option<u32> {
    let mut cur = d_late.clone();
    let mut buf = vec![0.0; cur.len()];
    for t in 1..=t_max {
        push_forward_into(&cur, one_step, &mut buf);
        std::mem::swap(&mut cur.orbit_mass, &mut buf);
        if cur.max_abs_diff(d_late) <= PERIOD_TOLERANCE {
            return Some(t);
        }
    }
    None
}
