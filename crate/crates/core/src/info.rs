//! Marginals, Shannon entropies and mutual information of reduced distributions.
//!
//! All entropies are in bits. Marginals expand each orbit over its distinct
//! rotations at per-state weight `mass / orbit_size`, so a pass costs one visit
//! per state in the support of the distribution.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::evolution::{
    build_successor, doubled_map, initial_distribution, push_forward, push_forward_into,
    ReducedDistribution, PERIOD_TOLERANCE,
};
use crate::necklaces::NecklaceIndex;
use crate::rules::{rotate_left, site_mask, RuleTable};

/// Tiny negative mutual information from rounding is clamped to zero up to this size.
pub const MI_NEGATIVE_FLOOR: f64 = 1e-10;
/// Default averaging window after the jump.
pub const DEFAULT_T_AV: u32 = 10;

const MAX_MARGINAL_BITS: u32 = 32;
const MARGINAL_CHUNKS: usize = 64;

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = Compensated::default();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Compensated {
    sum: f64,
    comp: f64,
}

impl Compensated {
    #[inline]
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub(crate) fn value(self) -> f64 {
        self.sum + self.comp
    }
}

/// Contiguous arc of sites `start .. start+len` (0-based, wrapping).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Region {
    pub start: u32,
    pub len: u32,
}

impl Region {
    pub fn new(start: u32, len: u32) -> Self {
        Self { start, len }
    }

    /// Sites `1..N/2`.
    pub fn left_half(n: u32) -> Self {
        Self::new(0, n / 2)
    }

    /// Sites `N/2+1..N`.
    pub fn right_half(n: u32) -> Self {
        Self::new(n / 2, n / 2)
    }

    /// Quarter arcs `1..N/4` and `N/2+1..3N/4`, diametrically opposite.
    pub fn opposite_quarters(n: u32) -> (Self, Self) {
        (Self::new(0, n / 4), Self::new(n / 2, n / 4))
    }

    fn sites(self, n: u32) -> impl Iterator<Item = u32> {
        (0..self.len).map(move |k| (self.start + k) % n)
    }

    /// Region bits of a packed ring state, first site most significant.
    #[inline]
    fn extract(self, bits: u64, n: u32) -> u64 {
        (rotate_left(bits, self.start, n) >> (n - self.len)) & site_mask(self.len)
    }
}

fn validate_regions(regions: &[Region], n: u32) -> Result<u32> {
    let mut used = vec![false; n as usize];
    let mut total = 0u32;
    for r in regions {
        if r.len == 0 || r.len > n || r.start >= n {
            return invalid(format!("region {r:?} does not fit a ring of {n} sites"));
        }
        for s in r.sites(n) {
            if std::mem::replace(&mut used[s as usize], true) {
                return invalid(format!("regions overlap at site {}", s + 1));
            }
        }
        total += r.len;
    }
    if total > MAX_MARGINAL_BITS {
        return invalid(format!("marginal over {total} sites is too large"));
    }
    Ok(total)
}

/// Distribution over the concatenated bit-configurations of `regions`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMarginal {
    pub regions: Vec<Region>,
    pub probs: Vec<f64>,
}

impl RegionMarginal {
    pub fn entropy(&self) -> Result<f64> {
        entropy(&self.probs)
    }
}

/// Base-2 Shannon entropy with `0 log 0 = 0`.
pub fn entropy(probs: &[f64]) -> Result<f64> {
    let mut acc = Compensated::default();
    for &p in probs {
        if p < -1e-12 {
            return Err(Error::Data(format!("negative probability {p}")));
        }
        if p > 0.0 {
            acc.add(-p * p.log2());
        }
    }
    Ok(acc.value())
}

/// Entropy of the full distribution from orbit masses.
pub fn total_entropy(d: &ReducedDistribution, index: &NecklaceIndex) -> f64 {
    let mut acc = Compensated::default();
    for (i, &mass) in d.orbit_mass().iter().enumerate() {
        if mass > 0.0 {
            let per_state = mass / index.orbit_size(i) as f64;
            acc.add(-mass * per_state.log2());
        }
    }
    acc.value()
}

/// Several marginals in one pass over the support of `d`.
fn marginals_many(
    d: &ReducedDistribution,
    index: &NecklaceIndex,
    specs: &[Vec<Region>],
) -> Vec<Vec<f64>> {
    let n = index.n();
    let sizes: Vec<usize> = specs
        .iter()
        .map(|s| 1usize << s.iter().map(|r| r.len).sum::<u32>())
        .collect();
    let masses = d.orbit_mass();
    let reps = index.representatives();
    let chunk = masses.len().div_ceil(MARGINAL_CHUNKS).max(1);

    let partials: Vec<Vec<Vec<Compensated>>> = masses
        .par_chunks(chunk)
        .zip(reps.par_chunks(chunk))
        .zip(index.orbit_sizes().par_chunks(chunk))
        .map(|((mass, rep), size)| {
            let mut acc: Vec<Vec<Compensated>> = sizes
                .iter()
                .map(|&s| vec![Compensated::default(); s])
                .collect();
            for ((&m, &r), &sz) in mass.iter().zip(rep).zip(size) {
                if m == 0.0 {
                    continue;
                }
                let w = m / sz as f64;
                let mut x = r;
                for _ in 0..sz {
                    for (spec, bins) in specs.iter().zip(acc.iter_mut()) {
                        let mut idx = 0u64;
                        for reg in spec {
                            idx = (idx << reg.len) | reg.extract(x, n);
                        }
                        bins[idx as usize].add(w);
                    }
                    x = rotate_left(x, 1, n);
                }
            }
            acc
        })
        .collect();

    sizes
        .iter()
        .enumerate()
        .map(|(k, &s)| {
            (0..s)
                .map(|b| {
                    let mut total = Compensated::default();
                    for part in &partials {
                        let c = part[k][b];
                        total.add(c.sum);
                        total.add(c.comp);
                    }
                    total.value()
                })
                .collect()
        })
        .collect()
}

/// Marginal of `d` over the union of `regions` (bits concatenated in order).
pub fn marginal(
    d: &ReducedDistribution,
    index: &NecklaceIndex,
    regions: &[Region],
) -> Result<RegionMarginal> {
    validate_regions(regions, index.n())?;
    let probs = marginals_many(d, index, &[regions.to_vec()]).pop().unwrap();
    Ok(RegionMarginal {
        regions: regions.to_vec(),
        probs,
    })
}

fn clamp_mi(value: f64) -> Result<f64> {
    if value < -MI_NEGATIVE_FLOOR {
        return Err(Error::Data(format!("mutual information {value} is negative")));
    }
    Ok(value.max(0.0))
}

/// `I = S_A + S_B − S_{A∪B}` in bits.
pub fn mutual_information(
    d: &ReducedDistribution,
    index: &NecklaceIndex,
    a: Region,
    b: Region,
) -> Result<f64> {
    let n = index.n();
    validate_regions(&[a], n)?;
    validate_regions(&[b], n)?;
    validate_regions(&[a, b], n)?;
    let covers_ring = a.len + b.len == n;
    let mut specs = vec![vec![a], vec![b]];
    if !covers_ring {
        specs.push(vec![a, b]);
    }
    let m = marginals_many(d, index, &specs);
    let s_a = entropy(&m[0])?;
    let s_b = entropy(&m[1])?;
    let s_ab = if covers_ring {
        total_entropy(d, index)
    } else {
        entropy(&m[2])?
    };
    clamp_mi(s_a + s_b - s_ab)
}

/// Mutual information between the two halves of the ring.
pub fn half_mi(d: &ReducedDistribution, index: &NecklaceIndex) -> Result<f64> {
    let n = index.n();
    if n % 2 != 0 {
        return invalid(format!("half cut needs even N, got {n}"));
    }
    mutual_information(d, index, Region::left_half(n), Region::right_half(n))
}

/// Mutual information between diametrically opposite quarters.
pub fn quarter_mi(d: &ReducedDistribution, index: &NecklaceIndex) -> Result<f64> {
    let n = index.n();
    if n % 4 != 0 {
        return invalid(format!("quarter cut needs N divisible by 4, got {n}"));
    }
    let (a, b) = Region::opposite_quarters(n);
    mutual_information(d, index, a, b)
}

/// Entropies and mutual informations of one distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepMeasures {
    pub s_total: f64,
    pub s_left: f64,
    pub s_right: f64,
    pub i_half: f64,
    /// `None` when `N` is not divisible by 4.
    pub i_quarter: Option<f64>,
}

/// All report quantities of `d` in a single marginal pass. `N` must be even.
pub fn measure(d: &ReducedDistribution, index: &NecklaceIndex) -> Result<StepMeasures> {
    let n = index.n();
    if n % 2 != 0 {
        return invalid(format!("half cut needs even N, got {n}"));
    }
    let mut specs = vec![vec![Region::left_half(n)], vec![Region::right_half(n)]];
    let quarters = n % 4 == 0;
    if quarters {
        let (a, b) = Region::opposite_quarters(n);
        specs.push(vec![a, b]);
    }
    let m = marginals_many(d, index, &specs);
    let s_total = total_entropy(d, index);
    let s_left = entropy(&m[0])?;
    let s_right = entropy(&m[1])?;
    let i_half = clamp_mi(s_left + s_right - s_total)?;
    let i_quarter = if quarters {
        let side = 1usize << (n / 4);
        let joint = &m[2];
        let pa: Vec<f64> = (0..side)
            .map(|x| compensated_sum((0..side).map(|y| joint[x * side + y])))
            .collect();
        let pb: Vec<f64> = (0..side)
            .map(|y| compensated_sum((0..side).map(|x| joint[x * side + y])))
            .collect();
        Some(clamp_mi(entropy(&pa)? + entropy(&pb)? - entropy(joint)?)?)
    } else {
        None
    };
    Ok(StepMeasures {
        s_total,
        s_left,
        s_right,
        i_half,
        i_quarter,
    })
}

/// Late-time averaged information measures for one `(rule, N, q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InfoReport {
    pub rule: u8,
    pub n: u32,
    pub q: f64,
    pub s_total: f64,
    pub i_half: f64,
    pub i_quarter: Option<f64>,
    /// Period of the late-time distribution, if one `≤ t_av` was found.
    pub period: Option<u32>,
    pub t_av_used: u32,
}

/// Jump to `t = 2^N`, then average `S`, `I_half` and `I_quarter` over one
/// period of the distribution or over `t_av` steps, whichever is shorter.
pub fn asymptotic_report(
    index: &NecklaceIndex,
    rule: RuleTable,
    q: f64,
    t_av: u32,
) -> Result<InfoReport> {
    let n = index.n();
    if n % 2 != 0 {
        return invalid(format!("N must be even, got {n}"));
    }
    if t_av == 0 {
        return invalid("t_av must be at least 1");
    }
    let d0 = initial_distribution(index, q)?;
    let one = build_successor(rule, index);
    let jump = doubled_map(&one, n);
    let late = push_forward(&d0, &jump);
    drop(jump);

    let mut cur = late.clone();
    let mut next = late.clone();
    let (mut s_sum, mut i_sum, mut q_sum) = (0.0, 0.0, 0.0);
    let mut period = None;
    let mut used = 0;
    for t in 1..=t_av {
        let m = measure(&cur, index)?;
        s_sum += m.s_total;
        i_sum += m.i_half;
        q_sum += m.i_quarter.unwrap_or(0.0);
        used = t;
        push_forward_into(&cur, &one, next.orbit_mass_mut());
        if next.max_abs_diff(&late) <= PERIOD_TOLERANCE {
            period = Some(t);
            break;
        }
        std::mem::swap(&mut cur, &mut next);
    }
    let k = used as f64;
    Ok(InfoReport {
        rule: rule.number(),
        n,
        q,
        s_total: s_sum / k,
        i_half: i_sum / k,
        i_quarter: (n % 4 == 0).then(|| q_sum / k),
        period,
        t_av_used: used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::necklaces::enumerate_representatives;
    use crate::rules::rule_table;

    #[test]
    fn entropy_values() {
        assert_eq!(entropy(&[0.25; 4]).unwrap(), 2.0);
        assert_eq!(entropy(&[0.0, 1.0, 0.0]).unwrap(), 0.0);
        let h = entropy(&[0.25, 0.75]).unwrap();
        assert!((h - 0.811_278_124_459_132_8).abs() < 1e-12);
        assert!(entropy(&[1.1, -0.1]).is_err());
    }

    #[test]
    fn product_marginal_is_uniform() {
        let idx = enumerate_representatives(10).unwrap();
        let d = initial_distribution(&idx, 0.5).unwrap();
        let m = marginal(&d, &idx, &[Region::new(3, 4)]).unwrap();
        assert!(m.probs.iter().all(|&p| (p - 1.0 / 16.0).abs() < 1e-15));
    }

    #[test]
    fn product_has_no_mutual_information() {
        let idx = enumerate_representatives(12).unwrap();
        for q in [0.2, 0.5, 0.9] {
            let d = initial_distribution(&idx, q).unwrap();
            assert!(half_mi(&d, &idx).unwrap() <= 1e-12);
            assert!(quarter_mi(&d, &idx).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn correlated_pair_gives_one_bit() {
        // Half mass on 00, half on 11 for a 2-site ring.
        let idx = enumerate_representatives(2).unwrap();
        assert_eq!(idx.representatives(), &[0b00, 0b01, 0b11]);
        let d = ReducedDistribution::from_masses(vec![0.5, 0.0, 0.5], 2, 0.5);
        let i = half_mi(&d, &idx).unwrap();
        assert!((i - 1.0).abs() < 1e-15);
    }

    #[test]
    fn region_errors() {
        let idx = enumerate_representatives(6).unwrap();
        let d = initial_distribution(&idx, 0.5).unwrap();
        assert!(marginal(&d, &idx, &[Region::new(0, 7)]).is_err());
        assert!(marginal(&d, &idx, &[Region::new(0, 3), Region::new(2, 2)]).is_err());
        assert!(quarter_mi(&d, &idx).is_err());
        let odd = enumerate_representatives(5).unwrap();
        let d5 = initial_distribution(&odd, 0.5).unwrap();
        assert!(half_mi(&d5, &odd).is_err());
    }

    #[test]
    fn identity_rule_report() {
        let idx = enumerate_representatives(12).unwrap();
        let r = asymptotic_report(&idx, rule_table(204).unwrap(), 0.5, 10).unwrap();
        assert_eq!(r.i_half, 0.0);
        assert_eq!(r.period, Some(1));
        assert_eq!(r.t_av_used, 1);
        assert!((r.s_total - 12.0).abs() < 1e-12);
    }

    #[test]
    fn absorbing_rule_quarter_mi_is_zero() {
        let idx = enumerate_representatives(8).unwrap();
        let r = asymptotic_report(&idx, rule_table(0).unwrap(), 0.5, 10).unwrap();
        assert_eq!(r.i_quarter, Some(0.0));
        assert_eq!(r.s_total, 0.0);
    }
}
