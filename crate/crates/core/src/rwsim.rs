//! Two-species annihilating particle gas, its valley-annihilation oracle,
//! nearest-particle statistics and box-counting dimensions.
//!
//! Black particles move one site left per step and white particles one site
//! right. A white particle immediately followed by a black one at distance 1
//! (they would swap) or 2 (they would land on the same site) annihilates with
//! it. Reading black as an up-step and white as a down-step turns a
//! configuration into a random walk; annihilation removes its valleys, which
//! is exactly bracket matching with white as the opening bracket.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::fit::{linear_fit, LinearFit};
use crate::rules::RuleTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Species {
    /// Moves −1 per step; up-step of the imbalance walk.
    Black,
    /// Moves +1 per step; down-step of the imbalance walk.
    White,
}

impl Species {
    fn velocity(self) -> i64 {
        match self {
            Species::Black => -1,
            Species::White => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Ring of `n` sites.
    Periodic,
    /// Particles leaving `[0, n)` are discarded.
    Open,
    /// Finite initial segment on the infinite empty line.
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Particle {
    pub pos: i64,
    pub species: Species,
    /// Initial site, used as a stable identity.
    pub origin: u32,
}

/// Particles sorted by position (cyclically for rings).
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleLattice {
    n: usize,
    boundary: Boundary,
    seed: u64,
    time: u64,
    particles: Vec<Particle>,
}

/// Every site independently black with probability `q_black`, white otherwise.
pub fn init_lattice(n: usize, q_black: f64, seed: u64, boundary: Boundary) -> Result<ParticleLattice> {
    if n == 0 || n > u32::MAX as usize {
        return invalid(format!("lattice size {n} outside [1, 2^32)"));
    }
    if !(0.0..=1.0).contains(&q_black) {
        return invalid(format!("q_black = {q_black} outside [0, 1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let particles = (0..n)
        .map(|i| Particle {
            pos: i as i64,
            species: if rng.gen_bool(q_black) {
                Species::Black
            } else {
                Species::White
            },
            origin: i as u32,
        })
        .collect();
    Ok(ParticleLattice {
        n,
        boundary,
        seed,
        time: 0,
        particles,
    })
}

impl ParticleLattice {
    /// Lattice from explicit site contents (`None` = empty).
    pub fn from_sites(sites: &[Option<Species>], boundary: Boundary) -> Result<Self> {
        if sites.is_empty() || sites.len() > u32::MAX as usize {
            return invalid("lattice needs between 1 and 2^32 − 1 sites");
        }
        let particles = sites
            .iter()
            .enumerate()
            .filter_map(|(i, s)| {
                s.map(|species| Particle {
                    pos: i as i64,
                    species,
                    origin: i as u32,
                })
            })
            .collect();
        Ok(Self {
            n: sites.len(),
            boundary,
            seed: 0,
            time: 0,
            particles,
        })
    }

    /// Parse `B`, `W` and `.` (empty) characters; commas and spaces are ignored.
    pub fn parse(pattern: &str, boundary: Boundary) -> Result<Self> {
        let sites = pattern
            .chars()
            .filter(|c| !matches!(c, ',' | ' '))
            .map(|c| match c {
                'B' | 'b' => Ok(Some(Species::Black)),
                'W' | 'w' => Ok(Some(Species::White)),
                '.' | '•' => Ok(None),
                other => invalid(format!("unexpected site symbol {other:?}")),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_sites(&sites, boundary)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn particles(&self) -> &[Particle] {
        &self.particles
    }

    pub fn count(&self, species: Species) -> usize {
        self.particles.iter().filter(|p| p.species == species).count()
    }

    /// `N_black − N_white`.
    pub fn imbalance(&self) -> i64 {
        self.count(Species::Black) as i64 - self.count(Species::White) as i64
    }

    fn successor(&self, k: usize) -> Option<usize> {
        let len = self.particles.len();
        if k + 1 < len {
            Some(k + 1)
        } else if self.boundary == Boundary::Periodic && len > 1 {
            Some(0)
        } else {
            None
        }
    }

    fn gap(&self, a: &Particle, b: &Particle) -> i64 {
        let d = b.pos - a.pos;
        if self.boundary == Boundary::Periodic {
            d.rem_euclid(self.n as i64)
        } else {
            d
        }
    }

    /// No pair of particles can ever meet again.
    pub fn is_stationary(&self) -> bool {
        match self.boundary {
            Boundary::Periodic => {
                self.count(Species::Black) == 0 || self.count(Species::White) == 0
            }
            // Every black particle must precede every white one.
            Boundary::Open | Boundary::Unbounded => !self
                .particles
                .windows(2)
                .any(|w| w[0].species == Species::White && w[1].species == Species::Black),
        }
    }

    /// Advance one synchronous step in place.
    pub fn step_in_place(&mut self) {
        let len = self.particles.len();
        let mut removed = vec![false; len];
        for k in 0..len {
            if self.particles[k].species != Species::White {
                continue;
            }
            if let Some(next) = self.successor(k) {
                let (a, b) = (&self.particles[k], &self.particles[next]);
                if b.species == Species::Black && matches!(self.gap(a, b), 1 | 2) {
                    removed[k] = true;
                    removed[next] = true;
                }
            }
        }
        let n = self.n as i64;
        let boundary = self.boundary;
        let mut kept = 0;
        // In-place compaction writes behind the read index.
        #[allow(clippy::needless_range_loop)]
        for k in 0..len {
            if removed[k] {
                continue;
            }
            let mut p = self.particles[k];
            p.pos += p.species.velocity();
            match boundary {
                Boundary::Periodic => p.pos = p.pos.rem_euclid(n),
                Boundary::Open if !(0..n).contains(&p.pos) => continue,
                _ => {}
            }
            self.particles[kept] = p;
            kept += 1;
        }
        self.particles.truncate(kept);
        if boundary == Boundary::Periodic {
            self.particles.sort_by_key(|p| p.pos);
        }
        self.time += 1;
    }

    /// Step until stationary; fails after `max_steps` steps.
    pub fn run_to_stationarity(&mut self, max_steps: u64) -> Result<u64> {
        let start = self.time;
        while !self.is_stationary() {
            if self.time - start >= max_steps {
                return Err(Error::Accuracy(format!(
                    "not stationary after {max_steps} steps"
                )));
            }
            self.step_in_place();
        }
        Ok(self.time - start)
    }

    /// Surviving particles in current order.
    pub fn survivors(&self) -> Vec<Survivor> {
        self.particles
            .iter()
            .map(|p| Survivor {
                origin: p.origin,
                species: p.species,
            })
            .collect()
    }
}

/// One synchronous step.
pub fn step(lat: &ParticleLattice) -> ParticleLattice {
    let mut next = lat.clone();
    next.step_in_place();
    next
}

/// Particle identity independent of its (drifting) position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Survivor {
    pub origin: u32,
    pub species: Species,
}

/// Cumulative imbalance `W[0] = 0`, `W[k] − W[k−1] = ±1` for a black/white particle at site `k−1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkProfile {
    pub heights: Vec<i64>,
}

impl WalkProfile {
    pub fn net(&self) -> i64 {
        self.heights.last().copied().unwrap_or(0) - self.heights[0]
    }
}

/// Walk of the particles currently inside `[0, n)`.
pub fn walk_profile(lat: &ParticleLattice) -> WalkProfile {
    let mut steps = vec![0i64; lat.n];
    for p in &lat.particles {
        if (0..lat.n as i64).contains(&p.pos) {
            steps[p.pos as usize] += match p.species {
                Species::Black => 1,
                Species::White => -1,
            };
        }
    }
    let mut heights = Vec::with_capacity(lat.n + 1);
    heights.push(0);
    let mut h = 0;
    for s in steps {
        h += s;
        heights.push(h);
    }
    WalkProfile { heights }
}

/// Final survivors by bracket matching in particle order: a white particle
/// waits on a stack, a black one annihilates the most recent waiting white
/// particle or survives if there is none. Exact on the infinite line; rings
/// are cut before their first particle.
pub fn final_state_stack(lat: &ParticleLattice) -> Vec<Survivor> {
    let mut blacks = Vec::new();
    let mut whites: Vec<Survivor> = Vec::new();
    for p in &lat.particles {
        let s = Survivor {
            origin: p.origin,
            species: p.species,
        };
        match p.species {
            Species::White => whites.push(s),
            Species::Black => {
                if whites.pop().is_none() {
                    blacks.push(s);
                }
            }
        }
    }
    blacks.extend(whites);
    blacks
}

/// Settings for [`nearest_particle_histogram`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HistogramParams {
    pub q_black: f64,
    pub samples: usize,
    pub seed: u64,
    /// Largest `i` and `j` tabulated individually in the joint table.
    pub horizon: usize,
}

/// Monte Carlo distribution of the distances from a bond to the nearest
/// surviving particle on its left (`i ≥ 0`, the site just left of the bond
/// is `i = 0`) and right (`j ≥ 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct NearestParticleHistogram {
    pub params: HistogramParams,
    /// Sites discarded on each side of every sampled segment.
    pub margin: usize,
    /// `joint[i * (horizon + 1) + j]` for `i, j ≤ horizon`.
    joint: Vec<u64>,
    left: Vec<u64>,
    right: Vec<u64>,
    /// Samples with a survivor farther than the margin on either side.
    pub unresolved: u64,
}

impl NearestParticleHistogram {
    fn width(&self) -> usize {
        self.params.horizon + 1
    }

    /// Number of resolved samples.
    pub fn resolved(&self) -> u64 {
        self.params.samples as u64 - self.unresolved
    }

    fn frac(&self, count: u64) -> (f64, f64) {
        let n = self.params.samples as f64;
        let p = count as f64 / n;
        (p, (p * (1.0 - p) / n).sqrt())
    }

    pub fn joint_count(&self, i: usize, j: usize) -> u64 {
        if i > self.params.horizon || j > self.params.horizon {
            return 0;
        }
        self.joint[i * self.width() + j]
    }

    /// Estimated `p_ij` and its binomial standard error.
    pub fn p_ij(&self, i: usize, j: usize) -> (f64, f64) {
        self.frac(self.joint_count(i, j))
    }

    /// Estimated left marginal `p_i` and its standard error.
    pub fn p_i(&self, i: usize) -> (f64, f64) {
        self.frac(self.left.get(i).copied().unwrap_or(0))
    }

    /// Estimated right marginal `p_j` and its standard error.
    pub fn p_j(&self, j: usize) -> (f64, f64) {
        self.frac(self.right.get(j).copied().unwrap_or(0))
    }

    pub fn left_counts(&self) -> &[u64] {
        &self.left
    }

    pub fn right_counts(&self) -> &[u64] {
        &self.right
    }
}

/// Margin used to make finite segments indistinguishable from the infinite
/// line: a white particle farther than this from the window has an
/// exponentially small (`≈ e^{-margin/ξ}`) chance of reaching it.
pub fn histogram_margin(q_black: f64) -> usize {
    let d = 2.0 * q_black - 1.0;
    let xi = -1.0 / (-d * d).ln_1p();
    (40.0 * xi).ceil() as usize + 100
}

/// One sample per independent segment, centred on the bond between sites
/// `margin − 1` and `margin`. Sample `k` uses the stream `seed + k`.
pub fn nearest_particle_histogram(params: HistogramParams) -> Result<NearestParticleHistogram> {
    if !(params.q_black > 0.5 && params.q_black < 1.0) {
        return invalid(format!("histogram needs q_black in (1/2, 1), got {}", params.q_black));
    }
    if params.samples == 0 {
        return invalid("histogram needs at least one sample");
    }
    let margin = histogram_margin(params.q_black);
    let seg = 2 * margin;
    let outcomes: Vec<Option<(usize, usize)>> = (0..params.samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed.wrapping_add(k as u64));
            // Only black particles survive for q_black > 1/2; they are the
            // strict running maxima of the imbalance walk read left to right.
            let mut height = 0i64;
            let mut best = i64::MIN;
            let mut last_left = None;
            let mut first_right = None;
            for site in 0..seg {
                let black = rng.gen_bool(params.q_black);
                height += if black { 1 } else { -1 };
                if black && height > best {
                    if site < margin {
                        last_left = Some(site);
                    } else if first_right.is_none() {
                        first_right = Some(site);
                    }
                }
                best = best.max(height);
            }
            match (last_left, first_right) {
                (Some(l), Some(r)) => Some((margin - 1 - l, r - (margin - 1))),
                _ => None,
            }
        })
        .collect();
    let width = params.horizon + 1;
    let mut joint = vec![0u64; width * width];
    let mut left = Vec::new();
    let mut right = Vec::new();
    let mut unresolved = 0;
    let bump = |v: &mut Vec<u64>, k: usize| {
        if v.len() <= k {
            v.resize(k + 1, 0);
        }
        v[k] += 1;
    };
    for o in outcomes {
        match o {
            Some((i, j)) => {
                if i < width && j < width {
                    joint[i * width + j] += 1;
                }
                bump(&mut left, i);
                bump(&mut right, j);
            }
            None => unresolved += 1,
        }
    }
    Ok(NearestParticleHistogram {
        params,
        margin,
        joint,
        left,
        right,
        unresolved,
    })
}

/// Bit-packed ring for long elementary-CA runs; site `i` is bit `i % 64` of word `i / 64`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WideRing {
    n: usize,
    words: Vec<u64>,
}

impl WideRing {
    /// `n` must be a positive multiple of 64.
    pub fn random(n: usize, q: f64, seed: u64) -> Result<Self> {
        Self::check_len(n)?;
        if !(0.0..=1.0).contains(&q) {
            return invalid(format!("fill probability {q} outside [0, 1]"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut words = vec![0u64; n / 64];
        for w in words.iter_mut() {
            for b in 0..64 {
                if rng.gen_bool(q) {
                    *w |= 1 << b;
                }
            }
        }
        Ok(Self { n, words })
    }

    pub fn from_words(n: usize, words: Vec<u64>) -> Result<Self> {
        Self::check_len(n)?;
        if words.len() != n / 64 {
            return invalid(format!("{} words do not hold {n} sites", words.len()));
        }
        Ok(Self { n, words })
    }

    fn check_len(n: usize) -> Result<()> {
        if n == 0 || n % 64 != 0 {
            return invalid(format!("wide ring size {n} must be a positive multiple of 64"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    /// One synchronous update with neighbourhood `(σ_{i−1}, σ_i, σ_{i+1})`.
    pub fn step(&mut self, rule: RuleTable, scratch: &mut Vec<u64>) {
        const CHUNK: usize = 512;
        let len = self.words.len();
        scratch.resize(len, 0);
        let minterms: Vec<usize> = (0..8).filter(|&k| rule.output(k as u8)).collect();
        let words = &self.words;
        scratch
            .par_chunks_mut(CHUNK)
            .enumerate()
            .for_each(|(chunk, out)| {
                for (off, slot) in out.iter_mut().enumerate() {
                    let k = chunk * CHUNK + off;
                    let c = words[k];
                    let prev = words[(k + len - 1) % len];
                    let next = words[(k + 1) % len];
                    let l = (c << 1) | (prev >> 63);
                    let r = (c >> 1) | (next << 63);
                    *slot = minterms.iter().fold(0u64, |acc, &idx| {
                        let a = if idx & 4 != 0 { l } else { !l };
                        let b = if idx & 2 != 0 { c } else { !c };
                        let d = if idx & 1 != 0 { r } else { !r };
                        acc | (a & b & d)
                    });
                }
            });
        std::mem::swap(&mut self.words, scratch);
    }

    pub fn evolve(&mut self, rule: RuleTable, steps: u64) {
        let mut scratch = Vec::with_capacity(self.words.len());
        for _ in 0..steps {
            self.step(rule, &mut scratch);
        }
    }

    /// Sites `i` with `σ_i = σ_{i+1}`: the particles of rule 184 over its
    /// alternating background.
    pub fn particle_sites(&self) -> Vec<u64> {
        let len = self.words.len();
        let mut out = Vec::new();
        for k in 0..len {
            let c = self.words[k];
            let r = (c >> 1) | (self.words[(k + 1) % len] << 63);
            let mut eq = !(c ^ r);
            while eq != 0 {
                let b = eq.trailing_zeros() as u64;
                out.push(k as u64 * 64 + b);
                eq &= eq - 1;
            }
        }
        out
    }
}

/// Result of [`fractal_dimension`].
#[derive(Debug, Clone, PartialEq)]
pub struct FractalFit {
    pub dimension: f64,
    pub scales: Vec<u64>,
    pub occupied: Vec<u64>,
    /// Fit of `ln(occupied)` against `ln(1/scale)`.
    pub fit: LinearFit,
}

/// Box-counting dimension of a set of lattice positions.
pub fn fractal_dimension(positions: &[u64], box_scales: &[u64]) -> Result<FractalFit> {
    if box_scales.len() < 3 {
        return invalid(format!("box counting needs at least 3 scales, got {}", box_scales.len()));
    }
    if box_scales.contains(&0) {
        return invalid("box scales must be positive");
    }
    if positions.is_empty() {
        return invalid("box counting needs at least one point");
    }
    let mut sorted = positions.to_vec();
    sorted.sort_unstable();
    let occupied: Vec<u64> = box_scales
        .iter()
        .map(|&s| {
            let mut count = 0;
            let mut last = None;
            for &p in &sorted {
                let b = p / s;
                if last != Some(b) {
                    count += 1;
                    last = Some(b);
                }
            }
            count
        })
        .collect();
    let x: Vec<f64> = box_scales.iter().map(|&s| -(s as f64).ln()).collect();
    let y: Vec<f64> = occupied.iter().map(|&c| (c as f64).ln()).collect();
    let fit = linear_fit(&x, &y)?;
    Ok(FractalFit {
        dimension: fit.slope,
        scales: box_scales.to_vec(),
        occupied,
        fit,
    })
}

/// Powers of two `2^lo ..= 2^hi`.
pub fn dyadic_scales(lo: u32, hi: u32) -> Vec<u64> {
    (lo..=hi).map(|k| 1u64 << k).collect()
}
