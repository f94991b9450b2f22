//! Rotation orbits (binary necklaces) of ring states.
//!
//! Representatives are the minimal packed value in each orbit. They are
//! generated in ascending order with the Fredricksen-Kessler-Maiorana
//! algorithm, which also yields the orbit size as the length of the
//! Lyndon root, so no rotation scan is needed during construction.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{invalid, Error, Result};
use crate::rules::{rotate_left, RingState, MAX_SITES};

/// Default memory ceiling for the symmetry-reduced state space.
pub const DEFAULT_MEMORY_BUDGET: u64 = 4 << 30;

const CACHE_MAGIC: &[u8; 8] = b"ECAMINK\0";
const CACHE_VERSION: u32 = 1;

/// Canonical representative of `bits` (lowest value over all rotations)
/// together with the smallest left-rotation reaching it.
#[inline]
pub fn canonical_bits(bits: u64, n: u32) -> (u64, u32) {
    let mut best = bits;
    let mut shift = 0;
    let mut cur = bits;
    for k in 1..n {
        cur = rotate_left(cur, 1, n);
        if cur < best {
            best = cur;
            shift = k;
        }
    }
    (best, shift)
}

pub fn canonical(s: RingState) -> (RingState, u32) {
    let (rep, shift) = canonical_bits(s.bits(), s.len());
    (
        RingState::new(rep, s.len()).expect("rotation stays within the ring"),
        shift,
    )
}

/// Number of distinct rotations of `bits`.
pub fn orbit_size_bits(bits: u64, n: u32) -> u32 {
    let mut cur = bits;
    for k in 1..=n {
        cur = rotate_left(cur, 1, n);
        if cur == bits {
            return k;
        }
    }
    n
}

/// Number of binary necklaces of length `n`, `(1/n) Σ_{d|n} φ(d) 2^{n/d}`.
pub fn burnside_count(n: u32) -> u64 {
    assert!((1..=MAX_SITES).contains(&n));
    let mut total: u128 = 0;
    for d in 1..=n {
        if n % d == 0 {
            total += euler_phi(d) as u128 * (1u128 << (n / d));
        }
    }
    (total / n as u128) as u64
}

fn euler_phi(mut d: u32) -> u32 {
    let mut result = d;
    let mut p = 2;
    while p * p <= d {
        if d % p == 0 {
            while d % p == 0 {
                d /= p;
            }
            result -= result / p;
        }
        p += 1;
    }
    if d > 1 {
        result -= result / d;
    }
    result
}

/// Rough bytes held by one evolution job on the reduced space:
/// representatives, two successor buffers and two distributions.
pub fn estimated_bytes(n: u32) -> u64 {
    let m = burnside_count(n);
    m * (8 + 1 + 4 + 4 + 8 + 8)
}

/// Fail early with a byte estimate when `n` does not fit in `budget_bytes`.
pub fn check_budget(n: u32, budget_bytes: u64) -> Result<()> {
    if n == 0 || n > MAX_SITES {
        return invalid(format!("ring size {n} outside [1, {MAX_SITES}]"));
    }
    let required_bytes = estimated_bytes(n);
    if required_bytes > budget_bytes {
        return Err(Error::Resource {
            n,
            required_bytes,
            budget_bytes,
        });
    }
    Ok(())
}

/// Sorted necklace representatives of `N`-bit rings with orbit sizes and a
/// dense index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NecklaceIndex {
    n: u32,
    representatives: Vec<u64>,
    orbit_sizes: Vec<u8>,
}

impl NecklaceIndex {
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Number of representatives `M`.
    pub fn len(&self) -> usize {
        self.representatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.representatives.is_empty()
    }

    pub fn representatives(&self) -> &[u64] {
        &self.representatives
    }

    pub fn orbit_sizes(&self) -> &[u8] {
        &self.orbit_sizes
    }

    #[inline]
    pub fn representative(&self, i: usize) -> u64 {
        self.representatives[i]
    }

    #[inline]
    pub fn orbit_size(&self, i: usize) -> u32 {
        self.orbit_sizes[i] as u32
    }

    /// Dense index of a canonical value.
    #[inline]
    pub fn lookup(&self, canonical: u64) -> Option<usize> {
        self.representatives.binary_search(&canonical).ok()
    }

    /// Dense index of the orbit containing an arbitrary state.
    #[inline]
    pub fn index_of(&self, bits: u64) -> usize {
        let (rep, _) = canonical_bits(bits, self.n);
        self.lookup(rep)
            .expect("every canonical value is a representative")
    }

    /// Write the binary cache: header `{magic, version, N, M}` followed by the
    /// representatives ascending (u64 LE) and the orbit sizes (u8).
    pub fn write_cache<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(CACHE_MAGIC)?;
        w.write_all(&CACHE_VERSION.to_le_bytes())?;
        w.write_all(&self.n.to_le_bytes())?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        for r in &self.representatives {
            w.write_all(&r.to_le_bytes())?;
        }
        w.write_all(&self.orbit_sizes)?;
        Ok(())
    }

    pub fn read_cache<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(Error::Data("necklace cache: bad magic".into()));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        let version = u32::from_le_bytes(b4);
        if version != CACHE_VERSION {
            return Err(Error::Data(format!("necklace cache: version {version}")));
        }
        r.read_exact(&mut b4)?;
        let n = u32::from_le_bytes(b4);
        if n == 0 || n > MAX_SITES {
            return Err(Error::Data(format!("necklace cache: N={n}")));
        }
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let m = u64::from_le_bytes(b8);
        if m != burnside_count(n) {
            return Err(Error::Data(format!(
                "necklace cache: M={m} but N={n} has {} necklaces",
                burnside_count(n)
            )));
        }
        let m = m as usize;
        let mut raw = vec![0u8; m * 8];
        r.read_exact(&mut raw)?;
        let representatives: Vec<u64> = raw
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        let mut orbit_sizes = vec![0u8; m];
        r.read_exact(&mut orbit_sizes)?;
        if !representatives.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Data("necklace cache: representatives not ascending".into()));
        }
        Ok(Self {
            n,
            representatives,
            orbit_sizes,
        })
    }

    /// Load the cache for `n` from `dir`, building and storing it when absent.
    pub fn load_or_build(dir: &Path, n: u32, budget_bytes: u64) -> Result<Self> {
        let path = dir.join(format!("necklaces_n{n}.bin"));
        if path.exists() {
            let file = std::fs::File::open(&path)?;
            let index = Self::read_cache(std::io::BufReader::new(file))?;
            if index.n == n {
                return Ok(index);
            }
        }
        let index = enumerate_representatives_with_budget(n, budget_bytes)?;
        std::fs::create_dir_all(dir)?;
        let tmp = path.with_extension("tmp");
        {
            let file = std::fs::File::create(&tmp)?;
            let mut w = std::io::BufWriter::new(file);
            index.write_cache(&mut w)?;
            w.flush()?;
        }
        std::fs::rename(tmp, path)?;
        Ok(index)
    }
}

/// Enumerate all representatives for `n` under the default memory budget.
pub fn enumerate_representatives(n: u32) -> Result<NecklaceIndex> {
    enumerate_representatives_with_budget(n, DEFAULT_MEMORY_BUDGET)
}

pub fn enumerate_representatives_with_budget(n: u32, budget_bytes: u64) -> Result<NecklaceIndex> {
    check_budget(n, budget_bytes)?;
    let m = burnside_count(n) as usize;
    let mut representatives = Vec::with_capacity(m);
    let mut orbit_sizes = Vec::with_capacity(m);

    // FKM over the alphabet {0,1}; a[1..=n] is the current prenecklace and
    // `bits` its packed value (a[1] is the most significant bit).
    let n_us = n as usize;
    let mut a = vec![0u8; n_us + 1];
    representatives.push(0);
    orbit_sizes.push(1);
    loop {
        let mut i = n_us;
        while i > 0 && a[i] == 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        a[i] = 1;
        for j in i + 1..=n_us {
            a[j] = a[j - i];
        }
        if n_us % i == 0 {
            let bits = a[1..]
                .iter()
                .fold(0u64, |acc, &b| (acc << 1) | b as u64);
            representatives.push(bits);
            orbit_sizes.push(i as u8);
        }
    }
    debug_assert_eq!(representatives.len(), m);
    Ok(NecklaceIndex {
        n,
        representatives,
        orbit_sizes,
    })
}
