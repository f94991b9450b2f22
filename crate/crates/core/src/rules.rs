//! Elementary cellular automaton rules on periodic rings.
//!
//! A ring state of `N` sites is packed into a `u64` with site 1 in the most
//! significant of the low `N` bits, so the decimal value of a state reads the
//! sites left to right. The neighborhood `(left, center, right)` forms a 3-bit
//! index with the left neighbor as the most significant bit, and output `k` of a
//! rule is bit `k` of its rule number.

use crate::error::{invalid, Result};

/// Largest ring size representable in the packed word.
pub const MAX_SITES: u32 = 62;

/// Rules whose information converges slowly with `N`, driven by two
/// annihilating particle species.
pub const TWO_SPECIES_RULES: [u8; 4] = [14, 43, 142, 184];

/// The same family as listed alongside the particle-model comparison, which
/// also names rule 57. Kept as a separate list; the two are not reconciled.
pub const TWO_SPECIES_RULES_WITH_57: [u8; 5] = [14, 43, 57, 142, 184];

/// Lookup table `f` of an elementary rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RuleTable {
    number: u8,
}

impl RuleTable {
    pub fn new(rule_number: u32) -> Result<Self> {
        if rule_number > 255 {
            return invalid(format!("rule number {rule_number} outside [0, 255]"));
        }
        Ok(Self {
            number: rule_number as u8,
        })
    }

    pub fn number(self) -> u8 {
        self.number
    }

    /// Output for a 3-bit neighborhood index.
    #[inline]
    pub fn output(self, neighborhood: u8) -> bool {
        (self.number >> (neighborhood & 7)) & 1 == 1
    }

    pub fn outputs(self) -> [bool; 8] {
        std::array::from_fn(|k| self.output(k as u8))
    }

    pub fn from_outputs(outputs: [bool; 8]) -> Self {
        let number = outputs
            .iter()
            .enumerate()
            .fold(0u8, |acc, (k, &b)| acc | ((b as u8) << k));
        Self { number }
    }

    /// One synchronous update of a packed ring of `n` sites.
    #[inline]
    pub fn apply_bits(self, bits: u64, n: u32) -> u64 {
        let mask = site_mask(n);
        // Bit b of `left` holds the left neighbor of the site stored at bit b.
        let left = rotate_right(bits, 1, n);
        let right = rotate_left(bits, 1, n);
        let center = bits;
        let mut out = 0u64;
        let mut rule = self.number;
        let mut k = 0u8;
        while rule != 0 {
            if rule & 1 == 1 {
                let l = if k & 4 != 0 { left } else { !left };
                let c = if k & 2 != 0 { center } else { !center };
                let r = if k & 1 != 0 { right } else { !right };
                out |= l & c & r;
            }
            rule >>= 1;
            k += 1;
        }
        out & mask
    }

    pub fn apply(self, state: RingState) -> RingState {
        RingState {
            bits: self.apply_bits(state.bits, state.n),
            n: state.n,
        }
    }
}

/// Build the lookup table for a rule number in `[0, 255]`.
pub fn rule_table(rule_number: u32) -> Result<RuleTable> {
    RuleTable::new(rule_number)
}

/// Packed binary configuration of a periodic ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RingState {
    bits: u64,
    n: u32,
}

impl RingState {
    pub fn new(bits: u64, n: u32) -> Result<Self> {
        if n == 0 || n > MAX_SITES {
            return invalid(format!("ring size {n} outside [1, {MAX_SITES}]"));
        }
        if bits & !site_mask(n) != 0 {
            return invalid(format!("state {bits:#x} has bits beyond {n} sites"));
        }
        Ok(Self { bits, n })
    }

    /// Parse a left-to-right site string such as `"1100"`.
    pub fn parse(sites: &str) -> Result<Self> {
        let n = sites.len() as u32;
        let mut bits = 0u64;
        for ch in sites.chars() {
            bits = (bits << 1)
                | match ch {
                    '0' => 0,
                    '1' => 1,
                    other => return invalid(format!("unexpected site character {other:?}")),
                };
        }
        Self::new(bits, n)
    }

    pub fn bits(self) -> u64 {
        self.bits
    }

    pub fn len(self) -> u32 {
        self.n
    }

    pub fn is_empty(self) -> bool {
        self.n == 0
    }

    /// Value of site `i` (1-based).
    pub fn site(self, i: u32) -> bool {
        debug_assert!(i >= 1 && i <= self.n);
        (self.bits >> (self.n - i)) & 1 == 1
    }

    /// Translation `σ'_i = σ_{i+k}`.
    pub fn rotate(self, k: u32) -> Self {
        Self {
            bits: rotate_left(self.bits, k % self.n, self.n),
            n: self.n,
        }
    }
}

impl std::fmt::Display for RingState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 1..=self.n {
            f.write_str(if self.site(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Synchronous update of every site with periodic wraparound.
pub fn apply_rule(table: RuleTable, s: RingState) -> RingState {
    table.apply(s)
}

#[inline]
pub fn site_mask(n: u32) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Rotate the low `n` bits left by `k` (`k < n`), i.e. translate sites by `k`.
#[inline]
pub fn rotate_left(bits: u64, k: u32, n: u32) -> u64 {
    if k == 0 {
        return bits;
    }
    ((bits << k) | (bits >> (n - k))) & site_mask(n)
}

#[inline]
pub fn rotate_right(bits: u64, k: u32, n: u32) -> u64 {
    if k == 0 {
        return bits;
    }
    ((bits >> k) | (bits << (n - k))) & site_mask(n)
}

/// Left-right mirror: output at `abc` becomes the output at `cba`.
pub fn mirror(rule_number: u8) -> u8 {
    let mut out = 0u8;
    for k in 0..8u8 {
        if (rule_number >> k) & 1 == 1 {
            let swapped = ((k & 1) << 2) | (k & 2) | ((k >> 2) & 1);
            out |= 1 << swapped;
        }
    }
    out
}

/// Conjugation by bit negation: `outputs[k] -> !outputs[7 - k]`.
pub fn negate(rule_number: u8) -> u8 {
    let mut out = 0u8;
    for k in 0..8u8 {
        if (rule_number >> (7 - k)) & 1 == 0 {
            out |= 1 << k;
        }
    }
    out
}

/// Rule followed by a logical negation of its output.
pub fn complement_output(rule_number: u8) -> u8 {
    !rule_number
}

/// The orbit of a rule under `{id, mirror, negate, mirror∘negate}`, sorted and deduplicated.
pub fn equivalence_orbit(rule_number: u8) -> Vec<u8> {
    let mut orbit = vec![
        rule_number,
        mirror(rule_number),
        negate(rule_number),
        mirror(negate(rule_number)),
    ];
    orbit.sort_unstable();
    orbit.dedup();
    orbit
}

/// Minimal rule number in the equivalence orbit.
pub fn representative(rule_number: u8) -> u8 {
    equivalence_orbit(rule_number)[0]
}

/// One representative per equivalence class, ascending (88 rules).
pub fn nonequivalent_rules() -> Vec<u8> {
    (0..=255u8).filter(|&r| representative(r) == r).collect()
}

/// Representative of the class reached by negating a rule's output.
///
/// At `q = 0.5` the two classes produce identical entropies and mutual
/// information whenever the rule commutes with global bit negation.
pub fn negation_partner(rule_number: u8) -> u8 {
    representative(complement_output(rule_number))
}
