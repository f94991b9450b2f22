//! Unreduced reference implementation: one probability per ring state, the
//! rule applied site by site and marginals read bit by bit. Shares nothing
//! with the library beyond the conventions (site 1 is the most significant
//! of the low `N` bits; the neighbourhood `(left, centre, right)` indexes the
//! rule number's bits).

#![allow(dead_code)]

pub fn site(state: u64, i: u32, n: u32) -> bool {
    state >> (n - 1 - i) & 1 == 1
}

pub fn apply(rule: u8, state: u64, n: u32) -> u64 {
    let mut out = 0u64;
    for i in 0..n {
        let l = site(state, (i + n - 1) % n, n) as u8;
        let c = site(state, i, n) as u8;
        let r = site(state, (i + 1) % n, n) as u8;
        let k = (l << 2) | (c << 1) | r;
        if rule >> k & 1 == 1 {
            out |= 1 << (n - 1 - i);
        }
    }
    out
}

/// Full state map of one step.
pub fn step_map(rule: u8, n: u32) -> Vec<u32> {
    (0..1u64 << n).map(|s| apply(rule, s, n) as u32).collect()
}

/// `map` iterated `2^doublings` times.
pub fn power_of_two(map: &[u32], doublings: u32) -> Vec<u32> {
    let mut cur = map.to_vec();
    for _ in 0..doublings {
        cur = cur.iter().map(|&j| cur[j as usize]).collect();
    }
    cur
}

pub fn product_state(n: u32, q: f64) -> Vec<f64> {
    (0..1u64 << n)
        .map(|s| {
            let w = s.count_ones() as i32;
            q.powi(w) * (1.0 - q).powi(n as i32 - w)
        })
        .collect()
}

pub fn push(p: &[f64], map: &[u32]) -> Vec<f64> {
    let mut out = vec![0.0; p.len()];
    for (s, &mass) in p.iter().enumerate() {
        out[map[s] as usize] += mass;
    }
    out
}

pub fn entropy_bits(p: &[f64]) -> f64 {
    p.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

/// Distribution of the bits at `sites`, first listed site most significant.
pub fn marginal(p: &[f64], n: u32, sites: &[u32]) -> Vec<f64> {
    let mut out = vec![0.0; 1 << sites.len()];
    for (s, &mass) in p.iter().enumerate() {
        let key = sites
            .iter()
            .fold(0usize, |acc, &i| (acc << 1) | site(s as u64, i, n) as usize);
        out[key] += mass;
    }
    out
}

pub fn mutual_information(p: &[f64], n: u32, a: &[u32], b: &[u32]) -> f64 {
    let joint: Vec<u32> = a.iter().chain(b).copied().collect();
    entropy_bits(&marginal(p, n, a)) + entropy_bits(&marginal(p, n, b))
        - entropy_bits(&marginal(p, n, &joint))
}

/// `(S, I_half, I_quarter)`; the quarter value only for `N % 4 == 0`.
pub fn measures(p: &[f64], n: u32) -> (f64, f64, Option<f64>) {
    let left: Vec<u32> = (0..n / 2).collect();
    let right: Vec<u32> = (n / 2..n).collect();
    let quarter = (n % 4 == 0).then(|| {
        let a: Vec<u32> = (0..n / 4).collect();
        let b: Vec<u32> = (n / 2..n / 2 + n / 4).collect();
        mutual_information(p, n, &a, &b)
    });
    (entropy_bits(p), mutual_information(p, n, &left, &right), quarter)
}
