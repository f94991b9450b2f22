//! Closed-form statistics of the two-species annihilating particle model.
//!
//! After the transient, the particles nearest to an interface are described
//! by first-return probabilities of a biased ±1 walk. With `p` the probability
//! of a black particle (up-step) and `q = 1 − p`:
//!
//! * `f_{2n} = C(2n, n) (pq)^n / (2n − 1)`, `f_odd = 0`;
//! * `p_ij = (p − q)/(2q) · f_{i+j+1}` for `i + j` odd, `0` otherwise;
//! * `ξ = −1/ln(4pq)`.
//!
//! The asymptotic MI between the two sides uses an exact sum up to the cutoff
//! `m` and integral tails in terms of the functions in [`special`].

pub mod special;

use crate::error::{invalid, Error, Result};
use crate::fit::{linear_fit, LinearFit};
use crate::info::Compensated;

pub use special::{c1, g, g_integral, g_log_g_integral, h, h0_closed_form, p_fn, q_fn, s};

/// Smallest cutoff accepted by the split-sum evaluation.
pub const MIN_CUTOFF: usize = 10;
/// Tolerated mass beyond the oracle's truncation.
pub const ORACLE_TAIL_TOLERANCE: f64 = 1e-8;

/// Model parameters. `q_black` is the probability of a black particle, which
/// is the up-step probability `p` of the imbalance walk; `1 − q_black` is the
/// down-step probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RWModelParams {
    q_black: f64,
    m: usize,
}

impl RWModelParams {
    /// `q_black ∈ (0, 1)`, `m ≥ 10`. Values below one half are handled by the
    /// black/white mirror symmetry.
    pub fn new(q_black: f64, m: usize) -> Result<Self> {
        if !(q_black > 0.0 && q_black < 1.0) {
            return invalid(format!("q_black = {q_black} outside (0, 1)"));
        }
        if m < MIN_CUTOFF {
            return invalid(format!("cutoff m = {m} below {MIN_CUTOFF}"));
        }
        Ok(Self { q_black, m })
    }

    pub fn q_black(&self) -> f64 {
        self.q_black
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Up-step probability `p`.
    pub fn p_up(&self) -> f64 {
        self.q_black
    }

    /// Down-step probability `q`.
    pub fn q_down(&self) -> f64 {
        1.0 - self.q_black
    }

    /// The same model with colours exchanged so that black is the majority.
    pub fn mirrored_to_majority(&self) -> Self {
        Self {
            q_black: self.q_black.max(1.0 - self.q_black),
            m: self.m,
        }
    }

    pub fn is_critical(&self) -> bool {
        self.q_black == 0.5
    }

    /// `ξ = −1/ln(4pq)`, infinite at `q_black = 1/2`.
    pub fn xi(&self) -> f64 {
        // 4pq = 1 − (p − q)², so ln_1p keeps precision near criticality.
        let d = self.p_up() - self.q_down();
        -1.0 / (-d * d).ln_1p()
    }

    /// `(p − q)/(2q)` for the majority species.
    pub fn prefactor(&self) -> f64 {
        let maj = self.mirrored_to_majority();
        (maj.p_up() - maj.q_down()) / (2.0 * maj.q_down())
    }
}

/// Output of [`mi_analytic`].
#[derive(Debug, Clone, PartialEq)]
pub struct RWAnalyticResult {
    /// Requested black probability (before mirroring).
    pub q_black: f64,
    pub m: usize,
    pub xi: f64,
    /// Mutual information in nats.
    pub i_e: f64,
    /// Mutual information in bits.
    pub i_bits: f64,
    /// `p_i` for `i = 0 .. m−1`; empty at criticality.
    pub p_i_table: Vec<f64>,
    /// Marginal entropy in nats; `None` at criticality where it diverges.
    pub s_i: Option<f64>,
    /// Joint entropy in nats; `None` at criticality.
    pub s_ij: Option<f64>,
    /// `q_black = 1/2` exactly: the value reported is the ε → 0 limit `P(0)`.
    pub critical: bool,
}

/// `f_{2k}` by the multiplicative recurrence `u_{k+1} = u_k · 2(2k+1)/(k+1) · pq`.
pub fn first_return(k: u64, params: &RWModelParams) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let pq = params.p_up() * params.q_down();
    let mut u = 2.0 * pq;
    for j in 1..k {
        u *= 2.0 * (2 * j + 1) as f64 / (j + 1) as f64 * pq;
    }
    u / (2 * k - 1) as f64
}

/// First-return probability at step `r` (zero for odd `r` and `r = 0`).
pub fn first_return_steps(r: u64, params: &RWModelParams) -> f64 {
    if r % 2 == 1 {
        0.0
    } else {
        first_return(r / 2, params)
    }
}

/// `f_r` for `r = 0 ..= r_max`, indexed by step count.
pub fn first_return_table(params: &RWModelParams, r_max: usize) -> Vec<f64> {
    let pq = params.p_up() * params.q_down();
    let mut f = vec![0.0; r_max + 1];
    let mut u = 2.0 * pq;
    let mut k = 1usize;
    while 2 * k <= r_max {
        f[2 * k] = u / (2 * k - 1) as f64;
        u *= 2.0 * (2 * k + 1) as f64 / (k + 1) as f64 * pq;
        k += 1;
    }
    f
}

/// Stirling envelope `e^{−k/ξ} k^{−3/2} / (2√π)` of `f_{2k}`.
pub fn stirling_tail(k: u64, params: &RWModelParams) -> f64 {
    let k = k as f64;
    let xi = params.xi();
    let decay = if xi.is_infinite() { 1.0 } else { (-k / xi).exp() };
    decay * k.powf(-1.5) / (2.0 * std::f64::consts::PI.sqrt())
}

/// Joint probability that the nearest particles sit `i` sites left and `j`
/// sites right of the interface.
pub fn joint_pij(i: u64, j: u64, params: &RWModelParams) -> Result<f64> {
    if j == 0 {
        return invalid("right distance j must be at least 1");
    }
    if params.is_critical() {
        return invalid("the joint law is not normalisable at q_black = 1/2");
    }
    if (i + j) % 2 == 0 {
        return Ok(0.0);
    }
    Ok(params.prefactor() * first_return_steps(i + j + 1, params))
}

/// Split-sum marginals `p̃_i` for `i = 0 .. len`, sharing one table.
fn split_marginals(params: &RWModelParams, len: usize) -> Result<Vec<f64>> {
    let m = params.m;
    let xi = params.xi();
    let sqrt_xi = xi.sqrt();
    let f = first_return_table(params, m);
    // suffix[r] = Σ_{k=r}^{m} f_k, accumulated from the small tail upward.
    let mut suffix = vec![0.0; m + 2];
    for r in (0..=m).rev() {
        suffix[r] = suffix[r + 1] + f[r];
    }
    let tail = special::g(m as f64 / (2.0 * xi))? / sqrt_xi;
    (0..len)
        .map(|i| {
            if i + 1 < m {
                Ok(tail + suffix[i + 2])
            } else {
                Ok(special::g(i.max(m) as f64 / (2.0 * xi))? / sqrt_xi)
            }
        })
        .collect()
}

/// Marginal `p_i = (p−q)/(2q) · [Σ_{r=i+2}^{m} f_r + g(max(i,m)/2ξ)/√ξ]`.
pub fn marginal_pi(i: usize, params: &RWModelParams) -> Result<f64> {
    if params.is_critical() {
        return invalid("the marginal law is not normalisable at q_black = 1/2");
    }
    let params = params.mirrored_to_majority();
    let pt = split_marginals(&params, i + 1)?;
    Ok(params.prefactor() * pt[i])
}

fn xlnx(v: f64) -> f64 {
    if v > 0.0 {
        v * v.ln()
    } else {
        0.0
    }
}

/// Asymptotic MI between the two sides of an interface.
///
/// `q_black < 1/2` is evaluated through the colour mirror; `q_black = 1/2`
/// returns the limit `P(0)` with `critical` set.
pub fn mi_analytic(params: &RWModelParams) -> Result<RWAnalyticResult> {
    let requested = params.q_black;
    let m = params.m;
    if params.is_critical() {
        let i_e = special::p_fn(0.0)?;
        return Ok(RWAnalyticResult {
            q_black: requested,
            m,
            xi: f64::INFINITY,
            i_e,
            i_bits: i_e / std::f64::consts::LN_2,
            p_i_table: Vec::new(),
            s_i: None,
            s_ij: None,
            critical: true,
        });
    }
    let params = params.mirrored_to_majority();
    let xi = params.xi();
    let sqrt_xi = xi.sqrt();
    let ln_sqrt_xi = sqrt_xi.ln();
    let pref = params.prefactor();
    let x = m as f64 / (2.0 * xi);

    let f = first_return_table(&params, m);
    let p_tilde = split_marginals(&params, m)?;

    let mut joint_sum = Compensated::default();
    for (r, &fr) in f.iter().enumerate().take(m).skip(1) {
        joint_sum.add((r as f64 - 1.0) * xlnx(fr));
    }
    let joint_sum = joint_sum.value();
    let mut marginal_sum = Compensated::default();
    for &v in &p_tilde[..m - 1] {
        marginal_sum.add(xlnx(v));
    }
    let marginal_sum = marginal_sum.value();

    let erfc_x = statrs::function::erf::erfc(x.sqrt());
    let h_x = special::h(x)?;
    let glogg = special::g_log_g_integral(x)?;
    let p_x = h_x - 4.0 * glogg;
    let q_x = special::q_fn(x)?;
    let s_x = special::s(x)?;

    let log_pref = pref.ln();
    let i_e_raw = -log_pref
        + pref * (joint_sum - 2.0 * marginal_sum)
        + pref * sqrt_xi * (p_x - ln_sqrt_xi * q_x);
    let s_i = -log_pref - pref * marginal_sum + pref * sqrt_xi * ln_sqrt_xi * s_x
        - 2.0 * pref * sqrt_xi * glogg;
    let s_ij =
        -log_pref - pref * (joint_sum + sqrt_xi * h_x - 3.0 * sqrt_xi * ln_sqrt_xi * erfc_x);
    if !i_e_raw.is_finite() {
        return Err(Error::Accuracy(format!(
            "non-finite MI at q_black = {requested}, m = {m}"
        )));
    }
    // Truncation can leave a tiny negative value far from criticality.
    let i_e = i_e_raw.max(0.0);
    Ok(RWAnalyticResult {
        q_black: requested,
        m,
        xi,
        i_e,
        i_bits: i_e / std::f64::consts::LN_2,
        p_i_table: p_tilde.iter().map(|v| pref * v).collect(),
        s_i: Some(s_i),
        s_ij: Some(s_ij),
        critical: false,
    })
}

/// Entropies of the directly summed, truncated joint law.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub q_black: f64,
    pub cutoff: usize,
    /// `S_i + S_j − S_ij` in nats.
    pub i_e: f64,
    pub s_i: f64,
    pub s_j: f64,
    pub s_ij: f64,
    /// `1 − Σ p_ij` over the retained pairs.
    pub tail_mass: f64,
}

/// Reference MI from the table of all `p_ij` with `i + j + 1 ≤ cutoff`.
pub fn mi_bruteforce_oracle(q_black: f64, cutoff: usize) -> Result<OracleResult> {
    if !(q_black > 0.5 && q_black < 1.0) {
        return invalid(format!("oracle needs q_black in (1/2, 1), got {q_black}"));
    }
    if cutoff < 2 {
        return invalid("oracle cutoff must be at least 2");
    }
    let params = RWModelParams { q_black, m: cutoff };
    let pref = params.prefactor();
    let f = first_return_table(&params, cutoff);

    let mut rows = vec![Compensated::default(); cutoff];
    let mut cols = vec![Compensated::default(); cutoff];
    let mut total = Compensated::default();
    let mut joint = Compensated::default();
    for i in 0..cutoff - 1 {
        let first_j = if i % 2 == 0 { 1 } else { 2 };
        let mut j = first_j;
        while i + j < cutoff {
            let v = pref * f[i + j + 1];
            rows[i].add(v);
            cols[j].add(v);
            total.add(v);
            joint.add(-xlnx(v));
            j += 2;
        }
    }
    let tail_mass = 1.0 - total.value();
    if tail_mass.abs() > ORACLE_TAIL_TOLERANCE {
        return Err(Error::Accuracy(format!(
            "mass {tail_mass:e} lies beyond cutoff {cutoff} at q_black = {q_black}"
        )));
    }
    let entropy = |acc: &[Compensated]| {
        let mut s = Compensated::default();
        for c in acc {
            s.add(-xlnx(c.value()));
        }
        s.value()
    };
    let s_i = entropy(&rows);
    let s_j = entropy(&cols);
    let s_ij = joint.value();
    Ok(OracleResult {
        q_black,
        cutoff,
        i_e: s_i + s_j - s_ij,
        s_i,
        s_j,
        s_ij,
        tail_mass,
    })
}

/// Fit `ln|I_e(1/2 + ε) − i_max|` against `ln ε`; the slope is the critical exponent.
pub fn critical_exponent_fit(epsilons: &[f64], m: usize, i_max: f64) -> Result<LinearFit> {
    if epsilons.len() < 3 {
        return invalid("exponent fit needs at least three ε values");
    }
    let mut x = Vec::with_capacity(epsilons.len());
    let mut y = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        if !(eps > 0.0 && eps < 0.5) {
            return invalid(format!("ε = {eps} outside (0, 1/2)"));
        }
        let r = mi_analytic(&RWModelParams::new(0.5 + eps, m)?)?;
        let gap = (r.i_e - i_max).abs();
        if gap == 0.0 {
            return Err(Error::Accuracy(format!("I_e equals i_max at ε = {eps}")));
        }
        x.push(eps.ln());
        y.push(gap.ln());
    }
    linear_fit(&x, &y)
}
