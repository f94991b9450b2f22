//! Tail functions of the split-sum evaluation.
//!
//! `g` is the integral of the Stirling envelope of the first-return law,
//! `s = 2∫_x^∞ g`, and `h`, `P`, `Q` collect the integral tails of the joint
//! and marginal entropies. `h` and `P` are evaluated by adaptive quadrature
//! after the substitution `y = u²`, which turns the `y^{-1/2}` endpoint
//! behaviour into a logarithmic one.

use std::f64::consts::PI;

use statrs::function::erf::erfc;

use crate::error::{invalid, Result};
use crate::quadrature::integrate;

/// Absolute tolerance of every quadrature in this module.
pub const QUAD_TOL: f64 = 1e-11;

// Past this point the direct difference in `g` loses too many digits.
const G_ASYMPTOTIC_FROM: f64 = 30.0;
// e^{-u²} is below 1e-27 beyond this distance in u.
const U_SPAN: f64 = 8.0;

fn check(x: f64) -> Result<()> {
    if x.is_nan() || x < 0.0 {
        return invalid(format!("argument {x} must be non-negative"));
    }
    Ok(())
}

#[inline]
fn g_unchecked(x: f64) -> f64 {
    if x == 0.0 {
        return f64::INFINITY;
    }
    if x < G_ASYMPTOTIC_FROM {
        return (-x).exp() / (PI * x).sqrt() - erfc(x.sqrt());
    }
    // erfc(√x) = e^{-x}/√(πx) Σ_k (-1)^k (2k-1)!!/(2x)^k
    let mut term = 1.0;
    let mut series = 0.0;
    for k in 1..64 {
        let ratio = (2 * k - 1) as f64 / (2.0 * x);
        // The series is asymptotic: stop at its smallest term.
        if k > 1 && ratio >= 1.0 {
            break;
        }
        term *= ratio;
        let signed = if k % 2 == 1 { term } else { -term };
        series += signed;
        if term < 1e-18 * series.abs() {
            break;
        }
    }
    (-x).exp() / (PI * x).sqrt() * series
}

/// `g(x) = e^{-x}/√(πx) − erfc(√x)`; diverges (integrably) at 0.
pub fn g(x: f64) -> Result<f64> {
    check(x)?;
    Ok(g_unchecked(x))
}

/// `s(x) = 2∫_x^∞ g = (2x+1) erfc(√x) − 2√(x/π) e^{-x}`.
pub fn s(x: f64) -> Result<f64> {
    check(x)?;
    Ok((2.0 * x + 1.0) * erfc(x.sqrt()) - 2.0 * (x / PI).sqrt() * (-x).exp())
}

/// `Q(x) = (1 − 4x) erfc(√x) + 4√(x/π) e^{-x}`.
pub fn q_fn(x: f64) -> Result<f64> {
    check(x)?;
    Ok((1.0 - 4.0 * x) * erfc(x.sqrt()) + 4.0 * (x / PI).sqrt() * (-x).exp())
}

/// `∫_x^∞ g(y) dy` by quadrature (closed form is `s(x)/2`).
pub fn g_integral(x: f64) -> Result<f64> {
    check(x)?;
    let lo = x.sqrt();
    let est = integrate(|u| 2.0 * u * g_unchecked(u * u), lo, lo + U_SPAN, QUAD_TOL)?;
    Ok(est.value)
}

/// `∫_x^∞ g(y) ln g(y) dy`.
pub fn g_log_g_integral(x: f64) -> Result<f64> {
    check(x)?;
    let lo = x.sqrt();
    let f = |u: f64| {
        let gv = g_unchecked(u * u);
        if gv > 0.0 && gv.is_finite() {
            2.0 * u * gv * gv.ln()
        } else {
            0.0
        }
    };
    Ok(integrate(f, lo, lo + U_SPAN, QUAD_TOL)?.value)
}

/// `c₁ = 2∫_0^∞ g ln g`.
pub fn c1() -> Result<f64> {
    Ok(2.0 * g_log_g_integral(0.0)?)
}

/// `h(x) = −ln(2√(πe)) erfc(√x) − √(x/π) e^{-x} − (3/(2√π)) ∫_x^∞ e^{-y} y^{-1/2} ln y dy`.
pub fn h(x: f64) -> Result<f64> {
    check(x)?;
    let lo = x.sqrt();
    // y = u²: e^{-y} y^{-1/2} ln y dy = 4 e^{-u²} ln u du
    let tail = integrate(
        |u: f64| if u > 0.0 { 4.0 * (-u * u).exp() * u.ln() } else { 0.0 },
        lo,
        lo + U_SPAN,
        QUAD_TOL,
    )?
    .value;
    let log_norm = (2.0 * (PI * std::f64::consts::E).sqrt()).ln();
    Ok(-log_norm * erfc(lo) - (x / PI).sqrt() * (-x).exp() - 1.5 / PI.sqrt() * tail)
}

/// `P(x) = h(x) − 4∫_x^∞ g ln g`.
pub fn p_fn(x: f64) -> Result<f64> {
    Ok(h(x)? - 4.0 * g_log_g_integral(x)?)
}

/// Closed form `h(0) = (3γ + ln(16/π) − 1)/2`.
pub fn h0_closed_form() -> f64 {
    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
    0.5 * (3.0 * EULER_GAMMA + (16.0 / PI).ln() - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g_integrates_to_half() {
        assert!((g_integral(0.0).unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn s_matches_its_integral() {
        for x in [0.01, 0.3, 1.0, 4.0, 12.0] {
            let quad = 2.0 * g_integral(x).unwrap();
            assert!((quad - s(x).unwrap()).abs() < 1e-9, "x={x}");
        }
    }

    #[test]
    fn g_series_joins_direct_form() {
        let direct = (-30.0f64).exp() / (PI * 30.0).sqrt() - erfc(30.0f64.sqrt());
        assert!((direct / g_unchecked(30.0) - 1.0).abs() < 1e-8);
        let exact_40 = 4.569_825_621_008_641e-21;
        assert!((g_unchecked(40.0) / exact_40 - 1.0).abs() < 1e-12);
        assert!(g_unchecked(200.0) > 0.0);
    }

    #[test]
    fn h_at_zero() {
        assert!((h(0.0).unwrap() - h0_closed_form()).abs() < 1e-9);
        assert!((h0_closed_form() - 1.179753).abs() < 1e-6);
    }

    #[test]
    fn boundary_values() {
        assert_eq!(q_fn(0.0).unwrap(), 1.0);
        assert_eq!(s(0.0).unwrap(), 1.0);
        assert!(g(0.0).unwrap().is_infinite());
        assert!(g(-1.0).is_err());
        assert!(h(-0.5).is_err());
    }
}
