//! Closed-form fidelities used as independent references.

use crate::channel::SchmidtChannel;
use crate::error::{Error, Result};

/// Slack allowed when checking `λ` against its upper bound.
const BOUND_SLACK: f64 = 1e-12;

fn check_lambda(lambda: f64, max: f64) -> Result<()> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::Domain(format!("lambda = {lambda} must be >= 0")));
    }
    if lambda > max + BOUND_SLACK {
        return Err(Error::Domain(format!(
            "lambda = {lambda} exceeds {max}: negative radicand"
        )));
    }
    Ok(())
}

/// Optimal average fidelity with the residual inconclusive measurement:
/// `λ + (1-λ)/(d+1) + (Σ_i √(d a_i² - λ))² / (d(d+1))`.
pub fn f_otaf(weights: &[f64], lambda: f64) -> Result<f64> {
    let d = weights.len();
    if d < 2 {
        return Err(Error::Domain("need at least two Schmidt weights".into()));
    }
    let df = d as f64;
    let min = weights.iter().copied().fold(f64::INFINITY, f64::min);
    check_lambda(lambda, df * min)?;
    // at λ = λ_max the smallest radicand is zero up to rounding
    let root_sum: f64 = weights
        .iter()
        .map(|w| {
            let r = df * w - lambda;
            if r <= BOUND_SLACK { 0.0 } else { r.sqrt() }
        })
        .sum();
    Ok(lambda + (1.0 - lambda) / (df + 1.0) + root_sum * root_sum / (df * (df + 1.0)))
}

/// Average fidelity with product inconclusive outcomes:
/// `λ + 2(1-λ)/(d+1)`.
pub fn f_product(d: usize, lambda: f64) -> f64 {
    let df = d as f64;
    lambda + 2.0 * (1.0 - lambda) / (df + 1.0)
}

/// Two-level overall fidelity `(2/3)(1 + λ/2)`.
pub fn f_overall_d2(lambda: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Domain(format!("lambda = {lambda} outside [0, 1]")));
    }
    Ok(2.0 / 3.0 * (1.0 + lambda / 2.0))
}

/// Fidelity when the measurement is tuned to angle `θ` but the channel has
/// angle `θ_c`: `(2/3)(1 + (λ/2) sinθ_c / sinθ)`.
pub fn f_theta_d2(cos_theta_c: f64, cos_theta: f64, lambda: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&cos_theta_c) {
        return Err(Error::Domain(format!("cos_theta_c = {cos_theta_c} outside [-1, 1]")));
    }
    if !(cos_theta.abs() < 1.0) {
        return Err(Error::Domain(format!("|cos_theta| = {} must be < 1", cos_theta.abs())));
    }
    check_lambda(lambda, 1.0 - cos_theta.abs())?;
    let sin_c = (1.0 - cos_theta_c * cos_theta_c).max(0.0).sqrt();
    let sin = (1.0 - cos_theta * cos_theta).sqrt();
    Ok(2.0 / 3.0 * (1.0 + lambda / 2.0 * sin_c / sin))
}

/// Per-angle optimum, `λ = 1 - |cosθ|`.
pub fn f_theta_opt_d2(cos_theta_c: f64, cos_theta: f64) -> Result<f64> {
    f_theta_d2(cos_theta_c, cos_theta, 1.0 - cos_theta.abs())
}

/// Best fidelity without a conclusive measurement: `(1 + (Σ a_i)²)/(d+1)`.
pub fn banaszek_bound(ch: &SchmidtChannel) -> f64 {
    let s: f64 = ch.coeffs().iter().sum();
    (1.0 + s * s) / (ch.dim() as f64 + 1.0)
}

/// Binary entropy in bits.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// Two-level channel with entanglement entropy `s_bits`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyChannel {
    /// Smaller Schmidt weight, `≤ 1/2`.
    pub min_weight: f64,
    pub cos_theta_c: f64,
    pub channel: SchmidtChannel,
}

/// Invert `h(p) = s_bits` on `p ∈ [0, 1/2]` by bisection.
pub fn entropy_to_channel_d2(s_bits: f64) -> Result<EntropyChannel> {
    if !(0.0..=1.0).contains(&s_bits) {
        return Err(Error::Domain(format!("entropy {s_bits} outside [0, 1] bits")));
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if binary_entropy(mid) < s_bits {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let p = if s_bits == 0.0 { 0.0 } else if s_bits == 1.0 { 0.5 } else { 0.5 * (lo + hi) };
    let cos_theta_c = 1.0 - 2.0 * p;
    let channel = crate::channel::make_channel(&[p.sqrt(), (1.0 - p).sqrt()])?;
    Ok(EntropyChannel {
        min_weight: p,
        cos_theta_c,
        channel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn otaf_values() {
        assert!((f_otaf(&[0.5, 0.5], 1.0).unwrap() - 1.0).abs() < 1e-15);
        for a2 in [0.9f64, 0.7, 0.5] {
            let w = [a2, 1.0 - a2];
            let s = (a2 * (1.0 - a2)).sqrt();
            assert!((f_otaf(&w, 0.0).unwrap() - 2.0 / 3.0 * (1.0 + s)).abs() < 1e-12);
        }
        assert!((f_otaf(&[0.5, 0.3, 0.2], 0.6).unwrap() - 0.886602540378).abs() < 1e-11);
        assert!((f_otaf(&[0.9, 0.1], 0.1).unwrap() - 0.8374368541872554).abs() < 1e-13);
        assert!(matches!(f_otaf(&[0.9, 0.1], 0.21), Err(Error::Domain(_))));
    }

    #[test]
    fn overall_and_theta_values() {
        assert!((f_overall_d2(0.0).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((f_overall_d2(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((f_overall_d2(0.4).unwrap() - 0.8).abs() < 1e-15);
        assert!((f_theta_d2(0.0, 0.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        for c in [0.0, 0.4, 0.95] {
            assert!((f_theta_opt_d2(1.0, c).unwrap() - 2.0 / 3.0).abs() < 1e-15);
            let arrow = f_theta_opt_d2(c, c).unwrap();
            assert!((arrow - f_overall_d2(1.0 - c).unwrap()).abs() < 1e-12);
        }
        assert!(f_theta_d2(0.3, 1.0, 0.0).is_err());
        assert!(f_theta_d2(0.3, 0.5, 0.51).is_err());
        assert!((f_theta_d2(0.7453903880482337, 0.3, 0.7).unwrap() - 0.8297237901540366).abs() < 1e-12);
    }

    #[test]
    fn entropy_inversion() {
        let full = entropy_to_channel_d2(1.0).unwrap();
        assert_eq!(full.min_weight, 0.5);
        assert_eq!(full.cos_theta_c, 0.0);
        let e = entropy_to_channel_d2(0.19).unwrap();
        assert!((e.min_weight - 0.029128040977721415).abs() < 1e-12);
        assert!((e.cos_theta_c - 0.9417439180445571).abs() < 1e-12);
        let e = entropy_to_channel_d2(0.55).unwrap();
        assert!((e.min_weight - 0.12730480597588317).abs() < 1e-12);
        assert!((e.channel.entanglement_entropy().unwrap() - 0.55).abs() < 1e-10);
        assert_eq!(entropy_to_channel_d2(0.0).unwrap().min_weight, 0.0);
        assert!(entropy_to_channel_d2(1.2).is_err());
        assert!((binary_entropy(0.8) - 0.7219280948873623).abs() < 1e-15);
    }

    #[test]
    fn otaf_at_max_matches_overall_d2() {
        for a2 in [0.5, 0.6, 0.8, 0.95] {
            let lam = 2.0 * (1.0 - a2);
            let lhs = f_otaf(&[a2, 1.0 - a2], lam).unwrap();
            assert!((lhs - f_overall_d2(lam).unwrap()).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn otaf_at_zero_is_banaszek(raw in prop::collection::vec(0.01f64..1.0, 2..6)) {
            let norm: f64 = raw.iter().sum();
            let w: Vec<f64> = raw.iter().map(|x| x / norm).collect();
            let ch = crate::channel::make_channel(&w.iter().map(|x| x.sqrt()).collect::<Vec<_>>()).unwrap();
            prop_assert!((f_otaf(&w, 0.0).unwrap() - banaszek_bound(&ch)).abs() < 1e-12);
        }

        #[test]
        fn theta_optimum_decreases(cc in 0.0f64..1.0, c1 in 0.0f64..0.99, c2 in 0.0f64..0.99) {
            let (lo, hi) = if c1 <= c2 { (c1, c2) } else { (c2, c1) };
            prop_assert!(f_theta_opt_d2(cc, hi).unwrap() <= f_theta_opt_d2(cc, lo).unwrap() + 1e-15);
        }
    }
}
