//! Standard normal tail functions evaluated in log space.

use statrs::function::erf::{erfc, erfc_inv};
use std::f64::consts::{PI, SQRT_2};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Past this point `erfc` is replaced by the asymptotic series; the truncation error
/// of the six-term series is below 1e-14 there.
const ASYMPTOTIC_FROM: f64 = 30.0;

pub(crate) fn normal_ln_pdf(z: f64) -> f64 {
    -0.5 * z * z - LN_SQRT_2PI
}

pub(crate) fn normal_sf(z: f64) -> f64 {
    0.5 * erfc(z / SQRT_2)
}

/// `ln P(Z > z)`, accurate far beyond the point where `P(Z > z)` underflows.
pub(crate) fn normal_ln_sf(z: f64) -> f64 {
    if z == f64::NEG_INFINITY {
        return 0.0;
    }
    if z == f64::INFINITY {
        return f64::NEG_INFINITY;
    }
    if z < -5.0 {
        // P(Z > z) = 1 - P(Z > -z) with the second term tiny
        (-normal_sf(-z)).ln_1p()
    } else if z < ASYMPTOTIC_FROM {
        normal_sf(z).ln()
    } else {
        let r = 1.0 / (z * z);
        let series = 1.0 - r * (1.0 - 3.0 * r * (1.0 - 5.0 * r * (1.0 - 7.0 * r * (1.0 - 9.0 * r))));
        normal_ln_pdf(z) - z.ln() + series.ln()
    }
}

/// Inverse of [`normal_ln_sf`]: the `z` with `ln P(Z > z) = ln_q`, for `ln_q <= 0`.
pub(crate) fn normal_isf_ln(ln_q: f64) -> f64 {
    if ln_q >= 0.0 {
        return f64::NEG_INFINITY;
    }
    if ln_q == f64::NEG_INFINITY {
        return f64::INFINITY;
    }
    let mut z = if ln_q > -700.0 {
        SQRT_2 * erfc_inv(2.0 * ln_q.exp())
    } else {
        // leading terms of the inverse Mills expansion
        let l = -ln_q;
        let z0 = (2.0 * l).sqrt();
        (2.0 * l - (2.0 * PI * z0 * z0).ln()).sqrt()
    };
    // Newton polish on the log scale
    for _ in 0..6 {
        let f = normal_ln_sf(z) - ln_q;
        let slope = -(normal_ln_pdf(z) - normal_ln_sf(z)).exp();
        if !slope.is_finite() || slope == 0.0 {
            break;
        }
        let step = f / slope;
        z -= step;
        if step.abs() <= 1e-15 * z.abs().max(1.0) {
            break;
        }
    }
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_sf_matches_direct_evaluation() {
        for &z in &[-8.0, -3.0, -0.5, 0.0, 1.0, 4.0, 10.0, 25.0, 29.9] {
            let direct = normal_sf(z).ln();
            assert!((normal_ln_sf(z) - direct).abs() <= 1e-13 * direct.abs().max(1.0), "z={z}");
        }
    }

    #[test]
    fn asymptotic_branch_is_continuous() {
        let below = normal_sf(ASYMPTOTIC_FROM).ln();
        let above = normal_ln_sf(ASYMPTOTIC_FROM);
        assert!((below - above).abs() < 1e-10 * below.abs(), "{below} vs {above}");
    }

    #[test]
    fn far_tail_is_finite() {
        // P(Z > 40) ~ 3.7e-350 underflows as a plain double
        let v = normal_ln_sf(40.0);
        assert!(v.is_finite() && v < -800.0);
    }

    #[test]
    fn isf_inverts_ln_sf() {
        for &z in &[-6.0, -1.0, 0.0, 0.3, 2.0, 6.36, 12.0, 35.0, 60.0] {
            let back = normal_isf_ln(normal_ln_sf(z));
            assert!((back - z).abs() <= 1e-12 * z.abs().max(1.0), "z={z} back={back}");
        }
    }

    #[test]
    fn median() {
        assert!(normal_isf_ln(0.5f64.ln()).abs() < 1e-14);
    }
}
