use crate::{Error, Result};

/// ψ(x) for a positive integer argument.
pub fn digamma(x: u64) -> Result<f64> {
    if x < 1 {
        return Err(Error::Domain(format!("digamma undefined at {x}")));
    }
    Ok(digamma_real(x as f64))
}

/// ψ(x) for real x > 0: upward recurrence to x >= 10, then the asymptotic series.
pub(crate) fn digamma_real(mut x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut shift = 0.0;
    while x < 10.0 {
        shift -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Bernoulli tail: B_2k / (2k x^2k) for k = 1..6
    let tail = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * 691.0 / 32760.0)))));
    x.ln() - 0.5 * inv - tail + shift
}
