use crate::error::{Error, Result};

/// Shannon entropy of a biased coin, in bits.
pub fn binary_entropy(e: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&e) {
        return Err(Error::Domain(format!("binary entropy argument {e} outside [0, 1]")));
    }
    if e == 0.0 || e == 1.0 {
        return Ok(0.0);
    }
    Ok(-e * e.log2() - (1.0 - e) * (1.0 - e).log2())
}

/// Entropy for arguments already known to be in range (QBERs are clamped upstream).
pub(crate) fn entropy_clamped(e: f64) -> f64 {
    binary_entropy(e.clamp(0.0, 1.0)).unwrap_or(0.0)
}

/// Asymptotic secret bits per channel use, `(Y/2)[1 - h(e_x) - f h(e_z)]`,
/// clamped at zero.
pub fn secret_key_rate(yield_per_use: f64, qber_x: f64, qber_z: f64, ec_inefficiency: f64) -> f64 {
    let bracket = 1.0 - entropy_clamped(qber_x) - ec_inefficiency * entropy_clamped(qber_z);
    (0.5 * yield_per_use * bracket).max(0.0)
}

/// Probability that exactly one of two independent flips happens.
pub(crate) fn xor_prob(a: f64, b: f64) -> f64 {
    a * (1.0 - b) + b * (1.0 - a)
}
