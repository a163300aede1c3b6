//! Thin wrappers over `libm` so every build uses the same implementations.

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn floor(x: f64) -> f64 {
    libm::floor(x)
}

#[inline]
pub(crate) fn sin_cos(x: f64) -> (f64, f64) {
    libm::sincos(x)
}

#[inline]
pub(crate) fn atan2(y: f64, x: f64) -> f64 {
    libm::atan2(y, x)
}

/// `-p ln p` with the `0 ln 0 = 0` convention. Non-positive masses contribute
/// nothing, which also absorbs tiny negative values inside validation slack.
#[inline]
pub(crate) fn neg_p_ln_p(p: f64) -> f64 {
    if p > 0.0 {
        -p * ln(p)
    } else {
        0.0
    }
}

/// Shannon entropy in nats.
pub(crate) fn entropy(p: &[f64]) -> f64 {
    p.iter().copied().map(neg_p_ln_p).sum()
}
