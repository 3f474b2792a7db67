//! Float helpers routed through `libm` so results do not depend on `std`.

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn powi(base: f64, n: i32) -> f64 {
    libm::pow(base, n as f64)
}

/// `ceil` that ignores float noise just above an integer (5.0000000001 -> 5).
#[inline]
pub(crate) fn ceil_count(x: f64) -> usize {
    if x <= 0.0 {
        return 0;
    }
    let c = libm::ceil(x - 1e-9);
    if c < 0.0 {
        0
    } else {
        c as usize
    }
}
