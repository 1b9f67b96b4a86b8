//! Standard normal density and distribution function.

use core::f64::consts::PI;

/// Standard normal CDF, computed through `erfc` for accurate tails.
pub(crate) fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / core::f64::consts::SQRT_2)
}

/// Standard normal PDF.
pub(crate) fn std_normal_pdf(z: f64) -> f64 {
    libm::exp(-0.5 * z * z) / libm::sqrt(2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_reference_values() {
        assert!((std_normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((std_normal_cdf(1.6449) - 0.95).abs() < 1e-4);
        assert!((std_normal_cdf(-1.6449) - 0.05).abs() < 1e-4);
        assert!(std_normal_cdf(8.0) > 1.0 - 1e-14);
        assert!(std_normal_cdf(-8.0) < 1e-14);
    }

    #[test]
    fn pdf_reference_values() {
        assert!((std_normal_pdf(0.0) - 0.3989422804014327).abs() < 1e-15);
        let symm = std_normal_pdf(1.3) - std_normal_pdf(-1.3);
        assert_eq!(symm, 0.0);
    }
}
