#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// ln(1 + e^x) without overflow.
#[inline]
pub fn log1pexp(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// KL divergence between Bernoulli(q) and Bernoulli(p), natural log.
pub fn kl_bernoulli(q: f64, p: f64) -> f64 {
    let mut kl = 0.0;
    if q > 0.0 {
        kl += q * (q / p).ln();
    }
    if q < 1.0 {
        kl += (1.0 - q) * ((1.0 - q) / (1.0 - p)).ln();
    }
    kl.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigmoid_logit_inverse() {
        for &p in &[1e-9, 0.1, 0.5, 0.75, 0.999] {
            assert!((sigmoid(logit(p)) - p).abs() < 1e-12);
        }
        assert!((logit(0.75) - 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn log1pexp_extremes() {
        assert_eq!(log1pexp(800.0), 800.0);
        assert!(log1pexp(-800.0) >= 0.0);
        assert!((log1pexp(0.0) - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn kl_values() {
        assert_eq!(kl_bernoulli(0.3, 0.3), 0.0);
        assert!((kl_bernoulli(1.0, 0.5) - 2f64.ln()).abs() < 1e-15);
        assert!((kl_bernoulli(0.0, 0.5) - 2f64.ln()).abs() < 1e-15);
    }
}
