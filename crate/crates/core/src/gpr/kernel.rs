//! Separable Matérn 3/2 correlation.

const SQRT3: f64 = 1.732_050_807_568_877_2;

/// One-dimensional factor `(1 + a)e^{−a}` with `a = √3|h|/θ`.
#[inline]
pub fn matern32_1d(h: f64, theta: f64) -> f64 {
    let a = SQRT3 * h.abs() / theta;
    (1.0 + a) * (-a).exp()
}

/// `matern32_1d(h, θ) − 1` without cancellation near `h = 0`.
pub fn matern32_1d_m1(h: f64, theta: f64) -> f64 {
    let a = SQRT3 * h.abs() / theta;
    if a >= 0.5 {
        return (1.0 + a) * (-a).exp() - 1.0;
    }
    // Σ_{n≥2} (−1)^{n+1} (n−1) aⁿ/n!
    let mut pow_fact = a * a / 2.0;
    let mut sum = 0.0;
    let mut n = 2.0;
    loop {
        let term = (n - 1.0) * pow_fact;
        sum -= term;
        if term.abs() <= 1e-18 * sum.abs() || n > 40.0 {
            break;
        }
        n += 1.0;
        pow_fact *= -a / n;
    }
    sum
}

/// Derivative of [`matern32_1d`] with respect to `h`: `−(3h/θ²)e^{−a}`.
#[inline]
pub fn matern32_1d_deriv(h: f64, theta: f64) -> f64 {
    let a = SQRT3 * h.abs() / theta;
    -3.0 * h / (theta * theta) * (-a).exp()
}

/// `∏ₖ (1 + √3|xₖ−x′ₖ|/θₖ) exp(−√3|xₖ−x′ₖ|/θₖ)`.
pub fn matern32(x: &[f64], xp: &[f64], theta: &[f64]) -> f64 {
    x.iter()
        .zip(xp)
        .zip(theta)
        .map(|((a, b), t)| matern32_1d(a - b, *t))
        .product()
}

/// `matern32(x, x′, θ) − 1`, accurate also when the correlation is close to one.
pub fn matern32_m1(x: &[f64], xp: &[f64], theta: &[f64]) -> f64 {
    x.iter()
        .zip(xp)
        .zip(theta)
        .map(|((a, b), t)| matern32_1d_m1(a - b, *t).ln_1p())
        .sum::<f64>()
        .exp_m1()
}

/// Gradient of [`matern32`] with respect to `x`.
pub fn matern32_grad(x: &[f64], xp: &[f64], theta: &[f64]) -> Vec<f64> {
    let j = x.len();
    let f: Vec<f64> = (0..j).map(|k| matern32_1d(x[k] - xp[k], theta[k])).collect();
    (0..j)
        .map(|k| {
            let others: f64 = (0..j).filter(|&m| m != k).map(|m| f[m]).product();
            matern32_1d_deriv(x[k] - xp[k], theta[k]) * others
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_at_coincidence() {
        assert_eq!(matern32(&[0.3, 0.1], &[0.3, 0.1], &[1.0, 2.0]), 1.0);
        assert_eq!(matern32_grad(&[0.3], &[0.3], &[1.0]), vec![0.0]);
    }

    #[test]
    fn minus_one_is_accurate() {
        for a in [1e-9, 1e-4, 0.01, 0.3, 0.49, 0.5, 2.0] {
            let theta = 1.0;
            let h = a * theta / SQRT3;
            let direct = (1.0 + a) * (-a as f64).exp() - 1.0;
            let m1 = matern32_1d_m1(h, theta);
            assert!((m1 - direct).abs() <= 1e-15, "{a}");
            if a < 1e-3 {
                assert!((m1 + a * a / 2.0 - a * a * a / 3.0).abs() <= a.powi(4) + 1e-15 * a * a);
            }
        }
        let (x, y, t) = ([0.1, 0.5], [0.4, 0.2], [0.3, 1.0]);
        assert!((matern32_m1(&x, &y, &t) - (matern32(&x, &y, &t) - 1.0)).abs() < 1e-15);
        assert_eq!(matern32_m1(&x, &x, &t), 0.0);
    }

    #[test]
    fn known_value() {
        let theta = 0.7;
        let r = matern32(&[theta / SQRT3], &[0.0], &[theta]);
        assert!((r - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn separable_and_symmetric() {
        let (x, y, t) = ([0.1, 0.5, 0.9], [0.4, 0.2, 0.3], [0.3, 1.0, 0.5]);
        let prod: f64 = (0..3).map(|k| matern32(&[x[k]], &[y[k]], &[t[k]])).product();
        assert!((matern32(&x, &y, &t) - prod).abs() < 1e-15);
        assert_eq!(matern32(&x, &y, &t), matern32(&y, &x, &t));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (x, y, t) = ([0.13, 0.52, 0.91], [0.4, 0.2, 0.35], [0.3, 1.0, 0.5]);
        let g = matern32_grad(&x, &y, &t);
        for k in 0..3 {
            let h = 1e-6;
            let mut xp = x;
            let mut xm = x;
            xp[k] += h;
            xm[k] -= h;
            let fd = (matern32(&xp, &y, &t) - matern32(&xm, &y, &t)) / (2.0 * h);
            assert!((fd - g[k]).abs() <= 1e-6 * g[k].abs().max(1e-8), "{fd} {}", g[k]);
            assert!(g[k] * (x[k] - y[k]) < 0.0);
        }
    }
}
