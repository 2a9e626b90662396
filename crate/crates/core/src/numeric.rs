//! Small numerical kernels shared across modules: compensated sums and
//! fixed-order quadrature rules.

/// Neumaier-compensated sum in iteration order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration
/// on the three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let (p, pm1) = if n == 0 { (1.0, 0.0) } else { (p1, p0) };
    let d = n as f64 * (z * p - pm1) / (z * z - 1.0);
    (p, d)
}

/// Gauss-Legendre rule mapped to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|t| half * t).collect(),
    )
}

/// Fejer first-rule weights for the nodes mu_j = cos((j + 1/2) pi / n),
/// integrating over mu in [-1, 1].
pub fn fejer_weights(n: usize) -> Vec<f64> {
    use std::f64::consts::PI;
    (0..n)
        .map(|j| {
            let theta = (j as f64 + 0.5) * PI / n as f64;
            let mut s = 0.0;
            for k in 1..=n / 2 {
                let kf = k as f64;
                s += (2.0 * kf * theta).cos() / (4.0 * kf * kf - 1.0);
            }
            2.0 / n as f64 * (1.0 - 2.0 * s)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let v = [1.0, 1e-16, 1e-16, -1.0];
        assert_eq!(compensated_sum(v), 2e-16);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(7);
        for deg in 0..14 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg)).sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "degree {deg}: {q} vs {exact}");
        }
    }

    #[test]
    fn fejer_integrates_polynomials_below_n() {
        let n = 16;
        let w = fejer_weights(n);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        for deg in 0..n as i32 {
            let q: f64 = (0..n)
                .map(|j| {
                    let mu = ((j as f64 + 0.5) * std::f64::consts::PI / n as f64).cos();
                    w[j] * mu.powi(deg)
                })
                .sum();
            let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-13, "degree {deg}");
        }
    }
}
