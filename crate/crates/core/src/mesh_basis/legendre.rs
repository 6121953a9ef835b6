/// Values `P_0(x) .. P_k(x)` by the three-term recurrence.
pub fn legendre(k: usize, x: f64) -> Vec<f64> {
    let mut p = vec![0.0; k + 1];
    p[0] = 1.0;
    if k >= 1 {
        p[1] = x;
    }
    for n in 2..=k {
        let nf = n as f64;
        p[n] = ((2.0 * nf - 1.0) * x * p[n - 1] - (nf - 1.0) * p[n - 2]) / nf;
    }
    p
}

/// Values and first derivatives of `P_0 .. P_k` at `x`.
pub fn legendre_with_derivative(k: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let p = legendre(k, x);
    let mut d = vec![0.0; k + 1];
    // P'_{n} = P'_{n-2} + (2n-1) P_{n-1}
    for n in 1..=k {
        d[n] = (2 * n - 1) as f64 * p[n - 1] + if n >= 2 { d[n - 2] } else { 0.0 };
    }
    (p, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoint_values() {
        for k in 0..8 {
            let p1 = legendre(k, 1.0);
            let pm = legendre(k, -1.0);
            for n in 0..=k {
                assert!((p1[n] - 1.0).abs() < 1e-14);
                assert!((pm[n] - if n % 2 == 0 { 1.0 } else { -1.0 }).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let x = 0.3;
        let e = 1e-6;
        let (_, d) = legendre_with_derivative(6, x);
        let pp = legendre(6, x + e);
        let pm = legendre(6, x - e);
        for n in 0..=6 {
            assert!((d[n] - (pp[n] - pm[n]) / (2.0 * e)).abs() < 1e-8);
        }
    }
}
