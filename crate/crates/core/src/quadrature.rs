//! Fixed-order Gauss–Legendre rule used for spline arc lengths.

use std::sync::LazyLock;

pub(crate) const ORDER: usize = 32;

/// Nodes and weights on [-1, 1].
pub(crate) static GAUSS_LEGENDRE: LazyLock<([f64; ORDER], [f64; ORDER])> =
    LazyLock::new(|| legendre_rule(ORDER));

fn legendre_rule<const N: usize>(n: usize) -> ([f64; N], [f64; N]) {
    let mut nodes = [0.0; N];
    let mut weights = [0.0; N];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // three-term recurrence for P_n(x) and P_{n-1}(x)
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Integrates `f` over `[a, b]`.
pub(crate) fn integrate(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (nodes, weights) = &*GAUSS_LEGENDRE;
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    nodes
        .iter()
        .zip(weights)
        .map(|(&x, &w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        let (_, w) = &*GAUSS_LEGENDRE;
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
    }

    #[test]
    fn exact_for_high_degree_polynomials() {
        // degree 63 is the exactness limit of a 32-point rule
        let v = integrate(0.0, 1.0, |x| x.powi(62));
        assert!((v - 1.0 / 63.0).abs() < 1e-14);
        let v = integrate(-1.0, 2.0, |x| 3.0 * x * x);
        assert!((v - 9.0).abs() < 1e-12);
    }

    #[test]
    fn smooth_transcendental() {
        let v = integrate(0.0, std::f64::consts::PI, f64::sin);
        assert!((v - 2.0).abs() < 1e-14);
    }
}
