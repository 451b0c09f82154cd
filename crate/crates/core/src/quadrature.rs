//! Gauss-Legendre rules computed by Newton iteration on Legendre polynomials.

use std::f64::consts::PI;

/// Quadrature points and weights on an interval.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// `m`-point Gauss-Legendre rule on [-1, 1], exact for polynomials of
    /// degree `2m - 1`.
    pub fn gauss_legendre(m: usize) -> Self {
        assert!(m > 0, "quadrature needs at least one point");
        let mut points = vec![0.0; m];
        let mut weights = vec![0.0; m];
        for i in 0..(m + 1) / 2 {
            // Chebyshev-like initial guess for the i-th largest root
            let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(m, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            points[i] = -x;
            points[m - 1 - i] = x;
            weights[i] = w;
            weights[m - 1 - i] = w;
        }
        if m % 2 == 1 {
            points[m / 2] = 0.0;
        }
        Self { points, weights }
    }

    /// Same rule mapped affinely to `[a, b]`; weights sum to `b - a`.
    pub fn mapped(&self, a: f64, b: f64) -> Self {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        Self {
            points: self.points.iter().map(|x| mid + half * x).collect(),
            weights: self.weights.iter().map(|w| half * w).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points
            .iter()
            .copied()
            .zip(self.weights.iter().copied())
    }
}

/// Legendre polynomial `P_n(x)` and its derivative via the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_two_point_rule() {
        let r = QuadratureRule::gauss_legendre(2);
        let x = 1.0 / 3f64.sqrt();
        assert!((r.points[0] + x).abs() < 1e-15);
        assert!((r.points[1] - x).abs() < 1e-15);
        assert!((r.weights[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn one_point_is_midpoint() {
        let r = QuadratureRule::gauss_legendre(1).mapped(0.25, 0.5);
        assert_eq!(r.points, vec![0.375]);
        assert_eq!(r.weights, vec![0.25]);
    }

    #[test]
    fn exactness_degree() {
        for m in 1..=12 {
            let r = QuadratureRule::gauss_legendre(m).mapped(0.2, 1.7);
            let sum: f64 = r.weights.iter().sum();
            assert!((sum - 1.5).abs() < 1e-14);
            for deg in 0..(2 * m) {
                let exact = (1.7f64.powi(deg as i32 + 1) - 0.2f64.powi(deg as i32 + 1))
                    / (deg as f64 + 1.0);
                let num: f64 = r.iter().map(|(x, w)| w * x.powi(deg as i32)).sum();
                assert!(
                    (num - exact).abs() < 1e-13 * exact.abs().max(1.0),
                    "m={m} deg={deg}"
                );
            }
        }
    }
}
