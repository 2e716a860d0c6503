//! Quadrature rules: Gauss-Legendre lines, periodic trapezoid circles and
//! the Hopf parametrization of the unit 3-sphere.
//!
//! The Hopf chart `omega = (sqrt(1-u) e^{i xi1}, sqrt(u) e^{i xi2})` covers
//! S^3 with the *constant* surface density `dsigma = (1/2) du dxi1 dxi2`
//! on `[0,1] x [0,2pi)^2`, so a Gauss-Legendre rule in `u` crossed with
//! trapezoid rules in both angles integrates smooth functions spectrally.
//! Each node also carries the chart derivatives of `omega`, which boundary
//! pullbacks of 3-forms need.

use crate::expr::C;
use crate::par::pairwise_sum;
use std::f64::consts::PI;

/// Gauss-Legendre nodes (ascending) and weights on `[-1, 1]`.
///
/// Newton iteration on the three-term recurrence; nodes converge to
/// machine precision in a handful of steps from the Chebyshev guess.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..60 {
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = if n == 1 {
                1.0
            } else {
                n as f64 * (x * p1 - p0) / (x * x - 1.0)
            };
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // guesses descend from +1, so x lands in the upper half
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Gauss-Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (xs, ws) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (
        xs.iter().map(|x| mid + half * x).collect(),
        ws.iter().map(|w| w * half).collect(),
    )
}

/// Equispaced angles `2 pi k / n`; the matching trapezoid weight is
/// `2 pi / n` for every node. Spectrally accurate for periodic integrands.
pub fn circle_angles(n: usize) -> Vec<f64> {
    assert!(n >= 1);
    (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect()
}

/// One node of a Hopf rule on the unit 3-sphere.
#[derive(Debug, Clone, Copy)]
pub struct HopfNode {
    /// Point on S^3 in C^2.
    pub omega: [C; 2],
    /// Quadrature weight against surface measure (sums to 2 pi^2).
    pub weight: f64,
    /// Chart derivatives d omega / d(u, xi1, xi2), rows indexed by parameter.
    pub d_omega: [[C; 2]; 3],
}

/// Tensor rule on S^3: Gauss-Legendre in the Hopf height `u`, trapezoid in
/// both fiber angles.
#[derive(Debug, Clone)]
pub struct HopfGrid {
    pub nodes: Vec<HopfNode>,
    pub n_u: usize,
    pub n_xi: usize,
}

impl HopfGrid {
    pub fn new(n_u: usize, n_xi: usize) -> Self {
        let (us, wus) = gauss_legendre_on(0.0, 1.0, n_u);
        let angles = circle_angles(n_xi);
        let h = 2.0 * PI / n_xi as f64;
        let mut nodes = Vec::with_capacity(n_u * n_xi * n_xi);
        for (&u, &wu) in us.iter().zip(&wus) {
            let s1 = (1.0 - u).sqrt();
            let s2 = u.sqrt();
            for &xi1 in &angles {
                let e1 = C::new(xi1.cos(), xi1.sin());
                for &xi2 in &angles {
                    let e2 = C::new(xi2.cos(), xi2.sin());
                    let omega = [s1 * e1, s2 * e2];
                    // GL nodes stay interior, so the 1/sqrt factors are finite
                    let d_u = [-e1 / (2.0 * s1), e2 / (2.0 * s2)];
                    let i = C::new(0.0, 1.0);
                    nodes.push(HopfNode {
                        omega,
                        weight: 0.5 * wu * h * h,
                        d_omega: [
                            d_u,
                            [i * omega[0], C::new(0.0, 0.0)],
                            [C::new(0.0, 0.0), i * omega[1]],
                        ],
                    });
                }
            }
        }
        HopfGrid { nodes, n_u, n_xi }
    }

    /// Integrate a function of the node against surface measure.
    pub fn integrate<F: Fn(&HopfNode) -> C + Sync>(&self, f: F) -> C {
        crate::par::sum_indexed(self.nodes.len(), |i| {
            let node = &self.nodes[i];
            f(node) * node.weight
        })
    }
}

/// Weighted dot product accumulated over the deterministic tree.
pub fn weighted_sum(values: &[C], weights: &[f64]) -> C {
    assert_eq!(values.len(), weights.len());
    let terms: Vec<C> = values.iter().zip(weights).map(|(v, w)| v * *w).collect();
    pairwise_sum(&terms)
}
