//! The two cutoff profiles used by the bump construction, with hand-derived
//! derivatives up to second order.
//!
//! `chi0` is a convex ramp vanishing identically on (-inf, 1]:
//!
//! ```text
//! chi0(s) = (s-1)^3 exp(-1/(s-1))   for s > 1,   0 otherwise.
//! ```
//!
//! With u = s-1 > 0 its derivatives are
//! `chi0'  = e^{-1/u} (3u^2 + u)` and `chi0'' = e^{-1/u} (6u + 4 + 1/u)`,
//! both positive for u > 0, so the profile is smooth (flat at s = 1),
//! strictly increasing and strictly convex on s > 1. A finite-difference
//! convexity scan in the test suite is the binding check.
//!
//! `chi1` is an even plateau bump: 1 on |s| <= 1, 0 on |s| >= 2, and a
//! smooth monotone transition built from `B(x) = exp(-1/x)` in between.

use super::ProfileKind;

/// exp(-1/x) for x > 0, else 0. Smooth and flat at 0.
fn bump(x: f64) -> f64 {
    if x > 0.0 {
        (-1.0 / x).exp()
    } else {
        0.0
    }
}

fn bump_d1(x: f64) -> f64 {
    if x > 0.0 {
        bump(x) / (x * x)
    } else {
        0.0
    }
}

fn bump_d2(x: f64) -> f64 {
    if x > 0.0 {
        bump(x) * (1.0 - 2.0 * x) / (x * x * x * x)
    } else {
        0.0
    }
}

pub fn chi0(s: f64) -> f64 {
    let u = s - 1.0;
    if u <= 0.0 {
        0.0
    } else {
        u * u * u * (-1.0 / u).exp()
    }
}

pub fn chi0_d1(s: f64) -> f64 {
    let u = s - 1.0;
    if u <= 0.0 {
        0.0
    } else {
        (-1.0 / u).exp() * (3.0 * u * u + u)
    }
}

pub fn chi0_d2(s: f64) -> f64 {
    let u = s - 1.0;
    if u <= 0.0 {
        0.0
    } else {
        (-1.0 / u).exp() * (6.0 * u + 4.0 + 1.0 / u)
    }
}

/// Smooth step S: 0 for x <= 0, 1 for x >= 1.
pub fn step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let g = bump(x);
        let h = bump(1.0 - x);
        g / (g + h)
    }
}

pub fn step_d1(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        let g = bump(x);
        let h = bump(1.0 - x);
        let gp = bump_d1(x);
        let hp = -bump_d1(1.0 - x);
        let q = g + h;
        (gp * h - g * hp) / (q * q)
    }
}

fn step_d2(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        let g = bump(x);
        let h = bump(1.0 - x);
        let gp = bump_d1(x);
        let hp = -bump_d1(1.0 - x);
        let gpp = bump_d2(x);
        let hpp = bump_d2(1.0 - x);
        let q = g + h;
        // S' = P / q^2 with P = g'h - gh'; the cross terms of P' cancel.
        let p = gp * h - g * hp;
        let p_d = gpp * h - g * hpp;
        let q_d = gp + hp;
        (p_d * q * q - p * 2.0 * q * q_d) / (q * q * q * q)
    }
}

pub fn chi1(s: f64) -> f64 {
    step(2.0 - s.abs())
}

pub fn chi1_d1(s: f64) -> f64 {
    let a = s.abs();
    if a <= 1.0 || a >= 2.0 {
        0.0
    } else {
        -step_d1(2.0 - a) * s.signum()
    }
}

pub fn chi1_d2(s: f64) -> f64 {
    let a = s.abs();
    if a <= 1.0 || a >= 2.0 {
        0.0
    } else {
        step_d2(2.0 - a)
    }
}

/// Evaluate the `order`-th derivative of a profile at `s`.
pub fn eval(kind: ProfileKind, order: u8, s: f64) -> Result<f64, u8> {
    match (kind, order) {
        (ProfileKind::Chi0, 0) => Ok(chi0(s)),
        (ProfileKind::Chi0, 1) => Ok(chi0_d1(s)),
        (ProfileKind::Chi0, 2) => Ok(chi0_d2(s)),
        (ProfileKind::Chi1, 0) => Ok(chi1(s)),
        (ProfileKind::Chi1, 1) => Ok(chi1_d1(s)),
        (ProfileKind::Chi1, 2) => Ok(chi1_d2(s)),
        (_, o) => Err(o),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chi0_boundary_values() {
        assert_eq!(chi0(1.0), 0.0);
        assert_eq!(chi0(0.0), 0.0);
        assert_eq!(chi0_d1(1.0), 0.0);
        assert!(chi0(1.5) > 0.0);
    }

    #[test]
    fn chi0_derivatives_match_fd() {
        let h = 1e-6;
        for &s in &[1.1, 1.5, 2.0, 3.0, 3.9] {
            let fd1 = (chi0(s + h) - chi0(s - h)) / (2.0 * h);
            assert!((fd1 - chi0_d1(s)).abs() < 1e-7 * (1.0 + fd1.abs()));
            let fd2 = (chi0(s + h) - 2.0 * chi0(s) + chi0(s - h)) / (h * h);
            assert!((fd2 - chi0_d2(s)).abs() < 1e-3 * (1.0 + fd2.abs()));
        }
    }

    #[test]
    fn chi0_convexity_scan() {
        // second finite difference >= 0 across the whole working range
        let h = 1e-4;
        let mut s = 0.5;
        while s < 4.0 {
            let d2 = (chi0(s + h) - 2.0 * chi0(s) + chi0(s - h)) / (h * h);
            assert!(d2 >= -1e-9, "chi0 not convex at s={s}: d2={d2}");
            s += 0.01;
        }
    }

    #[test]
    fn chi1_plateau_and_support() {
        assert_eq!(chi1(0.5), 1.0);
        assert_eq!(chi1(-0.3), 1.0);
        assert_eq!(chi1(1.0), 1.0);
        assert_eq!(chi1(3.0), 0.0);
        assert_eq!(chi1(-2.5), 0.0);
        let v = chi1(1.5);
        assert!(v > 0.0 && v < 1.0);
    }

    #[test]
    fn chi1_derivatives_match_fd() {
        let h = 1e-6;
        for &s in &[1.2, 1.5, 1.8, -1.3, -1.7] {
            let fd1 = (chi1(s + h) - chi1(s - h)) / (2.0 * h);
            assert!((fd1 - chi1_d1(s)).abs() < 1e-6 * (1.0 + fd1.abs()));
            let fd2 = (chi1(s + h) - 2.0 * chi1(s) + chi1(s - h)) / (h * h);
            assert!((fd2 - chi1_d2(s)).abs() < 1e-3 * (1.0 + fd2.abs()));
        }
    }
}
