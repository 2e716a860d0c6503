//! Cauchy-Pompeiu volume operator for n = 1:
//!
//! ```text
//! u(z) = -(1/pi) ∬_{D^t} f(zeta) / (zeta - z) dA(zeta),   dbar u = f.
//! ```
//!
//! In polar coordinates about `z` the kernel is `e^{-i theta} / x` and the
//! area element contributes `x`, so the quadrature integrand is bounded;
//! for smooth star-shaped boundaries the rule converges spectrally in the
//! angle and at Gauss rate radially.

use super::{
    cf_const, interior_check_points, judge_refinement, Quadrature, SolveReport, SolverError,
    FD_STEP,
};
use crate::calculus::dbar_fd;
use crate::domain::DomainFamily;
use crate::expr::C;
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct CpOptions {
    /// Angular and radial node count (the rule is resolution x resolution).
    pub resolution: usize,
    pub fd_step: f64,
    pub check_points: usize,
    pub check_refinement: bool,
}

impl Default for CpOptions {
    fn default() -> Self {
        CpOptions {
            resolution: 96,
            fd_step: FD_STEP,
            check_points: 12,
            check_refinement: false,
        }
    }
}

/// Solve `dbar u = f` at one point. Errors if `z` is not interior or sits
/// within `2 * FD_STEP` of the boundary (residual stencils around `z` must
/// stay inside).
pub fn cauchy_pompeiu<F: Fn(C) -> C + Sync>(
    family: &DomainFamily,
    t: f64,
    f: &F,
    z: C,
    resolution: usize,
) -> Result<C, SolverError> {
    let quad = cp_rule(family, t, z, resolution)?;
    Ok(cp_apply(&quad, f, z))
}

fn cp_rule(
    family: &DomainFamily,
    t: f64,
    z: C,
    resolution: usize,
) -> Result<Quadrature, SolverError> {
    super::expect_n(family, 1)?;
    let quad = Quadrature::volume_polar(family, t, &[z], resolution, resolution)?;
    let clearance = quad
        .ray_extents
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if clearance < 2.0 * FD_STEP {
        return Err(SolverError::TooCloseToBoundary {
            distance: clearance,
            required: 2.0 * FD_STEP,
        });
    }
    Ok(quad)
}

fn cp_apply<F: Fn(C) -> C + Sync>(quad: &Quadrature, f: &F, z: C) -> C {
    let c = cf_const(1);
    quad.integrate(|zeta| c * f(zeta[0]) / (zeta[0] - z))
}

/// Solve at several points and attach residual/refinement diagnostics.
pub fn cauchy_pompeiu_report<F: Fn(C) -> C + Sync>(
    family: &DomainFamily,
    t: f64,
    f: &F,
    eval_points: &[C],
    opts: &CpOptions,
) -> Result<SolveReport, SolverError> {
    let start = Instant::now();
    let mut diagnostics = Vec::new();
    let u: Vec<C> = eval_points
        .iter()
        .map(|&z| cauchy_pompeiu(family, t, f, z, opts.resolution))
        .collect::<Result<_, _>>()?;

    let clearance = (10.0 * opts.fd_step).max(0.02);
    let checks = interior_check_points(family, t, opts.check_points, clearance)?;
    let residual = cp_residual(family, t, f, &checks, opts.resolution, opts.fd_step)?;
    diagnostics.push(format!(
        "residual {:.3e} over {} check points, resolution {}",
        residual,
        checks.len(),
        opts.resolution
    ));

    let mut refinement_ratio = None;
    if opts.check_refinement {
        let refined = cp_residual(family, t, f, &checks, 2 * opts.resolution, opts.fd_step)?;
        let (ratio, diverged) = judge_refinement(residual, refined);
        refinement_ratio = Some(ratio);
        diagnostics.push(format!(
            "refined residual {refined:.3e} at resolution {}, ratio {ratio:.3}",
            2 * opts.resolution
        ));
        if diverged {
            return Err(SolverError::QuadratureDivergence {
                coarse: residual,
                refined,
                report: Box::new(SolveReport {
                    u,
                    eval_points: eval_points.iter().map(|&z| vec![z]).collect(),
                    residual: refined,
                    refinement_ratio,
                    timing: start.elapsed(),
                    diagnostics,
                }),
            });
        }
    }

    Ok(SolveReport {
        u,
        eval_points: eval_points.iter().map(|&z| vec![z]).collect(),
        residual,
        refinement_ratio,
        timing: start.elapsed(),
        diagnostics,
    })
}

fn cp_residual<F: Fn(C) -> C + Sync>(
    family: &DomainFamily,
    t: f64,
    f: &F,
    checks: &[Vec<C>],
    resolution: usize,
    h: f64,
) -> Result<f64, SolverError> {
    let mut worst = 0.0f64;
    for p in checks {
        // clearance keeps every stencil point interior, so the inner solve
        // cannot hit the boundary guard
        let u_at = |w: &[C]| {
            cauchy_pompeiu(family, t, f, w[0], resolution)
                .expect("stencil point inside clearance region")
        };
        let d = dbar_fd(u_at, p, h);
        worst = worst.max((d[0] - f(p[0])).norm());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainFamily;
    use crate::expr::DefiningExpr;

    fn disk() -> DomainFamily {
        DomainFamily::unit_ball(1)
    }

    /// Star-shaped wiggly domain: quadrature error is genuinely nonzero, so
    /// refinement ratios are meaningful (the disk rules are exact for
    /// polynomial data and saturate at roundoff).
    fn wiggly() -> DomainFamily {
        let r = DefiningExpr::parse("abs2(z1) - 1 - 0.2*re(z1*z1*z1)", 1).unwrap();
        DomainFamily::new(
            r,
            vec![[-1.6, 1.6], [-1.6, 1.6]],
            [0.0, 1.0],
            vec![C::new(0.0, 0.0)],
            1e-9,
        )
        .unwrap()
    }

    #[test]
    fn disk_constant_data_reproduces_zbar() {
        let fam = disk();
        let f = |_zeta: C| C::new(1.0, 0.0);
        for &(x, y) in &[(0.0, 0.0), (0.3, -0.2), (-0.55, 0.1), (0.0, 0.7)] {
            let z = C::new(x, y);
            let u = cauchy_pompeiu(&fam, 0.0, &f, z, 128).unwrap();
            assert!(
                (u - z.conj()).norm() < 1e-4,
                "u({z}) = {u}, want {}",
                z.conj()
            );
        }
    }

    #[test]
    fn zero_data_gives_zero() {
        let fam = disk();
        let f = |_zeta: C| C::new(0.0, 0.0);
        let u = cauchy_pompeiu(&fam, 0.0, &f, C::new(0.2, 0.1), 64).unwrap();
        assert_eq!(u, C::new(0.0, 0.0));
    }

    #[test]
    fn zbar_data_residual_and_holomorphy() {
        let fam = disk();
        let f = |zeta: C| zeta.conj();
        let opts = CpOptions {
            resolution: 96,
            check_points: 10,
            ..CpOptions::default()
        };
        let pts = [C::new(0.25, 0.1), C::new(-0.3, 0.4)];
        let report = cauchy_pompeiu_report(&fam, 0.0, &f, &pts, &opts).unwrap();
        assert!(report.residual < 1e-3, "residual {}", report.residual);

        // u - zbar^2/2 should be holomorphic: discrete dbar below 1e-3
        let hol = |w: &[C]| {
            let u = cauchy_pompeiu(&fam, 0.0, &f, w[0], 96).unwrap();
            u - 0.5 * w[0].conj() * w[0].conj()
        };
        for p in &pts {
            let d = dbar_fd(hol, &[*p], FD_STEP);
            assert!(d[0].norm() < 1e-3, "dbar residual {}", d[0].norm());
        }
    }

    #[test]
    fn linearity_to_roundoff() {
        let fam = disk();
        let f = |zeta: C| zeta.conj() * zeta;
        let g = |zeta: C| C::new(zeta.re.sin(), 0.0);
        let (a, b) = (C::new(2.0, -0.5), C::new(0.3, 1.1));
        let combo = |zeta: C| a * f(zeta) + b * g(zeta);
        let z = C::new(0.1, -0.35);
        let lhs = cauchy_pompeiu(&fam, 0.0, &combo, z, 64).unwrap();
        let rhs = a * cauchy_pompeiu(&fam, 0.0, &f, z, 64).unwrap()
            + b * cauchy_pompeiu(&fam, 0.0, &g, z, 64).unwrap();
        assert!((lhs - rhs).norm() < 1e-12, "linearity gap {}", (lhs - rhs).norm());
    }

    #[test]
    fn boundary_proximity_is_rejected() {
        let fam = disk();
        let f = |_zeta: C| C::new(1.0, 0.0);
        let err = cauchy_pompeiu(&fam, 0.0, &f, C::new(0.9995, 0.0), 32);
        assert!(matches!(
            err,
            Err(SolverError::TooCloseToBoundary { .. })
        ));
        let err2 = cauchy_pompeiu(&fam, 0.0, &f, C::new(1.2, 0.0), 32);
        assert!(matches!(err2, Err(SolverError::NotInterior { .. })));
    }

    #[test]
    fn refinement_converges_on_wiggly_domain() {
        let fam = wiggly();
        let f = |zeta: C| C::new((zeta.re + 0.3 * zeta.im).exp(), zeta.im);
        let opts = CpOptions {
            resolution: 12,
            check_points: 6,
            check_refinement: true,
            ..CpOptions::default()
        };
        let report =
            cauchy_pompeiu_report(&fam, 0.5, &f, &[C::new(0.1, 0.05)], &opts).unwrap();
        let ratio = report.refinement_ratio.unwrap();
        assert!(
            ratio < 0.7,
            "expected contraction under refinement, ratio {ratio} (residual {})",
            report.residual
        );
    }

    #[test]
    fn report_carries_timing_and_diagnostics() {
        let fam = disk();
        let f = |zeta: C| zeta.conj();
        let report = cauchy_pompeiu_report(
            &fam,
            0.0,
            &f,
            &[C::new(0.0, 0.0)],
            &CpOptions {
                resolution: 32,
                check_points: 4,
                ..CpOptions::default()
            },
        )
        .unwrap();
        assert!(!report.diagnostics.is_empty());
        assert!(report.timing.as_nanos() > 0);
        assert_eq!(report.u.len(), 1);
    }
}
