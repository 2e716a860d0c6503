//! Additive Cousin problem on a two-chart nested cover of a plane domain.
//!
//! The cover is `D_b ⊂⊂ D_a` (so the union is `D_a` and the overlap is
//! `D_b`). Nesting keeps the partition of unity honest: `chi_b` is a
//! radial bump compactly supported in `D_b`, `chi_a = 1 - chi_b`, and both
//! have bounded derivatives; transversally intersecting charts would pinch
//! the subordinate partition at the corner points and blow up the Cousin
//! datum there.
//!
//! Given `f_ab` holomorphic on the overlap, the smooth splitting
//! `g_a = chi_b f_ab`, `g_b = -chi_a f_ab` has `g_a - g_b = f_ab` and the
//! common dbar image `phi = f_ab dbar(chi_b)`, supported on the annulus
//! where `chi_b` transitions. Solving `dbar u = phi` on `D_a` by
//! Cauchy-Pompeiu gives the holomorphic pair `f_a = g_a - u`,
//! `f_b = g_b - u` with `f_a - f_b = f_ab` exactly.
//!
//! The partition ramp is a C^4 polynomial smoothstep rather than an
//! exp-flat cutoff. Splitting only needs a finitely smooth partition, the
//! datum inherits the ramp's derivative constants, and the polar
//! Cauchy-Pompeiu rule integrates the polynomial-class feature at Gauss
//! rates; exp-flat profiles concentrate curvature that fixed-order rules
//! alias, and the finite-difference holomorphy check amplifies that
//! per-evaluation noise by 1/h.

use super::cp::cauchy_pompeiu;
use super::SolverError;
use crate::calculus::dbar_fd;
use crate::domain::DomainFamily;
use crate::expr::{C, DefiningExpr};
use crate::par;
use std::time::Instant;

/// C^4 smoothstep: 0 for x <= 0, 1 for x >= 1, derivative 630 x^4 (1-x)^4.
fn smoothstep4(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        ((((70.0 * x - 315.0) * x + 540.0) * x - 420.0) * x + 126.0) * x.powi(5)
    }
}

fn smoothstep4_d1(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        0.0
    } else {
        let y = x * (1.0 - x);
        630.0 * y * y * y * y
    }
}

/// The nested pair `D_b ⊂⊂ D_a` (n = 1 charts).
#[derive(Debug, Clone)]
pub struct CousinCovers {
    pub d_a: DomainFamily,
    pub d_b: DomainFamily,
}

impl CousinCovers {
    /// Checks dimensions and compact nesting (every boundary point of
    /// `D_b` must be strictly interior to `D_a` across the t-range).
    pub fn new(d_a: DomainFamily, d_b: DomainFamily) -> Result<Self, SolverError> {
        if d_a.n != 1 || d_b.n != 1 {
            return Err(SolverError::Dimension {
                expected: 1,
                got: d_a.n.max(d_b.n),
            });
        }
        for k in 0..=4 {
            let t = 0.25 * k as f64;
            if t < d_a.t_range[0] || t > d_a.t_range[1] {
                continue;
            }
            for p in d_b.sample_boundary(t, 64)? {
                let v = d_a.eval(&p.z, t)?;
                if v >= 0.0 {
                    return Err(SolverError::Config(format!(
                        "covers are not nested: boundary point of D_b at ({:.4}, {:.4}) has r_a = {v:.3e}",
                        p.z[0].re, p.z[0].im
                    )));
                }
            }
        }
        Ok(CousinCovers { d_a, d_b })
    }

    /// Canonical test geometry: `D_a` the disk of radius 2 and `D_b` a
    /// radius-0.7 disk whose center drifts with `t`.
    pub fn nested_disks() -> Result<Self, SolverError> {
        let square = |hw: f64| vec![[-hw, hw], [-hw, hw]];
        let d_a = DomainFamily::new(
            DefiningExpr::parse("abs2(0.5*z1) - 1", 1).expect("fixed expression parses"),
            square(2.2),
            [0.0, 1.0],
            vec![C::new(0.0, 0.0)],
            1e-9,
        )?;
        let d_b = DomainFamily::new(
            DefiningExpr::parse("abs2(z1 - 1 - 0.05*t) - 0.49", 1).expect("fixed expression parses"),
            square(2.2),
            [0.0, 1.0],
            vec![C::new(1.025, 0.0)],
            1e-9,
        )?;
        Self::new(d_a, d_b)
    }

    /// Drifted center of the canonical `D_b` at parameter `t`.
    pub fn drifting_center(t: f64) -> C {
        C::new(1.0 + 0.05 * t, 0.0)
    }
}

/// Radial partition `chi_b(z) = 1 - S(kappa |z - center|^2 - 1)` with `S`
/// the C^4 smoothstep; `chi_a = 1 - chi_b`. Support radius `sqrt(2/kappa)`,
/// plateau radius `sqrt(1/kappa)`.
#[derive(Debug, Clone, Copy)]
pub struct CousinPartition {
    pub center: C,
    pub kappa: f64,
}

impl CousinPartition {
    pub fn new(center: C, kappa: f64) -> Result<Self, SolverError> {
        if !(kappa > 0.0) {
            return Err(SolverError::Config(format!(
                "partition scale must be positive, got {kappa}"
            )));
        }
        Ok(CousinPartition { center, kappa })
    }

    /// Partition for the canonical nested disks at parameter `t`:
    /// support radius 0.95 * 0.7 = 0.665, safely inside the chart.
    pub fn for_nested_disks(t: f64) -> Self {
        let support_radius = 0.95 * 0.7;
        CousinPartition {
            center: CousinCovers::drifting_center(t),
            kappa: 2.0 / (support_radius * support_radius),
        }
    }

    pub fn chi_b(&self, z: C) -> f64 {
        1.0 - smoothstep4(self.kappa * (z - self.center).norm_sqr() - 1.0)
    }

    /// `dbar(chi_b) = -S'(kappa |z-c|^2 - 1) kappa (z - c)`; exactly zero
    /// outside the transition annulus.
    pub fn dbar_chi_b(&self, z: C) -> C {
        let d = -smoothstep4_d1(self.kappa * (z - self.center).norm_sqr() - 1.0);
        if d == 0.0 {
            return C::new(0.0, 0.0);
        }
        d * self.kappa * (z - self.center)
    }
}

#[derive(Debug, Clone)]
pub struct CousinOptions {
    /// Cauchy-Pompeiu resolution for the dbar solve on `D_a`.
    pub resolution: usize,
    /// Interior samples per chart for the holomorphy and overlap checks.
    pub check_samples: usize,
    pub fd_step: f64,
    /// Grid resolution of the subordination scan over the box.
    pub support_grid: usize,
}

impl Default for CousinOptions {
    fn default() -> Self {
        CousinOptions {
            // the FD holomorphy check reads per-evaluation quadrature noise
            // divided by fd_step, so the solve needs ~1e-7 accuracy for a
            // 1e-3 holomorphy verdict
            resolution: 512,
            check_samples: 10,
            fd_step: super::FD_STEP,
            support_grid: 80,
        }
    }
}

/// The solved Cousin data: everything is evaluated on demand so the
/// holomorphic pieces exist at arbitrary points of their charts.
pub struct CousinSolution<'a> {
    covers: &'a CousinCovers,
    partition: CousinPartition,
    f_ab: &'a (dyn Fn(C) -> C + Sync),
    t: f64,
    resolution: usize,
}

impl std::fmt::Debug for CousinSolution<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CousinSolution")
            .field("partition", &self.partition)
            .field("t", &self.t)
            .field("resolution", &self.resolution)
            .finish_non_exhaustive()
    }
}

impl CousinSolution<'_> {
    pub fn chi_b(&self, z: C) -> f64 {
        self.partition.chi_b(z)
    }

    /// Cousin datum `phi = f_ab dbar(chi_b)`. The guard means `f_ab` is
    /// never evaluated outside the transition annulus, so data with poles
    /// away from the overlap stay usable.
    pub fn datum(&self, z: C) -> C {
        let d = self.partition.dbar_chi_b(z);
        if d == C::new(0.0, 0.0) {
            return d;
        }
        (self.f_ab)(z) * d
    }

    /// Solution of `dbar u = phi` on `D_a`.
    pub fn u(&self, z: C) -> Result<C, SolverError> {
        let phi = |w: C| self.datum(w);
        cauchy_pompeiu(&self.covers.d_a, self.t, &phi, z, self.resolution)
    }

    /// Holomorphic on `D_a`: `chi_b f_ab - u`.
    pub fn f_a(&self, z: C) -> Result<C, SolverError> {
        let chi = self.partition.chi_b(z);
        let smooth = if chi == 0.0 {
            C::new(0.0, 0.0)
        } else {
            chi * (self.f_ab)(z)
        };
        Ok(smooth - self.u(z)?)
    }

    /// Holomorphic on `D_b`: `-(1 - chi_b) f_ab - u`.
    pub fn f_b(&self, z: C) -> Result<C, SolverError> {
        let chi_a = 1.0 - self.partition.chi_b(z);
        let smooth = if chi_a == 0.0 {
            C::new(0.0, 0.0)
        } else {
            -chi_a * (self.f_ab)(z)
        };
        Ok(smooth - self.u(z)?)
    }
}

#[derive(Debug, Clone)]
pub struct CousinReport {
    /// max |dbar f_a| over interior samples of `D_a`.
    pub holo_a: f64,
    /// max |dbar f_b| over interior samples of `D_b`.
    pub holo_b: f64,
    /// max |f_a - f_b - f_ab| over interior samples of the overlap.
    pub overlap_mismatch: f64,
    pub checked: usize,
    pub timing: std::time::Duration,
}

/// Solve the additive Cousin problem for `f_ab` on the nested cover.
pub fn cousin1_solve<'a>(
    covers: &'a CousinCovers,
    partition: CousinPartition,
    t: f64,
    f_ab: &'a (dyn Fn(C) -> C + Sync),
    opts: &CousinOptions,
) -> Result<(CousinSolution<'a>, CousinReport), SolverError> {
    let start = Instant::now();
    check_subordination(&covers.d_b, &partition, t, opts.support_grid)?;

    let solution = CousinSolution {
        covers,
        partition,
        f_ab,
        t,
        resolution: opts.resolution,
    };

    let clearance = (10.0 * opts.fd_step).max(0.02);
    let a_pts = super::interior_check_points(&covers.d_a, t, opts.check_samples, clearance)?;
    let b_pts = super::interior_check_points(&covers.d_b, t, opts.check_samples, clearance)?;

    let holo_a = par::map_indexed(a_pts.len(), |i| {
        let fa = |w: &[C]| solution.f_a(w[0]).expect("interior stencil");
        dbar_fd(&fa, &a_pts[i], opts.fd_step)[0].norm()
    })
    .into_iter()
    .fold(0.0, f64::max);

    let holo_b = par::map_indexed(b_pts.len(), |i| {
        let fb = |w: &[C]| solution.f_b(w[0]).expect("interior stencil");
        dbar_fd(&fb, &b_pts[i], opts.fd_step)[0].norm()
    })
    .into_iter()
    .fold(0.0, f64::max);

    let overlap_mismatch = par::map_indexed(b_pts.len(), |i| {
        let z = b_pts[i][0];
        let fa = solution.f_a(z).expect("interior point");
        let fb = solution.f_b(z).expect("interior point");
        (fa - fb - (f_ab)(z)).norm()
    })
    .into_iter()
    .fold(0.0, f64::max);

    let report = CousinReport {
        holo_a,
        holo_b,
        overlap_mismatch,
        checked: a_pts.len() + 2 * b_pts.len(),
        timing: start.elapsed(),
    };
    Ok((solution, report))
}

/// Scan the box: every point with `chi_b > 0` must lie inside `D_b`.
fn check_subordination(
    d_b: &DomainFamily,
    partition: &CousinPartition,
    t: f64,
    grid: usize,
) -> Result<(), SolverError> {
    let bx = d_b.box_bounds[0];
    let by = d_b.box_bounds[1];
    for ix in 0..grid {
        for iy in 0..grid {
            let x = bx[0] + (bx[1] - bx[0]) * ix as f64 / (grid - 1) as f64;
            let y = by[0] + (by[1] - by[0]) * iy as f64 / (grid - 1) as f64;
            let z = C::new(x, y);
            let w = partition.chi_b(z);
            if w > 1e-12 && d_b.eval(&[z], t)? >= 0.0 {
                return Err(SolverError::PartitionSupport { x, y, weight: w });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (CousinCovers, CousinPartition) {
        let covers = CousinCovers::nested_disks().unwrap();
        let partition = CousinPartition::for_nested_disks(0.0);
        (covers, partition)
    }

    fn options() -> CousinOptions {
        CousinOptions {
            check_samples: 8,
            ..CousinOptions::default()
        }
    }

    #[test]
    fn zero_datum_gives_zero_solution() {
        let (covers, partition) = setup();
        let zero = |_z: C| C::new(0.0, 0.0);
        let (sol, report) = cousin1_solve(&covers, partition, 0.0, &zero, &options()).unwrap();
        assert_eq!(sol.u(C::new(0.3, 0.2)).unwrap(), C::new(0.0, 0.0));
        assert!(report.holo_a < 1e-10);
        assert!(report.overlap_mismatch < 1e-14);
    }

    #[test]
    fn constant_datum_splits_holomorphically() {
        let (covers, partition) = setup();
        let one = |_z: C| C::new(1.0, 0.0);
        let (_sol, report) = cousin1_solve(&covers, partition, 0.0, &one, &options()).unwrap();
        assert!(report.holo_a < 1e-3, "dbar f_a = {}", report.holo_a);
        assert!(report.holo_b < 1e-3, "dbar f_b = {}", report.holo_b);
        assert!(
            report.overlap_mismatch < 1e-6,
            "overlap mismatch {}",
            report.overlap_mismatch
        );
    }

    #[test]
    fn datum_with_pole_outside_overlap() {
        let (covers, partition) = setup();
        let pole = CousinCovers::drifting_center(0.0) + C::new(0.8, 0.0);
        let f_ab = move |z: C| C::new(1.0, 0.0) / (z - pole);
        let (sol, report) = cousin1_solve(&covers, partition, 0.0, &f_ab, &options()).unwrap();
        // the guard keeps the pole point evaluable (dbar chi_b = 0 there)
        assert_eq!(sol.datum(pole), C::new(0.0, 0.0));
        assert!(report.holo_a < 1e-3, "dbar f_a = {}", report.holo_a);
        assert!(report.holo_b < 1e-3, "dbar f_b = {}", report.holo_b);
        assert!(report.overlap_mismatch < 1e-6);
    }

    #[test]
    fn drifted_chart_still_solves() {
        let covers = CousinCovers::nested_disks().unwrap();
        let partition = CousinPartition::for_nested_disks(1.0);
        let one = |_z: C| C::new(1.0, 0.0);
        let (_sol, report) = cousin1_solve(&covers, partition, 1.0, &one, &options()).unwrap();
        assert!(report.holo_a < 1e-3);
        assert!(report.overlap_mismatch < 1e-6);
    }

    #[test]
    fn oversized_partition_is_rejected() {
        let (covers, _) = setup();
        // support radius sqrt(2/3) = 0.816 > 0.7 leaks outside D_b
        let partition =
            CousinPartition::new(CousinCovers::drifting_center(0.0), 3.0).unwrap();
        let one = |_z: C| C::new(1.0, 0.0);
        let err = cousin1_solve(&covers, partition, 0.0, &one, &options()).unwrap_err();
        assert!(matches!(err, SolverError::PartitionSupport { .. }));
    }

    #[test]
    fn non_nested_covers_are_rejected() {
        let square = |hw: f64| vec![[-hw, hw], [-hw, hw]];
        let d_a = DomainFamily::unit_ball(1);
        let d_b = DomainFamily::new(
            DefiningExpr::parse("abs2(z1 - 0.8) - 0.25", 1).unwrap(),
            square(2.0),
            [0.0, 1.0],
            vec![C::new(0.8, 0.0)],
            1e-9,
        )
        .unwrap();
        let err = CousinCovers::new(d_a, d_b).unwrap_err();
        assert!(matches!(err, SolverError::Config(_)));
    }
}

