//! Quadrature engine and the dbar solution operators.
//!
//! Volume integrals with Cauchy-Fantappie kernels have `|zeta - z|^{1-2n}`
//! singularities at the evaluation point, so every volume rule here is
//! polar (n=1) or spherical (n=2) about `z`: the radial Jacobian `x^{2n-1}`
//! cancels the kernel blowup exactly and the integrand seen by the rule is
//! bounded. Boundary integrals pull 3-forms back through the Hopf chart of
//! the ray parametrization (see `leray`). All node sums run through the
//! deterministic reduction tree in [`crate::par`], so solver output is
//! bitwise reproducible across thread counts.

mod bmk;
mod cousin;
mod cp;
mod family;
mod leray;
mod oka_weil;

pub use bmk::{bmk_solve, BmkOptions};
pub use cousin::{
    cousin1_solve, CousinCovers, CousinOptions, CousinPartition, CousinReport, CousinSolution,
};
pub use cp::{cauchy_pompeiu, cauchy_pompeiu_report, CpOptions};
pub use family::{solve_family, FamilyData, FamilySolveOptions, FamilySolveOutcome, SolverKind};
pub use leray::{homotopy_solve, leray_reproduce, BoundaryRule, HomotopyOptions};
pub use oka_weil::{oka_weil_step, KernelSum, OkaWeilReport};

use crate::calculus::{dbar_fd, CalculusError};
use crate::domain::{DomainError, DomainFamily};
use crate::expr::{C, EvalError};
use crate::kernels::KernelError;
use crate::par;
use crate::quad::{gauss_legendre_on, HopfGrid};
use crate::seeley::SeeleyError;
use std::time::Duration;
use thiserror::Error;

/// Finite-difference step used by every residual check in this module.
pub const FD_STEP: f64 = 1e-3;

/// One component of a (0,1)-form datum, evaluable at interior and nearby
/// exterior points (solvers extend where needed).
pub type Component<'a> = &'a (dyn Fn(&[C]) -> C + Sync);

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("solver expects n = {expected}, family has n = {got}")]
    Dimension { expected: usize, got: usize },
    #[error("config: {0}")]
    Config(String),
    #[error("evaluation point is not interior (r = {value:.3e})")]
    NotInterior { value: f64 },
    #[error("evaluation point is {distance:.3e} from the boundary; stencil safety needs {required:.3e}")]
    TooCloseToBoundary { distance: f64, required: f64 },
    #[error("data form is not dbar-closed: scan found |dbar f| = {max_residual:.3e}")]
    NotDbarClosed { max_residual: f64 },
    #[error("convexity precondition failed: min real Hessian eigenvalue = {min_eig:.3e}")]
    NotConvex { min_eig: f64 },
    #[error("Leray band check failed: min |Phi| = {min_abs_phi:.3e}, min slack = {min_slack:.3e}")]
    BandCheck { min_abs_phi: f64, min_slack: f64 },
    #[error("kernel sum vanishes between levels: min |Phi| = {min_abs:.3e} on target samples")]
    KernelVanishing { min_abs: f64 },
    #[error("partition weight {weight:.3e} at ({x:.4}, {y:.4}) lies outside its cover")]
    PartitionSupport { x: f64, y: f64, weight: f64 },
    #[error("residual grew under refinement: {coarse:.3e} -> {refined:.3e}")]
    QuadratureDivergence {
        coarse: f64,
        refined: f64,
        /// The refined-run report, so callers still see diagnostics.
        report: Box<SolveReport>,
    },
    #[error("quadrature ray {ray} from the evaluation point crossed the boundary {count} times")]
    RayFromPoint { ray: usize, count: usize },
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Seeley(#[from] SeeleyError),
    #[error(transparent)]
    Calculus(#[from] CalculusError),
}

/// Outcome of one solve: values, residual and convergence bookkeeping.
#[derive(Debug, Clone)]
pub struct SolveReport {
    /// Solution values at `eval_points`.
    pub u: Vec<C>,
    pub eval_points: Vec<Vec<C>>,
    /// max |dbar u - f| over the interior check points.
    pub residual: f64,
    /// residual(refined 2N) / residual(N) when a refinement pass ran.
    pub refinement_ratio: Option<f64>,
    pub timing: Duration,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadKind {
    Volume,
    Boundary,
}

/// A node/weight rule over `D^t` or `∂D^t`.
///
/// Volume rules are desingularized about `singularity_center`: nodes lie on
/// rays from it and the weights carry the full polar/spherical Jacobian, so
/// `sum_i w_i g(node_i)` approximates `∫ g dV` for integrable `g`.
pub struct Quadrature {
    pub kind: QuadKind,
    pub nodes: Vec<Vec<C>>,
    pub weights: Vec<f64>,
    pub singularity_center: Option<Vec<C>>,
    /// Per-ray boundary distances from the singularity center (volume rules).
    pub ray_extents: Vec<f64>,
}

impl Quadrature {
    /// Polar rule about `z` for n=1: trapezoid in angle, Gauss-Legendre on
    /// each ray `[0, rho(theta)]`, weight `w x dtheta` (area element).
    pub fn volume_polar(
        family: &DomainFamily,
        t: f64,
        z: &[C],
        n_rad: usize,
        n_ang: usize,
    ) -> Result<Self, SolverError> {
        expect_n(family, 1)?;
        let angles = crate::quad::circle_angles(n_ang);
        let dth = 2.0 * std::f64::consts::PI / n_ang as f64;
        let (xs, ws) = gauss_legendre_on(0.0, 1.0, n_rad);
        let extents = par::map_indexed(angles.len(), |k| {
            let omega = vec![C::new(angles[k].cos(), angles[k].sin())];
            ray_distance_from(family, t, z, &omega, k)
        })
        .into_iter()
        .collect::<Result<Vec<f64>, _>>()?;
        let mut nodes = Vec::with_capacity(n_ang * n_rad);
        let mut weights = Vec::with_capacity(n_ang * n_rad);
        for (k, th) in angles.iter().enumerate() {
            let dir = C::new(th.cos(), th.sin());
            let rho = extents[k];
            for (xi, wi) in xs.iter().zip(&ws) {
                let x = rho * xi;
                nodes.push(vec![z[0] + x * dir]);
                weights.push(rho * wi * x * dth);
            }
        }
        Ok(Quadrature {
            kind: QuadKind::Volume,
            nodes,
            weights,
            singularity_center: Some(z.to_vec()),
            ray_extents: extents,
        })
    }

    /// Spherical rule about `z` for n=2, radial extent the boundary of
    /// `D^t`: Hopf grid in direction, Gauss-Legendre radially, weight
    /// `w x^3 dsigma` (the R^4 volume element).
    pub fn volume_spherical(
        family: &DomainFamily,
        t: f64,
        z: &[C],
        n_rad: usize,
        resolution: usize,
    ) -> Result<Self, SolverError> {
        expect_n(family, 2)?;
        let grid = HopfGrid::new(resolution, resolution);
        let extents = par::map_indexed(grid.nodes.len(), |k| {
            ray_distance_from(family, t, z, &grid.nodes[k].omega, k)
        })
        .into_iter()
        .collect::<Result<Vec<f64>, _>>()?;
        Ok(Self::spherical_from_extents(z, &grid, &extents, n_rad))
    }

    /// Spherical rule about `z` with one fixed radius on every ray (covers
    /// a ball about `z`; used when the integrand has known support).
    pub fn volume_spherical_fixed(z: &[C], radius: f64, n_rad: usize, resolution: usize) -> Self {
        let grid = HopfGrid::new(resolution, resolution);
        let extents = vec![radius; grid.nodes.len()];
        Self::spherical_from_extents(z, &grid, &extents, n_rad)
    }

    fn spherical_from_extents(z: &[C], grid: &HopfGrid, extents: &[f64], n_rad: usize) -> Self {
        let (xs, ws) = gauss_legendre_on(0.0, 1.0, n_rad);
        let mut nodes = Vec::with_capacity(grid.nodes.len() * n_rad);
        let mut weights = Vec::with_capacity(grid.nodes.len() * n_rad);
        for (k, node) in grid.nodes.iter().enumerate() {
            let rho = extents[k];
            for (xi, wi) in xs.iter().zip(&ws) {
                let x = rho * xi;
                nodes.push(vec![z[0] + x * node.omega[0], z[1] + x * node.omega[1]]);
                weights.push(rho * wi * x * x * x * node.weight);
            }
        }
        Quadrature {
            kind: QuadKind::Volume,
            nodes,
            weights,
            singularity_center: Some(z.to_vec()),
            ray_extents: extents.to_vec(),
        }
    }

    /// Boundary rule with surface-measure weights: arc length for n=1,
    /// the Gram determinant of the Hopf chart for n=2.
    pub fn boundary(
        family: &DomainFamily,
        t: f64,
        resolution: usize,
    ) -> Result<Self, SolverError> {
        match family.n {
            1 => {
                let angles = crate::quad::circle_angles(resolution);
                let dth = 2.0 * std::f64::consts::PI / resolution as f64;
                let mut nodes = Vec::with_capacity(resolution);
                let mut weights = Vec::with_capacity(resolution);
                for (k, th) in angles.iter().enumerate() {
                    let omega = vec![C::new(th.cos(), th.sin())];
                    let rho = family.boundary_distance_along(t, &omega, k)?;
                    let zeta = family.center[0] + rho * omega[0];
                    let g = family.grad_z(&[zeta], t)?;
                    // implicit differentiation of r(c + rho e^{i th}) = 0
                    let re = (g[0] * omega[0]).re;
                    let im = (g[0] * omega[0]).im;
                    let rho_p = if re.abs() > 1e-14 { rho * im / re } else { 0.0 };
                    nodes.push(vec![zeta]);
                    weights.push((rho_p * rho_p + rho * rho).sqrt() * dth);
                }
                Ok(Quadrature {
                    kind: QuadKind::Boundary,
                    nodes,
                    weights,
                    singularity_center: None,
                    ray_extents: Vec::new(),
                })
            }
            2 => {
                let rule = leray::BoundaryRule::new(family, t, resolution)?;
                let (nodes, weights) = rule.surface_measure_nodes();
                Ok(Quadrature {
                    kind: QuadKind::Boundary,
                    nodes,
                    weights,
                    singularity_center: None,
                    ray_extents: Vec::new(),
                })
            }
            n => Err(SolverError::Dimension { expected: 2, got: n }),
        }
    }

    /// Total weight; equals |D^t| (volume) or |∂D^t| (boundary) up to rule
    /// accuracy.
    pub fn measure(&self) -> f64 {
        par::pairwise_sum(&self.weights)
    }

    /// `sum_i w_i f(node_i)` over the deterministic tree.
    pub fn integrate<F: Fn(&[C]) -> C + Sync>(&self, f: F) -> C {
        par::sum_indexed(self.nodes.len(), |i| self.weights[i] * f(&self.nodes[i]))
    }
}

/// Volume (Bochner-Martinelli) kernel constant for dimension `n`.
pub(crate) fn cf_const(n: usize) -> f64 {
    crate::kernels::cf_kernel_coefficients(n, 1)
        .expect("volume kernels exist for n = 1, 2")
        .bm_constant
}

fn expect_n(family: &DomainFamily, n: usize) -> Result<(), SolverError> {
    if family.n != n {
        return Err(SolverError::Dimension {
            expected: n,
            got: family.n,
        });
    }
    Ok(())
}

/// Largest `s` with `base + s omega` inside the coordinate box.
fn box_exit(family: &DomainFamily, base: &[C], omega: &[C]) -> f64 {
    let mut s_max = f64::INFINITY;
    for j in 0..family.n {
        for (comp, b0, iv) in [
            (omega[j].re, base[j].re, family.box_bounds[2 * j]),
            (omega[j].im, base[j].im, family.box_bounds[2 * j + 1]),
        ] {
            if comp > 1e-300 {
                s_max = s_max.min((iv[1] - b0) / comp);
            } else if comp < -1e-300 {
                s_max = s_max.min((iv[0] - b0) / comp);
            }
        }
    }
    s_max
}

/// Boundary distance from an arbitrary interior base point along the unit
/// direction `omega`. Marches to the box exit, brackets the sign change and
/// bisects; errors if the ray crosses more than once (the domain is not
/// star-shaped about `base`) or never.
pub(crate) fn ray_distance_from(
    family: &DomainFamily,
    t: f64,
    base: &[C],
    omega: &[C],
    ray: usize,
) -> Result<f64, SolverError> {
    let n = family.n;
    let s_exit = box_exit(family, base, omega);
    let mut z = vec![C::new(0.0, 0.0); n];
    let r_at = |s: f64, z: &mut Vec<C>| -> Result<f64, SolverError> {
        for j in 0..n {
            z[j] = base[j] + s * omega[j];
        }
        Ok(family.eval(z, t)?)
    };
    let r0 = r_at(0.0, &mut z)?;
    if r0 >= 0.0 {
        return Err(SolverError::NotInterior { value: r0 });
    }
    const MARCH: usize = 128;
    let mut crossings = 0usize;
    let mut bracket = None;
    let mut prev = r0;
    for k in 1..=MARCH {
        let s = s_exit * k as f64 / MARCH as f64;
        let rv = r_at(s, &mut z)?;
        if prev < 0.0 && rv >= 0.0 {
            crossings += 1;
            if bracket.is_none() {
                bracket = Some((s_exit * (k - 1) as f64 / MARCH as f64, s));
            }
        } else if prev >= 0.0 && rv < 0.0 {
            crossings += 1;
        }
        prev = rv;
    }
    if crossings == 0 {
        return Err(SolverError::RayFromPoint { ray, count: 0 });
    }
    if crossings > 1 {
        return Err(SolverError::RayFromPoint {
            ray,
            count: crossings,
        });
    }
    let (mut a, mut b) = bracket.unwrap();
    for _ in 0..52 {
        let mid = 0.5 * (a + b);
        if r_at(mid, &mut z)? < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Interior points with boundary clearance at least `clearance` along their
/// rays, spread over directions. Residual stencils stay strictly inside.
pub(crate) fn interior_check_points(
    family: &DomainFamily,
    t: f64,
    count: usize,
    clearance: f64,
) -> Result<Vec<Vec<C>>, SolverError> {
    let golden = 0.618_033_988_749_894_9_f64;
    let dirs: Vec<Vec<C>> = match family.n {
        1 => (0..count)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * ((k as f64 * golden) % 1.0);
                vec![C::new(th.cos(), th.sin())]
            })
            .collect(),
        2 => {
            let m = (count as f64).cbrt().ceil() as usize + 1;
            let grid = HopfGrid::new(m.max(2), m.max(2));
            let stride = (grid.nodes.len() / count).max(1);
            grid.nodes
                .iter()
                .step_by(stride)
                .take(count)
                .map(|node| node.omega.to_vec())
                .collect()
        }
        n => return Err(SolverError::Dimension { expected: 2, got: n }),
    };
    let mut points = Vec::with_capacity(dirs.len());
    for (k, omega) in dirs.iter().enumerate() {
        let rho = family.boundary_distance_along(t, omega, k)?;
        let s = (0.55 * rho).min(rho - clearance);
        if s <= 0.0 {
            continue;
        }
        points.push(
            (0..family.n)
                .map(|j| family.center[j] + s * omega[j])
                .collect(),
        );
    }
    if points.is_empty() {
        return Err(SolverError::Config(format!(
            "no interior check points with clearance {clearance} fit inside the domain"
        )));
    }
    Ok(points)
}

/// Shared refinement bookkeeping: `ratio = refined / coarse`, divergence
/// flagged only above the residual noise floor.
pub(crate) fn judge_refinement(coarse: f64, refined: f64) -> (f64, bool) {
    let ratio = if coarse > 0.0 { refined / coarse } else { 1.0 };
    let diverged = refined > 1e-9 && ratio > 1.1;
    (ratio, diverged)
}

/// Worst `|dbar u - f|` over the check points, all components.
pub(crate) fn residual_2form<U: Fn(&[C]) -> C + Sync>(
    u: U,
    f: [Component<'_>; 2],
    checks: &[Vec<C>],
    h: f64,
) -> f64 {
    let per_point = par::map_indexed(checks.len(), |i| {
        let p = &checks[i];
        let d = dbar_fd(&u, p, h);
        let mut worst = 0.0f64;
        for k in 0..2 {
            worst = worst.max((d[k] - f[k](p)).norm());
        }
        worst
    });
    per_point.into_iter().fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainFamily;
    use approx::assert_relative_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    #[test]
    fn polar_measure_matches_disk_area() {
        let disk = DomainFamily::unit_ball(1);
        // off-center base point: rho(theta) is a nontrivial analytic curve
        let q = Quadrature::volume_polar(&disk, 0.0, &[C::new(0.3, -0.1)], 24, 64).unwrap();
        assert_relative_eq!(q.measure(), PI, max_relative = 1e-9);
    }

    #[test]
    fn spherical_measure_matches_ball_volume() {
        let ball = DomainFamily::unit_ball(2);
        let q =
            Quadrature::volume_spherical(&ball, 0.0, &[C::new(0.2, 0.1), C::new(-0.1, 0.0)], 12, 12)
                .unwrap();
        // vol(B^4) = pi^2 / 2
        assert_relative_eq!(q.measure(), PI * PI / 2.0, max_relative = 1e-6);
    }

    #[test]
    fn measure_matches_monte_carlo_oracle() {
        let fam = DomainFamily::ellipsoid();
        let q = Quadrature::volume_spherical(
            &fam,
            0.5,
            &[C::new(0.0, 0.0), C::new(0.0, 0.0)],
            10,
            10,
        )
        .unwrap();
        let mut rng = StdRng::seed_from_u64(7);
        let trials = 200_000usize;
        let mut hits = 0usize;
        let mut vol_box = 1.0;
        for iv in &fam.box_bounds {
            vol_box *= iv[1] - iv[0];
        }
        for _ in 0..trials {
            let z: Vec<C> = (0..2)
                .map(|j| {
                    C::new(
                        rng.gen_range(fam.box_bounds[2 * j][0]..fam.box_bounds[2 * j][1]),
                        rng.gen_range(fam.box_bounds[2 * j + 1][0]..fam.box_bounds[2 * j + 1][1]),
                    )
                })
                .collect();
            if fam.eval(&z, 0.5).unwrap() < 0.0 {
                hits += 1;
            }
        }
        let mc = vol_box * hits as f64 / trials as f64;
        let got = q.measure();
        assert!(
            (got - mc).abs() / mc < 3e-2,
            "quadrature {got} vs Monte Carlo {mc}"
        );
    }

    #[test]
    fn boundary_measure_circle_and_sphere() {
        let disk = DomainFamily::unit_ball(1);
        let qb = Quadrature::boundary(&disk, 0.0, 64).unwrap();
        assert_relative_eq!(qb.measure(), 2.0 * PI, max_relative = 1e-10);

        let ball = DomainFamily::unit_ball(2);
        let qs = Quadrature::boundary(&ball, 0.0, 12).unwrap();
        // |S^3| = 2 pi^2
        assert_relative_eq!(qs.measure(), 2.0 * PI * PI, max_relative = 1e-9);
    }

    #[test]
    fn ray_distance_from_interior_point() {
        let disk = DomainFamily::unit_ball(1);
        let base = [C::new(0.5, 0.0)];
        let omega = [C::new(1.0, 0.0)];
        let s = ray_distance_from(&disk, 0.0, &base, &omega, 0).unwrap();
        assert_relative_eq!(s, 0.5, epsilon = 1e-12);
        let back = [C::new(-1.0, 0.0)];
        let s2 = ray_distance_from(&disk, 0.0, &base, &back, 0).unwrap();
        assert_relative_eq!(s2, 1.5, epsilon = 1e-12);
        let err = ray_distance_from(&disk, 0.0, &[C::new(1.5, 0.0)], &omega, 0);
        assert!(matches!(err, Err(SolverError::NotInterior { .. })));
    }

    #[test]
    fn check_points_respect_clearance() {
        let disk = DomainFamily::unit_ball(1);
        let pts = interior_check_points(&disk, 0.0, 9, 0.05).unwrap();
        assert!(pts.len() >= 8);
        for p in &pts {
            assert!(p[0].norm() < 0.95);
            assert!(disk.eval(p, 0.0).unwrap() < 0.0);
        }
    }

    #[test]
    fn integrate_is_deterministic() {
        let disk = DomainFamily::unit_ball(1);
        let q = Quadrature::volume_polar(&disk, 0.0, &[C::new(0.1, 0.2)], 32, 96).unwrap();
        let f = |zeta: &[C]| zeta[0] * zeta[0].conj();
        let a = q.integrate(f);
        let b = q.integrate(f);
        assert_eq!(a, b);
        // integral of |z|^2 over the unit disk = pi/2
        assert_relative_eq!(a.re, PI / 2.0, max_relative = 1e-9);
        assert!(a.im.abs() < 1e-12);
    }
}
