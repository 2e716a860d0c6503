//! Boundary kernels: the Leray reproducing formula and the Koppelman
//! homotopy solver for n = 2.
//!
//! Boundary integrals are pullbacks of 3-forms through the ray chart
//! `zeta(p) = c + rho(omega(p)) omega(p)` over the Hopf parameters
//! `p = (u, xi1, xi2)`. Differentiating `r(zeta(p)) = 0` gives
//!
//! ```text
//! d rho / d p_a = -rho Re(sum_j r_j d omega_j/d p_a) / Re(sum_j r_j omega_j)
//! ```
//!
//! and the pullback of `dzeta1 ^ dzeta2 ^ dzbar_k` is the 3x3 determinant
//! `J_k = det d(zeta1, zeta2, conj zeta_k) / d p`. A finite-difference test
//! against the chart pins these formulas.
//!
//! Orientation: on the unit sphere the chart gives `J_1 = omega_2`,
//! `J_2 = -omega_1`, so with the frozen coefficient convention
//! `A_1 = zbar_2, A_2 = -zbar_1` the reproducing integrand for `h = 1`,
//! `z = 0` is the constant `c_0 * 1` against raw chart volume `4 pi^2`.
//! Since `c_0 = -1/(4 pi^2)`, the chart carries orientation `-1`; the
//! constants-reproduction test freezes this choice.

use super::{
    cf_const, interior_check_points, judge_refinement, ray_distance_from, Component, SolveReport,
    SolverError, FD_STEP,
};
use crate::calculus::{min_levi_eigenvalue, WirtingerTable};
use crate::domain::{DomainFamily, RadialTable};
use crate::expr::C;
use crate::kernels::{cf_kernel_coefficients, sample_band_pairs, LerayMap};
use crate::par;
use crate::quad::{circle_angles, gauss_legendre_on, HopfGrid};
use std::time::Instant;

/// Orientation of the Hopf chart `(u, xi1, xi2)` against the outward
/// orientation of `∂D`; see the module docs.
pub(crate) const ORIENT_S3: f64 = -1.0;

struct ChartNode {
    zeta: [C; 2],
    /// Gradient section w = r_zeta(zeta) (z-independent for convex maps).
    grad: [C; 2],
    /// Levi matrix entries `d w_j / d zbar_k`.
    levi: [[C; 2]; 2],
    /// Pullback determinants for `dzeta1 ^ dzeta2 ^ dzbar_k`, k = 0, 1.
    jdet: [C; 2],
    /// Chart weight `du dxi1 dxi2` (no surface density).
    raw_weight: f64,
    /// Surface-measure weight `sqrt(det Gram) du dxi1 dxi2`.
    gram_weight: f64,
}

/// Precomputed boundary chart of `∂D^t` for n = 2. Shared by the
/// reproducing formula, the homotopy boundary term and Oka-Weil sums.
pub struct BoundaryRule {
    nodes: Vec<ChartNode>,
    t: f64,
}

fn det3(m: [[C; 3]; 3]) -> C {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

impl BoundaryRule {
    /// Chart with `resolution^3` nodes, root-refined boundary distances.
    pub fn new(family: &DomainFamily, t: f64, resolution: usize) -> Result<Self, SolverError> {
        super::expect_n(family, 2)?;
        let grid = HopfGrid::new(resolution, resolution);
        let table = RadialTable::new(family, t, resolution.clamp(8, 24))?;
        let wt = WirtingerTable::new(&family.r);
        let nodes = par::map_indexed(grid.nodes.len(), |i| -> Result<ChartNode, SolverError> {
            let hopf = &grid.nodes[i];
            let omega = hopf.omega;
            let rho = table.rho(family, &omega)?;
            let zeta = [
                family.center[0] + rho * omega[0],
                family.center[1] + rho * omega[1],
            ];
            let ld = wt.at(&zeta, t)?;
            let g = [ld.grad_z[0], ld.grad_z[1]];
            let den = (g[0] * omega[0] + g[1] * omega[1]).re;
            if den.abs() < 1e-10 {
                return Err(SolverError::Config(format!(
                    "boundary ray {i} is tangent to the boundary (transversality {den:.3e})"
                )));
            }
            // d zeta / d p_a for the three chart parameters
            let mut dz = [[C::new(0.0, 0.0); 3]; 2];
            for a in 0..3 {
                let dw = hopf.d_omega[a];
                let drho = -rho * (g[0] * dw[0] + g[1] * dw[1]).re / den;
                dz[0][a] = drho * omega[0] + rho * dw[0];
                dz[1][a] = drho * omega[1] + rho * dw[1];
            }
            let jdet = [
                det3([dz[0], dz[1], [dz[0][0].conj(), dz[0][1].conj(), dz[0][2].conj()]]),
                det3([dz[0], dz[1], [dz[1][0].conj(), dz[1][1].conj(), dz[1][2].conj()]]),
            ];
            let mut gram = [[0.0f64; 3]; 3];
            for a in 0..3 {
                for b in 0..3 {
                    gram[a][b] =
                        (dz[0][a] * dz[0][b].conj() + dz[1][a] * dz[1][b].conj()).re;
                }
            }
            let det_g = gram[0][0] * (gram[1][1] * gram[2][2] - gram[1][2] * gram[2][1])
                - gram[0][1] * (gram[1][0] * gram[2][2] - gram[1][2] * gram[2][0])
                + gram[0][2] * (gram[1][0] * gram[2][1] - gram[1][1] * gram[2][0]);
            let raw_weight = 2.0 * hopf.weight;
            Ok(ChartNode {
                zeta,
                grad: g,
                levi: [
                    [ld.levi[(0, 0)], ld.levi[(0, 1)]],
                    [ld.levi[(1, 0)], ld.levi[(1, 1)]],
                ],
                jdet,
                raw_weight,
                gram_weight: det_g.max(0.0).sqrt() * raw_weight,
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
        Ok(BoundaryRule { nodes, t })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Nodes and surface-measure weights (for [`super::Quadrature`]).
    pub(crate) fn surface_measure_nodes(&self) -> (Vec<Vec<C>>, Vec<f64>) {
        (
            self.nodes.iter().map(|nd| nd.zeta.to_vec()).collect(),
            self.nodes.iter().map(|nd| nd.gram_weight).collect(),
        )
    }

    /// Leray reproducing integral `∫_{∂D} h Ω¹_{0,0}` via the gradient
    /// section.
    pub fn reproduce<H: Fn(&[C]) -> C + Sync>(&self, h: &H, z: &[C]) -> C {
        let cf = cf_kernel_coefficients(2, 1).expect("n=2 kernels");
        ORIENT_S3
            * par::sum_indexed(self.nodes.len(), |i| {
                let nd = &self.nodes[i];
                let w = nd.grad;
                let phi = w[0] * (nd.zeta[0] - z[0]) + w[1] * (nd.zeta[1] - z[1]);
                let phi2 = phi * phi;
                // A_k = w_2 dw_1/dzbar_k - w_1 dw_2/dzbar_k, kernels convention
                let a0 = w[1] * nd.levi[0][0] - w[0] * nd.levi[1][0];
                let a1 = w[1] * nd.levi[0][1] - w[0] * nd.levi[1][1];
                let pair = a0 * nd.jdet[0] + a1 * nd.jdet[1];
                (cf.boundary_constant * nd.raw_weight) * h(&nd.zeta) * pair / phi2
            })
    }

    /// Freeze the reproducing integral into per-node kernel terms
    /// `(zeta_m, w_m, amplitude_m)` with
    /// `h(z) ~ sum_m amplitude_m / Phi_m(z)^2`; every z-dependence sits in
    /// `Phi_m(z) = w_m . (zeta_m - z)`, which is holomorphic in `z`.
    pub(crate) fn kernel_amplitudes<H: Fn(&[C]) -> C + Sync + ?Sized>(
        &self,
        h: &H,
    ) -> Vec<([C; 2], [C; 2], C)> {
        let cf = cf_kernel_coefficients(2, 1).expect("n=2 kernels");
        par::map_indexed(self.nodes.len(), |i| {
            let nd = &self.nodes[i];
            let w = nd.grad;
            let a0 = w[1] * nd.levi[0][0] - w[0] * nd.levi[1][0];
            let a1 = w[1] * nd.levi[0][1] - w[0] * nd.levi[1][1];
            let amp = (ORIENT_S3 * cf.boundary_constant * nd.raw_weight)
                * h(&nd.zeta)
                * (a0 * nd.jdet[0] + a1 * nd.jdet[1]);
            (nd.zeta, w, amp)
        })
    }

    /// Transition boundary term `∫_{∂D} Ω^{01}_{0,0} ∧ f` of the homotopy
    /// formula. `fvals` are the cached values of `(f_1, f_2)` at the nodes.
    fn transition_term(&self, fvals: &[[C; 2]], z: &[C]) -> C {
        let cf = cf_kernel_coefficients(2, 1).expect("n=2 kernels");
        ORIENT_S3
            * par::sum_indexed(self.nodes.len(), |i| {
                let nd = &self.nodes[i];
                let d0 = nd.zeta[0] - z[0];
                let d1 = nd.zeta[1] - z[1];
                let w0 = [d0.conj(), d1.conj()];
                let phi0 = C::new(d0.norm_sqr() + d1.norm_sqr(), 0.0);
                let phi1 = nd.grad[0] * d0 + nd.grad[1] * d1;
                let det = w0[0] * nd.grad[1] - w0[1] * nd.grad[0];
                let pair = fvals[i][0] * nd.jdet[0] + fvals[i][1] * nd.jdet[1];
                (cf.boundary_constant * nd.raw_weight) * det * pair / (phi0 * phi1)
            })
    }
}

/// Evaluate the Leray reproducing integral of a holomorphic `h` at `z`.
/// n = 1 uses the Cauchy integral on the parametrized boundary curve;
/// n = 2 pulls the kernel back through a fresh boundary chart.
pub fn leray_reproduce<H: Fn(&[C]) -> C + Sync>(
    family: &DomainFamily,
    t: f64,
    h: &H,
    z: &[C],
    resolution: usize,
) -> Result<C, SolverError> {
    match family.n {
        1 => {
            let cf = cf_kernel_coefficients(1, 1)?;
            let angles = circle_angles(resolution);
            let dth = 2.0 * std::f64::consts::PI / resolution as f64;
            let terms = par::map_indexed(angles.len(), |k| -> Result<C, SolverError> {
                let th = angles[k];
                let omega = [C::new(th.cos(), th.sin())];
                let rho = family.boundary_distance_along(t, &omega, k)?;
                let zeta = family.center[0] + rho * omega[0];
                let g = family.grad_z(&[zeta], t)?;
                let re = (g[0] * omega[0]).re;
                let im = (g[0] * omega[0]).im;
                let rho_p = if re.abs() > 1e-14 { rho * im / re } else { 0.0 };
                let dzeta_dth = (C::new(rho_p, rho)) * omega[0];
                Ok(h(&[zeta]) * cf.cauchy(zeta, z[0]) * dzeta_dth * dth)
            })
            .into_iter()
            .collect::<Result<Vec<C>, _>>()?;
            Ok(par::pairwise_sum(&terms))
        }
        2 => {
            let rule = BoundaryRule::new(family, t, resolution)?;
            Ok(rule.reproduce(h, z))
        }
        n => Err(SolverError::Dimension { expected: 2, got: n }),
    }
}

#[derive(Debug, Clone)]
pub struct HomotopyOptions {
    /// Hopf resolution and radial order of the volume rule.
    pub resolution: usize,
    /// Boundary chart resolution; 0 means `resolution`.
    pub boundary_resolution: usize,
    pub fd_step: f64,
    pub check_points: usize,
    pub check_refinement: bool,
    /// Band-check sampling (kernels module) before any quadrature runs.
    pub band_pairs: usize,
    pub band_seed: u64,
    pub band_distance: f64,
}

impl Default for HomotopyOptions {
    fn default() -> Self {
        HomotopyOptions {
            resolution: 12,
            boundary_resolution: 0,
            fd_step: FD_STEP,
            check_points: 20,
            check_refinement: false,
            band_pairs: 150,
            band_seed: 0x4c45_5241,
            band_distance: 0.15,
        }
    }
}

/// Koppelman homotopy solution `u = T_0 f` for a dbar-closed (0,1)-form on
/// a strictly pseudoconvex n = 2 family:
///
/// ```text
/// T_0 f = ∫_D Ω⁰_{0,0} ∧ f  -  ∫_{∂D} Ω^{01}_{0,0} ∧ f
/// ```
///
/// with the Bochner-Martinelli section inside and the gradient (convex
/// Leray) section on the boundary.
pub fn homotopy_solve(
    family: &DomainFamily,
    t: f64,
    f: [Component<'_>; 2],
    eval_points: &[Vec<C>],
    opts: &HomotopyOptions,
) -> Result<SolveReport, SolverError> {
    super::expect_n(family, 2)?;
    let start = Instant::now();
    let mut diagnostics = Vec::new();

    let boundary_samples: Vec<Vec<C>> = family
        .sample_boundary(t, 6)?
        .into_iter()
        .map(|p| p.z)
        .collect();
    let lambda0 = min_levi_eigenvalue(family, &boundary_samples, t)?;
    let lmap = LerayMap::convex(family, t, lambda0.max(0.0));
    let pairs = sample_band_pairs(family, t, opts.band_pairs, opts.band_distance, opts.band_seed)?;
    let band = lmap.check_band(&pairs)?;
    if !band.pass {
        return Err(SolverError::BandCheck {
            min_abs_phi: band.min_abs_phi,
            min_slack: band.min_slack,
        });
    }
    diagnostics.push(format!(
        "band check: {} pairs, min |Phi| {:.3e}, min slack {:.3e}, lambda0 {:.3e}",
        band.pairs_checked, band.min_abs_phi, band.min_slack, lambda0
    ));

    let bres = if opts.boundary_resolution == 0 {
        opts.resolution
    } else {
        opts.boundary_resolution
    };
    let run = |res: usize, bres: usize| -> Result<(Vec<C>, f64), SolverError> {
        let rule = BoundaryRule::new(family, t, bres)?;
        let fvals: Vec<[C; 2]> = par::map_indexed(rule.nodes.len(), |i| {
            let zeta: &[C] = &rule.nodes[i].zeta;
            [f[0](zeta), f[1](zeta)]
        });
        let grid = HopfGrid::new(res, res);
        let u_at = |z: &[C]| -> Result<C, SolverError> {
            let vol = bm_volume_term(family, t, f, z, res, &grid)?;
            Ok(vol - rule.transition_term(&fvals, z))
        };
        let u: Vec<C> = eval_points
            .iter()
            .map(|z| u_at(z))
            .collect::<Result<_, _>>()?;
        let clearance = (10.0 * opts.fd_step).max(0.05);
        let checks = interior_check_points(family, t, opts.check_points, clearance)?;
        let residual = super::residual_2form(
            |z: &[C]| u_at(z).expect("stencil point inside clearance region"),
            f,
            &checks,
            opts.fd_step,
        );
        Ok((u, residual))
    };

    let (u, residual) = run(opts.resolution, bres)?;
    diagnostics.push(format!(
        "residual {:.3e} at resolution {} (boundary {})",
        residual, opts.resolution, bres
    ));
    let mut refinement_ratio = None;
    if opts.check_refinement {
        let (_, refined) = run(2 * opts.resolution, 2 * bres)?;
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
                    eval_points: eval_points.to_vec(),
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
        eval_points: eval_points.to_vec(),
        residual,
        refinement_ratio,
        timing: start.elapsed(),
        diagnostics,
    })
}

/// Bochner-Martinelli volume term, spherical about `z` out to `∂D`. The
/// radial Jacobian `x^3` cancels the kernel's `|zeta-z|^{-3}` exactly:
/// the summed integrand is `const * sum_j conj(omega_j) f_j(z + x omega)`.
pub(crate) fn bm_volume_term(
    family: &DomainFamily,
    t: f64,
    f: [Component<'_>; 2],
    z: &[C],
    n_rad: usize,
    grid: &HopfGrid,
) -> Result<C, SolverError> {
    let extents = par::map_indexed(grid.nodes.len(), |k| {
        ray_distance_from(family, t, z, &grid.nodes[k].omega, k)
    })
    .into_iter()
    .collect::<Result<Vec<f64>, _>>()?;
    let (xs, ws) = gauss_legendre_on(0.0, 1.0, n_rad);
    let c = cf_const(2);
    Ok(par::sum_indexed(grid.nodes.len(), |k| {
        let nd = &grid.nodes[k];
        let rho = extents[k];
        let mut acc = C::new(0.0, 0.0);
        for (xi, wi) in xs.iter().zip(&ws) {
            let x = rho * xi;
            let zeta = [z[0] + x * nd.omega[0], z[1] + x * nd.omega[1]];
            let val = nd.omega[0].conj() * f[0](&zeta) + nd.omega[1].conj() * f[1](&zeta);
            acc += (rho * wi * nd.weight) * val;
        }
        c * acc
    }))
}
