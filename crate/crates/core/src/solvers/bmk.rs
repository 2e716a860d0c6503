//! Bochner-Martinelli-Koppelman solver for n = 2: extend the data off the
//! domain, integrate the volume kernel over the extension's support, and
//! correct the closedness defect with the transition kernel over the
//! collar shell.
//!
//! ```text
//! u(z) = ∫ Ω⁰(ζ,z) ∧ Ef  +  ∫_shell Ω^{01}(ζ,z) ∧ dbar(Ef)
//! ```
//!
//! `Ef` is dbar-closed inside `D` and zero beyond the collar, so
//! `dbar(Ef)` lives on the shell `{-W < s < 0}` only, where the gradient
//! section's `Phi¹(zeta, z)` is z-holomorphic and bounded away from zero
//! for convex domains; the correction term is therefore holomorphic in `z`
//! and the whole sum still satisfies `dbar u = f`.
//!
//! The volume integral runs on rays from `z` in two Gauss-Legendre panels
//! split at the boundary crossing: the inside panel sees the raw data, the
//! outside panel sees the extension, which is C^infinity for `s < 0`, so
//! both panels converge spectrally. The split point is the only
//! finite-smoothness point of the integrand along a ray (the extension
//! matches f to order N-1 there).

use super::{
    interior_check_points, judge_refinement, Component, SolveReport, SolverError, FD_STEP,
};
use crate::calculus::WirtingerTable;
use crate::domain::{DomainFamily, RadialTable};
use crate::expr::C;
use crate::kernels::cf_kernel_coefficients;
use crate::par;
use crate::quad::{gauss_legendre_on, HopfGrid};
use crate::seeley::DomainExtension;
use std::sync::Arc;
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct BmkOptions {
    /// Hopf resolution of the volume rule and the shell cache.
    pub resolution: usize,
    /// Gauss-Legendre order on each volume panel.
    pub radial: usize,
    /// Gauss-Legendre order across the collar shell.
    pub shell_radial: usize,
    /// Seeley extension order N (the extension is C^{N-1} at the boundary).
    pub seeley_terms: usize,
    /// Collar width as a fraction of the admissible maximum
    /// `rho_min / 2^{N-1}`.
    pub collar_scale: f64,
    pub table_resolution: usize,
    pub fd_step: f64,
    pub check_points: usize,
    pub check_refinement: bool,
    /// Boundary sampling resolution of the convexity scan.
    pub convexity_samples: usize,
    /// Interior points scanned for dbar-closedness of the data.
    pub closedness_samples: usize,
    /// Accepted finite-difference closedness defect. The scan separates
    /// closed data (defect ~ h^2 |f'''|) from junk (defect O(1)), so data
    /// with large third derivatives needs a looser gate than the default.
    pub closedness_tol: f64,
}

impl Default for BmkOptions {
    fn default() -> Self {
        BmkOptions {
            resolution: 12,
            radial: 12,
            shell_radial: 6,
            seeley_terms: 4,
            collar_scale: 0.9,
            table_resolution: 16,
            fd_step: FD_STEP,
            check_points: 12,
            check_refinement: false,
            convexity_samples: 5,
            closedness_samples: 40,
            closedness_tol: 1e-6,
        }
    }
}

struct ShellNode {
    zeta: [C; 2],
    w1: [C; 2],
    h12: C,
    weight: f64,
}

/// Solve `dbar u = f` for a dbar-closed (0,1)-form on a convex n = 2
/// family. Preconditions checked up front: the defining function has a
/// positive-definite real Hessian on the boundary and shell samples, and
/// the data's closedness defect scans below 1e-6 at interior points.
pub fn bmk_solve(
    family: &DomainFamily,
    t: f64,
    f: [Component<'_>; 2],
    eval_points: &[Vec<C>],
    opts: &BmkOptions,
) -> Result<SolveReport, SolverError> {
    super::expect_n(family, 2)?;
    let start = Instant::now();
    let mut diagnostics = Vec::new();

    let table = Arc::new(RadialTable::new(family, t, opts.table_resolution)?);
    let reach = (1u64 << (opts.seeley_terms - 1)) as f64;
    let width = opts.collar_scale * table.rho_min() / reach;

    let wt = WirtingerTable::new(&family.r);
    let min_eig = convexity_scan(family, t, &wt, opts.convexity_samples, width)?;
    if min_eig <= 0.0 {
        return Err(SolverError::NotConvex { min_eig });
    }
    diagnostics.push(format!(
        "convexity scan: min real Hessian eigenvalue {min_eig:.3e}"
    ));

    let clearance = (10.0 * opts.fd_step).max(0.02);
    let closed_checks = interior_check_points(family, t, opts.closedness_samples, clearance)?;
    let defect = par::map_indexed(closed_checks.len(), |i| {
        let p = &closed_checks[i];
        let d1 = dbar_component(&|z| f[1](z), p, 0, opts.fd_step);
        let d2 = dbar_component(&|z| f[0](z), p, 1, opts.fd_step);
        (d1 - d2).norm()
    })
    .into_iter()
    .fold(0.0, f64::max);
    if defect > opts.closedness_tol {
        return Err(SolverError::NotDbarClosed {
            max_residual: defect,
        });
    }
    diagnostics.push(format!("closedness scan: max defect {defect:.3e}"));

    let ef = [
        DomainExtension::with_table(family, t, f[0], opts.seeley_terms, width, Arc::clone(&table))?,
        DomainExtension::with_table(family, t, f[1], opts.seeley_terms, width, Arc::clone(&table))?,
    ];

    let run = |res: usize, radial: usize, shell_radial: usize| -> Result<(Vec<C>, f64), SolverError> {
        let shell = build_shell(family, t, &ef, &wt, &table, width, res, shell_radial, opts.fd_step)?;
        let grid = HopfGrid::new(res, res);
        let support_radius = table.rho_max() * 1.02 + width;
        let u_at = |z: &[C]| -> Result<C, SolverError> {
            let l = volume_term(family, t, f, &ef, z, &grid, radial, support_radius)?;
            let k = shell_term(&shell, z);
            Ok(l + k)
        };
        let u: Vec<C> = eval_points
            .iter()
            .map(|z| u_at(z))
            .collect::<Result<_, _>>()?;
        let checks = interior_check_points(family, t, opts.check_points, clearance)?;
        let residual = super::residual_2form(
            |z: &[C]| u_at(z).expect("check point stays clear of the boundary"),
            f,
            &checks,
            opts.fd_step,
        );
        Ok((u, residual))
    };

    let (u, residual) = run(opts.resolution, opts.radial, opts.shell_radial)?;
    diagnostics.push(format!(
        "residual {:.3e} at resolution {}, radial {}, shell {}",
        residual, opts.resolution, opts.radial, opts.shell_radial
    ));
    let mut refinement_ratio = None;
    if opts.check_refinement {
        let (_, refined) = run(
            2 * opts.resolution,
            2 * opts.radial,
            2 * opts.shell_radial,
        )?;
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

/// Central-difference `dbar_j` of a single scalar component.
fn dbar_component<G: Fn(&[C]) -> C>(g: &G, z: &[C], j: usize, h: f64) -> C {
    let i = C::new(0.0, 1.0);
    let mut w = z.to_vec();
    w[j] = z[j] + h;
    let px = g(&w);
    w[j] = z[j] - h;
    let mx = g(&w);
    w[j] = z[j] + i * h;
    let py = g(&w);
    w[j] = z[j] - i * h;
    let my = g(&w);
    0.5 * ((px - mx) / (2.0 * h) + i * (py - my) / (2.0 * h))
}

/// Min real-Hessian eigenvalue over boundary samples and their radial
/// push-outs to the middle and far edge of the collar (the K-term needs
/// convexity at shell points too).
fn convexity_scan(
    family: &DomainFamily,
    t: f64,
    wt: &WirtingerTable,
    resolution: usize,
    width: f64,
) -> Result<f64, SolverError> {
    let pts = family.sample_boundary(t, resolution)?;
    let mut min_eig = f64::INFINITY;
    for p in &pts {
        let rho: f64 = p
            .z
            .iter()
            .zip(&family.center)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        for scale in [1.0, 1.0 + 0.5 * width / rho, 1.0 + 0.95 * width / rho] {
            let q: Vec<C> = p
                .z
                .iter()
                .zip(&family.center)
                .map(|(a, c)| c + scale * (a - c))
                .collect();
            min_eig = min_eig.min(wt.at(&q, t)?.min_real_hess_eigenvalue());
        }
    }
    Ok(min_eig)
}

#[allow(clippy::too_many_arguments)]
fn build_shell(
    family: &DomainFamily,
    t: f64,
    ef: &[DomainExtension<'_, Component<'_>>; 2],
    wt: &WirtingerTable,
    table: &RadialTable,
    width: f64,
    resolution: usize,
    shell_radial: usize,
    fd_step: f64,
) -> Result<Vec<ShellNode>, SolverError> {
    let grid = HopfGrid::new(resolution, resolution);
    let (taus, wts) = gauss_legendre_on(0.0, width, shell_radial);
    let per_dir = par::map_indexed(grid.nodes.len(), |k| -> Result<Vec<ShellNode>, SolverError> {
        let nd = &grid.nodes[k];
        let rho_b = table.rho(family, &nd.omega)?;
        let mut out = Vec::with_capacity(taus.len());
        for (tau, wtau) in taus.iter().zip(&wts) {
            let x = rho_b + tau;
            let zeta = [
                family.center[0] + x * nd.omega[0],
                family.center[1] + x * nd.omega[1],
            ];
            let ld = wt.at(&zeta, t)?;
            let w1 = [ld.grad_z[0], ld.grad_z[1]];
            // collar points sit on table-covered rays, so the extension
            // evaluates on the whole finite-difference stencil
            let e0 = |z: &[C]| ef[0].eval(z).expect("extension eval in collar");
            let e1 = |z: &[C]| ef[1].eval(z).expect("extension eval in collar");
            let h12 = dbar_component(&e1, &zeta, 0, fd_step) - dbar_component(&e0, &zeta, 1, fd_step);
            out.push(ShellNode {
                zeta,
                w1,
                h12,
                weight: nd.weight * wtau * x * x * x,
            });
        }
        Ok(out)
    });
    let mut shell = Vec::with_capacity(grid.nodes.len() * shell_radial);
    for chunk in per_dir {
        shell.extend(chunk?);
    }
    Ok(shell)
}

/// Volume term on rays from `z`: data panel `[0, s_boundary]`, extension
/// panel `[s_boundary, s_support]`. The radial Jacobian cancels the kernel
/// singularity, leaving `bm_const * sum_j conj(omega_j) (Ef)_j`.
fn volume_term(
    family: &DomainFamily,
    t: f64,
    f: [Component<'_>; 2],
    ef: &[DomainExtension<'_, Component<'_>>; 2],
    z: &[C],
    grid: &HopfGrid,
    radial: usize,
    support_radius: f64,
) -> Result<C, SolverError> {
    let r0 = family.eval(z, t)?;
    if r0 >= 0.0 {
        return Err(SolverError::NotInterior { value: r0 });
    }
    let crossings = par::map_indexed(grid.nodes.len(), |k| {
        convex_crossing(family, t, z, &grid.nodes[k].omega, k)
    })
    .into_iter()
    .collect::<Result<Vec<f64>, _>>()?;
    let (xs, ws) = gauss_legendre_on(0.0, 1.0, radial);
    let c = super::cf_const(2);
    let zc: Vec<C> = z.iter().zip(&family.center).map(|(a, b)| a - b).collect();
    let dist2_c = zc.iter().map(|v| v.norm_sqr()).sum::<f64>();
    Ok(par::sum_indexed(grid.nodes.len(), |k| {
        let nd = &grid.nodes[k];
        let s_b = crossings[k];
        // closed-form exit from the support ball about the center
        let beta = (nd.omega[0] * zc[0].conj() + nd.omega[1] * zc[1].conj()).re;
        let s_sup = -beta + (beta * beta + support_radius * support_radius - dist2_c).sqrt();
        let mut acc = C::new(0.0, 0.0);
        for (xi, wi) in xs.iter().zip(&ws) {
            let x = s_b * xi;
            let zeta = [z[0] + x * nd.omega[0], z[1] + x * nd.omega[1]];
            let val = nd.omega[0].conj() * f[0](&zeta) + nd.omega[1].conj() * f[1](&zeta);
            acc += (s_b * wi) * val;
        }
        if s_sup > s_b {
            let len = s_sup - s_b;
            for (xi, wi) in xs.iter().zip(&ws) {
                let x = s_b + len * xi;
                let zeta = [z[0] + x * nd.omega[0], z[1] + x * nd.omega[1]];
                let val = nd.omega[0].conj() * ef[0].eval(&zeta).expect("extension on ray")
                    + nd.omega[1].conj() * ef[1].eval(&zeta).expect("extension on ray");
                acc += (len * wi) * val;
            }
        }
        (c * nd.weight) * acc
    }))
}

fn shell_term(shell: &[ShellNode], z: &[C]) -> C {
    let cf = cf_kernel_coefficients(2, 1).expect("n=2 kernels");
    par::sum_indexed(shell.len(), |i| {
        let nd = &shell[i];
        let phi1 = nd.w1[0] * (nd.zeta[0] - z[0]) + nd.w1[1] * (nd.zeta[1] - z[1]);
        cf.transition_pairing(&nd.zeta, z, &nd.w1, phi1, nd.h12) * nd.weight
    })
}

/// Boundary crossing along `z + s omega` by bisection on the box bracket.
/// Valid because the solver's convexity precondition makes `r` convex
/// along every line, so the sign change is unique.
fn convex_crossing(
    family: &DomainFamily,
    t: f64,
    z: &[C],
    omega: &[C],
    ray: usize,
) -> Result<f64, SolverError> {
    let n = family.n;
    let mut zeta = vec![C::new(0.0, 0.0); n];
    let r_at = |s: f64, zeta: &mut Vec<C>| -> Result<f64, SolverError> {
        for j in 0..n {
            zeta[j] = z[j] + s * omega[j];
        }
        Ok(family.eval(zeta, t)?)
    };
    let r0 = r_at(0.0, &mut zeta)?;
    if r0 >= 0.0 {
        return Err(SolverError::NotInterior { value: r0 });
    }
    let s_exit = super::box_exit(family, z, omega);
    let r_exit = r_at(s_exit, &mut zeta)?;
    if r_exit <= 0.0 {
        return Err(SolverError::RayFromPoint { ray, count: 0 });
    }
    let (mut lo, mut hi) = (0.0, s_exit);
    for _ in 0..52 {
        let mid = 0.5 * (lo + hi);
        if r_at(mid, &mut zeta)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainFamily;

    fn ball() -> DomainFamily {
        DomainFamily::unit_ball(2)
    }

    #[test]
    fn compact_support_oracle() {
        // Gaussian data: at the deepest Seeley reflection radius
        // 1 - 8 * 0.056 = 0.55 the tail is exp(-20) ~ 2e-9, so
        // E(dbar g) = dbar g to roundoff, the shell density vanishes and
        // u must reproduce g itself. The entire radial profile keeps the
        // Gauss-Legendre panels spectrally accurate (a cutoff-profile bump
        // here aliases against the rule and stalls at percent-level error).
        // Genuine third derivatives put the FD closedness defect near
        // h^2 |f'''| ~ 1e-4, hence the loosened gate.
        let fam = ball();
        let s2 = 0.015;
        let g = move |z: &[C]| -> C {
            C::new((-(z[0].norm_sqr() + z[1].norm_sqr()) / s2).exp(), 0.0)
        };
        let f0 = move |z: &[C]| -> C { -g(z) * z[0] / s2 };
        let f1 = move |z: &[C]| -> C { -g(z) * z[1] / s2 };
        let opts = BmkOptions {
            resolution: 10,
            radial: 48,
            collar_scale: 0.45,
            check_points: 4,
            closedness_tol: 1e-3,
            ..BmkOptions::default()
        };
        let pts = vec![
            vec![C::new(0.0, 0.0), C::new(0.0, 0.0)],
            vec![C::new(0.1, 0.0), C::new(0.0, 0.05)],
            vec![C::new(0.15, -0.1), C::new(0.05, 0.0)],
        ];
        let report = bmk_solve(&fam, 0.0, [&f0, &f1], &pts, &opts).unwrap();
        for (z, u) in pts.iter().zip(&report.u) {
            let want = g(z);
            assert!(
                (u - want).norm() < 1e-3,
                "u({z:?}) = {u}, want {want}"
            );
        }
    }

    #[test]
    fn ball_dzbar1_residual() {
        let fam = ball();
        let one = |_z: &[C]| C::new(1.0, 0.0);
        let zero = |_z: &[C]| C::new(0.0, 0.0);
        let opts = BmkOptions {
            resolution: 10,
            radial: 12,
            check_points: 6,
            ..BmkOptions::default()
        };
        let report = bmk_solve(
            &fam,
            0.0,
            [&one, &zero],
            &[vec![C::new(0.2, 0.1), C::new(0.0, -0.1)]],
            &opts,
        )
        .unwrap();
        assert!(
            report.residual < 5e-2,
            "residual {} at resolution 10",
            report.residual
        );
        assert!(report.u[0].norm() > 1e-3);
    }

    #[test]
    fn zero_data_gives_zero() {
        let fam = ball();
        let zero = |_z: &[C]| C::new(0.0, 0.0);
        let opts = BmkOptions {
            resolution: 6,
            radial: 6,
            check_points: 4,
            ..BmkOptions::default()
        };
        let report = bmk_solve(
            &fam,
            0.0,
            [&zero, &zero],
            &[vec![C::new(0.1, 0.0), C::new(0.0, 0.0)]],
            &opts,
        )
        .unwrap();
        assert_eq!(report.u[0], C::new(0.0, 0.0));
        assert!(report.residual < 1e-12);
    }

    #[test]
    fn solution_is_linear_in_data() {
        let fam = ball();
        let one = |_z: &[C]| C::new(1.0, 0.0);
        let zero = |_z: &[C]| C::new(0.0, 0.0);
        let g0 = |z: &[C]| z[1];
        // dbar-closed pair: dzbar1 and z2 dzbar1 (both have h12 = 0)
        let combo = |z: &[C]| C::new(1.0, 0.0) + 2.0 * z[1];
        let opts = BmkOptions {
            resolution: 6,
            radial: 8,
            check_points: 4,
            ..BmkOptions::default()
        };
        let z = vec![vec![C::new(0.15, -0.1), C::new(0.2, 0.05)]];
        let ua = bmk_solve(&fam, 0.0, [&one, &zero], &z, &opts).unwrap().u[0];
        let ub = bmk_solve(&fam, 0.0, [&g0, &zero], &z, &opts).unwrap().u[0];
        let uc = bmk_solve(&fam, 0.0, [&combo, &zero], &z, &opts).unwrap().u[0];
        assert!(
            (uc - (ua + 2.0 * ub)).norm() < 1e-10,
            "linearity defect {}",
            (uc - (ua + 2.0 * ub)).norm()
        );
    }

    #[test]
    fn rejects_non_closed_data() {
        let fam = ball();
        let bad = |z: &[C]| z[1].conj();
        let zero = |_z: &[C]| C::new(0.0, 0.0);
        let opts = BmkOptions {
            resolution: 6,
            radial: 6,
            ..BmkOptions::default()
        };
        let err = bmk_solve(
            &fam,
            0.0,
            [&bad, &zero],
            &[vec![C::new(0.0, 0.0), C::new(0.0, 0.0)]],
            &opts,
        )
        .unwrap_err();
        assert!(matches!(err, SolverError::NotDbarClosed { .. }));
    }

    #[test]
    fn rejects_non_convex_domain() {
        // quartic dent: bounded in the box (r = 0.14 at the +x1 box exit)
        // but the real Hessian eigenvalue 2 - 2.4|z1|^2 < 0 at the real-axis
        // crossing |z1| ~ 1.17
        let fam = DomainFamily::new(
            crate::expr::DefiningExpr::parse(
                "abs2(z1) + abs2(z2) - 1 - 0.2*re(z1*z1*z1*z1)",
                2,
            )
            .unwrap(),
            vec![[-1.8, 1.8], [-1.8, 1.8], [-1.8, 1.8], [-1.8, 1.8]],
            [0.0, 1.0],
            vec![C::new(0.0, 0.0), C::new(0.0, 0.0)],
            1e-9,
        )
        .unwrap();
        let zero = |_z: &[C]| C::new(0.0, 0.0);
        let opts = BmkOptions::default();
        let err = bmk_solve(
            &fam,
            0.0,
            [&zero, &zero],
            &[vec![C::new(0.0, 0.0), C::new(0.0, 0.0)]],
            &opts,
        )
        .unwrap_err();
        assert!(matches!(err, SolverError::NotConvex { .. }));
    }

    #[test]
    fn rejects_too_wide_collar() {
        let fam = ball();
        let zero = |_z: &[C]| C::new(0.0, 0.0);
        let opts = BmkOptions {
            collar_scale: 1.5,
            ..BmkOptions::default()
        };
        let err = bmk_solve(
            &fam,
            0.0,
            [&zero, &zero],
            &[vec![C::new(0.0, 0.0), C::new(0.0, 0.0)]],
            &opts,
        )
        .unwrap_err();
        assert!(matches!(err, SolverError::Seeley(_)));
    }
}

