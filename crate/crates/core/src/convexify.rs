//! Narasimhan normalization at a strictly pseudoconvex boundary point and
//! the Grauert bump construction, certified numerically.
//!
//! Given a boundary point p of `D^t = {r^t < 0}` with nondegenerate gradient
//! and strictly positive Levi form, the chart map `psi = phi2 . phi1 . phi0`
//! takes a neighborhood of p to a neighborhood of 0 in which the defining
//! function becomes strictly convex:
//!
//! * `phi0`: affine unitary `w = S (z - p)` sending the inner normal to the
//!   +y_n axis, followed by the gradient normalization
//!   `r1 = r . phi0^{-1} / (2 |r_z(p)|)`, so that `dr1(0) = -dy_n`.
//! * `phi1`: polynomial shear `w_n - i Q(w)` with `Q(w) = w^T A w`, where
//!   `A = d^2 r1 / dw_j dw_k (0)` is the holomorphic Hessian. The shear
//!   removes every holomorphic second-order term; the Hermitian coefficients
//!   `b_{j kbar}` are invariants of the normal form and stay (they are what
//!   makes the Levi form positive). Shearing them away, as one is tempted to
//!   do with the `b_{n nbar}` and `b_{alpha nbar}` entries, reintroduces
//!   holomorphic quadratics through `zbar_n = z_n - 2i y_n` and fails the
//!   residue check below.
//! * `phi2`: the fixed shear `u_n + i u_n^2` together with the exponential
//!   rescaling `r* = (exp(4 r2 . phi2^{-1}) - 1) / 4`. Under `phi2^{-1}` the
//!   linear term `-y_n` picks up `+Re u_n^2`; the quadratic term of the
//!   exponential contributes `2 y_n^2 = |u_n|^2 - Re u_n^2`. The `Re u_n^2`
//!   parts cancel and the surviving `|u_n|^2` convexifies the normal
//!   direction. Both the shear sign and the factor 4 are forced: any other
//!   combination leaves a holomorphic residue of order one.
//!
//! The resulting normal form is `r* = -y_n + |u_n|^2 + (Levi terms) + o(2)`,
//! strictly convex on a ball `B_eps0` whose radius is calibrated by an
//! explicit eigenvalue scan. The bump construction then modifies the domain
//! near p only:
//!
//! * `rhat = r* + C* chi0(eps1^{-2} |w|^2)` cuts the convex model off at
//!   radius eps1, so `Nhat = {rhat < 0}` is relatively compact in `B_eps0`,
//! * `r_next = r - delta chi1(eps2^{-2} |z - p|^2)` pushes the boundary
//!   outward on `B_{sqrt2 eps2}(p)` by depth delta.
//!
//! All shears are inverted exactly (stable quadratic formula with
//! `sqrt(w) = exp(log(w)/2)`), so `r*` is an honest expression in the chart
//! coordinates rather than a Taylor truncation. Every analytic claim is
//! certified by a grid scan and reported in a [`BumpCertificate`]; a failed
//! certificate is returned, not thrown.

use nalgebra::DMatrix;
use thiserror::Error;

use crate::calculus::WirtingerTable;
use crate::domain::{DomainError, DomainFamily};
use crate::expr::profile;
use crate::expr::{
    add, cnum, div, mul, pow, rnum, sub, DefiningExpr, EvalError, Expr, ProfileKind, C,
};
use crate::par;

/// Initial chart radius for the convexity calibration search.
const EPS0_INIT: f64 = 0.5;
/// Default cutoff amplitude of the chi0 barrier in rhat.
const CSTAR_DEFAULT: f64 = 10.0;
/// Default bump depth.
const DELTA_DEFAULT: f64 = 0.05;
/// Grid points per real axis in the convexity and Jacobian scans.
const CALIBRATION_GRID: usize = 5;
/// Grid points per real axis in the separation scan.
const SEPARATION_GRID: usize = 11;
/// Smallest acceptable |det| of the shear Jacobians on the chart ball.
const JACOBIAN_FLOOR: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ConvexifyError {
    #[error("expected a point in C^{expected}, got C^{got}")]
    Dimension { expected: usize, got: usize },
    #[error("p is not a boundary point: r(p) = {value:.3e}")]
    NotOnBoundary { value: f64 },
    #[error("gradient of r degenerates at p (|r_z| = {norm:.3e})")]
    DegenerateGradient { norm: f64 },
    #[error("Levi form at p is not strictly positive (min eigenvalue {min_eig:.3e})")]
    NotStrictlyPseudoconvex { min_eig: f64 },
    #[error("chart calibration failed: {0}")]
    Calibration(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Second-order Taylor data of the rotated, rescaled defining function
/// `r1` at the chart origin.
#[derive(Debug, Clone)]
pub struct Quad1 {
    /// Holomorphic Hessian `d^2 r1 / dw_j dw_k (0)`, symmetric. These are
    /// the shear coefficients of phi1.
    pub a: DMatrix<C>,
    /// Levi coefficient `b_{n nbar} = d^2 r1 / dw_n dwbar_n (0)`, real.
    pub b_nn: f64,
    /// Mixed Levi coefficients `b_{alpha nbar}` for alpha < n. Recorded as
    /// chart data; no holomorphic shear can remove Hermitian terms.
    pub b_alpha_n: Vec<C>,
}

/// A normalized boundary chart at p: the unitary rotation, the shear
/// coefficients, the calibrated radii and the bump parameters.
#[derive(Debug, Clone)]
pub struct BoundaryChart {
    /// Boundary point the chart is centered at.
    pub p: Vec<C>,
    /// Unitary rotation of phi0: `w = S (z - p)`.
    pub s_matrix: DMatrix<C>,
    /// Quadratic Taylor data driving phi1.
    pub quad1: Quad1,
    /// Radius on which r* is certified strictly convex.
    pub eps0: f64,
    /// Activation radius of the chi0 barrier, eps0 / 2.
    pub eps1: f64,
    /// Radius around p mapped into `B_eps1`; also the bump support scale.
    pub eps2: f64,
    /// Amplitude of the chi0 barrier in rhat.
    pub cstar: f64,
    /// Bump depth.
    pub delta: f64,
    /// Normal form r* as an expression in the chart coordinates.
    pub rstar: DefiningExpr,
    /// Parameter value the chart was built at.
    pub t: f64,
    /// Gradient normalization 1 / (2 |r_z(p)|).
    scale: f64,
}

impl BoundaryChart {
    fn n(&self) -> usize {
        self.p.len()
    }

    /// Gradient normalization of r1, i.e. `r*(psi(z)) = (e^{4 s r(z)} - 1)/4`
    /// with this s.
    pub fn gradient_scale(&self) -> f64 {
        self.scale
    }

    /// Numeric forward map `psi(z) = phi2(phi1(S (z - p)))`.
    pub fn forward(&self, z: &[C]) -> Vec<C> {
        let n = self.n();
        debug_assert_eq!(z.len(), n);
        let mut w = vec![C::new(0.0, 0.0); n];
        for j in 0..n {
            for k in 0..n {
                w[j] += self.s_matrix[(j, k)] * (z[k] - self.p[k]);
            }
        }
        let mut q = C::new(0.0, 0.0);
        for j in 0..n {
            for k in 0..n {
                q += self.quad1.a[(j, k)] * w[j] * w[k];
            }
        }
        w[n - 1] -= C::i() * q;
        let u = w[n - 1];
        w[n - 1] = u + C::i() * u * u;
        w
    }

    /// Components of the forward map as expressions in the original
    /// variables, so bumped model domains pull back by substitution.
    pub fn forward_exprs(&self) -> Vec<DefiningExpr> {
        let n = self.n();
        let mut w: Vec<Expr> = Vec::with_capacity(n);
        for j in 0..n {
            let mut e = rnum(0.0);
            for k in 0..n {
                let s = self.s_matrix[(j, k)];
                let diff = sub(Expr::Var(k), cnum(self.p[k].re, self.p[k].im));
                e = add(e, mul(cnum(s.re, s.im), diff));
            }
            w.push(e);
        }
        let mut q = rnum(0.0);
        for j in 0..n {
            for k in 0..n {
                let a = self.quad1.a[(j, k)];
                if a.norm() == 0.0 {
                    continue;
                }
                q = add(q, mul(cnum(a.re, a.im), mul(w[j].clone(), w[k].clone())));
            }
        }
        let sheared = sub(w[n - 1].clone(), mul(cnum(0.0, 1.0), q));
        w[n - 1] = add(sheared.clone(), mul(cnum(0.0, 1.0), pow(sheared, 2)));
        w.into_iter().map(|e| DefiningExpr::new(n, e)).collect()
    }

    /// Minimum over a `B_eps0` grid of |det D phi1| and |det D phi2|
    /// (phi0 is unitary). Both shears are triangular, so the determinants
    /// are the last diagonal entries.
    pub fn min_jacobian_on_grid(&self, grid_n: usize) -> f64 {
        min_shear_jacobian(&self.quad1.a, self.eps0, grid_n)
    }
}

fn min_shear_jacobian(a: &DMatrix<C>, radius: f64, grid_n: usize) -> f64 {
    let n = a.nrows();
    let pts = ball_grid(n, radius, grid_n);
    let mut min = f64::INFINITY;
    for w in &pts {
        let mut dq = C::new(0.0, 0.0);
        for k in 0..n {
            dq += 2.0 * a[(n - 1, k)] * w[k];
        }
        let d1 = C::new(1.0, 0.0) - C::i() * dq;
        let mut q = C::new(0.0, 0.0);
        for j in 0..n {
            for k in 0..n {
                q += a[(j, k)] * w[j] * w[k];
            }
        }
        let u = w[n - 1] - C::i() * q;
        let d2 = C::new(1.0, 0.0) + 2.0 * C::i() * u;
        min = min.min(d1.norm()).min(d2.norm());
    }
    min
}

/// Grid certificates of one bump step. Validity per the bump lemma is
/// strict convexity of the normal form plus the separation property; the
/// remaining fields are diagnostics the tests pin individually.
#[derive(Debug, Clone)]
pub struct BumpCertificate {
    /// Minimum real-Hessian eigenvalue of r* over the `B_eps0` grid.
    pub min_real_hessian_eig: f64,
    /// Closures of `B \ D` and `D \ N` stay a grid cell apart.
    pub separation_ok: bool,
    /// Sampled patch of the boundary within distance eps2 of p.
    pub covered_boundary_patch: Vec<Vec<C>>,
    /// Every patch sample satisfies `r_next < 0` strictly.
    pub patch_in_next: bool,
    /// Minimum Levi eigenvalue of r_next along its zero set near the bump.
    pub min_levi_next: f64,
    /// `rhat > 0` held on the outer shell of the chart ball.
    pub nhat_compact: bool,
}

impl BumpCertificate {
    pub fn is_valid(&self) -> bool {
        self.min_real_hessian_eig > 0.0 && self.separation_ok
    }
}

/// The convex ramp cutoff used by rhat: 0 on (-inf, 1], strictly convex
/// beyond (same primitive as the expression-language `chi0`).
pub fn cutoff_chi0(s: f64) -> f64 {
    profile::chi0(s)
}

/// The plateau cutoff used by r_next: 1 on |s| <= 1, 0 on |s| >= 2.
pub fn cutoff_chi1(s: f64) -> f64 {
    profile::chi1(s)
}

// ---------------------------------------------------------------------------
// normalization
// ---------------------------------------------------------------------------

/// Build the normalized chart at a boundary point p of `D^t` and return it
/// together with the normal form r*.
///
/// Postconditions (enforced to 1e-10 by the test suite): `r*(0) = 0`,
/// `dr*(0) = -dy_n`, and the holomorphic second-order terms of r* at 0
/// vanish. The chart radii eps0 >= 2 eps1 >= 2 C* eps2 are calibrated by a
/// halving search so that r* is strictly convex on `B_eps0`, the shear
/// Jacobians clear [`JACOBIAN_FLOOR`], and `psi(B_eps2(p))` lands in
/// `B_eps1`.
pub fn narasimhan_normalize(
    family: &DomainFamily,
    t: f64,
    p: &[C],
) -> Result<(BoundaryChart, DefiningExpr), ConvexifyError> {
    let n = family.n;
    if p.len() != n {
        return Err(ConvexifyError::Dimension {
            expected: n,
            got: p.len(),
        });
    }
    let rp = family.eval(p, t)?;
    if rp.abs() > 100.0 * family.boundary_tol {
        return Err(ConvexifyError::NotOnBoundary { value: rp });
    }
    let grad = family.grad_z(p, t)?;
    let gnorm = grad.iter().map(|g| g.norm_sqr()).sum::<f64>().sqrt();
    if gnorm < 1e-8 {
        return Err(ConvexifyError::DegenerateGradient { norm: gnorm });
    }
    let at_p = WirtingerTable::new(&family.r).at(p, t)?;
    let min_eig = at_p.min_levi_eigenvalue();
    if min_eig <= 0.0 {
        return Err(ConvexifyError::NotStrictlyPseudoconvex { min_eig });
    }

    let s_matrix = rotation_to_normal(&grad, gnorm);
    let scale = 1.0 / (2.0 * gnorm);

    // r1 = scale * r(S^H w + p)
    let s_adj = s_matrix.adjoint();
    let inv0: Vec<Expr> = (0..n)
        .map(|j| {
            let mut e = cnum(p[j].re, p[j].im);
            for k in 0..n {
                let c = s_adj[(j, k)];
                e = add(e, mul(cnum(c.re, c.im), Expr::Var(k)));
            }
            e
        })
        .collect();
    let r1 = DefiningExpr::new(n, mul(rnum(scale), family.r.substitute(&inv0, n).expr));

    let origin = vec![C::new(0.0, 0.0); n];
    let d1 = WirtingerTable::new(&r1).at(&origin, t)?;
    let a = d1.holo_hess.clone();
    let b_nn = d1.levi[(n - 1, n - 1)].re;
    let b_alpha_n: Vec<C> = (0..n - 1).map(|al| d1.levi[(al, n - 1)]).collect();

    let inv1 = phi1_inverse_exprs(&a, n);
    let inv2 = phi2_inverse_exprs(n);
    let pre = r1.substitute(&inv1, n).substitute(&inv2, n);
    let rstar = DefiningExpr::new(
        n,
        mul(rnum(0.25), sub(mul(rnum(4.0), pre.expr).exp(), rnum(1.0))),
    );

    // Halve eps0 until the convexity and Jacobian scans both pass. The scans
    // can fail with an eval error when the chart is so large that the shear
    // inverse wanders near the log branch cut; that also means "too large".
    let mut eps0 = EPS0_INIT;
    let mut calibrated = false;
    for _ in 0..9 {
        let convex = matches!(
            verify_strict_convexity(&rstar, eps0, CALIBRATION_GRID, t),
            Ok(v) if v > 0.0
        );
        if convex && min_shear_jacobian(&a, eps0, CALIBRATION_GRID) > JACOBIAN_FLOOR {
            calibrated = true;
            break;
        }
        eps0 *= 0.5;
    }
    if !calibrated {
        return Err(ConvexifyError::Calibration(format!(
            "no strictly convex chart radius found down to eps0 = {eps0:.2e}"
        )));
    }
    let eps1 = 0.5 * eps0;

    let mut chart = BoundaryChart {
        p: p.to_vec(),
        s_matrix,
        quad1: Quad1 { a, b_nn, b_alpha_n },
        eps0,
        eps1,
        eps2: 0.99 * eps1 / CSTAR_DEFAULT,
        cstar: CSTAR_DEFAULT,
        delta: DELTA_DEFAULT,
        rstar: rstar.clone(),
        t,
        scale,
    };

    // Shrink eps2 until psi(B_eps2(p)) demonstrably lands in B_eps1.
    let dirs = family.boundary_directions(6);
    let mut contained = false;
    for _ in 0..8 {
        let worst = dirs
            .iter()
            .flat_map(|d| [0.5, 1.0].into_iter().map(move |f| (d, f)))
            .map(|(d, f)| {
                let z: Vec<C> = (0..n).map(|j| chart.p[j] + f * chart.eps2 * d[j]).collect();
                cnorm(&chart.forward(&z))
            })
            .fold(0.0, f64::max);
        if worst < chart.eps1 {
            contained = true;
            break;
        }
        chart.eps2 *= 0.5;
    }
    if !contained {
        return Err(ConvexifyError::Calibration(format!(
            "psi(B_eps2(p)) not contained in B_eps1 down to eps2 = {:.2e}",
            chart.eps2
        )));
    }

    Ok((chart, rstar))
}

/// Unitary S with `S v = -i e_n` for `v = conj(grad)/|grad|`, so the outward
/// normal maps to the -y_n axis and the domain locally to `{y_n > 0}`.
fn rotation_to_normal(grad: &[C], gnorm: f64) -> DMatrix<C> {
    let n = grad.len();
    let v: Vec<C> = grad.iter().map(|g| g.conj() / gnorm).collect();
    // Orthonormal complement of v, seeded from the standard basis vectors
    // least parallel to v.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| v[x].norm().partial_cmp(&v[y].norm()).unwrap());
    let mut basis: Vec<Vec<C>> = Vec::with_capacity(n - 1);
    for &j in &order {
        if basis.len() == n - 1 {
            break;
        }
        let mut u: Vec<C> = (0..n)
            .map(|k| C::new(if k == j { 1.0 } else { 0.0 }, 0.0))
            .collect();
        let pv = cdot(&u, &v);
        for k in 0..n {
            u[k] -= pv * v[k];
        }
        for b in &basis {
            let pb = cdot(&u, b);
            for k in 0..n {
                u[k] -= pb * b[k];
            }
        }
        let norm = cnorm(&u);
        if norm > 1e-8 {
            for x in u.iter_mut() {
                *x /= norm;
            }
            basis.push(u);
        }
    }
    debug_assert_eq!(basis.len(), n - 1);
    let mut s = DMatrix::<C>::zeros(n, n);
    for (row, u) in basis.iter().enumerate() {
        for k in 0..n {
            s[(row, k)] = u[k].conj();
        }
    }
    for k in 0..n {
        s[(n - 1, k)] = C::new(0.0, -1.0) * v[k].conj();
    }
    s
}

/// `sqrt(w) = exp(log(w)/2)`; principal branch, used on arguments near 1.
fn sqrt_expr(w: Expr) -> Expr {
    mul(rnum(0.5), w.log()).exp()
}

/// Stable root of `a2 x^2 + b2 x = num` branching to `x ~ num` at 0:
/// `x = 2 num / (b2 + sqrt(b2^2 + 4 a2 num))`.
fn stable_quad_root(a2: C, b2: Expr, num: Expr) -> Expr {
    let disc = add(
        pow(b2.clone(), 2),
        mul(mul(rnum(4.0), cnum(a2.re, a2.im)), num.clone()),
    );
    div(mul(rnum(2.0), num), add(b2, sqrt_expr(disc)))
}

/// Exact inverse of the shear `w_n = z_n - i (z^T A z)` as expressions in w.
/// Splitting `Q = Q'(z') + 2 L(z') z_n + a_nn z_n^2` the last coordinate
/// solves `(-i a_nn) z_n^2 + (1 - 2iL) z_n = w_n + i Q'`. When `a_nn` is
/// negligible the linear solve is used, which folds to the identity for
/// `A = 0`.
fn phi1_inverse_exprs(a: &DMatrix<C>, n: usize) -> Vec<Expr> {
    let mut out: Vec<Expr> = (0..n).map(Expr::Var).collect();
    let last = n - 1;
    let mut qp = rnum(0.0);
    for j in 0..last {
        for k in 0..last {
            let c = a[(j, k)];
            if c.norm() == 0.0 {
                continue;
            }
            qp = add(qp, mul(cnum(c.re, c.im), mul(Expr::Var(j), Expr::Var(k))));
        }
    }
    let mut lin = rnum(0.0);
    for al in 0..last {
        let c = a[(al, last)];
        if c.norm() == 0.0 {
            continue;
        }
        lin = add(lin, mul(cnum(c.re, c.im), Expr::Var(al)));
    }
    let b2 = sub(rnum(1.0), mul(cnum(0.0, 2.0), lin));
    let num = add(mul(cnum(0.0, 1.0), qp), Expr::Var(last));
    let ann = a[(last, last)];
    out[last] = if ann.norm() < 1e-14 {
        div(num, b2)
    } else {
        // -i a_nn
        stable_quad_root(C::new(ann.im, -ann.re), b2, num)
    };
    out
}

/// Exact inverse of the fixed shear `w_n = u_n + i u_n^2`.
fn phi2_inverse_exprs(n: usize) -> Vec<Expr> {
    let mut out: Vec<Expr> = (0..n).map(Expr::Var).collect();
    out[n - 1] = stable_quad_root(C::i(), rnum(1.0), Expr::Var(n - 1));
    out
}

// ---------------------------------------------------------------------------
// convexity scan
// ---------------------------------------------------------------------------

/// Minimum real-Hessian eigenvalue of `rstar` over a uniform grid of the
/// real 2n-ball of the given radius. The Hessian is exact (symbolic
/// Wirtinger second derivatives); only the grid is discrete.
pub fn verify_strict_convexity(
    rstar: &DefiningExpr,
    radius: f64,
    grid_n: usize,
    t: f64,
) -> Result<f64, ConvexifyError> {
    let pts = ball_grid(rstar.n, radius, grid_n);
    let table = WirtingerTable::new(rstar);
    let eigs = par::map_indexed(pts.len(), |i| {
        table.at(&pts[i], t).map(|d| d.min_real_hess_eigenvalue())
    });
    let mut min = f64::INFINITY;
    for e in eigs {
        min = min.min(e?);
    }
    Ok(min)
}

/// Uniform grid of the real 2n-ball: `grid_n` points per axis, filtered to
/// the closed ball. Odd `grid_n` includes the origin.
fn ball_grid(n: usize, radius: f64, grid_n: usize) -> Vec<Vec<C>> {
    let d = 2 * n;
    let g = grid_n.max(1);
    let total = g.pow(d as u32);
    let mut pts = Vec::new();
    let mut x = vec![0.0; d];
    for idx in 0..total {
        let mut rem = idx;
        for slot in x.iter_mut() {
            let k = rem % g;
            rem /= g;
            *slot = if g == 1 {
                0.0
            } else {
                -radius + 2.0 * radius * k as f64 / (g - 1) as f64
            };
        }
        if x.iter().map(|v| v * v).sum::<f64>() <= radius * radius * (1.0 + 1e-12) {
            pts.push((0..n).map(|j| C::new(x[2 * j], x[2 * j + 1])).collect());
        }
    }
    pts
}

// ---------------------------------------------------------------------------
// bump construction
// ---------------------------------------------------------------------------

/// Build one bump at the chart: the cut-off convex model
/// `rhat = r* + C* chi0(eps1^{-2} |w|^2)`, the bumped family member
/// `r_next = r - delta chi1(eps2^{-2} |z - p|^2)` and the certificate.
///
/// Certificate failures are reported in the returned [`BumpCertificate`],
/// not as errors; errors are reserved for evaluation failures.
pub fn build_bump(
    family: &DomainFamily,
    t: f64,
    chart: &BoundaryChart,
) -> Result<(DefiningExpr, DefiningExpr, BumpCertificate), ConvexifyError> {
    let n = family.n;
    let mut abs_w = rnum(0.0);
    for j in 0..n {
        abs_w = add(abs_w, Expr::Var(j).abs2());
    }
    let barrier = Expr::Profile(
        ProfileKind::Chi0,
        0,
        Box::new(mul(rnum(chart.eps1.powi(-2)), abs_w)),
    );
    let n_hat = DefiningExpr::new(
        n,
        add(chart.rstar.expr.clone(), mul(rnum(chart.cstar), barrier)),
    );

    let mut dist2 = rnum(0.0);
    for j in 0..n {
        dist2 = add(
            dist2,
            sub(Expr::Var(j), cnum(chart.p[j].re, chart.p[j].im)).abs2(),
        );
    }
    let bump = Expr::Profile(
        ProfileKind::Chi1,
        0,
        Box::new(mul(rnum(chart.eps2.powi(-2)), dist2)),
    );
    let r_next = DefiningExpr::new(
        n,
        sub(family.r.expr.clone(), mul(rnum(chart.delta), bump)),
    );

    let min_real_hessian_eig =
        verify_strict_convexity(&chart.rstar, chart.eps0, CALIBRATION_GRID, t)?;
    let nhat_compact = check_nhat_compact(&n_hat, chart, t)?;
    let separation_ok = check_separation(family, t, chart, &n_hat, &r_next)?;
    let covered_boundary_patch = boundary_patch(family, t, chart)?;
    let mut patch_in_next = !covered_boundary_patch.is_empty();
    for q in &covered_boundary_patch {
        patch_in_next &= r_next.eval(q, t)?.re < 0.0;
    }
    let min_levi_next = min_levi_on_next_zero_set(family, t, chart, &r_next)?;

    let cert = BumpCertificate {
        min_real_hessian_eig,
        separation_ok,
        covered_boundary_patch,
        patch_in_next,
        min_levi_next,
        nhat_compact,
    };
    Ok((n_hat, r_next, cert))
}

/// One-call normalization plus bump with a halving search on delta until
/// the certificate, including the diagnostic fields, passes. The last
/// certificate is returned even if the search exhausts its attempts.
///
/// Only delta shrinks: the cutoff term adds `O(delta / eps2^2)` to the Levi
/// form of r_next in the transition annulus, so keeping the perturbed
/// boundary strictly pseudoconvex needs `delta ~ lambda eps2^2` with eps2
/// fixed at its calibrated value (halving eps2 alongside delta would double
/// the ratio and the search could never terminate).
pub fn certified_bump(
    family: &DomainFamily,
    t: f64,
    p: &[C],
) -> Result<(BoundaryChart, DefiningExpr, DefiningExpr, BumpCertificate), ConvexifyError> {
    let (mut chart, _) = narasimhan_normalize(family, t, p)?;
    for _ in 0..24 {
        let (n_hat, r_next, cert) = build_bump(family, t, &chart)?;
        if cert.is_valid() && cert.patch_in_next && cert.min_levi_next > 0.0 && cert.nhat_compact
        {
            return Ok((chart, n_hat, r_next, cert));
        }
        chart.delta *= 0.5;
    }
    let (n_hat, r_next, cert) = build_bump(family, t, &chart)?;
    Ok((chart, n_hat, r_next, cert))
}

/// Greedy farthest-point selection of chart centers on the boundary until
/// every boundary sample lies within `radius` of a center.
pub fn boundary_covering(
    family: &DomainFamily,
    t: f64,
    radius: f64,
    max_charts: usize,
) -> Result<Vec<Vec<C>>, ConvexifyError> {
    assert!(radius > 0.0 && max_charts >= 1);
    let samples: Vec<Vec<C>> = family
        .sample_boundary(t, 12)?
        .into_iter()
        .map(|b| b.z)
        .collect();
    let mut centers = vec![samples[0].clone()];
    loop {
        let (far_idx, far_dist) = samples
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let d = centers.iter().map(|c| dist(s, c)).fold(f64::INFINITY, f64::min);
                (i, d)
            })
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        if far_dist <= radius || centers.len() >= max_charts {
            return Ok(centers);
        }
        centers.push(samples[far_idx].clone());
    }
}

/// rhat must be positive on the outer shell of the chart ball, so that
/// `{rhat < 0}` cannot reach the boundary of `B_eps0` at grid resolution.
fn check_nhat_compact(
    n_hat: &DefiningExpr,
    chart: &BoundaryChart,
    t: f64,
) -> Result<bool, ConvexifyError> {
    let shell: Vec<Vec<C>> = ball_grid(chart.n(), chart.eps0, 7)
        .into_iter()
        .filter(|w| cnorm(w) >= 0.85 * chart.eps0)
        .collect();
    let compiled = n_hat.compile();
    let mut scratch = Vec::new();
    for w in &shell {
        if compiled.eval(w, t, &mut scratch)?.re <= 0.0 {
            return Ok(false);
        }
    }
    Ok(!shell.is_empty())
}

/// Separation scan: on a window grid around p, the sampled closures of
/// `B \ D` (the bumped-in shell, since N is a subset of D) and of `D \ N`
/// must stay more than one grid cell diagonal apart. Points of `D \ N`
/// outside the window are farther away than anything inside it.
fn check_separation(
    family: &DomainFamily,
    t: f64,
    chart: &BoundaryChart,
    n_hat: &DefiningExpr,
    r_next: &DefiningExpr,
) -> Result<bool, ConvexifyError> {
    let n = family.n;
    let mut half = 2.0 * chart.eps1;
    for j in 0..n {
        let bx = family.box_bounds[2 * j];
        let by = family.box_bounds[2 * j + 1];
        half = half
            .min(chart.p[j].re - bx[0])
            .min(bx[1] - chart.p[j].re)
            .min(chart.p[j].im - by[0])
            .min(by[1] - chart.p[j].im);
    }
    if half <= 0.0 {
        return Ok(false);
    }
    let d = 2 * n;
    let g = SEPARATION_GRID;
    let h = 2.0 * half / (g - 1) as f64;
    let total = g.pow(d as u32);
    let nhat_c = n_hat.compile();
    let rnext_c = r_next.compile();

    // 0 = neither, 1 = closure(B \ D), 2 = closure(D \ N)
    let classes = par::map_indexed(total, |idx| -> Result<(u8, Vec<C>), EvalError> {
        let mut rem = idx;
        let mut z = Vec::with_capacity(n);
        for j in 0..n {
            let kx = rem % g;
            rem /= g;
            let ky = rem % g;
            rem /= g;
            z.push(C::new(
                chart.p[j].re - half + h * kx as f64,
                chart.p[j].im - half + h * ky as f64,
            ));
        }
        let mut scratch = Vec::new();
        let rv = family.eval_fast(&z, t, &mut scratch)?;
        let rnv = rnext_c.eval(&z, t, &mut scratch)?.re;
        if rv >= 0.0 && rnv <= 0.0 {
            return Ok((1, z));
        }
        if rv <= 0.0 {
            let w = chart.forward(&z);
            let in_n = cnorm(&w) < chart.eps0 && nhat_c.eval(&w, t, &mut scratch)?.re < 0.0;
            if !in_n {
                return Ok((2, z));
            }
        }
        Ok((0, z))
    });

    let mut set1 = Vec::new();
    let mut set2 = Vec::new();
    for c in classes {
        let (class, z) = c?;
        match class {
            1 => set1.push(z),
            2 => set2.push(z),
            _ => {}
        }
    }
    if set1.is_empty() || set2.is_empty() {
        return Ok(true);
    }
    let mut min_dist = f64::INFINITY;
    for u in &set1 {
        for v in &set2 {
            min_dist = min_dist.min(dist(u, v));
        }
    }
    Ok(min_dist > 1.01 * h * (d as f64).sqrt())
}

/// Sample the patch `boundary(D) intersect B_eps2(p)`: p itself plus
/// tangent offsets at radius 0.6 eps2, Newton-projected back to the
/// boundary along the normal.
fn boundary_patch(
    family: &DomainFamily,
    t: f64,
    chart: &BoundaryChart,
) -> Result<Vec<Vec<C>>, ConvexifyError> {
    let n = family.n;
    let p = &chart.p;
    let g = family.grad_z(p, t)?;
    let gn = g.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let nu: Vec<C> = g.iter().map(|v| v.conj() / gn).collect();

    let mut patch = vec![p.clone()];
    for axis in 0..2 * n {
        // real axis direction as a complex vector
        let mut dir = vec![C::new(0.0, 0.0); n];
        dir[axis / 2] = if axis % 2 == 0 { C::new(1.0, 0.0) } else { C::i() };
        // orthogonalize against the real normal
        let along: f64 = dir
            .iter()
            .zip(&nu)
            .map(|(a, b)| (a * b.conj()).re)
            .sum();
        for k in 0..n {
            dir[k] -= along * nu[k];
        }
        let norm = cnorm(&dir);
        if norm < 0.3 {
            continue;
        }
        let mut q: Vec<C> = (0..n)
            .map(|k| p[k] + 0.6 * chart.eps2 * dir[k] / norm)
            .collect();
        let mut ok = false;
        for _ in 0..20 {
            let rv = family.eval(&q, t)?;
            if rv.abs() <= 1e-11 {
                ok = true;
                break;
            }
            let gq = family.grad_z(&q, t)?;
            let slope: f64 = gq.iter().zip(&nu).map(|(a, b)| 2.0 * (a * b).re).sum();
            if slope.abs() < 1e-10 {
                break;
            }
            let step = rv / slope;
            for k in 0..n {
                q[k] -= step * nu[k];
            }
        }
        if ok && dist(&q, p) <= chart.eps2 {
            patch.push(q);
        }
    }
    Ok(patch)
}

/// Scan the Levi form of r_next along its zero set on rays from p. For a
/// sound bump this is the slightly perturbed boundary and stays positive;
/// an oversized delta drives it negative in the cutoff transition zone.
/// Rays that never cross (pointing inward) are skipped; returns +inf if no
/// ray crosses.
fn min_levi_on_next_zero_set(
    family: &DomainFamily,
    t: f64,
    chart: &BoundaryChart,
    r_next: &DefiningExpr,
) -> Result<f64, ConvexifyError> {
    let n = family.n;
    let dirs = family.boundary_directions(6);
    let reach = 2.0 * std::f64::consts::SQRT_2 * chart.eps2;
    let compiled = r_next.compile();
    let table = WirtingerTable::new(r_next);

    let per_dir = par::map_indexed(dirs.len(), |i| -> Result<Option<f64>, EvalError> {
        let d = &dirs[i];
        let mut scratch = Vec::new();
        let at = |s: f64, scratch: &mut Vec<C>| -> Result<f64, EvalError> {
            let z: Vec<C> = (0..n).map(|j| chart.p[j] + s * d[j]).collect();
            Ok(compiled.eval(&z, t, scratch)?.re)
        };
        let steps = 60;
        let mut lo = 0.0;
        let mut vlo = at(0.0, &mut scratch)?;
        let mut crossing = None;
        if vlo >= 0.0 {
            crossing = Some(0.0);
        } else {
            for k in 1..=steps {
                let s = reach * k as f64 / steps as f64;
                let v = at(s, &mut scratch)?;
                if v >= 0.0 {
                    // bisect [lo, s]
                    let mut a = lo;
                    let mut b = s;
                    for _ in 0..40 {
                        let m = 0.5 * (a + b);
                        if at(m, &mut scratch)? < 0.0 {
                            a = m;
                        } else {
                            b = m;
                        }
                    }
                    crossing = Some(0.5 * (a + b));
                    break;
                }
                lo = s;
                vlo = v;
            }
            let _ = vlo;
        }
        match crossing {
            None => Ok(None),
            Some(s) => {
                let z: Vec<C> = (0..n).map(|j| chart.p[j] + s * d[j]).collect();
                Ok(Some(table.at(&z, t)?.min_levi_eigenvalue()))
            }
        }
    });

    let mut min = f64::INFINITY;
    for r in per_dir {
        if let Some(v) = r? {
            min = min.min(v);
        }
    }
    Ok(min)
}

// ---------------------------------------------------------------------------
// small vector helpers
// ---------------------------------------------------------------------------

fn cdot(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

fn cnorm(a: &[C]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn dist(a: &[C], b: &[C]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expr;

    fn ball2() -> DomainFamily {
        DomainFamily::unit_ball(2)
    }

    fn boundary_p() -> Vec<C> {
        vec![C::new(1.0, 0.0), C::new(0.0, 0.0)]
    }

    /// |z1|^2 + |z2|^2 + 0.2 re(z1^2) - 1: strictly pseudoconvex with a
    /// genuine holomorphic Hessian, so the quadratic shear branch runs.
    fn tilted() -> (DomainFamily, Vec<C>) {
        let r = DefiningExpr::parse("abs2(z1) + abs2(z2) + 0.2*re(z1^2) - 1", 2).unwrap();
        let family = DomainFamily::new(
            r,
            vec![[-1.3, 1.3]; 4],
            [0.0, 1.0],
            vec![C::new(0.0, 0.0); 2],
            1e-9,
        )
        .unwrap();
        let x = (1.0_f64 / 1.2).sqrt();
        (family, vec![C::new(x, 0.0), C::new(0.0, 0.0)])
    }

    fn holo_hess_residue(rstar: &DefiningExpr, t: f64) -> f64 {
        let origin = vec![C::new(0.0, 0.0); rstar.n];
        let d = WirtingerTable::new(rstar).at(&origin, t).unwrap();
        let mut worst = 0.0_f64;
        for j in 0..rstar.n {
            for k in 0..rstar.n {
                worst = worst.max(d.holo_hess[(j, k)].norm());
            }
        }
        worst
    }

    #[test]
    fn ball_normalization_residues() {
        let family = ball2();
        let (chart, rstar) = narasimhan_normalize(&family, 0.0, &boundary_p()).unwrap();

        let origin = vec![C::new(0.0, 0.0); 2];
        assert!(rstar.eval(&origin, 0.0).unwrap().norm() < 1e-10);
        let d = WirtingerTable::new(&rstar).at(&origin, 0.0).unwrap();
        assert!(d.grad_z[0].norm() < 1e-10);
        assert!((d.grad_z[1] - C::new(0.0, 0.5)).norm() < 1e-10);
        assert!(holo_hess_residue(&rstar, 0.0) < 1e-10);

        // inner normal maps to +y_n: one step inside is negative, outside
        // positive
        let inside = vec![C::new(0.0, 0.0), C::new(0.0, 0.05)];
        let outside = vec![C::new(0.0, 0.0), C::new(0.0, -0.05)];
        assert!(rstar.eval(&inside, 0.0).unwrap().re < 0.0);
        assert!(rstar.eval(&outside, 0.0).unwrap().re > 0.0);

        assert!(chart.eps0 > 0.0 && chart.eps1 == 0.5 * chart.eps0);
        assert!(chart.eps2 <= chart.eps1 / chart.cstar);
        let v = verify_strict_convexity(&rstar, chart.eps0, 5, 0.0).unwrap();
        assert!(v > 0.0, "ball normal form not convex: {v}");
    }

    #[test]
    fn chart_expressions_invert_exactly() {
        // r*(psi(z)) must equal (exp(4 s r(z)) - 1)/4 as functions, which
        // pins both shear inverses as exact (no Taylor truncation).
        for (family, p) in [(ball2(), boundary_p()), tilted()] {
            let (chart, rstar) = narasimhan_normalize(&family, 0.0, &p).unwrap();
            let probes = [
                vec![p[0] - C::new(0.02, 0.0), p[1] + C::new(0.03, 0.01)],
                vec![p[0] + C::new(0.01, 0.02), p[1] - C::new(0.0, 0.04)],
                vec![p[0] - C::new(0.0, 0.05), p[1] + C::new(0.02, 0.0)],
            ];
            for z in &probes {
                let w = chart.forward(z);
                let got = rstar.eval(&w, 0.0).unwrap();
                let rv = family.eval(z, 0.0).unwrap();
                let want = ((4.0 * chart.scale * rv).exp() - 1.0) / 4.0;
                assert!(
                    (got - C::new(want, 0.0)).norm() < 1e-12,
                    "pullback mismatch: got {got}, want {want}"
                );
            }
        }
    }

    #[test]
    fn already_normal_form_is_fixed_shear() {
        // r = |z1|^2 + |z2|^2 - y_2 is its own normal form up to phi2.
        let r = DefiningExpr::parse("abs2(z1) + abs2(z2) - im(z2)", 2).unwrap();
        let family = DomainFamily::new(
            r,
            vec![[-2.0, 2.0]; 4],
            [0.0, 1.0],
            vec![C::new(0.0, 0.0), C::new(0.0, 0.3)],
            1e-9,
        )
        .unwrap();
        let p = vec![C::new(0.0, 0.0), C::new(0.0, 0.0)];
        let (chart, rstar) = narasimhan_normalize(&family, 0.0, &p).unwrap();

        // no holomorphic quadratic: phi1 is the identity
        for j in 0..2 {
            for k in 0..2 {
                assert!(chart.quad1.a[(j, k)].norm() < 1e-12);
            }
        }
        assert!(chart.quad1.b_alpha_n[0].norm() < 1e-12);
        assert!((chart.quad1.b_nn - 1.0).abs() < 1e-12);
        // S reduces to the identity for this gradient
        for j in 0..2 {
            for k in 0..2 {
                let want = if j == k { C::new(1.0, 0.0) } else { C::new(0.0, 0.0) };
                assert!((chart.s_matrix[(j, k)] - want).norm() < 1e-12);
            }
        }
        // psi is exactly the fixed quadratic shear in z2
        let z = vec![C::new(0.1, -0.05), C::new(0.04, 0.02)];
        let w = chart.forward(&z);
        assert!((w[0] - z[0]).norm() < 1e-15);
        let u = z[1];
        assert!((w[1] - (u + C::i() * u * u)).norm() < 1e-15);

        assert!(holo_hess_residue(&rstar, 0.0) < 1e-10);
    }

    #[test]
    fn normalize_rejects_bad_points() {
        let family = ball2();
        let interior = vec![C::new(0.0, 0.0); 2];
        assert!(matches!(
            narasimhan_normalize(&family, 0.0, &interior),
            Err(ConvexifyError::NotOnBoundary { .. })
        ));

        // r = (|z1|^2)^2 + (|z2|^2)^2 has a critical zero at the origin
        let r = DefiningExpr::parse("abs2(z1)^2 + abs2(z2)^2", 2).unwrap();
        let degenerate = DomainFamily::new(
            r,
            vec![[-1.0, 1.0]; 4],
            [0.0, 1.0],
            vec![C::new(0.0, 0.0); 2],
            1e-9,
        )
        .unwrap();
        assert!(matches!(
            narasimhan_normalize(&degenerate, 0.0, &interior),
            Err(ConvexifyError::DegenerateGradient { .. })
        ));

        // indefinite Levi form at p = (1, 0)
        let r = DefiningExpr::parse("abs2(z1) - abs2(z2) - 1", 2).unwrap();
        let saddle = DomainFamily::new(
            r,
            vec![[-2.0, 2.0]; 4],
            [0.0, 1.0],
            vec![C::new(0.0, 0.0); 2],
            1e-9,
        )
        .unwrap();
        assert!(matches!(
            narasimhan_normalize(&saddle, 0.0, &boundary_p()),
            Err(ConvexifyError::NotStrictlyPseudoconvex { .. })
        ));

        assert!(matches!(
            narasimhan_normalize(&family, 0.0, &[C::new(1.0, 0.0)]),
            Err(ConvexifyError::Dimension { .. })
        ));
    }

    #[test]
    fn convexity_scan_matches_hand_values() {
        // -y + |z|^2: real Hessian is 2 I, the linear term drops out
        let e = DefiningExpr::parse("abs2(z1) - im(z1)", 1).unwrap();
        let v = verify_strict_convexity(&e, 0.4, 5, 0.0).unwrap();
        assert!((v - 2.0).abs() < 1e-9, "got {v}");

        // re(z1^2) = x^2 - y^2: eigenvalues +-2
        let e = DefiningExpr::new(1, pow(Expr::Var(0), 2).re());
        let v = verify_strict_convexity(&e, 1.0, 5, 0.0).unwrap();
        assert!((v + 2.0).abs() < 1e-9, "got {v}");
    }

    #[test]
    fn tilted_family_residues_and_jacobian() {
        let (family, p) = tilted();
        let (chart, rstar) = narasimhan_normalize(&family, 0.0, &p).unwrap();

        // the quadratic branch of the shear inverse must have run
        let n = family.n;
        assert!(chart.quad1.a[(n - 1, n - 1)].norm() > 1e-3);

        let origin = vec![C::new(0.0, 0.0); 2];
        assert!(rstar.eval(&origin, 0.0).unwrap().norm() < 1e-10);
        let d = WirtingerTable::new(&rstar).at(&origin, 0.0).unwrap();
        assert!(d.grad_z[0].norm() < 1e-10);
        assert!((d.grad_z[1] - C::new(0.0, 0.5)).norm() < 1e-10);
        assert!(holo_hess_residue(&rstar, 0.0) < 1e-10);

        assert!(chart.min_jacobian_on_grid(5) > JACOBIAN_FLOOR);
        assert!(verify_strict_convexity(&rstar, chart.eps0, 5, 0.0).unwrap() > 0.0);
    }

    #[test]
    fn ball_bump_certificate_passes() {
        let family = ball2();
        let (chart, n_hat, r_next, cert) =
            certified_bump(&family, 0.0, &boundary_p()).unwrap();

        assert!(cert.is_valid());
        assert!(cert.min_real_hessian_eig > 0.0);
        assert!(cert.separation_ok);
        assert!(cert.nhat_compact);
        assert!(cert.min_levi_next > 0.0);
        assert!(!cert.covered_boundary_patch.is_empty());
        assert!(cert.patch_in_next);
        for q in &cert.covered_boundary_patch {
            assert!(dist(q, &chart.p) <= chart.eps2 + 1e-12);
            assert!(family.eval(q, 0.0).unwrap().abs() < 1e-10);
        }

        // monotone bumping: r_next <= r, strict inside the support, equal
        // outside
        let at_p = r_next.eval(&chart.p, 0.0).unwrap().re;
        assert!((at_p + chart.delta).abs() < 1e-12, "depth at p: {at_p}");
        let far = vec![C::new(0.0, 0.9), C::new(0.1, 0.0)];
        let rn = r_next.eval(&far, 0.0).unwrap().re;
        let rv = family.eval(&far, 0.0).unwrap();
        assert!((rn - rv).abs() < 1e-15);
        for s in [0.3, 0.9, 1.3, 2.0] {
            let z = vec![C::new(1.0 + s * chart.eps2, 0.0), C::new(0.0, 0.0)];
            let diff = r_next.eval(&z, 0.0).unwrap().re - family.eval(&z, 0.0).unwrap();
            assert!(diff <= 1e-15);
            let inside_support = s * s < 2.0;
            assert_eq!(diff < -1e-15, inside_support, "at radius factor {s}");
        }

        // Nhat stays inside the chart ball
        assert!(n_hat.eval(&vec![C::new(0.0, chart.eps0), C::new(0.0, 0.0)], 0.0)
            .unwrap()
            .re
            > 0.0);
    }

    #[test]
    fn zero_delta_bump_is_degenerate() {
        let family = ball2();
        let (mut chart, _) = narasimhan_normalize(&family, 0.0, &boundary_p()).unwrap();
        chart.delta = 0.0;
        let (_, r_next, cert) = build_bump(&family, 0.0, &chart).unwrap();
        // r_next == r identically
        for z in [
            vec![C::new(1.0, 0.0), C::new(0.0, 0.0)],
            vec![C::new(0.99, 0.01), C::new(0.02, 0.0)],
            vec![C::new(0.5, 0.2), C::new(0.1, -0.3)],
        ] {
            let a = r_next.eval(&z, 0.0).unwrap().re;
            let b = family.eval(&z, 0.0).unwrap();
            assert!((a - b).abs() < 1e-15);
        }
        assert!(cert.separation_ok, "empty bump separates trivially");
        assert!(!cert.patch_in_next, "patch sits on the unmoved boundary");
    }

    #[test]
    fn oversized_delta_reports_levi_failure() {
        let family = ball2();
        let (mut chart, _) = narasimhan_normalize(&family, 0.0, &boundary_p()).unwrap();
        chart.delta = 10.0;
        let (_, _, cert) = build_bump(&family, 0.0, &chart).unwrap();
        assert!(
            cert.min_levi_next <= 0.0,
            "oversized bump kept a positive Levi form: {}",
            cert.min_levi_next
        );
    }

    #[test]
    fn boundary_covering_covers_samples() {
        let family = ball2();
        let centers = boundary_covering(&family, 0.0, 0.8, 64).unwrap();
        assert!(!centers.is_empty() && centers.len() < 64);
        for b in family.sample_boundary(0.0, 12).unwrap() {
            let d = centers
                .iter()
                .map(|c| dist(&b.z, c))
                .fold(f64::INFINITY, f64::min);
            assert!(d <= 0.8, "uncovered boundary sample at distance {d}");
        }
    }

    #[test]
    fn cutoff_profiles_match_contract() {
        assert_eq!(cutoff_chi0(1.0), 0.0);
        assert_eq!(cutoff_chi0(0.5), 0.0);
        assert!(cutoff_chi0(1.5) > 0.0);
        assert_eq!(cutoff_chi1(0.5), 1.0);
        assert_eq!(cutoff_chi1(3.0), 0.0);

        // convexity scan: second central differences of chi0 on [0.5, 4]
        let h = 1e-4;
        let mut s = 0.5;
        while s <= 4.0 {
            let dd = cutoff_chi0(s + h) - 2.0 * cutoff_chi0(s) + cutoff_chi0(s - h);
            assert!(dd / (h * h) >= -1e-9, "concave at {s}");
            s += 0.01;
        }
    }
}
