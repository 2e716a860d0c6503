//! Wirtinger calculus on defining expressions, finite-difference dbar on
//! numerically-given functions, and discrete Holder norms.
//!
//! Derivatives of defining functions are symbolic (the grammar is closed
//! under d/dz_j, d/dzbar_j, d/dt), so Levi forms carry no differencing
//! noise. Solutions coming out of quadrature are only available pointwise;
//! those are differentiated by central differences.
//!
//! Convention fixed crate-wide: `d/dzbar = (1/2)(d/dx + i d/dy)`.

use crate::domain::DomainFamily;
use crate::expr::{CompiledExpr, DefiningExpr, EvalError, C};
use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CalculusError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("alpha = {0} outside (0, 1]")]
    BadAlpha(f64),
    #[error("t-grid with {len} nodes cannot support parameter derivatives of order {order}")]
    TGridTooCoarse { order: usize, len: usize },
    #[error("t-grid is not uniform (spacing varies by {0:.3e})")]
    NonUniformTGrid(f64),
    #[error("spatial order {0} > 1 not supported by the discrete norm")]
    UnsupportedSpatialOrder(f64),
}

/// First and second Wirtinger derivatives of a real defining function at a
/// point. `real_hess` is the ordinary Hessian in the interleaved real
/// coordinates `(x_1, y_1, ..., x_n, y_n)`.
#[derive(Debug, Clone)]
pub struct LeviData {
    /// dr/dz_j.
    pub grad_z: Vec<C>,
    /// Levi matrix d^2 r / dz_j dzbar_k, Hermitian by construction.
    pub levi: DMatrix<C>,
    /// Holomorphic Hessian d^2 r / dz_j dz_k, symmetric by construction.
    pub holo_hess: DMatrix<C>,
    /// 2n x 2n real Hessian, symmetric by construction.
    pub real_hess: DMatrix<f64>,
}

impl LeviData {
    /// Smallest eigenvalue of the Hermitian Levi matrix, computed through
    /// the symmetric real embedding [[A, -B], [B, A]] of L = A + iB.
    pub fn min_levi_eigenvalue(&self) -> f64 {
        let n = self.levi.nrows();
        let mut m = DMatrix::<f64>::zeros(2 * n, 2 * n);
        for j in 0..n {
            for k in 0..n {
                let l = self.levi[(j, k)];
                m[(j, k)] = l.re;
                m[(n + j, n + k)] = l.re;
                m[(j, n + k)] = -l.im;
                m[(n + j, k)] = l.im;
            }
        }
        min_symmetric_eigenvalue(&m)
    }

    /// Smallest eigenvalue of the real Hessian (convexity test).
    pub fn min_real_hess_eigenvalue(&self) -> f64 {
        min_symmetric_eigenvalue(&self.real_hess)
    }
}

pub(crate) fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// Compiled symbolic derivative tables of one defining expression, built
/// once and evaluated at many points.
#[derive(Debug, Clone)]
pub struct WirtingerTable {
    n: usize,
    grad: Vec<CompiledExpr>,
    /// upper triangle (j <= k), row-major
    levi: Vec<CompiledExpr>,
    holo: Vec<CompiledExpr>,
}

impl WirtingerTable {
    pub fn new(expr: &DefiningExpr) -> Self {
        let n = expr.n;
        let dz: Vec<DefiningExpr> = (0..n).map(|j| expr.dz(j)).collect();
        let grad = dz.iter().map(|d| d.compile()).collect();
        let mut levi = Vec::with_capacity(n * (n + 1) / 2);
        let mut holo = Vec::with_capacity(n * (n + 1) / 2);
        for j in 0..n {
            for k in j..n {
                levi.push(dz[j].dzbar(k).compile());
                holo.push(dz[j].dz(k).compile());
            }
        }
        WirtingerTable { n, grad, levi, holo }
    }

    fn tri_index(&self, j: usize, k: usize) -> usize {
        // row-major upper triangle with j <= k
        j * self.n - j * (j + 1) / 2 + k
    }

    pub fn at(&self, z: &[C], t: f64) -> Result<LeviData, EvalError> {
        let n = self.n;
        let mut scratch = Vec::new();
        let mut grad_z = Vec::with_capacity(n);
        for g in &self.grad {
            grad_z.push(g.eval(z, t, &mut scratch)?);
        }
        let mut levi = DMatrix::<C>::zeros(n, n);
        let mut holo = DMatrix::<C>::zeros(n, n);
        for j in 0..n {
            for k in j..n {
                let idx = self.tri_index(j, k);
                let l = self.levi[idx].eval(z, t, &mut scratch)?;
                let h = self.holo[idx].eval(z, t, &mut scratch)?;
                levi[(j, k)] = l;
                levi[(k, j)] = l.conj();
                holo[(j, k)] = h;
                holo[(k, j)] = h;
            }
        }
        // diagonal of a Hermitian matrix is real
        for j in 0..n {
            levi[(j, j)] = C::new(levi[(j, j)].re, 0.0);
        }
        let mut real_hess = DMatrix::<f64>::zeros(2 * n, 2 * n);
        for j in 0..n {
            for k in 0..n {
                let h = holo[(j, k)];
                let l = levi[(j, k)];
                let xx = 2.0 * (h + l).re;
                let yy = 2.0 * (l - h).re;
                let xy = 2.0 * (l - h).im;
                let yx = -2.0 * (l + h).im;
                real_hess[(2 * j, 2 * k)] = xx;
                real_hess[(2 * j + 1, 2 * k + 1)] = yy;
                real_hess[(2 * j, 2 * k + 1)] = xy;
                real_hess[(2 * j + 1, 2 * k)] = yx;
            }
        }
        // enforce exact symmetry against roundoff in the mirrored entries
        let sym = (&real_hess + real_hess.transpose()) * 0.5;
        Ok(LeviData {
            grad_z,
            levi,
            holo_hess: holo,
            real_hess: sym,
        })
    }
}

/// One-shot symbolic derivative bundle at a point.
pub fn wirtinger_derivatives(
    expr: &DefiningExpr,
    z: &[C],
    t: f64,
) -> Result<LeviData, EvalError> {
    WirtingerTable::new(expr).at(z, t)
}

/// Minimum over `samples` of the smallest Levi eigenvalue of the family's
/// defining function: the discrete lambda_0 of the strict pseudoconvexity
/// bound.
pub fn min_levi_eigenvalue(
    family: &DomainFamily,
    samples: &[Vec<C>],
    t: f64,
) -> Result<f64, CalculusError> {
    if samples.is_empty() {
        return Err(CalculusError::InsufficientSamples { needed: 1, got: 0 });
    }
    let table = WirtingerTable::new(&family.r);
    let mut min = f64::INFINITY;
    for z in samples {
        min = min.min(table.at(z, t)?.min_levi_eigenvalue());
    }
    Ok(min)
}

/// Central-difference dbar of a pointwise-given function: component j is
/// `(1/2) [ (u(z+he_j) - u(z-he_j))/(2h) + i (u(z+ihe_j) - u(z-ihe_j))/(2h) ]`.
///
/// The caller guarantees `u` is evaluable on the 4n-point stencil.
pub fn dbar_fd<F: Fn(&[C]) -> C>(u: F, z: &[C], h: f64) -> Vec<C> {
    let n = z.len();
    let i = C::new(0.0, 1.0);
    let mut out = Vec::with_capacity(n);
    let mut w = z.to_vec();
    for j in 0..n {
        let zj = z[j];
        w[j] = zj + h;
        let px = u(&w);
        w[j] = zj - h;
        let mx = u(&w);
        w[j] = zj + i * h;
        let py = u(&w);
        w[j] = zj - i * h;
        let my = u(&w);
        w[j] = zj;
        out.push(0.5 * ((px - mx) / (2.0 * h) + i * (py - my) / (2.0 * h)));
    }
    out
}

/// Discrete Holder data over a sampled point set.
#[derive(Debug, Clone)]
pub struct HolderEstimate {
    pub alpha: f64,
    pub seminorm: f64,
    pub sup_norm: f64,
    /// Pair of sample points attaining the seminorm.
    pub witness_pair: (Vec<f64>, Vec<f64>),
}

/// Pair-scan cap; larger sample sets are strided down to this size.
pub const HOLDER_PAIR_CAP: usize = 4000;

/// Exact max over sampled pairs of `|u(x)-u(y)| / |x-y|^alpha`, brute
/// force over at most [`HOLDER_PAIR_CAP`] samples (deterministic stride
/// subsampling beyond that).
pub fn holder_seminorm(
    samples: &[(Vec<f64>, C)],
    alpha: f64,
) -> Result<HolderEstimate, CalculusError> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(CalculusError::BadAlpha(alpha));
    }
    if samples.len() < 2 {
        return Err(CalculusError::InsufficientSamples {
            needed: 2,
            got: samples.len(),
        });
    }
    let stride = samples.len().div_ceil(HOLDER_PAIR_CAP);
    let picked: Vec<&(Vec<f64>, C)> = samples.iter().step_by(stride).collect();
    let mut sup_norm: f64 = 0.0;
    let mut seminorm: f64 = 0.0;
    let mut witness = (0usize, 1usize.min(picked.len() - 1));
    for (i, (_, v)) in picked.iter().enumerate() {
        sup_norm = sup_norm.max(v.norm());
        for (jj, (q, w)) in picked.iter().enumerate().skip(i + 1) {
            let p = &picked[i].0;
            let d2: f64 = p.iter().zip(q.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
            if d2 == 0.0 {
                continue;
            }
            let quot = (*v - *w).norm() / d2.sqrt().powf(alpha);
            if quot > seminorm {
                seminorm = quot;
                witness = (i, jj);
            }
        }
    }
    Ok(HolderEstimate {
        alpha,
        seminorm,
        sup_norm,
        witness_pair: (picked[witness.0].0.clone(), picked[witness.1].0.clone()),
    })
}

/// Values of a parameter family sampled on a fixed spatial point cloud and
/// a uniform t-grid: `values[ti][pi]` at `(points[pi], t_values[ti])`.
#[derive(Debug, Clone)]
pub struct FamilyGridSamples {
    pub points: Vec<Vec<f64>>,
    pub t_values: Vec<f64>,
    pub values: Vec<Vec<C>>,
}

/// Discrete mixed norm `max_{0<=i<=j} |d_t^i u|_{a-i}`: t-derivatives by
/// central differences on the uniform grid, each spatial seminorm a sup
/// norm plus (when `a-i > 0`) a Holder quotient of exponent `min(a-i, 1)`.
/// Negative spatial orders fall back to the sup norm; orders above 1 are
/// not supported by the discrete scan and are rejected.
pub fn family_norm(samples: &FamilyGridSamples, a: f64, j: usize) -> Result<f64, CalculusError> {
    let nt = samples.t_values.len();
    if nt < 2 * j + 1 {
        return Err(CalculusError::TGridTooCoarse { order: j, len: nt });
    }
    if a > 2.0 {
        return Err(CalculusError::UnsupportedSpatialOrder(a));
    }
    for (ti, row) in samples.values.iter().enumerate() {
        if row.len() != samples.points.len() {
            return Err(CalculusError::InsufficientSamples {
                needed: samples.points.len(),
                got: samples.values[ti].len(),
            });
        }
    }
    let dt = if nt >= 2 {
        let d0 = samples.t_values[1] - samples.t_values[0];
        for w in samples.t_values.windows(2) {
            if ((w[1] - w[0]) - d0).abs() > 1e-9 * (1.0 + d0.abs()) {
                return Err(CalculusError::NonUniformTGrid((w[1] - w[0]) - d0));
            }
        }
        d0
    } else {
        1.0
    };

    let mut norm: f64 = 0.0;
    for i in 0..=j {
        // i-th t-derivative at interior t nodes
        let rows: Vec<Vec<C>> = match i {
            0 => samples.values.clone(),
            1 => (1..nt - 1)
                .map(|k| {
                    (0..samples.points.len())
                        .map(|p| (samples.values[k + 1][p] - samples.values[k - 1][p]) / (2.0 * dt))
                        .collect()
                })
                .collect(),
            2 => (1..nt - 1)
                .map(|k| {
                    (0..samples.points.len())
                        .map(|p| {
                            (samples.values[k + 1][p] - 2.0 * samples.values[k][p]
                                + samples.values[k - 1][p])
                                / (dt * dt)
                        })
                        .collect()
                })
                .collect(),
            _ => return Err(CalculusError::TGridTooCoarse { order: i, len: nt }),
        };
        let b = (a - i as f64).max(0.0);
        if b > 1.0 {
            return Err(CalculusError::UnsupportedSpatialOrder(b));
        }
        for row in &rows {
            let sup = row.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
            let mut term = sup;
            if b > 0.0 && samples.points.len() >= 2 {
                let paired: Vec<(Vec<f64>, C)> = samples
                    .points
                    .iter()
                    .cloned()
                    .zip(row.iter().cloned())
                    .collect();
                term += holder_seminorm(&paired, b)?.seminorm;
            }
            norm = norm.max(term);
        }
    }
    Ok(norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::DefiningExpr;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn ball_levi_is_identity() {
        let e = DefiningExpr::parse("abs2(z1)+abs2(z2)-1", 2).unwrap();
        let z = [C::new(0.3, 0.1), C::new(-0.2, 0.4)];
        let d = wirtinger_derivatives(&e, &z, 0.0).unwrap();
        assert_eq!(d.grad_z[0], z[0].conj());
        assert_eq!(d.grad_z[1], z[1].conj());
        for j in 0..2 {
            for k in 0..2 {
                let expect = if j == k { 1.0 } else { 0.0 };
                assert!((d.levi[(j, k)] - C::new(expect, 0.0)).norm() < 1e-15);
                assert!(d.holo_hess[(j, k)].norm() < 1e-15);
            }
        }
        assert_relative_eq!(d.min_levi_eigenvalue(), 1.0, epsilon = 1e-12);
        // real Hessian of |z|^2 is 2 I
        for a in 0..4 {
            for b in 0..4 {
                let expect = if a == b { 2.0 } else { 0.0 };
                assert_relative_eq!(d.real_hess[(a, b)], expect, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn pluriharmonic_has_zero_levi() {
        let e = DefiningExpr::parse("re(z1^2)", 2).unwrap();
        let z = [C::new(0.5, -0.3), C::new(0.1, 0.2)];
        let d = wirtinger_derivatives(&e, &z, 0.0).unwrap();
        for j in 0..2 {
            for k in 0..2 {
                assert!(d.levi[(j, k)].norm() < 1e-15);
            }
        }
        assert!((d.holo_hess[(0, 0)] - C::new(1.0, 0.0)).norm() < 1e-15);
        assert!(d.holo_hess[(0, 1)].norm() < 1e-15);
        assert!(d.holo_hess[(1, 1)].norm() < 1e-15);
        // re(z^2) = x^2 - y^2 in the first variable
        assert_relative_eq!(d.real_hess[(0, 0)], 2.0, epsilon = 1e-14);
        assert_relative_eq!(d.real_hess[(1, 1)], -2.0, epsilon = 1e-14);
    }

    #[test]
    fn ellipsoid_min_levi_eig() {
        let fam = crate::domain::DomainFamily::ellipsoid();
        let samples = vec![
            vec![C::new(0.1, 0.0), C::new(0.0, 0.2)],
            vec![C::new(0.0, 0.0), C::new(0.0, 0.0)],
        ];
        let lam = min_levi_eigenvalue(&fam, &samples, 0.5).unwrap();
        assert_relative_eq!(lam, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn exhaustion_family_levi_positive() {
        let fam = crate::domain::DomainFamily::example_exhaustion();
        let table = WirtingerTable::new(&fam.r);
        for t in [0.5, 0.75, 1.0] {
            for k in 0..10 {
                let th = k as f64;
                let z = vec![0.08 * k as f64 * C::new(th.cos(), th.sin())];
                let d = table.at(&z, t).unwrap();
                assert!(d.min_levi_eigenvalue() > 0.0, "t={t} k={k}");
            }
        }
    }

    #[test]
    fn symbolic_hessian_matches_fd_on_builtins() {
        let families = [
            crate::domain::DomainFamily::unit_ball(2),
            crate::domain::DomainFamily::ellipsoid(),
            crate::domain::DomainFamily::shifted_ball(2),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let h = 1e-4;
        for fam in &families {
            let table = WirtingerTable::new(&fam.r);
            let n = fam.n;
            for _ in 0..25 {
                let z: Vec<C> = (0..n)
                    .map(|_| C::new(rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4)))
                    .collect();
                let t = rng.gen_range(fam.t_range[0]..=fam.t_range[1]);
                let d = table.at(&z, t).unwrap();
                // second central differences of r in real coordinates
                let eval = |w: &[f64]| -> f64 {
                    let zz: Vec<C> =
                        (0..n).map(|j| C::new(w[2 * j], w[2 * j + 1])).collect();
                    fam.eval(&zz, t).unwrap()
                };
                let x0: Vec<f64> = z.iter().flat_map(|c| [c.re, c.im]).collect();
                for a in 0..2 * n {
                    for b in 0..2 * n {
                        let mut pp = x0.clone();
                        let mut pm = x0.clone();
                        let mut mp = x0.clone();
                        let mut mm = x0.clone();
                        pp[a] += h;
                        pp[b] += h;
                        pm[a] += h;
                        pm[b] -= h;
                        mp[a] -= h;
                        mp[b] += h;
                        mm[a] -= h;
                        mm[b] -= h;
                        let fd =
                            (eval(&pp) - eval(&pm) - eval(&mp) + eval(&mm)) / (4.0 * h * h);
                        assert!(
                            (fd - d.real_hess[(a, b)]).abs() < 1e-6,
                            "entry ({a},{b}): fd={fd} sym={}",
                            d.real_hess[(a, b)]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn dbar_fd_matches_wirtinger_examples() {
        let z = [C::new(0.3, -0.2)];
        // u = conj(z): dbar = 1
        let d = dbar_fd(|w| w[0].conj(), &z, 1e-4);
        assert!((d[0] - C::new(1.0, 0.0)).norm() < 1e-10);
        // u = z: dbar = 0
        let d = dbar_fd(|w| w[0], &z, 1e-4);
        assert!(d[0].norm() < 1e-10);
        // u = |z|^2: dbar = z
        let d = dbar_fd(|w| C::new(w[0].norm_sqr(), 0.0), &z, 1e-4);
        assert!((d[0] - z[0]).norm() < 1e-10);
    }

    #[test]
    fn dbar_fd_exact_on_holomorphic_quadratics() {
        // the 4-point stencil is exact on holomorphic polynomials of
        // degree <= 2, up to roundoff
        let z = [C::new(0.4, 0.1), C::new(-0.3, 0.7)];
        let u = |w: &[C]| C::new(1.0, 2.0) * w[0] * w[0] + w[0] * w[1] - 3.0 * w[1] + 0.5;
        for c in dbar_fd(u, &z, 1e-3) {
            assert!(c.norm() < 1e-8, "residual {}", c.norm());
        }
    }

    #[test]
    fn dbar_fd_cubic_error_follows_h2_law() {
        // for holomorphic u the stencil residual is exactly h^2 u'''/6
        let z = [C::new(0.2, -0.1)];
        let u = |w: &[C]| w[0] * w[0] * w[0];
        for h in [1e-2, 1e-3] {
            let d = dbar_fd(u, &z, h)[0];
            let predicted = h * h; // u''' = 6, so h^2 * 6/6
            assert_relative_eq!(d.norm(), predicted, max_relative = 1e-4);
        }
    }

    #[test]
    fn holder_lipschitz_line() {
        let samples: Vec<(Vec<f64>, C)> = (0..=100)
            .map(|k| {
                let x = k as f64 / 100.0;
                (vec![x], C::new(x, 0.0))
            })
            .collect();
        let est = holder_seminorm(&samples, 1.0).unwrap();
        assert_relative_eq!(est.seminorm, 1.0, epsilon = 1e-12);
        assert_relative_eq!(est.sup_norm, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn holder_sqrt_grid_oracle() {
        // sqrt(|x|) with alpha = 1/2: the quotient |sqrt x - sqrt y| /
        // sqrt|x - y| equals 1 exactly on pairs (x, 0) and is below 1
        // elsewhere, so on a grid containing 0 the scan returns 1
        let samples: Vec<(Vec<f64>, C)> = (-100..=100)
            .map(|k| {
                let x = k as f64 / 100.0;
                (vec![x], C::new(x.abs().sqrt(), 0.0))
            })
            .collect();
        let est = holder_seminorm(&samples, 0.5).unwrap();
        assert_relative_eq!(est.seminorm, 1.0, epsilon = 1e-12);
        let (p, q) = est.witness_pair;
        assert!(p[0].abs() < 1e-12 || q[0].abs() < 1e-12, "witness must touch 0");
    }

    #[test]
    fn holder_constant_is_zero() {
        let samples: Vec<(Vec<f64>, C)> =
            (0..10).map(|k| (vec![k as f64], C::new(7.0, 0.0))).collect();
        assert_eq!(holder_seminorm(&samples, 0.5).unwrap().seminorm, 0.0);
    }

    proptest! {
        #[test]
        fn holder_monotone_under_inclusion(
            xs in proptest::collection::vec((-50i32..50, -50i32..50), 4..40),
            keep in proptest::collection::vec(any::<bool>(), 40)
        ) {
            let samples: Vec<(Vec<f64>, C)> = xs
                .iter()
                .map(|(p, v)| (vec![*p as f64 / 10.0], C::new(*v as f64 / 10.0, 0.0)))
                .collect();
            let subset: Vec<(Vec<f64>, C)> = samples
                .iter()
                .zip(keep.iter().cycle())
                .filter(|(_, k)| **k)
                .map(|(s, _)| s.clone())
                .collect();
            prop_assume!(subset.len() >= 2);
            let full = holder_seminorm(&samples, 0.5).unwrap().seminorm;
            let sub = holder_seminorm(&subset, 0.5).unwrap().seminorm;
            prop_assert!(sub <= full + 1e-12);
        }
    }

    #[test]
    fn family_norm_examples() {
        // spatial grid on the unit disk boundary-ish points
        let points: Vec<Vec<f64>> = (0..16)
            .map(|k| {
                let th = 2.0 * std::f64::consts::PI * k as f64 / 16.0;
                vec![0.8 * th.cos(), 0.8 * th.sin()]
            })
            .collect();
        let t_values: Vec<f64> = (0..5).map(|k| k as f64 / 4.0).collect();
        let zbar = |p: &[f64]| C::new(p[0], -p[1]);

        // u = zbar, constant in t: a=0, j=0 gives the sup norm
        let constant = FamilyGridSamples {
            points: points.clone(),
            t_values: t_values.clone(),
            values: t_values
                .iter()
                .map(|_| points.iter().map(|p| zbar(p)).collect())
                .collect(),
        };
        let n0 = family_norm(&constant, 0.0, 0).unwrap();
        assert_relative_eq!(n0, 0.8, epsilon = 1e-12);

        // u = t * zbar: the i=1 term is max |zbar|
        let linear = FamilyGridSamples {
            points: points.clone(),
            t_values: t_values.clone(),
            values: t_values
                .iter()
                .map(|t| points.iter().map(|p| *t * zbar(p)).collect())
                .collect(),
        };
        let n1 = family_norm(&linear, 0.0, 1).unwrap();
        assert_relative_eq!(n1, 0.8, epsilon = 1e-12);

        // too-coarse t grid is rejected
        let short = FamilyGridSamples {
            points,
            t_values: vec![0.0, 1.0],
            values: vec![constant.values[0].clone(), constant.values[0].clone()],
        };
        assert!(matches!(
            family_norm(&short, 0.0, 1),
            Err(CalculusError::TGridTooCoarse { .. })
        ));
    }
}
