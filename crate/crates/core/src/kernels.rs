//! Cauchy-Fantappie kernel data: Levi polynomials, smoothed Hessian
//! coefficients, support-function checks, the Hefer decomposition, and the
//! kernel coefficient formulas for n <= 2.
//!
//! # Frozen kernel constants (n = 2)
//!
//! All kernels come from determinant forms with the prefactor
//! `c0 = (1/(2 pi i))^2 = -1/(4 pi^2)`. Volume conversion: with
//! `dV = dx1 dy1 dx2 dy2` and `dzeta_j = dx_j + i dy_j`,
//!
//! ```text
//! dzeta1 ^ dzeta2 ^ dzbar1 ^ dzbar2 = 4 dV.
//! ```
//!
//! Bochner-Martinelli volume kernel, `w0 = conj(zeta - z)`,
//! `Phi0 = |zeta - z|^2`:
//!
//! ```text
//! B = c0 (w0.dzeta) ^ (dbar w0 . dzeta) / Phi0^2,
//! B ^ (f1 dzbar1 + f2 dzbar2)
//!   = c0 (w0_1 f1 + w0_2 f2) / Phi0^2 * dzeta1^dzeta2^dzbar1^dzbar2
//!   = -(1/pi^2) sum_j f_j conj(zeta_j - z_j) / |zeta - z|^4 dV.
//! ```
//!
//! Transition kernel against a second Leray section `w1`,
//! `Phi1 = w1.(zeta - z)`; its wedge with a (0,2)-form `h dzbar1^dzbar2`:
//!
//! ```text
//! c0 (w0.dzeta) ^ (w1.dzeta) / (Phi0 Phi1) ^ h dzbar1^dzbar2
//!   = -(1/pi^2) (w0_1 w1_2 - w0_2 w1_1) h / (Phi0 Phi1) dV.
//! ```
//!
//! Boundary (Leray) kernel for a section `w` with `D_{kj} = dw_j/dzbar_k`:
//!
//! ```text
//! c0 (w.dzeta) ^ (dbar w.dzeta) / Phi^2
//!   = c0 / Phi^2 * sum_k (w2 D_{k1} - w1 D_{k2}) dzeta1 ^ dzeta2 ^ dzbar_k.
//! ```
//!
//! These expansions are verified term by term in the `wedge_expansion` test
//! with a brute-force exterior algebra. The overall signs are additionally
//! pinned by the reproducing and residual oracles in the solvers module.

use crate::calculus::WirtingerTable;
use crate::domain::{DomainError, DomainFamily};
use crate::expr::{DefiningExpr, EvalError, C};
use crate::quad::gauss_legendre_on;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("no kernel coefficients for n={n}, q={q} (supported: n in 1..=2, q=1)")]
    UnsupportedKernel { n: usize, q: usize },
    #[error("mollifier ball of radius {d} around the base point exits the box in real dim {dim}")]
    MollifierExitsBox { d: f64, dim: usize },
    #[error("Hefer decomposition residual {residual:.3e} exceeds 1e-12 (programming error)")]
    HeferResidual { residual: f64 },
    #[error("dbar of the Leray section needs third derivatives for HeferLevi coefficients; use a Convex map")]
    DbarWUnavailable,
    #[error("band pair sampling exhausted after producing {got} of {wanted} pairs")]
    SamplingExhausted { wanted: usize, got: usize },
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Second-order coefficient source for Levi polynomials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LeviCoeffs {
    /// Exact Wirtinger second derivatives of the defining function.
    Exact,
    /// Mollified derivatives, smoothing radius `d` per real coordinate.
    Smoothed { d: f64 },
}

/// The Levi polynomial of the defining function at a base point `zeta`:
///
/// ```text
/// F(z, zeta) = -sum_j grad_j (z_j - zeta_j)
///              - 1/2 sum_{jk} quad_{jk} (z_j - zeta_j)(z_k - zeta_k).
/// ```
///
/// `F(zeta, zeta) = 0` and `2 Re F = r(zeta) - r(z) + Levi form + O(|zeta-z|^3)`.
#[derive(Debug, Clone)]
pub struct LeviPolynomial {
    pub zeta: Vec<C>,
    /// r_zeta(zeta).
    pub grad: Vec<C>,
    /// Symmetric second-order coefficients b_{jk}(zeta), exact or smoothed.
    pub quad: DMatrix<C>,
    /// The Levi lower bound in force for support estimates.
    pub lambda0: f64,
}

impl LeviPolynomial {
    pub fn new(
        family: &DomainFamily,
        t: f64,
        zeta: &[C],
        coeffs: LeviCoeffs,
        lambda0: f64,
    ) -> Result<Self, KernelError> {
        let table = WirtingerTable::new(&family.r);
        Self::from_table(&table, family, t, zeta, coeffs, lambda0)
    }

    /// Constructor reusing a prebuilt derivative table (batch callers).
    pub fn from_table(
        table: &WirtingerTable,
        family: &DomainFamily,
        t: f64,
        zeta: &[C],
        coeffs: LeviCoeffs,
        lambda0: f64,
    ) -> Result<Self, KernelError> {
        let data = table.at(zeta, t)?;
        let quad = match coeffs {
            LeviCoeffs::Exact => data.holo_hess,
            LeviCoeffs::Smoothed { d } => smoothed_hessian_coeffs(family, t, zeta, d)?.a,
        };
        Ok(LeviPolynomial {
            zeta: zeta.to_vec(),
            grad: data.grad_z,
            quad,
            lambda0,
        })
    }

    /// F(z, zeta).
    pub fn eval(&self, z: &[C]) -> C {
        let n = self.zeta.len();
        let dz: Vec<C> = (0..n).map(|j| z[j] - self.zeta[j]).collect();
        let mut f = C::new(0.0, 0.0);
        for j in 0..n {
            f -= self.grad[j] * dz[j];
            for k in 0..n {
                f -= 0.5 * self.quad[(j, k)] * dz[j] * dz[k];
            }
        }
        f
    }
}

/// One-shot Levi polynomial value. Builds the symbolic derivative table on
/// every call; batch callers should hold a `LeviPolynomial` or `LerayMap`.
pub fn levi_polynomial(
    family: &DomainFamily,
    t: f64,
    zeta: &[C],
    z: &[C],
    coeffs: LeviCoeffs,
) -> Result<C, KernelError> {
    Ok(LeviPolynomial::new(family, t, zeta, coeffs, 0.0)?.eval(z))
}

/// Mollified holomorphic Hessian at `zeta`.
#[derive(Debug, Clone)]
pub struct SmoothedHessian {
    pub a: DMatrix<C>,
    /// max_{jk} |a_{jk} - exact_{jk}(zeta)|.
    pub deviation: f64,
}

/// Convolve the Wirtinger second derivatives with a tensor-product bump of
/// half-width `d`, by 16-node Gauss quadrature per real coordinate,
/// normalized by the quadrature mass of the bump. Also reports the deviation
/// from the exact Hessian at the base point.
pub fn smoothed_hessian_coeffs(
    family: &DomainFamily,
    t: f64,
    zeta: &[C],
    d: f64,
) -> Result<SmoothedHessian, KernelError> {
    assert!(d > 0.0, "smoothing radius must be positive");
    let n = family.n;
    for j in 0..n {
        for (dim, coord, iv) in [
            (2 * j, zeta[j].re, family.box_bounds[2 * j]),
            (2 * j + 1, zeta[j].im, family.box_bounds[2 * j + 1]),
        ] {
            if coord - d < iv[0] || coord + d > iv[1] {
                return Err(KernelError::MollifierExitsBox { d, dim });
            }
        }
    }

    // compiled upper triangle of d^2 r / dzeta_j dzeta_k
    let hess_exprs: Vec<(usize, usize, DefiningExpr)> = (0..n)
        .flat_map(|j| (j..n).map(move |k| (j, k)))
        .map(|(j, k)| (j, k, family.r.dz(j).dz(k)))
        .collect();
    let compiled: Vec<_> = hess_exprs
        .iter()
        .map(|(j, k, e)| (*j, *k, e.compile()))
        .collect();

    let (xs, ws) = gauss_legendre_on(-d, d, 16);
    let bump = |x: f64| {
        let u = x / d;
        if u.abs() >= 1.0 {
            0.0
        } else {
            (-1.0 / (1.0 - u * u)).exp()
        }
    };
    let dims = 2 * n;
    let mut acc = vec![C::new(0.0, 0.0); compiled.len()];
    let mut mass = 0.0;
    let mut idx = vec![0usize; dims];
    let mut w = vec![C::new(0.0, 0.0); n];
    let mut scratch = Vec::new();
    'outer: loop {
        let mut weight = 1.0;
        for (dim, &i) in idx.iter().enumerate() {
            weight *= ws[i] * bump(xs[i]);
            let x = xs[i];
            let j = dim / 2;
            if dim % 2 == 0 {
                w[j] = C::new(zeta[j].re - x, w[j].im);
            } else {
                w[j] = C::new(w[j].re, zeta[j].im - x);
            }
        }
        if weight != 0.0 {
            mass += weight;
            for (slot, (_, _, ce)) in compiled.iter().enumerate() {
                acc[slot] += weight * ce.eval(&w, t, &mut scratch)?;
            }
        }
        // odometer over the tensor grid
        for dim in 0..dims {
            idx[dim] += 1;
            if idx[dim] < xs.len() {
                continue 'outer;
            }
            idx[dim] = 0;
        }
        break;
    }

    let mut a = DMatrix::<C>::zeros(n, n);
    let mut deviation: f64 = 0.0;
    for (slot, (j, k, ce)) in compiled.iter().enumerate() {
        let val = acc[slot] / mass;
        a[(*j, *k)] = val;
        a[(*k, *j)] = val;
        let exact = ce.eval(zeta, t, &mut scratch)?;
        deviation = deviation.max((val - exact).norm());
    }
    Ok(SmoothedHessian { a, deviation })
}

#[derive(Debug, Clone)]
pub struct SupportWitness {
    pub zeta: Vec<C>,
    pub z: Vec<C>,
    pub slack: f64,
}

#[derive(Debug, Clone)]
pub struct SupportReport {
    pub pairs_checked: usize,
    pub min_slack: f64,
    /// The minimizing pair.
    pub witness: Option<SupportWitness>,
    pub pass: bool,
}

/// Check the support inequality of the Levi polynomial over sample pairs:
///
/// ```text
/// slack = 2 Re F(z, zeta) - [r(zeta) - r(z)] - c lambda0 |zeta - z|^2
/// ```
///
/// with `c = 1/2` for exact coefficients (Taylor leaves the full Levi form)
/// and `c = 1/4` for smoothed ones (half the budget absorbs the smoothing
/// deviation). Pass iff the minimum slack is >= -1e-9.
pub fn check_support_inequality(
    family: &DomainFamily,
    t: f64,
    coeffs: LeviCoeffs,
    pairs: &[(Vec<C>, Vec<C>)],
    lambda0: f64,
) -> Result<SupportReport, KernelError> {
    let frac = match coeffs {
        LeviCoeffs::Exact => 0.5,
        LeviCoeffs::Smoothed { .. } => 0.25,
    };
    let table = WirtingerTable::new(&family.r);
    let mut min_slack = f64::INFINITY;
    let mut witness = None;
    for (zeta, z) in pairs {
        let fp = LeviPolynomial::from_table(&table, family, t, zeta, coeffs, lambda0)?;
        let f = fp.eval(z);
        let r_zeta = family.eval(zeta, t)?;
        let r_z = family.eval(z, t)?;
        let dist2: f64 = zeta
            .iter()
            .zip(z)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let slack = 2.0 * f.re - (r_zeta - r_z) - frac * lambda0 * dist2;
        if slack < min_slack {
            min_slack = slack;
            witness = Some(SupportWitness {
                zeta: zeta.clone(),
                z: z.clone(),
                slack,
            });
        }
    }
    Ok(SupportReport {
        pairs_checked: pairs.len(),
        min_slack,
        witness,
        pass: min_slack >= -1e-9,
    })
}

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(1e-12..1.0);
    let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    (-2.0 * u1.ln()).sqrt() * u2.cos()
}

fn random_unit_direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<C> {
    loop {
        let v: Vec<C> = (0..n).map(|_| C::new(gaussian(rng), gaussian(rng))).collect();
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|c| c / norm).collect();
        }
    }
}

fn point_in_box(family: &DomainFamily, z: &[C]) -> bool {
    (0..family.n).all(|j| {
        let re_iv = family.box_bounds[2 * j];
        let im_iv = family.box_bounds[2 * j + 1];
        z[j].re >= re_iv[0] && z[j].re <= re_iv[1] && z[j].im >= im_iv[0] && z[j].im <= im_iv[1]
    })
}

/// Draw `count` pairs `(zeta, z)` for support/band scans: `zeta` on the
/// boundary of `D^t` along a random ray, `z` displaced by less than `d`
/// with `r(z) <= r(zeta)` and `z` in the box. Deterministic in `seed`.
pub fn sample_band_pairs(
    family: &DomainFamily,
    t: f64,
    count: usize,
    d: f64,
    seed: u64,
) -> Result<Vec<(Vec<C>, Vec<C>)>, KernelError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count {
        attempts += 1;
        if attempts > 400 * count.max(1) {
            return Err(KernelError::SamplingExhausted {
                wanted: count,
                got: out.len(),
            });
        }
        let omega = random_unit_direction(&mut rng, family.n);
        let s = match family.boundary_distance_along(t, &omega, out.len()) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let zeta: Vec<C> = (0..family.n)
            .map(|j| family.center[j] + s * omega[j])
            .collect();
        let dir = random_unit_direction(&mut rng, family.n);
        let radius = d * rng.gen::<f64>().powf(1.0 / (2.0 * family.n as f64));
        let z: Vec<C> = (0..family.n).map(|j| zeta[j] + radius * dir[j]).collect();
        if !point_in_box(family, &z) {
            continue;
        }
        if family.eval(&z, t)? <= family.eval(&zeta, t)? {
            out.push((zeta, z));
        }
    }
    Ok(out)
}

/// The explicit Hefer decomposition of a Levi polynomial:
/// `w_j(z) = grad_j + 1/2 sum_k quad_{jk} (z_k - zeta_k)` satisfies
/// `sum_j (zeta_j - z_j) w_j(z) = F(z, zeta)` identically.
#[derive(Debug, Clone)]
pub struct HeferDecomposition {
    pub zeta: Vec<C>,
    pub grad: Vec<C>,
    pub quad: DMatrix<C>,
}

impl HeferDecomposition {
    pub fn w(&self, z: &[C]) -> Vec<C> {
        let n = self.zeta.len();
        (0..n)
            .map(|j| {
                let mut wj = self.grad[j];
                for k in 0..n {
                    wj += 0.5 * self.quad[(j, k)] * (z[k] - self.zeta[k]);
                }
                wj
            })
            .collect()
    }

    pub fn phi(&self, z: &[C]) -> C {
        let w = self.w(z);
        self.zeta
            .iter()
            .zip(z)
            .zip(&w)
            .map(|((zj, z_j), wj)| (zj - z_j) * wj)
            .fold(C::new(0.0, 0.0), |acc, v| acc + v)
    }
}

/// Build the Hefer section of `F` and verify the decomposition identity at
/// 100 deterministic random probe points before returning.
pub fn hefer_w_levi(fp: &LeviPolynomial) -> Result<HeferDecomposition, KernelError> {
    let dec = HeferDecomposition {
        zeta: fp.zeta.clone(),
        grad: fp.grad.clone(),
        quad: fp.quad.clone(),
    };
    let n = fp.zeta.len();
    let mut rng = ChaCha8Rng::seed_from_u64(0x4845_4645);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let z: Vec<C> = (0..n)
            .map(|j| fp.zeta[j] + C::new(gaussian(&mut rng), gaussian(&mut rng)) * 0.3)
            .collect();
        let f = fp.eval(&z);
        let residual = (dec.phi(&z) - f).norm() / (1.0 + f.norm());
        worst = worst.max(residual);
    }
    if worst > 1e-12 {
        return Err(KernelError::HeferResidual { residual: worst });
    }
    Ok(dec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LerayKind {
    /// `w = r_zeta(zeta)`: valid globally for convex defining functions.
    Convex,
    /// Hefer section of the Levi polynomial: valid on the narrow band.
    HeferLevi,
}

/// A Leray section `w(zeta, z)` with its support function
/// `Phi(zeta, z) = w . (zeta - z)`.
pub struct LerayMap<'a> {
    pub kind: LerayKind,
    pub lambda0: f64,
    family: &'a DomainFamily,
    t: f64,
    coeffs: LeviCoeffs,
    table: WirtingerTable,
}

#[derive(Debug, Clone)]
pub struct BandReport {
    pub pairs_checked: usize,
    pub min_abs_phi: f64,
    /// min over pairs of |Phi| - (lambda0/4)|zeta - z|^2.
    pub min_slack: f64,
    pub pass: bool,
}

impl<'a> LerayMap<'a> {
    pub fn convex(family: &'a DomainFamily, t: f64, lambda0: f64) -> Self {
        LerayMap {
            kind: LerayKind::Convex,
            lambda0,
            family,
            t,
            coeffs: LeviCoeffs::Exact,
            table: WirtingerTable::new(&family.r),
        }
    }

    pub fn hefer_levi(
        family: &'a DomainFamily,
        t: f64,
        coeffs: LeviCoeffs,
        lambda0: f64,
    ) -> Self {
        LerayMap {
            kind: LerayKind::HeferLevi,
            lambda0,
            family,
            t,
            coeffs,
            table: WirtingerTable::new(&family.r),
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn w(&self, zeta: &[C], z: &[C]) -> Result<Vec<C>, KernelError> {
        match self.kind {
            LerayKind::Convex => Ok(self.table.at(zeta, self.t)?.grad_z),
            LerayKind::HeferLevi => {
                let fp = LeviPolynomial::from_table(
                    &self.table,
                    self.family,
                    self.t,
                    zeta,
                    self.coeffs,
                    self.lambda0,
                )?;
                let dec = hefer_w_levi(&fp)?;
                Ok(dec.w(z))
            }
        }
    }

    pub fn phi(&self, zeta: &[C], z: &[C]) -> Result<C, KernelError> {
        Ok(Self::pair(&self.w(zeta, z)?, zeta, z))
    }

    pub fn w_and_phi(&self, zeta: &[C], z: &[C]) -> Result<(Vec<C>, C), KernelError> {
        let w = self.w(zeta, z)?;
        let phi = Self::pair(&w, zeta, z);
        Ok((w, phi))
    }

    fn pair(w: &[C], zeta: &[C], z: &[C]) -> C {
        w.iter()
            .zip(zeta.iter().zip(z))
            .map(|(wj, (zj, z_j))| wj * (zj - z_j))
            .fold(C::new(0.0, 0.0), |acc, v| acc + v)
    }

    /// `dbar_zeta w` as the matrix with entry `(j, k) = dw_j / dzbar_k`.
    /// For the gradient section this is the Levi matrix; a HeferLevi
    /// section would need third derivatives of `r`, which are out of scope
    /// for boundary kernels.
    pub fn dbar_w(&self, zeta: &[C]) -> Result<DMatrix<C>, KernelError> {
        match self.kind {
            LerayKind::Convex => Ok(self.table.at(zeta, self.t)?.levi),
            LerayKind::HeferLevi => Err(KernelError::DbarWUnavailable),
        }
    }

    /// Scan `|Phi|` over sample pairs against the band lower bound.
    pub fn check_band(&self, pairs: &[(Vec<C>, Vec<C>)]) -> Result<BandReport, KernelError> {
        let mut min_abs = f64::INFINITY;
        let mut min_slack = f64::INFINITY;
        for (zeta, z) in pairs {
            let phi = self.phi(zeta, z)?;
            let dist2: f64 = zeta
                .iter()
                .zip(z)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum();
            min_abs = min_abs.min(phi.norm());
            min_slack = min_slack.min(phi.norm() - 0.25 * self.lambda0 * dist2);
        }
        Ok(BandReport {
            pairs_checked: pairs.len(),
            min_abs_phi: min_abs,
            min_slack,
            pass: min_slack >= -1e-9 && min_abs > 0.0,
        })
    }
}

/// Band bookkeeping for the support function: `eps = min(lambda0 d^2 / 64, delta1)`.
#[derive(Debug, Clone, Copy)]
pub struct BandParameters {
    pub lambda0: f64,
    pub d: f64,
    pub delta1: f64,
    pub eps: f64,
}

pub fn band_parameters(lambda0: f64, d: f64, delta1: f64) -> BandParameters {
    BandParameters {
        lambda0,
        d,
        delta1,
        eps: (lambda0 * d * d / 64.0).min(delta1),
    }
}

/// Kernel coefficient evaluators with frozen normalization constants.
/// See the module docs for the derivation; signs are pinned by the solver
/// oracles (disk `f = 1` and reproduction of constants).
#[derive(Debug, Clone, Copy)]
pub struct CfKernelSet {
    pub n: usize,
    pub q: usize,
    /// Volume (Bochner-Martinelli) constant: -1/pi for n=1, -1/pi^2 for n=2.
    pub bm_constant: f64,
    /// Transition kernel constant (n=2): -1/pi^2.
    pub transition_constant: f64,
    /// Boundary kernel constant: 1/(2 pi i) power n, as the real factor of
    /// the determinant form; -1/(4 pi^2) for n=2.
    pub boundary_constant: f64,
}

pub fn cf_kernel_coefficients(n: usize, q: usize) -> Result<CfKernelSet, KernelError> {
    match (n, q) {
        (1, 1) => Ok(CfKernelSet {
            n,
            q,
            bm_constant: -1.0 / PI,
            transition_constant: 0.0,
            boundary_constant: 0.0,
        }),
        (2, 1) => Ok(CfKernelSet {
            n,
            q,
            bm_constant: -1.0 / (PI * PI),
            transition_constant: -1.0 / (PI * PI),
            boundary_constant: -1.0 / (4.0 * PI * PI),
        }),
        _ => Err(KernelError::UnsupportedKernel { n, q }),
    }
}

impl CfKernelSet {
    /// n=1 boundary kernel `1/(2 pi i (zeta - z))`.
    pub fn cauchy(&self, zeta: C, z: C) -> C {
        C::new(0.0, -1.0 / (2.0 * PI)) / (zeta - z)
    }

    /// Volume kernel coefficient vector: the (0,1)-component weights such
    /// that `u(z) = integral sum_j coeff_j(zeta, z) f_j(zeta) dV(zeta)`.
    /// Shape: `conj(zeta_j - z_j) / |zeta - z|^(2n)` times the constant.
    pub fn bm_volume_coefficients(&self, zeta: &[C], z: &[C]) -> Vec<C> {
        let dist2: f64 = zeta
            .iter()
            .zip(z)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        let denom = dist2.powi(self.n as i32);
        zeta.iter()
            .zip(z)
            .map(|(a, b)| self.bm_constant * (a - b).conj() / denom)
            .collect()
    }

    /// Volume integrand: `sum_j coeff_j f_j` per unit dV.
    pub fn omega0_pairing(&self, zeta: &[C], z: &[C], f: &[C]) -> C {
        self.bm_volume_coefficients(zeta, z)
            .iter()
            .zip(f)
            .map(|(c, fj)| c * fj)
            .fold(C::new(0.0, 0.0), |acc, v| acc + v)
    }

    /// Transition integrand (n=2) against the (0,2) density
    /// `h12 = dbar_1 g_2 - dbar_2 g_1` of a (0,1)-form `g`:
    ///
    /// ```text
    /// const * (w0_1 w1_2 - w0_2 w1_1) h12 / (|zeta-z|^2 Phi1)
    /// ```
    pub fn transition_pairing(
        &self,
        zeta: &[C],
        z: &[C],
        w1: &[C],
        phi1: C,
        h12: C,
    ) -> C {
        debug_assert_eq!(self.n, 2);
        let w0: Vec<C> = zeta.iter().zip(z).map(|(a, b)| (a - b).conj()).collect();
        let phi0 = C::new(
            zeta.iter().zip(z).map(|(a, b)| (a - b).norm_sqr()).sum(),
            0.0,
        );
        let det = w0[0] * w1[1] - w0[1] * w1[0];
        self.transition_constant * det * h12 / (phi0 * phi1)
    }

    /// Boundary kernel coefficients (n=2): `c/Phi^2 * A_k` with
    /// `A_k = w_2 D_{k1} - w_1 D_{k2}`, the coefficient of
    /// `dzeta1 ^ dzeta2 ^ dzbar_k`. `dbar_w` entry `(j, k) = dw_j/dzbar_k`.
    pub fn omega1_coefficients(&self, w: &[C], dbar_w: &DMatrix<C>, phi: C) -> [C; 2] {
        debug_assert_eq!(self.n, 2);
        let phi2 = phi * phi;
        let a = |k: usize| w[1] * dbar_w[(0, k)] - w[0] * dbar_w[(1, k)];
        [
            self.boundary_constant * a(0) / phi2,
            self.boundary_constant * a(1) / phi2,
        ]
    }
}
