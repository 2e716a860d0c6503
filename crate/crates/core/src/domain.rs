//! Parameter-dependent domain families `D^t = { z : r^t(z) < 0 }`.
//!
//! A family is a defining expression plus the data needed to sample it: a
//! real bounding box in `R^{2n}`, a parameter interval, a star-shape center
//! and a boundary classification tolerance. Boundary points are found by
//! root-refining `r` along rays from the center (bisection then Newton), so
//! every returned point re-evaluates to `|r| < 1e-10`.

use crate::expr::{CompiledExpr, DefiningExpr, EvalError, ParseError, C};
use crate::quad::HopfGrid;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_BOUNDARY_TOL: f64 = 1e-9;

/// Residual bound guaranteed for points returned by `sample_boundary`.
pub const BOUNDARY_RESIDUAL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum DomainError {
    #[error("invalid family config: {0}")]
    Config(String),
    #[error("config JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
    #[error("defining function is not real at a sampled box point (imaginary part {0:.3e})")]
    NotReal(f64),
    #[error("center is not interior at t={t}: r(center) = {value:.6e}")]
    CenterNotInterior { t: f64, value: f64 },
    #[error("ray {ray} found no boundary crossing inside the box at t={t}; domain may not be compactly contained in the box")]
    NoBoundaryCrossing { ray: usize, t: f64 },
    #[error("ray {ray} crosses the boundary {count} times at t={t}; domain is not star-shaped about the declared center")]
    NotStarShaped { ray: usize, t: f64, count: usize },
    #[error("gradient vanishes at the boundary point on ray {ray} (|r_z| = {norm:.3e})")]
    DegenerateGradient { ray: usize, norm: f64 },
    #[error("root refinement stalled on ray {ray}: |r| = {residual:.3e}")]
    RootRefinement { ray: usize, residual: f64 },
    #[error("openness probe failed at z={point:?}, t={t}: a grid neighbor is not interior")]
    OpennessViolation { point: Vec<f64>, t: f64 },
}

/// Classification of a point relative to `D^t` at tolerance `boundary_tol`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointClass {
    Interior,
    Boundary,
    Exterior,
}

/// JSON wire format for a family declaration.
///
/// `center` is a flat list of `2n` reals `x_1, y_1, ..., x_n, y_n`
/// (defaults to the origin); `box` lists `2n` closed intervals in the same
/// coordinate order.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub n: usize,
    pub r: String,
    #[serde(rename = "box")]
    pub box_bounds: Vec<[f64; 2]>,
    pub t_range: [f64; 2],
    #[serde(default)]
    pub center: Option<Vec<f64>>,
    #[serde(default = "default_boundary_tol")]
    pub boundary_tol: f64,
}

fn default_boundary_tol() -> f64 {
    DEFAULT_BOUNDARY_TOL
}

/// A boundary sample: root-refined point and unit outward normal, both in
/// complex coordinates. The normal is `conj(r_z)/|r_z|`, the complex
/// encoding of `grad r / |grad r|`.
#[derive(Debug, Clone)]
pub struct BoundaryPoint {
    pub z: Vec<C>,
    pub outward_normal: Vec<C>,
}

#[derive(Debug, Clone)]
pub struct DomainFamily {
    pub n: usize,
    pub r: DefiningExpr,
    /// `2n` intervals, coordinate order `x_1, y_1, ..., x_n, y_n`.
    pub box_bounds: Vec<[f64; 2]>,
    pub t_range: [f64; 2],
    pub center: Vec<C>,
    pub boundary_tol: f64,
    r_compiled: CompiledExpr,
    grad: Vec<DefiningExpr>,
    grad_compiled: Vec<CompiledExpr>,
}

impl DomainFamily {
    pub fn new(
        r: DefiningExpr,
        box_bounds: Vec<[f64; 2]>,
        t_range: [f64; 2],
        center: Vec<C>,
        boundary_tol: f64,
    ) -> Result<Self, DomainError> {
        let n = r.n;
        if box_bounds.len() != 2 * n {
            return Err(DomainError::Config(format!(
                "box needs {} intervals for n={}, got {}",
                2 * n,
                n,
                box_bounds.len()
            )));
        }
        for (k, iv) in box_bounds.iter().enumerate() {
            if !(iv[0] < iv[1]) || !iv[0].is_finite() || !iv[1].is_finite() {
                return Err(DomainError::Config(format!(
                    "box interval {k} = [{}, {}] is degenerate",
                    iv[0], iv[1]
                )));
            }
        }
        if !(0.0..=1.0).contains(&t_range[0]) || !(0.0..=1.0).contains(&t_range[1]) {
            return Err(DomainError::Config(
                "t_range must lie inside [0,1]".to_string(),
            ));
        }
        if t_range[0] > t_range[1] {
            return Err(DomainError::Config("t_range is reversed".to_string()));
        }
        if center.len() != n {
            return Err(DomainError::Config(format!(
                "center has {} complex coordinates, expected {}",
                center.len(),
                n
            )));
        }
        for (j, c) in center.iter().enumerate() {
            let (lo_x, hi_x) = (box_bounds[2 * j][0], box_bounds[2 * j][1]);
            let (lo_y, hi_y) = (box_bounds[2 * j + 1][0], box_bounds[2 * j + 1][1]);
            if c.re < lo_x || c.re > hi_x || c.im < lo_y || c.im > hi_y {
                return Err(DomainError::Config(format!(
                    "center coordinate {j} lies outside the box"
                )));
            }
        }
        if !(boundary_tol > 0.0) {
            return Err(DomainError::Config("boundary_tol must be > 0".to_string()));
        }
        let grad: Vec<DefiningExpr> = (0..n).map(|j| r.dz(j)).collect();
        let grad_compiled = grad.iter().map(|g| g.compile()).collect();
        let r_compiled = r.compile();
        Ok(DomainFamily {
            n,
            r,
            box_bounds,
            t_range,
            center,
            boundary_tol,
            r_compiled,
            grad,
            grad_compiled,
        })
    }

    pub fn from_config(cfg: &FamilyConfig) -> Result<Self, DomainError> {
        let r = DefiningExpr::parse(&cfg.r, cfg.n)?;
        let center = match &cfg.center {
            None => vec![C::new(0.0, 0.0); cfg.n],
            Some(flat) => {
                if flat.len() != 2 * cfg.n {
                    return Err(DomainError::Config(format!(
                        "center needs {} reals, got {}",
                        2 * cfg.n,
                        flat.len()
                    )));
                }
                flat.chunks(2).map(|p| C::new(p[0], p[1])).collect()
            }
        };
        let fam = Self::new(
            r,
            cfg.box_bounds.clone(),
            cfg.t_range,
            center,
            cfg.boundary_tol,
        )?;
        fam.validate_on_box()?;
        Ok(fam)
    }

    pub fn from_json_str(json: &str) -> Result<Self, DomainError> {
        let cfg: FamilyConfig = serde_json::from_str(json)?;
        Self::from_config(&cfg)
    }

    /// Sample the box and t-range on a coarse grid; reject configs whose
    /// defining function is non-finite or non-real anywhere sampled, or
    /// whose center is not interior.
    pub fn validate_on_box(&self) -> Result<(), DomainError> {
        // per-dim resolution capped so the total stays near 4^6 points
        let dims = 2 * self.n;
        let mut g = 2usize;
        while (g + 1).pow(dims as u32) * 5 <= 25_000 {
            g += 1;
        }
        let mut stack = Vec::new();
        let mut z = vec![C::new(0.0, 0.0); self.n];
        let t_samples = 5usize;
        let mut idx = vec![0usize; dims];
        loop {
            for j in 0..self.n {
                let fx = idx[2 * j] as f64 / (g - 1).max(1) as f64;
                let fy = idx[2 * j + 1] as f64 / (g - 1).max(1) as f64;
                let (bx, by) = (self.box_bounds[2 * j], self.box_bounds[2 * j + 1]);
                z[j] = C::new(
                    bx[0] + fx * (bx[1] - bx[0]),
                    by[0] + fy * (by[1] - by[0]),
                );
            }
            for k in 0..t_samples {
                let t = self.t_range[0]
                    + (self.t_range[1] - self.t_range[0]) * k as f64 / (t_samples - 1) as f64;
                let v = self.r_compiled.eval(&z, t, &mut stack)?;
                if !v.re.is_finite() {
                    return Err(DomainError::Config(format!(
                        "defining function non-finite at sampled box point {z:?}, t={t}"
                    )));
                }
                if v.im.abs() > 1e-12 * (1.0 + v.re.abs()) {
                    return Err(DomainError::NotReal(v.im));
                }
            }
            // odometer over the grid
            let mut d = 0;
            loop {
                if d == dims {
                    // center must be interior across t
                    for k in 0..=10 {
                        let t = self.t_range[0]
                            + (self.t_range[1] - self.t_range[0]) * k as f64 / 10.0;
                        let v = self.eval(&self.center, t)?;
                        if v >= -self.boundary_tol {
                            return Err(DomainError::CenterNotInterior { t, value: v });
                        }
                    }
                    return Ok(());
                }
                idx[d] += 1;
                if idx[d] < g {
                    break;
                }
                idx[d] = 0;
                d += 1;
            }
        }
    }

    /// Evaluate `r^t(z)`, enforcing a real result.
    pub fn eval(&self, z: &[C], t: f64) -> Result<f64, EvalError> {
        self.r.eval_real(z, t)
    }

    /// Hot-path evaluation without the reality check; `scratch` is reused
    /// across calls. Families from `from_config` were already validated
    /// real on the box.
    pub fn eval_fast(&self, z: &[C], t: f64, scratch: &mut Vec<C>) -> Result<f64, EvalError> {
        Ok(self.r_compiled.eval(z, t, scratch)?.re)
    }

    /// Holomorphic gradient `(dr/dz_1, ..., dr/dz_n)` at `(z, t)`.
    pub fn grad_z(&self, z: &[C], t: f64) -> Result<Vec<C>, EvalError> {
        let mut scratch = Vec::new();
        self.grad_compiled
            .iter()
            .map(|g| g.eval(z, t, &mut scratch))
            .collect()
    }

    /// Symbolic gradient components, for callers that differentiate further.
    pub fn grad_exprs(&self) -> &[DefiningExpr] {
        &self.grad
    }

    pub fn classify_point(&self, z: &[C], t: f64) -> Result<PointClass, EvalError> {
        let v = self.eval(z, t)?;
        Ok(if v < -self.boundary_tol {
            PointClass::Interior
        } else if v.abs() <= self.boundary_tol {
            PointClass::Boundary
        } else {
            PointClass::Exterior
        })
    }

    /// Unit outward normal `conj(r_z)/|r_z|` at a (boundary) point.
    pub fn outward_normal(&self, z: &[C], t: f64) -> Result<Vec<C>, DomainError> {
        let g = self.grad_z(z, t)?;
        let norm = g.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-12 {
            return Err(DomainError::DegenerateGradient { ray: 0, norm });
        }
        Ok(g.iter().map(|v| v.conj() / norm).collect())
    }

    /// Largest `s` with `center + s * omega` still inside the box.
    fn ray_exit(&self, omega: &[C]) -> f64 {
        let mut s_max = f64::INFINITY;
        for j in 0..self.n {
            for (comp, c0, iv) in [
                (omega[j].re, self.center[j].re, self.box_bounds[2 * j]),
                (omega[j].im, self.center[j].im, self.box_bounds[2 * j + 1]),
            ] {
                if comp > 1e-300 {
                    s_max = s_max.min((iv[1] - c0) / comp);
                } else if comp < -1e-300 {
                    s_max = s_max.min((iv[0] - c0) / comp);
                }
            }
        }
        s_max
    }

    /// Distance from the center to the boundary along the unit direction
    /// `omega`, root-refined to `|r| < 1e-12`. Errors if the ray has no
    /// crossing inside the box or more than one.
    pub fn boundary_distance_along(
        &self,
        t: f64,
        omega: &[C],
        ray: usize,
    ) -> Result<f64, DomainError> {
        self.ray_root(t, omega, ray, 400)
    }

    fn ray_root(
        &self,
        t: f64,
        omega: &[C],
        ray: usize,
        march_steps: usize,
    ) -> Result<f64, DomainError> {
        let s_max = self.ray_exit(omega);
        let mut scratch = Vec::new();
        let mut z = vec![C::new(0.0, 0.0); self.n];
        let at = |s: f64, z: &mut Vec<C>, scratch: &mut Vec<C>| -> Result<f64, EvalError> {
            for j in 0..self.n {
                z[j] = self.center[j] + s * omega[j];
            }
            Ok(self.r_compiled.eval(z, t, scratch)?.re)
        };
        let r0 = at(0.0, &mut z, &mut scratch)?;
        if r0 >= -self.boundary_tol {
            return Err(DomainError::CenterNotInterior { t, value: r0 });
        }
        let m = march_steps;
        let mut bracket = None;
        let mut crossings = 0usize;
        let mut prev_s = 0.0;
        let mut prev_r = r0;
        for k in 1..=m {
            let s = s_max * k as f64 / m as f64;
            let rv = at(s, &mut z, &mut scratch)?;
            if prev_r < 0.0 && rv >= 0.0 {
                crossings += 1;
                if bracket.is_none() {
                    bracket = Some((prev_s, s));
                }
            } else if prev_r >= 0.0 && rv < 0.0 {
                crossings += 1;
            }
            prev_s = s;
            prev_r = rv;
        }
        let _ = prev_s;
        if crossings == 0 {
            return Err(DomainError::NoBoundaryCrossing { ray, t });
        }
        if crossings > 1 {
            return Err(DomainError::NotStarShaped {
                ray,
                t,
                count: crossings,
            });
        }
        let (mut a, mut b) = bracket.unwrap();
        for _ in 0..40 {
            let mid = 0.5 * (a + b);
            if at(mid, &mut z, &mut scratch)? < 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        // Newton polish; derivative along the ray is 2 Re sum_j r_{z_j} omega_j
        let mut s = 0.5 * (a + b);
        for _ in 0..8 {
            for j in 0..self.n {
                z[j] = self.center[j] + s * omega[j];
            }
            let f = self.r_compiled.eval(&z, t, &mut scratch)?.re;
            let mut df = 0.0;
            for j in 0..self.n {
                let gj = self.grad_compiled[j].eval(&z, t, &mut scratch)?;
                df += 2.0 * (gj * omega[j]).re;
            }
            if df.abs() < 1e-14 {
                break;
            }
            let step = f / df;
            s -= step;
            if step.abs() < 1e-15 * (1.0 + s.abs()) {
                break;
            }
        }
        let residual = at(s, &mut z, &mut scratch)?.abs();
        if residual > 1e-12 {
            return Err(DomainError::RootRefinement { ray, residual });
        }
        Ok(s)
    }

    /// Unit ray directions used by `sample_boundary`: `resolution` equispaced
    /// angles for n=1, a `resolution x resolution x resolution` Hopf grid
    /// of S^3 directions for n=2.
    pub fn boundary_directions(&self, resolution: usize) -> Vec<Vec<C>> {
        match self.n {
            1 => crate::quad::circle_angles(resolution)
                .into_iter()
                .map(|th| vec![C::new(th.cos(), th.sin())])
                .collect(),
            2 => HopfGrid::new(resolution, resolution)
                .nodes
                .iter()
                .map(|node| node.omega.to_vec())
                .collect(),
            n => panic!("boundary sampling implemented for n = 1, 2 only (got n = {n})"),
        }
    }

    /// Root-refined boundary points with unit outward normals.
    pub fn sample_boundary(
        &self,
        t: f64,
        resolution: usize,
    ) -> Result<Vec<BoundaryPoint>, DomainError> {
        let dirs = self.boundary_directions(resolution);
        let results = crate::par::map_indexed(dirs.len(), |i| -> Result<BoundaryPoint, DomainError> {
            let omega = &dirs[i];
            let s = self.boundary_distance_along(t, omega, i)?;
            let z: Vec<C> = (0..self.n).map(|j| self.center[j] + s * omega[j]).collect();
            let g = self.grad_z(&z, t)?;
            let norm = g.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-12 {
                return Err(DomainError::DegenerateGradient { ray: i, norm });
            }
            let outward_normal = g.iter().map(|v| v.conj() / norm).collect();
            Ok(BoundaryPoint { z, outward_normal })
        });
        results.into_iter().collect()
    }

    /// Discrete openness check for the total space. Samples a uniform
    /// `grid_per_dim^{2n} x t_samples` grid; every point with
    /// `r < -4 (h_z |grad r| + h_t |r_t|)` (local slopes; the factor 4
    /// budgets gradient variation across one cell) must have all axis
    /// neighbors (in z and t) interior. Returns the number of deep-interior
    /// points checked.
    pub fn openness_probe(
        &self,
        grid_per_dim: usize,
        t_samples: usize,
    ) -> Result<usize, DomainError> {
        assert!(grid_per_dim >= 3 && t_samples >= 2);
        let dims = 2 * self.n;
        let steps: Vec<f64> = (0..dims)
            .map(|k| (self.box_bounds[k][1] - self.box_bounds[k][0]) / (grid_per_dim - 1) as f64)
            .collect();
        let h_t = (self.t_range[1] - self.t_range[0]) / (t_samples - 1) as f64;
        let coord = |k: usize, i: usize| self.box_bounds[k][0] + steps[k] * i as f64;
        let t_at = |m: usize| self.t_range[0] + h_t * m as f64;

        let total: usize = grid_per_dim.pow(dims as u32);
        let point_at = |flat: usize| -> Vec<usize> {
            let mut idx = vec![0usize; dims];
            let mut rem = flat;
            for slot in idx.iter_mut() {
                *slot = rem % grid_per_dim;
                rem /= grid_per_dim;
            }
            idx
        };
        let z_of = |idx: &[usize]| -> Vec<C> {
            (0..self.n)
                .map(|j| C::new(coord(2 * j, idx[2 * j]), coord(2 * j + 1, idx[2 * j + 1])))
                .collect()
        };

        let r_t_expr = self.r.dt().compile();
        let h_z = steps.iter().cloned().fold(0.0f64, f64::max);
        let mut scratch = Vec::new();

        let mut checked = 0usize;
        for flat in 0..total {
            let idx = point_at(flat);
            let z = z_of(&idx);
            for m in 0..t_samples {
                let t = t_at(m);
                let g = self.grad_z(&z, t)?;
                // real-gradient norm is 2 |r_z|
                let gn = 2.0 * g.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
                let rt = r_t_expr.eval(&z, t, &mut scratch)?.re.abs();
                let margin = 4.0 * (h_z * gn + h_t * rt);
                if self.eval(&z, t)? >= -margin {
                    continue;
                }
                checked += 1;
                // all 2*dims + 2 axis neighbors must be interior
                for d in 0..dims {
                    for dir in [-1isize, 1] {
                        let ni = idx[d] as isize + dir;
                        if ni < 0 || ni as usize >= grid_per_dim {
                            continue;
                        }
                        let mut nidx = idx.clone();
                        nidx[d] = ni as usize;
                        let nz = z_of(&nidx);
                        if self.eval(&nz, t)? >= 0.0 {
                            return Err(DomainError::OpennessViolation {
                                point: nz.iter().flat_map(|c| [c.re, c.im]).collect(),
                                t,
                            });
                        }
                    }
                }
                for dm in [-1isize, 1] {
                    let nm = m as isize + dm;
                    if nm < 0 || nm as usize >= t_samples {
                        continue;
                    }
                    if self.eval(&z, t_at(nm as usize))? >= 0.0 {
                        return Err(DomainError::OpennessViolation {
                            point: z.iter().flat_map(|c| [c.re, c.im]).collect(),
                            t,
                        });
                    }
                }
            }
        }
        Ok(checked)
    }

    // Builtin families used across tests and experiments.

    /// Unit ball `|z|^2 - 1 < 0` in C^n, box wide enough to classify
    /// exterior probes like `z = (2, 0)`.
    pub fn unit_ball(n: usize) -> Self {
        let terms: Vec<String> = (1..=n).map(|j| format!("abs2(z{j})")).collect();
        let r = DefiningExpr::parse(&format!("{}-1", terms.join("+")), n).unwrap();
        Self::new(
            r,
            vec![[-2.2, 2.2]; 2 * n],
            [0.0, 1.0],
            vec![C::new(0.0, 0.0); n],
            DEFAULT_BOUNDARY_TOL,
        )
        .unwrap()
    }

    /// Ellipsoid `|z_1|^2 + 4 |z_2|^2 - 1 < 0` in C^2.
    pub fn ellipsoid() -> Self {
        let r = DefiningExpr::parse("abs2(z1)+4*abs2(z2)-1", 2).unwrap();
        Self::new(
            r,
            vec![[-1.3, 1.3]; 4],
            [0.0, 1.0],
            vec![C::new(0.0, 0.0); 2],
            DEFAULT_BOUNDARY_TOL,
        )
        .unwrap()
    }

    /// Unit ball translated by `0.1 t` in the x_1 direction.
    pub fn shifted_ball(n: usize) -> Self {
        let mut terms = vec!["abs2(z1-0.1*t)".to_string()];
        for j in 2..=n {
            terms.push(format!("abs2(z{j})"));
        }
        let r = DefiningExpr::parse(&format!("{}-1", terms.join("+")), n).unwrap();
        Self::new(
            r,
            vec![[-1.6, 1.6]; 2 * n],
            [0.0, 1.0],
            vec![C::new(0.0, 0.0); n],
            DEFAULT_BOUNDARY_TOL,
        )
        .unwrap()
    }

    /// Exhaustion-function family variant (n=1, t in [1/2, 1]): sublevel set
    /// of `|z|^2 + t^2/(1 - t^2 |z/2|^2)` at level 1.5. The interior scaling
    /// keeps the denominator pole `|z| = 2/t` outside the box for every t in
    /// range, which a literal center shift cannot do.
    pub fn example_exhaustion() -> Self {
        let r = DefiningExpr::parse("abs2(z1)+t^2/(1-t^2*abs2(0.5*z1))-1.5", 1).unwrap();
        Self::new(
            r,
            vec![[-1.3, 1.3]; 2],
            [0.5, 1.0],
            vec![C::new(0.0, 0.0)],
            DEFAULT_BOUNDARY_TOL,
        )
        .unwrap()
    }
}

/// Cached boundary distances `rho(omega)` from the family center, sampled
/// on a uniform direction grid. Queries interpolate then Newton-polish
/// against the true defining function, so the cache resolution affects
/// speed, not accuracy. Built for one fixed `t`.
#[derive(Debug, Clone)]
pub struct RadialTable {
    pub t: f64,
    n: usize,
    m_u: usize,
    m_xi: usize,
    rho: Vec<f64>,
    rho_min: f64,
    rho_max: f64,
}

impl RadialTable {
    pub fn new(family: &DomainFamily, t: f64, resolution: usize) -> Result<Self, DomainError> {
        assert!(resolution >= 4);
        let (m_u, m_xi, dirs): (usize, usize, Vec<Vec<C>>) = match family.n {
            1 => {
                let dirs = crate::quad::circle_angles(resolution)
                    .into_iter()
                    .map(|th| vec![C::new(th.cos(), th.sin())])
                    .collect();
                (0, resolution, dirs)
            }
            2 => {
                let m_u = resolution;
                let m_xi = resolution;
                let mut dirs = Vec::with_capacity(m_u * m_xi * m_xi);
                for iu in 0..m_u {
                    let u = iu as f64 / (m_u - 1) as f64;
                    let (s1, s2) = ((1.0 - u).sqrt(), u.sqrt());
                    for i1 in 0..m_xi {
                        let xi1 = 2.0 * std::f64::consts::PI * i1 as f64 / m_xi as f64;
                        for i2 in 0..m_xi {
                            let xi2 = 2.0 * std::f64::consts::PI * i2 as f64 / m_xi as f64;
                            dirs.push(vec![
                                s1 * C::new(xi1.cos(), xi1.sin()),
                                s2 * C::new(xi2.cos(), xi2.sin()),
                            ]);
                        }
                    }
                }
                (m_u, m_xi, dirs)
            }
            n => panic!("radial tables implemented for n = 1, 2 only (got n = {n})"),
        };
        let rho: Vec<f64> = crate::par::map_indexed(dirs.len(), |i| {
            family.ray_root(t, &dirs[i], i, 48)
        })
        .into_iter()
        .collect::<Result<_, _>>()?;
        let rho_min = rho.iter().cloned().fold(f64::INFINITY, f64::min);
        let rho_max = rho.iter().cloned().fold(0.0, f64::max);
        Ok(RadialTable {
            t,
            n: family.n,
            m_u,
            m_xi,
            rho,
            rho_min,
            rho_max,
        })
    }

    /// Smallest cached boundary distance (collar-width budgeting).
    pub fn rho_min(&self) -> f64 {
        self.rho_min
    }

    /// Largest cached boundary distance (support-radius budgeting).
    pub fn rho_max(&self) -> f64 {
        self.rho_max
    }

    fn interpolate(&self, omega: &[C]) -> f64 {
        use std::f64::consts::PI;
        let wrap = |x: f64| x.rem_euclid(2.0 * PI);
        match self.n {
            1 => {
                let th = wrap(omega[0].im.atan2(omega[0].re));
                let p = th / (2.0 * PI) * self.m_xi as f64;
                let i0 = (p.floor() as usize) % self.m_xi;
                let f = p - p.floor();
                let a = self.rho[i0];
                let b = self.rho[(i0 + 1) % self.m_xi];
                a + f * (b - a)
            }
            _ => {
                let u = omega[1].norm_sqr().clamp(0.0, 1.0);
                let pu = u * (self.m_u - 1) as f64;
                let iu = (pu.floor() as usize).min(self.m_u - 2);
                let fu = pu - iu as f64;
                let xi1 = wrap(omega[0].im.atan2(omega[0].re));
                let xi2 = wrap(omega[1].im.atan2(omega[1].re));
                let p1 = xi1 / (2.0 * PI) * self.m_xi as f64;
                let p2 = xi2 / (2.0 * PI) * self.m_xi as f64;
                let i1 = (p1.floor() as usize) % self.m_xi;
                let i2 = (p2.floor() as usize) % self.m_xi;
                let f1 = p1 - p1.floor();
                let f2 = p2 - p2.floor();
                let at = |iu: usize, i1: usize, i2: usize| {
                    self.rho[(iu * self.m_xi + i1 % self.m_xi) * self.m_xi + i2 % self.m_xi]
                };
                let mut acc = 0.0;
                for (du, wu) in [(0, 1.0 - fu), (1, fu)] {
                    for (d1, w1) in [(0, 1.0 - f1), (1, f1)] {
                        for (d2, w2) in [(0, 1.0 - f2), (1, f2)] {
                            acc += wu * w1 * w2 * at(iu + du, i1 + d1, i2 + d2);
                        }
                    }
                }
                acc
            }
        }
    }

    /// Boundary distance along unit direction `omega`, interpolated from
    /// the cache and Newton-polished to `|r| < 1e-12`. `family` must be the
    /// one the table was built from.
    pub fn rho(&self, family: &DomainFamily, omega: &[C]) -> Result<f64, DomainError> {
        debug_assert_eq!(family.n, self.n);
        let guess = self.interpolate(omega);
        let mut s = guess;
        let mut z = vec![C::new(0.0, 0.0); self.n];
        let mut scratch = Vec::new();
        for _ in 0..8 {
            for j in 0..self.n {
                z[j] = family.center[j] + s * omega[j];
            }
            let f = family.r_compiled.eval(&z, self.t, &mut scratch)?.re;
            if f.abs() < 1e-13 {
                return Ok(s);
            }
            let mut df = 0.0;
            for j in 0..self.n {
                let gj = family.grad_compiled[j].eval(&z, self.t, &mut scratch)?;
                df += 2.0 * (gj * omega[j]).re;
            }
            if df.abs() < 1e-14 {
                break;
            }
            s -= f / df;
            if !(s.is_finite()) || s < 0.25 * guess || s > 4.0 * guess {
                break;
            }
        }
        // polish failed (coarse cache or tough geometry): full root-find
        family.ray_root(self.t, omega, 0, 400)
    }
}

/// Witness for a failed discrete upper semi-continuity check.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactnessViolation {
    /// Index of the parameter slice containing the escaping point.
    pub t_index: usize,
    /// Index of the escaping grid point.
    pub point_index: usize,
    /// Its distance to the neighboring slice's set.
    pub distance: f64,
}

/// Discrete upper semi-continuity of a family of sampled compact sets.
///
/// `member[ti][pi]` says whether grid point `pi` (coordinates
/// `points[pi]`) belongs to `K^{t_i}`. The family passes iff every point of
/// every slice lies within `eps` of each neighboring slice's set, which is
/// the grid version of "the total space is compact / K^t is upper
/// semi-continuous in t".
pub fn check_total_space_compactness(
    points: &[Vec<f64>],
    member: &[Vec<bool>],
    eps: f64,
) -> Result<(), CompactnessViolation> {
    assert!(!member.is_empty());
    for slice in member {
        assert_eq!(slice.len(), points.len());
    }
    let dist2 = |a: &[f64], b: &[f64]| -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
    };
    let slices: Vec<Vec<usize>> = member
        .iter()
        .map(|s| (0..s.len()).filter(|&i| s[i]).collect())
        .collect();
    for ti in 0..member.len() {
        for tj in [ti.wrapping_sub(1), ti + 1] {
            if tj >= member.len() {
                continue;
            }
            // every point of K^{tj} must be eps-close to K^{ti}
            for &p in &slices[tj] {
                let d2 = slices[ti]
                    .iter()
                    .map(|&q| dist2(&points[p], &points[q]))
                    .fold(f64::INFINITY, f64::min);
                if d2 > eps * eps {
                    return Err(CompactnessViolation {
                        t_index: tj,
                        point_index: p,
                        distance: d2.sqrt(),
                    });
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn classify_ball_points() {
        let fam = DomainFamily::unit_ball(2);
        let o = [C::new(0.0, 0.0), C::new(0.0, 0.0)];
        let b = [C::new(1.0, 0.0), C::new(0.0, 0.0)];
        let e = [C::new(2.0, 0.0), C::new(0.0, 0.0)];
        assert_eq!(fam.classify_point(&o, 0.3).unwrap(), PointClass::Interior);
        assert_eq!(fam.classify_point(&b, 0.3).unwrap(), PointClass::Boundary);
        assert_eq!(fam.classify_point(&e, 0.3).unwrap(), PointClass::Exterior);
    }

    #[test]
    fn circle_sampling_matches_sphere_geometry() {
        let fam = DomainFamily::unit_ball(1);
        let pts = fam.sample_boundary(0.0, 8).unwrap();
        assert_eq!(pts.len(), 8);
        for (k, p) in pts.iter().enumerate() {
            let th = 2.0 * std::f64::consts::PI * k as f64 / 8.0;
            let expect = C::new(th.cos(), th.sin());
            assert!((p.z[0] - expect).norm() < 1e-12);
            // sphere normal is the point itself
            assert!((p.outward_normal[0] - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn ellipsoid_axis_ray() {
        let fam = DomainFamily::ellipsoid();
        let dir = [C::new(0.0, 0.0), C::new(1.0, 0.0)];
        let s = fam.boundary_distance_along(0.0, &dir, 0).unwrap();
        assert_relative_eq!(s, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn boundary_residuals_on_builtin_families() {
        let cases = [
            (DomainFamily::unit_ball(2), 0.25),
            (DomainFamily::ellipsoid(), 0.5),
            (DomainFamily::shifted_ball(2), 0.75),
        ];
        for (fam, t) in cases {
            for p in fam.sample_boundary(t, 5).unwrap() {
                assert!(fam.eval(&p.z, t).unwrap().abs() < BOUNDARY_RESIDUAL);
                let n2: f64 = p.outward_normal.iter().map(|v| v.norm_sqr()).sum();
                assert_relative_eq!(n2, 1.0, epsilon = 1e-12);
            }
        }
        let fam = DomainFamily::example_exhaustion();
        for t in [0.5, 0.75, 1.0] {
            for p in fam.sample_boundary(t, 16).unwrap() {
                assert!(fam.eval(&p.z, t).unwrap().abs() < BOUNDARY_RESIDUAL);
            }
        }
    }

    #[test]
    fn non_star_shaped_ray_is_rejected() {
        // interior only for |z| < 0.2, negative again for |z| > 1
        let r = DefiningExpr::parse("(0.04-abs2(z1))*(abs2(z1)-1)", 1).unwrap();
        let fam = DomainFamily::new(
            r,
            vec![[-2.0, 2.0]; 2],
            [0.0, 1.0],
            vec![C::new(0.0, 0.0)],
            DEFAULT_BOUNDARY_TOL,
        )
        .unwrap();
        let err = fam
            .boundary_distance_along(0.0, &[C::new(1.0, 0.0)], 7)
            .unwrap_err();
        match err {
            DomainError::NotStarShaped { ray, count, .. } => {
                assert_eq!(ray, 7);
                assert!(count >= 2);
            }
            other => panic!("expected NotStarShaped, got {other:?}"),
        }
    }

    #[test]
    fn domain_leaking_out_of_box_is_rejected() {
        let r = DefiningExpr::parse("abs2(z1)-9", 1).unwrap();
        let fam = DomainFamily::new(
            r,
            vec![[-2.0, 2.0]; 2],
            [0.0, 1.0],
            vec![C::new(0.0, 0.0)],
            DEFAULT_BOUNDARY_TOL,
        )
        .unwrap();
        assert!(matches!(
            fam.boundary_distance_along(0.0, &[C::new(1.0, 0.0)], 0),
            Err(DomainError::NoBoundaryCrossing { .. })
        ));
    }

    #[test]
    fn config_round_trip_and_validation() {
        let json = r#"{ "n": 2, "r": "abs2(z1)+abs2(z2)-1", "box": [[-1.5,1.5],[-1.5,1.5],[-1.5,1.5],[-1.5,1.5]], "t_range": [0, 1], "center": [0,0,0,0], "boundary_tol": 1e-9 }"#;
        let fam = DomainFamily::from_json_str(json).unwrap();
        assert_eq!(fam.n, 2);
        assert_eq!(fam.boundary_tol, 1e-9);

        // unknown fields rejected
        let bad = r#"{ "n": 1, "r": "abs2(z1)-1", "box": [[-2,2],[-2,2]], "t_range": [0,1], "extra": 3 }"#;
        assert!(matches!(
            DomainFamily::from_json_str(bad),
            Err(DomainError::Json(_))
        ));

        // center defaulting
        let min = r#"{ "n": 1, "r": "abs2(z1)-1", "box": [[-2,2],[-2,2]], "t_range": [0,1] }"#;
        let fam = DomainFamily::from_json_str(min).unwrap();
        assert_eq!(fam.center, vec![C::new(0.0, 0.0)]);
        assert_eq!(fam.boundary_tol, DEFAULT_BOUNDARY_TOL);

        // center outside the domain rejected by validation
        let off = r#"{ "n": 1, "r": "abs2(z1)-1", "box": [[-2,2],[-2,2]], "t_range": [0,1], "center": [1.5, 0] }"#;
        assert!(matches!(
            DomainFamily::from_json_str(off),
            Err(DomainError::CenterNotInterior { .. })
        ));
    }

    #[test]
    fn radial_table_matches_direct_root_find() {
        let fam = DomainFamily::shifted_ball(1);
        let table = RadialTable::new(&fam, 0.6, 16).unwrap();
        for k in 0..37 {
            let th = 0.1 + 6.1 * k as f64 / 37.0;
            let dir = [C::new(th.cos(), th.sin())];
            let direct = fam.boundary_distance_along(0.6, &dir, 0).unwrap();
            let cached = table.rho(&fam, &dir).unwrap();
            assert!((direct - cached).abs() < 1e-11, "theta={th}");
        }

        let ell = DomainFamily::ellipsoid();
        let table = RadialTable::new(&ell, 0.0, 8).unwrap();
        assert!(table.rho_min() > 0.49 && table.rho_min() < 1.01);
        for k in 0..20 {
            let a = 0.3 + k as f64;
            let raw = [C::new(a.cos(), a.sin()), C::new((2.0 * a).cos(), (3.0 * a).sin())];
            let norm = (raw[0].norm_sqr() + raw[1].norm_sqr()).sqrt();
            let dir = [raw[0] / norm, raw[1] / norm];
            let rho = table.rho(&ell, &dir).unwrap();
            let z = [rho * dir[0], rho * dir[1]];
            assert!(ell.eval(&z, 0.0).unwrap().abs() < 1e-12);
        }
    }

    #[test]
    fn openness_probe_on_shifted_ball() {
        let fam = DomainFamily::shifted_ball(1);
        let checked = fam.openness_probe(15, 5).unwrap();
        assert!(checked > 0);
    }

    #[test]
    fn compactness_check_flags_jump() {
        // 2d grid on [-2.5, 2.5]^2
        let g = 26usize;
        let mut points = Vec::new();
        for i in 0..g {
            for j in 0..g {
                points.push(vec![
                    -2.5 + 5.0 * i as f64 / (g - 1) as f64,
                    -2.5 + 5.0 * j as f64 / (g - 1) as f64,
                ]);
            }
        }
        let radius_sets = |radius: Vec<f64>| -> Vec<Vec<bool>> {
            radius
                .iter()
                .map(|r| {
                    points
                        .iter()
                        .map(|p| p[0] * p[0] + p[1] * p[1] <= r * r)
                        .collect()
                })
                .collect()
        };
        let ts: Vec<f64> = (0..11).map(|k| k as f64 / 10.0).collect();

        let constant = radius_sets(ts.iter().map(|_| 1.0).collect());
        assert!(check_total_space_compactness(&points, &constant, 0.3).is_ok());

        let growing = radius_sets(ts.iter().map(|t| 1.0 + t).collect());
        assert!(check_total_space_compactness(&points, &growing, 0.45).is_ok());

        let jump = radius_sets(ts.iter().map(|t| if *t < 0.5 { 1.0 } else { 2.0 }).collect());
        let err = check_total_space_compactness(&points, &jump, 0.45).unwrap_err();
        // witness sits in the first slice of radius 2, i.e. near the jump
        assert_eq!(err.t_index, 5);
        assert!(err.distance > 0.45);
    }
}
