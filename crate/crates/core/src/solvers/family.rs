//! Family-level driver: run one solver across a grid of parameter values
//! and measure how the solutions move with `t`.

use super::{
    bmk_solve, cauchy_pompeiu_report, BmkOptions, CpOptions, SolveReport, SolverError,
};
use crate::domain::DomainFamily;
use crate::expr::C;
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    CauchyPompeiu,
    Bmk,
}

/// Parameter-dependent data: scalar `f(z, t)` for n = 1, a (0,1)-form
/// `(f_1, f_2)(z, t)` for n = 2.
pub enum FamilyData<'a> {
    Scalar(&'a (dyn Fn(C, f64) -> C + Sync)),
    Form([&'a (dyn Fn(&[C], f64) -> C + Sync); 2]),
}

#[derive(Clone)]
pub struct FamilySolveOptions {
    pub kind: SolverKind,
    /// Strictly increasing, inside the family's t-range.
    pub t_values: Vec<f64>,
    /// Shared evaluation points; must be interior at every `t`.
    pub eval_points: Vec<Vec<C>>,
    pub cp: CpOptions,
    pub bmk: BmkOptions,
}

#[derive(Debug)]
pub struct FamilySolveOutcome {
    pub t_values: Vec<f64>,
    pub reports: Vec<Result<SolveReport, SolverError>>,
    /// `modulus[i] = max_k |u_{t_{i+1}}[k] - u_{t_i}[k]|`; NaN when either
    /// neighboring solve failed.
    pub modulus: Vec<f64>,
}

impl FamilySolveOutcome {
    /// Largest step modulus, ignoring failed steps.
    pub fn max_modulus(&self) -> f64 {
        self.modulus
            .iter()
            .filter(|m| m.is_finite())
            .fold(0.0, |a, m| a.max(*m))
    }
}

pub fn solve_family(
    family: &DomainFamily,
    data: &FamilyData<'_>,
    opts: &FamilySolveOptions,
) -> Result<FamilySolveOutcome, SolverError> {
    if opts.t_values.is_empty() {
        return Err(SolverError::Config("t_values is empty".into()));
    }
    if opts
        .t_values
        .windows(2)
        .any(|w| !(w[1] > w[0]))
    {
        return Err(SolverError::Config(
            "t_values must be strictly increasing".into(),
        ));
    }
    let [t_lo, t_hi] = family.t_range;
    if opts.t_values[0] < t_lo || *opts.t_values.last().unwrap() > t_hi {
        return Err(SolverError::Config(format!(
            "t_values extend outside the family range [{t_lo}, {t_hi}]"
        )));
    }
    if opts.eval_points.is_empty() {
        return Err(SolverError::Config("eval_points is empty".into()));
    }
    let shape_ok = matches!(
        (opts.kind, data),
        (SolverKind::CauchyPompeiu, FamilyData::Scalar(_))
            | (SolverKind::Bmk, FamilyData::Form(_))
    );
    if !shape_ok {
        return Err(SolverError::Config(
            "data shape does not match the solver kind".into(),
        ));
    }

    let reports: Vec<Result<SolveReport, SolverError>> =
        par::map_indexed(opts.t_values.len(), |i| {
            let t = opts.t_values[i];
            match (opts.kind, data) {
                (SolverKind::CauchyPompeiu, FamilyData::Scalar(g)) => {
                    let f = |z: C| g(z, t);
                    let pts: Vec<C> = opts.eval_points.iter().map(|p| p[0]).collect();
                    cauchy_pompeiu_report(family, t, &f, &pts, &opts.cp)
                }
                (SolverKind::Bmk, FamilyData::Form([g0, g1])) => {
                    let f0 = |z: &[C]| g0(z, t);
                    let f1 = |z: &[C]| g1(z, t);
                    bmk_solve(family, t, [&f0, &f1], &opts.eval_points, &opts.bmk)
                }
                _ => unreachable!("shape validated above"),
            }
        });

    let modulus = (0..opts.t_values.len().saturating_sub(1))
        .map(|i| match (&reports[i], &reports[i + 1]) {
            (Ok(a), Ok(b)) => a
                .u
                .iter()
                .zip(&b.u)
                .map(|(x, y)| (y - x).norm())
                .fold(0.0, f64::max),
            _ => f64::NAN,
        })
        .collect();

    Ok(FamilySolveOutcome {
        t_values: opts.t_values.clone(),
        reports,
        modulus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainFamily;
    use crate::expr::DefiningExpr;

    fn shifted_disk() -> DomainFamily {
        DomainFamily::new(
            DefiningExpr::parse("abs2(z1 - 0.1*t) - 1", 1).unwrap(),
            vec![[-1.6, 1.6], [-1.6, 1.6]],
            [0.0, 1.0],
            vec![C::new(0.0, 0.0)],
            1e-9,
        )
        .unwrap()
    }

    fn cp_options(t_values: Vec<f64>) -> FamilySolveOptions {
        FamilySolveOptions {
            kind: SolverKind::CauchyPompeiu,
            t_values,
            eval_points: vec![vec![C::new(0.2, 0.1)]],
            cp: CpOptions {
                resolution: 48,
                check_points: 4,
                ..CpOptions::default()
            },
            bmk: BmkOptions::default(),
        }
    }

    #[test]
    fn shifted_disk_modulus_halves_with_step() {
        // dbar u = 1 on |z - 0.1t| < 1 has u = conj(z - 0.1t), so the
        // step modulus is exactly 0.1 * dt.
        let fam = shifted_disk();
        let one = |_z: C, _t: f64| C::new(1.0, 0.0);
        let data = FamilyData::Scalar(&one);
        let coarse = solve_family(&fam, &data, &cp_options(vec![0.0, 0.5, 1.0])).unwrap();
        let fine = solve_family(
            &fam,
            &data,
            &cp_options(vec![0.0, 0.25, 0.5, 0.75, 1.0]),
        )
        .unwrap();
        let ratio = coarse.max_modulus() / fine.max_modulus();
        assert!(
            (1.5..=2.5).contains(&ratio),
            "halving ratio {ratio} (coarse {}, fine {})",
            coarse.max_modulus(),
            fine.max_modulus()
        );
        assert!((coarse.max_modulus() - 0.05).abs() < 1e-6);
    }

    #[test]
    fn t_independent_family_has_zero_modulus() {
        let fam = DomainFamily::unit_ball(1);
        let data_fn = |z: C, _t: f64| z.conj() + C::new(0.3, 0.0);
        let data = FamilyData::Scalar(&data_fn);
        let out = solve_family(&fam, &data, &cp_options(vec![0.0, 0.5, 1.0])).unwrap();
        for m in &out.modulus {
            assert!(
                *m < 1e-14,
                "t-independent problem moved by {m} between steps"
            );
        }
    }

    #[test]
    fn linear_in_t_data_scales_linearly() {
        let fam = DomainFamily::unit_ball(1);
        let data_fn = |z: C, t: f64| t * z.conj();
        let data = FamilyData::Scalar(&data_fn);
        let out = solve_family(&fam, &data, &cp_options(vec![0.25, 0.5, 1.0])).unwrap();
        let u1 = out.reports[2].as_ref().unwrap().u[0];
        for (i, t) in [0.25, 0.5].iter().enumerate() {
            let ut = out.reports[i].as_ref().unwrap().u[0];
            assert!(
                (ut - t * u1).norm() < 1e-8,
                "u^{t} = {ut} vs t*u^1 = {}",
                t * u1
            );
        }
    }

    #[test]
    fn rejects_bad_grids_and_mismatched_data() {
        let fam = DomainFamily::unit_ball(1);
        let one = |_z: C, _t: f64| C::new(1.0, 0.0);
        let data = FamilyData::Scalar(&one);
        let err = solve_family(&fam, &data, &cp_options(vec![])).unwrap_err();
        assert!(matches!(err, SolverError::Config(_)));
        let err = solve_family(&fam, &data, &cp_options(vec![0.5, 0.5])).unwrap_err();
        assert!(matches!(err, SolverError::Config(_)));
        let err = solve_family(&fam, &data, &cp_options(vec![0.0, 1.5])).unwrap_err();
        assert!(matches!(err, SolverError::Config(_)));

        let mut opts = cp_options(vec![0.0, 1.0]);
        opts.kind = SolverKind::Bmk;
        let err = solve_family(&fam, &data, &opts).unwrap_err();
        assert!(matches!(err, SolverError::Config(_)));
    }
}
