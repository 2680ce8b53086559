//! The Tikhonov-Mann and modified Halpern iterations.
//!
//! Tikhonov-Mann: `u_n = (1-β_n)u + β_n x_n`, `x_{n+1} = (1-λ_n)u_n + λ_n T u_n`.
//!
//! Modified Halpern: `v_n = (1-λ_n)y_n + λ_n T y_n`, `y_{n+1} = (1-β_{n+1})u + β_{n+1} v_n`.
//!
//! Started from `y_0 = (1-β_0)u + β_0 x_0`, the two are the same computation
//! read at different points: `u_n = y_n` and `x_{n+1} = v_n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::NonexpansiveMap;
use crate::schedules::Schedule;
use crate::space::WSpace;
use crate::Real;

/// Longest trajectory any run will produce.
pub const MAX_STEPS: usize = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IterationKind {
    TikhonovMann,
    ModifiedHalpern,
}

/// One run of either iteration.
///
/// `points[n]` is `x_n` or `y_n` for `n ≤ N`; `companions[n]` is `u_n` or `v_n`.
#[derive(Clone, Debug)]
pub struct Trajectory<P, T> {
    pub kind: IterationKind,
    pub anchor: P,
    pub points: Vec<P>,
    pub companions: Vec<P>,
    /// `d(a_n, a_{n+1})` for `n < N`.
    pub step_residuals: Vec<T>,
    /// `d(a_n, T a_n)` for `n ≤ N`.
    pub t_residuals: Vec<T>,
    /// `d(a_n, companion_n)` for `n ≤ N`; for Tikhonov-Mann this is `d(x_n, u_n)`.
    pub companion_gaps: Vec<T>,
    pub schedule_label: String,
}

impl<P, T: Real> Trajectory<P, T> {
    /// Number of points, `N + 1`.
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn n_steps(&self) -> usize {
        self.points.len().saturating_sub(1)
    }
}

fn check_steps(n_steps: usize) -> Result<()> {
    if n_steps > MAX_STEPS {
        return Err(Error::Config(format!(
            "n_steps = {n_steps} exceeds the cap of {MAX_STEPS}"
        )));
    }
    Ok(())
}

fn with_capacity<P, T>(kind: IterationKind, anchor: P, n: usize, label: String) -> Trajectory<P, T> {
    Trajectory {
        kind,
        anchor,
        points: Vec::with_capacity(n + 1),
        companions: Vec::with_capacity(n + 1),
        step_residuals: Vec::with_capacity(n),
        t_residuals: Vec::with_capacity(n + 1),
        companion_gaps: Vec::with_capacity(n + 1),
        schedule_label: label,
    }
}

/// Runs `n_steps` Tikhonov-Mann steps from `x0` with anchor `u`.
pub fn tikhonov_mann_run<S, M>(
    space: &S,
    op: &M,
    u: &S::Point,
    x0: &S::Point,
    schedule: &Schedule<S::Scalar>,
    n_steps: usize,
) -> Result<Trajectory<S::Point, S::Scalar>>
where
    S: WSpace,
    M: NonexpansiveMap<S::Point>,
{
    check_steps(n_steps)?;
    space.dist(u, x0)?;
    let mut traj = with_capacity(IterationKind::TikhonovMann, u.clone(), n_steps, schedule.label());
    let mut x = x0.clone();
    for n in 0..=n_steps as u64 {
        let un = space.comb(u, &x, schedule.beta(n))?;
        let tx = op.apply(&x)?;
        traj.t_residuals.push(space.dist(&x, &tx)?);
        traj.companion_gaps.push(space.dist(&x, &un)?);
        if n < n_steps as u64 {
            let tu = op.apply(&un)?;
            let next = space.comb(&un, &tu, schedule.lambda(n))?;
            traj.step_residuals.push(space.dist(&x, &next)?);
            traj.points.push(std::mem::replace(&mut x, next));
        } else {
            traj.points.push(x.clone());
        }
        traj.companions.push(un);
    }
    Ok(traj)
}

/// Runs `n_steps` modified Halpern steps from `y0` with anchor `u`.
/// `β_0` is never read.
pub fn modified_halpern_run<S, M>(
    space: &S,
    op: &M,
    u: &S::Point,
    y0: &S::Point,
    schedule: &Schedule<S::Scalar>,
    n_steps: usize,
) -> Result<Trajectory<S::Point, S::Scalar>>
where
    S: WSpace,
    M: NonexpansiveMap<S::Point>,
{
    check_steps(n_steps)?;
    space.dist(u, y0)?;
    let mut traj = with_capacity(IterationKind::ModifiedHalpern, u.clone(), n_steps, schedule.label());
    let mut y = y0.clone();
    for n in 0..=n_steps as u64 {
        let ty = op.apply(&y)?;
        traj.t_residuals.push(space.dist(&y, &ty)?);
        let vn = space.comb(&y, &ty, schedule.lambda(n))?;
        traj.companion_gaps.push(space.dist(&y, &vn)?);
        if n < n_steps as u64 {
            let next = space.comb(u, &vn, schedule.beta(n + 1))?;
            traj.step_residuals.push(space.dist(&y, &next)?);
            traj.points.push(std::mem::replace(&mut y, next));
        } else {
            traj.points.push(y.clone());
        }
        traj.companions.push(vn);
    }
    Ok(traj)
}

/// `y_0 = (1-β_0)u + β_0 x_0`.
pub fn link_start<S: WSpace>(
    space: &S,
    u: &S::Point,
    x0: &S::Point,
    schedule: &Schedule<S::Scalar>,
) -> Result<S::Point> {
    space.comb(u, x0, schedule.beta(0))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinkReport {
    pub n_steps: usize,
    /// `max_{n ≤ N} d(u_n, y_n)`.
    pub max_companion_deviation: f64,
    /// `max_{n < N} d(x_{n+1}, v_n)`.
    pub max_step_deviation: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Runs both iterations under the linking start and measures how far
/// `u_n = y_n`, `x_{n+1} = v_n` are from holding.
pub fn check_link<S, M>(
    space: &S,
    op: &M,
    u: &S::Point,
    x0: &S::Point,
    schedule: &Schedule<S::Scalar>,
    n_steps: usize,
    tol: f64,
) -> Result<LinkReport>
where
    S: WSpace,
    M: NonexpansiveMap<S::Point>,
{
    let tm = tikhonov_mann_run(space, op, u, x0, schedule, n_steps)?;
    let y0 = link_start(space, u, x0, schedule)?;
    let mh = modified_halpern_run(space, op, u, &y0, schedule, n_steps)?;
    link_report(space, &tm, &mh, tol)
}

/// Link deviations between existing runs of equal length.
pub fn link_report<S: WSpace>(
    space: &S,
    tm: &Trajectory<S::Point, S::Scalar>,
    mh: &Trajectory<S::Point, S::Scalar>,
    tol: f64,
) -> Result<LinkReport> {
    if tm.kind != IterationKind::TikhonovMann || mh.kind != IterationKind::ModifiedHalpern {
        return Err(Error::Consistency("link needs a Tikhonov-Mann and a modified Halpern run".into()));
    }
    if tm.len() != mh.len() {
        return Err(Error::Shape(format!(
            "trajectory lengths differ: {} vs {}",
            tm.len(),
            mh.len()
        )));
    }
    let mut dev_u = 0.0_f64;
    for (un, yn) in tm.companions.iter().zip(&mh.points) {
        dev_u = dev_u.max(space.dist(un, yn)?.as_f64());
    }
    let mut dev_x = 0.0_f64;
    for (xn1, vn) in tm.points.iter().skip(1).zip(&mh.companions) {
        dev_x = dev_x.max(space.dist(xn1, vn)?.as_f64());
    }
    Ok(LinkReport {
        n_steps: tm.n_steps(),
        max_companion_deviation: dev_u,
        max_step_deviation: dev_x,
        tol,
        pass: dev_u <= tol && dev_x <= tol,
    })
}

/// Residual sequences recomputed from stored points.
#[derive(Clone, Debug, PartialEq)]
pub struct Residuals<T> {
    /// `d(a_n, a_{n+1})`.
    pub step: Vec<T>,
    /// `d(a_n, T a_n)`.
    pub t: Vec<T>,
}

pub fn residuals<S, M>(space: &S, points: &[S::Point], op: &M) -> Result<Residuals<S::Scalar>>
where
    S: WSpace,
    M: NonexpansiveMap<S::Point>,
{
    let step = points
        .windows(2)
        .map(|w| space.dist(&w[0], &w[1]))
        .collect::<Result<Vec<_>>>()?;
    let t = points
        .iter()
        .map(|a| space.dist(a, &op.apply(a)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(Residuals { step, t })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{make_operator, FnMap, OperatorSpec};
    use crate::schedules::{harmonic_schedule, sabach_schedule};
    use crate::space::{Point, Space};

    fn line() -> Space<f64> {
        Space::euclidean(1).unwrap()
    }

    fn v(x: f64) -> Point<f64> {
        Point::vector(vec![x])
    }

    fn x(p: &Point<f64>) -> f64 {
        p.as_vector().unwrap()[0]
    }

    fn half_map() -> FnMap<Point<f64>, impl Fn(&Point<f64>) -> Point<f64>> {
        FnMap::new(|p: &Point<f64>| v(x(p) / 2.0), v(0.0))
    }

    #[test]
    fn identity_collapses_to_companion() {
        let s = line();
        let id = FnMap::new(|p: &Point<f64>| p.clone(), v(0.0));
        let (sched, _) = harmonic_schedule(0.3).unwrap();
        let t = tikhonov_mann_run(&s, &id, &v(2.0), &v(-1.0), &sched, 20).unwrap();
        for n in 0..20 {
            assert_eq!(x(&t.points[n + 1]), x(&t.companions[n]));
        }
    }

    #[test]
    fn negation_with_half_lambda_lands_on_zero() {
        let s = line();
        let op = make_operator(OperatorSpec::Negation, &s).unwrap();
        let (sched, _) = harmonic_schedule(0.5).unwrap();
        let t = tikhonov_mann_run(&s, &op, &v(0.7), &v(3.0), &sched, 10).unwrap();
        for p in &t.points[1..] {
            assert_eq!(x(p), 0.0);
        }
        let u = 0.7;
        let h = modified_halpern_run(&s, &op, &v(u), &v(3.0), &sched, 10).unwrap();
        for n in 0..10 {
            assert_eq!(x(&h.companions[n]), 0.0);
            let b = sched.beta(n as u64 + 1);
            assert_eq!(x(&h.points[n + 1]), (1.0 - b) * u);
        }
    }

    #[test]
    fn hand_stepped_first_iterate() {
        let s = line();
        let (sched, _) = harmonic_schedule(0.5).unwrap();
        let t = tikhonov_mann_run(&s, &half_map(), &v(0.0), &v(1.0), &sched, 3).unwrap();
        assert_eq!(x(&t.companions[0]), 0.0);
        assert_eq!(x(&t.points[1]), 0.0);
        assert_eq!(t.len(), 4);
        assert_eq!(t.step_residuals.len(), 3);
        assert_eq!(t.t_residuals.len(), 4);
    }

    #[test]
    fn halpern_stays_at_anchor_under_identity() {
        let s = line();
        let id = FnMap::new(|p: &Point<f64>| p.clone(), v(0.0));
        let (sched, _) = sabach_schedule(1.0).unwrap();
        let h = modified_halpern_run(&s, &id, &v(4.0), &v(4.0), &sched, 50).unwrap();
        assert!(h.points.iter().all(|p| x(p) == 4.0));
    }

    #[test]
    fn unit_lambda_is_classical_halpern() {
        let s = line();
        let op = half_map();
        let (sched, _) = harmonic_schedule(1.0).unwrap();
        let u = 0.3;
        let h = modified_halpern_run(&s, &op, &v(u), &v(2.0), &sched, 30).unwrap();
        // Oracle: y_{n+1} = (1-β_{n+1})u + β_{n+1} T y_n.
        let mut y = 2.0;
        for n in 0..30u64 {
            let b = 1.0 - 1.0 / (n as f64 + 2.0);
            y = (1.0 - b) * u + b * (y / 2.0);
            assert!((x(&h.points[n as usize + 1]) - y).abs() < 1e-15);
        }
    }

    #[test]
    fn link_is_exact_on_the_line() {
        let s = line();
        let (sched, _) = harmonic_schedule(0.5).unwrap();
        let rep = check_link(&s, &half_map(), &v(0.5), &v(1.0), &sched, 10_000, 1e-9).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.max_companion_deviation, 0.0);
        assert_eq!(rep.max_step_deviation, 0.0);
    }

    #[test]
    fn link_holds_on_the_tree() {
        let s = Space::<f64>::star_tree(3).unwrap();
        let op = make_operator(OperatorSpec::TreeHalving, &s).unwrap();
        let (sched, _) = sabach_schedule(0.5).unwrap();
        let sched = sched.with_beta0(0.6).unwrap();
        let u = Point::tree(1, 2.0);
        let x0 = Point::tree(2, 5.0);
        let rep = check_link(&s, &op, &u, &x0, &sched, 1000, 1e-9).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn cached_residuals_match_recomputation() {
        let s = Space::<f64>::euclidean(2).unwrap();
        let op = make_operator(OperatorSpec::Rotation { angle: 1.0 }, &s).unwrap();
        let (sched, _) = harmonic_schedule(0.5).unwrap();
        let u = Point::vector(vec![0.2, -0.1]);
        let t = tikhonov_mann_run(&s, &op, &u, &Point::vector(vec![1.0, 1.0]), &sched, 500).unwrap();
        let r = residuals(&s, &t.points, &op).unwrap();
        for (a, b) in r.step.iter().zip(&t.step_residuals) {
            assert!((a - b).abs() <= 1e-12);
        }
        for (a, b) in r.t.iter().zip(&t.t_residuals) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn residuals_of_simple_sequences() {
        let s = line();
        let op = make_operator(OperatorSpec::Negation, &s).unwrap();
        let pts: Vec<_> = (1..=6).map(|n| v(1.0 / n as f64)).collect();
        let r = residuals(&s, &pts, &op).unwrap();
        for n in 1..6 {
            let want = 1.0 / (n as f64 * (n as f64 + 1.0));
            assert!((r.step[n - 1] - want).abs() < 1e-15);
        }
        let r = residuals(&s, &vec![v(0.0); 4], &op).unwrap();
        assert!(r.step.iter().chain(&r.t).all(|&d| d == 0.0));
    }

    #[test]
    fn zero_steps_and_cap() {
        let s = line();
        let (sched, _) = harmonic_schedule(0.5).unwrap();
        let t = tikhonov_mann_run(&s, &half_map(), &v(0.0), &v(1.0), &sched, 0).unwrap();
        assert_eq!(t.len(), 1);
        assert!(t.step_residuals.is_empty());
        assert!(matches!(
            tikhonov_mann_run(&s, &half_map(), &v(0.0), &v(1.0), &sched, MAX_STEPS + 1),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn shape_errors_surface() {
        let s = line();
        let (sched, _) = harmonic_schedule(0.5).unwrap();
        let bad = Point::vector(vec![1.0, 2.0]);
        assert!(matches!(
            modified_halpern_run(&s, &half_map(), &v(0.0), &bad, &sched, 5),
            Err(Error::Shape(_))
        ));
    }
}
