//! Rates of metastability and the transfer of such rates across the link.
//!
//! `Ω` is a rate of metastability for `(a_n)` if for every `k` and every
//! counter `g: ℕ -> ℕ` some `N ≤ Ω(k, g)` has
//! `d(a_i, a_j) ≤ 1/(k+1)` for all `i, j ∈ [N, N + g(N)]`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::modulus::sat_mul;
use crate::rates::{RateCertificate, ResidualKind, Subject};
use crate::space::WSpace;
use crate::Real;

/// A named counter function `g: ℕ -> ℕ`.
#[derive(Clone)]
pub struct Counter {
    f: Arc<dyn Fn(u64) -> u64 + Send + Sync>,
    label: Arc<str>,
}

impl fmt::Debug for Counter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Counter({})", self.label)
    }
}

impl Counter {
    pub fn new(label: impl Into<String>, f: impl Fn(u64) -> u64 + Send + Sync + 'static) -> Self {
        Self {
            f: Arc::new(f),
            label: Arc::from(label.into()),
        }
    }

    pub fn eval(&self, n: u64) -> u64 {
        (self.f)(n)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn constant(c: u64) -> Self {
        Self::new(c.to_string(), move |_| c)
    }

    /// `n ↦ a·n + b`, saturating.
    pub fn affine(a: u64, b: u64) -> Self {
        let label = match (a, b) {
            (0, b) => b.to_string(),
            (1, 0) => "n".to_string(),
            (a, 0) => format!("{a}n"),
            (1, b) => format!("n+{b}"),
            (a, b) => format!("{a}n+{b}"),
        };
        Self::new(label, move |n| sat_mul(a, n).saturating_add(b))
    }

    /// Named presets: `"1"`, `"10"`, `"n"`, `"2n"`, or any `"a*n+b"` form
    /// accepted by [`Counter::parse`].
    pub fn preset(name: &str) -> Result<Self> {
        Self::parse(name)
    }

    /// Parses `c`, `n`, `an`, `a*n`, `n+b`, `an+b`, `a*n+b` (whitespace ignored).
    pub fn parse(text: &str) -> Result<Self> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::Config(format!("counter {text:?} is not of the form a*n+b"));
        let num = |t: &str| t.parse::<u64>().map_err(|_| bad());
        let (lin, b) = match s.split_once('+') {
            Some((l, r)) => (l.to_string(), num(r)?),
            None => (s.clone(), 0),
        };
        let a = match lin.strip_suffix('n') {
            None => return if s.contains('+') { Err(bad()) } else { Ok(Self::constant(num(&lin)?)) },
            Some("") => 1,
            Some(coef) => num(coef.strip_suffix('*').unwrap_or(coef))?,
        };
        Ok(Self::affine(a, b))
    }

    /// `g_q(n) = g(n + q) + q`.
    pub fn shifted(&self, q: u64) -> Self {
        let g = self.clone();
        Self::new(format!("({})_{q}", self.label), move |n| {
            g.eval(n.saturating_add(q)).saturating_add(q)
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetaOrigin {
    ClosedForm,
    /// Read off one trajectory; valid for that instance only.
    Empirical,
    Transformed,
}

type MetaFn = Arc<dyn Fn(u64, &Counter) -> u64 + Send + Sync>;

/// A claimed rate of metastability `(k, g) ↦ N`.
#[derive(Clone)]
pub struct MetaRate {
    pub name: String,
    pub subject: Subject,
    pub origin: MetaOrigin,
    f: MetaFn,
}

impl fmt::Debug for MetaRate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MetaRate({}, {:?}, {:?})", self.name, self.subject, self.origin)
    }
}

impl MetaRate {
    pub fn new(
        name: impl Into<String>,
        subject: Subject,
        f: impl Fn(u64, &Counter) -> u64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            subject,
            origin: MetaOrigin::ClosedForm,
            f: Arc::new(f),
        }
    }

    pub fn constant(c: u64, subject: Subject) -> Self {
        Self::new(format!("const {c}"), subject, move |_, _| c)
    }

    /// `Ω(k, g)` = least valid `N` on this trajectory, searched up to `cap`;
    /// `u64::MAX` when none is found.
    pub fn empirical<S>(space: S, points: Arc<[S::Point]>, subject: Subject, cap: u64, tol: f64) -> Self
    where
        S: WSpace + Send + Sync + 'static,
        S::Point: Send + Sync + 'static,
    {
        let mut rate = Self::new("empirical", subject, move |k, g| {
            empirical_meta(&space, &points, k, g, cap, tol)
                .ok()
                .flatten()
                .unwrap_or(u64::MAX)
        });
        rate.origin = MetaOrigin::Empirical;
        rate
    }

    pub fn eval(&self, k: u64, g: &Counter) -> u64 {
        (self.f)(k, g)
    }
}

/// `Ω'(k, g) = Ω(3k+2, g_q) + q` with `q = α(3k+2)`: a rate for the other
/// side of the link.
pub fn transform_meta(omega: &MetaRate, alpha: &RateCertificate) -> Result<MetaRate> {
    if alpha.kind != ResidualKind::CompanionGap {
        return Err(Error::Consistency(format!(
            "metastability transfer needs a rate for d(x_n, u_n), got {}",
            alpha.name
        )));
    }
    let subject = omega
        .subject
        .flip()
        .ok_or_else(|| Error::Consistency("metastability source must be an iteration".into()))?;
    let (om, a) = (omega.clone(), alpha.rate.clone());
    let mut rate = MetaRate::new(format!("{}_transferred", omega.name), subject, move |k, g| {
        let j = sat_mul(3, k).saturating_add(2);
        let q = a.eval(j);
        om.eval(j, &g.shifted(q)).saturating_add(q)
    });
    rate.origin = MetaOrigin::Transformed;
    Ok(rate)
}

/// Whether all pairwise distances in `window` are at most `eps`.
///
/// The radius about the first point settles most windows: radius `r` bounds
/// every pair by `2r` and is itself a pair distance. Only windows with
/// `eps/2 < r ≤ eps` fall through to the pairwise scan.
pub fn window_oscillation_ok<S: WSpace>(space: &S, window: &[S::Point], eps: f64) -> Result<bool> {
    let Some(first) = window.first() else {
        return Ok(true);
    };
    let mut r = 0.0_f64;
    for p in &window[1..] {
        r = r.max(space.dist(first, p)?.as_f64());
        if r > eps {
            return Ok(false);
        }
    }
    if 2.0 * r <= eps {
        return Ok(true);
    }
    for (i, a) in window.iter().enumerate().skip(1) {
        for b in &window[i + 1..] {
            if space.dist(a, b)?.as_f64() > eps {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum MetaStatus {
    /// `least_n` is the first `N` whose window qualifies.
    Pass { least_n: u64 },
    /// Every `N ≤ bound` was examined and none qualifies.
    Fail,
    /// The window at `at` ends at `needed`, past the trajectory.
    Inconclusive { at: u64, needed: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetaReport {
    pub k: u64,
    pub g: String,
    pub bound: u64,
    pub status: MetaStatus,
}

impl MetaReport {
    pub fn pass(&self) -> bool {
        matches!(self.status, MetaStatus::Pass { .. })
    }

    pub fn least_n(&self) -> Option<u64> {
        match self.status {
            MetaStatus::Pass { least_n } => Some(least_n),
            _ => None,
        }
    }
}

fn search<S: WSpace>(space: &S, points: &[S::Point], k: u64, g: &Counter, bound: u64, tol: f64) -> Result<MetaStatus> {
    let eps = 1.0 / (k as f64 + 1.0) + tol;
    let len = points.len() as u64;
    let mut n = 0u64;
    while n <= bound {
        let end = n.saturating_add(g.eval(n));
        if end >= len {
            return Ok(MetaStatus::Inconclusive { at: n, needed: end });
        }
        if window_oscillation_ok(space, &points[n as usize..=end as usize], eps)? {
            return Ok(MetaStatus::Pass { least_n: n });
        }
        n += 1;
    }
    Ok(MetaStatus::Fail)
}

/// Searches `N = 0, 1, …, Ω(k, g)` for a window `[N, N+g(N)]` with pairwise
/// oscillation at most `1/(k+1) + tol`.
pub fn verify_meta<S: WSpace>(
    space: &S,
    points: &[S::Point],
    omega: &MetaRate,
    k: u64,
    g: &Counter,
    tol: f64,
) -> Result<MetaReport> {
    let bound = omega.eval(k, g);
    Ok(MetaReport {
        k,
        g: g.label().to_string(),
        bound,
        status: search(space, points, k, g, bound, tol)?,
    })
}

/// The least `N ≤ cap` whose window qualifies, or `None` (including when the
/// trajectory ends before the search can decide).
pub fn empirical_meta<S: WSpace>(
    space: &S,
    points: &[S::Point],
    k: u64,
    g: &Counter,
    cap: u64,
    tol: f64,
) -> Result<Option<u64>> {
    Ok(match search(space, points, k, g, cap, tol)? {
        MetaStatus::Pass { least_n } => Some(least_n),
        _ => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rates::alpha_rate;
    use crate::space::{Point, Space};
    use crate::Modulus;

    fn line(xs: impl IntoIterator<Item = f64>) -> Vec<Point<f64>> {
        xs.into_iter().map(|x| Point::vector(vec![x])).collect()
    }

    #[test]
    fn counter_presets() {
        assert_eq!(Counter::preset("1").unwrap().eval(50), 1);
        assert_eq!(Counter::preset("10").unwrap().eval(3), 10);
        assert_eq!(Counter::preset("n").unwrap().eval(7), 7);
        assert_eq!(Counter::preset("2n").unwrap().eval(7), 14);
        assert_eq!(Counter::parse("3*n + 4").unwrap().eval(2), 10);
        assert_eq!(Counter::parse("n+1").unwrap().eval(2), 3);
        assert_eq!(Counter::affine(2, 0).label(), "2n");
        assert!(Counter::parse("n^2").is_err());
        assert!(Counter::parse("5+").is_err());
        assert!(Counter::parse("1+2").is_err());
        assert_eq!(Counter::affine(u64::MAX, 5).eval(3), u64::MAX);
    }

    #[test]
    fn shifted_counter() {
        let g = Counter::affine(2, 0).shifted(3);
        assert_eq!(g.eval(1), 2 * 4 + 3);
        assert_eq!(Counter::constant(0).shifted(7).eval(100), 7);
    }

    #[test]
    fn transform_substitution() {
        let omega = MetaRate::constant(5, Subject::ModifiedHalpern);
        let alpha = RateCertificate::custom("a", Modulus::constant(7), ResidualKind::CompanionGap, Subject::Companion);
        let t = transform_meta(&omega, &alpha).unwrap();
        assert_eq!(t.subject, Subject::TikhonovMann);
        for g in ["1", "n", "2n"] {
            assert_eq!(t.eval(3, &Counter::preset(g).unwrap()), 12);
        }
        // g ≡ 0 unfolds to Ω(3k+2, const q) + q.
        let probe = MetaRate::new("probe", Subject::TikhonovMann, |k, g| 1000 * k + g.eval(999));
        let t = transform_meta(&probe, &alpha).unwrap();
        assert_eq!(t.eval(1, &Counter::constant(0)), 1000 * 5 + 7 + 7);
        let bad = RateCertificate::custom("b", Modulus::constant(7), ResidualKind::Step, Subject::TikhonovMann);
        assert!(transform_meta(&omega, &bad).is_err());
    }

    #[test]
    fn transform_dominates_alpha() {
        let omega = MetaRate::new("o", Subject::ModifiedHalpern, |k, g| k + g.eval(k) % 7);
        let alpha = alpha_rate(&Modulus::identity(), 3);
        let t = transform_meta(&omega, &alpha).unwrap();
        for k in 0..30 {
            for g in ["1", "10", "n", "2n"] {
                assert!(t.eval(k, &Counter::preset(g).unwrap()) >= alpha.eval(3 * k + 2));
            }
        }
    }

    #[test]
    fn constant_and_harmonic_sequences() {
        let s = Space::<f64>::euclidean(1).unwrap();
        let c = line(std::iter::repeat_n(2.0, 50));
        for k in 0..5 {
            assert_eq!(empirical_meta(&s, &c, k, &Counter::preset("2n").unwrap(), 10, 0.0).unwrap(), Some(0));
        }
        let h = line((0..50).map(|n| 1.0 / (n as f64 + 1.0)));
        let one = Counter::constant(1);
        let rep = verify_meta(&s, &h, &MetaRate::constant(0, Subject::TikhonovMann), 1, &one, 0.0).unwrap();
        assert_eq!(rep.status, MetaStatus::Pass { least_n: 0 });
    }

    #[test]
    fn oscillation_has_no_window() {
        let s = Space::<f64>::euclidean(1).unwrap();
        let osc = line((0..100).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 }));
        let one = Counter::constant(1);
        assert_eq!(empirical_meta(&s, &osc, 1, &one, 50, 1e-9).unwrap(), None);
        let rep = verify_meta(&s, &osc, &MetaRate::constant(50, Subject::TikhonovMann), 1, &one, 1e-9).unwrap();
        assert_eq!(rep.status, MetaStatus::Fail);
        let rep = verify_meta(&s, &osc, &MetaRate::constant(500, Subject::TikhonovMann), 1, &one, 1e-9).unwrap();
        assert_eq!(rep.status, MetaStatus::Inconclusive { at: 99, needed: 100 });
    }

    #[test]
    fn window_check_matches_all_pairs() {
        let s = Space::<f64>::euclidean(2).unwrap();
        let w: Vec<Point<f64>> = vec![
            Point::vector(vec![0.0, 0.0]),
            Point::vector(vec![0.4, 0.0]),
            Point::vector(vec![-0.4, 0.0]),
        ];
        // Radius 0.4 about the first point, diameter 0.8.
        assert!(window_oscillation_ok(&s, &w, 0.8).unwrap());
        assert!(!window_oscillation_ok(&s, &w, 0.7).unwrap());
        assert!(window_oscillation_ok(&s, &w[..2], 0.4).unwrap());
        assert!(window_oscillation_ok(&s, &[], 0.0).unwrap());
    }

    #[test]
    fn empirical_rate_matches_search() {
        let s = Space::<f64>::euclidean(1).unwrap();
        let pts = line((0..400).map(|n| 1.0 / (n as f64 + 1.0)));
        let arc: Arc<[Point<f64>]> = pts.clone().into();
        let om = MetaRate::empirical(s.clone(), arc, Subject::ModifiedHalpern, 300, 0.0);
        let g = Counter::preset("2n").unwrap();
        for k in 0..8 {
            let n = om.eval(k, &g);
            assert_eq!(Some(n), empirical_meta(&s, &pts, k, &g, 300, 0.0).unwrap());
            assert!(verify_meta(&s, &pts, &om, k, &g, 0.0).unwrap().pass());
        }
    }
}
