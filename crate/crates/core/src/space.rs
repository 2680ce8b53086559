//! W-spaces: a metric together with a convex-combination function
//! `W(x, y, λ)`, written `(1-λ)x + λy`.
//!
//! Four concrete models are provided through [`Space`]:
//!
//! * `euclidean`, `l1`, `linf` — `R^d` with the corresponding norm and the
//!   linear combination `(1-λ)x + λy`;
//! * `star-tree` — `r` half-lines glued at a hub, the simplest nonlinear
//!   R-tree. Points are `(ray, s)` with `s` the distance to the hub.
//!
//! [`check_axioms`] samples tuples and evaluates (W1)–(W7) and the CAT(0)
//! midpoint inequality, recording the worst violation of each.

use rand::Rng;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{check_unit, Error, Result};
use crate::Real;

/// Absolute tolerance for axiom checks on coordinates of magnitude ≤ 1e3.
pub const AXIOM_TOL: f64 = 1e-9;

/// A metric space with a convex-combination function.
pub trait WSpace {
    type Scalar: Real;
    type Point: Clone + std::fmt::Debug;

    fn dist(&self, x: &Self::Point, y: &Self::Point) -> Result<Self::Scalar>;

    /// `(1-λ)x + λy`. Fails for `λ ∉ [0, 1]` or incompatible points.
    fn comb(&self, x: &Self::Point, y: &Self::Point, lambda: Self::Scalar) -> Result<Self::Point>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Euclidean,
    #[serde(alias = "normed-l1")]
    L1,
    #[serde(alias = "normed-linf")]
    Linf,
    StarTree,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Euclidean => "euclidean",
            Model::L1 => "l1",
            Model::Linf => "linf",
            Model::StarTree => "star-tree",
        }
    }

    pub fn is_normed(self) -> bool {
        !matches!(self, Model::StarTree)
    }
}

/// A point of the star tree: distance `s` from the hub along branch `ray`.
///
/// The hub has a single representation, `ray = 0, s = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TreePoint<T> {
    pub ray: usize,
    pub s: T,
}

impl<T: Real> TreePoint<T> {
    /// Canonicalizes the hub to ray 0. Negative or non-finite `s` is rejected.
    pub fn new(ray: usize, s: T) -> Result<Self> {
        if !(s >= T::zero()) || !s.is_finite() {
            return Err(Error::Domain {
                name: "s",
                value: s.as_f64(),
                expected: "[0, ∞)",
            });
        }
        Ok(Self::canonical(ray, s))
    }

    pub fn hub() -> Self {
        Self {
            ray: 0,
            s: T::zero(),
        }
    }

    fn canonical(ray: usize, s: T) -> Self {
        if s <= T::zero() {
            Self::hub()
        } else {
            Self { ray, s }
        }
    }
}

/// A point of any of the provided models.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Point<T> {
    Vector(Vec<T>),
    Tree(TreePoint<T>),
}

impl<T: Real> Point<T> {
    pub fn vector(coords: Vec<T>) -> Self {
        Point::Vector(coords)
    }

    /// Star-tree point; panics on negative `s`. Use [`TreePoint::new`] for fallible input.
    pub fn tree(ray: usize, s: T) -> Self {
        Point::Tree(TreePoint::new(ray, s).expect("nonnegative distance from the hub"))
    }

    pub fn hub() -> Self {
        Point::Tree(TreePoint::hub())
    }

    pub fn as_vector(&self) -> Option<&[T]> {
        match self {
            Point::Vector(v) => Some(v),
            Point::Tree(_) => None,
        }
    }

    pub fn as_tree(&self) -> Option<TreePoint<T>> {
        match self {
            Point::Tree(t) => Some(*t),
            Point::Vector(_) => None,
        }
    }

    /// Flat numeric view used by CSV exports: coordinates, or `[ray, s]`.
    pub fn coords_f64(&self) -> Vec<f64> {
        match self {
            Point::Vector(v) => v.iter().map(|c| c.as_f64()).collect(),
            Point::Tree(t) => vec![t.ray as f64, t.s.as_f64()],
        }
    }
}

/// One of the concrete W-hyperbolic models.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Space<T> {
    model: Model,
    /// Vector dimension, or number of rays for the star tree.
    dim: usize,
    #[serde(skip)]
    _scalar: std::marker::PhantomData<T>,
}

impl<T: Real> Space<T> {
    pub fn new(model: Model, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config(format!(
                "{} needs at least one {}",
                model.name(),
                if model.is_normed() { "dimension" } else { "ray" }
            )));
        }
        Ok(Self {
            model,
            dim,
            _scalar: std::marker::PhantomData,
        })
    }

    pub fn euclidean(dim: usize) -> Result<Self> {
        Self::new(Model::Euclidean, dim)
    }

    pub fn l1(dim: usize) -> Result<Self> {
        Self::new(Model::L1, dim)
    }

    pub fn linf(dim: usize) -> Result<Self> {
        Self::new(Model::Linf, dim)
    }

    pub fn star_tree(rays: usize) -> Result<Self> {
        Self::new(Model::StarTree, rays)
    }

    pub fn model(&self) -> Model {
        self.model
    }

    /// Dimension of a vector model, ray count of the star tree.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The origin, or the hub.
    pub fn origin(&self) -> Point<T> {
        match self.model {
            Model::StarTree => Point::hub(),
            _ => Point::Vector(vec![T::zero(); self.dim]),
        }
    }

    /// Checks that `p` belongs to this model.
    pub fn validate(&self, p: &Point<T>) -> Result<()> {
        match (self.model, p) {
            (Model::StarTree, Point::Tree(t)) => {
                if t.ray >= self.dim {
                    Err(Error::Shape(format!(
                        "ray {} out of range for a star tree with {} rays",
                        t.ray, self.dim
                    )))
                } else if !(t.s >= T::zero()) || !t.s.is_finite() {
                    Err(Error::Domain {
                        name: "s",
                        value: t.s.as_f64(),
                        expected: "[0, ∞)",
                    })
                } else {
                    Ok(())
                }
            }
            (Model::StarTree, Point::Vector(_)) => {
                Err(Error::Shape("vector point given to the star tree".into()))
            }
            (_, Point::Vector(v)) if v.len() == self.dim => Ok(()),
            (_, Point::Vector(v)) => Err(Error::Shape(format!(
                "expected {} coordinates, got {}",
                self.dim,
                v.len()
            ))),
            (_, Point::Tree(_)) => Err(Error::Shape(format!(
                "tree point given to the {} model",
                self.model.name()
            ))),
        }
    }

    /// Uniform coordinates in `[-radius, radius]`; on the star tree a uniform
    /// ray among the first eight and `s` uniform in `[0, radius]`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, radius: f64) -> Point<T> {
        match self.model {
            Model::StarTree => {
                let ray = rng.gen_range(0..self.dim.min(8));
                let s = rng.gen_range(0.0..=radius);
                Point::Tree(TreePoint::canonical(ray, T::lit(s)))
            }
            _ => Point::Vector(
                (0..self.dim)
                    .map(|_| T::lit(rng.gen_range(-radius..=radius)))
                    .collect(),
            ),
        }
    }

    /// Default sampler: radius 10.
    pub fn sample_default<R: Rng + ?Sized>(&self, rng: &mut R) -> Point<T> {
        self.sample(rng, 10.0)
    }

    fn vectors<'a>(&self, x: &'a Point<T>, y: &'a Point<T>) -> Result<(&'a [T], &'a [T])> {
        self.validate(x)?;
        self.validate(y)?;
        match (x, y) {
            (Point::Vector(a), Point::Vector(b)) => Ok((a, b)),
            _ => unreachable!("validated as vectors"),
        }
    }

    fn trees(&self, x: &Point<T>, y: &Point<T>) -> Result<(TreePoint<T>, TreePoint<T>)> {
        self.validate(x)?;
        self.validate(y)?;
        match (x, y) {
            (Point::Tree(a), Point::Tree(b)) => Ok((*a, *b)),
            _ => unreachable!("validated as tree points"),
        }
    }
}

fn tree_dist<T: Real>(a: TreePoint<T>, b: TreePoint<T>) -> T {
    if a.ray == b.ray {
        (a.s - b.s).abs()
    } else {
        a.s + b.s
    }
}

fn tree_comb<T: Real>(a: TreePoint<T>, b: TreePoint<T>, lambda: T) -> TreePoint<T> {
    if lambda == T::zero() || tree_dist(a, b) == T::zero() {
        return a;
    }
    if lambda == T::one() {
        return b;
    }
    if a.ray == b.ray || a.s == T::zero() || b.s == T::zero() {
        // Both points on one closed ray: interpolate the hub distance.
        let ray = if a.s == T::zero() { b.ray } else { a.ray };
        let s = (T::one() - lambda) * a.s + lambda * b.s;
        return TreePoint::canonical(ray, s);
    }
    // Geodesic through the hub: walk arc length λ(s+t) from `a`.
    let walked = lambda * (a.s + b.s);
    if walked <= a.s {
        TreePoint::canonical(a.ray, a.s - walked)
    } else {
        TreePoint::canonical(b.ray, walked - a.s)
    }
}

impl<T: Real> WSpace for Space<T> {
    type Scalar = T;
    type Point = Point<T>;

    fn dist(&self, x: &Point<T>, y: &Point<T>) -> Result<T> {
        match self.model {
            Model::StarTree => {
                let (a, b) = self.trees(x, y)?;
                Ok(tree_dist(a, b))
            }
            Model::Euclidean => {
                let (a, b) = self.vectors(x, y)?;
                Ok(a.iter()
                    .zip(b)
                    .fold(T::zero(), |acc, (&p, &q)| acc.hypot(p - q)))
            }
            Model::L1 => {
                let (a, b) = self.vectors(x, y)?;
                Ok(a.iter().zip(b).fold(T::zero(), |acc, (&p, &q)| acc + (p - q).abs()))
            }
            Model::Linf => {
                let (a, b) = self.vectors(x, y)?;
                Ok(a.iter()
                    .zip(b)
                    .fold(T::zero(), |acc, (&p, &q)| acc.max((p - q).abs())))
            }
        }
    }

    fn comb(&self, x: &Point<T>, y: &Point<T>, lambda: T) -> Result<Point<T>> {
        check_unit("lambda", lambda)?;
        match self.model {
            Model::StarTree => {
                let (a, b) = self.trees(x, y)?;
                Ok(Point::Tree(tree_comb(a, b, lambda)))
            }
            _ => {
                let (a, b) = self.vectors(x, y)?;
                let mu = T::one() - lambda;
                Ok(Point::Vector(
                    a.iter().zip(b).map(|(&p, &q)| mu * p + lambda * q).collect(),
                ))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Axiom {
    W1,
    W2,
    W3,
    W4,
    W5,
    W6,
    W7,
    #[serde(rename = "CAT0")]
    Cat0,
}

impl Axiom {
    pub const ALL: [Axiom; 8] = [
        Axiom::W1,
        Axiom::W2,
        Axiom::W3,
        Axiom::W4,
        Axiom::W5,
        Axiom::W6,
        Axiom::W7,
        Axiom::Cat0,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Axiom::W1 => "W1",
            Axiom::W2 => "W2",
            Axiom::W3 => "W3",
            Axiom::W4 => "W4",
            Axiom::W5 => "W5",
            Axiom::W6 => "W6",
            Axiom::W7 => "W7",
            Axiom::Cat0 => "CAT0",
        }
    }
}

/// The sampled tuple at which an axiom was worst, with both sides of the
/// (in)equality.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness<P> {
    pub points: Vec<P>,
    pub lambdas: Vec<f64>,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomCheck<P> {
    pub axiom: Axiom,
    pub pass: bool,
    pub worst_violation: f64,
    /// Tuple attaining `worst_violation`; always present when `pass` is false.
    pub witness: Option<Witness<P>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxiomReport<P> {
    pub trials: usize,
    pub tol: f64,
    pub checks: Vec<AxiomCheck<P>>,
}

impl<P> AxiomReport<P> {
    pub fn get(&self, axiom: Axiom) -> &AxiomCheck<P> {
        self.checks
            .iter()
            .find(|c| c.axiom == axiom)
            .expect("every axiom is checked")
    }

    pub fn passes(&self, axiom: Axiom) -> bool {
        self.get(axiom).pass
    }

    /// True when (W1)–(W7) all hold.
    pub fn w_hyperbolic(&self) -> bool {
        self.checks
            .iter()
            .filter(|c| c.axiom != Axiom::Cat0)
            .all(|c| c.pass)
    }
}

struct Tracker<P> {
    axiom: Axiom,
    worst: f64,
    witness: Option<Witness<P>>,
}

impl<P: Clone> Tracker<P> {
    fn new(axiom: Axiom) -> Self {
        Self {
            axiom,
            worst: 0.0,
            witness: None,
        }
    }

    fn record(&mut self, violation: f64, lhs: f64, rhs: f64, points: &[&P], lambdas: &[f64]) {
        let violation = if violation.is_nan() { f64::INFINITY } else { violation };
        if self.witness.is_none() || violation > self.worst {
            self.worst = violation.max(0.0);
            self.witness = Some(Witness {
                points: points.iter().map(|p| (*p).clone()).collect(),
                lambdas: lambdas.to_vec(),
                lhs,
                rhs,
            });
        }
    }

    fn finish(self, tol: f64) -> AxiomCheck<P> {
        AxiomCheck {
            axiom: self.axiom,
            pass: self.worst <= tol,
            worst_violation: self.worst,
            witness: self.witness,
        }
    }
}

/// Both sides of the CAT(0) midpoint inequality
/// `d²(z, ½x+½y) ≤ ½d²(z,x) + ½d²(z,y) − ¼d²(x,y)`.
pub fn cat0_gap<S: WSpace>(
    space: &S,
    x: &S::Point,
    y: &S::Point,
    z: &S::Point,
) -> Result<(S::Scalar, S::Scalar)> {
    let half = S::Scalar::lit(0.5);
    let quarter = S::Scalar::lit(0.25);
    let mid = space.comb(x, y, half)?;
    let sq = |v: S::Scalar| v * v;
    let lhs = sq(space.dist(z, &mid)?);
    let rhs = half * sq(space.dist(z, x)?) + half * sq(space.dist(z, y)?)
        - quarter * sq(space.dist(x, y)?);
    Ok((lhs, rhs))
}

/// Samples `trials` tuples from `sampler` and evaluates (W1)–(W7) and CAT(0).
///
/// Convex-combination parameters are drawn uniformly from `[0, 1]` by `rng`.
pub fn check_axioms<S, F, R>(
    space: &S,
    mut sampler: F,
    rng: &mut R,
    trials: usize,
    tol: f64,
) -> Result<AxiomReport<S::Point>>
where
    S: WSpace,
    F: FnMut(&mut R) -> S::Point,
    R: Rng,
{
    if trials == 0 {
        return Err(Error::Domain {
            name: "trials",
            value: 0.0,
            expected: "[1, ∞)",
        });
    }
    let f = |v: S::Scalar| v.as_f64();
    let mut t: Vec<Tracker<S::Point>> = Axiom::ALL.iter().map(|&a| Tracker::new(a)).collect();
    let zero = S::Scalar::zero();
    let one = S::Scalar::one();

    for _ in 0..trials {
        let x = sampler(rng);
        let y = sampler(rng);
        let z = sampler(rng);
        let w = sampler(rng);
        let l: f64 = rng.gen_range(0.0..=1.0);
        let lt: f64 = rng.gen_range(0.0..=1.0);
        let lam = S::Scalar::lit(l);
        let lam_t = S::Scalar::lit(lt);
        let lam_f = f(lam);
        let lam_t_f = f(lam_t);

        let dxy = f(space.dist(&x, &y)?);
        let m = space.comb(&x, &y, lam)?;

        // (W1)
        let lhs = f(space.dist(&z, &m)?);
        let rhs = (1.0 - lam_f) * f(space.dist(&z, &x)?) + lam_f * f(space.dist(&z, &y)?);
        t[0].record(lhs - rhs, lhs, rhs, &[&x, &y, &z], &[lam_f]);

        // (W2)
        let mt = space.comb(&x, &y, lam_t)?;
        let lhs = f(space.dist(&m, &mt)?);
        let rhs = (lam_f - lam_t_f).abs() * dxy;
        t[1].record((lhs - rhs).abs(), lhs, rhs, &[&x, &y], &[lam_f, lam_t_f]);

        // (W3): (1-λ)x + λy = λy + (1-λ)x, i.e. W(x,y,λ) = W(y,x,1-λ).
        let swapped = space.comb(&y, &x, one - lam)?;
        let lhs = f(space.dist(&m, &swapped)?);
        t[2].record(lhs, lhs, 0.0, &[&x, &y], &[lam_f]);

        // (W4)
        let a = space.comb(&x, &z, lam)?;
        let b = space.comb(&y, &w, lam)?;
        let lhs = f(space.dist(&a, &b)?);
        let rhs = (1.0 - lam_f) * dxy + lam_f * f(space.dist(&z, &w)?);
        t[3].record(lhs - rhs, lhs, rhs, &[&x, &y, &z, &w], &[lam_f]);

        // (W5)
        let e0 = f(space.dist(&space.comb(&x, &y, zero)?, &x)?);
        let e1 = f(space.dist(&space.comb(&x, &y, one)?, &y)?);
        let lhs = e0.max(e1);
        t[4].record(lhs, lhs, 0.0, &[&x, &y], &[0.0, 1.0]);

        // (W6)
        let lhs = f(space.dist(&space.comb(&x, &x, lam)?, &x)?);
        t[5].record(lhs, lhs, 0.0, &[&x], &[lam_f]);

        // (W7)
        let dxm = f(space.dist(&x, &m)?);
        let dym = f(space.dist(&y, &m)?);
        let v1 = (dxm - lam_f * dxy).abs();
        let v2 = (dym - (1.0 - lam_f) * dxy).abs();
        let (lhs, rhs) = if v1 >= v2 {
            (dxm, lam_f * dxy)
        } else {
            (dym, (1.0 - lam_f) * dxy)
        };
        t[6].record(v1.max(v2), lhs, rhs, &[&x, &y], &[lam_f]);

        // CAT(0)
        let (lhs, rhs) = cat0_gap(space, &x, &y, &z)?;
        let (lhs, rhs) = (f(lhs), f(rhs));
        t[7].record(lhs - rhs, lhs, rhs, &[&x, &y, &z], &[0.5]);
    }

    Ok(AxiomReport {
        trials,
        tol,
        checks: t.into_iter().map(|tr| tr.finish(tol)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(c: &[f64]) -> Point<f64> {
        Point::vector(c.to_vec())
    }

    #[test]
    fn euclidean_comb_is_linear_interpolation() {
        let s = Space::<f64>::euclidean(2).unwrap();
        let z = s.comb(&v(&[0.0, 0.0]), &v(&[2.0, 0.0]), 0.25).unwrap();
        assert_eq!(z, v(&[0.5, 0.0]));
    }

    #[test]
    fn star_tree_symmetric_midpoint_is_hub() {
        let s = Space::<f64>::star_tree(3).unwrap();
        let z = s
            .comb(&Point::tree(0, 1.0), &Point::tree(1, 1.0), 0.5)
            .unwrap();
        assert_eq!(z, Point::hub());
    }

    #[test]
    fn comb_endpoints_are_exact() {
        let t = Space::<f64>::star_tree(4).unwrap();
        let (x, y) = (Point::tree(2, 1.3), Point::tree(3, 0.7));
        assert_eq!(t.comb(&x, &y, 0.0).unwrap(), x);
        assert_eq!(t.comb(&x, &y, 1.0).unwrap(), y);
        let e = Space::<f64>::linf(3).unwrap();
        let (x, y) = (v(&[0.1, -3.0, 7.0]), v(&[2.0, 5.5, -1.0]));
        assert_eq!(e.comb(&x, &y, 0.0).unwrap(), x);
        assert_eq!(e.comb(&x, &y, 1.0).unwrap(), y);
    }

    #[test]
    fn distances() {
        let e = Space::<f64>::euclidean(2).unwrap();
        assert_abs_diff_eq!(e.dist(&v(&[0.0, 0.0]), &v(&[3.0, 4.0])).unwrap(), 5.0);
        let t = Space::<f64>::star_tree(2).unwrap();
        assert_eq!(t.dist(&Point::tree(0, 1.0), &Point::tree(1, 2.0)).unwrap(), 3.0);
        assert_eq!(t.dist(&Point::tree(1, 1.0), &Point::tree(1, 2.5)).unwrap(), 1.5);
        let x = v(&[1.0, -2.0]);
        assert_eq!(e.dist(&x, &x).unwrap(), 0.0);
        let l1 = Space::<f64>::l1(2).unwrap();
        assert_eq!(l1.dist(&v(&[0.0, 0.0]), &v(&[3.0, -4.0])).unwrap(), 7.0);
        let li = Space::<f64>::linf(2).unwrap();
        assert_eq!(li.dist(&v(&[0.0, 0.0]), &v(&[3.0, -4.0])).unwrap(), 4.0);
    }

    #[test]
    fn lambda_outside_unit_interval_is_a_domain_error() {
        let e = Space::<f64>::euclidean(1).unwrap();
        let err = e.comb(&v(&[0.0]), &v(&[1.0]), 1.5).unwrap_err();
        assert!(matches!(err, Error::Domain { .. }));
        assert!(e.comb(&v(&[0.0]), &v(&[1.0]), f64::NAN).is_err());
    }

    #[test]
    fn mismatched_points_are_shape_errors() {
        let e = Space::<f64>::euclidean(2).unwrap();
        assert!(matches!(e.dist(&v(&[0.0]), &v(&[1.0, 2.0])), Err(Error::Shape(_))));
        assert!(matches!(e.dist(&Point::hub(), &v(&[1.0, 2.0])), Err(Error::Shape(_))));
        let t = Space::<f64>::star_tree(2).unwrap();
        assert!(matches!(
            t.dist(&Point::tree(5, 1.0), &Point::hub()),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn hub_is_canonical() {
        assert_eq!(TreePoint::new(3, 0.0_f64).unwrap(), TreePoint::hub());
        assert!(TreePoint::new(1, -0.5_f64).is_err());
        let t = Space::<f64>::star_tree(3).unwrap();
        // Walking exactly to the hub lands on ray 0.
        let z = t.comb(&Point::tree(2, 1.0), &Point::tree(1, 3.0), 0.25).unwrap();
        assert_eq!(z, Point::hub());
    }

    #[test]
    fn star_tree_cross_ray_walk() {
        let t = Space::<f64>::star_tree(3).unwrap();
        let (x, y) = (Point::tree(1, 2.0), Point::tree(2, 6.0));
        assert_eq!(t.comb(&x, &y, 0.125).unwrap(), Point::tree(1, 1.0));
        assert_eq!(t.comb(&x, &y, 0.5).unwrap(), Point::tree(2, 2.0));
        // From the hub the geodesic stays on the target ray.
        assert_eq!(t.comb(&Point::hub(), &y, 0.5).unwrap(), Point::tree(2, 3.0));
        assert_eq!(t.comb(&y, &Point::hub(), 0.5).unwrap(), Point::tree(2, 3.0));
    }

    #[test]
    fn linf_cat0_witness() {
        let s = Space::<f64>::linf(2).unwrap();
        let (lhs, rhs) = cat0_gap(&s, &v(&[1.0, 0.0]), &v(&[-1.0, 0.0]), &v(&[0.0, 1.0])).unwrap();
        assert_eq!(lhs, 1.0);
        assert_eq!(rhs, 0.0);
    }

    #[test]
    fn euclidean_and_tree_pass_all_axioms() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let e = Space::<f64>::euclidean(2).unwrap();
        let rep = check_axioms(&e, |r| e.sample_default(r), &mut rng, 10_000, AXIOM_TOL).unwrap();
        for c in &rep.checks {
            assert!(c.pass, "{:?} violated by {}", c.axiom, c.worst_violation);
        }
        let t = Space::<f64>::star_tree(5).unwrap();
        let rep = check_axioms(&t, |r| t.sample_default(r), &mut rng, 10_000, AXIOM_TOL).unwrap();
        for c in &rep.checks {
            assert!(c.pass, "{:?} violated by {}", c.axiom, c.worst_violation);
        }
    }

    #[test]
    fn linf_fails_cat0_with_a_witness() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let s = Space::<f64>::linf(2).unwrap();
        let rep = check_axioms(&s, |r| s.sample_default(r), &mut rng, 2_000, AXIOM_TOL).unwrap();
        assert!(rep.w_hyperbolic());
        let cat0 = rep.get(Axiom::Cat0);
        assert!(!cat0.pass);
        let w = cat0.witness.as_ref().unwrap();
        assert!(w.lhs - w.rhs > AXIOM_TOL);
        assert_abs_diff_eq!(w.lhs - w.rhs, cat0.worst_violation);
    }

    #[test]
    fn zero_trials_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = Space::<f64>::euclidean(1).unwrap();
        assert!(check_axioms(&s, |r| s.sample_default(r), &mut rng, 0, AXIOM_TOL).is_err());
    }

    #[test]
    fn report_serializes_with_documented_fields() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = Space::<f64>::linf(2).unwrap();
        let rep = check_axioms(&s, |r| s.sample_default(r), &mut rng, 50, AXIOM_TOL).unwrap();
        let json = serde_json::to_value(&rep.checks).unwrap();
        let first = &json[0];
        for key in ["axiom", "pass", "worst_violation", "witness"] {
            assert!(first.get(key).is_some(), "missing {key}");
        }
        assert_eq!(json[7]["axiom"], "CAT0");
    }
}
