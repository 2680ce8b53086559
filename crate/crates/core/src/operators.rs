//! Nonexpansive self-maps with a known fixed point.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{check_unit, Error, Result};
use crate::space::{Model, Point, Space, WSpace};
use crate::Real;

/// A 1-Lipschitz map `T: C -> C` together with a designated `p ∈ Fix(T)`.
pub trait NonexpansiveMap<P> {
    fn apply(&self, x: &P) -> Result<P>;
    fn fixed_point(&self) -> &P;
}

/// Wraps a closure as a [`NonexpansiveMap`]. Nonexpansiveness is the
/// caller's promise; [`check_nonexpansive`] can audit it.
pub struct FnMap<P, F> {
    f: F,
    fixed: P,
}

impl<P, F: Fn(&P) -> P> FnMap<P, F> {
    pub fn new(f: F, fixed: P) -> Self {
        Self { f, fixed }
    }
}

impl<P, F: Fn(&P) -> P> NonexpansiveMap<P> for FnMap<P, F> {
    fn apply(&self, x: &P) -> Result<P> {
        Ok((self.f)(x))
    }

    fn fixed_point(&self) -> &P {
        &self.fixed
    }
}

/// Descriptor of a zoo member; in config files `{kind = "...", params = {...}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum OperatorSpec<T> {
    /// `x -> -x` on a vector model. Fixed point: the origin.
    Negation,
    /// `x -> (1-r)c + r x`, i.e. `W(c, x, r)`; `r = 1/2` is the midpoint map.
    #[serde(alias = "contraction-to-c", alias = "midpoint")]
    Contraction { center: Point<T>, ratio: T },
    /// Coordinatewise clamp onto `[lower, upper]`. Fixed point: the box centre.
    #[serde(alias = "euclidean-projection-onto-box")]
    BoxProjection { lower: Vec<T>, upper: Vec<T> },
    /// Rotation of the first two coordinates (euclidean only). Fixed point: the origin.
    Rotation { angle: T },
    /// `(ray, s) -> (ray, s/2)` on the star tree. Fixed point: the hub.
    TreeHalving,
}

impl<T: Real> OperatorSpec<T> {
    pub fn kind(&self) -> &'static str {
        match self {
            OperatorSpec::Negation => "negation",
            OperatorSpec::Contraction { .. } => "contraction",
            OperatorSpec::BoxProjection { .. } => "box-projection",
            OperatorSpec::Rotation { .. } => "rotation",
            OperatorSpec::TreeHalving => "tree-halving",
        }
    }

    /// Short label including parameters, used in report rows.
    pub fn label(&self) -> String {
        match self {
            OperatorSpec::Negation | OperatorSpec::TreeHalving => self.kind().to_string(),
            OperatorSpec::Contraction { center, ratio } => {
                format!("contraction(c={:?},r={})", center.coords_f64(), ratio)
            }
            OperatorSpec::BoxProjection { lower, upper } => format!(
                "box-projection({:?},{:?})",
                lower.iter().map(|v| v.as_f64()).collect::<Vec<_>>(),
                upper.iter().map(|v| v.as_f64()).collect::<Vec<_>>()
            ),
            OperatorSpec::Rotation { angle } => format!("rotation({angle})"),
        }
    }
}

/// A zoo member bound to its space.
#[derive(Clone, Debug)]
pub struct Operator<T> {
    spec: OperatorSpec<T>,
    space: Space<T>,
    fixed: Point<T>,
}

impl<T: Real> Operator<T> {
    pub fn spec(&self) -> &OperatorSpec<T> {
        &self.spec
    }

    pub fn space(&self) -> &Space<T> {
        &self.space
    }
}

impl<T: Real> NonexpansiveMap<Point<T>> for Operator<T> {
    fn apply(&self, x: &Point<T>) -> Result<Point<T>> {
        self.space.validate(x)?;
        match (&self.spec, x) {
            (OperatorSpec::Negation, Point::Vector(v)) => {
                Ok(Point::Vector(v.iter().map(|&c| -c).collect()))
            }
            (OperatorSpec::Contraction { center, ratio }, _) => self.space.comb(center, x, *ratio),
            (OperatorSpec::BoxProjection { lower, upper }, Point::Vector(v)) => Ok(Point::Vector(
                v.iter()
                    .zip(lower.iter().zip(upper))
                    .map(|(&c, (&lo, &hi))| c.max(lo).min(hi))
                    .collect(),
            )),
            (OperatorSpec::Rotation { angle }, Point::Vector(v)) => {
                let (sin, cos) = angle.sin_cos();
                let mut out = v.clone();
                out[0] = cos * v[0] - sin * v[1];
                out[1] = sin * v[0] + cos * v[1];
                Ok(Point::Vector(out))
            }
            (OperatorSpec::TreeHalving, Point::Tree(t)) => {
                Ok(Point::tree(t.ray, t.s * T::lit(0.5)))
            }
            _ => unreachable!("operator/space compatibility checked at construction"),
        }
    }

    fn fixed_point(&self) -> &Point<T> {
        &self.fixed
    }
}

/// Builds a zoo member, validating parameters against the space and
/// auditing nonexpansiveness on 256 sampled pairs.
pub fn make_operator<T: Real>(spec: OperatorSpec<T>, space: &Space<T>) -> Result<Operator<T>> {
    let model = space.model();
    let mismatch = |what: &str| {
        Err(Error::Config(format!(
            "{} is not available on the {} model{}",
            spec.kind(),
            model.name(),
            what
        )))
    };
    let fixed = match &spec {
        OperatorSpec::Negation => {
            if !model.is_normed() {
                return mismatch("");
            }
            space.origin()
        }
        OperatorSpec::Contraction { center, ratio } => {
            space.validate(center)?;
            check_unit("ratio", *ratio)?;
            center.clone()
        }
        OperatorSpec::BoxProjection { lower, upper } => {
            if !model.is_normed() {
                return mismatch("");
            }
            if lower.len() != space.dim() || upper.len() != space.dim() {
                return Err(Error::Shape(format!(
                    "box bounds need {} coordinates",
                    space.dim()
                )));
            }
            if lower.iter().zip(upper).any(|(lo, hi)| !(lo <= hi)) {
                return Err(Error::Config("box needs lower <= upper".into()));
            }
            let half = T::lit(0.5);
            Point::Vector(
                lower
                    .iter()
                    .zip(upper)
                    .map(|(&lo, &hi)| half * lo + half * hi)
                    .collect(),
            )
        }
        OperatorSpec::Rotation { angle } => {
            if model != Model::Euclidean {
                return mismatch(" (rotations are isometries only for the euclidean norm)");
            }
            if space.dim() < 2 {
                return mismatch(" with fewer than two dimensions");
            }
            if !angle.is_finite() {
                return Err(Error::Config("rotation angle must be finite".into()));
            }
            space.origin()
        }
        OperatorSpec::TreeHalving => {
            if model != Model::StarTree {
                return mismatch("");
            }
            Point::hub()
        }
    };
    let op = Operator {
        spec,
        space: space.clone(),
        fixed,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let report = check_nonexpansive(space, &op, |r| space.sample_default(r), &mut rng, 256, 1e-9)?;
    if !report.pass {
        return Err(Error::Config(format!(
            "{} failed the nonexpansiveness audit (excess {:.3e})",
            op.spec.label(),
            report.worst_excess
        )));
    }
    Ok(op)
}

/// The fixed, enumerable operator zoo for a space.
pub fn zoo<T: Real>(space: &Space<T>) -> Vec<OperatorSpec<T>> {
    let d = space.dim();
    let l = T::lit;
    match space.model() {
        Model::StarTree => {
            let far_ray = 1.min(d - 1);
            vec![
                OperatorSpec::TreeHalving,
                OperatorSpec::Contraction {
                    center: Point::tree(far_ray, l(1.5)),
                    ratio: l(0.5),
                },
                OperatorSpec::Contraction {
                    center: Point::tree(0, l(0.75)),
                    ratio: l(0.9),
                },
            ]
        }
        model => {
            let center = Point::Vector((0..d).map(|i| l(0.5 - 0.25 * i as f64)).collect());
            let mut ops = vec![
                OperatorSpec::Negation,
                OperatorSpec::Contraction {
                    center: center.clone(),
                    ratio: l(0.5),
                },
                OperatorSpec::Contraction {
                    center,
                    ratio: l(0.9),
                },
                OperatorSpec::BoxProjection {
                    lower: vec![l(0.0); d],
                    upper: vec![l(1.0); d],
                },
            ];
            if model == Model::Euclidean && d >= 2 {
                ops.push(OperatorSpec::Rotation { angle: l(1.0) });
                ops.push(OperatorSpec::Rotation {
                    angle: l(std::f64::consts::FRAC_PI_2),
                });
            }
            ops
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NonexpansiveReport {
    /// `max (d(Tx,Ty) - d(x,y))` over the sampled pairs, floored at 0.
    pub worst_excess: f64,
    /// `d(Tp, p)`.
    pub fixed_point_residual: f64,
    pub pass: bool,
}

/// Audits `d(Tx,Ty) ≤ d(x,y) + tol` on sampled pairs and `d(Tp,p) ≤ tol`.
pub fn check_nonexpansive<S, M, F, R>(
    space: &S,
    op: &M,
    mut sampler: F,
    rng: &mut R,
    trials: usize,
    tol: f64,
) -> Result<NonexpansiveReport>
where
    S: WSpace,
    M: NonexpansiveMap<S::Point>,
    F: FnMut(&mut R) -> S::Point,
    R: Rng,
{
    let mut worst = 0.0_f64;
    for _ in 0..trials {
        let x = sampler(rng);
        let y = sampler(rng);
        let before = space.dist(&x, &y)?.as_f64();
        let after = space.dist(&op.apply(&x)?, &op.apply(&y)?)?.as_f64();
        worst = worst.max(after - before);
    }
    let p = op.fixed_point();
    let fixed_point_residual = space.dist(&op.apply(p)?, p)?.as_f64();
    Ok(NonexpansiveReport {
        worst_excess: worst,
        fixed_point_residual,
        pass: worst <= tol && fixed_point_residual <= tol,
    })
}

/// `M_p`, `K` and `M` for one instance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants<T> {
    /// `max{d(x0,p), d(u,p)}`.
    pub mp: T,
    /// Least positive integer `≥ M_p`.
    pub k: u64,
    /// Least positive integer `≥ 4 max{d(u,p), d(y0,p)}`.
    pub m: u64,
}

fn ceil_at_least_one<T: Real>(v: T) -> u64 {
    let c = v.ceil().as_f64();
    if c.is_finite() {
        (c as u64).max(1)
    } else {
        u64::MAX
    }
}

pub fn bound_constants<S, M>(
    space: &S,
    op: &M,
    u: &S::Point,
    x0: &S::Point,
    y0: &S::Point,
) -> Result<BoundConstants<S::Scalar>>
where
    S: WSpace,
    M: NonexpansiveMap<S::Point>,
{
    let p = op.fixed_point();
    let du = space.dist(u, p)?;
    let dx = space.dist(x0, p)?;
    let dy = space.dist(y0, p)?;
    let mp = dx.max(du);
    Ok(BoundConstants {
        mp,
        k: ceil_at_least_one(mp),
        m: ceil_at_least_one(S::Scalar::lit(4.0) * du.max(dy)),
    })
}
