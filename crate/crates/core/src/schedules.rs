//! Parameter sequences `(β_n)`, `(λ_n)` and their quantitative moduli.
//!
//! Quantifier conventions used for every modulus:
//!
//! * rate of convergence `σ` of `a_n -> a`: `|a_n - a| ≤ 1/(k+1)` for all `n ≥ σ(k)`;
//! * Cauchy modulus `σ` of `Σ d_n`: `Σ_{n=σ(k)+1}^{m} d_n ≤ 1/(k+1)` for all `m > σ(k)`;
//! * rate of divergence `σ` of `Σ_{n≥2} (1-β_n)`: `Σ_{n=2}^{σ(k)} (1-β_n) ≥ k`.

use std::fmt;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_integer::Integer;
use num_traits::{Float, One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{check_unit, Error, Result};
use crate::modulus::{next_up, Modulus};
use crate::Real;

/// Prefix products beyond this index are not materialized; ψ saturates instead.
pub const PSI_INDEX_CAP: u64 = 4_000_000;

/// Absolute slack for floating-point evaluation of the modulus inequalities.
const MODULI_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyTag {
    Harmonic,
    Sabach,
    Sqrt,
    Custom,
}

type SeqFn<T> = Arc<dyn Fn(u64) -> T + Send + Sync>;

#[derive(Clone)]
enum Family<T> {
    /// `β_n = 1 - 1/(n+1)`, `λ_n = λ`.
    Harmonic { lambda: T },
    /// `β_1 = 0`, `β_n = 1 - 2/n` for `n ≥ 2`, `λ_n = λ`.
    Sabach { lambda: T },
    /// `β_n = 1 - 1/sqrt(n+1)`, `λ_n = λ`.
    Sqrt { lambda: T },
    /// Tabulated values; indices past the end repeat the last entry.
    Table { beta: Arc<[T]>, lambda: Arc<[T]> },
    Func {
        beta: SeqFn<T>,
        lambda: SeqFn<T>,
        label: Arc<str>,
    },
}

/// The scalar sequences driving both iterations.
///
/// `β_0` is an explicit field: the Tikhonov-Mann iteration consumes it through
/// `u_0`, the modified Halpern iteration never does. Families default to their
/// closed form at `n = 0` (0 for both built-in families).
#[derive(Clone)]
pub struct Schedule<T> {
    family: Family<T>,
    beta0: Option<T>,
}

impl<T: Real> fmt::Debug for Schedule<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl<T: Real> Schedule<T> {
    /// Tabulated schedule; both tables must be nonempty with entries in `[0, 1]`.
    pub fn table(beta: Vec<T>, lambda: Vec<T>) -> Result<Self> {
        if beta.is_empty() || lambda.is_empty() {
            return Err(Error::Config("schedule tables must be nonempty".into()));
        }
        for &b in &beta {
            check_unit("beta", b)?;
        }
        for &l in &lambda {
            check_unit("lambda", l)?;
        }
        Ok(Self {
            family: Family::Table {
                beta: beta.into(),
                lambda: lambda.into(),
            },
            beta0: None,
        })
    }

    /// Closed-form schedule. Values must lie in `[0, 1]`; this is not checked
    /// eagerly, but every iteration step rejects values outside the range.
    pub fn from_fn(
        label: impl Into<String>,
        beta: impl Fn(u64) -> T + Send + Sync + 'static,
        lambda: impl Fn(u64) -> T + Send + Sync + 'static,
    ) -> Self {
        Self {
            family: Family::Func {
                beta: Arc::new(beta),
                lambda: Arc::new(lambda),
                label: Arc::from(label.into()),
            },
            beta0: None,
        }
    }

    /// Overrides `β_0`. `with_beta0(1)` is the convention under which the
    /// Tikhonov-Mann iteration started at `y_0` has `u_0 = y_0`.
    pub fn with_beta0(mut self, beta0: T) -> Result<Self> {
        check_unit("beta_0", beta0)?;
        self.beta0 = Some(beta0);
        Ok(self)
    }

    pub fn family(&self) -> FamilyTag {
        match self.family {
            Family::Harmonic { .. } => FamilyTag::Harmonic,
            Family::Sabach { .. } => FamilyTag::Sabach,
            Family::Sqrt { .. } => FamilyTag::Sqrt,
            Family::Table { .. } | Family::Func { .. } => FamilyTag::Custom,
        }
    }

    pub fn label(&self) -> String {
        let base = match &self.family {
            Family::Harmonic { lambda } => format!("harmonic(lambda={lambda})"),
            Family::Sabach { lambda } => format!("sabach(lambda={lambda})"),
            Family::Sqrt { lambda } => format!("sqrt(lambda={lambda})"),
            Family::Table { beta, .. } => format!("table({} rows)", beta.len()),
            Family::Func { label, .. } => label.to_string(),
        };
        match self.beta0 {
            Some(b) => format!("{base}[beta0={b}]"),
            None => base,
        }
    }

    /// `λ` when the family has constant `λ_n`.
    pub fn constant_lambda(&self) -> Option<T> {
        match self.family {
            Family::Harmonic { lambda } | Family::Sabach { lambda } | Family::Sqrt { lambda } => {
                Some(lambda)
            }
            _ => None,
        }
    }

    pub fn beta(&self, n: u64) -> T {
        if n == 0 {
            if let Some(b) = self.beta0 {
                return b;
            }
        }
        let one = T::one();
        match &self.family {
            Family::Harmonic { .. } => one - one / T::from_u64(n + 1).unwrap(),
            Family::Sabach { .. } => {
                if n <= 2 {
                    T::zero()
                } else {
                    one - T::lit(2.0) / T::from_u64(n).unwrap()
                }
            }
            Family::Sqrt { .. } => one - one / T::from_u64(n + 1).unwrap().sqrt(),
            Family::Table { beta, .. } => beta[(n as usize).min(beta.len() - 1)],
            Family::Func { beta, .. } => beta(n),
        }
    }

    /// A lower bound for `Σ_{n=a}^{b} (1-β_n)` from the closed form, for
    /// `3 ≤ a ≤ b`; `None` for tabulated and closure schedules.
    ///
    /// Each closed form has `1-β_n` decreasing in `n`, so the sum dominates
    /// the integral over `[a, b+1]`.
    pub fn gap_sum_lower_bound(&self, a: u64, b: u64) -> Option<f64> {
        if a < 3 || b < a {
            return None;
        }
        let (a, b1) = (a as f64, b as f64 + 1.0);
        let integral = match self.family {
            Family::Harmonic { .. } => ((b1 + 1.0) / (a + 1.0)).ln(),
            Family::Sabach { .. } => 2.0 * (b1 / a).ln(),
            Family::Sqrt { .. } => 2.0 * ((b1 + 1.0).sqrt() - (a + 1.0).sqrt()),
            Family::Table { .. } | Family::Func { .. } => return None,
        };
        // Covers the rounding in ln and sqrt.
        Some(integral * (1.0 - 1e-12))
    }

    pub fn lambda(&self, n: u64) -> T {
        match &self.family {
            Family::Harmonic { lambda } | Family::Sabach { lambda } | Family::Sqrt { lambda } => {
                *lambda
            }
            Family::Table { lambda, .. } => lambda[(n as usize).min(lambda.len() - 1)],
            Family::Func { lambda, .. } => lambda(n),
        }
    }

    /// Exact rational `β_n` for the closed-form families.
    pub fn beta_exact(&self, n: u64) -> Option<BigRational> {
        if n == 0 {
            if let Some(b) = self.beta0 {
                return BigRational::from_float(b.as_f64());
            }
        }
        match self.family {
            Family::Harmonic { .. } => Some(BigRational::new(
                BigInt::from(n),
                BigInt::from(n + 1),
            )),
            Family::Sabach { .. } => Some(if n <= 2 {
                BigRational::zero()
            } else {
                BigRational::new(BigInt::from(n - 2), BigInt::from(n))
            }),
            _ => None,
        }
    }
}

/// Quantitative data for the schedule conditions.
#[derive(Clone, Debug)]
pub struct ScheduleModuli {
    /// Rate of divergence of `Σ_{n≥2} (1-β_n)`.
    pub sigma1: Option<Modulus>,
    /// Rate of convergence of `Π_{n≥1} β_{n+1}` to 0.
    pub sigma1_star: Option<Modulus>,
    /// Cauchy modulus of `Σ |β_{n+1} - β_n|`.
    pub sigma2: Modulus,
    /// Cauchy modulus of `Σ |λ_{n+1} - λ_n|`.
    pub sigma3: Modulus,
    /// Rate of convergence of `β_n` to 1.
    pub sigma4: Modulus,
    /// `Λ ≥ 1` with `λ_n ≥ 1/Λ` for `n ≥ N_Λ`.
    pub lambda_cap: u64,
    pub n_lambda: u64,
    /// Rate of convergence of `λ_n` to 1. Carried, never consumed.
    pub sigma5: Option<Modulus>,
}

/// Least `Λ` with `λ ≥ 1/Λ`.
fn lambda_cap(lambda: f64) -> u64 {
    let mut cap = (1.0 / lambda).ceil().max(1.0) as u64;
    while lambda < 1.0 / cap as f64 {
        cap += 1;
    }
    cap
}

fn check_lambda_const<T: Real>(lambda: T) -> Result<()> {
    if lambda > T::zero() && lambda <= T::one() {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "lambda",
            value: lambda.as_f64(),
            expected: "(0, 1]",
        })
    }
}

/// `⌈e^x⌉`, saturating.
fn ceil_exp(x: f64) -> u64 {
    let v = x.exp().ceil();
    if v.is_finite() && v < u64::MAX as f64 {
        v as u64
    } else {
        u64::MAX
    }
}

fn lambda_one_rate<T: Real>(lambda: T) -> Option<Modulus> {
    (lambda == T::one()).then(|| Modulus::constant(0))
}

/// `β_n = 1 - 1/(n+1)`, `λ_n = λ`, with
/// `σ_1(k) = ⌈e^{k+1}⌉`, `σ_1*(k) = 2k`, `σ_2(k) = k`, `σ_3 = 0`, `σ_4(k) = k`,
/// `Λ = ⌈1/λ⌉`, `N_Λ = 0`.
pub fn harmonic_schedule<T: Real>(lambda: T) -> Result<(Schedule<T>, ScheduleModuli)> {
    check_lambda_const(lambda)?;
    let schedule = Schedule {
        family: Family::Harmonic { lambda },
        beta0: None,
    };
    let moduli = ScheduleModuli {
        sigma1: Some(Modulus::new("ceil(e^(k+1))", |k| {
            ceil_exp(k as f64 + 1.0)
        })),
        sigma1_star: Some(Modulus::affine(2, 0)),
        sigma2: Modulus::identity(),
        sigma3: Modulus::constant(0),
        sigma4: Modulus::identity(),
        lambda_cap: lambda_cap(lambda.as_f64()),
        n_lambda: 0,
        sigma5: lambda_one_rate(lambda),
    };
    Ok((schedule, moduli))
}

/// `β_1 = 0`, `β_n = 1 - 2/n` (`n ≥ 2`), `λ_n = λ`, with
/// `σ_1(k) = ⌈e^{k/2+1}⌉`, `σ_1*(k) = 1`, `σ_2(k) = 2k+1`, `σ_3 = 0`,
/// `σ_4(k) = 2(k+1)`, `Λ = ⌈1/λ⌉`, `N_Λ = 0`.
pub fn sabach_schedule<T: Real>(lambda: T) -> Result<(Schedule<T>, ScheduleModuli)> {
    check_lambda_const(lambda)?;
    let schedule = Schedule {
        family: Family::Sabach { lambda },
        beta0: None,
    };
    let moduli = ScheduleModuli {
        sigma1: Some(Modulus::new("ceil(e^(k/2+1))", |k| {
            ceil_exp(k as f64 / 2.0 + 1.0)
        })),
        // β_2 = 0, so every product with m ≥ 1 vanishes.
        sigma1_star: Some(Modulus::constant(1)),
        sigma2: Modulus::affine(2, 1),
        sigma3: Modulus::constant(0),
        sigma4: Modulus::affine(2, 2),
        lambda_cap: lambda_cap(lambda.as_f64()),
        n_lambda: 0,
        sigma5: lambda_one_rate(lambda),
    };
    Ok((schedule, moduli))
}

/// `β_n = 1 - 1/sqrt(n+1)`, `λ_n = λ`: a slowly converging family whose
/// divergence modulus is polynomial, with
/// `σ_1(k) = ⌈(k/2+2)^2⌉`, `σ_1*(k) = ⌈(ln(k+1)/2+2)^2⌉`, `σ_2(k) = (k+1)^2`,
/// `σ_3 = 0`, `σ_4(k) = (k+1)^2 - 1`, `Λ = ⌈1/λ⌉`, `N_Λ = 0`.
pub fn sqrt_schedule<T: Real>(lambda: T) -> Result<(Schedule<T>, ScheduleModuli)> {
    check_lambda_const(lambda)?;
    let schedule = Schedule {
        family: Family::Sqrt { lambda },
        beta0: None,
    };
    let square = |x: u64| x.saturating_mul(x);
    let moduli = ScheduleModuli {
        // Σ_{n=2}^{N} (n+1)^{-1/2} ≥ 2(sqrt(N+2) - sqrt(3)).
        sigma1: Some(Modulus::new("ceil((k/2+2)^2)", move |k| {
            square(k.saturating_add(4)).saturating_add(3) / 4
        })),
        // Π_{n=1}^{m} β_{n+1} ≤ exp(-2(sqrt(m+3) - sqrt(3))).
        sigma1_star: Some(Modulus::new("ceil((ln(k+1)/2+2)^2)", |k| {
            let r = ((k as f64 + 1.0).ln() / 2.0 + 2.0).powi(2);
            next_up(r).ceil() as u64
        })),
        sigma2: Modulus::new("(k+1)^2", move |k| square(k.saturating_add(1))),
        sigma3: Modulus::constant(0),
        sigma4: Modulus::new("(k+1)^2-1", move |k| square(k.saturating_add(1)) - 1),
        lambda_cap: lambda_cap(lambda.as_f64()),
        n_lambda: 0,
        sigma5: lambda_one_rate(lambda),
    };
    Ok((schedule, moduli))
}

/// Tabulated or closure schedules are multiplied exactly as dyadic rationals
/// up to this many factors; longer products use an outward float bound.
const DYADIC_CAP: usize = 1 << 18;

/// `Π_{n=0}^{j} β_{n+1}` for growing `j`.
enum Product {
    /// Closed-form families: the product of the first `len` factors.
    Rational { len: usize, value: BigRational },
    /// `mant · 2^exp` after `len` factors, from the exact binary values of `β`.
    Dyadic { len: usize, mant: BigUint, exp: i64 },
    /// Running product after `len` factors and its factor count for the error bound.
    Float { len: usize, value: f64 },
}

struct ProductCache {
    product: Product,
    memo: HashMap<usize, Option<u64>>,
}

fn ceil_to_u64(v: &BigUint) -> u64 {
    v.to_u64().unwrap_or(u64::MAX)
}

impl ProductCache {
    fn new<T: Real>(schedule: &Schedule<T>) -> Self {
        let product = if schedule.beta_exact(1).is_some() {
            Product::Rational {
                len: 0,
                value: BigRational::one(),
            }
        } else {
            Product::Dyadic {
                len: 0,
                mant: BigUint::one(),
                exp: 0,
            }
        };
        Self {
            product,
            memo: HashMap::new(),
        }
    }

    /// Least integer `ψ` with `1/ψ ≤ Π_{n=0}^{m} β_{n+1}`; `None` if the product is 0.
    fn psi<T: Real>(&mut self, schedule: &Schedule<T>, m: usize) -> Option<u64> {
        if let Some(&v) = self.memo.get(&m) {
            return v;
        }
        let v = self.compute(schedule, m);
        self.memo.insert(m, v);
        v
    }

    fn compute<T: Real>(&mut self, schedule: &Schedule<T>, m: usize) -> Option<u64> {
        let want = m + 1;
        if matches!(self.product, Product::Rational { .. }) {
            if !matches!(self.product, Product::Rational { len, .. } if len <= want) {
                self.product = Product::Rational {
                    len: 0,
                    value: BigRational::one(),
                };
            }
            let Product::Rational { len, value } = &mut self.product else {
                unreachable!()
            };
            while *len < want && !value.is_zero() {
                *value *= schedule.beta_exact(*len as u64 + 1).expect("closed-form family");
                *len += 1;
            }
            if value.is_zero() {
                return None;
            }
            return Some(value.recip().ceil().to_integer().to_u64().unwrap_or(u64::MAX));
        }
        if want <= DYADIC_CAP {
            let restart = !matches!(self.product, Product::Dyadic { len, .. } if len <= want);
            if restart {
                self.product = Product::Dyadic {
                    len: 0,
                    mant: BigUint::one(),
                    exp: 0,
                };
            }
            let Product::Dyadic { len, mant, exp } = &mut self.product else {
                unreachable!()
            };
            while *len < want {
                let b = schedule.beta(*len as u64 + 1).as_f64();
                let (bm, be, _) = b.integer_decode();
                *mant *= bm;
                *exp += be as i64;
                *len += 1;
            }
            if mant.is_zero() {
                return None;
            }
            // ψ = ⌈2^{-exp} / mant⌉
            if *exp >= 0 {
                return Some(1);
            }
            let num = BigUint::one() << ((-*exp) as usize);
            return Some(ceil_to_u64(&num.div_ceil(mant)));
        }
        let restart = !matches!(self.product, Product::Float { len, .. } if len <= want);
        if restart {
            self.product = Product::Float { len: 0, value: 1.0 };
        }
        let Product::Float { len, value } = &mut self.product else {
            unreachable!()
        };
        while *len < want {
            *value *= schedule.beta(*len as u64 + 1).as_f64();
            *len += 1;
        }
        // Each of the m+1 roundings is within a relative half-ulp.
        let lower = *value * (1.0 - (want as f64 + 1.0) * f64::EPSILON);
        if !(lower > 0.0) {
            return None;
        }
        let v = next_up(1.0 / lower).ceil();
        Some(if v < u64::MAX as f64 { v as u64 } else { u64::MAX })
    }
}

/// `ψ(k) = ⌈1 / Π_{n=0}^{γ(k)} β_{n+1}⌉`, the least integer with
/// `1/ψ(k) ≤ Π_{n=0}^{γ(k)} β_{n+1}`.
///
/// The product is exact: rational for the closed-form families, dyadic (the
/// binary values of `β_n`) for tables and closures up to `2^18` factors.
/// Past that an outward-rounded float bound is used, which may exceed the
/// least value. Existence is checked for every `k ≤ k_max`; past that range a
/// vanishing product (or an index beyond [`PSI_INDEX_CAP`]) evaluates to
/// `u64::MAX`.
pub fn psi_from_schedule<T: Real>(
    schedule: &Schedule<T>,
    gamma: &Modulus,
    k_max: u64,
) -> Result<Modulus> {
    let cache = Mutex::new(ProductCache::new(schedule));
    let sched = schedule.clone();
    let gamma_f = gamma.clone();
    let eval = move |k: u64| -> Option<u64> {
        let m = gamma_f.eval(k);
        if m > PSI_INDEX_CAP {
            return Some(u64::MAX);
        }
        cache.lock().expect("psi cache poisoned").psi(&sched, m as usize)
    };
    for k in 0..=k_max {
        if eval(k).is_none() {
            let m = gamma.eval(k);
            let index = (1..=m + 1)
                .find(|&n| schedule.beta(n) == T::zero())
                .unwrap_or(0);
            return Err(Error::NoValidPsi { k, index });
        }
    }
    Ok(Modulus::new(format!("psi[{}]", gamma.label()), move |k| {
        eval(k).unwrap_or(u64::MAX)
    }))
}

/// Checks `1/ψ(k) ≤ Π_{n=0}^{γ(k)} β_{n+1}` for `k ≤ k_max` by direct
/// floating-point multiplication; saturated `ψ(k)` are skipped. Returns the
/// offending `(k, ψ(k), product)`.
pub fn check_psi<T: Real>(
    schedule: &Schedule<T>,
    gamma: &Modulus,
    psi: &Modulus,
    k_max: u64,
) -> Vec<(u64, u64, f64)> {
    let mut bad = Vec::new();
    for k in 0..=k_max {
        let m = gamma.eval(k);
        let p = psi.eval(k);
        if p == u64::MAX {
            // Saturated: stands for a value past u64, no finite claim.
            continue;
        }
        let product: f64 = (0..=m).map(|n| schedule.beta(n + 1).as_f64()).product();
        // Each factor adds at most one rounding to the float product.
        let slack = 1e-12 + 4.0 * (m as f64 + 1.0) * f64::EPSILON;
        if 1.0 / p as f64 > product * (1.0 + slack) {
            bad.push((k, p, product));
        }
    }
    bad
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Condition {
    /// `Σ_{n≥2} (1-β_n)` diverges with rate `σ_1`.
    C1,
    /// `Π_{n≥1} β_{n+1} -> 0` with rate `σ_1*`.
    C1Star,
    /// `Σ |β_{n+1}-β_n|` converges with Cauchy modulus `σ_2`.
    C2,
    /// `Σ |λ_{n+1}-λ_n|` converges with Cauchy modulus `σ_3`.
    C3,
    /// `β_n -> 1` with rate `σ_4`.
    C4,
    /// `λ_n ≥ 1/Λ` for `n ≥ N_Λ`.
    C5,
}

impl Condition {
    pub fn name(self) -> &'static str {
        match self {
            Condition::C1 => "C1",
            Condition::C1Star => "C1*",
            Condition::C2 => "C2",
            Condition::C3 => "C3",
            Condition::C4 => "C4",
            Condition::C5 => "C5",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModulusViolation {
    pub k: u64,
    /// Index at which the defining inequality fails.
    pub n: u64,
    pub value: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub condition: Condition,
    /// Modulus not supplied; nothing was checked.
    pub absent: bool,
    pub passed: u64,
    /// Values of `k` the horizon was too short to decide.
    pub inconclusive: Vec<u64>,
    pub violations: Vec<ModulusViolation>,
}

impl ConditionReport {
    fn new(condition: Condition) -> Self {
        Self {
            condition,
            absent: false,
            passed: 0,
            inconclusive: Vec::new(),
            violations: Vec::new(),
        }
    }

    pub fn sound(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModuliReport {
    pub k_max: u64,
    pub horizon: u64,
    pub conditions: Vec<ConditionReport>,
}

impl ModuliReport {
    pub fn get(&self, c: Condition) -> &ConditionReport {
        self.conditions
            .iter()
            .find(|r| r.condition == c)
            .expect("all conditions reported")
    }

    /// No claimed modulus was refuted.
    pub fn sound(&self) -> bool {
        self.conditions.iter().all(ConditionReport::sound)
    }
}

/// Cauchy-modulus check shared by (C2) and (C3): `diffs[n] = |s_{n+1} - s_n|`.
fn check_cauchy(
    report: &mut ConditionReport,
    sigma: &Modulus,
    diffs: &[f64],
    k_max: u64,
    horizon: u64,
) {
    // tail[j] = Σ_{n=j}^{horizon} diffs[n], summed from the small end.
    let mut tail = vec![0.0; diffs.len() + 1];
    for j in (0..diffs.len()).rev() {
        tail[j] = tail[j + 1] + diffs[j];
    }
    for k in 0..=k_max {
        let bound = 1.0 / (k as f64 + 1.0);
        let start = sigma.eval(k);
        if start >= horizon {
            report.inconclusive.push(k);
            continue;
        }
        let start = start as usize + 1;
        if tail[start] <= bound + MODULI_TOL {
            report.passed += 1;
            continue;
        }
        let mut acc = 0.0;
        for (m, d) in diffs.iter().enumerate().skip(start) {
            acc += d;
            if acc > bound + MODULI_TOL {
                report.violations.push(ModulusViolation {
                    k,
                    n: m as u64,
                    value: acc,
                    bound,
                });
                break;
            }
        }
    }
}

/// Empirically checks each claimed modulus against the schedule for
/// `k ≤ k_max`, evaluating sums and products up to `horizon`.
///
/// A claim that needs indices past the horizon is reported inconclusive, not
/// failed, unless monotonicity settles it: the (C1) partial sums only grow
/// and the (C1*) products only shrink.
pub fn validate_moduli<T: Real>(
    schedule: &Schedule<T>,
    moduli: &ScheduleModuli,
    k_max: u64,
    horizon: u64,
) -> ModuliReport {
    let h = horizon as usize;
    let beta: Vec<f64> = (0..=horizon + 1).map(|n| schedule.beta(n).as_f64()).collect();
    let lambda: Vec<f64> = (0..=horizon + 1).map(|n| schedule.lambda(n).as_f64()).collect();
    let mut out = Vec::new();

    // (C1)
    let mut r = ConditionReport::new(Condition::C1);
    match &moduli.sigma1 {
        None => r.absent = true,
        Some(sigma1) => {
            // partial[N] = Σ_{n=2}^{N} (1-β_n)
            let mut partial = vec![0.0; h + 1];
            for n in 2..=h {
                partial[n] = partial[n - 1] + (1.0 - beta[n]);
            }
            for k in 0..=k_max {
                let target = k as f64;
                let n = sigma1.eval(k);
                if n <= horizon {
                    let value = partial[n as usize];
                    if value + MODULI_TOL >= target {
                        r.passed += 1;
                    } else {
                        r.violations.push(ModulusViolation {
                            k,
                            n,
                            value,
                            bound: target,
                        });
                    }
                } else {
                    // Past the horizon the sum is only known from below. A
                    // saturated N stands for something larger, and the
                    // partial sums only grow.
                    let tail = schedule.gap_sum_lower_bound(horizon + 1, n);
                    if partial[h] + tail.unwrap_or(0.0) + MODULI_TOL >= target {
                        r.passed += 1;
                    } else {
                        r.inconclusive.push(k);
                    }
                }
            }
        }
    }
    out.push(r);

    // (C1*)
    let mut r = ConditionReport::new(Condition::C1Star);
    match &moduli.sigma1_star {
        None => r.absent = true,
        Some(s) => {
            // prod[m] = Π_{n=1}^{m} β_{n+1}
            let mut prod = vec![1.0; h + 1];
            for m in 1..=h {
                prod[m] = prod[m - 1] * beta[m + 1];
            }
            for k in 0..=k_max {
                let bound = 1.0 / (k as f64 + 1.0);
                let m = s.eval(k);
                if m <= horizon {
                    let value = prod[m as usize];
                    if value <= bound + MODULI_TOL {
                        r.passed += 1;
                    } else {
                        r.violations.push(ModulusViolation {
                            k,
                            n: m,
                            value,
                            bound,
                        });
                    }
                } else if prod[h] <= bound + MODULI_TOL {
                    r.passed += 1;
                } else {
                    r.inconclusive.push(k);
                }
            }
        }
    }
    out.push(r);

    // (C2), (C3)
    let beta_diffs: Vec<f64> = (0..=h).map(|n| (beta[n + 1] - beta[n]).abs()).collect();
    let mut r = ConditionReport::new(Condition::C2);
    check_cauchy(&mut r, &moduli.sigma2, &beta_diffs, k_max, horizon);
    out.push(r);
    let lambda_diffs: Vec<f64> = (0..=h).map(|n| (lambda[n + 1] - lambda[n]).abs()).collect();
    let mut r = ConditionReport::new(Condition::C3);
    check_cauchy(&mut r, &moduli.sigma3, &lambda_diffs, k_max, horizon);
    out.push(r);

    // (C4): suffix maxima of 1-β_n with the earliest argmax.
    let mut r = ConditionReport::new(Condition::C4);
    let mut sup = vec![(0.0_f64, 0usize); h + 2];
    sup[h + 1] = (f64::NEG_INFINITY, h + 1);
    for n in (0..=h).rev() {
        let gap = 1.0 - beta[n];
        sup[n] = if gap >= sup[n + 1].0 { (gap, n) } else { sup[n + 1] };
    }
    for k in 0..=k_max {
        let bound = 1.0 / (k as f64 + 1.0);
        let n0 = moduli.sigma4.eval(k);
        if n0 > horizon {
            r.inconclusive.push(k);
            continue;
        }
        let (value, at) = sup[n0 as usize];
        if value <= bound + MODULI_TOL {
            r.passed += 1;
        } else {
            r.violations.push(ModulusViolation {
                k,
                n: at as u64,
                value,
                bound,
            });
        }
    }
    out.push(r);

    // (C5)
    let mut r = ConditionReport::new(Condition::C5);
    let floor = 1.0 / moduli.lambda_cap.max(1) as f64;
    if moduli.n_lambda > horizon {
        r.inconclusive.push(0);
    } else {
        match (moduli.n_lambda as usize..=h).find(|&n| lambda[n] + MODULI_TOL < floor) {
            Some(n) => r.violations.push(ModulusViolation {
                k: 0,
                n: n as u64,
                value: lambda[n],
                bound: floor,
            }),
            None => r.passed += 1,
        }
    }
    out.push(r);

    ModuliReport {
        k_max,
        horizon,
        conditions: out,
    }
}
