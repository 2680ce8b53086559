//! Integer-valued functions `k -> N` used for moduli and rate certificates.

use std::fmt;
use std::sync::Arc;

/// A total function `N -> N` with a human-readable label.
///
/// Arithmetic inside the provided constructors saturates at `u64::MAX`, which
/// the verifiers treat as "beyond any horizon".
#[derive(Clone)]
pub struct Modulus {
    f: Arc<dyn Fn(u64) -> u64 + Send + Sync>,
    label: Arc<str>,
}

impl Modulus {
    pub fn new(label: impl Into<String>, f: impl Fn(u64) -> u64 + Send + Sync + 'static) -> Self {
        Self {
            f: Arc::new(f),
            label: Arc::from(label.into()),
        }
    }

    #[inline]
    pub fn eval(&self, k: u64) -> u64 {
        (self.f)(k)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn identity() -> Self {
        Self::new("k", |k| k)
    }

    pub fn constant(c: u64) -> Self {
        Self::new(c.to_string(), move |_| c)
    }

    /// `k -> a*k + b`.
    pub fn affine(a: u64, b: u64) -> Self {
        Self::new(format!("{a}k+{b}"), move |k| a.saturating_mul(k).saturating_add(b))
    }

    /// Pointwise composition `k -> self(inner(k))`.
    pub fn compose(&self, inner: &Modulus) -> Self {
        let (outer, inner_f) = (self.clone(), inner.clone());
        Self::new(format!("{}∘{}", self.label, inner.label), move |k| {
            outer.eval(inner_f.eval(k))
        })
    }

    /// Pointwise maximum.
    pub fn max(&self, other: &Modulus) -> Self {
        let (a, b) = (self.clone(), other.clone());
        Self::new(format!("max({}, {})", self.label, other.label), move |k| {
            a.eval(k).max(b.eval(k))
        })
    }

    /// Same function, new label.
    pub fn relabel(&self, label: impl Into<String>) -> Self {
        Self {
            f: self.f.clone(),
            label: Arc::from(label.into()),
        }
    }
}

impl fmt::Debug for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Modulus").field(&self.label).finish()
    }
}

/// `⌈ln x⌉` for a positive integer, rounded upwards at representation
/// boundaries so the result never falls below the true value.
pub fn ceil_ln(x: u64) -> u64 {
    if x <= 1 {
        return 0;
    }
    let v = (x as f64).ln();
    next_up(v).ceil() as u64
}

/// `k * (k + 1)` style products used by the rate formulas, saturating.
#[inline]
pub(crate) fn sat_mul(a: u64, b: u64) -> u64 {
    a.saturating_mul(b)
}

/// `c * (k + 1) - 1`, saturating; `c >= 1` keeps the result nonnegative.
#[inline]
pub(crate) fn scaled_minus_one(c: u64, k: u64) -> u64 {
    match c.checked_mul(k.saturating_add(1)) {
        Some(v) => v.saturating_sub(1),
        None => u64::MAX,
    }
}

/// Smallest double strictly greater than a finite positive `v`.
pub(crate) fn next_up(v: f64) -> f64 {
    if v.is_nan() || v == f64::INFINITY {
        return v;
    }
    if v == 0.0 {
        return f64::from_bits(1);
    }
    let bits = v.to_bits();
    if v > 0.0 {
        f64::from_bits(bits + 1)
    } else {
        f64::from_bits(bits - 1)
    }
}
