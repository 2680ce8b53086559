//! Rates of (T-)asymptotic regularity and their empirical audit.
//!
//! Every rate is a [`Modulus`] `k -> N` claiming `residual_n ≤ 1/(k+1)` for
//! all `n ≥ N`. All integer arithmetic saturates at `u64::MAX`, which reads
//! as "no claim within reach" and is reported as skipped by the verifier.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::iterations::{IterationKind, Trajectory};
use crate::modulus::{ceil_ln, sat_mul, scaled_minus_one, Modulus};
use crate::schedules::{psi_from_schedule, FamilyTag, Schedule, ScheduleModuli};
use crate::Real;

/// Absolute slack allowed on residuals when auditing a certificate.
pub const VERIFY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResidualKind {
    /// `d(a_n, a_{n+1})`.
    Step,
    /// `d(a_n, T a_n)`.
    T,
    /// `d(x_n, u_n)`.
    CompanionGap,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subject {
    /// `(x_n)`.
    TikhonovMann,
    /// `(y_n)`, equivalently `(u_n)` under the linking start.
    ModifiedHalpern,
    /// The pair `(x_n, u_n)`.
    Companion,
}

impl Subject {
    /// The other side of the link.
    pub fn flip(self) -> Option<Subject> {
        match self {
            Subject::TikhonovMann => Some(Subject::ModifiedHalpern),
            Subject::ModifiedHalpern => Some(Subject::TikhonovMann),
            Subject::Companion => None,
        }
    }

    fn matches(self, kind: IterationKind) -> bool {
        matches!(
            (self, kind),
            (Subject::TikhonovMann, IterationKind::TikhonovMann)
                | (Subject::Companion, IterationKind::TikhonovMann)
                | (Subject::ModifiedHalpern, IterationKind::ModifiedHalpern)
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CertSource {
    Alpha,
    Transfer,
    MhDivergence,
    MhProduct,
    MhTResidual,
    TmFromMh,
    MhFromTm,
    Empirical,
    Custom,
}

/// Which construction produced a certificate, with the constants it used.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Provenance {
    pub source: CertSource,
    pub k: Option<u64>,
    pub m: Option<u64>,
    pub lambda_cap: Option<u64>,
    pub n_lambda: Option<u64>,
    /// Built under the `β_0 = 1` convention.
    pub beta0_one: bool,
}

impl Provenance {
    fn new(source: CertSource) -> Self {
        Self {
            source,
            k: None,
            m: None,
            lambda_cap: None,
            n_lambda: None,
            beta0_one: false,
        }
    }

    fn with_k(mut self, k: u64) -> Self {
        self.k = Some(k);
        self
    }

    fn with_m(mut self, m: u64) -> Self {
        self.m = Some(m);
        self
    }

    fn with_lambda(mut self, moduli: &ScheduleModuli) -> Self {
        self.lambda_cap = Some(moduli.lambda_cap);
        self.n_lambda = Some(moduli.n_lambda);
        self
    }
}

/// A claimed rate for one residual sequence of one iteration.
#[derive(Clone, Debug)]
pub struct RateCertificate {
    pub name: String,
    pub rate: Modulus,
    pub kind: ResidualKind,
    pub subject: Subject,
    pub provenance: Provenance,
}

impl RateCertificate {
    pub fn new(
        name: impl Into<String>,
        rate: Modulus,
        kind: ResidualKind,
        subject: Subject,
        provenance: Provenance,
    ) -> Self {
        Self {
            name: name.into(),
            rate,
            kind,
            subject,
            provenance,
        }
    }

    /// A user-supplied rate.
    pub fn custom(name: impl Into<String>, rate: Modulus, kind: ResidualKind, subject: Subject) -> Self {
        Self::new(name, rate, kind, subject, Provenance::new(CertSource::Custom))
    }

    pub fn eval(&self, k: u64) -> u64 {
        self.rate.eval(k)
    }

    /// Same certificate with `N(k)` replaced by `f(N(k))`.
    pub fn transform(
        &self,
        name: impl Into<String>,
        f: impl Fn(u64) -> u64 + Send + Sync + 'static,
    ) -> Self {
        let inner = self.rate.clone();
        let name = name.into();
        Self {
            name: name.clone(),
            rate: Modulus::new(name, move |k| f(inner.eval(k))),
            kind: self.kind,
            subject: self.subject,
            provenance: self.provenance.clone(),
        }
    }
}

/// `α(k) = σ_4(2K(k+1) - 1)`: rate of `d(x_n, u_n) -> 0`.
pub fn alpha_rate(sigma4: &Modulus, k_const: u64) -> RateCertificate {
    let s4 = sigma4.clone();
    let c = sat_mul(2, k_const);
    RateCertificate::new(
        "alpha",
        Modulus::new(format!("alpha[K={k_const}]"), move |k| s4.eval(scaled_minus_one(c, k))),
        ResidualKind::CompanionGap,
        Subject::Companion,
        Provenance::new(CertSource::Alpha).with_k(k_const),
    )
}

/// `Φ'(k) = max{α(3k+2), Φ(3k+2)}`, moving a rate across the link.
pub fn transfer_ar(phi: &RateCertificate, alpha: &RateCertificate) -> Result<RateCertificate> {
    if alpha.kind != ResidualKind::CompanionGap {
        return Err(Error::Consistency(format!(
            "transfer needs a rate for d(x_n, u_n), got {}",
            alpha.name
        )));
    }
    let subject = phi.subject.flip().ok_or_else(|| {
        Error::Consistency("transfer source must be an iteration, not the companion gap".into())
    })?;
    if phi.kind == ResidualKind::CompanionGap {
        return Err(Error::Consistency("transfer source must be a step or T residual rate".into()));
    }
    let (p, a) = (phi.rate.clone(), alpha.rate.clone());
    let mut prov = Provenance::new(CertSource::Transfer);
    prov.k = alpha.provenance.k;
    Ok(RateCertificate::new(
        format!("{}_transferred", phi.name),
        Modulus::new(format!("transfer[{}]", phi.rate.label()), move |k| {
            let j = sat_mul(3, k).saturating_add(2);
            a.eval(j).max(p.eval(j))
        }),
        phi.kind,
        subject,
        prov,
    ))
}

/// `γ(k) = max{σ_2(8M(k+1) - 1), σ_3(4M(k+1) - 1)}`.
pub fn mh_gamma(moduli: &ScheduleModuli, m: u64) -> Modulus {
    let (s2, s3) = (moduli.sigma2.clone(), moduli.sigma3.clone());
    let (c8, c4) = (sat_mul(8, m), sat_mul(4, m));
    Modulus::new(format!("gamma[M={m}]"), move |k| {
        s2.eval(scaled_minus_one(c8, k)).max(s3.eval(scaled_minus_one(c4, k)))
    })
}

/// `Σ(k) = σ_1(γ(k) + ⌈ln(M(k+1))⌉ + 1) + 1`: step rate for `(y_n)` via (C1).
pub fn mh_ar_rate_div(moduli: &ScheduleModuli, m: u64) -> Result<RateCertificate> {
    let s1 = moduli
        .sigma1
        .clone()
        .ok_or_else(|| Error::Config("divergence rate sigma1 not supplied".into()))?;
    let gamma = mh_gamma(moduli, m);
    Ok(RateCertificate::new(
        "mh_sigma",
        Modulus::new(format!("Sigma[M={m}]"), move |k| {
            let arg = gamma
                .eval(k)
                .saturating_add(ceil_ln(sat_mul(m, k.saturating_add(1))))
                .saturating_add(1);
            s1.eval(arg).saturating_add(1)
        }),
        ResidualKind::Step,
        Subject::ModifiedHalpern,
        Provenance::new(CertSource::MhDivergence).with_m(m),
    ))
}

/// `Σ*(k) = σ_1*(Mψ(k)(k+1) - 1) + 1`: step rate for `(y_n)` via (C1*), with
/// `1/ψ(k) ≤ Π_{n=0}^{γ(k)} β_{n+1}`.
pub fn mh_ar_rate_prod(moduli: &ScheduleModuli, m: u64, psi: &Modulus) -> Result<RateCertificate> {
    let s1s = moduli
        .sigma1_star
        .clone()
        .ok_or_else(|| Error::Config("product rate sigma1* not supplied".into()))?;
    let psi = psi.clone();
    Ok(RateCertificate::new(
        "mh_sigma_star",
        Modulus::new(format!("Sigma*[M={m}]"), move |k| {
            s1s.eval(scaled_minus_one(sat_mul(m, psi.eval(k)), k)).saturating_add(1)
        }),
        ResidualKind::Step,
        Subject::ModifiedHalpern,
        Provenance::new(CertSource::MhProduct).with_m(m),
    ))
}

/// `Σ̂(k) = max{N_Λ, Σ(2Λ(k+1) - 1), σ_4(2MΛ(k+1) - 1)}`: T-residual rate for `(y_n)`.
pub fn mh_t_ar_rate(sigma: &RateCertificate, moduli: &ScheduleModuli, m: u64) -> Result<RateCertificate> {
    if sigma.subject != Subject::ModifiedHalpern || sigma.kind != ResidualKind::Step {
        return Err(Error::Consistency(format!(
            "{} is not a step rate for the modified Halpern iteration",
            sigma.name
        )));
    }
    if sigma.provenance.m.is_some_and(|sm| sm != m) {
        return Err(Error::Consistency(format!(
            "{} was built with M = {}, not {m}",
            sigma.name,
            sigma.provenance.m.unwrap_or(0)
        )));
    }
    let (lam, nl) = (moduli.lambda_cap, moduli.n_lambda);
    let s = sigma.rate.clone();
    let s4 = moduli.sigma4.clone();
    let c2 = sat_mul(2, lam);
    let c2m = sat_mul(c2, m);
    let mut prov = sigma.provenance.clone().with_lambda(moduli);
    prov.source = CertSource::MhTResidual;
    prov.m = Some(m);
    Ok(RateCertificate::new(
        format!("{}_hat", sigma.name),
        Modulus::new(format!("hat[{}]", sigma.rate.label()), move |k| {
            nl.max(s.eval(scaled_minus_one(c2, k)))
                .max(s4.eval(scaled_minus_one(c2m, k)))
        }),
        ResidualKind::T,
        Subject::ModifiedHalpern,
        prov,
    ))
}

/// Step and T-residual rates for `(x_n)` obtained from a modified Halpern rate.
#[derive(Clone, Debug)]
pub struct TmFromMh {
    /// `Φ(k) = max{σ_4(6K(k+1) - 1), Σ(3k+2)}`.
    pub phi: RateCertificate,
    /// `Φ̂(k) = max{σ_4(6K(k+1) - 1), N_Λ, Σ(6Λ(k+1) - 1), σ_4(24KΛ(k+1) - 1)}`.
    pub phi_hat: RateCertificate,
}

/// Rates for `(x_n)` from a step rate `Σ` (or `Σ*`) for `(y_n)` built with `M = 4K`.
pub fn tm_rates_from_mh(moduli: &ScheduleModuli, k_const: u64, sigma: &RateCertificate) -> Result<TmFromMh> {
    if sigma.subject != Subject::ModifiedHalpern || sigma.kind != ResidualKind::Step {
        return Err(Error::Consistency(format!(
            "{} is not a step rate for the modified Halpern iteration",
            sigma.name
        )));
    }
    let want = sat_mul(4, k_const);
    if sigma.provenance.m != Some(want) {
        return Err(Error::Consistency(format!(
            "{} must be built with M = 4K = {want}, found {:?}",
            sigma.name, sigma.provenance.m
        )));
    }
    let (lam, nl) = (moduli.lambda_cap, moduli.n_lambda);
    let c6 = sat_mul(6, k_const);
    let c6l = sat_mul(6, lam);
    let c24 = sat_mul(sat_mul(24, k_const), lam);
    let prov = Provenance::new(CertSource::TmFromMh)
        .with_k(k_const)
        .with_m(want)
        .with_lambda(moduli);

    let (s, s4) = (sigma.rate.clone(), moduli.sigma4.clone());
    let phi = RateCertificate::new(
        format!("tm_phi_from_{}", sigma.name),
        Modulus::new(format!("Phi[{}]", sigma.rate.label()), move |k| {
            s4.eval(scaled_minus_one(c6, k))
                .max(s.eval(sat_mul(3, k).saturating_add(2)))
        }),
        ResidualKind::Step,
        Subject::TikhonovMann,
        prov.clone(),
    );
    let (s, s4) = (sigma.rate.clone(), moduli.sigma4.clone());
    let phi_hat = RateCertificate::new(
        format!("tm_phi_hat_from_{}", sigma.name),
        Modulus::new(format!("PhiHat[{}]", sigma.rate.label()), move |k| {
            s4.eval(scaled_minus_one(c6, k))
                .max(nl)
                .max(s.eval(scaled_minus_one(c6l, k)))
                .max(s4.eval(scaled_minus_one(c24, k)))
        }),
        ResidualKind::T,
        Subject::TikhonovMann,
        prov,
    );
    Ok(TmFromMh { phi, phi_hat })
}

/// Rates for `(y_n)` obtained from the Tikhonov-Mann side under `β_0 = 1`.
#[derive(Clone, Debug)]
pub struct MhFromTm {
    /// `χ(k) = max{σ_2(8K(k+1) - 1), σ_3(8K(k+1) - 1)}`.
    pub chi: Modulus,
    /// `θ(k) = σ_4(6K(k+1) - 1)`.
    pub theta: Modulus,
    /// Step rate via (C1); absent without `σ_1`.
    pub sigma: Option<RateCertificate>,
    pub sigma_hat: Option<RateCertificate>,
    /// Step rate via (C1*); absent without `σ_1*` or a valid `ψ`.
    pub sigma_star: Option<RateCertificate>,
    pub sigma_hat_star: Option<RateCertificate>,
    /// Why the (C1*) rates are absent, if they are.
    pub psi_error: Option<Error>,
}

/// `χ` and `θ` of the transfer from `(x_n)` to `(y_n)`.
pub fn mh_from_tm_chi_theta(moduli: &ScheduleModuli, k_const: u64) -> (Modulus, Modulus) {
    let (s2, s3, s4) = (moduli.sigma2.clone(), moduli.sigma3.clone(), moduli.sigma4.clone());
    let c8 = sat_mul(8, k_const);
    let c6 = sat_mul(6, k_const);
    let chi = Modulus::new(format!("chi[K={k_const}]"), move |k| {
        let j = scaled_minus_one(c8, k);
        s2.eval(j).max(s3.eval(j))
    });
    let theta = Modulus::new(format!("theta[K={k_const}]"), move |k| s4.eval(scaled_minus_one(c6, k)));
    (chi, theta)
}

/// All four rates for `(y_n)` from the Tikhonov-Mann analysis. The schedule
/// must use `β_0 = 1`; `ψ` is computed against `χ(3k+2)` and validated for
/// `k ≤ psi_k_max`.
pub fn mh_rates_from_tm<T: Real>(
    schedule: &Schedule<T>,
    moduli: &ScheduleModuli,
    k_const: u64,
    psi_k_max: u64,
) -> Result<MhFromTm> {
    if schedule.beta(0) != T::one() {
        return Err(Error::Consistency(format!(
            "rates for (y_n) from (x_n) need beta_0 = 1, schedule has beta_0 = {}",
            schedule.beta(0)
        )));
    }
    let (chi, _) = mh_from_tm_chi_theta(moduli, k_const);
    let psi_index = chi.compose(&Modulus::affine(3, 2));
    let psi = moduli
        .sigma1_star
        .as_ref()
        .map(|_| psi_from_schedule(schedule, &psi_index, psi_k_max));
    match psi {
        Some(Err(e)) => {
            let mut out = mh_rates_from_tm_with_psi(moduli, k_const, None)?;
            out.psi_error = Some(e);
            Ok(out)
        }
        Some(Ok(psi)) => mh_rates_from_tm_with_psi(moduli, k_const, Some(&psi)),
        None => mh_rates_from_tm_with_psi(moduli, k_const, None),
    }
}

/// As [`mh_rates_from_tm`] with `ψ` supplied (`1/ψ(k) ≤ Π_{n=0}^{χ(3k+2)} β_{n+1}`).
/// The caller is responsible for the `β_0 = 1` convention.
pub fn mh_rates_from_tm_with_psi(
    moduli: &ScheduleModuli,
    k_const: u64,
    psi: Option<&Modulus>,
) -> Result<MhFromTm> {
    let (chi, theta) = mh_from_tm_chi_theta(moduli, k_const);
    let (lam, nl) = (moduli.lambda_cap, moduli.n_lambda);
    let c6l = sat_mul(6, lam);
    let c12 = sat_mul(sat_mul(12, k_const), lam);
    let mut prov = Provenance::new(CertSource::MhFromTm)
        .with_k(k_const)
        .with_lambda(moduli);
    prov.beta0_one = true;

    let hat = |base: &RateCertificate, name: &str| {
        let (s, th, s4) = (base.rate.clone(), theta.clone(), moduli.sigma4.clone());
        RateCertificate::new(
            name,
            Modulus::new(format!("hat[{}]", base.rate.label()), move |k| {
                th.eval(k)
                    .max(nl)
                    .max(s.eval(scaled_minus_one(c6l, k)))
                    .max(s4.eval(scaled_minus_one(c12, k)))
            }),
            ResidualKind::T,
            Subject::ModifiedHalpern,
            prov.clone(),
        )
    };

    let sigma = moduli.sigma1.clone().map(|s1| {
        let (ch, th) = (chi.clone(), theta.clone());
        RateCertificate::new(
            "mh_from_tm_sigma",
            Modulus::new(format!("SigmaTm[K={k_const}]"), move |k| {
                let arg = ch
                    .eval(sat_mul(9, k).saturating_add(8))
                    .saturating_add(2)
                    .saturating_add(ceil_ln(sat_mul(sat_mul(18, k_const), k.saturating_add(1))));
                th.eval(k).max(s1.eval(arg).saturating_add(1))
            }),
            ResidualKind::Step,
            Subject::ModifiedHalpern,
            prov.clone(),
        )
    });
    let sigma_hat = sigma.as_ref().map(|s| hat(s, "mh_from_tm_sigma_hat"));

    let sigma_star = match (&moduli.sigma1_star, psi) {
        (Some(s1s), Some(psi)) => {
            let (s1s, psi, ch, th) = (s1s.clone(), psi.clone(), chi.clone(), theta.clone());
            let c18 = sat_mul(18, k_const);
            Some(RateCertificate::new(
                "mh_from_tm_sigma_star",
                Modulus::new(format!("SigmaTm*[K={k_const}]"), move |k| {
                    // ψ*(k) = 18K(k+1)ψ(3k+2)
                    let psi_star = sat_mul(
                        sat_mul(c18, k.saturating_add(1)),
                        psi.eval(sat_mul(3, k).saturating_add(2)),
                    );
                    th.eval(k)
                        .max(s1s.eval(psi_star.saturating_sub(1)).saturating_add(1))
                        .max(ch.eval(sat_mul(9, k).saturating_add(8)).saturating_add(2))
                }),
                ResidualKind::Step,
                Subject::ModifiedHalpern,
                prov.clone(),
            ))
        }
        _ => None,
    };
    let sigma_hat_star = sigma_star.as_ref().map(|s| hat(s, "mh_from_tm_sigma_hat_star"));

    Ok(MhFromTm {
        chi,
        theta,
        sigma,
        sigma_hat,
        sigma_star,
        sigma_hat_star,
        psi_error: None,
    })
}

/// Which closed-form `O(1/n)` envelope pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinearKind {
    /// `(y_n)`: `2M/(n+1)` and `4M/(λ(n+1))`.
    Mh,
    /// `(x_n)`: `4K/n` and `8K/(λn)`.
    Tm,
    /// `(x_n)` through the modified Halpern rates: `16K/n` and `24K/(λn)`.
    TmFromMh,
    /// `(y_n)` through the Tikhonov-Mann rates: `12K/n` and `16K/(λn)`.
    MhFromTm,
}

impl LinearKind {
    pub const ALL: [LinearKind; 4] = [
        LinearKind::Mh,
        LinearKind::Tm,
        LinearKind::TmFromMh,
        LinearKind::MhFromTm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LinearKind::Mh => "mh",
            LinearKind::Tm => "tm",
            LinearKind::TmFromMh => "tm-from-mh",
            LinearKind::MhFromTm => "mh-from-tm",
        }
    }

    pub fn subject(self) -> Subject {
        match self {
            LinearKind::Mh | LinearKind::MhFromTm => Subject::ModifiedHalpern,
            LinearKind::Tm | LinearKind::TmFromMh => Subject::TikhonovMann,
        }
    }

    /// (step coefficient, T coefficient, index shift).
    fn shape(self) -> (f64, f64, u64) {
        match self {
            LinearKind::Mh => (2.0, 4.0, 1),
            LinearKind::Tm => (4.0, 8.0, 0),
            LinearKind::TmFromMh => (16.0, 24.0, 0),
            LinearKind::MhFromTm => (12.0, 16.0, 0),
        }
    }
}

/// Explicit envelopes `n -> bound` for the step and T residuals under the
/// `β_n = 1 - 2/n` schedule. `constant` is `M` for [`LinearKind::Mh`] and `K`
/// otherwise.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearRates {
    pub kind: LinearKind,
    pub constant: u64,
    pub lambda: f64,
}

impl LinearRates {
    /// Bound on `d(a_n, a_{n+1})`; `None` below the first valid index.
    pub fn step_bound(&self, n: u64) -> Option<f64> {
        let (c, _, shift) = self.kind.shape();
        let d = n + shift;
        (d >= 1).then(|| c * self.constant as f64 / d as f64)
    }

    /// Bound on `d(a_n, T a_n)`, valid for `n ≥ 1`.
    pub fn t_bound(&self, n: u64) -> Option<f64> {
        let (_, c, shift) = self.kind.shape();
        (n >= 1).then(|| c * self.constant as f64 / (self.lambda * (n + shift) as f64))
    }
}

pub fn linear_rates<T: Real>(kind: LinearKind, schedule: &Schedule<T>, constant: u64) -> Result<LinearRates> {
    if schedule.family() != FamilyTag::Sabach {
        return Err(Error::Consistency(format!(
            "linear rates need the beta_n = 1 - 2/n schedule, got {}",
            schedule.label()
        )));
    }
    let lambda = schedule
        .constant_lambda()
        .ok_or_else(|| Error::Consistency("linear rates need constant lambda".into()))?;
    Ok(LinearRates {
        kind,
        constant,
        lambda: lambda.as_f64(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum SabachShternViolation {
    /// `a_1 > L`.
    Start { a1: f64 },
    /// `c_n > L`.
    Coefficient { n: u64, c: f64 },
    /// `a_{n+1} > (1-b_{n+1})a_n + (b_n-b_{n+1})c_n`.
    Recurrence { n: u64, lhs: f64, rhs: f64 },
    /// `a_n > 2L/n`.
    Conclusion { n: u64, a: f64, bound: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SabachShternReport {
    pub horizon: u64,
    /// First hypothesis failure; the conclusion is not checked past one.
    pub hypothesis: Option<SabachShternViolation>,
    pub conclusion: Option<SabachShternViolation>,
    /// `max_n n a_n / (2L)`.
    pub worst_ratio: f64,
}

impl SabachShternReport {
    pub fn pass(&self) -> bool {
        self.hypothesis.is_none() && self.conclusion.is_none()
    }
}

fn ss_b(n: u64) -> f64 {
    (2.0 / n as f64).min(1.0)
}

/// Checks `a_n ≤ 2L/n` on `[1, horizon]` for sequences satisfying
/// `a_{n+1} ≤ (1-b_{n+1})a_n + (b_n-b_{n+1})c_n` with `b_n = min{2/n, 1}`,
/// `a_1 ≤ L`, `c_n ≤ L`. Both slices are indexed by `n` (entry 0 unused) and
/// must reach `horizon`.
pub fn sabach_shtern_check(a: &[f64], c: &[f64], l: f64, horizon: u64) -> Result<SabachShternReport> {
    let h = horizon as usize;
    if h < 1 || a.len() <= h || c.len() < h {
        return Err(Error::Shape(format!(
            "need a[1..={h}] and c[1..{h}], got lengths {} and {}",
            a.len(),
            c.len()
        )));
    }
    let mut rep = SabachShternReport {
        horizon,
        hypothesis: None,
        conclusion: None,
        worst_ratio: 0.0,
    };
    if a[1] > l {
        rep.hypothesis = Some(SabachShternViolation::Start { a1: a[1] });
        return Ok(rep);
    }
    for n in 1..h {
        if c[n] > l {
            rep.hypothesis = Some(SabachShternViolation::Coefficient { n: n as u64, c: c[n] });
            return Ok(rep);
        }
        let (bn, bn1) = (ss_b(n as u64), ss_b(n as u64 + 1));
        let rhs = (1.0 - bn1) * a[n] + (bn - bn1) * c[n];
        if a[n + 1] > rhs {
            rep.hypothesis = Some(SabachShternViolation::Recurrence {
                n: n as u64,
                lhs: a[n + 1],
                rhs,
            });
            return Ok(rep);
        }
    }
    for (n, &an) in a.iter().enumerate().take(h + 1).skip(1) {
        let bound = 2.0 * l / n as f64;
        if l > 0.0 {
            rep.worst_ratio = rep.worst_ratio.max(an / bound);
        }
        if an > bound && rep.conclusion.is_none() {
            rep.conclusion = Some(SabachShternViolation::Conclusion {
                n: n as u64,
                a: an,
                bound,
            });
        }
    }
    Ok(rep)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum CertStatus {
    /// Every residual on `[N(k), horizon]` is within the bound; `margin` is
    /// `1/(k+1)` minus the largest of them.
    Pass { margin: f64 },
    /// First index at or past `N(k)` whose residual exceeds `1/(k+1) + tol`.
    Fail { n: u64, residual: f64, bound: f64 },
    /// `N(k)` lies past the audited range.
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KStatus {
    pub k: u64,
    pub n: u64,
    pub status: CertStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CertReport {
    pub name: String,
    pub subject: Subject,
    pub kind: ResidualKind,
    pub k_max: u64,
    /// Last residual index inspected.
    pub horizon: u64,
    pub entries: Vec<KStatus>,
}

impl CertReport {
    pub fn checked(&self) -> usize {
        self.entries
            .iter()
            .filter(|e| e.status != CertStatus::Skipped)
            .count()
    }

    pub fn failures(&self) -> impl Iterator<Item = &KStatus> {
        self.entries
            .iter()
            .filter(|e| matches!(e.status, CertStatus::Fail { .. }))
    }

    pub fn sound(&self) -> bool {
        self.failures().next().is_none()
    }
}

/// The residual sequence a certificate speaks about.
pub fn residual_series<'a, P, T>(traj: &'a Trajectory<P, T>, cert: &RateCertificate) -> Result<&'a [T]> {
    if !cert.subject.matches(traj.kind) {
        return Err(Error::Consistency(format!(
            "certificate {} is about {:?}, trajectory is {:?}",
            cert.name, cert.subject, traj.kind
        )));
    }
    Ok(match (cert.subject, cert.kind) {
        (Subject::Companion, ResidualKind::CompanionGap) => &traj.companion_gaps,
        (Subject::Companion, _) | (_, ResidualKind::CompanionGap) => {
            return Err(Error::Consistency(format!(
                "certificate {} mixes the companion gap with an iteration residual",
                cert.name
            )))
        }
        (_, ResidualKind::Step) => &traj.step_residuals,
        (_, ResidualKind::T) => &traj.t_residuals,
    })
}

/// Audits `residual_n ≤ 1/(k+1) + VERIFY_TOL` for `n ∈ [N(k), horizon]`,
/// `k ≤ k_max`. The horizon is clipped to the trajectory.
pub fn verify_certificate<P, T: Real>(
    traj: &Trajectory<P, T>,
    cert: &RateCertificate,
    k_max: u64,
    horizon: u64,
) -> Result<CertReport> {
    let series = residual_series(traj, cert)?;
    let mut entries = Vec::with_capacity(k_max as usize + 1);
    if series.is_empty() {
        entries.extend((0..=k_max).map(|k| KStatus {
            k,
            n: cert.eval(k),
            status: CertStatus::Skipped,
        }));
        return Ok(report(cert, k_max, 0, entries));
    }
    let last = (series.len() as u64 - 1).min(horizon) as usize;
    // sup[n] = max_{j ∈ [n, last]} residual_j
    let mut sup = vec![0.0_f64; last + 1];
    let mut acc = f64::NEG_INFINITY;
    for n in (0..=last).rev() {
        acc = acc.max(series[n].as_f64());
        sup[n] = acc;
    }
    for k in 0..=k_max {
        let n0 = cert.eval(k);
        let bound = 1.0 / (k as f64 + 1.0);
        let status = if n0 > last as u64 {
            CertStatus::Skipped
        } else if sup[n0 as usize] <= bound + VERIFY_TOL {
            CertStatus::Pass {
                margin: bound - sup[n0 as usize],
            }
        } else {
            let n = (n0 as usize..=last)
                .find(|&n| series[n].as_f64() > bound + VERIFY_TOL)
                .expect("suffix maximum exceeds the bound");
            CertStatus::Fail {
                n: n as u64,
                residual: series[n].as_f64(),
                bound,
            }
        };
        entries.push(KStatus { k, n: n0, status });
    }
    Ok(report(cert, k_max, last as u64, entries))
}

fn report(cert: &RateCertificate, k_max: u64, horizon: u64, entries: Vec<KStatus>) -> CertReport {
    CertReport {
        name: cert.name.clone(),
        subject: cert.subject,
        kind: cert.kind,
        k_max,
        horizon,
        entries,
    }
}

/// The least `N(k)` with `residual_n ≤ 1/(k+1)` on `[N(k), end]` of the given
/// series, or the series length when no such index exists. Valid only for
/// the run it was read from, and only up to its end.
pub fn empirical_rate<T: Real>(
    name: impl Into<String>,
    series: &[T],
    kind: ResidualKind,
    subject: Subject,
) -> RateCertificate {
    let mut sup: Vec<f64> = series.iter().map(|r| r.as_f64()).collect();
    for n in (0..sup.len().saturating_sub(1)).rev() {
        sup[n] = sup[n].max(sup[n + 1]);
    }
    let name = name.into();
    RateCertificate::new(
        name.clone(),
        Modulus::new(name, move |k| {
            let bound = 1.0 / (k as f64 + 1.0);
            sup.partition_point(|&s| s > bound) as u64
        }),
        kind,
        subject,
        Provenance::new(CertSource::Empirical),
    )
}
