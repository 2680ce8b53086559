//! Instances and the full certificate sweep, shared by the CLI and the
//! acceptance run.

use geofix::rates::{empirical_rate, residual_series};
use geofix::{
    alpha_rate, bound_constants, link_report, linear_rates, make_operator, mh_ar_rate_div,
    mh_ar_rate_prod, mh_gamma, mh_rates_from_tm, mh_t_ar_rate, modified_halpern_run,
    psi_from_schedule, tikhonov_mann_run, tm_rates_from_mh, transfer_ar, verify_certificate, zoo,
    BoundConstants, CertReport, Error, FamilyTag, LinearKind, LinkReport, NonexpansiveMap,
    Operator64, OperatorSpec, Point, Point64, RateCertificate, ResidualKind, Result, Schedule64,
    ScheduleModuli, Space64, Subject, Trajectory64, WSpace,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Everything one iteration experiment needs.
#[derive(Clone, Debug)]
pub struct Instance {
    pub label: String,
    pub space: Space64,
    pub op: Operator64,
    pub u: Point64,
    pub x0: Point64,
    pub schedule: Schedule64,
    pub moduli: ScheduleModuli,
}

impl Instance {
    pub fn new(
        space: Space64,
        spec: OperatorSpec<f64>,
        u: Point64,
        x0: Point64,
        schedule: Schedule64,
        moduli: ScheduleModuli,
    ) -> Result<Self> {
        space.validate(&u)?;
        space.validate(&x0)?;
        let label = format!("{}/{}/{}", space.model().name(), spec.label(), schedule.label());
        let op = make_operator(spec, &space)?;
        Ok(Self {
            label,
            space,
            op,
            u,
            x0,
            schedule,
            moduli,
        })
    }

    /// `y_0 = (1-β_0)u + β_0 x_0`.
    pub fn y0(&self) -> Result<Point64> {
        geofix::link_start(&self.space, &self.u, &self.x0, &self.schedule)
    }

    pub fn constants(&self) -> Result<BoundConstants<f64>> {
        bound_constants(&self.space, &self.op, &self.u, &self.x0, &self.y0()?)
    }

    /// `K` for the Tikhonov-Mann run started at `x_0 = y_0`, which is the
    /// run whose rates transfer to `(y_n)` under `β_0 = 1`.
    pub fn k_from_y0(&self) -> Result<u64> {
        let y0 = self.y0()?;
        Ok(bound_constants(&self.space, &self.op, &self.u, &y0, &y0)?.k)
    }

    pub fn tm(&self, n_steps: usize) -> Result<Trajectory64> {
        tikhonov_mann_run(&self.space, &self.op, &self.u, &self.x0, &self.schedule, n_steps)
    }

    pub fn mh(&self, n_steps: usize) -> Result<Trajectory64> {
        modified_halpern_run(&self.space, &self.op, &self.u, &self.y0()?, &self.schedule, n_steps)
    }
}

pub fn sample_near(space: &Space64, p: &Point64, rng: &mut ChaCha8Rng, radius: f64) -> Point64 {
    let d = space.sample(rng, radius);
    match (p, d) {
        (Point::Vector(a), Point::Vector(b)) => Point::vector(a.iter().zip(&b).map(|(x, y)| x + y).collect()),
        (_, d) => d,
    }
}

/// The spaces the zoo is swept over.
pub fn zoo_spaces() -> Vec<Space64> {
    vec![
        Space64::euclidean(2).expect("dim 2"),
        Space64::l1(2).expect("dim 2"),
        Space64::linf(2).expect("dim 2"),
        Space64::star_tree(4).expect("4 rays"),
    ]
}

/// `draws` instances per zoo member per space, anchors sampled within
/// distance about `radius` of the fixed point.
pub fn zoo_instances(
    schedule: &Schedule64,
    moduli: &ScheduleModuli,
    seed: u64,
    draws: usize,
    radius: f64,
) -> Result<Vec<Instance>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for space in zoo_spaces() {
        for spec in zoo(&space) {
            let op = make_operator(spec.clone(), &space)?;
            for _ in 0..draws {
                let u = sample_near(&space, op.fixed_point(), &mut rng, radius);
                let x0 = sample_near(&space, op.fixed_point(), &mut rng, radius);
                out.push(Instance::new(
                    space.clone(),
                    spec.clone(),
                    u,
                    x0,
                    schedule.clone(),
                    moduli.clone(),
                )?);
            }
        }
    }
    Ok(out)
}

/// Ranges for one certificate sweep.
#[derive(Clone, Debug)]
pub struct CertOptions {
    pub horizon: u64,
    /// Largest `k` for the alpha rate.
    pub k_max_alpha: u64,
    /// Largest `k` for rates built on the divergence modulus `σ_1`.
    pub k_max_div: u64,
    /// Largest `k` for every other rate.
    pub k_max: u64,
    /// Replaces the computed `K`; must still dominate `M_p`.
    pub k_const: Option<u64>,
    /// Replaces the computed `M`; must still dominate `4 max{d(u,p), d(y_0,p)}`.
    /// When set, the rates for `(x_n)` are built from this `M` and need `M = 4K`.
    pub m_const: Option<u64>,
    /// Certificates to build and audit; `None` means all. `alpha` is always
    /// built since the transfers use it.
    pub select: Option<Vec<String>>,
}

impl CertOptions {
    pub fn wants(&self, name: &str) -> bool {
        name == "alpha" || self.select.as_ref().is_none_or(|s| s.iter().any(|x| x == name))
    }

    fn wants_any(&self, names: &[&str]) -> bool {
        names.iter().any(|n| self.wants(n))
    }
}

impl Default for CertOptions {
    fn default() -> Self {
        Self {
            horizon: 200_000,
            k_max_alpha: 50,
            k_max_div: 5,
            k_max: 20,
            k_const: None,
            m_const: None,
            select: None,
        }
    }
}

/// A certificate and the `k` range it is audited on.
#[derive(Clone, Debug)]
pub struct CertCase {
    pub cert: RateCertificate,
    pub k_max: u64,
}

/// Deliberate damage to one certificate, for exercising the auditor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Corruption {
    /// `N(k) -> 0`.
    Zero,
    /// `N(k) -> N(k)/2`.
    Halve,
}

impl Corruption {
    pub fn apply(&self, cert: &RateCertificate) -> RateCertificate {
        match self {
            Corruption::Zero => cert.transform(format!("{}_zeroed", cert.name), |_| 0),
            Corruption::Halve => cert.transform(format!("{}_halved", cert.name), |n| n / 2),
        }
    }
}

/// Every certificate the schedule's moduli support, with the constants of
/// `inst` (or the overrides in `opts`).
///
/// Routes that cannot be built for this schedule are left out and named in
/// the returned notes; a violated coupling between overridden constants is
/// an error.
pub fn build_certificates(inst: &Instance, opts: &CertOptions) -> Result<(Vec<CertCase>, Vec<String>)> {
    let c = inst.constants()?;
    let y0 = inst.y0()?;
    let p = inst.op.fixed_point();
    let k = match opts.k_const {
        Some(k) if (k as f64) < c.mp => {
            return Err(Error::Config(format!("K = {k} is below M_p = {}", c.mp)));
        }
        Some(k) => k.max(1),
        None => c.k,
    };
    let m = match opts.m_const {
        Some(m) => {
            let need = 4.0 * inst.space.dist(&inst.u, p)?.max(inst.space.dist(&y0, p)?);
            if (m as f64) < need {
                return Err(Error::Config(format!("M = {m} is below 4 max{{d(u,p), d(y0,p)}} = {need}")));
            }
            m.max(1)
        }
        None => c.m,
    };
    // Rates for (x_n) go through the modified Halpern rates with M = 4K.
    let m_tm = if opts.m_const.is_some() { m } else { 4 * k };
    let moduli = &inst.moduli;
    let mut cases = Vec::new();
    let mut notes = Vec::new();
    let mut push = |cert: RateCertificate, k_max: u64| cases.push(CertCase { cert, k_max });

    push(alpha_rate(&moduli.sigma4, k), opts.k_max_alpha);

    if moduli.sigma1.is_some() {
        let sigma = mh_ar_rate_div(moduli, m)?;
        push(mh_t_ar_rate(&sigma, moduli, m)?, opts.k_max_div);
        push(sigma, opts.k_max_div);
        if opts.wants_any(&["tm_phi_from_mh_sigma", "tm_phi_hat_from_mh_sigma"]) {
            let sigma_tm = mh_ar_rate_div(moduli, m_tm)?;
            let tm = tm_rates_from_mh(moduli, k, &sigma_tm)?;
            push(tm.phi, opts.k_max_div);
            push(tm.phi_hat, opts.k_max_div);
        }
    } else {
        notes.push("no sigma1: divergence-route rates omitted".to_string());
    }

    if moduli.sigma1_star.is_some() {
        let built = psi_from_schedule(&inst.schedule, &mh_gamma(moduli, m), opts.k_max).and_then(|psi| {
            let sigma_tm = if opts.wants_any(&["tm_phi_from_mh_sigma_star", "tm_phi_hat_from_mh_sigma_star"]) {
                let psi_tm = psi_from_schedule(&inst.schedule, &mh_gamma(moduli, m_tm), opts.k_max)?;
                Some(mh_ar_rate_prod(moduli, m_tm, &psi_tm)?)
            } else {
                None
            };
            Ok((mh_ar_rate_prod(moduli, m, &psi)?, sigma_tm))
        });
        match built {
            Ok((sigma, sigma_tm)) => {
                push(mh_t_ar_rate(&sigma, moduli, m)?, opts.k_max);
                push(sigma, opts.k_max);
                if let Some(sigma_tm) = sigma_tm {
                    let tm = tm_rates_from_mh(moduli, k, &sigma_tm)?;
                    push(tm.phi, opts.k_max);
                    push(tm.phi_hat, opts.k_max);
                }
            }
            Err(e @ Error::NoValidPsi { .. }) => notes.push(format!("product-route rates omitted: {e}")),
            Err(e) => return Err(e),
        }
    } else {
        notes.push("no sigma1*: product-route rates omitted".to_string());
    }

    let mh_from_tm = ["mh_from_tm_sigma", "mh_from_tm_sigma_hat", "mh_from_tm_sigma_star", "mh_from_tm_sigma_hat_star"];
    if !opts.wants_any(&mh_from_tm) {
        cases.retain(|c| opts.wants(&c.cert.name));
        return Ok((cases, notes));
    }
    let k_y = match opts.k_const {
        Some(k) => k,
        None => inst.k_from_y0()?,
    };
    let beta0_one = inst.schedule.clone().with_beta0(1.0)?;
    let mt = mh_rates_from_tm(&beta0_one, moduli, k_y, opts.k_max)?;
    for (cert, k_max) in [
        (mt.sigma, opts.k_max_div),
        (mt.sigma_hat, opts.k_max_div),
        (mt.sigma_star, opts.k_max),
        (mt.sigma_hat_star, opts.k_max),
    ] {
        if let Some(cert) = cert {
            push(cert, k_max);
        }
    }
    if let Some(e) = mt.psi_error {
        notes.push(format!("product-route rates for (y_n) from (x_n) omitted: {e}"));
    }
    cases.retain(|c| opts.wants(&c.cert.name));
    Ok((cases, notes))
}

/// Step and T rates read off the modified Halpern run (least valid indices,
/// so any smaller claim fails), and the same rates moved to `(x_n)`.
pub fn empirical_certificates(mh: &Trajectory64, alpha: &RateCertificate, k_max: u64) -> Result<Vec<CertCase>> {
    let step = empirical_rate("mh_empirical_step", &mh.step_residuals, ResidualKind::Step, Subject::ModifiedHalpern);
    let t = empirical_rate("mh_empirical_t", &mh.t_residuals, ResidualKind::T, Subject::ModifiedHalpern);
    Ok(vec![
        CertCase {
            cert: step.clone(),
            k_max,
        },
        CertCase {
            cert: t.clone(),
            k_max,
        },
        CertCase {
            cert: transfer_ar(&step, alpha)?,
            k_max,
        },
        CertCase {
            cert: transfer_ar(&t, alpha)?,
            k_max,
        },
    ])
}

/// One linear envelope pair audited on `1 ≤ n ≤ n_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct EnvelopeReport {
    pub kind: LinearKind,
    pub constant: u64,
    pub lambda: f64,
    pub n_max: u64,
    /// `min_n (bound_n - residual_n)` for the step residual.
    pub step_slack: f64,
    pub step_worst_n: u64,
    /// Same for the T residual.
    pub t_slack: f64,
    pub t_worst_n: u64,
    pub tol: f64,
}

impl EnvelopeReport {
    pub fn pass(&self) -> bool {
        self.step_slack >= -self.tol && self.t_slack >= -self.tol
    }
}

fn envelope_slack(series: &[f64], n_max: u64, bound: impl Fn(u64) -> Option<f64>) -> (f64, u64) {
    let mut worst = (f64::INFINITY, 0);
    for n in 1..=n_max.min(series.len() as u64 - 1) {
        if let Some(b) = bound(n) {
            let slack = b - series[n as usize];
            if slack < worst.0 {
                worst = (slack, n);
            }
        }
    }
    worst
}

/// All four linear envelope pairs for a run under the `β_n = 1 - 2/n` schedule.
pub fn check_envelopes(
    inst: &Instance,
    tm: &Trajectory64,
    mh: &Trajectory64,
    n_max: u64,
    tol: f64,
) -> Result<Vec<EnvelopeReport>> {
    let c = inst.constants()?;
    let k_y = inst.k_from_y0()?;
    let mut out = Vec::new();
    for kind in LinearKind::ALL {
        let constant = match kind {
            LinearKind::Mh => c.m,
            LinearKind::Tm | LinearKind::TmFromMh => c.k,
            LinearKind::MhFromTm => k_y,
        };
        let rates = linear_rates(kind, &inst.schedule, constant)?;
        let traj = match kind.subject() {
            Subject::ModifiedHalpern => mh,
            _ => tm,
        };
        let (step_slack, step_worst_n) = envelope_slack(&traj.step_residuals, n_max, |n| rates.step_bound(n));
        let (t_slack, t_worst_n) = envelope_slack(&traj.t_residuals, n_max, |n| rates.t_bound(n));
        out.push(EnvelopeReport {
            kind,
            constant,
            lambda: rates.lambda,
            n_max,
            step_slack,
            step_worst_n,
            t_slack,
            t_worst_n,
            tol,
        });
    }
    Ok(out)
}

/// Outcome of a full sweep on one instance.
#[derive(Clone, Debug)]
pub struct SuiteResult {
    pub constants: BoundConstants<f64>,
    pub link: LinkReport,
    pub reports: Vec<(CertCase, CertReport)>,
    pub envelopes: Vec<EnvelopeReport>,
    pub notes: Vec<String>,
}

impl SuiteResult {
    pub fn sound(&self) -> bool {
        self.link.pass
            && self.reports.iter().all(|(_, r)| r.sound())
            && self.envelopes.iter().all(EnvelopeReport::pass)
    }
}

/// Builds every certificate for `inst`, runs both iterations to the horizon
/// and audits each certificate on the run it speaks about.
pub fn run_suite(inst: &Instance, opts: &CertOptions, corrupt: Option<(&str, &Corruption)>) -> Result<SuiteResult> {
    let (mut cases, notes) = build_certificates(inst, opts)?;
    let n = opts.horizon as usize;
    let tm = inst.tm(n)?;
    let mh = inst.mh(n)?;
    let link = link_report(&inst.space, &tm, &mh, 1e-9)?;
    let alpha = cases[0].cert.clone();
    cases.extend(
        empirical_certificates(&mh, &alpha, opts.k_max)?
            .into_iter()
            .filter(|c| opts.wants(&c.cert.name)),
    );
    if let Some((target, how)) = corrupt {
        let case = cases
            .iter_mut()
            .find(|c| c.cert.name == target)
            .ok_or_else(|| Error::Config(format!("no certificate named {target:?} to corrupt")))?;
        case.cert = how.apply(&case.cert);
    }
    let mut reports = Vec::with_capacity(cases.len());
    for case in cases {
        let traj = match case.cert.subject {
            Subject::ModifiedHalpern => &mh,
            _ => &tm,
        };
        debug_assert!(residual_series(traj, &case.cert).is_ok());
        let rep = verify_certificate(traj, &case.cert, case.k_max, opts.horizon)?;
        reports.push((case, rep));
    }
    let envelopes = if inst.schedule.family() == FamilyTag::Sabach {
        check_envelopes(inst, &tm, &mh, opts.horizon, geofix::VERIFY_TOL)?
    } else {
        Vec::new()
    };
    Ok(SuiteResult {
        constants: inst.constants()?,
        link,
        reports,
        envelopes,
        notes,
    })
}
