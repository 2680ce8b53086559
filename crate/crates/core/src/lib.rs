//! Tikhonov-Mann and modified Halpern iterations for nonexpansive maps on
//! W-hyperbolic spaces, together with computable rate certificates for
//! (T-)asymptotic regularity and metastability, and empirical auditors for
//! every certificate.
//!
//! The geometry, operators and iterations are generic over the scalar type
//! through [`Real`]; `f64` is the type everything is tuned for and the
//! aliases at the crate root fix it. Rates are integer-valued functions
//! `k -> N` and do not depend on the scalar.
//!
//! ```
//! use geofix::{harmonic_schedule, tikhonov_mann_run, Space64, make_operator, OperatorSpec, Point};
//!
//! let space = Space64::euclidean(1).unwrap();
//! let op = make_operator(OperatorSpec::Negation, &space).unwrap();
//! let (schedule, _moduli) = harmonic_schedule(0.5).unwrap();
//! let u = Point::vector(vec![0.5]);
//! let x0 = Point::vector(vec![1.0]);
//! let traj = tikhonov_mann_run(&space, &op, &u, &x0, &schedule, 100).unwrap();
//! assert_eq!(traj.len(), 101);
//! ```

pub mod error;
pub mod iterations;
pub mod metastability;
pub mod modulus;
pub mod operators;
pub mod rates;
pub mod scalar;
pub mod schedules;
pub mod space;

pub use error::{Error, Result};
pub use iterations::{
    check_link, link_report, link_start, modified_halpern_run, residuals, tikhonov_mann_run, IterationKind,
    LinkReport, Residuals, Trajectory, MAX_STEPS,
};
pub use metastability::{
    empirical_meta, transform_meta, verify_meta, window_oscillation_ok, Counter, MetaOrigin, MetaReport,
    MetaRate, MetaStatus,
};
pub use modulus::{ceil_ln, Modulus};
pub use operators::{
    bound_constants, check_nonexpansive, make_operator, zoo, BoundConstants, FnMap,
    NonexpansiveMap, NonexpansiveReport, Operator, OperatorSpec,
};
pub use rates::{
    alpha_rate, empirical_rate, linear_rates, mh_ar_rate_div, mh_ar_rate_prod, mh_from_tm_chi_theta,
    mh_gamma, mh_rates_from_tm, mh_rates_from_tm_with_psi, mh_t_ar_rate, residual_series,
    sabach_shtern_check, tm_rates_from_mh, transfer_ar, verify_certificate, CertReport, CertSource,
    CertStatus, KStatus, LinearKind, LinearRates, MhFromTm, Provenance, RateCertificate,
    ResidualKind, SabachShternReport, SabachShternViolation, Subject, TmFromMh, VERIFY_TOL,
};
pub use scalar::Real;
pub use schedules::{
    check_psi, harmonic_schedule, psi_from_schedule, sabach_schedule, sqrt_schedule, validate_moduli, Condition,
    ConditionReport, FamilyTag, ModuliReport, ModulusViolation, Schedule, ScheduleModuli,
};
pub use space::{
    cat0_gap, check_axioms, Axiom, AxiomCheck, AxiomReport, Model, Point, Space, TreePoint,
    WSpace, Witness, AXIOM_TOL,
};

/// Double-precision space.
pub type Space64 = Space<f64>;
/// Double-precision point.
pub type Point64 = Point<f64>;
/// Double-precision operator.
pub type Operator64 = Operator<f64>;
/// Double-precision schedule.
pub type Schedule64 = Schedule<f64>;
/// Double-precision trajectory over [`Point64`].
pub type Trajectory64 = Trajectory<Point<f64>, f64>;

/// Single-precision space.
pub type Space32 = Space<f32>;
/// Single-precision point.
pub type Point32 = Point<f32>;
/// Single-precision schedule.
pub type Schedule32 = Schedule<f32>;
/// Single-precision trajectory over [`Point32`].
pub type Trajectory32 = Trajectory<Point<f32>, f32>;
