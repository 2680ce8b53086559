//! Experiment configuration, read from a TOML file.
//!
//! Unknown keys are rejected; parse errors carry the line and column.

use std::fs;
use std::path::{Path, PathBuf};

use geofix::{
    harmonic_schedule, sabach_schedule, sqrt_schedule, Model, Modulus, OperatorSpec, Point64,
    Schedule64, ScheduleModuli, Space64, MAX_STEPS,
};
use serde::Deserialize;

use crate::HarnessError;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Fixes every sampled quantity; `--seed` overrides it.
    #[serde(default)]
    pub seed: u64,
    pub space: Option<SpaceConfig>,
    pub operator: Option<OperatorSpec<f64>>,
    pub schedule: Option<ScheduleConfig>,
    #[serde(default)]
    pub anchors: AnchorConfig,
    #[serde(default)]
    pub run: RunConfig,
    #[serde(default)]
    pub certify: CertifyConfig,
    #[serde(default)]
    pub meta: MetaConfig,
    #[serde(default)]
    pub axioms: AxiomsConfig,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceConfig {
    pub model: Model,
    /// Dimension of a vector model; number of rays of the star tree.
    #[serde(alias = "rays")]
    pub dim: usize,
}

impl SpaceConfig {
    pub fn build(&self) -> Result<Space64, HarnessError> {
        Ok(Space64::new(self.model, self.dim)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyName {
    Harmonic,
    Sabach,
    Sqrt,
    Custom,
}

/// `[a, b]` read as `k ↦ a·k + b`.
pub type Affine = [u64; 2];

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomModuli {
    pub sigma1: Option<Affine>,
    pub sigma1_star: Option<Affine>,
    pub sigma2: Affine,
    pub sigma3: Affine,
    pub sigma4: Affine,
    pub lambda_cap: u64,
    #[serde(default)]
    pub n_lambda: u64,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    pub family: FamilyName,
    /// Constant `λ` for the closed-form families.
    pub lambda: Option<f64>,
    /// Overrides `β_0`.
    pub beta0: Option<f64>,
    /// CSV with columns `beta,lambda`, one row per `n` (custom family).
    pub beta_table: Option<PathBuf>,
    /// Claimed moduli (custom family).
    pub moduli: Option<CustomModuli>,
}

#[derive(Deserialize)]
struct TableRow {
    beta: f64,
    lambda: f64,
}

fn affine(a: Affine) -> Modulus {
    Modulus::affine(a[0], a[1])
}

impl ScheduleConfig {
    /// `base` resolves a relative table path.
    pub fn build(&self, base: &Path) -> Result<(Schedule64, ScheduleModuli), HarnessError> {
        let lambda = || {
            self.lambda
                .ok_or_else(|| HarnessError::Config("schedule.lambda is required for this family".into()))
        };
        let (schedule, moduli) = match self.family {
            FamilyName::Harmonic => harmonic_schedule(lambda()?)?,
            FamilyName::Sabach => sabach_schedule(lambda()?)?,
            FamilyName::Sqrt => sqrt_schedule(lambda()?)?,
            FamilyName::Custom => {
                let path = self
                    .beta_table
                    .as_ref()
                    .ok_or_else(|| HarnessError::Config("custom schedule needs beta_table".into()))?;
                let m = self
                    .moduli
                    .as_ref()
                    .ok_or_else(|| HarnessError::Config("custom schedule needs [schedule.moduli]".into()))?;
                let path = base.join(path);
                let mut rdr = csv::Reader::from_path(&path)
                    .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
                let (mut beta, mut lam) = (Vec::new(), Vec::new());
                for row in rdr.deserialize::<TableRow>() {
                    let row = row.map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
                    beta.push(row.beta);
                    lam.push(row.lambda);
                }
                let schedule = Schedule64::table(beta, lam)?;
                let moduli = ScheduleModuli {
                    sigma1: m.sigma1.map(affine),
                    sigma1_star: m.sigma1_star.map(affine),
                    sigma2: affine(m.sigma2),
                    sigma3: affine(m.sigma3),
                    sigma4: affine(m.sigma4),
                    lambda_cap: m.lambda_cap.max(1),
                    n_lambda: m.n_lambda,
                    sigma5: None,
                };
                (schedule, moduli)
            }
        };
        let schedule = match self.beta0 {
            Some(b) => schedule.with_beta0(b)?,
            None => schedule,
        };
        Ok((schedule, moduli))
    }
}

/// Anchor `u` and start `x_0`; `y_0` is always `(1-β_0)u + β_0 x_0`.
/// Missing anchors are sampled from the seed within `radius` of the
/// operator's fixed point.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnchorConfig {
    pub u: Option<Point64>,
    pub x0: Option<Point64>,
    #[serde(default = "default_radius")]
    pub radius: f64,
}

impl Default for AnchorConfig {
    fn default() -> Self {
        Self {
            u: None,
            x0: None,
            radius: default_radius(),
        }
    }
}

fn default_radius() -> f64 {
    1.0
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_steps")]
    pub n_steps: usize,
    #[serde(default = "default_link_tol")]
    pub link_tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n_steps: default_steps(),
            link_tol: default_link_tol(),
        }
    }
}

fn default_steps() -> usize {
    10_000
}

fn default_link_tol() -> f64 {
    1e-9
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorruptMode {
    Zero,
    Halve,
}

/// Test mode: damages one certificate before it is audited.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorruptConfig {
    pub target: String,
    pub mode: CorruptMode,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyConfig {
    #[serde(default = "default_horizon")]
    pub horizon: u64,
    #[serde(default = "default_k_max")]
    pub k_max: u64,
    #[serde(default = "default_k_max_div")]
    pub k_max_div: u64,
    #[serde(default = "default_k_max_alpha")]
    pub k_max_alpha: u64,
    pub k_const: Option<u64>,
    pub m_const: Option<u64>,
    /// Names of the certificates to audit; all when absent.
    pub select: Option<Vec<String>>,
    pub corrupt: Option<CorruptConfig>,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        Self {
            horizon: default_horizon(),
            k_max: default_k_max(),
            k_max_div: default_k_max_div(),
            k_max_alpha: default_k_max_alpha(),
            k_const: None,
            m_const: None,
            select: None,
            corrupt: None,
        }
    }
}

fn default_horizon() -> u64 {
    200_000
}

fn default_k_max() -> u64 {
    20
}

fn default_k_max_div() -> u64 {
    5
}

fn default_k_max_alpha() -> u64 {
    50
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetaDirection {
    /// Rate read off `(y_n)`, transferred to `(x_n)`.
    MhToTm,
    /// Rate read off `(x_n)`, transferred to `(y_n)`.
    TmToMh,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OmegaConfig {
    /// Least valid index on the source run, searched up to `cap`.
    Empirical,
    /// `Ω(k, g) = value`.
    Constant { value: u64 },
    /// `Ω(k, g) = a·k + b`.
    Affine { a: u64, b: u64 },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetaConfig {
    #[serde(default = "default_meta_k_max")]
    pub k_max: u64,
    #[serde(default = "default_counters")]
    pub counters: Vec<String>,
    #[serde(default = "default_meta_steps")]
    pub n_steps: usize,
    /// Search bound for empirical rates.
    #[serde(default = "default_meta_cap")]
    pub cap: u64,
    #[serde(default = "default_meta_tol")]
    pub tol: f64,
    #[serde(default = "default_direction")]
    pub direction: MetaDirection,
    #[serde(default = "default_omega")]
    pub omega: OmegaConfig,
}

impl Default for MetaConfig {
    fn default() -> Self {
        Self {
            k_max: default_meta_k_max(),
            counters: default_counters(),
            n_steps: default_meta_steps(),
            cap: default_meta_cap(),
            tol: default_meta_tol(),
            direction: default_direction(),
            omega: default_omega(),
        }
    }
}

fn default_meta_k_max() -> u64 {
    5
}

fn default_counters() -> Vec<String> {
    ["1", "10", "n", "2n"].map(String::from).to_vec()
}

fn default_meta_steps() -> usize {
    50_000
}

fn default_meta_cap() -> u64 {
    20_000
}

fn default_meta_tol() -> f64 {
    1e-9
}

fn default_direction() -> MetaDirection {
    MetaDirection::MhToTm
}

fn default_omega() -> OmegaConfig {
    OmegaConfig::Empirical
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxiomSpace {
    pub model: Model,
    #[serde(alias = "rays")]
    pub dim: usize,
    /// Whether the CAT(0) inequality is expected to hold; defaults to true
    /// for euclidean and star-tree models.
    pub expect_cat0: Option<bool>,
}

impl AxiomSpace {
    pub fn expects_cat0(&self) -> bool {
        self.expect_cat0
            .unwrap_or(matches!(self.model, Model::Euclidean | Model::StarTree))
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxiomsConfig {
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_axiom_tol")]
    pub tol: f64,
    #[serde(default = "default_sample_radius")]
    pub radius: f64,
    /// Spaces to check; when empty, the top-level `[space]`.
    #[serde(default)]
    pub spaces: Vec<AxiomSpace>,
}

impl Default for AxiomsConfig {
    fn default() -> Self {
        Self {
            trials: default_trials(),
            tol: default_axiom_tol(),
            radius: default_sample_radius(),
            spaces: Vec::new(),
        }
    }
}

fn default_trials() -> usize {
    10_000
}

fn default_axiom_tol() -> f64 {
    geofix::AXIOM_TOL
}

fn default_sample_radius() -> f64 {
    10.0
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            HarnessError::Config(m) => HarnessError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    fn validate(&self) -> Result<(), HarnessError> {
        let cap = MAX_STEPS as u64;
        if self.run.n_steps as u64 > cap || self.certify.horizon > cap || self.meta.n_steps as u64 > cap {
            return Err(HarnessError::Config(format!(
                "run.n_steps, certify.horizon and meta.n_steps must not exceed {cap}"
            )));
        }
        if self.meta.cap > cap {
            return Err(HarnessError::Config(format!("meta.cap must not exceed {cap}")));
        }
        if !(self.anchors.radius.is_finite() && self.anchors.radius >= 0.0) {
            return Err(HarnessError::Config("anchors.radius must be finite and nonnegative".into()));
        }
        Ok(())
    }

    pub fn require_space(&self) -> Result<&SpaceConfig, HarnessError> {
        self.space
            .as_ref()
            .ok_or_else(|| HarnessError::Config("missing [space] section".into()))
    }

    pub fn require_operator(&self) -> Result<&OperatorSpec<f64>, HarnessError> {
        self.operator
            .as_ref()
            .ok_or_else(|| HarnessError::Config("missing [operator] section".into()))
    }

    pub fn require_schedule(&self) -> Result<&ScheduleConfig, HarnessError> {
        self.schedule
            .as_ref()
            .ok_or_else(|| HarnessError::Config("missing [schedule] section".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEMO: &str = r#"
seed = 3

[space]
model = "euclidean"
dim = 1

[operator]
kind = "contraction"
params = { center = [0.0], ratio = 0.5 }

[schedule]
family = "harmonic"
lambda = 0.5

[anchors]
u = [0.5]
x0 = [1.0]
"#;

    #[test]
    fn demo_parses() {
        let cfg = ExperimentConfig::parse(DEMO).unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.require_space().unwrap().dim, 1);
        assert_eq!(cfg.require_operator().unwrap().kind(), "contraction");
        assert_eq!(cfg.run.n_steps, 10_000);
        assert_eq!(cfg.meta.counters, vec!["1", "10", "n", "2n"]);
        let (s, m) = cfg.require_schedule().unwrap().build(Path::new(".")).unwrap();
        assert_eq!(s.beta(1), 0.5);
        assert_eq!(m.lambda_cap, 2);
    }

    #[test]
    fn unknown_keys_are_rejected_with_position() {
        let err = ExperimentConfig::parse("seed = 1\nbogus = 2\n").unwrap_err();
        let HarnessError::Config(msg) = err else { panic!() };
        assert!(msg.contains("bogus"), "{msg}");
        assert!(msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn horizon_cap_is_enforced() {
        let err = ExperimentConfig::parse("[certify]\nhorizon = 3000000\n").unwrap_err();
        assert!(matches!(err, HarnessError::Config(_)));
    }

    #[test]
    fn tree_points_and_unit_operators() {
        let text = r#"
[space]
model = "star-tree"
rays = 3
[operator]
kind = "tree-halving"
[anchors]
u = { ray = 1, s = 2.0 }
x0 = { ray = 2, s = 0.5 }
[schedule]
family = "sabach"
lambda = 1.0
beta0 = 1.0
"#;
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.anchors.u.as_ref().unwrap().as_tree().unwrap().ray, 1);
        let (s, _) = cfg.require_schedule().unwrap().build(Path::new(".")).unwrap();
        assert_eq!(s.beta(0), 1.0);
    }

    #[test]
    fn omega_and_direction() {
        let text = "[meta]\ndirection = \"tm-to-mh\"\nomega = { kind = \"constant\", value = 7 }\n";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.meta.direction, MetaDirection::TmToMh);
        assert!(matches!(cfg.meta.omega, OmegaConfig::Constant { value: 7 }));
    }
}
