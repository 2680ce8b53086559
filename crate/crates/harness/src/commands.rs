//! The four subcommands. Each writes CSV under the output directory and
//! returns the exit status: 0 when every check holds, 1 otherwise.

use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use geofix::{
    alpha_rate, check_axioms, empirical_meta, make_operator, transform_meta, verify_meta, Axiom,
    CertStatus, Counter, MetaRate, MetaStatus, NonexpansiveMap, Space64, Subject, Trajectory64,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{CorruptMode, ExperimentConfig, MetaDirection, OmegaConfig};
use crate::output::{coord_header, coords, file_stem, float, int, opt_int, OutDir};
use crate::suite::{run_suite, sample_near, CertOptions, Corruption, Instance};
use crate::{HarnessError, EXIT_FAIL, EXIT_PASS};

/// Settings shared by every subcommand.
#[derive(Clone, Debug)]
pub struct Context {
    pub out: OutDir,
    pub quiet: bool,
    /// Base directory for relative paths in the config.
    pub base: std::path::PathBuf,
}

impl Context {
    pub fn new(out: &Path, config_path: &Path, quiet: bool) -> Result<Self, HarnessError> {
        Ok(Self {
            out: OutDir::create(out)?,
            quiet,
            base: config_path.parent().map(Path::to_path_buf).unwrap_or_default(),
        })
    }

    fn say(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", msg.as_ref());
        }
    }
}

fn status(ok: bool) -> i32 {
    if ok {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

/// Builds the instance described by `[space]`, `[operator]`, `[schedule]`
/// and `[anchors]`; missing anchors are drawn from the seed.
pub fn instance_from_config(cfg: &ExperimentConfig, base: &Path) -> Result<Instance, HarnessError> {
    let space = cfg.require_space()?.build()?;
    let spec = cfg.require_operator()?.clone();
    let (schedule, moduli) = cfg.require_schedule()?.build(base)?;
    let op = make_operator(spec.clone(), &space)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let r = cfg.anchors.radius;
    let u = match &cfg.anchors.u {
        Some(u) => u.clone(),
        None => sample_near(&space, op.fixed_point(), &mut rng, r),
    };
    let x0 = match &cfg.anchors.x0 {
        Some(x) => x.clone(),
        None => sample_near(&space, op.fixed_point(), &mut rng, r),
    };
    Ok(Instance::new(space, spec, u, x0, schedule, moduli)?)
}

pub fn axioms(cfg: &ExperimentConfig, ctx: &Context) -> Result<i32, HarnessError> {
    let spaces = if cfg.axioms.spaces.is_empty() {
        let s = cfg.require_space()?;
        vec![crate::config::AxiomSpace {
            model: s.model,
            dim: s.dim,
            expect_cat0: None,
        }]
    } else {
        cfg.axioms.spaces.clone()
    };
    let mut w = ctx.out.writer("axioms.csv")?;
    w.write_record([
        "model",
        "dim",
        "axiom",
        "expected",
        "pass",
        "worst_violation",
        "witness_lhs",
        "witness_rhs",
    ])?;
    let mut ok = true;
    for (i, sp) in spaces.iter().enumerate() {
        let start = Instant::now();
        let space = Space64::new(sp.model, sp.dim)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(i as u64));
        let radius = cfg.axioms.radius;
        let sampler = |rng: &mut ChaCha8Rng| space.sample(rng, radius);
        let rep = check_axioms(&space, sampler, &mut rng, cfg.axioms.trials, cfg.axioms.tol)?;
        for check in &rep.checks {
            let expected = check.axiom != Axiom::Cat0 || sp.expects_cat0();
            ok &= check.pass == expected;
            let (lhs, rhs) = check
                .witness
                .as_ref()
                .map(|w| (float(w.lhs), float(w.rhs)))
                .unwrap_or_default();
            w.write_record([
                sp.model.name().to_string(),
                sp.dim.to_string(),
                check.axiom.name().to_string(),
                expected.to_string(),
                check.pass.to_string(),
                float(check.worst_violation),
                lhs,
                rhs,
            ])?;
        }
        ctx.say(format!(
            "axioms {}({}): {} trials, W-hyperbolic {}, CAT(0) {} [{:.2?}]",
            sp.model.name(),
            sp.dim,
            cfg.axioms.trials,
            rep.w_hyperbolic(),
            rep.passes(Axiom::Cat0),
            start.elapsed()
        ));
    }
    w.flush()?;
    Ok(status(ok))
}

fn write_trajectory(ctx: &Context, name: &str, traj: &Trajectory64) -> Result<(), HarnessError> {
    let mut w = ctx.out.writer(name)?;
    let mut header = vec!["n".to_string()];
    header.extend(coord_header(&traj.anchor));
    header.extend(["d_step", "d_T_residual", "d_companion"].map(String::from));
    w.write_record(&header)?;
    for n in 0..traj.n_steps() {
        let mut row = vec![n.to_string()];
        row.extend(coords(&traj.points[n]));
        row.push(float(traj.step_residuals[n]));
        row.push(float(traj.t_residuals[n]));
        row.push(float(traj.companion_gaps[n]));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn run(cfg: &ExperimentConfig, ctx: &Context) -> Result<i32, HarnessError> {
    let inst = instance_from_config(cfg, &ctx.base)?;
    let n = cfg.run.n_steps;
    let start = Instant::now();
    let tm = inst.tm(n)?;
    let mh = inst.mh(n)?;
    let link = geofix::link_report(&inst.space, &tm, &mh, cfg.run.link_tol)?;
    write_trajectory(ctx, "tm.csv", &tm)?;
    write_trajectory(ctx, "mh.csv", &mh)?;
    let mut w = ctx.out.writer("link.csv")?;
    w.write_record(["n_steps", "max_companion_deviation", "max_step_deviation", "tol", "pass"])?;
    w.write_record([
        link.n_steps.to_string(),
        float(link.max_companion_deviation),
        float(link.max_step_deviation),
        float(link.tol),
        link.pass.to_string(),
    ])?;
    w.flush()?;
    ctx.say(format!(
        "run {}: {n} steps, link deviation {:e} ({}) [{:.2?}]",
        inst.label,
        link.max_companion_deviation.max(link.max_step_deviation),
        if link.pass { "pass" } else { "FAIL" },
        start.elapsed()
    ));
    Ok(status(link.pass))
}

pub fn certify(cfg: &ExperimentConfig, ctx: &Context) -> Result<i32, HarnessError> {
    let inst = instance_from_config(cfg, &ctx.base)?;
    let c = &cfg.certify;
    let opts = CertOptions {
        horizon: c.horizon,
        k_max_alpha: c.k_max_alpha,
        k_max_div: c.k_max_div,
        k_max: c.k_max,
        k_const: c.k_const,
        m_const: c.m_const,
        select: c.select.clone(),
    };
    let corruption = c.corrupt.as_ref().map(|cc| {
        let how = match cc.mode {
            CorruptMode::Zero => Corruption::Zero,
            CorruptMode::Halve => Corruption::Halve,
        };
        (cc.target.clone(), how)
    });
    let start = Instant::now();
    let result = run_suite(&inst, &opts, corruption.as_ref().map(|(t, h)| (t.as_str(), h)))?;

    let mut summary = ctx.out.writer("certify.csv")?;
    summary.write_record(["certificate", "subject", "residual", "k_max", "checked", "failures", "sound"])?;
    for (case, rep) in &result.reports {
        let mut w = ctx.out.writer(&format!("cert_{}.csv", file_stem(&case.cert.name)))?;
        w.write_record(["k", "N", "empirical_margin", "status", "violation_n", "violation_residual"])?;
        for e in &rep.entries {
            let (margin, st, vn, vr) = match &e.status {
                CertStatus::Pass { margin } => (float(*margin), "pass", String::new(), String::new()),
                CertStatus::Fail { n, residual, bound } => {
                    (float(bound - residual), "fail", n.to_string(), float(*residual))
                }
                CertStatus::Skipped => (String::new(), "skipped", String::new(), String::new()),
            };
            w.write_record([e.k.to_string(), int(e.n), margin, st.to_string(), vn, vr])?;
        }
        w.flush()?;
        let failures = rep.failures().count();
        summary.write_record([
            rep.name.clone(),
            format!("{:?}", rep.subject),
            format!("{:?}", rep.kind),
            rep.k_max.to_string(),
            rep.checked().to_string(),
            failures.to_string(),
            rep.sound().to_string(),
        ])?;
        if failures > 0 {
            let first = rep.failures().next().expect("counted");
            ctx.say(format!("violation: {} at k = {}, N = {}: {:?}", rep.name, first.k, int(first.n), first.status));
        }
    }
    summary.flush()?;

    if !result.envelopes.is_empty() {
        let mut w = ctx.out.writer("linear_envelopes.csv")?;
        w.write_record([
            "kind", "constant", "lambda", "n_max", "step_slack", "step_worst_n", "t_slack", "t_worst_n", "pass",
        ])?;
        for e in &result.envelopes {
            w.write_record([
                e.kind.name().to_string(),
                e.constant.to_string(),
                float(e.lambda),
                e.n_max.to_string(),
                float(e.step_slack),
                e.step_worst_n.to_string(),
                float(e.t_slack),
                e.t_worst_n.to_string(),
                e.pass().to_string(),
            ])?;
        }
        w.flush()?;
    }
    for note in &result.notes {
        ctx.say(format!("note: {note}"));
    }
    ctx.say(format!(
        "certify {}: M_p = {:.6}, K = {}, M = {}; {} certificates, link {}, {} [{:.2?}]",
        inst.label,
        result.constants.mp,
        result.constants.k,
        result.constants.m,
        result.reports.len(),
        if result.link.pass { "pass" } else { "FAIL" },
        if result.sound() { "all sound" } else { "VIOLATIONS" },
        start.elapsed()
    ));
    Ok(status(result.sound()))
}

pub fn meta(cfg: &ExperimentConfig, ctx: &Context) -> Result<i32, HarnessError> {
    let inst = instance_from_config(cfg, &ctx.base)?;
    let m = &cfg.meta;
    let counters = m
        .counters
        .iter()
        .map(|c| Counter::parse(c))
        .collect::<Result<Vec<_>, _>>()?;
    let start = Instant::now();
    let tm = inst.tm(m.n_steps)?;
    let mh = inst.mh(m.n_steps)?;
    let (source, target, subject) = match m.direction {
        MetaDirection::MhToTm => (&mh, &tm, Subject::ModifiedHalpern),
        MetaDirection::TmToMh => (&tm, &mh, Subject::TikhonovMann),
    };
    let omega = match m.omega {
        OmegaConfig::Empirical => {
            let pts: Arc<[_]> = source.points.clone().into();
            MetaRate::empirical(inst.space.clone(), pts, subject, m.cap, m.tol)
        }
        OmegaConfig::Constant { value } => MetaRate::constant(value, subject),
        OmegaConfig::Affine { a, b } => MetaRate::new(format!("{a}k+{b}"), subject, move |k, _| {
            a.saturating_mul(k).saturating_add(b)
        }),
    };
    let k_const = inst.constants()?.k;
    let alpha = alpha_rate(&inst.moduli.sigma4, k_const);
    let transferred = transform_meta(&omega, &alpha)?;

    let mut w = ctx.out.writer("meta.csv")?;
    w.write_record(["k", "g", "bound", "least_n", "empirical_least_n", "pass", "status"])?;
    let mut ok = true;
    let mut inconclusive = 0usize;
    for k in 0..=m.k_max {
        for g in &counters {
            let rep = verify_meta(&inst.space, &target.points, &transferred, k, g, m.tol)?;
            let cap = if rep.bound == u64::MAX { m.cap } else { rep.bound };
            let emp = empirical_meta(&inst.space, &target.points, k, g, cap, m.tol)?;
            let st = match rep.status {
                MetaStatus::Pass { .. } => "pass",
                MetaStatus::Fail => {
                    ok = false;
                    "fail"
                }
                MetaStatus::Inconclusive { .. } => {
                    inconclusive += 1;
                    "inconclusive"
                }
            };
            w.write_record([
                k.to_string(),
                rep.g.clone(),
                int(rep.bound),
                opt_int(rep.least_n()),
                opt_int(emp),
                rep.pass().to_string(),
                st.to_string(),
            ])?;
        }
    }
    w.flush()?;
    ctx.say(format!(
        "meta {} ({}): {} inconclusive, {} [{:.2?}]",
        inst.label,
        transferred.name,
        inconclusive,
        if ok { "no violations" } else { "VIOLATIONS" },
        start.elapsed()
    ));
    Ok(status(ok))
}

/// Dispatches on the subcommand name.
pub fn dispatch(command: &str, cfg: &ExperimentConfig, ctx: &Context) -> Result<i32, HarnessError> {
    match command {
        "axioms" => axioms(cfg, ctx),
        "run" => run(cfg, ctx),
        "certify" => certify(cfg, ctx),
        "meta" => meta(cfg, ctx),
        other => Err(HarnessError::Config(format!("unknown command {other:?}"))),
    }
}

