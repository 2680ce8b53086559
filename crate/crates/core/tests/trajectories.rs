//! Certificates checked against actual runs on small, hand-sized instances.

use geofix::*;

fn line() -> Space64 {
    Space64::euclidean(1).unwrap()
}

fn v(x: f64) -> Point64 {
    Point::vector(vec![x])
}

fn assert_sound(rep: &CertReport, min_checked: usize) {
    let bad: Vec<_> = rep.failures().collect();
    assert!(bad.is_empty(), "{}: {:?}", rep.name, bad);
    assert!(rep.checked() >= min_checked, "{}: only {} values of k checked", rep.name, rep.checked());
}

#[test]
fn link_on_line_and_tree() {
    let (schedule, _) = harmonic_schedule(0.5).unwrap();
    let space = line();
    let half = make_operator(
        OperatorSpec::Contraction {
            center: v(0.0),
            ratio: 0.5,
        },
        &space,
    )
    .unwrap();
    let rep = check_link(&space, &half, &v(0.5), &v(1.0), &schedule, 10_000, 1e-9).unwrap();
    assert!(rep.pass);

    let tree = Space64::star_tree(3).unwrap();
    let halving = make_operator(OperatorSpec::TreeHalving, &tree).unwrap();
    let rep = check_link(&tree, &halving, &Point::tree(1, 2.0), &Point::tree(2, 3.0), &schedule, 1_000, 1e-9).unwrap();
    assert!(rep.pass);
}

#[test]
fn alpha_on_harmonic_line() {
    let (schedule, moduli) = harmonic_schedule(0.5).unwrap();
    let space = line();
    let op = make_operator(OperatorSpec::Negation, &space).unwrap();
    // M_p = max{d(u,p), d(x_0,p)} = 1, so K = 1.
    let tm = tikhonov_mann_run(&space, &op, &v(0.5), &v(1.0), &schedule, 5_000).unwrap();
    let alpha = alpha_rate(&moduli.sigma4, 1);
    assert_eq!(alpha.eval(50), 101);
    assert_sound(&verify_certificate(&tm, &alpha, 50, 5_000).unwrap(), 51);
}

#[test]
fn empirical_companion_rate_transfers_to_x() {
    let (schedule, moduli) = harmonic_schedule(0.5).unwrap();
    let space = line();
    let op = make_operator(
        OperatorSpec::Contraction {
            center: v(0.0),
            ratio: 0.5,
        },
        &space,
    )
    .unwrap();
    let u = v(0.5);
    let x0 = v(1.0);
    let tm = tikhonov_mann_run(&space, &op, &u, &x0, &schedule, 20_000).unwrap();
    let mh = modified_halpern_run(&space, &op, &u, &link_start(&space, &u, &x0, &schedule).unwrap(), &schedule, 20_000)
        .unwrap();
    let phi = empirical_rate("mh_t", &mh.t_residuals, ResidualKind::T, Subject::ModifiedHalpern);
    let k = bound_constants(&space, &op, &u, &x0, &mh.points[0]).unwrap().k;
    let moved = transfer_ar(&phi, &alpha_rate(&moduli.sigma4, k)).unwrap();
    assert_eq!(moved.subject, Subject::TikhonovMann);
    assert_sound(&verify_certificate(&tm, &moved, 20, 20_000).unwrap(), 21);
}

/// `u = 0.5`, `y_0 = 1` on the line under `T = -x`: `M = 4`.
fn m4_instance() -> (Space64, Operator64, Point64, Point64) {
    let space = line();
    let op = make_operator(OperatorSpec::Negation, &space).unwrap();
    let c = bound_constants(&space, &op, &v(0.5), &v(1.0), &v(1.0)).unwrap();
    assert_eq!(c.m, 4);
    (space, op, v(0.5), v(1.0))
}

#[test]
fn divergence_route_on_harmonic_line() {
    let (schedule, moduli) = harmonic_schedule(0.5).unwrap();
    let (space, op, u, y0) = m4_instance();
    let mh = modified_halpern_run(&space, &op, &u, &y0, &schedule, 50_000).unwrap();
    let sigma = mh_ar_rate_div(&moduli, 4).unwrap();
    // σ_1 grows like e^k: every value lies past any desk-scale horizon, so
    // the audit holds vacuously but must not fail.
    let rep = verify_certificate(&mh, &sigma, 5, 50_000).unwrap();
    assert!(rep.sound());
}

#[test]
fn product_route_on_harmonic_line() {
    let (schedule, moduli) = harmonic_schedule(0.5).unwrap();
    let (space, op, u, y0) = m4_instance();
    let horizon = 200_000;
    let mh = modified_halpern_run(&space, &op, &u, &y0, &schedule, horizon as usize).unwrap();
    let gamma = mh_gamma(&moduli, 4);
    let psi = psi_from_schedule(&schedule, &gamma, 20).unwrap();
    for k in 0..=20 {
        assert_eq!(psi.eval(k), gamma.eval(k) + 2);
    }
    let sigma_star = mh_ar_rate_prod(&moduli, 4, &psi).unwrap();
    let rep = verify_certificate(&mh, &sigma_star, 20, horizon).unwrap();
    assert_sound(&rep, 10);

    // Λ = 2 under λ = 1/2.
    let hat = mh_t_ar_rate(&sigma_star, &moduli, 4).unwrap();
    assert_sound(&verify_certificate(&mh, &hat, 20, horizon).unwrap(), 5);
}

#[test]
fn tm_rates_from_product_route() {
    let (schedule, moduli) = harmonic_schedule(0.5).unwrap();
    let space = line();
    let op = make_operator(OperatorSpec::Negation, &space).unwrap();
    let (u, x0) = (v(0.25), v(0.5));
    // K = 1 here, so the rates for (y_n) are built with M = 4.
    let k = bound_constants(&space, &op, &u, &x0, &u).unwrap().k;
    assert_eq!(k, 1);
    let psi = psi_from_schedule(&schedule, &mh_gamma(&moduli, 4), 20).unwrap();
    let sigma_star = mh_ar_rate_prod(&moduli, 4, &psi).unwrap();
    let tm_rates = tm_rates_from_mh(&moduli, k, &sigma_star).unwrap();
    let horizon = 200_000;
    let tm = tikhonov_mann_run(&space, &op, &u, &x0, &schedule, horizon as usize).unwrap();
    assert_sound(&verify_certificate(&tm, &tm_rates.phi, 20, horizon).unwrap(), 3);
    assert!(verify_certificate(&tm, &tm_rates.phi_hat, 20, horizon).unwrap().sound());

    let wrong = mh_ar_rate_prod(&moduli, 8, &psi).unwrap();
    assert!(matches!(tm_rates_from_mh(&moduli, k, &wrong), Err(Error::Consistency(_))));
}

#[test]
fn y_rates_from_x_with_beta0_one() {
    let (schedule, moduli) = harmonic_schedule(0.5).unwrap();
    let schedule = schedule.with_beta0(1.0).unwrap();
    let space = line();
    let op = make_operator(OperatorSpec::Negation, &space).unwrap();
    let (u, y0) = (v(0.1), v(0.2));
    let k = bound_constants(&space, &op, &u, &y0, &y0).unwrap().k;
    let rates = mh_rates_from_tm(&schedule, &moduli, k, 10).unwrap();
    let horizon = 200_000;
    let mh = modified_halpern_run(&space, &op, &u, &y0, &schedule, horizon as usize).unwrap();
    let star = rates.sigma_star.expect("product route available");
    assert_sound(&verify_certificate(&mh, &star, 10, horizon).unwrap(), 2);
    let hat_star = rates.sigma_hat_star.expect("product route available");
    assert!(verify_certificate(&mh, &hat_star, 10, horizon).unwrap().sound());
}

#[test]
fn sabach_shtern_equality_rollout() {
    let horizon = 1_000usize;
    let b = |n: usize| (2.0 / n as f64).min(1.0);
    let mut a = vec![0.0; horizon + 1];
    let c = vec![1.0; horizon + 1];
    a[1] = 1.0;
    for n in 1..horizon {
        a[n + 1] = (1.0 - b(n + 1)) * a[n] + (b(n) - b(n + 1)) * c[n];
    }
    let rep = sabach_shtern_check(&a, &c, 1.0, horizon as u64).unwrap();
    assert!(rep.pass(), "{rep:?}");
    assert!(rep.worst_ratio <= 1.0);
}

#[test]
fn linear_mh_envelope_on_negation() {
    let (schedule, _) = sabach_schedule(0.5).unwrap();
    let space = line();
    let op = make_operator(OperatorSpec::Negation, &space).unwrap();
    let (u, y0) = (v(0.5), v(1.0));
    let m = bound_constants(&space, &op, &u, &y0, &y0).unwrap().m;
    let rates = linear_rates(LinearKind::Mh, &schedule, m).unwrap();
    let mh = modified_halpern_run(&space, &op, &u, &y0, &schedule, 100_000).unwrap();
    for n in 1..=100_000u64 {
        let t = mh.t_residuals[n as usize];
        assert!(t <= rates.t_bound(n).unwrap() + 1e-9, "n = {n}");
        if let Some(&step) = mh.step_residuals.get(n as usize) {
            assert!(step <= rates.step_bound(n).unwrap() + 1e-9, "n = {n}");
        }
    }
}

#[test]
fn meta_transfer_on_harmonic_line() {
    let (schedule, moduli) = harmonic_schedule(0.5).unwrap();
    let space = line();
    let op = make_operator(
        OperatorSpec::Contraction {
            center: v(0.0),
            ratio: 0.5,
        },
        &space,
    )
    .unwrap();
    let (u, x0) = (v(0.5), v(1.0));
    let tm = tikhonov_mann_run(&space, &op, &u, &x0, &schedule, 20_000).unwrap();
    let mh = modified_halpern_run(&space, &op, &u, &tm.companions[0], &schedule, 20_000).unwrap();
    let k = bound_constants(&space, &op, &u, &x0, &mh.points[0]).unwrap().k;
    let alpha = alpha_rate(&moduli.sigma4, k);
    let omega = MetaRate::empirical(space.clone(), mh.points.clone().into(), Subject::ModifiedHalpern, 5_000, 1e-9);
    let moved = transform_meta(&omega, &alpha).unwrap();
    for k in 0..=5 {
        for g in ["1", "10", "n", "2n"] {
            let g = Counter::parse(g).unwrap();
            let rep = verify_meta(&space, &tm.points, &moved, k, &g, 1e-9).unwrap();
            assert!(rep.pass(), "k = {k}, g = {}: {rep:?}", g.label());
            assert!(rep.bound >= alpha.eval(3 * k + 2));
        }
    }
}
