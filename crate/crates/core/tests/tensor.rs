mod common;

use aup_core::catalog::{default_model, CatalogModel, LinRegModel, LinRegParam, ModelId};
use aup_core::tensor::{
    check_spd, fd_gradient, fd_hessian, fd_jacobian, fd_jacobian_extrapolated, fd_third,
    verify_information_identity, DerivativeBundle, Fault, FaultInjected, ParamPoint, RectDomain,
    TensorTolerance,
};
use common::*;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn coarse() -> TensorTolerance {
    TensorTolerance::new(1e-6, 1e-9, 3e-4).unwrap()
}

/// `I = -d^2/dtheta^2 E l`, `K = d^3/dtheta^3 E l`, both at `theta = theta0`,
/// and `J = -K - dI` from differences of the oracle `I`.
fn check_against_expected_loglik<F>(bundle: &dyn DerivativeBundle, theta0: &[f64], ell: F)
where
    F: Fn(&[f64], &[f64]) -> f64,
{
    let tol = coarse();
    let domain = bundle.domain();
    let info = fd_hessian(|t| -ell(theta0, t), domain, theta0, &tol).unwrap();
    let k = fd_third(|t| ell(theta0, t), domain, theta0, &tol).unwrap();
    let p = bundle.dim();
    let analytic_i = bundle.info(theta0);
    let analytic_k = bundle.k(theta0);
    let analytic_j = bundle.j(theta0);
    let scale = 1.0 + analytic_k.max_abs() + analytic_i.amax();
    for r in 0..p {
        for s in 0..p {
            assert!(
                (info[(r, s)] - analytic_i[(r, s)]).abs() < 1e-5 * scale,
                "{} I[{r},{s}]: oracle {} analytic {}",
                bundle.name(),
                info[(r, s)],
                analytic_i[(r, s)]
            );
            for t in 0..p {
                assert!(
                    (k[(r, s, t)] - analytic_k[(r, s, t)]).abs() < 1e-4 * scale,
                    "{} K[{r},{s},{t}]: oracle {} analytic {}",
                    bundle.name(),
                    k[(r, s, t)],
                    analytic_k[(r, s, t)]
                );
            }
        }
    }
    // J from the identity with the oracle I, differentiated around theta0.
    for t in 0..p {
        let h = 1e-4 * (1.0 + theta0[t].abs());
        let shifted = |d: f64| {
            let mut th = theta0.to_vec();
            th[t] += d;
            let th2 = th.clone();
            fd_hessian(|x| -ell(&th2, x), domain, &th, &coarse()).unwrap()
        };
        let d_info = (shifted(h) - shifted(-h)) / (2.0 * h);
        for r in 0..p {
            for s in 0..p {
                let oracle = -k[(r, s, t)] - d_info[(r, s)];
                assert!(
                    (oracle - analytic_j[(r, s, t)]).abs() < 1e-3 * scale,
                    "{} J[{r},{s},{t}]: oracle {oracle} analytic {}",
                    bundle.name(),
                    analytic_j[(r, s, t)]
                );
            }
        }
    }
}

#[test]
fn iid_tensors_match_expected_loglik() {
    let points: [(ModelId, &[f64]); 6] = [
        (ModelId::Binomial, &[0.3]),
        (ModelId::Binomial, &[0.62]),
        (ModelId::NormalMeanVar, &[0.4, 1.7]),
        (ModelId::NormalLocScale, &[-0.2, 0.8]),
        (ModelId::Gamma, &[2.0, 1.0]),
        (ModelId::Gamma, &[3.5, 0.6]),
    ];
    for (id, theta) in points {
        let m = default_model(id);
        check_against_expected_loglik(m.as_ref(), theta, |t0, t| expected_loglik(id, t0, t));
    }
}

#[test]
fn iid_log_density_integrates_to_expected_loglik() {
    // Composite Simpson on a wide fixed window.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut acc = f(a) + f(b);
        for i in 1..n {
            acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
        }
        acc * h / 3.0
    }
    let theta0 = [0.5f64, 1.3];
    let theta = [0.1, 0.9];
    for id in [ModelId::NormalMeanVar, ModelId::NormalLocScale] {
        let m = default_model(id);
        let sd = if id == ModelId::NormalMeanVar {
            theta0[1].sqrt()
        } else {
            theta0[1]
        };
        let v = simpson(
            |x| m.log_density(x, &theta0).unwrap().exp() * m.log_density(x, &theta).unwrap(),
            theta0[0] - 14.0 * sd,
            theta0[0] + 14.0 * sd,
            20_000,
        );
        assert!(
            (v - expected_loglik(id, &theta0, &theta)).abs() < 1e-9,
            "{id}"
        );
    }
    let g = default_model(ModelId::Gamma);
    let (t0, t) = ([2.5, 1.2], [1.8, 0.7]);
    // x = e^u
    let v = simpson(
        |u| {
            let x = u.exp();
            g.log_density(x, &t0).unwrap().exp() * g.log_density(x, &t).unwrap() * x
        },
        -40.0,
        5.0,
        40_000,
    );
    assert!((v - expected_loglik(ModelId::Gamma, &t0, &t)).abs() < 1e-8);
    let b = default_model(ModelId::Binomial);
    let v = 0.3 * b.log_density(1.0, &[0.7]).unwrap() + 0.7 * b.log_density(0.0, &[0.7]).unwrap();
    assert!((v - expected_loglik(ModelId::Binomial, &[0.3], &[0.7])).abs() < 1e-14);
}

#[test]
fn ner_tensors_match_expected_loglik() {
    for sizes in [vec![2, 3, 5], vec![4, 4, 4, 4]] {
        let model = small_ner(&sizes);
        let x = model.covariates().to_vec();
        for theta in [[1.0, -0.5, 0.8, 1.3], [0.2, 1.0, 2.0, 0.5]] {
            check_against_expected_loglik(&model, &theta, |t0, t| ner_expected_loglik(&x, t0, t));
        }
    }
}

#[test]
fn linreg_tensors_match_expected_loglik() {
    let x = aup_core::catalog::linreg_grid_design(9);
    for (param, sd) in [(LinRegParam::Variance, false), (LinRegParam::StdDev, true)] {
        let model = LinRegModel::new(x.clone(), param).unwrap();
        check_against_expected_loglik(&model, &[0.3, -1.0, 1.6], |t0, t| {
            linreg_expected_loglik(&x, sd, t0, t)
        });
    }
}

#[test]
fn identity_examples() {
    let tol = TensorTolerance::default();
    let nv = default_model(ModelId::NormalMeanVar);
    let r = verify_information_identity(nv.as_ref(), &[0.0, 1.0], &tol).unwrap();
    assert!(r.passed && r.max_violation < 1e-6, "{r:?}");
    let b = default_model(ModelId::Binomial);
    let r = verify_information_identity(b.as_ref(), &[0.5], &tol).unwrap();
    assert!(r.passed && r.max_violation < 1e-6, "{r:?}");
}

#[test]
fn zeroed_k_is_reported_not_thrown() {
    let tol = TensorTolerance::default();
    let nv = default_model(ModelId::NormalMeanVar);
    let faulty = FaultInjected::new(nv.as_ref(), Fault::ZeroK);
    let theta = [0.0, 1.0];
    let r = verify_information_identity(&faulty, &theta, &tol).unwrap();
    assert!(!r.passed);
    // With K gone the violation is max |dI + J| = max |K|.
    let k = nv.k(&theta);
    assert!((r.max_violation - k.max_abs()).abs() < 1e-6, "{r:?}");
}

#[test]
fn identity_holds_on_grid_for_iid_models() {
    let tol = TensorTolerance::default();
    for m in iid_models() {
        for theta in sample_points(m.domain(), 10) {
            let r = verify_information_identity(m.as_ref(), &theta, &tol).unwrap();
            assert!(r.passed, "{} at {:?}: {r:?}", m.name(), theta.coords());
        }
    }
}

#[test]
fn identity_holds_for_regression_models() {
    let tol = TensorTolerance::default();
    for id in [
        ModelId::LinRegVar,
        ModelId::LinRegSd,
        ModelId::Ner,
        ModelId::NerBalanced,
    ] {
        let m = default_model(id);
        assert!(!m.is_iid());
        for theta in sample_points(m.domain(), 5) {
            let r = verify_information_identity(m.as_ref(), &theta, &tol).unwrap();
            assert!(r.passed, "{id} at {:?}: {r:?}", theta.coords());
        }
    }
}

#[test]
fn spd_examples() {
    assert!(check_spd(&DMatrix::identity(2, 2)));
    assert!(!check_spd(&DMatrix::from_diagonal(&nalgebra::dvector![
        1.0, -1.0
    ])));
    let ner = default_model(ModelId::NerBalanced);
    let info = ner.info(&[1.0, 1.0, 1.0, 1.0]);
    assert!(check_spd(&info));
    for r in 0..2 {
        for c in 2..4 {
            assert!(info[(r, c)].abs() < 1e-12 && info[(c, r)].abs() < 1e-12);
        }
    }
}

#[test]
fn fd_gradient_examples() {
    let tol = TensorTolerance::default();
    let line = RectDomain::real_then_positive(1, 0);
    let g = fd_gradient(|x| x[0] * x[0], &line, &[3.0], &tol).unwrap();
    assert!((g[0] - 6.0).abs() < 1e-8);
    let half = RectDomain::real_then_positive(1, 1);
    let g = fd_gradient(|x| -2.0 * x[1].ln(), &half, &[0.0, 1.0], &tol).unwrap();
    assert!(g[0].abs() < 1e-12 && (g[1] + 2.0).abs() < 1e-8);
    let g = fd_gradient(|_| 4.2, &half, &[0.3, 2.0], &tol).unwrap();
    assert_eq!(g, vec![0.0, 0.0]);
    assert!(fd_gradient(|x| x[1], &half, &[0.0, 1e-6], &tol).is_err());
}

fn catalog_ids() -> impl Strategy<Value = ModelId> {
    prop::sample::select(ModelId::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fd_gradient_exact_on_quadratics(
        a in prop::collection::vec(-3.0..3.0f64, 3),
        b in prop::collection::vec(-3.0..3.0f64, 3),
        c in -2.0..2.0f64,
        theta in prop::collection::vec(-5.0..5.0f64, 3),
    ) {
        let d = RectDomain::real_then_positive(3, 0);
        let f = |x: &[f64]| (0..3).map(|i| a[i] * x[i] * x[i] + b[i] * x[i]).sum::<f64>() + c * x[0] * x[2];
        let g = fd_gradient(f, &d, &theta, &TensorTolerance::default()).unwrap();
        let exact = [
            2.0 * a[0] * theta[0] + b[0] + c * theta[2],
            2.0 * a[1] * theta[1] + b[1],
            2.0 * a[2] * theta[2] + b[2] + c * theta[0],
        ];
        for i in 0..3 {
            prop_assert!((g[i] - exact[i]).abs() <= 1e-8 * (1.0 + exact[i].abs()));
        }
    }

    #[test]
    fn catalog_bundles_are_well_formed(id in catalog_ids(), u in prop::collection::vec(0.05..0.95f64, 4)) {
        let m = default_model(id);
        let theta = interior_point(m.as_ref(), &u);
        let h = m.h(&theta);
        let scale = 1.0 + h.amax();
        prop_assert!((&h - h.transpose()).amax() <= 1e-12 * scale);
        prop_assert!(check_spd(&h));
        let (j, k) = (m.j(&theta), m.k(&theta));
        let p = m.dim();
        for r in 0..p { for s in 0..p { for t in 0..p {
            prop_assert_eq!(j[(r, s, t)], j[(s, r, t)]);
            prop_assert_eq!(k[(r, s, t)], k[(s, r, t)]);
            prop_assert_eq!(k[(r, s, t)], k[(t, s, r)]);
            prop_assert_eq!(k[(r, s, t)], k[(r, t, s)]);
        }}}
    }
}

/// Maps `u` in `(0, 1)^p` to an interior point.
fn interior_point(m: &dyn CatalogModel, u: &[f64]) -> ParamPoint {
    use aup_core::tensor::Bound;
    let d = m.domain();
    d.lower()
        .iter()
        .zip(d.upper())
        .enumerate()
        .map(|(t, (lo, hi))| {
            let v = u[t % u.len()];
            match (lo, hi) {
                (Bound::Finite(a), Bound::Finite(b)) => a + (b - a) * v,
                (Bound::Finite(a), _) => a + 0.2 + 4.0 * v,
                _ => 6.0 * v - 3.0,
            }
        })
        .collect::<Vec<_>>()
        .into()
}

#[test]
fn extrapolated_jacobian_removes_the_h2_term() {
    // d/dx (1/x) = -1/x^2; at x = 0.1 the central h^2 term is about 1e-2 for this step.
    let dom = RectDomain::real_then_positive(0, 1);
    let tol = TensorTolerance::new(1e-6, 1e-9, 1e-3).unwrap();
    let f = |x: &[f64]| Ok(vec![1.0 / x[0]]);
    let exact = -100.0;
    let plain = fd_jacobian(f, &dom, &[0.1], &tol).unwrap()[(0, 0)];
    let rich = fd_jacobian_extrapolated(f, &dom, &[0.1], &tol).unwrap()[(0, 0)];
    assert!((plain - exact).abs() > 1e-4, "{plain}");
    assert!(
        (rich - exact).abs() < 1e-3 * (plain - exact).abs(),
        "{rich} vs {plain}"
    );
}
