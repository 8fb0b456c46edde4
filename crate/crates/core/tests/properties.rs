use gfq_core::asympt::{approx_dispatch, Target};
use gfq_core::constants::ClosedFormsOnly;
use gfq_core::geometry::{m, omega_ratio, t_peak, t_star};
use gfq_core::regimes::{classify, horizon_value, HorizonFamily};
use gfq_core::{Error, QueueSpec, Scenario, VarianceModel};
use proptest::prelude::*;

fn fbm(h: f64, c: f64, x: f64) -> QueueSpec {
    QueueSpec::new(c, x, VarianceModel::fbm(h, 1.0).unwrap()).unwrap()
}

// Cholesky on K + eps I; succeeds iff the smallest eigenvalue of K exceeds -eps (up to roundoff).
fn cholesky_ok(k: &[Vec<f64>], eps: f64) -> bool {
    let n = k.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let mut s = k[i][j] + if i == j { eps } else { 0.0 };
            s -= (0..j).map(|p| l[i][p] * l[j][p]).sum::<f64>();
            if i == j {
                if s <= 0.0 {
                    return false;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    true
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn covariance_is_positive_semidefinite(h in 0.1f64..0.95, n in 2usize..64, step in 0.01f64..2.0) {
        let model = VarianceModel::fbm(h, 1.0).unwrap();
        let pts: Vec<f64> = (1..=n).map(|i| i as f64 * step).collect();
        let k: Vec<Vec<f64>> = pts
            .iter()
            .map(|&s| pts.iter().map(|&t| model.increment_covariance(s, t).unwrap()).collect())
            .collect();
        let scale = k.iter().map(|r| r.iter().fold(0.0f64, |a, &b| a.max(b.abs()))).fold(0.0f64, f64::max);
        prop_assert!(cholesky_ok(&k, 1e-9 + 1e-12 * scale));
    }

    #[test]
    fn covariance_is_symmetric(h in 0.05f64..0.99, s in 0.0f64..50.0, t in 0.0f64..50.0) {
        let model = VarianceModel::fbm(h, 1.7).unwrap();
        prop_assert_eq!(model.increment_covariance(s, t).unwrap(), model.increment_covariance(t, s).unwrap());
    }

    #[test]
    fn sigma_inverse_inverts_sigma(h in 0.05f64..0.99, scale in 0.1f64..10.0, lt in -6.0f64..6.0) {
        let model = VarianceModel::fbm(h, scale).unwrap();
        let t = 10f64.powf(lt);
        let back = model.sigma_inverse(model.sigma(t).unwrap()).unwrap();
        prop_assert!(((back - t) / t).abs() < 1e-10);
    }

    #[test]
    fn omega_is_two_for_brownian(c in 0.01f64..50.0, u in 0.01f64..1e6, t in 0.01f64..1e6) {
        let spec = fbm(0.5, c, 0.0);
        prop_assert!((omega_ratio(&spec, u, t).unwrap() - 2.0).abs() < 1e-10);
    }

    #[test]
    fn peak_minimizes_boundary(h in 0.1f64..0.95, c in 0.1f64..5.0, lu in 0.0f64..6.0) {
        let spec = fbm(h, c, 0.0);
        let u = 10f64.powf(lu);
        let tu = t_peak(&spec, u).unwrap();
        let best = m(&spec, u, tu).unwrap();
        for k in 0..200 {
            let t = tu / 100.0 * 1e4f64.powf(k as f64 / 199.0);
            prop_assert!(best <= m(&spec, u, t).unwrap() * (1.0 + 1e-14));
        }
    }
}

fn families() -> Vec<HorizonFamily> {
    let mut out = vec![HorizonFamily::Fixed { t: 3.0 }];
    for &kappa in &[0.25, 1.0, 3.0] {
        for &rho in &[0.0, 0.3, 0.5, 2.0 / 3.0, 0.8, 1.0, 1.5] {
            out.push(HorizonFamily::Power { kappa, rho });
        }
    }
    for &delta in &[-2.0, 0.0, 1.5] {
        for &beta in &[0.0, 0.25, 0.5, 0.75, 0.9, 1.0, 1.2] {
            out.push(HorizonFamily::Offset { delta, beta });
        }
    }
    for &c in &[0.5, 2.0, 6.0] {
        out.push(HorizonFamily::Exp { c, exponent: None });
        out.push(HorizonFamily::Exp { c, exponent: Some(0.3) });
        out.push(HorizonFamily::Exp { c, exponent: Some(1.5) });
    }
    out
}

#[test]
fn classification_is_total() {
    let mut counts = std::collections::BTreeMap::new();
    for &h in &[0.25, 0.5, 0.75] {
        for &c in &[0.5, 1.0, 3.0] {
            for &x in &[0.0, 1.0] {
                let spec = fbm(h, c, x);
                for f in families() {
                    let key = match classify(&spec, &f) {
                        Ok(r) => format!("{:?}", r.scenario),
                        Err(Error::BoundaryRegime(_)) => "boundary".into(),
                        Err(Error::T3Violation(_)) => "t3".into(),
                        Err(Error::Parameter(_)) => "parameter".into(),
                        Err(e) => panic!("undeclared error {e} for {f:?}"),
                    };
                    *counts.entry(key).or_insert(0) += 1;
                }
            }
        }
    }
    for s in [
        "FixedHorizon",
        "ShortOmegaZero",
        "ShortOmegaFinite",
        "ShortOmegaInfinite",
        "ModerateFiniteOmega",
        "LongInfiniteOmega",
        "boundary",
        "t3",
    ] {
        assert!(counts.contains_key(s), "no family reached {s}: {counts:?}");
    }
}

// Infinite and zero limits may be approached like a small power of u, so they
// are also accepted as a clear trend between u = 1e6 and u = 1e8.
fn check_limit(name: &str, value: f64, earlier: f64, limit: f64) {
    if limit.is_infinite() {
        let trend = value.abs() > 1e3 || value.abs() > 2.0 * earlier.abs();
        assert!(trend && value.signum() == limit.signum(), "{name}: {value} (was {earlier}) vs {limit}");
    } else if limit == 0.0 {
        let trend = value.abs() < 0.05 || value.abs() < 0.9 * earlier.abs();
        assert!(trend, "{name}: {value} (was {earlier}) vs 0");
    } else {
        assert!(((value - limit) / limit).abs() < 0.05, "{name}: {value} vs {limit}");
    }
}

#[test]
fn declared_limits_match_numerics() {
    let u = 1e8;
    let cases = [
        (0.5, 1.0, HorizonFamily::Power { kappa: 1.0, rho: 0.8 }),
        (0.5, 1.0, HorizonFamily::Power { kappa: 0.5, rho: 1.0 }),
        (0.5, 2.0, HorizonFamily::Power { kappa: 3.0, rho: 1.0 }),
        (0.75, 1.0, HorizonFamily::Power { kappa: 1.0, rho: 0.5 }),
        (0.75, 1.0, HorizonFamily::Power { kappa: 0.25, rho: 2.0 / 3.0 }),
        (0.75, 1.0, HorizonFamily::Power { kappa: 1.0, rho: 0.9 }),
        (0.25, 1.0, HorizonFamily::Power { kappa: 1.0, rho: 0.2 }),
        (0.25, 1.0, HorizonFamily::Power { kappa: 0.2, rho: 1.0 }),
        (0.25, 1.0, HorizonFamily::Power { kappa: 1.0, rho: 1.5 }),
        (0.5, 1.0, HorizonFamily::Offset { delta: 2.0, beta: 0.5 }),
        (0.75, 1.0, HorizonFamily::Offset { delta: -1.0, beta: 0.5 }),
        (0.75, 0.5, HorizonFamily::Offset { delta: 1.5, beta: 0.75 }),
        (0.25, 1.0, HorizonFamily::Offset { delta: 1.0, beta: 0.9 }),
        (0.25, 1.0, HorizonFamily::Offset { delta: 1.0, beta: 1.2 }),
    ];
    for (h, c, f) in cases {
        let spec = fbm(h, c, 0.0);
        let r = classify(&spec, &f).unwrap();
        let limits = |u: f64| {
            let t = horizon_value(&f, &spec, u).unwrap();
            let tu = t_peak(&spec, u).unwrap();
            [
                omega_ratio(&spec, u, t).unwrap(),
                t / u.powf(1.0 / (2.0 * h)),
                if r.omega.is_some() { (t - tu) / u.powf(h) } else { t / u },
            ]
        };
        let now = limits(u);
        let before = limits(1e6);
        let declared = [r.omega_inf.unwrap(), r.phi, r.omega.unwrap_or(r.gamma)];
        for (i, name) in ["Omega", "phi", "omega/gamma"].iter().enumerate() {
            check_limit(&format!("{name} {f:?} H={h}"), now[i], before[i], declared[i]);
        }
    }
}

#[test]
fn boundary_errors_are_declared() {
    let spec = fbm(0.5, 2.0, 0.0);
    let ts = t_star(&spec);
    assert!(matches!(
        classify(&spec, &HorizonFamily::Power { kappa: ts, rho: 1.0 }),
        Err(Error::BoundaryRegime(_))
    ));
    assert!(matches!(
        classify(&spec, &HorizonFamily::Offset { delta: -1.0, beta: 0.8 }),
        Err(Error::BoundaryRegime(_))
    ));
    assert!(matches!(
        classify(&spec, &HorizonFamily::Offset { delta: -1.0, beta: 1.0 }),
        Err(Error::Parameter(_))
    ));
}

#[test]
fn evaluators_decrease_in_level() {
    let cases = [
        (0.5, 0.0, HorizonFamily::Power { kappa: 1.0, rho: 0.8 }),
        (0.75, 0.0, HorizonFamily::Power { kappa: 1.0, rho: 0.5 }),
        (0.5, 0.0, HorizonFamily::Offset { delta: 1.0, beta: 0.5 }),
        (0.5, 0.0, HorizonFamily::Power { kappa: 2.0, rho: 1.0 }),
        (0.75, 1.0, HorizonFamily::Power { kappa: 1.0, rho: 0.5 }),
        (0.5, 1.0, HorizonFamily::Power { kappa: 0.5, rho: 1.0 }),
        (0.75, 1.0, HorizonFamily::Fixed { t: 4.0 }),
    ];
    for (h, x, f) in cases {
        let spec = fbm(h, 1.0, x);
        for target in [Target::Point, Target::Sup] {
            let mut prev = f64::INFINITY;
            for k in 0..90 {
                let u = 10.0 + k as f64;
                let lv = match approx_dispatch(&spec, &f, u, target, &ClosedFormsOnly) {
                    Ok(e) => e.log_value,
                    Err(Error::DelegateToMonteCarlo(_)) | Err(Error::ConstantRequired(_)) => break,
                    Err(e) => panic!("{f:?}: {e}"),
                };
                assert!(lv < prev, "{f:?} {target:?} not decreasing at u={u}");
                prev = lv;
            }
        }
    }
}

#[test]
fn scenario_helpers() {
    assert!(Scenario::ShortOmegaFinite.is_short());
    assert!(Scenario::LongInfiniteOmega.is_moderate_or_long());
    assert!(!Scenario::FixedHorizon.is_short());
}
