use gfq::constants::{ConstantCache, McSettings, PickandsMode};
use gfq::export::{parse, render, Format};
use gfq::harness::{
    convergence_study, convergence_study_with, lemma_limit_sweep, stationarity_study, StudyConfig, StudyRow,
};
use gfq::rng::with_threads;
use gfq_core::constants::{ClosedFormsOnly, ConstantKind, ConstantQuery, LimitProcessSpec};
use gfq_core::{HorizonFamily, QueueSpec, VarianceModel};

fn short_brownian() -> StudyConfig {
    serde_json::from_str(
        r#"{
        "model": {"kind": "fbm", "hurst": 0.5},
        "queue": {"c": 1.0},
        "horizon": {"kind": "power", "kappa": 0.5, "rho": 1.0},
        "u_grid": [1.0, 2.0, 3.0, 4.0],
        "mc": {"reps": 200000, "grid": 512, "seed": 11},
        "targets": ["point", "sup"]
    }"#,
    )
    .unwrap()
}

#[test]
fn brownian_short_horizon_ratio_approaches_one() {
    let rows = convergence_study(&short_brownian()).unwrap();
    assert_eq!(rows.len(), 8);
    let regime = &rows[0].regime;
    assert!(rows.iter().all(|r| &r.regime == regime));
    let point: Vec<&StudyRow> = rows.iter().filter(|r| r.target == gfq_core::asympt::Target::Point).collect();
    for r in &point {
        eprintln!("u={} p={} se={} ratio={:?}", r.u, r.p_hat, r.se, r.ratio);
    }
    let first = point[0].ratio.unwrap();
    let last = point[3].ratio.unwrap();
    assert!((0.5..=2.0).contains(&last), "{last}");
    assert!((last - 1.0).abs() < (first - 1.0).abs() + 0.05, "{first} -> {last}");
}

#[test]
fn unobserved_levels_report_na_ratio() {
    let mut cfg = short_brownian();
    cfg.u_grid = vec![30.0];
    cfg.mc.reps = 2000;
    cfg.targets = vec![gfq_core::asympt::Target::Point];
    let rows = convergence_study(&cfg).unwrap();
    assert_eq!(rows[0].hits, 0);
    assert_eq!(rows[0].ratio, None);
    assert!(rows[0].log_value.is_some());
    let csv = render(&rows, Format::Csv).unwrap();
    assert!(csv.lines().nth(1).unwrap().ends_with(",n/a"), "{csv}");
}

#[test]
fn exports_do_not_depend_on_threads() {
    let mut cfg = short_brownian();
    cfg.mc.reps = 20_000;
    let a = with_threads(Some(1), || convergence_study(&cfg).unwrap());
    let b = with_threads(Some(2), || convergence_study(&cfg).unwrap());
    for f in [Format::Csv, Format::Json] {
        assert_eq!(render(&a, f).unwrap(), render(&b, f).unwrap());
    }
}

#[test]
fn exports_round_trip() {
    let mut cfg = short_brownian();
    cfg.mc.reps = 5000;
    let rows = convergence_study(&cfg).unwrap();
    for f in [Format::Csv, Format::Json] {
        let text = render(&rows, f).unwrap();
        let back: Vec<StudyRow> = parse(&text, f).unwrap();
        assert_eq!(back, rows);
    }
    let empty: Vec<StudyRow> = Vec::new();
    let csv = render(&empty, Format::Csv).unwrap();
    assert_eq!(csv.lines().count(), 1);
    assert!(csv.starts_with("u,T_u,target,regime,formula_id,p_hat"));
    assert!(parse::<StudyRow>(&csv, Format::Csv).unwrap().is_empty());
}

#[test]
fn constants_are_estimated_into_the_cache() {
    // H = 0.7 short horizon needs a Pickands constant no closed form covers
    let cfg: StudyConfig = serde_json::from_str(
        r#"{
        "model": {"kind": "fbm", "hurst": 0.7},
        "queue": {"c": 1.0},
        "horizon": {"kind": "power", "kappa": 0.5, "rho": 1.0},
        "u_grid": [1.0],
        "mc": {"reps": 2000, "grid": 64, "seed": 1},
        "targets": ["point"],
        "constants": {"S": 8.0, "step": 0.0625, "reps": 500, "seed": 2}
    }"#,
    )
    .unwrap();
    let mut cache = ConstantCache::new();
    let rows = convergence_study_with(&cfg, &mut cache).unwrap();
    assert!(rows[0].log_value.is_some());
    let n = cache.len();
    let again = convergence_study_with(&cfg, &mut cache).unwrap();
    assert_eq!(cache.len(), n);
    assert_eq!(rows, again);
}

#[test]
fn config_errors() {
    let mut cfg = short_brownian();
    cfg.u_grid = vec![2.0, 1.0];
    assert!(matches!(convergence_study(&cfg), Err(gfq::Error::Config(_))));
    let mut cfg = short_brownian();
    cfg.targets.clear();
    assert!(matches!(convergence_study(&cfg), Err(gfq::Error::Config(_))));
    let mut cfg = short_brownian();
    cfg.mc.reps = 1_000_000_000;
    assert!(matches!(convergence_study(&cfg), Err(gfq::Error::Budget(_))));
    let bad = r#"{"model": {"kind": "fbm", "hurst": 0.5}, "queue": {"c": 1.0}, "horizon": {"kind": "power", "kappa": 0.5, "rho": 1.0},
        "u_grid": [1.0], "mc": {"reps": 1, "grid": 1, "seed": 1}, "targets": ["point"], "extra": 1}"#;
    assert!(serde_json::from_str::<StudyConfig>(bad).is_err());
}

#[test]
fn brownian_stationarity_halves() {
    let spec = QueueSpec::new(1.0, 0.0, VarianceModel::brownian()).unwrap();
    let fam = HorizonFamily::Offset { delta: 0.0, beta: 0.0 };
    let rows = stationarity_study(&spec, &fam, &[500.0, 5000.0], true, &ClosedFormsOnly).unwrap();
    let r = &rows[1];
    assert_eq!(r.point_factor, "0.5");
    assert!((r.realized_point.unwrap() - 0.5).abs() < 0.01, "{:?}", r.realized_point);
    let fbm = QueueSpec::new(1.0, 0.0, VarianceModel::fbm(0.7, 1.0).unwrap()).unwrap();
    assert!(matches!(
        stationarity_study(&fbm, &fam, &[100.0], true, &ClosedFormsOnly),
        Err(gfq::Error::Unsupported(_))
    ));
    let err = stationarity_study(&fbm, &fam, &[100.0], false, &ClosedFormsOnly).unwrap_err();
    assert!(matches!(err, gfq::Error::Core(gfq_core::Error::ConstantRequired(_))));
    let mut cache = ConstantCache::new();
    let q = ConstantQuery { kind: ConstantKind::Pickands, process: LimitProcessSpec::fbm(0.7).unwrap() };
    cache.ensure(&q, &McSettings::new(8.0, 0.0625, 200, 1), PickandsMode::ShiftAverage).unwrap();
    let sym = stationarity_study(&fbm, &fam, &[100.0], false, &cache).unwrap();
    assert_eq!(sym[0].stationary_log, None);
    assert_eq!(sym[0].realized_point, None);
}

#[test]
fn lemma_sweep_brownian() {
    let spec = QueueSpec::new(1.0, 0.0, VarianceModel::brownian()).unwrap();
    let fam = HorizonFamily::Power { kappa: 0.5, rho: 1.0 };
    let rows = lemma_limit_sweep(&spec, &fam).unwrap();
    assert_eq!(rows.len(), 6);
    for r in &rows {
        assert!((r.omega - 2.0).abs() < 1e-10, "{}", r.omega);
        assert_eq!(r.t_ratio, r.t_star);
        assert!(r.a_error < 1e-4 && r.b_error < 1e-4, "{r:?}");
    }
}
