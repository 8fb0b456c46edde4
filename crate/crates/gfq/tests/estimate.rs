use gfq::estimate::{estimate_pair, estimate_pi, estimate_pi_sup, McRun};
use gfq::rng::with_threads;
use gfq_core::oracles::exact_bm_crossing;
use gfq_core::{QueueSpec, VarianceModel};

fn brownian(x: f64) -> QueueSpec {
    QueueSpec::new(1.0, x, VarianceModel::brownian()).unwrap()
}

#[test]
fn pathwise_monotone_in_level() {
    let spec = QueueSpec::new(1.0, 0.5, VarianceModel::fbm(0.7, 1.0).unwrap()).unwrap();
    let run = McRun::new(4000, 256, 3);
    let rows = estimate_pair(&spec, 5.0, &[1.0, 2.0, 2.0, 3.0, 4.0], &run).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].point.hits <= w[0].point.hits);
        assert!(w[1].sup.hits <= w[0].sup.hits);
    }
    assert_eq!(rows[1], rows[2]);
    for r in &rows {
        assert!(r.sup.hits >= r.point.hits);
    }
    let single = estimate_pi(&spec, 5.0, 3.0, &run).unwrap();
    assert_eq!(single, rows[3].point);
    assert_eq!(estimate_pi_sup(&spec, 5.0, 3.0, &run).unwrap(), rows[3].sup);
}

#[test]
fn backlog_above_level_is_certain() {
    let run = McRun::new(1000, 64, 1);
    let e = estimate_pi_sup(&brownian(5.0), 2.0, 3.0, &run).unwrap();
    assert_eq!(e.p_hat, 1.0);
    let zero_horizon = estimate_pair(&brownian(1.0), 0.0, &[0.0, 2.0], &run).unwrap();
    assert_eq!(zero_horizon[0].point.p_hat, 1.0);
    assert_eq!(zero_horizon[1].point.p_hat, 0.0);
}

#[test]
fn unreachable_level_has_tight_upper_bound() {
    let run = McRun::new(400_000, 8, 1);
    let e = estimate_pi(&brownian(0.0), 1.0, 1e3, &run).unwrap();
    assert_eq!(e.p_hat, 0.0);
    assert!(e.ci_high < 1e-5, "{}", e.ci_high);
}

#[test]
fn thread_count_does_not_change_results() {
    let spec = QueueSpec::new(1.0, 0.0, VarianceModel::fbm(0.8, 1.0).unwrap()).unwrap();
    let run = McRun::new(3000, 128, 21);
    let a = with_threads(Some(1), || estimate_pair(&spec, 4.0, &[0.5, 1.0], &run).unwrap());
    let b = with_threads(Some(4), || estimate_pair(&spec, 4.0, &[0.5, 1.0], &run).unwrap());
    assert_eq!(a, b);
}

#[test]
fn budget_and_argument_errors() {
    let mut run = McRun::new(1000, 1000, 1);
    run.budget = 999_999;
    assert!(matches!(estimate_pi(&brownian(0.0), 1.0, 1.0, &run), Err(gfq::Error::Budget(_))));
    let run = McRun::new(10, 1, 1);
    assert!(matches!(estimate_pi(&brownian(0.0), 1.0, 1.0, &run), Err(gfq::Error::Config(_))));
    let run = McRun::new(10, 16, 1);
    assert!(estimate_pair(&brownian(0.0), 1.0, &[2.0, 1.0], &run).is_err());
    assert!(estimate_pair(&brownian(0.0), 1.0, &[], &run).is_err());
}

// The grid sees the workload only at grid times, which lowers the crossing
// probability like a level shift of 0.5826 sqrt(step); the adjusted oracle
// accounts for that.
#[test]
fn interval_coverage_against_adjusted_oracle() {
    let (t, u, grid) = (2.0, 1.0, 256usize);
    let step = t / grid as f64;
    let truth = exact_bm_crossing(u + 0.582_597_157_939_010_7 * step.sqrt(), 1.0, t).unwrap();
    let runs = 200;
    let mut covered = 0;
    for seed in 0..runs {
        let e = estimate_pi(&brownian(0.0), t, u, &McRun::new(2000, grid, 1000 + seed)).unwrap();
        if e.ci_low <= truth && truth <= e.ci_high {
            covered += 1;
        }
    }
    assert!(covered >= 180, "covered {covered} of {runs}");
}

#[test]
fn finer_grid_sees_more_crossings() {
    // the discrete sup undershoots, less so on the finer grid
    let spec = brownian(0.0);
    let coarse = estimate_pi_sup(&spec, 5.0, 1.5, &McRun::new(20_000, 64, 4)).unwrap();
    let fine = estimate_pi_sup(&spec, 5.0, 1.5, &McRun::new(20_000, 4096, 5)).unwrap();
    assert!(fine.p_hat > coarse.p_hat + 2.0 * (fine.std_error + coarse.std_error));
}
