use rte_rbm::bench::output::{self, read_errors, RunMeta};
use rte_rbm::bench::{test_set, Experiment, ExperimentPlan};
use rte_rbm::rom::{LspgMode, RomKind};

fn small_plan(kind: RomKind) -> ExperimentPlan {
    let mut plan = ExperimentPlan::new("homogeneous-1d", kind);
    plan.max_m = 6;
    plan.test_count = Some(5);
    plan.train_grid = Some(vec![6, 6]);
    plan
}

#[test]
fn run_files_round_trip() {
    let exp = Experiment::run(&small_plan(RomKind::PgRes)).unwrap();
    let tmp = tempfile_dir();
    output::write_run(&tmp, &exp).unwrap();
    let rows = read_errors(&tmp.join(output::ERRORS_FILE)).unwrap();
    assert_eq!(rows.len(), exp.rows.len());
    for (a, b) in rows.iter().zip(&exp.rows) {
        assert_eq!(a.m, b.m);
        for (x, y) in [
            (a.e_l2_test, b.e_l2_test),
            (a.e_res_test, b.e_res_test),
            (a.spectral_ratio, b.spectral_ratio),
        ] {
            assert!(x == y || (x.is_nan() && y.is_nan()), "{x} vs {y}");
        }
    }
    let art = output::load_run(&tmp).unwrap();
    assert_eq!(art.basis.dim(), exp.trained.basis.dim());
    assert_eq!(art.basis.snapshots(), exp.trained.basis.snapshots());
    assert_eq!(art.basis.u(), exp.trained.basis.u());
    assert_eq!(art.basis.params(), exp.trained.basis.params());
    let mu = [1.37, 5.61];
    let c0 = exp.trained.model.solve(&mu).unwrap();
    let c1 = art.model.solve(&mu).unwrap();
    assert_eq!(c0, c1);
    assert_eq!(art.meta.plan.problem, "homogeneous-1d");
    assert_eq!(art.meta.full_order_len, exp.system.len());
    std::fs::remove_dir_all(&tmp).unwrap();
}

#[test]
fn test_points_are_solved_once() {
    let exp = Experiment::run(&small_plan(RomKind::GRes)).unwrap();
    assert_eq!(exp.test.solves, 5);
    assert_eq!(exp.test.params.len(), 5);
    assert_eq!(exp.trained.log.fom_solves, exp.trained.basis.dim());
    let tmp = tempfile_dir();
    output::write_run(&tmp, &exp).unwrap();
    let meta: RunMeta =
        serde_json::from_str(&std::fs::read_to_string(tmp.join(output::META_FILE)).unwrap())
            .unwrap();
    assert_eq!(meta.test_solves, 5);
    assert_eq!(meta.offline_solves, exp.trained.basis.dim());
    std::fs::remove_dir_all(&tmp).unwrap();
}

#[test]
fn test_sets_follow_the_seed() {
    let b = rte_rbm::bench::lookup("pin-cell-2d").unwrap();
    let a = test_set(&b, 10, 3).unwrap();
    assert_eq!(a, test_set(&b, 10, 3).unwrap());
    assert_ne!(a, test_set(&b, 10, 4).unwrap());
    assert!(a.iter().all(|mu| b.contains(mu)));
    assert!(test_set(&b, 0, 3).is_err());
}

#[test]
fn prime_runs_skip_the_monotonicity_check() {
    let mut plan = small_plan(RomKind::PgRes);
    plan.mode = LspgMode::Prime;
    let exp = Experiment::run(&plan).unwrap();
    assert!(exp.check_invariants().is_ok());
}

#[test]
fn corrupt_basis_file_is_rejected() {
    let tmp = tempfile_dir();
    std::fs::write(tmp.join(output::BASIS_FILE), b"not a basis").unwrap();
    assert!(output::read_basis(&tmp.join(output::BASIS_FILE)).is_err());
    std::fs::remove_dir_all(&tmp).unwrap();
}

fn tempfile_dir() -> std::path::PathBuf {
    use std::sync::atomic::{AtomicUsize, Ordering};
    static NEXT: AtomicUsize = AtomicUsize::new(0);
    let dir = std::env::temp_dir().join(format!(
        "rte-rbm-output-{}-{}",
        std::process::id(),
        NEXT.fetch_add(1, Ordering::SeqCst)
    ));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
