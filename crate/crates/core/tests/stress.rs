//! Broad parameter-grid sweep: every generated instance must solve to a
//! valid tour, and on oracle-sized instances the ratio ceiling must hold.

use gcrp_core::instance::{classify, generate_random, CrossMode, EndpointsMode, GenParams, Status};
use gcrp_core::oracle::{exact_gcrp, OracleConfig};
use gcrp_core::solver::solve;
use gcrp_core::validity::check_tour;

#[test]
fn parameter_grid() {
    let cfg = OracleConfig::default();
    let mut total = 0u64;
    for seed in 0..12u64 {
        for n in [4usize, 5, 6, 7, 8, 9] {
            for k in [1usize, 2, 3, n] {
                if k > n {
                    continue;
                }
                for (fv, fe) in [(0.0, 0.0), (1.0, 0.9), (0.3, 0.6), (0.0, 1.0)] {
                    for (mode, cross) in [
                        (EndpointsMode::Given, CrossMode::None),
                        (EndpointsMode::Given, CrossMode::Chain),
                        (EndpointsMode::Free, CrossMode::None),
                        (EndpointsMode::Free, CrossMode::Matching),
                        (EndpointsMode::Free, CrossMode::Cycle),
                    ] {
                        let needs_pair = matches!(
                            cross,
                            CrossMode::Chain | CrossMode::Matching | CrossMode::Cycle
                        );
                        if needs_pair && k < 2 {
                            continue;
                        }
                        let params = GenParams {
                            n,
                            k,
                            frac_required_v: fv,
                            frac_required_e: fe,
                            endpoints_mode: mode,
                            cross_mode: cross,
                            coordinate_box: if seed % 3 == 0 { 40 } else { 1000 },
                        };
                        let inst = generate_random(&params, seed).unwrap();
                        assert_eq!(classify(&inst).status, Status::Feasible);
                        let sol = solve(&inst).unwrap_or_else(|e| {
                            panic!("solve failed n={n} k={k} {mode:?} {cross:?} seed={seed}: {e}")
                        });
                        let viol = check_tour(&inst, &sol.tour);
                        assert!(
                            viol.is_empty(),
                            "invalid n={n} k={k} {mode:?} {cross:?} seed={seed}: {viol:?}"
                        );
                        if n <= 8 {
                            let opt = exact_gcrp(&inst, &cfg).unwrap().opt_cost;
                            assert!(sol.tour.cost >= opt);
                            let (cn, cd) = sol.algorithm.ceiling();
                            assert!(
                                sol.tour.cost * cd <= cn * opt,
                                "ceiling n={n} k={k} {mode:?} {cross:?} seed={seed}"
                            );
                        }
                        total += 1;
                    }
                }
            }
        }
    }
    assert!(total > 4000, "grid unexpectedly small: {total}");
    println!("parameter grid: {total} instances clean");
}
