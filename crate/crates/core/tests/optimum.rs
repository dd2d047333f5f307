mod common;

use smd_core::ProblemId;

#[test]
fn known_optima_evaluate_to_printed_values() {
    for id in ProblemId::ALL {
        let (du, dl) = common::optimum_gap(id);
        assert!(du <= 1e-9 && dl <= 1e-9, "{id}: gaps {du:e} {dl:e}");
    }
}
