mod common;

use smd_core::ProblemId;

#[test]
fn component_signs() {
    for id in ProblemId::ALL {
        assert_eq!(common::component_sign_failures(id, 200, id.number() as u64), 0, "{id}");
    }
}

#[test]
fn smd6_valley_is_flat_for_the_follower() {
    let r = common::smd6_valley(1000, 3);
    assert!(r.max_lower_spread <= 1e-12, "{:e}", r.max_lower_spread);
    assert!(r.upper_varies);
    assert!(r.origin_minimal);
}
