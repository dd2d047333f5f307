mod common;

use smd_core::ProblemId;

fn check(id: ProblemId) {
    let r = common::psi_oracle(id, 100, 7 + id.number() as u64);
    assert_eq!(r.tested, 100);
    assert!(r.worst_improvement <= 1e-4, "{id}: brute force beat the reference by {:e}", r.worst_improvement);
}

macro_rules! oracle_tests {
    ($($name:ident => $id:ident),* $(,)?) => {
        $(#[test] fn $name() { check(ProblemId::$id); })*
    };
}

oracle_tests! {
    smd1 => Smd1, smd2 => Smd2, smd3 => Smd3, smd4 => Smd4, smd5 => Smd5, smd6 => Smd6,
    smd7 => Smd7, smd8 => Smd8, smd9 => Smd9, smd10 => Smd10, smd11 => Smd11, smd12 => Smd12,
}
