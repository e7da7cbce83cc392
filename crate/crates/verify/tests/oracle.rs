mod common;

use common::oracle::{q, Oracle, Q};
use kstab_verify::{run_case, Scenario, Status};

fn computed(s: &Scenario, id: &str) -> Q {
    let r = run_case(s, id, false).unwrap();
    assert_ne!(r.status, Status::Error, "{id}: {:?}", r.detail);
    kstab_verify::scenario::parse_exact(r.computed.as_deref().unwrap(), id).unwrap()
}

#[test]
fn divisor_invariants_match_direct_antiderivatives() {
    let s = Scenario::builtin();
    assert_eq!(Oracle::sx_hyperplane(), q(17, 30));
    assert_eq!(Oracle::sx_quadric(), q(43, 60));
    assert_eq!(Oracle::sx_exceptional(), q(161, 540));
    assert_eq!(computed(&s, "sx-h1"), Oracle::sx_hyperplane());
    assert_eq!(computed(&s, "sx-qtilde"), Oracle::sx_quadric());
    assert_eq!(computed(&s, "sx-e"), Oracle::sx_exceptional());
}

#[test]
fn line_invariants_match_hand_entered_chambers() {
    let s = Scenario::builtin();
    let (a, b) = Oracle::line_pieces();
    assert_eq!((a.clone(), b.clone()), (q(107, 120), q(13, 120)));
    assert_eq!(computed(&s, "prop-l12-piece0"), a);
    assert_eq!(computed(&s, "prop-l12-piece1"), b);
    assert_eq!(computed(&s, "prop-l12-total"), a + b);
}

#[test]
fn point_invariants_match_hand_entered_chambers() {
    let s = Scenario::builtin();
    let fz = Oracle::point_f_term();
    let it = Oracle::point_integral_term();
    assert_eq!(fz, q(1, 12));
    assert_eq!(it, q(11, 12));
    assert_eq!(computed(&s, "prop-point-fz"), fz);
    assert_eq!(computed(&s, "prop-point-total"), &fz + &it);
    assert_eq!(computed(&s, "prop-point-general-total"), it);
}

#[test]
fn conic_matches_hand_entered_volumes() {
    let s = Scenario::builtin();
    assert_eq!(Oracle::conic(), q(27, 40));
    assert_eq!(computed(&s, "prop-conic-h4-derived"), Oracle::conic());
}
