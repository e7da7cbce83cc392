use kstab_core::exact::{int, rat, Rational};
use kstab_core::flag::builtin::*;
use kstab_core::flag::{chamber_sweep, s_curve, FlagCase};
use kstab_core::threefold::{FamilyClass, TripleForm};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cases() -> Vec<FlagCase> {
    vec![
        quadric_exceptional_curve(),
        quadric_diagonal(),
        exceptional_section(0).unwrap(),
        exceptional_section(2).unwrap(),
        hyperplane_line(),
        hyperplane_opposite_line(),
        hyperplane_conic(),
    ]
}

fn random_between(rng: &mut ChaCha8Rng, lo: &Rational, hi: &Rational) -> Rational {
    let k: i64 = rng.gen_range(1..1000);
    lo + (hi - lo) * rat(k, 1000)
}

fn sample_us(case: &FlagCase, rng: &mut ChaCha8Rng) -> Vec<Rational> {
    let mut us = Vec::new();
    for p in &case.table.pieces {
        us.push(p.lo.clone());
        for _ in 0..3 {
            us.push(random_between(rng, &p.lo, &p.hi));
        }
    }
    us
}

#[test]
fn interpolated_volumes_match_pointwise_zariski() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in cases() {
        let s = case.surface().clone();
        for u in sample_us(&case, &mut rng) {
            let slice = chamber_sweep(&case, &u).unwrap();
            for ch in &slice.chambers {
                for _ in 0..20 {
                    let v = random_between(&mut rng, &ch.v_lo, &ch.v_hi);
                    let d = case.restricted_class(&u, &v).unwrap();
                    let z = s.zariski(&d).unwrap();
                    assert_eq!(z.support(), ch.support, "{} at ({u}, {v})", case.name);
                    assert_eq!(
                        ch.vol_poly.eval(&v),
                        s.volume(&d).unwrap(),
                        "{} at ({u}, {v})",
                        case.name
                    );
                }
            }
        }
    }
}

#[test]
fn volumes_are_continuous_monotone_and_vanish_at_the_end() {
    let form = TripleForm::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in cases() {
        let s = case.surface().clone();
        for u in sample_us(&case, &mut rng) {
            let slice = chamber_sweep(&case, &u).unwrap();
            let Some(first) = slice.chambers.first() else {
                continue;
            };

            let piece = case.table.piece_at(&u).unwrap();
            let p = piece.positive.at(&u);
            let restricted = case.map.restrict(&p);
            let at_zero = first.vol_poly.eval(&int(0));
            assert_eq!(at_zero, s.self_intersection(&restricted).unwrap());
            let pp = FamilyClass::constant(&p);
            let s_class = FamilyClass::constant(&case.table.divisor);
            assert_eq!(at_zero, form.triple_poly(&pp, &pp, &s_class).coeff(0));

            for w in slice.chambers.windows(2) {
                assert_eq!(w[0].v_hi, w[1].v_lo);
                assert_eq!(
                    w[0].vol_poly.eval(&w[0].v_hi),
                    w[1].vol_poly.eval(&w[1].v_lo)
                );
            }
            for ch in &slice.chambers {
                assert!(ch.vol_poly.degree().unwrap_or(0) <= 2);
                let dv = ch.vol_poly.derivative();
                assert!(
                    dv.eval(&ch.v_lo) <= Rational::zero(),
                    "{} u = {u}",
                    case.name
                );
                assert!(
                    dv.eval(&ch.v_hi) <= Rational::zero(),
                    "{} u = {u}",
                    case.name
                );
            }
            let last = slice.chambers.last().unwrap();
            assert!(last.vol_poly.eval(&last.v_hi).is_zero());
            let beyond = &last.v_hi + rat(1, 1000);
            let d = case.restricted_class(&u, &beyond).unwrap();
            assert!(s.volume(&d).unwrap().is_zero());
        }
    }
}

#[test]
fn opposite_lines_have_equal_invariants() {
    let form = TripleForm::standard();
    let a = s_curve(&form, &hyperplane_line()).unwrap();
    let b = s_curve(&form, &hyperplane_opposite_line()).unwrap();
    assert_eq!(a.value, b.value);
    assert_eq!(a.pieces, b.pieces);
}

#[test]
fn effective_difference_lowers_the_invariant() {
    let form = TripleForm::standard();
    let line = s_curve(&form, &hyperplane_line()).unwrap().value;
    let s = hyperplane_line().surface().clone();
    for z in [[2, -1, -1, -1, -1], [1, -1, 0, 0, 0], [1, 0, -1, 0, 0]] {
        let mut c = hyperplane_line();
        c.z_class = s.class_from_ints(&z).unwrap();
        let diff = &c.z_class - &hyperplane_line().z_class;
        assert!(s.effective_cone_contains(&diff).unwrap());
        let value = s_curve(&form, &c).unwrap().value;
        assert!(value <= line, "{z:?}: {value}");
    }
}
