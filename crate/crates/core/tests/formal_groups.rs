use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reclab::formal_groups::{
    cyclotomic_isogeny, fg_combine, fg_digit_expansion, iterate_polynomial, norm_series, reassemble_digits,
    torsion_points, weierstrass_prep, FgOp, FormalGroupLaw,
};
use reclab::laurent_tower::{TowerDesc, TowerElement};
use reclab::local_field::{BaseElement, FieldDesc, EXACT};
use reclab::series::{MSeries, Series, Tail};
use reclab::{Error, Field};

fn c(f: &Field, n: i64) -> BaseElement {
    BaseElement::from_int(f, n, EXACT)
}

fn lt_3x_plus_x3(q3: &Field, dmax: u32) -> FormalGroupLaw {
    let f = Series::from_ints(q3, &[0, 3, 0, 1], Tail::Zero);
    FormalGroupLaw::lubin_tate(&f, &c(q3, 3), dmax, 12).unwrap()
}

#[test]
fn lubin_tate_of_cyclotomic_isogeny_is_multiplicative() {
    let q3 = FieldDesc::qp(3).unwrap();
    let f = cyclotomic_isogeny(&q3);
    let fgl = FormalGroupLaw::lubin_tate(&f, &c(&q3, 3), 8, 15).unwrap();
    let mult = FormalGroupLaw::multiplicative(&q3, 8, 15);
    assert!(fgl.law().eq_mod(mult.law(), 15));
    assert!(fgl.check_axioms());
}

#[test]
fn lubin_tate_starts_with_sum_and_satisfies_axioms() {
    let q3 = FieldDesc::qp(3).unwrap();
    let fgl = lt_3x_plus_x3(&q3, 9);
    assert!(fgl.coeff(1, 0).eq_mod(&c(&q3, 1), 12));
    assert!(fgl.coeff(0, 1).eq_mod(&c(&q3, 1), 12));
    assert!(fgl.coeff(1, 1).is_zero() || fgl.coeff(1, 1).val_or_prec() >= 12);
    assert!(fgl.check_axioms());
    assert!(fgl.check_functional_equation());
}

#[test]
fn lubin_tate_over_ramified_base() {
    let k = FieldDesc::cyclotomic(3, 1).unwrap();
    let pi = BaseElement::uniformizer(&k, EXACT);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut coeffs = vec![BaseElement::zero(&k, EXACT), pi.clone()];
    coeffs.push(BaseElement::random(&k, &mut rng, 14, 1));
    coeffs.push(BaseElement::one(&k, EXACT).add(&BaseElement::random(&k, &mut rng, 14, 1)));
    coeffs.push(BaseElement::random(&k, &mut rng, 14, 1));
    let f = Series::new(&k, coeffs, Tail::Zero);
    let fgl = FormalGroupLaw::lubin_tate(&f, &pi, 7, 10).unwrap();
    assert!(fgl.check_axioms());
    assert!(fgl.check_functional_equation());
}

#[test]
fn lubin_tate_rejects_bad_series() {
    let q3 = FieldDesc::qp(3).unwrap();
    let f = Series::from_ints(&q3, &[0, 3, 0, 2], Tail::Zero);
    assert!(matches!(FormalGroupLaw::lubin_tate(&f, &c(&q3, 3), 6, 10), Err(Error::NotLubinTate(_))));
    let f = Series::from_ints(&q3, &[0, 3, 1, 1], Tail::Zero);
    assert!(matches!(FormalGroupLaw::lubin_tate(&f, &c(&q3, 3), 6, 10), Err(Error::NotLubinTate(_))));
    let f = Series::from_ints(&q3, &[0, 6, 0, 1], Tail::Zero);
    assert!(matches!(FormalGroupLaw::lubin_tate(&f, &c(&q3, 3), 6, 10), Err(Error::NotLubinTate(_))));
}

#[test]
fn logarithm_closed_forms() {
    let q3 = FieldDesc::qp(3).unwrap();
    let mult = FormalGroupLaw::multiplicative(&q3, 10, 20);
    let l = mult.formal_log().unwrap();
    for k in 1..=10i64 {
        let expect = BaseElement::from_ratio(&q3, if k % 2 == 1 { 1 } else { -1 }, k, 15).unwrap();
        assert!(l.coeff(k as usize).eq_mod(&expect, 15), "degree {}", k);
    }
    let add = FormalGroupLaw::additive(&q3, 10, 20);
    let la = add.formal_log().unwrap();
    assert!(la.coeff(1).eq_mod(&c(&q3, 1), 20));
    assert!((2..=la.deg()).all(|k| la.coeff(k).is_zero()));
    // the generic integral agrees with the recursion for a Lubin-Tate law
    let lt = lt_3x_plus_x3(&q3, 9);
    let custom = FormalGroupLaw::custom(lt.law().clone(), 12).unwrap();
    let l1 = lt.log_series(9).unwrap();
    let l2 = custom.log_series(9).unwrap();
    assert!(l1.eq_mod(&l2, 8, 9));
}

#[test]
fn log_is_additive_and_exp_inverts() {
    let q3 = FieldDesc::qp(3).unwrap();
    for fgl in [lt_3x_plus_x3(&q3, 9), FormalGroupLaw::multiplicative(&q3, 9, 12)] {
        let l = fgl.formal_log().unwrap();
        let d = fgl.dmax();
        let lx = MSeries::from_uni(&l, 2, d, 0);
        let ly = MSeries::from_uni(&l, 2, d, 1);
        let lhs = MSeries::compose_outer(&l, fgl.law()).unwrap();
        // denominators up to 1/9 cost two digits
        assert!(lhs.eq_mod(&lx.add(&ly), 8));
        let e = fgl.formal_exp().unwrap();
        let id = e.compose(&l).unwrap();
        assert!(id.eq_mod(&Series::x(&q3, d as usize), 8, d as usize));
    }
}

#[test]
fn log_preserves_valuation_on_deep_ideal() {
    let l_field = FieldDesc::cyclotomic(3, 2).unwrap();
    let q3 = FieldDesc::qp(3).unwrap();
    let fgl = FormalGroupLaw::multiplicative(&q3, 12, 20);
    let l = fgl.log_series(40).unwrap();
    let bound = l_field.e() / 2 + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..40 {
        let x = BaseElement::random(&l_field, &mut rng, 24, bound);
        if x.is_zero() {
            continue;
        }
        let lx = l.eval(&x).unwrap();
        assert_eq!(lx.valuation().unwrap(), x.valuation().unwrap());
    }
}

#[test]
fn endomorphisms_compose() {
    let q3 = FieldDesc::qp(3).unwrap();
    let fgl = lt_3x_plus_x3(&q3, 8);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..3 {
        let a = BaseElement::random(&q3, &mut rng, 12, 0);
        let b = BaseElement::random(&q3, &mut rng, 12, 0);
        let fa = fgl.endo_series(&a, 8).unwrap();
        let fb = fgl.endo_series(&b, 8).unwrap();
        let fab = fgl.endo_series(&a.mul(&b), 8).unwrap();
        assert!(fa.compose(&fb).unwrap().eq_mod(&fab, 10, 8));
    }
    let f = fgl.endo_series(&c(&q3, 3), 6).unwrap();
    assert!(f.eq_mod(fgl.isogeny().unwrap(), 10, 3));
}

#[test]
fn combine_identities_on_tower_elements() {
    let k = FieldDesc::cyclotomic(3, 1).unwrap();
    let q3 = FieldDesc::qp(3).unwrap();
    let tw = TowerDesc::new(&k, 1, 64).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let fgl = FormalGroupLaw::multiplicative(&q3, 12, 20);
    let l = fgl.log_series(30).unwrap();
    let bound = tw.mu1_bound().max(2);
    for _ in 0..8 {
        let x = TowerElement::random(&tw, &mut rng, 12, bound, 2);
        let y = TowerElement::random(&tw, &mut rng, 12, bound, 2);
        let zero = TowerElement::zero(&tw, EXACT);
        let x0 = fg_combine(&FgOp::Plus, &fgl, &x, Some(&zero)).unwrap();
        assert!(x0.eq_mod(&x, 12));
        let xx = fg_combine(&FgOp::Minus, &fgl, &x, Some(&x)).unwrap();
        assert!(xx.is_zero());
        let s = fg_combine(&FgOp::Plus, &fgl, &x, Some(&y)).unwrap();
        let lhs = l.eval(&s).unwrap();
        let rhs = l.eval(&x).unwrap().add(&l.eval(&y).unwrap());
        assert!(lhs.eq_mod(&rhs, 10));
    }
    let unit = TowerElement::one(&tw);
    assert!(matches!(fg_combine(&FgOp::Plus, &fgl, &unit, Some(&unit)), Err(Error::NotInMaximalIdeal)));
}

#[test]
fn endomorphism_of_multiplicative_law_is_power() {
    let k = FieldDesc::cyclotomic(3, 1).unwrap();
    let q3 = FieldDesc::qp(3).unwrap();
    let fgl = FormalGroupLaw::multiplicative(&q3, 12, 20);
    let x = BaseElement::uniformizer(&k, 16).mul(&BaseElement::from_int(&k, 2, 16));
    let y = fg_combine(&FgOp::Endo(c(&q3, 5)), &fgl, &x, None).unwrap();
    let one = BaseElement::one(&k, EXACT);
    let expect = one.add(&x).pow(5).unwrap().sub(&one);
    assert!(y.eq_mod(&expect, 16));
}

#[test]
fn weierstrass_examples() {
    let q3 = FieldDesc::qp(3).unwrap();
    let g = Series::from_ints(&q3, &[0, 3, 1], Tail::Zero);
    let (p, u) = weierstrass_prep(&g).unwrap();
    assert_eq!(p.deg(), 2);
    assert!(p.eq_mod(&g, 30, 2));
    assert!(u.coeff(0).eq_mod(&c(&q3, 1), 30));
    assert!((1..=u.deg()).all(|i| u.coeff(i).is_zero()));

    let f = cyclotomic_isogeny(&q3);
    let (p, u) = weierstrass_prep(&f).unwrap();
    assert_eq!(p.deg(), 3);
    assert!(p.eq_mod(&f, 30, 3));
    assert!(u.coeff(0).eq_mod(&c(&q3, 1), 30));

    let g = Series::from_ints(&q3, &[3, 9, 6], Tail::Zero);
    assert!(matches!(weierstrass_prep(&g), Err(Error::AllCoefficientsNonUnit(2))));
}

#[test]
fn weierstrass_round_trip() {
    let k = FieldDesc::cyclotomic(3, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..6 {
        let mut coeffs: Vec<BaseElement> = (0..3).map(|_| BaseElement::random(&k, &mut rng, 12, 1)).collect();
        coeffs.push(BaseElement::random_unit(&k, &mut rng, 12));
        for _ in 0..8 {
            coeffs.push(BaseElement::random(&k, &mut rng, 12, 0));
        }
        let g = Series::new(&k, coeffs, Tail::Integral);
        let (p, u) = weierstrass_prep(&g).unwrap();
        assert_eq!(p.deg(), 3);
        assert!((0..3).all(|i| p.coeff(i).val_or_prec() >= 1));
        assert!(u.coeff(0).is_unit());
        // the unit is known to degree deg(g) - deg(P)
        let back = p.mul_trunc(&u, u.deg());
        assert!(back.eq_mod(&g, 10, u.deg()));
    }
}

#[test]
fn cyclotomic_torsion_points() {
    let q3 = FieldDesc::qp(3).unwrap();
    let fgl = FormalGroupLaw::multiplicative(&q3, 8, 20);
    for n in 1..=2u32 {
        let amb = FieldDesc::cyclotomic(3, n).unwrap();
        let t = torsion_points(&fgl, n, &amb, None).unwrap();
        let zeta = BaseElement::zeta(&amb, EXACT).unwrap();
        assert!(t.points()[0].eq_mod(&zeta.sub(&c(&amb, 1)), 40));
        assert!(t.verify().unwrap());
        let fn1 = iterate_polynomial(&cyclotomic_isogeny(&q3), n - 1).unwrap().embed(&amb).unwrap();
        let mut acc = BaseElement::zero(&amb, EXACT);
        for co in fn1.coeffs().iter().rev() {
            acc = acc.mul(&t.points()[0]).add(co);
        }
        // zeta_p - 1 generates the maximal ideal of Q_3(zeta_3)
        assert_eq!(acc.valuation().unwrap(), amb.e() / 2);
    }
    let amb = FieldDesc::cyclotomic(3, 2).unwrap();
    let e2 = torsion_points(&fgl, 2, &amb, None).unwrap().points()[0].clone();
    let e1 = torsion_points(&fgl, 1, &amb, None).unwrap().points()[0].clone();
    let f = cyclotomic_isogeny(&q3);
    assert!(f.eval(&e2.with_prec(30)).unwrap().eq_mod(&e1, 30));
    let small = FieldDesc::cyclotomic(3, 1).unwrap();
    assert!(matches!(torsion_points(&fgl, 2, &small, None), Err(Error::AmbientTooSmall(_))));
}

#[test]
fn torsion_by_newton_refinement() {
    let q3 = FieldDesc::qp(3).unwrap();
    let fgl = lt_3x_plus_x3(&q3, 6);
    let amb = FieldDesc::cyclotomic(3, 1).unwrap();
    let zeta = BaseElement::zeta(&amb, EXACT).unwrap();
    // sqrt(-3) = 1 + 2 zeta, perturbed
    let noise = BaseElement::uniformizer(&amb, EXACT).pow(3).unwrap();
    let seed = c(&amb, 1).add(&zeta.mul_int(2)).add(&noise).with_prec(20);
    let t = torsion_points(&fgl, 1, &amb, Some(&seed)).unwrap();
    let e = &t.points()[0];
    assert!(e.mul(e).eq_mod(&c(&amb, -3), 20));
    assert!(matches!(torsion_points(&fgl, 1, &amb, None), Err(Error::AmbientTooSmall(_))));
    let bad = c(&amb, 3).with_prec(20);
    assert!(torsion_points(&fgl, 1, &amb, Some(&bad)).is_err());
}

#[test]
fn norm_series_of_identity() {
    let q3 = FieldDesc::qp(3).unwrap();
    let fgl = FormalGroupLaw::multiplicative(&q3, 8, 20);
    let amb = FieldDesc::cyclotomic(3, 1).unwrap();
    let t = torsion_points(&fgl, 1, &amb, None).unwrap();
    let g = Series::x(&q3, 1).with_tail(Tail::Zero);
    let (r, d) = norm_series(&g, &fgl, &t).unwrap();
    assert!(r.eq_mod(&Series::x(&q3, 1), 30, 1));
    assert!(d.eq_mod(&c(&q3, 1), 30));
}

#[test]
fn norm_series_product_formula() {
    let q3 = FieldDesc::qp(3).unwrap();
    let fgl = FormalGroupLaw::multiplicative(&q3, 8, 20);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for n in 1..=2u32 {
        let amb = FieldDesc::cyclotomic(3, n).unwrap();
        let t = torsion_points(&fgl, n, &amb, None).unwrap();
        for _ in 0..3 {
            let mut coeffs = vec![BaseElement::zero(&q3, EXACT), BaseElement::random_unit(&q3, &mut rng, 20)];
            coeffs.push(BaseElement::random(&q3, &mut rng, 20, 0));
            coeffs.push(BaseElement::random(&q3, &mut rng, 20, 0));
            let g = Series::new(&q3, coeffs, Tail::Zero);
            let (r, d) = norm_series(&g, &fgl, &t).unwrap();
            assert_eq!(r.deg(), 3);
            assert!(d.is_unit());
        }
    }
    let lt = lt_3x_plus_x3(&q3, 6);
    let amb = FieldDesc::cyclotomic(3, 1).unwrap();
    let t = torsion_points(&fgl, 1, &amb, None).unwrap();
    let g = Series::x(&q3, 1).with_tail(Tail::Zero);
    assert!(matches!(norm_series(&g, &lt, &t), Err(Error::Unsupported(_))));
}

#[test]
fn digit_expansion_examples() {
    let q3 = FieldDesc::qp(3).unwrap();
    let k = FieldDesc::cyclotomic(3, 1).unwrap();
    let tw = TowerDesc::new(&k, 1, 64).unwrap();
    let fgl = FormalGroupLaw::multiplicative(&q3, 12, 12);
    let pi = TowerElement::uniformizer(&tw).with_prec(12);
    let d = fg_digit_expansion(&pi, &fgl, 1).unwrap();
    assert_eq!(d.len(), 1);
    assert_eq!(d[0].index, vec![0]);
    assert_eq!(d[0].k, 1);
    assert!(d[0].gamma.eq_mod(&TowerElement::one(&tw), 12));

    let y = TowerElement::var(&tw, 1).mul(&pi).unwrap();
    let d = fg_digit_expansion(&y, &fgl, 1).unwrap();
    let first = d.iter().find(|x| x.k == 1).unwrap();
    assert_eq!(first.index, vec![1]);
    let g3 = first.gamma.pow(3).unwrap();
    assert!(g3.sub(&TowerElement::one(&tw)).val_or_prec() >= 1);
}

#[test]
fn digit_expansion_round_trip() {
    let q3 = FieldDesc::qp(3).unwrap();
    let k = FieldDesc::cyclotomic(3, 1).unwrap();
    let tw = TowerDesc::new(&k, 1, 64).unwrap();
    let fgl = FormalGroupLaw::multiplicative(&q3, 12, 10);
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..3 {
        let y = TowerElement::random(&tw, &mut rng, 8, 1, 1);
        let d = fg_digit_expansion(&y, &fgl, 1).unwrap();
        let back = reassemble_digits(&d, &fgl, 1, &tw, 8).unwrap();
        assert!(back.eq_mod(&y, 8));
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn inverse_series_cancels(seed in 0u64..1000) {
        let q3 = FieldDesc::qp(3).unwrap();
        let k = FieldDesc::cyclotomic(3, 1).unwrap();
        let fgl = lt_3x_plus_x3(&q3, 9);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = BaseElement::random(&k, &mut rng, 9, 2);
        let y = BaseElement::random(&k, &mut rng, 9, 2);
        let s = fg_combine(&FgOp::Plus, &fgl, &x, Some(&y)).unwrap();
        let back = fg_combine(&FgOp::Minus, &fgl, &s, Some(&y)).unwrap();
        prop_assert!(back.eq_mod(&x, back.prec().min(9)));
    }

    #[test]
    fn combine_is_commutative(seed in 0u64..1000) {
        let q3 = FieldDesc::qp(3).unwrap();
        let k = FieldDesc::cyclotomic(3, 1).unwrap();
        let fgl = lt_3x_plus_x3(&q3, 9);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = BaseElement::random(&k, &mut rng, 9, 1);
        let y = BaseElement::random(&k, &mut rng, 9, 1);
        let a = fg_combine(&FgOp::Plus, &fgl, &x, Some(&y)).unwrap();
        let b = fg_combine(&FgOp::Plus, &fgl, &y, Some(&x)).unwrap();
        prop_assert!(a.eq_mod(&b, a.prec().min(b.prec())));
    }
}
