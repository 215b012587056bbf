use num_bigint::BigInt;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reclab::laurent_tower::{Tower, TowerDesc, TowerElement};
use reclab::local_field::{BaseElement, FieldDesc, Step, StepKind, EXACT};
use reclab::symbols::{norm_special, symbol_new, symbol_product, MilnorSymbol};
use reclab::{Error, Field};

fn q9() -> Field {
    FieldDesc::new(3, vec![Step { kind: StepKind::Unramified, poly: vec![vec![BigInt::from(1)], vec![BigInt::from(0)], vec![BigInt::from(1)]] }])
        .unwrap()
}

fn tower(f: &Field) -> Tower {
    TowerDesc::new(f, 1, 24).unwrap()
}

fn konst(tw: &Tower, x: &BaseElement) -> TowerElement {
    TowerElement::from_base(tw, x)
}

#[test]
fn symbol_construction_and_relations() {
    let l = FieldDesc::cyclotomic(3, 1).unwrap();
    let tw = tower(&l);
    let t = TowerElement::var(&tw, 1);
    let pi = TowerElement::uniformizer(&tw);
    let s = symbol_new(&tw, vec![t.clone(), pi.clone()]).unwrap();
    assert!(!s.triviality().any());
    let one = TowerElement::one(&tw);
    let a = t.add(&pi);
    let st = symbol_new(&tw, vec![a.clone(), one.sub(&a)]).unwrap();
    assert!(st.triviality().steinberg);
    assert!(!st.triviality().skew);
    let sk = symbol_new(&tw, vec![a.clone(), a.neg()]).unwrap();
    assert!(sk.triviality().skew);
    assert!(sk.is_visibly_trivial());
    let z = TowerElement::zero(&tw, 30);
    assert!(matches!(symbol_new(&tw, vec![t.clone(), z]), Err(Error::ZeroEntry(1))));
    assert!(matches!(symbol_new(&tw, vec![t]), Err(Error::Config(_))));
}

#[test]
fn product_inverse_and_swap() {
    let l = FieldDesc::cyclotomic(3, 1).unwrap();
    let tw = tower(&l);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = TowerElement::random(&tw, &mut rng, 20, 0, 2);
    let b = TowerElement::random(&tw, &mut rng, 20, 0, 2);
    let s = symbol_new(&tw, vec![a.clone(), b.clone()]).unwrap();
    assert!(symbol_product(&s, &s.inverse()).unwrap().is_identity());
    let swapped = symbol_new(&tw, vec![b, a]).unwrap();
    assert!(s.product(&swapped).unwrap().normalized().is_identity());
    let sq = s.product(&s).unwrap();
    assert_eq!(sq.factors().len(), 1);
    assert_eq!(sq.factors()[0].exp, 2);
    let other = tower(&FieldDesc::cyclotomic(5, 1).unwrap());
    let t5 = TowerElement::var(&other, 1);
    let s5 = symbol_new(&other, vec![t5.clone(), t5]).unwrap();
    assert!(matches!(s.product(&s5), Err(Error::AmbientMismatch)));
}

#[test]
fn norm_of_symbols_in_the_smaller_field_multiplies_exponent() {
    let l = FieldDesc::cyclotomic(3, 1).unwrap();
    let q3 = FieldDesc::qp(3).unwrap();
    let (tl, tk) = (tower(&l), tower(&q3));
    let t = TowerElement::var(&tk, 1);
    let u = TowerElement::from_int(&tk, 4);
    let s = MilnorSymbol::new(&tk, vec![u, t]).unwrap();
    let up = s.embed(&tl).unwrap();
    let back = norm_special(&up, &tk).unwrap();
    assert_eq!(back.factors()[0].exp, 2);
    assert!(back.product(&s.pow(-2)).unwrap().is_identity());
}

#[test]
fn norm_of_quadratic_entry() {
    let l = q9();
    let q3 = FieldDesc::qp(3).unwrap();
    let (tl, tk) = (tower(&l), tower(&q3));
    let i = BaseElement::generator(&l, EXACT);
    let z = BaseElement::one(&l, EXACT).add(&i.mul_int(3));
    let s = symbol_new(&tl, vec![konst(&tl, &z), TowerElement::var(&tl, 1)]).unwrap();
    let n = norm_special(&s, &tk).unwrap();
    let f = &n.factors()[0];
    assert!(f.entries[0].eq_mod(&TowerElement::from_int(&tk, 10), 40));
    assert!(f.entries[1].eq_mod(&TowerElement::var(&tk, 1), 40));
    assert_eq!(f.exp, 1);
    let zz = symbol_new(&tl, vec![konst(&tl, &z), konst(&tl, &i)]).unwrap();
    assert!(matches!(norm_special(&zz, &tk), Err(Error::ShapeNotSupported(_))));
}

#[test]
fn norm_of_laurent_entry_and_entry_in_second_slot() {
    let l = FieldDesc::cyclotomic(3, 1).unwrap();
    let q3 = FieldDesc::qp(3).unwrap();
    let (tl, tk) = (tower(&l), tower(&q3));
    let zeta = BaseElement::zeta(&l, EXACT).unwrap();
    let a = TowerElement::one(&tl).add(&TowerElement::var(&tl, 1).scale(&zeta));
    let s = symbol_new(&tl, vec![TowerElement::from_int(&tl, 7), a]).unwrap();
    let n = s.norm_special(&tk).unwrap();
    let t = TowerElement::var(&tk, 1);
    let expected = TowerElement::one(&tk).sub(&t).add(&t.mul(&t).unwrap());
    assert!(n.factors()[0].entries[1].eq_mod(&expected, 40));
    assert!(n.factors()[0].entries[0].eq_mod(&TowerElement::from_int(&tk, 7), 40));
}

#[test]
fn norm_is_transitive_over_two_steps() {
    let l = FieldDesc::cyclotomic_tower(3, 2).unwrap();
    let mid = l.subfield(1);
    let q3 = l.subfield(0);
    let (tl, tm, tk) = (tower(&l), tower(&mid), tower(&q3));
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..3 {
        let x = BaseElement::random_unit(&l, &mut rng, 60);
        let a = konst(&tl, &x).add(&TowerElement::var(&tl, 1).scale(&BaseElement::random(&l, &mut rng, 60, 1)));
        let b = konst(&tl, &BaseElement::random_unit(&l, &mut rng, 60));
        let s = symbol_new(&tl, vec![a.clone(), TowerElement::var(&tl, 1)]).unwrap();
        let two = s.norm_special(&tm).unwrap().norm_special(&tk).unwrap();
        let one = s.norm_special(&tk).unwrap();
        let (x2, x1) = (&two.factors()[0].entries[0], &one.factors()[0].entries[0]);
        let prec = x1.prec().min(x2.prec());
        assert!(prec >= 8);
        assert!(x2.eq_mod(x1, prec), "{x2} vs {x1}");
        assert!(x1.constant_coeff().eq_mod(&x.norm(&q3).unwrap(), prec));
        let nab = a.mul(&b).unwrap().norm(&tk).unwrap();
        let nanb = a.norm(&tk).unwrap().mul(&b.norm(&tk).unwrap()).unwrap();
        assert!(nab.eq_mod(&nanb, nab.prec().min(nanb.prec())));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn detectors_match_arithmetic(seed in 0u64..1_000_000) {
        let l = FieldDesc::cyclotomic(3, 1).unwrap();
        let tw = tower(&l);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = TowerElement::random(&tw, &mut rng, 20, 0, 2);
        let b = TowerElement::random(&tw, &mut rng, 20, 0, 2);
        prop_assume!(!a.is_zero() && !b.is_zero());
        let one = TowerElement::one(&tw);
        let s = symbol_new(&tw, vec![a.clone(), b.clone()]).unwrap();
        let t = s.triviality();
        prop_assert_eq!(t.steinberg, a.add(&b).sub(&one).is_zero());
        prop_assert_eq!(t.skew, a.add(&b).is_zero());
        let c = one.sub(&a);
        prop_assume!(!c.is_zero());
        prop_assert!(symbol_new(&tw, vec![a.clone(), c]).unwrap().triviality().steinberg);
        prop_assert!(symbol_new(&tw, vec![a.neg(), a]).unwrap().triviality().skew);
    }
}
