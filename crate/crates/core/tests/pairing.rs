use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reclab::formal_groups::FormalGroupLaw;
use reclab::laurent_tower::{Tower, TowerDesc, TowerElement};
use reclab::local_field::{BaseElement, FieldDesc, EXACT};
use reclab::pairing::{
    admissible_witness, artin_hasse_classical, iwasawa_gen_higher, iwasawa_pairing, iwasawa_psi, plan_parameters,
    representing_series, FglMeta,
};
use reclab::series::{Series, Tail};
use reclab::symbols::MilnorSymbol;
use reclab::{Error, Field};

fn domain_unit(l: &Field, n: u32, rng: &mut ChaCha8Rng) -> BaseElement {
    let b = 2 * (l.p() as i64).pow(n - 1) + 1;
    let prec = 6 * n as i64 * l.e() + 16;
    BaseElement::one(l, EXACT).add(&BaseElement::random(l, rng, prec, b))
}

#[test]
fn artin_hasse_examples() {
    let l = FieldDesc::cyclotomic(3, 1).unwrap();
    let ten = BaseElement::from_int(&l, 10, EXACT);
    assert!(artin_hasse_classical(&ten, 1).unwrap().is_zero());
    let four = BaseElement::from_int(&l, 4, EXACT);
    assert!(matches!(artin_hasse_classical(&four, 1), Err(Error::DomainViolation(_))));
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let u = domain_unit(&l, 1, &mut rng);
        let cube = u.pow(3).unwrap();
        assert!(artin_hasse_classical(&cube, 1).unwrap().is_zero());
    }
}

#[test]
fn units_very_close_to_one_pair_to_zero() {
    let l = FieldDesc::cyclotomic(3, 1).unwrap();
    let pi = BaseElement::uniformizer(&l, EXACT);
    let u = BaseElement::one(&l, EXACT).add(&pi.pow(12).unwrap()).with_prec(28);
    let w = BaseElement::one(&l, EXACT).add(&pi).with_prec(28);
    assert!(artin_hasse_classical(&u, 1).unwrap().is_zero());
    assert!(iwasawa_pairing(&u, &w, 1, None).unwrap().is_zero());
}

#[test]
fn psi_examples() {
    let l = FieldDesc::cyclotomic(3, 1).unwrap();
    let zeta = BaseElement::zeta(&l, EXACT).unwrap();
    let q3 = l.subfield(0);
    let g = Series::from_ints(&q3, &[1, 1], Tail::Zero);
    let psi = iwasawa_psi(&zeta, 1, &g).unwrap();
    assert!(psi.eq_mod(&BaseElement::from_int(&l, -1, EXACT), psi.prec()));
    let pi = BaseElement::generator(&l, EXACT);
    let w = BaseElement::one(&l, EXACT).add(&pi.mul(&pi));
    let g2 = Series::from_ints(&q3, &[1, 0, 1], Tail::Zero);
    let psi2 = iwasawa_psi(&w, 1, &g2).unwrap();
    let expected = zeta.mul(&pi.mul_int(2)).mul(&w.with_prec(40).inv().unwrap()).neg();
    assert!(psi2.eq_mod(&expected, psi2.prec().min(expected.prec())));
    let wrong = Series::from_ints(&q3, &[1, 2], Tail::Zero);
    assert!(matches!(iwasawa_psi(&w, 1, &wrong), Err(Error::RepresentationMismatch(_))));
}

#[test]
fn iwasawa_agrees_with_artin_hasse() {
    for (p, n) in [(3u64, 1u32), (3, 2), (5, 1)] {
        let l = FieldDesc::cyclotomic(p, n).unwrap();
        let zeta = BaseElement::zeta(&l, EXACT).unwrap();
        let g = representing_series(&zeta).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(p * 10 + n as u64);
        let mut nonzero = 0;
        for _ in 0..10 {
            let u = domain_unit(&l, n, &mut rng);
            let a = artin_hasse_classical(&u, n).unwrap();
            let b = iwasawa_pairing(&u, &zeta, n, Some(&g)).unwrap();
            assert_eq!(a, b);
            nonzero += usize::from(!a.is_zero());
        }
        // for p = 3, n = 1 the domain lies in U^(pe/(p-1)), where (u, zeta) = 1
        assert_eq!(nonzero > 0, (p, n) != (3, 1), "p={p} n={n}");
    }
}

#[test]
fn plan_for_p3_n1() {
    let l = FieldDesc::cyclotomic(3, 1).unwrap();
    let tw = TowerDesc::new(&l, 1, 16).unwrap();
    let law = FormalGroupLaw::multiplicative(&l.subfield(0), 8, 30);
    let plan = plan_parameters(1, &tw, &FglMeta::from_law(&law)).unwrap();
    assert_eq!((plan.m, plan.k, plan.t), (3, 10, 22));
    assert!(plan.certified && plan.is_admissible());
    assert_eq!(admissible_witness(3, 7, 1), Some(3));
}

fn tower(l: &Field, vars: usize) -> Tower {
    TowerDesc::new(l, vars, 16).unwrap()
}

#[test]
fn one_dimensional_iwasawa_type_is_minus_the_classical_value() {
    let l = FieldDesc::cyclotomic(5, 1).unwrap();
    let tw = tower(&l, 0);
    let law = FormalGroupLaw::multiplicative(&l.subfield(0), 8, 30);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut nonzero = 0;
    for _ in 0..8 {
        let a = BaseElement::one(&l, EXACT).add(&BaseElement::random(&l, &mut rng, 30, 1));
        let x = BaseElement::random(&l, &mut rng, 30, 3);
        let u = BaseElement::one(&l, EXACT).add(&x);
        let sym = MilnorSymbol::new(&tw, vec![TowerElement::from_base(&tw, &a)]).unwrap();
        let q = iwasawa_gen_higher(&sym, &TowerElement::from_base(&tw, &x), 1, &law).unwrap();
        let c = iwasawa_pairing(&u, &a, 1, None).unwrap();
        assert_eq!(q, c.neg(), "a={a} x={x}");
        nonzero += usize::from(!q.is_zero());
    }
    assert!(nonzero > 0);
}

mod higher {
    use super::*;
    use reclab::formal_groups::fg_combine;
    use reclab::formal_groups::FgOp;
    use reclab::pairing::{artin_hasse_higher, kolyvagin_pairing, lubin_tate_wiles, AhVariant, PairingPlan};

    fn konst(tw: &Tower, a: &BaseElement) -> TowerElement {
        TowerElement::from_base(tw, a)
    }

    /// `x = sum c_i T^i` with `v(c_i) >= min_val + |i|`.
    fn sample_x(tw: &Tower, rng: &mut ChaCha8Rng, min_val: i64) -> TowerElement {
        let l = tw.base();
        let prec = 40;
        let mut x = TowerElement::zero(tw, prec);
        for i in -1..=1i64 {
            let c = BaseElement::random(l, rng, prec, min_val + i.abs());
            x = x.add(&TowerElement::monomial(tw, &c, vec![i]).unwrap());
        }
        x
    }

    /// A random element `c T^j (1 + y)` with a unique leading term.
    fn sample_entry(tw: &Tower, rng: &mut ChaCha8Rng) -> TowerElement {
        use rand::Rng;
        let l = tw.base();
        let c = BaseElement::random_unit(l, rng, 40).mul(&BaseElement::uniformizer(l, EXACT).pow(rng.gen_range(0..2)).unwrap());
        let lead = TowerElement::monomial(tw, &c, vec![rng.gen_range(-1..=1)]).unwrap();
        let y = TowerElement::random(tw, rng, 40, 1, 1);
        lead.mul(&TowerElement::one(tw).add(&y)).unwrap()
    }

    fn mult(l: &Field) -> FormalGroupLaw {
        FormalGroupLaw::multiplicative(&l.subfield(0), 8, 30)
    }

    #[test]
    fn root_of_unity_form_matches_iwasawa_type_on_t_zeta() {
        let l = FieldDesc::cyclotomic(3, 1).unwrap();
        let tw = tower(&l, 1);
        let law = mult(&l);
        let t = TowerElement::var(&tw, 1);
        let zeta = konst(&tw, &BaseElement::zeta(&l, EXACT).unwrap());
        let sym = MilnorSymbol::new(&tw, vec![t.clone(), zeta]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut nonzero = 0;
        for _ in 0..6 {
            let x = sample_x(&tw, &mut rng, 2);
            let a = artin_hasse_higher(&[t.clone()], &x, 1, &law, None, None, AhVariant::RootOfUnity).unwrap();
            let b = iwasawa_gen_higher(&sym, &x, 1, &law).unwrap();
            assert_eq!(a, b);
            nonzero += usize::from(!a.is_zero());
        }
        assert!(nonzero > 0);
    }

    #[test]
    fn torsion_point_form_matches_iwasawa_type() {
        let l = FieldDesc::cyclotomic(3, 1).unwrap();
        let tw = tower(&l, 1);
        let law = mult(&l);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let pi = TowerElement::uniformizer(&tw);
        for _ in 0..4 {
            let u = TowerElement::one(&tw).add(&TowerElement::random(&tw, &mut rng, 40, 1, 1));
            let sym = MilnorSymbol::new(&tw, vec![u.clone(), pi.clone()]).unwrap();
            let x = sample_x(&tw, &mut rng, 2);
            let a = artin_hasse_higher(&[u.clone()], &x, 1, &law, None, None, AhVariant::TorsionPoint).unwrap();
            let b = iwasawa_gen_higher(&sym, &x, 1, &law).unwrap();
            assert_eq!(a, b);
        }
        let c = konst(&tw, &BaseElement::from_int(&l, 4, EXACT));
        let x = sample_x(&tw, &mut rng, 1);
        assert!(artin_hasse_higher(&[c], &x, 1, &law, None, None, AhVariant::TorsionPoint).unwrap().is_zero());
    }

    #[test]
    fn iwasawa_type_axioms() {
        let l = FieldDesc::cyclotomic(3, 1).unwrap();
        let tw = tower(&l, 1);
        let law = mult(&l);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let one = TowerElement::one(&tw);
        for _ in 0..4 {
            let (a, b, c) = (sample_entry(&tw, &mut rng), sample_entry(&tw, &mut rng), sample_entry(&tw, &mut rng));
            let x = sample_x(&tw, &mut rng, 2);
            let y = sample_x(&tw, &mut rng, 2);
            let pair = |s: &MilnorSymbol, x: &TowerElement| iwasawa_gen_higher(s, x, 1, &law).unwrap();
            let sab = MilnorSymbol::new(&tw, vec![a.clone(), b.clone()]).unwrap();
            let scb = MilnorSymbol::new(&tw, vec![c.clone(), b.clone()]).unwrap();
            let sacb = MilnorSymbol::new(&tw, vec![a.mul(&c).unwrap(), b.clone()]).unwrap();
            assert_eq!(pair(&sacb, &x), pair(&sab, &x).add(&pair(&scb, &x)));
            assert_eq!(pair(&sab.product(&scb).unwrap(), &x), pair(&sacb, &x));
            let xy = fg_combine(&FgOp::Plus, &law, &x, Some(&y)).unwrap();
            assert_eq!(pair(&sab, &xy), pair(&sab, &x).add(&pair(&sab, &y)));
            let st = MilnorSymbol::new(&tw, vec![a.clone(), one.sub(&a)]).unwrap();
            assert!(pair(&st, &x).is_zero());
            let sk = MilnorSymbol::new(&tw, vec![a.clone(), a.neg()]).unwrap();
            assert!(pair(&sk, &x).is_zero());
            let fy = law.isogeny().unwrap().eval(&y).unwrap();
            assert!(pair(&sab, &fy).is_zero());
        }
    }

    #[test]
    fn wiles_and_kolyvagin_agree_and_kill_the_image_of_f() {
        let l2 = FieldDesc::cyclotomic_tower(3, 2).unwrap();
        let l = l2.subfield(1);
        let (tw, tw2) = (tower(&l, 1), tower(&l2, 1));
        let law = mult(&l);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let plan = PairingPlan::custom(1, &tw, &FglMeta::from_law(&law), 0, 2).unwrap();
        assert!(!plan.certified);
        let mut nonzero = 0;
        for _ in 0..4 {
            let sym = MilnorSymbol::new(&tw2, vec![sample_entry(&tw2, &mut rng), sample_entry(&tw2, &mut rng)]).unwrap();
            let x = sample_x(&tw, &mut rng, 1);
            let w = lubin_tate_wiles(&sym, &x, 2, 1, &law, None).unwrap();
            let k = kolyvagin_pairing(&sym, &x, &plan, &law, None, None).unwrap();
            assert_eq!(w, k);
            nonzero += usize::from(!w.is_zero());
            let y = sample_x(&tw, &mut rng, 1);
            let fy = law.isogeny().unwrap().eval(&y).unwrap();
            assert!(lubin_tate_wiles(&sym, &fy, 2, 1, &law, None).unwrap().is_zero());
        }
        assert!(nonzero > 0);
        assert!(matches!(lubin_tate_wiles(
            &MilnorSymbol::new(&tw, vec![TowerElement::var(&tw, 1), TowerElement::uniformizer(&tw)]).unwrap(),
            &sample_x(&tw, &mut rng, 1), 1, 1, &law, None),
            Err(Error::PlanInvalid(_))));
    }

    #[test]
    fn wiles_matches_the_pairing_of_the_norm() {
        for p in [3u64, 5] {
            let l2 = FieldDesc::cyclotomic_tower(p, 2).unwrap();
            let l = l2.subfield(1);
            let (tw, tw2) = (tower(&l, 0), tower(&l2, 0));
            let law = mult(&l);
            let mut rng = ChaCha8Rng::seed_from_u64(p);
            for _ in 0..4 {
                let a = BaseElement::one(&l2, EXACT).add(&BaseElement::random(&l2, &mut rng, 60, 1));
                let x = BaseElement::random(&l, &mut rng, 40, 3);
                let sym = MilnorSymbol::new(&tw2, vec![konst(&tw2, &a)]).unwrap();
                let w = lubin_tate_wiles(&sym, &konst(&tw, &x), 2, 1, &law, None).unwrap();
                let na = a.norm(&l).unwrap();
                let symn = MilnorSymbol::new(&tw, vec![konst(&tw, &na)]).unwrap();
                assert_eq!(w, iwasawa_gen_higher(&symn, &konst(&tw, &x), 1, &law).unwrap());
                if p == 5 {
                    let u = BaseElement::one(&l, EXACT).add(&x);
                    assert_eq!(w, iwasawa_pairing(&u, &na, 1, None).unwrap().neg());
                }
            }
        }
    }

    #[test]
    fn level_compatibility_of_wiles() {
        let l4 = FieldDesc::cyclotomic_tower(3, 4).unwrap();
        let l = l4.subfield(2);
        let (tw, tw4) = (tower(&l, 0), tower(&l4, 0));
        let law = mult(&l);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = BaseElement::one(&l4, EXACT).add(&BaseElement::random(&l4, &mut rng, 400, 1));
        let x = BaseElement::random(&l, &mut rng, 40, 1);
        let sym = MilnorSymbol::new(&tw4, vec![konst(&tw4, &a)]).unwrap();
        let w1 = lubin_tate_wiles(&sym, &konst(&tw, &x), 4, 1, &law, None).unwrap();
        let w2 = lubin_tate_wiles(&sym, &konst(&tw, &x), 4, 2, &law, None).unwrap();
        assert_eq!(w2.reduce_to(1).unwrap(), w1);
    }
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn classical_formulas_agree_and_are_additive(seed in any::<u64>(), n in 1u32..=2) {
            let l = FieldDesc::cyclotomic(5, n).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (u, v) = (domain_unit(&l, n, &mut rng), domain_unit(&l, n, &mut rng));
            let zeta = BaseElement::zeta(&l, EXACT).unwrap();
            let ah = artin_hasse_classical(&u, n).unwrap();
            prop_assert_eq!(&iwasawa_pairing(&u, &zeta, n, None).unwrap(), &ah);
            let sum = artin_hasse_classical(&u.mul(&v), n).unwrap();
            prop_assert_eq!(sum, ah.add(&artin_hasse_classical(&v, n).unwrap()));
        }

        #[test]
        fn reduction_of_values_is_compatible(c in 0i64..125, m in 1u32..=3) {
            let v = reclab::pairing::PairingValue::new(5, 3, vec![c.into()]);
            let r = v.reduce_to(m).unwrap();
            prop_assert_eq!(r.coords()[0].clone(), num_bigint::BigInt::from(c % 5i64.pow(m)));
            prop_assert_eq!(v.add(&v.neg()).is_zero(), true);
        }
    }
}
