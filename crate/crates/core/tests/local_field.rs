use num_bigint::BigInt;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use reclab::local_field::{BaseElement, FieldDesc, Step, StepKind};
use reclab::Error;

fn b(n: i64) -> BigInt {
    BigInt::from(n)
}

#[test]
fn integer_addition_carries() {
    let q3 = FieldDesc::qp(3).unwrap();
    let x = BaseElement::from_int(&q3, 1, 5).add(&BaseElement::from_int(&q3, 2, 5));
    assert!(x.eq_mod(&BaseElement::from_int(&q3, 3, 5), 5));
    assert_eq!(x.prec(), 5);
    assert_eq!(x.valuation().unwrap(), 1);
}

#[test]
fn inverse_of_one() {
    let f = FieldDesc::cyclotomic(3, 1).unwrap();
    let one = BaseElement::one(&f, 10);
    assert!(one.inv().unwrap().eq_mod(&one, 10));
}

#[test]
fn cyclotomic_polynomials() {
    let f = FieldDesc::cyclotomic(3, 1).unwrap();
    let poly: Vec<BigInt> = f.steps()[0].poly.iter().map(|c| c[0].clone()).collect();
    assert_eq!(poly, vec![b(3), b(3), b(1)]);
    assert_eq!(FieldDesc::cyclotomic(3, 2).unwrap().degree(), 6);
    assert_eq!(FieldDesc::cyclotomic_tower(3, 2).unwrap().degree(), 6);
    assert!(matches!(FieldDesc::cyclotomic(4, 1), Err(Error::InvalidPrime(4))));
    assert!(matches!(FieldDesc::cyclotomic(2, 1), Err(Error::InvalidPrime(2))));
}

#[test]
fn pi_squared_is_minus_three_times_unit() {
    let f = FieldDesc::cyclotomic(3, 1).unwrap();
    let pi = BaseElement::uniformizer(&f, 20);
    let sq = pi.mul(&pi);
    assert_eq!(sq.valuation().unwrap(), 2);
    assert_eq!(BaseElement::from_int(&f, 3, 20).valuation().unwrap(), 2);
    let u = sq.div(&BaseElement::from_int(&f, -3, 30)).unwrap();
    assert!(u.is_unit());
    // pi^2 = -3 - 3 pi, so the unit is 1 + pi
    assert!(u.eq_mod(&BaseElement::one(&f, 20).add(&pi), u.prec()));
}

#[test]
fn valuations() {
    let q5 = FieldDesc::qp(5).unwrap();
    assert_eq!(BaseElement::from_int(&q5, 5, 10).valuation().unwrap(), 1);
    let f = FieldDesc::cyclotomic(5, 1).unwrap();
    let zeta = BaseElement::zeta(&f, 20).unwrap();
    let one = BaseElement::one(&f, 20);
    assert_eq!(zeta.sub(&one).valuation().unwrap(), 1);
    let g = FieldDesc::cyclotomic(3, 1).unwrap();
    assert_eq!(BaseElement::from_int(&g, 9, 20).valuation().unwrap(), 4);
    assert!(matches!(
        BaseElement::zero(&g, 5).valuation(),
        Err(Error::PrecisionExhausted(_))
    ));
}

#[test]
fn trace_and_norm_examples() {
    let f = FieldDesc::cyclotomic(3, 1).unwrap();
    let q3 = FieldDesc::qp(3).unwrap();
    let (t, _) = BaseElement::from_int(&f, 9, 20).trace_norm(&q3).unwrap();
    assert!(t.eq_mod(&BaseElement::from_int(&q3, 18, 10), 8));
    let zeta = BaseElement::zeta(&f, 20).unwrap();
    let (t, n) = zeta.trace_norm(&q3).unwrap();
    assert!(t.eq_mod(&BaseElement::from_int(&q3, -1, 10), 8));
    assert!(n.eq_mod(&BaseElement::one(&q3, 10), 8));
    let pi = BaseElement::uniformizer(&f, 20);
    let n = pi.norm(&q3).unwrap();
    assert!(n.eq_mod(&BaseElement::from_int(&q3, 3, 10), 8));
    let other = FieldDesc::cyclotomic(5, 1).unwrap();
    assert!(matches!(pi.trace(&other), Err(Error::NotASubfield(_))));
}

#[test]
fn different_examples() {
    let f = FieldDesc::cyclotomic(3, 1).unwrap();
    let q3 = FieldDesc::qp(3).unwrap();
    assert_eq!(f.different_valuation(&q3).unwrap(), 1);
    assert_eq!(f.different_valuation(&f).unwrap(), 0);
    // unramified quadratic over Q_3: X^2 + 1
    let u = FieldDesc::new(
        3,
        vec![Step { kind: StepKind::Unramified, poly: vec![vec![b(1)], vec![b(0)], vec![b(1)]] }],
    )
    .unwrap();
    assert_eq!(u.different_valuation(&q3).unwrap(), 0);
    for p in [3u64, 5] {
        for m in 1..=2u32 {
            let l = FieldDesc::cyclotomic(p, m).unwrap();
            let qp = FieldDesc::qp(p).unwrap();
            let e = l.e();
            // v(D)/e = m - 1/(p-1)
            let lhs = l.different_valuation(&qp).unwrap() * (p as i64 - 1);
            assert_eq!(lhs, (m as i64 * (p as i64 - 1) - 1) * e);
            let t = FieldDesc::cyclotomic_tower(p, m).unwrap();
            assert_eq!(t.different_valuation(&qp).unwrap(), l.different_valuation(&qp).unwrap());
        }
    }
}

#[test]
fn invalid_towers_rejected() {
    // X^2 - 1 is reducible mod 3
    let r = FieldDesc::new(
        3,
        vec![Step { kind: StepKind::Unramified, poly: vec![vec![b(-1)], vec![b(0)], vec![b(1)]] }],
    );
    assert!(matches!(r, Err(Error::InvalidField(_))));
    // X^2 - 9 is not Eisenstein
    let r = FieldDesc::new(
        3,
        vec![Step { kind: StepKind::Eisenstein, poly: vec![vec![b(-9)], vec![b(0)], vec![b(1)]] }],
    );
    assert!(matches!(r, Err(Error::InvalidField(_))));
}

#[test]
fn galois_conjugate_sums() {
    // Tr(zeta^k) and N(zeta^k - 1) computed from conjugates zeta^{ak}
    for (p, n) in [(3u64, 1u32), (3, 2), (5, 1)] {
        let f = FieldDesc::cyclotomic(p, n).unwrap();
        let qp = FieldDesc::qp(p).unwrap();
        let prec = 8 * f.e();
        let zeta = BaseElement::zeta(&f, prec).unwrap();
        let pn = p.pow(n) as i64;
        for k in 1..pn {
            let x = zeta.pow(k).unwrap();
            let mut sum = BaseElement::zero(&f, prec);
            let mut prod = BaseElement::one(&f, prec);
            for a in 1..pn {
                if a % p as i64 != 0 {
                    let c = zeta.pow(a * k).unwrap();
                    sum = sum.add(&c);
                    prod = prod.mul(&c.add(&BaseElement::from_int(&f, 2, prec)));
                }
            }
            let t = x.trace(&qp).unwrap().embed(&f).unwrap();
            assert!(t.eq_mod(&sum, 4 * f.e()), "trace p={p} n={n} k={k}");
            let y = x.add(&BaseElement::from_int(&f, 2, prec));
            let nn = y.norm(&qp).unwrap().embed(&f).unwrap();
            assert!(nn.eq_mod(&prod, 4 * f.e()), "norm p={p} n={n} k={k}");
        }
    }
}

#[test]
fn tower_transitivity_of_trace_and_norm() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let t = FieldDesc::cyclotomic_tower(3, 2).unwrap();
    let mid = t.subfield(1);
    let q3 = t.subfield(0);
    for _ in 0..10 {
        let x = BaseElement::random(&t, &mut rng, 30, 0);
        let direct = x.trace(&q3).unwrap();
        let staged = x.trace(&mid).unwrap().trace(&q3).unwrap();
        assert!(direct.eq_mod(&staged, direct.prec().min(staged.prec())));
        let direct = x.norm(&q3).unwrap();
        let staged = x.norm(&mid).unwrap().norm(&q3).unwrap();
        let n = direct.prec().min(staged.prec());
        assert!(n >= 1 && direct.eq_mod(&staged, n));
    }
}

#[test]
fn flat_and_tower_cyclotomic_agree_on_norm() {
    let flat = FieldDesc::cyclotomic(3, 2).unwrap();
    let tower = FieldDesc::cyclotomic_tower(3, 2).unwrap();
    let q3 = FieldDesc::qp(3).unwrap();
    let a = BaseElement::uniformizer(&flat, 40).norm(&q3).unwrap();
    let b2 = BaseElement::uniformizer(&tower, 40).norm(&q3).unwrap();
    assert!(a.eq_mod(&BaseElement::from_int(&q3, 3, 10), 5));
    assert!(b2.eq_mod(&BaseElement::from_int(&q3, 3, 10), 5));
}

#[test]
fn unramified_over_ramified() {
    // Q_3(zeta_3)(sqrt(-1)) with X^2 + 1 over the cyclotomic level
    let base = FieldDesc::cyclotomic(3, 1).unwrap();
    let mut steps = base.steps().to_vec();
    let z = vec![b(0), b(0)];
    steps.push(Step { kind: StepKind::Unramified, poly: vec![vec![b(1), b(0)], z, vec![b(1), b(0)]] });
    let l = FieldDesc::new(3, steps).unwrap();
    assert_eq!(l.e(), 2);
    assert_eq!(l.f(), 2);
    let q3 = FieldDesc::qp(3).unwrap();
    assert_eq!(l.different_valuation(&q3).unwrap(), 1);
    let pi = BaseElement::uniformizer(&l, 20);
    assert_eq!(pi.valuation().unwrap(), 1);
    let n = pi.norm(&q3).unwrap();
    assert!(n.eq_mod(&BaseElement::from_int(&q3, 9, 10), 5));
    let i = BaseElement::generator(&l, 20);
    assert!(i.mul(&i).eq_mod(&BaseElement::from_int(&l, -1, 20), 20));
}

fn arb_pair() -> impl Strategy<Value = (u64, u64, i64)> {
    (any::<u64>(), any::<u64>(), 2i64..12)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn valuation_is_multiplicative((s1, s2, prec) in arb_pair()) {
        for (p, n) in [(3u64, 1u32), (5, 1), (3, 2)] {
            let f = FieldDesc::cyclotomic(p, n).unwrap();
            let mut r1 = ChaCha8Rng::seed_from_u64(s1);
            let mut r2 = ChaCha8Rng::seed_from_u64(s2);
            let x = BaseElement::random(&f, &mut r1, prec * f.e(), (s1 % 3) as i64);
            let y = BaseElement::random(&f, &mut r2, prec * f.e(), (s2 % 3) as i64);
            let xy = x.mul(&y);
            if let (Ok(vx), Ok(vy)) = (x.valuation(), y.valuation()) {
                if vx + vy < xy.prec() {
                    prop_assert_eq!(xy.valuation().unwrap(), vx + vy);
                }
            }
            let s = x.add(&y);
            if let Ok(vs) = s.valuation() {
                prop_assert!(vs >= x.val_or_prec().min(y.val_or_prec()));
            }
        }
    }

    #[test]
    fn inverse_roundtrip((s1, _s2, prec) in arb_pair()) {
        let f = FieldDesc::cyclotomic(3, 2).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(s1);
        let x = BaseElement::random(&f, &mut r, prec * f.e() + 10, (s1 % 4) as i64);
        if let Ok(v) = x.valuation() {
            let y = x.inv().unwrap();
            prop_assert_eq!(y.valuation().unwrap(), -v);
            let one = BaseElement::one(&f, 100);
            let z = x.mul(&y);
            prop_assert!(z.prec() >= 1);
            prop_assert!(z.eq_mod(&one, z.prec()));
        }
    }
}
