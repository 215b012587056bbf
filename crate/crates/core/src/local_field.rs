//! Finite extensions of `Q_p` given as towers of monogenic steps.
//!
//! Every step is either Eisenstein or unramified over the previous level, so
//! the product of the power bases is an integral basis and the valuation of
//! an element is read off its coordinates. Elements carry an absolute
//! precision `O(pi^N)` measured in the uniformizer of their own field.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{berkowitz_det, RingElem};

/// Kind of a single tower step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StepKind {
    Eisenstein,
    Unramified,
}

/// One monogenic step: a monic polynomial whose coefficients are exact
/// integral elements of the previous level, stored as flat coordinate vectors.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Step {
    pub kind: StepKind,
    pub poly: Vec<Vec<BigInt>>,
}

impl Step {
    pub fn degree(&self) -> usize {
        self.poly.len() - 1
    }
}

/// Description of a finite extension `L/Q_p` as a tower of steps, base-up.
pub struct FieldDesc {
    p: u64,
    pb: BigInt,
    steps: Vec<Step>,
    /// `dims[k]` is the degree over `Q_p` of the level-`k` field.
    dims: Vec<usize>,
    /// ramification index over `Q_p` of each level.
    ram: Vec<i64>,
    /// valuation (top units) of every flat basis element.
    basis_val: Vec<i64>,
    /// `Tr(theta^i)` for every step, as flat vectors of the previous level.
    power_sums: Vec<Vec<Vec<BigInt>>>,
    /// `v_{K_k}(g_k'(theta_k))` for every step.
    step_different: Vec<i64>,
    cyclotomic: Option<u32>,
    name: String,
    parent: Option<Arc<FieldDesc>>,
}

impl fmt::Debug for FieldDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldDesc")
            .field("p", &self.p)
            .field("degree", &self.degree())
            .field("e", &self.e())
            .field("f", &self.f())
            .field("cyclotomic", &self.cyclotomic)
            .finish()
    }
}

impl PartialEq for FieldDesc {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.steps == other.steps
    }
}
impl Eq for FieldDesc {}

pub type Field = Arc<FieldDesc>;

/// Precision used for exact constants.
pub const EXACT: i64 = i64::MAX / 8;

pub fn is_exact(prec: i64) -> bool {
    prec >= EXACT / 2
}

/// Apply `f` to a finite precision; exact precisions stay exact.
pub(crate) fn map_prec(prec: i64, f: impl FnOnce(i64) -> i64) -> i64 {
    if is_exact(prec) {
        EXACT
    } else {
        f(prec)
    }
}

pub(crate) fn ceil_div(a: i64, b: i64) -> i64 {
    a.div_euclid(b) + if a.rem_euclid(b) != 0 { 1 } else { 0 }
}

pub(crate) fn floor_div(a: i64, b: i64) -> i64 {
    a.div_euclid(b)
}

pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// p-adic valuation of a nonzero integer.
pub(crate) fn vp(x: &BigInt, p: &BigInt) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    let mut x = x.abs();
    let mut k = 0;
    loop {
        let (q, r) = x.div_rem(p);
        if !r.is_zero() {
            return Some(k);
        }
        x = q;
        k += 1;
    }
}

pub(crate) fn pow_big(p: &BigInt, k: i64) -> BigInt {
    debug_assert!(k >= 0);
    num_traits::pow(p.clone(), k as usize)
}

fn binomial(n: u64, k: u64) -> BigInt {
    let mut r = BigInt::one();
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

impl FieldDesc {
    /// `Q_p` itself.
    pub fn qp(p: u64) -> Result<Field> {
        Self::new(p, Vec::new())
    }

    /// Build a tower from its steps; validates every step.
    pub fn new(p: u64, steps: Vec<Step>) -> Result<Field> {
        if p < 3 || !is_prime(p) {
            return Err(Error::InvalidPrime(p));
        }
        let pb = BigInt::from(p);
        if steps.is_empty() {
            return Ok(Arc::new(FieldDesc {
                p,
                pb,
                steps,
                dims: vec![1],
                ram: vec![1],
                basis_val: vec![0],
                power_sums: Vec::new(),
                step_different: Vec::new(),
                cyclotomic: None,
                name: "p".into(),
                parent: None,
            }));
        }
        let parent = Self::new(p, steps[..steps.len() - 1].to_vec())?;
        let step = steps.last().unwrap().clone();
        parent.validate_step(&step)?;
        let r = step.degree();
        let blk = parent.degree();
        let e_step = match step.kind {
            StepKind::Eisenstein => r as i64,
            StepKind::Unramified => 1,
        };
        let mut dims = parent.dims.clone();
        dims.push(blk * r);
        let mut ram = parent.ram.clone();
        ram.push(parent.e() * e_step);
        let mut basis_val = Vec::with_capacity(blk * r);
        for i in 0..r {
            for b in 0..blk {
                let lower = parent.basis_val[b] * e_step;
                basis_val.push(lower + if step.kind == StepKind::Eisenstein { i as i64 } else { 0 });
            }
        }
        let power_sums = {
            let mut ps = parent.power_sums.clone();
            ps.push(parent.newton_power_sums(&step));
            ps
        };
        let mut out = FieldDesc {
            p,
            pb,
            steps,
            dims,
            ram,
            basis_val,
            power_sums,
            step_different: parent.step_different.clone(),
            cyclotomic: None,
            name: "pi".into(),
            parent: Some(parent),
        };
        // g'(theta) as a flat vector of the new level
        let mut deriv = vec![BigInt::zero(); blk * r];
        for i in 0..r {
            let c = BigInt::from((i + 1) as u64);
            for b in 0..blk {
                deriv[i * blk + b] = &step.poly[i + 1][b] * &c;
            }
        }
        let dv = out.raw_valuation(&deriv).ok_or_else(|| {
            Error::InvalidField("defining polynomial is inseparable".into())
        })?;
        out.step_different.push(dv);
        Ok(Arc::new(out))
    }

    fn validate_step(&self, step: &Step) -> Result<()> {
        let r = step.degree();
        if r < 1 {
            return Err(Error::InvalidField("step polynomial must have degree >= 1".into()));
        }
        let blk = self.degree();
        for c in &step.poly {
            if c.len() != blk {
                return Err(Error::InvalidField(format!(
                    "coefficient has {} coordinates, expected {}",
                    c.len(),
                    blk
                )));
            }
        }
        let lead = &step.poly[r];
        if !(lead[0].is_one() && lead[1..].iter().all(|x| x.is_zero())) {
            return Err(Error::InvalidField("step polynomial must be monic".into()));
        }
        match step.kind {
            StepKind::Eisenstein => {
                let v0 = self.raw_valuation(&step.poly[0]);
                if v0 != Some(1) {
                    return Err(Error::InvalidField(
                        "Eisenstein constant term must have valuation exactly 1".into(),
                    ));
                }
                for c in &step.poly[1..r] {
                    if let Some(v) = self.raw_valuation(c) {
                        if v < 1 {
                            return Err(Error::InvalidField(
                                "Eisenstein middle coefficients must lie in the maximal ideal"
                                    .into(),
                            ));
                        }
                    }
                }
            }
            StepKind::Unramified => {
                for c in &step.poly {
                    if self.raw_valuation(c).map(|v| v < 0).unwrap_or(false) {
                        return Err(Error::InvalidField("coefficients must be integral".into()));
                    }
                }
                if !self.irreducible_mod_pi(step) {
                    return Err(Error::InvalidField(
                        "unramified step must be irreducible modulo the uniformizer".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Rabin irreducibility test over the residue field of this level.
    fn irreducible_mod_pi(&self, step: &Step) -> bool {
        let this = Arc::new(self.shallow_clone());
        let r = step.degree();
        let g: Vec<BaseElement> = step
            .poly
            .iter()
            .map(|c| BaseElement::from_coords(&this, c.clone(), 0, 1))
            .collect();
        let q = self.residue_size();
        let x = vec![BaseElement::zero(&this, 1), BaseElement::one(&this, 1)];
        // x^(q^k) mod g
        let frob = |a: &Vec<BaseElement>| poly_powmod(a, &q, &g);
        let mut xp = x.clone();
        let mut powers = Vec::new();
        for _ in 0..r {
            xp = frob(&xp);
            powers.push(xp.clone());
        }
        // x^(q^r) == x
        let diff = poly_sub(&powers[r - 1], &x);
        if !poly_is_zero(&diff) {
            return false;
        }
        for k in 1..r {
            if r % k == 0 && is_prime((r / k) as u64) {
                let d = poly_sub(&powers[k - 1], &x);
                let gg = poly_gcd(&g, &d);
                if gg.len() > 1 {
                    return false;
                }
            }
        }
        true
    }

    fn shallow_clone(&self) -> FieldDesc {
        FieldDesc {
            p: self.p,
            pb: self.pb.clone(),
            steps: self.steps.clone(),
            dims: self.dims.clone(),
            ram: self.ram.clone(),
            basis_val: self.basis_val.clone(),
            power_sums: self.power_sums.clone(),
            step_different: self.step_different.clone(),
            cyclotomic: self.cyclotomic,
            name: self.name.clone(),
            parent: self.parent.clone(),
        }
    }

    fn newton_power_sums(&self, step: &Step) -> Vec<Vec<BigInt>> {
        let r = step.degree();
        let blk = self.degree();
        let lvl = self.levels();
        let mut s: Vec<Vec<BigInt>> = Vec::with_capacity(r);
        let mut s0 = vec![BigInt::zero(); blk];
        s0[0] = BigInt::from(r as u64);
        s.push(s0);
        for k in 1..r {
            let mut acc = vec![BigInt::zero(); blk];
            let kk = BigInt::from(k as u64);
            for b in 0..blk {
                acc[b] -= &step.poly[r - k][b] * &kk;
            }
            for i in 1..k {
                let prod = self.mul_level(lvl, &step.poly[r - i], &s[k - i], None);
                for b in 0..blk {
                    acc[b] -= &prod[b];
                }
            }
            s.push(acc);
        }
        s
    }

    /// Cyclotomic field `Q_p(zeta_{p^n})` as a single Eisenstein step with
    /// generator `zeta - 1`.
    pub fn cyclotomic(p: u64, n: u32) -> Result<Field> {
        if p < 3 || !is_prime(p) {
            return Err(Error::InvalidPrime(p));
        }
        if n == 0 {
            return Self::qp(p);
        }
        let poly = cyclotomic_shifted(p, n);
        let step = Step {
            kind: StepKind::Eisenstein,
            poly: poly.into_iter().map(|c| vec![c]).collect(),
        };
        let f = Self::new(p, vec![step])?;
        let mut inner = Arc::try_unwrap(f).unwrap_or_else(|a| a.shallow_clone());
        inner.cyclotomic = Some(n);
        inner.name = format!("zeta_{}^{}-1", p, n);
        Ok(Arc::new(inner))
    }

    /// `Q_p ⊂ Q_p(zeta_p) ⊂ … ⊂ Q_p(zeta_{p^n})`, one Eisenstein step per level.
    pub fn cyclotomic_tower(p: u64, n: u32) -> Result<Field> {
        let mut f = Self::cyclotomic(p, 1)?;
        for k in 2..=n {
            let blk = f.degree();
            // (1+X)^p - (1 + theta_{k-1}) = sum_{i>=1} C(p,i) X^i - theta_{k-1}
            let mut poly = Vec::with_capacity(p as usize + 1);
            let mut c0 = vec![BigInt::zero(); blk];
            c0[f.dims[f.levels() - 1]] = -BigInt::one();
            poly.push(c0);
            for i in 1..=p {
                let mut c = vec![BigInt::zero(); blk];
                c[0] = binomial(p, i);
                poly.push(c);
            }
            let mut steps = f.steps.clone();
            steps.push(Step { kind: StepKind::Eisenstein, poly });
            let g = Self::new(p, steps)?;
            let mut inner = Arc::try_unwrap(g).unwrap_or_else(|a| a.shallow_clone());
            inner.cyclotomic = Some(k);
            inner.name = format!("zeta_{}^{}-1", p, k);
            // keep the flagged lower level so that members know their level
            inner.parent = Some(f);
            f = Arc::new(inner);
        }
        Ok(f)
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn p_big(&self) -> &BigInt {
        &self.pb
    }
    pub fn steps(&self) -> &[Step] {
        &self.steps
    }
    pub fn levels(&self) -> usize {
        self.steps.len()
    }
    /// Degree over `Q_p`.
    pub fn degree(&self) -> usize {
        *self.dims.last().unwrap()
    }
    /// Ramification index over `Q_p`.
    pub fn e(&self) -> i64 {
        *self.ram.last().unwrap()
    }
    /// Inertia degree over `Q_p`.
    pub fn f(&self) -> i64 {
        self.degree() as i64 / self.e()
    }
    /// Size of the residue field.
    pub fn residue_size(&self) -> BigInt {
        num_traits::pow(self.pb.clone(), self.f() as usize)
    }
    pub fn cyclotomic_level(&self) -> Option<u32> {
        self.cyclotomic
    }
    pub fn uniformizer_name(&self) -> &str {
        &self.name
    }
    pub fn parent(&self) -> Option<&Field> {
        self.parent.as_ref()
    }
    pub fn basis_valuations(&self) -> &[i64] {
        &self.basis_val
    }

    /// The level-`k` member of the tower.
    pub fn subfield(self: &Field, k: usize) -> Field {
        let mut f = self.clone();
        while f.levels() > k {
            f = f.parent.clone().expect("level exists");
        }
        f
    }

    /// Level of `k` inside this tower, if `k` is a member.
    pub fn member_level(&self, k: &FieldDesc) -> Option<usize> {
        if k.p != self.p || k.levels() > self.levels() {
            return None;
        }
        if self.steps[..k.levels()] == k.steps[..] {
            Some(k.levels())
        } else {
            None
        }
    }

    /// Ramification index of this field over the member `k`.
    pub fn e_over(&self, k: &FieldDesc) -> Result<i64> {
        let lvl = self.member_level(k).ok_or_else(|| Error::NotASubfield(format!("{:?}", k)))?;
        Ok(self.e() / self.ram[lvl])
    }

    /// Degree over the member `k`.
    pub fn degree_over(&self, k: &FieldDesc) -> Result<usize> {
        let lvl = self.member_level(k).ok_or_else(|| Error::NotASubfield(format!("{:?}", k)))?;
        Ok(self.degree() / self.dims[lvl])
    }

    /// Valuation (top units) of a raw coordinate vector with shift zero.
    pub(crate) fn raw_valuation(&self, coords: &[BigInt]) -> Option<i64> {
        let e = self.e();
        coords
            .iter()
            .zip(&self.basis_val)
            .filter_map(|(c, bv)| vp(c, &self.pb).map(|v| e * v + bv))
            .min()
    }

    /// Multiply flat vectors of the level-`lvl` member, optionally reducing
    /// modulo `m`.
    pub(crate) fn mul_level(
        &self,
        lvl: usize,
        a: &[BigInt],
        b: &[BigInt],
        m: Option<&BigInt>,
    ) -> Vec<BigInt> {
        let reduce = |x: BigInt| -> BigInt {
            match m {
                Some(m) => x.mod_floor(m),
                None => x,
            }
        };
        if lvl == 0 {
            return vec![reduce(&a[0] * &b[0])];
        }
        let step = &self.steps[lvl - 1];
        let r = step.degree();
        let blk = self.dims[lvl - 1];
        if blk == 1 {
            let mut c = vec![BigInt::zero(); 2 * r - 1];
            for (i, ai) in a.iter().enumerate() {
                if ai.is_zero() {
                    continue;
                }
                for (j, bj) in b.iter().enumerate() {
                    if !bj.is_zero() {
                        c[i + j] += ai * bj;
                    }
                }
            }
            for k in (r..2 * r - 1).rev() {
                let top = std::mem::take(&mut c[k]);
                if top.is_zero() {
                    continue;
                }
                let top = reduce(top);
                for j in 0..r {
                    let g = &step.poly[j][0];
                    if !g.is_zero() {
                        c[k - r + j] -= &top * g;
                    }
                }
            }
            c.truncate(r);
            return c.into_iter().map(reduce).collect();
        }
        let mut c: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); blk]; 2 * r - 1];
        for i in 0..r {
            let ai = &a[i * blk..(i + 1) * blk];
            if ai.iter().all(|x| x.is_zero()) {
                continue;
            }
            for j in 0..r {
                let bj = &b[j * blk..(j + 1) * blk];
                if bj.iter().all(|x| x.is_zero()) {
                    continue;
                }
                let prod = self.mul_level(lvl - 1, ai, bj, m);
                for (t, v) in prod.into_iter().enumerate() {
                    c[i + j][t] += v;
                }
            }
        }
        for k in (r..2 * r - 1).rev() {
            let top: Vec<BigInt> = std::mem::take(&mut c[k]).into_iter().map(reduce).collect();
            if top.iter().all(|x| x.is_zero()) {
                continue;
            }
            for j in 0..r {
                if step.poly[j].iter().all(|x| x.is_zero()) {
                    continue;
                }
                let prod = self.mul_level(lvl - 1, &top, &step.poly[j], m);
                for (t, v) in prod.into_iter().enumerate() {
                    c[k - r + j][t] -= v;
                }
            }
        }
        c.truncate(r);
        c.into_iter().flatten().map(reduce).collect()
    }

    /// `v_L(D(L/K))` for a member `k`.
    pub fn different_valuation(&self, k: &FieldDesc) -> Result<i64> {
        let lvl = self.member_level(k).ok_or_else(|| Error::NotASubfield(format!("{:?}", k)))?;
        let mut total = 0;
        for s in lvl..self.levels() {
            // step s+1 lives at level s+1; scale its different to top units
            total += self.step_different[s] * (self.e() / self.ram[s + 1]);
        }
        Ok(total)
    }
}

/// Coefficients of `Phi_{p^n}(1+X)`, low degree first.
pub fn cyclotomic_shifted(p: u64, n: u32) -> Vec<BigInt> {
    let big = |k: u64| -> Vec<BigInt> { (0..=k).map(|i| binomial(k, i)).collect() };
    let step = p.pow(n - 1);
    let deg = (p - 1) * step;
    let mut out = vec![BigInt::zero(); deg as usize + 1];
    for j in 0..p {
        for (i, c) in big(j * step).into_iter().enumerate() {
            out[i] += c;
        }
    }
    out
}

/// An element of a finite extension with absolute precision.
#[derive(Clone)]
pub struct BaseElement {
    field: Field,
    coords: Vec<BigInt>,
    shift: i64,
    prec: i64,
}

impl fmt::Debug for BaseElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for BaseElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        if self.shift != 0 {
            write!(f, "p^{}*", self.shift)?;
        }
        write!(f, "[{}] + O(pi^{})", parts.join(", "), self.prec)
    }
}

impl BaseElement {
    /// Element `p^shift * sum coords[b] * basis[b]` known modulo `pi^prec`.
    pub fn from_coords(field: &Field, coords: Vec<BigInt>, shift: i64, prec: i64) -> Self {
        assert_eq!(coords.len(), field.degree(), "coordinate count");
        let mut x = BaseElement { field: field.clone(), coords, shift, prec };
        x.normalize();
        x
    }

    pub fn zero(field: &Field, prec: i64) -> Self {
        Self::from_coords(field, vec![BigInt::zero(); field.degree()], 0, prec)
    }

    pub fn one(field: &Field, prec: i64) -> Self {
        Self::from_int(field, 1, prec)
    }

    pub fn from_int(field: &Field, n: i64, prec: i64) -> Self {
        Self::from_bigint(field, &BigInt::from(n), prec)
    }

    pub fn from_bigint(field: &Field, n: &BigInt, prec: i64) -> Self {
        let mut c = vec![BigInt::zero(); field.degree()];
        c[0] = n.clone();
        Self::from_coords(field, c, 0, prec)
    }

    /// `num/den` as a `p`-adic number.
    pub fn from_ratio(field: &Field, num: i64, den: i64, prec: i64) -> Result<Self> {
        let d = Self::from_int(field, den, prec + 2 * field.e() * 64);
        let n = Self::from_int(field, num, prec + 2 * field.e() * 64);
        let mut q = n.mul(&d.inv()?);
        q.set_prec(prec);
        Ok(q)
    }

    /// Generator of the top step (the uniformizer when the top step is Eisenstein).
    pub fn generator(field: &Field, prec: i64) -> Self {
        if field.levels() == 0 {
            return Self::from_int(field, field.p as i64, prec);
        }
        let mut c = vec![BigInt::zero(); field.degree()];
        c[field.dims[field.levels() - 1]] = BigInt::one();
        Self::from_coords(field, c, 0, prec)
    }

    /// A uniformizer: the generator of the last Eisenstein step, or `p`.
    pub fn uniformizer(field: &Field, prec: i64) -> Self {
        for lvl in (1..=field.levels()).rev() {
            if field.steps[lvl - 1].kind == StepKind::Eisenstein {
                let sub = field.subfield(lvl);
                return Self::generator(&sub, prec).embed(field).expect("member");
            }
        }
        Self::from_int(field, field.p as i64, prec)
    }

    /// `zeta_{p^n}` in a cyclotomic field built by the cyclotomic builders.
    pub fn zeta(field: &Field, prec: i64) -> Result<Self> {
        if field.cyclotomic.is_none() {
            return Err(Error::TorsionMissing("field is not a cyclotomic field".into()));
        }
        Ok(Self::one(field, prec).add(&Self::generator(field, prec)))
    }

    pub fn field(&self) -> &Field {
        &self.field
    }
    pub fn prec(&self) -> i64 {
        self.prec
    }
    pub fn shift(&self) -> i64 {
        self.shift
    }
    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }

    /// Coordinates as exact rationals `p^shift * c`, useful for representing
    /// polynomials.
    pub fn scaled_coords(&self) -> (Vec<BigInt>, i64) {
        (self.coords.clone(), self.shift)
    }

    fn digits_needed(&self, b: usize) -> i64 {
        ceil_div(self.prec - self.field.basis_val[b], self.field.e()) - self.shift
    }

    fn normalize(&mut self) {
        let pb = self.field.pb.clone();
        if is_exact(self.prec) {
            self.prec = EXACT;
        }
        for b in 0..self.coords.len() {
            if self.prec == EXACT {
                break;
            }
            let m = self.digits_needed(b);
            if m <= 0 {
                self.coords[b] = BigInt::zero();
            } else {
                let md = pow_big(&pb, m);
                self.coords[b] = self.coords[b].mod_floor(&md);
            }
        }
        let g = self.coords.iter().filter_map(|c| vp(c, &pb)).min();
        match g {
            None => self.shift = 0,
            Some(0) => {}
            Some(g) => {
                let d = pow_big(&pb, g);
                for c in self.coords.iter_mut() {
                    *c = &*c / &d;
                }
                self.shift += g;
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    /// Valuation normalized by `v(pi_L) = 1`.
    pub fn valuation(&self) -> Result<i64> {
        let v = self.field.raw_valuation(&self.coords).ok_or_else(|| {
            Error::PrecisionExhausted(format!("element is zero modulo pi^{}", self.prec))
        })?;
        Ok(v + self.field.e() * self.shift)
    }

    /// Valuation, or the precision when the element is indistinguishable from zero.
    pub fn val_or_prec(&self) -> i64 {
        self.valuation().unwrap_or(self.prec)
    }

    pub fn is_unit(&self) -> bool {
        self.valuation().map(|v| v == 0).unwrap_or(false)
    }

    /// Lower the precision (never raises it).
    pub fn set_prec(&mut self, prec: i64) {
        if prec < self.prec {
            self.prec = prec;
            self.normalize();
        }
    }

    pub fn with_prec(&self, prec: i64) -> Self {
        let mut x = self.clone();
        x.set_prec(prec);
        x
    }

    /// Treat the stored representative as exact up to a larger precision.
    pub fn lift_prec(&self, prec: i64) -> Self {
        let mut x = self.clone();
        x.prec = prec;
        x.normalize();
        x
    }

    fn same_field(&self, o: &Self) -> bool {
        Arc::ptr_eq(&self.field, &o.field) || *self.field == *o.field
    }

    pub fn add(&self, o: &Self) -> Self {
        assert!(self.same_field(o), "field mismatch in add");
        let s = self.shift.min(o.shift);
        let pb = &self.field.pb;
        let sx = pow_big(pb, self.shift - s);
        let sy = pow_big(pb, o.shift - s);
        let coords = self
            .coords
            .iter()
            .zip(&o.coords)
            .map(|(a, b)| a * &sx + b * &sy)
            .collect();
        Self::from_coords(&self.field, coords, s, self.prec.min(o.prec))
    }

    pub fn neg(&self) -> Self {
        let coords = self.coords.iter().map(|c| -c).collect();
        Self::from_coords(&self.field, coords, self.shift, self.prec)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert!(self.same_field(o), "field mismatch in mul");
        let vx = self.val_or_prec();
        let vy = o.val_or_prec();
        let prec = (self.prec + vy).min(o.prec + vx);
        let shift = self.shift + o.shift;
        if self.is_zero() || o.is_zero() {
            return Self::zero(&self.field, prec);
        }
        let m = if is_exact(prec) {
            None
        } else {
            let digits = ceil_div(prec, self.field.e()) - shift;
            if digits <= 0 {
                return Self::zero(&self.field, prec);
            }
            Some(pow_big(&self.field.pb, digits))
        };
        let coords = self.field.mul_level(self.field.levels(), &self.coords, &o.coords, m.as_ref());
        Self::from_coords(&self.field, coords, shift, prec)
    }

    pub fn mul_int(&self, n: i64) -> Self {
        self.mul_bigint(&BigInt::from(n))
    }

    pub fn mul_bigint(&self, n: &BigInt) -> Self {
        let coords = self.coords.iter().map(|c| c * n).collect();
        let extra = vp(n, &self.field.pb).map(|v| v * self.field.e()).unwrap_or(0);
        Self::from_coords(&self.field, coords, self.shift, self.prec + extra)
    }

    /// Multiply by `p^k` (exact, shifts precision accordingly).
    pub fn mul_p_pow(&self, k: i64) -> Self {
        let mut x = self.clone();
        x.shift += k;
        x.prec = map_prec(x.prec, |n| n + k * self.field.e());
        x.normalize();
        x
    }

    /// `self / d` where an exact divisor is first given enough precision;
    /// `±p^k` divisors keep exactness.
    pub fn divide(&self, d: &Self) -> Result<Self> {
        if d.is_zero() {
            return Err(Error::NonInvertible);
        }
        let c = &d.coords;
        if c[0].abs().is_one() && c[1..].iter().all(|x| x.is_zero()) {
            let mut out = self.mul_p_pow(-d.shift);
            if c[0].is_negative() {
                out = out.neg();
            }
            return Ok(out);
        }
        if is_exact(d.prec) {
            if is_exact(self.prec) {
                return Err(Error::PrecisionExhausted(
                    "quotient of exact elements needs a finite precision".into(),
                ));
            }
            let vd = d.valuation()?;
            let dd = d.with_prec(self.prec + 3 * vd.abs() + 1);
            return Ok(self.mul(&dd.inv()?));
        }
        Ok(self.mul(&d.inv()?))
    }

    pub fn pow(&self, k: i64) -> Result<Self> {
        if k < 0 {
            return self.inv()?.pow(-k);
        }
        Ok(self.pow_u(&BigInt::from(k)))
    }

    pub fn pow_u(&self, k: &BigInt) -> Self {
        if k.is_zero() {
            return Self::one(&self.field, EXACT);
        }
        let mut result: Option<Self> = None;
        for i in (0..k.bits()).rev() {
            if let Some(r) = result.as_mut() {
                *r = r.mul(r);
            }
            if k.bit(i) {
                result = Some(match result {
                    Some(r) => r.mul(self),
                    None => self.clone(),
                });
            }
        }
        result.expect("k > 0")
    }

    /// Inverse; precision `N - 2 v(x)` (unchanged for units).
    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::NonInvertible);
        }
        if is_exact(self.prec) {
            return Err(Error::PrecisionExhausted(
                "inverse of an exact element needs a finite precision".into(),
            ));
        }
        let shift = self.shift;
        let mut y = self.clone();
        y.shift = 0;
        y.prec -= shift * self.field.e();
        let r = y.valuation()?;
        let inv_y = if r == 0 { y.inv_unit()? } else { y.inv_nonunit(r)? };
        Ok(inv_y.mul_p_pow(-shift))
    }

    fn inv_unit(&self) -> Result<Self> {
        let n = self.prec;
        if n <= 0 {
            return Err(Error::NonInvertible);
        }
        let q = self.field.residue_size();
        let one = Self::one(&self.field, n);
        let mut z = if q == BigInt::from(2u8) { one.clone() } else { self.pow_u(&(q - 2u8)) };
        z.set_prec(n);
        for _ in 0..128 {
            let err = one.sub(&self.mul(&z));
            if err.is_zero() || err.val_or_prec() >= n {
                z.set_prec(n);
                return Ok(z);
            }
            if err.val_or_prec() <= 0 {
                return Err(Error::NonInvertible);
            }
            z = z.mul(&one.add(&err));
        }
        Err(Error::NonConvergent("unit inversion".into()))
    }

    fn inv_nonunit(&self, r: i64) -> Result<Self> {
        let e = self.field.e();
        let k = e / r.gcd(&e);
        let j = k * r / e;
        let yk = self.pow_u(&BigInt::from(k));
        let mut u = yk.clone();
        u.shift -= j;
        u.prec -= j * e;
        let ui = u.inv_unit()?;
        let ykm1 = self.pow_u(&BigInt::from(k - 1));
        Ok(ykm1.mul(&ui).mul_p_pow(-j))
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        Ok(self.mul(&o.inv()?))
    }

    /// Equality modulo `pi^n`; false if either side is not known that far.
    pub fn eq_mod(&self, o: &Self, n: i64) -> bool {
        if self.prec < n || o.prec < n {
            return false;
        }
        let d = self.sub(o);
        d.is_zero() || d.val_or_prec() >= n
    }

    /// Embed into a field having this field as a member.
    pub fn embed(&self, to: &Field) -> Result<Self> {
        let lvl = to
            .member_level(&self.field)
            .ok_or_else(|| Error::NotASubfield("embedding target does not contain the field".into()))?;
        let _ = lvl;
        let e_rel = to.e() / self.field.e();
        let mut c = vec![BigInt::zero(); to.degree()];
        for (i, x) in self.coords.iter().enumerate() {
            c[i] = x.clone();
        }
        Ok(Self::from_coords(to, c, self.shift, map_prec(self.prec, |n| n * e_rel)))
    }

    /// Restrict to a member field; fails if the element does not lie in it.
    pub fn restrict(&self, to: &Field) -> Result<Self> {
        self.field
            .member_level(to)
            .ok_or_else(|| Error::NotASubfield("restriction target is not a member".into()))?;
        let d = to.degree();
        if self.coords[d..].iter().any(|c| !c.is_zero()) {
            return Err(Error::NotASubfield("element does not lie in the subfield".into()));
        }
        let e_rel = self.field.e() / to.e();
        Ok(Self::from_coords(to, self.coords[..d].to_vec(), self.shift, map_prec(self.prec, |n| ceil_div(n, e_rel))))
    }

    /// Coordinate block `i` of the top step, as an element of the previous level.
    pub fn block(&self, i: usize) -> Self {
        let lvl = self.field.levels();
        let parent = self.field.parent.clone().expect("non-trivial tower");
        let blk = self.field.dims[lvl - 1];
        let step = &self.field.steps[lvl - 1];
        let (e_step, off) = match step.kind {
            StepKind::Eisenstein => (step.degree() as i64, i as i64),
            StepKind::Unramified => (1, 0),
        };
        let prec = map_prec(self.prec, |n| ceil_div(n - off, e_step));
        Self::from_coords(&parent, self.coords[i * blk..(i + 1) * blk].to_vec(), self.shift, prec)
    }

    /// Assemble from coordinate blocks over the previous level.
    pub fn from_blocks(field: &Field, blocks: &[Self]) -> Self {
        let lvl = field.levels();
        let theta = Self::generator(field, EXACT);
        let mut acc = Self::zero(field, EXACT);
        let mut pw = Self::one(field, EXACT);
        for b in blocks {
            let be = b.embed(field).expect("previous level");
            acc = acc.add(&be.mul(&pw));
            pw = pw.mul(&theta);
        }
        let _ = lvl;
        acc
    }

    /// Trace of one step down, as an element of the previous level.
    fn step_trace(&self) -> Self {
        let lvl = self.field.levels();
        let parent = self.field.parent.clone().expect("non-trivial tower");
        let step = &self.field.steps[lvl - 1];
        let r = step.degree();
        let blk = self.field.dims[lvl - 1];
        let e_step = match step.kind {
            StepKind::Eisenstein => r as i64,
            StepKind::Unramified => 1,
        };
        let prec = map_prec(self.prec, |n| floor_div(n + self.field.step_different[lvl - 1], e_step));
        let digits = map_prec(prec, |n| ceil_div(n, parent.e()) - self.shift);
        let mut acc = vec![BigInt::zero(); blk];
        if digits > 0 {
            let m = (!is_exact(prec)).then(|| pow_big(&self.field.pb, digits));
            for i in 0..r {
                let xi = &self.coords[i * blk..(i + 1) * blk];
                let ps = &self.field.power_sums[lvl - 1][i];
                let prod = self.field.mul_level(lvl - 1, xi, ps, m.as_ref());
                for (t, v) in prod.into_iter().enumerate() {
                    acc[t] += v;
                }
            }
        }
        Self::from_coords(&parent, acc, self.shift, prec)
    }

    /// Norm of one step down via the multiplication matrix.
    fn step_norm(&self) -> Self {
        let lvl = self.field.levels();
        let r = self.field.steps[lvl - 1].degree();
        let theta = Self::generator(&self.field, EXACT);
        let mut cols = Vec::with_capacity(r);
        let mut cur = self.clone();
        for _ in 0..r {
            cols.push(cur.clone());
            cur = cur.mul(&theta);
        }
        let mat: Vec<Vec<Self>> = (0..r).map(|i| (0..r).map(|j| cols[j].block(i)).collect()).collect();
        berkowitz_det(&mat)
    }

    /// `(Tr_{L/K}(x), N_{L/K}(x))` for a member `K`.
    pub fn trace_norm(&self, down_to: &Field) -> Result<(Self, Self)> {
        Ok((self.trace(down_to)?, self.norm(down_to)?))
    }

    pub fn trace(&self, down_to: &Field) -> Result<Self> {
        let lvl = self
            .field
            .member_level(down_to)
            .ok_or_else(|| Error::NotASubfield("trace target is not a member".into()))?;
        let mut x = self.clone();
        while x.field.levels() > lvl {
            x = x.step_trace();
        }
        Ok(x)
    }

    pub fn norm(&self, down_to: &Field) -> Result<Self> {
        let lvl = self
            .field
            .member_level(down_to)
            .ok_or_else(|| Error::NotASubfield("norm target is not a member".into()))?;
        let mut x = self.clone();
        while x.field.levels() > lvl {
            x = x.step_norm();
        }
        Ok(x)
    }

    /// Reduction modulo the uniformizer, as a coordinate vector over `F_p`
    /// of the unit part (the element must be integral).
    pub fn residue(&self) -> Vec<u64> {
        let x = self.with_prec(1);
        let p = &self.field.pb;
        x.coords
            .iter()
            .map(|c| if x.shift == 0 { c.mod_floor(p).to_u64().unwrap() } else { 0 })
            .collect()
    }

    /// Base-`p` digit expansion of every coordinate (little-endian).
    pub fn digit_lists(&self) -> Vec<Vec<u64>> {
        let p = &self.field.pb;
        self.coords
            .iter()
            .map(|c| {
                let mut d = Vec::new();
                let mut x = c.clone();
                while !x.is_zero() {
                    let (q, r) = x.div_mod_floor(p);
                    d.push(r.to_u64().unwrap());
                    x = q;
                }
                d
            })
            .collect()
    }

    /// Random element with valuation at least `min_val`.
    pub fn random<R: Rng + ?Sized>(field: &Field, rng: &mut R, prec: i64, min_val: i64) -> Self {
        let p = field.p;
        let e = field.e();
        let coords = (0..field.degree())
            .map(|b| {
                let digits = (ceil_div(prec - field.basis_val[b], e)).max(0);
                let mut c = BigInt::zero();
                for _ in 0..digits {
                    c = c * p + rng.gen_range(0..p);
                }
                c
            })
            .collect();
        let x = Self::from_coords(field, coords, 0, prec);
        // multiply by a power of the uniformizer to reach the requested valuation
        if min_val <= 0 {
            return x;
        }
        let pi = Self::uniformizer(field, prec + min_val);
        let mut y = x.lift_prec(prec);
        for _ in 0..min_val {
            y = y.mul(&pi);
        }
        y.with_prec(prec)
    }

    /// Random unit.
    pub fn random_unit<R: Rng + ?Sized>(field: &Field, rng: &mut R, prec: i64) -> Self {
        loop {
            let x = Self::random(field, rng, prec, 0);
            if x.is_unit() {
                return x;
            }
        }
    }
}

impl RingElem for BaseElement {
    fn add(&self, o: &Self) -> Self {
        BaseElement::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        BaseElement::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        BaseElement::mul(self, o)
    }
    fn neg(&self) -> Self {
        BaseElement::neg(self)
    }
    fn zero_like(&self) -> Self {
        BaseElement::zero(&self.field, EXACT)
    }
    fn one_like(&self) -> Self {
        BaseElement::one(&self.field, EXACT)
    }
}

// --- small polynomial helpers over residue arithmetic (used by the
// irreducibility test) ---

fn poly_trim(a: &mut Vec<BaseElement>) {
    while a.len() > 1 && a.last().unwrap().is_zero() {
        a.pop();
    }
}

fn poly_is_zero(a: &[BaseElement]) -> bool {
    a.iter().all(|c| c.is_zero())
}

fn poly_sub(a: &[BaseElement], b: &[BaseElement]) -> Vec<BaseElement> {
    let n = a.len().max(b.len());
    let f = if !a.is_empty() { a[0].field.clone() } else { b[0].field.clone() };
    let z = BaseElement::zero(&f, 1);
    let mut out: Vec<BaseElement> =
        (0..n).map(|i| a.get(i).unwrap_or(&z).sub(b.get(i).unwrap_or(&z))).collect();
    poly_trim(&mut out);
    out
}

fn poly_mul(a: &[BaseElement], b: &[BaseElement]) -> Vec<BaseElement> {
    let f = a[0].field.clone();
    let mut out = vec![BaseElement::zero(&f, 1); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].add(&x.mul(y));
        }
    }
    out
}

fn poly_rem(a: &[BaseElement], m: &[BaseElement]) -> Vec<BaseElement> {
    let mut r = a.to_vec();
    poly_trim(&mut r);
    let mut m = m.to_vec();
    poly_trim(&mut m);
    let dm = m.len() - 1;
    let lead_inv = m[dm].inv().expect("nonzero leading coefficient");
    while r.len() > dm && !poly_is_zero(&r) {
        let k = r.len() - 1;
        let c = r[k].mul(&lead_inv);
        for j in 0..=dm {
            r[k - dm + j] = r[k - dm + j].sub(&c.mul(&m[j]));
        }
        r.pop();
        poly_trim(&mut r);
    }
    r
}

fn poly_powmod(a: &[BaseElement], e: &BigInt, m: &[BaseElement]) -> Vec<BaseElement> {
    let f = a[0].field.clone();
    let mut result = vec![BaseElement::one(&f, 1)];
    let base = poly_rem(a, m);
    for i in (0..e.bits()).rev() {
        result = poly_rem(&poly_mul(&result, &result), m);
        if e.bit(i) {
            result = poly_rem(&poly_mul(&result, &base), m);
        }
    }
    result
}

fn poly_gcd(a: &[BaseElement], b: &[BaseElement]) -> Vec<BaseElement> {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    poly_trim(&mut x);
    poly_trim(&mut y);
    while !poly_is_zero(&y) {
        let r = poly_rem(&x, &y);
        x = y;
        y = r;
    }
    x
}
