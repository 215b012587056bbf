//! Brute-force Hilbert symbol triviality for `L = Q_p(zeta_p)` and `n = 1`.
//!
//! `L*/(L*)^p` is an `F_p`-vector space of dimension `[L:Q_p] + 2` with basis
//! the uniformizer `pi` and the principal units `1 + pi^j`, `1 <= j <= p`.
//! The Teichmuller part is a `p`-th power and drops out, and `U^(p+1)`
//! consists of `p`-th powers, so a class is read off from `x` modulo
//! `pi^(v(x) + p + 1)`.
//!
//! The norm group of `L(b^(1/p))/L` is found by norming random elements of
//! `L[X]/(X^p - b)` with a division-free determinant and row reducing the
//! resulting class vectors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::berkowitz_det;
use crate::local_field::{BaseElement, Field};

/// Exponent vector of a class: `[v mod p, c_1, ..., c_p]`.
pub type ClassVector = Vec<u64>;

/// `L*/(L*)^{p^n}` with its exponent-vector encoding.
#[derive(Clone, Debug)]
pub struct UnitClassGroup {
    field: Field,
    p: u64,
    n: u32,
    generators: Vec<BaseElement>,
}

/// Serializable summary of a class group.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct ClassGroupSummary {
    pub p: u64,
    pub n: u32,
    pub dimension: usize,
    pub order: String,
    pub generators: Vec<String>,
}

fn mod_p(x: i64, p: u64) -> u64 {
    x.rem_euclid(p as i64) as u64
}

impl UnitClassGroup {
    pub fn field(&self) -> &Field {
        &self.field
    }
    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn n(&self) -> u32 {
        self.n
    }
    /// Dimension over `Z/p^n`.
    pub fn dimension(&self) -> usize {
        self.generators.len()
    }
    /// Number of classes.
    pub fn order(&self) -> u128 {
        (self.p as u128).pow(self.dimension() as u32)
    }
    /// `pi, 1 + pi, ..., 1 + pi^p`.
    pub fn generators(&self) -> &[BaseElement] {
        &self.generators
    }

    /// Relative precision a class computation needs.
    pub fn needed_precision(&self) -> i64 {
        self.p as i64 + 1
    }

    fn pi(&self, prec: i64) -> BaseElement {
        BaseElement::uniformizer(&self.field, prec)
    }

    /// Exponent vector of the class of a nonzero `x`.
    pub fn class_of(&self, x: &BaseElement) -> Result<ClassVector> {
        if x.field() != &self.field {
            return Err(Error::AmbientMismatch);
        }
        let p = self.p;
        let v = x.valuation()?;
        let rel = x.prec().saturating_sub(v);
        if rel < self.needed_precision() {
            return Err(Error::PrecisionExhausted(format!(
                "class needs relative precision {}, have {rel}",
                self.needed_precision()
            )));
        }
        let work = self.needed_precision();
        let w = x.with_prec(v + work).divide(&self.pi(work + 2 * v.abs() + 2).pow(v)?)?.with_prec(work);
        // w^(p-1) is a principal unit and (p-1)^(-1) = -1 mod p
        let u1 = w.pow(p as i64 - 1)?;
        let digits = self.principal_digits(&u1)?;
        let mut out = vec![mod_p(v, p)];
        out.extend(digits.into_iter().map(|c| mod_p(-(c as i64), p)));
        Ok(out)
    }

    /// Coordinates of a principal unit along `1 + pi^j`, `j = 1..=p`.
    fn principal_digits(&self, u: &BaseElement) -> Result<Vec<u64>> {
        let p = self.p;
        let work = self.needed_precision();
        let one = BaseElement::one(&self.field, work);
        let pi = self.pi(work);
        let mut u = u.with_prec(work);
        let mut out = Vec::with_capacity(p as usize);
        for j in 1..=p as i64 {
            let y = u.sub(&one);
            let v = y.val_or_prec();
            if v < j {
                return Err(Error::PrecisionExhausted(format!("unit not in U^({j}) after peeling")));
            }
            let pij = pi.pow(j)?;
            let c = if v > j {
                0
            } else {
                (1..p)
                    .find(|&c| y.sub(&pij.mul_int(c as i64)).val_or_prec() > j)
                    .ok_or_else(|| Error::PrecisionExhausted("residue digit not found".into()))?
            };
            if c != 0 {
                u = u.mul(&one.add(&pij).pow(c as i64)?.inv()?);
            }
            out.push(c);
        }
        Ok(out)
    }

    /// `pi^(a_0) * prod (1 + pi^j)^(a_j)` as an exact element.
    pub fn representative(&self, class: &[u64]) -> Result<BaseElement> {
        if class.len() != self.dimension() {
            return Err(Error::Config(format!("class vector needs {} entries", self.dimension())));
        }
        let mut x = BaseElement::one(&self.field, crate::local_field::EXACT);
        for (g, &a) in self.generators.iter().zip(class) {
            x = x.mul(&g.pow_u(&a.into()));
        }
        Ok(x)
    }

    /// Every class vector in lexicographic order.
    pub fn classes(&self) -> impl Iterator<Item = ClassVector> + '_ {
        let (p, d) = (self.p, self.dimension());
        (0..self.order()).map(move |mut i| {
            let mut v = vec![0u64; d];
            for slot in v.iter_mut().rev() {
                *slot = (i % p as u128) as u64;
                i /= p as u128;
            }
            v
        })
    }

    /// Representatives of all classes (feasible for `p = 3`).
    pub fn representatives(&self) -> Result<Vec<BaseElement>> {
        self.classes().map(|c| self.representative(&c)).collect()
    }

    pub fn summary(&self) -> ClassGroupSummary {
        ClassGroupSummary {
            p: self.p,
            n: self.n,
            dimension: self.dimension(),
            order: self.order().to_string(),
            generators: std::iter::once("pi".to_string())
                .chain((1..=self.p).map(|j| format!("1+pi^{j}")))
                .collect(),
        }
    }
}

/// The class group of `L*/(L*)^{p^n}`.
pub fn unit_classes(field: &Field, n: u32) -> Result<UnitClassGroup> {
    let p = field.p();
    if field.cyclotomic_level().unwrap_or(0) < n || n == 0 {
        return Err(Error::TorsionMissing(format!("zeta_{p}^{n} is not in the field")));
    }
    if n != 1 || field.degree() as u64 != p - 1 {
        return Err(Error::Unsupported("the oracle handles L = Q_p(zeta_p) and n = 1".into()));
    }
    let exact = crate::local_field::EXACT;
    let pi = BaseElement::uniformizer(field, exact);
    let one = BaseElement::one(field, exact);
    let mut generators = vec![pi.clone()];
    for j in 1..=p {
        generators.push(one.add(&pi.pow_u(&j.into())));
    }
    let group = UnitClassGroup { field: field.clone(), p, n, generators };
    // the generators must map to the standard basis
    let d = group.dimension();
    for (i, g) in group.generators.iter().enumerate() {
        let c = group.class_of(&g.with_prec(4 * p as i64 + 8))?;
        if c.iter().enumerate().any(|(k, &x)| x != u64::from(k == i)) {
            return Err(Error::IndexMismatch { found: d as u64, expected: field.degree() as u64 + 2 });
        }
    }
    if d != field.degree() + 2 {
        return Err(Error::IndexMismatch { found: d as u64, expected: field.degree() as u64 + 2 });
    }
    Ok(group)
}

/// Image of the norm from `L(b^{1/p^n})` in the class group.
#[derive(Clone, Debug)]
pub struct NormGroup {
    group: UnitClassGroup,
    b_class: ClassVector,
    /// Row-reduced spanning set.
    basis: Vec<ClassVector>,
    /// Linear form cutting out the subgroup; `None` for the full group.
    normal: Option<ClassVector>,
}

impl NormGroup {
    pub fn group(&self) -> &UnitClassGroup {
        &self.group
    }
    pub fn b_class(&self) -> &[u64] {
        &self.b_class
    }
    pub fn basis(&self) -> &[ClassVector] {
        &self.basis
    }
    pub fn normal(&self) -> Option<&[u64]> {
        self.normal.as_deref()
    }
    pub fn index(&self) -> u64 {
        if self.normal.is_some() {
            self.group.p
        } else {
            1
        }
    }
    pub fn contains_class(&self, c: &[u64]) -> bool {
        let p = self.group.p;
        match &self.normal {
            None => true,
            Some(l) => l.iter().zip(c).map(|(a, b)| a * b % p).sum::<u64>() % p == 0,
        }
    }
    pub fn contains(&self, a: &BaseElement) -> Result<bool> {
        Ok(self.contains_class(&self.group.class_of(a)?))
    }
}

/// Echelon form over `F_p`; returns the pivot rows.
fn insert_row(rows: &mut Vec<(usize, ClassVector)>, mut v: ClassVector, p: u64) -> bool {
    for (piv, r) in rows.iter() {
        let c = v[*piv];
        if c != 0 {
            for (x, y) in v.iter_mut().zip(r) {
                *x = (*x + (p - c) * y) % p;
            }
        }
    }
    let Some(piv) = v.iter().position(|&x| x != 0) else {
        return false;
    };
    let inv = mod_inverse(v[piv], p);
    for x in v.iter_mut() {
        *x = *x * inv % p;
    }
    for (_, r) in rows.iter_mut() {
        let c = r[piv];
        if c != 0 {
            for (x, y) in r.iter_mut().zip(&v) {
                *x = (*x + (p - c) * y) % p;
            }
        }
    }
    rows.push((piv, v));
    true
}

fn mod_inverse(a: u64, p: u64) -> u64 {
    (1..p).find(|&b| a * b % p == 1).expect("nonzero mod p")
}

/// Norm of `sum c_i X^i` from `L[X]/(X^m - b)`.
fn kummer_norm(coeffs: &[BaseElement], b: &BaseElement) -> BaseElement {
    let m = coeffs.len();
    let zero = b.mul_int(0);
    let mut mat = vec![vec![zero.clone(); m]; m];
    for j in 0..m {
        for (i, c) in coeffs.iter().enumerate() {
            let k = i + j;
            let (row, entry) = if k < m { (k, c.clone()) } else { (k - m, c.mul(b)) };
            mat[row][j] = mat[row][j].add(&entry);
        }
    }
    berkowitz_det(&mat)
}

const MAX_SAMPLES: usize = 400;
const CONFIRM: usize = 24;

/// Norm subgroup attached to `b`, verified to have index `p^n` (or `1` when
/// `b` is a `p^n`-th power).
pub fn norm_group(field: &Field, b: &BaseElement, n: u32) -> Result<NormGroup> {
    let group = unit_classes(field, n)?;
    norm_group_in(&group, b)
}

/// As [`norm_group`], reusing a class group.
pub fn norm_group_in(group: &UnitClassGroup, b: &BaseElement) -> Result<NormGroup> {
    let p = group.p;
    let d = group.dimension();
    let b_class = group.class_of(b)?;
    if b_class.iter().all(|&c| c == 0) {
        return Ok(NormGroup { group: group.clone(), b_class, basis: Vec::new(), normal: None });
    }
    let prec = 6 * p as i64 + 12;
    let bb = group.representative(&b_class)?.with_prec(prec);
    let field = group.field.clone();
    let mut rows: Vec<(usize, ClassVector)> = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x6e6f726d);
    let m = p as usize;
    let consider = |rows: &mut Vec<(usize, ClassVector)>, coeffs: Vec<BaseElement>| -> Result<bool> {
        let nm = kummer_norm(&coeffs, &bb);
        if nm.is_zero() || nm.prec() - nm.val_or_prec() < group.needed_precision() {
            return Ok(false);
        }
        let c = group.class_of(&nm)?;
        if insert_row(rows, c, p) && rows.len() == d {
            return Err(Error::IndexMismatch { found: 1, expected: p });
        }
        Ok(true)
    };
    let zero = BaseElement::zero(&field, prec);
    let mut x = vec![zero.clone(); m];
    x[1] = BaseElement::one(&field, prec);
    consider(&mut rows, x)?;
    let mut pi = vec![zero.clone(); m];
    pi[0] = BaseElement::uniformizer(&field, prec);
    consider(&mut rows, pi)?;
    let mut since_full = 0;
    for _ in 0..MAX_SAMPLES {
        let coeffs: Vec<BaseElement> = (0..m)
            .map(|_| {
                let shift: i64 = rng.gen_range(0..3);
                BaseElement::random(&field, &mut rng, prec, 0).divide(&BaseElement::uniformizer(&field, prec + 8).pow(shift).expect("nonzero"))
            })
            .collect::<Result<_>>()?;
        let coeffs = coeffs.into_iter().map(|c| c.with_prec(prec - 8)).collect();
        consider(&mut rows, coeffs)?;
        if rows.len() == d - 1 {
            since_full += 1;
            if since_full >= CONFIRM {
                break;
            }
        }
    }
    if rows.len() != d - 1 {
        return Err(Error::IndexMismatch { found: p.pow((d - rows.len()) as u32), expected: p });
    }
    let normal = null_vector(&rows, d, p);
    let basis = rows.into_iter().map(|(_, r)| r).collect();
    Ok(NormGroup { group: group.clone(), b_class, basis, normal: Some(normal) })
}

/// The linear form vanishing on a reduced hyperplane basis.
fn null_vector(rows: &[(usize, ClassVector)], d: usize, p: u64) -> ClassVector {
    let pivots: Vec<usize> = rows.iter().map(|(c, _)| *c).collect();
    let free = (0..d).find(|c| !pivots.contains(c)).expect("one free column");
    let mut v = vec![0u64; d];
    v[free] = 1;
    for (piv, r) in rows {
        v[*piv] = (p - r[free]) % p;
    }
    v
}

/// True when the Hilbert symbol `(a, b)` of level `n` is trivial.
pub fn hilbert_trivial(a: &BaseElement, b: &BaseElement, field: &Field, n: u32) -> Result<bool> {
    if a.is_zero() || b.is_zero() {
        return Err(Error::ZeroEntry(usize::from(a.is_zero())));
    }
    norm_group(field, b, n)?.contains(a)
}
