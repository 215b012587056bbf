//! Iterated Laurent fields `L{{T_1}}...{{T_{d-1}}}` over a finite extension `L`.
//!
//! An element is a finite map from multi-indices to coefficients of `L`
//! together with an absolute precision `N`: every omitted coefficient is
//! known to have valuation at least `N`. Supports live inside a symmetric
//! window `[-W, W]` per variable; a product whose support provably leaves
//! the window is an error unless truncation is requested explicitly.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::local_field::{is_exact, map_prec, BaseElement, Field, EXACT};

pub const DEFAULT_WINDOW: i64 = 16;

/// The standard field `L{{T_1}}...{{T_{d-1}}}`.
#[derive(Debug, PartialEq, Eq)]
pub struct TowerDesc {
    base: Field,
    vars: usize,
    window: i64,
}

pub type Tower = Arc<TowerDesc>;

impl TowerDesc {
    /// `d - 1 = vars` Laurent variables over `base`.
    pub fn new(base: &Field, vars: usize, window: i64) -> Result<Tower> {
        if window < 0 {
            return Err(Error::Config("window must be non-negative".into()));
        }
        Ok(Arc::new(TowerDesc { base: base.clone(), vars, window }))
    }

    pub fn standard(base: &Field, vars: usize) -> Tower {
        Self::new(base, vars, DEFAULT_WINDOW).expect("default window")
    }

    pub fn base(&self) -> &Field {
        &self.base
    }
    /// Number of Laurent variables, `d - 1`.
    pub fn vars(&self) -> usize {
        self.vars
    }
    /// Dimension `d` of the higher local field.
    pub fn dim(&self) -> usize {
        self.vars + 1
    }
    pub fn window(&self) -> i64 {
        self.window
    }

    /// Same variables and window over a different coefficient field.
    pub fn with_base(&self, base: &Field) -> Tower {
        Arc::new(TowerDesc { base: base.clone(), vars: self.vars, window: self.window })
    }

    pub fn with_window(&self, window: i64) -> Tower {
        Arc::new(TowerDesc { base: self.base.clone(), vars: self.vars, window })
    }

    /// Lower bound defining `R_{L,1}` relative to the member `s` of the base tower.
    pub fn rl1_bound(&self, s: &Field) -> Result<i64> {
        let dv = self.base.different_valuation(s)?;
        let vp = self.base.e();
        Ok(-dv - vp / (self.base.p() as i64 - 1) - 1)
    }

    /// Lower bound for `R'_{L,1} = pi_L R_{L,1}`.
    pub fn rl1_prime_bound(&self, s: &Field) -> Result<i64> {
        Ok(self.rl1_bound(s)? + 1)
    }

    /// Smallest valuation of `mu_{L,1}`: `floor(v(p)/(p-1)) + 1`.
    pub fn mu1_bound(&self) -> i64 {
        self.base.e() / (self.base.p() as i64 - 1) + 1
    }
}

pub type Index = Vec<i64>;

/// Element of a standard higher local field.
#[derive(Clone)]
pub struct TowerElement {
    tower: Tower,
    terms: BTreeMap<Index, BaseElement>,
    prec: i64,
}

impl fmt::Debug for TowerElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for TowerElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "O(pi^{})", self.prec);
        }
        let parts: Vec<String> = self.terms.iter().map(|(i, c)| format!("{:?}:{}", i, c)).collect();
        write!(f, "{{{}}} + O(pi^{})", parts.join(", "), self.prec)
    }
}

/// Which policy to follow when a product leaves the window.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WindowPolicy {
    Strict,
    Truncate,
}

impl TowerElement {
    /// Build from terms; coefficients are reduced to precision `prec`.
    pub fn new(tower: &Tower, terms: impl IntoIterator<Item = (Index, BaseElement)>, prec: i64) -> Result<Self> {
        let mut x = TowerElement { tower: tower.clone(), terms: BTreeMap::new(), prec };
        for (i, c) in terms {
            if i.len() != tower.vars {
                return Err(Error::Config(format!("index {:?} has wrong length", i)));
            }
            if !Arc::ptr_eq(c.field(), &tower.base) && **c.field() != *tower.base {
                return Err(Error::AmbientMismatch);
            }
            x.prec = x.prec.min(c.prec());
            let slot = x.terms.entry(i).or_insert_with(|| BaseElement::zero(&tower.base, EXACT));
            *slot = slot.add(&c);
        }
        x.normalize(WindowPolicy::Strict)?;
        Ok(x)
    }

    pub fn zero(tower: &Tower, prec: i64) -> Self {
        TowerElement { tower: tower.clone(), terms: BTreeMap::new(), prec }
    }

    pub fn one(tower: &Tower) -> Self {
        Self::from_base(tower, &BaseElement::one(&tower.base, EXACT))
    }

    /// Embed a coefficient-field element as a constant.
    pub fn from_base(tower: &Tower, a: &BaseElement) -> Self {
        let mut terms = BTreeMap::new();
        if !a.is_zero() {
            terms.insert(vec![0; tower.vars], a.clone());
        }
        TowerElement { tower: tower.clone(), terms, prec: a.prec() }
    }

    pub fn from_int(tower: &Tower, n: i64) -> Self {
        Self::from_base(tower, &BaseElement::from_int(&tower.base, n, EXACT))
    }

    /// `a * T^idx`.
    pub fn monomial(tower: &Tower, a: &BaseElement, idx: Index) -> Result<Self> {
        Self::new(tower, [(idx, a.clone())], a.prec())
    }

    /// The variable `T_k`, `1 <= k <= d-1`.
    pub fn var(tower: &Tower, k: usize) -> Self {
        assert!(k >= 1 && k <= tower.vars, "variable index out of range");
        let mut idx = vec![0; tower.vars];
        idx[k - 1] = 1;
        Self::monomial(tower, &BaseElement::one(&tower.base, EXACT), idx).expect("window >= 1")
    }

    /// Uniformizer of the coefficient field, which is also `T_d`.
    pub fn uniformizer(tower: &Tower) -> Self {
        Self::from_base(tower, &BaseElement::uniformizer(&tower.base, EXACT))
    }

    pub fn tower(&self) -> &Tower {
        &self.tower
    }
    pub fn prec(&self) -> i64 {
        self.prec
    }
    pub fn terms(&self) -> &BTreeMap<Index, BaseElement> {
        &self.terms
    }

    pub fn coeff(&self, idx: &[i64]) -> BaseElement {
        self.terms
            .get(idx)
            .cloned()
            .unwrap_or_else(|| BaseElement::zero(&self.tower.base, self.prec))
    }

    fn normalize(&mut self, policy: WindowPolicy) -> Result<()> {
        if is_exact(self.prec) {
            self.prec = EXACT;
        }
        let prec = self.prec;
        let w = self.tower.window;
        let mut overflow = None;
        self.terms.retain(|i, c| {
            c.set_prec(prec);
            if c.is_zero() {
                return false;
            }
            if i.iter().any(|k| k.abs() > w) {
                if policy == WindowPolicy::Strict && overflow.is_none() {
                    overflow = Some(i.clone());
                }
                return false;
            }
            true
        });
        match overflow {
            Some(index) => Err(Error::WindowOverflow { index, window: w }),
            None => Ok(()),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// `min v_L(a_i)`.
    pub fn valuation(&self) -> Result<i64> {
        self.terms
            .values()
            .map(|c| c.valuation())
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .min()
            .ok_or_else(|| Error::PrecisionExhausted(format!("element is zero modulo pi^{}", self.prec)))
    }

    pub fn val_or_prec(&self) -> i64 {
        self.valuation().unwrap_or(self.prec)
    }

    pub fn set_prec(&mut self, prec: i64) {
        if prec < self.prec {
            self.prec = prec;
            self.normalize(WindowPolicy::Truncate).expect("truncate never fails");
        }
    }

    pub fn with_prec(&self, prec: i64) -> Self {
        let mut x = self.clone();
        x.set_prec(prec);
        x
    }

    /// Regard the stored representative as known to a higher precision.
    pub fn lift_prec(&self, prec: i64) -> Self {
        let mut x = self.clone();
        x.prec = prec;
        for c in x.terms.values_mut() {
            *c = c.lift_prec(prec);
        }
        x
    }

    /// Drop every term outside the window `[-w, w]`.
    pub fn truncate(&self, w: i64) -> Self {
        let mut x = self.clone();
        x.terms.retain(|i, _| i.iter().all(|k| k.abs() <= w));
        x
    }

    fn check_same(&self, o: &Self) {
        assert!(
            Arc::ptr_eq(&self.tower, &o.tower) || (self.tower.vars == o.tower.vars && *self.tower.base == *o.tower.base),
            "tower mismatch"
        );
    }

    pub fn add(&self, o: &Self) -> Self {
        self.check_same(o);
        let mut out = self.clone();
        out.prec = self.prec.min(o.prec);
        for (i, c) in &o.terms {
            let slot = out.terms.entry(i.clone()).or_insert_with(|| BaseElement::zero(&self.tower.base, EXACT));
            *slot = slot.add(c);
        }
        out.normalize(WindowPolicy::Truncate).expect("sums stay in the window");
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.neg();
        }
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    /// Product; `WindowOverflow` if a surviving term leaves the window.
    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.mul_with(o, WindowPolicy::Strict)
    }

    /// Product that silently drops terms outside the window.
    pub fn mul_truncated(&self, o: &Self) -> Self {
        self.mul_with(o, WindowPolicy::Truncate).expect("truncating product")
    }

    pub fn mul_with(&self, o: &Self, policy: WindowPolicy) -> Result<Self> {
        self.check_same(o);
        let vx = self.val_or_prec();
        let vy = o.val_or_prec();
        let prec = (self.prec + vy).min(o.prec + vx);
        let prec = if is_exact(self.prec) && is_exact(o.prec) { EXACT } else { prec.min(EXACT) };
        let mut terms: BTreeMap<Index, BaseElement> = BTreeMap::new();
        for (i, a) in &self.terms {
            for (j, b) in &o.terms {
                let k: Index = i.iter().zip(j).map(|(x, y)| x + y).collect();
                let prod = a.mul(b);
                match terms.get_mut(&k) {
                    Some(slot) => *slot = slot.add(&prod),
                    None => {
                        terms.insert(k, prod);
                    }
                }
            }
        }
        let mut out = TowerElement { tower: self.tower.clone(), terms, prec };
        out.normalize(policy)?;
        Ok(out)
    }

    /// Multiply by a coefficient-field scalar.
    pub fn scale(&self, a: &BaseElement) -> Self {
        let va = a.val_or_prec();
        let prec = (self.prec + va).min(a.prec() + self.val_or_prec());
        let mut out = TowerElement {
            tower: self.tower.clone(),
            terms: self.terms.iter().map(|(i, c)| (i.clone(), c.mul(a))).collect(),
            prec: if is_exact(self.prec) && is_exact(a.prec()) { EXACT } else { prec.min(EXACT) },
        };
        out.normalize(WindowPolicy::Truncate).expect("scaling keeps support");
        out
    }

    pub fn mul_int(&self, n: i64) -> Self {
        self.scale(&BaseElement::from_int(&self.tower.base, n, EXACT))
    }

    /// Multiply by `T^shift`.
    pub fn shift(&self, shift: &[i64]) -> Result<Self> {
        let terms: Vec<(Index, BaseElement)> = self
            .terms
            .iter()
            .map(|(i, c)| (i.iter().zip(shift).map(|(a, b)| a + b).collect(), c.clone()))
            .collect();
        Self::new(&self.tower, terms, self.prec)
    }

    /// Inverse, via the leading monomial and a geometric series.
    pub fn inv(&self) -> Result<Self> {
        let v = self.valuation().map_err(|_| Error::NonInvertible)?;
        let lead: Vec<(&Index, &BaseElement)> =
            self.terms.iter().filter(|(_, c)| c.valuation().map(|w| w == v).unwrap_or(false)).collect();
        if lead.len() != 1 {
            return Err(Error::NonInvertible);
        }
        let (k, a) = (lead[0].0.clone(), lead[0].1.clone());
        let neg_k: Index = k.iter().map(|x| -x).collect();
        if self.terms.len() == 1 && is_exact(self.prec) {
            if let Some(ai) = exact_unit_inverse(&a) {
                return Self::monomial(&self.tower, &ai, neg_k);
            }
        }
        if is_exact(self.prec) {
            return Err(Error::PrecisionExhausted("inverse of an exact element needs a finite precision".into()));
        }
        let a_inv = a.with_prec(self.prec).inv()?;
        let target = self.prec - 2 * v;
        // x = a T^k (1 + y)
        let y = self.scale(&a_inv).shift(&neg_k)?.sub(&Self::one(&self.tower));
        let mut sum = Self::one(&self.tower).with_prec(target + v);
        let mut term = Self::one(&self.tower);
        let minus_y = y.neg();
        loop {
            term = term.mul(&minus_y)?;
            term.set_prec(target + v);
            if term.is_zero() {
                break;
            }
            sum = sum.add(&term);
        }
        let mut out = sum.scale(&a_inv).shift(&neg_k)?;
        out.set_prec(target);
        Ok(out)
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        self.mul(&o.inv()?)
    }

    /// Inverse for the full valuation: the leading term is the one of least
    /// `v_L` and, among those, least index compared from `T_{d-1}` down to
    /// `T_1`. The geometric series converges `T`-adically and is cut at the
    /// window, so only elements with a unique leading monomial in `v_L` come
    /// out exact; the others are correct up to terms outside the window.
    pub fn inv_truncated(&self) -> Result<Self> {
        let v = self.valuation().map_err(|_| Error::NonInvertible)?;
        if is_exact(self.prec) {
            return self.inv();
        }
        let (k, a) = self
            .terms
            .iter()
            .filter(|(_, c)| c.valuation().map(|w| w == v).unwrap_or(false))
            .min_by(|(i, _), (j, _)| i.iter().rev().cmp(j.iter().rev()))
            .map(|(i, c)| (i.clone(), c.clone()))
            .ok_or(Error::NonInvertible)?;
        let neg_k: Index = k.iter().map(|x| -x).collect();
        let a_inv = a.with_prec(self.prec).inv()?;
        let target = self.prec - 2 * v;
        let y = self.scale(&a_inv).shift_truncated(&neg_k).sub(&Self::one(&self.tower));
        let minus_y = y.neg();
        let mut sum = Self::one(&self.tower).with_prec(target + v);
        let mut term = Self::one(&self.tower);
        loop {
            term = term.mul_truncated(&minus_y);
            term.set_prec(target + v);
            if term.is_zero() {
                break;
            }
            sum = sum.add(&term);
        }
        let mut out = sum.scale(&a_inv).shift_truncated(&neg_k);
        out.set_prec(target);
        Ok(out)
    }

    fn shift_truncated(&self, shift: &[i64]) -> Self {
        let w = self.tower.window;
        let terms = self
            .terms
            .iter()
            .map(|(i, c)| (i.iter().zip(shift).map(|(a, b)| a + b).collect::<Index>(), c.clone()))
            .filter(|(i, _)| i.iter().all(|x| x.abs() <= w))
            .collect();
        TowerElement { tower: self.tower.clone(), terms, prec: self.prec }
    }

    pub fn pow(&self, k: i64) -> Result<Self> {
        if k < 0 {
            return self.inv()?.pow(-k);
        }
        let mut result = Self::one(&self.tower);
        let mut base = self.clone();
        let mut e = k as u64;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    /// Equality modulo `pi^n`.
    pub fn eq_mod(&self, o: &Self, n: i64) -> bool {
        if self.prec < n || o.prec < n {
            return false;
        }
        self.sub(o).val_or_prec() >= n
    }

    /// The constant coefficient `c(x) = a_{0,...,0}`.
    pub fn constant_coeff(&self) -> BaseElement {
        self.coeff(&vec![0; self.tower.vars])
    }

    /// Embed into a tower over a larger coefficient field.
    pub fn embed(&self, to: &Tower) -> Result<Self> {
        let terms = self
            .terms
            .iter()
            .map(|(i, c)| Ok((i.clone(), c.embed(&to.base)?)))
            .collect::<Result<Vec<_>>>()?;
        let e_rel = to.base.e() / self.tower.base.e();
        Self::new(to, terms, map_prec(self.prec, |n| n * e_rel))
    }

    /// Coefficientwise restriction to a tower over a member field.
    pub fn restrict(&self, to: &Tower) -> Result<Self> {
        let terms = self
            .terms
            .iter()
            .map(|(i, c)| Ok((i.clone(), c.restrict(&to.base)?)))
            .collect::<Result<Vec<_>>>()?;
        let e_rel = self.tower.base.e() / to.base.e();
        Self::new(to, terms, map_prec(self.prec, |n| crate::local_field::ceil_div(n, e_rel)))
    }

    /// `Tr_{L{{T}}/E{{T}}}` for a member `E` of the coefficient tower.
    pub fn trace_coeffs(&self, to: &Tower) -> Result<Self> {
        let zero = BaseElement::zero(&self.tower.base, self.prec).trace(&to.base)?;
        let terms = self
            .terms
            .iter()
            .map(|(i, c)| Ok((i.clone(), c.with_prec(self.prec).trace(&to.base)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(to, terms, zero.prec())
    }

    /// Norm of an element all of whose coefficients live in the constant term,
    /// or more generally coefficientwise norm of a monomial.
    pub fn norm_monomial(&self, to: &Tower) -> Result<Self> {
        if self.terms.len() > 1 {
            return Err(Error::ShapeNotSupported("norm of a non-monomial Laurent element".into()));
        }
        let deg = self.tower.base.degree_over(&to.base)? as i64;
        match self.terms.iter().next() {
            None => Ok(Self::zero(to, self.prec)),
            Some((i, c)) => {
                let n = c.norm(&to.base)?;
                let idx: Index = i.iter().map(|k| k * deg).collect();
                Self::new(to, [(idx, n.clone())], n.prec())
            }
        }
    }

    /// `N_{L{{T}}/E{{T}}}` for a member `E`, one tower step at a time via
    /// the determinant of the multiplication matrix.
    pub fn norm(&self, to: &Tower) -> Result<Self> {
        let lvl = self
            .tower
            .base
            .member_level(&to.base)
            .ok_or_else(|| Error::NotASubfield("norm target is not a member".into()))?;
        if to.vars != self.tower.vars {
            return Err(Error::AmbientMismatch);
        }
        let mut x = self.clone();
        while x.tower.base.levels() > lvl {
            x = x.step_norm()?;
        }
        Self::new(to, x.terms, x.prec)
    }

    fn block(&self, parent: &Tower, i: usize) -> Result<Self> {
        let prec = BaseElement::zero(&self.tower.base, self.prec).block(i).prec();
        let terms: Vec<(Index, BaseElement)> =
            self.terms.iter().map(|(k, c)| (k.clone(), c.with_prec(self.prec).block(i))).collect();
        Self::new(parent, terms, prec)
    }

    fn step_norm(&self) -> Result<Self> {
        let field = &self.tower.base;
        let parent = self.tower.with_base(field.parent().expect("non-trivial tower"));
        let r = field.steps()[field.levels() - 1].degree();
        let theta = Self::from_base(&self.tower, &BaseElement::generator(field, EXACT));
        let mut cols = Vec::with_capacity(r);
        let mut cur = self.clone();
        for _ in 0..r {
            cols.push(cur.clone());
            cur = cur.mul(&theta)?;
        }
        let mat = (0..r)
            .map(|i| cols.iter().map(|c| c.block(&parent, i)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        det(&mat)
    }

    /// Generalized trace `T_{L/S}` down to a member `S` of the coefficient tower.
    pub fn generalized_trace(&self, s: &Field) -> Result<BaseElement> {
        self.constant_coeff().with_prec(self.prec).trace(s)
    }

    /// Random element with coefficient valuation at least `min_val` and
    /// support in `[-span, span]^{d-1}`.
    pub fn random<R: Rng + ?Sized>(tower: &Tower, rng: &mut R, prec: i64, min_val: i64, span: i64) -> Self {
        let n = tower.vars;
        let mut terms = Vec::new();
        let count = (2 * span + 1).pow(n as u32).min(64) as usize;
        for _ in 0..count.max(1) {
            let idx: Index = (0..n).map(|_| rng.gen_range(-span..=span)).collect();
            let shift = rng.gen_range(0..3);
            let c = BaseElement::random(&tower.base, rng, prec, min_val + shift);
            terms.push((idx, c));
        }
        Self::new(tower, terms, prec).expect("span inside window")
    }
}

/// Determinant of a square matrix of tower elements, by expansion over
/// column subsets; products obey the strict window policy.
pub fn det(m: &[Vec<TowerElement>]) -> Result<TowerElement> {
    det_with(m, WindowPolicy::Strict)
}

/// Determinant with an explicit window policy for the products.
pub fn det_with(m: &[Vec<TowerElement>], policy: WindowPolicy) -> Result<TowerElement> {
    let n = m.len();
    assert!(n > 0 && n < 20, "matrix size");
    let tower = m[0][0].tower.clone();
    // minors[S] = det of rows n-|S|..n restricted to the columns in S
    let mut minors: Vec<Option<TowerElement>> = vec![None; 1 << n];
    minors[0] = Some(TowerElement::one(&tower));
    for mask in 1usize..(1 << n) {
        let row = n - mask.count_ones() as usize;
        let mut acc = TowerElement::zero(&tower, EXACT);
        let mut sign_pos = true;
        for col in 0..n {
            if mask & (1 << col) == 0 {
                continue;
            }
            let entry = &m[row][col];
            let rest = minors[mask & !(1 << col)].as_ref().expect("smaller subset");
            if !(entry.is_zero() && is_exact(entry.prec)) {
                let t = entry.mul_with(rest, policy)?;
                acc = if sign_pos { acc.add(&t) } else { acc.sub(&t) };
            }
            sign_pos = !sign_pos;
        }
        minors[mask] = Some(acc);
    }
    Ok(minors[(1 << n) - 1].take().expect("full minor"))
}

/// Exact inverse of `±p^s`, the only exactly invertible constants we meet.
fn exact_unit_inverse(a: &BaseElement) -> Option<BaseElement> {
    use num_traits::{One, Signed, Zero};
    let c = a.coords();
    if c[1..].iter().all(|x| x.is_zero()) && c[0].abs().is_one() {
        let mut coords = c.to_vec();
        coords[0] = c[0].clone();
        Some(BaseElement::from_coords(a.field(), coords, -a.shift(), EXACT))
    } else {
        None
    }
}

/// Membership in `R_{L,1}` by the valuation criterion.
pub fn in_rl1(x: &TowerElement, s: &Field) -> Result<bool> {
    Ok(x.is_zero() || x.valuation()? >= x.tower().rl1_bound(s)?)
}

/// A constant `m` in `mu_{L,1}` with `T(x m)` outside the integers of `s`,
/// searched over `pi^j * b` for the flat basis `b` of the coefficient field.
pub fn rl1_witness(x: &TowerElement, s: &Field) -> Result<Option<TowerElement>> {
    use num_bigint::BigInt;
    use num_traits::Zero;
    let tower = x.tower();
    let field = tower.base();
    let pi = BaseElement::uniformizer(field, EXACT);
    let lift = x.lift_prec(x.prec().max(1) + 64 * field.e());
    for j in tower.mu1_bound()..tower.mu1_bound() + field.e() {
        let pj = pi.pow_u(&BigInt::from(j));
        for b in 0..field.degree() {
            let mut c = vec![BigInt::zero(); field.degree()];
            c[b] = BigInt::from(1);
            let beta = BaseElement::from_coords(field, c, 0, EXACT);
            let m = TowerElement::from_base(tower, &pj.mul(&beta));
            let t = lift.mul(&m)?.generalized_trace(s)?;
            if !t.is_zero() && t.valuation()? < 0 {
                return Ok(Some(m));
            }
        }
    }
    Ok(None)
}
