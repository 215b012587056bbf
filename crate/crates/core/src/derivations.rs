//! Partial derivatives on the integers of a standard higher local field,
//! Jacobian determinants, and `d`-dimensional derivations with values in
//! `O_L / pi_L^t`.
//!
//! On `L{{T_1}}...{{T_{d-1}}}` the variable `T_d` is the uniformizer of `L`.
//! Derivatives in `T_d` go through a representing polynomial `g` over the
//! maximal subfield `L_0` unramified over `K`, with `a = g(pi_L)`; they are
//! well defined modulo the different of `L/K`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use rand::Rng;

use crate::error::{Error, Result};
use crate::laurent_tower::{det, Tower, TowerElement};
use crate::linalg::inverse_mod;
use crate::local_field::{floor_div, is_exact, pow_big, BaseElement, Field, StepKind, EXACT};

/// Change of basis from the flat integral basis of `L` to `u_a * pi^b`.
struct Solver {
    digits: i64,
    inv: Vec<Vec<BigInt>>,
}

/// Precomputed data for differentiating in `T_d` over a base field `K`.
pub struct DerivationContext {
    tower: Tower,
    k: Field,
    l0: Field,
    m: usize,
    pi: BaseElement,
    prec: i64,
    solver: Option<Solver>,
    /// `P(X) = X^m - sum r_b X^b`, stored as `[r_0, ..., r_{m-1}]`.
    min_poly_tail: Vec<BaseElement>,
}

impl DerivationContext {
    /// Context over `K`, which must be a member of the coefficient field `L`
    /// such that `L` is an unramified part followed by Eisenstein steps.
    /// `prec` bounds the work for exact inputs outside the one-step case.
    pub fn new(tower: &Tower, k: &Field, prec: i64) -> Result<Self> {
        let l = tower.base().clone();
        let kl = l
            .member_level(k)
            .ok_or_else(|| Error::NoRepresentation("base field is not a member of the coefficient field".into()))?;
        let steps = l.steps();
        let mut lvl0 = kl;
        while lvl0 < steps.len() && steps[lvl0].kind == StepKind::Unramified {
            lvl0 += 1;
        }
        if steps[lvl0..].iter().any(|s| s.kind != StepKind::Eisenstein) {
            return Err(Error::NoRepresentation(
                "coefficient field is not totally ramified over its unramified part".into(),
            ));
        }
        let l0 = l.subfield(lvl0);
        let m = l.degree() / l0.degree();
        let pi = BaseElement::uniformizer(&l, EXACT);
        let solver = if steps.len() - lvl0 > 1 { Some(Self::build_solver(&l, &l0, &pi, m, prec)?) } else { None };
        let mut ctx =
            DerivationContext { tower: tower.clone(), k: k.clone(), l0, m, pi, prec, solver, min_poly_tail: Vec::new() };
        if m > 1 {
            let pm = ctx.pi.pow(m as i64)?;
            ctx.min_poly_tail = ctx.representing_poly(&pm)?;
        }
        Ok(ctx)
    }

    /// Context over `Q_p`.
    pub fn over_qp(tower: &Tower, prec: i64) -> Result<Self> {
        let k = tower.base().subfield(0);
        Self::new(tower, &k, prec)
    }

    fn build_solver(l: &Field, l0: &Field, pi: &BaseElement, m: usize, prec: i64) -> Result<Solver> {
        let n = l.degree();
        let d0 = l0.degree();
        let digits = floor_div(prec, l.e()).max(1) + 1;
        let modulus = pow_big(l.p_big(), digits);
        let mut cols: Vec<Vec<BigInt>> = Vec::with_capacity(n);
        let mut pw = BaseElement::one(l, EXACT);
        for _ in 0..m {
            for a in 0..d0 {
                let mut c = vec![BigInt::zero(); d0];
                c[a] = 1.into();
                let u = BaseElement::from_coords(l0, c, 0, EXACT).embed(l)?;
                cols.push(integer_coords(&u.mul(&pw)));
            }
            pw = pw.mul(pi);
        }
        let mat: Vec<Vec<BigInt>> = (0..n).map(|i| (0..n).map(|j| cols[j][i].clone()).collect()).collect();
        let inv = inverse_mod(&mat, l.p_big(), &modulus)
            .ok_or_else(|| Error::NoRepresentation("power basis of the uniformizer is not integral".into()))?;
        Ok(Solver { digits, inv })
    }

    pub fn tower(&self) -> &Tower {
        &self.tower
    }
    pub fn base(&self) -> &Field {
        &self.k
    }
    /// Maximal subfield of `L` unramified over `K`.
    pub fn unramified_part(&self) -> &Field {
        &self.l0
    }
    /// `[L : L_0]`.
    pub fn ramified_degree(&self) -> usize {
        self.m
    }
    pub fn uniformizer(&self) -> &BaseElement {
        &self.pi
    }

    /// Coefficients `g_0..g_{m-1}` over `L_0` with `x = sum g_b pi^b`.
    pub fn representing_poly(&self, x: &BaseElement) -> Result<Vec<BaseElement>> {
        let l = self.tower.base();
        if x.field() != l {
            return Err(Error::AmbientMismatch);
        }
        if self.m == 1 {
            let prec = x.prec();
            return Ok(vec![BaseElement::from_coords(&self.l0, x.coords().to_vec(), x.shift(), prec)]);
        }
        let Some(solver) = &self.solver else {
            return Ok((0..self.m).map(|b| x.block(b)).collect());
        };
        let n = l.degree();
        let d0 = self.l0.degree();
        let s = x.shift();
        let prec = if is_exact(x.prec()) { self.prec } else { x.prec() };
        let digits = (floor_div(prec, l.e()) - s).min(solver.digits);
        let out_prec = (digits + s) * self.l0.e();
        if digits <= 0 {
            return Ok(vec![BaseElement::zero(&self.l0, out_prec); self.m]);
        }
        let modulus = pow_big(l.p_big(), digits);
        let c: Vec<BigInt> = x.coords().iter().map(|v| v.mod_floor(&modulus)).collect();
        let y: Vec<BigInt> =
            (0..n).map(|i| (0..n).map(|j| &solver.inv[i][j] * &c[j]).sum::<BigInt>().mod_floor(&modulus)).collect();
        Ok((0..self.m)
            .map(|b| BaseElement::from_coords(&self.l0, y[b * d0..(b + 1) * d0].to_vec(), s, out_prec))
            .collect())
    }

    /// Another representing polynomial `g + h P` with a random `h` of degree one.
    pub fn randomized_poly<R: Rng + ?Sized>(&self, x: &BaseElement, rng: &mut R) -> Result<Vec<BaseElement>> {
        let mut g = self.representing_poly(x)?;
        let prec0 = g.iter().map(|c| c.prec()).min().unwrap_or(EXACT).min(self.prec);
        let h = [BaseElement::random(&self.l0, rng, prec0, 0), BaseElement::random(&self.l0, rng, prec0, 0)];
        let p = self.min_poly();
        g.resize(p.len() + h.len() - 1, BaseElement::zero(&self.l0, EXACT));
        for (i, hi) in h.iter().enumerate() {
            for (j, pj) in p.iter().enumerate() {
                g[i + j] = g[i + j].add(&hi.mul(pj));
            }
        }
        Ok(g)
    }

    /// Minimal polynomial of `pi_L` over `L_0`, low coefficients first.
    pub fn min_poly(&self) -> Vec<BaseElement> {
        if self.m == 1 {
            return vec![self.pi.neg().restrict(&self.l0).expect("pi lies in L_0"), BaseElement::one(&self.l0, EXACT)];
        }
        let mut p: Vec<BaseElement> = self.min_poly_tail.iter().map(|c| c.neg()).collect();
        p.push(BaseElement::one(&self.l0, EXACT));
        p
    }

    /// `g'(pi_L)` for a polynomial over `L_0`.
    pub fn eval_derivative(&self, g: &[BaseElement]) -> Result<BaseElement> {
        let l = self.tower.base();
        let mut acc = BaseElement::zero(l, EXACT);
        for b in (1..g.len()).rev() {
            acc = acc.mul(&self.pi).add(&g[b].embed(l)?.mul_int(b as i64));
        }
        if g.len() <= 1 {
            let prec = g.first().map(|c| c.embed(l).map(|e| e.prec())).transpose()?.unwrap_or(EXACT);
            acc.set_prec(prec);
        }
        Ok(acc)
    }

    /// `d a / d pi_L` for `a` in the coefficient field.
    pub fn base_derivative(&self, x: &BaseElement) -> Result<BaseElement> {
        self.eval_derivative(&self.representing_poly(x)?)
    }

    /// `v_L(P'(pi_L))`, the valuation of the annihilator of the module of
    /// differentials; equals the different of `L/K`.
    pub fn annihilator_valuation(&self) -> Result<i64> {
        if self.m == 1 {
            return Ok(0);
        }
        self.eval_derivative(&self.min_poly())?.valuation()
    }

    /// `d a / d T_k` for `1 <= k <= d`.
    pub fn partial_derivative(&self, a: &TowerElement, k: usize) -> Result<TowerElement> {
        let d = self.tower.dim();
        if a.tower().base() != self.tower.base() || a.tower().vars() != self.tower.vars() {
            return Err(Error::AmbientMismatch);
        }
        if k == 0 || k > d {
            return Err(Error::Config(format!("variable index {k} outside 1..={d}")));
        }
        if k < d {
            let terms = a.terms().iter().filter(|(i, _)| i[k - 1] != 0).map(|(i, c)| {
                let mut j = i.clone();
                j[k - 1] -= 1;
                (j, c.mul_int(i[k - 1]))
            });
            return TowerElement::new(a.tower(), terms.collect::<Vec<_>>(), a.prec());
        }
        let prec = self.derivative_prec(a.prec());
        let terms =
            a.terms().iter().map(|(i, c)| Ok((i.clone(), self.base_derivative(c)?))).collect::<Result<Vec<_>>>()?;
        TowerElement::new(a.tower(), terms, prec)
    }

    fn derivative_prec(&self, n: i64) -> i64 {
        let l = self.tower.base();
        if is_exact(n) && self.solver.is_none() {
            return EXACT;
        }
        if self.m == 1 {
            return n;
        }
        let n = if is_exact(n) { self.prec } else { n };
        match self.solver {
            None => n - 1,
            Some(_) => floor_div(n, l.e()) * l.e(),
        }
    }

    /// The matrix `[d a_i / d T_j]`.
    pub fn jacobian(&self, a: &[TowerElement]) -> Result<Vec<Vec<TowerElement>>> {
        let d = self.tower.dim();
        if a.len() != d {
            return Err(Error::Config(format!("expected {d} entries, got {}", a.len())));
        }
        a.iter().map(|ai| (1..=d).map(|j| self.partial_derivative(ai, j)).collect()).collect()
    }

    pub fn jacobian_det(&self, a: &[TowerElement]) -> Result<TowerElement> {
        det(&self.jacobian(a)?)
    }
}

fn integer_coords(x: &BaseElement) -> Vec<BigInt> {
    let f = pow_big(x.field().p_big(), x.shift().max(0));
    x.coords().iter().map(|c| c * &f).collect()
}

/// `d a / d T_k` over `Q_p`.
pub fn partial_derivative(a: &TowerElement, k: usize) -> Result<TowerElement> {
    let prec = if is_exact(a.prec()) { 64 * a.tower().base().e() } else { a.prec() };
    DerivationContext::over_qp(a.tower(), prec)?.partial_derivative(a, k)
}

/// `det[d a_i / d T_j]` over `Q_p`.
pub fn jacobian_det(a: &[TowerElement]) -> Result<TowerElement> {
    let first = a.first().ok_or_else(|| Error::Config("empty argument list".into()))?;
    let prec = a.iter().map(|x| x.prec()).min().unwrap_or(EXACT);
    let prec = if is_exact(prec) { 64 * first.tower().base().e() } else { prec };
    DerivationContext::over_qp(first.tower(), prec)?.jacobian_det(a)
}

/// `v_L` of the annihilator of the differentials of `L{{T}}` over `K`.
pub fn annihilator_valuation(tower: &Tower, k: &Field) -> Result<i64> {
    DerivationContext::new(tower, k, 64 * tower.base().e())?.annihilator_valuation()
}

/// A `d`-dimensional derivation `O_L^d -> O_L / pi_L^period`, determined by
/// its value `w` on `(T_1, ..., T_{d-1}, pi_L)`.
pub struct DerivationSpec {
    ctx: DerivationContext,
    w: TowerElement,
    period: i64,
}

impl DerivationSpec {
    pub fn new(ctx: DerivationContext, w: TowerElement, period: i64) -> Result<Self> {
        if w.prec() < period {
            return Err(Error::PrecisionExhausted(format!(
                "value known modulo pi^{} but the target needs pi^{period}",
                w.prec()
            )));
        }
        let w = w.with_prec(period);
        let ann = ctx.annihilator_valuation()?;
        if !w.is_zero() && w.valuation()? + ann < period {
            return Err(Error::AnnihilatorViolation(format!(
                "value of valuation {} is not killed by pi^{ann} modulo pi^{period}",
                w.valuation()?
            )));
        }
        Ok(DerivationSpec { ctx, w, period })
    }

    pub fn context(&self) -> &DerivationContext {
        &self.ctx
    }
    pub fn value(&self) -> &TowerElement {
        &self.w
    }
    pub fn period(&self) -> i64 {
        self.period
    }

    /// `det[d a_i / d T_j] * w` modulo `pi_L^period`.
    pub fn apply(&self, a: &[TowerElement]) -> Result<TowerElement> {
        let j = self.ctx.jacobian_det(a)?;
        Ok(j.mul(&self.w)?.with_prec(self.period))
    }
}
