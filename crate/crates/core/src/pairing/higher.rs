//! Formulas built from logarithmic Jacobians on `L{{T_1}}...{{T_{d-1}}}`:
//! the Kolyvagin type formula with an auxiliary level `t`, its Lubin-Tate
//! form `QL_s`, the Iwasawa type formula on `K_n{{T}}` and the Artin-Hasse
//! type formulas for `{u_1, ..., u_{d-1}, e_{g,n}}` and `{u_1, ..., zeta}`.
//!
//! The value of a kernel `D` on `x` is `T(D * l_F(x))`, read mod `p^n`,
//! where `T` is the constant coefficient followed by the trace to `Q_p`.

use num_bigint::BigInt;

use super::plan::PairingPlan;
use super::{coordinate, index_span, rewindow, PairingValue, Wide};
use crate::derivations::DerivationContext;
use crate::error::{Error, Result};
use crate::formal_groups::{torsion_points, FglSource, FormalGroupLaw, TorsionData};
use crate::laurent_tower::{det_with, Tower, TowerElement, WindowPolicy};
use crate::local_field::{is_exact, BaseElement, Field, EXACT};
use crate::series::floor_log;
use crate::series::Tail;
use crate::symbols::MilnorSymbol;

/// Which Artin-Hasse type formula to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AhVariant {
    /// `{u_1, ..., u_{d-1}, e_{g,n}}` with kernel `1/(xi^n l_g'(e_{g,n}) e_{g,n})`.
    TorsionPoint,
    /// `{u_1, ..., u_{d-1}, zeta_{p^n}}` with kernel `1/p^n`.
    RootOfUnity,
}

const ATTEMPTS: u32 = 4;

/// State shared by the pieces of one evaluation.
struct Work {
    wide: Tower,
    ctx: DerivationContext,
    prec: i64,
}

impl Work {
    fn field(&self) -> &Field {
        self.wide.base()
    }

    fn import(&self, x: &TowerElement) -> Result<TowerElement> {
        let y = rewindow(x, &self.wide)?;
        Ok(if is_exact(y.prec()) { y.with_prec(self.prec) } else { y.with_prec(y.prec().min(self.prec)) })
    }

    fn constant(&self, c: &BaseElement) -> TowerElement {
        TowerElement::from_base(&self.wide, c)
    }

    /// `T_1 ... T_{d-1}`.
    fn t_product(&self) -> TowerElement {
        let idx = vec![1; self.wide.vars()];
        TowerElement::monomial(&self.wide, &BaseElement::one(self.field(), EXACT), idx).expect("window holds T")
    }

    fn pi_inverse(&self) -> Result<BaseElement> {
        BaseElement::uniformizer(self.field(), self.prec + 2).inv()
    }

    /// `a = pi^k u`: returns `k` and the row `d log a / d T_j`, using
    /// `d log a = k d pi / pi + d u / u`.
    fn log_row(&self, a: &TowerElement, cols: usize) -> Result<Vec<TowerElement>> {
        let a = self.import(a)?;
        let k = a.valuation()?;
        let pi_inv = self.pi_inverse()?;
        let u = if k >= 0 {
            a.scale(&pi_inv.pow(k)?)
        } else {
            a.scale(&BaseElement::uniformizer(self.field(), EXACT).pow(-k)?)
        };
        let u_inv = u.inv_truncated()?;
        let d = self.wide.dim();
        let mut row = Vec::with_capacity(cols);
        for j in 1..=cols {
            let mut r = self.ctx.partial_derivative(&u, j)?.mul_truncated(&u_inv);
            if j == d && k != 0 {
                r = r.add(&self.constant(&pi_inv.mul_int(k)));
            }
            row.push(r);
        }
        Ok(row)
    }

    /// `sum_f exp_f det[d log a_i / d T_j]`.
    fn dlog_symbol(&self, alpha: &MilnorSymbol) -> Result<TowerElement> {
        let d = self.wide.dim();
        let mut acc = TowerElement::zero(&self.wide, EXACT);
        for f in alpha.factors() {
            let rows = f.entries.iter().map(|a| self.log_row(a, d)).collect::<Result<Vec<_>>>()?;
            let det = det_with(&rows, WindowPolicy::Truncate)?;
            acc = acc.add(&det.mul_int(f.exp));
        }
        Ok(acc)
    }

    /// `l_F'(e)`; the derivative of the logarithm is an integral series.
    fn log_derivative(&self, law: &FormalGroupLaw, e: &BaseElement) -> Result<BaseElement> {
        if law.source() == FglSource::Multiplicative {
            return BaseElement::one(self.field(), EXACT).add(e).with_prec(self.prec).inv();
        }
        let v = e.valuation()?;
        let deg = (self.prec / v + 1) as usize;
        let dl = law.log_series(deg + 1)?.derivative();
        eval_integral(dl.coeffs(), &e.with_prec(self.prec), deg)
    }
}

/// `sum_{k <= deg} c_k x^k` for integral `c_k` by baby steps and giant
/// steps; the omitted terms have valuation above `(deg + 1) v(x)`.
fn eval_integral(coeffs: &[BaseElement], x: &BaseElement, deg: usize) -> Result<BaseElement> {
    let field = x.field().clone();
    let deg = deg.min(coeffs.len() - 1);
    let coeffs = coeffs[..=deg].iter().map(|c| c.embed(&field)).collect::<Result<Vec<_>>>()?;
    let b = ((deg + 1) as f64).sqrt().ceil() as usize;
    let mut pows = vec![BaseElement::one(&field, EXACT)];
    for i in 1..=b {
        pows.push(pows[i - 1].mul(x));
    }
    let giant = pows[b].clone();
    let mut acc = BaseElement::zero(&field, EXACT);
    for chunk in coeffs.chunks(b).rev() {
        let mut part = BaseElement::zero(&field, EXACT);
        for (c, xp) in chunk.iter().zip(&pows) {
            part = part.add(&c.mul(xp));
        }
        acc = acc.mul(&giant).add(&part);
    }
    let bound = (deg as i64 + 1) * x.val_or_prec();
    Ok(acc.with_prec(bound.min(x.prec())))
}

/// `K = Q_p` and `pi = p`, so that torsion lives in cyclotomic fields.
fn require_cyclotomic_law(law: &FormalGroupLaw) -> Result<()> {
    let k = law.field();
    if k.degree() != 1 {
        return Err(Error::Unsupported("the higher formulas are implemented over K = Q_p".into()));
    }
    let pi = law.pi().ok_or_else(|| Error::Unsupported("the law has no Lubin-Tate structure".into()))?;
    let p = BaseElement::from_int(k, k.p() as i64, EXACT);
    if !pi.eq_mod(&p, law.prec()) {
        return Err(Error::Unsupported("torsion of laws with pi != p is not cyclotomic".into()));
    }
    Ok(())
}

/// `e_{f,s}` in `ambient`: the supplied torsion data, the closed form for the
/// multiplicative law, or the image of `zeta_{p^s} - 1` under `[1]_{f,m}`.
fn torsion_point(
    law: &FormalGroupLaw,
    s: u32,
    ambient: &Field,
    prec: i64,
    torsion: Option<&TorsionData>,
) -> Result<BaseElement> {
    if let Some(td) = torsion {
        if td.level() != s || td.ambient() != ambient {
            return Err(Error::Config(format!("torsion data must be of level {s} in the coefficient field")));
        }
        return Ok(td.points()[0].clone());
    }
    require_cyclotomic_law(law)?;
    let closed = law.source() == FglSource::Multiplicative;
    let data = if closed {
        torsion_points(law, s, ambient, None)
    } else {
        match torsion_points(law, s, ambient, None) {
            Ok(d) => Ok(d),
            Err(Error::AmbientTooSmall(_)) => {
                let k = law.field();
                let mult = FormalGroupLaw::multiplicative(k, law.dmax(), law.prec());
                let theta = law.isomorphism_series(&mult, prec as usize + 2)?.with_tail(Tail::Integral);
                let z = BaseElement::zeta(ambient, prec)?;
                let level = ambient.cyclotomic_level().unwrap_or(0);
                let p = BigInt::from(ambient.p());
                let zs = z.pow_u(&num_traits::pow(p, (level - s) as usize));
                let seed = theta.eval(&zs.sub(&BaseElement::one(ambient, EXACT)))?;
                torsion_points(law, s, ambient, Some(&seed))
            }
            Err(e) => Err(e),
        }
    }?;
    Ok(data.points()[0].clone())
}

/// Cyclotomic level `r` of the coefficient field, with `L = K_r`.
fn cyclotomic_level(field: &Field) -> Result<u32> {
    if field.degree() == 1 {
        return Ok(0);
    }
    field
        .cyclotomic_level()
        .ok_or_else(|| Error::Unsupported("the coefficient field must be Q_p(zeta_{p^r})".into()))
}

/// Evaluate `T(body * l_F(x))` mod `p^n`, raising the working precision
/// until the result is determined.
fn evaluate<B>(m: &Tower, span: i64, x: &TowerElement, law: &FormalGroupLaw, n: u32, start: i64, body: B) -> Result<PairingValue>
where
    B: Fn(&Work) -> Result<TowerElement>,
{
    let base = m.base().clone();
    let qp = base.subfield(0);
    let span = span.max(index_span(x)) + 1;
    let mut last = Error::PrecisionExhausted("no attempt made".into());
    for attempt in 0..ATTEMPTS {
        let prec = start << attempt;
        let wide = m.with_window((span * (prec + 8)).max(64));
        let ctx = DerivationContext::over_qp(&wide, prec)?;
        let work = Work { wide, ctx, prec };
        let kernel = body(&work)?;
        let xw = work.import(x)?;
        let v = xw.valuation()?;
        if v < 1 {
            return Err(Error::NotInMaximalIdeal);
        }
        let e = base.e();
        let deg = ((prec + e * (floor_log(base.p(), prec as u64) + 2)) / v + 2) as usize;
        let lx = law.log_series(deg)?.eval(&Wide(xw))?.0;
        let z = kernel.mul_truncated(&lx).generalized_trace(&qp)?;
        match coordinate(&z, n) {
            Ok(c) => return Ok(PairingValue::new(base.p(), n, vec![c])),
            Err(err @ Error::PrecisionExhausted(_)) => last = err,
            Err(err) => return Err(err),
        }
    }
    Err(last)
}

fn symbol_span(alpha: &MilnorSymbol) -> i64 {
    alpha.factors().iter().flat_map(|f| f.entries.iter().map(index_span)).max().unwrap_or(0)
}

/// Starting precision in units of the coefficient field of `m`.
fn start_prec(m: &Tower, n: u32, s: u32) -> Result<i64> {
    let base = m.base();
    let diff = base.different_valuation(&base.subfield(0))?;
    Ok((n + s + 2) as i64 * base.e() + 2 * diff + 16)
}

/// `1 / (l'(e) de/dT_d)` times `num`.
fn torsion_kernel(w: &Work, law: &FormalGroupLaw, e: &BaseElement, num: &BaseElement) -> Result<BaseElement> {
    let lp = w.log_derivative(law, e)?;
    let de = w.ctx.base_derivative(&e.with_prec(w.prec))?;
    num.divide(&lp.mul(&de))
}

fn check_x_tower(x: &TowerElement, m: &Tower) -> Result<()> {
    if x.tower().vars() != m.vars() {
        return Err(Error::AmbientMismatch);
    }
    if m.base().member_level(x.tower().base()).is_none() {
        return Err(Error::NotASubfield("x must lie in a subfield of the symbol's field".into()));
    }
    Ok(())
}

/// `QL_s(alpha) l_F(x)` read through the generalized trace: the Lubin-Tate
/// formula on `L_s = L(kappa_s)`. The symbol lives over `L_s`, `x` over `L`;
/// `s >= max(r, n + r + log_p e(L/K_r))` where `L ∩ K_infinity = K_r`.
pub fn lubin_tate_wiles(
    alpha: &MilnorSymbol,
    x: &TowerElement,
    s: u32,
    n: u32,
    law: &FormalGroupLaw,
    torsion: Option<&TorsionData>,
) -> Result<PairingValue> {
    let m = alpha.tower().clone();
    check_x_tower(x, &m)?;
    let l = x.tower().base().clone();
    let r = cyclotomic_level(&l)?;
    if r < n || n == 0 {
        return Err(Error::TorsionMissing(format!("L must contain the level {n} torsion")));
    }
    let ls = cyclotomic_level(m.base())?;
    if ls != s {
        return Err(Error::PlanInvalid(format!("the symbol must live over L_s with s = {s}, found level {ls}")));
    }
    let e_rel = if r == 0 { l.e() } else { l.e() / ((l.p() as i64 - 1) * (l.p() as i64).pow(r - 1)) };
    let room = s as i64 - n as i64 - r as i64;
    if room < 0 || (l.p() as i64).checked_pow(room as u32).map_or(false, |q| q < e_rel) {
        return Err(Error::PlanInvalid(format!("s = {s} is below n + r + log_p e(L/K_r)")));
    }
    require_cyclotomic_law(law)?;
    let start = start_prec(&m, n, s)?;
    evaluate(&m, symbol_span(alpha), x, law, n, start, |w| {
        let e = torsion_point(law, s, w.field(), w.prec, torsion)?;
        let ps = BaseElement::one(w.field(), EXACT).mul_p_pow(s as i64);
        let k = torsion_kernel(w, law, &e, &BaseElement::one(w.field(), EXACT))?.divide(&ps)?;
        Ok(w.dlog_symbol(alpha)?.mul_truncated(&w.t_product()).scale(&k))
    })
}

/// The Iwasawa type formula on `L = K_n{{T_1}}...{{T_{d-1}}}`, valid for
/// `v_L(x) >= 2 v_L(p) / (p - 1)`.
pub fn iwasawa_gen_higher(alpha: &MilnorSymbol, x: &TowerElement, n: u32, law: &FormalGroupLaw) -> Result<PairingValue> {
    let m = alpha.tower().clone();
    check_x_tower(x, &m)?;
    let r = cyclotomic_level(m.base())?;
    if r != n || n == 0 {
        return Err(Error::DomainViolation(format!("the formula needs L = K_{n}")));
    }
    require_cyclotomic_law(law)?;
    let xm = x.embed(&m.with_window(x.tower().window()))?;
    let bound = 2 * m.base().e();
    let q1 = law.q() as i64 - 1;
    if !xm.is_zero() && xm.val_or_prec() * q1 < bound {
        return Err(Error::DomainViolation(format!("v_L(x) must be at least 2 v_L(p)/(q-1) = {}", bound / q1)));
    }
    let start = start_prec(&m, n, n)?;
    evaluate(&m, symbol_span(alpha), x, law, n, start, |w| {
        let e = torsion_point(law, n, w.field(), w.prec, None)?;
        let pn = BaseElement::one(w.field(), EXACT).mul_p_pow(n as i64);
        let k = torsion_kernel(w, law, &e, &BaseElement::one(w.field(), EXACT))?.divide(&pn)?;
        Ok(w.dlog_symbol(alpha)?.mul_truncated(&w.t_product()).scale(&k))
    })
}

/// The Kolyvagin type formula: the symbol lives over `M = L_t`, the result
/// is the pairing of its norm to `L` with `x`. `cbar` defaults to the
/// Lubin-Tate value `-1/pi^t`.
pub fn kolyvagin_pairing(
    alpha: &MilnorSymbol,
    x: &TowerElement,
    plan: &PairingPlan,
    law: &FormalGroupLaw,
    torsion: Option<&TorsionData>,
    cbar: Option<&BaseElement>,
) -> Result<PairingValue> {
    if !plan.is_admissible() {
        return Err(Error::PlanInvalid("(k, t) is not admissible".into()));
    }
    let t = plan.level()?;
    let n = plan.n;
    let m = alpha.tower().clone();
    check_x_tower(x, &m)?;
    let r = cyclotomic_level(x.tower().base())?;
    if r < n {
        return Err(Error::TorsionMissing(format!("L must contain the level {n} torsion")));
    }
    if cyclotomic_level(m.base())? != t {
        return Err(Error::PlanInvalid(format!("the symbol must live over M = L_t with t = {t}")));
    }
    if cbar.is_none() && law.pi().is_none() {
        return Err(Error::InvariantMissing("no closed form for cbar; supply it".into()));
    }
    require_cyclotomic_law(law)?;
    let start = start_prec(&m, n, t)?;
    evaluate(&m, symbol_span(alpha), x, law, n, start, |w| {
        let e = torsion_point(law, t, w.field(), w.prec, torsion)?;
        let c = match cbar {
            Some(c) => c.embed(w.field())?.with_prec(c.prec().min(w.prec * 4)),
            None => {
                let pt = BaseElement::one(w.field(), EXACT).mul_p_pow(t as i64);
                BaseElement::one(w.field(), EXACT).divide(&pt)?.neg()
            }
        };
        let k = torsion_kernel(w, law, &e, &c.neg())?;
        Ok(w.dlog_symbol(alpha)?.mul_truncated(&w.t_product()).scale(&k))
    })
}

/// The Artin-Hasse type formulas on `L = K_n{{T_1}}...{{T_{d-1}}}` for
/// symbols `{u_1, ..., u_{d-1}, e_{g,n}}` and `{u_1, ..., u_{d-1}, zeta}`.
/// `g` defaults to `f`; `xi` defaults to `pi` and only enters the first form.
pub fn artin_hasse_higher(
    u: &[TowerElement],
    x: &TowerElement,
    n: u32,
    f: &FormalGroupLaw,
    g: Option<&FormalGroupLaw>,
    xi: Option<&BaseElement>,
    variant: AhVariant,
) -> Result<PairingValue> {
    let first = u.first().ok_or_else(|| Error::Config("at least one unit is needed when d > 1; use d = 1 otherwise".into()));
    let m = match first {
        Ok(a) => a.tower().clone(),
        Err(_) => x.tower().clone(),
    };
    if u.len() + 1 != m.dim() {
        return Err(Error::Config(format!("expected {} units, got {}", m.dim() - 1, u.len())));
    }
    for a in u {
        if a.tower().vars() != m.vars() || a.tower().base() != m.base() {
            return Err(Error::AmbientMismatch);
        }
        if a.valuation()? != 0 {
            return Err(Error::DomainViolation("the u_i must be units".into()));
        }
    }
    check_x_tower(x, &m)?;
    if cyclotomic_level(m.base())? != n || n == 0 {
        return Err(Error::DomainViolation(format!("the formula needs L = K_{n}")));
    }
    let g = g.unwrap_or(f);
    require_cyclotomic_law(f)?;
    require_cyclotomic_law(g)?;
    let span = u.iter().map(index_span).max().unwrap_or(0);
    let start = start_prec(&m, n, n)?;
    evaluate(&m, span, x, f, n, start, |w| {
        let cols = u.len();
        let det = if cols == 0 {
            TowerElement::one(&w.wide)
        } else {
            let rows = u.iter().map(|a| w.log_row(a, cols)).collect::<Result<Vec<_>>>()?;
            det_with(&rows, WindowPolicy::Truncate)?
        };
        let one = BaseElement::one(w.field(), EXACT);
        let k = match variant {
            AhVariant::RootOfUnity => one.mul_p_pow(-(n as i64)),
            AhVariant::TorsionPoint => {
                let e = torsion_point(g, n, w.field(), w.prec, None)?;
                let xi_n = match xi {
                    Some(x) => x.embed(w.field())?.pow(n as i64)?,
                    None => g.pi().expect("checked").embed(w.field())?.pow(n as i64)?,
                };
                let lp = w.log_derivative(g, &e)?;
                one.divide(&xi_n.mul(&lp).mul(&e.with_prec(w.prec)))?
            }
        };
        Ok(det.mul_truncated(&w.t_product()).scale(&k))
    })
}

/// Solve `Tr_{M/Q_p}(log(u_j) c) = z_j` for `c` in `M`, given exactly known
/// values `z_j` of the pairing on a spanning family of principal units.
/// The values must come from outside; this only performs the linear algebra.
pub fn fit_invariant(us: &[BaseElement], values: &[BaseElement]) -> Result<BaseElement> {
    let field = us.first().ok_or_else(|| Error::Config("no samples".into()))?.field().clone();
    let qp = field.subfield(0);
    let dim = field.degree();
    if us.len() < dim || values.len() != us.len() {
        return Err(Error::Config(format!("need at least {dim} samples with one value each")));
    }
    let basis: Vec<BaseElement> = (0..dim)
        .map(|i| {
            let mut c = vec![BigInt::from(0); dim];
            c[i] = BigInt::from(1);
            BaseElement::from_coords(&field, c, 0, EXACT)
        })
        .collect();
    let mut rows = Vec::new();
    for (u, z) in us.iter().zip(values) {
        let x = u.sub(&BaseElement::one(&field, EXACT));
        if x.val_or_prec() < 1 {
            return Err(Error::DomainViolation("samples must be principal units".into()));
        }
        let prec = if is_exact(u.prec()) { 64 * field.e() } else { u.prec() };
        let lg = super::log1p_series(&qp, (prec / x.valuation()? + 2) as usize, prec)?.eval(&x.with_prec(prec))?;
        let mut row = basis.iter().map(|b| lg.mul(b).trace(&qp)).collect::<Result<Vec<_>>>()?;
        row.push(z.restrict(&qp)?);
        rows.push(row);
    }
    let sol = solve_qp(rows, dim)?;
    Ok(sol.iter().zip(&basis).fold(BaseElement::zero(&field, EXACT), |acc, (c, b)| acc.add(&c.embed(&field).expect("member").mul(b))))
}

/// Gaussian elimination over `Q_p` on an augmented matrix with `dim`
/// unknowns, pivoting on the least valuation.
fn solve_qp(mut rows: Vec<Vec<BaseElement>>, dim: usize) -> Result<Vec<BaseElement>> {
    for col in 0..dim {
        let piv = (col..rows.len())
            .filter(|&r| !rows[r][col].is_zero())
            .min_by_key(|&r| rows[r][col].val_or_prec())
            .ok_or_else(|| Error::PrecisionExhausted("samples do not span".into()))?;
        rows.swap(col, piv);
        let inv = rows[col][col].inv()?;
        let pivot_row: Vec<BaseElement> = rows[col].iter().map(|c| c.mul(&inv)).collect();
        rows[col] = pivot_row.clone();
        for r in 0..rows.len() {
            if r != col && !rows[r][col].is_zero() {
                let f = rows[r][col].clone();
                for c in col..=dim {
                    rows[r][c] = rows[r][c].sub(&f.mul(&pivot_row[c]));
                }
            }
        }
    }
    Ok((0..dim).map(|i| rows[i][dim].clone()).collect())
}
