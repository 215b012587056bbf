//! Choice of the levels `m`, `k` and `t = 2k + rho + 1` for the Kolyvagin
//! type formula, in exact rational arithmetic.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formal_groups::{FglSource, FormalGroupLaw};
use crate::laurent_tower::Tower;
use crate::local_field::Field;

/// What the planner needs to know about the formal group: the field `K` it
/// is defined over (taken as the base `S` of the constants), the residue
/// size `q` and the height. `c1` overrides the closed form.
#[derive(Clone, Debug)]
pub struct FglMeta {
    pub field: Field,
    pub q: BigInt,
    pub height: Option<u32>,
    pub c1: Option<BigRational>,
}

impl FglMeta {
    pub fn from_law(fgl: &FormalGroupLaw) -> Self {
        let height = match fgl.source() {
            FglSource::LubinTate | FglSource::Multiplicative => fgl.height(),
            _ => None,
        };
        FglMeta { field: fgl.field().clone(), q: BigInt::from(fgl.q()), height, c1: None }
    }

    pub fn with_c1(mut self, c1: BigRational) -> Self {
        self.c1 = Some(c1);
        self
    }

    fn rho(&self) -> i64 {
        self.field.e()
    }
}

/// Levels and constants of one evaluation of the Kolyvagin type formula.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairingPlan {
    pub n: u32,
    pub m: i64,
    pub k: i64,
    pub t: i64,
    pub rho: i64,
    pub c1: BigRational,
    pub c2: BigRational,
    /// `v(D(L/K))` normalized by `v(p) = 1`.
    pub different: BigRational,
    /// Integer `kappa` with `t - 1 - k >= rho * kappa >= k`.
    pub kappa: i64,
    /// Whether the sufficient conditions on `k` hold. Custom plans with a
    /// smaller `t` are evaluated but flagged.
    pub certified: bool,
    /// Cyclotomic level of the auxiliary field `M = L_t` when `L` is cyclotomic.
    pub aux_level: Option<u32>,
    /// `[M : Q_p]` when known.
    pub aux_degree: Option<BigInt>,
}

/// An integer `kappa` with `t - 1 - k >= rho * kappa >= k`, if any.
pub fn admissible_witness(k: i64, t: i64, rho: i64) -> Option<i64> {
    if rho <= 0 {
        return None;
    }
    let kappa = Integer::div_ceil(&k, &rho);
    (rho * kappa <= t - 1 - k && rho * kappa >= k).then_some(kappa)
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `floor(rho log_p(E/(p-1)) + rho/(p-1))`: the largest `M` with
/// `p^{M(p-1) - rho} (p-1)^{rho(p-1)} <= E^{rho(p-1)}`.
fn floor_m_term(p: i64, rho: i64, e_l: i64) -> i64 {
    let b = (rho * (p - 1)) as usize;
    let holds = |m: i64| -> bool {
        let a = m * (p - 1) - rho;
        let pb = BigInt::from(p);
        let (mut lhs, mut rhs) = (num_traits::pow(BigInt::from(p - 1), b), num_traits::pow(BigInt::from(e_l), b));
        if a >= 0 {
            lhs *= num_traits::pow(pb, a as usize);
        } else {
            rhs *= num_traits::pow(pb, (-a) as usize);
        }
        lhs <= rhs
    };
    let mut m = -rho - 1;
    while !holds(m) {
        m -= 1;
    }
    while holds(m + 1) {
        m += 1;
    }
    m
}

/// `2^r >= t` for a rational `r >= 0`.
fn two_pow_at_least(r: &BigRational, t: i64) -> bool {
    if r.is_negative() {
        return false;
    }
    let (a, b) = (r.numer(), r.denom());
    let (Some(a), Some(b)) = (a.to_usize(), b.to_usize()) else {
        return true;
    };
    num_traits::pow(BigInt::from(2), a) >= num_traits::pow(BigInt::from(t), b)
}

struct Constants {
    rho: i64,
    m: i64,
    c1: BigRational,
    c2: BigRational,
    different: BigRational,
    aux: Option<u32>,
    base: Field,
}

fn constants(n: u32, tower: &Tower, meta: &FglMeta) -> Result<Constants> {
    let l = tower.base();
    let p = l.p() as i64;
    let rho = meta.rho();
    if l.member_level(&meta.field).is_none() {
        return Err(Error::NotASubfield("the law's field is not a member of the coefficient field".into()));
    }
    let m = n as i64 + 2 + floor_m_term(p, rho, l.e());
    let q = BigRational::from_integer(meta.q.clone());
    let c1 = match (&meta.c1, meta.height) {
        (Some(c), _) => c.clone(),
        (None, Some(h)) => {
            let qh = num_traits::pow(meta.q.clone(), h as usize);
            BigRational::new(BigInt::one(), BigInt::from(rho) * (qh - 1))
        }
        (None, None) => {
            return Err(Error::UnramifiedAssumptionViolated(
                "no closed form for c1 without a Lubin-Tate height; supply c1".into(),
            ))
        }
    };
    let one = BigRational::one();
    let pm1 = rat(p - 1, 1);
    let v_pi = rat(1, rho);
    let d_lt = (rat(2 * rho - 1, 1) - &one / (&q - &one)) / rat(rho, 1);
    let c2 = rat(2, p - 1) + rat(2 * p, 1) * &v_pi / (&pm1 * &pm1) + d_lt;
    let different = rat(l.different_valuation(&meta.field)?, l.e());
    Ok(Constants { rho, m, c1, c2, different, aux: l.cyclotomic_level(), base: l.clone() })
}

impl Constants {
    /// The sufficient condition on `k` together with the lower bound on `k`.
    fn k_ok(&self, p: i64, k: i64) -> bool {
        let t = 2 * k + self.rho + 1;
        let r = (rat(k - self.m, self.rho) - &self.c1 - &self.c2 - &self.different) * rat(p - 1, 1);
        let petello = BigRational::from_integer(BigInt::from(k + self.rho + 1)) >= &self.c1 * rat(self.rho, 1);
        petello && two_pow_at_least(&r, t)
    }

    fn plan(self, n: u32, k: i64, t: i64, certified: bool) -> Result<PairingPlan> {
        let kappa = admissible_witness(k, t, self.rho)
            .ok_or_else(|| Error::PlanInvalid(format!("(k, t) = ({k}, {t}) is not admissible")))?;
        let p = self.base.p();
        let (aux_level, aux_degree) = match self.aux {
            Some(r) if t >= r as i64 => {
                let lt = t as u32;
                let deg = BigInt::from(p - 1) * num_traits::pow(BigInt::from(p), lt as usize - 1);
                (Some(lt), Some(deg))
            }
            Some(_) => (self.aux, Some(BigInt::from(self.base.degree()))),
            None => (None, None),
        };
        Ok(PairingPlan {
            n,
            m: self.m,
            k,
            t,
            rho: self.rho,
            c1: self.c1,
            c2: self.c2,
            different: self.different,
            kappa,
            certified,
            aux_level,
            aux_degree,
        })
    }
}

/// Smallest `m`, then smallest `k`, satisfying the sufficient conditions,
/// with `t = 2k + rho + 1`.
pub fn plan_parameters(n: u32, tower: &Tower, meta: &FglMeta) -> Result<PairingPlan> {
    if n == 0 {
        return Err(Error::Config("level must be positive".into()));
    }
    let c = constants(n, tower, meta)?;
    let p = tower.base().p() as i64;
    let mut k = c.m.max(0);
    while !c.k_ok(p, k) {
        k += 1;
        if k > 1 << 20 {
            return Err(Error::PlanInvalid("no k found below 2^20".into()));
        }
    }
    let t = 2 * k + c.rho + 1;
    c.plan(n, k, t, true)
}

impl PairingPlan {
    /// A plan with user chosen `(k, t)`; `m` and the constants are still
    /// computed. The pair must be admissible; `certified` records whether
    /// the sufficient conditions hold.
    pub fn custom(n: u32, tower: &Tower, meta: &FglMeta, k: i64, t: i64) -> Result<Self> {
        let c = constants(n, tower, meta)?;
        let p = tower.base().p() as i64;
        let certified = t == 2 * k + c.rho + 1 && c.k_ok(p, k);
        c.plan(n, k, t, certified)
    }

    /// The auxiliary cyclotomic level `t` as a field level.
    pub fn level(&self) -> Result<u32> {
        u32::try_from(self.t).map_err(|_| Error::PlanInvalid("t out of range".into()))
    }

    /// Whether the stored witness still certifies admissibility.
    pub fn is_admissible(&self) -> bool {
        self.rho * self.kappa <= self.t - 1 - self.k && self.rho * self.kappa >= self.k
    }
}
