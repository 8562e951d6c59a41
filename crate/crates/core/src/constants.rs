//! Remainder constants of the large-`N` expansion, Euler sums and the monotonicity checks.
//!
//! Every constant is rebuilt from its defining formula in interval arithmetic at
//! `α₀ = 1/20` and audited against the published bound in a [`LedgerRow`].

use std::sync::OnceLock;

use crate::certify::SigmaEnclosure;
use crate::error::{Error, Result};
use crate::interval::{Dir, Endpoint, Interval, Mp, Precision};
use crate::weights::{alpha0, vm_constants, VmConstants};

/// First `N` covered by the asymptotic band.
pub const ASYMPTOTIC_N: u32 = 20;

/// A log-power sum `(p, q) ↦ Σ (1 + log m)^q m^{-p}`, bound or closed form.
type LogSum<S> = dyn Fn(&Interval<S>, u32) -> Result<Interval<S>>;

#[derive(Clone, Debug)]
pub struct ExpansionCoeffs<S: Endpoint> {
    /// `2ζ(3)`
    pub c3: Interval<S>,
    /// `8ζ(4)`
    pub c4: Interval<S>,
    /// `26ζ(5)`
    pub c5: Interval<S>,
}

impl<S: Endpoint> ExpansionCoeffs<S> {
    pub fn new(ctx: S::Ctx) -> Result<Self> {
        let z = |k: i64| Interval::<S>::from_i64(k, ctx).zeta();
        Ok(Self { c3: z(3)?.mul_i64(2), c4: z(4)?.mul_i64(8), c5: z(5)?.mul_i64(26) })
    }
}

/// `M(p, q) = max(2, ⌈exp(q/p - 1)⌉)`, beyond which `(1 + log x)^q x^{-p}` decreases.
pub fn log_sum_threshold<S: Endpoint>(p: &Interval<S>, q: u32) -> Result<u64> {
    let ctx = p.ctx();
    let e = (&Interval::<S>::from_i64(q as i64, ctx).div(p)? - &Interval::one(ctx)).exp();
    let t = e.hi_f64().ceil();
    if !t.is_finite() || t > 1e15 {
        return Err(Error::DomainViolation(format!("log-sum threshold {t} is out of range")));
    }
    Ok((t as u64).max(2))
}

/// `∫_M^∞ (1 + log x)^q x^{-p} dx = q!/(p-1)^{q+1} M^{-(p-1)} Σ_{k≤q} ((p-1)(1 + log M))^k/k!`.
pub fn log_integral_tail<S: Endpoint>(p: &Interval<S>, q: u32, m: u64) -> Result<Interval<S>> {
    let ctx = p.ctx();
    if !p.lo().gt_one() {
        return Err(Error::DomainViolation("log-sum exponent must exceed 1".into()));
    }
    if m == 0 {
        return Err(Error::InvalidInput("tail start must be at least 1".into()));
    }
    let b = p - &Interval::one(ctx);
    let mm = Interval::<S>::from_i64(m as i64, ctx);
    let a = &b * &(&Interval::one(ctx) + &mm.ln()?);
    let mut term = Interval::one(ctx);
    let mut sum = Interval::one(ctx);
    let mut fact = Interval::one(ctx);
    for k in 1..=q as i64 {
        term = (&term * &a).div_i64(k)?;
        sum = &sum + &term;
        fact = fact.mul_i64(k);
    }
    let pref = fact.div(&b.powi(q + 1))?;
    Ok(&(&pref * &mm.pow(&(-b))?) * &sum)
}

fn log_head<S: Endpoint>(p: &Interval<S>, q: u32, m: u64) -> Result<Interval<S>> {
    let ctx = p.ctx();
    let mut s = Interval::zero(ctx);
    for k in 1..=m {
        let kk = Interval::<S>::from_i64(k as i64, ctx);
        let l = (&Interval::one(ctx) + &kk.ln()?).powi(q);
        s = &s + &l.div(&kk.pow(p)?)?;
    }
    Ok(s)
}

/// Upper bound for `Σ_{m≥1} (1 + log m)^q m^{-p}`: head to `M(p, q)` plus the tail integral.
pub fn log_sum_bound<S: Endpoint>(p: &Interval<S>, q: u32) -> Result<Interval<S>> {
    if !p.lo().gt_one() {
        return Err(Error::DomainViolation("log-sum exponent must exceed 1".into()));
    }
    let m = log_sum_threshold(p, q)?;
    Ok(&log_head(p, q, m)? + &log_integral_tail(p, q, m)?)
}

/// The same head with the cruder tail `Σ_{j≤q} C(q,j) j!/(p-1)^{j+1}`; kept for audit rows.
pub fn log_sum_closed_form<S: Endpoint>(p: &Interval<S>, q: u32) -> Result<Interval<S>> {
    if !p.lo().gt_one() {
        return Err(Error::DomainViolation("log-sum exponent must exceed 1".into()));
    }
    let ctx = p.ctx();
    let m = log_sum_threshold(p, q)?;
    let b = p - &Interval::one(ctx);
    let mut tail = Interval::zero(ctx);
    let mut falling = Interval::one(ctx); // q!/(q-j)! = C(q,j) j!
    for j in 0..=q {
        if j > 0 {
            falling = falling.mul_i64((q - j + 1) as i64);
        }
        tail = &tail + &falling.div(&b.powi(j + 1))?;
    }
    Ok(&log_head(p, q, m)? + &tail)
}

trait GtOne {
    fn gt_one(&self) -> bool;
}

impl<S: Endpoint> GtOne for S {
    fn gt_one(&self) -> bool {
        *self > S::from_i64(1, self.ctx(), Dir::Up)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EulerSumId {
    /// `Σ H_{m-1}/m³ = ζ(4)/4`
    W4,
    /// `Σ H_{m-1}/m⁴ = 2ζ(5) - ζ(2)ζ(3)`
    W5a,
    /// `Σ H²_{m-1}/m³ = ζ(2)ζ(3) - 3ζ(5)/2`
    W5b,
    /// `Σ_{m,ℓ≠0, m≠ℓ} 1/(m²ℓ²|m-ℓ|) = 8ζ(2)ζ(3) - 12ζ(5)`
    Double5,
}

impl EulerSumId {
    pub const ALL: [EulerSumId; 4] = [EulerSumId::W4, EulerSumId::W5a, EulerSumId::W5b, EulerSumId::Double5];

    pub fn name(&self) -> &'static str {
        match self {
            EulerSumId::W4 => "w4",
            EulerSumId::W5a => "w5a",
            EulerSumId::W5b => "w5b",
            EulerSumId::Double5 => "double5",
        }
    }
}

#[derive(Clone, Debug)]
pub struct EulerSum<S: Endpoint> {
    pub id: EulerSumId,
    pub closed_form: Interval<S>,
    /// Partial sum plus certified tail.
    pub brute_force: Interval<S>,
    pub terms: u64,
}

impl<S: Endpoint> EulerSum<S> {
    pub fn agrees(&self) -> bool {
        self.closed_form.intersects(&self.brute_force)
    }
}

pub const EULER_TERMS: u64 = 1_000_000;

pub fn euler_closed_form<S: Endpoint>(id: EulerSumId, ctx: S::Ctx) -> Result<Interval<S>> {
    let z = |k: i64| Interval::<S>::from_i64(k, ctx).zeta();
    let (z2, z3, z5) = (z(2)?, z(3)?, z(5)?);
    let z23 = &z2 * &z3;
    Ok(match id {
        EulerSumId::W4 => z(4)?.div_i64(4)?,
        EulerSumId::W5a => &z5.mul_i64(2) - &z23,
        EulerSumId::W5b => &z23 - &z5.mul_i64(3).div_i64(2)?,
        EulerSumId::Double5 => &z23.mul_i64(8) - &z5.mul_i64(12),
    })
}

/// Partial sums over `m ≤ terms` with integral-comparison tails.
///
/// The double sum is summed row by row: for `m > 0` the rows combine into
/// `2 Σ_m [2H_{m-1}/m² + (2H⁽²⁾_{m-1} + 1/m²)/m] / m²`.
pub fn euler_brute_force<S: Endpoint>(id: EulerSumId, terms: u64, ctx: S::Ctx) -> Result<Interval<S>> {
    if terms < 2 {
        return Err(Error::InvalidInput("at least two terms are needed".into()));
    }
    let one = Interval::<S>::one(ctx);
    let mut h = Interval::zero(ctx); // H_{m-1}
    let mut h2 = Interval::zero(ctx); // H⁽²⁾_{m-1}
    let mut s = Interval::zero(ctx);
    for m in 1..=terms {
        let inv = Interval::<S>::from_i64(m as i64, ctx).recip()?;
        let inv2 = inv.sqr();
        let inv3 = &inv2 * &inv;
        let term = match id {
            EulerSumId::W4 => &h * &inv3,
            EulerSumId::W5a => &(&h * &inv3) * &inv,
            EulerSumId::W5b => &h.sqr() * &inv3,
            EulerSumId::Double5 => {
                let row = &(&h.mul_i64(2) * &inv2) + &(&(&h2.mul_i64(2) + &inv2) * &inv);
                &row * &inv2
            }
        };
        s = &s + &term;
        h = &h + &inv;
        h2 = &h2 + &inv2;
    }
    let p = |k: i64| Interval::<S>::from_i64(k, ctx);
    // H_{m-1} ≤ 1 + log m and H⁽²⁾_{m-1} ≤ ζ(2)
    let tail = match id {
        EulerSumId::W4 => log_integral_tail(&p(3), 1, terms)?,
        EulerSumId::W5a => log_integral_tail(&p(4), 1, terms)?,
        EulerSumId::W5b => log_integral_tail(&p(3), 2, terms)?,
        EulerSumId::Double5 => {
            let cubic = (&p(2).zeta()?.mul_i64(2) + &one).div(&p(terms as i64).sqr().mul_i64(2))?;
            &log_integral_tail(&p(4), 1, terms)?.mul_i64(2) + &cubic
        }
    };
    let s = if id == EulerSumId::Double5 { s.mul_i64(2) } else { s };
    let tail = if id == EulerSumId::Double5 { tail.mul_i64(2) } else { tail };
    Interval::new(s.lo().clone(), (&s + &tail).hi().clone())
}

pub fn euler_sum<S: Endpoint>(id: EulerSumId, terms: u64, ctx: S::Ctx) -> Result<EulerSum<S>> {
    Ok(EulerSum {
        id,
        closed_form: euler_closed_form(id, ctx)?,
        brute_force: euler_brute_force(id, terms, ctx)?,
        terms,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Check {
    /// Value must not exceed the bound.
    AtMost(f64),
    /// Value must lie within `tol` of a printed number.
    Near { value: f64, tol: f64 },
    Info,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Info,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Info => "INFO",
        }
    }
}

#[derive(Clone, Debug)]
pub struct LedgerRow<S: Endpoint> {
    pub name: &'static str,
    pub formula: &'static str,
    pub value: Interval<S>,
    pub check: Check,
    pub status: Status,
}

impl<S: Endpoint> LedgerRow<S> {
    fn new(name: &'static str, formula: &'static str, value: &Interval<S>, check: Check) -> Self {
        let status = match check {
            Check::AtMost(b) => {
                if value.hi_f64() <= b {
                    Status::Pass
                } else {
                    Status::Fail
                }
            }
            Check::Near { value: v, tol } => {
                if value.lo_f64() >= v - tol && value.hi_f64() <= v + tol {
                    Status::Pass
                } else {
                    Status::Fail
                }
            }
            Check::Info => Status::Info,
        };
        Self { name, formula, value: value.clone(), check, status }
    }
}

/// Every remainder constant, rebuilt from its formula.
#[derive(Clone, Debug)]
pub struct RemainderConstants<S: Endpoint> {
    pub vm: VmConstants<S>,
    pub e0: Interval<S>,
    pub e1: Interval<S>,
    pub e2: Interval<S>,
    pub b0: Interval<S>,
    pub k0: Interval<S>,
    pub e_theta: Interval<S>,
    pub e_sigma: Interval<S>,
    pub c6: Interval<S>,
    /// `508 + 475 + 67 + 136.56`, the chain through the published component bounds.
    pub c6_recorded: Interval<S>,
    pub coeffs: ExpansionCoeffs<S>,
    pub ledger: Vec<LedgerRow<S>>,
}

impl<S: Endpoint> RemainderConstants<S> {
    pub fn failures(&self) -> Vec<&'static str> {
        self.ledger.iter().filter(|r| r.status == Status::Fail).map(|r| r.name).collect()
    }

    /// `Err(LedgerViolation)` naming every failed row.
    pub fn check(&self) -> Result<()> {
        let f = self.failures();
        if f.is_empty() {
            Ok(())
        } else {
            Err(Error::LedgerViolation(f.join(", ")))
        }
    }

    pub fn row(&self, name: &str) -> Option<&LedgerRow<S>> {
        self.ledger.iter().find(|r| r.name == name)
    }
}

/// Kernel sums `S_q` and `T_q` of the off-diagonal first moment, with a chosen log-sum bound.
struct Kernel<S: Endpoint> {
    a: Interval<S>,
    b: Interval<S>,
    d: Interval<S>,
    e: Interval<S>,
    ps: Interval<S>,
    ga: Interval<S>,
    a0: Interval<S>,
}

impl<S: Endpoint> Kernel<S> {
    fn new(a0: &Interval<S>) -> Result<Self> {
        let ctx = a0.ctx();
        let c = |k: i64| Interval::<S>::from_i64(k, ctx);
        let be = &c(1) - &a0.mul_i64(2);
        let ga = &c(2) - &a0.mul_i64(2);
        let ps = &c(3) - &a0.mul_i64(4);
        let a = &c(2).pow(&(&(&be + &ga) + &c(1)))? * &ga.zeta()?;
        let b = ps.zeta()?.mul_i64(4);
        let d = c(2).pow(&(&(&be + &ga) + &c(2)))?;
        let e = c(3).pow(&a0.mul_i64(2))?.div(&a0.mul_i64(2))?;
        Ok(Self { a, b, d, e, ps, ga, a0: a0.clone() })
    }

    fn combine(&self, shift: i64, q: u32, ls: &LogSum<S>) -> Result<Interval<S>> {
        let ctx = self.a.ctx();
        let sh = Interval::<S>::from_i64(shift, ctx);
        let g2 = self.ga.mul_i64(2);
        let t1 = (&self.a * &ls(&(&self.ps + &sh), q)?).mul_i64(2);
        let t2 = (&self.b * &ls(&(&self.ga + &sh), q)?).mul_i64(2);
        let t3 = (&self.d * &ls(&(&g2 + &sh), q)?).mul_i64(2);
        let t4 = (&(&self.d * &self.e) * &ls(&(&(&g2 - &self.a0.mul_i64(2)) + &sh), q)?).mul_i64(2);
        Ok(&(&(&t1 + &t2) + &t3) + &t4)
    }

    fn s(&self, q: u32, ls: &LogSum<S>) -> Result<Interval<S>> {
        self.combine(0, q, ls)
    }

    fn t(&self, q: u32, ls: &LogSum<S>) -> Result<Interval<S>> {
        self.combine(1, q, ls)
    }
}

struct FirstMoment<S: Endpoint> {
    d_den2: Interval<S>,
    d_z6: Interval<S>,
    d_v: Interval<S>,
    o_v: Interval<S>,
    o_d: Interval<S>,
    o_2: Interval<S>,
    s: [Interval<S>; 3],
    t: [Interval<S>; 2],
}

impl<S: Endpoint> FirstMoment<S> {
    fn total(&self) -> Interval<S> {
        [&self.d_den2, &self.d_z6, &self.d_v, &self.o_v, &self.o_d, &self.o_2]
            .into_iter()
            .fold(Interval::zero(self.d_z6.ctx()), |s, x| &s + x)
    }
}

fn first_moment<S: Endpoint>(
    vm: &VmConstants<S>,
    a0: &Interval<S>,
    ls: &LogSum<S>,
) -> Result<FirstMoment<S>> {
    let ctx = a0.ctx();
    let c = |k: i64| Interval::<S>::from_i64(k, ctx);
    let one = c(1);
    let a0sq = a0.sqr();
    let den2 = (&one - &a0sq).sqr();
    let vinf2 = vm.v_inf.sqr();
    let d_den2 = (&(&vinf2 * &a0sq) * &(&c(8) - &a0.mul_i64(4)).zeta()?).mul_i64(10).div(&den2)?;
    let d_z6 = (&vinf2 * &(&c(6) - &a0.mul_i64(4)).zeta()?).mul_i64(6);
    let p4 = &c(4) - &a0.mul_i64(4);
    let plus = &one + &a0sq;
    let d_v1 = (&(&(&(&plus * &vm.v_inf) * &vm.v4) * a0) * &ls(&p4, 4)?).mul_i64(4).div(&den2)?;
    let d_v2 = (&(&(&plus * &vm.v4.sqr()) * &a0.powi(4)) * &ls(&p4, 8)?).mul_i64(2).div(&den2)?;
    let d_v = &d_v1 + &d_v2;

    let k = Kernel::new(a0)?;
    let s = [k.s(0, ls)?, k.s(1, ls)?, k.s(2, ls)?];
    let t = [k.t(0, ls)?, k.t(1, ls)?];
    let om2 = (&one - a0).sqr();
    let o_v = (&vm.v1 * &s[1]).mul_i64(3).div(&om2)?;
    let o_d = t[0].mul_i64(2).div(&om2)?;
    let o_2 = (&(&vm.v1.sqr() * &s[2]).mul_i64(3) + &(&vm.v1 * &t[1]).mul_i64(2)).div(&om2)?;
    Ok(FirstMoment { d_den2, d_z6, d_v, o_v, o_d, o_2, s, t })
}

struct SecondMoment<S: Endpoint> {
    diag: Interval<S>,
    off: Interval<S>,
}

fn second_moment<S: Endpoint>(
    vm: &VmConstants<S>,
    a0: &Interval<S>,
    ls: &LogSum<S>,
) -> Result<SecondMoment<S>> {
    let ctx = a0.ctx();
    let c = |k: i64| Interval::<S>::from_i64(k, ctx);
    let om3 = (&c(1) - a0).powi(3);
    let diag = &(&(&vm.d3 * &c(6).zeta()?).mul_i64(2) + &(&vm.v1 * &ls(&(&c(5) - &a0.mul_i64(2)), 1)?).mul_i64(4).div(&om3)?)
        + &(&(a0 * &vm.v1.sqr()) * &ls(&(&c(5) - &a0.mul_i64(4)), 2)?).mul_i64(2).div(&om3)?;

    let be = &c(1) - &a0.mul_i64(2);
    let ga = &c(2) - &a0.mul_i64(2);
    let b2 = &c(2) - &a0.mul_i64(4);
    let pw = c(2).pow(&(&b2 + &c(2)))?;
    let u0 = &(&b2.zeta()?.mul_i64(4) + &pw) + &pw.div(&b2)?;
    let t0 = &(&ga + &c(1)).zeta()?.mul_i64(4) * &(&ga.mul_i64(2).zeta()? * &be.mul_i64(2).zeta()?).sqrt()?;
    let v0 = &ga.zeta()?.sqr().mul_i64(8) * &be.mul_i64(2).zeta()?;
    let vinf3 = vm.v_inf.powi(3);
    let vinf4 = vm.v_inf.powi(4);
    let off = &(&(&vinf3 * &t0).mul_i64(2).div(&om3)?
        + &(&(&(a0 * &vinf4) * &u0) * &ls(&(&c(5) - &a0.mul_i64(4)), 1)?).mul_i64(2).div(&om3)?)
        + &(&(a0 * &vinf4) * &v0).div(&om3)?;
    Ok(SecondMoment { diag, off })
}

/// Rebuilds every constant at `α₀ = 1/20` and records the audit ledger.
pub fn constant_closure<S: Endpoint>(ctx: S::Ctx) -> Result<RemainderConstants<S>> {
    let a0 = alpha0::<S>(ctx);
    let vm = vm_constants::<S>(ctx)?;
    let c = |k: i64| Interval::<S>::from_i64(k, ctx);
    let one = c(1);
    let a0sq = a0.sqr();
    let den = &one - &a0sq;
    let ls = |p: &Interval<S>, q: u32| log_sum_bound(p, q);
    let lit = |p: &Interval<S>, q: u32| log_sum_closed_form(p, q);

    let ps = &c(3) - &a0.mul_i64(4);
    let e0_den = (&(&vm.v_inf.sqr() * &a0) * &(&c(7) - &a0.mul_i64(4)).zeta()?).mul_i64(2).div(&den)?;
    let e0_cr = (&(&vm.v_inf * &vm.v4) * &ls(&ps, 4)?).mul_i64(4).div(&den)?;
    let e0_sq = (&(&vm.v4.sqr() * &a0.powi(3)) * &ls(&ps, 8)?).mul_i64(2).div(&den)?;
    let e0_poly = ls(&c(3), 3)?.mul_i64(60);
    let e0 = &(&(&e0_den + &e0_cr) + &e0_sq) + &e0_poly;

    let m1 = first_moment(&vm, &a0, &ls)?;
    let e1 = m1.total();
    let e1_lit = first_moment(&vm, &a0, &lit)?.total();
    let m2 = second_moment(&vm, &a0, &ls)?;
    let e2 = &m2.diag + &m2.off;
    let m2_lit = second_moment(&vm, &a0, &lit)?;
    let e2_lit = &m2_lit.diag + &m2_lit.off;

    let z = |k: i64| c(k).zeta();
    let b0 = &(&(&z(3)?.mul_i64(2) + &(&z(4)?.mul_i64(6) * &a0)) + &(&z(5)?.mul_i64(16) * &a0sq)) + &(&e0 * &a0.powi(3));
    let k0 = &z(2)?.mul_i64(2).sqrt()?.div(&(&one - &a0))? * &(&one + &(&vm.v2.sqr() * &a0sq)).sqrt()?;
    let b0k0 = (&b0 * &k0.powi(3)).mul_i64(2);
    let window = &b0.sqr().mul_i64(12) + &b0k0;
    let e_theta = &(&(&(&e0 + &e1) + &e2) + &b0.sqr().mul_i64(8)) + &b0k0;
    let e_sigma = &e_theta + &b0.sqr().mul_i64(4);
    let c6 = &(&(&e0 + &e1) + &e2) + &window;
    let c6_recorded = &c(508 + 475 + 67) + &Interval::from_decimal("136.56", ctx)?;
    let coeffs = ExpansionCoeffs::new(ctx)?;

    let near = |v: f64| Check::Near { value: v, tol: 1e-6 };
    let ledger = vec![
        LedgerRow::new("L5", "4/19 + 2ζ(5)/5 + 4ζ(7)a0²/(7(1-a0²))", &vm.l5, near(0.62674153)),
        LedgerRow::new("C_P", "2γ + 1 + a0/2 + (2ζ(3)/3 + 1/3)a0² + a0³/4", &vm.c_p, near(2.18229934)),
        LedgerRow::new("V_inf", "exp(C_P a0 + L5 a0⁵)", &vm.v_inf, near(1.11529078)),
        LedgerRow::new("L6", "V_inf((2 + C_P)⁵/120 + L5)", &vm.l6, near(12.59175302)),
        LedgerRow::new("V1", "V_inf(2 + C_P + L5 a0⁴)", &vm.v1, near(4.66448428)),
        LedgerRow::new("V4", "19/3 + 2ζ(3)/3 + a0(7 + 2ζ(3)) + 11 L6 a0²", &vm.v4, near(7.95118350)),
        LedgerRow::new("V2", "√2 V_inf √ζ(2-4a0)", &vm.v2, Check::Info),
        LedgerRow::new("D3", "3/(1-a0)⁴", &vm.d3, Check::Info),
        LedgerRow::new("E0_den", "2 V_inf² a0 ζ(7-4a0)/(1-a0²)", &e0_den, Check::Info),
        LedgerRow::new("E0_cr", "4 V_inf V4 L(3-4a0, 4)/(1-a0²)", &e0_cr, Check::Info),
        LedgerRow::new("E0_sq", "2 V4² a0³ L(3-4a0, 8)/(1-a0²)", &e0_sq, Check::Info),
        LedgerRow::new("E0_poly", "60 L(3, 3)", &e0_poly, Check::Info),
        LedgerRow::new("E0", "E0_den + E0_cr + E0_sq + E0_poly", &e0, Check::AtMost(508.0)),
        LedgerRow::new("E0_value", "E0", &e0, Check::Near { value: 507.61355685, tol: 1e-4 }),
        LedgerRow::new("E1_d_den2", "10 V_inf² a0² ζ(8-4a0)/(1-a0²)²", &m1.d_den2, Check::Info),
        LedgerRow::new("E1_d_z6", "6 V_inf² ζ(6-4a0)", &m1.d_z6, Check::Info),
        LedgerRow::new("E1_d_v", "(1+a0²)(4 V_inf V4 a0 L(4-4a0, 4) + 2 V4² a0⁴ L(4-4a0, 8))/(1-a0²)²", &m1.d_v, Check::Info),
        LedgerRow::new("S_0", "2A L(p*, 0) + 2B L(γ, 0) + 2D L(2γ, 0) + 2DE L(2γ-2a0, 0)", &m1.s[0], Check::Info),
        LedgerRow::new("S_1", "kernel sum, q = 1", &m1.s[1], Check::Info),
        LedgerRow::new("S_2", "kernel sum, q = 2", &m1.s[2], Check::Info),
        LedgerRow::new("T_0", "kernel sum with exponents raised by 1, q = 0", &m1.t[0], Check::Info),
        LedgerRow::new("T_1", "kernel sum with exponents raised by 1, q = 1", &m1.t[1], Check::Info),
        LedgerRow::new("E1_o_v", "3 V1 S_1/(1-a0)²", &m1.o_v, Check::Info),
        LedgerRow::new("E1_o_d", "2 T_0/(1-a0)²", &m1.o_d, Check::Info),
        LedgerRow::new("E1_o_2", "(3 V1² S_2 + 2 V1 T_1)/(1-a0)²", &m1.o_2, Check::Info),
        LedgerRow::new("E1", "E1_d + E1_o", &e1, Check::AtMost(475.0)),
        LedgerRow::new("E1_closed_tail", "E1 with the closed-form log-sum tail", &e1_lit, Check::Info),
        LedgerRow::new("E2_d", "2 D3 ζ(6) + 4 V1 L(5-2a0, 1)/(1-a0)³ + 2 a0 V1² L(5-4a0, 2)/(1-a0)³", &m2.diag, Check::Info),
        LedgerRow::new("E2_o", "(2 V_inf³ T0# + 2 a0 V_inf⁴ U0 L(5-4a0, 1) + a0 V_inf⁴ V0)/(1-a0)³", &m2.off, Check::Info),
        LedgerRow::new("E2", "E2_d + E2_o", &e2, Check::AtMost(67.0)),
        LedgerRow::new("E2_closed_tail", "E2 with the closed-form log-sum tail", &e2_lit, Check::Info),
        LedgerRow::new("B0", "2ζ(3) + 6ζ(4)a0 + 16ζ(5)a0² + E0 a0³", &b0, Check::AtMost(2.834)),
        LedgerRow::new("K0", "√(2ζ(2))/(1-a0) √(1 + V2² a0²)", &k0, Check::AtMost(1.921)),
        LedgerRow::new("window", "12 B0² + 2 B0 K0³", &window, Check::AtMost(136.56)),
        LedgerRow::new("E_theta", "E0 + E1 + E2 + 8 B0² + 2 B0 K0³", &e_theta, Check::Info),
        LedgerRow::new("E_sigma", "E_theta + 4 B0²", &e_sigma, Check::Info),
        LedgerRow::new("C6", "E0 + E1 + E2 + 12 B0² + 2 B0 K0³", &c6, Check::AtMost(1187.0)),
        LedgerRow::new("C6_recorded", "508 + 475 + 67 + 136.56", &c6_recorded, Check::Info),
        LedgerRow::new("c3", "2ζ(3)", &coeffs.c3, Check::Info),
        LedgerRow::new("c4", "8ζ(4)", &coeffs.c4, Check::Info),
        LedgerRow::new("c5", "26ζ(5)", &coeffs.c5, Check::Info),
    ];
    Ok(RemainderConstants { vm, e0, e1, e2, b0, k0, e_theta, e_sigma, c6, c6_recorded, coeffs, ledger })
}

/// [`constant_closure`] at the default precision, computed once.
pub fn constant_closure_cached() -> &'static RemainderConstants<Mp> {
    static CACHE: OnceLock<RemainderConstants<Mp>> = OnceLock::new();
    CACHE.get_or_init(|| {
        let bits = Precision::new(Precision::DEFAULT_DIGITS).expect("default precision").bits();
        constant_closure::<Mp>(bits).expect("constant closure at default precision")
    })
}

#[derive(Clone, Debug)]
pub struct ExpansionValue<S: Endpoint> {
    pub n_sides: u32,
    /// `1 - c3/N³ - c4/N⁴ - c5/N⁵`
    pub center: Interval<S>,
    /// `center ± E_σ/N⁶`
    pub band: Interval<S>,
}

/// Band for `σ₁` at `N ≥ 20` with a given remainder constant.
pub fn expansion_with<S: Endpoint>(n_sides: u32, coeffs: &ExpansionCoeffs<S>, e_sigma: &Interval<S>) -> Result<ExpansionValue<S>> {
    if n_sides < ASYMPTOTIC_N {
        return Err(Error::WindowViolation(format!("N = {n_sides} is below {ASYMPTOTIC_N}")));
    }
    let ctx = coeffs.c3.ctx();
    let n = Interval::<S>::from_i64(n_sides as i64, ctx);
    let inv = n.recip()?;
    let i3 = inv.powi(3);
    let i4 = &i3 * &inv;
    let i5 = &i4 * &inv;
    let i6 = &i5 * &inv;
    let center = &(&(&Interval::one(ctx) - &(&coeffs.c3 * &i3)) - &(&coeffs.c4 * &i4)) - &(&coeffs.c5 * &i5);
    let radius = (e_sigma * &i6).abs();
    let band = &center + &radius.symmetric();
    Ok(ExpansionValue { n_sides, center, band })
}

pub fn expansion_value<S: Endpoint>(n_sides: u32, k: &RemainderConstants<S>) -> Result<ExpansionValue<S>> {
    expansion_with(n_sides, &k.coeffs, &k.e_sigma)
}

/// `1200 c3 (20/21)³ + 80 c4 (20/21)⁴ + 5 c5 (20/21)⁵`.
pub fn margin_positive_part<S: Endpoint>(coeffs: &ExpansionCoeffs<S>) -> Result<Interval<S>> {
    let ctx = coeffs.c3.ctx();
    let r = Interval::<S>::from_i64(20, ctx).div_i64(21)?;
    Ok(&(&(&coeffs.c3 * &r.powi(3)).mul_i64(1200) + &(&coeffs.c4 * &r.powi(4)).mul_i64(80))
        + &(&coeffs.c5 * &r.powi(5)).mul_i64(5))
}

/// Positive part minus `2 E_σ`.
pub fn margin_with<S: Endpoint>(coeffs: &ExpansionCoeffs<S>, e_sigma: &Interval<S>) -> Result<Interval<S>> {
    Ok(&margin_positive_part(coeffs)? - &e_sigma.mul_i64(2))
}

/// Certified margin; `LedgerViolation` unless strictly positive.
pub fn monotonicity_margin<S: Endpoint>(k: &RemainderConstants<S>) -> Result<Interval<S>> {
    let m = margin_with(&k.coeffs, &k.e_sigma)?;
    if m.is_positive() {
        Ok(m)
    } else {
        Err(Error::LedgerViolation(format!("monotonicity margin {m} is not positive")))
    }
}

#[derive(Clone, Debug)]
pub struct GapEntry<S: Endpoint> {
    pub n_sides: u32,
    /// `σ_lo(N+1) - σ_hi(N)`, rounded down.
    pub gap_lo: S,
}

impl<S: Endpoint> GapEntry<S> {
    pub fn is_positive(&self) -> bool {
        self.gap_lo > S::zero(self.gap_lo.ctx())
    }
}

/// Gap lower bounds for `n_lo ≤ N < n_hi`, without judging them.
pub fn gap_table<S: Endpoint>(n_lo: u32, n_hi: u32, enclosures: &[SigmaEnclosure<S>]) -> Result<Vec<GapEntry<S>>> {
    if n_hi <= n_lo {
        return Err(Error::InvalidInput(format!("empty range {n_lo}..{n_hi}")));
    }
    let find = |n: u32| {
        enclosures
            .iter()
            .find(|e| e.n_sides == n)
            .ok_or_else(|| Error::InvalidInput(format!("no enclosure for N = {n}")))
    };
    (n_lo..n_hi)
        .map(|n| {
            let gap_lo = find(n + 1)?.sigma_lo.sub(&find(n)?.sigma_hi, Dir::Down);
            Ok(GapEntry { n_sides: n, gap_lo })
        })
        .collect()
}

/// [`gap_table`], failing with `GapViolation` at the first nonpositive gap.
pub fn gap_verification<S: Endpoint>(n_lo: u32, n_hi: u32, enclosures: &[SigmaEnclosure<S>]) -> Result<Vec<GapEntry<S>>> {
    let table = gap_table(n_lo, n_hi, enclosures)?;
    if let Some(bad) = table.iter().find(|g| !g.is_positive()) {
        return Err(Error::GapViolation { n: bad.n_sides });
    }
    Ok(table)
}
