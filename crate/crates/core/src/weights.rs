//! Fourier coefficients `v_m` of the polygonal boundary weight.
//!
//! `v_m = Γ(1-α)/Γ(α) · Γ(m+α)/Γ(m+1-α)` with `α = 1/N`. Consecutive terms satisfy
//! `v_{m+1} = v_m (m+α)/(m+1-α)`, which is what sections use.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::interval::{Dir, Endpoint, Interval};

/// Largest `m` for which Taylor coefficients are produced as exact rationals.
pub const EXACT_HARMONIC_LIMIT: u64 = 10_000;

#[derive(Clone, Debug)]
pub struct Alpha<S: Endpoint> {
    n_sides: Option<u32>,
    alpha: Interval<S>,
    alpha0: Interval<S>,
}

impl<S: Endpoint> Alpha<S> {
    pub fn new(n_sides: u32, ctx: S::Ctx) -> Result<Self> {
        if n_sides < 3 {
            return Err(Error::InvalidInput(format!("N must be at least 3, got {n_sides}")));
        }
        let alpha = Interval::one(ctx).div_i64(n_sides as i64)?;
        Ok(Self { n_sides: Some(n_sides), alpha, alpha0: alpha0(ctx) })
    }

    /// A bare exponent not tied to a polygon, for limits and identities.
    pub fn from_interval(alpha: Interval<S>) -> Result<Self> {
        let ctx = alpha.ctx();
        let half = Interval::<S>::one(ctx).div_i64(2)?;
        if !alpha.is_positive() || !alpha.certainly_lt(&half) {
            return Err(Error::DomainViolation(format!("alpha {alpha} must lie in (0, 1/2)")));
        }
        Ok(Self { n_sides: None, alpha, alpha0: alpha0(ctx) })
    }

    pub fn n_sides(&self) -> Option<u32> {
        self.n_sides
    }

    pub fn alpha(&self) -> &Interval<S> {
        &self.alpha
    }

    pub fn alpha0(&self) -> &Interval<S> {
        &self.alpha0
    }

    /// `α ≤ α₀`, the regime of the uniform constants.
    pub fn is_asymptotic(&self) -> bool {
        self.alpha.hi() <= self.alpha0.hi()
    }

    pub fn ctx(&self) -> S::Ctx {
        self.alpha.ctx()
    }
}

pub fn alpha0<S: Endpoint>(ctx: S::Ctx) -> Interval<S> {
    Interval::one(ctx).div_i64(20).expect("nonzero")
}

/// `C(α) = Γ(1-α)² / Γ(1-2α)`.
pub fn normalization_constant<S: Endpoint>(a: &Alpha<S>) -> Result<Interval<S>> {
    let ctx = a.ctx();
    let one = Interval::one(ctx);
    let g1 = (&one - a.alpha()).gamma()?;
    let g2 = (&one - &a.alpha().mul_i64(2)).gamma()?;
    g1.sqr().div(&g2)
}

/// Direct Γ-ratio evaluation of `v_m`. Kept as a cross-check for the recurrence.
pub fn coefficient_v<S: Endpoint>(m: u64, a: &Alpha<S>) -> Result<Interval<S>> {
    let ctx = a.ctx();
    let al = a.alpha();
    let one = Interval::one(ctx);
    let mm = Interval::from_i64(m as i64, ctx);
    let num = &(&one - al).gamma()? * &(&mm + al).gamma()?;
    let den = &al.gamma()? * &(&(&mm + &one) - al).gamma()?;
    let v = num.div(&den)?;
    if !v.is_finite() {
        return Err(Error::DomainViolation(format!("Γ overflow evaluating v_{m}")));
    }
    Ok(v)
}

#[derive(Clone, Debug)]
pub struct WeightCoefficients<S: Endpoint> {
    alpha: Alpha<S>,
    values: Vec<Interval<S>>,
}

impl<S: Endpoint> WeightCoefficients<S> {
    pub fn alpha(&self) -> &Alpha<S> {
        &self.alpha
    }

    pub fn m_max(&self) -> usize {
        self.values.len() - 1
    }

    /// `v_m`, extended to negative `m` by evenness.
    pub fn get(&self, m: i64) -> &Interval<S> {
        &self.values[m.unsigned_abs() as usize]
    }

    pub fn values(&self) -> &[Interval<S>] {
        &self.values
    }

    pub fn require(&self, needed: usize) -> Result<()> {
        if self.m_max() < needed {
            return Err(Error::InsufficientCoefficients { needed, have: self.m_max() });
        }
        Ok(())
    }
}

/// `v_0..=v_{m_max}` from `v_0 = 1` and the ratio `(m+α)/(m+1-α)`.
pub fn coefficient_v_recursive<S: Endpoint>(m_max: usize, a: &Alpha<S>) -> WeightCoefficients<S> {
    let ctx = a.ctx();
    let al = a.alpha();
    let one_minus = &Interval::one(ctx) - al;
    let mut values = Vec::with_capacity(m_max + 1);
    values.push(Interval::one(ctx));
    for m in 0..m_max {
        let mm = Interval::from_i64(m as i64, ctx);
        let num = &mm + al;
        let den = &mm + &one_minus;
        let ratio = num.div(&den).expect("denominator is positive");
        let next = &values[m] * &ratio;
        values.push(next);
    }
    WeightCoefficients { alpha: a.clone(), values }
}

/// Certified envelope `v_j ≤ c · j^{-p}` for every `j ≥ from`.
///
/// `u_j = v_j (j+1)^{1-2α}` is nonincreasing: by Bernoulli
/// `((j+2)/(j+1))^{1-2α} ≤ 1 + (1-2α)/(j+1) ≤ (j+1-α)/(j+α)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerEnvelope {
    pub from: usize,
    pub c: f64,
    pub p: f64,
}

impl PowerEnvelope {
    pub fn new<S: Endpoint>(coeffs: &WeightCoefficients<S>, from: usize) -> Result<Self> {
        coeffs.require(from)?;
        let a = coeffs.alpha().alpha();
        let ctx = a.ctx();
        let p = &Interval::one(ctx) - &a.mul_i64(2);
        let base = Interval::<S>::from_i64(from as i64 + 1, ctx);
        let scale = base.pow(&p)?;
        let c = (coeffs.get(from as i64) * &scale).hi_f64();
        Ok(Self { from, c, p: p.lo_f64() })
    }

    /// Upper bound for `v_j`, `j ≥ from`.
    pub fn bound(&self, j: usize) -> f64 {
        debug_assert!(j >= self.from.max(1));
        crate::tails::up_mul(self.c, crate::tails::pow_neg_up(j as f64, self.p))
    }
}

/// `Σ_{m∈ℤ} v_m²` by direct summation up to `m_max` plus a power-law tail.
pub fn parseval_sum<S: Endpoint>(coeffs: &WeightCoefficients<S>) -> Result<Interval<S>> {
    let ctx = coeffs.alpha().ctx();
    let k = coeffs.m_max();
    let mut s = Interval::zero(ctx);
    for m in 1..=k {
        s = &s + &coeffs.get(m as i64).sqr();
    }
    let total = &coeffs.get(0).sqr() + &s.mul_i64(2);
    let env = PowerEnvelope::new(coeffs, k)?;
    // exact: doubling, then subtracting 1 from a number in (1, 2)
    let q = 2.0 * env.p - 1.0;
    if q <= 0.0 {
        return Err(Error::TailDivergence("Σ v_m² needs α < 1/4".into()));
    }
    // Σ_{m>k} m^{-2p} ≤ k^{1-2p}/(2p-1)
    use crate::tails::{pow_neg_up, up_div, up_mul};
    let tail = up_div(up_mul(up_mul(2.0, up_mul(env.c, env.c)), pow_neg_up(k as f64, q)), q);
    let tail = Interval::new(S::zero(ctx), S::from_f64(tail, ctx, Dir::Up))?;
    Ok(&total + &tail)
}

/// `Γ(1-α)⁴ Γ(1-4α) / Γ(1-2α)⁴`.
pub fn parseval_closed_form<S: Endpoint>(a: &Alpha<S>) -> Result<Interval<S>> {
    let ctx = a.ctx();
    let one = Interval::one(ctx);
    let g1 = (&one - a.alpha()).gamma()?;
    let g2 = (&one - &a.alpha().mul_i64(2)).gamma()?;
    let g4 = (&one - &a.alpha().mul_i64(4)).gamma()?;
    (&g1.powi(4) * &g4).div(&g2.powi(4))
}

fn harmonic(n: u64, power: u32) -> BigRational {
    let mut h = BigRational::zero();
    for k in 1..=n {
        h += BigRational::new(BigInt::one(), BigInt::from(k).pow(power));
    }
    h
}

/// Exact Taylor coefficient `a_{m,j}` of `v_m` in powers of `α`.
pub fn taylor_coefficient(m: u64, j: u32) -> Result<BigRational> {
    if m == 0 || !(1..=5).contains(&j) {
        return Err(Error::InvalidInput(format!("a_(m,j) needs m ≥ 1 and 1 ≤ j ≤ 5, got ({m}, {j})")));
    }
    if m > EXACT_HARMONIC_LIMIT {
        return Err(Error::InvalidInput(format!("exact a_(m,j) limited to m ≤ {EXACT_HARMONIC_LIMIT}")));
    }
    let h = harmonic(m - 1, 1);
    let h3 = harmonic(m - 1, 3);
    Ok(taylor_from_harmonics(m, j, &h, &h3))
}

fn taylor_from_harmonics(m: u64, j: u32, h: &BigRational, h3: &BigRational) -> BigRational {
    let m = BigRational::from_integer(BigInt::from(m));
    let int = |k: i64| BigRational::from_integer(BigInt::from(k));
    let mh = &m * h;
    let p = |x: &BigRational, k: u32| (0..k).fold(BigRational::one(), |acc, _| acc * x);
    let quartic = int(3) + int(6) * &mh + int(6) * p(&mh, 2) + int(4) * p(&mh, 3) + int(2) * p(&m, 3) * h3;
    match j {
        1 => BigRational::one() / &m,
        2 => (int(1) + int(2) * &mh) / p(&m, 2),
        3 => (int(1) + int(2) * &mh + int(2) * p(&mh, 2)) / p(&m, 3),
        4 => quartic / (int(3) * p(&m, 4)),
        _ => {
            let extra = int(2) * p(&mh, 4) + int(4) * p(&m, 4) * h * h3;
            (quartic + extra) / (int(3) * p(&m, 5))
        }
    }
}

/// `a_{m,j}` as an interval. Exact below [`EXACT_HARMONIC_LIMIT`], interval harmonic sums above.
pub fn taylor_coefficient_enclosure<S: Endpoint>(m: u64, j: u32, ctx: S::Ctx) -> Result<Interval<S>> {
    if m <= EXACT_HARMONIC_LIMIT {
        let q = taylor_coefficient(m, j)?;
        return Interval::from_ratio(q.numer(), q.denom(), ctx);
    }
    if !(1..=5).contains(&j) {
        return Err(Error::InvalidInput(format!("j must be in 1..=5, got {j}")));
    }
    let mut h = Interval::zero(ctx);
    let mut h3 = Interval::zero(ctx);
    for k in 1..m {
        let inv = Interval::<S>::one(ctx).div_i64(k as i64)?;
        h = &h + &inv;
        h3 = &h3 + &inv.powi(3);
    }
    let mi = Interval::from_i64(m as i64, ctx);
    let mh = &mi * &h;
    let c = |k: i64| Interval::<S>::from_i64(k, ctx);
    let quartic = &(&(&(&c(3) + &mh.mul_i64(6)) + &mh.sqr().mul_i64(6)) + &mh.powi(3).mul_i64(4))
        + &(&mi.powi(3) * &h3).mul_i64(2);
    match j {
        1 => Interval::one(ctx).div(&mi),
        2 => (&c(1) + &mh.mul_i64(2)).div(&mi.sqr()),
        3 => (&(&c(1) + &mh.mul_i64(2)) + &mh.sqr().mul_i64(2)).div(&mi.powi(3)),
        4 => quartic.div(&mi.powi(4).mul_i64(3)),
        _ => {
            let extra = &mh.powi(4).mul_i64(2) + &(&(&mi.powi(4) * &h) * &h3).mul_i64(4);
            (&quartic + &extra).div(&mi.powi(5).mul_i64(3))
        }
    }
}

/// Uniform constants at `α₀ = 1/20`.
#[derive(Clone, Debug)]
pub struct VmConstants<S: Endpoint> {
    pub l5: Interval<S>,
    pub c_p: Interval<S>,
    pub v_inf: Interval<S>,
    pub l6: Interval<S>,
    pub v1: Interval<S>,
    pub v4: Interval<S>,
    pub v2: Interval<S>,
    pub d3: Interval<S>,
}

pub fn vm_constants<S: Endpoint>(ctx: S::Ctx) -> Result<VmConstants<S>> {
    let a0 = alpha0::<S>(ctx);
    let c = |k: i64| Interval::<S>::from_i64(k, ctx);
    let q = |n: i64, d: i64| Interval::<S>::from_i64(n, ctx).div_i64(d);
    let z = |s: Interval<S>| s.zeta();
    let one = c(1);
    let a0sq = a0.sqr();
    let z3 = z(c(3))?;
    let z5 = z(c(5))?;
    let z7 = z(c(7))?;

    let l5 = &(&q(4, 19)? + &(&q(2, 5)? * &z5)) + &(&z7.mul_i64(4) * &a0sq).div(&(&one - &a0sq).mul_i64(7))?;
    let gamma = Interval::euler_gamma(ctx);
    let c_p = &(&(&(&gamma.mul_i64(2) + &one) + &a0.div_i64(2)?) + &(&(&(&q(2, 3)? * &z3) + &q(1, 3)?) * &a0sq))
        + &a0.powi(3).div_i64(4)?;
    let v_inf = (&(&c_p * &a0) + &(&l5 * &a0.powi(5))).exp();
    let l6 = &v_inf * &(&(&c(2) + &c_p).powi(5).div_i64(120)? + &l5);
    let v1 = &v_inf * &(&(&c(2) + &c_p) + &(&l5 * &a0.powi(4)));
    let v4 = &(&(&q(19, 3)? + &(&q(2, 3)? * &z3)) + &(&a0 * &(&c(7) + &z3.mul_i64(2))))
        + &(&l6 * &a0sq).mul_i64(11);
    let d3 = c(3).div(&(&one - &a0).powi(4))?;
    let v2 = &(&c(2).sqrt()? * &v_inf) * &z(&c(2) - &a0.mul_i64(4))?.sqrt()?;
    Ok(VmConstants { l5, c_p, v_inf, l6, v1, v4, v2, d3 })
}

fn m_power<S: Endpoint>(m: u64, a: &Alpha<S>) -> Result<Interval<S>> {
    let ctx = a.ctx();
    let e = &a.alpha0().mul_i64(2) - &Interval::one(ctx);
    Interval::<S>::from_i64(m as i64, ctx).pow(&e)
}

fn one_plus_log<S: Endpoint>(m: u64, ctx: S::Ctx) -> Result<Interval<S>> {
    Ok(&Interval::one(ctx) + &Interval::<S>::from_i64(m as i64, ctx).ln()?)
}

/// `V₄ α⁴ m^{2α₀-1} (1+log m)⁴`, bounding `|v_m - Σ_{j≤3} a_{m,j} α^j|`.
pub fn cubic_truncation_error<S: Endpoint>(m: u64, a: &Alpha<S>, k: &VmConstants<S>) -> Result<Interval<S>> {
    if m == 0 {
        return Err(Error::InvalidInput("cubic truncation needs m ≥ 1".into()));
    }
    if !a.is_asymptotic() {
        return Err(Error::PreconditionViolation("α exceeds α₀ = 1/20".into()));
    }
    let ctx = a.ctx();
    Ok(&(&(&k.v4 * &a.alpha().powi(4)) * &m_power(m, a)?) * &one_plus_log::<S>(m, ctx)?.powi(4))
}

/// `V_∞ α m^{2α₀-1}`.
pub fn uniform_bound<S: Endpoint>(m: u64, a: &Alpha<S>, k: &VmConstants<S>) -> Result<Interval<S>> {
    Ok(&(&k.v_inf * a.alpha()) * &m_power(m, a)?)
}

/// `V₁ α² m^{2α₀-1} (1+log m)`, bounding `|v_m - α/m|`.
pub fn linear_control_bound<S: Endpoint>(m: u64, a: &Alpha<S>, k: &VmConstants<S>) -> Result<Interval<S>> {
    let ctx = a.ctx();
    Ok(&(&(&k.v1 * &a.alpha().sqr()) * &m_power(m, a)?) * &one_plus_log::<S>(m, ctx)?)
}

/// `Σ_{j≤3} a_{m,j} α^j`.
pub fn cubic_polynomial<S: Endpoint>(m: u64, a: &Alpha<S>) -> Result<Interval<S>> {
    let ctx = a.ctx();
    let mut acc = Interval::zero(ctx);
    for j in 1..=3 {
        let c = taylor_coefficient_enclosure::<S>(m, j, ctx)?;
        acc = &acc + &(&c * &a.alpha().powi(j));
    }
    Ok(acc)
}
