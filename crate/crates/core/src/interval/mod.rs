//! Outward-rounded interval arithmetic over a pluggable endpoint type.
//!
//! Endpoints implement [`Endpoint`], which exposes directed-rounding primitives.
//! Transcendental functions default to MPFR. MPFR results are correctly rounded,
//! so one directed call is already a rigorous one-sided bound.

pub(crate) mod float;
mod mp;
mod special;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use rug::float::{Constant, Round};
use rug::Float;
use serde::Serialize;

use crate::error::{Error, Result};

pub use mp::Mp;
pub use special::{GAMMA_MIN_ARG, GAMMA_MIN_VALUE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dir {
    Down,
    Up,
}

impl Dir {
    pub fn round(self) -> Round {
        match self {
            Dir::Down => Round::Down,
            Dir::Up => Round::Up,
        }
    }

    pub fn flip(self) -> Dir {
        match self {
            Dir::Down => Dir::Up,
            Dir::Up => Dir::Down,
        }
    }
}

/// Working precision in decimal digits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Precision {
    decimal_digits: u32,
}

impl Precision {
    pub const DEFAULT_DIGITS: u32 = 140;
    pub const MIN_DIGITS: u32 = 30;

    pub fn new(decimal_digits: u32) -> Result<Self> {
        if decimal_digits < Self::MIN_DIGITS {
            return Err(Error::PrecisionTooLow(decimal_digits));
        }
        Ok(Self { decimal_digits })
    }

    pub fn decimal_digits(&self) -> u32 {
        self.decimal_digits
    }

    /// Mantissa bits handed to MPFR, with a few guard bits.
    pub fn bits(&self) -> u32 {
        (self.decimal_digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + 8
    }
}

impl Default for Precision {
    fn default() -> Self {
        Self { decimal_digits: Self::DEFAULT_DIGITS }
    }
}

#[derive(Clone, Copy, Debug)]
enum Unary {
    Exp,
    Ln,
    Gamma,
    Zeta,
}

pub trait Endpoint: Clone + PartialOrd + fmt::Debug + Send + Sync + 'static {
    type Ctx: Copy + fmt::Debug + PartialEq + Send + Sync + 'static;

    fn ctx(&self) -> Self::Ctx;
    /// Bits used when a computation is delegated to MPFR.
    fn bits(ctx: Self::Ctx) -> u32;
    fn from_f64(x: f64, ctx: Self::Ctx, dir: Dir) -> Self;
    fn from_mpfr(x: &Float, ctx: Self::Ctx, dir: Dir) -> Self;
    /// Exact.
    fn to_mpfr(&self) -> Float;
    fn to_f64(&self, dir: Dir) -> f64;
    fn is_finite(&self) -> bool;
    fn neg(&self) -> Self;
    fn add(&self, rhs: &Self, dir: Dir) -> Self;
    fn sub(&self, rhs: &Self, dir: Dir) -> Self;
    fn mul(&self, rhs: &Self, dir: Dir) -> Self;
    fn div(&self, rhs: &Self, dir: Dir) -> Self;
    fn sqrt(&self, dir: Dir) -> Self;
    /// `self <- self + a*b` rounded in `dir` (possibly one ulp further out).
    fn fma_assign(&mut self, a: &Self, b: &Self, dir: Dir);

    fn from_i64(n: i64, ctx: Self::Ctx, dir: Dir) -> Self {
        Self::from_mpfr(&Float::with_val(64, n), ctx, dir)
    }

    fn zero(ctx: Self::Ctx) -> Self {
        Self::from_f64(0.0, ctx, Dir::Down)
    }

    fn infinity(ctx: Self::Ctx, negative: bool) -> Self {
        let x = if negative { f64::NEG_INFINITY } else { f64::INFINITY };
        Self::from_f64(x, ctx, Dir::Down)
    }

    fn exp(&self, dir: Dir) -> Self {
        mpfr_unary(self, Unary::Exp, dir)
    }

    fn ln(&self, dir: Dir) -> Self {
        mpfr_unary(self, Unary::Ln, dir)
    }

    fn gamma(&self, dir: Dir) -> Self {
        mpfr_unary(self, Unary::Gamma, dir)
    }

    fn zeta(&self, dir: Dir) -> Self {
        mpfr_unary(self, Unary::Zeta, dir)
    }

    fn constant(c: Constant, ctx: Self::Ctx, dir: Dir) -> Self {
        let (f, _) = Float::with_val_round(Self::bits(ctx), c, dir.round());
        Self::from_mpfr(&f, ctx, dir)
    }
}

fn mpfr_unary<S: Endpoint>(x: &S, op: Unary, dir: Dir) -> S {
    let ctx = x.ctx();
    let bits = S::bits(ctx);
    let a = x.to_mpfr();
    let r = dir.round();
    let (v, _) = match op {
        Unary::Exp => Float::with_val_round(bits, a.exp_ref(), r),
        Unary::Ln => Float::with_val_round(bits, a.ln_ref(), r),
        Unary::Gamma => Float::with_val_round(bits, a.gamma_ref(), r),
        Unary::Zeta => Float::with_val_round(bits, a.zeta_ref(), r),
    };
    S::from_mpfr(&v, ctx, dir)
}

fn to_rug(x: &BigInt) -> rug::Integer {
    rug::Integer::from_str_radix(&x.to_str_radix(16), 16).expect("radix-16 literal")
}

fn min_of<S: Endpoint>(xs: [S; 4]) -> S {
    let [a, b, c, d] = xs;
    let ab = if b < a { b } else { a };
    let cd = if d < c { d } else { c };
    if cd < ab {
        cd
    } else {
        ab
    }
}

fn max_of<S: Endpoint>(xs: [S; 4]) -> S {
    let [a, b, c, d] = xs;
    let ab = if b > a { b } else { a };
    let cd = if d > c { d } else { c };
    if cd > ab {
        cd
    } else {
        ab
    }
}

fn smaller<S: Endpoint>(a: &S, b: &S) -> S {
    if b < a {
        b.clone()
    } else {
        a.clone()
    }
}

fn larger<S: Endpoint>(a: &S, b: &S) -> S {
    if b > a {
        b.clone()
    } else {
        a.clone()
    }
}

/// A closed interval `[lo, hi]`.
///
/// Infinite endpoints only appear in the [`Interval::entire`] sentinel.
#[derive(Clone, Debug, PartialEq)]
pub struct Interval<S> {
    lo: S,
    hi: S,
}

impl<S: Endpoint> Interval<S> {
    pub fn new(lo: S, hi: S) -> Result<Self> {
        if !(lo <= hi) {
            return Err(Error::InvalidInput(format!("empty interval [{lo:?}, {hi:?}]")));
        }
        Ok(Self { lo, hi })
    }

    pub(crate) fn raw(lo: S, hi: S) -> Self {
        debug_assert!(lo <= hi, "inverted interval {lo:?} > {hi:?}");
        Self { lo, hi }
    }

    pub fn point(x: S) -> Self {
        Self { lo: x.clone(), hi: x }
    }

    pub fn entire(ctx: S::Ctx) -> Self {
        Self { lo: S::infinity(ctx, true), hi: S::infinity(ctx, false) }
    }

    pub fn from_f64(x: f64, ctx: S::Ctx) -> Self {
        Self { lo: S::from_f64(x, ctx, Dir::Down), hi: S::from_f64(x, ctx, Dir::Up) }
    }

    pub fn from_i64(n: i64, ctx: S::Ctx) -> Self {
        Self { lo: S::from_i64(n, ctx, Dir::Down), hi: S::from_i64(n, ctx, Dir::Up) }
    }

    pub fn zero(ctx: S::Ctx) -> Self {
        Self::point(S::zero(ctx))
    }

    pub fn one(ctx: S::Ctx) -> Self {
        Self::from_i64(1, ctx)
    }

    pub fn from_mpfr(x: &Float, ctx: S::Ctx) -> Self {
        Self { lo: S::from_mpfr(x, ctx, Dir::Down), hi: S::from_mpfr(x, ctx, Dir::Up) }
    }

    /// Encloses a decimal literal such as `"0.621278808420295929"`.
    pub fn from_decimal(s: &str, ctx: S::Ctx) -> Result<Self> {
        let parse = || Float::parse(s).map_err(|e| Error::InvalidInput(format!("{s}: {e}")));
        let bits = S::bits(ctx).max(64);
        let (lo, _) = Float::with_val_round(bits, parse()?, Round::Down);
        let (hi, _) = Float::with_val_round(bits, parse()?, Round::Up);
        Ok(Self { lo: S::from_mpfr(&lo, ctx, Dir::Down), hi: S::from_mpfr(&hi, ctx, Dir::Up) })
    }

    pub fn from_ratio(num: &BigInt, den: &BigInt, ctx: S::Ctx) -> Result<Self> {
        if den.sign() == num_bigint::Sign::NoSign {
            return Err(Error::DomainViolation("zero denominator".into()));
        }
        let n = to_rug(num);
        let d = to_rug(den);
        let q = rug::Rational::from((n, d));
        let bits = S::bits(ctx).max(64);
        let (lo, _) = Float::with_val_round(bits, &q, Round::Down);
        let (hi, _) = Float::with_val_round(bits, &q, Round::Up);
        Ok(Self { lo: S::from_mpfr(&lo, ctx, Dir::Down), hi: S::from_mpfr(&hi, ctx, Dir::Up) })
    }

    pub fn pi(ctx: S::Ctx) -> Self {
        Self { lo: S::constant(Constant::Pi, ctx, Dir::Down), hi: S::constant(Constant::Pi, ctx, Dir::Up) }
    }

    /// Euler–Mascheroni constant.
    pub fn euler_gamma(ctx: S::Ctx) -> Self {
        Self {
            lo: S::constant(Constant::Euler, ctx, Dir::Down),
            hi: S::constant(Constant::Euler, ctx, Dir::Up),
        }
    }

    pub fn lo(&self) -> &S {
        &self.lo
    }

    pub fn hi(&self) -> &S {
        &self.hi
    }

    pub fn ctx(&self) -> S::Ctx {
        self.lo.ctx()
    }

    pub fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn width(&self) -> S {
        self.hi.sub(&self.lo, Dir::Up)
    }

    pub fn width_f64(&self) -> f64 {
        self.width().to_f64(Dir::Up)
    }

    pub fn mid(&self) -> S {
        let two = S::from_i64(2, self.ctx(), Dir::Down);
        self.lo.add(&self.hi, Dir::Down).div(&two, Dir::Down)
    }

    pub fn mid_f64(&self) -> f64 {
        0.5 * (self.lo.to_f64(Dir::Down) + self.hi.to_f64(Dir::Up))
    }

    /// `[hi, hi]`.
    pub fn hi_point(&self) -> Self {
        Self::point(self.hi.clone())
    }

    /// `[lo, lo]`.
    pub fn lo_point(&self) -> Self {
        Self::point(self.lo.clone())
    }

    pub fn lo_f64(&self) -> f64 {
        self.lo.to_f64(Dir::Down)
    }

    pub fn hi_f64(&self) -> f64 {
        self.hi.to_f64(Dir::Up)
    }

    pub fn contains(&self, x: &S) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        let ctx = self.ctx();
        self.contains_interval(&Self::from_f64(x, ctx))
    }

    /// True if `other` lies inside `self`.
    pub fn contains_interval(&self, other: &Self) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersects(&self, other: &Self) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn intersection(&self, other: &Self) -> Option<Self> {
        if !self.intersects(other) {
            return None;
        }
        Some(Self { lo: larger(&self.lo, &other.lo), hi: smaller(&self.hi, &other.hi) })
    }

    pub fn hull(&self, other: &Self) -> Self {
        Self { lo: smaller(&self.lo, &other.lo), hi: larger(&self.hi, &other.hi) }
    }

    pub fn is_positive(&self) -> bool {
        self.lo > S::zero(self.ctx())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.lo >= S::zero(self.ctx())
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(&S::zero(self.ctx()))
    }

    /// Every point of `self` is below every point of `other`.
    pub fn certainly_lt(&self, other: &Self) -> bool {
        self.hi < other.lo
    }

    pub fn max(&self, other: &Self) -> Self {
        Self { lo: larger(&self.lo, &other.lo), hi: larger(&self.hi, &other.hi) }
    }

    pub fn min(&self, other: &Self) -> Self {
        Self { lo: smaller(&self.lo, &other.lo), hi: smaller(&self.hi, &other.hi) }
    }

    pub fn abs(&self) -> Self {
        let z = S::zero(self.ctx());
        if self.lo >= z {
            self.clone()
        } else if self.hi <= z {
            -self.clone()
        } else {
            let nl = self.lo.neg();
            Self { lo: z, hi: larger(&nl, &self.hi) }
        }
    }

    /// Replaces the lower endpoint by max(lo, 0); for quantities known to be nonnegative.
    pub fn clamp_nonneg(&self) -> Self {
        let z = S::zero(self.ctx());
        if self.lo >= z {
            self.clone()
        } else {
            Self { lo: z.clone(), hi: larger(&self.hi, &z) }
        }
    }

    /// `[0, hi]`.
    pub fn from_zero_to(&self) -> Self {
        let z = S::zero(self.ctx());
        Self { lo: z.clone(), hi: larger(&self.hi, &z) }
    }

    /// `[-hi, hi]` for a nonnegative radius.
    pub fn symmetric(&self) -> Self {
        Self { lo: self.hi.neg(), hi: self.hi.clone() }
    }

    pub fn sqr(&self) -> Self {
        let z = S::zero(self.ctx());
        if self.lo >= z {
            Self { lo: self.lo.mul(&self.lo, Dir::Down), hi: self.hi.mul(&self.hi, Dir::Up) }
        } else if self.hi <= z {
            Self { lo: self.hi.mul(&self.hi, Dir::Down), hi: self.lo.mul(&self.lo, Dir::Up) }
        } else {
            let a = self.lo.mul(&self.lo, Dir::Up);
            let b = self.hi.mul(&self.hi, Dir::Up);
            Self { lo: z, hi: larger(&a, &b) }
        }
    }

    pub fn powi(&self, n: u32) -> Self {
        if n == 0 {
            return Self::one(self.ctx());
        }
        if n.is_multiple_of(2) {
            return self.sqr().powi(n / 2);
        }
        if self.is_nonnegative() {
            let mut acc = self.clone();
            for _ in 1..n {
                acc = &acc * self;
            }
            return acc;
        }
        self * &self.sqr().powi(n / 2)
    }

    pub fn recip(&self) -> Result<Self> {
        if self.contains_zero() {
            return Err(Error::DomainViolation("reciprocal of an interval containing 0".into()));
        }
        let one = S::from_i64(1, self.ctx(), Dir::Down);
        Ok(Self { lo: one.div(&self.hi, Dir::Down), hi: one.div(&self.lo, Dir::Up) })
    }

    pub fn div(&self, rhs: &Self) -> Result<Self> {
        if rhs.contains_zero() {
            return Err(Error::DomainViolation("division by an interval containing 0".into()));
        }
        let (a, b) = (self, rhs);
        if a.is_nonnegative() && b.is_positive() {
            return Ok(Self { lo: a.lo.div(&b.hi, Dir::Down), hi: a.hi.div(&b.lo, Dir::Up) });
        }
        let lo = min_of([
            a.lo.div(&b.lo, Dir::Down),
            a.lo.div(&b.hi, Dir::Down),
            a.hi.div(&b.lo, Dir::Down),
            a.hi.div(&b.hi, Dir::Down),
        ]);
        let hi = max_of([
            a.lo.div(&b.lo, Dir::Up),
            a.lo.div(&b.hi, Dir::Up),
            a.hi.div(&b.lo, Dir::Up),
            a.hi.div(&b.hi, Dir::Up),
        ]);
        Ok(Self { lo, hi })
    }

    pub fn div_i64(&self, n: i64) -> Result<Self> {
        self.div(&Self::from_i64(n, self.ctx()))
    }

    pub fn mul_i64(&self, n: i64) -> Self {
        self * &Self::from_i64(n, self.ctx())
    }

    pub fn sqrt(&self) -> Result<Self> {
        if self.lo < S::zero(self.ctx()) {
            return Err(Error::DomainViolation("sqrt of a box reaching below 0".into()));
        }
        Ok(Self { lo: self.lo.sqrt(Dir::Down), hi: self.hi.sqrt(Dir::Up) })
    }

    pub fn exp(&self) -> Self {
        Self { lo: self.lo.exp(Dir::Down), hi: self.hi.exp(Dir::Up) }
    }

    pub fn ln(&self) -> Result<Self> {
        if !self.is_positive() {
            return Err(Error::DomainViolation("log of a nonpositive box".into()));
        }
        Ok(Self { lo: self.lo.ln(Dir::Down), hi: self.hi.ln(Dir::Up) })
    }

    /// `self^y` for a positive base.
    pub fn pow(&self, y: &Self) -> Result<Self> {
        Ok((y * &self.ln()?).exp())
    }

    pub fn gamma(&self) -> Result<Self> {
        special::gamma_box(self)
    }

    pub fn zeta(&self) -> Result<Self> {
        special::zeta_box(self)
    }

    pub fn map_endpoints<T: Endpoint>(&self, f: impl Fn(&S, Dir) -> T) -> Interval<T> {
        Interval { lo: f(&self.lo, Dir::Down), hi: f(&self.hi, Dir::Up) }
    }
}

impl<S: Endpoint> Add for &Interval<S> {
    type Output = Interval<S>;
    fn add(self, rhs: Self) -> Interval<S> {
        Interval { lo: self.lo.add(&rhs.lo, Dir::Down), hi: self.hi.add(&rhs.hi, Dir::Up) }
    }
}

impl<S: Endpoint> Sub for &Interval<S> {
    type Output = Interval<S>;
    fn sub(self, rhs: Self) -> Interval<S> {
        Interval { lo: self.lo.sub(&rhs.hi, Dir::Down), hi: self.hi.sub(&rhs.lo, Dir::Up) }
    }
}

impl<S: Endpoint> Mul for &Interval<S> {
    type Output = Interval<S>;
    fn mul(self, rhs: Self) -> Interval<S> {
        let z = S::zero(self.ctx());
        let (a, b) = (self, rhs);
        if a.lo >= z && b.lo >= z {
            return Interval { lo: a.lo.mul(&b.lo, Dir::Down), hi: a.hi.mul(&b.hi, Dir::Up) };
        }
        let lo = min_of([
            a.lo.mul(&b.lo, Dir::Down),
            a.lo.mul(&b.hi, Dir::Down),
            a.hi.mul(&b.lo, Dir::Down),
            a.hi.mul(&b.hi, Dir::Down),
        ]);
        let hi = max_of([
            a.lo.mul(&b.lo, Dir::Up),
            a.lo.mul(&b.hi, Dir::Up),
            a.hi.mul(&b.lo, Dir::Up),
            a.hi.mul(&b.hi, Dir::Up),
        ]);
        Interval { lo, hi }
    }
}

impl<S: Endpoint> Neg for Interval<S> {
    type Output = Interval<S>;
    fn neg(self) -> Interval<S> {
        Interval { lo: self.hi.neg(), hi: self.lo.neg() }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl<S: Endpoint> $tr for Interval<S> {
            type Output = Interval<S>;
            fn $m(self, rhs: Self) -> Interval<S> {
                (&self).$m(&rhs)
            }
        }
        impl<S: Endpoint> $tr<&Interval<S>> for Interval<S> {
            type Output = Interval<S>;
            fn $m(self, rhs: &Interval<S>) -> Interval<S> {
                (&self).$m(rhs)
            }
        }
        impl<S: Endpoint> $tr<Interval<S>> for &Interval<S> {
            type Output = Interval<S>;
            fn $m(self, rhs: Interval<S>) -> Interval<S> {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl<S: Endpoint> fmt::Display for Interval<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo.to_f64(Dir::Down), self.hi.to_f64(Dir::Up))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Sqrt,
    Exp,
    Log,
    Pow,
}

/// Checked dispatcher: rejects sentinel operands and missing arguments.
pub fn arith<S: Endpoint>(op: ArithOp, x: &Interval<S>, y: Option<&Interval<S>>) -> Result<Interval<S>> {
    if !x.is_finite() || y.is_some_and(|y| !y.is_finite()) {
        return Err(Error::DomainViolation(format!("{op:?} on a non-finite operand")));
    }
    let need = || y.ok_or_else(|| Error::InvalidInput(format!("{op:?} needs a second operand")));
    match op {
        ArithOp::Add => Ok(x + need()?),
        ArithOp::Sub => Ok(x - need()?),
        ArithOp::Mul => Ok(x * need()?),
        ArithOp::Div => x.div(need()?),
        ArithOp::Sqrt => x.sqrt(),
        ArithOp::Exp => Ok(x.exp()),
        ArithOp::Log => x.ln(),
        ArithOp::Pow => x.pow(need()?),
    }
}

/// Enclosure of Γ over a box with positive lower endpoint.
pub fn gamma_enclosure<S: Endpoint>(x: &Interval<S>) -> Result<Interval<S>> {
    if !x.is_finite() {
        return Err(Error::DomainViolation("gamma of a non-finite box".into()));
    }
    x.gamma()
}

/// Enclosure of ζ over a box with lower endpoint above 1.
pub fn zeta_enclosure<S: Endpoint>(s: &Interval<S>) -> Result<Interval<S>> {
    if !s.is_finite() {
        return Err(Error::DomainViolation("zeta of a non-finite box".into()));
    }
    s.zeta()
}
