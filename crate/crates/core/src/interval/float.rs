//! Directed rounding for hardware floats.
//!
//! The round-to-nearest result is corrected by one ulp when an error-free
//! transformation shows the exact value lies on the wrong side of it.

use rug::Float;

use super::{Dir, Endpoint};

// Below this magnitude the fma error terms may themselves underflow.
const TINY: f64 = 1.0e-290;

fn step(x: f64, dir: Dir) -> f64 {
    match dir {
        Dir::Up => x.next_up(),
        Dir::Down => x.next_down(),
    }
}

/// `x` is the nearest-rounded result, `err` has the sign of (exact - x).
fn correct(x: f64, err: f64, dir: Dir, finite_inputs: bool) -> f64 {
    if x.is_nan() {
        return x;
    }
    if x.is_infinite() {
        if !finite_inputs {
            return x;
        }
        // overflow of a finite exact value
        return match (dir, x > 0.0) {
            (Dir::Down, true) => f64::MAX,
            (Dir::Up, false) => -f64::MAX,
            _ => x,
        };
    }
    if x.abs() < TINY {
        return step(x, dir);
    }
    match dir {
        Dir::Up if err > 0.0 => x.next_up(),
        Dir::Down if err < 0.0 => x.next_down(),
        _ => x,
    }
}

pub(crate) fn add_dir(a: f64, b: f64, dir: Dir) -> f64 {
    let s = a + b;
    if a == 0.0 || b == 0.0 {
        return s;
    }
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    correct(s, err, dir, a.is_finite() && b.is_finite())
}

pub(crate) fn mul_dir(a: f64, b: f64, dir: Dir) -> f64 {
    let p = a * b;
    if a == 0.0 || b == 0.0 {
        return p;
    }
    let err = a.mul_add(b, -p);
    correct(p, err, dir, a.is_finite() && b.is_finite())
}

pub(crate) fn div_dir(a: f64, b: f64, dir: Dir) -> f64 {
    let q = a / b;
    if a == 0.0 || b.is_infinite() {
        return q;
    }
    let r = (-q).mul_add(b, a);
    let err = if b > 0.0 { r } else { -r };
    correct(q, err, dir, a.is_finite() && b.is_finite() && b != 0.0)
}

pub(crate) fn sqrt_dir(a: f64, dir: Dir) -> f64 {
    let r = a.sqrt();
    if a == 0.0 || !r.is_finite() {
        return r;
    }
    let err = (-r).mul_add(r, a);
    correct(r, err, dir, true)
}

impl Endpoint for f64 {
    type Ctx = ();

    fn ctx(&self) {}

    fn bits(_: ()) -> u32 {
        53
    }

    fn from_f64(x: f64, _: (), _: Dir) -> f64 {
        x
    }

    fn from_mpfr(x: &Float, _: (), dir: Dir) -> f64 {
        x.to_f64_round(dir.round())
    }

    fn to_mpfr(&self) -> Float {
        Float::with_val(53, *self)
    }

    fn to_f64(&self, _: Dir) -> f64 {
        *self
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }

    fn neg(&self) -> f64 {
        -*self
    }

    fn add(&self, rhs: &f64, dir: Dir) -> f64 {
        add_dir(*self, *rhs, dir)
    }

    fn sub(&self, rhs: &f64, dir: Dir) -> f64 {
        add_dir(*self, -*rhs, dir)
    }

    fn mul(&self, rhs: &f64, dir: Dir) -> f64 {
        mul_dir(*self, *rhs, dir)
    }

    fn div(&self, rhs: &f64, dir: Dir) -> f64 {
        div_dir(*self, *rhs, dir)
    }

    fn sqrt(&self, dir: Dir) -> f64 {
        sqrt_dir(*self, dir)
    }

    fn fma_assign(&mut self, a: &f64, b: &f64, dir: Dir) {
        if *a == 0.0 || *b == 0.0 {
            return;
        }
        // no cheap error-free transform for fma; step unconditionally
        let r = a.mul_add(*b, *self);
        *self = if r.is_finite() { step(r, dir) } else { r };
    }

    fn from_i64(n: i64, _: (), dir: Dir) -> f64 {
        let x = n as f64;
        if x as i128 == n as i128 {
            x
        } else {
            step(x, dir)
        }
    }
}

/// Directed rounding of an `f64` to `f32`.
fn narrow(x: f64, dir: Dir) -> f32 {
    let y = x as f32;
    if x.is_nan() {
        return y;
    }
    if y.is_infinite() && x.is_finite() {
        return match (dir, x > 0.0) {
            (Dir::Down, true) => f32::MAX,
            (Dir::Up, false) => -f32::MAX,
            _ => y,
        };
    }
    let back = y as f64;
    match dir {
        Dir::Up if back < x => y.next_up(),
        Dir::Down if back > x => y.next_down(),
        _ => y,
    }
}

// f32 endpoints compute in f64 with directed rounding, then narrow in the same direction.
impl Endpoint for f32 {
    type Ctx = ();

    fn ctx(&self) {}

    fn bits(_: ()) -> u32 {
        24
    }

    fn from_f64(x: f64, _: (), dir: Dir) -> f32 {
        narrow(x, dir)
    }

    fn from_mpfr(x: &Float, _: (), dir: Dir) -> f32 {
        narrow(x.to_f64_round(dir.round()), dir)
    }

    fn to_mpfr(&self) -> Float {
        Float::with_val(24, *self)
    }

    fn to_f64(&self, _: Dir) -> f64 {
        *self as f64
    }

    fn is_finite(&self) -> bool {
        f32::is_finite(*self)
    }

    fn neg(&self) -> f32 {
        -*self
    }

    fn add(&self, rhs: &f32, dir: Dir) -> f32 {
        narrow(add_dir(*self as f64, *rhs as f64, dir), dir)
    }

    fn sub(&self, rhs: &f32, dir: Dir) -> f32 {
        narrow(add_dir(*self as f64, -(*rhs as f64), dir), dir)
    }

    fn mul(&self, rhs: &f32, dir: Dir) -> f32 {
        narrow(mul_dir(*self as f64, *rhs as f64, dir), dir)
    }

    fn div(&self, rhs: &f32, dir: Dir) -> f32 {
        narrow(div_dir(*self as f64, *rhs as f64, dir), dir)
    }

    fn sqrt(&self, dir: Dir) -> f32 {
        narrow(sqrt_dir(*self as f64, dir), dir)
    }

    fn fma_assign(&mut self, a: &f32, b: &f32, dir: Dir) {
        let p = mul_dir(*a as f64, *b as f64, dir);
        *self = narrow(add_dir(*self as f64, p, dir), dir);
    }
}
