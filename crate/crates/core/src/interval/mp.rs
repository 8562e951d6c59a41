use std::cmp::Ordering;
use std::fmt;

use rug::Float;

use super::{Dir, Endpoint};

/// Multiple-precision endpoint backed by MPFR. The context is the mantissa width in bits.
#[derive(Clone, Debug, PartialEq)]
pub struct Mp(pub Float);

impl PartialOrd for Mp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

impl fmt::Display for Mp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl Mp {
    pub fn inner(&self) -> &Float {
        &self.0
    }

    fn prec2(&self, rhs: &Self) -> u32 {
        self.0.prec().max(rhs.0.prec())
    }
}

impl Endpoint for Mp {
    type Ctx = u32;

    fn ctx(&self) -> u32 {
        self.0.prec()
    }

    fn bits(ctx: u32) -> u32 {
        ctx
    }

    fn from_f64(x: f64, ctx: u32, dir: Dir) -> Mp {
        Mp(Float::with_val_round(ctx.max(53), x, dir.round()).0)
    }

    fn from_mpfr(x: &Float, ctx: u32, dir: Dir) -> Mp {
        Mp(Float::with_val_round(ctx, x, dir.round()).0)
    }

    fn to_mpfr(&self) -> Float {
        self.0.clone()
    }

    fn to_f64(&self, dir: Dir) -> f64 {
        self.0.to_f64_round(dir.round())
    }

    fn is_finite(&self) -> bool {
        self.0.is_finite()
    }

    fn neg(&self) -> Mp {
        Mp(-self.0.clone())
    }

    fn add(&self, rhs: &Mp, dir: Dir) -> Mp {
        Mp(Float::with_val_round(self.prec2(rhs), &self.0 + &rhs.0, dir.round()).0)
    }

    fn sub(&self, rhs: &Mp, dir: Dir) -> Mp {
        Mp(Float::with_val_round(self.prec2(rhs), &self.0 - &rhs.0, dir.round()).0)
    }

    fn mul(&self, rhs: &Mp, dir: Dir) -> Mp {
        Mp(Float::with_val_round(self.prec2(rhs), &self.0 * &rhs.0, dir.round()).0)
    }

    fn div(&self, rhs: &Mp, dir: Dir) -> Mp {
        Mp(Float::with_val_round(self.prec2(rhs), &self.0 / &rhs.0, dir.round()).0)
    }

    fn sqrt(&self, dir: Dir) -> Mp {
        Mp(Float::with_val_round(self.0.prec(), self.0.sqrt_ref(), dir.round()).0)
    }

    fn fma_assign(&mut self, a: &Mp, b: &Mp, dir: Dir) {
        let rnd = match dir {
            Dir::Down => gmp_mpfr_sys::mpfr::rnd_t::RNDD,
            Dir::Up => gmp_mpfr_sys::mpfr::rnd_t::RNDU,
        };
        let acc = self.0.as_raw_mut();
        // SAFETY: all pointers refer to initialised MPFR values; MPFR allows the
        // output to alias an input.
        unsafe {
            gmp_mpfr_sys::mpfr::fma(acc, a.0.as_raw(), b.0.as_raw(), acc, rnd);
        }
    }

    fn from_i64(n: i64, ctx: u32, dir: Dir) -> Mp {
        Mp(Float::with_val_round(ctx, n, dir.round()).0)
    }
}
