use rug::Float;

use super::{Dir, Endpoint, Interval};
use crate::error::{Error, Result};

/// Location of the positive minimum of Γ, truncated.
pub const GAMMA_MIN_ARG: &str = "1.46163214496836234126265954232572132846819620400644";
/// Γ at its positive minimum, truncated.
pub const GAMMA_MIN_VALUE: &str = "0.88560319441088870027881590058258873320795153366990";

const ARG_LO: &str = "1.461632144968362341262659542325";
const ARG_HI: &str = "1.461632144968362341262659542326";
const VALUE_LO: &str = "0.885603194410888700278815900582";

fn parse_dir<S: Endpoint>(s: &str, ctx: S::Ctx, dir: Dir) -> S {
    let p = Float::parse(s).expect("valid literal");
    let bits = S::bits(ctx).max(128);
    let (f, _) = Float::with_val_round(bits, p, dir.round());
    S::from_mpfr(&f, ctx, dir)
}

/// Γ is decreasing on (0, x0] and increasing on [x0, ∞).
pub(super) fn gamma_box<S: Endpoint>(x: &Interval<S>) -> Result<Interval<S>> {
    let ctx = x.ctx();
    if !x.is_positive() {
        return Err(Error::DomainViolation("gamma needs x.lo > 0".into()));
    }
    let arg_lo: S = parse_dir(ARG_LO, ctx, Dir::Down);
    let arg_hi: S = parse_dir(ARG_HI, ctx, Dir::Up);
    if x.hi <= arg_lo {
        return Ok(Interval::raw(x.hi.gamma(Dir::Down), x.lo.gamma(Dir::Up)));
    }
    if x.lo >= arg_hi {
        return Ok(Interval::raw(x.lo.gamma(Dir::Down), x.hi.gamma(Dir::Up)));
    }
    let a = x.lo.gamma(Dir::Up);
    let b = x.hi.gamma(Dir::Up);
    let hi = if a > b { a } else { b };
    let lo: S = parse_dir(VALUE_LO, ctx, Dir::Down);
    Ok(Interval::raw(lo, hi))
}

/// ζ is decreasing on (1, ∞).
pub(super) fn zeta_box<S: Endpoint>(s: &Interval<S>) -> Result<Interval<S>> {
    let ctx = s.ctx();
    let one = S::from_i64(1, ctx, Dir::Down);
    if !(s.lo > one) {
        return Err(Error::DomainViolation("zeta needs s.lo > 1".into()));
    }
    Ok(Interval::raw(s.hi.zeta(Dir::Down), s.lo.zeta(Dir::Up)))
}
