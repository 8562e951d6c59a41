//! Hilbert–Schmidt bounds for the parts of a block operator cut off by a section.
//!
//! For retained modes `R` and discarded modes `D = {|m| > M}`:
//! `E` couples `R` to `D` and `C` is the compression to `D`.
//! All quantities here are nonnegative and are computed as `f64` upper bounds.
//!
//! Weight coefficients beyond the enumerated range use the envelope
//! `v_j ≤ C_J j^{-p}` (`p = 1 - 2α`, see [`crate::weights::PowerEnvelope`]).

use rug::float::Round;
use rug::ops::Pow;
use rug::Float;

use crate::blocks::BlockIndex;
use crate::error::{Error, Result};
use crate::interval::float::{add_dir, div_dir, mul_dir, sqrt_dir};
use crate::interval::{Dir, Endpoint, Interval};
use crate::weights::WeightCoefficients;

pub(crate) fn up_add(a: f64, b: f64) -> f64 {
    add_dir(a, b, Dir::Up)
}

pub(crate) fn up_mul(a: f64, b: f64) -> f64 {
    mul_dir(a, b, Dir::Up)
}

pub(crate) fn up_div(a: f64, b: f64) -> f64 {
    div_dir(a, b, Dir::Up)
}

fn down_sub(a: f64, b: f64) -> f64 {
    add_dir(a, -b, Dir::Down)
}

/// Upper bound of `x^{-p}` for `x ≥ 1`, `p ≥ 0`.
pub(crate) fn pow_neg_up(x: f64, p: f64) -> f64 {
    let x = Float::with_val(64, x);
    let e = Float::with_val(64, -p);
    Float::with_val_round(53, (&x).pow(&e), Round::Up).0.to_f64_round(Round::Up)
}

/// Upper bound of `x^{p}` for `x ≥ 1`, `p ≥ 0`.
fn pow_up(x: f64, p: f64) -> f64 {
    let x = Float::with_val(64, x);
    let e = Float::with_val(64, p);
    Float::with_val_round(53, (&x).pow(&e), Round::Up).0.to_f64_round(Round::Up)
}

fn ln_up(x: f64) -> f64 {
    Float::with_val_round(53, Float::with_val(64, x).ln_ref(), Round::Up).0.to_f64_round(Round::Up)
}

/// Bound on the rounding error of a plain-`f64` sum of `n` rounded nonnegative products:
/// the exact value is at most `computed * inflation(n)`.
fn inflation(n: usize) -> f64 {
    let u = f64::EPSILON / 2.0;
    let g = (n as f64 + 4.0) * u;
    (1.0 + 2.0 * g).next_up()
}

/// Upper bounds for `v_j`, `0 ≤ j ≤ len-1`, in `f64`.
fn coefficient_upper_bounds(alpha_hi: f64, len: usize) -> Vec<f64> {
    let mut v = Vec::with_capacity(len);
    v.push(1.0);
    for j in 0..len.saturating_sub(1) {
        let jf = j as f64;
        let num = up_add(jf, alpha_hi);
        let den = down_sub(jf + 1.0, alpha_hi);
        let next = up_mul(v[j], up_div(num, den));
        v.push(next);
    }
    v
}

/// Shared data for every block of one `(N, M)`.
#[derive(Clone, Debug)]
pub struct TailContext {
    pub n_sides: u32,
    pub half_width: usize,
    alpha_lo: f64,
    alpha_hi: f64,
    /// `1 - 2α`, rounded down and up.
    p_lo: f64,
    p_hi: f64,
    vhi: Vec<f64>,
    vsq: Vec<f64>,
    /// Bracket bounding `Σ_{m,m' ∈ D} v²_{m-m'} / (|m||m'|)`.
    c_bracket: f64,
    /// Largest enumeration cutoff for the coupling block.
    l_cap: usize,
}

/// Enumerated terms per block stay below this many.
const WORK_BUDGET: usize = 200_000_000;
const MAX_LEN: usize = 1 << 22;
/// Target ratio of the analytic remainder to the enumerated part of `‖E‖²`.
const REL_REMAINDER: f64 = 1e-3;

impl TailContext {
    pub fn new<S: Endpoint>(coeffs: &WeightCoefficients<S>, half_width: usize) -> Result<Self> {
        let a = coeffs.alpha();
        let n_sides = a
            .n_sides()
            .ok_or_else(|| Error::InvalidInput("tail bounds need a polygon exponent".into()))?;
        if half_width == 0 {
            return Err(Error::InvalidInput("M must be at least 1".into()));
        }
        let alpha_lo = a.alpha().lo_f64();
        let alpha_hi = a.alpha().hi_f64();
        let p_lo = down_sub(1.0, up_mul(2.0, alpha_hi));
        let p_hi = up_add(1.0, -mul_dir(2.0, alpha_lo, Dir::Down));
        if !(p_lo > 0.0) {
            return Err(Error::TailDivergence(format!("decay exponent {p_lo} is not positive")));
        }
        let rows = 2 * half_width + 1;
        let l_cap = (WORK_BUDGET / rows).clamp(4 * half_width, MAX_LEN);
        let len = (l_cap + half_width + 2).max(5 * half_width + 2).max(MAX_LEN);
        let vhi = coefficient_upper_bounds(alpha_hi, len);
        let vsq: Vec<f64> = vhi.iter().map(|&x| up_mul(x, x)).collect();
        let mut ctx = Self { n_sides, half_width, alpha_lo, alpha_hi, p_lo, p_hi, vhi, vsq, c_bracket: 0.0, l_cap };
        ctx.c_bracket = ctx.compute_c_bracket()?;
        Ok(ctx)
    }

    /// Exponent bounds of the decay law, `(p_lo, p_hi)`.
    pub fn decay_exponent(&self) -> (f64, f64) {
        (self.p_lo, self.p_hi)
    }

    pub fn alpha_bounds(&self) -> (f64, f64) {
        (self.alpha_lo, self.alpha_hi)
    }

    /// `C_J` with `v_j ≤ C_J j^{-p_lo}` for `j ≥ J`.
    fn envelope(&self, j: usize) -> f64 {
        up_mul(self.vhi[j], pow_up(j as f64 + 1.0, self.p_hi))
    }

    fn q(&self) -> f64 {
        mul_dir(2.0, self.p_lo, Dir::Down)
    }

    /// Streams `j = 1..=J1` and `s = j + 2M + 1` through the bracket sums.
    fn compute_c_bracket(&self) -> Result<f64> {
        let m = self.half_width;
        let mf = m as f64;
        let j1 = self.vhi.len() - 2 * m - 2;
        if j1 < 3 * m {
            return Err(Error::TailDivergence("coefficient table too short".into()));
        }
        // v_0² Σ_{k>M} 1/k² ≤ 1/(M + 1/2)
        let mut same_diag = up_div(1.0, down_sub(mf, -0.5));
        let mut same = 0.0;
        let mut opp = 0.0;
        let mut hd = 0.0; // H_{M+j} - H_M
        for j in 1..=j1 {
            hd = up_add(hd, up_div(1.0, (m + j) as f64));
            same = up_add(same, up_div(up_mul(self.vsq[j], hd), j as f64));
            let s = j + 2 * m + 1;
            opp = up_add(opp, up_mul(self.vsq[s], up_div(up_mul(2.0, hd), s as f64)));
        }
        let q = self.q();
        let c = self.envelope(j1);
        let c2 = up_mul(c, c);
        let jf = j1 as f64;
        let s1 = (j1 + 2 * m + 1) as f64;
        // Σ_{j>J1} v_j² (H_{M+j}-H_M)/j
        let t_same = up_mul(
            c2,
            up_add(
                up_mul(pow_neg_up(jf, q), up_add(up_div(ln_up(jf / mf), q), up_div(1.0, up_mul(q, q)))),
                up_div(up_mul(mf, pow_neg_up(jf, q + 1.0)), q + 1.0),
            ),
        );
        // Σ_{s>S1} v_s² (2/s)(H_{s-M-1}-H_M); the tail of the stream above
        let t_opp = up_mul(
            up_mul(2.0, c2),
            up_mul(pow_neg_up(s1, q), up_add(up_div(ln_up(s1 / mf), q), up_div(1.0, up_mul(q, q)))),
        );
        same = up_add(same, t_same);
        opp = up_add(opp, t_opp);
        same_diag = up_add(same_diag, up_mul(2.0, same));
        let total = up_add(same_diag, opp);
        if !total.is_finite() {
            return Err(Error::TailDivergence("compression bracket is not finite".into()));
        }
        Ok(total)
    }

    /// `η` with `d_m ≥ η|m|` for `|m| > cutoff`.
    fn eta(&self, residue: u32, cutoff: usize) -> f64 {
        down_sub(self.n_sides as f64, up_div(residue as f64, cutoff as f64 + 1.0))
    }

    /// `‖C‖²_HS` for block `r`.
    pub fn c_sq(&self, residue: u32) -> f64 {
        let eta = self.eta(residue, self.half_width);
        up_div(up_mul(2.0, self.c_bracket), mul_dir(eta, eta, Dir::Down))
    }

    /// `Σ_{|m|>M} v_|m|² / d_m`, the squared norm of the discarded part of the first column.
    pub fn column_tail_sq(&self, residue: u32) -> f64 {
        let m = self.half_width;
        let n = self.n_sides as i64;
        let r = residue as i64;
        let k1 = self.vhi.len() - 1;
        let mut s = 0.0;
        for k in m + 1..=k1 {
            let kk = k as i64;
            let dp = (r + kk * n).unsigned_abs() as f64;
            let dn = (r - kk * n).unsigned_abs() as f64;
            s = up_add(s, up_mul(self.vsq[k], up_add(up_div(1.0, dp), up_div(1.0, dn))));
        }
        // beyond k1: 2 C² k^{-q-1}/η summed ≤ 2C² k1^{-q}/(q η)
        let c = self.envelope(k1);
        let q = self.q();
        let eta = self.eta(residue, k1);
        let tail = up_div(up_mul(up_mul(2.0, up_mul(c, c)), pow_neg_up(k1 as f64, q)), mul_dir(q, eta, Dir::Down));
        up_add(s, tail)
    }

    /// `‖E‖²_HS` for block `r` with retained modes `retained` (all `|m| ≤ M`).
    ///
    /// Discarded columns `M < |m'| ≤ L` are enumerated; the rest is bounded by
    /// `2 C_J² (L-|m|)^{-2p} / (2p η_L d_m)` with `J = L + 1 - M`.
    pub fn e_sq(&self, residue: u32, retained: &[i64]) -> Result<CouplingBound> {
        let m = self.half_width;
        let n = self.n_sides as i64;
        let r = residue as i64;
        let inv_d: Vec<f64> = retained
            .iter()
            .map(|&k| {
                let d = (r + k * n).unsigned_abs();
                if d == 0 {
                    Err(Error::ZeroMode)
                } else {
                    Ok(up_div(1.0, d as f64))
                }
            })
            .collect::<Result<_>>()?;
        let l_max = self.l_cap.min(self.vhi.len() - m - 2);
        let inv_pos: Vec<f64> = (0..=l_max).map(|k| up_div(1.0, (r + k as i64 * n).unsigned_abs() as f64)).collect();
        let inv_neg: Vec<f64> = (0..=l_max).map(|k| up_div(1.0, (r - k as i64 * n).unsigned_abs() as f64)).collect();

        let mut acc = vec![0.0f64; retained.len()];
        let enumerate = |from: usize, to: usize, acc: &mut [f64]| {
            for (a, &mm) in acc.iter_mut().zip(retained) {
                let mut s = 0.0;
                for k in from..=to {
                    let kk = k as i64;
                    s += self.vsq[(kk - mm) as usize] * inv_pos[k] + self.vsq[(kk + mm) as usize] * inv_neg[k];
                }
                *a += s;
            }
        };

        let mut l = (2 * m).max(m + 64).min(l_max);
        enumerate(m + 1, l, &mut acc);
        let first: f64 = acc.iter().zip(&inv_d).map(|(a, d)| a * d).sum();
        while l < l_max && self.remainder(residue, retained, &inv_d, l) > REL_REMAINDER * first {
            let next = (2 * l).min(l_max);
            enumerate(l + 1, next, &mut acc);
            l = next;
        }
        let terms = 2 * (l - m) + retained.len() + 4;
        let mut enumerated = 0.0;
        for (a, d) in acc.iter().zip(&inv_d) {
            enumerated += a * d;
        }
        let enumerated = up_mul(enumerated, inflation(terms));
        let remainder = self.remainder(residue, retained, &inv_d, l);
        let total = up_add(enumerated, remainder);
        if !total.is_finite() {
            return Err(Error::TailDivergence("coupling bound is not finite".into()));
        }
        Ok(CouplingBound { e_sq: total, enumerated, remainder, cutoff: l })
    }

    fn remainder(&self, residue: u32, retained: &[i64], inv_d: &[f64], l: usize) -> f64 {
        let m = self.half_width;
        let j = l + 1 - m;
        let c = self.envelope(j);
        let q = self.q();
        let eta = self.eta(residue, l);
        let pref = up_div(up_mul(2.0, up_mul(c, c)), mul_dir(q, eta, Dir::Down));
        let mut s = 0.0;
        for (&k, &d) in retained.iter().zip(inv_d) {
            let gap = (l - k.unsigned_abs() as usize) as f64;
            s = up_add(s, up_mul(d, pow_neg_up(gap, q)));
        }
        up_mul(pref, s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingBound {
    pub e_sq: f64,
    pub enumerated: f64,
    pub remainder: f64,
    /// Enumeration cutoff `L`.
    pub cutoff: usize,
}

/// Upper bounds on `‖C‖` and `‖E‖`, as intervals `[0, bound]`.
#[derive(Clone, Debug)]
pub struct TailBounds<S: Endpoint> {
    pub c_norm: Interval<S>,
    pub e_norm: Interval<S>,
    pub cutoff: usize,
}

impl<S: Endpoint> TailBounds<S> {
    pub(crate) fn from_norms(c: f64, e: f64, cutoff: usize, ctx: S::Ctx) -> Result<Self> {
        let z = S::zero(ctx);
        let c = S::from_f64(c, ctx, Dir::Up);
        let e = S::from_f64(e, ctx, Dir::Up);
        Ok(Self { c_norm: Interval::new(z.clone(), c)?, e_norm: Interval::new(z, e)?, cutoff })
    }
}

/// Tail bounds for one block. For `r = 0` the operator is `K₀ - b₀b₀ᵀ/v₀` and the
/// rank-one term adds `‖b_R‖‖b_D‖/v₀` to `‖E‖` and `‖b_D‖²/v₀` to `‖C‖`.
pub fn tail_hs_bounds_with<S: Endpoint>(
    tails: &TailContext,
    block: BlockIndex,
    coeffs: &WeightCoefficients<S>,
) -> Result<TailBounds<S>> {
    let ctx = coeffs.alpha().ctx();
    let r = block.residue;
    let retained = crate::blocks::section_modes(tails.half_width, r == 0);
    let coupling = tails.e_sq(r, &retained)?;
    let mut e = sqrt_dir(coupling.e_sq, Dir::Up);
    let mut c = sqrt_dir(tails.c_sq(r), Dir::Up);
    if r == 0 {
        // v₀ = 1
        let bd = sqrt_dir(tails.column_tail_sq(0), Dir::Up);
        let mut br = 0.0;
        for &k in &retained {
            let v = coeffs.get(k).hi_f64();
            br = up_add(br, up_div(up_mul(v, v), (k.unsigned_abs() * tails.n_sides as u64) as f64));
        }
        let br = sqrt_dir(br, Dir::Up);
        e = up_add(e, up_mul(br, bd));
        c = up_add(c, up_mul(bd, bd));
    }
    TailBounds::from_norms(c, e, coupling.cutoff, ctx)
}

pub fn tail_hs_bounds<S: Endpoint>(
    n_sides: u32,
    block: BlockIndex,
    half_width: usize,
    coeffs: &WeightCoefficients<S>,
) -> Result<TailBounds<S>> {
    if block.n_sides != n_sides {
        return Err(Error::InvalidInput("block index belongs to a different N".into()));
    }
    let tails = TailContext::new(coeffs, half_width)?;
    tail_hs_bounds_with(&tails, block, coeffs)
}
