//! Certified enclosures of block top eigenvalues and of σ₁.
//!
//! The section gives a lower bound (compression). The 2×2 comparison
//! with the tail norms gives an upper bound for the whole block.

use num_traits::Float;
use rayon::prelude::*;
use serde::Serialize;

use crate::blocks::{
    assemble_block_section, assemble_zero_block_dominant, assemble_zero_block_section, BlockIndex, BlockSection, SymmetricMatrix,
};
use crate::error::{Error, Result};
use crate::interval::{Dir, Endpoint, Interval, Mp, Precision};
use crate::tails::{tail_hs_bounds_with, TailBounds, TailContext};
use crate::weights::{coefficient_v_recursive, Alpha, WeightCoefficients};

pub const DEFAULT_HALF_WIDTH: usize = 320;
pub const POWER_ITERATIONS: usize = 25;
pub const POSITIVITY_FLOOR: f64 = 1e-30;

#[derive(Clone, Debug)]
pub struct SectionBounds<S: Endpoint> {
    pub lam_lo: S,
    pub lam_hi: S,
}

/// `y = B x` on a packed symmetric triangle.
pub(crate) fn packed_matvec<F: Float>(packed: &[F], dim: usize, x: &[F]) -> Vec<F> {
    let mut y = vec![F::zero(); dim];
    let mut k = 0;
    for i in 0..dim {
        for j in i..dim {
            let a = packed[k];
            k += 1;
            y[i] = y[i] + a * x[j];
            if j != i {
                y[j] = y[j] + a * x[i];
            }
        }
    }
    y
}

/// Plain power iteration, normalised in the max norm.
///
/// With `positive` the result is replaced by `|x| + ε`.
pub fn power_iteration<F: Float>(packed: &[F], dim: usize, iters: usize, epsilon: F, positive: bool) -> Vec<F> {
    // a slightly tilted start avoids orthogonality to the top vector
    let mut x: Vec<F> = (0..dim)
        .map(|i| F::one() + F::from(i as f64 / (dim.max(1) as f64) * 1e-3).unwrap_or(F::zero()))
        .collect();
    for _ in 0..iters.max(1) {
        let y = packed_matvec(packed, dim, &x);
        let norm = y.iter().fold(F::zero(), |m, v| m.max(v.abs()));
        if norm == F::zero() || !norm.is_finite() {
            x = y;
            break;
        }
        x = y.into_iter().map(|v| v / norm).collect();
    }
    if positive {
        for v in &mut x {
            *v = v.abs() + epsilon;
        }
    }
    x
}

/// Collatz–Wielandt test vector for a positive section.
pub fn power_iteration_guess<S: Endpoint>(matrix: &SymmetricMatrix<S>, iters: usize, epsilon: f64) -> Vec<f64> {
    power_iteration(&matrix.midpoints(), matrix.dim(), iters, epsilon, true)
}

/// `min_i (Bx)_i/x_i ≤ λ_max(B) ≤ max_i (Bx)_i/x_i` for entrywise positive `B` and `x > 0`.
pub fn collatz_wielandt_bounds<S: Endpoint>(matrix: &SymmetricMatrix<S>, x: &[S]) -> Result<SectionBounds<S>> {
    if x.len() != matrix.dim() || x.is_empty() {
        return Err(Error::InvalidInput("test vector length does not match the section".into()));
    }
    let ctx = x[0].ctx();
    let zero = S::zero(ctx);
    if let Some(i) = x.iter().position(|v| !(v > &zero)) {
        return Err(Error::NonpositiveVector(i));
    }
    if !matrix.all_positive() {
        return Err(Error::PreconditionViolation("section has a non-positive entry".into()));
    }
    let (lo, hi) = matrix.matvec_bounds(x);
    let mut lam_lo: Option<S> = None;
    let mut lam_hi: Option<S> = None;
    for i in 0..x.len() {
        let a = lo[i].div(&x[i], Dir::Down);
        let b = hi[i].div(&x[i], Dir::Up);
        if lam_lo.as_ref().is_none_or(|m| a < *m) {
            lam_lo = Some(a);
        }
        if lam_hi.as_ref().is_none_or(|m| b > *m) {
            lam_hi = Some(b);
        }
    }
    Ok(SectionBounds { lam_lo: lam_lo.expect("nonempty"), lam_hi: lam_hi.expect("nonempty") })
}

/// Rayleigh-quotient lower bound and max-row-sum upper bound, valid for signed entries.
pub fn symmetric_bounds_zero_block<S: Endpoint>(matrix: &SymmetricMatrix<S>, x: &[S]) -> Result<SectionBounds<S>> {
    if x.len() != matrix.dim() || x.is_empty() {
        return Err(Error::InvalidInput("test vector length does not match the section".into()));
    }
    let ctx = x[0].ctx();
    let zero = S::zero(ctx);
    if x.iter().all(|v| v == &zero) {
        return Err(Error::ZeroVector);
    }
    let (lo, hi) = matrix.matvec_bounds(x);
    // <Bx, x> from below
    let mut num = zero.clone();
    for i in 0..x.len() {
        let bi = if x[i] >= zero { &lo[i] } else { &hi[i] };
        num.fma_assign(bi, &x[i], Dir::Down);
    }
    let mut den_lo = zero.clone();
    let mut den_hi = zero.clone();
    for v in x {
        den_lo.fma_assign(v, v, Dir::Down);
        den_hi.fma_assign(v, v, Dir::Up);
    }
    let lam_lo = if num >= zero { num.div(&den_hi, Dir::Down) } else { num.div(&den_lo, Dir::Down) };

    let n = matrix.dim();
    let mut rows = vec![zero.clone(); n];
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            let a = matrix.packed()[k].abs();
            k += 1;
            rows[i] = rows[i].add(a.hi(), Dir::Up);
            if j != i {
                rows[j] = rows[j].add(a.hi(), Dir::Up);
            }
        }
    }
    let lam_hi = rows.into_iter().fold(zero, |m, r| if r > m { r } else { m });
    Ok(SectionBounds { lam_lo, lam_hi })
}

/// Largest eigenvalue of `[[a, e], [e, c]]`, `((a+c) + sqrt((a-c)² + 4e²))/2`.
pub fn two_by_two_top<S: Endpoint>(a: &Interval<S>, e: &Interval<S>, c: &Interval<S>) -> Result<Interval<S>> {
    let d = (a - c).sqr();
    let disc = &d + &e.sqr().mul_i64(4);
    (&(a + c) + &disc.sqrt()?).div_i64(2)
}

#[derive(Clone, Debug)]
pub struct BlockEnclosure<S: Endpoint> {
    pub block: BlockIndex,
    pub lambda_lo: S,
    pub lambda_hi: S,
    pub section_half_width: usize,
    pub section: SectionBounds<S>,
    pub tail: TailBounds<S>,
}

impl<S: Endpoint> BlockEnclosure<S> {
    pub fn interval(&self) -> Interval<S> {
        Interval::raw(self.lambda_lo.clone(), self.lambda_hi.clone())
    }
}

/// Section bounds: Collatz–Wielandt when every entry is positive, Rayleigh/row-sum otherwise.
pub fn section_bounds<S: Endpoint>(section: &BlockSection<S>) -> Result<SectionBounds<S>> {
    let ctx = section.matrix.packed()[0].ctx();
    let positive = section.matrix.all_positive();
    let guess = power_iteration(&section.matrix.midpoints(), section.dim(), POWER_ITERATIONS, POSITIVITY_FLOOR, positive);
    let x: Vec<S> = guess.iter().map(|&g| S::from_f64(g, ctx, Dir::Down)).collect();
    if positive {
        collatz_wielandt_bounds(&section.matrix, &x)
    } else {
        symmetric_bounds_zero_block(&section.matrix, &x)
    }
}

pub fn block_enclosure_with<S: Endpoint>(
    tails: &TailContext,
    block: BlockIndex,
    coeffs: &WeightCoefficients<S>,
) -> Result<BlockEnclosure<S>> {
    let half_width = tails.half_width;
    let bounds = if block.residue == 0 {
        let section = assemble_zero_block_section(block.n_sides, half_width, coeffs)?;
        let mut b = section_bounds(&section)?;
        // Weyl: subtracting the positive semidefinite rank-one part cannot raise the top
        let dominant = section_bounds(&assemble_zero_block_dominant(block.n_sides, half_width, coeffs)?)?;
        if dominant.lam_hi < b.lam_hi {
            b.lam_hi = dominant.lam_hi;
        }
        b
    } else {
        section_bounds(&assemble_block_section(block, half_width, coeffs)?)?
    };
    let tail = tail_hs_bounds_with(tails, block, coeffs)?;
    let top = two_by_two_top(&Interval::point(bounds.lam_hi.clone()), &tail.e_norm.hi_point(), &tail.c_norm.hi_point())?;
    let lambda_lo = bounds.lam_lo.clone();
    let lambda_hi = top.hi().clone();
    if !(lambda_lo <= lambda_hi) {
        return Err(Error::PreconditionViolation(format!("block {} produced an inverted enclosure", block.residue)));
    }
    Ok(BlockEnclosure { block, lambda_lo, lambda_hi, section_half_width: half_width, section: bounds, tail })
}

pub fn block_enclosure<S: Endpoint>(
    n_sides: u32,
    residue: u32,
    half_width: usize,
    coeffs: &WeightCoefficients<S>,
) -> Result<BlockEnclosure<S>> {
    let block = BlockIndex::new(n_sides, residue)?;
    let tails = TailContext::new(coeffs, half_width)?;
    block_enclosure_with(&tails, block, coeffs)
}

#[derive(Clone, Debug)]
pub struct SigmaEnclosure<S: Endpoint> {
    pub n_sides: u32,
    pub sigma_lo: S,
    pub sigma_hi: S,
    /// Block with the largest certified lower bound, as `min(r, N - r)`.
    pub argmax_block: u32,
    pub per_block: Vec<BlockEnclosure<S>>,
    pub half_width: usize,
}

impl<S: Endpoint> SigmaEnclosure<S> {
    pub fn interval(&self) -> Interval<S> {
        Interval::raw(self.sigma_lo.clone(), self.sigma_hi.clone())
    }

    pub fn width_f64(&self) -> f64 {
        self.interval().width_f64()
    }
}

/// `σ₁ ∈ [1/Λ̄, 1/Λ̲]` with `Λ̲ = max_r λ̲_r` and `Λ̄ = max_r λ̄_r`.
pub fn sigma_enclosure_with<S: Endpoint>(n_sides: u32, half_width: usize, ctx: S::Ctx) -> Result<SigmaEnclosure<S>> {
    if half_width == 0 {
        return Err(Error::InvalidInput("M must be at least 1".into()));
    }
    let alpha = Alpha::<S>::new(n_sides, ctx)?;
    let coeffs = coefficient_v_recursive(2 * half_width, &alpha);
    let tails = TailContext::new(&coeffs, half_width)?;
    let per_block: Vec<BlockEnclosure<S>> = (0..n_sides)
        .into_par_iter()
        .map(|r| block_enclosure_with(&tails, BlockIndex { n_sides, residue: r }, &coeffs))
        .collect::<Result<_>>()?;
    let mut big_lo = per_block[0].lambda_lo.clone();
    let mut big_hi = per_block[0].lambda_hi.clone();
    let mut argmax = 0;
    for b in &per_block[1..] {
        if b.lambda_lo > big_lo {
            big_lo = b.lambda_lo.clone();
            argmax = b.block.residue;
        }
        if b.lambda_hi > big_hi {
            big_hi = b.lambda_hi.clone();
        }
    }
    // conjugate blocks share a spectrum; report the smaller residue
    let argmax = argmax.min((n_sides - argmax) % n_sides);
    let zero = S::zero(ctx);
    if !(big_lo > zero) {
        return Err(Error::PreconditionViolation("no block has a positive lower bound".into()));
    }
    let one = S::from_i64(1, ctx, Dir::Down);
    Ok(SigmaEnclosure {
        n_sides,
        sigma_lo: one.div(&big_hi, Dir::Down),
        sigma_hi: one.div(&big_lo, Dir::Up),
        argmax_block: argmax,
        per_block,
        half_width,
    })
}

pub fn sigma_enclosure(n_sides: u32, half_width: usize, precision: Precision) -> Result<SigmaEnclosure<Mp>> {
    sigma_enclosure_with::<Mp>(n_sides, half_width, precision.bits())
}

/// Summary of a block for reports.
#[derive(Clone, Debug, Serialize)]
pub struct BlockSummary {
    pub residue: u32,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub e_norm: f64,
    pub c_norm: f64,
    pub cutoff: usize,
}

impl<S: Endpoint> From<&BlockEnclosure<S>> for BlockSummary {
    fn from(b: &BlockEnclosure<S>) -> Self {
        BlockSummary {
            residue: b.block.residue,
            lambda_lo: b.lambda_lo.to_f64(Dir::Down),
            lambda_hi: b.lambda_hi.to_f64(Dir::Up),
            e_norm: b.tail.e_norm.hi_f64(),
            c_norm: b.tail.c_norm.hi_f64(),
            cutoff: b.tail.cutoff,
        }
    }
}
