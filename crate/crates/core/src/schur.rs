//! Scalar reduction of the critical block `r = 1`.
//!
//! Split around the mode `m = 0`, the block is `A = [[1, bᵀ], [b, K]]` and its top
//! eigenvalue is the unique root `λ* > 1` of `F(λ) = λ - 1 - ⟨(λ - K)⁻¹ b, b⟩`.
//! Retained modes `0 < |m| ≤ M` form `R`, the others `D`, and `K = [[K_R, E], [Eᵀ, C]]`.
//!
//! `κ` is the Hilbert–Schmidt bound `sqrt(‖K_R‖² + 2‖E‖² + ‖C‖²)`, which dominates `‖K‖`.

use crate::blocks::{critical_block_data, section_modes, CriticalBlockData};
use crate::certify::packed_matvec;
use crate::error::{Error, Result};
use crate::interval::float::sqrt_dir;
use crate::interval::{Dir, Endpoint, Interval, Mp, Precision};
use crate::tails::TailContext;
use crate::weights::{coefficient_v_recursive, Alpha, WeightCoefficients};

/// Refinement steps of the resolvent solve beyond the first `f64` pass.
const REFINEMENTS: usize = 3;
const CG_TOLERANCE: f64 = 1e-17;
/// Target width of `λ*`.
pub const ROOT_TOLERANCE: f64 = 1e-25;
const MAX_ROOT_STEPS: usize = 200;

#[derive(Clone, Debug)]
pub struct SchurState<S: Endpoint> {
    pub n_sides: u32,
    pub half_width: usize,
    pub data: CriticalBlockData<S>,
    /// `‖b‖²` including the discarded part.
    pub beta: Interval<S>,
    /// `[0, κ]` with `‖K‖ ≤ κ`.
    pub kappa: Interval<S>,
    /// `‖b_R‖²`.
    pub b_retained_sq: Interval<S>,
    /// Upper bound on `‖b_D‖`.
    pub b_discarded: S,
    /// Upper bound on `‖E‖`.
    pub coupling: S,
    /// Upper bound on `‖C‖`.
    pub compression: S,
    k_mid: Vec<f64>,
}

impl<S: Endpoint> SchurState<S> {
    fn ctx(&self) -> S::Ctx {
        self.kappa.ctx()
    }

    /// The same state with `b` set to zero; `F` then reduces to `λ - 1`.
    pub fn without_coupling(&self) -> Self {
        let ctx = self.ctx();
        let mut s = self.clone();
        for b in &mut s.data.b {
            *b = Interval::zero(ctx);
        }
        s.beta = Interval::zero(ctx);
        s.b_retained_sq = Interval::zero(ctx);
        s.b_discarded = S::zero(ctx);
        s
    }

    fn b_retained_norm(&self) -> S {
        self.b_retained_sq.hi().sqrt(Dir::Up)
    }
}

/// `β = ‖b‖²` and `κ ≥ ‖K‖` with certified tails.
pub fn beta_and_kappa<S: Endpoint>(
    n_sides: u32,
    half_width: usize,
    coeffs: &WeightCoefficients<S>,
) -> Result<SchurState<S>> {
    if coeffs.alpha().n_sides() != Some(n_sides) {
        return Err(Error::InvalidInput("coefficients belong to a different N".into()));
    }
    let ctx = coeffs.alpha().ctx();
    let data = critical_block_data(n_sides, half_width, coeffs)?;
    let b_retained_sq = data.b.iter().fold(Interval::zero(ctx), |s, b| &s + &b.sqr());

    let tails = TailContext::new(coeffs, half_width)?;
    let up = |x: f64| S::from_f64(x, ctx, Dir::Up);
    let b_discarded = up(sqrt_dir(tails.column_tail_sq(1), Dir::Up));
    let coupling = up(sqrt_dir(tails.e_sq(1, &section_modes(half_width, true))?.e_sq, Dir::Up));
    let compression = up(sqrt_dir(tails.c_sq(1), Dir::Up));

    let mut k_sq = data.k_section.matrix.hs_norm_sq_hi();
    k_sq.fma_assign(&S::from_i64(2, ctx, Dir::Up), &coupling.mul(&coupling, Dir::Up), Dir::Up);
    k_sq.fma_assign(&compression, &compression, Dir::Up);
    let kappa = Interval::point(k_sq.sqrt(Dir::Up)).from_zero_to();

    let bd_sq = Interval::point(b_discarded.mul(&b_discarded, Dir::Up)).from_zero_to();
    let beta = &b_retained_sq + &bd_sq;
    let k_mid = data.k_section.matrix.midpoints();
    Ok(SchurState {
        n_sides,
        half_width,
        data,
        beta,
        kappa,
        b_retained_sq,
        b_discarded,
        coupling,
        compression,
        k_mid,
    })
}

/// [`beta_and_kappa`] with multiple-precision coefficients.
pub fn schur_state(n_sides: u32, half_width: usize, precision: Precision) -> Result<SchurState<Mp>> {
    let alpha = Alpha::<Mp>::new(n_sides, precision.bits())?;
    let coeffs = coefficient_v_recursive(2 * half_width, &alpha);
    beta_and_kappa(n_sides, half_width, &coeffs)
}

/// Conjugate gradients for `(λ - K_mid) x = rhs`, which is positive definite for `λ > κ`.
fn cg_solve(k_mid: &[f64], dim: usize, lambda: f64, rhs: &[f64]) -> Vec<f64> {
    let apply = |x: &[f64]| -> Vec<f64> {
        let kx = packed_matvec(k_mid, dim, x);
        x.iter().zip(kx).map(|(xi, ki)| lambda * xi - ki).collect()
    };
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut x = vec![0.0; dim];
    let mut r = rhs.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let stop = CG_TOLERANCE * CG_TOLERANCE * rr;
    for _ in 0..4 * dim.max(1) {
        if rr <= stop || rr == 0.0 {
            break;
        }
        let ap = apply(&p);
        let step = rr / dot(&p, &ap);
        for i in 0..dim {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        let next = dot(&r, &r);
        let ratio = next / rr;
        rr = next;
        for i in 0..dim {
            p[i] = r[i] + ratio * p[i];
        }
    }
    x
}

/// Approximate `(λ - K_R)⁻¹ b_R` with its rigorous residual.
struct Resolve<S: Endpoint> {
    y: Vec<S>,
    /// `b_R - (λ - K_R) y`, valid for every `λ` in the input interval.
    rho: Vec<Interval<S>>,
    rho_norm: S,
    y_norm: S,
}

fn residual<S: Endpoint>(state: &SchurState<S>, lambda: &Interval<S>, y: &[S]) -> Vec<Interval<S>> {
    let (lo, hi) = state.data.k_section.matrix.matvec_bounds(y);
    state
        .data
        .b
        .iter()
        .zip(y)
        .zip(lo.into_iter().zip(hi))
        .map(|((b, yi), (l, h))| &(b - &(lambda * &Interval::point(yi.clone()))) + &Interval::raw(l, h))
        .collect()
}

fn norm_hi<S: Endpoint>(v: &[Interval<S>], ctx: S::Ctx) -> S {
    let mut s = S::zero(ctx);
    for x in v {
        let a = x.abs();
        s.fma_assign(a.hi(), a.hi(), Dir::Up);
    }
    s.sqrt(Dir::Up)
}

fn resolve<S: Endpoint>(state: &SchurState<S>, lambda: &Interval<S>) -> Resolve<S> {
    let ctx = state.ctx();
    let dim = state.data.b.len();
    let lam = lambda.mid_f64();
    let rhs: Vec<f64> = state.data.b.iter().map(|b| b.mid_f64()).collect();
    let mut y: Vec<S> = cg_solve(&state.k_mid, dim, lam, &rhs).into_iter().map(|v| S::from_f64(v, ctx, Dir::Up)).collect();
    let mut rho = residual(state, lambda, &y);
    let mut rho_norm = norm_hi(&rho, ctx);
    for _ in 0..REFINEMENTS {
        let rhs: Vec<f64> = rho.iter().map(|r| r.mid_f64()).collect();
        let delta = cg_solve(&state.k_mid, dim, lam, &rhs);
        let cand: Vec<S> = y.iter().zip(&delta).map(|(yi, d)| yi.add(&S::from_f64(*d, ctx, Dir::Up), Dir::Up)).collect();
        let cand_rho = residual(state, lambda, &cand);
        let cand_norm = norm_hi(&cand_rho, ctx);
        if !(cand_norm < rho_norm) {
            break;
        }
        y = cand;
        rho = cand_rho;
        rho_norm = cand_norm;
    }
    let mut yy = S::zero(ctx);
    for v in &y {
        yy.fma_assign(v, v, Dir::Up);
    }
    Resolve { y, rho, rho_norm, y_norm: yy.sqrt(Dir::Up) }
}

/// Ingredients shared by `F` and the eigenvector enclosure.
struct Evaluation<S: Endpoint> {
    res: Resolve<S>,
    /// `1 / (λ_lo - κ)`, rounded up.
    inv_gap: S,
    /// Upper bound on `‖w‖`, `w = Eᵀ (λ - K_R)⁻¹ b_R`.
    w_norm: S,
    /// `⟨(λ - K)⁻¹ b, b⟩`.
    schur_term: Interval<S>,
}

fn evaluate<S: Endpoint>(lambda: &Interval<S>, state: &SchurState<S>) -> Result<Evaluation<S>> {
    let ctx = state.ctx();
    if !(lambda.lo() > state.kappa.hi()) {
        return Err(Error::SpectrumProximity);
    }
    let gap = lambda.lo().sub(state.kappa.hi(), Dir::Down);
    let inv_gap = S::from_i64(1, ctx, Dir::Up).div(&gap, Dir::Up);
    let res = resolve(state, lambda);

    let mut s = Interval::zero(ctx);
    for ((yi, bi), ri) in res.y.iter().zip(&state.data.b).zip(&res.rho) {
        let y = Interval::point(yi.clone());
        s = &s + &(&y * &(bi + ri));
    }
    // ⟨(λ - K_R)⁻¹ρ, ρ⟩ ∈ [0, ‖ρ‖²/(λ - κ)]
    let rho_sq = res.rho_norm.mul(&res.rho_norm, Dir::Up);
    let up = |x: S| Interval::point(x).from_zero_to();
    s = &s + &up(rho_sq.mul(&inv_gap, Dir::Up));

    let z_norm = res.y_norm.add(&res.rho_norm.mul(&inv_gap, Dir::Up), Dir::Up);
    let w_norm = state.coupling.mul(&z_norm, Dir::Up);
    let bd = &state.b_discarded;
    let w_sq = w_norm.mul(&w_norm, Dir::Up).mul(&inv_gap, Dir::Up);
    let cross = S::from_i64(2, ctx, Dir::Up).mul(&w_norm, Dir::Up).mul(bd, Dir::Up).mul(&inv_gap, Dir::Up);
    let bd_sq = bd.mul(bd, Dir::Up).mul(&inv_gap, Dir::Up);
    let schur_term = &(&(&s + &up(w_sq)) + &Interval::point(cross).symmetric()) + &up(bd_sq);
    Ok(Evaluation { res, inv_gap, w_norm, schur_term })
}

/// `F(λ) = λ - 1 - ⟨(λ - K)⁻¹ b, b⟩`.
pub fn schur_f<S: Endpoint>(lambda: &Interval<S>, state: &SchurState<S>) -> Result<Interval<S>> {
    let ev = evaluate(lambda, state)?;
    Ok(&(lambda - &Interval::one(state.ctx())) - &ev.schur_term)
}

#[derive(Clone, Debug)]
pub struct SchurRoot<S: Endpoint> {
    pub lambda_star: Interval<S>,
    /// `λ* - 1`.
    pub theta: Interval<S>,
    /// A-priori window `[(1 + sqrt(1 + 4β))/2, 1 + β/(1 - κ)]`.
    pub window: Interval<S>,
    /// `F(window.lo) < 0` and `0 < F(window.hi)` were both certified.
    pub sign_change_certified: bool,
    pub steps: usize,
}

pub fn a_priori_window<S: Endpoint>(state: &SchurState<S>) -> Result<Interval<S>> {
    let ctx = state.ctx();
    let one = Interval::one(ctx);
    if !(state.kappa.hi() < one.lo()) {
        return Err(Error::WindowViolation(format!("κ ≤ {} is not below 1", state.kappa.hi_f64())));
    }
    let b_lo = state.beta.lo_point();
    let lo = (&one + &(&one + &b_lo.mul_i64(4)).sqrt()?).div_i64(2)?;
    let hi = &one + &state.beta.hi_point().div(&(&one - &state.kappa.hi_point()))?;
    Interval::new(lo.lo().clone(), hi.hi().clone())
}

/// Shrinks the a-priori window around `λ*`.
///
/// Each step evaluates `F` at the midpoint; since `F' ≥ 1`, `λ*` lies in
/// `[λ - max(F(λ), 0), λ - min(F(λ), 0)]`.
pub fn schur_root<S: Endpoint>(state: &SchurState<S>) -> Result<SchurRoot<S>> {
    let ctx = state.ctx();
    let window = a_priori_window(state)?;
    let f_lo = schur_f(&window.lo_point(), state)?;
    let f_hi = schur_f(&window.hi_point(), state)?;
    let zero = S::zero(ctx);
    let sign_change_certified = f_lo.hi() < &zero && f_hi.lo() > &zero;

    let mut a = window.lo().clone();
    let mut b = window.hi().clone();
    let mut steps = 0;
    while steps < MAX_ROOT_STEPS {
        let width = b.sub(&a, Dir::Up);
        if width.to_f64(Dir::Up) <= ROOT_TOLERANCE {
            break;
        }
        steps += 1;
        let mid = a.add(&b, Dir::Up).div(&S::from_i64(2, ctx, Dir::Up), Dir::Up);
        let f = schur_f(&Interval::point(mid.clone()), state)?;
        let pos = if f.hi() > &zero { f.hi().clone() } else { zero.clone() };
        let neg = if f.lo() < &zero { f.lo().clone() } else { zero.clone() };
        let na = mid.sub(&pos, Dir::Down);
        let nb = mid.sub(&neg, Dir::Up);
        let na = if na > a { na } else { a.clone() };
        let nb = if nb < b { nb } else { b.clone() };
        if !(na <= nb) {
            return Err(Error::PreconditionViolation("Schur bracket became empty".into()));
        }
        let shrunk = nb.sub(&na, Dir::Up);
        a = na;
        b = nb;
        // the enclosure of F is now the limiting factor
        if !(shrunk.to_f64(Dir::Up) < 0.75 * width.to_f64(Dir::Down)) {
            break;
        }
    }
    let lambda_star = Interval::new(a, b)?;
    let theta = &lambda_star - &Interval::one(ctx);
    Ok(SchurRoot { lambda_star, theta, window, sign_change_certified, steps })
}

/// Enclosure of the top eigenvector of the block on `|m| ≤ M`, normalised by `x_0 = 1`.
#[derive(Clone, Debug)]
pub struct EigenvectorSection<S: Endpoint> {
    /// `0` followed by the retained modes of `K`.
    pub modes: Vec<i64>,
    pub components: Vec<Interval<S>>,
    /// Upper bound on the discarded part `‖x_D‖`.
    pub discarded_norm: S,
    /// Upper bound on `‖(A_section - λ*) x̃‖_∞` for the point vector `x̃ = (1, y)`.
    pub residual_inf: S,
}

pub fn schur_eigenvector_section<S: Endpoint>(root: &SchurRoot<S>, state: &SchurState<S>) -> Result<EigenvectorSection<S>> {
    let ctx = state.ctx();
    let lambda = &root.lambda_star;
    let ev = evaluate(lambda, state)?;
    // x = (λ - K)⁻¹ b differs from y by (λ - K_R)⁻¹ρ, (λ - K)⁻¹w and (λ - K)⁻¹b_D
    let spill = ev.w_norm.add(&state.b_discarded, Dir::Up).mul(&ev.inv_gap, Dir::Up);
    let radius = ev.res.rho_norm.mul(&ev.inv_gap, Dir::Up).add(&spill, Dir::Up);
    let r = Interval::point(radius).symmetric();
    let mut components = vec![Interval::one(ctx)];
    components.extend(ev.res.y.iter().map(|y| &Interval::point(y.clone()) + &r));
    let mut modes = vec![0];
    modes.extend(state.data.k_section.modes.iter().copied());

    let mut dot = Interval::zero(ctx);
    for (yi, bi) in ev.res.y.iter().zip(&state.data.b) {
        dot = &dot + &(&Interval::point(yi.clone()) * bi);
    }
    let head = (&(&Interval::one(ctx) - lambda) + &dot).abs();
    let mut residual_inf = head.hi().clone();
    for rho in &ev.res.rho {
        let a = rho.abs();
        if a.hi() > &residual_inf {
            residual_inf = a.hi().clone();
        }
    }
    Ok(EigenvectorSection { modes, components, discarded_norm: spill, residual_inf })
}

/// `M_j = ⟨K^j b, b⟩` for `j ≤ 2` from a state. Every entry of `K` and `b` is
/// positive, so the discarded contributions are nonnegative.
pub fn moment_from_state<S: Endpoint>(state: &SchurState<S>, j: u8) -> Result<Interval<S>> {
    let ctx = state.ctx();
    let br = state.b_retained_norm();
    let bd = &state.b_discarded;
    let e = &state.coupling;
    let c = &state.compression;
    match j {
        0 => Ok(state.beta.clone()),
        1 => {
            let kb = state.data.k_section.matrix.matvec_interval(&state.data.b);
            let head = kb.iter().zip(&state.data.b).fold(Interval::zero(ctx), |s, (k, b)| &s + &(k * b));
            // 2⟨E b_D, b_R⟩ + ⟨C b_D, b_D⟩
            let mut tail = S::from_i64(2, ctx, Dir::Up).mul(&br, Dir::Up).mul(e, Dir::Up).mul(bd, Dir::Up);
            tail.fma_assign(c, &bd.mul(bd, Dir::Up), Dir::Up);
            Ok(&head.clamp_nonneg() + &Interval::point(tail).from_zero_to())
        }
        2 => {
            let kb = state.data.k_section.matrix.matvec_interval(&state.data.b);
            let head = kb.iter().fold(Interval::zero(ctx), |s, k| &s + &k.sqr()).clamp_nonneg();
            let kb_norm = head.hi().sqrt(Dir::Up);
            // (Kb)_R = K_R b_R + E b_D, (Kb)_D = Eᵀ b_R + C b_D
            let r = kb_norm.add(&e.mul(bd, Dir::Up), Dir::Up);
            let d = e.mul(&br, Dir::Up).add(&c.mul(bd, Dir::Up), Dir::Up);
            let mut hi = r.mul(&r, Dir::Up);
            hi.fma_assign(&d, &d, Dir::Up);
            Interval::new(head.lo().clone(), hi)
        }
        _ => Err(Error::InvalidInput(format!("moment index {j} is not 0, 1 or 2"))),
    }
}

pub fn moment<S: Endpoint>(j: u8, n_sides: u32, half_width: usize, coeffs: &WeightCoefficients<S>) -> Result<Interval<S>> {
    if j > 2 {
        return Err(Error::InvalidInput(format!("moment index {j} is not 0, 1 or 2")));
    }
    moment_from_state(&beta_and_kappa(n_sides, half_width, coeffs)?, j)
}

/// Threshold above which the window bounds on `β` and `κ` are available.
pub const MOMENT_WINDOW_N: u32 = 20;

/// `|θ - (M_0 + M_1 + M_2)| ≤ 8β² + 2βκ³`.
pub fn theta_from_state<S: Endpoint>(state: &SchurState<S>) -> Result<Interval<S>> {
    if state.n_sides < MOMENT_WINDOW_N {
        return Err(Error::WindowViolation(format!("N = {} is below {MOMENT_WINDOW_N}", state.n_sides)));
    }
    let ctx = state.ctx();
    let sum = &(&moment_from_state(state, 0)? + &moment_from_state(state, 1)?) + &moment_from_state(state, 2)?;
    let b = state.beta.hi();
    let k = state.kappa.hi();
    let mut err = S::from_i64(8, ctx, Dir::Up).mul(&b.mul(b, Dir::Up), Dir::Up);
    let k3 = k.mul(k, Dir::Up).mul(k, Dir::Up);
    err.fma_assign(&S::from_i64(2, ctx, Dir::Up).mul(b, Dir::Up), &k3, Dir::Up);
    Ok(&sum + &Interval::point(err).symmetric())
}

pub fn theta_via_moments<S: Endpoint>(n_sides: u32, half_width: usize, coeffs: &WeightCoefficients<S>) -> Result<Interval<S>> {
    if n_sides < MOMENT_WINDOW_N {
        return Err(Error::WindowViolation(format!("N = {n_sides} is below {MOMENT_WINDOW_N}")));
    }
    theta_from_state(&beta_and_kappa(n_sides, half_width, coeffs)?)
}
