//! Finite sections of the residue-class block operators.
//!
//! Block `r` acts on the modes `r + mN`. Its matrix is
//! `A_r[m, m'] = v_{|m-m'|} / sqrt(d_m d_m')` with `d_m = |r + mN|`.

use std::io::Write;

use crate::error::{Error, Result};
use crate::interval::{Dir, Endpoint, Interval};
use crate::weights::WeightCoefficients;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BlockIndex {
    pub n_sides: u32,
    pub residue: u32,
}

impl BlockIndex {
    pub fn new(n_sides: u32, residue: u32) -> Result<Self> {
        if n_sides < 3 {
            return Err(Error::InvalidInput(format!("N must be at least 3, got {n_sides}")));
        }
        if residue >= n_sides {
            return Err(Error::InvalidInput(format!("residue {residue} outside 0..{n_sides}")));
        }
        Ok(Self { n_sides, residue })
    }

    /// The block with the same spectrum, `N - r`.
    pub fn conjugate(&self) -> BlockIndex {
        BlockIndex { n_sides: self.n_sides, residue: (self.n_sides - self.residue) % self.n_sides }
    }
}

/// `|r + mN|`.
pub fn diagonal_weight(block: BlockIndex, m: i64) -> u64 {
    (block.residue as i64 + m * block.n_sides as i64).unsigned_abs()
}

/// `1/sqrt(d_m)`.
pub fn inv_sqrt_weight<S: Endpoint>(block: BlockIndex, m: i64, ctx: S::Ctx) -> Result<Interval<S>> {
    let d = diagonal_weight(block, m);
    if d == 0 {
        return Err(Error::ZeroMode);
    }
    Interval::<S>::from_i64(d as i64, ctx).sqrt()?.recip()
}

/// Symmetric matrix stored as its packed upper triangle, row-major.
#[derive(Clone, Debug)]
pub struct SymmetricMatrix<S: Endpoint> {
    dim: usize,
    data: Vec<Interval<S>>,
}

impl<S: Endpoint> SymmetricMatrix<S> {
    /// Builds from the upper triangle of a full row-major matrix.
    pub fn from_rows(rows: &[Vec<Interval<S>>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidInput("matrix must be square".into()));
        }
        let mut data = Vec::with_capacity(dim * (dim + 1) / 2);
        for (i, row) in rows.iter().enumerate() {
            data.extend(row[i..].iter().cloned());
        }
        Ok(Self { dim, data })
    }

    pub fn from_f64_rows(rows: &[Vec<f64>], ctx: S::Ctx) -> Result<Self> {
        let rows: Vec<Vec<Interval<S>>> =
            rows.iter().map(|r| r.iter().map(|&x| Interval::from_f64(x, ctx)).collect()).collect();
        Self::from_rows(&rows)
    }

    fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Interval<S>) -> Self {
        let mut data = Vec::with_capacity(dim * (dim + 1) / 2);
        for i in 0..dim {
            for j in i..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn index(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        i * self.dim - i * i.saturating_sub(1) / 2 + (j - i)
    }

    /// Entry `(i, j)`; the mirrored entry is the same stored interval.
    pub fn entry(&self, i: usize, j: usize) -> &Interval<S> {
        &self.data[self.index(i, j)]
    }

    /// Packed upper triangle, row-major.
    pub fn packed(&self) -> &[Interval<S>] {
        &self.data
    }

    pub fn all_positive(&self) -> bool {
        self.data.iter().all(|e| e.is_positive())
    }

    /// Midpoints as a packed `f64` triangle, for non-rigorous iterations.
    pub fn midpoints(&self) -> Vec<f64> {
        self.data.iter().map(|e| e.mid_f64()).collect()
    }

    /// Componentwise lower and upper bounds of `B x` for a point vector `x`.
    pub fn matvec_bounds(&self, x: &[S]) -> (Vec<S>, Vec<S>) {
        let n = self.dim;
        let ctx = self.data[0].ctx();
        let zero = S::zero(ctx);
        let mut lo = vec![zero.clone(); n];
        let mut hi = vec![zero.clone(); n];
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                let e = &self.data[k];
                k += 1;
                acc(&mut lo[i], &mut hi[i], e, &x[j], &zero);
                if j != i {
                    acc(&mut lo[j], &mut hi[j], e, &x[i], &zero);
                }
            }
        }
        (lo, hi)
    }

    /// `B x` for an interval vector.
    pub fn matvec_interval(&self, x: &[Interval<S>]) -> Vec<Interval<S>> {
        let n = self.dim;
        let ctx = self.data[0].ctx();
        let mut out = vec![Interval::zero(ctx); n];
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                let e = &self.data[k];
                k += 1;
                out[i] = &out[i] + &(e * &x[j]);
                if j != i {
                    out[j] = &out[j] + &(e * &x[i]);
                }
            }
        }
        out
    }

    /// Upper bound on the squared Hilbert–Schmidt norm.
    pub fn hs_norm_sq_hi(&self) -> S {
        let n = self.dim;
        let ctx = self.data[0].ctx();
        let mut s = S::zero(ctx);
        let mut k = 0;
        for i in 0..n {
            for j in i..n {
                let e = &self.data[k];
                k += 1;
                let m = e.abs();
                let w = if i == j { m.hi().clone() } else { m.hi().add(m.hi(), Dir::Up) };
                s.fma_assign(&w, m.hi(), Dir::Up);
            }
        }
        s
    }
}

fn acc<S: Endpoint>(lo: &mut S, hi: &mut S, e: &Interval<S>, x: &S, zero: &S) {
    if x >= zero {
        lo.fma_assign(e.lo(), x, Dir::Down);
        hi.fma_assign(e.hi(), x, Dir::Up);
    } else {
        lo.fma_assign(e.hi(), x, Dir::Down);
        hi.fma_assign(e.lo(), x, Dir::Up);
    }
}

#[derive(Clone, Debug)]
pub struct BlockSection<S: Endpoint> {
    pub block: BlockIndex,
    pub half_width: usize,
    /// Retained modes in ascending order.
    pub modes: Vec<i64>,
    pub matrix: SymmetricMatrix<S>,
    pub zero_mode_excluded: bool,
}

impl<S: Endpoint> BlockSection<S> {
    pub fn dim(&self) -> usize {
        self.modes.len()
    }

    /// Dumps `row,col,lo,hi` for every entry.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["row", "col", "lo", "hi"]).map_err(io)?;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let e = self.matrix.entry(i, j);
                w.write_record([
                    self.modes[i].to_string(),
                    self.modes[j].to_string(),
                    crate::report::decimal_string(e.lo(), Dir::Down),
                    crate::report::decimal_string(e.hi(), Dir::Up),
                ])
                .map_err(io)?;
            }
        }
        w.flush().map_err(|e| Error::Io(e.to_string()))?;
        Ok(())
    }
}

/// Modes `-M..=M`, with or without 0.
pub fn section_modes(half_width: usize, skip_zero: bool) -> Vec<i64> {
    let m = half_width as i64;
    (-m..=m).filter(|&k| !(skip_zero && k == 0)).collect()
}

fn scaled<S: Endpoint>(block: BlockIndex, modes: &[i64], ctx: S::Ctx) -> Result<Vec<Interval<S>>> {
    modes.iter().map(|&m| inv_sqrt_weight::<S>(block, m, ctx)).collect()
}

/// Section of `A_r`, `r ≠ 0`, on `|m| ≤ M`.
pub fn assemble_block_section<S: Endpoint>(
    block: BlockIndex,
    half_width: usize,
    coeffs: &WeightCoefficients<S>,
) -> Result<BlockSection<S>> {
    if block.residue == 0 {
        return Err(Error::InvalidInput("use the zero-block assembly for r = 0".into()));
    }
    coeffs.require(2 * half_width)?;
    let ctx = coeffs.alpha().ctx();
    let modes = section_modes(half_width, false);
    let s = scaled::<S>(block, &modes, ctx)?;
    let matrix = SymmetricMatrix::from_fn(modes.len(), |i, j| {
        &(coeffs.get(modes[i] - modes[j]) * &s[i]) * &s[j]
    });
    Ok(BlockSection { block, half_width, modes, matrix, zero_mode_excluded: false })
}

/// `K₀` alone on `0 < |m| ≤ M`. Entrywise positive, and it dominates the zero-block
/// section in the Loewner order.
pub fn assemble_zero_block_dominant<S: Endpoint>(
    n_sides: u32,
    half_width: usize,
    coeffs: &WeightCoefficients<S>,
) -> Result<BlockSection<S>> {
    if half_width == 0 {
        return Err(Error::InvalidInput("M must be at least 1".into()));
    }
    coeffs.require(2 * half_width)?;
    let block = BlockIndex::new(n_sides, 0)?;
    let ctx = coeffs.alpha().ctx();
    let modes = section_modes(half_width, true);
    let s = scaled::<S>(block, &modes, ctx)?;
    let matrix = SymmetricMatrix::from_fn(modes.len(), |i, j| {
        &(coeffs.get(modes[i] - modes[j]) * &s[i]) * &s[j]
    });
    Ok(BlockSection { block, half_width, modes, matrix, zero_mode_excluded: true })
}

/// Section of `K₀ - b₀ b₀ᵀ / v₀` on `0 < |m| ≤ M`.
pub fn assemble_zero_block_section<S: Endpoint>(
    n_sides: u32,
    half_width: usize,
    coeffs: &WeightCoefficients<S>,
) -> Result<BlockSection<S>> {
    if half_width == 0 {
        return Err(Error::InvalidInput("M must be at least 1".into()));
    }
    coeffs.require(2 * half_width)?;
    let block = BlockIndex::new(n_sides, 0)?;
    let ctx = coeffs.alpha().ctx();
    let modes = section_modes(half_width, true);
    let s = scaled::<S>(block, &modes, ctx)?;
    let v0 = coeffs.get(0);
    let b: Vec<Interval<S>> = modes.iter().zip(&s).map(|(&m, si)| coeffs.get(m) * si).collect();
    let mut err = None;
    let matrix = SymmetricMatrix::from_fn(modes.len(), |i, j| {
        let k = &(coeffs.get(modes[i] - modes[j]) * &s[i]) * &s[j];
        match (&b[i] * &b[j]).div(v0) {
            Ok(rank_one) => &k - &rank_one,
            Err(e) => {
                err = Some(e);
                k
            }
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(BlockSection { block, half_width, modes, matrix, zero_mode_excluded: true })
}

/// The `r = 1` block split as `[[1, bᵀ], [b, K]]` around the mode `m = 0`.
#[derive(Clone, Debug)]
pub struct CriticalBlockData<S: Endpoint> {
    /// `b_m = v_|m| / sqrt(d_m)` on `0 < |m| ≤ M`.
    pub b: Vec<Interval<S>>,
    /// `K` on the same modes; the block index is `r = 1`.
    pub k_section: BlockSection<S>,
}

pub fn critical_block_data<S: Endpoint>(
    n_sides: u32,
    half_width: usize,
    coeffs: &WeightCoefficients<S>,
) -> Result<CriticalBlockData<S>> {
    if half_width == 0 {
        return Err(Error::InvalidInput("M must be at least 1".into()));
    }
    coeffs.require(2 * half_width)?;
    let block = BlockIndex::new(n_sides, 1)?;
    let ctx = coeffs.alpha().ctx();
    let modes = section_modes(half_width, true);
    let s = scaled::<S>(block, &modes, ctx)?;
    let b = modes.iter().zip(&s).map(|(&m, si)| coeffs.get(m) * si).collect();
    let matrix = SymmetricMatrix::from_fn(modes.len(), |i, j| {
        &(coeffs.get(modes[i] - modes[j]) * &s[i]) * &s[j]
    });
    let k_section = BlockSection { block, half_width, modes, matrix, zero_mode_excluded: true };
    Ok(CriticalBlockData { b, k_section })
}
