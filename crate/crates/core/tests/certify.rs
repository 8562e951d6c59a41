#![allow(clippy::excessive_precision)]

use proptest::prelude::*;
use steklov_core::blocks::*;
use steklov_core::certify::*;
use steklov_core::tails::{tail_hs_bounds, TailContext};
use steklov_core::weights::{coefficient_v, coefficient_v_recursive, Alpha, WeightCoefficients};
use steklov_core::{Endpoint, Error, F64Interval, Mp, MpInterval, Precision};

fn coeffs_f64(n: u32, m_max: usize) -> WeightCoefficients<f64> {
    coefficient_v_recursive(m_max, &Alpha::new(n, ()).unwrap())
}

/// `lo ≤ v ≤ hi` and both within rounding of `v`.
fn tight(b: &SectionBounds<f64>, lo: f64, hi: f64) {
    assert!(b.lam_lo <= lo && hi <= b.lam_hi, "[{}, {}]", b.lam_lo, b.lam_hi);
    assert!(lo - b.lam_lo < 1e-14 && b.lam_hi - hi < 1e-14, "[{}, {}]", b.lam_lo, b.lam_hi);
}

fn matrix(rows: &[&[f64]]) -> SymmetricMatrix<f64> {
    let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
    SymmetricMatrix::from_f64_rows(&rows, ()).unwrap()
}

#[test]
fn diagonal_weight_examples() {
    let b = |n, r| BlockIndex::new(n, r).unwrap();
    assert_eq!(diagonal_weight(b(5, 1), 0), 1);
    assert_eq!(diagonal_weight(b(5, 1), -1), 4);
    assert_eq!(diagonal_weight(b(7, 0), 3), 21);
    assert!(matches!(inv_sqrt_weight::<f64>(b(7, 0), 0, ()), Err(Error::ZeroMode)));
    assert!(BlockIndex::new(7, 7).is_err());
    assert_eq!(b(7, 2).conjugate().residue, 5);
}

#[test]
fn block_section_examples() {
    let bits = 200;
    let coeffs = coefficient_v_recursive(80, &Alpha::<Mp>::new(20, bits).unwrap());
    let s = assemble_block_section(BlockIndex::new(20, 1).unwrap(), 40, &coeffs).unwrap();
    assert_eq!(s.dim(), 81);
    let zero = s.modes.iter().position(|&m| m == 0).unwrap();
    assert!(s.matrix.entry(zero, zero).contains_f64(1.0));
    // v_1/√21 with v_1 = 1/19
    let expect = MpInterval::one(bits).div_i64(19).unwrap().div(&MpInterval::from_i64(21, bits).sqrt().unwrap()).unwrap();
    assert!(s.matrix.entry(zero + 1, zero).intersects(&expect));
    assert!(s.matrix.all_positive());
    for i in 0..s.dim() {
        for j in 0..s.dim() {
            assert!(s.matrix.entry(i, j).intersects(s.matrix.entry(j, i)));
        }
    }
    assert!(matches!(
        assemble_block_section(BlockIndex::new(20, 1).unwrap(), 41, &coeffs),
        Err(Error::InsufficientCoefficients { .. })
    ));
    assert!(assemble_block_section(BlockIndex::new(20, 0).unwrap(), 4, &coeffs).is_err());
}

#[test]
fn zero_block_section_examples() {
    let bits = 200;
    let a = Alpha::<Mp>::new(5, bits).unwrap();
    let coeffs = coefficient_v_recursive(40, &a);
    let s = assemble_zero_block_section(5, 20, &coeffs).unwrap();
    assert_eq!(s.dim(), 40);
    assert!(s.zero_mode_excluded && !s.modes.contains(&0));
    // diagonal at m = 1: (1 - v_1²)/5, with v_1 from the Γ formula
    let i = s.modes.iter().position(|&m| m == 1).unwrap();
    let v1 = coefficient_v(1, &a).unwrap();
    let expect = (&MpInterval::one(bits) - &v1.sqr()).div_i64(5).unwrap();
    assert!(s.matrix.entry(i, i).intersects(&expect));

    // on vectors orthogonal to b the rank-one term vanishes
    let cf = coeffs_f64(5, 40);
    let zs = assemble_zero_block_section(5, 20, &cf).unwrap();
    let dom = assemble_zero_block_dominant(5, 20, &cf).unwrap();
    let b: Vec<f64> = zs.modes.iter().map(|&m| cf.get(m).mid_f64() / ((m.unsigned_abs() * 5) as f64).sqrt()).collect();
    let mut x: Vec<f64> = (0..zs.dim()).map(|k| ((k * 7 % 11) as f64) - 5.0).collect();
    let proj = x.iter().zip(&b).map(|(a, c)| a * c).sum::<f64>() / b.iter().map(|c| c * c).sum::<f64>();
    for (xi, bi) in x.iter_mut().zip(&b) {
        *xi -= proj * bi;
    }
    let xi: Vec<F64Interval> = x.iter().map(|&v| F64Interval::from_f64(v, ())).collect();
    let y1 = zs.matrix.matvec_interval(&xi);
    let y2 = dom.matrix.matvec_interval(&xi);
    for (a, c) in y1.iter().zip(&y2) {
        assert!((a.mid_f64() - c.mid_f64()).abs() < 1e-12);
    }
}

#[test]
fn zero_block_section_is_nonnegative() {
    let p = Precision::new(140).unwrap();
    let coeffs = coefficient_v_recursive(40, &Alpha::<Mp>::new(7, p.bits()).unwrap());
    let s = assemble_zero_block_section(7, 20, &coeffs).unwrap();
    let mut state = 0x2545f4914f6cdd1du64;
    for _ in 0..10 {
        let x: Vec<Mp> = (0..s.dim())
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                let u = (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
                MpInterval::from_f64(u, p.bits()).lo().clone()
            })
            .collect();
        let b = symmetric_bounds_zero_block(&s.matrix, &x).unwrap();
        assert!(b.lam_lo.to_f64(steklov_core::Dir::Down) >= -1e-30);
    }
}

#[test]
fn critical_block_data_examples() {
    let bits = 200;
    let coeffs = coefficient_v_recursive(80, &Alpha::<Mp>::new(20, bits).unwrap());
    let d = critical_block_data(20, 40, &coeffs).unwrap();
    let i = d.k_section.modes.iter().position(|&m| m == 1).unwrap();
    let expect = MpInterval::one(bits).div_i64(19).unwrap().div(&MpInterval::from_i64(21, bits).sqrt().unwrap()).unwrap();
    assert!(d.b[i].intersects(&expect));
    assert!(d.b.iter().all(|x| x.is_positive()) && d.k_section.matrix.all_positive());
    let full = assemble_block_section(BlockIndex::new(20, 1).unwrap(), 40, &coeffs).unwrap();
    let off: Vec<usize> = full.modes.iter().enumerate().filter(|(_, &m)| m != 0).map(|(k, _)| k).collect();
    for (a, &fa) in off.iter().enumerate() {
        for (c, &fc) in off.iter().enumerate() {
            assert_eq!(d.k_section.matrix.entry(a, c), full.matrix.entry(fa, fc));
        }
    }
    let mut prev = 0.0;
    for m in [5, 10, 20, 40] {
        let d = critical_block_data(20, m, &coeffs).unwrap();
        let norm: f64 = d.b.iter().map(|x| x.sqr().lo_f64()).sum();
        assert!(norm >= prev);
        prev = norm;
    }
}

#[test]
fn rows_decay_away_from_the_diagonal() {
    let cf = coeffs_f64(9, 60);
    let s = assemble_block_section(BlockIndex::new(9, 1).unwrap(), 30, &cf).unwrap();
    let c = s.modes.iter().position(|&m| m == 0).unwrap();
    for k in 1..30 {
        assert!(s.matrix.entry(c, c + k + 1).hi() < s.matrix.entry(c, c + k).lo());
    }
    for &m in &s.modes {
        if m != 0 {
            assert!(diagonal_weight(s.block, m) >= 8 * m.unsigned_abs());
        }
    }
}

#[test]
fn collatz_wielandt_examples() {
    let b = matrix(&[&[2.0, 1.0], &[1.0, 2.0]]);
    tight(&collatz_wielandt_bounds(&b, &[1.0, 1.0]).unwrap(), 3.0, 3.0);
    tight(&collatz_wielandt_bounds(&b, &[1.0, 2.0]).unwrap(), 2.5, 4.0);
    assert!(matches!(collatz_wielandt_bounds(&b, &[1.0, 0.0]), Err(Error::NonpositiveVector(1))));
    assert!(collatz_wielandt_bounds(&matrix(&[&[1.0, -1.0], &[-1.0, 1.0]]), &[1.0, 1.0]).is_err());
}

#[test]
fn power_iteration_examples() {
    let id = matrix(&[&[1.0, 0.0], &[0.0, 1.0]]);
    assert!(power_iteration_guess(&id, 3, 1e-30).iter().all(|&v| v > 0.0));
    let b = matrix(&[&[2.0, 1.0], &[1.0, 2.0]]);
    let x = power_iteration_guess(&b, 60, 1e-30);
    assert!((x[0] / x[1] - 1.0).abs() < 1e-6);
    let z = matrix(&[&[0.0, 0.0], &[0.0, 0.0]]);
    assert_eq!(power_iteration_guess(&z, 5, 1e-30), vec![1e-30, 1e-30]);
}

#[test]
fn zero_block_bounds_examples() {
    tight(&symmetric_bounds_zero_block(&matrix(&[&[1.0, 0.0], &[0.0, 2.0]]), &[0.0, 1.0]).unwrap(), 2.0, 2.0);
    tight(&symmetric_bounds_zero_block(&matrix(&[&[0.0, 1.0], &[1.0, 0.0]]), &[1.0, 1.0]).unwrap(), 1.0, 1.0);
    tight(&symmetric_bounds_zero_block(&matrix(&[&[1.0, -1.0], &[-1.0, 1.0]]), &[1.0, -1.0]).unwrap(), 2.0, 2.0);
    assert!(matches!(symmetric_bounds_zero_block(&matrix(&[&[1.0]]), &[0.0]), Err(Error::ZeroVector)));
}

#[test]
fn two_by_two_examples() {
    let i = |x: f64| F64Interval::from_f64(x, ());
    assert!(two_by_two_top(&i(1.0), &i(0.0), &i(0.0)).unwrap().contains_f64(1.0));
    assert!(two_by_two_top(&i(0.0), &i(1.0), &i(0.0)).unwrap().contains_f64(1.0));
    assert!(two_by_two_top(&i(3.0), &i(0.0), &i(5.0)).unwrap().contains_f64(5.0));
}

/// Brute-force Hilbert–Schmidt norms of the coupling and compression parts of a wide section.
fn brute_force_tails(n: u32, r: u32, m: usize, big: usize, cf: &WeightCoefficients<f64>) -> (f64, f64) {
    let block = BlockIndex::new(n, r).unwrap();
    let s = if r == 0 { assemble_zero_block_section(n, big, cf).unwrap() } else { assemble_block_section(block, big, cf).unwrap() };
    let (mut e, mut c) = (0.0, 0.0);
    for i in 0..s.dim() {
        for j in 0..s.dim() {
            let x = s.matrix.entry(i, j).mid_f64().powi(2);
            let (ri, rj) = (s.modes[i].unsigned_abs() as usize <= m, s.modes[j].unsigned_abs() as usize <= m);
            match (ri, rj) {
                (true, false) => e += x,
                (false, false) => c += x,
                _ => {}
            }
        }
    }
    (e.sqrt(), c.sqrt())
}

#[test]
fn tail_bounds_dominate_brute_force_norms() {
    for n in [3u32, 5, 20] {
        let cf = coeffs_f64(n, 500);
        for r in [0, 1, 2] {
            let t = tail_hs_bounds(n, BlockIndex::new(n, r).unwrap(), 20, &cf).unwrap();
            let (e, c) = brute_force_tails(n, r, 20, 250, &cf);
            assert!(e <= t.e_norm.hi_f64(), "N={n} r={r}: E {e} > {}", t.e_norm.hi_f64());
            assert!(c <= t.c_norm.hi_f64(), "N={n} r={r}: C {c} > {}", t.c_norm.hi_f64());
        }
    }
}

#[test]
fn tail_bounds_shrink_and_are_small_at_n20() {
    let cf = coeffs_f64(10, 640);
    let b = BlockIndex::new(10, 1).unwrap();
    let t40 = tail_hs_bounds(10, b, 40, &cf).unwrap();
    let t320 = tail_hs_bounds(10, b, 320, &cf).unwrap();
    assert!(t320.e_norm.hi_f64() < t40.e_norm.hi_f64() && t320.c_norm.hi_f64() < t40.c_norm.hi_f64());
    let cf = coeffs_f64(20, 640);
    let t = tail_hs_bounds(20, BlockIndex::new(20, 1).unwrap(), 320, &cf).unwrap();
    assert!(t.e_norm.hi_f64() + t.c_norm.hi_f64() <= 0.2);
    let ctx = TailContext::new(&cf, 320).unwrap();
    assert!(ctx.c_sq(1) >= 0.0 && ctx.column_tail_sq(1) > 0.0);
    assert!(tail_hs_bounds(19, BlockIndex::new(20, 1).unwrap(), 20, &cf).is_err());
}

#[test]
fn block_enclosure_tightens_with_m() {
    let cf = coeffs_f64(7, 640);
    let w = |m| {
        let b = block_enclosure(7, 1, m, &cf).unwrap();
        assert!(b.lambda_lo >= b.section.lam_lo && b.lambda_lo <= b.lambda_hi);
        b.lambda_hi - b.lambda_lo
    };
    assert!(w(320) < w(40));
}

#[test]
fn critical_blocks_dominate_for_small_n() {
    for n in 3u32..=20 {
        let e = sigma_enclosure_with::<f64>(n, 80, ()).unwrap();
        assert_eq!(e.argmax_block, 1, "N={n}");
        let top = e.per_block.iter().max_by(|a, b| a.lambda_hi.partial_cmp(&b.lambda_hi).unwrap()).unwrap();
        assert!(top.block.residue == 1 || top.block.residue == n - 1, "N={n}: λ̄ peaks at r={}", top.block.residue);
        assert!(0.0 < e.sigma_lo && e.sigma_lo <= e.sigma_hi && e.sigma_hi < 1.0);
        assert_eq!(e.per_block.len(), n as usize);
    }
}

#[test]
fn published_rows_intersect() {
    // Published enclosures for N = 3, 10, 20
    let n3 = sigma_enclosure(3, DEFAULT_HALF_WIDTH, Precision::new(140).unwrap()).unwrap();
    let i3 = n3.interval();
    let reference = MpInterval::from_decimal("0.621278808420295929", 128).unwrap().hull(&MpInterval::from_decimal("0.621956648650589684", 128).unwrap());
    assert!(i3.intersects(&reference));
    for (n, lo, hi) in [(10, 0.996058800482355868, 0.996371348839486788), (20, 0.999635685448956362, 0.999635736152520005)] {
        let e = sigma_enclosure_with::<f64>(n, DEFAULT_HALF_WIDTH, ()).unwrap();
        assert!(e.sigma_lo <= hi && lo <= e.sigma_hi, "N={n}");
        let r1 = &e.per_block[1];
        let conj = &e.per_block[n as usize - 1];
        assert!(r1.interval().intersects(&conj.interval()));
    }
    assert!(sigma_enclosure_with::<f64>(5, 0, ()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn packed_storage_matches_rows(dim in 1usize..12, seed in 0u64..1000) {
        let rows: Vec<Vec<f64>> = (0..dim)
            .map(|i| (0..dim).map(|j| ((i.min(j) * 31 + i.max(j) * 17) as u64 ^ seed) as f64 / 7.0).collect())
            .collect();
        let m = SymmetricMatrix::<f64>::from_f64_rows(&rows, ()).unwrap();
        let x: Vec<F64Interval> = (0..dim).map(|k| F64Interval::from_f64(k as f64 - 3.0, ())).collect();
        let y = m.matvec_interval(&x);
        for i in 0..dim {
            prop_assert_eq!(m.entry(i, i).mid_f64(), rows[i][i]);
            let exact: f64 = (0..dim).map(|j| rows[i][j] * (j as f64 - 3.0)).sum();
            prop_assert!(y[i].contains_f64(exact));
        }
    }
}

#[test]
fn every_conjugate_pair_for_the_property_sizes() {
    for n in [5u32, 9, 17] {
        let e = sigma_enclosure_with::<f64>(n, 60, ()).unwrap();
        for r in 1..n {
            let a = e.per_block[r as usize].interval();
            let b = e.per_block[(n - r) as usize].interval();
            assert!(a.intersects(&b), "N={n} r={r}");
        }
    }
}
