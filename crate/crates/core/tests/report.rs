#![allow(clippy::excessive_precision)]

use proptest::prelude::*;
use rug::Rational;
use steklov_core::report::*;
use steklov_core::{Dir, Endpoint, Error, F64Interval, Mp, MpInterval};

fn parse_rational(s: &str) -> Rational {
    // plain "±int.frac" strings only
    let neg = s.starts_with('-');
    let s = s.trim_start_matches('-');
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    let num: rug::Integer = format!("{int}{frac}").parse().unwrap();
    let den = rug::Integer::from(rug::Integer::u_pow_u(10, frac.len() as u32));
    let r = Rational::from((num, den));
    if neg {
        -r
    } else {
        r
    }
}

fn exact(x: &Mp) -> Rational {
    x.inner().to_rational().unwrap()
}

#[test]
fn fixed_decimal_examples() {
    let third = MpInterval::one(128).div_i64(3).unwrap();
    assert_eq!(fixed_decimal(third.lo(), 18, Dir::Down), "0.333333333333333333");
    assert_eq!(fixed_decimal(third.hi(), 18, Dir::Up), "0.333333333333333334");
    let neg = MpInterval::from_i64(-2, 128).div_i64(3).unwrap();
    assert_eq!(fixed_decimal(neg.lo(), 4, Dir::Down), "-0.6667");
    assert_eq!(fixed_decimal(neg.hi(), 4, Dir::Up), "-0.6666");
    assert_eq!(fixed_decimal(&12.5f64, 2, Dir::Down), "12.50");
    assert_eq!(fixed_decimal(&f64::INFINITY, 2, Dir::Up), "inf");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Rendered lower endpoints never exceed the stored ones, upper never fall below.
    #[test]
    fn presentation_rounding_is_outward(num in -1_000_000i64..1_000_000, den in 1i64..100_000, digits in 0usize..30) {
        let x = MpInterval::from_i64(num, 200).div_i64(den).unwrap();
        let lo = parse_rational(&fixed_decimal(x.lo(), digits, Dir::Down));
        let hi = parse_rational(&fixed_decimal(x.hi(), digits, Dir::Up));
        prop_assert!(lo <= exact(x.lo()) && exact(x.hi()) <= hi);
        let step = Rational::from((1, rug::Integer::from(rug::Integer::u_pow_u(10, digits as u32))));
        prop_assert!(exact(x.lo()) - &lo < step.clone() && hi - exact(x.hi()) < step);
    }

    #[test]
    fn full_precision_strings_enclose(num in -1_000_000i64..1_000_000, den in 1i64..100_000) {
        let x = MpInterval::from_i64(num, 200).div_i64(den).unwrap();
        let e = Endpoints::from_interval(&x);
        let back = e.to_interval::<Mp>(200).unwrap();
        prop_assert!(back.contains_interval(&x));
        prop_assert!(back.width_f64() <= x.width_f64() + 1e-55 * x.mid_f64().abs().max(1.0));
    }
}

fn sigma_record(n: u32, lo: f64, hi: f64) -> ReportRecord {
    let x = F64Interval::new(lo, hi).unwrap();
    ReportRecord::SigmaRow(SigmaRow {
        n,
        m: 320,
        dps: 140,
        sigma: Endpoints::from_interval(&x),
        width: decimal_string(&x.width(), Dir::Up),
        argmax_block: 1,
    })
}

#[test]
fn json_round_trip() {
    let rows = vec![
        sigma_record(5, 0.951303415109631181, 0.951373233988075880),
        ReportRecord::GapRow(GapRow { n: 19, gap_lo: "0.000065".into(), gap_lo_exact: "6.5e-5".into() }),
        ReportRecord::ConstantRow(ConstantRow {
            name: "E0".into(),
            formula: "sum".into(),
            lo: "507.6".into(),
            hi: "507.7".into(),
            bound: Some("<= 508".into()),
            status: "PASS".into(),
        }),
    ];
    let s = serde_json::to_string(&rows).unwrap();
    assert!(s.contains("\"kind\":\"sigma_row\"") && s.contains("\"kind\":\"constant_row\""));
    let back: Vec<ReportRecord> = serde_json::from_str(&s).unwrap();
    assert_eq!(back, rows);
    assert_eq!(back[1].kind(), "gap_row");
    if let ReportRecord::SigmaRow(r) = &back[0] {
        let x = r.sigma.to_interval::<f64>(()).unwrap();
        assert!(x.contains_f64(0.951303415109631181) && x.contains_f64(0.951373233988075880));
    }
}

fn csv_of(rows: &[ReportRecord]) -> String {
    let mut buf = Vec::new();
    write_plot_data(rows, &mut buf, std::path::Path::new("mem.csv")).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn empty_input_gives_the_header_only() {
    assert_eq!(csv_of(&[]), "N,sigma_lo,sigma_hi,expansion_center,band_lo,band_hi\n");
}

#[test]
fn sigma_rows_give_one_line_each() {
    let rows: Vec<ReportRecord> = (3..=20).map(|n| sigma_record(n, 0.5, 0.75)).collect();
    let s = csv_of(&rows);
    assert_eq!(s.lines().count(), 19);
    assert!(s.lines().nth(1).unwrap().starts_with("3,0.500000000000000000,0.750000000000000000"));
}

#[test]
fn expansion_rows_give_one_line_each() {
    let k = steklov_core::constants::constant_closure::<f64>(()).unwrap();
    let rows: Vec<ReportRecord> = (20..=100)
        .step_by(10)
        .map(|n| {
            let x = steklov_core::constants::expansion_value(n, &k).unwrap();
            ReportRecord::ExpansionRow(ExpansionRow {
                n,
                center: Endpoints::from_interval(&x.center),
                band: Endpoints::from_interval(&x.band),
                enclosure: None,
                inside_band: None,
            })
        })
        .collect();
    let s = csv_of(&rows);
    assert_eq!(s.lines().count(), 10);
    assert!(s.lines().last().unwrap().starts_with("100,,,0.99"));
}

#[test]
fn mixed_kinds_are_rejected() {
    let rows = vec![
        sigma_record(3, 0.6, 0.62),
        ReportRecord::GapRow(GapRow { n: 3, gap_lo: "0.25".into(), gap_lo_exact: "0.25".into() }),
    ];
    let mut buf = Vec::new();
    assert!(matches!(
        write_plot_data(&rows, &mut buf, std::path::Path::new("x.csv")),
        Err(Error::InvalidInput(_))
    ));
}

#[test]
fn io_failure_names_the_path() {
    let path = std::path::Path::new("/nonexistent-dir/plot.csv");
    match emit_plot_data(&[], path) {
        Err(Error::Io(msg)) => assert!(msg.contains("/nonexistent-dir/plot.csv")),
        other => panic!("{other:?}"),
    }
    let tmp = std::env::temp_dir().join(format!("steklov-report-{}.csv", std::process::id()));
    emit_plot_data(&[sigma_record(4, 0.8, 0.9)], &tmp).unwrap();
    assert_eq!(std::fs::read_to_string(&tmp).unwrap().lines().count(), 2);
    std::fs::remove_file(tmp).unwrap();
}

#[test]
fn f64_endpoints_render_outward() {
    let x = F64Interval::from_f64(0.1, ());
    let e = Endpoints::from_interval(&x);
    assert!(parse_rational(&e.lo) <= Rational::from_f64(x.lo_f64()).unwrap());
    assert!(parse_rational(&e.hi) >= Rational::from_f64(x.hi_f64()).unwrap());
    let _ = x.lo().to_f64(Dir::Down);
}
