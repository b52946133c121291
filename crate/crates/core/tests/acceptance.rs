//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config as PropConfig, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal as StatNormal};

use ntnsim::channel::{sample_ntn_fading, shadowed_rice_polynomials, NtnFadingParams, sample_shadow_fading_db, shadowed_rice_params, terrestrial_pathloss_db, TerrestrialChannelConfig};
use ntnsim::cost::{crossover_devices, npv_total, scenario_costs, CostConfig, CROSSOVER_SEARCH_CAP};
use ntnsim::geometry::{guard_bs_count, RegionConfig};
use ntnsim::lrfhss::{detect_collisions, fragment_count, time_on_air, CodingRate, LrFhssConfig, OverlapIndex, TransmissionRecord, Unit, UnitKind};
use ntnsim::orbit::{derive_constants, lap_pdf, sample_lap_duration, OrbitConfig, OrbitDerived};
use ntnsim::runner::{
    run_erasure_experiment, run_success_experiment, ErasureOutcome, MetricMode, Scenario, ScenarioSpec, SimConfig,
};

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(ok: bool, detail: impl Into<String>) -> Verdict {
    Verdict { ok, detail: detail.into() }
}

fn check(id: u32, title: &str, limit: Duration, f: impl FnOnce() -> Verdict) -> bool {
    let t = Instant::now();
    let v = f();
    let took = t.elapsed();
    let ok = v.ok && took < limit;
    println!(
        "{} criterion {id} ({title}): {} [{:.1} s, limit {} s]",
        if ok { "PASS" } else { "FAIL" },
        v.detail,
        took.as_secs_f64(),
        limit.as_secs()
    );
    ok
}

fn c1() -> Verdict {
    let f = fragment_count(10, CodingRate::ONE_THIRD);
    let toa = time_on_air(&LrFhssConfig::default());
    verdict(f == 7 && (toa - 1.417_216).abs() < 1e-9, format!("f = {f}, time on air = {:.6} ms", toa * 1e3))
}

fn c2() -> Verdict {
    let r = RegionConfig::default();
    let (a, b) = (guard_bs_count(10, &r), guard_bs_count(20, &r));
    verdict(a == 150 && b == 300, format!("M_g(10) = {a}, M_g(20) = {b}"))
}

fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let err = left + right - whole;
        if depth == 0 || tol < 1e-15 || err.abs() <= 15.0 * tol {
            return left + right + err / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 60)
}

/// Integral of the lap pdf over `(0, t]`, substituting `t = T_m - v^2` to
/// absorb the inverse-square-root singularity at `T_m`.
fn quad_cdf(t: f64, d: &OrbitDerived) -> f64 {
    let tm = d.max_lap_s;
    let g = |v: f64| {
        let v = v.max(1e-6);
        lap_pdf(tm - v * v, d) * 2.0 * v
    };
    simpson(&g, (tm - t).max(0.0).sqrt(), tm.sqrt(), 1e-10)
}

fn c3() -> Verdict {
    let d = derive_constants(&OrbitConfig::default());
    let total = quad_cdf(d.max_lap_s, &d);
    let vmax = d.max_lap_s.sqrt();
    let grid: Vec<f64> = (0..=400)
        .map(|i| quad_cdf(d.max_lap_s - (vmax * i as f64 / 400.0).powi(2), &d))
        .collect();
    let cdf = |t: f64| {
        let x = (d.max_lap_s - t).max(0.0).sqrt() / vmax * 400.0;
        let k = x.floor().min(399.0) as usize;
        grid[k] + (grid[k + 1] - grid[k]) * (x - k as f64)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut xs: Vec<f64> = (0..100_000).map(|_| sample_lap_duration(&d, &mut rng).unwrap()).collect();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let ks = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / n).abs().max((c - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max);
    let ok = (total - 1.0).abs() < 1e-6 && ks < 0.01 && (d.max_lap_s - 440.6).abs() < 1.0;
    verdict(ok, format!("integral = {total:.9}, KS = {ks:.4}, T_m = {:.3} s", d.max_lap_s))
}

fn c4() -> Verdict {
    let mut worst_identity = 0.0f64;
    let mut outside_fit = Vec::new();
    for deg in 10..=90 {
        let (b0, m, omega) = shadowed_rice_polynomials(deg as f64);
        let p = NtnFadingParams::from_shadowed_rice(b0, m, omega);
        let target = 2.0 * b0 + omega;
        worst_identity = worst_identity.max(((p.k * p.theta - target) / target).abs());
        if shadowed_rice_params((deg as f64).to_radians()).is_err() {
            outside_fit.push(deg);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_mean = 0.0f64;
    let mut worst_var = 0.0f64;
    for deg in [20.0f64, 45.0, 90.0] {
        let p = shadowed_rice_params(deg.to_radians()).unwrap();
        let n = 1_000_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let x = sample_ntn_fading(&p, &mut rng);
            s += x;
            s2 += x * x;
        }
        let mean = s / n as f64;
        let var = s2 / n as f64 - mean * mean;
        worst_mean = worst_mean.max((mean / (p.k * p.theta) - 1.0).abs());
        worst_var = worst_var.max((var / (p.k * p.theta * p.theta) - 1.0).abs());
    }
    let cfg = TerrestrialChannelConfig::default();
    let mean = 14.0 + 6.0 - terrestrial_pathloss_db(10e3, &cfg).unwrap();
    let closed = StatNormal::new(mean, cfg.shadow_sigma_db).unwrap().cdf(-132.0);
    let n = 1_000_000;
    let erased = (0..n)
        .filter(|_| !(mean + sample_shadow_fading_db(&cfg, &mut rng) >= -132.0))
        .count() as f64
        / n as f64;
    let ok = worst_identity < 1e-12
        && worst_mean < 0.01
        && worst_var < 0.02
        && (erased - 0.508).abs() < 0.005
        && (erased - closed).abs() < 0.005;
    verdict(
        ok,
        format!(
            "k*theta rel err {worst_identity:.1e} (non-positive parameters at {}..={} deg), gamma mean err {:.2}%, var err {:.2}%, erasure at 10 km {erased:.4} (closed form {closed:.4})",
            outside_fit.first().unwrap_or(&0),
            outside_fit.last().unwrap_or(&0),
            worst_mean * 100.0,
            worst_var * 100.0
        ),
    )
}

fn small_case() -> impl Strategy<Value = Vec<TransmissionRecord>> {
    let cfg = LrFhssConfig::default();
    let unit = (0u16..2, 0u32..40).prop_map(|(ch, slot)| (ch, slot));
    let tx = (0u32..60, 0usize..=2, prop::collection::vec(unit, 3));
    prop::collection::vec(tx, 1..=3).prop_map(move |txs| {
        txs.into_iter()
            .enumerate()
            .map(|(d, (start_slot, n_frag, chans))| {
                // Coarse 50 ms start grid so exact touching and full overlap occur.
                let start = start_slot as f64 * 0.05;
                let mut units = vec![Unit {
                    kind: UnitKind::Header,
                    channel: chans[0].0,
                    start_s: start,
                    duration_s: cfg.header_duration_s,
                }];
                let mut t = start + cfg.header_duration_s;
                for c in chans.iter().skip(1).take(n_frag) {
                    units.push(Unit {
                        kind: UnitKind::Fragment,
                        channel: c.0,
                        start_s: t,
                        duration_s: cfg.fragment_duration_s,
                    });
                    t += cfg.fragment_duration_s;
                }
                TransmissionRecord {
                    device_id: d as u32,
                    start_s: start,
                    units,
                }
            })
            .collect()
    })
}

fn brute_force(txs: &[TransmissionRecord]) -> Vec<Vec<bool>> {
    txs.iter()
        .enumerate()
        .map(|(p, a)| {
            a.units
                .iter()
                .map(|u| {
                    txs.iter().enumerate().filter(|(q, _)| *q != p).any(|(_, b)| {
                        b.units.iter().any(|v| {
                            v.channel == u.channel && u.start_s < v.start_s + v.duration_s && v.start_s < u.start_s + u.duration_s
                        })
                    })
                })
                .collect()
        })
        .collect()
}

fn c5() -> Verdict {
    let cases = 20_000;
    let mut runner = TestRunner::new(PropConfig {
        cases,
        failure_persistence: None,
        ..PropConfig::default()
    });
    let res = runner.run(&small_case(), |txs| {
        let expect = brute_force(&txs);
        prop_assert_eq!(&detect_collisions(&txs, |_, _| true), &expect);
        let index = OverlapIndex::build(&txs);
        for (p, flags) in expect.iter().enumerate() {
            for (u, &f) in flags.iter().enumerate() {
                prop_assert_eq!(index.has_overlap(p, u), f);
            }
        }
        Ok(())
    });
    match res {
        Ok(()) => verdict(true, format!("{cases} random cases match exhaustive overlap enumeration")),
        Err(e) => verdict(false, format!("mismatch: {e}")),
    }
}

fn c6() -> Verdict {
    let cfg = CostConfig::default();
    let haps = npv_total(&cfg.haps(), 0, 0);
    let c = scenario_costs(&cfg, 10_000, 20);
    let cross = crossover_devices(&cfg.leo(), &cfg.haps(), 0, CROSSOVER_SEARCH_CAP).unwrap_or(0);
    let ok = (haps - 4_373_866.0).abs() <= 5.0
        && (c.leo - 2_990_930.0).abs() <= 10.0
        && (c.terrestrial - 3_140_477.0).abs() <= 10.0
        && cross.abs_diff(14_626) <= 2;
    verdict(
        ok,
        format!(
            "HAPS ${haps:.2}, LEO(10k) ${:.2}, TN(20) ${:.2}, LEO/HAPS crossover N = {cross}",
            c.leo, c.terrestrial
        ),
    )
}

fn spec(s: &str, n: usize, runs: usize, hours: f64, mode: MetricMode) -> ScenarioSpec {
    ScenarioSpec {
        scenario: s.parse::<Scenario>().unwrap(),
        n_devices: n,
        n_runs: runs,
        duration_s: hours * 3600.0,
        mode,
        master_seed: 20_251_016,
    }
}

fn c7() -> Verdict {
    let cfg = SimConfig::default();
    let run = |s: &str| -> ErasureOutcome { run_erasure_experiment(&cfg, &spec(s, 500, 200, 4.0, MetricMode::Erasure)).unwrap() };
    let leo = run("LEO");
    let haps = run("HAPS");
    let tn = run("TN(10)");
    let hybrid = run("HAPS+TN(10)");

    let spread = leo.profile.spread().unwrap();
    let rings = haps.profile.rings();
    let mut inversions = 0;
    let mut beyond = false;
    for w in rings.windows(2) {
        let (a, b) = (w[0].mean.unwrap(), w[1].mean.unwrap());
        if b < a {
            inversions += 1;
            let sigma = (w[0].std_error.unwrap_or(0.0).powi(2) + w[1].std_error.unwrap_or(0.0).powi(2)).sqrt();
            beyond |= a - b > 2.0 * sigma;
        }
    }
    let best = if haps.mean_erasure <= tn.mean_erasure { &haps } else { &tn };
    let sigma = (hybrid.std_error.powi(2) + best.std_error.powi(2)).sqrt();
    let hybrid_ok = hybrid.mean_erasure <= best.mean_erasure + 2.0 * sigma;
    let ok = spread < 0.05 && inversions <= 1 && !beyond && hybrid_ok;
    verdict(
        ok,
        format!(
            "LEO ring spread {spread:.4}; HAPS rings {} with {inversions} inversion(s); HAPS+TN(10) {:.4} vs min(HAPS {:.4}, TN(10) {:.4})",
            rings.iter().map(|r| format!("{:.4}", r.mean.unwrap())).collect::<Vec<_>>().join("/"),
            hybrid.mean_erasure,
            haps.mean_erasure,
            tn.mean_erasure
        ),
    )
}

fn c8() -> Verdict {
    let cfg = SimConfig::default();
    let sweep = [100, 1000, 5000, 10_000];
    let curve = |s: &str| run_success_experiment(&cfg, &spec(s, 1, 100, 1.0, MetricMode::Success), &sweep).unwrap().points;
    let leo = curve("LEO");
    let haps = curve("HAPS");
    let tn = curve("TN(20)");
    let leo_tn = curve("LEO+TN(20)");
    let haps_tn = curve("HAPS+TN(20)");

    let non_increasing = |c: &[ntnsim::metrics::SuccessPoint]| c.windows(2).all(|w| w[1].mean <= w[0].mean + w[0].ci95 + w[1].ci95);
    let dominates = |a: &[ntnsim::metrics::SuccessPoint]| a.iter().zip(&tn).all(|(x, y)| x.mean >= y.mean - x.ci95 - y.ci95);
    let variation = |c: &[ntnsim::metrics::SuccessPoint]| {
        let m = c.iter().map(|p| p.mean);
        m.clone().fold(f64::MIN, f64::max) - m.fold(f64::MAX, f64::min)
    };
    let fmt = |c: &[ntnsim::metrics::SuccessPoint]| c.iter().map(|p| format!("{:.3}", p.mean)).collect::<Vec<_>>().join("/");
    let (vt, vl, vh) = (variation(&tn), variation(&leo), variation(&haps));
    let ok = non_increasing(&leo) && non_increasing(&haps) && dominates(&leo_tn) && dominates(&haps_tn) && vt < vl.min(vh);
    verdict(
        ok,
        format!(
            "LEO {}; HAPS {}; TN(20) {}; LEO+TN(20) {}; HAPS+TN(20) {}; variation TN {vt:.3} vs LEO {vl:.3}, HAPS {vh:.3}",
            fmt(&leo),
            fmt(&haps),
            fmt(&tn),
            fmt(&leo_tn),
            fmt(&haps_tn)
        ),
    )
}

fn numbers(v: &serde_json::Value, out: &mut Vec<f64>) {
    match v {
        serde_json::Value::Number(n) => out.push(n.as_f64().unwrap()),
        serde_json::Value::Array(a) => a.iter().for_each(|x| numbers(x, out)),
        serde_json::Value::Object(o) => o.values().for_each(|x| numbers(x, out)),
        _ => {}
    }
}

fn c9() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let summary = |cmd: &str, workers: u32| {
        let out = dir.path().join(format!("{cmd}-{workers}"));
        let mut args = vec![
            cmd.to_string(),
            "--scenario".into(),
            "LEO+HAPS+TN(5)".into(),
            "--devices".into(),
            "200".into(),
            "--runs".into(),
            "24".into(),
            "--duration".into(),
            "1".into(),
            "--seed".into(),
            "77".into(),
            "--workers".into(),
            workers.to_string(),
            "--out-dir".into(),
            out.display().to_string(),
        ];
        if cmd == "success" {
            args.extend(["--sweep".into(), "50,200".into()]);
        }
        let status = Command::new(env!("CARGO_BIN_EXE_sim"))
            .args(&args)
            .env("RUST_LOG", "warn")
            .output()
            .unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        let text = std::fs::read_to_string(out.join("summary.json")).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let mut xs = Vec::new();
        numbers(&v["results"], &mut xs);
        (xs, v["metadata"]["config_hash"].clone())
    };
    let mut worst = 0.0f64;
    let mut count = 0;
    let mut same_shape = true;
    for cmd in ["erasure", "success"] {
        let (a, _) = summary(cmd, 1);
        let (b, _) = summary(cmd, 8);
        same_shape &= a.len() == b.len() && !a.is_empty();
        for (x, y) in a.iter().zip(&b) {
            worst = worst.max((x - y).abs() / x.abs().max(y.abs()).max(1e-300));
        }
        count += a.len();
    }
    verdict(
        same_shape && worst <= 1e-9,
        format!("{count} summary scalars, worst relative difference {worst:.1e} between 1 and 8 workers"),
    )
}

fn main() -> ExitCode {
    let s = Duration::from_secs;
    let results = [
        check(1, "LR-FHSS fragment count and time on air", s(1), c1),
        check(2, "guard base-station counts", s(1), c2),
        check(3, "lap-duration distribution", s(30), c3),
        check(4, "channel identities", s(60), c4),
        check(5, "collision oracle", s(60), c5),
        check(6, "cost figures", s(1), c6),
        check(7, "scaled erasure map properties", s(600), c7),
        check(8, "scaled success curve properties", s(1200), c8),
        check(9, "determinism across worker counts", s(300), c9),
    ];
    let passed = results.iter().filter(|&&ok| ok).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
