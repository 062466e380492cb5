//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use mixamc::alrt::{log_likelihood, evaluate_bound, AlrtConfig, Hypothesis};
use mixamc::channel::{add_awgn, PowerRatio};
use mixamc::constellation::{modulate, Constellation, Scheme};
use mixamc::labelset::LabelSet;
use mixamc::rng::RandomSource;
use mixamc::SymbolSequence;
use num_rational::Ratio;
use rand::Rng;

use common::{empirical_snr_db, linear_domain_log_likelihood, mixed_points};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn constellation_normalization() -> Outcome {
    let mut worst: f64 = 0.0;
    for scheme in Scheme::ALL {
        let pts = Constellation::<f64>::new(scheme);
        let mean = pts.points().iter().map(|p| p.re * p.re + p.im * p.im).sum::<f64>() / pts.order() as f64;
        worst = worst.max((mean - 1.0).abs());
    }
    check(worst < 1e-12, format!("max |mean power - 1| = {worst:.3e} (tol 1e-12)"))
}

fn snr_calibration() -> Outcome {
    let start = Instant::now();
    let mut rng = RandomSource::from_seed(0x5eed);
    let n = 1_000_000;
    let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..16)).collect();
    let clean = modulate::<f64>(Scheme::Qam16, &idx).unwrap();
    let mut details = Vec::new();
    let mut ok = true;
    for snr in [-10.0, 0.0, 10.0, 20.0] {
        let noisy = add_awgn(&clean, snr, &mut rng);
        let measured = empirical_snr_db(clean.samples(), noisy.samples());
        ok &= (measured - snr).abs() <= 0.1;
        details.push(format!("{snr:+}dB->{measured:+.3}"));
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(10);
    check(ok, format!("{} over 1e6 samples (tol 0.1 dB), {:.2}s (limit 10s)", details.join(" "), elapsed.as_secs_f64()))
}

fn power_allocation() -> Outcome {
    let expected = [(1, (1, 2), (1, 2)), (2, (2, 3), (1, 3)), (5, (5, 6), (1, 6)), (8, (8, 9), (1, 9))];
    let mut ok = true;
    let mut details = Vec::new();
    for (k, s, w) in expected {
        let (es, ew) = PowerRatio::integer(k).unwrap().powers_exact();
        ok &= es == Ratio::new(s.0, s.1) && ew == Ratio::new(w.0, w.1);
        details.push(format!("{k}:1->({es},{ew})"));
    }
    check(ok, details.join(" "))
}

fn alrt_oracle_equivalence() -> Outcome {
    let mut rng = RandomSource::from_seed(1000);
    let mut worst: f64 = 0.0;
    let pairs = [(Scheme::Bpsk, Scheme::Qam4), (Scheme::Psk8, Scheme::Qam16), (Scheme::Qam4, Scheme::Psk8)];
    for instance in 0..1000 {
        let len = rng.random_range(1..=10);
        let snr = rng.random_range(-10.0..=10.0);
        let sigma2 = 10f64.powf(-snr / 10.0);
        let (points, class) = if instance % 2 == 0 {
            let s = Scheme::ALL[rng.random_range(0..4)];
            (Constellation::<f64>::new(s).points().to_vec(), s.code() as usize)
        } else {
            let (a, b) = pairs[rng.random_range(0..pairs.len())];
            (mixed_points(a, b, f64::from(rng.random_range(1..=9u32))), 0)
        };
        let truth = &points[rng.random_range(0..points.len())..];
        let clean: SymbolSequence<f64> = (0..len).map(|_| truth[rng.random_range(0..truth.len())]).collect();
        let r = add_awgn(&clean, snr, &mut rng);
        // score the sequence against a different random hypothesis too
        let other = Constellation::<f64>::new(Scheme::ALL[rng.random_range(0..4)]).points().to_vec();
        for pts in [&points, &other] {
            let h = Hypothesis::from_points(class, pts.clone()).unwrap();
            let fast = log_likelihood(&r, &h, &AlrtConfig::new(sigma2).unwrap()).unwrap();
            let slow = linear_domain_log_likelihood(r.samples(), pts, sigma2);
            if !slow.is_finite() {
                return Err(format!("oracle underflow on instance {instance}"));
            }
            worst = worst.max(((fast - slow) / slow).abs());
        }
    }
    check(worst <= 1e-9, format!("2000 comparisons, max relative error {worst:.3e} (tol 1e-9)"))
}

fn alrt_single_signal_bound() -> Outcome {
    let start = Instant::now();
    let grid = [10.0, 12.0, 14.0, 16.0, 18.0, 20.0, 40.0];
    let ev = evaluate_bound(&LabelSet::omega4(), &grid, 1000, 11, 100).unwrap();
    let mut ok = true;
    let mut details = Vec::new();
    for (&snr, &acc) in ev.curve.snr_db.iter().zip(&ev.curve.accuracy) {
        let floor = if snr >= 40.0 { 0.999 } else { 0.99 };
        ok &= acc >= floor;
        details.push(format!("{snr}dB:{acc:.4}"));
    }
    check(ok, format!("{} (>=0.99 for >=10 dB, >=0.999 at 40 dB), {:.1}s", details.join(" "), start.elapsed().as_secs_f64()))
}

fn mixed_chance_floor() -> Outcome {
    let set = LabelSet::omega6_ratio(PowerRatio::integer(2).unwrap()).unwrap();
    let ev = evaluate_bound(&set, &mixamc::dataset::default_snr_grid(), 1000, 3, 100).unwrap();
    let acc = &ev.curve.accuracy;
    let floor = acc[0];
    let chance = 1.0 / 6.0;
    let worst_drop = acc.windows(2).map(|w| w[0] - w[1]).fold(f64::NEG_INFINITY, f64::max);
    let ok = (floor - chance).abs() <= 0.05 && worst_drop <= 0.02;
    check(
        ok,
        format!(
            "-10 dB accuracy {floor:.4} (band {:.4}..{:.4}); largest step-down {worst_drop:+.4} (slack 0.02); curve {}",
            chance - 0.05,
            chance + 0.05,
            acc.iter().map(|a| format!("{a:.3}")).collect::<Vec<_>>().join(",")
        ),
    )
}

fn run_cli(dir: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_mixamc"))
        .args(args)
        .current_dir(dir)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(())
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let runs: Vec<_> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().unwrap();
            let d = dir.path();
            run_cli(d, &["gen", "--labelset", "omega6", "--ratio", "2", "--n-sample", "200", "--snr", "-10..20", "--seed", "7", "--out", "train.amcd", "--test-out", "test.amcd", "--n", "20"])?;
            run_cli(d, &["gen", "--labelset", "omega6", "--ratio", "random", "--n-sample", "50", "--seed", "7", "--out", "random.amcd"])?;
            run_cli(d, &["alrt", "--labelset", "omega4", "--n", "50", "--seed", "3", "--out-dir", "gen"])?;
            run_cli(d, &["alrt", "--dataset", "test.amcd", "--out-dir", "file", "--predictions-out", "preds.csv"])?;
            let mut all = snapshot(d);
            all.extend(snapshot(&d.join("gen")));
            all.extend(snapshot(&d.join("file")));
            all.retain(|(_, bytes)| !bytes.is_empty());
            Ok::<_, String>(all)
        })
        .collect::<Result<_, _>>()?;
    let files = runs[0].len();
    check(files > 10 && runs[0] == runs[1], format!("{files} AMCD/CSV outputs byte-identical across two runs"))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("constellation normalization", constellation_normalization),
        ("SNR calibration", snr_calibration),
        ("power allocation", power_allocation),
        ("ALRT oracle equivalence", alrt_oracle_equivalence),
        ("ALRT single-signal bound", alrt_single_signal_bound),
        ("mixed-signal chance floor", mixed_chance_floor),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("[PASS] {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
