//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use oneshot_info::asymptotics::{convergence_scan, hr_tail_bound, lemma4_z_bound, n0, Lemma4Outcome};
use oneshot_info::hashing::{collision_probability, CollisionMode};
use oneshot_info::mac::{adder_channel, induced_joint, mac_achievable_region, mac_simulate, mac_union_bound};
use oneshot_info::mac::{MacSimulationConfig, MessageChoice};
use oneshot_info::slepian_wolf::{sw_achievable_region, sw_simulate, sw_union_bound, SimulationConfig};
use oneshot_info::smoothing::oracle::{oracle_smooth, SmoothOrder};
use oneshot_info::typical::DEFAULT_DELTA_STEP;
use oneshot_info::{
    build_typical_set, find_delta, renyi, smooth_h0, smooth_hinf, smooth_hneginf, Alphabet, Axis, Caps, EntropyOrder,
    EpsilonBudget, JointPmf, Pmf,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn random_masses(rng: &mut StdRng, k: usize, zero_prob: f64) -> Vec<f64> {
    let skew = rng.random_range(0.5..4.0);
    let mut m: Vec<f64> = (0..k)
        .map(|_| if rng.random_bool(zero_prob) { 0.0 } else { rng.random::<f64>().powf(skew) })
        .collect();
    if m.iter().all(|&v| v == 0.0) {
        let i = rng.random_range(0..k);
        m[i] = 1.0;
    }
    let total: f64 = m.iter().sum();
    m.iter().map(|v| v / total).collect()
}

fn pmf(m: &[f64]) -> Pmf {
    Pmf::new(Alphabet::range(m.len()), m).unwrap()
}

fn joint2(kx: usize, ky: usize, m: &[f64]) -> JointPmf {
    JointPmf::from_dense(vec![Axis::new("X", Alphabet::range(kx)), Axis::new("Y", Alphabet::range(ky))], m).unwrap()
}

fn noisy_copy() -> JointPmf {
    joint2(2, 2, &[0.45, 0.05, 0.05, 0.45])
}

fn eps_grid() -> Vec<f64> {
    (0..=6).map(|k| k as f64 * 0.05).collect()
}

/// Every distribution on at most five atoms used by the smoother checks.
fn small_corpus() -> Vec<Vec<f64>> {
    let mut corpus: Vec<Vec<f64>> = vec![
        vec![1.0],
        vec![0.5, 0.5],
        vec![1.0 / 3.0; 3],
        vec![0.25; 4],
        vec![0.2; 5],
        vec![1.0, 0.0],
        vec![0.0, 0.0, 1.0, 0.0, 0.0],
        vec![0.95, 0.05],
        vec![0.9, 0.1],
        vec![0.85, 0.15],
        vec![0.7, 0.3],
        vec![0.4, 0.4, 0.2],
        vec![0.5, 0.25, 0.125, 0.125],
        vec![0.5, 0.25, 0.125, 0.0625, 0.0625],
        vec![0.6, 0.1, 0.1, 0.1, 0.1],
        vec![0.3, 0.3, 0.3, 0.05, 0.05],
        vec![0.4, 0.3, 0.2, 0.1],
        vec![0.8, 0.05, 0.05, 0.05, 0.05],
        vec![1.0 - 4e-12, 1e-12, 1e-12, 1e-12, 1e-12],
        vec![0.5, 0.5, 0.0, 0.0],
        vec![0.3, 0.0, 0.7],
        vec![0.35, 0.35, 0.15, 0.15],
    ];
    let mut rng = StdRng::seed_from_u64(0x5eed_0002);
    for _ in 0..500 {
        let k = rng.random_range(1..=5);
        corpus.push(random_masses(&mut rng, k, 0.15));
    }
    corpus
}

fn criterion_1() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed_0001);
    let mut worst = f64::INFINITY;
    for _ in 0..1000 {
        let k = rng.random_range(2..=64);
        let p = pmf(&random_masses(&mut rng, k, 0.1));
        let chain = [EntropyOrder::NegInfinity, EntropyOrder::Zero, EntropyOrder::One, EntropyOrder::Infinity]
            .map(|o| renyi(&p, o));
        for w in chain.windows(2) {
            worst = worst.min(w[0] - w[1]);
            if w[0] < w[1] - 1e-9 {
                return Err(format!("chain broken on {:?}: {chain:?}", p.mass()));
            }
        }
    }
    Ok(format!("1000 PMFs, smallest gap {worst:.3e}"))
}

fn criterion_2() -> Outcome {
    let corpus = small_corpus();
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    for m in &corpus {
        let p = pmf(m);
        for eps in eps_grid() {
            let pairs = [
                (smooth_h0(&p, eps), SmoothOrder::Zero),
                (smooth_hinf(&p, eps), SmoothOrder::Infinity),
                (smooth_hneginf(&p, eps), SmoothOrder::NegInfinity),
            ];
            for (fast, order) in pairs {
                let fast = fast.map_err(|e| e.to_string())?.value_bits;
                let reference = oracle_smooth(&p, eps, order, None).map_err(|e| e.to_string())?.value_bits;
                let gap = (fast - reference).abs();
                worst = worst.max(gap);
                if gap > 1e-9 {
                    return Err(format!("{order:?} at eps {eps} on {m:?}: {fast} vs oracle {reference}"));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{} PMFs, {checked} comparisons, max gap {worst:.1e}", corpus.len()))
}

fn criterion_3() -> Outcome {
    let corpus = small_corpus();
    let mut violations = Vec::new();
    for m in &corpus {
        let p = pmf(m);
        for eps in eps_grid() {
            let hi = smooth_hneginf(&p, eps).map_err(|e| e.to_string())?.value_bits;
            let lo = smooth_h0(&p, eps).map_err(|e| e.to_string())?.value_bits;
            if hi < lo - 1e-9 {
                violations.push(format!("{m:?} eps {eps}: {hi} < {lo}"));
            }
        }
    }
    if violations.is_empty() {
        Ok(format!("{} instances, zero violations", corpus.len() * eps_grid().len()))
    } else {
        Err(format!("{} violations, first: {}", violations.len(), violations[0]))
    }
}

fn criterion_4() -> Outcome {
    let caps = Caps::default();
    let mut rng = StdRng::seed_from_u64(0x5eed_0004);
    let deltas: Vec<f64> = (0..=10).map(|k| k as f64 * 0.02).collect();
    let mut slices = 0;
    for _ in 0..200 {
        let (kx, ky) = (rng.random_range(2..=8), rng.random_range(2..=8));
        let joint = joint2(kx, ky, &random_masses(&mut rng, kx * ky, 0.2));
        let p_y = joint.marginalize(&["Y"]).map_err(|e| e.to_string())?;
        for &delta in &deltas {
            let set = build_typical_set(&joint, delta, &caps).map_err(|e| e.to_string())?;
            let typical_y = build_typical_set(&p_y, delta, &caps).map_err(|e| e.to_string())?;
            let limit = set.joint_bounds().xi_max - set.bounds(&["Y"]).expect("Y bounds").xi_min;
            for &y in typical_y.members() {
                let size = set.conditional_slice(y).map_err(|e| e.to_string())?.len();
                slices += 1;
                if size as f64 > limit.exp2() * (1.0 + 1e-9) {
                    return Err(format!("{kx}x{ky} delta {delta} y {y}: slice {size} > 2^{limit}"));
                }
            }
        }
    }
    Ok(format!("200 joints x 11 deltas, {slices} slices, zero violations"))
}

fn criterion_5() -> Outcome {
    let caps = Caps::default();
    let joint = noisy_copy().iid_extension(8, &caps).map_err(|e| e.to_string())?;
    let budget = EpsilonBudget::equal(0.2).map_err(|e| e.to_string())?;
    let delta = find_delta(&joint, budget.parts[0], DEFAULT_DELTA_STEP, &caps).map_err(|e| e.to_string())?;
    let region = sw_achievable_region(&joint, &budget, delta, &caps).map_err(|e| e.to_string())?;
    let lengths = region.integer_lengths().map_err(|e| e.to_string())?;
    let cfg = SimulationConfig { trials: 10_000, master_seed: 5, exact: false, target_eps: 0.2 };
    let report = sw_simulate(&joint, lengths, delta, &cfg, &caps).map_err(|e| e.to_string())?;
    let bound = sw_union_bound(&joint, (lengths.0 as f64, lengths.1 as f64), delta, region.tail)
        .map_err(|e| e.to_string())?;
    let detail = format!(
        "delta {delta}, lengths {lengths:?}, {} failures, estimate {}, wilson {:.5}, bound {:.5}",
        report.failures, report.point_estimate, report.wilson_95_upper, bound
    );
    if report.wilson_95_upper <= 0.2 && report.point_estimate <= bound + 3.0 * report.stderr {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_6() -> Outcome {
    let caps = Caps::default();
    let budget = EpsilonBudget::equal(0.2).map_err(|e| e.to_string())?;
    let mut sources = vec![noisy_copy().iid_extension(8, &caps).map_err(|e| e.to_string())?];
    let mut rng = StdRng::seed_from_u64(0x5eed_0006);
    for _ in 0..20 {
        let (kx, ky) = (rng.random_range(2..=4), rng.random_range(2..=4));
        sources.push(joint2(kx, ky, &random_masses(&mut rng, kx * ky, 0.2)));
    }
    for (i, joint) in sources.iter().enumerate() {
        let delta = find_delta(joint, budget.parts[0], DEFAULT_DELTA_STEP, &caps).map_err(|e| e.to_string())?;
        let region = sw_achievable_region(joint, &budget, delta, &caps).map_err(|e| e.to_string())?;
        let (lo, hi) = (region.lower, region.achievable);
        if lo.l_x > hi.l_x + 1e-9 || lo.l_y > hi.l_y + 1e-9 || lo.l_sum > hi.l_sum + 1e-9 {
            return Err(format!("source {i}: lower {lo:?} exceeds achievable {hi:?}"));
        }
    }
    Ok(format!("{} sources, lower <= achievable componentwise", sources.len()))
}

fn criterion_7() -> Outcome {
    let caps = Caps::default();
    let ch = adder_channel().iid_extension(8, &caps).map_err(|e| e.to_string())?;
    let p_x = Pmf::uniform(2).iid_extension(8, &caps).map_err(|e| e.to_string())?;
    let p_y = p_x.renamed("Y");
    let joint3 = induced_joint(&p_x, &p_y, &ch).map_err(|e| e.to_string())?;
    let budget = EpsilonBudget::equal(0.2).map_err(|e| e.to_string())?;
    let delta = find_delta(&joint3, budget.parts[0], DEFAULT_DELTA_STEP, &caps).map_err(|e| e.to_string())?;
    let region = mac_achievable_region(&joint3, &budget, delta, &caps).map_err(|e| e.to_string())?;
    let rates = region.integer_rates().map_err(|e| e.to_string())?;
    let cfg = MacSimulationConfig {
        trials: 10_000,
        master_seed: 7,
        exact: false,
        target_eps: 0.2,
        messages: MessageChoice::Uniform,
        budget: Some(budget),
    };
    let report = mac_simulate(&p_x, &p_y, &ch, rates, delta, &cfg, &caps).map_err(|e| e.to_string())?;
    let bound = mac_union_bound(&joint3, rates.0 as f64, rates.1 as f64, delta, region.tail).map_err(|e| e.to_string())?;
    let detail = format!(
        "delta {delta}, caps ({:.3}, {:.3}, {:.3}), rates {rates:?}, {} failures, estimate {}, wilson {:.5}, bound {:.5}",
        region.c1_max, region.c2_max, region.sum_max, report.failures, report.point_estimate, report.wilson_95_upper, bound
    );
    if report.wilson_95_upper <= 0.2 && report.point_estimate <= bound + 3.0 * report.stderr {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_8() -> Outcome {
    // 40-digit evaluations.
    const N0_REFERENCE: f64 = 68.265_697_639_055_57;
    const HR_REFERENCE: f64 = 0.937_739_332_387_255_8;
    let n0 = n0(0.1, 2).map_err(|e| e.to_string())?;
    let hr = hr_tail_bound(100, 0.1, 2).map_err(|e| e.to_string())?;
    let detail = format!("n0 {n0:.6}, tail bound {hr:.6}");
    let agrees = (n0 - N0_REFERENCE).abs() < 1e-9 && (hr - HR_REFERENCE).abs() < 1e-12;
    if agrees && (n0 - 68.27).abs() <= 0.01 && (hr - 0.9378).abs() <= 0.0005 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_9() -> Outcome {
    let caps = Caps::default();
    let p = Pmf::bernoulli(0.3).map_err(|e| e.to_string())?;
    let rows = convergence_scan(&p, 0.1, 12, &caps).map_err(|e| e.to_string())?;
    let mut problems = Vec::new();
    for r in &rows {
        if r.value_per_n < r.companion - 1e-9 {
            problems.push(format!("n={} bracket broken", r.n));
        }
    }
    let gaps: Vec<f64> = rows[8..].iter().map(|r| (r.value_per_n - 0.8813).abs()).collect();
    if !gaps.windows(2).all(|w| w[1] < w[0]) {
        problems.push(format!("gaps over n=9..12 not decreasing: {gaps:.6?}"));
    }
    let mut checked = 0;
    for n in 1..=12 {
        match lemma4_z_bound(&p, n, 0.1, &caps).map_err(|e| e.to_string())? {
            Lemma4Outcome::Checked(c) => {
                checked += 1;
                if !c.holds {
                    problems.push(format!("constructive bound fails at n={n}: {c:?}"));
                }
            }
            Lemma4Outcome::NotYetMet { .. } => {}
        }
    }
    if problems.is_empty() {
        Ok(format!("bracket holds, gaps {gaps:.6?}, constructive bound checked at {checked} n"))
    } else {
        Err(problems.join("; "))
    }
}

fn criterion_10() -> Outcome {
    for bits in 1..=3u32 {
        let s = collision_probability(8, bits, CollisionMode::Exact).map_err(|e| e.to_string())?;
        let ideal = 0.5f64.powi(bits as i32);
        if s.input_bits != 3 || s.max_pair_probability != ideal || s.min_pair_probability != ideal {
            return Err(format!("b=3 l={bits}: {s:?}"));
        }
    }
    let mode = CollisionMode::MonteCarlo { trials: 100_000, master_seed: 10 };
    let s = collision_probability(1 << 16, 8, mode).map_err(|e| e.to_string())?;
    let z = (s.max_pair_probability - s.ideal) / s.stderr;
    let detail = format!("exact b=3 matches 2^-l for l=1..3; b=16 l=8 estimate {} ({z:+.2} sigma)", s.max_pair_probability);
    if s.input_bits == 16 && z.abs() <= 4.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name).display().to_string()
}

fn run_cli(args: &[String], threads: &str) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_oneshot-info"))
        .args(args)
        .env("RAYON_NUM_THREADS", threads)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?} exited {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr)));
    }
    Ok(out.stdout)
}

fn criterion_11() -> Outcome {
    let to_args = |s: &[&str]| s.iter().map(|a| a.to_string()).collect::<Vec<_>>();
    let (pmf, px, py, ch) = (data("correlated_bits.json"), data("uniform_bit_x.json"), data("uniform_bit_y.json"), data("adder.json"));
    let commands = [
        to_args(&["sw-sim", "--pmf", &pmf, "--n", "4", "--eps", "0.2", "--trials", "2000", "--seed", "7"]),
        to_args(&["sw-sim", "--pmf", &pmf, "--n", "3", "--eps", "0.2", "--trials", "300", "--seed", "7", "--exact", "--format", "csv"]),
        to_args(&[
            "mac-sim", "--px", &px, "--py", &py, "--channel", &ch, "--n", "6", "--eps", "0.2", "--trials", "2000", "--seed", "7",
            "--rates", "2,1", "--uniform-messages",
        ]),
        to_args(&["hash-check", "--domain", "1000", "--bits", "6", "--trials", "5000", "--seed", "7"]),
    ];
    for args in &commands {
        let first = run_cli(args, "4")?;
        let second = run_cli(args, "4")?;
        let single = run_cli(args, "1")?;
        if first != second || first != single {
            return Err(format!("{} output differs between runs", args[0]));
        }
    }
    Ok(format!("{} seeded commands byte-identical across repeats and thread counts", commands.len()))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("entropy order chain", criterion_1, Duration::from_secs(5)),
        ("smoothers match exhaustive oracle", criterion_2, Duration::from_secs(60)),
        ("smooth H-inf-neg dominates smooth H0", criterion_3, Duration::from_secs(600)),
        ("conditional slice cardinality", criterion_4, Duration::from_secs(600)),
        ("distributed source coding end to end", criterion_5, Duration::from_secs(120)),
        ("source coding lower vs achievable", criterion_6, Duration::from_secs(600)),
        ("multiple access end to end", criterion_7, Duration::from_secs(300)),
        ("tail bound numerics", criterion_8, Duration::from_secs(600)),
        ("convergence trend", criterion_9, Duration::from_secs(120)),
        ("hash collision exactness", criterion_10, Duration::from_secs(600)),
        ("CLI determinism", criterion_11, Duration::from_secs(600)),
    ];
    let mut failed = 0;
    for (i, (name, check, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(d) if elapsed > *limit => Err(format!("{d}; took {elapsed:.1?}, limit {limit:?}")),
            other => other,
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        if outcome.is_err() {
            failed += 1;
        }
        println!("criterion {:>2} {tag} {name} [{:.2?}]: {detail}", i + 1, elapsed);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
