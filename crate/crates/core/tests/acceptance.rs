//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each, and
//! exits nonzero if any fails.
//!
//! Run with `cargo test -p latentmix --test acceptance`.

use std::time::{Duration, Instant};

use latentmix::latf::{self, read_set, write_set, Dtype, HEADER_LEN};
use latentmix::{
    apply_region_offset, bias_growth_experiment, decompose, fix_norm, lerp, mean_adjusted_interp,
    nin, sample_gaussian_latent, slerp2, toy2d_paths, BiasSpec, ExperimentConfig,
    InterpMethod, Latent, LatentSet, LatentShape, MeanMode, SeedSpec, Toy2dPaths, Weights,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Outcome = Result<String, String>;

// Tolerances and thresholds.
const BIAS: f64 = 0.02;
const SLOPE_REL_TOL: f64 = 0.10;
const AMP_REL_TOL: f64 = 0.10;
const FLAT_ABS_TOL: f64 = 0.01;
const AMPLIFICATION_RUNTIME: Duration = Duration::from_secs(60);
const PROPERTY_CASES: usize = 1000;
const REL_TOL: f64 = 1e-9;
const NULL_TRIALS: usize = 1000;
const NULL_STD_REL_TOL: f64 = 0.25;
const NULL_MEAN_SE: f64 = 3.0;
const DECOMP_REL_TOL: f64 = 1e-12;
const REGION_MEAN_ABS_TOL: f64 = 1e-14;
const DESK_N: [usize; 6] = [2, 8, 32, 48, 64, 96];
const OFFSETS: [f64; 4] = [0.1, 0.2, 0.4, 0.8];

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel_elementwise(a: &Latent, b: &Latent) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| {
            if x == y {
                0.0
            } else {
                (x - y).abs() / y.abs().max(f64::MIN_POSITIVE)
            }
        })
        .fold(0.0, f64::max)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn random_shape(rng: &mut ChaCha8Rng) -> LatentShape {
    // H·W ≥ 2 so mean-adjusted noise parts are never identically zero.
    let c = rng.random_range(1..=4);
    let h = rng.random_range(1..=6);
    let w = rng.random_range(2..=6);
    LatentShape::new(c, h, w).unwrap()
}

/// Gaussian latent with a random scale and a random per-channel offset.
fn random_latent(rng: &mut ChaCha8Rng, shape: LatentShape) -> Latent {
    let scale = 10f64.powf(rng.random_range(-2.0..2.0));
    let offsets: Vec<f64> = (0..shape.channels()).map(|_| rng.random_range(-1.0..1.0)).collect();
    Latent::from_fn(shape, |c, _, _| {
        scale * (rng.sample::<f64, _>(StandardNormal) + offsets[c])
    })
    .unwrap()
}

fn random_set(rng: &mut ChaCha8Rng, shape: LatentShape, n: usize) -> LatentSet {
    LatentSet::new((0..n).map(|_| random_latent(rng, shape)).collect()).unwrap()
}

fn random_weights(rng: &mut ChaCha8Rng, n: usize) -> Weights {
    let mut raw: Vec<f64> = (0..n)
        .map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random_range(0.01..1.0) })
        .collect();
    if raw.iter().all(|w| *w == 0.0) {
        raw[0] = 1.0;
    }
    let sum: f64 = raw.iter().sum();
    Weights::new(raw.into_iter().map(|w| w / sum).collect()).unwrap()
}

fn amplification_reports() -> Result<(Vec<latentmix::AmplificationReport>, Duration), String> {
    let config =
        ExperimentConfig::desk_scale(vec![InterpMethod::FIX, InterpMethod::FIX_CHM], 100, 7);
    let start = Instant::now();
    let reports = bias_growth_experiment(&config).map_err(|e| e.to_string())?;
    Ok((reports, start.elapsed()))
}

fn ac1_sqrt_n_law(reports: &[latentmix::AmplificationReport], elapsed: Duration) -> Outcome {
    let fix = &reports[0];
    assert_eq!(fix.method, InterpMethod::FIX);
    check(fix.n_values == DESK_N, || format!("unexpected N grid {:?}", fix.n_values))?;
    for (c, slope) in fix.slopes.iter().enumerate() {
        check(rel(*slope, BIAS) <= SLOPE_REL_TOL, || {
            format!("channel {c}: slope {slope:.5} not within 10% of {BIAS}")
        })?;
    }
    let i64 = fix.n_index(64).unwrap();
    for (c, amp) in fix.amplification[i64].iter().enumerate() {
        let amp = amp.unwrap();
        check(rel(amp, 8.0) <= AMP_REL_TOL, || {
            format!("channel {c}: amplification at N=64 is {amp:.3}, not within 10% of 8")
        })?;
    }
    check(elapsed < AMPLIFICATION_RUNTIME, || {
        format!("runtime {elapsed:?} exceeds {AMPLIFICATION_RUNTIME:?}")
    })?;
    let amps: Vec<String> = fix.amplification[i64]
        .iter()
        .map(|a| format!("{:.3}", a.unwrap()))
        .collect();
    let slopes: Vec<String> = fix.slopes.iter().map(|s| format!("{s:.5}")).collect();
    Ok(format!(
        "fix/0 slopes [{}], amplification@64 [{}], {:.1?} for both methods",
        slopes.join(", "),
        amps.join(", "),
        elapsed
    ))
}

fn ac2_mean_adjustment(reports: &[latentmix::AmplificationReport]) -> Outcome {
    let chm = &reports[1];
    assert_eq!(chm.method, InterpMethod::FIX_CHM);
    let mut worst_dev: f64 = 0.0;
    let mut worst_amp: f64 = 0.0;
    for (ni, n) in chm.n_values.iter().enumerate() {
        for c in 0..chm.channels() {
            let m = chm.channel_means[ni][c];
            check((m - BIAS).abs() <= FLAT_ABS_TOL, || {
                format!("N={n} channel {c}: mean {m:.5} off {BIAS} by more than {FLAT_ABS_TOL}")
            })?;
            let amp = chm.amplification[ni][c].unwrap();
            check(rel(amp, 1.0) <= AMP_REL_TOL, || {
                format!("N={n} channel {c}: amplification {amp:.4} not within 10% of 1")
            })?;
            worst_dev = worst_dev.max((m - BIAS).abs());
            worst_amp = worst_amp.max((amp - 1.0).abs());
        }
    }
    Ok(format!(
        "fix/chm max |mean − 0.02| = {worst_dev:.2e}, max |amplification − 1| = {worst_amp:.2e}"
    ))
}

fn ac3_reproduction() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let reproducing = [
        ("lin", InterpMethod::LIN),
        ("nin", InterpMethod::NIN),
        ("nin/m", InterpMethod::NIN_M),
        ("nin/chm", InterpMethod::NIN_CHM),
    ];
    let mut fix_differs = 0;
    for case in 0..PROPERTY_CASES {
        let shape = random_shape(&mut rng);
        let n = rng.random_range(1..=6);
        let set = random_set(&mut rng, shape, n);
        let k = rng.random_range(0..n);
        let w = Weights::vertex(n, k).unwrap();
        let zk = set.get(k).unwrap();

        for (label, method) in reproducing {
            let out = mean_adjusted_interp(&set, &w, method).map_err(|e| format!("case {case} {label}: {e}"))?;
            let err = rel_elementwise(&out, zk);
            check(err <= REL_TOL, || format!("case {case} {label}: relative error {err:e}"))?;
        }
        let out = lerp(&set, &w).unwrap();
        check(rel_elementwise(&out, zk) <= REL_TOL, || format!("case {case}: lerp"))?;
        let out = nin(&set, &w).unwrap();
        check(rel_elementwise(&out, zk) <= REL_TOL, || format!("case {case}: nin"))?;

        let fixed = fix_norm(&set, &w).map_err(|e| format!("case {case} fix: {e}"))?;
        let sqrt_l = shape.nominal_norm();
        let norm_err = rel(fixed.norm(), sqrt_l);
        check(norm_err <= REL_TOL, || format!("case {case}: fix norm error {norm_err:e}"))?;
        if rel(zk.norm(), sqrt_l) > REL_TOL {
            check(&fixed != zk, || format!("case {case}: fix reproduced an off-norm input"))?;
            fix_differs += 1;
        }
    }
    Ok(format!(
        "{PROPERTY_CASES} cases, lin/nin/nin/m/nin/chm exact at vertices, fix pinned to √L and differed in {fix_differs} off-norm cases"
    ))
}

fn ac4_norm_postconditions() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for case in 0..PROPERTY_CASES {
        let shape = random_shape(&mut rng);
        let n = rng.random_range(1..=8);
        let set = random_set(&mut rng, shape, n);
        let w = random_weights(&mut rng, n);

        let fixed = fix_norm(&set, &w).map_err(|e| format!("case {case} fix: {e}"))?;
        let e1 = rel(fixed.norm(), shape.nominal_norm());
        let target: f64 = w.as_slice().iter().zip(&set).map(|(w, z)| w * z.norm()).sum();
        let nined = nin(&set, &w).map_err(|e| format!("case {case} nin: {e}"))?;
        let e2 = rel(nined.norm(), target);
        check(e1 <= REL_TOL && e2 <= REL_TOL, || {
            format!("case {case}: fix error {e1:e}, nin error {e2:e}")
        })?;
        worst = worst.max(e1).max(e2);
    }
    Ok(format!("{PROPERTY_CASES} cases, worst relative norm error {worst:.1e}"))
}

fn ac5_null_case() -> Outcome {
    let config = ExperimentConfig {
        shape: LatentShape::new(4, 64, 64).unwrap(),
        bias: BiasSpec::None,
        n_values: vec![2, 96],
        trials: NULL_TRIALS,
        methods: vec![InterpMethod::FIX],
        seed: 5,
    };
    let start = Instant::now();
    let report = bias_growth_experiment(&config).map_err(|e| e.to_string())?.remove(0);
    let expected_std = (4.0f64 / 16384.0).sqrt();
    let mut summary = Vec::new();
    for (ni, n) in report.n_values.iter().enumerate() {
        for c in 0..report.channels() {
            let std = report.channel_std[ni][c];
            let mean = report.channel_means[ni][c];
            let se = report.std_error(ni, c);
            check(rel(std, expected_std) <= NULL_STD_REL_TOL, || {
                format!("N={n} channel {c}: std {std:.5} vs √(C/L) = {expected_std:.5}")
            })?;
            check(mean.abs() <= NULL_MEAN_SE * se, || {
                format!("N={n} channel {c}: mean {mean:.2e} exceeds 3 SE ({se:.2e})")
            })?;
            summary.push(format!("{std:.4}"));
        }
    }
    Ok(format!(
        "std per (N, channel) [{}] vs {expected_std:.4}, means within 3 SE, {:.1?}",
        summary.join(", "),
        start.elapsed()
    ))
}

fn norm2(p: [f64; 2]) -> f64 {
    (p[0] * p[0] + p[1] * p[1]).sqrt()
}

fn ac6_toy2d() -> Outcome {
    let sqrt2 = std::f64::consts::SQRT_2;
    let configs = [
        (Toy2dPaths::DEFAULT_Z1, Toy2dPaths::DEFAULT_Z2),
        ([sqrt2, 0.0], [0.0, sqrt2]),
        ([0.4, -1.3], [2.2, 0.9]),
    ];
    for (z1, z2) in configs {
        let paths = toy2d_paths(z1, z2, 101).map_err(|e| e.to_string())?;
        for p in &paths.fix {
            check(rel(norm2(*p), sqrt2) <= REL_TOL, || format!("fix point {p:?} off the √2 circle"))?;
        }
        let last = paths.t.len() - 1;
        for (label, path) in [("lin", &paths.lin), ("slerp", &paths.slerp), ("nin", &paths.nin)] {
            check(path[0] == z1 && path[last] == z2, || format!("{label} endpoints do not reproduce inputs"))?;
        }
        check(norm2(paths.nin[0]) == norm2(z1) && norm2(paths.nin[last]) == norm2(z2), || {
            "nin endpoint norms differ from input norms".into()
        })?;
    }

    // Orthogonal equal-norm inputs: lerp midpoint norm is input norm / √2.
    let paths = toy2d_paths([sqrt2, 0.0], [0.0, sqrt2], 101).unwrap();
    let mid = norm2(paths.lin[50]);
    check(rel(mid, 1.0) <= REL_TOL, || format!("lerp midpoint norm {mid}"))?;

    // slerp2 on unit inputs stays on the unit sphere.
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let shape = LatentShape::new(4, 8, 8).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..200 {
        let a = sample_gaussian_latent(shape, SeedSpec::new(60, 2 * i));
        let b = sample_gaussian_latent(shape, SeedSpec::new(60, 2 * i + 1));
        let (a, b) = (a.scaled(1.0 / a.norm()), b.scaled(1.0 / b.norm()));
        let t: f64 = rng.random_range(0.0..=1.0);
        let out = slerp2(&a, &b, t).map_err(|e| e.to_string())?;
        worst = worst.max((out.norm() - 1.0).abs());
    }
    check(worst <= REL_TOL, || format!("slerp2 unit-sphere deviation {worst:e}"))?;
    Ok(format!(
        "fix on √2 circle, endpoints exact, lerp midpoint norm {mid:.15}, slerp2 unit deviation ≤ {worst:.1e}"
    ))
}

fn ac7_region_offset() -> Outcome {
    let shape = LatentShape::new(4, 64, 64).unwrap();
    let mut worst: f64 = 0.0;
    for (i, b) in OFFSETS.iter().enumerate() {
        let bias = BiasSpec::balanced_region(shape, *b).map_err(|e| e.to_string())?;
        let zero = Latent::zeros(shape);
        let shifted = apply_region_offset(&zero, &bias).map_err(|e| e.to_string())?;
        check(shifted.global_mean() == 0.0, || format!("b={b}: zero latent mean moved"))?;
        for s in 0..25 {
            let z = sample_gaussian_latent(shape, SeedSpec::new(70 + i as u64, s));
            let out = apply_region_offset(&z, &bias).map_err(|e| e.to_string())?;
            let d = (out.global_mean() - z.global_mean()).abs();
            check(d <= REGION_MEAN_ABS_TOL, || format!("b={b}: global mean moved by {d:e}"))?;
            worst = worst.max(d);
        }
    }
    Ok(format!(
        "b ∈ {{0.1, 0.2, 0.4, 0.8}}: zero latent bit-exact, Gaussian latents within {worst:.1e}"
    ))
}

fn ac8_decomposition() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_rec: f64 = 0.0;
    let mut worst_mean: f64 = 0.0;
    for case in 0..PROPERTY_CASES {
        let shape = random_shape(&mut rng);
        let z = random_latent(&mut rng, shape);
        let scale = z.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for mode in [MeanMode::Zero, MeanMode::GlobalMean, MeanMode::ChannelMean] {
            let parts = decompose(&z, mode);
            let rec = parts.recombine();
            let err = rec
                .as_slice()
                .iter()
                .zip(z.as_slice())
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
                / scale;
            check(err <= DECOMP_REL_TOL, || format!("case {case} {mode:?}: d + e off by {err:e}"))?;
            worst_rec = worst_rec.max(err);
            if mode == MeanMode::ChannelMean {
                for m in parts.noise().channel_means() {
                    let r = m.abs() / scale;
                    check(r <= DECOMP_REL_TOL, || format!("case {case}: e channel mean {r:e}"))?;
                    worst_mean = worst_mean.max(r);
                }
            }
        }
    }
    Ok(format!(
        "{PROPERTY_CASES} latents × 3 modes, worst |d + e − z| {worst_rec:.1e}, worst chm e-mean {worst_mean:.1e} (relative to max |z|)"
    ))
}

fn ac9_latf() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for case in 0..100 {
        let shape = random_shape(&mut rng);
        let n = rng.random_range(1..=5);
        let set = random_set(&mut rng, shape, n);
        let path = dir.path().join(format!("set{case}.latf"));

        latf::write_latents(&path, &set, Dtype::F64).map_err(|e| e.to_string())?;
        let back = latf::read_latents(&path).map_err(|e| e.to_string())?;
        let bit_exact = back.len() == set.len()
            && back.iter().zip(&set).all(|(a, b)| {
                a.shape() == b.shape()
                    && a.as_slice().iter().zip(b.as_slice()).all(|(x, y)| x.to_bits() == y.to_bits())
            });
        check(bit_exact, || format!("case {case}: f64 round trip not bit-exact"))?;

        latf::write_latents(&path, &set, Dtype::F32).map_err(|e| e.to_string())?;
        let back = latf::read_latents(&path).map_err(|e| e.to_string())?;
        for (a, b) in back.iter().zip(&set) {
            let max = b.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let bound = 2f64.powi(-23) * max;
            for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
                check((x - y).abs() <= bound, || format!("case {case}: f32 error beyond 2^-23·max"))?;
            }
        }
    }

    let shape = LatentShape::new(2, 3, 3).unwrap();
    let set = random_set(&mut rng, shape, 2);
    let mut good = Vec::new();
    write_set(&mut good, &set, Dtype::F64).unwrap();
    let mutate = |f: &dyn Fn(&mut Vec<u8>)| {
        let mut b = good.clone();
        f(&mut b);
        read_set(&b[..]).err().map(|e| e.name()).unwrap_or("Ok")
    };
    let cases: Vec<(&str, &str)> = vec![
        ("BadMagic", mutate(&|b| b[1] = b'X')),
        ("UnsupportedVersion", mutate(&|b| b[4..8].copy_from_slice(&7u32.to_le_bytes()))),
        ("UnsupportedDtype", mutate(&|b| b[8..12].copy_from_slice(&9u32.to_le_bytes()))),
        ("TruncatedHeader", mutate(&|b| b.truncate(HEADER_LEN - 1))),
        ("InvalidShape", mutate(&|b| b[16..20].copy_from_slice(&0u32.to_le_bytes()))),
        ("EmptySet", mutate(&|b| b[24..28].copy_from_slice(&0u32.to_le_bytes()))),
        ("TruncatedPayload", mutate(&|b| b.truncate(b.len() - 1))),
        ("NonFiniteValue", mutate(&|b| b[HEADER_LEN..HEADER_LEN + 8].copy_from_slice(&f64::INFINITY.to_le_bytes()))),
        ("TrailingData", mutate(&|b| b.extend_from_slice(&[0; 8]))),
    ];
    for (expected, got) in &cases {
        check(expected == got, || format!("expected {expected}, got {got}"))?;
    }
    let empty_write = LatentSet::new(vec![]);
    check(empty_write.is_err(), || "empty set was constructible".into())?;
    Ok(format!(
        "100 random sets bit-exact (f64) and within 2^-23·max (f32); {} corrupt cases → distinct errors",
        cases.len()
    ))
}

fn main() {
    let mut failures = 0;
    let mut report = |id: &str, title: &str, outcome: Outcome| {
        match outcome {
            Ok(detail) => println!("[PASS] {id} {title}: {detail}"),
            Err(detail) => {
                failures += 1;
                println!("[FAIL] {id} {title}: {detail}");
            }
        }
    };

    match amplification_reports() {
        Ok((reports, elapsed)) => {
            report("AC1", "sqrt(N) amplification law", ac1_sqrt_n_law(&reports, elapsed));
            report("AC2", "mean adjustment suppresses amplification", ac2_mean_adjustment(&reports));
        }
        Err(e) => {
            report("AC1", "sqrt(N) amplification law", Err(e.clone()));
            report("AC2", "mean adjustment suppresses amplification", Err(e));
        }
    }
    report("AC3", "reproduction property", ac3_reproduction());
    report("AC4", "norm postconditions", ac4_norm_postconditions());
    report("AC5", "i.i.d. null case", ac5_null_case());
    report("AC6", "toy 2D geometry", ac6_toy2d());
    report("AC7", "region-offset invariant", ac7_region_offset());
    report("AC8", "decomposition exactness", ac8_decomposition());
    report("AC9", "LATF round trip and corrupt headers", ac9_latf());

    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
