//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::f64::consts::PI;
use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use geocal::analysis::{
    bootstrap_convergence, fit_rate_slope, generate_synthetic, split, theory_audit, Reference, SyntheticSpec,
    TheoryConstants,
};
use geocal::calibration::platt::{fit_platt, logit, sigmoid, PlattPenalty};
use geocal::calibration::{apply_calibration, calibration_loss, fit_geometric};
use geocal::diagnostics::{
    classification_report_with, deferral_point, ece, error_detection_auc, proper_scores, BinMode, BinningScheme,
    EceMode,
};
use geocal::pipeline::{fit_pipeline, score_dataset, PipelineConfig};
use geocal::reliability::{concentration_report, empirical_tail_frequency, reliability_score, score_floor, tail_bound};
use geocal::simplex::{
    alr, alr_inverse, bhattacharyya_coefficient, distance_to_vertex, fisher_rao_distance, AlrVector,
};
use geocal::{CalibrationModel, Calibrator, FitConfig, ProbVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Dirichlet, Distribution};

type Check = Result<String, String>;
type Criterion = (u32, &'static str, Duration, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_simplex(rng: &mut ChaCha8Rng, c: usize) -> ProbVector {
    loop {
        let raw: Vec<f64> = (0..c).map(|_| rng.random::<f64>()).collect();
        let s: f64 = raw.iter().sum();
        if s > 1e-9 {
            return ProbVector::new(raw.iter().map(|v| v / s).collect()).unwrap();
        }
    }
}

fn random_interior(rng: &mut ChaCha8Rng, c: usize) -> ProbVector {
    let z: Vec<f64> = (0..c - 1).map(|_| rng.random_range(-8.0..8.0)).collect();
    alr_inverse(&AlrVector::new(z).unwrap())
}

fn c1_concentration_constants() -> Check {
    let r = concentration_report(1.0, 0.1, 0.01).map_err(|e| e.to_string())?;
    let closed = (1.0 - (-PI).exp()).powi(2) / 4.0;
    ensure((r.sigma2 - closed).abs() < 1e-12, || {
        format!("sigma2 {} vs closed form {closed}", r.sigma2)
    })?;
    ensure((r.sigma2 - 0.229).abs() < 5e-4, || {
        format!("sigma2 {} does not round to 0.229", r.sigma2)
    })?;
    ensure((r.tail_coefficient - 2.18).abs() < 0.005, || {
        format!("tail coefficient {}", r.tail_coefficient)
    })?;
    ensure(r.n_ours == 61 && r.n_naive == 654, || {
        format!("n_ours {} n_naive {}", r.n_ours, r.n_naive)
    })?;
    Ok(format!(
        "sigma2={:.6} coef={:.4} n_ours={} n_naive={}",
        r.sigma2, r.tail_coefficient, r.n_ours, r.n_naive
    ))
}

fn c2_published_slope() -> Check {
    let fit =
        fit_rate_slope(&[100, 250, 500, 750, 1000], &[0.555, 0.323, 0.193, 0.128, 0.077]).map_err(|e| e.to_string())?;
    ensure((fit.slope + 0.82).abs() <= 0.01, || format!("slope {}", fit.slope))?;
    Ok(format!("slope={:.4}", fit.slope))
}

fn c3_two_class_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let (a, b) = (rng.random_range(0.2..3.0), rng.random_range(-2.0..2.0));
        let model = CalibrationModel::from_parts(2, vec![a], vec![b]).unwrap();
        for i in 0..1000 {
            let x = (i as f64 + 0.5) / 1000.0;
            let cal = apply_calibration(&model, &ProbVector::new(vec![x, 1.0 - x]).unwrap()).unwrap();
            worst = worst.max((cal.as_slice()[0] - sigmoid(a * logit(x) + b)).abs());
        }
    }
    ensure(worst <= 1e-12, || format!("pointwise gap {worst:e}"))?;

    let cfg = FitConfig {
        gradient_tolerance: 1e-9,
        ..Default::default()
    };
    let mut delta = 0.0f64;
    for seed in 0..5 {
        let data = generate_synthetic(&SyntheticSpec::temperature_distorted(5000, 2, 1.8, 1.0, seed).unwrap())
            .map_err(|e| e.to_string())?;
        let model = fit_geometric(&data, &cfg, None).map_err(|e| e.to_string())?;
        let scores: Vec<f64> = data.rows().iter().map(|s| logit(s.probs.as_slice()[0])).collect();
        let targets: Vec<bool> = data.rows().iter().map(|s| s.label == 0).collect();
        let platt = fit_platt(
            &scores,
            &targets,
            &PlattPenalty {
                lambda_a: cfg.lambda1,
                lambda_b: cfg.lambda2,
            },
        )
        .map_err(|e| e.to_string())?;
        delta = delta
            .max((model.a[0] - platt.a).abs())
            .max((model.b[0] - platt.b).abs());
    }
    ensure(delta < 1e-4, || format!("fit gap {delta:e}"))?;
    Ok(format!("grid gap={worst:.1e} fit gap={delta:.1e}"))
}

fn c4_geometry() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for c in 2..8 {
        for i in 0..c {
            for j in 0..c {
                let d = fisher_rao_distance(&ProbVector::vertex(c, i).unwrap(), &ProbVector::vertex(c, j).unwrap())
                    .unwrap();
                ensure(d == if i == j { 0.0 } else { PI }, || {
                    format!("vertex distance {d} for c={c} ({i},{j})")
                })?;
            }
        }
    }
    let mut worst_triangle = f64::NEG_INFINITY;
    let mut worst_acos = 0.0f64;
    for _ in 0..10000 {
        let c = rng.random_range(2..7);
        let (p, q, r) = (
            random_simplex(&mut rng, c),
            random_simplex(&mut rng, c),
            random_simplex(&mut rng, c),
        );
        let pq = fisher_rao_distance(&p, &q).unwrap();
        let qr = fisher_rao_distance(&q, &r).unwrap();
        let pr = fisher_rao_distance(&p, &r).unwrap();
        worst_triangle = worst_triangle.max(pr - pq - qr);
        ensure(fisher_rao_distance(&p, &p).unwrap() == 0.0, || "d(p,p) != 0".into())?;
        let bc = bhattacharyya_coefficient(&p, &q).unwrap();
        worst_acos = worst_acos.max((pq - 2.0 * bc.clamp(0.0, 1.0).acos()).abs());
    }
    ensure(worst_triangle <= 1e-9, || format!("triangle excess {worst_triangle:e}"))?;
    ensure(worst_acos <= 1e-12, || format!("arccos gap {worst_acos:e}"))?;
    let mut worst_alr = 0.0f64;
    for _ in 0..10000 {
        let c = rng.random_range(2..7);
        let p = random_interior(&mut rng, c);
        let back = alr_inverse(&alr(&p).unwrap());
        for (a, b) in p.as_slice().iter().zip(back.as_slice()) {
            worst_alr = worst_alr.max((a - b).abs());
        }
    }
    ensure(worst_alr <= 1e-10, || format!("alr roundtrip {worst_alr:e}"))?;
    Ok(format!(
        "triangle excess={worst_triangle:.1e} arccos gap={worst_acos:.1e} alr={worst_alr:.1e}"
    ))
}

fn c5_reliability_invariants() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for lambda in [0.5, 1.0, 2.0] {
        let floor = score_floor(lambda);
        for _ in 0..100_000 {
            let c = rng.random_range(2..7);
            let r = reliability_score(&random_simplex(&mut rng, c), lambda);
            ensure(r >= floor && r <= 1.0, || {
                format!("R={r} outside [{floor}, 1] at lambda {lambda}")
            })?;
        }
    }
    let mut worst_tie = 0.0f64;
    for k in 0..1000 {
        let c = 3 + k % 4;
        let top = 1.0 / c as f64 + (k as f64 / 1000.0) * (0.5 - 1.0 / c as f64);
        let mut v = vec![(1.0 - 2.0 * top) / (c - 2) as f64; c];
        let (i, j) = (k % c, (k + 1) % c);
        v[i] = top;
        v[j] = top;
        let p = ProbVector::new(v).unwrap();
        let ri = (-distance_to_vertex(&p, i).unwrap()).exp();
        let rj = (-distance_to_vertex(&p, j).unwrap()).exp();
        worst_tie = worst_tie.max((ri - rj).abs());
    }
    ensure(worst_tie < 1e-12, || format!("tie gap {worst_tie:e}"))?;

    let data = generate_synthetic(&SyntheticSpec::temperature_distorted(4000, 4, 2.0, 1.0, 5).unwrap())
        .map_err(|e| e.to_string())?;
    let identity = Calibrator::Identity { c: 4 };
    let mut aucs = Vec::new();
    for lambda in [0.5, 1.0, 2.0, 5.0] {
        let s = score_dataset(&identity, &data, lambda).map_err(|e| e.to_string())?;
        aucs.push(error_detection_auc(&s.scores, &s.correct).map_err(|e| e.to_string())?);
    }
    ensure(aucs.iter().all(|&a| a == aucs[0]), || {
        format!("AUC varies with lambda: {aucs:?}")
    })?;
    Ok(format!("tie gap={worst_tie:.1e} auc={:.4} for every lambda", aucs[0]))
}

fn c6_hoeffding_audit() -> Check {
    let n = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let flat = Dirichlet::new([1.0; 3]).unwrap();
    let dirichlet: Vec<f64> = (0..n)
        .map(|_| reliability_score(&ProbVector::new(flat.sample(&mut rng).to_vec()).unwrap(), 1.0))
        .collect();
    let data = generate_synthetic(&SyntheticSpec::temperature_distorted(n, 4, 2.0, 1.0, 6).unwrap())
        .map_err(|e| e.to_string())?;
    let synthetic: Vec<f64> = data.rows().iter().map(|s| reliability_score(&s.probs, 2.0)).collect();
    let (vertex, uniform) = (ProbVector::vertex(10, 0).unwrap(), ProbVector::uniform(10).unwrap());
    let two_point: Vec<f64> = (0..n)
        .map(|_| reliability_score(if rng.random_bool(0.5) { &vertex } else { &uniform }, 0.5))
        .collect();

    let mut tightest = f64::INFINITY;
    for (name, scores, lambda) in [
        ("dirichlet", &dirichlet, 1.0),
        ("synthetic", &synthetic, 2.0),
        ("two-point", &two_point, 0.5),
    ] {
        for step in 1..=10 {
            let t = 0.05 * step as f64;
            let (freq, bound) = (empirical_tail_frequency(scores, t), tail_bound(lambda, t));
            ensure(freq <= bound, || {
                format!("{name}: frequency {freq} > bound {bound} at t={t}")
            })?;
            tightest = tightest.min(bound - freq);
        }
    }
    Ok(format!("smallest margin={tightest:.4}"))
}

fn c7_rate_property() -> Check {
    let spec = SyntheticSpec::temperature_distorted(80_000, 3, 2.0, 1.0, 7).unwrap();
    let pool = generate_synthetic(&spec).map_err(|e| e.to_string())?;
    let sizes = [250, 500, 1000, 2000, 4000, 8000];
    let table = bootstrap_convergence(
        &pool,
        &sizes,
        200,
        &FitConfig::default(),
        7,
        &Reference::Truth(spec.true_map),
    )
    .map_err(|e| e.to_string())?;
    let rate = table.rate().map_err(|e| e.to_string())?;
    ensure((-1.0..=-0.35).contains(&rate.slope), || {
        format!("slope {} (means {:?})", rate.slope, table.mean_error)
    })?;
    Ok(format!(
        "slope={:.3} CI=[{:.3}, {:.3}]",
        rate.slope, rate.ci_low, rate.ci_high
    ))
}

fn c8_lemma_audits() -> Check {
    let worked = TheoryConstants::new(3, 0.1, 1.0, 0.0, 0.01, 0.02).map_err(|e| e.to_string())?;
    ensure((worked.b_z - 8f64.ln()).abs() < 1e-12, || format!("B_z {}", worked.b_z))?;
    ensure(
        (worked.b_cal - 2.9408).abs() < 1e-4 && (worked.m - 6.9802).abs() < 1e-4,
        || format!("B_cal {} M {}", worked.b_cal, worked.m),
    )?;
    let mut min_ratio = f64::INFINITY;
    let mut max_loss_share = 0.0f64;
    for eps in [0.01, 0.05, 0.1] {
        for c in [2, 3, 5] {
            let t = TheoryConstants::new(c, eps, 1.5, 0.5, 0.01, 0.01).map_err(|e| e.to_string())?;
            let r = theory_audit(&t, 10000, 8).map_err(|e| e.to_string())?;
            ensure(
                r.hessian_violations == 0 && r.loss_violations == 0 && r.constants_consistent,
                || format!("eps {eps} c {c}: {r:?}"),
            )?;
            min_ratio = min_ratio.min(r.hessian_min_ratio);
            max_loss_share = max_loss_share.max(r.max_loss_observed / t.m);
        }
    }
    Ok(format!(
        "min lambda/eps^2={min_ratio:.3} max loss/M={max_loss_share:.3}"
    ))
}

fn first_argmax(v: &[f64]) -> usize {
    (1..v.len()).fold(0, |best, j| if v[j] > v[best] { j } else { best })
}

fn brute_ece(pts: &[(f64, f64)], scheme: BinningScheme) -> f64 {
    let k = scheme.bin_count;
    let groups: Vec<Vec<(f64, f64)>> = match scheme.mode {
        BinMode::EqualWidth => (0..k)
            .map(|b| {
                let (lo, hi) = (b as f64 / k as f64, (b + 1) as f64 / k as f64);
                pts.iter()
                    .copied()
                    .filter(|&(c, _)| c >= lo && (c < hi || (b == k - 1 && c <= 1.0)))
                    .collect()
            })
            .collect(),
        BinMode::EqualCount => {
            let mut sorted = pts.to_vec();
            sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
            let n = sorted.len();
            let mut start = 0;
            (0..k)
                .map(|b| {
                    let len = n / k + usize::from(b < n % k);
                    start += len;
                    sorted[start - len..start].to_vec()
                })
                .collect()
        }
    };
    groups
        .iter()
        .filter(|g| !g.is_empty())
        .map(|g| {
            let m = g.len() as f64;
            let conf: f64 = g.iter().map(|x| x.0).sum::<f64>() / m;
            let acc: f64 = g.iter().map(|x| x.1).sum::<f64>() / m;
            m * (acc - conf).abs()
        })
        .sum::<f64>()
        / pts.len() as f64
}

fn brute_auc(scores: &[f64], correct: &[bool]) -> f64 {
    let (mut wins, mut pairs) = (0.0, 0.0);
    for i in 0..scores.len() {
        for j in 0..scores.len() {
            if !correct[i] && correct[j] {
                pairs += 1.0;
                wins += if scores[i] < scores[j] {
                    1.0
                } else if scores[i] == scores[j] {
                    0.5
                } else {
                    0.0
                };
            }
        }
    }
    wins / pairs
}

fn c9_metric_oracles() -> Check {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12;
    let mut checks = 0usize;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(900 + seed);
        let c = rng.random_range(2..=5);
        let n = rng.random_range(20..=200);
        let mut probs = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let raw: Vec<f64> = (0..c).map(|_| rng.random::<f64>().powi(3)).collect();
            let s: f64 = raw.iter().sum();
            let p = ProbVector::new(raw.iter().map(|v| v / s).collect()).unwrap();
            let y = if rng.random_bool(0.5) {
                first_argmax(p.as_slice())
            } else {
                rng.random_range(0..c)
            };
            probs.push(p);
            labels.push(y);
        }

        let s = proper_scores(&probs, &labels).map_err(|e| e.to_string())?;
        let (mut ll, mut brier) = (0.0, 0.0);
        for (p, &y) in probs.iter().zip(&labels) {
            ll -= p.as_slice()[y].max(1e-15).ln();
            brier += p
                .as_slice()
                .iter()
                .enumerate()
                .map(|(j, &v)| (v - if j == y { 1.0 } else { 0.0 }).powi(2))
                .sum::<f64>();
        }
        ensure(
            close(s.log_loss, ll / n as f64) && close(s.brier, brier / n as f64),
            || format!("seed {seed}: proper scores"),
        )?;

        for scheme in [BinningScheme::equal_width(15), BinningScheme::equal_count(10)] {
            let mut modes = vec![EceMode::Overall];
            modes.extend((0..c).map(EceMode::PerClass));
            for mode in modes {
                let pts: Vec<(f64, f64)> = probs
                    .iter()
                    .zip(&labels)
                    .map(|(p, &y)| match mode {
                        EceMode::Overall => {
                            let j = first_argmax(p.as_slice());
                            (p.as_slice()[j], f64::from(u8::from(j == y)))
                        }
                        EceMode::PerClass(j) => (p.as_slice()[j], f64::from(u8::from(y == j))),
                    })
                    .collect();
                let got = ece(&probs, &labels, mode, scheme).map_err(|e| e.to_string())?;
                ensure(close(got, brute_ece(&pts, scheme)), || {
                    format!("seed {seed}: ece {mode:?} {scheme:?}")
                })?;
                checks += 1;
            }
        }

        let report =
            classification_report_with(&probs, &labels, BinningScheme::default()).map_err(|e| e.to_string())?;
        let mut confusion = vec![vec![0usize; c]; c];
        for (p, &y) in probs.iter().zip(&labels) {
            confusion[y][first_argmax(p.as_slice())] += 1;
        }
        ensure(report.confusion == confusion, || format!("seed {seed}: confusion"))?;
        for j in 0..c {
            let tp = confusion[j][j] as f64;
            let col = (0..c).map(|i| confusion[i][j]).sum::<usize>() as f64;
            let row = confusion[j].iter().sum::<usize>() as f64;
            let precision = if col == 0.0 { 0.0 } else { tp / col };
            let recall = if row == 0.0 { 0.0 } else { tp / row };
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            let m = &report.per_class[j];
            ensure(
                close(m.precision, precision) && close(m.recall, recall) && close(m.f1, f1),
                || format!("seed {seed}: class {j} metrics"),
            )?;
        }

        let scores: Vec<f64> = probs.iter().map(|p| reliability_score(p, 1.0)).collect();
        let correct: Vec<bool> = probs
            .iter()
            .zip(&labels)
            .map(|(p, &y)| first_argmax(p.as_slice()) == y)
            .collect();
        if correct.contains(&true) && correct.contains(&false) {
            let got = error_detection_auc(&scores, &correct).map_err(|e| e.to_string())?;
            ensure(close(got, brute_auc(&scores, &correct)), || format!("seed {seed}: auc"))?;
        }
        checks += 4;
    }
    Ok(format!("{checks} comparisons over 50 datasets"))
}

fn c10_gradient_check() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst = 0.0f64;
    for instance in 0..20u64 {
        let c = 2 + instance as usize % 4;
        let k = c - 1;
        let data = generate_synthetic(&SyntheticSpec::temperature_distorted(60, c, 1.5, 1.0, instance).unwrap())
            .map_err(|e| e.to_string())?;
        let a = (0..k * k)
            .map(|i| f64::from(u8::from(i % (k + 1) == 0)) + 0.8 * (rng.random::<f64>() - 0.5))
            .collect();
        let b = (0..k).map(|_| 0.8 * (rng.random::<f64>() - 0.5)).collect();
        let mut model = CalibrationModel::from_parts(c, a, b).unwrap();
        model.lambda1 = 0.05;
        model.lambda2 = 0.02;
        let (_, grad) = calibration_loss(&model, &data).map_err(|e| e.to_string())?;
        let h = 1e-5;
        let mut sq_diff = 0.0;
        let mut sq_norm = 0.0;
        for (i, g) in grad.iter().enumerate() {
            let (mut plus, mut minus) = (model.clone(), model.clone());
            if i < k * k {
                plus.a[i] += h;
                minus.a[i] -= h;
            } else {
                plus.b[i - k * k] += h;
                minus.b[i - k * k] -= h;
            }
            let fd =
                (calibration_loss(&plus, &data).unwrap().0 - calibration_loss(&minus, &data).unwrap().0) / (2.0 * h);
            sq_diff += (g - fd).powi(2);
            sq_norm += fd * fd;
        }
        worst = worst.max(sq_diff.sqrt() / sq_norm.sqrt().max(1.0));
    }
    ensure(worst < 1e-5, || format!("relative error {worst:e}"))?;
    Ok(format!("max relative error={worst:.1e}"))
}

fn c11_end_to_end() -> Check {
    let data = generate_synthetic(&SyntheticSpec::temperature_distorted(5000, 3, 2.0, 1.0, 11).unwrap())
        .map_err(|e| e.to_string())?;
    let (train, test) = split(&data, 0.5, 11).map_err(|e| e.to_string())?;
    let cfg = PipelineConfig::default();
    let fitted = fit_pipeline(&train, &cfg).map_err(|e| e.to_string())?;
    let tau = fitted.policy.tau_star;
    let on_train = deferral_point(&fitted.training.scores, &fitted.training.correct, tau).map_err(|e| e.to_string())?;
    ensure(on_train.automated_error_rate <= cfg.alpha, || {
        format!("training automated error {}", on_train.automated_error_rate)
    })?;

    let scored = score_dataset(&fitted.calibrator(), &test, cfg.lambda).map_err(|e| e.to_string())?;
    let point = deferral_point(&scored.scores, &scored.correct, tau).map_err(|e| e.to_string())?;
    let overall = scored.error_rate();
    ensure(point.automated_error_rate <= overall, || {
        format!("automated {} > overall {overall}", point.automated_error_rate)
    })?;
    let ratio = point.error_capture / point.deferral_rate;
    ensure(ratio >= 1.2, || format!("capture/deferral {ratio}"))?;
    Ok(format!(
        "train automated={:.4} held-out automated={:.4} overall={overall:.4} capture/deferral={ratio:.2}",
        on_train.automated_error_rate, point.automated_error_rate
    ))
}

fn c12_determinism() -> Check {
    let dir = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let d = dir.path();
    let run = |args: &[&str]| -> Result<Vec<u8>, String> {
        let out = Command::new(env!("CARGO_BIN_EXE_geocal"))
            .current_dir(d)
            .args(args)
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)));
        }
        Ok(out.stdout)
    };
    let read = |name: &str| fs::read(d.join(name)).map_err(|e| e.to_string());

    for name in ["s1.csv", "s2.csv"] {
        run(&[
            "simulate",
            "--n",
            "1500",
            "--c",
            "3",
            "--seed",
            "7",
            "--temperature",
            "2",
            "--out",
            name,
        ])?;
    }
    ensure(read("s1.csv")? == read("s2.csv")?, || "simulate differs".into())?;

    let f1 = run(&["fit", "--data", "s1.csv", "--out", "m.json"])?;
    let m1 = read("m.json")?;
    let f2 = run(&["fit", "--data", "s1.csv", "--out", "m.json"])?;
    ensure(f1 == f2 && m1 == read("m.json")?, || "fit differs".into())?;

    let boot = |threads: &str, out: &str| {
        run(&[
            "bootstrap",
            "--data",
            "s1.csv",
            "--sizes",
            "200,400,800",
            "--replicates",
            "25",
            "--threads",
            threads,
            "--out",
            out,
        ])
    };
    let b1 = boot("1", "b1.csv")?;
    let b1_again = boot("1", "b1b.csv")?;
    let b4 = boot("4", "b4.csv")?;
    let b7 = boot("7", "b7.csv")?;
    ensure(b1 == b1_again && read("b1.csv")? == read("b1b.csv")?, || {
        "bootstrap differs between runs".into()
    })?;
    ensure(
        b1 == b4 && b1 == b7 && read("b1.csv")? == read("b4.csv")? && read("b1.csv")? == read("b7.csv")?,
        || "bootstrap depends on thread count".into(),
    )?;
    Ok("simulate, fit, bootstrap byte-identical; bootstrap same at 1/4/7 threads".into())
}

fn main() {
    let criteria: [Criterion; 12] = [
        (
            1,
            "concentration constants and sample sizes",
            Duration::from_secs(1),
            c1_concentration_constants,
        ),
        (
            2,
            "slope from published convergence means",
            Duration::from_secs(1),
            c2_published_slope,
        ),
        (
            3,
            "two-class equivalence with Platt scaling",
            Duration::from_secs(30),
            c3_two_class_equivalence,
        ),
        (4, "geometry suite", Duration::from_secs(10), c4_geometry),
        (
            5,
            "reliability invariants",
            Duration::from_secs(30),
            c5_reliability_invariants,
        ),
        (6, "Hoeffding tail audit", Duration::from_secs(30), c6_hoeffding_audit),
        (
            7,
            "estimator error rate on synthetic data",
            Duration::from_secs(600),
            c7_rate_property,
        ),
        (
            8,
            "Hessian floor and bounded-loss audits",
            Duration::from_secs(60),
            c8_lemma_audits,
        ),
        (9, "metric oracles", Duration::from_secs(60), c9_metric_oracles),
        (10, "gradient check", Duration::from_secs(10), c10_gradient_check),
        (
            11,
            "end-to-end pipeline property",
            Duration::from_secs(60),
            c11_end_to_end,
        ),
        (12, "determinism", Duration::from_secs(120), c12_determinism),
    ];
    let mut failed = 0;
    for (id, name, budget, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > budget => Err(format!("{detail}; took {elapsed:.2?}, budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS criterion {id:>2} {name} ({elapsed:.2?}): {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {id:>2} {name} ({elapsed:.2?}): {why}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
