use geocal::diagnostics::{
    classification_report_with, ece, error_detection_auc, proper_scores, BinningScheme, EceMode,
};
use geocal::ProbVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_dataset(seed: u64) -> (Vec<ProbVector>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = rng.random_range(2..=5);
    let n = rng.random_range(20..=200);
    let mut probs = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let raw: Vec<f64> = (0..c).map(|_| rng.random::<f64>().powi(3)).collect();
        let s: f64 = raw.iter().sum();
        let p: Vec<f64> = raw.iter().map(|v| v / s).collect();
        // labels follow the first entry loosely so accuracy is not trivial
        let y = if rng.random_bool(0.5) {
            (0..c).max_by(|&a, &b| p[a].total_cmp(&p[b]).then(b.cmp(&a))).unwrap()
        } else {
            rng.random_range(0..c)
        };
        probs.push(ProbVector::new(p).unwrap());
        labels.push(y);
    }
    (probs, labels)
}

fn first_argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for j in 1..v.len() {
        if v[j] > v[best] {
            best = j;
        }
    }
    best
}

fn brute_log_loss(probs: &[ProbVector], labels: &[usize]) -> f64 {
    let mut total = 0.0;
    for (p, &y) in probs.iter().zip(labels) {
        let v = p.as_slice()[y];
        total += -(if v < 1e-15 { 1e-15 } else { v }).ln();
    }
    total / probs.len() as f64
}

fn brute_brier(probs: &[ProbVector], labels: &[usize]) -> f64 {
    let mut total = 0.0;
    for (p, &y) in probs.iter().zip(labels) {
        for (j, &v) in p.as_slice().iter().enumerate() {
            let t = (j == y) as u8 as f64;
            total += (v - t).powi(2);
        }
    }
    total / probs.len() as f64
}

fn points(probs: &[ProbVector], labels: &[usize], mode: EceMode) -> Vec<(f64, f64)> {
    probs
        .iter()
        .zip(labels)
        .map(|(p, &y)| match mode {
            EceMode::Overall => {
                let j = first_argmax(p.as_slice());
                (p.as_slice()[j], (j == y) as u8 as f64)
            }
            EceMode::PerClass(j) => (p.as_slice()[j], (y == j) as u8 as f64),
        })
        .collect()
}

fn gap_sum(members: &[(f64, f64)]) -> f64 {
    if members.is_empty() {
        return 0.0;
    }
    let m = members.len() as f64;
    let conf: f64 = members.iter().map(|x| x.0).sum::<f64>() / m;
    let acc: f64 = members.iter().map(|x| x.1).sum::<f64>() / m;
    m * (acc - conf).abs()
}

fn brute_ece_width(pts: &[(f64, f64)], bins: usize) -> f64 {
    let mut total = 0.0;
    for b in 0..bins {
        let lo = b as f64 / bins as f64;
        let hi = (b + 1) as f64 / bins as f64;
        let members: Vec<(f64, f64)> = pts
            .iter()
            .copied()
            .filter(|&(c, _)| c >= lo && (c < hi || (b == bins - 1 && c <= 1.0)))
            .collect();
        total += gap_sum(&members);
    }
    total / pts.len() as f64
}

fn brute_ece_count(pts: &[(f64, f64)], bins: usize) -> f64 {
    let mut order: Vec<(f64, usize)> = pts.iter().enumerate().map(|(i, p)| (p.0, i)).collect();
    order.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let n = pts.len();
    let mut total = 0.0;
    let mut start = 0;
    for b in 0..bins {
        let len = n / bins + if b < n % bins { 1 } else { 0 };
        let members: Vec<(f64, f64)> = order[start..start + len].iter().map(|&(_, i)| pts[i]).collect();
        total += gap_sum(&members);
        start += len;
    }
    total / n as f64
}

/// Probability that a random error scores below a random correct sample.
fn brute_auc(scores: &[f64], correct: &[bool]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for i in 0..scores.len() {
        for j in 0..scores.len() {
            if !correct[i] && correct[j] {
                pairs += 1.0;
                if scores[i] < scores[j] {
                    wins += 1.0;
                } else if scores[i] == scores[j] {
                    wins += 0.5;
                }
            }
        }
    }
    wins / pairs
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12
}

#[test]
fn metrics_match_brute_force() {
    for seed in 0..50 {
        let (probs, labels) = random_dataset(seed);
        let c = probs[0].classes();

        let s = proper_scores(&probs, &labels).unwrap();
        assert!(close(s.log_loss, brute_log_loss(&probs, &labels)), "seed {seed}");
        assert!(close(s.brier, brute_brier(&probs, &labels)), "seed {seed}");

        for scheme in [
            BinningScheme::equal_width(15),
            BinningScheme::equal_count(10),
            BinningScheme::equal_width(7),
        ] {
            let mut modes = vec![EceMode::Overall];
            modes.extend((0..c).map(EceMode::PerClass));
            for mode in modes {
                let pts = points(&probs, &labels, mode);
                let want = match scheme.mode {
                    geocal::diagnostics::BinMode::EqualWidth => brute_ece_width(&pts, scheme.bin_count),
                    geocal::diagnostics::BinMode::EqualCount => brute_ece_count(&pts, scheme.bin_count),
                };
                let got = ece(&probs, &labels, mode, scheme).unwrap();
                assert!(close(got, want), "seed {seed} {mode:?} {scheme:?}: {got} vs {want}");
            }
        }

        let report = classification_report_with(&probs, &labels, BinningScheme::default()).unwrap();
        let mut confusion = vec![vec![0usize; c]; c];
        for (p, &y) in probs.iter().zip(&labels) {
            confusion[y][first_argmax(p.as_slice())] += 1;
        }
        assert_eq!(report.confusion, confusion, "seed {seed}");
        let n = labels.len();
        let hits: usize = (0..c).map(|j| confusion[j][j]).sum();
        assert!(close(report.accuracy, hits as f64 / n as f64));
        for j in 0..c {
            let tp = confusion[j][j] as f64;
            let col: usize = (0..c).map(|i| confusion[i][j]).sum();
            let row: usize = confusion[j].iter().sum();
            let precision = if col == 0 { 0.0 } else { tp / col as f64 };
            let recall = if row == 0 { 0.0 } else { tp / row as f64 };
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            let m = &report.per_class[j];
            assert!(
                close(m.precision, precision) && close(m.recall, recall) && close(m.f1, f1),
                "seed {seed} class {j}"
            );
            assert_eq!(m.support, row);
        }

        let scores: Vec<f64> = probs
            .iter()
            .map(|p| geocal::reliability::reliability_score(p, 1.0))
            .collect();
        let correct: Vec<bool> = probs
            .iter()
            .zip(&labels)
            .map(|(p, &y)| first_argmax(p.as_slice()) == y)
            .collect();
        if correct.iter().any(|&x| x) && correct.iter().any(|&x| !x) {
            let got = error_detection_auc(&scores, &correct).unwrap();
            assert!(close(got, brute_auc(&scores, &correct)), "seed {seed}");
        }
    }
}

#[test]
fn auc_with_heavy_ties_matches_pair_count() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let n = rng.random_range(10..100);
        let scores: Vec<f64> = (0..n).map(|_| rng.random_range(0..5) as f64 / 4.0).collect();
        let mut correct: Vec<bool> = (0..n).map(|_| rng.random_bool(0.6)).collect();
        correct[0] = true;
        correct[1] = false;
        let got = error_detection_auc(&scores, &correct).unwrap();
        assert!(close(got, brute_auc(&scores, &correct)));
    }
}
