use std::path::Path;

use geocal::analysis::{
    bootstrap_convergence, compare_methods, cross_validate, generate_synthetic, split, theory_audit, CompareConfig,
    Method, Reference, SyntheticSpec, TheoryConstants,
};
use geocal::diagnostics::{
    classification_report_with, deferral_point, error_detection_curves, pareto_frontier, reliability_diagram, BinMode,
    BinningScheme, CurvePoint, EceMode,
};
use geocal::pipeline::{score_dataset, PipelineConfig};
use geocal::reliability::{concentration_report, fit_threshold};
use geocal::simplex::argmax_class;
use geocal::{Calibrator, Error, FitConfig, InteriorConfig, LabeledDataset, ReliabilityPolicy};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::CliError;
use crate::io::{self, emit, load_dataset, opt, to_json, InputDigest, Metadata, Table, FORMAT_VERSION};
use crate::{
    ApplyArgs, AuditArgs, BinModeArg, BootstrapArgs, CompareArgs, CvArgs, EvalArgs, FitArgs, ReferenceArg, RunConfig,
    SampleSizeArgs, SimulateArgs,
};

/// On-disk model: a calibrator plus the deferral policy learned with it.
#[derive(Debug, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    #[serde(flatten)]
    pub calibrator: Calibrator,
    pub policy: Option<ReliabilityPolicy>,
    pub metadata: Option<Metadata>,
}

impl ModelFile {
    fn load(path: &Path) -> Result<(Self, InputDigest), CliError> {
        let (bytes, digest) = io::read_bytes(path)?;
        let model: ModelFile = serde_json::from_slice(&bytes)
            .map_err(|e| CliError::Input(format!("{}: not a model file: {e}", path.display())))?;
        if model.format_version != FORMAT_VERSION {
            return Err(CliError::Input(format!(
                "{}: format_version {} is not supported (expected {FORMAT_VERSION})",
                path.display(),
                model.format_version
            )));
        }
        Ok((model, digest))
    }
}

fn fit_config(cfg: &RunConfig) -> FitConfig {
    FitConfig {
        lambda1: cfg.lambda1,
        lambda2: cfg.lambda2,
        delta: cfg.delta,
        max_iterations: cfg.max_iterations,
        gradient_tolerance: cfg.gradient_tolerance,
        trace_constraint: cfg.trace_constraint,
        epsilon: cfg.epsilon,
    }
}

fn interior(cfg: &RunConfig) -> Result<InteriorConfig, CliError> {
    Ok(InteriorConfig::new(cfg.epsilon)?)
}

fn scheme(cfg: &RunConfig) -> Result<BinningScheme, CliError> {
    let mode = match cfg.bin_mode {
        BinModeArg::EqualWidth => BinMode::EqualWidth,
        BinModeArg::EqualCount => BinMode::EqualCount,
    };
    Ok(BinningScheme::new(mode, cfg.bins)?)
}

/// Effective configuration: the shared flags plus command-specific ones.
fn config_json<T: Serialize>(cfg: &RunConfig, extra: T) -> Value {
    let mut base = serde_json::to_value(cfg).unwrap_or(Value::Null);
    if let (Value::Object(map), Ok(Value::Object(more))) = (&mut base, serde_json::to_value(extra)) {
        map.extend(more);
    }
    base
}

fn check_classes(expected: Option<usize>, data: &LabeledDataset) -> Result<(), CliError> {
    match expected {
        Some(c) if c != data.classes() => Err(CliError::Input(format!(
            "model has {c} classes but the data has {}",
            data.classes()
        ))),
        _ => Ok(()),
    }
}

fn curve_table(points: &[CurvePoint], x: &str, y: &str) -> Table {
    let mut t = Table::new(&["threshold", x, y]);
    for p in points {
        t.push(vec![p.threshold.to_string(), p.x.to_string(), p.y.to_string()]);
    }
    t
}

fn warn(msg: &str) {
    eprintln!("geocal: warning: {msg}");
}

pub fn fit(args: FitArgs) -> Result<(), CliError> {
    let cfg = &args.cfg;
    let (data, digest) = load_dataset(&args.data, &interior(cfg)?)?;
    let method: Method = args.method.parse()?;
    let meta = Metadata::new("fit", config_json(cfg, json!({ "method": method })), vec![digest]);

    let calibrator = method.fit(&data, &fit_config(cfg))?;
    let scored = score_dataset(&calibrator, &data, cfg.reliability_lambda)?;
    let tau = fit_threshold(&scored.scores, &scored.correct, cfg.alpha)?;
    let policy = ReliabilityPolicy::new(cfg.reliability_lambda, tau, cfg.alpha)?;
    let training = deferral_point(&scored.scores, &scored.correct, tau)?;

    let fit_info = match &calibrator {
        Calibrator::Geometric(m) => m.fit_info.clone(),
        _ => None,
    };
    if let Some(info) = &fit_info {
        if !info.converged {
            warn(&format!(
                "optimizer stopped after {} iterations without converging",
                info.iterations
            ));
        }
        if info.low_sample {
            warn("fewer than ten rows per free parameter");
        }
    }

    let model = ModelFile {
        format_version: FORMAT_VERSION,
        calibrator,
        policy: Some(policy),
        metadata: Some(meta.clone()),
    };
    emit(Some(&args.out), &to_json(&model)?)?;

    let summary = json!({
        "format_version": FORMAT_VERSION,
        "model": args.out.display().to_string(),
        "method": method,
        "n": data.len(),
        "classes": data.classes(),
        "fit_info": fit_info,
        "policy": policy,
        "training": {
            "overall_error_rate": scored.error_rate(),
            "deferral_rate": training.deferral_rate,
            "automated_error_rate": training.automated_error_rate,
            "error_capture": training.error_capture,
        },
        "metadata": meta,
    });
    emit(None, &to_json(&summary)?)
}

pub fn apply(args: ApplyArgs) -> Result<(), CliError> {
    let (model, model_digest) = ModelFile::load(&args.model)?;
    let policy = model.policy.ok_or_else(|| {
        CliError::Input(format!(
            "{} has no policy; refit with `geocal fit`",
            args.model.display()
        ))
    })?;
    let (data, digest) = load_dataset(&args.data, &InteriorConfig::default())?;
    check_classes(model.calibrator.classes(), &data)?;
    let meta = Metadata::new("apply", json!({ "policy": policy }), vec![model_digest, digest]);

    let c = data.classes();
    let mut header: Vec<String> = (0..c).map(|j| format!("p_cal_{j}")).collect();
    header.extend(["predicted_class", "reliability", "decision"].map(String::from));
    let mut table = Table {
        header,
        rows: Vec::with_capacity(data.len()),
    };
    for s in data.rows() {
        let p = model.calibrator.apply(&s.probs)?;
        let j = argmax_class(&p);
        let r = geocal::reliability::reliability_score(&p, policy.lambda);
        let mut row: Vec<String> = p.as_slice().iter().map(|v| v.to_string()).collect();
        row.push(j.to_string());
        row.push(r.to_string());
        row.push(policy.decide(r, j).label().to_string());
        table.push(row);
    }
    emit(args.out.as_ref(), &table.render(&meta))
}

struct Evaluated {
    data: LabeledDataset,
    calibrator: Calibrator,
    policy: Option<ReliabilityPolicy>,
    meta: Metadata,
}

fn load_for_eval(args: &EvalArgs, command: &str) -> Result<Evaluated, CliError> {
    let cfg = &args.cfg;
    let (data, digest) = load_dataset(&args.data, &interior(cfg)?)?;
    let mut inputs = vec![digest];
    let (calibrator, policy) = match &args.model {
        Some(path) => {
            let (model, d) = ModelFile::load(path)?;
            inputs.insert(0, d);
            (model.calibrator, model.policy)
        }
        None => (Calibrator::Identity { c: data.classes() }, None),
    };
    check_classes(calibrator.classes(), &data)?;
    let extra = json!({ "diagram_bins": args.diagram_bins, "policy": policy });
    let meta = Metadata::new(command, config_json(cfg, extra), inputs);
    Ok(Evaluated {
        data,
        calibrator,
        policy,
        meta,
    })
}

pub fn evaluate(args: EvalArgs) -> Result<(), CliError> {
    let ev = load_for_eval(&args, "evaluate")?;
    let cfg = &args.cfg;
    let lambda = ev.policy.map_or(cfg.reliability_lambda, |p| p.lambda);
    let scored = score_dataset(&ev.calibrator, &ev.data, lambda)?;
    let labels = ev.data.labels();
    let report = classification_report_with(&scored.calibrated, &labels, scheme(cfg)?)?;
    let diagram = reliability_diagram(
        &scored.calibrated,
        &labels,
        EceMode::Overall,
        BinningScheme::new(BinMode::EqualCount, args.diagram_bins)?,
    );
    let diagram = match diagram {
        Ok(d) => Some(d),
        Err(Error::InsufficientData(m)) => {
            warn(&format!("reliability diagram skipped: {m}"));
            None
        }
        Err(e) => return Err(e.into()),
    };
    let curves = match error_detection_curves(&scored.scores, &scored.correct) {
        Ok(c) => Some(c),
        Err(Error::UndefinedAuc) => {
            warn("every prediction has the same correctness; error-detection curves are undefined");
            None
        }
        Err(e) => return Err(e.into()),
    };
    let operating_point = match ev.policy {
        Some(p) => Some(deferral_point(&scored.scores, &scored.correct, p.tau_star)?),
        None => None,
    };

    let out = json!({
        "format_version": FORMAT_VERSION,
        "report": report,
        "reliability_diagram": diagram,
        "error_detection_auc": curves.as_ref().map(|c| c.auc),
        "operating_point": operating_point,
        "metadata": ev.meta,
    });
    emit(args.out.as_ref(), &to_json(&out)?)?;

    if let Some(dir) = &args.curves {
        if let Some(bins) = &diagram {
            let mut t = Table::new(&["lower", "upper", "count", "mean_confidence", "empirical_frequency"]);
            for b in bins {
                t.push(vec![
                    b.lower.to_string(),
                    b.upper.to_string(),
                    b.count.to_string(),
                    opt(b.mean_confidence),
                    opt(b.empirical_frequency),
                ]);
            }
            emit(Some(&dir.join("diagram.csv")), &t.render(&ev.meta))?;
        }
        if let Some(c) = &curves {
            let roc = curve_table(&c.roc, "false_positive_rate", "true_positive_rate");
            emit(Some(&dir.join("roc.csv")), &roc.render(&ev.meta))?;
            let pr = curve_table(&c.pr, "recall", "precision");
            emit(Some(&dir.join("pr.csv")), &pr.render(&ev.meta))?;
        }
    }
    Ok(())
}

pub fn pareto(args: EvalArgs) -> Result<(), CliError> {
    let ev = load_for_eval(&args, "pareto")?;
    let lambda = ev.policy.map_or(args.cfg.reliability_lambda, |p| p.lambda);
    let scored = score_dataset(&ev.calibrator, &ev.data, lambda)?;
    let mut t = Table::new(&[
        "threshold",
        "deferral_rate",
        "automated_error_rate",
        "error_capture",
        "automated_count",
        "empty_automated",
    ]);
    for p in pareto_frontier(&scored.scores, &scored.correct)? {
        t.push(vec![
            p.threshold.to_string(),
            p.deferral_rate.to_string(),
            p.automated_error_rate.to_string(),
            p.error_capture.to_string(),
            p.automated_count.to_string(),
            p.empty_automated.to_string(),
        ]);
    }
    emit(args.out.as_ref(), &t.render(&ev.meta))
}

pub fn bootstrap(args: BootstrapArgs) -> Result<(), CliError> {
    let cfg = &args.cfg;
    let (data, digest) = load_dataset(&args.data, &interior(cfg)?)?;
    let mut inputs = vec![digest];
    let reference = match (args.reference, &args.truth) {
        (ReferenceArg::Full, None) => Reference::FullSample,
        (ReferenceArg::Full, Some(_)) => {
            return Err(CliError::Input("--truth only applies with --reference truth".into()));
        }
        (ReferenceArg::Truth, None) => return Err(CliError::Input("--reference truth needs --truth FILE".into())),
        (ReferenceArg::Truth, Some(path)) => {
            let (model, d) = ModelFile::load(path)?;
            inputs.push(d);
            match model.calibrator {
                Calibrator::Geometric(m) => Reference::Truth(m),
                _ => {
                    return Err(CliError::Input(format!(
                        "{}: truth must be a geometric map",
                        path.display()
                    )))
                }
            }
        }
    };
    check_classes(
        match &reference {
            Reference::Truth(m) => Some(m.c),
            Reference::FullSample => None,
        },
        &data,
    )?;
    // thread count is left out of the metadata so outputs match across it
    let extra = json!({ "sizes": args.sizes, "replicates": args.replicates, "reference": args.reference });
    let meta = Metadata::new("bootstrap", config_json(cfg, extra), inputs);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads)
        .build()
        .map_err(|e| CliError::Internal(format!("thread pool: {e}")))?;
    let table = pool.install(|| {
        bootstrap_convergence(
            &data,
            &args.sizes,
            args.replicates,
            &fit_config(cfg),
            cfg.seed,
            &reference,
        )
    })?;
    let rate = match table.rate() {
        Ok(r) => Some(r),
        Err(e) => {
            warn(&format!("no slope: {e}"));
            None
        }
    };
    for (size, &missed) in table.sizes.iter().zip(&table.not_converged) {
        if missed > 0 {
            warn(&format!("size {size}: {missed} replicate fits hit the iteration cap"));
        }
    }

    let mut t = Table::new(&["size", "mean_error", "sd_error", "not_converged"]);
    for i in 0..table.sizes.len() {
        t.push(vec![
            table.sizes[i].to_string(),
            table.mean_error[i].to_string(),
            table.sd_error[i].to_string(),
            table.not_converged[i].to_string(),
        ]);
    }
    if let Some(out) = &args.out {
        emit(Some(out), &t.render(&meta))?;
    }
    let summary = json!({
        "format_version": FORMAT_VERSION,
        "table": table,
        "rate": rate,
        "metadata": meta,
    });
    emit(None, &to_json(&summary)?)
}

pub fn compare(args: CompareArgs) -> Result<(), CliError> {
    let cfg = &args.cfg;
    let interior = interior(cfg)?;
    let (data, digest) = load_dataset(&args.data, &interior)?;
    let mut inputs = vec![digest];
    let (fit_data, eval_data) = match &args.eval {
        Some(path) => {
            let (eval, d) = load_dataset(path, &interior)?;
            inputs.push(d);
            (data, eval)
        }
        None => split(&data, 1.0 - args.holdout, cfg.seed)?,
    };
    let methods = args
        .methods
        .iter()
        .map(|m| m.parse())
        .collect::<Result<Vec<Method>, _>>()?;
    let extra = json!({
        "methods": methods,
        "deferral_target": args.deferral_target,
        "holdout": args.eval.is_none().then_some(args.holdout),
    });
    let meta = Metadata::new("compare", config_json(cfg, extra), inputs);
    let compare_cfg = CompareConfig {
        fit: fit_config(cfg),
        lambda: cfg.reliability_lambda,
        deferral_target: args.deferral_target,
        scheme: scheme(cfg)?,
    };
    let rows = compare_methods(&fit_data, &eval_data, &methods, &compare_cfg)?;

    let mut t = Table::new(&[
        "method",
        "errors",
        "accuracy",
        "ece_overall",
        "auc",
        "threshold",
        "deferral_rate",
        "deferred",
        "error_capture",
        "automated_error_rate",
    ]);
    for r in rows {
        t.push(vec![
            r.method.to_string(),
            r.errors.to_string(),
            r.accuracy.to_string(),
            r.ece_overall.to_string(),
            opt(r.auc),
            r.threshold.to_string(),
            r.deferral_rate.to_string(),
            r.deferred.to_string(),
            r.error_capture.to_string(),
            r.automated_error_rate.to_string(),
        ]);
    }
    emit(args.out.as_ref(), &t.render(&meta))
}

pub fn cv(args: CvArgs) -> Result<(), CliError> {
    let cfg = &args.cfg;
    let (data, digest) = load_dataset(&args.data, &interior(cfg)?)?;
    let meta = Metadata::new("cv", config_json(cfg, json!({ "k": args.k })), vec![digest]);
    let pipeline = PipelineConfig {
        fit: fit_config(cfg),
        lambda: cfg.reliability_lambda,
        alpha: cfg.alpha,
    };
    let summary = cross_validate(&data, args.k, &pipeline, cfg.seed)?;
    for f in summary.folds.iter().filter(|f| f.tau_star.is_none()) {
        warn(&format!(
            "fold {}: no feasible threshold, every test row deferred",
            f.fold
        ));
    }

    if let Some(path) = &args.folds_out {
        let mut t = Table::new(&[
            "fold",
            "train_n",
            "test_n",
            "tau_star",
            "overall_error_rate",
            "automated_error_rate",
            "error_capture",
            "deferral_rate",
            "missing_class",
        ]);
        for f in &summary.folds {
            t.push(vec![
                f.fold.to_string(),
                f.train_n.to_string(),
                f.test_n.to_string(),
                opt(f.tau_star),
                f.overall_error_rate.to_string(),
                f.automated_error_rate.to_string(),
                f.error_capture.to_string(),
                f.deferral_rate.to_string(),
                f.missing_class.to_string(),
            ]);
        }
        emit(Some(path), &t.render(&meta))?;
    }
    let out = json!({ "format_version": FORMAT_VERSION, "cv": summary, "metadata": meta });
    emit(args.out.as_ref(), &to_json(&out)?)
}

pub fn sample_size(args: SampleSizeArgs) -> Result<(), CliError> {
    let report = concentration_report(args.lambda, args.t, args.delta)?;
    let meta = Metadata::new(
        "sample-size",
        serde_json::to_value(&args).unwrap_or(Value::Null),
        vec![],
    );
    let out = json!({ "format_version": FORMAT_VERSION, "report": report, "metadata": meta });
    emit(None, &to_json(&out)?)
}

pub fn simulate(args: SimulateArgs) -> Result<(), CliError> {
    if args.c < 2 {
        return Err(CliError::Input(format!("need at least 2 classes, got {}", args.c)));
    }
    let mut spec =
        SyntheticSpec::temperature_distorted(args.n, args.c, args.temperature, args.concentration, args.seed)?;
    spec.separation = args.separation;
    let data = generate_synthetic(&spec)?;
    let meta = Metadata::new("simulate", serde_json::to_value(&args).unwrap_or(Value::Null), vec![]);
    emit(args.out.as_ref(), &io::dataset_csv(&data, &meta))?;
    if let Some(path) = &args.truth_out {
        let truth = ModelFile {
            format_version: FORMAT_VERSION,
            calibrator: Calibrator::Geometric(spec.true_map),
            policy: None,
            metadata: Some(meta),
        };
        emit(Some(path), &to_json(&truth)?)?;
    }
    Ok(())
}

pub fn audit(args: AuditArgs) -> Result<(), CliError> {
    let constants = TheoryConstants::new(args.c, args.epsilon, args.m_a, args.m_b, args.lambda1, args.lambda2)?;
    let report = theory_audit(&constants, args.trials, args.seed)?;
    let meta = Metadata::new("audit", serde_json::to_value(&args).unwrap_or(Value::Null), vec![]);
    let out = json!({
        "format_version": FORMAT_VERSION,
        "passed": report.passed(),
        "report": report,
        "metadata": meta,
    });
    emit(None, &to_json(&out)?)?;
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Internal("a bound was violated; see the report".into()))
    }
}
