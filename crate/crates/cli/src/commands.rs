use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use mfgp_core::bench::{
    fit_method, indicator_values, loo_report, make_synthetic, run_experiment, ExperimentConfig, FeatureSelection,
    NormalizationMode, SelectionScope, SyntheticTask,
};
use mfgp_core::data::{apply_normalize, fit_normalize, pca_project, NormalizationReference};
use mfgp_core::featsel::{best_subset_size, rank_features, sweep_subset_size, write_sweep_csv};
use mfgp_core::mfgp::LevelModel;
use mfgp_core::{Dataset, DenseMatrix, Error, FitConfig, Method, ModelEnvelope, Result, TrainedModel};
use clap::ValueEnum;
use serde_json::json;

use crate::args::{BenchmarkArgs, FitArgs, FitOptions, PcaArgs, PredictArgs, SelectArgs, SyntheticArgs};
use crate::config::{sha256_file, sha256_many, RunConfig, Source};
use crate::CliError;

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes())?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

impl FitOptions {
    fn config(&self, seed: u64) -> FitConfig {
        FitConfig {
            restarts: self.restarts,
            seed,
            estimate_mean: !self.zero_mean,
            ard: !self.shared_lengthscale,
            ..FitConfig::default()
        }
    }

    fn to_json(&self) -> serde_json::Value {
        json!({
            "restarts": self.restarts,
            "shared_lengthscale": self.shared_lengthscale,
            "zero_mean": self.zero_mean,
            "imputation": self.imputation.to_possible_value().map(|v| v.get_name().to_string()),
        })
    }
}

/// Rows a single fitted model trains on when it sees the whole dataset.
fn fit_rows(method: Method, ds: &Dataset) -> Result<Vec<usize>> {
    match method {
        Method::GpLow if ds.n_levels() < 2 => Err(Error::Config("gp-low needs at least two fidelity levels".into())),
        Method::GpLow => Ok(ds.rows_at(ds.n_levels() - 1)),
        Method::GpHigh => Ok(ds.high_rows()),
        _ => Ok((0..ds.n_rows()).collect()),
    }
}

fn level_summary(model: &TrainedModel) -> Vec<serde_json::Value> {
    match model {
        TrainedModel::Gp { gp } | TrainedModel::Augmented { gp, .. } => vec![json!({
            "level": 1,
            "mll": gp.mll_at_fit,
            "hyperparameters": gp.hyper,
            "jitter": gp.jitter_used(),
        })],
        TrainedModel::Multi { model } => model
            .levels
            .iter()
            .enumerate()
            .map(|(t, l)| {
                let gp = l.gp();
                let mut v = json!({
                    "level": t + 1,
                    "mll": gp.mll_at_fit,
                    "hyperparameters": gp.hyper,
                    "jitter": gp.jitter_used(),
                });
                if let LevelModel::Linear { rho, gp } = l {
                    v["rho"] = json!(rho);
                    v["mu"] = json!(gp.hyper.mean_constant);
                }
                v
            })
            .collect(),
    }
}

pub fn cmd_fit(args: &FitArgs) -> Result<()> {
    let data = args.source.load(args.seed)?;
    let ds = &data.dataset;
    let mut rc = RunConfig::new("fit", args.source.source(), args.seed, args.out.clone());
    rc.methods = vec![args.method];
    rc.options = json!({ "fit": args.fit.to_json(), "normalize": !args.no_normalize });

    let stats = if args.no_normalize {
        None
    } else {
        Some(fit_normalize(ds, &NormalizationReference::AllRows)?)
    };
    let train = match &stats {
        Some(s) => apply_normalize(ds, s)?,
        None => ds.clone(),
    };
    let rows = fit_rows(args.method, &train)?;
    let indicator = indicator_values(&ExperimentConfig::default(), train.n_levels())?;
    let model = fit_method(
        args.method,
        &train,
        &rows,
        &args.fit.config(args.seed),
        args.fit.imputation.mode(args.seed),
        &indicator,
    )?;

    let data_sha256 = data.content_hash();
    let summary = json!({
        "toolkit_version": env!("CARGO_PKG_VERSION"),
        "run_config": rc.to_value(),
        "data_sha256": data_sha256,
        "method": args.method,
        "training_rows": rows.len(),
        "noise_variance": model.noise_variance(),
        "jitter_used": model.jitter_used(),
        "levels": level_summary(&model),
    });
    let envelope = ModelEnvelope::new(
        args.method,
        model,
        ds.feature_names.clone(),
        ds.target_name.clone(),
        stats,
        json!({
            "toolkit_version": env!("CARGO_PKG_VERSION"),
            "run_config": rc.to_value(),
            "data_sha256": data_sha256,
        }),
    );
    write_text(&args.out, &envelope.to_json()?)?;
    let summary_path = args.out.with_extension("summary.json");
    write_text(&summary_path, &serde_json::to_string_pretty(&summary)?)?;
    log::info!("wrote {} and {}", args.out.display(), summary_path.display());
    Ok(())
}

/// Reads the named columns of a feature CSV. A file without any content
/// yields zero rows.
fn read_features(path: &Path, names: &[String]) -> Result<DenseMatrix> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    if text.trim().is_empty() {
        return Ok(DenseMatrix::zeros(0, names.len()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    let cols = names
        .iter()
        .map(|n| headers.iter().position(|h| h == n).ok_or_else(|| Error::MissingColumn(n.clone())))
        .collect::<Result<Vec<_>>>()?;
    let mut entries = Vec::new();
    let mut n = 0;
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        for &c in &cols {
            let cell = record.get(c).unwrap_or("");
            match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => entries.push(v),
                _ => {
                    return Err(Error::NonNumericCell {
                        row: i + 1,
                        column: headers[c].clone(),
                        value: cell.to_string(),
                    })
                }
            }
        }
        n += 1;
    }
    DenseMatrix::from_row_major(n, cols.len(), entries)
}

pub fn cmd_predict(args: &PredictArgs) -> Result<()> {
    let envelope = ModelEnvelope::from_json(&std::fs::read_to_string(&args.model)?)?;
    let x = read_features(&args.input, &envelope.feature_names)?;
    let pred = if x.rows() == 0 {
        None
    } else {
        Some(envelope.predict(&x)?)
    };
    let rc = RunConfig::new(
        "predict",
        Source::Model { model: args.model.clone(), input: args.input.clone() },
        0,
        args.out.clone().unwrap_or_else(|| "-".into()),
    );
    let hash = sha256_many(&[&sha256_file(&args.model)?, &sha256_file(&args.input)?]);

    let mut out: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(create(path)?),
        None => Box::new(std::io::stdout().lock()),
    };
    rc.write_preamble(&mut out, &hash)?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = envelope.feature_names.clone();
    header.extend(["mean", "variance", "lo2sd", "hi2sd"].map(String::from));
    w.write_record(&header)?;
    if let Some(p) = pred {
        for i in 0..x.rows() {
            let sd = p.variance[i].sqrt();
            let mut rec: Vec<String> = x.row(i).iter().map(f64::to_string).collect();
            for v in [p.mean[i], p.variance[i], p.mean[i] - 2.0 * sd, p.mean[i] + 2.0 * sd] {
                rec.push(v.to_string());
            }
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_select_features(args: &SelectArgs) -> Result<usize, CliError> {
    let data = args.source.load(args.seed)?;
    let ds = &data.dataset;
    let method = args.discretization.into();
    let ranking = rank_features(&ds.x, &ds.y, args.n_bins, method)?;

    let mut rc = RunConfig::new("select-features", args.source.source(), args.seed, args.out_dir.clone());
    rc.methods = vec![args.method];
    rc.n_t = vec![args.nt];
    rc.repeats = Some(args.repeats);
    rc.discretization = Some(method);
    rc.options = json!({
        "n_bins": args.n_bins,
        "fit": args.fit.to_json(),
        "normalization": NormalizationMode::from(args.normalization),
    });
    let config = ExperimentConfig {
        methods: vec![args.method],
        n_t: vec![args.nt],
        repeats: args.repeats,
        seed: args.seed,
        fit: args.fit.config(args.seed),
        imputation: args.fit.imputation.mode(args.seed),
        normalization: args.normalization.into(),
        ..ExperimentConfig::default()
    };
    let curve = sweep_subset_size(&data, &ranking, args.method, &config, args.jobs)?;
    if curve.iter().all(|p| p.mean_rmse.is_none()) {
        return Err(CliError::NoSuccessfulFit("every repeat of every subset size failed".into()));
    }
    let best = best_subset_size(&curve).unwrap_or(ranking.len());
    let hash = data.content_hash();

    let mut w = create(&args.out_dir.join("ranking.csv"))?;
    rc.write_preamble(&mut w, &hash)?;
    ranking.write_csv(&mut w, &ds.feature_names)?;
    w.flush()?;
    let mut w = create(&args.out_dir.join("sweep.csv"))?;
    rc.write_preamble(&mut w, &hash)?;
    writeln!(w, "# seeds: N_f uses seed + N_f for its splits and fits")?;
    write_sweep_csv(&curve, &mut w)?;
    w.flush()?;

    let names: Vec<&str> = ranking.top(best).iter().map(|j| ds.feature_names[*j].as_str()).collect();
    println!("best N_f = {best} ({})", names.join(", "));
    Ok(best)
}

/// Writes the report even when seeds fail; errors only when no cell produced
/// a single RMSE.
pub fn cmd_benchmark(args: &BenchmarkArgs) -> Result<(), CliError> {
    let data = args.source.load(args.seed)?;
    let disc = args.discretization.into();
    let mut rc = RunConfig::new("benchmark", args.source.source(), args.seed, args.out_dir.clone());
    rc.methods = args.methods.clone();
    rc.n_t = args.nt.clone();
    rc.repeats = Some(args.repeats);
    rc.n_features = args.n_features;
    rc.discretization = args.n_features.map(|_| disc);
    rc.options = json!({
        "fit": args.fit.to_json(),
        "selection": SelectionScope::from(args.selection),
        "n_bins": args.n_bins,
        "normalization": NormalizationMode::from(args.normalization),
        "original_units": args.original_units,
        "indicator": args.indicator,
        "loo": args.loo,
    });
    let config = ExperimentConfig {
        methods: args.methods.clone(),
        n_t: args.nt.clone(),
        repeats: args.repeats,
        seed: args.seed,
        fit: args.fit.config(args.seed),
        imputation: args.fit.imputation.mode(args.seed),
        indicator: args.indicator.clone(),
        feature_selection: args.n_features.map(|n| FeatureSelection {
            n_features: n,
            n_bins: args.n_bins,
            method: disc,
            scope: args.selection.into(),
        }),
        normalization: args.normalization.into(),
        original_units: args.original_units,
    };
    let mut report = run_experiment(&data, &config, args.jobs)?;
    report.metadata.run_config = Some(rc.to_value());
    write_text(&args.out_dir.join("report.json"), &report.to_json()?)?;
    let mut w = create(&args.out_dir.join("summary.csv"))?;
    report.write_summary_csv(&mut w)?;
    w.flush()?;

    if args.loo {
        let mut loo = loo_report(&data, &config, args.jobs)?;
        loo.report.metadata.run_config = Some(rc.to_value());
        let mut w = create(&args.out_dir.join("loo.csv"))?;
        rc.write_preamble(&mut w, &data.content_hash())?;
        loo.write_points_csv(&mut w)?;
        w.flush()?;
        for m in &config.methods {
            if let Some(c) = loo.coverage(*m) {
                println!("{m}: leave-one-out 2-sigma coverage {:.3}", c);
            }
        }
    }

    for cell in &report.cells {
        match cell.mean_rmse {
            Some(m) => println!(
                "{:<8} N_t={:<3} rmse {:.5} +- {:.5} ({} failed)",
                cell.method.name(),
                cell.n_t,
                m,
                cell.std_rmse.unwrap_or(0.0),
                cell.n_failures
            ),
            None => println!("{:<8} N_t={:<3} every repeat failed", cell.method.name(), cell.n_t),
        }
    }
    if report.cells.iter().all(|c| c.mean_rmse.is_none()) {
        let first = report.cells.iter().flat_map(|c| &c.outcomes).find_map(|o| o.error.clone());
        return Err(CliError::NoSuccessfulFit(first.unwrap_or_default()));
    }
    Ok(())
}

pub fn cmd_make_synthetic(args: &SyntheticArgs) -> Result<()> {
    let task = SyntheticTask::by_name(&args.task)?.with_noise(args.noise_low, args.noise_high);
    let levels = make_synthetic(&task, args.n_low, args.n_high, args.seed)?;
    let ds = Dataset::from_levels(&levels, vec!["x".into()])?;
    let mut rc = RunConfig::new(
        "make-synthetic",
        Source::Synthetic { task: task.name.clone(), n_low: args.n_low, n_test: 0 },
        args.seed,
        args.out.clone(),
    );
    rc.options = json!({ "n_high": args.n_high, "noise_sd": [args.noise_low, args.noise_high] });
    let mut w = create(&args.out)?;
    rc.write_preamble(&mut w, &ds.content_hash())?;
    mfgp_core::data::write_csv(&ds, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn cmd_pca(args: &PcaArgs) -> Result<()> {
    let data = args.source.load(args.seed)?;
    let ds = match args.no_normalize {
        true => data.dataset.clone(),
        false => apply_normalize(&data.dataset, &fit_normalize(&data.dataset, &NormalizationReference::AllRows)?)?,
    };
    let pca = pca_project(&ds.x, args.components)?;
    let mut rc = RunConfig::new("pca", args.source.source(), args.seed, args.out_dir.clone());
    rc.options = json!({ "components": args.components, "normalize": !args.no_normalize });
    let hash = data.content_hash();

    let labels: Vec<String> = ds.fidelity.iter().map(|t| ds.level_labels[t - 1].clone()).collect();
    let mut w = create(&args.out_dir.join("pca.csv"))?;
    rc.write_preamble(&mut w, &hash)?;
    pca.write_csv(&mut w, &data.dataset.y, &labels)?;
    w.flush()?;
    let summary = json!({
        "toolkit_version": env!("CARGO_PKG_VERSION"),
        "run_config": rc.to_value(),
        "input_sha256": hash,
        "feature_names": ds.feature_names,
        "explained_ratio": pca.explained_ratio,
        "components": pca.components,
        "mean": pca.mean,
    });
    write_text(&args.out_dir.join("pca.json"), &serde_json::to_string_pretty(&summary)?)?;
    for (i, r) in pca.explained_ratio.iter().enumerate() {
        println!("pc{}: {:.4}", i + 1, r);
    }
    Ok(())
}
