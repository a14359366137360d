use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use fpcal::data::{
    filter_isbsg, perturbed_weights, read_components, read_csv, read_matrices, read_weights,
    synthesize, write_csv, write_weights, ProjectRecord, SynthConfig,
};
use fpcal::fuzzy::{build_system, sweep};
use fpcal::validation::PRED_LEVELS;
use fpcal::{
    calibrate, classify, count_project, diagnostics, fit, fuzzy_ufp, run_experiments, ufp,
    ComplexityLevel, ComponentInstance, ComponentKind, EffortModel, ExperimentPlan, FuzzySystemSet,
    MatrixSet, RegressionDiagnostics, TrainingConfig, UfpBreakdown, WeightTable,
};
use serde::Serialize;
use serde_json::json;

use crate::args::{
    CalibrateArgs, Cli, Command, DataArgs, EstimateArgs, FilterArgs, FitArgs, Format,
    FuzzyWeightArgs, SynthArgs, ValidateArgs,
};
use crate::manifest::{digest, InputDigest};
use crate::render;
use crate::CliError;

/// Everything a command produces, held in memory until it has succeeded.
pub struct Outcome {
    pub primary: Vec<u8>,
    pub extras: Vec<(PathBuf, Vec<u8>)>,
    pub config: serde_json::Value,
    pub inputs: Vec<InputDigest>,
}

#[derive(Default)]
struct Inputs(Vec<InputDigest>);

impl Inputs {
    fn read(&mut self, role: &str, path: &Path) -> Result<Vec<u8>, CliError> {
        let bytes =
            std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
        self.0.push(digest(role, path, &bytes));
        Ok(bytes)
    }

    fn weights(&mut self, choice: &str) -> Result<WeightTable, CliError> {
        if choice.eq_ignore_ascii_case("original") {
            return Ok(WeightTable::ORIGINAL);
        }
        let path = Path::new(choice);
        let bytes = self.read("weights", path)?;
        read_weights(bytes.as_slice())
            .with_context(|| format!("invalid weight file {}", path.display()))
            .map_err(Into::into)
    }

    fn matrices(&mut self, path: Option<&Path>) -> Result<MatrixSet, CliError> {
        let Some(path) = path else {
            return Ok(MatrixSet::default());
        };
        let bytes = self.read("matrices", path)?;
        read_matrices(bytes.as_slice())
            .with_context(|| format!("invalid matrix file {}", path.display()))
            .map_err(Into::into)
    }

    fn records(&mut self, path: &Path) -> Result<Vec<ProjectRecord>, CliError> {
        let bytes = self.read("data", path)?;
        let outcome = read_csv(bytes.as_slice(), path)?;
        for r in &outcome.rejects {
            eprintln!(
                "warning: {}:{}: rejected row{}: {}",
                path.display(),
                r.line,
                r.id.as_deref()
                    .map(|id| format!(" {id}"))
                    .unwrap_or_default(),
                r.reason
            );
        }
        Ok(outcome.records)
    }

    fn dataset(&mut self, args: &DataArgs) -> Result<Vec<ProjectRecord>, CliError> {
        let mut records = self.records(&args.data)?;
        if args.isbsg_filter {
            let before = records.len();
            records = filter_isbsg(&records);
            eprintln!("filter kept {} of {before} records", records.len());
        }
        if records.is_empty() {
            return Err(anyhow!("{} has no usable records", args.data.display()).into());
        }
        Ok(records)
    }

    fn model(&mut self, path: &Path) -> Result<EffortModel, CliError> {
        let bytes = self.read("model", path)?;
        let value: serde_json::Value = serde_json::from_slice(&bytes)
            .with_context(|| format!("invalid model file {}", path.display()))?;
        let inner = value.get("model").cloned().unwrap_or(value);
        let m: EffortModel = serde_json::from_value(inner)
            .with_context(|| format!("{} has no model {{a, b}}", path.display()))?;
        Ok(EffortModel::new(m.a, m.b)?)
    }
}

fn kind_arg(s: &str) -> Result<ComponentKind, CliError> {
    s.parse()
        .map_err(|e: fpcal::Error| CliError::Usage(e.to_string()))
}

fn training(args: &crate::args::TrainingArgs, seed: u64) -> Result<TrainingConfig, CliError> {
    let cfg = args.to_config(seed);
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(cfg)
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>, CliError> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.into_inner()
        .map_err(|e| anyhow!("csv buffer: {e}").into())
}

/// `(ufp, effort)` for every record under `weights`.
fn size_effort(
    records: &[ProjectRecord],
    weights: &WeightTable,
) -> Result<Vec<(f64, f64)>, CliError> {
    records
        .iter()
        .map(|r| Ok((ufp(r.breakdown()?, weights), r.effort()?)))
        .collect()
}

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    let mut inputs = Inputs::default();
    let (primary, extras, config) = match &cli.command {
        Command::Synth(a) => synth(cli, a, &mut inputs)?,
        Command::Filter(a) => filter(a, &mut inputs)?,
        Command::Fit(a) => fit_cmd(cli, a, &mut inputs)?,
        Command::Calibrate(a) => calibrate_cmd(cli, a, &mut inputs)?,
        Command::Validate(a) => validate(cli, a, &mut inputs)?,
        Command::Estimate(a) => estimate(cli, a, &mut inputs)?,
        Command::FuzzyWeight(a) => fuzzy_weight(cli, a, &mut inputs)?,
    };
    Ok(Outcome {
        primary,
        extras,
        config,
        inputs: inputs.0,
    })
}

type Produced = (Vec<u8>, Vec<(PathBuf, Vec<u8>)>, serde_json::Value);

fn synth(cli: &Cli, a: &SynthArgs, inputs: &mut Inputs) -> Result<Produced, CliError> {
    if a.count_min > a.count_max {
        return Err(CliError::Usage(format!(
            "--count-min {} exceeds --count-max {}",
            a.count_min, a.count_max
        )));
    }
    if !(0.0..1.0).contains(&a.perturb) {
        return Err(CliError::Usage(format!(
            "--perturb must be in [0, 1), got {}",
            a.perturb
        )));
    }
    let base = inputs.weights(&a.weights.weights)?;
    let true_weights = if a.perturb > 0.0 {
        perturbed_weights(&base, a.perturb, cli.seed)?
    } else {
        base
    };
    let config = SynthConfig {
        n_projects: a.n,
        true_weights,
        true_a: a.a,
        true_b: a.b,
        noise_sigma: a.noise,
        count_ranges: [[(a.count_min, a.count_max); 3]; 5],
        seed: cli.seed,
    };
    let records = synthesize(&config).map_err(|e| match e {
        fpcal::Error::Config(m) => CliError::Usage(m),
        other => other.into(),
    })?;
    let mut primary = Vec::new();
    write_csv(&mut primary, &records)?;
    let mut extras = Vec::new();
    if let Some(path) = &a.true_weights_out {
        let mut buf = Vec::new();
        write_weights(&mut buf, &true_weights)?;
        extras.push((path.clone(), buf));
    }
    Ok((
        primary,
        extras,
        json!({ "args": a, "synth_config": config }),
    ))
}

fn filter(a: &FilterArgs, inputs: &mut Inputs) -> Result<Produced, CliError> {
    let records = inputs.records(&a.data)?;
    let kept = filter_isbsg(&records);
    eprintln!("filter kept {} of {} records", kept.len(), records.len());
    let mut primary = Vec::new();
    write_csv(&mut primary, &kept)?;
    Ok((primary, Vec::new(), json!({ "args": a })))
}

#[derive(Debug, Serialize)]
pub struct FitReport {
    pub model: EffortModel,
    pub diagnostics: RegressionDiagnostics,
    pub n_records: usize,
    pub weights: WeightTable,
}

fn fit_cmd(cli: &Cli, a: &FitArgs, inputs: &mut Inputs) -> Result<Produced, CliError> {
    let weights = inputs.weights(&a.weights.weights)?;
    let records = inputs.dataset(&a.data)?;
    let points = size_effort(&records, &weights)?;
    let model = fit(&points)?;
    let report = FitReport {
        model,
        diagnostics: diagnostics(&model, &points)?,
        n_records: records.len(),
        weights,
    };
    let primary = if cli.pretty {
        render::fit(&report).into_bytes()
    } else {
        json_bytes(&report)?
    };
    Ok((primary, Vec::new(), json!({ "args": a })))
}

/// One component row of a weight comparison table.
#[derive(Debug, Serialize)]
pub struct WeightRow {
    pub component: &'static str,
    pub low_original: f64,
    pub low_calibrated: f64,
    pub average_original: f64,
    pub average_calibrated: f64,
    pub high_original: f64,
    pub high_calibrated: f64,
}

pub fn weight_rows(original: &WeightTable, calibrated: &WeightTable) -> Vec<WeightRow> {
    ComponentKind::ALL
        .iter()
        .map(|&k| {
            let (o, c) = (original.row(k), calibrated.row(k));
            WeightRow {
                component: k.code(),
                low_original: o[0],
                low_calibrated: c[0],
                average_original: o[1],
                average_calibrated: c[1],
                high_original: o[2],
                high_calibrated: c[2],
            }
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct CalibrateReport {
    pub model: EffortModel,
    pub start_weights: WeightTable,
    pub weights: WeightTable,
    pub table: Vec<WeightRow>,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub epochs_run: usize,
    pub converged: bool,
    pub excluded_outliers: Vec<String>,
    pub loss_history: Vec<f64>,
}

#[derive(Serialize)]
struct LossRow {
    epoch: usize,
    loss: f64,
}

fn calibrate_cmd(cli: &Cli, a: &CalibrateArgs, inputs: &mut Inputs) -> Result<Produced, CliError> {
    let config = training(&a.training, cli.seed)?;
    let start = inputs.weights(&a.weights.weights)?;
    let records = inputs.dataset(&a.data)?;
    let model = match &a.model {
        Some(path) => inputs.model(path)?,
        None => fit(&size_effort(&records, &start)?)?,
    };
    let result = calibrate(&records, &model, &start, &config)?;
    let report = CalibrateReport {
        model,
        start_weights: start,
        weights: result.weights,
        table: weight_rows(&start, &result.weights),
        initial_loss: result.initial_loss(),
        final_loss: result.final_loss(),
        epochs_run: result.epochs_run,
        converged: result.converged,
        excluded_outliers: result.excluded_outliers.clone(),
        loss_history: result.loss_history.clone(),
    };
    let primary = match (cli.pretty, a.format) {
        (true, _) => render::calibration(&report).into_bytes(),
        (false, Format::Json) => json_bytes(&report)?,
        (false, Format::Csv) => csv_bytes(&report.table)?,
    };
    let mut extras = Vec::new();
    if let Some(path) = &a.weights_out {
        let mut buf = Vec::new();
        write_weights(&mut buf, &report.weights)?;
        extras.push((path.clone(), buf));
    }
    if let Some(path) = &a.history_out {
        let rows: Vec<LossRow> = report
            .loss_history
            .iter()
            .enumerate()
            .map(|(epoch, &loss)| LossRow { epoch, loss })
            .collect();
        extras.push((path.clone(), csv_bytes(&rows)?));
    }
    Ok((primary, extras, json!({ "args": a, "training": config })))
}

#[derive(Serialize)]
struct MmreRow {
    experiment: String,
    mmre_original: f64,
    mmre_calibrated: f64,
    improvement_pct: f64,
    improvement_pct_rounded: i64,
}

#[derive(Serialize)]
struct PredCsvRow {
    pred: String,
    original: f64,
    calibrated: f64,
    change_points: f64,
}

fn validate(cli: &Cli, a: &ValidateArgs, inputs: &mut Inputs) -> Result<Produced, CliError> {
    let config = training(&a.training, cli.seed)?;
    if a.experiments == 0 {
        return Err(CliError::Usage("--experiments must be at least 1".into()));
    }
    let start = inputs.weights(&a.weights.weights)?;
    let records = inputs.dataset(&a.data)?;
    let plan = ExperimentPlan {
        n_experiments: a.experiments,
        train_size: a.train_size,
        parallel: a.parallel,
    };
    let report = run_experiments(&records, &plan, &start, &config)?;
    let primary = if cli.pretty {
        render::validation(&report).into_bytes()
    } else {
        json_bytes(&report)?
    };

    let mut extras = Vec::new();
    if let Some(path) = &a.mmre_csv {
        let mut rows: Vec<MmreRow> = report
            .experiments
            .iter()
            .map(|e| MmreRow {
                experiment: e.experiment_index.to_string(),
                mmre_original: e.mmre_original,
                mmre_calibrated: e.mmre_calibrated,
                improvement_pct: e.improvement_pct,
                improvement_pct_rounded: e.improvement_pct_rounded,
            })
            .collect();
        let avg = &report.average;
        rows.push(MmreRow {
            experiment: "average".into(),
            mmre_original: avg.mmre_original,
            mmre_calibrated: avg.mmre_calibrated,
            improvement_pct: avg.improvement_pct,
            improvement_pct_rounded: avg.improvement_pct_rounded,
        });
        extras.push((path.clone(), csv_bytes(&rows)?));
    }
    if let Some(path) = &a.pred_csv {
        let rows: Vec<PredCsvRow> = report
            .average
            .pred
            .iter()
            .map(|r| PredCsvRow {
                pred: format!("PRED({})", r.p),
                original: r.original,
                calibrated: r.calibrated,
                change_points: (r.calibrated - r.original) * 100.0,
            })
            .collect();
        extras.push((path.clone(), csv_bytes(&rows)?));
    }
    debug_assert_eq!(report.average.pred.len(), PRED_LEVELS.len());
    Ok((primary, extras, json!({ "args": a, "training": config })))
}

#[derive(Debug, Serialize)]
pub struct ComponentEstimate {
    pub kind: ComponentKind,
    pub det: u32,
    pub records: u32,
    pub level: ComplexityLevel,
    pub weight: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fuzzy_weight: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct ProjectEstimate {
    pub breakdown: UfpBreakdown,
    pub ufp: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effort: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fuzzy_ufp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fuzzy_effort: Option<f64>,
}

/// Parses `ei_low=3,ilf_avg=2`; unnamed cells are zero.
fn parse_breakdown(s: &str) -> Result<UfpBreakdown, CliError> {
    let mut b = UfpBreakdown::default();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let bad = || {
            CliError::Usage(format!(
                "bad breakdown entry '{item}', expected e.g. ei_low=3"
            ))
        };
        let (cell, n) = item.split_once('=').ok_or_else(bad)?;
        let (kind, level) = cell.trim().split_once('_').ok_or_else(bad)?;
        let kind: ComponentKind = kind.parse().map_err(|_| bad())?;
        let level: ComplexityLevel = level.parse().map_err(|_| bad())?;
        let n: u32 = n.trim().parse().map_err(|_| bad())?;
        b.set(kind, level, n);
    }
    Ok(b)
}

fn estimate(cli: &Cli, a: &EstimateArgs, inputs: &mut Inputs) -> Result<Produced, CliError> {
    if !(0.0..=1.0).contains(&a.overlap) {
        return Err(CliError::Usage(format!(
            "--overlap must be in [0, 1], got {}",
            a.overlap
        )));
    }
    let weights = inputs.weights(&a.weights.weights)?;
    let matrices = inputs.matrices(a.matrices.as_deref())?;
    let model = match (&a.model, a.a, a.b) {
        (Some(path), _, _) => Some(inputs.model(path)?),
        (None, Some(ca), Some(cb)) => {
            Some(EffortModel::new(ca, cb).map_err(|e| CliError::Usage(e.to_string()))?)
        }
        _ => None,
    };
    let config = json!({ "args": a });

    if let Some(kind) = &a.kind {
        let kind = kind_arg(kind)?;
        let c = ComponentInstance::new(kind, a.det.unwrap_or(0), a.records.unwrap_or(0));
        c.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        let level = classify(&c, matrices.get(kind))?;
        let fuzzy_weight = if a.fuzzy {
            Some(build_system(kind, matrices.get(kind), &weights, a.overlap)?.infer_component(&c)?)
        } else {
            None
        };
        let est = ComponentEstimate {
            kind,
            det: c.det,
            records: c.records,
            level,
            weight: weights.get(kind, level),
            fuzzy_weight,
        };
        let primary = if cli.pretty {
            render::component(&est).into_bytes()
        } else {
            json_bytes(&est)?
        };
        return Ok((primary, Vec::new(), config));
    }

    let (breakdown, fuzzy_size) = if let Some(text) = &a.breakdown {
        if a.fuzzy {
            return Err(CliError::Usage(
                "--fuzzy needs component detail; use --kind or --components".into(),
            ));
        }
        (parse_breakdown(text)?, None)
    } else if let Some(path) = &a.components {
        let bytes = inputs.read("components", path)?;
        let components = read_components(bytes.as_slice())
            .with_context(|| format!("invalid component file {}", path.display()))?;
        let fuzzy_size = if a.fuzzy {
            let systems = FuzzySystemSet::build(
                &matrices,
                &weights,
                fpcal::fuzzy::FuzzyOptions {
                    overlap: a.overlap,
                    ..Default::default()
                },
            )?;
            Some(fuzzy_ufp(&components, &systems)?)
        } else {
            None
        };
        (count_project(&components, &matrices)?, fuzzy_size)
    } else {
        return Err(CliError::Usage(
            "one of --kind, --breakdown or --components is required".into(),
        ));
    };

    let size = ufp(&breakdown, &weights);
    let predict = |s: f64| -> Result<Option<f64>, CliError> {
        match &model {
            Some(m) => Ok(Some(m.predict(s)?)),
            None => Ok(None),
        }
    };
    let est = ProjectEstimate {
        breakdown,
        ufp: size,
        effort: predict(size)?,
        fuzzy_ufp: fuzzy_size,
        fuzzy_effort: match fuzzy_size {
            Some(s) => predict(s)?,
            None => None,
        },
    };
    let primary = if cli.pretty {
        render::project(&est).into_bytes()
    } else {
        json_bytes(&est)?
    };
    Ok((primary, Vec::new(), config))
}

#[derive(Debug, Serialize)]
pub struct FuzzyPoint {
    pub kind: ComponentKind,
    pub det: f64,
    pub records: f64,
    /// Crisp classification of the counts rounded to the nearest integer.
    pub crisp_level: ComplexityLevel,
    pub crisp_weight: f64,
    pub fuzzy_weight: f64,
}

fn fuzzy_weight(cli: &Cli, a: &FuzzyWeightArgs, inputs: &mut Inputs) -> Result<Produced, CliError> {
    if !(0.0..=1.0).contains(&a.overlap) {
        return Err(CliError::Usage(format!(
            "--overlap must be in [0, 1], got {}",
            a.overlap
        )));
    }
    let kind = kind_arg(&a.kind)?;
    let weights = inputs.weights(&a.weights.weights)?;
    let matrices = inputs.matrices(a.matrices.as_deref())?;
    let system = build_system(kind, matrices.get(kind), &weights, a.overlap)?;
    let config = json!({ "args": a });

    if a.sweep {
        let surface = sweep(&system, a.det_range, a.records_range, a.step)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        return Ok((csv_bytes(&surface)?, Vec::new(), config));
    }

    let (det, records) = (a.det.unwrap_or(0.0), a.records.unwrap_or(0.0));
    if !(det >= 1.0 && records >= 1.0 && det.is_finite() && records.is_finite()) {
        return Err(CliError::Usage(format!(
            "--det and --records must be at least 1, got {det} and {records}"
        )));
    }
    let rounded = ComponentInstance::new(kind, det.round() as u32, records.round() as u32);
    let crisp_level = classify(&rounded, matrices.get(kind))?;
    let point = FuzzyPoint {
        kind,
        det,
        records,
        crisp_level,
        crisp_weight: weights.get(kind, crisp_level),
        fuzzy_weight: system.infer_weight(det, records)?,
    };
    let primary = if cli.pretty {
        render::fuzzy_point(&point).into_bytes()
    } else {
        json_bytes(&point)?
    };
    Ok((primary, Vec::new(), config))
}
