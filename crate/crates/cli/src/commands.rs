use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use tire::datagen::{self, usable_change_points};
use tire::export::{read_detections_csv, write_corpus_csv, write_curve_csv, write_detections_csv, write_roc_csv, CURVE_HEADER};
use tire::{corpus_auc, fit_features, roc_auc, score_features, Family, PipelineOutput, RocCurve, ScoreCurve, Settings, TimeSeries};

use crate::config::{Layer, Resolved};
use crate::error::CliError;
use crate::{plot, Common, CorpusArgs, DetectArgs, EvaluateArgs, GenerateArgs, SweepArgs};

fn parse_family(s: &str) -> Result<Family, CliError> {
    s.parse().map_err(|e: tire::Error| CliError::Usage(e.to_string()))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Data(format!("cannot create {}: {e}", dir.display())))
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "series".into())
}

pub fn generate(a: &GenerateArgs) -> Result<(), CliError> {
    let family = parse_family(&a.family)?;
    ensure_dir(&a.out)?;
    let mut manifest = create(&a.out.join("manifest.csv"))?;
    if a.no_timestamp {
        writeln!(manifest, "file,family,seed,length,change_points")?;
    } else {
        writeln!(manifest, "file,family,seed,length,change_points,created")?;
    }
    let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    for i in 0..a.count as u64 {
        let seed = a.seed + i;
        let ts = datagen::generate(family, seed)?;
        let name = format!("{family}_s{seed}.csv");
        let mut w = create(&a.out.join(&name))?;
        ts.write_csv(&mut w)?;
        w.flush()?;
        write!(manifest, "{name},{family},{seed},{},{}", ts.len(), ts.change_points().len())?;
        if a.no_timestamp {
            writeln!(manifest)?;
        } else {
            writeln!(manifest, ",{created}")?;
        }
    }
    manifest.flush()?;
    println!("wrote {} {family} series to {}", a.count, a.out.display());
    Ok(())
}

/// Resolved configuration of a pipeline command.
struct Run {
    resolved: Resolved,
    family: Option<Family>,
}

impl Run {
    fn new(common: &Common) -> Result<Self, CliError> {
        let family = common.family.as_deref().map(parse_family).transpose()?;
        Self::with_flags(common, common.flag_layer(), family)
    }

    fn with_flags(common: &Common, flags: Layer, family: Option<Family>) -> Result<Self, CliError> {
        let file = common.config.as_deref().map(Layer::parse_file).transpose()?;
        let resolved = Resolved::build(&flags, file.as_ref(), family)?;
        Ok(Self { resolved, family })
    }

    fn out_dir(&self) -> PathBuf {
        self.resolved.path("out").unwrap_or_else(|| PathBuf::from("tire-out"))
    }

    fn explain(&self) {
        print!("{}", self.resolved.explain());
    }
}

fn read_series(path: &Path) -> Result<TimeSeries, CliError> {
    TimeSeries::from_csv_path(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Ground truth from a series CSV (`is_cp` column) or a list with column `t`.
fn read_truth(path: &Path) -> Result<Vec<usize>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let header = text.lines().next().unwrap_or("").trim();
    let gt = if header == "t" {
        read_detections_csv(&text)?
    } else {
        TimeSeries::read_csv(text.as_bytes())?.change_points().to_vec()
    };
    if gt.is_empty() {
        return Err(CliError::Data(format!("{}: no ground truth", path.display())));
    }
    Ok(gt)
}

fn restrict(gt: &[usize], lo: usize, hi: usize) -> Vec<usize> {
    gt.iter().copied().filter(|&t| t >= lo && t <= hi).collect()
}

fn run_series(ts: &TimeSeries, settings: &Settings) -> Result<(tire::FittedFeatures, PipelineOutput), CliError> {
    let features = fit_features(ts, settings)?;
    let out = score_features(&features, settings)?;
    Ok((features, out))
}

fn write_outputs(dir: &Path, name: &str, out: &PipelineOutput, truth: &[usize], plot_svg: bool) -> Result<(), CliError> {
    let mut w = create(&dir.join(format!("{name}_curve.csv")))?;
    write_curve_csv(&mut w, out)?;
    w.flush()?;
    let mut w = create(&dir.join(format!("{name}_detections.csv")))?;
    write_detections_csv(&mut w, &out.alarms)?;
    w.flush()?;
    if plot_svg {
        fs::write(dir.join(format!("{name}.svg")), plot::render(out, truth))?;
    }
    Ok(())
}

pub fn detect(a: &DetectArgs) -> Result<(), CliError> {
    let run = Run::new(&a.common)?;
    if a.common.explain_config {
        run.explain();
        return Ok(());
    }
    let settings = run.resolved.settings()?;
    let ts = read_series(&a.input)?;
    let truth = match run.resolved.path("truth") {
        Some(p) => read_truth(&p)?,
        None => ts.change_points().to_vec(),
    };
    let dir = run.out_dir();
    ensure_dir(&dir)?;
    let name = stem(&a.input);
    let (features, out) = run_series(&ts, &settings)?;
    write_outputs(&dir, &name, &out, &truth, a.common.plot)?;
    if a.save_models {
        for (suffix, model) in [("td", &features.td_model), ("fd", &features.fd_model)] {
            if let Some(m) = model {
                m.save(dir.join(format!("{name}_{suffix}.model")))?;
            }
        }
    }
    println!(
        "{name}: alpha {} beta {}, {} alarms above tau {}",
        out.alpha,
        out.beta,
        out.alarms.len(),
        settings.tau
    );
    let gt = usable_change_points(&ts.with_change_points(truth)?, settings.window);
    if let (Some(delta), false) = (run.resolved.delta_opt()?, gt.is_empty()) {
        let roc = roc_auc(&out.scores, &gt, delta)?;
        println!("{name}: AUC {:.4} (delta {delta})", roc.auc);
    }
    Ok(())
}

enum Input {
    Series(TimeSeries),
    Scores(ScoreCurve),
    Detections(Vec<usize>),
}

fn classify(path: &Path) -> Result<Input, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let header = text.lines().next().unwrap_or("").trim();
    if header == CURVE_HEADER {
        let mut times = Vec::new();
        let mut scores = Vec::new();
        for (i, line) in text.lines().enumerate().skip(1) {
            let cols: Vec<&str> = line.split(',').collect();
            let bad = || CliError::Data(format!("{}:{}: malformed curve row", path.display(), i + 1));
            if cols.len() != 5 {
                return Err(bad());
            }
            times.push(cols[0].parse::<usize>().map_err(|_| bad())?);
            scores.push(cols[3].parse::<f64>().map_err(|_| bad())?);
        }
        let first = *times.first().ok_or_else(|| CliError::Data(format!("{}: empty curve", path.display())))?;
        if times.iter().enumerate().any(|(i, &t)| t != first + i) {
            return Err(CliError::Data(format!("{}: curve time stamps are not consecutive", path.display())));
        }
        Ok(Input::Scores(ScoreCurve::new(first, scores)))
    } else if header == "t" {
        Ok(Input::Detections(read_detections_csv(&text)?))
    } else {
        Ok(Input::Series(TimeSeries::read_csv(text.as_bytes()).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?))
    }
}

struct Evaluated {
    name: String,
    roc: RocCurve,
}

/// Named inputs of a corpus command: the given files or a generated corpus.
fn corpus_inputs(c: &CorpusArgs, family: Option<Family>) -> Result<Vec<(String, Input)>, CliError> {
    if !c.inputs.is_empty() {
        return c.inputs.iter().map(|p| Ok((stem(p), classify(p)?))).collect();
    }
    let family = family.ok_or_else(|| CliError::Usage("give input files or --family to generate a corpus".into()))?;
    (0..c.count as u64)
        .map(|i| {
            let seed = c.data_seed + i;
            Ok((format!("{family}_s{seed}"), Input::Series(datagen::generate(family, seed)?)))
        })
        .collect()
}

fn evaluate_inputs(
    inputs: &[(String, Input)],
    run: &Run,
    settings: Option<&Settings>,
    outputs: Option<(&Path, bool)>,
) -> Result<Vec<Evaluated>, CliError> {
    let delta = run.resolved.delta()?;
    let shared_truth = run.resolved.path("truth").map(|p| read_truth(&p)).transpose()?;
    let mut results = Vec::new();
    for (name, input) in inputs {
        let need_truth = || {
            shared_truth
                .clone()
                .ok_or_else(|| CliError::Data(format!("{name}: no ground truth (pass --truth)")))
        };
        let (scores, gt) = match input {
            Input::Series(ts) => {
                let settings = settings.ok_or_else(|| CliError::Usage("series input needs a window size".into()))?;
                let (_, out) = run_series(ts, settings)?;
                let truth = match &shared_truth {
                    Some(t) => t.clone(),
                    None => ts.change_points().to_vec(),
                };
                if let Some((dir, plot_svg)) = outputs {
                    write_outputs(dir, name, &out, &truth, plot_svg)?;
                }
                let gt = usable_change_points(&ts.with_change_points(truth)?, settings.window);
                (out.scores, gt)
            }
            Input::Scores(scores) => {
                let hi = scores.first_time() + scores.len().saturating_sub(1);
                let gt = restrict(&need_truth()?, scores.first_time(), hi);
                (scores.clone(), gt)
            }
            Input::Detections(alarms) => {
                let last = alarms.iter().copied().max().unwrap_or(1);
                let mut values = vec![0.0; last];
                for &t in alarms {
                    if t == 0 {
                        return Err(CliError::Data(format!("{name}: time stamps start at 1")));
                    }
                    values[t - 1] = 1.0;
                }
                (ScoreCurve::new(1, values), need_truth()?)
            }
        };
        if gt.is_empty() {
            return Err(CliError::Data(format!("{name}: no ground truth inside the scored range")));
        }
        let roc = roc_auc(&scores, &gt, delta)?;
        results.push(Evaluated { name: name.clone(), roc });
    }
    Ok(results)
}

pub fn evaluate(a: &EvaluateArgs) -> Result<(), CliError> {
    let run = Run::new(&a.common)?;
    if a.common.explain_config {
        run.explain();
        return Ok(());
    }
    let inputs = corpus_inputs(&a.corpus, run.family)?;
    let needs_settings = inputs.iter().any(|(_, i)| matches!(i, Input::Series(_)));
    let settings = if needs_settings { Some(run.resolved.settings()?) } else { None };
    let dir = run.out_dir();
    ensure_dir(&dir)?;
    let results = evaluate_inputs(&inputs, &run, settings.as_ref(), Some((&dir, a.common.plot)))?;
    for r in &results {
        let mut w = create(&dir.join(format!("{}_roc.csv", r.name)))?;
        write_roc_csv(&mut w, &r.roc)?;
        w.flush()?;
        println!("{}: AUC {:.4}", r.name, r.roc.auc);
    }
    let names: Vec<String> = results.iter().map(|r| r.name.clone()).collect();
    let aucs: Vec<f64> = results.iter().map(|r| r.roc.auc).collect();
    let summary = corpus_auc(&aucs)?;
    let mut w = create(&dir.join("summary.csv"))?;
    write_corpus_csv(&mut w, &names, &aucs, &summary)?;
    w.flush()?;
    println!("mean AUC {:.4} ± {:.4} ({} series)", summary.mean, summary.std_error, summary.count);
    Ok(())
}

/// Window multipliers of the default window sweep.
pub const WINDOW_MULTIPLIERS: [f64; 9] = [
    0.25,
    0.353_553_390_593_273_8,
    0.5,
    std::f64::consts::FRAC_1_SQRT_2,
    1.0,
    std::f64::consts::SQRT_2,
    2.0,
    2.828_427_124_746_190_3,
    4.0,
];

fn default_grid(parameter: &str, base_window: Option<usize>) -> Result<Vec<String>, CliError> {
    Ok(match parameter {
        "window" => {
            let n = base_window.ok_or_else(|| CliError::Usage("window sweep needs a base --window".into()))? as f64;
            let mut grid: Vec<usize> = WINDOW_MULTIPLIERS.iter().map(|m| ((m * n).round() as usize).max(2)).collect();
            grid.dedup();
            grid.iter().map(ToString::to_string).collect()
        }
        "h_td" | "h_fd" => (1..=5).map(|v| v.to_string()).collect(),
        "K" => (1..=10).map(|v| v.to_string()).collect(),
        "lambda" => ["0", "0.25", "0.5", "1", "2", "4"].iter().map(|v| v.to_string()).collect(),
        other => {
            return Err(CliError::Usage(format!(
                "unknown sweep parameter '{other}' (expected window, h_td, h_fd, K or lambda)"
            )))
        }
    })
}

/// Flag overrides for one sweep value; latent sweeps keep `s = max(h − 1, 1)`.
fn sweep_flags(base: &Layer, parameter: &str, value: &str) -> Result<Layer, CliError> {
    let mut flags = base.clone();
    match parameter {
        "window" => flags.set("window", value),
        "K" => flags.set("K", value),
        "lambda" => {
            flags.set("lambda_td", value);
            flags.set("lambda_fd", value);
        }
        "h_td" | "h_fd" => {
            let h: usize = value
                .parse()
                .map_err(|_| CliError::Usage(format!("invalid latent dimension '{value}'")))?;
            let domain = &parameter[2..];
            flags.set(&format!("h_{domain}"), h);
            flags.set(&format!("s_{domain}"), h.saturating_sub(1).max(1));
        }
        _ => unreachable!("grid validated the parameter"),
    }
    Ok(flags)
}

pub fn sweep(a: &SweepArgs) -> Result<(), CliError> {
    let base_run = Run::new(&a.common)?;
    let values = match &a.values {
        Some(list) => list.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect(),
        None => default_grid(&a.parameter, base_run.resolved.raw("window").and_then(|w| w.parse().ok()))?,
    };
    default_grid(&a.parameter, Some(1))?;
    if values.is_empty() {
        return Err(CliError::Usage("no sweep values".into()));
    }
    if a.common.explain_config {
        base_run.explain();
        return Ok(());
    }
    let inputs = corpus_inputs(&a.corpus, base_run.family)?;
    let dir = base_run.out_dir();
    ensure_dir(&dir)?;
    let mut w = create(&dir.join(format!("sweep_{}.csv", a.parameter)))?;
    writeln!(w, "value,mean_auc,se")?;
    let base_flags = a.common.flag_layer();
    for value in &values {
        let flags = sweep_flags(&base_flags, &a.parameter, value)?;
        let run = Run::with_flags(&a.common, flags, base_run.family)?;
        let settings = run.resolved.settings()?;
        let results = evaluate_inputs(&inputs, &run, Some(&settings), None)?;
        let aucs: Vec<f64> = results.iter().map(|r| r.roc.auc).collect();
        let summary = corpus_auc(&aucs)?;
        writeln!(w, "{value},{},{}", summary.mean, summary.std_error)?;
        println!(
            "{} = {value}: mean AUC {:.4} ± {:.4} ({} series)",
            a.parameter, summary.mean, summary.std_error, summary.count
        );
    }
    w.flush()?;
    Ok(())
}
