use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use shadowbench::config::{read_json, ExperimentConfig};
use shadowbench::estimation::{correlations, BlockRep, CompiledProbe, Estimator, FitModel, Weighting};
use shadowbench::groups::GateSet;
use shadowbench::marginals::{marginal_report, mc_decay_map};
use shadowbench::measurement::Measurement;
use shadowbench::pipeline::{
    fit_input, gate_set_file, parse_probe, postprocess, probe_config, simulate, FitInput, ARTIFACT_VERSION,
};
use shadowbench::reproduce::{self, Target};
use shadowbench::simulator::ShadowDataset;
use shadowbench::stats::{bootstrap_intervals, coverage_study, BootstrapOptions, CiMethod, CoverageConfig};
use shadowbench::util::canonical_hash;
use shadowbench::{Error, Result};

#[derive(Parser)]
#[command(name = "shadowbench", version, about = "Gate-set shadow benchmarking driver")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorArg {
    Mean,
    Mom,
}

impl From<EstimatorArg> for Estimator {
    fn from(e: EstimatorArg) -> Estimator {
        match e {
            EstimatorArg::Mean => Estimator::Mean,
            EstimatorArg::Mom => Estimator::Mom { groups: None },
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Single,
    Offset,
}

impl From<ModelArg> for FitModel {
    fn from(m: ModelArg) -> FitModel {
        match m {
            ModelArg::Single => FitModel::Single,
            ModelArg::Offset => FitModel::Offset,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightingArg {
    Uniform,
    InverseVariance,
}

impl From<WeightingArg> for Weighting {
    fn from(w: WeightingArg) -> Weighting {
        match w {
            WeightingArg::Uniform => Weighting::Uniform,
            WeightingArg::InverseVariance => Weighting::InverseVariance,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a catalog gate set and write its elements and sectors as JSON.
    GenerateGroup {
        /// Catalog name: c1, c2, g1, c1xc1, c1xi, leakage.
        #[arg(long)]
        gate_set: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate a shadow dataset (JSON Lines) from an experiment config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Defaults to `output.dataset` of the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate sequence functions and fit decays for selected probes.
    Postprocess {
        #[arg(long)]
        dataset: PathBuf,
        /// Config the dataset must have been simulated from; supplies defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Block (`P1`), element (`P1:g12`), `all` or `all-local-cliffords`; repeatable.
        #[arg(long)]
        probe: Vec<String>,
        #[arg(long, value_enum)]
        estimator: Option<EstimatorArg>,
        #[arg(long, value_enum)]
        model: Option<ModelArg>,
        #[arg(long, value_enum)]
        weighting: Option<WeightingArg>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a decay to stored (m, k, stderr) points.
    Fit {
        /// JSON with a `per_m` array, or a postprocess report (use --probe).
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        probe: Option<String>,
        #[arg(long, value_enum, default_value = "single")]
        model: ModelArg,
        #[arg(long, value_enum, default_value = "uniform")]
        weighting: WeightingArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reconstruct unital marginals from all local-Clifford probes.
    Marginals {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_enum, default_value = "mean")]
        estimator: EstimatorArg,
        /// Output directory for marginals.json and CSV matrices.
        #[arg(long)]
        out: PathBuf,
    },
    /// Bootstrap confidence interval for one probe.
    Bootstrap {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        probe: String,
        #[arg(long, value_enum, default_value = "mean")]
        estimator: EstimatorArg,
        /// percentile, bca, normal or fit_cov_2sigma; repeatable.
        #[arg(long, default_value = "percentile")]
        method: Vec<String>,
        #[arg(long, default_value_t = 1000)]
        replicates: usize,
        #[arg(long, default_value_t = 0.9)]
        level: f64,
        #[arg(long, value_enum, default_value = "single")]
        model: ModelArg,
        #[arg(long, default_value = "lambda")]
        parameter: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Empirical coverage study of the interval methods.
    Coverage {
        /// Coverage study config; defaults to the desk-scale grid.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reproduce a headline result at desk scale.
    Reproduce {
        /// table1, table2, coverage, leakage or marginals.
        target: String,
        /// JSON parameter overrides for the target.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(p, text)?;
        }
        None => {
            let mut o = std::io::stdout().lock();
            o.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    write_out(path, &s)
}

/// CSV with a provenance comment line.
fn stamped_csv(hash: &str, body: &str) -> String {
    format!("# version={ARTIFACT_VERSION} config_hash={hash}\n{body}")
}

fn load_dataset(path: &Path) -> Result<(ShadowDataset, GateSet)> {
    let f = fs::File::open(path).map_err(|e| Error::config(format!("cannot open {}: {e}", path.display())))?;
    let ds = ShadowDataset::read_jsonl(BufReader::new(f))?;
    let gs = GateSet::by_name(&ds.header.gate_set)?;
    ds.validate(&gs)?;
    Ok((ds, gs))
}

fn dataset_hash(ds: &ShadowDataset) -> String {
    ds.header.config_hash.clone().unwrap_or_default()
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::GenerateGroup { gate_set, out } => {
            let gs = GateSet::by_name(&gate_set)?;
            gs.validate()?;
            write_json(out.as_deref(), &gate_set_file(&gs))
        }
        Cmd::Simulate { config, seed, out } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let out = out
                .or_else(|| cfg.output.dataset.as_ref().map(PathBuf::from))
                .ok_or_else(|| Error::config("no output path: pass --out or set output.dataset"))?;
            let gs = GateSet::by_name(&cfg.gate_set)?;
            let ds = simulate(&cfg, &gs)?;
            if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            let f = fs::File::create(&out)?;
            let mut w = BufWriter::new(f);
            ds.write_jsonl(&mut w)?;
            w.flush()?;
            Ok(())
        }
        Cmd::Postprocess { dataset, config, probe, estimator, model, weighting, out } => {
            let (ds, gs) = load_dataset(&dataset)?;
            let cfg = config.as_deref().map(ExperimentConfig::load).transpose()?;
            if let Some(cfg) = &cfg {
                let h = cfg.hash()?;
                if ds.header.config_hash.as_deref() != Some(h.as_str()) {
                    return Err(Error::config(format!(
                        "dataset {} was not simulated from this config (hash {} vs {h})",
                        dataset.display(),
                        dataset_hash(&ds)
                    )));
                }
            }
            let probes = match (probe.is_empty(), &cfg) {
                (false, _) => probe,
                (true, Some(c)) => c.probes.clone(),
                (true, None) => vec!["all".to_string()],
            };
            let estimator = estimator.map(Estimator::from).or(cfg.as_ref().map(|c| c.estimator)).unwrap_or(Estimator::Mean);
            let model = model.map(FitModel::from).or(cfg.as_ref().map(|c| c.fit_model)).unwrap_or(FitModel::Single);
            let weighting =
                weighting.map(Weighting::from).or(cfg.as_ref().map(|c| c.weighting)).unwrap_or(Weighting::Uniform);
            let report = postprocess(&ds, &gs, &probes, estimator, model, weighting)?;
            let out = out.or_else(|| cfg.as_ref().and_then(|c| c.output.report.as_ref().map(PathBuf::from)));
            write_json(out.as_deref(), &report)
        }
        Cmd::Fit { input, probe, model, weighting, out } => {
            let v: serde_json::Value = read_json(&input)?;
            let points = match (&probe, v.get("probes")) {
                (Some(p), Some(list)) => list
                    .as_array()
                    .and_then(|a| a.iter().find(|r| r.get("probe").and_then(|x| x.as_str()) == Some(p.as_str())))
                    .cloned()
                    .ok_or_else(|| Error::config(format!("probe '{p}' not found in {}", input.display())))?,
                (None, Some(_)) => return Err(Error::config("input is a report; pick an entry with --probe")),
                _ => v.clone(),
            };
            let fi: FitInput = shadowbench::config::from_json_str(&points.to_string(), &input.display().to_string())?;
            let fit = fit_input(&fi, model.into(), weighting.into())?;
            let hash = v.get("config_hash").cloned().unwrap_or(serde_json::Value::Null);
            write_json(
                out.as_deref(),
                &json!({ "version": ARTIFACT_VERSION, "config_hash": hash, "input_hash": canonical_hash(&v)?, "fit": fit }),
            )
        }
        Cmd::Marginals { dataset, estimator, out } => {
            let (ds, gs) = load_dataset(&dataset)?;
            let meas = Measurement::by_name(&ds.header.basis)?;
            let map = mc_decay_map(&ds, &gs, &meas, estimator.into())?;
            let report = marginal_report(&gs, &map)?;
            fs::create_dir_all(&out)?;
            let hash = dataset_hash(&ds);
            write_json(
                Some(&out.join("marginals.json")),
                &json!({ "version": ARTIFACT_VERSION, "config_hash": hash, "marginals": report }),
            )?;
            let mut mats: Vec<(String, &Vec<Vec<f64>>)> = report.blocks.iter().map(|(k, v)| (k.clone(), v)).collect();
            mats.push(("deltaR1".into(), &report.delta_r1));
            if let Some(d2) = &report.delta_r2 {
                mats.push(("deltaR2".into(), d2));
            }
            for (name, m) in mats {
                let body: String = m
                    .iter()
                    .map(|r| r.iter().map(|x| format!("{x:.10}")).collect::<Vec<_>>().join(",") + "\n")
                    .collect();
                fs::write(out.join(format!("{name}.csv")), stamped_csv(&hash, &body))?;
            }
            Ok(())
        }
        Cmd::Bootstrap { dataset, probe, estimator, method, replicates, level, model, parameter, seed, out } => {
            let (ds, gs) = load_dataset(&dataset)?;
            let meas = Measurement::by_name(&ds.header.basis)?;
            let pc = probe_config(&ds, &gs, &meas, &parse_probe(&gs, &probe)?)?;
            let opts = BootstrapOptions { replicates, level, seed, model: model.into(), parameter };
            let methods = method.iter().map(|m| CiMethod::parse(m)).collect::<Result<Vec<_>>>()?;
            let rep = BlockRep::new(&gs, &pc.block);
            let c = correlations(&ds, &CompiledProbe::new(&pc, &rep)?)?;
            let intervals = bootstrap_intervals(&c, estimator.into(), &methods, &opts)?;
            write_json(
                out.as_deref(),
                &json!({
                    "version": ARTIFACT_VERSION,
                    "config_hash": dataset_hash(&ds),
                    "probe": probe,
                    "options": opts,
                    "intervals": intervals,
                }),
            )
        }
        Cmd::Coverage { config, seed, trials, out } => {
            let mut cfg: CoverageConfig = match &config {
                Some(p) => read_json(p)?,
                None => reproduce::default_coverage_config(),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(t) = trials {
                cfg.trials = t;
            }
            let rep = coverage_study(&cfg)?;
            write_out(Some(&out), &stamped_csv(&canonical_hash(&cfg)?, &rep.to_csv()))
        }
        Cmd::Reproduce { target, config, seed, out } => {
            let target = Target::parse(&target)?;
            let params: Option<serde_json::Value> = config.as_deref().map(read_json).transpose()?;
            let b = reproduce::run(target, params.as_ref(), seed)?;
            fs::create_dir_all(&out)?;
            write_json(Some(&out.join("report.json")), &b)?;
            fs::write(out.join("table.txt"), b.table())?;
            fs::write(out.join("rows.csv"), stamped_csv(&b.params_hash, &b.rows_csv()))?;
            for (name, body) in &b.files {
                fs::write(out.join(name), stamped_csv(&b.params_hash, body))?;
            }
            print!("{}", b.table());
            if b.partial {
                eprintln!("warning: partial bundle; {} step(s) failed", b.errors.len());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
