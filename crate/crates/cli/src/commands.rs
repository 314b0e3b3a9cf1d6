use std::path::PathBuf;

use anyhow::{anyhow, Context};
use serde_json::json;

use aew_core::complexity::{psi, ExcessRiskProfile};
use aew_core::gaussian::{
    berry_esseen_distance, gamma1_monte_carlo, lemma_gamma1_checks, Gamma1Query, NormalizedSumSpec, SummandKind,
};
use aew_core::harness::{
    run_theorem_a, run_theorem_b, run_theorem_c, Constants, DictionaryChoice, ExperimentConfig, Theorem,
};
use aew_core::{aew_weights, erm_select, rng_from_seed, EmpiricalRisks, Temperature};

use crate::output::{write_text, Cell, Table};
use crate::settings::ConfigFile;
use crate::svg::{rate_plot, PlotSpec, Series};
use crate::{
    tables, BeCheckArgs, Classify, Command, CommonArgs, ContinuousKind, DictionaryKind, Experiment, Failure, Gamma1Args,
    GridArgs, Outcome, PsiArgs, SummandChoice, TheoremAArgs, TheoremBArgs, TheoremCArgs, WeightsArgs,
};

pub fn dispatch(cli: crate::Cli) -> Outcome<()> {
    match cli.command {
        Command::Exp(Experiment::TheoremA(a)) => theorem_a(a),
        Command::Exp(Experiment::TheoremB(a)) => theorem_b(a),
        Command::Exp(Experiment::TheoremC(a)) => theorem_c(a),
        Command::Psi(a) => psi_cmd(a),
        Command::Gamma1(a) => gamma1_cmd(a),
        Command::BeCheck(a) => be_check(a),
        Command::Weights(a) => weights(a),
    }
}

fn config_error(msg: impl Into<String>) -> Failure {
    Failure::Config(anyhow!(msg.into()))
}

fn require<T>(v: Option<T>, what: &str) -> Outcome<T> {
    v.ok_or_else(|| config_error(format!("missing required option --{what}")))
}

struct Outputs {
    csv: Option<PathBuf>,
    json: Option<PathBuf>,
    svg: Option<PathBuf>,
    /// The grids came from a flag or the config file rather than the defaults.
    n_given: bool,
    t_given: bool,
}

/// Options shared by the `exp` subcommands, resolved into a config.
fn resolve_experiment(
    theorem: Theorem,
    file: &mut ConfigFile,
    common: &CommonArgs,
    grid: &GridArgs,
) -> Outcome<(ExperimentConfig, Outputs)> {
    let seed = require(file.value("seed", common.seed).config()?, "seed")?;
    let mut cfg = ExperimentConfig::new(theorem, seed);
    let n = file.list("n", grid.n.clone()).config()?;
    let t = file.list("temperature", grid.temperature.clone()).config()?;
    let (n_given, t_given) = (n.is_some(), t.is_some());
    if let Some(n) = n {
        cfg.n_grid = n;
    }
    if let Some(t) = t {
        cfg.t_grid = t;
    }
    if let Some(t) = file.value("trials", grid.trials).config()? {
        cfg.trials = t;
    }
    let default_workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    cfg.workers = file.value("workers", common.workers).config()?.unwrap_or(default_workers);
    cfg.constants = Constants::with_overrides(&file.constants(&common.constants).config()?).config()?;
    let outputs = Outputs {
        csv: file.value("out", common.out.clone()).config()?,
        json: file.value("json", common.json.clone()).config()?,
        svg: file.value("svg", common.svg.clone()).config()?,
        n_given,
        t_given,
    };
    Ok((cfg, outputs))
}

fn series_by_temperature(points: impl Iterator<Item = (f64, f64, f64)>) -> Vec<Series> {
    let mut out: Vec<(f64, Series)> = Vec::new();
    for (t, n, y) in points {
        match out.iter_mut().find(|(tt, _)| *tt == t) {
            Some((_, s)) => s.points.push((n, y)),
            None => out.push((t, Series { label: format!("T = {t}"), points: vec![(n, y)] })),
        }
    }
    out.into_iter().map(|(_, s)| s).collect()
}

fn emit(outputs: &Outputs, table: &Table, doc: serde_json::Value, series: Vec<Series>, title: &str) -> Outcome<()> {
    if let Some(path) = &outputs.json {
        let text = serde_json::to_string_pretty(&doc).runtime()? + "\n";
        write_text(Some(path), &text).runtime()?;
    }
    write_text(outputs.csv.as_deref(), &table.to_csv().runtime()?).runtime()?;
    if let Some(path) = &outputs.svg {
        let spec = PlotSpec {
            title: title.to_string(),
            x_label: "n".into(),
            y_label: "mean excess risk".into(),
            reference_slopes: vec![-0.5, -1.0],
        };
        write_text(Some(path), &rate_plot(&series, &spec).runtime()?).runtime()?;
    }
    Ok(())
}

fn theorem_a(args: TheoremAArgs) -> Outcome<()> {
    let mut file = ConfigFile::load(args.common.config.as_deref()).config()?;
    let (mut cfg, outputs) = resolve_experiment(Theorem::A, &mut file, &args.common, &args.grid)?;
    if let Some(c) = file.value("tail-c", args.tail_c).config()? {
        cfg.tail_c = c;
    }
    file.finish().config()?;
    cfg.validate().config()?;
    let rows = run_theorem_a(&cfg).runtime()?;
    let series = series_by_temperature(rows.iter().map(|r| (r.temperature, r.n as f64, r.exact_mean_excess)));
    emit(&outputs, &tables::theorem_a(&rows), json!({ "config": cfg, "rows": rows }), series, "exact mean excess, two-indicator model")
}

fn theorem_b(args: TheoremBArgs) -> Outcome<()> {
    let mut file = ConfigFile::load(args.common.config.as_deref()).config()?;
    let (mut cfg, outputs) = resolve_experiment(Theorem::B, &mut file, &args.common, &args.grid)?;
    if let Some(v) = file.value("epsilon", args.epsilon).config()? {
        cfg.epsilon = v;
    }
    if let Some(v) = file.value("kappa", args.kappa).config()? {
        cfg.kappa = v;
    }
    cfg.lambda_override = file.value("lambda", args.lambda).config()?;
    cfg.m_override = file.value("m", args.m).config()?;
    file.finish().config()?;
    cfg.validate().config()?;
    let rows = run_theorem_b(&cfg).runtime()?;
    let series = series_by_temperature(rows.iter().map(|r| (r.temperature, r.n as f64, r.mean_excess)));
    emit(&outputs, &tables::theorem_b(&rows), json!({ "config": cfg, "rows": rows }), series, "mean excess, collapsing dictionary")
}

fn theorem_c(args: TheoremCArgs) -> Outcome<()> {
    let mut file = ConfigFile::load(args.common.config.as_deref()).config()?;
    let (mut cfg, outputs) = resolve_experiment(Theorem::C, &mut file, &args.common, &args.grid)?;
    let kind = match file.value::<String>("dictionary", None).config()? {
        _ if args.dictionary.is_some() => args.dictionary.expect("checked"),
        Some(s) => match s.as_str() {
            "bernstein" => DictionaryKind::Bernstein,
            "theorem-a" => DictionaryKind::TheoremA,
            other => return Err(config_error(format!("unknown dictionary `{other}` (bernstein, theorem-a)"))),
        },
        None => DictionaryKind::Bernstein,
    };
    let dict_m = file.value("dict-m", args.dict_m).config()?;
    let dict_b = file.value("dict-b", args.dict_b).config()?;
    match kind {
        DictionaryKind::Bernstein => {
            let b = dict_b.unwrap_or(1.0);
            cfg.dictionary = DictionaryChoice::Bernstein { m: dict_m.unwrap_or(50), b };
            if !outputs.t_given {
                // 0.2 max{b, B} with B = 4b
                cfg.t_grid = vec![0.2 * 4.0 * b];
            }
        }
        DictionaryKind::TheoremA => {
            if dict_m.is_some() || dict_b.is_some() {
                return Err(config_error("--dict-m and --dict-b apply only to the Bernstein dictionary"));
            }
            cfg.dictionary = DictionaryChoice::TheoremA;
            if !outputs.n_given {
                cfg.n_grid = vec![101, 401, 1601, 6401];
            }
            if !outputs.t_given {
                cfg.t_grid = vec![0.2];
            }
        }
    }
    if let Some(x) = file.value("x", args.x).config()? {
        cfg.x = x;
    }
    file.finish().config()?;
    cfg.validate().config()?;
    let table = run_theorem_c(&cfg).runtime()?;
    for w in &table.warnings {
        eprintln!("warning: outside the low-temperature regime: {w}");
    }
    let series = series_by_temperature(table.rows.iter().map(|r| (r.temperature, r.n as f64, r.mean_excess)));
    emit(&outputs, &tables::theorem_c(&table), json!({ "config": cfg, "table": table }), series, "mean excess, generic pipeline")
}

fn psi_cmd(args: PsiArgs) -> Outcome<()> {
    let mut file = ConfigFile::load(args.config.as_deref()).config()?;
    let mut deltas = require(file.list("deltas", args.deltas).config()?, "deltas")?;
    let r = require(file.value("r", args.r).config()?, "r")?;
    file.finish().config()?;
    if !(r.is_finite() && r > 0.0) {
        return Err(config_error(format!("r must be finite and > 0 (got {r})")));
    }
    deltas.sort_by(f64::total_cmp);
    let profile = ExcessRiskProfile::new(deltas, 1.0, 1.0).config()?;
    let report = psi(&profile, r).runtime()?;
    println!("{:.4}", report.psi_value);
    Ok(())
}

fn gamma1_cmd(args: Gamma1Args) -> Outcome<()> {
    let mut file = ConfigFile::load(args.config.as_deref()).config()?;
    let ell = require(file.value("ell", args.ell).config()?, "ell")?;
    let level_n = require(file.value("level-n", args.level_n).config()?, "level-n")?;
    let inner_n = file.value("inner-n", args.inner_n).config()?.unwrap_or(1);
    let kind = match file.value::<String>("kind", None).config()? {
        _ if args.kind.is_some() => args.kind.expect("checked"),
        Some(s) if s == "uniform" => ContinuousKind::Uniform,
        Some(s) if s == "gaussian" => ContinuousKind::Gaussian,
        Some(s) => return Err(config_error(format!("unknown kind `{s}` (uniform, gaussian)"))),
        None => ContinuousKind::Uniform,
    };
    let window = file.list("window", args.window).config()?.unwrap_or_else(|| vec![0.25, 4.0]);
    let draws = file.value("mc-draws", args.mc_draws).config()?;
    let seed = file.value("seed", args.seed).config()?;
    let constants = Constants::with_overrides(&file.constants(&args.constants).config()?).config()?;
    let out = file.value("out", args.out).config()?;
    file.finish().config()?;
    let [lo, hi] = window[..] else { return Err(config_error("--window expects two numbers lo,hi")) };
    if !(lo > 0.0 && lo <= hi) {
        return Err(config_error(format!("--window needs 0 < lo <= hi (got {lo},{hi})")));
    }
    if draws.is_some() && seed.is_none() {
        return Err(config_error("missing required option --seed (needed by --mc-draws)"));
    }
    let summand = match kind {
        ContinuousKind::Uniform => SummandKind::UniformBased,
        ContinuousKind::Gaussian => SummandKind::Gaussian,
    };
    let mut spec = NormalizedSumSpec::new(summand, inner_n).config()?;
    spec.a_const = constants.get("be_a");
    let query = Gamma1Query::new(ell, level_n, spec).config()?;
    let report = lemma_gamma1_checks(&query, constants.get("c3"), (lo, hi)).runtime()?;
    let mc = match (draws, seed) {
        (Some(d), Some(s)) => Some(gamma1_monte_carlo(&query, d, &mut rng_from_seed(s)).runtime()?),
        _ => None,
    };
    let mut t = Table::new(vec![
        "ell",
        "level_n",
        "inner_n",
        "level",
        "gamma1",
        "mc_gamma1",
        "mc_stderr",
        "x",
        "part1_applicable",
        "part1_left",
        "part1_right",
        "premise2",
        "gamma1_le_minus2",
        "part3_ratio",
        "part3_in_window",
    ]);
    t.push(vec![
        ell.into(),
        level_n.into(),
        inner_n.into(),
        query.level().into(),
        report.gamma1.into(),
        mc.map(|m| m.value).into(),
        mc.map(|m| m.stderr).into(),
        report.x.into(),
        report.part1_applicable.into(),
        report.part1_left.into(),
        report.part1_right.into(),
        report.premise2.into(),
        report.gamma1_le_minus2.into(),
        report.part3_ratio.into(),
        report.part3_in_window.map_or(Cell::Empty, Cell::Bool),
    ]);
    write_text(out.as_deref(), &t.to_csv().runtime()?).runtime()
}

fn be_check(args: BeCheckArgs) -> Outcome<()> {
    let mut file = ConfigFile::load(args.config.as_deref()).config()?;
    let inner = file.list("inner-n", args.inner_n).config()?.unwrap_or_else(|| vec![4, 16, 64]);
    let samples = file.value("samples", args.samples).config()?.unwrap_or(1_000_000);
    let kind = match file.value::<String>("kind", None).config()? {
        _ if args.kind.is_some() => args.kind.expect("checked"),
        Some(s) => match s.as_str() {
            "uniform" => SummandChoice::Uniform,
            "rademacher" => SummandChoice::Rademacher,
            "gaussian" => SummandChoice::Gaussian,
            other => return Err(config_error(format!("unknown kind `{other}` (uniform, rademacher, gaussian)"))),
        },
        None => SummandChoice::Uniform,
    };
    let p_plus = file.value("p-plus", args.p_plus).config()?.unwrap_or(0.5);
    let seed = require(file.value("seed", args.seed).config()?, "seed")?;
    let constants = Constants::with_overrides(&file.constants(&args.constants).config()?).config()?;
    let out = file.value("out", args.out).config()?;
    file.finish().config()?;
    let summand = match kind {
        SummandChoice::Uniform => SummandKind::UniformBased,
        SummandChoice::Rademacher => SummandKind::RademacherShifted { p_plus },
        SummandChoice::Gaussian => SummandKind::Gaussian,
    };
    let specs = inner
        .iter()
        .map(|&n| {
            let mut s = NormalizedSumSpec::new(summand.clone(), n)?;
            s.a_const = constants.get("be_a");
            Ok((n, s))
        })
        .collect::<aew_core::Result<Vec<_>>>()
        .config()?;
    if samples < aew_core::gaussian::MIN_BE_SAMPLES {
        return Err(config_error(format!("--samples must be >= {}", aew_core::gaussian::MIN_BE_SAMPLES)));
    }
    let mut reports = Vec::new();
    for (i, (n, spec)) in specs.iter().enumerate() {
        let mut rng = rng_from_seed(aew_core::derive_trial_seed(seed, i as u64));
        reports.push((*n, berry_esseen_distance(spec, samples, &mut rng).runtime()?));
    }
    write_text(out.as_deref(), &tables::be_check(&reports).to_csv().runtime()?).runtime()
}

fn weights(args: WeightsArgs) -> Outcome<()> {
    let mut file = ConfigFile::load(args.config.as_deref()).config()?;
    let risks = require(file.list("risks", args.risks).config()?, "risks")?;
    let n = require(file.value("n", args.n).config()?, "n")?;
    let t = require(file.value("temperature", args.temperature).config()?, "temperature")?;
    let out = file.value("out", args.out).config()?;
    file.finish().config()?;
    let risks = EmpiricalRisks::new(risks, n).config()?;
    let temp = Temperature::new(t).config()?;
    let w = aew_weights(&risks, temp).config()?;
    let erm = erm_select(&risks).config()?;
    let mut table = Table::new(vec!["index", "risk", "weight", "erm"]);
    for (j, (r, w)) in risks.values.iter().zip(w.as_slice()).enumerate() {
        table.push(vec![j.into(), (*r).into(), (*w).into(), erm.contains(&j).into()]);
    }
    write_text(out.as_deref(), &table.to_csv().context("formatting weights").runtime()?).runtime()
}
