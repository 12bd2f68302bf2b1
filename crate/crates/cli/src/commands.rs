use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use schmidt_core::applications::{
    ame_search, channel_min_output, channel_pair_min_output, default_table1_rows, fermion_entropy_min,
    fermion_extremal, restart_seeds, table1_csv, table1_protocol, variety_probe, yang_dominance, ExperimentResult,
    ProbeSpace, ProbeTarget, VarietyConfig,
};
use schmidt_core::measures::NormSpec;
use schmidt_core::optimizer::{run_single, IterationConfig, IterationReport, Objective};
use schmidt_core::tensor::{random_state, schmidt_decompose, PureState};
use schmidt_core::C64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{
    cut_from_one_based, AmeParams, ChannelFile, ChannelParams, FermionMode, FermionParams, MaximizeParams, RunConfig,
    SpaceSpec, StateFile, Table1Params, TermSpec, VarietyParams,
};
use crate::{Cli, CliError, Command};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Generator {
    Bell,
    Ghz,
    W,
    Product,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum SpaceKind {
    Identity,
    Symmetric,
    Antisymmetric,
    Fermion,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ProbeSpaceKind {
    Full,
    Symmetric,
    Antisymmetric,
}

/// Settings shared by every command after merging file and flags.
struct Ctx {
    run: RunConfig,
    iteration: IterationConfig,
    out: Option<PathBuf>,
    trace: Option<PathBuf>,
    command: &'static str,
    start: Instant,
}

#[derive(Serialize)]
struct Report<'a> {
    experiment: &'a str,
    params: Value,
    results: Value,
    seeds: Vec<u64>,
    meta: Value,
}

fn required<T>(v: Option<T>, what: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Config(format!("missing {what}")))
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Config(format!("cannot write {}: {e}", path.display()))
}

impl Ctx {
    fn new(cli: &Cli, command: &'static str) -> Result<Self, CliError> {
        let run = match &cli.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let mut it = run.iteration.clone().unwrap_or_default();
        if let Some(s) = run.seed {
            it.seed = s;
        }
        if let Some(r) = run.restarts {
            it.restarts = r;
        }
        if let Some(t) = run.threads {
            it.threads = t;
        }
        if let Some(s) = cli.seed {
            it.seed = s;
        }
        if let Some(r) = cli.restarts {
            it.restarts = r;
        }
        if let Some(t) = cli.threads {
            it.threads = t;
        }
        if let Some(m) = cli.max_iters {
            it.max_iters = m;
        }
        let out = cli.out.clone().or_else(|| run.out.clone());
        let trace = cli.trace.clone().or_else(|| run.trace.clone());
        if trace.is_some() {
            it.record_trace = true;
        }
        it.validate()?;
        Ok(Self { run, iteration: it, out, trace, command, start: Instant::now() })
    }

    fn write_report(&self, experiment: &str, params: Value, results: Value, seeds: Vec<u64>) -> Result<(), CliError> {
        let Some(path) = &self.out else { return Ok(()) };
        let report = Report {
            experiment,
            params,
            results,
            seeds,
            meta: json!({
                "command": self.command,
                "version": env!("CARGO_PKG_VERSION"),
                "threads": self.iteration.threads,
                "wall_time_s": self.start.elapsed().as_secs_f64(),
            }),
        };
        let f = File::create(path).map_err(|e| io_err(path, e))?;
        serde_json::to_writer_pretty(BufWriter::new(f), &report)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
        info!("report written to {}", path.display());
        Ok(())
    }

    fn write_trace(&self, runs: &IterationReport) -> Result<(), CliError> {
        let Some(path) = &self.trace else { return Ok(()) };
        let f = File::create(path).map_err(|e| io_err(path, e))?;
        runs.write_trace_csv(BufWriter::new(f)).map_err(|e| io_err(path, e))
    }

    /// Writes report and trace, then fails with exit code 2 if every
    /// restart ran out of iterations without reaching its target.
    fn finish(&self, res: &ExperimentResult) -> Result<(), CliError> {
        let mut results = serde_json::to_value(res).map_err(|e| CliError::Inconsistent(e.to_string()))?;
        if let Value::Object(m) = &mut results {
            for k in ["experiment", "params", "seeds"] {
                m.remove(k);
            }
        }
        self.write_report(&res.experiment, res.params.clone(), results, res.seeds.clone())?;
        self.write_trace(&res.runs)?;
        check_convergence(&res.runs, self.iteration.max_iters)
    }
}

fn check_convergence(runs: &IterationReport, max_iters: usize) -> Result<(), CliError> {
    let stuck = runs
        .restarts
        .iter()
        .all(|r| !r.converged && r.success != Some(true) && r.iterations >= max_iters);
    if stuck {
        return Err(CliError::NonConvergence(format!("all {} restarts hit max_iters = {max_iters}", runs.restarts.len())));
    }
    Ok(())
}

fn print_summary(res: &ExperimentResult) {
    println!("experiment: {}", res.experiment);
    println!("best value: {:.12}", res.best_value);
    if let Some(t) = &res.target {
        println!("target: {:.12} ({})", t.value, t.provenance);
        println!("successes: {}/{}", res.success_count, res.restarts);
        if let Some(m) = res.mean_iterations_successes {
            println!("mean iterations among successes: {m:.1}");
        }
    }
    println!("converged restarts: {}/{}", res.runs.converged_count, res.runs.restarts.len());
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Decompose(a) => decompose(&cli, a),
        Command::Maximize(a) => maximize(&cli, a),
        Command::Ame(a) => ame(&cli, a),
        Command::Fermion(a) => fermion(&cli, a),
        Command::Variety(a) => variety(&cli, a),
        Command::Channel(a) => channel(&cli, a),
        Command::Table1(a) => table1(&cli, a),
    }
}

fn generate(g: Generator, dims: Option<Vec<usize>>, seed: u64) -> Result<PureState, CliError> {
    let c = |x: f64| C64::new(x, 0.0);
    let state = match g {
        Generator::Bell => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            PureState::new(vec![2, 2], vec![c(h), c(0.0), c(0.0), c(h)])?
        }
        Generator::Ghz => {
            let dims = dims.unwrap_or_else(|| vec![2, 2, 2]);
            let m = *dims.iter().min().unwrap_or(&0);
            let total: usize = dims.iter().product();
            let mut amps = vec![c(0.0); total];
            for i in 0..m {
                let idx = dims.iter().fold(0, |acc, &d| acc * d + i);
                amps[idx] = c(1.0);
            }
            PureState::new(dims, amps)?.normalized()?
        }
        Generator::W => {
            let dims = dims.unwrap_or_else(|| vec![2, 2, 2]);
            if dims.iter().any(|&d| d < 2) {
                return Err(CliError::Config("W state needs every factor of dimension >= 2".into()));
            }
            let total: usize = dims.iter().product();
            let mut amps = vec![c(0.0); total];
            for j in 0..dims.len() {
                let idx = dims.iter().enumerate().fold(0, |acc, (i, &d)| acc * d + usize::from(i == j));
                amps[idx] = c(1.0);
            }
            PureState::new(dims, amps)?.normalized()?
        }
        Generator::Product => PureState::basis(dims.unwrap_or_else(|| vec![2, 2]), 0)?,
        Generator::Random => random_state(&required(dims, "--dims for a random state")?, seed)?,
    };
    Ok(state)
}

fn amps_json(amps: &[C64]) -> Value {
    Value::Array(amps.iter().map(|a| json!([a.re, a.im])).collect())
}

fn decompose(cli: &Cli, a: &crate::DecomposeArgs) -> Result<(), CliError> {
    let ctx = Ctx::new(cli, "decompose")?;
    let state = match (&a.state, a.generator) {
        (Some(p), _) => StateFile::load(p)?,
        (None, Some(g)) => generate(g, a.dims.clone(), ctx.iteration.seed)?,
        (None, None) => return Err(CliError::Config("decompose needs --state or --generator".into())),
    };
    let cut = cut_from_one_based(&a.cut, state.dims().len())?;
    let sd = schmidt_decompose(&state, &cut)?;
    let spectrum: Vec<f64> = sd.coeffs.iter().map(|l| 0.0 - (l * l).ln()).collect();
    println!("# i lambda xi");
    for (i, (l, x)) in sd.coeffs.iter().zip(&spectrum).enumerate() {
        println!("{} {l:.10} {x:.10}", i + 1);
    }
    // infinite ξ for vanishing coefficients is written as null
    let xi: Vec<Value> = spectrum.iter().map(|x| if x.is_finite() { json!(x) } else { Value::Null }).collect();
    ctx.write_report(
        "decompose",
        json!({ "dims": state.dims(), "cut": a.cut, "amps": amps_json(state.amps()) }),
        json!({ "coefficients": sd.coeffs, "entanglement_spectrum": xi, "rank": sd.rank() }),
        vec![],
    )
}

fn maximize(cli: &Cli, a: &crate::MaximizeArgs) -> Result<(), CliError> {
    let ctx = Ctx::new(cli, "maximize")?;
    let mut params: MaximizeParams = ctx.run.params()?;
    if let Some(kind) = a.space {
        let need = |v: Option<usize>, f: &str| required(v, &format!("--{f} for this space"));
        params.space = Some(match kind {
            SpaceKind::Identity => SpaceSpec::Identity { dims: required(a.dims.clone(), "--dims")? },
            SpaceKind::Symmetric => SpaceSpec::Symmetric { d: need(a.d, "d")?, n: need(a.n, "n")? },
            SpaceKind::Antisymmetric => SpaceSpec::Antisymmetric { d: need(a.d, "d")?, n: need(a.n, "n")? },
            SpaceKind::Fermion => {
                SpaceSpec::Fermion { d: need(a.d, "d")?, n: need(a.n, "n")?, split: need(a.split, "split")? }
            }
        });
    }
    if a.cut.is_some() || a.p.is_some() || a.k.is_some() {
        let base = params.terms.first().cloned().unwrap_or(TermSpec { cut: vec![1], p: 2.0, k: 1, weights: None });
        params.terms = vec![TermSpec {
            cut: a.cut.clone().unwrap_or(base.cut),
            p: a.p.unwrap_or(base.p),
            k: a.k.unwrap_or(base.k),
            weights: None,
        }];
    }
    let space = required(params.space.clone(), "space (--space or params.space)")?;
    if params.terms.is_empty() {
        params.terms.push(TermSpec { cut: vec![1], p: 2.0, k: 1, weights: None });
    }
    let (projector, dims) = space.build()?;
    let terms = params.terms.iter().map(|t| t.build(dims.len())).collect::<Result<Vec<_>, _>>()?;
    let objective = Objective::new(projector, dims.clone(), terms)?;
    let start = Instant::now();
    let runs = run_single(&objective, &ctx.iteration)?;
    info!("maximize finished in {:.2}s", start.elapsed().as_secs_f64());
    let best = runs.best();
    println!("best value: {:.12}", runs.best_value);
    println!("best value squared: {:.12}", runs.best_value * runs.best_value);
    println!("term values: {:?}", best.term_values);
    println!("converged restarts: {}/{}", runs.converged_count, runs.restarts.len());
    let results = json!({
        "best_value": runs.best_value,
        "best_state": amps_json(&best.state),
        "runs": runs,
    });
    ctx.write_report(
        "maximize",
        serde_json::to_value(&params).map_err(|e| CliError::Inconsistent(e.to_string()))?,
        results,
        restart_seeds(&ctx.iteration),
    )?;
    ctx.write_trace(&runs)?;
    check_convergence(&runs, ctx.iteration.max_iters)
}

fn ame(cli: &Cli, a: &crate::AmeArgs) -> Result<(), CliError> {
    let ctx = Ctx::new(cli, "ame")?;
    let mut params: AmeParams = ctx.run.params()?;
    if let Some(d) = &a.dims {
        params.dims = d.clone();
    }
    if params.dims.len() < 2 {
        return Err(CliError::Config("ame needs --dims with at least two factors".into()));
    }
    let res = ame_search(&params.dims, &ctx.iteration)?;
    print_summary(&res);
    if let Some(bounds) = res.details.get("cut_bounds") {
        println!("per-cut bounds: {bounds}");
    }
    let best = res.runs.best();
    println!("per-cut values of the best restart: {:?}", best.term_values);
    ctx.finish(&res)
}

fn fermion(cli: &Cli, a: &crate::FermionArgs) -> Result<(), CliError> {
    let ctx = Ctx::new(cli, "fermion")?;
    let mut p: FermionParams = ctx.run.params()?;
    p.d = a.d.unwrap_or(p.d);
    p.n = a.n.unwrap_or(p.n);
    p.split = a.split.unwrap_or(p.split);
    p.mode = a.mode.unwrap_or(p.mode);
    p.p = a.p.unwrap_or(p.p);
    p.k = a.k.unwrap_or(p.k);
    p.alpha = a.alpha.unwrap_or(p.alpha);
    if p.d == 0 || p.n == 0 {
        return Err(CliError::Config("fermion needs --d and --n".into()));
    }
    match p.mode {
        FermionMode::Extremal => {
            let res = fermion_extremal(p.d, p.n, p.split, NormSpec::new(p.p, p.k)?, &ctx.iteration)?;
            print_summary(&res);
            println!("best value squared: {:.12}", res.best_value * res.best_value);
            ctx.finish(&res)
        }
        FermionMode::Entropy => {
            let res = fermion_entropy_min(p.d, p.n, p.split, p.alpha, &ctx.iteration)?;
            print_summary(&res);
            println!("minimal entropy: {}", res.details["min_entropy"]);
            println!("entropy target: {}", res.details["entropy_target"]);
            ctx.finish(&res)
        }
        FermionMode::Yang => {
            let chk = yang_dominance(p.d, p.n, p.split, &ctx.iteration)?;
            println!("best value: {:.12}", chk.best_value);
            println!("yang state value: {:.12}", chk.yang_value);
            println!("restarts agreeing with the best: {}/{}", chk.agreeing, chk.restarts);
            println!("yang state dominates: {}", chk.yang_dominates);
            ctx.write_report(
                "yang_dominance",
                serde_json::to_value(&p).map_err(|e| CliError::Inconsistent(e.to_string()))?,
                serde_json::to_value(&chk).map_err(|e| CliError::Inconsistent(e.to_string()))?,
                restart_seeds(&ctx.iteration),
            )
        }
    }
}

fn parse_target(s: &str) -> Result<ProbeTarget, CliError> {
    let bad = || CliError::Config(format!("unknown variety target {s:?}"));
    let (name, arg) = s.split_once(':').map_or((s, None), |(a, b)| (a, Some(b)));
    Ok(match name.to_ascii_lowercase().replace('-', "_").as_str() {
        "rank1" => ProbeTarget::Rank { r: 1 },
        "rank" => ProbeTarget::Rank { r: arg.ok_or_else(bad)?.parse().map_err(|_| bad())? },
        "ranks" => ProbeTarget::Ranks {
            r: arg
                .ok_or_else(bad)?
                .split(',')
                .map(|x| x.trim().parse().map_err(|_| bad()))
                .collect::<Result<_, _>>()?,
        },
        "max_entangled" | "maxent" => ProbeTarget::MaxEntangled,
        "condensate" => ProbeTarget::Condensate,
        "slater" => ProbeTarget::Slater,
        "yang" => ProbeTarget::Yang,
        _ => return Err(bad()),
    })
}

fn variety(cli: &Cli, a: &crate::VarietyArgs) -> Result<(), CliError> {
    let ctx = Ctx::new(cli, "variety")?;
    let mut p: VarietyParams = ctx.run.params()?;
    if let Some(kind) = a.space {
        p.space = Some(match kind {
            ProbeSpaceKind::Full => ProbeSpace::Full { dims: required(a.dims.clone(), "--dims")? },
            ProbeSpaceKind::Symmetric => ProbeSpace::Symmetric { d: required(a.d, "--d")?, n: required(a.n, "--n")? },
            ProbeSpaceKind::Antisymmetric => {
                ProbeSpace::Antisymmetric { d: required(a.d, "--d")?, n: required(a.n, "--n")? }
            }
        });
    }
    if let Some(t) = &a.target {
        p.target = Some(parse_target(t)?);
    }
    p.trials = a.trials.or(p.trials);
    p.start_dim = a.start_dim.or(p.start_dim);
    let space = required(p.space.clone(), "space (--space or params.space)")?;
    let target = required(p.target.clone(), "target (--target or params.target)")?;
    let defaults = VarietyConfig::default();
    let cfg = VarietyConfig {
        trials: p.trials.unwrap_or(defaults.trials),
        start_dim: p.start_dim.unwrap_or(defaults.start_dim),
        iteration: ctx.iteration.clone(),
    };
    let out = variety_probe(&space, &target, &cfg)?;
    println!("largest dimension avoiding the variety: D = {}", out.max_dim);
    if let Some(e) = out.expected {
        println!("expected: D = {e}");
    }
    println!("confirmed at D + 1: {}", out.confirmed);
    for pr in &out.probes {
        println!("  D = {}: {}/{} hits", pr.dim, pr.hits, pr.trials);
    }
    let seeds = (0..out.probes.len()).map(|i| schmidt_core::rng::derive_seed(ctx.iteration.seed, i as u64)).collect();
    ctx.write_report(
        "variety",
        serde_json::to_value(&p).map_err(|e| CliError::Inconsistent(e.to_string()))?,
        serde_json::to_value(&out).map_err(|e| CliError::Inconsistent(e.to_string()))?,
        seeds,
    )?;
    if let Some(e) = out.expected {
        if e != out.max_dim {
            log::warn!("probed dimension {} differs from the expected {e}", out.max_dim);
        }
    }
    Ok(())
}

fn channel(cli: &Cli, a: &crate::ChannelArgs) -> Result<(), CliError> {
    let ctx = Ctx::new(cli, "channel")?;
    let mut p: ChannelParams = ctx.run.params()?;
    if let Some(path) = &a.spec {
        p.channel = Some(ChannelFile::load(path)?);
    }
    if let Some(path) = &a.second {
        p.second = Some(ChannelFile::load(path)?);
    }
    p.alpha = a.alpha.unwrap_or(p.alpha);
    let first = required(p.channel.as_ref(), "channel (--spec or params.channel)")?.build()?;
    match &p.second {
        None => {
            let res = channel_min_output(&first, p.alpha, &ctx.iteration)?;
            println!("maximal output {}-norm: {:.12}", p.alpha, res.details["max_output_norm"].as_f64().unwrap_or(f64::NAN));
            println!("minimal output entropy S_{}: {:.12}", p.alpha, res.details["min_entropy"].as_f64().unwrap_or(f64::NAN) + 0.0);
            ctx.finish(&res)
        }
        Some(second) => {
            let out = channel_pair_min_output(&first, &second.build()?, p.alpha, &ctx.iteration)?;
            println!("joint maximal output norm: {:.12}", out.lhs);
            println!("product of maximal output norms: {:.12}", out.rhs);
            println!("gap: {:.3e}", out.gap);
            ctx.write_report(
                "channel_pair",
                serde_json::to_value(&p).map_err(|e| CliError::Inconsistent(e.to_string()))?,
                json!({ "lhs": out.lhs, "rhs": out.rhs, "gap": out.gap,
                        "first": out.first, "second": out.second, "joint": out.joint }),
                restart_seeds(&ctx.iteration),
            )
        }
    }
}

fn table1(cli: &Cli, a: &crate::Table1Args) -> Result<(), CliError> {
    let ctx = Ctx::new(cli, "table1")?;
    let mut p: Table1Params = ctx.run.params()?;
    if a.csv.is_some() {
        p.csv = a.csv.clone();
    }
    let rows = p.rows.clone().unwrap_or_else(default_table1_rows);
    let entries = table1_protocol(&rows, &ctx.iteration)?;
    let csv = table1_csv(&entries);
    print!("{csv}");
    if let Some(path) = &p.csv {
        std::fs::write(path, &csv).map_err(|e| io_err(path, e))?;
    }
    ctx.write_report(
        "table1",
        json!({ "rows": rows }),
        serde_json::to_value(&entries).map_err(|e| CliError::Inconsistent(e.to_string()))?,
        restart_seeds(&IterationConfig { restarts: schmidt_core::applications::TABLE1_RESTARTS, ..ctx.iteration.clone() }),
    )
}
