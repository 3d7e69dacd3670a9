//! Command-line front end.
//!
//! Exit codes: 0 success, 1 runtime/domain error, 2 usage error. A JSON
//! config file (`--config`) may supply any flag by its long name; explicit
//! flags override file values. Every artifact embeds the tool version and
//! the resolved configuration.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Map, Value};

use lightcone::bound::{self, BoundParams};
use lightcone::dynamics::{CommutatorProbe, Evolver, SweepConfig};
use lightcone::model::{build_model, ModelFamily, ModelSpec};
use lightcone::report::{self, Field, RunMeta, Table};
use lightcone::scale::{self, Variant};
use lightcone::seq::{self, FillerRule};

#[derive(Parser)]
#[command(
    name = "lightcone",
    version,
    about = "Rigorous scrambling bounds, combinatorial proof checks, and exact commutator dynamics for 1D power-law spin chains"
)]
struct Cli {
    /// JSON config file; keys are long flag names, flags override.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output path (default: stdout).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Largest operator support diagonalized densely.
    #[arg(long, global = true)]
    dense_cap: Option<usize>,
    /// Enumeration budget (number of sequences).
    #[arg(long, global = true)]
    budget: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Certified scrambling-time bound over a range of distances (CSV).
    Bound {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        /// general | frustrated
        #[arg(long)]
        variant: Option<String>,
        /// Frustration constant in (0, 1] (frustrated variant only).
        #[arg(long = "K")]
        k: Option<f64>,
        #[arg(long)]
        r_min: Option<u64>,
        #[arg(long)]
        r_max: Option<u64>,
    },
    /// Commutator bound curve over time for one distance (CSV).
    Curve {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        variant: Option<String>,
        #[arg(long = "K")]
        k: Option<f64>,
        #[arg(long)]
        r: Option<u64>,
        /// Last grid time (default: the bound's validity horizon).
        #[arg(long)]
        t_max: Option<f64>,
        /// Number of grid intervals.
        #[arg(long)]
        points: Option<usize>,
    },
    /// Dyadic block decomposition at window size R (JSON).
    Decompose {
        #[arg(long = "R")]
        r_size: Option<u64>,
    },
    /// Long-sequence thresholds N_q, M, q* (JSON).
    Thresholds {
        #[arg(long = "R")]
        r_size: Option<u64>,
        #[arg(long)]
        alpha_prime: Option<f64>,
    },
    /// Exhaustive combinatorial checks (JSON).
    Enumerate {
        #[arg(long = "R")]
        r_size: Option<u64>,
        #[arg(long)]
        max_len: Option<usize>,
        #[arg(long)]
        alpha_prime: Option<f64>,
        /// coverage | resummation | counts
        #[arg(long)]
        check: Option<String>,
    },
    /// Empirical scrambling times for one model (CSV).
    Simulate {
        #[command(flatten)]
        sim: SimArgs,
        /// Write a per-t `t,C(t),bound(t)` CSV (requires a single r).
        #[arg(long)]
        emit_curve: Option<PathBuf>,
    },
    /// Empirical-vs-bound comparison across several models (CSV).
    Compare {
        /// Comma-separated families: ising_lr,xx_lr,random_sign_xx
        #[arg(long)]
        models: Option<String>,
        #[command(flatten)]
        sim: SimArgs,
    },
}

#[derive(clap::Args)]
struct SimArgs {
    /// ising_lr | xx_lr | random_sign_xx
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    onsite_x: Option<f64>,
    #[arg(long)]
    onsite_z: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Comma-separated distances, e.g. 2,4,6
    #[arg(long)]
    r_list: Option<String>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
}

/// Usage errors exit 2; runtime/domain errors exit 1.
enum CliErr {
    Usage(String),
    Run(lightcone::Error),
}

impl From<lightcone::Error> for CliErr {
    fn from(e: lightcone::Error) -> Self {
        CliErr::Run(e)
    }
}

type CliResult<T> = Result<T, CliErr>;

/// Flag/config resolution with a record of every resolved value.
struct Ctx {
    cfg: Value,
    resolved: Map<String, Value>,
}

impl Ctx {
    fn new(path: Option<&Path>) -> CliResult<Self> {
        let cfg = match path {
            None => Value::Object(Map::new()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliErr::Usage(format!("cannot read config {}: {e}", p.display())))?;
                let v: Value = serde_json::from_str(&text)
                    .map_err(|e| CliErr::Usage(format!("config is not valid JSON: {e}")))?;
                if !v.is_object() {
                    return Err(CliErr::Usage("config must be a JSON object".into()));
                }
                v
            }
        };
        Ok(Ctx { cfg, resolved: Map::new() })
    }

    fn record(&mut self, key: &str, v: Value) {
        self.resolved.insert(key.to_string(), v);
    }

    fn f64(&mut self, flag: Option<f64>, key: &str) -> Option<f64> {
        let v = flag.or_else(|| self.cfg.get(key).and_then(Value::as_f64));
        if let Some(x) = v {
            self.record(key, json!(x));
        }
        v
    }

    fn req_f64(&mut self, flag: Option<f64>, key: &str) -> CliResult<f64> {
        self.f64(flag, key)
            .ok_or_else(|| CliErr::Usage(format!("missing required --{key}")))
    }

    fn def_f64(&mut self, flag: Option<f64>, key: &str, default: f64) -> f64 {
        self.f64(flag, key).unwrap_or_else(|| {
            self.record(key, json!(default));
            default
        })
    }

    fn u64(&mut self, flag: Option<u64>, key: &str) -> Option<u64> {
        let v = flag.or_else(|| self.cfg.get(key).and_then(Value::as_u64));
        if let Some(x) = v {
            self.record(key, json!(x));
        }
        v
    }

    fn req_u64(&mut self, flag: Option<u64>, key: &str) -> CliResult<u64> {
        self.u64(flag, key)
            .ok_or_else(|| CliErr::Usage(format!("missing required --{key}")))
    }

    fn def_u64(&mut self, flag: Option<u64>, key: &str, default: u64) -> u64 {
        self.u64(flag, key).unwrap_or_else(|| {
            self.record(key, json!(default));
            default
        })
    }

    fn string(&mut self, flag: Option<String>, key: &str) -> Option<String> {
        let v = flag.or_else(|| {
            self.cfg.get(key).and_then(Value::as_str).map(str::to_string)
        });
        if let Some(ref s) = v {
            self.record(key, json!(s));
        }
        v
    }

    fn req_string(&mut self, flag: Option<String>, key: &str) -> CliResult<String> {
        self.string(flag, key)
            .ok_or_else(|| CliErr::Usage(format!("missing required --{key}")))
    }

    fn def_string(&mut self, flag: Option<String>, key: &str, default: &str) -> String {
        self.string(flag, key).unwrap_or_else(|| {
            self.record(key, json!(default));
            default.to_string()
        })
    }

    fn meta(&self) -> RunMeta {
        RunMeta::new(Value::Object(self.resolved.clone()))
    }
}

fn main() -> ExitCode {
    lightcone::exec::init_threads_from_env();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliErr::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
        Err(CliErr::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let mut ctx = Ctx::new(cli.config.as_deref())?;
    let dense_cap = ctx
        .u64(cli.dense_cap.map(|v| v as u64), "dense-cap")
        .map(|v| v as usize)
        .unwrap_or(lightcone::DEFAULT_DENSE_CAP);
    let budget = ctx.def_u64(cli.budget, "budget", lightcone::DEFAULT_ENUM_BUDGET);
    let out = cli.out.as_deref();

    match cli.cmd {
        Cmd::Bound { alpha, h, delta, variant, k, r_min, r_max } => {
            let params = resolve_params(&mut ctx, alpha, h, delta, variant, k)?;
            let r_min = ctx.req_u64(r_min, "r-min")?;
            let r_max = ctx.req_u64(r_max, "r-max")?;
            if r_min > r_max {
                return Err(CliErr::Usage("--r-min must not exceed --r-max".into()));
            }
            ctx.record("subcommand", json!("bound"));
            let cc = bound::case_constants(&params)?;
            let mut table = Table::new(&["r", "R", "regime", "b", "c1", "c2", "ts_bound"]);
            for r in r_min..=r_max {
                let r_q = bound::quantize_r(r)?;
                table.push_row(vec![
                    Field::Int(r),
                    Field::Int(r_q),
                    Field::Str(cc.regime.name().to_string()),
                    Field::Float(cc.b),
                    Field::Float(cc.c1),
                    Field::Float(cc.c2),
                    Field::Float(bound::scrambling_time_bound(r, &params)?),
                ])?;
            }
            emit(out, report::render(&table, report::Format::Csv, &ctx.meta()))
        }
        Cmd::Curve { alpha, h, delta, variant, k, r, t_max, points } => {
            let params = resolve_params(&mut ctx, alpha, h, delta, variant, k)?;
            let r = ctx.req_u64(r, "r")?;
            let horizon = bound::validity_time(r, &params)?;
            let t_max = ctx.def_f64(t_max, "t-max", horizon);
            let points = ctx.def_u64(points.map(|v| v as u64), "points", 200) as usize;
            if points == 0 || !(t_max > 0.0) {
                return Err(CliErr::Usage("--points and --t-max must be positive".into()));
            }
            ctx.record("subcommand", json!("curve"));
            let mut table = Table::new(&["t", "bound"]);
            for i in 0..=points {
                let t = t_max * i as f64 / points as f64;
                let (v, _) = bound::commutator_bound_curve(r, t, &params)?;
                table.push_row(vec![Field::Float(t), Field::Float(v)])?;
            }
            emit(out, report::render(&table, report::Format::Csv, &ctx.meta()))
        }
        Cmd::Decompose { r_size } => {
            let r_size = ctx.req_u64(r_size, "R")?;
            ctx.record("subcommand", json!("decompose"));
            let blocks = scale::abstract_blocks(r_size)?;
            let body = json!({
                "R": r_size,
                "blocks": blocks
                    .iter()
                    .map(|(q, k, members)| json!({"q": q, "k": k, "members": members}))
                    .collect::<Vec<_>>(),
            });
            emit(out, report::render_json_document(body, &ctx.meta()))
        }
        Cmd::Thresholds { r_size, alpha_prime } => {
            let r_size = ctx.req_u64(r_size, "R")?;
            let ap = ctx.req_f64(alpha_prime, "alpha-prime")?;
            ctx.record("subcommand", json!("thresholds"));
            let th = scale::long_thresholds(ap, r_size)?;
            let body = json!({
                "R": r_size,
                "alpha_prime": ap,
                "n": th.n,
                "m": th.m,
                "q_star": th.q_star,
                "slack": th.slack().to_string(),
            });
            emit(out, report::render_json_document(body, &ctx.meta()))
        }
        Cmd::Enumerate { r_size, max_len, alpha_prime, check } => {
            let r_size = ctx.req_u64(r_size, "R")?;
            let max_len = ctx.req_u64(max_len.map(|v| v as u64), "max-len")? as usize;
            let ap = ctx.req_f64(alpha_prime, "alpha-prime")?;
            let check = ctx.req_string(check, "check")?;
            ctx.record("subcommand", json!("enumerate"));
            let th = scale::long_thresholds(ap, r_size)?;
            let body = match check.as_str() {
                "coverage" => {
                    let rep = seq::verify_coverage(r_size, max_len, &th, budget)?;
                    json!({"checked": rep.checked, "counterexamples": rep.counterexamples})
                }
                "resummation" => {
                    let n_star = 63 - r_size.leading_zeros();
                    let mut checked = 0u64;
                    let mut counterexamples: Vec<Value> = Vec::new();
                    for q in 1..=n_star {
                        let rep = seq::verify_resummation(
                            r_size, q, max_len, &th, FillerRule::GapRule, budget,
                        )?;
                        checked += rep.checked;
                        for s in rep.double_counted {
                            counterexamples.push(json!({"q": q, "kind": "double", "seq": s}));
                        }
                        for s in rep.mismatched {
                            counterexamples.push(json!({"q": q, "kind": "mismatch", "seq": s}));
                        }
                    }
                    json!({"checked": checked, "counterexamples": counterexamples})
                }
                "counts" => {
                    let rep = seq::verify_counts(r_size, (max_len as u64).min(4))?;
                    json!({"checked": rep.checked, "counterexamples": rep.counterexamples})
                }
                other => {
                    return Err(CliErr::Usage(format!(
                        "unknown --check '{other}' (expected coverage, resummation, or counts)"
                    )))
                }
            };
            emit(out, report::render_json_document(body, &ctx.meta()))
        }
        Cmd::Simulate { sim, emit_curve } => {
            let (spec, delta, r_list, config) = resolve_sim(&mut ctx, sim, dense_cap)?;
            ctx.record("subcommand", json!("simulate"));
            let cs = build_model(&spec)?;
            if let Some(curve_path) = emit_curve {
                if r_list.len() != 1 {
                    return Err(CliErr::Usage("--emit-curve requires exactly one r".into()));
                }
                write_curve(&curve_path, &cs, r_list[0], delta, &config, &ctx.meta())?;
            }
            let records = lightcone::dynamics::lightcone_sweep(
                std::slice::from_ref(&cs),
                &r_list,
                delta,
                &config,
            )?;
            let table = report::lightcone_table(&records);
            emit(out, report::render(&table, report::Format::Csv, &ctx.meta()))
        }
        Cmd::Compare { models, sim } => {
            let models = ctx.req_string(models, "models")?;
            let (base, delta, r_list, config) = resolve_sim_base(&mut ctx, sim, dense_cap)?;
            ctx.record("subcommand", json!("compare"));
            let mut sets = Vec::new();
            for name in models.split(',') {
                let family = ModelFamily::parse(name.trim())?;
                let spec = ModelSpec { family, ..base.clone() };
                sets.push(build_model(&spec)?);
            }
            let records = lightcone::dynamics::lightcone_sweep(&sets, &r_list, delta, &config)?;
            let table = report::lightcone_table(&records);
            emit(out, report::render(&table, report::Format::Csv, &ctx.meta()))
        }
    }
}

fn resolve_params(
    ctx: &mut Ctx,
    alpha: Option<f64>,
    h: Option<f64>,
    delta: Option<f64>,
    variant: Option<String>,
    k: Option<f64>,
) -> CliResult<BoundParams> {
    let alpha = ctx.req_f64(alpha, "alpha")?;
    let h = ctx.req_f64(h, "h")?;
    let delta = ctx.req_f64(delta, "delta")?;
    let variant_name = ctx.def_string(variant, "variant", "general");
    let variant = match variant_name.as_str() {
        "general" => Variant::General,
        "frustrated" => {
            let k = ctx.def_f64(k, "K", 1.0);
            Variant::Frustrated { k }
        }
        other => {
            return Err(CliErr::Usage(format!(
                "unknown --variant '{other}' (expected general or frustrated)"
            )))
        }
    };
    Ok(BoundParams::new(alpha, h, delta, variant)?)
}

type SimResolved = (ModelSpec, f64, Vec<u64>, SweepConfig);

fn resolve_sim(ctx: &mut Ctx, sim: SimArgs, dense_cap: usize) -> CliResult<SimResolved> {
    let model = ctx.req_string(sim.model.clone(), "model")?;
    let (mut spec, delta, r_list, config) = resolve_sim_base(ctx, sim, dense_cap)?;
    spec.family = ModelFamily::parse(&model)?;
    Ok((spec, delta, r_list, config))
}

fn resolve_sim_base(ctx: &mut Ctx, sim: SimArgs, dense_cap: usize) -> CliResult<SimResolved> {
    let alpha = ctx.req_f64(sim.alpha, "alpha")?;
    let n = ctx.req_u64(sim.n.map(|v| v as u64), "n")? as usize;
    let h = ctx.def_f64(sim.h, "h", 1.0);
    let onsite_x = ctx.def_f64(sim.onsite_x, "onsite-x", 1.0);
    let onsite_z = ctx.def_f64(sim.onsite_z, "onsite-z", 0.5);
    let seed = ctx.def_u64(sim.seed, "seed", 0);
    let delta = ctx.req_f64(sim.delta, "delta")?;
    let r_text = ctx.req_string(sim.r_list, "r-list")?;
    let r_list: Vec<u64> = r_text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| CliErr::Usage(format!("invalid r '{s}' in --r-list")))
        })
        .collect::<CliResult<_>>()?;
    if r_list.is_empty() {
        return Err(CliErr::Usage("--r-list must be nonempty".into()));
    }
    let t_max = ctx.def_f64(sim.t_max, "t-max", 10.0);
    let dt = ctx.def_f64(sim.dt, "dt", 0.25);
    if !(t_max > 0.0 && dt > 0.0) {
        return Err(CliErr::Usage("--t-max and --dt must be positive".into()));
    }
    let spec = ModelSpec {
        family: ModelFamily::IsingLr, // replaced by the caller
        n_sites: n,
        alpha,
        h,
        onsite_x,
        onsite_z,
        seed,
    };
    let config = SweepConfig { t_max, dt, dense_cap, ..Default::default() };
    Ok((spec, delta, r_list, config))
}

/// Per-t `t,C(t),bound(t)` CSV for a single distance.
fn write_curve(
    path: &Path,
    cs: &lightcone::model::CouplingSet,
    r: u64,
    delta: f64,
    config: &SweepConfig,
    meta: &RunMeta,
) -> CliResult<()> {
    let params = BoundParams::new(cs.spec.alpha, cs.spec.h, delta, Variant::General)?;
    let ev = Evolver::new(cs, config.dense_cap)?;
    let probe = CommutatorProbe::new(&ev, 0, r as usize, &config.a_basis, &config.b_basis)?;
    let mut table = Table::new(&["t", "C(t)", "bound(t)"]);
    let steps = (config.t_max / config.dt).round() as usize;
    for i in 0..=steps {
        let t = i as f64 * config.dt;
        let (b, _) = bound::commutator_bound_curve(r, t, &params)?;
        table.push_row(vec![
            Field::Float(t),
            Field::Float(probe.c_of_t(t)?),
            Field::Float(b),
        ])?;
    }
    report::write_output(Some(path), &report::render(&table, report::Format::Csv, meta))?;
    Ok(())
}

fn emit(out: Option<&Path>, content: String) -> CliResult<()> {
    report::write_output(out, &content)?;
    Ok(())
}
