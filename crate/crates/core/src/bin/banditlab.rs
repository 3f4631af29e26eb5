use std::io::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use banditlab::al_abstain::{eluder_al_run, epoch_al_run, mis_al_run, AlInstance};
use banditlab::benchmark::{chow_excess, AlPool};
use banditlab::harness::{gen_instance, par_trials, reflection_class, run_experiment, ExperimentConfig, InstanceKind, Params};
use banditlab::pe_select::{
    adaptive_fb_run, adaptive_fc_run, fw_optimal_design, pairwise_directions, round_design, DesignProblem, FcConfig,
    FcMode,
};
use banditlab::spanner::{barycentric_spanner, Exhaustive};
use banditlab::{seeded, Instance};

#[derive(Parser)]
#[command(name = "banditlab", version, about = "Bandit model selection, large-action contextual bandits and active learning with abstention")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Flat `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trials: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a regret, pure-exploration or active learning experiment to long-format CSV.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        algo: Option<String>,
        /// Generated instance kind (multiple_best, caption, intrinsic_dim, hard, duplicated, al_lower_bound, massart).
        #[arg(long)]
        instance: Option<String>,
        /// Instance file instead of a generated instance.
        #[arg(long)]
        instance_path: Option<PathBuf>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long = "T")]
        horizon: Option<u64>,
        /// Extra `key=value` parameters.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
    /// Spanners and optimal designs for an instance file.
    Design {
        #[command(subcommand)]
        what: DesignCmd,
    },
    /// Best-arm identification on an instance file.
    Purex {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum, default_value = "fc")]
        mode: PurexMode,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        /// Total sample budget (fb) or sample cap (fc).
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Active learning with abstention on a pool file of `weight eta` lines.
    Al {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        pool: PathBuf,
        /// Class file, one member per line as space-separated values; defaults to
        /// η plus its single-point reflections.
        #[arg(long)]
        class: Option<PathBuf>,
        #[arg(long, default_value_t = 0.1)]
        gamma: f64,
        #[arg(long, default_value_t = 0.01)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        #[arg(long, value_enum, default_value = "epoch")]
        algo: AlAlgo,
        /// Horizon for the eluder variant.
        #[arg(long = "T", default_value_t = 1 << 14)]
        horizon: u64,
    },
    /// Write a generated instance in its text format.
    Gen {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        kind: String,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
    },
}

#[derive(Subcommand)]
enum DesignCmd {
    /// Barycentric spanner of the actions.
    Spanner {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long = "C", default_value_t = 2.0)]
        c: f64,
    },
    /// Optimal design over pairwise target differences, with an optional rounding.
    Optimal {
        #[arg(long)]
        instance: PathBuf,
        /// Truncation dimension; full dimension when absent.
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long, default_value_t = 1.0)]
        zeta: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PurexMode {
    Fc,
    Fb,
    FcRobust,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlAlgo {
    Epoch,
    Eluder,
    Mis,
}

fn parse_sets(sets: &[String], params: &mut Params) -> Result<()> {
    for kv in sets {
        let (k, v) = kv.split_once('=').with_context(|| format!("expected KEY=VALUE, got `{kv}`"))?;
        params.set(k.trim(), v.trim());
    }
    Ok(())
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn load_config(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(t) = common.trials {
        cfg.trials = t;
    }
    if common.out.is_some() {
        cfg.out = common.out.clone();
    }
    Ok(cfg)
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Run { common, algo, instance, instance_path, beta, horizon, set } => {
            let mut cfg = load_config(&common)?;
            if let Some(a) = algo {
                cfg.algo = a.replace('-', "_");
            }
            if let Some(k) = instance {
                cfg.kind = Some(k.parse::<InstanceKind>()?);
                cfg.instance_path = None;
            }
            if let Some(p) = instance_path {
                cfg.instance_path = Some(p);
                cfg.kind = None;
            }
            if let Some(b) = beta {
                cfg.params.set("beta", b);
            }
            if let Some(h) = horizon {
                cfg.horizon = h;
            }
            parse_sets(&set, &mut cfg.params)?;
            let table = run_experiment(&cfg)?;
            emit(cfg.out.as_ref(), &table.to_csv()?)
        }
        Cmd::Design { what } => design(what),
        Cmd::Purex { common, instance, mode, delta, budget } => {
            let inst = Instance::load(&instance)?;
            let seed = common.seed.unwrap_or(0);
            let trials = common.trials.unwrap_or(1);
            let best = inst.best_target();
            let rows = par_trials(trials, |tr| {
                let mut rng = seeded(seed ^ tr);
                let mut rows = Vec::new();
                match mode {
                    PurexMode::Fb => {
                        let total = budget.unwrap_or(400_000);
                        let o = adaptive_fb_run(&inst, total, &mut rng)?;
                        rows.push((tr, o.subroutines as u64, o.samples, o.arm, o.arm == best));
                    }
                    PurexMode::Fc | PurexMode::FcRobust => {
                        let m = if matches!(mode, PurexMode::Fc) { FcMode::Exact } else { FcMode::Robust };
                        let mut cfg = FcConfig::new(delta, m);
                        if let Some(b) = budget {
                            cfg.cap = b;
                        }
                        let t = adaptive_fc_run(&inst, &cfg, &mut rng)?;
                        if let Some(a) = t.initial {
                            rows.push((tr, 0, 0, a, a == best));
                        }
                        for r in &t.updates {
                            rows.push((tr, r.phase as u64, r.samples, r.arm, r.arm == best));
                        }
                    }
                }
                Ok(rows)
            })?;
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["trial", "phase", "samples", "recommended", "correct"])?;
            for (tr, ph, s, a, ok) in rows.into_iter().flatten() {
                w.write_record([tr.to_string(), ph.to_string(), s.to_string(), a.to_string(), (ok as u8).to_string()])?;
            }
            emit(common.out.as_ref(), &String::from_utf8(w.into_inner()?)?)
        }
        Cmd::Al { common, pool, class, gamma, epsilon, delta, algo, horizon } => {
            let pool = AlPool::parse(&std::fs::read_to_string(&pool)?)?;
            let inst = match class {
                Some(p) => {
                    let text = std::fs::read_to_string(&p)?;
                    let members = text
                        .lines()
                        .map(str::trim)
                        .filter(|l| !l.is_empty() && !l.starts_with('#'))
                        .map(|l| l.split_whitespace().map(str::parse::<f64>).collect::<Result<Vec<_>, _>>())
                        .collect::<Result<Vec<_>, _>>()?;
                    let kappa = AlInstance { pool: pool.clone(), class: members.clone(), kappa: 0.0 }.best_approximation().1;
                    AlInstance::new(pool, members, kappa)?
                }
                None => reflection_class(&pool)?,
            };
            let mut rng = seeded(common.seed.unwrap_or(0));
            let (history, rounds, labels, excess) = match algo {
                AlAlgo::Eluder => {
                    let o = eluder_al_run(&inst, horizon, gamma, delta, &mut rng)?;
                    (o.history, o.rounds, o.labels, o.mixture.chow_excess(&inst.pool, gamma)?)
                }
                AlAlgo::Epoch | AlAlgo::Mis => {
                    let o = if matches!(algo, AlAlgo::Epoch) {
                        epoch_al_run(&inst, epsilon, gamma, delta, &mut rng)?
                    } else {
                        mis_al_run(&inst, epsilon, gamma, delta, &mut rng)?
                    };
                    let ex = chow_excess(&o.classifier, &inst.pool, gamma)?;
                    (o.history, o.rounds, o.labels, ex)
                }
            };
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["round", "queried", "chow_excess_running"])?;
            for h in &history {
                w.write_record([h.round.to_string(), h.labels.to_string(), h.chow_excess.to_string()])?;
            }
            w.write_record([rounds.to_string(), labels.to_string(), excess.to_string()])?;
            emit(common.out.as_ref(), &String::from_utf8(w.into_inner()?)?)
        }
        Cmd::Gen { common, kind, set } => {
            let kind: InstanceKind = kind.parse()?;
            let mut params = match &common.config {
                Some(p) => ExperimentConfig::load(p)?.params,
                None => Params::default(),
            };
            parse_sets(&set, &mut params)?;
            let g = gen_instance(kind, &params, &mut seeded(common.seed.unwrap_or(0)))?;
            emit(common.out.as_ref(), &g.to_text())
        }
    }
}

fn design(what: DesignCmd) -> Result<()> {
    match what {
        DesignCmd::Spanner { instance, c } => {
            let inst = Instance::load(&instance)?;
            let s = barycentric_spanner(&Exhaustive::new(inst.actions()), c)?;
            let members: Vec<String> = s.members.iter().map(|m| m.to_string()).collect();
            println!("members {}", members.join(" "));
            println!("abs_det {}", s.det.abs());
            println!("max_coefficient {}", s.max_coefficient(inst.actions().iter().map(Vec::as_slice)));
        }
        DesignCmd::Optimal { instance, dim, budget, zeta } => {
            let inst = Instance::load(&instance)?;
            let d = dim.unwrap_or(inst.dim());
            if d == 0 || d > inst.dim() {
                bail!("dim must lie in [1, {}]", inst.dim());
            }
            let all: Vec<usize> = (0..inst.num_targets()).collect();
            let dirs = pairwise_directions(inst.targets(), &all, d);
            if dirs.is_empty() {
                bail!("all targets coincide in the first {d} coordinates");
            }
            let acts = inst.actions().iter().map(|x| x[..d].to_vec()).collect();
            let problem = DesignProblem::new(acts, dirs);
            let des = fw_optimal_design(&problem)?;
            println!("value {}", des.value);
            println!("iterations {}", des.iterations);
            for (i, l) in des.lambda.iter().enumerate().filter(|(_, l)| **l > 0.0) {
                println!("lambda {i} {l}");
            }
            if let Some(n) = budget {
                let a = round_design(&problem, &des, n, zeta)?;
                println!("rounded_value {} certified {}", a.value, a.certified);
                for (i, c) in a.counts.iter().enumerate().filter(|(_, c)| **c > 0) {
                    println!("pulls {i} {c}");
                }
            }
        }
    }
    Ok(())
}
