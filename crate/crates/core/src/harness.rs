//! Instance generators, the seeded experiment runner and summary metrics.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;

use crate::al_abstain::{
    epoch_al_run, eluder_al_run, massart_pool, mis_al_run, noise_seeking_pool, uncertainty_al_run, AlConstants,
    AlInstance, AlStep,
};
use crate::benchmark::AlPool;
use crate::error::{invalid, Error, Result};
use crate::instance::{Instance, Noise, RunRecord};
use crate::ms_regret::{
    linear_ball_instance, linucb_run, linucbpp_corral_run, linucbpp_run, moss_run, mosspp_run, multiple_best_arms,
    parallel_run, Arms, LinUcbConfig, Variant,
};
use crate::pe_select::{adaptive_fb_run, adaptive_fc_run, gems_fb_run, hard_instance, rage_run, FcConfig, FcMode, FcTrace};
use crate::{seeded, Rng};

/// Default sample cap for fixed-confidence runs.
pub const SUCCESS_CAP: u64 = 10_000_000;
/// Cap charged to runs that never settle.
pub const FAILURE_CAP: u64 = 20_000_000;

/// String parameters with typed lookups.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Params(pub BTreeMap<String, String>);

impl Params {
    pub fn set(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.0.insert(key.to_string(), value.to_string());
        self
    }

    pub fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.0.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad value `{v}` for `{key}`"))),
        }
    }

    pub fn str(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn noise(&self) -> Result<Noise> {
        match self.str("noise").unwrap_or("gaussian") {
            "gaussian" => Ok(Noise::Gaussian { sigma: self.get("sigma", 1.0)? }),
            "bernoulli" => Ok(Noise::Bernoulli),
            other => invalid(format!("unknown noise `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceKind {
    /// n Bernoulli arms with m = ⌈n/(2T^α)⌉ best arms.
    MultipleBest,
    /// Caption-contest shaped: m arms at `best`, the rest uniform on [lo, hi].
    CaptionLike,
    /// K arms in the unit ball with θ* supported on the first d* coordinates.
    IntrinsicDim,
    /// The pure-exploration hard instance.
    Hard,
    /// An intrinsic-dimension instance with its last action repeated.
    Duplicated,
    /// Two-point active learning pool with a noisy hard point.
    AlLowerBound,
    /// Threshold pool with Massart noise.
    Massart,
}

impl FromStr for InstanceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "multiple_best" => InstanceKind::MultipleBest,
            "caption" => InstanceKind::CaptionLike,
            "intrinsic_dim" => InstanceKind::IntrinsicDim,
            "hard" => InstanceKind::Hard,
            "duplicated" => InstanceKind::Duplicated,
            "al_lower_bound" => InstanceKind::AlLowerBound,
            "massart" => InstanceKind::Massart,
            other => return invalid(format!("unknown instance kind `{other}`")),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Generated {
    Arms(Arms),
    Linear(Instance),
    Al(AlInstance),
}

impl Generated {
    pub fn to_text(&self) -> String {
        match self {
            Generated::Linear(inst) => inst.to_text(),
            Generated::Arms(arms) => {
                let mut s = format!("# {} arms, {:?} noise, one mean per line\n", arms.len(), arms.noise);
                for m in &arms.means {
                    let _ = writeln!(s, "{m}");
                }
                s
            }
            Generated::Al(al) => {
                let mut s = String::new();
                for (w, e) in al.pool.weights.iter().zip(&al.pool.eta) {
                    let _ = writeln!(s, "{w} {e}");
                }
                s
            }
        }
    }
}

/// Builds an instance of `kind`. Keys: n, m, alpha, horizon, best, lo, hi, d, k,
/// dstar, sigma, noise, eps, copies, budget, step, cuts.
pub fn gen_instance(kind: InstanceKind, params: &Params, rng: &mut Rng) -> Result<Generated> {
    let p = params;
    Ok(match kind {
        InstanceKind::MultipleBest => {
            Generated::Arms(multiple_best_arms(p.get("n", 2000)?, p.get("alpha", 0.25)?, p.get("horizon", 1 << 18)?, rng)?)
        }
        InstanceKind::CaptionLike => {
            let n: usize = p.get("n", 2000)?;
            let m: usize = p.get("m", 11)?;
            let (best, lo, hi) = (p.get("best", 1.0)?, p.get("lo", 0.0)?, p.get("hi", 0.8)?);
            if m == 0 || m > n {
                return invalid(format!("need 0 < m <= n, got m={m}, n={n}"));
            }
            if !(lo <= hi && hi < best) {
                return invalid("need lo <= hi < best");
            }
            let mut means: Vec<f64> =
                (0..n).map(|i| if i < m { best } else { lo + (hi - lo) * rng.random::<f64>() }).collect();
            means.shuffle(rng);
            Generated::Arms(Arms::new(means, Noise::Bernoulli)?)
        }
        InstanceKind::IntrinsicDim | InstanceKind::Duplicated => {
            let inst = linear_ball_instance(
                p.get("d", 120)?,
                p.get("k", 240)?,
                p.get("dstar", 12)?,
                p.get("sigma", 1.0)?,
                rng,
            )?;
            let copies = if kind == InstanceKind::Duplicated { p.get("copies", 16)? } else { 0 };
            Generated::Linear(inst.with_duplicated_last(copies))
        }
        InstanceKind::Hard => Generated::Linear(hard_instance(p.get("dstar", 9)?, p.get("eps", 1e-3)?, p.noise()?)?),
        InstanceKind::AlLowerBound => Generated::Al(noise_seeking_pool(
            p.get("budget", 1000.0)?,
            p.get("step", 0.25)?,
            p.get("positive", true)?,
        )?),
        InstanceKind::Massart => Generated::Al(massart_pool(
            p.get("n", 200)?,
            p.get("cuts", 20)?,
            p.get("lo", 0.1)?,
            p.get("hi", 0.9)?,
            rng,
        )?),
    })
}

/// Realizable class for a bare pool: η itself plus, for each point, η with
/// that point reflected to 1 − η(x).
pub fn reflection_class(pool: &AlPool) -> Result<AlInstance> {
    let mut class = vec![pool.eta.clone()];
    for x in 0..pool.len() {
        let mut f = pool.eta.clone();
        f[x] = 1.0 - f[x];
        if !class.contains(&f) {
            class.push(f);
        }
    }
    AlInstance::new(pool.clone(), class, 0.0)
}

/// Parsed `key = value` experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub algo: String,
    pub kind: Option<InstanceKind>,
    /// Instance file (linear format) or pool file (`weight eta` lines) for AL algorithms.
    pub instance_path: Option<PathBuf>,
    pub trials: u64,
    pub seed: u64,
    pub horizon: u64,
    pub out: Option<PathBuf>,
    /// Everything else, passed to the generator and the algorithm.
    pub params: Params,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            algo: "moss".into(),
            kind: Some(InstanceKind::MultipleBest),
            instance_path: None,
            trials: 1,
            seed: 0,
            horizon: 1000,
            out: None,
            params: Params::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or(Error::Parse { line: i + 1, msg: "expected `key = value`".into() })?;
            let (k, v) = (k.trim(), v.trim());
            let bad = |what: &str| Error::Parse { line: i + 1, msg: format!("bad {what} `{v}`") };
            match k {
                "algo" => cfg.algo = v.to_string(),
                "instance" => cfg.kind = Some(v.parse().map_err(|_| bad("instance kind"))?),
                "instance_path" => {
                    cfg.instance_path = Some(PathBuf::from(v));
                    cfg.kind = None;
                }
                "trials" => cfg.trials = v.parse().map_err(|_| bad("trial count"))?,
                "seed" => cfg.seed = v.parse().map_err(|_| bad("seed"))?,
                "horizon" => cfg.horizon = v.parse().map_err(|_| bad("horizon"))?,
                "out" => cfg.out = Some(PathBuf::from(v)),
                _ => {
                    cfg.params.set(k, v);
                }
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref()).map_err(|e| Error::Io(e.to_string()))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return invalid("trials must be at least 1");
        }
        if self.horizon == 0 {
            return invalid("horizon must be at least 1");
        }
        if self.kind.is_none() && self.instance_path.is_none() {
            return invalid("no instance given");
        }
        Ok(())
    }

    /// Trial seed: configured seed XOR trial index.
    pub fn trial_seed(&self, trial: u64) -> u64 {
        self.seed ^ trial
    }

    fn instance(&self, rng: &mut Rng) -> Result<Generated> {
        if let Some(path) = &self.instance_path {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io(e.to_string()))?;
            return if AL_ALGOS.contains(&self.algo.as_str()) {
                Ok(Generated::Al(reflection_class(&AlPool::parse(&text)?)?))
            } else {
                Ok(Generated::Linear(Instance::parse(&text)?))
            };
        }
        let mut params = self.params.clone();
        if !params.0.contains_key("horizon") {
            params.set("horizon", self.horizon);
        }
        gen_instance(self.kind.expect("validated"), &params, rng)
    }
}

pub const REGRET_ALGOS: &[&str] =
    &["moss", "mosspp", "empmosspp", "parallel", "linucb", "linucbpp", "linucbpp_corral"];
pub const PUREX_ALGOS: &[&str] = &["adaptive_fc", "rage", "gems_fb", "adaptive_fb"];
pub const AL_ALGOS: &[&str] = &["epoch", "eluder", "mis", "uncertainty"];

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    /// `None` marks a summary row aggregated over trials.
    pub trial: Option<u64>,
    pub t: u64,
    pub metric: String,
    pub value: f64,
}

/// Long-format metric rows with `#` metadata lines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricTable {
    pub meta: Vec<(String, String)>,
    pub rows: Vec<Row>,
}

impl MetricTable {
    pub fn push(&mut self, trial: Option<u64>, t: u64, metric: &str, value: f64) {
        self.rows.push(Row { trial, t, metric: metric.to_string(), value });
    }

    /// Values of `metric` in trial order, one per trial, at the largest t recorded.
    pub fn finals(&self, metric: &str) -> Vec<f64> {
        let mut last: BTreeMap<u64, (u64, f64)> = BTreeMap::new();
        for r in self.rows.iter().filter(|r| r.metric == metric) {
            if let Some(tr) = r.trial {
                let e = last.entry(tr).or_insert((r.t, r.value));
                if r.t >= e.0 {
                    *e = (r.t, r.value);
                }
            }
        }
        last.into_values().map(|(_, v)| v).collect()
    }

    /// Appends `<metric>_mean`, `_lo` and `_hi` rows (mean ± ½ std) for every t
    /// at which all trials report `metric`.
    pub fn add_bands(&mut self, metric: &str) {
        let trials: std::collections::BTreeSet<u64> =
            self.rows.iter().filter(|r| r.metric == metric).filter_map(|r| r.trial).collect();
        let mut by_t: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
        for r in self.rows.iter().filter(|r| r.metric == metric && r.trial.is_some()) {
            by_t.entry(r.t).or_default().push(r.value);
        }
        for (t, vals) in by_t {
            if vals.len() != trials.len() {
                continue;
            }
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
            self.push(None, t, &format!("{metric}_mean"), mean);
            self.push(None, t, &format!("{metric}_lo"), mean - 0.5 * sd);
            self.push(None, t, &format!("{metric}_hi"), mean + 0.5 * sd);
        }
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut head = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(head, "# {k}={v}");
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["trial", "t", "metric", "value"]).map_err(io)?;
        for r in &self.rows {
            let trial = r.trial.map_or("all".to_string(), |t| t.to_string());
            w.write_record([trial, r.t.to_string(), r.metric.clone(), format!("{}", r.value)]).map_err(io)?;
        }
        let body = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        Ok(head + &String::from_utf8(body).map_err(|e| Error::Io(e.to_string()))?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path.as_ref(), self.to_csv()?).map_err(|e| Error::Io(e.to_string()))
    }
}

/// Worker count from `BANDITLAB_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var("BANDITLAB_THREADS").ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Runs `f` over trials 0..n in parallel and returns results in trial order.
pub fn par_trials<T, F>(n: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(k) = thread_cap() {
        b = b.num_threads(k);
    }
    let pool = b.build().map_err(|e| Error::Io(e.to_string()))?;
    pool.install(|| (0..n).into_par_iter().map(&f).collect())
}

/// Rounds at which cumulative quantities are recorded: every `every` rounds and the last.
fn record_at(t: u64, horizon: u64, every: u64) -> bool {
    t == horizon || t % every == 0
}

fn regret_rows(records: &[RunRecord], mean: &dyn Fn(usize) -> f64, every: u64, out: &mut Vec<(u64, &'static str, f64)>) {
    let mut cum = 0.0;
    let n = records.len() as u64;
    for (i, r) in records.iter().enumerate() {
        cum += r.benchmark - mean(r.action);
        let t = i as u64 + 1;
        if record_at(t, n, every) {
            out.push((t, "regret", cum));
        }
    }
}

fn fc_rows(trace: &FcTrace, best: usize, out: &mut Vec<(u64, &'static str, f64)>) {
    if let Some(a) = trace.initial {
        out.push((0, "recommended", a as f64));
    }
    for r in &trace.updates {
        out.push((r.samples, "recommended", r.arm as f64));
    }
    let ok = trace.current() == Some(best);
    out.push((trace.samples, "correct", if ok { 1.0 } else { 0.0 }));
    out.push((trace.samples, "tau", trace.tau(best).unwrap_or(FAILURE_CAP) as f64));
}

fn al_rows(history: &[AlStep], labels: u64, rounds: u64, excess: f64, out: &mut Vec<(u64, &'static str, f64)>) {
    for h in history {
        out.push((h.round, "labels", h.labels as f64));
        out.push((h.round, "chow_excess", h.chow_excess));
    }
    out.push((rounds, "labels", labels as f64));
    out.push((rounds, "chow_excess", excess));
}

fn linear(g: &Generated) -> Result<&Instance> {
    match g {
        Generated::Linear(i) => Ok(i),
        _ => invalid("algorithm needs a linear instance"),
    }
}

fn arms(g: &Generated) -> Result<Arms> {
    match g {
        Generated::Arms(a) => Ok(a.clone()),
        Generated::Linear(i) => Arms::from_instance(i),
        Generated::Al(_) => invalid("algorithm needs a bandit instance"),
    }
}

fn al(g: &Generated) -> Result<&AlInstance> {
    match g {
        Generated::Al(a) => Ok(a),
        _ => invalid("algorithm needs an active learning pool"),
    }
}

/// One trial of `cfg`: (t, metric, value) triples in emission order.
pub fn run_trial(cfg: &ExperimentConfig, trial: u64) -> Result<Vec<(u64, &'static str, f64)>> {
    let mut rng = seeded(cfg.trial_seed(trial));
    let inst = cfg.instance(&mut rng)?;
    let p = &cfg.params;
    let h = cfg.horizon;
    let hz = usize::try_from(h).map_err(|_| Error::InvalidArgument("horizon too large".into()))?;
    let every: u64 = p.get("every", (h / 100).max(1))?;
    let beta: f64 = p.get("beta", 0.5)?;
    let delta: f64 = p.get("delta", 0.05)?;
    let lin_cfg = LinUcbConfig { lambda: p.get("lambda", 1.0)?, delta };
    let mut out = Vec::new();
    match cfg.algo.as_str() {
        "moss" | "mosspp" | "empmosspp" | "parallel" => {
            let a = arms(&inst)?;
            let recs = match cfg.algo.as_str() {
                "moss" => moss_run(&a, hz, &mut rng)?,
                "mosspp" => mosspp_run(&a, hz, beta, Variant::Vanilla, &mut rng)?,
                "empmosspp" => mosspp_run(&a, hz, beta, Variant::Empirical, &mut rng)?,
                _ => parallel_run(&a, hz, p.get("mu_star", a.best())?, &mut rng)?,
            };
            regret_rows(&recs, &|i| a.means[i], every, &mut out);
        }
        "linucb" | "linucbpp" | "linucbpp_corral" => {
            let li = linear(&inst)?;
            let recs = match cfg.algo.as_str() {
                "linucb" => linucb_run(li, hz, lin_cfg, &mut rng)?,
                "linucbpp" => linucbpp_run(li, hz, beta, lin_cfg, &mut rng)?,
                _ => linucbpp_corral_run(li, hz, beta, lin_cfg, &mut rng)?,
            };
            regret_rows(&recs, &|i| li.mean(i), every, &mut out);
        }
        "adaptive_fc" | "rage" => {
            let li = linear(&inst)?;
            let cap: u64 = p.get("cap", SUCCESS_CAP)?;
            let trace = if cfg.algo == "rage" {
                rage_run(li, delta, cap, None, &mut rng)?
            } else {
                let mode = match p.str("mode").unwrap_or("exact") {
                    "exact" => FcMode::Exact,
                    "robust" => FcMode::Robust,
                    m => return invalid(format!("unknown mode `{m}`")),
                };
                let mut fc = FcConfig::new(delta, mode);
                fc.cap = cap;
                fc.epsilon = p.get("epsilon", fc.epsilon)?;
                adaptive_fc_run(li, &fc, &mut rng)?
            };
            fc_rows(&trace, li.best_target(), &mut out);
        }
        "gems_fb" => {
            let li = linear(&inst)?;
            let n: usize = p.get("rounds", li.num_targets().max(2).ilog2() as usize + 1)?;
            let budget: f64 = p.get("budget", 64.0 * 2.0 * li.dstar() as f64)?;
            let o = gems_fb_run(li, h as f64, n, budget, &mut rng)?;
            let ok = o.pick == li.best_target();
            out.push((h, "correct", if ok { 1.0 } else { 0.0 }));
        }
        "adaptive_fb" => {
            let li = linear(&inst)?;
            let o = adaptive_fb_run(li, h, &mut rng)?;
            out.push((h, "correct", if o.arm == li.best_target() { 1.0 } else { 0.0 }));
            out.push((h, "samples", o.samples as f64));
        }
        "epoch" | "mis" | "uncertainty" => {
            let a = al(&inst)?;
            let (eps, gamma): (f64, f64) = (p.get("epsilon", 0.01)?, p.get("gamma", 0.1)?);
            let o = match cfg.algo.as_str() {
                "epoch" => epoch_al_run(a, eps, gamma, delta, &mut rng)?,
                "mis" => mis_al_run(a, eps, gamma, delta, &mut rng)?,
                _ => uncertainty_al_run(a, eps, gamma, delta, AlConstants::default(), &mut rng)?,
            };
            let ex = crate::benchmark::chow_excess(&o.classifier, &a.pool, gamma)?;
            al_rows(&o.history, o.labels, o.rounds, ex, &mut out);
        }
        "eluder" => {
            let a = al(&inst)?;
            let gamma: f64 = p.get("gamma", 0.1)?;
            let o = eluder_al_run(a, h, gamma, delta, &mut rng)?;
            let ex = o.mixture.chow_excess(&a.pool, gamma)?;
            al_rows(&o.history, o.labels, o.rounds, ex, &mut out);
        }
        other => return invalid(format!("unknown algorithm `{other}`")),
    }
    Ok(out)
}

/// Runs every trial of `cfg` and merges the rows in trial order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<MetricTable> {
    cfg.validate()?;
    let per = par_trials(cfg.trials, |tr| run_trial(cfg, tr))?;
    let mut table = MetricTable::default();
    table.meta.push(("algo".into(), cfg.algo.clone()));
    match (&cfg.kind, &cfg.instance_path) {
        (_, Some(p)) => table.meta.push(("instance_path".into(), p.display().to_string())),
        (Some(k), None) => table.meta.push(("instance".into(), format!("{k:?}"))),
        _ => {}
    }
    table.meta.push(("seed".into(), cfg.seed.to_string()));
    table.meta.push(("trials".into(), cfg.trials.to_string()));
    table.meta.push(("horizon".into(), cfg.horizon.to_string()));
    for (k, v) in &cfg.params.0 {
        table.meta.push((k.clone(), v.clone()));
    }
    for (tr, rows) in per.into_iter().enumerate() {
        for (t, m, v) in rows {
            table.push(Some(tr as u64), t, m, v);
        }
    }
    if REGRET_ALGOS.contains(&cfg.algo.as_str()) {
        table.add_bands("regret");
    }
    Ok(table)
}

/// Percentile bootstrap interval for the mean.
pub fn bootstrap_ci(samples: &[f64], level: f64, resamples: usize, rng: &mut Rng) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return invalid("bootstrap needs at least two samples");
    }
    if !(level > 0.0 && level < 1.0) || resamples == 0 {
        return invalid("level must lie in (0,1) and resamples be positive");
    }
    let n = samples.len();
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| samples[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let pos = p * (resamples - 1) as f64;
        let (i, f) = (pos.floor() as usize, pos.fract());
        if i + 1 < resamples {
            means[i] * (1.0 - f) + means[i + 1] * f
        } else {
            means[i]
        }
    };
    let (lo, hi) = (q((1.0 - level) / 2.0), q((1.0 + level) / 2.0));
    // Clamp rounding drift so constant samples give exactly (c, c).
    let (min, max) = (means[0], means[resamples - 1]);
    Ok((lo.clamp(min, max), hi.clamp(min, max)))
}

/// Smallest τ such that the recommendation is `truth` at every recorded time
/// in (τ, cap]. `trace` holds (samples, recommendation) change points in order.
pub fn estimate_tau(trace: &[(u64, usize)], truth: usize, cap: u64) -> Option<u64> {
    let within: Vec<&(u64, usize)> = trace.iter().filter(|(t, _)| *t <= cap).collect();
    let last = within.last()?;
    if last.1 != truth {
        return None;
    }
    let mut tau = last.0;
    for &&(t, a) in within.iter().rev() {
        if a != truth {
            break;
        }
        tau = t;
    }
    Some(tau)
}

/// Fraction of ones in a 0/1 sample.
pub fn success_rate(correct: &[f64]) -> f64 {
    if correct.is_empty() {
        return 0.0;
    }
    correct.iter().sum::<f64>() / correct.len() as f64
}
