//! Problem instances, noise models, action distributions and run records.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::linalg::{dot, norm};
use crate::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Noise {
    Gaussian { sigma: f64 },
    Bernoulli,
}

impl Default for Noise {
    fn default() -> Self {
        Noise::Gaussian { sigma: 1.0 }
    }
}

/// A linear reward model over a finite action set.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    actions: Vec<Vec<f64>>,
    targets: Vec<Vec<f64>>,
    theta: Vec<f64>,
    dstar: usize,
    noise: Noise,
    reward_clip: Option<(f64, f64)>,
}

/// Builder for [`Instance`]; validation happens in [`InstanceBuilder::build`].
#[derive(Debug, Clone)]
pub struct InstanceBuilder {
    actions: Vec<Vec<f64>>,
    targets: Option<Vec<Vec<f64>>>,
    theta: Vec<f64>,
    dstar: Option<usize>,
    noise: Noise,
    reward_clip: Option<(f64, f64)>,
    norm_bound: f64,
    require_span: bool,
}

impl InstanceBuilder {
    pub fn targets(mut self, targets: Vec<Vec<f64>>) -> Self {
        self.targets = Some(targets);
        self
    }

    pub fn dstar(mut self, dstar: usize) -> Self {
        self.dstar = Some(dstar);
        self
    }

    pub fn noise(mut self, noise: Noise) -> Self {
        self.noise = noise;
        self
    }

    pub fn reward_clip(mut self, lo: f64, hi: f64) -> Self {
        self.reward_clip = Some((lo, hi));
        self
    }

    /// Maximum Euclidean norm accepted for features and θ*. Defaults to 1.
    pub fn norm_bound(mut self, bound: f64) -> Self {
        self.norm_bound = bound;
        self
    }

    pub fn require_span(mut self, yes: bool) -> Self {
        self.require_span = yes;
        self
    }

    pub fn build(self) -> Result<Instance> {
        let dim = self.theta.len();
        if dim == 0 {
            return invalid("theta must be nonempty");
        }
        if self.actions.is_empty() {
            return invalid("action set is empty");
        }
        let targets = self.targets.unwrap_or_else(|| self.actions.clone());
        let tol = 1e-9;
        for (what, rows) in [("action", &self.actions), ("target", &targets)] {
            for (i, row) in rows.iter().enumerate() {
                if row.len() != dim {
                    return invalid(format!("{what} {i} has length {} != {dim}", row.len()));
                }
                if row.iter().any(|v| !v.is_finite()) {
                    return invalid(format!("{what} {i} is not finite"));
                }
                if norm(row) > self.norm_bound + tol {
                    return invalid(format!("{what} {i} has norm {} > {}", norm(row), self.norm_bound));
                }
            }
        }
        if norm(&self.theta) > self.norm_bound + tol {
            return invalid("theta norm exceeds bound");
        }
        let dstar = self.dstar.unwrap_or(dim);
        if dstar > dim {
            return invalid(format!("dstar {dstar} exceeds dimension {dim}"));
        }
        if self.theta[dstar..].iter().any(|&v| v != 0.0) {
            return invalid("theta has nonzero coordinates beyond dstar");
        }
        if let Noise::Gaussian { sigma } = self.noise {
            if !(sigma >= 0.0) {
                return invalid("sigma must be nonnegative");
            }
        }
        if self.require_span && crate::linalg::rank(&self.actions, 1e-10) < dim {
            return invalid("actions do not span the ambient space");
        }
        Ok(Instance {
            actions: self.actions,
            targets,
            theta: self.theta,
            dstar,
            noise: self.noise,
            reward_clip: self.reward_clip,
        })
    }
}

impl Instance {
    pub fn builder(actions: Vec<Vec<f64>>, theta: Vec<f64>) -> InstanceBuilder {
        InstanceBuilder {
            actions,
            targets: None,
            theta,
            dstar: None,
            noise: Noise::default(),
            reward_clip: None,
            norm_bound: 1.0,
            require_span: false,
        }
    }

    /// Standard K-armed instance: actions e_i, θ* = means (no norm check).
    pub fn multi_armed(means: &[f64], noise: Noise) -> Result<Instance> {
        let k = means.len();
        let actions = (0..k)
            .map(|i| {
                let mut e = vec![0.0; k];
                e[i] = 1.0;
                e
            })
            .collect();
        Instance::builder(actions, means.to_vec())
            .noise(noise)
            .norm_bound(f64::INFINITY)
            .build()
    }

    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn num_targets(&self) -> usize {
        self.targets.len()
    }

    pub fn actions(&self) -> &[Vec<f64>] {
        &self.actions
    }

    pub fn targets(&self) -> &[Vec<f64>] {
        &self.targets
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn dstar(&self) -> usize {
        self.dstar
    }

    pub fn noise(&self) -> Noise {
        self.noise
    }

    pub fn mean(&self, action: usize) -> f64 {
        dot(&self.theta, &self.actions[action])
    }

    pub fn target_mean(&self, target: usize) -> f64 {
        dot(&self.theta, &self.targets[target])
    }

    pub fn means(&self) -> Vec<f64> {
        (0..self.num_actions()).map(|a| self.mean(a)).collect()
    }

    pub fn best_mean(&self) -> f64 {
        self.means().into_iter().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Index of the best target (lowest index among ties).
    pub fn best_target(&self) -> usize {
        let mut best = 0;
        for z in 1..self.num_targets() {
            if self.target_mean(z) > self.target_mean(best) {
                best = z;
            }
        }
        best
    }

    /// Copy with the last action repeated `copies` more times.
    pub fn with_duplicated_last(&self, copies: usize) -> Instance {
        let mut out = self.clone();
        let last = out.actions.last().cloned().expect("nonempty");
        for _ in 0..copies {
            out.actions.push(last.clone());
        }
        out
    }

    pub fn parse(text: &str) -> Result<Instance> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let mut next = |what: &str| {
            lines.next().ok_or(Error::Parse {
                line: 0,
                msg: format!("unexpected end of file, expected {what}"),
            })
        };
        let (ln, head) = next("header")?;
        let head = parse_row(ln, head)?;
        if head.len() != 3 {
            return Err(Error::Parse { line: ln, msg: "header must be `D K M`".into() });
        }
        let (d, k, m) = (head[0] as usize, head[1] as usize, head[2] as usize);
        let mut read_rows = |n: usize, what: &str| -> Result<Vec<Vec<f64>>> {
            let mut rows = Vec::with_capacity(n);
            for _ in 0..n {
                let (ln, l) = next(what)?;
                let row = parse_row(ln, l)?;
                if row.len() != d {
                    return Err(Error::Parse { line: ln, msg: format!("expected {d} values") });
                }
                rows.push(row);
            }
            Ok(rows)
        };
        let actions = read_rows(k, "action row")?;
        let targets = read_rows(m, "target row")?;
        let theta = read_rows(1, "theta row")?.remove(0);
        let (ln, meta) = next("metadata line")?;
        let mut noise_kind = "gaussian";
        let mut sigma = 1.0;
        let mut dstar = d;
        for kv in meta.split_whitespace() {
            let (key, val) = kv
                .split_once('=')
                .ok_or(Error::Parse { line: ln, msg: format!("bad metadata `{kv}`") })?;
            let bad = || Error::Parse { line: ln, msg: format!("bad value in `{kv}`") };
            match key {
                "noise" => noise_kind = val,
                "sigma" => sigma = val.parse().map_err(|_| bad())?,
                "dstar" => dstar = val.parse().map_err(|_| bad())?,
                _ => return Err(Error::Parse { line: ln, msg: format!("unknown key `{key}`") }),
            }
        }
        let noise = match noise_kind {
            "gaussian" => Noise::Gaussian { sigma },
            "bernoulli" => Noise::Bernoulli,
            other => return Err(Error::Parse { line: ln, msg: format!("unknown noise `{other}`") }),
        };
        let bound = actions
            .iter()
            .chain(targets.iter())
            .map(|r| norm(r))
            .chain(std::iter::once(norm(&theta)))
            .fold(1.0, f64::max);
        Instance::builder(actions, theta)
            .targets(targets)
            .dstar(dstar)
            .noise(noise)
            .norm_bound(bound)
            .build()
    }

    pub fn load(path: impl AsRef<Path>) -> anyhow::Result<Instance> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Ok(Instance::parse(&text)?)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {} {}", self.dim(), self.num_actions(), self.num_targets());
        let row = |r: &[f64]| r.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(" ");
        for r in self.actions.iter().chain(self.targets.iter()) {
            let _ = writeln!(s, "{}", row(r));
        }
        let _ = writeln!(s, "{}", row(&self.theta));
        match self.noise {
            Noise::Gaussian { sigma } => {
                let _ = writeln!(s, "noise=gaussian sigma={sigma} dstar={}", self.dstar);
            }
            Noise::Bernoulli => {
                let _ = writeln!(s, "noise=bernoulli sigma=0 dstar={}", self.dstar);
            }
        }
        s
    }
}

fn parse_row(line: usize, text: &str) -> Result<Vec<f64>> {
    text.split_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::Parse { line, msg: format!("not a number: `{t}`") })
        })
        .collect()
}

/// Draws a reward for `action`: mean ⟨θ*, x⟩ plus noise.
pub fn sample_reward(instance: &Instance, action: usize, rng: &mut Rng) -> Result<f64> {
    if action >= instance.num_actions() {
        return Err(Error::OutOfRange { index: action, len: instance.num_actions() });
    }
    let mean = instance.mean(action);
    let r = draw(mean, instance.noise, rng)?;
    Ok(match instance.reward_clip {
        Some((lo, hi)) => r.clamp(lo, hi),
        None => r,
    })
}

/// Sum of `count` rewards for `action`; drawn in one shot unless rewards are clipped.
pub fn sample_reward_sum(instance: &Instance, action: usize, count: u64, rng: &mut Rng) -> Result<f64> {
    if action >= instance.num_actions() {
        return Err(Error::OutOfRange { index: action, len: instance.num_actions() });
    }
    if instance.reward_clip.is_some() {
        let mut s = 0.0;
        for _ in 0..count {
            s += sample_reward(instance, action, rng)?;
        }
        return Ok(s);
    }
    draw_sum(instance.mean(action), count, instance.noise, rng)
}

/// One draw of the noise law around `mean`.
pub fn draw(mean: f64, noise: Noise, rng: &mut Rng) -> Result<f64> {
    match noise {
        Noise::Gaussian { sigma } => {
            let z: f64 = StandardNormal.sample(rng);
            Ok(mean + sigma * z)
        }
        Noise::Bernoulli => {
            if !(0.0..=1.0).contains(&mean) {
                return invalid(format!("bernoulli mean {mean} outside [0,1]"));
            }
            Ok(if rng.random::<f64>() < mean { 1.0 } else { 0.0 })
        }
    }
}

/// Sum of `count` independent draws around `mean`, sampled in one shot.
pub fn draw_sum(mean: f64, count: u64, noise: Noise, rng: &mut Rng) -> Result<f64> {
    match noise {
        Noise::Gaussian { sigma } => {
            let z: f64 = StandardNormal.sample(rng);
            let c = count as f64;
            Ok(c * mean + sigma * c.sqrt() * z)
        }
        Noise::Bernoulli => {
            if !(0.0..=1.0).contains(&mean) {
                return invalid(format!("bernoulli mean {mean} outside [0,1]"));
            }
            let b = rand_distr::Binomial::new(count, mean).map_err(|e| Error::Numerical(e.to_string()))?;
            Ok(b.sample(rng) as f64)
        }
    }
}

/// Finitely supported distribution over action indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionDistribution {
    pub support: Vec<usize>,
    pub weights: Vec<f64>,
}

impl ActionDistribution {
    pub fn point(a: usize) -> Self {
        ActionDistribution { support: vec![a], weights: vec![1.0] }
    }

    pub fn uniform(support: Vec<usize>) -> Self {
        let w = 1.0 / support.len() as f64;
        let weights = vec![w; support.len()];
        ActionDistribution { support, weights }
    }

    /// Merges repeated atoms, keeping first-seen order.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, f64)>) -> Self {
        let mut support: Vec<usize> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        for (a, w) in pairs {
            match support.iter().position(|&s| s == a) {
                Some(i) => weights[i] += w,
                None => {
                    support.push(a);
                    weights.push(w);
                }
            }
        }
        ActionDistribution { support, weights }
    }

    pub fn prob(&self, a: usize) -> f64 {
        self.support
            .iter()
            .zip(&self.weights)
            .filter(|(&s, _)| s == a)
            .map(|(_, &w)| w)
            .sum()
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.support.len() != self.weights.len() || self.support.is_empty() {
            return invalid("support/weights mismatch or empty");
        }
        if self.weights.iter().any(|&w| !(w >= 0.0)) {
            return invalid("negative or NaN weight");
        }
        if (self.total() - 1.0).abs() > 1e-9 {
            return invalid(format!("weights sum to {}", self.total()));
        }
        let mut s = self.support.clone();
        s.sort_unstable();
        s.dedup();
        if s.len() != self.support.len() {
            return invalid("support entries are not distinct");
        }
        Ok(())
    }

    /// Inverse-CDF draw in support order with one uniform.
    pub fn sample(&self, rng: &mut Rng) -> usize {
        let u: f64 = rng.random::<f64>() * self.total();
        let mut acc = 0.0;
        for (&a, &w) in self.support.iter().zip(&self.weights) {
            acc += w;
            if u < acc {
                return a;
            }
        }
        *self.support.last().expect("nonempty distribution")
    }
}

/// One round of a run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunRecord {
    pub round: usize,
    pub action: usize,
    pub reward: f64,
    pub benchmark: f64,
    pub queried: bool,
    pub extra: Vec<(String, f64)>,
}

impl RunRecord {
    pub fn new(round: usize, action: usize, reward: f64, benchmark: f64) -> Self {
        RunRecord { round, action, reward, benchmark, queried: false, extra: Vec::new() }
    }
}

/// Cumulative pseudo-regret Σ (benchmark − mean of the played action).
pub fn cumulative_regret(records: &[RunRecord], instance: &Instance) -> Vec<f64> {
    let mut acc = 0.0;
    records
        .iter()
        .map(|r| {
            acc += r.benchmark - instance.mean(r.action);
            acc
        })
        .collect()
}
