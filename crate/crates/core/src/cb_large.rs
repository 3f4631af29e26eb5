//! Per-round policies for large-action contextual bandits: SpannerGreedy,
//! SpannerIGW (exact and practical), SmoothIGW and CORRAL over smoothness levels.

pub mod corral;

use rand::Rng as _;

use crate::benchmark::smooth_benchmark;
use crate::error::{invalid, Error, Result};
use crate::instance::{draw, ActionDistribution, Noise, RunRecord};
use crate::linalg::{dot, norm};
use crate::regress::{FiniteClassOracle, Query, RegressionOracle, RidgeOracle};
use crate::spanner::{
    argmax_by, barycentric_spanner, init_spanner_set, reweighted_spanner, spanner_to_design, Exhaustive,
    LinearOracle, ReweightParams, SpannerSet,
};
use crate::Rng;

pub use corral::Corral;

/// Mixes the design (mass ε) with a point mass on the greedy action.
pub fn spanner_greedy_policy(f_hat: &[f64], design: &ActionDistribution, epsilon: f64) -> Result<ActionDistribution> {
    if !(0.0..=1.0).contains(&epsilon) {
        return invalid(format!("epsilon {epsilon} outside [0,1]"));
    }
    let ahat = argmax_by(f_hat.len(), |a| f_hat[a]);
    let pairs = design
        .support
        .iter()
        .zip(&design.weights)
        .map(|(&a, &w)| (a, epsilon * w))
        .chain(std::iter::once((ahat, 1.0 - epsilon)))
        .filter(|&(_, w)| w > 0.0);
    Ok(ActionDistribution::from_pairs(pairs))
}

/// Default greedy mix ε = √(C_opt·d/(4γ)) ∧ 1.
pub fn default_epsilon(c_opt: f64, d: usize, gamma: f64) -> f64 {
    (c_opt * d as f64 / (4.0 * gamma)).sqrt().min(1.0)
}

/// λ ∈ [1/2, 1] with Σ q(a)/(λ + η·gap(a)) = 1.
pub fn solve_lambda(gaps: &[f64], q: &[f64], eta: f64) -> Result<f64> {
    if gaps.len() != q.len() || gaps.is_empty() {
        return invalid("gaps and weights must have equal nonzero length");
    }
    if gaps.iter().any(|&g| !(g >= 0.0)) || q.iter().any(|&w| !(w >= 0.0)) || !(eta >= 0.0) {
        return invalid("gaps, weights and eta must be nonnegative");
    }
    let total: f64 = q.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return invalid(format!("weights sum to {total}"));
    }
    let f = |lam: f64| -> f64 { gaps.iter().zip(q).map(|(&g, &w)| w / (lam + eta * g)).sum::<f64>() - 1.0 };
    let (mut lo, mut hi) = (0.5, 1.0);
    if f(lo) < -1e-12 || f(hi) > 1e-12 {
        return Err(Error::Numerical(
            "balance equation has no root in [1/2, 1]; greedy atom must carry mass at least 1/2".into(),
        ));
    }
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IgwMode {
    Exact,
    Practical,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IgwConfig {
    pub gamma: f64,
    /// Spanner approximation factor C used for the design.
    pub c: f64,
    pub mode: IgwMode,
}

impl IgwConfig {
    pub fn new(gamma: f64, mode: IgwMode) -> Self {
        IgwConfig { gamma, c: 2.0, mode }
    }

    /// C_opt of the uniform design over a C-spanner: C²·d.
    pub fn c_opt(&self, d: usize) -> f64 {
        self.c * self.c * d as f64
    }

    /// Exact-mode reweighting η = γ/(C_opt·d).
    pub fn eta(&self, d: usize) -> f64 {
        self.gamma / (self.c_opt(d) * d as f64)
    }
}

#[derive(Debug, Clone)]
pub struct IgwOutput {
    pub dist: ActionDistribution,
    pub spanner: SpannerSet,
    pub ahat: usize,
    /// Set when the practical remainder went negative and was clamped.
    pub clamped: bool,
}

/// SpannerIGW distribution for one context with linear estimate ĝ (reward scale).
pub fn spanner_igw_policy(oracle: &dyn LinearOracle, ghat: &[f64], config: &IgwConfig) -> Result<IgwOutput> {
    if !(config.gamma > 0.0) {
        return invalid("gamma must be positive");
    }
    let d = oracle.dim();
    let ahat = oracle.argmax(ghat);
    let (init, r) = init_spanner_set(oracle)?;
    let mut params = ReweightParams::new(0.0, ghat.to_vec(), ahat, r.min(1.0));
    match config.mode {
        IgwMode::Exact => params.eta = config.eta(d),
        IgwMode::Practical => {
            params.eta = config.gamma / (4.0 * d as f64);
            params.offset = 1.0 + d as f64;
        }
    }
    let spanner = reweighted_spanner(oracle, &params, config.c, &init.members)?;
    let gap = |a: usize| params.gap(oracle, a);
    match config.mode {
        IgwMode::Exact => {
            let qopt = spanner_to_design(&spanner);
            let q = ActionDistribution::from_pairs(
                qopt.support
                    .iter()
                    .map(|&a| (a, 0.5 / qopt.support.len() as f64))
                    .chain(std::iter::once((ahat, 0.5))),
            );
            let gaps: Vec<f64> = q.support.iter().map(|&a| gap(a)).collect();
            let lam = solve_lambda(&gaps, &q.weights, params.eta)?;
            let weights = q
                .weights
                .iter()
                .zip(&gaps)
                .map(|(&w, &g)| w / (lam + params.eta * g))
                .collect();
            Ok(IgwOutput {
                dist: ActionDistribution { support: q.support, weights },
                spanner,
                ahat,
                clamped: false,
            })
        }
        IgwMode::Practical => {
            let mut support = spanner.members.clone();
            if !support.contains(&ahat) {
                support.push(ahat);
            }
            let dbar = support.len() as f64;
            let mut weights: Vec<f64> = support
                .iter()
                .map(|&a| if spanner.members.contains(&a) { 1.0 / (dbar + params.eta * gap(a)) } else { 0.0 })
                .collect();
            let used: f64 = weights.iter().sum();
            let ia = support.iter().position(|&a| a == ahat).expect("ahat in support");
            let rest = 1.0 - used;
            let clamped = rest < 0.0;
            weights[ia] += rest.max(0.0);
            if clamped {
                let t: f64 = weights.iter().sum();
                weights.iter_mut().for_each(|w| *w /= t);
            }
            Ok(IgwOutput { dist: ActionDistribution { support, weights }, spanner, ahat, clamped })
        }
    }
}

/// SpannerGreedy distribution for one context.
pub fn spanner_greedy_for_context(oracle: &dyn LinearOracle, ghat: &[f64], epsilon: f64) -> Result<ActionDistribution> {
    let s = barycentric_spanner(oracle, 2.0)?;
    let design = spanner_to_design(&s);
    let f_hat: Vec<f64> = (0..oracle.len()).map(|a| dot(oracle.embedding(a), ghat)).collect();
    spanner_greedy_policy(&f_hat, &design, epsilon)
}

/// m(a) = 1/(1 + hγ(f̂(a) − f̂(â))) for predicted losses.
pub fn smooth_density(losses: &[f64], h: f64, gamma: f64) -> Vec<f64> {
    let best = losses.iter().cloned().fold(f64::INFINITY, f64::min);
    losses.iter().map(|&l| 1.0 / (1.0 + h * gamma * (l - best))).collect()
}

/// Closed-form SmoothIGW law under the uniform base measure.
pub fn smooth_igw_distribution(losses: &[f64], h: f64, gamma: f64) -> Vec<f64> {
    let k = losses.len() as f64;
    let ahat = argmax_by(losses.len(), |a| -losses[a]);
    let m = smooth_density(losses, h, gamma);
    let mut p: Vec<f64> = m.iter().map(|v| v / k).collect();
    let left = 1.0 - p.iter().sum::<f64>();
    p[ahat] += left;
    p
}

/// One SmoothIGW draw by rejection: a ~ uniform, keep it w.p. m(a), else play â.
pub fn smooth_igw_sample(losses: &[f64], h: f64, gamma: f64, rng: &mut Rng) -> usize {
    let ahat = argmax_by(losses.len(), |a| -losses[a]);
    let a = rng.random_range(0..losses.len());
    let m = 1.0 / (1.0 + h * gamma * (losses[a] - losses[ahat]));
    if rng.random::<f64>() < m {
        a
    } else {
        ahat
    }
}

/// Contexts with action embeddings and a linear reward parameter.
#[derive(Debug, Clone)]
pub struct LinearContexts {
    pub contexts: Vec<Vec<Vec<f64>>>,
    pub theta: Vec<f64>,
    pub noise: Noise,
}

impl LinearContexts {
    pub fn dim(&self) -> usize {
        self.theta.len()
    }

    pub fn mean(&self, x: usize, a: usize) -> f64 {
        dot(&self.contexts[x][a], &self.theta)
    }

    pub fn best(&self, x: usize) -> f64 {
        (0..self.contexts[x].len()).map(|a| self.mean(x, a)).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Copy with the final action of every context repeated `copies` more times.
    pub fn with_duplicated_last(&self, copies: usize) -> LinearContexts {
        let mut out = self.clone();
        for ctx in &mut out.contexts {
            let last = ctx.last().cloned().expect("nonempty context");
            ctx.extend(std::iter::repeat_n(last, copies));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LinearPolicy {
    Greedy { epsilon: f64 },
    Igw(IgwConfig),
}

/// Runs a linear contextual bandit with a ridge oracle; ĝ is θ̂ projected to the unit ball.
pub fn run_linear_cb(env: &LinearContexts, policy: &LinearPolicy, horizon: usize, rng: &mut Rng) -> Result<Vec<RunRecord>> {
    let d = env.dim();
    let mut oracle = RidgeOracle::new(d, 1.0)?;
    let mut out = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let x = rng.random_range(0..env.contexts.len());
        let emb = &env.contexts[x];
        let ex = Exhaustive::new(emb);
        let mut ghat = oracle.estimate().to_vec();
        let n = norm(&ghat);
        if n > 1.0 {
            ghat.iter_mut().for_each(|v| *v /= n);
        }
        let dist = match policy {
            LinearPolicy::Greedy { epsilon } => spanner_greedy_for_context(&ex, &ghat, *epsilon)?,
            LinearPolicy::Igw(cfg) => spanner_igw_policy(&ex, &ghat, cfg)?.dist,
        };
        let a = dist.sample(rng);
        let reward = draw(env.mean(x, a), env.noise, rng)?;
        oracle.update(1.0, Query::features(&emb[a]), reward)?;
        let mut rec = RunRecord::new(t, a, reward, env.best(x));
        rec.extra.push(("context".into(), x as f64));
        out.push(rec);
    }
    Ok(out)
}

/// Contexts × actions loss table with Bernoulli feedback, for smooth-regret runs.
#[derive(Debug, Clone)]
pub struct SmoothEnv {
    pub num_contexts: usize,
    pub num_actions: usize,
    /// f*(x, a) at index x·K + a, in [0, 1].
    pub truth: Vec<f64>,
}

impl SmoothEnv {
    pub fn losses(&self, x: usize) -> &[f64] {
        &self.truth[x * self.num_actions..(x + 1) * self.num_actions]
    }
}

/// Algorithm 3-style base: SmoothIGW at level h with γ = √(8T/(h·ρ·RegSq)).
#[derive(Debug, Clone)]
pub struct StableBase {
    pub h: f64,
    pub oracle: FiniteClassOracle,
    pub horizon: usize,
}

impl StableBase {
    pub fn gamma(&self, rho: f64) -> f64 {
        let reg = self.oracle.reg_sq(self.horizon, 0.05);
        (8.0 * self.horizon as f64 / (self.h * rho * reg)).sqrt()
    }

    pub fn act(&self, x: usize, rho: f64, rng: &mut Rng) -> (usize, f64) {
        let k = self.oracle.num_actions();
        let losses: Vec<f64> = (0..k).map(|a| self.oracle.predict(Query::key(x, a))).collect();
        let gamma = self.gamma(rho);
        (smooth_igw_sample(&losses, self.h, gamma, rng), gamma)
    }

    pub fn learn(&mut self, weight: f64, x: usize, a: usize, loss: f64) -> Result<()> {
        self.oracle.update(weight, Query::key(x, a), loss)
    }
}

#[derive(Debug, Clone)]
pub struct CorralRun {
    pub records: Vec<RunRecord>,
    /// Master distribution after each round.
    pub master: Vec<Vec<f64>>,
}

/// CORRAL over SmoothIGW bases with h_b = 2^{-b}, b = 1..B (B = ⌈log₂ T⌉ when `levels` is None).
/// Benchmarks in the records are Smooth_h at `h_eval`.
pub fn corral_adapt(
    env: &SmoothEnv,
    class: &FiniteClassOracle,
    horizon: usize,
    eta_master: f64,
    levels: Option<Vec<f64>>,
    h_eval: f64,
    rng: &mut Rng,
) -> Result<CorralRun> {
    if !(eta_master > 0.0) {
        return invalid("eta_master must be positive");
    }
    let hs = levels.unwrap_or_else(|| {
        let b = ((horizon as f64).log2().ceil() as usize).max(1);
        (1..=b).map(|i| 0.5f64.powi(i as i32)).collect()
    });
    let mut bases: Vec<StableBase> = hs
        .iter()
        .map(|&h| StableBase { h, oracle: class.clone(), horizon })
        .collect();
    let mut master = Corral::new(bases.len(), horizon, eta_master)?;
    let mut records = Vec::with_capacity(horizon);
    let mut trace = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let x = rng.random_range(0..env.num_contexts);
        let dr = master.sample(rng);
        let base = &mut bases[dr.base];
        let (a, gamma) = base.act(x, dr.rho, rng);
        let mean = env.losses(x)[a];
        let loss = if rng.random::<f64>() < mean { 1.0 } else { 0.0 };
        base.learn(gamma / dr.prob, x, a, loss)?;
        master.update(dr.base, loss);
        let bench = smooth_benchmark(env.losses(x), h_eval)?;
        let mut rec = RunRecord::new(t, a, 1.0 - loss, 1.0 - bench);
        rec.extra.push(("base".into(), dr.base as f64));
        records.push(rec);
        trace.push(master.probabilities().to_vec());
    }
    Ok(CorralRun { records, master: trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded;

    #[test]
    fn greedy_mixture() {
        let design = ActionDistribution::uniform(vec![0, 1]);
        let p = spanner_greedy_policy(&[1.0, 0.0], &design, 0.5).unwrap();
        assert!((p.prob(0) - 0.75).abs() < 1e-15 && (p.prob(1) - 0.25).abs() < 1e-15);
        assert_eq!(spanner_greedy_policy(&[1.0, 0.0], &design, 1.0).unwrap(), design);
        assert_eq!(spanner_greedy_policy(&[0.0, 1.0], &design, 0.0).unwrap(), ActionDistribution::point(1));
    }

    #[test]
    fn lambda_examples() {
        assert!((solve_lambda(&[0.0, 0.0], &[0.5, 0.5], 3.0).unwrap() - 1.0).abs() < 1e-12);
        let l = solve_lambda(&[0.0, 1.0], &[0.5, 0.5], 1.0).unwrap();
        assert!((l - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-10);
        let l = solve_lambda(&[0.0, 1.0], &[0.6, 0.4], 1e9).unwrap();
        assert!((l - 0.6).abs() < 1e-6);
        assert!(solve_lambda(&[0.0, 10.0], &[0.1, 0.9], 1.0).is_err());
    }

    #[test]
    fn smooth_acceptance_probability() {
        let m = smooth_density(&[0.2, 0.7], 0.5, 4.0);
        assert_eq!(m[0], 1.0);
        assert!((m[1] - 0.5).abs() < 1e-15);
        let p = smooth_igw_distribution(&[0.2, 0.7], 0.5, 4.0);
        assert!((p[1] - 0.25).abs() < 1e-15 && (p[0] - 0.75).abs() < 1e-15);
    }

    #[test]
    fn exact_and_practical_are_distributions() {
        let pts: Vec<Vec<f64>> = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.6, 0.6], vec![-0.5, 0.2]];
        let o = Exhaustive::new(&pts);
        for mode in [IgwMode::Exact, IgwMode::Practical] {
            let out = spanner_igw_policy(&o, &[0.5, 0.3], &IgwConfig::new(10.0, mode)).unwrap();
            out.dist.validate().unwrap();
        }
    }

    #[test]
    fn tiny_gamma_flattens_to_q() {
        let pts: Vec<Vec<f64>> = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.6, 0.6]];
        let o = Exhaustive::new(&pts);
        let out = spanner_igw_policy(&o, &[0.5, 0.3], &IgwConfig::new(1e-9, IgwMode::Exact)).unwrap();
        let d = out.spanner.dim() as f64;
        for (&a, &w) in out.dist.support.iter().zip(&out.dist.weights) {
            let q = if a == out.ahat { 0.5 } else { 0.0 } + if out.spanner.members.contains(&a) { 0.5 / d } else { 0.0 };
            assert!((w - q).abs() < 1e-8);
        }
    }

    #[test]
    fn linear_run_is_seeded() {
        let env = LinearContexts {
            contexts: vec![vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.7, 0.7]]],
            theta: vec![0.3, 0.6],
            noise: Noise::Gaussian { sigma: 0.1 },
        };
        let pol = LinearPolicy::Igw(IgwConfig::new(50.0, IgwMode::Practical));
        let a = run_linear_cb(&env, &pol, 50, &mut seeded(4)).unwrap();
        let b = run_linear_cb(&env, &pol, 50, &mut seeded(4)).unwrap();
        assert_eq!(a, b);
    }
}
