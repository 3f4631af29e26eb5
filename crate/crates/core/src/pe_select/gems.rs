use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rand::Rng as _;

use super::design::{
    fw_optimal_design, opt_dim, pairwise_directions, round_design, rounding_budget, truncate, Allocation, Design,
    DesignProblem, DimSearch,
};
use crate::error::{invalid, Error, Result};
use crate::instance::{sample_reward_sum, Instance};
use crate::linalg::{dot, sym_pinv};
use crate::Rng;

/// Designs keyed by (survivor set, dimension). Only valid for one instance.
#[derive(Debug, Clone, Default)]
pub struct DesignCache {
    shape: Option<(usize, usize, usize)>,
    map: HashMap<(Vec<usize>, usize), Design>,
}

impl DesignCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    fn bind(&mut self, inst: &Instance) -> Result<()> {
        let shape = (inst.num_actions(), inst.num_targets(), inst.dim());
        match self.shape {
            None => self.shape = Some(shape),
            Some(s) if s != shape => return invalid("design cache reused across instances"),
            _ => {}
        }
        Ok(())
    }
}

/// Elimination rule of the fixed-confidence subroutine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FcMode {
    /// Confidence-width elimination.
    #[default]
    Exact,
    /// Fixed 2^{−k} threshold, 4× more samples per round.
    Robust,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundLog {
    pub k: usize,
    pub dim: usize,
    pub pulls: u64,
    pub survivors: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GemsStop {
    Completed,
    Singleton,
    /// No dimension satisfied the selection budget at this round.
    Infeasible { round: usize },
    /// The global sample cap would have been crossed.
    Budget,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GemsOutcome {
    pub survivors: Vec<usize>,
    pub rounds: Vec<RoundLog>,
    pub stop: GemsStop,
    /// Survivor with the largest estimated reward in the last round.
    pub pick: usize,
}

struct Fit {
    theta: Vec<f64>,
    pinv: DMatrix<f64>,
    gram: DMatrix<f64>,
}

enum Rule {
    Width(f64),
    Threshold(f64),
}

/// Shared machinery: truncated embeddings, cached designs and sample counting.
pub(crate) struct Explorer<'a> {
    inst: &'a Instance,
    cache: &'a mut DesignCache,
    pub samples: u64,
    pub cap: u64,
    pub zeta: f64,
    pub search: DimSearch,
    target_action: Vec<Option<usize>>,
}

impl<'a> Explorer<'a> {
    pub fn new(inst: &'a Instance, cache: &'a mut DesignCache, cap: u64) -> Result<Self> {
        cache.bind(inst)?;
        let target_action =
            inst.targets().iter().map(|z| inst.actions().iter().position(|x| x == z)).collect();
        Ok(Explorer { inst, cache, samples: 0, cap, zeta: 1.0, search: DimSearch::Linear, target_action })
    }

    fn dim(&self) -> usize {
        self.inst.dim()
    }

    fn problem(&self, subset: &[usize], d: usize) -> DesignProblem {
        let actions = self.inst.actions().iter().map(|x| truncate(x, d)).collect();
        DesignProblem::new(actions, pairwise_directions(self.inst.targets(), subset, d))
    }

    /// ι(𝒴(ψ_d(S))) with its design; 0 for sets without a nonzero direction.
    fn design(&mut self, subset: &[usize], d: usize) -> Result<Design> {
        let key = (subset.to_vec(), d);
        if let Some(des) = self.cache.map.get(&key) {
            return Ok(des.clone());
        }
        let p = self.problem(subset, d);
        let des = if p.directions.is_empty() {
            let k = p.actions.len();
            Design { lambda: vec![1.0 / k as f64; k], value: 0.0, iterations: 0 }
        } else {
            fw_optimal_design(&p)?
        };
        self.cache.map.insert(key, des.clone());
        Ok(des)
    }

    fn iota(&mut self, subset: &[usize], d: usize) -> Result<f64> {
        Ok(self.design(subset, d)?.value)
    }

    fn allocate(&mut self, subset: &[usize], d: usize, n: u64) -> Result<Allocation> {
        let des = self.design(subset, d)?;
        let p = self.problem(subset, d);
        if p.directions.is_empty() {
            let fake = Design { lambda: des.lambda, value: 1.0, iterations: 0 };
            let mut p = p;
            p.directions = self.inst.actions().iter().map(|x| truncate(x, d)).collect();
            return round_design(&p, &fake, n as usize, self.zeta);
        }
        round_design(&p, &des, n as usize, self.zeta)
    }

    /// Pulls the allocation and fits least squares in ψ_d; `None` if the cap would be crossed.
    fn pull_fit(&mut self, counts: &[u64], d: usize, rng: &mut Rng) -> Result<Option<Fit>> {
        let total: u64 = counts.iter().sum();
        if self.samples.saturating_add(total) > self.cap {
            return Ok(None);
        }
        let mut gram = DMatrix::<f64>::zeros(d, d);
        let mut b = DVector::<f64>::zeros(d);
        for (a, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let s = sample_reward_sum(self.inst, a, c, rng)?;
            let v = DVector::from_column_slice(&self.inst.actions()[a][..d]);
            gram.ger(c as f64, &v, &v, 1.0);
            b.axpy(s, &v, 1.0);
        }
        self.samples += total;
        let pinv = sym_pinv(&gram, 1e-12);
        let theta = (&pinv * b).iter().cloned().collect();
        Ok(Some(Fit { theta, pinv, gram }))
    }

    fn eliminate(&self, subset: &[usize], fit: &Fit, d: usize, rule: Rule) -> Vec<usize> {
        let z = self.inst.targets();
        let est: Vec<f64> = subset.iter().map(|&i| dot(&z[i][..d], &fit.theta)).collect();
        let mut keep = Vec::with_capacity(subset.len());
        'outer: for (a, &za) in subset.iter().enumerate() {
            for (b, &zb) in subset.iter().enumerate() {
                if a == b {
                    continue;
                }
                let diff = est[b] - est[a];
                let out = match rule {
                    Rule::Threshold(t) => diff >= t,
                    Rule::Width(scale) => {
                        let y: Vec<f64> = (0..d).map(|j| z[zb][j] - z[za][j]).collect();
                        if y.iter().all(|&v| v == 0.0) {
                            continue;
                        }
                        if !crate::linalg::in_range(&fit.gram, &fit.pinv, &y, 1e-7) {
                            continue;
                        }
                        let w = crate::linalg::quad(&fit.pinv, &y).max(0.0).sqrt() * scale;
                        diff > w
                    }
                };
                if out {
                    continue 'outer;
                }
            }
            keep.push(za);
        }
        keep
    }

    fn best_estimate(&self, subset: &[usize], fit: Option<(&Fit, usize)>) -> usize {
        let Some((fit, d)) = fit else { return subset[0] };
        let z = self.inst.targets();
        let mut best = subset[0];
        let mut top = f64::NEG_INFINITY;
        for &i in subset {
            let v = dot(&z[i][..d], &fit.theta);
            if v > top {
                top = v;
                best = i;
            }
        }
        best
    }

    /// Fixed-confidence elimination; `fixed_dim` pins d (the RAGE-style baseline).
    pub fn gems_fc(
        &mut self,
        rounds: usize,
        budget: f64,
        delta: f64,
        mode: FcMode,
        fixed_dim: Option<usize>,
        rng: &mut Rng,
    ) -> Result<GemsOutcome> {
        let big_d = self.dim();
        let mut s: Vec<usize> = (0..self.inst.num_targets()).collect();
        let mut log = Vec::new();
        let mut stop = GemsStop::Completed;
        let mut last: Option<(Fit, usize)> = None;
        for k in 1..=rounds {
            if s.len() <= 1 {
                stop = GemsStop::Singleton;
                break;
            }
            let dk = delta / (k as f64).powi(2);
            let four_k = 4f64.powi(k.min(600) as i32);
            let zeta = self.zeta;
            let search = self.search;
            let g = |this: &mut Self, d: usize| -> Result<f64> {
                Ok((four_k * this.iota(&s, d)?).max(rounding_budget(d, zeta) as f64))
            };
            let d = match fixed_dim {
                Some(d) => d.min(big_d),
                None => match opt_dim(budget, big_d, |d| g(self, d), search) {
                    Ok(d) => d,
                    Err(Error::Infeasible { .. }) => {
                        stop = GemsStop::Infeasible { round: k };
                        break;
                    }
                    Err(e) => return Err(e),
                },
            };
            let gval = g(self, d)?;
            let lg = ((s.len() * s.len()) as f64 / dk).ln();
            let factor = match mode {
                FcMode::Exact => 2.0 * (1.0 + zeta),
                FcMode::Robust => 8.0 * (1.0 + zeta),
            };
            let nk = (gval * factor * lg).ceil();
            if !(nk < self.cap as f64) {
                stop = GemsStop::Budget;
                break;
            }
            let alloc = self.allocate(&s, d, nk as u64)?;
            let Some(fit) = self.pull_fit(&alloc.counts, d, rng)? else {
                stop = GemsStop::Budget;
                break;
            };
            let rule = match mode {
                FcMode::Exact => Rule::Width((2.0 * lg).sqrt()),
                FcMode::Robust => Rule::Threshold(0.5f64.powi(k as i32)),
            };
            s = self.eliminate(&s, &fit, d, rule);
            log.push(RoundLog { k, dim: d, pulls: alloc.total(), survivors: s.clone() });
            last = Some((fit, d));
        }
        if stop == GemsStop::Completed && s.len() == 1 && log.len() < rounds {
            stop = GemsStop::Singleton;
        }
        let pick = self.best_estimate(&s, last.as_ref().map(|(f, d)| (f, *d)));
        Ok(GemsOutcome { survivors: s, rounds: log, stop, pick })
    }

    /// Fixed-budget elimination with ⌊T/n⌋ samples per round.
    pub fn gems_fb(&mut self, total: f64, rounds: usize, budget: f64, rng: &mut Rng) -> Result<GemsOutcome> {
        if rounds == 0 {
            return invalid("fixed-budget run needs at least one round");
        }
        let per = (total / rounds as f64).floor();
        if !(per >= 2.0) {
            return invalid(format!("T/n = {per} below 2"));
        }
        let per = per as u64;
        let zeta = self.zeta;
        let big_d = self.dim();
        let d_tilde = opt_dim(per as f64, big_d, |d| Ok(rounding_budget(d, zeta) as f64), DimSearch::Linear)?;
        let mut s: Vec<usize> = (0..self.inst.num_targets()).collect();
        let mut log = Vec::new();
        let mut stop = GemsStop::Completed;
        let mut last: Option<(Fit, usize)> = None;
        let search = self.search;
        for k in 1..=rounds {
            if s.len() <= 1 {
                stop = GemsStop::Singleton;
                break;
            }
            let four_k = 4f64.powi(k.min(600) as i32);
            let d = match opt_dim(budget, d_tilde, |d| Ok(four_k * self.iota(&s, d)?), search) {
                Ok(d) => d,
                Err(Error::Infeasible { .. }) => {
                    stop = GemsStop::Infeasible { round: k };
                    break;
                }
                Err(e) => return Err(e),
            };
            let alloc = self.allocate(&s, d, per)?;
            let Some(fit) = self.pull_fit(&alloc.counts, d, rng)? else {
                stop = GemsStop::Budget;
                break;
            };
            s = self.eliminate(&s, &fit, d, Rule::Threshold(0.5f64.powi(k as i32)));
            log.push(RoundLog { k, dim: d, pulls: alloc.total(), survivors: s.clone() });
            last = Some((fit, d));
        }
        let pick = self.best_estimate(&s, last.as_ref().map(|(f, d)| (f, *d)));
        Ok(GemsOutcome { survivors: s, rounds: log, stop, pick })
    }

    /// Pulls each candidate `m` times; empirical argmax, lowest index on ties.
    /// `None` if the cap would be crossed.
    fn validate(&mut self, candidates: &[usize], m: u64, rng: &mut Rng) -> Result<Option<usize>> {
        if self.samples.saturating_add(m.saturating_mul(candidates.len() as u64)) > self.cap {
            return Ok(None);
        }
        let mut best = None;
        let mut top = f64::NEG_INFINITY;
        for &z in candidates {
            let a = self.target_action[z].ok_or(Error::Unsupported("validation needs targets among the actions"))?;
            let mean = sample_reward_sum(self.inst, a, m, rng)? / m as f64;
            if mean > top {
                top = mean;
                best = Some(z);
            }
        }
        self.samples += m * candidates.len() as u64;
        Ok(best)
    }
}

fn with_explorer<T>(
    inst: &Instance,
    cache: Option<&mut DesignCache>,
    cap: u64,
    f: impl FnOnce(&mut Explorer<'_>) -> Result<T>,
) -> Result<T> {
    let mut own = DesignCache::new();
    let cache = cache.unwrap_or(&mut own);
    let mut ex = Explorer::new(inst, cache, cap)?;
    f(&mut ex)
}

/// Fixed-confidence subroutine with `n` rounds and selection budget `budget`.
/// An infeasible dimension selection is returned as an error.
pub fn gems_fc_run(
    inst: &Instance,
    n: usize,
    budget: f64,
    delta: f64,
    mode: FcMode,
    rng: &mut Rng,
) -> Result<GemsOutcome> {
    if !(budget > 0.0) {
        return invalid("selection budget must be positive");
    }
    if !(delta > 0.0 && delta < 1.0) {
        return invalid("delta must lie in (0,1)");
    }
    let out = with_explorer(inst, None, u64::MAX, |ex| ex.gems_fc(n, budget, delta, mode, None, rng))?;
    if let GemsStop::Infeasible { round } = out.stop {
        return Err(Error::Numerical(format!("no feasible dimension at round {round}")));
    }
    Ok(out)
}

/// Fixed-budget subroutine; returns the outcome, whose `pick` is the output arm.
pub fn gems_fb_run(inst: &Instance, total: f64, n: usize, budget: f64, rng: &mut Rng) -> Result<GemsOutcome> {
    gems_fb_cached(inst, total, n, budget, None, rng)
}

pub fn gems_fb_cached(
    inst: &Instance,
    total: f64,
    n: usize,
    budget: f64,
    cache: Option<&mut DesignCache>,
    rng: &mut Rng,
) -> Result<GemsOutcome> {
    with_explorer(inst, cache, u64::MAX, |ex| ex.gems_fb(total, n, budget, rng))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FcConfig {
    pub delta: f64,
    pub mode: FcMode,
    /// Target optimality for the robust validation step.
    pub epsilon: f64,
    /// Force-stop after this many samples.
    pub cap: u64,
    pub search: DimSearch,
}

impl FcConfig {
    pub fn new(delta: f64, mode: FcMode) -> Self {
        FcConfig { delta, mode, epsilon: 0.1, cap: 10_000_000, search: DimSearch::Linear }
    }
}

/// One recommendation update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Recommendation {
    /// Total samples when the update happened.
    pub samples: u64,
    /// Outer loop index ℓ (or round k for the baseline).
    pub phase: usize,
    pub arm: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FcTrace {
    pub initial: Option<usize>,
    pub updates: Vec<Recommendation>,
    pub samples: u64,
    pub phases: usize,
}

impl FcTrace {
    pub fn current(&self) -> Option<usize> {
        self.updates.last().map(|r| r.arm).or(self.initial)
    }

    /// Samples after which the recommendation is `best` from then on.
    pub fn tau(&self, best: usize) -> Option<u64> {
        if self.current() != Some(best) {
            return None;
        }
        let mut t = 0;
        for r in self.updates.iter().rev() {
            if r.arm != best {
                break;
            }
            t = r.samples;
        }
        if self.initial == Some(best) && self.updates.iter().all(|r| r.arm == best) {
            t = 0;
        }
        Some(t)
    }
}

/// Doubling over (rounds, selection budget) pairs; never stops on its own,
/// only at `cfg.cap` samples.
pub fn adaptive_fc_run(inst: &Instance, cfg: &FcConfig, rng: &mut Rng) -> Result<FcTrace> {
    adaptive_fc_cached(inst, cfg, None, rng)
}

pub fn adaptive_fc_cached(
    inst: &Instance,
    cfg: &FcConfig,
    cache: Option<&mut DesignCache>,
    rng: &mut Rng,
) -> Result<FcTrace> {
    if !(cfg.delta > 0.0 && cfg.delta < 1.0) {
        return invalid("delta must lie in (0,1)");
    }
    if cfg.mode == FcMode::Robust && !(cfg.epsilon > 0.0) {
        return invalid("robust mode needs epsilon > 0");
    }
    let nz = inst.num_targets();
    let initial = rng.random_range(0..nz);
    with_explorer(inst, cache, cfg.cap, |ex| {
        ex.search = cfg.search;
        let mut trace = FcTrace { initial: Some(initial), updates: Vec::new(), samples: 0, phases: 0 };
        if nz == 1 {
            return Ok(trace);
        }
        'outer: for l in 1..=60usize {
            trace.phases = l;
            let lf = l as f64;
            let dl = match cfg.mode {
                FcMode::Exact => cfg.delta / (2.0 * lf.powi(3)),
                FcMode::Robust => cfg.delta / (4.0 * lf.powi(3)),
            };
            let mut pool = Vec::new();
            for i in 1..=l {
                let n = 1usize << i;
                let b = (1u64 << (l - i)) as f64;
                let out = ex.gems_fc(n, b, dl, cfg.mode, None, rng)?;
                match out.stop {
                    GemsStop::Budget => break 'outer,
                    GemsStop::Infeasible { .. } => continue,
                    _ => {}
                }
                match cfg.mode {
                    FcMode::Exact => {
                        if out.survivors.len() == 1 {
                            trace.updates.push(Recommendation { samples: ex.samples, phase: l, arm: out.survivors[0] });
                            break;
                        }
                    }
                    FcMode::Robust => pool.push(out.pick),
                }
            }
            if cfg.mode == FcMode::Robust && !pool.is_empty() {
                pool.sort_unstable();
                pool.dedup();
                let m = (8.0 * (2.0 / dl).ln() / cfg.epsilon.powi(2)).ceil() as u64;
                match ex.validate(&pool, m, rng)? {
                    Some(z) => trace.updates.push(Recommendation { samples: ex.samples, phase: l, arm: z }),
                    None => break,
                }
            }
            if ex.samples >= ex.cap {
                break;
            }
        }
        trace.samples = ex.samples;
        Ok(trace)
    })
}

/// Elimination at the ambient dimension until one arm survives or the cap is hit.
pub fn rage_run(inst: &Instance, delta: f64, cap: u64, cache: Option<&mut DesignCache>, rng: &mut Rng) -> Result<FcTrace> {
    if !(delta > 0.0 && delta < 1.0) {
        return invalid("delta must lie in (0,1)");
    }
    with_explorer(inst, cache, cap, |ex| {
        let d = ex.dim();
        let out = ex.gems_fc(usize::MAX, f64::INFINITY, delta, FcMode::Exact, Some(d), rng)?;
        let mut trace = FcTrace { initial: None, updates: Vec::new(), samples: ex.samples, phases: out.rounds.len() };
        if out.survivors.len() == 1 {
            trace.updates.push(Recommendation { samples: ex.samples, phase: out.rounds.len(), arm: out.survivors[0] });
        }
        Ok(trace)
    })
}

/// ⌊W(t)⌋ where W solves p·2^p = t: the largest integer p with p·2^p ≤ t.
pub fn floor_w(t: f64) -> usize {
    let mut p = 0usize;
    while p < 60 && ((p + 1) as f64) * 2f64.powi(p as i32 + 1) <= t {
        p += 1;
    }
    p
}

#[derive(Debug, Clone, PartialEq)]
pub struct FbTrace {
    /// Pre-selected arms, sorted and deduplicated.
    pub candidates: Vec<usize>,
    pub arm: usize,
    pub selection_samples: u64,
    pub samples: u64,
    pub subroutines: usize,
}

/// Selection over (B_i, n_j) pairs with half the budget, validation with the other half.
pub fn adaptive_fb_run(inst: &Instance, total: u64, rng: &mut Rng) -> Result<FbTrace> {
    adaptive_fb_cached(inst, total, None, rng)
}

pub fn adaptive_fb_cached(inst: &Instance, total: u64, cache: Option<&mut DesignCache>, rng: &mut Rng) -> Result<FbTrace> {
    let t = (total / 2) as f64;
    with_explorer(inst, cache, u64::MAX, |ex| {
        let p = floor_w(t);
        let mut pool = Vec::new();
        let mut calls = 0;
        if p > 0 {
            let tp = t / p as f64;
            for i in 1..=p {
                let b = 2f64.powi(i as i32);
                let q = floor_w(tp / b);
                if q == 0 {
                    continue;
                }
                let tpp = tp / q as f64;
                for j in 1..=q {
                    let n = 1usize << j;
                    calls += 1;
                    if let Ok(out) = ex.gems_fb(tpp, n, b, rng) {
                        pool.push(out.pick);
                    }
                }
            }
        }
        let selection_samples = ex.samples;
        if pool.is_empty() {
            pool = (0..inst.num_targets()).collect();
        }
        pool.sort_unstable();
        pool.dedup();
        let m = ((t / pool.len() as f64).floor() as u64).max(1);
        let arm = ex.validate(&pool, m, rng)?.expect("uncapped validation");
        Ok(FbTrace { candidates: pool, arm, selection_samples, samples: ex.samples, subroutines: calls })
    })
}
