use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use super::{schedule, Handle, IterationLog, MixtureBank, Pull, Sink};
use crate::cb_large::Corral;
use crate::error::{invalid, Result};
use crate::instance::{draw, Instance, Noise, RunRecord};
use crate::spanner::argmax_by;
use crate::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinUcbConfig {
    /// Ridge regularization; the gram matrix starts at λI.
    pub lambda: f64,
    pub delta: f64,
}

impl Default for LinUcbConfig {
    fn default() -> Self {
        LinUcbConfig { lambda: 1.0, delta: 0.05 }
    }
}

/// Width multiplier α + 2·ln T with α = 2√(ln(2TK/δ)).
pub fn linucb_width(horizon: usize, num_arms: usize, delta: f64) -> f64 {
    let t = horizon.max(2) as f64;
    let alpha = 2.0 * (2.0 * t * num_arms as f64 / delta).ln().max(0.0).sqrt();
    alpha + 2.0 * t.ln()
}

/// LinUCB over a fixed arm set. Caches xᵀV⁻¹x per arm so a round costs O(Kd + d²).
#[derive(Debug, Clone)]
pub struct LinUcb {
    feats: DMatrix<f64>,
    v_inv: DMatrix<f64>,
    b: DVector<f64>,
    theta: DVector<f64>,
    sq: Vec<f64>,
    width: f64,
}

impl LinUcb {
    pub fn new(features: &[Vec<f64>], lambda: f64, width: f64) -> Result<Self> {
        if features.is_empty() || !(lambda > 0.0) {
            return invalid("LinUCB needs arms and lambda > 0");
        }
        let d = features[0].len();
        if d == 0 || features.iter().any(|f| f.len() != d) {
            return invalid("ragged or empty features");
        }
        let feats = DMatrix::from_fn(features.len(), d, |i, j| features[i][j]);
        let sq = features.iter().map(|f| f.iter().map(|v| v * v).sum::<f64>() / lambda).collect();
        Ok(LinUcb {
            feats,
            v_inv: DMatrix::identity(d, d) / lambda,
            b: DVector::zeros(d),
            theta: DVector::zeros(d),
            sq,
            width,
        })
    }

    pub fn dim(&self) -> usize {
        self.feats.ncols()
    }

    pub fn len(&self) -> usize {
        self.feats.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn theta(&self) -> &[f64] {
        self.theta.as_slice()
    }

    pub fn index(&self, a: usize) -> f64 {
        self.feats.row(a).transpose().dot(&self.theta) + self.width * self.sq[a].max(0.0).sqrt()
    }

    pub fn select(&self) -> usize {
        let means = &self.feats * &self.theta;
        argmax_by(self.len(), |a| means[a] + self.width * self.sq[a].max(0.0).sqrt())
    }

    pub fn update(&mut self, a: usize, reward: f64) {
        let x = self.feats.row(a).transpose();
        let u = &self.v_inv * &x;
        let denom = 1.0 + x.dot(&u);
        self.v_inv.ger(-1.0 / denom, &u, &u, 1.0);
        let proj = &self.feats * &u;
        for (s, p) in self.sq.iter_mut().zip(proj.iter()) {
            *s -= p * p / denom;
        }
        self.b.axpy(reward, &x, 1.0);
        self.theta = &self.v_inv * &self.b;
    }
}

fn pull(inst: &Instance, a: usize, rng: &mut Rng) -> Result<f64> {
    draw(inst.mean(a), inst.noise(), rng)
}

pub fn linucb_core(inst: &Instance, horizon: usize, cfg: LinUcbConfig, rng: &mut Rng, sink: &mut Sink<'_>) -> Result<()> {
    let width = linucb_width(horizon, inst.num_actions(), cfg.delta);
    let mut ucb = LinUcb::new(inst.actions(), cfg.lambda, width)?;
    for _ in 0..horizon {
        let a = ucb.select();
        let r = pull(inst, a, rng)?;
        ucb.update(a, r);
        if !sink(Pull { arm: a, reward: r, handle: None }) {
            break;
        }
    }
    Ok(())
}

pub fn linucb_run(inst: &Instance, horizon: usize, cfg: LinUcbConfig, rng: &mut Rng) -> Result<Vec<RunRecord>> {
    super::collect(inst.best_mean(), |s| linucb_core(inst, horizon, cfg, rng, s))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearTrace {
    pub bank: MixtureBank,
    pub iterations: Vec<IterationLog>,
    /// Per iteration, rounds given to each corralled base (empty for plain LinUCB++).
    pub base_counts: Vec<Vec<u64>>,
}

/// Real arms truncated to `di` coordinates, padded with `virt` zeros, followed by one unit
/// vector per mixture in the virtual block.
fn virtual_features(inst: &Instance, di: usize, virt: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = inst
        .actions()
        .iter()
        .map(|x| {
            let mut v = x[..di].to_vec();
            v.resize(di + virt, 0.0);
            v
        })
        .collect();
    for j in 0..virt {
        let mut v = vec![0.0; di + virt];
        v[di + j] = 1.0;
        out.push(v);
    }
    out
}

fn check_beta(beta: f64) -> Result<()> {
    if !(0.5..1.0).contains(&beta) {
        return invalid(format!("beta {beta} outside [1/2, 1)"));
    }
    Ok(())
}

/// LinUCB++: iteration i runs LinUCB on truncated arms plus mixture-arms in virtual dimensions.
pub fn linucbpp_core(
    inst: &Instance,
    horizon: usize,
    beta: f64,
    cfg: LinUcbConfig,
    rng: &mut Rng,
    sink: &mut Sink<'_>,
) -> Result<LinearTrace> {
    check_beta(beta)?;
    let plan = schedule(horizon.max(2), beta, Some(inst.dim()))?;
    let k = inst.num_actions();
    let mut bank = MixtureBank::new();
    let mut iterations = Vec::new();
    let mut played = 0;
    for i in 0..plan.p {
        if played >= horizon {
            break;
        }
        let nm = bank.len();
        let feats = virtual_features(inst, plan.sizes[i], nm);
        let handles: Vec<Handle> = (0..k).map(Handle::Real).chain((0..nm).map(Handle::Mix)).collect();
        let width = linucb_width(plan.lengths[i], handles.len(), cfg.delta);
        let mut ucb = LinUcb::new(&feats, cfg.lambda, width)?;
        let len = plan.lengths[i].min(horizon - played);
        let mut counts = vec![0u64; handles.len()];
        let mut rounds = 0;
        let mut stop = false;
        for _ in 0..len {
            let j = ucb.select();
            let a = bank.resolve(handles[j], rng)?;
            let r = pull(inst, a, rng)?;
            ucb.update(j, r);
            counts[j] += 1;
            rounds += 1;
            if !sink(Pull { arm: a, reward: r, handle: Some(handles[j]) }) {
                stop = true;
                break;
            }
        }
        played += rounds;
        if rounds > 0 {
            let pairs: Vec<(Handle, u64)> = handles.iter().copied().zip(counts.iter().copied()).collect();
            bank.push_counts(&pairs)?;
        }
        iterations.push(IterationLog { handles, counts, rounds });
        if stop {
            break;
        }
    }
    Ok(LinearTrace { bank, iterations, base_counts: Vec::new() })
}

pub fn linucbpp_run(inst: &Instance, horizon: usize, beta: f64, cfg: LinUcbConfig, rng: &mut Rng) -> Result<Vec<RunRecord>> {
    super::collect(inst.best_mean(), |s| linucbpp_core(inst, horizon, beta, cfg, rng, s).map(|_| ()))
}

/// UCB1 over the existing mixture-arms.
#[derive(Debug, Clone)]
struct Ucb {
    counts: Vec<u64>,
    sums: Vec<f64>,
    log_t: f64,
}

impl Ucb {
    fn new(n: usize, horizon: usize) -> Self {
        Ucb { counts: vec![0; n], sums: vec![0.0; n], log_t: (horizon.max(2) as f64).ln() }
    }

    fn choose(&self) -> usize {
        argmax_by(self.counts.len(), |j| {
            let s = self.counts[j] as f64;
            if s == 0.0 {
                f64::INFINITY
            } else {
                self.sums[j] / s + (2.0 * self.log_t / s).sqrt()
            }
        })
    }

    fn update(&mut self, j: usize, r: f64) {
        self.counts[j] += 1;
        self.sums[j] += r;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorralIterationStats {
    pub log: IterationLog,
    /// Rounds given to the LinUCB base and, when mixtures exist, to the UCB base.
    pub base_counts: Vec<u64>,
    pub stopped: bool,
}

/// One corralled iteration: LinUCB on the first `di` coordinates against UCB over `bank`.
#[allow(clippy::too_many_arguments)]
pub fn linucbpp_corral_iteration(
    inst: &Instance,
    di: usize,
    len: usize,
    eta: f64,
    bank: &MixtureBank,
    cfg: LinUcbConfig,
    rng: &mut Rng,
    sink: &mut Sink<'_>,
) -> Result<CorralIterationStats> {
    if di == 0 || di > inst.dim() {
        return invalid(format!("truncation {di} outside 1..={}", inst.dim()));
    }
    let k = inst.num_actions();
    let nm = bank.len();
    let feats = virtual_features(inst, di, 0);
    let mut lin = LinUcb::new(&feats, cfg.lambda, linucb_width(len, k, cfg.delta))?;
    let mut ucb = Ucb::new(nm, len);
    let nb = if nm > 0 { 2 } else { 1 };
    let mut master = Corral::new(nb, len.max(1), eta)?;
    let handles: Vec<Handle> = (0..k).map(Handle::Real).chain((0..nm).map(Handle::Mix)).collect();
    let mut counts = vec![0u64; handles.len()];
    let mut base_counts = vec![0u64; nb];
    let mut rounds = 0;
    let mut stopped = false;
    for _ in 0..len {
        let dr = master.sample(rng);
        let slot = if dr.base == 0 { lin.select() } else { k + ucb.choose() };
        let a = bank.resolve(handles[slot], rng)?;
        let r = pull(inst, a, rng)?;
        if dr.base == 0 {
            lin.update(slot, r);
        } else {
            ucb.update(slot - k, r);
        }
        master.update(dr.base, ((1.0 - r) / 2.0).clamp(0.0, 1.0));
        counts[slot] += 1;
        base_counts[dr.base] += 1;
        rounds += 1;
        if !sink(Pull { arm: a, reward: r, handle: Some(handles[slot]) }) {
            stopped = true;
            break;
        }
    }
    Ok(CorralIterationStats { log: IterationLog { handles, counts, rounds }, base_counts, stopped })
}

/// LinUCB++ with a CORRAL master (η = 1/√(d_i·ΔT_i)) in place of virtual dimensions.
pub fn linucbpp_corral_core(
    inst: &Instance,
    horizon: usize,
    beta: f64,
    cfg: LinUcbConfig,
    rng: &mut Rng,
    sink: &mut Sink<'_>,
) -> Result<LinearTrace> {
    check_beta(beta)?;
    let plan = schedule(horizon.max(2), beta, Some(inst.dim()))?;
    let mut bank = MixtureBank::new();
    let mut iterations = Vec::new();
    let mut base_counts = Vec::new();
    let mut played = 0;
    for i in 0..plan.p {
        if played >= horizon {
            break;
        }
        let eta = 1.0 / ((plan.sizes[i] * plan.lengths[i]) as f64).sqrt();
        let len = plan.lengths[i].min(horizon - played);
        let st = linucbpp_corral_iteration(inst, plan.sizes[i], len, eta, &bank, cfg, rng, sink)?;
        played += st.log.rounds;
        if st.log.rounds > 0 {
            let pairs: Vec<(Handle, u64)> = st.log.handles.iter().copied().zip(st.log.counts.iter().copied()).collect();
            bank.push_counts(&pairs)?;
        }
        iterations.push(st.log);
        base_counts.push(st.base_counts);
        if st.stopped {
            break;
        }
    }
    Ok(LinearTrace { bank, iterations, base_counts })
}

pub fn linucbpp_corral_run(
    inst: &Instance,
    horizon: usize,
    beta: f64,
    cfg: LinUcbConfig,
    rng: &mut Rng,
) -> Result<Vec<RunRecord>> {
    super::collect(inst.best_mean(), |s| linucbpp_corral_core(inst, horizon, beta, cfg, rng, s).map(|_| ()))
}

/// K arms uniform in the d-dimensional unit ball, θ* = (1/√d*, …, 1/√d*, 0, …, 0).
pub fn linear_ball_instance(d: usize, k: usize, dstar: usize, sigma: f64, rng: &mut Rng) -> Result<Instance> {
    use rand::Rng as _;
    if dstar == 0 || dstar > d || k == 0 {
        return invalid("need 0 < dstar <= d and k > 0");
    }
    let actions: Vec<Vec<f64>> = (0..k)
        .map(|_| {
            let g: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
            let n = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            let radius = rng.random::<f64>().powf(1.0 / d as f64);
            g.into_iter().map(|v| v / n * radius).collect()
        })
        .collect();
    let mut theta = vec![0.0; d];
    theta[..dstar].iter_mut().for_each(|v| *v = 1.0 / (dstar as f64).sqrt());
    Instance::builder(actions, theta)
        .dstar(dstar)
        .noise(Noise::Gaussian { sigma })
        .norm_bound(1.0 + 1e-12)
        .build()
}
