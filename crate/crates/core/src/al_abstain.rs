//! Active learning with abstention over finite regression classes on a
//! finite pool: the epoch algorithm, the fixed-β (constant label) variant,
//! the misspecification-robust variant and an uncertainty-sampling baseline.

use rand::Rng as _;

use crate::benchmark::{chow_excess, AlPool, Label};
use crate::error::{invalid, Result};
use crate::Rng;

/// A pool with its true η and a finite class of candidate η's.
#[derive(Debug, Clone, PartialEq)]
pub struct AlInstance {
    pub pool: AlPool,
    /// `class[f][x]` is f(x) in [0, 1].
    pub class: Vec<Vec<f64>>,
    /// Declared sup-norm distance from η to the class.
    pub kappa: f64,
}

impl AlInstance {
    pub fn new(pool: AlPool, class: Vec<Vec<f64>>, kappa: f64) -> Result<Self> {
        if class.is_empty() {
            return invalid("empty regression class");
        }
        for f in &class {
            if f.len() != pool.len() {
                return invalid("class member length differs from pool size");
            }
            if f.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return invalid("class values must lie in [0,1]");
            }
        }
        if !(kappa >= 0.0) {
            return invalid("kappa must be nonnegative");
        }
        let inst = AlInstance { pool, class, kappa };
        if inst.best_approximation().1 > kappa + 1e-12 {
            return invalid("class misses eta by more than kappa");
        }
        Ok(inst)
    }

    /// Index of the member closest to η in sup norm, with that distance.
    pub fn best_approximation(&self) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for (i, f) in self.class.iter().enumerate() {
            let d = f.iter().zip(&self.pool.eta).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }

    fn cdf(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.pool
            .weights
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect()
    }
}

/// Decision rule from confidence bounds: abstain when [lcb, ucb] ⊆ [½−γ, ½+γ],
/// otherwise threshold f̂ at ½.
pub fn abstain_label(lcb: f64, ucb: f64, fhat: f64, gamma: f64) -> Label {
    if lcb >= 0.5 - gamma && ucb <= 0.5 + gamma {
        Label::Abstain
    } else if fhat >= 0.5 {
        Label::One
    } else {
        Label::Zero
    }
}

/// Query iff ½ ∈ (lcb, ucb) and the point is not abstained on.
pub fn query_rule(lcb: f64, ucb: f64, label: Label) -> bool {
    lcb < 0.5 && 0.5 < ucb && label != Label::Abstain
}

/// Cumulative squared losses of every member on the queried points.
#[derive(Debug, Clone)]
struct Losses {
    sum: Vec<f64>,
}

impl Losses {
    fn new(n: usize) -> Self {
        Losses { sum: vec![0.0; n] }
    }

    fn update(&mut self, class: &[Vec<f64>], x: usize, y: f64) {
        for (s, f) in self.sum.iter_mut().zip(class) {
            *s += (f[x] - y).powi(2);
        }
    }

    fn argmin(&self) -> usize {
        let mut best = 0;
        for (i, &s) in self.sum.iter().enumerate() {
            if s < self.sum[best] {
                best = i;
            }
        }
        best
    }

    fn active(&self, beta: f64, within: Option<&[usize]>) -> Vec<usize> {
        let top = self.sum[self.argmin()];
        let keep = |&f: &usize| self.sum[f] <= top + beta;
        match within {
            Some(prev) => prev.iter().copied().filter(keep).collect(),
            None => (0..self.sum.len()).filter(keep).collect(),
        }
    }
}

/// Classifier and query region induced by an active set.
fn classify(class: &[Vec<f64>], active: &[usize], fhat: usize, gamma: f64) -> (Vec<Label>, Vec<bool>, Vec<(f64, f64)>) {
    let n = class[0].len();
    let mut labels = Vec::with_capacity(n);
    let mut query = Vec::with_capacity(n);
    let mut bounds = Vec::with_capacity(n);
    for x in 0..n {
        let (lo, hi) = active
            .iter()
            .map(|&f| class[f][x])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        let l = abstain_label(lo, hi, class[fhat][x], gamma);
        labels.push(l);
        query.push(query_rule(lo, hi, l));
        bounds.push((lo, hi));
    }
    (labels, query, bounds)
}

fn draw_point(cdf: &[f64], rng: &mut Rng) -> usize {
    let u = rng.random::<f64>() * cdf.last().copied().unwrap_or(1.0);
    cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

fn draw_label(eta: f64, rng: &mut Rng) -> f64 {
    if rng.random::<f64>() < eta {
        1.0
    } else {
        0.0
    }
}

/// Tunable constants; C_δ = c·ln(|F|·T/δ), T = ⌈c′·ln|F|/(εγ)⌉.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlConstants {
    pub c: f64,
    pub c_prime: f64,
    /// Overrides T.
    pub horizon: Option<u64>,
}

impl Default for AlConstants {
    fn default() -> Self {
        AlConstants { c: 8.0, c_prime: 4.0, horizon: None }
    }
}

impl AlConstants {
    /// ln|F| is floored at 1 so that single-member classes still get a horizon.
    pub fn horizon(&self, class_size: usize, epsilon: f64, gamma: f64) -> u64 {
        self.horizon
            .unwrap_or_else(|| (self.c_prime * (class_size as f64).ln().max(1.0) / (epsilon * gamma)).ceil() as u64)
            .max(2)
    }

    pub fn c_delta(&self, class_size: usize, horizon: u64, delta: f64) -> f64 {
        self.c * (class_size as f64 * horizon as f64 / delta).ln()
    }
}

/// Snapshot taken at an epoch boundary or after a query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlStep {
    pub round: u64,
    pub labels: u64,
    pub chow_excess: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlOutcome {
    pub classifier: Vec<Label>,
    pub labels: u64,
    pub rounds: u64,
    /// Active set behind the returned classifier.
    pub active: Vec<usize>,
    /// Query region of each epoch, in order.
    pub query_regions: Vec<Vec<bool>>,
    pub thresholds: Vec<f64>,
    pub history: Vec<AlStep>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EpochKind {
    Exact,
    Misspecified,
    Uncertainty,
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 0.5) {
        return invalid(format!("gamma {gamma} outside (0, 1/2)"));
    }
    Ok(())
}

fn epoch_core(
    inst: &AlInstance,
    epsilon: f64,
    gamma: f64,
    delta: f64,
    consts: AlConstants,
    kind: EpochKind,
    rng: &mut Rng,
) -> Result<AlOutcome> {
    check_gamma(gamma)?;
    if !(epsilon > 0.0) || !(delta > 0.0 && delta < 1.0) {
        return invalid("epsilon must be positive and delta in (0,1)");
    }
    let nf = inst.class.len();
    let t = consts.horizon(nf, epsilon, gamma);
    let big_m = (t as f64).log2().ceil().max(1.0) as usize;
    let c_delta = consts.c_delta(nf, t, delta);
    let tau = |m: usize| if m == 0 { 0u64 } else { 1u64 << m };
    let beta = |m: usize| {
        let scale = (big_m - m + 1) as f64;
        match kind {
            EpochKind::Misspecified => scale * (2.0 * epsilon * epsilon * tau(big_m - 1) as f64 + 2.0 * c_delta),
            _ => scale * c_delta,
        }
    };
    let cdf = inst.cdf();
    let mut losses = Losses::new(nf);
    let mut active: Option<Vec<usize>> = None;
    let mut labels = 0u64;
    let mut out = AlOutcome {
        classifier: Vec::new(),
        labels: 0,
        rounds: 0,
        active: Vec::new(),
        query_regions: Vec::new(),
        thresholds: Vec::new(),
        history: Vec::new(),
    };
    for m in 1..=big_m {
        let b = beta(m);
        let act = losses.active(b, active.as_deref());
        let fhat = losses.argmin();
        let fhat = if act.contains(&fhat) { fhat } else { act[0] };
        let (h, mut g, bounds) = classify(&inst.class, &act, fhat, gamma);
        if kind == EpochKind::Uncertainty {
            for (q, &(lo, hi)) in g.iter_mut().zip(&bounds) {
                *q = lo <= 0.5 && 0.5 <= hi && !(lo == hi && lo != 0.5);
            }
        }
        out.thresholds.push(b);
        out.query_regions.push(g.clone());
        out.history.push(AlStep { round: tau(m - 1), labels, chow_excess: chow_excess(&h, &inst.pool, gamma)? });
        active = Some(act);
        if m == big_m {
            out.classifier = h;
            break;
        }
        if !g.iter().any(|&q| q) {
            continue;
        }
        for _ in tau(m - 1)..tau(m) {
            let x = draw_point(&cdf, rng);
            if g[x] {
                let y = draw_label(inst.pool.eta[x], rng);
                losses.update(&inst.class, x, y);
                labels += 1;
            }
        }
    }
    out.labels = labels;
    out.rounds = tau(big_m - 1);
    out.active = active.unwrap_or_default();
    Ok(out)
}

/// Epoch-scheduled elimination with abstention; returns ĥ_M and the label count.
pub fn epoch_al_run(inst: &AlInstance, epsilon: f64, gamma: f64, delta: f64, rng: &mut Rng) -> Result<AlOutcome> {
    epoch_core(inst, epsilon, gamma, delta, AlConstants::default(), EpochKind::Exact, rng)
}

pub fn epoch_al_with(
    inst: &AlInstance,
    epsilon: f64,
    gamma: f64,
    delta: f64,
    consts: AlConstants,
    rng: &mut Rng,
) -> Result<AlOutcome> {
    epoch_core(inst, epsilon, gamma, delta, consts, EpochKind::Exact, rng)
}

/// Epoch algorithm with thresholds inflated by 2ε²τ_{M−1} for κ ≤ ε.
pub fn mis_al_run(inst: &AlInstance, epsilon: f64, gamma: f64, delta: f64, rng: &mut Rng) -> Result<AlOutcome> {
    if !(gamma > epsilon) {
        return invalid("misspecified variant needs gamma > epsilon");
    }
    epoch_core(inst, epsilon, gamma, delta, AlConstants::default(), EpochKind::Misspecified, rng)
}

/// Same schedule as the epoch algorithm, but never abstains and queries every
/// point whose confidence range touches ½.
pub fn uncertainty_al_run(
    inst: &AlInstance,
    epsilon: f64,
    gamma: f64,
    delta: f64,
    consts: AlConstants,
    rng: &mut Rng,
) -> Result<AlOutcome> {
    epoch_core(inst, epsilon, gamma, delta, consts, EpochKind::Uncertainty, rng)
}

/// Uniform mixture over per-round classifiers, stored as per-point label frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureClassifier {
    /// `freq[x] = [P(0), P(1), P(⊥)]`.
    pub freq: Vec<[f64; 3]>,
}

impl MixtureClassifier {
    /// Exact Chow excess of the mixture.
    pub fn chow_excess(&self, pool: &AlPool, gamma: f64) -> Result<f64> {
        let mut total = 0.0;
        for (k, l) in [Label::Zero, Label::One, Label::Abstain].into_iter().enumerate() {
            let h = vec![l; pool.len()];
            let w: Vec<f64> = self.freq.iter().map(|f| f[k]).collect();
            let per = AlPool { weights: pool.weights.iter().zip(&w).map(|(a, b)| a * b).collect(), eta: pool.eta.clone() };
            total += chow_excess(&h, &per, gamma)? + per.bayes_error();
        }
        Ok(total - pool.bayes_error())
    }

    pub fn sample(&self, rng: &mut Rng) -> Vec<Label> {
        self.freq
            .iter()
            .map(|f| {
                let u = rng.random::<f64>();
                if u < f[0] {
                    Label::Zero
                } else if u < f[0] + f[1] {
                    Label::One
                } else {
                    Label::Abstain
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EluderOutcome {
    pub mixture: MixtureClassifier,
    pub labels: u64,
    pub rounds: u64,
    pub active: Vec<usize>,
    pub history: Vec<AlStep>,
}

/// Fixed-β variant over `horizon` i.i.d. pool draws.
pub fn eluder_al_run(inst: &AlInstance, horizon: u64, gamma: f64, delta: f64, rng: &mut Rng) -> Result<EluderOutcome> {
    let cdf = inst.cdf();
    let mut draws = 0u64;
    let mut src = std::iter::from_fn(move || {
        if draws >= horizon {
            return None;
        }
        draws += 1;
        Some(None)
    });
    eluder_core(inst, &mut |r: &mut Rng| src.next().map(|_: Option<()>| draw_point(&cdf, r)), gamma, delta, rng)
}

/// Fixed-β variant over a given stream of pool indices.
pub fn eluder_al_stream(
    inst: &AlInstance,
    stream: &[usize],
    gamma: f64,
    delta: f64,
    rng: &mut Rng,
) -> Result<EluderOutcome> {
    if stream.iter().any(|&x| x >= inst.pool.len()) {
        return invalid("stream index outside the pool");
    }
    let mut it = stream.iter().copied();
    eluder_core(inst, &mut |_| it.next(), gamma, delta, rng)
}

fn eluder_core(
    inst: &AlInstance,
    next: &mut dyn FnMut(&mut Rng) -> Option<usize>,
    gamma: f64,
    delta: f64,
    rng: &mut Rng,
) -> Result<EluderOutcome> {
    check_gamma(gamma)?;
    if !(delta > 0.0 && delta < 1.0) {
        return invalid("delta must lie in (0,1)");
    }
    let nf = inst.class.len();
    let beta = 2.0 * (2.0 * nf as f64 / delta).ln();
    let n = inst.pool.len();
    let mut losses = Losses::new(nf);
    let mut counts = vec![[0u64; 3]; n];
    let mut pending = 0u64;
    let mut labels = 0u64;
    let mut rounds = 0u64;
    let mut history = Vec::new();
    let mut state = {
        let act = losses.active(beta, None);
        let (h, g, _) = classify(&inst.class, &act, losses.argmin(), gamma);
        (act, h, g)
    };
    let flush = |counts: &mut Vec<[u64; 3]>, h: &[Label], k: u64| {
        for (c, l) in counts.iter_mut().zip(h) {
            let i = match l {
                Label::Zero => 0,
                Label::One => 1,
                Label::Abstain => 2,
            };
            c[i] += k;
        }
    };
    while let Some(x) = next(rng) {
        rounds += 1;
        pending += 1;
        if state.2[x] {
            flush(&mut counts, &state.1, pending);
            pending = 0;
            let y = draw_label(inst.pool.eta[x], rng);
            losses.update(&inst.class, x, y);
            labels += 1;
            let act = losses.active(beta, None);
            let (h, g, _) = classify(&inst.class, &act, losses.argmin(), gamma);
            history.push(AlStep { round: rounds, labels, chow_excess: chow_excess(&h, &inst.pool, gamma)? });
            state = (act, h, g);
        }
    }
    flush(&mut counts, &state.1, pending);
    let total = rounds.max(1) as f64;
    let freq = if rounds == 0 {
        state
            .1
            .iter()
            .map(|l| match l {
                Label::Zero => [1.0, 0.0, 0.0],
                Label::One => [0.0, 1.0, 0.0],
                Label::Abstain => [0.0, 0.0, 1.0],
            })
            .collect()
    } else {
        counts.iter().map(|c| [c[0] as f64 / total, c[1] as f64 / total, c[2] as f64 / total]).collect()
    };
    Ok(EluderOutcome { mixture: MixtureClassifier { freq }, labels, rounds, active: state.0, history })
}

/// Replaces every ⊥ by a fair coin.
pub fn randomize_abstention(classifier: &[Label], rng: &mut Rng) -> Vec<Label> {
    classifier
        .iter()
        .map(|&l| match l {
            Label::Abstain => {
                if rng.random::<bool>() {
                    Label::One
                } else {
                    Label::Zero
                }
            }
            other => other,
        })
        .collect()
}

/// Threshold pool on n evenly spaced points: η = lo left of a cut and hi from it on.
/// The class holds every cut on a grid of `cuts` positions; the truth is one of them.
pub fn massart_pool(n: usize, cuts: usize, lo: f64, hi: f64, rng: &mut Rng) -> Result<AlInstance> {
    if n < 2 || cuts < 1 || cuts > n {
        return invalid("massart pool needs 2 ≤ n and 1 ≤ cuts ≤ n");
    }
    let positions: Vec<usize> = (0..cuts).map(|i| (i * n) / cuts).collect();
    let class: Vec<Vec<f64>> =
        positions.iter().map(|&c| (0..n).map(|x| if x < c { lo } else { hi }).collect()).collect();
    let truth = rng.random_range(0..cuts);
    let pool = AlPool::uniform(class[truth].clone())?;
    AlInstance::new(pool, class, 0.0)
}

/// Two-point pool of the noise-seeking example: a hard point with η = ½ and
/// mass 1 − p, an easy point with η ∈ {0, 1} and mass p = 1/(2B). The class is
/// f_θ = (θ₁, θ₁ + θ₂) for θ on a grid of step `step` inside the unit ball,
/// clipped to [0, 1].
pub fn noise_seeking_pool(budget: f64, step: f64, positive: bool) -> Result<AlInstance> {
    if !(budget >= 1.0) || !(step > 0.0 && step <= 0.5) {
        return invalid("noise-seeking pool needs budget ≥ 1 and step in (0, 1/2]");
    }
    let p = 1.0 / (2.0 * budget);
    let k = (1.0 / step).round() as i64;
    let mut class = Vec::new();
    for i in -k..=k {
        for j in -k..=k {
            let (t1, t2) = (i as f64 * step, j as f64 * step);
            if t1 * t1 + t2 * t2 > 1.0 + 1e-12 {
                continue;
            }
            let f = vec![t1.clamp(0.0, 1.0), (t1 + t2).clamp(0.0, 1.0)];
            if !class.contains(&f) {
                class.push(f);
            }
        }
    }
    let eta = vec![0.5, if positive { 1.0 } else { 0.0 }];
    if !class.contains(&eta) {
        return invalid("grid step must hit θ* = (1/2, ±1/2)");
    }
    AlInstance::new(AlPool::new(vec![1.0 - p, p], eta)?, class, 0.0)
}

/// Moves η by up to κ inside the class's Massart margins, keeping the class fixed.
pub fn perturbed_pool(base: &AlInstance, kappa: f64, rng: &mut Rng) -> Result<AlInstance> {
    let (fbar, _) = base.best_approximation();
    let eta: Vec<f64> = base.class[fbar]
        .iter()
        .map(|&v| (v + kappa * (2.0 * rng.random::<f64>() - 1.0)).clamp(0.0, 1.0))
        .collect();
    AlInstance::new(AlPool::new(base.pool.weights.clone(), eta)?, base.class.clone(), kappa)
}
