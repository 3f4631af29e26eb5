use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rand::seq::SliceRandom;

use super::{schedule, Arms, Handle, MixtureBank, Pull, Sink};
use crate::error::{invalid, Result};
use crate::instance::{Noise, RunRecord};
use crate::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Entry {
    value: f64,
    arm: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.value.total_cmp(&other.value).then(other.arm.cmp(&self.arm))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// MOSS over `n` abstract arms with index μ̂ + √((4/s)·log₊(T/(n·s))).
/// Only the pulled arm's index changes, so a heap gives O(log n) rounds.
#[derive(Debug, Clone)]
pub struct Moss {
    horizon: f64,
    counts: Vec<u64>,
    sums: Vec<f64>,
    heap: BinaryHeap<Entry>,
    next_fresh: usize,
}

impl Moss {
    pub fn new(num_arms: usize, horizon: usize) -> Self {
        Moss::with_stats(vec![0; num_arms], vec![0.0; num_arms], horizon)
    }

    /// Starts from existing pull counts and reward sums.
    pub fn with_stats(counts: Vec<u64>, sums: Vec<f64>, horizon: usize) -> Self {
        let mut m = Moss { horizon: horizon as f64, counts, sums, heap: BinaryHeap::new(), next_fresh: 0 };
        for a in 0..m.counts.len() {
            if m.counts[a] > 0 {
                let value = m.index(a);
                m.heap.push(Entry { value, arm: a });
            }
        }
        m
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn sums(&self) -> &[f64] {
        &self.sums
    }

    pub fn index(&self, a: usize) -> f64 {
        let s = self.counts[a] as f64;
        if s == 0.0 {
            return f64::INFINITY;
        }
        let lp = (self.horizon / (self.len() as f64 * s)).ln().max(0.0);
        self.sums[a] / s + (4.0 / s * lp).sqrt()
    }

    /// Next arm to pull; must be followed by [`Moss::update`] on that arm.
    pub fn choose(&mut self) -> usize {
        while self.next_fresh < self.counts.len() {
            if self.counts[self.next_fresh] == 0 {
                return self.next_fresh;
            }
            self.next_fresh += 1;
        }
        self.heap.pop().expect("heap holds every pulled arm").arm
    }

    pub fn update(&mut self, a: usize, reward: f64) {
        self.counts[a] += 1;
        self.sums[a] += reward;
        let value = self.index(a);
        self.heap.push(Entry { value, arm: a });
    }
}

/// MOSS on all arms of `arms` for `horizon` rounds.
pub fn moss_core(arms: &Arms, horizon: usize, rng: &mut Rng, sink: &mut Sink<'_>) -> Result<Vec<u64>> {
    let mut m = Moss::new(arms.len(), horizon);
    for _ in 0..horizon {
        let a = m.choose();
        let r = arms.pull(a, rng)?;
        m.update(a, r);
        if !sink(Pull { arm: a, reward: r, handle: None }) {
            break;
        }
    }
    Ok(m.counts)
}

pub fn moss_run(arms: &Arms, horizon: usize, rng: &mut Rng) -> Result<Vec<RunRecord>> {
    if horizon < arms.len() {
        return invalid(format!("horizon {horizon} below number of arms {}", arms.len()));
    }
    super::collect(arms.best(), |s| moss_core(arms, horizon, rng, s).map(|_| ()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Real arms drawn uniformly, statistics reset every iteration.
    Vanilla,
    /// Top empirical real arms after the first iteration, statistics carried over.
    Empirical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MossppOptions {
    pub beta: f64,
    pub empirical_selection: bool,
    pub reuse_stats: bool,
}

impl MossppOptions {
    pub fn new(beta: f64, variant: Variant) -> Self {
        let emp = variant == Variant::Empirical;
        MossppOptions { beta, empirical_selection: emp, reuse_stats: emp }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationLog {
    pub handles: Vec<Handle>,
    pub counts: Vec<u64>,
    pub rounds: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MossppTrace {
    pub bank: MixtureBank,
    pub iterations: Vec<IterationLog>,
}

fn select_real(n: usize, k: usize, stats: Option<&[(u64, f64)]>, rng: &mut Rng) -> Vec<usize> {
    if k >= n {
        return (0..n).collect();
    }
    match stats {
        None => rand::seq::index::sample(rng, n, k).into_vec(),
        Some(st) => {
            let mut seen: Vec<usize> = (0..n).filter(|&a| st[a].0 > 0).collect();
            seen.sort_by(|&a, &b| {
                let ma = st[a].1 / st[a].0 as f64;
                let mb = st[b].1 / st[b].0 as f64;
                mb.total_cmp(&ma).then(a.cmp(&b))
            });
            seen.truncate(k);
            if seen.len() < k {
                let fresh: Vec<usize> = (0..n).filter(|&a| st[a].0 == 0).collect();
                let extra = rand::seq::index::sample(rng, fresh.len(), (k - seen.len()).min(fresh.len()));
                seen.extend(extra.into_iter().map(|i| fresh[i]));
            }
            seen
        }
    }
}

/// MOSS++ (or empMOSS++ through `opts`) for `horizon` rounds.
pub fn mosspp_core(
    arms: &Arms,
    horizon: usize,
    opts: MossppOptions,
    rng: &mut Rng,
    sink: &mut Sink<'_>,
) -> Result<MossppTrace> {
    let plan = schedule(horizon.max(2), opts.beta, None)?;
    let n = arms.len();
    let mut bank = MixtureBank::new();
    let mut iterations = Vec::new();
    let mut real_stats = vec![(0u64, 0.0f64); if opts.reuse_stats || opts.empirical_selection { n } else { 0 }];
    let mut mix_stats: Vec<(u64, f64)> = Vec::new();
    let mut played = 0;
    for i in 0..plan.p {
        if played >= horizon {
            break;
        }
        let stats = (opts.empirical_selection && i > 0).then_some(real_stats.as_slice());
        let real = select_real(n, plan.sizes[i], stats, rng);
        let mut handles: Vec<Handle> = real.iter().map(|&a| Handle::Real(a)).collect();
        handles.extend((0..bank.len()).map(Handle::Mix));
        let len = plan.lengths[i].min(horizon - played);
        let mut moss = if opts.reuse_stats {
            let (c, s) = handles
                .iter()
                .map(|h| match *h {
                    Handle::Real(a) => real_stats[a],
                    Handle::Mix(j) => mix_stats[j],
                })
                .unzip();
            Moss::with_stats(c, s, plan.lengths[i])
        } else {
            Moss::new(handles.len(), plan.lengths[i])
        };
        let mut counts = vec![0u64; handles.len()];
        let mut rounds = 0;
        let mut stop = false;
        for _ in 0..len {
            let k = moss.choose();
            let h = handles[k];
            let a = bank.resolve(h, rng)?;
            let r = arms.pull(a, rng)?;
            moss.update(k, r);
            counts[k] += 1;
            rounds += 1;
            match h {
                Handle::Real(_) if !real_stats.is_empty() => {
                    real_stats[a].0 += 1;
                    real_stats[a].1 += r;
                }
                Handle::Mix(j) => {
                    mix_stats[j].0 += 1;
                    mix_stats[j].1 += r;
                }
                _ => {}
            }
            if !sink(Pull { arm: a, reward: r, handle: Some(h) }) {
                stop = true;
                break;
            }
        }
        played += rounds;
        let pairs: Vec<(Handle, u64)> = handles.iter().copied().zip(counts.iter().copied()).collect();
        if rounds > 0 {
            bank.push_counts(&pairs)?;
            mix_stats.push((0, 0.0));
        }
        iterations.push(IterationLog { handles, counts, rounds });
        if stop {
            break;
        }
    }
    Ok(MossppTrace { bank, iterations })
}

pub fn mosspp_run(arms: &Arms, horizon: usize, beta: f64, variant: Variant, rng: &mut Rng) -> Result<Vec<RunRecord>> {
    let opts = MossppOptions::new(beta, variant);
    super::collect(arms.best(), |s| mosspp_core(arms, horizon, opts, rng, s).map(|_| ()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParallelTrace {
    /// Subroutine chosen for each block.
    pub blocks: Vec<usize>,
    pub subset_sizes: Vec<usize>,
}

/// Parallel with known μ*: ⌈ln T⌉ MOSS subroutines on random subsets of size ⌈2T^{i/p}·ln√T⌉.
pub fn parallel_core(arms: &Arms, horizon: usize, mu_star: f64, rng: &mut Rng, sink: &mut Sink<'_>) -> Result<ParallelTrace> {
    let t = horizon.max(2) as f64;
    let p = t.ln().ceil().max(1.0) as usize;
    let n = arms.len();
    let subsets = (1..=p)
        .map(|i| {
            let alpha = i as f64 / p as f64;
            let size = ((2.0 * t.powf(alpha) * t.sqrt().ln()).ceil() as usize).clamp(1, n);
            if size == n {
                (0..n).collect()
            } else {
                rand::seq::index::sample(rng, n, size).into_vec()
            }
        })
        .collect();
    parallel_with_subsets(arms, horizon, mu_star, subsets, rng, sink)
}

/// Parallel over caller-supplied subsets; blocks of ⌈√T⌉ go to the lowest empirical regret.
pub fn parallel_with_subsets(
    arms: &Arms,
    horizon: usize,
    mu_star: f64,
    subsets: Vec<Vec<usize>>,
    rng: &mut Rng,
    sink: &mut Sink<'_>,
) -> Result<ParallelTrace> {
    if subsets.is_empty() || subsets.iter().any(|s| s.is_empty()) {
        return invalid("every subroutine needs a nonempty subset");
    }
    let block = ((horizon as f64).sqrt().ceil() as usize).max(1);
    let mut subs: Vec<Moss> = subsets.iter().map(|s| Moss::new(s.len(), horizon)).collect();
    let mut pulls = vec![0u64; subs.len()];
    let mut reward = vec![0.0; subs.len()];
    let mut blocks = Vec::new();
    let mut t = 0;
    while t < horizon {
        let k = (0..subs.len())
            .min_by(|&a, &b| {
                let ra = pulls[a] as f64 * mu_star - reward[a];
                let rb = pulls[b] as f64 * mu_star - reward[b];
                ra.total_cmp(&rb).then(a.cmp(&b))
            })
            .expect("nonempty");
        blocks.push(k);
        for _ in 0..block.min(horizon - t) {
            let j = subs[k].choose();
            let a = subsets[k][j];
            let r = arms.pull(a, rng)?;
            subs[k].update(j, r);
            pulls[k] += 1;
            reward[k] += r;
            t += 1;
            if !sink(Pull { arm: a, reward: r, handle: None }) {
                return Ok(ParallelTrace { blocks, subset_sizes: subsets.iter().map(Vec::len).collect() });
            }
        }
    }
    Ok(ParallelTrace { blocks, subset_sizes: subsets.iter().map(Vec::len).collect() })
}

pub fn parallel_run(arms: &Arms, horizon: usize, mu_star: f64, rng: &mut Rng) -> Result<Vec<RunRecord>> {
    super::collect(arms.best(), |s| parallel_core(arms, horizon, mu_star, rng, s).map(|_| ()))
}

/// n Bernoulli arms, m = ⌈n/(2T^α)⌉ of them at 0.9, the rest spread over {0.1,…,0.5}.
pub fn multiple_best_arms(n: usize, alpha: f64, horizon: usize, rng: &mut Rng) -> Result<Arms> {
    if n == 0 || horizon < 2 || !(alpha >= 0.0) {
        return invalid("need n > 0, horizon >= 2 and alpha >= 0");
    }
    let m = ((n as f64 / (2.0 * (horizon as f64).powf(alpha))).ceil() as usize).clamp(1, n);
    let mut means: Vec<f64> = (0..n)
        .map(|i| if i < m { 0.9 } else { 0.1 * (1 + (i - m) % 5) as f64 })
        .collect();
    means.shuffle(rng);
    Arms::new(means, Noise::Bernoulli)
}

/// n Bernoulli arms: m at mean 1, the rest uniform on [0, 0.8].
pub fn caption_like(n: usize, m: usize, rng: &mut Rng) -> Result<Arms> {
    use rand::Rng as _;
    if m == 0 || m > n {
        return invalid("need 0 < m <= n");
    }
    let mut means: Vec<f64> = (0..n).map(|i| if i < m { 1.0 } else { 0.8 * rng.random::<f64>() }).collect();
    means.shuffle(rng);
    Arms::new(means, Noise::Bernoulli)
}
