//! Regret minimization with unknown hardness: MOSS and MOSS++ over virtual
//! mixture-arms, Parallel, LinUCB and LinUCB++ (plain and corralled), and
//! doubling wrappers.

mod linear;
mod mixture;
mod moss;

pub use linear::{
    linear_ball_instance, linucb_core, linucb_run, linucb_width, linucbpp_core, linucbpp_corral_core,
    linucbpp_corral_iteration, linucbpp_corral_run, linucbpp_run, CorralIterationStats, LinUcb, LinUcbConfig,
    LinearTrace,
};
pub use mixture::{Handle, MixtureArm, MixtureBank};
pub use moss::{
    caption_like, moss_core, moss_run, mosspp_core, mosspp_run, multiple_best_arms, parallel_core, parallel_run,
    parallel_with_subsets, IterationLog, Moss, MossppOptions, MossppTrace, ParallelTrace, Variant,
};

use crate::error::{invalid, Result};
use crate::instance::{draw, Instance, Noise, RunRecord};
use crate::Rng;

/// Mean rewards of a multi-armed instance; cheaper than a dense [`Instance`] for many arms.
#[derive(Debug, Clone, PartialEq)]
pub struct Arms {
    pub means: Vec<f64>,
    pub noise: Noise,
}

impl Arms {
    pub fn new(means: Vec<f64>, noise: Noise) -> Result<Self> {
        if means.is_empty() {
            return invalid("no arms");
        }
        if means.iter().any(|m| !m.is_finite()) {
            return invalid("non-finite mean");
        }
        if noise == Noise::Bernoulli && means.iter().any(|m| !(0.0..=1.0).contains(m)) {
            return invalid("bernoulli means must lie in [0,1]");
        }
        Ok(Arms { means, noise })
    }

    pub fn from_instance(inst: &Instance) -> Result<Self> {
        Arms::new(inst.means(), inst.noise())
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    pub fn best(&self) -> f64 {
        self.means.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn pull(&self, arm: usize, rng: &mut Rng) -> Result<f64> {
        draw(self.means[arm], self.noise, rng)
    }
}

/// One round as seen by a sink.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pull {
    /// Real arm that produced the reward.
    pub arm: usize,
    pub reward: f64,
    /// The handle the learner chose, when it differs from a plain arm index.
    pub handle: Option<Handle>,
}

/// Receives every round; returning `false` stops the run.
pub type Sink<'a> = dyn FnMut(Pull) -> bool + 'a;

/// Iteration plan shared by MOSS++ and LinUCB++.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub p: usize,
    /// K_i (or d_i once capped).
    pub sizes: Vec<usize>,
    /// ΔT_i.
    pub lengths: Vec<usize>,
}

/// p = ⌈log₂ T^β⌉, sizes 2^{p+2−i} (capped at `cap`), lengths min(2^{p+i}, T).
pub fn schedule(horizon: usize, beta: f64, cap: Option<usize>) -> Result<Schedule> {
    if !(0.5..1.0).contains(&beta) {
        return invalid(format!("beta {beta} outside [1/2, 1)"));
    }
    if horizon < 2 {
        return invalid("horizon must be at least 2");
    }
    let p = ((beta * (horizon as f64).log2()) - 1e-9).ceil().max(1.0) as usize;
    let sizes = (1..=p)
        .map(|i| {
            let k = 1usize.checked_shl((p + 2 - i) as u32).unwrap_or(usize::MAX);
            cap.map_or(k, |c| k.min(c))
        })
        .collect();
    let lengths = (1..=p)
        .map(|i| 1usize.checked_shl((p + i) as u32).unwrap_or(usize::MAX).min(horizon))
        .collect();
    Ok(Schedule { p, sizes, lengths })
}

/// Collects a sink-driven run into records with benchmark `best`.
pub fn collect<F>(best: f64, run: F) -> Result<Vec<RunRecord>>
where
    F: FnOnce(&mut Sink<'_>) -> Result<()>,
{
    let mut out = Vec::new();
    let mut sink = |p: Pull| {
        out.push(RunRecord::new(out.len(), p.arm, p.reward, best));
        true
    };
    run(&mut sink)?;
    Ok(out)
}

/// Restarts `algo` with horizons 1, 2, 4, … until `total` rounds have been played.
/// Returns the segment lengths actually played.
pub fn anytime_run<F>(total: usize, rng: &mut Rng, mut algo: F, sink: &mut Sink<'_>) -> Result<Vec<usize>>
where
    F: FnMut(usize, &mut Rng, &mut Sink<'_>) -> Result<()>,
{
    let mut done = 0;
    let mut segments = Vec::new();
    let mut i = 0u32;
    let mut stopped = false;
    while done < total && !stopped {
        let h = 1usize << i;
        let want = h.min(total - done);
        let mut played = 0;
        {
            let mut inner = |p: Pull| {
                played += 1;
                if !sink(p) {
                    stopped = true;
                    return false;
                }
                played < want
            };
            algo(h, rng, &mut inner)?;
        }
        done += played;
        segments.push(played);
        if played == 0 {
            break;
        }
        i += 1;
    }
    Ok(segments)
}

/// Pseudo-regret Σ (best − means[arm]) of a record stream.
pub fn pseudo_regret(records: &[RunRecord], means: &[f64]) -> f64 {
    records.iter().map(|r| r.benchmark - means[r.action]).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded;

    #[test]
    fn schedule_formula() {
        let s = schedule(1 << 20, 0.5, None).unwrap();
        assert_eq!(s.p, 10);
        assert_eq!(s.sizes[0], 1 << 11);
        assert_eq!(s.lengths[0], 1 << 11);
        assert!(schedule(100, 1.0, None).is_err());
        assert!(schedule(100, 0.4, None).is_err());
        let s = schedule(2500, 0.5, Some(120)).unwrap();
        assert_eq!(s.sizes, vec![120, 64, 32, 16, 8, 4]);
    }

    #[test]
    fn anytime_segments() {
        let arms = Arms::new(vec![0.5, 0.2], Noise::Bernoulli).unwrap();
        let mut rng = seeded(1);
        let mut n = 0;
        let segs = anytime_run(
            7,
            &mut rng,
            |h, r, s| moss_core(&arms, h, r, s).map(|_| ()),
            &mut |_| {
                n += 1;
                true
            },
        )
        .unwrap();
        assert_eq!(segs, vec![1, 2, 4]);
        assert_eq!(n, 7);
    }
}
