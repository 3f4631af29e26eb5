use rand::Rng as _;

use crate::error::{invalid, Error, Result};
use crate::Rng;

/// Either a real arm or a previously built mixture-arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Handle {
    Real(usize),
    Mix(usize),
}

/// Replays an iteration's empirical play frequencies.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureArm {
    pub level: usize,
    pub components: Vec<(Handle, f64)>,
    cdf: Vec<f64>,
}

impl MixtureArm {
    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MixtureBank {
    arms: Vec<MixtureArm>,
}

impl MixtureBank {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.arms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arms.is_empty()
    }

    pub fn get(&self, j: usize) -> &MixtureArm {
        &self.arms[j]
    }

    /// Adds a mixture from (handle, count) pairs; zero counts are dropped.
    /// Components may only refer to mixtures already in the bank.
    pub fn push_counts(&mut self, counts: &[(Handle, u64)]) -> Result<usize> {
        let total: u64 = counts.iter().map(|c| c.1).sum();
        if total == 0 {
            return invalid("mixture built from zero plays");
        }
        let comps = counts
            .iter()
            .filter(|c| c.1 > 0)
            .map(|&(h, c)| (h, c as f64 / total as f64))
            .collect();
        self.push(comps)
    }

    pub fn push(&mut self, components: Vec<(Handle, f64)>) -> Result<usize> {
        let level = self.arms.len();
        if components.is_empty() {
            return invalid("empty mixture");
        }
        let mut acc = 0.0;
        let mut cdf = Vec::with_capacity(components.len());
        for &(h, w) in &components {
            if !(w >= 0.0) {
                return invalid("negative mixture weight");
            }
            if let Handle::Mix(k) = h {
                if k >= level {
                    return invalid(format!("mixture {level} refers to mixture {k}"));
                }
            }
            acc += w;
            cdf.push(acc);
        }
        if (acc - 1.0).abs() > 1e-9 {
            return invalid(format!("mixture weights sum to {acc}"));
        }
        self.arms.push(MixtureArm { level, components, cdf });
        Ok(level)
    }

    /// Recursive categorical draws down to a real arm.
    pub fn sample(&self, j: usize, rng: &mut Rng) -> Result<usize> {
        let mut cur = j;
        for _ in 0..=self.arms.len() {
            let m = self.arms.get(cur).ok_or(Error::OutOfRange { index: cur, len: self.arms.len() })?;
            let u = rng.random::<f64>() * m.cdf.last().copied().unwrap_or(1.0);
            let i = m.cdf.partition_point(|&c| c <= u).min(m.components.len() - 1);
            match m.components[i].0 {
                Handle::Real(a) => return Ok(a),
                Handle::Mix(k) if k < m.level => cur = k,
                Handle::Mix(k) => {
                    return Err(Error::Numerical(format!("mixture cycle through {k}")));
                }
            }
        }
        Err(Error::Numerical("mixture cycle".into()))
    }

    /// Exact law over real arms, sorted by arm index.
    pub fn flatten(&self, j: usize) -> Vec<(usize, f64)> {
        let mut acc = std::collections::BTreeMap::new();
        self.flatten_into(j, 1.0, &mut acc);
        acc.into_iter().collect()
    }

    fn flatten_into(&self, j: usize, scale: f64, acc: &mut std::collections::BTreeMap<usize, f64>) {
        for &(h, w) in &self.arms[j].components {
            match h {
                Handle::Real(a) => *acc.entry(a).or_insert(0.0) += scale * w,
                Handle::Mix(k) => self.flatten_into(k, scale * w, acc),
            }
        }
    }

    /// Expected reward of mixture `j` given real-arm means.
    pub fn mean(&self, j: usize, means: &dyn Fn(usize) -> f64) -> f64 {
        self.arms[j]
            .components
            .iter()
            .map(|&(h, w)| w * self.handle_mean(h, means))
            .sum()
    }

    pub fn handle_mean(&self, h: Handle, means: &dyn Fn(usize) -> f64) -> f64 {
        match h {
            Handle::Real(a) => means(a),
            Handle::Mix(k) => self.mean(k, means),
        }
    }

    /// Resolves a handle to a real arm.
    pub fn resolve(&self, h: Handle, rng: &mut Rng) -> Result<usize> {
        match h {
            Handle::Real(a) => Ok(a),
            Handle::Mix(k) => self.sample(k, rng),
        }
    }
}
