//! CORRAL master: log-barrier online mirror descent with learning-rate doubling.

use rand::Rng as _;

use crate::error::{invalid, Result};
use crate::Rng;

#[derive(Debug, Clone)]
pub struct Corral {
    p: Vec<f64>,
    pbar: Vec<f64>,
    eta: Vec<f64>,
    rho_threshold: Vec<f64>,
    min_pbar: Vec<f64>,
    beta: f64,
    mix: f64,
}

/// What the sampled base receives from the master.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Draw {
    pub base: usize,
    pub prob: f64,
    /// 1 / smallest probability this base has had so far.
    pub rho: f64,
}

impl Corral {
    pub fn new(bases: usize, horizon: usize, eta: f64) -> Result<Self> {
        if !(eta > 0.0) {
            return invalid(format!("master learning rate {eta} must be positive"));
        }
        if bases == 0 || horizon == 0 {
            return invalid("need at least one base and a positive horizon");
        }
        let m = bases as f64;
        let t = horizon as f64;
        let beta = if t > std::f64::consts::E { (1.0 / t.ln()).exp() } else { std::f64::consts::E };
        let p = vec![1.0 / m; bases];
        Ok(Corral {
            pbar: p.clone(),
            min_pbar: p.clone(),
            p,
            eta: vec![eta; bases],
            rho_threshold: vec![2.0 * m; bases],
            beta,
            mix: 1.0 / t,
        })
    }

    pub fn num_bases(&self) -> usize {
        self.p.len()
    }

    /// Current sampling distribution q̄.
    pub fn probabilities(&self) -> &[f64] {
        &self.pbar
    }

    pub fn learning_rates(&self) -> &[f64] {
        &self.eta
    }

    pub fn sample(&self, rng: &mut Rng) -> Draw {
        let base = if self.p.len() == 1 {
            0
        } else {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut pick = self.p.len() - 1;
            for (i, &w) in self.pbar.iter().enumerate() {
                acc += w;
                if u < acc {
                    pick = i;
                    break;
                }
            }
            pick
        };
        Draw { base, prob: self.pbar[base], rho: 1.0 / self.min_pbar[base] }
    }

    /// Feeds back the loss of the sampled base.
    pub fn update(&mut self, base: usize, loss: f64) {
        let m = self.p.len();
        if m == 1 {
            return;
        }
        let mut lhat = vec![0.0; m];
        lhat[base] = loss / self.pbar[base];
        self.p = log_barrier_step(&self.p, &lhat, &self.eta);
        for i in 0..m {
            self.pbar[i] = (1.0 - self.mix) * self.p[i] + self.mix / m as f64;
            self.min_pbar[i] = self.min_pbar[i].min(self.pbar[i]);
            if 1.0 / self.pbar[i] > self.rho_threshold[i] {
                self.rho_threshold[i] = 2.0 / self.pbar[i];
                self.eta[i] *= self.beta;
            }
        }
    }
}

/// p'_i = 1/(1/p_i + η_i(ℓ_i − λ)) with λ chosen so that Σ p'_i = 1.
pub fn log_barrier_step(p: &[f64], loss: &[f64], eta: &[f64]) -> Vec<f64> {
    let lo0 = loss.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi0 = loss.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let pole = p
        .iter()
        .zip(loss)
        .zip(eta)
        .map(|((&pi, &li), &ei)| li + 1.0 / (ei * pi))
        .fold(f64::INFINITY, f64::min);
    let mass = |lam: f64| -> f64 {
        p.iter()
            .zip(loss)
            .zip(eta)
            .map(|((&pi, &li), &ei)| 1.0 / (1.0 / pi + ei * (li - lam)))
            .sum()
    };
    let mut lo = lo0;
    let mut hi = hi0.min(pole);
    if hi >= pole {
        hi = pole - (pole - lo).abs() * 1e-12;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) > 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * (1.0 + hi.abs()) {
            break;
        }
    }
    let lam = 0.5 * (lo + hi);
    let out: Vec<f64> = p
        .iter()
        .zip(loss)
        .zip(eta)
        .map(|((&pi, &li), &ei)| (1.0 / (1.0 / pi + ei * (li - lam))).max(0.0))
        .collect();
    let total: f64 = out.iter().sum();
    out.into_iter().map(|v| v / total).collect()
}
