//! Benchmarks: Chow's error over finite pools and the smoothed comparator.

use crate::error::{invalid, Result};

/// Prediction of a classifier that may abstain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Label {
    Zero,
    One,
    Abstain,
}

/// A finite weighted marginal over points, each with its regression function η(x).
#[derive(Debug, Clone, PartialEq)]
pub struct AlPool {
    pub weights: Vec<f64>,
    pub eta: Vec<f64>,
}

impl AlPool {
    pub fn new(weights: Vec<f64>, eta: Vec<f64>) -> Result<Self> {
        if weights.len() != eta.len() || weights.is_empty() {
            return invalid("pool weights and eta must have equal nonzero length");
        }
        if weights.iter().any(|&w| !(w >= 0.0)) || eta.iter().any(|&e| !(0.0..=1.0).contains(&e)) {
            return invalid("pool weights must be nonnegative and eta in [0,1]");
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return invalid("pool has zero mass");
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(AlPool { weights, eta })
    }

    pub fn uniform(eta: Vec<f64>) -> Result<Self> {
        AlPool::new(vec![1.0; eta.len()], eta)
    }

    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }

    pub fn bayes(&self) -> Vec<Label> {
        self.eta
            .iter()
            .map(|&e| if e >= 0.5 { Label::One } else { Label::Zero })
            .collect()
    }

    pub fn bayes_error(&self) -> f64 {
        self.weights
            .iter()
            .zip(&self.eta)
            .map(|(w, e)| w * e.min(1.0 - e))
            .sum()
    }

    pub fn abstain_mass(&self, h: &[Label]) -> f64 {
        self.weights
            .iter()
            .zip(h)
            .filter(|(_, &l)| l == Label::Abstain)
            .map(|(w, _)| w)
            .sum()
    }

    /// Text format: one `weight eta` pair per line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut w = Vec::new();
        let mut e = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| crate::Error::Parse { line: i + 1, msg: "not a number".into() })?;
            if vals.len() != 2 {
                return Err(crate::Error::Parse { line: i + 1, msg: "expected `weight eta`".into() });
            }
            w.push(vals[0]);
            e.push(vals[1]);
        }
        AlPool::new(w, e)
    }
}

fn point_error(label: Label, eta: f64, gamma: f64) -> f64 {
    match label {
        Label::Zero => eta,
        Label::One => 1.0 - eta,
        Label::Abstain => 0.5 - gamma,
    }
}

/// Chow's error of `h` minus the Bayes error, summed exactly over the pool.
pub fn chow_excess(h: &[Label], pool: &AlPool, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 0.5) {
        return invalid(format!("gamma {gamma} outside (0, 1/2)"));
    }
    if h.len() != pool.len() {
        return invalid("classifier length differs from pool size");
    }
    let err: f64 = h
        .iter()
        .zip(pool.weights.iter().zip(&pool.eta))
        .map(|(&l, (&w, &e))| w * point_error(l, e, gamma))
        .sum();
    Ok(err - pool.bayes_error())
}

/// Standard excess error when abstentions are replaced by a fair coin.
pub fn randomized_excess(h: &[Label], pool: &AlPool) -> f64 {
    let err: f64 = h
        .iter()
        .zip(pool.weights.iter().zip(&pool.eta))
        .map(|(&l, (&w, &e))| match l {
            Label::Abstain => w * 0.5,
            other => w * point_error(other, e, 0.0),
        })
        .sum();
    err - pool.bayes_error()
}

/// Smallest expected loss over densities capped at 1/(hK) w.r.t. uniform measure.
pub fn smooth_benchmark(losses: &[f64], h: f64) -> Result<f64> {
    if !(h > 0.0 && h <= 1.0) {
        return invalid(format!("h = {h} outside (0, 1]"));
    }
    if losses.is_empty() {
        return invalid("empty loss list");
    }
    let k = losses.len() as f64;
    let cap = 1.0 / (h * k);
    let mut sorted = losses.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let mut left = 1.0;
    let mut value = 0.0;
    for l in sorted {
        if left <= 0.0 {
            break;
        }
        let m = cap.min(left);
        value += m * l;
        left -= m;
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chow_examples() {
        let pool = AlPool::uniform(vec![0.9]).unwrap();
        let v = chow_excess(&[Label::Abstain], &pool, 0.1).unwrap();
        assert!((v - 0.3).abs() < 1e-12);
        let pool = AlPool::uniform(vec![0.5, 1.0]).unwrap();
        let v = chow_excess(&[Label::Abstain, Label::One], &pool, 0.05).unwrap();
        assert!((v + 0.025).abs() < 1e-12);
        assert_eq!(chow_excess(&pool.bayes(), &pool, 0.2).unwrap(), 0.0);
        assert!(chow_excess(&pool.bayes(), &pool, 0.5).is_err());
    }

    #[test]
    fn smooth_examples() {
        let l = [0.1, 0.2, 0.6, 0.9];
        assert!((smooth_benchmark(&l, 1.0).unwrap() - 0.45).abs() < 1e-12);
        assert!((smooth_benchmark(&l, 0.25).unwrap() - 0.1).abs() < 1e-12);
        assert!((smooth_benchmark(&l, 0.5).unwrap() - 0.15).abs() < 1e-12);
        assert!(smooth_benchmark(&l, 0.0).is_err());
        assert!(smooth_benchmark(&l, 1.5).is_err());
    }

    #[test]
    fn randomization_identity() {
        let pool = AlPool::new(vec![1.0, 2.0, 1.0], vec![0.6, 0.5, 0.1]).unwrap();
        let h = [Label::Abstain, Label::Abstain, Label::Zero];
        let gamma = 0.1;
        let lhs = randomized_excess(&h, &pool);
        let rhs = chow_excess(&h, &pool, gamma).unwrap() + gamma * pool.abstain_mass(&h);
        assert!((lhs - rhs).abs() < 1e-12);
    }
}
