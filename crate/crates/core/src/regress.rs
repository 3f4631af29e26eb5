//! Online squared-loss regression oracles.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};

/// What an oracle is asked about: a (context, action) pair and its feature vector.
#[derive(Debug, Clone, Copy)]
pub struct Query<'a> {
    pub context: usize,
    pub action: usize,
    pub features: &'a [f64],
}

impl<'a> Query<'a> {
    pub fn key(context: usize, action: usize) -> Query<'static> {
        Query { context, action, features: &[] }
    }

    pub fn features(features: &'a [f64]) -> Query<'a> {
        Query { context: 0, action: 0, features }
    }
}

pub trait RegressionOracle {
    fn predict(&self, q: Query<'_>) -> f64;

    fn update(&mut self, weight: f64, q: Query<'_>, reward: f64) -> Result<()>;

    /// Range of predictions over the active set {f : L_f ≤ min L + beta}.
    fn confidence_range(&self, _beta: f64, _q: Query<'_>) -> Result<(f64, f64)> {
        Err(Error::Unsupported("confidence_range needs a finite class"))
    }

    /// Bound on cumulative squared-loss regret after `horizon` rounds. `delta` is unused
    /// by both oracles here.
    fn reg_sq(&self, horizon: usize, delta: f64) -> f64;
}

/// Exponential-weights aggregation over a finite class given as lookup tables.
#[derive(Debug, Clone)]
pub struct FiniteClassOracle {
    members: Vec<Vec<f64>>,
    num_actions: usize,
    cum_sq_loss: Vec<f64>,
    log_weights: Vec<f64>,
    eta: f64,
}

impl FiniteClassOracle {
    /// `members[f][context * num_actions + action]` is f(x, a) in [0, 1].
    pub fn new(members: Vec<Vec<f64>>, num_actions: usize) -> Result<Self> {
        if members.is_empty() {
            return invalid("class must have at least one member");
        }
        let len = members[0].len();
        if num_actions == 0 || len % num_actions != 0 {
            return invalid("member table length must be a multiple of num_actions");
        }
        for m in &members {
            if m.len() != len {
                return invalid("member tables have different lengths");
            }
            if m.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return invalid("member predictions must lie in [0,1]");
            }
        }
        let n = members.len();
        Ok(FiniteClassOracle {
            members,
            num_actions,
            cum_sq_loss: vec![0.0; n],
            log_weights: vec![0.0; n],
            eta: 0.5,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn member_value(&self, f: usize, context: usize, action: usize) -> f64 {
        self.members[f][context * self.num_actions + action]
    }

    pub fn cum_sq_loss(&self) -> &[f64] {
        &self.cum_sq_loss
    }

    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// Indices of members within `beta` of the smallest cumulative loss.
    pub fn active_set(&self, beta: f64) -> Vec<usize> {
        let best = self.cum_sq_loss.iter().cloned().fold(f64::INFINITY, f64::min);
        (0..self.len())
            .filter(|&f| self.cum_sq_loss[f] <= best + beta)
            .collect()
    }
}

impl RegressionOracle for FiniteClassOracle {
    fn predict(&self, q: Query<'_>) -> f64 {
        let key = q.context * self.num_actions + q.action;
        let top = self.log_weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut num = 0.0;
        let mut den = 0.0;
        for (m, &lw) in self.members.iter().zip(&self.log_weights) {
            let w = (lw - top).exp();
            num += w * m[key];
            den += w;
        }
        (num / den).clamp(0.0, 1.0)
    }

    fn update(&mut self, weight: f64, q: Query<'_>, reward: f64) -> Result<()> {
        if !(weight >= 0.0) {
            return invalid(format!("negative weight {weight}"));
        }
        if weight == 0.0 {
            return Ok(());
        }
        let key = q.context * self.num_actions + q.action;
        for f in 0..self.members.len() {
            let l = (self.members[f][key] - reward).powi(2);
            self.cum_sq_loss[f] += weight * l;
            self.log_weights[f] -= self.eta * weight * l;
        }
        Ok(())
    }

    fn confidence_range(&self, beta: f64, q: Query<'_>) -> Result<(f64, f64)> {
        if !(beta >= 0.0) {
            return invalid("beta must be nonnegative");
        }
        let key = q.context * self.num_actions + q.action;
        let (lo, hi) = self
            .active_set(beta)
            .into_iter()
            .map(|f| self.members[f][key])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        Ok((lo, hi))
    }

    fn reg_sq(&self, _horizon: usize, _delta: f64) -> f64 {
        2.0 * (self.len() as f64).ln().max(1.0)
    }
}

/// Recursive weighted ridge regression with a Sherman–Morrison inverse.
#[derive(Debug, Clone)]
pub struct RidgeOracle {
    gram_inv: DMatrix<f64>,
    moment: DVector<f64>,
    theta: DVector<f64>,
    lambda: f64,
}

impl RidgeOracle {
    pub fn new(dim: usize, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) || dim == 0 {
            return invalid("ridge needs dim > 0 and lambda > 0");
        }
        Ok(RidgeOracle {
            gram_inv: DMatrix::identity(dim, dim) / lambda,
            moment: DVector::zeros(dim),
            theta: DVector::zeros(dim),
            lambda,
        })
    }

    pub fn dim(&self) -> usize {
        self.moment.len()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn estimate(&self) -> &[f64] {
        self.theta.as_slice()
    }

    pub fn gram_inv(&self) -> &DMatrix<f64> {
        &self.gram_inv
    }

    /// Unclipped linear prediction ⟨θ̂, φ⟩.
    pub fn raw_predict(&self, features: &[f64]) -> f64 {
        self.theta.as_slice().iter().zip(features).map(|(a, b)| a * b).sum()
    }
}

impl RegressionOracle for RidgeOracle {
    fn predict(&self, q: Query<'_>) -> f64 {
        self.raw_predict(q.features).clamp(0.0, 1.0)
    }

    fn update(&mut self, weight: f64, q: Query<'_>, reward: f64) -> Result<()> {
        if !(weight >= 0.0) {
            return invalid(format!("negative weight {weight}"));
        }
        if q.features.len() != self.dim() {
            return invalid("feature dimension mismatch");
        }
        if weight == 0.0 {
            return Ok(());
        }
        let x = DVector::from_column_slice(q.features);
        let vx = &self.gram_inv * &x;
        let denom = 1.0 + weight * x.dot(&vx);
        self.gram_inv.ger(-weight / denom, &vx, &vx, 1.0);
        self.moment.axpy(weight * reward, &x, 1.0);
        self.theta = &self.gram_inv * &self.moment;
        Ok(())
    }

    fn reg_sq(&self, horizon: usize, _delta: f64) -> f64 {
        let d = self.dim() as f64;
        (d * (1.0 + horizon as f64 / (d * self.lambda)).ln()).max(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ridge_single_update() {
        let mut o = RidgeOracle::new(1, 1.0).unwrap();
        assert_eq!(o.predict(Query::features(&[1.0])), 0.0);
        o.update(1.0, Query::features(&[1.0]), 1.0).unwrap();
        assert!((o.estimate()[0] - 0.5).abs() < 1e-15);
        assert!(o.update(-1.0, Query::features(&[1.0]), 1.0).is_err());
        assert!(o.confidence_range(1.0, Query::features(&[1.0])).is_err());
    }

    #[test]
    fn finite_class_basics() {
        let single = FiniteClassOracle::new(vec![vec![0.3, 0.7]], 2).unwrap();
        assert_eq!(single.predict(Query::key(0, 1)), 0.7);
        assert_eq!(single.confidence_range(0.0, Query::key(0, 0)).unwrap(), (0.3, 0.3));

        let mut two = FiniteClassOracle::new(vec![vec![0.0], vec![1.0]], 1).unwrap();
        assert!((two.predict(Query::key(0, 0)) - 0.5).abs() < 1e-15);
        let before = two.clone();
        two.update(0.0, Query::key(0, 0), 1.0).unwrap();
        assert_eq!(two.log_weights(), before.log_weights());
        for _ in 0..10 {
            two.update(1.0, Query::key(0, 0), 1.0).unwrap();
        }
        assert_eq!(two.cum_sq_loss(), &[10.0, 0.0]);
        assert!(two.log_weights()[1] > two.log_weights()[0]);
        assert_eq!(two.confidence_range(1.0, Query::key(0, 0)).unwrap(), (1.0, 1.0));
        assert_eq!(two.confidence_range(f64::INFINITY, Query::key(0, 0)).unwrap(), (0.0, 1.0));
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(FiniteClassOracle::new(vec![], 1).is_err());
        assert!(FiniteClassOracle::new(vec![vec![1.5]], 1).is_err());
        assert!(FiniteClassOracle::new(vec![vec![0.5, 0.5, 0.5]], 2).is_err());
    }
}
