use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::linalg::{in_range, sym_pinv, weighted_gram};

/// G-optimal design over a set of directions: minimize max_y ‖y‖²_{A(λ)⁻¹}.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignProblem {
    pub actions: Vec<Vec<f64>>,
    pub directions: Vec<Vec<f64>>,
    /// Relative Frank–Wolfe gap that stops the solver.
    pub tolerance: f64,
    pub max_iter: usize,
}

impl DesignProblem {
    pub fn new(actions: Vec<Vec<f64>>, directions: Vec<Vec<f64>>) -> Self {
        DesignProblem { actions, directions, tolerance: 0.01, max_iter: 1000 }
    }

    pub fn dim(&self) -> usize {
        self.actions.first().map_or(0, |a| a.len())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub lambda: Vec<f64>,
    /// max_y ‖y‖²_{A(λ)⁺}; +∞ when a direction leaves the range of A(λ).
    pub value: f64,
    pub iterations: usize,
}

const MIX: f64 = 1e-3;

/// Inverse of A when it is positive definite, pseudo-inverse otherwise.
fn gram_inverse(a: &DMatrix<f64>) -> (DMatrix<f64>, bool) {
    if let Some(ch) = a.clone().cholesky() {
        let inv = ch.inverse();
        if inv.iter().all(|v| v.is_finite()) {
            return (inv, true);
        }
    }
    (sym_pinv(a, 1e-12), false)
}

fn quad_dv(m: &DMatrix<f64>, y: &DVector<f64>) -> f64 {
    y.dot(&(m * y))
}

/// Design value with pseudo-inverse semantics.
pub fn design_value(actions: &[Vec<f64>], lambda: &[f64], directions: &[Vec<f64>]) -> f64 {
    let d = actions.first().map_or(0, |a| a.len());
    let a = weighted_gram(actions, lambda, d);
    let (m, full) = gram_inverse(&a);
    let mut worst: f64 = 0.0;
    for y in directions {
        if !full && !in_range(&a, &m, y, 1e-7) {
            return f64::INFINITY;
        }
        worst = worst.max(quad_dv(&m, &DVector::from_column_slice(y)));
    }
    worst
}

/// Frank–Wolfe with step 2/(k+2) on the max-of-quadratics objective.
///
/// The gradient is taken at a design mixed with 1e-3 of the uniform law so
/// that A stays invertible; the returned value is evaluated without mixing.
/// The best iterate seen is returned.
pub fn fw_optimal_design(problem: &DesignProblem) -> Result<Design> {
    let k = problem.actions.len();
    if k == 0 {
        return invalid("design over an empty action set");
    }
    if problem.directions.is_empty() {
        return invalid("design over an empty direction set");
    }
    let d = problem.dim();
    if problem.directions.iter().any(|y| y.len() != d) || problem.actions.iter().any(|x| x.len() != d) {
        return invalid("direction and action lengths differ");
    }
    let xs: Vec<DVector<f64>> = problem.actions.iter().map(|x| DVector::from_column_slice(x)).collect();
    let ys: Vec<DVector<f64>> = problem.directions.iter().map(|y| DVector::from_column_slice(y)).collect();

    let mut lambda = vec![1.0 / k as f64; k];
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut iterations = 0;
    let mut mixed = vec![0.0; k];
    for it in 1..=problem.max_iter.max(1) {
        iterations = it;
        for (m, &l) in mixed.iter_mut().zip(&lambda) {
            *m = (1.0 - MIX) * l + MIX / k as f64;
        }
        let a = weighted_gram(&problem.actions, &mixed, d);
        let (inv, _) = gram_inverse(&a);
        let (mut vmax, mut ystar) = (f64::NEG_INFINITY, 0);
        for (i, y) in ys.iter().enumerate() {
            let q = quad_dv(&inv, y);
            if q > vmax {
                vmax = q;
                ystar = i;
            }
        }
        if best.as_ref().is_none_or(|b| vmax < b.0) {
            best = Some((vmax, lambda.clone()));
        }
        let g = &inv * &ys[ystar];
        let mut vertex = 0;
        let mut top = f64::NEG_INFINITY;
        for (i, x) in xs.iter().enumerate() {
            let s = x.dot(&g).powi(2);
            if s > top {
                top = s;
                vertex = i;
            }
        }
        // top − vmax is the Frank–Wolfe gap; it bounds the remaining improvement.
        if top - vmax <= problem.tolerance * vmax.abs() {
            break;
        }
        let step = 2.0 / (it as f64 + 2.0);
        for l in lambda.iter_mut() {
            *l *= 1.0 - step;
        }
        lambda[vertex] += step;
    }
    let (_, lambda) = best.expect("at least one iteration");
    let value = design_value(&problem.actions, &lambda, &problem.directions);
    Ok(Design { lambda, value, iterations })
}

/// Samples needed by the rounding procedure: (d² + d + 2)/ζ.
pub fn rounding_budget(d: usize, zeta: f64) -> usize {
    (((d * d + d + 2) as f64) / zeta - 1e-9).ceil() as usize
}

/// Integer allocation over actions.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    pub counts: Vec<u64>,
    /// max_y ‖y‖² under (Σ counts·x xᵀ)⁺.
    pub value: f64,
    /// Whether value ≤ (1+ζ)·design.value/N.
    pub certified: bool,
}

impl Allocation {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// The allocation as a multiset of action indices.
    pub fn pulls(&self) -> Vec<usize> {
        self.counts.iter().enumerate().flat_map(|(a, &c)| std::iter::repeat_n(a, c as usize)).collect()
    }
}

fn alloc_value(problem: &DesignProblem, counts: &[u64]) -> f64 {
    let w: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    design_value(&problem.actions, &w, &problem.directions)
}

/// Efficient apportionment of λ into N pulls, then greedy single-pull moves
/// until the (1+ζ) certificate holds or no move helps.
pub fn round_design(problem: &DesignProblem, design: &Design, n: usize, zeta: f64) -> Result<Allocation> {
    let d = problem.dim();
    let need = rounding_budget(d, zeta);
    if n < need {
        return invalid(format!("rounding needs at least {need} samples, got {n}"));
    }
    let k = problem.actions.len();
    if design.lambda.len() != k {
        return invalid("design length differs from the action count");
    }
    // Keep at most d(d+1)/2 + 1 atoms, the heaviest ones.
    let top = design.lambda.iter().cloned().fold(0.0, f64::max);
    let mut order: Vec<usize> = (0..k).filter(|&i| design.lambda[i] > 1e-9 * top).collect();
    order.sort_by(|&a, &b| design.lambda[b].total_cmp(&design.lambda[a]).then(a.cmp(&b)));
    order.truncate(d * (d + 1) / 2 + 1);
    let mass: f64 = order.iter().map(|&i| design.lambda[i]).sum();
    let lam: Vec<(usize, f64)> = order.iter().map(|&i| (i, design.lambda[i] / mass)).collect();

    let p = lam.len() as f64;
    let scale = n as f64 - p / 2.0;
    let mut counts = vec![0u64; k];
    for &(i, l) in &lam {
        counts[i] = (scale * l).ceil().max(0.0) as u64;
    }
    let mut total: u64 = counts.iter().sum();
    while total < n as u64 {
        let &(i, _) = lam
            .iter()
            .min_by(|a, b| (counts[a.0] as f64 / a.1).total_cmp(&(counts[b.0] as f64 / b.1)))
            .expect("nonempty support");
        counts[i] += 1;
        total += 1;
    }
    while total > n as u64 {
        let &(i, _) = lam
            .iter()
            .filter(|a| counts[a.0] > 0)
            .max_by(|a, b| ((counts[a.0] - 1) as f64 / a.1).total_cmp(&((counts[b.0] - 1) as f64 / b.1)))
            .expect("positive counts");
        counts[i] -= 1;
        total -= 1;
    }

    let target = (1.0 + zeta) * design.value / n as f64;
    let mut value = alloc_value(problem, &counts);
    for _ in 0..(4 * k + 8) {
        if value <= target * (1.0 + 1e-9) {
            break;
        }
        let mut best: Option<(f64, usize, usize)> = None;
        for to in 0..k {
            for from in 0..k {
                if from == to || counts[from] == 0 {
                    continue;
                }
                counts[from] -= 1;
                counts[to] += 1;
                let v = alloc_value(problem, &counts);
                counts[to] -= 1;
                counts[from] += 1;
                if best.is_none_or(|b| v < b.0) {
                    best = Some((v, from, to));
                }
            }
        }
        match best {
            Some((v, from, to)) if v < value => {
                counts[from] -= 1;
                counts[to] += 1;
                value = v;
            }
            _ => break,
        }
    }
    let certified = value <= target * (1.0 + 1e-9);
    Ok(Allocation { counts, value, certified })
}

/// How [`opt_dim`] searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DimSearch {
    /// Descending scan from the cap; correct for any g.
    #[default]
    Linear,
    /// Bisection; only correct when g is nondecreasing.
    Binary,
}

/// Largest d ≤ `d_cap` with g(d) ≤ `budget`.
pub fn opt_dim<G>(budget: f64, d_cap: usize, mut g: G, search: DimSearch) -> Result<usize>
where
    G: FnMut(usize) -> Result<f64>,
{
    if d_cap == 0 {
        return invalid("dimension cap is zero");
    }
    match search {
        DimSearch::Linear => {
            let mut g1 = f64::NAN;
            for d in (1..=d_cap).rev() {
                let v = g(d)?;
                if v <= budget {
                    return Ok(d);
                }
                g1 = v;
            }
            Err(Error::Infeasible { g1, budget })
        }
        DimSearch::Binary => {
            let g1 = g(1)?;
            if g1 > budget {
                return Err(Error::Infeasible { g1, budget });
            }
            let (mut lo, mut hi) = (1, d_cap);
            while lo < hi {
                let mid = (lo + hi).div_ceil(2);
                if g(mid)? <= budget {
                    lo = mid;
                } else {
                    hi = mid - 1;
                }
            }
            Ok(lo)
        }
    }
}

pub(crate) fn truncate(x: &[f64], d: usize) -> Vec<f64> {
    x[..d].to_vec()
}

/// Pairwise differences ψ_d(z) − ψ_d(z′) of a target subset, zero vectors dropped.
pub fn pairwise_directions(targets: &[Vec<f64>], subset: &[usize], d: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for (i, &a) in subset.iter().enumerate() {
        for &b in &subset[i + 1..] {
            let y: Vec<f64> = (0..d).map(|j| targets[a][j] - targets[b][j]).collect();
            if y.iter().any(|&v| v != 0.0) {
                out.push(y);
            }
        }
    }
    out
}

/// Chebyshev fit min_θ max_x |h(x) − ⟨θ, x⟩| by Lawson's reweighting.
/// `start` is a feasible θ whose value bounds the result from above.
pub(crate) fn chebyshev_fit(points: &[Vec<f64>], h: &[f64], start: &[f64], iters: usize) -> (f64, Vec<f64>) {
    let d = start.len();
    let n = points.len();
    let resid = |th: &[f64]| -> f64 {
        points
            .iter()
            .zip(h)
            .map(|(x, &hv)| (hv - crate::linalg::dot(&x[..d], th)).abs())
            .fold(0.0, f64::max)
    };
    let mut best = (resid(start), start.to_vec());
    if n == 0 || d == 0 {
        return best;
    }
    let mut w = vec![1.0 / n as f64; n];
    for _ in 0..iters {
        let mut a = DMatrix::<f64>::zeros(d, d);
        let mut b = DVector::<f64>::zeros(d);
        for ((x, &hv), &wi) in points.iter().zip(h).zip(&w) {
            let v = DVector::from_column_slice(&x[..d]);
            a.ger(wi, &v, &v, 1.0);
            b.axpy(wi * hv, &v, 1.0);
        }
        let th = &sym_pinv(&a, 1e-12) * b;
        let th: Vec<f64> = th.iter().cloned().collect();
        let r = resid(&th);
        if r < best.0 {
            best = (r, th.clone());
        }
        let errs: Vec<f64> = points
            .iter()
            .zip(h)
            .map(|(x, &hv)| (hv - crate::linalg::dot(&x[..d], &th)).abs())
            .collect();
        let mut total = 0.0;
        for (wi, e) in w.iter_mut().zip(&errs) {
            *wi *= e;
            total += *wi;
        }
        if !(total > 1e-300) {
            break;
        }
        for wi in w.iter_mut() {
            *wi /= total;
        }
    }
    best
}
