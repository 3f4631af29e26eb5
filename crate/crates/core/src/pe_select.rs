//! Pure-exploration linear bandits with unknown intrinsic dimension:
//! G-optimal designs, rounding, dimension selection, the GEMS elimination
//! loops and their doubling wrappers, and complexity measures.

mod design;
mod gems;

pub use design::{
    design_value, fw_optimal_design, opt_dim, pairwise_directions, round_design, rounding_budget, Allocation, Design,
    DesignProblem, DimSearch,
};
pub use gems::{
    adaptive_fb_cached, adaptive_fb_run, adaptive_fc_cached, adaptive_fc_run, floor_w, gems_fb_cached, gems_fb_run,
    gems_fc_run, rage_run, DesignCache, FbTrace, FcConfig, FcMode, FcTrace, GemsOutcome, GemsStop, Recommendation,
    RoundLog,
};

use design::{chebyshev_fit, truncate};

use crate::error::{invalid, Error, Result};
use crate::instance::{Instance, Noise};

/// x_i = e_i for i ≤ d*, x_{d*+1} = (1−ε)e_{d*} + e_{d*+1}, θ* = e_{d*}, in ℝ^{d*+1}.
/// The best arm is x_{d*} (index d*−1) and the runner-up trails it by ε.
pub fn hard_instance(dstar: usize, epsilon: f64, noise: Noise) -> Result<Instance> {
    if dstar == 0 {
        return invalid("dstar must be at least 1");
    }
    if !(epsilon > 0.0 && epsilon <= 0.5) {
        return invalid("epsilon must lie in (0, 1/2]");
    }
    let big_d = dstar + 1;
    let mut acts: Vec<Vec<f64>> =
        (0..big_d).map(|i| (0..big_d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    acts[dstar][dstar - 1] = 1.0 - epsilon;
    let mut theta = vec![0.0; big_d];
    theta[dstar - 1] = 1.0;
    Instance::builder(acts, theta).dstar(dstar).noise(noise).norm_bound(2.0).require_span(true).build()
}

/// ρ*_d(ε): design value over ψ_d(z*) − ψ_d(z) weighted by 1/max{Δ_z, ε}².
pub fn rho_star(inst: &Instance, d: usize, epsilon: f64) -> Result<f64> {
    if d == 0 || d > inst.dim() {
        return invalid(format!("dimension {d} outside [1, {}]", inst.dim()));
    }
    let z = inst.targets();
    let best = inst.best_target();
    let top = inst.target_mean(best);
    let mut dirs = Vec::new();
    for (i, zi) in z.iter().enumerate() {
        if i == best {
            continue;
        }
        let gap = top - inst.target_mean(i);
        let w = gap.max(epsilon);
        if !(w > 0.0) {
            return Err(Error::InvalidArgument("best target is not unique and epsilon is 0".into()));
        }
        dirs.push((0..d).map(|j| (z[best][j] - zi[j]) / w).collect::<Vec<f64>>());
    }
    if dirs.is_empty() {
        return Ok(0.0);
    }
    let acts = inst.actions().iter().map(|x| truncate(x, d)).collect();
    Ok(fw_optimal_design(&DesignProblem::new(acts, dirs))?.value)
}

/// γ̃(d) for d = 1..=D: worst-case deviation of the best linear fit in ψ_d
/// over actions and targets. Each fit starts from the previous one, so the
/// sequence is nonincreasing.
pub fn misspecification_levels(inst: &Instance) -> Vec<f64> {
    let mut pts: Vec<Vec<f64>> = inst.actions().to_vec();
    pts.extend(inst.targets().iter().cloned());
    let h: Vec<f64> = pts.iter().map(|x| crate::linalg::dot(x, inst.theta())).collect();
    let mut out = Vec::with_capacity(inst.dim());
    let mut start: Vec<f64> = Vec::new();
    for _ in 0..inst.dim() {
        start.push(0.0);
        let (v, th) = chebyshev_fit(&pts, &h, &start, 300);
        let v = out.last().map_or(v, |&prev: &f64| v.min(prev));
        out.push(v);
        start = th;
    }
    out
}

/// Misspecification summary at a target optimality ε.
#[derive(Debug, Clone, PartialEq)]
pub struct MisSpec {
    pub gamma_tilde: Vec<f64>,
    pub epsilon: f64,
    /// Smallest d with γ(d′) ≤ ε for all d′ ≥ d.
    pub d_star_eps: usize,
}

impl MisSpec {
    /// γ(d) is evaluated with ι over the full target set, which upper-bounds
    /// its value over any survivor set.
    pub fn new(inst: &Instance, epsilon: f64) -> Result<MisSpec> {
        if !(epsilon > 0.0) {
            return invalid("epsilon must be positive");
        }
        let gamma_tilde = misspecification_levels(inst);
        let all: Vec<usize> = (0..inst.num_targets()).collect();
        let mut gam = Vec::with_capacity(inst.dim());
        for d in 1..=inst.dim() {
            let dirs = pairwise_directions(inst.targets(), &all, d);
            let iota = if dirs.is_empty() {
                0.0
            } else {
                let acts = inst.actions().iter().map(|x| truncate(x, d)).collect();
                fw_optimal_design(&DesignProblem::new(acts, dirs))?.value
            };
            gam.push(gamma_of(gamma_tilde[d - 1], iota, 1.0));
        }
        let mut d_star_eps = inst.dim();
        for d in (1..=inst.dim()).rev() {
            if gam[d - 1] <= epsilon {
                d_star_eps = d;
            } else {
                break;
            }
        }
        Ok(MisSpec { gamma_tilde, epsilon, d_star_eps })
    }
}

/// min{2·2^{−n} : (2 + √((1+ζ)ι))·γ̃ ≤ 2^{−k}/2 for all k ≤ n}.
fn gamma_of(gt: f64, iota: f64, zeta: f64) -> f64 {
    let c = (2.0 + ((1.0 + zeta) * iota).sqrt()) * gt;
    if c <= 0.0 {
        return 0.0;
    }
    let n = (1.0 / (2.0 * c)).log2().floor().max(0.0);
    2.0 * 0.5f64.powf(n)
}
