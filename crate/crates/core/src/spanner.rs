//! Barycentric spanners (plain and reweighted), IGW-ArgMax and spanner designs.

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::instance::ActionDistribution;
use crate::linalg::dot;

const PIVOT_FLOOR: f64 = 1e-10;
const REFRESH_EVERY: usize = 32;
const MAX_SWAPS: usize = 100_000;

/// Linear optimization over a finite action set: argmax_a ⟨φ(a), θ⟩.
pub trait LinearOracle {
    fn dim(&self) -> usize;
    fn len(&self) -> usize;
    fn embedding(&self, a: usize) -> &[f64];
    fn argmax(&self, theta: &[f64]) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Exhaustive maximization; ties go to the lowest index.
#[derive(Debug, Clone, Copy)]
pub struct Exhaustive<'a> {
    embeddings: &'a [Vec<f64>],
}

impl<'a> Exhaustive<'a> {
    pub fn new(embeddings: &'a [Vec<f64>]) -> Self {
        Exhaustive { embeddings }
    }
}

impl LinearOracle for Exhaustive<'_> {
    fn dim(&self) -> usize {
        self.embeddings.first().map_or(0, |e| e.len())
    }

    fn len(&self) -> usize {
        self.embeddings.len()
    }

    fn embedding(&self, a: usize) -> &[f64] {
        &self.embeddings[a]
    }

    fn argmax(&self, theta: &[f64]) -> usize {
        argmax_by(self.embeddings.len(), |a| dot(&self.embeddings[a], theta))
    }
}

/// Index maximizing `f`, lowest index on ties.
pub fn argmax_by(n: usize, mut f: impl FnMut(usize) -> f64) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for a in 0..n {
        let v = f(a);
        if v > best_v {
            best = a;
            best_v = v;
        }
    }
    best
}

/// A d×d basis with its inverse and determinant under column replacement.
#[derive(Debug, Clone)]
pub(crate) struct Basis {
    pub cols: Vec<Vec<f64>>,
    pub inv: DMatrix<f64>,
    pub det: f64,
    updates: usize,
}

impl Basis {
    pub fn identity(d: usize) -> Self {
        let cols = (0..d)
            .map(|i| {
                let mut e = vec![0.0; d];
                e[i] = 1.0;
                e
            })
            .collect();
        Basis { cols, inv: DMatrix::identity(d, d), det: 1.0, updates: 0 }
    }

    pub fn from_cols(cols: Vec<Vec<f64>>) -> Result<Self> {
        let mut b = Basis { inv: DMatrix::zeros(0, 0), det: 0.0, cols, updates: 0 };
        b.refresh()?;
        Ok(b)
    }

    pub fn refresh(&mut self) -> Result<()> {
        let d = self.cols.len();
        let m = DMatrix::from_fn(d, d, |i, j| self.cols[j][i]);
        let lu = m.lu();
        let det = lu.determinant();
        if det.abs() < PIVOT_FLOOR.powi(d as i32).max(f64::MIN_POSITIVE) {
            return Err(Error::Singular(det));
        }
        self.inv = lu.try_inverse().ok_or(Error::Singular(det))?;
        self.det = det;
        Ok(())
    }

    /// θ with ⟨x, θ⟩ = det of the basis with column i replaced by x.
    pub fn cofactor(&self, i: usize) -> Vec<f64> {
        self.inv.row(i).iter().map(|v| v * self.det).collect()
    }

    /// Replaces column i by x with a Sherman–Morrison update.
    pub fn replace(&mut self, i: usize, x: &[f64]) -> Result<()> {
        let xv = DVector::from_column_slice(x);
        let c = &self.inv * &xv;
        let piv = c[i];
        if piv.abs() < PIVOT_FLOOR {
            return Err(Error::Singular(piv));
        }
        let mut u = c;
        u[i] -= 1.0;
        let row = self.inv.row(i).transpose();
        self.inv.ger(-1.0 / piv, &u, &row, 1.0);
        self.det *= piv;
        self.cols[i] = x.to_vec();
        self.updates += 1;
        if self.updates % REFRESH_EVERY == 0 {
            self.refresh()?;
        }
        Ok(())
    }

    /// Largest relative deviation of (inv, det) from a full recomputation.
    #[cfg(test)]
    pub fn drift(&self) -> Result<(f64, f64)> {
        let fresh = Basis::from_cols(self.cols.clone())?;
        let inv_err = (&self.inv - &fresh.inv).norm() / fresh.inv.norm();
        let det_err = (self.det - fresh.det).abs() / fresh.det.abs();
        Ok((inv_err, det_err))
    }
}

/// Ordered basis of actions with cached matrix, inverse and determinant.
#[derive(Debug, Clone)]
pub struct SpannerSet {
    pub members: Vec<usize>,
    pub basis: DMatrix<f64>,
    pub basis_inv: DMatrix<f64>,
    pub det: f64,
    /// Column replacements made by the initial phase.
    pub init_steps: usize,
    /// Accepted swaps after initialization.
    pub swaps: usize,
    /// |det| growth factor of each accepted swap.
    pub swap_ratios: Vec<f64>,
    /// Times the run restarted from a fresh initialization after drift.
    pub reinitializations: usize,
}

impl SpannerSet {
    fn from_basis(members: Vec<usize>, b: &Basis, init_steps: usize, swap_ratios: Vec<f64>) -> Self {
        let d = b.cols.len();
        SpannerSet {
            members,
            basis: DMatrix::from_fn(d, d, |i, j| b.cols[j][i]),
            basis_inv: b.inv.clone(),
            det: b.det,
            init_steps,
            swaps: swap_ratios.len(),
            swap_ratios,
            reinitializations: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.members.len()
    }

    /// Coefficients c with basis·c = x.
    pub fn coefficients(&self, x: &[f64]) -> Vec<f64> {
        (&self.basis_inv * DVector::from_column_slice(x)).as_slice().to_vec()
    }

    /// max over points of ‖basis⁻¹ x‖_∞.
    pub fn max_coefficient<'a>(&self, points: impl IntoIterator<Item = &'a [f64]>) -> f64 {
        points
            .into_iter()
            .map(|x| self.coefficients(x).iter().fold(0.0f64, |m, c| m.max(c.abs())))
            .fold(0.0, f64::max)
    }
}

/// Shared local-search loop. `embed` gives the (possibly reweighted) vector of an
/// action and `abs_argmax` an (approximate) maximizer of |⟨embed(a), θ⟩|.
fn local_search(
    d: usize,
    embed: &dyn Fn(usize) -> Vec<f64>,
    abs_argmax: &mut dyn FnMut(&[f64]) -> Result<usize>,
    factor: f64,
    init: Option<&[usize]>,
) -> Result<SpannerSet> {
    let (mut basis, mut members, init_steps) = match init {
        Some(s) => {
            if s.len() != d {
                return invalid(format!("initial set has {} members, need {d}", s.len()));
            }
            (Basis::from_cols(s.iter().map(|&a| embed(a)).collect())?, s.to_vec(), 0)
        }
        None => {
            let mut b = Basis::identity(d);
            let mut members = Vec::with_capacity(d);
            for i in 0..d {
                let theta = b.cofactor(i);
                let a = abs_argmax(&theta)?;
                b.replace(i, &embed(a))?;
                members.push(a);
            }
            (b, members, d)
        }
    };
    let mut ratios = Vec::new();
    'outer: loop {
        if ratios.len() > MAX_SWAPS {
            return Err(Error::Numerical("spanner search did not terminate".into()));
        }
        for i in 0..d {
            let theta = basis.cofactor(i);
            let a = abs_argmax(&theta)?;
            let x = embed(a);
            let val = dot(&x, &theta).abs();
            if val >= factor * basis.det.abs() && a != members[i] {
                let old = basis.det.abs();
                basis.replace(i, &x)?;
                members[i] = a;
                ratios.push(basis.det.abs() / old);
                continue 'outer;
            }
        }
        break;
    }
    Ok(SpannerSet::from_basis(members, &basis, init_steps, ratios))
}

fn abs_argmax_exhaustive(oracle: &dyn LinearOracle, theta: &[f64]) -> usize {
    let plus = oracle.argmax(theta);
    let neg: Vec<f64> = theta.iter().map(|v| -v).collect();
    let minus = oracle.argmax(&neg);
    let vp = dot(oracle.embedding(plus), theta).abs();
    let vm = dot(oracle.embedding(minus), theta).abs();
    if vm > vp || (vm == vp && minus < plus) {
        minus
    } else {
        plus
    }
}

/// C-approximate barycentric spanner of the oracle's embeddings.
pub fn barycentric_spanner(oracle: &dyn LinearOracle, c: f64) -> Result<SpannerSet> {
    barycentric_spanner_from(oracle, c, None)
}

/// As [`barycentric_spanner`] but optionally starting from a given set.
pub fn barycentric_spanner_from(
    oracle: &dyn LinearOracle,
    c: f64,
    init: Option<&[usize]>,
) -> Result<SpannerSet> {
    if !(c > 1.0) {
        return invalid(format!("C = {c} must exceed 1"));
    }
    if oracle.is_empty() {
        return invalid("empty action set");
    }
    let embed = |a: usize| oracle.embedding(a).to_vec();
    let mut search = |theta: &[f64]| Ok(abs_argmax_exhaustive(oracle, theta));
    local_search(oracle.dim(), &embed, &mut search, c, init)
}

/// Runs the plain spanner with C = 2; returns it with r = |det|^{1/d}.
pub fn init_spanner_set(oracle: &dyn LinearOracle) -> Result<(SpannerSet, f64)> {
    let s = barycentric_spanner(oracle, 2.0)?;
    let r = s.det.abs().powf(1.0 / s.dim() as f64);
    Ok((s, r))
}

/// Parameters of the reweighted embedding φ̄(a) = φ(a)/√(offset + η·gap(a)).
#[derive(Debug, Clone, PartialEq)]
pub struct ReweightParams {
    pub eta: f64,
    pub ghat: Vec<f64>,
    pub ahat: usize,
    pub r_init: f64,
    /// 1 for the exact embedding, 1 + d for the practical one.
    pub offset: f64,
}

impl ReweightParams {
    pub fn new(eta: f64, ghat: Vec<f64>, ahat: usize, r_init: f64) -> Self {
        ReweightParams { eta, ghat, ahat, r_init, offset: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta >= 0.0) {
            return invalid("eta must be nonnegative");
        }
        if !(self.r_init > 0.0 && self.r_init <= 1.0) {
            return invalid(format!("r = {} outside (0, 1]", self.r_init));
        }
        if !(self.offset >= 1.0) {
            return invalid("offset must be at least 1");
        }
        Ok(())
    }

    /// Estimated gap ⟨φ(â) − φ(a), ĝ⟩, floored at 0.
    pub fn gap(&self, oracle: &dyn LinearOracle, a: usize) -> f64 {
        let top = dot(oracle.embedding(self.ahat), &self.ghat);
        (top - dot(oracle.embedding(a), &self.ghat)).max(0.0)
    }

    pub fn scale(&self, oracle: &dyn LinearOracle, a: usize) -> f64 {
        1.0 / (self.offset + self.eta * self.gap(oracle, a)).sqrt()
    }

    pub fn reweighted(&self, oracle: &dyn LinearOracle, a: usize) -> Vec<f64> {
        let s = self.scale(oracle, a);
        oracle.embedding(a).iter().map(|v| v * s).collect()
    }

    /// Grid magnitudes per sign: ⌈d·log_{4/3}((2η + offset)/r)⌉.
    pub fn grid_size(&self, d: usize) -> usize {
        let n = d as f64 * ((2.0 * self.eta + self.offset) / self.r_init).ln() / (4.0f64 / 3.0).ln();
        (n.ceil() as usize).max(1)
    }
}

/// Approximate argmax_a ⟨φ̄(a), θ⟩² through linear optimization on a grid of ε.
pub fn igw_argmax(theta: &[f64], oracle: &dyn LinearOracle, params: &ReweightParams) -> Result<usize> {
    if oracle.is_empty() {
        return invalid("empty action set");
    }
    let d = oracle.dim();
    let n = params.grid_size(d);
    let mut candidates: Vec<usize> = Vec::with_capacity(2 * n);
    let mut bar = vec![0.0; d];
    for sign in [1.0, -1.0] {
        let mut mag = 1.0;
        for _ in 0..n {
            mag *= 0.75;
            let eps = sign * mag;
            for k in 0..d {
                bar[k] = 2.0 * eps * theta[k] + eps * eps * params.eta * params.ghat[k];
            }
            candidates.push(oracle.argmax(&bar));
        }
    }
    candidates.sort_unstable();
    candidates.dedup();
    let iota = |a: usize| {
        let v = dot(&params.reweighted(oracle, a), theta);
        v * v
    };
    let mut best = candidates[0];
    let mut best_v = iota(best);
    for &a in &candidates[1..] {
        let v = iota(a);
        if v > best_v {
            best = a;
            best_v = v;
        }
    }
    Ok(best)
}

/// C-approximate spanner of the reweighted embeddings, starting from `init`.
pub fn reweighted_spanner(
    oracle: &dyn LinearOracle,
    params: &ReweightParams,
    c: f64,
    init: &[usize],
) -> Result<SpannerSet> {
    params.validate()?;
    if !(c > std::f64::consts::SQRT_2) {
        return invalid(format!("C = {c} must exceed sqrt(2)"));
    }
    let d = oracle.dim();
    if init.len() != d {
        return invalid("initial set must have d members");
    }
    let raw = Basis::from_cols(init.iter().map(|&a| oracle.embedding(a).to_vec()).collect())?;
    let floor = params.r_init.powi(d as i32);
    if raw.det.abs() < floor * (1.0 - 1e-9) {
        return invalid(format!("|det| = {} below r^d = {floor}", raw.det.abs()));
    }
    let factor = std::f64::consts::SQRT_2 * c / 2.0;
    let rbar = params.r_init / (params.offset + 2.0 * params.eta).sqrt();
    let det_floor = rbar.powi(d as i32) * (1.0 - 1e-9);
    let embed = |a: usize| params.reweighted(oracle, a);
    let mut search = |theta: &[f64]| igw_argmax(theta, oracle, params);
    let out = local_search(d, &embed, &mut search, factor, Some(init))?;
    if out.det.abs() >= det_floor {
        return Ok(out);
    }
    // Drift broke |det φ̄(S)| ≥ r̄^d: restart from a fresh plain spanner.
    let (fresh, r) = init_spanner_set(oracle)?;
    let mut p = params.clone();
    p.r_init = r.min(params.r_init);
    let mut search = |theta: &[f64]| igw_argmax(theta, oracle, &p);
    let embed = |a: usize| p.reweighted(oracle, a);
    let mut out = local_search(d, &embed, &mut search, factor, Some(&fresh.members))?;
    out.reinitializations += 1;
    Ok(out)
}

/// Uniform design over the spanner members.
pub fn spanner_to_design(spanner: &SpannerSet) -> ActionDistribution {
    ActionDistribution::uniform(spanner.members.clone())
}

/// sup_a ‖φ(a)‖²_{V(q)⁻¹} with V(q) = Σ q(a) φ(a)φ(a)ᵀ. Infinite if V is singular.
pub fn design_value(points: &[Vec<f64>], design: &ActionDistribution) -> f64 {
    let d = points.first().map_or(0, |p| p.len());
    let mut v = DMatrix::zeros(d, d);
    for (&a, &w) in design.support.iter().zip(&design.weights) {
        let x = DVector::from_column_slice(&points[a]);
        v.ger(w, &x, &x, 1.0);
    }
    let Some(inv) = v.try_inverse() else {
        return f64::INFINITY;
    };
    points
        .iter()
        .map(|p| crate::linalg::quad(&inv, p))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded;
    use rand::Rng as _;

    fn basis(d: usize) -> Vec<Vec<f64>> {
        (0..d)
            .map(|i| {
                let mut e = vec![0.0; d];
                e[i] = 1.0;
                e
            })
            .collect()
    }

    fn random_points(k: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = seeded(seed);
        (0..k)
            .map(|_| {
                let v: Vec<f64> = (0..d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
                let n = crate::linalg::norm(&v).max(1.0);
                v.into_iter().map(|x| x / n).collect()
            })
            .collect()
    }

    #[test]
    fn standard_basis_spanner() {
        let e = basis(4);
        let s = barycentric_spanner(&Exhaustive::new(&e), 2.0).unwrap();
        let mut m = s.members.clone();
        m.sort();
        assert_eq!(m, vec![0, 1, 2, 3]);
        assert!((s.det.abs() - 1.0).abs() < 1e-12);
        let (_, r) = init_spanner_set(&Exhaustive::new(&e)).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        let half: Vec<Vec<f64>> = e.iter().map(|v| v.iter().map(|x| x / 2.0).collect()).collect();
        let (_, r) = init_spanner_set(&Exhaustive::new(&half)).unwrap();
        assert!((r - 0.5).abs() < 1e-12);
    }

    #[test]
    fn long_vector_enters() {
        let pts = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![10.0, 10.0]];
        let s = barycentric_spanner(&Exhaustive::new(&pts), 2.0).unwrap();
        assert!(s.members.contains(&2));
    }

    #[test]
    fn non_spanning_is_error() {
        let pts = vec![vec![1.0, 0.0], vec![2.0, 0.0]];
        assert!(matches!(barycentric_spanner(&Exhaustive::new(&pts), 2.0), Err(Error::Singular(_))));
        assert!(barycentric_spanner(&Exhaustive::new(&pts), 1.0).is_err());
    }

    #[test]
    fn rank_one_updates_track_recomputation() {
        let pts = random_points(60, 5, 11);
        let mut b = Basis::from_cols(pts[..5].to_vec()).unwrap();
        let mut rng = seeded(5);
        for step in 0..100 {
            let i = step % 5;
            let a = rng.random_range(5..60);
            if b.replace(i, &pts[a]).is_err() {
                continue;
            }
            let (ei, ed) = b.drift().unwrap();
            assert!(ei < 1e-6 && ed < 1e-6, "step {step}: {ei} {ed}");
        }
    }

    #[test]
    fn grid_size_formula() {
        let p = ReweightParams::new(4.0, vec![0.0, 0.0], 0, 0.5);
        assert_eq!(p.grid_size(2), 21);
    }

    #[test]
    fn zero_eta_matches_plain_argmax() {
        for seed in 0..20 {
            let pts = random_points(40, 3, seed);
            let o = Exhaustive::new(&pts);
            let p = ReweightParams::new(0.0, vec![0.3, 0.1, 0.0], 0, 0.5);
            let theta = vec![0.2, -0.4, 0.1];
            let got = igw_argmax(&theta, &o, &p).unwrap();
            let want = abs_argmax_exhaustive(&o, &theta);
            assert_eq!(dot(&pts[got], &theta).abs(), dot(&pts[want], &theta).abs());
        }
    }

    #[test]
    fn reweighted_certificate() {
        for seed in 0..30 {
            let pts = random_points(50, 4, 100 + seed);
            let o = Exhaustive::new(&pts);
            let (init, r) = init_spanner_set(&o).unwrap();
            let ghat = pts[7].clone();
            let ahat = o.argmax(&ghat);
            let p = ReweightParams::new(5.0, ghat, ahat, r.min(0.999));
            let s = reweighted_spanner(&o, &p, 2.0, &init.members).unwrap();
            let rw: Vec<Vec<f64>> = (0..pts.len()).map(|a| p.reweighted(&o, a)).collect();
            let m = s.max_coefficient(rw.iter().map(|v| v.as_slice()));
            assert!(m <= 2.0 + 1e-6, "seed {seed}: {m}");
            for r in &s.swap_ratios {
                assert!(*r >= std::f64::consts::SQRT_2 - 1e-9);
            }
        }
    }

    #[test]
    fn design_of_standard_basis() {
        let e = basis(3);
        let s = barycentric_spanner(&Exhaustive::new(&e), 2.0).unwrap();
        let q = spanner_to_design(&s);
        assert!((design_value(&e, &q) - 3.0).abs() < 1e-12);
        let one = vec![vec![1.0]];
        let s = barycentric_spanner(&Exhaustive::new(&one), 2.0).unwrap();
        assert!((design_value(&one, &spanner_to_design(&s)) - 1.0).abs() < 1e-12);
    }
}
