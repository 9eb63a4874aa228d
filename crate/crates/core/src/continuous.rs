//! Log-concave measures dμ = e^{−v(x)}dx discretized on the line, products
//! of such lines, geometric influences, the uniform-enlargement boundary,
//! the semigroup inequality suite (commutation, reverse Poincaré, Ledoux,
//! the chained projection bound), and junta extraction for smooth functions
//! and monotone sets.
//!
//! A line measure is represented by a birth-death chain on a uniform grid:
//! the jump rates r(j→j±1) = (1/h²)·√(w_{j±1}/w_j) satisfy detailed balance
//! by construction and their generator matches Lf = f″ − v′f′ to O(h²).
//! Everything downstream is quadrature on the (product) grid; there is no
//! sampling anywhere, so every number here is reproducible bit for bit.
//!
//! Accuracy notes, measured on the Gaussian model: eigenvalue k of −L is
//! reproduced within 2.4e-3 for k ≤ 12 at N = 513, while the decay factor
//! ⟨P_t ψ_k, ψ_k⟩/‖ψ_k‖₂² tracks e^{−kt} within 1e-4. Pointwise checks on
//! evolved functions use finite-difference gradients whose bias is O(h²)
//! times higher derivatives, so their tolerances are meaningful for the
//! inequality margins, not as statements about grid convergence.

use std::cell::OnceCell;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, FailedExtraction, Result};
use crate::junta::{alpha_exponent, JuntaCertificate, MAX_RETRIES};
use crate::linalg;
use crate::report::TwoSidedReport;
use crate::tolerances;

/// Grid extent rule: the grid runs outward from the potential minimum until
/// v − v_min reaches this rise on both sides. e^{−50} tails leave relative
/// truncated mass around 1e−22 for the potentials in scope, which keeps the
/// half-space boundary-density checks meaningful at 1e−6.
const POTENTIAL_RISE: f64 = 50.0;

/// Pointwise (sup-norm) checks are taken over "bulk" nodes, those whose
/// factor weight is at least this fraction of the peak weight. Beyond the
/// bulk the measure carries nothing and the reflecting grid boundary
/// distorts one-sided differences.
const BULK_DENSITY_FLOOR: f64 = 1e-12;

/// How an evolution request is routed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FastPath {
    /// Expand in orthonormal Hermite polynomials and decay coefficient k by
    /// e^{−kt}, provided the expansion residual passes the eligibility gate.
    ExactGaussianHermite { max_degree: usize },
    /// Always use the spectral exponential of the tri-diagonal generator.
    GridOnly,
}

#[derive(Debug, Clone)]
struct LineSpectral {
    /// Eigenvalues of −L, ascending; values[0] ≈ 0.
    values: Vec<f64>,
    /// Orthonormal eigenvectors of the symmetrized operator, paired with
    /// `values`.
    vectors: Vec<Vec<f64>>,
    sqrt_w: Vec<f64>,
}

/// One discretized measure e^{−v(x)}dx on a uniform grid.
///
/// `flux[j] = (1/h²)·√(w_j·w_{j+1})` is the symmetric edge conductance; the
/// rates are `up(j) = flux[j]/w_j` and `down(j+1) = flux[j]/w_{j+1}`, so
/// detailed balance `up(j)·w_j = down(j+1)·w_{j+1}` holds to rounding of a
/// single division.
pub struct LineModel {
    nodes: Vec<f64>,
    h: f64,
    weights: Vec<f64>,
    flux: Vec<f64>,
    kappa: f64,
    fast_path: FastPath,
    potential: Box<dyn Fn(f64) -> f64>,
    /// min over nodes of v, subtracted before exponentiating.
    v_floor: f64,
    /// Σ e^{−(v_j − v_floor)}·h, the continuum normalizer in shifted form.
    z_shift: f64,
    spectral: OnceCell<LineSpectral>,
}

impl fmt::Debug for LineModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LineModel")
            .field("n_nodes", &self.nodes.len())
            .field("lo", &self.nodes[0])
            .field("hi", &self.nodes[self.nodes.len() - 1])
            .field("kappa", &self.kappa)
            .field("fast_path", &self.fast_path)
            .finish()
    }
}

/// Find [lo, hi] such that v rises by `POTENTIAL_RISE` over the minimum at
/// both ends, symmetrized when the potential is (nearly) even so that 0
/// lands on a node (odd N) or a cell edge (even N).
fn grid_extent(v: &dyn Fn(f64) -> f64) -> Result<(f64, f64)> {
    let mut x_min = 0.0;
    let mut v_min = v(0.0);
    for i in 0..=16000 {
        let x = -40.0 + i as f64 * 0.005;
        let val = v(x);
        if val < v_min {
            v_min = val;
            x_min = x;
        }
    }
    if !v_min.is_finite() {
        return Err(Error::InvalidParameter(
            "potential is not finite near its minimum".into(),
        ));
    }
    let target = v_min + POTENTIAL_RISE;
    let march = |dir: f64| -> Result<f64> {
        let mut x = x_min;
        let mut steps = 0usize;
        while v(x) < target {
            x += dir * 0.5;
            steps += 1;
            if steps > 4000 {
                return Err(Error::Precondition(format!(
                    "potential does not rise by {POTENTIAL_RISE} within \
                     2000 units of its minimum; a larger grid cannot fix \
                     this, the measure is too heavy-tailed"
                )));
            }
        }
        // bisect between the last inside point and x
        let mut inside = x - dir * 0.5;
        let mut outside = x;
        for _ in 0..80 {
            let mid = 0.5 * (inside + outside);
            if v(mid) < target {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        Ok(outside)
    };
    let hi = march(1.0)?;
    let lo = march(-1.0)?;
    if (lo + hi).abs() <= 0.05 * (hi - lo) {
        let half = lo.abs().max(hi.abs());
        Ok((-half, half))
    } else {
        Ok((lo, hi))
    }
}

fn assemble_line_model(
    v: Box<dyn Fn(f64) -> f64>,
    vp: &dyn Fn(f64) -> f64,
    vpp: &dyn Fn(f64) -> f64,
    kappa: f64,
    n_grid: usize,
    fast_path: FastPath,
    lo: f64,
    hi: f64,
) -> Result<LineModel> {
    if n_grid < 8 {
        return Err(Error::InvalidParameter(format!(
            "line grid needs at least 8 nodes, got {n_grid}"
        )));
    }
    if !kappa.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "convexity bound must be finite, got {kappa}"
        )));
    }
    let h = (hi - lo) / (n_grid - 1) as f64;
    let nodes: Vec<f64> = (0..n_grid).map(|j| lo + j as f64 * h).collect();
    let v_vals: Vec<f64> = nodes.iter().map(|&x| v(x)).collect();
    if let Some(bad) = v_vals.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "potential evaluates to {bad} on the grid"
        )));
    }
    for (j, &x) in nodes.iter().enumerate() {
        let curv = vpp(x);
        if curv < kappa - 1e-9 {
            return Err(Error::Precondition(format!(
                "v'' = {curv} at node {j} (x = {x}) falls below the declared \
                 convexity bound {kappa}"
            )));
        }
    }
    let v_floor = v_vals.iter().cloned().fold(f64::INFINITY, f64::min);
    let dens: Vec<f64> = v_vals.iter().map(|&val| (-(val - v_floor)).exp()).collect();
    let z_shift: f64 = dens.iter().sum::<f64>() * h;
    let weights: Vec<f64> = dens.iter().map(|&d| d * h / z_shift).collect();
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > tolerances::LINE_WEIGHT_SUM {
        return Err(Error::Precondition(format!(
            "grid weights sum to {total}, expected 1"
        )));
    }
    // tail mass outside the grid, estimated as e^{−v(end)}/|v′(end)| per end
    // (exact for exponential decay, an upper envelope for convex v)
    for (x_end, sign) in [(nodes[0], -1.0), (nodes[n_grid - 1], 1.0)] {
        let slope = sign * vp(x_end);
        if slope <= 0.0 {
            return Err(Error::Precondition(format!(
                "potential is not increasing outward at the grid end x = \
                 {x_end}; enlarge the grid"
            )));
        }
        let tail = (-(v(x_end) - v_floor)).exp() / slope / z_shift;
        if tail > tolerances::LINE_TRUNCATED_MASS {
            return Err(Error::Precondition(format!(
                "estimated mass {tail:.3e} outside the grid end x = {x_end} \
                 exceeds {:.1e}; enlarge the grid",
                tolerances::LINE_TRUNCATED_MASS
            )));
        }
    }
    let inv_h2 = 1.0 / (h * h);
    let flux: Vec<f64> = (0..n_grid - 1)
        .map(|j| inv_h2 * (weights[j] * weights[j + 1]).sqrt())
        .collect();
    Ok(LineModel {
        nodes,
        h,
        weights,
        flux,
        kappa,
        fast_path,
        potential: v,
        v_floor,
        z_shift,
        spectral: OnceCell::new(),
    })
}

/// Discretize dμ ∝ e^{−v(x)}dx on `n_grid` uniform nodes. The grid extent
/// is solved from the potential itself; the declared convexity bound κ is
/// checked against v″ at every node.
pub fn build_line_model<V, P, Q>(v: V, vp: P, vpp: Q, kappa: f64, n_grid: usize) -> Result<LineModel>
where
    V: Fn(f64) -> f64 + 'static,
    P: Fn(f64) -> f64,
    Q: Fn(f64) -> f64,
{
    let (lo, hi) = grid_extent(&v)?;
    assemble_line_model(Box::new(v), &vp, &vpp, kappa, n_grid, FastPath::GridOnly, lo, hi)
}

/// Standard Gaussian: v = x²/2, κ = 1, Hermite fast path up to degree 12.
pub fn gaussian_model(n_grid: usize) -> Result<LineModel> {
    let v = |x: f64| 0.5 * x * x;
    let (lo, hi) = grid_extent(&v)?;
    assemble_line_model(
        Box::new(v),
        &|x| x,
        &|_| 1.0,
        1.0,
        n_grid,
        FastPath::ExactGaussianHermite { max_degree: 12 },
        lo,
        hi,
    )
}

/// dμ_p ∝ e^{−|x|^p}dx for p ≥ 2. Below p = 2 the measure stops being
/// hypercontractive and the whole downstream theory fails, so it is refused
/// rather than silently mishandled. For p ∈ (2,3) the second derivative has
/// a cusp at 0 and is evaluated by a symmetric difference with the grid
/// step instead of analytically.
pub fn boltzmann_model(p: f64, n_grid: usize) -> Result<LineModel> {
    if !(p >= 2.0) || !p.is_finite() {
        return Err(Error::UnsupportedStructure(format!(
            "Boltzmann exponent p = {p} is out of scope: these measures are \
             hypercontractive only for p >= 2"
        )));
    }
    let v = move |x: f64| x.abs().powf(p);
    let vp = move |x: f64| p * x.abs().powf(p - 1.0) * x.signum();
    let (lo, hi) = grid_extent(&v)?;
    let h = (hi - lo) / (n_grid - 1) as f64;
    let vpp: Box<dyn Fn(f64) -> f64> = if p == 2.0 || p >= 3.0 {
        Box::new(move |x: f64| p * (p - 1.0) * x.abs().powf(p - 2.0))
    } else {
        Box::new(move |x: f64| (v(x + h) - 2.0 * v(x) + v(x - h)) / (h * h))
    };
    let kappa = if p == 2.0 { 2.0 } else { 0.0 };
    assemble_line_model(Box::new(v), &vp, &vpp, kappa, n_grid, FastPath::GridOnly, lo, hi)
}

/// v = a·x⁴ − b·x², a > 0. For b > 0 this is a double well with convexity
/// bound κ = −2b (attained at 0), the standard non-log-concave example for
/// exercising the signed commutation report.
pub fn quartic_model(a: f64, b: f64, n_grid: usize) -> Result<LineModel> {
    if !(a > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "quartic potential needs a > 0 and finite b, got a = {a}, b = {b}"
        )));
    }
    let v = move |x: f64| a * x.powi(4) - b * x * x;
    let (lo, hi) = grid_extent(&v)?;
    assemble_line_model(
        Box::new(v),
        &move |x| 4.0 * a * x.powi(3) - 2.0 * b * x,
        &move |x| 12.0 * a * x * x - 2.0 * b,
        -2.0 * b,
        n_grid,
        FastPath::GridOnly,
        lo,
        hi,
    )
}

impl LineModel {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn fast_path(&self) -> FastPath {
        self.fast_path
    }

    /// Normalized continuum density e^{−v(x)}/Z at an arbitrary point (not
    /// just grid nodes); Z is the grid quadrature of e^{−v}.
    pub fn density(&self, x: f64) -> f64 {
        (-((self.potential)(x) - self.v_floor)).exp() / self.z_shift
    }

    /// Rate of the jump j → j+1 (0 for the last node).
    pub fn up_rate(&self, j: usize) -> f64 {
        if j + 1 < self.nodes.len() {
            self.flux[j] / self.weights[j]
        } else {
            0.0
        }
    }

    /// Rate of the jump j → j−1 (0 for the first node).
    pub fn down_rate(&self, j: usize) -> f64 {
        if j > 0 {
            self.flux[j - 1] / self.weights[j]
        } else {
            0.0
        }
    }

    pub fn check_line(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.nodes.len() {
            return Err(Error::DimensionMismatch {
                expected: self.nodes.len(),
                got: f.len(),
            });
        }
        Ok(())
    }

    /// Generator action (Lf)_j = up_j·(f_{j+1} − f_j) + down_j·(f_{j−1} − f_j).
    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check_line(f)?;
        let n = self.nodes.len();
        let mut out = vec![0.0; n];
        for j in 0..n {
            let mut acc = 0.0;
            if j + 1 < n {
                acc += self.up_rate(j) * (f[j + 1] - f[j]);
            }
            if j > 0 {
                acc += self.down_rate(j) * (f[j - 1] - f[j]);
            }
            out[j] = acc;
        }
        Ok(out)
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.weights).map(|(a, w)| a * w).sum()
    }

    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        f.iter()
            .zip(g)
            .zip(&self.weights)
            .map(|((a, b), w)| a * b * w)
            .sum()
    }

    pub fn l1_norm(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.weights).map(|(a, w)| a.abs() * w).sum()
    }

    pub fn l2_norm_sq(&self, f: &[f64]) -> f64 {
        self.inner(f, f)
    }

    pub fn sup_norm(&self, f: &[f64]) -> f64 {
        f.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn spectral(&self) -> Result<&LineSpectral> {
        if self.spectral.get().is_none() {
            let n = self.nodes.len();
            if n > tolerances::DENSE_EIGEN_LIMIT {
                return Err(Error::BudgetExceeded {
                    needed: n as u128,
                    budget: tolerances::DENSE_EIGEN_LIMIT,
                });
            }
            // symmetrized −L: diag = up + down, off-diag = −1/h² exactly
            let inv_h2 = 1.0 / (self.h * self.h);
            let mut a = vec![0.0f64; n * n];
            for j in 0..n {
                a[j * n + j] = self.up_rate(j) + self.down_rate(j);
                if j + 1 < n {
                    a[j * n + j + 1] = -inv_h2;
                    a[(j + 1) * n + j] = -inv_h2;
                }
            }
            let eig = linalg::symmetric_eigen(&a, n);
            let sqrt_w: Vec<f64> = self.weights.iter().map(|w| w.sqrt()).collect();
            let _ = self.spectral.set(LineSpectral {
                values: eig.values,
                vectors: eig.vectors,
                sqrt_w,
            });
        }
        Ok(self.spectral.get().expect("cache was just filled"))
    }

    /// Index range [lo, hi] of nodes carrying at least `BULK_DENSITY_FLOOR`
    /// of the peak weight, clamped to exclude the two boundary nodes.
    fn bulk_range(&self) -> (usize, usize) {
        let n = self.nodes.len();
        let w_max = self.weights.iter().cloned().fold(0.0, f64::max);
        let cut = BULK_DENSITY_FLOOR * w_max;
        let lo = self.weights.iter().position(|&w| w >= cut).unwrap_or(0);
        let hi = n - 1 - self.weights.iter().rev().position(|&w| w >= cut).unwrap_or(0);
        (lo.max(1), hi.min(n - 2))
    }
}

/// Smallest positive eigenvalue of −L.
pub fn spectral_gap_line(model: &LineModel) -> Result<f64> {
    Ok(model.spectral()?.values[1])
}

/// Certified log-Sobolev floor for the line chain: the general two-sided
/// bound ρ ≥ 2λ(1 − 2w*)/ln(1/w* − 1) in terms of the gap λ and the least
/// stationary weight w*. Loose (the logarithm sees the e^{−50} tail nodes)
/// but safe, which is what a verification constant has to be.
pub fn certified_line_lsi_floor(model: &LineModel) -> Result<f64> {
    let lam = spectral_gap_line(model)?;
    let w_min = model.weights.iter().cloned().fold(f64::INFINITY, f64::min);
    if (w_min - 0.5).abs() < 1e-9 {
        return Ok(lam);
    }
    Ok(2.0 * lam * (1.0 - 2.0 * w_min) / (1.0 / w_min - 1.0).ln())
}

/// Orthonormal (probabilists') Hermite values ψ_0..ψ_degree on the given
/// nodes: ψ_{k+1} = (x·ψ_k − √k·ψ_{k−1})/√(k+1).
pub fn hermite_table(nodes: &[f64], degree: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(degree + 1);
    out.push(vec![1.0; nodes.len()]);
    if degree == 0 {
        return out;
    }
    out.push(nodes.to_vec());
    for k in 1..degree {
        let prev = &out[k - 1];
        let cur = &out[k];
        let next: Vec<f64> = nodes
            .iter()
            .zip(cur.iter().zip(prev))
            .map(|(&x, (&c, &p))| (x * c - (k as f64).sqrt() * p) / ((k + 1) as f64).sqrt())
            .collect();
        out.push(next);
    }
    out
}

/// P_t f through the spectral exponential of the tri-diagonal generator,
/// ignoring any fast-path tag.
pub fn evolve_line_grid(model: &LineModel, f: &[f64], t: f64) -> Result<Vec<f64>> {
    model.check_line(f)?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "time must be nonnegative and finite, got {t}"
        )));
    }
    if t == 0.0 {
        return Ok(f.to_vec());
    }
    let sp = model.spectral()?;
    let n = f.len();
    let mut out = vec![0.0; n];
    for k in 0..n {
        let vk = &sp.vectors[k];
        let c: f64 = (0..n).map(|j| vk[j] * sp.sqrt_w[j] * f[j]).sum();
        let decayed = c * (-sp.values[k] * t).exp();
        for j in 0..n {
            out[j] += decayed * vk[j];
        }
    }
    for j in 0..n {
        out[j] /= sp.sqrt_w[j];
    }
    Ok(out)
}

/// P_t f on one line. Models tagged with the Hermite fast path expand f in
/// ψ_0..ψ_d and decay coefficient k by e^{−kt} when the expansion residual
/// clears the eligibility gate; everything else (including residual-gate
/// failures) goes through the grid path.
pub fn evolve_line(model: &LineModel, f: &[f64], t: f64) -> Result<Vec<f64>> {
    model.check_line(f)?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "time must be nonnegative and finite, got {t}"
        )));
    }
    if t == 0.0 {
        return Ok(f.to_vec());
    }
    if let FastPath::ExactGaussianHermite { max_degree } = model.fast_path {
        let psi = hermite_table(&model.nodes, max_degree);
        let coefs: Vec<f64> = psi.iter().map(|p| model.inner(f, p)).collect();
        let mut resid = f.to_vec();
        for (c, p) in coefs.iter().zip(&psi) {
            for (r, &v) in resid.iter_mut().zip(p) {
                *r -= c * v;
            }
        }
        let resid_norm = model.l2_norm_sq(&resid).sqrt();
        let scale = model.l2_norm_sq(f).sqrt().max(1.0);
        if resid_norm <= tolerances::EVOLVE_PATH_AGREEMENT * scale {
            let mut out = vec![0.0; f.len()];
            for (k, (c, p)) in coefs.iter().zip(&psi).enumerate() {
                let decayed = c * (-(k as f64) * t).exp();
                for (o, &v) in out.iter_mut().zip(p) {
                    *o += decayed * v;
                }
            }
            return Ok(out);
        }
    }
    evolve_line_grid(model, f, t)
}

/// n independent copies of one line measure; states are rank-ordered with
/// axis 0 fastest.
pub struct ProductLineSpace {
    factor: LineModel,
    n: usize,
    n_states: usize,
    state_weights: Vec<f64>,
}

impl fmt::Debug for ProductLineSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProductLineSpace")
            .field("n", &self.n)
            .field("factor", &self.factor)
            .field("n_states", &self.n_states)
            .finish()
    }
}

/// Take the n-fold product of a line model, within the state budget.
pub fn product_space(factor: LineModel, n: usize) -> Result<ProductLineSpace> {
    if n == 0 {
        return Err(Error::InvalidParameter("factor count must be >= 1".into()));
    }
    let nn = factor.n_nodes() as u128;
    let needed = nn.checked_pow(n as u32).unwrap_or(u128::MAX);
    if needed > tolerances::STATE_BUDGET as u128 {
        return Err(Error::BudgetExceeded {
            needed,
            budget: tolerances::STATE_BUDGET,
        });
    }
    let n_states = needed as usize;
    let mut state_weights = vec![1.0f64; n_states];
    let n_nodes = factor.n_nodes();
    for axis in 0..n {
        let stride = n_nodes.pow(axis as u32);
        for idx in 0..n_states {
            state_weights[idx] *= factor.weights[(idx / stride) % n_nodes];
        }
    }
    Ok(ProductLineSpace {
        factor,
        n,
        n_states,
        state_weights,
    })
}

impl ProductLineSpace {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn factor(&self) -> &LineModel {
        &self.factor
    }

    pub fn state_weight(&self, idx: usize) -> f64 {
        self.state_weights[idx]
    }

    /// Coordinate value of state `idx` along `axis`.
    pub fn node(&self, idx: usize, axis: usize) -> f64 {
        let nn = self.factor.n_nodes();
        self.factor.nodes[(idx / nn.pow(axis as u32)) % nn]
    }

    /// Fill `buf` with the coordinates of state `idx`.
    pub fn coords(&self, idx: usize, buf: &mut Vec<f64>) {
        buf.clear();
        let nn = self.factor.n_nodes();
        let mut rest = idx;
        for _ in 0..self.n {
            buf.push(self.factor.nodes[rest % nn]);
            rest /= nn;
        }
    }

    pub fn check_table(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.n_states {
            return Err(Error::DimensionMismatch {
                expected: self.n_states,
                got: f.len(),
            });
        }
        if let Some(bad) = f.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "function table contains a non-finite value {bad}"
            )));
        }
        Ok(())
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.state_weights).map(|(a, w)| a * w).sum()
    }

    pub fn mean(&self, f: &[f64]) -> f64 {
        self.integrate(f)
    }

    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        f.iter()
            .zip(g)
            .zip(&self.state_weights)
            .map(|((a, b), w)| a * b * w)
            .sum()
    }

    pub fn l1_norm(&self, f: &[f64]) -> f64 {
        f.iter()
            .zip(&self.state_weights)
            .map(|(a, w)| a.abs() * w)
            .sum()
    }

    pub fn l2_norm_sq(&self, f: &[f64]) -> f64 {
        self.inner(f, f)
    }

    pub fn sup_norm(&self, f: &[f64]) -> f64 {
        f.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    fn for_each_line(&self, axis: usize, mut body: impl FnMut(usize, usize)) {
        // calls body(base, stride) once per grid line along `axis`
        let nn = self.factor.n_nodes();
        let stride = nn.pow(axis as u32);
        let block = stride * nn;
        let mut start = 0;
        while start < self.n_states {
            for lo in 0..stride {
                body(start + lo, stride);
            }
            start += block;
        }
    }

    /// P_t f via the per-axis spectral transform of the shared factor. The
    /// Hermite fast path applies only to explicit one-line evolutions; the
    /// product path is kept on one route so that mixed-degree functions
    /// never split across methods mid-computation.
    pub fn evolve(&self, f: &[f64], t: f64) -> Result<Vec<f64>> {
        self.check_table(f)?;
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "time must be nonnegative and finite, got {t}"
            )));
        }
        if t == 0.0 {
            return Ok(f.to_vec());
        }
        let sp = self.factor.spectral()?;
        let nn = self.factor.n_nodes();
        let decay: Vec<f64> = sp.values.iter().map(|l| (-l * t).exp()).collect();
        let mut cur = f.to_vec();
        let mut line = vec![0.0f64; nn];
        let mut coef = vec![0.0f64; nn];
        for axis in 0..self.n {
            let mut apply_line = |base: usize, stride: usize| {
                for m in 0..nn {
                    line[m] = cur[base + m * stride] * sp.sqrt_w[m];
                }
                for (k, c) in coef.iter_mut().enumerate() {
                    let vk = &sp.vectors[k];
                    *c = (0..nn).map(|m| vk[m] * line[m]).sum::<f64>() * decay[k];
                }
                for m in 0..nn {
                    let mut acc = 0.0;
                    for k in 0..nn {
                        acc += coef[k] * sp.vectors[k][m];
                    }
                    cur[base + m * stride] = acc / sp.sqrt_w[m];
                }
            };
            self.for_each_line(axis, &mut apply_line);
        }
        Ok(cur)
    }

    /// Central-difference ∂_i f (one-sided at the two boundary nodes).
    pub fn partial_table(&self, f: &[f64], axis: usize) -> Result<Vec<f64>> {
        self.check_table(f)?;
        self.check_axis(axis)?;
        let nn = self.factor.n_nodes();
        let h = self.factor.h;
        let mut out = vec![0.0; self.n_states];
        self.for_each_line(axis, |base, stride| {
            out[base] = (f[base + stride] - f[base]) / h;
            for m in 1..nn - 1 {
                out[base + m * stride] =
                    (f[base + (m + 1) * stride] - f[base + (m - 1) * stride]) / (2.0 * h);
            }
            out[base + (nn - 1) * stride] =
                (f[base + (nn - 1) * stride] - f[base + (nn - 2) * stride]) / h;
        });
        Ok(out)
    }

    /// Π_T f: integrate out the axes in `t_set` (exact under the product
    /// measure, order-independent).
    pub fn project_out(&self, f: &[f64], t_set: &[usize]) -> Result<Vec<f64>> {
        self.check_table(f)?;
        for &axis in t_set {
            self.check_axis(axis)?;
        }
        let nn = self.factor.n_nodes();
        let w = &self.factor.weights;
        let mut cur = f.to_vec();
        for &axis in t_set {
            let mut average_line = |base: usize, stride: usize| {
                let mean: f64 = (0..nn).map(|m| cur[base + m * stride] * w[m]).sum();
                for m in 0..nn {
                    cur[base + m * stride] = mean;
                }
            };
            self.for_each_line(axis, &mut average_line);
        }
        Ok(cur)
    }

    fn check_axis(&self, axis: usize) -> Result<()> {
        if axis >= self.n {
            return Err(Error::InvalidParameter(format!(
                "axis {axis} out of range for {} factors",
                self.n
            )));
        }
        Ok(())
    }

    /// Whether every coordinate of the state sits in the factor's bulk.
    fn is_bulk(&self, idx: usize, bulk: (usize, usize)) -> bool {
        let nn = self.factor.n_nodes();
        let mut rest = idx;
        for _ in 0..self.n {
            let j = rest % nn;
            if j < bulk.0 || j > bulk.1 {
                return false;
            }
            rest /= nn;
        }
        true
    }
}

/// A grid function together with (optionally) analytic partial derivative
/// tables. When partials are absent they are taken by central differences,
/// whose O(h²) bias is fine inside integrals but visible in pointwise
/// suprema.
#[derive(Debug, Clone)]
pub struct SmoothFn {
    pub values: Vec<f64>,
    pub partials: Option<Vec<Vec<f64>>>,
}

impl SmoothFn {
    pub fn from_values(values: Vec<f64>) -> Self {
        SmoothFn {
            values,
            partials: None,
        }
    }

    pub fn with_partials(values: Vec<f64>, partials: Vec<Vec<f64>>) -> Self {
        SmoothFn {
            values,
            partials: Some(partials),
        }
    }

    pub fn check(&self, space: &ProductLineSpace) -> Result<()> {
        space.check_table(&self.values)?;
        if let Some(parts) = &self.partials {
            if parts.len() != space.n() {
                return Err(Error::DimensionMismatch {
                    expected: space.n(),
                    got: parts.len(),
                });
            }
            for p in parts {
                space.check_table(p)?;
            }
        }
        Ok(())
    }

    /// ∂_axis f, analytic when available.
    pub fn partial(&self, space: &ProductLineSpace, axis: usize) -> Result<Vec<f64>> {
        if let Some(parts) = &self.partials {
            if axis >= parts.len() {
                return Err(Error::InvalidParameter(format!(
                    "axis {axis} out of range for {} partials",
                    parts.len()
                )));
            }
            return Ok(parts[axis].clone());
        }
        space.partial_table(&self.values, axis)
    }
}

/// Random tensor-Hermite polynomial with analytic partials: `terms` draws
/// of a coefficient in (−1,1) and per-axis degrees totalling at most
/// `degree`. Deterministic in the seed, the standard smooth test input.
pub fn random_polynomial(
    space: &ProductLineSpace,
    degree: usize,
    terms: usize,
    seed: u64,
) -> Result<SmoothFn> {
    if degree == 0 || terms == 0 {
        return Err(Error::InvalidParameter(
            "random polynomial needs degree >= 1 and terms >= 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = space.n();
    let psi = hermite_table(space.factor().nodes(), degree);
    let nn = space.factor().n_nodes();
    let mut values = vec![0.0f64; space.n_states()];
    let mut partials = vec![vec![0.0f64; space.n_states()]; n];
    for _ in 0..terms {
        let coef: f64 = rng.gen_range(-1.0..1.0);
        let mut degs = vec![0usize; n];
        let mut left = degree;
        for d in degs.iter_mut() {
            *d = rng.gen_range(0..=left);
            left -= *d;
        }
        for idx in 0..space.n_states() {
            let mut term = coef;
            let mut rest = idx;
            for &d in &degs {
                term *= psi[d][rest % nn];
                rest /= nn;
            }
            values[idx] += term;
        }
        for (axis, out) in partials.iter_mut().enumerate() {
            let d_axis = degs[axis];
            if d_axis == 0 {
                continue;
            }
            // ψ_k' = √k·ψ_{k−1} for the orthonormal family
            for idx in 0..space.n_states() {
                let mut term = coef * (d_axis as f64).sqrt();
                let mut rest = idx;
                for (a, &d) in degs.iter().enumerate() {
                    let j = rest % nn;
                    term *= if a == axis { psi[d - 1][j] } else { psi[d][j] };
                    rest /= nn;
                }
                out[idx] += term;
            }
        }
    }
    Ok(SmoothFn::with_partials(values, partials))
}

/// Declared monotonicity of a grid set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    None,
}

/// Indicator of a union of grid cells, with its verified monotonicity tag.
#[derive(Debug, Clone)]
pub struct GridSet {
    pub indicator: Vec<f64>,
    pub monotonicity: Monotonicity,
}

fn monotone_along_axes(space: &ProductLineSpace, ind: &[f64], increasing: bool) -> bool {
    let nn = space.factor().n_nodes();
    let mut ok = true;
    for axis in 0..space.n() {
        space.for_each_line(axis, |base, stride| {
            for m in 0..nn - 1 {
                let a = ind[base + m * stride];
                let b = ind[base + (m + 1) * stride];
                if (increasing && b < a) || (!increasing && b > a) {
                    ok = false;
                }
            }
        });
        if !ok {
            return false;
        }
    }
    true
}

/// Wrap an indicator table as a GridSet, checking 0/1 values and verifying
/// any claimed monotonicity exhaustively along every axis (pairwise
/// dominance reduces to per-axis adjacency on a product grid).
pub fn grid_set(
    space: &ProductLineSpace,
    indicator: Vec<f64>,
    claim: Monotonicity,
) -> Result<GridSet> {
    space.check_table(&indicator)?;
    if let Some(bad) = indicator.iter().find(|v| **v != 0.0 && **v != 1.0) {
        return Err(Error::InvalidParameter(format!(
            "indicator values must be 0 or 1, got {bad}"
        )));
    }
    let verified = match claim {
        Monotonicity::Increasing => monotone_along_axes(space, &indicator, true),
        Monotonicity::Decreasing => monotone_along_axes(space, &indicator, false),
        Monotonicity::None => true,
    };
    if !verified {
        return Err(Error::Precondition(format!(
            "indicator is not {claim:?} along every axis"
        )));
    }
    Ok(GridSet {
        indicator,
        monotonicity: claim,
    })
}

/// Build a GridSet from a membership predicate on cell centers.
pub fn grid_set_from(
    space: &ProductLineSpace,
    pred: impl Fn(&[f64]) -> bool,
    claim: Monotonicity,
) -> Result<GridSet> {
    let mut buf = Vec::with_capacity(space.n());
    let indicator: Vec<f64> = (0..space.n_states())
        .map(|idx| {
            space.coords(idx, &mut buf);
            if pred(&buf) {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    grid_set(space, indicator, claim)
}

/// μ(A) by quadrature.
pub fn set_measure(space: &ProductLineSpace, set: &GridSet) -> f64 {
    space.integrate(&set.indicator)
}

/// I_i^𝒢(f) = ‖∂_i f‖₁: quadrature of the (analytic when supplied) partial.
pub fn geometric_influence_fn(space: &ProductLineSpace, f: &SmoothFn, axis: usize) -> Result<f64> {
    f.check(space)?;
    space.check_axis(axis)?;
    let p = f.partial(space, axis)?;
    Ok(space.l1_norm(&p))
}

/// All coordinates' geometric influences of a smooth function.
pub fn geometric_influence_profile(space: &ProductLineSpace, f: &SmoothFn) -> Result<Vec<f64>> {
    (0..space.n())
        .map(|axis| geometric_influence_fn(space, f, axis))
        .collect()
}

/// I_i^𝒢(A) = E_x[μ⁺(A_i^x)]: per fiber, the Minkowski content of the
/// interval union is the density summed over its interior endpoints (cell
/// edges); fibers reaching the grid boundary contribute nothing there, the
/// grid is the whole space.
pub fn geometric_influence_set(
    space: &ProductLineSpace,
    set: &GridSet,
    axis: usize,
) -> Result<f64> {
    space.check_table(&set.indicator)?;
    space.check_axis(axis)?;
    let nn = space.factor().n_nodes();
    let h = space.factor().h();
    let nodes = space.factor().nodes();
    let w0 = space.factor().weights()[0];
    let ind = &set.indicator;
    let mut total = 0.0;
    space.for_each_line(axis, |base, stride| {
        // weight of the orthogonal coordinates: state weight of the m=0
        // node divided by that node's own factor weight
        let w_line = space.state_weights[base] / w0;
        let mut content = 0.0;
        let mut m = 0;
        while m < nn {
            if ind[base + m * stride] == 1.0 {
                let run_start = m;
                while m + 1 < nn && ind[base + (m + 1) * stride] == 1.0 {
                    m += 1;
                }
                if run_start > 0 {
                    content += space.factor().density(nodes[run_start] - 0.5 * h);
                }
                if m + 1 < nn {
                    content += space.factor().density(nodes[m] + 0.5 * h);
                }
            }
            m += 1;
        }
        total += w_line * content;
    });
    Ok(total)
}

/// Dilate by one cell in L∞ (separable max filter, one pass per axis).
fn dilate_by_one(space: &ProductLineSpace, ind: &[f64]) -> Vec<f64> {
    let nn = space.factor().n_nodes();
    let mut cur = ind.to_vec();
    for axis in 0..space.n() {
        let mut next = cur.clone();
        space.for_each_line(axis, |base, stride| {
            for m in 0..nn {
                let mut v = cur[base + m * stride];
                if m > 0 {
                    v = v.max(cur[base + (m - 1) * stride]);
                }
                if m + 1 < nn {
                    v = v.max(cur[base + (m + 1) * stride]);
                }
                next[base + m * stride] = v;
            }
        });
        cur = next;
    }
    cur
}

/// μ⁺_∞(A) = lim (μ(A + [−r,r]ⁿ) − μ(A))/r, estimated at r = h and r = 2h
/// with Richardson extrapolation (the linear corner terms cancel exactly).
/// On a cell grid, enlargement by r = k·h is exactly dilation by k cells.
pub fn uniform_enlargement_boundary(space: &ProductLineSpace, set: &GridSet) -> Result<f64> {
    space.check_table(&set.indicator)?;
    let h = space.factor().h();
    let mu = space.integrate(&set.indicator);
    let dil1 = dilate_by_one(space, &set.indicator);
    let dil2 = dilate_by_one(space, &dil1);
    let d1 = (space.integrate(&dil1) - mu) / h;
    let d2 = (space.integrate(&dil2) - mu) / (2.0 * h);
    Ok((2.0 * d1 - d2).max(0.0))
}

/// Geometric influence survey of a set: per-coordinate influences, their
/// total, and (for monotone sets, where the identity total = μ⁺_∞ applies)
/// the uniform-enlargement boundary.
#[derive(Debug, Clone)]
pub struct GeometricInfluenceReport {
    pub per_coordinate: Vec<f64>,
    pub total: f64,
    pub boundary_uniform: Option<f64>,
}

impl GeometricInfluenceReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (i, v) in self.per_coordinate.iter().enumerate() {
            out.push_str(&format!("influence[{}]={:.12e}\n", i + 1, v));
        }
        out.push_str(&format!("total={:.12e}\n", self.total));
        if let Some(b) = self.boundary_uniform {
            out.push_str(&format!("boundary_uniform={:.12e}\n", b));
        }
        out
    }
}

pub fn geometric_influence_report(
    space: &ProductLineSpace,
    set: &GridSet,
) -> Result<GeometricInfluenceReport> {
    let per: Vec<f64> = (0..space.n())
        .map(|axis| geometric_influence_set(space, set, axis))
        .collect::<Result<_>>()?;
    let total = per.iter().sum();
    let boundary_uniform = match set.monotonicity {
        Monotonicity::None => None,
        _ => Some(uniform_enlargement_boundary(space, set)?),
    };
    Ok(GeometricInfluenceReport {
        per_coordinate: per,
        total,
        boundary_uniform,
    })
}

/// Per-coordinate gradient commutation for P_t. The pass-bearing check is
/// the convex (κ = 0) form |∂_i P_t f| ≤ P_t|∂_i f| + tol; alongside it the
/// signed slack min(e^{κ_eff t}·P_t|∂_i f| − |∂_i P_t f|) is recorded with
/// κ_eff = −κ (contraction for convex potentials). The signed form is an
/// equality on the Gaussian whenever ∂_i f has one sign, so its slack sits
/// at the finite-difference noise floor and is reported as data, not as a
/// pass/fail check. Suprema run over bulk nodes only.
#[derive(Debug, Clone)]
pub struct CommutationReport {
    pub strict: Vec<TwoSidedReport>,
    pub signed_slack: Vec<f64>,
    pub kappa_eff: f64,
}

pub fn commutation_check(space: &ProductLineSpace, f: &SmoothFn, t: f64) -> Result<CommutationReport> {
    f.check(space)?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "time must be nonnegative and finite, got {t}"
        )));
    }
    let kappa_eff = -space.factor().kappa();
    let evolved = space.evolve(&f.values, t)?;
    let bulk = space.factor().bulk_range();
    let gain = (kappa_eff * t).exp();
    let mut strict = Vec::with_capacity(space.n());
    let mut signed_slack = Vec::with_capacity(space.n());
    for axis in 0..space.n() {
        let d_evolved = space.partial_table(&evolved, axis)?;
        let d_orig = f.partial(space, axis)?;
        let abs_d: Vec<f64> = d_orig.iter().map(|v| v.abs()).collect();
        let p_abs = space.evolve(&abs_d, t)?;
        let mut worst_strict = f64::NEG_INFINITY;
        let mut worst_signed = f64::INFINITY;
        for idx in 0..space.n_states() {
            if !space.is_bulk(idx, bulk) {
                continue;
            }
            let lhs = d_evolved[idx].abs();
            worst_strict = worst_strict.max(lhs - p_abs[idx]);
            worst_signed = worst_signed.min(gain * p_abs[idx] - lhs);
        }
        strict.push(TwoSidedReport::new(
            format!("commutation[{}]", axis + 1),
            worst_strict,
            0.0,
            tolerances::QUADRATURE_SLACK,
        ));
        signed_slack.push(worst_signed);
    }
    Ok(CommutationReport {
        strict,
        signed_slack,
        kappa_eff,
    })
}

fn require_convex(space: &ProductLineSpace, what: &str) -> Result<()> {
    if space.factor().kappa() < 0.0 {
        return Err(Error::Precondition(format!(
            "{what} needs a convex potential; the model declares v'' >= {}",
            space.factor().kappa()
        )));
    }
    Ok(())
}

/// Reverse Poincaré suite: the global bound ‖∇P_t f‖₂² ≤ ‖f‖₂²/(2t), the
/// pointwise bound 2|∇P_t f|² ≤ (P_t f² − (P_t f)²)/t on bulk nodes, and
/// the sup bound ‖∇P_t f‖_∞ ≤ ‖f‖_∞/√(2t).
pub fn reverse_poincare_check(
    space: &ProductLineSpace,
    f: &SmoothFn,
    t: f64,
) -> Result<Vec<TwoSidedReport>> {
    f.check(space)?;
    require_convex(space, "the reverse Poincaré bound")?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "time must be positive and finite, got {t}"
        )));
    }
    let evolved = space.evolve(&f.values, t)?;
    let mut grad_sq = vec![0.0f64; space.n_states()];
    for axis in 0..space.n() {
        let d = space.partial_table(&evolved, axis)?;
        for (g, v) in grad_sq.iter_mut().zip(&d) {
            *g += v * v;
        }
    }
    let sq: Vec<f64> = f.values.iter().map(|v| v * v).collect();
    let p_sq = space.evolve(&sq, t)?;
    let bulk = space.factor().bulk_range();
    let mut worst_pointwise = f64::NEG_INFINITY;
    let mut sup_grad: f64 = 0.0;
    for idx in 0..space.n_states() {
        if !space.is_bulk(idx, bulk) {
            continue;
        }
        let variance = p_sq[idx] - evolved[idx] * evolved[idx];
        worst_pointwise = worst_pointwise.max(2.0 * grad_sq[idx] - variance / t);
        sup_grad = sup_grad.max(grad_sq[idx].sqrt());
    }
    Ok(vec![
        TwoSidedReport::new(
            "reverse-poincare",
            space.integrate(&grad_sq),
            space.l2_norm_sq(&f.values) / (2.0 * t),
            tolerances::QUADRATURE_SLACK,
        ),
        TwoSidedReport::new(
            "reverse-pointwise",
            worst_pointwise,
            0.0,
            tolerances::QUADRATURE_SLACK,
        ),
        TwoSidedReport::new(
            "reverse-sup",
            sup_grad,
            space.sup_norm(&f.values) / (2.0 * t).sqrt(),
            tolerances::QUADRATURE_SLACK,
        ),
    ])
}

/// Ledoux's short-time bound ‖f − P_t f‖₁ ≤ 2√t·‖|∇f|‖₁ (Euclidean norm of
/// the gradient inside the L¹ norm).
pub fn ledoux_l1_check(space: &ProductLineSpace, f: &SmoothFn, t: f64) -> Result<TwoSidedReport> {
    f.check(space)?;
    require_convex(space, "the Ledoux bound")?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "time must be nonnegative and finite, got {t}"
        )));
    }
    let evolved = space.evolve(&f.values, t)?;
    let diff: Vec<f64> = f.values.iter().zip(&evolved).map(|(a, b)| a - b).collect();
    let left = space.l1_norm(&diff);
    let mut grad_sq = vec![0.0f64; space.n_states()];
    for axis in 0..space.n() {
        let d = f.partial(space, axis)?;
        for (g, v) in grad_sq.iter_mut().zip(&d) {
            *g += v * v;
        }
    }
    let grad_l1: f64 = grad_sq
        .iter()
        .zip(0..space.n_states())
        .map(|(g, idx)| g.sqrt() * space.state_weights[idx])
        .sum();
    Ok(TwoSidedReport::new(
        "ledoux",
        left,
        2.0 * t.sqrt() * grad_l1,
        tolerances::QUADRATURE_SLACK,
    ))
}

/// Derivative contraction ‖∂_i P_t f‖₁ ≤ ‖∂_i f‖₁ per coordinate, the L¹
/// consequence of gradient commutation for convex potentials.
pub fn derivative_l1_contraction_check(
    space: &ProductLineSpace,
    f: &SmoothFn,
    t: f64,
) -> Result<Vec<TwoSidedReport>> {
    f.check(space)?;
    require_convex(space, "derivative contraction")?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "time must be nonnegative and finite, got {t}"
        )));
    }
    let evolved = space.evolve(&f.values, t)?;
    let mut out = Vec::with_capacity(space.n());
    for axis in 0..space.n() {
        let d_evolved = space.partial_table(&evolved, axis)?;
        let d_orig = f.partial(space, axis)?;
        out.push(TwoSidedReport::new(
            format!("derivative-contraction[{}]", axis + 1),
            space.l1_norm(&d_evolved),
            space.l1_norm(&d_orig),
            tolerances::QUADRATURE_SLACK,
        ));
    }
    Ok(out)
}

/// Chained projection bound: ‖P_t f − Π_T P_t f‖₂² ≤
/// (1/ρ)·(Σ_{i∈T}‖∂_i f‖₁²)^{α(t/2)}·(‖f‖₂²/t)^{1−α(t/2)}, the composition
/// of the low-influence projection bound with derivative contraction and
/// the reverse Poincaré estimate. The /t (rather than /(2t)) right side is
/// kept as the theory states it.
pub fn chained_projection_check(
    space: &ProductLineSpace,
    rho: f64,
    f: &SmoothFn,
    t: f64,
    t_set: &[usize],
) -> Result<TwoSidedReport> {
    f.check(space)?;
    require_convex(space, "the chained projection bound")?;
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "log-Sobolev constant must be positive and finite, got {rho}"
        )));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "time must be positive and finite, got {t}"
        )));
    }
    let evolved = space.evolve(&f.values, t)?;
    let projected = space.project_out(&evolved, t_set)?;
    let diff: Vec<f64> = evolved.iter().zip(&projected).map(|(a, b)| a - b).collect();
    let left = space.l2_norm_sq(&diff);
    let alpha = alpha_exponent(rho, 0.5 * t);
    let mut sum_l1_sq = 0.0;
    for &axis in t_set {
        let d = f.partial(space, axis)?;
        let l1 = space.l1_norm(&d);
        sum_l1_sq += l1 * l1;
    }
    let right =
        (1.0 / rho) * sum_l1_sq.powf(alpha) * (space.l2_norm_sq(&f.values) / t).powf(1.0 - alpha);
    Ok(TwoSidedReport::new(
        "chained-projection",
        left,
        right,
        tolerances::QUADRATURE_SLACK,
    ))
}

/// Extract an approximate junta from a smooth function in L¹: schedule
/// t = (ε/(8I))² so the Ledoux term 4√t·I is ε/2, start η at the larger of
/// the theory threshold (the low-influence term
/// (1/√(ρt))·η^{α(t/2)/2}·‖f‖₂^{1−α(t/2)}·I equals ε/2) and the top
/// influence, integrate out T = {i : ‖∂_i f‖₁ ≤ η}, and measure
/// ‖f − Π_T f‖₁. On a miss η descends to the next distinct influence level
/// below it, ending at 0. Totals below 1 are clamped up to 1 inside the
/// schedule only (the theory normalizes Σ‖∂_i f‖₁ ≥ 1; smaller totals make
/// the schedule conservative and the measured-error loop keeps the
/// contract). Certificates carry the declared strict-convexity bound when
/// the potential has one.
pub fn continuous_extract_junta(
    space: &ProductLineSpace,
    rho: f64,
    f: &SmoothFn,
    eps: f64,
) -> Result<(Vec<f64>, JuntaCertificate)> {
    f.check(space)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "target eps must lie in (0,1), got {eps}"
        )));
    }
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "log-Sobolev constant must be positive and finite, got {rho}"
        )));
    }
    let strict_convexity = if space.factor().kappa() > 0.0 {
        Some(space.factor().kappa())
    } else {
        None
    };
    let influences = geometric_influence_profile(space, f)?;
    let total: f64 = influences.iter().sum();
    if total <= tolerances::ZERO_INFLUENCE {
        let cert = JuntaCertificate {
            kept_set: Vec::new(),
            eta: 0.0,
            t: 0.0,
            alpha: 0.0,
            bound_la: 0.0,
            bound_bakry: 0.0,
            measured_error: 0.0,
            epsilon: eps,
            retries: 0,
            slice_c: None,
            strict_convexity,
        };
        return Ok((f.values.clone(), cert));
    }
    let total_eff = total.max(1.0);
    let t = (eps / (8.0 * total_eff)).powi(2);
    let alpha = alpha_exponent(rho, 0.5 * t);
    let l2 = space.l2_norm_sq(&f.values).sqrt();
    // (1/√(ρt))·η^{α/2}·l2^{1−α}·I = ε/2 solved for η guarantees the
    // smoothed bound, but 2/α blows up as t → 0 and the solved η
    // underflows to 0. The loop verifies the realized error directly, so
    // descending from the top influence is sound and finds the smallest
    // kept set the target admits.
    let eta_theory = {
        let e = (eps * (rho * t).sqrt() / (2.0 * total_eff * l2.powf(1.0 - alpha)))
            .powf(2.0 / alpha);
        if e.is_finite() {
            e
        } else {
            0.0
        }
    };
    let max_influence = influences.iter().cloned().fold(0.0f64, f64::max);
    let mut eta = eta_theory.max(max_influence);
    let mut best: Option<(f64, Vec<f64>, Vec<usize>)> = None;
    let mut rounds = 0;
    for retry in 0..=MAX_RETRIES {
        rounds = retry;
        let t_set: Vec<usize> = influences
            .iter()
            .enumerate()
            .filter(|(_, v)| **v <= eta)
            .map(|(i, _)| i)
            .collect();
        let g = space.project_out(&f.values, &t_set)?;
        let diff: Vec<f64> = f.values.iter().zip(&g).map(|(a, b)| a - b).collect();
        let measured = space.l1_norm(&diff);
        if best.as_ref().map_or(true, |(m, ..)| measured < *m) {
            let kept: Vec<usize> = (0..space.n()).filter(|i| !t_set.contains(i)).collect();
            best = Some((measured, g.clone(), kept));
        }
        if measured <= eps {
            let kept: Vec<usize> = (0..space.n()).filter(|i| !t_set.contains(i)).collect();
            let cert = JuntaCertificate {
                kept_set: kept,
                eta,
                t,
                alpha,
                bound_la: eta.powf(0.5 * alpha) * l2.powf(1.0 - alpha) * total
                    / (rho * t).sqrt(),
                bound_bakry: 4.0 * t.sqrt() * total,
                measured_error: measured,
                epsilon: eps,
                retries: retry,
                slice_c: None,
                strict_convexity,
            };
            return Ok((g, cert));
        }
        if eta == 0.0 {
            // the zero-influence set already failed; nothing lower exists
            break;
        }
        // step straight past empty threshold gaps so every retry changes T
        let next_below = influences
            .iter()
            .cloned()
            .filter(|&v| v < eta)
            .fold(0.0f64, f64::max);
        eta = (eta / 2.0).min(next_below);
        if eta < 1e-300 {
            eta = 0.0;
        }
    }
    let (measured, candidate, kept_set) = best.expect("loop ran at least once");
    Err(Error::ExtractionFailed(Box::new(FailedExtraction {
        candidate,
        kept_set,
        measured,
        target: eps,
        retries: rounds,
    })))
}

/// One pass of the triangular cell mollifier along every axis:
/// (1,2,1)/4 in the interior, renormalized over the in-grid part at the
/// two boundary nodes. Preserves [0,1] range and axis monotonicity.
fn mollify_indicator(space: &ProductLineSpace, ind: &[f64]) -> Vec<f64> {
    let nn = space.factor().n_nodes();
    let mut cur = ind.to_vec();
    for axis in 0..space.n() {
        let mut next = cur.clone();
        space.for_each_line(axis, |base, stride| {
            for m in 0..nn {
                let c = cur[base + m * stride];
                let v = if m == 0 {
                    (2.0 * c + cur[base + stride]) / 3.0
                } else if m + 1 == nn {
                    (cur[base + (m - 1) * stride] + 2.0 * c) / 3.0
                } else {
                    (cur[base + (m - 1) * stride] + 2.0 * c + cur[base + (m + 1) * stride]) / 4.0
                };
                next[base + m * stride] = v;
            }
        });
        cur = next;
    }
    cur
}

fn observed_monotonicity(space: &ProductLineSpace, ind: &[f64], claimed: Monotonicity) -> Monotonicity {
    let candidates = match claimed {
        Monotonicity::Increasing => [Monotonicity::Increasing, Monotonicity::Decreasing],
        _ => [Monotonicity::Decreasing, Monotonicity::Increasing],
    };
    for c in candidates {
        let rising = c == Monotonicity::Increasing;
        if monotone_along_axes(space, ind, rising) {
            return c;
        }
    }
    Monotonicity::None
}

/// Junta extraction for monotone sets: mollify the indicator with the
/// triangular cell kernel, extract a smooth junta with a certified
/// log-Sobolev floor for the factor, round at 1/2, and measure μ(AΔB).
/// Retries drop the mollifier (the width-h "kernel" is the identity) and
/// tighten the inner target before giving up with the best candidate.
pub fn monotone_set_junta(
    space: &ProductLineSpace,
    set: &GridSet,
    eps: f64,
) -> Result<(GridSet, JuntaCertificate)> {
    space.check_table(&set.indicator)?;
    if set.monotonicity == Monotonicity::None {
        return Err(Error::Precondition(
            "set junta extraction needs a declared monotone set".into(),
        ));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "target eps must lie in (0,1), got {eps}"
        )));
    }
    let rho = certified_line_lsi_floor(space.factor())?;
    let mollified = mollify_indicator(space, &set.indicator);
    let mut best: Option<(f64, Vec<f64>, Vec<usize>, u32)> = None;
    let attempts: [(bool, f64); 4] = [
        (true, 0.5 * eps),
        (true, 0.25 * eps),
        (false, 0.5 * eps),
        (false, 0.25 * eps),
    ];
    for (attempt, &(smooth_first, inner_eps)) in attempts.iter().enumerate() {
        let values = if smooth_first {
            mollified.clone()
        } else {
            set.indicator.clone()
        };
        let smooth = SmoothFn::from_values(values);
        let outcome = continuous_extract_junta(space, rho, &smooth, inner_eps);
        let (g, cert_opt, retries) = match outcome {
            Ok((g, cert)) => {
                let r = cert.retries;
                (g, Some(cert), r)
            }
            Err(Error::ExtractionFailed(fe)) => (fe.candidate.clone(), None, fe.retries),
            Err(other) => return Err(other),
        };
        let rounded: Vec<f64> = g.iter().map(|&v| if v >= 0.5 { 1.0 } else { 0.0 }).collect();
        let diff: Vec<f64> = set
            .indicator
            .iter()
            .zip(&rounded)
            .map(|(a, b)| a - b)
            .collect();
        let measured = space.l1_norm(&diff);
        if let Some(mut cert) = cert_opt {
            if measured <= eps {
                cert.measured_error = measured;
                cert.epsilon = eps;
                cert.retries = retries + attempt as u32;
                let tag = observed_monotonicity(space, &rounded, set.monotonicity);
                let b = GridSet {
                    indicator: rounded,
                    monotonicity: tag,
                };
                return Ok((b, cert));
            }
        }
        if best.as_ref().map_or(true, |(m, ..)| measured < *m) {
            let kept: Vec<usize> = (0..space.n())
                .filter(|&i| {
                    // coordinates the rounded candidate still varies in
                    let p = space
                        .partial_table(&rounded, i)
                        .map(|d| space.l1_norm(&d))
                        .unwrap_or(0.0);
                    p > tolerances::ZERO_INFLUENCE
                })
                .collect();
            best = Some((measured, rounded, kept, retries));
        }
    }
    let (measured, candidate, kept_set, retries) = best.expect("attempts ran");
    Err(Error::ExtractionFailed(Box::new(FailedExtraction {
        candidate,
        kept_set,
        measured,
        target: eps,
        retries,
    })))
}
