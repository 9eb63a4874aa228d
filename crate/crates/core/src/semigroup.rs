//! Generators L, the heat semigroup P_t = e^{tL}, spectral data, the
//! spectral gap, log-Sobolev constants, and the hypercontractivity checker.
//!
//! Product spaces never assemble a matrix: each coordinate refresh E_i is a
//! projection, so e^{t(E_i − Id)} = e^{−t}·Id + (1 − e^{−t})·E_i and the
//! coordinate flows commute. Everything else goes through a dense symmetric
//! eigendecomposition in the μ-weighted inner product, obtained by
//! conjugating the kernel with D^{1/2}.

use std::cell::OnceCell;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg;
use crate::spaces::{MarkovSpace, SpaceKind, Structure};
use crate::tolerances;

/// How the generator is represented.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorRepr {
    /// Sum of per-factor refresh Laplacians; evolution in closed form.
    ProductClosedForm,
    /// Sparse kernel rows; evolution by spectral synthesis.
    Matrix,
}

/// The generator L = K − Id (products: Σ_i (E_i − Id)), with its scale.
pub struct Generator<'a> {
    pub space: &'a MarkovSpace,
    pub repr: GeneratorRepr,
    /// Multiplies K − Id; n/2 on the rescaled torus, 1 elsewhere.
    pub scale: f64,
    spectral: OnceCell<SpectralData>,
}

/// Eigenvalues of −L ascending from 0 with μ-orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub eigenvalues: Vec<f64>,
    /// eigenvectors[k] pairs with eigenvalues[k]; ⟨φ_a, φ_b⟩_μ = δ_ab.
    pub eigenvectors: Vec<Vec<f64>>,
}

/// One hypercontractivity measurement: ‖P_t f‖_q vs ‖f‖_p.
#[derive(Debug, Clone, Copy)]
pub struct HyperReport {
    pub t: f64,
    pub p: f64,
    pub q: f64,
    pub evolved_q_norm: f64,
    pub input_p_norm: f64,
    pub slack: f64,
}

impl HyperReport {
    pub fn violated(&self) -> bool {
        self.slack < -tolerances::SLACK
    }
}

/// Attach a generator to a space.
pub fn generator(space: &MarkovSpace) -> Generator<'_> {
    let repr = match space.structure {
        Structure::Product(_) => GeneratorRepr::ProductClosedForm,
        Structure::Schreier(_) => GeneratorRepr::Matrix,
    };
    Generator {
        space,
        repr,
        scale: space.generator_scale(),
        spectral: OnceCell::new(),
    }
}

impl<'a> Generator<'a> {
    /// Apply L to f (including scale).
    pub fn apply(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.space.check_table(f)?;
        match self.repr {
            GeneratorRepr::ProductClosedForm => {
                let n = self.space.n_directions();
                let mut out = vec![0.0f64; f.len()];
                for i in 0..n {
                    let li = self.space.coordinate_laplacian(f, i)?;
                    for (o, v) in out.iter_mut().zip(&li) {
                        *o += v;
                    }
                }
                Ok(out)
            }
            GeneratorRepr::Matrix => {
                let kf = self.space.apply_kernel(f)?;
                Ok(kf
                    .iter()
                    .zip(f)
                    .map(|(k, v)| self.scale * (k - v))
                    .collect())
            }
        }
    }

    /// Dense matrix of L, row-major. Test-oriented; refused past the dense
    /// limit.
    pub fn dense_matrix(&self) -> Result<Vec<f64>> {
        let n = self.space.n_states;
        match self.repr {
            GeneratorRepr::ProductClosedForm => {
                if n > tolerances::DENSE_EIGEN_LIMIT {
                    return Err(Error::BudgetExceeded {
                        needed: n as u128,
                        budget: tolerances::DENSE_EIGEN_LIMIT,
                    });
                }
                // Σ_i (E_i − Id): assemble by applying to indicator columns
                let mut m = vec![0.0f64; n * n];
                let mut e = vec![0.0f64; n];
                for col in 0..n {
                    e.iter_mut().for_each(|v| *v = 0.0);
                    e[col] = 1.0;
                    let le = self.apply(&e)?;
                    for row in 0..n {
                        m[row * n + col] = le[row];
                    }
                }
                Ok(m)
            }
            GeneratorRepr::Matrix => {
                let k = self.space.dense_kernel()?;
                let mut m = vec![0.0f64; n * n];
                for x in 0..n {
                    for y in 0..n {
                        let id = if x == y { 1.0 } else { 0.0 };
                        m[x * n + y] = self.scale * (k[x * n + y] - id);
                    }
                }
                Ok(m)
            }
        }
    }

    /// Eigendecomposition of −L in the μ-weighted inner product, cached.
    pub fn spectral(&self) -> Result<&SpectralData> {
        if let Some(s) = self.spectral.get() {
            return Ok(s);
        }
        let data = self.compute_spectral()?;
        let _ = self.spectral.set(data);
        Ok(self.spectral.get().expect("just set"))
    }

    fn compute_spectral(&self) -> Result<SpectralData> {
        let n = self.space.n_states;
        if n > tolerances::DENSE_EIGEN_LIMIT {
            return Err(Error::BudgetExceeded {
                needed: n as u128,
                budget: tolerances::DENSE_EIGEN_LIMIT,
            });
        }
        let l = self.dense_matrix()?;
        let mu = &self.space.measure;
        let sqrt_mu: Vec<f64> = mu.iter().map(|w| w.sqrt()).collect();
        // M = −D^{1/2} L D^{−1/2}, symmetric for reversible L
        let mut m = vec![0.0f64; n * n];
        for x in 0..n {
            for y in 0..n {
                m[x * n + y] = -l[x * n + y] * sqrt_mu[x] / sqrt_mu[y];
            }
        }
        let eig = linalg::symmetric_eigen(&m, n);
        let eigenvectors: Vec<Vec<f64>> = eig
            .vectors
            .iter()
            .map(|u| u.iter().zip(&sqrt_mu).map(|(v, s)| v / s).collect())
            .collect();
        Ok(SpectralData {
            eigenvalues: eig.values,
            eigenvectors,
        })
    }
}

/// P_t f = e^{tL} f.
pub fn evolve(gen: &Generator, f: &[f64], t: f64) -> Result<Vec<f64>> {
    if t < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "evolution time must be nonnegative, got {t}"
        )));
    }
    gen.space.check_table(f)?;
    match gen.repr {
        GeneratorRepr::ProductClosedForm => {
            let n = gen.space.n_directions();
            let decay = (-t).exp();
            let mut g = f.to_vec();
            for i in 0..n {
                let e = gen.space.refresh_axis(&g, i)?;
                for (gv, ev) in g.iter_mut().zip(&e) {
                    *gv = decay * *gv + (1.0 - decay) * ev;
                }
            }
            Ok(g)
        }
        GeneratorRepr::Matrix => {
            let spec = gen.spectral()?;
            let mu = &gen.space.measure;
            let n = f.len();
            let mut out = vec![0.0f64; n];
            for (lambda, phi) in spec.eigenvalues.iter().zip(&spec.eigenvectors) {
                let coeff: f64 = f
                    .iter()
                    .zip(phi)
                    .zip(mu)
                    .map(|((fv, pv), w)| fv * pv * w)
                    .sum();
                let decayed = coeff * (-t * lambda.max(0.0)).exp();
                if decayed != 0.0 {
                    for (o, pv) in out.iter_mut().zip(phi) {
                        *o += decayed * pv;
                    }
                }
            }
            Ok(out)
        }
    }
}

/// Smallest nonzero eigenvalue of −L (with scale).
///
/// Product spaces: every refresh Laplacian is a projection with spectrum
/// {0, 1}, so −Σ(E_i − Id) has spectrum {|A| : A a coordinate set} and the
/// gap is exactly 1. Tori: the walk is diagonalized by characters, giving
/// eigenvalues (n − Σ_i cos(2πξ_i/m))/2 after rescaling, minimized at a
/// single minimal frequency. Everything else is eigensolved.
pub fn spectral_gap(gen: &Generator) -> Result<f64> {
    if gen.space.n_states < 2 {
        return Err(Error::InvalidParameter(
            "spectral gap needs at least two states".into(),
        ));
    }
    match gen.space.kind {
        SpaceKind::Cube { .. } | SpaceKind::Product { .. } => Ok(1.0),
        SpaceKind::Torus { m, .. } => {
            Ok((1.0 - (2.0 * std::f64::consts::PI / m as f64).cos()) / 2.0)
        }
        _ => {
            let spec = gen.spectral()?;
            let lambda1 = spec.eigenvalues[1];
            if lambda1 < 1e-10 {
                return Err(Error::Disconnected);
            }
            Ok(lambda1)
        }
    }
}

/// How to obtain the log-Sobolev constant.
#[derive(Debug, Clone, Copy)]
pub enum LsiMethod {
    /// Closed form for a single two-point ν_p factor.
    ExactTwoPoint,
    /// Projected-gradient minimization of 2𝓔(f,f)/Ent_μ(f²) with 32
    /// multi-starts. Returns the best value found; an estimate, never a
    /// certificate.
    NumericSearch { iters_per_start: usize },
}

pub const DEFAULT_SEARCH_ITERS: usize = 300;

/// Largest ρ with ρ·Ent_μ(f²) ≤ 2𝓔(f,f), per the requested method.
pub fn log_sobolev_constant(gen: &Generator, method: LsiMethod) -> Result<f64> {
    match method {
        LsiMethod::ExactTwoPoint => exact_two_point(gen),
        LsiMethod::NumericSearch { iters_per_start } => numeric_search(gen, iters_per_start),
    }
}

fn exact_two_point(gen: &Generator) -> Result<f64> {
    let prod = gen.space.product().map_err(|_| {
        Error::InvalidParameter("two-point closed form needs a single ν_p factor".into())
    })?;
    if prod.factors.len() != 1 || prod.factors[0].measure.len() != 2 {
        return Err(Error::InvalidParameter(
            "two-point closed form needs a single ν_p factor".into(),
        ));
    }
    let p = prod.factors[0].measure[0];
    Ok(two_point_rho(p))
}

/// ρ(ν_p) = 2(p − (1−p)) / (log p − log(1−p)), continued through p = 1/2 by
/// its series 1/(1 + d²/3 + d⁴/5 + …) in d = 2p − 1.
pub fn two_point_rho(p: f64) -> f64 {
    let d = 2.0 * p - 1.0;
    if d.abs() < 1e-4 {
        let d2 = d * d;
        1.0 / (1.0 + d2 / 3.0 + d2 * d2 / 5.0 + d2 * d2 * d2 / 7.0)
    } else {
        2.0 * d / (p.ln() - (1.0 - p).ln())
    }
}

/// Certified lower bound 2λ(1 − 2μ*)/log(1/μ* − 1) on the log-Sobolev
/// constant of a reversible chain, from its spectral gap λ and smallest
/// stationary weight μ* (the classical comparison of entropy against
/// variance). Tight as μ* → 1/2, where the bound degenerates to λ itself.
/// Safe to hand to hypercontractivity checks: it never exceeds the true
/// constant.
pub fn certified_lsi_floor(gen: &Generator) -> Result<f64> {
    let lambda = spectral_gap(gen)?;
    let mu_star = gen
        .space
        .measure
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if (mu_star - 0.5).abs() < 1e-9 {
        return Ok(lambda);
    }
    Ok(2.0 * lambda * (1.0 - 2.0 * mu_star) / (1.0 / mu_star - 1.0).ln())
}

struct LsiObjective<'g, 'a> {
    gen: &'g Generator<'a>,
}

impl LsiObjective<'_, '_> {
    /// 2𝓔(f,f)/Ent(f²) on the unit L²(μ) sphere, with the near-constant
    /// guard: below deviation 1e−6 the 0/0 quotient is replaced by its
    /// limit 𝓔(f,f)/Var(f).
    fn quotient(&self, f: &[f64]) -> Result<f64> {
        let space = self.gen.space;
        let mean = space.mean(f);
        let dev_sq: f64 = f
            .iter()
            .zip(&space.measure)
            .map(|(v, w)| (v - mean) * (v - mean) * w)
            .sum();
        let energy = self.energy(f)?;
        if dev_sq.sqrt() < 1e-6 {
            if dev_sq == 0.0 {
                return Ok(f64::INFINITY);
            }
            return Ok(energy / dev_sq);
        }
        let ent = self.entropy(f);
        if ent <= 0.0 {
            return Ok(f64::INFINITY);
        }
        Ok(2.0 * energy / ent)
    }

    fn energy(&self, f: &[f64]) -> Result<f64> {
        // center first: L kills constants, and for f near-constant the
        // uncentered −⟨f, Lf⟩ loses the whole O(δ²) signal to cancellation
        let space = self.gen.space;
        let mean = space.mean(f);
        let centered: Vec<f64> = f.iter().map(|v| v - mean).collect();
        let lf = self.gen.apply(&centered)?;
        Ok(-space.inner(&centered, &lf))
    }

    fn entropy(&self, f: &[f64]) -> f64 {
        let space = self.gen.space;
        let norm_sq = space.l2_norm_sq(f);
        let raw: f64 = f
            .iter()
            .zip(&space.measure)
            .map(|(v, w)| {
                let sq = v * v;
                if sq > 0.0 {
                    sq * sq.ln() * w
                } else {
                    0.0
                }
            })
            .sum();
        raw - norm_sq * norm_sq.ln()
    }

    /// Euclidean-in-μ gradient of the quotient on the sphere.
    fn gradient(&self, f: &[f64], quotient: f64) -> Result<Vec<f64>> {
        let space = self.gen.space;
        let lf = self.gen.apply(f)?;
        let ent = self.entropy(f).max(1e-300);
        // d/df [2𝓔] = −4Lf ; d/df [Ent(f²)] = 2f ln f² on the unit sphere
        let mut grad: Vec<f64> = lf
            .iter()
            .zip(f)
            .map(|(lv, fv)| {
                let sq = fv * fv;
                let dent = if sq > 0.0 { 2.0 * fv * sq.ln() } else { 0.0 };
                (-4.0 * lv - quotient * dent) / ent
            })
            .collect();
        // project out the radial component
        let radial: f64 = space.inner(&grad, f);
        for (g, fv) in grad.iter_mut().zip(f) {
            *g -= radial * fv;
        }
        Ok(grad)
    }
}

fn normalize_l2(space: &MarkovSpace, f: &mut [f64]) {
    let norm = space.l2_norm_sq(f).sqrt();
    if norm > 0.0 {
        for v in f.iter_mut() {
            *v /= norm;
        }
    }
}

fn numeric_search(gen: &Generator, iters_per_start: usize) -> Result<f64> {
    if gen.space.n_states < 2 {
        return Err(Error::InvalidParameter(
            "log-Sobolev search needs at least two states".into(),
        ));
    }
    let obj = LsiObjective { gen };
    let mut best = f64::INFINITY;

    // deterministic near-constant probe along a gap eigenfunction: its
    // quotient is exactly the spectral gap, the correct value whenever the
    // minimizing direction degenerates to a constant (e.g. p = 1/2)
    if let Some(phi) = gap_eigenfunction(gen)? {
        let mut probe: Vec<f64> = phi.iter().map(|v| 1.0 + 1e-8 * v).collect();
        normalize_l2(gen.space, &mut probe);
        best = best.min(obj.quotient(&probe)?);
    }

    if gen.space.n_states == 2 {
        best = best.min(two_state_scan(gen, &obj)?);
        return Ok(best);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1051);
    let n = gen.space.n_states;
    for _ in 0..32 {
        let mut f: Vec<f64> = (0..n).map(|_| 0.25 + rng.gen::<f64>()).collect();
        normalize_l2(gen.space, &mut f);
        let mut q = obj.quotient(&f)?;
        for _ in 0..iters_per_start {
            let grad = obj.gradient(&f, q)?;
            let gnorm = gen.space.l2_norm_sq(&grad).sqrt();
            if gnorm < 1e-13 {
                break;
            }
            let mut step = 0.5;
            let mut improved = false;
            for _ in 0..30 {
                let mut cand: Vec<f64> = f
                    .iter()
                    .zip(&grad)
                    .map(|(fv, gv)| fv - step * gv)
                    .collect();
                normalize_l2(gen.space, &mut cand);
                let cq = obj.quotient(&cand)?;
                if cq < q {
                    f = cand;
                    q = cq;
                    improved = true;
                    break;
                }
                step *= 0.5;
            }
            if !improved {
                break;
            }
        }
        best = best.min(q);
    }
    if !best.is_finite() {
        return Err(Error::Precondition(
            "log-Sobolev search failed to produce a finite quotient".into(),
        ));
    }
    Ok(best)
}

/// On two states the unit sphere is a circle: scan the angle, then refine
/// the best bracket by golden section. Deterministic and tight.
fn two_state_scan(gen: &Generator, obj: &LsiObjective) -> Result<f64> {
    let mu = &gen.space.measure;
    let eval = |theta: f64| -> Result<f64> {
        let f = [theta.cos() / mu[0].sqrt(), theta.sin() / mu[1].sqrt()];
        obj.quotient(&f)
    };
    let steps = 4096;
    let mut best_q = f64::INFINITY;
    let mut best_theta = 0.0;
    for i in 0..steps {
        let theta = std::f64::consts::PI * (i as f64 + 0.5) / steps as f64;
        let q = eval(theta)?;
        if q < best_q {
            best_q = q;
            best_theta = theta;
        }
    }
    let width = std::f64::consts::PI / steps as f64;
    let (mut lo, mut hi) = (best_theta - width, best_theta + width);
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut q1 = eval(x1)?;
    let mut q2 = eval(x2)?;
    for _ in 0..80 {
        if q1 < q2 {
            hi = x2;
            x2 = x1;
            q2 = q1;
            x1 = hi - phi * (hi - lo);
            q1 = eval(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            q1 = q2;
            x2 = lo + phi * (hi - lo);
            q2 = eval(x2)?;
        }
    }
    Ok(best_q.min(q1).min(q2))
}

/// A gap eigenfunction: one centered coordinate on products, the first
/// nonconstant eigenvector otherwise (when the dense path is affordable).
fn gap_eigenfunction(gen: &Generator) -> Result<Option<Vec<f64>>> {
    match &gen.space.structure {
        Structure::Product(p) => {
            let fac = &p.factors[0];
            let mean: f64 = fac
                .values
                .iter()
                .zip(&fac.measure)
                .map(|(v, w)| v * w)
                .sum();
            let stride = p.strides[0];
            let m = fac.values.len();
            let table: Vec<f64> = (0..gen.space.n_states)
                .map(|x| fac.values[(x / stride) % m] - mean)
                .collect();
            if gen.space.l2_norm_sq(&table) < 1e-24 {
                return Ok(None);
            }
            Ok(Some(table))
        }
        Structure::Schreier(_) => {
            if gen.space.n_states > tolerances::DENSE_EIGEN_LIMIT {
                return Ok(None);
            }
            let spec = gen.spectral()?;
            Ok(Some(spec.eigenvectors[1].clone()))
        }
    }
}

/// Hypercontractivity at (t, q): sets p = 1 + (q−1)e^{−2ρt} and compares
/// ‖P_t f‖_q against ‖f‖_p.
pub fn hypercontractivity_check(
    gen: &Generator,
    rho: f64,
    f: &[f64],
    t: f64,
    q: f64,
) -> Result<HyperReport> {
    if q <= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "hypercontractivity needs q > 1, got {q}"
        )));
    }
    if t <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "hypercontractivity needs t > 0, got {t}"
        )));
    }
    let p = 1.0 + (q - 1.0) * (-2.0 * rho * t).exp();
    let evolved = evolve(gen, f, t)?;
    let evolved_q_norm = lp_norm(gen.space, &evolved, q)?;
    let input_p_norm = lp_norm(gen.space, f, p)?;
    Ok(HyperReport {
        t,
        p,
        q,
        evolved_q_norm,
        input_p_norm,
        slack: input_p_norm - evolved_q_norm,
    })
}

/// (Σ_x |f(x)|^p μ(x))^{1/p}.
pub fn lp_norm(space: &MarkovSpace, f: &[f64], p: f64) -> Result<f64> {
    if p < 1.0 {
        return Err(Error::InvalidParameter(format!(
            "lp norm needs p >= 1, got {p}"
        )));
    }
    space.check_table(f)?;
    let sum: f64 = f
        .iter()
        .zip(&space.measure)
        .map(|(v, w)| v.abs().powf(p) * w)
        .sum();
    Ok(sum.powf(1.0 / p))
}
