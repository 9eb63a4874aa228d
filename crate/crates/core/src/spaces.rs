//! Finite reversible state spaces: biased cubes, discrete tori, slices of
//! the Boolean cube, and symmetric groups, each with its stationary measure
//! and Dirichlet-form normalization.
//!
//! Two structural families cover everything here. Product spaces carry
//! per-coordinate rank-one refresh kernels (a step resamples one coordinate
//! from its marginal), so nothing is ever materialized beyond the factor
//! marginals. Schreier spaces carry an explicit symmetric generator set
//! acting on ranked states; the kernel is the induced random walk.
//!
//! State indexing is deterministic: mixed-radix (little-endian) for
//! products and tori, colexicographic combination ranks for slices, Lehmer
//! codes for permutations. Every table of function values is indexed by
//! these ranks.

use crate::error::{Error, Result};
use crate::tolerances;

/// Real values indexed by the ranked states of a [`MarkovSpace`].
pub type FunctionTable = Vec<f64>;

/// Which Dirichlet-form convention the space uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// (1/(2|S|)) Σ_s ‖D_s f‖₂² over the generator set.
    GraphForm,
    /// Σ_i ∫ (L_i f)² dμ with L_i the coordinate refresh Laplacian.
    ProductForm,
    /// (1/4) Σ_i ‖D_i f‖₂² over forward shifts; generator scaled by n/2.
    RescaledTorus,
}

impl Normalization {
    pub fn as_str(self) -> &'static str {
        match self {
            Normalization::GraphForm => "graph",
            Normalization::ProductForm => "product",
            Normalization::RescaledTorus => "rescaled-torus",
        }
    }
}

/// Dirichlet energy together with the normalization it was computed in.
#[derive(Debug, Clone, Copy)]
pub struct DirichletValue {
    pub energy: f64,
    pub normalization: Normalization,
}

/// One coordinate of a product space.
#[derive(Debug, Clone)]
pub struct Factor {
    /// Point labels, e.g. {−1, 1} for a cube factor.
    pub values: Vec<f64>,
    /// Marginal weights, positive, summing to 1.
    pub measure: Vec<f64>,
}

/// Product structure: independent factors, refresh kernel per coordinate.
#[derive(Debug, Clone)]
pub struct ProductSpace {
    pub factors: Vec<Factor>,
    /// Little-endian strides: state = Σ digit_i · strides[i].
    pub strides: Vec<usize>,
}

/// What a Schreier generator does, for labeling and for structure-aware
/// operations (forward shifts for the torus form, pairs for slices).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorLabel {
    /// Swap of coordinates i < j (0-indexed).
    Transposition(usize, usize),
    /// Cyclic shift of one torus coordinate by ±1.
    Shift { coord: usize, step: i64 },
}

impl GeneratorLabel {
    /// The swapped pair (i, j) when this generator is a transposition.
    pub fn transposition(&self) -> Option<(usize, usize)> {
        match self {
            GeneratorLabel::Transposition(i, j) => Some((*i, *j)),
            GeneratorLabel::Shift { .. } => None,
        }
    }

    pub fn render(&self) -> String {
        match self {
            GeneratorLabel::Transposition(i, j) => format!("t({},{})", i + 1, j + 1),
            GeneratorLabel::Shift { coord, step } => {
                let sign = if *step >= 0 { "+" } else { "-" };
                format!("{}e{}", sign, coord + 1)
            }
        }
    }
}

/// Schreier structure: symmetric generator set acting on ranked states.
#[derive(Debug, Clone)]
pub struct SchreierSpace {
    /// maps[s][x] = rank of x acted on by generator s.
    pub maps: Vec<Vec<u32>>,
    /// Kernel weight of each generator; weights sum to 1.
    pub weights: Vec<f64>,
    pub gens: Vec<GeneratorLabel>,
}

#[derive(Debug, Clone)]
pub enum Structure {
    Product(ProductSpace),
    Schreier(SchreierSpace),
}

/// Which family the space belongs to, with its construction parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpaceKind {
    Cube { n: usize, p: f64 },
    /// Arbitrary product built from explicit factors.
    Product { n: usize },
    Torus { n: usize, m: usize },
    Slice { n: usize, k: usize },
    Symmetric { n: usize },
}

impl SpaceKind {
    pub fn describe(&self) -> String {
        match self {
            SpaceKind::Cube { n, p } => format!("cube(n={n}, p={p})"),
            SpaceKind::Product { n } => format!("product(n={n})"),
            SpaceKind::Torus { n, m } => format!("torus(n={n}, m={m})"),
            SpaceKind::Slice { n, k } => format!("slice(n={n}, k={k})"),
            SpaceKind::Symmetric { n } => format!("symmetric-group(n={n})"),
        }
    }
}

/// A finite state set with stationary measure, reversible kernel, and a
/// Dirichlet normalization.
#[derive(Debug, Clone)]
pub struct MarkovSpace {
    pub kind: SpaceKind,
    pub structure: Structure,
    /// Stationary weights per ranked state; positive, sum to 1.
    pub measure: Vec<f64>,
    pub normalization: Normalization,
    pub n_states: usize,
}

// ---------------------------------------------------------------------------
// combinatorial rank/unrank helpers
// ---------------------------------------------------------------------------

/// Binomial coefficient in u128 (no overflow at desk scale).
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Colex rank of a sorted 0-indexed combination.
pub fn combination_rank(elems: &[usize]) -> usize {
    elems
        .iter()
        .enumerate()
        .map(|(pos, &c)| binomial(c, pos + 1) as usize)
        .sum()
}

/// Inverse of [`combination_rank`] for k-subsets of [0, n).
pub fn combination_unrank(n: usize, k: usize, mut rank: usize) -> Vec<usize> {
    let mut out = vec![0usize; k];
    let mut hi = n;
    for pos in (1..=k).rev() {
        // largest c with C(c, pos) <= rank
        let mut c = pos - 1;
        let mut best = c;
        while c < hi {
            if binomial(c, pos) as usize <= rank {
                best = c;
                c += 1;
            } else {
                break;
            }
        }
        out[pos - 1] = best;
        rank -= binomial(best, pos) as usize;
        hi = best;
    }
    out
}

/// Lehmer rank of a permutation word (a permutation of 0..n).
pub fn permutation_rank(w: &[usize]) -> usize {
    let n = w.len();
    let mut rank = 0usize;
    let mut fact = 1usize;
    for i in (0..n).rev() {
        let smaller = w[i + 1..].iter().filter(|&&x| x < w[i]).count();
        rank += smaller * fact;
        fact *= n - i;
    }
    rank
}

/// Inverse of [`permutation_rank`].
pub fn permutation_unrank(n: usize, mut rank: usize) -> Vec<usize> {
    let mut fact = 1usize;
    let mut digits = vec![0usize; n];
    for i in 1..=n {
        digits[n - i] = rank % (fact * i) / fact;
        rank -= digits[n - i] * fact;
        fact *= i;
    }
    // digits are now the Lehmer code; decode against the remaining pool
    let mut pool: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        out.push(pool.remove(digits[i]));
    }
    out
}

fn check_budget(needed: u128) -> Result<usize> {
    if needed > tolerances::STATE_BUDGET as u128 {
        return Err(Error::BudgetExceeded {
            needed,
            budget: tolerances::STATE_BUDGET,
        });
    }
    Ok(needed as usize)
}

// ---------------------------------------------------------------------------
// builders
// ---------------------------------------------------------------------------

/// Biased cube {−1,1}ⁿ with measure (p δ_{−1} + (1−p) δ_1)^{⊗n} and the
/// per-coordinate refresh kernel.
pub fn build_biased_cube(n: usize, p: f64) -> Result<MarkovSpace> {
    if n == 0 {
        return Err(Error::InvalidParameter("cube needs n >= 1".into()));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "cube bias p must lie in (0,1), got {p}"
        )));
    }
    if n >= 64 {
        return Err(Error::BudgetExceeded {
            needed: u128::MAX,
            budget: tolerances::STATE_BUDGET,
        });
    }
    check_budget(1u128 << n)?;
    let factor = Factor {
        values: vec![-1.0, 1.0],
        measure: vec![p, 1.0 - p],
    };
    let mut space = build_product_inner(vec![factor; n])?;
    space.kind = SpaceKind::Cube { n, p };
    Ok(space)
}

/// Arbitrary product of explicit factors, refresh kernel per coordinate,
/// ProductForm normalization.
pub fn build_product(factors: Vec<Factor>) -> Result<MarkovSpace> {
    build_product_inner(factors)
}

fn build_product_inner(factors: Vec<Factor>) -> Result<MarkovSpace> {
    if factors.is_empty() {
        return Err(Error::InvalidParameter("product needs >= 1 factor".into()));
    }
    let mut needed: u128 = 1;
    for (i, fac) in factors.iter().enumerate() {
        if fac.values.len() != fac.measure.len() || fac.values.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "factor {i} has mismatched or empty values/measure"
            )));
        }
        let total: f64 = fac.measure.iter().sum();
        if (total - 1.0).abs() > tolerances::MEASURE_SUM || fac.measure.iter().any(|&w| w <= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "factor {i} measure must be positive and sum to 1"
            )));
        }
        needed *= fac.values.len() as u128;
    }
    let n_states = check_budget(needed)?;
    let n = factors.len();
    let mut strides = vec![0usize; n];
    let mut acc = 1usize;
    for i in 0..n {
        strides[i] = acc;
        acc *= factors[i].values.len();
    }
    let mut measure = vec![0.0f64; n_states];
    for (x, slot) in measure.iter_mut().enumerate() {
        let mut w = 1.0;
        let mut rest = x;
        for fac in &factors {
            let d = rest % fac.values.len();
            rest /= fac.values.len();
            w *= fac.measure[d];
        }
        *slot = w;
    }
    Ok(MarkovSpace {
        kind: SpaceKind::Product { n },
        structure: Structure::Product(ProductSpace { factors, strides }),
        measure,
        normalization: Normalization::ProductForm,
        n_states,
    })
}

/// Discrete torus (ℤ/mℤ)ⁿ: uniform measure, simple random walk on the
/// symmetric generator set {±e_i}, RescaledTorus normalization.
///
/// For m = 2 the moves +e_i and −e_i coincide; they are merged into a
/// single generator of doubled kernel weight so the walk reproduces the
/// cube flip walk exactly.
pub fn build_torus(n: usize, m: usize) -> Result<MarkovSpace> {
    if n == 0 {
        return Err(Error::InvalidParameter("torus needs n >= 1".into()));
    }
    if m < 2 {
        return Err(Error::InvalidParameter(format!(
            "torus needs modulus m >= 2, got {m}"
        )));
    }
    let mut needed: u128 = 1;
    for _ in 0..n {
        needed = needed.saturating_mul(m as u128);
    }
    let n_states = check_budget(needed)?;
    let mut strides = vec![0usize; n];
    let mut acc = 1usize;
    for s in strides.iter_mut() {
        *s = acc;
        acc *= m;
    }

    let steps: &[i64] = if m == 2 { &[1] } else { &[1, -1] };
    let mut maps = Vec::new();
    let mut gens = Vec::new();
    for coord in 0..n {
        for &step in steps {
            let mut map = vec![0u32; n_states];
            for (x, slot) in map.iter_mut().enumerate() {
                let digit = (x / strides[coord]) % m;
                let moved = (digit as i64 + step).rem_euclid(m as i64) as usize;
                *slot = (x - digit * strides[coord] + moved * strides[coord]) as u32;
            }
            maps.push(map);
            gens.push(GeneratorLabel::Shift { coord, step });
        }
    }
    let weight = 1.0 / maps.len() as f64;
    let weights = vec![weight; maps.len()];
    let measure = vec![1.0 / n_states as f64; n_states];
    Ok(MarkovSpace {
        kind: SpaceKind::Torus { n, m },
        structure: Structure::Schreier(SchreierSpace {
            maps,
            weights,
            gens,
        }),
        measure,
        normalization: Normalization::RescaledTorus,
        n_states,
    })
}

/// Slice of the Boolean cube: 0/1 vectors of Hamming weight k, uniform
/// measure, all transpositions τ_ij as generators, GraphForm Dirichlet
/// energy (1/(n(n−1))) Σ_{i<j} ‖D_{τ_ij} f‖₂².
pub fn build_slice(n: usize, k: usize) -> Result<MarkovSpace> {
    if n < 2 {
        return Err(Error::InvalidParameter("slice needs n >= 2".into()));
    }
    if k < 1 || k > n - 1 {
        return Err(Error::InvalidParameter(format!(
            "slice weight k must lie in [1, n-1], got k={k} for n={n}"
        )));
    }
    let n_states = check_budget(binomial(n, k))?;
    // states as sorted element lists, indexed by colex rank
    let mut subsets = Vec::with_capacity(n_states);
    for r in 0..n_states {
        subsets.push(combination_unrank(n, k, r));
    }
    let mut maps = Vec::new();
    let mut gens = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let mut map = vec![0u32; n_states];
            for (x, subset) in subsets.iter().enumerate() {
                let has_i = subset.binary_search(&i).is_ok();
                let has_j = subset.binary_search(&j).is_ok();
                if has_i == has_j {
                    map[x] = x as u32;
                } else {
                    let mut moved: Vec<usize> = subset
                        .iter()
                        .map(|&c| {
                            if c == i {
                                j
                            } else if c == j {
                                i
                            } else {
                                c
                            }
                        })
                        .collect();
                    moved.sort_unstable();
                    map[x] = combination_rank(&moved) as u32;
                }
            }
            maps.push(map);
            gens.push(GeneratorLabel::Transposition(i, j));
        }
    }
    let weight = 1.0 / maps.len() as f64;
    let weights = vec![weight; maps.len()];
    let measure = vec![1.0 / n_states as f64; n_states];
    Ok(MarkovSpace {
        kind: SpaceKind::Slice { n, k },
        structure: Structure::Schreier(SchreierSpace {
            maps,
            weights,
            gens,
        }),
        measure,
        normalization: Normalization::GraphForm,
        n_states,
    })
}

/// Symmetric group 𝔖_n under the all-transpositions Cayley walk, uniform
/// measure, GraphForm normalization. States are permutation words ranked
/// by Lehmer code; a transposition τ_ij swaps the word entries at
/// positions i and j.
pub fn build_symmetric_group(n: usize) -> Result<MarkovSpace> {
    if n < 2 {
        return Err(Error::InvalidParameter(
            "symmetric group needs n >= 2".into(),
        ));
    }
    let mut needed: u128 = 1;
    for i in 2..=n {
        needed = needed.saturating_mul(i as u128);
    }
    let n_states = check_budget(needed)?;
    let mut words = Vec::with_capacity(n_states);
    for r in 0..n_states {
        words.push(permutation_unrank(n, r));
    }
    let mut maps = Vec::new();
    let mut gens = Vec::new();
    let mut scratch = vec![0usize; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let mut map = vec![0u32; n_states];
            for (x, w) in words.iter().enumerate() {
                scratch.copy_from_slice(w);
                scratch.swap(i, j);
                map[x] = permutation_rank(&scratch) as u32;
            }
            maps.push(map);
            gens.push(GeneratorLabel::Transposition(i, j));
        }
    }
    let weight = 1.0 / maps.len() as f64;
    let weights = vec![weight; maps.len()];
    let measure = vec![1.0 / n_states as f64; n_states];
    Ok(MarkovSpace {
        kind: SpaceKind::Symmetric { n },
        structure: Structure::Schreier(SchreierSpace {
            maps,
            weights,
            gens,
        }),
        measure,
        normalization: Normalization::GraphForm,
        n_states,
    })
}

// ---------------------------------------------------------------------------
// space methods
// ---------------------------------------------------------------------------

impl MarkovSpace {
    /// Coordinates for products, generators for Schreier spaces.
    pub fn n_directions(&self) -> usize {
        match &self.structure {
            Structure::Product(p) => p.factors.len(),
            Structure::Schreier(s) => s.maps.len(),
        }
    }

    /// Generator scale: n/2 for the rescaled torus form, 1 otherwise.
    pub fn generator_scale(&self) -> f64 {
        match self.kind {
            SpaceKind::Torus { n, .. } => n as f64 / 2.0,
            _ => 1.0,
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
                "function table contains non-finite value {bad}"
            )));
        }
        Ok(())
    }

    pub fn mean(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.measure).map(|(v, w)| v * w).sum()
    }

    pub fn inner(&self, f: &[f64], g: &[f64]) -> f64 {
        f.iter()
            .zip(g)
            .zip(&self.measure)
            .map(|((a, b), w)| a * b * w)
            .sum()
    }

    pub fn l2_norm_sq(&self, f: &[f64]) -> f64 {
        self.inner(f, f)
    }

    pub fn l1_norm(&self, f: &[f64]) -> f64 {
        f.iter()
            .zip(&self.measure)
            .map(|(v, w)| v.abs() * w)
            .sum()
    }

    pub fn variance(&self, f: &[f64]) -> f64 {
        let m = self.mean(f);
        f.iter()
            .zip(&self.measure)
            .map(|(v, w)| (v - m) * (v - m) * w)
            .sum()
    }

    /// Mixed-radix digits of a product/torus state.
    pub fn digits_of(&self, mut rank: usize) -> Vec<usize> {
        match (&self.structure, self.kind) {
            (Structure::Product(p), _) => {
                let mut out = Vec::with_capacity(p.factors.len());
                for fac in &p.factors {
                    out.push(rank % fac.values.len());
                    rank /= fac.values.len();
                }
                out
            }
            (Structure::Schreier(_), SpaceKind::Torus { n, m }) => {
                let mut out = Vec::with_capacity(n);
                for _ in 0..n {
                    out.push(rank % m);
                    rank /= m;
                }
                out
            }
            (Structure::Schreier(_), SpaceKind::Slice { n, k }) => {
                let elems = combination_unrank(n, k, rank);
                let mut out = vec![0usize; n];
                for e in elems {
                    out[e] = 1;
                }
                out
            }
            (Structure::Schreier(_), SpaceKind::Symmetric { n }) => permutation_unrank(n, rank),
            _ => unreachable!("schreier structure with product kind"),
        }
    }

    /// Refresh coordinate i of a product-space function: (E_i f)(x).
    pub fn refresh_axis(&self, f: &[f64], i: usize) -> Result<Vec<f64>> {
        let prod = match &self.structure {
            Structure::Product(p) => p,
            Structure::Schreier(_) => {
                return Err(Error::UnsupportedStructure(
                    "coordinate refresh needs a product space".into(),
                ))
            }
        };
        if i >= prod.factors.len() {
            return Err(Error::InvalidParameter(format!(
                "coordinate {i} out of range for {} factors",
                prod.factors.len()
            )));
        }
        self.check_table(f)?;
        let m = prod.factors[i].values.len();
        let stride = prod.strides[i];
        let weights = &prod.factors[i].measure;
        let mut out = vec![0.0f64; f.len()];
        let block = stride * m;
        let mut base = 0;
        while base < f.len() {
            for lo in 0..stride {
                let mut avg = 0.0;
                for d in 0..m {
                    avg += weights[d] * f[base + d * stride + lo];
                }
                for d in 0..m {
                    out[base + d * stride + lo] = avg;
                }
            }
            base += block;
        }
        Ok(out)
    }

    /// Coordinate Laplacian L_i f = E_i f − f on product spaces.
    pub fn coordinate_laplacian(&self, f: &[f64], i: usize) -> Result<Vec<f64>> {
        let mut e = self.refresh_axis(f, i)?;
        for (ev, fv) in e.iter_mut().zip(f) {
            *ev -= fv;
        }
        Ok(e)
    }

    /// Generator difference D_s f = f∘s − f on Schreier spaces.
    pub fn generator_difference(&self, f: &[f64], s: usize) -> Result<Vec<f64>> {
        let sch = self.schreier()?;
        if s >= sch.maps.len() {
            return Err(Error::InvalidParameter(format!(
                "generator {s} out of range for {} generators",
                sch.maps.len()
            )));
        }
        self.check_table(f)?;
        let map = &sch.maps[s];
        Ok((0..f.len()).map(|x| f[map[x] as usize] - f[x]).collect())
    }

    pub fn schreier(&self) -> Result<&SchreierSpace> {
        match &self.structure {
            Structure::Schreier(s) => Ok(s),
            Structure::Product(_) => Err(Error::UnsupportedStructure(
                "operation needs a Schreier space".into(),
            )),
        }
    }

    pub fn product(&self) -> Result<&ProductSpace> {
        match &self.structure {
            Structure::Product(p) => Ok(p),
            Structure::Schreier(_) => Err(Error::UnsupportedStructure(
                "operation needs a product space".into(),
            )),
        }
    }

    /// One application of the row-stochastic kernel K.
    pub fn apply_kernel(&self, f: &[f64]) -> Result<Vec<f64>> {
        self.check_table(f)?;
        match &self.structure {
            Structure::Product(p) => {
                let n = p.factors.len();
                let mut out = vec![0.0f64; f.len()];
                for i in 0..n {
                    let e = self.refresh_axis(f, i)?;
                    for (o, v) in out.iter_mut().zip(&e) {
                        *o += v / n as f64;
                    }
                }
                Ok(out)
            }
            Structure::Schreier(s) => {
                let mut out = vec![0.0f64; f.len()];
                for (map, &w) in s.maps.iter().zip(&s.weights) {
                    for x in 0..f.len() {
                        out[x] += w * f[map[x] as usize];
                    }
                }
                Ok(out)
            }
        }
    }

    /// Dense kernel matrix, row-major. Only for small spaces (tests and
    /// spectral synthesis); refused past the dense limit.
    pub fn dense_kernel(&self) -> Result<Vec<f64>> {
        if self.n_states > tolerances::DENSE_EIGEN_LIMIT {
            return Err(Error::BudgetExceeded {
                needed: self.n_states as u128,
                budget: tolerances::DENSE_EIGEN_LIMIT,
            });
        }
        let n = self.n_states;
        let mut k = vec![0.0f64; n * n];
        match &self.structure {
            Structure::Product(p) => {
                // row x of K = (1/nf) Σ_i E_i: mixture of coordinate refreshes
                let nf = p.factors.len() as f64;
                for x in 0..n {
                    for (i, fac) in p.factors.iter().enumerate() {
                        let m = fac.values.len();
                        let stride = p.strides[i];
                        let digit = (x / stride) % m;
                        let base = x - digit * stride;
                        for d in 0..m {
                            k[x * n + base + d * stride] += fac.measure[d] / nf;
                        }
                    }
                }
            }
            Structure::Schreier(s) => {
                for (map, &w) in s.maps.iter().zip(&s.weights) {
                    for x in 0..n {
                        k[x * n + map[x] as usize] += w;
                    }
                }
            }
        }
        Ok(k)
    }

    /// Sparse reversibility audit: K(x,y)μ(x) = K(y,x)μ(y) over the moves
    /// the kernel actually makes, plus measure positivity and total mass.
    pub fn validate(&self) -> Result<()> {
        let total: f64 = self.measure.iter().sum();
        if (total - 1.0).abs() > tolerances::MEASURE_SUM {
            return Err(Error::Precondition(format!(
                "measure sums to {total}, not 1"
            )));
        }
        if self.measure.iter().any(|&w| w <= 0.0) {
            return Err(Error::Precondition("measure has a nonpositive weight".into()));
        }
        match &self.structure {
            Structure::Product(p) => {
                // factor-level detailed balance: K_i(a,b)μ_i(a) = K_i(b,a)μ_i(b)
                // holds identically because K_i(a,b) = μ_i(b).
                for fac in &p.factors {
                    let s: f64 = fac.measure.iter().sum();
                    if (s - 1.0).abs() > tolerances::MEASURE_SUM {
                        return Err(Error::Precondition(
                            "factor marginal does not sum to 1".into(),
                        ));
                    }
                }
            }
            Structure::Schreier(s) => {
                // uniform measure: need each generator's inverse present with
                // equal weight; shifts pair +1/−1, transpositions self-pair.
                for (idx, (g, map)) in s.gens.iter().zip(&s.maps).enumerate() {
                    let inv = match g {
                        GeneratorLabel::Transposition(..) => *g,
                        GeneratorLabel::Shift { coord, step } => GeneratorLabel::Shift {
                            coord: *coord,
                            step: -step,
                        },
                    };
                    let matched = s.gens.iter().position(|h| {
                        *h == inv
                            || matches!(
                                (h, &inv),
                                (
                                    GeneratorLabel::Shift { coord: c1, step: s1 },
                                    GeneratorLabel::Shift { coord: c2, step: s2 }
                                ) if c1 == c2 && (s1 - s2).rem_euclid(self.torus_modulus() as i64) == 0
                            )
                    });
                    let inv_idx = matched.ok_or_else(|| {
                        Error::Precondition("generator set is not symmetric".into())
                    })?;
                    let inv_map = &s.maps[inv_idx];
                    for x in 0..self.n_states {
                        let y = map[x] as usize;
                        if inv_map[y] as usize != x {
                            return Err(Error::Precondition(
                                "generator inverse does not undo the action".into(),
                            ));
                        }
                        // K(x,y)μ(x) from generator idx vs K(y,x)μ(y) from its inverse
                        let lhs = s.weights[idx] * self.measure[x];
                        let rhs = s.weights[inv_idx] * self.measure[y];
                        if (lhs - rhs).abs() > tolerances::REVERSIBILITY {
                            return Err(Error::Precondition(
                                "detailed balance fails on a generator move".into(),
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn torus_modulus(&self) -> usize {
        match self.kind {
            SpaceKind::Torus { m, .. } => m,
            _ => 2,
        }
    }
}

// ---------------------------------------------------------------------------
// Dirichlet energy
// ---------------------------------------------------------------------------

/// Dirichlet energy of f in the space's normalization.
pub fn dirichlet_energy(space: &MarkovSpace, f: &[f64]) -> Result<DirichletValue> {
    space.check_table(f)?;
    let energy = match space.normalization {
        Normalization::ProductForm => {
            let n = space.n_directions();
            let mut acc = 0.0;
            for i in 0..n {
                let li = space.coordinate_laplacian(f, i)?;
                acc += space.l2_norm_sq(&li);
            }
            acc
        }
        Normalization::GraphForm => {
            let sch = space.schreier()?;
            let count = sch.maps.len() as f64;
            let mut acc = 0.0;
            for s in 0..sch.maps.len() {
                let d = space.generator_difference(f, s)?;
                acc += space.l2_norm_sq(&d);
            }
            acc / (2.0 * count)
        }
        Normalization::RescaledTorus => {
            let sch = space.schreier()?;
            let mut acc = 0.0;
            for (s, g) in sch.gens.iter().enumerate() {
                // forward differences only; backward shifts contribute the
                // same mass, which the 1/4 normalization already accounts for
                if matches!(g, GeneratorLabel::Shift { step, .. } if *step > 0) {
                    let d = space.generator_difference(f, s)?;
                    acc += space.l2_norm_sq(&d);
                }
            }
            acc / 4.0
        }
    };
    Ok(DirichletValue {
        energy,
        normalization: space.normalization,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_two_point_cube() {
        let s = build_biased_cube(1, 0.5).unwrap();
        assert_eq!(s.n_states, 2);
        assert_eq!(s.measure, vec![0.5, 0.5]);
    }

    #[test]
    fn biased_corner_weights() {
        let s = build_biased_cube(2, 0.3).unwrap();
        // state 0 = (−1,−1), state 3 = (1,1); p is the weight of −1
        assert!((s.measure[0] - 0.09).abs() < 1e-15);
        assert!((s.measure[3] - 0.49).abs() < 1e-15);
    }

    #[test]
    fn cube_energy_examples() {
        let s1 = build_biased_cube(1, 0.5).unwrap();
        let f: Vec<f64> = (0..2).map(|x| s1.digits_of(x)[0] as f64 * 2.0 - 1.0).collect();
        let e = dirichlet_energy(&s1, &f).unwrap();
        assert!((e.energy - 1.0).abs() < 1e-12);

        let s2 = build_biased_cube(2, 0.5).unwrap();
        let g: Vec<f64> = (0..4)
            .map(|x| {
                let d = s2.digits_of(x);
                (d[0] as f64 * 2.0 - 1.0) * (d[1] as f64 * 2.0 - 1.0)
            })
            .collect();
        let e2 = dirichlet_energy(&s2, &g).unwrap();
        assert!((e2.energy - 2.0).abs() < 1e-12);
    }

    #[test]
    fn torus_m2_is_cube_walk() {
        let t = build_torus(1, 2).unwrap();
        assert_eq!(t.n_states, 2);
        let sch = t.schreier().unwrap();
        assert_eq!(sch.maps.len(), 1);
        assert_eq!(sch.maps[0], vec![1, 0]);
        t.validate().unwrap();
    }

    #[test]
    fn torus_row_support() {
        let t = build_torus(2, 3).unwrap();
        assert_eq!(t.n_states, 9);
        let k = t.dense_kernel().unwrap();
        for x in 0..9 {
            let support = (0..9).filter(|&y| k[x * 9 + y] > 0.0).count();
            assert!(support <= 4);
            let row: f64 = (0..9).map(|y| k[x * 9 + y]).sum();
            assert!((row - 1.0).abs() < 1e-12);
        }
        t.validate().unwrap();
    }

    #[test]
    fn slice_action_example() {
        let s = build_slice(4, 2).unwrap();
        assert_eq!(s.n_states, 6);
        // state 1100 = {0,1}; τ_13 (0-indexed (0,2)) sends it to 0110 = {1,2}
        let from = combination_rank(&[0, 1]);
        let to = combination_rank(&[1, 2]);
        let sch = s.schreier().unwrap();
        let gen_idx = sch
            .gens
            .iter()
            .position(|g| *g == GeneratorLabel::Transposition(0, 2))
            .unwrap();
        assert_eq!(sch.maps[gen_idx][from] as usize, to);
        s.validate().unwrap();
    }

    #[test]
    fn slice_kernel_doubly_stochastic() {
        let s = build_slice(4, 2).unwrap();
        let k = s.dense_kernel().unwrap();
        for i in 0..6 {
            let row: f64 = (0..6).map(|j| k[i * 6 + j]).sum();
            let col: f64 = (0..6).map(|j| k[j * 6 + i]).sum();
            assert!((row - 1.0).abs() < 1e-12);
            assert!((col - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_group_small() {
        let s = build_symmetric_group(3).unwrap();
        assert_eq!(s.n_states, 6);
        assert_eq!(s.n_directions(), 3);
        let k = s.dense_kernel().unwrap();
        for x in 0..6 {
            for y in 0..6 {
                assert!((k[x * 6 + y] - k[y * 6 + x]).abs() < 1e-15);
            }
            let neighbors = (0..6).filter(|&y| k[x * 6 + y] > 0.0).count();
            assert_eq!(neighbors, 3);
        }
        s.validate().unwrap();
    }

    #[test]
    fn combination_rank_roundtrip() {
        for n in 2..=9 {
            for k in 1..n {
                let total = binomial(n, k) as usize;
                for r in 0..total {
                    let c = combination_unrank(n, k, r);
                    assert_eq!(combination_rank(&c), r);
                    assert!(c.windows(2).all(|w| w[0] < w[1]));
                }
            }
        }
    }

    #[test]
    fn permutation_rank_roundtrip() {
        for n in 2..=6 {
            let total: usize = (1..=n).product();
            for r in 0..total {
                let w = permutation_unrank(n, r);
                assert_eq!(permutation_rank(&w), r);
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(
            build_biased_cube(19, 0.5),
            Err(Error::BudgetExceeded { .. })
        ));
        assert!(build_biased_cube(18, 0.5).is_ok());
    }
}
