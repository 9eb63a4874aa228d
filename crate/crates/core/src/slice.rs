//! Harmonic analysis on slices of the cube: the top-set orthogonal basis,
//! its eigenvalue and influence identities, the rescaled semigroup, and the
//! junta extraction pipeline for slice functions.
//!
//! A slice carries the transposition walk; its spectral theory is organized
//! by "top sets" B with eigenvalues 2|B|(n+1-|B|)/(n(n-1)). The basis is
//! built explicitly (sums of products of coordinate differences) and
//! validated; if validation fails, a joint-diagonalization fallback
//! recovers the basis numerically and the certificate records which path
//! produced it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::influence;
use crate::junta::{self, JuntaCertificate};
use crate::linalg;
use crate::report::TwoSidedReport;
use crate::semigroup::{self, Generator};
use crate::spaces::{binomial, build_slice, FunctionTable, MarkovSpace, SpaceKind};
use crate::tolerances;

/// Subset of coordinates written in ascending order, 0-indexed internally
/// and rendered 1-indexed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopSet {
    pub elements: Vec<usize>,
}

impl TopSet {
    pub fn empty() -> Self {
        TopSet {
            elements: Vec::new(),
        }
    }

    pub fn degree(&self) -> usize {
        self.elements.len()
    }

    /// The basis-construction constraint: the j-th smallest element (1-indexed
    /// position i = j+1, value b_i = elements[j]+1) satisfies b_i >= 2i.
    pub fn admissible(&self) -> bool {
        self.elements
            .iter()
            .enumerate()
            .all(|(j, &e)| e >= 2 * j + 1)
            && self.elements.windows(2).all(|w| w[0] < w[1])
    }

    /// |B ∩ [k]| with [k] the first k coordinates.
    pub fn prefix_count(&self, k: usize) -> usize {
        self.elements.iter().filter(|&&e| e < k).count()
    }

    /// 1-indexed display form, e.g. "{2,4}".
    pub fn render(&self) -> String {
        let inner: Vec<String> = self.elements.iter().map(|e| (e + 1).to_string()).collect();
        format!("{{{}}}", inner.join(","))
    }
}

/// Which construction produced a basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisPath {
    Explicit,
    JointDiagonalization,
}

impl BasisPath {
    pub fn as_str(self) -> &'static str {
        match self {
            BasisPath::Explicit => "explicit",
            BasisPath::JointDiagonalization => "joint-diagonalization",
        }
    }
}

#[derive(Debug, Clone)]
pub struct BasisEntry {
    pub top: TopSet,
    pub table: FunctionTable,
    pub norm_sq: f64,
    pub eigenvalue: f64,
}

#[derive(Debug, Clone)]
pub struct SliceBasis {
    pub n: usize,
    pub k: usize,
    pub entries: Vec<BasisEntry>,
    pub path: BasisPath,
}

impl SliceBasis {
    pub fn n_states(&self) -> usize {
        self.entries.first().map_or(0, |e| e.table.len())
    }
}

/// Walk eigenvalue attached to a top set: 2|B|(n+1-|B|)/(n(n-1)).
pub fn eigenvalue_of(top: &TopSet, n: usize) -> f64 {
    let d = top.degree() as f64;
    if top.degree() == 0 {
        return 0.0;
    }
    let nf = n as f64;
    2.0 * d * (nf + 1.0 - d) / (nf * (nf - 1.0))
}

/// All admissible top sets on n coordinates with degree at most max_degree,
/// ordered by degree then lexicographically.
pub fn top_sets(n: usize, max_degree: usize) -> Vec<TopSet> {
    let mut out = vec![TopSet::empty()];
    let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
    for d in 0..max_degree {
        let mut next = Vec::new();
        for base in &frontier {
            let lo = base.last().map_or(0, |&e| e + 1).max(2 * d + 1);
            for e in lo..n {
                let mut v = base.clone();
                v.push(e);
                next.push(v);
            }
        }
        out.extend(next.iter().map(|v| TopSet {
            elements: v.clone(),
        }));
        frontier = next;
    }
    out
}

/// Predicted spectrum of the slice walk as (eigenvalue, multiplicity) pairs
/// for r = 0..=min(k, n-k); multiplicities are C(n,r) - C(n,r-1).
pub fn eigenvalue_multiset(n: usize, k: usize) -> Vec<(f64, usize)> {
    let top = k.min(n - k);
    (0..=top)
        .map(|r| {
            let mult = if r == 0 {
                1
            } else {
                (binomial(n, r) - binomial(n, r - 1)) as usize
            };
            let value = eigenvalue_of(
                &TopSet {
                    elements: (0..r).collect(),
                },
                n,
            );
            (value, mult)
        })
        .collect()
}

/// Eigensolve the slice walk densely and match it against the closed-form
/// multiset: left = the largest absolute difference after sorting both
/// spectra of −L ascending (a multiset comparison, multiplicities and all).
pub fn spectrum_check(space: &MarkovSpace) -> Result<TwoSidedReport> {
    let (n, k) = match space.kind {
        SpaceKind::Slice { n, k } => (n, k),
        _ => {
            return Err(Error::UnsupportedStructure(
                "the spectrum comparison lives on a slice".into(),
            ))
        }
    };
    let kernel = space.dense_kernel()?;
    let d = space.n_states;
    let mut a = vec![0.0f64; d * d];
    for x in 0..d {
        for y in 0..d {
            let delta = if x == y { 1.0 } else { 0.0 };
            a[x * d + y] = delta - kernel[x * d + y];
        }
    }
    let eig = linalg::symmetric_eigen(&a, d);
    let mut predicted = Vec::with_capacity(d);
    for (value, mult) in eigenvalue_multiset(n, k) {
        predicted.extend(std::iter::repeat(value).take(mult));
    }
    if predicted.len() != d {
        return Err(Error::Precondition(format!(
            "multiset covers {} states, the slice has {d}",
            predicted.len()
        )));
    }
    predicted.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    let worst = eig
        .values
        .iter()
        .zip(&predicted)
        .map(|(got, want)| (got - want).abs())
        .fold(0.0f64, f64::max);
    Ok(TwoSidedReport::new(
        format!("slice-spectrum(n={n},k={k})"),
        worst,
        0.0,
        tolerances::SPECTRUM_MATCH,
    ))
}

/// All sequences (a_1, ..., a_d) of distinct indices with a_i < b_i and
/// a_i outside B.
fn basis_sequences(top: &TopSet, n: usize) -> Vec<Vec<usize>> {
    let d = top.degree();
    let mut in_b = vec![false; n];
    for &b in &top.elements {
        in_b[b] = true;
    }
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(d);
    let mut used = vec![false; n];
    fn rec(
        depth: usize,
        top: &TopSet,
        in_b: &[bool],
        used: &mut Vec<bool>,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if depth == top.elements.len() {
            out.push(cur.clone());
            return;
        }
        for a in 0..top.elements[depth] {
            if in_b[a] || used[a] {
                continue;
            }
            used[a] = true;
            cur.push(a);
            rec(depth + 1, top, in_b, used, cur, out);
            cur.pop();
            used[a] = false;
        }
    }
    rec(0, top, &in_b, &mut used, &mut cur, &mut out);
    out
}

/// Value table of the basis vector for one top set: the sum over admissible
/// index sequences of products of coordinate differences x_a - x_b.
fn explicit_table(space: &MarkovSpace, top: &TopSet, n: usize) -> FunctionTable {
    if top.degree() == 0 {
        return vec![1.0; space.n_states];
    }
    let seqs = basis_sequences(top, n);
    let mut out = Vec::with_capacity(space.n_states);
    for r in 0..space.n_states {
        let x = space.digits_of(r);
        let mut total: i64 = 0;
        for seq in &seqs {
            let mut prod: i64 = 1;
            for (&a, &b) in seq.iter().zip(&top.elements) {
                prod *= x[a] as i64 - x[b] as i64;
                if prod == 0 {
                    break;
                }
            }
            total += prod;
        }
        out.push(total as f64);
    }
    out
}

/// Build the basis by the explicit top-set construction and validate it.
pub fn build_basis_explicit(n: usize, k: usize) -> Result<SliceBasis> {
    let space = build_slice(n, k)?;
    let tops = top_sets(n, k.min(n - k));
    if tops.len() as u128 != binomial(n, k) {
        return Err(Error::BasisConstruction(format!(
            "top set count {} does not match the slice dimension {}",
            tops.len(),
            binomial(n, k)
        )));
    }
    let entries: Vec<BasisEntry> = tops
        .into_iter()
        .map(|top| {
            let table = explicit_table(&space, &top, n);
            let norm_sq = space.l2_norm_sq(&table);
            let eigenvalue = eigenvalue_of(&top, n);
            BasisEntry {
                top,
                table,
                norm_sq,
                eigenvalue,
            }
        })
        .collect();
    let basis = SliceBasis {
        n,
        k,
        entries,
        path: BasisPath::Explicit,
    };
    validate_basis(&space, &basis)?;
    Ok(basis)
}

/// Apply the prefix quadratic-form operator: (2/k) Σ_{i<j<=k} (f - f∘τ_ij).
/// Its quadratic form is the prefix influence (1/k) Σ ‖D_τ f‖₂².
fn prefix_operator(
    space: &MarkovSpace,
    pair_of_gen: &[(usize, usize)],
    k: usize,
    f: &[f64],
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; f.len()];
    for (s, &(i, j)) in pair_of_gen.iter().enumerate() {
        if i >= k || j >= k {
            continue;
        }
        let d = space.generator_difference(f, s)?;
        for (o, dv) in out.iter_mut().zip(&d) {
            *o -= dv;
        }
    }
    let scale = 2.0 / k as f64;
    for o in out.iter_mut() {
        *o *= scale;
    }
    Ok(out)
}

fn transposition_pairs(space: &MarkovSpace) -> Result<Vec<(usize, usize)>> {
    let sch = space.schreier()?;
    sch.gens
        .iter()
        .map(|g| {
            g.transposition().ok_or_else(|| {
                Error::UnsupportedStructure("slice generators must be transpositions".into())
            })
        })
        .collect()
}

/// Recover the basis numerically: refine eigenblocks of the prefix
/// operators until one-dimensional, then label each vector by matching its
/// prefix-eigenvalue sequence against the admissible top sets.
pub fn build_basis_joint(n: usize, k: usize) -> Result<SliceBasis> {
    let space = build_slice(n, k)?;
    let n_states = space.n_states;
    if n_states > tolerances::DENSE_EIGEN_LIMIT {
        return Err(Error::BudgetExceeded {
            needed: n_states as u128,
            budget: tolerances::DENSE_EIGEN_LIMIT,
        });
    }
    let pairs = transposition_pairs(&space)?;

    // orthonormal seed basis for L²(μ), μ uniform: scaled indicators
    let scale = (n_states as f64).sqrt();
    let mut blocks: Vec<Vec<FunctionTable>> = vec![(0..n_states)
        .map(|r| {
            let mut v = vec![0.0; n_states];
            v[r] = scale;
            v
        })
        .collect()];

    for kk in 2..=n {
        let mut next = Vec::new();
        for block in blocks {
            if block.len() == 1 {
                next.push(block);
                continue;
            }
            let d = block.len();
            let images: Vec<Vec<f64>> = block
                .iter()
                .map(|v| prefix_operator(&space, &pairs, kk, v))
                .collect::<Result<_>>()?;
            let mut gram = vec![0.0; d * d];
            for i in 0..d {
                for j in 0..d {
                    gram[i * d + j] = space.inner(&block[i], &images[j]);
                }
            }
            let eig = linalg::symmetric_eigen(&gram, d);
            let rotated: Vec<FunctionTable> = (0..d)
                .map(|m| {
                    let mut w = vec![0.0; n_states];
                    for (j, v) in block.iter().enumerate() {
                        let c = eig.vectors[m][j];
                        for (wx, vx) in w.iter_mut().zip(v) {
                            *wx += c * vx;
                        }
                    }
                    w
                })
                .collect();
            // split where consecutive prefix eigenvalues separate
            let mut start = 0;
            for m in 1..=d {
                if m == d || eig.values[m] - eig.values[m - 1] > 1e-6 {
                    next.push(rotated[start..m].to_vec());
                    start = m;
                }
            }
        }
        blocks = next;
    }

    let mut vectors = Vec::with_capacity(n_states);
    for block in blocks {
        if block.len() != 1 {
            return Err(Error::BasisConstruction(
                "joint diagonalization left a degenerate eigenblock".into(),
            ));
        }
        vectors.push(block.into_iter().next().expect("checked length"));
    }

    // normalize and fix signs deterministically
    for v in vectors.iter_mut() {
        let norm = space.l2_norm_sq(v).sqrt();
        if norm <= 0.0 {
            return Err(Error::BasisConstruction(
                "joint diagonalization produced a null vector".into(),
            ));
        }
        let lead = v
            .iter()
            .cloned()
            .max_by(|a, b| a.abs().partial_cmp(&b.abs()).expect("finite entries"))
            .unwrap_or(1.0);
        let sign = if lead < 0.0 { -1.0 } else { 1.0 };
        for x in v.iter_mut() {
            *x *= sign / norm;
        }
    }

    // label by the sequence of prefix-influence eigenvalues; the weight
    // 2c(k+1-c)/k is forced by the full-walk eigenvalue at k = n
    let tops = top_sets(n, k.min(n - k));
    let expected: Vec<Vec<f64>> = tops
        .iter()
        .map(|b| {
            (1..=n)
                .map(|kk| {
                    let c = b.prefix_count(kk) as f64;
                    2.0 * c * (kk as f64 + 1.0 - c) / kk as f64
                })
                .collect()
        })
        .collect();
    let mut used = vec![false; tops.len()];
    let mut matched: Vec<(usize, FunctionTable)> = Vec::with_capacity(n_states);
    for v in vectors {
        let seq: Vec<f64> = (1..=n)
            .map(|kk| {
                let image = prefix_operator(&space, &pairs, kk, &v)?;
                Ok(space.inner(&v, &image))
            })
            .collect::<Result<_>>()?;
        let mut best = usize::MAX;
        let mut best_dist = f64::INFINITY;
        for (idx, exp) in expected.iter().enumerate() {
            if used[idx] {
                continue;
            }
            let dist = exp
                .iter()
                .zip(&seq)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if dist < best_dist {
                best_dist = dist;
                best = idx;
            }
        }
        if best == usize::MAX || best_dist > 1e-6 {
            return Err(Error::BasisConstruction(format!(
                "no top set matches a recovered eigenvector (best distance {best_dist:.3e})"
            )));
        }
        used[best] = true;
        matched.push((best, v));
    }
    matched.sort_by_key(|(idx, _)| *idx);

    let entries: Vec<BasisEntry> = matched
        .into_iter()
        .map(|(idx, table)| {
            let norm_sq = space.l2_norm_sq(&table);
            BasisEntry {
                top: tops[idx].clone(),
                eigenvalue: eigenvalue_of(&tops[idx], n),
                table,
                norm_sq,
            }
        })
        .collect();
    let basis = SliceBasis {
        n,
        k,
        entries,
        path: BasisPath::JointDiagonalization,
    };
    validate_basis(&space, &basis)?;
    Ok(basis)
}

/// Build the slice basis: explicit construction first, falling back to
/// joint diagonalization if the explicit result fails validation. Both
/// paths face identical validation; `path` records which one succeeded.
pub fn build_basis(n: usize, k: usize) -> Result<SliceBasis> {
    match build_basis_explicit(n, k) {
        Ok(basis) => Ok(basis),
        Err(Error::InvalidParameter(msg)) => Err(Error::InvalidParameter(msg)),
        Err(Error::BudgetExceeded { needed, budget }) => {
            Err(Error::BudgetExceeded { needed, budget })
        }
        Err(_) => build_basis_joint(n, k),
    }
}

/// Check every basis invariant; the first violated one is named in the
/// error. Tolerances are absolute below scale one and relative above.
fn validate_basis(space: &MarkovSpace, basis: &SliceBasis) -> Result<()> {
    let expected = binomial(basis.n, basis.k);
    if basis.entries.len() as u128 != expected {
        return Err(Error::BasisConstruction(format!(
            "basis has {} vectors, slice dimension is {}",
            basis.entries.len(),
            expected
        )));
    }
    for e in &basis.entries {
        if e.table.len() != space.n_states {
            return Err(Error::BasisConstruction(format!(
                "basis vector for {} has {} values, slice has {} states",
                e.top.render(),
                e.table.len(),
                space.n_states
            )));
        }
        if !e.top.admissible() {
            return Err(Error::BasisConstruction(format!(
                "top set {} violates the admissibility constraint",
                e.top.render()
            )));
        }
        if e.norm_sq <= 0.0 {
            return Err(Error::BasisConstruction(format!(
                "basis vector for {} is null",
                e.top.render()
            )));
        }
    }
    let constant = basis
        .entries
        .iter()
        .find(|e| e.top.degree() == 0)
        .ok_or_else(|| Error::BasisConstruction("no degree-zero basis vector".into()))?;
    if (constant.norm_sq - 1.0).abs() > 1e-9 {
        return Err(Error::BasisConstruction(format!(
            "constant vector has squared norm {}, expected 1",
            constant.norm_sq
        )));
    }

    for (i, a) in basis.entries.iter().enumerate() {
        for b in basis.entries.iter().skip(i + 1) {
            let ip = space.inner(&a.table, &b.table);
            let scale = (a.norm_sq * b.norm_sq).sqrt().max(1.0);
            if ip.abs() > 1e-9 * scale {
                return Err(Error::BasisConstruction(format!(
                    "vectors for {} and {} are not orthogonal (inner product {ip:.3e})",
                    a.top.render(),
                    b.top.render()
                )));
            }
        }
    }

    let gen = semigroup::generator(space);
    for e in &basis.entries {
        let lchi = gen.apply(&e.table)?;
        let sup = e.table.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        for (lv, cv) in lchi.iter().zip(&e.table) {
            // generator sign: -L χ = λ χ
            if (-lv - e.eigenvalue * cv).abs() > 1e-9 * sup {
                return Err(Error::BasisConstruction(format!(
                    "vector for {} misses its eigenvalue {}",
                    e.top.render(),
                    e.eigenvalue
                )));
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_ba51);
    for _ in 0..2 {
        let f: Vec<f64> = (0..space.n_states)
            .map(|_| rng.gen::<f64>() * 2.0 - 1.0)
            .collect();
        let coeffs = fourier_expand(basis, &f)?;
        let recon = reconstruct(basis, &coeffs)?;
        let diff: Vec<f64> = f.iter().zip(&recon).map(|(a, b)| a - b).collect();
        if space.l2_norm_sq(&diff).sqrt() > 1e-8 {
            return Err(Error::BasisConstruction(
                "random function fails to reconstruct from its coefficients".into(),
            ));
        }
        let parseval: f64 = coeffs
            .iter()
            .zip(&basis.entries)
            .map(|(c, e)| c * c * e.norm_sq)
            .sum();
        let norm = space.l2_norm_sq(&f);
        if (parseval - norm).abs() > 1e-9 * norm.max(1.0) {
            return Err(Error::BasisConstruction(format!(
                "coefficient mass {parseval} does not match the squared norm {norm}"
            )));
        }
    }
    Ok(())
}

/// Coefficients f̂(B) = ⟨f, χ_B⟩ / ‖χ_B‖₂², in basis entry order. The slice
/// measure is uniform, so inner products are plain averages.
pub fn fourier_expand(basis: &SliceBasis, f: &[f64]) -> Result<Vec<f64>> {
    let n_states = basis.n_states();
    if f.len() != n_states {
        return Err(Error::DimensionMismatch {
            expected: n_states,
            got: f.len(),
        });
    }
    Ok(basis
        .entries
        .iter()
        .map(|e| {
            let ip: f64 = f.iter().zip(&e.table).map(|(a, b)| a * b).sum::<f64>() / n_states as f64;
            ip / e.norm_sq
        })
        .collect())
}

/// Σ coeff_B · χ_B.
pub fn reconstruct(basis: &SliceBasis, coeffs: &[f64]) -> Result<FunctionTable> {
    if coeffs.len() != basis.entries.len() {
        return Err(Error::DimensionMismatch {
            expected: basis.entries.len(),
            got: coeffs.len(),
        });
    }
    let n_states = basis.n_states();
    let mut out = vec![0.0; n_states];
    for (c, e) in coeffs.iter().zip(&basis.entries) {
        for (o, v) in out.iter_mut().zip(&e.table) {
            *o += c * v;
        }
    }
    Ok(out)
}

/// Prefix influence two ways: combinatorially as (1/k) Σ_{i<j<=k} ‖D_τ f‖₂²
/// and spectrally as Σ_B 2|B∩[k]|(k+1-|B∩[k]|)/k · f̂(B)²‖χ_B‖₂². The
/// factor 2 in the weight is forced by consistency with the walk
/// eigenvalues at the full prefix k = n. The two sides agree exactly for
/// every real function; the squared norm also equals the L¹ influence
/// whenever the derivatives take values in {-1, 0, 1}.
pub fn influence_identity_check(
    basis: &SliceBasis,
    space: &MarkovSpace,
    f: &[f64],
    k_prefix: usize,
) -> Result<TwoSidedReport> {
    require_slice(space, basis)?;
    space.check_table(f)?;
    if k_prefix == 0 || k_prefix > basis.n {
        return Err(Error::InvalidParameter(format!(
            "prefix size must lie in 1..={}, got {k_prefix}",
            basis.n
        )));
    }
    let pairs = transposition_pairs(space)?;
    let mut combinatorial = 0.0;
    for (s, &(i, j)) in pairs.iter().enumerate() {
        if i < k_prefix && j < k_prefix {
            let d = space.generator_difference(f, s)?;
            combinatorial += space.l2_norm_sq(&d);
        }
    }
    combinatorial /= k_prefix as f64;

    let coeffs = fourier_expand(basis, f)?;
    let spectral: f64 = coeffs
        .iter()
        .zip(&basis.entries)
        .map(|(c, e)| {
            let bc = e.top.prefix_count(k_prefix) as f64;
            let weight = 2.0 * bc * (k_prefix as f64 + 1.0 - bc) / k_prefix as f64;
            weight * c * c * e.norm_sq
        })
        .sum();
    Ok(TwoSidedReport::equality(
        "influence-identity",
        combinatorial,
        spectral,
        1e-8,
    ))
}

/// The rescaled slice semigroup H_t, i.e. the walk run to time (n-1)t/2;
/// each basis vector then decays by exp(-t·|B|(n+1-|B|)/n).
pub fn rescaled_evolve(gen: &Generator, f: &[f64], t: f64) -> Result<FunctionTable> {
    let n = match gen.space.kind {
        SpaceKind::Slice { n, .. } => n,
        _ => {
            return Err(Error::UnsupportedStructure(
                "the rescaled semigroup lives on a slice".into(),
            ))
        }
    };
    if t < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "time must be nonnegative, got {t}"
        )));
    }
    semigroup::evolve(gen, f, (n as f64 - 1.0) * t / 2.0)
}

/// The spectral bound ‖H_t f − Π_T H_t f‖₂² ≤ Inf^{(n−m)}(H_t f) with T the
/// permutations of the first n−m coordinates. The left side comes from the
/// basis expansion restricted to top sets meeting the first n−m
/// coordinates; the right side is the prefix influence of the evolved
/// function.
pub fn inequality10_check(
    basis: &SliceBasis,
    space: &MarkovSpace,
    f: &[f64],
    t: f64,
    m: usize,
) -> Result<TwoSidedReport> {
    require_slice(space, basis)?;
    space.check_table(f)?;
    if t < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "time must be nonnegative, got {t}"
        )));
    }
    if m >= basis.n {
        return Err(Error::InvalidParameter(format!(
            "kept-coordinate count must be below n={}, got {m}",
            basis.n
        )));
    }
    let n = basis.n;
    let n_minus_m = n - m;
    let coeffs = fourier_expand(basis, f)?;
    let decayed: Vec<f64> = coeffs
        .iter()
        .zip(&basis.entries)
        .map(|(c, e)| {
            let d = e.top.degree() as f64;
            c * (-t * d * (n as f64 + 1.0 - d) / n as f64).exp()
        })
        .collect();
    let left: f64 = decayed
        .iter()
        .zip(&basis.entries)
        .filter(|(_, e)| e.top.prefix_count(n_minus_m) > 0)
        .map(|(c, e)| c * c * e.norm_sq)
        .sum();

    let evolved = reconstruct(basis, &decayed)?;
    let pairs = transposition_pairs(space)?;
    let mut right = 0.0;
    for (s, &(i, j)) in pairs.iter().enumerate() {
        if i < n_minus_m && j < n_minus_m {
            let d = space.generator_difference(&evolved, s)?;
            right += space.l2_norm_sq(&d);
        }
    }
    right /= n_minus_m as f64;
    Ok(TwoSidedReport::new(
        "inequality-10",
        left,
        right,
        tolerances::SLACK,
    ))
}

/// Hypercontractive step for one transposition: ‖D_τ(H_t f)‖₂² against
/// ‖D_τ f‖², with the norm exponent 1 + e^{-ρ_H t} taken for the rescaled
/// semigroup's constant ρ_H = (n-1)/2 · ρ. The stated exponent is slightly
/// weaker than the sharp 1 + e^{-2ρ_H t}, so a valid ρ keeps the check
/// sound.
pub fn hyperbool_check(
    gen: &Generator,
    rho: f64,
    f: &[f64],
    s: usize,
    t: f64,
) -> Result<TwoSidedReport> {
    let n = match gen.space.kind {
        SpaceKind::Slice { n, .. } => n,
        _ => {
            return Err(Error::UnsupportedStructure(
                "the hypercontractive step check lives on a slice".into(),
            ))
        }
    };
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "log-Sobolev constant must be positive, got {rho}"
        )));
    }
    if t < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "time must be nonnegative, got {t}"
        )));
    }
    let d = gen.space.generator_difference(f, s)?;
    let evolved = rescaled_evolve(gen, &d, t)?;
    let left = gen.space.l2_norm_sq(&evolved);
    let rho_h = rho * (n as f64 - 1.0) / 2.0;
    let p = 1.0 + (-rho_h * t).exp();
    let rhs_norm = semigroup::lp_norm(gen.space, &d, p)?;
    Ok(TwoSidedReport::new(
        "hyperbool",
        left,
        rhs_norm * rhs_norm,
        tolerances::SLACK,
    ))
}

/// Commutation of derivatives with the rescaled semigroup:
/// D_τ H_t f = H_t D_τ f within 1e-10.
pub fn commutation_check(gen: &Generator, f: &[f64], s: usize, t: f64) -> Result<TwoSidedReport> {
    let evolved = rescaled_evolve(gen, f, t)?;
    let a = gen.space.generator_difference(&evolved, s)?;
    let d = gen.space.generator_difference(f, s)?;
    let b = rescaled_evolve(gen, &d, t)?;
    let max_diff = a
        .iter()
        .zip(&b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    Ok(TwoSidedReport::new("slice-commutation", max_diff, 0.0, 1e-10))
}

/// Junta extraction on a slice: normalize to unit derivative sup-norm, pick
/// t = ε/(2·Inf), start the pair-influence threshold η at the larger of the
/// solved value (ε/(4·Inf))^{2/α(t)} and the top pair influence, grow the
/// kept vertex set greedily, and average over permutations of the
/// complement. On a miss η descends to the next distinct influence level
/// below it, ending at 0. Success means ‖f − g‖₁ ≤ ε on the original scale;
/// each round also verifies the certified two-piece bound
/// √‖f̃ − g̃‖₂² ≤ √(Bakry term) + √(threshold term).
pub fn slice_extract_junta(
    space: &MarkovSpace,
    gen: &Generator,
    rho: f64,
    f: &[f64],
    eps: f64,
) -> Result<(FunctionTable, JuntaCertificate)> {
    let n = match space.kind {
        SpaceKind::Slice { n, .. } => n,
        _ => {
            return Err(Error::UnsupportedStructure(
                "slice junta extraction needs a slice space".into(),
            ))
        }
    };
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "target eps must lie in (0,1), got {eps}"
        )));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "log-Sobolev constant must be positive, got {rho}"
        )));
    }
    space.check_table(f)?;
    // the hypercontractive step runs under the rescaled semigroup, whose
    // log-Sobolev constant is (n-1)/2 times the walk's
    let rho_h = rho * (n as f64 - 1.0) / 2.0;
    let profile = influence::influence_profile(space, f)?;
    let scale = profile.max_sup_norm();
    if scale <= tolerances::ZERO_INFLUENCE {
        let t = eps / 2.0;
        let alpha = junta::alpha_exponent(rho_h, t);
        let cert = JuntaCertificate {
            kept_set: Vec::new(),
            eta: 0.0,
            t,
            alpha,
            bound_la: 0.0,
            bound_bakry: 0.0,
            measured_error: 0.0,
            epsilon: eps,
            retries: 0,
            slice_c: Some(alpha / (2.0 * eps)),
            strict_convexity: None,
        };
        return Ok((f.to_vec(), cert));
    }
    let scaled: Vec<f64> = f.iter().map(|v| v / scale).collect();
    let scaled_profile = influence::influence_profile(space, &scaled)?;
    let total = scaled_profile.total;
    let total_eff = total.max(1.0);
    let t = eps / (2.0 * total_eff);
    let alpha = junta::alpha_exponent(rho_h, t);
    let slice_c = alpha / (2.0 * eps);
    // the solved η guarantees the hypercontractive bound but underflows to
    // 0 as 2/α blows up; the loop measures the realized error directly, so
    // descending from the top influence finds the smallest kept set
    let eta_theory = {
        let e = (eps / (4.0 * total_eff)).powf(2.0 / alpha);
        if e.is_finite() {
            e
        } else {
            0.0
        }
    };
    let max_influence = scaled_profile
        .influences
        .iter()
        .cloned()
        .fold(0.0f64, f64::max);
    let mut eta = eta_theory.max(max_influence);
    // Bakry piece for the rescaled semigroup: ‖f − H_t f‖₂² ≤ (n−1)t/2 · 𝓔
    let energy = {
        let lf = gen.apply(&scaled)?;
        -space.inner(&scaled, &lf)
    };
    let bound_bakry = (n as f64 - 1.0) * t / 2.0 * energy;

    let mut best: Option<(f64, Vec<f64>, Vec<usize>, f64)> = None;
    let mut rounds = 0;
    for retry in 0..=junta::MAX_RETRIES {
        rounds = retry;
        let (s_set, t_set) = junta::slice_low_influence(&scaled_profile, eta, n)?;
        let averaged = n - s_set.len();
        let projected = junta::average_out(space, &scaled, &t_set)?;
        let diff_scaled: Vec<f64> = scaled.iter().zip(&projected).map(|(a, b)| a - b).collect();
        let measured_scaled = space.l2_norm_sq(&diff_scaled);
        let bound_la = if averaged == 0 {
            0.0
        } else {
            (n as f64 / averaged as f64) * eta.powf(alpha) * total
        };
        if measured_scaled.sqrt() > bound_bakry.sqrt() + bound_la.sqrt() + tolerances::SLACK {
            return Err(Error::Precondition(format!(
                "measured distance {measured_scaled:.6e} exceeds the certified bound; \
                 is the supplied log-Sobolev constant valid?"
            )));
        }
        let g: Vec<f64> = projected.iter().map(|v| v * scale).collect();
        let diff: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a - b).collect();
        let measured = space.l1_norm(&diff);
        if best.as_ref().map_or(true, |(m, ..)| measured < *m) {
            best = Some((measured, g.clone(), s_set.clone(), eta));
        }
        if measured <= eps {
            let cert = JuntaCertificate {
                kept_set: s_set,
                eta,
                t,
                alpha,
                bound_la,
                bound_bakry,
                measured_error: measured,
                epsilon: eps,
                retries: retry,
                slice_c: Some(slice_c),
                strict_convexity: None,
            };
            return Ok((g, cert));
        }
        if eta == 0.0 {
            // the zero-influence set already failed; nothing lower exists
            break;
        }
        // step straight past empty threshold gaps so every retry changes T
        let next_below = scaled_profile
            .influences
            .iter()
            .cloned()
            .filter(|&v| v < eta)
            .fold(0.0f64, f64::max);
        eta = (eta / 2.0).min(next_below);
        if eta < 1e-300 {
            eta = 0.0;
        }
    }
    let (measured, candidate, kept_set, _) = best.expect("loop ran at least once");
    Err(Error::ExtractionFailed(Box::new(
        crate::error::FailedExtraction {
            candidate,
            kept_set,
            measured,
            target: eps,
            retries: rounds,
        },
    )))
}

/// Dimensionless hypercontractivity scaling on slices: ρ · n · log ω with
/// ω = n²/(k(n−k)). Order-of-magnitude diagnostics only; nothing is
/// asserted.
#[derive(Debug, Clone)]
pub struct LeeYauReport {
    pub n: usize,
    pub k: usize,
    pub omega: f64,
    pub rho: f64,
    /// ρ · n · log ω.
    pub product: f64,
}

impl LeeYauReport {
    pub fn render(&self) -> String {
        format!(
            "lee-yau n={} k={} omega={:.12e} rho={:.12e} rho_n_log_omega={:.12e}",
            self.n, self.k, self.omega, self.rho, self.product
        )
    }
}

pub fn lee_yau_report(n: usize, k: usize, rho: f64) -> Result<LeeYauReport> {
    if n < 2 || k == 0 || k >= n {
        return Err(Error::InvalidParameter(format!(
            "slice ratio needs 1 <= k < n, got n={n} k={k}"
        )));
    }
    let omega = (n * n) as f64 / (k * (n - k)) as f64;
    Ok(LeeYauReport {
        n,
        k,
        omega,
        rho,
        product: rho * n as f64 * omega.ln(),
    })
}

/// Structured text export: one row per basis vector with its top set,
/// eigenvalue, squared norm, and values in state-rank order.
pub fn render_basis(basis: &SliceBasis) -> String {
    let mut out = format!(
        "n={} k={} path={} count={}\n",
        basis.n,
        basis.k,
        basis.path.as_str(),
        basis.entries.len()
    );
    for e in &basis.entries {
        let values: Vec<String> = e.table.iter().map(|v| format!("{v:.12e}")).collect();
        out.push_str(&format!(
            "top_set={} eigenvalue={:.12e} norm_sq={:.12e} values={}\n",
            e.top.render(),
            e.eigenvalue,
            e.norm_sq,
            values.join(",")
        ));
    }
    out
}

fn require_slice(space: &MarkovSpace, basis: &SliceBasis) -> Result<()> {
    match space.kind {
        SpaceKind::Slice { n, k } if n == basis.n && k == basis.k => Ok(()),
        SpaceKind::Slice { n, k } => Err(Error::InvalidParameter(format!(
            "basis is for the ({}, {}) slice, space is ({n}, {k})",
            basis.n, basis.k
        ))),
        _ => Err(Error::UnsupportedStructure(
            "slice basis operations need a slice space".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions;
    use crate::semigroup::generator;

    fn top(elements: &[usize]) -> TopSet {
        TopSet {
            elements: elements.to_vec(),
        }
    }

    #[test]
    fn eigenvalue_formula_examples() {
        assert_eq!(eigenvalue_of(&TopSet::empty(), 6), 0.0);
        assert!((eigenvalue_of(&top(&[1]), 4) - 2.0 / 3.0).abs() < 1e-15);
        assert!((eigenvalue_of(&top(&[1, 3]), 5) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn dense_spectrum_matches_the_multiset() {
        for (n, k) in [(4, 2), (5, 2), (6, 3)] {
            let space = build_slice(n, k).unwrap();
            let rep = spectrum_check(&space).unwrap();
            assert!(rep.pass(), "(n,k)=({n},{k}): worst {}", rep.left);
        }
        let cube = crate::spaces::build_biased_cube(2, 0.5).unwrap();
        assert!(matches!(
            spectrum_check(&cube),
            Err(Error::UnsupportedStructure(_))
        ));
    }

    #[test]
    fn top_set_counts_match_slice_dimensions() {
        for (n, k) in [(2, 1), (4, 2), (5, 2), (6, 3), (7, 3), (8, 4)] {
            let tops = top_sets(n, k.min(n - k));
            assert_eq!(tops.len() as u128, binomial(n, k), "({n},{k})");
            for t in &tops {
                assert!(t.admissible());
            }
            // per-degree counts follow the multiplicity rule
            for (value, mult) in eigenvalue_multiset(n, k) {
                let count = tops
                    .iter()
                    .filter(|t| (eigenvalue_of(t, n) - value).abs() < 1e-12)
                    .count();
                assert_eq!(count, mult);
            }
        }
    }

    #[test]
    fn explicit_basis_builds_and_validates() {
        let basis = build_basis(4, 2).unwrap();
        assert_eq!(basis.path, BasisPath::Explicit);
        assert_eq!(basis.entries.len(), 6);
        let constant = &basis.entries[0];
        assert_eq!(constant.top.degree(), 0);
        assert!((constant.norm_sq - 1.0).abs() < 1e-12);
    }

    #[test]
    fn basis_eigenvalues_match_the_dense_solve() {
        // the slice walk's spectrum is the oracle for the formula values
        let space = build_slice(4, 2).unwrap();
        let gen = generator(&space);
        let spec = gen.spectral().unwrap();
        let mut from_basis: Vec<f64> = build_basis(4, 2)
            .unwrap()
            .entries
            .iter()
            .map(|e| e.eigenvalue)
            .collect();
        from_basis.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in from_basis.iter().zip(&spec.eigenvalues) {
            assert!((a - b).abs() < 1e-8, "basis {a} vs solver {b}");
        }
        // multiset: 0 once, 2/3 three times, 1 twice
        assert!((from_basis[0]).abs() < 1e-12);
        for v in &from_basis[1..4] {
            assert!((v - 2.0 / 3.0).abs() < 1e-12);
        }
        for v in &from_basis[4..] {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fourier_roundtrip_and_parseval() {
        let space = build_slice(5, 2).unwrap();
        let basis = build_basis(5, 2).unwrap();
        let f = functions::random_table(&space, 3);
        let coeffs = fourier_expand(&basis, &f).unwrap();
        let recon = reconstruct(&basis, &coeffs).unwrap();
        let diff: Vec<f64> = f.iter().zip(&recon).map(|(a, b)| a - b).collect();
        assert!(space.l2_norm_sq(&diff).sqrt() < 1e-9);
        let parseval: f64 = coeffs
            .iter()
            .zip(&basis.entries)
            .map(|(c, e)| c * c * e.norm_sq)
            .sum();
        assert!((parseval - space.l2_norm_sq(&f)).abs() < 1e-9);

        // a basis vector expands to a unit coefficient
        let coeffs = fourier_expand(&basis, &basis.entries[2].table).unwrap();
        for (i, c) in coeffs.iter().enumerate() {
            let expect = if i == 2 { 1.0 } else { 0.0 };
            assert!((c - expect).abs() < 1e-9);
        }

        // constants live on the empty top set
        let coeffs = fourier_expand(&basis, &vec![2.5; space.n_states]).unwrap();
        assert!((coeffs[0] - 2.5).abs() < 1e-12);
        for c in &coeffs[1..] {
            assert!(c.abs() < 1e-12);
        }
    }

    #[test]
    fn influence_identity_holds() {
        let space = build_slice(4, 2).unwrap();
        let basis = build_basis(4, 2).unwrap();
        let f = functions::random_table(&space, 9);
        for k in 1..=4 {
            let rep = influence_identity_check(&basis, &space, &f, k).unwrap();
            assert!(rep.pass(), "prefix {k}: {}", rep.render_row());
        }
        // constant functions have zero influence on both sides
        let rep =
            influence_identity_check(&basis, &space, &vec![1.0; space.n_states], 4).unwrap();
        assert_eq!(rep.left, 0.0);
        assert_eq!(rep.right, 0.0);

        // a 0/1 function has unit-valued derivatives, so the full-prefix
        // value also equals the module's L1 total
        let indicator: Vec<f64> = (0..space.n_states)
            .map(|r| space.digits_of(r)[0] as f64)
            .collect();
        let rep = influence_identity_check(&basis, &space, &indicator, 4).unwrap();
        let l1_total = influence::slice_total_influence(&space, &indicator, None).unwrap();
        assert!(rep.pass());
        assert!((rep.left - l1_total).abs() < 1e-12);
    }

    #[test]
    fn rescaled_evolution_decays_basis_vectors() {
        let space = build_slice(4, 2).unwrap();
        let gen = generator(&space);
        let basis = build_basis(4, 2).unwrap();
        for e in &basis.entries {
            let id = rescaled_evolve(&gen, &e.table, 0.0).unwrap();
            for (a, b) in id.iter().zip(&e.table) {
                assert!((a - b).abs() < 1e-12);
            }
            let t = 1.0;
            let evolved = rescaled_evolve(&gen, &e.table, t).unwrap();
            let d = e.top.degree() as f64;
            let decay = (-t * d * (4.0 + 1.0 - d) / 4.0).exp();
            for (a, b) in evolved.iter().zip(&e.table) {
                assert!((a - decay * b).abs() < 1e-9, "degree {d}");
            }
        }
        // a degree-one vector at t=1 contracts by exactly e^{-1}
        let deg1 = basis.entries.iter().find(|e| e.top.degree() == 1).unwrap();
        let evolved = rescaled_evolve(&gen, &deg1.table, 1.0).unwrap();
        let at = deg1
            .table
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let ratio = evolved[at] / deg1.table[at];
        assert!((ratio - (-1.0f64).exp()).abs() < 1e-9);

        // long time: everything collapses to the mean
        let f = functions::random_table(&space, 5);
        let far = rescaled_evolve(&gen, &f, 80.0).unwrap();
        let mean = space.mean(&f);
        for v in &far {
            assert!((v - mean).abs() < 1e-9);
        }
    }

    #[test]
    fn inequality10_examples() {
        let space = build_slice(5, 2).unwrap();
        let basis = build_basis(5, 2).unwrap();

        let rep =
            inequality10_check(&basis, &space, &vec![3.0; space.n_states], 0.5, 2).unwrap();
        assert_eq!(rep.left, 0.0);
        assert!(rep.pass());

        let f = functions::random_table(&space, 17);
        let rep = inequality10_check(&basis, &space, &f, 0.3, 2).unwrap();
        assert!(rep.pass(), "{}", rep.render_row());

        // top sets inside the last m coordinates contribute nothing
        let space4 = build_slice(4, 2).unwrap();
        let basis4 = build_basis(4, 2).unwrap();
        let tail = basis4
            .entries
            .iter()
            .find(|e| e.top.degree() > 0 && e.top.prefix_count(2) == 0)
            .expect("a top set inside the last two coordinates");
        let rep = inequality10_check(&basis4, &space4, &tail.table, 0.0, 2).unwrap();
        assert!(rep.left.abs() < 1e-12);
        assert!(rep.pass());
    }

    #[test]
    fn hyperbool_and_commutation() {
        let space = build_slice(4, 2).unwrap();
        let gen = generator(&space);
        let rho = semigroup::certified_lsi_floor(&gen).unwrap();
        let f = functions::random_table(&space, 23);
        let n_gens = space.schreier().unwrap().maps.len();
        for s in 0..n_gens {
            for t in [0.0, 0.2, 1.0] {
                let rep = hyperbool_check(&gen, rho, &f, s, t).unwrap();
                assert!(rep.pass(), "gen {s} t {t}: {}", rep.render_row());
                let rep = commutation_check(&gen, &f, s, t).unwrap();
                assert!(rep.pass(), "gen {s} t {t}: {}", rep.render_row());
            }
        }
    }

    #[test]
    fn extracts_a_one_coordinate_slice_junta() {
        let space = build_slice(5, 2).unwrap();
        let gen = generator(&space);
        let rho = semigroup::certified_lsi_floor(&gen).unwrap();
        let f = functions::dictator(&space).unwrap();
        let (g, cert) = slice_extract_junta(&space, &gen, rho, &f, 0.4).unwrap();
        assert!(cert.measured_error <= 0.4);
        assert!(cert.kept_set.contains(&0));
        assert!(cert.slice_c.is_some());
        // the output depends only on the kept vertex
        let diff: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a - b).collect();
        assert!(space.l1_norm(&diff) <= 0.4);
    }

    #[test]
    fn extraction_keeps_a_planted_pair() {
        let space = build_slice(6, 3).unwrap();
        let gen = generator(&space);
        let rho = semigroup::certified_lsi_floor(&gen).unwrap();
        // depends exactly on the occupancy of the first two coordinates
        let f: Vec<f64> = (0..space.n_states)
            .map(|r| {
                let d = space.digits_of(r);
                (d[0] * d[1]) as f64
            })
            .collect();
        let (g, cert) = slice_extract_junta(&space, &gen, rho, &f, 0.3).unwrap();
        assert!(cert.kept_set.contains(&0) && cert.kept_set.contains(&1));
        assert!(cert.measured_error < 1e-12);
        for (a, b) in f.iter().zip(&g) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_functions_extract_to_nothing() {
        let space = build_slice(4, 2).unwrap();
        let gen = generator(&space);
        let f = vec![7.0; space.n_states];
        let (g, cert) = slice_extract_junta(&space, &gen, 1.0, &f, 0.2).unwrap();
        assert!(cert.kept_set.is_empty());
        assert_eq!(cert.measured_error, 0.0);
        assert_eq!(g, f);
    }

    #[test]
    fn slice_ratio_reports() {
        let r = lee_yau_report(4, 2, 0.5).unwrap();
        assert!((r.omega - 4.0).abs() < 1e-15);
        let r = lee_yau_report(6, 3, 0.5).unwrap();
        assert!((r.omega - 4.0).abs() < 1e-15);
        assert!((r.product - 0.5 * 6.0 * 4.0f64.ln()).abs() < 1e-12);
        let r = lee_yau_report(8, 2, 1.0).unwrap();
        assert!((r.omega - 64.0 / 12.0).abs() < 1e-12);
        assert!(lee_yau_report(4, 0, 1.0).is_err());
        assert!(lee_yau_report(4, 4, 1.0).is_err());
    }

    #[test]
    fn joint_diagonalization_recovers_the_same_basis() {
        let explicit = build_basis_explicit(4, 2).unwrap();
        let joint = build_basis_joint(4, 2).unwrap();
        assert_eq!(joint.path, BasisPath::JointDiagonalization);
        assert_eq!(joint.entries.len(), explicit.entries.len());
        for (e, j) in explicit.entries.iter().zip(&joint.entries) {
            assert_eq!(e.top, j.top);
            // the joint vector is a scalar multiple of the explicit one
            let coeffs = fourier_expand(&explicit, &j.table).unwrap();
            for (idx, c) in coeffs.iter().enumerate() {
                let mass = c * c * explicit.entries[idx].norm_sq;
                if explicit.entries[idx].top == j.top {
                    assert!((mass - j.norm_sq).abs() < 1e-8);
                } else {
                    assert!(mass < 1e-12, "leakage onto {}", explicit.entries[idx].top.render());
                }
            }
        }
    }

    #[test]
    fn basis_export_is_structured() {
        let basis = build_basis(4, 2).unwrap();
        let text = render_basis(&basis);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 7);
        assert_eq!(lines[0], "n=4 k=2 path=explicit count=6");
        assert!(lines[1].starts_with("top_set={} eigenvalue=0.000000000000e0"));
        assert!(text.contains("top_set={2,4}"));
        // re-render is byte-identical
        assert_eq!(text, render_basis(&basis));
    }

    #[test]
    fn expansion_rejects_wrong_lengths() {
        let basis = build_basis(4, 2).unwrap();
        assert!(matches!(
            fourier_expand(&basis, &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            reconstruct(&basis, &[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
