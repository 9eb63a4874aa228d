//! The junta extraction pipeline: averaging projections Π_T, the
//! reverse-martingale decomposition, the low-influence/short-time lemma
//! checkers, the extraction schedule, and Boolean rounding.
//!
//! Extraction picks a semigroup time t from (ε, ρ, I(f)) alone, then walks
//! an influence threshold η down from the largest influence, averaging out
//! the directions at or below η and measuring the actual error at each stop.
//! Failed stops descend to the next distinct influence level, so every
//! retry changes the kept set; the certificate records the realized
//! schedule, never the chased constants.

use crate::error::{Error, FailedExtraction, Result};
use crate::influence::{self, InfluenceProfile};
use crate::report::{MartingaleReport, TwoSidedReport};
use crate::semigroup::{self, Generator};
use crate::spaces::{MarkovSpace, SpaceKind, Structure};
use crate::tolerances;

/// Norm in which an extraction error is measured and certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorNorm {
    L2,
    L1,
}

/// Realized schedule and measured outcome of one junta extraction.
#[derive(Debug, Clone)]
pub struct JuntaCertificate {
    /// Directions the output may still depend on (complement of T),
    /// 0-indexed coordinates or generator indices.
    pub kept_set: Vec<usize>,
    pub eta: f64,
    pub t: f64,
    /// (1 − e^{−2ρt})/(1 + e^{−2ρt}), stored exactly as used.
    pub alpha: f64,
    /// Low-influence bound at the realized η: I(f)·η^α for the L² pipeline,
    /// (1/√(ρt))·η^{α/2}·‖f‖₂^{1−α}·I(f) for the continuous L¹ one.
    pub bound_la: f64,
    /// Short-time bound: t·𝓔(f,f) in L², 4√t·I(f) in the continuous L¹
    /// pipeline.
    pub bound_bakry: f64,
    pub measured_error: f64,
    pub epsilon: f64,
    pub retries: u32,
    /// Slice pipeline only: the realized exponent constant α(t)/(2ε).
    pub slice_c: Option<f64>,
    /// Continuous pipeline only: declared strict-convexity lower bound.
    pub strict_convexity: Option<f64>,
}

impl JuntaCertificate {
    /// Structured text record, one key=value per line. Kept directions are
    /// rendered 1-indexed, matching the display convention elsewhere.
    pub fn render(&self) -> String {
        let kept: Vec<String> = self.kept_set.iter().map(|i| (i + 1).to_string()).collect();
        let mut out = String::new();
        out.push_str(&format!("kept_set={}\n", kept.join(",")));
        out.push_str(&format!("eta={:.12e}\n", self.eta));
        out.push_str(&format!("t={:.12e}\n", self.t));
        out.push_str(&format!("alpha={:.12e}\n", self.alpha));
        out.push_str(&format!("bound_la={:.12e}\n", self.bound_la));
        out.push_str(&format!("bound_bakry={:.12e}\n", self.bound_bakry));
        out.push_str(&format!("measured_error={:.12e}\n", self.measured_error));
        out.push_str(&format!("epsilon={:.12e}\n", self.epsilon));
        out.push_str(&format!("retries={}\n", self.retries));
        if let Some(c) = self.slice_c {
            out.push_str(&format!("slice_c={c:.12e}\n"));
        }
        if let Some(c) = self.strict_convexity {
            out.push_str(&format!("strict_convexity={c:.12e}\n"));
        }
        out
    }
}

/// α(t) = (1 − e^{−2ρt})/(1 + e^{−2ρt}).
pub fn alpha_exponent(rho: f64, t: f64) -> f64 {
    let e = (-2.0 * rho * t).exp();
    (1.0 - e) / (1.0 + e)
}

/// Π_T f: average f over the directions in T. Products integrate the
/// coordinates of T successively; Schreier spaces average each orbit of the
/// group generated by T (identical to the subgroup average, since the
/// subgroup hits every orbit point equally often).
pub fn average_out(space: &MarkovSpace, f: &[f64], t_set: &[usize]) -> Result<Vec<f64>> {
    space.check_table(f)?;
    let n_dirs = space.n_directions();
    if let Some(&bad) = t_set.iter().find(|&&i| i >= n_dirs) {
        return Err(Error::InvalidParameter(format!(
            "direction {bad} out of range for {n_dirs} directions"
        )));
    }
    match &space.structure {
        Structure::Product(_) => {
            let mut g = f.to_vec();
            for &i in t_set {
                g = space.refresh_axis(&g, i)?;
            }
            Ok(g)
        }
        Structure::Schreier(s) => {
            // orbits = connected components under the selected generator maps
            let n = space.n_states;
            let mut comp = vec![usize::MAX; n];
            let mut order: Vec<usize> = Vec::new();
            let mut n_comps = 0usize;
            for start in 0..n {
                if comp[start] != usize::MAX {
                    continue;
                }
                let id = n_comps;
                n_comps += 1;
                comp[start] = id;
                order.clear();
                order.push(start);
                while let Some(x) = order.pop() {
                    for &g_idx in t_set {
                        let y = s.maps[g_idx][x] as usize;
                        if comp[y] == usize::MAX {
                            comp[y] = id;
                            order.push(y);
                        }
                    }
                }
            }
            let mut sums = vec![0.0f64; n_comps];
            let mut counts = vec![0usize; n_comps];
            for x in 0..n {
                sums[comp[x]] += f[x];
                counts[comp[x]] += 1;
            }
            Ok((0..n).map(|x| sums[comp[x]] / counts[comp[x]] as f64).collect())
        }
    }
}

/// Check ‖f − Π_T f‖₂² = Σ ‖g_{i−1} − g_i‖₂² where g_i integrates the
/// coordinates of T one at a time (the increments of a reverse martingale).
pub fn reverse_martingale_check(
    space: &MarkovSpace,
    f: &[f64],
    t_set: &[usize],
) -> Result<MartingaleReport> {
    space.product()?;
    let projected = average_out(space, f, t_set)?;
    let diff: Vec<f64> = f.iter().zip(&projected).map(|(a, b)| a - b).collect();
    let total = space.l2_norm_sq(&diff);
    let mut increments = Vec::with_capacity(t_set.len());
    let mut prev = f.to_vec();
    for &i in t_set {
        let next = space.refresh_axis(&prev, i)?;
        let step: Vec<f64> = prev.iter().zip(&next).map(|(a, b)| a - b).collect();
        increments.push(space.l2_norm_sq(&step));
        prev = next;
    }
    let gap = total - increments.iter().sum::<f64>();
    Ok(MartingaleReport {
        total,
        increments,
        gap,
        tolerance: tolerances::DIRICHLET_MATCH,
    })
}

/// T = the low-influence directions of the profile. Products and walk
/// generators threshold directly: T = {i : I_i ≤ η}. Slices build a vertex
/// set S greedily (repeatedly take the vertex with the largest residual
/// transposition influence until every pair outside S falls below η) and
/// return T = the pairs avoiding S.
pub fn select_low_influence(profile: &InfluenceProfile, eta: f64) -> Result<Vec<usize>> {
    if eta < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "influence threshold must be nonnegative, got {eta}"
        )));
    }
    match profile.kind {
        SpaceKind::Slice { n, .. } => Ok(slice_low_influence(profile, eta, n)?.1),
        _ => Ok(profile
            .influences
            .iter()
            .enumerate()
            .filter(|(_, v)| **v <= eta)
            .map(|(i, _)| i)
            .collect()),
    }
}

/// Slice selection: returns (S, T) with S the kept vertices and T the
/// generator indices of pairs avoiding S.
pub fn slice_low_influence(
    profile: &InfluenceProfile,
    eta: f64,
    n: usize,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let pairs = profile.pairs.as_ref().ok_or_else(|| {
        Error::UnsupportedStructure("slice selection needs transposition labels".into())
    })?;
    let mut in_s = vec![false; n];
    loop {
        let worst = pairs
            .iter()
            .zip(&profile.influences)
            .find(|((i, j), v)| !in_s[*i] && !in_s[*j] && **v > eta);
        if worst.is_none() {
            break;
        }
        // vertex with the largest residual influence mass
        let mut best_vertex = usize::MAX;
        let mut best_score = -1.0;
        for v in 0..n {
            if in_s[v] {
                continue;
            }
            let score: f64 = pairs
                .iter()
                .zip(&profile.influences)
                .filter(|((i, j), _)| {
                    (*i == v && !in_s[*j]) || (*j == v && !in_s[*i])
                })
                .map(|(_, infl)| *infl)
                .sum();
            if score > best_score + 1e-15 {
                best_score = score;
                best_vertex = v;
            }
        }
        if best_vertex == usize::MAX {
            break;
        }
        in_s[best_vertex] = true;
    }
    let s_set: Vec<usize> = (0..n).filter(|&v| in_s[v]).collect();
    let t_set: Vec<usize> = pairs
        .iter()
        .enumerate()
        .filter(|(_, (i, j))| !in_s[*i] && !in_s[*j])
        .map(|(idx, _)| idx)
        .collect();
    Ok((s_set, t_set))
}

/// Low-influence lemma: ‖P_t f − Π_T P_t f‖₂² ≤ I(f)·η^{α(t)} for T the
/// η-low-influence set, assuming max‖L_i f‖_∞ = 1 and I(f) ≥ 1.
pub fn lemma_la_check(
    space: &MarkovSpace,
    gen: &Generator,
    rho: f64,
    f: &[f64],
    eta: f64,
    t: f64,
) -> Result<TwoSidedReport> {
    space.product()?;
    let profile = influence::influence_profile(space, f)?;
    let max_sup = profile.max_sup_norm();
    if (max_sup - 1.0).abs() > 1e-6 {
        return Err(Error::Precondition(format!(
            "assumes max ‖L_i f‖_∞ = 1, got {max_sup}"
        )));
    }
    if profile.total < 1.0 - 1e-9 {
        return Err(Error::Precondition(format!(
            "assumes total influence I(f) >= 1, got {}",
            profile.total
        )));
    }
    let t_set = select_low_influence(&profile, eta)?;
    let evolved = semigroup::evolve(gen, f, t)?;
    let projected = average_out(space, &evolved, &t_set)?;
    let diff: Vec<f64> = evolved.iter().zip(&projected).map(|(a, b)| a - b).collect();
    let left = space.l2_norm_sq(&diff);
    let alpha = alpha_exponent(rho, t);
    let right = profile.total * eta.powf(alpha);
    Ok(TwoSidedReport::new("lemma-la", left, right, tolerances::SLACK))
}

/// Short-time lemma: ‖f − P_t f‖₂² ≤ t·𝓔(f,f).
pub fn bakry_check(gen: &Generator, f: &[f64], t: f64) -> Result<TwoSidedReport> {
    if t < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "time must be nonnegative, got {t}"
        )));
    }
    let evolved = semigroup::evolve(gen, f, t)?;
    let diff: Vec<f64> = f.iter().zip(&evolved).map(|(a, b)| a - b).collect();
    let left = gen.space.l2_norm_sq(&diff);
    let lf = gen.apply(f)?;
    let energy = -gen.space.inner(f, &lf);
    Ok(TwoSidedReport::new(
        "bakry",
        left,
        t * energy,
        tolerances::SLACK,
    ))
}

pub(crate) const MAX_RETRIES: u32 = 200;

/// Extract an approximate junta: choose t = ε²/(16·I), start η at the
/// larger of the theory threshold (I·η^{α(t)} = ε/2) and the top influence,
/// average out the η-low-influence directions, and measure the error in the
/// requested norm. On a miss η descends to the next distinct influence
/// level below it, ending at 0 (keep every live direction). Input is
/// rescaled so the largest direction sup-norm is 1, and the output is
/// rescaled back.
pub fn extract_junta(
    space: &MarkovSpace,
    gen: &Generator,
    rho: f64,
    f: &[f64],
    eps: f64,
    norm: ErrorNorm,
) -> Result<(Vec<f64>, JuntaCertificate)> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "target eps must lie in (0,1), got {eps}"
        )));
    }
    space.check_table(f)?;
    let profile = influence::influence_profile(space, f)?;
    let scale = profile.max_sup_norm();
    if scale <= tolerances::ZERO_INFLUENCE {
        // constant function: nothing to extract
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
            strict_convexity: None,
        };
        return Ok((f.to_vec(), cert));
    }
    let scaled: Vec<f64> = f.iter().map(|v| v / scale).collect();
    let scaled_profile = influence::influence_profile(space, &scaled)?;
    let total = scaled_profile.total;
    // the schedule is derived under I(f) >= 1; smaller totals only make the
    // time longer, and the measured-error loop guards the contract anyway
    let total_eff = total.max(1.0);
    let t = eps * eps / (16.0 * total_eff);
    let alpha = alpha_exponent(rho, t);
    // η^α·I = ε/2 guarantees the smoothed bound, but 1/α blows up as
    // t → 0 and the solved η underflows to 0, which would degenerate T to
    // the zero-influence set. The loop verifies the realized error
    // directly, so descending from the top influence is sound and finds
    // the smallest kept set the target admits.
    let eta_theory = {
        let e = (eps / (2.0 * total_eff)).powf(1.0 / alpha);
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
    let energy = {
        let lf = gen.apply(&scaled)?;
        -space.inner(&scaled, &lf)
    };

    let mut best: Option<(f64, Vec<f64>, Vec<usize>, f64)> = None;
    let mut rounds = 0;
    for retry in 0..=MAX_RETRIES {
        rounds = retry;
        let t_set = select_low_influence(&scaled_profile, eta)?;
        let projected = average_out(space, &scaled, &t_set)?;
        let g: Vec<f64> = projected.iter().map(|v| v * scale).collect();
        let diff: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a - b).collect();
        let measured = match norm {
            ErrorNorm::L2 => space.l2_norm_sq(&diff).sqrt(),
            ErrorNorm::L1 => space.l1_norm(&diff),
        };
        if best.as_ref().map_or(true, |(m, ..)| measured < *m) {
            let kept: Vec<usize> = (0..space.n_directions())
                .filter(|i| !t_set.contains(i))
                .collect();
            best = Some((measured, g.clone(), kept, eta));
        }
        if measured <= eps {
            let kept: Vec<usize> = (0..space.n_directions())
                .filter(|i| !t_set.contains(i))
                .collect();
            let cert = JuntaCertificate {
                kept_set: kept,
                eta,
                t,
                alpha,
                bound_la: total * eta.powf(alpha),
                bound_bakry: t * energy,
                measured_error: measured,
                epsilon: eps,
                retries: retry,
                slice_c: None,
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
    Err(Error::ExtractionFailed(Box::new(FailedExtraction {
        candidate,
        kept_set,
        measured,
        target: eps,
        retries: rounds,
    })))
}

/// (sgn + 1)/2 rounding to {0,1}; sgn(0) counts as positive so the output
/// is deterministic.
pub fn boolean_round(g: &[f64]) -> Vec<f64> {
    g.iter().map(|&v| if v >= 0.0 { 1.0 } else { 0.0 }).collect()
}

/// Per-coordinate decay check ‖L_i P_t f‖₂² ≤ I_i(f)^{β(t)} with
/// β(t) = 2/(1 + e^{−ρt}), for f whose coordinate Laplacians take values
/// in {−1, 0, 1}.
pub fn boolean_decay_check(
    gen: &Generator,
    rho: f64,
    f: &[f64],
    t: f64,
) -> Result<Vec<TwoSidedReport>> {
    let space = gen.space;
    space.product()?;
    let n = space.n_directions();
    let beta = 2.0 / (1.0 + (-rho * t).exp());
    let evolved = semigroup::evolve(gen, f, t)?;
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let li = space.coordinate_laplacian(f, i)?;
        if let Some(bad) = li
            .iter()
            .find(|v| (v.abs() - 1.0).abs() > tolerances::SLACK && v.abs() > tolerances::SLACK)
        {
            return Err(Error::Precondition(format!(
                "assumes L_i f takes values in {{-1,0,1}}; coordinate {i} has {bad}"
            )));
        }
        let trunc = influence::coordinate_influence(space, f, i)?;
        let lie = space.coordinate_laplacian(&evolved, i)?;
        let left = space.l2_norm_sq(&lie);
        let right = trunc.powf(beta);
        out.push(TwoSidedReport::new(
            format!("boolean-decay[{}]", i + 1),
            left,
            right,
            tolerances::SLACK,
        ));
    }
    Ok(out)
}
