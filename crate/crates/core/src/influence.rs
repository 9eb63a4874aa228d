//! Influence notions: ‖L_i f‖₁ per coordinate on products, ‖D_s f‖₁ per
//! generator on Schreier graphs, the slice totals Inf and Inf^(k), and the
//! flip influence on the cube.

use crate::error::{Error, Result};
use crate::spaces::{MarkovSpace, Normalization, SpaceKind};
use crate::tolerances;

/// Per-direction influences with the aggregates the extraction pipeline
/// needs: sup-norms for the normalization step and the declared total.
#[derive(Debug, Clone)]
pub struct InfluenceProfile {
    /// Indexed by coordinate (products) or generator (Schreier graphs).
    /// Entries below the zero-detection threshold are clamped to 0.
    pub influences: Vec<f64>,
    /// ‖L_i f‖_∞ or ‖D_s f‖_∞ per direction.
    pub sup_norms: Vec<f64>,
    /// Plain sum for products and shift/transposition walks; (1/n)·Σ_{i<j}
    /// for slices.
    pub total: f64,
    pub normalization: Normalization,
    pub kind: SpaceKind,
    /// For transposition walks: pairs[s] = the (i, j) moved by generator s.
    pub pairs: Option<Vec<(usize, usize)>>,
}

impl InfluenceProfile {
    /// Directions the function provably does not depend on.
    pub fn zero_directions(&self) -> Vec<usize> {
        self.influences
            .iter()
            .enumerate()
            .filter(|(_, v)| **v <= tolerances::ZERO_INFLUENCE)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn max_sup_norm(&self) -> f64 {
        self.sup_norms.iter().cloned().fold(0.0, f64::max)
    }
}

/// I_i(f) = ‖L_i f‖₁ on a product space.
pub fn coordinate_influence(space: &MarkovSpace, f: &[f64], i: usize) -> Result<f64> {
    space.product()?;
    let li = space.coordinate_laplacian(f, i)?;
    Ok(space.l1_norm(&li))
}

/// I_s(f) = ‖f ∘ s − f‖₁ on a Schreier space.
pub fn generator_influence(space: &MarkovSpace, f: &[f64], s: usize) -> Result<f64> {
    let d = space.generator_difference(f, s)?;
    Ok(space.l1_norm(&d))
}

/// ‖f − f∘τ_i‖₁ where τ_i flips coordinate i of the cube.
pub fn flip_influence(space: &MarkovSpace, f: &[f64], i: usize) -> Result<f64> {
    match space.kind {
        SpaceKind::Cube { .. } => {}
        _ => {
            return Err(Error::UnsupportedStructure(
                "flip influence is defined on the cube".into(),
            ))
        }
    }
    space.check_table(f)?;
    let prod = space.product()?;
    if i >= prod.strides.len() {
        return Err(Error::InvalidParameter(format!(
            "coordinate {i} out of range"
        )));
    }
    let stride = prod.strides[i];
    let diff: Vec<f64> = (0..space.n_states)
        .map(|x| {
            let digit = (x / stride) % 2;
            let y = if digit == 0 { x + stride } else { x - stride };
            f[x] - f[y]
        })
        .collect();
    Ok(space.l1_norm(&diff))
}

/// Inf^(k)(f) = (1/k)·Σ_{i<j≤k} I_{τ_ij}(f); the full total Inf(f) uses
/// k = n. Prefix indices are counted 1-based, so k = 1 is the empty sum.
pub fn slice_total_influence(space: &MarkovSpace, f: &[f64], k: Option<usize>) -> Result<f64> {
    let n = match space.kind {
        SpaceKind::Slice { n, .. } => n,
        _ => {
            return Err(Error::UnsupportedStructure(
                "prefix influence is defined on slices".into(),
            ))
        }
    };
    let k = k.unwrap_or(n);
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "prefix size {k} out of range 1..={n}"
        )));
    }
    let schreier = space.schreier()?;
    let mut sum = 0.0;
    for (s, label) in schreier.gens.iter().enumerate() {
        if let Some((i, j)) = label.transposition() {
            if i < k && j < k {
                sum += generator_influence(space, f, s)?;
            }
        }
    }
    Ok(sum / k as f64)
}

/// All per-direction influences with sup-norms and the declared total.
pub fn influence_profile(space: &MarkovSpace, f: &[f64]) -> Result<InfluenceProfile> {
    space.check_table(f)?;
    let clamp = |v: f64| {
        if v < tolerances::ZERO_INFLUENCE {
            0.0
        } else {
            v
        }
    };
    let (influences, sup_norms, pairs) = match space.schreier() {
        Ok(schreier) => {
            let mut infl = Vec::with_capacity(schreier.maps.len());
            let mut sups = Vec::with_capacity(schreier.maps.len());
            for s in 0..schreier.maps.len() {
                let d = space.generator_difference(f, s)?;
                infl.push(clamp(space.l1_norm(&d)));
                sups.push(clamp(d.iter().fold(0.0f64, |m, v| m.max(v.abs()))));
            }
            let pairs: Option<Vec<(usize, usize)>> = schreier
                .gens
                .iter()
                .map(|g| g.transposition())
                .collect::<Option<Vec<_>>>();
            (infl, sups, pairs)
        }
        Err(_) => {
            let n = space.n_directions();
            let mut infl = Vec::with_capacity(n);
            let mut sups = Vec::with_capacity(n);
            for i in 0..n {
                let li = space.coordinate_laplacian(f, i)?;
                infl.push(clamp(space.l1_norm(&li)));
                sups.push(clamp(li.iter().fold(0.0f64, |m, v| m.max(v.abs()))));
            }
            (infl, sups, None)
        }
    };
    let total = match space.kind {
        SpaceKind::Slice { n, .. } => influences.iter().sum::<f64>() / n as f64,
        _ => influences.iter().sum::<f64>(),
    };
    Ok(InfluenceProfile {
        influences,
        sup_norms,
        total,
        normalization: space.normalization,
        kind: space.kind,
        pairs,
    })
}
