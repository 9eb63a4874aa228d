//! Built-in test functions.
//!
//! Each builder returns a table indexed by state rank. Boolean-shaped
//! functions take values in {-1, +1}; the per-coordinate "value" a builder
//! sees is the factor value on product spaces, cos(2*pi*d/m) on the torus,
//! the occupancy bit mapped to +-1 on a slice, and the fixed-point
//! indicator mapped to +-1 on the symmetric group.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::spaces::{FunctionTable, MarkovSpace, SpaceKind, Structure};

/// Number of coordinates a state decomposes into (not the generator count).
pub fn coordinate_count(space: &MarkovSpace) -> usize {
    match space.kind {
        SpaceKind::Cube { n, .. }
        | SpaceKind::Product { n }
        | SpaceKind::Torus { n, .. }
        | SpaceKind::Slice { n, .. }
        | SpaceKind::Symmetric { n } => n,
    }
}

/// Real value of each coordinate of the ranked state.
pub fn coordinate_values(space: &MarkovSpace, rank: usize) -> Vec<f64> {
    let digits = space.digits_of(rank);
    match (&space.structure, space.kind) {
        (Structure::Product(p), _) => digits
            .iter()
            .zip(&p.factors)
            .map(|(&d, fac)| fac.values[d])
            .collect(),
        (_, SpaceKind::Torus { m, .. }) => digits
            .iter()
            .map(|&d| (2.0 * std::f64::consts::PI * d as f64 / m as f64).cos())
            .collect(),
        (_, SpaceKind::Slice { .. }) => digits
            .iter()
            .map(|&d| if d == 1 { 1.0 } else { -1.0 })
            .collect(),
        (_, SpaceKind::Symmetric { .. }) => digits
            .iter()
            .enumerate()
            .map(|(i, &d)| if d == i { 1.0 } else { -1.0 })
            .collect(),
        _ => unreachable!("schreier structure with product kind"),
    }
}

/// f(x) = value of the first coordinate.
pub fn dictator(space: &MarkovSpace) -> Result<FunctionTable> {
    if coordinate_count(space) == 0 {
        return Err(Error::InvalidParameter("dictator needs a coordinate".into()));
    }
    Ok((0..space.n_states)
        .map(|r| coordinate_values(space, r)[0])
        .collect())
}

/// Sign of the coordinate sum; ties count as +1.
pub fn majority(space: &MarkovSpace) -> Result<FunctionTable> {
    if coordinate_count(space) == 0 {
        return Err(Error::InvalidParameter("majority needs a coordinate".into()));
    }
    Ok((0..space.n_states)
        .map(|r| {
            let s: f64 = coordinate_values(space, r).iter().sum();
            if s >= 0.0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect())
}

/// Product of coordinate signs; a zero value counts as positive.
pub fn parity(space: &MarkovSpace) -> Result<FunctionTable> {
    if coordinate_count(space) == 0 {
        return Err(Error::InvalidParameter("parity needs a coordinate".into()));
    }
    Ok((0..space.n_states)
        .map(|r| {
            coordinate_values(space, r)
                .iter()
                .map(|&v| if v >= 0.0 { 1.0 } else { -1.0 })
                .product()
        })
        .collect())
}

/// Tribes: coordinates split into consecutive blocks of width
/// ceil(log2(n+1)) (the last block may be shorter); +1 iff some block is
/// unanimously positive.
pub fn tribes(space: &MarkovSpace) -> Result<FunctionTable> {
    let n = coordinate_count(space);
    if n == 0 {
        return Err(Error::InvalidParameter("tribes needs a coordinate".into()));
    }
    let width = ((n + 1) as f64).log2().ceil() as usize;
    let width = width.max(1);
    Ok((0..space.n_states)
        .map(|r| {
            let vals = coordinate_values(space, r);
            let hit = vals
                .chunks(width)
                .any(|block| block.iter().all(|&v| v > 0.0));
            if hit {
                1.0
            } else {
                -1.0
            }
        })
        .collect())
}

/// Uniform values in [-1, 1], one independent draw per state.
pub fn random_table(space: &MarkovSpace, seed: u64) -> FunctionTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..space.n_states)
        .map(|_| rng.gen::<f64>() * 2.0 - 1.0)
        .collect()
}

/// A +-1 function of k seeded random coordinates, plus optional additive
/// uniform noise of the given amplitude. Returns the table and the sorted
/// planted coordinate set.
pub fn planted_junta(
    space: &MarkovSpace,
    k: usize,
    noise: f64,
    seed: u64,
) -> Result<(FunctionTable, Vec<usize>)> {
    let n = coordinate_count(space);
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "cannot plant a {k}-junta on {n} coordinates"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.gen_range(i..n);
        coords.swap(i, j);
    }
    coords.truncate(k);
    coords.sort_unstable();
    let table = planted_junta_on(space, &coords, noise, &mut rng)?;
    Ok((table, coords))
}

/// Plant a junta on an explicit coordinate set (see [`planted_junta`]).
pub fn planted_junta_on_coords(
    space: &MarkovSpace,
    coords: &[usize],
    noise: f64,
    seed: u64,
) -> Result<FunctionTable> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    planted_junta_on(space, coords, noise, &mut rng)
}

fn planted_junta_on(
    space: &MarkovSpace,
    coords: &[usize],
    noise: f64,
    rng: &mut ChaCha8Rng,
) -> Result<FunctionTable> {
    let n = coordinate_count(space);
    if noise < 0.0 || !noise.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "noise amplitude {noise} is not a nonnegative finite number"
        )));
    }
    let mut seen = vec![false; n];
    for &c in coords {
        if c >= n {
            return Err(Error::InvalidParameter(format!(
                "planted coordinate {c} out of range for {n} coordinates"
            )));
        }
        if seen[c] {
            return Err(Error::InvalidParameter(format!(
                "planted coordinate {c} repeats"
            )));
        }
        seen[c] = true;
    }

    let radix: Vec<usize> = coords.iter().map(|&c| coordinate_radix(space, c)).collect();
    let n_patterns: usize = radix.iter().product();
    // pattern index of each state, mixed-radix over the planted coordinates
    let mut pattern_of = Vec::with_capacity(space.n_states);
    let mut occurs = vec![false; n_patterns];
    for r in 0..space.n_states {
        let digits = space.digits_of(r);
        let mut idx = 0usize;
        for (pos, &c) in coords.iter().enumerate() {
            idx = idx * radix[pos] + digits[c];
        }
        pattern_of.push(idx);
        occurs[idx] = true;
    }

    // redraw until the table genuinely uses every planted coordinate; on a
    // slice single-bit pattern moves never co-occur, so there the table is
    // only required to be nonconstant over occurring patterns
    let slice_like = matches!(space.kind, SpaceKind::Slice { .. });
    let mut table = vec![0.0f64; n_patterns];
    let mut ok = false;
    for _ in 0..128 {
        for v in table.iter_mut() {
            *v = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        }
        ok = if slice_like {
            nonconstant_over(&table, &occurs)
        } else {
            (0..coords.len()).all(|pos| uses_coordinate(&table, &radix, pos, &occurs))
        };
        if ok {
            break;
        }
    }
    if !ok {
        return Err(Error::InvalidParameter(
            "could not plant a junta that depends on every chosen coordinate".into(),
        ));
    }

    let mut f: FunctionTable = pattern_of.iter().map(|&p| table[p]).collect();
    if noise > 0.0 {
        for v in f.iter_mut() {
            *v += noise * (rng.gen::<f64>() * 2.0 - 1.0);
        }
    }
    Ok(f)
}

fn coordinate_radix(space: &MarkovSpace, c: usize) -> usize {
    match (&space.structure, space.kind) {
        (Structure::Product(p), _) => p.factors[c].values.len(),
        (_, SpaceKind::Torus { m, .. }) => m,
        (_, SpaceKind::Slice { .. }) => 2,
        (_, SpaceKind::Symmetric { n }) => n,
        _ => unreachable!("schreier structure with product kind"),
    }
}

fn nonconstant_over(table: &[f64], occurs: &[bool]) -> bool {
    let mut first = None;
    for (v, &o) in table.iter().zip(occurs) {
        if !o {
            continue;
        }
        match first {
            None => first = Some(*v),
            Some(w) if w != *v => return true,
            _ => {}
        }
    }
    false
}

/// True iff two occurring patterns differing only in planted position `pos`
/// carry different table values.
fn uses_coordinate(table: &[f64], radix: &[usize], pos: usize, occurs: &[bool]) -> bool {
    let inner: usize = radix[pos + 1..].iter().product();
    let step = inner;
    let span = radix[pos] * inner;
    let total: usize = radix.iter().product();
    let mut base = 0;
    while base < total {
        for off in 0..inner {
            let mut seen = None;
            for d in 0..radix[pos] {
                let idx = base + d * step + off;
                if !occurs[idx] {
                    continue;
                }
                match seen {
                    None => seen = Some(table[idx]),
                    Some(w) if w != table[idx] => return true,
                    _ => {}
                }
            }
        }
        base += span;
    }
    false
}
