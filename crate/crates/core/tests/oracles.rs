//! Independent oracles for the walk structure, the matrix exponential, the
//! influence profiles, and the norm machinery. Everything here is rebuilt
//! from the state encodings alone (digits, measures), never through the
//! operators under test.

use std::collections::HashMap;

use juntalab::functions;
use juntalab::influence;
use juntalab::semigroup::{self, lp_norm};
use juntalab::spaces::{self, Factor, MarkovSpace};

fn digit_index_map(space: &MarkovSpace) -> HashMap<Vec<usize>, usize> {
    (0..space.n_states)
        .map(|s| (space.digits_of(s), s))
        .collect()
}

/// Marginal weight of digit value d in coordinate i, from the joint
/// measure alone.
fn marginal(space: &MarkovSpace, i: usize, d: usize) -> f64 {
    (0..space.n_states)
        .filter(|&s| space.digits_of(s)[i] == d)
        .map(|s| space.measure[s])
        .sum()
}

/// Refresh coordinate i from its marginal: the rank-one kernel written out
/// as a fiber average.
fn refresh_oracle(space: &MarkovSpace, f: &[f64], i: usize) -> Vec<f64> {
    let map = digit_index_map(space);
    let radix = 1 + (0..space.n_states)
        .map(|s| space.digits_of(s)[i])
        .max()
        .unwrap();
    let weights: Vec<f64> = (0..radix).map(|d| marginal(space, i, d)).collect();
    (0..space.n_states)
        .map(|s| {
            let digits = space.digits_of(s);
            (0..radix)
                .map(|d| {
                    let mut moved = digits.clone();
                    moved[i] = d;
                    weights[d] * f[map[&moved]]
                })
                .sum()
        })
        .collect()
}

/// Product generator: sum of refreshes minus n copies of the identity.
fn product_l_oracle(space: &MarkovSpace, f: &[f64]) -> Vec<f64> {
    let n = space.digits_of(0).len();
    let mut out = vec![0.0; space.n_states];
    for i in 0..n {
        let ei = refresh_oracle(space, f, i);
        for (o, (e, v)) in out.iter_mut().zip(ei.iter().zip(f)) {
            *o += e - v;
        }
    }
    out
}

/// Rescaled torus generator: (1/4)·Σ_i (f(x+e_i) + f(x−e_i) − 2f(x)).
fn torus_l_oracle(space: &MarkovSpace, f: &[f64], n: usize, m: usize) -> Vec<f64> {
    let map = digit_index_map(space);
    (0..space.n_states)
        .map(|s| {
            let digits = space.digits_of(s);
            let mut acc = 0.0;
            for i in 0..n {
                for step in [1, m - 1] {
                    let mut moved = digits.clone();
                    moved[i] = (moved[i] + step) % m;
                    acc += f[map[&moved]];
                }
                acc -= 2.0 * f[s];
            }
            acc / 4.0
        })
        .collect()
}

/// Transposition-walk generator on the slice: uniform average over all
/// n(n−1)/2 swaps minus the identity.
fn slice_l_oracle(space: &MarkovSpace, f: &[f64], n: usize) -> Vec<f64> {
    let map = digit_index_map(space);
    let pairs = (n * (n - 1) / 2) as f64;
    (0..space.n_states)
        .map(|s| {
            let digits = space.digits_of(s);
            let mut acc = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    let mut moved = digits.clone();
                    moved.swap(i, j);
                    acc += f[map[&moved]] - f[s];
                }
            }
            acc / pairs
        })
        .collect()
}

/// Dense matrix of a generator oracle, columns = oracle applied to unit
/// vectors.
fn dense_of(space: &MarkovSpace, l: impl Fn(&[f64]) -> Vec<f64>) -> Vec<Vec<f64>> {
    let n = space.n_states;
    let mut cols = Vec::with_capacity(n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        cols.push(l(&e));
    }
    // row-major
    (0..n).map(|r| (0..n).map(|ccol| cols[ccol][r]).collect()).collect()
}

/// Plain scaling-and-squaring matrix exponential with a Taylor core.
fn expm(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let norm: f64 = a
        .iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = norm.log2().ceil().max(0.0) as u32 + 1;
    let scale = 0.5f64.powi(squarings as i32);
    let scaled: Vec<Vec<f64>> = a
        .iter()
        .map(|row| row.iter().map(|v| v * scale).collect())
        .collect();
    let mut result = identity(n);
    let mut term = identity(n);
    for k in 1..=24 {
        term = matmul(&term, &scaled);
        for row in term.iter_mut() {
            for v in row.iter_mut() {
                *v /= k as f64;
            }
        }
        for (rr, tr) in result.iter_mut().zip(&term) {
            for (rv, tv) in rr.iter_mut().zip(tr) {
                *rv += tv;
            }
        }
    }
    for _ in 0..squarings {
        result = matmul(&result, &result);
    }
    result
}

fn identity(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

fn matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(v, xv)| v * xv).sum())
        .collect()
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn arbitrary_product() -> MarkovSpace {
    spaces::build_product(vec![
        Factor {
            values: vec![-1.0, 0.0, 2.0],
            measure: vec![0.2, 0.3, 0.5],
        },
        Factor {
            values: vec![-1.0, 1.0],
            measure: vec![0.4, 0.6],
        },
        Factor {
            values: vec![0.0, 1.0, 3.0, 7.0],
            measure: vec![0.1, 0.2, 0.3, 0.4],
        },
    ])
    .unwrap()
}

#[test]
fn generator_matches_the_refresh_oracle_on_products() {
    for space in [
        spaces::build_biased_cube(4, 0.3).unwrap(),
        spaces::build_biased_cube(5, 0.5).unwrap(),
        arbitrary_product(),
    ] {
        let gen = semigroup::generator(&space);
        for seed in 0..3 {
            let f = functions::random_table(&space, seed);
            let got = gen.apply(&f).unwrap();
            let want = product_l_oracle(&space, &f);
            assert!(
                sup_diff(&got, &want) <= 1e-12,
                "{}: oracle mismatch {}",
                space.kind.describe(),
                sup_diff(&got, &want)
            );
        }
    }
}

#[test]
fn generator_matches_the_shift_oracle_on_tori() {
    for (n, m) in [(1usize, 5usize), (2, 4), (3, 3)] {
        let space = spaces::build_torus(n, m).unwrap();
        let gen = semigroup::generator(&space);
        for seed in 0..3 {
            let f = functions::random_table(&space, seed);
            let got = gen.apply(&f).unwrap();
            let want = torus_l_oracle(&space, &f, n, m);
            assert!(
                sup_diff(&got, &want) <= 1e-12,
                "torus n={n} m={m}: oracle mismatch {}",
                sup_diff(&got, &want)
            );
        }
    }
}

#[test]
fn generator_matches_the_transposition_oracle_on_slices() {
    for (n, k) in [(4usize, 2usize), (5, 2), (6, 3)] {
        let space = spaces::build_slice(n, k).unwrap();
        let gen = semigroup::generator(&space);
        for seed in 0..3 {
            let f = functions::random_table(&space, seed);
            let got = gen.apply(&f).unwrap();
            let want = slice_l_oracle(&space, &f, n);
            assert!(
                sup_diff(&got, &want) <= 1e-12,
                "slice({n},{k}): oracle mismatch {}",
                sup_diff(&got, &want)
            );
        }
    }
}

#[test]
fn evolution_matches_an_independent_matrix_exponential() {
    // oracle chain: structure oracle -> dense matrix -> expm -> compare
    let cases: Vec<(MarkovSpace, Box<dyn Fn(&MarkovSpace, &[f64]) -> Vec<f64>>)> = vec![
        (
            spaces::build_biased_cube(5, 0.3).unwrap(),
            Box::new(|s: &MarkovSpace, f: &[f64]| product_l_oracle(s, f)),
        ),
        (
            arbitrary_product(),
            Box::new(|s: &MarkovSpace, f: &[f64]| product_l_oracle(s, f)),
        ),
        (
            spaces::build_torus(2, 4).unwrap(),
            Box::new(|s: &MarkovSpace, f: &[f64]| torus_l_oracle(s, f, 2, 4)),
        ),
        (
            spaces::build_slice(5, 2).unwrap(),
            Box::new(|s: &MarkovSpace, f: &[f64]| slice_l_oracle(s, f, 5)),
        ),
    ];
    for (space, oracle) in &cases {
        let dense = dense_of(space, |f| oracle(space, f));
        let gen = semigroup::generator(space);
        for &t in &[0.1, 0.7] {
            let scaled: Vec<Vec<f64>> = dense
                .iter()
                .map(|row| row.iter().map(|v| v * t).collect())
                .collect();
            let propagator = expm(&scaled);
            for seed in 0..2 {
                let f = functions::random_table(space, seed);
                let got = semigroup::evolve(&gen, &f, t).unwrap();
                let want = matvec(&propagator, &f);
                assert!(
                    sup_diff(&got, &want) <= 1e-10,
                    "{} t={t}: evolve vs expm {}",
                    space.kind.describe(),
                    sup_diff(&got, &want)
                );
            }
        }
    }
}

#[test]
fn influences_match_their_definitions() {
    // products: I_i = |E_i f - f|_1 against the refresh oracle
    for space in [
        spaces::build_biased_cube(4, 0.3).unwrap(),
        arbitrary_product(),
    ] {
        let f = functions::random_table(&space, 11);
        let profile = influence::influence_profile(&space, &f).unwrap();
        let n = space.digits_of(0).len();
        let mut total = 0.0;
        for i in 0..n {
            let ei = refresh_oracle(&space, &f, i);
            let li: f64 = ei
                .iter()
                .zip(&f)
                .zip(&space.measure)
                .map(|((e, v), w)| (e - v).abs() * w)
                .sum();
            assert!(
                (profile.influences[i] - li).abs() <= 1e-12,
                "{} coordinate {i}: {} vs oracle {li}",
                space.kind.describe(),
                profile.influences[i]
            );
            total += li;
        }
        assert!((profile.total - total).abs() <= 1e-12);
    }
    // slices: I_s = |f∘tau_s - f|_1 per transposition, total = (1/n)·sum
    let space = spaces::build_slice(5, 2).unwrap();
    let f = functions::random_table(&space, 12);
    let profile = influence::influence_profile(&space, &f).unwrap();
    let map = digit_index_map(&space);
    let pairs = profile.pairs.clone().expect("slices carry their pairs");
    let mut total = 0.0;
    for (s, &(i, j)) in pairs.iter().enumerate() {
        let ds: f64 = (0..space.n_states)
            .map(|x| {
                let mut moved = space.digits_of(x);
                moved.swap(i, j);
                (f[map[&moved]] - f[x]).abs() * space.measure[x]
            })
            .sum();
        assert!(
            (profile.influences[s] - ds).abs() <= 1e-12,
            "transposition {s}=({i},{j}): {} vs oracle {ds}",
            profile.influences[s]
        );
        total += ds;
    }
    assert!((profile.total - total / 5.0).abs() <= 1e-12);
}

#[test]
fn norms_are_log_convex_in_the_exponent() {
    let space = spaces::build_biased_cube(5, 0.4).unwrap();
    for seed in 0..5 {
        let f = functions::random_table(&space, seed);
        for &(p0, p1, theta) in &[(1.0, 3.0, 0.5), (1.5, 4.0, 0.3), (2.0, 6.0, 0.7)] {
            let p_theta = 1.0 / ((1.0 - theta) / p0 + theta / p1);
            let bound = lp_norm(&space, &f, p0).unwrap().powf(1.0 - theta)
                * lp_norm(&space, &f, p1).unwrap().powf(theta);
            let mid = lp_norm(&space, &f, p_theta).unwrap();
            assert!(
                mid <= bound + 1e-10,
                "seed {seed} p0={p0} p1={p1}: {mid} > {bound}"
            );
        }
    }
}

#[test]
fn evolution_commutes_with_coordinate_laplacians() {
    let space = spaces::build_biased_cube(5, 0.3).unwrap();
    let gen = semigroup::generator(&space);
    let f = functions::random_table(&space, 3);
    for &t in &[0.2, 1.0] {
        let evolved = semigroup::evolve(&gen, &f, t).unwrap();
        for i in 0..5 {
            let a = space.coordinate_laplacian(&evolved, i).unwrap();
            let li = space.coordinate_laplacian(&f, i).unwrap();
            let b = semigroup::evolve(&gen, &li, t).unwrap();
            assert!(
                sup_diff(&a, &b) <= 1e-10,
                "coordinate {i} t={t}: {}",
                sup_diff(&a, &b)
            );
        }
    }
}

#[test]
fn variance_decays_at_the_spectral_gap_rate() {
    for space in [
        spaces::build_torus(2, 5).unwrap(),
        spaces::build_slice(6, 2).unwrap(),
        spaces::build_symmetric_group(4).unwrap(),
    ] {
        let gen = semigroup::generator(&space);
        let gap = semigroup::spectral_gap(&gen).unwrap();
        let f = functions::random_table(&space, 9);
        let centered: Vec<f64> = {
            let m = space.mean(&f);
            f.iter().map(|v| v - m).collect()
        };
        let base = space.l2_norm_sq(&centered).sqrt();
        for &t in &[0.3, 1.0, 2.5] {
            let evolved = semigroup::evolve(&gen, &centered, t).unwrap();
            let now = space.l2_norm_sq(&evolved).sqrt();
            let envelope = (-gap * t).exp() * base;
            assert!(
                now <= envelope + 1e-9,
                "{} t={t}: {now} > {envelope}",
                space.kind.describe()
            );
        }
    }
}

#[test]
fn semigroup_law_holds_on_the_symmetric_group() {
    let space = spaces::build_symmetric_group(4).unwrap();
    let gen = semigroup::generator(&space);
    let f = functions::random_table(&space, 21);
    let same = semigroup::evolve(&gen, &f, 0.0).unwrap();
    assert!(sup_diff(&same, &f) <= 1e-12);
    let one = semigroup::evolve(&gen, &f, 0.9).unwrap();
    let two_step = semigroup::evolve(&gen, &semigroup::evolve(&gen, &f, 0.4).unwrap(), 0.5).unwrap();
    assert!(
        sup_diff(&one, &two_step) <= 1e-9,
        "law violated by {}",
        sup_diff(&one, &two_step)
    );
}

#[test]
fn influence_profiles_are_permutation_equivariant() {
    let space = spaces::build_biased_cube(5, 0.5).unwrap();
    let map = digit_index_map(&space);
    let f = functions::random_table(&space, 17);
    let perm = [2usize, 0, 4, 1, 3];
    // g(x) = f(digits permuted by perm): coordinate i of g behaves like
    // coordinate perm[i] of f
    let g: Vec<f64> = (0..space.n_states)
        .map(|s| {
            let digits = space.digits_of(s);
            let moved: Vec<usize> = (0..5).map(|i| digits[perm[i]]).collect();
            f[map[&moved]]
        })
        .collect();
    let pf = influence::influence_profile(&space, &f).unwrap();
    let pg = influence::influence_profile(&space, &g).unwrap();
    for i in 0..5 {
        assert!(
            (pg.influences[perm[i]] - pf.influences[i]).abs() <= 1e-12,
            "coordinate {i}"
        );
    }
    assert!((pf.total - pg.total).abs() <= 1e-12);
}
