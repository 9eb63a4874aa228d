//! Thin wrapper over the dense symmetric eigensolver.
//!
//! Reversible kernels are not symmetric as matrices, but conjugation by
//! D^{1/2} (D the diagonal of the stationary measure) makes them so. All
//! spectral work in this crate goes through that symmetrization, so the
//! only linear algebra needed from outside is a dense symmetric
//! eigendecomposition; everything else is hand-rolled contractions.

use nalgebra::DMatrix;

/// Eigendecomposition of a real symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// `vectors[k]` is the orthonormal eigenvector paired with `values[k]`.
    pub vectors: Vec<Vec<f64>>,
}

/// Decompose a row-major n×n symmetric matrix.
///
/// The input is symmetrized as (A + Aᵀ)/2 first so that callers may pass
/// matrices that are symmetric only up to rounding.
pub fn symmetric_eigen(a: &[f64], n: usize) -> SymmetricEigen {
    assert_eq!(a.len(), n * n, "matrix shape mismatch");
    let mut m = DMatrix::from_row_slice(n, n, a);
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
    let eig = m.clone().symmetric_eigen();
    // The solver's eigenvalue array can come back permuted relative to the
    // eigenvector columns (observed on matrices with degenerate spectra),
    // so each column's value is recomputed as its Rayleigh quotient.
    let mq = &m * &eig.eigenvectors;
    let mut order: Vec<(f64, usize)> = (0..n)
        .map(|k| {
            let col = eig.eigenvectors.column(k);
            let val: f64 = col.iter().zip(mq.column(k).iter()).map(|(a, b)| a * b).sum();
            (val, k)
        })
        .collect();
    order.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("eigenvalue is NaN"));
    let values: Vec<f64> = order.iter().map(|&(v, _)| v).collect();
    let vectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&(_, k)| eig.eigenvectors.column(k).iter().copied().collect())
        .collect();
    SymmetricEigen { values, vectors }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_exact() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3.
        let e = symmetric_eigen(&[2.0, 1.0, 1.0, 2.0], 2);
        assert!((e.values[0] - 1.0).abs() < 1e-12);
        assert!((e.values[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn vectors_are_orthonormal() {
        let a = [4.0, 1.0, 0.5, 1.0, 3.0, -1.0, 0.5, -1.0, 2.0];
        let e = symmetric_eigen(&a, 3);
        for i in 0..3 {
            for j in 0..3 {
                let dot: f64 = (0..3).map(|k| e.vectors[i][k] * e.vectors[j][k]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-12, "vectors not orthonormal");
            }
        }
    }

    #[test]
    fn reconstructs_the_matrix() {
        let a = [1.0, 0.25, -0.5, 0.25, 2.0, 0.75, -0.5, 0.75, 5.0];
        let e = symmetric_eigen(&a, 3);
        for r in 0..3 {
            for c in 0..3 {
                let got: f64 = (0..3)
                    .map(|k| e.values[k] * e.vectors[k][r] * e.vectors[k][c])
                    .sum();
                assert!((got - a[r * 3 + c]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pairs_values_with_vectors_on_degenerate_spectra() {
        // walk Laplacian of (Z/3)²: eigenvalues {0, 0.75×4, 1.5×4}; the
        // 0-eigenvector must be constant (this input tripped the solver's
        // raw value/column pairing)
        let n = 9;
        let mut l = vec![0.0f64; n * n];
        for x in 0..n {
            let (a, b) = (x % 3, x / 3);
            l[x * n + x] = 1.0;
            for y in [
                (a + 1) % 3 + 3 * b,
                (a + 2) % 3 + 3 * b,
                a + 3 * ((b + 1) % 3),
                a + 3 * ((b + 2) % 3),
            ] {
                l[x * n + y] -= 0.25;
            }
        }
        let e = symmetric_eigen(&l, n);
        assert!(e.values[0].abs() < 1e-12);
        for v in &e.vectors[0] {
            assert!((v.abs() - e.vectors[0][0].abs()).abs() < 1e-10);
        }
        for k in 0..n {
            let v = &e.vectors[k];
            for r in 0..n {
                let mv: f64 = (0..n).map(|c| l[r * n + c] * v[c]).sum();
                assert!(
                    (mv - e.values[k] * v[r]).abs() < 1e-10,
                    "k={k} residual at row {r}"
                );
            }
        }
    }
}
