//! Directional-energy features.
//!
//! For an `N x N` binary word matrix `A` six length-`N` vectors are built:
//!
//! | vector | contents |
//! |--------|----------|
//! | `f1`   | σ(principal diagonal), σ(upper diagonal k) for k = 1..N-2, then `0` |
//! | `f2`   | σ(lower diagonal m) for m = 1..N-2, then `0, 0` |
//! | `f3`   | as `f1`, on the left-right mirror of `A` |
//! | `f4`   | as `f2`, on the left-right mirror of `A` |
//! | `f5`   | σ(row i) for every row |
//! | `f6`   | σ(column j) for every column |
//!
//! σ is the sample standard deviation (`n - 1` denominator). The two corner
//! diagonals of length one are not part of the upper/lower families.

use crate::error::{Error, Result};
use crate::imaging::{flip_horizontal, SquareMatrix};

/// Sample standard deviation; a single element has deviation `0`.
pub fn std_dev(v: &[f64]) -> Result<f64> {
    match v.len() {
        0 => Err(Error::EmptyVector),
        1 => Ok(0.0),
        n => {
            let mean = v.iter().sum::<f64>() / n as f64;
            let ss: f64 = v.iter().map(|x| (x - mean) * (x - mean)).sum();
            Ok((ss / (n - 1) as f64).sqrt())
        }
    }
}

/// Principal, upper and lower diagonals of a square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalSet {
    pub principal: Vec<f64>,
    /// `upper[k - 1]` starts at `a[0][k]`, for k = 1..=N-2.
    pub upper: Vec<Vec<f64>>,
    /// `lower[m - 1]` starts at `a[m][0]`, for m = 1..=N-2.
    pub lower: Vec<Vec<f64>>,
}

impl DiagonalSet {
    pub fn element_count(&self) -> usize {
        self.principal.len()
            + self.upper.iter().map(Vec::len).sum::<usize>()
            + self.lower.iter().map(Vec::len).sum::<usize>()
    }
}

fn check_side(a: &SquareMatrix) -> Result<usize> {
    match a.n() {
        n if n < 3 => Err(Error::MatrixTooSmall(n)),
        n => Ok(n),
    }
}

pub fn extract_diagonals(a: &SquareMatrix) -> Result<DiagonalSet> {
    let n = check_side(a)?;
    let principal = (0..n).map(|i| a.get(i, i)).collect();
    let upper = (1..n - 1)
        .map(|k| (0..n - k).map(|i| a.get(i, i + k)).collect())
        .collect();
    let lower = (1..n - 1)
        .map(|m| (0..n - m).map(|i| a.get(i + m, i)).collect())
        .collect();
    Ok(DiagonalSet {
        principal,
        upper,
        lower,
    })
}

/// `(f1, f2)` of a matrix: diagonal deviations, zero-padded to length `N`.
pub fn diag_features(a: &SquareMatrix) -> Result<(Vec<f64>, Vec<f64>)> {
    let d = extract_diagonals(a)?;
    let n = a.n();

    let mut f1 = Vec::with_capacity(n);
    f1.push(std_dev(&d.principal)?);
    for diag in &d.upper {
        f1.push(std_dev(diag)?);
    }
    f1.push(0.0);

    let mut f2 = Vec::with_capacity(n);
    for diag in &d.lower {
        f2.push(std_dev(diag)?);
    }
    f2.extend([0.0, 0.0]);
    Ok((f1, f2))
}

/// `(f5, f6)`: per-row and per-column deviations.
pub fn row_col_features(a: &SquareMatrix) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = check_side(a)?;
    let rows = (0..n).map(|r| std_dev(a.row(r))).collect::<Result<_>>()?;
    let cols = (0..n).map(|c| std_dev(&a.column(c))).collect::<Result<_>>()?;
    Ok((rows, cols))
}

/// The six feature vectors of one word.
#[derive(Debug, Clone, PartialEq)]
pub struct WordFeatures {
    n: usize,
    vectors: [Vec<f64>; 6],
}

impl WordFeatures {
    /// Bundles six vectors that must all have length `n`.
    pub fn from_vectors(vectors: [Vec<f64>; 6]) -> Result<Self> {
        let n = vectors[0].len();
        for v in &vectors {
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: v.len(),
                });
            }
        }
        Ok(Self { n, vectors })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Feature `i` for `i` in `1..=6`.
    ///
    /// # Panics
    /// If `i` is outside `1..=6`.
    pub fn f(&self, i: usize) -> &[f64] {
        assert!((1..=6).contains(&i), "feature index {i} out of range 1..=6");
        &self.vectors[i - 1]
    }

    /// All six vectors, `f1` first.
    pub fn vectors(&self) -> &[Vec<f64>; 6] {
        &self.vectors
    }

    /// CSV dump, one `fK,v0,v1,...` row per vector.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (i, v) in self.vectors.iter().enumerate() {
            out.push_str(&format!("f{}", i + 1));
            for x in v {
                out.push_str(&format!(",{x}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Full six-vector extraction from a binary square matrix.
pub fn extract_word_features(a: &SquareMatrix) -> Result<WordFeatures> {
    check_side(a)?;
    if let Some(&bad) = a.values().iter().find(|&&v| v != 0.0 && v != 1.0) {
        return Err(Error::NonBinaryMatrix(bad));
    }
    let (f1, f2) = diag_features(a)?;
    let (f3, f4) = diag_features(&flip_horizontal(a))?;
    let (f5, f6) = row_col_features(a)?;
    WordFeatures::from_vectors([f1, f2, f3, f4, f5, f6])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const SQRT8: f64 = 2.828_427_124_746_190_3;

    fn m(rows: &[&[f64]]) -> SquareMatrix {
        SquareMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn std_dev_examples() {
        assert_eq!(std_dev(&[0.0; 4]).unwrap(), 0.0);
        assert!((std_dev(&[1.0, 2.0, 3.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((std_dev(&[2.0, 6.0]).unwrap() - SQRT8).abs() < 1e-12);
        assert_eq!(std_dev(&[5.0]).unwrap(), 0.0);
        assert!(matches!(std_dev(&[]), Err(Error::EmptyVector)));
    }

    #[test]
    fn diagonals_of_small_matrices() {
        let a = m(&[&[1., 2., 3.], &[4., 5., 6.], &[7., 8., 9.]]);
        let d = extract_diagonals(&a).unwrap();
        assert_eq!(d.principal, vec![1., 5., 9.]);
        assert_eq!(d.upper, vec![vec![2., 6.]]);
        assert_eq!(d.lower, vec![vec![4., 8.]]);
        assert_eq!(d.element_count(), 9 - 2);

        let eye = m(&[&[1., 0., 0.], &[0., 1., 0.], &[0., 0., 1.]]);
        let d = extract_diagonals(&eye).unwrap();
        assert_eq!(d.principal, vec![1., 1., 1.]);
        assert_eq!(d.upper, vec![vec![0., 0.]]);
        assert_eq!(d.lower, vec![vec![0., 0.]]);

        let tiny = SquareMatrix::zeros(2).unwrap();
        assert!(matches!(extract_diagonals(&tiny), Err(Error::MatrixTooSmall(2))));
    }

    #[test]
    fn diag_features_hand_values() {
        let a = m(&[&[1., 2., 3.], &[4., 5., 6.], &[7., 8., 9.]]);
        let (f1, f2) = diag_features(&a).unwrap();
        // sigma([1,5,9]) = sqrt((16+0+16)/2) = 4
        assert!(close(&f1, &[4.0, SQRT8, 0.0], 1e-9));
        assert!(close(&f2, &[SQRT8, 0.0, 0.0], 1e-9));

        let (z1, z2) = diag_features(&SquareMatrix::zeros(5).unwrap()).unwrap();
        assert_eq!(z1, vec![0.0; 5]);
        assert_eq!(z2, vec![0.0; 5]);
    }

    #[test]
    fn row_col_hand_values() {
        let a = m(&[&[1., 1., 1.], &[0., 0., 0.], &[0., 0., 0.]]);
        let (f5, f6) = row_col_features(&a).unwrap();
        // sigma({1,0,0}) = sqrt((4/9 + 1/9 + 1/9) / 2) = sqrt(1/3)
        let s = (1.0f64 / 3.0).sqrt();
        assert_eq!(f5, vec![0.0; 3]);
        assert!(close(&f6, &[s, s, s], 1e-12));
        assert!((s - 0.577_350_3).abs() < 1e-7);

        let (t5, t6) = row_col_features(&a.transpose()).unwrap();
        assert_eq!(t5, f6);
        assert_eq!(t6, f5);
    }

    #[test]
    fn identity_word_features() {
        let eye = m(&[&[1., 0., 0.], &[0., 1., 0.], &[0., 0., 1.]]);
        let w = extract_word_features(&eye).unwrap();
        let s = (1.0f64 / 3.0).sqrt();
        assert_eq!(w.f(1), &[0.0; 3]);
        assert_eq!(w.f(2), &[0.0; 3]);
        // mirror is the anti-identity: principal [0,1,0], off-diagonals all zero
        assert!(close(w.f(3), &[s, 0.0, 0.0], 1e-12));
        assert_eq!(w.f(4), &[0.0; 3]);
        assert!(close(w.f(5), &[s; 3], 1e-12));
        assert!(close(w.f(6), &[s; 3], 1e-12));
    }

    #[test]
    fn zero_and_full_matrices_are_featureless() {
        for fill in [0.0, 1.0] {
            let a = SquareMatrix::new(64, vec![fill; 64 * 64]).unwrap();
            let w = extract_word_features(&a).unwrap();
            for v in w.vectors() {
                assert_eq!(v, &vec![0.0; 64]);
            }
        }
    }

    #[test]
    fn non_binary_is_rejected() {
        let a = m(&[&[1., 2., 3.], &[4., 5., 6.], &[7., 8., 9.]]);
        assert!(matches!(extract_word_features(&a), Err(Error::NonBinaryMatrix(_))));
    }

    #[test]
    fn csv_layout() {
        let w = extract_word_features(&SquareMatrix::zeros(3).unwrap()).unwrap();
        let csv = w.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 6);
        assert_eq!(lines[0], "f1,0,0,0");
        assert!(lines[5].starts_with("f6,"));
    }

    fn binary_matrix() -> impl Strategy<Value = SquareMatrix> {
        (3usize..12).prop_flat_map(|n| {
            prop::collection::vec(prop::bool::ANY, n * n).prop_map(move |bits| {
                SquareMatrix::new(n, bits.into_iter().map(|b| b as u8 as f64).collect()).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn diagonal_coverage_reconstructs_multiset(
            n in 3usize..10, vals in prop::collection::vec(-100i32..100, 81)
        ) {
            let a = SquareMatrix::new(n, vals[..n * n].iter().map(|&v| v as f64).collect()).unwrap();
            let d = extract_diagonals(&a).unwrap();
            let mut got: Vec<f64> = d.principal.clone();
            got.extend(d.upper.iter().flatten());
            got.extend(d.lower.iter().flatten());
            got.push(a.get(0, n - 1));
            got.push(a.get(n - 1, 0));
            let mut want = a.values().to_vec();
            got.sort_by(f64::total_cmp);
            want.sort_by(f64::total_cmp);
            prop_assert_eq!(got, want);
            prop_assert_eq!(d.element_count(), n * n - 2);
        }

        #[test]
        fn features_shape_sign_and_padding(a in binary_matrix()) {
            let n = a.n();
            let w = extract_word_features(&a).unwrap();
            for v in w.vectors() {
                prop_assert_eq!(v.len(), n);
                prop_assert!(v.iter().all(|&x| x >= 0.0 && x.is_finite()));
            }
            for i in [1, 3] {
                prop_assert_eq!(w.f(i)[n - 1], 0.0);
            }
            for i in [2, 4] {
                prop_assert_eq!(w.f(i)[n - 2], 0.0);
                prop_assert_eq!(w.f(i)[n - 1], 0.0);
            }
        }

        #[test]
        fn mirror_swaps_diagonal_pairs(a in binary_matrix()) {
            let w = extract_word_features(&a).unwrap();
            let flipped = flip_horizontal(&a);
            let wf = extract_word_features(&flipped).unwrap();
            let (g1, g2) = diag_features(&flipped).unwrap();
            prop_assert_eq!(w.f(3), g1.as_slice());
            prop_assert_eq!(w.f(4), g2.as_slice());
            prop_assert_eq!(wf.f(1), w.f(3));
            prop_assert_eq!(wf.f(2), w.f(4));
            prop_assert_eq!(wf.f(3), w.f(1));
            prop_assert_eq!(wf.f(4), w.f(2));
        }
    }
}
