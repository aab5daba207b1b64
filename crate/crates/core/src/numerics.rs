//! Dense linear algebra, seeded pseudo-randomness, and the sigmoid family.
//!
//! Everything else in the crate builds on these primitives. All operations
//! are deterministic: the same inputs (and the same seed, for [`Rng`])
//! produce bit-identical outputs on one platform.

use crate::error::{Error, Result};

/// Pre-activations are clamped to this magnitude before exponentiation so
/// `sigmoid` stays finite for any finite input.
pub const PREACTIVATION_CLAMP: f64 = 500.0;

/// Standard logistic function 1/(1+e^-x) with the input clamped to
/// ±[`PREACTIVATION_CLAMP`].
pub fn sigmoid(x: f64) -> f64 {
    let x = x.clamp(-PREACTIVATION_CLAMP, PREACTIVATION_CLAMP);
    1.0 / (1.0 + (-x).exp())
}

/// Sigmoid derivative expressed through the output: y·(1−y).
pub fn sigmoid_prime_from_output(y: f64) -> f64 {
    y * (1.0 - y)
}

/// Dense row-major matrix of `f64` values.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds a matrix from row-major data, rejecting length mismatches and
    /// non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Matrix> {
        if data.len() != rows * cols {
            return Err(Error::Dimension {
                context: "matrix construction",
                expected: rows * cols,
                actual: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric(
                "matrix construction rejected a non-finite entry".to_string(),
            ));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        debug_assert!(row < self.rows && col < self.cols);
        self.data[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.rows && col < self.cols);
        self.data[row * self.cols + col] = value;
    }

    #[inline]
    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, row: usize) -> &mut [f64] {
        &mut self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Matrix-vector product; `v` must have `cols` entries.
    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::Dimension {
                context: "matrix-vector product",
                expected: self.cols,
                actual: v.len(),
            });
        }
        let mut out = Vec::with_capacity(self.rows);
        for r in 0..self.rows {
            let row = self.row(r);
            let mut acc = 0.0;
            for (w, x) in row.iter().zip(v) {
                acc += w * x;
            }
            out.push(acc);
        }
        Ok(out)
    }
}

/// Deterministic 64-bit pseudo-random generator (splitmix64 stepping).
///
/// The stream is a pure function of the seed. One `Rng` must not be shared
/// across threads; clone or re-seed instead.
#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Rng {
        Rng { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in [lo, hi). Errors when `lo >= hi` (or either bound
    /// is NaN).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> Result<f64> {
        if lo.partial_cmp(&hi) != Some(std::cmp::Ordering::Less) {
            return Err(Error::invalid_input(format!(
                "uniform range requires lo < hi, got [{lo}, {hi})"
            )));
        }
        Ok(lo + (hi - lo) * self.next_f64())
    }

    /// Uniform index in [0, n). `n` must be positive.
    pub fn next_index(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, slice: &mut [T]) {
        for i in (1..slice.len()).rev() {
            let j = self.next_index(i + 1);
            slice.swap(i, j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    // proptest's prelude also exports a `Rng` trait; ours wins explicitly.
    use super::Rng;
    use proptest::prelude::*;

    #[test]
    fn sigmoid_symmetry_point() {
        assert_eq!(sigmoid(0.0), 0.5);
    }

    #[test]
    fn sigmoid_mirror_sums_to_one() {
        for &x in &[0.1, 1.0, 3.7, 25.0, 499.0] {
            let s = sigmoid(x) + sigmoid(-x);
            assert!((s - 1.0).abs() < 1e-12, "sigmoid({x}) mirror sum = {s}");
        }
    }

    #[test]
    fn sigmoid_of_two_matches_high_precision_value() {
        // 1/(1+e^-2) evaluated with 50-digit arithmetic.
        #[allow(clippy::excessive_precision)]
        let expected = 0.88079707797788244405972914130239679520638429862897;
        assert!((sigmoid(2.0) - expected).abs() < 1e-15);
    }

    #[test]
    fn sigmoid_is_finite_and_bounded_at_extremes() {
        for &x in &[-1e300, -500.0, 500.0, 1e300] {
            let y = sigmoid(x);
            assert!(y.is_finite());
            assert!((0.0..=1.0).contains(&y));
        }
        assert!(sigmoid(-500.0) > 0.0);
    }

    #[test]
    fn sigmoid_prime_peak_and_saturation() {
        assert_eq!(sigmoid_prime_from_output(0.5), 0.25);
        assert_eq!(sigmoid_prime_from_output(0.3), 0.21);
        assert!(sigmoid_prime_from_output(1e-12) < 1e-11);
        assert!(sigmoid_prime_from_output(1.0 - 1e-12) < 1e-11);
    }

    #[test]
    fn mul_vec_identity_and_zero() {
        let v = vec![1.5, -2.0, 0.25];
        assert_eq!(Matrix::identity(3).mul_vec(&v).unwrap(), v);
        assert_eq!(Matrix::zeros(3, 3).mul_vec(&v).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn mul_vec_matches_hand_multiplication() {
        // [1 2; 3 4] * [5, 6] = [17, 39]
        let m = Matrix::from_vec(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let out = m.mul_vec(&[5.0, 6.0]).unwrap();
        assert_eq!(out, vec![1.0 * 5.0 + 2.0 * 6.0, 3.0 * 5.0 + 4.0 * 6.0]);
    }

    #[test]
    fn mul_vec_rejects_wrong_length() {
        let m = Matrix::zeros(2, 3);
        assert!(m.mul_vec(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn from_vec_rejects_bad_length_and_non_finite() {
        assert!(Matrix::from_vec(2, 2, vec![1.0; 3]).is_err());
        assert!(Matrix::from_vec(1, 2, vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn rng_same_seed_same_stream() {
        let mut a = Rng::new(42);
        let mut b = Rng::new(42);
        for _ in 0..1000 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn uniform_rejects_empty_range() {
        let mut rng = Rng::new(1);
        assert!(rng.uniform(1.0, 1.0).is_err());
        assert!(rng.uniform(2.0, 1.0).is_err());
    }

    #[test]
    fn uniform_bounds_and_mean() {
        let mut rng = Rng::new(7);
        let n = 100_000;
        let mut sum = 0.0;
        for _ in 0..n {
            let x = rng.uniform(0.0, 1.0).unwrap();
            assert!((0.0..1.0).contains(&x));
            sum += x;
        }
        let mean = sum / n as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean over {n} draws = {mean}");
    }

    #[test]
    fn shuffle_is_a_permutation() {
        let mut rng = Rng::new(3);
        let mut v: Vec<usize> = (0..50).collect();
        rng.shuffle(&mut v);
        let mut sorted = v.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..50).collect::<Vec<_>>());
    }

    proptest! {
        #[test]
        fn sigmoid_strictly_monotone_in_working_range(
            x in -15.0f64..15.0,
            delta in 1e-6f64..5.0,
        ) {
            prop_assert!(sigmoid(x) < sigmoid(x + delta));
        }

        #[test]
        fn sigmoid_monotone_non_strict_over_clamp_range(
            x in -600.0f64..600.0,
            delta in 0.0f64..100.0,
        ) {
            prop_assert!(sigmoid(x) <= sigmoid(x + delta));
        }

        #[test]
        fn mul_vec_is_linear(
            a in -3.0f64..3.0,
            b in -3.0f64..3.0,
            v in proptest::collection::vec(-5.0f64..5.0, 4),
            w in proptest::collection::vec(-5.0f64..5.0, 4),
            m in proptest::collection::vec(-5.0f64..5.0, 12),
        ) {
            let m = Matrix::from_vec(3, 4, m).unwrap();
            let combined: Vec<f64> =
                v.iter().zip(&w).map(|(x, y)| a * x + b * y).collect();
            let lhs = m.mul_vec(&combined).unwrap();
            let mv = m.mul_vec(&v).unwrap();
            let mw = m.mul_vec(&w).unwrap();
            for i in 0..3 {
                prop_assert!((lhs[i] - (a * mv[i] + b * mw[i])).abs() < 1e-9);
            }
        }
    }
}
