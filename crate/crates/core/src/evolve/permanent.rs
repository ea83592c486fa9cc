//! Matrix permanents by Ryser's inclusion-exclusion formula, visiting column
//! subsets in Gray-code order so each step updates the row sums with a single
//! column.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// `per(A)` for a square matrix in `O(2^n n)` time.
pub fn permanent(a: &DMatrix<Complex64>) -> Complex64 {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "permanent of a non-square matrix");
    if n == 0 {
        return Complex64::new(1.0, 0.0);
    }
    assert!(n < 64, "permanent size {n} exceeds the subset counter");

    let mut row_sums = vec![Complex64::new(0.0, 0.0); n];
    let mut total = Complex64::new(0.0, 0.0);
    let mut gray: u64 = 0;
    for k in 1u64..(1u64 << n) {
        let bit = k.trailing_zeros() as usize;
        gray ^= 1 << bit;
        if gray & (1 << bit) != 0 {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s += a[(i, bit)];
            }
        } else {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s -= a[(i, bit)];
            }
        }
        let prod: Complex64 = row_sums.iter().product();
        if gray.count_ones().is_multiple_of(2) {
            total += prod;
        } else {
            total -= prod;
        }
    }
    if n % 2 == 1 {
        -total
    } else {
        total
    }
}
