//! Dense row-major Gaussian elimination with partial pivoting.

use alloc::vec::Vec;

use crate::Error;

/// Pivots below this fraction of the largest entry count as zero.
const PIVOT_EPS: f64 = 1e-13;

/// Row-major `rows x cols` matrix.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: alloc::vec![0.0; rows * cols] }
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for c in 0..self.cols {
                self.data.swap(a * self.cols + c, b * self.cols + c);
            }
        }
    }
}

/// Solves `a * x = b` in place, leaving the solution in `b`.
pub(crate) fn solve_in_place(a: &mut Matrix, b: &mut Matrix) -> Result<(), Error> {
    let n = a.rows;
    debug_assert_eq!(a.cols, n);
    debug_assert_eq!(b.rows, n);
    let scale = a.data.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);

    for col in 0..n {
        let (pivot_row, pivot) = (col..n)
            .map(|r| (r, a.at(r, col)))
            .fold((col, 0.0f64), |best, (r, v)| if v.abs() > best.1.abs() { (r, v) } else { best });
        if pivot.abs() <= PIVOT_EPS * scale {
            return Err(Error::SingularSystem { column: col, pivot });
        }
        a.swap_rows(col, pivot_row);
        b.swap_rows(col, pivot_row);

        for r in col + 1..n {
            let factor = a.at(r, col) / pivot;
            if factor == 0.0 {
                continue;
            }
            *a.at_mut(r, col) = 0.0;
            for c in col + 1..n {
                let v = a.at(col, c);
                *a.at_mut(r, c) -= factor * v;
            }
            for c in 0..b.cols {
                let v = b.at(col, c);
                *b.at_mut(r, c) -= factor * v;
            }
        }
    }

    for col in (0..n).rev() {
        let pivot = a.at(col, col);
        for c in 0..b.cols {
            let mut acc = b.at(col, c);
            for k in col + 1..n {
                acc -= a.at(col, k) * b.at(k, c);
            }
            *b.at_mut(col, c) = acc / pivot;
        }
    }
    Ok(())
}
