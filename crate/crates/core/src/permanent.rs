//! Permanents of complex square matrices.
//!
//! The permanent is the determinant without sign alternation,
//!
//! ```text
//! per(A) = Σ_{σ ∈ Σ_N} Π_{s=1..N} A[σ(s), s],
//! ```
//!
//! and is the quantity whose squared modulus gives every detection rate in
//! this crate. Three kernels are provided:
//!
//! * [`naive`] — direct enumeration of all N! permutations. Exponentially
//!   slow, but simple enough to serve as the reference oracle. Capped at
//!   N = 10.
//! * [`ryser`] — Ryser's inclusion–exclusion formula with Gray-code subset
//!   iteration, O(2^N · N). The production default. Capped at N = 30.
//! * [`glynn`] — Glynn's ±1-vector formula, also Gray-coded and O(2^N · N).
//!   An independent cross-check for [`ryser`]. Capped at N = 30.
//!
//! The caps are hard errors, not silent truncation. All kernels agree to
//! relative 1e-9 on well-scaled inputs (entries O(1), N ≤ 12); accumulation
//! is plain f64 with no compensated summation.

use ndarray::{Array2, ArrayView2};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Hard cap for [`naive`] (factorial cost).
pub const NAIVE_MAX_ORDER: usize = 10;
/// Hard cap for [`ryser`] and [`glynn`] (2^N cost).
pub const FAST_MAX_ORDER: usize = 30;

/// A validated square matrix of finite complex entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    entries: Array2<Complex64>,
}

impl SquareMatrix {
    /// Wrap an array, checking that it is square, non-empty, and finite.
    pub fn new(entries: Array2<Complex64>) -> Result<Self> {
        let (rows, cols) = entries.dim();
        if rows == 0 {
            return Err(Error::InvalidDimension);
        }
        if rows != cols {
            return Err(Error::InvalidParameter(format!(
                "matrix must be square, got {rows}x{cols}"
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("matrix entry".into()));
        }
        Ok(Self { entries })
    }

    /// Build an `order` × `order` matrix from an entry function `f(row, col)`.
    pub fn from_fn(order: usize, f: impl FnMut((usize, usize)) -> Complex64) -> Result<Self> {
        Self::new(Array2::from_shape_fn((order, order), f))
    }

    pub fn order(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> ArrayView2<'_, Complex64> {
        self.entries.view()
    }

    /// Entry at (row, col).
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    pub fn transposed(&self) -> Self {
        Self {
            entries: self.entries.t().to_owned(),
        }
    }
}

/// Kernel selector for callers that configure the permanent evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Kernel {
    Naive,
    #[default]
    Ryser,
    Glynn,
}

impl Kernel {
    pub fn name(self) -> &'static str {
        match self {
            Kernel::Naive => "naive",
            Kernel::Ryser => "ryser",
            Kernel::Glynn => "glynn",
        }
    }

    pub fn compute(self, m: &SquareMatrix) -> Result<Complex64> {
        match self {
            Kernel::Naive => naive(m),
            Kernel::Ryser => ryser(m),
            Kernel::Glynn => glynn(m),
        }
    }

    /// Largest order this kernel accepts.
    pub fn max_order(self) -> usize {
        match self {
            Kernel::Naive => NAIVE_MAX_ORDER,
            Kernel::Ryser | Kernel::Glynn => FAST_MAX_ORDER,
        }
    }

    pub(crate) fn check_order(self, order: usize) -> Result<()> {
        if order > self.max_order() {
            return Err(Error::SizeLimit {
                kernel: self.name(),
                order,
                max: self.max_order(),
            });
        }
        Ok(())
    }

    // Raw dispatch for inner loops that have already passed check_order and
    // hold pre-validated entries.
    pub(crate) fn compute_view(self, a: &ArrayView2<'_, Complex64>) -> Complex64 {
        match self {
            Kernel::Naive => naive_rec(a, 0, 0),
            Kernel::Ryser => ryser_view(a),
            Kernel::Glynn => glynn_view(a),
        }
    }
}

impl std::str::FromStr for Kernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "naive" => Ok(Kernel::Naive),
            "ryser" => Ok(Kernel::Ryser),
            "glynn" => Ok(Kernel::Glynn),
            other => Err(Error::InvalidParameter(format!(
                "unknown permanent kernel {other:?} (expected naive, ryser, or glynn)"
            ))),
        }
    }
}

/// Direct permutation sum. The oracle the fast kernels are checked against.
pub fn naive(m: &SquareMatrix) -> Result<Complex64> {
    let n = m.order();
    if n > NAIVE_MAX_ORDER {
        return Err(Error::SizeLimit {
            kernel: "naive",
            order: n,
            max: NAIVE_MAX_ORDER,
        });
    }
    Ok(naive_rec(&m.entries(), 0, 0))
}

// Expands column by column: every free row choice for the current column,
// times the permanent of what remains.
fn naive_rec(a: &ArrayView2<'_, Complex64>, col: usize, used_rows: u32) -> Complex64 {
    let n = a.nrows();
    if col == n {
        return Complex64::new(1.0, 0.0);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for row in 0..n {
        if used_rows & (1 << row) == 0 {
            acc += a[(row, col)] * naive_rec(a, col + 1, used_rows | (1 << row));
        }
    }
    acc
}

/// Ryser's formula with Gray-code subset iteration.
///
/// per(A) = (-1)^N Σ_{∅≠S⊆[N]} (-1)^{|S|} Π_i Σ_{j∈S} A[i,j], where each
/// Gray-code step flips one column in or out of S and updates the row sums
/// in O(N).
pub fn ryser(m: &SquareMatrix) -> Result<Complex64> {
    check_fast_cap("ryser", m.order())?;
    Ok(ryser_view(&m.entries()))
}

pub(crate) fn ryser_view(a: &ArrayView2<'_, Complex64>) -> Complex64 {
    let n = a.nrows();
    let mut row_sums = vec![Complex64::new(0.0, 0.0); n];
    let mut total = Complex64::new(0.0, 0.0);
    let mut prev_gray: u64 = 0;
    for k in 1..(1u64 << n) {
        let gray = k ^ (k >> 1);
        let flipped = gray ^ prev_gray;
        let col = flipped.trailing_zeros() as usize;
        if gray & flipped != 0 {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s += a[(i, col)];
            }
        } else {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s -= a[(i, col)];
            }
        }
        let product: Complex64 = row_sums.iter().product();
        if gray.count_ones() % 2 == 1 {
            total -= product;
        } else {
            total += product;
        }
        prev_gray = gray;
    }
    if n % 2 == 1 {
        -total
    } else {
        total
    }
}

/// Glynn's formula with Gray-code sign-vector iteration.
///
/// per(A) = 2^{1-N} Σ_{δ∈{±1}^N, δ_1=+1} (Π_i δ_i) Π_j Σ_i δ_i A[i,j]; each
/// step flips one δ_i and updates the column sums in O(N).
pub fn glynn(m: &SquareMatrix) -> Result<Complex64> {
    check_fast_cap("glynn", m.order())?;
    Ok(glynn_view(&m.entries()))
}

pub(crate) fn glynn_view(a: &ArrayView2<'_, Complex64>) -> Complex64 {
    let n = a.nrows();
    let mut col_sums: Vec<Complex64> = (0..n)
        .map(|j| (0..n).map(|i| a[(i, j)]).sum())
        .collect();
    let mut total: Complex64 = col_sums.iter().product();
    let mut sign = 1.0;
    let mut prev_gray: u64 = 0;
    for k in 1..(1u64 << (n - 1)) {
        let gray = k ^ (k >> 1);
        let flipped = gray ^ prev_gray;
        // δ_0 stays +1; Gray bit b toggles δ_{b+1}.
        let row = flipped.trailing_zeros() as usize + 1;
        let step = if gray & flipped != 0 { -2.0 } else { 2.0 };
        for (j, s) in col_sums.iter_mut().enumerate() {
            *s += step * a[(row, j)];
        }
        sign = -sign;
        let product: Complex64 = col_sums.iter().product();
        total += sign * product;
        prev_gray = gray;
    }
    total / 2f64.powi(n as i32 - 1)
}

fn check_fast_cap(kernel: &'static str, order: usize) -> Result<()> {
    if order > FAST_MAX_ORDER {
        return Err(Error::SizeLimit {
            kernel,
            order,
            max: FAST_MAX_ORDER,
        });
    }
    Ok(())
}
