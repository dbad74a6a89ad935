//! Exact rational arithmetic for tableau entries and B-series coefficients.
//!
//! All coefficient identities (symmetry blocks, parasitism products, order
//! conditions) are evaluated in rationals so that a zero residual is exact,
//! not a small float. Entries involving square roots (a few starting
//! tableaux) are carried as tagged floats and checked at 1e-13 instead.

use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Exact rational scalar. `i128` limbs leave ample headroom for the
/// denominators that arise from order-5 B-series products.
pub type Rat = Ratio<i128>;

/// Shorthand constructor for `n/d`.
pub fn rat(n: i128, d: i128) -> Rat {
    Rat::new(n, d)
}

/// Integer as a rational.
pub fn rint(n: i128) -> Rat {
    Rat::from_integer(n)
}

/// Render a rational the way coefficient tables are usually printed:
/// `0`, `1`, `-1/3`, `25/48`.
pub fn rat_str(x: &Rat) -> String {
    if x.denom() == &1 {
        format!("{}", x.numer())
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// A tableau entry: exact rational, or an irrational value (such as a
/// rational multiple of a square root) carried in binary64 with a tag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coeff {
    Exact(Rat),
    /// Irrational entry; identity checks involving it use tolerance 1e-13.
    Surd(f64),
}

impl Coeff {
    pub fn zero() -> Self {
        Coeff::Exact(Rat::zero())
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Coeff::Exact(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Coeff::Exact(r) => r.to_f64().unwrap(),
            Coeff::Surd(v) => *v,
        }
    }

    pub fn as_exact(&self) -> Option<Rat> {
        match self {
            Coeff::Exact(r) => Some(*r),
            Coeff::Surd(_) => None,
        }
    }
}

impl From<Rat> for Coeff {
    fn from(r: Rat) -> Self {
        Coeff::Exact(r)
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coeff::Exact(r) => write!(f, "{}", rat_str(r)),
            Coeff::Surd(v) => write!(f, "{v:.12}"),
        }
    }
}

macro_rules! coeff_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Coeff {
            type Output = Coeff;
            fn $method(self, rhs: Coeff) -> Coeff {
                match (self, rhs) {
                    (Coeff::Exact(a), Coeff::Exact(b)) => Coeff::Exact(a.$method(b)),
                    (a, b) => Coeff::Surd(a.to_f64().$method(b.to_f64())),
                }
            }
        }
    };
}

coeff_binop!(Add, add);
coeff_binop!(Sub, sub);
coeff_binop!(Mul, mul);
coeff_binop!(Div, div);

impl Neg for Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        match self {
            Coeff::Exact(r) => Coeff::Exact(-r),
            Coeff::Surd(v) => Coeff::Surd(-v),
        }
    }
}

/// Dense matrix of exact rationals. Sizes here are tiny (at most 5x5),
/// so no attention is paid to allocation or pivoting cost.
#[derive(Debug, Clone, PartialEq)]
pub struct RatMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Rat>,
}

impl RatMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMat {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = RatMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = rint(1);
        }
        m
    }

    /// Build from rows of `(numerator, denominator)` pairs.
    pub fn from_i128(rows: &[&[(i128, i128)]]) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        let mut m = RatMat::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged matrix literal");
            for (j, &(n, d)) in row.iter().enumerate() {
                m[(i, j)] = rat(n, d);
            }
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        let mut m = RatMat::zeros(r, c);
        for (i, row) in rows.into_iter().enumerate() {
            assert_eq!(row.len(), c, "ragged matrix");
            for (j, v) in row.into_iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn diag(entries: &[Rat]) -> Self {
        let n = entries.len();
        let mut m = RatMat::zeros(n, n);
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    /// Stage-reversing permutation: (Pv)_i = v_{s+1-i}.
    pub fn reversal(n: usize) -> Self {
        let mut m = RatMat::zeros(n, n);
        for i in 0..n {
            m[(i, n - 1 - i)] = rint(1);
        }
        m
    }

    pub fn column(&self, j: usize) -> Vec<Rat> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn row(&self, i: usize) -> Vec<Rat> {
        (0..self.cols).map(|j| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut m = RatMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)];
            }
        }
        m
    }

    pub fn mul(&self, other: &RatMat) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        let mut m = RatMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = Rat::zero();
                for k in 0..self.cols {
                    acc += self[(i, k)] * other[(k, j)];
                }
                m[(i, j)] = acc;
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn add(&self, other: &RatMat) -> Self {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &RatMat) -> Self {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, s: Rat) -> Self {
        let mut m = self.clone();
        for v in &mut m.data {
            *v *= s;
        }
        m
    }

    fn zip(&self, other: &RatMat, f: impl Fn(Rat, Rat) -> Rat) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut m = RatMat::zeros(self.rows, self.cols);
        for i in 0..self.data.len() {
            m.data[i] = f(self.data[i], other.data[i]);
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    /// Largest entry magnitude, reported as a float for residual logging.
    pub fn max_abs_f64(&self) -> f64 {
        self.data
            .iter()
            .map(|v| v.abs().to_f64().unwrap())
            .fold(0.0, f64::max)
    }

    /// Solve `self * x = rhs` by exact Gaussian elimination.
    /// Returns `None` when the matrix is singular.
    pub fn solve(&self, rhs: &[Rat]) -> Option<Vec<Rat>> {
        assert_eq!(self.rows, self.cols);
        assert_eq!(self.rows, rhs.len());
        let n = self.rows;
        let mut a = self.clone();
        let mut b = rhs.to_vec();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !a[(r, col)].is_zero())?;
            if pivot != col {
                for j in 0..n {
                    let tmp = a[(col, j)];
                    a[(col, j)] = a[(pivot, j)];
                    a[(pivot, j)] = tmp;
                }
                b.swap(col, pivot);
            }
            let p = a[(col, col)];
            for r in 0..n {
                if r != col && !a[(r, col)].is_zero() {
                    let factor = a[(r, col)] / p;
                    for j in col..n {
                        let v = a[(col, j)];
                        a[(r, j)] -= factor * v;
                    }
                    let bv = b[col];
                    b[r] -= factor * bv;
                }
            }
        }
        Some((0..n).map(|i| b[i] / a[(i, i)]).collect())
    }

    /// Exact inverse, or `None` if singular.
    pub fn inverse(&self) -> Option<RatMat> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            let mut e = vec![Rat::zero(); n];
            e[j] = rint(1);
            cols.push(self.solve(&e)?);
        }
        let mut m = RatMat::zeros(n, n);
        for (j, col) in cols.iter().enumerate() {
            for i in 0..n {
                m[(i, j)] = col[i];
            }
        }
        Some(m)
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)].to_f64().unwrap()).collect())
            .collect()
    }

    /// True if every off-diagonal entry vanishes.
    pub fn is_diagonal(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows)
                .all(|i| (0..self.cols).all(|j| i == j || self[(i, j)].is_zero()))
    }

    /// True if `self` is a 0/1 permutation matrix.
    pub fn is_permutation(&self) -> bool {
        if self.rows != self.cols {
            return false;
        }
        let one = rint(1);
        for i in 0..self.rows {
            let mut row_ones = 0;
            for j in 0..self.cols {
                let v = self[(i, j)];
                if v == one {
                    row_ones += 1;
                } else if !v.is_zero() {
                    return false;
                }
            }
            if row_ones != 1 {
                return false;
            }
        }
        (0..self.cols).all(|j| (0..self.rows).filter(|&i| self[(i, j)] == one).count() == 1)
    }
}

impl std::ops::Index<(usize, usize)> for RatMat {
    type Output = Rat;
    fn index(&self, (i, j): (usize, usize)) -> &Rat {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RatMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Rat {
        &mut self.data[i * self.cols + j]
    }
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Matrix of tableau entries. Pure storage: computations happen on the
/// exact rational view (when every entry is exact) or the float view.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<Coeff>,
}

impl CoeffMat {
    pub fn exact(m: &RatMat) -> Self {
        let mut data = Vec::with_capacity(m.rows * m.cols);
        for i in 0..m.rows {
            for j in 0..m.cols {
                data.push(Coeff::Exact(m[(i, j)]));
            }
        }
        CoeffMat {
            rows: m.rows,
            cols: m.cols,
            data,
        }
    }

    pub fn from_i128(rows: &[&[(i128, i128)]]) -> Self {
        CoeffMat::exact(&RatMat::from_i128(rows))
    }

    pub fn from_rows(rows: Vec<Vec<Coeff>>) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged matrix");
            data.extend(row);
        }
        CoeffMat {
            rows: r,
            cols: c,
            data,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.data.iter().all(Coeff::is_exact)
    }

    /// Exact rational view, available only when every entry is exact.
    pub fn to_rat(&self) -> Option<RatMat> {
        let mut m = RatMat::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = self[(i, j)].as_exact()?;
            }
        }
        Some(m)
    }

    pub fn to_f64(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)].to_f64()).collect())
            .collect()
    }
}

impl std::ops::Index<(usize, usize)> for CoeffMat {
    type Output = Coeff;
    fn index(&self, (i, j): (usize, usize)) -> &Coeff {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CoeffMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Coeff {
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_and_inverse_roundtrip() {
        let m = RatMat::from_i128(&[&[(2, 1), (1, 1)], &[(1, 1), (3, 1)]]);
        let x = m.solve(&[rat(1, 1), rat(0, 1)]).unwrap();
        assert_eq!(x, vec![rat(3, 5), rat(-1, 5)]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), RatMat::identity(2));
    }

    #[test]
    fn singular_matrix_detected() {
        let m = RatMat::from_i128(&[&[(1, 1), (2, 1)], &[(2, 1), (4, 1)]]);
        assert!(m.solve(&[rint(1), rint(1)]).is_none());
    }

    #[test]
    fn reversal_is_involution() {
        let p = RatMat::reversal(4);
        assert!(p.is_permutation());
        assert_eq!(p.mul(&p), RatMat::identity(4));
    }

    #[test]
    fn coeff_arithmetic_degrades_to_float() {
        let a = Coeff::Exact(rat(1, 3));
        let b = Coeff::Surd(2.0_f64.sqrt());
        assert!((a * b).to_f64() - 2.0_f64.sqrt() / 3.0 < 1e-15);
        assert!(!(a * b).is_exact());
        assert_eq!(a + Coeff::Exact(rat(2, 3)), Coeff::Exact(rint(1)));
    }
}
