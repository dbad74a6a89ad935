//! Small dense float and complex matrix kernels.
//!
//! Everything here operates on matrices no larger than 5x5 (stage and value
//! counts of the registered methods), so plain Gaussian elimination with
//! partial pivoting is used throughout. Eigenvalues are taken from the
//! closed-form quadratic for 2x2 and from the characteristic polynomial with
//! a Durand-Kerner root finder for 3x3 and 4x4; no external eigensolver.

use num_complex::Complex64;
use num_traits::Zero;

pub type C64 = Complex64;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            data: vec![C64::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_real(a: &[Vec<f64>]) -> Self {
        let rows = a.len();
        let cols = a[0].len();
        let mut m = CMat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = C64::new(a[i][j], 0.0);
            }
        }
        m
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        let mut m = CMat::zeros(n, n);
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    pub fn mul(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows);
        let mut m = CMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let v = self[(i, k)];
                if v.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    m[(i, j)] += v * other[(k, j)];
                }
            }
        }
        m
    }

    pub fn add(&self, other: &CMat) -> CMat {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &CMat) -> CMat {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, s: C64) -> CMat {
        let mut m = self.clone();
        for v in &mut m.data {
            *v *= s;
        }
        m
    }

    pub fn transpose(&self) -> CMat {
        let mut m = CMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)];
            }
        }
        m
    }

    fn zip(&self, other: &CMat, f: impl Fn(C64, C64) -> C64) -> CMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut m = CMat::zeros(self.rows, self.cols);
        for i in 0..self.data.len() {
            m.data[i] = f(self.data[i], other.data[i]);
        }
        m
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Solve `self * X = B` for a matrix right-hand side.
    /// Returns `None` when a pivot falls below `tiny` relative to the scale.
    pub fn solve_mat(&self, b: &CMat) -> Option<CMat> {
        assert_eq!(self.rows, self.cols);
        assert_eq!(self.rows, b.rows);
        let n = self.rows;
        let tiny = 1e-300;
        let mut a = self.clone();
        let mut x = b.clone();
        for col in 0..n {
            let (pivot, pmag) = (col..n)
                .map(|r| (r, a[(r, col)].norm()))
                .max_by(|u, v| u.1.total_cmp(&v.1))
                .unwrap();
            if pmag < tiny {
                return None;
            }
            if pivot != col {
                for j in 0..n {
                    let t = a[(col, j)];
                    a[(col, j)] = a[(pivot, j)];
                    a[(pivot, j)] = t;
                }
                for j in 0..x.cols {
                    let t = x[(col, j)];
                    x[(col, j)] = x[(pivot, j)];
                    x[(pivot, j)] = t;
                }
            }
            let p = a[(col, col)];
            for r in 0..n {
                if r != col {
                    let f = a[(r, col)] / p;
                    if f.is_zero() {
                        continue;
                    }
                    for j in col..n {
                        let v = a[(col, j)];
                        a[(r, j)] -= f * v;
                    }
                    for j in 0..x.cols {
                        let v = x[(col, j)];
                        x[(r, j)] -= f * v;
                    }
                }
            }
        }
        for i in 0..n {
            let p = a[(i, i)];
            for j in 0..x.cols {
                x[(i, j)] /= p;
            }
        }
        Some(x)
    }

    pub fn det(&self) -> C64 {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut a = self.clone();
        let mut det = C64::new(1.0, 0.0);
        for col in 0..n {
            let (pivot, pmag) = (col..n)
                .map(|r| (r, a[(r, col)].norm()))
                .max_by(|u, v| u.1.total_cmp(&v.1))
                .unwrap();
            if pmag == 0.0 {
                return C64::zero();
            }
            if pivot != col {
                for j in 0..n {
                    let t = a[(col, j)];
                    a[(col, j)] = a[(pivot, j)];
                    a[(pivot, j)] = t;
                }
                det = -det;
            }
            let p = a[(col, col)];
            det *= p;
            for r in col + 1..n {
                let f = a[(r, col)] / p;
                for j in col..n {
                    let v = a[(col, j)];
                    a[(r, j)] -= f * v;
                }
            }
        }
        det
    }

    /// Trace of the matrix.
    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Eigenvalues for n <= 4. Closed form for n <= 2; characteristic
    /// polynomial (Faddeev-LeVerrier) plus Durand-Kerner otherwise.
    pub fn eigenvalues(&self) -> Vec<C64> {
        assert_eq!(self.rows, self.cols);
        match self.rows {
            0 => vec![],
            1 => vec![self[(0, 0)]],
            2 => {
                let tr = self[(0, 0)] + self[(1, 1)];
                let det = self[(0, 0)] * self[(1, 1)] - self[(0, 1)] * self[(1, 0)];
                let disc = (tr * tr - 4.0 * det).sqrt();
                vec![(tr + disc) * 0.5, (tr - disc) * 0.5]
            }
            n if n <= 4 => durand_kerner(&self.char_poly()),
            n => panic!("eigenvalues only implemented for n <= 4, got {n}"),
        }
    }

    /// Monic characteristic polynomial coefficients `[c0, c1, ..., c_{n-1}, 1]`
    /// via the Faddeev-LeVerrier recursion.
    fn char_poly(&self) -> Vec<C64> {
        let n = self.rows;
        let mut coeffs = vec![C64::zero(); n + 1];
        coeffs[n] = C64::new(1.0, 0.0);
        let mut m = CMat::identity(n);
        for k in 1..=n {
            m = self.mul(&m);
            let c = -m.trace() / (k as f64);
            coeffs[n - k] = c;
            for i in 0..n {
                m[(i, i)] += c;
            }
        }
        coeffs
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// All roots of a monic polynomial (coefficients low-to-high, last = 1)
/// by Durand-Kerner iteration.
fn durand_kerner(coeffs: &[C64]) -> Vec<C64> {
    let n = coeffs.len() - 1;
    let eval = |z: C64| -> C64 {
        let mut acc = C64::zero();
        for &c in coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    };
    // Standard non-real starting points on a spiral.
    let seed = C64::new(0.4, 0.9);
    let mut roots: Vec<C64> = (0..n).map(|k| seed.powu(k as u32 + 1)).collect();
    for _ in 0..200 {
        let mut delta: f64 = 0.0;
        for i in 0..n {
            let mut denom = C64::new(1.0, 0.0);
            for j in 0..n {
                if j != i {
                    denom *= roots[i] - roots[j];
                }
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    roots
}

// ---------------------------------------------------------------------------
// Real helpers used by the integrator.
// ---------------------------------------------------------------------------

/// Solve the real system `a x = b` in place (partial pivoting).
/// `a` is row-major `n x n`. Returns `false` if singular.
pub fn solve_real(a: &mut [f64], b: &mut [f64], n: usize) -> bool {
    for col in 0..n {
        let mut pivot = col;
        let mut pmag = a[col * n + col].abs();
        for r in col + 1..n {
            let m = a[r * n + col].abs();
            if m > pmag {
                pivot = r;
                pmag = m;
            }
        }
        if pmag == 0.0 {
            return false;
        }
        if pivot != col {
            for j in 0..n {
                a.swap(col * n + j, pivot * n + j);
            }
            b.swap(col, pivot);
        }
        let p = a[col * n + col];
        for r in 0..n {
            if r != col {
                let f = a[r * n + col] / p;
                if f == 0.0 {
                    continue;
                }
                for j in col..n {
                    a[r * n + j] -= f * a[col * n + j];
                }
                b[r] -= f * b[col];
            }
        }
    }
    for i in 0..n {
        b[i] /= a[i * n + i];
    }
    true
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_2x2_match_hand_computation() {
        // [[2, 1], [1, 2]] has eigenvalues 3 and 1.
        let m = CMat::from_real(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let mut eig: Vec<f64> = m.eigenvalues().iter().map(|z| z.re).collect();
        eig.sort_by(f64::total_cmp);
        assert!((eig[0] - 1.0).abs() < 1e-14);
        assert!((eig[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn eigenvalues_4x4_companion() {
        // Companion of (z-1)(z-2)(z-3)(z-4).
        let m = CMat::from_real(&[
            vec![0.0, 0.0, 0.0, -24.0],
            vec![1.0, 0.0, 0.0, 50.0],
            vec![0.0, 1.0, 0.0, -35.0],
            vec![0.0, 0.0, 1.0, 10.0],
        ]);
        let mut eig: Vec<f64> = m.eigenvalues().iter().map(|z| z.re).collect();
        eig.sort_by(f64::total_cmp);
        for (k, &e) in eig.iter().enumerate() {
            assert!((e - (k as f64 + 1.0)).abs() < 1e-9, "root {k}: {e}");
        }
    }

    #[test]
    fn complex_solve_inverts() {
        let m = CMat::from_real(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let inv = m.solve_mat(&CMat::identity(2)).unwrap();
        let prod = m.mul(&inv);
        assert!(prod.sub(&CMat::identity(2)).max_abs() < 1e-14);
    }

    #[test]
    fn real_solve_small_system() {
        let mut a = vec![2.0, 1.0, 1.0, 3.0];
        let mut b = vec![1.0, 0.0];
        assert!(solve_real(&mut a, &mut b, 2));
        assert!((b[0] - 0.6).abs() < 1e-15);
        assert!((b[1] + 0.2).abs() < 1e-15);
    }
}
