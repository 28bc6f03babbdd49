//! Minimal dense linear algebra: a square matrix type and a symmetric
//! eigensolver (Householder tridiagonalization followed by implicit-shift QL,
//! after the classic EISPACK tred2/tql2 pair).

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense square matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(n: usize) -> Self {
        Matrix { n, data: vec![T::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// y = M x
    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(&a, &b)| a * b).sum())
            .collect()
    }

    /// max_ij |M_ij - M_ji|
    pub fn max_asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let d = (self[(i, j)] - self[(j, i)]).abs();
                if d > worst {
                    worst = d;
                }
            }
        }
        worst
    }

    /// max_ij |M_ij|
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    /// Column j (used for eigenvector extraction).
    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.n).map(|i| self[(i, j)]).collect()
    }
}

impl<T> std::ops::Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

/// Eigenvalues (ascending) and, when requested, the matching orthonormal
/// eigenvectors as matrix columns.
#[derive(Debug, Clone)]
pub struct Eigen<T> {
    pub values: Vec<T>,
    pub vectors: Option<Matrix<T>>,
}

/// Symmetric eigendecomposition. `m` must be exactly symmetric (assembled
/// matrices in this crate write both triangles from the same expression).
pub fn symmetric_eigen<T: Scalar>(m: &Matrix<T>, want_vectors: bool) -> Result<Eigen<T>> {
    if m.max_asymmetry() > T::zero() {
        return Err(Error::Numerical(
            "symmetric eigensolver given a non-symmetric matrix".into(),
        ));
    }
    let n = m.dim();
    if n == 0 {
        return Ok(Eigen { values: vec![], vectors: None });
    }
    let mut a = m.clone();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tred2(&mut a, &mut d, &mut e, want_vectors);
    tql2(&mut d, &mut e, if want_vectors { Some(&mut a) } else { None })?;

    // sort ascending, stable in the original order
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).expect("eigenvalue is NaN"));
    let values: Vec<T> = order.iter().map(|&i| d[i]).collect();
    let vectors = if want_vectors {
        let mut v = Matrix::zeros(n);
        for (new_j, &old_j) in order.iter().enumerate() {
            for i in 0..n {
                v[(i, new_j)] = a[(i, old_j)];
            }
        }
        Some(v)
    } else {
        None
    };
    Ok(Eigen { values, vectors })
}

/// Householder reduction of a real symmetric matrix to tridiagonal form.
/// On exit `d` holds the diagonal, `e[1..]` the subdiagonal; if `with_vectors`
/// the accumulated orthogonal transform replaces `a`.
fn tred2<T: Scalar>(a: &mut Matrix<T>, d: &mut [T], e: &mut [T], with_vectors: bool) {
    let n = a.dim();
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = T::zero();
        if l > 0 {
            let mut scale = T::zero();
            for k in 0..=l {
                scale = scale + a[(i, k)].abs();
            }
            if scale == T::zero() {
                e[i] = a[(i, l)];
            } else {
                for k in 0..=l {
                    a[(i, k)] = a[(i, k)] / scale;
                    h = h + a[(i, k)] * a[(i, k)];
                }
                let f = a[(i, l)];
                let g = if f >= T::zero() { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h = h - f * g;
                a[(i, l)] = f - g;
                let mut ff = T::zero();
                for j in 0..=l {
                    if with_vectors {
                        a[(j, i)] = a[(i, j)] / h;
                    }
                    let mut g = T::zero();
                    for k in 0..=j {
                        g = g + a[(j, k)] * a[(i, k)];
                    }
                    for k in (j + 1)..=l {
                        g = g + a[(k, j)] * a[(i, k)];
                    }
                    e[j] = g / h;
                    ff = ff + e[j] * a[(i, j)];
                }
                let hh = ff / (h + h);
                for j in 0..=l {
                    let f = a[(i, j)];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        let upd = a[(j, k)] - (f * e[k] + g * a[(i, k)]);
                        a[(j, k)] = upd;
                    }
                }
            }
        } else {
            e[i] = a[(i, l)];
        }
        d[i] = h;
    }
    if with_vectors {
        d[0] = T::zero();
    }
    e[0] = T::zero();
    for i in 0..n {
        if with_vectors {
            if d[i] != T::zero() {
                // d[i] holds h for transformed rows; apply stored transform
                for j in 0..i {
                    let mut g = T::zero();
                    for k in 0..i {
                        g = g + a[(i, k)] * a[(k, j)];
                    }
                    for k in 0..i {
                        let upd = a[(k, j)] - g * a[(k, i)];
                        a[(k, j)] = upd;
                    }
                }
            }
            d[i] = a[(i, i)];
            a[(i, i)] = T::one();
            for j in 0..i {
                a[(j, i)] = T::zero();
                a[(i, j)] = T::zero();
            }
        } else {
            d[i] = a[(i, i)];
        }
    }
}

/// sqrt(a^2 + b^2) without destructive overflow.
fn hypot<T: Scalar>(a: T, b: T) -> T {
    let (a, b) = (a.abs(), b.abs());
    let (big, small) = if a > b { (a, b) } else { (b, a) };
    if big == T::zero() {
        return T::zero();
    }
    let r = small / big;
    big * (T::one() + r * r).sqrt()
}

/// Implicit-shift QL on a symmetric tridiagonal matrix, optionally rotating
/// the accumulated transform `z` so its columns become eigenvectors.
fn tql2<T: Scalar>(d: &mut [T], e: &mut [T], mut z: Option<&mut Matrix<T>>) -> Result<()> {
    let n = d.len();
    if n == 1 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();
    for l in 0..n {
        let mut iter = 0usize;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= T::epsilon() * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 64 {
                return Err(Error::Numerical(format!(
                    "QL iteration failed to converge at eigenvalue index {l}"
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (T::two() * e[l]);
            let mut r = hypot(g, T::one());
            let sign_r = if g >= T::zero() { r } else { -r };
            g = d[m] - d[l] + e[l] / (g + sign_r);
            let mut s = T::one();
            let mut c = T::one();
            let mut p = T::zero();
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = hypot(f, g);
                e[i + 1] = r;
                if r == T::zero() {
                    d[i + 1] = d[i + 1] - p;
                    e[m] = T::zero();
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + T::two() * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(zz) = z.as_deref_mut() {
                    for k in 0..n {
                        f = zz[(k, i + 1)];
                        zz[(k, i + 1)] = s * zz[(k, i)] + c * f;
                        zz[(k, i)] = c * zz[(k, i)] - s * f;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] = d[l] - p;
            e[l] = g;
            e[m] = T::zero();
        }
    }
    Ok(())
}
