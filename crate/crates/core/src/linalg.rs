//! Dense complex symmetric matrices of small dimension (d ≤ 3 in practice)
//! with just enough linear algebra for the Gaussian flow: products,
//! symmetrization, and eigenvalues/determinant of the real part via
//! cyclic Jacobi rotations.

use crate::{cast, Real};
use num_complex::Complex;

/// Complex d×d matrix, row-major. The Gaussian flow keeps it symmetric.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T> {
    pub dim: usize,
    pub data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        CMatrix { dim, data: vec![Complex::new(T::zero(), T::zero()); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = Complex::new(T::one(), T::zero());
        }
        m
    }

    pub fn scaled_identity(dim: usize, s: Complex<T>) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = s;
        }
        m
    }

    pub fn from_rows(rows: &[&[Complex<T>]]) -> Self {
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), dim);
            for (j, &v) in r.iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self[(i, k)];
                for j in 0..d {
                    out[(i, j)] += a * rhs[(k, j)];
                }
            }
        }
        out
    }

    /// A ← (A + Aᵀ)/2. The matrix ODE preserves symmetry exactly; the
    /// integrator only approximately, so trajectories re-symmetrize.
    pub fn symmetrize(&mut self) {
        let half = cast::<T>(0.5);
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                let m = (self[(i, j)] + self[(j, i)]) * half;
                self[(i, j)] = m;
                self[(j, i)] = m;
            }
        }
    }

    /// max |A_ij − A_ji|
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)]).norm());
            }
        }
        worst
    }

    pub fn re(&self) -> SymMatrix<T> {
        SymMatrix { dim: self.dim, data: self.data.iter().map(|z| z.re).collect() }
    }

    /// Entrywise max modulus of A − B.
    pub fn max_abs_diff(&self, rhs: &Self) -> T {
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (*a - *b).norm())
            .fold(T::zero(), T::max)
    }

    /// xᵀ A x for a real vector x (A need not be Hermitian).
    pub fn quadratic_form(&self, x: &[T]) -> Complex<T> {
        let d = self.dim;
        assert_eq!(x.len(), d);
        let mut acc = Complex::new(T::zero(), T::zero());
        for i in 0..d {
            for j in 0..d {
                acc += self[(i, j)] * (x[i] * x[j]);
            }
        }
        acc
    }
}

impl<T> std::ops::Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.dim + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.dim + j]
    }
}

/// Real symmetric d×d matrix, row-major (only the API cares; full storage).
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix<T> {
    pub dim: usize,
    pub data: Vec<T>,
}

impl<T: Real> SymMatrix<T> {
    pub fn at(&self, i: usize, j: usize) -> T {
        self.data[i * self.dim + j]
    }

    pub fn trace(&self) -> T {
        (0..self.dim).fold(T::zero(), |s, i| s + self.at(i, i))
    }

    /// Eigenvalues by the cyclic Jacobi method, ascending. For the d ≤ 3
    /// matrices of the Gaussian flow this converges in a handful of sweeps
    /// to machine precision.
    pub fn eigenvalues(&self) -> Vec<T> {
        let d = self.dim;
        if d == 1 {
            return vec![self.data[0]];
        }
        let mut a = self.data.clone();
        let idx = |i: usize, j: usize| i * d + j;
        for _sweep in 0..64 {
            let mut off = T::zero();
            for i in 0..d {
                for j in (i + 1)..d {
                    off += a[idx(i, j)] * a[idx(i, j)];
                }
            }
            if off.sqrt() <= T::epsilon() * self.frobenius().max(T::min_positive_value()) {
                break;
            }
            for p in 0..d {
                for q in (p + 1)..d {
                    let apq = a[idx(p, q)];
                    if apq == T::zero() {
                        continue;
                    }
                    let app = a[idx(p, p)];
                    let aqq = a[idx(q, q)];
                    let theta = (aqq - app) / (cast::<T>(2.0) * apq);
                    let t = {
                        let s = if theta >= T::zero() { T::one() } else { -T::one() };
                        s / (theta.abs() + (theta * theta + T::one()).sqrt())
                    };
                    let c = T::one() / (t * t + T::one()).sqrt();
                    let s = t * c;
                    for k in 0..d {
                        let akp = a[idx(k, p)];
                        let akq = a[idx(k, q)];
                        a[idx(k, p)] = c * akp - s * akq;
                        a[idx(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..d {
                        let apk = a[idx(p, k)];
                        let aqk = a[idx(q, k)];
                        a[idx(p, k)] = c * apk - s * aqk;
                        a[idx(q, k)] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut ev: Vec<T> = (0..d).map(|i| a[idx(i, i)]).collect();
        ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
        ev
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues()[0]
    }

    pub fn det(&self) -> T {
        self.eigenvalues().into_iter().fold(T::one(), |p, e| p * e)
    }

    fn frobenius(&self) -> T {
        self.data.iter().fold(T::zero(), |s, &x| s + x * x).sqrt()
    }
}
