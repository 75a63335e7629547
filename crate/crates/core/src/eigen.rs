//! Dense Hermitian eigensolver (cyclic complex Jacobi).
//!
//! Matrices here are at most a few hundred rows, so accuracy and
//! orthogonality of the eigenvectors matter more than speed.

use crate::scalar::{cx, Cx, Real};

/// Square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix<T> {
    n: usize,
    data: Vec<Cx<T>>,
}

impl<T: Real> CMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![cx(T::zero(), T::zero()); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = cx(T::one(), T::zero());
        }
        m
    }

    pub fn from_rows(n: usize, data: Vec<Cx<T>>) -> Self {
        assert_eq!(data.len(), n * n, "matrix data must be n*n");
        Self { n, data }
    }

    pub fn from_diagonal(d: &[T]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = cx(v, T::zero());
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[Cx<T>] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let n = self.n;
        assert_eq!(n, other.n);
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Cx<T>]) -> Vec<Cx<T>> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut acc = cx(T::zero(), T::zero());
                for j in 0..n {
                    acc += self.data[i * n + j] * v[j];
                }
                acc
            })
            .collect()
    }

    /// `v† M v`, real part.
    pub fn quadratic_form(&self, v: &[Cx<T>]) -> T {
        let mv = self.mul_vec(v);
        v.iter().zip(&mv).map(|(a, b)| (a.conj() * b).re).sum()
    }

    pub fn trace(&self) -> Cx<T> {
        (0..self.n).map(|i| self[(i, i)]).fold(cx(T::zero(), T::zero()), |a, b| a + b)
    }

    /// Largest `|M - M†|` entry.
    pub fn hermitian_defect(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn scale(&self, f: T) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|v| v * f).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<T> core::ops::Index<(usize, usize)> for CMatrix<T> {
    type Output = Cx<T>;
    fn index(&self, (i, j): (usize, usize)) -> &Cx<T> {
        &self.data[i * self.n + j]
    }
}

impl<T> core::ops::IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Cx<T> {
        &mut self.data[i * self.n + j]
    }
}

/// Eigenvalues ascending; `vectors[k]` is the unit eigenvector of `values[k]`.
#[derive(Debug, Clone)]
pub struct HermitianEigen<T> {
    pub values: Vec<T>,
    pub vectors: Vec<Vec<Cx<T>>>,
}

/// Eigen-decomposition of a Hermitian matrix. Only the upper triangle's
/// Hermitian part is trusted; the input is symmetrized first.
pub fn hermitian_eigen<T: Real>(m: &CMatrix<T>) -> HermitianEigen<T> {
    let n = m.dim();
    let half = T::lit(0.5);
    let mut a = CMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = (m[(i, j)] + m[(j, i)].conj()) * half;
        }
    }
    let mut v = CMatrix::identity(n);
    let total: T = a.data.iter().map(|x| x.norm_sqr()).sum();
    let floor = T::epsilon() * T::epsilon() * total.max(T::min_positive_value());
    for _sweep in 0..100 {
        let mut off = T::zero();
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off <= floor {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag == T::zero() {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let phase = apq / mag;
                let theta = (aqq - app) / (T::lit(2.0) * mag);
                let t = if theta.is_infinite() {
                    T::zero()
                } else {
                    let sgn = if theta >= T::zero() { T::one() } else { -T::one() };
                    sgn / (theta.abs() + (theta * theta + T::one()).sqrt())
                };
                if t == T::zero() {
                    a[(p, q)] = cx(T::zero(), T::zero());
                    a[(q, p)] = cx(T::zero(), T::zero());
                    continue;
                }
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                // V = [[c, s e^{iφ}], [-s e^{-iφ}, c]] on (p, q)
                let vpq = phase * s;
                let vqp = -phase.conj() * s;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * c + akq * vqp;
                    a[(k, q)] = akp * vpq + akq * c;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = apk * c + aqk * vqp.conj();
                    a[(q, k)] = apk * vpq.conj() + aqk * c;
                }
                a[(p, q)] = cx(T::zero(), T::zero());
                a[(q, p)] = cx(T::zero(), T::zero());
                a[(p, p)] = cx(a[(p, p)].re, T::zero());
                a[(q, q)] = cx(a[(q, q)].re, T::zero());
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * c + vkq * vqp;
                    v[(k, q)] = vkp * vpq + vkq * c;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.partial_cmp(&a[(j, j)].re).unwrap_or(core::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = order
        .iter()
        .map(|&j| (0..n).map(|k| v[(k, j)]).collect())
        .collect();
    HermitianEigen { values, vectors }
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues<T: Real>(m: &CMatrix<T>) -> Vec<T> {
    hermitian_eigen(m).values
}
