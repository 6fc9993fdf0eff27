//! Small dense matrices and affine maps, in exact-rational and f64 flavors.
//!
//! The exact side covers nilpotent exponentials (polynomial flows); the
//! numeric side provides a scaling-and-squaring matrix exponential for the
//! general affine case.

use crate::error::{Error, Result};
use crate::rat::{factorial, rone, rzero, to_f64, Rat};

/// Dense n x n rational matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RatMat {
    pub n: usize,
    pub a: Vec<Rat>,
}

impl RatMat {
    pub fn zero(n: usize) -> Self {
        RatMat {
            n,
            a: vec![rzero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n);
        for i in 0..n {
            m.a[i * n + i] = rone();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Rat>>) -> Result<Self> {
        let n = rows.len();
        for r in &rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch(n, r.len()));
            }
        }
        Ok(RatMat {
            n,
            a: rows.into_iter().flatten().collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.a[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        self.a[i * self.n + j] = v;
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        RatMat {
            n: self.n,
            a: self.a.iter().zip(&other.a).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        RatMat {
            n: self.n,
            a: self.a.iter().map(|x| x * c).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zero(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.get(i, k);
                if num_traits::Zero::is_zero(aik) {
                    continue;
                }
                for j in 0..n {
                    let v = out.get(i, j) + aik * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        let n = self.n;
        (0..n)
            .map(|i| (0..n).map(|j| self.get(i, j) * &v[j]).fold(rzero(), |a, b| a + b))
            .collect()
    }

    pub fn trace(&self) -> Rat {
        (0..self.n).map(|i| self.get(i, i).clone()).fold(rzero(), |a, b| a + b)
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().all(num_traits::Zero::is_zero)
    }

    /// Smallest k <= n with A^k = 0, if any.
    pub fn nilpotency_index(&self) -> Option<usize> {
        let mut p = Self::identity(self.n);
        for k in 0..=self.n {
            if p.is_zero() {
                return Some(k);
            }
            p = p.mul(self);
        }
        if p.is_zero() {
            Some(self.n)
        } else {
            None
        }
    }

    pub fn is_nilpotent(&self) -> bool {
        self.nilpotency_index().is_some()
    }

    /// Determinant by fraction-free-ish Gaussian elimination.
    pub fn det(&self) -> Rat {
        let n = self.n;
        let mut m = self.a.clone();
        let mut det = rone();
        for col in 0..n {
            let pivot = (col..n).find(|&r| !num_traits::Zero::is_zero(&m[r * n + col]));
            let Some(p) = pivot else {
                return rzero();
            };
            if p != col {
                for j in 0..n {
                    m.swap(p * n + j, col * n + j);
                }
                det = -det;
            }
            let pv = m[col * n + col].clone();
            det *= &pv;
            for r in (col + 1)..n {
                let f = &m[r * n + col] / &pv;
                for j in col..n {
                    let v = &m[r * n + j] - &f * &m[col * n + j];
                    m[r * n + j] = v;
                }
            }
        }
        det
    }

    /// Inverse by Gauss-Jordan; errors on a singular matrix.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.n;
        let mut m = self.a.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| !num_traits::Zero::is_zero(&m[r * n + col]));
            let Some(p) = pivot else {
                return Err(Error::NotInvertible);
            };
            if p != col {
                for j in 0..n {
                    m.swap(p * n + j, col * n + j);
                    inv.a.swap(p * n + j, col * n + j);
                }
            }
            let pv = m[col * n + col].clone();
            for j in 0..n {
                m[col * n + j] = &m[col * n + j] / &pv;
                inv.a[col * n + j] = &inv.a[col * n + j] / &pv;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = m[r * n + col].clone();
                if num_traits::Zero::is_zero(&f) {
                    continue;
                }
                for j in 0..n {
                    let v = &m[r * n + j] - &f * &m[col * n + j];
                    m[r * n + j] = v;
                    let w = &inv.a[r * n + j] - &f * &inv.a[col * n + j];
                    inv.a[r * n + j] = w;
                }
            }
        }
        Ok(inv)
    }

    /// exp(A) for nilpotent A: the series terminates.
    pub fn exp_nilpotent(&self) -> Result<Self> {
        let k = self.nilpotency_index().ok_or(Error::NotNilpotent)?;
        let mut acc = Self::identity(self.n);
        let mut pw = Self::identity(self.n);
        for j in 1..k {
            pw = pw.mul(self);
            acc = acc.add(&pw.scale(&(rone() / factorial(j as u32))));
        }
        Ok(acc)
    }

    pub fn to_f64(&self) -> FMat {
        FMat {
            n: self.n,
            a: self.a.iter().map(to_f64).collect(),
        }
    }
}

/// Dense n x n f64 matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FMat {
    pub n: usize,
    pub a: Vec<f64>,
}

impl FMat {
    pub fn zero(n: usize) -> Self {
        FMat { n, a: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n);
        for i in 0..n {
            m.a[i * n + i] = 1.0;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] = v;
    }

    pub fn scale(&self, c: f64) -> Self {
        FMat {
            n: self.n,
            a: self.a.iter().map(|x| x * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        FMat {
            n: self.n,
            a: self.a.iter().zip(&other.a).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.n;
        let mut out = Self::zero(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.get(i, k);
                if aik == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.a[i * n + j] += aik * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| (0..n).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    fn max_abs(&self) -> f64 {
        self.a.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// exp(A) by scaling-and-squaring with a truncated Taylor series.
    pub fn expm(&self) -> Self {
        let norm = self.max_abs() * self.n as f64;
        let s = if norm > 0.5 {
            (norm / 0.5).log2().ceil() as u32
        } else {
            0
        };
        let scaled = self.scale(0.5f64.powi(s as i32));
        let mut acc = Self::identity(self.n);
        let mut term = Self::identity(self.n);
        for j in 1..30 {
            term = term.mul(&scaled).scale(1.0 / j as f64);
            acc = acc.add(&term);
            if term.max_abs() < 1e-18 {
                break;
            }
        }
        let mut out = acc;
        for _ in 0..s {
            out = out.mul(&out);
        }
        out
    }

    pub fn det(&self) -> f64 {
        let n = self.n;
        let mut m = self.a.clone();
        let mut det = 1.0;
        for col in 0..n {
            let (p, pv) = match (col..n)
                .map(|r| (r, m[r * n + col]))
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
            {
                Some(x) if x.1 != 0.0 => x,
                _ => return 0.0,
            };
            if p != col {
                for j in 0..n {
                    m.swap(p * n + j, col * n + j);
                }
                det = -det;
            }
            det *= pv;
            for r in (col + 1)..n {
                let f = m[r * n + col] / pv;
                for j in col..n {
                    m[r * n + j] -= f * m[col * n + j];
                }
            }
        }
        det
    }

    pub fn inverse(&self) -> Result<Self> {
        let n = self.n;
        let mut m = self.a.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let (p, _) = (col..n)
                .map(|r| (r, m[r * n + col]))
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                .ok_or(Error::NotInvertible)?;
            if m[p * n + col] == 0.0 {
                return Err(Error::NotInvertible);
            }
            if p != col {
                for j in 0..n {
                    m.swap(p * n + j, col * n + j);
                    inv.a.swap(p * n + j, col * n + j);
                }
            }
            let pv = m[col * n + col];
            for j in 0..n {
                m[col * n + j] /= pv;
                inv.a[col * n + j] /= pv;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = m[r * n + col];
                if f == 0.0 {
                    continue;
                }
                for j in 0..n {
                    m[r * n + j] -= f * m[col * n + j];
                    inv.a[r * n + j] -= f * inv.a[col * n + j];
                }
            }
        }
        Ok(inv)
    }
}
