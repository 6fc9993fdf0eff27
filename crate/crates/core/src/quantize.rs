//! Normal-ordering quantization and the induced star product.
//!
//! `sigma_aff` replaces each derivative monomial d^alpha by xi^alpha;
//! `q_affine` is its inverse. Regrading the composition by powers of a
//! formal parameter hbar yields an associative star product on symbols.

use std::fmt;

use crate::diffop::DiffOp;
use crate::error::{Error, Result};
use crate::multiindex::indices_of_degree;
use crate::poly::{Poly, SymbolPoly};

/// hbar-graded truncated series of symbols: `sum_{k<N} hbar^k P_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct HSeries {
    n: usize,
    coeffs: Vec<SymbolPoly>,
}

impl HSeries {
    pub fn zero(n: usize, truncation: usize) -> Self {
        HSeries {
            n,
            coeffs: vec![SymbolPoly::zero(n); truncation],
        }
    }

    /// Number of retained hbar powers (terms hbar^0 .. hbar^{N-1}).
    pub fn truncation(&self) -> usize {
        self.coeffs.len()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn coeff(&self, k: usize) -> &SymbolPoly {
        &self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[SymbolPoly] {
        &self.coeffs
    }

    pub fn add_to(&mut self, k: usize, p: &SymbolPoly) -> Result<()> {
        if k < self.coeffs.len() {
            self.coeffs[k] = self.coeffs[k].add(p)?;
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        let trunc = self.truncation().min(other.truncation());
        let mut out = HSeries::zero(self.n, trunc);
        for k in 0..trunc {
            out.coeffs[k] = self.coeffs[k].add(&other.coeffs[k])?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        HSeries {
            n: self.n,
            coeffs: self.coeffs.iter().map(|c| c.neg()).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn from_symbol(p: &SymbolPoly, truncation: usize) -> Self {
        let mut s = HSeries::zero(p.dim(), truncation);
        if truncation > 0 {
            s.coeffs[0] = p.clone();
        }
        s
    }
}

impl fmt::Display for HSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if wrote {
                write!(f, " + ")?;
            }
            match k {
                0 => write!(f, "{c}")?,
                1 => write!(f, "hbar*({c})")?,
                _ => write!(f, "hbar^{k}*({c})")?,
            }
            wrote = true;
        }
        if !wrote {
            write!(f, "0")?;
        }
        write!(f, " + O(hbar^{})", self.truncation())
    }
}

/// The affine symbol map: termwise replacement d^alpha -> xi^alpha.
pub fn sigma_aff(op: &DiffOp) -> SymbolPoly {
    let mut out = SymbolPoly::zero(op.dim());
    for (alpha, c) in op.terms() {
        for (beta, v) in c.terms() {
            out.add_term(beta.clone(), alpha.clone(), v.clone());
        }
    }
    out
}

/// Normal-ordering quantization, the inverse of [`sigma_aff`].
pub fn q_affine(p: &SymbolPoly) -> DiffOp {
    let mut out = DiffOp::zero(p.dim());
    for ((beta, alpha), v) in p.terms() {
        let mut c = Poly::zero(p.dim());
        c.add_term(beta.clone(), v.clone());
        out.add_term(alpha.clone(), c);
    }
    out
}

/// Closed-form star product: the hbar^k coefficient is
/// `sum_{|alpha|=k} (1/alpha!) d_xi^alpha F . d_x^alpha G`.
///
/// This expansion is an optimization of [`star_via_composition`], which is the
/// defining route; the two are compared term-by-term in the test suites.
pub fn star(f: &SymbolPoly, g: &SymbolPoly, truncation: usize) -> Result<HSeries> {
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch(f.dim(), g.dim()));
    }
    let n = f.dim();
    let mut out = HSeries::zero(n, truncation);
    for k in 0..truncation {
        let mut acc = SymbolPoly::zero(n);
        for alpha in indices_of_degree(n, k as u32) {
            let df = f.diff_xi_multi(&alpha)?;
            if df.is_zero() {
                continue;
            }
            let dg = g.diff_x_multi(&alpha)?;
            if dg.is_zero() {
                continue;
            }
            let inv_fact = crate::rat::rone() / alpha.factorial();
            acc = acc.add(&df.mul(&dg)?.scale(&inv_fact))?;
        }
        out.coeffs[k] = acc;
    }
    Ok(out)
}

/// The defining composition route: decompose F and G into xi-homogeneous
/// parts, quantize, compose in the operator algebra, and regrade by hbar:
/// a xi-degree-j part of `QF_a o QG_b` carries hbar^{a+b-j}.
pub fn star_via_composition(f: &SymbolPoly, g: &SymbolPoly, truncation: usize) -> Result<HSeries> {
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch(f.dim(), g.dim()));
    }
    let n = f.dim();
    let mut out = HSeries::zero(n, truncation);
    let fa = f.xi_degree().unwrap_or(0);
    let gb = g.xi_degree().unwrap_or(0);
    for a in 0..=fa {
        let fpart = f.homogeneous_part(a);
        if fpart.is_zero() {
            continue;
        }
        for b in 0..=gb {
            let gpart = g.homogeneous_part(b);
            if gpart.is_zero() {
                continue;
            }
            let comp = q_affine(&fpart).compose(&q_affine(&gpart))?;
            let sym = sigma_aff(&comp);
            for j in 0..=sym.xi_degree().unwrap_or(0) {
                let part = sym.homogeneous_part(j);
                if part.is_zero() {
                    continue;
                }
                let k = (a + b - j) as usize;
                out.add_to(k, &part)?;
            }
        }
    }
    Ok(out)
}

/// Star product of two truncated series (used for associativity checks).
pub fn star_series(f: &HSeries, g: &HSeries) -> Result<HSeries> {
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch(f.dim(), g.dim()));
    }
    let trunc = f.truncation().min(g.truncation());
    let mut out = HSeries::zero(f.dim(), trunc);
    for i in 0..trunc {
        for j in 0..trunc - i {
            let prod = star(f.coeff(i), g.coeff(j), trunc - i - j)?;
            for (k, c) in prod.coeffs().iter().enumerate() {
                out.add_to(i + j + k, c)?;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiindex::MultiIndex;
    use crate::rat::{rat, rint};

    fn xi1(n: usize) -> SymbolPoly {
        SymbolPoly::var_xi(n, 0).unwrap()
    }

    fn x1(n: usize) -> SymbolPoly {
        SymbolPoly::var_x(n, 0).unwrap()
    }

    #[test]
    fn sigma_aff_display_example() {
        // x1^2 d1 d2 + d1 -> x1^2 xi1 xi2 + xi1
        let n = 2;
        let mut op = DiffOp::zero(n);
        op.add_term(MultiIndex(vec![1, 1]), Poly::var(n, 0).unwrap().pow(2));
        op.add_term(MultiIndex(vec![1, 0]), Poly::one(n));
        let s = sigma_aff(&op);
        assert_eq!(s.to_string(), "x1^2*xi1*xi2 + xi1");
        assert_eq!(q_affine(&s), op);
    }

    #[test]
    fn sigma_aff_identity_and_commutator() {
        let n = 1;
        assert_eq!(sigma_aff(&DiffOp::identity(n)), SymbolPoly::one(n));
        let d = DiffOp::partial(n, 0).unwrap();
        let x = DiffOp::mult(&Poly::var(n, 0).unwrap());
        assert_eq!(sigma_aff(&d.commutator(&x).unwrap()), SymbolPoly::one(n));
    }

    #[test]
    fn q_affine_examples() {
        let n = 1;
        // x1 xi1^2 -> x1 d1^2
        let p = x1(n).mul(&xi1(n).mul(&xi1(n)).unwrap()).unwrap();
        let mut expect = DiffOp::zero(n);
        expect.add_term(MultiIndex(vec![2]), Poly::var(n, 0).unwrap());
        assert_eq!(q_affine(&p), expect);
        // xi1 + 1 -> d1 + 1
        let q = xi1(n).add(&SymbolPoly::one(n)).unwrap();
        let expect = DiffOp::partial(n, 0)
            .unwrap()
            .add(&DiffOp::identity(n))
            .unwrap();
        assert_eq!(q_affine(&q), expect);
    }

    #[test]
    fn star_first_order_examples() {
        let n = 1;
        // xi1 * x1 = x1 xi1 + hbar
        let s = star(&xi1(n), &x1(n), 2).unwrap();
        assert_eq!(s.coeff(0), &x1(n).mul(&xi1(n)).unwrap());
        assert_eq!(s.coeff(1), &SymbolPoly::one(n));
        // x1 * xi1 = x1 xi1, no hbar terms
        let s = star(&x1(n), &xi1(n), 2).unwrap();
        assert_eq!(s.coeff(0), &x1(n).mul(&xi1(n)).unwrap());
        assert!(s.coeff(1).is_zero());
    }

    #[test]
    fn star_second_order_example() {
        // xi1^2 * x1^2 = x1^2 xi1^2 + 4 hbar x1 xi1 + 2 hbar^2
        let n = 1;
        let f = xi1(n).mul(&xi1(n)).unwrap();
        let g = x1(n).mul(&x1(n)).unwrap();
        let s = star(&f, &g, 3).unwrap();
        assert_eq!(s.coeff(0), &g.mul(&f).unwrap());
        assert_eq!(
            s.coeff(1),
            &x1(n).mul(&xi1(n)).unwrap().scale(&rint(4))
        );
        assert_eq!(s.coeff(2), &SymbolPoly::constant(n, rint(2)));
        // and the defining composition route agrees
        assert_eq!(s, star_via_composition(&f, &g, 3).unwrap());
    }

    #[test]
    fn negative_truncation_prints_zero() {
        let n = 1;
        let s = star(&xi1(n), &x1(n), 0).unwrap();
        assert!(s.is_zero());
        assert_eq!(s.to_string(), "0 + O(hbar^0)");
        let _ = rat(1, 2);
    }
}
