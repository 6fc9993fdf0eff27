//! Normal-ordered linear differential operators on R^n with polynomial
//! coefficients: the quantum algebra, its composition, commutator,
//! filtration, and algebraic symbols.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::multiindex::MultiIndex;
use crate::poly::{Poly, SymbolPoly};
use crate::rat::Rat;

/// A differential operator `sum_alpha c_alpha(x) d^alpha` in normal order:
/// all coefficients stand to the left of all derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffOp {
    n: usize,
    terms: BTreeMap<MultiIndex, Poly>,
}

impl DiffOp {
    pub fn zero(n: usize) -> Self {
        DiffOp {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::mult(&Poly::one(n))
    }

    /// The multiplication operator m_f.
    pub fn mult(f: &Poly) -> Self {
        let mut op = Self::zero(f.dim());
        op.add_term(MultiIndex::zero(f.dim()), f.clone());
        op
    }

    /// The coordinate derivative d_i.
    pub fn partial(n: usize, i: usize) -> Result<Self> {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, dim: n });
        }
        let mut op = Self::zero(n);
        op.add_term(MultiIndex::unit(n, i), Poly::one(n));
        Ok(op)
    }

    pub fn from_vector_field(x: &crate::symbols::VectorField) -> Self {
        let n = x.dim();
        let mut op = Self::zero(n);
        for i in 0..n {
            op.add_term(MultiIndex::unit(n, i), x.component(i).clone());
        }
        op
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Poly)> {
        self.terms.iter()
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> Poly {
        self.terms
            .get(alpha)
            .cloned()
            .unwrap_or_else(|| Poly::zero(self.n))
    }

    pub fn add_term(&mut self, alpha: MultiIndex, coeff: Poly) {
        debug_assert_eq!(alpha.len(), self.n);
        debug_assert_eq!(coeff.dim(), self.n);
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(alpha) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let sum = e.get().add(&coeff).expect("same dimension");
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    /// Filtration degree; `None` (read: minus infinity) for the zero operator.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().map(|a| a.degree()).max()
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch(self.n, other.n));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = self.clone();
        for (a, c) in &other.terms {
            out.add_term(a.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        DiffOp {
            n: self.n,
            terms: self.terms.iter().map(|(a, c)| (a.clone(), c.neg())).collect(),
        }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        let mut out = Self::zero(self.n);
        for (a, v) in &self.terms {
            out.add_term(a.clone(), v.scale(c));
        }
        out
    }

    /// Normal-ordered composition:
    /// `(f d^a) o (g d^b) = sum_{g' <= a} C(a, g') f d^{a-g'}(g) d^{g'+b}`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = Self::zero(self.n);
        for (alpha, f) in &self.terms {
            for (beta, g) in &other.terms {
                for gamma in alpha.sub_indices() {
                    let rest = alpha.checked_sub(&gamma).expect("gamma <= alpha");
                    let dg = g.diff_multi(&rest)?;
                    if dg.is_zero() {
                        continue;
                    }
                    let coeff = f.mul(&dg)?.scale(&alpha.binomial(&gamma));
                    out.add_term(gamma.add(beta), coeff);
                }
            }
        }
        Ok(out)
    }

    /// [D, E] = D o E - E o D.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.compose(other)?.sub(&other.compose(self)?)
    }

    /// Evaluation on a polynomial: `sum c_alpha d^alpha h`.
    pub fn apply(&self, h: &Poly) -> Result<Poly> {
        if self.n != h.dim() {
            return Err(Error::DimensionMismatch(self.n, h.dim()));
        }
        let mut acc = Poly::zero(self.n);
        for (alpha, c) in &self.terms {
            acc = acc.add(&c.mul(&h.diff_multi(alpha)?)?)?;
        }
        Ok(acc)
    }

    /// The k-th order symbol: `sum_{|alpha| = k} c_alpha xi^alpha`.
    /// Requires order(D) <= k; zero if order(D) < k.
    pub fn symbol_k(&self, k: u32) -> Result<SymbolPoly> {
        if let Some(ord) = self.order() {
            if ord > k {
                return Err(Error::OrderExceeded {
                    order: ord as i64,
                    requested: k as i64,
                });
            }
        }
        let mut out = SymbolPoly::zero(self.n);
        for (alpha, c) in &self.terms {
            if alpha.degree() == k {
                for (beta, v) in c.terms() {
                    out.add_term(beta.clone(), alpha.clone(), v.clone());
                }
            }
        }
        Ok(out)
    }

    /// The principal symbol sigma(D) = symbol of degree order(D).
    pub fn principal_symbol(&self) -> SymbolPoly {
        match self.order() {
            None => SymbolPoly::zero(self.n),
            Some(k) => self.symbol_k(k).expect("order is exact"),
        }
    }
}

impl fmt::Display for DiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (alpha, c) in self.terms.iter().rev() {
            let dstr = {
                let mut parts = Vec::new();
                for (i, &e) in alpha.0.iter().enumerate() {
                    match e {
                        0 => {}
                        1 => parts.push(format!("d{}", i + 1)),
                        _ => parts.push(format!("d{}^{}", i + 1, e)),
                    }
                }
                parts.join("*")
            };
            let cstr = c.to_string();
            let simple = c.num_terms() <= 1;
            let (neg, mag) = match cstr.strip_prefix('-') {
                Some(m) if simple => (true, m.to_string()),
                _ => (false, cstr),
            };
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            match (dstr.is_empty(), simple) {
                (true, _) => {
                    if mag == "1" && !simple {
                        write!(f, "({mag})")?;
                    } else if simple {
                        write!(f, "{mag}")?;
                    } else {
                        write!(f, "({mag})")?;
                    }
                }
                (false, true) => {
                    if mag == "1" {
                        write!(f, "{dstr}")?;
                    } else {
                        write!(f, "{mag}*{dstr}")?;
                    }
                }
                (false, false) => write!(f, "({mag})*{dstr}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rint, rone};

    fn d1(n: usize) -> DiffOp {
        DiffOp::partial(n, 0).unwrap()
    }

    fn x1op(n: usize) -> DiffOp {
        DiffOp::mult(&Poly::var(n, 0).unwrap())
    }

    #[test]
    fn compose_base_case() {
        // d1 o x1 = x1 d1 + 1
        let n = 1;
        let lhs = d1(n).compose(&x1op(n)).unwrap();
        let mut expect = DiffOp::zero(n);
        expect.add_term(MultiIndex::unit(n, 0), Poly::var(n, 0).unwrap());
        expect.add_term(MultiIndex::zero(n), Poly::one(n));
        assert_eq!(lhs, expect);

        // x1 d1 o d1 = x1 d1^2
        let xd = x1op(n).compose(&d1(n)).unwrap();
        let got = xd.compose(&d1(n)).unwrap();
        let mut expect = DiffOp::zero(n);
        expect.add_term(MultiIndex(vec![2]), Poly::var(n, 0).unwrap());
        assert_eq!(got, expect);
    }

    #[test]
    fn compose_second_order_against_apply() {
        // d1^2 o x1^2 = x1^2 d1^2 + 4 x1 d1 + 2, checked on monomial probes
        let n = 1;
        let dd = d1(n).compose(&d1(n)).unwrap();
        let xx = DiffOp::mult(&Poly::var(n, 0).unwrap().pow(2));
        let comp = dd.compose(&xx).unwrap();

        let mut expect = DiffOp::zero(n);
        expect.add_term(MultiIndex(vec![2]), Poly::var(n, 0).unwrap().pow(2));
        expect.add_term(
            MultiIndex(vec![1]),
            Poly::var(n, 0).unwrap().scale(&rint(4)),
        );
        expect.add_term(MultiIndex(vec![0]), Poly::constant(n, rint(2)));
        assert_eq!(comp, expect);

        for m in 0..=4u32 {
            let h = Poly::var(n, 0).unwrap().pow(m);
            let lhs = comp.apply(&h).unwrap();
            let rhs = dd.apply(&xx.apply(&h).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn commutator_examples() {
        let n = 1;
        // [d1, x1] = 1
        assert_eq!(d1(n).commutator(&x1op(n)).unwrap(), DiffOp::identity(n));
        // [d1^2, x1] = 2 d1
        let dd = d1(n).compose(&d1(n)).unwrap();
        assert_eq!(
            dd.commutator(&x1op(n)).unwrap(),
            d1(n).scale(&rint(2))
        );
        // [x1 d1, d1] = -d1
        let xd = x1op(n).compose(&d1(n)).unwrap();
        assert_eq!(xd.commutator(&d1(n)).unwrap(), d1(n).neg());
    }

    #[test]
    fn symbol_examples() {
        let n = 1;
        // symbol_2(x1 d1^2 + d1) = x1 xi1^2
        let mut op = DiffOp::zero(n);
        op.add_term(MultiIndex(vec![2]), Poly::var(n, 0).unwrap());
        op.add_term(MultiIndex(vec![1]), Poly::one(n));
        let s = op.symbol_k(2).unwrap();
        let expect = SymbolPoly::var_x(n, 0)
            .unwrap()
            .mul(&SymbolPoly::var_xi(n, 0).unwrap().mul(&SymbolPoly::var_xi(n, 0).unwrap()).unwrap())
            .unwrap();
        assert_eq!(s, expect);

        // symbol_2(d1) = 0, symbol_0(d1) errors
        assert!(d1(n).symbol_k(2).unwrap().is_zero());
        assert!(d1(n).symbol_k(0).is_err());

        // symbol_1([d1^2, x1]) = 2 xi1 = {xi1^2, x1}
        let dd = d1(n).compose(&d1(n)).unwrap();
        let br = dd.commutator(&x1op(n)).unwrap();
        let lhs = br.symbol_k(1).unwrap();
        let rhs = crate::symbols::poisson_bracket(
            &SymbolPoly::var_xi(n, 0).unwrap().mul(&SymbolPoly::var_xi(n, 0).unwrap()).unwrap(),
            &SymbolPoly::var_x(n, 0).unwrap(),
        )
        .unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn apply_examples() {
        let n = 1;
        let x1 = Poly::var(n, 0).unwrap();
        let xd = x1op(n).compose(&d1(n)).unwrap();
        assert_eq!(xd.apply(&x1.pow(2)).unwrap(), x1.pow(2).scale(&rint(2)));
        let dd = d1(n).compose(&d1(n)).unwrap();
        assert_eq!(dd.apply(&x1.pow(3)).unwrap(), x1.scale(&rint(6)));

        // d1 o x1 - x1 d1 = identity
        let idop = d1(n).compose(&x1op(n)).unwrap().sub(&xd).unwrap();
        let h = x1.pow(2).add(&Poly::one(n)).unwrap();
        assert_eq!(idop.apply(&h).unwrap(), h);
        let _ = rone();
    }

    #[test]
    fn zero_operator_sentinels() {
        let z = DiffOp::zero(2);
        assert_eq!(z.order(), None);
        assert!(z.symbol_k(0).unwrap().is_zero());
        assert!(z.symbol_k(3).unwrap().is_zero());
    }
}
