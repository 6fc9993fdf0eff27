//! The classical algebra of symbols: polynomial functions on the cotangent
//! bundle of R^n, with the canonical Poisson bracket, the degree derivation,
//! and vertical lifts of closed 1-forms.

use crate::error::{Error, Result};
use crate::poly::{Poly, SymbolPoly};
use crate::rat::{rat, Rat};

/// A polynomial vector field, identified with its degree-1 symbol
/// `P_X = sum_i X^i xi_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    components: Vec<Poly>,
}

impl VectorField {
    pub fn new(components: Vec<Poly>) -> Result<Self> {
        let n = components.len();
        for c in &components {
            if c.dim() != n {
                return Err(Error::DimensionMismatch(n, c.dim()));
            }
        }
        Ok(VectorField { components })
    }

    pub fn zero(n: usize) -> Self {
        VectorField {
            components: vec![Poly::zero(n); n],
        }
    }

    /// The coordinate field d/dx_i.
    pub fn coordinate(n: usize, i: usize) -> Result<Self> {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, dim: n });
        }
        let mut components = vec![Poly::zero(n); n];
        components[i] = Poly::one(n);
        Ok(VectorField { components })
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, i: usize) -> &Poly {
        &self.components[i]
    }

    pub fn components(&self) -> &[Poly] {
        &self.components
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_>>()?;
        Ok(VectorField { components })
    }

    pub fn neg(&self) -> Self {
        VectorField {
            components: self.components.iter().map(|c| c.neg()).collect(),
        }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        VectorField {
            components: self.components.iter().map(|p| p.scale(c)).collect(),
        }
    }

    /// X(f) = sum_i X^i d_i f.
    pub fn apply_fn(&self, f: &Poly) -> Result<Poly> {
        if f.dim() != self.dim() {
            return Err(Error::DimensionMismatch(self.dim(), f.dim()));
        }
        let mut acc = Poly::zero(self.dim());
        for (i, xi) in self.components.iter().enumerate() {
            acc = acc.add(&xi.mul(&f.diff(i)?)?)?;
        }
        Ok(acc)
    }

    /// Lie bracket of vector fields: [X,Z]^i = X(Z^i) - Z(X^i).
    pub fn bracket(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        let components = (0..self.dim())
            .map(|i| {
                self.apply_fn(&other.components[i])?
                    .sub(&other.apply_fn(&self.components[i])?)
            })
            .collect::<Result<_>>()?;
        Ok(VectorField { components })
    }

    /// The degree-1 symbol sum_i X^i xi_i.
    pub fn to_symbol(&self) -> SymbolPoly {
        let n = self.dim();
        let mut acc = SymbolPoly::zero(n);
        for (i, c) in self.components.iter().enumerate() {
            let xi = SymbolPoly::var_xi(n, i).expect("index in range");
            acc = acc
                .add(&SymbolPoly::from_poly(c).mul(&xi).expect("same dim"))
                .expect("same dim");
        }
        acc
    }

    /// div X = sum_i d_i X^i (Lebesgue density of R^n).
    pub fn divergence(&self) -> Poly {
        let mut acc = Poly::zero(self.dim());
        for (i, c) in self.components.iter().enumerate() {
            acc = acc.add(&c.diff(i).expect("index in range")).expect("same dim");
        }
        acc
    }
}

/// A closed polynomial 1-form on R^n; closedness is checked on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ClosedOneForm {
    components: Vec<Poly>,
}

impl ClosedOneForm {
    pub fn new(components: Vec<Poly>) -> Result<Self> {
        let n = components.len();
        for c in &components {
            if c.dim() != n {
                return Err(Error::DimensionMismatch(n, c.dim()));
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let dij = components[j].diff(i)?;
                let dji = components[i].diff(j)?;
                if dij != dji {
                    return Err(Error::NotClosed { i, j });
                }
            }
        }
        Ok(ClosedOneForm { components })
    }

    pub fn zero(n: usize) -> Self {
        ClosedOneForm {
            components: vec![Poly::zero(n); n],
        }
    }

    /// df for a polynomial potential f.
    pub fn exact(f: &Poly) -> Self {
        let n = f.dim();
        ClosedOneForm {
            components: (0..n).map(|i| f.diff(i).expect("index in range")).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn component(&self, i: usize) -> &Poly {
        &self.components[i]
    }

    pub fn components(&self) -> &[Poly] {
        &self.components
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(ClosedOneForm {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| a.add(b))
                .collect::<Result<_>>()?,
        })
    }

    /// Pairing omega(X) = sum_i omega_i X^i.
    pub fn pair(&self, x: &VectorField) -> Result<Poly> {
        if self.dim() != x.dim() {
            return Err(Error::DimensionMismatch(self.dim(), x.dim()));
        }
        let mut acc = Poly::zero(self.dim());
        for (w, c) in self.components.iter().zip(x.components()) {
            acc = acc.add(&w.mul(c)?)?;
        }
        Ok(acc)
    }

    /// A potential f with df = omega, by radial (homotopy) integration:
    /// every monomial c x^beta of omega_i contributes c x^beta x_i / (|beta|+1).
    pub fn potential(&self) -> Poly {
        let n = self.dim();
        let mut f = Poly::zero(n);
        for (i, w) in self.components.iter().enumerate() {
            for (beta, c) in w.terms() {
                let mut exps = beta.0.clone();
                exps[i] += 1;
                let deg = beta.degree() as i64;
                f.add_term(
                    crate::multiindex::MultiIndex(exps),
                    c * rat(1, deg + 1),
                );
            }
        }
        f
    }
}

/// The canonical Poisson bracket of T*R^n, with sign fixed by {xi_i, x^i} = +1:
/// {F,G} = sum_i (d_{xi_i} F d_{x^i} G - d_{x^i} F d_{xi_i} G).
pub fn poisson_bracket(f: &SymbolPoly, g: &SymbolPoly) -> Result<SymbolPoly> {
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch(f.dim(), g.dim()));
    }
    let n = f.dim();
    let mut acc = SymbolPoly::zero(n);
    for i in 0..n {
        acc = acc.add(&f.diff_xi(i)?.mul(&g.diff_x(i)?)?)?;
        acc = acc.sub(&f.diff_x(i)?.mul(&g.diff_xi(i)?)?)?;
    }
    Ok(acc)
}

/// Deg P = (i-1) P_i on each xi-homogeneous component P_i.
pub fn deg_derivation(p: &SymbolPoly) -> SymbolPoly {
    let mut acc = SymbolPoly::zero(p.dim());
    let top = p.xi_degree().unwrap_or(0);
    for i in 0..=top {
        let part = p.homogeneous_part(i);
        acc = acc
            .add(&part.scale(&rat(i as i64 - 1, 1)))
            .expect("same dim");
    }
    acc
}

/// The vertical lift omega^v(P) = sum_i omega_i d_{xi_i} P; equals {P, f}
/// for any potential f of omega, and lowers the xi-degree by one.
pub fn vertical_lift(omega: &ClosedOneForm, p: &SymbolPoly) -> Result<SymbolPoly> {
    if omega.dim() != p.dim() {
        return Err(Error::DimensionMismatch(omega.dim(), p.dim()));
    }
    let mut acc = SymbolPoly::zero(p.dim());
    for i in 0..p.dim() {
        let w = SymbolPoly::from_poly(omega.component(i));
        acc = acc.add(&w.mul(&p.diff_xi(i)?)?)?;
    }
    Ok(acc)
}
