//! Constructors for the classified derivations and automorphisms of the
//! operator algebras, plus a generic exact Leibniz verifier.
//!
//! On first-order operators: `C(f+X) = [Y, f+X] + kappa f + lambda div X + omega(X)`.
//! On symbols: `C(P) = {Q, P} - kappa Deg P + omega^v(P)`.
//! On the full operator algebra: `C(D) = [Delta, D] + omega_bar(D)`.

use std::fmt;

use crate::diffop::DiffOp;
use crate::error::{Error, Result};
use crate::flows::AffineMap;
use crate::poly::{Poly, SymbolPoly};
use crate::rat::Rat;
use crate::symbols::{
    deg_derivation, poisson_bracket, vertical_lift, ClosedOneForm, VectorField,
};

/// An element `f + X` of the split algebra of first-order operators.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstOrderOp {
    pub f: Poly,
    pub x: VectorField,
}

impl FirstOrderOp {
    pub fn new(f: Poly, x: VectorField) -> Result<Self> {
        if f.dim() != x.dim() {
            return Err(Error::DimensionMismatch(f.dim(), x.dim()));
        }
        Ok(FirstOrderOp { f, x })
    }

    pub fn from_function(f: Poly) -> Self {
        let x = VectorField::zero(f.dim());
        FirstOrderOp { f, x }
    }

    pub fn from_field(x: VectorField) -> Self {
        let f = Poly::zero(x.dim());
        FirstOrderOp { f, x }
    }

    pub fn zero(n: usize) -> Self {
        FirstOrderOp {
            f: Poly::zero(n),
            x: VectorField::zero(n),
        }
    }

    pub fn dim(&self) -> usize {
        self.f.dim()
    }

    pub fn is_zero(&self) -> bool {
        self.f.is_zero() && self.x.is_zero()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(FirstOrderOp {
            f: self.f.add(&other.f)?,
            x: self.x.add(&other.x)?,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        FirstOrderOp {
            f: self.f.neg(),
            x: self.x.neg(),
        }
    }

    /// [f+X, g+Z] = (X(g) - Z(f)) + [X, Z].
    pub fn bracket(&self, other: &Self) -> Result<Self> {
        let f = self
            .x
            .apply_fn(&other.f)?
            .sub(&other.x.apply_fn(&self.f)?)?;
        let x = self.x.bracket(&other.x)?;
        Ok(FirstOrderOp { f, x })
    }

    pub fn to_diffop(&self) -> DiffOp {
        DiffOp::from_vector_field(&self.x)
            .add(&DiffOp::mult(&self.f))
            .expect("same dimension")
    }
}

impl fmt::Display for FirstOrderOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_diffop())
    }
}

/// Parameters `(Y, kappa, lambda, omega)` of a derivation of the first-order
/// algebra.
#[derive(Debug, Clone)]
pub struct Deriv1Params {
    pub y: VectorField,
    pub kappa: Rat,
    pub lambda: Rat,
    pub omega: ClosedOneForm,
}

impl Deriv1Params {
    pub fn new(y: VectorField, kappa: Rat, lambda: Rat, omega: ClosedOneForm) -> Result<Self> {
        if y.dim() != omega.dim() {
            return Err(Error::DimensionMismatch(y.dim(), omega.dim()));
        }
        Ok(Deriv1Params {
            y,
            kappa,
            lambda,
            omega,
        })
    }

    pub fn dim(&self) -> usize {
        self.y.dim()
    }
}

/// div X with respect to the Lebesgue density of R^n.
pub fn divergence(x: &VectorField) -> Poly {
    x.divergence()
}

/// `C(f+X) = [Y, f+X] + kappa f + lambda div X + omega(X)`.
pub fn deriv_d1(p: &Deriv1Params, u: &FirstOrderOp) -> Result<FirstOrderOp> {
    if p.dim() != u.dim() {
        return Err(Error::DimensionMismatch(p.dim(), u.dim()));
    }
    let mut f = p.y.apply_fn(&u.f)?; // [Y, f] = Y(f)
    f = f.add(&u.f.scale(&p.kappa))?;
    f = f.add(&u.x.divergence().scale(&p.lambda))?;
    f = f.add(&p.omega.pair(&u.x)?)?;
    let x = p.y.bracket(&u.x)?;
    Ok(FirstOrderOp { f, x })
}

/// `C(P) = {Q, P} - kappa Deg P + omega^v(P)` on symbols.
pub fn deriv_s(
    q: &SymbolPoly,
    kappa: &Rat,
    omega: &ClosedOneForm,
    p: &SymbolPoly,
) -> Result<SymbolPoly> {
    if q.dim() != p.dim() {
        return Err(Error::DimensionMismatch(q.dim(), p.dim()));
    }
    let mut out = poisson_bracket(q, p)?;
    out = out.sub(&deg_derivation(p).scale(kappa))?;
    out = out.add(&vertical_lift(omega, p)?)?;
    Ok(out)
}

/// The filtration-lowering lift of a closed form to the operator algebra.
///
/// Every closed polynomial form on R^n is exact, omega = dh, and the lift is
/// the inner derivation `omega_bar(D) = [D, m_h]`: it has weight -1, restricts
/// to X -> omega(X) on vector fields, and is independent of the choice of
/// potential. For constant forms it coincides with the termwise vertical lift
/// conjugated through the symbol map; for non-constant forms the naive
/// conjugation fails the Leibniz rule and this inner realization is the
/// faithful one.
pub fn omega_bar(omega: &ClosedOneForm, d: &DiffOp) -> Result<DiffOp> {
    let h = DiffOp::mult(&omega.potential());
    d.commutator(&h)
}

/// `C(D) = [Delta, D] + omega_bar(D)` on the full operator algebra.
pub fn deriv_d(delta: &DiffOp, omega: &ClosedOneForm, d: &DiffOp) -> Result<DiffOp> {
    if delta.dim() != d.dim() {
        return Err(Error::DimensionMismatch(delta.dim(), d.dim()));
    }
    delta.commutator(d)?.add(&omega_bar(omega, d)?)
}

/// Parameters `(phi, K, Lambda, Omega)` of an automorphism of the
/// first-order algebra; `phi` is an invertible affine map.
#[derive(Debug, Clone)]
pub struct AutoParams {
    pub phi: AffineMap,
    pub k: Rat,
    pub lambda: Rat,
    pub omega: ClosedOneForm,
}

impl AutoParams {
    pub fn new(phi: AffineMap, k: Rat, lambda: Rat, omega: ClosedOneForm) -> Result<Self> {
        if num_traits::Zero::is_zero(&k) {
            return Err(Error::Precondition("K must be nonzero".into()));
        }
        phi.inverse()?; // must be invertible
        Ok(AutoParams {
            phi,
            k,
            lambda,
            omega,
        })
    }
}

/// `Phi(f+X) = phi_*(X) + (K f + Lambda div X + Omega(X)) o phi^{-1}`.
pub fn automorphism_d1(a: &AutoParams, u: &FirstOrderOp) -> Result<FirstOrderOp> {
    let n = u.dim();
    if a.phi.dim() != n {
        return Err(Error::DimensionMismatch(a.phi.dim(), n));
    }
    let inv = a.phi.inverse()?;
    let x = a.phi.push_forward(&u.x)?;
    let mut f = u.f.scale(&a.k);
    f = f.add(&u.x.divergence().scale(&a.lambda))?;
    f = f.add(&a.omega.pair(&u.x)?)?;
    let f = inv.pull_back(&f)?;
    Ok(FirstOrderOp { f, x })
}

/// Outcome of the randomized exact Leibniz check.
#[derive(Debug, Clone)]
pub struct LeibnizReport {
    pub samples: usize,
    pub failures: usize,
    pub first_counterexample: Option<String>,
}

impl LeibnizReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Verify `C[u,v] = [Cu,v] + [u,Cv]` exactly on randomized pairs.
///
/// `bracket`, `add`, and `deriv` are the algebra operations; `sample` draws a
/// fresh random element each call. Failure is a report, not an error.
pub fn check_derivation<T, B, A, C, S>(
    mut bracket: B,
    mut add: A,
    mut deriv: C,
    mut sample: S,
    samples: usize,
) -> LeibnizReport
where
    T: Clone + PartialEq + fmt::Display,
    B: FnMut(&T, &T) -> T,
    A: FnMut(&T, &T) -> T,
    C: FnMut(&T) -> T,
    S: FnMut() -> T,
{
    let mut failures = 0;
    let mut first = None;
    for _ in 0..samples {
        let u = sample();
        let v = sample();
        let lhs = deriv(&bracket(&u, &v));
        let rhs = add(&bracket(&deriv(&u), &v), &bracket(&u, &deriv(&v)));
        if lhs != rhs {
            failures += 1;
            if first.is_none() {
                first = Some(format!("u = {u}, v = {v}: C[u,v] = {lhs}, [Cu,v]+[u,Cv] = {rhs}"));
            }
        }
    }
    LeibnizReport {
        samples,
        failures,
        first_counterexample: first,
    }
}
