//! Flows of affine vector fields, the group divergence cocycle, and the
//! one-parameter automorphism groups of the first-order algebra.
//!
//! Two evaluation modes are exposed. In exact mode the matrix part of the
//! field must be nilpotent, so the flow is polynomial in time and every
//! identity is checked over the rationals. Numeric mode uses dense matrix
//! exponentials and Gauss-Legendre quadrature with double precision.

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::derivations::{Deriv1Params, FirstOrderOp};
use crate::error::{Error, Result};
use crate::matrix::{FMat, RatMat};
use crate::multiindex::MultiIndex;
use crate::poly::{Poly, PolyF};
use crate::rat::{factorial, rat, rone, rzero, to_f64, Rat};
use crate::symbols::VectorField;

// ---------------------------------------------------------------------------
// Affine maps
// ---------------------------------------------------------------------------

/// An affine map x -> A x + b with exact rational entries.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    pub mat: RatMat,
    pub b: Vec<Rat>,
}

impl AffineMap {
    pub fn new(mat: RatMat, b: Vec<Rat>) -> Result<Self> {
        if mat.dim() != b.len() {
            return Err(Error::DimensionMismatch(mat.dim(), b.len()));
        }
        Ok(AffineMap { mat, b })
    }

    pub fn identity(n: usize) -> Self {
        AffineMap {
            mat: RatMat::identity(n),
            b: vec![rzero(); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn apply(&self, x: &[Rat]) -> Vec<Rat> {
        let mut y = self.mat.mul_vec(x);
        for (yi, bi) in y.iter_mut().zip(&self.b) {
            *yi += bi;
        }
        y
    }

    /// self o other: x -> A1 (A2 x + b2) + b1.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        let mat = self.mat.mul(&other.mat);
        let mut b = self.mat.mul_vec(&other.b);
        for (bi, si) in b.iter_mut().zip(&self.b) {
            *bi += si;
        }
        Ok(AffineMap { mat, b })
    }

    pub fn inverse(&self) -> Result<Self> {
        let inv = self.mat.inverse()?;
        let b = inv.mul_vec(&self.b).iter().map(|v| -v).collect();
        Ok(AffineMap { mat: inv, b })
    }

    pub fn rows(&self) -> Vec<Vec<Rat>> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.mat.get(i, j).clone()).collect())
            .collect()
    }

    /// Pull-back of a function: f o self.
    pub fn pull_back(&self, f: &Poly) -> Result<Poly> {
        f.compose_affine(&self.rows(), &self.b)
    }

    /// Push-forward of a vector field: (self_* X)(y) = A . X(self^{-1} y).
    pub fn push_forward(&self, x: &VectorField) -> Result<VectorField> {
        let n = self.dim();
        if x.dim() != n {
            return Err(Error::DimensionMismatch(n, x.dim()));
        }
        let inv = self.inverse()?;
        let pulled: Vec<Poly> = x
            .components()
            .iter()
            .map(|c| inv.pull_back(c))
            .collect::<Result<_>>()?;
        let mut components = Vec::with_capacity(n);
        for i in 0..n {
            let mut acc = Poly::zero(n);
            for (j, p) in pulled.iter().enumerate() {
                acc = acc.add(&p.scale(self.mat.get(i, j)))?;
            }
            components.push(acc);
        }
        VectorField::new(components)
    }

    pub fn to_f64(&self) -> AffineMapF {
        AffineMapF {
            mat: self.mat.to_f64(),
            b: self.b.iter().map(to_f64).collect(),
        }
    }
}

/// An affine map with double-precision entries.
#[derive(Debug, Clone)]
pub struct AffineMapF {
    pub mat: FMat,
    pub b: Vec<f64>,
}

impl AffineMapF {
    pub fn identity(n: usize) -> Self {
        AffineMapF {
            mat: FMat::identity(n),
            b: vec![0.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.mat.mul_vec(x);
        for (yi, bi) in y.iter_mut().zip(&self.b) {
            *yi += bi;
        }
        y
    }

    pub fn compose(&self, other: &Self) -> Self {
        let mat = self.mat.mul(&other.mat);
        let mut b = self.mat.mul_vec(&other.b);
        for (bi, si) in b.iter_mut().zip(&self.b) {
            *bi += si;
        }
        AffineMapF { mat, b }
    }

    pub fn inverse(&self) -> Result<Self> {
        let inv = self.mat.inverse()?;
        let b = inv.mul_vec(&self.b).iter().map(|v| -v).collect();
        Ok(AffineMapF { mat: inv, b })
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.mat.get(i, j)).collect())
            .collect()
    }

    pub fn pull_back(&self, f: &PolyF) -> Result<PolyF> {
        f.compose_affine(&self.rows(), &self.b)
    }
}

// ---------------------------------------------------------------------------
// Affine fields and their flows
// ---------------------------------------------------------------------------

/// The affine (hence complete) vector field Y(x) = A x + b.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineField {
    pub a: RatMat,
    pub b: Vec<Rat>,
}

impl AffineField {
    pub fn new(a: RatMat, b: Vec<Rat>) -> Result<Self> {
        if a.dim() != b.len() {
            return Err(Error::DimensionMismatch(a.dim(), b.len()));
        }
        Ok(AffineField { a, b })
    }

    /// Extract (A, b) from a vector field with affine components.
    pub fn from_vector_field(x: &VectorField) -> Result<Self> {
        let n = x.dim();
        let mut a = RatMat::zero(n);
        let mut b = vec![rzero(); n];
        for i in 0..n {
            for (alpha, c) in x.component(i).terms() {
                match alpha.degree() {
                    0 => b[i] = c.clone(),
                    1 => {
                        let j = alpha.0.iter().position(|&e| e == 1).expect("degree 1");
                        a.set(i, j, c.clone());
                    }
                    _ => {
                        return Err(Error::Precondition(format!(
                            "component {} of the field is not affine",
                            i + 1
                        )))
                    }
                }
            }
        }
        Ok(AffineField { a, b })
    }

    pub fn to_vector_field(&self) -> VectorField {
        let n = self.dim();
        let components = (0..n)
            .map(|i| {
                let mut p = Poly::constant(n, self.b[i].clone());
                for j in 0..n {
                    p.add_term(MultiIndex::unit(n, j), self.a.get(i, j).clone());
                }
                p
            })
            .collect();
        VectorField::new(components).expect("components share the dimension")
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    /// div Y = tr A, a constant for affine fields.
    pub fn divergence(&self) -> Rat {
        self.a.trace()
    }

    pub fn is_nilpotent(&self) -> bool {
        self.a.is_nilpotent()
    }
}

/// A flow map Exp(tY) of an affine field, in one of the two modes.
#[derive(Debug, Clone)]
pub enum FlowMap {
    /// Nilpotent matrix part: entries are polynomial in t, all data rational.
    Exact {
        field: AffineField,
        t: Rat,
        map: AffineMap,
    },
    /// Dense double-precision flow for arbitrary affine fields.
    Numeric {
        field: AffineField,
        t: f64,
        map: AffineMapF,
    },
}

impl FlowMap {
    pub fn dim(&self) -> usize {
        match self {
            FlowMap::Exact { field, .. } | FlowMap::Numeric { field, .. } => field.dim(),
        }
    }
}

fn rat_pow(t: &Rat, k: usize) -> Rat {
    let mut out = rone();
    for _ in 0..k {
        out *= t;
    }
    out
}

/// Exact e^{tA} for nilpotent A: the terminating series sum_k t^k A^k / k!.
fn exp_exact(a: &RatMat, t: &Rat) -> Result<RatMat> {
    let q = a.nilpotency_index().ok_or(Error::NotNilpotent)?;
    let mut out = RatMat::identity(a.dim());
    let mut pow = RatMat::identity(a.dim());
    for k in 1..q {
        pow = pow.mul(a);
        out = out.add(&pow.scale(&(rat_pow(t, k) / factorial(k as u32))));
    }
    Ok(out)
}

/// Exact translation part of the flow: sum_k t^{k+1} A^k b / (k+1)!.
fn translation_exact(a: &RatMat, b: &[Rat], t: &Rat) -> Result<Vec<Rat>> {
    let q = a.nilpotency_index().ok_or(Error::NotNilpotent)?;
    let n = a.dim();
    let mut out = vec![rzero(); n];
    let mut akb: Vec<Rat> = b.to_vec();
    for k in 0..q {
        let c = rat_pow(t, k + 1) / factorial(k as u32 + 1);
        for i in 0..n {
            out[i] += &akb[i] * &c;
        }
        akb = a.mul_vec(&akb);
    }
    Ok(out)
}

/// Exact flow of a nilpotent affine field at rational time.
pub fn flow_exact(y: &AffineField, t: &Rat) -> Result<FlowMap> {
    let mat = exp_exact(&y.a, t)?;
    let b = translation_exact(&y.a, &y.b, t)?;
    Ok(FlowMap::Exact {
        field: y.clone(),
        t: t.clone(),
        map: AffineMap { mat, b },
    })
}

/// Numeric flow via the augmented-matrix exponential: exp of t[[A,b],[0,0]]
/// carries both e^{tA} and the integrated translation part.
pub fn flow_numeric(y: &AffineField, t: f64) -> FlowMap {
    let n = y.dim();
    let mut aug = FMat::zero(n + 1);
    let af = y.a.to_f64();
    for i in 0..n {
        for j in 0..n {
            aug.set(i, j, t * af.get(i, j));
        }
        aug.set(i, n, t * to_f64(&y.b[i]));
    }
    let e = aug.expm();
    let mut mat = FMat::zero(n);
    let mut b = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            mat.set(i, j, e.get(i, j));
        }
        b[i] = e.get(i, n);
    }
    FlowMap::Numeric {
        field: y.clone(),
        t,
        map: AffineMapF { mat, b },
    }
}

// ---------------------------------------------------------------------------
// Group divergence and its cocycle law
// ---------------------------------------------------------------------------

/// The group divergence Div = ln o J, constant in x for affine maps.
#[derive(Debug, Clone, PartialEq)]
pub enum DivValue {
    Exact(Rat),
    Numeric(f64),
}

impl DivValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            DivValue::Exact(r) => to_f64(r),
            DivValue::Numeric(v) => *v,
        }
    }
}

/// Div of a flow map. Exact flows use ln det e^{tA} = t tr A; numeric flows
/// take ln|det| of the computed Jacobian.
pub fn group_divergence(phi: &FlowMap) -> Result<DivValue> {
    match phi {
        FlowMap::Exact { field, t, .. } => Ok(DivValue::Exact(t * field.a.trace())),
        FlowMap::Numeric { map, .. } => {
            let d = map.mat.det();
            if d == 0.0 {
                return Err(Error::NotInvertible);
            }
            Ok(DivValue::Numeric(d.abs().ln()))
        }
    }
}

/// Div of a bare affine map in exact mode: defined (and zero) only for
/// unimodular Jacobians, where ln|det| stays rational.
fn div_of_map_exact(map: &AffineMap) -> Result<Rat> {
    let d = map.mat.det();
    if d.abs() == rone() {
        Ok(rzero())
    } else {
        Err(Error::Precondition(
            "exact group divergence of a composite needs a unimodular Jacobian".into(),
        ))
    }
}

/// Verification report with both sides rendered for display.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub lhs: String,
    pub rhs: String,
    pub residual: f64,
    pub mode: String,
    pub pass: bool,
}

impl CheckReport {
    pub fn exact(lhs: &Rat, rhs: &Rat) -> Self {
        CheckReport {
            lhs: lhs.to_string(),
            rhs: rhs.to_string(),
            residual: to_f64(&(lhs - rhs)).abs(),
            mode: "exact".into(),
            pass: lhs == rhs,
        }
    }

    pub fn numeric(lhs: f64, rhs: f64, tol: f64) -> Self {
        let residual = (lhs - rhs).abs();
        CheckReport {
            lhs: format!("{lhs}"),
            rhs: format!("{rhs}"),
            residual,
            mode: "numeric".into(),
            pass: residual < tol,
        }
    }
}

/// Check the cocycle law Div(phi o psi) = psi^*(Div phi) + Div psi.
/// Both divergences are constants here, so the pull-back acts trivially.
pub fn div_cocycle_check(phi: &FlowMap, psi: &FlowMap) -> Result<CheckReport> {
    if phi.dim() != psi.dim() {
        return Err(Error::DimensionMismatch(phi.dim(), psi.dim()));
    }
    match (phi, psi) {
        (FlowMap::Exact { map: mp, .. }, FlowMap::Exact { map: ms, .. }) => {
            let lhs = div_of_map_exact(&mp.compose(ms)?)?;
            let dp = group_divergence(phi)?;
            let ds = group_divergence(psi)?;
            let (DivValue::Exact(dp), DivValue::Exact(ds)) = (dp, ds) else {
                unreachable!("exact flows give exact divergences");
            };
            Ok(CheckReport::exact(&lhs, &(dp + ds)))
        }
        (FlowMap::Numeric { map: mp, .. }, FlowMap::Numeric { map: ms, .. }) => {
            let comp = mp.compose(ms);
            let lhs = comp.mat.det().abs().ln();
            let rhs = group_divergence(phi)?.to_f64() + group_divergence(psi)?.to_f64();
            Ok(CheckReport::numeric(lhs, rhs, 1e-9))
        }
        _ => Err(Error::ModeMix),
    }
}

/// Check Div(Exp(tY)) = int_0^t div Y o Exp(sY) ds.
///
/// For an affine field div Y = tr A is constant, so the exact branch reduces
/// to t tr A; the numeric branch evaluates the integrand honestly along the
/// flow through a probe point and integrates by quadrature.
pub fn div3_check(y: &AffineField, t_exact: Option<&Rat>, t_numeric: Option<f64>) -> Result<CheckReport> {
    match (t_exact, t_numeric) {
        (Some(t), None) => {
            let lhs = match group_divergence(&flow_exact(y, t)?)? {
                DivValue::Exact(r) => r,
                DivValue::Numeric(_) => unreachable!(),
            };
            // Integrand div Y o Exp(sY) = tr A, a polynomial (constant) in s.
            let rhs = t * y.a.trace();
            Ok(CheckReport::exact(&lhs, &rhs))
        }
        (None, Some(t)) => {
            let phi = flow_numeric(y, t);
            let lhs = group_divergence(&phi)?.to_f64();
            let div_poly = y.to_vector_field().divergence().to_f64();
            let x0: Vec<f64> = (0..y.dim()).map(|i| 0.3 + 0.1 * i as f64).collect();
            let rhs = integrate(
                |s| {
                    let FlowMap::Numeric { map, .. } = flow_numeric(y, s) else {
                        unreachable!()
                    };
                    div_poly.eval_at(&map.apply(&x0))
                },
                0.0,
                t,
                1e-12,
            );
            Ok(CheckReport::numeric(lhs, rhs, 1e-9))
        }
        _ => Err(Error::Precondition("exactly one time mode must be given".into())),
    }
}

// ---------------------------------------------------------------------------
// Gauss-Legendre quadrature
// ---------------------------------------------------------------------------

/// Nodes and weights of the m-point Gauss-Legendre rule on [-1, 1],
/// computed by Newton iteration on the Legendre polynomial.
pub fn gauss_legendre_nodes(m: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(m, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre(m, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((x, w));
    }
    out
}

/// Value and derivative of the Legendre polynomial P_m at x.
fn legendre(m: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=m {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn gl_fixed(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, nodes: &[(f64, f64)]) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    nodes
        .iter()
        .map(|&(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

/// Adaptive Gauss-Legendre integration of a smooth scalar function.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let nodes = gauss_legendre_nodes(16);
    fn recurse(
        f: &mut impl FnMut(f64) -> f64,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: usize,
        nodes: &[(f64, f64)],
    ) -> f64 {
        let mid = 0.5 * (a + b);
        let left = gl_fixed(f, a, mid, nodes);
        let right = gl_fixed(f, mid, b, nodes);
        if (left + right - whole).abs() < tol || depth >= 20 {
            left + right
        } else {
            recurse(f, a, mid, left, 0.5 * tol, depth + 1, nodes)
                + recurse(f, mid, b, right, 0.5 * tol, depth + 1, nodes)
        }
    }
    let whole = gl_fixed(&mut f, a, b, &nodes);
    recurse(&mut f, a, b, whole, tol, 0, &nodes)
}

/// Fixed high-order Gauss-Legendre integration of a polynomial-valued
/// function of one real parameter (coefficients integrated independently).
pub fn integrate_polyf(mut f: impl FnMut(f64) -> PolyF, a: f64, b: f64, n_vars: usize) -> PolyF {
    let nodes = gauss_legendre_nodes(24);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = PolyF::zero(n_vars);
    for &(x, w) in &nodes {
        let v = f(mid + half * x);
        for (alpha, c) in v.terms() {
            acc.add_term(alpha.clone(), w * half * c);
        }
    }
    acc
}

// ---------------------------------------------------------------------------
// One-parameter groups on first-order operators
// ---------------------------------------------------------------------------

/// (e^{kt} - 1)/k with the k = 0 branch taken as the explicit limit t.
pub fn kappa_factor(kappa: f64, t: f64) -> f64 {
    if kappa == 0.0 {
        t
    } else {
        ((kappa * t).exp() - 1.0) / kappa
    }
}

/// The scaling components of the group: K_t = e^{kt}.
pub fn k_t(kappa: f64, t: f64) -> f64 {
    (kappa * t).exp()
}

/// Lambda_t = lambda (e^{kt} - 1)/k, with the k = 0 limit lambda t.
pub fn lambda_t(kappa: f64, lambda: f64, t: f64) -> f64 {
    lambda * kappa_factor(kappa, t)
}

/// Solve the group ODE d/dt Phi_t(u) = C(Phi_t u) exactly.
///
/// The vector part is the flow pull-back of X; the function part solves a
/// linear inhomogeneous ODE along the flow:
///   f_t = [e^{kt} f + lambda (e^{kt}-1)/k div X + I_t] o Exp(tY),
/// where I_t integrates the omega-pairing transported by the flow. For an
/// affine Y the Jacobian of the flow is constant in x, which removes the
/// nested divergence-correction integral (div of a flow push-forward is the
/// plain composition of div X with the inverse flow).
///
/// Exact mode needs a nilpotent matrix part and kappa = 0 (the scaling factor
/// e^{kt} leaves the rationals otherwise).
pub fn one_param_group_exact(p: &Deriv1Params, t: &Rat, u: &FirstOrderOp) -> Result<FirstOrderOp> {
    let n = u.dim();
    if p.dim() != n {
        return Err(Error::DimensionMismatch(p.dim(), n));
    }
    let y = AffineField::from_vector_field(&p.y)?;
    if !y.is_nilpotent() {
        return Err(Error::NotNilpotent);
    }
    if !p.kappa.is_zero() && !t.is_zero() {
        return Err(Error::Precondition(
            "exact one-parameter mode requires kappa = 0".into(),
        ));
    }
    let phi = match flow_exact(&y, t)? {
        FlowMap::Exact { map, .. } => map,
        _ => unreachable!(),
    };
    let phi_minus = match flow_exact(&y, &-t)? {
        FlowMap::Exact { map, .. } => map,
        _ => unreachable!(),
    };
    // Vector part: X_t = Exp(-tY)_* X (solves dX/dt = [Y, X]).
    let x_out = phi_minus.push_forward(&u.x)?;
    // Function part before transport by the flow.
    let mut g = u.f.clone();
    g = g.add(&u.x.divergence().scale(&(&p.lambda * t)))?;
    g = g.add(&omega_integral_exact(&y, p, u, t)?)?;
    let f_out = phi.pull_back(&g)?;
    FirstOrderOp::new(f_out, x_out)
}

/// Symbolic integral int_0^t sum_{ij} omega_i(Exp(-sY)x) (e^{-sA})_{ij} X^j(x) ds.
///
/// s enters polynomially (nilpotent A), so the integral is carried out on a
/// polynomial ring with one extra variable for s and then evaluated.
fn omega_integral_exact(
    y: &AffineField,
    p: &Deriv1Params,
    u: &FirstOrderOp,
    t: &Rat,
) -> Result<Poly> {
    let n = y.dim();
    if p.omega.is_zero() || u.x.is_zero() {
        return Ok(Poly::zero(n));
    }
    let q = y.a.nilpotency_index().ok_or(Error::NotNilpotent)?;
    let svar = n; // index of the extra time variable
    // Monomial s^k in the extended ring.
    fn s_power(n: usize, k: u32) -> MultiIndex {
        let mut e = vec![0u32; n + 1];
        e[n] = k;
        MultiIndex(e)
    }
    // Entries of e^{-sA} and of the translation part of Exp(-sY), as
    // polynomials in (x, s); only s actually appears.
    let mut emat = vec![vec![Poly::zero(n + 1); n]; n];
    let mut evec = vec![Poly::zero(n + 1); n];
    let mut pow = RatMat::identity(n);
    let mut akb: Vec<Rat> = y.b.clone();
    for k in 0..q {
        let sign = if k % 2 == 0 { rone() } else { -rone() };
        let ck = &sign / factorial(k as u32);
        for i in 0..n {
            for j in 0..n {
                let c = pow.get(i, j) * &ck;
                if !c.is_zero() {
                    emat[i][j].add_term(s_power(n, k as u32), c);
                }
            }
        }
        // Translation of Exp(-sY): sum_k A^k b (-s)^{k+1}/(k+1)!.
        let ck1 = -&sign / factorial(k as u32 + 1);
        for i in 0..n {
            let c = &akb[i] * &ck1;
            if !c.is_zero() {
                evec[i].add_term(s_power(n, k as u32 + 1), c);
            }
        }
        pow = pow.mul(&y.a);
        akb = y.a.mul_vec(&akb);
    }
    // Images of the coordinates under Exp(-sY).
    let images: Vec<Poly> = (0..n)
        .map(|i| {
            let mut acc = evec[i].clone();
            for j in 0..n {
                acc = acc
                    .add(&emat[i][j].mul(&Poly::var(n + 1, j).expect("in range")).expect("dim"))
                    .expect("dim");
            }
            acc
        })
        .collect();
    let mut integrand = Poly::zero(n + 1);
    for i in 0..n {
        let wi = p.omega.component(i).substitute(&images)?;
        let mut flowed_x = Poly::zero(n + 1);
        for j in 0..n {
            flowed_x = flowed_x.add(&emat[i][j].mul(&u.x.component(j).lift(n + 1))?)?;
        }
        integrand = integrand.add(&wi.mul(&flowed_x)?)?;
    }
    // Integrate s over [0, t]: x^beta s^m -> x^beta t^{m+1}/(m+1).
    let mut out = Poly::zero(n);
    for (alpha, c) in integrand.terms() {
        let m = alpha.0[svar] as usize;
        let beta = MultiIndex(alpha.0[..n].to_vec());
        out.add_term(beta, c * rat_pow(t, m + 1) / rat(m as i64 + 1, 1));
    }
    Ok(out)
}

/// A first-order operator with double-precision polynomial data, closed
/// under the numeric one-parameter groups (which involve e^{tA} and e^{kt}).
#[derive(Debug, Clone)]
pub struct NumericFirstOrder {
    pub f: PolyF,
    pub x: Vec<PolyF>,
}

impl NumericFirstOrder {
    pub fn from_exact(u: &FirstOrderOp) -> Self {
        NumericFirstOrder {
            f: u.f.to_f64(),
            x: u.x.components().iter().map(|c| c.to_f64()).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Apply to a function: f h + sum_i X^i d_i h.
    pub fn apply(&self, h: &PolyF) -> Result<PolyF> {
        let mut acc = self.f.mul(h)?;
        for (i, xi) in self.x.iter().enumerate() {
            acc = acc.add(&xi.mul(&h.diff(i)?)?)?;
        }
        Ok(acc)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(NumericFirstOrder {
            f: self.f.sub(&other.f)?,
            x: self
                .x
                .iter()
                .zip(&other.x)
                .map(|(a, b)| a.sub(b))
                .collect::<Result<_>>()?,
        })
    }

    pub fn scale(&self, c: f64) -> Self {
        NumericFirstOrder {
            f: self.f.map_coeffs(|v| c * v),
            x: self.x.iter().map(|p| p.map_coeffs(|v| c * v)).collect(),
        }
    }

    fn field_apply(x: &[PolyF], h: &PolyF) -> Result<PolyF> {
        let mut acc = PolyF::zero(h.dim());
        for (i, xi) in x.iter().enumerate() {
            acc = acc.add(&xi.mul(&h.diff(i)?)?)?;
        }
        Ok(acc)
    }

    /// [f+X, g+Z] = (X(g) - Z(f)) + [X, Z].
    pub fn bracket(&self, other: &Self) -> Result<Self> {
        let f = Self::field_apply(&self.x, &other.f)?
            .sub(&Self::field_apply(&other.x, &self.f)?)?;
        let x = (0..self.dim())
            .map(|i| {
                Self::field_apply(&self.x, &other.x[i])?
                    .sub(&Self::field_apply(&other.x, &self.x[i])?)
            })
            .collect::<Result<_>>()?;
        Ok(NumericFirstOrder { f, x })
    }

    pub fn divergence(&self) -> PolyF {
        let n = self.dim();
        let mut acc = PolyF::zero(n);
        for (i, xi) in self.x.iter().enumerate() {
            acc = acc.add(&xi.diff(i).expect("in range")).expect("dim");
        }
        acc
    }

    /// Values of the operator applied to the probe basis {1, x_i, x_i x_j},
    /// evaluated on the probe grid; a finite faithful fingerprint for
    /// low-degree data.
    pub fn probe_values(&self) -> Vec<f64> {
        let n = self.dim();
        let mut vals = Vec::new();
        for h in probe_functions(n) {
            let applied = self.apply(&h).expect("matching dimension");
            for pt in probe_points(n) {
                vals.push(applied.eval_at(&pt));
            }
        }
        vals
    }

    /// Max-norm distance of probe fingerprints.
    pub fn probe_distance(&self, other: &Self) -> f64 {
        self.probe_values()
            .iter()
            .zip(other.probe_values())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Probe grid {0, +-1, +-1/2}^n (coarsened to {0, +-1}^n for n >= 3).
pub fn probe_points(n: usize) -> Vec<Vec<f64>> {
    let axis: &[f64] = if n >= 3 {
        &[0.0, 1.0, -1.0]
    } else {
        &[0.0, 1.0, -1.0, 0.5, -0.5]
    };
    let mut pts = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::new();
        for p in &pts {
            for &v in axis {
                let mut q = p.clone();
                q.push(v);
                next.push(q);
            }
        }
        pts = next;
    }
    pts
}

/// Probe functions {1, x_i, x_i x_j (i <= j)}.
pub fn probe_functions(n: usize) -> Vec<PolyF> {
    let mut out = vec![PolyF::one(n)];
    for i in 0..n {
        out.push(Poly::var(n, i).expect("in range").to_f64());
    }
    for i in 0..n {
        for j in i..n {
            let mut alpha = vec![0u32; n];
            alpha[i] += 1;
            alpha[j] += 1;
            let mut p = PolyF::zero(n);
            p.add_term(MultiIndex(alpha), 1.0);
            out.push(p);
        }
    }
    out
}

/// Double-precision derivation data mirroring [`Deriv1Params`].
#[derive(Debug, Clone)]
pub struct NumericDeriv1 {
    pub y: Vec<PolyF>,
    pub kappa: f64,
    pub lambda: f64,
    pub omega: Vec<PolyF>,
}

impl NumericDeriv1 {
    pub fn from_exact(p: &Deriv1Params) -> Self {
        NumericDeriv1 {
            y: p.y.components().iter().map(|c| c.to_f64()).collect(),
            kappa: to_f64(&p.kappa),
            lambda: to_f64(&p.lambda),
            omega: p.omega.components().iter().map(|c| c.to_f64()).collect(),
        }
    }
}

/// Numeric counterpart of the derivation C(f+X).
pub fn deriv_d1_numeric(p: &NumericDeriv1, u: &NumericFirstOrder) -> Result<NumericFirstOrder> {
    let n = u.dim();
    let yop = NumericFirstOrder {
        f: PolyF::zero(n),
        x: p.y.clone(),
    };
    let mut out = yop.bracket(u)?;
    out.f = out.f.add(&u.f.map_coeffs(|v| p.kappa * v))?;
    out.f = out.f.add(&u.divergence().map_coeffs(|v| p.lambda * v))?;
    for (wi, xi) in p.omega.iter().zip(&u.x) {
        out.f = out.f.add(&wi.mul(xi)?)?;
    }
    Ok(out)
}

/// Numeric one-parameter group for arbitrary affine Y and arbitrary kappa.
/// Same solution formula as the exact mode, with quadrature for the
/// omega-integral and dense matrix exponentials for the flow.
pub fn one_param_group_numeric(
    p: &Deriv1Params,
    t: f64,
    u: &NumericFirstOrder,
) -> Result<NumericFirstOrder> {
    let n = u.dim();
    if p.dim() != n {
        return Err(Error::DimensionMismatch(p.dim(), n));
    }
    let y = AffineField::from_vector_field(&p.y)?;
    let kappa = to_f64(&p.kappa);
    let lambda = to_f64(&p.lambda);
    let FlowMap::Numeric { map: phi, .. } = flow_numeric(&y, t) else {
        unreachable!()
    };
    let FlowMap::Numeric { map: phi_minus, .. } = flow_numeric(&y, -t) else {
        unreachable!()
    };
    // Vector part: X_t = Exp(-tY)_* X, i.e. e^{-tA} . X o Exp(tY).
    let x_out: Vec<PolyF> = (0..n)
        .map(|i| {
            let mut acc = PolyF::zero(n);
            for (j, xj) in u.x.iter().enumerate() {
                let c = phi_minus.mat.get(i, j);
                if c != 0.0 {
                    acc = acc.add(&phi.pull_back(xj)?.map_coeffs(|v| c * v))?;
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    // Function part.
    let omega: Vec<PolyF> = p.omega.components().iter().map(|c| c.to_f64()).collect();
    let has_omega = omega.iter().any(|w| !w.is_zero());
    let integral = if has_omega {
        integrate_polyf(
            |s| {
                let FlowMap::Numeric { map: ms, .. } = flow_numeric(&y, -s) else {
                    unreachable!()
                };
                let mut acc = PolyF::zero(n);
                for i in 0..n {
                    let wi = ms.pull_back(&omega[i]).expect("dimension");
                    let mut flowed_x = PolyF::zero(n);
                    for (j, xj) in u.x.iter().enumerate() {
                        let c = ms.mat.get(i, j);
                        if c != 0.0 {
                            flowed_x =
                                flowed_x.add(&xj.map_coeffs(|v| c * v)).expect("dimension");
                        }
                    }
                    let term = wi.mul(&flowed_x).expect("dimension");
                    let weight = (kappa * (t - s)).exp();
                    acc = acc.add(&term.map_coeffs(|v| weight * v)).expect("dimension");
                }
                acc
            },
            0.0,
            t,
            n,
        )
    } else {
        PolyF::zero(n)
    };
    let mut div = PolyF::zero(n);
    for (i, xi) in u.x.iter().enumerate() {
        div = div.add(&xi.diff(i)?)?;
    }
    let mut g = u.f.map_coeffs(|v| k_t(kappa, t) * v);
    g = g.add(&div.map_coeffs(|v| lambda_t(kappa, lambda, t) * v))?;
    g = g.add(&integral)?;
    let f_out = phi.pull_back(&g)?;
    Ok(NumericFirstOrder { f: f_out, x: x_out })
}

/// Report of the finite-difference generator check.
#[derive(Debug, Clone, Serialize)]
pub struct GeneratorReport {
    pub errors: Vec<f64>,
    pub orders: Vec<f64>,
    pub pass: bool,
}

/// Central difference (Phi_h u - Phi_{-h} u)/2h against the derivation, with
/// the convergence order measured over h, h/2, h/4.
pub fn generator_check(p: &Deriv1Params, u: &FirstOrderOp, h: f64) -> Result<GeneratorReport> {
    if h <= 0.0 {
        return Err(Error::Precondition("step must be positive".into()));
    }
    let un = NumericFirstOrder::from_exact(u);
    let target = deriv_d1_numeric(&NumericDeriv1::from_exact(p), &un)?;
    let mut errors = Vec::new();
    for k in 0..3 {
        let hk = h / (1 << k) as f64;
        let plus = one_param_group_numeric(p, hk, &un)?;
        let minus = one_param_group_numeric(p, -hk, &un)?;
        let diff = plus.sub(&minus)?.scale(0.5 / hk);
        errors.push(diff.probe_distance(&target));
    }
    let mut orders = Vec::new();
    for w in errors.windows(2) {
        if w[1] > 1e-14 {
            orders.push((w[0] / w[1]).log2());
        }
    }
    // Either clean second-order convergence, or the errors are already at
    // round-off (exactly reproduced groups differentiate exactly).
    let tiny = errors.iter().all(|&e| e < 1e-12);
    let pass = tiny || orders.iter().all(|&o| o >= 1.9);
    Ok(GeneratorReport {
        errors,
        orders,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rint;
    use crate::symbols::ClosedOneForm;

    fn shear_field() -> AffineField {
        // Y = x1 d2
        let mut a = RatMat::zero(2);
        a.set(1, 0, rone());
        AffineField::new(a, vec![rzero(); 2]).unwrap()
    }

    #[test]
    fn flow_examples() {
        // Y = d1: translation
        let y = AffineField::new(RatMat::zero(1), vec![rone()]).unwrap();
        let FlowMap::Exact { map, .. } = flow_exact(&y, &rat(3, 2)).unwrap() else {
            panic!()
        };
        assert_eq!(map.apply(&[rint(2)]), vec![rat(7, 2)]);
        // Y = x1 d2: shear (x1, x2 + t x1)
        let FlowMap::Exact { map, .. } = flow_exact(&shear_field(), &rint(2)).unwrap() else {
            panic!()
        };
        assert_eq!(map.apply(&[rint(3), rint(1)]), vec![rint(3), rint(7)]);
        // Y = x1 d1 numeric: x1 -> e x1
        let mut a = RatMat::zero(1);
        a.set(0, 0, rone());
        let y = AffineField::new(a, vec![rzero()]).unwrap();
        let FlowMap::Numeric { map, .. } = flow_numeric(&y, 1.0) else {
            panic!()
        };
        assert!((map.apply(&[1.0])[0] - std::f64::consts::E).abs() < 1e-12);
    }

    #[test]
    fn flow_group_law_exact() {
        let y = shear_field();
        let (t, s) = (rat(1, 3), rat(5, 2));
        let FlowMap::Exact { map: mt, .. } = flow_exact(&y, &t).unwrap() else {
            panic!()
        };
        let FlowMap::Exact { map: ms, .. } = flow_exact(&y, &s).unwrap() else {
            panic!()
        };
        let FlowMap::Exact { map: mts, .. } = flow_exact(&y, &(t + s)).unwrap() else {
            panic!()
        };
        assert_eq!(mt.compose(&ms).unwrap(), mts);
    }

    #[test]
    fn group_divergence_examples() {
        // translation -> 0
        let y = AffineField::new(RatMat::zero(1), vec![rone()]).unwrap();
        assert_eq!(
            group_divergence(&flow_exact(&y, &rint(5)).unwrap()).unwrap(),
            DivValue::Exact(rzero())
        );
        // Exp(t x1 d1) -> t
        let mut a = RatMat::zero(1);
        a.set(0, 0, rone());
        let y = AffineField::new(a, vec![rzero()]).unwrap();
        let d = group_divergence(&flow_numeric(&y, 0.7)).unwrap().to_f64();
        assert!((d - 0.7).abs() < 1e-12);
        // nilpotent shear -> 0
        assert_eq!(
            group_divergence(&flow_exact(&shear_field(), &rat(9, 4)).unwrap()).unwrap(),
            DivValue::Exact(rzero())
        );
    }

    #[test]
    fn cocycle_and_div3() {
        // exact: two shears
        let phi = flow_exact(&shear_field(), &rat(1, 2)).unwrap();
        let psi = flow_exact(&shear_field(), &rat(-7, 3)).unwrap();
        assert!(div_cocycle_check(&phi, &psi).unwrap().pass);
        // numeric: Exp(t x1 d2) against Exp(s x2 d1)
        let mut a2 = RatMat::zero(2);
        a2.set(0, 1, rone());
        let y2 = AffineField::new(a2, vec![rzero(); 2]).unwrap();
        let phi = flow_numeric(&shear_field(), 0.8);
        let psi = flow_numeric(&y2, -1.3);
        assert!(div_cocycle_check(&phi, &psi).unwrap().pass);
        // div3 exact and numeric
        assert!(div3_check(&shear_field(), Some(&rat(4, 3)), None).unwrap().pass);
        let mut a = RatMat::zero(1);
        a.set(0, 0, rat(1, 2));
        let y = AffineField::new(a, vec![rone()]).unwrap();
        assert!(div3_check(&y, None, Some(1.7)).unwrap().pass);
    }

    #[test]
    fn quadrature_is_accurate() {
        let v = integrate(|x| x.exp(), 0.0, 1.0, 1e-13);
        assert!((v - (std::f64::consts::E - 1.0)).abs() < 1e-12);
        let v = integrate(|x| (5.0 * x).sin(), 0.0, 2.0, 1e-13);
        assert!((v - (1.0 - (10.0f64).cos()) / 5.0).abs() < 1e-12);
    }

    fn zero_form(n: usize) -> ClosedOneForm {
        ClosedOneForm::zero(n)
    }

    #[test]
    fn one_param_pure_kappa_and_lambda() {
        let n = 1;
        let x1 = Poly::var(n, 0).unwrap();
        // p = (Y=0, kappa, 0, 0): Phi_t(f) = e^{kt} f (numeric)
        let p = Deriv1Params::new(VectorField::zero(n), rint(2), rzero(), zero_form(n)).unwrap();
        let u = NumericFirstOrder::from_exact(&FirstOrderOp::from_function(x1.clone()));
        let out = one_param_group_numeric(&p, 0.5, &u).unwrap();
        let expect = u.scale(1.0f64.exp());
        assert!(out.probe_distance(&expect) < 1e-12);
        // p = (Y=0, 0, lambda, 0): Phi_t(X+f) = X + f + lambda t div X (exact)
        let p = Deriv1Params::new(VectorField::zero(n), rzero(), rat(3, 2), zero_form(n)).unwrap();
        let x = VectorField::new(vec![x1.pow(2)]).unwrap();
        let u = FirstOrderOp::from_field(x.clone());
        let out = one_param_group_exact(&p, &rint(2), &u).unwrap();
        // f-part: 3/2 * 2 * 2 x1 = 6 x1
        assert_eq!(out.f, x1.scale(&rint(6)));
        assert_eq!(out.x, x);
    }

    #[test]
    fn one_param_group_law_exact() {
        let n = 2;
        let mut rng = crate::sample::rng_from_seed(41);
        // nilpotent Y = x1 d2 + d1, kappa = 0, generic lambda and omega
        let y = VectorField::new(vec![
            Poly::one(n),
            Poly::var(n, 0).unwrap(),
        ])
        .unwrap();
        let p = Deriv1Params::new(
            y,
            rzero(),
            rat(-2, 3),
            crate::sample::random_closed_form(&mut rng, n, 2),
        )
        .unwrap();
        let u = FirstOrderOp::new(
            crate::sample::random_poly(&mut rng, n, 2, 3),
            crate::sample::random_vector_field(&mut rng, n, 2),
        )
        .unwrap();
        let (t, s) = (rat(1, 2), rat(-4, 3));
        let a = one_param_group_exact(&p, &t, &one_param_group_exact(&p, &s, &u).unwrap()).unwrap();
        let b = one_param_group_exact(&p, &(&t + &s), &u).unwrap();
        assert_eq!(a, b);
        // Phi_0 = id exactly
        let id = one_param_group_exact(&p, &rzero(), &u).unwrap();
        assert_eq!(id, u);
    }

    #[test]
    fn one_param_group_law_numeric_nonnilpotent() {
        let n = 2;
        let mut rng = crate::sample::rng_from_seed(43);
        // Y = x1 d1 - x2 d2 + d2 (not nilpotent), kappa != 0
        let y = VectorField::new(vec![
            Poly::var(n, 0).unwrap(),
            Poly::one(n).sub(&Poly::var(n, 1).unwrap()).unwrap(),
        ])
        .unwrap();
        let p = Deriv1Params::new(
            y,
            rat(1, 2),
            rat(2, 3),
            crate::sample::random_closed_form(&mut rng, n, 2),
        )
        .unwrap();
        let u = NumericFirstOrder::from_exact(
            &FirstOrderOp::new(
                crate::sample::random_poly(&mut rng, n, 2, 3),
                crate::sample::random_vector_field(&mut rng, n, 2),
            )
            .unwrap(),
        );
        let (t, s) = (0.4, -0.75);
        let a =
            one_param_group_numeric(&p, t, &one_param_group_numeric(&p, s, &u).unwrap()).unwrap();
        let b = one_param_group_numeric(&p, t + s, &u).unwrap();
        assert!(a.probe_distance(&b) < 1e-9, "{}", a.probe_distance(&b));
        // Phi_t preserves the bracket
        let v = NumericFirstOrder::from_exact(
            &FirstOrderOp::new(
                crate::sample::random_poly(&mut rng, n, 2, 3),
                crate::sample::random_vector_field(&mut rng, n, 2),
            )
            .unwrap(),
        );
        let lhs = one_param_group_numeric(&p, t, &u.bracket(&v).unwrap()).unwrap();
        let rhs = one_param_group_numeric(&p, t, &u)
            .unwrap()
            .bracket(&one_param_group_numeric(&p, t, &v).unwrap())
            .unwrap();
        assert!(lhs.probe_distance(&rhs) < 1e-9);
    }

    #[test]
    fn exact_and_numeric_agree() {
        let n = 2;
        let mut rng = crate::sample::rng_from_seed(47);
        let y = VectorField::new(vec![Poly::var(n, 1).unwrap(), Poly::one(n)]).unwrap();
        let p = Deriv1Params::new(
            y,
            rzero(),
            rat(1, 3),
            crate::sample::random_closed_form(&mut rng, n, 2),
        )
        .unwrap();
        let u = FirstOrderOp::new(
            crate::sample::random_poly(&mut rng, n, 2, 3),
            crate::sample::random_vector_field(&mut rng, n, 2),
        )
        .unwrap();
        let t = rat(3, 4);
        let exact = one_param_group_exact(&p, &t, &u).unwrap();
        let numeric = one_param_group_numeric(&p, 0.75, &NumericFirstOrder::from_exact(&u)).unwrap();
        assert!(
            NumericFirstOrder::from_exact(&exact).probe_distance(&numeric) < 1e-9
        );
    }

    #[test]
    fn generator_examples() {
        let n = 1;
        let x1 = Poly::var(n, 0).unwrap();
        // p = (0,1,0,0) on f = x1
        let p = Deriv1Params::new(VectorField::zero(n), rone(), rzero(), zero_form(n)).unwrap();
        let u = FirstOrderOp::from_function(x1.clone());
        assert!(generator_check(&p, &u, 0.1).unwrap().pass);
        // p = (0,0,1,0) on x1^2 d1 -> 2 x1
        let p = Deriv1Params::new(VectorField::zero(n), rzero(), rone(), zero_form(n)).unwrap();
        let u = FirstOrderOp::from_field(VectorField::new(vec![x1.pow(2)]).unwrap());
        assert!(generator_check(&p, &u, 0.1).unwrap().pass);
        // p = (d1,0,0,0) on x1 -> 1
        let p = Deriv1Params::new(
            VectorField::new(vec![Poly::one(n)]).unwrap(),
            rzero(),
            rzero(),
            zero_form(n),
        )
        .unwrap();
        let u = FirstOrderOp::from_function(x1);
        assert!(generator_check(&p, &u, 0.1).unwrap().pass);
    }

    #[test]
    fn scaling_component_recursions() {
        let (kappa, lambda) = (0.7, -1.3);
        for &(t, s) in &[(0.3, 0.9), (-0.5, 0.2), (1.1, -1.7)] {
            assert!((k_t(kappa, t) * k_t(kappa, s) - k_t(kappa, t + s)).abs() < 1e-12);
            let l = lambda_t(kappa, lambda, t) + k_t(kappa, t) * lambda_t(kappa, lambda, s);
            assert!((l - lambda_t(kappa, lambda, t + s)).abs() < 1e-12);
        }
        assert_eq!(k_t(0.3, 0.0), 1.0);
        assert_eq!(lambda_t(0.3, 2.0, 0.0), 0.0);
        // kappa = 0 branch is the limit t
        assert_eq!(kappa_factor(0.0, 2.5), 2.5);
    }

    #[test]
    fn push_pull_divergence_identity() {
        // div(phi_* X) = (div X) o phi^{-1} for affine phi (constant Jacobian).
        let mut rng = crate::sample::rng_from_seed(53);
        let n = 2;
        let FlowMap::Exact { map, .. } = flow_exact(&shear_field(), &rat(5, 7)).unwrap() else {
            panic!()
        };
        for _ in 0..10 {
            let x = crate::sample::random_vector_field(&mut rng, n, 2);
            let lhs = map.push_forward(&x).unwrap().divergence();
            let rhs = map.inverse().unwrap().pull_back(&x.divergence()).unwrap();
            assert_eq!(lhs, rhs);
        }
    }
}
