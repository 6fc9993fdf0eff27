//! Sparse exact polynomials: the commutative workhorses of the crate.
//!
//! - [`PolyG`]: multivariate polynomial over a generic coefficient scalar;
//!   [`Poly`] (rational) is the exact instantiation, [`PolyF`] the `f64` one
//!   used by the numeric flow mode.
//! - [`SymbolPoly`]: polynomial in `x` and `xi`, the fiberwise-polynomial
//!   functions on the cotangent bundle.
//! - [`TrigPoly`]: trigonometric polynomials on the circle, with integer
//!   (periodic) or half-integer (antiperiodic) modes.
//!
//! All values are canonical: zero coefficients are never stored, so equality
//! is plain map equality.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::multiindex::MultiIndex;
use crate::rat::{rat, Rat};
use crate::scalar::Scalar;

/// Sparse multivariate polynomial in `x1..xn` over scalar `C`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyG<C: Scalar> {
    n: usize,
    terms: BTreeMap<MultiIndex, C>,
}

pub type Poly = PolyG<Rat>;
pub type PolyF = PolyG<f64>;

impl<C: Scalar> PolyG<C> {
    pub fn zero(n: usize) -> Self {
        PolyG {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: C) -> Self {
        let mut p = Self::zero(n);
        p.add_term(MultiIndex::zero(n), c);
        p
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, C::one())
    }

    pub fn var(n: usize, i: usize) -> Result<Self> {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, dim: n });
        }
        let mut p = Self::zero(n);
        p.add_term(MultiIndex::unit(n, i), C::one());
        Ok(p)
    }

    pub fn monomial(n: usize, exps: &[u32], c: C) -> Self {
        let mut p = Self::zero(n);
        p.add_term(MultiIndex(exps.to_vec()).padded(n), c);
        p
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &C)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coeff(&self, alpha: &MultiIndex) -> C {
        self.terms.get(alpha).cloned().unwrap_or_else(C::zero)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|a| a.degree()).max()
    }

    pub fn add_term(&mut self, alpha: MultiIndex, c: C) {
        debug_assert_eq!(alpha.len(), self.n);
        let entry = self.terms.entry(alpha.clone()).or_insert_with(C::zero);
        *entry = entry.add(&c);
        if entry.is_zero() {
            self.terms.remove(&alpha);
        }
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
        PolyG {
            n: self.n,
            terms: self.terms.iter().map(|(a, c)| (a.clone(), c.neg())).collect(),
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Self::zero(self.n);
        if c.is_zero() {
            return out;
        }
        for (a, v) in &self.terms {
            out.add_term(a.clone(), v.mul(c));
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = Self::zero(self.n);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                out.add_term(a.add(b), ca.mul(cb));
            }
        }
        Ok(out)
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one(self.n);
        for _ in 0..k {
            out = out.mul(self).expect("same dimension");
        }
        out
    }

    /// Formal partial derivative with respect to `x_i`.
    pub fn diff(&self, i: usize) -> Result<Self> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange { index: i, dim: self.n });
        }
        let mut out = Self::zero(self.n);
        for (a, c) in &self.terms {
            let e = a.0[i];
            if e > 0 {
                let mut v = a.0.clone();
                v[i] -= 1;
                out.add_term(MultiIndex(v), c.mul(&C::from_int(e as i64)));
            }
        }
        Ok(out)
    }

    /// Iterated derivative d^alpha.
    pub fn diff_multi(&self, alpha: &MultiIndex) -> Result<Self> {
        let mut out = self.clone();
        for (i, &e) in alpha.0.iter().enumerate() {
            for _ in 0..e {
                out = out.diff(i)?;
            }
        }
        Ok(out)
    }

    pub fn eval(&self, point: &[C]) -> Result<C> {
        if point.len() != self.n {
            return Err(Error::DimensionMismatch(self.n, point.len()));
        }
        let mut acc = C::zero();
        for (a, c) in &self.terms {
            let mut term = c.clone();
            for (i, &e) in a.0.iter().enumerate() {
                for _ in 0..e {
                    term = term.mul(&point[i]);
                }
            }
            acc = acc.add(&term);
        }
        Ok(acc)
    }

    /// Substitute each variable by the corresponding polynomial.
    ///
    /// All substituted polynomials must share one dimension, which becomes
    /// the dimension of the result.
    pub fn substitute(&self, images: &[Self]) -> Result<Self> {
        if images.len() != self.n {
            return Err(Error::DimensionMismatch(self.n, images.len()));
        }
        let m = images.first().map(|p| p.n).unwrap_or(0);
        for p in images {
            if p.n != m {
                return Err(Error::DimensionMismatch(m, p.n));
            }
        }
        let mut out = Self::zero(m);
        for (a, c) in &self.terms {
            let mut term = Self::constant(m, c.clone());
            for (i, &e) in a.0.iter().enumerate() {
                if e > 0 {
                    term = term.mul(&images[i].pow(e))?;
                }
            }
            out = out.add(&term)?;
        }
        Ok(out)
    }

    /// Substitute the affine map `x_i -> sum_j mat[i][j] x_j + b[i]`.
    pub fn compose_affine(&self, mat: &[Vec<C>], b: &[C]) -> Result<Self> {
        let images: Vec<Self> = mat
            .iter()
            .zip(b)
            .map(|(row, bi)| {
                let mut p = Self::constant(self.n, bi.clone());
                for (j, c) in row.iter().enumerate() {
                    p.add_term(MultiIndex::unit(self.n, j), c.clone());
                }
                p
            })
            .collect();
        self.substitute(&images)
    }

    /// Reinterpret in a larger dimension, appending fresh variables.
    pub fn lift(&self, m: usize) -> Self {
        assert!(m >= self.n);
        PolyG {
            n: m,
            terms: self
                .terms
                .iter()
                .map(|(a, c)| (a.padded(m), c.clone()))
                .collect(),
        }
    }

    pub fn map_coeffs<D: Scalar>(&self, f: impl Fn(&C) -> D) -> PolyG<D> {
        let mut out = PolyG::<D>::zero(self.n);
        for (a, c) in &self.terms {
            out.add_term(a.clone(), f(c));
        }
        out
    }
}

impl Poly {
    pub fn from_int(n: usize, v: i64) -> Poly {
        Poly::constant(n, Rat::from(num_bigint::BigInt::from(v)))
    }

    pub fn to_f64(&self) -> PolyF {
        self.map_coeffs(|c| crate::rat::to_f64(c))
    }

    /// Attempt exact division by `d`; `None` if the quotient is not polynomial.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        if d.is_zero() {
            return None;
        }
        let mut rem = self.clone();
        let mut quot = Poly::zero(self.n);
        // Leading term of the divisor in graded-lex order.
        let (lead, lead_c) = d.terms.iter().next_back().map(|(a, c)| (a.clone(), c.clone()))?;
        while !rem.is_zero() {
            let (ra, rc) = rem.terms.iter().next_back().map(|(a, c)| (a.clone(), c.clone()))?;
            let q = ra.checked_sub(&lead)?;
            let qc = rc / &lead_c;
            let mut qterm = Poly::zero(self.n);
            qterm.add_term(q, qc);
            quot = quot.add(&qterm).ok()?;
            rem = rem.sub(&qterm.mul(d).ok()?).ok()?;
        }
        Some(quot)
    }
}

impl PolyF {
    pub fn eval_at(&self, point: &[f64]) -> f64 {
        self.eval(&point.to_vec()).expect("dimension checked by caller")
    }

    /// Drop terms with |coefficient| below `eps` (cleans up quadrature noise).
    pub fn chop(&self, eps: f64) -> PolyF {
        let mut out = PolyF::zero(self.dim());
        for (a, c) in self.terms() {
            if c.abs() > eps {
                out.add_term(a.clone(), *c);
            }
        }
        out
    }
}

fn fmt_terms<C: Scalar>(
    f: &mut fmt::Formatter<'_>,
    terms: &[(String, C)], // (variable-part string, coefficient), highest first
) -> fmt::Result {
    if terms.is_empty() {
        return write!(f, "0");
    }
    for (idx, (vars, c)) in terms.iter().enumerate() {
        let cs = c.to_string();
        let (neg, mag) = match cs.strip_prefix('-') {
            Some(m) => (true, m.to_string()),
            None => (false, cs),
        };
        if idx == 0 {
            if neg {
                write!(f, "-")?;
            }
        } else if neg {
            write!(f, " - ")?;
        } else {
            write!(f, " + ")?;
        }
        if vars.is_empty() {
            write!(f, "{mag}")?;
        } else if mag == "1" {
            write!(f, "{vars}")?;
        } else {
            write!(f, "{mag}*{vars}")?;
        }
    }
    Ok(())
}

fn var_string(prefix: &str, alpha: &MultiIndex) -> String {
    let mut parts = Vec::new();
    for (i, &e) in alpha.0.iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(format!("{prefix}{}", i + 1)),
            _ => parts.push(format!("{prefix}{}^{}", i + 1, e)),
        }
    }
    parts.join("*")
}

impl<C: Scalar> fmt::Display for PolyG<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms: Vec<(String, C)> = self
            .terms
            .iter()
            .rev() // graded-lex descending
            .map(|(a, c)| (var_string("x", a), c.clone()))
            .collect();
        if terms.is_empty() {
            terms.clear();
        }
        fmt_terms(f, &terms)
    }
}

/// Sparse exact polynomial in `x1..xn` and `xi1..xin`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolPoly {
    n: usize,
    terms: BTreeMap<(MultiIndex, MultiIndex), Rat>,
}

impl SymbolPoly {
    pub fn zero(n: usize) -> Self {
        SymbolPoly {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, c: Rat) -> Self {
        let mut p = Self::zero(n);
        p.add_term(MultiIndex::zero(n), MultiIndex::zero(n), c);
        p
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, crate::rat::rone())
    }

    pub fn var_x(n: usize, i: usize) -> Result<Self> {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, dim: n });
        }
        let mut p = Self::zero(n);
        p.add_term(MultiIndex::unit(n, i), MultiIndex::zero(n), crate::rat::rone());
        Ok(p)
    }

    pub fn var_xi(n: usize, i: usize) -> Result<Self> {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, dim: n });
        }
        let mut p = Self::zero(n);
        p.add_term(MultiIndex::zero(n), MultiIndex::unit(n, i), crate::rat::rone());
        Ok(p)
    }

    pub fn from_poly(p: &Poly) -> Self {
        let mut out = Self::zero(p.dim());
        for (a, c) in p.terms() {
            out.add_term(a.clone(), MultiIndex::zero(p.dim()), c.clone());
        }
        out
    }

    /// The purely-x part must be total: errors if any xi appears.
    pub fn to_poly(&self) -> Result<Poly> {
        let mut out = Poly::zero(self.n);
        for ((a, b), c) in &self.terms {
            if !b.is_zero() {
                return Err(Error::Precondition(
                    "symbol has xi-dependence; not a base function".into(),
                ));
            }
            out.add_term(a.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(MultiIndex, MultiIndex), &Rat)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, x: MultiIndex, xi: MultiIndex, c: Rat) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(xi.len(), self.n);
        let key = (x, xi);
        let entry = self.terms.entry(key.clone()).or_insert_with(crate::rat::rzero);
        *entry += c;
        if num_traits::Zero::is_zero(entry) {
            self.terms.remove(&key);
        }
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
        for ((a, b), c) in &other.terms {
            out.add_term(a.clone(), b.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        SymbolPoly {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(k, c)| (k.clone(), -c))
                .collect(),
        }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        let mut out = Self::zero(self.n);
        for ((a, b), v) in &self.terms {
            out.add_term(a.clone(), b.clone(), v * c);
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = Self::zero(self.n);
        for ((ax, axi), ca) in &self.terms {
            for ((bx, bxi), cb) in &other.terms {
                out.add_term(ax.add(bx), axi.add(bxi), ca * cb);
            }
        }
        Ok(out)
    }

    pub fn diff_x(&self, i: usize) -> Result<Self> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange { index: i, dim: self.n });
        }
        let mut out = Self::zero(self.n);
        for ((a, b), c) in &self.terms {
            let e = a.0[i];
            if e > 0 {
                let mut v = a.0.clone();
                v[i] -= 1;
                out.add_term(MultiIndex(v), b.clone(), c * rat(e as i64, 1));
            }
        }
        Ok(out)
    }

    pub fn diff_xi(&self, i: usize) -> Result<Self> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange { index: i, dim: self.n });
        }
        let mut out = Self::zero(self.n);
        for ((a, b), c) in &self.terms {
            let e = b.0[i];
            if e > 0 {
                let mut v = b.0.clone();
                v[i] -= 1;
                out.add_term(a.clone(), MultiIndex(v), c * rat(e as i64, 1));
            }
        }
        Ok(out)
    }

    pub fn diff_x_multi(&self, alpha: &MultiIndex) -> Result<Self> {
        let mut out = self.clone();
        for (i, &e) in alpha.0.iter().enumerate() {
            for _ in 0..e {
                out = out.diff_x(i)?;
            }
        }
        Ok(out)
    }

    pub fn diff_xi_multi(&self, alpha: &MultiIndex) -> Result<Self> {
        let mut out = self.clone();
        for (i, &e) in alpha.0.iter().enumerate() {
            for _ in 0..e {
                out = out.diff_xi(i)?;
            }
        }
        Ok(out)
    }

    /// Highest xi-degree; `None` for zero.
    pub fn xi_degree(&self) -> Option<u32> {
        self.terms.keys().map(|(_, b)| b.degree()).max()
    }

    pub fn x_degree(&self) -> Option<u32> {
        self.terms.keys().map(|(a, _)| a.degree()).max()
    }

    /// The xi-homogeneous component of degree `i`.
    pub fn homogeneous_part(&self, i: u32) -> Self {
        let mut out = Self::zero(self.n);
        for ((a, b), c) in &self.terms {
            if b.degree() == i {
                out.add_term(a.clone(), b.clone(), c.clone());
            }
        }
        out
    }
}

impl fmt::Display for SymbolPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut entries: Vec<(u32, MultiIndex, MultiIndex, Rat)> = self
            .terms
            .iter()
            .map(|((a, b), c)| (a.degree() + b.degree(), a.clone(), b.clone(), c.clone()))
            .collect();
        entries.sort_by(|l, r| {
            (r.0, &r.1, &r.2).cmp(&(l.0, &l.1, &l.2)) // descending graded-lex
        });
        let terms: Vec<(String, Rat)> = entries
            .into_iter()
            .map(|(_, a, b, c)| {
                let xs = var_string("x", &a);
                let xis = var_string("xi", &b);
                let vars = match (xs.is_empty(), xis.is_empty()) {
                    (true, true) => String::new(),
                    (false, true) => xs,
                    (true, false) => xis,
                    (false, false) => format!("{xs}*{xis}"),
                };
                (vars, c)
            })
            .collect();
        fmt_terms(f, &terms)
    }
}

/// Mode parity of a trigonometric polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    /// Integer frequencies: functions on the circle.
    Periodic,
    /// Half-integer frequencies: antiperiodic functions, s(t+2pi) = -s(t).
    Antiperiodic,
}

impl Parity {
    fn of_freq2(freq2: u32) -> Parity {
        if freq2 % 2 == 0 {
            Parity::Periodic
        } else {
            Parity::Antiperiodic
        }
    }

    pub fn combine(self, other: Parity) -> Parity {
        if self == other {
            Parity::Periodic
        } else {
            Parity::Antiperiodic
        }
    }
}

/// Trigonometric polynomial `sum_k a_k cos(f_k t) + b_k sin(f_k t)` with all
/// frequencies integer (periodic) or all half-integer (antiperiodic).
///
/// Frequencies are stored doubled (`freq2` = 2f) so both kinds are integers.
#[derive(Debug, Clone)]
pub struct TrigPoly {
    parity: Parity,
    // freq2 -> (cos coefficient, sin coefficient)
    terms: BTreeMap<u32, (Rat, Rat)>,
}

impl PartialEq for TrigPoly {
    fn eq(&self, other: &Self) -> bool {
        // The zero polynomial is a member of both parity classes.
        if self.terms.is_empty() && other.terms.is_empty() {
            return true;
        }
        self.parity == other.parity && self.terms == other.terms
    }
}

impl TrigPoly {
    pub fn zero(parity: Parity) -> Self {
        TrigPoly {
            parity,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: Rat) -> Self {
        let mut p = Self::zero(Parity::Periodic);
        p.add_cos2(0, c);
        p
    }

    pub fn one() -> Self {
        Self::constant(crate::rat::rone())
    }

    /// cos(f t) with doubled frequency `freq2`.
    pub fn cos2(freq2: u32) -> Self {
        let mut p = Self::zero(Parity::of_freq2(freq2));
        p.add_cos2(freq2, crate::rat::rone());
        p
    }

    /// sin(f t) with doubled frequency `freq2`.
    pub fn sin2(freq2: u32) -> Self {
        let mut p = Self::zero(Parity::of_freq2(freq2));
        p.add_sin2(freq2, crate::rat::rone());
        p
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&u32, &(Rat, Rat))> {
        self.terms.iter()
    }

    pub fn add_cos2(&mut self, freq2: u32, c: Rat) {
        assert_eq!(Parity::of_freq2(freq2), self.parity, "mode parity violated");
        let e = self.terms.entry(freq2).or_insert_with(|| (crate::rat::rzero(), crate::rat::rzero()));
        e.0 += c;
        self.prune(freq2);
    }

    pub fn add_sin2(&mut self, freq2: u32, c: Rat) {
        assert_eq!(Parity::of_freq2(freq2), self.parity, "mode parity violated");
        if freq2 == 0 {
            return; // sin(0) = 0
        }
        let e = self.terms.entry(freq2).or_insert_with(|| (crate::rat::rzero(), crate::rat::rzero()));
        e.1 += c;
        self.prune(freq2);
    }

    fn prune(&mut self, freq2: u32) {
        if let Some(e) = self.terms.get(&freq2) {
            if num_traits::Zero::is_zero(&e.0) && num_traits::Zero::is_zero(&e.1) {
                self.terms.remove(&freq2);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.parity != other.parity {
            return Err(Error::ModeMix);
        }
        let mut out = self.clone();
        for (&f, (a, b)) in &other.terms {
            out.add_cos2(f, a.clone());
            out.add_sin2(f, b.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        TrigPoly {
            parity: self.parity,
            terms: self
                .terms
                .iter()
                .map(|(&f, (a, b))| (f, (-a, -b)))
                .collect(),
        }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        let mut out = Self::zero(self.parity);
        for (&f, (a, b)) in &self.terms {
            out.add_cos2(f, a * c);
            out.add_sin2(f, b * c);
        }
        out
    }

    /// Product via the product-to-sum identities; the result parity is the
    /// parity sum (periodic acts as the identity).
    pub fn mul(&self, other: &Self) -> Self {
        let parity = self.parity.combine(other.parity);
        let half = rat(1, 2);
        let mut out = Self::zero(parity);
        for (&f1, (a1, b1)) in &self.terms {
            for (&f2, (a2, b2)) in &other.terms {
                let sum = f1 + f2;
                let diff = f1.abs_diff(f2);
                let diff_sign = if f1 >= f2 { 1i64 } else { -1i64 };
                // cos cos = (cos(d) + cos(s))/2
                let cc = a1 * a2 * &half;
                out.add_cos2(diff, cc.clone());
                out.add_cos2(sum, cc);
                // sin sin = (cos(d) - cos(s))/2
                let ss = b1 * b2 * &half;
                out.add_cos2(diff, ss.clone());
                out.add_cos2(sum, -ss);
                // sin(f1) cos(f2) = (sin(s) + sin(f1-f2))/2
                let sc = b1 * a2 * &half;
                out.add_sin2(sum, sc.clone());
                out.add_sin2(diff, sc * rat(diff_sign, 1));
                // cos(f1) sin(f2) = (sin(s) - sin(f1-f2))/2
                let cs = a1 * b2 * &half;
                out.add_sin2(sum, cs.clone());
                out.add_sin2(diff, cs * rat(-diff_sign, 1));
            }
        }
        out
    }

    /// d/dt, mode-wise: cos(ft) -> -f sin(ft), sin(ft) -> f cos(ft).
    pub fn diff(&self) -> Self {
        let mut out = Self::zero(self.parity);
        for (&f2, (a, b)) in &self.terms {
            let f = rat(f2 as i64, 2);
            out.add_sin2(f2, -(a * &f));
            out.add_cos2(f2, b * &f);
        }
        out
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let mut acc = 0.0;
        for (&f2, (a, b)) in &self.terms {
            let f = f2 as f64 / 2.0;
            acc += crate::rat::to_f64(a) * (f * theta).cos() + crate::rat::to_f64(b) * (f * theta).sin();
        }
        acc
    }
}

fn trig_freq_string(freq2: u32) -> String {
    match freq2 {
        2 => "t".to_string(),
        f if f % 2 == 0 => format!("{}t", f / 2),
        f => format!("{}/2t", f),
    }
}

impl fmt::Display for TrigPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms: Vec<(String, Rat)> = Vec::new();
        for (&f2, (a, b)) in &self.terms {
            if !num_traits::Zero::is_zero(a) {
                let vars = if f2 == 0 {
                    String::new()
                } else {
                    format!("cos({})", trig_freq_string(f2))
                };
                terms.push((vars, a.clone()));
            }
            if !num_traits::Zero::is_zero(b) {
                terms.push((format!("sin({})", trig_freq_string(f2)), b.clone()));
            }
        }
        fmt_terms(f, &terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rint, rone};

    fn x(n: usize, i: usize) -> Poly {
        Poly::var(n, i).unwrap()
    }

    #[test]
    fn monomial_product() {
        let x1 = x(1, 0);
        let sq = x1.mul(&x1).unwrap();
        assert_eq!(sq, Poly::monomial(1, &[2], rone()));
    }

    #[test]
    fn difference_of_squares() {
        let x1 = x(1, 0);
        let a = x1.add(&Poly::one(1)).unwrap();
        let b = x1.sub(&Poly::one(1)).unwrap();
        let expect = x1.mul(&x1).unwrap().sub(&Poly::one(1)).unwrap();
        assert_eq!(a.mul(&b).unwrap(), expect);
    }

    #[test]
    fn disjoint_symbol_product() {
        let n = 2;
        let a = SymbolPoly::var_x(n, 0)
            .unwrap()
            .mul(&SymbolPoly::var_xi(n, 0).unwrap())
            .unwrap();
        let b = SymbolPoly::var_x(n, 1)
            .unwrap()
            .mul(&SymbolPoly::var_xi(n, 1).unwrap())
            .unwrap();
        let prod = a.mul(&b).unwrap();
        let mut expect = SymbolPoly::zero(n);
        expect.add_term(MultiIndex(vec![1, 1]), MultiIndex(vec![1, 1]), rone());
        assert_eq!(prod, expect);
    }

    #[test]
    fn partial_derivatives() {
        // d/dx1 (x1^2 xi2) = 2 x1 xi2
        let n = 2;
        let mut p = SymbolPoly::zero(n);
        p.add_term(MultiIndex(vec![2, 0]), MultiIndex(vec![0, 1]), rone());
        let d = p.diff_x(0).unwrap();
        let mut expect = SymbolPoly::zero(n);
        expect.add_term(MultiIndex(vec![1, 0]), MultiIndex(vec![0, 1]), rint(2));
        assert_eq!(d, expect);

        // d/dxi1 (x1 xi1^2) = 2 x1 xi1
        let mut q = SymbolPoly::zero(1);
        q.add_term(MultiIndex(vec![1]), MultiIndex(vec![2]), rone());
        let dq = q.diff_xi(0).unwrap();
        let mut expect2 = SymbolPoly::zero(1);
        expect2.add_term(MultiIndex(vec![1]), MultiIndex(vec![1]), rint(2));
        assert_eq!(dq, expect2);

        // d/dx2 (x1) = 0
        let p2 = x(2, 0);
        assert!(p2.diff(1).unwrap().is_zero());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let a = x(1, 0);
        let b = x(2, 0);
        assert!(matches!(a.mul(&b), Err(Error::DimensionMismatch(1, 2))));
        assert!(a.diff(3).is_err());
    }

    #[test]
    fn trig_derivative() {
        // cos t -> -sin t
        let c = TrigPoly::cos2(2);
        let mut expect = TrigPoly::zero(Parity::Periodic);
        expect.add_sin2(2, -rone());
        assert_eq!(c.diff(), expect);

        // sin(t/2) -> 1/2 cos(t/2)
        let s = TrigPoly::sin2(1);
        let mut expect = TrigPoly::zero(Parity::Antiperiodic);
        expect.add_cos2(1, rat(1, 2));
        assert_eq!(s.diff(), expect);

        // constant -> 0
        assert!(TrigPoly::one().diff().is_zero());
    }

    #[test]
    fn trig_product_parities() {
        let p = TrigPoly::cos2(2); // periodic
        let a = TrigPoly::sin2(1); // antiperiodic
        assert_eq!(p.mul(&p).parity(), Parity::Periodic);
        assert_eq!(p.mul(&a).parity(), Parity::Antiperiodic);
        assert_eq!(a.mul(&a).parity(), Parity::Periodic);
        // sin^2(t/2) = (1 - cos t)/2
        let sq = a.mul(&a);
        let mut expect = TrigPoly::zero(Parity::Periodic);
        expect.add_cos2(0, rat(1, 2));
        expect.add_cos2(2, rat(-1, 2));
        assert_eq!(sq, expect);
    }

    #[test]
    fn div_exact_by_variable() {
        let n = 1;
        let x1 = x(n, 0);
        let p = x1.pow(3).add(&x1.pow(2).scale(&rint(2))).unwrap();
        let q = p.div_exact(&x1).unwrap();
        assert_eq!(q, x1.pow(2).add(&x1.scale(&rint(2))).unwrap());
        assert!(Poly::one(n).div_exact(&x1).is_none());
    }

    #[test]
    fn substitution_affine() {
        // p(x) = x^2, x -> x + 1 gives x^2 + 2x + 1
        let p = x(1, 0).pow(2);
        let q = p
            .compose_affine(&[vec![rone()]], &[rone()])
            .unwrap();
        let expect = x(1, 0)
            .pow(2)
            .add(&x(1, 0).scale(&rint(2)))
            .unwrap()
            .add(&Poly::one(1))
            .unwrap();
        assert_eq!(q, expect);
    }

    #[test]
    fn display_canonical() {
        let n = 2;
        let mut s = SymbolPoly::zero(n);
        s.add_term(MultiIndex(vec![2, 0]), MultiIndex(vec![1, 0]), rat(3, 2));
        s.add_term(MultiIndex(vec![0, 1]), MultiIndex(vec![0, 0]), rint(-1));
        assert_eq!(s.to_string(), "3/2*x1^2*xi1 - x2");
        assert_eq!(TrigPoly::cos2(6).to_string(), "cos(3t)");
        assert_eq!(TrigPoly::sin2(1).to_string(), "sin(1/2t)");
        assert_eq!(Poly::zero(1).to_string(), "0");
    }
}
