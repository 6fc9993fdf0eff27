//! Seeded random generators for the verification suites.
//!
//! Coefficients are small rationals so that exact arithmetic stays fast even
//! after a few compositions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diffop::DiffOp;
use crate::multiindex::indices_up_to;
use crate::poly::{Parity, Poly, SymbolPoly, TrigPoly};
use crate::rat::{rat, Rat};
use crate::symbols::{ClosedOneForm, VectorField};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_rat(rng: &mut impl Rng) -> Rat {
    let num = rng.gen_range(-4i64..=4);
    let den = *[1i64, 2, 3].get(rng.gen_range(0..3)).unwrap();
    rat(num, den)
}

pub fn random_nonzero_rat(rng: &mut impl Rng) -> Rat {
    loop {
        let r = random_rat(rng);
        if !num_traits::Zero::is_zero(&r) {
            return r;
        }
    }
}

/// Sparse random polynomial of total degree <= `deg` with ~`terms` terms.
pub fn random_poly(rng: &mut impl Rng, n: usize, deg: u32, terms: usize) -> Poly {
    let basis = indices_up_to(n, deg);
    let mut p = Poly::zero(n);
    for _ in 0..terms {
        let alpha = basis[rng.gen_range(0..basis.len())].clone();
        p.add_term(alpha, random_rat(rng));
    }
    p
}

/// Random symbol with xi-degree <= `xi_deg` and x-degree <= `x_deg`.
pub fn random_symbol(
    rng: &mut impl Rng,
    n: usize,
    xi_deg: u32,
    x_deg: u32,
    terms: usize,
) -> SymbolPoly {
    let xi_basis = indices_up_to(n, xi_deg);
    let x_basis = indices_up_to(n, x_deg);
    let mut p = SymbolPoly::zero(n);
    for _ in 0..terms {
        let a = x_basis[rng.gen_range(0..x_basis.len())].clone();
        let b = xi_basis[rng.gen_range(0..xi_basis.len())].clone();
        p.add_term(a, b, random_rat(rng));
    }
    p
}

/// Random operator of order <= `ord` with coefficient x-degree <= `x_deg`.
pub fn random_diffop(
    rng: &mut impl Rng,
    n: usize,
    ord: u32,
    x_deg: u32,
    terms: usize,
) -> DiffOp {
    let d_basis = indices_up_to(n, ord);
    let x_basis = indices_up_to(n, x_deg);
    let mut op = DiffOp::zero(n);
    for _ in 0..terms {
        let alpha = d_basis[rng.gen_range(0..d_basis.len())].clone();
        let beta = x_basis[rng.gen_range(0..x_basis.len())].clone();
        let mut c = Poly::zero(n);
        c.add_term(beta, random_rat(rng));
        op.add_term(alpha, c);
    }
    op
}

pub fn random_vector_field(rng: &mut impl Rng, n: usize, deg: u32) -> VectorField {
    VectorField::new((0..n).map(|_| random_poly(rng, n, deg, 3)).collect())
        .expect("components share the dimension")
}

/// Random closed form: d of a random potential (exact, hence closed).
pub fn random_closed_form(rng: &mut impl Rng, n: usize, deg: u32) -> ClosedOneForm {
    ClosedOneForm::exact(&random_poly(rng, n, deg, 4))
}

/// Random trigonometric polynomial with frequencies <= `max_freq2`/2.
pub fn random_trig(rng: &mut impl Rng, parity: Parity, max_freq2: u32, terms: usize) -> TrigPoly {
    let mut p = TrigPoly::zero(parity);
    for _ in 0..terms {
        let step = 2;
        let start = match parity {
            Parity::Periodic => 0,
            Parity::Antiperiodic => 1,
        };
        let count = (max_freq2 - start) / step + 1;
        let f2 = start + step * rng.gen_range(0..count);
        if rng.gen_bool(0.5) {
            p.add_cos2(f2, random_rat(rng));
        } else {
            p.add_sin2(f2, random_rat(rng));
        }
    }
    p
}
