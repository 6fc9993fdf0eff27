//! The sl(n+1) realization by polynomial vector fields, Lie-derivative
//! actions on operators acting on lambda-densities and on symbols, and an
//! exact linear solver that derives the projectively equivariant symbol map
//! at low order as a series of divergence-operator corrections.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_traits::Zero;

use crate::diffop::DiffOp;
use crate::error::{Error, Result};
use crate::multiindex::{indices_of_degree, indices_up_to, MultiIndex};
use crate::poly::{Poly, SymbolPoly};
use crate::quantize::q_affine;
use crate::rat::{rone, rzero, Rat};
use crate::symbols::{poisson_bracket, VectorField};

/// The generators of the sl(n+1) realization: n translations d_i, the n^2
/// linear fields x^i d_j, and the n quadratic fields x^i E with E the Euler
/// field. Dimension n^2 + 2n.
pub fn sl_generators(n: usize) -> Result<Vec<VectorField>> {
    let mut out = Vec::with_capacity(n * n + 2 * n);
    for i in 0..n {
        out.push(VectorField::coordinate(n, i)?);
    }
    for i in 0..n {
        for j in 0..n {
            let mut comps = vec![Poly::zero(n); n];
            comps[j] = Poly::var(n, i)?;
            out.push(VectorField::new(comps)?);
        }
    }
    for i in 0..n {
        let xi = Poly::var(n, i)?;
        let comps = (0..n)
            .map(|j| xi.mul(&Poly::var(n, j)?))
            .collect::<Result<_>>()?;
        out.push(VectorField::new(comps)?);
    }
    Ok(out)
}

/// The affine subset: translations and linear fields only.
pub fn affine_generators(n: usize) -> Result<Vec<VectorField>> {
    let mut gens = sl_generators(n)?;
    gens.truncate(n + n * n);
    Ok(gens)
}

/// Which generators a verification runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorSet {
    Affine,
    Full,
}

/// The weight-lambda lift of a vector field: L_X = X + lambda m_{div X},
/// the first-order operator implementing the action on lambda-densities.
pub fn density_lift(x: &VectorField, lambda: &Rat) -> DiffOp {
    let mut op = DiffOp::from_vector_field(x);
    op = op
        .add(&DiffOp::mult(&x.divergence().scale(lambda)))
        .expect("same dimension");
    op
}

/// The Lie derivative of an operator on lambda-densities: [L_X, D].
pub fn density_lie_derivative(x: &VectorField, lambda: &Rat, d: &DiffOp) -> Result<DiffOp> {
    density_lift(x, lambda).commutator(d)
}

/// The classical action on symbols: the Hamiltonian lift {P_X, F} with
/// P_X = sum_i X^i xi_i. Preserves the xi-degree.
pub fn classical_action(x: &VectorField, f: &SymbolPoly) -> Result<SymbolPoly> {
    poisson_bracket(&x.to_symbol(), f)
}

/// The divergence operator on symbols: Div = sum_i d_{x^i} d_{xi_i}.
pub fn div_symbol(f: &SymbolPoly) -> Result<SymbolPoly> {
    let n = f.dim();
    let mut acc = SymbolPoly::zero(n);
    for i in 0..n {
        acc = acc.add(&f.diff_xi(i)?.diff_x(i)?)?;
    }
    Ok(acc)
}

/// The xi-degree-p homogeneous part of a symbol.
pub fn xi_part(f: &SymbolPoly, p: u32) -> SymbolPoly {
    let mut out = SymbolPoly::zero(f.dim());
    for ((x, xi), c) in f.terms() {
        if xi.degree() == p {
            out.add_term(x.clone(), xi.clone(), c.clone());
        }
    }
    out
}

/// Outcome of the exact linear solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Unique,
    NonUnique,
    NoSolution,
}

/// A solved equivariant symbol map of order k: for the xi-degree-p slice the
/// quantization direction reads q_sl(F_p) = sum_j coeffs[p][j] q(Div^j F_p),
/// with coeffs[p][0] = 1 fixed by the normalization.
#[derive(Debug, Clone)]
pub struct EquivariantSolution {
    pub n: usize,
    pub k: u32,
    pub lambda: Rat,
    pub coeffs: Vec<Vec<Rat>>,
    pub status: SolveStatus,
}

impl EquivariantSolution {
    /// The identity candidate (all corrections zero): q_sl = q_affine.
    pub fn affine_candidate(n: usize, k: u32, lambda: &Rat) -> Self {
        let coeffs = (0..=k)
            .map(|p| {
                let mut c = vec![rzero(); p as usize + 1];
                c[0] = rone();
                c
            })
            .collect();
        EquivariantSolution {
            n,
            k,
            lambda: lambda.clone(),
            coeffs,
            status: SolveStatus::Unique,
        }
    }

    /// Apply the quantization-direction map to a symbol of xi-degree <= k.
    pub fn quantize(&self, f: &SymbolPoly) -> Result<DiffOp> {
        let top = f.xi_degree().unwrap_or(0);
        if top > self.k {
            return Err(Error::OrderExceeded {
                order: top as i64,
                requested: self.k as i64,
            });
        }
        let mut out = DiffOp::zero(self.n);
        for p in 0..=top {
            let part = xi_part(f, p);
            if part.is_zero() {
                continue;
            }
            let mut g = part;
            for c in &self.coeffs[p as usize] {
                if !c.is_zero() {
                    out = out.add(&q_affine(&g.scale(c)))?;
                }
                g = div_symbol(&g)?;
            }
        }
        Ok(out)
    }
}

/// Exact Gaussian elimination for a rectangular system `a x = b`.
/// Returns the status and a particular solution (free unknowns set to 0).
fn solve_linear(rows: &[(Vec<Rat>, Rat)], unknowns: usize) -> (SolveStatus, Vec<Rat>) {
    let mut a: Vec<Vec<Rat>> = rows
        .iter()
        .map(|(r, b)| {
            let mut v = r.clone();
            v.push(b.clone());
            v
        })
        .collect();
    let m = a.len();
    let mut pivot_cols: Vec<usize> = Vec::new();
    let mut row = 0usize;
    for col in 0..unknowns {
        let Some(p) = (row..m).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(row, p);
        let inv = a[row][col].clone();
        for v in a[row].iter_mut() {
            *v = &*v / &inv;
        }
        for r in 0..m {
            if r != row && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in 0..=unknowns {
                    let delta = &a[row][c] * &f;
                    a[r][c] = &a[r][c] - &delta;
                }
            }
        }
        pivot_cols.push(col);
        row += 1;
        if row == m {
            break;
        }
    }
    // Inconsistent row: all-zero coefficients with nonzero right-hand side.
    for r in &a {
        if r[..unknowns].iter().all(|v| v.is_zero()) && !r[unknowns].is_zero() {
            return (SolveStatus::NoSolution, vec![]);
        }
    }
    let mut x = vec![rzero(); unknowns];
    for (r, &col) in pivot_cols.iter().enumerate() {
        x[col] = a[r][unknowns].clone();
    }
    let status = if pivot_cols.len() == unknowns {
        SolveStatus::Unique
    } else {
        SolveStatus::NonUnique
    };
    (status, x)
}

/// Derive the order-k equivariant symbol map at weight lambda by solving,
/// slice by slice, for the divergence-power coefficients that make the
/// quantization direction intertwine every generator on a bounded probe
/// slice (coefficient x-degree <= k + 2). The overall status is the worst
/// slice outcome.
pub fn solve_equivariant_symbol(n: usize, k: u32, lambda: &Rat) -> Result<EquivariantSolution> {
    if n == 0 || n > 2 || k > 4 {
        return Err(Error::Precondition(
            "solver is sized for 1 <= n <= 2, k <= 4".into(),
        ));
    }
    let gens = sl_generators(n)?;
    let xbound = k + 2;
    let mut coeffs: Vec<Vec<Rat>> = vec![vec![rone()]];
    let mut status = SolveStatus::Unique;
    for p in 1..=k {
        let mut rows: Vec<(Vec<Rat>, Rat)> = Vec::new();
        for alpha in indices_of_degree(n, p) {
            for beta in indices_up_to(n, xbound) {
                let mut f = SymbolPoly::zero(n);
                f.add_term(beta.clone(), alpha.clone(), rone());
                for x in &gens {
                    // residual_j = L_X q(Div^j F) - q(Div^j {P_X, F})
                    let lf = classical_action(x, &f)?;
                    let mut g = f.clone();
                    let mut lg = lf.clone();
                    let mut residuals: Vec<DiffOp> = Vec::new();
                    for _ in 0..=p {
                        let r = density_lie_derivative(x, lambda, &q_affine(&g))?
                            .sub(&q_affine(&lg))?;
                        residuals.push(r);
                        g = div_symbol(&g)?;
                        lg = div_symbol(&lg)?;
                    }
                    // One scalar equation per operator-term coordinate.
                    let mut keys: BTreeSet<(MultiIndex, MultiIndex)> = BTreeSet::new();
                    for r in &residuals {
                        for (a, c) in r.terms() {
                            for (b, _) in c.terms() {
                                keys.insert((a.clone(), b.clone()));
                            }
                        }
                    }
                    for (a, b) in keys {
                        let entry = |r: &DiffOp| -> Rat {
                            r.terms()
                                .find(|(al, _)| **al == a)
                                .map(|(_, c)| {
                                    c.terms()
                                        .find(|(be, _)| **be == b)
                                        .map(|(_, v)| v.clone())
                                        .unwrap_or_else(rzero)
                                })
                                .unwrap_or_else(rzero)
                        };
                        let lhs: Vec<Rat> =
                            (1..=p as usize).map(|j| entry(&residuals[j])).collect();
                        let rhs = -entry(&residuals[0]);
                        if lhs.iter().all(|v| v.is_zero()) && rhs.is_zero() {
                            continue;
                        }
                        rows.push((lhs, rhs));
                    }
                }
            }
        }
        if rows.is_empty() {
            return Err(Error::Precondition(
                "probe slice produced no constraints; enlarge the bound".into(),
            ));
        }
        let (st, mut x) = solve_linear(&rows, p as usize);
        match st {
            SolveStatus::NoSolution => {
                return Ok(EquivariantSolution {
                    n,
                    k,
                    lambda: lambda.clone(),
                    coeffs: vec![],
                    status: SolveStatus::NoSolution,
                })
            }
            SolveStatus::NonUnique => status = SolveStatus::NonUnique,
            SolveStatus::Unique => {}
        }
        let mut slice = vec![rone()];
        slice.append(&mut x);
        coeffs.push(slice);
    }
    Ok(EquivariantSolution {
        n,
        k,
        lambda: lambda.clone(),
        coeffs,
        status,
    })
}

/// Report of an exact intertwining verification.
#[derive(Debug, Clone)]
pub struct IntertwineReport {
    pub samples: usize,
    pub failures: usize,
    pub first_counterexample: Option<String>,
}

impl IntertwineReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Check, exactly, that the solved map intertwines the chosen generator set
/// on randomized symbols in the bounded slice, and that the normalization
/// holds (the correction lowers the order on every homogeneous part).
pub fn verify_intertwining(
    sol: &EquivariantSolution,
    gens: GeneratorSet,
    rng: &mut impl rand::Rng,
    samples: usize,
) -> Result<IntertwineReport> {
    let generators = match gens {
        GeneratorSet::Affine => affine_generators(sol.n)?,
        GeneratorSet::Full => sl_generators(sol.n)?,
    };
    let mut failures = 0usize;
    let mut first = None;
    for _ in 0..samples {
        let f = crate::sample::random_symbol(rng, sol.n, sol.k, sol.k + 2, 3);
        // normalization: on each homogeneous part the correction drops order
        for p in 0..=sol.k {
            let part = xi_part(&f, p);
            if part.is_zero() {
                continue;
            }
            let diff = sol.quantize(&part)?.sub(&q_affine(&part))?;
            let ok = match diff.order() {
                None => true,
                Some(o) => p > 0 && o <= p - 1,
            };
            if !ok {
                failures += 1;
                if first.is_none() {
                    let mut s = String::new();
                    let _ = write!(s, "normalization failed on F_{p} = {part}");
                    first = Some(s);
                }
            }
        }
        for x in &generators {
            let lhs = sol.quantize(&classical_action(x, &f)?)?;
            let rhs = density_lie_derivative(x, &sol.lambda, &sol.quantize(&f)?)?;
            if lhs != rhs {
                failures += 1;
                if first.is_none() {
                    let mut s = String::new();
                    let _ = write!(
                        s,
                        "X = {}, F = {f}: q(L_X F) = {lhs} but [L_X, q(F)] = {rhs}",
                        x.to_symbol()
                    );
                    first = Some(s);
                }
            }
        }
    }
    Ok(IntertwineReport {
        samples,
        failures,
        first_counterexample: first,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rint};
    use crate::sample::{random_diffop, rng_from_seed};

    fn x2d(n: usize) -> VectorField {
        // the quadratic generator x_1^2 d_1 + ... (x^1 E for n = 1)
        let x1 = Poly::var(n, 0).unwrap();
        let comps = (0..n)
            .map(|j| x1.mul(&Poly::var(n, j).unwrap()).unwrap())
            .collect();
        VectorField::new(comps).unwrap()
    }

    #[test]
    fn generator_span_is_closed_under_bracket() {
        for n in 1..=2usize {
            let gens = sl_generators(n).unwrap();
            assert_eq!(gens.len(), n * n + 2 * n);
            // coordinates: (component, monomial) -> column index
            let basis: Vec<MultiIndex> = indices_up_to(n, 2);
            let coords = |v: &VectorField| -> Vec<Rat> {
                let mut out = vec![rzero(); n * basis.len()];
                for (i, c) in v.components().iter().enumerate() {
                    for (m, coeff) in c.terms() {
                        let j = basis.iter().position(|b| b == m).expect("degree <= 2");
                        out[i * basis.len() + j] = coeff.clone();
                    }
                }
                out
            };
            // rank of the generator matrix equals the dimension count
            let rows: Vec<(Vec<Rat>, Rat)> =
                gens.iter().map(|g| (coords(g), rzero())).collect();
            let cols = n * basis.len();
            // rank via elimination: count pivots of the transpose system
            let mut mat: Vec<Vec<Rat>> = rows.iter().map(|(r, _)| r.clone()).collect();
            let mut rank = 0usize;
            for col in 0..cols {
                if let Some(p) = (rank..mat.len()).find(|&r| !mat[r][col].is_zero()) {
                    mat.swap(rank, p);
                    let inv = mat[rank][col].clone();
                    for v in mat[rank].iter_mut() {
                        *v = &*v / &inv;
                    }
                    for r in 0..mat.len() {
                        if r != rank && !mat[r][col].is_zero() {
                            let f = mat[r][col].clone();
                            for c in 0..cols {
                                let d = &mat[rank][c] * &f;
                                mat[r][c] = &mat[r][c] - &d;
                            }
                        }
                    }
                    rank += 1;
                }
            }
            assert_eq!(rank, n * n + 2 * n);
            // every pairwise bracket solves as a combination of generators
            for a in &gens {
                for b in &gens {
                    let br = a.bracket(b).unwrap();
                    let target = coords(&br);
                    let rows: Vec<(Vec<Rat>, Rat)> = (0..cols)
                        .map(|c| {
                            (
                                gens.iter().map(|g| coords(g)[c].clone()).collect(),
                                target[c].clone(),
                            )
                        })
                        .collect();
                    let (st, _) = solve_linear(&rows, gens.len());
                    assert_ne!(st, SolveStatus::NoSolution);
                }
            }
        }
    }

    #[test]
    fn density_action_examples() {
        let n = 1;
        let lambda = rat(2, 3);
        let x = x2d(n);
        // weight zero reduces to the plain commutator
        let mut rng = rng_from_seed(151);
        for _ in 0..10 {
            let d = random_diffop(&mut rng, n, 2, 2, 3);
            assert_eq!(
                density_lie_derivative(&x, &rzero(), &d).unwrap(),
                DiffOp::from_vector_field(&x).commutator(&d).unwrap()
            );
        }
        // D = m_h -> m_{x^2 h'}
        let h = Poly::var(n, 0).unwrap().pow(3);
        let lhs = density_lie_derivative(&x, &lambda, &DiffOp::mult(&h)).unwrap();
        let expect = x.apply_fn(&h).unwrap();
        assert_eq!(lhs, DiffOp::mult(&expect));
        // D = d -> -2x d - 2 lambda
        let d = DiffOp::partial(n, 0).unwrap();
        let lhs = density_lie_derivative(&x, &lambda, &d).unwrap();
        let mut expect = DiffOp::zero(n);
        expect.add_term(
            MultiIndex(vec![1]),
            Poly::var(n, 0).unwrap().scale(&rint(-2)),
        );
        expect.add_term(MultiIndex(vec![0]), Poly::constant(n, &lambda * &rint(-2)));
        assert_eq!(lhs, expect);
    }

    #[test]
    fn density_action_is_a_lie_algebra_action() {
        let mut rng = rng_from_seed(157);
        for n in 1..=2usize {
            let gens = sl_generators(n).unwrap();
            let lambda = rat(1, 2);
            for _ in 0..5 {
                let d = random_diffop(&mut rng, n, 2, 2, 2);
                for a in &gens {
                    for b in &gens {
                        let lhs =
                            density_lie_derivative(&a.bracket(b).unwrap(), &lambda, &d).unwrap();
                        let rhs = density_lie_derivative(
                            a,
                            &lambda,
                            &density_lie_derivative(b, &lambda, &d).unwrap(),
                        )
                        .unwrap()
                        .sub(&density_lie_derivative(
                            b,
                            &lambda,
                            &density_lie_derivative(a, &lambda, &d).unwrap(),
                        )
                        .unwrap())
                        .unwrap();
                        assert_eq!(lhs, rhs);
                    }
                }
            }
        }
    }

    #[test]
    fn classical_action_examples_and_action_property() {
        let n = 1;
        // X = d_1, F = x_1 xi_1 -> xi_1
        let f = SymbolPoly::var_x(n, 0)
            .unwrap()
            .mul(&SymbolPoly::var_xi(n, 0).unwrap())
            .unwrap();
        assert_eq!(
            classical_action(&VectorField::coordinate(n, 0).unwrap(), &f).unwrap(),
            SymbolPoly::var_xi(n, 0).unwrap()
        );
        // X = x_1 d_1, F = xi_1 -> -xi_1
        let x1d1 = VectorField::new(vec![Poly::var(n, 0).unwrap()]).unwrap();
        assert_eq!(
            classical_action(&x1d1, &SymbolPoly::var_xi(n, 0).unwrap()).unwrap(),
            SymbolPoly::var_xi(n, 0).unwrap().neg()
        );
        // X = x^2 d, F = h xi -> (x^2 h' - 2 x h) xi
        let h = Poly::var(n, 0).unwrap().pow(2);
        let fx = SymbolPoly::from_poly(&h)
            .mul(&SymbolPoly::var_xi(n, 0).unwrap())
            .unwrap();
        let out = classical_action(&x2d(n), &fx).unwrap();
        let coeff = x2d(n)
            .apply_fn(&h)
            .unwrap()
            .sub(&h.mul(&Poly::var(n, 0).unwrap()).unwrap().scale(&rint(2)))
            .unwrap();
        let expect = SymbolPoly::from_poly(&coeff)
            .mul(&SymbolPoly::var_xi(n, 0).unwrap())
            .unwrap();
        assert_eq!(out, expect);
        // Lie-algebra action on random symbols
        let mut rng = rng_from_seed(163);
        let gens = sl_generators(1).unwrap();
        for _ in 0..5 {
            let f = crate::sample::random_symbol(&mut rng, 1, 3, 3, 3);
            for a in &gens {
                for b in &gens {
                    let lhs = classical_action(&a.bracket(b).unwrap(), &f).unwrap();
                    let rhs = classical_action(a, &classical_action(b, &f).unwrap())
                        .unwrap()
                        .sub(&classical_action(b, &classical_action(a, &f).unwrap()).unwrap())
                        .unwrap();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn solver_first_order_coefficients() {
        // n=1, k=1: c_1 = lambda (c = 0 at lambda = 0)
        for lambda in [rzero(), rone(), rat(2, 5), rat(-3, 7)] {
            let sol = solve_equivariant_symbol(1, 1, &lambda).unwrap();
            assert_eq!(sol.status, SolveStatus::Unique);
            assert_eq!(sol.coeffs[1], vec![rone(), lambda.clone()]);
        }
        // k=0: empty correction
        let sol = solve_equivariant_symbol(1, 0, &rat(1, 3)).unwrap();
        assert_eq!(sol.coeffs, vec![vec![rone()]]);
    }

    #[test]
    fn solved_maps_intertwine_exactly() {
        let lambda = rat(1, 3);
        let mut rng = rng_from_seed(167);
        for (n, kmax) in [(1usize, 3u32), (2, 2)] {
            for k in 0..=kmax {
                let sol = solve_equivariant_symbol(n, k, &lambda).unwrap();
                assert_eq!(sol.status, SolveStatus::Unique, "n={n} k={k}");
                let report = verify_intertwining(&sol, GeneratorSet::Full, &mut rng, 10).unwrap();
                assert!(
                    report.passed(),
                    "n={n} k={k}: {:?}",
                    report.first_counterexample
                );
            }
        }
    }

    #[test]
    fn affine_map_passes_affine_but_fails_projective() {
        let lambda = rone();
        let cand = EquivariantSolution::affine_candidate(1, 1, &lambda);
        let mut rng = rng_from_seed(173);
        let affine = verify_intertwining(&cand, GeneratorSet::Affine, &mut rng, 25).unwrap();
        assert!(affine.passed(), "{:?}", affine.first_counterexample);
        let full = verify_intertwining(&cand, GeneratorSet::Full, &mut rng, 25).unwrap();
        assert!(!full.passed());
        let witness = full.first_counterexample.unwrap();
        assert!(!witness.is_empty());
        // the stored hand counterexample: X = x^2 d, F = xi gives residual -2
        let x = x2d(1);
        let f = SymbolPoly::var_xi(1, 0).unwrap();
        let lhs = cand.quantize(&classical_action(&x, &f).unwrap()).unwrap();
        let rhs =
            density_lie_derivative(&x, &lambda, &cand.quantize(&f).unwrap()).unwrap();
        let residual = lhs.sub(&rhs).unwrap();
        assert_eq!(residual, DiffOp::mult(&Poly::constant(1, rint(2))));
    }

    #[test]
    fn solve_status_variants_are_reachable() {
        // inconsistent system
        let rows = vec![
            (vec![rone()], rone()),
            (vec![rone()], rint(2)),
        ];
        assert_eq!(solve_linear(&rows, 1).0, SolveStatus::NoSolution);
        // underdetermined system
        let rows = vec![(vec![rone(), rone()], rint(2))];
        let (st, x) = solve_linear(&rows, 2);
        assert_eq!(st, SolveStatus::NonUnique);
        assert_eq!(&x[0] + &x[1], rint(2));
    }
}
