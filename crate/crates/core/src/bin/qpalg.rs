//! Command-line front end: parse expressions, run one operation, print the
//! result as text or JSON.
//!
//! Exit codes: 0 success, 1 verification failure, 2 parse error,
//! 3 precondition violation.

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use qpalg::derivations::{
    automorphism_d1, deriv_d, deriv_d1, deriv_s, AutoParams, Deriv1Params, FirstOrderOp,
};
use qpalg::diffop::DiffOp;
use qpalg::equivariance::{solve_equivariant_symbol, SolveStatus};
use qpalg::error::{Error, Result};
use qpalg::flows::{
    div_cocycle_check, flow_exact, flow_numeric, one_param_group_exact, one_param_group_numeric,
    AffineField, FlowMap, NumericFirstOrder,
};
use qpalg::linebundle::{bundle_order, globalize_iso, symbol_bundle, BundleOp, FrameChoice};
use qpalg::matrix::RatMat;
use qpalg::multiindex::MultiIndex;
use qpalg::parse::{parse_expr, to_diffop, to_poly, to_symbol, to_trig, to_trigop, Value};
use qpalg::poly::{Parity, Poly, SymbolPoly};
use qpalg::quantize::{q_affine, sigma_aff, star};
use qpalg::rat::{rzero, to_f64, Rat};
use qpalg::symbols::{poisson_bracket, ClosedOneForm, VectorField};
use qpalg::verify::{run_all, run_suite, SuiteReport, SUITE_NAMES};

#[derive(Parser)]
#[command(
    name = "qpalg",
    about = "Exact computation in algebras of differential operators and their symbols",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Mode {
    Exact,
    Numeric,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Model {
    Trivial,
    Moebius,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum DerivLevel {
    D1,
    S,
    D,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compose two differential operators (or two circle operators).
    Compose {
        a: String,
        b: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Commutator of two operators.
    Bracket {
        a: String,
        b: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Apply an operator to a function (polynomial or antiperiodic section).
    Apply {
        op: String,
        arg: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Full affine symbol of an operator, or the degree-k part with --k.
    Symbol {
        op: String,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Normal-ordering quantization of a symbol.
    Quantize {
        sym: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Star product of two symbols, truncated to the given number of hbar powers.
    Star {
        f: String,
        g: String,
        #[arg(long, default_value_t = 3)]
        order: usize,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Poisson bracket of two symbols.
    Poisson {
        f: String,
        g: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Apply a classified derivation to a target expression.
    Derive {
        /// Target: first-order operator (d1), symbol (s), or operator (d).
        target: String,
        #[arg(long, value_enum)]
        level: DerivLevel,
        /// Vector field as a pure first-order operator, e.g. "x1*d2 + d1" (level d1).
        #[arg(long)]
        y: Option<String>,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        kappa: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        lambda: String,
        /// Potential h of the closed one-form dh (defaults to 0).
        #[arg(long)]
        omega: Option<String>,
        /// Hamiltonian symbol Q (level s).
        #[arg(long)]
        q: Option<String>,
        /// Interior operator Delta (level d).
        #[arg(long)]
        delta: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Apply a first-order-algebra automorphism to a target operator.
    Automorph {
        target: String,
        /// Affine map as "a11,a12;a21,a22|b1,b2" (rationals).
        #[arg(long)]
        phi: String,
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        k: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        lambda: String,
        /// Potential h of the closed one-form dh (defaults to 0).
        #[arg(long)]
        omega: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Time-t flow of an affine vector field.
    Flow {
        /// Affine field as "a11,a12;a21,a22|b1,b2" (rationals).
        #[arg(long)]
        field: String,
        #[arg(long, allow_hyphen_values = true)]
        t: String,
        #[arg(long, value_enum, default_value = "exact")]
        mode: Mode,
        #[arg(long)]
        json: bool,
    },
    /// One-parameter automorphism group applied to a first-order operator.
    #[command(name = "one-param")]
    OneParam {
        target: String,
        /// Generator field as a pure first-order operator, e.g. "x1*d2".
        #[arg(long)]
        y: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        kappa: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        lambda: String,
        /// Potential h of the closed one-form dh (defaults to 0).
        #[arg(long)]
        omega: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        t: String,
        #[arg(long, value_enum, default_value = "exact")]
        mode: Mode,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Check the divergence cocycle law on a pair of flows (exit 1 on failure).
    #[command(name = "div-check")]
    DivCheck {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, allow_hyphen_values = true)]
        t: String,
        #[arg(long, allow_hyphen_values = true)]
        s: String,
        #[arg(long, value_enum, default_value = "exact")]
        mode: Mode,
        #[arg(long)]
        json: bool,
    },
    /// Line-bundle operations: order, apply, globalize, symbol.
    Bundle {
        /// One of: order, apply, globalize, symbol.
        action: String,
        op: String,
        /// Section argument (for `apply`).
        arg: Option<String>,
        #[arg(long, value_enum, default_value = "moebius")]
        model: Model,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Solve for the projectively equivariant symbol map at (n, k, lambda).
    Equivariant {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: u32,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        lambda: String,
        #[arg(long)]
        json: bool,
    },
    /// Run a named verification suite, or all of them.
    Verify {
        #[arg(default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 12345)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
}

fn parse_rat(s: &str) -> Result<Rat> {
    s.trim().parse::<Rat>().map_err(|e| Error::Parse {
        line: 1,
        col: 1,
        msg: format!("bad rational `{s}`: {e}"),
    })
}

/// Parse "a11,a12;a21,a22|b1,b2" into an affine field/map pair (A, b).
fn parse_affine_data(s: &str) -> Result<(RatMat, Vec<Rat>)> {
    let bad = |msg: &str| Error::Parse {
        line: 1,
        col: 1,
        msg: msg.to_string(),
    };
    let (mat_part, b_part) = match s.split_once('|') {
        Some((m, b)) => (m, Some(b)),
        None => (s, None),
    };
    let rows: Vec<Vec<Rat>> = mat_part
        .split(';')
        .map(|row| row.split(',').map(parse_rat).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(bad("matrix rows must be square"));
    }
    let mut a = RatMat::zero(n);
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row.into_iter().enumerate() {
            a.set(i, j, v);
        }
    }
    let b = match b_part {
        Some(b) => b.split(',').map(parse_rat).collect::<Result<Vec<_>>>()?,
        None => vec![rzero(); n],
    };
    if b.len() != n {
        return Err(bad("translation length must match matrix size"));
    }
    Ok((a, b))
}

fn value_dim(v: &Value) -> usize {
    match v {
        Value::Num(_) => 1,
        Value::Sym(s) => s.dim(),
        Value::Op(d) => d.dim(),
        Value::Trig(_) | Value::CircleOp(_) => 1,
    }
}

/// Parse two sources at a consistent dimension.
fn parse_pair(a: &str, b: &str, hint: Option<usize>) -> Result<(Value, Value, usize)> {
    let va = parse_expr(a, hint)?;
    let vb = parse_expr(b, hint)?;
    let n = value_dim(&va).max(value_dim(&vb)).max(hint.unwrap_or(1));
    Ok((parse_expr(a, Some(n))?, parse_expr(b, Some(n))?, n))
}

fn is_circle(v: &Value) -> bool {
    matches!(v, Value::Trig(_) | Value::CircleOp(_))
}

fn parse_omega(src: &Option<String>, n: usize) -> Result<ClosedOneForm> {
    match src {
        None => Ok(ClosedOneForm::exact(&Poly::zero(n))),
        Some(s) => {
            let h = to_poly(parse_expr(s, Some(n))?, n)?;
            Ok(ClosedOneForm::exact(&h))
        }
    }
}

/// Read a first-order operator (f + sum a_i d_i) from a differential operator.
fn to_first_order(d: &DiffOp) -> Result<FirstOrderOp> {
    let n = d.dim();
    if d.order().unwrap_or(0) > 1 {
        return Err(Error::Precondition(
            "expected an operator of order at most 1".into(),
        ));
    }
    let f = d.coeff(&MultiIndex(vec![0; n]));
    let mut comps = Vec::with_capacity(n);
    for i in 0..n {
        let mut alpha = vec![0u32; n];
        alpha[i] = 1;
        comps.push(d.coeff(&MultiIndex(alpha)));
    }
    FirstOrderOp::new(f, VectorField::new(comps)?)
}

/// Read a pure vector field (no zeroth-order part) from an operator expression.
fn parse_field_op(src: &str, hint: Option<usize>) -> Result<VectorField> {
    let v = parse_expr(src, hint)?;
    let n = value_dim(&v).max(hint.unwrap_or(1));
    let d = to_diffop(parse_expr(src, Some(n))?, n)?;
    let u = to_first_order(&d)?;
    if !u.f.is_zero() {
        return Err(Error::Precondition(
            "vector field must have no zeroth-order part".into(),
        ));
    }
    Ok(u.x)
}

fn json_poly_terms(p: &Poly) -> serde_json::Value {
    json!(p
        .terms()
        .map(|(a, c)| json!({"x": a.0, "coeff": c.to_string()}))
        .collect::<Vec<_>>())
}

fn json_symbol(s: &SymbolPoly) -> serde_json::Value {
    json!({
        "type": "symbol",
        "n": s.dim(),
        "order": s.xi_degree(),
        "terms": s.terms().map(|((x, xi), c)| {
            json!({"x": x.0, "xi": xi.0, "coeff": c.to_string()})
        }).collect::<Vec<_>>(),
    })
}

fn json_diffop(d: &DiffOp) -> serde_json::Value {
    json!({
        "type": "diffop",
        "n": d.dim(),
        "order": d.order(),
        "terms": d.terms().map(|(alpha, c)| {
            json!({"d": alpha.0, "coeff": json_poly_terms(c)})
        }).collect::<Vec<_>>(),
    })
}

fn json_value(v: &Value) -> serde_json::Value {
    match v {
        Value::Num(r) => json!({"type": "rational", "n": 0, "terms": [r.to_string()], "order": 0}),
        Value::Sym(s) => json_symbol(s),
        Value::Op(d) => json_diffop(d),
        Value::Trig(t) => json!({
            "type": "trigpoly",
            "n": 1,
            "order": 0,
            "terms": t.terms().map(|(f2, (a, b))| {
                json!({"freq2": f2, "cos": a.to_string(), "sin": b.to_string()})
            }).collect::<Vec<_>>(),
        }),
        Value::CircleOp(op) => json!({
            "type": "circleop",
            "n": 1,
            "order": op.order(),
            "coeffs": op.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        }),
    }
}

fn emit(v: &Value, json: bool) {
    if json {
        println!("{}", json_value(v));
    } else {
        match v {
            Value::Num(r) => println!("{r}"),
            Value::Sym(s) => println!("{s}"),
            Value::Op(d) => println!("{d}"),
            Value::Trig(t) => println!("{t}"),
            Value::CircleOp(op) => println!("{op}"),
        }
    }
}

fn div_string(d: &qpalg::flows::DivValue) -> String {
    match d {
        qpalg::flows::DivValue::Exact(r) => r.to_string(),
        qpalg::flows::DivValue::Numeric(v) => v.to_string(),
    }
}

fn print_flow(phi: &FlowMap, json: bool) -> Result<()> {
    let div = qpalg::flows::group_divergence(phi)?;
    match phi {
        FlowMap::Exact { map, t, .. } => {
            let rows = map.rows();
            if json {
                println!(
                    "{}",
                    json!({
                        "type": "flow", "mode": "exact", "t": t.to_string(),
                        "matrix": rows.iter().map(|r| r.iter().map(|v| v.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
                        "divergence": div_string(&div),
                    })
                );
            } else {
                for r in rows {
                    println!(
                        "{}",
                        r.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("  ")
                    );
                }
                println!("divergence: {}", div_string(&div));
            }
        }
        FlowMap::Numeric { map, t, .. } => {
            let rows = map.rows();
            if json {
                println!(
                    "{}",
                    json!({"type": "flow", "mode": "numeric", "t": t, "matrix": rows, "divergence": div.to_f64()})
                );
            } else {
                for r in rows {
                    println!(
                        "{}",
                        r.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join("  ")
                    );
                }
                println!("divergence: {}", div.to_f64());
            }
        }
    }
    Ok(())
}

fn status_str(s: &SolveStatus) -> &'static str {
    match s {
        SolveStatus::Unique => "UNIQUE",
        SolveStatus::NonUnique => "NON_UNIQUE",
        SolveStatus::NoSolution => "NO_SOLUTION",
    }
}

fn print_suite(rep: &SuiteReport) {
    let mark = if rep.passed { "PASS" } else { "FAIL" };
    println!("[{mark}] {:<13} {} cases  {}", rep.name, rep.cases, rep.detail);
}

/// Returns Ok(true) when the command succeeded, Ok(false) for a verification
/// failure (exit 1).
fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Compose { a, b, n, json } => {
            let (va, vb, dim) = parse_pair(&a, &b, n)?;
            if is_circle(&va) || is_circle(&vb) {
                let out = to_trigop(va)?.compose(&to_trigop(vb)?)?;
                emit(&Value::CircleOp(out), json);
            } else {
                let out = to_diffop(va, dim)?.compose(&to_diffop(vb, dim)?)?;
                emit(&Value::Op(out), json);
            }
        }
        Cmd::Bracket { a, b, n, json } => {
            let (va, vb, dim) = parse_pair(&a, &b, n)?;
            if is_circle(&va) || is_circle(&vb) {
                let out = to_trigop(va)?.commutator(&to_trigop(vb)?)?;
                emit(&Value::CircleOp(out), json);
            } else {
                let out = to_diffop(va, dim)?.commutator(&to_diffop(vb, dim)?)?;
                emit(&Value::Op(out), json);
            }
        }
        Cmd::Apply { op, arg, n, json } => {
            let (vop, varg, dim) = parse_pair(&op, &arg, n)?;
            if is_circle(&vop) || is_circle(&varg) {
                let out = to_trigop(vop)?.apply(&to_trig(varg, Parity::Antiperiodic)?)?;
                emit(&Value::Trig(out), json);
            } else {
                let out = to_diffop(vop, dim)?.apply(&to_poly(varg, dim)?)?;
                emit(&Value::Sym(SymbolPoly::from_poly(&out)), json);
            }
        }
        Cmd::Symbol { op, k, n, json } => {
            let v = parse_expr(&op, n)?;
            let dim = value_dim(&v).max(n.unwrap_or(1));
            if is_circle(&v) {
                let d = BundleOp::Moebius(to_trigop(v)?);
                let kk = k
                    .or_else(|| bundle_order(&d).ok().flatten())
                    .unwrap_or(0);
                let sym = symbol_bundle(&d, kk)?;
                match sym {
                    qpalg::linebundle::BundleSymbol::Moebius { coeff, .. } => {
                        emit(&Value::Trig(coeff), json)
                    }
                    qpalg::linebundle::BundleSymbol::Trivial(s) => emit(&Value::Sym(s), json),
                }
            } else {
                let d = to_diffop(parse_expr(&op, Some(dim))?, dim)?;
                let out = match k {
                    Some(k) => d.symbol_k(k)?,
                    None => sigma_aff(&d),
                };
                emit(&Value::Sym(out), json);
            }
        }
        Cmd::Quantize { sym, n, json } => {
            let v = parse_expr(&sym, n)?;
            let dim = value_dim(&v).max(n.unwrap_or(1));
            let s = to_symbol(parse_expr(&sym, Some(dim))?, dim)?;
            emit(&Value::Op(q_affine(&s)), json);
        }
        Cmd::Star { f, g, order, n, json } => {
            let (vf, vg, dim) = parse_pair(&f, &g, n)?;
            let series = star(&to_symbol(vf, dim)?, &to_symbol(vg, dim)?, order)?;
            if json {
                println!(
                    "{}",
                    json!({
                        "type": "star", "n": dim, "order": order,
                        "coeffs": series.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                    })
                );
            } else {
                for (k, c) in series.coeffs().iter().enumerate() {
                    println!("hbar^{k}: {c}");
                }
            }
        }
        Cmd::Poisson { f, g, n, json } => {
            let (vf, vg, dim) = parse_pair(&f, &g, n)?;
            let out = poisson_bracket(&to_symbol(vf, dim)?, &to_symbol(vg, dim)?)?;
            emit(&Value::Sym(out), json);
        }
        Cmd::Derive {
            target,
            level,
            y,
            kappa,
            lambda,
            omega,
            q,
            delta,
            n,
            json,
        } => {
            let v = parse_expr(&target, n)?;
            let dim = value_dim(&v).max(n.unwrap_or(1));
            let kappa = parse_rat(&kappa)?;
            let lambda = parse_rat(&lambda)?;
            let omega = parse_omega(&omega, dim)?;
            match level {
                DerivLevel::D1 => {
                    let ysrc = y.ok_or_else(|| {
                        Error::Precondition("--y is required for level d1".into())
                    })?;
                    let yf = parse_field_op(&ysrc, Some(dim))?;
                    let p = Deriv1Params::new(yf, kappa, lambda, omega)?;
                    let u = to_first_order(&to_diffop(parse_expr(&target, Some(dim))?, dim)?)?;
                    let out = deriv_d1(&p, &u)?;
                    emit(&Value::Op(out.to_diffop()), json);
                }
                DerivLevel::S => {
                    let qsrc = q
                        .ok_or_else(|| Error::Precondition("--q is required for level s".into()))?;
                    let qsym = to_symbol(parse_expr(&qsrc, Some(dim))?, dim)?;
                    let f = to_symbol(parse_expr(&target, Some(dim))?, dim)?;
                    let out = deriv_s(&qsym, &kappa, &omega, &f)?;
                    emit(&Value::Sym(out), json);
                }
                DerivLevel::D => {
                    let dsrc = delta.ok_or_else(|| {
                        Error::Precondition("--delta is required for level d".into())
                    })?;
                    let dop = to_diffop(parse_expr(&dsrc, Some(dim))?, dim)?;
                    let t = to_diffop(parse_expr(&target, Some(dim))?, dim)?;
                    let out = deriv_d(&dop, &omega, &t)?;
                    emit(&Value::Op(out), json);
                }
            }
        }
        Cmd::Automorph {
            target,
            phi,
            k,
            lambda,
            omega,
            n,
            json,
        } => {
            let (a, b) = parse_affine_data(&phi)?;
            let dim = a.dim().max(n.unwrap_or(1));
            let map = qpalg::flows::AffineMap::new(a, b)?;
            let p = AutoParams::new(map, parse_rat(&k)?, parse_rat(&lambda)?, parse_omega(&omega, dim)?)?;
            let u = to_first_order(&to_diffop(parse_expr(&target, Some(dim))?, dim)?)?;
            let out = automorphism_d1(&p, &u)?;
            emit(&Value::Op(out.to_diffop()), json);
        }
        Cmd::Flow { field, t, mode, json } => {
            let (a, b) = parse_affine_data(&field)?;
            let y = AffineField::new(a, b)?;
            let phi = match mode {
                Mode::Exact => flow_exact(&y, &parse_rat(&t)?)?,
                Mode::Numeric => flow_numeric(&y, to_f64(&parse_rat(&t)?)),
            };
            print_flow(&phi, json)?;
        }
        Cmd::OneParam {
            target,
            y,
            kappa,
            lambda,
            omega,
            t,
            mode,
            n,
            json,
        } => {
            let v = parse_expr(&target, n)?;
            let dim = value_dim(&v).max(n.unwrap_or(1));
            let yf = parse_field_op(&y, Some(dim))?;
            let p = Deriv1Params::new(
                yf,
                parse_rat(&kappa)?,
                parse_rat(&lambda)?,
                parse_omega(&omega, dim)?,
            )?;
            let u = to_first_order(&to_diffop(parse_expr(&target, Some(dim))?, dim)?)?;
            match mode {
                Mode::Exact => {
                    let out = one_param_group_exact(&p, &parse_rat(&t)?, &u)?;
                    emit(&Value::Op(out.to_diffop()), json);
                }
                Mode::Numeric => {
                    let out = one_param_group_numeric(
                        &p,
                        to_f64(&parse_rat(&t)?),
                        &NumericFirstOrder::from_exact(&u),
                    )?;
                    if json {
                        println!(
                            "{}",
                            json!({"type": "first-order", "n": dim, "order": 1, "coeffs": out.probe_values()})
                        );
                    } else {
                        println!("probe values: {:?}", out.probe_values());
                    }
                }
            }
        }
        Cmd::DivCheck { a, b, t, s, mode, json } => {
            let (ma, ba) = parse_affine_data(&a)?;
            let (mb, bb) = parse_affine_data(&b)?;
            let ya = AffineField::new(ma, ba)?;
            let yb = AffineField::new(mb, bb)?;
            let (phi, psi) = match mode {
                Mode::Exact => (flow_exact(&ya, &parse_rat(&t)?)?, flow_exact(&yb, &parse_rat(&s)?)?),
                Mode::Numeric => (
                    flow_numeric(&ya, to_f64(&parse_rat(&t)?)),
                    flow_numeric(&yb, to_f64(&parse_rat(&s)?)),
                ),
            };
            let rep = div_cocycle_check(&phi, &psi)?;
            if json {
                println!(
                    "{}",
                    json!({"type": "check", "pass": rep.pass, "lhs": rep.lhs, "rhs": rep.rhs, "residual": rep.residual, "mode": rep.mode})
                );
            } else {
                println!(
                    "{}: lhs = {}, rhs = {}, residual = {:.3e} ({})",
                    if rep.pass { "PASS" } else { "FAIL" },
                    rep.lhs,
                    rep.rhs,
                    rep.residual,
                    rep.mode
                );
            }
            return Ok(rep.pass);
        }
        Cmd::Bundle {
            action,
            op,
            arg,
            model,
            k,
            n,
            json,
        } => {
            let dim = n.unwrap_or(1);
            let d = match model {
                Model::Moebius => BundleOp::Moebius(to_trigop(parse_expr(&op, None)?)?),
                Model::Trivial => {
                    let v = parse_expr(&op, Some(dim))?;
                    let dd = value_dim(&v).max(dim);
                    BundleOp::Trivial(to_diffop(parse_expr(&op, Some(dd))?, dd)?)
                }
            };
            match action.as_str() {
                "order" => {
                    let o = bundle_order(&d)?;
                    if json {
                        println!("{}", json!({"type": "order", "order": o}));
                    } else {
                        match o {
                            Some(o) => println!("{o}"),
                            None => println!("zero operator"),
                        }
                    }
                }
                "apply" => {
                    let asrc = arg.ok_or_else(|| {
                        Error::Precondition("bundle apply needs a section argument".into())
                    })?;
                    let section = match &d {
                        BundleOp::Moebius(_) => qpalg::linebundle::SectionRep::moebius(
                            to_trig(parse_expr(&asrc, None)?, Parity::Antiperiodic)?,
                        )?,
                        BundleOp::Trivial(op) => qpalg::linebundle::SectionRep::Trivial(to_poly(
                            parse_expr(&asrc, Some(op.dim()))?,
                            op.dim(),
                        )?),
                    };
                    match qpalg::linebundle::bundle_apply(&d, &section)? {
                        qpalg::linebundle::SectionRep::Moebius(t) => emit(&Value::Trig(t), json),
                        qpalg::linebundle::SectionRep::Trivial(p) => {
                            emit(&Value::Sym(SymbolPoly::from_poly(&p)), json)
                        }
                    }
                }
                "globalize" => match &d {
                    BundleOp::Moebius(t) => {
                        let out = globalize_iso(&FrameChoice::standard(), t)?;
                        emit(&Value::CircleOp(out), json);
                    }
                    BundleOp::Trivial(_) => {
                        return Err(Error::Precondition(
                            "globalize applies to the moebius model".into(),
                        ))
                    }
                },
                "symbol" => {
                    let kk = k
                        .or_else(|| bundle_order(&d).ok().flatten())
                        .unwrap_or(0);
                    match symbol_bundle(&d, kk)? {
                        qpalg::linebundle::BundleSymbol::Moebius { coeff, k } => {
                            if json {
                                println!(
                                    "{}",
                                    json!({"type": "bundle-symbol", "n": 1, "order": k, "coeffs": [coeff.to_string()]})
                                );
                            } else {
                                println!("degree {k}: {coeff}");
                            }
                        }
                        qpalg::linebundle::BundleSymbol::Trivial(s) => emit(&Value::Sym(s), json),
                    }
                }
                other => {
                    return Err(Error::Precondition(format!(
                        "unknown bundle action `{other}`; expected order, apply, globalize, or symbol"
                    )))
                }
            }
        }
        Cmd::Equivariant { n, k, lambda, json } => {
            let lam = parse_rat(&lambda)?;
            let sol = solve_equivariant_symbol(n, k, &lam)?;
            let coeffs: Vec<Vec<String>> = sol
                .coeffs
                .iter()
                .map(|row| row.iter().map(|c| c.to_string()).collect())
                .collect();
            if json {
                println!(
                    "{}",
                    json!({
                        "type": "equivariant", "n": n, "order": k,
                        "status": status_str(&sol.status),
                        "coefficients": coeffs,
                    })
                );
            } else {
                println!("status: {}", status_str(&sol.status));
                for (p, row) in coeffs.iter().enumerate() {
                    println!("degree {p}: [{}]", row.join(", "));
                }
            }
        }
        Cmd::Verify { suite, seed, json } => {
            let reports = if suite == "all" {
                run_all(seed)
            } else {
                vec![run_suite(&suite, seed)?]
            };
            let ok = reports.iter().all(|r| r.passed);
            if json {
                println!(
                    "{}",
                    json!(reports.iter().map(|r| json!({
                        "suite": r.name, "cases": r.cases, "passed": r.passed, "detail": r.detail,
                    })).collect::<Vec<_>>())
                );
            } else {
                for r in &reports {
                    print_suite(r);
                }
                if suite == "all" {
                    println!(
                        "{}/{} suites passed",
                        reports.iter().filter(|r| r.passed).count(),
                        SUITE_NAMES.len()
                    );
                }
            }
            return Ok(ok);
        }
    }
    Ok(true)
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => {}
        Ok(false) => std::process::exit(1),
        Err(e @ Error::Parse { .. }) => {
            eprintln!("parse error: {e}");
            std::process::exit(2);
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(3);
        }
    }
}
