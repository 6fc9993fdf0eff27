//! Expression parser for the CLI surface: rationals, `x1`, `xi1`, `d1`
//! (the bare `d` is the circle derivative), `cos(3t)`, `sin(1/2t)`, with
//! `+ - * ^` and parentheses. Printing any value re-parses to the same
//! value; mixed-mode expressions are rejected at the combination point.

use crate::diffop::DiffOp;
use crate::error::{Error, Result};
use crate::linebundle::TrigOp;
use crate::poly::{Parity, Poly, SymbolPoly, TrigPoly};
use crate::rat::{rint, Rat};

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(i64),
    Ident { name: String, index: Option<usize> },
    Plus,
    Minus,
    Star,
    Caret,
    Slash,
    LParen,
    RParen,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Token,
    line: usize,
    col: usize,
}

fn lex(src: &str) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = src.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (tline, tcol) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                bump(&mut chars);
            }
            '+' | '-' | '*' | '^' | '/' | '(' | ')' => {
                bump(&mut chars);
                out.push(Spanned {
                    tok: match c {
                        '+' => Token::Plus,
                        '-' => Token::Minus,
                        '*' => Token::Star,
                        '^' => Token::Caret,
                        '/' => Token::Slash,
                        '(' => Token::LParen,
                        _ => Token::RParen,
                    },
                    line: tline,
                    col: tcol,
                });
            }
            '0'..='9' => {
                let mut v: i64 = 0;
                while let Some(d) = chars.peek().and_then(|c| c.to_digit(10)) {
                    bump(&mut chars);
                    v = v
                        .checked_mul(10)
                        .and_then(|v| v.checked_add(d as i64))
                        .ok_or(Error::Parse {
                            line: tline,
                            col: tcol,
                            msg: "integer literal too large".into(),
                        })?;
                }
                out.push(Spanned { tok: Token::Num(v), line: tline, col: tcol });
            }
            c if c.is_ascii_alphabetic() => {
                let mut name = String::new();
                while chars.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
                    name.push(bump(&mut chars));
                }
                let mut index = None;
                if chars.peek().is_some_and(|c| c.is_ascii_digit()) {
                    let mut v = 0usize;
                    while let Some(d) = chars.peek().and_then(|c| c.to_digit(10)) {
                        bump(&mut chars);
                        v = v * 10 + d as usize;
                    }
                    index = Some(v);
                }
                match name.as_str() {
                    "x" | "xi" | "d" | "cos" | "sin" | "t" => {}
                    _ => {
                        return Err(Error::Parse {
                            line: tline,
                            col: tcol,
                            msg: format!("unknown identifier `{name}`"),
                        })
                    }
                }
                out.push(Spanned {
                    tok: Token::Ident { name, index },
                    line: tline,
                    col: tcol,
                });
            }
            other => {
                return Err(Error::Parse {
                    line: tline,
                    col: tcol,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(out)
}

/// A parsed value in one of the algebras the CLI works with.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(Rat),
    Sym(SymbolPoly),
    Op(DiffOp),
    Trig(TrigPoly),
    CircleOp(TrigOp),
}

impl Value {
    fn mode_mix<T>() -> Result<T> {
        Err(Error::ModeMix)
    }

    fn add(self, other: Value) -> Result<Value> {
        use Value::*;
        Ok(match (self, other) {
            (Num(a), Num(b)) => Num(a + b),
            (Num(a), Sym(b)) | (Sym(b), Num(a)) => {
                Sym(b.add(&SymbolPoly::from_poly(&Poly::constant(b.dim(), a)))?)
            }
            (Num(a), Op(b)) | (Op(b), Num(a)) => {
                Op(b.add(&DiffOp::mult(&Poly::constant(b.dim(), a)))?)
            }
            (Num(a), Trig(b)) | (Trig(b), Num(a)) => Trig(b.add(&TrigPoly::constant(a))?),
            (Num(a), CircleOp(b)) | (CircleOp(b), Num(a)) => {
                CircleOp(b.add(&TrigOp::mult(&TrigPoly::constant(a))?)?)
            }
            (Sym(a), Sym(b)) => Sym(a.add(&b)?),
            (Op(a), Op(b)) => Op(a.add(&b)?),
            (Sym(a), Op(b)) | (Op(b), Sym(a)) => Op(b.add(&sym_to_op(&a)?)?),
            (Trig(a), Trig(b)) => Trig(a.add(&b)?),
            (CircleOp(a), CircleOp(b)) => CircleOp(a.add(&b)?),
            (Trig(a), CircleOp(b)) | (CircleOp(b), Trig(a)) => {
                CircleOp(b.add(&TrigOp::mult(&a)?)?)
            }
            _ => return Value::mode_mix(),
        })
    }

    fn neg(self) -> Value {
        use Value::*;
        match self {
            Num(a) => Num(-a),
            Sym(a) => Sym(a.neg()),
            Op(a) => Op(a.neg()),
            Trig(a) => Trig(a.neg()),
            CircleOp(a) => CircleOp(a.neg()),
        }
    }

    fn mul(self, other: Value) -> Result<Value> {
        use Value::*;
        Ok(match (self, other) {
            (Num(a), Num(b)) => Num(a * b),
            (Num(a), Sym(b)) | (Sym(b), Num(a)) => Sym(b.scale(&a)),
            (Num(a), Op(b)) | (Op(b), Num(a)) => Op(b.scale(&a)),
            (Num(a), Trig(b)) | (Trig(b), Num(a)) => Trig(b.scale(&a)),
            (Num(a), CircleOp(b)) | (CircleOp(b), Num(a)) => CircleOp(b.scale(&a)),
            (Sym(a), Sym(b)) => Sym(a.mul(&b)?),
            // normal-ordered operator composition
            (Op(a), Op(b)) => Op(a.compose(&b)?),
            (Sym(a), Op(b)) => Op(sym_to_op(&a)?.compose(&b)?),
            (Op(a), Sym(b)) => Op(a.compose(&sym_to_op(&b)?)?),
            (Trig(a), Trig(b)) => Trig(a.mul(&b)),
            (CircleOp(a), CircleOp(b)) => CircleOp(a.compose(&b)?),
            (Trig(a), CircleOp(b)) => CircleOp(TrigOp::mult(&a)?.compose(&b)?),
            (CircleOp(a), Trig(b)) => CircleOp(a.compose(&TrigOp::mult(&b)?)?),
            _ => return Value::mode_mix(),
        })
    }

    fn pow(self, e: u32) -> Result<Value> {
        if e == 0 {
            return Ok(Value::Num(rint(1)));
        }
        let mut acc = self.clone();
        for _ in 1..e {
            acc = acc.mul(self.clone())?;
        }
        Ok(acc)
    }
}

/// A symbol with no xi-content promotes to a multiplication operator;
/// anything carrying xi stays on the classical side.
fn sym_to_op(s: &SymbolPoly) -> Result<DiffOp> {
    match s.xi_degree() {
        None | Some(0) => Ok(DiffOp::mult(&s.to_poly()?)),
        Some(_) => Err(Error::ModeMix),
    }
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    n: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn err_here(&self, msg: impl Into<String>) -> Error {
        let (line, col) = self
            .toks
            .get(self.pos.min(self.toks.len().saturating_sub(1)))
            .map(|s| (s.line, s.col))
            .unwrap_or((1, 1));
        Error::Parse { line, col, msg: msg.into() }
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Token) -> Result<()> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err_here(format!("expected {t:?}")))
        }
    }

    fn expr(&mut self) -> Result<Value> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    acc = acc.add(self.term()?)?;
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    acc = acc.add(self.term()?.neg())?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Value> {
        let mut acc = self.unary()?;
        while self.peek() == Some(&Token::Star) {
            self.pos += 1;
            acc = acc.mul(self.unary()?)?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Value> {
        if self.peek() == Some(&Token::Minus) {
            self.pos += 1;
            return Ok(self.unary()?.neg());
        }
        self.factor()
    }

    fn factor(&mut self) -> Result<Value> {
        let base = self.primary()?;
        if self.peek() == Some(&Token::Caret) {
            self.pos += 1;
            match self.bump() {
                Some(Token::Num(e)) if e >= 0 => base.pow(e as u32),
                _ => Err(self.err_here("expected a nonnegative integer exponent")),
            }
        } else {
            Ok(base)
        }
    }

    fn rational_after(&mut self, first: i64) -> Result<Rat> {
        if self.peek() == Some(&Token::Slash) {
            self.pos += 1;
            match self.bump() {
                Some(Token::Num(d)) if d != 0 => Ok(crate::rat::rat(first, d)),
                _ => Err(self.err_here("expected a nonzero integer denominator")),
            }
        } else {
            Ok(rint(first))
        }
    }

    fn primary(&mut self) -> Result<Value> {
        match self.bump() {
            Some(Token::Num(v)) => Ok(Value::Num(self.rational_after(v)?)),
            Some(Token::LParen) => {
                let v = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(v)
            }
            Some(Token::Ident { name, index }) => match (name.as_str(), index) {
                ("x", Some(i)) if i >= 1 => {
                    Ok(Value::Sym(SymbolPoly::var_x(self.n, i - 1)?))
                }
                ("xi", Some(i)) if i >= 1 => {
                    Ok(Value::Sym(SymbolPoly::var_xi(self.n, i - 1)?))
                }
                ("d", Some(i)) if i >= 1 => Ok(Value::Op(DiffOp::partial(self.n, i - 1)?)),
                ("d", None) => Ok(Value::CircleOp(TrigOp::ddtheta())),
                ("cos" | "sin", None) => {
                    let is_cos = name == "cos";
                    self.expect(Token::LParen)?;
                    let freq2 = self.trig_freq()?;
                    self.expect(Token::RParen)?;
                    Ok(Value::Trig(if is_cos {
                        TrigPoly::cos2(freq2)
                    } else {
                        TrigPoly::sin2(freq2)
                    }))
                }
                _ => {
                    self.pos -= 1;
                    Err(self.err_here(format!("unexpected identifier `{name}`")))
                }
            },
            _ => {
                Err(self.err_here("expected a value"))
            }
        }
    }

    /// Frequency inside cos(...)/sin(...): `[int [/ int]] t`, doubled.
    fn trig_freq(&mut self) -> Result<u32> {
        let mut num: i64 = 1;
        let mut den: i64 = 1;
        if let Some(Token::Num(v)) = self.peek() {
            num = *v;
            self.pos += 1;
            if self.peek() == Some(&Token::Slash) {
                self.pos += 1;
                match self.bump() {
                    Some(Token::Num(d)) if d != 0 => den = d,
                    _ => return Err(self.err_here("expected an integer denominator")),
                }
            }
        }
        match self.bump() {
            Some(Token::Ident { name, index: None }) if name == "t" => {}
            _ => return Err(self.err_here("expected `t` in the trig argument")),
        }
        // doubled frequency: num/den * 2 must be an integer
        let f2 = num.checked_mul(2).ok_or(self.err_here("frequency too large"))?;
        if f2 % den != 0 || f2 / den < 0 {
            return Err(self.err_here("frequencies must be integers or half-integers"));
        }
        Ok((f2 / den) as u32)
    }
}

/// Parse an expression. The dimension is the larger of `n_hint` and the
/// highest variable index appearing in the source.
pub fn parse_expr(src: &str, n_hint: Option<usize>) -> Result<Value> {
    let toks = lex(src)?;
    let mut n = n_hint.unwrap_or(1).max(1);
    for s in &toks {
        if let Token::Ident { name, index: Some(i) } = &s.tok {
            if matches!(name.as_str(), "x" | "xi" | "d") {
                n = n.max(*i);
            }
        }
    }
    let mut p = Parser { toks, pos: 0, n };
    let v = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.err_here("trailing input"));
    }
    Ok(v)
}

/// Coerce to a differential operator on R^n.
pub fn to_diffop(v: Value, n: usize) -> Result<DiffOp> {
    match v {
        Value::Op(d) => Ok(d),
        Value::Sym(s) => sym_to_op(&s),
        Value::Num(c) => Ok(DiffOp::mult(&Poly::constant(n, c))),
        _ => Err(Error::ModeMix),
    }
}

/// Coerce to a classical symbol on T*R^n.
pub fn to_symbol(v: Value, n: usize) -> Result<SymbolPoly> {
    match v {
        Value::Sym(s) => Ok(s),
        Value::Num(c) => Ok(SymbolPoly::from_poly(&Poly::constant(n, c))),
        Value::Op(d) if d.order() == Some(0) || d.is_zero() => Ok(crate::quantize::sigma_aff(&d)),
        _ => Err(Error::ModeMix),
    }
}

/// Coerce to a plain polynomial in x.
pub fn to_poly(v: Value, n: usize) -> Result<Poly> {
    let s = to_symbol(v, n)?;
    match s.xi_degree() {
        None | Some(0) => Ok(s.to_poly()?),
        Some(_) => Err(Error::ModeMix),
    }
}

/// Coerce to a trigonometric polynomial of the expected parity.
pub fn to_trig(v: Value, parity: Parity) -> Result<TrigPoly> {
    let t = match v {
        Value::Trig(t) => t,
        Value::Num(c) => TrigPoly::constant(c),
        _ => return Err(Error::ModeMix),
    };
    if t.is_zero() || t.parity() == parity {
        Ok(t)
    } else {
        Err(Error::ModeMix)
    }
}

/// Coerce to a circle operator with periodic coefficients.
pub fn to_trigop(v: Value) -> Result<TrigOp> {
    match v {
        Value::CircleOp(op) => Ok(op),
        Value::Trig(t) => TrigOp::mult(&t),
        Value::Num(c) => TrigOp::mult(&TrigPoly::constant(c)),
        _ => Err(Error::ModeMix),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiindex::MultiIndex;
    use crate::rat::{rat, rone};
    use crate::sample::{
        random_diffop, random_poly, random_symbol, random_trig, rng_from_seed,
    };
    use rand::Rng as _;

    #[test]
    fn grammar_examples() {
        // x1^2*d1*d2 + 3/2*d1 -> two terms
        let v = parse_expr("x1^2*d1*d2 + 3/2*d1", None).unwrap();
        let Value::Op(op) = v else { panic!("expected an operator") };
        let mut expect = DiffOp::zero(2);
        expect.add_term(MultiIndex(vec![1, 1]), Poly::var(2, 0).unwrap().pow(2));
        expect.add_term(MultiIndex(vec![1, 0]), Poly::constant(2, rat(3, 2)));
        assert_eq!(op, expect);
        // x1*xi1 - 2 -> symbol
        let v = parse_expr("x1*xi1 - 2", None).unwrap();
        let Value::Sym(s) = v else { panic!("expected a symbol") };
        let expect = SymbolPoly::var_x(1, 0)
            .unwrap()
            .mul(&SymbolPoly::var_xi(1, 0).unwrap())
            .unwrap()
            .sub(&SymbolPoly::from_poly(&Poly::constant(1, rat(2, 1))))
            .unwrap();
        assert_eq!(s, expect);
        // mixed parity rejected
        assert!(matches!(
            parse_expr("cos(3t) + sin(1/2t)", None),
            Err(Error::ModeMix)
        ));
        // normal ordering: d1*x1 = x1*d1 + 1
        let v = parse_expr("d1*x1", None).unwrap();
        let w = parse_expr("x1*d1 + 1", None).unwrap();
        assert_eq!(v, w);
    }

    #[test]
    fn parse_errors_carry_positions() {
        match parse_expr("x1 + $", None) {
            Err(Error::Parse { line, col, .. }) => {
                assert_eq!((line, col), (1, 6));
            }
            other => panic!("expected a parse error, got {other:?}"),
        }
        assert!(matches!(
            parse_expr("foo", None),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_expr("x1 +", None),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            parse_expr("cos(1/3t)", None),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn circle_expressions() {
        let v = parse_expr("cos(t)*d^2 + 1", None).unwrap();
        let op = to_trigop(v).unwrap();
        let mut c2 = TrigPoly::zero(Parity::Periodic);
        c2.add_cos2(2, rone());
        let expect = TrigOp::new(vec![
            TrigPoly::one(),
            TrigPoly::zero(Parity::Periodic),
            c2,
        ])
        .unwrap();
        assert_eq!(op, expect);
        let v = parse_expr("sin(1/2t)", None).unwrap();
        let s = to_trig(v, Parity::Antiperiodic).unwrap();
        assert_eq!(s, TrigPoly::sin2(1));
    }

    #[test]
    fn print_parse_round_trip() {
        let mut rng = rng_from_seed(211);
        for _ in 0..60 {
            let n = 1 + (rng.gen::<u32>() % 2) as usize;
            let op = random_diffop(&mut rng, n, 3, 2, 3);
            let v = parse_expr(&op.to_string(), Some(n)).unwrap();
            assert_eq!(to_diffop(v, n).unwrap(), op, "operator {op}");
            let s = random_symbol(&mut rng, n, 3, 2, 3);
            let v = parse_expr(&s.to_string(), Some(n)).unwrap();
            assert_eq!(to_symbol(v, n).unwrap(), s, "symbol {s}");
            let p = random_poly(&mut rng, n, 3, 3);
            let v = parse_expr(&p.to_string(), Some(n)).unwrap();
            assert_eq!(to_poly(v, n).unwrap(), p, "poly {p}");
            for parity in [Parity::Periodic, Parity::Antiperiodic] {
                let t = random_trig(&mut rng, parity, 5, 3);
                let v = parse_expr(&t.to_string(), None).unwrap();
                assert_eq!(to_trig(v, parity).unwrap(), t, "trig {t}");
            }
        }
        // circle operators
        for _ in 0..20 {
            let coeffs = (0..3)
                .map(|_| random_trig(&mut rng, Parity::Periodic, 4, 2))
                .collect();
            let op = TrigOp::new(coeffs).unwrap();
            let v = parse_expr(&op.to_string(), None).unwrap();
            assert_eq!(to_trigop(v).unwrap(), op, "circle op {op}");
        }
    }
}
