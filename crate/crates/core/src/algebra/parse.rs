//! Text parser for polynomials.
//!
//! Grammar (whitespace-insensitive except inside jet symbols, where the
//! derivative prefixes `D4 D3 …` are separated from the base by spaces):
//!
//! ```text
//! expr   := ['-'|'+'] term (('+'|'-') term)*
//! term   := power (('*'|'/') power)*          // '/' only by constants
//! power  := atom ('^' integer)?
//! atom   := integer | symbol | '(' expr ')' | '-' atom
//! symbol := ('D'[1-4] ' ')* base
//! ```
//!
//! The canonical printer only emits a subset of this grammar, so
//! parse(print(p)) == p bit-exactly.

use num_bigint::BigInt;

use super::jet::JetSym;
use super::poly::Poly;
use super::rat::Rat;
use super::AlgebraError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Sym(JetSym),
    Op(char),
}

fn err(msg: impl Into<String>) -> AlgebraError {
    AlgebraError::Parse(msg.into())
}

fn lex(s: &str) -> Result<Vec<Tok>, AlgebraError> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut pending_word: Vec<u8> = Vec::new();
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            if !pending_word.is_empty() {
                return Err(err("derivative prefix must be followed by a symbol"));
            }
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let txt: String = chars[start..i].iter().collect();
            out.push(Tok::Int(txt.parse().map_err(|_| err("bad integer"))?));
            continue;
        }
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let mut ident: String = chars[start..i].iter().collect();
            // Derivative prefix `D1`..`D4`.
            if ident.len() == 2 && ident.starts_with('D') {
                let d = ident.as_bytes()[1];
                if (b'1'..=b'4').contains(&d) {
                    pending_word.push(d - b'0');
                    continue;
                }
            }
            // Connection coefficient `wjk(ei)`.
            if ident.len() == 3 && ident.starts_with('w') && i < chars.len() && chars[i] == '(' {
                let close = chars[i..].iter().position(|&c| c == ')').ok_or_else(|| err("unclosed w(…)"))?;
                let inner: String = chars[i..i + close + 1].iter().collect();
                ident.push_str(&inner);
                i += close + 1;
            }
            let base = ident.parse()?;
            out.push(Tok::Sym(JetSym::with_word(base, std::mem::take(&mut pending_word))));
            continue;
        }
        if !pending_word.is_empty() {
            return Err(err("derivative prefix must be followed by a symbol"));
        }
        if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
            continue;
        }
        return Err(err(format!("unexpected character {c:?}")));
    }
    if !pending_word.is_empty() {
        return Err(err("dangling derivative prefix"));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Poly, AlgebraError> {
        let mut acc = if self.eat('-') {
            -self.term()?
        } else {
            self.eat('+');
            self.term()?
        };
        loop {
            if self.eat('+') {
                acc = acc + self.term()?;
            } else if self.eat('-') {
                acc = acc - self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Poly, AlgebraError> {
        let mut acc = self.power()?;
        loop {
            if self.eat('*') {
                acc = acc * self.power()?;
            } else if self.eat('/') {
                let d = self.power()?;
                let c = d.as_constant().ok_or_else(|| err("division by a non-constant"))?;
                acc = acc.scale(&c.recip()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn power(&mut self) -> Result<Poly, AlgebraError> {
        let base = self.atom()?;
        if self.eat('^') {
            match self.toks.get(self.pos).cloned() {
                Some(Tok::Int(n)) => {
                    self.pos += 1;
                    let e: u32 = n.try_into().map_err(|_| err("exponent too large"))?;
                    Ok(base.pow(e))
                }
                _ => Err(err("exponent must be a non-negative integer")),
            }
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Poly, AlgebraError> {
        match self.toks.get(self.pos).cloned() {
            Some(Tok::Int(n)) => {
                self.pos += 1;
                Ok(Poly::constant(Rat::from_bigint(n)))
            }
            Some(Tok::Sym(s)) => {
                self.pos += 1;
                Ok(Poly::var(s))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(err("expected ')'"));
                }
                Ok(e)
            }
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(-self.atom()?)
            }
            other => Err(err(format!("unexpected token {other:?}"))),
        }
    }
}

pub fn parse_poly(s: &str) -> Result<Poly, AlgebraError> {
    let toks = lex(s)?;
    if toks.is_empty() {
        return Err(err("empty polynomial text"));
    }
    let mut p = Parser { toks, pos: 0 };
    let out = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(err(format!("trailing input at token {}", p.pos)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_jets_and_connection_coefficients() {
        let p = parse_poly("D4 D4 k4 + (w24(e1) + w14(e2) - w34(e3))*D4 k4").unwrap();
        assert_eq!(p.num_terms(), 4);
        assert_eq!(parse_poly(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn round_trips_typeset_polynomial() {
        let s = "100*a^9 - 210*a^8 - 4306*a^7 - 19687*a^6 - 49256*a^5 - 79972*a^4 - 86866*a^3 - 60384*a^2 - 24178*a - 42840";
        let p = parse_poly(s).unwrap();
        assert_eq!(p.to_string(), s);
    }

    #[test]
    fn rejects_garbage() {
        assert!(parse_poly("").is_err());
        assert!(parse_poly("x +").is_err());
        assert!(parse_poly("x / y").is_err());
        assert!(parse_poly("D4").is_err());
        assert!(parse_poly("x ^ y").is_err());
        assert!(parse_poly("1/0").is_err());
    }

    #[test]
    fn rationals_and_unary_minus() {
        let p = parse_poly("-3/2*xi - -x").unwrap();
        assert_eq!(p.to_string(), "-3/2*xi + x");
    }
}
