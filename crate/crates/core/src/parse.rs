//! Recursive-descent parser for the polynomial input grammar.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | atom ('^' uint)?
//! atom   := rational | name | '(' expr ')'
//! ```
//!
//! Names must be coordinates of the target chart. `^` takes a non-negative
//! integer literal. `/` is division by a constant: the right operand must
//! evaluate to a nonzero constant polynomial, which keeps every accepted
//! expression an exact polynomial.

use num_traits::Zero;

use crate::chart::Chart;
use crate::error::CalcError;
use crate::poly::PolyExpr;
use crate::rat::Rat;

/// Parse `text` as a polynomial over `chart`'s coordinates.
pub fn parse_poly(text: &str, chart: &Chart) -> Result<PolyExpr, CalcError> {
    let mut p = Parser { bytes: text.as_bytes(), pos: 0, chart };
    p.skip_ws();
    if p.at_end() {
        return Err(p.syntax("empty expression"));
    }
    let e = p.expr()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    chart: &'a Chart,
}

impl<'a> Parser<'a> {
    fn syntax(&self, msg: &str) -> CalcError {
        CalcError::Syntax { position: self.pos, message: msg.to_string() }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.bytes.len()
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek();
        if b.is_some() {
            self.pos += 1;
        }
        b
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b' ' | b'\t' | b'\r' | b'\n')) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, b: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<PolyExpr, CalcError> {
        let mut acc = self.term()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.bump();
                    acc = &acc + &self.term()?;
                }
                Some(b'-') => {
                    self.bump();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<PolyExpr, CalcError> {
        let mut acc = self.factor()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'*') => {
                    self.bump();
                    acc = &acc * &self.factor()?;
                }
                Some(b'/') => {
                    self.bump();
                    let denom_pos = self.pos;
                    let d = self.factor()?;
                    if !d.is_constant() {
                        return Err(CalcError::Syntax {
                            position: denom_pos,
                            message: "division is only allowed by a rational constant".into(),
                        });
                    }
                    let c = d.constant_term();
                    if c.is_zero() {
                        return Err(CalcError::Syntax {
                            position: denom_pos,
                            message: "division by zero".into(),
                        });
                    }
                    acc = acc.scale(&(Rat::new(1.into(), 1.into()) / c));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<PolyExpr, CalcError> {
        self.skip_ws();
        if self.peek() == Some(b'-') {
            self.bump();
            let f = self.factor()?;
            return Ok(-&f);
        }
        let base = self.atom()?;
        self.skip_ws();
        if self.peek() == Some(b'^') {
            self.bump();
            let e = self.uint()?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<PolyExpr, CalcError> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.bump();
                let e = self.expr()?;
                if !self.eat(b')') {
                    Err(self.syntax("expected `)`"))
                } else {
                    Ok(e)
                }
            }
            Some(b) if b.is_ascii_digit() => {
                let n = self.uint()?;
                Ok(PolyExpr::constant(self.chart, Rat::from_integer(n.into())))
            }
            Some(b) if b.is_ascii_alphabetic() || b == b'_' => {
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                    self.bump();
                }
                let name = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
                match self.chart.index_of(name) {
                    Some(idx) => Ok(PolyExpr::coordinate(self.chart, idx)),
                    None => Err(CalcError::UnknownVariable(name.to_string())),
                }
            }
            Some(_) => Err(self.syntax("expected a number, a coordinate or `(`")),
            None => Err(self.syntax("unexpected end of input")),
        }
    }

    fn uint(&mut self) -> Result<u32, CalcError> {
        self.skip_ws();
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.bump();
        }
        if self.pos == start {
            return Err(self.syntax("expected an integer"));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap()
            .parse::<u32>()
            .map_err(|_| CalcError::Syntax { position: start, message: "integer literal too large".into() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::ChartDomain;
    use crate::rat::rat;

    #[test]
    fn reads_the_reference_expression() {
        let c = ChartDomain::unit_box(&["x", "y"]);
        let p = parse_poly("1/2*(x^2 + y)", &c).unwrap();
        let x = PolyExpr::coordinate(&c, 0);
        let y = PolyExpr::coordinate(&c, 1);
        let expected = &x.pow(2).scale(&rat(1, 2)) + &y.scale(&rat(1, 2));
        assert_eq!(p, expected);
    }

    #[test]
    fn unknown_variable_is_named() {
        let c = ChartDomain::unit_box(&["x", "y"]);
        match parse_poly("x*z", &c) {
            Err(CalcError::UnknownVariable(n)) => assert_eq!(n, "z"),
            other => panic!("expected UnknownVariable, got {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let c = ChartDomain::unit_box(&["x", "y"]);
        match parse_poly("x+*y", &c) {
            Err(CalcError::Syntax { position, .. }) => assert_eq!(position, 2),
            other => panic!("expected Syntax, got {other:?}"),
        }
        assert!(parse_poly("x/(y)", &c).is_err());
        assert!(parse_poly("x/0", &c).is_err());
        assert!(parse_poly("", &c).is_err());
        assert!(parse_poly("x^-2", &c).is_err());
    }

    #[test]
    fn unary_minus_and_division_by_constants() {
        let c = ChartDomain::unit_box(&["x", "y"]);
        let p = parse_poly("-x/2 + y*3", &c).unwrap();
        let x = PolyExpr::coordinate(&c, 0);
        let y = PolyExpr::coordinate(&c, 1);
        assert_eq!(p, &x.scale(&rat(-1, 2)) + &y.scale(&rat(3, 1)));
        // `(x+y)/2` divides the whole parenthesized factor
        let q = parse_poly("(x+y)/2", &c).unwrap();
        assert_eq!(q, (&x + &y).scale(&rat(1, 2)));
    }
}
