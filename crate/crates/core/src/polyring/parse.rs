//! Text syntax for polynomials: `1 - x1^2 + 2 x1 x2`, `(x^2 - 1)^2`, ...
//!
//! Sums and differences of products; a product is a sequence of factors
//! joined by `*` or juxtaposition; a factor is a number, a variable or a
//! parenthesized expression, optionally raised to a non-negative integer
//! power. Whitespace is ignored.

use super::{MultiIndex, PolyError, Polynomial};

const MAX_EXPONENT: u32 = 64;

/// Variable names mapped to coordinates `x1..xn`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarTable {
    names: Vec<String>,
    canonical_fallback: bool,
}

impl VarTable {
    /// Canonical names `x1, ..., xn`.
    pub fn canonical(n: usize) -> Self {
        VarTable {
            names: (1..=n).map(|i| format!("x{i}")).collect(),
            canonical_fallback: false,
        }
    }

    pub fn new(names: Vec<String>) -> Self {
        VarTable {
            names,
            canonical_fallback: false,
        }
    }

    /// Also resolve the canonical names `x1..xn` next to the declared ones.
    pub fn with_canonical_fallback(mut self) -> Self {
        self.canonical_fallback = true;
        self
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn lookup(&self, name: &str) -> Option<usize> {
        if let Some(i) = self.names.iter().position(|v| v == name) {
            return Some(i);
        }
        if !self.canonical_fallback {
            return None;
        }
        let k: usize = name.strip_prefix('x')?.parse().ok()?;
        ((1..=self.n()).contains(&k) && name == format!("x{k}")).then(|| k - 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    column: usize,
}

fn err(column: usize, message: impl Into<String>) -> PolyError {
    PolyError::Parse {
        column,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Spanned>, PolyError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let simple = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push(Spanned { tok, column });
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // exponent part only when digits follow, so `2e` stays `2 * e`
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v: f64 = s
                .parse()
                .map_err(|_| err(column, format!("malformed number `{s}`")))?;
            out.push(Spanned {
                tok: Tok::Num(v),
                column,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            // letters then trailing digits: `x1x2` lexes as `x1`, `x2`
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphabetic() || chars[i] == '_') {
                i += 1;
            }
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            out.push(Spanned {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                column,
            });
            continue;
        }
        return Err(err(column, format!("unexpected character `{c}`")));
    }
    Ok(out)
}

/// All identifiers in `text` with their 1-based columns.
pub fn collect_identifiers(text: &str) -> Result<Vec<(String, usize)>, PolyError> {
    Ok(lex(text)?
        .into_iter()
        .filter_map(|s| match s.tok {
            Tok::Ident(name) => Some((name, s.column)),
            _ => None,
        })
        .collect())
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    vars: &'a VarTable,
    end_column: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn column(&self) -> usize {
        self.toks
            .get(self.pos)
            .map(|s| s.column)
            .unwrap_or(self.end_column)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|s| s.tok.clone());
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Polynomial, PolyError> {
        let mut acc = Polynomial::zero(self.vars.n());
        let mut first = true;
        loop {
            let sign = match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    1.0
                }
                Some(Tok::Minus) => {
                    self.bump();
                    -1.0
                }
                _ if first => 1.0,
                _ => break,
            };
            first = false;
            let term = self.term()?;
            acc = &acc + &term.scale(sign);
        }
        Ok(acc)
    }

    fn starts_factor(&self) -> bool {
        matches!(
            self.peek(),
            Some(Tok::Num(_)) | Some(Tok::Ident(_)) | Some(Tok::LParen)
        )
    }

    fn term(&mut self) -> Result<Polynomial, PolyError> {
        let mut acc = self.power()?;
        loop {
            if self.peek() == Some(&Tok::Star) {
                self.bump();
                let rhs = self.power()?;
                acc = &acc * &rhs;
            } else if self.starts_factor() {
                let rhs = self.power()?;
                acc = &acc * &rhs;
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<Polynomial, PolyError> {
        let base = self.primary()?;
        if self.peek() == Some(&Tok::Caret) {
            self.bump();
            let column = self.column();
            match self.bump() {
                Some(Tok::Num(v)) if v >= 0.0 && v.fract() == 0.0 && v <= MAX_EXPONENT as f64 => {
                    Ok(base.pow(v as u32))
                }
                _ => Err(err(
                    column,
                    format!("expected integer exponent in 0..={MAX_EXPONENT}"),
                )),
            }
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> Result<Polynomial, PolyError> {
        let column = self.column();
        let n = self.vars.n();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Polynomial::constant(n, v)),
            Some(Tok::Ident(name)) => match self.vars.lookup(&name) {
                Some(i) => Ok(Polynomial::monomial(MultiIndex::unit(n, i), 1.0)),
                None => Err(PolyError::UnknownVariable { name, column }),
            },
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                let close = self.column();
                match self.bump() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err(err(close, "expected `)`")),
                }
            }
            Some(Tok::Minus) => Ok(self.power()?.scale(-1.0)),
            Some(Tok::Plus) => self.power(),
            Some(_) => Err(err(column, "expected a number, variable or `(`")),
            None => Err(err(column, "unexpected end of input")),
        }
    }
}

/// Parses `text` over the variables in `vars`. Columns in errors are 1-based.
pub fn parse_polynomial(text: &str, vars: &VarTable) -> Result<Polynomial, PolyError> {
    if vars.n() == 0 {
        return Err(PolyError::ZeroDimension);
    }
    let toks = lex(text)?;
    if toks.is_empty() {
        return Err(err(1, "empty polynomial"));
    }
    let mut p = Parser {
        toks,
        pos: 0,
        vars,
        end_column: text.chars().count() + 1,
    };
    let poly = p.expr()?;
    if p.pos < p.toks.len() {
        return Err(err(p.column(), "unexpected token"));
    }
    Ok(poly)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn canon(text: &str, n: usize) -> Polynomial {
        parse_polynomial(text, &VarTable::canonical(n)).unwrap()
    }

    #[test]
    fn parses_spec_style_terms() {
        let p = canon("1 - x1^2 + 2 x1 x2", 2);
        assert_eq!(p.coeff(&MultiIndex::new(vec![0, 0])), 1.0);
        assert_eq!(p.coeff(&MultiIndex::new(vec![2, 0])), -1.0);
        assert_eq!(p.coeff(&MultiIndex::new(vec![1, 1])), 2.0);
        assert_eq!(p, canon("1-x1^2+2*x1*x2", 2));
        assert_eq!(p, canon("2x1x2 + 1 - x1 ^ 2", 2));
    }

    #[test]
    fn parses_parentheses_and_powers() {
        let p = canon("(x1^2 - 1)^2", 1);
        assert_eq!(p, canon("x1^4 - 2 x1^2 + 1", 1));
        assert_eq!(canon("-(x1 - 2)", 1), canon("2 - x1", 1));
        assert_eq!(canon("1.5e-1 x1", 1).coeff(&MultiIndex::new(vec![1])), 0.15);
    }

    #[test]
    fn aliases() {
        let vars = VarTable::new(vec!["x".into(), "y".into()]);
        let p = parse_polynomial("x*y - y^2", &vars).unwrap();
        assert_eq!(p, canon("x1 x2 - x2^2", 2));
        assert!(parse_polynomial("x1", &vars).is_err());
        let vars = vars.with_canonical_fallback();
        assert_eq!(parse_polynomial("x1 y", &vars).unwrap(), canon("x1 x2", 2));
        assert!(parse_polynomial("x3", &vars).is_err());
        assert!(parse_polynomial("x01", &vars).is_err());
    }

    #[test]
    fn errors_carry_locations() {
        let vars = VarTable::canonical(2);
        match parse_polynomial("x1 + x3", &vars) {
            Err(PolyError::UnknownVariable { name, column }) => {
                assert_eq!(name, "x3");
                assert_eq!(column, 6);
            }
            other => panic!("unexpected {other:?}"),
        }
        match parse_polynomial("x1 + ", &vars) {
            Err(PolyError::Parse { column, .. }) => assert_eq!(column, 6),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_polynomial("x1^1.5", &vars).is_err());
        assert!(parse_polynomial("(x1 + 1", &vars).is_err());
        assert!(parse_polynomial("x1 $ 2", &vars).is_err());
    }

    #[test]
    fn display_reparses() {
        let p = canon("0.1 - 3 x1^3 x2 + x2^2", 2);
        let q = canon(&p.to_string(), 2);
        assert_eq!(p, q);
    }
}
