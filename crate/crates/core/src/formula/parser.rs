//! Recursive-descent parser for the concrete formula syntax.
//!
//! Precedence from tightest: unary operators, `&`, `|`, then the
//! right-associative `UA`/`UE`. `E φ U ψ` and `A φ U ψ` are mixfix with both
//! operands at `|` level.

use std::collections::BTreeSet;
use std::fmt;

use super::Formula;

const KEYWORDS: &[&str] =
    &["true", "false", "E", "A", "U", "EX", "AX", "EF", "AF", "EG", "AG", "FA", "FE", "GA", "GE", "UA", "UE"];

const UNARY: &[&str] = &["EX", "AX", "EF", "AF", "EG", "AG", "FA", "FE", "GA", "GE"];

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Kw(&'static str),
    Sym(char),
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Kw(k) => write!(f, "`{k}`"),
            Tok::Sym(c) => write!(f, "`{c}`"),
            Tok::End => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
#[error("syntax error at line {line}, column {col}: found {found}, expected one of {}", .expected.join(", "))]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub found: String,
    /// Sorted, human-readable token names.
    pub expected: Vec<String>,
}

struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let (mut line, mut col) = (1usize, 1usize);
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            col += 1;
            i += 1;
            continue;
        }
        let (l0, c0) = (line, col);
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = match KEYWORDS.iter().find(|&&k| k == word) {
                Some(k) => Tok::Kw(k),
                None => Tok::Ident(word),
            };
            out.push(Spanned { tok, line: l0, col: c0 });
            continue;
        }
        if "()!&|".contains(c) {
            out.push(Spanned { tok: Tok::Sym(c), line: l0, col: c0 });
            i += 1;
            col += 1;
            continue;
        }
        return Err(ParseError {
            line,
            col,
            found: format!("character `{c}`"),
            expected: vec!["formula token".into()],
        });
    }
    out.push(Spanned { tok: Tok::End, line, col });
    Ok(out)
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    expected: BTreeSet<String>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn bump(&mut self) -> Tok {
        self.expected.clear();
        let t = self.toks[self.pos].tok.clone();
        if t != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn check_kw(&mut self, kw: &'static str) -> bool {
        if *self.peek() == Tok::Kw(kw) {
            true
        } else {
            self.expected.insert(format!("`{kw}`"));
            false
        }
    }

    fn check_sym(&mut self, c: char) -> bool {
        if *self.peek() == Tok::Sym(c) {
            true
        } else {
            self.expected.insert(format!("`{c}`"));
            false
        }
    }

    fn error(&self) -> ParseError {
        let s = &self.toks[self.pos];
        ParseError {
            line: s.line,
            col: s.col,
            found: s.tok.to_string(),
            expected: self.expected.iter().cloned().collect(),
        }
    }

    /// `or ((UA | UE) sync)?`
    fn sync(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if self.check_kw("UA") {
            self.bump();
            return Ok(Formula::ua(lhs, self.sync()?));
        }
        if self.check_kw("UE") {
            self.bump();
            return Ok(Formula::ue(lhs, self.sync()?));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while self.check_sym('|') {
            self.bump();
            lhs = Formula::or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while self.check_sym('&') {
            self.bump();
            lhs = Formula::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if self.check_sym('!') {
            self.bump();
            return Ok(Formula::negate(self.unary()?));
        }
        for &op in UNARY {
            if self.check_kw(op) {
                self.bump();
                let f = self.unary()?;
                return Ok(match op {
                    "EX" => Formula::ex(f),
                    "AX" => Formula::ax(f),
                    "EF" => Formula::ef(f),
                    "AF" => Formula::af(f),
                    "EG" => Formula::eg(f),
                    "AG" => Formula::ag(f),
                    "FA" => Formula::fa(f),
                    "FE" => Formula::fe(f),
                    "GA" => Formula::ga(f),
                    _ => Formula::ge(f),
                });
            }
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        if self.check_kw("true") {
            self.bump();
            return Ok(Formula::True);
        }
        if self.check_kw("false") {
            self.bump();
            return Ok(Formula::falsum());
        }
        for (kw, exists) in [("E", true), ("A", false)] {
            if self.check_kw(kw) {
                self.bump();
                let lhs = self.or()?;
                if !self.check_kw("U") {
                    return Err(self.error());
                }
                self.bump();
                let rhs = self.or()?;
                return Ok(if exists { Formula::eu(lhs, rhs) } else { Formula::au(lhs, rhs) });
            }
        }
        if self.check_sym('(') {
            self.bump();
            let f = self.sync()?;
            if !self.check_sym(')') {
                return Err(self.error());
            }
            self.bump();
            return Ok(f);
        }
        if let Tok::Ident(name) = self.peek().clone() {
            self.bump();
            return Ok(Formula::Atom(name));
        }
        self.expected.insert("identifier".into());
        Err(self.error())
    }
}

/// Parses a formula, expanding derived operators.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0, expected: BTreeSet::new() };
    let f = p.sync()?;
    if *p.peek() != Tok::End {
        p.expected.insert("end of input".into());
        return Err(p.error());
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(n: &str) -> Formula {
        Formula::atom(n)
    }

    #[test]
    fn core_productions() {
        assert_eq!(parse("A true U black").unwrap(), Formula::au(Formula::True, a("black")));
        assert_eq!(parse("FA black").unwrap(), Formula::ua(Formula::True, a("black")));
        assert_eq!(parse("white UE stripes").unwrap(), Formula::ue(a("white"), a("stripes")));
        assert_eq!(parse("false").unwrap(), Formula::negate(Formula::True));
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(parse("!p & q | r").unwrap(), Formula::or(Formula::and(Formula::negate(a("p")), a("q")), a("r")));
        assert_eq!(
            parse("p & q UA r | s").unwrap(),
            Formula::ua(Formula::and(a("p"), a("q")), Formula::or(a("r"), a("s")))
        );
        assert_eq!(parse("p UA q UE r").unwrap(), Formula::ua(a("p"), Formula::ue(a("q"), a("r"))));
        assert_eq!(parse("EX p & (q UA p)").unwrap(), Formula::and(Formula::ex(a("p")), Formula::ua(a("q"), a("p"))));
        assert_eq!(parse("E p U q & r").unwrap(), Formula::eu(a("p"), Formula::and(a("q"), a("r"))));
    }

    #[test]
    fn sugar_expands() {
        assert_eq!(parse("AF AG p").unwrap(), Formula::af(Formula::ag(a("p"))));
        assert_eq!(parse("GA p").unwrap(), Formula::negate(Formula::fe(Formula::negate(a("p")))));
        assert_eq!(parse("GE p").unwrap(), Formula::negate(Formula::fa(Formula::negate(a("p")))));
        assert_eq!(parse("AX p").unwrap(), Formula::negate(Formula::ex(Formula::negate(a("p")))));
        assert_eq!(parse("EG p").unwrap(), Formula::negate(Formula::af(Formula::negate(a("p")))));
    }

    #[test]
    fn pretty_printing() {
        assert_eq!(parse("E a U b").unwrap().to_string(), "(E a U b)");
        assert_eq!(parse("a & b").unwrap().to_string(), "(a & b)");
        assert_eq!(parse("FA x").unwrap().to_string(), "(true UA x)");
    }

    #[test]
    fn errors_report_position_and_expected_tokens() {
        let e = parse("p &\n  & q").unwrap_err();
        assert_eq!((e.line, e.col), (2, 3));
        assert!(e.expected.contains(&"identifier".to_string()));
        assert!(e.expected.contains(&"`(`".to_string()));

        let e = parse("E p q").unwrap_err();
        assert_eq!((e.line, e.col), (1, 5));
        assert!(e.expected.contains(&"`U`".to_string()));
        assert!(e.expected.contains(&"`&`".to_string()));

        let e = parse("(p").unwrap_err();
        assert!(e.expected.contains(&"`)`".to_string()));

        let e = parse("p q").unwrap_err();
        assert!(e.expected.contains(&"end of input".to_string()));
        assert!(e.expected.contains(&"`UA`".to_string()));

        assert!(parse("p $ q").is_err());
        assert!(parse("UA").is_err());
    }
}
