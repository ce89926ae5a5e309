//! Line-oriented text format:
//!
//! ```text
//! # comment
//! states: s, t
//! atoms: p, q
//! label t = {p}
//! s -[>0,-1]-> s
//! s -[=0,+1]-> t
//! ```

use std::fmt::Write as _;

use super::{Effect, Guard, Oca, OcaBuilder, OcaError};

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
#[error("line {line}, column {col}: {msg}")]
pub struct DslError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn err(&self, msg: impl Into<String>) -> DslError {
        DslError { line: self.line, col: self.pos + 1, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.text[self.pos..].starts_with([' ', '\t']) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip_ws();
        if self.text[self.pos..].starts_with(tok) {
            self.pos += tok.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: &str) -> Result<(), DslError> {
        if self.eat(tok) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{tok}`")))
        }
    }

    fn ident(&mut self) -> Result<&'a str, DslError> {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let len = rest
            .char_indices()
            .take_while(|&(i, c)| c == '_' || c.is_ascii_alphabetic() || (i > 0 && c.is_ascii_digit()))
            .count();
        if len == 0 {
            return Err(self.err("expected identifier"));
        }
        self.pos += len;
        Ok(&rest[..len])
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.text.len()
    }

    fn finish(&mut self) -> Result<(), DslError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.err("unexpected trailing input"))
        }
    }

    fn ident_list(&mut self) -> Result<Vec<&'a str>, DslError> {
        let mut out = Vec::new();
        if self.at_end() || self.text[self.pos..].starts_with('}') {
            return Ok(out);
        }
        loop {
            out.push(self.ident()?);
            if !self.eat(",") {
                return Ok(out);
            }
        }
    }
}

fn wrap(c: &Cursor<'_>, e: OcaError) -> DslError {
    c.err(e.to_string())
}

pub(super) fn parse(text: &str) -> Result<Oca, OcaError> {
    let mut b = OcaBuilder::default();
    for (idx, raw) in text.lines().enumerate() {
        let body = raw.split('#').next().unwrap_or("");
        let mut c = Cursor { text: body, pos: 0, line: idx + 1 };
        if c.at_end() {
            continue;
        }
        c.pos = 0;
        parse_line(&mut c, &mut b)?;
    }
    if b.states.is_empty() {
        return Err(DslError { line: 1, col: 1, msg: "no `states:` declaration".into() }.into());
    }
    b.build()
}

fn parse_line(c: &mut Cursor<'_>, b: &mut OcaBuilder) -> Result<(), DslError> {
    let save = c.pos;
    let head = c.ident()?;
    match head {
        "states" | "atoms" if c.eat(":") => {
            for name in c.ident_list()? {
                let r = if head == "states" { b.state(name) } else { b.atom(name) };
                r.map_err(|e| wrap(c, e))?;
            }
            c.finish()
        }
        "label" if !c.text[c.pos..].trim_start().starts_with('-') => {
            let state = c.ident()?;
            c.expect("=")?;
            c.expect("{")?;
            let atoms = c.ident_list()?;
            c.expect("}")?;
            c.finish()?;
            for a in atoms {
                b.label(state, a).map_err(|e| wrap(c, e))?;
            }
            Ok(())
        }
        _ => {
            c.pos = save;
            let src = c.ident()?;
            c.expect("-[")?;
            let guard = if c.eat(">0") {
                Guard::Pos
            } else if c.eat("=0") {
                Guard::Zero
            } else {
                return Err(c.err("expected guard `>0` or `=0`"));
            };
            c.expect(",")?;
            let effect = if c.eat("-1") {
                Effect::Dec
            } else if c.eat("+1") || c.eat("1") {
                Effect::Inc
            } else if c.eat("0") {
                Effect::Keep
            } else {
                return Err(c.err("expected effect `-1`, `0` or `+1`"));
            };
            c.expect("]->")?;
            let dst = c.ident()?;
            c.finish()?;
            b.transition(src, guard, effect, dst).map_err(|e| wrap(c, e))?;
            Ok(())
        }
    }
}

pub(super) fn render(oca: &Oca) -> String {
    let mut out = String::new();
    writeln!(out, "states: {}", oca.state_names.join(", ")).unwrap();
    if !oca.atom_names.is_empty() {
        writeln!(out, "atoms: {}", oca.atom_names.join(", ")).unwrap();
    }
    for s in 0..oca.num_states() {
        if oca.labels[s].is_empty() {
            continue;
        }
        let atoms: Vec<&str> = oca.labels[s].iter().map(|&a| oca.atom_names[a].as_str()).collect();
        writeln!(out, "label {} = {{{}}}", oca.state_names[s], atoms.join(", ")).unwrap();
    }
    for t in &oca.transitions {
        writeln!(out, "{} -[{},{}]-> {}", oca.state_names[t.src], t.guard, t.effect, oca.state_names[t.dst]).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oca::random::{random_oca, RandomOcaParams};
    use proptest::prelude::*;

    #[test]
    fn parses_all_line_kinds() {
        let oca = parse(
            "# demo\nstates: s, t  # two\natoms: p, q\nlabel t = {p, q}\nlabel s = {}\n\
             s -[>0,-1]-> s\ns -[=0,+1]-> t\nt -[ >0 , 0 ]-> t\nt -[=0,0]-> t\n",
        )
        .unwrap();
        assert_eq!(oca.num_states(), 2);
        assert_eq!(oca.transitions().len(), 4);
        assert!(oca.has_label(1, 0) && oca.has_label(1, 1));
        assert!(oca.validate().is_empty());
    }

    #[test]
    fn a_state_may_be_called_label() {
        let oca = parse("states: label\nlabel -[>0,0]-> label\nlabel -[=0,0]-> label\n").unwrap();
        assert_eq!(oca.transitions().len(), 2);
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse("states: s\ns -[>1,0]-> s\n").unwrap_err();
        match e {
            OcaError::Dsl(d) => {
                assert_eq!(d.line, 2);
                assert_eq!(d.col, 5);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("states: s\ns -[>0,0]-> x\n"), Err(OcaError::Dsl(_))));
        assert!(matches!(parse("atoms: p\n"), Err(OcaError::Dsl(_))));
    }

    proptest! {
        #[test]
        fn render_then_parse_is_identity(seed in 0u64..500, n in 1usize..6) {
            let oca = random_oca(&RandomOcaParams { states: n, atoms: 2, extra_transitions: 4, seed });
            prop_assert_eq!(parse(&render(&oca)).unwrap(), oca);
        }
    }
}
