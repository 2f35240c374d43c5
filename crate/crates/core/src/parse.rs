//! Recursive-descent parser for the text syntax.
//!
//! ```text
//! formula := iff
//! iff     := impl ('<->' impl)*
//! impl    := or ('->' impl)?
//! or      := and ('|' and)*
//! and     := neg ('&' neg)*
//! neg     := ('-' | 'not') neg | quant | atom | '0' | '1' | '(' formula ')'
//! quant   := ('forall' | 'exists' | 'all') ident '.'? formula
//! atom    := ident '(' term (',' term)* ')' | term '=' term | ident
//! ```
//!
//! `and`, `or` and the glyphs `∀ ∃ ¬ ∧ ∨ → ↔` (plus `~`) are accepted as aliases.
//! An argument is a variable when a quantifier in scope binds its name and a
//! constant otherwise.

use std::fmt;

use crate::formula::{Formula, Term, EQUALITY};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct SyntaxError {
    /// Byte offset of the offending token.
    pub offset: usize,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "syntax error at byte {}: expected {}, found {}",
            self.offset,
            self.expected.join(" or "),
            self.found
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    Comma,
    Dot,
    Not,
    And,
    Or,
    Implies,
    Iff,
    Eq,
    True,
    False,
    Forall,
    Exists,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::End => "end of input".into(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::Not => "-",
            Tok::And => "&",
            Tok::Or => "|",
            Tok::Implies => "->",
            Tok::Iff => "<->",
            Tok::Eq => "=",
            Tok::True => "1",
            Tok::False => "0",
            Tok::Forall => "forall",
            Tok::Exists => "exists",
            Tok::Ident(_) | Tok::End => "",
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, SyntaxError> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(i, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let mut end = i;
            while let Some(&(j, d)) = chars.peek() {
                if d.is_ascii_alphanumeric() || d == '_' {
                    end = j + d.len_utf8();
                    chars.next();
                } else {
                    break;
                }
            }
            let word = &text[i..end];
            let tok = match word {
                "forall" | "all" => Tok::Forall,
                "exists" => Tok::Exists,
                "not" => Tok::Not,
                "and" => Tok::And,
                "or" => Tok::Or,
                _ => Tok::Ident(word.to_string()),
            };
            out.push((tok, i));
            continue;
        }
        chars.next();
        let rest = &text[i..];
        let tok = match c {
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            '&' | '∧' => Tok::And,
            '|' | '∨' => Tok::Or,
            '=' => Tok::Eq,
            '~' | '¬' => Tok::Not,
            '→' => Tok::Implies,
            '↔' => Tok::Iff,
            '∀' => Tok::Forall,
            '∃' => Tok::Exists,
            '0' | '1' => {
                if matches!(chars.peek(), Some(&(_, d)) if d.is_ascii_alphanumeric() || d == '_') {
                    return Err(unexpected_char(i, rest));
                }
                if c == '1' {
                    Tok::True
                } else {
                    Tok::False
                }
            }
            '-' => {
                if rest.starts_with("->") {
                    chars.next();
                    Tok::Implies
                } else {
                    Tok::Not
                }
            }
            '<' if rest.starts_with("<->") => {
                chars.next();
                chars.next();
                Tok::Iff
            }
            _ => return Err(unexpected_char(i, rest)),
        };
        out.push((tok, i));
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

fn unexpected_char(offset: usize, rest: &str) -> SyntaxError {
    let c = rest.chars().next().unwrap_or(' ');
    SyntaxError {
        offset,
        expected: vec!["token".into()],
        found: format!("character `{c}`"),
    }
}

struct Parser<'a> {
    toks: &'a [(Tok, usize)],
    pos: usize,
    scope: Vec<String>,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> SyntaxError {
        let (tok, offset) = &self.toks[self.pos];
        SyntaxError {
            offset: *offset,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: tok.describe(),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), SyntaxError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[&format!("`{}`", tok.symbol())]))
        }
    }

    fn ident(&mut self) -> Result<String, SyntaxError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn formula(&mut self) -> Result<Formula, SyntaxError> {
        let mut left = self.implication()?;
        while *self.peek() == Tok::Iff {
            self.bump();
            let right = self.implication()?;
            left = Formula::iff(left, right);
        }
        Ok(left)
    }

    fn implication(&mut self) -> Result<Formula, SyntaxError> {
        let left = self.disjunction()?;
        if *self.peek() == Tok::Implies {
            self.bump();
            let right = self.implication()?;
            return Ok(Formula::implies(left, right));
        }
        Ok(left)
    }

    fn disjunction(&mut self) -> Result<Formula, SyntaxError> {
        let mut parts = vec![self.conjunction()?];
        while *self.peek() == Tok::Or {
            self.bump();
            parts.push(self.conjunction()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::Or(parts) })
    }

    fn conjunction(&mut self) -> Result<Formula, SyntaxError> {
        let mut parts = vec![self.unary()?];
        while *self.peek() == Tok::And {
            self.bump();
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::And(parts) })
    }

    fn unary(&mut self) -> Result<Formula, SyntaxError> {
        match self.peek().clone() {
            Tok::Not => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::Forall | Tok::Exists => {
                let q = self.bump();
                let var = self.ident()?;
                if *self.peek() == Tok::Dot {
                    self.bump();
                }
                self.scope.push(var.clone());
                let body = self.formula();
                self.scope.pop();
                let body = body?;
                Ok(if q == Tok::Forall {
                    Formula::forall(var, body)
                } else {
                    Formula::exists(var, body)
                })
            }
            Tok::True => {
                self.bump();
                Ok(Formula::Bool(true))
            }
            Tok::False => {
                self.bump();
                Ok(Formula::Bool(false))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if *self.peek_at(1) == Tok::Eq {
                    let left = self.term()?;
                    self.bump();
                    let right = self.term()?;
                    return Ok(Formula::atom(EQUALITY, vec![left, right]));
                }
                self.bump();
                let mut args = Vec::new();
                if *self.peek() == Tok::LParen {
                    self.bump();
                    args.push(self.term()?);
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        args.push(self.term()?);
                    }
                    if *self.peek() != Tok::RParen {
                        return Err(self.error(&["`,`", "`)`"]));
                    }
                    self.bump();
                }
                Ok(Formula::atom(name, args))
            }
            _ => Err(self.error(&["`-`", "quantifier", "identifier", "`0`", "`1`", "`(`"])),
        }
    }

    fn term(&mut self) -> Result<Term, SyntaxError> {
        let name = self.ident()?;
        Ok(if self.scope.contains(&name) {
            Term::Var(name)
        } else {
            Term::Const(name)
        })
    }
}

/// Parses a closed-world formula: unbound argument names become constants.
pub fn parse_formula(text: &str) -> Result<Formula, SyntaxError> {
    parse_formula_with_vars(text, &[])
}

/// Parses with `free` treated as variables bound by an invisible outer context.
pub fn parse_formula_with_vars(text: &str, free: &[&str]) -> Result<Formula, SyntaxError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks: &toks,
        pos: 0,
        scope: free.iter().map(|s| s.to_string()).collect(),
    };
    let f = p.formula()?;
    if *p.peek() != Tok::End {
        return Err(p.error(&["connective", "end of input"]));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::Term;

    fn c(n: &str) -> Term {
        Term::constant(n)
    }
    fn v(n: &str) -> Term {
        Term::var(n)
    }

    #[test]
    fn residency_premise() {
        let f = parse_formula("forall x. (ResidentOf(x, lawtonPark) -> UseZipCode(x, num98199))")
            .unwrap();
        let expected = Formula::forall(
            "x",
            Formula::implies(
                Formula::atom("ResidentOf", vec![v("x"), c("lawtonPark")]),
                Formula::atom("UseZipCode", vec![v("x"), c("num98199")]),
            ),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn simple_atoms_and_negations() {
        assert_eq!(parse_formula("P(a)").unwrap(), Formula::atom("P", vec![c("a")]));
        assert_eq!(
            parse_formula("--Orange(Stanley)").unwrap(),
            Formula::not(Formula::not(Formula::atom("Orange", vec![c("Stanley")])))
        );
        assert_eq!(parse_formula("Rain").unwrap(), Formula::atom("Rain", vec![]));
        assert_eq!(
            parse_formula("a = b").unwrap(),
            Formula::atom("Eq", vec![c("a"), c("b")])
        );
    }

    #[test]
    fn precedence_and_associativity() {
        let f = parse_formula("A & B | C -> D -> E <-> F").unwrap();
        let a = || Formula::atom("A", vec![]);
        let at = |n: &str| Formula::atom(n, vec![]);
        let expected = Formula::iff(
            Formula::implies(
                Formula::or(vec![Formula::and(vec![a(), at("B")]), at("C")]),
                Formula::implies(at("D"), at("E")),
            ),
            at("F"),
        );
        assert_eq!(f, expected);
        let g = parse_formula("A & B & C").unwrap();
        assert_eq!(g, Formula::and(vec![a(), at("B"), at("C")]));
    }

    #[test]
    fn quantifier_body_extends_right() {
        let f = parse_formula("forall x. P(x) & Q(x)").unwrap();
        assert_eq!(
            f,
            Formula::forall(
                "x",
                Formula::and(vec![
                    Formula::atom("P", vec![v("x")]),
                    Formula::atom("Q", vec![v("x")])
                ])
            )
        );
        let g = parse_formula("(forall x. P(x)) & Q(x)").unwrap();
        assert_eq!(
            g,
            Formula::and(vec![
                Formula::forall("x", Formula::atom("P", vec![v("x")])),
                Formula::atom("Q", vec![c("x")])
            ])
        );
    }

    #[test]
    fn aliases_and_glyphs() {
        let a = parse_formula("all x. (Bitter(x) -> -Dull(x))").unwrap();
        let b = parse_formula("∀x (Bitter(x) → ¬Dull(x))").unwrap();
        let d = parse_formula("forall x. (not Bitter(x) or not Dull(x) and 1)").unwrap();
        assert_eq!(a, b);
        assert!(matches!(d, Formula::Forall(..)));
        assert_eq!(parse_formula("P(a) & 1 | 0").unwrap().size(), 5);
    }

    #[test]
    fn errors_report_offset_and_expectation() {
        let e = parse_formula("P(a) &").unwrap_err();
        assert_eq!(e.offset, 6);
        assert!(e.found.contains("end of input"));
        let e = parse_formula("P(a b)").unwrap_err();
        assert_eq!(e.offset, 4);
        assert!(e.expected.iter().any(|x| x.contains(')')));
        let e = parse_formula("P(a) Q(b)").unwrap_err();
        assert_eq!(e.offset, 5);
        assert!(parse_formula("P(a) $").is_err());
        assert!(parse_formula("(P(a)").is_err());
        assert!(parse_formula("").is_err());
    }

    #[test]
    fn free_variable_context() {
        let f = parse_formula_with_vars("P(x, a)", &["x"]).unwrap();
        assert_eq!(f, Formula::atom("P", vec![v("x"), c("a")]));
    }
}
