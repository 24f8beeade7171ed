//! OpenQASM 2.0 subset reader.
//!
//! Accepted statements: the `OPENQASM 2.0;` header, `include "...";`, a
//! single `qreg`, an optional single `creg`, the gates
//! `h x z s sdg rz cx cz swap crz`, and `measure q[i] -> c[j];`. Angle
//! arguments are constant expressions over numbers and `pi`.

use thiserror::Error;

use super::{Circuit, Gate, GateKind};

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {message} (at '{token}')")]
pub struct ParseError {
    pub line: usize,
    pub token: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Str(String),
    Sym(char),
    Arrow,
}

impl Tok {
    fn text(&self) -> String {
        match self {
            Tok::Ident(s) => s.clone(),
            Tok::Num(n) => n.to_string(),
            Tok::Str(s) => format!("\"{s}\""),
            Tok::Sym(c) => c.to_string(),
            Tok::Arrow => "->".into(),
        }
    }
}

fn err(line: usize, token: impl Into<String>, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        token: token.into(),
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    let mut line = 1;
    while i < chars.len() {
        let c = chars[i];
        match c {
            '\n' => {
                line += 1;
                i += 1;
            }
            c if c.is_whitespace() => i += 1,
            '/' if chars.get(i + 1) == Some(&'/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
            }
            '/' if chars.get(i + 1) == Some(&'*') => {
                i += 2;
                while i < chars.len() && !(chars[i] == '*' && chars.get(i + 1) == Some(&'/')) {
                    if chars[i] == '\n' {
                        line += 1;
                    }
                    i += 1;
                }
                i += 2;
            }
            '-' if chars.get(i + 1) == Some(&'>') => {
                out.push((Tok::Arrow, line));
                i += 2;
            }
            '"' => {
                let start = i + 1;
                i += 1;
                while i < chars.len() && chars[i] != '"' {
                    i += 1;
                }
                if i >= chars.len() {
                    return Err(err(line, "\"", "unterminated string"));
                }
                out.push((Tok::Str(chars[start..i].iter().collect()), line));
                i += 1;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push((Tok::Ident(chars[start..i].iter().collect()), line));
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    i += 1;
                    if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                        i += 1;
                    }
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                let s: String = chars[start..i].iter().collect();
                let n = s
                    .parse::<f64>()
                    .map_err(|_| err(line, s.clone(), "malformed number"))?;
                out.push((Tok::Num(n), line));
            }
            ';' | ',' | '[' | ']' | '(' | ')' | '+' | '-' | '*' | '/' | '{' | '}' | '=' | '>' | '^' => {
                out.push((Tok::Sym(c), line));
                i += 1;
            }
            other => return Err(err(line, other.to_string(), "unexpected character")),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    qreg: Option<(String, usize)>,
    creg: Option<(String, usize)>,
    gates: Vec<Gate>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn line(&self) -> usize {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map_or(1, |(_, l)| *l)
    }

    fn next(&mut self) -> Result<Tok, ParseError> {
        let line = self.line();
        let t = self
            .toks
            .get(self.pos)
            .map(|(t, _)| t.clone())
            .ok_or_else(|| err(line, "<eof>", "unexpected end of input"))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect_sym(&mut self, c: char) -> Result<(), ParseError> {
        let line = self.line();
        match self.next()? {
            Tok::Sym(s) if s == c => Ok(()),
            t => Err(err(line, t.text(), format!("expected '{c}'"))),
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        let line = self.line();
        match self.next()? {
            Tok::Ident(s) => Ok(s),
            t => Err(err(line, t.text(), "expected identifier")),
        }
    }

    fn index(&mut self) -> Result<usize, ParseError> {
        let line = self.line();
        match self.next()? {
            Tok::Num(n) if n >= 0.0 && n.fract() == 0.0 => Ok(n as usize),
            t => Err(err(line, t.text(), "expected non-negative integer")),
        }
    }

    fn reg_ref(&mut self, creg: bool) -> Result<usize, ParseError> {
        let line = self.line();
        let name = self.ident()?;
        let reg = if creg { &self.creg } else { &self.qreg };
        let (reg_name, size) = reg
            .clone()
            .ok_or_else(|| err(line, name.clone(), "register used before declaration"))?;
        if name != reg_name {
            return Err(err(line, name, "unknown register"));
        }
        if self.peek() != Some(&Tok::Sym('[')) {
            return Err(err(line, name, "register broadcasting is not supported"));
        }
        self.expect_sym('[')?;
        let idx = self.index()?;
        self.expect_sym(']')?;
        if idx >= size {
            return Err(err(line, format!("{name}[{idx}]"), "index out of range"));
        }
        Ok(idx)
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<f64, ParseError> {
        let mut v = self.term()?;
        while let Some(Tok::Sym(c @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            v = if c == '+' { v + rhs } else { v - rhs };
        }
        Ok(v)
    }

    fn term(&mut self) -> Result<f64, ParseError> {
        let mut v = self.factor()?;
        while let Some(Tok::Sym(c @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.factor()?;
            v = if c == '*' { v * rhs } else { v / rhs };
        }
        Ok(v)
    }

    fn factor(&mut self) -> Result<f64, ParseError> {
        let line = self.line();
        match self.next()? {
            Tok::Num(n) => Ok(n),
            Tok::Ident(s) if s == "pi" => Ok(std::f64::consts::PI),
            Tok::Sym('-') => Ok(-self.factor()?),
            Tok::Sym('+') => self.factor(),
            Tok::Sym('(') => {
                let v = self.expr()?;
                self.expect_sym(')')?;
                Ok(v)
            }
            t => Err(err(line, t.text(), "expected expression")),
        }
    }

    fn statement(&mut self) -> Result<(), ParseError> {
        let line = self.line();
        let word = self.ident()?;
        match word.as_str() {
            "OPENQASM" => {
                let v = self.next()?;
                if v != Tok::Num(2.0) {
                    return Err(err(line, v.text(), "only OPENQASM 2.0 is supported"));
                }
            }
            "include" => match self.next()? {
                Tok::Str(_) => {}
                t => return Err(err(line, t.text(), "expected file name")),
            },
            "qreg" | "creg" => {
                let name = self.ident()?;
                self.expect_sym('[')?;
                let size = self.index()?;
                self.expect_sym(']')?;
                let slot = if word == "qreg" { &mut self.qreg } else { &mut self.creg };
                if slot.is_some() {
                    return Err(err(line, name, format!("only one {word} is supported")));
                }
                *slot = Some((name, size));
            }
            "measure" => {
                let q = self.reg_ref(false)?;
                let l = self.line();
                if self.next()? != Tok::Arrow {
                    return Err(err(l, "measure", "expected '->'"));
                }
                let c = self.reg_ref(true)?;
                self.gates.push(Gate::measure(q, c));
            }
            "h" | "x" | "z" | "s" | "sdg" | "rz" | "cx" | "cz" | "swap" | "crz" => {
                let angle = if matches!(word.as_str(), "rz" | "crz") {
                    self.expect_sym('(')?;
                    let a = self.expr()?;
                    self.expect_sym(')')?;
                    Some(a)
                } else {
                    None
                };
                let kind = GateKind::from_name(&word, angle).expect("listed gate names are known");
                let mut qubits = vec![self.reg_ref(false)?];
                while self.peek() == Some(&Tok::Sym(',')) {
                    self.pos += 1;
                    qubits.push(self.reg_ref(false)?);
                }
                if qubits.len() != kind.arity() {
                    return Err(err(
                        line,
                        word,
                        format!("expects {} qubit argument(s)", kind.arity()),
                    ));
                }
                if qubits.len() == 2 && qubits[0] == qubits[1] {
                    return Err(err(line, word, "repeated qubit argument"));
                }
                self.gates.push(Gate::new(kind, &qubits));
            }
            "ccx" | "cswap" => {
                return Err(err(line, word, "gates on more than two qubits are not supported"))
            }
            _ => return Err(err(line, word, "unsupported statement")),
        }
        self.expect_sym(';')
    }
}

pub fn parse_qasm2_subset(text: &str) -> Result<Circuit, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        qreg: None,
        creg: None,
        gates: Vec::new(),
    };
    match p.toks.first() {
        Some((Tok::Ident(s), _)) if s == "OPENQASM" => {}
        Some((t, l)) => return Err(err(*l, t.text(), "missing OPENQASM 2.0 header")),
        None => return Err(err(1, "<eof>", "empty input")),
    }
    while p.pos < p.toks.len() {
        p.statement()?;
    }
    let (_, nq) = p
        .qreg
        .clone()
        .ok_or_else(|| err(p.line(), "<eof>", "no qreg declared"))?;
    let nc = p.creg.as_ref().map_or(0, |(_, n)| *n);
    let line = p.line();
    Circuit::from_gates(nq, nc, p.gates).map_err(|e| err(line, "<circuit>", e.to_string()))
}
