//! Parser for the supported OpenQASM 2.0 subset.
//!
//! Anything outside the subset is a hard error. Measurements are recorded
//! only to reject later gates on measured qubits; barriers are dropped.

use crate::error::{ParseError, SourcePos};

/// Gates of the supported standard set, on flattened qubit indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RawGate {
    U3(usize, f64, f64, f64),
    U2(usize, f64, f64),
    U1(usize, f64),
    P(usize, f64),
    Rx(usize, f64),
    Ry(usize, f64),
    Rz(usize, f64),
    X(usize),
    Y(usize),
    Z(usize),
    H(usize),
    S(usize),
    Sdg(usize),
    T(usize),
    Tdg(usize),
    Cx(usize, usize),
    Cz(usize, usize),
    Swap(usize, usize),
    Ccx(usize, usize, usize),
}

impl RawGate {
    pub fn qubits(&self) -> Vec<usize> {
        use RawGate::*;
        match *self {
            U3(q, ..) | U2(q, ..) | U1(q, _) | P(q, _) | Rx(q, _) | Ry(q, _) | Rz(q, _) | X(q)
            | Y(q) | Z(q) | H(q) | S(q) | Sdg(q) | T(q) | Tdg(q) => vec![q],
            Cx(a, b) | Cz(a, b) | Swap(a, b) => vec![a, b],
            Ccx(a, b, c) => vec![a, b, c],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawCircuit {
    pub num_qubits: usize,
    pub gates: Vec<RawGate>,
    pub source_name: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Real(f64),
    Int(u64),
    Str(String),
    Sym(char),
    Arrow,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    pos: SourcePos,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, c: char| {
        *i += 1;
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let pos = SourcePos { line, col };
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, c);
        } else if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                let ch = chars[i];
                advance(&mut i, &mut line, &mut col, ch);
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                let ch = chars[i];
                advance(&mut i, &mut line, &mut col, ch);
            }
            out.push(Token {
                tok: Tok::Ident(s),
                pos,
            });
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let mut s = String::new();
            let mut real = false;
            while i < chars.len() {
                let d = chars[i];
                let exp_sign = (d == '+' || d == '-') && matches!(s.chars().last(), Some('e' | 'E'));
                if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign {
                    real |= !d.is_ascii_digit();
                    s.push(d);
                    advance(&mut i, &mut line, &mut col, d);
                } else {
                    break;
                }
            }
            let tok = if real {
                Tok::Real(s.parse().map_err(|_| ParseError::Syntax {
                    pos,
                    msg: format!("malformed number `{s}`"),
                })?)
            } else {
                Tok::Int(s.parse().map_err(|_| ParseError::Syntax {
                    pos,
                    msg: format!("malformed integer `{s}`"),
                })?)
            };
            out.push(Token { tok, pos });
        } else if c == '"' {
            advance(&mut i, &mut line, &mut col, c);
            let mut s = String::new();
            while i < chars.len() && chars[i] != '"' {
                s.push(chars[i]);
                let ch = chars[i];
                advance(&mut i, &mut line, &mut col, ch);
            }
            if i == chars.len() {
                return Err(ParseError::Syntax {
                    pos,
                    msg: "unterminated string".into(),
                });
            }
            advance(&mut i, &mut line, &mut col, '"');
            out.push(Token {
                tok: Tok::Str(s),
                pos,
            });
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            advance(&mut i, &mut line, &mut col, c);
            advance(&mut i, &mut line, &mut col, '>');
            out.push(Token {
                tok: Tok::Arrow,
                pos,
            });
        } else if "[](),;+-*/^{}=<>!".contains(c) {
            advance(&mut i, &mut line, &mut col, c);
            out.push(Token {
                tok: Tok::Sym(c),
                pos,
            });
        } else {
            return Err(ParseError::Syntax {
                pos,
                msg: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
struct Register {
    name: String,
    offset: usize,
    size: usize,
}

/// A gate argument: a whole register or one element of it.
#[derive(Debug, Clone)]
enum Arg {
    Whole(usize),
    Index(usize, usize),
}

struct Parser {
    toks: Vec<Token>,
    i: usize,
    eof: SourcePos,
    qregs: Vec<Register>,
    cregs: Vec<Register>,
    measured: Vec<bool>,
    gates: Vec<RawGate>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.i).map(|t| &t.tok)
    }

    fn pos(&self) -> SourcePos {
        self.toks.get(self.i).map(|t| t.pos).unwrap_or(self.eof)
    }

    fn syntax<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.i).map(|t| t.tok.clone());
        self.i += 1;
        t
    }

    fn expect_sym(&mut self, c: char) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Sym(s)) if *s == c => {
                self.i += 1;
                Ok(())
            }
            _ => self.syntax(format!("expected `{c}`")),
        }
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(s)) if *s == c) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.i += 1;
                Ok(s)
            }
            _ => self.syntax("expected identifier"),
        }
    }

    fn int(&mut self) -> Result<usize, ParseError> {
        match self.peek() {
            Some(Tok::Int(n)) => {
                let n = *n as usize;
                self.i += 1;
                Ok(n)
            }
            _ => self.syntax("expected integer"),
        }
    }

    fn program(&mut self) -> Result<(), ParseError> {
        if matches!(self.peek(), Some(Tok::Ident(s)) if s == "OPENQASM") {
            self.i += 1;
            let pos = self.pos();
            match self.next() {
                Some(Tok::Real(v)) if (v - 2.0).abs() < 1e-12 => {}
                _ => {
                    return Err(ParseError::Unsupported {
                        pos,
                        what: "OPENQASM version other than 2.0".into(),
                    })
                }
            }
            self.expect_sym(';')?;
        }
        while self.peek().is_some() {
            self.statement()?;
        }
        Ok(())
    }

    fn statement(&mut self) -> Result<(), ParseError> {
        let pos = self.pos();
        let name = self.ident()?;
        match name.as_str() {
            "include" => {
                match self.next() {
                    Some(Tok::Str(_)) => {}
                    _ => return self.syntax("expected file name after include"),
                }
                self.expect_sym(';')
            }
            "qreg" | "creg" => {
                let reg = self.ident()?;
                self.expect_sym('[')?;
                let size = self.int()?;
                self.expect_sym(']')?;
                self.expect_sym(';')?;
                let regs = if name == "qreg" { &mut self.qregs } else { &mut self.cregs };
                if regs.iter().any(|r| r.name == reg) {
                    return Err(ParseError::Syntax {
                        pos,
                        msg: format!("register `{reg}` redeclared"),
                    });
                }
                let offset = regs.iter().map(|r| r.size).sum();
                regs.push(Register {
                    name: reg,
                    offset,
                    size,
                });
                if name == "qreg" {
                    self.measured.resize(offset + size, false);
                }
                Ok(())
            }
            "measure" => {
                let q = self.arg(true)?;
                if self.next() != Some(Tok::Arrow) {
                    return self.syntax("expected `->` in measure");
                }
                let c = self.arg(false)?;
                self.expect_sym(';')?;
                let qs = self.expand(&q, true);
                let cs = self.expand(&c, false);
                if qs.len() != cs.len() {
                    return Err(ParseError::Syntax {
                        pos,
                        msg: "measure register sizes differ".into(),
                    });
                }
                for q in qs {
                    self.measured[q] = true;
                }
                Ok(())
            }
            "barrier" => {
                loop {
                    self.arg(true)?;
                    if !self.eat_sym(',') {
                        break;
                    }
                }
                self.expect_sym(';')
            }
            "gate" | "opaque" | "if" | "reset" => Err(ParseError::Unsupported { pos, what: name }),
            _ => self.gate(pos, name),
        }
    }

    fn arg(&mut self, quantum: bool) -> Result<Arg, ParseError> {
        let pos = self.pos();
        let name = self.ident()?;
        let regs = if quantum { &self.qregs } else { &self.cregs };
        let found = regs.iter().position(|r| r.name == name);
        let Some(ri) = found else {
            return Err(ParseError::UnknownRegister { pos, reg: name });
        };
        if self.eat_sym('[') {
            let ipos = self.pos();
            let idx = self.int()?;
            self.expect_sym(']')?;
            let size = if quantum { self.qregs[ri].size } else { self.cregs[ri].size };
            if idx >= size {
                return Err(ParseError::IndexOutOfRange {
                    pos: ipos,
                    reg: name,
                    index: idx,
                    size,
                });
            }
            Ok(Arg::Index(ri, idx))
        } else {
            Ok(Arg::Whole(ri))
        }
    }

    fn expand(&self, arg: &Arg, quantum: bool) -> Vec<usize> {
        let regs = if quantum { &self.qregs } else { &self.cregs };
        match *arg {
            Arg::Whole(r) => (0..regs[r].size).map(|i| regs[r].offset + i).collect(),
            Arg::Index(r, i) => vec![regs[r].offset + i],
        }
    }

    fn gate(&mut self, pos: SourcePos, name: String) -> Result<(), ParseError> {
        let (n_params, n_qubits) = match name.as_str() {
            "u3" | "u" | "U" => (3, 1),
            "u2" => (2, 1),
            "u1" | "p" | "rx" | "ry" | "rz" => (1, 1),
            "x" | "y" | "z" | "h" | "s" | "sdg" | "t" | "tdg" | "id" => (0, 1),
            "cx" | "CX" | "cz" | "swap" => (0, 2),
            "ccx" => (0, 3),
            _ => return Err(ParseError::UnsupportedGate { pos, name }),
        };
        let mut params = Vec::new();
        if self.eat_sym('(') && !self.eat_sym(')') {
            loop {
                params.push(self.expr()?);
                if self.eat_sym(')') {
                    break;
                }
                self.expect_sym(',')?;
            }
        }
        if params.len() != n_params {
            return Err(ParseError::Syntax {
                pos,
                msg: format!("`{name}` takes {n_params} parameters, got {}", params.len()),
            });
        }
        let mut args = Vec::new();
        loop {
            args.push(self.arg(true)?);
            if !self.eat_sym(',') {
                break;
            }
        }
        self.expect_sym(';')?;
        if args.len() != n_qubits {
            return Err(ParseError::Syntax {
                pos,
                msg: format!("`{name}` acts on {n_qubits} qubits, got {}", args.len()),
            });
        }
        // Register broadcast: whole registers must agree in size.
        let lists: Vec<Vec<usize>> = args.iter().map(|a| self.expand(a, true)).collect();
        let width = lists.iter().map(Vec::len).max().unwrap_or(0);
        if lists.iter().any(|l| l.len() != 1 && l.len() != width) {
            return Err(ParseError::Syntax {
                pos,
                msg: "register sizes differ in broadcast".into(),
            });
        }
        for k in 0..width {
            let qs: Vec<usize> = lists.iter().map(|l| if l.len() == 1 { l[0] } else { l[k] }).collect();
            for (w, &q) in qs.iter().enumerate() {
                if qs[..w].contains(&q) {
                    return Err(ParseError::Syntax {
                        pos,
                        msg: format!("repeated qubit operand in `{name}`"),
                    });
                }
                if self.measured[q] {
                    let (reg, index) = self.locate(q);
                    return Err(ParseError::MidCircuitMeasurement { pos, reg, index });
                }
            }
            let p = |i: usize| params[i];
            let g = match name.as_str() {
                "u3" | "u" | "U" => RawGate::U3(qs[0], p(0), p(1), p(2)),
                "u2" => RawGate::U2(qs[0], p(0), p(1)),
                "u1" => RawGate::U1(qs[0], p(0)),
                "p" => RawGate::P(qs[0], p(0)),
                "rx" => RawGate::Rx(qs[0], p(0)),
                "ry" => RawGate::Ry(qs[0], p(0)),
                "rz" => RawGate::Rz(qs[0], p(0)),
                "x" => RawGate::X(qs[0]),
                "y" => RawGate::Y(qs[0]),
                "z" => RawGate::Z(qs[0]),
                "h" => RawGate::H(qs[0]),
                "s" => RawGate::S(qs[0]),
                "sdg" => RawGate::Sdg(qs[0]),
                "t" => RawGate::T(qs[0]),
                "tdg" => RawGate::Tdg(qs[0]),
                "id" => continue,
                "cx" | "CX" => RawGate::Cx(qs[0], qs[1]),
                "cz" => RawGate::Cz(qs[0], qs[1]),
                "swap" => RawGate::Swap(qs[0], qs[1]),
                "ccx" => RawGate::Ccx(qs[0], qs[1], qs[2]),
                _ => unreachable!(),
            };
            self.gates.push(g);
        }
        Ok(())
    }

    fn locate(&self, q: usize) -> (String, usize) {
        let r = self
            .qregs
            .iter()
            .find(|r| q >= r.offset && q < r.offset + r.size)
            .expect("flattened index belongs to a register");
        (r.name.clone(), q - r.offset)
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<f64, ParseError> {
        let mut v = self.term()?;
        loop {
            if self.eat_sym('+') {
                v += self.term()?;
            } else if self.eat_sym('-') {
                v -= self.term()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn term(&mut self) -> Result<f64, ParseError> {
        let mut v = self.factor()?;
        loop {
            if self.eat_sym('*') {
                v *= self.factor()?;
            } else if self.eat_sym('/') {
                v /= self.factor()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn factor(&mut self) -> Result<f64, ParseError> {
        let base = self.unary()?;
        if self.eat_sym('^') {
            let exp = self.factor()?;
            return Ok(base.powf(exp));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<f64, ParseError> {
        if self.eat_sym('-') {
            return Ok(-self.unary()?);
        }
        if self.eat_sym('+') {
            return self.unary();
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<f64, ParseError> {
        match self.next() {
            Some(Tok::Real(v)) => Ok(v),
            Some(Tok::Int(n)) => Ok(n as f64),
            Some(Tok::Sym('(')) => {
                let v = self.expr()?;
                self.expect_sym(')')?;
                Ok(v)
            }
            Some(Tok::Ident(name)) => {
                if name == "pi" {
                    return Ok(std::f64::consts::PI);
                }
                let f: fn(f64) -> f64 = match name.as_str() {
                    "sin" => f64::sin,
                    "cos" => f64::cos,
                    "tan" => f64::tan,
                    "exp" => f64::exp,
                    "ln" => f64::ln,
                    "sqrt" => f64::sqrt,
                    _ => {
                        self.i -= 1;
                        return self.syntax(format!("unknown identifier `{name}` in expression"));
                    }
                };
                self.expect_sym('(')?;
                let v = self.expr()?;
                self.expect_sym(')')?;
                Ok(f(v))
            }
            _ => {
                self.i -= 1;
                self.syntax("expected expression")
            }
        }
    }
}

/// Parses QASM 2.0 source into standard gates on flattened qubit indices
/// (registers concatenated in declaration order).
pub fn parse_qasm(text: &str, source_name: &str) -> Result<RawCircuit, ParseError> {
    let toks = lex(text)?;
    let eof = {
        let lines = text.split('\n').count();
        let last = text.rsplit('\n').next().unwrap_or("");
        SourcePos {
            line: lines,
            col: last.chars().count() + 1,
        }
    };
    let mut p = Parser {
        toks,
        i: 0,
        eof,
        qregs: Vec::new(),
        cregs: Vec::new(),
        measured: Vec::new(),
        gates: Vec::new(),
    };
    p.program()?;
    Ok(RawCircuit {
        num_qubits: p.qregs.iter().map(|r| r.size).sum(),
        gates: p.gates,
        source_name: source_name.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn single_cz() {
        let c = parse_qasm("qreg q[2]; cz q[0],q[1];", "t").unwrap();
        assert_eq!(c.num_qubits, 2);
        assert_eq!(c.gates, vec![RawGate::Cz(0, 1)]);
    }

    #[test]
    fn single_h() {
        let c = parse_qasm("qreg q[1]; h q[0];", "t").unwrap();
        assert_eq!(c.gates, vec![RawGate::H(0)]);
    }

    #[test]
    fn ghz_keeps_order() {
        let c = parse_qasm("qreg q[3]; h q[0]; cx q[0],q[1]; cx q[1],q[2];", "t").unwrap();
        assert_eq!(c.gates, vec![RawGate::H(0), RawGate::Cx(0, 1), RawGate::Cx(1, 2)]);
    }

    #[test]
    fn header_include_creg_measure_barrier() {
        let src = r#"OPENQASM 2.0;
include "qelib1.inc";
// comment
qreg q[2];
creg c[2];
h q[0];
barrier q;
cx q[0],q[1];
measure q -> c;
"#;
        let c = parse_qasm(src, "t").unwrap();
        assert_eq!(c.gates, vec![RawGate::H(0), RawGate::Cx(0, 1)]);
    }

    #[test]
    fn expressions() {
        let c = parse_qasm("qreg q[1]; u3(pi/2, -pi/4, 2*pi^1) q[0]; rz(1.5e-1) q[0];", "t").unwrap();
        match c.gates[0] {
            RawGate::U3(0, t, p, l) => {
                assert!((t - PI / 2.0).abs() < 1e-15);
                assert!((p + PI / 4.0).abs() < 1e-15);
                assert!((l - 2.0 * PI).abs() < 1e-15);
            }
            ref g => panic!("unexpected {g:?}"),
        }
        assert_eq!(c.gates[1], RawGate::Rz(0, 0.15));
    }

    #[test]
    fn multiple_registers_flatten() {
        let c = parse_qasm("qreg a[2]; qreg b[3]; cz a[1],b[2];", "t").unwrap();
        assert_eq!(c.num_qubits, 5);
        assert_eq!(c.gates, vec![RawGate::Cz(1, 4)]);
    }

    #[test]
    fn broadcast() {
        let c = parse_qasm("qreg q[3]; h q;", "t").unwrap();
        assert_eq!(c.gates, vec![RawGate::H(0), RawGate::H(1), RawGate::H(2)]);
    }

    #[test]
    fn errors_report_positions() {
        let e = parse_qasm("qreg q[2];\ncz q[0] q[1];", "t").unwrap_err();
        assert!(matches!(e, ParseError::Syntax { pos: SourcePos { line: 2, col: 9 }, .. }), "{e:?}");
        let e = parse_qasm("qreg q[2];\n  foo q[0];", "t").unwrap_err();
        assert_eq!(
            e,
            ParseError::UnsupportedGate {
                pos: SourcePos { line: 2, col: 3 },
                name: "foo".into()
            }
        );
    }

    #[test]
    fn rejects_mid_circuit_measurement() {
        let e = parse_qasm("qreg q[1]; creg c[1]; measure q[0] -> c[0]; h q[0];", "t").unwrap_err();
        assert!(matches!(e, ParseError::MidCircuitMeasurement { index: 0, .. }));
    }

    #[test]
    fn rejects_out_of_range() {
        let e = parse_qasm("qreg q[2]; h q[2];", "t").unwrap_err();
        assert!(matches!(e, ParseError::IndexOutOfRange { index: 2, size: 2, .. }));
    }

    #[test]
    fn rejects_conditionals_and_gate_definitions() {
        assert!(matches!(
            parse_qasm("qreg q[1]; creg c[1]; if(c==1) x q[0];", "t").unwrap_err(),
            ParseError::Unsupported { .. }
        ));
        assert!(matches!(
            parse_qasm("gate foo a { h a; }", "t").unwrap_err(),
            ParseError::Unsupported { .. }
        ));
    }

    #[test]
    fn rejects_repeated_operand() {
        assert!(parse_qasm("qreg q[2]; swap q[1],q[1];", "t").is_err());
    }
}
