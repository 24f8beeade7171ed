//! Small Boolean/linear-integer formula AST with SMT-LIB rendering and evaluation.

use std::collections::HashMap;
use std::fmt::Write;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sort {
    Bool,
    Int,
}

impl Sort {
    fn smt(self) -> &'static str {
        match self {
            Sort::Bool => "Bool",
            Sort::Int => "Int",
        }
    }
}

pub type Sym = usize;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Bool(bool),
    Int(i64),
    Var(Sym),
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Xor(Box<Expr>, Box<Expr>),
    Implies(Box<Expr>, Box<Expr>),
    Eq(Box<Expr>, Box<Expr>),
    Ite(Box<Expr>, Box<Expr>, Box<Expr>),
    Add(Vec<Expr>),
    Le(Box<Expr>, Box<Expr>),
    Lt(Box<Expr>, Box<Expr>),
    Ge(Box<Expr>, Box<Expr>),
}

impl std::ops::Not for Expr {
    type Output = Expr;

    fn not(self) -> Expr {
        Expr::Not(Box::new(self))
    }
}

impl Expr {
    pub fn var(s: Sym) -> Expr {
        Expr::Var(s)
    }

    pub fn and(es: Vec<Expr>) -> Expr {
        Expr::And(es)
    }

    pub fn or(es: Vec<Expr>) -> Expr {
        Expr::Or(es)
    }

    pub fn xor(a: Expr, b: Expr) -> Expr {
        Expr::Xor(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Expr, b: Expr) -> Expr {
        Expr::Implies(Box::new(a), Box::new(b))
    }

    pub fn eq(a: Expr, b: Expr) -> Expr {
        Expr::Eq(Box::new(a), Box::new(b))
    }

    pub fn ite(c: Expr, a: Expr, b: Expr) -> Expr {
        Expr::Ite(Box::new(c), Box::new(a), Box::new(b))
    }

    /// `(ite cond 1 0)`.
    pub fn indicator(cond: Expr) -> Expr {
        Expr::ite(cond, Expr::Int(1), Expr::Int(0))
    }

    pub fn add(es: Vec<Expr>) -> Expr {
        match es.len() {
            0 => Expr::Int(0),
            1 => es.into_iter().next().unwrap(),
            _ => Expr::Add(es),
        }
    }

    pub fn le(a: Expr, b: Expr) -> Expr {
        Expr::Le(Box::new(a), Box::new(b))
    }

    pub fn lt(a: Expr, b: Expr) -> Expr {
        Expr::Lt(Box::new(a), Box::new(b))
    }

    pub fn ge(a: Expr, b: Expr) -> Expr {
        Expr::Ge(Box::new(a), Box::new(b))
    }

    pub fn render(&self, names: &[String], out: &mut String) {
        fn refs(es: &[Expr]) -> Vec<&Expr> {
            es.iter().collect()
        }
        fn app(op: &str, args: &[&Expr], names: &[String], out: &mut String) {
            let _ = write!(out, "({op}");
            for e in args {
                out.push(' ');
                e.render(names, out);
            }
            out.push(')');
        }
        match self {
            Expr::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Expr::Int(i) if *i < 0 => {
                let _ = write!(out, "(- {})", i.unsigned_abs());
            }
            Expr::Int(i) => {
                let _ = write!(out, "{i}");
            }
            Expr::Var(s) => out.push_str(&names[*s]),
            Expr::Not(e) => app("not", &[e], names, out),
            Expr::And(es) if es.is_empty() => out.push_str("true"),
            Expr::Or(es) if es.is_empty() => out.push_str("false"),
            Expr::Add(es) if es.is_empty() => out.push('0'),
            Expr::And(es) => app("and", &refs(es), names, out),
            Expr::Or(es) => app("or", &refs(es), names, out),
            Expr::Add(es) => app("+", &refs(es), names, out),
            Expr::Xor(a, b) => app("xor", &[a, b], names, out),
            Expr::Implies(a, b) => app("=>", &[a, b], names, out),
            Expr::Eq(a, b) => app("=", &[a, b], names, out),
            Expr::Le(a, b) => app("<=", &[a, b], names, out),
            Expr::Lt(a, b) => app("<", &[a, b], names, out),
            Expr::Ge(a, b) => app(">=", &[a, b], names, out),
            Expr::Ite(c, a, b) => app("ite", &[c, a, b], names, out),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Value {
    Bool(bool),
    Int(i64),
}

impl Value {
    pub fn as_bool(self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(b),
            Value::Int(_) => None,
        }
    }

    pub fn as_int(self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(i),
            Value::Bool(_) => None,
        }
    }
}

/// Assignment from symbol names to values, as returned by a solver.
pub type Model = HashMap<String, Value>;

/// Evaluates `e` under `values` (indexed by symbol). `None` signals a sort
/// error or an unassigned symbol.
pub fn eval(e: &Expr, values: &[Option<Value>]) -> Option<Value> {
    let b = |e: &Expr| eval(e, values).and_then(Value::as_bool);
    let i = |e: &Expr| eval(e, values).and_then(Value::as_int);
    Some(match e {
        Expr::Bool(v) => Value::Bool(*v),
        Expr::Int(v) => Value::Int(*v),
        Expr::Var(s) => return values.get(*s).copied().flatten(),
        Expr::Not(a) => Value::Bool(!b(a)?),
        Expr::And(es) => {
            let mut acc = true;
            for e in es {
                acc &= b(e)?;
            }
            Value::Bool(acc)
        }
        Expr::Or(es) => {
            let mut acc = false;
            for e in es {
                acc |= b(e)?;
            }
            Value::Bool(acc)
        }
        Expr::Xor(x, y) => Value::Bool(b(x)? ^ b(y)?),
        Expr::Implies(x, y) => Value::Bool(!b(x)? || b(y)?),
        Expr::Eq(x, y) => Value::Bool(eval(x, values)? == eval(y, values)?),
        Expr::Ite(c, x, y) => {
            if b(c)? {
                eval(x, values)?
            } else {
                eval(y, values)?
            }
        }
        Expr::Add(es) => {
            let mut acc = 0i64;
            for e in es {
                acc += i(e)?;
            }
            Value::Int(acc)
        }
        Expr::Le(x, y) => Value::Bool(i(x)? <= i(y)?),
        Expr::Lt(x, y) => Value::Bool(i(x)? < i(y)?),
        Expr::Ge(x, y) => Value::Bool(i(x)? >= i(y)?),
    })
}

pub fn declare(name: &str, sort: Sort, out: &mut String) {
    let _ = writeln!(out, "(declare-fun {name} () {})", sort.smt());
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn render_and_eval_agree() {
        let names = vec!["a".to_string(), "n".to_string()];
        let e = Expr::and(vec![
            Expr::implies(Expr::var(0), Expr::le(Expr::var(1), Expr::Int(3))),
            Expr::eq(
                Expr::add(vec![Expr::indicator(Expr::var(0)), Expr::Int(-2)]),
                Expr::Int(-1),
            ),
        ]);
        let mut s = String::new();
        e.render(&names, &mut s);
        assert_eq!(s, "(and (=> a (<= n 3)) (= (+ (ite a 1 0) (- 2)) (- 1)))");
        let vals = [Some(Value::Bool(true)), Some(Value::Int(3))];
        assert_eq!(eval(&e, &vals), Some(Value::Bool(true)));
        let vals = [Some(Value::Bool(true)), Some(Value::Int(4))];
        assert_eq!(eval(&e, &vals), Some(Value::Bool(false)));
        assert_eq!(eval(&e, &[None, None]), None);
    }
}
