//! Minimal s-expression reader for solver responses.

use crate::model::expr::{Model, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum SExpr {
    Atom(String),
    List(Vec<SExpr>),
}

/// Parses every top-level s-expression in `text`. String literals and
/// `|quoted|` symbols are kept as single atoms; `;` starts a comment.
pub fn parse_all(text: &str) -> Result<Vec<SExpr>, String> {
    let mut stack: Vec<Vec<SExpr>> = vec![Vec::new()];
    let mut chars = text.char_indices().peekable();
    while let Some((i, ch)) = chars.next() {
        match ch {
            '(' => stack.push(Vec::new()),
            ')' => {
                if stack.len() < 2 {
                    return Err(format!("unbalanced ')' at offset {i}"));
                }
                let done = stack.pop().unwrap();
                stack.last_mut().unwrap().push(SExpr::List(done));
            }
            ';' => {
                for (_, c) in chars.by_ref() {
                    if c == '\n' {
                        break;
                    }
                }
            }
            c if c.is_whitespace() => {}
            '"' | '|' => {
                let close = ch;
                let mut atom = String::from(ch);
                let mut closed = false;
                while let Some((_, c)) = chars.next() {
                    atom.push(c);
                    if c == close {
                        // "" escapes a quote inside string literals
                        if close == '"' && chars.peek().map(|&(_, n)| n) == Some('"') {
                            atom.push(chars.next().unwrap().1);
                            continue;
                        }
                        closed = true;
                        break;
                    }
                }
                if !closed {
                    return Err(format!("unterminated literal at offset {i}"));
                }
                stack.last_mut().unwrap().push(SExpr::Atom(atom));
            }
            _ => {
                let mut atom = String::from(ch);
                while let Some(&(_, c)) = chars.peek() {
                    if c.is_whitespace() || c == '(' || c == ')' || c == ';' {
                        break;
                    }
                    atom.push(c);
                    chars.next();
                }
                stack.last_mut().unwrap().push(SExpr::Atom(atom));
            }
        }
    }
    if stack.len() != 1 {
        return Err("unbalanced '('".into());
    }
    Ok(stack.pop().unwrap())
}

/// Byte length of the first complete top-level expression, if `text` holds one.
pub fn complete_prefix(text: &str) -> Option<usize> {
    let mut depth = 0i64;
    let mut started = false;
    let mut in_lit: Option<char> = None;
    for (i, ch) in text.char_indices() {
        if let Some(close) = in_lit {
            if ch == close {
                in_lit = None;
                if depth == 0 {
                    return Some(i + 1);
                }
            }
            continue;
        }
        match ch {
            '(' => {
                depth += 1;
                started = true;
            }
            ')' => {
                depth -= 1;
                if depth == 0 {
                    return Some(i + 1);
                }
            }
            '"' | '|' => {
                in_lit = Some(ch);
                started = true;
            }
            c if c.is_whitespace() => {
                if started && depth == 0 {
                    return Some(i);
                }
            }
            _ => started = true,
        }
    }
    None
}

/// Reads a `get-value` response `((name value) ...)`.
pub fn parse_values(e: &SExpr) -> Result<Model, String> {
    let SExpr::List(pairs) = e else {
        return Err("get-value response is not a list".into());
    };
    let mut model = Model::new();
    for pair in pairs {
        match pair {
            SExpr::List(items) if items.len() == 2 => {
                let SExpr::Atom(name) = &items[0] else {
                    return Err("symbol expected in get-value pair".into());
                };
                model.insert(name.trim_matches('|').to_string(), value_of(&items[1])?);
            }
            _ => return Err("malformed get-value pair".into()),
        }
    }
    Ok(model)
}

fn value_of(e: &SExpr) -> Result<Value, String> {
    match e {
        SExpr::Atom(a) if a == "true" => Ok(Value::Bool(true)),
        SExpr::Atom(a) if a == "false" => Ok(Value::Bool(false)),
        SExpr::Atom(a) => a
            .parse::<i64>()
            .map(Value::Int)
            .map_err(|_| format!("unexpected value '{a}'")),
        SExpr::List(items) => match items.as_slice() {
            [SExpr::Atom(op), inner] if op == "-" => match value_of(inner)? {
                Value::Int(i) => Ok(Value::Int(-i)),
                Value::Bool(_) => Err("negated Boolean".into()),
            },
            _ => Err("unsupported value term".into()),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values_with_negatives() {
        let es = parse_all("sat\n((a true)\n (n (- 3)) (|odd name| 7))").unwrap();
        assert_eq!(es[0], SExpr::Atom("sat".into()));
        let m = parse_values(&es[1]).unwrap();
        assert_eq!(m["a"], Value::Bool(true));
        assert_eq!(m["n"], Value::Int(-3));
        assert_eq!(m["odd name"], Value::Int(7));
    }

    #[test]
    fn errors_and_comments() {
        assert!(parse_all("(a (b)").is_err());
        assert!(parse_all("a)").is_err());
        let es = parse_all("; note\n(error \"line 1: \"\"x\"\"\")").unwrap();
        assert_eq!(es.len(), 1);
    }

    #[test]
    fn prefix_detection() {
        assert_eq!(complete_prefix("sat\n"), Some(3));
        assert_eq!(complete_prefix("  sat"), None);
        assert_eq!(complete_prefix("((a 1)\n (b 2)) tail"), Some(14));
        assert_eq!(complete_prefix("((a 1)"), None);
    }
}
