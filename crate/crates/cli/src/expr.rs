//! Generator expressions such as `tree(3,5)` or `rooted(grid(4,4),tree(2,2),0)`.

use std::fmt;

use normembed::graph::{
    cartesian_product, gen_chordal_cycle, gen_grid, gen_margulis, gen_paley, gen_tree,
    rooted_product,
};
use normembed::Graph;

pub const GENERATORS: &str =
    "tree(b,h), grid(s1,...,sk), cartesian(a,b), rooted(base,fiber,root), margulis(n), paley(q), chordal(p)";

/// Parse failure at a 1-based character column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExprError {
    pub input: String,
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ExprError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "column {}: {}", self.column, self.message)?;
        writeln!(f, "  {}", self.input)?;
        write!(f, "  {}^", " ".repeat(self.column - 1))
    }
}

impl std::error::Error for ExprError {}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(usize),
    Call { name: String, args: Vec<Expr> },
}

struct Parser<'a> {
    input: &'a str,
    chars: Vec<char>,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn fail<T>(&self, at: usize, message: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError {
            input: self.input.to_owned(),
            column: at + 1,
            message: message.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.chars.get(self.pos).is_some_and(|c| c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.chars.get(self.pos).copied()
    }

    fn expect(&mut self, want: char) -> Result<(), ExprError> {
        match self.peek() {
            Some(c) if c == want => {
                self.pos += 1;
                Ok(())
            }
            Some(c) => self.fail(self.pos, format!("expected `{want}`, found `{c}`")),
            None => self.fail(self.pos, format!("expected `{want}`, found end of input")),
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let start = match self.peek() {
            Some(_) => self.pos,
            None => {
                return self.fail(
                    self.pos,
                    "expected a number or generator, found end of input",
                )
            }
        };
        let c = self.chars[start];
        if c.is_ascii_digit() {
            while self.chars.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
            let text: String = self.chars[start..self.pos].iter().collect();
            return match text.parse() {
                Ok(n) => Ok(Expr::Number(n)),
                Err(_) => self.fail(start, format!("number `{text}` is too large")),
            };
        }
        if !c.is_ascii_alphabetic() {
            return self.fail(start, format!("unexpected `{c}`"));
        }
        while self
            .chars
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_alphanumeric() || *c == '_')
        {
            self.pos += 1;
        }
        let name: String = self.chars[start..self.pos]
            .iter()
            .collect::<String>()
            .to_ascii_lowercase();
        let arity_ok: fn(usize) -> bool = match name.as_str() {
            "tree" | "cartesian" => |n| n == 2,
            "rooted" => |n| n == 3,
            "margulis" | "paley" | "chordal" => |n| n == 1,
            "grid" => |n| n >= 1,
            _ => {
                return self.fail(
                    start,
                    format!("unknown generator `{name}`; expected one of {GENERATORS}"),
                )
            }
        };
        self.expect('(')?;
        let mut args = Vec::new();
        let mut arg_pos = Vec::new();
        if self.peek() != Some(')') {
            loop {
                self.skip_ws();
                arg_pos.push(self.pos);
                args.push(self.expr()?);
                if self.peek() == Some(',') {
                    self.pos += 1;
                } else {
                    break;
                }
            }
        }
        self.expect(')')?;
        if !arity_ok(args.len()) {
            return self.fail(
                start,
                format!("wrong number of arguments to `{name}` ({})", args.len()),
            );
        }
        // cartesian and rooted take graphs (rooted's last is the root id); the rest take numbers
        for (i, (a, &at)) in args.iter().zip(&arg_pos).enumerate() {
            let wants_graph = name == "cartesian" || (name == "rooted" && i < 2);
            match (wants_graph, a) {
                (true, Expr::Number(_)) => {
                    return self.fail(at, format!("`{name}` expects a generator here"))
                }
                (false, Expr::Call { .. }) => {
                    return self.fail(at, format!("`{name}` expects a number here"))
                }
                _ => {}
            }
        }
        Ok(Expr::Call { name, args })
    }
}

pub fn parse(input: &str) -> Result<Expr, ExprError> {
    let mut p = Parser {
        input,
        chars: input.chars().collect(),
        pos: 0,
    };
    let e = p.expr()?;
    if let Some(c) = p.peek() {
        return p.fail(p.pos, format!("unexpected `{c}` after the expression"));
    }
    if matches!(e, Expr::Number(_)) {
        return p.fail(0, format!("expected a generator: {GENERATORS}"));
    }
    Ok(e)
}

fn number(e: &Expr) -> usize {
    match e {
        Expr::Number(n) => *n,
        Expr::Call { .. } => unreachable!("checked by the parser"),
    }
}

/// Builds the graph; generator precondition errors pass through unchanged.
pub fn build(e: &Expr) -> normembed::Result<Graph> {
    let Expr::Call { name, args } = e else {
        unreachable!("checked by the parser")
    };
    match name.as_str() {
        "tree" => gen_tree(number(&args[0]), number(&args[1])),
        "grid" => gen_grid(&args.iter().map(number).collect::<Vec<_>>()),
        "cartesian" => cartesian_product(&build(&args[0])?, &build(&args[1])?),
        "rooted" => rooted_product(&build(&args[0])?, &build(&args[1])?, number(&args[2])),
        "margulis" => gen_margulis(number(&args[0])),
        "paley" => gen_paley(number(&args[0])),
        "chordal" => gen_chordal_cycle(number(&args[0])),
        _ => unreachable!("checked by the parser"),
    }
}
