use super::{BinOp, Expr, Func, Node, Span};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    start: usize,
    end: usize,
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        while j < bytes.len() && bytes[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let s = &text[start..i];
                let v: f64 = s
                    .parse()
                    .map_err(|_| Error::Syntax { offset: start, expected: "number".into() })?;
                out.push(Token { tok: Tok::Num(v), start, end: i });
                continue;
            }
            b'a'..=b'z' => {
                while i < bytes.len() && (bytes[i].is_ascii_lowercase() || bytes[i].is_ascii_digit()) {
                    i += 1;
                }
                out.push(Token { tok: Tok::Ident(text[start..i].to_string()), start, end: i });
                continue;
            }
            _ => {
                return Err(Error::Syntax { offset: start, expected: "operand or operator".into() });
            }
        };
        i += 1;
        out.push(Token { tok, start, end: i });
    }
    out.push(Token { tok: Tok::End, start: text.len(), end: text.len() });
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    vars: &'a [String],
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = join(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek().tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = join(op, lhs, rhs);
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        if self.peek().tok == Tok::Minus {
            let start = self.bump().start;
            let inner = self.factor()?;
            let end = inner.span.end;
            return Ok(Expr { node: Node::Neg(Box::new(inner)), span: Span { start, end } });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek().tok == Tok::Caret {
            self.bump();
            let exp = self.factor()?;
            return Ok(join(BinOp::Pow, base, exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let t = self.bump();
        match t.tok {
            Tok::Num(v) => Ok(Expr { node: Node::Lit(v), span: Span { start: t.start, end: t.end } }),
            Tok::Ident(name) => {
                if self.peek().tok == Tok::LParen {
                    let func = Func::from_name(&name)
                        .ok_or(Error::UnknownFunction { name: name.clone(), offset: t.start })?;
                    self.bump();
                    let arg = self.expr()?;
                    let close = self.bump();
                    if close.tok != Tok::RParen {
                        return Err(Error::Syntax { offset: close.start, expected: "`)`".into() });
                    }
                    return Ok(Expr {
                        node: Node::Call(func, Box::new(arg)),
                        span: Span { start: t.start, end: close.end },
                    });
                }
                match self.vars.iter().position(|v| *v == name) {
                    Some(index) => Ok(Expr {
                        node: Node::Var { index, name },
                        span: Span { start: t.start, end: t.end },
                    }),
                    None => Err(Error::UnknownVariable { name, offset: t.start }),
                }
            }
            Tok::LParen => {
                let inner = self.expr()?;
                let close = self.bump();
                if close.tok != Tok::RParen {
                    return Err(Error::Syntax { offset: close.start, expected: "`)`".into() });
                }
                Ok(Expr { node: inner.node, span: Span { start: t.start, end: close.end } })
            }
            _ => Err(Error::Syntax { offset: t.start, expected: "operand".into() }),
        }
    }
}

fn join(op: BinOp, a: Expr, b: Expr) -> Expr {
    let span = Span { start: a.span.start, end: b.span.end };
    Expr { node: Node::Bin(op, Box::new(a), Box::new(b)), span }
}

/// Parse `text`, resolving identifiers against `allowed_vars`.
pub fn parse(text: &str, allowed_vars: &[String]) -> Result<Expr> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0, vars: allowed_vars };
    let e = p.expr()?;
    let t = p.peek();
    if t.tok != Tok::End {
        let expected = if t.tok == Tok::RParen { "operand or end of input" } else { "operator or end of input" };
        return Err(Error::Syntax { offset: t.start, expected: expected.into() });
    }
    Ok(e)
}
