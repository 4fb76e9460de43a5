// SPDX-License-Identifier: Apache-2.0
//! Graph text formats.
//!
//! Native format, one statement per line:
//!
//! ```text
//! # comment
//! node A B      # declares nodes
//! A -> B -> C   # adds edges, declaring endpoints on first use
//! ```
//!
//! DOT subset: `digraph [name] { ... }` containing only bare node statements
//! and `->` edge chains, optionally separated by `;`.

use super::{is_name_char, Dag, NodeId};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Arrow,
    LBrace,
    RBrace,
    Semi,
    Newline,
    Other(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn tokenize(text: &str) -> Vec<Token> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let column = i + 1;
            let push = |out: &mut Vec<Token>, tok| {
                out.push(Token {
                    tok,
                    line: ln + 1,
                    column,
                })
            };
            if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
                break;
            }
            if c.is_whitespace() {
                i += 1;
            } else if is_name_char(c) {
                let start = i;
                while i < chars.len() && is_name_char(chars[i]) {
                    i += 1;
                }
                push(&mut out, Tok::Ident(chars[start..i].iter().collect()));
            } else if c == '-' && chars.get(i + 1) == Some(&'>') {
                push(&mut out, Tok::Arrow);
                i += 2;
            } else {
                let tok = match c {
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    ';' => Tok::Semi,
                    other => Tok::Other(other),
                };
                push(&mut out, tok);
                i += 1;
            }
        }
        out.push(Token {
            tok: Tok::Newline,
            line: ln + 1,
            column: chars.len() + 1,
        });
    }
    out
}

fn syntax(t: &Token, message: impl Into<String>) -> Error {
    Error::Syntax {
        line: t.line,
        column: t.column,
        message: message.into(),
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("identifier `{s}`"),
        Tok::Arrow => "`->`".into(),
        Tok::LBrace => "`{`".into(),
        Tok::RBrace => "`}`".into(),
        Tok::Semi => "`;`".into(),
        Tok::Newline => "end of line".into(),
        Tok::Other(c) => format!("`{c}`"),
    }
}

#[derive(Default)]
struct Builder {
    nodes: Vec<NodeId>,
    edges: Vec<(NodeId, NodeId)>,
}

impl Builder {
    fn node(&mut self, name: &str) -> NodeId {
        let id = NodeId::new(name).expect("tokenizer yields valid names");
        self.nodes.push(id.clone());
        id
    }

    fn finish(self) -> Result<Dag> {
        Dag::new(self.nodes, self.edges)
    }
}

struct Cursor<'a> {
    toks: &'a [Token],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.pos)
    }

    fn bump(&mut self) -> Option<&'a Token> {
        let t = self.toks.get(self.pos);
        self.pos += 1;
        t
    }

    fn skip_newlines(&mut self) {
        while matches!(self.peek(), Some(Token { tok: Tok::Newline, .. })) {
            self.pos += 1;
        }
    }

    /// Parses `A (-> B)*` starting at an identifier; newlines inside the
    /// chain are not allowed.
    fn chain(&mut self, first: &str, b: &mut Builder) -> Result<()> {
        let mut prev = b.node(first);
        while let Some(Token { tok: Tok::Arrow, .. }) = self.peek() {
            self.pos += 1;
            match self.bump() {
                Some(Token {
                    tok: Tok::Ident(name),
                    ..
                }) => {
                    let next = b.node(name);
                    b.edges.push((prev, next.clone()));
                    prev = next;
                }
                Some(t) => return Err(syntax(t, format!("expected node name, found {}", describe(&t.tok)))),
                None => unreachable!("token stream ends with a newline"),
            }
        }
        Ok(())
    }
}

/// Parses a graph in the native format or the DOT subset.
pub fn parse_graph(text: &str) -> Result<Dag> {
    let toks = tokenize(text);
    let mut cur = Cursor { toks: &toks, pos: 0 };
    cur.skip_newlines();
    match cur.peek() {
        Some(Token {
            tok: Tok::Ident(kw), ..
        }) if kw == "digraph" => parse_dot(cur),
        _ => parse_native(cur),
    }
}

fn parse_native(mut cur: Cursor<'_>) -> Result<Dag> {
    let mut b = Builder::default();
    while let Some(t) = cur.bump() {
        match &t.tok {
            Tok::Newline => continue,
            Tok::Ident(kw)
                if kw == "node"
                    && matches!(cur.peek(), Some(Token { tok: Tok::Ident(_), .. })) =>
            {
                while let Some(Token {
                    tok: Tok::Ident(name),
                    ..
                }) = cur.peek()
                {
                    b.node(name);
                    cur.pos += 1;
                }
            }
            Tok::Ident(first) => {
                if !matches!(cur.peek(), Some(Token { tok: Tok::Arrow, .. })) {
                    let next = cur.peek().unwrap();
                    return Err(syntax(next, format!("expected `->`, found {}", describe(&next.tok))));
                }
                cur.chain(first, &mut b)?;
            }
            other => return Err(syntax(t, format!("unexpected {}", describe(other)))),
        }
        let end = cur.bump().unwrap();
        if end.tok != Tok::Newline {
            return Err(syntax(end, format!("expected end of line, found {}", describe(&end.tok))));
        }
    }
    b.finish()
}

fn parse_dot(mut cur: Cursor<'_>) -> Result<Dag> {
    cur.bump(); // digraph
    cur.skip_newlines();
    let mut t = cur.bump();
    if let Some(Token { tok: Tok::Ident(_), .. }) = t {
        cur.skip_newlines();
        t = cur.bump();
    }
    match t {
        Some(Token { tok: Tok::LBrace, .. }) => {}
        Some(t) => return Err(syntax(t, format!("expected `{{`, found {}", describe(&t.tok)))),
        None => return Err(eof(&toks_end(&cur))),
    }
    let mut b = Builder::default();
    loop {
        cur.skip_newlines();
        let Some(t) = cur.bump() else {
            return Err(eof(&toks_end(&cur)));
        };
        match &t.tok {
            Tok::RBrace => break,
            Tok::Semi => continue,
            Tok::Ident(first) => {
                cur.chain(first, &mut b)?;
                match cur.peek() {
                    Some(Token {
                        tok: Tok::Semi | Tok::Newline | Tok::RBrace,
                        ..
                    }) => {}
                    Some(t) => {
                        return Err(syntax(t, format!("unsupported DOT syntax: {}", describe(&t.tok))))
                    }
                    None => unreachable!("token stream ends with a newline"),
                }
            }
            other => return Err(syntax(t, format!("unsupported DOT syntax: {}", describe(other)))),
        }
    }
    cur.skip_newlines();
    if let Some(t) = cur.peek() {
        return Err(syntax(t, format!("trailing {} after graph body", describe(&t.tok))));
    }
    b.finish()
}

fn toks_end(cur: &Cursor<'_>) -> Token {
    cur.toks.last().cloned().unwrap_or(Token {
        tok: Tok::Newline,
        line: 1,
        column: 1,
    })
}

fn eof(t: &Token) -> Error {
    syntax(t, "unexpected end of input")
}
