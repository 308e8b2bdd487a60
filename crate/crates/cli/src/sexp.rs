use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{pos}: {message}")]
pub struct ParseError {
    pub pos: Pos,
    pub message: String,
}

impl ParseError {
    pub fn new(pos: Pos, message: impl Into<String>) -> Self {
        Self {
            pos,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexp {
    Atom(String, Pos),
    List(Vec<Sexp>, Pos),
}

impl Sexp {
    pub fn pos(&self) -> Pos {
        match self {
            Sexp::Atom(_, p) | Sexp::List(_, p) => *p,
        }
    }

    pub fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(s, _) => Some(s),
            Sexp::List(..) => None,
        }
    }

    pub fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(items, _) => Some(items),
            Sexp::Atom(..) => None,
        }
    }

    /// The head symbol of a non-empty list whose first item is an atom.
    pub fn head(&self) -> Option<&str> {
        self.list().and_then(|l| l.first()).and_then(Sexp::atom)
    }

    pub fn expect_atom(&self, what: &str) -> Result<&str, ParseError> {
        self.atom()
            .ok_or_else(|| ParseError::new(self.pos(), format!("expected {what}, found a list")))
    }

    pub fn expect_list(&self, what: &str) -> Result<&[Sexp], ParseError> {
        self.list()
            .ok_or_else(|| ParseError::new(self.pos(), format!("expected {what}, found `{self}`")))
    }

    /// The arguments of a list headed by `head`.
    pub fn expect_form(&self, head: &str) -> Result<&[Sexp], ParseError> {
        match self.list() {
            Some(items) if items.first().and_then(Sexp::atom) == Some(head) => Ok(&items[1..]),
            _ => Err(ParseError::new(self.pos(), format!("expected ({head} ...)"))),
        }
    }

    pub fn expect_usize(&self, what: &str) -> Result<usize, ParseError> {
        let s = self.expect_atom(what)?;
        s.parse()
            .map_err(|_| ParseError::new(self.pos(), format!("expected {what}, found `{s}`")))
    }

    pub fn expect_u64(&self, what: &str) -> Result<u64, ParseError> {
        let s = self.expect_atom(what)?;
        s.parse()
            .map_err(|_| ParseError::new(self.pos(), format!("expected {what}, found `{s}`")))
    }
}

impl fmt::Display for Sexp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sexp::Atom(s, _) => write!(f, "{s}"),
            Sexp::List(items, _) => {
                write!(f, "(")?;
                for (i, x) in items.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
        }
    }
}

fn is_delim(c: char) -> bool {
    c.is_whitespace() || c == '(' || c == ')' || c == ';'
}

struct Reader<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    pos: Pos,
}

impl Reader<'_> {
    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }

    fn skip_blank(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == ';' {
                while self.chars.peek().is_some_and(|&c| c != '\n') {
                    self.bump();
                }
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn read(&mut self) -> Result<Sexp, ParseError> {
        self.skip_blank();
        let start = self.pos;
        match self.chars.peek().copied() {
            None => Err(ParseError::new(start, "unexpected end of input")),
            Some(')') => Err(ParseError::new(start, "unexpected `)`")),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_blank();
                    match self.chars.peek() {
                        None => return Err(ParseError::new(start, "unclosed `(`")),
                        Some(')') => {
                            self.bump();
                            return Ok(Sexp::List(items, start));
                        }
                        Some(_) => items.push(self.read()?),
                    }
                }
            }
            Some(_) => {
                let mut s = String::new();
                while let Some(&c) = self.chars.peek() {
                    if is_delim(c) {
                        break;
                    }
                    s.push(c);
                    self.bump();
                }
                Ok(Sexp::Atom(s, start))
            }
        }
    }
}

/// Reads exactly one expression; `;` starts a comment running to the end of the line.
pub fn read(text: &str) -> Result<Sexp, ParseError> {
    let mut r = Reader {
        chars: text.chars().peekable(),
        pos: Pos { line: 1, col: 1 },
    };
    let e = r.read()?;
    r.skip_blank();
    if r.chars.peek().is_some() {
        return Err(ParseError::new(r.pos, "trailing input after the expression"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nested_lists_and_positions() {
        let e = read("(a (b c)\n  d)").unwrap();
        assert_eq!(e.to_string(), "(a (b c) d)");
        let items = e.list().unwrap();
        assert_eq!(items[2].pos(), Pos { line: 2, col: 3 });
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(read("(a b").unwrap_err().pos, Pos { line: 1, col: 1 });
        assert_eq!(read("a )").unwrap_err().pos, Pos { line: 1, col: 3 });
        assert!(read("").is_err());
        assert_eq!(read("; note\n x").unwrap().atom(), Some("x"));
    }
}
