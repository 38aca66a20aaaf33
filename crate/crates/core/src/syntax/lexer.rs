use crate::error::{Error, Location, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    /// `::`
    ColonColon,
    /// `:-`
    Neck,
    /// `?`, the decision marker in front of `::`
    Question,
    Semicolon,
    Comma,
    /// `\+`
    Not,
    /// `\=`
    NotEqual,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Bar,
    Dot,
    Number(f64),
    Ident(String),
    Variable(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub at: Location,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    line: usize,
    column: usize,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|&(_, c)| c)
    }

    fn bump(&mut self) -> Option<char> {
        let (_, c) = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn here(&self) -> Location {
        Location {
            line: self.line,
            column: self.column,
        }
    }
}

/// Splits source text into tokens. `%` comments run to end of line and are dropped.
pub fn tokenize(text: &str) -> Result<Vec<Token>> {
    let mut cur = Cursor {
        chars: text.char_indices().peekable(),
        line: 1,
        column: 1,
    };
    let mut tokens = Vec::new();

    while let Some(c) = cur.peek() {
        let at = cur.here();
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '%' {
            while let Some(c) = cur.peek() {
                if c == '\n' {
                    break;
                }
                cur.bump();
            }
            continue;
        }

        let kind = match c {
            ':' => {
                cur.bump();
                match cur.peek() {
                    Some(':') => {
                        cur.bump();
                        TokenKind::ColonColon
                    }
                    Some('-') => {
                        cur.bump();
                        TokenKind::Neck
                    }
                    _ => {
                        return Err(Error::Lex {
                            at,
                            message: "expected `::` or `:-` after `:`".into(),
                        })
                    }
                }
            }
            '\\' => {
                cur.bump();
                match cur.peek() {
                    Some('+') => {
                        cur.bump();
                        TokenKind::Not
                    }
                    Some('=') => {
                        cur.bump();
                        TokenKind::NotEqual
                    }
                    _ => {
                        return Err(Error::Lex {
                            at,
                            message: "expected `\\+` or `\\=`".into(),
                        })
                    }
                }
            }
            '?' => single(&mut cur, TokenKind::Question),
            ';' => single(&mut cur, TokenKind::Semicolon),
            ',' => single(&mut cur, TokenKind::Comma),
            '(' => single(&mut cur, TokenKind::LParen),
            ')' => single(&mut cur, TokenKind::RParen),
            '[' => single(&mut cur, TokenKind::LBracket),
            ']' => single(&mut cur, TokenKind::RBracket),
            '|' => single(&mut cur, TokenKind::Bar),
            '.' => single(&mut cur, TokenKind::Dot),
            '-' | '0'..='9' => lex_number(&mut cur, at)?,
            c if c.is_ascii_lowercase() => TokenKind::Ident(lex_word(&mut cur)),
            c if c.is_ascii_uppercase() || c == '_' => TokenKind::Variable(lex_word(&mut cur)),
            other => {
                return Err(Error::Lex {
                    at,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        tokens.push(Token { kind, at });
    }
    Ok(tokens)
}

fn single(cur: &mut Cursor<'_>, kind: TokenKind) -> TokenKind {
    cur.bump();
    kind
}

fn lex_word(cur: &mut Cursor<'_>) -> String {
    let mut word = String::new();
    while let Some(c) = cur.peek() {
        if c.is_ascii_alphanumeric() || c == '_' {
            word.push(c);
            cur.bump();
        } else {
            break;
        }
    }
    word
}

fn lex_number(cur: &mut Cursor<'_>, at: Location) -> Result<TokenKind> {
    let mut text = String::new();
    if cur.peek() == Some('-') {
        text.push('-');
        cur.bump();
    }
    let digits = |cur: &mut Cursor<'_>, text: &mut String| {
        let mut any = false;
        while let Some(c) = cur.peek() {
            if c.is_ascii_digit() {
                text.push(c);
                cur.bump();
                any = true;
            } else {
                break;
            }
        }
        any
    };
    if !digits(cur, &mut text) {
        return Err(Error::Lex {
            at,
            message: "expected digits".into(),
        });
    }
    // A `.` is a fraction only when a digit follows; otherwise it ends the clause.
    if cur.peek() == Some('.') {
        let mut ahead = cur.chars.clone();
        ahead.next();
        if ahead.peek().is_some_and(|&(_, c)| c.is_ascii_digit()) {
            text.push('.');
            cur.bump();
            digits(cur, &mut text);
        }
    }
    if matches!(cur.peek(), Some('e' | 'E')) {
        let mut ahead = cur.chars.clone();
        ahead.next();
        let next = ahead.peek().map(|&(_, c)| c);
        let signed_digit = matches!(next, Some('+' | '-')) && {
            ahead.next();
            ahead.peek().is_some_and(|&(_, c)| c.is_ascii_digit())
        };
        if next.is_some_and(|c| c.is_ascii_digit()) || signed_digit {
            text.push('e');
            cur.bump();
            if let Some(sign @ ('+' | '-')) = cur.peek() {
                text.push(sign);
                cur.bump();
            }
            digits(cur, &mut text);
        }
    }
    text.parse::<f64>()
        .map(TokenKind::Number)
        .map_err(|e| Error::Lex {
            at,
            message: format!("bad number `{text}`: {e}"),
        })
}
