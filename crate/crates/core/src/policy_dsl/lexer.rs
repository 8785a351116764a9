use super::{DslError, Result};

#[derive(Debug, Clone, PartialEq)]
pub(super) enum Tok {
    Ident(String),
    Param(usize),
    Number(f64),
    If,
    Then,
    Else,
    And,
    Or,
    Less,
    Greater,
    EqEq,
    Assign,
    Comma,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Newline,
    Eof,
}

impl Tok {
    pub(super) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Param(i) => format!("parameter `p{i}`"),
            Tok::Number(n) => format!("number `{n}`"),
            Tok::If => "`if`".into(),
            Tok::Then => "`then`".into(),
            Tok::Else => "`else`".into(),
            Tok::And => "`and`".into(),
            Tok::Or => "`or`".into(),
            Tok::Less => "`<`".into(),
            Tok::Greater => "`>`".into(),
            Tok::EqEq => "`==`".into(),
            Tok::Assign => "`=`".into(),
            Tok::Comma => "`,`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Newline => "end of line".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(super) struct Token {
    pub tok: Tok,
    pub line: usize,
    pub column: usize,
}

/// Tokenizes `src`, whose first line is numbered `first_line`. Newlines are
/// emitted as tokens only when `keep_newlines` is set (schema header).
pub(super) fn tokenize(src: &str, first_line: usize, keep_newlines: bool) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut line = first_line;
    let mut col = 1;
    let mut chars = src.chars().peekable();

    while let Some(&c) = chars.peek() {
        let (start_line, start_col) = (line, col);
        let push = |out: &mut Vec<Token>, tok| {
            out.push(Token {
                tok,
                line: start_line,
                column: start_col,
            })
        };
        match c {
            '\n' => {
                chars.next();
                if keep_newlines {
                    push(&mut out, Tok::Newline);
                }
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            '<' | '>' | ',' | '(' | ')' | '[' | ']' => {
                chars.next();
                col += 1;
                let tok = match c {
                    '<' => Tok::Less,
                    '>' => Tok::Greater,
                    ',' => Tok::Comma,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBracket,
                    _ => Tok::RBracket,
                };
                push(&mut out, tok);
            }
            '=' => {
                chars.next();
                col += 1;
                if chars.peek() == Some(&'=') {
                    chars.next();
                    col += 1;
                    push(&mut out, Tok::EqEq);
                } else {
                    push(&mut out, Tok::Assign);
                }
            }
            c if c.is_ascii_digit() || c == '.' || c == '-' => {
                let mut text = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '.' || c == '-' || c == '+' {
                        text.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                let value = text.parse::<f64>().map_err(|_| DslError::Syntax {
                    line: start_line,
                    column: start_col,
                    message: format!("malformed number `{text}`"),
                })?;
                push(&mut out, Tok::Number(value));
            }
            c if c.is_alphabetic() || c == '_' => {
                let mut text = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_alphanumeric() || c == '_' {
                        text.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                let tok = match text.as_str() {
                    "if" => Tok::If,
                    "then" => Tok::Then,
                    "else" => Tok::Else,
                    "and" => Tok::And,
                    "or" => Tok::Or,
                    _ => param_index(&text).map_or(Tok::Ident(text), Tok::Param),
                };
                push(&mut out, tok);
            }
            other => {
                return Err(DslError::Syntax {
                    line,
                    column: col,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

fn param_index(text: &str) -> Option<usize> {
    let digits = text.strip_prefix('p')?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    // `p01` would alias `p1`; only canonical spellings are parameters.
    if digits.len() > 1 && digits.starts_with('0') {
        return None;
    }
    digits.parse().ok()
}
