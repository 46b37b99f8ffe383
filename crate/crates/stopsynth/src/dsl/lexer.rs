use super::ParseDiagnostic;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    /// Rational literal, kept as written.
    Number(String),
    Question,
    LBrace,
    RBrace,
    Arrow,
    Eof,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub line: usize,
    pub column: usize,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("`{s}`"),
            TokenKind::Number(s) => format!("number `{s}`"),
            TokenKind::Question => "`?`".into(),
            TokenKind::LBrace => "`{`".into(),
            TokenKind::RBrace => "`}`".into(),
            TokenKind::Arrow => "`->`".into(),
            TokenKind::Eof => "end of file".into(),
        }
    }
}

/// Splits the text into tokens. Comments run from `#` or `//` to the end of
/// the line. Columns count characters, starting at 1.
pub fn tokenize(text: &str) -> Result<Vec<Token>, ParseDiagnostic> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let start = (line, col);
        let push = |out: &mut Vec<Token>, kind| {
            out.push(Token {
                kind,
                line: start.0,
                column: start.1,
            })
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
        } else if c.is_whitespace() {
            i += 1;
            col += 1;
        } else if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
        } else if c == '{' || c == '}' || c == '?' {
            push(
                &mut out,
                match c {
                    '{' => TokenKind::LBrace,
                    '}' => TokenKind::RBrace,
                    _ => TokenKind::Question,
                },
            );
            i += 1;
            col += 1;
        } else if c == '-' && chars.get(i + 1) == Some(&'>') {
            push(&mut out, TokenKind::Arrow);
            i += 2;
            col += 2;
        } else if c.is_ascii_digit()
            || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            let mut s = String::new();
            while i < chars.len()
                && (chars[i].is_ascii_digit() || chars[i] == '.' || chars[i] == '/')
            {
                s.push(chars[i]);
                i += 1;
                col += 1;
            }
            if i < chars.len() && (chars[i].is_alphabetic() || chars[i] == '_') {
                return Err(ParseDiagnostic::error(
                    format!("malformed number `{s}{}`", chars[i]),
                    start.0,
                    start.1,
                ));
            }
            push(&mut out, TokenKind::Number(s));
        } else if c.is_alphabetic() || c == '_' {
            let mut s = String::new();
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                s.push(chars[i]);
                i += 1;
                col += 1;
            }
            push(&mut out, TokenKind::Ident(s));
        } else {
            return Err(ParseDiagnostic::error(
                format!("unexpected character `{c}`"),
                line,
                col,
            ));
        }
    }
    out.push(Token {
        kind: TokenKind::Eof,
        line,
        column: col,
    });
    Ok(out)
}
