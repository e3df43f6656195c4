use super::{Diagnostic, DiagnosticKind, SourceSpan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Ident(String),
    Int(usize),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Semi,
    Dot,
    Assign,   // :=
    EqEq,     // ==
    NotEq,    // !=
    Eq,       // =
    AndAnd,   // &&
    OrOr,     // ||
    Bang,     // !
    Arrow,    // ->
    LArrow,   // <-
    BiArrow,  // <->
    Eof,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Eof => "end of input".into(),
            other => format!("`{}`", other.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Colon => ":",
            Tok::Semi => ";",
            Tok::Dot => ".",
            Tok::Assign => ":=",
            Tok::EqEq => "==",
            Tok::NotEq => "!=",
            Tok::Eq => "=",
            Tok::AndAnd => "&&",
            Tok::OrOr => "||",
            Tok::Bang => "!",
            Tok::Arrow => "->",
            Tok::LArrow => "<-",
            Tok::BiArrow => "<->",
            Tok::Ident(_) | Tok::Int(_) | Tok::Eof => "",
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub span: SourceSpan,
}

pub(crate) fn lex(text: &str, file: &str) -> Result<Vec<Token>, Diagnostic> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let (mut i, mut line, mut line_start) = (0usize, 1usize, 0usize);
    let span = |start: usize, end: usize, line: usize, line_start: usize| SourceSpan {
        file: file.to_string(),
        line,
        col_start: start - line_start + 1,
        col_end: end - line_start + 1,
        start,
        end,
    };
    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            i += 1;
            line += 1;
            line_start = i;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if text[i..].starts_with("//") {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let tok = if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            Tok::Ident(text[start..i].to_string())
        } else if c.is_ascii_digit() {
            while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                i += 1;
            }
            let s = &text[start..i];
            match s.parse() {
                Ok(n) => Tok::Int(n),
                Err(_) => Tok::Ident(s.to_string()),
            }
        } else {
            let rest = &text[i..];
            let table: [(&str, Tok); 20] = [
                ("<->", Tok::BiArrow),
                (":=", Tok::Assign),
                ("==", Tok::EqEq),
                ("!=", Tok::NotEq),
                ("&&", Tok::AndAnd),
                ("||", Tok::OrOr),
                ("->", Tok::Arrow),
                ("<-", Tok::LArrow),
                ("{", Tok::LBrace),
                ("}", Tok::RBrace),
                ("(", Tok::LParen),
                (")", Tok::RParen),
                ("[", Tok::LBracket),
                ("]", Tok::RBracket),
                (",", Tok::Comma),
                (":", Tok::Colon),
                (";", Tok::Semi),
                (".", Tok::Dot),
                ("=", Tok::Eq),
                ("!", Tok::Bang),
            ];
            match table.iter().find(|(s, _)| rest.starts_with(s)) {
                Some((s, t)) => {
                    i += s.len();
                    t.clone()
                }
                None => {
                    let ch = rest.chars().next().expect("nonempty");
                    return Err(Diagnostic {
                        kind: DiagnosticKind::Lexical,
                        message: format!("unexpected character `{ch}`"),
                        span: span(start, start + ch.len_utf8(), line, line_start),
                    });
                }
            }
        };
        out.push(Token {
            tok,
            span: span(start, i, line, line_start),
        });
    }
    out.push(Token {
        tok: Tok::Eof,
        span: span(text.len(), text.len(), line, line_start),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn longest_match_and_spans() {
        let toks = lex("a <-> b // c\n  x := 3", "t").unwrap();
        let kinds: Vec<_> = toks.iter().map(|t| t.tok.clone()).collect();
        assert_eq!(
            kinds,
            vec![
                Tok::Ident("a".into()),
                Tok::BiArrow,
                Tok::Ident("b".into()),
                Tok::Ident("x".into()),
                Tok::Assign,
                Tok::Int(3),
                Tok::Eof
            ]
        );
        assert_eq!(toks[3].span.line, 2);
        assert_eq!(toks[3].span.col_start, 3);
    }

    #[test]
    fn stray_character() {
        let err = lex("a # b", "t").unwrap_err();
        assert_eq!(err.kind, DiagnosticKind::Lexical);
        assert_eq!(err.span.col_start, 3);
    }
}
