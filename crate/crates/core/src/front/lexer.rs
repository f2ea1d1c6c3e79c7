//! Tokens of ConQuer text. Multi-word keywords are merged here; names are left as
//! plain words and resolved against the name tables by the parser.

use std::fmt;

/// Upper-case keyword phrases, matched longest first.
pub const KEYWORDS: &[&str] = &[
    "AND ALSO",
    "AND",
    "AS",
    "ASCENDING",
    "BUT NOT",
    "DESCENDING",
    "DISTINCT",
    "DOES NOT EQUAL",
    "EACH",
    "ELSE",
    "EQUALS",
    "EXCLUSIVE OR",
    "FROM",
    "GROUPED BY",
    "HEAD",
    "IF",
    "IFF",
    "IMPLIES",
    "IN",
    "INTERSECTED WITH",
    "IS",
    "IS A SUBSET OF",
    "IS A SUBSET OF OR EQUAL TO",
    "IS A SUPERSET OF",
    "IS A SUPERSET OF OR EQUAL TO",
    "IS DISJOINT FROM",
    "IS EQUAL TO",
    "IS GREATER THAN",
    "IS GREATER THAN OR EQUAL TO",
    "IS LESS THAN",
    "IS LESS THAN OR EQUAL TO",
    "IS NOT EQUAL TO",
    "LIST",
    "MATCHING ALL",
    "MINUS",
    "MISSING",
    "NOT",
    "OF",
    "ONLY",
    "OR",
    "OR OTHERWISE",
    "ORDERED",
    "ORDERED WITH",
    "OTHERWISE",
    "SELECT",
    "SOME",
    "TAIL",
    "THAT INCLUDES ALL",
    "THE AVERAGE",
    "THE AVERAGE OF",
    "THE COUNT OF",
    "THE DISTINCT COUNT OF",
    "THE DISTINCT SUM OF",
    "THE MAXIMUM",
    "THE MAXIMUM OF",
    "THE MINIMUM",
    "THE MINIMUM OF",
    "THE PATH FROM",
    "THE REVERSE OF",
    "THE SUM OF",
    "THEN",
    "TO",
    "UNITED WITH",
    "VIA",
    "WHERE",
    "WHICH ARE ALL IN",
    "WITH",
];

const SYMBOLS: &[&str] = &[
    "<=>", "<=", ">=", "<>", "=>", "=", "<", ">", "+", "-", "*", "/", "&", "|", "~", ":", "!", "[", "]", "(", ")", ",",
    ";", ".",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Word(String),
    Keyword(&'static str),
    /// Decimal literal as written.
    Num(String),
    Str(String),
    Sym(&'static str),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
    /// Whitespace (or the start of input) precedes the token.
    pub spaced: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {msg}")]
pub struct LexError {
    pub msg: String,
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => f.write_str(w),
            Tok::Keyword(k) => f.write_str(k),
            Tok::Num(n) => f.write_str(n),
            Tok::Str(s) => write!(f, "'{}'", s.replace('\'', "''")),
            Tok::Sym(s) => f.write_str(s),
        }
    }
}

fn is_word_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_upper_word(w: &str) -> bool {
    w.chars().all(|c| c.is_ascii_uppercase())
}

pub fn tokenize(text: &str) -> Result<Vec<Token>, LexError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out: Vec<Token> = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let mut spaced = true;
    // raw words are collected first so keyword phrases can span several of them
    let mut pending: Vec<(String, usize, usize, bool)> = Vec::new();

    fn flush(pending: &mut Vec<(String, usize, usize, bool)>, out: &mut Vec<Token>) {
        let mut k = 0;
        while k < pending.len() {
            let mut matched = None;
            if is_upper_word(&pending[k].0) {
                for n in (1..=pending.len() - k).rev() {
                    let phrase: Vec<&str> = pending[k..k + n].iter().map(|w| w.0.as_str()).collect();
                    let phrase = phrase.join(" ");
                    if let Some(kw) = KEYWORDS.iter().find(|kw| **kw == phrase) {
                        matched = Some((*kw, n));
                        break;
                    }
                }
            }
            let (w, line, col, spaced) = pending[k].clone();
            match matched {
                Some((kw, n)) => {
                    out.push(Token { tok: Tok::Keyword(kw), line, col, spaced });
                    k += n;
                }
                None => {
                    out.push(Token { tok: Tok::Word(w), line, col, spaced });
                    k += 1;
                }
            }
        }
        pending.clear();
    }

    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            i += 1;
            spaced = true;
            continue;
        }
        let (tline, tcol) = (line, col);
        if is_word_start(c) {
            let start = i;
            while i < chars.len()
                && (chars[i].is_alphanumeric()
                    || chars[i] == '_'
                    || (chars[i] == '-' && i + 1 < chars.len() && is_word_start(chars[i + 1])))
            {
                i += 1;
            }
            let w: String = chars[start..i].iter().collect();
            col += i - start;
            pending.push((w, tline, tcol, spaced));
            spaced = false;
            continue;
        }
        flush(&mut pending, &mut out);
        let prev_is_operand = !spaced
            && matches!(
                out.last().map(|t| &t.tok),
                Some(Tok::Word(_) | Tok::Num(_) | Tok::Str(_) | Tok::Sym(")") | Tok::Sym("]"))
            );
        if c.is_ascii_digit() || (c == '-' && !prev_is_operand && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            i += 1;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let n: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token { tok: Tok::Num(n), line: tline, col: tcol, spaced });
            spaced = false;
            continue;
        }
        if c == '\'' || c == '"' {
            let q = c;
            let mut s = String::new();
            i += 1;
            col += 1;
            loop {
                match chars.get(i) {
                    None => {
                        return Err(LexError { msg: "unterminated string".into(), line: tline, col: tcol });
                    }
                    Some(&d) if d == q => {
                        if chars.get(i + 1) == Some(&q) {
                            s.push(q);
                            i += 2;
                            col += 2;
                        } else {
                            i += 1;
                            col += 1;
                            break;
                        }
                    }
                    Some(&d) => {
                        if d == '\n' {
                            line += 1;
                            col = 1;
                        } else {
                            col += 1;
                        }
                        s.push(d);
                        i += 1;
                    }
                }
            }
            out.push(Token { tok: Tok::Str(s), line: tline, col: tcol, spaced });
            spaced = false;
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 3)].iter().collect();
        match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
            Some(sym) => {
                i += sym.len();
                col += sym.len();
                out.push(Token { tok: Tok::Sym(sym), line: tline, col: tcol, spaced });
                spaced = false;
            }
            None => {
                return Err(LexError { msg: format!("illegal character '{c}'"), line: tline, col: tcol });
            }
        }
    }
    flush(&mut pending, &mut out);
    Ok(out)
}
