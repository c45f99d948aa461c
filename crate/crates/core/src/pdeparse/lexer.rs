use crate::symcore::{parse_rational, Rational};

use super::ParseError;

#[derive(Clone, Debug, PartialEq)]
pub enum Tok {
    Num(Rational),
    Ident(String),
    /// `u_xxt`: base identifier and one letter per differentiation.
    Deriv(String, String),
    Punct(char),
    End,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Num(r) => format!("number {r}"),
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Deriv(b, v) => format!("derivative '{b}_{v}'"),
            Tok::Punct(c) => format!("'{c}'"),
            Tok::End => "end of input".into(),
        }
    }
}

/// Token with its character offset.
pub type Spanned = (Tok, usize);

pub fn lex(src: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let value = parse_rational(&text).ok_or_else(|| ParseError::Syntax {
                pos: start,
                expected: "a number".into(),
                found: format!("'{text}'"),
            })?;
            out.push((Tok::Num(value), start));
            continue;
        }
        if c.is_ascii_alphabetic() {
            while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                i += 1;
            }
            let name: String = chars[start..i].iter().collect();
            if chars.get(i) == Some(&'_') {
                let vstart = i + 1;
                let mut j = vstart;
                while j < chars.len() && chars[j].is_ascii_alphabetic() {
                    j += 1;
                }
                if j == vstart {
                    return Err(ParseError::Syntax {
                        pos: vstart,
                        expected: "variable letters after '_'".into(),
                        found: chars.get(vstart).map(|c| format!("'{c}'")).unwrap_or_else(|| "end of input".into()),
                    });
                }
                out.push((Tok::Deriv(name, chars[vstart..j].iter().collect()), start));
                i = j;
            } else {
                out.push((Tok::Ident(name), start));
            }
            continue;
        }
        if "+-*/^()[],=".contains(c) {
            out.push((Tok::Punct(c), start));
            i += 1;
            continue;
        }
        return Err(ParseError::Syntax {
            pos: start,
            expected: "a token".into(),
            found: format!("'{c}'"),
        });
    }
    out.push((Tok::End, chars.len()));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_derivatives_and_numbers() {
        let t = lex("u_xxt + 3/4*D[u,x]").unwrap();
        let kinds: Vec<Tok> = t.into_iter().map(|(t, _)| t).collect();
        assert_eq!(kinds[0], Tok::Deriv("u".into(), "xxt".into()));
        assert_eq!(kinds[2], Tok::Num(crate::symcore::int(3)));
        assert_eq!(kinds[6], Tok::Ident("D".into()));
        assert_eq!(kinds[7], Tok::Punct('['));
    }

    #[test]
    fn reports_position_of_bad_char() {
        match lex("u + $") {
            Err(ParseError::Syntax { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("unexpected {other:?}"),
        }
    }
}
