//! Star words `T^{ε1}(u1)…T^{εm}(um)` and their text syntax.
//!
//! A word is written as comma-separated tokens, `*<label>` for a starred
//! letter and `<label>` otherwise, e.g. `*1,1,*1,1`.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest label accepted by the parser.
pub const MAX_LABEL: u32 = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StarLetter {
    pub starred: bool,
    pub label: u32,
}

impl StarLetter {
    pub fn star(label: u32) -> Self {
        StarLetter {
            starred: true,
            label,
        }
    }

    pub fn plain(label: u32) -> Self {
        StarLetter {
            starred: false,
            label,
        }
    }

    pub fn adjoint(self) -> Self {
        StarLetter {
            starred: !self.starred,
            label: self.label,
        }
    }
}

impl fmt::Display for StarLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.starred {
            write!(f, "*{}", self.label)
        } else {
            write!(f, "{}", self.label)
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StarWord {
    letters: Vec<StarLetter>,
}

impl StarWord {
    pub fn new(letters: Vec<StarLetter>) -> Self {
        StarWord { letters }
    }

    /// `(T*T)^n` with a single label: `*1,1,*1,1,…`.
    pub fn tt_power(n: usize) -> Self {
        let letters = (0..n)
            .flat_map(|_| [StarLetter::star(1), StarLetter::plain(1)])
            .collect();
        StarWord { letters }
    }

    /// `T^k` with a single label, no stars.
    pub fn plain_power(k: usize) -> Self {
        StarWord {
            letters: vec![StarLetter::plain(1); k],
        }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[StarLetter] {
        &self.letters
    }

    /// Letter at 1-based position `pos`.
    pub fn at(&self, pos: usize) -> StarLetter {
        self.letters[pos - 1]
    }

    pub fn labels(&self) -> BTreeSet<u32> {
        self.letters.iter().map(|l| l.label).collect()
    }

    /// The word of the adjoint operator: reversed, every star flipped.
    pub fn adjoint(&self) -> Self {
        StarWord {
            letters: self.letters.iter().rev().map(|l| l.adjoint()).collect(),
        }
    }
}

impl FromStr for StarWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(StarWord::default());
        }
        let letters = s
            .split(',')
            .map(|tok| {
                let tok = tok.trim();
                let (starred, digits) = match tok.strip_prefix('*') {
                    Some(rest) => (true, rest.trim()),
                    None => (false, tok),
                };
                let label: u32 = digits
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad word token {tok:?}")))?;
                if label > MAX_LABEL {
                    return Err(Error::Parse(format!("label {label} exceeds {MAX_LABEL}")));
                }
                Ok(StarLetter { starred, label })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(StarWord { letters })
    }
}

impl fmt::Display for StarWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, l) in self.letters.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_print() {
        let w: StarWord = "*1,1, *2 ,2".parse().unwrap();
        assert_eq!(
            w.letters(),
            &[
                StarLetter::star(1),
                StarLetter::plain(1),
                StarLetter::star(2),
                StarLetter::plain(2)
            ]
        );
        assert_eq!(w.to_string(), "*1,1,*2,2");
        assert_eq!("".parse::<StarWord>().unwrap().len(), 0);
    }

    #[test]
    fn parse_errors() {
        assert!("*".parse::<StarWord>().is_err());
        assert!("1,,1".parse::<StarWord>().is_err());
        assert!("a".parse::<StarWord>().is_err());
        assert!("-1".parse::<StarWord>().is_err());
        assert!("99999999".parse::<StarWord>().is_err());
    }

    #[test]
    fn tt_power_and_adjoint() {
        assert_eq!(StarWord::tt_power(2).to_string(), "*1,1,*1,1");
        let w: StarWord = "*1,2,1".parse().unwrap();
        assert_eq!(w.adjoint().to_string(), "*1,*2,1");
        assert_eq!(w.adjoint().adjoint(), w);
        // (T*T)^n is self-adjoint
        assert_eq!(StarWord::tt_power(3).adjoint(), StarWord::tt_power(3));
    }
}
