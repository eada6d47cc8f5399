use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uppercase letters and digits without the glyphs people confuse when
/// transcribing at a glance: `0/O` and `1/I/L`.
pub const DEFAULT_ALPHABET: &str = "ABCDEFGHJKMNPQRSTUVWXYZ23456789";

/// Number of characters in every triplet code.
pub const CODE_LEN: usize = 3;

/// The character set codes are drawn from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Alphabet {
    chars: Vec<char>,
}

impl Alphabet {
    pub fn new(chars: &str) -> Result<Self> {
        let mut seen = Vec::new();
        for c in chars.chars() {
            let c = c.to_ascii_uppercase();
            if !c.is_ascii_alphanumeric() {
                return Err(Error::param(format!("alphabet character {c:?} is not alphanumeric")));
            }
            if seen.contains(&c) {
                return Err(Error::param(format!("alphabet repeats {c:?}")));
            }
            seen.push(c);
        }
        if seen.len() < 2 {
            return Err(Error::param("alphabet needs at least two characters"));
        }
        Ok(Alphabet { chars: seen })
    }

    pub fn len(&self) -> usize {
        self.chars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chars.is_empty()
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }

    pub fn contains(&self, c: char) -> bool {
        self.chars.contains(&c)
    }

    /// Number of distinct codes.
    pub fn capacity(&self) -> usize {
        self.len().pow(CODE_LEN as u32)
    }

    /// The `index`-th code in lexicographic order.
    pub fn code(&self, index: usize) -> String {
        debug_assert!(index < self.capacity());
        let n = self.len();
        let mut rest = index;
        let mut out = [' '; CODE_LEN];
        for slot in out.iter_mut().rev() {
            *slot = self.chars[rest % n];
            rest /= n;
        }
        out.iter().collect()
    }

    pub fn is_code(&self, s: &str) -> bool {
        s.chars().count() == CODE_LEN && s.chars().all(|c| self.contains(c))
    }
}

impl Default for Alphabet {
    fn default() -> Self {
        Alphabet::new(DEFAULT_ALPHABET).expect("default alphabet is valid")
    }
}

impl TryFrom<String> for Alphabet {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        Alphabet::new(&s)
    }
}

impl From<Alphabet> for String {
    fn from(a: Alphabet) -> String {
        a.chars.into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_excludes_confusables() {
        let a = Alphabet::default();
        for c in ['0', 'O', '1', 'I', 'L'] {
            assert!(!a.contains(c));
        }
        assert_eq!(a.len(), 31);
        assert_eq!(a.capacity(), 29_791);
    }

    #[test]
    fn codes_enumerate_lexicographically() {
        let a = Alphabet::new("AB").unwrap();
        let all: Vec<_> = (0..a.capacity()).map(|i| a.code(i)).collect();
        assert_eq!(all[0], "AAA");
        assert_eq!(all[1], "AAB");
        assert_eq!(all[7], "BBB");
    }

    #[test]
    fn rejects_duplicates() {
        assert!(Alphabet::new("ABA").is_err());
    }
}
