use serde::Serialize;

use crate::error::{Error, Result};

/// Annotation code for gestures outside the dominant classes.
pub const EXCLUDED_CODE: &str = "X";

/// The ten dominant dissection gesture classes, in canonical order.
pub const DEFAULT_CODES: [&str; 10] = ["c", "h", "k", "m", "p", "r", "s", "a", "g", "e"];

/// Ordered set of gesture class codes.
///
/// The order is canonical for a run: feature names and probability columns
/// are always laid out in alphabet order, never in input-file order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct GestureAlphabet {
    codes: Vec<String>,
}

impl GestureAlphabet {
    pub fn new<I, S>(codes: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let codes: Vec<String> = codes.into_iter().map(Into::into).collect();
        if codes.len() < 2 {
            return Err(Error::Config(format!(
                "alphabet needs at least 2 classes, got {}",
                codes.len()
            )));
        }
        for (i, code) in codes.iter().enumerate() {
            if code.is_empty() || code.chars().any(|c| c == ',' || c == '"' || c.is_whitespace()) {
                return Err(Error::Config(format!("invalid gesture code {code:?}")));
            }
            if code == EXCLUDED_CODE {
                return Err(Error::Config(format!(
                    "{EXCLUDED_CODE:?} is reserved for excluded gestures"
                )));
            }
            if codes[..i].contains(code) {
                return Err(Error::Config(format!("duplicate gesture code {code:?}")));
            }
        }
        Ok(Self { codes })
    }

    /// Parses a comma separated list such as `c,h,k,m`.
    pub fn parse_list(list: &str) -> Result<Self> {
        Self::new(list.split(',').map(str::trim))
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn codes(&self) -> &[String] {
        &self.codes
    }

    pub fn code(&self, index: usize) -> &str {
        &self.codes[index]
    }

    pub fn index_of(&self, code: &str) -> Option<usize> {
        self.codes.iter().position(|c| c == code)
    }
}

impl Default for GestureAlphabet {
    fn default() -> Self {
        Self {
            codes: DEFAULT_CODES.iter().map(|c| c.to_string()).collect(),
        }
    }
}

impl std::fmt::Display for GestureAlphabet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.codes.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_the_ten_dominant_classes() {
        let a = GestureAlphabet::default();
        assert_eq!(a.len(), 10);
        assert_eq!(a.to_string(), "c,h,k,m,p,r,s,a,g,e");
        assert_eq!(a.index_of("p"), Some(4));
        assert_eq!(a.index_of("X"), None);
    }

    #[test]
    fn rejects_bad_alphabets() {
        assert!(GestureAlphabet::parse_list("p").is_err());
        assert!(GestureAlphabet::parse_list("p,s,p").is_err());
        assert!(GestureAlphabet::parse_list("p,X").is_err());
        assert!(GestureAlphabet::parse_list("p,,s").is_err());
        assert!(GestureAlphabet::parse_list("p, s").is_ok());
    }
}
