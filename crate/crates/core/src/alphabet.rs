//! Alphabets and words.
//!
//! Symbols are arbitrary non-empty tokens without whitespace, so alphabets
//! like `{0, 1}`, `{a, b, c}` or `{@0, @1, go}` are all legal. An [`Alphabet`]
//! keeps its symbols in declaration order; that order is what the text format
//! round-trips and what length-lexicographic word enumeration follows.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Errors raised while building an alphabet or checking words against one.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlphabetError {
    #[error("alphabet must contain at least one symbol")]
    Empty,
    #[error("duplicate symbol `{0}`")]
    Duplicate(String),
    #[error("symbol `{0}` is empty or contains whitespace")]
    Malformed(String),
    #[error("symbol `{0}` is not in the alphabet")]
    UnknownSymbol(String),
}

/// An ordered set of distinct symbol tokens.
#[derive(Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<String>,
    index: HashMap<String, usize>,
}

impl Alphabet {
    /// Builds an alphabet from symbols in declaration order.
    pub fn new<I, S>(symbols: I) -> Result<Self, AlphabetError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(AlphabetError::Empty);
        }
        let mut index = HashMap::new();
        for (i, sym) in symbols.iter().enumerate() {
            if sym.is_empty() || sym.chars().any(char::is_whitespace) {
                return Err(AlphabetError::Malformed(sym.clone()));
            }
            if index.insert(sym.clone(), i).is_some() {
                return Err(AlphabetError::Duplicate(sym.clone()));
            }
        }
        Ok(Alphabet { symbols, index })
    }

    /// The binary alphabet `{0, 1}`.
    pub fn binary() -> Self {
        Alphabet::new(["0", "1"]).expect("binary alphabet is well-formed")
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn contains(&self, symbol: &str) -> bool {
        self.index.contains_key(symbol)
    }

    /// Position of `symbol` in declaration order.
    pub fn position(&self, symbol: &str) -> Option<usize> {
        self.index.get(symbol).copied()
    }

    pub fn symbol(&self, position: usize) -> Option<&str> {
        self.symbols.get(position).map(String::as_str)
    }

    /// True when every symbol of `other` is also a symbol of `self`.
    pub fn is_superset_of(&self, other: &Alphabet) -> bool {
        other.symbols.iter().all(|s| self.contains(s))
    }

    /// Union keeping `self`'s order, then `other`'s new symbols in order.
    pub fn union(&self, other: &Alphabet) -> Alphabet {
        let mut symbols = self.symbols.clone();
        for s in &other.symbols {
            if !self.contains(s) {
                symbols.push(s.clone());
            }
        }
        Alphabet::new(symbols).expect("union of well-formed alphabets is well-formed")
    }

    /// Checks that every symbol of `word` belongs to this alphabet.
    pub fn check_word(&self, word: &Word) -> Result<(), AlphabetError> {
        for sym in word.symbols() {
            if !self.contains(sym) {
                return Err(AlphabetError::UnknownSymbol(sym.clone()));
            }
        }
        Ok(())
    }

    /// All words of length `len` in length-lexicographic symbol order.
    pub fn words_of_length(&self, len: usize) -> Vec<Word> {
        let mut out = vec![Word::empty()];
        for _ in 0..len {
            let mut next = Vec::with_capacity(out.len() * self.len());
            for w in &out {
                for sym in &self.symbols {
                    let mut v = w.0.clone();
                    v.push(sym.clone());
                    next.push(Word(v));
                }
            }
            out = next;
        }
        out
    }

    /// All words of length `<= max_len`, shortest first, lexicographic within
    /// a length (symbol order = declaration order).
    pub fn words_up_to(&self, max_len: usize) -> Vec<Word> {
        let mut out = Vec::new();
        for len in 0..=max_len {
            out.extend(self.words_of_length(len));
        }
        out
    }
}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Alphabet{{{}}}", self.symbols.join(" "))
    }
}

/// A finite sequence of symbols, possibly empty.
///
/// `Display` joins symbols with single spaces; the empty word prints as `-`
/// (and parses back from `-` or from an empty string).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(Vec<String>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new<I, S>(symbols: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Word(symbols.into_iter().map(Into::into).collect())
    }

    /// Splits a whitespace-separated symbol list; `-` denotes the empty word.
    pub fn parse(text: &str) -> Self {
        let text = text.trim();
        if text.is_empty() || text == "-" {
            return Word::empty();
        }
        Word(text.split_whitespace().map(str::to_string).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.0
    }

    pub fn push(&mut self, symbol: impl Into<String>) {
        self.0.push(symbol.into());
    }

    pub fn extend_from(&mut self, other: &Word) {
        self.0.extend(other.0.iter().cloned());
    }

    /// Concatenation.
    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        Word(v)
    }

    pub fn first(&self) -> Option<&str> {
        self.0.first().map(String::as_str)
    }

    /// The word without its first symbol; empty stays empty.
    pub fn tail(&self) -> Word {
        if self.0.is_empty() {
            Word::empty()
        } else {
            Word(self.0[1..].to_vec())
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            write!(f, "-")
        } else {
            write!(f, "{}", self.0.join(" "))
        }
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

impl From<Vec<String>> for Word {
    fn from(v: Vec<String>) -> Self {
        Word(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alphabet_rejects_duplicates_and_whitespace() {
        assert_eq!(
            Alphabet::new(["a", "a"]).unwrap_err(),
            AlphabetError::Duplicate("a".into())
        );
        assert_eq!(
            Alphabet::new(["a b"]).unwrap_err(),
            AlphabetError::Malformed("a b".into())
        );
        assert_eq!(Alphabet::new(Vec::<String>::new()).unwrap_err(), AlphabetError::Empty);
    }

    #[test]
    fn alphabet_keeps_declaration_order() {
        let a = Alphabet::new(["z", "a", "m"]).unwrap();
        assert_eq!(a.symbols(), ["z", "a", "m"]);
        assert_eq!(a.position("m"), Some(2));
    }

    #[test]
    fn word_roundtrip_and_empty_convention() {
        let w = Word::parse("0 1 1");
        assert_eq!(w.len(), 3);
        assert_eq!(w.to_string(), "0 1 1");
        assert_eq!(Word::parse("-"), Word::empty());
        assert_eq!(Word::empty().to_string(), "-");
    }

    #[test]
    fn words_up_to_is_length_lex() {
        let a = Alphabet::binary();
        let ws = a.words_up_to(2);
        let shown: Vec<String> = ws.iter().map(Word::to_string).collect();
        assert_eq!(shown, ["-", "0", "1", "0 0", "0 1", "1 0", "1 1"]);
    }
}
