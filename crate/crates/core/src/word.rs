//! Free-group words and necklaces. Letter 2i is generator i, letter 2i+1 its inverse.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Letter = u8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("word is conjugate to the identity")]
    EmptyAfterReduction,
    #[error("cannot parse word {0:?}")]
    Parse(String),
    #[error("letter {0} outside an alphabet of {1} generators")]
    LetterOutOfRange(Letter, usize),
}

#[inline]
pub fn inverse_letter(l: Letter) -> Letter {
    l ^ 1
}

pub fn letter_char(l: Letter) -> char {
    let base = b'a' + l / 2;
    if l % 2 == 0 {
        base as char
    } else {
        base.to_ascii_uppercase() as char
    }
}

fn write_letters(f: &mut fmt::Formatter<'_>, letters: &[Letter]) -> fmt::Result {
    if letters.is_empty() {
        return write!(f, "e");
    }
    for &l in letters {
        write!(f, "{}", letter_char(l))?;
    }
    Ok(())
}

/// A freely reduced word.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word {
    letters: Vec<Letter>,
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_letters(f, &self.letters)
    }
}

impl Word {
    /// Freely reduces the given letters.
    pub fn new(letters: &[Letter]) -> Self {
        let mut out: Vec<Letter> = Vec::with_capacity(letters.len());
        for &l in letters {
            if out.last() == Some(&inverse_letter(l)) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        Word { letters: out }
    }

    /// Parses "abA", "a b a^-1" or "a b a⁻¹"; uppercase letters are inverses.
    pub fn parse(s: &str) -> Result<Self, WordError> {
        let mut letters = Vec::new();
        let mut chars = s.chars().peekable();
        while let Some(ch) = chars.next() {
            if ch.is_whitespace() || ch == '*' || ch == '·' {
                continue;
            }
            if !ch.is_ascii_alphabetic() {
                return Err(WordError::Parse(s.to_string()));
            }
            let idx = (ch.to_ascii_lowercase() as u8 - b'a') * 2;
            let mut l = if ch.is_ascii_uppercase() { idx + 1 } else { idx };
            let rest: String = chars.clone().take(3).collect();
            if rest.starts_with("^-1") {
                chars.nth(2);
                l = inverse_letter(l);
            } else if rest.starts_with("⁻¹") {
                chars.nth(1);
                l = inverse_letter(l);
            }
            letters.push(l);
        }
        Ok(Word::new(&letters))
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn max_letter(&self) -> Option<Letter> {
        self.letters.iter().copied().max()
    }

    pub fn inverse(&self) -> Self {
        Word { letters: self.letters.iter().rev().map(|&l| inverse_letter(l)).collect() }
    }

    pub fn concat(&self, o: &Word) -> Self {
        let mut v = self.letters.clone();
        v.extend_from_slice(&o.letters);
        Word::new(&v)
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.letters.first(), self.letters.last()) {
            (Some(&f), Some(&l)) => self.letters.len() == 1 || f != inverse_letter(l),
            _ => true,
        }
    }

    /// (u, c) with self = u c u^{-1} and c cyclically reduced.
    pub fn cyclic_reduction(&self) -> (Word, Word) {
        let n = self.letters.len();
        let mut i = 0;
        while 2 * i + 1 < n && self.letters[i] == inverse_letter(self.letters[n - 1 - i]) {
            i += 1;
        }
        (Word { letters: self.letters[..i].to_vec() }, Word { letters: self.letters[i..n - i].to_vec() })
    }
}

/// Start index of the lexicographically least rotation.
pub fn least_rotation(s: &[Letter]) -> usize {
    let n = s.len();
    if n == 0 {
        return 0;
    }
    let (mut i, mut j, mut k) = (0usize, 1usize, 0usize);
    while i < n && j < n && k < n {
        let a = s[(i + k) % n];
        let b = s[(j + k) % n];
        if a == b {
            k += 1;
            continue;
        }
        if a > b {
            i += k + 1;
        } else {
            j += k + 1;
        }
        if i == j {
            j += 1;
        }
        k = 0;
    }
    i.min(j)
}

/// Smallest p dividing n such that s is p-periodic.
pub fn primitive_period(s: &[Letter]) -> usize {
    let n = s.len();
    if n == 0 {
        return 0;
    }
    let mut fail = vec![0usize; n + 1];
    let mut k = 0usize;
    for i in 1..n {
        while k > 0 && s[i] != s[k] {
            k = fail[k];
        }
        if s[i] == s[k] {
            k += 1;
        }
        fail[i + 1] = k;
    }
    let p = n - fail[n];
    if n % p == 0 {
        p
    } else {
        n
    }
}

/// Whether the cyclic word is its own least rotation.
pub fn is_least_rotation(s: &[Letter]) -> bool {
    least_rotation(s) == 0 || {
        let r = least_rotation(s);
        let n = s.len();
        (0..n).all(|k| s[k] == s[(r + k) % n])
    }
}

/// A cyclically reduced word in canonical (least) rotation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Necklace {
    letters: Vec<Letter>,
    primitive: bool,
}

impl fmt::Display for Necklace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_letters(f, &self.letters)
    }
}

impl Necklace {
    /// Builds from letters already cyclically reduced and in least rotation.
    pub fn from_canonical(letters: Vec<Letter>) -> Self {
        let primitive = primitive_period(&letters) == letters.len();
        Necklace { letters, primitive }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_primitive(&self) -> bool {
        self.primitive
    }

    pub fn word(&self) -> Word {
        Word { letters: self.letters.clone() }
    }

    /// Necklace of the inverse class.
    pub fn inverse(&self) -> Necklace {
        necklace_canonical(&self.word().inverse()).expect("inverse of a nonempty necklace")
    }
}

pub fn necklace_canonical(w: &Word) -> Result<Necklace, WordError> {
    let (_, core) = w.cyclic_reduction();
    if core.is_empty() {
        return Err(WordError::EmptyAfterReduction);
    }
    let s = core.letters();
    let r = least_rotation(s);
    let mut letters = Vec::with_capacity(s.len());
    letters.extend_from_slice(&s[r..]);
    letters.extend_from_slice(&s[..r]);
    Ok(Necklace::from_canonical(letters))
}

/// Iterator over all freely reduced words of length n on k generators, in lexicographic
/// letter order.
pub struct ReducedWords {
    k2: Letter,
    cur: Option<Vec<Letter>>,
}

fn next_reduced(k2: Letter, w: &mut [Letter]) -> bool {
    let n = w.len();
    let mut i = n;
    loop {
        if i == 0 {
            return false;
        }
        i -= 1;
        let mut l = w[i] + 1;
        if i > 0 && l == inverse_letter(w[i - 1]) {
            l += 1;
        }
        if l < k2 {
            w[i] = l;
            for j in i + 1..n {
                w[j] = if inverse_letter(w[j - 1]) == 0 { 1 } else { 0 };
            }
            return true;
        }
    }
}

impl Iterator for ReducedWords {
    type Item = Word;
    fn next(&mut self) -> Option<Word> {
        let cur = self.cur.as_mut()?;
        let out = Word { letters: cur.clone() };
        if !next_reduced(self.k2, cur) {
            self.cur = None;
        }
        Some(out)
    }
}

pub fn reduced_words(k: usize, n: usize) -> ReducedWords {
    if k == 0 || n == 0 {
        return ReducedWords { k2: 0, cur: None };
    }
    let mut first = vec![0 as Letter; n];
    for j in 1..n {
        first[j] = if inverse_letter(first[j - 1]) == 0 { 1 } else { 0 };
    }
    ReducedWords { k2: (2 * k) as Letter, cur: Some(first) }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_of_reduced_words() {
        assert_eq!(reduced_words(2, 1).count(), 4);
        assert_eq!(reduced_words(2, 2).count(), 12);
        assert_eq!(reduced_words(2, 5).count(), 324);
        assert_eq!(reduced_words(3, 3).count(), 6 * 25);
        let v: Vec<Word> = reduced_words(2, 3).collect();
        assert!(v.windows(2).all(|p| p[0] < p[1]));
        assert!(v.iter().all(|w| w.len() == 3 && Word::new(w.letters()) == *w));
    }

    #[test]
    fn necklace_examples() {
        let n = necklace_canonical(&Word::parse("ab").unwrap()).unwrap();
        assert_eq!(n.to_string(), "ab");
        assert!(n.is_primitive());
        assert_eq!(necklace_canonical(&Word::parse("ba").unwrap()).unwrap(), n);
        let sq = necklace_canonical(&Word::parse("abab").unwrap()).unwrap();
        assert!(!sq.is_primitive());
        let c = necklace_canonical(&Word::parse("a b a^-1").unwrap()).unwrap();
        assert_eq!(c.to_string(), "b");
        assert_eq!(Word::parse("a b a⁻¹").unwrap(), Word::parse("abA").unwrap());
        assert_eq!(necklace_canonical(&Word::parse("abBA").unwrap()), Err(WordError::EmptyAfterReduction));
    }

    #[test]
    fn least_rotation_matches_brute_force() {
        let s: Vec<Letter> = vec![2, 0, 3, 0, 2, 0, 3];
        let n = s.len();
        let best = (0..n)
            .map(|r| s[r..].iter().chain(&s[..r]).copied().collect::<Vec<_>>())
            .min()
            .unwrap();
        let r = least_rotation(&s);
        let got: Vec<Letter> = s[r..].iter().chain(&s[..r]).copied().collect();
        assert_eq!(got, best);
    }
}
