use std::fmt;
use std::sync::Arc;

use super::SeriesError;

/// Largest truncation degree any series may carry.
pub const MAX_DEGREE: u32 = 10;

/// A noncommuting symbol carrying `grade` powers of the step size.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Generator {
    pub name: String,
    pub grade: u32,
}

impl Generator {
    pub fn new(name: impl Into<String>, grade: u32) -> Self {
        Self {
            name: name.into(),
            grade,
        }
    }
}

/// An ordered set of generators. Generators are kept sorted by name so that
/// letter indices compare in the same order as names.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Alphabet {
    generators: Vec<Generator>,
}

impl Alphabet {
    pub fn new(mut generators: Vec<Generator>) -> Result<Arc<Self>, SeriesError> {
        generators.sort_by(|x, y| x.name.cmp(&y.name));
        for g in &generators {
            if g.grade == 0 {
                return Err(SeriesError::ZeroGrade(g.name.clone()));
            }
        }
        for pair in generators.windows(2) {
            if pair[0].name == pair[1].name {
                return Err(SeriesError::DuplicateGenerator(pair[0].name.clone()));
            }
        }
        if generators.len() > u8::MAX as usize {
            return Err(SeriesError::AlphabetTooLarge(generators.len()));
        }
        Ok(Arc::new(Self { generators }))
    }

    /// `{A:1, B:1}`, the alphabet of the autonomous two-operator model.
    pub fn two_letter() -> Arc<Self> {
        Self::new(vec![Generator::new("A", 1), Generator::new("B", 1)]).expect("valid alphabet")
    }

    /// `{H0:1, H1:2, ..., Hk:k+1}` for `H(t) = H0 + t H1 + ... + t^k Hk`.
    pub fn polynomial_t(max_t_power: u32) -> Arc<Self> {
        let gens = (0..=max_t_power)
            .map(|m| Generator::new(format!("H{m}"), m + 1))
            .collect();
        Self::new(gens).expect("valid alphabet")
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn grade(&self, letter: u8) -> u32 {
        self.generators[letter as usize].grade
    }

    pub fn index_of(&self, name: &str) -> Option<u8> {
        self.generators
            .iter()
            .position(|g| g.name == name)
            .map(|i| i as u8)
    }

    pub fn letter(&self, name: &str) -> Result<u8, SeriesError> {
        self.index_of(name)
            .ok_or_else(|| SeriesError::UnknownGenerator(name.to_string()))
    }

    /// Builds a word from generator names.
    pub fn word(&self, names: &[&str]) -> Result<Word, SeriesError> {
        let letters = names
            .iter()
            .map(|n| self.letter(n))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.word_from_letters(letters))
    }

    pub fn word_from_letters(&self, letters: Vec<u8>) -> Word {
        let degree = letters.iter().map(|&l| self.grade(l)).sum();
        Word { degree, letters }
    }

    /// Concatenated generator names; the empty word renders as `1`.
    pub fn render(&self, word: &Word) -> String {
        if word.letters.is_empty() {
            return "1".to_string();
        }
        word.letters
            .iter()
            .map(|&l| self.generators[l as usize].name.as_str())
            .collect()
    }

    /// Parses a rendered word back (inverse of [`Alphabet::render`]).
    pub fn parse_word(&self, text: &str) -> Result<Word, SeriesError> {
        if text == "1" || text.is_empty() {
            return Ok(Word::empty());
        }
        let mut rest = text;
        let mut letters = Vec::new();
        while !rest.is_empty() {
            // longest-match so that H10 would win over H1
            let (idx, g) = self
                .generators
                .iter()
                .enumerate()
                .filter(|(_, g)| rest.starts_with(g.name.as_str()))
                .max_by_key(|(_, g)| g.name.len())
                .ok_or_else(|| SeriesError::UnknownGenerator(rest.to_string()))?;
            letters.push(idx as u8);
            rest = &rest[g.name.len()..];
        }
        Ok(self.word_from_letters(letters))
    }
}

/// A monomial over an alphabet. Ordering is degree-major, then lexicographic
/// by letter (equivalently by generator name).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word {
    degree: u32,
    letters: Vec<u8>,
}

impl Word {
    pub fn empty() -> Self {
        Self {
            degree: 0,
            letters: Vec::new(),
        }
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn letters(&self) -> &[u8] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = Vec::with_capacity(self.letters.len() + other.letters.len());
        letters.extend_from_slice(&self.letters);
        letters.extend_from_slice(&other.letters);
        Word {
            degree: self.degree + other.degree,
            letters,
        }
    }

    pub fn reversed(&self) -> Word {
        let mut letters = self.letters.clone();
        letters.reverse();
        Word {
            degree: self.degree,
            letters,
        }
    }

    pub(crate) fn push(&mut self, letter: u8, grade: u32) {
        self.letters.push(letter);
        self.degree += grade;
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        for l in &self.letters {
            write!(f, "[{l}]")?;
        }
        Ok(())
    }
}

/// Every word of degree `<= max_degree`, each exactly once, in word order.
pub fn enumerate_words(alphabet: &Alphabet, max_degree: u32) -> Result<Vec<Word>, SeriesError> {
    if alphabet.is_empty() && max_degree > 0 {
        return Err(SeriesError::EmptyAlphabet);
    }
    // by_degree[n] holds all words of degree n
    let mut by_degree: Vec<Vec<Word>> = vec![Vec::new(); max_degree as usize + 1];
    by_degree[0].push(Word::empty());
    for n in 1..=max_degree {
        let mut level = Vec::new();
        for (idx, g) in alphabet.generators().iter().enumerate() {
            if g.grade > n {
                continue;
            }
            for tail in &by_degree[(n - g.grade) as usize] {
                let mut w = Word::empty();
                w.push(idx as u8, g.grade);
                level.push(w.concat(tail));
            }
        }
        level.sort();
        by_degree[n as usize] = level;
    }
    Ok(by_degree.into_iter().flatten().collect())
}
