use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

const BUILTIN_LEXICON: &str = include_str!("../../data/lexicon.tsv");

/// Coarse part-of-speech classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pos {
    Noun,
    Propn,
    Adj,
    Det,
    Verb,
    Adp,
    Punct,
    Other,
}

impl Pos {
    pub fn as_str(self) -> &'static str {
        match self {
            Pos::Noun => "NOUN",
            Pos::Propn => "PROPN",
            Pos::Adj => "ADJ",
            Pos::Det => "DET",
            Pos::Verb => "VERB",
            Pos::Adp => "ADP",
            Pos::Punct => "PUNCT",
            Pos::Other => "OTHER",
        }
    }

    pub fn is_nominal(self) -> bool {
        matches!(self, Pos::Noun | Pos::Propn)
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Pos {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "NOUN" => Pos::Noun,
            "PROPN" => Pos::Propn,
            "ADJ" => Pos::Adj,
            "DET" => Pos::Det,
            "VERB" => Pos::Verb,
            "ADP" => Pos::Adp,
            "PUNCT" => Pos::Punct,
            "OTHER" => Pos::Other,
            other => return Err(Error::InvalidInput(format!("unknown POS tag {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub pos: Pos,
    /// Position within the enclosing EDU.
    pub index: usize,
}

/// Assigns a coarse tag to a single word token.
pub trait Tagger: Send + Sync {
    fn tag_word(&self, surface: &str) -> Pos;
}

/// Lexicon lookup, then suffix rules, then `OTHER`.
#[derive(Debug, Clone, Default)]
pub struct LexiconTagger {
    lexicon: HashMap<String, Pos>,
}

impl LexiconTagger {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN_LEXICON).expect("bundled lexicon is well-formed")
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Parses `surface<TAB>TAG` lines. Blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lexicon = HashMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (surface, tag) = line
                .split_once('\t')
                .ok_or_else(|| Error::line(i + 1, "expected surface<TAB>TAG"))?;
            let pos = tag
                .trim()
                .parse::<Pos>()
                .map_err(|e| Error::line(i + 1, e.to_string()))?;
            lexicon.insert(surface.trim().to_lowercase(), pos);
        }
        Ok(LexiconTagger { lexicon })
    }

    pub fn insert(&mut self, surface: &str, pos: Pos) {
        self.lexicon.insert(surface.to_lowercase(), pos);
    }

    pub fn len(&self) -> usize {
        self.lexicon.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lexicon.is_empty()
    }
}

impl Tagger for LexiconTagger {
    fn tag_word(&self, surface: &str) -> Pos {
        let lower = surface.to_lowercase();
        if let Some(&pos) = self.lexicon.get(&lower) {
            return pos;
        }
        suffix_tag(&lower)
    }
}

fn suffix_tag(lower: &str) -> Pos {
    // Stems shorter than three characters ("her", "fly") are too ambiguous for suffix rules.
    let long_enough = |suffix: &str| lower.len() >= suffix.len() + 3 && lower.ends_with(suffix);
    if ["ness", "ment", "er"].into_iter().any(long_enough) {
        Pos::Noun
    } else {
        Pos::Other
    }
}

fn is_word_char(c: char) -> bool {
    c.is_alphanumeric()
}

fn is_apostrophe(c: char) -> bool {
    c == '\'' || c == '\u{2019}'
}

/// Byte spans of tokens: alphanumeric runs (joined by inner hyphens and
/// apostrophes) and single punctuation characters. A trailing possessive
/// `'s` is split into its own token.
pub(crate) fn token_spans(text: &str) -> Vec<(usize, usize)> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let end_of = |k: usize| chars.get(k).map_or(text.len(), |&(b, _)| b);
    let mut spans = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        let (start, c) = chars[k];
        if c.is_whitespace() {
            k += 1;
            continue;
        }
        if !is_word_char(c) {
            // a detached "'s" stays one token so re-tokenizing split output is stable
            let clitic = is_apostrophe(c)
                && chars
                    .get(k + 1)
                    .is_some_and(|&(_, n)| matches!(n, 's' | 'S'))
                && !chars.get(k + 2).is_some_and(|&(_, n)| is_word_char(n));
            if clitic {
                spans.push((start, end_of(k + 2)));
                k += 2;
                continue;
            }
            spans.push((start, end_of(k + 1)));
            k += 1;
            continue;
        }
        let mut j = k + 1;
        while j < chars.len() {
            let c = chars[j].1;
            let joins = (c == '-' || is_apostrophe(c))
                && chars.get(j + 1).is_some_and(|&(_, n)| is_word_char(n));
            if is_word_char(c) {
                j += 1;
            } else if joins {
                j += 2;
            } else {
                break;
            }
        }
        let end = end_of(j);
        // possessive split: "phone's" -> "phone" + "'s"
        if j - k > 2 && is_apostrophe(chars[j - 2].1) && matches!(chars[j - 1].1, 's' | 'S') {
            let split = chars[j - 2].0;
            spans.push((start, split));
            spans.push((split, end));
        } else {
            spans.push((start, end));
        }
        k = j;
    }
    spans
}

pub(crate) fn is_word(surface: &str) -> bool {
    surface.chars().any(is_word_char)
}

pub(crate) fn tag_surface(surface: &str, tagger: &dyn Tagger) -> Pos {
    if is_word(surface) {
        tagger.tag_word(surface)
    } else {
        Pos::Punct
    }
}

/// Tokenizes on whitespace and punctuation and tags every token.
pub fn tag_tokens(text: &str, tagger: &dyn Tagger) -> Result<Vec<Token>> {
    let spans = token_spans(text);
    if spans.is_empty() {
        return Err(Error::InvalidInput("cannot tag empty text".into()));
    }
    Ok(spans
        .into_iter()
        .enumerate()
        .map(|(index, (s, e))| {
            let surface = &text[s..e];
            Token {
                surface: surface.to_string(),
                pos: tag_surface(surface, tagger),
                index,
            }
        })
        .collect())
}
