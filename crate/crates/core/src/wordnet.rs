//! WordNet 3.0 database files (`index.*`, `data.*`) and POS-keyed synonym
//! lookup.
//!
//! Files are parsed line by line and keyed by the offset printed at the start
//! of each data line, so the loader never seeks by byte offset.

use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WnPos {
    Noun,
    Verb,
    Adjective,
    Adverb,
}

impl WnPos {
    pub const ALL: [WnPos; 4] = [WnPos::Noun, WnPos::Verb, WnPos::Adjective, WnPos::Adverb];

    /// Database file suffix, as in `index.adj`.
    pub fn file_suffix(&self) -> &'static str {
        match self {
            WnPos::Noun => "noun",
            WnPos::Verb => "verb",
            WnPos::Adjective => "adj",
            WnPos::Adverb => "adv",
        }
    }

    /// The `pos` letter used in index lines.
    pub fn code(&self) -> char {
        match self {
            WnPos::Noun => 'n',
            WnPos::Verb => 'v',
            WnPos::Adjective => 'a',
            WnPos::Adverb => 'r',
        }
    }

    fn accepts_ss_type(&self, ss_type: &str) -> bool {
        match self {
            WnPos::Noun => ss_type == "n",
            WnPos::Verb => ss_type == "v",
            WnPos::Adjective => ss_type == "a" || ss_type == "s",
            WnPos::Adverb => ss_type == "r",
        }
    }
}

impl fmt::Display for WnPos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.file_suffix())
    }
}

/// Universal POS tag to WordNet category.
pub fn map_pos(upos: &str) -> Option<WnPos> {
    match upos {
        "NOUN" => Some(WnPos::Noun),
        "VERB" | "AUX" => Some(WnPos::Verb),
        "ADJ" => Some(WnPos::Adjective),
        "ADV" => Some(WnPos::Adverb),
        _ => None,
    }
}

#[derive(Debug, Error)]
pub enum WordNetError {
    #[error("missing WordNet files in {dir}: {}", files.join(", "))]
    MissingFiles { dir: String, files: Vec<String> },

    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },

    #[error("{path}:{line}: {message}")]
    Malformed { path: String, line: usize, message: String },

    #[error("{path}:{line}: synset offset {offset:08} not found in data.{pos}")]
    DanglingOffset {
        path: String,
        line: usize,
        offset: u32,
        pos: WnPos,
    },
}

/// A synonym and the synset it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Synonym {
    pub lemma: String,
    pub offset: u32,
    pub pos: WnPos,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WordNetStore {
    /// (lowercase lemma with `_` for spaces, pos) → synset offsets in index order.
    lemma_index: HashMap<(String, WnPos), Vec<u32>>,
    /// (offset, pos) → member lemmas in file order, adjective markers stripped.
    synsets: HashMap<(u32, WnPos), Vec<String>>,
}

fn malformed(path: &Path, line: usize, message: impl Into<String>) -> WordNetError {
    WordNetError::Malformed {
        path: path.display().to_string(),
        line,
        message: message.into(),
    }
}

fn read(path: &Path) -> Result<String, WordNetError> {
    std::fs::read_to_string(path).map_err(|source| WordNetError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// License header lines start with two spaces.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.starts_with("  ") && !l.trim().is_empty())
}

fn parse_offset(field: &str) -> Option<u32> {
    if field.len() == 8 && field.bytes().all(|b| b.is_ascii_digit()) {
        field.parse().ok()
    } else {
        None
    }
}

/// Strips the `(a)`, `(p)`, `(ip)` syntactic markers found on adjectives.
fn strip_marker(word: &str) -> &str {
    for marker in ["(a)", "(p)", "(ip)"] {
        if let Some(w) = word.strip_suffix(marker) {
            return w;
        }
    }
    word
}

impl WordNetStore {
    pub fn load(dir: &Path) -> Result<Self, WordNetError> {
        let mut missing = Vec::new();
        for pos in WnPos::ALL {
            for kind in ["index", "data"] {
                let name = format!("{kind}.{}", pos.file_suffix());
                if !dir.join(&name).is_file() {
                    missing.push(name);
                }
            }
        }
        if !missing.is_empty() {
            return Err(WordNetError::MissingFiles {
                dir: dir.display().to_string(),
                files: missing,
            });
        }
        let mut store = WordNetStore::default();
        for pos in WnPos::ALL {
            store.load_data(&dir.join(format!("data.{}", pos.file_suffix())), pos)?;
        }
        for pos in WnPos::ALL {
            store.load_index(&dir.join(format!("index.{}", pos.file_suffix())), pos)?;
        }
        Ok(store)
    }

    fn load_data(&mut self, path: &Path, pos: WnPos) -> Result<(), WordNetError> {
        let text = read(path)?;
        for (line_no, line) in content_lines(&text) {
            let mut fields = line.split_ascii_whitespace();
            let mut next = |what: &str| {
                fields
                    .next()
                    .ok_or_else(|| malformed(path, line_no, format!("missing {what}")))
            };
            let offset_field = next("synset_offset")?;
            let offset = parse_offset(offset_field)
                .ok_or_else(|| malformed(path, line_no, format!("bad synset offset `{offset_field}`")))?;
            let lex_filenum = next("lex_filenum")?;
            if lex_filenum.len() != 2 || !lex_filenum.bytes().all(|b| b.is_ascii_digit()) {
                return Err(malformed(path, line_no, format!("bad lex_filenum `{lex_filenum}`")));
            }
            let ss_type = next("ss_type")?;
            if !pos.accepts_ss_type(ss_type) {
                return Err(malformed(
                    path,
                    line_no,
                    format!("ss_type `{ss_type}` does not belong in data.{pos}"),
                ));
            }
            let w_cnt_field = next("w_cnt")?;
            let w_cnt = u32::from_str_radix(w_cnt_field, 16)
                .map_err(|_| malformed(path, line_no, format!("bad w_cnt `{w_cnt_field}`")))?;
            if w_cnt == 0 {
                return Err(malformed(path, line_no, "synset without words"));
            }
            let mut words = Vec::with_capacity(w_cnt as usize);
            for _ in 0..w_cnt {
                let word = next("word")?;
                let lex_id = next("lex_id")?;
                if u8::from_str_radix(lex_id, 16).is_err() {
                    return Err(malformed(path, line_no, format!("bad lex_id `{lex_id}`")));
                }
                words.push(strip_marker(word).to_string());
            }
            if self.synsets.insert((offset, pos), words).is_some() {
                return Err(malformed(
                    path,
                    line_no,
                    format!("duplicate synset offset {offset_field}"),
                ));
            }
        }
        Ok(())
    }

    fn load_index(&mut self, path: &Path, pos: WnPos) -> Result<(), WordNetError> {
        let text = read(path)?;
        for (line_no, line) in content_lines(&text) {
            let fields: Vec<&str> = line.split_ascii_whitespace().collect();
            if fields.len() < 6 {
                return Err(malformed(path, line_no, "index line has too few fields"));
            }
            let lemma = fields[0];
            if fields[1].chars().ne([pos.code()]) {
                return Err(malformed(
                    path,
                    line_no,
                    format!("pos `{}` does not belong in index.{pos}", fields[1]),
                ));
            }
            let count = |i: usize, what: &str| -> Result<usize, WordNetError> {
                fields[i]
                    .parse()
                    .map_err(|_| malformed(path, line_no, format!("bad {what} `{}`", fields[i])))
            };
            let synset_cnt = count(2, "synset_cnt")?;
            let p_cnt = count(3, "p_cnt")?;
            let offsets_at = 4 + p_cnt + 2;
            if fields.len() != offsets_at + synset_cnt {
                return Err(malformed(
                    path,
                    line_no,
                    format!(
                        "expected {} fields for synset_cnt {synset_cnt} and p_cnt {p_cnt}, found {}",
                        offsets_at + synset_cnt,
                        fields.len()
                    ),
                ));
            }
            count(4 + p_cnt, "sense_cnt")?;
            count(5 + p_cnt, "tagsense_cnt")?;
            let mut offsets = Vec::with_capacity(synset_cnt);
            for field in &fields[offsets_at..] {
                let offset = parse_offset(field)
                    .ok_or_else(|| malformed(path, line_no, format!("bad synset offset `{field}`")))?;
                if !self.synsets.contains_key(&(offset, pos)) {
                    return Err(WordNetError::DanglingOffset {
                        path: path.display().to_string(),
                        line: line_no,
                        offset,
                        pos,
                    });
                }
                offsets.push(offset);
            }
            self.lemma_index.insert((lemma.to_string(), pos), offsets);
        }
        Ok(())
    }

    pub fn synset_count(&self) -> usize {
        self.synsets.len()
    }

    pub fn lemma_count(&self) -> usize {
        self.lemma_index.len()
    }

    fn key(lemma: &str) -> String {
        lemma.trim().to_lowercase().replace(' ', "_")
    }

    pub fn contains(&self, lemma: &str, pos: WnPos) -> bool {
        self.lemma_index.contains_key(&(Self::key(lemma), pos))
    }

    /// Synset offsets for a lemma, in index order.
    pub fn synset_offsets(&self, lemma: &str, pos: WnPos) -> &[u32] {
        self.lemma_index
            .get(&(Self::key(lemma), pos))
            .map_or(&[], Vec::as_slice)
    }

    pub fn synset_members(&self, offset: u32, pos: WnPos) -> Option<&[String]> {
        self.synsets.get(&(offset, pos)).map(Vec::as_slice)
    }

    /// All (lemma, pos) index keys, sorted.
    pub fn index_keys(&self) -> Vec<(String, WnPos)> {
        let mut keys: Vec<_> = self.lemma_index.keys().cloned().collect();
        keys.sort();
        keys
    }

    /// Single-word synonyms with their source synset, in data-file order of
    /// the synsets (ascending offset) and member order within each synset.
    /// The query lemma and multi-word lemmas are excluded; duplicates
    /// (case-insensitive) keep their first occurrence.
    pub fn synonyms_with_source(&self, lemma: &str, pos: WnPos) -> Vec<Synonym> {
        let key = Self::key(lemma);
        let mut offsets = self.synset_offsets(&key, pos).to_vec();
        offsets.sort_unstable();
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for offset in offsets {
            for member in &self.synsets[&(offset, pos)] {
                let folded = member.to_lowercase();
                if folded == key || member.contains('_') || member.chars().any(char::is_whitespace) {
                    continue;
                }
                if seen.insert(folded) {
                    out.push(Synonym {
                        lemma: member.clone(),
                        offset,
                        pos,
                    });
                }
            }
        }
        out
    }

    pub fn synonyms(&self, lemma: &str, pos: WnPos) -> Vec<String> {
        self.synonyms_with_source(lemma, pos)
            .into_iter()
            .map(|s| s.lemma)
            .collect()
    }
}

/// Loads a WordNet directory. See [`WordNetStore::load`].
pub fn load_wordnet(dir: impl AsRef<Path>) -> Result<WordNetStore, WordNetError> {
    WordNetStore::load(dir.as_ref())
}

/// Conventional locations of a WordNet 3.0 `dict` directory: `$WNSEARCHDIR`
/// first, then common system install paths. Returns the first that holds the
/// database files.
pub fn find_wordnet_dir() -> Option<PathBuf> {
    let mut candidates = Vec::new();
    if let Some(dir) = std::env::var_os("WNSEARCHDIR") {
        candidates.push(PathBuf::from(dir));
    }
    candidates.extend(
        [
            "/usr/share/wordnet",
            "/usr/local/share/wordnet",
            "/usr/local/WordNet-3.0/dict",
        ]
        .iter()
        .map(PathBuf::from),
    );
    candidates
        .into_iter()
        .find(|d| d.join("index.noun").is_file() && d.join("data.noun").is_file())
}
