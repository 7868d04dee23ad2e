//! Alphabets and symbol sequences.
//!
//! Public indices follow the 1-based convention `x_j^k = (x_i)_{j <= i <= k}`
//! with `x_j^{j-1}` the empty string. Storage is 0-based: `x_i` lives at
//! `symbols()[i - 1]`. This is the only place the two conventions meet.

use std::collections::HashMap;
use std::io::Read;
use std::sync::Arc;

use crate::{Error, Result};

/// How tokens are rendered back to bytes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind {
    /// Every token is a single byte; rendering concatenates.
    Byte,
    /// Tokens are words; rendering joins them with a single space.
    Word,
}

/// Bijection between external tokens and symbol ids `0..D`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    kind: TokenKind,
    tokens: Vec<Vec<u8>>,
    ids: HashMap<Vec<u8>, u32>,
}

impl Alphabet {
    /// Builds an alphabet from distinct tokens; ids follow list order.
    pub fn new(kind: TokenKind, tokens: Vec<Vec<u8>>) -> Result<Self> {
        if tokens.len() < 2 {
            return Err(Error::AlphabetTooSmall(tokens.len()));
        }
        let mut ids = HashMap::with_capacity(tokens.len());
        for (id, t) in tokens.iter().enumerate() {
            if ids.insert(t.clone(), id as u32).is_some() {
                return Err(Error::DuplicateToken(String::from_utf8_lossy(t).into_owned()));
            }
        }
        Ok(Self { kind, tokens, ids })
    }

    /// `a, b, c, ...` for `d <= 26`, otherwise the decimal ids as words.
    pub fn letters(d: usize) -> Result<Self> {
        if d <= 26 {
            let tokens = (0..d).map(|i| vec![b'a' + i as u8]).collect();
            Self::new(TokenKind::Byte, tokens)
        } else {
            let tokens = (0..d).map(|i| i.to_string().into_bytes()).collect();
            Self::new(TokenKind::Word, tokens)
        }
    }

    /// Parses a JSON list of tokens. Single-byte tokens give a byte alphabet,
    /// anything else a word alphabet.
    pub fn from_json(spec: &str) -> Result<Self> {
        let tokens: Vec<String> = serde_json::from_str(spec).map_err(|e| Error::AlphabetSpec(e.to_string()))?;
        let kind = if tokens.iter().all(|t| t.len() == 1) { TokenKind::Byte } else { TokenKind::Word };
        if kind == TokenKind::Word && tokens.iter().any(|t| t.is_empty() || t.contains(char::is_whitespace)) {
            return Err(Error::AlphabetSpec("word tokens must be non-empty and free of whitespace".into()));
        }
        Self::new(kind, tokens.into_iter().map(String::into_bytes).collect())
    }

    /// Alphabet size `D`.
    pub fn size(&self) -> usize {
        self.tokens.len()
    }

    pub fn kind(&self) -> TokenKind {
        self.kind
    }

    pub fn id(&self, token: &[u8]) -> Option<u32> {
        self.ids.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&[u8]> {
        self.tokens.get(id as usize).map(Vec::as_slice)
    }
}

/// A finite string `x_1^n` over an alphabet of size `D`.
#[derive(Debug, Clone)]
pub struct Sequence {
    symbols: Vec<u32>,
    alphabet: Arc<Alphabet>,
}

impl PartialEq for Sequence {
    fn eq(&self, other: &Self) -> bool {
        self.symbols == other.symbols
            && (Arc::ptr_eq(&self.alphabet, &other.alphabet) || self.alphabet == other.alphabet)
    }
}

impl Sequence {
    pub fn new(symbols: Vec<u32>, alphabet: Arc<Alphabet>) -> Result<Self> {
        let size = alphabet.size();
        if let Some(&id) = symbols.iter().find(|&&s| s as usize >= size) {
            return Err(Error::SymbolOutOfRange { id, size });
        }
        Ok(Self { symbols, alphabet })
    }

    /// Maps `'a' -> 0, 'b' -> 1, ...` over an alphabet of size `d`.
    pub fn from_letters(s: &str, d: usize) -> Result<Self> {
        let alphabet = Arc::new(Alphabet::letters(d)?);
        let symbols = s
            .bytes()
            .map(|b| alphabet.id(&[b]).ok_or_else(|| Error::UnknownToken((b as char).to_string())))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { symbols, alphabet })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[u32] {
        &self.symbols
    }

    pub fn alphabet(&self) -> &Arc<Alphabet> {
        &self.alphabet
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet.size()
    }

    /// `x_j^k`, 1-based and inclusive; `j = k + 1` yields the empty string.
    pub fn slice(&self, j: usize, k: usize) -> Result<Sequence> {
        let n = self.len();
        if j < 1 || j > k + 1 || k > n {
            return Err(Error::SliceOutOfRange { j, k, n });
        }
        Ok(Self { symbols: self.symbols[j - 1..k].to_vec(), alphabet: Arc::clone(&self.alphabet) })
    }

    /// Same alphabet, different symbols. Ids are not re-validated.
    pub(crate) fn with_symbols(&self, symbols: Vec<u32>) -> Sequence {
        debug_assert!(symbols.iter().all(|&s| (s as usize) < self.alphabet.size()));
        Self { symbols, alphabet: Arc::clone(&self.alphabet) }
    }

    /// Renders the symbols back through the alphabet.
    pub fn render(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.len());
        for (i, &s) in self.symbols.iter().enumerate() {
            if self.alphabet.kind == TokenKind::Word && i > 0 {
                out.push(b' ');
            }
            out.extend_from_slice(&self.alphabet.tokens[s as usize]);
        }
        out
    }
}

/// Ingestion mode for [`ingest`].
#[derive(Debug, Clone)]
pub enum IngestMode {
    /// Each byte is a token; alphabet inferred.
    Bytes,
    /// UTF-8 whitespace-delimited tokens; alphabet inferred.
    Tokens,
    /// Tokens looked up in a fixed alphabet. Byte alphabets split the input
    /// into bytes, word alphabets split on whitespace.
    Explicit(Arc<Alphabet>),
}

/// Reads a raw stream into a sequence.
///
/// Inferred alphabets assign ids in order of first occurrence. Inputs with
/// fewer than two distinct tokens are padded with unused placeholder tokens
/// (rendered as nothing) so that `D >= 2` always holds.
pub fn ingest<R: Read>(mut reader: R, mode: &IngestMode) -> Result<Sequence> {
    let mut raw = Vec::new();
    reader.read_to_end(&mut raw)?;
    match mode {
        IngestMode::Bytes => Ok(infer(TokenKind::Byte, raw.chunks(1))),
        IngestMode::Tokens => {
            let text = std::str::from_utf8(&raw)
                .map_err(|e| Error::Io(std::io::Error::new(std::io::ErrorKind::InvalidData, e)))?;
            Ok(infer(TokenKind::Word, text.split_whitespace().map(str::as_bytes)))
        }
        IngestMode::Explicit(alphabet) => {
            let lookup =
                |t: &[u8]| alphabet.id(t).ok_or_else(|| Error::UnknownToken(String::from_utf8_lossy(t).into_owned()));
            let symbols = match alphabet.kind {
                TokenKind::Byte => raw.chunks(1).map(lookup).collect::<Result<Vec<_>>>()?,
                TokenKind::Word => {
                    let text = std::str::from_utf8(&raw)
                        .map_err(|e| Error::Io(std::io::Error::new(std::io::ErrorKind::InvalidData, e)))?;
                    text.split_whitespace().map(|t| lookup(t.as_bytes())).collect::<Result<Vec<_>>>()?
                }
            };
            Ok(Sequence { symbols, alphabet: Arc::clone(alphabet) })
        }
    }
}

fn infer<'a>(kind: TokenKind, tokens: impl Iterator<Item = &'a [u8]>) -> Sequence {
    let mut ids: HashMap<Vec<u8>, u32> = HashMap::new();
    let mut table: Vec<Vec<u8>> = Vec::new();
    let mut symbols = Vec::new();
    for t in tokens {
        let id = *ids.entry(t.to_vec()).or_insert_with(|| {
            table.push(t.to_vec());
            (table.len() - 1) as u32
        });
        symbols.push(id);
    }
    // Placeholders are empty tokens; they never collide with real input
    // tokens and are kept out of the lookup map.
    while table.len() < 2 {
        table.push(Vec::new());
    }
    Sequence { symbols, alphabet: Arc::new(Alphabet { kind, tokens: table, ids }) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bytes_first_occurrence_ids() {
        let x = ingest(&b"ab"[..], &IngestMode::Bytes).unwrap();
        assert_eq!(x.symbols(), &[0, 1]);
        assert_eq!(x.alphabet_size(), 2);
    }

    #[test]
    fn empty_input_is_lambda() {
        let x = ingest(&b""[..], &IngestMode::Bytes).unwrap();
        assert_eq!(x.len(), 0);
        assert!(x.alphabet_size() >= 2);
    }

    #[test]
    fn tokens_repeat_maps_to_same_id() {
        let x = ingest(&b"the cat the"[..], &IngestMode::Tokens).unwrap();
        assert_eq!(x.symbols(), &[0, 1, 0]);
        assert_eq!(x.alphabet_size(), 2);
        assert_eq!(x.render(), b"the cat the");
    }

    #[test]
    fn single_symbol_input_is_padded() {
        let x = ingest(&b"aaaa"[..], &IngestMode::Bytes).unwrap();
        assert_eq!(x.alphabet_size(), 2);
        assert_eq!(x.render(), b"aaaa");
    }

    #[test]
    fn explicit_alphabet() {
        let a = Arc::new(Alphabet::from_json(r#"["x","y","z"]"#).unwrap());
        let x = ingest(&b"zzx"[..], &IngestMode::Explicit(a.clone())).unwrap();
        assert_eq!(x.symbols(), &[2, 2, 0]);
        assert_eq!(x.alphabet_size(), 3);
        let err = ingest(&b"zq"[..], &IngestMode::Explicit(a)).unwrap_err();
        assert!(matches!(err, Error::UnknownToken(t) if t == "q"));
    }

    #[test]
    fn explicit_word_alphabet() {
        let a = Arc::new(Alphabet::from_json(r#"["the","cat"]"#).unwrap());
        assert_eq!(a.kind(), TokenKind::Word);
        let x = ingest(&b"cat  the\ncat"[..], &IngestMode::Explicit(a)).unwrap();
        assert_eq!(x.symbols(), &[1, 0, 1]);
    }

    #[test]
    fn alphabet_errors() {
        assert!(matches!(Alphabet::from_json("[]"), Err(Error::AlphabetTooSmall(0))));
        assert!(matches!(Alphabet::from_json(r#"["a"]"#), Err(Error::AlphabetTooSmall(1))));
        assert!(matches!(Alphabet::from_json(r#"["a","a"]"#), Err(Error::DuplicateToken(_))));
        assert!(matches!(Alphabet::from_json("{"), Err(Error::AlphabetSpec(_))));
    }

    #[test]
    fn slice_examples() {
        let x = Sequence::from_letters("abc", 3).unwrap();
        assert_eq!(x.slice(2, 3).unwrap().render(), b"bc");
        assert!(x.slice(2, 1).unwrap().is_empty());
        assert_eq!(x.slice(1, 3).unwrap(), x);
        assert!(x.slice(0, 1).is_err());
        assert!(x.slice(2, 4).is_err());
        assert!(x.slice(3, 1).is_err());
    }

    #[test]
    fn symbol_range_checked() {
        let a = Arc::new(Alphabet::letters(2).unwrap());
        assert!(matches!(Sequence::new(vec![0, 2], a), Err(Error::SymbolOutOfRange { id: 2, size: 2 })));
    }

    proptest! {
        #[test]
        fn render_round_trips(words in proptest::collection::vec("[a-d]{1,3}", 0..40)) {
            let text = words.join(" ");
            let x = ingest(text.as_bytes(), &IngestMode::Tokens).unwrap();
            prop_assert_eq!(x.render(), text.into_bytes());
        }

        #[test]
        fn slice_composes(s in "[ab]{0,30}", a in 0usize..32, b in 0usize..32, c in 0usize..32, d in 0usize..32) {
            let x = Sequence::from_letters(&s, 2).unwrap();
            let n = x.len();
            let (j, k) = (a % (n + 1) + 1, b % (n + 1));
            prop_assume!(j <= k + 1);
            let y = x.slice(j, k).unwrap();
            let m = y.len();
            let (j2, k2) = (c % (m + 1) + 1, d % (m + 1));
            prop_assume!(j2 <= k2 + 1);
            let direct = x.slice(j + j2 - 1, j + k2 - 1).unwrap();
            prop_assert_eq!(y.slice(j2, k2).unwrap(), direct);
        }
    }
}
