//! Three-valued Morse-style code.
//!
//! A dot becomes [`Symbol::Plus`], a dash stays [`Symbol::Minus`] and the
//! reference tempo is [`Symbol::Zero`]. Characters carry no intra-character
//! gap; one `Zero` separates letters and exactly two separate words.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("UnsupportedCharacter: {ch:?} at position {position}")]
    UnsupportedCharacter { ch: char, position: usize },
    #[error("UnknownCode: {run} at position {position}")]
    UnknownCode { run: String, position: usize },
    #[error("MalformedGap: more than two consecutive zeros at position {position}")]
    MalformedGap { position: usize },
    #[error("ParseError: invalid symbol character at index {position}")]
    ParseError { position: usize },
}

impl CodecError {
    pub fn name(&self) -> &'static str {
        match self {
            CodecError::UnsupportedCharacter { .. } => "UnsupportedCharacter",
            CodecError::UnknownCode { .. } => "UnknownCode",
            CodecError::MalformedGap { .. } => "MalformedGap",
            CodecError::ParseError { .. } => "ParseError",
        }
    }
}

/// One unit of the tempo code.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    /// Tempo raised by delta.
    Plus,
    /// Tempo lowered by delta.
    Minus,
    /// Reference tempo; acts as the gap symbol.
    Zero,
}

impl Symbol {
    pub fn as_char(self) -> char {
        match self {
            Symbol::Plus => '+',
            Symbol::Minus => '-',
            Symbol::Zero => '0',
        }
    }

    pub fn from_char(c: char) -> Option<Symbol> {
        match c {
            '+' => Some(Symbol::Plus),
            '-' => Some(Symbol::Minus),
            '0' => Some(Symbol::Zero),
            _ => None,
        }
    }

    /// Direction of the tempo change: +1, -1 or 0.
    pub fn sign(self) -> f64 {
        match self {
            Symbol::Plus => 1.0,
            Symbol::Minus => -1.0,
            Symbol::Zero => 0.0,
        }
    }

    pub fn is_zero(self) -> bool {
        self == Symbol::Zero
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// An ordered sequence of symbols, printable in the `+`/`-`/`0` interchange form.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct SymbolStream(pub Vec<Symbol>);

impl SymbolStream {
    pub fn new() -> Self {
        SymbolStream(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Symbol> {
        self.0.iter()
    }

    /// Renders the stream as one character per symbol.
    pub fn to_text_form(&self) -> String {
        self.0.iter().map(|s| s.as_char()).collect()
    }

    /// Parses the `+`/`-`/`0` interchange form. No separators are accepted.
    pub fn from_text_form(text: &str) -> Result<Self, CodecError> {
        text.chars()
            .enumerate()
            .map(|(position, c)| Symbol::from_char(c).ok_or(CodecError::ParseError { position }))
            .collect::<Result<Vec<_>, _>>()
            .map(SymbolStream)
    }

    /// True when the stream has no leading or trailing zero and no zero run
    /// longer than two.
    pub fn is_well_formed(&self) -> bool {
        let s = &self.0;
        if s.first().is_some_and(|x| x.is_zero()) || s.last().is_some_and(|x| x.is_zero()) {
            return false;
        }
        let mut run = 0;
        for sym in s {
            if sym.is_zero() {
                run += 1;
                if run > 2 {
                    return false;
                }
            } else {
                run = 0;
            }
        }
        true
    }

    pub fn count(&self, symbol: Symbol) -> usize {
        self.0.iter().filter(|&&s| s == symbol).count()
    }
}

impl fmt::Display for SymbolStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text_form())
    }
}

impl FromStr for SymbolStream {
    type Err = CodecError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SymbolStream::from_text_form(s)
    }
}

impl From<Vec<Symbol>> for SymbolStream {
    fn from(v: Vec<Symbol>) -> Self {
        SymbolStream(v)
    }
}

impl FromIterator<Symbol> for SymbolStream {
    fn from_iter<I: IntoIterator<Item = Symbol>>(iter: I) -> Self {
        SymbolStream(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a SymbolStream {
    type Item = &'a Symbol;
    type IntoIter = std::slice::Iter<'a, Symbol>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

// Rows of the adopted code, dot written as '+'. '(' and ')' use the
// International Morse values.
const TABLE_ROWS: &[(char, &str)] = &[
    ('a', "+-"),
    ('b', "-+++"),
    ('c', "-+-+"),
    ('d', "-++"),
    ('e', "+"),
    ('f', "++-+"),
    ('g', "--+"),
    ('h', "++++"),
    ('i', "++"),
    ('j', "+---"),
    ('k', "-+-"),
    ('l', "+-++"),
    ('m', "--"),
    ('n', "-+"),
    ('o', "---"),
    ('p', "+--+"),
    ('q', "--+-"),
    ('r', "+-+"),
    ('s', "+++"),
    ('t', "-"),
    ('u', "++-"),
    ('v', "+++-"),
    ('w', "+--"),
    ('x', "-++-"),
    ('y', "-+--"),
    ('z', "--++"),
    ('0', "-----"),
    ('1', "+----"),
    ('2', "++---"),
    ('3', "+++--"),
    ('4', "++++-"),
    ('5', "+++++"),
    ('6', "-++++"),
    ('7', "--+++"),
    ('8', "---++"),
    ('9', "----+"),
    (',', "--++--"),
    ('.', "+-+-+-"),
    (':', "---+++"),
    (';', "-+-+-+"),
    ('!', "-+-+--"),
    ('?', "++--++"),
    ('\'', "+----+"),
    ('-', "--+++-"),
    ('_', "++--+-"),
    ('/', "-++-+"),
    ('(', "-+--+"),
    (')', "-+--+-"),
    ('"', "+-++-+"),
    ('=', "-+++-"),
    ('+', "+-+-+"),
    ('&', "+-+++"),
    ('@', "+--+-+"),
    ('$', "+++-+-"),
];

/// Immutable character/code mapping with reverse lookup.
#[derive(Debug, Clone)]
pub struct CodeTable {
    forward: HashMap<char, Vec<Symbol>>,
    reverse: HashMap<Vec<Symbol>, char>,
    order: Vec<char>,
}

impl CodeTable {
    /// Builds a table from `(character, code)` pairs in interchange form.
    ///
    /// Panics if a code is empty, contains `0`, or collides with another
    /// entry; the table must stay injective for decoding to be unambiguous.
    pub fn from_rows(rows: &[(char, &str)]) -> Self {
        let mut forward = HashMap::with_capacity(rows.len());
        let mut reverse = HashMap::with_capacity(rows.len());
        let mut order = Vec::with_capacity(rows.len());
        for &(ch, code) in rows {
            let code = SymbolStream::from_text_form(code).expect("table code must parse").0;
            assert!(!code.is_empty(), "empty code for {ch:?}");
            assert!(code.iter().all(|s| !s.is_zero()), "zero inside code for {ch:?}");
            assert!(reverse.insert(code.clone(), ch).is_none(), "duplicate code for {ch:?}");
            assert!(forward.insert(ch, code).is_none(), "duplicate character {ch:?}");
            order.push(ch);
        }
        CodeTable { forward, reverse, order }
    }

    /// The adopted Morse table shared by every routine in this crate.
    pub fn standard() -> &'static CodeTable {
        static TABLE: OnceLock<CodeTable> = OnceLock::new();
        TABLE.get_or_init(|| CodeTable::from_rows(TABLE_ROWS))
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn code(&self, ch: char) -> Option<&[Symbol]> {
        self.forward.get(&ch).map(Vec::as_slice)
    }

    pub fn lookup(&self, code: &[Symbol]) -> Option<char> {
        self.reverse.get(code).copied()
    }

    pub fn contains(&self, ch: char) -> bool {
        self.forward.contains_key(&ch)
    }

    /// Entries in table order.
    pub fn entries(&self) -> impl Iterator<Item = (char, &[Symbol])> + '_ {
        self.order.iter().map(move |ch| (*ch, self.forward[ch].as_slice()))
    }

    pub fn max_code_len(&self) -> usize {
        self.forward.values().map(Vec::len).max().unwrap_or(0)
    }
}

/// Encoded stream plus any characters dropped in lenient mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Encoded {
    pub stream: SymbolStream,
    pub skipped: Vec<(char, usize)>,
}

/// Strict encoding: any character outside the table is an error.
pub fn encode_text(message: &str, table: &CodeTable) -> Result<SymbolStream, CodecError> {
    encode_text_with(message, table, false).map(|e| e.stream)
}

/// Encodes `message`, optionally skipping unsupported characters.
///
/// Input is lowercased; any run of whitespace becomes one word gap and
/// leading/trailing whitespace is dropped. Positions are character indices.
pub fn encode_text_with(message: &str, table: &CodeTable, lenient: bool) -> Result<Encoded, CodecError> {
    let mut out = Vec::new();
    let mut skipped = Vec::new();
    // Gap owed before the next emitted character: 0 none, 1 letter, 2 word.
    let mut pending_gap = 0usize;
    for (position, raw) in message.chars().enumerate() {
        if raw.is_whitespace() {
            if !out.is_empty() {
                pending_gap = 2;
            }
            continue;
        }
        let ch = raw.to_ascii_lowercase();
        let Some(code) = table.code(ch) else {
            if lenient {
                log::warn!("skipping unsupported character {raw:?} at position {position}");
                skipped.push((raw, position));
                continue;
            }
            return Err(CodecError::UnsupportedCharacter { ch: raw, position });
        };
        out.extend(std::iter::repeat_n(Symbol::Zero, pending_gap));
        out.extend_from_slice(code);
        pending_gap = 1;
    }
    Ok(Encoded { stream: SymbolStream(out), skipped })
}

/// Decodes a symbol stream back to lowercase text.
///
/// Leading and trailing zeros are ignored. A single interior zero separates
/// letters and two make a space. Longer runs are [`CodecError::MalformedGap`]
/// when `strict`, otherwise a single space.
pub fn decode_symbols(stream: &SymbolStream, table: &CodeTable, strict: bool) -> Result<String, CodecError> {
    let s = stream.symbols();
    let Some(first) = s.iter().position(|x| !x.is_zero()) else {
        return Ok(String::new());
    };
    let last = s.iter().rposition(|x| !x.is_zero()).unwrap_or(first);

    let mut text = String::new();
    let mut i = first;
    while i <= last {
        let start = i;
        if s[i].is_zero() {
            while i <= last && s[i].is_zero() {
                i += 1;
            }
            match i - start {
                1 => {}
                2 => text.push(' '),
                _ if strict => return Err(CodecError::MalformedGap { position: start }),
                _ => text.push(' '),
            }
        } else {
            while i <= last && !s[i].is_zero() {
                i += 1;
            }
            let run = &s[start..i];
            match table.lookup(run) {
                Some(ch) => text.push(ch),
                None => {
                    return Err(CodecError::UnknownCode {
                        run: run.iter().map(|x| x.as_char()).collect(),
                        position: start,
                    })
                }
            }
        }
    }
    Ok(text)
}

/// Lowercases and collapses whitespace the way an encode/decode round trip does.
pub fn normalize_message(message: &str) -> String {
    message
        .split_whitespace()
        .map(|w| w.to_ascii_lowercase())
        .collect::<Vec<_>>()
        .join(" ")
}
