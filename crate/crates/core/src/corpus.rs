//! Lexicon ingestion: UniMorph TSV parsing, paradigm grouping, tag-augmented
//! pair encoding and train/dev/test splits.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A paradigm cell, identified by its verbatim feature bundle (`N;DAT;PL`).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SlotId(String);

impl SlotId {
    pub fn new(features: &str) -> Self {
        SlotId(features.trim().to_string())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn features(&self) -> impl Iterator<Item = &str> {
        self.0.split(';')
    }

    /// The part-of-speech feature, by UniMorph convention the first one.
    pub fn pos(&self) -> &str {
        self.features().next().unwrap_or("")
    }
}

impl fmt::Display for SlotId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for SlotId {
    fn from(s: &str) -> Self {
        SlotId::new(s)
    }
}

/// One inflected form: a lexeme realized in a slot.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordType {
    pub lexeme: String,
    pub slot: SlotId,
    pub form: String,
}

/// The ordered, duplicate-free slot list of one language and POS.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<SlotId>", into = "Vec<SlotId>")]
pub struct SlotInventory {
    slots: Vec<SlotId>,
    #[serde(skip)]
    index: HashMap<SlotId, usize>,
}

impl SlotInventory {
    pub fn new(slots: Vec<SlotId>) -> Result<Self> {
        if slots.is_empty() {
            return Err(Error::InsufficientData("slot inventory is empty".into()));
        }
        let mut index = HashMap::with_capacity(slots.len());
        for (i, s) in slots.iter().enumerate() {
            if index.insert(s.clone(), i).is_some() {
                return Err(Error::Invalid(format!("duplicate slot {s} in inventory")));
            }
        }
        Ok(SlotInventory { slots, index })
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn get(&self, i: usize) -> &SlotId {
        &self.slots[i]
    }

    pub fn index_of(&self, slot: &SlotId) -> Option<usize> {
        self.index.get(slot).copied()
    }

    pub fn contains(&self, slot: &SlotId) -> bool {
        self.index.contains_key(slot)
    }

    pub fn slots(&self) -> &[SlotId] {
        &self.slots
    }
}

impl TryFrom<Vec<SlotId>> for SlotInventory {
    type Error = Error;

    fn try_from(slots: Vec<SlotId>) -> Result<Self> {
        SlotInventory::new(slots)
    }
}

impl From<SlotInventory> for Vec<SlotId> {
    fn from(inv: SlotInventory) -> Self {
        inv.slots
    }
}

/// The forms of one lexeme, keyed by slot. May be partial.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Paradigm {
    pub lexeme: String,
    pub entries: BTreeMap<SlotId, String>,
}

impl Paradigm {
    pub fn new(lexeme: impl Into<String>) -> Self {
        Paradigm {
            lexeme: lexeme.into(),
            entries: BTreeMap::new(),
        }
    }

    pub fn form(&self, slot: &SlotId) -> Option<&str> {
        self.entries.get(slot).map(String::as_str)
    }

    /// Number of filled slots, `|π(ℓ)|`.
    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn is_full(&self, inventory: &SlotInventory) -> bool {
        inventory.slots().iter().all(|s| self.entries.contains_key(s))
    }

    /// Forms indexed by inventory position.
    pub fn forms_by_index<'a>(&'a self, inventory: &SlotInventory) -> Vec<Option<&'a str>> {
        inventory.slots().iter().map(|s| self.form(s)).collect()
    }
}

/// Parse UniMorph TSV (`lemma<TAB>form<TAB>features`), failing on the first
/// malformed line. Blank lines and `#` comments are skipped.
pub fn parse_unimorph<R: BufRead>(reader: R) -> Result<Vec<WordType>> {
    let (words, mut errors) = parse_unimorph_lenient(reader)?;
    match errors.is_empty() {
        true => Ok(words),
        false => Err(errors.swap_remove(0)),
    }
}

/// Like [`parse_unimorph`] but collects malformed lines instead of stopping.
pub fn parse_unimorph_lenient<R: BufRead>(reader: R) -> Result<(Vec<WordType>, Vec<Error>)> {
    let mut words = Vec::new();
    let mut errors = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.trim().is_empty() || trimmed.trim_start().starts_with('#') {
            continue;
        }
        match parse_line(trimmed) {
            Ok(w) => words.push(w),
            Err(msg) => errors.push(Error::parse(lineno, msg)),
        }
    }
    Ok((words, errors))
}

fn parse_line(line: &str) -> std::result::Result<WordType, String> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 3 {
        return Err(format!("expected 3 tab-separated fields, found {}", fields.len()));
    }
    let (lemma, form, feats) = (fields[0].trim(), fields[1].trim(), fields[2].trim());
    if lemma.is_empty() {
        return Err("empty lemma".into());
    }
    if form.is_empty() {
        return Err("empty form".into());
    }
    if feats.is_empty() {
        return Err("empty feature bundle".into());
    }
    Ok(WordType {
        lexeme: lemma.to_string(),
        slot: SlotId::new(feats),
        form: form.to_string(),
    })
}

/// Group words into paradigms.
///
/// `pos_filter` keeps only slots whose first feature equals it. Paradigms
/// come out in order of first appearance; the inventory is sorted
/// lexicographically. Duplicate `(lexeme, slot)` entries keep the first
/// form seen.
pub fn build_paradigms(
    words: &[WordType],
    pos_filter: Option<&str>,
) -> Result<(SlotInventory, Vec<Paradigm>)> {
    let mut order: Vec<String> = Vec::new();
    let mut by_lexeme: HashMap<&str, Paradigm> = HashMap::new();
    let mut slots = BTreeSet::new();
    let mut duplicates = 0usize;

    for w in words {
        if let Some(pos) = pos_filter {
            if w.slot.pos() != pos {
                continue;
            }
        }
        let p = by_lexeme.entry(w.lexeme.as_str()).or_insert_with(|| {
            order.push(w.lexeme.clone());
            Paradigm::new(w.lexeme.clone())
        });
        match p.entries.get(&w.slot) {
            Some(existing) => {
                if existing != &w.form {
                    log::debug!(
                        "duplicate ({}, {}): keeping {:?}, dropping {:?}",
                        w.lexeme,
                        w.slot,
                        existing,
                        w.form
                    );
                }
                duplicates += 1;
            }
            None => {
                p.entries.insert(w.slot.clone(), w.form.clone());
                slots.insert(w.slot.clone());
            }
        }
    }
    if duplicates > 0 {
        log::warn!("{duplicates} duplicate (lexeme, slot) entries dropped; first occurrence kept");
    }
    if order.is_empty() {
        return Err(Error::InsufficientData(match pos_filter {
            Some(pos) => format!("no words with POS {pos}"),
            None => "no words".into(),
        }));
    }
    let inventory = SlotInventory::new(slots.into_iter().collect())?;
    let paradigms = order
        .into_iter()
        .map(|lex| by_lexeme.remove(lex.as_str()).expect("grouped lexeme"))
        .collect();
    Ok((inventory, paradigms))
}

/// One symbol of a tag-augmented transduction source.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Token {
    Char(char),
    In(String),
    Out(String),
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Char(c) => write!(f, "{c}"),
            Token::In(feat) => write!(f, "IN={feat}"),
            Token::Out(feat) => write!(f, "OUT={feat}"),
        }
    }
}

/// Encode a transduction source: the source characters, then `IN=f` for each
/// source feature, then `OUT=f` for each target feature. `None` is the empty
/// root source, which contributes no characters and no `IN` tags.
pub fn encode_pair(src: Option<(&str, &SlotId)>, tgt_slot: &SlotId) -> Vec<Token> {
    let mut out = Vec::new();
    if let Some((form, slot)) = src {
        out.extend(form.chars().map(Token::Char));
        out.extend(slot.features().map(|f| Token::In(f.to_string())));
    }
    out.extend(tgt_slot.features().map(|f| Token::Out(f.to_string())));
    out
}

/// Space-joined rendering of [`encode_pair`], one source line for an
/// external sequence-to-sequence trainer.
pub fn encode_pair_line(src: Option<(&str, &SlotId)>, tgt_slot: &SlotId) -> String {
    encode_pair(src, tgt_slot)
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Surface characters seen in training forms.
///
/// Model symbol ids reserve `0` for end-of-string (also used as the
/// beginning-of-string history pad) and `1` for unknown characters;
/// characters are numbered from `2` in sorted order, so reserved symbols
/// cannot collide with surface characters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<char>", into = "Vec<char>")]
pub struct Alphabet {
    symbols: Vec<char>,
    #[serde(skip)]
    index: HashMap<char, u32>,
}

impl Alphabet {
    pub const EOS: u32 = 0;
    pub const UNK: u32 = 1;
    const OFFSET: u32 = 2;

    pub fn from_forms<'a>(forms: impl IntoIterator<Item = &'a str>) -> Self {
        let set: BTreeSet<char> = forms.into_iter().flat_map(str::chars).collect();
        Alphabet::from(set.into_iter().collect::<Vec<_>>())
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    /// Model vocabulary size: characters plus end-of-string and unknown.
    pub fn vocab_size(&self) -> usize {
        self.symbols.len() + Self::OFFSET as usize
    }

    pub fn id(&self, c: char) -> u32 {
        self.index.get(&c).copied().unwrap_or(Self::UNK)
    }

    pub fn encode(&self, s: &str) -> Vec<u32> {
        s.chars().map(|c| self.id(c)).collect()
    }

    pub fn contains(&self, c: char) -> bool {
        self.index.contains_key(&c)
    }
}

impl From<Vec<char>> for Alphabet {
    fn from(mut symbols: Vec<char>) -> Self {
        symbols.sort_unstable();
        symbols.dedup();
        let index = symbols
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, i as u32 + Self::OFFSET))
            .collect();
        Alphabet { symbols, index }
    }
}

impl From<Alphabet> for Vec<char> {
    fn from(a: Alphabet) -> Self {
        a.symbols
    }
}

/// Training-data regime.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// A fixed number of training paradigms, all mappings from each.
    Purple,
    /// A fixed number of training pairs sampled from all paradigms.
    Green,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Purple => "purple",
            Regime::Green => "green",
        })
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "purple" => Ok(Regime::Purple),
            "green" => Ok(Regime::Green),
            other => Err(Error::Invalid(format!("unknown regime {other:?} (purple|green)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub regime: Regime,
    pub paradigm_count: usize,
    pub pair_count: usize,
    pub dev_paradigms: usize,
    pub test_paradigms: usize,
    pub seed: u64,
}

impl SplitSpec {
    pub fn new(regime: Regime, seed: u64) -> Self {
        SplitSpec {
            regime,
            paradigm_count: 600,
            pair_count: 60_000,
            dev_paradigms: 50,
            test_paradigms: 50,
            seed,
        }
    }
}

/// A directed mapping between two forms of one lexeme. `src == None` is a
/// root mapping from the empty string.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainPair {
    pub src: Option<String>,
    pub src_slot: Option<SlotId>,
    pub tgt: String,
    pub tgt_slot: SlotId,
    pub lexeme: String,
}

impl TrainPair {
    pub fn source(&self) -> Option<(&str, &SlotId)> {
        match (&self.src, &self.src_slot) {
            (Some(f), Some(s)) => Some((f.as_str(), s)),
            _ => None,
        }
    }

    pub fn is_root(&self) -> bool {
        self.src_slot.is_none()
    }
}

/// All mappings within one paradigm: for every filled target slot, the root
/// mapping followed by every non-identity slot-to-slot mapping.
pub fn paradigm_pairs(p: &Paradigm) -> Vec<TrainPair> {
    let mut out = Vec::with_capacity(p.size() * p.size());
    for (tgt_slot, tgt) in &p.entries {
        out.push(TrainPair {
            src: None,
            src_slot: None,
            tgt: tgt.clone(),
            tgt_slot: tgt_slot.clone(),
            lexeme: p.lexeme.clone(),
        });
        for (src_slot, src) in &p.entries {
            if src_slot == tgt_slot {
                continue;
            }
            out.push(TrainPair {
                src: Some(src.clone()),
                src_slot: Some(src_slot.clone()),
                tgt: tgt.clone(),
                tgt_slot: tgt_slot.clone(),
                lexeme: p.lexeme.clone(),
            });
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataSplit {
    pub regime: Regime,
    pub seed: u64,
    pub train: Vec<TrainPair>,
    pub dev: Vec<Paradigm>,
    pub test: Vec<Paradigm>,
}

impl DataSplit {
    pub fn dev_pairs(&self) -> Vec<TrainPair> {
        self.dev.iter().flat_map(paradigm_pairs).collect()
    }

    pub fn test_pairs(&self) -> Vec<TrainPair> {
        self.test.iter().flat_map(paradigm_pairs).collect()
    }

    /// Lexemes appearing in training pairs that are also held out.
    pub fn leaked_lexemes(&self) -> Vec<String> {
        let held: HashSet<&str> = self
            .dev
            .iter()
            .chain(&self.test)
            .map(|p| p.lexeme.as_str())
            .collect();
        let leaked: BTreeSet<String> = self
            .train
            .iter()
            .filter(|t| held.contains(t.lexeme.as_str()))
            .map(|t| t.lexeme.clone())
            .collect();
        leaked.into_iter().collect()
    }
}

/// Hold out dev and test paradigms at random, then sample training material
/// from the rest according to the regime.
///
/// Only paradigms with at least two filled slots are eligible for holdout.
/// When fewer training paradigms or pairs exist than requested, all of them
/// are used.
pub fn make_split(paradigms: &[Paradigm], spec: &SplitSpec) -> Result<DataSplit> {
    let held = spec.dev_paradigms + spec.test_paradigms;
    let eligible: Vec<usize> = (0..paradigms.len())
        .filter(|&i| paradigms[i].size() >= 2)
        .collect();
    if eligible.len() < held || paradigms.len() < held + 1 {
        return Err(Error::InsufficientData(format!(
            "need {} dev + {} test paradigms with >= 2 forms plus training data; \
             have {} paradigms, {} eligible for holdout",
            spec.dev_paradigms,
            spec.test_paradigms,
            paradigms.len(),
            eligible.len()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let picked = index::sample(&mut rng, eligible.len(), held).into_vec();
    let dev_idx: Vec<usize> = picked[..spec.dev_paradigms].iter().map(|&k| eligible[k]).collect();
    let test_idx: Vec<usize> = picked[spec.dev_paradigms..].iter().map(|&k| eligible[k]).collect();

    let held_set: HashSet<usize> = dev_idx.iter().chain(&test_idx).copied().collect();
    let pool: Vec<&Paradigm> = (0..paradigms.len())
        .filter(|i| !held_set.contains(i))
        .map(|i| &paradigms[i])
        .collect();

    let train = match spec.regime {
        Regime::Purple => {
            let mut pool = pool;
            if pool.len() <= spec.paradigm_count {
                if pool.len() < spec.paradigm_count {
                    log::warn!(
                        "only {} training paradigms available (requested {}); using all",
                        pool.len(),
                        spec.paradigm_count
                    );
                }
            } else {
                pool.shuffle(&mut rng);
                pool.truncate(spec.paradigm_count);
            }
            pool.into_iter().flat_map(paradigm_pairs).collect()
        }
        Regime::Green => {
            let all: Vec<TrainPair> = pool.into_iter().flat_map(paradigm_pairs).collect();
            if all.len() <= spec.pair_count {
                if all.len() < spec.pair_count {
                    log::warn!(
                        "only {} training pairs available (requested {}); using all",
                        all.len(),
                        spec.pair_count
                    );
                }
                all
            } else {
                let mut keep = index::sample(&mut rng, all.len(), spec.pair_count).into_vec();
                keep.sort_unstable();
                let mut all: Vec<Option<TrainPair>> = all.into_iter().map(Some).collect();
                keep.into_iter()
                    .map(|i| all[i].take().expect("index sampled once"))
                    .collect()
            }
        }
    };

    Ok(DataSplit {
        regime: spec.regime,
        seed: spec.seed,
        train,
        dev: dev_idx.into_iter().map(|i| paradigms[i].clone()).collect(),
        test: test_idx.into_iter().map(|i| paradigms[i].clone()).collect(),
    })
}
