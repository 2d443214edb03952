use std::collections::HashMap;
use std::io::BufRead;

use crate::corpus::SlotId;
use crate::error::{Error, Result};

use super::ConditionalScorer;

/// Source-slot spelling for root (empty-source) rows.
pub const ROOT_SLOT: &str = "ROOT";

type Key = (Option<String>, Option<SlotId>, SlotId, String);

/// Externally computed conditional log₂-probabilities, e.g. from a neural
/// reinflection model trained elsewhere.
///
/// Rows are `src<TAB>src_slot<TAB>tgt_slot<TAB>tgt<TAB>log2prob`; a root row
/// has `src_slot` = `ROOT` and an empty `src`. Lookups of absent tuples are
/// errors.
#[derive(Clone, Debug, Default)]
pub struct ScoreTable {
    scores: HashMap<Key, f64>,
}

impl ScoreTable {
    pub fn load<R: BufRead>(reader: R) -> Result<Self> {
        let mut scores = HashMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            let line = line.trim_end_matches(['\r', '\n']);
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() != 5 {
                return Err(Error::parse(
                    lineno,
                    format!("expected 5 tab-separated fields, found {}", f.len()),
                ));
            }
            let lp: f64 = f[4]
                .trim()
                .parse()
                .map_err(|e| Error::parse(lineno, format!("bad log2prob {:?}: {e}", f[4])))?;
            if !lp.is_finite() || lp > 0.0 {
                return Err(Error::parse(
                    lineno,
                    format!("log2prob must be finite and <= 0, got {lp}"),
                ));
            }
            let key = make_key(
                (f[1].trim() != ROOT_SLOT).then(|| (f[0], SlotId::new(f[1]))),
                SlotId::new(f[2]),
                f[3],
            );
            if scores.insert(key, lp).is_some() {
                return Err(Error::parse(lineno, "duplicate score row"));
            }
        }
        Ok(ScoreTable { scores })
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn lookup(&self, src: Option<(&str, &SlotId)>, tgt_slot: &SlotId, tgt: &str) -> Result<f64> {
        let key = make_key(src.map(|(f, s)| (f, s.clone())), tgt_slot.clone(), tgt);
        self.scores.get(&key).copied().ok_or_else(|| {
            let (src, src_slot) = match src {
                Some((f, s)) => (f.to_string(), s.to_string()),
                None => (String::new(), ROOT_SLOT.to_string()),
            };
            Error::MissingScore(format!("({src:?}, {src_slot}, {tgt_slot}, {tgt:?})"))
        })
    }
}

fn make_key(src: Option<(&str, SlotId)>, tgt_slot: SlotId, tgt: &str) -> Key {
    match src {
        Some((f, s)) => (Some(f.trim().to_string()), Some(s), tgt_slot, tgt.trim().to_string()),
        None => (None, None, tgt_slot, tgt.trim().to_string()),
    }
}

impl ConditionalScorer for ScoreTable {
    fn logprob(&self, src: Option<(&str, &SlotId)>, tgt_slot: &SlotId, tgt: &str) -> Result<f64> {
        self.lookup(src, tgt_slot, tgt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stores_and_looks_up() {
        let t = ScoreTable::load("walk\tV;NFIN\tV;PST\twalked\t-0.1\n\tROOT\tV;PST\twalked\t-20\n".as_bytes()).unwrap();
        let nfin = SlotId::new("V;NFIN");
        let pst = SlotId::new("V;PST");
        assert_eq!(t.lookup(Some(("walk", &nfin)), &pst, "walked").unwrap(), -0.1);
        assert_eq!(t.lookup(None, &pst, "walked").unwrap(), -20.0);
        let err = t.lookup(Some(("go", &nfin)), &pst, "went").unwrap_err();
        assert!(matches!(err, Error::MissingScore(_)));
        assert!(err.to_string().contains("went"));
    }

    #[test]
    fn rejects_positive_logprob() {
        let err = ScoreTable::load("a\tX\tY\tb\t0.5\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        assert!(ScoreTable::load("a\tX\tY\tb\tnan\n".as_bytes()).is_err());
        assert!(ScoreTable::load("a\tX\tY\tb\n".as_bytes()).is_err());
    }
}
