use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::corpus::Alphabet;

/// Add-α smoothed character n-gram over symbol ids, including end-of-string.
///
/// Every history assigns positive probability to every symbol and to
/// stopping, so the model is a proper distribution over all strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "CharNGramFile", into = "CharNGramFile")]
pub struct CharNGram {
    order: usize,
    alpha: f64,
    vocab: usize,
    counts: HashMap<Vec<u32>, Vec<f64>>,
    totals: HashMap<Vec<u32>, f64>,
}

impl CharNGram {
    /// Fit on id sequences (without end-of-string; it is appended here).
    pub fn fit<'a, I>(order: usize, alpha: f64, vocab: usize, sequences: I) -> Self
    where
        I: IntoIterator<Item = &'a [u32]>,
    {
        assert!(order >= 1, "n-gram order must be >= 1");
        assert!(alpha > 0.0, "smoothing must be positive");
        let mut counts: HashMap<Vec<u32>, Vec<f64>> = HashMap::new();
        for seq in sequences {
            let mut hist = vec![Alphabet::EOS; order - 1];
            for &sym in seq.iter().chain(std::iter::once(&Alphabet::EOS)) {
                counts.entry(hist.clone()).or_insert_with(|| vec![0.0; vocab])[sym as usize] += 1.0;
                if order > 1 {
                    hist.remove(0);
                    hist.push(sym);
                }
            }
        }
        let totals = counts.iter().map(|(h, c)| (h.clone(), c.iter().sum())).collect();
        CharNGram {
            order,
            alpha,
            vocab,
            counts,
            totals,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab
    }

    /// `P(sym | history)`; `history` holds the previous `order - 1` ids,
    /// padded on the left with end-of-string.
    pub fn prob_next(&self, history: &[u32], sym: u32) -> f64 {
        debug_assert_eq!(history.len(), self.order - 1);
        let denom_extra = self.alpha * self.vocab as f64;
        match self.counts.get(history) {
            Some(c) => (c[sym as usize] + self.alpha) / (self.totals[history] + denom_extra),
            None => 1.0 / self.vocab as f64,
        }
    }

    /// log₂ probability of the whole sequence followed by end-of-string.
    pub fn log2prob(&self, seq: &[u32]) -> f64 {
        let mut hist = vec![Alphabet::EOS; self.order - 1];
        let mut lp = 0.0;
        for &sym in seq.iter().chain(std::iter::once(&Alphabet::EOS)) {
            lp += self.prob_next(&hist, sym).log2();
            if self.order > 1 {
                hist.remove(0);
                hist.push(sym);
            }
        }
        lp
    }

    /// The smallest stopping probability over all histories, seen or not.
    /// `(1 - p)^L` bounds the mass of strings longer than `L`.
    pub fn min_stop_prob(&self) -> f64 {
        let unseen = 1.0 / self.vocab as f64;
        self.counts
            .keys()
            .map(|h| self.prob_next(h, Alphabet::EOS))
            .fold(unseen, f64::min)
    }
}

#[derive(Serialize, Deserialize)]
struct CharNGramFile {
    order: usize,
    alpha: f64,
    vocab: usize,
    histories: Vec<HistoryCounts>,
}

#[derive(Serialize, Deserialize)]
struct HistoryCounts {
    history: Vec<u32>,
    /// Sparse `(symbol, count)` pairs.
    counts: Vec<(u32, f64)>,
}

impl From<CharNGram> for CharNGramFile {
    fn from(m: CharNGram) -> Self {
        let sorted: BTreeMap<_, _> = m.counts.into_iter().collect();
        let histories = sorted
            .into_iter()
            .map(|(history, c)| HistoryCounts {
                history,
                counts: c
                    .into_iter()
                    .enumerate()
                    .filter(|&(_, x)| x != 0.0)
                    .map(|(s, x)| (s as u32, x))
                    .collect(),
            })
            .collect();
        CharNGramFile {
            order: m.order,
            alpha: m.alpha,
            vocab: m.vocab,
            histories,
        }
    }
}

impl From<CharNGramFile> for CharNGram {
    fn from(f: CharNGramFile) -> Self {
        let mut counts = HashMap::with_capacity(f.histories.len());
        for h in f.histories {
            let mut dense = vec![0.0; f.vocab];
            for (s, x) in h.counts {
                dense[s as usize] = x;
            }
            counts.insert(h.history, dense);
        }
        let totals = counts.iter().map(|(h, c)| (h.clone(), c.iter().sum())).collect();
        CharNGram {
            order: f.order,
            alpha: f.alpha,
            vocab: f.vocab,
            counts,
            totals,
        }
    }
}
