//! The two complexity measures, plus synthetic inflection systems whose
//! class entropy is known in closed form.

use std::io::{Read, Write};

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{DataSplit, Paradigm, SlotId, SlotInventory};
use crate::error::{Error, Result};
use crate::par;
use crate::strmodel::{joint_logprob, ConditionalParadigmModel, ConditionalScorer, TrainConfig};
use crate::structure::{compute_weights, max_arborescence, tree_score, Arborescence, WeightMatrix};

/// One language/POS measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexityPoint {
    pub language: String,
    pub pos: String,
    pub regime: String,
    pub e_complexity: usize,
    pub i_total_bits: f64,
    pub i_per_form_bits: f64,
    pub d: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_hash: Option<String>,
}

impl ComplexityPoint {
    pub fn write_csv<W: Write>(points: &[ComplexityPoint], out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for p in points {
            w.serialize(p)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Vec<ComplexityPoint>> {
        let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
        let mut out = Vec::new();
        for row in r.deserialize() {
            out.push(row?);
        }
        Ok(out)
    }
}

/// Paradigm size: the largest number of filled slots of any lexeme.
pub fn e_complexity(paradigms: &[Paradigm]) -> Result<usize> {
    paradigms
        .iter()
        .map(Paradigm::size)
        .max()
        .filter(|&m| m > 0)
        .ok_or_else(|| Error::InsufficientData("no paradigms to measure".into()))
}

/// Held-out cross-entropy of the tree-factored model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IComplexity {
    /// Mean joint bits per test paradigm.
    pub total_bits: f64,
    /// Bits per scored form.
    pub per_form_bits: f64,
    pub d: usize,
    pub scored_forms: usize,
    /// Mean bits per paradigm spent generating forms with no conditioning
    /// form (the tree root, or orphans of unfilled parents).
    pub root_bits: f64,
}

impl IComplexity {
    /// `total_bits - root_bits`: what the slot-to-slot edges cost.
    pub fn conditional_bits(&self) -> f64 {
        self.total_bits - self.root_bits
    }
}

/// `-(1/d) Σ log₂ q(m_1..m_n)` over the test paradigms, and the same total
/// spread over the forms actually scored (`total / n` for full paradigms).
pub fn i_complexity<S: ConditionalScorer + ?Sized>(
    scorer: &S,
    tree: &Arborescence,
    inventory: &SlotInventory,
    test: &[Paradigm],
) -> Result<IComplexity> {
    if test.is_empty() {
        return Err(Error::InsufficientData("empty test set".into()));
    }
    let joints = par::map_slice(test, |p| joint_logprob(scorer, tree, inventory, p));
    let mut bits = 0.0;
    let mut root = 0.0;
    let mut scored = 0;
    for j in joints {
        let j = j?;
        bits += j.bits;
        root += j.root_bits;
        scored += j.scored;
    }
    let d = test.len();
    let total_bits = -bits / d as f64;
    Ok(IComplexity {
        total_bits,
        per_form_bits: -bits / scored as f64,
        d,
        scored_forms: scored,
        root_bits: -root / d as f64,
    })
}

/// Everything learned from dev data for one scorer, and the test figure.
#[derive(Clone, Debug)]
pub struct Measurement {
    pub weights: WeightMatrix,
    pub tree: Arborescence,
    /// Total weight of `tree`.
    pub tree_score: f64,
    pub complexity: IComplexity,
}

/// Weights on `dev`, best tree, cross-entropy on `test`.
pub fn measure<S: ConditionalScorer + ?Sized>(
    scorer: &S,
    inventory: &SlotInventory,
    dev: &[Paradigm],
    test: &[Paradigm],
) -> Result<Measurement> {
    let weights = compute_weights(scorer, inventory, dev)?;
    let tree = max_arborescence(&weights)?;
    let score = tree_score(&tree, &weights)?;
    let complexity = i_complexity(scorer, &tree, inventory, test)?;
    Ok(Measurement {
        weights,
        tree,
        tree_score: score,
        complexity,
    })
}

/// Train the reference model on a split and measure it.
pub fn measure_split(
    split: &DataSplit,
    inventory: &SlotInventory,
    config: &TrainConfig,
) -> Result<(ConditionalParadigmModel, Measurement)> {
    let model = ConditionalParadigmModel::train(&split.train, config, &split.dev_pairs())?;
    let m = measure(&model, inventory, &split.dev, &split.test)?;
    Ok((model, m))
}

/// Stem shapes for a synthetic language: syllables are onset + vowel, with an
/// optional coda on the last syllable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StemSpec {
    pub onsets: Vec<String>,
    pub vowels: Vec<String>,
    #[serde(default)]
    pub codas: Vec<String>,
    pub min_syllables: usize,
    pub max_syllables: usize,
}

impl Default for StemSpec {
    fn default() -> Self {
        let s = |xs: &[&str]| xs.iter().map(|x| x.to_string()).collect();
        StemSpec {
            onsets: s(&["p", "t", "k", "b", "d", "g", "m", "n", "l", "r", "s", "v"]),
            vowels: s(&["a", "e", "i", "o", "u"]),
            codas: s(&["", "", "n", "r", "l", "k"]),
            min_syllables: 1,
            max_syllables: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthClass {
    pub weight: f64,
    /// One exponent per slot.
    pub suffixes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub name: String,
    pub pos: String,
    pub slots: Vec<String>,
    pub classes: Vec<SynthClass>,
    #[serde(default)]
    pub stems: StemSpec,
}

/// Paradigm sampler for a concatenative system with declension classes.
///
/// Stems and classes draw from separate random streams of the same seed, so
/// two systems sampled with one seed share their stems lexeme for lexeme.
#[derive(Clone, Debug)]
pub struct SynthSystem {
    spec: SynthSpec,
    inventory: SlotInventory,
    classes: WeightedIndex<f64>,
}

impl SynthSystem {
    pub fn new(spec: SynthSpec) -> Result<Self> {
        let n = spec.slots.len();
        if n == 0 {
            return Err(Error::Invalid("synthetic system needs at least one slot".into()));
        }
        if spec.classes.is_empty() {
            return Err(Error::Invalid("synthetic system needs at least one class".into()));
        }
        let total: f64 = spec.classes.iter().map(|c| c.weight).sum();
        if spec.classes.iter().any(|c| !(c.weight >= 0.0 && c.weight <= 1.0)) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::Invalid(format!(
                "class probabilities must lie in [0, 1] and sum to 1 (sum = {total})"
            )));
        }
        if let Some(c) = spec.classes.iter().find(|c| c.suffixes.len() != n) {
            return Err(Error::Invalid(format!(
                "class has {} suffixes for {n} slots",
                c.suffixes.len()
            )));
        }
        let st = &spec.stems;
        if st.onsets.is_empty() || st.vowels.is_empty() || st.min_syllables == 0 || st.min_syllables > st.max_syllables {
            return Err(Error::Invalid("invalid stem generator".into()));
        }
        let inventory = SlotInventory::new(spec.slots.iter().map(|s| SlotId::new(s)).collect())?;
        let classes = WeightedIndex::new(spec.classes.iter().map(|c| c.weight))
            .map_err(|e| Error::Invalid(format!("class weights: {e}")))?;
        Ok(SynthSystem {
            spec,
            inventory,
            classes,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        SynthSystem::new(serde_json::from_str(text)?)
    }

    pub fn spec(&self) -> &SynthSpec {
        &self.spec
    }

    pub fn inventory(&self) -> &SlotInventory {
        &self.inventory
    }

    /// `-Σ p_c log₂ p_c`.
    pub fn class_entropy(&self) -> f64 {
        self.spec
            .classes
            .iter()
            .filter(|c| c.weight > 0.0)
            .fold(0.0, |h, c| h - c.weight * c.weight.log2())
    }

    pub fn sample(&self, count: usize, seed: u64) -> Vec<Paradigm> {
        let mut stem_rng = ChaCha8Rng::seed_from_u64(seed);
        stem_rng.set_stream(0);
        let mut class_rng = ChaCha8Rng::seed_from_u64(seed);
        class_rng.set_stream(1);
        (0..count)
            .map(|k| {
                let stem = self.stem(&mut stem_rng);
                let class = &self.spec.classes[self.classes.sample(&mut class_rng)];
                let mut p = Paradigm::new(format!("{}{k:05}", self.spec.name));
                for (slot, suffix) in self.inventory.slots().iter().zip(&class.suffixes) {
                    p.entries.insert(slot.clone(), format!("{stem}{suffix}"));
                }
                p
            })
            .collect()
    }

    fn stem(&self, rng: &mut ChaCha8Rng) -> String {
        let st = &self.spec.stems;
        let syllables = rng.gen_range(st.min_syllables..=st.max_syllables);
        let mut s = String::new();
        for _ in 0..syllables {
            s.push_str(st.onsets.choose(rng).expect("non-empty"));
            s.push_str(st.vowels.choose(rng).expect("non-empty"));
        }
        if let Some(coda) = st.codas.choose(rng) {
            s.push_str(coda);
        }
        s
    }
}
