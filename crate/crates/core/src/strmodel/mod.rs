//! Conditional string models `q(m_i | m_j)` and `q(m_i | ε)`.
//!
//! The reference model mixes a suffix edit-rule distribution, learned per
//! `(src_slot, tgt_slot)` pair, with a smoothed character n-gram per target
//! slot:
//!
//! ```text
//! q(tgt | src) = (1 - λ) · q_rules(tgt | src) + λ · q_char(tgt)
//! q(tgt | ε)   = q_char(tgt)
//! ```
//!
//! When no rule applies to `src`, `q_rules` has no mass to give and
//! `q_char` is used alone. The character model gives every string positive
//! probability, so every score is finite. All logarithms are base 2.

mod ngram;
mod rules;
mod scores;

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{Alphabet, Paradigm, SlotId, SlotInventory, TrainPair};
use crate::error::{Error, Result};
use crate::par;
use crate::structure::Arborescence;

pub use ngram::CharNGram;
pub use rules::{EditRule, EditRuleTable};
pub use scores::{ScoreTable, ROOT_SLOT};

/// Anything that can score `log₂ q(tgt | src)`, `src = None` meaning the
/// empty string.
pub trait ConditionalScorer: Sync {
    fn logprob(&self, src: Option<(&str, &SlotId)>, tgt_slot: &SlotId, tgt: &str) -> Result<f64>;
}

/// Version tag written into serialized models.
pub const MODEL_FORMAT: &str = "morphcx-model/1";

/// λ used when there is no development data to select it.
pub const DEFAULT_LAMBDA: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Character n-gram order.
    pub order: usize,
    /// Add-α smoothing for both rules and characters.
    pub alpha: f64,
    pub lambda_grid: Vec<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            order: 3,
            alpha: 0.1,
            lambda_grid: vec![0.5, 0.2, 0.1, 0.05, 0.01, 0.001],
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(Error::Invalid("n-gram order must be >= 1".into()));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::Invalid(format!("alpha must be positive, got {}", self.alpha)));
        }
        if self.lambda_grid.is_empty() {
            return Err(Error::Invalid("lambda grid is empty".into()));
        }
        if let Some(bad) = self.lambda_grid.iter().find(|&&l| !(l > 0.0 && l < 1.0)) {
            return Err(Error::Invalid(format!("lambda {bad} outside (0, 1)")));
        }
        Ok(())
    }
}

/// The shared model behind every factor of the tree-factored joint.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelFile", into = "ModelFile")]
pub struct ConditionalParadigmModel {
    alphabet: Alphabet,
    order: usize,
    alpha: f64,
    lambda: f64,
    /// src_slot -> tgt_slot -> rules
    rule_tables: HashMap<SlotId, HashMap<SlotId, EditRuleTable>>,
    char_models: BTreeMap<SlotId, CharNGram>,
    /// Character model over all target forms, for slots never seen as targets.
    fallback_char: CharNGram,
    /// `(λ, dev cross-entropy in bits per pair)` for each grid point tried.
    dev_cross_entropy: Vec<(f64, f64)>,
}

impl ConditionalParadigmModel {
    /// Fit by maximum likelihood on `pairs`; pick λ on `dev_pairs`.
    pub fn train(pairs: &[TrainPair], config: &TrainConfig, dev_pairs: &[TrainPair]) -> Result<Self> {
        config.validate()?;
        if pairs.is_empty() {
            return Err(Error::InsufficientData("no training pairs".into()));
        }
        let train_lex: HashSet<&str> = pairs.iter().map(|p| p.lexeme.as_str()).collect();
        if let Some(p) = dev_pairs.iter().find(|p| train_lex.contains(p.lexeme.as_str())) {
            return Err(Error::Invalid(format!(
                "dev lexeme {:?} also occurs in training pairs",
                p.lexeme
            )));
        }

        let alphabet = Alphabet::from_forms(
            pairs
                .iter()
                .flat_map(|p| p.src.as_deref().into_iter().chain([p.tgt.as_str()])),
        );

        let mut rule_tables: HashMap<SlotId, HashMap<SlotId, EditRuleTable>> = HashMap::new();
        for p in pairs {
            if let Some((src, src_slot)) = p.source() {
                rule_tables
                    .entry(src_slot.clone())
                    .or_default()
                    .entry(p.tgt_slot.clone())
                    .or_default()
                    .add(EditRule::extract(src, &p.tgt));
            }
        }

        // Each (lexeme, slot, form) counts once, however many pairs target it.
        let mut seen = HashSet::new();
        let mut targets: BTreeMap<&SlotId, Vec<Vec<u32>>> = BTreeMap::new();
        for p in pairs {
            if seen.insert((p.lexeme.as_str(), &p.tgt_slot, p.tgt.as_str())) {
                targets.entry(&p.tgt_slot).or_default().push(alphabet.encode(&p.tgt));
            }
        }
        let vocab = alphabet.vocab_size();
        let char_models = targets
            .iter()
            .map(|(slot, seqs)| {
                let m = CharNGram::fit(config.order, config.alpha, vocab, seqs.iter().map(Vec::as_slice));
                ((*slot).clone(), m)
            })
            .collect();
        let fallback_char = CharNGram::fit(
            config.order,
            config.alpha,
            vocab,
            targets.values().flatten().map(Vec::as_slice),
        );

        let mut model = ConditionalParadigmModel {
            alphabet,
            order: config.order,
            alpha: config.alpha,
            lambda: DEFAULT_LAMBDA,
            rule_tables,
            char_models,
            fallback_char,
            dev_cross_entropy: Vec::new(),
        };
        model.select_lambda(&config.lambda_grid, dev_pairs);
        Ok(model)
    }

    fn select_lambda(&mut self, grid: &[f64], dev_pairs: &[TrainPair]) {
        let dev: Vec<&TrainPair> = dev_pairs.iter().filter(|p| !p.is_root()).collect();
        if dev.is_empty() {
            log::warn!("no development pairs; lambda defaults to {DEFAULT_LAMBDA}");
            return;
        }
        let parts = par::map_slice(&dev, |p| {
            let (src, src_slot) = p.source().expect("non-root pair");
            (self.rule_prob(src, src_slot, &p.tgt_slot, &p.tgt), self.char_logprob(&p.tgt_slot, &p.tgt))
        });
        let mut best = (f64::INFINITY, DEFAULT_LAMBDA);
        for &lambda in grid {
            let total: f64 = parts.iter().map(|&(qr, lc)| mix(lambda, qr, lc)).sum();
            let ce = -total / parts.len() as f64;
            self.dev_cross_entropy.push((lambda, ce));
            if ce < best.0 {
                best = (ce, lambda);
            }
        }
        self.lambda = best.1;
        log::info!("selected lambda {} (dev cross-entropy {:.4} bits/pair)", best.1, best.0);
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn dev_cross_entropy(&self) -> &[(f64, f64)] {
        &self.dev_cross_entropy
    }

    /// Copy of the model with a different mixing weight.
    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::Invalid(format!("lambda {lambda} outside (0, 1)")));
        }
        Ok(ConditionalParadigmModel {
            lambda,
            ..self.clone()
        })
    }

    pub fn rule_table(&self, src_slot: &SlotId, tgt_slot: &SlotId) -> Option<&EditRuleTable> {
        self.rule_tables.get(src_slot)?.get(tgt_slot)
    }

    /// The character model scoring forms of `tgt_slot`.
    pub fn char_model(&self, tgt_slot: &SlotId) -> &CharNGram {
        self.char_models.get(tgt_slot).unwrap_or(&self.fallback_char)
    }

    fn rule_prob(&self, src: &str, src_slot: &SlotId, tgt_slot: &SlotId, tgt: &str) -> Option<f64> {
        self.rule_table(src_slot, tgt_slot)?.prob(src, tgt, self.alpha)
    }

    fn char_logprob(&self, tgt_slot: &SlotId, tgt: &str) -> f64 {
        let ids = self.alphabet.encode(tgt);
        if ids.contains(&Alphabet::UNK) {
            log::trace!("{tgt:?} has characters outside the training alphabet");
        }
        self.char_model(tgt_slot).log2prob(&ids)
    }

    /// `log₂ q(tgt | src)` in bits; always finite.
    pub fn logprob(&self, src: Option<(&str, &SlotId)>, tgt_slot: &SlotId, tgt: &str) -> f64 {
        let lc = self.char_logprob(tgt_slot, tgt);
        match src {
            None => lc,
            Some((form, slot)) => mix(self.lambda, self.rule_prob(form, slot, tgt_slot, tgt), lc),
        }
    }
}

/// `log₂((1-λ)·q_rules + λ·2^lc)`, computed without leaving log space.
fn mix(lambda: f64, q_rules: Option<f64>, lc: f64) -> f64 {
    match q_rules {
        None => lc,
        Some(q) if q > 0.0 => {
            let a = (1.0 - lambda).log2() + q.log2();
            let b = lambda.log2() + lc;
            let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
            hi + (lo - hi).exp2().ln_1p() / std::f64::consts::LN_2
        }
        Some(_) => lambda.log2() + lc,
    }
}

impl ConditionalScorer for ConditionalParadigmModel {
    fn logprob(&self, src: Option<(&str, &SlotId)>, tgt_slot: &SlotId, tgt: &str) -> Result<f64> {
        Ok(ConditionalParadigmModel::logprob(self, src, tgt_slot, tgt))
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    alphabet: Alphabet,
    order: usize,
    alpha: f64,
    lambda: f64,
    dev_cross_entropy: Vec<(f64, f64)>,
    char_models: BTreeMap<SlotId, CharNGram>,
    fallback_char: CharNGram,
    rule_tables: Vec<RuleTableFile>,
}

#[derive(Serialize, Deserialize)]
struct RuleTableFile {
    src_slot: SlotId,
    tgt_slot: SlotId,
    rules: EditRuleTable,
}

impl From<ConditionalParadigmModel> for ModelFile {
    fn from(m: ConditionalParadigmModel) -> Self {
        let mut rule_tables: Vec<RuleTableFile> = m
            .rule_tables
            .into_iter()
            .flat_map(|(src_slot, by_tgt)| {
                by_tgt.into_iter().map(move |(tgt_slot, rules)| RuleTableFile {
                    src_slot: src_slot.clone(),
                    tgt_slot,
                    rules,
                })
            })
            .collect();
        rule_tables.sort_by(|a, b| (&a.src_slot, &a.tgt_slot).cmp(&(&b.src_slot, &b.tgt_slot)));
        ModelFile {
            format: MODEL_FORMAT.to_string(),
            alphabet: m.alphabet,
            order: m.order,
            alpha: m.alpha,
            lambda: m.lambda,
            dev_cross_entropy: m.dev_cross_entropy,
            char_models: m.char_models,
            fallback_char: m.fallback_char,
            rule_tables,
        }
    }
}

impl TryFrom<ModelFile> for ConditionalParadigmModel {
    type Error = Error;

    fn try_from(f: ModelFile) -> Result<Self> {
        if f.format != MODEL_FORMAT {
            return Err(Error::Invalid(format!(
                "unsupported model format {:?} (expected {MODEL_FORMAT})",
                f.format
            )));
        }
        let mut rule_tables: HashMap<SlotId, HashMap<SlotId, EditRuleTable>> = HashMap::new();
        for t in f.rule_tables {
            rule_tables.entry(t.src_slot).or_default().insert(t.tgt_slot, t.rules);
        }
        Ok(ConditionalParadigmModel {
            alphabet: f.alphabet,
            order: f.order,
            alpha: f.alpha,
            lambda: f.lambda,
            rule_tables,
            char_models: f.char_models,
            fallback_char: f.fallback_char,
            dev_cross_entropy: f.dev_cross_entropy,
        })
    }
}

/// Joint score of one paradigm under a tree-factored model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JointLogProb {
    /// Σ log₂ q over scored slots.
    pub bits: f64,
    /// Number of slots scored (filled slots of the paradigm).
    pub scored: usize,
    /// The part of `bits` spent on forms conditioned on the empty string.
    pub root_bits: f64,
}

/// `Σ_i log₂ q(m_i | m_pa(i))`, the root slot conditioned on the empty
/// string.
///
/// Unfilled slots are skipped; a filled slot whose parent is unfilled is
/// conditioned on the empty string.
pub fn joint_logprob<S: ConditionalScorer + ?Sized>(
    scorer: &S,
    tree: &Arborescence,
    inventory: &SlotInventory,
    paradigm: &Paradigm,
) -> Result<JointLogProb> {
    if tree.len() != inventory.len() {
        return Err(Error::Invalid(format!(
            "tree over {} slots, inventory has {}",
            tree.len(),
            inventory.len()
        )));
    }
    let forms = paradigm.forms_by_index(inventory);
    let mut bits = 0.0;
    let mut root_bits = 0.0;
    let mut scored = 0;
    for (i, form) in forms.iter().enumerate() {
        let Some(form) = form else { continue };
        let src = tree
            .parent(i)
            .and_then(|p| forms[p].map(|f| (f, inventory.get(p))));
        let lp = scorer.logprob(src, inventory.get(i), form)?;
        bits += lp;
        if src.is_none() {
            root_bits += lp;
        }
        scored += 1;
    }
    Ok(JointLogProb { bits, scored, root_bits })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Paradigm;

    fn pair(lex: &str, src: Option<(&str, &str)>, tgt: &str, tgt_slot: &str) -> TrainPair {
        TrainPair {
            src: src.map(|(f, _)| f.to_string()),
            src_slot: src.map(|(_, s)| SlotId::new(s)),
            tgt: tgt.into(),
            tgt_slot: SlotId::new(tgt_slot),
            lexeme: lex.into(),
        }
    }

    #[test]
    fn single_pair_by_hand() {
        // Trained on "a" -> "b" only, unigram characters, λ = 0.5.
        let pairs = [pair("x", Some(("a", "S")), "b", "T")];
        let cfg = TrainConfig {
            order: 1,
            alpha: 0.1,
            lambda_grid: vec![0.5],
        };
        let m = ConditionalParadigmModel::train(&pairs, &cfg, &[]).unwrap().with_lambda(0.5).unwrap();
        // vocab {EOS, UNK, a, b}; char model for T saw "b" once: b=1, EOS=1.
        let p_b: f64 = 1.1 / (2.0 + 0.4);
        let q_char = p_b * p_b;
        let expected = (0.5 + 0.5 * q_char).log2();
        let got = m.logprob(Some(("a", &"S".into())), &"T".into(), "b");
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
        assert!(got > -1.0);
    }

    #[test]
    fn learns_suffixation() {
        let stems: Vec<String> = (0..1000).map(|i| format!("st{}", i.to_string().replace('0', "o"))).collect();
        let pairs: Vec<TrainPair> = stems
            .iter()
            .enumerate()
            .map(|(i, s)| pair(&format!("L{i}"), Some((s.as_str(), "A")), &format!("{s}s"), "B"))
            .collect();
        let dev = [pair("held", Some(("zorba", "A")), "zorbas", "B")];
        let m = ConditionalParadigmModel::train(&pairs, &TrainConfig::default(), &dev).unwrap();
        let rules = m.rule_table(&"A".into(), &"B".into()).unwrap().rules();
        assert_eq!(rules.len(), 1);
        assert_eq!((rules[0].src_suffix.as_str(), rules[0].tgt_suffix.as_str()), ("", "s"));
        let q = m.logprob(Some(("quxit", &"A".into())), &"B".into(), "quxits").exp2();
        assert!(q > 0.9, "q = {q}");
    }

    #[test]
    fn lambda_is_grid_argmin() {
        let pairs: Vec<TrainPair> = (0..50)
            .map(|i| pair(&format!("L{i}"), Some((&format!("k{i}a"), "A")), &format!("k{i}e"), "B"))
            .collect();
        let dev: Vec<TrainPair> = (0..10)
            .map(|i| pair(&format!("D{i}"), Some((&format!("m{i}a"), "A")), &format!("m{i}o"), "B"))
            .collect();
        let m = ConditionalParadigmModel::train(&pairs, &TrainConfig::default(), &dev).unwrap();
        let ce = m.dev_cross_entropy();
        assert_eq!(ce.len(), 6);
        let best = ce.iter().cloned().fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        assert_eq!(m.lambda(), best.0);
        // dev targets never follow the rule, so the largest λ wins
        assert_eq!(m.lambda(), 0.5);
    }

    #[test]
    fn train_errors() {
        assert!(matches!(
            ConditionalParadigmModel::train(&[], &TrainConfig::default(), &[]),
            Err(Error::InsufficientData(_))
        ));
        let p = [pair("x", Some(("a", "S")), "b", "T")];
        assert!(ConditionalParadigmModel::train(&p, &TrainConfig::default(), &p).is_err());
        let m = ConditionalParadigmModel::train(&p, &TrainConfig::default(), &[]).unwrap();
        assert_eq!(m.lambda(), DEFAULT_LAMBDA);
    }

    #[test]
    fn unknown_characters_still_score() {
        let p = [pair("x", Some(("ab", "S")), "abb", "T")];
        let m = ConditionalParadigmModel::train(&p, &TrainConfig::default(), &[]).unwrap();
        let lp = m.logprob(Some(("ab", &"S".into())), &"T".into(), "ξψ");
        assert!(lp.is_finite() && lp < 0.0);
        let lp = m.logprob(None, &"UNSEEN".into(), "abba");
        assert!(lp.is_finite());
    }

    #[test]
    fn mix_matches_direct_formula() {
        for &(l, q, lc) in &[(0.05, 0.3, -12.0), (0.5, 1.0, -1.0), (0.001, 1e-9, -3.0)] {
            let direct = ((1.0 - l) * q + l * f64::exp2(lc)).log2();
            assert!((mix(l, Some(q), lc) - direct).abs() < 1e-12);
        }
        assert_eq!(mix(0.25, Some(0.0), -3.0), -5.0);
        assert_eq!(mix(0.25, None, -3.0), -3.0);
    }

    #[test]
    fn model_serde_round_trip() {
        let pairs: Vec<TrainPair> = (0..20)
            .flat_map(|i| {
                let s = format!("b{i}");
                [
                    pair(&s, Some((&s, "A")), &format!("{s}s"), "B"),
                    pair(&s, None, &format!("{s}s"), "B"),
                    pair(&s, None, &s, "A"),
                ]
            })
            .collect();
        let m = ConditionalParadigmModel::train(&pairs, &TrainConfig::default(), &[]).unwrap();
        let json = serde_json::to_string(&m).unwrap();
        let back: ConditionalParadigmModel = serde_json::from_str(&json).unwrap();
        assert_eq!(m, back);
        assert_eq!(serde_json::to_string(&back).unwrap(), json);
        let bad = json.replace(MODEL_FORMAT, "other/9");
        assert!(serde_json::from_str::<ConditionalParadigmModel>(&bad).is_err());
    }

    struct Stub;
    impl ConditionalScorer for Stub {
        fn logprob(&self, src: Option<(&str, &SlotId)>, _: &SlotId, _: &str) -> Result<f64> {
            Ok(if src.is_none() { -1.0 } else { -2.0 })
        }
    }

    #[test]
    fn joint_of_hand_set_stub() {
        let inv = SlotInventory::new(vec!["A".into(), "B".into()]).unwrap();
        let tree = Arborescence::new(0, vec![None, Some(0)]).unwrap();
        let mut p = Paradigm::new("x");
        p.entries.insert("A".into(), "a".into());
        p.entries.insert("B".into(), "b".into());
        let j = joint_logprob(&Stub, &tree, &inv, &p).unwrap();
        assert_eq!(j, JointLogProb { bits: -3.0, scored: 2, root_bits: -1.0 });

        // B's parent missing: B is scored from the empty string.
        p.entries.remove(&SlotId::new("A"));
        let j = joint_logprob(&Stub, &tree, &inv, &p).unwrap();
        assert_eq!(j, JointLogProb { bits: -1.0, scored: 1, root_bits: -1.0 });
    }
}
