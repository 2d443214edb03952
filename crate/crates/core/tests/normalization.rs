//! The reference model is a proper distribution over all target strings and
//! never assigns zero probability.

use std::collections::{BTreeMap, HashSet};

use morphcx::corpus::{build_paradigms, paradigm_pairs, parse_unimorph, Paradigm, SlotId, TrainPair};
use morphcx::fixtures;
use morphcx::platbaseline::{form_prob, Plat};
use morphcx::strmodel::{ConditionalParadigmModel, TrainConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stands in for any character outside the training alphabet.
const FOREIGN: char = 'z';
const MAX_LEN: usize = 32;
const EXPLICIT_LEN: usize = 8;

fn ab_paradigms(rng: &mut ChaCha8Rng, count: usize) -> Vec<Paradigm> {
    (0..count)
        .map(|k| {
            let stem: String = (0..rng.gen_range(1..=2)).map(|_| if rng.gen_bool(0.5) { 'a' } else { 'b' }).collect();
            let mut p = Paradigm::new(format!("lex{k}"));
            p.entries.insert(SlotId::new("X"), stem.clone());
            let y = if rng.gen_bool(0.7) { format!("{stem}ab") } else { format!("{stem}b") };
            p.entries.insert(SlotId::new("Y"), y);
            p
        })
        .collect()
}

/// Add-α bigram over {EOS, UNK, a, b}, counted directly from the strings.
struct Bigram {
    next: BTreeMap<usize, [f64; 4]>,
}

impl Bigram {
    const EOS: usize = 0;

    fn sym(c: char) -> usize {
        match c {
            'a' => 2,
            'b' => 3,
            _ => 1,
        }
    }

    fn fit(strings: &[String], alpha: f64) -> Self {
        let mut counts: BTreeMap<usize, [f64; 4]> = BTreeMap::new();
        for s in strings {
            let mut h = Self::EOS;
            for x in s.chars().map(Self::sym).chain([Self::EOS]) {
                counts.entry(h).or_insert([0.0; 4])[x] += 1.0;
                h = x;
            }
        }
        let next = (0..4)
            .map(|h| {
                let c = counts.get(&h).copied();
                let row = match c {
                    Some(c) => {
                        let total: f64 = c.iter().sum::<f64>() + 4.0 * alpha;
                        c.map(|x| (x + alpha) / total)
                    }
                    None => [0.25; 4],
                };
                (h, row)
            })
            .collect();
        Bigram { next }
    }

    fn prob(&self, s: &str) -> f64 {
        let mut h = Self::EOS;
        let mut p = 1.0;
        for x in s.chars().map(Self::sym).chain([Self::EOS]) {
            p *= self.next[&h][x];
            h = x;
        }
        p
    }

    /// `mass[L]` = probability of all strings of length exactly `L`.
    fn mass_by_length(&self, max_len: usize) -> Vec<f64> {
        let mut front = [1.0, 0.0, 0.0, 0.0];
        let mut out = Vec::with_capacity(max_len + 1);
        for _ in 0..=max_len {
            out.push((0..4).map(|h| front[h] * self.next[&h][Self::EOS]).sum());
            let mut step = [0.0; 4];
            for (h, &f) in front.iter().enumerate() {
                for (x, cell) in step.iter_mut().enumerate().skip(1) {
                    *cell += f * self.next[&h][x];
                }
            }
            front = step;
        }
        out
    }
}

fn all_strings(max_len: usize) -> Vec<String> {
    let mut out = vec![String::new()];
    let mut layer = vec![String::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|s| ['a', 'b', FOREIGN].map(|c| format!("{s}{c}")))
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

fn unique_targets(pairs: &[TrainPair], slot: &str) -> Vec<String> {
    let mut seen = HashSet::new();
    pairs
        .iter()
        .filter(|p| p.tgt_slot.as_str() == slot && seen.insert((p.lexeme.clone(), p.tgt.clone())))
        .map(|p| p.tgt.clone())
        .collect()
}

#[test]
fn mass_over_bounded_strings() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let paradigms = ab_paradigms(&mut rng, 40);
    let pairs: Vec<TrainPair> = paradigms.iter().flat_map(paradigm_pairs).collect();
    let cfg = TrainConfig {
        order: 2,
        ..TrainConfig::default()
    };
    let model = ConditionalParadigmModel::train(&pairs, &cfg, &[]).unwrap();
    let lambda = model.lambda();
    let (x, y) = (SlotId::new("X"), SlotId::new("Y"));

    let contexts: Vec<(Option<(&str, &SlotId)>, &SlotId)> = vec![
        (None, &x),
        (None, &y),
        (Some(("a", &x)), &y),
        (Some(("ba", &x)), &y),
        (Some(("bb", &x)), &y),
        (Some(("zz", &x)), &y),
        (Some(("abab", &y)), &x),
        (Some(("bb", &y)), &x),
        (Some(("", &x)), &y),
        (Some(("azb", &y)), &x),
    ];
    let short = all_strings(EXPLICIT_LEN);

    for (src, tgt_slot) in contexts {
        let oracle = Bigram::fit(&unique_targets(&pairs, tgt_slot.as_str()), cfg.alpha);
        let by_len = oracle.mass_by_length(MAX_LEN);
        let char_short: f64 = by_len[..=EXPLICIT_LEN].iter().sum();
        let char_all: f64 = by_len.iter().sum();

        // The char component agrees with the counted bigram string by string.
        for s in short.iter().take(200) {
            let lc = model.char_model(tgt_slot).log2prob(&model.alphabet().encode(s));
            assert!((lc.exp2() - oracle.prob(s)).abs() < 1e-12, "{s:?}");
        }

        let explicit: f64 = short.iter().map(|s| model.logprob(src, tgt_slot, s).exp2()).sum();

        // Beyond the explicit range only the char component contributes.
        let long = "ab".repeat(7);
        let w = model.logprob(src, tgt_slot, &long).exp2() / oracle.prob(&long);
        let rules_apply = (w - lambda).abs() < 1e-9;
        assert!(rules_apply || (w - 1.0).abs() < 1e-9, "weight {w}");
        if src.is_none() {
            assert!(!rules_apply);
        }

        // Rule mass is fully inside the explicit range and sums to 1.
        let expect_short = if rules_apply { (1.0 - lambda) + lambda * char_short } else { char_short };
        assert!((explicit - expect_short).abs() < 1e-9, "{src:?}: {explicit} vs {expect_short}");

        let total = explicit + w * (char_all - char_short);
        assert!(total >= 0.999 && total <= 1.0 + 1e-9, "{src:?} -> {tgt_slot}: {total}");
    }
}

fn english_model() -> (ConditionalParadigmModel, Vec<TrainPair>) {
    let words = parse_unimorph(fixtures::ENGLISH_VERBS.as_bytes()).unwrap();
    let (_, paradigms) = build_paradigms(&words, None).unwrap();
    let pairs: Vec<TrainPair> = paradigms.iter().flat_map(paradigm_pairs).collect();
    (ConditionalParadigmModel::train(&pairs, &TrainConfig::default(), &[]).unwrap(), pairs)
}

#[test]
fn random_pairs_have_finite_logprob() {
    let (model, _) = english_model();
    let chars: Vec<char> = "abcdefghijklmnopqrstuvwxyzäößñ-' ".chars().collect();
    let slots = [SlotId::new("V;NFIN"), SlotId::new("V;PST"), SlotId::new("V;V.PTCP;PRS")];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let word = |rng: &mut ChaCha8Rng| -> String {
        (0..rng.gen_range(0..=12)).map(|_| chars[rng.gen_range(0..chars.len())]).collect()
    };
    for _ in 0..10_000 {
        let src = word(&mut rng);
        let tgt = word(&mut rng);
        let s_slot = &slots[rng.gen_range(0..slots.len())];
        let t_slot = &slots[rng.gen_range(0..slots.len())];
        let src = rng.gen_bool(0.9).then_some((src.as_str(), s_slot));
        let lp = model.logprob(src, t_slot, &tgt);
        assert!(lp.is_finite() && lp <= 0.0, "{src:?} -> {tgt:?}: {lp}");
    }
}

#[test]
fn suppletive_past_is_improbable_but_possible() {
    let (model, _) = english_model();
    let (nfin, pst) = (SlotId::new("V;NFIN"), SlotId::new("V;PST"));
    let went = model.logprob(Some(("go", &nfin)), &pst, "went");
    let goed = model.logprob(Some(("go", &nfin)), &pst, "goed");
    assert!(went.is_finite());
    assert!(goed > went + 5.0, "goed {goed}, went {went}");

    let plat = Plat::parse(fixtures::ENGLISH_PAST_PLAT).unwrap();
    let (i, j) = (plat.slot_index("V;PST").unwrap(), plat.slot_index("V;NFIN").unwrap());
    assert_eq!(form_prob(&plat, i, j, "go", "went").unwrap(), 0.0);
}
