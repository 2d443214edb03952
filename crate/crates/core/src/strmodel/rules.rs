use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

/// A suffix rewrite `src_suffix -> tgt_suffix` observed `count` times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EditRule {
    pub src_suffix: String,
    pub tgt_suffix: String,
    pub count: f64,
}

impl EditRule {
    /// The rule relating `src` to `tgt` after stripping their longest common
    /// prefix.
    pub fn extract(src: &str, tgt: &str) -> EditRule {
        let cut = common_prefix_bytes(src, tgt);
        EditRule {
            src_suffix: src[cut..].to_string(),
            tgt_suffix: tgt[cut..].to_string(),
            count: 1.0,
        }
    }

    pub fn applies_to(&self, src: &str) -> bool {
        src.ends_with(&self.src_suffix)
    }

    pub fn apply(&self, src: &str) -> Option<String> {
        let stem = src.strip_suffix(self.src_suffix.as_str())?;
        Some(format!("{stem}{}", self.tgt_suffix))
    }
}

fn common_prefix_bytes(a: &str, b: &str) -> usize {
    a.char_indices()
        .zip(b.chars())
        .find(|((_, x), y)| x != y)
        .map(|((i, _), _)| i)
        .unwrap_or_else(|| a.len().min(b.len()))
}

/// The rules of one `(src_slot, tgt_slot)` transduction, indexed by source
/// suffix.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<EditRule>", into = "Vec<EditRule>")]
pub struct EditRuleTable {
    /// src_suffix -> [(tgt_suffix, count)], tgt_suffix sorted.
    by_src: HashMap<String, Vec<(String, f64)>>,
}

impl EditRuleTable {
    pub fn add(&mut self, rule: EditRule) {
        let bucket = self.by_src.entry(rule.src_suffix).or_default();
        match bucket.binary_search_by(|(t, _)| t.as_str().cmp(&rule.tgt_suffix)) {
            Ok(i) => bucket[i].1 += rule.count,
            Err(i) => bucket.insert(i, (rule.tgt_suffix, rule.count)),
        }
    }

    pub fn len(&self) -> usize {
        self.by_src.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.by_src.is_empty()
    }

    pub fn rules(&self) -> Vec<EditRule> {
        let sorted: BTreeMap<_, _> = self.by_src.iter().collect();
        sorted
            .into_iter()
            .flat_map(|(s, bucket)| {
                bucket.iter().map(move |(t, c)| EditRule {
                    src_suffix: s.clone(),
                    tgt_suffix: t.clone(),
                    count: *c,
                })
            })
            .collect()
    }

    /// Probability that `src` rewrites to `tgt`, with each applicable rule
    /// weighted by `count + alpha`. `None` when no rule applies.
    pub fn prob(&self, src: &str, tgt: &str, alpha: f64) -> Option<f64> {
        let mut total = 0.0;
        let mut hit = 0.0;
        let mut any = false;
        // every suffix of src, including "" and src itself
        let cuts = src.char_indices().map(|(i, _)| i).chain(std::iter::once(src.len()));
        for cut in cuts {
            let (stem, suffix) = src.split_at(cut);
            let Some(bucket) = self.by_src.get(suffix) else {
                continue;
            };
            any = true;
            let tail = tgt.strip_prefix(stem);
            for (tgt_suffix, count) in bucket {
                let w = count + alpha;
                total += w;
                if tail == Some(tgt_suffix.as_str()) {
                    hit += w;
                }
            }
        }
        any.then(|| hit / total)
    }
}

impl From<Vec<EditRule>> for EditRuleTable {
    fn from(rules: Vec<EditRule>) -> Self {
        let mut t = EditRuleTable::default();
        for r in rules {
            t.add(r);
        }
        t
    }
}

impl From<EditRuleTable> for Vec<EditRule> {
    fn from(t: EditRuleTable) -> Self {
        t.rules()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_to_haende() {
        let r = EditRule::extract("Hand", "Hände");
        assert_eq!((r.src_suffix.as_str(), r.tgt_suffix.as_str()), ("and", "ände"));
        assert_eq!(r.apply("Hand").as_deref(), Some("Hände"));
        assert_eq!(r.apply("Band").as_deref(), Some("Bände"));
        assert!(!r.applies_to("Fuß"));
    }

    #[test]
    fn pure_suffixation() {
        let r = EditRule::extract("walk", "walked");
        assert_eq!((r.src_suffix.as_str(), r.tgt_suffix.as_str()), ("", "ed"));
    }

    #[test]
    fn table_probabilities() {
        let mut t = EditRuleTable::default();
        for _ in 0..3 {
            t.add(EditRule::extract("kata", "katen"));
        }
        t.add(EditRule::extract("bo", "bos"));
        // "lola": applicable rules are "a"->"en" (3) and ""->"s" (1).
        let alpha = 0.1;
        let p_en = t.prob("lola", "lolen", alpha).unwrap();
        let p_s = t.prob("lola", "lolas", alpha).unwrap();
        assert!((p_en - 3.1 / 4.2).abs() < 1e-12);
        assert!((p_s - 1.1 / 4.2).abs() < 1e-12);
        assert_eq!(t.prob("lola", "went", alpha), Some(0.0));
        assert_eq!(t.len(), 2);

        let mut only_a = EditRuleTable::default();
        only_a.add(EditRule::extract("xa", "xb"));
        assert_eq!(only_a.prob("zzz", "zzzb", alpha), None);
    }

    proptest! {
        #[test]
        fn extracted_rule_reproduces_target(src in "\\PC{0,8}", tgt in "\\PC{0,8}") {
            let r = EditRule::extract(&src, &tgt);
            prop_assert_eq!(r.apply(&src), Some(tgt));
        }

        #[test]
        fn applicable_mass_sums_to_one(
            pairs in prop::collection::vec(("[abc]{0,4}", "[abc]{0,4}"), 1..12),
            src in "[abc]{0,5}",
        ) {
            let mut t = EditRuleTable::default();
            for (s, g) in &pairs {
                t.add(EditRule::extract(s, g));
            }
            if let Some(_) = t.prob(&src, "", 0.1) {
                // distinct outputs of the applicable rules carry all mass
                let mut outputs: Vec<String> = t.rules().iter().filter_map(|r| r.apply(&src)).collect();
                outputs.sort();
                outputs.dedup();
                let total: f64 = outputs.iter().map(|o| t.prob(&src, o, 0.1).unwrap()).sum();
                prop_assert!((total - 1.0).abs() < 1e-9);
            }
        }
    }
}
