//! Data bundled with the crate so the full test suite runs offline.

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Published per-language paradigm sizes and i-complexities (green regime).
pub const TABLE2_GREEN_CSV: &str = include_str!("../fixtures/table2_green.csv");
/// Modern Greek nominal inflection classes.
pub const GREEK_PLAT: &str = include_str!("../fixtures/greek_plat.tsv");
/// English past tense as a three-class exponent plat.
pub const ENGLISH_PAST_PLAT: &str = include_str!("../fixtures/english_past_plat.tsv");
/// Two German nouns in three cells each.
pub const TOY_LEXICON: &str = include_str!("../fixtures/toy_lexicon.tsv");
/// Regular English verbs (infinitive, past).
pub const ENGLISH_VERBS: &str = include_str!("../fixtures/english_verbs.tsv");
/// One declension class, pure concatenation.
pub const SYNTH_REGULAR: &str = include_str!("../fixtures/synth_regular.json");
/// Two equiprobable classes differing in one slot.
pub const SYNTH_TWO_CLASS: &str = include_str!("../fixtures/synth_two_class.json");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table2Row {
    pub language: String,
    pub pos: String,
    pub paradigm_size: usize,
    pub i_complexity: f64,
    pub scheme: String,
}

pub fn table2_rows() -> Result<Vec<Table2Row>> {
    read_table2(TABLE2_GREEN_CSV.as_bytes())
}

pub fn read_table2<R: std::io::Read>(input: R) -> Result<Vec<Table2Row>> {
    let mut r = csv::Reader::from_reader(input);
    let mut out = Vec::new();
    for row in r.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

/// `(paradigm size, i-complexity)` points of one POS from the bundled table.
pub fn table2_points(pos: &str) -> Vec<(f64, f64)> {
    table2_rows()
        .expect("bundled table parses")
        .into_iter()
        .filter(|r| r.pos == pos)
        .map(|r| (r.paradigm_size as f64, r.i_complexity))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table2_counts() {
        assert_eq!(table2_points("N").len(), 18);
        assert_eq!(table2_points("V").len(), 33);
        let rows = table2_rows().unwrap();
        let arabic = rows.iter().find(|r| r.language == "Arabic" && r.pos == "N").unwrap();
        assert_eq!((arabic.paradigm_size, arabic.i_complexity), (112, 0.44));
    }
}
