//! Average conditional entropy over a declension-class plat.
//!
//! A plat lists, for every inflection class, the exponent (suffix) realizing
//! each slot. Conditional distributions between slots come from swapping
//! exponents among the classes compatible with an observed exponent; they
//! have finite support, which is exactly the limitation the joint-entropy
//! measure removes.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::corpus::SlotId;
use crate::error::{Error, Result};
use crate::structure::{max_arborescence, tree_score, Arborescence, WeightMatrix};

/// Spellings of the empty exponent accepted in plat files.
const EMPTY_MARKS: [&str; 4] = ["∅", "-∅", "-", ""];

#[derive(Clone, Debug, PartialEq)]
pub struct Plat {
    pub classes: Vec<String>,
    /// Class probabilities; sum to 1.
    pub weights: Vec<f64>,
    pub slots: Vec<String>,
    /// `exponents[class][slot]`; the empty string is ∅.
    pub exponents: Vec<Vec<String>>,
}

impl Plat {
    /// Build a plat; `weights = None` means uniform over classes.
    pub fn new(
        classes: Vec<String>,
        weights: Option<Vec<f64>>,
        slots: Vec<String>,
        exponents: Vec<Vec<String>>,
    ) -> Result<Self> {
        if classes.is_empty() || slots.is_empty() {
            return Err(Error::Invalid("plat needs at least one class and one slot".into()));
        }
        if exponents.len() != classes.len() || exponents.iter().any(|r| r.len() != slots.len()) {
            return Err(Error::Invalid("plat exponent table is not classes x slots".into()));
        }
        let weights = match weights {
            None => vec![1.0 / classes.len() as f64; classes.len()],
            Some(w) => {
                if w.len() != classes.len() || w.iter().any(|&x| !(x >= 0.0 && x.is_finite())) {
                    return Err(Error::Invalid("bad class weights".into()));
                }
                let total: f64 = w.iter().sum();
                if total <= 0.0 {
                    return Err(Error::Invalid("class weights sum to 0".into()));
                }
                w.into_iter().map(|x| x / total).collect()
            }
        };
        Ok(Plat {
            classes,
            weights,
            slots,
            exponents,
        })
    }

    /// Parse a plat file: a header row of slot ids (first column names the
    /// class, an optional `weight` column follows), then one row per class.
    /// Exponents may carry a leading `-`; `∅` or `-` is the empty exponent.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'));
        let (hline, header) = rows.next().ok_or_else(|| Error::parse(0, "empty plat file"))?;
        let header: Vec<&str> = header.split('\t').map(str::trim).collect();
        let has_weight = header.get(1).is_some_and(|h| h.eq_ignore_ascii_case("weight"));
        let first_slot = if has_weight { 2 } else { 1 };
        if header.len() <= first_slot {
            return Err(Error::parse(hline + 1, "plat header names no slots"));
        }
        let slots: Vec<String> = header[first_slot..].iter().map(|s| s.to_string()).collect();

        let mut classes = Vec::new();
        let mut weights = Vec::new();
        let mut exponents = Vec::new();
        for (i, line) in rows {
            let cells: Vec<&str> = line.split('\t').map(str::trim).collect();
            if cells.len() != header.len() {
                return Err(Error::parse(
                    i + 1,
                    format!("expected {} cells, found {}", header.len(), cells.len()),
                ));
            }
            classes.push(cells[0].to_string());
            if has_weight {
                let w: f64 = cells[1]
                    .parse()
                    .map_err(|e| Error::parse(i + 1, format!("bad weight {:?}: {e}", cells[1])))?;
                weights.push(w);
            }
            exponents.push(cells[first_slot..].iter().map(|c| normalize_exponent(c)).collect());
        }
        Plat::new(classes, has_weight.then_some(weights), slots, exponents)
            .map_err(|e| Error::parse(0, e.to_string()))
    }

    pub fn slot_index(&self, name: &str) -> Result<usize> {
        self.slots
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| Error::Invalid(format!("no slot {name:?} in plat")))
    }

    pub fn n_slots(&self) -> usize {
        self.slots.len()
    }

    /// Distinct exponents of a slot with their marginal probabilities.
    pub fn column(&self, slot: usize) -> BTreeMap<&str, f64> {
        let mut m = BTreeMap::new();
        for (c, row) in self.exponents.iter().enumerate() {
            *m.entry(row[slot].as_str()).or_insert(0.0) += self.weights[c];
        }
        m
    }
}

fn normalize_exponent(cell: &str) -> String {
    if EMPTY_MARKS.contains(&cell) {
        return String::new();
    }
    cell.strip_prefix('-').unwrap_or(cell).to_string()
}

/// `-Σ p log₂ p`, starting from `+0.0` so a certain outcome prints as 0.
fn entropy_bits(probs: impl Iterator<Item = f64>) -> f64 {
    probs.filter(|&p| p > 0.0).fold(0.0, |h, p| h - p * p.log2())
}

/// Render an exponent the way plats print it (`-os`, `∅`).
pub fn display_exponent(e: &str) -> String {
    if e.is_empty() {
        "∅".into()
    } else {
        format!("-{e}")
    }
}

/// A finite-support distribution over exponents.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CondDist {
    pub probs: BTreeMap<String, f64>,
}

impl CondDist {
    pub fn prob(&self, exponent: &str) -> f64 {
        self.probs.get(exponent).copied().unwrap_or(0.0)
    }

    pub fn entropy(&self) -> f64 {
        entropy_bits(self.probs.values().copied())
    }
}

impl fmt::Display for CondDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .probs
            .iter()
            .map(|(e, p)| format!("{}: {p:.4}", display_exponent(e)))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// `r(e_i | e_j)`: exponents of slot `i` over the classes whose slot-`j`
/// exponent is `exponent_j`, by renormalized class weight.
pub fn cond_dist(plat: &Plat, slot_i: usize, slot_j: usize, exponent_j: &str) -> Result<CondDist> {
    check_slots(plat, slot_i, slot_j)?;
    let mut probs = BTreeMap::new();
    let mut total = 0.0;
    for (c, row) in plat.exponents.iter().enumerate() {
        if row[slot_j] == exponent_j {
            *probs.entry(row[slot_i].clone()).or_insert(0.0) += plat.weights[c];
            total += plat.weights[c];
        }
    }
    if total == 0.0 {
        return Err(Error::Invalid(format!(
            "exponent {} does not occur in slot {}",
            display_exponent(exponent_j),
            plat.slots[slot_j]
        )));
    }
    for p in probs.values_mut() {
        *p /= total;
    }
    Ok(CondDist { probs })
}

fn check_slots(plat: &Plat, i: usize, j: usize) -> Result<()> {
    let n = plat.n_slots();
    if i >= n || j >= n {
        return Err(Error::Invalid(format!("slot index out of range for {n} slots")));
    }
    Ok(())
}

/// `H(i | j) = Σ_{e_j} P(e_j) · H(r(· | e_j))` in bits.
pub fn cond_entropy(plat: &Plat, slot_i: usize, slot_j: usize) -> Result<f64> {
    check_slots(plat, slot_i, slot_j)?;
    if slot_i == slot_j {
        return Err(Error::Invalid("conditional entropy of a slot on itself".into()));
    }
    let mut h = 0.0;
    for (e, p) in plat.column(slot_j) {
        h += p * cond_dist(plat, slot_i, slot_j, e)?.entropy();
    }
    Ok(h)
}

/// Mean of `H(i | j)` over all ordered pairs `i != j`.
pub fn avg_cond_entropy(plat: &Plat) -> Result<f64> {
    let n = plat.n_slots();
    if n < 2 {
        return Err(Error::Invalid("average conditional entropy needs >= 2 slots".into()));
    }
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += cond_entropy(plat, i, j)?;
            }
        }
    }
    Ok(sum / (n * n - n) as f64)
}

/// Probability the plat assigns to `tgt_form` in slot `i` given `src_form`
/// in slot `j`. The source is segmented at its longest matching slot-`j`
/// exponent; forms outside the plat's exponent inventory get 0.
pub fn form_prob(plat: &Plat, slot_i: usize, slot_j: usize, src_form: &str, tgt_form: &str) -> Result<f64> {
    check_slots(plat, slot_i, slot_j)?;
    let best = plat
        .column(slot_j)
        .into_keys()
        .filter(|e| src_form.ends_with(e))
        .max_by_key(|e| e.len());
    let Some(e_j) = best else { return Ok(0.0) };
    let stem = &src_form[..src_form.len() - e_j.len()];
    let dist = cond_dist(plat, slot_i, slot_j, e_j)?;
    Ok(dist
        .probs
        .iter()
        .filter(|(e_i, _)| format!("{stem}{e_i}") == tgt_form)
        .fold(0.0, |acc, (_, p)| acc + p))
}

/// Entropy of the joint exponent vector, `H(e_1, ..., e_n)`.
pub fn joint_entropy(plat: &Plat) -> f64 {
    let mut m: BTreeMap<&[String], f64> = BTreeMap::new();
    for (c, row) in plat.exponents.iter().enumerate() {
        *m.entry(row.as_slice()).or_insert(0.0) += plat.weights[c];
    }
    entropy_bits(m.values().copied())
}

/// Joint-versus-average comparison for one plat.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JointVsAverage {
    pub n_slots: usize,
    pub avg_cond_entropy: f64,
    /// Mean `H(i | pa(i))` over the edges of the minimum-entropy tree,
    /// ignoring the root cell.
    pub tree_edge_mean: f64,
    /// `H(e_root) + Σ H(i | pa(i))` for the best tree, in bits per paradigm.
    pub tree_joint_bits: f64,
    /// Exact `H(e_1..e_n)`; never above `tree_joint_bits`.
    pub joint_entropy_bits: f64,
    pub tree_root: String,
    pub tree_parent: BTreeMap<String, String>,
}

/// Compare the average conditional entropy with what a tree over the slots
/// needs: only one conditional per slot, chosen to minimize entropy.
///
/// Averaged over all rooted spanning trees of the complete digraph, every
/// ordered pair is an edge equally often, so the best tree's mean edge
/// entropy can never exceed the all-pairs average.
pub fn joint_vs_average(plat: &Plat) -> Result<JointVsAverage> {
    let n = plat.n_slots();
    let avg = avg_cond_entropy(plat)?;
    let mut edge = vec![vec![0.0; n]; n];
    for (i, row) in edge.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            if i != j {
                *cell = -cond_entropy(plat, i, j)?;
            }
        }
    }
    let slots: Vec<SlotId> = plat.slots.iter().map(|s| SlotId::new(s)).collect();
    let root_h: Vec<f64> = (0..n)
        .map(|s| entropy_bits(plat.column(s).into_values()))
        .collect();

    let edges_only = WeightMatrix::from_weights(slots.clone(), edge.clone(), vec![0.0; n])?;
    let t_edges = max_arborescence(&edges_only)?;
    let tree_edge_mean = -tree_score(&t_edges, &edges_only)? / (n - 1) as f64;

    let with_root = WeightMatrix::from_weights(slots, edge, root_h.iter().map(|h| -h).collect())?;
    let t_joint: Arborescence = max_arborescence(&with_root)?;
    let tree_joint_bits = -tree_score(&t_joint, &with_root)?;

    Ok(JointVsAverage {
        n_slots: n,
        avg_cond_entropy: avg,
        tree_edge_mean,
        tree_joint_bits,
        joint_entropy_bits: joint_entropy(plat),
        tree_root: plat.slots[t_joint.root()].clone(),
        tree_parent: (0..n)
            .filter_map(|v| t_joint.parent(v).map(|p| (plat.slots[v].clone(), plat.slots[p].clone())))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn greek() -> Plat {
        Plat::parse(fixtures::GREEK_PLAT).unwrap()
    }

    #[test]
    fn greek_fixture_shape() {
        let g = greek();
        assert_eq!(g.classes.len(), 8);
        assert_eq!(g.n_slots(), 8);
        assert_eq!(g.exponents[0][0], "os");
        assert_eq!(g.exponents[1][1], "");
    }

    #[test]
    fn greek_gen_sg_given_acc_pl_i() {
        let g = greek();
        let d = cond_dist(&g, g.slot_index("N;GEN;SG").unwrap(), g.slot_index("N;ACC;PL").unwrap(), "i").unwrap();
        assert_eq!(d.probs, BTreeMap::from([("us".to_string(), 1.0)]));
    }

    #[test]
    fn greek_nom_sg_given_acc_pl_a() {
        let g = greek();
        let d = cond_dist(&g, g.slot_index("N;NOM;SG").unwrap(), g.slot_index("N;ACC;PL").unwrap(), "a").unwrap();
        assert_eq!(d.prob(""), 2.0 / 3.0);
        assert_eq!(d.prob("o"), 1.0 / 3.0);
        assert_eq!(d.probs.len(), 2);
        assert!((d.entropy() - 0.918296).abs() < 1e-6);
        assert!(cond_dist(&g, 0, 6, "xyz").is_err());
    }

    #[test]
    fn constant_and_single_class() {
        let p = Plat::parse("class\tA\tB\tC\n1\ta\tb\tc\n2\ta\tx\ty\n").unwrap();
        for j in [1, 2] {
            assert_eq!(cond_entropy(&p, 0, j).unwrap(), 0.0);
        }
        let single = Plat::parse("class\tA\tB\n1\ta\tb\n").unwrap();
        assert_eq!(cond_dist(&single, 0, 1, "b").unwrap().probs, BTreeMap::from([("a".to_string(), 1.0)]));
        assert_eq!(avg_cond_entropy(&single).unwrap(), 0.0);
        assert!(cond_entropy(&p, 1, 1).is_err());
        let one_slot = Plat::parse("class\tA\n1\ta\n").unwrap();
        assert!(avg_cond_entropy(&one_slot).is_err());
    }

    #[test]
    fn independent_binary_exponents() {
        let p = Plat::parse("class\tA\tB\n1\ta\tc\n2\ta\td\n3\tb\tc\n4\tb\td\n").unwrap();
        assert!((avg_cond_entropy(&p).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weights_column() {
        let p = Plat::parse("class\tweight\tA\tB\n1\t3\ta\tx\n2\t1\tb\tx\n").unwrap();
        assert_eq!(p.weights, vec![0.75, 0.25]);
        let d = cond_dist(&p, 0, 1, "x").unwrap();
        assert_eq!(d.prob("a"), 0.75);
        assert!(Plat::parse("class\tA\n1\ta\tb\n").is_err());
    }

    #[test]
    fn suppletion_gets_zero() {
        let p = Plat::parse(fixtures::ENGLISH_PAST_PLAT).unwrap();
        let (nfin, pst) = (p.slot_index("V;NFIN").unwrap(), p.slot_index("V;PST").unwrap());
        assert_eq!(form_prob(&p, pst, nfin, "go", "went").unwrap(), 0.0);
        assert!(form_prob(&p, pst, nfin, "walk", "walked").unwrap() > 0.0);
    }

    #[test]
    fn joint_entropy_bounds() {
        let g = greek();
        let r = joint_vs_average(&g).unwrap();
        assert!(r.tree_edge_mean <= r.avg_cond_entropy + 1e-9);
        assert!(r.joint_entropy_bits <= r.tree_joint_bits + 1e-9);
        // 8 equiprobable classes, all with distinct exponent rows
        assert!((r.joint_entropy_bits - 3.0).abs() < 1e-12);
    }
}
