//! Structure learning: pairwise slot weights on development paradigms and
//! the maximum-weight single-root spanning arborescence over slots.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::{Paradigm, SlotId, SlotInventory};
use crate::error::{Error, Result};
use crate::par;
use crate::strmodel::ConditionalScorer;

/// Mean development log₂-probabilities between slots.
///
/// `edge[i][j]` is the weight of the edge `j -> i`, i.e. of predicting slot
/// `i` from slot `j`. `root[i]` is the weight of slot `i` generated from the
/// empty string. The diagonal is unused and kept at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMatrix {
    pub slots: Vec<SlotId>,
    pub edge: Vec<Vec<f64>>,
    pub root: Vec<f64>,
    /// Number of dev paradigms averaged into each `edge` cell.
    pub edge_counts: Vec<Vec<usize>>,
    pub root_counts: Vec<usize>,
    /// Slots never filled in the dev data.
    pub unobserved: Vec<usize>,
}

impl WeightMatrix {
    /// A matrix with no count bookkeeping, for hand-built weights.
    pub fn from_weights(slots: Vec<SlotId>, edge: Vec<Vec<f64>>, root: Vec<f64>) -> Result<Self> {
        let n = slots.len();
        if n == 0 || root.len() != n || edge.len() != n || edge.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid(format!(
                "weight matrix shape mismatch for {n} slots"
            )));
        }
        let all_finite = root.iter().chain(edge.iter().flatten()).all(|w| w.is_finite());
        if !all_finite {
            return Err(Error::Invalid("weights must be finite".into()));
        }
        Ok(WeightMatrix {
            slots,
            edge,
            root,
            edge_counts: vec![vec![0; n]; n],
            root_counts: vec![0; n],
            unobserved: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }
}

/// Average `log₂ q` over dev paradigms for every root and edge cell.
///
/// Each cell is averaged over the paradigms where the slots it needs are
/// filled. A cell with no such paradigm falls back to conditioning on the
/// empty string (`edge[i][j] = root[i]`); a slot never filled at all takes
/// the lowest observed root weight for its root and incoming edges and is
/// listed in `unobserved`.
pub fn compute_weights<S: ConditionalScorer + ?Sized>(
    scorer: &S,
    inventory: &SlotInventory,
    dev: &[Paradigm],
) -> Result<WeightMatrix> {
    let n = inventory.len();
    let forms: Vec<Vec<Option<&str>>> = dev.iter().map(|p| p.forms_by_index(inventory)).collect();

    // cell k < n is root[k]; cell n + i*n + j is edge[i][j]
    let cells = par::map_range(n + n * n, |k| -> Result<(f64, usize)> {
        let (tgt, src) = if k < n { (k, None) } else { ((k - n) / n, Some((k - n) % n)) };
        if src == Some(tgt) {
            return Ok((0.0, 0));
        }
        let mut sum = 0.0;
        let mut count = 0;
        for f in &forms {
            let Some(t) = f[tgt] else { continue };
            let cond = match src {
                None => None,
                Some(j) => match f[j] {
                    Some(s) => Some((s, inventory.get(j))),
                    None => continue,
                },
            };
            sum += scorer.logprob(cond, inventory.get(tgt), t)?;
            count += 1;
        }
        Ok((if count > 0 { sum / count as f64 } else { f64::NAN }, count))
    });
    let cells = cells.into_iter().collect::<Result<Vec<_>>>()?;

    let mut root: Vec<f64> = cells[..n].iter().map(|c| c.0).collect();
    let root_counts: Vec<usize> = cells[..n].iter().map(|c| c.1).collect();
    let unobserved: Vec<usize> = (0..n).filter(|&i| root_counts[i] == 0).collect();
    if unobserved.len() == n {
        return Err(Error::InsufficientData("no dev forms to weight slots".into()));
    }
    let floor = root.iter().copied().filter(|w| w.is_finite()).fold(0.0, f64::min);
    for &i in &unobserved {
        log::warn!("slot {} never filled in dev data; weights set to {floor}", inventory.get(i));
        root[i] = floor;
    }
    let mut edge = vec![vec![0.0; n]; n];
    let mut edge_counts = vec![vec![0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let (w, c) = cells[n + i * n + j];
            edge[i][j] = if c > 0 { w } else { root[i] };
            edge_counts[i][j] = c;
        }
    }
    Ok(WeightMatrix {
        slots: inventory.slots().to_vec(),
        edge,
        root,
        edge_counts,
        root_counts,
        unobserved,
    })
}

/// A spanning tree over slots with a single root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arborescence {
    root: usize,
    parent: Vec<Option<usize>>,
}

impl Arborescence {
    /// Validates: exactly the root lacks a parent, and following parents
    /// from any vertex reaches the root.
    pub fn new(root: usize, parent: Vec<Option<usize>>) -> Result<Self> {
        let n = parent.len();
        if root >= n {
            return Err(Error::Invalid(format!("root {root} out of range for {n} slots")));
        }
        for (v, p) in parent.iter().enumerate() {
            match (*p, v == root) {
                (None, true) => {}
                (Some(_), true) => return Err(Error::Invalid("root has a parent".into())),
                (None, false) => return Err(Error::Invalid(format!("vertex {v} has no parent"))),
                (Some(p), false) if p >= n || p == v => {
                    return Err(Error::Invalid(format!("vertex {v} has invalid parent {p}")))
                }
                _ => {}
            }
        }
        for start in 0..n {
            let mut v = start;
            for _ in 0..n {
                match parent[v] {
                    Some(p) => v = p,
                    None => break,
                }
            }
            if v != root {
                return Err(Error::Invalid(format!("vertex {start} is on a cycle")));
            }
        }
        Ok(Arborescence { root, parent })
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    /// Star topology: every slot predicted from `center`.
    pub fn star(n: usize, center: usize) -> Result<Self> {
        let parent = (0..n).map(|v| (v != center).then_some(center)).collect();
        Arborescence::new(center, parent)
    }
}

/// `root[r] + Σ edge[i][pa(i)]`, summed in vertex order.
pub fn tree_score(tree: &Arborescence, w: &WeightMatrix) -> Result<f64> {
    if tree.len() != w.len() {
        return Err(Error::Invalid(format!(
            "tree has {} vertices, weight matrix {}",
            tree.len(),
            w.len()
        )));
    }
    let mut score = w.root[tree.root];
    for (i, p) in tree.parent.iter().enumerate() {
        if let Some(p) = *p {
            score += w.edge[i][p];
        }
    }
    Ok(score)
}

/// Maximum-weight spanning arborescence with exactly one root.
///
/// Runs Chu-Liu/Edmonds once per forced root and keeps the best total
/// (tree edges plus the root's vertex weight). Ties go to the lowest root
/// index; within a root, ties between incoming edges go to the lowest
/// parent index.
pub fn max_arborescence(w: &WeightMatrix) -> Result<Arborescence> {
    let n = w.len();
    if n == 0 {
        return Err(Error::Invalid("empty weight matrix".into()));
    }
    let candidates = par::map_range(n, |r| -> Result<(f64, Arborescence)> {
        let parent = edmonds(&w.edge, r);
        let tree = Arborescence::new(r, parent)?;
        Ok((tree_score(&tree, w)?, tree))
    });
    let mut best: Option<(f64, Arborescence)> = None;
    for c in candidates {
        let (score, tree) = c?;
        match &best {
            Some((s, _)) if score <= *s => {}
            _ => best = Some((score, tree)),
        }
    }
    Ok(best.expect("n >= 1").1)
}

#[derive(Clone, Copy)]
struct Edge {
    from: usize,
    to: usize,
    w: f64,
    /// Index into the original edge list.
    id: usize,
}

/// Chu-Liu/Edmonds on the complete digraph given by `edge[to][from]`, rooted
/// at `root`. Returns the parent of every vertex.
fn edmonds(edge: &[Vec<f64>], root: usize) -> Vec<Option<usize>> {
    let n = edge.len();
    let mut edges = Vec::with_capacity(n * n);
    for to in 0..n {
        for from in 0..n {
            if to != from && to != root {
                edges.push(Edge {
                    from,
                    to,
                    w: edge[to][from],
                    id: edges.len(),
                });
            }
        }
    }
    let originals = edges.clone();
    let chosen = contract(n, root, edges);
    let mut parent = vec![None; n];
    for id in chosen {
        let e = originals[id];
        parent[e.to] = Some(e.from);
    }
    parent
}

/// Returns the ids of the selected edges.
fn contract(n: usize, root: usize, edges: Vec<Edge>) -> Vec<usize> {
    // best incoming edge per vertex; ties keep the earliest edge
    let mut best: Vec<Option<Edge>> = vec![None; n];
    for e in &edges {
        if e.to == root || e.from == e.to {
            continue;
        }
        match best[e.to] {
            Some(b) if b.w >= e.w => {}
            _ => best[e.to] = Some(*e),
        }
    }

    // find a cycle among the chosen edges
    let mut color = vec![0u8; n]; // 0 unvisited, 1 on current path, 2 done
    let mut cycle: Option<Vec<usize>> = None;
    'outer: for start in 0..n {
        if color[start] != 0 {
            continue;
        }
        let mut path = Vec::new();
        let mut v = start;
        loop {
            if color[v] == 1 {
                let pos = path.iter().position(|&u| u == v).expect("on path");
                cycle = Some(path[pos..].to_vec());
                break 'outer;
            }
            if color[v] == 2 {
                break;
            }
            color[v] = 1;
            path.push(v);
            match best[v] {
                Some(e) => v = e.from,
                None => break,
            }
        }
        for u in path {
            color[u] = 2;
        }
    }

    let Some(cycle) = cycle else {
        return best.iter().flatten().map(|e| e.id).collect();
    };

    // contract the cycle into a new vertex `c`; other vertices are renumbered
    let mut in_cycle = vec![false; n];
    for &v in &cycle {
        in_cycle[v] = true;
    }
    let mut map = vec![0usize; n];
    let mut next = 0;
    for v in 0..n {
        if !in_cycle[v] {
            map[v] = next;
            next += 1;
        }
    }
    let c = next;
    for &v in &cycle {
        map[v] = c;
    }

    let mut contracted = Vec::with_capacity(edges.len());
    // contracted edge index -> original target inside the cycle, if entering it
    let mut enters: Vec<Option<usize>> = Vec::with_capacity(edges.len());
    for e in &edges {
        let (fc, tc) = (in_cycle[e.from], in_cycle[e.to]);
        if fc && tc {
            continue;
        }
        let w = if tc { e.w - best[e.to].expect("cycle vertex has an edge").w } else { e.w };
        contracted.push(Edge {
            from: map[e.from],
            to: map[e.to],
            w,
            id: e.id,
        });
        enters.push(tc.then_some(e.to));
    }
    let by_id: std::collections::HashMap<usize, Option<usize>> =
        contracted.iter().zip(&enters).map(|(e, t)| (e.id, *t)).collect();

    let chosen = contract(next + 1, map[root], contracted);

    let entry_target = chosen
        .iter()
        .find_map(|id| by_id[id])
        .expect("contracted vertex has an incoming edge");
    let mut out = chosen;
    for &v in &cycle {
        if v != entry_target {
            out.push(best[v].expect("cycle vertex").id);
        }
    }
    out
}

/// Serialized form of a weight matrix, addressed by slot name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightMatrixFile {
    pub slots: Vec<SlotId>,
    pub root: BTreeMap<SlotId, f64>,
    pub edges: Vec<EdgeWeight>,
    pub unobserved: Vec<SlotId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeWeight {
    pub from: SlotId,
    pub to: SlotId,
    pub weight: f64,
    pub count: usize,
}

impl From<&WeightMatrix> for WeightMatrixFile {
    fn from(w: &WeightMatrix) -> Self {
        let n = w.len();
        let mut edges = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    edges.push(EdgeWeight {
                        from: w.slots[j].clone(),
                        to: w.slots[i].clone(),
                        weight: w.edge[i][j],
                        count: w.edge_counts[i][j],
                    });
                }
            }
        }
        WeightMatrixFile {
            slots: w.slots.clone(),
            root: w.slots.iter().cloned().zip(w.root.iter().copied()).collect(),
            edges,
            unobserved: w.unobserved.iter().map(|&i| w.slots[i].clone()).collect(),
        }
    }
}

impl TryFrom<WeightMatrixFile> for WeightMatrix {
    type Error = Error;

    fn try_from(f: WeightMatrixFile) -> Result<Self> {
        let inv = SlotInventory::new(f.slots.clone())?;
        let n = inv.len();
        let idx = |s: &SlotId| {
            inv.index_of(s)
                .ok_or_else(|| Error::Invalid(format!("unknown slot {s} in weight file")))
        };
        let mut root = vec![f64::NAN; n];
        for (s, w) in &f.root {
            root[idx(s)?] = *w;
        }
        let mut edge = vec![vec![f64::NAN; n]; n];
        let mut counts = vec![vec![0; n]; n];
        for i in 0..n {
            edge[i][i] = 0.0;
        }
        for e in &f.edges {
            let (i, j) = (idx(&e.to)?, idx(&e.from)?);
            edge[i][j] = e.weight;
            counts[i][j] = e.count;
        }
        let mut w = WeightMatrix::from_weights(f.slots, edge, root)
            .map_err(|_| Error::Invalid("weight file is missing cells".into()))?;
        w.edge_counts = counts;
        w.root_counts = vec![0; n];
        w.unobserved = f.unobserved.iter().map(idx).collect::<Result<_>>()?;
        Ok(w)
    }
}

/// Serialized form of a tree, addressed by slot name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArborescenceFile {
    pub root: SlotId,
    /// child -> parent
    pub parent: BTreeMap<SlotId, SlotId>,
    /// Dev log-likelihood of the tree, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
}

impl ArborescenceFile {
    pub fn new(tree: &Arborescence, inventory: &SlotInventory, score: Option<f64>) -> Self {
        ArborescenceFile {
            root: inventory.get(tree.root).clone(),
            parent: (0..tree.len())
                .filter_map(|v| tree.parent(v).map(|p| (inventory.get(v).clone(), inventory.get(p).clone())))
                .collect(),
            score,
        }
    }

    pub fn to_tree(&self, inventory: &SlotInventory) -> Result<Arborescence> {
        let idx = |s: &SlotId| {
            inventory
                .index_of(s)
                .ok_or_else(|| Error::Invalid(format!("tree names unknown slot {s}")))
        };
        let mut parent = vec![None; inventory.len()];
        for (c, p) in &self.parent {
            parent[idx(c)?] = Some(idx(p)?);
        }
        Arborescence::new(idx(&self.root)?, parent)
    }
}

/// Graphviz rendering; edges point from parent to child and carry weights
/// when a matrix is given.
pub fn to_dot(tree: &Arborescence, inventory: &SlotInventory, w: Option<&WeightMatrix>) -> String {
    let mut out = String::from("digraph paradigm {\n  rankdir=TB;\n  node [shape=box];\n");
    out.push_str("  ROOT [shape=point];\n");
    let q = |s: &SlotId| format!("\"{}\"", s.as_str().replace('"', "\\\""));
    let _ = match w {
        Some(w) => writeln!(out, "  ROOT -> {} [label=\"{:.3}\"];", q(inventory.get(tree.root)), w.root[tree.root]),
        None => writeln!(out, "  ROOT -> {};", q(inventory.get(tree.root))),
    };
    for v in 0..tree.len() {
        if let Some(p) = tree.parent(v) {
            let _ = match w {
                Some(w) => writeln!(
                    out,
                    "  {} -> {} [label=\"{:.3}\"];",
                    q(inventory.get(p)),
                    q(inventory.get(v)),
                    w.edge[v][p]
                ),
                None => writeln!(out, "  {} -> {};", q(inventory.get(p)), q(inventory.get(v))),
            };
        }
    }
    out.push_str("}\n");
    out
}
