//! One function per subcommand. Each reads its inputs, writes its outputs
//! under `out_dir`, and returns what it wrote for the caller to report.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use morphcx::complexity::{e_complexity, i_complexity, ComplexityPoint, IComplexity, SynthSystem};
use morphcx::corpus::{build_paradigms, make_split, parse_unimorph, DataSplit, Paradigm, SlotId, SlotInventory};
use morphcx::fixtures;
use morphcx::par;
use morphcx::platbaseline::{
    avg_cond_entropy, cond_dist, cond_entropy, display_exponent, form_prob, joint_vs_average, JointVsAverage, Plat,
};
use morphcx::stats::{pareto_area, pareto_curve, perm_test};
use morphcx::strmodel::{ConditionalParadigmModel, ConditionalScorer, ScoreTable, TrainConfig};
use morphcx::structure::{
    compute_weights, max_arborescence, to_dot, tree_score, Arborescence, ArborescenceFile, WeightMatrix,
    WeightMatrixFile,
};
use serde::{Deserialize, Serialize};

use crate::artifact::{read_json, sha256_file, write_json, write_text, Meta};
use crate::config::{ConfigError, RunConfig};
use crate::svg::{pareto_svg, Labeled};

/// Below this many paradigms a language's estimate is unreliable.
pub const MIN_PARADIGMS: usize = 500;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ParadigmStore {
    pub language: String,
    pub pos: String,
    pub inventory: SlotInventory,
    pub paradigms: Vec<Paradigm>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SplitFile {
    pub language: String,
    pub pos: String,
    pub inventory: SlotInventory,
    pub e_complexity: usize,
    pub split: DataSplit,
}

/// Either the trained reference model or imported scores.
pub enum Scorer {
    Model(Box<ConditionalParadigmModel>),
    Table(ScoreTable),
}

impl ConditionalScorer for Scorer {
    fn logprob(&self, src: Option<(&str, &SlotId)>, tgt_slot: &SlotId, tgt: &str) -> morphcx::Result<f64> {
        match self {
            Scorer::Model(m) => ConditionalScorer::logprob(m.as_ref(), src, tgt_slot, tgt),
            Scorer::Table(t) => t.logprob(src, tgt_slot, tgt),
        }
    }
}

fn file_stem(p: &Path) -> String {
    p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "unknown".into())
}

fn require_path<'a>(p: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
    let p = p
        .as_deref()
        .ok_or_else(|| ConfigError(format!("{what} is required")))?;
    if !p.exists() {
        return Err(ConfigError(format!("{what} {} does not exist", p.display())).into());
    }
    Ok(p)
}

#[derive(Clone, Debug, Serialize)]
pub struct IngestSummary {
    pub language: String,
    pub pos: String,
    pub lexemes: usize,
    pub slots: Vec<SlotId>,
    pub forms: usize,
    pub full_paradigms: usize,
    /// Filled cells over lexemes x slots.
    pub coverage: f64,
    pub slot_fill: BTreeMap<SlotId, usize>,
    pub warnings: Vec<String>,
}

fn summarize(store: &ParadigmStore) -> IngestSummary {
    let mut slot_fill = BTreeMap::new();
    for p in &store.paradigms {
        for slot in p.entries.keys() {
            *slot_fill.entry(slot.clone()).or_insert(0) += 1;
        }
    }
    let forms: usize = store.paradigms.iter().map(Paradigm::size).sum();
    let lexemes = store.paradigms.len();
    let mut warnings = Vec::new();
    if lexemes < MIN_PARADIGMS {
        let w = format!("{lexemes} paradigms: below {MIN_PARADIGMS}-paradigm threshold");
        log::warn!("{}: {w}", store.language);
        warnings.push(w);
    }
    IngestSummary {
        language: store.language.clone(),
        pos: store.pos.clone(),
        lexemes,
        slots: store.inventory.slots().to_vec(),
        forms,
        full_paradigms: store.paradigms.iter().filter(|p| p.is_full(&store.inventory)).count(),
        coverage: forms as f64 / (lexemes * store.inventory.len()) as f64,
        slot_fill,
        warnings,
    }
}

/// Read the lexicon (or sample the synthetic system) named by the config.
pub fn load_store(cfg: &RunConfig) -> Result<ParadigmStore> {
    if cfg.synth.is_some() {
        let path = require_path(&cfg.synth, "synth")?;
        let seed = cfg.require_seed("sampling a synthetic system")?;
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let sys = SynthSystem::from_json(&text).with_context(|| format!("in {}", path.display()))?;
        return Ok(ParadigmStore {
            language: cfg.language.clone().unwrap_or_else(|| sys.spec().name.clone()),
            pos: sys.spec().pos.clone(),
            inventory: sys.inventory().clone(),
            paradigms: sys.sample(cfg.synth_count(), seed),
        });
    }
    let path = require_path(&cfg.data, "data")?;
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let words = parse_unimorph(BufReader::new(file)).with_context(|| format!("parsing {}", path.display()))?;
    let (inventory, paradigms) = build_paradigms(&words, cfg.pos.as_deref())?;
    let pos = cfg.pos.clone().unwrap_or_else(|| inventory.get(0).pos().to_string());
    Ok(ParadigmStore {
        language: cfg.language.clone().unwrap_or_else(|| file_stem(path)),
        pos,
        inventory,
        paradigms,
    })
}

pub fn cmd_ingest(cfg: &RunConfig) -> Result<IngestSummary> {
    let store = load_store(cfg).context("stage ingest")?;
    let summary = summarize(&store);
    let meta = Meta::new("ingest", &cfg.hash(), cfg.seed);
    write_json(&cfg.out_dir.join("paradigms.json"), &meta, &store)?;
    write_json(&cfg.out_dir.join("ingest_summary.json"), &meta, &summary)?;
    Ok(summary)
}

fn split_store(cfg: &RunConfig, store: ParadigmStore, seed: u64) -> Result<SplitFile> {
    let e = e_complexity(&store.paradigms)?;
    let split = make_split(&store.paradigms, &cfg.split_spec(seed))?;
    Ok(SplitFile {
        language: store.language,
        pos: store.pos,
        inventory: store.inventory,
        e_complexity: e,
        split,
    })
}

pub fn cmd_split(cfg: &RunConfig, store: &Path) -> Result<SplitFile> {
    let seed = cfg.require_seed("split")?;
    let store: ParadigmStore = read_json(store)?.data;
    let split = split_store(cfg, store, seed).context("stage split")?;
    write_json(&cfg.out_dir.join("split.json"), &Meta::new("split", &cfg.hash(), Some(seed)), &split)?;
    Ok(split)
}

fn train(split: &DataSplit, tc: &TrainConfig) -> Result<ConditionalParadigmModel> {
    Ok(ConditionalParadigmModel::train(&split.train, tc, &split.dev_pairs()).context("stage train")?)
}

pub fn cmd_train(cfg: &RunConfig, split: &Path) -> Result<ConditionalParadigmModel> {
    let a = read_json::<SplitFile>(split)?;
    let model = par::with_threads(cfg.threads, || train(&a.data.split, &cfg.train_config()))?;
    write_json(&cfg.out_dir.join("model.json"), &Meta::new("train", &cfg.hash(), a.meta.seed), &model)?;
    Ok(model)
}

/// `--model` or `--scores`, whichever was given.
pub fn load_scorer(model: Option<&Path>, scores: Option<&Path>) -> Result<Scorer> {
    match (model, scores) {
        (Some(m), None) => Ok(Scorer::Model(Box::new(read_json(m)?.data))),
        (None, Some(s)) => {
            let f = File::open(s).with_context(|| format!("opening {}", s.display()))?;
            Ok(Scorer::Table(
                ScoreTable::load(BufReader::new(f)).with_context(|| format!("parsing {}", s.display()))?,
            ))
        }
        _ => Err(ConfigError("give exactly one of --model or --scores".into()).into()),
    }
}

pub fn cmd_weights(cfg: &RunConfig, split: &Path, scorer: &Scorer) -> Result<WeightMatrix> {
    let a = read_json::<SplitFile>(split)?;
    let w = par::with_threads(cfg.threads, || compute_weights(scorer, &a.data.inventory, &a.data.split.dev))
        .context("stage weights")?;
    write_json(
        &cfg.out_dir.join("weights.json"),
        &Meta::new("weights", &cfg.hash(), a.meta.seed),
        &WeightMatrixFile::from(&w),
    )?;
    Ok(w)
}

fn write_tree(dir: &Path, meta: &Meta, tree: &Arborescence, w: &WeightMatrix) -> Result<()> {
    let inv = SlotInventory::new(w.slots.clone())?;
    let score = tree_score(tree, w)?;
    write_json(&dir.join("tree.json"), meta, &ArborescenceFile::new(tree, &inv, Some(score)))?;
    let dot = format!("// {}\n{}", meta.comment(), to_dot(tree, &inv, Some(w)));
    write_text(&dir.join("tree.dot"), &dot)
}

pub fn cmd_learn_tree(cfg: &RunConfig, weights: &Path) -> Result<Arborescence> {
    let a = read_json::<WeightMatrixFile>(weights)?;
    let w = WeightMatrix::try_from(a.data)?;
    let tree = par::with_threads(cfg.threads, || max_arborescence(&w)).context("stage learn-tree")?;
    write_tree(&cfg.out_dir, &Meta::new("learn-tree", &cfg.hash(), a.meta.seed), &tree, &w)?;
    Ok(tree)
}

fn point(cfg: &RunConfig, split: &SplitFile, c: &IComplexity, seed: u64) -> ComplexityPoint {
    ComplexityPoint {
        language: split.language.clone(),
        pos: split.pos.clone(),
        regime: split.split.regime.to_string(),
        e_complexity: split.e_complexity,
        i_total_bits: c.total_bits,
        i_per_form_bits: c.per_form_bits,
        d: c.d,
        seed,
        config_hash: Some(cfg.hash()),
    }
}

pub fn cmd_measure(cfg: &RunConfig, split: &Path, tree: &Path, scorer: &Scorer) -> Result<ComplexityPoint> {
    let s = read_json::<SplitFile>(split)?;
    let t = read_json::<ArborescenceFile>(tree)?.data.to_tree(&s.data.inventory)?;
    let c = par::with_threads(cfg.threads, || i_complexity(scorer, &t, &s.data.inventory, &s.data.split.test))
        .context("stage measure")?;
    let p = point(cfg, &s.data, &c, s.data.split.seed);
    write_point(&cfg.out_dir.join("point.csv"), &p)?;
    Ok(p)
}

fn write_point(path: &Path, p: &ComplexityPoint) -> Result<()> {
    let mut buf = Vec::new();
    ComplexityPoint::write_csv(std::slice::from_ref(p), &mut buf)?;
    write_text(path, &String::from_utf8(buf)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub config: RunConfig,
    pub config_hash: String,
    pub seed: u64,
    pub versions: BTreeMap<String, String>,
    pub input_sha256: BTreeMap<String, String>,
    pub language: String,
    pub pos: String,
    pub e_complexity: usize,
    pub lambda: Option<f64>,
    pub tree_root: SlotId,
    pub tree_score: f64,
    pub complexity: IComplexity,
    /// sha256 of every file written, by name.
    pub outputs: BTreeMap<String, String>,
}

#[derive(Clone, Debug)]
pub struct RunOutputs {
    pub point: ComplexityPoint,
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
}

/// The whole pipeline: split, train (unless scores are imported), weights,
/// tree, measure.
pub fn cmd_run(cfg: &RunConfig) -> Result<RunOutputs> {
    let seed = cfg.require_seed("run")?;
    for (p, what) in [(&cfg.data, "data"), (&cfg.synth, "synth"), (&cfg.scores, "scores")] {
        if p.is_some() {
            require_path(p, what)?;
        }
    }
    par::with_threads(cfg.threads, || run_inner(cfg, seed))
}

fn run_inner(cfg: &RunConfig, seed: u64) -> Result<RunOutputs> {
    let hash = cfg.hash();
    let meta = Meta::new("run", &hash, Some(seed));
    let dir = &cfg.out_dir;

    let store = load_store(cfg).context("stage ingest")?;
    if store.paradigms.len() < MIN_PARADIGMS {
        log::warn!(
            "{}: {} paradigms: below {MIN_PARADIGMS}-paradigm threshold",
            store.language,
            store.paradigms.len()
        );
    }
    let split = split_store(cfg, store, seed).context("stage split")?;
    let scorer = match &cfg.scores {
        Some(path) => load_scorer(None, Some(path)).context("stage scores")?,
        None => Scorer::Model(Box::new(train(&split.split, &cfg.train_config())?)),
    };
    let inv = &split.inventory;
    let w = compute_weights(&scorer, inv, &split.split.dev).context("stage weights")?;
    let tree = max_arborescence(&w).context("stage learn-tree")?;
    let c = i_complexity(&scorer, &tree, inv, &split.split.test).context("stage measure")?;
    let p = point(cfg, &split, &c, seed);

    let mut files = vec![dir.join("split.json")];
    write_json(&files[0], &meta, &split)?;
    if let Scorer::Model(m) = &scorer {
        files.push(dir.join("model.json"));
        write_json(files.last().unwrap(), &meta, m.as_ref())?;
    }
    files.push(dir.join("weights.json"));
    write_json(files.last().unwrap(), &meta, &WeightMatrixFile::from(&w))?;
    write_tree(dir, &meta, &tree, &w)?;
    files.push(dir.join("tree.json"));
    files.push(dir.join("tree.dot"));
    files.push(dir.join("point.csv"));
    write_point(files.last().unwrap(), &p)?;

    let mut inputs = BTreeMap::new();
    for path in [&cfg.data, &cfg.synth, &cfg.scores].into_iter().flatten() {
        inputs.insert(path.display().to_string(), sha256_file(path)?);
    }
    let mut outputs = BTreeMap::new();
    for f in &files {
        outputs.insert(file_stem_ext(f), sha256_file(f)?);
    }
    let manifest = Manifest {
        config: cfg.clone(),
        config_hash: hash,
        seed,
        versions: BTreeMap::from([
            ("morphcx".to_string(), env!("CARGO_PKG_VERSION").to_string()),
            ("model_format".to_string(), morphcx::strmodel::MODEL_FORMAT.to_string()),
        ]),
        input_sha256: inputs,
        language: split.language.clone(),
        pos: split.pos.clone(),
        e_complexity: split.e_complexity,
        lambda: match &scorer {
            Scorer::Model(m) => Some(m.lambda()),
            Scorer::Table(_) => None,
        },
        tree_root: inv.get(tree.root()).clone(),
        tree_score: tree_score(&tree, &w)?,
        complexity: c,
        outputs,
    };
    files.push(dir.join("manifest.json"));
    write_json(files.last().unwrap(), &meta, &manifest)?;
    Ok(RunOutputs {
        point: p,
        out_dir: dir.clone(),
        files,
    })
}

fn file_stem_ext(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Several configs at once; each run is independent. With more than one
/// config, results go to `<out_dir>/<config file stem>`.
pub fn cmd_run_batch(cfgs: &[(String, RunConfig)]) -> Vec<Result<RunOutputs>> {
    if cfgs.len() == 1 {
        return vec![cmd_run(&cfgs[0].1)];
    }
    par::map_slice(cfgs, |(name, cfg)| {
        let mut cfg = cfg.clone();
        cfg.out_dir = cfg.out_dir.join(name);
        cmd_run(&cfg).with_context(|| format!("config {name}"))
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PosReport {
    pub n_points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub area: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count_leq: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub frontier: Vec<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub svg: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ParetoReport {
    pub source: Vec<String>,
    /// Which i-complexity column was plotted.
    pub y: String,
    pub n_perm: usize,
    pub seed: u64,
    pub by_pos: BTreeMap<String, PosReport>,
}

/// Labeled `(e, i)` points grouped by POS.
type PointsByPos = BTreeMap<String, Vec<(String, f64, f64)>>;

fn collect_points(points: &[PathBuf]) -> Result<(PointsByPos, Vec<String>, String)> {
    let mut by_pos: PointsByPos = BTreeMap::new();
    if points.is_empty() {
        for r in fixtures::table2_rows()? {
            by_pos
                .entry(r.pos)
                .or_default()
                .push((r.language, r.paradigm_size as f64, r.i_complexity));
        }
        return Ok((by_pos, vec!["bundled:table2_green".into()], "table".into()));
    }
    let mut sources = Vec::new();
    for path in points {
        let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        for p in ComplexityPoint::read_csv(f).with_context(|| format!("parsing {}", path.display()))? {
            by_pos
                .entry(p.pos)
                .or_default()
                .push((p.language, p.e_complexity as f64, p.i_per_form_bits));
        }
        sources.push(path.display().to_string());
    }
    Ok((by_pos, sources, "i_per_form_bits".into()))
}

/// Pareto area and permutation test per POS, with one SVG each. A POS that
/// cannot be tested is reported with its error; the others still run.
pub fn cmd_pareto(cfg: &RunConfig, points: &[PathBuf]) -> Result<ParetoReport> {
    let seed = cfg.require_seed("pareto")?;
    let (by_pos, source, y) = collect_points(points)?;
    let meta = Meta::new("pareto", &cfg.hash(), Some(seed));
    let mut report = ParetoReport {
        source,
        y,
        n_perm: cfg.n_perm,
        seed,
        by_pos: BTreeMap::new(),
    };
    for (pos, pts) in &by_pos {
        let xy: Vec<(f64, f64)> = pts.iter().map(|p| (p.1, p.2)).collect();
        let mut r = PosReport {
            n_points: pts.len(),
            area: None,
            p_value: None,
            count_leq: None,
            frontier: Vec::new(),
            svg: None,
            error: None,
        };
        let tested = par::with_threads(cfg.threads, || perm_test(&xy, cfg.n_perm, seed));
        match tested.and_then(|t| Ok((t, pareto_curve(&xy)?))) {
            Ok((t, curve)) => {
                debug_assert_eq!(t.observed_area, pareto_area(&curve));
                let labeled: Vec<Labeled> = pts
                    .iter()
                    .map(|(l, x, y)| Labeled { label: l, x: *x, y: *y })
                    .collect();
                let title = format!("{pos}: area {:.3}, p = {:.4} ({} permutations)", t.observed_area, t.p_value, t.n_perm);
                let name = format!("pareto_{}.svg", sanitize(pos));
                write_text(&cfg.out_dir.join(&name), &pareto_svg(&title, &meta.comment(), &labeled, &curve))?;
                r.area = Some(t.observed_area);
                r.p_value = Some(t.p_value);
                r.count_leq = Some(t.count_leq);
                r.frontier = curve.frontier().to_vec();
                r.svg = Some(name);
            }
            Err(e) => {
                log::error!("{pos}: {e}");
                r.error = Some(e.to_string());
            }
        }
        report.by_pos.insert(pos.clone(), r);
    }
    write_json(&cfg.out_dir.join("report.json"), &meta, &report)?;
    if report.by_pos.values().all(|r| r.error.is_some()) {
        return Err(morphcx::Error::InsufficientData("no part of speech has >= 3 points".into()).into());
    }
    Ok(report)
}

fn sanitize(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Component {
    pub given: String,
    pub prob: f64,
    pub dist: BTreeMap<String, f64>,
    pub entropy: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PairEntropy {
    pub target: String,
    pub given: String,
    pub entropy: f64,
    pub components: Vec<Component>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Suppletion {
    pub source: String,
    pub target: String,
    pub plat_prob: f64,
    pub model_log2prob: f64,
    pub regular_target: String,
    pub regular_log2prob: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PlatReport {
    pub classes: usize,
    pub slots: Vec<String>,
    pub pairs: Vec<PairEntropy>,
    pub avg_cond_entropy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub joint_vs_average: Option<JointVsAverage>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suppletion: Option<Suppletion>,
}

pub fn plat_report(plat: &Plat, critique: bool) -> Result<PlatReport> {
    let n = plat.n_slots();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let components = plat
                .column(j)
                .into_iter()
                .map(|(e, p)| {
                    let d = cond_dist(plat, i, j, e)?;
                    Ok(Component {
                        given: display_exponent(e),
                        prob: p,
                        entropy: d.entropy(),
                        dist: d.probs.iter().map(|(k, v)| (display_exponent(k), *v)).collect(),
                    })
                })
                .collect::<morphcx::Result<Vec<_>>>()?;
            pairs.push(PairEntropy {
                target: plat.slots[i].clone(),
                given: plat.slots[j].clone(),
                entropy: cond_entropy(plat, i, j)?,
                components,
            });
        }
    }
    Ok(PlatReport {
        classes: plat.classes.len(),
        slots: plat.slots.clone(),
        pairs,
        avg_cond_entropy: avg_cond_entropy(plat)?,
        joint_vs_average: critique.then(|| joint_vs_average(plat)).transpose()?,
        suppletion: critique.then(suppletion_demo).transpose()?,
    })
}

/// go -> went: zero under the exponent plat, small but positive under the
/// string model trained on the bundled regular verbs.
pub fn suppletion_demo() -> Result<Suppletion> {
    let plat = Plat::parse(fixtures::ENGLISH_PAST_PLAT)?;
    let (i, j) = (plat.slot_index("V;PST")?, plat.slot_index("V;NFIN")?);
    let words = parse_unimorph(fixtures::ENGLISH_VERBS.as_bytes())?;
    let (_, paradigms) = build_paradigms(&words, None)?;
    let pairs: Vec<_> = paradigms.iter().flat_map(morphcx::corpus::paradigm_pairs).collect();
    let model = ConditionalParadigmModel::train(&pairs, &TrainConfig::default(), &[])?;
    let (nfin, pst) = (SlotId::new("V;NFIN"), SlotId::new("V;PST"));
    Ok(Suppletion {
        source: "go".into(),
        target: "went".into(),
        plat_prob: form_prob(&plat, i, j, "go", "went")?,
        model_log2prob: model.logprob(Some(("go", &nfin)), &pst, "went"),
        regular_target: "goed".into(),
        regular_log2prob: model.logprob(Some(("go", &nfin)), &pst, "goed"),
    })
}

/// Load a plat file, or the bundled Greek one when no path is given.
pub fn load_plat(path: Option<&Path>) -> Result<Plat> {
    let Some(path) = path else {
        return Ok(Plat::parse(fixtures::GREEK_PLAT)?);
    };
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Plat::parse(&text).with_context(|| format!("parsing {}", path.display()))?)
}

pub fn cmd_plat(cfg: &RunConfig, plat: &Plat, critique: bool) -> Result<PlatReport> {
    let report = plat_report(plat, critique)?;
    let name = if critique { "critique.json" } else { "plat_report.json" };
    write_json(&cfg.out_dir.join(name), &Meta::new("plat", &cfg.hash(), None), &report)?;
    Ok(report)
}
