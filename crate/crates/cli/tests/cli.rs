use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn morphcx(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_morphcx"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// `count` three-slot nouns with a regular suffix pattern.
fn lexicon(count: usize) -> String {
    let mut s = String::new();
    for k in 0..count {
        let stem = format!("st{}{}", (b'a' + (k % 26) as u8) as char, k);
        let _ = writeln!(s, "{stem}\t{stem}\tN;NOM;SG");
        let _ = writeln!(s, "{stem}\t{stem}e\tN;NOM;PL");
        let _ = writeln!(s, "{stem}\t{stem}en\tN;DAT;PL");
    }
    s
}

#[test]
fn ingest_toy_lexicon() {
    let tmp = TempDir::new().unwrap();
    let toy = fixture("toy_lexicon.tsv");
    let o = morphcx(tmp.path(), &["ingest", "--data", toy.to_str().unwrap(), "--out-dir", "o"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("paradigms  2"));
    let store = json(&tmp.path().join("o/paradigms.json"));
    assert_eq!(store["data"]["paradigms"].as_array().unwrap().len(), 2);
    assert_eq!(store["data"]["inventory"].as_array().unwrap().len(), 3);
    assert!(store["meta"]["config_hash"].as_str().unwrap().len() == 64);
}

#[test]
fn ingest_warns_below_threshold() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("lex.tsv"), lexicon(400)).unwrap();
    let o = morphcx(tmp.path(), &["ingest", "--data", "lex.tsv"]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("below 500-paradigm threshold"), "{}", stderr(&o));

    fs::write(tmp.path().join("big.tsv"), lexicon(500)).unwrap();
    let o = morphcx(tmp.path(), &["ingest", "--data", "big.tsv"]);
    assert!(o.status.success());
    assert!(!stderr(&o).contains("threshold"));
}

#[test]
fn exit_codes() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("empty.tsv"), "").unwrap();
    fs::write(tmp.path().join("bad.tsv"), "a\tb\n").unwrap();
    assert_eq!(morphcx(tmp.path(), &["ingest", "--data", "empty.tsv"]).status.code(), Some(66));
    assert_eq!(morphcx(tmp.path(), &["ingest", "--data", "bad.tsv"]).status.code(), Some(65));
    assert_eq!(morphcx(tmp.path(), &["ingest", "--data", "missing.tsv"]).status.code(), Some(64));
    let synth = fixture("synth_regular.json");
    let o = morphcx(tmp.path(), &["run", "--synth", synth.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(64));
    assert!(stderr(&o).contains("--seed"));
    assert_eq!(morphcx(tmp.path(), &["pareto"]).status.code(), Some(64));
}

#[test]
fn step_by_step_matches_run() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    fs::write(d.join("lex.tsv"), lexicon(150)).unwrap();
    let common = ["--seed", "3", "--paradigm-count", "100", "--dev-paradigms", "20", "--test-paradigms", "20"];
    let step = |args: &[&str]| {
        let mut all: Vec<&str> = args.to_vec();
        all.extend(common);
        let o = morphcx(d, &all);
        assert!(o.status.success(), "{args:?}: {}", stderr(&o));
        o
    };
    step(&["ingest", "--data", "lex.tsv", "--out-dir", "s"]);
    step(&["split", "--store", "s/paradigms.json", "--out-dir", "s"]);
    step(&["train", "--split", "s/split.json", "--out-dir", "s"]);
    step(&["weights", "--split", "s/split.json", "--model", "s/model.json", "--out-dir", "s"]);
    step(&["learn-tree", "--weights", "s/weights.json", "--out-dir", "s"]);
    let measured = step(&["measure", "--split", "s/split.json", "--tree", "s/tree.json", "--model", "s/model.json", "--out-dir", "s"]);
    let ran = step(&["run", "--data", "lex.tsv", "--out-dir", "r"]);
    // the step commands never see --data, so only the config hash differs
    let strip = |o: &Output| stdout(o).lines().map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect::<Vec<_>>();
    assert_eq!(strip(&measured), strip(&ran));
    for f in ["split.json", "model.json", "weights.json", "tree.dot"] {
        let a = json_or_text(&d.join("s").join(f));
        let b = json_or_text(&d.join("r").join(f));
        assert_eq!(a, b, "{f}");
    }
}

/// Artifact bodies without the step name and config hash.
fn json_or_text(p: &Path) -> String {
    let text = fs::read_to_string(p).unwrap();
    match serde_json::from_str::<Value>(&text) {
        Ok(mut v) => {
            v["meta"]["command"] = Value::Null;
            v["meta"]["config_hash"] = Value::Null;
            v.to_string()
        }
        Err(_) => text.lines().skip(1).collect::<Vec<_>>().join("\n"),
    }
}

#[test]
fn config_file_and_flag_override() {
    let tmp = TempDir::new().unwrap();
    let synth = fixture("synth_regular.json");
    fs::write(
        tmp.path().join("run.cfg"),
        format!(
            "synth = {}\nseed = 5\nparadigm_count = 60\ndev_paradigms = 10\ntest_paradigms = 10\nout_dir = a\n",
            synth.display()
        ),
    )
    .unwrap();
    let o = morphcx(tmp.path(), &["run", "--config", "run.cfg"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains(",5,"));
    let o = morphcx(tmp.path(), &["run", "--config", "run.cfg", "--seed", "6", "--out-dir", "b"]);
    assert!(o.status.success());
    let m = json(&tmp.path().join("b/manifest.json"));
    assert_eq!(m["data"]["seed"], 6);
    assert_eq!(m["meta"]["seed"], 6);
    assert_eq!(m["data"]["config"]["paradigm_count"], 60);
    assert_eq!(m["data"]["outputs"].as_object().unwrap().len(), 6);
}

#[test]
fn imported_scores_drive_the_pipeline() {
    let tmp = TempDir::new().unwrap();
    let d = tmp.path();
    let lex = lexicon(60);
    fs::write(d.join("lex.tsv"), &lex).unwrap();
    let mut forms: Vec<Vec<(String, String)>> = Vec::new();
    for chunk in lex.lines().collect::<Vec<_>>().chunks(3) {
        forms.push(
            chunk
                .iter()
                .map(|l| {
                    let f: Vec<&str> = l.split('\t').collect();
                    (f[1].to_string(), f[2].to_string())
                })
                .collect(),
        );
    }
    let mut scores = String::new();
    for p in &forms {
        for (tf, ts) in p {
            let _ = writeln!(scores, "\tROOT\t{ts}\t{tf}\t-1");
            for (sf, ss) in p {
                if ss != ts {
                    let _ = writeln!(scores, "{sf}\t{ss}\t{ts}\t{tf}\t-0.5");
                }
            }
        }
    }
    fs::write(d.join("scores.tsv"), scores).unwrap();
    let o = morphcx(
        d,
        &["run", "--data", "lex.tsv", "--scores", "scores.tsv", "--seed", "1", "--paradigm-count", "40", "--dev-paradigms", "10", "--test-paradigms", "10"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let row: Vec<String> = stdout(&o).lines().nth(1).unwrap().split(',').map(String::from).collect();
    // root -1 plus two edges at -0.5
    assert_eq!(row[4].parse::<f64>().unwrap(), 2.0);
    assert!(!d.join("out/model.json").exists());
    assert!(json(&d.join("out/manifest.json"))["data"]["lambda"].is_null());

    fs::write(d.join("partial.tsv"), "\tROOT\tN;NOM;SG\tx\t-1\n").unwrap();
    let o = morphcx(d, &["run", "--data", "lex.tsv", "--scores", "partial.tsv", "--seed", "1", "--paradigm-count", "40", "--dev-paradigms", "10", "--test-paradigms", "10"]);
    assert_eq!(o.status.code(), Some(66));
}

#[test]
fn pareto_report_and_svg() {
    let tmp = TempDir::new().unwrap();
    let o = morphcx(tmp.path(), &["pareto", "--seed", "1", "--n-perm", "500", "--out-dir", "p"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = json(&tmp.path().join("p/report.json"));
    assert_eq!(report["data"]["by_pos"]["V"]["n_points"], 33);
    for pos in ["N", "V"] {
        let text = fs::read_to_string(tmp.path().join(format!("p/pareto_{pos}.svg"))).unwrap();
        let doc = roxmltree::Document::parse(&text).unwrap();
        let count = |tag: &str| doc.descendants().filter(|n| n.has_tag_name(tag)).count();
        assert_eq!(count("path"), 1);
        assert_eq!(count("polygon"), 1);
        assert_eq!(count("circle"), report["data"]["by_pos"][pos]["n_points"].as_u64().unwrap() as usize);
        let texts: Vec<&str> = doc.descendants().filter_map(|n| n.text()).collect();
        assert!(texts.iter().any(|t| t.contains("e-complexity")));
        assert!(texts.iter().any(|t| t.contains("i-complexity")));
    }
}

#[test]
fn pareto_on_points_csv() {
    let tmp = TempDir::new().unwrap();
    let header = "language,pos,regime,e_complexity,i_total_bits,i_per_form_bits,d,seed\n";
    let rows = "a,N,green,2,1.2,0.6,50,1\nb,N,green,5,3.0,0.6,50,1\nc,N,green,9,5.4,0.6,50,1\nd,V,green,3,1,0.5,50,1\n";
    fs::write(tmp.path().join("pts.csv"), format!("{header}{rows}")).unwrap();
    let o = morphcx(tmp.path(), &["pareto", "--points", "pts.csv", "--seed", "2", "--n-perm", "200", "--out-dir", "p"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = json(&tmp.path().join("p/report.json"));
    assert_eq!(report["data"]["by_pos"]["N"]["p_value"], 1.0);
    assert!(report["data"]["by_pos"]["V"]["error"].as_str().unwrap().contains(">= 3"));
    assert!(tmp.path().join("p/pareto_N.svg").exists());
    assert!(!tmp.path().join("p/pareto_V.svg").exists());
}

#[test]
fn plat_and_critique() {
    let tmp = TempDir::new().unwrap();
    let o = morphcx(
        tmp.path(),
        &["plat", "--target", "N;NOM;SG", "--given", "N;ACC;PL=-a"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("{∅: 0.6667, -o: 0.3333}"), "{out}");
    assert!(out.contains("0.918296"));
    let o = morphcx(tmp.path(), &["plat", "--target", "N;GEN;SG", "--given", "N;ACC;PL=-i"]);
    assert!(stdout(&o).contains("{-us: 1.0000}  (H = 0.000000 bits)"), "{}", stdout(&o));

    fs::write(tmp.path().join("const.tsv"), "class\tA\tB\n1\t-a\t-b\n2\t-a\t-b\n").unwrap();
    let o = morphcx(tmp.path(), &["plat", "--plat", "const.tsv"]);
    assert!(stdout(&o).contains("average conditional entropy 0.000000 bits"), "{}", stdout(&o));

    let o = morphcx(tmp.path(), &["critique"]);
    assert!(o.status.success());
    let c = json(&tmp.path().join("out/critique.json"));
    let j = &c["data"]["joint_vs_average"];
    assert!(j["tree_edge_mean"].as_f64().unwrap() <= j["avg_cond_entropy"].as_f64().unwrap());
    assert_eq!(c["data"]["suppletion"]["plat_prob"], 0.0);
    assert!(c["data"]["suppletion"]["model_log2prob"].as_f64().unwrap().is_finite());

    fs::write(tmp.path().join("bad.tsv"), "class\tA\tB\n1\t-a\n").unwrap();
    assert_eq!(morphcx(tmp.path(), &["plat", "--plat", "bad.tsv"]).status.code(), Some(65));
}
