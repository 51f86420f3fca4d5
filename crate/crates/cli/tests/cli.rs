use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};
use std::process::{Child, Command, Output, Stdio};

use serde_json::Value;
use tempfile::TempDir;

fn tg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tg")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = tg(args);
    assert!(
        out.status.success(),
        "tg {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_owned()
}

fn files_in(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

/// d1: a×2 b×1, d2: b×1 c×1
fn abc_corpus(dir: &TempDir) -> String {
    fs::write(dir.path().join("abc.bow"), "2\n3\n4\n1 1 2\n1 2 1\n2 2 1\n2 3 1\n").unwrap();
    fs::write(dir.path().join("abc.vocab"), "a\nb\nc\n").unwrap();
    let out = p(dir, "abc.json");
    ok(&[
        "ingest",
        "--format",
        "bow",
        "--input",
        &p(dir, "abc.bow"),
        "--vocab",
        &p(dir, "abc.vocab"),
        "--out",
        &out,
    ]);
    out
}

fn abc_tree(dir: &TempDir) -> String {
    let corpus = abc_corpus(dir);
    let tree = p(dir, "abc.tree.json");
    ok(&["train", "--algo", "ehac", "--in", &corpus, "--out", &tree]);
    tree
}

fn small_synth(dir: &TempDir, prefix: &str) -> (String, String) {
    let corpus = p(dir, &format!("{prefix}.corpus.json"));
    let truth = p(dir, &format!("{prefix}.truth.json"));
    ok(&[
        "synth", "--seed", "5", "--docs", "400", "--words-per-topic", "20", "--out", &corpus, "--truth", &truth,
    ]);
    (corpus, truth)
}

#[test]
fn pipeline_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let run = || {
        let (corpus, truth) = small_synth(&dir, "s");
        let (train, test) = (p(&dir, "train.json"), p(&dir, "test.json"));
        ok(&["split", "--in", &corpus, "--seed", "1", "--train", &train, "--test", &test]);
        let tree = p(&dir, "tree.json");
        ok(&["train", "--in", &train, "--out", &tree]);
        let err = ok(&["eval-error", "--model", &tree, "--n", "4", "--train", &train, "--truth", &truth]);
        let perp = ok(&[
            "eval-perplexity",
            "--model",
            &tree,
            "--n",
            "4",
            "--train",
            &train,
            "--test",
            &test,
            "--alpha",
            "6.5",
            "--particles",
            "5",
        ]);
        let mut bytes = Vec::new();
        for f in [&corpus, &truth, &train, &test, &tree] {
            bytes.push(fs::read(f).unwrap());
        }
        (bytes, err, perp)
    };
    let a = run();
    let b = run();
    assert_eq!(a.0, b.0, "output files differ between identical runs");
    assert_eq!(a.1, b.1);
    assert_eq!(a.2, b.2);
    let err: Value = serde_json::from_str(&a.1).unwrap();
    let rate = err["error_rate"].as_f64().unwrap();
    assert!((0.0..0.3).contains(&rate), "error rate {rate}");
    assert!(err["meta"]["version"].is_string());
    let perp: Value = serde_json::from_str(&a.2).unwrap();
    assert!(perp["perplexity"].as_f64().unwrap() > 1.0);
}

#[test]
fn mehac_and_ehac_write_the_same_merges() {
    let dir = TempDir::new().unwrap();
    let (corpus, _) = small_synth(&dir, "m");
    let (e, m) = (p(&dir, "e.json"), p(&dir, "m.json"));
    ok(&["train", "--algo", "ehac", "--in", &corpus, "--out", &e]);
    ok(&["train", "--algo", "mehac", "--in", &corpus, "--out", &m]);
    let read = |f: &str| serde_json::from_str::<Value>(&fs::read_to_string(f).unwrap()).unwrap()["merges"].clone();
    assert_eq!(read(&e), read(&m));
}

#[test]
fn topics_at_one_is_the_whole_vocabulary() {
    let dir = TempDir::new().unwrap();
    let tree = abc_tree(&dir);
    let out = ok(&["topics", "--model", &tree, "--n", "1"]);
    let rows: Vec<&str> = out.lines().filter(|l| !l.trim().is_empty()).collect();
    assert_eq!(rows.len(), 2, "{out}");
    for w in ["a", "b", "c"] {
        assert!(rows[1].contains(w), "{out}");
    }
    let two = ok(&["topics", "--model", &tree, "--n", "2", "--top", "3"]);
    assert!(two.lines().any(|l| l.contains("b c") || l.contains("c b")), "{two}");
}

#[test]
fn series_has_one_row_per_merge() {
    let dir = TempDir::new().unwrap();
    let tree = abc_tree(&dir);
    let out = ok(&["series", "--model", &tree]);
    let rows: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "n,delta_h,ratio");
    assert_eq!(rows.len(), 3);
    let first: Vec<&str> = rows[1].split(',').collect();
    assert_eq!(first[0], "2");
    assert_eq!(first[2], "");
    assert!(first[1].parse::<f64>().unwrap() <= 0.0);
}

#[test]
fn freemind_export_of_three_words() {
    let dir = TempDir::new().unwrap();
    let tree = abc_tree(&dir);
    let mm = p(&dir, "abc.mm");
    ok(&["export", "--model", &tree, "--format", "freemind", "--out", &mm]);
    let text = fs::read_to_string(&mm).unwrap();
    assert!(text.starts_with("<map version=\"1.0.1\">"));
    assert_eq!(text.matches("<node ").count(), 5);
    assert_eq!(text.matches("/>").count(), 3);
    assert_eq!(text.matches("</node>").count(), 2);
    let dot = ok(&["export", "--model", &tree, "--format", "dot"]);
    assert!(dot.contains("digraph"));
    assert_eq!(dot.matches("->").count(), 4);
}

#[test]
fn failures_print_one_json_line_and_leave_no_files() {
    let dir = TempDir::new().unwrap();
    let out = p(&dir, "never.json");
    let missing = p(&dir, "missing.bow");
    let res = tg(&["ingest", "--format", "bow", "--input", &missing, "--out", &out]);
    assert_eq!(res.status.code(), Some(1));
    let stderr = String::from_utf8(res.stderr).unwrap();
    let lines: Vec<&str> = stderr.lines().collect();
    assert_eq!(lines.len(), 1, "{stderr}");
    let v: Value = serde_json::from_str(lines[0]).unwrap();
    assert_eq!(v["error"], "io");
    assert!(v["message"].as_str().unwrap().contains("missing.bow"));
    assert!(files_in(dir.path()).is_empty());

    fs::write(dir.path().join("bad.bow"), "2\n3\n1\n1 9 1\n").unwrap();
    let res = tg(&["ingest", "--format", "bow", "--input", &p(&dir, "bad.bow"), "--out", &out]);
    assert_eq!(res.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&res.stderr).unwrap();
    assert_eq!(v["error"], "format");
    assert_eq!(files_in(dir.path()), vec![dir.path().join("bad.bow")]);

    let res = tg(&["topics", "--bogus"]);
    assert_eq!(res.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&res.stderr).unwrap();
    assert_eq!(v["error"], "usage");
}

#[test]
fn out_of_range_cut_is_rejected() {
    let dir = TempDir::new().unwrap();
    let tree = abc_tree(&dir);
    let res = tg(&["topics", "--model", &tree, "--n", "4"]);
    assert_eq!(res.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&res.stderr).unwrap();
    assert_eq!(v["error"], "invalid_argument");
}

#[test]
fn transactions_and_text_ingest() {
    let dir = TempDir::new().unwrap();
    fs::write(
        dir.path().join("orders.csv"),
        "order_id,item_id,quantity\no1,milk,2\no1,bread,1\no2,milk,1\no2,eggs,500\no3,eggs,3\n",
    )
    .unwrap();
    let out = p(&dir, "orders.json");
    ok(&[
        "ingest",
        "--format",
        "transactions",
        "--input",
        &p(&dir, "orders.csv"),
        "--out",
        &out,
    ]);
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["docs"].as_array().unwrap().len(), 3);
    assert_eq!(v["vocab"].as_array().unwrap().len(), 3);

    fs::write(
        dir.path().join("texts.txt"),
        "The cats are running fast\nA cat runs; cats ran 42 times\nrunning cats\n",
    )
    .unwrap();
    let out = p(&dir, "texts.json");
    ok(&[
        "ingest",
        "--format",
        "text",
        "--input",
        &p(&dir, "texts.txt"),
        "--stem",
        "--min-freq",
        "2",
        "--out",
        &out,
    ]);
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    let vocab: Vec<&str> = v["vocab"].as_array().unwrap().iter().map(|w| w.as_str().unwrap()).collect();
    assert!(vocab.contains(&"cat"), "{vocab:?}");
    assert!(vocab.contains(&"run"), "{vocab:?}");
    assert!(!vocab.iter().any(|w| w.chars().any(|c| c.is_ascii_digit())));
}

#[test]
fn classify_with_tg_and_word_selection() {
    let dir = TempDir::new().unwrap();
    let (corpus, truth) = small_synth(&dir, "c");
    let corpus_v: Value = serde_json::from_str(&fs::read_to_string(&corpus).unwrap()).unwrap();
    let truth_v: Value = serde_json::from_str(&fs::read_to_string(&truth).unwrap()).unwrap();
    let vocab: Vec<String> = corpus_v["vocab"]
        .as_array()
        .unwrap()
        .iter()
        .map(|w| w.as_str().unwrap().to_owned())
        .collect();
    let true_vocab: Vec<&str> = truth_v["truth"]["vocab"]
        .as_array()
        .unwrap()
        .iter()
        .map(|w| w.as_str().unwrap())
        .collect();
    let word_topic = truth_v["truth"]["word_topic"].as_array().unwrap();
    // label each document by the non-stopword topic owning most of its tokens
    let mut labels = String::from("doc_id,label\n");
    for d in corpus_v["docs"].as_array().unwrap() {
        let mut mass = [0u64; 4];
        for pair in d["counts"].as_array().unwrap() {
            let w = pair[0].as_u64().unwrap() as usize;
            let k = true_vocab.iter().position(|x| *x == vocab[w]).unwrap();
            mass[word_topic[k].as_u64().unwrap() as usize] += pair[1].as_u64().unwrap();
        }
        let best = (1..4).max_by_key(|&t| (mass[t], std::cmp::Reverse(t))).unwrap();
        labels.push_str(&format!("{},t{best}\n", d["id"]));
    }
    fs::write(dir.path().join("labels.csv"), labels).unwrap();

    for reducer in ["tg", "ig", "df"] {
        let csv = p(&dir, &format!("{reducer}.csv"));
        ok(&[
            "classify",
            "--reducer",
            reducer,
            "--n-or-k",
            "1,4,10",
            "--corpus",
            &corpus,
            "--labels",
            &p(&dir, "labels.csv"),
            "--out",
            &csv,
        ]);
        let text = fs::read_to_string(&csv).unwrap();
        let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(rows[0], "feature_count,micro_avg");
        assert_eq!(rows.len(), 4);
        let acc: Vec<f64> = rows[1..]
            .iter()
            .map(|r| r.split(',').nth(1).unwrap().parse().unwrap())
            .collect();
        assert!(acc.iter().all(|a| (0.0..=1.0).contains(a)));
        if reducer == "tg" {
            assert!(acc[1] > 0.8, "tg accuracy at 4 topics {acc:?}");
        }
    }
}

struct Server {
    child: Child,
    addr: String,
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

fn start_server(tree: &str) -> Server {
    let mut child = Command::new(env!("CARGO_BIN_EXE_tg"))
        .args(["serve", "--model", tree, "--port", "0"])
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
    let addr = line.trim().strip_prefix("listening on http://").unwrap().to_owned();
    Server { child, addr }
}

fn get(server: &Server, path: &str) -> (u16, Value, String) {
    let mut s = TcpStream::connect(&server.addr).unwrap();
    write!(s, "GET {path} HTTP/1.1\r\nHost: {}\r\nConnection: close\r\n\r\n", server.addr).unwrap();
    let mut raw = String::new();
    s.read_to_string(&mut raw).unwrap();
    let (head, body) = raw.split_once("\r\n\r\n").unwrap();
    let status: u16 = head.split_whitespace().nth(1).unwrap().parse().unwrap();
    let body = if head.to_ascii_lowercase().contains("transfer-encoding: chunked") {
        dechunk(body)
    } else {
        body.to_owned()
    };
    (status, serde_json::from_str(&body).unwrap_or(Value::Null), head.to_owned())
}

fn dechunk(mut body: &str) -> String {
    let mut out = String::new();
    loop {
        let (size, rest) = body.split_once("\r\n").unwrap();
        let n = usize::from_str_radix(size.trim(), 16).unwrap();
        if n == 0 {
            return out;
        }
        out.push_str(&rest[..n]);
        body = &rest[n + 2..];
    }
}

#[test]
fn serve_answers_explorer_queries() {
    let dir = TempDir::new().unwrap();
    let tree = abc_tree(&dir);
    let before = fs::read(&tree).unwrap();
    let server = start_server(&tree);

    let (status, meta, head) = get(&server, "/meta");
    assert_eq!(status, 200);
    assert!(head.to_ascii_lowercase().contains("access-control-allow-origin: *"));
    assert_eq!(meta["n_leaves"], 3);
    assert_eq!(meta["vocab_size"], 3);
    assert_eq!(meta["doc_count"], 2);
    assert_eq!(meta["root"], 4);

    let (status, flat, _) = get(&server, "/flat?n=2&top=5");
    assert_eq!(status, 200);
    let rows = flat.as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["f"], 3);
    assert_eq!(rows[0]["size"], 2);
    let mut words: Vec<&str> = rows[0]["words"].as_array().unwrap().iter().map(|w| w.as_str().unwrap()).collect();
    words.sort();
    assert_eq!(words, ["b", "c"]);

    let (status, node, _) = get(&server, "/node/4");
    assert_eq!(status, 200);
    assert_eq!(node["size"], 3);
    assert_eq!(node["children"].as_array().unwrap().len(), 2);
    assert!(node["parent"].is_null());
    assert!(node["delta_h"].as_f64().unwrap() <= 0.0);

    let (status, leaf, _) = get(&server, "/node/0");
    assert_eq!(status, 200);
    assert_eq!(leaf["words"][0], "a");
    assert_eq!(leaf["parent"], 4);

    let (status, path, _) = get(&server, "/path/1");
    assert_eq!(status, 200);
    assert_eq!(path, serde_json::json!([4, 3, 1]));

    let (status, body, _) = get(&server, "/node/99");
    assert_eq!(status, 404);
    assert!(body["error"].is_string());
    let (status, _, _) = get(&server, "/flat?n=0");
    assert_eq!(status, 400);

    assert_eq!(fs::read(&tree).unwrap(), before, "serving modified the model file");
}
