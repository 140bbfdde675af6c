use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn hgrec(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hgrec")).current_dir(dir).args(args).output().expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = hgrec(dir, args);
    assert!(out.status.success(), "hgrec {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures")
}

fn quick_start(dir: &Path) -> Vec<u8> {
    ok(
        dir,
        &[
            "gen",
            "--structure",
            "star",
            "--n",
            "6",
            "--w-min",
            "1",
            "--w-max",
            "10",
            "--seed",
            "3",
            "-o",
            "h.hg",
        ],
    );
    ok(dir, &["mm-sample", "--hg", "h.hg", "--n", "20000", "--k", "2", "--seed", "4", "-o", "d.mm"]);
    ok(dir, &["train", "--mm", "d.mm", "-o", "oracle.json"]);
    ok(dir, &["recover", "--oracle", "oracle.json", "-o", "rec.hg"]);
    ok(dir, &["recover", "--dataset", "d.mm", "-o", "plugin.hg"]);
    ok(dir, &["report", "--truth", "h.hg", "--rec", "rec.hg", "-o", "report.json"]);
    let mut all = Vec::new();
    for f in ["h.hg", "d.mm", "oracle.json", "rec.hg", "plugin.hg", "report.json"] {
        all.extend(fs::read(dir.join(f)).unwrap());
    }
    all
}

#[test]
fn quick_start_is_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(quick_start(a.path()), quick_start(b.path()));

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["meta_connected"], true);
    assert_eq!(report["sketch_missing"].as_array().unwrap().len(), 0);
    assert!(report["d"].as_f64().unwrap() < 0.05);

    let hg = fs::read_to_string(a.path().join("h.hg")).unwrap();
    assert!(hg.starts_with("#hg v1\n#normalized\n"));
    let mm = fs::read_to_string(a.path().join("d.mm")).unwrap();
    assert!(mm.starts_with("#mm 20000 2\n"));
    assert_eq!(mm.lines().count(), 1 + 40000);
}

#[test]
fn alignment_and_fusion_files() {
    let t = tempfile::tempdir().unwrap();
    let dir = t.path();
    fs::write(dir.join("h1.hg"), "#hg v1\nedge a b 0.5\nedge b c 0.3\nedge c d 0.2\n").unwrap();
    fs::write(dir.join("h2.hg"), "#hg v1\nedge w x 0.2\nedge x y 0.3\nedge y z 0.5\n").unwrap();
    let exact = ok(dir, &["align", "--h1", "h1.hg", "--h2", "h2.hg", "--method", "exact"]);
    assert_eq!(exact, "a z\nb y\nc x\nd w\n#cost 0.0000000000000000e0\n");
    let wl = ok(dir, &["align", "--h1", "h1.hg", "--h2", "h2.hg", "--method", "wl-ir"]);
    assert_eq!(wl, exact);

    fs::write(dir.join("anchors.txt"), "edge a+b y+z\nedge b+c x+y\nedge c+d w+x\n").unwrap();
    let ids =
        ok(dir, &["align", "--h1", "h1.hg", "--h2", "h2.hg", "--method", "ids", "--anchors", "anchors.txt"]);
    assert_eq!(ids, exact);

    fs::write(dir.join("phi.txt"), &exact).unwrap();
    fs::write(dir.join("d1.ds"), "a b\nc d\n").unwrap();
    fs::write(dir.join("d2.ds"), "x y\n").unwrap();
    let fused = ok(dir, &["fuse", "--d1", "d1.ds", "--d2", "d2.ds", "--alignment", "phi.txt"]);
    assert_eq!(fused, "y z\nw x\nx y\n");

    fs::write(dir.join("fused.ds"), &fused).unwrap();
    ok(dir, &["recover", "--dataset", "fused.ds", "-o", "rec.hg"]);
    let report = ok(dir, &["report", "--truth", "h2.hg", "--rec", "rec.hg"]);
    let report: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert!(report["meta_connected"].is_null());
}

#[test]
fn bounds_sweep_and_fit() {
    let t = tempfile::tempdir().unwrap();
    let dir = t.path();
    let b: serde_json::Value =
        serde_json::from_str(&ok(dir, &["bounds", "--m", "100", "--n", "10000"])).unwrap();
    assert_eq!(b["lower_bound_risk"], 0.00625);
    let b: serde_json::Value = serde_json::from_str(&ok(
        dir,
        &[
            "bounds",
            "--m",
            "10",
            "--kappa",
            "1",
            "--L",
            "2",
            "--c-pi",
            "0.5",
            "--C-pi",
            "2",
            "--epsilon",
            "0.1",
            "--delta",
            "0.1",
        ],
    ))
    .unwrap();
    assert!(b["K_min"].as_f64().unwrap() > b["N_min"].as_f64().unwrap());

    fs::write(
        dir.join("sweep.toml"),
        "seeds = 2\nn_grid = [100, 1000, 10000]\nk_grid = [1]\n\n[[instance]]\nstructure = \"star\"\nn = 6\nw_min = 1.0\nw_max = 10.0\n",
    )
    .unwrap();
    let a = ok(dir, &["sweep", "--config", "sweep.toml", "--seed", "5", "--jobs", "2"]);
    let b = ok(dir, &["sweep", "--config", "sweep.toml", "--seed", "5", "--jobs", "1"]);
    assert_eq!(a, b);
    assert!(a.starts_with(
        "structure,n,m,kappa_target,kappa_realized,L,c_pi,C_pi,N,K,seed,d_plugin,d_oracle,\
         sketch_missing,sketch_spurious,meta_connected,status,runtime_ms\n"
    ));
    assert_eq!(a.lines().count(), 1 + 6);

    fs::write(dir.join("sweep.csv"), &a).unwrap();
    let fit: serde_json::Value = serde_json::from_str(&ok(
        dir,
        &["fit", "--csv", "sweep.csv", "--x", "N", "--y", "d_plugin", "--filter", "structure=star"],
    ))
    .unwrap();
    let slope = fit["slope"].as_f64().unwrap();
    assert!((-1.0..0.0).contains(&slope), "{slope}");
}

#[test]
fn exit_codes() {
    let t = tempfile::tempdir().unwrap();
    let dir = t.path();
    assert_eq!(hgrec(dir, &["frobnicate"]).status.code(), Some(2));
    assert_eq!(hgrec(dir, &["gen", "--structure", "star"]).status.code(), Some(2));

    let missing = hgrec(dir, &["sample", "--hg", "nope.hg", "--n", "3"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&missing.stderr).starts_with("error:"));

    fs::write(dir.join("a.hg"), "#hg v1\nedge a b 1\nedge b c 1\n").unwrap();
    fs::write(dir.join("b.hg"), "#hg v1\nedge x y 1\nedge z y 2\n").unwrap();
    assert_eq!(
        hgrec(dir, &["align", "--h1", "a.hg", "--h2", "b.hg", "--method", "wl-ir"]).status.code(),
        Some(1)
    );
    assert_eq!(hgrec(dir, &["bounds"]).status.code(), Some(1));
    assert_eq!(hgrec(dir, &["gen", "--structure", "star", "--n", "1"]).status.code(), Some(1));
}

#[test]
fn kg_offline_pipeline() {
    let t = tempfile::tempdir().unwrap();
    let dir = t.path();
    let fx = fixtures();
    let kg = fx.join("kg.tsv");
    let ingested = ok(dir, &["kg-ingest", "--tsv", kg.to_str().unwrap()]);
    assert!(ingested.contains("furniture\ttable\t0.9\n"));

    fs::write(dir.join("kg.tsv"), &ingested).unwrap();
    ok(dir, &["kg-extract", "--kg", "kg.tsv", "--source", "Table", "--k", "2", "--d", "2", "-o", "sub.json"]);
    assert_eq!(
        fs::read_to_string(dir.join("sub.json")).unwrap(),
        fs::read_to_string(fx.join("subgraph.json")).unwrap()
    );
    let prompt = ok(dir, &["kg-prompt", "--subgraph", "sub.json"]);
    assert_eq!(prompt.as_bytes(), fs::read(fx.join("prompt.txt")).unwrap().as_slice());

    let responses = fx.join("responses");
    let responses = responses.to_str().unwrap();
    let chat = ok(dir, &["kg-chat", "--subgraph", "sub.json", "--responses-dir", responses, "--offline"]);
    assert!(chat.contains("Table - Furniture"));
    let empty = tempfile::tempdir().unwrap();
    let miss = hgrec(
        dir,
        &[
            "kg-chat",
            "--subgraph",
            "sub.json",
            "--responses-dir",
            empty.path().to_str().unwrap(),
            "--offline",
        ],
    );
    assert_eq!(miss.status.code(), Some(1));

    let report =
        ok(dir, &["kg-eval", "--subgraph", "sub.json", "--responses-dir", responses, "--model", "fixture"]);
    assert_eq!(report, fs::read_to_string(fx.join("report.json")).unwrap());
    let csv = ok(
        dir,
        &["kg-eval", "--subgraph", "sub.json", "--responses-dir", responses, "--model", "fixture", "--csv"],
    );
    assert_eq!(csv, "source,k,d,model,score,missing,spurious\ntable,2,2,fixture,0.5,2,1\n");

    fs::write(dir.join("resp.txt"), "chair - table\nsofa -> furniture\n").unwrap();
    let parsed: serde_json::Value =
        serde_json::from_str(&ok(dir, &["kg-parse", "--subgraph", "sub.json", "--response", "resp.txt"]))
            .unwrap();
    assert_eq!(parsed["pairs"], serde_json::json!([["chair", "table"], ["furniture", "sofa"]]));
}
