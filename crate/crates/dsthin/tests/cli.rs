use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_dsthin"));
    c.env_remove("DSTHIN_WORKERS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn dsthin")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read(p: impl AsRef<Path>) -> String {
    std::fs::read_to_string(p).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

// Rows of a CSV as string cells, skipping the header and `#` lines.
fn rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).filter(|l| !l.starts_with('#')).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn schema_validator() -> jsonschema::Validator {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("schema/result.schema.json");
    let schema: serde_json::Value = serde_json::from_str(&read(path)).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

fn assert_schema(text: &str) {
    let v: serde_json::Value = serde_json::from_str(text).unwrap();
    let val = schema_validator();
    let errs: Vec<String> = val.iter_errors(&v).map(|e| e.to_string()).collect();
    assert!(errs.is_empty(), "{errs:?}");
}

#[test]
fn ds_make_and_validate() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("tp.ds");
    let o = run(&["ds", "make", "twin-prime:17x19", "-o", s(&f)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["ds", "validate", s(&f)]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "valid 17 19 161 80");

    let text = read(&f);
    let broken = text.replacen("\n0 ", "\n1 ", 1);
    let g = dir.path().join("broken.ds");
    std::fs::write(&g, broken).unwrap();
    assert_eq!(code(&run(&["ds", "validate", s(&g)])), 1);
    assert_eq!(code(&run(&["ds", "make", "twin-prime:4x6", "-o", s(&g)])), 1);
}

#[test]
fn predict_twin_prime_samples_and_glmap() {
    let dir = TempDir::new().unwrap();
    let o = run(&["predict", "--source", "twin-prime:17x19", "--cell", "0.5,0,0.1,0.5", "-o", s(dir.path())]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let samples = rows(&read(dir.path().join("samples.csv")));
    assert_eq!(samples.len(), 17 * 19);
    for r in &samples {
        let db: f64 = r[5].parse().unwrap();
        if r[0] == "0" && r[1] == "0" {
            assert_eq!(db, 0.0);
        } else {
            assert!((db + 25.05).abs() <= 0.01, "{r:?}");
        }
    }
    let gl = read(dir.path().join("glmap.csv"));
    assert!(gl.starts_with("b,c,u,v,visible\n"));
    assert!(gl.lines().any(|l| l == "1,0,2.000000e+00,-4.000000e-01,false"), "{gl}");
    let pattern = read(dir.path().join("pattern.csv"));
    assert!(pattern.starts_with("u,v,chi,psi,p_linear,p_db_norm,visible\n"));
    let bounds: serde_json::Value = serde_json::from_str(&read(dir.path().join("bounds.json"))).unwrap();
    assert!(bounds["sll_sup_db"].as_f64().is_some());
}

#[test]
fn predict_all_ones_offpeak_is_minus_inf() {
    let dir = TempDir::new().unwrap();
    let o = run(&["predict", "--source", "ones:16x16", "-o", s(dir.path())]);
    assert_eq!(code(&o), 0);
    let samples = rows(&read(dir.path().join("samples.csv")));
    let off: Vec<_> = samples.iter().filter(|r| !(r[0] == "0" && r[1] == "0")).collect();
    assert_eq!(off.len(), 255);
    assert!(off.iter().all(|r| r[5] == "-inf"));
    assert!(!dir.path().join("bounds.json").exists());
}

const QUICK: [&str; 4] = ["--quadrature", "96,192", "--phi-steps", "36"];

fn sweep(dir: &Path, source: &str, workers: Option<&str>) -> String {
    let mut c = bin();
    c.args(["sweep", "--source", source, "--cell", "0.5,0,0.1,0.5", "-o", s(dir)]).args(QUICK);
    if let Some(w) = workers {
        c.env("DSTHIN_WORKERS", w);
    }
    let o = c.output().unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    read(dir.join("sweep.csv"))
}

#[test]
fn sweep_bounds_relations() {
    let dir = TempDir::new().unwrap();
    let text = sweep(dir.path(), "twin-prime:11x13", None);
    assert!(text.starts_with("sigma,sigma_x,sigma_y,sll_db,d_db,bw_deg\n"));
    let r = rows(&text);
    assert_eq!(r.len(), 143);
    let sll: Vec<f64> = r.iter().map(|r| r[3].parse().unwrap()).collect();
    let min = sll.iter().copied().fold(f64::INFINITY, f64::min);
    let max = sll.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert!(min <= -15.74 && max >= -21.46, "{min} {max}");
    let footer = text.lines().last().unwrap();
    assert!(footer.starts_with("#bounds sll_inf_db=-2.146"), "{footer}");
    assert!(footer.contains("sll_sup_db=-1.574"), "{footer}");
    for (i, row) in r.iter().enumerate() {
        let (sx, sy): (usize, usize) = (row[1].parse().unwrap(), row[2].parse().unwrap());
        assert_eq!(row[0].parse::<usize>().unwrap(), i);
        assert_eq!(sx * 13 + sy, i);
    }
}

#[test]
fn sweep_single_element_rows_identical() {
    let dir = TempDir::new().unwrap();
    let text = sweep(dir.path(), "delta:5x7", None);
    let r = rows(&text);
    assert_eq!(r.len(), 35);
    assert!(r.iter().all(|x| x[3..] == r[0][3..]), "{text}");
    assert_eq!(r[0][3], "nan");
}

#[test]
fn sweep_is_byte_deterministic_across_workers() {
    let (a, b, c) = (TempDir::new().unwrap(), TempDir::new().unwrap(), TempDir::new().unwrap());
    let one = sweep(a.path(), "twin-prime:5x7", Some("1"));
    let two = sweep(b.path(), "twin-prime:5x7", Some("3"));
    let again = sweep(c.path(), "twin-prime:5x7", Some("1"));
    assert_eq!(one, two);
    assert_eq!(one, again);
}

#[test]
fn sweep_needs_a_difference_set() {
    let dir = TempDir::new().unwrap();
    let o = run(&["sweep", "--source", "ones:4x4", "-o", s(dir.path())]);
    assert_eq!(code(&o), 1);
}

#[test]
fn synthesize_infeasible_exits_2_with_step_1_diagnostic() {
    let dir = TempDir::new().unwrap();
    let o = run(&[
        "synthesize",
        "--catalog",
        "twin-prime:11x13",
        "--sll-db",
        "-60",
        "--d-db",
        "20",
        "--bw-deg",
        "20",
        "--target",
        "0.3,0.2,-10",
        "-o",
        s(dir.path()),
    ]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    let text = read(dir.path().join("diagnostic.json"));
    assert_schema(&text);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["status"], "infeasible");
    assert_eq!(v["failed_step"], 1);
    assert_eq!(v["trace"][0]["step"], 1);
}

#[test]
fn synthesize_from_config_file() {
    let dir = TempDir::new().unwrap();
    let ds = dir.path().join("set.ds");
    assert_eq!(code(&run(&["ds", "make", "twin-prime:11x13", "-o", s(&ds)])), 0);
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        r#"
quadrature = [96, 192]
element = "cosine"

[synthesis]
catalog = ["file:set.ds"]
sll_db = -15.0
d_db = 18.0
bw_deg = 20.0
target = [-0.38, -0.025, -20.0]
cell_box = [0.3, 0.8, -0.2, 0.2, -0.4, 0.4, 0.3, 0.8]
resolution = 0.02
"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = run(&["--config", s(&cfg), "synthesize", "-o", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = read(out.join("result.json"));
    assert_schema(&text);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["status"], "success");
    assert_eq!(v["element"], "cosine");
    let cons = v["constraints"].as_array().unwrap();
    assert_eq!(cons.len(), 4);
    assert!(cons.iter().all(|c| c["met"] == true));
    let pat = v["measured"]["pattern_at"][0]["level_db"].as_f64().unwrap();
    assert!(pat <= -20.0);

    // layout.ds is the catalog set with the optimal shift applied
    let o = run(&["ds", "validate", s(&out.join("layout.ds"))]);
    assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "valid 11 13 71 35");
    let sigma = v["sigma_opt"].as_u64().unwrap() as usize;
    let sweep = rows(&read(out.join("sweep.csv")));
    assert_eq!(sweep.len(), 143);
    let best: f64 = sweep[sigma][3].parse().unwrap();
    assert!((best - v["measured"]["sll_db"].as_f64().unwrap()).abs() < 0.05);

    // flags override the file
    let out2 = dir.path().join("out2");
    let o = run(&["--config", s(&cfg), "synthesize", "--sll-db", "-60", "-o", s(&out2)]);
    assert_eq!(code(&o), 2);
}

#[test]
fn configuration_errors_exit_1() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "sead = 1\n").unwrap();
    assert_eq!(code(&run(&["--config", s(&cfg), "predict", "--source", "ones:4x4"])), 1);
    assert_eq!(code(&run(&["predict", "--source", "file:/no/such.ds"])), 1);
    assert_eq!(code(&run(&["predict", "--source", "ones:4x4", "--cell", "0.5,0,1,0"])), 1);
    assert_eq!(code(&run(&["frobnicate"])), 1);
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn synthesize_cosine_element_targets() {
    let dir = TempDir::new().unwrap();
    let o = run(&[
        "synthesize",
        "--catalog",
        "twin-prime:17x19",
        "--element",
        "cosine",
        "--sll-db",
        "-18",
        "--d-db",
        "22",
        "--bw-deg",
        "12",
        "--target=-0.38,-0.025,-25",
        "--quadrature",
        "128,256",
        "-o",
        s(dir.path()),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = read(dir.path().join("result.json"));
    assert_schema(&text);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["status"], "success");
    assert!(v["measured"]["pattern_at"][0]["level_db"].as_f64().unwrap() <= -25.0);
    assert_eq!(v["bounds"]["theta_bar_source"], "default-rule");
}
