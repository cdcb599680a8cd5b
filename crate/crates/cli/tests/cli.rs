use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use uabs_hetnet::gaopt::GenerationStats;
use uabs_hetnet::hexopt::IcicGrid;
use uabs_hetnet::io;
use uabs_hetnet::radio::{IcicMode, SeReport};

const TINY: &str = r#"
schema_version = 1
preset = "desk"

[experiment]
n_uabs_list = [3]
n_drops = 2
master_seed = 11

[experiment.scenario.region]
width_km = 2.0
height_km = 2.0

[experiment.ga]
population_size = 12
generations = 4
"#;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_uabs-hetnet"));
    c.env_remove("UABS_HETNET_OUT_DIR");
    c
}

fn workspace_config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

struct Sandbox {
    dir: TempDir,
}

impl Sandbox {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("tiny.toml"), TINY).unwrap();
        Self { dir }
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    fn run(&self, args: &[&str]) -> Output {
        let cfg = self.path("tiny.toml");
        let out = self.path("out");
        bin()
            .args([
                "--config",
                cfg.to_str().unwrap(),
                "--out-dir",
                out.to_str().unwrap(),
                "--jobs",
                "1",
            ])
            .args(args)
            .output()
            .unwrap()
    }

    fn ok(&self, args: &[&str]) -> String {
        let o = self.run(args);
        assert!(
            o.status.success(),
            "{args:?} failed: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        String::from_utf8(o.stdout).unwrap()
    }

    fn report(&self, rel: &str) -> SeReport {
        io::read_report_json(fs::File::open(self.path(rel)).unwrap()).unwrap()
    }

    fn json(&self, rel: &str) -> serde_json::Value {
        serde_json::from_str(&fs::read_to_string(self.path(rel)).unwrap()).unwrap()
    }
}

fn data_rows(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().count() - 1
}

#[test]
fn scenario_rows_match_node_counts() {
    let s = Sandbox::new();
    s.ok(&["scenario"]);
    let summary = s.json("out/scenario/summary.json");
    let entries = summary.as_array().unwrap();
    assert_eq!(entries.len(), 2);
    for e in entries {
        let file = s.path("out/scenario").join(e["file"].as_str().unwrap());
        let nodes = e["n_mbs"].as_u64().unwrap() + 3 + e["n_ue"].as_u64().unwrap();
        assert_eq!(data_rows(&file) as u64, nodes);
        let text = fs::read_to_string(&file).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("uabs,")).count(), 3);
        assert!(text.starts_with("node_type,x_km,y_km,z_m\n"));
    }
    let cdf = s.path("out/scenario/pathloss_cdf_u3_d0.5_drop0.csv");
    assert!(fs::read_to_string(cdf).unwrap().starts_with("loss_db,cum_prob\n"));
}

#[test]
fn heavy_destruction_leaves_the_floor_complement() {
    let s = Sandbox::new();
    s.ok(&["scenario", "--destroy", "0.975", "--drops", "3"]);
    let summary = s.json("out/scenario/summary.json");
    for e in summary.as_array().unwrap() {
        let deployed = e["n_mbs_deployed"].as_u64().unwrap();
        let left = e["n_mbs"].as_u64().unwrap();
        assert_eq!(left, deployed - (0.975 * deployed as f64).floor() as u64, "{e}");
        let file = s.path("out/scenario").join(e["file"].as_str().unwrap());
        let text = fs::read_to_string(file).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("mbs,")).count() as u64, left);
    }
}

#[test]
fn negative_intensity_is_rejected() {
    let s = Sandbox::new();
    let bad = s.path("bad.toml");
    fs::write(&bad, "schema_version = 1\n[experiment.scenario]\nlambda_mbs = -1.0\n").unwrap();
    let o = bin()
        .args([
            "--config",
            bad.to_str().unwrap(),
            "--out-dir",
            s.path("out").to_str().unwrap(),
            "scenario",
        ])
        .output()
        .unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("lambda_mbs"));
    assert!(!s.path("out/scenario").exists());
}

#[test]
fn unknown_config_key_is_rejected() {
    let s = Sandbox::new();
    let bad = s.path("bad.toml");
    fs::write(&bad, "schema_version = 1\n[experiment]\nn_drop = 3\n").unwrap();
    let o = bin()
        .args(["--config", bad.to_str().unwrap(), "scenario"])
        .output()
        .unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("experiment.n_drop"));
}

fn check_sweep(s: &Sandbox, model: &str) {
    s.ok(&["--model", model, "sweep"]);
    let first: Vec<Vec<u8>> = ["none", "eicic", "feicic"]
        .iter()
        .map(|m| {
            let p = s.path(&format!("out/sweep/sweep_{m}.csv"));
            let text = fs::read_to_string(&p).unwrap();
            assert_eq!(
                text.lines().next().unwrap(),
                "tau_db,mean_fifth_pse_bpshz_u3_d0.5,std_fifth_pse_bpshz_u3_d0.5"
            );
            let taus: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
            assert_eq!(taus, ["0", "3", "6", "9", "12", "15"]);
            fs::read(p).unwrap()
        })
        .collect();
    s.ok(&["--model", model, "sweep"]);
    for (m, bytes) in ["none", "eicic", "feicic"].iter().zip(first) {
        assert_eq!(fs::read(s.path(&format!("out/sweep/sweep_{m}.csv"))).unwrap(), bytes);
    }
}

#[test]
fn sweep_writes_three_deterministic_tables_for_both_models() {
    let s = Sandbox::new();
    check_sweep(&s, "splm");
    check_sweep(&s, "ohplm");
}

#[test]
fn sweep_seed_changes_the_numbers() {
    let s = Sandbox::new();
    s.ok(&["sweep", "--taus", "0,6"]);
    let a = fs::read(s.path("out/sweep/sweep_feicic.csv")).unwrap();
    s.ok(&["--seed", "12", "sweep", "--taus", "0,6"]);
    let b = fs::read(s.path("out/sweep/sweep_feicic.csv")).unwrap();
    assert_eq!(data_rows(&s.path("out/sweep/sweep_feicic.csv")), 2);
    assert_ne!(a, b);
}

fn history(s: &Sandbox) -> Vec<GenerationStats> {
    io::read_history_csv(fs::File::open(s.path("out/optimize/history.csv")).unwrap()).unwrap()
}

#[test]
fn single_generation_history_has_one_row() {
    let s = Sandbox::new();
    s.ok(&["--generations", "1", "optimize"]);
    let h = history(&s);
    assert_eq!(h.len(), 1);
    assert_eq!(h[0].generation, 1);
}

#[test]
fn history_best_is_nondecreasing() {
    let s = Sandbox::new();
    s.ok(&["--generations", "8", "optimize", "--drop", "1"]);
    let h = history(&s);
    assert_eq!(h.len(), 8);
    assert!(h.windows(2).all(|w| w[1].best >= w[0].best));
    assert!(h.iter().all(|g| g.mean <= g.best));
    let result = s.json("out/optimize/result.json");
    assert_eq!(result["fifth_pse"].as_f64().unwrap(), h.last().unwrap().best);
}

fn rescore(s: &Sandbox, dir: &str) {
    let result = s.json(&format!("out/{dir}/result.json"));
    let seed = result["fading_seed"].as_u64().unwrap().to_string();
    let layout = s.path(&format!("out/{dir}/layout.csv"));
    let params = s.path(&format!("out/{dir}/params.json"));
    s.ok(&[
        "evaluate",
        "--layout",
        layout.to_str().unwrap(),
        "--params",
        params.to_str().unwrap(),
        "--fading-seed",
        &seed,
    ]);
    let original = s.report(&format!("out/{dir}/report.json"));
    let again = s.report("out/evaluate/report.json");
    assert_eq!(again.fifth_percentile_se, original.fifth_percentile_se);
    assert_eq!(again.per_ue_se, original.per_ue_se);
    assert_eq!(again.cell_loads.total(), again.n_ue() as u64);
}

#[test]
fn evaluate_reproduces_ga_fitness() {
    let s = Sandbox::new();
    s.ok(&["optimize"]);
    rescore(&s, "optimize");
}

#[test]
fn evaluate_reproduces_grid_search_winner() {
    let s = Sandbox::new();
    s.ok(&["--mode", "eicic", "hexsearch"]);
    let points = IcicGrid::default().for_mode(IcicMode::Eicic).len();
    assert_eq!(data_rows(&s.path("out/hexsearch/grid.csv")), points);
    rescore(&s, "hexsearch");
}

#[test]
fn evaluate_rejects_layout_without_ues() {
    let s = Sandbox::new();
    let layout = s.path("empty.csv");
    fs::write(&layout, "node_type,x_km,y_km,z_m\nmbs,1,1,30\nuabs,0.5,0.5,100\n").unwrap();
    let params = s.path("p.json");
    fs::write(
        &params,
        r#"{"tau_db": 6, "alpha": 0.5, "rho_db": 30, "rho_prime_db": -10, "beta": 0.5}"#,
    )
    .unwrap();
    let o = s.run(&[
        "evaluate",
        "--layout",
        layout.to_str().unwrap(),
        "--params",
        params.to_str().unwrap(),
        "--fading-seed",
        "1",
    ]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("UE"));
}

#[test]
fn evaluate_report_loads_sum_to_ue_count() {
    let s = Sandbox::new();
    s.ok(&["scenario"]);
    let layout = s.path("out/scenario/layout_u3_d0.5_drop1.csv");
    let params = s.path("p.json");
    fs::write(
        &params,
        r#"{"tau_db": 9, "alpha": 0.2, "rho_db": "inf", "rho_prime_db": -12, "beta": 0.5}"#,
    )
    .unwrap();
    s.ok(&[
        "evaluate",
        "--layout",
        layout.to_str().unwrap(),
        "--params",
        params.to_str().unwrap(),
        "--fading-seed",
        "5",
    ]);
    let r = s.report("out/evaluate/report.json");
    let ues = data_rows(&layout) - 3 - r.cell_loads.mbs.len();
    assert_eq!(r.n_ue(), ues);
    assert_eq!(r.cell_loads.total(), ues as u64);
    assert_eq!(data_rows(&s.path("out/evaluate/ue.csv")), ues);
}

#[test]
fn bench_writes_matched_tables() {
    let s = Sandbox::new();
    s.ok(&["--generations", "2", "bench"]);
    for d in ["hex", "ga"] {
        let drops = s.path(&format!("out/bench/drops_{d}.csv"));
        assert_eq!(data_rows(&drops), 2);
        let agg = s.json(&format!("out/bench/aggregate_{d}.json"));
        assert_eq!(agg["deployment"], d);
    }
    let rt = fs::read_to_string(s.path("out/bench/runtime.csv")).unwrap();
    assert!(rt.starts_with("n_uabs,destroy_fraction,hex_elapsed_s,ga_elapsed_s,hex_fifth_pse,ga_fifth_pse\n"));
    assert_eq!(rt.lines().count(), 2);
}

#[test]
fn out_dir_falls_back_to_environment() {
    let s = Sandbox::new();
    let cfg = s.path("tiny.toml");
    let o = bin()
        .env("UABS_HETNET_OUT_DIR", s.path("from-env"))
        .args(["--config", cfg.to_str().unwrap(), "--drops", "1", "scenario"])
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(s.path("from-env/scenario/summary.json").exists());
}

#[test]
fn shipped_configs_parse() {
    for name in ["desk.toml", "full.toml", "ohplm.toml"] {
        let s = Sandbox::new();
        let o = bin()
            .args([
                "--config",
                workspace_config(name).to_str().unwrap(),
                "--out-dir",
                s.path("out").to_str().unwrap(),
                "--drops",
                "1",
                "--n-uabs",
                "2",
                "scenario",
            ])
            .output()
            .unwrap();
        assert!(o.status.success(), "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
}
