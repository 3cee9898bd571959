#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use bvarx::panel::YearMonth;
use bvarx::sim::VarDgp;

pub const ENDOG: [&str; 5] = ["ip", "cpi", "unemp", "rate", "fx"];
pub const EXOG: [&str; 4] = ["epu", "gpr", "oil", "vix"];

/// Published tuning results: (label, H, p, λ0, λ1, λ3, λ4, λ5, μ5, μ6).
pub const PUBLISHED: [(&str, usize, usize, [f64; 7]); 14] = [
    ("canada", 12, 1, [0.2, 0.05, 1.0, 0.1, 0.0, 1.0, 0.0]),
    ("canada", 24, 1, [0.6, 0.05, 1.0, 0.1, 1.0, 1.0, 1.0]),
    ("us", 12, 4, [0.2, 0.05, 3.0, 0.1, 0.5, 0.5, 0.5]),
    ("us", 24, 4, [0.2, 0.1, 1.0, 0.1, 0.0, 1.0, 0.0]),
    ("france", 12, 1, [0.2, 0.05, 1.0, 0.1, 0.0, 1.0, 0.0]),
    ("france", 24, 3, [0.8, 0.2, 1.0, 0.5, 0.0, 0.0, 0.5]),
    ("germany", 12, 1, [0.2, 0.05, 1.0, 0.1, 0.0, 1.0, 0.0]),
    ("germany", 24, 4, [0.4, 0.05, 2.0, 0.5, 0.0, 1.0, 0.5]),
    ("japan", 12, 1, [0.2, 0.05, 1.0, 0.1, 0.0, 1.0, 0.0]),
    ("japan", 24, 2, [0.2, 0.05, 1.0, 0.1, 0.0, 0.5, 0.0]),
    ("uk", 12, 1, [0.2, 0.05, 1.0, 0.1, 0.0, 1.0, 0.0]),
    ("uk", 24, 4, [0.2, 0.05, 1.0, 0.5, 0.0, 1.0, 1.0]),
    ("italy", 12, 1, [0.2, 0.05, 1.0, 0.1, 0.0, 1.0, 0.0]),
    ("italy", 24, 4, [0.2, 0.05, 1.0, 0.1, 0.5, 1.0, 0.5]),
];

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_bvarx")
}

/// Run a subcommand on a config file.
pub fn run(cmd: &str, config: &Path, extra: &[&str]) -> Output {
    Command::new(bin()).arg(cmd).arg(config).args(extra).output().expect("spawn bvarx")
}

/// Simulated 5 + 4 column monthly panel written as CSV.
pub fn write_panel(dir: &Path, t: usize, seed: u64) -> PathBuf {
    let g = VarDgp::toy(5, 1, 4);
    let panel = g
        .simulate_named(
            t,
            seed,
            YearMonth::new(1995, 1).unwrap(),
            ENDOG.iter().map(|s| s.to_string()).collect(),
            EXOG.iter().map(|s| s.to_string()).collect(),
        )
        .unwrap();
    let path = dir.join("panel.csv");
    fs::write(&path, panel.to_csv_string()).unwrap();
    path
}

pub fn quoted(names: &[&str]) -> String {
    names.iter().map(|n| format!("\"{n}\"")).collect::<Vec<_>>().join(", ")
}

/// Config header shared by the CLI tests.
pub fn base_config(seed: u64, out: &str, horizon: usize) -> String {
    format!(
        "seed = {seed}\nout = \"{out}\"\n\n[data]\npaths = [\"panel.csv\"]\nendogenous = [{}]\nexogenous = [{}]\n\n[model]\nhorizon = {horizon}\n",
        quoted(&ENDOG),
        quoted(&EXOG)
    )
}

pub fn hyper_table(p: usize, v: &[f64; 7]) -> String {
    format!(
        "\n[model.hyper]\np = {p}\nlambda0 = {}\nlambda1 = {}\nlambda3 = {}\nlambda4 = {}\nlambda5 = {}\nmu5 = {}\nmu6 = {}\n",
        v[0], v[1], v[2], v[3], v[4], v[5], v[6]
    )
}

/// Every file in `dir`, sorted by name, with its bytes.
pub fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

/// Run `forecast` twice for every published tuple on a T = 351 panel and
/// compare the output directories byte for byte.
pub fn replay_published_rows() -> Result<usize, String> {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dir = tmp.path();
    write_panel(dir, 351, 20240901);
    for (i, (label, h, p, v)) in PUBLISHED.iter().enumerate() {
        let mut runs = Vec::new();
        for rep in 0..2 {
            let out = format!("out_{i}_{rep}");
            let cfg = dir.join(format!("{label}_{h}_{rep}.toml"));
            fs::write(&cfg, base_config(7, &out, *h) + &hyper_table(*p, v)).map_err(|e| e.to_string())?;
            let o = run("forecast", &cfg, &[]);
            if !o.status.success() {
                return Err(format!("{label} {h}M: exit {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr)));
            }
            runs.push(snapshot(&dir.join(out)));
        }
        if runs[0].len() != 5 {
            return Err(format!("{label} {h}M: expected 5 output files, got {}", runs[0].len()));
        }
        if runs[0] != runs[1] {
            return Err(format!("{label} {h}M: outputs differ between identical runs"));
        }
        let points = String::from_utf8_lossy(&runs[0].iter().find(|f| f.0 == "point.csv").unwrap().1).into_owned();
        let rows = points.lines().filter(|l| !l.starts_with('#')).count() - 1;
        if rows != 5 * h {
            return Err(format!("{label} {h}M: point.csv has {rows} rows, expected {}", 5 * h));
        }
    }
    Ok(PUBLISHED.len())
}
