//! Command implementations behind the `bvarx` binary. Each command reads the
//! run configuration and its input files and writes its outputs into the
//! configured output directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::bvar::{fit, SzHyper};
use crate::compare::{dm_multivariate, gw_unconditional, loss_differentials, mcb, murphy_diff, theta_grid, MurphyCurve};
use crate::config::{ExogMode, RunConfig};
use crate::error::{Error, Result};
use crate::forecast::{forecast, ForecastOptions, Support, SupportBounds};
use crate::io::{Cell, Table};
use crate::linalg::Mat;
use crate::lp::{fit_panel, select_lags_bic, Regime};
use crate::metrics::{metric_row, MetricSettings};
use crate::panel::{pinned_exog, ExogPath, Panel, YearMonth};
use crate::svg;
use crate::tuner::{grid_search, GridSpec};
use crate::wavelet::{coherence_test, CoherenceOptions};

/// Contents of `winner.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Winner {
    pub hyper: SzHyper,
    pub score: f64,
    pub horizon: usize,
    pub origins: Vec<usize>,
    pub candidates: usize,
    pub failed: usize,
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cfg.out_dir();
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

fn hyper_cells(h: &SzHyper) -> Vec<Cell> {
    let mut row: Vec<Cell> = vec![h.p.into()];
    row.extend(h.as_array()[1..].iter().map(|v| Cell::from(*v)));
    row.push(h.prior_family.to_string().into());
    row
}

const HYPER_COLUMNS: [&str; 9] = ["p", "lambda0", "lambda1", "lambda3", "lambda4", "lambda5", "mu5", "mu6", "prior_family"];

/// Grid search over the configured grid; writes `leaderboard.csv` and `winner.json`.
pub fn cmd_tune(cfg: &RunConfig) -> Result<Winner> {
    let grid = cfg.tune.grid.resolve();
    if grid.candidates().is_empty() {
        return Err(Error::Config("tune.grid has an empty hyperparameter list".into()));
    }
    let panel = cfg.panel()?;
    let train = cfg.train_panel(&panel)?;
    let spec = GridSpec { grid, horizon: cfg.model.horizon, origins: cfg.tune.origins.clone(), window: cfg.tune.window };
    let res = grid_search(&train, &spec)?;
    let dir = out_dir(cfg)?;

    let mut header = vec!["rank"];
    header.extend(HYPER_COLUMNS);
    header.extend(["score", "failure"]);
    let mut t = Table::new(&header)
        .meta("horizon", spec.horizon)
        .meta("origins", res.origins.len())
        .meta("train_rows", train.len());
    for (i, e) in res.leaderboard.iter().enumerate() {
        let mut row: Vec<Cell> = vec![(i + 1).into()];
        row.extend(hyper_cells(&e.hyper));
        row.push(e.score.into());
        row.push(e.failure.clone().unwrap_or_default().into());
        t.push(row);
    }
    t.write(&dir.join("leaderboard.csv"))?;

    let winner = Winner {
        hyper: res.best,
        score: res.score,
        horizon: res.horizon,
        origins: res.origins.clone(),
        candidates: res.leaderboard.len(),
        failed: res.leaderboard.iter().filter(|e| e.failure.is_some()).count(),
    };
    write_json(&dir.join("winner.json"), &winner)?;
    Ok(winner)
}

/// Pinned tuple if present, otherwise the winner file.
pub fn resolve_hyper(cfg: &RunConfig) -> Result<SzHyper> {
    if let Some(h) = cfg.model.hyper {
        return Ok(h);
    }
    let path = match &cfg.model.winner {
        Some(p) => cfg.resolve(p),
        None => cfg.out_dir().join("winner.json"),
    };
    if !path.exists() {
        return Err(Error::Config(format!(
            "no pinned model.hyper and no winner file at {}; run `tune` first or pin a tuple",
            path.display()
        )));
    }
    let w: Winner = serde_json::from_str(&fs::read_to_string(&path)?)
        .map_err(|e| Error::Config(format!("winner file {}: {e}", path.display())))?;
    w.hyper.validate().map_err(|e| Error::Config(format!("winner file {}: {e}", path.display())))?;
    Ok(w.hyper)
}

fn support_bounds(cfg: &RunConfig, panel: &Panel) -> Result<SupportBounds> {
    panel
        .endog_names()
        .iter()
        .map(|n| cfg.forecast.bounds.get(n).map(|b| b.support()).unwrap_or(Ok(Support::UNBOUNDED)))
        .collect::<Result<Vec<_>>>()
        .map(SupportBounds)
}

fn exog_path(cfg: &RunConfig, panel: &Panel, train: &Panel, h: usize) -> Result<ExogPath> {
    match cfg.forecast.exog {
        ExogMode::Pinned => pinned_exog(train, h),
        ExogMode::Observed => {
            let t = train.len();
            if t + h > panel.len() {
                return Err(Error::InsufficientData(format!(
                    "observed exogenous path needs {h} rows after row {t}, panel has {}",
                    panel.len()
                )));
            }
            Ok(ExogPath::new(panel.exog().rows(t, h).into_owned()))
        }
    }
}

/// Fit, simulate and write `point.csv`, `intervals.csv` and `fan.svg`.
pub fn cmd_forecast(cfg: &RunConfig) -> Result<()> {
    let hyper = resolve_hyper(cfg)?;
    let panel = cfg.panel()?;
    let train = cfg.train_panel(&panel)?;
    let h = cfg.model.horizon;
    let exog = exog_path(cfg, &panel, &train, h)?;
    let bounds = support_bounds(cfg, &panel)?;
    let post = fit(&hyper, &train)?;
    let f = &cfg.forecast;
    let opts = ForecastOptions { draws: f.draws, gamma: f.gamma, min_stable_frac: f.min_stable_frac, point: f.point, seed: cfg.seed };
    let dist = forecast(&post, &train, &exog, h, &bounds, &opts)?;
    let dir = out_dir(cfg)?;

    let last = *train.dates().last().ok_or(Error::EmptyPanel)?;
    let names = train.endog_names();
    let date = |k: usize| last.add_months(k as i64).to_string();
    let meta = |t: Table| {
        t.meta("hyper", hyper)
            .meta("seed", cfg.seed)
            .meta("draws", f.draws)
            .meta("gamma", f.gamma)
            .meta("origin", last)
            .meta("exog", format!("{:?}", f.exog).to_lowercase())
    };

    let mut point = meta(Table::new(&["variable", "horizon", "date", "point"]));
    for (j, name) in names.iter().enumerate() {
        for k in 1..=h {
            point.push(vec![name.as_str().into(), k.into(), date(k).into(), dist.point[(k - 1, j)].into()]);
        }
    }
    point.write(&dir.join("point.csv"))?;

    let mut iv = meta(Table::new(&[
        "variable", "horizon", "date", "point", "lower", "upper", "gamma", "gamma_eff", "acceptance_rate", "admissible",
    ]));
    let mut sorted = dist.intervals.clone();
    sorted.sort_by_key(|i| (i.variable, i.horizon));
    for i in &sorted {
        iv.push(vec![
            names[i.variable].as_str().into(),
            i.horizon.into(),
            date(i.horizon).into(),
            dist.point[(i.horizon - 1, i.variable)].into(),
            i.lower.into(),
            i.upper.into(),
            i.gamma.into(),
            i.gamma_eff.into(),
            i.rho.into(),
            i.admissible.into(),
        ]);
    }
    iv.write(&dir.join("intervals.csv"))?;

    let nh = f.history.min(train.len());
    let series: Vec<svg::FanSeries> = names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let mine: Vec<_> = sorted.iter().filter(|i| i.variable == j).collect();
            svg::FanSeries {
                name,
                point: dist.point.column(j).iter().copied().collect(),
                lower: mine.iter().map(|i| i.lower).collect(),
                upper: mine.iter().map(|i| i.upper).collect(),
                history: train.endog().column(j).rows(train.len() - nh, nh).iter().copied().collect(),
            }
        })
        .collect();
    fs::write(dir.join("fan.svg"), svg::fan_chart(&series, f.gamma))?;
    Ok(())
}

/// One model's point forecasts, in file order, keyed by variable.
struct ForecastFile {
    variables: Vec<String>,
    rows: BTreeMap<String, Vec<(YearMonth, f64)>>,
}

fn read_forecast_file(path: &Path) -> Result<ForecastFile> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    let header = rdr.headers()?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(format!("{name} in {}", path.display())))
    };
    let (cv, cd, cp) = (col("variable")?, col("date")?, col("point")?);
    let mut out = ForecastFile { variables: Vec::new(), rows: BTreeMap::new() };
    for rec in rdr.records() {
        let rec = rec?;
        let var = rec[cv].to_string();
        let date: YearMonth = rec[cd]
            .parse()
            .map_err(|_| Error::BadDate { value: rec[cd].to_string(), source_name: path.display().to_string() })?;
        let v = crate::io::parse_f64(&rec[cp]).ok_or_else(|| Error::BadValue {
            value: rec[cp].to_string(),
            column: var.clone(),
            date: date.to_string(),
        })?;
        if !out.rows.contains_key(&var) {
            out.variables.push(var.clone());
        }
        out.rows.entry(var).or_default().push((date, v));
    }
    if out.variables.is_empty() {
        return Err(Error::Misaligned(format!("{} contains no forecasts", path.display())));
    }
    Ok(out)
}

/// Per-variable comparison block in `tests.json`.
#[derive(Debug, Serialize)]
struct VariableTests {
    variable: String,
    periods: usize,
    dm: crate::compare::WaldTestResult,
    gw: crate::compare::WaldTestResult,
}

/// Metrics, equal-accuracy tests, MCB and Murphy diagrams over two or more
/// forecast files; writes `metrics.csv`, `tests.json`, `murphy.csv` and `murphy.svg`.
pub fn cmd_evaluate(cfg: &RunConfig) -> Result<()> {
    let ev = cfg.evaluate.as_ref().ok_or_else(|| Error::Config("missing [evaluate] section".into()))?;
    let panel = cfg.panel()?;
    let files: Vec<ForecastFile> = ev.models.iter().map(|m| read_forecast_file(&cfg.resolve(&m.path))).collect::<Result<_>>()?;
    let names: Vec<&str> = ev.models.iter().map(|m| m.name.as_str()).collect();
    let first = &files[0];
    for (f, m) in files.iter().zip(&ev.models).skip(1) {
        if f.variables != first.variables {
            return Err(Error::Misaligned(format!("{} covers variables {:?}, expected {:?}", m.name, f.variables, first.variables)));
        }
        for v in &first.variables {
            let a: Vec<YearMonth> = first.rows[v].iter().map(|r| r.0).collect();
            let b: Vec<YearMonth> = f.rows[v].iter().map(|r| r.0).collect();
            if a != b {
                return Err(Error::Misaligned(format!("{} has different forecast dates for `{v}`", m.name)));
            }
        }
    }
    let settings = MetricSettings { mase_period: ev.mase_period, smape_mode: ev.smape_mode };
    let dates = panel.dates();
    let mut metrics = Table::new(&[
        "variable", "model", "horizon", "rmse", "smape", "mase", "theil_u1", "mdape", "smape_skipped", "mdape_skipped",
    ])
    .meta("mase_period", ev.mase_period)
    .meta("smape_mode", format!("{:?}", ev.smape_mode).to_lowercase());
    let mut murphy = Table::new(&["variable", "model_a", "model_b", "theta", "diff", "band_lo", "band_hi", "variance"])
        .meta("alpha", ev.murphy_alpha)
        .meta("conf", ev.murphy_conf);
    let mut curves: Vec<(String, MurphyCurve)> = Vec::new();
    let mut tests = Vec::new();
    let k = files.len();
    let mut rmse = Mat::zeros(first.variables.len(), k);

    for (vi, var) in first.variables.iter().enumerate() {
        let series = panel.column(var)?;
        let fdates: Vec<YearMonth> = first.rows[var].iter().map(|r| r.0).collect();
        let idx: Vec<usize> = fdates
            .iter()
            .map(|d| {
                dates.iter().position(|x| x == d).ok_or_else(|| {
                    Error::InsufficientData(format!("no observed `{var}` at forecast date {d}"))
                })
            })
            .collect::<Result<_>>()?;
        let actual: Vec<f64> = idx.iter().map(|&i| series[i]).collect();
        let insample = &series[..idx.iter().copied().min().unwrap_or(0)];
        let preds: Vec<Vec<f64>> = files.iter().map(|f| f.rows[var].iter().map(|r| r.1).collect()).collect();

        for (mi, pred) in preds.iter().enumerate() {
            let r = metric_row(var, names[mi], &actual, pred, insample, &settings)?;
            rmse[(vi, mi)] = r.rmse;
            metrics.push(vec![
                r.variable.into(),
                r.model.into(),
                r.horizon.into(),
                r.rmse.into(),
                r.smape.into(),
                r.mase.into(),
                r.theil_u1.into(),
                r.mdape.into(),
                r.smape_skipped.into(),
                r.mdape_skipped.into(),
            ]);
        }

        let losses = Mat::from_fn(actual.len(), k, |t, m| (preds[m][t] - actual[t]).powi(2));
        let dm = dm_multivariate(&losses, &ev.dm)?;
        let gw = gw_unconditional(&loss_differentials(&losses, ev.dm.pairing)?, ev.gw_bandwidth)?;
        tests.push(VariableTests { variable: var.clone(), periods: actual.len(), dm, gw });

        for a in 0..k {
            for b in a + 1..k {
                let thetas = theta_grid(&[&preds[a], &preds[b], &actual], ev.murphy_points)?;
                let c = murphy_diff(&preds[a], &preds[b], &actual, &thetas, ev.murphy_alpha, ev.murphy_conf)?;
                for i in 0..c.thetas.len() {
                    murphy.push(vec![
                        var.as_str().into(),
                        names[a].into(),
                        names[b].into(),
                        c.thetas[i].into(),
                        c.diff[i].into(),
                        c.band_lo[i].into(),
                        c.band_hi[i].into(),
                        c.variance[i].into(),
                    ]);
                }
                curves.push((format!("{var}: {} vs {}", names[a], names[b]), c));
            }
        }
    }

    let mcb_json = if first.variables.len() >= 2 {
        json!({ "score": "rmse", "datasets": first.variables, "result": mcb(&rmse, ev.mcb_alpha)? })
    } else {
        json!({ "score": "rmse", "skipped": "MCB needs at least two variables" })
    };
    let report = json!({
        "models": names,
        "loss": "squared_error",
        "dm_options": ev.dm,
        "variables": tests,
        "mcb": mcb_json,
    });

    let dir = out_dir(cfg)?;
    metrics.write(&dir.join("metrics.csv"))?;
    murphy.write(&dir.join("murphy.csv"))?;
    write_json(&dir.join("tests.json"), &report)?;
    let refs: Vec<(String, &MurphyCurve)> = curves.iter().map(|(n, c)| (n.clone(), c)).collect();
    fs::write(dir.join("murphy.svg"), svg::murphy_chart(&refs))?;
    Ok(())
}

/// Regime-dependent local projections; writes `irf.csv` and `irf.svg`.
pub fn cmd_irf(cfg: &RunConfig) -> Result<()> {
    let ic = cfg.irf.as_ref().ok_or_else(|| Error::Config("missing [irf] section".into()))?;
    let panel = cfg.panel()?;
    let mut lp = ic.lp;
    if let Some(pmax) = ic.bic_max_lag {
        lp.p = select_lags_bic(panel.endog(), pmax)?;
    }
    let s = fit_panel(&panel, &ic.switch, &ic.shocks, &lp)?;
    let c = &s.config;
    let mut t = Table::new(&["variable", "shock", "regime", "horizon", "point", "se", "lo", "hi"])
        .meta("gamma", c.gamma)
        .meta("p", c.p)
        .meta("exog_lags", c.exog_lags)
        .meta("horizon", c.horizon)
        .meta("trend", format!("{:?}", c.trend).to_lowercase())
        .meta("lag_switching", c.lag_switching)
        .meta("conf", c.conf)
        .meta("critical", s.critical)
        .meta("nw_lag", serde_json::to_string(&c.nw_lag)?)
        .meta("switch", &s.switch_name)
        .meta("switch_mean", s.switch_mean)
        .meta("switch_sd", s.switch_sd);
    for (m, shock) in s.shocks.iter().enumerate() {
        t = t
            .meta(&format!("high_share.{shock}"), s.high_share[m])
            .meta(&format!("collapsed.{shock}"), s.collapsed[m]);
    }
    for (i, var) in s.variables.iter().enumerate() {
        for (m, shock) in s.shocks.iter().enumerate() {
            for regime in [Regime::High, Regime::Low] {
                let prof = s.extract(i, m, regime)?;
                for h in 0..prof.point.len() {
                    t.push(vec![
                        var.as_str().into(),
                        shock.as_str().into(),
                        regime.name().into(),
                        h.into(),
                        prof.point[h].into(),
                        prof.se[h].into(),
                        prof.lo[h].into(),
                        prof.hi[h].into(),
                    ]);
                }
            }
        }
    }
    let dir = out_dir(cfg)?;
    t.write(&dir.join("irf.csv"))?;
    fs::write(dir.join("irf.svg"), svg::irf_grid(&s))?;
    Ok(())
}

/// Wavelet coherence with surrogate significance and FDR masks; writes
/// `coherence.csv` and `heatmap.svg`.
pub fn cmd_coherence(cfg: &RunConfig) -> Result<()> {
    let cc = cfg.coherence.as_ref().ok_or_else(|| Error::Config("missing [coherence] section".into()))?;
    let panel = cfg.panel()?;
    let (x, y) = (panel.column(&cc.x)?, panel.column(&cc.y)?);
    let opts = CoherenceOptions { dt: cc.dt, replications: cc.replications, alpha_fdr: cc.alpha_fdr, seed: cfg.seed };
    let map = coherence_test(&x, &y, &opts)?;
    let sig = map.significance.as_ref().expect("coherence_test attaches significance");
    let mut t = Table::new(&["scale", "period", "time", "r2", "phase", "p", "q", "significant", "in_coi"])
        .meta("x", &cc.x)
        .meta("y", &cc.y)
        .meta("dt", cc.dt)
        .meta("omega0", map.omega0)
        .meta("replications", sig.replications)
        .meta("seed", sig.seed)
        .meta("alpha_fdr", sig.alpha_fdr)
        .meta("start", panel.dates()[0]);
    for j in 0..map.n_scales() {
        for k in 0..map.n_times() {
            t.push(vec![
                map.scales[j].into(),
                map.periods[j].into(),
                map.times[k].into(),
                map.r2[(j, k)].into(),
                map.phase[(j, k)].into(),
                sig.pvals[(j, k)].into(),
                sig.qvals[(j, k)].into(),
                sig.mask[j][k].into(),
                map.inside_coi(j, k).into(),
            ]);
        }
    }
    let dir = out_dir(cfg)?;
    t.write(&dir.join("coherence.csv"))?;
    fs::write(dir.join("heatmap.svg"), svg::coherence_heatmap(&map, &cc.x, &cc.y))?;
    Ok(())
}
