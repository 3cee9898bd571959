//! Monthly multivariate panels: CSV ingestion, column transforms, train/test
//! splits and the pinned future exogenous path.
//!
//! Input CSVs are "wide": the first column holds an ISO month (`YYYY-MM`, a
//! trailing `-DD` is accepted and ignored), every other column is numeric.
//! Which columns are endogenous and which exogenous is declared by a
//! [`Schema`], never inferred.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat;

/// Calendar month.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct YearMonth {
    pub year: i32,
    pub month: u32,
}

impl YearMonth {
    pub fn new(year: i32, month: u32) -> Result<Self> {
        if !(1..=12).contains(&month) {
            return Err(Error::BadDate {
                value: format!("{year}-{month}"),
                source_name: "constructor".into(),
            });
        }
        Ok(YearMonth { year, month })
    }

    fn ordinal(self) -> i64 {
        self.year as i64 * 12 + (self.month as i64 - 1)
    }

    fn from_ordinal(o: i64) -> Self {
        YearMonth {
            year: o.div_euclid(12) as i32,
            month: (o.rem_euclid(12) + 1) as u32,
        }
    }

    pub fn succ(self) -> Self {
        Self::from_ordinal(self.ordinal() + 1)
    }

    pub fn add_months(self, n: i64) -> Self {
        Self::from_ordinal(self.ordinal() + n)
    }

    pub fn months_until(self, later: YearMonth) -> i64 {
        later.ordinal() - self.ordinal()
    }
}

impl fmt::Display for YearMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:04}-{:02}", self.year, self.month)
    }
}

impl FromStr for YearMonth {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        let s = s.trim();
        let mut parts = s.split('-');
        let year: i32 = parts.next().ok_or(())?.parse().map_err(|_| ())?;
        let month_str = parts.next().ok_or(())?;
        if month_str.len() != 2 {
            return Err(());
        }
        let month: u32 = month_str.parse().map_err(|_| ())?;
        if let Some(day) = parts.next() {
            let d: u32 = day.parse().map_err(|_| ())?;
            if !(1..=31).contains(&d) {
                return Err(());
            }
        }
        if parts.next().is_some() || !(1..=12).contains(&month) {
            return Err(());
        }
        Ok(YearMonth { year, month })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Endogenous,
    Exogenous,
}

/// Column-role map for ingestion. Column order in the panel follows the
/// order given here.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub endogenous: Vec<String>,
    #[serde(default)]
    pub exogenous: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransformOp {
    Log,
    Log10,
    Standardize,
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformRecord {
    pub column: String,
    pub op: TransformOp,
}

/// Immutable, gap-free monthly panel.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    dates: Vec<YearMonth>,
    endog: Mat,
    exog: Mat,
    endog_names: Vec<String>,
    exog_names: Vec<String>,
    provenance: Vec<TransformRecord>,
}

impl Panel {
    pub fn new(
        dates: Vec<YearMonth>,
        endog: Mat,
        exog: Mat,
        endog_names: Vec<String>,
        exog_names: Vec<String>,
    ) -> Result<Self> {
        let t = dates.len();
        if t == 0 {
            return Err(Error::EmptyPanel);
        }
        if endog.ncols() == 0 {
            return Err(Error::InvalidArgument("panel needs at least one endogenous column".into()));
        }
        if endog.nrows() != t || exog.nrows() != t {
            return Err(Error::Dimension(format!(
                "{} dates but endogenous block has {} rows and exogenous block {} rows",
                t,
                endog.nrows(),
                exog.nrows()
            )));
        }
        if endog_names.len() != endog.ncols() || exog_names.len() != exog.ncols() {
            return Err(Error::Dimension("column names do not match block widths".into()));
        }
        let mut seen = HashSet::new();
        for n in endog_names.iter().chain(exog_names.iter()) {
            if !seen.insert(n.as_str()) {
                return Err(Error::DuplicateColumn(n.clone()));
            }
        }
        for w in dates.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateDate { date: w[0].to_string(), source_name: "panel".into() });
            }
            if w[0].succ() != w[1] {
                return Err(Error::Gap { after: w[0].to_string(), before: w[1].to_string() });
            }
        }
        for (block, names) in [(&endog, &endog_names), (&exog, &exog_names)] {
            for j in 0..block.ncols() {
                for i in 0..t {
                    if !block[(i, j)].is_finite() {
                        return Err(Error::MissingValue {
                            column: names[j].clone(),
                            date: dates[i].to_string(),
                        });
                    }
                }
            }
        }
        Ok(Panel {
            dates,
            endog,
            exog,
            endog_names,
            exog_names,
            provenance: Vec::new(),
        })
    }

    /// Panel over consecutive months starting at `start`.
    pub fn from_start(
        start: YearMonth,
        endog: Mat,
        exog: Mat,
        endog_names: Vec<String>,
        exog_names: Vec<String>,
    ) -> Result<Self> {
        let dates = (0..endog.nrows() as i64).map(|i| start.add_months(i)).collect();
        Panel::new(dates, endog, exog, endog_names, exog_names)
    }

    /// Convenience constructor with generated names `y1..ym`, `x1..xk`.
    pub fn from_blocks(endog: Mat, exog: Mat) -> Result<Self> {
        let en = (1..=endog.ncols()).map(|i| format!("y{i}")).collect();
        let xn = (1..=exog.ncols()).map(|i| format!("x{i}")).collect();
        Panel::from_start(YearMonth { year: 2000, month: 1 }, endog, exog, en, xn)
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn m(&self) -> usize {
        self.endog.ncols()
    }

    pub fn k(&self) -> usize {
        self.exog.ncols()
    }

    pub fn dates(&self) -> &[YearMonth] {
        &self.dates
    }

    pub fn endog(&self) -> &Mat {
        &self.endog
    }

    pub fn exog(&self) -> &Mat {
        &self.exog
    }

    pub fn endog_names(&self) -> &[String] {
        &self.endog_names
    }

    pub fn exog_names(&self) -> &[String] {
        &self.exog_names
    }

    pub fn provenance(&self) -> &[TransformRecord] {
        &self.provenance
    }

    pub fn roles(&self) -> Vec<(String, Role)> {
        self.endog_names
            .iter()
            .map(|n| (n.clone(), Role::Endogenous))
            .chain(self.exog_names.iter().map(|n| (n.clone(), Role::Exogenous)))
            .collect()
    }

    /// Locate a column by name in either block.
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        if let Some(j) = self.endog_names.iter().position(|n| n == name) {
            return Ok(self.endog.column(j).iter().copied().collect());
        }
        if let Some(j) = self.exog_names.iter().position(|n| n == name) {
            return Ok(self.exog.column(j).iter().copied().collect());
        }
        Err(Error::MissingColumn(name.to_string()))
    }

    /// Rows `start..end` (0-based, end exclusive) as a new panel.
    pub fn rows(&self, start: usize, end: usize) -> Result<Panel> {
        if start >= end || end > self.len() {
            return Err(Error::InvalidArgument(format!(
                "row range {start}..{end} invalid for panel of length {}",
                self.len()
            )));
        }
        let n = end - start;
        Ok(Panel {
            dates: self.dates[start..end].to_vec(),
            endog: self.endog.rows(start, n).into_owned(),
            exog: self.exog.rows(start, n).into_owned(),
            endog_names: self.endog_names.clone(),
            exog_names: self.exog_names.clone(),
            provenance: self.provenance.clone(),
        })
    }

    /// Copy with a different endogenous block (same shape).
    pub fn with_endog(&self, endog: Mat) -> Result<Panel> {
        if endog.shape() != self.endog.shape() {
            return Err(Error::Dimension("replacement endogenous block has the wrong shape".into()));
        }
        let mut p = Panel::new(
            self.dates.clone(),
            endog,
            self.exog.clone(),
            self.endog_names.clone(),
            self.exog_names.clone(),
        )?;
        p.provenance = self.provenance.clone();
        Ok(p)
    }

    /// Canonical CSV: `date` column then endogenous then exogenous columns,
    /// values rendered with 17 significant digits.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("date");
        for n in self.endog_names.iter().chain(self.exog_names.iter()) {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for i in 0..self.len() {
            out.push_str(&self.dates[i].to_string());
            for j in 0..self.m() {
                out.push(',');
                out.push_str(&crate::io::fmt_f64(self.endog[(i, j)]));
            }
            for j in 0..self.k() {
                out.push(',');
                out.push_str(&crate::io::fmt_f64(self.exog[(i, j)]));
            }
            out.push('\n');
        }
        out
    }

    pub fn schema(&self) -> Schema {
        Schema {
            endogenous: self.endog_names.clone(),
            exogenous: self.exog_names.clone(),
        }
    }
}

/// Parsed single CSV source: dates and named columns.
struct Source {
    name: String,
    dates: Vec<YearMonth>,
    columns: BTreeMap<String, Vec<Option<f64>>>,
    index: HashMap<YearMonth, usize>,
}

fn read_source<R: std::io::Read>(reader: R, source_name: &str, wanted: &HashSet<&str>) -> Result<Source> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() {
        return Err(Error::EmptyPanel);
    }
    let col_names: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    let mut columns: BTreeMap<String, Vec<Option<f64>>> = BTreeMap::new();
    for n in &col_names {
        if wanted.contains(n.as_str()) {
            if columns.contains_key(n) {
                return Err(Error::DuplicateColumn(n.clone()));
            }
            columns.insert(n.clone(), Vec::new());
        }
    }
    let mut dates = Vec::new();
    let mut index = HashMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let raw = rec.get(0).unwrap_or("");
        let date: YearMonth = raw.parse().map_err(|_| Error::BadDate {
            value: raw.to_string(),
            source_name: source_name.to_string(),
        })?;
        if index.insert(date, dates.len()).is_some() {
            return Err(Error::DuplicateDate { date: date.to_string(), source_name: source_name.to_string() });
        }
        dates.push(date);
        for (j, n) in col_names.iter().enumerate() {
            if let Some(col) = columns.get_mut(n) {
                let cell = rec.get(j + 1).unwrap_or("").trim();
                let v = if cell.is_empty() || cell.eq_ignore_ascii_case("na") || cell.eq_ignore_ascii_case("nan") {
                    None
                } else {
                    let v: f64 = cell.parse().map_err(|_| Error::BadValue {
                        value: cell.to_string(),
                        column: n.clone(),
                        date: date.to_string(),
                    })?;
                    if v.is_finite() { Some(v) } else { None }
                };
                col.push(v);
            }
        }
    }
    Ok(Source { name: source_name.to_string(), dates, columns, index })
}

/// Load and align one or more wide CSV files over their common dates.
pub fn load_panel<P: AsRef<Path>>(paths: &[P], schema: &Schema) -> Result<Panel> {
    let mut sources = Vec::new();
    let wanted: HashSet<&str> = schema
        .endogenous
        .iter()
        .chain(schema.exogenous.iter())
        .map(String::as_str)
        .collect();
    for p in paths {
        let p = p.as_ref();
        let f = std::fs::File::open(p)?;
        sources.push(read_source(f, &p.display().to_string(), &wanted)?);
    }
    assemble(sources, schema)
}

/// Same as [`load_panel`] for in-memory CSV text; used by tests and the FFI.
pub fn load_panel_from_strs(texts: &[&str], schema: &Schema) -> Result<Panel> {
    let wanted: HashSet<&str> = schema
        .endogenous
        .iter()
        .chain(schema.exogenous.iter())
        .map(String::as_str)
        .collect();
    let mut sources = Vec::new();
    for (i, t) in texts.iter().enumerate() {
        sources.push(read_source(t.as_bytes(), &format!("<input {i}>"), &wanted)?);
    }
    assemble(sources, schema)
}

fn assemble(sources: Vec<Source>, schema: &Schema) -> Result<Panel> {
    if schema.endogenous.is_empty() {
        return Err(Error::Config("schema declares no endogenous column".into()));
    }
    // Which source supplies each column.
    let mut owner: HashMap<&str, usize> = HashMap::new();
    for name in schema.endogenous.iter().chain(schema.exogenous.iter()) {
        if owner.contains_key(name.as_str()) {
            return Err(Error::DuplicateColumn(name.clone()));
        }
        let src = sources
            .iter()
            .position(|s| s.columns.contains_key(name))
            .ok_or_else(|| Error::MissingColumn(name.clone()))?;
        owner.insert(name.as_str(), src);
    }
    let used: Vec<usize> = {
        let mut u: Vec<usize> = owner.values().copied().collect();
        u.sort_unstable();
        u.dedup();
        u
    };
    let mut dates: Vec<YearMonth> = sources[used[0]].dates.clone();
    dates.sort();
    for &s in &used[1..] {
        dates.retain(|d| sources[s].index.contains_key(d));
    }
    if dates.is_empty() {
        return Err(Error::EmptyPanel);
    }
    for w in dates.windows(2) {
        if w[0].succ() != w[1] {
            return Err(Error::Gap { after: w[0].to_string(), before: w[1].to_string() });
        }
    }
    let fill = |names: &[String]| -> Result<Mat> {
        let mut m = Mat::zeros(dates.len(), names.len());
        for (j, n) in names.iter().enumerate() {
            let src = &sources[owner[n.as_str()]];
            let col = &src.columns[n];
            for (i, d) in dates.iter().enumerate() {
                let row = src.index[d];
                m[(i, j)] = col[row].ok_or_else(|| Error::MissingValue {
                    column: format!("{n} ({})", src.name),
                    date: d.to_string(),
                })?;
            }
        }
        Ok(m)
    };
    let endog = fill(&schema.endogenous)?;
    let exog = fill(&schema.exogenous)?;
    Panel::new(dates, endog, exog, schema.endogenous.clone(), schema.exogenous.clone())
}

/// Apply a column transform, returning a new panel with the transform recorded.
pub fn transform(panel: &Panel, column: &str, op: TransformOp) -> Result<Panel> {
    let mut out = panel.clone();
    if op == TransformOp::None {
        if panel.column(column).is_err() {
            return Err(Error::MissingColumn(column.to_string()));
        }
        return Ok(out);
    }
    let (block, j) = if let Some(j) = panel.endog_names.iter().position(|n| n == column) {
        (&mut out.endog, j)
    } else if let Some(j) = panel.exog_names.iter().position(|n| n == column) {
        (&mut out.exog, j)
    } else {
        return Err(Error::MissingColumn(column.to_string()));
    };
    let n = block.nrows();
    match op {
        TransformOp::Log | TransformOp::Log10 => {
            for i in 0..n {
                let v = block[(i, j)];
                if v <= 0.0 {
                    return Err(Error::NonPositive {
                        column: column.to_string(),
                        value: v,
                        date: panel.dates[i].to_string(),
                    });
                }
                block[(i, j)] = if op == TransformOp::Log { v.ln() } else { v.log10() };
            }
        }
        TransformOp::Standardize => {
            if n < 2 {
                return Err(Error::InsufficientData("standardize needs at least two rows".into()));
            }
            let mean = block.column(j).sum() / n as f64;
            let var = block.column(j).iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
            if var <= 0.0 {
                return Err(Error::ConstantSeries(column.to_string()));
            }
            let sd = var.sqrt();
            for i in 0..n {
                block[(i, j)] = (block[(i, j)] - mean) / sd;
            }
        }
        TransformOp::None => unreachable!(),
    }
    out.provenance.push(TransformRecord { column: column.to_string(), op });
    Ok(out)
}

/// Train/test split: train is rows `1..=train_end`, test the next `horizon` rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_end: usize,
    pub horizon: usize,
}

pub fn split(panel: &Panel, spec: SplitSpec) -> Result<(Panel, Panel)> {
    if spec.horizon == 0 {
        return Err(Error::InvalidArgument("forecast horizon must be positive".into()));
    }
    if spec.train_end == 0 {
        return Err(Error::InvalidArgument("training window is empty".into()));
    }
    if spec.train_end + spec.horizon > panel.len() {
        return Err(Error::InsufficientData(format!(
            "train_end {} + horizon {} exceeds panel length {}",
            spec.train_end,
            spec.horizon,
            panel.len()
        )));
    }
    let train = panel.rows(0, spec.train_end)?;
    let test = panel.rows(spec.train_end, spec.train_end + spec.horizon)?;
    Ok((train, test))
}

/// Exogenous values assumed over the forecast horizon (H×k).
#[derive(Debug, Clone, PartialEq)]
pub struct ExogPath {
    values: Mat,
}

impl ExogPath {
    pub fn new(values: Mat) -> Self {
        ExogPath { values }
    }

    /// Path for a model without exogenous regressors.
    pub fn empty(horizon: usize) -> Self {
        ExogPath { values: Mat::zeros(horizon, 0) }
    }

    pub fn horizon(&self) -> usize {
        self.values.nrows()
    }

    pub fn values(&self) -> &Mat {
        &self.values
    }
}

/// The last `h` training rows of the exogenous block, reused as the
/// exogenous path for horizons `1..=h`.
pub fn future_exog(train: &Panel, h: usize) -> Result<ExogPath> {
    if train.k() == 0 {
        return Err(Error::InvalidArgument("panel has no exogenous columns".into()));
    }
    pinned_exog(train, h)
}

/// Like [`future_exog`] but returns an empty path when the panel has no
/// exogenous block.
pub fn pinned_exog(train: &Panel, h: usize) -> Result<ExogPath> {
    if h == 0 {
        return Err(Error::InvalidArgument("horizon must be positive".into()));
    }
    if h > train.len() {
        return Err(Error::InsufficientData(format!(
            "horizon {h} exceeds training length {}",
            train.len()
        )));
    }
    let t = train.len();
    Ok(ExogPath { values: train.exog.rows(t - h, h).into_owned() })
}
