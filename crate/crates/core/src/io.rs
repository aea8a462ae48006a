//! Longitudinal datasets and their CSV representation.
//!
//! Schemas: observations `subject_id,t,z`; covariates `subject_id,x1,...,xp`;
//! decompositions `subject_id,component,abscissa,value` with component one of
//! `size`, `rho`, `lambda`, `shape` (and `trajectory` for recomposed means).
//! Scalar components leave `abscissa` empty.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use crate::domain::{MonotoneDecomposition, PositiveDecomposition, SampledTrajectory, TimeGrid};
use crate::error::{Error, Result};
use crate::recovery::RawObservations;
use crate::regress::CovariateMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Subject {
    pub id: String,
    pub obs: RawObservations<f64>,
}

/// Subjects with unique ids, each with at least two time points, and
/// optional covariates whose rows follow the subject order.
#[derive(Debug, Clone, PartialEq)]
pub struct LongitudinalDataset {
    subjects: Vec<Subject>,
    covariates: Option<CovariateMatrix<f64>>,
}

impl LongitudinalDataset {
    pub fn new(subjects: Vec<Subject>) -> Result<Self> {
        if subjects.is_empty() {
            return Err(Error::EmptyInput("dataset has no subjects".into()));
        }
        let mut seen = HashSet::new();
        for s in &subjects {
            if !seen.insert(s.id.as_str()) {
                return Err(Error::InvalidConfig(format!("duplicate subject id `{}`", s.id)));
            }
            if s.obs.len() < 2 {
                return Err(Error::TooFewPoints(s.id.clone()));
            }
        }
        Ok(Self { subjects, covariates: None })
    }

    pub fn with_covariates(mut self, covariates: CovariateMatrix<f64>) -> Result<Self> {
        if covariates.nrows() != self.subjects.len() {
            return Err(Error::CovariateMismatch(format!(
                "{} covariate rows for {} subjects",
                covariates.nrows(),
                self.subjects.len()
            )));
        }
        self.covariates = Some(covariates);
        Ok(self)
    }

    /// Attaches covariate rows keyed by subject id.
    pub fn attach_covariates(self, table: &CovariateTable) -> Result<Self> {
        let index: HashMap<&str, usize> = table.ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        if index.len() != table.ids.len() {
            return Err(Error::CovariateMismatch("duplicate id in covariate file".into()));
        }
        let mut rows = Vec::with_capacity(self.subjects.len());
        for s in &self.subjects {
            let i = index
                .get(s.id.as_str())
                .ok_or_else(|| Error::CovariateMismatch(format!("no covariates for subject `{}`", s.id)))?;
            rows.push(table.rows[*i].clone());
        }
        if table.ids.len() != self.subjects.len() {
            let known: HashSet<&str> = self.subjects.iter().map(|s| s.id.as_str()).collect();
            let extra = table.ids.iter().find(|id| !known.contains(id.as_str())).cloned().unwrap_or_default();
            return Err(Error::CovariateMismatch(format!("covariates for unknown subject `{extra}`")));
        }
        self.with_covariates(CovariateMatrix::new(rows)?)
    }

    pub fn subjects(&self) -> &[Subject] {
        &self.subjects
    }

    pub fn covariates(&self) -> Option<&CovariateMatrix<f64>> {
        self.covariates.as_ref()
    }

    pub fn len(&self) -> usize {
        self.subjects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subjects.is_empty()
    }

    /// Smallest number of observations over subjects.
    pub fn min_obs(&self) -> usize {
        self.subjects.iter().map(|s| s.obs.len()).min().unwrap_or(0)
    }

    /// Largest time gap over subjects, end gaps included.
    pub fn max_spacing(&self) -> f64 {
        self.subjects.iter().map(|s| s.obs.times().max_spacing()).fold(0.0, f64::max)
    }

    /// Whether every subject is observed at the same time points.
    pub fn shares_grid(&self) -> bool {
        let first = self.subjects[0].obs.times().points();
        self.subjects.iter().all(|s| s.obs.times().points() == first)
    }
}

/// Covariate rows keyed by subject id, as read from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariateTable {
    pub names: Vec<String>,
    pub ids: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

fn column(headers: &csv::StringRecord, name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.trim() == name)
        .ok_or_else(|| Error::MissingColumn(name.to_string()))
}

fn parse_cell(record: &csv::StringRecord, idx: usize, name: &str) -> Result<f64> {
    let raw = record.get(idx).unwrap_or("").trim();
    match raw.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::NonNumeric {
            column: name.to_string(),
            value: raw.to_string(),
            line: record.position().map_or(0, |p| p.line()),
        }),
    }
}

/// Reads `subject_id,t,z` rows. With `time_range = Some((a, b))` times are
/// mapped affinely from `[a, b]` onto `[0, 1]`; otherwise they must already
/// lie in `[0, 1]`. Subjects are ordered by id, observations by time, and
/// repeated `(subject, t)` rows are averaged.
pub fn read_longitudinal_csv<R: Read>(reader: R, time_range: Option<(f64, f64)>) -> Result<LongitudinalDataset> {
    let (a, b) = time_range.unwrap_or((0.0, 1.0));
    if !(b > a) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidConfig(format!("time range [{a}, {b}] is empty")));
    }
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let (ci, ct, cz) = (column(&headers, "subject_id")?, column(&headers, "t")?, column(&headers, "z")?);
    let mut groups: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let id = rec.get(ci).unwrap_or("").trim().to_string();
        let t = parse_cell(&rec, ct, "t")?;
        let z = parse_cell(&rec, cz, "z")?;
        groups.entry(id).or_default().push(((t - a) / (b - a), z));
    }
    let mut subjects = Vec::with_capacity(groups.len());
    for (id, mut rows) in groups {
        rows.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut times: Vec<f64> = Vec::with_capacity(rows.len());
        let mut sums: Vec<(f64, usize)> = Vec::with_capacity(rows.len());
        for (t, z) in rows {
            if times.last() == Some(&t) {
                let last = sums.last_mut().expect("nonempty");
                last.0 += z;
                last.1 += 1;
            } else {
                times.push(t);
                sums.push((z, 1));
            }
        }
        if times.len() < 2 {
            return Err(Error::TooFewPoints(id));
        }
        let grid = TimeGrid::new(times)
            .map_err(|e| Error::InvalidGrid(format!("subject `{id}`: {e}")))?;
        let values = sums.into_iter().map(|(s, c)| s / c as f64).collect();
        subjects.push(Subject { id, obs: RawObservations::new(grid, values)? });
    }
    LongitudinalDataset::new(subjects)
}

pub fn load_longitudinal_csv(path: impl AsRef<Path>, time_range: Option<(f64, f64)>) -> Result<LongitudinalDataset> {
    read_longitudinal_csv(std::fs::File::open(path)?, time_range)
}

/// Reads `subject_id,x1,...,xp`; every column after `subject_id` is a
/// numeric predictor.
pub fn read_covariates_csv<R: Read>(reader: R) -> Result<CovariateTable> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let ci = column(&headers, "subject_id")?;
    let cols: Vec<(usize, String)> = headers
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != ci)
        .map(|(i, h)| (i, h.trim().to_string()))
        .collect();
    if cols.is_empty() {
        return Err(Error::MissingColumn("x1".into()));
    }
    let mut table = CovariateTable { names: cols.iter().map(|c| c.1.clone()).collect(), ids: Vec::new(), rows: Vec::new() };
    for rec in rdr.records() {
        let rec = rec?;
        table.ids.push(rec.get(ci).unwrap_or("").trim().to_string());
        table.rows.push(cols.iter().map(|(i, name)| parse_cell(&rec, *i, name)).collect::<Result<_>>()?);
    }
    Ok(table)
}

pub fn load_covariates_csv(path: impl AsRef<Path>) -> Result<CovariateTable> {
    read_covariates_csv(std::fs::File::open(path)?)
}

/// Writes `subject_id,t,z`, mapping times back onto `time_range` if given.
pub fn write_longitudinal_csv<W: Write>(
    writer: W,
    ds: &LongitudinalDataset,
    time_range: Option<(f64, f64)>,
) -> Result<()> {
    let (a, b) = time_range.unwrap_or((0.0, 1.0));
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["subject_id", "t", "z"])?;
    for s in ds.subjects() {
        for (&t, &z) in s.obs.times().points().iter().zip(s.obs.values()) {
            w.write_record([s.id.clone(), (a + t * (b - a)).to_string(), z.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn save_longitudinal_csv(path: impl AsRef<Path>, ds: &LongitudinalDataset, time_range: Option<(f64, f64)>) -> Result<()> {
    write_longitudinal_csv(std::fs::File::create(path)?, ds, time_range)
}

/// Writes `subject_id,x1,...,xp` for a dataset carrying covariates.
pub fn write_covariates_csv<W: Write>(writer: W, ds: &LongitudinalDataset) -> Result<()> {
    let cov = ds.covariates().ok_or_else(|| Error::CovariateMismatch("dataset has no covariates".into()))?;
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["subject_id".to_string()];
    header.extend((1..=cov.ncols()).map(|j| format!("x{j}")));
    w.write_record(&header)?;
    for (i, s) in ds.subjects().iter().enumerate() {
        let mut rec = vec![s.id.clone()];
        rec.extend(cov.row(i).iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Row writer for the decomposition schema.
pub struct ComponentWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> ComponentWriter<W> {
    pub fn new(writer: W, key: &str) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(writer);
        inner.write_record([key, "component", "abscissa", "value"])?;
        Ok(Self { inner })
    }

    pub fn scalar(&mut self, id: &str, component: &str, value: f64) -> Result<()> {
        self.inner.write_record([id, component, "", &value.to_string()])?;
        Ok(())
    }

    pub fn curve(&mut self, id: &str, component: &str, abscissae: &[f64], values: &[f64]) -> Result<()> {
        for (x, v) in abscissae.iter().zip(values) {
            self.inner.write_record([id, component, &x.to_string(), &v.to_string()])?;
        }
        Ok(())
    }

    pub fn positive(&mut self, id: &str, d: &PositiveDecomposition<f64>) -> Result<()> {
        self.scalar(id, "size", d.size())?;
        self.curve(id, "shape", &d.shape().abscissae(), d.shape().values())
    }

    pub fn monotone(&mut self, id: &str, d: &MonotoneDecomposition<f64>) -> Result<()> {
        self.scalar(id, "rho", d.range())?;
        self.scalar(id, "lambda", d.minimum())?;
        self.curve(id, "shape", &d.shape().abscissae(), d.shape().values())
    }

    pub fn trajectory(&mut self, id: &str, y: &SampledTrajectory<f64>) -> Result<()> {
        self.curve(id, "trajectory", y.grid().points(), y.values())
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}
