use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{csv_err, invalid, Error, Result};
use crate::points::PointSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Label {
    Normal,
    Outlier,
}

impl Label {
    fn parse(token: &str) -> Option<Label> {
        match token.trim().to_ascii_lowercase().as_str() {
            "normal" | "0" => Some(Label::Normal),
            "outlier" | "1" => Some(Label::Outlier),
            _ => None,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Label::Normal => "normal",
            Label::Outlier => "outlier",
        }
    }
}

/// Rectangular table of finite points, optionally labeled.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: PointSet,
    labels: Option<Vec<Label>>,
}

impl Dataset {
    pub fn new(points: PointSet, labels: Option<Vec<Label>>) -> Result<Self> {
        if points.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(invalid("dataset values must be finite"));
        }
        if let Some(l) = &labels {
            if l.len() != points.len() {
                return Err(Error::DimensionMismatch { expected: points.len(), found: l.len() });
            }
        }
        Ok(Dataset { points, labels })
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn labels(&self) -> Option<&[Label]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.dim()
    }

    pub fn select(&self, indices: &[usize]) -> Dataset {
        Dataset {
            points: self.points.select(indices),
            labels: self.labels.as_ref().map(|l| indices.iter().map(|&i| l[i]).collect()),
        }
    }

    /// Indices of the rows with the given label.
    pub fn indices_of(&self, label: Label) -> Result<Vec<usize>> {
        let labels = self.labels.as_ref().ok_or(Error::MissingLabels)?;
        Ok(labels.iter().enumerate().filter(|(_, l)| **l == label).map(|(i, _)| i).collect())
    }

    /// Writes a header `x0, …` (plus `label` when labeled) and one row per
    /// point. Values use the shortest representation that parses back exactly.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (0..self.dim()).map(|k| format!("x{k}")).collect();
        if self.labels.is_some() {
            header.push("label".into());
        }
        w.write_record(&header).map_err(csv_err)?;
        for (i, x) in self.points.iter().enumerate() {
            let mut row: Vec<String> = x.iter().map(|v| v.to_string()).collect();
            if let Some(l) = &self.labels {
                row.push(l[i].as_str().into());
            }
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))
    }
}

/// Reads a comma-separated numeric table, one point per row.
pub fn ingest_csv(path: impl AsRef<Path>, has_header: bool) -> Result<Dataset> {
    read_table(path.as_ref(), has_header, false)
}

/// As [`ingest_csv`], with the last column holding `normal`/`outlier`
/// (or `0`/`1`) labels.
pub fn ingest_labeled_csv(path: impl AsRef<Path>, has_header: bool) -> Result<Dataset> {
    read_table(path.as_ref(), has_header, true)
}

fn read_table(path: &Path, has_header: bool, labeled: bool) -> Result<Dataset> {
    let file = std::fs::File::open(path)?;
    let mut reader = csv::ReaderBuilder::new().has_headers(false).flexible(true).trim(csv::Trim::All).from_reader(file);
    let parse_err = |line: u64, column: Option<usize>, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        column,
        message,
    };
    let mut width: Option<usize> = None;
    let mut coords = Vec::new();
    let mut labels = Vec::new();
    let mut rows = 0usize;
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(k as u64 + 1);
            parse_err(line, None, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(k as u64 + 1);
        if k == 0 && has_header {
            continue;
        }
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let w = *width.get_or_insert(record.len());
        if record.len() != w {
            return Err(parse_err(line, None, format!("expected {w} fields, found {}", record.len())));
        }
        let numeric = if labeled { w - 1 } else { w };
        if numeric == 0 {
            return Err(parse_err(line, None, "no numeric columns".into()));
        }
        for (c, field) in record.iter().take(numeric).enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| parse_err(line, Some(c + 1), format!("cannot parse {field:?} as a number")))?;
            if !v.is_finite() {
                return Err(parse_err(line, Some(c + 1), format!("non-finite value {field:?}")));
            }
            coords.push(v);
        }
        if labeled {
            let token = &record[w - 1];
            labels.push(
                Label::parse(token)
                    .ok_or_else(|| parse_err(line, Some(w), format!("unknown label {token:?}; use normal/outlier")))?,
            );
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(parse_err(if has_header { 2 } else { 1 }, None, "no data rows".into()));
    }
    let dim = coords.len() / rows;
    Dataset::new(PointSet::new(dim, coords)?, labeled.then_some(labels))
}

/// Normals uniform in the unit disk, outliers uniform in the ring
/// `3 ≤ ‖x‖ ≤ 4`.
pub fn separable_benchmark(n_normal: usize, n_outlier: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coords = Vec::with_capacity(2 * (n_normal + n_outlier));
    let mut labels = Vec::with_capacity(n_normal + n_outlier);
    let polar = |rng: &mut ChaCha8Rng, rho: f64| {
        let t = rng.random_range(0.0..std::f64::consts::TAU);
        [rho * t.cos(), rho * t.sin()]
    };
    for _ in 0..n_normal {
        let rho = rng.random::<f64>().sqrt();
        coords.extend(polar(&mut rng, rho));
        labels.push(Label::Normal);
    }
    for _ in 0..n_outlier {
        let rho = (9.0 + 7.0 * rng.random::<f64>()).sqrt();
        coords.extend(polar(&mut rng, rho));
        labels.push(Label::Outlier);
    }
    Dataset::new(PointSet::new(2, coords).expect("even length"), Some(labels)).expect("finite")
}

/// Synthetic stand-in for the 6-descriptor thyroid benchmark: 3772 rows,
/// 93 of them outliers.
///
/// Normals are correlated log-normal descriptors. Outliers have a suppressed
/// first descriptor and raised third and fourth ones, the signature of the
/// hyperfunctioning class, with the remaining columns drawn like the normals.
pub fn thyroid_surrogate(seed: u64) -> Dataset {
    const N: usize = 3772;
    const OUTLIERS: usize = 93;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mix = [
        [1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [0.3, 0.9, 0.0, 0.0, 0.0, 0.0],
        [-0.2, 0.3, 0.9, 0.0, 0.0, 0.0],
        [-0.2, 0.2, 0.6, 0.7, 0.0, 0.0],
        [0.0, 0.1, 0.2, 0.1, 0.9, 0.0],
        [-0.1, 0.2, 0.5, 0.5, -0.4, 0.5],
    ];
    let centre = [0.5, 0.0, 0.6, 0.3, 0.0, 0.2];
    let scale = 0.35;
    let shift = [-2.5, 0.0, 1.1, 1.0, 0.0, 0.0];
    let mut order: Vec<bool> = (0..N).map(|i| i < OUTLIERS).collect();
    order.shuffle(&mut rng);
    let mut coords = Vec::with_capacity(6 * N);
    let mut labels = Vec::with_capacity(N);
    for outlier in order {
        let z: [f64; 6] = std::array::from_fn(|_| rng.sample(StandardNormal));
        for k in 0..6 {
            let mut g = centre[k] + scale * (0..6).map(|j| mix[k][j] * z[j]).sum::<f64>();
            if outlier {
                g += shift[k];
            }
            coords.push(g.exp());
        }
        labels.push(if outlier { Label::Outlier } else { Label::Normal });
    }
    Dataset::new(PointSet::new(6, coords).expect("six columns"), Some(labels)).expect("finite")
}
