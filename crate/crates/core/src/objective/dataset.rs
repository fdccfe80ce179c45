use std::io::{Read, Write};
use std::path::Path;

use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::encoding::RowBatch;
use crate::error::{Error, Result};

/// Input rows plus regression target.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    /// Row-major `rows × num_vars` inputs.
    data: Vec<f64>,
    target: Vec<f64>,
    variable_names: Vec<String>,
}

impl Dataset {
    pub fn new(data: Vec<f64>, target: Vec<f64>, variable_names: Vec<String>) -> Result<Self> {
        let n = variable_names.len();
        if n == 0 {
            return Err(Error::Data("dataset needs at least one input column".into()));
        }
        if data.len() != target.len() * n {
            return Err(Error::Data(format!(
                "{} input values do not make {} rows of {} columns",
                data.len(),
                target.len(),
                n
            )));
        }
        if target.len() < 2 {
            return Err(Error::Data(format!("dataset needs at least 2 rows, got {}", target.len())));
        }
        if !data.iter().chain(&target).all(|v| v.is_finite()) {
            return Err(Error::Data("dataset contains non-finite values".into()));
        }
        Ok(Self { data, target, variable_names })
    }

    /// Builds a dataset with inputs named `x1..xn`.
    pub fn from_rows(rows: &[Vec<f64>], target: Vec<f64>) -> Result<Self> {
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Data("rows have different lengths".into()));
        }
        Self::new(rows.concat(), target, default_names(n))
    }

    pub fn rows(&self) -> usize {
        self.target.len()
    }

    pub fn num_vars(&self) -> usize {
        self.variable_names.len()
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let n = self.num_vars();
        &self.data[r * n..(r + 1) * n]
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn variable_names(&self) -> &[String] {
        &self.variable_names
    }

    pub fn batch(&self) -> RowBatch<'_> {
        RowBatch::new(&self.data, self.num_vars()).expect("validated on construction")
    }

    /// Reads a CSV whose last column is the target and whose other columns are inputs.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() < 2 {
            return Err(Error::Data("CSV needs at least one input column and a target column".into()));
        }
        let n = headers.len() - 1;
        let names = headers.iter().take(n).map(str::to_owned).collect();
        let mut data = Vec::new();
        let mut target = Vec::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record?;
            for (j, field) in record.iter().enumerate() {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|_| Error::Data(format!("row {}, column {}: `{field}` is not a number", i + 1, j + 1)))?;
                if j < n {
                    data.push(v);
                } else {
                    target.push(v);
                }
            }
        }
        Self::new(data, target, names)
    }

    pub fn read_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    /// Writes `x1,…,xn,y` followed by one line per row, numbers in shortest
    /// round-trip form.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.variable_names.iter().map(String::as_str).collect();
        header.push("y");
        wtr.write_record(&header)?;
        for r in 0..self.rows() {
            let fields = self.row(r).iter().chain(std::iter::once(&self.target[r])).map(|v| v.to_string());
            wtr.write_record(fields)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

pub(crate) fn default_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

/// `x1·x2 + x3·x4 + x5·x6 + x1·x7·x9 + x3·x6·x10` on a ten-variable row.
pub fn poly10(x: &[f64]) -> f64 {
    x[0] * x[1] + x[2] * x[3] + x[4] * x[5] + x[0] * x[6] * x[8] + x[2] * x[5] * x[9]
}

/// Samples `m` Poly-10 rows with inputs i.i.d. uniform in `[lo, hi]`.
pub fn gen_poly10(m: usize, seed: u64, range: (f64, f64)) -> Result<Dataset> {
    gen_uniform(m, 10, seed, range, poly10)
}

/// Samples `m` rows of `n` inputs i.i.d. uniform in `[lo, hi]` and labels them with `f`.
pub fn gen_uniform(m: usize, n: usize, seed: u64, range: (f64, f64), f: impl Fn(&[f64]) -> f64) -> Result<Dataset> {
    let (lo, hi) = range;
    if m < 2 {
        return Err(Error::Config(format!("a dataset needs at least 2 rows, got {m}")));
    }
    if n < 1 {
        return Err(Error::Config("a dataset needs at least one input".into()));
    }
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Config(format!("invalid sampling range [{lo}, {hi}]")));
    }
    let dist = Uniform::new_inclusive(lo, hi).map_err(|e| Error::Config(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data: Vec<f64> = (0..m * n).map(|_| dist.sample(&mut rng)).collect();
    let target = data.chunks_exact(n).map(f).collect();
    Dataset::new(data, target, default_names(n))
}
