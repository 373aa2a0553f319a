use std::io::Write;

use serde::{Deserialize, Serialize};

use super::extract::{FeatureSchema, FeatureVector, RawValue};
use super::tagset::OTHER;
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tone::ToneContext;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ColumnKind {
    Categorical(Vec<String>),
    Boolean,
    Numeric,
}

impl ColumnKind {
    fn width(&self) -> usize {
        match self {
            ColumnKind::Categorical(levels) => levels.len(),
            _ => 1,
        }
    }
}

/// Design matrix with named columns; each column remembers its raw parent feature.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix<T> {
    pub columns: Vec<String>,
    pub parents: Vec<String>,
    data: Vec<T>,
}

impl<T: Scalar> FeatureMatrix<T> {
    pub fn new(columns: Vec<String>, parents: Vec<String>, data: Vec<T>) -> Result<Self> {
        if columns.len() != parents.len() {
            return Err(Error::InvalidInput("column and parent lists differ in length".into()));
        }
        if !columns.is_empty() && data.len() % columns.len() != 0 {
            return Err(Error::InvalidInput("data length is not a multiple of the column count".into()));
        }
        if columns.is_empty() && !data.is_empty() {
            return Err(Error::InvalidInput("data without columns".into()));
        }
        Ok(FeatureMatrix { columns, parents, data })
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn n_rows(&self) -> usize {
        self.data.len().checked_div(self.n_cols()).unwrap_or(0)
    }

    pub fn row(&self, i: usize) -> &[T] {
        let d = self.n_cols();
        &self.data[i * d..(i + 1) * d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        (0..self.n_rows()).map(|i| self.row(i))
    }

    /// Keeps the columns whose parent feature satisfies `keep`.
    pub fn select_parents(&self, keep: impl Fn(&str) -> bool) -> Self {
        let idx: Vec<usize> = (0..self.n_cols()).filter(|&j| keep(&self.parents[j])).collect();
        let mut data = Vec::with_capacity(idx.len() * self.n_rows());
        for r in self.rows() {
            data.extend(idx.iter().map(|&j| r[j]));
        }
        FeatureMatrix {
            columns: idx.iter().map(|&j| self.columns[j].clone()).collect(),
            parents: idx.iter().map(|&j| self.parents[j].clone()).collect(),
            data,
        }
    }

    pub fn take_rows(&self, rows: &[usize]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * self.n_cols());
        for &r in rows {
            data.extend_from_slice(self.row(r));
        }
        FeatureMatrix {
            columns: self.columns.clone(),
            parents: self.parents.clone(),
            data,
        }
    }

    /// First column holding a non-finite value.
    pub fn check_finite(&self) -> Result<()> {
        let d = self.n_cols();
        match self.data.iter().position(|v| !v.is_finite()) {
            Some(p) => Err(Error::NonFinite {
                column: self.columns[p % d].clone(),
            }),
            None => Ok(()),
        }
    }
}

/// One-hot and standardization plan for a schema. Numeric statistics come
/// from the rows passed to [`FeatureEncoder::fit`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct FeatureEncoder<T> {
    pub features: Vec<String>,
    pub kinds: Vec<ColumnKind>,
    /// (mean, std) per raw feature; `None` for non-numeric ones.
    pub standardization: Vec<Option<(T, T)>>,
}

impl<T: Scalar> FeatureEncoder<T> {
    pub fn fit(schema: &FeatureSchema, vectors: &[FeatureVector<T>], train_rows: &[usize]) -> Result<Self> {
        let tones: Vec<String> = ToneContext::SYMBOLS.iter().map(|s| s.to_string()).collect();
        let kinds: Vec<ColumnKind> = schema
            .feature_names
            .iter()
            .map(|name| {
                if name.starts_with("pos_tag") {
                    ColumnKind::Categorical(schema.pos.levels())
                } else if name.starts_with("dep_func") {
                    ColumnKind::Categorical(schema.dep.levels())
                } else if name == "prev_tone" || name == "next_tone" {
                    ColumnKind::Categorical(tones.clone())
                } else if matches!(name.as_str(), "sent_position" | "start_pitch" | "end_pitch") {
                    ColumnKind::Numeric
                } else {
                    ColumnKind::Boolean
                }
            })
            .collect();

        let raw: Vec<Vec<RawValue<T>>> = train_rows.iter().map(|&r| vectors[r].raw_values()).collect();
        let mut standardization = vec![None; kinds.len()];
        for (k, kind) in kinds.iter().enumerate() {
            if *kind != ColumnKind::Numeric {
                continue;
            }
            let xs: Vec<T> = raw
                .iter()
                .map(|row| match row[k] {
                    RawValue::Numeric(x) => Ok(x),
                    _ => Err(Error::InvalidInput(format!("feature {} is not numeric", schema.feature_names[k]))),
                })
                .collect::<Result<_>>()?;
            if xs.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite {
                    column: schema.feature_names[k].clone(),
                });
            }
            standardization[k] = Some(if xs.is_empty() {
                (T::zero(), T::one())
            } else {
                crate::scalar::mean_std(&xs)
            });
        }
        Ok(FeatureEncoder {
            features: schema.feature_names.clone(),
            kinds,
            standardization,
        })
    }

    pub fn column_names(&self) -> (Vec<String>, Vec<String>) {
        let mut cols = Vec::new();
        let mut parents = Vec::new();
        for (name, kind) in self.features.iter().zip(&self.kinds) {
            match kind {
                ColumnKind::Categorical(levels) => {
                    for l in levels {
                        cols.push(format!("{name}={l}"));
                        parents.push(name.clone());
                    }
                }
                _ => {
                    cols.push(name.clone());
                    parents.push(name.clone());
                }
            }
        }
        (cols, parents)
    }

    pub fn width(&self) -> usize {
        self.kinds.iter().map(ColumnKind::width).sum()
    }

    fn encode_into(&self, fv: &FeatureVector<T>, out: &mut Vec<T>) -> Result<()> {
        let values = fv.raw_values();
        if values.len() != self.kinds.len() {
            return Err(Error::InvalidInput(format!(
                "instance {} has {} raw features, encoder expects {}",
                fv.instance_id,
                values.len(),
                self.kinds.len()
            )));
        }
        for (k, (kind, v)) in self.kinds.iter().zip(values).enumerate() {
            match (kind, v) {
                (ColumnKind::Categorical(levels), RawValue::Categorical(s)) => {
                    let hit = levels
                        .iter()
                        .position(|l| *l == s)
                        .or_else(|| levels.iter().position(|l| l == OTHER));
                    out.extend((0..levels.len()).map(|i| if Some(i) == hit { T::one() } else { T::zero() }));
                }
                (ColumnKind::Boolean, RawValue::Boolean(b)) => out.push(if b { T::one() } else { T::zero() }),
                (ColumnKind::Numeric, RawValue::Numeric(x)) => {
                    if !x.is_finite() {
                        return Err(Error::NonFinite {
                            column: self.features[k].clone(),
                        });
                    }
                    let (m, s) = self.standardization[k].unwrap_or((T::zero(), T::one()));
                    let s = if s > T::lit(1e-12) { s } else { T::one() };
                    out.push((x - m) / s);
                }
                _ => {
                    return Err(Error::InvalidInput(format!("feature {} has the wrong value type", self.features[k])));
                }
            }
        }
        Ok(())
    }

    pub fn transform(&self, vectors: &[FeatureVector<T>]) -> Result<FeatureMatrix<T>> {
        let (columns, parents) = self.column_names();
        let mut data = Vec::with_capacity(vectors.len() * columns.len());
        for fv in vectors {
            self.encode_into(fv, &mut data)?;
        }
        FeatureMatrix::new(columns, parents, data)
    }

    /// Inverse of the encoding for one row. Numerics are de-standardized.
    pub fn decode(&self, row: &[T]) -> Result<Vec<RawValue<T>>> {
        if row.len() != self.width() {
            return Err(Error::InvalidInput(format!("row has {} columns, expected {}", row.len(), self.width())));
        }
        let mut out = Vec::with_capacity(self.kinds.len());
        let mut j = 0;
        for (k, kind) in self.kinds.iter().enumerate() {
            match kind {
                ColumnKind::Categorical(levels) => {
                    let block = &row[j..j + levels.len()];
                    let hit = block
                        .iter()
                        .position(|&v| v == T::one())
                        .ok_or_else(|| Error::InvalidInput(format!("no level set for {}", self.features[k])))?;
                    out.push(RawValue::Categorical(levels[hit].clone()));
                }
                ColumnKind::Boolean => out.push(RawValue::Boolean(row[j] != T::zero())),
                ColumnKind::Numeric => {
                    let (m, s) = self.standardization[k].unwrap_or((T::zero(), T::one()));
                    let s = if s > T::lit(1e-12) { s } else { T::one() };
                    out.push(RawValue::Numeric(row[j] * s + m));
                }
            }
            j += kind.width();
        }
        Ok(out)
    }
}

/// CSV with a header row of column names.
pub fn write_matrix_csv<T: Scalar, W: Write>(mut w: W, m: &FeatureMatrix<T>) -> Result<()> {
    writeln!(w, "{}", m.columns.join(","))?;
    for r in m.rows() {
        let line: Vec<String> = r.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    Ok(())
}
