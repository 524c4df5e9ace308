use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{Cell, ColumnKind, Dataset, RawTable, Schema, SplitTag};
use crate::error::{shape_err, Error, Result};
use crate::model::Task;
use crate::numeric::Matrix;

/// How one raw column becomes model inputs. Statistics come from the training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureEncoder {
    Continuous {
        column: usize,
        name: String,
        mean: f64,
        std: f64,
        /// Median of the training values, used for missing cells.
        impute: f64,
        min: f64,
        max: f64,
    },
    Categorical {
        column: usize,
        name: String,
        levels: Vec<String>,
        /// Most frequent training level, used for missing cells.
        impute: String,
    },
}

impl FeatureEncoder {
    pub fn name(&self) -> &str {
        match self {
            FeatureEncoder::Continuous { name, .. } | FeatureEncoder::Categorical { name, .. } => name,
        }
    }

    pub fn width(&self) -> usize {
        match self {
            FeatureEncoder::Continuous { .. } => 1,
            FeatureEncoder::Categorical { levels, .. } => levels.len(),
        }
    }
}

/// What a model input column means.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnRole {
    Continuous { encoder: usize },
    OneHot { encoder: usize, level: usize },
}

/// Per-group sampling domain in standardized units, used by region sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SampleDomain {
    Continuous { column: usize, min: f64, max: f64 },
    /// One-hot block occupying `start..start + width`; exactly one column is hot.
    Categorical { start: usize, width: usize },
}

/// Fitted standardization, one-hot encoding and imputation.
///
/// Model inputs are ordered continuous features in file order, then one-hot
/// blocks in file order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preprocessor {
    pub encoders: Vec<FeatureEncoder>,
    pub task: Task,
    pub target_column: usize,
    pub input_width: usize,
}

/// Encoded splits; validation and test may be empty.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitData {
    pub train: Dataset,
    pub val: Dataset,
    pub test: Dataset,
}

impl Preprocessor {
    /// Fits encoders on the rows listed in `train_rows`.
    pub fn fit(table: &RawTable, schema: &Schema, train_rows: &[usize]) -> Result<Self> {
        if train_rows.is_empty() {
            return Err(Error::Empty("training split".into()));
        }
        let mut continuous = Vec::new();
        let mut categorical = Vec::new();
        for (c, spec) in schema.columns.iter().enumerate() {
            let cells = || train_rows.iter().map(|&r| &table.rows[r][c]);
            match spec.kind {
                ColumnKind::Target => {}
                ColumnKind::Continuous => {
                    let mut vals: Vec<f64> = cells()
                        .filter_map(|cell| match cell {
                            Cell::Number(v) => Some(*v),
                            _ => None,
                        })
                        .collect();
                    if vals.is_empty() {
                        log::warn!("dropping column '{}': no training values", spec.name);
                        continue;
                    }
                    let n = vals.len() as f64;
                    let mean = vals.iter().sum::<f64>() / n;
                    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
                    let std = libm::sqrt(var);
                    if !(std > 0.0) {
                        log::warn!("dropping constant column '{}'", spec.name);
                        continue;
                    }
                    vals.sort_by(f64::total_cmp);
                    let mid = vals.len() / 2;
                    let impute = if vals.len() % 2 == 1 {
                        vals[mid]
                    } else {
                        0.5 * (vals[mid - 1] + vals[mid])
                    };
                    continuous.push(FeatureEncoder::Continuous {
                        column: c,
                        name: spec.name.clone(),
                        mean,
                        std,
                        impute,
                        min: vals[0],
                        max: vals[vals.len() - 1],
                    });
                }
                ColumnKind::Categorical { .. } => {
                    let levels = levels_in_order(cells());
                    if levels.len() < 2 {
                        log::warn!("dropping constant column '{}'", spec.name);
                        continue;
                    }
                    let mut counts = vec![0usize; levels.len()];
                    for cell in cells() {
                        if let Some(l) = cell.as_level() {
                            if let Some(i) = levels.iter().position(|x| *x == l) {
                                counts[i] += 1;
                            }
                        }
                    }
                    let mode = (0..levels.len())
                        .max_by(|&a, &b| counts[a].cmp(&counts[b]).then(b.cmp(&a)))
                        .unwrap_or(0);
                    let impute = levels[mode].clone();
                    categorical.push(FeatureEncoder::Categorical {
                        column: c,
                        name: spec.name.clone(),
                        levels,
                        impute,
                    });
                }
            }
        }
        continuous.extend(categorical);
        if continuous.is_empty() {
            return Err(Error::Data("no usable feature columns".into()));
        }
        Ok(Self {
            encoders: continuous,
            task: schema.task,
            target_column: schema.target,
            input_width: schema.columns.len(),
        })
    }

    /// Number of model input columns.
    pub fn n_outputs(&self) -> usize {
        self.encoders.iter().map(FeatureEncoder::width).sum()
    }

    pub fn roles(&self) -> Vec<ColumnRole> {
        let mut roles = Vec::with_capacity(self.n_outputs());
        for (e, enc) in self.encoders.iter().enumerate() {
            match enc {
                FeatureEncoder::Continuous { .. } => roles.push(ColumnRole::Continuous { encoder: e }),
                FeatureEncoder::Categorical { levels, .. } => {
                    roles.extend((0..levels.len()).map(|level| ColumnRole::OneHot { encoder: e, level }))
                }
            }
        }
        roles
    }

    /// Model input names: the column name, or `name=level` for one-hot columns.
    pub fn output_names(&self) -> Vec<String> {
        self.roles()
            .into_iter()
            .map(|role| match role {
                ColumnRole::Continuous { encoder } => String::from(self.encoders[encoder].name()),
                ColumnRole::OneHot { encoder, level } => match &self.encoders[encoder] {
                    FeatureEncoder::Categorical { name, levels, .. } => format!("{name}={}", levels[level]),
                    FeatureEncoder::Continuous { name, .. } => name.clone(),
                },
            })
            .collect()
    }

    /// Encodes one raw row (full table width, target included and ignored).
    ///
    /// Returns the encoded vector and whether an unseen categorical level was
    /// met; unseen levels encode as an all-zero block.
    pub fn transform_row(&self, row: &[Cell]) -> Result<(Vec<f64>, bool)> {
        if row.len() != self.input_width {
            return Err(shape_err!("row has {} fields, expected {}", row.len(), self.input_width));
        }
        let mut out = Vec::with_capacity(self.n_outputs());
        let mut unseen = false;
        for enc in &self.encoders {
            match enc {
                FeatureEncoder::Continuous {
                    column,
                    mean,
                    std,
                    impute,
                    name,
                    ..
                } => {
                    let v = match &row[*column] {
                        Cell::Number(v) => *v,
                        Cell::Missing => *impute,
                        Cell::Text(t) => {
                            return Err(Error::Data(format!("non-numeric value '{t}' in column '{name}'")))
                        }
                    };
                    out.push((v - mean) / std);
                }
                FeatureEncoder::Categorical {
                    column,
                    levels,
                    impute,
                    ..
                } => {
                    let level = row[*column].as_level().unwrap_or_else(|| impute.clone());
                    let hot = levels.iter().position(|l| *l == level);
                    unseen |= hot.is_none();
                    out.extend((0..levels.len()).map(|i| if Some(i) == hot { 1.0 } else { 0.0 }));
                }
            }
        }
        Ok((out, unseen))
    }

    /// Encodes the listed rows (features and target) into a dataset.
    pub fn transform(&self, table: &RawTable, schema: &Schema, rows: &[usize]) -> Result<Dataset> {
        let width = self.n_outputs();
        let mut data = Vec::with_capacity(rows.len() * width);
        let mut y = Vec::with_capacity(rows.len());
        let mut unseen_rows = 0usize;
        for &r in rows {
            let row = &table.rows[r];
            let (x, unseen) = self.transform_row(row)?;
            unseen_rows += unseen as usize;
            data.extend(x);
            let target = schema
                .encode_target(&row[schema.target])?
                .ok_or_else(|| Error::Data(format!("missing target in data row {}", r + 1)))?;
            y.push(target);
        }
        if unseen_rows > 0 {
            log::warn!("{unseen_rows} rows contain categorical levels unseen in training; encoded as all-zero");
        }
        Dataset::new(Matrix::from_vec(rows.len(), width, data)?, y)
    }

    /// Encodes the feature columns of every row, ignoring the target.
    pub fn transform_features(&self, table: &RawTable) -> Result<Matrix> {
        let width = self.n_outputs();
        let mut data = Vec::with_capacity(table.len() * width);
        for row in &table.rows {
            data.extend(self.transform_row(row)?.0);
        }
        Matrix::from_vec(table.len(), width, data)
    }

    /// `(mean, std)` mapping model input `col` back to raw units; `(0, 1)` for one-hot columns.
    pub fn affine(&self, col: usize) -> (f64, f64) {
        match self.roles()[col] {
            ColumnRole::Continuous { encoder } => match self.encoders[encoder] {
                FeatureEncoder::Continuous { mean, std, .. } => (mean, std),
                _ => (0.0, 1.0),
            },
            ColumnRole::OneHot { .. } => (0.0, 1.0),
        }
    }

    /// [`Preprocessor::affine`] for every model input.
    pub fn affines(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.n_outputs());
        for enc in &self.encoders {
            match enc {
                FeatureEncoder::Continuous { mean, std, .. } => out.push((*mean, *std)),
                FeatureEncoder::Categorical { levels, .. } => out.extend(levels.iter().map(|_| (0.0, 1.0))),
            }
        }
        out
    }

    /// Model-input value back to raw units (`mean + std * z`; one-hot columns unchanged).
    pub fn to_raw(&self, col: usize, z: f64) -> f64 {
        let (m, s) = self.affine(col);
        m + s * z
    }

    pub fn to_standardized(&self, col: usize, raw: f64) -> f64 {
        let (m, s) = self.affine(col);
        (raw - m) / s
    }

    /// Training min/max of every model input, in standardized units.
    pub fn bounds_std(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(self.n_outputs());
        for enc in &self.encoders {
            match enc {
                FeatureEncoder::Continuous {
                    mean, std, min, max, ..
                } => out.push(((min - mean) / std, (max - mean) / std)),
                FeatureEncoder::Categorical { levels, .. } => out.extend(levels.iter().map(|_| (0.0, 1.0))),
            }
        }
        out
    }

    pub fn sample_domain(&self) -> Vec<SampleDomain> {
        let bounds = self.bounds_std();
        let mut out = Vec::new();
        let mut col = 0;
        for enc in &self.encoders {
            match enc {
                FeatureEncoder::Continuous { .. } => out.push(SampleDomain::Continuous {
                    column: col,
                    min: bounds[col].0,
                    max: bounds[col].1,
                }),
                FeatureEncoder::Categorical { levels, .. } => out.push(SampleDomain::Categorical {
                    start: col,
                    width: levels.len(),
                }),
            }
            col += enc.width();
        }
        out
    }

    /// Rebuilds a raw row (table width) from model inputs; the target cell is missing.
    pub fn decode_row(&self, z: &[f64]) -> Result<Vec<Cell>> {
        if z.len() != self.n_outputs() {
            return Err(shape_err!("{} values for {} model inputs", z.len(), self.n_outputs()));
        }
        let mut row = vec![Cell::Missing; self.input_width];
        let mut col = 0;
        for enc in &self.encoders {
            match enc {
                FeatureEncoder::Continuous { column, mean, std, .. } => {
                    row[*column] = Cell::Number(mean + std * z[col]);
                }
                FeatureEncoder::Categorical { column, levels, .. } => {
                    let block = &z[col..col + levels.len()];
                    if let Some(hot) = block.iter().position(|v| *v >= 0.5) {
                        row[*column] = Cell::Text(levels[hot].clone());
                    }
                }
            }
            col += enc.width();
        }
        Ok(row)
    }
}

/// Distinct non-missing levels in order of first appearance.
fn levels_in_order<'a>(cells: impl Iterator<Item = &'a Cell>) -> Vec<String> {
    let mut levels: Vec<String> = Vec::new();
    for l in cells.filter_map(Cell::as_level) {
        if !levels.contains(&l) {
            levels.push(l);
        }
    }
    levels
}

/// Fits the preprocessor on the train split and encodes every split with it.
pub fn fit_transform(table: &RawTable, schema: &Schema, tags: &[SplitTag]) -> Result<(SplitData, Preprocessor)> {
    if tags.len() != table.len() {
        return Err(shape_err!("{} split tags for {} rows", tags.len(), table.len()));
    }
    let rows_of = |want: SplitTag| -> Vec<usize> {
        tags.iter()
            .enumerate()
            .filter(|(_, t)| **t == want)
            .map(|(i, _)| i)
            .collect()
    };
    let train_rows = rows_of(SplitTag::Train);
    let pre = Preprocessor::fit(table, schema, &train_rows)?;
    let data = SplitData {
        train: pre.transform(table, schema, &train_rows)?,
        val: pre.transform(table, schema, &rows_of(SplitTag::Val))?,
        test: pre.transform(table, schema, &rows_of(SplitTag::Test))?,
    };
    Ok((data, pre))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn table(headers: &[&str], rows: &[&[&str]]) -> RawTable {
        RawTable::from_records(
            headers.iter().map(|s| s.to_string()).collect(),
            rows.iter().map(|r| r.iter().copied()),
            2,
        )
        .unwrap()
    }

    #[test]
    fn standardizes_on_train_only() {
        let t = table(&["x", "y"], &[&["0", "0"], &["2", "1"], &["100", "1"]]);
        let s = Schema::infer(&t, "y", None).unwrap();
        let tags = [SplitTag::Train, SplitTag::Train, SplitTag::Val];
        let (d, pre) = fit_transform(&t, &s, &tags).unwrap();
        assert_eq!(d.train.x.as_slice(), &[-1.0, 1.0]);
        assert_eq!(d.val.x.as_slice(), &[99.0]);
        assert_eq!(pre.to_raw(0, 99.0), 100.0);
    }

    #[test]
    fn one_hot_and_unseen_levels() {
        let t = table(
            &["c", "y"],
            &[&["red", "0"], &["blue", "1"], &["red", "1"], &["green", "0"]],
        );
        let s = Schema::infer(&t, "y", None).unwrap();
        let tags = [SplitTag::Train, SplitTag::Train, SplitTag::Train, SplitTag::Val];
        let (d, pre) = fit_transform(&t, &s, &tags).unwrap();
        assert_eq!(pre.output_names(), ["c=red", "c=blue"]);
        assert_eq!(d.train.row(0), &[1.0, 0.0]);
        assert_eq!(d.val.row(0), &[0.0, 0.0]);
    }

    #[test]
    fn levels_follow_first_appearance() {
        let t = table(&["c", "y"], &[&["red", "0"], &["blue", "1"]]);
        let s = Schema::infer(&t, "y", None).unwrap();
        let (d, _) = fit_transform(&t, &s, &[SplitTag::Train, SplitTag::Train]).unwrap();
        assert_eq!(d.train.row(0), &[1.0, 0.0]);
    }

    #[test]
    fn imputation_uses_train_median_and_mode() {
        let t = table(
            &["x", "c", "y"],
            &[
                &["1", "a", "0"],
                &["3", "b", "1"],
                &["10", "b", "0"],
                &["", "", "1"],
            ],
        );
        let s = Schema::infer(&t, "y", None).unwrap();
        let tags = [SplitTag::Train, SplitTag::Train, SplitTag::Train, SplitTag::Test];
        let (d, pre) = fit_transform(&t, &s, &tags).unwrap();
        let row = d.test.row(0);
        assert!((pre.to_raw(0, row[0]) - 3.0).abs() < 1e-12);
        // levels [a, b]; b is the mode
        assert_eq!(&row[1..], &[0.0, 1.0]);
    }

    #[test]
    fn constant_columns_dropped() {
        let t = table(&["k", "x", "y"], &[&["5", "1", "0"], &["5", "2", "1"]]);
        let s = Schema::infer(&t, "y", None).unwrap();
        let (d, pre) = fit_transform(&t, &s, &[SplitTag::Train, SplitTag::Train]).unwrap();
        assert_eq!(pre.output_names(), ["x"]);
        assert_eq!(d.train.n_features(), 1);
    }

    #[test]
    fn empty_train_split() {
        let t = table(&["x", "y"], &[&["1", "0"], &["2", "1"]]);
        let s = Schema::infer(&t, "y", None).unwrap();
        assert!(matches!(
            fit_transform(&t, &s, &[SplitTag::Val, SplitTag::Test]),
            Err(Error::Empty(_))
        ));
    }

    #[test]
    fn decode_round_trip() {
        let t = table(&["x", "c", "y"], &[&["1", "a", "0"], &["3", "b", "1"]]);
        let s = Schema::infer(&t, "y", None).unwrap();
        let (d, pre) = fit_transform(&t, &s, &[SplitTag::Train, SplitTag::Train]).unwrap();
        let row = pre.decode_row(d.train.row(1)).unwrap();
        assert_eq!(row[0], Cell::Number(3.0));
        assert_eq!(row[1], Cell::Text("b".into()));
        assert_eq!(row[2], Cell::Missing);
    }

    proptest::proptest! {
        #[test]
        fn train_split_is_standardized(vals in proptest::collection::vec(-1e3f64..1e3, 3..60)) {
            let rows: Vec<Vec<alloc::string::String>> = vals
                .iter()
                .enumerate()
                .map(|(i, v)| vec![format!("{v}"), format!("{}", i % 2)])
                .collect();
            let t = RawTable::from_records(vec!["x".into(), "y".into()], rows.iter().map(|r| r.iter()), 2).unwrap();
            let s = Schema::infer(&t, "y", Some(Task::Binary)).unwrap();
            let tags = vec![SplitTag::Train; vals.len()];
            let Ok((d, pre)) = fit_transform(&t, &s, &tags) else {
                // all-equal draws are dropped as constant
                return Ok(());
            };
            let (m, sd) = d.train.column_moments()[0];
            proptest::prop_assert!(m.abs() <= 1e-9);
            proptest::prop_assert!((sd - 1.0).abs() <= 1e-9);
            for (z, v) in d.train.x.as_slice().iter().zip(&vals) {
                proptest::prop_assert!((pre.to_raw(0, *z) - v).abs() <= 1e-12 * v.abs().max(1.0));
                let back = pre.to_standardized(0, pre.to_raw(0, *z));
                proptest::prop_assert!((back - z).abs() <= 1e-12);
            }
        }
    }
}
