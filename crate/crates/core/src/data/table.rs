use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Task;

/// One parsed CSV cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Cell {
    Missing,
    Number(f64),
    Text(String),
}

impl Cell {
    /// Empty (after trimming) is missing; anything parseable as a finite number is numeric.
    pub fn parse(raw: &str) -> Self {
        let t = raw.trim();
        if t.is_empty() || t == "?" {
            return Cell::Missing;
        }
        match t.parse::<f64>() {
            Ok(v) if v.is_finite() => Cell::Number(v),
            _ => Cell::Text(t.to_string()),
        }
    }

    pub fn is_missing(&self) -> bool {
        matches!(self, Cell::Missing)
    }

    /// Text used for categorical levels; numbers render in shortest round-trip form.
    pub fn as_level(&self) -> Option<String> {
        match self {
            Cell::Missing => None,
            Cell::Number(v) => Some(format!("{v}")),
            Cell::Text(s) => Some(s.clone()),
        }
    }
}

/// Header plus rectangular rows of cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl RawTable {
    /// Builds a table from string records; `first_line` is the 1-based line of
    /// the first record, used in ragged-row errors.
    pub fn from_records<I, R, S>(headers: Vec<String>, records: I, first_line: usize) -> Result<Self>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let width = headers.len();
        let mut rows = Vec::new();
        for (i, rec) in records.into_iter().enumerate() {
            let row: Vec<Cell> = rec.into_iter().map(|s| Cell::parse(s.as_ref())).collect();
            if row.len() != width {
                return Err(Error::Data(format!(
                    "row {} has {} fields, header has {}",
                    first_line + i,
                    row.len(),
                    width
                )));
            }
            rows.push(row);
        }
        Ok(Self { headers, rows })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    pub fn column(&self, c: usize) -> impl Iterator<Item = &Cell> {
        self.rows.iter().map(move |r| &r[c])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ColumnKind {
    Continuous,
    Categorical { levels: Vec<String> },
    Target,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
}

/// Typed columns of a table, with exactly one target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub columns: Vec<ColumnSpec>,
    pub target: usize,
    pub task: Task,
    /// Class names in index order (empty for regression).
    pub classes: Vec<String>,
}

impl Schema {
    /// Infers column kinds: a column whose non-missing cells are all numeric is
    /// continuous, anything else is categorical.
    ///
    /// Without an explicit task, a target with two distinct values is binary, a
    /// non-numeric target or an integer target with at most ten distinct values
    /// is multiclass, and anything else is regression.
    pub fn infer(table: &RawTable, target: &str, task: Option<Task>) -> Result<Self> {
        let target_idx = table
            .column_index(target)
            .ok_or_else(|| Error::Data(format!("target column '{target}' not found")))?;
        let mut columns = Vec::with_capacity(table.headers.len());
        for (c, name) in table.headers.iter().enumerate() {
            let kind = if c == target_idx {
                ColumnKind::Target
            } else if table.column(c).all(|cell| !matches!(cell, Cell::Text(_))) {
                ColumnKind::Continuous
            } else {
                ColumnKind::Categorical {
                    levels: distinct_levels(table.column(c)),
                }
            };
            columns.push(ColumnSpec {
                name: name.clone(),
                kind,
            });
        }

        let numeric = table.column(target_idx).all(|cell| !matches!(cell, Cell::Text(_)));
        let classes = distinct_levels(table.column(target_idx));
        if classes.is_empty() {
            return Err(Error::Data(format!("target column '{target}' is empty")));
        }
        let task = match task {
            Some(t) => t,
            None if classes.len() == 2 => Task::Binary,
            None if !numeric => Task::Multiclass {
                classes: classes.len(),
            },
            None if classes.len() <= 10
                && table
                    .column(target_idx)
                    .all(|c| matches!(c, Cell::Number(v) if crate::numeric::math::floor(*v) == *v) || c.is_missing()) =>
            {
                Task::Multiclass {
                    classes: classes.len(),
                }
            }
            None => Task::Regression,
        };
        let classes = match task {
            Task::Regression => {
                if !numeric {
                    return Err(Error::Data("regression target must be numeric".into()));
                }
                Vec::new()
            }
            Task::Binary if classes.len() != 2 => {
                return Err(Error::Data(format!(
                    "binary task needs 2 target values, found {}",
                    classes.len()
                )))
            }
            Task::Multiclass { classes: c } if c != classes.len() => {
                return Err(Error::Data(format!(
                    "multiclass task declares {c} classes, target has {}",
                    classes.len()
                )))
            }
            _ => classes,
        };
        Ok(Self {
            columns,
            target: target_idx,
            task,
            classes,
        })
    }

    pub fn target_name(&self) -> &str {
        &self.columns[self.target].name
    }

    /// Encodes a target cell: class index for classification, value for regression.
    pub fn encode_target(&self, cell: &Cell) -> Result<Option<f64>> {
        match (self.task, cell) {
            (_, Cell::Missing) => Ok(None),
            (Task::Regression, Cell::Number(v)) => Ok(Some(*v)),
            (Task::Regression, Cell::Text(t)) => Err(Error::Data(format!(
                "non-numeric regression target '{t}'"
            ))),
            (_, c) => {
                let level = c.as_level().unwrap_or_default();
                self.classes
                    .iter()
                    .position(|l| *l == level)
                    .map(|i| Some(i as f64))
                    .ok_or_else(|| Error::Data(format!("unknown class '{level}'")))
            }
        }
    }
}

/// Distinct non-missing values, numerically sorted when all are numbers.
fn distinct_levels<'a>(cells: impl Iterator<Item = &'a Cell>) -> Vec<String> {
    let mut nums: Vec<f64> = Vec::new();
    let mut texts: BTreeSet<String> = BTreeSet::new();
    for c in cells {
        match c {
            Cell::Number(v) => nums.push(*v),
            Cell::Text(t) => {
                texts.insert(t.clone());
            }
            Cell::Missing => {}
        }
    }
    if texts.is_empty() {
        nums.sort_by(f64::total_cmp);
        nums.dedup();
        nums.into_iter().map(|v| format!("{v}")).collect()
    } else {
        texts.extend(nums.into_iter().map(|v| format!("{v}")));
        texts.into_iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn table(headers: &[&str], rows: &[&[&str]]) -> Result<RawTable> {
        RawTable::from_records(
            headers.iter().map(|s| s.to_string()).collect(),
            rows.iter().map(|r| r.iter().copied()),
            2,
        )
    }

    #[test]
    fn parse_cells() {
        assert_eq!(Cell::parse(" 1.5 "), Cell::Number(1.5));
        assert_eq!(Cell::parse(""), Cell::Missing);
        assert_eq!(Cell::parse("red"), Cell::Text("red".into()));
        assert_eq!(Cell::parse("NaN"), Cell::Text("NaN".into()));
    }

    #[test]
    fn numeric_file_has_one_feature() {
        let t = table(&["x", "y"], &[&["1", "0"], &["2", "1"]]).unwrap();
        let s = Schema::infer(&t, "y", None).unwrap();
        assert_eq!(s.columns[0].kind, ColumnKind::Continuous);
        assert_eq!(s.columns[1].kind, ColumnKind::Target);
        assert_eq!(s.task, Task::Binary);
        assert_eq!(s.classes, ["0", "1"]);
    }

    #[test]
    fn text_column_is_categorical() {
        let t = table(&["c", "y"], &[&["a", "1"], &["b", "2"], &["a", "3"]]).unwrap();
        let s = Schema::infer(&t, "y", Some(Task::Regression)).unwrap();
        assert_eq!(
            s.columns[0].kind,
            ColumnKind::Categorical {
                levels: vec!["a".into(), "b".into()]
            }
        );
    }

    #[test]
    fn ragged_row_names_the_row() {
        let err = table(&["a", "b"], &[&["1", "2"], &["3"]]).unwrap_err();
        assert!(alloc::format!("{err}").contains("row 3"));
    }

    #[test]
    fn missing_target_column() {
        let t = table(&["a"], &[&["1"]]).unwrap();
        assert!(Schema::infer(&t, "zzz", None).is_err());
    }

    #[test]
    fn task_inference() {
        let t = table(&["x", "y"], &[&["1", "0.5"], &["2", "1.7"], &["3", "2.2"]]).unwrap();
        assert_eq!(Schema::infer(&t, "y", None).unwrap().task, Task::Regression);
        let t = table(&["x", "y"], &[&["1", "a"], &["2", "b"], &["3", "c"]]).unwrap();
        let s = Schema::infer(&t, "y", None).unwrap();
        assert_eq!(s.task, Task::Multiclass { classes: 3 });
        assert_eq!(s.encode_target(&Cell::Text("c".into())).unwrap(), Some(2.0));
        assert!(s.encode_target(&Cell::Text("q".into())).is_err());
    }

    #[test]
    fn numeric_levels_sort_numerically() {
        let t = table(&["x", "y"], &[&["1", "10"], &["2", "9"], &["3", "10"]]).unwrap();
        let s = Schema::infer(&t, "y", None).unwrap();
        assert_eq!(s.classes, ["9", "10"]);
    }
}
