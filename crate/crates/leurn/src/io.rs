//! CSV ingestion and emission.

use std::io::Write;
use std::path::Path;

use leurn_core::data::{Cell, Dataset, Preprocessor, RawTable, Schema};
use leurn_core::numeric::Matrix;

use crate::error::{io_err, CliError, Result};

/// Reads a headed CSV file; fields are trimmed and empty or `?` cells are missing.
pub fn read_table(path: &Path) -> Result<RawTable> {
    let file = std::fs::File::open(path).map_err(io_err(path))?;
    read_table_from(file, path)
}

/// Reads a headed CSV from any reader; `path` only labels errors.
pub fn read_table_from<R: std::io::Read>(reader: R, path: &Path) -> Result<RawTable> {
    let csv_err = |source| CliError::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    let records = rdr
        .records()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(csv_err)?;
    Ok(RawTable::from_records(headers, records.iter().map(|r| r.iter()), 2)?)
}

/// Reorders a table's columns to the schema's column order, matching by
/// header name. A missing target column becomes all-missing; a missing
/// feature column is an error.
pub fn align(table: &RawTable, schema: &Schema) -> Result<RawTable> {
    let mut positions = Vec::with_capacity(schema.columns.len());
    for (c, col) in schema.columns.iter().enumerate() {
        match table.column_index(&col.name) {
            Some(i) => positions.push(Some(i)),
            None if c == schema.target => positions.push(None),
            None => return Err(CliError::Usage(format!("data is missing feature column '{}'", col.name))),
        }
    }
    let rows = table
        .rows
        .iter()
        .map(|row| {
            positions
                .iter()
                .map(|p| p.map_or(Cell::Missing, |i| row[i].clone()))
                .collect()
        })
        .collect();
    Ok(RawTable {
        headers: schema.columns.iter().map(|c| c.name.clone()).collect(),
        rows,
    })
}

/// Encodes features of an aligned table; targets are left as zero.
pub fn encode_features(pre: &Preprocessor, aligned: &RawTable) -> Result<Dataset> {
    let x: Matrix = pre.transform_features(aligned)?;
    let n = x.rows();
    Ok(Dataset::new(x, vec![0.0; n])?)
}

/// Encodes features and targets of an aligned table; every row needs a target.
pub fn encode_labeled(pre: &Preprocessor, schema: &Schema, aligned: &RawTable) -> Result<Dataset> {
    let rows: Vec<usize> = (0..aligned.len()).collect();
    Ok(pre.transform(aligned, schema, &rows)?)
}

/// Parses a `--row` argument: a row index into `data`, or a comma-separated
/// row listing the schema's feature columns (optionally with the target) in
/// schema order.
pub fn resolve_row(arg: &str, data: Option<&RawTable>, schema: &Schema) -> Result<Vec<Cell>> {
    if let Ok(idx) = arg.trim().parse::<usize>() {
        if let Some(table) = data {
            let aligned = align(table, schema)?;
            return aligned.rows.get(idx).cloned().ok_or_else(|| {
                CliError::Usage(format!("row index {idx} out of range for {} rows", aligned.len()))
            });
        }
    }
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(arg.as_bytes());
    let record = rdr
        .records()
        .next()
        .transpose()
        .map_err(|source| CliError::Csv {
            path: "--row".into(),
            source,
        })?
        .ok_or_else(|| CliError::Usage("empty --row".into()))?;
    let cells: Vec<Cell> = record.iter().map(Cell::parse).collect();
    let width = schema.columns.len();
    if cells.len() == width {
        return Ok(cells);
    }
    if cells.len() == width - 1 {
        let mut full = cells;
        full.insert(schema.target, Cell::Missing);
        return Ok(full);
    }
    let hint = if data.is_none() && arg.trim().parse::<usize>().is_ok() {
        " (a row index needs --data)"
    } else {
        ""
    };
    Err(CliError::Usage(format!(
        "--row has {} fields, expected {} features{hint}",
        cells.len(),
        width - 1
    )))
}

/// Renders a cell for CSV output; numbers use the shortest round-trip form.
pub fn cell_text(cell: &Cell) -> String {
    match cell {
        Cell::Missing => String::new(),
        Cell::Number(v) => format!("{v}"),
        Cell::Text(t) => t.clone(),
    }
}

/// CSV writer over a file or standard output.
pub fn csv_writer(out: Option<&Path>) -> Result<csv::Writer<Box<dyn Write>>> {
    let sink: Box<dyn Write> = match out {
        Some(p) => Box::new(std::io::BufWriter::new(std::fs::File::create(p).map_err(io_err(p))?)),
        None => Box::new(std::io::stdout().lock()),
    };
    Ok(csv::Writer::from_writer(sink))
}

/// Writes one CSV record, labeling errors with `out`.
pub fn write_record<I, S>(w: &mut csv::Writer<Box<dyn Write>>, out: Option<&Path>, record: I) -> Result<()>
where
    I: IntoIterator<Item = S>,
    S: AsRef<[u8]>,
{
    w.write_record(record).map_err(|source| CliError::Csv {
        path: out.map_or_else(|| "<stdout>".into(), Path::to_path_buf),
        source,
    })
}

/// Flushes a CSV writer.
pub fn finish(mut w: csv::Writer<Box<dyn Write>>, out: Option<&Path>) -> Result<()> {
    w.flush()
        .map_err(io_err(out.map_or_else(|| "<stdout>".into(), Path::to_path_buf)))
}
