//! Report writers. Every report exists twice: CSV with full-precision
//! floats for analysis, and an aligned text table rounded for reading.
//! Rows are always pre-sorted by the caller, so files are byte-stable.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::{io_err, AppError};

/// Full-precision cell: shortest string that round-trips the f64.
pub fn cell(v: f64) -> String {
    v.to_string()
}

/// Two-decimal cell for the human-readable tables.
pub fn cell2(v: f64) -> String {
    format!("{v:.2}")
}

/// p-value cell: four significant digits, scientific for tiny values.
pub fn cell_p(p: f64) -> String {
    if p != 0.0 && p < 1e-3 {
        format!("{p:.3e}")
    } else {
        format!("{p:.4}")
    }
}

pub fn write_csv(
    path: &Path,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<(), AppError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut writer = csv::Writer::from_writer(BufWriter::new(file));
    let csv_err = |e: csv::Error| AppError::Io(format!("{}: {e}", path.display()));
    writer.write_record(header).map_err(csv_err)?;
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        writer.write_record(row).map_err(csv_err)?;
    }
    writer.flush().map_err(|e| io_err(path, e))
}

/// Space-aligned table: header, rule, rows. Columns are left-aligned and
/// sized to their widest cell.
pub fn write_table(
    path: &Path,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<(), AppError> {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (i, v) in row.iter().enumerate() {
            widths[i] = widths[i].max(v.len());
        }
    }
    let mut out = String::new();
    let fmt_row = |cells: Vec<&str>, widths: &[usize]| -> String {
        let mut line = String::new();
        for (i, v) in cells.iter().enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            line.push_str(v);
            // No trailing padding on the last column.
            if i + 1 < cells.len() {
                for _ in v.len()..widths[i] {
                    line.push(' ');
                }
            }
        }
        line.push('\n');
        line
    };
    out.push_str(&fmt_row(header.to_vec(), &widths));
    let rule_len = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
    out.push_str(&"-".repeat(rule_len));
    out.push('\n');
    for row in rows {
        out.push_str(&fmt_row(row.iter().map(String::as_str).collect(), &widths));
    }
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut writer = BufWriter::new(file);
    writer
        .write_all(out.as_bytes())
        .and_then(|_| writer.flush())
        .map_err(|e| io_err(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cells_format_as_documented() {
        assert_eq!(cell(0.1), "0.1");
        assert_eq!(cell(1.0 / 3.0), "0.3333333333333333");
        assert_eq!(cell2(1.0 / 3.0), "0.33");
        assert_eq!(cell_p(0.04), "0.0400");
        assert_eq!(cell_p(2.4e-6), "2.400e-6");
        assert_eq!(cell_p(1.0), "1.0000");
        assert_eq!(cell_p(0.0), "0.0000");
    }

    #[test]
    fn table_columns_align() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.txt");
        write_table(
            &path,
            &["name", "n"],
            &[
                vec!["a".into(), "10".into()],
                vec!["longer-name".into(), "3".into()],
            ],
        )
        .unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "name         n");
        assert_eq!(lines[2], "a            10");
        assert_eq!(lines[3], "longer-name  3");
    }
}
