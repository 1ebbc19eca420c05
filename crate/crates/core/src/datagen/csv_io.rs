use std::io::Write;
use std::path::Path;

use super::{minmax, normalize, RegressionStream, Series};
use crate::error::{Error, Result};

/// Decimal rendering used by every CSV writer: 17 significant digits.
pub fn format_decimal(v: f64) -> String {
    format!("{v:.16e}")
}

/// Which column of a CSV file holds the desired signal.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum TargetColumn {
    #[default]
    Last,
    Index(usize),
    Name(String),
}

impl TargetColumn {
    fn resolve(&self, headers: &[String]) -> Result<usize> {
        match self {
            TargetColumn::Last => Ok(headers.len() - 1),
            TargetColumn::Index(i) if *i < headers.len() => Ok(*i),
            TargetColumn::Index(i) => Err(Error::Config(format!(
                "target column {i} out of range ({} columns)",
                headers.len()
            ))),
            TargetColumn::Name(name) => headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Config(format!("no column named {name:?}"))),
        }
    }
}

/// Reads a headed numeric CSV, normalizes every column to `[-1, 1]` over the
/// whole file and returns the target column as `d` and the rest, in file
/// order, as `x`. Constant regressor columns become 0; a constant target is
/// an error. Row numbers in diagnostics count the header as row 1.
pub fn load_csv(path: impl AsRef<Path>, target: &TargetColumn) -> Result<RegressionStream> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    if headers.is_empty() || headers.iter().all(String::is_empty) {
        return Err(Error::Data(format!("{}: empty file", path.display())));
    }
    if headers.len() < 2 {
        return Err(Error::Data(format!(
            "{}: need at least one regressor column and a target column",
            path.display()
        )));
    }
    let target_idx = target.resolve(&headers)?;

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); headers.len()];
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| Error::Data(format!("{}: row {row}: {e}", path.display())))?;
        for (c, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                Error::Data(format!(
                    "{}: row {row}: column {:?} is not numeric: {field:?}",
                    path.display(),
                    headers[c]
                ))
            })?;
            if !v.is_finite() {
                return Err(Error::Data(format!(
                    "{}: row {row}: column {:?} is not finite",
                    path.display(),
                    headers[c]
                )));
            }
            columns[c].push(v);
        }
    }
    if columns[0].is_empty() {
        return Err(Error::Data(format!("{}: no data rows", path.display())));
    }
    if minmax(&columns[target_idx]).is_none() {
        return Err(Error::Data(format!(
            "{}: target column {:?} is constant",
            path.display(),
            headers[target_idx]
        )));
    }

    let normalized: Vec<Vec<f64>> = columns.iter().map(|c| normalize(c)).collect();
    let p = headers.len() - 1;
    let pairs = (0..normalized[0].len())
        .map(|r| {
            let x = (0..headers.len())
                .filter(|&c| c != target_idx)
                .map(|c| normalized[c][r])
                .collect();
            (x, normalized[target_idx][r])
        })
        .collect();
    Ok(RegressionStream { pairs, p, bound: 1.0 })
}

/// Columns `t` and one per component.
pub fn write_series_csv(series: &Series, mut out: impl Write) -> Result<()> {
    write!(out, "t")?;
    for c in &series.components {
        write!(out, ",{c}")?;
    }
    writeln!(out)?;
    for (t, v) in series.values.iter().enumerate() {
        write!(out, "{t}")?;
        for c in v {
            write!(out, ",{}", format_decimal(*c))?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Columns `x_1..x_p, d`.
pub fn write_stream_csv(stream: &RegressionStream, mut out: impl Write) -> Result<()> {
    let header: Vec<String> = (1..=stream.p).map(|i| format!("x_{i}")).chain(["d".into()]).collect();
    writeln!(out, "{}", header.join(","))?;
    for (x, d) in &stream.pairs {
        let row: Vec<String> = x.iter().chain(std::iter::once(d)).map(|v| format_decimal(*v)).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write(content: &str) -> tempfile::NamedTempFile {
        let f = tempfile::NamedTempFile::new().unwrap();
        fs::write(f.path(), content).unwrap();
        f
    }

    #[test]
    fn two_rows_map_to_endpoints() {
        let f = write("a,b\n0,3\n10,5\n");
        let s = load_csv(f.path(), &TargetColumn::Last).unwrap();
        assert_eq!(s.pairs, vec![(vec![-1.0], -1.0), (vec![1.0], 1.0)]);
    }

    #[test]
    fn non_numeric_row_is_named() {
        let f = write("a,b,c\n1,2,3\na,b,c\n");
        let err = load_csv(f.path(), &TargetColumn::Last).unwrap_err().to_string();
        assert!(err.contains("row 3"), "{err}");
    }

    #[test]
    fn constant_columns() {
        let f = write("a,b,d\n1,7,0\n2,7,1\n3,7,2\n");
        let s = load_csv(f.path(), &TargetColumn::Name("d".into())).unwrap();
        assert!(s.pairs.iter().all(|(x, _)| x[1] == 0.0));
        let f = write("a,d\n1,4\n2,4\n");
        assert!(matches!(load_csv(f.path(), &TargetColumn::Last), Err(Error::Data(_))));
    }

    #[test]
    fn target_selection_and_order() {
        let f = write("d,a,b\n0,0,0\n1,1,2\n");
        let s = load_csv(f.path(), &TargetColumn::Index(0)).unwrap();
        assert_eq!(s.p, 2);
        assert_eq!(s.pairs[1], (vec![1.0, 1.0], 1.0));
        assert!(load_csv(f.path(), &TargetColumn::Index(5)).is_err());
        assert!(load_csv(f.path(), &TargetColumn::Name("z".into())).is_err());
    }

    #[test]
    fn nine_attribute_file() {
        let header: Vec<String> = (0..9).map(|i| format!("c{i}")).collect();
        let mut content = header.join(",") + "\n";
        for r in 0..5 {
            let row: Vec<String> = (0..9).map(|c| ((r * 7 + c * 3) % 11).to_string()).collect();
            content += &(row.join(",") + "\n");
        }
        let s = load_csv(write(&content).path(), &TargetColumn::Last).unwrap();
        assert_eq!(s.p, 8);
        assert!(s.pairs.iter().all(|(x, _)| x.len() == 8));
    }

    #[test]
    fn missing_and_empty_files() {
        assert!(matches!(load_csv("/nonexistent/file.csv", &TargetColumn::Last), Err(Error::Csv(_) | Error::Io(_))));
        assert!(load_csv(write("").path(), &TargetColumn::Last).is_err());
        assert!(load_csv(write("a,b\n").path(), &TargetColumn::Last).is_err());
    }

    #[test]
    fn stream_csv_round_trips() {
        let stream = RegressionStream {
            pairs: vec![(vec![0.1, -1.0 / 3.0], 2.0f64.sqrt() - 1.0)],
            p: 2,
            bound: 1.0,
        };
        let mut buf = Vec::new();
        write_stream_csv(&stream, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x_1,x_2,d"));
        let vals: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(vals, vec![0.1, -1.0 / 3.0, 2.0f64.sqrt() - 1.0]);
    }
}
