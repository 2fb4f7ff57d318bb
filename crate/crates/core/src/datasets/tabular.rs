use std::fs::File;
use std::path::Path;

use super::LabeledDataset;
use crate::error::{Error, Result};

/// Which CSV column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Index(usize),
    Name(String),
    Last,
}

impl std::str::FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    /// `last`, a zero-based column index, or a header name.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(if s.eq_ignore_ascii_case("last") {
            LabelColumn::Last
        } else if let Ok(i) = s.parse() {
            LabelColumn::Index(i)
        } else {
            LabelColumn::Name(s.to_string())
        })
    }
}

/// Loads a comma-separated file of numeric features plus one label column.
///
/// Class indices follow first appearance of each label string.
pub fn load_csv(path: impl AsRef<Path>, label: &LabelColumn, has_header: bool) -> Result<LabeledDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let csv_err = |row: usize, e: csv::Error| Error::Csv {
        path: path.to_path_buf(),
        row,
        message: e.to_string(),
    };

    let header: Option<Vec<String>> = if has_header {
        Some(
            reader
                .headers()
                .map_err(|e| csv_err(1, e))?
                .iter()
                .map(str::to_string)
                .collect(),
        )
    } else {
        None
    };

    let mut width: Option<usize> = header.as_ref().map(Vec::len);
    let mut label_idx: Option<usize> = None;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut class_names: Vec<String> = Vec::new();

    for record in reader.records() {
        let line = |r: &csv::StringRecord| r.position().map_or(0, |p| p.line() as usize);
        let record = record.map_err(|e| {
            let row = e.position().map_or(0, |p| p.line() as usize);
            csv_err(row, e)
        })?;
        let row = line(&record);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let n = *width.get_or_insert(record.len());
        if record.len() != n {
            return Err(Error::Csv {
                path: path.to_path_buf(),
                row,
                message: format!("expected {n} fields, found {}", record.len()),
            });
        }
        let li = match label_idx {
            Some(i) => i,
            None => {
                let i = resolve_label(label, header.as_deref(), n).map_err(|message| Error::Csv {
                    path: path.to_path_buf(),
                    row,
                    message,
                })?;
                *label_idx.get_or_insert(i)
            }
        };
        for (col, cell) in record.iter().enumerate() {
            if col == li {
                continue;
            }
            let v: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| Error::NonNumericCell {
                    path: path.to_path_buf(),
                    row,
                    column: col,
                    value: cell.to_string(),
                })?;
            features.push(v);
        }
        let name = &record[li];
        let class = match class_names.iter().position(|c| c == name) {
            Some(c) => c,
            None => {
                class_names.push(name.to_string());
                class_names.len() - 1
            }
        };
        labels.push(class);
    }

    if labels.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let li = label_idx.expect("set with the first record");
    let num_features = width.unwrap() - 1;
    let dataset = LabeledDataset::new(features, num_features, labels, class_names)?;
    match header {
        Some(h) => {
            let names = h
                .into_iter()
                .enumerate()
                .filter(|&(i, _)| i != li)
                .map(|(_, n)| n)
                .collect();
            dataset.with_feature_names(names)
        }
        None => Ok(dataset),
    }
}

fn resolve_label(label: &LabelColumn, header: Option<&[String]>, width: usize) -> std::result::Result<usize, String> {
    let idx = match label {
        LabelColumn::Last => width.checked_sub(1).ok_or("empty record")?,
        LabelColumn::Index(i) => *i,
        LabelColumn::Name(name) => header
            .ok_or_else(|| format!("label column {name:?} given by name but the file has no header"))?
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| format!("no column named {name:?}"))?,
    };
    if idx >= width {
        return Err(format!("label column {idx} out of range for {width} fields"));
    }
    if width < 2 {
        return Err("need at least one feature column besides the label".into());
    }
    Ok(idx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn first_appearance_class_order() {
        let f = file("1,2,a\n3,4,b\n5,6,a\n");
        let d = load_csv(f.path(), &LabelColumn::Last, false).unwrap();
        assert_eq!(d.num_classes(), 2);
        assert_eq!(d.class_names(), &["a", "b"]);
        assert_eq!(
            (0..3).map(|i| d.target(i)).collect::<Vec<_>>(),
            vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0]]
        );
        assert_eq!(d.row(2), &[5.0, 6.0]);
    }

    #[test]
    fn label_by_name_and_index() {
        let f = file("label,x,y\nfoo,1,2\nbar,3,4\n");
        let by_name = load_csv(f.path(), &LabelColumn::Name("label".into()), true).unwrap();
        let by_index = load_csv(f.path(), &LabelColumn::Index(0), true).unwrap();
        assert_eq!(by_name, by_index);
        assert_eq!(by_name.row(1), &[3.0, 4.0]);
        assert_eq!(by_name.feature_names().unwrap(), &["x", "y"]);
    }

    #[test]
    fn single_class_is_error() {
        let f = file("1,a\n2,a\n");
        assert!(matches!(
            load_csv(f.path(), &LabelColumn::Last, false),
            Err(Error::TooFewClasses(1))
        ));
    }

    #[test]
    fn non_numeric_cell_reports_position() {
        let f = file("x,y,c\n1,2,a\n3,oops,b\n");
        match load_csv(f.path(), &LabelColumn::Last, true) {
            Err(Error::NonNumericCell { row, column, value, .. }) => {
                assert_eq!((row, column, value.as_str()), (3, 1, "oops"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ragged_rows_rejected() {
        let f = file("1,2,a\n3,b\n");
        assert!(matches!(
            load_csv(f.path(), &LabelColumn::Last, false),
            Err(Error::Csv { row: 2, .. })
        ));
    }

    #[test]
    fn missing_file() {
        let err = load_csv("/nonexistent/iris.csv", &LabelColumn::Last, true).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/iris.csv"));
    }

    #[test]
    fn parses_label_column_selectors() {
        assert_eq!("last".parse::<LabelColumn>().unwrap(), LabelColumn::Last);
        assert_eq!("4".parse::<LabelColumn>().unwrap(), LabelColumn::Index(4));
        assert_eq!(
            "species".parse::<LabelColumn>().unwrap(),
            LabelColumn::Name("species".into())
        );
    }
}
