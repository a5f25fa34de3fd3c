use std::collections::HashMap;
use std::fs::File;
use std::path::Path;

use super::{Label, LabeledInstance};
use crate::error::{Error, Result};

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path, row: usize, message: impl Into<String>) -> Error {
    Error::Csv {
        path: path.to_path_buf(),
        row,
        message: message.into(),
    }
}

fn numeric_label(raw: &str) -> Option<Label> {
    let v: f64 = raw.trim().parse().ok()?;
    if v == 1.0 {
        Some(Label::Positive)
    } else if v == -1.0 {
        Some(Label::Negative)
    } else {
        None
    }
}

/// Reads a labeled stream from CSV.
///
/// Every column except `label_column` is a real-valued feature, in header
/// order. Labels already in {-1, +1} are used as is; any other pair of
/// values is mapped by first occurrence (first seen -> +1). Row numbers in
/// errors are 1-based file lines, so the first data row is row 2.
pub fn read_csv_stream(path: impl AsRef<Path>, label_column: &str) -> Result<Vec<LabeledInstance>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);

    let headers = reader
        .headers()
        .map_err(|e| csv_err(path, 1, e.to_string()))?
        .clone();
    let label_idx = headers
        .iter()
        .position(|h| h.trim() == label_column)
        .ok_or_else(|| csv_err(path, 1, format!("no `{label_column}` column in header")))?;
    let dim = headers.len() - 1;

    let mut features = Vec::new();
    let mut raw_labels = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| csv_err(path, row, e.to_string()))?;
        if record.len() != headers.len() {
            return Err(csv_err(
                path,
                row,
                format!("expected {} fields, found {}", headers.len(), record.len()),
            ));
        }
        let mut x = Vec::with_capacity(dim);
        for (col, cell) in record.iter().enumerate() {
            if col == label_idx {
                continue;
            }
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| csv_err(path, row, format!("non-numeric feature `{cell}` in column `{}`", &headers[col])))?;
            if !v.is_finite() {
                return Err(csv_err(path, row, format!("non-finite feature `{cell}` in column `{}`", &headers[col])));
            }
            x.push(v);
        }
        features.push(x);
        raw_labels.push((row, record[label_idx].trim().to_string()));
    }

    let labels: Vec<Label> = if raw_labels.iter().all(|(_, l)| numeric_label(l).is_some()) {
        raw_labels.iter().map(|(_, l)| numeric_label(l).unwrap()).collect()
    } else {
        let mut mapping: HashMap<&str, Label> = HashMap::new();
        let mut out = Vec::with_capacity(raw_labels.len());
        for (row, raw) in &raw_labels {
            let label = match mapping.get(raw.as_str()) {
                Some(&label) => label,
                None if mapping.len() == 2 => {
                    return Err(csv_err(path, *row, format!("more than two label values (`{raw}`)")));
                }
                None => {
                    let label = if mapping.is_empty() {
                        Label::Positive
                    } else {
                        Label::Negative
                    };
                    mapping.insert(raw.as_str(), label);
                    label
                }
            };
            out.push(label);
        }
        out
    };

    Ok(features
        .into_iter()
        .zip(labels)
        .map(|(features, label)| LabeledInstance { features, label })
        .collect())
}

/// Writes instances as `f0,...,f{d-1},label` with shortest round-trip floats.
pub fn write_csv_stream(path: impl AsRef<Path>, instances: &[LabeledInstance]) -> Result<()> {
    let path = path.as_ref();
    let dim = instances.first().map_or(0, LabeledInstance::dim);
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut writer = csv::Writer::from_writer(file);
    let to_err = |e: csv::Error| csv_err(path, 0, e.to_string());

    let mut header: Vec<String> = (0..dim).map(|i| format!("f{i}")).collect();
    header.push("label".into());
    writer.write_record(&header).map_err(to_err)?;
    for (i, inst) in instances.iter().enumerate() {
        if inst.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: inst.dim(),
            });
        }
        let mut record: Vec<String> = inst.features.iter().map(|v| format!("{v}")).collect();
        record.push(inst.label.to_string());
        writer.write_record(&record).map_err(|e| csv_err(path, i + 2, e.to_string()))?;
    }
    writer.flush().map_err(|e| io_err(path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_file(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let path = dir.path().join(name);
        let mut f = File::create(&path).unwrap();
        f.write_all(body.as_bytes()).unwrap();
        path
    }

    #[test]
    fn maps_labels_by_first_occurrence() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "s.csv", "f0,f1,label\n1,2,a\n3,4,b\n5,6,a\n");
        let s = read_csv_stream(&path, "label").unwrap();
        let labels: Vec<_> = s.iter().map(|i| i.label).collect();
        assert_eq!(labels, [Label::Positive, Label::Negative, Label::Positive]);
        assert_eq!(s[1].features, [3.0, 4.0]);
    }

    #[test]
    fn keeps_signed_labels() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "s.csv", "label,f0\n-1,0.5\n1,0.25\n");
        let s = read_csv_stream(&path, "label").unwrap();
        assert_eq!(s[0].label, Label::Negative);
        assert_eq!(s[1].label, Label::Positive);
        assert_eq!(s[0].features, [0.5]);
    }

    #[test]
    fn nan_feature_names_row() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "s.csv", "f0,label\n1,a\nNaN,b\n");
        match read_csv_stream(&path, "label") {
            Err(Error::Csv { row, .. }) => assert_eq!(row, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_input() {
        let dir = tempfile::tempdir().unwrap();
        let ragged = write_file(&dir, "r.csv", "f0,f1,label\n1,2,a\n3,b\n");
        assert!(matches!(read_csv_stream(&ragged, "label"), Err(Error::Csv { row: 3, .. })));

        let text = write_file(&dir, "t.csv", "f0,label\nx,a\n");
        assert!(matches!(read_csv_stream(&text, "label"), Err(Error::Csv { row: 2, .. })));

        let multi = write_file(&dir, "m.csv", "f0,label\n1,a\n2,b\n3,c\n");
        assert!(matches!(read_csv_stream(&multi, "label"), Err(Error::Csv { row: 4, .. })));

        assert!(matches!(
            read_csv_stream(dir.path().join("missing.csv"), "label"),
            Err(Error::Io { .. })
        ));
        let no_label = write_file(&dir, "n.csv", "f0,f1\n1,2\n");
        assert!(read_csv_stream(&no_label, "label").is_err());
    }
}
