//! CSV and JSON point files.
//!
//! CSV: one point per row, comma-separated integer coordinates, optional final
//! `y` column with labels in {−1, 1}. A header row is detected by a non-numeric
//! first token. JSON: `{"dim": d, "points": [[...]], "labels": [...]}`.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{DatasetError, LabeledDataset, PointSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    /// Guesses the format from the file extension (`.json` → JSON, otherwise CSV).
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

fn parse_coord(tok: &str, line: usize) -> Result<i64, DatasetError> {
    let tok = tok.trim();
    if let Ok(v) = tok.parse::<i64>() {
        return Ok(v);
    }
    if tok.parse::<f64>().is_ok() {
        return Err(DatasetError::NonInteger { line });
    }
    Err(DatasetError::Parse { line, msg: format!("cannot parse '{tok}'") })
}

fn parse_label(tok: &str, line: usize) -> Result<i8, DatasetError> {
    match tok.trim() {
        "1" | "+1" => Ok(1),
        "-1" => Ok(-1),
        _ => Err(DatasetError::InvalidLabel { line }),
    }
}

struct RawTable {
    rows: Vec<(usize, Vec<String>)>,
    header_has_label: bool,
}

fn read_csv(text: &str) -> Result<RawTable, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    let mut header_has_label = false;
    for (k, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| DatasetError::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            msg: e.to_string(),
        })?;
        let line = rec.position().map_or(k + 1, |p| p.line() as usize);
        let fields: Vec<String> = rec.iter().map(str::to_string).collect();
        if fields.iter().all(|f| f.is_empty()) {
            continue;
        }
        if rows.is_empty() && !header_has_label && k == 0 && fields[0].parse::<f64>().is_err() {
            header_has_label = fields.last().is_some_and(|f| f.eq_ignore_ascii_case("y"));
            continue;
        }
        rows.push((line, fields));
    }
    Ok(RawTable { rows, header_has_label })
}

fn table_to_dataset(table: RawTable, want_labels: bool) -> Result<(PointSet, Option<Vec<i8>>), DatasetError> {
    let labeled = table.header_has_label || want_labels;
    let mut points = Vec::with_capacity(table.rows.len());
    let mut labels = Vec::new();
    let mut dim = None;
    for (line, fields) in &table.rows {
        let ncoord = if labeled { fields.len().saturating_sub(1) } else { fields.len() };
        let expected = *dim.get_or_insert(ncoord);
        if ncoord != expected || ncoord == 0 {
            return Err(DatasetError::DimensionMismatch { line: *line, expected, found: ncoord });
        }
        let p = fields[..ncoord].iter().map(|t| parse_coord(t, *line)).collect::<Result<Vec<_>, _>>()?;
        if p.iter().all(|&c| c == 0) {
            return Err(DatasetError::ZeroPoint { line: *line });
        }
        points.push(p);
        if labeled {
            labels.push(parse_label(&fields[ncoord], *line)?);
        }
    }
    let dim = dim.ok_or(DatasetError::Empty)?;
    let set = PointSet::new(dim, points)?;
    Ok((set, labeled.then_some(labels)))
}

#[derive(Serialize, Deserialize)]
struct JsonPoints {
    dim: usize,
    points: Vec<Vec<Value>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<Value>>,
}

fn read_json(text: &str) -> Result<(PointSet, Option<Vec<i8>>), DatasetError> {
    let raw: JsonPoints =
        serde_json::from_str(text).map_err(|e| DatasetError::Parse { line: e.line(), msg: e.to_string() })?;
    let mut points = Vec::with_capacity(raw.points.len());
    for (i, row) in raw.points.iter().enumerate() {
        let line = i + 1;
        let p = row
            .iter()
            .map(|v| match v {
                Value::Number(n) => n.as_i64().ok_or(DatasetError::NonInteger { line }),
                other => Err(DatasetError::Parse { line, msg: format!("not a number: {other}") }),
            })
            .collect::<Result<Vec<i64>, _>>()?;
        points.push(p);
    }
    if points.is_empty() {
        return Err(DatasetError::Empty);
    }
    let set = PointSet::new(raw.dim, points)?;
    let labels = raw
        .labels
        .map(|ls| {
            ls.iter()
                .enumerate()
                .map(|(i, v)| match v.as_i64() {
                    Some(1) => Ok(1),
                    Some(-1) => Ok(-1),
                    _ => Err(DatasetError::InvalidLabel { line: i + 1 }),
                })
                .collect::<Result<Vec<i8>, _>>()
        })
        .transpose()?;
    Ok((set, labels))
}

fn read_any(path: &Path, format: Format, want_labels: bool) -> Result<(PointSet, Option<Vec<i8>>), DatasetError> {
    let text = fs::read_to_string(path).map_err(|e| DatasetError::Io(format!("{}: {e}", path.display())))?;
    parse_str(&text, format, want_labels)
}

/// Parses file contents; exposed for in-memory use.
pub fn parse_str(text: &str, format: Format, want_labels: bool) -> Result<(PointSet, Option<Vec<i8>>), DatasetError> {
    match format {
        Format::Csv => table_to_dataset(read_csv(text)?, want_labels),
        Format::Json => read_json(text),
    }
}

/// Loads a point set; a labeled file's `y` column is ignored.
pub fn load_points(path: &Path, format: Format) -> Result<PointSet, DatasetError> {
    Ok(read_any(path, format, false)?.0)
}

/// Loads a labeled dataset. In header-less CSV the last column holds labels.
pub fn load_labeled(path: &Path, format: Format) -> Result<LabeledDataset, DatasetError> {
    let (set, labels) = read_any(path, format, true)?;
    let labels = labels.ok_or(DatasetError::MissingLabels)?;
    LabeledDataset::new(set, labels)
}

/// Writes CSV with a header row (`x1,…,xd[,y]`).
pub fn write_csv(path: &Path, points: &PointSet, labels: Option<&[i8]>) -> Result<(), DatasetError> {
    let mut out = String::new();
    let mut header: Vec<String> = (1..=points.dim()).map(|i| format!("x{i}")).collect();
    if labels.is_some() {
        header.push("y".into());
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for (i, p) in points.points().iter().enumerate() {
        let mut row: Vec<String> = p.iter().map(i64::to_string).collect();
        if let Some(ls) = labels {
            row.push(ls[i].to_string());
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    let mut f = fs::File::create(path).map_err(|e| DatasetError::Io(e.to_string()))?;
    f.write_all(out.as_bytes()).map_err(|e| DatasetError::Io(e.to_string()))
}

pub fn write_json(path: &Path, points: &PointSet, labels: Option<&[i8]>) -> Result<(), DatasetError> {
    let doc = JsonPoints {
        dim: points.dim(),
        points: points.points().iter().map(|p| p.iter().map(|&c| Value::from(c)).collect()).collect(),
        labels: labels.map(|ls| ls.iter().map(|&y| Value::from(y)).collect()),
    };
    let text = serde_json::to_string(&doc).map_err(|e| DatasetError::Io(e.to_string()))?;
    fs::write(path, text).map_err(|e| DatasetError::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_basic() {
        let (s, l) = parse_str("1,0\n0,1\n", Format::Csv, false).unwrap();
        assert_eq!((s.dim(), s.len(), s.bit_complexity()), (2, 2, 1));
        assert!(l.is_none());
    }

    #[test]
    fn csv_zero_row() {
        let err = parse_str("1,0\n0,0\n", Format::Csv, false).unwrap_err();
        assert_eq!(err, DatasetError::ZeroPoint { line: 2 });
    }

    #[test]
    fn csv_non_integer_and_garbage() {
        assert_eq!(parse_str("1,0\n1.5,2\n", Format::Csv, false).unwrap_err(), DatasetError::NonInteger { line: 2 });
        assert!(matches!(parse_str("1,0\n3,zz\n", Format::Csv, false).unwrap_err(), DatasetError::Parse { line: 2, .. }));
    }

    #[test]
    fn csv_header_with_labels() {
        let (s, l) = parse_str("x1,x2,y\n3,4,1\n-1,2,-1\n", Format::Csv, false).unwrap();
        assert_eq!(s.points(), &[vec![3, 4], vec![-1, 2]]);
        assert_eq!(l.unwrap(), vec![1, -1]);
    }

    #[test]
    fn csv_headerless_labels_on_request() {
        let (s, l) = parse_str("3,4,1\n-1,2,-1\n", Format::Csv, true).unwrap();
        assert_eq!(s.dim(), 2);
        assert_eq!(l.unwrap(), vec![1, -1]);
    }

    #[test]
    fn json_bit_complexity() {
        let big = 1i64 << 40;
        let text = format!(r#"{{"dim": 3, "points": [[1,2,3],[{big},0,-1],[0,0,5]]}}"#);
        let (s, _) = parse_str(&text, Format::Json, false).unwrap();
        assert_eq!(s.bit_complexity(), 41);
        assert_eq!(s.len(), 3);
    }

    #[test]
    fn json_non_integer() {
        let err = parse_str(r#"{"dim": 2, "points": [[1,2],[0.5,1]]}"#, Format::Json, false).unwrap_err();
        assert_eq!(err, DatasetError::NonInteger { line: 2 });
    }

    #[test]
    fn roundtrip_files() {
        let dir = tempfile::tempdir().unwrap();
        let set = PointSet::new(2, vec![vec![5, -3], vec![0, 7]]).unwrap();
        let labels = [1i8, -1];
        for (name, fmt) in [("a.csv", Format::Csv), ("a.json", Format::Json)] {
            let p = dir.path().join(name);
            match fmt {
                Format::Csv => write_csv(&p, &set, Some(&labels)).unwrap(),
                Format::Json => write_json(&p, &set, Some(&labels)).unwrap(),
            }
            let back = load_labeled(&p, Format::from_path(&p)).unwrap();
            assert_eq!(back.base(), &set);
            assert_eq!(back.labels(), &labels);
        }
    }
}
