use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::label::Label;

pub const MANIFEST_HEADER: &str = "path,label,speaker_id";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub label: Label,
    pub speaker_id: String,
}

/// Reads a `path,label,speaker_id` CSV. Relative paths are resolved against
/// the manifest's own directory.
pub fn load_manifest(path: impl AsRef<Path>) -> Result<Vec<ManifestEntry>> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let text = fs::read_to_string(path).map_err(|e| Error::from(e).at_path(path))?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    parse_manifest(&text, base).map_err(|e| e.at_path(path))
}

/// Line numbers in errors are 1-based and count the header.
pub fn parse_manifest(text: &str, base: &Path) -> Result<Vec<ManifestEntry>> {
    let text = text.trim_start_matches('\u{feff}');
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| csv_error(e, 1))?;
    let found: Vec<&str> = header.iter().collect();
    if found.join(",") != MANIFEST_HEADER {
        return Err(Error::BadHeader {
            found: found.join(","),
        });
    }
    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| csv_error(e, i + 2))?;
        let line = row.position().map_or(i + 2, |p| p.line() as usize);
        if row.iter().all(str::is_empty) {
            continue;
        }
        let [file, label, speaker] = row.iter().collect::<Vec<_>>()[..] else {
            return Err(Error::MalformedRow {
                line,
                msg: format!("expected 3 fields, found {}", row.len()),
            });
        };
        if file.is_empty() || speaker.is_empty() {
            return Err(Error::MalformedRow {
                line,
                msg: "empty path or speaker_id".into(),
            });
        }
        let label: Label = label.parse().map_err(|_| Error::UnknownLabel {
            line,
            label: label.to_string(),
        })?;
        let path = base.join(file);
        if !seen.insert(path.clone()) {
            return Err(Error::DuplicatePath { line, path });
        }
        entries.push(ManifestEntry {
            path,
            label,
            speaker_id: speaker.to_string(),
        });
    }
    Ok(entries)
}

fn csv_error(e: csv::Error, line: usize) -> Error {
    let line = e.position().map_or(line, |p| p.line() as usize);
    Error::MalformedRow {
        line,
        msg: e.to_string(),
    }
}

/// Writes entries with paths exactly as given.
pub fn write_manifest(path: impl AsRef<Path>, entries: &[ManifestEntry]) -> Result<()> {
    let path = path.as_ref();
    let io = |e: csv::Error| Error::from(std::io::Error::other(e)).at_path(path);
    let mut writer = csv::Writer::from_path(path).map_err(io)?;
    writer.write_record(MANIFEST_HEADER.split(',')).map_err(io)?;
    for e in entries {
        let file = e.path.to_string_lossy();
        writer.write_record([file.as_ref(), e.label.name(), e.speaker_id.as_str()]).map_err(io)?;
    }
    writer.flush().map_err(|e| Error::from(e).at_path(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Vec<ManifestEntry>> {
        parse_manifest(text, Path::new("corpus"))
    }

    #[test]
    fn parses_rows_in_order() {
        let entries = parse("path,label,speaker_id\nclips/a1.wav,ARA,arabic_07\nb.wav,ENG,e1\n").unwrap();
        assert_eq!(entries.len(), 2);
        assert_eq!(entries[0].label, Label::Ara);
        assert_eq!(entries[0].speaker_id, "arabic_07");
        assert_eq!(entries[0].path, Path::new("corpus/clips/a1.wav"));
        assert_eq!(entries[1].label, Label::Eng);
    }

    #[test]
    fn unknown_label_reports_line() {
        let err = parse("path,label,speaker_id\na.wav,ENG,s1\nb.wav,FRA,s2\n").unwrap_err();
        assert!(matches!(err, Error::UnknownLabel { line: 3, ref label } if label == "FRA"));
        assert!(err.to_string().contains("line 3"));
    }

    #[test]
    fn empty_data_section() {
        assert!(parse("path,label,speaker_id\n").unwrap().is_empty());
        assert!(parse("path,label,speaker_id").unwrap().is_empty());
    }

    #[test]
    fn bad_header_and_rows() {
        assert!(matches!(parse("file,label\n"), Err(Error::BadHeader { .. })));
        assert!(matches!(parse(""), Err(Error::BadHeader { .. })));
        assert!(matches!(
            parse("path,label,speaker_id\na.wav,ENG\n"),
            Err(Error::MalformedRow { line: 2, .. })
        ));
        assert!(matches!(
            parse("path,label,speaker_id\na.wav,ENG,x\na.wav,MAN,y\n"),
            Err(Error::DuplicatePath { line: 3, .. })
        ));
    }

    #[test]
    fn missing_file() {
        let err = load_manifest("/nonexistent/manifest.csv").unwrap_err();
        assert!(matches!(err, Error::MissingFile(_)));
    }
}
