//! Manifests, point files and atomic artifact writes.
//!
//! A manifest lists contours by id and path (relative to the manifest):
//!
//! ```json
//! {"dataset_id": "set2", "contours": [{"id": "a", "path": "a.csv"}]}
//! ```
//!
//! Point files are CSV with an `x,y` header or JSON
//! `{"id": ..., "points": [[x, y], ...]}`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::contour::{Contour, ContourSet, Point, Source};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Manifest {
    pub dataset_id: String,
    pub contours: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub path: PathBuf,
    #[serde(default, skip_serializing_if = "is_original")]
    pub source: Source,
}

fn is_original(s: &Source) -> bool {
    *s == Source::Original
}

#[derive(Deserialize)]
struct JsonPoints {
    points: Vec<[f64; 2]>,
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))
}

/// Loads every contour named by the manifest, in manifest order. No
/// smoothing or normalisation is applied.
pub fn load_contour_set(manifest_path: &Path) -> Result<ContourSet> {
    let manifest = read_manifest(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let contours = manifest
        .contours
        .iter()
        .map(|entry| {
            let path = base.join(&entry.path);
            let points = read_points(&path)?;
            let mut contour = Contour::new(entry.id.clone(), points)?;
            contour.source = entry.source.clone();
            Ok(contour)
        })
        .collect::<Result<Vec<_>>>()?;
    ContourSet::new(manifest.dataset_id, contours)
}

pub fn read_points(path: &Path) -> Result<Vec<Point>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let is_json = path
        .extension()
        .is_some_and(|ext| ext.eq_ignore_ascii_case("json"));
    if is_json {
        let parsed: JsonPoints =
            serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))?;
        return Ok(parsed.points.into_iter().map(Point::from).collect());
    }
    parse_csv_points(path, &text)
}

fn parse_csv_points(path: &Path, text: &str) -> Result<Vec<Point>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| Error::parse(path, e.to_string()))?
        .clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::parse(path, format!("missing `{name}` column")))
    };
    let (xi, yi) = (col("x")?, col("y")?);
    let mut points = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::parse(path, e.to_string()))?;
        let num = |i: usize| -> Result<f64> {
            let field = record.get(i).unwrap_or("");
            field.parse::<f64>().map_err(|_| {
                Error::parse(
                    path,
                    format!("non-numeric coordinate {field:?} on data row {}", row + 1),
                )
            })
        };
        points.push(Point::new(num(xi)?, num(yi)?));
    }
    Ok(points)
}

pub fn points_to_csv(points: &[Point]) -> String {
    let mut out = String::from("x,y\n");
    for p in points {
        out.push_str(&format!("{},{}\n", p.x, p.y));
    }
    out
}

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e.to_string()))
}

/// Writes a contour set as `contours/<id>.csv` plus `manifest.json` under `dir`.
pub fn write_contour_set(dir: &Path, set: &ContourSet) -> Result<PathBuf> {
    let mut entries = Vec::with_capacity(set.len());
    for contour in &set.contours {
        let rel = PathBuf::from("contours").join(format!("{}.csv", file_stem(&contour.id)));
        write_atomic(&dir.join(&rel), points_to_csv(&contour.points).as_bytes())?;
        entries.push(ManifestEntry {
            id: contour.id.clone(),
            path: rel,
            source: contour.source.clone(),
        });
    }
    let manifest_path = dir.join("manifest.json");
    write_json(
        &manifest_path,
        &Manifest {
            dataset_id: set.dataset_id.clone(),
            contours: entries,
        },
    )?;
    Ok(manifest_path)
}

fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.' | '~') {
                c
            } else {
                '_'
            }
        })
        .collect()
}
