use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{MotifError, MotifLabel};
use crate::snapshot::{serialize_document, serialize_text_regions, RegionSource, UiSnapshot};

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledScreen {
    pub snapshot: UiSnapshot,
    pub label: MotifLabel,
    pub source_id: String,
}

/// One manifest row. Paths are relative to the manifest's directory;
/// `regions` may be empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub source_id: String,
    pub label: String,
    pub hierarchy: String,
    pub regions: String,
}

pub fn load_manifest(path: &Path) -> Result<Vec<LabeledScreen>, MotifError> {
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| MotifError::Manifest(format!("{}: {e}", path.display())))?;
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for row in reader.deserialize::<ManifestRecord>() {
        let row = row.map_err(|e| MotifError::Manifest(e.to_string()))?;
        if !seen.insert(row.source_id.clone()) {
            return Err(MotifError::DuplicateSourceId(row.source_id));
        }
        let label: MotifLabel = row.label.parse()?;
        let regions: Option<PathBuf> =
            (!row.regions.is_empty()).then(|| base.join(&row.regions));
        let snapshot = UiSnapshot::load(&base.join(&row.hierarchy), regions.as_deref())?;
        out.push(LabeledScreen {
            snapshot,
            label,
            source_id: row.source_id,
        });
    }
    Ok(out)
}

/// Writes each screen as `<source_id>.xml` (+ `.regions.txt` when it has
/// recognizer regions) next to a `manifest.csv`.
pub fn write_manifest(dir: &Path, screens: &[LabeledScreen]) -> Result<PathBuf, MotifError> {
    let io = |e: std::io::Error| MotifError::Manifest(e.to_string());
    fs::create_dir_all(dir).map_err(io)?;
    let manifest = dir.join("manifest.csv");
    let mut writer = csv::Writer::from_path(&manifest).map_err(|e| MotifError::Manifest(e.to_string()))?;
    for screen in screens {
        let hierarchy = format!("{}.xml", screen.source_id);
        fs::write(dir.join(&hierarchy), serialize_document(&screen.snapshot)).map_err(io)?;
        let external: Vec<_> = screen
            .snapshot
            .text_regions
            .iter()
            .filter(|r| r.source == RegionSource::ExternalRecognizer)
            .cloned()
            .collect();
        let regions = if external.is_empty() {
            String::new()
        } else {
            let name = format!("{}.regions.txt", screen.source_id);
            fs::write(dir.join(&name), serialize_text_regions(&external)).map_err(io)?;
            name
        };
        writer
            .serialize(ManifestRecord {
                source_id: screen.source_id.clone(),
                label: screen.label.to_string(),
                hierarchy,
                regions,
            })
            .map_err(|e| MotifError::Manifest(e.to_string()))?;
    }
    writer.flush().map_err(io)?;
    Ok(manifest)
}
