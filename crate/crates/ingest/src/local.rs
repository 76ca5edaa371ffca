//! Local inputs: `<doc_id>.v<N>.txt` version files and seed lists.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::LazyLock;

use chrono::DateTime;
use regex::Regex;

use crate::{IngestError, RawVersion, Source};

static VERSION_FILE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"^(.+)\.v(\d+)\.txt$").unwrap());

/// Versions grouped by document id, each ascending by version number.
/// Files carry no timestamps, so version N is stamped N seconds after the
/// Unix epoch; only the order matters downstream.
pub fn load_local_dir(dir: &Path) -> Result<BTreeMap<String, Vec<RawVersion>>, IngestError> {
    let mut out: BTreeMap<String, Vec<RawVersion>> = BTreeMap::new();
    let entries = std::fs::read_dir(dir).map_err(|e| IngestError::io(dir, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| IngestError::io(dir, e))?;
        let name = entry.file_name();
        let Some(caps) = name.to_str().and_then(|n| VERSION_FILE.captures(n)) else {
            continue;
        };
        let Ok(n) = caps[2].parse::<u32>() else {
            continue;
        };
        let path = entry.path();
        let text = std::fs::read_to_string(&path).map_err(|e| IngestError::io(&path, e))?;
        out.entry(caps[1].to_string()).or_default().push(RawVersion {
            source: Source::LocalFile,
            identifier: caps[1].to_string(),
            timestamp: DateTime::from_timestamp(i64::from(n), 0).expect("small timestamps are valid"),
            revision_id: u64::from(n),
            raw_payload: text,
        });
    }
    for v in out.values_mut() {
        v.sort_by_key(|r| r.revision_id);
    }
    Ok(out)
}

/// One identifier per line; blank lines and `#` comments are skipped.
pub fn read_seed_list(path: &Path) -> Result<Vec<String>, IngestError> {
    let text = std::fs::read_to_string(path).map_err(|e| IngestError::io(path, e))?;
    Ok(text
        .lines()
        .map(|l| l.split_once('#').map_or(l, |(a, _)| a).trim())
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect())
}
