//! Small shared helpers for report output: label translation, number
//! formatting, and JSON emission.

use std::path::Path;
use std::time::Duration;

use cks_core::{NodeId, NodeIdMap};

use crate::{CliError, CliResult};

/// Rounds to twelve significant digits so reported values survive a
/// serialize/parse round trip without dragging noise bits along.
pub fn sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Milliseconds with microsecond resolution, for runtime columns.
pub fn elapsed_ms(d: Duration) -> f64 {
    (d.as_secs_f64() * 1_000_000.0).round() / 1000.0
}

/// Writes a JSON document (pretty-printed, trailing newline) to `out` or to
/// stdout when no path was given.
pub fn emit(out: Option<&Path>, doc: &serde_json::Value) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(doc)
        .map_err(|e| CliError::data(anyhow::Error::from(e)))?;
    text.push('\n');
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| {
            CliError::data(anyhow::anyhow!("cannot write {}: {e}", path.display()))
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Maps user-facing node labels to internal ids; an unknown label is a data
/// error naming the offending label.
pub fn resolve_labels(map: &NodeIdMap, labels: &[String]) -> CliResult<Vec<NodeId>> {
    labels
        .iter()
        .map(|l| {
            map.id(l)
                .ok_or_else(|| CliError::data(anyhow::anyhow!("unknown node label {l:?}")))
        })
        .collect()
}

/// Renders internal ids back to the labels they were loaded under.
pub fn labels_of(map: &NodeIdMap, ids: &[NodeId]) -> Vec<String> {
    ids.iter()
        .map(|&id| map.label(id).unwrap_or_default().to_string())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig12_trims_noise_and_keeps_specials() {
        assert_eq!(sig12(0.1 + 0.2), 0.3);
        assert_eq!(sig12(0.0), 0.0);
        assert_eq!(sig12(1.0), 1.0);
        assert!(sig12(f64::NAN).is_nan());
        assert_eq!(sig12(f64::INFINITY), f64::INFINITY);
        assert_eq!(sig12(1.0e-300), 1.0e-300);
    }

    #[test]
    fn elapsed_ms_has_microsecond_resolution() {
        assert_eq!(elapsed_ms(Duration::from_micros(1534)), 1.534);
        assert_eq!(elapsed_ms(Duration::from_millis(2)), 2.0);
    }
}
