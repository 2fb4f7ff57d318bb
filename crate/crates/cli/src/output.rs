use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use mrrbf::learning::TrainRecord;
use mrrbf::mapexport::{export_json, render_svg, MapSnapshot, SvgStyle};
use serde_json::Value;

use crate::config::{runtime, Failure};

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| runtime(format!("{}: {e}", dir.display())))?;
    let fail = |e: std::io::Error| runtime(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(contents).map_err(fail)?;
    tmp.as_file().sync_all().map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

pub fn write_json(path: &Path, value: &Value) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(runtime)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// `epoch,mean_error,width_layer_1..N`, one row per epoch.
pub fn curve_csv(curve: &[TrainRecord]) -> String {
    let layers = curve.first().map_or(0, |r| r.width_per_layer.len());
    let mut out = String::from("epoch,mean_error");
    for l in 1..=layers {
        let _ = write!(out, ",width_layer_{l}");
    }
    out.push('\n');
    for r in curve {
        let _ = write!(out, "{},{}", r.epoch, r.mean_error);
        for w in &r.width_per_layer {
            let _ = write!(out, ",{w}");
        }
        out.push('\n');
    }
    out
}

/// Writes `<stem>.json` and `<stem>.svg` for one snapshot.
pub fn write_map(
    dir: &Path,
    stem: &str,
    snapshot: &MapSnapshot,
    class_names: &[String],
    title: String,
    config: &Value,
) -> Result<(), Failure> {
    let json = export_json(snapshot, Some(class_names), Some(config)).map_err(runtime)?;
    write_atomic(&dir.join(format!("{stem}.json")), json.as_bytes())?;
    let style = SvgStyle {
        title: Some(title),
        ..SvgStyle::default()
    };
    let svg = render_svg(snapshot, class_names, &style).map_err(runtime)?;
    write_atomic(&dir.join(format!("{stem}.svg")), svg.as_bytes())
}
