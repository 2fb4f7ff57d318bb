//! Winner-frequency maps of trained layers and their SVG / JSON renderings.

mod json;
mod snapshot;
mod svg;

pub use json::{export_json, parse_json, MapDocument, MAP_SCHEMA};
pub use snapshot::{snapshot_layer, MapSnapshot};
pub use svg::{render_svg, Glyph, SvgStyle};
