//! Big-endian IDX files as used by MNIST.

use std::collections::BTreeSet;
use std::path::Path;

use super::LabeledDataset;
use crate::error::{Error, Result};

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

/// Which digits to keep and how many of each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxQuery {
    pub keep_classes: BTreeSet<u8>,
    /// Per-class cap, aligned with the ascending order of `keep_classes`.
    /// A single entry applies to every class.
    pub max_per_class: Option<Vec<usize>>,
}

impl IdxQuery {
    pub fn all_digits() -> Self {
        IdxQuery {
            keep_classes: (0..10).collect(),
            max_per_class: None,
        }
    }

    fn cap(&self, class_rank: usize) -> Option<usize> {
        self.max_per_class.as_ref().map(|caps| match caps.as_slice() {
            [one] => *one,
            many => many[class_rank],
        })
    }
}

/// Splits `total` into `classes` caps that differ by at most one, larger caps first.
///
/// `split_caps(1269, 5)` gives `[254, 254, 254, 254, 253]`.
pub fn split_caps(total: usize, classes: usize) -> Vec<usize> {
    let (base, extra) = (total / classes, total % classes);
    (0..classes).map(|i| base + usize::from(i < extra)).collect()
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

fn be_u32(bytes: &[u8], offset: usize, path: &Path) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Idx {
            path: path.to_path_buf(),
            message: "truncated header".into(),
        })
}

/// Loads IDX images + labels, keeping only `query.keep_classes` (relabeled
/// densely in ascending digit order) and the first `cap` instances of each
/// class in file order. Pixels are scaled to [0, 1] by dividing by 255.
pub fn load_idx(
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
    query: &IdxQuery,
) -> Result<LabeledDataset> {
    let (ip, lp) = (images_path.as_ref(), labels_path.as_ref());
    parse_idx(&read(ip)?, ip, &read(lp)?, lp, query)
}

/// [`load_idx`] over in-memory file contents; the paths only label errors.
pub fn parse_idx(
    images: &[u8],
    images_path: &Path,
    labels: &[u8],
    labels_path: &Path,
    query: &IdxQuery,
) -> Result<LabeledDataset> {
    let idx_err = |path: &Path, message: String| Error::Idx {
        path: path.to_path_buf(),
        message,
    };

    let magic = be_u32(images, 0, images_path)?;
    if magic != IMAGES_MAGIC {
        return Err(idx_err(
            images_path,
            format!("bad magic number {magic:#010x}, expected {IMAGES_MAGIC:#010x}"),
        ));
    }
    let count = be_u32(images, 4, images_path)? as usize;
    let rows = be_u32(images, 8, images_path)? as usize;
    let cols = be_u32(images, 12, images_path)? as usize;
    let pixels = rows * cols;
    if pixels == 0 {
        return Err(idx_err(images_path, "zero-sized images".into()));
    }
    let body = &images[16..];
    if body.len() < count * pixels {
        return Err(idx_err(
            images_path,
            format!(
                "truncated: header promises {count} images of {pixels} bytes, found {} bytes",
                body.len()
            ),
        ));
    }

    let magic = be_u32(labels, 0, labels_path)?;
    if magic != LABELS_MAGIC {
        return Err(idx_err(
            labels_path,
            format!("bad magic number {magic:#010x}, expected {LABELS_MAGIC:#010x}"),
        ));
    }
    let label_count = be_u32(labels, 4, labels_path)? as usize;
    let label_body = &labels[8..];
    if label_body.len() < label_count {
        return Err(idx_err(
            labels_path,
            format!(
                "truncated: header promises {label_count} labels, found {}",
                label_body.len()
            ),
        ));
    }
    if label_count != count {
        return Err(idx_err(labels_path, format!("{label_count} labels for {count} images")));
    }

    let classes: Vec<u8> = query.keep_classes.iter().copied().collect();
    if let Some(caps) = &query.max_per_class {
        if caps.len() != 1 && caps.len() != classes.len() {
            return Err(Error::InvalidConfig(format!(
                "{} per-class caps for {} kept classes",
                caps.len(),
                classes.len()
            )));
        }
    }
    let mut taken = vec![0usize; classes.len()];
    let mut features = Vec::new();
    let mut dense = Vec::new();
    for (i, &digit) in label_body[..count].iter().enumerate() {
        let Some(rank) = classes.iter().position(|&c| c == digit) else {
            continue;
        };
        if query.cap(rank).is_some_and(|cap| taken[rank] >= cap) {
            continue;
        }
        taken[rank] += 1;
        features.extend(body[i * pixels..(i + 1) * pixels].iter().map(|&p| f64::from(p) / 255.0));
        dense.push(rank);
    }
    let class_names = classes.iter().map(u8::to_string).collect();
    LabeledDataset::new(features, pixels, dense, class_names)
}
