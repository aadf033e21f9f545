//! IDX container loader (the MNIST on-disk format): big-endian magic and
//! dims header followed by raw unsigned bytes. Pixels are scaled to [0, 1].

use std::io::Read;
use std::path::Path;

use super::{DataError, Dataset};
use crate::matrix::Matrix;

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

fn read_file(path: &Path) -> Result<Vec<u8>, DataError> {
    let mut buf = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut buf))
        .map_err(|e| DataError::Io { path: path.display().to_string(), message: e.to_string() })?;
    Ok(buf)
}

fn read_u32_be(buf: &[u8], offset: usize, path: &Path, what: &str) -> Result<u32, DataError> {
    let bytes: [u8; 4] = buf
        .get(offset..offset + 4)
        .and_then(|s| s.try_into().ok())
        .ok_or_else(|| DataError::Truncated {
            path: path.display().to_string(),
            what: format!("{what} header"),
            expected: offset + 4,
            got: buf.len(),
        })?;
    Ok(u32::from_be_bytes(bytes))
}

/// Load an images/labels IDX pair into a flat-pixel dataset.
pub fn load_idx(images_path: &Path, labels_path: &Path) -> Result<Dataset, DataError> {
    let img_buf = read_file(images_path)?;
    let magic = read_u32_be(&img_buf, 0, images_path, "image")?;
    if magic != IMAGES_MAGIC {
        return Err(DataError::BadMagic {
            path: images_path.display().to_string(),
            expected: IMAGES_MAGIC,
            got: magic,
        });
    }
    let n_images = read_u32_be(&img_buf, 4, images_path, "image")? as usize;
    let rows = read_u32_be(&img_buf, 8, images_path, "image")? as usize;
    let cols = read_u32_be(&img_buf, 12, images_path, "image")? as usize;
    let d = rows * cols;
    let pixel_bytes = img_buf.len() - 16;
    if pixel_bytes != n_images * d {
        return Err(DataError::Truncated {
            path: images_path.display().to_string(),
            what: "pixel data".into(),
            expected: n_images * d,
            got: pixel_bytes,
        });
    }

    let lbl_buf = read_file(labels_path)?;
    let magic = read_u32_be(&lbl_buf, 0, labels_path, "label")?;
    if magic != LABELS_MAGIC {
        return Err(DataError::BadMagic {
            path: labels_path.display().to_string(),
            expected: LABELS_MAGIC,
            got: magic,
        });
    }
    let n_labels = read_u32_be(&lbl_buf, 4, labels_path, "label")? as usize;
    let label_bytes = lbl_buf.len() - 8;
    if label_bytes != n_labels {
        return Err(DataError::Truncated {
            path: labels_path.display().to_string(),
            what: "label data".into(),
            expected: n_labels,
            got: label_bytes,
        });
    }
    if n_images != n_labels {
        return Err(DataError::CountMismatch { images: n_images, labels: n_labels });
    }

    let data: Vec<f64> = img_buf[16..].iter().map(|&b| f64::from(b) / 255.0).collect();
    let features = Matrix::from_vec(n_images, d, data);
    let labels: Vec<usize> = lbl_buf[8..].iter().map(|&b| b as usize).collect();
    let name = images_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "idx".into());
    Dataset::new(features, Some(labels), name)
}
