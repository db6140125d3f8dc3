//! IDX files: a big-endian magic number `0x0000 08 nd` (unsigned bytes, `nd`
//! dimensions), `nd` big-endian `u32` sizes, then the raw payload.

use std::path::Path;

use crate::data::{one_hot_matrix, Dataset, Meta, Source, CLASSES};
use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdxFile {
    pub magic: u32,
    pub dims: Vec<u32>,
    pub payload: Vec<u8>,
}

fn format_error(path: &Path, offset: usize, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_owned(),
        offset: offset as u64,
        message: message.into(),
    }
}

fn read_u32(bytes: &[u8], offset: usize, path: &Path, what: &str) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes(b.try_into().expect("4 bytes")))
        .ok_or_else(|| format_error(path, bytes.len(), format!("file ends inside the {what}")))
}

/// Parses an image (`0x803`) or label (`0x801`) file. `path` only labels
/// errors.
pub fn decode_idx(bytes: &[u8], path: &Path) -> Result<IdxFile> {
    let magic = read_u32(bytes, 0, path, "magic number")?;
    let ndims =
        match magic {
            IMAGES_MAGIC => 3,
            LABELS_MAGIC => 1,
            other => return Err(format_error(
                path,
                0,
                format!(
                    "magic 0x{other:08x} is neither 0x{IMAGES_MAGIC:08x} nor 0x{LABELS_MAGIC:08x}"
                ),
            )),
        };
    let dims = (0..ndims)
        .map(|i| read_u32(bytes, 4 + 4 * i, path, "dimension header"))
        .collect::<Result<Vec<_>>>()?;
    let header = 4 + 4 * ndims;
    let expected = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d as usize))
        .ok_or_else(|| format_error(path, 4, "dimension product overflows"))?;
    let payload = &bytes[header..];
    if payload.len() < expected {
        return Err(format_error(
            path,
            bytes.len(),
            format!("truncated payload: {} of {expected} bytes", payload.len()),
        ));
    }
    if payload.len() > expected {
        return Err(format_error(
            path,
            header + expected,
            format!(
                "{} bytes past the declared payload",
                payload.len() - expected
            ),
        ));
    }
    Ok(IdxFile {
        magic,
        dims,
        payload: payload.to_vec(),
    })
}

pub fn encode_idx(file: &IdxFile) -> Vec<u8> {
    let mut out = Vec::with_capacity(4 + 4 * file.dims.len() + file.payload.len());
    out.extend_from_slice(&file.magic.to_be_bytes());
    for d in &file.dims {
        out.extend_from_slice(&d.to_be_bytes());
    }
    out.extend_from_slice(&file.payload);
    out
}

pub fn read_idx(path: &Path) -> Result<IdxFile> {
    let bytes = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })?;
    decode_idx(&bytes, path)
}

pub fn write_idx(path: &Path, file: &IdxFile) -> Result<()> {
    std::fs::write(path, encode_idx(file)).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

/// Loads an image/label file pair as a dataset: each image flattened
/// row-major into a column scaled by 1/255, labels one-hot.
///
/// `split` must be [`Source::MnistTrain`] or [`Source::MnistTest`].
pub fn load_mnist(images: &Path, labels: &Path, split: Source) -> Result<Dataset> {
    if !matches!(split, Source::MnistTrain | Source::MnistTest) {
        return Err(Error::config(format!("{split:?} is not an MNIST split")));
    }
    let img = read_idx(images)?;
    if img.magic != IMAGES_MAGIC {
        return Err(format_error(
            images,
            0,
            "expected an image file (magic 0x00000803)",
        ));
    }
    let lab = read_idx(labels)?;
    if lab.magic != LABELS_MAGIC {
        return Err(format_error(
            labels,
            0,
            "expected a label file (magic 0x00000801)",
        ));
    }
    let n = img.dims[0] as usize;
    if lab.dims[0] as usize != n {
        return Err(format_error(
            labels,
            4,
            format!(
                "{} labels for {n} images in {}",
                lab.dims[0],
                images.display()
            ),
        ));
    }
    let pixels = img.dims[1] as usize * img.dims[2] as usize;

    let class_of = |i: usize| -> Result<usize> {
        let l = lab.payload[i] as usize;
        if l >= CLASSES {
            return Err(format_error(
                labels,
                8 + i,
                format!("label {l} is not a digit"),
            ));
        }
        Ok(l)
    };
    let classes = (0..n).map(class_of).collect::<Result<Vec<_>>>()?;

    let mut inputs = Matrix::zeros(pixels, n);
    for (j, image) in img.payload.chunks_exact(pixels.max(1)).enumerate() {
        for (p, &byte) in image.iter().enumerate() {
            inputs.set(p, j, f64::from(byte) / 255.0);
        }
    }
    Ok(Dataset {
        inputs,
        targets: one_hot_matrix(&classes)?,
        meta: Meta {
            source: split,
            seed: None,
            protocol: None,
        },
    })
}
