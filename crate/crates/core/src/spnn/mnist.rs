//! MNIST IDX file ingestion.
//!
//! Reads the standard ubyte format (big-endian header, magic 0x803 for image
//! tensors and 0x801 for label vectors). Files are expected uncompressed at
//! the paths the caller provides; [`default_mnist_dir`] resolves the
//! conventional location.

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::{Path, PathBuf};

use byteorder::{BigEndian, ReadBytesExt};
use ndarray::Array3;

use crate::error::{Error, Result};

const IMAGE_MAGIC: u32 = 0x0000_0803;
const LABEL_MAGIC: u32 = 0x0000_0801;

/// One split of the dataset: `images[(k, y, x)]` is a raw grayscale byte.
#[derive(Debug, Clone)]
pub struct MnistSplit {
    pub images: Array3<u8>,
    pub labels: Vec<u8>,
}

impl MnistSplit {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Directory holding the four canonical IDX files: the `PHOTONVAR_MNIST_DIR`
/// environment variable if set, otherwise `data/mnist` relative to the
/// working directory.
pub fn default_mnist_dir() -> PathBuf {
    match std::env::var_os("PHOTONVAR_MNIST_DIR") {
        Some(dir) => PathBuf::from(dir),
        None => PathBuf::from("data/mnist"),
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::io_at(path, e))
}

/// Load an IDX image tensor (magic 0x803) as raw bytes.
pub fn load_images(path: &Path) -> Result<Array3<u8>> {
    let mut r = open(path)?;
    let magic = r.read_u32::<BigEndian>().map_err(|e| Error::io_at(path, e))?;
    if magic != IMAGE_MAGIC {
        return Err(Error::Format(format!(
            "{}: magic 0x{magic:08x}, expected image tensor 0x{IMAGE_MAGIC:08x}",
            path.display()
        )));
    }
    let n = r.read_u32::<BigEndian>().map_err(|e| Error::io_at(path, e))? as usize;
    let rows = r.read_u32::<BigEndian>().map_err(|e| Error::io_at(path, e))? as usize;
    let cols = r.read_u32::<BigEndian>().map_err(|e| Error::io_at(path, e))? as usize;
    let mut buf = vec![0u8; n * rows * cols];
    r.read_exact(&mut buf)
        .map_err(|e| Error::Format(format!("{}: truncated pixel data: {e}", path.display())))?;
    Array3::from_shape_vec((n, rows, cols), buf)
        .map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

/// Load an IDX label vector (magic 0x801).
pub fn load_labels(path: &Path) -> Result<Vec<u8>> {
    let mut r = open(path)?;
    let magic = r.read_u32::<BigEndian>().map_err(|e| Error::io_at(path, e))?;
    if magic != LABEL_MAGIC {
        return Err(Error::Format(format!(
            "{}: magic 0x{magic:08x}, expected label vector 0x{LABEL_MAGIC:08x}",
            path.display()
        )));
    }
    let n = r.read_u32::<BigEndian>().map_err(|e| Error::io_at(path, e))? as usize;
    let mut buf = vec![0u8; n];
    r.read_exact(&mut buf)
        .map_err(|e| Error::Format(format!("{}: truncated label data: {e}", path.display())))?;
    Ok(buf)
}

fn load_split(dir: &Path, images: &str, labels: &str) -> Result<MnistSplit> {
    let images = load_images(&dir.join(images))?;
    let labels = load_labels(&dir.join(labels))?;
    if images.shape()[0] != labels.len() {
        return Err(Error::Format(format!(
            "{} images but {} labels",
            images.shape()[0],
            labels.len()
        )));
    }
    if labels.iter().any(|&l| l > 9) {
        return Err(Error::Format("label outside 0..=9".into()));
    }
    Ok(MnistSplit { images, labels })
}

/// Load the training split (`train-images-idx3-ubyte` / `train-labels-idx1-ubyte`).
pub fn load_train(dir: &Path) -> Result<MnistSplit> {
    load_split(dir, "train-images-idx3-ubyte", "train-labels-idx1-ubyte")
}

/// Load the test split (`t10k-images-idx3-ubyte` / `t10k-labels-idx1-ubyte`).
pub fn load_test(dir: &Path) -> Result<MnistSplit> {
    load_split(dir, "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte")
}

#[cfg(test)]
pub(crate) fn test_data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist")
}
