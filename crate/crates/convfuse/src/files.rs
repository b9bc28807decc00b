//! PPM images and tensor containers on disk.

use std::fs;
use std::path::Path;

use convfuse_core::container::Container;
use convfuse_core::data::{decode_ppm, encode_ppm, MeanImage};
use convfuse_core::models::{build_named, ModelParams, NetworkSpec, MINI_INPUT_SHAPE};
use convfuse_core::Tensor;

use crate::error::{Error, Result};

/// Container entry holding a mean image.
pub const MEAN_ENTRY: &str = "mean";
/// Spec name recorded in mean image containers.
pub const MEAN_SPEC_NAME: &str = "mean_image";

pub fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(Error::io(path))
}

/// Writes `bytes`, creating missing parent directories.
pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(Error::io(parent))?;
    }
    fs::write(path, bytes).map_err(Error::io(path))
}

pub fn load_ppm(path: &Path) -> Result<Tensor> {
    decode_ppm(&read_bytes(path)?).map_err(Error::file(path))
}

pub fn save_ppm(path: &Path, img: &Tensor) -> Result<()> {
    write_bytes(path, &encode_ppm(img).map_err(Error::file(path))?)
}

pub fn read_container(path: &Path) -> Result<Container> {
    Container::decode(&read_bytes(path)?).map_err(Error::file(path))
}

pub fn write_container(path: &Path, container: &Container) -> Result<()> {
    write_bytes(path, &container.encode())
}

pub fn save_mean_image(path: &Path, mean: &MeanImage) -> Result<()> {
    let container = Container {
        spec_name: MEAN_SPEC_NAME.into(),
        seed: 0,
        entries: vec![(MEAN_ENTRY.into(), mean.tensor().clone())],
    };
    write_container(path, &container)
}

pub fn load_mean_image(path: &Path) -> Result<MeanImage> {
    let container = read_container(path)?;
    let mean = container
        .get(MEAN_ENTRY)
        .ok_or_else(|| Error::data(format!("{}: no {MEAN_ENTRY:?} entry", path.display())))?;
    match mean.shape() {
        [3, h, w] if h == w => Ok(MeanImage(mean.clone())),
        other => Err(Error::data(format!(
            "{}: mean image has shape {other:?}, expected [3, S, S]",
            path.display()
        ))),
    }
}

pub fn save_params(path: &Path, spec: &NetworkSpec, params: &ModelParams) -> Result<()> {
    write_container(path, &params.to_container(spec))
}

/// Reads a parameter file and rebuilds the desk-scale spec it names.
pub fn load_params(path: &Path) -> Result<(NetworkSpec, ModelParams)> {
    let container = read_container(path)?;
    let spec = build_named(&container.spec_name, &MINI_INPUT_SHAPE).map_err(Error::file(path))?;
    let params = ModelParams::from_container(&spec, &container).map_err(Error::file(path))?;
    Ok((spec, params))
}
