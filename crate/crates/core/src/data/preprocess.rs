//! Rescale to a square, subtract the mean image, cut fixed-size windows.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Windows produced per image in [`CropMode::Train`].
pub const TRAIN_WINDOWS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CropMode {
    /// Four corners and the center, each also mirrored horizontally.
    Train,
    /// Center window only.
    Test,
}

/// Bilinear stretch to `side x side` (aspect ratio is not kept). Sample
/// positions use pixel centers and clamp at the borders.
pub fn resize_to(img: &Tensor, side: usize) -> Result<Tensor> {
    let (c, h, w) = img.dims3("resize_to")?;
    if side == 0 {
        return Err(Error::invalid("resize side must be at least 1"));
    }
    if h == side && w == side {
        return Ok(img.clone());
    }
    let taps = |src: usize| -> Vec<(usize, usize, f64)> {
        let scale = src as f64 / side as f64;
        (0..side)
            .map(|o| {
                let pos = ((o as f64 + 0.5) * scale - 0.5).clamp(0.0, (src - 1) as f64);
                let lo = pos as usize;
                let hi = (lo + 1).min(src - 1);
                (lo, hi, pos - lo as f64)
            })
            .collect()
    };
    let ys = taps(h);
    let xs = taps(w);
    let src = img.data();
    let mut out = Vec::with_capacity(c * side * side);
    for ch in 0..c {
        let plane = &src[ch * h * w..(ch + 1) * h * w];
        for &(y0, y1, fy) in &ys {
            for &(x0, x1, fx) in &xs {
                let top = plane[y0 * w + x0] + fx * (plane[y0 * w + x1] - plane[y0 * w + x0]);
                let bottom = plane[y1 * w + x0] + fx * (plane[y1 * w + x1] - plane[y1 * w + x0]);
                out.push(top + fy * (bottom - top));
            }
        }
    }
    Tensor::new(&[c, side, side], out)
}

/// Per-pixel mean over a training set.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanImage(pub Tensor);

impl MeanImage {
    pub fn side(&self) -> usize {
        self.0.shape()[1]
    }

    pub fn tensor(&self) -> &Tensor {
        &self.0
    }
}

/// Averages `images` after resizing each to `side`.
pub fn compute_mean_image<I>(images: I, side: usize) -> Result<MeanImage>
where
    I: IntoIterator<Item = Tensor>,
{
    let mut sum: Option<Tensor> = None;
    let mut n = 0usize;
    for img in images {
        let img = resize_to(&img, side)?;
        match sum.as_mut() {
            Some(s) => s.add_assign(&img)?,
            None => sum = Some(img),
        }
        n += 1;
    }
    let mut sum = sum.ok_or(Error::Empty("mean image needs at least one frame"))?;
    sum.scale(1.0 / n as f64);
    Ok(MeanImage(sum))
}

pub fn subtract_mean(img: &Tensor, mean: &MeanImage) -> Result<Tensor> {
    img.sub(&mean.0)
}

/// `(y, x)` offsets of the corner and center windows, in window order:
/// top-left, top-right, bottom-left, bottom-right, center.
pub fn crop_offsets(side: usize, crop: usize) -> [(usize, usize); 5] {
    let far = side - crop;
    let mid = far / 2;
    [(0, 0), (0, far), (far, 0), (far, far), (mid, mid)]
}

/// Window `index` of the training set of ten: 0..5 follow [`crop_offsets`],
/// 5..10 are the same windows mirrored horizontally.
pub fn crop_window(img: &Tensor, crop: usize, index: usize) -> Result<Tensor> {
    let (c, h, w) = img.dims3("crop_window")?;
    if crop == 0 || crop > h || crop > w {
        return Err(Error::invalid(alloc::format!(
            "crop {crop} does not fit a {h}x{w} image"
        )));
    }
    if h != w {
        return Err(Error::shape(
            "crop_window expects a square image",
            img.shape(),
            &[c, h, h],
        ));
    }
    if index >= TRAIN_WINDOWS {
        return Err(Error::invalid(alloc::format!("window index {index} out of range")));
    }
    let (y0, x0) = crop_offsets(h, crop)[index % 5];
    let mirror = index >= 5;
    let src = img.data();
    let mut out = Vec::with_capacity(c * crop * crop);
    for ch in 0..c {
        for y in 0..crop {
            let row = &src[(ch * h + y0 + y) * w + x0..(ch * h + y0 + y) * w + x0 + crop];
            if mirror {
                out.extend(row.iter().rev());
            } else {
                out.extend_from_slice(row);
            }
        }
    }
    Tensor::new(&[c, crop, crop], out)
}

pub fn crop_windows(img: &Tensor, crop: usize, mode: CropMode) -> Result<Vec<Tensor>> {
    match mode {
        CropMode::Train => (0..TRAIN_WINDOWS).map(|i| crop_window(img, crop, i)).collect(),
        CropMode::Test => Ok(alloc::vec![crop_window(img, crop, 4)?]),
    }
}
