//! Image decoding, the preprocessing chain, corpus manifests, video-grouped
//! fold assignment and the synthetic corpus generator.

mod folds;
mod manifest;
mod ppm;
mod preprocess;
mod synth;

pub use folds::make_folds;
pub use manifest::{FrameRecord, Manifest, DEFAULT_FOLDS};
pub use ppm::{decode_ppm, encode_ppm};
pub use preprocess::{
    compute_mean_image, crop_offsets, crop_window, crop_windows, resize_to, subtract_mean, CropMode, MeanImage,
    TRAIN_WINDOWS,
};
pub use synth::{render_frame, synth_records, synth_videos, SynthConfig, SynthVideo};
