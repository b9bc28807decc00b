//! Deterministic two-class synthetic keyframe corpus.
//!
//! Benign videos are drawn from oriented sinusoidal gratings on a cool
//! palette; porn videos from clusters of Gaussian blobs on a warm palette.
//! Each video fixes a style (palette jitter, frequency, blob layout) that
//! its shots share; each shot adds phase/position drift, a brightness
//! offset and pixel noise.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::manifest::FrameRecord;
use crate::error::{Error, Result};
use crate::score::ClassLabel;
use crate::tensor::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthConfig {
    pub videos_per_class: usize,
    pub shots_per_video: usize,
    pub side: usize,
    pub seed: u64,
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if self.videos_per_class == 0 || self.shots_per_video == 0 || self.side == 0 {
            return Err(Error::invalid(
                "video count, shot count and side must all be at least 1",
            ));
        }
        if self.shots_per_video >= 1 << 16 || self.videos_per_class >= 1 << 40 {
            return Err(Error::invalid("too many shots or videos"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthVideo {
    pub id: String,
    pub label: ClassLabel,
    /// Position in the corpus; selects the video's random stream.
    pub index: u64,
}

/// Benign videos first, then porn, each numbered from zero.
pub fn synth_videos(cfg: &SynthConfig) -> Result<Vec<SynthVideo>> {
    cfg.validate()?;
    let mut out = Vec::with_capacity(2 * cfg.videos_per_class);
    for label in ClassLabel::ALL {
        for i in 0..cfg.videos_per_class {
            out.push(SynthVideo {
                id: alloc::format!("{}_{i:04}", label.as_str()),
                label,
                index: out.len() as u64,
            });
        }
    }
    Ok(out)
}

/// Manifest rows for the corpus, images under `frames/`, fold 0.
pub fn synth_records(cfg: &SynthConfig) -> Result<Vec<FrameRecord>> {
    let videos = synth_videos(cfg)?;
    Ok(videos
        .iter()
        .flat_map(|v| {
            (0..cfg.shots_per_video).map(move |s| FrameRecord {
                video_id: v.id.clone(),
                shot_index: s as u32,
                image_path: alloc::format!("frames/{}_{s:03}.ppm", v.id),
                label: v.label,
                fold: 0,
            })
        })
        .collect())
}

fn stream(seed: u64, video: u64, shot: Option<usize>) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((video << 16) | shot.map_or(0, |s| s as u64 + 1));
    rng
}

struct Blob {
    cy: f64,
    cx: f64,
    sigma: f64,
    amp: f64,
}

enum Pattern {
    Grating { freq: f64, angle: f64, amp: f64 },
    Blobs(Vec<Blob>),
}

struct Style {
    base: [f64; 3],
    tint: [f64; 3],
    pattern: Pattern,
}

fn normal(mean: f64, std: f64) -> Normal<f64> {
    Normal::new(mean, std).expect("positive std")
}

fn video_style(cfg: &SynthConfig, video: &SynthVideo) -> Style {
    let mut rng = stream(cfg.seed, video.index, None);
    let side = cfg.side as f64;
    let jitter = normal(0.0, 14.0);
    match video.label {
        ClassLabel::Benign => {
            let base = [92.0, 112.0, 138.0].map(|b: f64| b + jitter.sample(&mut rng));
            Style {
                base,
                tint: [0.8, 1.0, 1.0],
                pattern: Pattern::Grating {
                    freq: rng.random_range(0.12..0.40),
                    angle: rng.random_range(0.0..PI),
                    amp: rng.random_range(25.0..45.0),
                },
            }
        }
        ClassLabel::Porn => {
            let base = [150.0, 108.0, 92.0].map(|b: f64| b + jitter.sample(&mut rng));
            let count = rng.random_range(2..=4);
            let blobs = (0..count)
                .map(|_| Blob {
                    cy: rng.random_range(0.2 * side..0.8 * side),
                    cx: rng.random_range(0.2 * side..0.8 * side),
                    sigma: rng.random_range(side / 12.0..side / 5.0),
                    amp: rng.random_range(35.0..60.0),
                })
                .collect();
            Style {
                base,
                tint: [1.0, 0.8, 0.7],
                pattern: Pattern::Blobs(blobs),
            }
        }
    }
}

/// Renders one keyframe as a `[3, side, side]` tensor of integers 0..=255.
pub fn render_frame(cfg: &SynthConfig, video: &SynthVideo, shot: usize) -> Result<Tensor> {
    cfg.validate()?;
    if shot >= cfg.shots_per_video {
        return Err(Error::invalid(alloc::format!("shot {shot} out of range")));
    }
    let style = video_style(cfg, video);
    let mut rng = stream(cfg.seed, video.index, Some(shot));
    let side = cfg.side;
    let brightness = normal(0.0, 8.0).sample(&mut rng);
    let noise = normal(0.0, 6.0);
    let plane = side * side;
    let mut pattern = alloc::vec![0.0; plane];
    match &style.pattern {
        Pattern::Grating { freq, angle, amp } => {
            let phase = rng.random_range(0.0..2.0 * PI);
            let angle = angle + normal(0.0, 0.08).sample(&mut rng);
            let (s, c) = (libm::sin(angle), libm::cos(angle));
            for y in 0..side {
                for x in 0..side {
                    let t = freq * (x as f64 * c + y as f64 * s) + phase;
                    pattern[y * side + x] = amp * libm::sin(t);
                }
            }
        }
        Pattern::Blobs(blobs) => {
            let drift = normal(0.0, side as f64 / 15.0);
            let moved: Vec<(f64, f64, f64, f64)> = blobs
                .iter()
                .map(|b| {
                    (
                        b.cy + drift.sample(&mut rng),
                        b.cx + drift.sample(&mut rng),
                        b.sigma,
                        b.amp,
                    )
                })
                .collect();
            for y in 0..side {
                for x in 0..side {
                    let mut v = -20.0;
                    for &(cy, cx, sigma, amp) in &moved {
                        let (dy, dx) = (y as f64 - cy, x as f64 - cx);
                        let d2 = dy * dy + dx * dx;
                        v += amp * libm::exp(-d2 / (2.0 * sigma * sigma));
                    }
                    pattern[y * side + x] = v;
                }
            }
        }
    }
    let mut data = alloc::vec![0.0; 3 * plane];
    for ch in 0..3 {
        for p in 0..plane {
            let v = style.base[ch] + brightness + style.tint[ch] * pattern[p] + noise.sample(&mut rng);
            data[ch * plane + p] = libm::round(v.clamp(0.0, 255.0));
        }
    }
    Tensor::new(&[3, side, side], data)
}
