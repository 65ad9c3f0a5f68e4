//! Closed-form calculators: capsule network parameter counts, observation
//! data sizes per representation mode, and maze state-space growth.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::env::{ObsMode, ObservationSpec};
use crate::error::{Error, Result};
use crate::neural::{conv_output_size, LayerSpec};

/// Capsule network shape. Primary capsules are `primary_caps` groups of
/// `primary_dim` channels over the primary conv's output grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapsNetSpec {
    pub height: usize,
    pub width: usize,
    pub channels: usize,
    pub conv_kernel: usize,
    pub conv_stride: usize,
    pub conv_filters: usize,
    pub caps_kernel: usize,
    pub caps_stride: usize,
    pub primary_caps: usize,
    pub primary_dim: usize,
    pub class_caps: usize,
    pub class_dim: usize,
}

impl CapsNetSpec {
    pub fn square(size: usize, channels: usize) -> Self {
        CapsNetSpec {
            height: size,
            width: size,
            channels,
            conv_kernel: 9,
            conv_stride: 1,
            conv_filters: 256,
            caps_kernel: 9,
            caps_stride: 2,
            primary_caps: 32,
            primary_dim: 8,
            class_caps: 16,
            class_dim: 16,
        }
    }

    pub fn conv_layer(&self) -> LayerSpec {
        LayerSpec::Conv2d {
            in_ch: self.channels,
            out_ch: self.conv_filters,
            kernel: self.conv_kernel,
            stride: self.conv_stride,
        }
    }

    pub fn primary_layer(&self) -> LayerSpec {
        LayerSpec::Conv2d {
            in_ch: self.conv_filters,
            out_ch: self.primary_caps * self.primary_dim,
            kernel: self.caps_kernel,
            stride: self.caps_stride,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapsNetCount {
    /// `(h, w)` after the first conv.
    pub conv_grid: (usize, usize),
    /// `(h, w)` of the primary capsule grid.
    pub caps_grid: (usize, usize),
    pub conv: u64,
    pub primary_caps: u64,
    pub capsule_layer: u64,
    pub total: u64,
}

/// Count weights layer by layer. The capsule layer counts one
/// `primary_dim x class_dim` transformation matrix per (primary capsule, class
/// capsule) pair and nothing for routing.
pub fn capsnet_param_count(spec: &CapsNetSpec) -> Result<CapsNetCount> {
    let grid = |h: usize, w: usize, k: usize, s: usize| -> Result<(usize, usize)> {
        let f = |n| conv_output_size(n, k, s).map_err(|e| Error::InvalidSpec(format!("capsule net: {e}")));
        Ok((f(h)?, f(w)?))
    };
    let conv_grid = grid(spec.height, spec.width, spec.conv_kernel, spec.conv_stride)?;
    let caps_grid = grid(conv_grid.0, conv_grid.1, spec.caps_kernel, spec.caps_stride)?;
    let conv = spec.conv_layer().param_count();
    let primary_caps = spec.primary_layer().param_count();
    let capsules = (caps_grid.0 * caps_grid.1 * spec.primary_caps) as u64;
    let capsule_layer = capsules * (spec.primary_dim * spec.class_caps * spec.class_dim) as u64;
    Ok(CapsNetCount { conv_grid, caps_grid, conv, primary_caps, capsule_layer, total: conv + primary_caps + capsule_layer })
}

/// `(input size, total parameters)` for square inputs of the given sizes.
pub fn param_growth_curve(channels: usize, sizes: &[usize]) -> Result<Vec<(usize, u64)>> {
    sizes.iter().map(|&s| Ok((s, capsnet_param_count(&CapsNetSpec::square(s, channels))?.total))).collect()
}

pub fn write_growth_csv<W: Write>(out: W, curve: &[(usize, u64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["input_size", "total_params"])?;
    for (s, t) in curve {
        w.write_record([s.to_string(), t.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Number of values in one observation of the given mode and `(width, height, channels)`.
pub fn repr_data_size(mode: ObsMode, width: usize, height: usize, channels: usize) -> Result<u64> {
    Ok(ObservationSpec::new(mode, width, height, channels)?.data_size() as u64)
}

/// The four Deep Line Wars representation modes at their default resolutions.
pub fn line_wars_representations() -> Vec<(ObsMode, [usize; 3], u64)> {
    [
        (ObsMode::RawImage, [800, 600, 3]),
        (ObsMode::Matrix, [15, 10, 5]),
        (ObsMode::HeatmapRgb, [15, 10, 3]),
        (ObsMode::HeatmapGray, [15, 10, 1]),
    ]
    .into_iter()
    .map(|(m, d)| (m, d, repr_data_size(m, d[0], d[1], d[2]).expect("valid table dims")))
    .collect()
}

/// How many times smaller the grayscale heatmap is than the raw image.
pub fn image_to_gray_ratio() -> u64 {
    let t = line_wars_representations();
    t[0].2 / t[3].2
}

pub use crate::maze::maze_state_space;
