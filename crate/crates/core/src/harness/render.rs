//! Binary PPM snapshots of a configuration's birth-time plane.

use std::io::Write;

use crate::grid::{Configuration, NEVER};

pub const DEFAULT_SHADE_PERIOD: u32 = 8;

/// Grey level of a cell born at step `t > 0`.
pub fn shade(t: u32, period: u32) -> u8 {
    if period <= 1 {
        return 64;
    }
    (64 + 160 * ((t - 1) % period) / (period - 1)) as u8
}

/// RGB value of a cell with birth time `birth`.
pub fn cell_color(birth: u32, period: u32) -> u8 {
    match birth {
        NEVER => 255,
        0 => 0,
        t => shade(t, period),
    }
}

/// P6 image, one pixel per cell, top row of the box first.
pub fn render_ppm(config: &Configuration, shade_period: u32) -> Vec<u8> {
    let (w, h) = (config.width(), config.height());
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    out.reserve(3 * w * h);
    let births = config.birth_plane();
    for y in (0..h).rev() {
        for &b in &births[y * w..(y + 1) * w] {
            let c = cell_color(b, shade_period);
            out.extend_from_slice(&[c, c, c]);
        }
    }
    out
}

pub fn write_ppm<W: Write>(mut out: W, config: &Configuration, shade_period: u32) -> std::io::Result<()> {
    out.write_all(&render_ppm(config, shade_period))
}
