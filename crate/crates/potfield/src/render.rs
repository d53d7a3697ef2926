//! PNG renderings of `PFLD` files. World `y` points up in the image.

use image::codecs::png::PngEncoder;
use image::{ImageEncoder, Rgb, RgbImage};

use crate::error::{Error, Result};
use crate::format::FieldFile;

/// Low (blue) to high (yellow).
pub const RAMP: [[u8; 3]; 5] = [
    [33, 49, 140],
    [34, 115, 190],
    [39, 170, 160],
    [140, 205, 80],
    [250, 230, 40],
];

pub const OFF_BAND: [u8; 3] = [128, 128, 128];
const BACKGROUND: [u8; 3] = [255, 255, 255];
const ARROW: [u8; 3] = [20, 20, 20];
/// Arrow glyphs are drawn for one pixel in every `ARROW_STEP` x `ARROW_STEP` block.
pub const ARROW_STEP: usize = 4;

/// Color of `t` in [0, 1], linear between the stops.
pub fn ramp(t: f64) -> [u8; 3] {
    let t = t.clamp(0.0, 1.0) * (RAMP.len() - 1) as f64;
    let i = (t.floor() as usize).min(RAMP.len() - 2);
    let f = t - i as f64;
    let mut out = [0u8; 3];
    for c in 0..3 {
        let a = RAMP[i][c] as f64;
        let b = RAMP[i + 1][c] as f64;
        out[c] = (a + (b - a) * f).round() as u8;
    }
    out
}

/// One field pixel becomes a `scale` x `scale` block.
pub fn render(field: &FieldFile, scale: u32) -> Result<RgbImage> {
    let scale = scale.max(1);
    match field.channels {
        1 => Ok(render_scalar(field, scale)),
        2 => Ok(render_vector(field, scale)),
        c => Err(Error::Unsupported(format!(
            "cannot render a field with {c} channels"
        ))),
    }
}

fn image_for(field: &FieldFile, scale: u32) -> RgbImage {
    RgbImage::new(
        field.grid.width as u32 * scale,
        field.grid.height as u32 * scale,
    )
}

fn fill_block(
    img: &mut RgbImage,
    field: &FieldFile,
    u: usize,
    v: usize,
    scale: u32,
    color: [u8; 3],
) {
    let row = (field.grid.height - 1 - v) as u32;
    for dy in 0..scale {
        for dx in 0..scale {
            img.put_pixel(u as u32 * scale + dx, row * scale + dy, Rgb(color));
        }
    }
}

fn render_scalar(field: &FieldFile, scale: u32) -> RgbImage {
    let on: Vec<usize> = (0..field.mask.len())
        .filter(|&i| field.mask[i] == 1.0)
        .collect();
    let range_of = |idx: &mut dyn Iterator<Item = usize>| {
        idx.map(|i| field.data[i] as f64)
            .filter(|x| x.is_finite())
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                (lo.min(x), hi.max(x))
            })
    };
    let (lo, hi) = if on.is_empty() {
        range_of(&mut (0..field.data.len()))
    } else {
        range_of(&mut on.iter().copied())
    };
    let mut img = image_for(field, scale);
    for v in 0..field.grid.height {
        for u in 0..field.grid.width {
            let i = field.grid.index(u, v);
            let x = field.data[i] as f64;
            let color = if (!on.is_empty() && field.mask[i] != 1.0) || !x.is_finite() {
                OFF_BAND
            } else if hi > lo {
                ramp((x - lo) / (hi - lo))
            } else {
                ramp(0.5)
            };
            fill_block(&mut img, field, u, v, scale, color);
        }
    }
    img
}

fn render_vector(field: &FieldFile, scale: u32) -> RgbImage {
    let (w, h) = (field.grid.width, field.grid.height);
    let vec_at = |i: usize| (field.data[2 * i] as f64, field.data[2 * i + 1] as f64);
    let mut img = image_for(field, scale);
    img.pixels_mut().for_each(|p| *p = Rgb(BACKGROUND));

    let anchors: Vec<(usize, usize)> = (0..h.div_ceil(ARROW_STEP))
        .flat_map(|j| (0..w.div_ceil(ARROW_STEP)).map(move |i| (i, j)))
        .map(|(i, j)| {
            (
                (i * ARROW_STEP + ARROW_STEP / 2).min(w - 1),
                (j * ARROW_STEP + ARROW_STEP / 2).min(h - 1),
            )
        })
        .collect();
    let max = anchors
        .iter()
        .map(|&(u, v)| field.grid.index(u, v))
        .filter(|&i| field.mask[i] == 1.0)
        .map(|i| {
            let (x, y) = vec_at(i);
            x.hypot(y)
        })
        .filter(|n| n.is_finite())
        .fold(0.0f64, f64::max);
    if max == 0.0 {
        return img;
    }
    let half = 0.45 * (ARROW_STEP as f64) * scale as f64;
    for (u, v) in anchors {
        let i = field.grid.index(u, v);
        let (x, y) = vec_at(i);
        let n = x.hypot(y);
        if field.mask[i] != 1.0 || !n.is_finite() || n <= 0.0 {
            continue;
        }
        // image rows grow downwards
        let (dx, dy) = (x / n, -y / n);
        let len = half * n / max;
        // centered on the block corner shared by its four middle pixels
        let cx = u as f64 * scale as f64;
        let cy = (h - v) as f64 * scale as f64;
        let tail = (cx - dx * len, cy - dy * len);
        let tip = (cx + dx * len, cy + dy * len);
        draw_line(&mut img, tail, tip);
        let head = 0.4 * len.max(1.0);
        for a in [2.6f64, -2.6f64] {
            let (s, c) = a.sin_cos();
            let hx = dx * c - dy * s;
            let hy = dx * s + dy * c;
            draw_line(&mut img, tip, (tip.0 + hx * head, tip.1 + hy * head));
        }
    }
    img
}

fn draw_line(img: &mut RgbImage, a: (f64, f64), b: (f64, f64)) {
    let steps = ((b.0 - a.0).abs().max((b.1 - a.1).abs()) * 2.0)
        .ceil()
        .max(1.0) as usize;
    for s in 0..=steps {
        let t = s as f64 / steps as f64;
        let x = (a.0 + (b.0 - a.0) * t).floor();
        let y = (a.1 + (b.1 - a.1) * t).floor();
        if x >= 0.0 && y >= 0.0 && (x as u32) < img.width() && (y as u32) < img.height() {
            img.put_pixel(x as u32, y as u32, Rgb(ARROW));
        }
    }
}

pub fn encode_png(img: &RgbImage) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    PngEncoder::new(&mut out).write_image(
        img.as_raw(),
        img.width(),
        img.height(),
        image::ExtendedColorType::Rgb8,
    )?;
    Ok(out)
}
