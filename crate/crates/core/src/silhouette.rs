//! Silhouette rasters: screens reduced to text boxes and non-text boxes on a
//! blank canvas, with all styling removed.

use serde::{Deserialize, Serialize};

use crate::snapshot::{node_textuality, Bounds, RegionSource, Textuality, UiSnapshot};

pub const DEFAULT_CANVAS: (u32, u32) = (144, 256);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[repr(u8)]
pub enum Pixel {
    Background = 0,
    Text = 1,
    NonText = 2,
}

impl Pixel {
    pub const ALL: [Pixel; 3] = [Pixel::Background, Pixel::Text, Pixel::NonText];

    pub fn rgb(self) -> [u8; 3] {
        match self {
            Pixel::Background => [0, 0, 0],
            Pixel::Text => [0, 0, 255],
            Pixel::NonText => [0, 255, 0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SilhouetteImage {
    width: u32,
    height: u32,
    pixels: Vec<Pixel>,
}

impl SilhouetteImage {
    pub fn blank(width: u32, height: u32) -> Self {
        Self {
            width,
            height,
            pixels: vec![Pixel::Background; width as usize * height as usize],
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Row-major pixels.
    pub fn pixels(&self) -> &[Pixel] {
        &self.pixels
    }

    pub fn get(&self, x: u32, y: u32) -> Pixel {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    pub fn count(&self, value: Pixel) -> usize {
        self.pixels.iter().filter(|&&p| p == value).count()
    }

    /// Paints `[left,right) x [top,bottom)` after clipping to the canvas.
    fn fill(&mut self, left: u32, top: u32, right: u32, bottom: u32, value: Pixel) {
        let right = right.min(self.width);
        let bottom = bottom.min(self.height);
        for y in top..bottom {
            let row = y as usize * self.width as usize;
            for x in left..right {
                self.pixels[row + x as usize] = value;
            }
        }
    }

    /// Binary PPM (P6) with the fixed palette.
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.reserve(self.pixels.len() * 3);
        for p in &self.pixels {
            out.extend_from_slice(&p.rgb());
        }
        out
    }
}

/// Maps a screen coordinate onto the canvas, rounding half up.
fn scale(value: u32, screen: u32, canvas: u32) -> u32 {
    let num = u64::from(value) * u64::from(canvas) * 2 + u64::from(screen);
    (num / (2 * u64::from(screen))).min(u64::from(u32::MAX)) as u32
}

/// Scales screen-space bounds to canvas space (unclipped).
pub fn scale_bounds(b: &Bounds, screen: (u32, u32), canvas: (u32, u32)) -> (u32, u32, u32, u32) {
    (
        scale(b.left, screen.0, canvas.0),
        scale(b.top, screen.1, canvas.1),
        scale(b.right, screen.0, canvas.0),
        scale(b.bottom, screen.1, canvas.1),
    )
}

/// Leaves are painted in document order, then recognizer text regions on top.
pub fn render(snapshot: &UiSnapshot, canvas: (u32, u32)) -> SilhouetteImage {
    assert!(canvas.0 > 0 && canvas.1 > 0, "canvas must be non-empty");
    let mut img = SilhouetteImage::blank(canvas.0, canvas.1);
    let screen = snapshot.screen_size;
    for leaf in snapshot.leaves() {
        let value = match node_textuality(leaf, &snapshot.text_regions) {
            Textuality::Textual => Pixel::Text,
            Textuality::NonTextual => Pixel::NonText,
        };
        let (l, t, r, b) = scale_bounds(&leaf.bounds, screen, canvas);
        img.fill(l, t, r, b, value);
    }
    for region in snapshot
        .text_regions
        .iter()
        .filter(|r| r.source == RegionSource::ExternalRecognizer)
    {
        let (l, t, r, b) = scale_bounds(&region.bounds, screen, canvas);
        img.fill(l, t, r, b, Pixel::Text);
    }
    img
}

/// Cell edges along one axis; the last cell absorbs the remainder.
pub(crate) fn cell_edges(len: u32, grid: u32) -> Vec<u32> {
    let step = len / grid;
    (0..=grid)
        .map(|k| if k == grid { len } else { k * step })
        .collect()
}

/// Per-cell `[background, text, non-text]` fractions, cells in row-major order.
/// Cells that receive no pixels report pure background.
pub fn channel_fractions(img: &SilhouetteImage, grid: u32) -> Vec<f64> {
    assert!(grid >= 1, "grid must be at least 1");
    let xs = cell_edges(img.width, grid);
    let ys = cell_edges(img.height, grid);
    let mut out = Vec::with_capacity(3 * (grid * grid) as usize);
    for cy in 0..grid as usize {
        for cx in 0..grid as usize {
            let mut counts = [0u64; 3];
            for y in ys[cy]..ys[cy + 1] {
                for x in xs[cx]..xs[cx + 1] {
                    counts[img.get(x, y) as usize] += 1;
                }
            }
            let total: u64 = counts.iter().sum();
            if total == 0 {
                out.extend_from_slice(&[1.0, 0.0, 0.0]);
            } else {
                out.extend(counts.iter().map(|&c| c as f64 / total as f64));
            }
        }
    }
    out
}
