//! Haar rectangle filters over integral images: the baseline feature space
//! for image data. Five filter types (two-, three- and four-rectangle) are
//! sampled lazily during boosting instead of materializing the ~3×10⁵
//! dimensional space.
//!
//! Three-rectangle filters weight their middle band by −2 so every filter
//! type responds 0 to a constant image.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::data::Geometry;
use crate::error::{Error, Result};

/// The five filter types; "horizontal" means the bands sit side by side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HaarKind {
    TwoHorizontal,
    TwoVertical,
    ThreeHorizontal,
    ThreeVertical,
    FourSquare,
}

pub const ALL_KINDS: [HaarKind; 5] = [
    HaarKind::TwoHorizontal,
    HaarKind::TwoVertical,
    HaarKind::ThreeHorizontal,
    HaarKind::ThreeVertical,
    HaarKind::FourSquare,
];

impl HaarKind {
    /// Band grid (horizontal bands, vertical bands); the footprint width must
    /// be divisible by the first number and the height by the second.
    pub fn bands(&self) -> (usize, usize) {
        match self {
            HaarKind::TwoHorizontal => (2, 1),
            HaarKind::TwoVertical => (1, 2),
            HaarKind::ThreeHorizontal => (3, 1),
            HaarKind::ThreeVertical => (1, 3),
            HaarKind::FourSquare => (2, 2),
        }
    }
}

/// A concrete filter: type, footprint rectangle, and channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HaarFilter {
    pub kind: HaarKind,
    pub x: u32,
    pub y: u32,
    pub width: u32,
    pub height: u32,
    pub channel: u32,
}

impl HaarFilter {
    pub fn admissible(&self, geometry: &Geometry) -> bool {
        let (bx, by) = self.kind.bands();
        let (w, h) = (self.width as usize, self.height as usize);
        w >= bx
            && h >= by
            && w % bx == 0
            && h % by == 0
            && (self.x as usize + w) <= geometry.width
            && (self.y as usize + h) <= geometry.height
            && (self.channel as usize) < geometry.channels
    }
}

/// Cumulative 2-D sum table with a zero border row/column, so any axis-aligned
/// rectangle sum needs 4 lookups.
#[derive(Debug, Clone)]
pub struct IntegralImage {
    table: Vec<f64>,
    width: usize,
}

impl IntegralImage {
    /// Builds the table from a row-major pixel plane.
    pub fn from_pixels(pixels: &[f64], height: usize, width: usize) -> IntegralImage {
        debug_assert_eq!(pixels.len(), height * width);
        let stride = width + 1;
        let mut table = vec![0.0f64; (height + 1) * stride];
        for yy in 0..height {
            let mut row_sum = 0.0;
            for xx in 0..width {
                row_sum += pixels[yy * width + xx];
                table[(yy + 1) * stride + (xx + 1)] = table[yy * stride + (xx + 1)] + row_sum;
            }
        }
        IntegralImage { table, width }
    }

    /// Sum over the rectangle with top-left (x, y) and the given size.
    #[inline]
    pub fn rect_sum(&self, x: usize, y: usize, w: usize, h: usize) -> f64 {
        let stride = self.width + 1;
        let a = self.table[y * stride + x];
        let b = self.table[y * stride + (x + w)];
        let c = self.table[(y + h) * stride + x];
        let d = self.table[(y + h) * stride + (x + w)];
        d - b - c + a
    }
}

/// Per-channel integral images of one instance.
#[derive(Debug, Clone)]
pub struct IntegralSet {
    channels: Vec<IntegralImage>,
}

impl IntegralSet {
    /// Builds all channel tables from a channel-planar raw feature vector.
    pub fn from_instance(row: &[f64], geometry: &Geometry) -> IntegralSet {
        let plane = geometry.height * geometry.width;
        let channels = (0..geometry.channels)
            .map(|c| {
                IntegralImage::from_pixels(
                    &row[c * plane..(c + 1) * plane],
                    geometry.height,
                    geometry.width,
                )
            })
            .collect();
        IntegralSet { channels }
    }

    pub fn channel(&self, c: usize) -> &IntegralImage {
        &self.channels[c]
    }
}

/// Filter response: positive bands minus negative bands (middle band of
/// three-rectangle filters counted twice).
pub fn eval_filter(set: &IntegralSet, f: &HaarFilter) -> f64 {
    let ii = set.channel(f.channel as usize);
    let (x, y) = (f.x as usize, f.y as usize);
    let (w, h) = (f.width as usize, f.height as usize);
    match f.kind {
        HaarKind::TwoHorizontal => {
            let bw = w / 2;
            ii.rect_sum(x, y, bw, h) - ii.rect_sum(x + bw, y, bw, h)
        }
        HaarKind::TwoVertical => {
            let bh = h / 2;
            ii.rect_sum(x, y, w, bh) - ii.rect_sum(x, y + bh, w, bh)
        }
        HaarKind::ThreeHorizontal => {
            let bw = w / 3;
            ii.rect_sum(x, y, bw, h) - 2.0 * ii.rect_sum(x + bw, y, bw, h)
                + ii.rect_sum(x + 2 * bw, y, bw, h)
        }
        HaarKind::ThreeVertical => {
            let bh = h / 3;
            ii.rect_sum(x, y, w, bh) - 2.0 * ii.rect_sum(x, y + bh, w, bh)
                + ii.rect_sum(x, y + 2 * bh, w, bh)
        }
        HaarKind::FourSquare => {
            let bw = w / 2;
            let bh = h / 2;
            ii.rect_sum(x, y, bw, bh) + ii.rect_sum(x + bw, y + bh, bw, bh)
                - ii.rect_sum(x + bw, y, bw, bh)
                - ii.rect_sum(x, y + bh, bw, bh)
        }
    }
}

fn kinds_for(geometry: &Geometry) -> Vec<HaarKind> {
    ALL_KINDS
        .iter()
        .copied()
        .filter(|k| {
            let (bx, by) = k.bands();
            geometry.width >= bx && geometry.height >= by
        })
        .collect()
}

/// Uniform draw over admissible type, band sizes, position and channel.
pub fn sample_filter(rng: &mut dyn RngCore, geometry: &Geometry) -> Result<HaarFilter> {
    let kinds = kinds_for(geometry);
    if kinds.is_empty() || geometry.channels == 0 {
        return Err(Error::InvalidConfig(format!(
            "geometry {}x{}x{} too small for any Haar filter",
            geometry.height, geometry.width, geometry.channels
        )));
    }
    let kind = kinds[rng.random_range(0..kinds.len())];
    let (bx, by) = kind.bands();
    let width = bx * rng.random_range(1..=geometry.width / bx);
    let height = by * rng.random_range(1..=geometry.height / by);
    let x = rng.random_range(0..=geometry.width - width) as u32;
    let y = rng.random_range(0..=geometry.height - height) as u32;
    let channel = rng.random_range(0..geometry.channels) as u32;
    Ok(HaarFilter {
        kind,
        x,
        y,
        width: width as u32,
        height: height as u32,
        channel,
    })
}

/// Number of admissible filters for the geometry across all five types and
/// channels.
pub fn count_admissible(geometry: &Geometry) -> u64 {
    let mut total = 0u64;
    for kind in ALL_KINDS {
        let (bx, by) = kind.bands();
        let mut per_channel = 0u64;
        for wb in 1..=geometry.width / bx {
            let w = wb * bx;
            let x_positions = (geometry.width - w + 1) as u64;
            for hb in 1..=geometry.height / by {
                let h = hb * by;
                per_channel += x_positions * (geometry.height - h + 1) as u64;
            }
        }
        total += per_channel;
    }
    total * geometry.channels as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn geom(h: usize, w: usize, c: usize) -> Geometry {
        Geometry {
            height: h,
            width: w,
            channels: c,
        }
    }

    #[test]
    fn full_rectangle_of_ones() {
        let ii = IntegralImage::from_pixels(&[1.0; 9], 3, 3);
        assert_eq!(ii.rect_sum(0, 0, 3, 3), 9.0);
        assert_eq!(ii.rect_sum(1, 1, 2, 2), 4.0);
    }

    #[test]
    fn single_pixel_lookup() {
        let ii = IntegralImage::from_pixels(&[4.25], 1, 1);
        assert_eq!(ii.rect_sum(0, 0, 1, 1), 4.25);
    }

    #[test]
    fn four_lookup_sums_equal_naive_exactly() {
        // Integer-valued pixels keep every partial sum exact in f64, so the
        // two summation orders must agree bit for bit.
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let pixels: Vec<f64> = (0..64)
            .map(|_| rng.random_range(0u32..256) as f64)
            .collect();
        let ii = IntegralImage::from_pixels(&pixels, 8, 8);
        for _ in 0..20 {
            let w = rng.random_range(1..=8usize);
            let h = rng.random_range(1..=8usize);
            let x = rng.random_range(0..=8 - w);
            let y = rng.random_range(0..=8 - h);
            let mut naive = 0.0;
            for yy in y..y + h {
                for xx in x..x + w {
                    naive += pixels[yy * 8 + xx];
                }
            }
            assert_eq!(ii.rect_sum(x, y, w, h), naive);
        }
    }

    #[test]
    fn constant_image_responds_zero_for_every_kind() {
        let g = geom(6, 6, 1);
        let set = IntegralSet::from_instance(&[3.0; 36], &g);
        let filters = [
            HaarFilter {
                kind: HaarKind::TwoHorizontal,
                x: 0,
                y: 0,
                width: 4,
                height: 3,
                channel: 0,
            },
            HaarFilter {
                kind: HaarKind::TwoVertical,
                x: 1,
                y: 0,
                width: 3,
                height: 4,
                channel: 0,
            },
            HaarFilter {
                kind: HaarKind::ThreeHorizontal,
                x: 0,
                y: 1,
                width: 6,
                height: 2,
                channel: 0,
            },
            HaarFilter {
                kind: HaarKind::ThreeVertical,
                x: 2,
                y: 0,
                width: 2,
                height: 6,
                channel: 0,
            },
            HaarFilter {
                kind: HaarKind::FourSquare,
                x: 0,
                y: 0,
                width: 6,
                height: 6,
                channel: 0,
            },
        ];
        for f in filters {
            assert!(f.admissible(&g));
            assert_eq!(eval_filter(&set, &f), 0.0, "{:?}", f.kind);
        }
    }

    #[test]
    fn side_by_side_filter_peaks_on_a_vertical_boundary() {
        // Left half 0, right half 1: the strongest |response| over all
        // horizontal translations of a fixed-size two-band filter is at the
        // boundary-straddling position.
        let g = geom(8, 8, 1);
        let mut pixels = vec![0.0; 64];
        for yy in 0..8 {
            for xx in 4..8 {
                pixels[yy * 8 + xx] = 1.0;
            }
        }
        let set = IntegralSet::from_instance(&pixels, &g);
        let mut responses = Vec::new();
        for x in 0..=4u32 {
            let f = HaarFilter {
                kind: HaarKind::TwoHorizontal,
                x,
                y: 0,
                width: 4,
                height: 8,
                channel: 0,
            };
            responses.push((eval_filter(&set, &f).abs(), x));
        }
        let best = responses
            .iter()
            .cloned()
            .max_by(|a, b| a.partial_cmp(b).unwrap())
            .unwrap();
        assert_eq!(best.1, 2, "straddling position should maximize |response|");
        assert_eq!(best.0, 16.0); // 2x8 band of ones minus 2x8 band of zeros
    }

    #[test]
    fn linearity_under_scaling() {
        let g = geom(5, 7, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pixels: Vec<f64> = (0..35).map(|_| rng.random::<f64>()).collect();
        let doubled: Vec<f64> = pixels.iter().map(|v| v * 2.0).collect();
        let set1 = IntegralSet::from_instance(&pixels, &g);
        let set2 = IntegralSet::from_instance(&doubled, &g);
        for _ in 0..50 {
            let f = sample_filter(&mut rng, &g).unwrap();
            // Scaling by a power of two commutes with rounding, so exact.
            assert_eq!(eval_filter(&set2, &f), 2.0 * eval_filter(&set1, &f));
        }
    }

    #[test]
    fn sampled_filters_are_admissible() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for (h, w, c) in [(28, 28, 1), (32, 32, 3), (2, 3, 2), (1, 2, 1)] {
            let g = geom(h, w, c);
            for _ in 0..200 {
                let f = sample_filter(&mut rng, &g).unwrap();
                assert!(f.admissible(&g), "{f:?} not admissible in {g:?}");
            }
        }
    }

    #[test]
    fn too_small_geometry_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(sample_filter(&mut rng, &geom(1, 1, 1)).is_err());
    }

    #[test]
    fn count_matches_brute_force_enumeration() {
        for (h, w, c) in [(6, 5, 1), (4, 7, 3)] {
            let g = geom(h, w, c);
            let mut brute = 0u64;
            for kind in ALL_KINDS {
                for x in 0..w as u32 {
                    for y in 0..h as u32 {
                        for width in 1..=(w as u32 - x) {
                            for height in 1..=(h as u32 - y) {
                                for channel in 0..c as u32 {
                                    let f = HaarFilter {
                                        kind,
                                        x,
                                        y,
                                        width,
                                        height,
                                        channel,
                                    };
                                    if f.admissible(&g) {
                                        brute += 1;
                                    }
                                }
                            }
                        }
                    }
                }
            }
            assert_eq!(count_admissible(&g), brute, "{h}x{w}x{c}");
        }
    }

    #[test]
    fn mnist_geometry_count() {
        assert_eq!(count_admissible(&geom(28, 28, 1)), 299_880);
    }
}
