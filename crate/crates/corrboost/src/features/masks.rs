//! Mask exports: neighborhood and edge member lists as delimited text, and
//! (when image geometry is known) portable greymap renderings of the member
//! pixels. Neighborhood members are painted white on black; edge masks paint
//! the positive neighborhood white and the negative one mid-grey, positive
//! winning on overlap.

use std::io::Write;
use std::path::Path;

use crate::data::Geometry;
use crate::error::{Error, Result};
use crate::features::FeatureTransform;

pub const NEIGHBORHOOD_LEVEL: u8 = 255;
pub const EDGE_POSITIVE_LEVEL: u8 = 255;
pub const EDGE_NEGATIVE_LEVEL: u8 = 128;

/// One greymap per channel of the geometry.
pub struct MaskImage {
    pub channel: usize,
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

/// Long-format delimited text: `neighborhood_id<d>member_raw_index`.
pub fn write_neighborhood_members(
    t: &FeatureTransform,
    w: &mut impl Write,
    delimiter: char,
) -> std::io::Result<()> {
    writeln!(w, "neighborhood{delimiter}member")?;
    for (id, set) in t.neighborhoods.members.iter().enumerate() {
        for &m in set {
            writeln!(w, "{id}{delimiter}{}", t.neighborhoods.selected[m as usize])?;
        }
    }
    Ok(())
}

/// Long-format delimited text: `edge_id<d>sign<d>member_raw_index`, sign +1
/// for the first (positive) neighborhood of the pair and −1 for the second.
pub fn write_edge_members(
    t: &FeatureTransform,
    w: &mut impl Write,
    delimiter: char,
) -> std::io::Result<()> {
    writeln!(w, "edge{delimiter}sign{delimiter}member")?;
    for (id, &(a, b)) in t.edges.pairs.iter().enumerate() {
        for (sign, nbr) in [(1i32, a), (-1, b)] {
            for &m in &t.neighborhoods.members[nbr as usize] {
                writeln!(
                    w,
                    "{id}{delimiter}{sign}{delimiter}{}",
                    t.neighborhoods.selected[m as usize]
                )?;
            }
        }
    }
    Ok(())
}

fn blank_images(geometry: &Geometry) -> Vec<MaskImage> {
    (0..geometry.channels)
        .map(|channel| MaskImage {
            channel,
            width: geometry.width,
            height: geometry.height,
            pixels: vec![0; geometry.width * geometry.height],
        })
        .collect()
}

fn paint(images: &mut [MaskImage], geometry: &Geometry, raw_feature: u32, level: u8) {
    let (ch, row, col) = geometry.locate(raw_feature as usize);
    images[ch].pixels[row * geometry.width + col] = level;
}

/// Greymaps of one neighborhood's members; `None` without geometry.
pub fn neighborhood_mask_images(t: &FeatureTransform, id: usize) -> Option<Vec<MaskImage>> {
    let geometry = t.geometry.as_ref()?;
    let mut images = blank_images(geometry);
    for &m in &t.neighborhoods.members[id] {
        paint(
            &mut images,
            geometry,
            t.neighborhoods.selected[m as usize],
            NEIGHBORHOOD_LEVEL,
        );
    }
    Some(images)
}

/// Greymaps of one edge's positive and negative members; `None` without
/// geometry.
pub fn edge_mask_images(t: &FeatureTransform, id: usize) -> Option<Vec<MaskImage>> {
    let geometry = t.geometry.as_ref()?;
    let (a, b) = t.edges.pairs[id];
    let mut images = blank_images(geometry);
    for &m in &t.neighborhoods.members[b as usize] {
        paint(
            &mut images,
            geometry,
            t.neighborhoods.selected[m as usize],
            EDGE_NEGATIVE_LEVEL,
        );
    }
    for &m in &t.neighborhoods.members[a as usize] {
        paint(
            &mut images,
            geometry,
            t.neighborhoods.selected[m as usize],
            EDGE_POSITIVE_LEVEL,
        );
    }
    Some(images)
}

impl MaskImage {
    /// Plain (ASCII) PGM, one sample per pixel.
    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        out.push_str(&format!("P2\n{} {}\n255\n", self.width, self.height));
        for row in self.pixels.chunks(self.width) {
            let line: Vec<String> = row.iter().map(|p| p.to_string()).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        std::fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{EdgeSet, NeighborhoodSet};

    fn transform_with_geometry() -> FeatureTransform {
        FeatureTransform {
            raw_dim: 4,
            geometry: Some(Geometry {
                height: 2,
                width: 2,
                channels: 1,
            }),
            normalizer: None,
            neighborhoods: NeighborhoodSet {
                selected: vec![0, 3],
                members: vec![vec![0], vec![0, 1]],
                thresholds: vec![0.5],
            },
            edges: EdgeSet {
                pairs: vec![(0, 1)],
                threshold: 0.5,
            },
        }
    }

    #[test]
    fn member_text_exports() {
        let t = transform_with_geometry();
        let mut nbr = Vec::new();
        write_neighborhood_members(&t, &mut nbr, ',').unwrap();
        let text = String::from_utf8(nbr).unwrap();
        assert_eq!(text, "neighborhood,member\n0,0\n1,0\n1,3\n");

        let mut edges = Vec::new();
        write_edge_members(&t, &mut edges, ',').unwrap();
        let text = String::from_utf8(edges).unwrap();
        assert!(text.starts_with("edge,sign,member\n0,1,0\n0,-1,0\n0,-1,3\n"));
    }

    #[test]
    fn mask_levels_and_overlap() {
        let t = transform_with_geometry();
        let imgs = neighborhood_mask_images(&t, 1).unwrap();
        assert_eq!(imgs.len(), 1);
        assert_eq!(imgs[0].pixels, vec![255, 0, 0, 255]);

        // Edge (0,1): positive {raw 0}, negative {raw 0, raw 3}; positive
        // wins the overlap at raw 0.
        let imgs = edge_mask_images(&t, 0).unwrap();
        assert_eq!(imgs[0].pixels, vec![255, 0, 0, 128]);
    }

    #[test]
    fn pgm_output_shape() {
        let t = transform_with_geometry();
        let imgs = neighborhood_mask_images(&t, 0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mask.pgm");
        imgs[0].write_pgm(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("P2\n2 2\n255\n"));
        assert_eq!(text.lines().count(), 5);
    }
}
