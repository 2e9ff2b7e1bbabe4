//! Component segmentation, background removal and mask binarization.

use std::collections::VecDeque;

use super::raster::{BinaryMask, ComponentKind, Raster, LABEL_BACKGROUND};
use super::VisionError;

/// Inclusive axis-aligned pixel rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundingBox {
    pub x_min: usize,
    pub y_min: usize,
    pub x_max: usize,
    pub y_max: usize,
}

impl BoundingBox {
    pub fn width(&self) -> usize {
        self.x_max - self.x_min + 1
    }

    pub fn height(&self) -> usize {
        self.y_max - self.y_min + 1
    }

    /// Tight box around the set pixels of a mask, `None` for an empty mask.
    pub fn of_mask(mask: &BinaryMask) -> Option<Self> {
        mask.iter_set().fold(None, |acc, (x, y)| {
            Some(match acc {
                None => BoundingBox {
                    x_min: x,
                    y_min: y,
                    x_max: x,
                    y_max: y,
                },
                Some(b) => BoundingBox {
                    x_min: b.x_min.min(x),
                    y_min: b.y_min.min(y),
                    x_max: b.x_max.max(x),
                    y_max: b.y_max.max(y),
                },
            })
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub label: ComponentKind,
    /// Raw raster label the segment was extracted from.
    pub source_label: u8,
    pub mask: BinaryMask,
    pub bbox: BoundingBox,
}

impl Segment {
    pub fn new(label: ComponentKind, source_label: u8, mask: BinaryMask) -> Result<Self, VisionError> {
        let bbox = BoundingBox::of_mask(&mask).ok_or(VisionError::EmptySegment)?;
        Ok(Self {
            label,
            source_label,
            mask,
            bbox,
        })
    }
}

/// Turns an image into component segments. Implementations must be usable
/// from several threads at once.
pub trait Segmenter: Send + Sync {
    fn segment(&self, image: &Raster) -> Vec<Segment>;
}

/// Segmenter for label rasters: one segment per 8-connected region of each
/// non-background label.
#[derive(Debug, Clone, Copy, Default)]
pub struct LabelSegmenter;

impl Segmenter for LabelSegmenter {
    fn segment(&self, image: &Raster) -> Vec<Segment> {
        let (w, h) = (image.width(), image.height());
        let mut visited = vec![false; w * h];
        let mut segments = Vec::new();
        let mut queue = VecDeque::new();
        for start in 0..w * h {
            let label = image.data()[start];
            if label == LABEL_BACKGROUND || visited[start] {
                continue;
            }
            let mut mask = BinaryMask::new(w, h);
            visited[start] = true;
            queue.push_back(start);
            while let Some(i) = queue.pop_front() {
                let (x, y) = (i % w, i / w);
                mask.set(x, y, true);
                for (dx, dy) in NEIGHBORS_8 {
                    let (nx, ny) = (x as i64 + dx, y as i64 + dy);
                    if nx < 0 || ny < 0 || nx >= w as i64 || ny >= h as i64 {
                        continue;
                    }
                    let j = ny as usize * w + nx as usize;
                    if !visited[j] && image.data()[j] == label {
                        visited[j] = true;
                        queue.push_back(j);
                    }
                }
            }
            let kind = ComponentKind::from_label(label).expect("non-background label");
            segments.push(Segment::new(kind, label, mask).expect("region has a seed pixel"));
        }
        segments
    }
}

const NEIGHBORS_8: [(i64, i64); 8] = [
    (-1, -1),
    (0, -1),
    (1, -1),
    (-1, 0),
    (1, 0),
    (-1, 1),
    (0, 1),
    (1, 1),
];

/// Built-in segmentation with [`LabelSegmenter`].
pub fn segment_components(image: &Raster) -> Vec<Segment> {
    LabelSegmenter.segment(image)
}

/// Keeps the pixels covered by at least one segment mask and clears the rest.
pub fn remove_background(image: &Raster, segments: &[Segment]) -> Result<Raster, VisionError> {
    let (w, h) = (image.width(), image.height());
    for s in segments {
        if s.mask.width() != w || s.mask.height() != h {
            return Err(VisionError::DimensionMismatch {
                expected: (w, h),
                found: (s.mask.width(), s.mask.height()),
            });
        }
    }
    let mut out = Raster::new(w, h);
    for s in segments {
        for (x, y) in s.mask.iter_set() {
            out.set(x, y, image.get(x, y));
        }
    }
    Ok(out)
}

/// Binary mask holding a bit exactly where the segment claims membership.
pub fn binarize(segment: &Segment) -> BinaryMask {
    let m = &segment.mask;
    BinaryMask::from_fn(m.width(), m.height(), |x, y| m.get(x, y))
}
