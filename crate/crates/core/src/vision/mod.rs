//! Silhouette analysis: rendering, segmentation, contours, rectangles and
//! blade inclination.
//!
//! The frame analysis chain is
//! segment → remove background → binarize → trace contours → area filter →
//! minimum-area rectangle → inclination → tilt class.
//! [`analyze_frame`] runs it end to end for one image.

mod contour;
mod raster;
mod rect;
mod render;
mod segment;

use std::io::{self, Write};

use thiserror::Error;

pub use contour::{contour_area, filter_by_area, find_contours, Contour, PixelPoint};
pub use raster::{
    BinaryMask, ComponentKind, Raster, LABEL_BACKGROUND, LABEL_BLADE_BASE, LABEL_NACELLE,
    LABEL_TOWER,
};
pub use rect::{
    classify_tilt, convex_hull, line_inclination, min_area_rect, min_area_rect_points,
    normalize_half_turn, pitch_angle, BladeOrientation, RotatedRect, TiltClass,
};
pub use render::{render_silhouette, CameraFrame, PinholeCamera, MIN_RESOLUTION};
pub use segment::{
    binarize, remove_background, segment_components, BoundingBox, LabelSegmenter, Segment,
    Segmenter,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VisionError {
    #[error("subject not in view")]
    SubjectNotInView,
    #[error("resolution {width}x{height} below the {min}x{min} minimum", min = MIN_RESOLUTION)]
    ResolutionTooSmall { width: usize, height: usize },
    #[error("invalid camera: {0}")]
    InvalidCamera(String),
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("segment mask is empty")]
    EmptySegment,
    #[error("degenerate rectangle")]
    DegenerateRectangle,
    #[error("angle {0} outside [0, 180]")]
    AngleOutOfRange(f64),
    #[error("format error: {0}")]
    Format(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<io::Error> for VisionError {
    fn from(e: io::Error) -> Self {
        VisionError::Io(e.to_string())
    }
}

/// Default contour area threshold as a fraction of the image area.
pub const DEFAULT_AREA_THRESHOLD_FRACTION: f64 = 0.001;

/// A blade found in one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct BladeObservation {
    pub rect: RotatedRect,
    pub orientation: BladeOrientation,
    pub contour_area: f64,
}

/// Intermediate and final products of one frame analysis.
#[derive(Debug, Clone)]
pub struct FrameAnalysis {
    pub segments: Vec<Segment>,
    /// Input image with the background cleared.
    pub foreground: Raster,
    pub contours_kept: usize,
    pub blades: Vec<BladeObservation>,
}

/// Runs the frame analysis chain with the given segmenter. `area_threshold`
/// is in square pixels.
pub fn analyze_frame(
    image: &Raster,
    segmenter: &dyn Segmenter,
    area_threshold: f64,
) -> Result<FrameAnalysis, VisionError> {
    let segments = segmenter.segment(image);
    let foreground = remove_background(image, &segments)?;
    let mut contours_kept = 0;
    let mut blades = Vec::new();
    for segment in &segments {
        let mask = binarize(segment);
        let contours = filter_by_area(find_contours(&mask), area_threshold);
        contours_kept += contours.len();
        if segment.label != ComponentKind::Blade {
            continue;
        }
        for c in contours {
            let rect = min_area_rect(&c);
            let theta = pitch_angle(&rect)?;
            blades.push(BladeObservation {
                rect,
                orientation: BladeOrientation::from_theta(theta)?,
                contour_area: contour_area(&c),
            });
        }
    }
    Ok(FrameAnalysis {
        segments,
        foreground,
        contours_kept,
        blades,
    })
}

/// Header of the blade orientation table.
pub const ORIENTATION_HEADER: &str = "turbine_id,blade_index,theta_deg,tilt_class";

/// Writes `turbine_id, blade_index, theta_deg, tilt_class` rows with a header.
pub fn write_orientations_csv<W: Write>(
    mut out: W,
    rows: &[(String, usize, BladeOrientation)],
) -> io::Result<()> {
    writeln!(out, "{ORIENTATION_HEADER}")?;
    for (turbine, blade, o) in rows {
        writeln!(out, "{turbine},{blade},{:.6},{}", o.theta, o.tilt_class)?;
    }
    Ok(())
}
