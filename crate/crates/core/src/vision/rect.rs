//! Minimum-area rectangles, blade inclination and tilt classes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::contour::Contour;
use super::VisionError;

/// Rectangle in pixel coordinates. Canonical form: `width >= height` and
/// `angle` is the direction of the long side, in `[0, 180)` degrees measured
/// from the pixel `x` axis towards pixel `y` (down).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotatedRect {
    pub center: (f64, f64),
    pub width: f64,
    pub height: f64,
    pub angle: f64,
}

impl RotatedRect {
    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    fn canonical(center: (f64, f64), dir: (f64, f64), along: f64, across: f64) -> Self {
        let (width, height, dir) = if across > along {
            (across, along, (-dir.1, dir.0))
        } else {
            (along, across, dir)
        };
        Self {
            center,
            width,
            height,
            angle: normalize_half_turn(dir.1.atan2(dir.0).to_degrees()),
        }
    }

    /// Endpoints of the long axis, ordered `(top, bottom)` by image `y`
    /// (ties broken by smaller `x` first).
    pub fn long_axis_endpoints(&self) -> ((f64, f64), (f64, f64)) {
        let a = self.angle.to_radians();
        let (hx, hy) = (0.5 * self.width * a.cos(), 0.5 * self.width * a.sin());
        let p = (self.center.0 - hx, self.center.1 - hy);
        let q = (self.center.0 + hx, self.center.1 + hy);
        if (p.1, p.0) <= (q.1, q.0) {
            (p, q)
        } else {
            (q, p)
        }
    }
}

/// Maps any angle in degrees to `[0, 180)`.
pub fn normalize_half_turn(deg: f64) -> f64 {
    let v = deg.rem_euclid(180.0);
    if v >= 180.0 - 1e-9 {
        0.0
    } else {
        v
    }
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Convex hull by monotone chain; collinear points are dropped. The hull is
/// counter-clockwise in a y-up frame.
pub fn convex_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    pts.dedup();
    if pts.len() <= 2 {
        return pts;
    }
    let mut lower: Vec<(f64, f64)> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<(f64, f64)> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn dot(a: (f64, f64), b: (f64, f64)) -> f64 {
    a.0 * b.0 + a.1 * b.1
}

/// Minimum-area enclosing rectangle of a point set: convex hull, then
/// rotating calipers over the hull edges.
pub fn min_area_rect_points(points: &[(f64, f64)]) -> Option<RotatedRect> {
    let hull = convex_hull(points);
    match hull.len() {
        0 => return None,
        1 => {
            return Some(RotatedRect {
                center: hull[0],
                width: 0.0,
                height: 0.0,
                angle: 0.0,
            })
        }
        2 => {
            let (a, b) = (hull[0], hull[1]);
            let len = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
            let dir = ((b.0 - a.0) / len, (b.1 - a.1) / len);
            let center = ((a.0 + b.0) * 0.5, (a.1 + b.1) * 0.5);
            return Some(RotatedRect::canonical(center, dir, len, 0.0));
        }
        _ => {}
    }

    let n = hull.len();
    let next = |i: usize| (i + 1) % n;
    let edge_dir = |i: usize| {
        let (a, b) = (hull[i], hull[next(i)]);
        let len = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
        ((b.0 - a.0) / len, (b.1 - a.1) / len)
    };
    let argmax = |dir: (f64, f64)| {
        (0..n)
            .max_by(|&a, &b| dot(hull[a], dir).total_cmp(&dot(hull[b], dir)))
            .unwrap()
    };

    // caliper pointers: far along the edge, far from the edge, far against the edge
    let e0 = edge_dir(0);
    let mut right = argmax(e0);
    let mut top = argmax((-e0.1, e0.0));
    let mut left = argmax((-e0.0, -e0.1));

    let mut best: Option<(f64, RotatedRect)> = None;
    for i in 0..n {
        let e = edge_dir(i);
        let v = (-e.1, e.0);
        let advance = |mut k: usize, d: (f64, f64)| {
            for _ in 0..n {
                if dot(hull[next(k)], d) > dot(hull[k], d) + 1e-12 {
                    k = next(k);
                } else {
                    break;
                }
            }
            k
        };
        right = advance(right, e);
        top = advance(top, v);
        left = advance(left, (-e.0, -e.1));

        let (min_u, max_u) = (dot(hull[left], e), dot(hull[right], e));
        let (min_v, max_v) = (dot(hull[i], v), dot(hull[top], v));
        let along = max_u - min_u;
        let across = max_v - min_v;
        let area = along * across;
        if best.as_ref().is_none_or(|(a, _)| area < *a) {
            let cu = 0.5 * (min_u + max_u);
            let cv = 0.5 * (min_v + max_v);
            let center = (e.0 * cu + v.0 * cv, e.1 * cu + v.1 * cv);
            best = Some((area, RotatedRect::canonical(center, e, along, across)));
        }
    }
    best.map(|(_, r)| r)
}

/// Minimum-area rectangle around the contour pixels.
pub fn min_area_rect(contour: &Contour) -> RotatedRect {
    let pts: Vec<(f64, f64)> = contour.points.iter().map(|p| (p.x as f64, p.y as f64)).collect();
    min_area_rect_points(&pts).unwrap_or(RotatedRect {
        center: (0.0, 0.0),
        width: 0.0,
        height: 0.0,
        angle: 0.0,
    })
}

/// Inclination of the line from `top` to `bottom` with a full-quadrant
/// arctangent, folded into `[0, 180)`. Vertical lines give 90.
pub fn line_inclination(top: (f64, f64), bottom: (f64, f64)) -> f64 {
    normalize_half_turn((bottom.1 - top.1).atan2(bottom.0 - top.0).to_degrees())
}

/// Blade inclination from the long axis of its bounding rectangle.
pub fn pitch_angle(rect: &RotatedRect) -> Result<f64, VisionError> {
    if !(rect.width > 1e-12) {
        return Err(VisionError::DegenerateRectangle);
    }
    let (top, bottom) = rect.long_axis_endpoints();
    Ok(line_inclination(top, bottom))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TiltClass {
    Acute,
    Horizontal,
    Vertical,
}

impl fmt::Display for TiltClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TiltClass::Acute => "acute",
            TiltClass::Horizontal => "horizontal",
            TiltClass::Vertical => "vertical",
        })
    }
}

impl FromStr for TiltClass {
    type Err = VisionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "acute" => Ok(TiltClass::Acute),
            "horizontal" => Ok(TiltClass::Horizontal),
            "vertical" => Ok(TiltClass::Vertical),
            _ => Err(VisionError::Format(format!("unknown tilt class {s:?}"))),
        }
    }
}

/// Horizontal: `[0, 30) ∪ [150, 180]`; acute: `[30, 60) ∪ [120, 150)`;
/// vertical: `[60, 120)`.
pub fn classify_tilt(theta: f64) -> Result<TiltClass, VisionError> {
    if !(0.0..=180.0).contains(&theta) {
        return Err(VisionError::AngleOutOfRange(theta));
    }
    Ok(if !(30.0..150.0).contains(&theta) {
        TiltClass::Horizontal
    } else if !(60.0..120.0).contains(&theta) {
        TiltClass::Acute
    } else {
        TiltClass::Vertical
    })
}

/// Estimated image-plane inclination of one blade.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BladeOrientation {
    pub theta: f64,
    pub tilt_class: TiltClass,
}

impl BladeOrientation {
    pub fn from_theta(theta: f64) -> Result<Self, VisionError> {
        Ok(Self {
            theta,
            tilt_class: classify_tilt(theta)?,
        })
    }
}
