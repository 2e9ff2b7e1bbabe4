//! Outer-border tracing on 8-connected foreground components.

use std::collections::VecDeque;

use super::raster::BinaryMask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PixelPoint {
    pub x: i64,
    pub y: i64,
}

impl PixelPoint {
    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }

    pub fn is_8_adjacent(self, other: PixelPoint) -> bool {
        self != other && (self.x - other.x).abs() <= 1 && (self.y - other.y).abs() <= 1
    }
}

/// Closed boundary: consecutive points are 8-adjacent and the last point is
/// adjacent to the first. Thin parts of a shape are walked twice, so a point
/// may repeat.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contour {
    pub points: Vec<PixelPoint>,
}

impl Contour {
    pub fn is_closed(&self) -> bool {
        let p = &self.points;
        match p.len() {
            0 => false,
            1 => true,
            n => p.windows(2).all(|w| w[0].is_8_adjacent(w[1])) && p[n - 1].is_8_adjacent(p[0]),
        }
    }
}

// Clockwise on screen (y down), starting west.
const DIRS: [(i64, i64); 8] = [
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
];

fn dir_index(from: PixelPoint, to: PixelPoint) -> usize {
    let d = (to.x - from.x, to.y - from.y);
    DIRS.iter().position(|&v| v == d).expect("backtrack pixel is a neighbour")
}

/// One clockwise Moore step: scan the neighbourhood of `current` starting
/// just after the backtrack pixel; returns the next border pixel and the
/// background pixel examined right before it.
fn moore_step(
    mask: &BinaryMask,
    current: PixelPoint,
    backtrack: PixelPoint,
) -> Option<(PixelPoint, PixelPoint)> {
    let start = dir_index(current, backtrack);
    let mut prev = backtrack;
    for k in 1..=8 {
        let (dx, dy) = DIRS[(start + k) % 8];
        let p = PixelPoint::new(current.x + dx, current.y + dy);
        if mask.get_signed(p.x, p.y) {
            return Some((p, prev));
        }
        prev = p;
    }
    None
}

fn trace_outer(mask: &BinaryMask, start: PixelPoint, limit: usize) -> Contour {
    let mut points = vec![start];
    let mut current = start;
    let mut backtrack = PixelPoint::new(start.x - 1, start.y);
    let mut first_move: Option<PixelPoint> = None;
    for _ in 0..limit {
        let Some((next, next_backtrack)) = moore_step(mask, current, backtrack) else {
            break;
        };
        match first_move {
            None => first_move = Some(next),
            Some(f) if current == start && next == f => break,
            Some(_) => {}
        }
        current = next;
        backtrack = next_backtrack;
        points.push(current);
    }
    if points.len() > 1 && points.last() == Some(&start) {
        points.pop();
    }
    Contour { points }
}

/// Outer border of every 8-connected foreground component, in raster order
/// of each component's first pixel. Holes are not traced.
pub fn find_contours(mask: &BinaryMask) -> Vec<Contour> {
    let (w, h) = (mask.width(), mask.height());
    let mut seen = vec![false; w * h];
    let mut contours = Vec::new();
    let mut queue = VecDeque::new();
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if !mask.get(x, y) || seen[i] {
                continue;
            }
            // flood the component so it is traced once
            let mut size = 0usize;
            seen[i] = true;
            queue.push_back((x, y));
            while let Some((cx, cy)) = queue.pop_front() {
                size += 1;
                for (dx, dy) in DIRS {
                    let (nx, ny) = (cx as i64 + dx, cy as i64 + dy);
                    if mask.get_signed(nx, ny) {
                        let j = ny as usize * w + nx as usize;
                        if !seen[j] {
                            seen[j] = true;
                            queue.push_back((nx as usize, ny as usize));
                        }
                    }
                }
            }
            let start = PixelPoint::new(x as i64, y as i64);
            contours.push(trace_outer(mask, start, 4 * size + 8));
        }
    }
    contours
}

/// Shoelace area of the closed polygon through the contour points.
pub fn contour_area(contour: &Contour) -> f64 {
    polygon_area(contour.points.iter().map(|p| (p.x as f64, p.y as f64)))
}

pub(crate) fn polygon_area(points: impl Iterator<Item = (f64, f64)> + Clone) -> f64 {
    let first = points.clone().next();
    let Some(first) = first else { return 0.0 };
    let shifted = points.clone().skip(1).chain(std::iter::once(first));
    let twice: f64 = points
        .zip(shifted)
        .map(|((x1, y1), (x2, y2))| x1 * y2 - x2 * y1)
        .sum();
    (twice * 0.5).abs()
}

/// Keeps contours whose area is strictly greater than `threshold`, in order.
pub fn filter_by_area(contours: Vec<Contour>, threshold: f64) -> Vec<Contour> {
    contours
        .into_iter()
        .filter(|c| contour_area(c) > threshold)
        .collect()
}
