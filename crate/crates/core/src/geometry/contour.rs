//! Boundary contours in physical coordinates and Moore-neighbour tracing.

use serde::{Deserialize, Serialize};

use super::components::label_components;
use super::region::BinaryMask;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub z: f64,
}

impl Point {
    pub const fn new(x: f64, z: f64) -> Self {
        Self { x, z }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.z - other.z)
    }
}

/// Ordered polyline in mm. Closed contours carry an implicit edge from the
/// last point back to the first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    points: Vec<Point>,
    closed: bool,
}

impl Contour {
    /// Requires at least 3 finite points with no two consecutive points equal
    /// (including last/first when closed).
    pub fn new(points: Vec<Point>, closed: bool) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::DegenerateContour(format!(
                "{} point(s), at least 3 required",
                points.len()
            )));
        }
        if points.iter().any(|p| !p.x.is_finite() || !p.z.is_finite()) {
            return Err(Error::DegenerateContour("non-finite coordinate".into()));
        }
        let n = points.len();
        let pairs = if closed { n } else { n - 1 };
        for i in 0..pairs {
            if points[i] == points[(i + 1) % n] {
                return Err(Error::DegenerateContour(format!(
                    "points {i} and {} coincide",
                    (i + 1) % n
                )));
            }
        }
        Ok(Self { points, closed })
    }

    pub fn closed(points: Vec<Point>) -> Result<Self> {
        Self::new(points, true)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Segments in order, including the closing one for closed contours.
    pub fn segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        let n = self.points.len();
        let count = if self.closed { n } else { n - 1 };
        (0..count).map(move |i| (self.points[i], self.points[(i + 1) % n]))
    }

    /// Shoelace area in the (x, z) frame; positive means counter-clockwise.
    pub fn signed_area(&self) -> f64 {
        let n = self.points.len();
        let twice: f64 = (0..n)
            .map(|i| {
                let (a, b) = (self.points[i], self.points[(i + 1) % n]);
                a.x * b.z - b.x * a.z
            })
            .sum();
        twice / 2.0
    }

    pub fn map(&self, f: impl Fn(Point) -> Point) -> Result<Contour> {
        Contour::new(self.points.iter().map(|&p| f(p)).collect(), self.closed)
    }

    /// Same point set traversed in the opposite direction, first point kept.
    pub fn reversed(&self) -> Contour {
        let mut points = Vec::with_capacity(self.points.len());
        points.push(self.points[0]);
        points.extend(self.points[1..].iter().rev());
        Contour {
            points,
            closed: self.closed,
        }
    }
}

/// Clockwise (on screen, rows growing downward) ring of neighbour offsets
/// starting at west.
const RING: [(i64, i64); 8] = [
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
];

fn ring_index(dc: i64, dr: i64) -> usize {
    RING.iter()
        .position(|&o| o == (dc, dr))
        .expect("offset is a unit neighbour step")
}

/// Outer boundary pixels `(col, row)` of the 4-connected component holding
/// the first foreground pixel in raster order, traced by Moore-neighbour
/// following. Pixels may repeat along one-pixel-wide parts.
pub fn trace_boundary_pixels(region: &BinaryMask) -> Result<Vec<(usize, usize)>> {
    let (ids, sizes) = label_components(region);
    let Some(start) = ids.iter().position(|&id| id != 0) else {
        return Err(Error::DegenerateRegion { pixels: 0 });
    };
    let component = ids[start];
    let pixels = sizes[component as usize - 1];
    if pixels < 3 {
        return Err(Error::DegenerateRegion { pixels });
    }
    let w = region.width();
    let inside = |c: i64, r: i64| {
        c >= 0
            && r >= 0
            && (c as usize) < w
            && (r as usize) < region.height()
            && ids[r as usize * w + c as usize] == component
    };

    let start = ((start % w) as i64, (start / w) as i64);
    let mut current = start;
    // West of the first raster pixel is always background.
    let mut backtrack = 0usize;
    let mut path = vec![start];
    let mut first_step = None;
    let limit = 8 * pixels + 16;

    for _ in 0..limit {
        let mut next = None;
        for k in 1..=8 {
            let dir = (backtrack + k) % 8;
            let cand = (current.0 + RING[dir].0, current.1 + RING[dir].1);
            if inside(cand.0, cand.1) {
                let prev = RING[(backtrack + k - 1) % 8];
                let back = (current.0 + prev.0 - cand.0, current.1 + prev.1 - cand.1);
                next = Some((cand, ring_index(back.0, back.1)));
                break;
            }
        }
        let (cand, back) = next.expect("a component of 3+ pixels has a neighbour");
        match first_step {
            None => first_step = Some(cand),
            Some(first) if current == start && cand == first => {
                return Ok(path
                    .into_iter()
                    .map(|(c, r)| (c as usize, r as usize))
                    .collect());
            }
            Some(_) => {}
        }
        path.push(cand);
        current = cand;
        backtrack = back;
    }
    unreachable!("Moore tracing did not close within {limit} steps")
}

/// Closed contour through the outer boundary pixel centres, scaled by
/// `(spacing_x, spacing_z)` and oriented counter-clockwise in (x, z).
pub fn trace_contour(region: &BinaryMask, spacing: (f64, f64)) -> Result<Contour> {
    let mut pixels = trace_boundary_pixels(region)?;
    // The closing step back onto the start pixel is implicit.
    if pixels.len() > 1 && pixels.last() == pixels.first() {
        pixels.pop();
    }
    contour_from_pixels(&pixels, spacing)
}

/// Converts an ordered pixel path into a counter-clockwise closed contour.
pub fn contour_from_pixels(pixels: &[(usize, usize)], spacing: (f64, f64)) -> Result<Contour> {
    let points = pixels
        .iter()
        .map(|&(c, r)| Point::new(c as f64 * spacing.0, r as f64 * spacing.1))
        .collect();
    let contour = Contour::closed(points)?;
    Ok(if contour.signed_area() < 0.0 {
        contour.reversed()
    } else {
        contour
    })
}
