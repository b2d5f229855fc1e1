use serde::{Deserialize, Serialize};

/// Tolerance for coordinate comparisons in µm.
pub const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Axis-aligned rectangle, closed on all sides. Units are µm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl Rect {
    pub const fn new(x_min: f64, y_min: f64, x_max: f64, y_max: f64) -> Self {
        Self {
            x_min,
            y_min,
            x_max,
            y_max,
        }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.x_min - EPS
            && p.x <= self.x_max + EPS
            && p.y >= self.y_min - EPS
            && p.y <= self.y_max + EPS
    }

    pub fn contains_rect(&self, other: &Rect) -> bool {
        self.contains(Point::new(other.x_min, other.y_min))
            && self.contains(Point::new(other.x_max, other.y_max))
    }

    /// True when the interiors intersect. Shared edges do not count.
    pub fn overlaps(&self, other: &Rect) -> bool {
        self.x_min < other.x_max - EPS
            && other.x_min < self.x_max - EPS
            && self.y_min < other.y_max - EPS
            && other.y_min < self.y_max - EPS
    }

    pub fn scaled(&self, k: f64) -> Rect {
        Rect::new(self.x_min * k, self.y_min * k, self.x_max * k, self.y_max * k)
    }
}
