//! Planar and box geometry shared by every stage of the pipeline.
//!
//! World frame is right-handed with z up; the store footprint spans
//! `[0, width] x [0, depth]` in the xy plane.

use serde::{Deserialize, Serialize};

/// Tolerance for containment and touching tests, in meters.
pub const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn other(self) -> Axis {
        match self {
            Axis::X => Axis::Y,
            Axis::Y => Axis::X,
        }
    }
}

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Rect { x0, y0, x1, y1 }
    }

    pub fn from_size(x0: f64, y0: f64, w: f64, h: f64) -> Self {
        Rect::new(x0, y0, x0 + w, y0 + h)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn extent(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.width(),
            Axis::Y => self.height(),
        }
    }

    pub fn lo(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.x0,
            Axis::Y => self.y0,
        }
    }

    pub fn hi(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.x1,
            Axis::Y => self.y1,
        }
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> (f64, f64) {
        ((self.x0 + self.x1) * 0.5, (self.y0 + self.y1) * 0.5)
    }

    pub fn longer_axis(&self) -> Axis {
        if self.height() > self.width() {
            Axis::Y
        } else {
            Axis::X
        }
    }

    /// Splits at `ratio` of the extent along `axis`; the low child comes first.
    pub fn split(&self, axis: Axis, ratio: f64) -> (Rect, Rect) {
        match axis {
            Axis::X => {
                let cut = self.x0 + self.width() * ratio;
                (
                    Rect::new(self.x0, self.y0, cut, self.y1),
                    Rect::new(cut, self.y0, self.x1, self.y1),
                )
            }
            Axis::Y => {
                let cut = self.y0 + self.height() * ratio;
                (
                    Rect::new(self.x0, self.y0, self.x1, cut),
                    Rect::new(self.x0, cut, self.x1, self.y1),
                )
            }
        }
    }

    pub fn contains_rect(&self, other: &Rect, eps: f64) -> bool {
        other.x0 >= self.x0 - eps && other.y0 >= self.y0 - eps && other.x1 <= self.x1 + eps && other.y1 <= self.y1 + eps
    }

    pub fn contains_point(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x <= self.x1 && y >= self.y0 && y <= self.y1
    }

    /// Open-interval overlap: touching edges do not count.
    pub fn overlaps(&self, other: &Rect) -> bool {
        self.x0 < other.x1 - EPS && other.x0 < self.x1 - EPS && self.y0 < other.y1 - EPS && other.y0 < self.y1 - EPS
    }

    pub fn intersection_area(&self, other: &Rect) -> f64 {
        let w = self.x1.min(other.x1) - self.x0.max(other.x0);
        let h = self.y1.min(other.y1) - self.y0.max(other.y0);
        if w <= 0.0 || h <= 0.0 {
            0.0
        } else {
            w * h
        }
    }

    /// Length of the boundary segment two rectangles share (0 when they only
    /// meet at a corner or are apart).
    pub fn shared_edge_length(&self, other: &Rect) -> f64 {
        let ov_x = self.x1.min(other.x1) - self.x0.max(other.x0);
        let ov_y = self.y1.min(other.y1) - self.y0.max(other.y0);
        let touch_x = (self.x1 - other.x0).abs() < 1e-6 || (other.x1 - self.x0).abs() < 1e-6;
        let touch_y = (self.y1 - other.y0).abs() < 1e-6 || (other.y1 - self.y0).abs() < 1e-6;
        let mut len: f64 = 0.0;
        if touch_x && ov_y > 1e-6 {
            len = len.max(ov_y);
        }
        if touch_y && ov_x > 1e-6 {
            len = len.max(ov_x);
        }
        len
    }

    pub fn inflate(&self, r: f64) -> Rect {
        Rect::new(self.x0 - r, self.y0 - r, self.x1 + r, self.y1 + r)
    }
}

/// Rotation about z restricted to quarter turns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u16", into = "u16")]
pub enum Yaw {
    D0,
    D90,
    D180,
    D270,
}

impl Yaw {
    pub fn degrees(self) -> u16 {
        match self {
            Yaw::D0 => 0,
            Yaw::D90 => 90,
            Yaw::D180 => 180,
            Yaw::D270 => 270,
        }
    }

    /// Exact (cos, sin) for the quarter turn.
    pub fn cos_sin(self) -> (f64, f64) {
        match self {
            Yaw::D0 => (1.0, 0.0),
            Yaw::D90 => (0.0, 1.0),
            Yaw::D180 => (-1.0, 0.0),
            Yaw::D270 => (0.0, -1.0),
        }
    }

    pub fn rotate(self, x: f64, y: f64) -> (f64, f64) {
        let (c, s) = self.cos_sin();
        (c * x - s * y, s * x + c * y)
    }

    /// True when the local x axis maps onto world y.
    pub fn swaps_axes(self) -> bool {
        matches!(self, Yaw::D90 | Yaw::D270)
    }
}

impl From<Yaw> for u16 {
    fn from(y: Yaw) -> u16 {
        y.degrees()
    }
}

impl TryFrom<u16> for Yaw {
    type Error = String;
    fn try_from(v: u16) -> Result<Self, String> {
        match v {
            0 => Ok(Yaw::D0),
            90 => Ok(Yaw::D90),
            180 => Ok(Yaw::D180),
            270 => Ok(Yaw::D270),
            other => Err(format!("yaw must be 0, 90, 180 or 270, got {other}")),
        }
    }
}

/// Planar pose of a footprint: center position plus quarter-turn yaw.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose2 {
    pub x: f64,
    pub y: f64,
    pub yaw: Yaw,
}

impl Pose2 {
    /// Maps a point in a footprint-local frame (origin at the footprint min
    /// corner, extent `size`) to world coordinates.
    pub fn to_world(&self, size: (f64, f64), lx: f64, ly: f64) -> (f64, f64) {
        let (rx, ry) = self.yaw.rotate(lx - size.0 * 0.5, ly - size.1 * 0.5);
        (self.x + rx, self.y + ry)
    }

    /// World AABB of a local rectangle.
    pub fn rect_to_world(&self, size: (f64, f64), r: &Rect) -> Rect {
        let (ax, ay) = self.to_world(size, r.x0, r.y0);
        let (bx, by) = self.to_world(size, r.x1, r.y1);
        Rect::new(ax.min(bx), ay.min(by), ax.max(bx), ay.max(by))
    }

    /// World AABB of the full footprint.
    pub fn footprint(&self, size: (f64, f64)) -> Rect {
        self.rect_to_world(size, &Rect::new(0.0, 0.0, size.0, size.1))
    }

    /// World direction of a local vector.
    pub fn dir_to_world(&self, dx: f64, dy: f64) -> (f64, f64) {
        self.yaw.rotate(dx, dy)
    }
}

/// Axis-aligned 3-D box given by min corner and size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Box3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub w: f64,
    pub d: f64,
    pub h: f64,
}

impl Box3 {
    pub fn new(x: f64, y: f64, z: f64, w: f64, d: f64, h: f64) -> Self {
        Box3 { x, y, z, w, d, h }
    }

    pub fn plan(&self) -> Rect {
        Rect::from_size(self.x, self.y, self.w, self.d)
    }

    pub fn top(&self) -> f64 {
        self.z + self.h
    }

    pub fn contains(&self, other: &Box3, eps: f64) -> bool {
        other.x >= self.x - eps
            && other.y >= self.y - eps
            && other.z >= self.z - eps
            && other.x + other.w <= self.x + self.w + eps
            && other.y + other.d <= self.y + self.d + eps
            && other.z + other.h <= self.z + self.h + eps
    }
}
