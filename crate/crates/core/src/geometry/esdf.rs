use super::{Placed, Pose2, Rect, Shape, Vec2};
use thiserror::Error;

/// Clearance reported when the grid has no obstacle at all.
pub const UNBOUNDED_CLEARANCE: f64 = 1e6;

#[derive(Debug, Error, PartialEq)]
pub enum EsdfError {
    #[error("bounds are empty or degenerate")]
    EmptyBounds,
    #[error("cell size must be positive, got {0}")]
    BadCell(f64),
    #[error("query point ({0}, {1}) lies outside the grid bounds")]
    OutOfBounds(f64, f64),
}

/// Euclidean signed distance field sampled at cell centers.
///
/// Values are exact at cell centers (brute force over the obstacle primitives);
/// positive in free space, non-positive inside or on an obstacle.
#[derive(Debug, Clone)]
pub struct EsdfGrid {
    origin: Vec2,
    cell: f64,
    width: usize,
    height: usize,
    bounds: Rect,
    dist: Vec<f64>,
}

impl EsdfGrid {
    pub fn build(obstacles: &[(Shape, Pose2)], bounds: Rect, cell: f64) -> Result<Self, EsdfError> {
        let placed: Vec<Placed> = obstacles.iter().map(|(s, p)| s.place(p)).collect();
        Self::from_placed(&placed, bounds, cell)
    }

    pub fn from_placed(obstacles: &[Placed], bounds: Rect, cell: f64) -> Result<Self, EsdfError> {
        if bounds.is_degenerate() {
            return Err(EsdfError::EmptyBounds);
        }
        if !(cell.is_finite() && cell > 0.0) {
            return Err(EsdfError::BadCell(cell));
        }
        let width = ((bounds.width() / cell) - 1e-9).ceil().max(1.0) as usize;
        let height = ((bounds.height() / cell) - 1e-9).ceil().max(1.0) as usize;
        let origin = bounds.min;
        let mut dist = Vec::with_capacity(width * height);
        for j in 0..height {
            for i in 0..width {
                let c = Vec2::new(origin.x + (i as f64 + 0.5) * cell, origin.y + (j as f64 + 0.5) * cell);
                let d = obstacles
                    .iter()
                    .map(|o| o.signed_distance(c))
                    .fold(UNBOUNDED_CLEARANCE, f64::min);
                dist.push(d);
            }
        }
        Ok(Self {
            origin,
            cell,
            width,
            height,
            bounds,
            dist,
        })
    }

    pub fn cell(&self) -> f64 {
        self.cell
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn origin(&self) -> Vec2 {
        self.origin
    }

    pub fn bounds(&self) -> Rect {
        self.bounds
    }

    pub fn cell_center(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new(
            self.origin.x + (i as f64 + 0.5) * self.cell,
            self.origin.y + (j as f64 + 0.5) * self.cell,
        )
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.dist[j * self.width + i]
    }

    pub fn values(&self) -> &[f64] {
        &self.dist
    }

    /// Bilinear interpolation of the cell-center samples at `p`.
    pub fn clearance(&self, p: Vec2) -> Result<f64, EsdfError> {
        if !self.bounds.contains(p) || !p.x.is_finite() || !p.y.is_finite() {
            return Err(EsdfError::OutOfBounds(p.x, p.y));
        }
        Ok(self.clearance_unchecked(p))
    }

    /// As [`clearance`](Self::clearance) but clamps points outside the grid to its edge.
    pub fn clearance_unchecked(&self, p: Vec2) -> f64 {
        let (i0, i1, tx) = axis(p.x, self.origin.x, self.cell, self.width);
        let (j0, j1, ty) = axis(p.y, self.origin.y, self.cell, self.height);
        let a = self.value(i0, j0) * (1.0 - tx) + self.value(i1, j0) * tx;
        let b = self.value(i0, j1) * (1.0 - tx) + self.value(i1, j1) * tx;
        a * (1.0 - ty) + b * ty
    }

    /// Upper bound on the interpolation error of [`clearance`](Self::clearance).
    pub fn error_bound(&self) -> f64 {
        self.cell * std::f64::consts::SQRT_2
    }
}

fn axis(v: f64, origin: f64, cell: f64, n: usize) -> (usize, usize, f64) {
    let f = (v - origin) / cell - 0.5;
    if f <= 0.0 {
        return (0, 0, 0.0);
    }
    let i0 = f.floor() as usize;
    if i0 + 1 >= n {
        return (n - 1, n - 1, 0.0);
    }
    (i0, i0 + 1, f - i0 as f64)
}
