use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Terrain coefficients `v ∈ [0, 1]` on a regular grid. Row 0 is the
/// northernmost row; `origin` is the south-west corner.
#[derive(Debug, Clone, PartialEq)]
pub struct TerrainRaster {
    ncols: usize,
    nrows: usize,
    cellsize: f64,
    origin: (f64, f64),
    values: Vec<f64>,
    /// Coefficient used outside the raster; zero makes the edge a hard wall.
    boundary: f64,
}

impl TerrainRaster {
    pub fn new(ncols: usize, nrows: usize, cellsize: f64, origin: (f64, f64), values: Vec<f64>) -> Result<Self> {
        if ncols == 0 || nrows == 0 || values.len() != ncols * nrows {
            return Err(Error::DimensionMismatch("raster values must fill ncols × nrows"));
        }
        if !(cellsize > 0.0 && cellsize.is_finite()) || !origin.0.is_finite() || !origin.1.is_finite() {
            return Err(Error::InvalidArgument("raster cell size must be positive and origin finite"));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidArgument("terrain coefficients must lie in [0, 1]"));
        }
        Ok(Self { ncols, nrows, cellsize, origin, values, boundary: 0.0 })
    }

    pub fn with_boundary(mut self, boundary: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&boundary) {
            return Err(Error::InvalidArgument("boundary coefficient must lie in [0, 1]"));
        }
        self.boundary = boundary;
        Ok(self)
    }

    /// A raster of constant coefficient `v`.
    pub fn constant(ncols: usize, nrows: usize, cellsize: f64, origin: (f64, f64), v: f64) -> Result<Self> {
        Self::new(ncols, nrows, cellsize, origin, alloc::vec![v; ncols * nrows])
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn cellsize(&self) -> f64 {
        self.cellsize
    }

    pub fn origin(&self) -> (f64, f64) {
        self.origin
    }

    pub fn boundary(&self) -> f64 {
        self.boundary
    }

    /// Row-major values, northernmost row first.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(row, col)` of the cell containing `(x, y)`.
    pub fn cell(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let c = libm::floor((x - self.origin.0) / self.cellsize);
        let r = libm::floor((y - self.origin.1) / self.cellsize);
        if !(c >= 0.0 && r >= 0.0 && c < self.ncols as f64 && r < self.nrows as f64) {
            return None;
        }
        Some((self.nrows - 1 - r as usize, c as usize))
    }

    pub fn coefficient(&self, x: f64, y: f64) -> f64 {
        match self.cell(x, y) {
            Some((r, c)) => self.values[r * self.ncols + c],
            None => self.boundary,
        }
    }

    /// `𝒱 = -log v`.
    pub fn rate(&self, x: f64, y: f64) -> f64 {
        -libm::log(self.coefficient(x, y))
    }

    /// Centre of cell `(row, col)`.
    pub fn cell_centre(&self, row: usize, col: usize) -> (f64, f64) {
        (
            self.origin.0 + (col as f64 + 0.5) * self.cellsize,
            self.origin.1 + ((self.nrows - 1 - row) as f64 + 0.5) * self.cellsize,
        )
    }

    /// A synthetic 64 × 64 map on `[-4, 4]²` with two lakes near the centre,
    /// wetland margins, a forest belt, a built-up block and farmland
    /// elsewhere.
    pub fn two_lakes() -> Self {
        const FARM: f64 = 0.6;
        const FOREST: f64 = 0.5;
        const WETLAND: f64 = 0.5;
        const URBAN: f64 = 0.2;
        const WATER: f64 = 0.0;
        let (n, cs, origin) = (64usize, 0.125, (-4.0, -4.0));
        let lakes = [((-1.3, 0.0), 1.0), ((1.4, 0.4), 0.8)];
        let mut values = alloc::vec![FARM; n * n];
        let proto = Self { ncols: n, nrows: n, cellsize: cs, origin, values: values.clone(), boundary: 0.0 };
        for row in 0..n {
            for col in 0..n {
                let (x, y) = proto.cell_centre(row, col);
                let dist = |((cx, cy), r): ((f64, f64), f64)| libm::hypot(x - cx, y - cy) - r;
                let nearest = lakes.iter().map(|&l| dist(l)).fold(f64::INFINITY, f64::min);
                values[row * n + col] = if nearest < 0.0 {
                    WATER
                } else if nearest < 0.25 {
                    WETLAND
                } else if x > 2.0 && y < -2.0 {
                    URBAN
                } else if y > 2.0 {
                    FOREST
                } else {
                    FARM
                };
            }
        }
        Self { values, ..proto }
    }
}
