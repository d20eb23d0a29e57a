use super::DynamicsError;

/// Discretization of the immunity axis `p ∈ [0, 1]` into `m + 1` bands.
///
/// Band `j` is centered at `p_j = j h` with `h = 1/m`; the two edge bands are
/// half as wide as the interior ones.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    m: usize,
    h: f64,
    centers: Vec<f64>,
    widths: Vec<f64>,
    alpha: f64,
}

impl Grid {
    pub fn new(m: usize, alpha: f64) -> Result<Self, DynamicsError> {
        if m < 1 {
            return Err(DynamicsError::TooFewBands(m));
        }
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(DynamicsError::InvalidAlpha(alpha));
        }
        let h = 1.0 / m as f64;
        let centers: Vec<f64> = (0..=m).map(|j| if j == m { 1.0 } else { j as f64 * h }).collect();
        let widths = centers
            .iter()
            .map(|&p| (p + h / 2.0).min(1.0) - (p - h / 2.0).max(0.0))
            .collect();
        Ok(Self {
            m,
            h,
            centers,
            widths,
            alpha,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn bands(&self) -> usize {
        self.m + 1
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}
