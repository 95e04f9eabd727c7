use ndarray::Array2;

/// Per-pixel depth with a validity mask and optional confidence.
///
/// Depth is the distance along the optical axis (camera-frame z), not the
/// ray length.
#[derive(Debug, Clone)]
pub struct DepthMap {
    pub depth: Array2<f64>,
    pub mask: Array2<bool>,
    pub confidence: Option<Array2<f64>>,
}

impl DepthMap {
    pub fn invalid(height: usize, width: usize) -> Self {
        Self {
            depth: Array2::zeros((height, width)),
            mask: Array2::from_elem((height, width), false),
            confidence: None,
        }
    }

    pub fn height(&self) -> usize {
        self.depth.nrows()
    }

    pub fn width(&self) -> usize {
        self.depth.ncols()
    }

    pub fn valid_count(&self) -> usize {
        self.mask.iter().filter(|m| **m).count()
    }
}
