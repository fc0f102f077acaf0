use crate::counts::CountDataset;

/// Per-category `λ_j` for ZANIM, per-cell `λ_ij` for ZANIDM.
#[derive(Debug, Clone, PartialEq)]
pub enum LatentLambda {
    PerCategory(Vec<f64>),
    PerCell(Vec<Vec<f64>>),
}

/// Snapshot of the augmented latent variables.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentState {
    pub phi: Vec<f64>,
    pub z: Vec<Vec<bool>>,
    pub lambda: LatentLambda,
}

/// Dataset laid out row-major for the samplers.
#[derive(Debug, Clone)]
pub(crate) struct FlatData {
    pub n: usize,
    pub d: usize,
    pub y: Vec<u64>,
    pub trials: Vec<u64>,
    /// For each category, the observations with a zero count.
    pub zero_cells: Vec<Vec<usize>>,
}

impl FlatData {
    pub fn new(data: &CountDataset) -> Self {
        let n = data.len();
        let d = data.dim();
        let mut y = Vec::with_capacity(n * d);
        let mut zero_cells = vec![Vec::new(); d];
        for (i, row) in data.rows().iter().enumerate() {
            for (j, &v) in row.counts().iter().enumerate() {
                y.push(v);
                if v == 0 {
                    zero_cells[j].push(i);
                }
            }
        }
        let trials = data.rows().iter().map(|r| r.counts().iter().sum()).collect();
        Self {
            n,
            d,
            y,
            trials,
            zero_cells,
        }
    }

    #[inline]
    pub fn y(&self, i: usize, j: usize) -> u64 {
        self.y[i * self.d + j]
    }
}
