//! The 5 x 5 demonstration instance shipped as `data/paper_example.csv`.

use crate::linalg::{DesignMatrix, Problem};

/// Row-major design matrix of the demonstration instance.
pub const DEMO_X: [[f64; 5]; 5] = [
    [-0.204708, 0.478943, -0.519439, -0.555730, 1.965781],
    [1.393406, 0.092908, 0.281746, 0.769023, 1.246435],
    [1.007189, -1.296221, 0.274992, 0.228913, 1.352917],
    [0.886429, -2.001637, -0.371843, 1.669025, -0.438570],
    [-0.539741, 0.476985, 3.248944, -1.021228, -0.577087],
];

pub const DEMO_Y: [f64; 5] = [0.124121, 0.302614, 0.523772, 0.000940, 1.343810];

pub fn demo_problem(lambda: f64) -> Problem {
    let rows: Vec<Vec<f64>> = DEMO_X.iter().map(|r| r.to_vec()).collect();
    let x = DesignMatrix::from_rows(&rows).expect("demo matrix has no zero column");
    Problem::new(x, DEMO_Y.to_vec(), lambda).expect("valid demo problem")
}
