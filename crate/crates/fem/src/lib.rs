//! Small-strain hexahedral finite elements for running plastokit material
//! models on the Punch and Cook's-membrane benchmarks.

mod element;
mod mesh;
mod output;
mod solver;

pub use element::{shape, GaussPoint, GAUSS};
pub use mesh::{cook_mesh, punch_mesh, Mesh};
pub use output::{write_convergence_csv, write_curve_csv, write_field_csv};
pub use solver::{assemble, relative_linf, run_benchmark, run_mesh, Assembly, Benchmark, ConvergenceLog, FemConfig, FemResult, GaussStore};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FemError {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("material failure in element {elem}, Gauss point {gp}: {source}")]
    Material {
        elem: usize,
        gp: usize,
        #[source]
        source: plastokit::Error,
    },
    #[error("global Newton did not converge in increment {increment} (relative residual {relres:e})")]
    GlobalNoConvergence { increment: usize, relres: f64 },
    #[error("singular global stiffness in increment {0}")]
    SingularStiffness(usize),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FemError>;
