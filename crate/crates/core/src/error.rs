use thiserror::Error;



#[derive(Debug, Error)]
pub enum MeshError {
    #[error("triangle {triangle} references vertex {vertex}, but the mesh has {n_vertices} vertices")]
    IndexOutOfRange {
        triangle: usize,
        vertex: usize,
        n_vertices: usize,
    },
    #[error("triangle {0} is degenerate (zero area)")]
    Degenerate(usize),
    #[error("edge ({0}, {1}) is shared by more than two triangles")]
    NonManifoldEdge(usize, usize),
    #[error("vertex {vertex} hangs on edge ({a}, {b})")]
    HangingVertex { vertex: usize, a: usize, b: usize },
    #[error("triangle id {0} out of range")]
    TriangleOutOfRange(usize),
    #[error("mesh file line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum ElementError {
    #[error("the Bell element is only available on the reference triangle (0,0),(1,0),(0,1)")]
    BellNotReference,
    #[error("{0:?} is not supported for global assembly")]
    UnsupportedKind(String),
    #[error("point lies outside triangle {triangle} (barycentric {lambda:?})")]
    PointOutside { triangle: usize, lambda: [f64; 3] },
    #[error("the interpolated function does not provide second derivatives (needed by Bell)")]
    MissingHessian,
    #[error("field has {got} coefficients, the space has {expected} degrees of freedom")]
    FieldSize { expected: usize, got: usize },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

#[derive(Debug, Error)]
pub enum QuadratureError {
    #[error("no stocked rule of degree {degree} (supported: {min}..={max})")]
    DegreeOutOfRange { degree: usize, min: usize, max: usize },
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("conjugate gradient stopped after {iterations} iterations with relative residual {residual:e}")]
    CgNotConverged {
        iterations: usize,
        residual: f64,
        best: Vec<f64>,
    },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Element(#[from] ElementError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("effectivity needs a positive error, got {0}")]
    ZeroError(f64),
}
