use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("partial derivative in nonlocal variable r{0}: use nonlocal EL rules")]
    NonlocalPartial(u32),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NonlocalError {
    #[error("nonlocal variable r{0} is not registered")]
    Unregistered(u32),
    #[error("density has odd degree 0; nonlocal variables need odd degree >= 1")]
    EvenDensity,
    #[error("density is not homogeneous in the odd degree")]
    InhomogeneousDensity,
    #[error("local operation applied to an expression with nonlocal factors")]
    NonlocalInput,
    #[error("unsupported nonlocal structure: {0}")]
    UnsupportedStructure(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("metric is singular")]
    SingularMetric,
    #[error("matrix has wrong shape: expected {expected}x{expected}")]
    Shape { expected: usize },
    #[error("metric data entry {0} depends on derivatives; only u^i are allowed")]
    JetDependence(String),
}
