//! Operator factorizations, spark machinery, iteration regularity and the
//! penthouse family.

pub(crate) mod minors;
mod operator;
mod penthouse;
mod regularity;
mod spark;

pub use operator::{
    circulant_matrix, ComplexMatrixFile, Factorization, JordanGroup, JordanGroupFile, OperatorFile,
    OperatorSpec, SpectralRoot, OPERATOR_SCHEMA,
};
pub use penthouse::{penthouse_family, SpectralProfile};
pub use regularity::{
    iteration_regular, iteration_regular_roots, jordan_cell_regular, IterationWitness,
    RegularityVerdict, REGULARITY_MAX_DEGREE, REGULARITY_MAX_DIMENSION,
};
pub use spark::{
    build_lambda_matrix, spark, totally_full_spark, SingularMinor, TfsVerdict, SPARK_MAX_COLUMNS,
    TFS_MINOR_BUDGET,
};
