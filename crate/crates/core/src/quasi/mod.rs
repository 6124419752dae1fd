//! Quasi-invariant product measures: shell densities, shift cocycles, the product
//! dichotomy and densities of linear images.

mod family;
mod kakutani;
mod kernel;
mod shell;
mod transform;

pub use family::{
    martingale_check, quasi_invariance_gap, rho_shift, support_radii, Factor, FactorFamily,
    GapReport, MartingaleReport, SupportRadii,
};
pub use kakutani::{
    beta_factor, inspect_products, kakutani_classify, orthogonality_check, KakutaniTail,
    KakutaniVerdict, OrthogonalityReport, ProductInspection,
};
pub use kernel::{OrdReading, PowerKernel};
pub use shell::{normalize_check, shell_coefficient, shell_density, NormalizationReport, ShellDensityMeasure};
pub use transform::{det, solve, transform_density};
