//! Real-space discretization of the Hopfield eigenproblem along z at fixed
//! in-plane wavevector, with Kreĭn-space diagnostics.

mod band;
mod grid;
mod operator;
mod solve;

pub use band::{eigenpairs_in_range, BandLu, SymBand, SymBuilder};
pub use grid::{Boundary, Grid1D, MaterialMap, NodeOscillator, Stagger, MIN_CELLS};
pub use operator::{
    assemble_operator, assemble_operator_with, AssembleOptions, Axis, DiscreteOperator, Dof, DofKind,
    Polarization, POINTS_PER_WAVELENGTH,
};
pub use solve::{
    completeness_check, eigen_residual, hopfield_coefficients, krein_inner, orthonormality_defect,
    pairing_defect, solve_spectrum, transverse_projection, CompletenessReport, DiscreteEigenSolution,
    GridSample, HopfieldField, SolverChoice, DENSE_CELL_LIMIT, KREIN_NULL_TOL,
};
