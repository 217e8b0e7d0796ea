//! Mixed finite element spaces on quadrilaterals and their operators.

pub mod assembly;
pub mod element;
pub mod space;

pub use assembly::*;
pub use element::{DisplacementElement, FluxElement, NodeLocation, PressureElement};
pub use space::{
    build_displacement_space, build_flux_space, build_pressure_space, DisplacementConstraints,
    DofMap, SpaceElement, SpaceKind, Spaces,
};
