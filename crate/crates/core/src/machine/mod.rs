//! Array geometry, physical parameters, SLM grids and AOD column state.

mod aod;
mod grid;
mod layout;
mod params;

pub use aod::{AodColumn, AodState, ColumnAtom};
pub use grid::{generate_grid, validate_geometry, GeometryViolation, GridKind, SlmGrid};
pub use layout::{build_layout, layout_capacity, Scale, Side, ZoneLayout, CORRIDOR_MARGIN};
pub use params::{load_params, ParamConfig, PhysParams, INTERACTION_OFFSET};
