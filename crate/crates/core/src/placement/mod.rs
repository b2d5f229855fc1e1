//! Qubit grouping, atom assignment and array loading.

mod assign;
mod grouping;

pub use assign::{assign_atoms, initialization_schedule, Assignment, Initialized, Mapping};
pub use grouping::{
    degree_split_group, greedy_maxcut_group, interaction_edges, weighted_degrees, Group, Grouping,
};
