use serde::{Deserialize, Serialize};

use super::layout::Scale;
use crate::error::ConfigError;

/// Separation between the two atoms of a CZ pair, in µm.
pub const INTERACTION_OFFSET: f64 = 1.5;

/// Physical parameters of the array. Times in µs unless noted, distances in
/// µm, errors as probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysParams {
    pub trap_change_time: f64,
    pub aod_speed: f64,
    /// Seconds.
    pub t1: f64,
    /// Seconds.
    pub t2: f64,
    pub u3_error: f64,
    pub cz_error: f64,
    pub swap_error: f64,
    pub readout_error: f64,
    pub atom_loss: f64,
    pub u3_time: f64,
    pub cz_time: f64,
    pub interaction_radius: f64,
    pub crosstalk_radius: f64,
    pub storage_pitch: f64,
    pub max_atoms_per_column: usize,
}

impl Default for PhysParams {
    fn default() -> Self {
        PhysParams {
            trap_change_time: 125.0,
            aod_speed: 55.0,
            t1: 4.0,
            t2: 1.49,
            u3_error: 0.000127,
            cz_error: 0.0048,
            swap_error: 0.0151,
            readout_error: 0.05,
            atom_loss: 0.007,
            u3_time: 2.0,
            cz_time: 0.8,
            interaction_radius: 2.0,
            crosstalk_radius: 10.0,
            storage_pitch: 2.0,
            max_atoms_per_column: 4,
        }
    }
}

/// Overrides accepted from a parameter file. Every key is optional; unknown
/// keys are rejected.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamFile {
    trap_change_time: Option<f64>,
    aod_speed: Option<f64>,
    t1: Option<f64>,
    t2: Option<f64>,
    u3_error: Option<f64>,
    cz_error: Option<f64>,
    swap_error: Option<f64>,
    readout_error: Option<f64>,
    atom_loss: Option<f64>,
    u3_time: Option<f64>,
    cz_time: Option<f64>,
    interaction_radius: Option<f64>,
    crosstalk_radius: Option<f64>,
    storage_pitch: Option<f64>,
    max_atoms_per_column: Option<usize>,
    scale: Option<Scale>,
}

/// Parameters plus the layout override from the same file.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ParamConfig {
    pub params: PhysParams,
    pub scale: Option<Scale>,
}

impl PhysParams {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("trap_change_time", self.trap_change_time),
            ("aod_speed", self.aod_speed),
            ("t1", self.t1),
            ("t2", self.t2),
            ("u3_time", self.u3_time),
            ("cz_time", self.cz_time),
            ("interaction_radius", self.interaction_radius),
            ("crosstalk_radius", self.crosstalk_radius),
            ("storage_pitch", self.storage_pitch),
        ];
        for (name, v) in positive {
            if v <= 0.0 || !v.is_finite() {
                return Err(ConfigError::Invalid(format!("{name} must be > 0")));
            }
        }
        let probs = [
            ("u3_error", self.u3_error),
            ("cz_error", self.cz_error),
            ("swap_error", self.swap_error),
            ("readout_error", self.readout_error),
            ("atom_loss", self.atom_loss),
        ];
        for (name, v) in probs {
            if !(0.0..1.0).contains(&v) {
                return Err(ConfigError::Invalid(format!("{name} must be in [0, 1)")));
            }
        }
        if self.max_atoms_per_column == 0 {
            return Err(ConfigError::Invalid("max_atoms_per_column must be > 0".into()));
        }
        if self.interaction_radius >= self.crosstalk_radius {
            return Err(ConfigError::Invalid(
                "interaction_radius must be < crosstalk_radius".into(),
            ));
        }
        if self.interaction_radius <= INTERACTION_OFFSET {
            return Err(ConfigError::Invalid(format!(
                "interaction_radius must exceed the {INTERACTION_OFFSET} µm pair offset"
            )));
        }
        Ok(())
    }

    /// Stable short digest of the parameter set, used in schedule metadata.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let json = serde_json::to_string(self).expect("params serialize");
        hex::encode(&Sha256::digest(json.as_bytes())[..8])
    }
}

/// Merges a JSON parameter document over the defaults. `None` or an empty
/// document yields the defaults.
pub fn load_params(source: Option<&str>) -> Result<ParamConfig, ConfigError> {
    let file: ParamFile = match source.map(str::trim) {
        None | Some("") => ParamFile::default(),
        Some(text) => serde_json::from_str(text).map_err(|e| ConfigError::Malformed(e.to_string()))?,
    };
    let mut p = PhysParams::default();
    macro_rules! merge {
        ($($f:ident),*) => { $( if let Some(v) = file.$f { p.$f = v; } )* };
    }
    merge!(
        trap_change_time,
        aod_speed,
        t1,
        t2,
        u3_error,
        cz_error,
        swap_error,
        readout_error,
        atom_loss,
        u3_time,
        cz_time,
        interaction_radius,
        crosstalk_radius,
        storage_pitch,
        max_atoms_per_column
    );
    p.validate()?;
    Ok(ParamConfig {
        params: p,
        scale: file.scale,
    })
}
