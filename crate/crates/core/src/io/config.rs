//! TOML scenario configuration.
//!
//! ```toml
//! [radar]
//! f_min = 76e9
//! f_max = 78e9
//! B_min = 100e6
//! B_max = 200e6
//! Tchirp_min = 20e-6
//! Tchirp_max = 40e-6
//! f_s = 20e6
//! lpf_cutoff = 10e6
//!
//! [scene]
//! range_min = 1.0
//! range_max = 130.0
//!
//! [baselines]
//! tdt_beta = 3.0
//! tdt_replace = "zero"
//! envelope_window = 31
//!
//! [train]
//! epochs = 30
//! ```
//!
//! Every key is optional and unknown keys are rejected by name.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::mitigation::{MitigationConfig, Replacement};
use crate::radar::SceneBounds;
use crate::train::TrainConfig;
use crate::{Error, Result, NUM_CHIRPS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadarSection {
    pub f_min: f64,
    pub f_max: f64,
    #[serde(rename = "B_min")]
    pub b_min: f64,
    #[serde(rename = "B_max")]
    pub b_max: f64,
    #[serde(rename = "Tchirp_min")]
    pub tchirp_min: f64,
    #[serde(rename = "Tchirp_max")]
    pub tchirp_max: f64,
    pub f_s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lpf_cutoff: Option<f64>,
    pub num_chirps: usize,
}

impl Default for RadarSection {
    fn default() -> Self {
        let b = SceneBounds::default();
        Self {
            f_min: b.carrier_hz.0,
            f_max: b.carrier_hz.1,
            b_min: b.bandwidth_hz.0,
            b_max: b.bandwidth_hz.1,
            tchirp_min: b.chirp_duration_s.0,
            tchirp_max: b.chirp_duration_s.1,
            f_s: b.sample_rate_hz,
            lpf_cutoff: b.lpf_cutoff_hz,
            num_chirps: NUM_CHIRPS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneSection {
    pub range_min: f64,
    pub range_max: f64,
    pub velocity_min_kmh: f64,
    pub velocity_max_kmh: f64,
    pub targets_min: usize,
    pub targets_max: usize,
    pub interferers_min: usize,
    pub interferers_max: usize,
    pub snr_min_db: f64,
    pub snr_max_db: f64,
    pub interferer_ratio_min: f64,
    pub interferer_ratio_max: f64,
}

impl Default for SceneSection {
    fn default() -> Self {
        let b = SceneBounds::default();
        Self {
            range_min: b.range_m.0,
            range_max: b.range_m.1,
            velocity_min_kmh: b.velocity_kmh.0,
            velocity_max_kmh: b.velocity_kmh.1,
            targets_min: b.targets.0,
            targets_max: b.targets.1,
            interferers_min: b.interferers.0,
            interferers_max: b.interferers.1,
            snr_min_db: b.snr_db.0,
            snr_max_db: b.snr_db.1,
            interferer_ratio_min: b.interferer_amplitude_ratio.0,
            interferer_ratio_max: b.interferer_amplitude_ratio.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselinesSection {
    pub tdt_beta: f64,
    pub tdt_replace: Replacement,
    pub envelope_window: usize,
}

impl Default for BaselinesSection {
    fn default() -> Self {
        let m = MitigationConfig::default();
        Self {
            tdt_beta: m.tdt_beta,
            tdt_replace: m.tdt_replace,
            envelope_window: m.envelope_window,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub radar: RadarSection,
    pub scene: SceneSection,
    pub baselines: BaselinesSection,
    pub train: TrainConfig,
}

impl ScenarioConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let de = toml::Deserializer::new(text);
        let config: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let reason = e.into_inner().message().trim().to_string();
            let key = if path == "." { "<document>".to_string() } else { path };
            Error::Config { key, reason }
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn bounds(&self) -> SceneBounds {
        let (r, s) = (&self.radar, &self.scene);
        SceneBounds {
            carrier_hz: (r.f_min, r.f_max),
            bandwidth_hz: (r.b_min, r.b_max),
            chirp_duration_s: (r.tchirp_min, r.tchirp_max),
            sample_rate_hz: r.f_s,
            lpf_cutoff_hz: r.lpf_cutoff,
            num_chirps: r.num_chirps,
            range_m: (s.range_min, s.range_max),
            velocity_kmh: (s.velocity_min_kmh, s.velocity_max_kmh),
            targets: (s.targets_min, s.targets_max),
            interferers: (s.interferers_min, s.interferers_max),
            snr_db: (s.snr_min_db, s.snr_max_db),
            interferer_amplitude_ratio: (s.interferer_ratio_min, s.interferer_ratio_max),
        }
    }

    pub fn mitigation(&self) -> MitigationConfig {
        MitigationConfig {
            tdt_beta: self.baselines.tdt_beta,
            tdt_replace: self.baselines.tdt_replace,
            envelope_window: self.baselines.envelope_window,
        }
    }

    /// Check every section, reporting failures against config key names.
    pub fn validate(&self) -> Result<()> {
        let key_of = |field: &str| -> &'static str {
            match field {
                "carrier_hz" => "radar.f_min",
                "bandwidth_hz" => "radar.B_min",
                "chirp_duration_s" => "radar.Tchirp_min",
                "sample_rate_hz" => "radar.f_s",
                "lpf_cutoff_hz" => "radar.lpf_cutoff",
                "num_chirps" => "radar.num_chirps",
                "range_m" => "scene.range_min",
                "velocity_kmh" => "scene.velocity_min_kmh",
                "targets" => "scene.targets_min",
                "interferers" => "scene.interferers_min",
                "snr_db" => "scene.snr_min_db",
                "interferer_amplitude_ratio" => "scene.interferer_ratio_min",
                "tdt_beta" => "baselines.tdt_beta",
                "envelope_window" => "baselines.envelope_window",
                _ => "",
            }
        };
        let remap = |section: &str, e: Error| match e {
            Error::InvalidParameter { name, reason } => {
                let key = match key_of(name) {
                    "" => format!("{section}.{name}"),
                    k => k.to_string(),
                };
                Error::Config { key, reason }
            }
            other => other,
        };
        self.bounds().validate().map_err(|e| remap("radar", e))?;
        self.mitigation().validate().map_err(|e| remap("baselines", e))?;
        self.train.validate().map_err(|e| remap("train", e))?;
        Ok(())
    }
}
