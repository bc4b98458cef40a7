//! Run configuration: parsing, defaults, validation.
//!
//! A configuration document is TOML with a `schema_version` field and a
//! closed key set; unknown keys are rejected so typos cannot silently
//! fall back to defaults. The shipped default document is embedded and
//! is the single source of truth for every model constant.

use serde::{Deserialize, Serialize};

use crate::entity::Area;

/// The embedded copy of `configs/default.toml`.
pub const DEFAULT_CONFIG_TOML: &str = include_str!("../../../configs/default.toml");

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("unsupported schema_version {found} (expected {expected})")]
    SchemaVersion { found: u32, expected: u32 },
    #[error("invalid config: {key} = {value}: {reason}")]
    Invalid { key: String, value: String, reason: String },
}

pub(crate) fn invalid(key: &str, value: impl ToString, reason: &str) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.to_string(),
    }
}

/// Delivery scheme under evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scheme {
    /// Conventional two-hop delivery through the base station.
    #[serde(rename = "n2n-bs")]
    N2nBs,
    /// UAV relaying without ledger authentication.
    #[serde(rename = "n2n-uav-no-bc")]
    N2nUavNoBc,
    /// UAV relaying with ledger-backed relay authentication.
    #[serde(rename = "n2n-uav-bc")]
    N2nUavBc,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::N2nBs, Scheme::N2nUavNoBc, Scheme::N2nUavBc];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::N2nBs => "n2n-bs",
            Scheme::N2nUavNoBc => "n2n-uav-no-bc",
            Scheme::N2nUavBc => "n2n-uav-bc",
        }
    }

    pub fn uses_uavs(self) -> bool {
        !matches!(self, Scheme::N2nBs)
    }

    pub fn uses_ledger(self) -> bool {
        matches!(self, Scheme::N2nUavBc)
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "n2n-bs" => Ok(Scheme::N2nBs),
            "n2n-uav-no-bc" => Ok(Scheme::N2nUavNoBc),
            "n2n-uav-bc" => Ok(Scheme::N2nUavBc),
            other => Err(format!(
                "unknown scheme {other:?} (expected n2n-bs, n2n-uav-no-bc or n2n-uav-bc)"
            )),
        }
    }
}

/// Flow-panel sizing for the accounting window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SampleFlows {
    /// Density-scaled panel; see [`SimConfig::sample_flows_for`].
    Auto(AutoMarker),
    Fixed(u32),
}

/// Serde helper: the literal string `"auto"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AutoMarker {
    #[serde(rename = "auto")]
    Auto,
}

impl SampleFlows {
    pub const AUTO: SampleFlows = SampleFlows::Auto(AutoMarker::Auto);
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub area_width_m: f64,
    pub area_depth_m: f64,
    pub n_nodes: u32,
    pub n_uavs: u32,
    pub n_base_stations: u32,
    pub uav_altitude_m: f64,
    pub bs_mast_height_m: f64,
    pub duration_s: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub scheme: Scheme,
}

fn default_seed() -> u64 {
    42
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrafficConfig {
    pub packet_bytes: u32,
    pub interval_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MobilityConfig {
    pub v_min_mps: f64,
    pub v_max_mps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RedistributionConfig {
    pub interval_s: f64,
    pub cell_size_m: f64,
    /// 0 means relocation is instantaneous.
    pub uav_speed_mps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkBudgetConfig {
    pub max_range_m: f64,
    pub base_success: f64,
    pub path_loss_exponent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioConfig {
    pub tx_power_uav_w: f64,
    pub tx_power_node_w: f64,
    pub n2d: LinkBudgetConfig,
    pub d2d: LinkBudgetConfig,
    pub n2b: LinkBudgetConfig,
    pub d2b: LinkBudgetConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseStationConfig {
    pub capacity_pps: f64,
    pub saturation_pps: f64,
    pub saturation_exponent: f64,
    pub uav_scheme_load_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelayConfig {
    pub saturation_pps: f64,
    pub saturation_exponent: f64,
}

/// Hostile relays stay silent until the redistribution cell they sit in
/// holds at least `rogue_activation_threshold` ground nodes; lurking
/// where traffic is thin would only expose them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdversaryConfig {
    pub rogue_uav_fraction: f64,
    pub rogue_activation_threshold: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LedgerConfig {
    pub validators: u32,
    pub faulty_validators: u32,
    pub consensus_interval_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccountingConfig {
    pub sample_flows: SampleFlows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub schema_version: u32,
    pub scenario: ScenarioConfig,
    pub traffic: TrafficConfig,
    pub mobility: MobilityConfig,
    pub redistribution: RedistributionConfig,
    pub radio: RadioConfig,
    pub base_station: BaseStationConfig,
    pub relay: RelayConfig,
    pub adversary: AdversaryConfig,
    pub ledger: LedgerConfig,
    pub accounting: AccountingConfig,
}

impl SimConfig {
    /// The embedded default configuration, already validated.
    pub fn default_config() -> SimConfig {
        load_config(DEFAULT_CONFIG_TOML).expect("embedded default config must be valid")
    }

    pub fn area(&self) -> Area {
        Area { width_m: self.scenario.area_width_m, depth_m: self.scenario.area_depth_m }
    }

    /// Offered application load of the whole node population, packets/s.
    pub fn offered_load_pps(&self) -> f64 {
        self.scenario.n_nodes as f64 / self.traffic.interval_s
    }

    /// Total application packets generated over the run.
    pub fn total_flows(&self) -> u64 {
        let per_node = (self.scenario.duration_s / self.traffic.interval_s).floor() as u64;
        per_node * self.scenario.n_nodes as u64
    }

    /// Size of the observed flow panel for this run.
    ///
    /// In `auto` mode the panel grows with node density
    /// (`256 + 0.87 n + 0.0318 n^2`, clamped to the flows that exist),
    /// which keeps per-density observation effort comparable as offered
    /// load rises. A fixed integer pins the panel size directly.
    pub fn sample_flows_for(&self, n_nodes: u32) -> u32 {
        if n_nodes < 2 {
            return 0;
        }
        let available = {
            let per_node = (self.scenario.duration_s / self.traffic.interval_s).floor() as u64;
            per_node.saturating_mul(n_nodes as u64)
        };
        let wanted = match self.accounting.sample_flows {
            SampleFlows::Fixed(k) => k as u64,
            SampleFlows::Auto(_) => {
                let n = n_nodes as f64;
                (256.0 + 0.87 * n + 0.0318 * n * n).round() as u64
            }
        };
        wanted.min(available) as u32
    }

    pub fn sampled_flows(&self) -> u32 {
        self.sample_flows_for(self.scenario.n_nodes)
    }

    pub fn duration_us(&self) -> u64 {
        (self.scenario.duration_s * 1e6).round() as u64
    }

    /// Structural validation; every error names the offending key/value.
    // Range checks on floats are written in negated form (`!(x > 0.0)`)
    // so that NaN fails them too.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::SchemaVersion {
                found: self.schema_version,
                expected: SCHEMA_VERSION,
            });
        }
        let s = &self.scenario;
        if !(s.area_width_m > 0.0) {
            return Err(invalid("scenario.area_width_m", s.area_width_m, "must be positive"));
        }
        if !(s.area_depth_m > 0.0) {
            return Err(invalid("scenario.area_depth_m", s.area_depth_m, "must be positive"));
        }
        if !(s.duration_s > 0.0) {
            return Err(invalid("scenario.duration_s", s.duration_s, "must be positive"));
        }
        if s.scheme.uses_uavs() && s.n_uavs == 0 {
            return Err(invalid(
                "scenario.n_uavs",
                s.n_uavs,
                "UAV schemes need at least one UAV",
            ));
        }
        if s.n_base_stations == 0 {
            return Err(invalid(
                "scenario.n_base_stations",
                s.n_base_stations,
                "at least one base station is required",
            ));
        }
        if !(s.uav_altitude_m >= 0.0) {
            return Err(invalid("scenario.uav_altitude_m", s.uav_altitude_m, "must be >= 0"));
        }
        if !(s.bs_mast_height_m >= 0.0) {
            return Err(invalid(
                "scenario.bs_mast_height_m",
                s.bs_mast_height_m,
                "must be >= 0",
            ));
        }
        if self.traffic.packet_bytes == 0 {
            return Err(invalid("traffic.packet_bytes", self.traffic.packet_bytes, "must be >= 1"));
        }
        if !(self.traffic.interval_s > 0.0) {
            return Err(invalid("traffic.interval_s", self.traffic.interval_s, "must be positive"));
        }
        let m = &self.mobility;
        if !(m.v_min_mps > 0.0) {
            return Err(invalid("mobility.v_min_mps", m.v_min_mps, "must be positive"));
        }
        if !(m.v_max_mps >= m.v_min_mps) {
            return Err(invalid(
                "mobility.v_max_mps",
                m.v_max_mps,
                "must be >= mobility.v_min_mps",
            ));
        }
        let r = &self.redistribution;
        if !(r.interval_s > 0.0) {
            return Err(invalid("redistribution.interval_s", r.interval_s, "must be positive"));
        }
        if !(r.cell_size_m > 0.0) {
            return Err(invalid("redistribution.cell_size_m", r.cell_size_m, "must be positive"));
        }
        if !(r.uav_speed_mps >= 0.0) {
            return Err(invalid("redistribution.uav_speed_mps", r.uav_speed_mps, "must be >= 0"));
        }
        for (key, budget) in [
            ("radio.n2d", &self.radio.n2d),
            ("radio.d2d", &self.radio.d2d),
            ("radio.n2b", &self.radio.n2b),
            ("radio.d2b", &self.radio.d2b),
        ] {
            if !(budget.max_range_m > 0.0) {
                return Err(invalid(
                    &format!("{key}.max_range_m"),
                    budget.max_range_m,
                    "must be positive",
                ));
            }
            if !(0.0..=1.0).contains(&budget.base_success) {
                return Err(invalid(
                    &format!("{key}.base_success"),
                    budget.base_success,
                    "must be within [0, 1]",
                ));
            }
            if !(budget.path_loss_exponent > 0.0) {
                return Err(invalid(
                    &format!("{key}.path_loss_exponent"),
                    budget.path_loss_exponent,
                    "must be positive",
                ));
            }
        }
        // The cell links must reach everywhere a node or UAV can be.
        let area = self.area();
        let worst = (area.diagonal().powi(2)
            + (s.uav_altitude_m - s.bs_mast_height_m).powi(2))
        .sqrt();
        if self.radio.n2b.max_range_m < worst || self.radio.d2b.max_range_m < worst {
            return Err(invalid(
                "radio.n2b.max_range_m",
                self.radio.n2b.max_range_m.min(self.radio.d2b.max_range_m),
                "base-station links must cover the whole area (range below area diagonal)",
            ));
        }
        let b = &self.base_station;
        if !(b.capacity_pps > 0.0) {
            return Err(invalid("base_station.capacity_pps", b.capacity_pps, "must be positive"));
        }
        if !(b.saturation_pps > 0.0) {
            return Err(invalid(
                "base_station.saturation_pps",
                b.saturation_pps,
                "must be positive",
            ));
        }
        if !(b.saturation_exponent > 0.0) {
            return Err(invalid(
                "base_station.saturation_exponent",
                b.saturation_exponent,
                "must be positive",
            ));
        }
        if !(0.0..=1.0).contains(&b.uav_scheme_load_share) {
            return Err(invalid(
                "base_station.uav_scheme_load_share",
                b.uav_scheme_load_share,
                "must be within [0, 1]",
            ));
        }
        if !(self.relay.saturation_pps > 0.0) {
            return Err(invalid(
                "relay.saturation_pps",
                self.relay.saturation_pps,
                "must be positive",
            ));
        }
        if !(self.relay.saturation_exponent > 0.0) {
            return Err(invalid(
                "relay.saturation_exponent",
                self.relay.saturation_exponent,
                "must be positive",
            ));
        }
        let frac = self.adversary.rogue_uav_fraction;
        if !(0.0..=1.0).contains(&frac) {
            return Err(invalid("adversary.rogue_uav_fraction", frac, "must be within [0, 1]"));
        }
        let l = &self.ledger;
        if l.validators == 0 {
            return Err(invalid("ledger.validators", l.validators, "must be >= 1"));
        }
        if l.faulty_validators >= l.validators {
            return Err(invalid(
                "ledger.faulty_validators",
                l.faulty_validators,
                "must be < ledger.validators",
            ));
        }
        if !(l.consensus_interval_s > 0.0) {
            return Err(invalid(
                "ledger.consensus_interval_s",
                l.consensus_interval_s,
                "must be positive",
            ));
        }
        if let SampleFlows::Fixed(0) = self.accounting.sample_flows {
            return Err(invalid("accounting.sample_flows", 0, "must be >= 1 (or \"auto\")"));
        }
        Ok(())
    }
}

/// Parses and validates a TOML configuration document.
pub fn load_config(text: &str) -> Result<SimConfig, ConfigError> {
    let cfg: SimConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}
