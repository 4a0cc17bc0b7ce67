//! Experiment configuration and its flat `key = value` text format.
//!
//! ```text
//! # comments run to end of line
//! tx.power_dbm = 25
//! irs.elements = 4
//! solvers = bcd-discrete, sdp, exhaustive
//! sweep.param = lp
//! sweep.values = 2, 4, 8, 16
//! ```

use std::fmt;
use std::str::FromStr;

use crate::bcd::{BcdConfig, BcdInit};
use crate::channel::{ArrayGeometry, BlockingTarget, EveSite, PathGainModel, ScenarioGeometry, DEFAULT_ABSORPTION_300GHZ};
use crate::error::{Error, Result};
use crate::exhaustive::DEFAULT_ENUMERATION_CAP;
use crate::sdp::SdpOptions;
use crate::secrecy::NoisePowers;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Solver {
    BcdDiscrete,
    BcdContinuous,
    Sdp,
    Exhaustive,
    SecrecyOblivious,
}

impl Solver {
    pub const ALL: [Solver; 5] = [
        Solver::BcdDiscrete,
        Solver::BcdContinuous,
        Solver::Sdp,
        Solver::Exhaustive,
        Solver::SecrecyOblivious,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Solver::BcdDiscrete => "bcd-discrete",
            Solver::BcdContinuous => "bcd-continuous",
            Solver::Sdp => "sdp",
            Solver::Exhaustive => "exhaustive",
            Solver::SecrecyOblivious => "oblivious",
        }
    }
}

impl fmt::Display for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Solver::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown solver `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    PhaseLevels,
    Power,
    Elements,
    Rho,
}

impl SweepParam {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::PhaseLevels => "lp",
            SweepParam::Power => "power",
            SweepParam::Elements => "elements",
            SweepParam::Rho => "rho",
        }
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lp" => Ok(SweepParam::PhaseLevels),
            "power" => Ok(SweepParam::Power),
            "elements" => Ok(SweepParam::Elements),
            "rho" => Ok(SweepParam::Rho),
            _ => Err(Error::Config(format!("unknown sweep parameter `{s}` (lp|power|elements|rho)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

/// Every physical and algorithmic parameter of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub carrier_frequency: f64,
    pub absorption_coefficient: f64,
    pub antenna_gain_dbi: f64,
    pub num_paths: usize,
    pub power_dbm: f64,
    pub bs_antennas: usize,
    pub rf_chains: usize,
    pub irs_elements: usize,
    /// URA rows; `None` picks a near-square layout.
    pub irs_rows: Option<usize>,
    pub phase_levels: usize,
    pub element_spacing: f64,
    pub geometry: ScenarioGeometry,
    pub noise_bob_dbm: f64,
    pub noise_eve_dbm: f64,
    pub solvers: Vec<Solver>,
    pub num_trials: usize,
    pub master_seed: u64,
    pub sweep: Option<Sweep>,
    pub bcd: BcdConfig,
    pub sdp: SdpOptions,
    pub exhaustive_cap: u64,
    pub alternation_max_rounds: usize,
    pub alternation_tolerance: f64,
    /// Record wall-clock solver times. Off by default so output is reproducible.
    pub timing: bool,
    pub parallel: bool,
}

pub const CI_TRIALS: usize = 100;
pub const FULL_TRIALS: usize = 1000;

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            carrier_frequency: 0.3e12,
            absorption_coefficient: DEFAULT_ABSORPTION_300GHZ,
            antenna_gain_dbi: 12.0,
            num_paths: 3,
            power_dbm: 25.0,
            bs_antennas: 16,
            rf_chains: 10,
            irs_elements: 4,
            irs_rows: None,
            phase_levels: 8,
            element_spacing: 0.5,
            geometry: ScenarioGeometry::default(),
            noise_bob_dbm: -85.0,
            noise_eve_dbm: -85.0,
            solvers: vec![Solver::BcdDiscrete, Solver::BcdContinuous, Solver::Sdp, Solver::Exhaustive],
            num_trials: CI_TRIALS,
            master_seed: 1,
            sweep: None,
            bcd: BcdConfig::default(),
            sdp: SdpOptions::default(),
            exhaustive_cap: DEFAULT_ENUMERATION_CAP,
            alternation_max_rounds: 20,
            alternation_tolerance: 1e-5,
            timing: false,
            parallel: true,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{value}`")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::Config(format!("`{key}`: expected a boolean, got `{value}`"))),
    }
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

impl ExperimentConfig {
    /// Parses the text format on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {}", lineno + 1, strip_prefix(&e))))?;
        }
        Ok(cfg)
    }

    /// Sets one dotted key; used by the file parser and CLI overrides.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let g = &mut self.geometry;
        match key {
            "channel.frequency_hz" => self.carrier_frequency = parse_num(key, value)?,
            "channel.absorption_per_m" => self.absorption_coefficient = parse_num(key, value)?,
            "channel.antenna_gain_dbi" => self.antenna_gain_dbi = parse_num(key, value)?,
            "channel.paths" => self.num_paths = parse_num(key, value)?,
            "tx.power_dbm" => self.power_dbm = parse_num(key, value)?,
            "tx.antennas" => self.bs_antennas = parse_num(key, value)?,
            "tx.rf_chains" => self.rf_chains = parse_num(key, value)?,
            "irs.elements" => self.irs_elements = parse_num(key, value)?,
            "irs.rows" => self.irs_rows = Some(parse_num(key, value)?),
            "irs.levels" => self.phase_levels = parse_num(key, value)?,
            "array.spacing" => self.element_spacing = parse_num(key, value)?,
            "geometry.d_sr" => g.d_sr = parse_num(key, value)?,
            "geometry.d_rd" => g.d_rd = parse_num(key, value)?,
            "geometry.d_re" => g.d_re = parse_num(key, value)?,
            "geometry.d_se" => g.d_se = parse_num(key, value)?,
            "geometry.bs_departure_deg" => g.bs_departure = parse_num::<f64>(key, value)?.to_radians(),
            "geometry.irs_azimuth_deg" => g.irs_arrival_azimuth = parse_num::<f64>(key, value)?.to_radians(),
            "geometry.irs_elevation_deg" => g.irs_arrival_elevation = parse_num::<f64>(key, value)?.to_radians(),
            "eve.site" => {
                g.eve_site = match value {
                    "irs" => EveSite::Irs,
                    "bs" => EveSite::Bs,
                    _ => return Err(Error::Config(format!("`{key}`: expected irs|bs, got `{value}`"))),
                }
            }
            "blocking.target" => {
                g.blocking_target = match value {
                    "none" => BlockingTarget::None,
                    "irs" => BlockingTarget::IrsBeam,
                    "bs" => BlockingTarget::BsBeam,
                    _ => return Err(Error::Config(format!("`{key}`: expected none|irs|bs, got `{value}`"))),
                }
            }
            "blocking.rho" => g.blocking_fraction = parse_num(key, value)?,
            "noise.bob_dbm" => self.noise_bob_dbm = parse_num(key, value)?,
            "noise.eve_dbm" => self.noise_eve_dbm = parse_num(key, value)?,
            "solvers" => {
                let list: Vec<Solver> = parse_list(key, value)?;
                let mut uniq = Vec::new();
                for s in list {
                    if !uniq.contains(&s) {
                        uniq.push(s);
                    }
                }
                self.solvers = uniq;
            }
            "run.trials" => self.num_trials = parse_num(key, value)?,
            "run.seed" => self.master_seed = parse_num(key, value)?,
            "run.timing" => self.timing = parse_bool(key, value)?,
            "run.parallel" => self.parallel = parse_bool(key, value)?,
            "sweep.param" => {
                let param = value.parse()?;
                let values = self.sweep.take().map(|s| s.values).unwrap_or_default();
                self.sweep = Some(Sweep { param, values });
            }
            "sweep.values" => {
                let values = parse_list(key, value)?;
                let param = self.sweep.as_ref().map_or(SweepParam::PhaseLevels, |s| s.param);
                self.sweep = Some(Sweep { param, values });
            }
            "bcd.epsilon" => self.bcd.epsilon = parse_num(key, value)?,
            "bcd.max_iters" => self.bcd.max_iters = parse_num(key, value)?,
            "bcd.init" => {
                self.bcd.init = match value {
                    "bob" => BcdInit::BobAligned,
                    "zero" => BcdInit::Zero,
                    _ => return Err(Error::Config(format!("`{key}`: expected bob|zero, got `{value}`"))),
                }
            }
            "sdp.samples" => self.sdp.num_samples = parse_num(key, value)?,
            "sdp.tolerance" => self.sdp.tolerance = parse_num(key, value)?,
            "exhaustive.cap" => self.exhaustive_cap = parse_num(key, value)?,
            "alternation.max_rounds" => self.alternation_max_rounds = parse_num(key, value)?,
            "alternation.tolerance" => self.alternation_tolerance = parse_num(key, value)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.bs_antennas == 0 || self.irs_elements == 0 {
            return fail("antenna and element counts must be >= 1".into());
        }
        if self.rf_chains == 0 || self.rf_chains > self.bs_antennas {
            return fail(format!(
                "RF chains must lie in 1..={} (BS antennas), got {}",
                self.bs_antennas, self.rf_chains
            ));
        }
        if self.phase_levels < 2 {
            return fail(format!("phase levels must be >= 2, got {}", self.phase_levels));
        }
        if self.num_trials == 0 {
            return fail("trial count must be >= 1".into());
        }
        if self.num_paths == 0 {
            return fail("path count must be >= 1".into());
        }
        if self.solvers.is_empty() {
            return fail("no solvers selected".into());
        }
        if let Some(rows) = self.irs_rows {
            if rows == 0 || !self.irs_elements.is_multiple_of(rows) {
                return fail(format!("irs.rows = {rows} does not divide {} elements", self.irs_elements));
            }
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return fail("sweep values must be non-empty".into());
            }
            for &v in &sweep.values {
                self.at(sweep.param, v)?;
            }
        }
        self.path_gain_model().validate().map_err(as_config)?;
        self.noise().validate().map_err(as_config)?;
        self.geometry.validate().map_err(as_config)?;
        self.bs_geometry().map_err(as_config)?;
        self.irs_geometry().map_err(as_config)?;
        Ok(())
    }

    /// Copy of this config with the swept parameter set to `value`.
    pub fn at(&self, param: SweepParam, value: f64) -> Result<Self> {
        let mut cfg = self.clone();
        let as_count = |v: f64, min: usize| -> Result<usize> {
            if v.fract() == 0.0 && v >= min as f64 && v <= u32::MAX as f64 {
                Ok(v as usize)
            } else {
                Err(Error::Config(format!(
                    "sweep value {v} for `{}` must be an integer >= {min}",
                    param.name()
                )))
            }
        };
        match param {
            SweepParam::PhaseLevels => cfg.phase_levels = as_count(value, 2)?,
            SweepParam::Elements => {
                cfg.irs_elements = as_count(value, 1)?;
                cfg.irs_rows = None;
            }
            SweepParam::Power => {
                if !value.is_finite() {
                    return Err(Error::Config(format!("invalid power {value}")));
                }
                cfg.power_dbm = value
            }
            SweepParam::Rho => {
                if !(0.0..=1.0).contains(&value) {
                    return Err(Error::Config(format!("blocking fraction {value} outside [0, 1]")));
                }
                cfg.geometry.blocking_fraction = value
            }
        }
        Ok(cfg)
    }

    pub fn path_gain_model(&self) -> PathGainModel {
        PathGainModel {
            carrier_frequency: self.carrier_frequency,
            absorption_coefficient: self.absorption_coefficient,
            tx_gain_dbi: self.antenna_gain_dbi,
            rx_gain_dbi: self.antenna_gain_dbi,
        }
    }

    pub fn noise(&self) -> NoisePowers {
        NoisePowers::from_dbm(self.noise_bob_dbm, self.noise_eve_dbm)
    }

    pub fn bs_geometry(&self) -> Result<ArrayGeometry> {
        ArrayGeometry::ula(self.bs_antennas, self.element_spacing)
    }

    pub fn irs_geometry(&self) -> Result<ArrayGeometry> {
        match self.irs_rows {
            Some(rows) if rows > 0 && self.irs_elements.is_multiple_of(rows) => {
                ArrayGeometry::ura(rows, self.irs_elements / rows, self.element_spacing)
            }
            Some(rows) => Err(Error::Config(format!(
                "irs.rows = {rows} does not divide {} elements",
                self.irs_elements
            ))),
            None => ArrayGeometry::square_ura(self.irs_elements, self.element_spacing),
        }
    }
}

fn as_config(e: Error) -> Error {
    match e {
        Error::Config(_) => e,
        other => Error::Config(other.to_string()),
    }
}

fn strip_prefix(e: &Error) -> String {
    match e {
        Error::Config(m) => m.clone(),
        other => other.to_string(),
    }
}
