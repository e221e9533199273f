//! Flat key-value run configuration: one `key = value` per line, `#`
//! comments, every key optional. Unspecified keys take the reference
//! defaults (ω_s = 28800 g, Δ = 25800 g, Ω = −δ, g/2π = 100 kHz, no
//! decoherence). Parsing then serializing then parsing again is the
//! identity.

use std::fmt::Write as _;

use crate::dynamics::DecoherenceModel;
use crate::hamiltonians::{SystemParams, UnitBridge};
use crate::protocols::ModelKind;

/// A configuration error; carries the offending key or value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Spin frequency ω_s, units of g.
    pub omega_s: f64,
    /// Flux-qubit gap Δ, units of g.
    pub gap: f64,
    /// Drive amplitude Ω, units of g; `None` resolves to −δ.
    pub rabi: Option<f64>,
    /// Coupling normalization (1 by construction; kept overridable).
    pub g: f64,
    /// Flux bias ε, units of g.
    pub epsilon: f64,
    /// Unit bridge g/2π in Hz.
    pub g_over_2pi_hz: f64,
    /// Decoherence times in μs; both `None` means a closed system.
    pub t1_us: Option<f64>,
    pub tnu_us: Option<f64>,
    pub model: ModelKind,
    /// Integrator step in units of 1/g; `None` picks the model default.
    pub dt: Option<f64>,
    /// Horizon in coupling periods 2π/g; `None` picks the command default.
    pub t_max: Option<f64>,
    pub record_stride: Option<usize>,
    /// Spin preparation angles (unknown to the protocols themselves).
    pub theta: f64,
    pub varphi: f64,
    /// Flux-qubit preparation angles.
    pub alpha: f64,
    pub phi: f64,
    /// Rotation target angles.
    pub beta: f64,
    pub chi: f64,
    /// Detection scan offsets Ω + δ, units of g.
    pub detunings: Vec<f64>,
    pub iterations: usize,
    pub samples: usize,
    /// Tomography shots; `None` uses exact expectations.
    pub shots: Option<u64>,
    /// Decoupled wait during the rotation pulse, μs.
    pub idle_us: f64,
    /// Detection spin preparation: 0 or 1.
    pub spin_init: u8,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            omega_s: 28_800.0,
            gap: 25_800.0,
            rabi: None,
            g: 1.0,
            epsilon: 0.0,
            g_over_2pi_hz: 1.0e5,
            t1_us: None,
            tnu_us: None,
            model: ModelKind::Effective,
            dt: None,
            t_max: None,
            record_stride: None,
            theta: 0.0,
            varphi: 0.0,
            alpha: std::f64::consts::FRAC_PI_4,
            phi: 0.0,
            beta: 0.0,
            chi: 0.0,
            detunings: vec![0.0, 0.5, 1.0, 2.0],
            iterations: 5,
            samples: 500,
            shots: None,
            idle_us: 0.0,
            spin_init: 0,
            seed: 7,
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64, ConfigError> {
    v.parse::<f64>()
        .map_err(|_| ConfigError(format!("invalid number for `{key}`: `{v}`")))
}

fn parse_opt_f64(key: &str, v: &str, none_words: &[&str]) -> Result<Option<f64>, ConfigError> {
    if none_words.contains(&v) {
        return Ok(None);
    }
    if v == "inf" {
        return Ok(Some(f64::INFINITY));
    }
    parse_f64(key, v).map(Some)
}

fn fmt_opt(v: Option<f64>, none_word: &str) -> String {
    match v {
        None => none_word.to_string(),
        Some(x) if x.is_infinite() => "inf".to_string(),
        Some(x) => format!("{x}"),
    }
}

impl RunConfig {
    /// Apply one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        match key {
            "omega_s" => self.omega_s = parse_f64(key, v)?,
            "Delta" => self.gap = parse_f64(key, v)?,
            "Omega" => self.rabi = parse_opt_f64(key, v, &["auto"])?,
            "g" => self.g = parse_f64(key, v)?,
            "epsilon" => self.epsilon = parse_f64(key, v)?,
            "g_over_2pi_hz" => self.g_over_2pi_hz = parse_f64(key, v)?,
            "T1_us" => self.t1_us = parse_opt_f64(key, v, &["none"])?,
            "Tnu_us" => self.tnu_us = parse_opt_f64(key, v, &["none"])?,
            "model" => {
                self.model = match v {
                    "exact" => ModelKind::Exact,
                    "effective" => ModelKind::Effective,
                    _ => {
                        return Err(ConfigError(format!(
                            "invalid model `{v}` (expected `exact` or `effective`)"
                        )))
                    }
                }
            }
            "dt" => self.dt = parse_opt_f64(key, v, &["auto"])?,
            "t_max" => self.t_max = parse_opt_f64(key, v, &["auto"])?,
            "record_stride" => {
                self.record_stride = if v == "auto" {
                    None
                } else {
                    Some(v.parse::<usize>().map_err(|_| {
                        ConfigError(format!("invalid integer for `record_stride`: `{v}`"))
                    })?)
                }
            }
            "theta" => self.theta = parse_f64(key, v)?,
            "varphi" => self.varphi = parse_f64(key, v)?,
            "alpha" => self.alpha = parse_f64(key, v)?,
            "phi" => self.phi = parse_f64(key, v)?,
            "beta" => self.beta = parse_f64(key, v)?,
            "chi" => self.chi = parse_f64(key, v)?,
            "detunings" => {
                let mut out = Vec::new();
                for part in v.split(',') {
                    out.push(parse_f64(key, part.trim())?);
                }
                if out.is_empty() {
                    return Err(ConfigError("detunings list must not be empty".into()));
                }
                self.detunings = out;
            }
            "iterations" => {
                self.iterations = v
                    .parse::<usize>()
                    .map_err(|_| ConfigError(format!("invalid integer for `iterations`: `{v}`")))?
            }
            "samples" => {
                self.samples = v
                    .parse::<usize>()
                    .map_err(|_| ConfigError(format!("invalid integer for `samples`: `{v}`")))?
            }
            "shots" => {
                self.shots = if v == "exact" {
                    None
                } else {
                    Some(v.parse::<u64>().map_err(|_| {
                        ConfigError(format!("invalid shots `{v}` (expected `exact` or a count)"))
                    })?)
                }
            }
            "idle_us" => self.idle_us = parse_f64(key, v)?,
            "spin_init" => {
                self.spin_init = match v {
                    "0" => 0,
                    "1" => 1,
                    _ => return Err(ConfigError(format!("invalid spin_init `{v}` (0 or 1)"))),
                }
            }
            "seed" => {
                self.seed = v
                    .parse::<u64>()
                    .map_err(|_| ConfigError(format!("invalid integer for `seed`: `{v}`")))?
            }
            _ => return Err(ConfigError(format!("unknown config key: `{key}`"))),
        }
        Ok(())
    }

    /// Parse a whole config file body.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError(format!(
                    "line {}: expected `key = value`, got `{line}`",
                    lineno + 1
                )));
            };
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    /// Canonical text form; `parse(serialize(c)) == c`.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let det = self
            .detunings
            .iter()
            .map(|d| format!("{d}"))
            .collect::<Vec<_>>()
            .join(",");
        let _ = writeln!(s, "omega_s = {}", self.omega_s);
        let _ = writeln!(s, "Delta = {}", self.gap);
        let _ = writeln!(s, "Omega = {}", fmt_opt(self.rabi, "auto"));
        let _ = writeln!(s, "g = {}", self.g);
        let _ = writeln!(s, "epsilon = {}", self.epsilon);
        let _ = writeln!(s, "g_over_2pi_hz = {}", self.g_over_2pi_hz);
        let _ = writeln!(s, "T1_us = {}", fmt_opt(self.t1_us, "none"));
        let _ = writeln!(s, "Tnu_us = {}", fmt_opt(self.tnu_us, "none"));
        let _ = writeln!(s, "model = {}", self.model.name());
        let _ = writeln!(s, "dt = {}", fmt_opt(self.dt, "auto"));
        let _ = writeln!(s, "t_max = {}", fmt_opt(self.t_max, "auto"));
        let _ = writeln!(
            s,
            "record_stride = {}",
            self.record_stride.map_or("auto".to_string(), |v| v.to_string())
        );
        let _ = writeln!(s, "theta = {}", self.theta);
        let _ = writeln!(s, "varphi = {}", self.varphi);
        let _ = writeln!(s, "alpha = {}", self.alpha);
        let _ = writeln!(s, "phi = {}", self.phi);
        let _ = writeln!(s, "beta = {}", self.beta);
        let _ = writeln!(s, "chi = {}", self.chi);
        let _ = writeln!(s, "detunings = {det}");
        let _ = writeln!(s, "iterations = {}", self.iterations);
        let _ = writeln!(s, "samples = {}", self.samples);
        let _ = writeln!(
            s,
            "shots = {}",
            self.shots.map_or("exact".to_string(), |v| v.to_string())
        );
        let _ = writeln!(s, "idle_us = {}", self.idle_us);
        let _ = writeln!(s, "spin_init = {}", self.spin_init);
        let _ = writeln!(s, "seed = {}", self.seed);
        s
    }

    /// Drive amplitude with the `auto` default resolved to −δ.
    pub fn resolved_rabi(&self) -> f64 {
        self.rabi.unwrap_or(-(self.omega_s - self.gap))
    }

    pub fn system_params(&self) -> SystemParams {
        SystemParams {
            omega_s: self.omega_s,
            gap: self.gap,
            rabi: self.resolved_rabi(),
            g: self.g,
            epsilon: self.epsilon,
        }
    }

    pub fn bridge(&self) -> UnitBridge {
        UnitBridge { g_over_2pi_hz: self.g_over_2pi_hz }
    }

    /// Decoherence model, if T₁/T_ν are configured. Setting only one of
    /// the two is an error.
    pub fn decoherence(&self) -> Result<Option<DecoherenceModel>, ConfigError> {
        match (self.t1_us, self.tnu_us) {
            (None, None) => Ok(None),
            (Some(t1), Some(tnu)) => DecoherenceModel::from_times(t1, tnu)
                .map(Some)
                .map_err(|e| ConfigError(e.to_string())),
            (Some(_), None) => {
                Err(ConfigError("T1_us is set but Tnu_us is not (use `inf` for no Rabi decay)".into()))
            }
            (None, Some(_)) => Err(ConfigError("Tnu_us is set but T1_us is not".into())),
        }
    }

    /// Horizon in simulation time (units of 1/g), with a per-command
    /// default measured in coupling periods.
    pub fn t_max_sim(&self, default_periods: f64) -> f64 {
        self.t_max.unwrap_or(default_periods) * self.system_params().coupling_period()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_sit_at_the_reference_point() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.resolved_rabi(), -3000.0);
        let sp = cfg.system_params();
        assert_eq!(sp.detuning(), 3000.0);
        assert_eq!(sp.resonance_offset(), 0.0);
        assert!(cfg.decoherence().unwrap().is_none());
    }

    #[test]
    fn round_trip_is_identity() {
        let mut cfg = RunConfig::default();
        cfg.set("T1_us", "20").unwrap();
        cfg.set("Tnu_us", "15").unwrap();
        cfg.set("Omega", "-2999.5").unwrap();
        cfg.set("detunings", "0, 0.25, 1").unwrap();
        cfg.set("shots", "500").unwrap();
        cfg.set("dt", "0.0125").unwrap();
        let text = cfg.serialize();
        let reparsed = RunConfig::parse(&text).unwrap();
        assert_eq!(cfg, reparsed);
        assert_eq!(text, reparsed.serialize());
    }

    #[test]
    fn unknown_keys_are_named_in_the_error() {
        let err = RunConfig::parse("bogus_key = 3\n").unwrap_err();
        assert!(err.0.contains("bogus_key"), "{err}");
    }

    #[test]
    fn comments_and_blank_lines_are_ignored() {
        let cfg = RunConfig::parse("# header\n\nseed = 11 # trailing\n").unwrap();
        assert_eq!(cfg.seed, 11);
    }

    #[test]
    fn partial_decoherence_is_rejected() {
        let mut cfg = RunConfig::default();
        cfg.set("T1_us", "20").unwrap();
        assert!(cfg.decoherence().is_err());
        cfg.set("Tnu_us", "inf").unwrap();
        let dec = cfg.decoherence().unwrap().unwrap();
        assert_eq!(dec.gamma_plus_per_us(), dec.gamma_minus_per_us());
    }

    #[test]
    fn infinite_tnu_round_trips() {
        let mut cfg = RunConfig::default();
        cfg.set("T1_us", "10").unwrap();
        cfg.set("Tnu_us", "inf").unwrap();
        let reparsed = RunConfig::parse(&cfg.serialize()).unwrap();
        assert_eq!(cfg, reparsed);
    }
}
