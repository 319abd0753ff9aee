//! State specifications from JSON files or `--state/--param` flags.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::CliError;
use crate::modes::{
    make_coherent_phase_state, make_coherent_state, make_number_state, make_rotor_wavepacket,
    make_two_mode_superposition, make_two_peak_density, Complex, ModeExpansion, PhaseDensity, Truncation,
};
use crate::phase_stats::PhaseSource;

/// Tolerance on the squared norm of explicit coefficients before renormalizing.
pub const EXPLICIT_NORM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StateType {
    Number,
    Wavepacket,
    TwoMode,
    CoherentPhase,
    Coherent,
    TwoPeak,
    Explicit,
}

impl StateType {
    pub const ALL: [StateType; 7] = [
        StateType::Number,
        StateType::Wavepacket,
        StateType::TwoMode,
        StateType::CoherentPhase,
        StateType::Coherent,
        StateType::TwoPeak,
        StateType::Explicit,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            StateType::Number => "number",
            StateType::Wavepacket => "wavepacket",
            StateType::TwoMode => "two_mode",
            StateType::CoherentPhase => "coherent_phase",
            StateType::Coherent => "coherent",
            StateType::TwoPeak => "two_peak",
            StateType::Explicit => "explicit",
        }
    }

    pub fn parse(s: &str) -> Result<Self, CliError> {
        Self::ALL.into_iter().find(|t| t.as_str() == s).ok_or_else(|| {
            let names: Vec<&str> = Self::ALL.iter().map(|t| t.as_str()).collect();
            CliError::invalid(format!(
                "type: unknown state type {s:?}; expected one of {}",
                names.join(", ")
            ))
        })
    }

    /// `(required, optional)` parameter names.
    fn params(&self) -> (&'static [&'static str], &'static [&'static str]) {
        match self {
            StateType::Number => (&["l"], &[]),
            StateType::Wavepacket => (&["epsilon"], &["beta"]),
            StateType::TwoMode => (&["l", "L", "gamma"], &["beta"]),
            // either zeta_abs (+ zeta_arg) or epsilon (+ beta); checked separately
            StateType::CoherentPhase => (&[], &["zeta_abs", "zeta_arg", "epsilon", "beta"]),
            StateType::Coherent => (&["r"], &["beta"]),
            StateType::TwoPeak => (&["delta"], &[]),
            StateType::Explicit => (&[], &[]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoeffEntry {
    pub l: i64,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

/// A validated state description.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpec {
    pub kind: StateType,
    pub params: BTreeMap<String, f64>,
    pub coeffs: Vec<CoeffEntry>,
}

/// A built state: a wavefunction, or a phase density with no wavefunction.
#[derive(Debug, Clone, PartialEq)]
pub enum BuiltState {
    Modes(ModeExpansion),
    Density(PhaseDensity),
}

impl BuiltState {
    pub fn source(&self) -> PhaseSource<'_> {
        match self {
            BuiltState::Modes(m) => PhaseSource::Modes(m),
            BuiltState::Density(d) => PhaseSource::Density(d),
        }
    }

    pub fn modes(&self) -> Option<&ModeExpansion> {
        match self {
            BuiltState::Modes(m) => Some(m),
            BuiltState::Density(_) => None,
        }
    }
}

fn number_field(key: &str, v: &Value) -> Result<f64, CliError> {
    match v {
        Value::Number(n) => n
            .as_f64()
            .ok_or_else(|| CliError::invalid(format!("{key}: not representable as a number"))),
        Value::String(s) => parse_value(s).map_err(|e| CliError::invalid(format!("{key}: {e}"))),
        _ => Err(CliError::invalid(format!("{key}: expected a number, got {v}"))),
    }
}

impl StateSpec {
    pub fn new(kind: StateType, params: BTreeMap<String, f64>, coeffs: Vec<CoeffEntry>) -> Result<Self, CliError> {
        let spec = Self { kind, params, coeffs };
        spec.validate()?;
        Ok(spec)
    }

    /// Parses `{"type": ..., "params": {...}, "coeffs": [...]}`. Parameters may
    /// also be given as top-level fields.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let v: Value =
            serde_json::from_str(text).map_err(|e| CliError::invalid(format!("spec is not valid JSON: {e}")))?;
        let obj = v
            .as_object()
            .ok_or_else(|| CliError::invalid("spec must be a JSON object"))?;
        let kind = match obj.get("type") {
            Some(Value::String(s)) => StateType::parse(s)?,
            Some(other) => return Err(CliError::invalid(format!("type: expected a string, got {other}"))),
            None => return Err(CliError::invalid("type: missing field")),
        };
        let mut params = BTreeMap::new();
        let mut coeffs = Vec::new();
        for (key, value) in obj {
            match key.as_str() {
                "type" => {}
                "params" => {
                    let p = value
                        .as_object()
                        .ok_or_else(|| CliError::invalid("params: expected an object"))?;
                    for (k, v) in p {
                        if params.insert(k.clone(), number_field(k, v)?).is_some() {
                            return Err(CliError::invalid(format!("{k}: given more than once")));
                        }
                    }
                }
                "coeffs" => {
                    coeffs =
                        serde_json::from_value(value.clone()).map_err(|e| CliError::invalid(format!("coeffs: {e}")))?;
                }
                k => {
                    if params.insert(k.to_string(), number_field(k, value)?).is_some() {
                        return Err(CliError::invalid(format!("{k}: given more than once")));
                    }
                }
            }
        }
        Self::new(kind, params, coeffs)
    }

    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::invalid(format!("cannot read spec {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// `--state TYPE --param k=v ...`.
    pub fn from_flags(kind: &str, params: &[String]) -> Result<Self, CliError> {
        let kind = StateType::parse(kind)?;
        if kind == StateType::Explicit {
            return Err(CliError::invalid(
                "type: explicit states need a --spec file with coeffs",
            ));
        }
        let mut map = BTreeMap::new();
        for p in params {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| CliError::invalid(format!("--param {p:?}: expected key=value")))?;
            let x = parse_value(v).map_err(|e| CliError::invalid(format!("{k}: {e}")))?;
            if map.insert(k.trim().to_string(), x).is_some() {
                return Err(CliError::invalid(format!("{k}: given more than once")));
            }
        }
        Self::new(kind, map, Vec::new())
    }

    pub fn to_json(&self) -> Value {
        let mut obj = serde_json::Map::new();
        obj.insert("type".into(), Value::from(self.kind.as_str()));
        if !self.params.is_empty() {
            let p: serde_json::Map<String, Value> =
                self.params.iter().map(|(k, v)| (k.clone(), Value::from(*v))).collect();
            obj.insert("params".into(), Value::Object(p));
        }
        if !self.coeffs.is_empty() {
            obj.insert("coeffs".into(), serde_json::to_value(&self.coeffs).expect("plain data"));
        }
        Value::Object(obj)
    }

    /// Explicit spec reproducing a given state.
    pub fn explicit_from(state: &ModeExpansion) -> Self {
        let coeffs = (state.l_min()..=state.l_max())
            .map(|l| {
                let c = state.coeff(l);
                CoeffEntry { l, re: c.re, im: c.im }
            })
            .collect();
        Self {
            kind: StateType::Explicit,
            params: BTreeMap::new(),
            coeffs,
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        let (required, optional) = self.kind.params();
        for k in self.params.keys() {
            if !required.contains(&k.as_str()) && !optional.contains(&k.as_str()) {
                return Err(CliError::invalid(format!(
                    "{k}: not a parameter of {} states",
                    self.kind.as_str()
                )));
            }
        }
        for r in required {
            if !self.params.contains_key(*r) {
                return Err(CliError::invalid(format!(
                    "{r}: required for {} states",
                    self.kind.as_str()
                )));
            }
        }
        for (k, v) in &self.params {
            if !v.is_finite() {
                return Err(CliError::invalid(format!("{k}: must be finite, got {v}")));
            }
        }
        match self.kind {
            StateType::CoherentPhase => {
                let polar = self.params.contains_key("zeta_abs") || self.params.contains_key("zeta_arg");
                let damped = self.params.contains_key("epsilon") || self.params.contains_key("beta");
                if polar && damped {
                    return Err(CliError::invalid(
                        "zeta_abs: give either zeta_abs/zeta_arg or epsilon/beta, not both",
                    ));
                }
                if !self.params.contains_key("zeta_abs") && !self.params.contains_key("epsilon") {
                    return Err(CliError::invalid(
                        "zeta_abs: coherent_phase states need zeta_abs or epsilon",
                    ));
                }
            }
            StateType::Explicit => {
                if self.coeffs.is_empty() {
                    return Err(CliError::invalid(
                        "coeffs: explicit states need at least one coefficient",
                    ));
                }
            }
            _ => {
                if !self.coeffs.is_empty() {
                    return Err(CliError::invalid(format!(
                        "coeffs: only explicit states take coefficients, not {}",
                        self.kind.as_str()
                    )));
                }
            }
        }
        for k in ["l", "L"] {
            if let Some(v) = self.params.get(k) {
                if v.fract() != 0.0 || v.abs() > 1e15 {
                    return Err(CliError::invalid(format!("{k}: must be an integer, got {v}")));
                }
            }
        }
        Ok(())
    }

    fn get(&self, k: &str) -> f64 {
        self.params.get(k).copied().unwrap_or(0.0)
    }

    fn field_error(&self, field: &str, e: crate::PhaseError) -> CliError {
        let mut err = CliError::from(e);
        err.message = format!("{field}: {}", err.message);
        err
    }

    pub fn build(&self, trunc: Truncation) -> Result<BuiltState, CliError> {
        let s = match self.kind {
            StateType::Number => make_number_state(self.get("l") as i64).map_err(|e| self.field_error("l", e))?,
            StateType::Wavepacket => make_rotor_wavepacket(self.get("epsilon"), self.get("beta"), trunc)
                .map_err(|e| self.field_error("epsilon", e))?,
            StateType::TwoMode => make_two_mode_superposition(
                self.get("l") as i64,
                self.get("L") as i64,
                self.get("gamma"),
                self.get("beta"),
            )
            .map_err(|e| self.field_error("L", e))?,
            StateType::CoherentPhase => {
                let zeta = if self.params.contains_key("zeta_abs") {
                    Complex::from_polar(self.get("zeta_abs"), self.get("zeta_arg"))
                } else {
                    // peak at β
                    Complex::from_polar((-self.get("epsilon")).exp(), -self.get("beta"))
                };
                let field = if self.params.contains_key("zeta_abs") {
                    "zeta_abs"
                } else {
                    "epsilon"
                };
                if self.params.contains_key("epsilon") && !(self.get("epsilon") > 0.0) {
                    return Err(CliError::invalid("epsilon: must be positive"));
                }
                if self.params.contains_key("zeta_abs") && self.get("zeta_abs") < 0.0 {
                    return Err(CliError::invalid("zeta_abs: must be non-negative"));
                }
                make_coherent_phase_state(zeta, trunc).map_err(|e| self.field_error(field, e))?
            }
            StateType::Coherent => {
                make_coherent_state(self.get("r"), self.get("beta"), trunc).map_err(|e| self.field_error("r", e))?
            }
            StateType::TwoPeak => {
                return Ok(BuiltState::Density(
                    make_two_peak_density(self.get("delta")).map_err(|e| self.field_error("delta", e))?,
                ))
            }
            StateType::Explicit => {
                let pairs: Vec<(i64, Complex)> = self.coeffs.iter().map(|c| (c.l, Complex::new(c.re, c.im))).collect();
                let s = ModeExpansion::from_pairs(&pairs, false).map_err(|e| self.field_error("coeffs", e))?;
                let n = s.norm_sqr();
                if (n - 1.0).abs() > EXPLICIT_NORM_TOL {
                    return Err(CliError::invalid(format!(
                        "coeffs: squared norm {n} is not within {EXPLICIT_NORM_TOL:e} of 1"
                    )));
                }
                s.normalized().map_err(|e| self.field_error("coeffs", e))?
            }
        };
        Ok(BuiltState::Modes(s))
    }

    /// Copy with one parameter replaced, for sweeps.
    pub fn with_param(&self, key: &str, value: f64) -> Result<Self, CliError> {
        let (required, optional) = self.kind.params();
        if !required.contains(&key) && !optional.contains(&key) {
            return Err(CliError::invalid(format!(
                "{key}: not a parameter of {} states",
                self.kind.as_str()
            )));
        }
        let mut params = self.params.clone();
        params.insert(key.to_string(), value);
        Self::new(self.kind, params, self.coeffs.clone())
    }
}

/// Parses a real number, allowing multiples and fractions of `pi`
/// (`pi`, `-pi/2`, `3*pi/4`, `2pi`, `1e-3`).
pub fn parse_value(s: &str) -> Result<f64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err("empty value".into());
    }
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a, Some(b)),
        None => (t.as_str(), None),
    };
    let numerator = if let Some(pre) = num.strip_suffix("pi") {
        let pre = pre.strip_suffix('*').unwrap_or(pre);
        let factor = match pre {
            "" | "+" => 1.0,
            "-" => -1.0,
            p => p.parse::<f64>().map_err(|_| format!("cannot parse {s:?}"))?,
        };
        factor * PI
    } else {
        num.parse::<f64>().map_err(|_| format!("cannot parse {s:?}"))?
    };
    let v = match den {
        Some(d) => {
            let d = d.parse::<f64>().map_err(|_| format!("cannot parse {s:?}"))?;
            if d == 0.0 {
                return Err(format!("division by zero in {s:?}"));
            }
            numerator / d
        }
        None => numerator,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}

/// Comma-separated list of values for sweeps.
pub fn parse_value_list(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|p| parse_value(p).map_err(|e| CliError::invalid(format!("--values: {e}"))))
        .collect()
}
