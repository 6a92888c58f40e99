//! Versioned `key = value` experiment configuration.
//!
//! ```text
//! schema = 1
//! experiment = thermalize
//! seed = 7
//! mass_ratio = 1
//! u0 = 4, 0, 0
//!
//! [decohere-momentum]
//! u0_list = 1, 2, 4
//! ```
//!
//! Keys before any section header apply to every experiment kind. Keys under
//! `[kind]` apply only when `experiment = kind` and override the top level.
//! Lines starting with `#` are comments.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Result, RunError};

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Thermalize,
    RelaxMoments,
    DecohereMomentum,
    DecoherePosition,
    Visibility,
    Refraction,
    StructureFactor,
    BrownianCheck,
}

impl Kind {
    pub const ALL: [Kind; 8] = [
        Kind::Thermalize,
        Kind::RelaxMoments,
        Kind::DecohereMomentum,
        Kind::DecoherePosition,
        Kind::Visibility,
        Kind::Refraction,
        Kind::StructureFactor,
        Kind::BrownianCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::Thermalize => "thermalize",
            Kind::RelaxMoments => "relax-moments",
            Kind::DecohereMomentum => "decohere-momentum",
            Kind::DecoherePosition => "decohere-position",
            Kind::Visibility => "visibility",
            Kind::Refraction => "refraction",
            Kind::StructureFactor => "structure-factor",
            Kind::BrownianCheck => "brownian-check",
        }
    }

    pub fn parse(s: &str) -> Option<Kind> {
        Kind::ALL.into_iter().find(|k| k.name() == s)
    }

    /// Whether the kind accepts SI input.
    pub fn supports_si(self) -> bool {
        matches!(
            self,
            Kind::Thermalize | Kind::RelaxMoments | Kind::DecohereMomentum | Kind::Visibility
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    Internal,
    Si,
}

impl Units {
    pub fn name(self) -> &'static str {
        match self {
            Units::Internal => "internal",
            Units::Si => "si",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tag {
    Neutral,
    Internal,
    Si,
}

#[derive(Debug, Clone, Copy)]
enum Ty {
    Int,
    Float,
    Positive,
    NonNegative,
    Vec3,
    PositiveList,
    NonNegativeList,
    Word(&'static [&'static str]),
    Path,
}

struct KeySpec {
    name: &'static str,
    ty: Ty,
    tag: Tag,
    kinds: &'static [Kind],
}

const MC: &[Kind] = &[Kind::Thermalize, Kind::RelaxMoments, Kind::DecohereMomentum];
const MC_MOMENTS: &[Kind] = &[Kind::Thermalize, Kind::RelaxMoments];
const ALL: &[Kind] = &Kind::ALL;

const fn key(name: &'static str, ty: Ty, tag: Tag, kinds: &'static [Kind]) -> KeySpec {
    KeySpec { name, ty, tag, kinds }
}

const MODELS: &[&str] = &["constant", "power-law", "swave", "born-gaussian"];

const KEYS: &[KeySpec] = &[
    key("schema", Ty::Int, Tag::Neutral, ALL),
    key("experiment", Ty::Word(&[]), Tag::Neutral, ALL),
    key("units", Ty::Word(&["internal", "si"]), Tag::Neutral, ALL),
    key("seed", Ty::Int, Tag::Neutral, ALL),
    key("output", Ty::Path, Tag::Neutral, ALL),
    // Monte Carlo ensembles.
    key(
        "mass_ratio",
        Ty::Positive,
        Tag::Neutral,
        &[
            Kind::Thermalize,
            Kind::RelaxMoments,
            Kind::DecohereMomentum,
            Kind::DecoherePosition,
            Kind::Refraction,
        ],
    ),
    key("u0", Ty::Vec3, Tag::Neutral, MC_MOMENTS),
    key("u0_list", Ty::PositiveList, Tag::Neutral, &[Kind::DecohereMomentum]),
    key("decay_lengths", Ty::Positive, Tag::Neutral, &[Kind::DecohereMomentum]),
    key("n_traj", Ty::Int, Tag::Neutral, MC),
    key("n_samples", Ty::Int, Tag::Neutral, MC),
    key("t_max", Ty::Positive, Tag::Internal, MC_MOMENTS),
    key(
        "sigma_tot",
        Ty::Positive,
        Tag::Internal,
        &[Kind::Thermalize, Kind::RelaxMoments, Kind::DecohereMomentum, Kind::DecoherePosition],
    ),
    key(
        "n_gas",
        Ty::Positive,
        Tag::Internal,
        &[
            Kind::Thermalize,
            Kind::RelaxMoments,
            Kind::DecohereMomentum,
            Kind::DecoherePosition,
            Kind::Refraction,
            Kind::StructureFactor,
        ],
    ),
    key(
        "temperature_k",
        Ty::Positive,
        Tag::Si,
        &[Kind::Thermalize, Kind::RelaxMoments, Kind::DecohereMomentum, Kind::Visibility],
    ),
    key(
        "gas_mass_amu",
        Ty::Positive,
        Tag::Si,
        &[Kind::Thermalize, Kind::RelaxMoments, Kind::DecohereMomentum, Kind::Visibility],
    ),
    key(
        "particle_mass_amu",
        Ty::Positive,
        Tag::Si,
        &[Kind::Thermalize, Kind::RelaxMoments, Kind::DecohereMomentum, Kind::Visibility],
    ),
    key("sigma_tot_m2", Ty::Positive, Tag::Si, MC),
    key("gas_density_m3", Ty::Positive, Tag::Si, MC),
    key("t_max_s", Ty::Positive, Tag::Si, MC_MOMENTS),
    // Position decoherence.
    key(
        "model",
        Ty::Word(MODELS),
        Tag::Neutral,
        &[Kind::DecoherePosition, Kind::Refraction],
    ),
    key("power_c", Ty::Positive, Tag::Internal, &[Kind::DecoherePosition]),
    key("power_a", Ty::Float, Tag::Neutral, &[Kind::DecoherePosition]),
    key(
        "scattering_length",
        Ty::Float,
        Tag::Internal,
        &[Kind::DecoherePosition, Kind::Refraction],
    ),
    key(
        "potential_v0",
        Ty::Float,
        Tag::Internal,
        &[Kind::DecoherePosition, Kind::Refraction],
    ),
    key(
        "potential_r0",
        Ty::Positive,
        Tag::Internal,
        &[Kind::DecoherePosition, Kind::Refraction],
    ),
    key("s_max", Ty::Positive, Tag::Internal, &[Kind::DecoherePosition]),
    key("n_s", Ty::Int, Tag::Neutral, &[Kind::DecoherePosition]),
    key(
        "times",
        Ty::NonNegativeList,
        Tag::Internal,
        &[Kind::DecoherePosition, Kind::BrownianCheck],
    ),
    key("n_max", Ty::Int, Tag::Neutral, &[Kind::DecoherePosition]),
    // Visibility.
    key("c6", Ty::Positive, Tag::Internal, &[Kind::Visibility]),
    key(
        "particle_mass",
        Ty::Positive,
        Tag::Internal,
        &[Kind::Visibility, Kind::BrownianCheck],
    ),
    key("beam_momentum", Ty::NonNegative, Tag::Internal, &[Kind::Visibility]),
    key("flight_time", Ty::Positive, Tag::Internal, &[Kind::Visibility]),
    key("pressures", Ty::NonNegativeList, Tag::Internal, &[Kind::Visibility]),
    key("visibility0", Ty::Positive, Tag::Neutral, &[Kind::Visibility]),
    key("c6_j_m6", Ty::Positive, Tag::Si, &[Kind::Visibility]),
    key("beam_velocity_m_s", Ty::NonNegative, Tag::Si, &[Kind::Visibility]),
    key("flight_time_s", Ty::Positive, Tag::Si, &[Kind::Visibility]),
    key("pressures_pa", Ty::NonNegativeList, Tag::Si, &[Kind::Visibility]),
    // Refraction.
    key("k_list", Ty::PositiveList, Tag::Internal, &[Kind::Refraction]),
    // Structure factor.
    key(
        "statistics",
        Ty::Word(&["mb", "be", "fd"]),
        Tag::Neutral,
        &[Kind::StructureFactor],
    ),
    key("fugacity", Ty::Positive, Tag::Neutral, &[Kind::StructureFactor]),
    key("q_list", Ty::PositiveList, Tag::Internal, &[Kind::StructureFactor]),
    key("e_min", Ty::Float, Tag::Internal, &[Kind::StructureFactor]),
    key("e_max", Ty::Float, Tag::Internal, &[Kind::StructureFactor]),
    key("n_e", Ty::Int, Tag::Neutral, &[Kind::StructureFactor]),
    // Brownian limit.
    key("eta", Ty::Positive, Tag::Internal, &[Kind::BrownianCheck]),
    key("packet_sigma", Ty::Positive, Tag::Internal, &[Kind::BrownianCheck]),
    key("packet_p0", Ty::Float, Tag::Internal, &[Kind::BrownianCheck]),
    key("p_center", Ty::Float, Tag::Internal, &[Kind::BrownianCheck]),
    key("k_offsets", Ty::PositiveList, Tag::Internal, &[Kind::BrownianCheck]),
];

/// Defaults filled in after parsing, per kind and unit system.
fn defaults(kind: Kind, units: Units) -> &'static [(&'static str, &'static str)] {
    match (kind, units) {
        (Kind::Thermalize | Kind::RelaxMoments, Units::Internal) => &[
            ("mass_ratio", "1"),
            ("u0", "4, 0, 0"),
            ("n_traj", "1000"),
            ("n_samples", "61"),
            ("t_max", "30"),
            ("sigma_tot", "1"),
            ("n_gas", "1"),
        ],
        (Kind::Thermalize | Kind::RelaxMoments, Units::Si) => {
            &[("u0", "4, 0, 0"), ("n_traj", "1000"), ("n_samples", "61")]
        }
        (Kind::DecohereMomentum, Units::Internal) => &[
            ("mass_ratio", "1"),
            ("u0_list", "1, 2, 4"),
            ("decay_lengths", "3"),
            ("n_traj", "1000"),
            ("n_samples", "31"),
            ("sigma_tot", "1"),
            ("n_gas", "1"),
        ],
        (Kind::DecohereMomentum, Units::Si) => &[
            ("u0_list", "1, 2, 4"),
            ("decay_lengths", "3"),
            ("n_traj", "1000"),
            ("n_samples", "31"),
        ],
        (Kind::DecoherePosition, _) => &[
            ("model", "constant"),
            ("mass_ratio", "0.001"),
            ("sigma_tot", "1"),
            ("power_c", "1"),
            ("power_a", "-0.4"),
            ("scattering_length", "1"),
            ("potential_v0", "-0.5"),
            ("potential_r0", "1"),
            ("n_gas", "1"),
            ("s_max", "10"),
            ("n_s", "41"),
            ("times", "0.5, 1, 2"),
            ("n_max", "30"),
        ],
        (Kind::Visibility, Units::Internal) => &[
            ("c6", "1"),
            ("particle_mass", "100"),
            ("beam_momentum", "10"),
            ("flight_time", "1"),
            ("pressures", "0, 0.001, 0.002, 0.005, 0.01, 0.02"),
            ("visibility0", "1"),
        ],
        (Kind::Visibility, Units::Si) => &[("visibility0", "1")],
        (Kind::Refraction, _) => &[
            ("model", "swave"),
            ("mass_ratio", "0.01"),
            ("scattering_length", "1"),
            ("potential_v0", "-0.5"),
            ("potential_r0", "1"),
            ("n_gas", "1"),
            ("k_list", "10, 20, 50, 100"),
        ],
        (Kind::StructureFactor, _) => &[
            ("statistics", "mb"),
            ("fugacity", "0.5"),
            ("q_list", "0.5, 1, 2"),
            ("e_min", "-3"),
            ("e_max", "3"),
            ("n_e", "61"),
        ],
        (Kind::BrownianCheck, _) => &[
            ("eta", "0.01"),
            ("particle_mass", "100"),
            ("packet_sigma", "1"),
            ("packet_p0", "0"),
            ("p_center", "0"),
            ("k_offsets", "0.5, 1"),
            ("times", "0, 1, 2, 5"),
        ],
    }
}

/// Keys an SI configuration must give, per kind.
fn si_required(kind: Kind) -> &'static [&'static str] {
    match kind {
        Kind::Thermalize | Kind::RelaxMoments => &[
            "temperature_k",
            "gas_mass_amu",
            "particle_mass_amu",
            "sigma_tot_m2",
            "gas_density_m3",
            "t_max_s",
        ],
        Kind::DecohereMomentum => &[
            "temperature_k",
            "gas_mass_amu",
            "particle_mass_amu",
            "sigma_tot_m2",
            "gas_density_m3",
        ],
        Kind::Visibility => &[
            "temperature_k",
            "gas_mass_amu",
            "particle_mass_amu",
            "c6_j_m6",
            "beam_velocity_m_s",
            "flight_time_s",
            "pressures_pa",
        ],
        _ => &[],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Int(u64),
    Float(f64),
    Vec3([f64; 3]),
    List(Vec<f64>),
    Word(String),
}

impl Value {
    fn render(&self) -> String {
        match self {
            Value::Int(v) => v.to_string(),
            Value::Float(v) => format_float(*v),
            Value::Vec3(v) => v.iter().map(|x| format_float(*x)).collect::<Vec<_>>().join(", "),
            Value::List(v) => v.iter().map(|x| format_float(*x)).collect::<Vec<_>>().join(", "),
            Value::Word(w) => w.clone(),
        }
    }
}

/// Shortest decimal form that parses back to the same value.
fn format_float(x: f64) -> String {
    format!("{x:?}")
}

/// A validated experiment configuration with every default filled in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub kind: Kind,
    pub units: Units,
    pub seed: u64,
    pub output: String,
    pub values: BTreeMap<String, Value>,
}

impl ExperimentConfig {
    fn get(&self, name: &str) -> &Value {
        self.values
            .get(name)
            .unwrap_or_else(|| panic!("key `{name}` is not available for {}", self.kind.name()))
    }

    pub fn has(&self, name: &str) -> bool {
        self.values.contains_key(name)
    }

    pub fn f64(&self, name: &str) -> f64 {
        match self.get(name) {
            Value::Float(v) => *v,
            Value::Int(v) => *v as f64,
            v => panic!("key `{name}` is not a number: {v:?}"),
        }
    }

    pub fn u64(&self, name: &str) -> u64 {
        match self.get(name) {
            Value::Int(v) => *v,
            v => panic!("key `{name}` is not an integer: {v:?}"),
        }
    }

    pub fn vec3(&self, name: &str) -> [f64; 3] {
        match self.get(name) {
            Value::Vec3(v) => *v,
            v => panic!("key `{name}` is not a vector: {v:?}"),
        }
    }

    pub fn list(&self, name: &str) -> &[f64] {
        match self.get(name) {
            Value::List(v) => v,
            v => panic!("key `{name}` is not a list: {v:?}"),
        }
    }

    pub fn word(&self, name: &str) -> &str {
        match self.get(name) {
            Value::Word(w) => w,
            v => panic!("key `{name}` is not a word: {v:?}"),
        }
    }

    /// Replace the seed, as the `--seed` flag does.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.values.insert("seed".into(), Value::Int(seed));
        self
    }

    /// Canonical text form; parsing it gives back the same configuration.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "schema = {SCHEMA_VERSION}");
        let _ = writeln!(out, "experiment = {}", self.kind.name());
        for (k, v) in &self.values {
            if k != "schema" && k != "experiment" {
                let _ = writeln!(out, "{k} = {}", v.render());
            }
        }
        out
    }
}

fn spec(name: &str) -> Option<&'static KeySpec> {
    KEYS.iter().find(|k| k.name == name)
}

fn parse_float(raw: &str) -> std::result::Result<f64, String> {
    let v: f64 = raw.trim().parse().map_err(|_| format!("`{}` is not a number", raw.trim()))?;
    if !v.is_finite() {
        return Err(format!("`{}` is not finite", raw.trim()));
    }
    Ok(v)
}

fn parse_value(spec: &KeySpec, raw: &str) -> std::result::Result<Value, String> {
    let list = |raw: &str| -> std::result::Result<Vec<f64>, String> {
        raw.split(',').map(parse_float).collect()
    };
    match spec.ty {
        Ty::Int => raw
            .parse::<u64>()
            .map(Value::Int)
            .map_err(|_| format!("`{raw}` is not a non-negative integer")),
        Ty::Float => parse_float(raw).map(Value::Float),
        Ty::Positive => match parse_float(raw)? {
            v if v > 0.0 => Ok(Value::Float(v)),
            v => Err(format!("must be > 0, got {v}")),
        },
        Ty::NonNegative => match parse_float(raw)? {
            v if v >= 0.0 => Ok(Value::Float(v)),
            v => Err(format!("must be >= 0, got {v}")),
        },
        Ty::Vec3 => {
            let v = list(raw)?;
            if v.len() != 3 {
                return Err(format!("needs three components, got {}", v.len()));
            }
            Ok(Value::Vec3([v[0], v[1], v[2]]))
        }
        Ty::PositiveList | Ty::NonNegativeList => {
            let v = list(raw)?;
            if v.is_empty() {
                return Err("list is empty".into());
            }
            let strict = matches!(spec.ty, Ty::PositiveList);
            if let Some(bad) = v.iter().find(|&&x| if strict { x <= 0.0 } else { x < 0.0 }) {
                return Err(format!("entries must be {} 0, got {bad}", if strict { ">" } else { ">=" }));
            }
            Ok(Value::List(v))
        }
        Ty::Word(allowed) => {
            if !allowed.is_empty() && !allowed.contains(&raw) {
                return Err(format!("`{raw}` is not one of {}", allowed.join(", ")));
            }
            Ok(Value::Word(raw.to_string()))
        }
        Ty::Path => {
            if raw.is_empty() {
                return Err("path is empty".into());
            }
            Ok(Value::Word(raw.to_string()))
        }
    }
}

/// Parse and validate a configuration, reporting every violation found.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut errors = Vec::new();
    // (section, key) -> (line, raw value)
    let mut entries: BTreeMap<(Option<Kind>, String), (usize, String)> = BTreeMap::new();
    let mut section: Option<Kind> = None;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            match name.strip_suffix(']').map(str::trim).and_then(Kind::parse) {
                Some(kind) => section = Some(kind),
                None => errors.push(format!("line {lineno}: unknown section `{line}`")),
            }
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            errors.push(format!("line {lineno}: expected `key = value`"));
            continue;
        };
        let (k, v) = (k.trim(), v.trim());
        if spec(k).is_none() {
            errors.push(format!("line {lineno}: unknown key `{k}`"));
            continue;
        }
        if section.is_some() && matches!(k, "schema" | "experiment") {
            errors.push(format!("line {lineno}: `{k}` must be set before any section"));
            continue;
        }
        if entries.insert((section, k.to_string()), (lineno, v.to_string())).is_some() {
            errors.push(format!("line {lineno}: duplicate key `{k}`"));
        }
    }

    let top = |name: &str| entries.get(&(None, name.to_string())).map(|(_, v)| v.as_str());
    match top("schema") {
        None => errors.push("missing required key `schema`".into()),
        Some(v) if v.parse::<u64>() != Ok(SCHEMA_VERSION) => {
            errors.push(format!("unsupported schema `{v}`, expected {SCHEMA_VERSION}"))
        }
        _ => {}
    }
    let kind = match top("experiment") {
        None => {
            errors.push("missing required key `experiment`".into());
            None
        }
        Some(v) => {
            let k = Kind::parse(v);
            if k.is_none() {
                let names: Vec<_> = Kind::ALL.iter().map(|k| k.name()).collect();
                errors.push(format!("unknown experiment `{v}`, expected one of {}", names.join(", ")));
            }
            k
        }
    };
    let Some(kind) = kind else {
        return Err(RunError::Config(errors));
    };

    // Effective raw values: top level, then the active section.
    let mut raw: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for ((sec, k), v) in &entries {
        if sec.is_none() {
            raw.insert(k.clone(), v.clone());
        }
    }
    for ((sec, k), v) in &entries {
        if *sec == Some(kind) {
            raw.insert(k.clone(), v.clone());
        }
    }

    let mut values = BTreeMap::new();
    for (k, (lineno, v)) in &raw {
        let s = spec(k).expect("checked above");
        if !s.kinds.contains(&kind) {
            errors.push(format!("line {lineno}: key `{k}` is not used by experiment {}", kind.name()));
            continue;
        }
        match parse_value(s, v) {
            Ok(val) => {
                values.insert(k.clone(), val);
            }
            Err(e) => errors.push(format!("line {lineno}: key `{k}`: {e}")),
        }
    }

    let tagged = |tag: Tag| -> Vec<&str> {
        raw.keys()
            .filter(|k| spec(k).is_some_and(|s| s.tag == tag))
            .map(String::as_str)
            .collect()
    };
    let (si_keys, internal_keys) = (tagged(Tag::Si), tagged(Tag::Internal));
    let declared = match raw.get("units").map(|(_, v)| v.as_str()) {
        Some("si") => Some(Units::Si),
        Some("internal") => Some(Units::Internal),
        _ => None,
    };
    let units = match declared {
        Some(Units::Si) => {
            if !internal_keys.is_empty() {
                errors.push(format!(
                    "unit mixing: units = si but internal-unit keys given: {}",
                    internal_keys.join(", ")
                ));
            }
            Units::Si
        }
        Some(Units::Internal) => {
            if !si_keys.is_empty() {
                errors.push(format!(
                    "unit mixing: units = internal but SI keys given: {}",
                    si_keys.join(", ")
                ));
            }
            Units::Internal
        }
        None => {
            if !si_keys.is_empty() && !internal_keys.is_empty() {
                errors.push(format!(
                    "unit mixing: SI keys ({}) combined with internal-unit keys ({})",
                    si_keys.join(", "),
                    internal_keys.join(", ")
                ));
            }
            if si_keys.is_empty() {
                Units::Internal
            } else {
                Units::Si
            }
        }
    };
    if units == Units::Si && !kind.supports_si() {
        errors.push(format!("experiment {} accepts only internal units", kind.name()));
    }
    if units == Units::Si {
        for k in si_required(kind) {
            if !raw.contains_key(*k) {
                errors.push(format!("missing required key `{k}` for SI input"));
            }
        }
        if raw.contains_key("mass_ratio") && raw.contains_key("gas_mass_amu") {
            errors.push("`mass_ratio` conflicts with `gas_mass_amu`/`particle_mass_amu`".into());
        }
    }

    let seed = match values.get("seed") {
        Some(Value::Int(s)) => Some(*s),
        _ => {
            if !raw.contains_key("seed") {
                errors.push("missing required key `seed`".into());
            }
            None
        }
    };

    for (k, v) in defaults(kind, units) {
        if !values.contains_key(*k) && !raw.contains_key(*k) {
            let s = spec(k).expect("default keys are registered");
            values.insert((*k).to_string(), parse_value(s, v).expect("defaults are valid"));
        }
    }
    values.insert("units".into(), Value::Word(units.name().into()));
    let output = match values.get("output") {
        Some(Value::Word(w)) => w.clone(),
        _ => {
            let o = format!("{}.csv", kind.name());
            values.insert("output".into(), Value::Word(o.clone()));
            o
        }
    };
    check_consistency(kind, &values, &mut errors);

    if !errors.is_empty() {
        return Err(RunError::Config(errors));
    }
    values.insert("schema".into(), Value::Int(SCHEMA_VERSION));
    values.insert("experiment".into(), Value::Word(kind.name().into()));
    Ok(ExperimentConfig {
        kind,
        units,
        seed: seed.expect("seed checked"),
        output,
        values,
    })
}

fn check_consistency(kind: Kind, values: &BTreeMap<String, Value>, errors: &mut Vec<String>) {
    let int = |k: &str| match values.get(k) {
        Some(Value::Int(v)) => Some(*v),
        _ => None,
    };
    let float = |k: &str| match values.get(k) {
        Some(Value::Float(v)) => Some(*v),
        _ => None,
    };
    for (k, min) in [("n_traj", 2), ("n_samples", 2), ("n_s", 2), ("n_e", 2)] {
        if let Some(v) = int(k) {
            if v < min {
                errors.push(format!("key `{k}`: must be >= {min}, got {v}"));
            }
        }
    }
    if let (Some(lo), Some(hi)) = (float("e_min"), float("e_max")) {
        if lo >= hi {
            errors.push(format!("`e_min` ({lo}) must be below `e_max` ({hi})"));
        }
    }
    if kind == Kind::StructureFactor {
        let stats = match values.get("statistics") {
            Some(Value::Word(w)) => w.as_str(),
            _ => "",
        };
        if let Some(z) = float("fugacity") {
            if stats == "be" && z >= 1.0 {
                errors.push(format!("key `fugacity`: Bose gas needs z < 1, got {z}"));
            }
        }
    }
    if let Some(v) = float("scattering_length") {
        if v == 0.0 {
            errors.push("key `scattering_length`: must be non-zero".into());
        }
    }
    if let Some(v) = float("potential_v0") {
        if v == 0.0 {
            errors.push("key `potential_v0`: must be non-zero".into());
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn errors(text: &str) -> Vec<String> {
        match parse_config(text) {
            Err(RunError::Config(v)) => v,
            other => panic!("expected config errors, got {other:?}"),
        }
    }

    #[test]
    fn minimal_thermalize_fills_defaults() {
        let c = parse_config("schema = 1\nexperiment = thermalize\nseed = 3\n").unwrap();
        assert_eq!(c.kind, Kind::Thermalize);
        assert_eq!(c.units, Units::Internal);
        assert_eq!(c.seed, 3);
        assert_eq!(c.f64("mass_ratio"), 1.0);
        assert_eq!(c.vec3("u0"), [4.0, 0.0, 0.0]);
        assert_eq!(c.u64("n_traj"), 1000);
        assert_eq!(c.output, "thermalize.csv");
    }

    #[test]
    fn canonical_text_round_trips() {
        let c = parse_config("schema = 1\nexperiment = decohere-momentum\nseed = 9\nu0_list = 0.1, 2.5\n").unwrap();
        let again = parse_config(&c.to_text()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn negative_mass_is_rejected_by_name() {
        let e = errors("schema = 1\nexperiment = visibility\nseed = 1\nparticle_mass = -3\n");
        assert!(e.iter().any(|m| m.contains("particle_mass") && m.contains("> 0")), "{e:?}");
    }

    #[test]
    fn si_temperature_with_internal_cross_section_is_unit_mixing() {
        let e = errors("schema = 1\nexperiment = thermalize\nseed = 1\ntemperature_k = 300\nsigma_tot = 2\n");
        assert!(e.iter().any(|m| m.contains("unit mixing")), "{e:?}");
    }

    #[test]
    fn all_violations_are_reported() {
        let e = errors("schema = 2\nexperiment = thermalize\nbogus = 1\nn_traj = -4\nmass_ratio = 0\n");
        assert!(e.iter().any(|m| m.contains("schema")));
        assert!(e.iter().any(|m| m.contains("bogus")));
        assert!(e.iter().any(|m| m.contains("n_traj")));
        assert!(e.iter().any(|m| m.contains("mass_ratio")));
        assert!(e.iter().any(|m| m.contains("seed")));
    }

    #[test]
    fn sections_override_for_their_kind_only() {
        let text = "schema = 1\nexperiment = relax-moments\nseed = 1\nmass_ratio = 0.5\n\
                    [relax-moments]\nmass_ratio = 0.2\n[visibility]\nc6 = 4\n";
        let c = parse_config(text).unwrap();
        assert_eq!(c.f64("mass_ratio"), 0.2);
        assert!(!c.has("c6"));
    }

    #[test]
    fn keys_of_other_experiments_are_rejected() {
        let e = errors("schema = 1\nexperiment = thermalize\nseed = 1\nc6 = 2\n");
        assert!(e.iter().any(|m| m.contains("not used by experiment thermalize")), "{e:?}");
    }

    #[test]
    fn si_visibility_requires_its_keys() {
        let e = errors("schema = 1\nexperiment = visibility\nseed = 1\ntemperature_k = 300\n");
        assert!(e.iter().any(|m| m.contains("c6_j_m6")), "{e:?}");
    }
}
