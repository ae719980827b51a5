//! Run configuration: a plain sectioned `key = value` text format plus
//! validation into a typed [`RunConfig`].  Command-line flags carry the
//! same names as the config keys and override file values.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::atoms::{derivative_atom, AtomBattery, SmoothAtom};
use crate::error::{Error, Result};
use crate::grid::{make_grid, Grid};
use crate::multiplier::Algorithm;
use crate::symbols::builtins::{builtin, BuiltinParams};
use crate::symbols::expr::SymbolExpr;
use crate::symbols::parse::parse_symbol;

pub const COMMANDS: &[&str] = &[
    "symbol-eval",
    "cancel-check",
    "decay-check",
    "atom-make",
    "atom-verify",
    "apply",
    "identity",
    "equivalence",
    "maximal",
    "weakconv",
    "suite",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    SymbolEval,
    CancelCheck,
    DecayCheck,
    AtomMake,
    AtomVerify,
    Apply,
    Identity,
    Equivalence,
    Maximal,
    Weakconv,
    Suite,
}

impl Command {
    pub fn parse(s: &str) -> Result<Command> {
        Ok(match s {
            "symbol-eval" => Command::SymbolEval,
            "cancel-check" => Command::CancelCheck,
            "decay-check" => Command::DecayCheck,
            "atom-make" => Command::AtomMake,
            "atom-verify" => Command::AtomVerify,
            "apply" => Command::Apply,
            "identity" => Command::Identity,
            "equivalence" => Command::Equivalence,
            "maximal" => Command::Maximal,
            "weakconv" => Command::Weakconv,
            "suite" => Command::Suite,
            other => {
                return Err(Error::Config(format!(
                    "key 'command': unknown command '{other}' (expected one of {})",
                    COMMANDS.join(", ")
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::SymbolEval => "symbol-eval",
            Command::CancelCheck => "cancel-check",
            Command::DecayCheck => "decay-check",
            Command::AtomMake => "atom-make",
            Command::AtomVerify => "atom-verify",
            Command::Apply => "apply",
            Command::Identity => "identity",
            Command::Equivalence => "equivalence",
            Command::Maximal => "maximal",
            Command::Weakconv => "weakconv",
            Command::Suite => "suite",
        }
    }
}

/// Parses the sectioned `key = value` text into a flat map.  Section
/// headers `[name]` only group lines; keys must be globally unique.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line.starts_with('[') {
            if !line.ends_with(']') || line.len() < 3 {
                return Err(Error::Config(format!(
                    "line {}: malformed section header '{line}'",
                    lineno + 1
                )));
            }
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!("line {}: expected 'key = value', got '{line}'", lineno + 1))
        })?;
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
        }
        if !key
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
        {
            return Err(Error::Config(format!(
                "line {}: key '{key}' has unsupported characters",
                lineno + 1
            )));
        }
        if map.insert(key.clone(), value).is_some() {
            return Err(Error::Config(format!(
                "line {}: key '{key}' set more than once",
                lineno + 1
            )));
        }
    }
    Ok(map)
}

/// How the battery of atom tuples is chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BatterySpec {
    Default,
    Path(PathBuf),
}

/// A fully resolved run.  `resolved` keeps the flat key/value view so
/// reports can embed the exact configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub symbol: Option<String>,
    pub symbol_expr: Option<String>,
    pub grid: Option<(usize, f64, usize)>,
    pub p: Vec<f64>,
    pub seed: u64,
    pub out: PathBuf,
    pub battery: BatterySpec,
    pub blocks: usize,
    pub order: u32,
    pub algorithm: Algorithm,
    pub delta_factor: f64,
    pub atom_beta: Vec<u32>,
    pub atom_center: Vec<f64>,
    pub atom_radius: f64,
    pub omega_order: Option<u32>,
    pub k_list: Vec<f64>,
    pub atom_file: Option<PathBuf>,
    pub input_fields: Vec<PathBuf>,
    pub resolved: BTreeMap<String, String>,
}

const KNOWN_KEYS: &[&str] = &[
    "command",
    "symbol",
    "symbol-expr",
    "grid",
    "p",
    "seed",
    "out",
    "battery",
    "blocks",
    "order",
    "algorithm",
    "delta-factor",
    "atom-beta",
    "atom-center",
    "atom-radius",
    "omega-order",
    "k-list",
    "atom-file",
    "input-fields",
];

fn parse_key_f64(map: &BTreeMap<String, String>, key: &str) -> Result<Option<f64>> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => {
            let x: f64 = v
                .parse()
                .map_err(|_| Error::Config(format!("key '{key}': bad number '{v}'")))?;
            if !x.is_finite() {
                return Err(Error::Config(format!("key '{key}': non-finite value")));
            }
            Ok(Some(x))
        }
    }
}

fn parse_key_u64(map: &BTreeMap<String, String>, key: &str) -> Result<Option<u64>> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => Ok(Some(v.parse().map_err(|_| {
            Error::Config(format!("key '{key}': bad integer '{v}'"))
        })?)),
    }
}

fn parse_list_f64(map: &BTreeMap<String, String>, key: &str) -> Result<Option<Vec<f64>>> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => v
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("key '{key}': bad number '{}'", s.trim())))
            })
            .collect::<Result<Vec<f64>>>()
            .map(Some),
    }
}

fn parse_list_u32(map: &BTreeMap<String, String>, key: &str) -> Result<Option<Vec<u32>>> {
    match map.get(key) {
        None => Ok(None),
        Some(v) => v
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<u32>()
                    .map_err(|_| Error::Config(format!("key '{key}': bad integer '{}'", s.trim())))
            })
            .collect::<Result<Vec<u32>>>()
            .map(Some),
    }
}

impl RunConfig {
    /// Builds a run from the merged key/value map (file values with
    /// flag overrides already applied).
    pub fn from_map(map: BTreeMap<String, String>) -> Result<RunConfig> {
        for key in map.keys() {
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(Error::Config(format!("unknown config key '{key}'")));
            }
        }
        let command = Command::parse(
            map.get("command")
                .ok_or_else(|| Error::Config("key 'command' is required".into()))?,
        )?;

        let symbol = map.get("symbol").cloned();
        let symbol_expr = map.get("symbol-expr").cloned();
        if symbol.is_some() && symbol_expr.is_some() {
            return Err(Error::Config(
                "keys 'symbol' and 'symbol-expr' are mutually exclusive".into(),
            ));
        }

        let grid = match map.get("grid") {
            None => None,
            Some(v) => {
                let parts: Vec<&str> = v.split(',').map(str::trim).collect();
                if parts.len() != 3 {
                    return Err(Error::Config(format!(
                        "key 'grid': expected 'n,L,M', got '{v}'"
                    )));
                }
                let n: usize = parts[0]
                    .parse()
                    .map_err(|_| Error::Config(format!("key 'grid': bad dimension '{}'", parts[0])))?;
                let l: f64 = parts[1]
                    .parse()
                    .map_err(|_| Error::Config(format!("key 'grid': bad half extent '{}'", parts[1])))?;
                let m: usize = parts[2]
                    .parse()
                    .map_err(|_| Error::Config(format!("key 'grid': bad point count '{}'", parts[2])))?;
                Some((n, l, m))
            }
        };

        let p = parse_list_f64(&map, "p")?.unwrap_or_else(|| vec![2.0, 2.0]);
        let seed = parse_key_u64(&map, "seed")?.unwrap_or(42);
        let out = PathBuf::from(map.get("out").cloned().unwrap_or_else(|| "out".into()));
        let battery = match map.get("battery").map(String::as_str) {
            None | Some("default") => BatterySpec::Default,
            Some(path) => BatterySpec::Path(PathBuf::from(path)),
        };
        let blocks = parse_key_u64(&map, "blocks")?.unwrap_or(2) as usize;
        if blocks == 0 || blocks > 3 {
            return Err(Error::Config(format!(
                "key 'blocks': {blocks} outside the supported range 1..=3"
            )));
        }
        let order = parse_key_u64(&map, "order")?.unwrap_or(2) as u32;
        let algorithm = match map.get("algorithm").map(String::as_str) {
            None | Some("fft-last-block") => Algorithm::FftLastBlock,
            Some("naive") => Algorithm::Naive,
            Some(other) => {
                return Err(Error::Config(format!(
                    "key 'algorithm': unknown value '{other}' (expected naive or fft-last-block)"
                )))
            }
        };
        let delta_factor = parse_key_f64(&map, "delta-factor")?.unwrap_or(2.0);
        if !(delta_factor >= 0.0) {
            return Err(Error::Config("key 'delta-factor': must be >= 0".into()));
        }
        let atom_beta = parse_list_u32(&map, "atom-beta")?.unwrap_or_default();
        let atom_center = parse_list_f64(&map, "atom-center")?.unwrap_or_default();
        let atom_radius = parse_key_f64(&map, "atom-radius")?.unwrap_or(1.0);
        if !(atom_radius > 0.0) {
            return Err(Error::Config("key 'atom-radius': must be positive".into()));
        }
        let omega_order = parse_key_u64(&map, "omega-order")?.map(|v| v as u32);
        let k_list = parse_list_f64(&map, "k-list")?.unwrap_or_else(|| vec![4.0, 8.0, 16.0]);
        let atom_file = map.get("atom-file").map(PathBuf::from);
        let input_fields = map
            .get("input-fields")
            .map(|v| v.split(',').map(|s| PathBuf::from(s.trim())).collect())
            .unwrap_or_default();

        Ok(RunConfig {
            command,
            symbol,
            symbol_expr,
            grid,
            p,
            seed,
            out,
            battery,
            blocks,
            order,
            algorithm,
            delta_factor,
            atom_beta,
            atom_center,
            atom_radius,
            omega_order,
            k_list,
            atom_file,
            input_fields,
            resolved: map,
        })
    }

    /// The lattice for this run; defaults depend on the block
    /// dimension so desk-scale runs stay interactive.
    pub fn make_grid(&self, block_dim: usize) -> Result<Grid> {
        let (n, l, m) = self.grid.unwrap_or(match block_dim {
            1 => (1, 8.0, 256),
            _ => (2, 6.0, 128),
        });
        if n != block_dim {
            return Err(Error::Config(format!(
                "key 'grid': dimension {n} does not match the symbol's block dimension {block_dim}"
            )));
        }
        make_grid(n, l, m).map_err(|e| Error::Config(format!("key 'grid': {e}")))
    }

    /// Resolves the symbol from `symbol` (builtin name) or
    /// `symbol-expr` (grammar text).
    pub fn make_symbol(&self, block_dim_hint: usize) -> Result<SymbolExpr> {
        if let Some(name) = &self.symbol {
            let params = BuiltinParams {
                blocks: self.blocks,
                block_dim: block_dim_hint,
                ..BuiltinParams::default()
            };
            builtin(name, &params)
                .map_err(|e| Error::Config(format!("key 'symbol': {e}")))
        } else if let Some(text) = &self.symbol_expr {
            parse_symbol(text, self.blocks, block_dim_hint)
                .map_err(|e| Error::Config(format!("key 'symbol-expr': {e}")))
        } else {
            Err(Error::Config(
                "one of 'symbol' or 'symbol-expr' is required".into(),
            ))
        }
    }
}

/// Battery file format: one tuple per line, atoms separated by `;`,
/// each atom written as `beta=...  center=...  radius=...` with
/// comma-separated components.
pub fn parse_battery_text(text: &str, p: &[f64]) -> Result<AtomBattery> {
    let mut tuples = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tuple: Vec<SmoothAtom> = Vec::new();
        for atom_text in line.split(';') {
            let mut beta: Option<Vec<u32>> = None;
            let mut center: Option<Vec<f64>> = None;
            let mut radius: Option<f64> = None;
            for field in atom_text.split_whitespace() {
                let (key, value) = field.split_once('=').ok_or_else(|| {
                    Error::Config(format!(
                        "battery line {}: expected key=value, got '{field}'",
                        lineno + 1
                    ))
                })?;
                match key {
                    "beta" => {
                        beta = Some(
                            value
                                .split(',')
                                .map(|s| {
                                    s.parse::<u32>().map_err(|_| {
                                        Error::Config(format!(
                                            "battery line {}: bad beta component '{s}'",
                                            lineno + 1
                                        ))
                                    })
                                })
                                .collect::<Result<_>>()?,
                        )
                    }
                    "center" => {
                        center = Some(
                            value
                                .split(',')
                                .map(|s| {
                                    s.parse::<f64>().map_err(|_| {
                                        Error::Config(format!(
                                            "battery line {}: bad center component '{s}'",
                                            lineno + 1
                                        ))
                                    })
                                })
                                .collect::<Result<_>>()?,
                        )
                    }
                    "radius" => {
                        radius = Some(value.parse::<f64>().map_err(|_| {
                            Error::Config(format!(
                                "battery line {}: bad radius '{value}'",
                                lineno + 1
                            ))
                        })?)
                    }
                    other => {
                        return Err(Error::Config(format!(
                            "battery line {}: unknown atom field '{other}'",
                            lineno + 1
                        )))
                    }
                }
            }
            let beta = beta.ok_or_else(|| {
                Error::Config(format!("battery line {}: missing beta", lineno + 1))
            })?;
            let center = center.unwrap_or_else(|| vec![0.0; beta.len()]);
            let radius = radius.unwrap_or(1.0);
            if center.len() != beta.len() {
                return Err(Error::Config(format!(
                    "battery line {}: beta and center dimensions differ",
                    lineno + 1
                )));
            }
            tuple.push(derivative_atom(&beta, &center, radius)?);
        }
        if !tuple.is_empty() {
            tuples.push(tuple);
        }
    }
    if tuples.is_empty() {
        return Err(Error::Config("battery file has no tuples".into()));
    }
    let m = tuples[0].len();
    if tuples.iter().any(|t| t.len() != m) {
        return Err(Error::Config(
            "battery tuples must all have the same arity".into(),
        ));
    }
    if p.len() != m {
        return Err(Error::Config(format!(
            "key 'p': {} exponents for {m}-atom tuples",
            p.len()
        )));
    }
    Ok(AtomBattery {
        tuples,
        p: p.to_vec(),
    })
}
