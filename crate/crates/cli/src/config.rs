//! Run configuration: JSON file, `--set` overrides and dedicated flags,
//! merged in that order and then validated into a [`RunConfig`].

use std::path::Path;

use ham_levy::levy::{JumpFamily, JumpLaw};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, CliResult};

pub const THREADS_ENV: &str = "HAM_LEVY_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Moments,
    Simulate,
    Variance,
    Clt,
    Derivatives,
    Chaos,
    Bounds,
    Covariance,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Moments => "moments",
            Command::Simulate => "simulate",
            Command::Variance => "variance",
            Command::Clt => "clt",
            Command::Derivatives => "derivatives",
            Command::Chaos => "chaos",
            Command::Bounds => "bounds",
            Command::Covariance => "covariance",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyName {
    SymmetricTwoPoint,
    CenteredTwoPoint,
    Discrete,
    PowerDensity,
}

/// Flat law block; which keys are required depends on `family`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawSpec {
    pub family: FamilyName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_plus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_minus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_up: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atoms: Option<Vec<(f64, f64)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exp_a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exp_b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
}

impl LawSpec {
    fn present(&self) -> Vec<&'static str> {
        let mut keys = Vec::new();
        let scalars = [
            ("a", self.a),
            ("lambda", self.lambda),
            ("a_plus", self.a_plus),
            ("a_minus", self.a_minus),
            ("p_up", self.p_up),
            ("c1", self.c1),
            ("exp_a", self.exp_a),
            ("c2", self.c2),
            ("exp_b", self.exp_b),
            ("eps", self.eps),
        ];
        for (name, value) in scalars {
            if value.is_some() {
                keys.push(name);
            }
        }
        if self.atoms.is_some() {
            keys.push("atoms");
        }
        keys
    }

    pub fn to_law(&self) -> CliResult<JumpLaw> {
        let (family, allowed): (&str, &[&str]) = match self.family {
            FamilyName::SymmetricTwoPoint => ("symmetric-two-point", &["a", "lambda"]),
            FamilyName::CenteredTwoPoint => ("centered-two-point", &["a_plus", "a_minus", "p_up", "lambda"]),
            FamilyName::Discrete => ("discrete", &["atoms"]),
            FamilyName::PowerDensity => ("power-density", &["c1", "exp_a", "c2", "exp_b", "eps"]),
        };
        let present = self.present();
        if let Some(extra) = present.iter().find(|k| !allowed.contains(k)) {
            return Err(CliError::schema(format!("law.{extra}"), format!("not a parameter of family {family}")));
        }
        if let Some(missing) = allowed.iter().find(|k| !present.contains(k)) {
            return Err(CliError::schema(format!("law.{missing}"), format!("required by family {family}")));
        }
        let v = |x: Option<f64>| x.expect("presence checked");
        let jump_family = match self.family {
            FamilyName::SymmetricTwoPoint => JumpFamily::SymmetricTwoPoint { magnitude: v(self.a), rate: v(self.lambda) },
            FamilyName::CenteredTwoPoint => JumpFamily::CenteredTwoPoint {
                up: v(self.a_plus),
                down: v(self.a_minus),
                p_up: v(self.p_up),
                rate: v(self.lambda),
            },
            FamilyName::Discrete => JumpFamily::Discrete { atoms: self.atoms.clone().expect("presence checked") },
            FamilyName::PowerDensity => JumpFamily::PowerDensity {
                c1: v(self.c1),
                exp_a: v(self.exp_a),
                c2: v(self.c2),
                exp_b: v(self.exp_b),
                eps: v(self.eps),
            },
        };
        Ok(JumpLaw::new(jump_family)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Targets {
    /// Evaluation times.
    pub t: Vec<f64>,
    /// Second times for covariance and kernel checks.
    pub s: Vec<f64>,
    #[serde(rename = "R")]
    pub radii: Vec<f64>,
    /// Point probes `(t, x)`.
    pub probes: Vec<(f64, f64)>,
    pub alpha: f64,
    /// Noise intensity for the theory-only commands.
    pub m2: Option<f64>,
    /// Moment orders for `moments`.
    pub p: Vec<f64>,
}

impl Default for Targets {
    fn default() -> Self {
        Self {
            t: vec![1.0],
            s: Vec::new(),
            radii: vec![5.0, 10.0, 20.0],
            probes: Vec::new(),
            alpha: 1.0,
            m2: None,
            p: vec![1.0, 2.0, 3.0, 4.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McBlock {
    pub seed: u64,
    /// Monte Carlo paths (simulation commands) or samples (`chaos`).
    pub paths: Option<usize>,
    pub threads: Option<usize>,
    /// Fuzz cases per law for `derivatives`.
    pub cases: usize,
}

impl Default for McBlock {
    fn default() -> Self {
        Self { seed: 1, paths: None, threads: None, cases: 1000 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputBlock {
    pub directory: String,
    pub formats: Vec<Format>,
}

impl Default for OutputBlock {
    fn default() -> Self {
        Self { directory: "ham-levy-out".into(), formats: vec![Format::Csv, Format::Json] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub law: Option<LawSpec>,
    #[serde(default)]
    pub targets: Targets,
    #[serde(default)]
    pub mc: McBlock,
    #[serde(default)]
    pub output: OutputBlock,
}

/// Command-line values that override the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub paths: Option<usize>,
    pub threads: Option<usize>,
    pub out: Option<String>,
    pub t: Vec<f64>,
    pub s: Vec<f64>,
    pub radii: Vec<f64>,
    pub alpha: Option<f64>,
    pub m2: Option<f64>,
    /// Generic `dotted.key=value` assignments.
    pub set: Vec<String>,
}

fn set_path(root: &mut Value, key: &str, value: Value) -> CliResult<()> {
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::schema(key, "empty segment in dotted key"));
    }
    for (i, part) in parts.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| CliError::schema(parts[..i].join("."), "not an object"))?;
        if i + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        node = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()));
    }
    unreachable!("loop returns on the last segment")
}

fn parse_assignment(text: &str) -> CliResult<(String, Value)> {
    let (key, raw) = text
        .split_once('=')
        .ok_or_else(|| CliError::schema(text, "expected --set key=value"))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    Ok((key.trim().to_string(), value))
}

fn floats(xs: &[f64]) -> Value {
    Value::Array(xs.iter().map(|&x| Value::from(x)).collect())
}

/// Merges the file (if any) with overrides and validates the result.
/// `threads_env` is the value of [`THREADS_ENV`], used when no thread count
/// is configured.
pub fn resolve(
    command: Command,
    file: Option<&Path>,
    overrides: &Overrides,
    threads_env: Option<&str>,
) -> CliResult<RunConfig> {
    let mut root = match file {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display().to_string(), e))?;
            serde_json::from_str::<Value>(&text)
                .map_err(|e| CliError::schema("", format!("{} is not valid JSON: {e}", path.display())))?
        }
        None => Value::Object(Map::new()),
    };
    if !root.is_object() {
        return Err(CliError::schema("", "configuration must be a JSON object"));
    }

    for text in &overrides.set {
        let (key, value) = parse_assignment(text)?;
        set_path(&mut root, &key, value)?;
    }
    let mut flag = |key: &str, value: Value| set_path(&mut root, key, value);
    if let Some(seed) = overrides.seed {
        flag("mc.seed", seed.into())?;
    }
    if let Some(paths) = overrides.paths {
        flag("mc.paths", paths.into())?;
    }
    if let Some(threads) = overrides.threads {
        flag("mc.threads", threads.into())?;
    }
    if let Some(out) = &overrides.out {
        flag("output.directory", out.clone().into())?;
    }
    if !overrides.t.is_empty() {
        flag("targets.t", floats(&overrides.t))?;
    }
    if !overrides.s.is_empty() {
        flag("targets.s", floats(&overrides.s))?;
    }
    if !overrides.radii.is_empty() {
        flag("targets.R", floats(&overrides.radii))?;
    }
    if let Some(alpha) = overrides.alpha {
        flag("targets.alpha", alpha.into())?;
    }
    if let Some(m2) = overrides.m2 {
        flag("targets.m2", m2.into())?;
    }

    let obj = root.as_object_mut().expect("checked above");
    match obj.get("command") {
        Some(Value::String(name)) if name != command.name() => {
            return Err(CliError::Conflict(format!(
                "configuration is for command `{name}` but `{}` was invoked",
                command.name()
            )));
        }
        _ => {}
    }
    obj.insert("command".into(), command.name().into());

    let mut cfg: RunConfig = serde_path_to_error::deserialize(root).map_err(|e| {
        let key = e.path().to_string();
        CliError::schema(if key == "." { String::new() } else { key }, e.inner().to_string())
    })?;
    if cfg.mc.threads.is_none() {
        if let Some(raw) = threads_env {
            let n = raw
                .trim()
                .parse::<usize>()
                .map_err(|_| CliError::schema(THREADS_ENV, format!("expected a positive integer, got `{raw}`")))?;
            cfg.mc.threads = Some(n);
        }
    }
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig) -> CliResult<()> {
    let t = &cfg.targets;
    if t.t.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(CliError::schema("targets.t", "times must be finite and non-negative"));
    }
    if t.s.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(CliError::schema("targets.s", "times must be finite and non-negative"));
    }
    if t.radii.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(CliError::schema("targets.R", "radii must be finite and positive"));
    }
    if !(t.alpha > 0.0 && t.alpha <= 1.0) {
        return Err(CliError::schema("targets.alpha", "alpha must lie in (0, 1]"));
    }
    if let Some(m2) = t.m2 {
        if !(m2.is_finite() && m2 > 0.0) {
            return Err(CliError::schema("targets.m2", "m2 must be finite and positive"));
        }
    }
    if cfg.mc.paths == Some(0) {
        return Err(CliError::schema("mc.paths", "must be at least 1"));
    }
    if cfg.mc.threads == Some(0) {
        return Err(CliError::schema("mc.threads", "must be at least 1"));
    }
    if cfg.mc.cases == 0 {
        return Err(CliError::schema("mc.cases", "must be at least 1"));
    }
    if let Some(spec) = &cfg.law {
        let law_m2 = spec.to_law()?.moment_m(2.0);
        if let Some(m2) = t.m2 {
            if (law_m2 - m2).abs() > 1e-12 * law_m2 {
                return Err(CliError::Conflict(format!("targets.m2 = {m2} but the law has m2 = {law_m2}")));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_sets(sets: &[&str]) -> CliResult<RunConfig> {
        let o = Overrides { set: sets.iter().map(|s| s.to_string()).collect(), ..Overrides::default() };
        resolve(Command::Simulate, None, &o, None)
    }

    #[test]
    fn defaults_are_materialized() {
        let cfg = with_sets(&[]).unwrap();
        assert_eq!(cfg.targets, Targets::default());
        assert_eq!(cfg.mc.seed, 1);
        let echo = serde_json::to_value(&cfg).unwrap();
        assert_eq!(echo["targets"]["R"], serde_json::json!([5.0, 10.0, 20.0]));
        assert_eq!(echo["output"]["formats"], serde_json::json!(["csv", "json"]));
    }

    #[test]
    fn set_assignments_use_dotted_keys() {
        let cfg = with_sets(&["targets.alpha=0.5", "law.family=symmetric-two-point", "law.a=2", "law.lambda=1"]).unwrap();
        assert_eq!(cfg.targets.alpha, 0.5);
        assert_eq!(cfg.law.unwrap().to_law().unwrap().moment_m(2.0), 4.0);
    }

    #[test]
    fn unknown_and_ill_typed_keys_name_their_path() {
        let err = with_sets(&["law.family=discrete", "law.atoms=[[1,1],[-1,1]]", "law.lamda=1"]).unwrap_err();
        assert!(matches!(&err, CliError::Schema { key, .. } if key == "law.lamda"), "{err}");
        let err = with_sets(&["mc.paths=many"]).unwrap_err();
        assert!(matches!(&err, CliError::Schema { key, .. } if key == "mc.paths"), "{err}");
        let err = with_sets(&["targets.alpha=0.5.1"]).unwrap_err();
        assert!(matches!(&err, CliError::Schema { key, .. } if key == "targets.alpha"), "{err}");
    }

    #[test]
    fn family_parameters_are_checked() {
        let err = with_sets(&["law.family=symmetric-two-point", "law.a=1"]).unwrap_err();
        assert!(matches!(err, CliError::Schema { key, .. } if key == "law.lambda"));
        let err = with_sets(&["law.family=symmetric-two-point", "law.a=1", "law.lambda=1", "law.eps=0.1"]).unwrap_err();
        assert!(matches!(err, CliError::Schema { key, .. } if key == "law.eps"));
    }

    #[test]
    fn env_threads_are_a_fallback() {
        let o = Overrides::default();
        assert_eq!(resolve(Command::Clt, None, &o, Some("3")).unwrap().mc.threads, Some(3));
        let o = Overrides { threads: Some(2), ..Overrides::default() };
        assert_eq!(resolve(Command::Clt, None, &o, Some("3")).unwrap().mc.threads, Some(2));
        assert!(resolve(Command::Clt, None, &Overrides::default(), Some("x")).is_err());
    }

    #[test]
    fn m2_must_agree_with_law() {
        let base = ["law.family=symmetric-two-point", "law.a=1", "law.lambda=1"];
        let o = Overrides { m2: Some(2.0), set: base.iter().map(|s| s.to_string()).collect(), ..Overrides::default() };
        assert!(matches!(resolve(Command::Covariance, None, &o, None), Err(CliError::Conflict(_))));
        let o = Overrides { m2: Some(1.0), ..o };
        assert!(resolve(Command::Covariance, None, &o, None).is_ok());
    }

    #[test]
    fn command_in_file_must_match() {
        let o = Overrides { set: vec!["command=clt".into()], ..Overrides::default() };
        assert!(matches!(resolve(Command::Simulate, None, &o, None), Err(CliError::Conflict(_))));
        assert!(resolve(Command::Clt, None, &o, None).is_ok());
    }
}
