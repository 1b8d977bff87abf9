use crate::bounds::SolverOptions;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Contour,
    Grid,
    Bench,
    Selftest,
}

/// A full job as read from a TOML file; keys mirror the field names.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    pub task: Task,
    /// Worker threads for lambda evaluations; 0 uses every core.
    #[serde(default)]
    pub threads: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub operator: OperatorSpec,
    #[serde(default)]
    pub bounds: BoundsSpec,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contour: Option<ContourSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bench: Option<BenchSpec>,
}

/// Exactly one of `builtin` and `symbol` must be given.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    /// `fish`, `example21`, `singint` or `identity`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    /// Laurent symbol as `[offset, re, im]` triples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol: Option<Vec<[f64; 3]>>,
    /// Truncation bandwidth for symbol based operators.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    /// Symbols of `singint`: `a` acts on columns `j >= 0`, `b` on `j < 0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<SymbolSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<SymbolSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub impurity: Option<ImpuritySpec>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolSpec {
    /// Only `fish`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<[f64; 3]>>,
    /// Bound on the sum of the moduli of all coefficients not listed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<f64>,
}

/// A dense block added to the operator with its `(0, 0)` entry at `(row, col)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpuritySpec {
    /// Only `grcar10`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    /// Rows of `[re, im]` pairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default)]
    pub shift: [f64; 2],
    #[serde(default)]
    pub row: i64,
    #[serde(default)]
    pub col: i64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSpec {
    /// Number of blocks `N`; windows have `n = b N` columns.
    #[serde(default = "default_blocks")]
    pub blocks: usize,
    /// Block size; defaults to the bandwidth.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offsets: Option<Vec<usize>>,
    #[serde(default)]
    pub eps: Vec<f64>,
    /// Overrides the truncation error derived from the operator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_n: Option<f64>,
}

fn default_blocks() -> usize {
    50
}

impl Default for BoundsSpec {
    fn default() -> Self {
        BoundsSpec { blocks: default_blocks(), b: None, offsets: None, eps: Vec::new(), eta_d: None, delta_n: None }
    }
}

/// `[re_min, re_max, im_min, im_max]`.
pub type BoxSpec = [f64; 4];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContourSpec {
    pub bbox: BoxSpec,
    pub h: f64,
    /// Lattice steps between coarse scan vertices.
    #[serde(default = "default_stride")]
    pub stride: usize,
    /// Points near the curve; the coarse scan runs when empty.
    #[serde(default)]
    pub seeds: Vec<[f64; 2]>,
}

fn default_stride() -> usize {
    8
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub bbox: BoxSpec,
    pub nx: usize,
    pub ny: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchSpec {
    /// One timing file per bandwidth; defaults to `operator.d`.
    #[serde(default)]
    pub bandwidths: Vec<usize>,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default)]
    pub lambda: [f64; 2],
    /// Period of the restarted mode; `0` estimates it from timings.
    #[serde(default)]
    pub restart_every: usize,
}

fn default_steps() -> usize {
    40
}

impl JobSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        let value: toml::Value = toml::from_str(text).map_err(|e| Error::config("<config>", e.message().to_string()))?;
        Self::from_value(value)
    }

    pub fn from_value(value: toml::Value) -> Result<Self> {
        let job: JobSpec = value.try_into().map_err(|e: toml::de::Error| Error::config(field_of(&e), e.message().to_string()))?;
        job.validate()?;
        Ok(job)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("job specs serialize")
    }

    /// Read `path` (or start empty), apply `key=value` overrides, then validate.
    pub fn load(path: Option<&Path>, sets: &[String], task: Option<Task>) -> Result<Self> {
        let mut value = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| Error::Io { path: p.display().to_string(), source })?;
                toml::from_str(&text).map_err(|e| Error::config(p.display().to_string(), e.message().to_string()))?
            }
            None => toml::Value::Table(Default::default()),
        };
        if let Some(t) = task {
            let name = toml::Value::try_from(t).expect("task serializes");
            set_path(&mut value, "task", name)?;
        }
        for s in sets {
            let (key, raw) = s.split_once('=').ok_or_else(|| Error::config(s.clone(), "override must look like key=value"))?;
            set_path(&mut value, key.trim(), parse_scalar(raw.trim()))?;
        }
        Self::from_value(value)
    }

    pub fn validate(&self) -> Result<()> {
        if self.task == Task::Selftest {
            return Ok(());
        }
        let op = &self.operator;
        let given = [op.builtin.is_some(), op.symbol.is_some()].iter().filter(|&&x| x).count();
        if given != 1 {
            return Err(Error::config("operator", "give exactly one of `builtin` and `symbol`"));
        }
        if let Some(name) = &op.builtin {
            if !["fish", "example21", "singint", "identity"].contains(&name.as_str()) {
                return Err(Error::config("operator.builtin", format!("unknown builtin `{name}` (fish, example21, singint, identity)")));
            }
            if name == "singint" && (op.a.is_none() || op.b.is_none()) {
                return Err(Error::config("operator", "`singint` needs both symbols `a` and `b`"));
            }
            if name == "fish" || name == "singint" {
                if op.d.is_none() {
                    return Err(Error::config("operator.d", format!("`{name}` needs a truncation bandwidth")));
                }
            }
        }
        if op.symbol.is_some() && op.d.is_none() {
            return Err(Error::config("operator.d", "a symbol needs a truncation bandwidth"));
        }
        if let Some(syms) = &op.symbol {
            check_coefficients("operator.symbol", syms)?;
        }
        for (name, s) in [("a", &op.a), ("b", &op.b)] {
            if let Some(s) = s {
                let path = format!("operator.{name}");
                match (&s.builtin, &s.coefficients) {
                    (Some(b), None) if b == "fish" => {}
                    (Some(b), None) => return Err(Error::config(format!("{path}.builtin"), format!("unknown symbol `{b}` (fish)"))),
                    (None, Some(c)) => check_coefficients(&format!("{path}.coefficients"), c)?,
                    _ => return Err(Error::config(path, "give exactly one of `builtin` and `coefficients`")),
                }
                if s.tail.is_some_and(|t| !(t >= 0.0)) {
                    return Err(Error::config(format!("{path}.tail"), "tail bound must be nonnegative"));
                }
            }
        }
        if let Some(imp) = &op.impurity {
            match (&imp.builtin, &imp.matrix) {
                (Some(b), None) if b == "grcar10" => {}
                (Some(b), None) => return Err(Error::config("operator.impurity.builtin", format!("unknown impurity `{b}` (grcar10)"))),
                (None, Some(m)) => {
                    if m.is_empty() || m.iter().any(|r| r.len() != m[0].len() || r.is_empty()) {
                        return Err(Error::config("operator.impurity.matrix", "rows must be nonempty and of equal length"));
                    }
                }
                _ => return Err(Error::config("operator.impurity", "give exactly one of `builtin` and `matrix`")),
            }
            if !imp.scale.is_finite() || imp.shift.iter().any(|x| !x.is_finite()) {
                return Err(Error::config("operator.impurity", "scale and shift must be finite"));
            }
        }

        let b = &self.bounds;
        if b.blocks == 0 {
            return Err(Error::config("bounds.blocks", "need at least one block"));
        }
        if b.b == Some(0) {
            return Err(Error::config("bounds.b", "block size must be positive"));
        }
        if b.eps.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(Error::config("bounds.eps", "every eps must be positive and finite"));
        }
        if b.eta_d.is_some_and(|e| !(e >= 0.0 && e.is_finite())) {
            return Err(Error::config("bounds.eta_d", "must be nonnegative"));
        }
        if b.delta_n.is_some_and(|e| !(e >= 0.0 && e.is_finite())) {
            return Err(Error::config("bounds.delta_n", "must be nonnegative"));
        }
        if !(self.solver.tol > 0.0 && self.solver.tol < 1.0) {
            return Err(Error::config("solver.tol", "must lie in (0, 1)"));
        }
        if self.solver.seed > i64::MAX as u64 {
            return Err(Error::config("solver.seed", "must fit a signed 64-bit TOML integer"));
        }
        if matches!(self.solver.restart, crate::qh::RestartPolicy::Every(0)) {
            return Err(Error::config("solver.restart", "restart period must be positive"));
        }

        match self.task {
            Task::Contour => {
                let c = self.contour.as_ref().ok_or_else(|| Error::config("contour", "task `contour` needs a [contour] table"))?;
                check_box("contour.bbox", &c.bbox)?;
                if !(c.h > 0.0 && c.h.is_finite()) {
                    return Err(Error::config("contour.h", "must be positive"));
                }
                if c.stride == 0 {
                    return Err(Error::config("contour.stride", "must be positive"));
                }
                if b.eps.is_empty() {
                    return Err(Error::config("bounds.eps", "task `contour` needs at least one eps"));
                }
            }
            Task::Grid => {
                let g = self.grid.as_ref().ok_or_else(|| Error::config("grid", "task `grid` needs a [grid] table"))?;
                check_box("grid.bbox", &g.bbox)?;
                if g.nx < 2 || g.ny < 2 {
                    return Err(Error::config("grid", "resolution must be at least 2 x 2"));
                }
            }
            Task::Bench => {
                if let Some(bs) = &self.bench {
                    if bs.steps == 0 {
                        return Err(Error::config("bench.steps", "must be positive"));
                    }
                    if bs.bandwidths.contains(&0) {
                        return Err(Error::config("bench.bandwidths", "bandwidths must be positive"));
                    }
                }
            }
            Task::Selftest => {}
        }
        Ok(())
    }
}

fn check_coefficients(path: &str, c: &[[f64; 3]]) -> Result<()> {
    for (p, t) in c.iter().enumerate() {
        if t[0].fract() != 0.0 || !t.iter().all(|x| x.is_finite()) {
            return Err(Error::config(format!("{path}[{p}]"), "expected [integer offset, re, im]"));
        }
    }
    Ok(())
}

fn check_box(path: &str, b: &BoxSpec) -> Result<()> {
    if !(b.iter().all(|x| x.is_finite()) && b[0] < b[1] && b[2] < b[3]) {
        return Err(Error::config(path, "expected [re_min, re_max, im_min, im_max] with min < max"));
    }
    Ok(())
}

/// Best effort field path from a deserialization error.
fn field_of(e: &toml::de::Error) -> String {
    let msg = e.message();
    msg.split('`').nth(1).map(str::to_string).unwrap_or_else(|| "<config>".into())
}

/// A TOML value if `raw` parses as one, otherwise the raw string.
fn parse_scalar(raw: &str) -> toml::Value {
    toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

fn set_path(root: &mut toml::Value, key: &str, value: toml::Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::config(key, "empty key segment"));
    }
    let mut cur = root;
    for part in &parts[..parts.len() - 1] {
        let table = cur.as_table_mut().ok_or_else(|| Error::config(key, format!("`{part}` is not a table")))?;
        cur = table.entry(part.to_string()).or_insert_with(|| toml::Value::Table(Default::default()));
    }
    let table = cur.as_table_mut().ok_or_else(|| Error::config(key, "parent is not a table"))?;
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}
