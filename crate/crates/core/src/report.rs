//! Bit-stable report emission: every run writes the same bytes for the
//! same inputs. Objects render with sorted keys and all reals in
//! 17-significant-digit scientific notation, so diffing two report
//! files is a meaningful regression check.

use crate::error::Result;
use crate::quadrature::{ApproxClassReport, CoveringReport, PositivityReport, WceReport};

/// JSON value with deterministic rendering.
#[derive(Clone, Debug)]
pub enum JsonValue {
    Null,
    Bool(bool),
    Int(i64),
    Num(f64),
    Str(String),
    Arr(Vec<JsonValue>),
    Obj(Vec<(String, JsonValue)>),
}

impl JsonValue {
    pub fn obj() -> JsonValue {
        JsonValue::Obj(Vec::new())
    }

    pub fn set(&mut self, key: &str, value: JsonValue) -> &mut Self {
        match self {
            JsonValue::Obj(entries) => {
                entries.retain(|(k, _)| k != key);
                entries.push((key.to_string(), value));
            }
            _ => panic!("set() on a non-object JSON value"),
        }
        self
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out);
        out
    }

    fn write(&self, out: &mut String) {
        match self {
            JsonValue::Null => out.push_str("null"),
            JsonValue::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            JsonValue::Int(i) => out.push_str(&i.to_string()),
            JsonValue::Num(x) => out.push_str(&format_real(*x)),
            JsonValue::Str(s) => write_escaped(s, out),
            JsonValue::Arr(items) => {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    item.write(out);
                }
                out.push(']');
            }
            JsonValue::Obj(entries) => {
                let mut sorted: Vec<&(String, JsonValue)> = entries.iter().collect();
                sorted.sort_by(|a, b| a.0.cmp(&b.0));
                out.push('{');
                for (i, (k, v)) in sorted.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    write_escaped(k, out);
                    out.push(':');
                    v.write(out);
                }
                out.push('}');
            }
        }
    }
}

/// 17-significant-digit scientific notation; non-finite values become
/// JSON strings so the document stays parseable.
fn format_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("\"{x}\"")
    }
}

fn write_escaped(s: &str, out: &mut String) {
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
}

pub fn reals(values: impl IntoIterator<Item = f64>) -> JsonValue {
    JsonValue::Arr(values.into_iter().map(JsonValue::Num).collect())
}

/// Everything a verification run can report; unfilled sections are
/// omitted from the emitted document.
#[derive(Clone, Debug, Default)]
pub struct QuadReport {
    pub task: String,
    /// Per-eigen-index residuals of the moment system (λ < n).
    pub exactness_residuals: Option<Vec<f64>>,
    pub exactness_residual: Option<f64>,
    pub total_variation: Option<f64>,
    /// Regularity constant at d = 1/n.
    pub regularity_constant: Option<f64>,
    pub discrepancy: Option<f64>,
    /// (order, randomized worst-case error) samples.
    pub wce_samples: Vec<(f64, f64)>,
    /// Fitted decay exponent of the WCE samples.
    pub fitted_gamma: Option<f64>,
    /// Fitted class constant A.
    pub fitted_a: Option<f64>,
    pub covering: Option<CoveringReport>,
    pub positivity: Option<PositivityReport>,
    /// The three conditions of the approximate-class definition, named.
    pub conditions: Vec<(String, bool)>,
    pub verdict: Option<bool>,
    pub notes: Vec<String>,
    pub extra: Vec<(String, JsonValue)>,
}

impl QuadReport {
    pub fn new(task: &str) -> Self {
        QuadReport { task: task.to_string(), ..QuadReport::default() }
    }

    /// Folds in the sequence-level class verification.
    pub fn with_class(mut self, rep: &ApproxClassReport) -> Self {
        self.wce_samples = rep.rows.iter().map(|r| (r.n, r.wce)).collect();
        self.total_variation = Some(rep.sup_total_variation);
        self.regularity_constant = Some(rep.sup_regularity);
        self.fitted_a = Some(rep.fitted_a);
        let pts: Vec<(f64, f64)> = rep
            .rows
            .iter()
            .filter(|r| r.wce > 0.0)
            .map(|r| (r.n.ln(), r.wce.ln()))
            .collect();
        self.fitted_gamma = Some(-crate::kernels::least_squares_slope(&pts));
        self.conditions = vec![
            ("bounded total variation".to_string(), rep.tv_bounded),
            ("uniform 1/n-regularity".to_string(), rep.regularity_bounded),
            ("finite class constant A".to_string(), rep.a_finite),
        ];
        self.verdict = Some(rep.verdict);
        self
    }

    pub fn to_json_value(&self) -> JsonValue {
        let mut root = JsonValue::obj();
        root.set("task", JsonValue::Str(self.task.clone()));
        if let Some(r) = &self.exactness_residuals {
            root.set("exactness_residuals", reals(r.iter().copied()));
        }
        if let Some(r) = self.exactness_residual {
            root.set("exactness_residual", JsonValue::Num(r));
        }
        if let Some(v) = self.total_variation {
            root.set("total_variation", JsonValue::Num(v));
        }
        if let Some(v) = self.regularity_constant {
            root.set("regularity_constant", JsonValue::Num(v));
        }
        if let Some(v) = self.discrepancy {
            root.set("discrepancy", JsonValue::Num(v));
        }
        if !self.wce_samples.is_empty() {
            root.set(
                "wce_samples",
                JsonValue::Arr(
                    self.wce_samples
                        .iter()
                        .map(|(n, e)| reals([*n, *e]))
                        .collect(),
                ),
            );
        }
        if let Some(v) = self.fitted_gamma {
            root.set("fitted_gamma", JsonValue::Num(v));
        }
        if let Some(v) = self.fitted_a {
            root.set("fitted_a", JsonValue::Num(v));
        }
        if let Some(c) = &self.covering {
            let mut obj = JsonValue::obj();
            obj.set("p_tilde", JsonValue::Num(c.p_tilde));
            obj.set(
                "ladder",
                JsonValue::Arr(c.ladder.iter().map(|(c1, f)| reals([*c1, *f])).collect()),
            );
            obj.set(
                "c1",
                c.c1.map_or(JsonValue::Null, JsonValue::Num),
            );
            obj.set("passed", JsonValue::Bool(c.passed));
            root.set("covering", obj);
        }
        if let Some(p) = &self.positivity {
            let mut obj = JsonValue::obj();
            obj.set("exponent", JsonValue::Num(p.exponent));
            obj.set("max_scaled_mass", JsonValue::Num(p.max_scaled_mass));
            obj.set("total_variation", JsonValue::Num(p.total_variation));
            obj.set("regularity_at_inv_n", JsonValue::Num(p.regularity_at_inv_n));
            obj.set("flagged", JsonValue::Bool(p.flagged));
            root.set("positivity", obj);
        }
        if !self.conditions.is_empty() {
            let mut obj = JsonValue::obj();
            for (name, ok) in &self.conditions {
                obj.set(name, JsonValue::Bool(*ok));
            }
            root.set("conditions", obj);
        }
        if let Some(v) = self.verdict {
            root.set("verdict", JsonValue::Bool(v));
        }
        if !self.notes.is_empty() {
            root.set(
                "notes",
                JsonValue::Arr(self.notes.iter().map(|n| JsonValue::Str(n.clone())).collect()),
            );
        }
        for (key, value) in &self.extra {
            root.set(key, value.clone());
        }
        root
    }

    pub fn to_json(&self) -> String {
        let mut text = self.to_json_value().render();
        text.push('\n');
        text
    }

    /// Parses an emitted report back into a generic JSON document, for
    /// structural comparison.
    pub fn parse(text: &str) -> Result<serde_json::Value> {
        Ok(serde_json::from_str(text)?)
    }
}

/// The sweep CSV with the fixed header `n,wce,tv,reg_const,discrepancy`.
pub fn sweep_csv(rows: &[(f64, f64, f64, f64, f64)]) -> String {
    let mut out = String::from("n,wce,tv,reg_const,discrepancy\n");
    for (n, wce, tv, reg, disc) in rows {
        out.push_str(&format!("{n},{wce:.16e},{tv:.16e},{reg:.16e},{disc:.16e}\n"));
    }
    out
}

/// Worst-case-error report as a generic object, for sidecar emission.
pub fn wce_json(rep: &WceReport) -> JsonValue {
    let mut obj = JsonValue::obj();
    obj.set("value", JsonValue::Num(rep.value));
    obj.set("trials", JsonValue::Int(rep.trials as i64));
    obj.set("empty_sample", JsonValue::Bool(rep.empty_sample));
    obj.set("band", JsonValue::Num(rep.band));
    obj
}
