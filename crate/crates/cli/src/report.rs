use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Serialize)]
pub struct Field {
    pub key: String,
    pub value: Value,
}

#[derive(Debug, Serialize)]
pub struct Condition {
    pub label: String,
    pub holds: bool,
    pub detail: String,
}

/// Result of one command. The machine format serializes this struct as
/// JSON; the human format renders the same content as tables.
#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub input: String,
    pub seed: u64,
    pub status: Status,
    pub summary: String,
    pub fields: Vec<Field>,
    pub conditions: Vec<Condition>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<Value>,
}

impl Report {
    pub fn new(command: &str, input: &str, seed: u64) -> Self {
        Self {
            command: command.into(),
            input: input.into(),
            seed,
            status: Status::Pass,
            summary: String::new(),
            fields: Vec::new(),
            conditions: Vec::new(),
            data: None,
        }
    }

    pub fn field(&mut self, key: &str, value: impl Serialize) {
        let value = serde_json::to_value(value).expect("report values serialize");
        self.fields.push(Field { key: key.into(), value });
    }

    pub fn condition(&mut self, label: &str, holds: bool, detail: impl Into<String>) {
        if !holds {
            self.status = Status::Fail;
        }
        self.conditions.push(Condition { label: label.into(), holds, detail: detail.into() });
    }

    pub fn machine(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn human(&self) -> String {
        let mut rows: Vec<(String, String)> = vec![
            ("command".into(), self.command.clone()),
            ("input".into(), self.input.clone()),
            ("seed".into(), self.seed.to_string()),
            ("status".into(), if self.status == Status::Pass { "pass" } else { "fail" }.into()),
        ];
        rows.extend(self.fields.iter().map(|f| (f.key.clone(), plain(&f.value))));
        let width = rows.iter().map(|r| r.0.chars().count()).max().unwrap_or(0);
        let mut out = String::new();
        if !self.summary.is_empty() {
            out.push_str(&self.summary);
            out.push_str("\n\n");
        }
        for (k, v) in &rows {
            out.push_str(&format!("{k:width$}  {v}\n"));
        }
        if !self.conditions.is_empty() {
            let w = self.conditions.iter().map(|c| c.label.chars().count()).max().unwrap_or(0).max(9);
            out.push_str(&format!("\n{:w$}  holds  detail\n", "condition"));
            for c in &self.conditions {
                let mark = if c.holds { "yes" } else { "NO" };
                out.push_str(&format!("{:w$}  {mark:5}  {}\n", c.label, c.detail).trim_end().to_string());
                out.push('\n');
            }
        }
        out
    }
}

fn plain(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        other => other.to_string(),
    }
}
