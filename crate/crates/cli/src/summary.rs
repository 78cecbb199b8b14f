use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Fail,
    Error,
}

/// The one-line `key=value` result every command prints last.
#[derive(Debug, Clone)]
pub struct Summary {
    command: String,
    status: Status,
    fields: Vec<(String, String)>,
}

impl Summary {
    pub fn new(command: &str, status: Status) -> Self {
        Summary { command: command.to_string(), status, fields: Vec::new() }
    }

    pub fn ok(command: &str) -> Self {
        Self::new(command, Status::Ok)
    }

    pub fn error(command: &str, err: &anyhow::Error) -> Self {
        Self::new(command, Status::Error).with("error", format!("{err:#}"))
    }

    pub fn with(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.fields.push((key.to_string(), value.to_string()));
        self
    }

    pub fn float(self, key: &str, value: f64) -> Self {
        self.with(key, format!("{value:.6e}"))
    }

    pub fn set_status(&mut self, status: Status) {
        self.status = status;
    }

    pub fn is_ok(&self) -> bool {
        self.status == Status::Ok
    }
}

fn quote(v: &str) -> String {
    if !v.is_empty() && !v.chars().any(|c| c.is_whitespace() || c == '"' || c == '=') {
        return v.to_string();
    }
    format!("\"{}\"", v.replace('\\', "\\\\").replace('"', "\\\"").replace('\n', "\\n"))
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = match self.status {
            Status::Ok => "ok",
            Status::Fail => "fail",
            Status::Error => "error",
        };
        write!(f, "status={status} command={}", self.command)?;
        for (k, v) in &self.fields {
            write!(f, " {k}={}", quote(v))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn format_is_stable() {
        let s = Summary::ok("plan").with("steps", 3).float("tour_length", 1.5).with("note", "a b");
        assert_eq!(s.to_string(), "status=ok command=plan steps=3 tour_length=1.500000e0 note=\"a b\"");
    }

    #[test]
    fn errors_are_quoted() {
        let s = Summary::error("train", &anyhow::anyhow!("bad \"x\""));
        assert_eq!(s.to_string(), "status=error command=train error=\"bad \\\"x\\\"\"");
        assert!(!s.is_ok());
    }
}
