use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

/// What a command did, how long each phase took, and what it wrote.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: String,
    /// Effective parameters, defaults included.
    pub parameters: BTreeMap<String, Value>,
    pub phases_ms: BTreeMap<String, f64>,
    /// Peak resident set size in bytes, where the platform reports it.
    pub peak_memory_bytes: Option<u64>,
    pub outputs: Vec<String>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub results: BTreeMap<String, Value>,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        RunReport {
            command: command.to_string(),
            parameters: BTreeMap::new(),
            phases_ms: BTreeMap::new(),
            peak_memory_bytes: None,
            outputs: Vec::new(),
            results: BTreeMap::new(),
        }
    }

    pub fn param(&mut self, name: &str, value: impl Serialize) -> &mut Self {
        self.parameters.insert(name.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    pub fn result(&mut self, name: &str, value: impl Serialize) -> &mut Self {
        self.results.insert(name.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    /// Runs `f` and records its wall time under `phase`.
    pub fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        *self.phases_ms.entry(phase.to_string()).or_default() += start.elapsed().as_secs_f64() * 1e3;
        out
    }

    pub fn output(&mut self, path: &std::path::Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn finish(&mut self) {
        self.peak_memory_bytes = peak_memory_bytes();
    }

    /// Plain-text rendering for stderr.
    pub fn human(&self) -> String {
        let mut s = format!("gee {}\n", self.command);
        for (k, v) in &self.results {
            s.push_str(&format!("  {k}: {v}\n"));
        }
        for (k, v) in &self.phases_ms {
            s.push_str(&format!("  {k}: {v:.2} ms\n"));
        }
        if let Some(m) = self.peak_memory_bytes {
            s.push_str(&format!("  peak memory: {:.1} MiB\n", m as f64 / (1024.0 * 1024.0)));
        }
        for o in &self.outputs {
            s.push_str(&format!("  wrote {o}\n"));
        }
        s
    }
}

/// `VmHWM` from `/proc/self/status`.
pub fn peak_memory_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}
