use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};
use std::sync::Mutex;

use serde::Deserialize;
use serde_json::Value;

use super::{ActivationVector, CoverageOracle, OracleError, Topology};

struct Channel {
    child: Child,
    stdin: ChildStdin,
    stdout: BufReader<ChildStdout>,
    next_id: u64,
}

impl Channel {
    fn read_line(&mut self, what: &str) -> Result<String, OracleError> {
        let mut line = String::new();
        let n = self.stdout.read_line(&mut line)?;
        if n == 0 {
            return Err(OracleError::Protocol(format!("oracle closed its output before {what}")));
        }
        Ok(line)
    }
}

impl Drop for Channel {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

#[derive(Deserialize)]
struct Handshake {
    topology: Vec<usize>,
}

/// Oracle backed by a child process speaking newline-delimited JSON.
///
/// The child announces `{"topology": [..]}` once, then answers each
/// `{"id", "program"}` request with `{"id", "layers"}`. Requests are
/// serialized through a lock; there is no restart after a failure.
pub struct ExecOracle {
    command: String,
    topology: Topology,
    channel: Mutex<Channel>,
}

impl ExecOracle {
    /// Runs `command` through `sh -c` and reads the handshake.
    pub fn spawn(command: &str) -> Result<Self, OracleError> {
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(command)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|source| OracleError::Spawn { command: command.to_string(), source })?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = BufReader::new(child.stdout.take().expect("piped stdout"));
        let mut channel = Channel { child, stdin, stdout, next_id: 0 };
        let line = channel.read_line("the handshake")?;
        let handshake: Handshake = serde_json::from_str(line.trim())
            .map_err(|e| OracleError::Protocol(format!("bad handshake {:?}: {e}", line.trim())))?;
        if handshake.topology.is_empty() || handshake.topology.contains(&0) {
            return Err(OracleError::Protocol(format!(
                "handshake topology {:?} must list at least one non-empty layer",
                handshake.topology
            )));
        }
        log::info!("exec oracle `{command}` announced topology {:?}", handshake.topology);
        Ok(ExecOracle {
            command: command.to_string(),
            topology: Topology::new(handshake.topology),
            channel: Mutex::new(channel),
        })
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    fn decode(&self, id: u64, line: &str) -> Result<ActivationVector, OracleError> {
        let value: Value = serde_json::from_str(line.trim())
            .map_err(|e| OracleError::Protocol(format!("malformed response {:?}: {e}", line.trim())))?;
        let got = value.get("id").and_then(Value::as_u64);
        if got != Some(id) {
            return Err(OracleError::Protocol(format!(
                "response id {} does not match request id {id}",
                value.get("id").map_or("<missing>".to_string(), Value::to_string)
            )));
        }
        if let Some(err) = value.get("error") {
            let message = err.as_str().map_or_else(|| err.to_string(), str::to_string);
            return Err(OracleError::Rejected { id, message });
        }
        let layers = value
            .get("layers")
            .and_then(Value::as_array)
            .ok_or_else(|| OracleError::Protocol(format!("response {id} has no \"layers\" list")))?;
        let mut out = Vec::with_capacity(layers.len());
        for (l, layer) in layers.iter().enumerate() {
            let values = layer.as_array().ok_or_else(|| {
                OracleError::Protocol(format!("response {id}: layer {l} is not a list"))
            })?;
            let mut row = Vec::with_capacity(values.len());
            for v in values {
                match v.as_f64() {
                    Some(f) if f.is_finite() => row.push(f),
                    _ => {
                        return Err(OracleError::Protocol(format!(
                            "response {id}: layer {l} holds non-finite or non-numeric value {v}"
                        )))
                    }
                }
            }
            out.push(row);
        }
        let raw = ActivationVector::new(out);
        if !raw.matches(&self.topology) {
            let sizes: Vec<usize> = raw.layers.iter().map(Vec::len).collect();
            return Err(OracleError::Protocol(format!(
                "response {id}: layer sizes {sizes:?} differ from handshake {}",
                self.topology
            )));
        }
        Ok(raw)
    }
}

impl CoverageOracle for ExecOracle {
    fn topology(&self) -> &Topology {
        &self.topology
    }

    fn activations(&self, program: &str) -> Result<ActivationVector, OracleError> {
        let mut channel = self.channel.lock().unwrap_or_else(|p| p.into_inner());
        let id = channel.next_id;
        channel.next_id += 1;
        let request = serde_json::json!({ "id": id, "program": program });
        writeln!(channel.stdin, "{request}")?;
        channel.stdin.flush()?;
        let line = channel.read_line(&format!("answering request {id}"))?;
        drop(channel);
        self.decode(id, &line)
    }

    fn describe(&self) -> String {
        format!("exec:{}", self.command)
    }
}
