//! File-based protocol for external trainers.
//!
//! Contract, bit-exact:
//!
//! * input file: JSON `{"config": <StrategyConfig>, "seed": <int>, "out": "<path>"}`
//! * invocation: `<command> [fixed args...] <input-path>`
//! * output file at `out`: JSON `{"miou": <real in [0, 1]>}`
//! * exit code 0 on success.
//!
//! Nonzero exits, malformed results and timeouts become failed trials with
//! captured diagnostics; the search goes on.

use super::TrialEvaluator;
use crate::strategy::StrategyConfig;
use serde::{Deserialize, Serialize};
use std::io::Read;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

/// How to reach the external trainer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExternalSpec {
    /// Program plus fixed arguments; the input path is appended.
    pub command: Vec<String>,
    /// Per-trial wall-clock limit in seconds.
    #[serde(default = "default_timeout_secs")]
    pub timeout_secs: u64,
}

fn default_timeout_secs() -> u64 {
    600
}

impl ExternalSpec {
    /// Parses a shell-ish command line by whitespace splitting.
    pub fn from_command_line(line: &str) -> Option<Self> {
        let command: Vec<String> = line.split_whitespace().map(str::to_string).collect();
        if command.is_empty() {
            None
        } else {
            Some(ExternalSpec {
                command,
                timeout_secs: default_timeout_secs(),
            })
        }
    }
}

#[derive(Serialize)]
struct TrialInput<'a> {
    config: &'a StrategyConfig,
    seed: u64,
    out: String,
}

#[derive(Deserialize)]
struct TrialOutput {
    miou: f64,
}

/// Runs trial evaluations through the external-trainer protocol.
#[derive(Debug, Clone)]
pub struct ExternalEvaluator {
    spec: ExternalSpec,
}

impl ExternalEvaluator {
    pub fn new(spec: ExternalSpec) -> Self {
        ExternalEvaluator { spec }
    }

    fn run(&self, cfg: &StrategyConfig, seed: u64) -> Result<f64, String> {
        let dir = tempfile::Builder::new()
            .prefix("smartaug-trial-")
            .tempdir()
            .map_err(|e| format!("cannot create trial dir: {e}"))?;
        let input_path = dir.path().join("input.json");
        let out_path = dir.path().join("result.json");
        let input = TrialInput {
            config: cfg,
            seed,
            out: out_path.display().to_string(),
        };
        std::fs::write(
            &input_path,
            serde_json::to_vec_pretty(&input).map_err(|e| format!("encode input: {e}"))?,
        )
        .map_err(|e| format!("write input: {e}"))?;

        let mut child = Command::new(&self.spec.command[0])
            .args(&self.spec.command[1..])
            .arg(&input_path)
            .stdin(Stdio::null())
            .stdout(Stdio::null())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| format!("cannot spawn `{}`: {e}", self.spec.command[0]))?;

        let deadline = Instant::now() + Duration::from_secs(self.spec.timeout_secs);
        let status = loop {
            match child.try_wait() {
                Ok(Some(status)) => break status,
                Ok(None) => {
                    if Instant::now() >= deadline {
                        let _ = child.kill();
                        let _ = child.wait();
                        return Err(format!(
                            "timeout after {}s running `{}`",
                            self.spec.timeout_secs, self.spec.command[0]
                        ));
                    }
                    std::thread::sleep(Duration::from_millis(10));
                }
                Err(e) => return Err(format!("wait failed: {e}")),
            }
        };
        let mut stderr = String::new();
        if let Some(mut pipe) = child.stderr.take() {
            let _ = pipe.read_to_string(&mut stderr);
        }
        if !status.success() {
            let tail: String = stderr
                .chars()
                .rev()
                .take(500)
                .collect::<Vec<_>>()
                .iter()
                .rev()
                .collect();
            return Err(format!("evaluator exited with {status}; stderr: {tail}"));
        }
        let text = std::fs::read_to_string(&out_path)
            .map_err(|e| format!("missing result file {}: {e}", out_path.display()))?;
        let parsed: TrialOutput =
            serde_json::from_str(&text).map_err(|e| format!("malformed result JSON: {e}"))?;
        if !(parsed.miou.is_finite() && (0.0..=1.0).contains(&parsed.miou)) {
            return Err(format!("miou {} outside [0, 1]", parsed.miou));
        }
        Ok(parsed.miou)
    }
}

impl TrialEvaluator for ExternalEvaluator {
    fn evaluate(&self, cfg: &StrategyConfig, seed: u64) -> Result<f64, String> {
        self.run(cfg, seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strategy::StrategyKind;
    use std::io::Write;
    use std::os::unix::fs::PermissionsExt;
    use std::path::Path;

    fn write_script(dir: &Path, name: &str, body: &str) -> String {
        let path = dir.join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "#!/bin/sh").unwrap();
        writeln!(f, "{body}").unwrap();
        drop(f);
        std::fs::set_permissions(&path, std::fs::Permissions::from_mode(0o755)).unwrap();
        path.display().to_string()
    }

    fn cfg() -> StrategyConfig {
        StrategyConfig::new(StrategyKind::Trivial)
    }

    #[test]
    fn stub_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        // Extract the "out" path from the input JSON and write a result.
        let script = write_script(
            dir.path(),
            "stub.sh",
            r#"out=$(python3 -c "import json,sys; print(json.load(open(sys.argv[1]))['out'])" "$1")
echo '{"miou": 0.5}' > "$out""#,
        );
        let eval = ExternalEvaluator::new(ExternalSpec {
            command: vec![script],
            timeout_secs: 30,
        });
        assert_eq!(eval.evaluate(&cfg(), 7), Ok(0.5));
    }

    #[test]
    fn nonzero_exit_is_a_failed_trial() {
        let dir = tempfile::tempdir().unwrap();
        let script = write_script(dir.path(), "fail.sh", "echo boom >&2; exit 1");
        let eval = ExternalEvaluator::new(ExternalSpec {
            command: vec![script],
            timeout_secs: 30,
        });
        let err = eval.evaluate(&cfg(), 7).unwrap_err();
        assert!(err.contains("boom"), "{err}");
    }

    #[test]
    fn malformed_result_is_a_failed_trial() {
        let dir = tempfile::tempdir().unwrap();
        let script = write_script(
            dir.path(),
            "bad.sh",
            r#"out=$(python3 -c "import json,sys; print(json.load(open(sys.argv[1]))['out'])" "$1")
echo 'not json' > "$out""#,
        );
        let eval = ExternalEvaluator::new(ExternalSpec {
            command: vec![script],
            timeout_secs: 30,
        });
        let err = eval.evaluate(&cfg(), 7).unwrap_err();
        assert!(err.contains("malformed"), "{err}");
    }

    #[test]
    fn timeout_kills_the_trial() {
        let dir = tempfile::tempdir().unwrap();
        let script = write_script(dir.path(), "slow.sh", "sleep 30");
        let eval = ExternalEvaluator::new(ExternalSpec {
            command: vec![script],
            timeout_secs: 1,
        });
        let err = eval.evaluate(&cfg(), 7).unwrap_err();
        assert!(err.contains("timeout"), "{err}");
    }
}
