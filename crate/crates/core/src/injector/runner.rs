//! Sandboxed classification of candidate programs.
//!
//! A candidate is written to a temp file and run through a configurable
//! command once per test. The verdict dimensions:
//!
//! * `syntax_error` — the check command rejects it, or the very first test
//!   aborts with no output at all (the program never really ran);
//! * `passes` — every test exits 0 with the expected output;
//! * `logical_error` — it runs, but at least one test answers wrongly;
//! * `timeout_as_logical` — some test exceeded the wall-clock budget, which
//!   an injected bug turning a loop infinite routinely causes.
//!
//! Timeouts short-circuit immediately; mismatches do not, so the
//! timeout tag is a function of the whole test vector and re-classification
//! is stable. Infrastructure problems (unspawnable command, unwritable temp
//! dir) are errors, never classifications.

use std::io::{Read, Write};
use std::process::{Child, Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunnerConfig {
    /// Command template executing a program; `{src}` expands to its path.
    pub command: String,
    /// Optional parse/compile gate run before any test.
    pub check_command: Option<String>,
    /// Per-invocation wall-clock budget in seconds.
    pub timeout_secs: f64,
    /// Captured stdout/stderr are truncated beyond this many bytes.
    pub max_output_bytes: usize,
}

impl RunnerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.timeout_secs > 0.0) {
            return Err(CoreError::config("timeout_secs", "must be positive"));
        }
        if self.command.trim().is_empty() {
            return Err(CoreError::config("command", "must not be empty"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TestSpec {
    /// Feed `input` on stdin; pass iff exit 0 and stdout equals `expected`
    /// (modulo a trailing newline).
    Io { input: String, expected: String },
    /// Run a command template (`{src}` expands); pass iff exit 0.
    Command { command: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    SyntaxError,
    Passes,
    LogicalError,
    TimeoutAsLogical,
}

impl Classification {
    /// Variants the injector keeps: wrong answers and timeouts.
    pub fn is_logical(self) -> bool {
        matches!(
            self,
            Classification::LogicalError | Classification::TimeoutAsLogical
        )
    }
}

struct RunOutput {
    exit_zero: bool,
    stdout: Vec<u8>,
    timed_out: bool,
}

/// Quote-aware split: whitespace separates arguments; single or double
/// quotes group them (no escape sequences — templates are config, not shell).
fn split_command(template: &str) -> Result<Vec<String>> {
    let mut args = Vec::new();
    let mut cur = String::new();
    let mut in_word = false;
    let mut quote: Option<char> = None;
    for c in template.chars() {
        match quote {
            Some(q) if c == q => quote = None,
            Some(_) => cur.push(c),
            None if c == '\'' || c == '"' => {
                quote = Some(c);
                in_word = true;
            }
            None if c.is_whitespace() => {
                if in_word {
                    args.push(std::mem::take(&mut cur));
                    in_word = false;
                }
            }
            None => {
                cur.push(c);
                in_word = true;
            }
        }
    }
    if quote.is_some() {
        return Err(CoreError::Runner(format!(
            "unterminated quote in command template `{template}`"
        )));
    }
    if in_word {
        args.push(cur);
    }
    if args.is_empty() {
        return Err(CoreError::Runner("empty command template".into()));
    }
    Ok(args)
}

fn drain_capped(mut pipe: impl Read, cap: usize) -> Vec<u8> {
    let mut kept = Vec::new();
    let mut buf = [0u8; 8192];
    loop {
        match pipe.read(&mut buf) {
            Ok(0) | Err(_) => return kept,
            Ok(n) => {
                if kept.len() < cap {
                    let take = n.min(cap - kept.len());
                    kept.extend_from_slice(&buf[..take]);
                }
                // past the cap we keep reading so the child never blocks
            }
        }
    }
}

fn wait_with_timeout(child: &mut Child, deadline: Instant) -> Result<(bool, bool)> {
    loop {
        match child.try_wait() {
            Ok(Some(status)) => return Ok((status.success(), false)),
            Ok(None) => {
                if Instant::now() >= deadline {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Ok((false, true));
                }
                std::thread::sleep(Duration::from_millis(5));
            }
            Err(e) => return Err(CoreError::Runner(format!("wait failed: {e}"))),
        }
    }
}

fn run_command(
    template: &str,
    src_path: &str,
    stdin_data: Option<&str>,
    timeout: Duration,
    max_output: usize,
) -> Result<RunOutput> {
    let args: Vec<String> = split_command(template)?
        .into_iter()
        .map(|a| a.replace("{src}", src_path))
        .collect();
    let mut child = Command::new(&args[0])
        .args(&args[1..])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| CoreError::Runner(format!("cannot spawn `{}`: {e}", args[0])))?;

    let mut stdin = child.stdin.take().expect("piped stdin");
    let stdout = child.stdout.take().expect("piped stdout");
    let stderr = child.stderr.take().expect("piped stderr");
    let input = stdin_data.unwrap_or("").to_string();
    std::thread::scope(|s| {
        s.spawn(move || {
            let _ = stdin.write_all(input.as_bytes()); // EPIPE means it quit early
            drop(stdin);
        });
        let out_reader = s.spawn(move || drain_capped(stdout, max_output));
        let err_reader = s.spawn(move || drain_capped(stderr, max_output));
        let (exit_zero, timed_out) = wait_with_timeout(&mut child, Instant::now() + timeout)?;
        let stdout = out_reader.join().expect("stdout reader");
        let _ = err_reader.join().expect("stderr reader");
        Ok(RunOutput {
            exit_zero,
            stdout,
            timed_out,
        })
    })
}

fn matches_expected(stdout: &[u8], expected: &str) -> bool {
    let got = String::from_utf8_lossy(stdout);
    got.trim_end_matches('\n') == expected.trim_end_matches('\n')
}

/// Classify one candidate source against the case's tests.
pub fn classify(cfg: &RunnerConfig, source: &str, tests: &[TestSpec]) -> Result<Classification> {
    cfg.validate()?;
    if tests.is_empty() {
        return Err(CoreError::Runner("a case needs at least one test".into()));
    }
    let dir = tempfile::tempdir().map_err(|e| CoreError::Runner(format!("tempdir: {e}")))?;
    let src_path = dir.path().join("program.src");
    std::fs::write(&src_path, source).map_err(|e| CoreError::io(&src_path, e))?;
    let src = src_path.to_string_lossy().to_string();
    let timeout = Duration::from_secs_f64(cfg.timeout_secs);

    if let Some(check) = &cfg.check_command {
        let out = run_command(check, &src, None, timeout, cfg.max_output_bytes)?;
        if out.timed_out || !out.exit_zero {
            return Ok(Classification::SyntaxError);
        }
    }

    let mut mismatch = false;
    for (i, test) in tests.iter().enumerate() {
        let out = match test {
            TestSpec::Io { input, .. } => run_command(
                &cfg.command,
                &src,
                Some(input),
                timeout,
                cfg.max_output_bytes,
            )?,
            TestSpec::Command { command } => {
                run_command(command, &src, None, timeout, cfg.max_output_bytes)?
            }
        };
        if out.timed_out {
            return Ok(Classification::TimeoutAsLogical);
        }
        let matched = match test {
            TestSpec::Io { expected, .. } => {
                out.exit_zero && matches_expected(&out.stdout, expected)
            }
            TestSpec::Command { .. } => out.exit_zero,
        };
        if !matched {
            // An Io program that dies on the very first test without printing
            // anything never really ran. Command tests are exit-code-only and
            // routinely silent, so the heuristic would misfire there.
            let is_io = matches!(test, TestSpec::Io { .. });
            if i == 0 && is_io && !out.exit_zero && out.stdout.is_empty() {
                return Ok(Classification::SyntaxError);
            }
            mismatch = true;
        }
    }
    Ok(if mismatch {
        Classification::LogicalError
    } else {
        Classification::Passes
    })
}

/// Classify many sources against one test set with a bounded worker pool.
/// Results come back in input order regardless of completion order.
pub fn classify_batch(
    cfg: &RunnerConfig,
    sources: &[String],
    tests: &[TestSpec],
    jobs: usize,
) -> Vec<Result<Classification>> {
    let n = sources.len();
    if n == 0 {
        return Vec::new();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<Classification>>>> =
        (0..n).map(|_| Mutex::new(None)).collect();
    std::thread::scope(|s| {
        for _ in 0..jobs.max(1).min(n) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= n {
                    break;
                }
                let verdict = classify(cfg, &sources[i], tests);
                *slots[i].lock().expect("result slot") = Some(verdict);
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| {
            slot.into_inner()
                .expect("slot")
                .expect("worker filled slot")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sh_runner() -> RunnerConfig {
        RunnerConfig {
            command: "sh {src}".into(),
            check_command: Some("sh -n {src}".into()),
            timeout_secs: 2.0,
            max_output_bytes: 1 << 16,
        }
    }

    fn io(input: &str, expected: &str) -> TestSpec {
        TestSpec::Io {
            input: input.into(),
            expected: expected.into(),
        }
    }

    #[test]
    fn correct_program_passes() {
        let verdict = classify(
            &sh_runner(),
            "read x\necho $((x * 2))\n",
            &[io("21\n", "42"), io("4\n", "8")],
        )
        .unwrap();
        assert_eq!(verdict, Classification::Passes);
    }

    #[test]
    fn wrong_answer_is_logical() {
        let verdict = classify(
            &sh_runner(),
            "read x\necho $((x * 2))\n",
            &[io("21\n", "42"), io("4\n", "9")],
        )
        .unwrap();
        assert_eq!(verdict, Classification::LogicalError);
        assert!(verdict.is_logical());
    }

    #[test]
    fn parse_gate_rejects_garbage() {
        let verdict = classify(&sh_runner(), "fi then done (\n", &[io("", "x")]).unwrap();
        assert_eq!(verdict, Classification::SyntaxError);
    }

    #[test]
    fn first_test_abort_counts_as_syntax() {
        let verdict = classify(&sh_runner(), "exit 3\n", &[io("", "x")]).unwrap();
        assert_eq!(verdict, Classification::SyntaxError);
    }

    #[test]
    fn crash_after_first_test_is_logical() {
        // answers the first test, aborts silently on the second input
        let src = "read x\nif [ \"$x\" = \"1\" ]; then echo ok; else exit 9; fi\n";
        let verdict = classify(&sh_runner(), src, &[io("1\n", "ok"), io("2\n", "ok")]).unwrap();
        assert_eq!(verdict, Classification::LogicalError);
    }

    #[test]
    fn timeout_tags_infinite_loops() {
        let mut cfg = sh_runner();
        cfg.timeout_secs = 0.3;
        let verdict = classify(&cfg, "while true; do :; done\n", &[io("", "x")]).unwrap();
        assert_eq!(verdict, Classification::TimeoutAsLogical);
        assert!(verdict.is_logical());
    }

    #[test]
    fn timeout_beats_earlier_mismatch() {
        let mut cfg = sh_runner();
        cfg.timeout_secs = 0.3;
        // first test answers wrongly, second loops forever
        let src = "read x\nif [ \"$x\" = \"loop\" ]; then while true; do :; done; fi\necho nope\n";
        let verdict = classify(&cfg, src, &[io("a\n", "yes"), io("loop\n", "yes")]).unwrap();
        assert_eq!(verdict, Classification::TimeoutAsLogical);
    }

    #[test]
    fn output_capture_is_capped() {
        let mut cfg = sh_runner();
        cfg.max_output_bytes = 1000;
        // floods stdout, then the comparison fails on truncated output
        let src = "i=0\nwhile [ $i -lt 2000 ]; do echo aaaaaaaaaaaaaaaa; i=$((i+1)); done\n";
        let verdict = classify(&cfg, src, &[io("", "tiny")]).unwrap();
        assert_eq!(verdict, Classification::LogicalError);
    }

    #[test]
    fn command_tests_pass_on_exit_zero() {
        let cfg = RunnerConfig {
            command: "sh {src}".into(),
            check_command: None,
            timeout_secs: 2.0,
            max_output_bytes: 1 << 16,
        };
        let pass = TestSpec::Command {
            command: "sh -c 'sh {src} | grep -q 42'".into(),
        };
        assert_eq!(
            classify(&cfg, "echo 42\n", std::slice::from_ref(&pass)).unwrap(),
            Classification::Passes
        );
        assert_eq!(
            classify(&cfg, "echo 41\n", &[pass]).unwrap(),
            Classification::LogicalError
        );
    }

    #[test]
    fn unspawnable_command_is_an_error_not_a_verdict() {
        let cfg = RunnerConfig {
            command: "/no/such/binary {src}".into(),
            check_command: None,
            timeout_secs: 1.0,
            max_output_bytes: 1024,
        };
        assert!(matches!(
            classify(&cfg, "echo hi\n", &[io("", "hi")]),
            Err(CoreError::Runner(_))
        ));
    }

    #[test]
    fn split_honours_quotes() {
        assert_eq!(
            split_command("sh -c 'echo a b' last").unwrap(),
            vec!["sh", "-c", "echo a b", "last"]
        );
        assert_eq!(
            split_command("a \"b 'c' d\" e").unwrap(),
            vec!["a", "b 'c' d", "e"]
        );
        assert!(split_command("sh -c 'oops").is_err());
        assert!(split_command("   ").is_err());
    }

    #[test]
    fn batch_preserves_order() {
        let cfg = sh_runner();
        let sources: Vec<String> = (0..9)
            .map(|i| {
                if i % 2 == 0 {
                    "read x\necho $((x * 2))\n".to_string()
                } else {
                    "read x\necho $((x * 3))\n".to_string()
                }
            })
            .collect();
        let verdicts = classify_batch(&cfg, &sources, &[io("5\n", "10")], 4);
        for (i, v) in verdicts.into_iter().enumerate() {
            let v = v.unwrap();
            if i % 2 == 0 {
                assert_eq!(v, Classification::Passes, "index {i}");
            } else {
                assert_eq!(v, Classification::LogicalError, "index {i}");
            }
        }
    }
}
