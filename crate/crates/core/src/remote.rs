//! Client for a completions-style HTTP API that exposes per-token
//! log-probabilities and top-k alternatives.
//!
//! The wire shape is the familiar one: POST `{base_url}/completions` with
//! `echo` + `logprobs` fields; the response carries subword pieces, their
//! log-probabilities, and byte offsets. Any provider implementing that
//! shape works — there is no provider-specific logic here.
//!
//! The provider's subword pieces rarely line up with lexer tokens, so
//! scoring re-aggregates them: each piece is credited to the first lexer
//! token whose byte span it intersects (log-probabilities are additive in
//! log space, and byte spans are the only coordinate system both sides
//! share). Whitespace-only pieces fold into the following token so no
//! probability mass is dropped. A lexer token no piece covers is an
//! alignment failure, reported with the offending spans.
//!
//! Transient failures (transport errors, 5xx) are retried with exponential
//! backoff; 4xx responses are terminal. The [`stub`] submodule provides a
//! scripted loopback server so all of this is testable without a network.

use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{CoreError, Result};
use crate::localizer::mask_structural;
use crate::profile::LexProfile;
use crate::repairer::MASK_SENTINEL;
use crate::scorer::{FillCandidate, ScoredProgram, Scorer};
use crate::tokenizer::{detokenize, tokenize, TokenStream};

/// Connection and retry policy for one endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemoteConfig {
    /// Endpoint root; `/completions` is appended.
    pub base_url: String,
    pub model_name: String,
    /// Name of the environment variable holding the bearer token. When the
    /// variable is unset or empty, requests go out unauthenticated.
    pub api_key_env: String,
    pub timeout_secs: f64,
    /// Retries allowed beyond the first attempt.
    pub max_retries: u32,
    /// First retry delay; each subsequent delay doubles.
    pub backoff_base_secs: f64,
    /// Concurrent request ceiling for batch scoring.
    pub max_in_flight: usize,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        RemoteConfig {
            base_url: String::new(),
            model_name: String::new(),
            api_key_env: "LECFORGE_API_KEY".to_string(),
            timeout_secs: 30.0,
            max_retries: 3,
            backoff_base_secs: 0.25,
            max_in_flight: 4,
        }
    }
}

impl RemoteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.base_url.is_empty() {
            return Err(CoreError::config("base_url", "must not be empty"));
        }
        if !(self.timeout_secs > 0.0 && self.timeout_secs.is_finite()) {
            return Err(CoreError::config("timeout_secs", "must be positive and finite"));
        }
        if !(self.backoff_base_secs >= 0.0 && self.backoff_base_secs.is_finite()) {
            return Err(CoreError::config("backoff_base_secs", "must be non-negative"));
        }
        if self.max_in_flight == 0 {
            return Err(CoreError::config("max_in_flight", "must be at least 1"));
        }
        Ok(())
    }

    fn completions_url(&self) -> String {
        format!("{}/completions", self.base_url.trim_end_matches('/'))
    }
}

/// The delay before each retry: `backoff_base * 2^i` for retry `i`.
/// The schedule is nondecreasing, with one entry per allowed retry.
pub fn backoff_schedule(cfg: &RemoteConfig) -> Vec<Duration> {
    (0..cfg.max_retries)
        .map(|i| Duration::from_secs_f64(cfg.backoff_base_secs * f64::powi(2.0, i as i32)))
        .collect()
}

fn build_client(cfg: &RemoteConfig) -> Result<reqwest::blocking::Client> {
    reqwest::blocking::Client::builder()
        .timeout(Duration::from_secs_f64(cfg.timeout_secs))
        .build()
        .map_err(|e| CoreError::Remote {
            attempts: 0,
            message: format!("could not build HTTP client: {e}"),
        })
}

/// POST `body` to the completions endpoint, retrying transport errors and
/// 5xx responses. Returns the parsed response and how many attempts it took;
/// the attempt count never exceeds `max_retries + 1`.
pub fn post_completion(cfg: &RemoteConfig, body: &Value) -> Result<(Value, u32)> {
    cfg.validate()?;
    let client = build_client(cfg)?;
    send_with_retries(&client, cfg, body)
}

fn send_with_retries(
    client: &reqwest::blocking::Client,
    cfg: &RemoteConfig,
    body: &Value,
) -> Result<(Value, u32)> {
    let url = cfg.completions_url();
    let schedule = backoff_schedule(cfg);
    let api_key = std::env::var(&cfg.api_key_env).ok().filter(|k| !k.is_empty());
    let mut attempts = 0u32;
    loop {
        attempts += 1;
        let mut request = client.post(&url).json(body);
        if let Some(key) = &api_key {
            request = request.bearer_auth(key);
        }
        let failure = match request.send() {
            Ok(response) => {
                let status = response.status();
                if status.is_success() {
                    let value = response.json::<Value>().map_err(|_| CoreError::Protocol("body"))?;
                    return Ok((value, attempts));
                }
                if status.is_client_error() {
                    // 4xx means the request itself is wrong; retrying the
                    // same bytes cannot help.
                    return Err(CoreError::Remote {
                        attempts,
                        message: format!("terminal status {status}"),
                    });
                }
                format!("retryable status {status}")
            }
            Err(e) => e.to_string(),
        };
        if attempts > cfg.max_retries {
            return Err(CoreError::Remote {
                attempts,
                message: failure,
            });
        }
        std::thread::sleep(schedule[(attempts - 1) as usize]);
    }
}

fn score_body(model: &str, source: &str) -> Value {
    json!({
        "model": model,
        "prompt": source,
        "max_tokens": 0,
        "echo": true,
        "logprobs": 0,
    })
}

fn fill_body(model: &str, prompt: &str, k: usize) -> Value {
    json!({
        "model": model,
        "prompt": prompt,
        "max_tokens": 1,
        "logprobs": k,
    })
}

/// Subword pieces from an echoed-logprobs response: byte spans into the
/// prompt plus per-piece log-probabilities (the context-free first piece
/// arrives as null and counts as zero).
struct EchoPieces {
    spans: Vec<(usize, usize)>,
    logprobs: Vec<f64>,
}

fn response_logprobs(value: &Value) -> Result<&Value> {
    value
        .get("choices")
        .and_then(|c| c.get(0))
        .and_then(|c| c.get("logprobs"))
        .ok_or(CoreError::Protocol("choices[0].logprobs"))
}

fn parse_echo(value: &Value) -> Result<EchoPieces> {
    let lp = response_logprobs(value)?;
    let tokens = lp
        .get("tokens")
        .and_then(Value::as_array)
        .ok_or(CoreError::Protocol("logprobs.tokens"))?;
    let token_logprobs = lp
        .get("token_logprobs")
        .and_then(Value::as_array)
        .ok_or(CoreError::Protocol("logprobs.token_logprobs"))?;
    let text_offset = lp
        .get("text_offset")
        .and_then(Value::as_array)
        .ok_or(CoreError::Protocol("logprobs.text_offset"))?;
    if tokens.len() != token_logprobs.len() || tokens.len() != text_offset.len() {
        return Err(CoreError::Protocol("logprobs"));
    }
    let mut spans = Vec::with_capacity(tokens.len());
    let mut logprobs = Vec::with_capacity(tokens.len());
    for i in 0..tokens.len() {
        let text = tokens[i].as_str().ok_or(CoreError::Protocol("logprobs.tokens"))?;
        let offset = text_offset[i]
            .as_u64()
            .ok_or(CoreError::Protocol("logprobs.text_offset"))? as usize;
        let lp = if token_logprobs[i].is_null() {
            0.0
        } else {
            token_logprobs[i]
                .as_f64()
                .ok_or(CoreError::Protocol("logprobs.token_logprobs"))?
        };
        spans.push((offset, offset + text.len()));
        logprobs.push(lp);
    }
    Ok(EchoPieces { spans, logprobs })
}

/// Credit each piece to the first token whose byte span it intersects.
///
/// Pieces touching no token (whitespace between tokens) fold into the next
/// token, so the sum over tokens equals the sum over pieces exactly. Tokens
/// no piece intersects, or pieces reaching past the source, are alignment
/// failures reported with their spans.
fn aggregate_spans(
    token_spans: &[(usize, usize)],
    source_len: usize,
    pieces: &EchoPieces,
) -> Result<Vec<f64>> {
    let n = token_spans.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut out = vec![0.0; n];
    let mut covered = vec![false; n];
    let mut out_of_range = Vec::new();
    for (&(s, e), &lp) in pieces.spans.iter().zip(&pieces.logprobs) {
        if s > e || e > source_len {
            out_of_range.push((s, e));
            continue;
        }
        if s == e {
            continue; // empty piece, no bytes to attribute
        }
        match token_spans.iter().position(|&(ts, te)| ts < e && s < te) {
            Some(i) => {
                out[i] += lp;
                covered[i] = true;
            }
            None => {
                let next = token_spans.iter().position(|&(ts, _)| ts >= s).unwrap_or(n - 1);
                out[next] += lp;
            }
        }
    }
    if !out_of_range.is_empty() {
        return Err(CoreError::Alignment(out_of_range));
    }
    let uncovered: Vec<(usize, usize)> = token_spans
        .iter()
        .enumerate()
        .filter(|&(i, _)| !covered[i])
        .map(|(_, &span)| span)
        .collect();
    if !uncovered.is_empty() {
        return Err(CoreError::Alignment(uncovered));
    }
    Ok(out)
}

fn parse_fill(value: &Value, k: usize, profile: &LexProfile) -> Result<Vec<FillCandidate>> {
    let lp = response_logprobs(value)?;
    let top = lp
        .get("top_logprobs")
        .and_then(|t| t.get(0))
        .and_then(Value::as_object)
        .ok_or(CoreError::Protocol("logprobs.top_logprobs"))?;
    let mut best: std::collections::BTreeMap<String, f64> = std::collections::BTreeMap::new();
    for (text, score) in top {
        let score = score
            .as_f64()
            .ok_or(CoreError::Protocol("logprobs.top_logprobs"))?;
        let trimmed = text.trim();
        if trimmed.is_empty() {
            continue;
        }
        // Keep only pieces that stand alone as exactly one code token.
        let lexed = tokenize(trimmed, profile);
        if lexed.len() != 1 || !lexed.token(0).kind.is_code() || lexed.token(0).text != trimmed {
            continue;
        }
        let entry = best.entry(trimmed.to_string()).or_insert(f64::NEG_INFINITY);
        if score > *entry {
            *entry = score;
        }
    }
    let mut candidates: Vec<FillCandidate> = best
        .into_iter()
        .map(|(text, score)| FillCandidate { text, score })
        .collect();
    candidates.sort_by(|a, b| b.score.total_cmp(&a.score).then_with(|| a.text.cmp(&b.text)));
    candidates.truncate(k);
    Ok(candidates)
}

/// A [`Scorer`] backed by the remote endpoint. The profile is needed to
/// re-derive byte spans (streams may have been edited, which stales their
/// recorded spans) and to gate fill candidates to single code tokens.
pub struct RemoteScorer {
    cfg: RemoteConfig,
    profile: LexProfile,
    client: reqwest::blocking::Client,
}

impl RemoteScorer {
    pub fn new(cfg: RemoteConfig, profile: LexProfile) -> Result<Self> {
        cfg.validate()?;
        let client = build_client(&cfg)?;
        Ok(RemoteScorer {
            cfg,
            profile,
            client,
        })
    }

    fn request(&self, body: &Value) -> Result<(Value, u32)> {
        send_with_retries(&self.client, &self.cfg, body)
    }
}

impl Scorer for RemoteScorer {
    fn name(&self) -> &'static str {
        "remote"
    }

    fn can_score(&self) -> bool {
        true
    }

    fn can_fill(&self) -> bool {
        true
    }

    fn score_stream(&self, stream: &TokenStream) -> Result<Vec<f64>> {
        let source = detokenize(stream);
        let fresh = tokenize(&source, &self.profile);
        if fresh.texts() != stream.texts() {
            return Err(CoreError::Precondition(
                "stream does not re-lex cleanly; remote scoring needs lexable text".into(),
            ));
        }
        let (value, _) = self.request(&score_body(&self.cfg.model_name, &source))?;
        let pieces = parse_echo(&value)?;
        let spans: Vec<(usize, usize)> = fresh.tokens().iter().map(|t| t.span).collect();
        aggregate_spans(&spans, source.len(), &pieces)
    }

    fn fill(&self, left: &[String], _right: &[String], k: usize) -> Result<Vec<FillCandidate>> {
        // A completions endpoint predicts continuations, so only the left
        // context conditions the candidates.
        let prompt = left.join(" ");
        let (value, _) = self.request(&fill_body(&self.cfg.model_name, &prompt, k))?;
        parse_fill(&value, k, &self.profile)
    }
}

/// Score one stream against the source it was lexed from, returning the
/// standard scored program (first token, comments, and newlines flagged
/// unscored and zeroed).
pub fn score_tokens(cfg: &RemoteConfig, source: &str, stream: &TokenStream) -> Result<ScoredProgram> {
    cfg.validate()?;
    if detokenize(stream) != source {
        return Err(CoreError::Precondition(
            "stream does not reassemble to the given source".into(),
        ));
    }
    for tok in stream.tokens() {
        if source.get(tok.span.0..tok.span.1) != Some(tok.text.as_str()) {
            return Err(CoreError::Precondition(format!(
                "token span {:?} is stale; re-lex the source before scoring",
                tok.span
            )));
        }
    }
    let (value, _) = post_completion(cfg, &score_body(&cfg.model_name, source))?;
    let pieces = parse_echo(&value)?;
    let spans: Vec<(usize, usize)> = stream.tokens().iter().map(|t| t.span).collect();
    let mut logprobs = aggregate_spans(&spans, source.len(), &pieces)?;
    let unscored = mask_structural(stream, &mut logprobs);
    ScoredProgram::new(stream.clone(), logprobs, unscored)
}

/// Rank up to `k` fill candidates for the single `<mask>` sentinel in
/// `masked_source`. Candidates that do not re-lex to exactly one code token
/// are discarded.
pub fn fill_candidates_remote(
    cfg: &RemoteConfig,
    masked_source: &str,
    k: usize,
    profile: &LexProfile,
) -> Result<Vec<FillCandidate>> {
    cfg.validate()?;
    let sentinels = masked_source.matches(MASK_SENTINEL).count();
    if sentinels != 1 {
        return Err(CoreError::Precondition(format!(
            "masked source must contain exactly one {MASK_SENTINEL} sentinel, found {sentinels}"
        )));
    }
    let cut = masked_source.find(MASK_SENTINEL).unwrap();
    let prompt = &masked_source[..cut];
    let (value, _) = post_completion(cfg, &fill_body(&cfg.model_name, prompt, k))?;
    parse_fill(&value, k, profile)
}

/// Score many streams, at most `max_in_flight` requests at a time, with
/// results restored to input order.
pub fn score_streams(
    cfg: &RemoteConfig,
    profile: &LexProfile,
    streams: &[TokenStream],
) -> Vec<Result<ScoredProgram>> {
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Mutex;

    if streams.is_empty() {
        return Vec::new();
    }
    let slots: Mutex<Vec<Option<Result<ScoredProgram>>>> =
        Mutex::new((0..streams.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let workers = cfg.max_in_flight.max(1).min(streams.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| {
                let scorer = RemoteScorer::new(cfg.clone(), profile.clone());
                loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= streams.len() {
                        break;
                    }
                    let outcome = match &scorer {
                        Ok(s) => crate::localizer::score_program(s, &streams[i]),
                        Err(e) => Err(CoreError::Remote {
                            attempts: 0,
                            message: format!("could not build scorer: {e}"),
                        }),
                    };
                    slots.lock().unwrap()[i] = Some(outcome);
                }
            });
        }
    });
    slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|slot| slot.expect("every slot filled"))
        .collect()
}

pub mod stub {
    //! A scripted loopback HTTP responder.
    //!
    //! Binds an ephemeral port on 127.0.0.1, answers each request with the
    //! next scripted response, and records request bodies and auth headers
    //! for inspection. Exists so the remote client can be exercised
    //! end-to-end without any real network.

    use std::collections::VecDeque;
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::{SocketAddr, TcpListener, TcpStream};
    use std::sync::atomic::{AtomicBool, Ordering};
    use std::sync::{Arc, Mutex};
    use std::thread::JoinHandle;

    use serde_json::Value;

    /// One canned reply.
    #[derive(Debug, Clone)]
    pub struct ScriptedResponse {
        pub status: u16,
        pub body: String,
    }

    impl ScriptedResponse {
        pub fn ok(body: impl Into<String>) -> Self {
            ScriptedResponse {
                status: 200,
                body: body.into(),
            }
        }

        pub fn error(status: u16) -> Self {
            ScriptedResponse {
                status,
                body: "{}".to_string(),
            }
        }
    }

    #[derive(Default)]
    struct Recorded {
        bodies: Vec<Value>,
        auth: Vec<Option<String>>,
    }

    pub struct StubServer {
        addr: SocketAddr,
        shutdown: Arc<AtomicBool>,
        recorded: Arc<Mutex<Recorded>>,
        handle: Option<JoinHandle<()>>,
    }

    impl StubServer {
        /// Start serving `script` on an ephemeral loopback port. Requests
        /// beyond the script get `200 {}`.
        pub fn start(script: Vec<ScriptedResponse>) -> std::io::Result<StubServer> {
            let listener = TcpListener::bind(("127.0.0.1", 0))?;
            let addr = listener.local_addr()?;
            let shutdown = Arc::new(AtomicBool::new(false));
            let recorded = Arc::new(Mutex::new(Recorded::default()));
            let script = Arc::new(Mutex::new(VecDeque::from(script)));
            let handle = {
                let shutdown = Arc::clone(&shutdown);
                let recorded = Arc::clone(&recorded);
                std::thread::spawn(move || serve(listener, script, recorded, shutdown))
            };
            Ok(StubServer {
                addr,
                shutdown,
                recorded,
                handle: Some(handle),
            })
        }

        /// Base URL suitable for `RemoteConfig::base_url`.
        pub fn url(&self) -> String {
            format!("http://{}", self.addr)
        }

        pub fn request_count(&self) -> usize {
            self.recorded.lock().unwrap().bodies.len()
        }

        /// JSON bodies received so far, in arrival order.
        pub fn recorded_bodies(&self) -> Vec<Value> {
            self.recorded.lock().unwrap().bodies.clone()
        }

        /// `Authorization` header values received so far, in arrival order.
        pub fn recorded_auth(&self) -> Vec<Option<String>> {
            self.recorded.lock().unwrap().auth.clone()
        }
    }

    impl Drop for StubServer {
        fn drop(&mut self) {
            self.shutdown.store(true, Ordering::SeqCst);
            // The accept loop blocks; a throwaway connection wakes it so it
            // can observe the flag and exit.
            let _ = TcpStream::connect(self.addr);
            if let Some(handle) = self.handle.take() {
                let _ = handle.join();
            }
        }
    }

    fn serve(
        listener: TcpListener,
        script: Arc<Mutex<VecDeque<ScriptedResponse>>>,
        recorded: Arc<Mutex<Recorded>>,
        shutdown: Arc<AtomicBool>,
    ) {
        for conn in listener.incoming() {
            if shutdown.load(Ordering::SeqCst) {
                break;
            }
            let Ok(stream) = conn else { continue };
            let _ = handle_connection(stream, &script, &recorded);
        }
    }

    fn handle_connection(
        stream: TcpStream,
        script: &Mutex<VecDeque<ScriptedResponse>>,
        recorded: &Mutex<Recorded>,
    ) -> std::io::Result<()> {
        let mut reader = BufReader::new(&stream);
        let mut line = String::new();
        reader.read_line(&mut line)?; // request line, ignored
        let mut content_length = 0usize;
        let mut auth: Option<String> = None;
        loop {
            let mut header = String::new();
            reader.read_line(&mut header)?;
            let header = header.trim_end();
            if header.is_empty() {
                break;
            }
            if let Some((name, value)) = header.split_once(':') {
                let value = value.trim();
                match name.to_ascii_lowercase().as_str() {
                    "content-length" => content_length = value.parse().unwrap_or(0),
                    "authorization" => auth = Some(value.to_string()),
                    _ => {}
                }
            }
        }
        let mut body = vec![0u8; content_length];
        reader.read_exact(&mut body)?;
        let value = serde_json::from_slice(&body).unwrap_or(Value::Null);
        {
            let mut rec = recorded.lock().unwrap();
            rec.bodies.push(value);
            rec.auth.push(auth);
        }
        let response = script
            .lock()
            .unwrap()
            .pop_front()
            .unwrap_or_else(|| ScriptedResponse::ok("{}"));
        let reason = match response.status {
            200 => "OK",
            400 => "Bad Request",
            404 => "Not Found",
            429 => "Too Many Requests",
            500 => "Internal Server Error",
            503 => "Service Unavailable",
            _ => "Status",
        };
        let mut writer = &stream;
        write!(
            writer,
            "HTTP/1.1 {} {}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
            response.status,
            reason,
            response.body.len(),
            response.body
        )?;
        writer.flush()
    }
}
