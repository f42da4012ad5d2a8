//! Line-delimited JSON server exposing the environment to external clients.
//!
//! Each request is one JSON object per line with an `op` field:
//!
//! ```text
//! {"op":"spec","protocol_version":1}
//! {"op":"reset","seed":7}
//! {"op":"reset","seed":7,"config":{"persona":"Conservative"}}
//! {"op":"step","action":2}
//! {"op":"close"}
//! ```
//!
//! Every request gets exactly one response line. Failures are reported as
//! `{"ok":false,"error":{"code":...,"message":...}}` and leave the session
//! as it was.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::net::{TcpListener, TcpStream};

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::env::{Action, EedEnv, EnvConfig, N_ACTIONS, OBS_DIM};
use crate::error::{Error, Result};

pub const BRIDGE_PROTOCOL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorCode {
    BadJson,
    BadOp,
    BadAction,
    BadConfig,
    NoEpisode,
    EpisodeDone,
    VersionMismatch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BridgeError {
    pub code: ErrorCode,
    pub message: String,
}

impl BridgeError {
    fn new(code: ErrorCode, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    fn to_value(&self) -> Value {
        json!({"ok": false, "error": {"code": self.code, "message": self.message}})
    }
}

/// One client's state: the default config and the current environment.
#[derive(Debug)]
pub struct BridgeSession {
    default_config: EnvConfig,
    env: Option<EedEnv>,
    closed: bool,
}

impl BridgeSession {
    pub fn new(default_config: EnvConfig) -> Result<Self> {
        default_config.validate()?;
        Ok(Self {
            default_config,
            env: None,
            closed: false,
        })
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Handles one request line and returns the response line (without the
    /// trailing newline).
    pub fn handle_line(&mut self, line: &str) -> String {
        let value = match self.dispatch(line) {
            Ok(v) => v,
            Err(e) => e.to_value(),
        };
        serde_json::to_string(&value).expect("response serializes")
    }

    fn dispatch(&mut self, line: &str) -> std::result::Result<Value, BridgeError> {
        let req: Value = serde_json::from_str(line.trim())
            .map_err(|e| BridgeError::new(ErrorCode::BadJson, format!("invalid JSON: {e}")))?;
        let obj = req
            .as_object()
            .ok_or_else(|| BridgeError::new(ErrorCode::BadJson, "request must be a JSON object"))?;
        if let Some(v) = obj.get("protocol_version") {
            if v.as_u64() != Some(BRIDGE_PROTOCOL_VERSION as u64) {
                return Err(BridgeError::new(
                    ErrorCode::VersionMismatch,
                    format!("server speaks protocol_version {BRIDGE_PROTOCOL_VERSION}, got {v}"),
                ));
            }
        }
        let op = obj
            .get("op")
            .and_then(Value::as_str)
            .ok_or_else(|| BridgeError::new(ErrorCode::BadOp, "missing string field \"op\""))?;
        match op {
            "spec" => self.spec(),
            "reset" => self.reset(obj),
            "step" => self.step(obj),
            "close" => {
                self.env = None;
                self.closed = true;
                Ok(json!({"ok": true, "closed": true}))
            }
            other => Err(BridgeError::new(
                ErrorCode::BadOp,
                format!("unknown op {other:?}; expected spec, reset, step or close"),
            )),
        }
    }

    fn spec(&self) -> std::result::Result<Value, BridgeError> {
        let config = self.env.as_ref().map_or(&self.default_config, |e| e.config());
        Ok(json!({
            "ok": true,
            "protocol_version": BRIDGE_PROTOCOL_VERSION,
            "obs_len": OBS_DIM,
            "n_actions": N_ACTIONS,
            "config": config,
        }))
    }

    fn reset(&mut self, obj: &Map<String, Value>) -> std::result::Result<Value, BridgeError> {
        let seed = match obj.get("seed") {
            None | Some(Value::Null) => None,
            Some(v) => Some(
                v.as_u64()
                    .ok_or_else(|| BridgeError::new(ErrorCode::BadJson, "seed must be a non-negative integer"))?,
            ),
        };
        let mut env = match obj.get("config") {
            Some(cfg) if !cfg.is_null() => {
                let cfg: EnvConfig = serde_json::from_value(cfg.clone())
                    .map_err(|e| BridgeError::new(ErrorCode::BadConfig, e.to_string()))?;
                EedEnv::new(cfg).map_err(|e| BridgeError::new(ErrorCode::BadConfig, e.to_string()))?
            }
            _ => match self.env.take() {
                Some(env) => env,
                None => EedEnv::new(self.default_config.clone())
                    .map_err(|e| BridgeError::new(ErrorCode::BadConfig, e.to_string()))?,
            },
        };
        let seed = seed.unwrap_or(env.config().seed);
        let (obs, info) = env.reset(seed);
        self.env = Some(env);
        Ok(json!({"ok": true, "obs": obs.to_array(), "info": info}))
    }

    fn step(&mut self, obj: &Map<String, Value>) -> std::result::Result<Value, BridgeError> {
        let code = obj
            .get("action")
            .and_then(Value::as_i64)
            .ok_or_else(|| BridgeError::new(ErrorCode::BadAction, "action must be an integer 0-6"))?;
        let action = Action::from_code(code).map_err(|e| BridgeError::new(ErrorCode::BadAction, e.to_string()))?;
        let env = self
            .env
            .as_mut()
            .ok_or_else(|| BridgeError::new(ErrorCode::NoEpisode, "call reset before step"))?;
        if env.is_done() {
            return Err(BridgeError::new(ErrorCode::EpisodeDone, "episode finished; call reset"));
        }
        let res = env.step(action).map_err(|e| match e {
            Error::MaskedAction(_) => BridgeError::new(ErrorCode::BadAction, e.to_string()),
            other => BridgeError::new(ErrorCode::EpisodeDone, other.to_string()),
        })?;
        Ok(json!({
            "ok": true,
            "obs": res.observation.to_array(),
            "reward": res.reward,
            "cost": res.cost,
            "terminated": res.terminated,
            "truncated": res.truncated,
            "info": res.info,
        }))
    }
}

/// Runs one session until `close` or end of input. A dropped transport
/// discards the environment.
pub fn serve_session<R: BufRead, W: Write>(mut reader: R, mut writer: W, default_config: &EnvConfig) -> Result<()> {
    let mut session = BridgeSession::new(default_config.clone())?;
    let mut buf = Vec::new();
    loop {
        buf.clear();
        if reader.read_until(b'\n', &mut buf).map_err(transport)? == 0 {
            break;
        }
        let resp = match std::str::from_utf8(&buf) {
            Ok(line) if line.trim().is_empty() => continue,
            Ok(line) => session.handle_line(line),
            Err(_) => BridgeError::new(ErrorCode::BadJson, "request is not valid UTF-8")
                .to_value()
                .to_string(),
        };
        writeln!(writer, "{resp}").map_err(transport)?;
        writer.flush().map_err(transport)?;
        if session.is_closed() {
            break;
        }
    }
    Ok(())
}

fn transport(e: std::io::Error) -> Error {
    Error::Io {
        path: "<bridge transport>".into(),
        source: e,
    }
}

pub fn serve_stdio(default_config: &EnvConfig) -> Result<()> {
    let stdin = std::io::stdin();
    let stdout = std::io::stdout();
    serve_session(stdin.lock(), BufWriter::new(stdout.lock()), default_config)
}

/// Accepts connections forever, one thread and one environment per client.
pub fn serve_tcp(listener: TcpListener, default_config: &EnvConfig) -> Result<()> {
    default_config.validate()?;
    for stream in listener.incoming() {
        let stream = match stream {
            Ok(s) => s,
            Err(e) => {
                log::warn!("accept failed: {e}");
                continue;
            }
        };
        let cfg = default_config.clone();
        std::thread::spawn(move || {
            let peer = stream.peer_addr().map(|a| a.to_string()).unwrap_or_default();
            if let Err(e) = handle_stream(stream, &cfg) {
                log::info!("session {peer} ended: {e}");
            }
        });
    }
    Ok(())
}

fn handle_stream(stream: TcpStream, cfg: &EnvConfig) -> Result<()> {
    let reader = BufReader::new(stream.try_clone().map_err(transport)?);
    serve_session(reader, BufWriter::new(stream), cfg)
}
