//! Drives the line-delimited JSON bridge in-process: the same requests an
//! external client would send over stdio or TCP.

use eed::bridge::BridgeSession;
use eed::env::EnvConfig;
use serde_json::Value;

fn main() -> eed::Result<()> {
    let mut session = BridgeSession::new(EnvConfig::default())?;
    let mut send = |req: &str| -> Value {
        let resp = session.handle_line(req);
        println!("> {req}\n< {resp}");
        serde_json::from_str(&resp).expect("bridge replies with JSON")
    };

    send(r#"{"op":"spec","protocol_version":1}"#);
    let mut obs = send(r#"{"op":"reset","seed":3,"config":{"persona":"Conservative"}}"#)["obs"].clone();
    for _ in 0..5 {
        let (p_hat, tau) = (obs[0].as_f64().unwrap_or(0.0), obs[1].as_f64().unwrap_or(0.0));
        let action = if p_hat >= tau { 3 } else { 0 };
        obs = send(&format!(r#"{{"op":"step","action":{action}}}"#))["obs"].clone();
    }
    send(r#"{"op":"step","action":9}"#);
    send("not json");
    send(r#"{"op":"close"}"#);
    Ok(())
}
