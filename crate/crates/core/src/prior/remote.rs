//! Client side of the prior wire protocol.
//!
//! Newline-delimited JSON over a byte stream. Each request
//! `{"id": n, "ctx": base64, "hd": base64}` is answered, in order, by
//! `{"id": n, "logp": [[256 numbers]; k]}` with natural-log probabilities.
//! A server may answer `{"id": n, "error": "..."}` instead, and may flag a
//! left-truncated context with `"truncated": true`.

use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::os::unix::net::UnixStream;
use std::path::PathBuf;
use std::process::{Child, Command, Stdio};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use serde::{Deserialize, Serialize};

use super::{PriorBackend, PriorMatrix};
use crate::error::{Error, Result};
use crate::numeric::log_sum_exp;

/// Rows further than this from normalised are renormalised and counted.
pub const NORMALISATION_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PriorRequest {
    pub id: u64,
    pub ctx: String,
    pub hd: String,
}

impl PriorRequest {
    pub fn new(id: u64, ctx: &[u8], hd: &[u8]) -> Self {
        Self { id, ctx: B64.encode(ctx), hd: B64.encode(hd) }
    }

    pub fn decode(&self) -> Result<(Vec<u8>, Vec<u8>)> {
        let dec = |s: &str| B64.decode(s).map_err(|e| Error::Protocol(format!("bad base64: {e}")));
        Ok((dec(&self.ctx)?, dec(&self.hd)?))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PriorResponse {
    pub id: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logp: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncated: Option<bool>,
}

/// Where the prior server lives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endpoint {
    /// `tcp://host:port` or bare `host:port`.
    Tcp(String),
    /// `unix:/path/to/socket`.
    Unix(PathBuf),
    /// `exec:program args...`, speaking the protocol on its stdin/stdout.
    Exec(Vec<String>),
}

impl Endpoint {
    pub fn parse(s: &str) -> Result<Self> {
        if let Some(rest) = s.strip_prefix("tcp://") {
            Ok(Endpoint::Tcp(rest.to_string()))
        } else if let Some(rest) = s.strip_prefix("unix:") {
            Ok(Endpoint::Unix(PathBuf::from(rest)))
        } else if let Some(rest) = s.strip_prefix("exec:") {
            let argv: Vec<String> = rest.split_whitespace().map(String::from).collect();
            if argv.is_empty() {
                return Err(Error::Config("exec endpoint needs a command".into()));
            }
            Ok(Endpoint::Exec(argv))
        } else if s.contains(':') {
            Ok(Endpoint::Tcp(s.to_string()))
        } else {
            Err(Error::Config(format!("cannot parse prior endpoint {s:?}")))
        }
    }
}

struct Connection {
    reader: Box<dyn BufRead + Send>,
    writer: Box<dyn Write + Send>,
    child: Option<Child>,
}

impl Drop for Connection {
    fn drop(&mut self) {
        if let Some(child) = &mut self.child {
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

impl Connection {
    fn open(endpoint: &Endpoint, timeout: Duration) -> Result<Self> {
        match endpoint {
            Endpoint::Tcp(addr) => {
                let s = TcpStream::connect(addr)?;
                s.set_read_timeout(Some(timeout))?;
                s.set_nodelay(true)?;
                Ok(Self { reader: Box::new(BufReader::new(s.try_clone()?)), writer: Box::new(s), child: None })
            }
            Endpoint::Unix(path) => Self::from_unix(UnixStream::connect(path)?, timeout),
            Endpoint::Exec(argv) => {
                let mut child =
                    Command::new(&argv[0]).args(&argv[1..]).stdin(Stdio::piped()).stdout(Stdio::piped()).spawn()?;
                let stdin = child.stdin.take().expect("piped");
                let stdout = child.stdout.take().expect("piped");
                Ok(Self { reader: Box::new(BufReader::new(stdout)), writer: Box::new(stdin), child: Some(child) })
            }
        }
    }

    fn from_unix(s: UnixStream, timeout: Duration) -> Result<Self> {
        s.set_read_timeout(Some(timeout))?;
        Ok(Self { reader: Box::new(BufReader::new(s.try_clone()?)), writer: Box::new(s), child: None })
    }

    fn round_trip(&mut self, req: &PriorRequest) -> Result<PriorResponse> {
        let mut line = serde_json::to_string(req)?;
        line.push('\n');
        self.writer.write_all(line.as_bytes())?;
        self.writer.flush()?;
        let mut buf = String::new();
        if self.reader.read_line(&mut buf)? == 0 {
            return Err(Error::Protocol("server closed the connection".into()));
        }
        serde_json::from_str(buf.trim_end()).map_err(|e| Error::Protocol(format!("malformed response: {e}")))
    }
}

/// Client for an external prior server. Connections are pooled so concurrent
/// workers each hold their own.
pub struct RemotePrior {
    endpoint: Endpoint,
    timeout: Duration,
    pool: Mutex<Vec<Connection>>,
    next_id: AtomicU64,
    renormalised: AtomicU64,
}

impl RemotePrior {
    pub fn new(endpoint: Endpoint, timeout: Duration) -> Self {
        Self { endpoint, timeout, pool: Mutex::new(Vec::new()), next_id: AtomicU64::new(0), renormalised: AtomicU64::new(0) }
    }

    /// Client over an already connected Unix socket (e.g. one end of a socket pair).
    pub fn from_unix_stream(stream: UnixStream, timeout: Duration) -> Result<Self> {
        let conn = Connection::from_unix(stream, timeout)?;
        let client = Self::new(Endpoint::Unix(PathBuf::new()), timeout);
        client.pool.lock().expect("pool poisoned").push(conn);
        Ok(client)
    }

    pub fn endpoint(&self) -> &Endpoint {
        &self.endpoint
    }

    /// Rows that arrived more than [`NORMALISATION_TOLERANCE`] off and were fixed locally.
    pub fn renormalised_rows(&self) -> u64 {
        self.renormalised.load(Ordering::Relaxed)
    }

    fn take_connection(&self) -> Result<Connection> {
        if let Some(c) = self.pool.lock().expect("pool poisoned").pop() {
            return Ok(c);
        }
        Connection::open(&self.endpoint, self.timeout)
    }

    /// Validate a response for `k` rows and convert it to a [`PriorMatrix`].
    pub fn check_response(&self, resp: PriorResponse, id: u64, k: usize) -> Result<PriorMatrix> {
        if resp.id != id {
            return Err(Error::Protocol(format!("response id {} does not match request {id}", resp.id)));
        }
        if let Some(e) = resp.error {
            return Err(Error::Protocol(format!("server error: {e}")));
        }
        let logp = resp.logp.ok_or_else(|| Error::Protocol("response has neither logp nor error".into()))?;
        if logp.len() != k {
            return Err(Error::Protocol(format!("expected {k} rows, got {}", logp.len())));
        }
        let mut rows = Vec::with_capacity(k);
        for r in logp {
            let row: [f64; 256] = r
                .try_into()
                .map_err(|r: Vec<f64>| Error::Protocol(format!("row has {} entries, expected 256", r.len())))?;
            if row.iter().any(|x| !x.is_finite()) {
                return Err(Error::Protocol("non-finite log-probability".into()));
            }
            if log_sum_exp(&row).abs() > NORMALISATION_TOLERANCE {
                self.renormalised.fetch_add(1, Ordering::Relaxed);
            }
            rows.push(row);
        }
        PriorMatrix::from_log_weights(rows)
    }
}

impl PriorBackend for RemotePrior {
    fn query(&self, ctx: &[u8], hd: &[u8]) -> Result<PriorMatrix> {
        let id = self.next_id.fetch_add(1, Ordering::Relaxed);
        let mut conn = self.take_connection()?;
        // A failed exchange leaves the stream in an unknown state; drop it.
        let resp = conn.round_trip(&PriorRequest::new(id, ctx, hd))?;
        let out = self.check_response(resp, id, hd.len());
        self.pool.lock().expect("pool poisoned").push(conn);
        out
    }

    fn name(&self) -> &str {
        "remote"
    }
}

/// Answer protocol requests from `input` with `backend` until EOF.
///
/// Malformed requests get an error response; the id is echoed when it can be recovered.
pub fn serve_stream<B: PriorBackend + ?Sized>(backend: &B, input: impl BufRead, mut output: impl Write) -> Result<u64> {
    let mut served = 0;
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let resp = match serde_json::from_str::<PriorRequest>(&line) {
            Ok(req) => match req.decode().and_then(|(ctx, hd)| backend.query(&ctx, &hd)) {
                Ok(p) => PriorResponse {
                    id: req.id,
                    logp: Some(p.rows().iter().map(|r| r.to_vec()).collect()),
                    error: None,
                    truncated: None,
                },
                Err(e) => PriorResponse { id: req.id, logp: None, error: Some(e.to_string()), truncated: None },
            },
            Err(e) => {
                let id = serde_json::from_str::<serde_json::Value>(&line)
                    .ok()
                    .and_then(|v| v.get("id").and_then(|i| i.as_u64()))
                    .unwrap_or(0);
                PriorResponse { id, logp: None, error: Some(format!("malformed request: {e}")), truncated: None }
            }
        };
        // One write per response; the output is often an unbuffered socket.
        let mut buf = serde_json::to_vec(&resp)?;
        buf.push(b'\n');
        output.write_all(&buf)?;
        output.flush()?;
        served += 1;
    }
    Ok(served)
}
