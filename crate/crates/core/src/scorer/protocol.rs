//! Newline-delimited JSON scorer protocol.
//!
//! ```text
//! -> {"op":"hello"}
//! <- {"vocab":["<s>","</s>",...],"bos":0,"eos":1}
//! -> {"op":"score","source":[5,9],"prefix":[7]}
//! <- {"logprobs":[-3.2,...]}          (one entry per vocabulary token)
//! <- {"error":"message"}              (on any failure)
//! ```
//!
//! The transport is any bidirectional byte stream; TCP and child-process
//! stdio are provided. Each connection handles one request at a time.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::io::{self, BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::process::{Child, Command, Stdio};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use super::{check_distribution, Scorer, ScorerError, TokenId, Vocabulary};

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
enum Request {
    Hello,
    Score {
        source: Vec<TokenId>,
        prefix: Vec<TokenId>,
    },
}

#[derive(Debug, Serialize)]
struct HelloReply<'a> {
    vocab: &'a [String],
    bos: TokenId,
    eos: TokenId,
}

#[derive(Debug, Serialize)]
struct ScoreReply {
    logprobs: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct ErrorReply {
    error: String,
}

fn reply_for<S: Scorer + ?Sized>(scorer: &S, line: &str) -> String {
    let vocab = scorer.vocab();
    let request: Request = match serde_json::from_str(line) {
        Ok(r) => r,
        Err(e) => return error_line(format!("bad request: {e}")),
    };
    match request {
        Request::Hello => serde_json::to_string(&HelloReply {
            vocab: vocab.tokens(),
            bos: vocab.bos(),
            eos: vocab.eos(),
        })
        .expect("hello serializes"),
        Request::Score { source, prefix } => {
            let n = vocab.len() as TokenId;
            if let Some(bad) = source.iter().chain(&prefix).find(|&&t| t >= n) {
                return error_line(format!("token id {bad} outside vocabulary of {n}"));
            }
            match scorer.score_next(&source, &prefix) {
                Ok(logprobs) => {
                    serde_json::to_string(&ScoreReply { logprobs }).expect("reply serializes")
                }
                Err(e) => error_line(e.to_string()),
            }
        }
    }
}

fn error_line(error: String) -> String {
    serde_json::to_string(&ErrorReply { error }).expect("error serializes")
}

/// Serves requests from `reader` until end of stream.
pub fn serve_connection<S, R, W>(scorer: &S, reader: R, mut writer: W) -> io::Result<()>
where
    S: Scorer + ?Sized,
    R: BufRead,
    W: Write,
{
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut reply = reply_for(scorer, &line);
        reply.push('\n');
        writer.write_all(reply.as_bytes())?;
        writer.flush()?;
    }
    Ok(())
}

/// TCP server running the protocol on a background accept thread, one thread
/// per connection. Stops accepting when dropped.
pub struct ScorerServer {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

impl ScorerServer {
    pub fn bind(addr: impl ToSocketAddrs, scorer: Arc<dyn Scorer>) -> io::Result<Self> {
        let listener = TcpListener::bind(addr)?;
        let addr = listener.local_addr()?;
        let stop = Arc::new(AtomicBool::new(false));
        let flag = stop.clone();
        let handle = std::thread::spawn(move || {
            for stream in listener.incoming() {
                if flag.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(stream) = stream else { continue };
                let _ = stream.set_nodelay(true);
                let scorer = scorer.clone();
                std::thread::spawn(move || {
                    let Ok(read_half) = stream.try_clone() else {
                        return;
                    };
                    if let Err(e) = serve_connection(&*scorer, BufReader::new(read_half), stream) {
                        log::debug!("scorer connection closed: {e}");
                    }
                });
            }
        });
        Ok(Self {
            addr,
            stop,
            handle: Some(handle),
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    /// Blocks until the accept loop exits.
    pub fn join(mut self) {
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

impl Drop for ScorerServer {
    fn drop(&mut self) {
        if let Some(h) = self.handle.take() {
            self.stop.store(true, Ordering::SeqCst);
            // wake the blocking accept
            let _ = TcpStream::connect(self.addr);
            let _ = h.join();
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConnectOptions {
    /// Number of parallel connections (TCP only).
    pub pool_size: usize,
    pub timeout: Option<Duration>,
    /// When set, the handshake vocabulary must equal this one.
    pub expected_vocab: Option<Vocabulary>,
}

impl Default for ConnectOptions {
    fn default() -> Self {
        Self {
            pool_size: 1,
            timeout: Some(Duration::from_secs(30)),
            expected_vocab: None,
        }
    }
}

struct Connection {
    reader: Box<dyn BufRead + Send>,
    writer: Box<dyn Write + Send>,
    _child: Option<Child>,
}

impl Connection {
    fn call(&mut self, request: &Request) -> Result<Value, ScorerError> {
        let mut line = serde_json::to_string(request).expect("request serializes");
        line.push('\n');
        self.writer.write_all(line.as_bytes()).map_err(io_err)?;
        self.writer.flush().map_err(io_err)?;
        let mut reply = String::new();
        let n = self.reader.read_line(&mut reply).map_err(io_err)?;
        if n == 0 {
            return Err(ScorerError::Io("scorer closed the connection".into()));
        }
        let value: Value =
            serde_json::from_str(&reply).map_err(|e| ScorerError::Malformed(e.to_string()))?;
        if let Some(msg) = value.get("error") {
            return Err(ScorerError::Remote(
                msg.as_str()
                    .map(str::to_string)
                    .unwrap_or_else(|| msg.to_string()),
            ));
        }
        Ok(value)
    }

    fn hello(&mut self) -> Result<Vocabulary, ScorerError> {
        #[derive(Deserialize)]
        struct Hello {
            vocab: Vec<String>,
            bos: TokenId,
            eos: TokenId,
        }
        let value = self.call(&Request::Hello)?;
        let h: Hello = serde_json::from_value(value)
            .map_err(|e| ScorerError::Malformed(format!("hello: {e}")))?;
        Vocabulary::from_parts(h.vocab, h.bos, h.eos)
    }
}

fn io_err(e: io::Error) -> ScorerError {
    match e.kind() {
        io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut => ScorerError::Timeout,
        _ => ScorerError::Io(e.to_string()),
    }
}

/// Client side of the protocol; implements [`Scorer`] by forwarding queries.
pub struct ExternalScorer {
    vocab: Vocabulary,
    conns: Vec<Mutex<Connection>>,
    next: AtomicUsize,
}

impl ExternalScorer {
    pub fn connect(addr: impl ToSocketAddrs, opts: ConnectOptions) -> Result<Self, ScorerError> {
        let addrs: Vec<SocketAddr> = addr.to_socket_addrs().map_err(io_err)?.collect();
        let mut conns = Vec::new();
        for _ in 0..opts.pool_size.max(1) {
            let stream = TcpStream::connect(&addrs[..]).map_err(io_err)?;
            stream.set_read_timeout(opts.timeout).map_err(io_err)?;
            stream.set_nodelay(true).map_err(io_err)?;
            let reader = BufReader::new(stream.try_clone().map_err(io_err)?);
            conns.push(Connection {
                reader: Box::new(reader),
                writer: Box::new(stream),
                _child: None,
            });
        }
        Self::handshake(conns, &opts)
    }

    /// Launches `command` and speaks the protocol over its stdin/stdout.
    /// Read timeouts are not enforced on this transport.
    pub fn spawn(command: &mut Command, opts: ConnectOptions) -> Result<Self, ScorerError> {
        let mut child = command
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .map_err(io_err)?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let conn = Connection {
            reader: Box::new(BufReader::new(stdout)),
            writer: Box::new(stdin),
            _child: Some(child),
        };
        Self::handshake(vec![conn], &opts)
    }

    /// Runs the protocol over an arbitrary stream pair.
    pub fn from_stream<R, W>(
        reader: R,
        writer: W,
        opts: ConnectOptions,
    ) -> Result<Self, ScorerError>
    where
        R: BufRead + Send + 'static,
        W: Write + Send + 'static,
    {
        let conn = Connection {
            reader: Box::new(reader),
            writer: Box::new(writer),
            _child: None,
        };
        Self::handshake(vec![conn], &opts)
    }

    fn handshake(mut conns: Vec<Connection>, opts: &ConnectOptions) -> Result<Self, ScorerError> {
        let vocab = conns[0].hello()?;
        for c in conns.iter_mut().skip(1) {
            if c.hello()? != vocab {
                return Err(ScorerError::VocabMismatch(
                    "pooled connections disagree on the vocabulary".into(),
                ));
            }
        }
        if let Some(expected) = &opts.expected_vocab {
            if *expected != vocab {
                return Err(ScorerError::VocabMismatch(format!(
                    "server vocabulary has {} entries, expected {}",
                    vocab.len(),
                    expected.len()
                )));
            }
        }
        Ok(Self {
            vocab,
            conns: conns.into_iter().map(Mutex::new).collect(),
            next: AtomicUsize::new(0),
        })
    }
}

impl Scorer for ExternalScorer {
    fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    fn score_next(&self, source: &[TokenId], prefix: &[TokenId]) -> Result<Vec<f64>, ScorerError> {
        #[derive(Deserialize)]
        struct Score {
            logprobs: Vec<f64>,
        }
        let slot = self.next.fetch_add(1, Ordering::Relaxed) % self.conns.len();
        let mut conn = self.conns[slot]
            .lock()
            .map_err(|_| ScorerError::Io("connection poisoned".into()))?;
        let value = conn.call(&Request::Score {
            source: source.to_vec(),
            prefix: prefix.to_vec(),
        })?;
        let reply: Score = serde_json::from_value(value)
            .map_err(|e| ScorerError::Malformed(format!("score: {e}")))?;
        check_distribution(&reply.logprobs, self.vocab.len())?;
        Ok(reply.logprobs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scorer::{train_ngram_lm, ScriptedScorer};
    use crate::tokens::tokenize;
    use std::io::Cursor;

    fn lm() -> crate::scorer::NGramLM {
        train_ngram_lm(&[tokenize("a b c ."), tokenize("c a b")], 2, 0.1).unwrap()
    }

    #[test]
    fn loopback_is_bit_identical() {
        let local = lm();
        let server = ScorerServer::bind("127.0.0.1:0", Arc::new(local.clone())).unwrap();
        let remote = ExternalScorer::connect(
            server.local_addr(),
            ConnectOptions {
                pool_size: 2,
                expected_vocab: Some(local.vocab().clone()),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(remote.vocab(), local.vocab());
        for pre in ["", "a", "a b", "c . ."] {
            let p = local.vocab().encode(&tokenize(pre));
            let a = local.score_next(&[3], &p).unwrap();
            let b = remote.score_next(&[3], &p).unwrap();
            assert_eq!(
                a.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
                b.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
            );
        }
    }

    // Replies from a canned transcript: hello reply, then the given score reply.
    fn canned(score_reply: &str) -> Result<f64, ScorerError> {
        let vocab = r#"{"vocab":["<s>","</s>","x"],"bos":0,"eos":1}"#;
        let transcript = format!("{vocab}\n{score_reply}\n");
        let client = ExternalScorer::from_stream(
            Cursor::new(transcript.into_bytes()),
            io::sink(),
            ConnectOptions::default(),
        )?;
        client.score_next(&[], &[]).map(|v| v[2])
    }

    #[test]
    fn non_normalized_reply() {
        assert!(matches!(
            canned(r#"{"logprobs":[-1.0,-1.0,-1.0]}"#),
            Err(ScorerError::Normalization { .. })
        ));
    }

    #[test]
    fn wrong_length_reply() {
        assert!(matches!(
            canned(r#"{"logprobs":[0.0]}"#),
            Err(ScorerError::VocabMismatch(_))
        ));
    }

    #[test]
    fn malformed_and_remote_errors() {
        assert!(matches!(canned("not json"), Err(ScorerError::Malformed(_))));
        assert!(matches!(
            canned(r#"{"logits":[]}"#),
            Err(ScorerError::Malformed(_))
        ));
        assert_eq!(
            canned(r#"{"error":"boom"}"#),
            Err(ScorerError::Remote("boom".into()))
        );
        let ok = canned(&format!(
            r#"{{"logprobs":[{},{},{}]}}"#,
            (0.25f64).ln(),
            (0.25f64).ln(),
            (0.5f64).ln()
        ))
        .unwrap();
        assert_eq!(ok, (0.5f64).ln());
    }

    #[test]
    fn expected_vocab_mismatch() {
        let server = ScorerServer::bind("127.0.0.1:0", Arc::new(lm())).unwrap();
        let err = ExternalScorer::connect(
            server.local_addr(),
            ConnectOptions {
                expected_vocab: Some(Vocabulary::new(["zzz"])),
                ..Default::default()
            },
        )
        .err()
        .unwrap();
        assert!(matches!(err, ScorerError::VocabMismatch(_)));
    }

    #[test]
    fn timeout_is_typed() {
        // a listener that accepts but never answers
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let _hold = std::thread::spawn(move || {
            let (_s, _) = listener.accept().unwrap();
            std::thread::sleep(Duration::from_millis(500));
        });
        let err = ExternalScorer::connect(
            addr,
            ConnectOptions {
                timeout: Some(Duration::from_millis(50)),
                ..Default::default()
            },
        )
        .err()
        .unwrap();
        assert_eq!(err, ScorerError::Timeout);
    }

    #[test]
    fn server_reports_errors_in_band() {
        let mut scripted = ScriptedScorer::new(Vocabulary::new(["x"]));
        scripted.step(&[], &[("x", 0.5)]).unwrap();
        let mut out = Vec::new();
        let input = "{\"op\":\"score\",\"source\":[],\"prefix\":[3]}\n{\"op\":\"score\",\"source\":[],\"prefix\":[99]}\n{\"op\":\"nope\"}\n";
        serve_connection(&scripted, Cursor::new(input), &mut out).unwrap();
        let lines: Vec<Value> = String::from_utf8(out)
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect();
        assert_eq!(lines.len(), 3);
        assert!(lines.iter().all(|v| v.get("error").is_some()));
    }
}
