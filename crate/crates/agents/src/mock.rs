//! A local chat-completion server for tests and offline runs.
//!
//! It speaks just enough HTTP/1.1 for one request per connection and answers
//! from a [`MockMode`]. In auto-player mode it reads the action list out of
//! game prompts and picks an entry, and returns fixed labels for
//! classification prompts.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use serde_json::{json, Value};

/// Text that a deception classification prompt always contains.
pub const DECEPTION_PROMPT_MARKER: &str = "Only output one word per entry.";
/// Text that a speech-act classification prompt always contains.
pub const SPEECH_ACT_PROMPT_MARKER: &str = "Only output one word.";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MockReply {
    pub status: u16,
    pub content: String,
}

impl MockReply {
    pub fn ok(content: impl Into<String>) -> Self {
        MockReply {
            status: 200,
            content: content.into(),
        }
    }

    pub fn status(status: u16) -> Self {
        MockReply {
            status,
            content: String::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MockMode {
    /// Every request gets this completion.
    Fixed(String),
    /// Replies are served in order; the last one repeats.
    Scripted(Vec<MockReply>),
    /// Plays the game from the prompt. Every `malformed_every`-th game reply
    /// (when non-zero) is text without an action section.
    AutoPlayer { malformed_every: usize },
}

#[derive(Debug, Default)]
struct State {
    requests: Vec<Value>,
    served: usize,
    game_replies: usize,
}

pub struct MockChatServer {
    addr: SocketAddr,
    state: Arc<Mutex<State>>,
    stop: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

impl MockChatServer {
    /// Binds to an ephemeral port on localhost and starts serving.
    pub fn start(mode: MockMode) -> std::io::Result<Self> {
        let listener = TcpListener::bind("127.0.0.1:0")?;
        let addr = listener.local_addr()?;
        let state = Arc::new(Mutex::new(State::default()));
        let stop = Arc::new(AtomicBool::new(false));
        let handle = {
            let state = state.clone();
            let stop = stop.clone();
            let mode = Arc::new(mode);
            std::thread::spawn(move || {
                for stream in listener.incoming() {
                    if stop.load(Ordering::SeqCst) {
                        break;
                    }
                    let Ok(stream) = stream else { continue };
                    let state = state.clone();
                    let mode = mode.clone();
                    std::thread::spawn(move || {
                        let _ = handle_connection(stream, &mode, &state);
                    });
                }
            })
        };
        Ok(MockChatServer {
            addr,
            state,
            stop,
            handle: Some(handle),
        })
    }

    /// Base URL to put in a `ChatEndpointConfig`.
    pub fn base_url(&self) -> String {
        format!("http://{}/v1", self.addr)
    }

    /// Number of requests answered so far.
    pub fn request_count(&self) -> usize {
        self.state.lock().map(|s| s.served).unwrap_or(0)
    }

    /// JSON bodies of every request received, in arrival order.
    pub fn requests(&self) -> Vec<Value> {
        self.state.lock().map(|s| s.requests.clone()).unwrap_or_default()
    }
}

impl Drop for MockChatServer {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        let _ = TcpStream::connect(self.addr);
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

fn handle_connection(stream: TcpStream, mode: &MockMode, state: &Mutex<State>) -> std::io::Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut request_line = String::new();
    reader.read_line(&mut request_line)?;
    if request_line.is_empty() {
        return Ok(());
    }
    let mut content_length = 0usize;
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line)? == 0 || line == "\r\n" || line == "\n" {
            break;
        }
        if let Some((k, v)) = line.split_once(':') {
            if k.trim().eq_ignore_ascii_case("content-length") {
                content_length = v.trim().parse().unwrap_or(0);
            }
        }
    }
    let mut body = vec![0u8; content_length];
    reader.read_exact(&mut body)?;
    let request: Value = serde_json::from_slice(&body).unwrap_or(Value::Null);

    let reply = {
        let mut s = state.lock().expect("mock state poisoned");
        let index = s.served;
        s.served += 1;
        s.requests.push(request.clone());
        match mode {
            MockMode::Fixed(text) => MockReply::ok(text.clone()),
            MockMode::Scripted(replies) => replies
                .get(index)
                .or(replies.last())
                .cloned()
                .unwrap_or_else(|| MockReply::status(500)),
            MockMode::AutoPlayer { malformed_every } => {
                let user = last_user_message(&request);
                if let Some(label) = classification_reply(&user) {
                    MockReply::ok(label)
                } else {
                    s.game_replies += 1;
                    let n = s.game_replies;
                    if *malformed_every > 0 && n.is_multiple_of(*malformed_every) {
                        MockReply::ok("I am not sure what to do here.")
                    } else {
                        MockReply::ok(auto_play(&user, n))
                    }
                }
            }
        }
    };

    let payload = if reply.status == 200 {
        json!({
            "id": "mock",
            "object": "chat.completion",
            "choices": [{"index": 0, "message": {"role": "assistant", "content": reply.content}, "finish_reason": "stop"}],
        })
        .to_string()
    } else {
        json!({"error": {"message": "mock failure"}}).to_string()
    };
    let mut out = stream;
    write!(
        out,
        "HTTP/1.1 {} MOCK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
        reply.status,
        payload.len(),
        payload
    )?;
    out.flush()
}

fn last_user_message(request: &Value) -> String {
    request["messages"]
        .as_array()
        .and_then(|m| m.iter().rev().find(|m| m["role"] == "user"))
        .and_then(|m| m["content"].as_str())
        .unwrap_or("")
        .to_string()
}

fn classification_reply(prompt: &str) -> Option<&'static str> {
    if prompt.contains(DECEPTION_PROMPT_MARKER) {
        Some("Equivocation")
    } else if prompt.contains(SPEECH_ACT_PROMPT_MARKER) {
        Some("Directives")
    } else {
        None
    }
}

fn field<'a>(prompt: &'a str, prefix: &str) -> Option<&'a str> {
    prompt
        .lines()
        .find_map(|l| l.strip_prefix(prefix))
        .map(|s| s.trim().trim_end_matches('.'))
}

/// Picks an action from the prompt's list: speak, do a task, report, kill,
/// then move, cycling through options with the reply counter.
fn auto_play(prompt: &str, n: usize) -> String {
    let options: Vec<&str> = prompt
        .lines()
        .skip_while(|l| !l.starts_with("Available actions"))
        .skip(1)
        .take_while(|l| l.starts_with("- "))
        .map(|l| &l[2..])
        .collect();
    let me = field(prompt, "You are ")
        .and_then(|s| s.split('.').next())
        .unwrap_or("");
    let room = field(prompt, "Current room: ").unwrap_or("somewhere");
    let others: Vec<&str> = field(prompt, "Alive players: ")
        .map(|s| s.split(", ").filter(|n| *n != me).collect())
        .unwrap_or_default();
    let pick = |prefix: &str| options.iter().filter(|o| o.starts_with(prefix)).copied().collect::<Vec<_>>();

    let action = if !pick("Speak").is_empty() {
        match others.get(n % others.len().max(1)) {
            Some(name) => format!("Speak: I was in {room}. I think {name} is acting strange."),
            None => format!("Speak: I was in {room}."),
        }
    } else if !pick("Vote").is_empty() {
        let votes = pick("Vote");
        votes[n % votes.len()].to_string()
    } else if let Some(a) = ["Complete task", "Report body", "Kill"]
        .iter()
        .find_map(|p| pick(p).first().copied())
    {
        a.to_string()
    } else if !pick("Move").is_empty() {
        let moves = pick("Move");
        moves[n % moves.len()].to_string()
    } else {
        options.first().copied().unwrap_or("").to_string()
    };
    format!("[Condensed Memory] I am in {room}.\n[Thinking Process] Keep the game moving.\n[Action] {action}")
}
