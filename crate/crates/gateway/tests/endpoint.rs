use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use emotune::emotion::{psychological_priors, StochasticMatrix};
use emotune::negotiation::{DebtorProfile, EpisodeConfig, NegotiationEngine, TerminalState};
use emotune::scenarios::generate_cases;
use emotune_gateway::{ChatClient, ChatError, ChatMessage, EndpointConfig, ExaminerMode, RemoteAgents};
use serde_json::{json, Value};

/// What the stub does with one request.
enum Canned {
    Reply { status: u16, body: String },
    Hang(Duration),
}

/// Minimal HTTP/1.1 server answering every request through `handler`.
struct Stub {
    url: String,
    hits: Arc<AtomicUsize>,
    requests: Arc<Mutex<Vec<Value>>>,
}

impl Stub {
    fn start(handler: impl Fn(&Value, usize) -> Canned + Send + Sync + 'static) -> Self {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}/v1", listener.local_addr().unwrap());
        let hits = Arc::new(AtomicUsize::new(0));
        let requests = Arc::new(Mutex::new(Vec::new()));
        let handler = Arc::new(handler);
        let (h, r) = (hits.clone(), requests.clone());
        thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(stream) = stream else { break };
                let n = h.fetch_add(1, Ordering::SeqCst);
                let (handler, r) = (handler.clone(), r.clone());
                thread::spawn(move || serve(stream, n, &*handler, &r));
            }
        });
        Self { url, hits, requests }
    }

    fn hits(&self) -> usize {
        self.hits.load(Ordering::SeqCst)
    }
}

fn serve(stream: TcpStream, n: usize, handler: &dyn Fn(&Value, usize) -> Canned, log: &Mutex<Vec<Value>>) {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut length = 0;
    let mut auth = String::new();
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line).unwrap_or(0) == 0 {
            return;
        }
        let line = line.trim_end();
        if line.is_empty() {
            break;
        }
        let lower = line.to_ascii_lowercase();
        if let Some(v) = lower.strip_prefix("content-length:") {
            length = v.trim().parse().unwrap();
        }
        if lower.starts_with("authorization:") {
            auth = line["authorization:".len()..].trim().to_string();
        }
    }
    let mut body = vec![0; length];
    reader.read_exact(&mut body).unwrap();
    let mut request: Value = serde_json::from_slice(&body).unwrap();
    request["_auth"] = json!(auth);
    log.lock().unwrap().push(request.clone());
    let mut stream = stream;
    match handler(&request, n) {
        Canned::Hang(d) => thread::sleep(d),
        Canned::Reply { status, body } => {
            let head = format!(
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n",
                body.len()
            );
            let _ = stream.write_all(head.as_bytes());
            let _ = stream.write_all(body.as_bytes());
        }
    }
}

fn completion(content: &str) -> Canned {
    let body = json!({
        "choices": [{"message": {"role": "assistant", "content": content}, "finish_reason": "stop"}],
        "usage": {"prompt_tokens": 10, "completion_tokens": 5, "total_tokens": 15}
    });
    Canned::Reply { status: 200, body: body.to_string() }
}

fn config(url: &str) -> EndpointConfig {
    EndpointConfig {
        base_url: url.to_string(),
        model: "stub-model".into(),
        initial_backoff_ms: 10,
        ..Default::default()
    }
}

fn client(url: &str) -> ChatClient {
    ChatClient::new(config(url), "test-key".into()).unwrap()
}

fn hello(c: &ChatClient) -> Result<emotune_gateway::ChatResponse, ChatError> {
    c.chat(&c.request(vec![ChatMessage::user("hello")], 0.7))
}

#[test]
fn canned_reply_comes_back_verbatim() {
    let stub = Stub::start(|_, _| completion("We can do 45 days.\nOFFER_DAYS: 45"));
    let response = hello(&client(&stub.url)).unwrap();
    assert_eq!(response.content, "We can do 45 days.\nOFFER_DAYS: 45");
    assert_eq!(response.finish_reason.as_deref(), Some("stop"));
    assert_eq!(response.usage.total_tokens, 15);

    let sent = &stub.requests.lock().unwrap()[0];
    assert_eq!(sent["model"], "stub-model");
    assert_eq!(sent["messages"][0], json!({"role": "user", "content": "hello"}));
    assert_eq!(sent["temperature"], 0.7);
    assert_eq!(sent["_auth"], "Bearer test-key");
}

#[test]
fn server_errors_are_retried_then_surface_with_the_status() {
    let stub = Stub::start(|_, _| Canned::Reply { status: 500, body: "boom".into() });
    match hello(&client(&stub.url)) {
        Err(ChatError::Status { status: 500, attempts: 3, body }) => assert_eq!(body, "boom"),
        other => panic!("expected a status error, got {other:?}"),
    }
    assert_eq!(stub.hits(), 3);
}

#[test]
fn a_transient_failure_recovers_on_retry() {
    let stub =
        Stub::start(|_, n| if n == 0 { Canned::Reply { status: 503, body: String::new() } } else { completion("ok") });
    assert_eq!(hello(&client(&stub.url)).unwrap().content, "ok");
    assert_eq!(stub.hits(), 2);
}

#[test]
fn client_errors_are_not_retried() {
    let stub = Stub::start(|_, _| Canned::Reply { status: 401, body: "bad key".into() });
    assert!(matches!(hello(&client(&stub.url)), Err(ChatError::Status { status: 401, attempts: 1, .. })));
    assert_eq!(stub.hits(), 1);
}

#[test]
fn missing_credential_fails_before_any_connection() {
    let stub = Stub::start(|_, _| completion("unreachable"));
    let cfg =
        EndpointConfig { credential_env: "EMOTUNE_TEST_CREDENTIAL_THAT_IS_NEVER_SET".into(), ..config(&stub.url) };
    assert!(matches!(ChatClient::from_env(cfg), Err(ChatError::Config(_))));
    thread::sleep(Duration::from_millis(50));
    assert_eq!(stub.hits(), 0);
}

#[test]
fn slow_endpoint_times_out() {
    let stub = Stub::start(|_, _| Canned::Hang(Duration::from_secs(3)));
    let cfg = EndpointConfig { timeout_secs: 0.2, max_attempts: 2, ..config(&stub.url) };
    let c = ChatClient::new(cfg, "k".into()).unwrap();
    let start = Instant::now();
    assert!(matches!(hello(&c), Err(ChatError::Timeout { attempts: 2 })));
    assert!(start.elapsed() < Duration::from_secs(2));
}

#[test]
fn malformed_body_is_its_own_error() {
    let stub = Stub::start(|_, _| Canned::Reply { status: 200, body: "{\"choices\": \"nope\"}".into() });
    assert!(matches!(hello(&client(&stub.url)), Err(ChatError::Malformed(_))));
    assert_eq!(stub.hits(), 1);
}

#[test]
fn invalid_requests_never_reach_the_network() {
    let stub = Stub::start(|_, _| completion("x"));
    let c = client(&stub.url);
    assert!(matches!(c.chat(&c.request(vec![], 0.5)), Err(ChatError::Config(_))));
    assert!(matches!(c.chat(&c.request(vec![ChatMessage::user("x")], 2.5)), Err(ChatError::Config(_))));
    assert_eq!(stub.hits(), 0);
}

#[test]
fn in_flight_calls_respect_the_cap() {
    let active = Arc::new(AtomicUsize::new(0));
    let peak = Arc::new(AtomicUsize::new(0));
    let (a, p) = (active.clone(), peak.clone());
    let stub = Stub::start(move |_, _| {
        let now = a.fetch_add(1, Ordering::SeqCst) + 1;
        p.fetch_max(now, Ordering::SeqCst);
        thread::sleep(Duration::from_millis(60));
        a.fetch_sub(1, Ordering::SeqCst);
        completion("ok")
    });
    let c = Arc::new(ChatClient::new(EndpointConfig { max_in_flight: 2, ..config(&stub.url) }, "k".into()).unwrap());
    let workers: Vec<_> = (0..8)
        .map(|_| {
            let c = c.clone();
            thread::spawn(move || hello(&c).unwrap())
        })
        .collect();
    for w in workers {
        w.join().unwrap();
    }
    assert_eq!(stub.hits(), 8);
    assert!(peak.load(Ordering::SeqCst) <= 2, "peak concurrency {}", peak.load(Ordering::SeqCst));
}

fn prompt_text(request: &Value) -> String {
    request["messages"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["content"].as_str().unwrap())
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn remote_agents_play_a_full_episode() {
    // Creditor holds at the target; the debtor starts high and accepts on the third round.
    let stub = Stub::start(|req, _| {
        let text = prompt_text(req);
        if text.contains("impartial examiner") {
            completion("STATE: active")
        } else if text.contains("collection specialist") {
            completion("Let us settle this.\nOFFER_DAYS: 30")
        } else {
            let rounds = text.matches("| Debtor:").count();
            if rounds >= 2 {
                completion("Fine, I accept 30 days.\nOFFER_DAYS: 30")
            } else {
                completion("That is too fast for us.\nOFFER_DAYS: 90")
            }
        }
    });
    let cfg = EndpointConfig { examiner: ExaminerMode::Remote, ..config(&stub.url) };
    let agents = RemoteAgents::new(Arc::new(ChatClient::new(cfg, "k".into()).unwrap()), 1);
    let engine = NegotiationEngine::new(Arc::new(agents), EpisodeConfig::default(), 7);
    let mut scenario = generate_cases(1, 7).remove(0);
    scenario.target_days = 30;
    let profile = &DebtorProfile::standard_suite()[0];
    let episode = engine.run(&scenario, profile, &psychological_priors(), 7).unwrap();

    assert_eq!(episode.outcome.terminal, TerminalState::Accepted);
    assert_eq!((episode.outcome.n_rounds, episode.outcome.d_final), (3, Some(30)));
    // Two calls per round plus an examiner call for the two active rounds.
    assert_eq!(stub.hits(), 8);

    let requests = stub.requests.lock().unwrap();
    let creditor_temps: Vec<f64> = requests
        .iter()
        .filter(|r| prompt_text(r).contains("collection specialist"))
        .map(|r| r["temperature"].as_f64().unwrap())
        .collect();
    let expected = [0.7, 0.665, 0.63175];
    assert_eq!(creditor_temps.len(), 3);
    assert!(creditor_temps.iter().zip(expected).all(|(t, e)| (t - e).abs() < 1e-12), "{creditor_temps:?}");
}

#[test]
fn endpoint_failures_surface_as_infrastructure_errors() {
    let stub = Stub::start(|_, _| Canned::Reply { status: 502, body: String::new() });
    let agents = RemoteAgents::new(Arc::new(client(&stub.url)), 1);
    let engine = NegotiationEngine::new(Arc::new(agents), EpisodeConfig::default(), 8);
    let scenario = generate_cases(1, 8).remove(0);
    let policy = StochasticMatrix::uniform();
    let err = engine.run(&scenario, &DebtorProfile::standard_suite()[1], &policy, 8).unwrap_err();
    assert!(err.to_string().contains("502"), "{err}");
}

#[test]
fn endpoint_config_reads_json_with_defaults() {
    let cfg =
        EndpointConfig::from_json(r#"{"base_url": "http://localhost:8000/v1", "model": "m", "max_in_flight": 2}"#)
            .unwrap();
    assert_eq!((cfg.max_in_flight, cfg.max_attempts, cfg.timeout_secs), (2, 3, 60.0));
    assert_eq!(cfg.endpoint_url(), "http://localhost:8000/v1/chat/completions");
    assert!(matches!(EndpointConfig::from_json(r#"{"base_url": "ftp://x"}"#), Err(ChatError::Config(_))));
    assert!(matches!(EndpointConfig::from_json(r#"{"max_in_flight": 0}"#), Err(ChatError::Config(_))));
}
