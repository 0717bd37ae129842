//! The `/embed` client against an in-process mock server.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use humour_styles::embeddings::{fetch_embeddings, format_embeddings, parse_embeddings, EmbedClient};
use humour_styles::Error;
use serde_json::{json, Value};

type Responder = dyn Fn(usize, &Value) -> (u16, String) + Send + Sync;

struct MockServer {
    url: String,
    calls: Arc<AtomicUsize>,
    bodies: Arc<Mutex<Vec<Value>>>,
}

/// Serves one request per connection; `respond` gets the call number and body.
fn serve(respond: Box<Responder>) -> MockServer {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    let calls = Arc::new(AtomicUsize::new(0));
    let bodies = Arc::new(Mutex::new(Vec::new()));
    let (c, b) = (calls.clone(), bodies.clone());
    thread::spawn(move || {
        for stream in listener.incoming() {
            let Ok(mut stream) = stream else { break };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut length = 0;
            let mut request_line = String::new();
            reader.read_line(&mut request_line).unwrap();
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if line == "\r\n" || line.is_empty() {
                    break;
                }
                if let Some((k, v)) = line.split_once(':') {
                    if k.eq_ignore_ascii_case("content-length") {
                        length = v.trim().parse().unwrap();
                    }
                }
            }
            let mut body = vec![0; length];
            reader.read_exact(&mut body).unwrap();
            let body: Value = serde_json::from_slice(&body).unwrap_or(Value::Null);
            assert!(request_line.starts_with("POST /embed "), "{request_line}");
            let n = c.fetch_add(1, Ordering::SeqCst);
            let (status, reply) = respond(n, &body);
            b.lock().unwrap().push(body);
            let response = format!(
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{reply}",
                reply.len()
            );
            let _ = stream.write_all(response.as_bytes());
        }
    });
    MockServer { url, calls, bodies }
}

/// Deterministic fake embedding: text length and vowel count.
fn fake_vector(text: &str) -> Vec<f64> {
    let vowels = text.chars().filter(|c| "aeiou".contains(*c)).count();
    vec![text.len() as f64, vowels as f64 / 7.0, -0.25]
}

fn echo(_: usize, body: &Value) -> (u16, String) {
    let texts: Vec<&str> = body["texts"].as_array().unwrap().iter().map(|t| t.as_str().unwrap()).collect();
    let vectors: Vec<Vec<f64>> = texts.iter().map(|t| fake_vector(t)).collect();
    (200, json!({"model": body["model"], "dim": 3, "vectors": vectors}).to_string())
}

fn items(texts: &[&str]) -> Vec<(String, String)> {
    texts.iter().enumerate().map(|(i, t)| (format!("id{i}"), t.to_string())).collect()
}

fn fast(url: &str) -> EmbedClient {
    let mut client = EmbedClient::new(url);
    client.initial_backoff = Duration::from_millis(10);
    client
}

#[test]
fn two_texts_give_two_rows() {
    let server = serve(Box::new(echo));
    let m = fetch_embeddings(&fast(&server.url), "mul", &items(&["a joke", "another"])).unwrap();
    assert_eq!((m.len(), m.dim()), (2, 3));
    assert_eq!(m.get("id1").unwrap(), fake_vector("another").as_slice());
    let bodies = server.bodies.lock().unwrap();
    assert_eq!(bodies[0], json!({"model": "mul", "texts": ["a joke", "another"]}));
}

#[test]
fn empty_input_makes_no_request() {
    let server = serve(Box::new(echo));
    let m = fetch_embeddings(&fast(&server.url), "mul", &[]).unwrap();
    assert!(m.is_empty());
    assert_eq!(server.calls.load(Ordering::SeqCst), 0);
}

#[test]
fn batches_preserve_order() {
    let server = serve(Box::new(echo));
    let mut client = fast(&server.url);
    client.batch_size = 2;
    let texts = ["one", "two", "three", "four", "five"];
    let m = fetch_embeddings(&client, "ali", &items(&texts)).unwrap();
    assert_eq!(server.calls.load(Ordering::SeqCst), 3);
    for (i, t) in texts.iter().enumerate() {
        assert_eq!(m.get(&format!("id{i}")).unwrap(), fake_vector(t).as_slice());
    }
}

#[test]
fn short_response_is_count_mismatch() {
    let server = serve(Box::new(|_, _| (200, json!({"model": "m", "dim": 1, "vectors": [[1.0]]}).to_string())));
    let err = fetch_embeddings(&fast(&server.url), "m", &items(&["a", "b"])).unwrap_err();
    assert!(matches!(err, Error::CountMismatch { expected: 2, got: 1 }), "{err:?}");
    assert!(err.to_string().contains("count mismatch"));
}

#[test]
fn service_unavailable_is_retried() {
    let server = serve(Box::new(|n, body| if n < 2 { (503, "{\"error\":\"model not loaded\"}".into()) } else { echo(n, body) }));
    let m = fetch_embeddings(&fast(&server.url), "gte", &items(&["x"])).unwrap();
    assert_eq!(m.len(), 1);
    assert_eq!(server.calls.load(Ordering::SeqCst), 3);
}

#[test]
fn gives_up_after_three_attempts() {
    let server = serve(Box::new(|_, _| (503, "{}".into())));
    let err = fetch_embeddings(&fast(&server.url), "gte", &items(&["x"])).unwrap_err();
    assert!(err.to_string().contains("after 3 attempts"), "{err}");
    assert_eq!(server.calls.load(Ordering::SeqCst), 3);
}

#[test]
fn bad_request_is_not_retried() {
    let server = serve(Box::new(|_, _| (400, "{\"error\":\"bad body\"}".into())));
    let err = fetch_embeddings(&fast(&server.url), "gte", &items(&["x"])).unwrap_err();
    assert!(err.to_string().contains("400"), "{err}");
    assert_eq!(server.calls.load(Ordering::SeqCst), 1);
}

#[test]
fn unreachable_service() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    drop(listener);
    let err = fetch_embeddings(&fast(&url), "gte", &items(&["x"])).unwrap_err();
    assert!(matches!(err, Error::Http(_)), "{err:?}");
}

#[test]
fn http_and_file_agree() {
    let server = serve(Box::new(echo));
    let texts = ["Why did the chicken cross?", "I'm terrible at jokes", "Nice weather today"];
    let fetched = fetch_embeddings(&fast(&server.url), "mul", &items(&texts)).unwrap();
    let from_file = parse_embeddings(Path::new("mem"), &format_embeddings(&fetched)).unwrap();
    for ((id, a), (id_b, b)) in fetched.iter().zip(from_file.iter()) {
        assert_eq!(id, id_b);
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= 1e-6);
        }
    }
}
