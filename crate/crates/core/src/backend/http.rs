//! HTTP adapter for real model servers.
//!
//! Speaks a small JSON protocol: `POST /embed`, `POST /nli` and
//! `POST /generate` against an engine-native server, or `POST /api/generate`
//! against an Ollama-compatible one. Connection problems, timeouts and error
//! statuses surface as retryable transport errors; undecodable or invalid
//! payloads are fatal.

use super::{
    BackendConfig, Embedder, GenerateStyle, GeneratedText, Generator, NliScorer, NliScores,
};
use crate::error::{BackendError, BackendResult};
use crate::types::RetrievedSet;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::sync::Arc;
use std::time::Duration;

pub struct HttpBackend {
    client: reqwest::blocking::Client,
    base_url: String,
    dim: usize,
    style: GenerateStyle,
    model: String,
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [String],
}

#[derive(Deserialize)]
struct EmbedResponse {
    embeddings: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct NliRequest<'a> {
    premise: &'a str,
    hypothesis: &'a str,
}

#[derive(Deserialize)]
struct NliResponse {
    entail: f64,
    neutral: f64,
    contradict: f64,
}

#[derive(Serialize)]
struct GenerateRequest<'a> {
    prompt: &'a str,
}

#[derive(Deserialize)]
struct GenerateResponse {
    text: String,
}

#[derive(Serialize)]
struct OllamaRequest<'a> {
    model: &'a str,
    prompt: &'a str,
    stream: bool,
}

#[derive(Deserialize)]
struct OllamaResponse {
    response: String,
}

impl HttpBackend {
    pub fn new(config: &BackendConfig) -> BackendResult<Self> {
        let timeout = Duration::from_secs_f64(config.timeout_s);
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .connect_timeout(timeout)
            .build()
            .map_err(|e| BackendError::Malformed(format!("http client: {e}")))?;
        Ok(Self {
            client,
            base_url: config.base_url.trim_end_matches('/').to_string(),
            dim: config.embedding_dim,
            style: config.generate_style,
            model: config.model.clone(),
        })
    }

    fn post<Req: Serialize, Resp: DeserializeOwned>(
        &self,
        path: &str,
        body: &Req,
    ) -> BackendResult<Resp> {
        let url = format!("{}{}", self.base_url, path);
        let reply = self
            .client
            .post(&url)
            .json(body)
            .send()
            .map_err(|e| BackendError::Transport(format!("POST {path}: {e}")))?;
        let status = reply.status();
        if !status.is_success() {
            return Err(BackendError::Transport(format!(
                "POST {path}: server returned {status}"
            )));
        }
        reply
            .json::<Resp>()
            .map_err(|e| BackendError::Malformed(format!("POST {path}: bad reply: {e}")))
    }
}

impl Embedder for HttpBackend {
    fn embed(&self, texts: &[String]) -> BackendResult<Vec<Vec<f64>>> {
        let reply: EmbedResponse = self.post("/embed", &EmbedRequest { texts })?;
        if reply.embeddings.len() != texts.len() {
            return Err(BackendError::Malformed(format!(
                "embed returned {} vectors for {} texts",
                reply.embeddings.len(),
                texts.len()
            )));
        }
        let mut out = Vec::with_capacity(reply.embeddings.len());
        for mut v in reply.embeddings {
            if v.len() != self.dim {
                return Err(BackendError::Malformed(format!(
                    "embed returned dimension {}, expected {}",
                    v.len(),
                    self.dim
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(BackendError::Malformed(
                    "embed returned a non-finite coordinate".into(),
                ));
            }
            // Servers are not trusted to normalize.
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                for x in &mut v {
                    *x /= norm;
                }
            }
            out.push(v);
        }
        Ok(out)
    }

    fn dim(&self) -> usize {
        self.dim
    }
}

impl NliScorer for HttpBackend {
    fn entail(&self, premise: &str, hypothesis: &str) -> BackendResult<NliScores> {
        let reply: NliResponse = self.post(
            "/nli",
            &NliRequest {
                premise,
                hypothesis,
            },
        )?;
        NliScores::new(reply.entail, reply.neutral, reply.contradict)
    }
}

impl Generator for HttpBackend {
    fn generate(
        &self,
        prompt: &str,
        _retrieved: &RetrievedSet,
        _doc_texts: &HashMap<String, String>,
    ) -> BackendResult<GeneratedText> {
        let text = match self.style {
            GenerateStyle::Engine => {
                let reply: GenerateResponse =
                    self.post("/generate", &GenerateRequest { prompt })?;
                reply.text
            }
            GenerateStyle::Ollama => {
                let reply: OllamaResponse = self.post(
                    "/api/generate",
                    &OllamaRequest {
                        model: &self.model,
                        prompt,
                        stream: false,
                    },
                )?;
                reply.response
            }
        };
        Ok(GeneratedText {
            text,
            ground_truth_hallucinated: None,
        })
    }
}

/// Lets one shared [`HttpBackend`] serve as all three boxed backend roles.
pub struct SharedHttp(pub Arc<HttpBackend>);

impl Embedder for SharedHttp {
    fn embed(&self, texts: &[String]) -> BackendResult<Vec<Vec<f64>>> {
        self.0.embed(texts)
    }

    fn dim(&self) -> usize {
        self.0.dim()
    }
}

impl NliScorer for SharedHttp {
    fn entail(&self, premise: &str, hypothesis: &str) -> BackendResult<NliScores> {
        self.0.entail(premise, hypothesis)
    }
}

impl Generator for SharedHttp {
    fn generate(
        &self,
        prompt: &str,
        retrieved: &RetrievedSet,
        doc_texts: &HashMap<String, String>,
    ) -> BackendResult<GeneratedText> {
        self.0.generate(prompt, retrieved, doc_texts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{Read, Write};
    use std::net::{TcpListener, TcpStream};
    use std::thread;

    fn find_subslice(haystack: &[u8], needle: &[u8]) -> Option<usize> {
        haystack.windows(needle.len()).position(|w| w == needle)
    }

    fn read_request(stream: &mut TcpStream) -> String {
        let mut buf = Vec::new();
        let mut tmp = [0u8; 1024];
        loop {
            let n = stream.read(&mut tmp).unwrap();
            if n == 0 {
                break;
            }
            buf.extend_from_slice(&tmp[..n]);
            if let Some(pos) = find_subslice(&buf, b"\r\n\r\n") {
                let head = String::from_utf8_lossy(&buf[..pos]).to_string();
                let content_length = head
                    .lines()
                    .find_map(|line| {
                        let (k, v) = line.split_once(':')?;
                        if k.eq_ignore_ascii_case("content-length") {
                            v.trim().parse::<usize>().ok()
                        } else {
                            None
                        }
                    })
                    .unwrap_or(0);
                if buf.len() >= pos + 4 + content_length {
                    break;
                }
            }
        }
        String::from_utf8_lossy(&buf).to_string()
    }

    /// Serve exactly one request with a canned reply, returning what the
    /// client sent.
    fn one_shot(status: &'static str, body: &'static str) -> (String, thread::JoinHandle<String>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let handle = thread::spawn(move || {
            let (mut stream, _) = listener.accept().unwrap();
            let request = read_request(&mut stream);
            let reply = format!(
                "HTTP/1.1 {status}\r\nContent-Type: application/json\r\n\
                 Content-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            );
            stream.write_all(reply.as_bytes()).unwrap();
            request
        });
        (format!("http://{addr}"), handle)
    }

    fn backend(base_url: String) -> HttpBackend {
        backend_with(base_url, GenerateStyle::Engine, "")
    }

    fn backend_with(base_url: String, style: GenerateStyle, model: &str) -> HttpBackend {
        HttpBackend::new(&BackendConfig {
            kind: super::super::BackendKind::Http,
            base_url,
            embedding_dim: 3,
            timeout_s: 5.0,
            generate_style: style,
            model: model.to_string(),
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn embed_round_trip_normalizes() {
        let (url, server) = one_shot("200 OK", r#"{"embeddings":[[3.0,0.0,4.0]]}"#);
        let vectors = backend(url).embed(&["hi".into()]).unwrap();
        assert_eq!(vectors, vec![vec![0.6, 0.0, 0.8]]);
        let request = server.join().unwrap();
        assert!(request.starts_with("POST /embed "));
        assert!(request.contains(r#"{"texts":["hi"]}"#));
    }

    #[test]
    fn embed_wrong_dimension_is_fatal() {
        let (url, server) = one_shot("200 OK", r#"{"embeddings":[[1.0,0.0]]}"#);
        let err = backend(url).embed(&["hi".into()]).unwrap_err();
        assert!(!err.is_retryable(), "{err}");
        server.join().unwrap();
    }

    #[test]
    fn embed_count_mismatch_is_fatal() {
        let (url, server) = one_shot("200 OK", r#"{"embeddings":[]}"#);
        let err = backend(url).embed(&["hi".into()]).unwrap_err();
        assert!(!err.is_retryable());
        server.join().unwrap();
    }

    #[test]
    fn nli_round_trip_and_validation() {
        let (url, server) = one_shot("200 OK", r#"{"entail":0.7,"neutral":0.2,"contradict":0.1}"#);
        let scores = backend(url).entail("p", "h").unwrap();
        assert_eq!(scores.entail, 0.7);
        let request = server.join().unwrap();
        assert!(request.starts_with("POST /nli "));
        assert!(request.contains(r#""premise":"p""#));

        let (url, server) = one_shot("200 OK", r#"{"entail":0.9,"neutral":0.9,"contradict":0.0}"#);
        let err = backend(url).entail("p", "h").unwrap_err();
        assert!(!err.is_retryable());
        server.join().unwrap();
    }

    #[test]
    fn engine_generate_reads_text_field() {
        let (url, server) = one_shot("200 OK", r#"{"text":"generated words"}"#);
        let out = backend(url)
            .generate(
                "the prompt",
                &RetrievedSet::new("q", vec![], 1),
                &HashMap::new(),
            )
            .unwrap();
        assert_eq!(out.text, "generated words");
        assert_eq!(out.ground_truth_hallucinated, None);
        let request = server.join().unwrap();
        assert!(request.starts_with("POST /generate "));
        assert!(request.contains(r#"{"prompt":"the prompt"}"#));
    }

    #[test]
    fn ollama_generate_uses_api_path_and_response_field() {
        let (url, server) = one_shot("200 OK", r#"{"response":"from ollama"}"#);
        let out = backend_with(url, GenerateStyle::Ollama, "llama3")
            .generate("ask", &RetrievedSet::new("q", vec![], 1), &HashMap::new())
            .unwrap();
        assert_eq!(out.text, "from ollama");
        let request = server.join().unwrap();
        assert!(request.starts_with("POST /api/generate "));
        assert!(request.contains(r#""model":"llama3""#));
        assert!(request.contains(r#""stream":false"#));
    }

    #[test]
    fn error_status_is_retryable_transport() {
        let (url, server) = one_shot("503 Service Unavailable", "{}");
        let err = backend(url).embed(&["hi".into()]).unwrap_err();
        assert!(err.is_retryable(), "{err}");
        server.join().unwrap();
    }

    #[test]
    fn garbage_body_is_fatal() {
        let (url, server) = one_shot("200 OK", "this is not json");
        let err = backend(url).embed(&["hi".into()]).unwrap_err();
        assert!(!err.is_retryable());
        server.join().unwrap();
    }

    #[test]
    fn connection_refused_is_retryable() {
        // Bind a port, then drop the listener so nothing is listening.
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}", listener.local_addr().unwrap());
        drop(listener);
        let err = backend(url).embed(&["hi".into()]).unwrap_err();
        assert!(err.is_retryable(), "{err}");
    }

    #[test]
    fn timeout_is_retryable() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let server = thread::spawn(move || {
            // Accept, then never answer.
            let (mut stream, _) = listener.accept().unwrap();
            let _ = read_request(&mut stream);
            thread::sleep(Duration::from_millis(1500));
        });
        let backend = HttpBackend::new(&BackendConfig {
            kind: super::super::BackendKind::Http,
            base_url: format!("http://{addr}"),
            embedding_dim: 3,
            timeout_s: 0.3,
            ..Default::default()
        })
        .unwrap();
        let err = backend.embed(&["hi".into()]).unwrap_err();
        assert!(err.is_retryable(), "{err}");
        server.join().unwrap();
    }
}
