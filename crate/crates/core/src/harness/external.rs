//! A child process playing the map under test. Each request is one JSON line
//! `{"values": {...}}` on the child's stdin; the reply is one JSON line of
//! the same shape on its stdout. Requests to one child are serialised.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use crate::error::{Error, Result};
use crate::funcspace::VectorFunction;
use crate::lcs::VectorSpaceModel;
use crate::space::FiniteSpace;

pub const DEFAULT_TIMEOUT_MS: u64 = 10_000;

struct Session {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<std::io::Result<String>>,
    /// Set after a timeout or I/O failure; the stream can no longer be
    /// trusted to pair requests with replies.
    broken: Option<String>,
}

pub struct ExternalMap {
    session: Mutex<Session>,
    codomain: Arc<FiniteSpace>,
    model: Arc<VectorSpaceModel>,
    timeout: Duration,
}

impl ExternalMap {
    pub fn spawn(
        command: &[String],
        codomain: Arc<FiniteSpace>,
        model: Arc<VectorSpaceModel>,
        timeout: Duration,
    ) -> Result<Self> {
        let (program, args) = command
            .split_first()
            .ok_or_else(|| Error::InvalidSpec("external command is empty".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Self {
            session: Mutex::new(Session {
                child,
                stdin,
                lines: rx,
                broken: None,
            }),
            codomain,
            model,
            timeout,
        })
    }

    /// Sends `f` and decodes the reply as a function on the codomain.
    pub fn call(&self, f: &VectorFunction) -> Result<VectorFunction> {
        let mut s = self.session.lock().unwrap_or_else(|p| p.into_inner());
        if let Some(reason) = &s.broken {
            return Err(Error::Evaluator(format!("external map unusable: {reason}")));
        }
        let request = serde_json::to_string(f)?;
        let sent = writeln!(s.stdin, "{request}").and_then(|_| s.stdin.flush());
        if let Err(e) = sent {
            s.broken = Some(e.to_string());
            return Err(Error::Evaluator(format!("writing to external map: {e}")));
        }
        let line = match s.lines.recv_timeout(self.timeout) {
            Ok(Ok(line)) => line,
            Ok(Err(e)) => {
                s.broken = Some(e.to_string());
                return Err(Error::Evaluator(format!("reading from external map: {e}")));
            }
            Err(RecvTimeoutError::Timeout) => {
                let ms = self.timeout.as_millis() as u64;
                s.broken = Some(format!("timed out after {ms} ms"));
                let _ = s.child.kill();
                return Err(Error::Timeout(ms));
            }
            Err(RecvTimeoutError::Disconnected) => {
                s.broken = Some("child closed its output".into());
                return Err(Error::Evaluator("external map closed its output".into()));
            }
        };
        let value: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| Error::Evaluator(format!("malformed reply {line:?}: {e}")))?;
        VectorFunction::from_json(self.codomain.clone(), self.model.clone(), &value)
    }
}

impl Drop for ExternalMap {
    fn drop(&mut self) {
        let s = self.session.get_mut().unwrap_or_else(|p| p.into_inner());
        let _ = s.child.kill();
        let _ = s.child.wait();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lcs::ComplexVector;

    fn python(script: &str) -> Vec<String> {
        vec!["python3".into(), "-u".into(), "-c".into(), script.into()]
    }

    fn setup() -> (Arc<FiniteSpace>, Arc<VectorSpaceModel>, VectorFunction) {
        let space = Arc::new(FiniteSpace::new(["p"]).unwrap());
        let model = Arc::new(VectorSpaceModel::standard(1));
        let f = VectorFunction::new(space.clone(), model.clone(), vec![ComplexVector::real(&[3.0]).unwrap()]).unwrap();
        (space, model, f)
    }

    #[test]
    fn echo_round_trip() {
        let (space, model, f) = setup();
        let script = "import sys\nfor line in sys.stdin:\n    sys.stdout.write(line)\n    sys.stdout.flush()\n";
        let child = ExternalMap::spawn(&python(script), space, model, Duration::from_secs(10)).unwrap();
        assert_eq!(child.call(&f).unwrap(), f);
        assert_eq!(child.call(&f).unwrap(), f);
    }

    #[test]
    fn wrong_dimension_and_garbage() {
        let (space, model, f) = setup();
        let script =
            "import sys\nfor line in sys.stdin:\n    print('{\"values\": {\"p\": [[1,0],[2,0]]}}', flush=True)\n";
        let child = ExternalMap::spawn(&python(script), space.clone(), model.clone(), Duration::from_secs(10)).unwrap();
        assert!(matches!(
            child.call(&f),
            Err(Error::DimensionMismatch { expected: 1, got: 2 })
        ));

        let script = "import sys\nfor line in sys.stdin:\n    print('nope', flush=True)\n";
        let child = ExternalMap::spawn(&python(script), space, model, Duration::from_secs(10)).unwrap();
        assert!(matches!(child.call(&f), Err(Error::Evaluator(_))));
    }

    #[test]
    fn silent_child_times_out() {
        let (space, model, f) = setup();
        let script = "import sys, time\nfor line in sys.stdin:\n    time.sleep(30)\n";
        let child = ExternalMap::spawn(&python(script), space, model, Duration::from_millis(200)).unwrap();
        assert!(matches!(child.call(&f), Err(Error::Timeout(200))));
        assert!(matches!(child.call(&f), Err(Error::Evaluator(_))));
    }

    #[test]
    fn missing_program() {
        let (space, model, _) = setup();
        let cmd = vec!["/nonexistent/map-binary".to_string()];
        assert!(matches!(
            ExternalMap::spawn(&cmd, space, model, Duration::from_secs(1)),
            Err(Error::Io(_))
        ));
    }
}
