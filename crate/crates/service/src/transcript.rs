//! Recorded protocol sessions, used as golden files by the test suites.
//!
//! One step per line: `> frame` is sent by the client, `< frame` is expected
//! from the server, `! busy` / `! idle` hold and release the dataset's writer
//! flag from outside the session. Blank lines and `#` comments are skipped.

use std::path::Path;
use std::sync::Arc;

use activecanvas_core::synthetic::{generate_synthetic, SyntheticSpec};

use crate::error::ServiceError;
use crate::session::Session;
use crate::state::AppState;

pub const FIXTURE_DATASET: &str = "golden";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Step {
    Send(String),
    Expect(String),
    Busy,
    Idle,
    Comment(String),
}

#[derive(Debug, thiserror::Error)]
#[error("transcript line {line}: {detail}")]
pub struct TranscriptError {
    pub line: usize,
    pub detail: String,
}

pub fn parse(text: &str) -> Result<Vec<Step>, TranscriptError> {
    let mut steps = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end();
        let step = if line.is_empty() {
            continue;
        } else if let Some(c) = line.strip_prefix('#') {
            Step::Comment(c.trim().to_string())
        } else if let Some(f) = line.strip_prefix("> ") {
            Step::Send(f.to_string())
        } else if let Some(f) = line.strip_prefix("< ") {
            Step::Expect(f.to_string())
        } else if line == "! busy" {
            Step::Busy
        } else if line == "! idle" {
            Step::Idle
        } else {
            return Err(TranscriptError {
                line: i + 1,
                detail: format!("unrecognised step `{line}`"),
            });
        };
        steps.push(step);
    }
    Ok(steps)
}

pub fn render(steps: &[Step]) -> String {
    let mut out = String::new();
    for s in steps {
        match s {
            Step::Send(f) => out.push_str(&format!("> {f}\n")),
            Step::Expect(f) => out.push_str(&format!("< {f}\n")),
            Step::Busy => out.push_str("! busy\n"),
            Step::Idle => out.push_str("! idle\n"),
            Step::Comment(c) => out.push_str(&format!("# {c}\n")),
        }
    }
    out
}

/// Number of server frames expected right after step `i`.
pub fn replies_after(steps: &[Step], i: usize) -> usize {
    steps[i + 1..]
        .iter()
        .take_while(|s| matches!(s, Step::Expect(_) | Step::Comment(_)))
        .filter(|s| matches!(s, Step::Expect(_)))
        .count()
}

/// Zeroes every `"elapsed_ms"` value so timing does not affect comparison.
pub fn mask_timing(frame: &str) -> String {
    const KEY: &str = "\"elapsed_ms\":";
    let mut out = String::with_capacity(frame.len());
    let mut rest = frame;
    while let Some(pos) = rest.find(KEY) {
        let (head, tail) = rest.split_at(pos + KEY.len());
        out.push_str(head);
        let digits = tail.bytes().take_while(u8::is_ascii_digit).count();
        out.push('0');
        rest = &tail[digits..];
    }
    out.push_str(rest);
    out
}

pub fn fixture_spec() -> SyntheticSpec {
    SyntheticSpec {
        classes: 3,
        items: 12,
        dims: 6,
        informative: 2,
        noise: 1.0,
        seed: 7,
    }
}

/// Writes the dataset the golden transcripts were recorded against.
pub fn write_fixture(root: &Path) -> activecanvas_core::Result<()> {
    generate_synthetic(&fixture_spec())?.write(&root.join(FIXTURE_DATASET))
}

/// Plays the client side of `steps` through an in-process session and returns
/// the transcript as observed: sends kept, expectations replaced by real replies.
pub async fn run_in_process(
    state: Arc<AppState>,
    dataset: &str,
    steps: &[Step],
) -> Result<Vec<Step>, ServiceError> {
    let (mut session, greeting) = Session::open(state, dataset).await?;
    let lead = steps
        .iter()
        .take_while(|s| matches!(s, Step::Comment(_)))
        .count();
    let mut out: Vec<Step> = steps[..lead].to_vec();
    out.extend(greeting.iter().map(|g| Step::Expect(g.to_json())));
    let mut guard = None;
    for step in &steps[lead..] {
        match step {
            Step::Expect(_) => {}
            Step::Comment(_) => out.push(step.clone()),
            Step::Busy => {
                guard = session.slot().try_begin();
                out.push(Step::Busy);
            }
            Step::Idle => {
                guard = None;
                out.push(Step::Idle);
            }
            Step::Send(frame) => {
                out.push(step.clone());
                if let Some(reply) = session.handle_text(frame).await {
                    out.push(Step::Expect(reply.to_json()));
                }
            }
        }
    }
    drop(guard);
    Ok(out)
}

/// Renders with timings masked, for comparison.
pub fn normalized(steps: &[Step]) -> String {
    let masked: Vec<Step> = steps
        .iter()
        .map(|s| match s {
            Step::Expect(f) => Step::Expect(mask_timing(f)),
            other => other.clone(),
        })
        .collect();
    render(&masked)
}
