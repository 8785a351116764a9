use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use super::{Corpus, CorpusError, CorpusHeader};
use crate::dialog_core::{Transition, FEATURE_SCHEMA_VERSION};

fn push_float(out: &mut String, x: f64) {
    let _ = write!(out, "{x:.16e}");
}

fn push_floats(out: &mut String, xs: &[f64]) {
    out.push('[');
    for (i, &x) in xs.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        push_float(out, x);
    }
    out.push(']');
}

fn push_str(out: &mut String, s: &str) {
    out.push_str(&serde_json::to_string(s).expect("strings serialize"));
}

fn header_line(h: &CorpusHeader) -> String {
    let mut out = String::new();
    let _ = write!(
        out,
        "{{\"schema_version\":{},\"feature_names\":[",
        h.schema_version
    );
    for (i, n) in h.feature_names.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        push_str(&mut out, n);
    }
    out.push_str("],\"action_set\":[");
    for (i, a) in h.action_set.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        push_str(&mut out, a);
    }
    let r = &h.reward_config;
    out.push_str("],\"reward_config\":{\"per_turn\":");
    push_float(&mut out, r.per_turn);
    out.push_str(",\"correct_offer\":");
    push_float(&mut out, r.correct_offer);
    out.push_str(",\"duplicate_offer\":");
    push_float(&mut out, r.duplicate_offer);
    out.push_str(",\"wrong_offer\":");
    push_float(&mut out, r.wrong_offer);
    out.push_str(",\"gamma\":");
    push_float(&mut out, r.gamma);
    out.push_str("}}");
    out
}

fn record_line(t: &Transition) -> Result<String, CorpusError> {
    if t.s.iter().chain(&t.s_next).any(|x| !x.is_finite()) {
        return Err(CorpusError::NonFinite(t.dialog_id.clone()));
    }
    let mut out = String::from("{\"dialog_id\":");
    push_str(&mut out, &t.dialog_id);
    let _ = write!(out, ",\"turn\":{},\"s\":", t.turn);
    push_floats(&mut out, &t.s);
    out.push_str(",\"a\":");
    push_str(&mut out, &t.a);
    out.push_str(",\"s_next\":");
    push_floats(&mut out, &t.s_next);
    let _ = write!(out, ",\"terminal\":{}}}", t.terminal);
    Ok(out)
}

/// Canonical text of a corpus.
pub fn write_corpus(corpus: &Corpus) -> Result<String, CorpusError> {
    let r = &corpus.header.reward_config;
    if ![
        r.per_turn,
        r.correct_offer,
        r.duplicate_offer,
        r.wrong_offer,
        r.gamma,
    ]
    .iter()
    .all(|x| x.is_finite())
    {
        return Err(CorpusError::NonFinite("<header>".into()));
    }
    let mut out = header_line(&corpus.header);
    out.push('\n');
    for t in &corpus.transitions {
        out.push_str(&record_line(t)?);
        out.push('\n');
    }
    Ok(out)
}

pub fn save_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> Result<(), CorpusError> {
    fs::write(path, write_corpus(corpus)?)?;
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    dialog_id: String,
    turn: usize,
    s: Vec<f64>,
    a: String,
    s_next: Vec<f64>,
    terminal: bool,
}

/// Parses and validates corpus text.
pub fn parse_corpus(text: &str) -> Result<Corpus, CorpusError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let Some((idx, first)) = lines.next() else {
        return Err(CorpusError::Parse {
            line: 1,
            message: "missing header record".into(),
        });
    };
    let header: CorpusHeader = serde_json::from_str(first).map_err(|e| CorpusError::Parse {
        line: idx + 1,
        message: format!("bad header: {e}"),
    })?;
    if header.schema_version != FEATURE_SCHEMA_VERSION {
        return Err(CorpusError::SchemaMismatch {
            line: idx + 1,
            message: format!(
                "schema_version {} (supported: {FEATURE_SCHEMA_VERSION})",
                header.schema_version
            ),
        });
    }
    let width = header.feature_names.len();
    let mut transitions = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let rec: Record = serde_json::from_str(line).map_err(|e| CorpusError::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if rec.s.len() != width || rec.s_next.len() != width {
            return Err(CorpusError::SchemaMismatch {
                line: line_no,
                message: format!(
                    "expected {width} features, got {} and {}",
                    rec.s.len(),
                    rec.s_next.len()
                ),
            });
        }
        if header.action_index(&rec.a).is_none() {
            return Err(CorpusError::SchemaMismatch {
                line: line_no,
                message: format!("action `{}` not in action_set", rec.a),
            });
        }
        transitions.push(Transition {
            dialog_id: rec.dialog_id,
            turn: rec.turn,
            s: rec.s,
            a: rec.a,
            s_next: rec.s_next,
            terminal: rec.terminal,
        });
    }
    Corpus::new(header, transitions)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    parse_corpus(&fs::read_to_string(path)?)
}
