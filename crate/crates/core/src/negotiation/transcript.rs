//! JSON Lines transcripts and CSV outcome summaries.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::agents::ProfileLabel;
use super::episode::{outcome_from_transcript, Episode, EpisodeConfig};
use super::reward::reward;
use super::types::{NegotiationOutcome, Turn};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptHeader {
    pub scenario_id: String,
    pub profile: ProfileLabel,
    pub policy_hash: String,
    pub seed: u64,
    pub d_target: u32,
    pub config: EpisodeConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub outcome: NegotiationOutcome,
    pub reward: f64,
    pub transcript_hash: String,
}

/// One line of a transcript file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TranscriptRecord {
    Header(TranscriptHeader),
    Turn(Turn),
    Outcome(OutcomeRecord),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoredTranscript {
    pub header: TranscriptHeader,
    pub turns: Vec<Turn>,
    pub stored: OutcomeRecord,
}

#[derive(Debug, thiserror::Error)]
pub enum TranscriptError {
    #[error("transcript is empty")]
    Empty,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("integrity check failed: {0}")]
    Integrity(String),
}

/// SHA-256 over the canonical JSON of each turn, one per line.
pub fn transcript_hash(turns: &[Turn]) -> String {
    let mut hasher = Sha256::new();
    for t in turns {
        hasher.update(serde_json::to_vec(t).expect("turn serializes"));
        hasher.update(b"\n");
    }
    hex::encode(hasher.finalize())
}

pub fn write_transcript(header: &TranscriptHeader, episode: &Episode) -> String {
    let mut out = String::new();
    let mut push = |record: &TranscriptRecord| {
        out.push_str(&serde_json::to_string(record).expect("record serializes"));
        out.push('\n');
    };
    push(&TranscriptRecord::Header(header.clone()));
    for t in &episode.transcript {
        push(&TranscriptRecord::Turn(t.clone()));
    }
    push(&TranscriptRecord::Outcome(OutcomeRecord {
        outcome: episode.outcome,
        reward: episode.reward,
        transcript_hash: transcript_hash(&episode.transcript),
    }));
    out
}

pub fn read_transcript(text: &str) -> Result<StoredTranscript, TranscriptError> {
    let mut header = None;
    let mut turns = Vec::new();
    let mut stored = None;
    let mut seen_any = false;
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        seen_any = true;
        let line_no = i + 1;
        let record: TranscriptRecord =
            serde_json::from_str(line).map_err(|e| TranscriptError::Parse { line: line_no, message: e.to_string() })?;
        let misplaced =
            |what: &str| TranscriptError::Parse { line: line_no, message: format!("unexpected {what} record") };
        match record {
            TranscriptRecord::Header(h) if header.is_none() && turns.is_empty() => header = Some(h),
            TranscriptRecord::Header(_) => return Err(misplaced("header")),
            TranscriptRecord::Turn(t) if header.is_some() && stored.is_none() => turns.push(t),
            TranscriptRecord::Turn(_) => return Err(misplaced("turn")),
            TranscriptRecord::Outcome(o) if header.is_some() && stored.is_none() => stored = Some(o),
            TranscriptRecord::Outcome(_) => return Err(misplaced("outcome")),
        }
    }
    if !seen_any {
        return Err(TranscriptError::Empty);
    }
    let header = header.ok_or(TranscriptError::Parse { line: 1, message: "missing header record".into() })?;
    let stored = stored.ok_or(TranscriptError::Parse { line: 0, message: "missing outcome record".into() })?;
    Ok(StoredTranscript { header, turns, stored })
}

/// Recomputes outcome, reward and hash from the turns and compares them with the stored values.
pub fn verify_transcript(t: &StoredTranscript) -> Result<(NegotiationOutcome, f64), TranscriptError> {
    let hash = transcript_hash(&t.turns);
    if hash != t.stored.transcript_hash {
        return Err(TranscriptError::Integrity(format!("turn hash {hash} != stored {}", t.stored.transcript_hash)));
    }
    let outcome = outcome_from_transcript(&t.turns, t.header.d_target, t.header.config.t_max)
        .map_err(TranscriptError::Integrity)?;
    if outcome != t.stored.outcome {
        return Err(TranscriptError::Integrity(format!(
            "recomputed outcome {outcome:?} != stored {:?}",
            t.stored.outcome
        )));
    }
    let r = reward(&outcome, &t.header.config.reward);
    if r.to_bits() != t.stored.reward.to_bits() {
        return Err(TranscriptError::Integrity(format!("recomputed reward {r} != stored {}", t.stored.reward)));
    }
    Ok((outcome, r))
}

/// One row of the outcome summary CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeRow {
    pub scenario_id: String,
    pub profile: ProfileLabel,
    pub terminal_state: super::types::TerminalState,
    pub n_rounds: u32,
    pub d_target: u32,
    pub d_final: Option<u32>,
    pub reward: f64,
}

pub fn outcomes_to_csv(rows: &[OutcomeRow]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
