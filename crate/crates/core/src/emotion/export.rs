//! Matrix serialization (JSON, CSV) and heatmap rendering.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::matrix::{MatrixError, StochasticMatrix};
use super::state::{EmotionState, NUM_EMOTIONS};
use crate::scalar::Scalar;

#[derive(Debug, Serialize, Deserialize)]
struct MatrixDocument {
    order: Vec<String>,
    rows: Vec<Vec<f64>>,
}

pub fn to_json<T: Scalar>(matrix: &StochasticMatrix<T>) -> String {
    serde_json::to_string_pretty(matrix).expect("matrix document serializes")
}

pub fn from_json<T: Scalar>(text: &str) -> Result<StochasticMatrix<T>, MatrixError> {
    let doc: MatrixDocument = serde_json::from_str(text).map_err(|e| MatrixError::Format(e.to_string()))?;
    from_document(doc)
}

/// Seven lines of seven comma-separated probabilities, no header.
pub fn to_csv<T: Scalar>(matrix: &StochasticMatrix<T>) -> String {
    let mut out = String::new();
    for row in matrix.rows() {
        let line: Vec<String> = row.iter().map(|p| p.as_f64().to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn from_csv<T: Scalar>(text: &str) -> Result<StochasticMatrix<T>, MatrixError> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let row = line
            .split(',')
            .map(|cell| cell.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| MatrixError::Format(format!("line {}: {e}", i + 1)))?;
        rows.push(row);
    }
    from_nested(&rows)
}

fn from_nested<T: Scalar>(rows: &[Vec<f64>]) -> Result<StochasticMatrix<T>, MatrixError> {
    if rows.len() != NUM_EMOTIONS {
        return Err(MatrixError::Format(format!("expected {NUM_EMOTIONS} rows, found {}", rows.len())));
    }
    let mut out = [[T::zero(); NUM_EMOTIONS]; NUM_EMOTIONS];
    for (i, (dst, src)) in out.iter_mut().zip(rows).enumerate() {
        if src.len() != NUM_EMOTIONS {
            return Err(MatrixError::Format(format!(
                "row {i} ({}) has {} values, expected {NUM_EMOTIONS}",
                EmotionState::ALL[i],
                src.len()
            )));
        }
        for (d, &s) in dst.iter_mut().zip(src) {
            *d = T::from_f64(s).ok_or_else(|| MatrixError::Format(format!("row {i}: unrepresentable {s}")))?;
        }
    }
    StochasticMatrix::from_rows(out)
}

/// SHA-256 over the little-endian bits of the 49 entries, row-major.
pub fn policy_hash<T: Scalar>(matrix: &StochasticMatrix<T>) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    for p in matrix.rows().iter().flatten() {
        hasher.update(p.as_f64().to_bits().to_le_bytes());
    }
    hex::encode(hasher.finalize())
}

impl<T: Scalar> Serialize for StochasticMatrix<T> {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        MatrixDocument {
            order: EmotionState::ALL.iter().map(|e| e.label().to_string()).collect(),
            rows: self.rows().iter().map(|r| r.iter().map(|p| p.as_f64()).collect()).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for StochasticMatrix<T> {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let doc = MatrixDocument::deserialize(deserializer)?;
        from_document(doc).map_err(serde::de::Error::custom)
    }
}

fn from_document<T: Scalar>(doc: MatrixDocument) -> Result<StochasticMatrix<T>, MatrixError> {
    let expected: Vec<&str> = EmotionState::ALL.iter().map(|e| e.label()).collect();
    if doc.order != expected {
        return Err(MatrixError::Format(format!("state order must be {expected:?}, got {:?}", doc.order)));
    }
    from_nested(&doc.rows)
}

const CELL: usize = 64;
const MARGIN: usize = 96;

/// Heatmap as a standalone SVG; cell opacity equals the probability.
pub fn to_svg<T: Scalar>(matrix: &StochasticMatrix<T>, title: &str) -> String {
    let size = MARGIN + CELL * NUM_EMOTIONS + 16;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{}" font-family="sans-serif" font-size="12">"#,
        size + 24
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{} (H = {:.3} nats)</text>"#,
        size / 2,
        escape(title),
        matrix.entropy().as_f64()
    );
    for (k, e) in EmotionState::ALL.iter().enumerate() {
        let offset = MARGIN + k * CELL + CELL / 2;
        let _ =
            writeln!(svg, r#"<text x="{offset}" y="{}" text-anchor="middle">{}</text>"#, MARGIN - 8, e.abbreviation());
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="end" dominant-baseline="middle">{}</text>"#,
            MARGIN - 8,
            offset,
            e.label()
        );
    }
    for (i, row) in matrix.rows().iter().enumerate() {
        for (j, &p) in row.iter().enumerate() {
            let p = p.as_f64();
            let (x, y) = (MARGIN + j * CELL, MARGIN + i * CELL);
            let _ = writeln!(
                svg,
                r##"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="#08519c" fill-opacity="{p:.4}" stroke="#cccccc"/>"##
            );
            let ink = if p > 0.5 { "#ffffff" } else { "#000000" };
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}" text-anchor="middle" dominant-baseline="middle" fill="{ink}">{p:.3}</text>"#,
                x + CELL / 2,
                y + CELL / 2
            );
        }
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
