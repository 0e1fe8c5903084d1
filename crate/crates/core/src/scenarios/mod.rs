//! Synthetic credit delinquency cases: generation, validation, persistence and summaries.

pub mod schema;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use schema::*;

/// One delinquency scenario. Field names are the on-disk names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CreditCase {
    pub crad_version: u32,
    pub case_id: String,
    pub original_amount: f64,
    pub outstanding_balance: f64,
    pub days_overdue: u32,
    pub interest_accrued: f64,
    pub credit_type: CreditType,
    pub collateral: Collateral,
    pub reason_for_overdue: OverdueReason,
    pub recovery_stage: RecoveryStage,
    pub cash_flow_situation: CashFlowSituation,
    pub recovery_probability: f64,
    pub proposed_solution: ProposedSolution,
    pub target_days: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CaseViolation {
    pub field: &'static str,
    pub message: String,
}

impl std::fmt::Display for CaseViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("io error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed case file: {0}")]
    Malformed(String),
    #[error("record {index}: {}", join(.violations))]
    Record { index: usize, violations: Vec<CaseViolation> },
    #[error("cannot summarize an empty case list")]
    Empty,
    #[error("csv export failed: {0}")]
    Csv(#[from] csv::Error),
}

fn join(v: &[CaseViolation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

fn round_to(value: f64, decimals: i32) -> f64 {
    let f = 10f64.powi(decimals);
    (value * f).round() / f
}

fn pick<T: Copy, R: Rng + ?Sized>(items: &[T], rng: &mut R) -> T {
    *items.choose(rng).expect("category list is non-empty")
}

/// Generates `n` cases, uniform over every documented range and category list.
pub fn generate_cases(n: usize, seed: u64) -> Vec<CreditCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let days_overdue = rng.random_range(DAYS_OVERDUE.0..=DAYS_OVERDUE.1);
            CreditCase {
                crad_version: CRAD_VERSION,
                case_id: format!("crad-{seed:016x}-{i:05}"),
                original_amount: round_to(rng.random_range(ORIGINAL_AMOUNT.0..=ORIGINAL_AMOUNT.1), 2),
                outstanding_balance: OUTSTANDING_BALANCE,
                days_overdue,
                interest_accrued: round_to(rng.random_range(INTEREST_ACCRUED.0..=INTEREST_ACCRUED.1), 2),
                credit_type: pick(CreditType::ALL, &mut rng),
                collateral: pick(Collateral::ALL, &mut rng),
                reason_for_overdue: pick(OverdueReason::ALL, &mut rng),
                recovery_stage: pick(RecoveryStage::ALL, &mut rng),
                cash_flow_situation: pick(CashFlowSituation::ALL, &mut rng),
                recovery_probability: round_to(rng.random_range(RECOVERY_PROBABILITY.0..=RECOVERY_PROBABILITY.1), 2),
                proposed_solution: pick(ProposedSolution::ALL, &mut rng),
                target_days: target_days_for(days_overdue),
            }
        })
        .collect()
}

fn check_range(out: &mut Vec<CaseViolation>, field: &'static str, value: f64, (lo, hi): (f64, f64)) {
    if !(lo..=hi).contains(&value) {
        out.push(CaseViolation { field, message: format!("{value} outside [{lo}, {hi}]") });
    }
}

/// Checks every numeric invariant of a typed case.
pub fn validate_case(case: &CreditCase) -> Result<(), Vec<CaseViolation>> {
    let mut v = Vec::new();
    if case.crad_version != CRAD_VERSION {
        v.push(CaseViolation { field: "crad_version", message: format!("unsupported version {}", case.crad_version) });
    }
    if case.case_id.trim().is_empty() {
        v.push(CaseViolation { field: "case_id", message: "empty".into() });
    }
    check_range(&mut v, "original_amount", case.original_amount, ORIGINAL_AMOUNT);
    if case.outstanding_balance != OUTSTANDING_BALANCE {
        v.push(CaseViolation {
            field: "outstanding_balance",
            message: format!("{} differs from the fixed {OUTSTANDING_BALANCE}", case.outstanding_balance),
        });
    }
    check_range(
        &mut v,
        "days_overdue",
        f64::from(case.days_overdue),
        (f64::from(DAYS_OVERDUE.0), f64::from(DAYS_OVERDUE.1)),
    );
    check_range(&mut v, "interest_accrued", case.interest_accrued, INTEREST_ACCRUED);
    check_range(&mut v, "recovery_probability", case.recovery_probability, RECOVERY_PROBABILITY);
    if case.target_days < 1 {
        v.push(CaseViolation { field: "target_days", message: "must be at least 1".into() });
    }
    if v.is_empty() {
        Ok(())
    } else {
        Err(v)
    }
}

fn field<T: DeserializeOwned>(obj: &Map<String, Value>, name: &'static str, out: &mut Vec<CaseViolation>) -> Option<T> {
    match obj.get(name) {
        None => {
            out.push(CaseViolation { field: name, message: "missing".into() });
            None
        }
        Some(value) => match serde_json::from_value(value.clone()) {
            Ok(t) => Some(t),
            Err(e) => {
                out.push(CaseViolation { field: name, message: format!("{e} (got {value})") });
                None
            }
        },
    }
}

/// Parses and validates one untyped record, reporting every bad field.
pub fn validate_record(value: &Value) -> Result<CreditCase, Vec<CaseViolation>> {
    let Some(obj) = value.as_object() else {
        return Err(vec![CaseViolation { field: "<record>", message: "not a JSON object".into() }]);
    };
    let mut v = Vec::new();
    let crad_version = field::<u32>(obj, "crad_version", &mut v);
    let case_id = field::<String>(obj, "case_id", &mut v);
    let original_amount = field::<f64>(obj, "original_amount", &mut v);
    let outstanding_balance = field::<f64>(obj, "outstanding_balance", &mut v);
    let days_overdue = field::<u32>(obj, "days_overdue", &mut v);
    let interest_accrued = field::<f64>(obj, "interest_accrued", &mut v);
    let credit_type = field::<CreditType>(obj, "credit_type", &mut v);
    let collateral = field::<Collateral>(obj, "collateral", &mut v);
    let reason_for_overdue = field::<OverdueReason>(obj, "reason_for_overdue", &mut v);
    let recovery_stage = field::<RecoveryStage>(obj, "recovery_stage", &mut v);
    let cash_flow_situation = field::<CashFlowSituation>(obj, "cash_flow_situation", &mut v);
    let recovery_probability = field::<f64>(obj, "recovery_probability", &mut v);
    let proposed_solution = field::<ProposedSolution>(obj, "proposed_solution", &mut v);
    let target_days = field::<u32>(obj, "target_days", &mut v);
    let (
        Some(crad_version),
        Some(case_id),
        Some(original_amount),
        Some(outstanding_balance),
        Some(days_overdue),
        Some(interest_accrued),
        Some(credit_type),
        Some(collateral),
        Some(reason_for_overdue),
        Some(recovery_stage),
        Some(cash_flow_situation),
        Some(recovery_probability),
        Some(proposed_solution),
        Some(target_days),
    ) = (
        crad_version,
        case_id,
        original_amount,
        outstanding_balance,
        days_overdue,
        interest_accrued,
        credit_type,
        collateral,
        reason_for_overdue,
        recovery_stage,
        cash_flow_situation,
        recovery_probability,
        proposed_solution,
        target_days,
    )
    else {
        return Err(v);
    };
    let case = CreditCase {
        crad_version,
        case_id,
        original_amount,
        outstanding_balance,
        days_overdue,
        interest_accrued,
        credit_type,
        collateral,
        reason_for_overdue,
        recovery_stage,
        cash_flow_situation,
        recovery_probability,
        proposed_solution,
        target_days,
    };
    validate_case(&case)?;
    Ok(case)
}

/// Parses a case file body. Blank input yields an empty list.
pub fn parse_cases(text: &str) -> Result<Vec<CreditCase>, ScenarioError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let doc: Value = serde_json::from_str(text).map_err(|e| ScenarioError::Malformed(e.to_string()))?;
    let Value::Array(records) = doc else {
        return Err(ScenarioError::Malformed("top level must be a JSON array".into()));
    };
    records
        .iter()
        .enumerate()
        .map(|(index, r)| validate_record(r).map_err(|violations| ScenarioError::Record { index, violations }))
        .collect()
}

pub fn load_cases(path: impl AsRef<Path>) -> Result<Vec<CreditCase>, ScenarioError> {
    let path = path.as_ref();
    let text =
        fs::read_to_string(path).map_err(|source| ScenarioError::Io { path: path.display().to_string(), source })?;
    parse_cases(&text)
}

pub fn cases_to_json(cases: &[CreditCase]) -> String {
    let mut s = serde_json::to_string_pretty(cases).expect("cases serialize");
    s.push('\n');
    s
}

pub fn save_cases(cases: &[CreditCase], path: impl AsRef<Path>) -> Result<(), ScenarioError> {
    let path = path.as_ref();
    fs::write(path, cases_to_json(cases))
        .map_err(|source| ScenarioError::Io { path: path.display().to_string(), source })
}

pub fn cases_to_csv(cases: &[CreditCase]) -> Result<String, ScenarioError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for c in cases {
        w.serialize(c)?;
    }
    let bytes = w.into_inner().map_err(|e| ScenarioError::Malformed(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldStats {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

/// Descriptive statistics of a case list.
///
/// `recovery_probability` is generated uniformly over its range, so its
/// histogram is flat rather than the bimodal shape seen in real portfolios.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub count: usize,
    pub numeric: BTreeMap<&'static str, FieldStats>,
    pub categories: BTreeMap<&'static str, BTreeMap<&'static str, usize>>,
}

fn stats(mut values: Vec<f64>) -> FieldStats {
    // sorted summation keeps the result independent of input order
    values.sort_by(f64::total_cmp);
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let mut sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    sq.sort_by(f64::total_cmp);
    FieldStats { mean, std: (sq.iter().sum::<f64>() / n).sqrt(), min: values[0], max: values[values.len() - 1] }
}

fn frequencies<C: Copy + Ord>(
    all: &[C],
    label: fn(C) -> &'static str,
    values: impl Iterator<Item = C>,
) -> BTreeMap<&'static str, usize> {
    let mut table: BTreeMap<&'static str, usize> = all.iter().map(|&c| (label(c), 0)).collect();
    for v in values {
        *table.entry(label(v)).or_default() += 1;
    }
    table
}

/// Mean and population standard deviation of numeric fields plus category frequencies.
pub fn summarize(cases: &[CreditCase]) -> Result<Summary, ScenarioError> {
    if cases.is_empty() {
        return Err(ScenarioError::Empty);
    }
    let mut numeric = BTreeMap::new();
    numeric.insert("original_amount", stats(cases.iter().map(|c| c.original_amount).collect()));
    numeric.insert("outstanding_balance", stats(cases.iter().map(|c| c.outstanding_balance).collect()));
    numeric.insert("days_overdue", stats(cases.iter().map(|c| f64::from(c.days_overdue)).collect()));
    numeric.insert("interest_accrued", stats(cases.iter().map(|c| c.interest_accrued).collect()));
    numeric.insert("recovery_probability", stats(cases.iter().map(|c| c.recovery_probability).collect()));
    numeric.insert("target_days", stats(cases.iter().map(|c| f64::from(c.target_days)).collect()));

    let mut categories = BTreeMap::new();
    categories
        .insert("credit_type", frequencies(CreditType::ALL, CreditType::label, cases.iter().map(|c| c.credit_type)));
    categories
        .insert("collateral", frequencies(Collateral::ALL, Collateral::label, cases.iter().map(|c| c.collateral)));
    categories.insert(
        "reason_for_overdue",
        frequencies(OverdueReason::ALL, OverdueReason::label, cases.iter().map(|c| c.reason_for_overdue)),
    );
    categories.insert(
        "recovery_stage",
        frequencies(RecoveryStage::ALL, RecoveryStage::label, cases.iter().map(|c| c.recovery_stage)),
    );
    categories.insert(
        "cash_flow_situation",
        frequencies(CashFlowSituation::ALL, CashFlowSituation::label, cases.iter().map(|c| c.cash_flow_situation)),
    );
    categories.insert(
        "proposed_solution",
        frequencies(ProposedSolution::ALL, ProposedSolution::label, cases.iter().map(|c| c.proposed_solution)),
    );
    Ok(Summary { count: cases.len(), numeric, categories })
}

impl std::fmt::Display for Summary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "{} cases", self.count)?;
        for (name, s) in &self.numeric {
            writeln!(f, "  {name:<22} mean {:>10.2}  std {:>9.2}  range [{}, {}]", s.mean, s.std, s.min, s.max)?;
        }
        for (name, table) in &self.categories {
            let cells: Vec<String> = table.iter().map(|(k, v)| format!("{k}={v}")).collect();
            writeln!(f, "  {name}: {}", cells.join(", "))?;
        }
        Ok(())
    }
}
