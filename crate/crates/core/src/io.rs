//! File formats: problem JSON, trace and front CSV, metrics JSON and run records.
//! Every output carries a schema version and loaders reject versions they do
//! not know.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{EcmoError, Result};
use crate::fixtures::{Fixture, FixtureProblem};
use crate::pareto::{FrontEntry, ParetoFront};
use crate::problem::{EcmoProblem, MonomialFunction, MtblProblem, ScalarFunction, Term};
use crate::solvers::{TraceRecord, SCHEMA_VERSION};

pub const TRACE_COLUMNS: [&str; 9] = [
    "iter",
    "P",
    "kkt_sq",
    "kkt_rho",
    "kkt_z_norm",
    "kkt_primal_norm",
    "kkt_slack_norm",
    "rho",
    "h_norm",
];

pub const EPSILON_DEFINITION: &str =
    "additive epsilon: max over reference points r of min over front points p of max_s (p_s - r_s), clamped at 0";

fn check_version(found: u32) -> Result<()> {
    if found != SCHEMA_VERSION {
        return Err(EcmoError::Schema {
            found,
            expected: SCHEMA_VERSION,
        });
    }
    Ok(())
}

fn schema_line() -> String {
    format!("# schema_version={SCHEMA_VERSION}\n")
}

/// Reads the leading `# schema_version=N` line and returns the rest.
fn strip_schema_line(text: &str) -> Result<&str> {
    let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
    let version = first
        .trim()
        .strip_prefix("# schema_version=")
        .ok_or_else(|| EcmoError::input("CSV must start with a `# schema_version=N` line"))?;
    let found = version
        .parse()
        .map_err(|_| EcmoError::input(format!("bad schema version `{version}`")))?;
    check_version(found)?;
    Ok(rest)
}

fn csv_error(e: csv::Error) -> EcmoError {
    EcmoError::input(format!("CSV: {e}"))
}

fn parse_f64(field: &str, column: &str) -> Result<f64> {
    field.parse().map_err(|_| {
        EcmoError::input(format!(
            "column `{column}`: cannot parse `{field}` as a number"
        ))
    })
}

// ---------------------------------------------------------------- problem JSON

/// `{"monomial": [[coeff, [p_1, ..., p_k]], ...]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionSpec {
    pub monomial: Vec<(f64, Vec<u32>)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MtblSpec {
    pub p: usize,
    pub q: usize,
    pub lower_objective: FunctionSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema_version: Option<u32>,
    pub name: String,
    pub k: usize,
    pub objectives: Vec<FunctionSpec>,
    #[serde(default)]
    pub constraints: Vec<FunctionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mtbl: Option<MtblSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounding_box: Option<Vec<[f64; 2]>>,
}

impl FunctionSpec {
    fn to_function(&self, k: usize, field: &str) -> Result<ScalarFunction> {
        let terms = self
            .monomial
            .iter()
            .map(|(c, e)| Term::new(*c, e.clone()))
            .collect();
        MonomialFunction::new(k, terms)
            .map(Into::into)
            .map_err(|e| EcmoError::input(format!("{field}: {e}")))
    }

    fn from_function(f: &ScalarFunction) -> Option<Self> {
        f.as_monomial().map(|m| FunctionSpec {
            monomial: m
                .terms()
                .iter()
                .map(|t| (t.coeff, t.exponents.clone()))
                .collect(),
        })
    }
}

impl ProblemFile {
    pub fn to_problem(&self) -> Result<EcmoProblem> {
        if let Some(v) = self.schema_version {
            check_version(v)?;
        }
        if self.k == 0 {
            return Err(EcmoError::input("k: dimension must be positive"));
        }
        let convert = |list: &[FunctionSpec], field: &str| {
            list.iter()
                .enumerate()
                .map(|(i, f)| f.to_function(self.k, &format!("{field}[{i}]")))
                .collect::<Result<Vec<_>>>()
        };
        let objectives = convert(&self.objectives, "objectives")?;
        if objectives.is_empty() {
            return Err(EcmoError::input(
                "objectives: at least one objective is required",
            ));
        }
        let problem = match &self.mtbl {
            Some(m) => {
                if !self.constraints.is_empty() {
                    return Err(EcmoError::input(
                        "constraints: must be empty when `mtbl` is given (they are derived from the lower objective)",
                    ));
                }
                if m.p + m.q != self.k {
                    return Err(EcmoError::input(format!(
                        "mtbl: p + q = {} must equal k = {}",
                        m.p + m.q,
                        self.k
                    )));
                }
                MtblProblem {
                    name: self.name.clone(),
                    upper_objectives: objectives,
                    lower_objective: m
                        .lower_objective
                        .to_function(self.k, "mtbl.lower_objective")?,
                    p: m.p,
                    q: m.q,
                }
                .to_ecmo()?
            }
            None => EcmoProblem::new(
                self.name.clone(),
                self.k,
                objectives,
                convert(&self.constraints, "constraints")?,
            )?,
        };
        match &self.bounding_box {
            Some(bb) => problem
                .with_bounding_box(bb.iter().map(|[lo, hi]| (*lo, *hi)).collect())
                .map_err(|e| EcmoError::input(format!("bounding_box: {e}"))),
            None => Ok(problem),
        }
    }

    /// Polynomial fixtures only; native fixtures have no file form.
    pub fn from_fixture(fixture: &Fixture) -> Result<Self> {
        let not_polynomial = || {
            EcmoError::Capability(format!(
                "fixture `{}` uses native functions and cannot be exported",
                fixture.name
            ))
        };
        let specs = |fs: &[ScalarFunction]| {
            fs.iter()
                .map(FunctionSpec::from_function)
                .collect::<Option<Vec<_>>>()
                .ok_or_else(not_polynomial)
        };
        let (k, objectives, constraints, mtbl) = match &fixture.problem {
            FixtureProblem::Ecmo(p) => (
                p.dim(),
                specs(p.objectives())?,
                specs(p.constraints())?,
                None,
            ),
            FixtureProblem::Mtbl(m) => (
                m.dim(),
                specs(&m.upper_objectives)?,
                Vec::new(),
                Some(MtblSpec {
                    p: m.p,
                    q: m.q,
                    lower_objective: FunctionSpec::from_function(&m.lower_objective)
                        .ok_or_else(not_polynomial)?,
                }),
            ),
        };
        Ok(ProblemFile {
            schema_version: Some(SCHEMA_VERSION),
            name: fixture.name.to_string(),
            k,
            objectives,
            constraints,
            mtbl,
            bounding_box: Some(
                fixture
                    .bounding_box
                    .iter()
                    .map(|&(lo, hi)| [lo, hi])
                    .collect(),
            ),
        })
    }
}

pub fn parse_problem(text: &str) -> Result<ProblemFile> {
    serde_json::from_str(text).map_err(|e| EcmoError::input(format!("problem file: {e}")))
}

pub fn load_problem(path: &Path) -> Result<(ProblemFile, EcmoProblem)> {
    let text = fs::read_to_string(path)?;
    let file = parse_problem(&text)?;
    let problem = file.to_problem()?;
    Ok((file, problem))
}

pub fn save_problem(path: &Path, file: &ProblemFile) -> Result<()> {
    write_atomic(path, serde_json::to_string_pretty(file)?.as_bytes())
}

// ---------------------------------------------------------------- trace CSV

pub fn write_trace_csv<W: Write>(mut out: W, trace: &[TraceRecord]) -> Result<()> {
    out.write_all(schema_line().as_bytes())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRACE_COLUMNS).map_err(csv_error)?;
    for r in trace {
        let row = [
            r.iter.to_string(),
            r.penalty.to_string(),
            r.kkt_sq.to_string(),
            r.kkt_rho.to_string(),
            r.kkt_z_norm.to_string(),
            r.kkt_primal_norm.to_string(),
            r.kkt_slack_norm.to_string(),
            r.rho.to_string(),
            r.h_norm.to_string(),
        ];
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn trace_to_string(trace: &[TraceRecord]) -> Result<String> {
    let mut buf = Vec::new();
    write_trace_csv(&mut buf, trace)?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}

/// Parses a trace CSV. `delta_violation` is not part of the file and reads as 0.
pub fn parse_trace_csv(text: &str) -> Result<Vec<TraceRecord>> {
    let body = strip_schema_line(text)?;
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let headers = r.headers().map_err(csv_error)?.clone();
    if headers.iter().ne(TRACE_COLUMNS.iter().copied()) {
        return Err(EcmoError::input(format!(
            "trace header must be `{}`",
            TRACE_COLUMNS.join(",")
        )));
    }
    let mut out = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_error)?;
        let num = |i: usize| parse_f64(&rec[i], TRACE_COLUMNS[i]);
        out.push(TraceRecord {
            iter: rec[0]
                .parse()
                .map_err(|_| EcmoError::input(format!("column `iter`: bad value `{}`", &rec[0])))?,
            penalty: num(1)?,
            kkt_sq: num(2)?,
            kkt_rho: num(3)?,
            kkt_z_norm: num(4)?,
            kkt_primal_norm: num(5)?,
            kkt_slack_norm: num(6)?,
            rho: num(7)?,
            h_norm: num(8)?,
            delta_violation: 0.0,
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------- front CSV

/// Columns `run_id, lambda_1..S, z_1..k, F_1..S`, optionally followed by
/// `inv_F_1..S` when `inverse` is set. Entries without preferences or decision
/// points get no such columns.
pub fn write_front_csv<W: Write>(mut out: W, front: &ParetoFront, inverse: bool) -> Result<()> {
    out.write_all(schema_line().as_bytes())?;
    let first = front.entries.first();
    let s = first.map_or(0, |e| e.f.len());
    let n_lambda = first.map_or(0, |e| e.lambda.len());
    let k = first.map_or(0, |e| e.z.len());
    for e in &front.entries {
        if e.f.len() != s || e.lambda.len() != n_lambda || e.z.len() != k {
            return Err(EcmoError::input("front entries have inconsistent lengths"));
        }
    }
    let mut header = vec!["run_id".to_string()];
    header.extend((1..=n_lambda).map(|i| format!("lambda_{i}")));
    header.extend((1..=k).map(|i| format!("z_{i}")));
    header.extend((1..=s).map(|i| format!("F_{i}")));
    if inverse {
        header.extend((1..=s).map(|i| format!("inv_F_{i}")));
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&header).map_err(csv_error)?;
    for e in &front.entries {
        let mut row = vec![e.run_id.clone()];
        row.extend(e.lambda.iter().chain(&e.z).chain(&e.f).map(f64::to_string));
        if inverse {
            row.extend(e.f.iter().map(|f| (1.0 / f).to_string()));
        }
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn front_to_string(front: &ParetoFront, inverse: bool) -> Result<String> {
    let mut buf = Vec::new();
    write_front_csv(&mut buf, front, inverse)?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}

pub fn parse_front_csv(text: &str) -> Result<ParetoFront> {
    let body = strip_schema_line(text)?;
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let headers = r.headers().map_err(csv_error)?.clone();
    if headers.get(0) != Some("run_id") {
        return Err(EcmoError::input(
            "front CSV must start with a `run_id` column",
        ));
    }
    let mut cols: [Vec<usize>; 3] = Default::default();
    for (i, h) in headers.iter().enumerate().skip(1) {
        let slot = if h.starts_with("lambda_") {
            0
        } else if h.starts_with("z_") {
            1
        } else if h.starts_with("F_") {
            2
        } else if h.starts_with("inv_F_") {
            continue;
        } else {
            return Err(EcmoError::input(format!("front CSV: unknown column `{h}`")));
        };
        cols[slot].push(i);
    }
    if cols[2].is_empty() {
        return Err(EcmoError::input("front CSV has no F columns"));
    }
    let mut entries = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_error)?;
        let take = |idx: &[usize]| {
            idx.iter()
                .map(|&i| parse_f64(&rec[i], &headers[i]))
                .collect::<Result<Vec<_>>>()
        };
        entries.push(FrontEntry {
            run_id: rec[0].to_string(),
            lambda: take(&cols[0])?,
            z: take(&cols[1])?,
            f: take(&cols[2])?,
        });
    }
    Ok(ParetoFront { entries })
}

// ---------------------------------------------------------------- metrics / records

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontMetrics {
    pub schema_version: u32,
    pub front_size: usize,
    pub hv: f64,
    pub ref_point: Vec<f64>,
    pub epsilon: Option<f64>,
    pub reference_name: Option<String>,
    pub epsilon_definition: String,
}

/// Where a problem came from and a digest of its definition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemRef {
    pub source: String,
    pub content_sha256: String,
}

impl ProblemRef {
    pub fn from_bytes(source: impl Into<String>, bytes: &[u8]) -> Self {
        ProblemRef {
            source: source.into(),
            content_sha256: hex::encode(Sha256::digest(bytes)),
        }
    }

    /// Hashes the exported problem file for polynomial fixtures, and the name and
    /// notes otherwise.
    pub fn from_fixture(fixture: &Fixture) -> Result<Self> {
        let source = format!("fixture:{}", fixture.name);
        let bytes = match ProblemFile::from_fixture(fixture) {
            Ok(file) => serde_json::to_vec(&file)?,
            Err(_) => format!("{}\n{}", fixture.name, fixture.notes).into_bytes(),
        };
        Ok(Self::from_bytes(source, &bytes))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub command: Vec<String>,
    pub config: serde_json::Value,
    pub problem: ProblemRef,
    pub results: serde_json::Value,
    pub environment: String,
}

impl RunRecord {
    pub fn new(
        command: Vec<String>,
        config: serde_json::Value,
        problem: ProblemRef,
        results: serde_json::Value,
    ) -> Self {
        RunRecord {
            schema_version: SCHEMA_VERSION,
            timestamp: unix_timestamp(),
            command,
            config,
            problem,
            results,
            environment: environment_note(),
        }
    }
}

/// Seconds since the Unix epoch, zero if the clock is before it.
pub fn unix_timestamp() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

pub fn environment_note() -> String {
    format!(
        "ecmo-core {} ({}-{})",
        env!("CARGO_PKG_VERSION"),
        std::env::consts::ARCH,
        std::env::consts::OS
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub run_id: String,
    pub lambda: Vec<f64>,
    pub seed: u64,
    pub status: crate::explorer::RunStatus,
    pub error: Option<String>,
    pub record_file: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepManifest {
    pub schema_version: u32,
    pub timestamp: u64,
    pub command: Vec<String>,
    pub problem: ProblemRef,
    pub spec: crate::explorer::SweepSpec,
    pub solver: crate::explorer::SolverKind,
    pub runs: Vec<ManifestEntry>,
    pub front_file: String,
    pub metrics_file: String,
    pub environment: String,
}

/// Loads any JSON output after checking its `schema_version` field.
pub fn load_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let mut text = String::new();
    fs::File::open(path)?.read_to_string(&mut text)?;
    parse_json(&text)
}

pub fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let found = value
        .get("schema_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| EcmoError::input("missing schema_version"))?;
    check_version(u32::try_from(found).unwrap_or(u32::MAX))?;
    Ok(serde_json::from_value(value)?)
}

pub fn save_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub fn load_front_csv(path: &Path) -> Result<ParetoFront> {
    parse_front_csv(&fs::read_to_string(path)?)
}

pub fn load_trace_csv(path: &Path) -> Result<Vec<TraceRecord>> {
    parse_trace_csv(&fs::read_to_string(path)?)
}

/// Writes to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}
