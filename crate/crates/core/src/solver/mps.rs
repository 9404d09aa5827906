//! MPS export of assembled problems plus an independent reader used for
//! round-trip cross-checks against external solvers.
//!
//! The writer emits the classic section layout (ROWS / COLUMNS / RHS /
//! BOUNDS) with one entry per line, binaries wrapped in INTORG/INTEND
//! markers, and values printed with Rust's shortest-round-trip formatting so
//! files are byte-stable and numerically exact.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use thiserror::Error;

use super::lp::{LinearProgram, RowKind};
use crate::milp::MilpProblem;

#[derive(Debug, Error)]
pub enum MpsReadError {
    #[error("line {0}: {1}")]
    Malformed(usize, String),
    #[error("unknown row {0}")]
    UnknownRow(String),
    #[error("unknown column {0}")]
    UnknownColumn(String),
    #[error("missing section {0}")]
    MissingSection(&'static str),
    #[error("unsupported feature: {0}")]
    Unsupported(String),
}

const OBJ_ROW: &str = "COST";

fn field(name: &str) -> String {
    format!("{name:<10}")
}

/// Serializes an LP with binary columns to MPS text.
pub fn render_lp(
    name: &str,
    lp: &LinearProgram,
    binaries: &[usize],
    col_names: &[String],
    row_names: &[String],
) -> String {
    assert_eq!(col_names.len(), lp.num_cols());
    assert_eq!(row_names.len(), lp.num_rows());
    let mut out = String::new();
    let _ = writeln!(out, "NAME          {name}");
    out.push_str("ROWS\n");
    let _ = writeln!(out, " N  {OBJ_ROW}");
    for (i, kind) in lp.row_kind.iter().enumerate() {
        let tag = match kind {
            RowKind::Le => "L",
            RowKind::Eq => "E",
        };
        let _ = writeln!(out, " {tag}  {}", row_names[i]);
    }

    out.push_str("COLUMNS\n");
    let is_binary = {
        let mut mask = vec![false; lp.num_cols()];
        for &j in binaries {
            mask[j] = true;
        }
        mask
    };
    let mut in_integer_block = false;
    let mut marker_count = 0usize;
    for j in 0..lp.num_cols() {
        if is_binary[j] != in_integer_block {
            let tag = if is_binary[j] { "'INTORG'" } else { "'INTEND'" };
            let _ = writeln!(
                out,
                "    {}  {}  {tag}",
                field(&format!("MARKER{marker_count}")),
                field("'MARKER'")
            );
            marker_count += 1;
            in_integer_block = is_binary[j];
        }
        if lp.objective[j] != 0.0 {
            let _ = writeln!(
                out,
                "    {}  {}  {}",
                field(&col_names[j]),
                field(OBJ_ROW),
                lp.objective[j]
            );
        }
        for &(row, coef) in lp.col(j) {
            let _ = writeln!(
                out,
                "    {}  {}  {}",
                field(&col_names[j]),
                field(&row_names[row as usize]),
                coef
            );
        }
    }
    if in_integer_block {
        let _ = writeln!(
            out,
            "    {}  {}  'INTEND'",
            field(&format!("MARKER{marker_count}")),
            field("'MARKER'")
        );
    }

    out.push_str("RHS\n");
    for i in 0..lp.num_rows() {
        let _ = writeln!(
            out,
            "    {}  {}  {}",
            field("RHS"),
            field(&row_names[i]),
            lp.rhs[i]
        );
    }

    out.push_str("BOUNDS\n");
    for j in 0..lp.num_cols() {
        let (lo, hi) = (lp.col_lower[j], lp.col_upper[j]);
        if lo == hi {
            let _ = writeln!(out, " FX {}  {}  {lo}", field("BND"), field(&col_names[j]));
            continue;
        }
        if lo.is_finite() {
            let _ = writeln!(out, " LO {}  {}  {lo}", field("BND"), field(&col_names[j]));
        } else {
            let _ = writeln!(out, " MI {}  {}", field("BND"), field(&col_names[j]));
        }
        if hi.is_finite() {
            let _ = writeln!(out, " UP {}  {}  {hi}", field("BND"), field(&col_names[j]));
        } else {
            let _ = writeln!(out, " PL {}  {}", field("BND"), field(&col_names[j]));
        }
    }
    out.push_str("ENDATA\n");
    out
}

fn block_names(n: usize) -> (Vec<String>, Vec<String>) {
    let mut cols = Vec::with_capacity(6 * n);
    for prefix in ["XA", "XB", "TA", "TB", "ZC", "ZD"] {
        for i in 1..=n {
            cols.push(format!("{prefix}{i}"));
        }
    }
    let mut rows = Vec::with_capacity(13 * n);
    for prefix in [
        "EPBA", "EPSA", "EPBB", "EPSB", "CAPU", "CAPL", "RMPU", "RMPL", "LNA1", "LNA2", "LNB1",
        "LNB2", "ZSUM",
    ] {
        for i in 1..=n {
            rows.push(format!("{prefix}{i}"));
        }
    }
    (cols, rows)
}

/// Renders an assembled arbitrage MILP with block-aware row/column names.
pub fn render_problem(problem: &MilpProblem, name: &str) -> String {
    let n = problem.horizon();
    let (cols, mut rows) = block_names(n);
    if problem.num_rows() > 13 * n {
        rows.push("TSOC".to_string());
    }
    render_lp(name, &problem.to_lp(), problem.binary_idx(), &cols, &rows)
}

/// Writes an assembled arbitrage MILP as a fixed-layout MPS file.
pub fn write_mps(problem: &MilpProblem, name: &str, path: &Path) -> io::Result<()> {
    let text = render_problem(problem, name);
    let mut file = std::fs::File::create(path)?;
    file.write_all(text.as_bytes())
}

/// A parsed MPS model: the LP, which columns are integer, and the names.
#[derive(Debug, Clone)]
pub struct MpsModel {
    pub name: String,
    pub lp: LinearProgram,
    pub binaries: Vec<usize>,
    pub col_names: Vec<String>,
    pub row_names: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Preamble,
    Rows,
    Columns,
    Rhs,
    Ranges,
    Bounds,
    Done,
}

/// Independent MPS reader (shares no code with the writer). Supports N/L/G/E
/// rows, INTORG/INTEND integer markers, and LO/UP/FX/FR/MI/PL/BV bounds;
/// G-rows are normalized into `<=` form by negation.
pub fn read_mps(text: &str) -> Result<MpsModel, MpsReadError> {
    let mut name = String::new();
    let mut section = Section::Preamble;

    struct RowInfo {
        name: String,
        kind: char,
        entries: Vec<(usize, f64)>,
        rhs: f64,
    }
    let mut obj_row: Option<String> = None;
    let mut rows: Vec<RowInfo> = Vec::new();
    let mut row_index: std::collections::HashMap<String, usize> = std::collections::HashMap::new();
    let mut col_names: Vec<String> = Vec::new();
    let mut col_index: std::collections::HashMap<String, usize> = std::collections::HashMap::new();
    let mut objective: Vec<f64> = Vec::new();
    let mut col_lower: Vec<f64> = Vec::new();
    let mut col_upper: Vec<f64> = Vec::new();
    let mut upper_was_set: Vec<bool> = Vec::new();
    let mut integer: Vec<bool> = Vec::new();
    let mut in_integer = false;

    let parse_num = |tok: &str, lineno: usize| -> Result<f64, MpsReadError> {
        tok.parse::<f64>()
            .map_err(|_| MpsReadError::Malformed(lineno, format!("bad number {tok}")))
    };

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim_end();
        if line.is_empty() || line.starts_with('*') {
            continue;
        }
        let is_header = !raw.starts_with(' ');
        if is_header {
            let mut parts = line.split_whitespace();
            match parts.next().unwrap_or("") {
                "NAME" => {
                    name = parts.next().unwrap_or("").to_string();
                    continue;
                }
                "ROWS" => {
                    section = Section::Rows;
                    continue;
                }
                "COLUMNS" => {
                    section = Section::Columns;
                    continue;
                }
                "RHS" => {
                    section = Section::Rhs;
                    continue;
                }
                "RANGES" => {
                    section = Section::Ranges;
                    continue;
                }
                "BOUNDS" => {
                    section = Section::Bounds;
                    continue;
                }
                "ENDATA" => {
                    section = Section::Done;
                    break;
                }
                other => {
                    return Err(MpsReadError::Malformed(
                        lineno + 1,
                        format!("unknown section {other}"),
                    ))
                }
            }
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match section {
            Section::Rows => {
                if tokens.len() != 2 {
                    return Err(MpsReadError::Malformed(lineno + 1, line.to_string()));
                }
                let kind = tokens[0].chars().next().unwrap().to_ascii_uppercase();
                match kind {
                    'N' => {
                        if obj_row.is_none() {
                            obj_row = Some(tokens[1].to_string());
                        }
                    }
                    'L' | 'G' | 'E' => {
                        row_index.insert(tokens[1].to_string(), rows.len());
                        rows.push(RowInfo {
                            name: tokens[1].to_string(),
                            kind,
                            entries: Vec::new(),
                            rhs: 0.0,
                        });
                    }
                    other => {
                        return Err(MpsReadError::Malformed(
                            lineno + 1,
                            format!("row kind {other}"),
                        ))
                    }
                }
            }
            Section::Columns => {
                if tokens.len() >= 3 && tokens[1] == "'MARKER'" {
                    match *tokens.last().unwrap() {
                        "'INTORG'" => in_integer = true,
                        "'INTEND'" => in_integer = false,
                        other => return Err(MpsReadError::Unsupported(format!("marker {other}"))),
                    }
                    continue;
                }
                if tokens.len() != 3 && tokens.len() != 5 {
                    return Err(MpsReadError::Malformed(lineno + 1, line.to_string()));
                }
                let col = *col_index.entry(tokens[0].to_string()).or_insert_with(|| {
                    col_names.push(tokens[0].to_string());
                    objective.push(0.0);
                    col_lower.push(0.0);
                    col_upper.push(f64::INFINITY);
                    upper_was_set.push(false);
                    integer.push(in_integer);
                    col_names.len() - 1
                });
                for pair in tokens[1..].chunks(2) {
                    let value = parse_num(pair[1], lineno + 1)?;
                    if Some(pair[0]) == obj_row.as_deref() {
                        objective[col] = value;
                    } else {
                        let row = *row_index
                            .get(pair[0])
                            .ok_or_else(|| MpsReadError::UnknownRow(pair[0].to_string()))?;
                        rows[row].entries.push((col, value));
                    }
                }
            }
            Section::Rhs => {
                if tokens.len() != 3 && tokens.len() != 5 {
                    return Err(MpsReadError::Malformed(lineno + 1, line.to_string()));
                }
                for pair in tokens[1..].chunks(2) {
                    if Some(pair[0]) == obj_row.as_deref() {
                        continue; // objective offset unsupported, ignored
                    }
                    let row = *row_index
                        .get(pair[0])
                        .ok_or_else(|| MpsReadError::UnknownRow(pair[0].to_string()))?;
                    rows[row].rhs = parse_num(pair[1], lineno + 1)?;
                }
            }
            Section::Ranges => {
                return Err(MpsReadError::Unsupported("RANGES section".to_string()));
            }
            Section::Bounds => {
                if tokens.len() < 3 {
                    return Err(MpsReadError::Malformed(lineno + 1, line.to_string()));
                }
                let col = *col_index
                    .get(tokens[2])
                    .ok_or_else(|| MpsReadError::UnknownColumn(tokens[2].to_string()))?;
                let value = if tokens.len() > 3 {
                    parse_num(tokens[3], lineno + 1)?
                } else {
                    0.0
                };
                match tokens[0].to_ascii_uppercase().as_str() {
                    "LO" => col_lower[col] = value,
                    "UP" => {
                        col_upper[col] = value;
                        upper_was_set[col] = true;
                        // Classic quirk: a negative upper bound on a column
                        // with default lower bound drops the lower to -inf.
                        if value < 0.0 && col_lower[col] == 0.0 {
                            col_lower[col] = f64::NEG_INFINITY;
                        }
                    }
                    "FX" => {
                        col_lower[col] = value;
                        col_upper[col] = value;
                        upper_was_set[col] = true;
                    }
                    "FR" => {
                        col_lower[col] = f64::NEG_INFINITY;
                        col_upper[col] = f64::INFINITY;
                    }
                    "MI" => col_lower[col] = f64::NEG_INFINITY,
                    "PL" => col_upper[col] = f64::INFINITY,
                    "BV" => {
                        col_lower[col] = 0.0;
                        col_upper[col] = 1.0;
                        upper_was_set[col] = true;
                        integer[col] = true;
                    }
                    other => return Err(MpsReadError::Unsupported(format!("bound kind {other}"))),
                }
            }
            Section::Preamble | Section::Done => {
                return Err(MpsReadError::Malformed(lineno + 1, line.to_string()))
            }
        }
    }
    if section == Section::Preamble {
        return Err(MpsReadError::MissingSection("ROWS"));
    }
    // Integer columns without an explicit upper bound default to [0, 1].
    for j in 0..col_names.len() {
        if integer[j] && !upper_was_set[j] {
            col_upper[j] = 1.0;
        }
    }

    let mut lp = LinearProgram::new(col_names.len());
    for j in 0..col_names.len() {
        lp.set_objective(j, objective[j]);
        lp.set_bounds(j, col_lower[j], col_upper[j]);
    }
    let mut row_names = Vec::with_capacity(rows.len());
    for row in &rows {
        row_names.push(row.name.clone());
        match row.kind {
            'L' => {
                lp.add_row(RowKind::Le, row.rhs, &row.entries);
            }
            'E' => {
                lp.add_row(RowKind::Eq, row.rhs, &row.entries);
            }
            'G' => {
                let negated: Vec<(usize, f64)> =
                    row.entries.iter().map(|&(c, v)| (c, -v)).collect();
                lp.add_row(RowKind::Le, -row.rhs, &negated);
            }
            _ => unreachable!(),
        }
    }
    let binaries: Vec<usize> = (0..col_names.len()).filter(|&j| integer[j]).collect();
    Ok(MpsModel {
        name,
        lp,
        binaries,
        col_names,
        row_names,
    })
}
