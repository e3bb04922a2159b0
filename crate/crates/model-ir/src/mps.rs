use std::collections::BTreeMap;

use thiserror::Error;

use crate::ir::*;

#[derive(Debug, Error)]
pub enum MpsError {
    #[error("model has nonlinear terms; MPS export covers the linear subset only")]
    NonlinearPresent,
    #[error("name table overflow: {0} names exceed the 8-character namespace")]
    NameTableOverflow(usize),
    #[error("MPS parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Mapping between mangled 8-character MPS names and the model's semantic
/// tags, plus whether the objective was negated to fit the always-minimize
/// encoding of the writer.
#[derive(Debug, Clone)]
pub struct NameTable {
    pub columns: Vec<(String, String)>,
    pub rows: Vec<(String, String)>,
    pub objective_negated: bool,
    by_mangled: BTreeMap<String, usize>,
}

impl NameTable {
    pub fn column_index(&self, mangled: &str) -> Option<usize> {
        self.by_mangled.get(mangled).copied()
    }

    pub fn original_column(&self, mangled: &str) -> Option<&str> {
        self.column_index(mangled).map(|i| self.columns[i].1.as_str())
    }
}

/// Format a number for an MPS field. Values keep their exact f64 identity:
/// the shortest round-trip form when it fits the classic 12-character field,
/// 17 significant digits otherwise (overflowing the classic width rather
/// than perturbing the matrix; readers tokenize on whitespace).
fn mps_num(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e11 {
        return format!("{}", v as i64);
    }
    let short = format!("{v}");
    if short.len() <= 12 {
        return short;
    }
    format!("{v:.16e}")
}

/// Write the linear model in MPS form.
///
/// The writer always emits a minimization problem: maximization objectives
/// are negated and the flip is recorded in the returned [`NameTable`], which
/// [`read_solution`](crate::read_solution) undoes. Binaries are declared via
/// `BV` bound rows; column order is the model's variable order.
pub fn write_mps(m: &ModelIR) -> Result<(String, NameTable), MpsError> {
    if !m.nonlinear.is_empty() {
        return Err(MpsError::NonlinearPresent);
    }
    if m.vars.len() > 9_999_999 || m.constraints.len() > 9_999_999 {
        return Err(MpsError::NameTableOverflow(m.vars.len().max(m.constraints.len())));
    }

    let col_name = |i: usize| format!("C{i:07}");
    let row_name = |i: usize| format!("R{i:07}");
    let negate = m.objective.sense == Sense::Maximize;
    let sign = if negate { -1.0 } else { 1.0 };

    let mut columns = Vec::with_capacity(m.vars.len());
    let mut by_mangled = BTreeMap::new();
    for (i, v) in m.vars.iter().enumerate() {
        let mangled = col_name(i);
        by_mangled.insert(mangled.clone(), i);
        columns.push((mangled, v.name.clone()));
    }
    let rows: Vec<(String, String)> = m
        .constraints
        .iter()
        .enumerate()
        .map(|(i, c)| (row_name(i), c.name.clone()))
        .collect();

    // Objective coefficients and per-column row entries.
    let mut obj_coeff = vec![0.0; m.vars.len()];
    for &(id, c) in &m.objective.terms {
        obj_coeff[id.0] += c * sign;
    }
    let mut col_entries: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m.vars.len()];
    for (ri, c) in m.constraints.iter().enumerate() {
        let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
        for &(id, coeff) in &c.terms {
            *merged.entry(id.0).or_insert(0.0) += coeff;
        }
        for (ci, coeff) in merged {
            if coeff != 0.0 {
                col_entries[ci].push((ri, coeff));
            }
        }
    }

    let mut out = String::new();
    out.push_str(&format!("NAME          {}\n", m.name));
    out.push_str("ROWS\n");
    out.push_str(" N  OBJ\n");
    for (ri, c) in m.constraints.iter().enumerate() {
        let kind = match c.cmp {
            Cmp::Le => 'L',
            Cmp::Eq => 'E',
            Cmp::Ge => 'G',
        };
        out.push_str(&format!(" {}  {}\n", kind, row_name(ri)));
    }

    out.push_str("COLUMNS\n");
    for (ci, entries) in col_entries.iter().enumerate() {
        let col = col_name(ci);
        // Every column appears at least through its objective entry so the
        // reader learns all variables and their order.
        let mut fields: Vec<(String, f64)> = vec![("OBJ".to_string(), obj_coeff[ci])];
        for &(ri, coeff) in entries {
            fields.push((row_name(ri), coeff));
        }
        let mut i = 0;
        while i < fields.len() {
            if i + 1 < fields.len() {
                out.push_str(&format!(
                    "    {:<8}  {:<8}  {:<12}  {:<8}  {}\n",
                    col,
                    fields[i].0,
                    mps_num(fields[i].1),
                    fields[i + 1].0,
                    mps_num(fields[i + 1].1)
                ));
                i += 2;
            } else {
                out.push_str(&format!("    {:<8}  {:<8}  {}\n", col, fields[i].0, mps_num(fields[i].1)));
                i += 1;
            }
        }
    }

    out.push_str("RHS\n");
    for (ri, c) in m.constraints.iter().enumerate() {
        if c.rhs != 0.0 {
            out.push_str(&format!("    RHS       {:<8}  {}\n", row_name(ri), mps_num(c.rhs)));
        }
    }

    out.push_str("BOUNDS\n");
    for (ci, v) in m.vars.iter().enumerate() {
        let col = col_name(ci);
        match v.kind {
            VarKind::Binary => {
                if v.lower == v.upper {
                    out.push_str(&format!(" FX BND       {:<8}  {}\n", col, mps_num(v.lower)));
                } else {
                    out.push_str(&format!(" BV BND       {col}\n"));
                }
            }
            VarKind::Continuous => {
                let lo_finite = v.lower.is_finite();
                let hi_finite = v.upper.is_finite();
                if lo_finite && hi_finite && v.lower == v.upper {
                    out.push_str(&format!(" FX BND       {:<8}  {}\n", col, mps_num(v.lower)));
                    continue;
                }
                if !lo_finite && !hi_finite {
                    out.push_str(&format!(" FR BND       {col}\n"));
                    continue;
                }
                if !lo_finite {
                    out.push_str(&format!(" MI BND       {col}\n"));
                } else if v.lower != 0.0 {
                    out.push_str(&format!(" LO BND       {:<8}  {}\n", col, mps_num(v.lower)));
                }
                if hi_finite {
                    out.push_str(&format!(" UP BND       {:<8}  {}\n", col, mps_num(v.upper)));
                }
            }
        }
    }
    out.push_str("ENDATA\n");

    let table = NameTable { columns, rows, objective_negated: negate, by_mangled };
    Ok((out, table))
}

/// Parse an MPS file written by [`write_mps`] (plus the common `LO`, `MI`,
/// `FR`, `PL` bound rows). The result is a minimization model whose variable
/// names are the file's column names, in first-appearance order.
pub fn read_mps(text: &str) -> Result<ModelIR, MpsError> {
    #[derive(PartialEq)]
    enum Section {
        None,
        Rows,
        Columns,
        Rhs,
        Bounds,
        Done,
    }
    let err = |line: usize, msg: &str| MpsError::Parse { line, msg: msg.to_string() };

    let mut m = ModelIR::new("mps", Sense::Minimize, Provenance::L1);
    let mut section = Section::None;
    let mut row_cmp: BTreeMap<String, Cmp> = BTreeMap::new();
    let mut row_order: Vec<String> = Vec::new();
    let mut obj_row: Option<String> = None;
    let mut entries: Vec<(String, String, f64)> = Vec::new(); // col, row, coeff
    let mut rhs: BTreeMap<String, f64> = BTreeMap::new();
    let mut col_order: Vec<String> = Vec::new();
    let mut col_seen: BTreeMap<String, ()> = BTreeMap::new();
    let mut bounds: Vec<(String, String, Option<f64>)> = Vec::new();

    for (ln, raw) in text.lines().enumerate() {
        let ln = ln + 1;
        if raw.starts_with('*') || raw.trim().is_empty() {
            continue;
        }
        let is_header = !raw.starts_with(' ');
        let tokens: Vec<&str> = raw.split_whitespace().collect();
        if is_header {
            section = match tokens[0] {
                "NAME" => {
                    if tokens.len() > 1 {
                        m.name = tokens[1].to_string();
                    }
                    Section::None
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "RANGES" => return Err(err(ln, "RANGES section not supported")),
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::Done,
                other => return Err(err(ln, &format!("unknown section `{other}`"))),
            };
            continue;
        }
        match section {
            Section::Rows => {
                if tokens.len() != 2 {
                    return Err(err(ln, "expected `<type> <row>`"));
                }
                match tokens[0] {
                    "N" => {
                        if obj_row.is_none() {
                            obj_row = Some(tokens[1].to_string());
                        }
                    }
                    "L" | "E" | "G" => {
                        let cmp = match tokens[0] {
                            "L" => Cmp::Le,
                            "E" => Cmp::Eq,
                            _ => Cmp::Ge,
                        };
                        row_cmp.insert(tokens[1].to_string(), cmp);
                        row_order.push(tokens[1].to_string());
                    }
                    other => return Err(err(ln, &format!("unknown row type `{other}`"))),
                }
            }
            Section::Columns => {
                if tokens.len() < 3 || tokens.len() % 2 == 0 {
                    return Err(err(ln, "expected `<col> (<row> <value>)+`"));
                }
                let col = tokens[0].to_string();
                if col_seen.insert(col.clone(), ()).is_none() {
                    col_order.push(col.clone());
                }
                let mut i = 1;
                while i < tokens.len() {
                    let row = tokens[i].to_string();
                    let value: f64 = tokens[i + 1]
                        .parse()
                        .map_err(|_| err(ln, &format!("bad number `{}`", tokens[i + 1])))?;
                    entries.push((col.clone(), row, value));
                    i += 2;
                }
            }
            Section::Rhs => {
                if tokens.len() < 3 || tokens.len() % 2 == 0 {
                    return Err(err(ln, "expected `<set> (<row> <value>)+`"));
                }
                let mut i = 1;
                while i < tokens.len() {
                    let value: f64 = tokens[i + 1]
                        .parse()
                        .map_err(|_| err(ln, &format!("bad number `{}`", tokens[i + 1])))?;
                    rhs.insert(tokens[i].to_string(), value);
                    i += 2;
                }
            }
            Section::Bounds => {
                let kind = tokens[0];
                match kind {
                    "UP" | "LO" | "FX" => {
                        if tokens.len() != 4 {
                            return Err(err(ln, "expected `<kind> <set> <col> <value>`"));
                        }
                        let value: f64 = tokens[3]
                            .parse()
                            .map_err(|_| err(ln, &format!("bad number `{}`", tokens[3])))?;
                        bounds.push((kind.to_string(), tokens[2].to_string(), Some(value)));
                    }
                    "BV" | "MI" | "FR" | "PL" => {
                        if tokens.len() != 3 {
                            return Err(err(ln, "expected `<kind> <set> <col>`"));
                        }
                        bounds.push((kind.to_string(), tokens[2].to_string(), None));
                    }
                    other => return Err(err(ln, &format!("unknown bound kind `{other}`"))),
                }
            }
            Section::None | Section::Done => {
                return Err(err(ln, "data outside a section"));
            }
        }
    }

    let obj_row = obj_row.ok_or_else(|| err(0, "no objective row"))?;

    // Default MPS bounds are [0, +inf).
    let mut ids: BTreeMap<String, VarId> = BTreeMap::new();
    for col in &col_order {
        let id = m.add_var(col.clone(), VarKind::Continuous, 0.0, f64::INFINITY);
        ids.insert(col.clone(), id);
    }
    let mut row_terms: BTreeMap<String, Vec<(VarId, f64)>> = BTreeMap::new();
    for (col, row, value) in entries {
        let id = ids[&col];
        if row == obj_row {
            if value != 0.0 {
                m.objective.terms.push((id, value));
            }
        } else {
            if !row_cmp.contains_key(&row) {
                return Err(err(0, &format!("entry references unknown row `{row}`")));
            }
            row_terms.entry(row).or_default().push((id, value));
        }
    }
    for row in &row_order {
        let terms = row_terms.remove(row).unwrap_or_default();
        m.add_constraint(row.clone(), terms, row_cmp[row], rhs.get(row).copied().unwrap_or(0.0));
    }
    for (kind, col, value) in bounds {
        let id = *ids
            .get(&col)
            .ok_or_else(|| err(0, &format!("bound references unknown column `{col}`")))?;
        let v = &mut m.vars[id.0];
        match kind.as_str() {
            "UP" => v.upper = value.unwrap(),
            "LO" => v.lower = value.unwrap(),
            "FX" => {
                v.lower = value.unwrap();
                v.upper = value.unwrap();
            }
            "MI" => v.lower = f64::NEG_INFINITY,
            "PL" => v.upper = f64::INFINITY,
            "FR" => {
                v.lower = f64::NEG_INFINITY;
                v.upper = f64::INFINITY;
            }
            "BV" => {
                v.kind = VarKind::Binary;
                v.lower = 0.0;
                v.upper = 1.0;
            }
            _ => unreachable!(),
        }
    }
    Ok(m)
}
