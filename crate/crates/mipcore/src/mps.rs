//! Fixed-format MPS export and import.
//!
//! Sections NAME, ROWS, COLUMNS, RHS, BOUNDS and ENDATA are supported.
//! Binaries are written as `BV` bounds; on import both `BV` bounds and
//! `MARKER`/`INTORG` blocks mark a column binary. Fields are laid out in the
//! classic fixed columns but names may be longer than eight characters, so
//! the reader splits on whitespace.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{ModelError, MpsError};
use crate::model::{MipModel, Sense, VarKind};

fn objective_row_name(model: &MipModel) -> String {
    let mut name = String::from("OBJ");
    while model.constraints().iter().any(|c| c.name == name) {
        name.push('_');
    }
    name
}

/// Renders `model` as MPS text.
pub fn write_mps(model: &MipModel) -> Result<String, MpsError> {
    model.check()?;
    let obj = objective_row_name(model);
    let mut out = String::new();
    let name = if model.name.is_empty() { "MODEL" } else { model.name.as_str() };
    writeln!(out, "NAME          {name}").unwrap();
    writeln!(out, "ROWS").unwrap();
    writeln!(out, " N  {obj}").unwrap();
    for c in model.constraints() {
        let t = match c.sense {
            Sense::Le => "L",
            Sense::Eq => "E",
            Sense::Ge => "G",
        };
        writeln!(out, " {t}  {}", c.name).unwrap();
    }

    let mut by_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); model.num_vars()];
    for (i, c) in model.constraints().iter().enumerate() {
        for &(j, a) in &c.coeffs {
            by_col[j].push((i, a));
        }
    }
    writeln!(out, "COLUMNS").unwrap();
    for (j, v) in model.variables().iter().enumerate() {
        if v.obj != 0.0 || by_col[j].is_empty() {
            writeln!(out, "    {:<8}  {:<8}  {}", v.name, obj, v.obj).unwrap();
        }
        for &(i, a) in &by_col[j] {
            writeln!(out, "    {:<8}  {:<8}  {}", v.name, model.constraints()[i].name, a).unwrap();
        }
    }
    writeln!(out, "RHS").unwrap();
    for c in model.constraints() {
        if c.rhs != 0.0 {
            writeln!(out, "    {:<8}  {:<8}  {}", "RHS", c.name, c.rhs).unwrap();
        }
    }
    writeln!(out, "BOUNDS").unwrap();
    for v in model.variables() {
        if v.kind == VarKind::Binary {
            writeln!(out, " BV {:<8}  {}", "BND", v.name).unwrap();
        }
    }
    writeln!(out, "ENDATA").unwrap();
    Ok(out)
}

pub fn export_mps(model: &MipModel, path: impl AsRef<Path>) -> Result<(), MpsError> {
    let text = write_mps(model)?;
    fs::write(path, text)?;
    Ok(())
}

pub fn import_mps(path: impl AsRef<Path>) -> Result<MipModel, MpsError> {
    let text = fs::read_to_string(path)?;
    read_mps(&text)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Rows,
    Columns,
    Rhs,
    Bounds,
    End,
}

struct RowDecl {
    name: String,
    sense: Sense,
}

fn parse_err(line: usize, message: impl Into<String>) -> MpsError {
    MpsError::Parse { line, message: message.into() }
}

fn number(line: usize, s: &str) -> Result<f64, MpsError> {
    s.parse::<f64>().map_err(|_| parse_err(line, format!("invalid number `{s}`")))
}

/// Parses MPS text produced by [`write_mps`] or any file restricted to the
/// supported subset.
pub fn read_mps(text: &str) -> Result<MipModel, MpsError> {
    let mut name = String::new();
    let mut section = Section::None;
    let mut objective: Option<String> = None;
    let mut rows: Vec<RowDecl> = Vec::new();
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut cols: Vec<(String, VarKind, f64)> = Vec::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut entries: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let mut in_integer_block = false;

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        if raw.trim().is_empty() || raw.starts_with('*') {
            continue;
        }
        if !raw.starts_with(' ') && !raw.starts_with('\t') {
            let mut fields = raw.split_whitespace();
            let head = fields.next().unwrap_or_default();
            section = match head {
                "NAME" => {
                    name = fields.collect::<Vec<_>>().join(" ");
                    Section::None
                }
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => Section::End,
                "RANGES" | "OBJSENSE" | "OBJSENS" | "QUADOBJ" | "QMATRIX" | "SOS" | "QCMATRIX" => {
                    return Err(MpsError::UnsupportedSection { line, section: head.to_string() });
                }
                other => return Err(parse_err(line, format!("unknown section `{other}`"))),
            };
            if section == Section::End {
                break;
            }
            continue;
        }

        let fields: Vec<&str> = raw.split_whitespace().collect();
        match section {
            Section::None | Section::End => {
                return Err(parse_err(line, "data line outside of a section"));
            }
            Section::Rows => {
                let [kind, row] = fields[..] else {
                    return Err(parse_err(line, "ROWS entry needs a type and a name"));
                };
                let sense = match kind {
                    "N" => {
                        if objective.is_some() {
                            return Err(parse_err(line, "more than one objective row"));
                        }
                        objective = Some(row.to_string());
                        continue;
                    }
                    "L" => Sense::Le,
                    "E" => Sense::Eq,
                    "G" => Sense::Ge,
                    other => return Err(parse_err(line, format!("unknown row type `{other}`"))),
                };
                if row_index.insert(row.to_string(), rows.len()).is_some() {
                    return Err(MpsError::Model(ModelError::DuplicateName(row.to_string())));
                }
                rows.push(RowDecl { name: row.to_string(), sense });
                entries.push(Vec::new());
                rhs.push(0.0);
            }
            Section::Columns => {
                if fields.len() == 3 && fields[1].trim_matches('\'') == "MARKER" {
                    match fields[2].trim_matches('\'') {
                        "INTORG" => in_integer_block = true,
                        "INTEND" => in_integer_block = false,
                        other => return Err(parse_err(line, format!("unknown marker `{other}`"))),
                    }
                    continue;
                }
                if fields.len() != 3 && fields.len() != 5 {
                    return Err(parse_err(line, "COLUMNS entry needs 3 or 5 fields"));
                }
                let col = fields[0];
                let j = match col_index.get(col) {
                    Some(&j) => j,
                    None => {
                        let kind = if in_integer_block { VarKind::Binary } else { VarKind::Continuous };
                        cols.push((col.to_string(), kind, 0.0));
                        col_index.insert(col.to_string(), cols.len() - 1);
                        cols.len() - 1
                    }
                };
                for pair in fields[1..].chunks(2) {
                    let value = number(line, pair[1])?;
                    if objective.as_deref() == Some(pair[0]) {
                        cols[j].2 = value;
                    } else if let Some(&i) = row_index.get(pair[0]) {
                        if value != 0.0 {
                            entries[i].push((j, value));
                        }
                    } else {
                        return Err(parse_err(line, format!("unknown row `{}`", pair[0])));
                    }
                }
            }
            Section::Rhs => {
                if fields.len() != 3 && fields.len() != 5 {
                    return Err(parse_err(line, "RHS entry needs 3 or 5 fields"));
                }
                for pair in fields[1..].chunks(2) {
                    let value = number(line, pair[1])?;
                    if objective.as_deref() == Some(pair[0]) {
                        return Err(parse_err(line, "objective constants are not supported"));
                    }
                    let &i = row_index
                        .get(pair[0])
                        .ok_or_else(|| parse_err(line, format!("unknown row `{}`", pair[0])))?;
                    rhs[i] = value;
                }
            }
            Section::Bounds => {
                if fields.len() < 3 {
                    return Err(parse_err(line, "BOUNDS entry needs a type, a set and a column"));
                }
                let (kind, col) = (fields[0], fields[2]);
                let &j = col_index
                    .get(col)
                    .ok_or_else(|| parse_err(line, format!("unknown column `{col}`")))?;
                let value = fields.get(3).map(|v| number(line, v)).transpose()?;
                let unsupported = || MpsError::UnsupportedBound {
                    line,
                    kind: kind.to_string(),
                    column: col.to_string(),
                };
                match (kind, value) {
                    ("BV", _) => cols[j].1 = VarKind::Binary,
                    ("UP", Some(v)) if v == 1.0 && cols[j].1 == VarKind::Binary => {}
                    ("LO", Some(v)) if v == 0.0 => {}
                    ("PL", _) if cols[j].1 == VarKind::Continuous => {}
                    _ => return Err(unsupported()),
                }
            }
        }
    }
    if section != Section::End {
        return Err(parse_err(text.lines().count(), "missing ENDATA"));
    }
    if objective.is_none() {
        return Err(parse_err(1, "no objective row"));
    }

    let mut model = MipModel::new(name);
    for (col, kind, obj) in cols {
        model.add_var(col, kind, obj);
    }
    for ((row, coeffs), b) in rows.into_iter().zip(entries).zip(rhs) {
        model.add_constraint(row.name, coeffs, row.sense, b);
    }
    model.check()?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> MipModel {
        let mut m = MipModel::new("sample");
        let x = m.add_var("X_0_c1", VarKind::Continuous, 0.0);
        let y = m.add_var("Y_0_c1_m1_1", VarKind::Binary, 120.0);
        let z = m.add_var("Z_h1_d1_1", VarKind::Binary, 30.0);
        m.add_constraint("C2_c1", [(y, 1.0)], Sense::Eq, 1.0);
        m.add_constraint("C8_0_c1", [(y, 600.0), (x, -1.0)], Sense::Ge, 0.0);
        m.add_constraint("C4_h1", [(z, 1.0)], Sense::Le, 1.0);
        m.add_constraint("C6_c1", [(x, 1.0)], Sense::Eq, 100.25);
        m
    }

    #[test]
    fn round_trip_is_identical() {
        let m = sample();
        let text = write_mps(&m).unwrap();
        assert_eq!(read_mps(&text).unwrap(), m);
    }

    #[test]
    fn unnamed_variable_is_rejected() {
        let mut m = MipModel::new("t");
        m.add_var("", VarKind::Binary, 1.0);
        assert!(matches!(write_mps(&m), Err(MpsError::Model(ModelError::UnnamedVariable(0)))));
    }

    #[test]
    fn ranges_section_is_unsupported() {
        let text = "NAME t\nROWS\n N  OBJ\n L  r\nCOLUMNS\n    x  r  1\nRHS\nRANGES\n    R  r  2\nENDATA\n";
        match read_mps(text) {
            Err(MpsError::UnsupportedSection { line, section }) => {
                assert_eq!(section, "RANGES");
                assert_eq!(line, 8);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_rows_reports_line() {
        let text = "NAME t\nROWS\n N  OBJ\n Q  r\nENDATA\n";
        match read_mps(text) {
            Err(MpsError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        let text = "NAME t\nROWS\n N\nENDATA\n";
        assert!(matches!(read_mps(text), Err(MpsError::Parse { line: 3, .. })));
    }

    #[test]
    fn integer_markers_are_binary() {
        let text = "NAME t\nROWS\n N  OBJ\n L  r\nCOLUMNS\n    M1  'MARKER'  'INTORG'\n    x  OBJ  1  r  1\n    M2  'MARKER'  'INTEND'\n    y  r  1\nRHS\n    RHS  r  1\nBOUNDS\n UP BND  x  1\nENDATA\n";
        let m = read_mps(text).unwrap();
        assert_eq!(m.variables()[0].kind, VarKind::Binary);
        assert_eq!(m.variables()[1].kind, VarKind::Continuous);
    }
}
