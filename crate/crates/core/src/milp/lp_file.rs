//! LP-format text export and a name/value solution-file reader: the adapter
//! for running a model through an external engine and pulling its answer
//! back in.

use std::fmt::Write as _;
use std::path::Path;

use super::{MilpError, MilpModel, Sense};

/// LP identifiers: leading letter or underscore, then letters, digits,
/// underscores, or dots.
fn lp_safe(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.')
}

fn suggest(name: &str) -> String {
    let mut out: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '_' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect();
    if !out
        .chars()
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
    {
        out.insert(0, '_');
    }
    out
}

fn check_name(name: &str) -> Result<(), MilpError> {
    if lp_safe(name) {
        Ok(())
    } else {
        Err(MilpError::UnsafeName {
            name: name.to_string(),
            suggestion: suggest(name),
        })
    }
}

/// Writes `coeff var` terms, sign-separated, eight to a line.
fn write_terms<'a>(out: &mut String, terms: impl Iterator<Item = (&'a str, f64)>) {
    for (i, (name, coeff)) in terms.enumerate() {
        if i > 0 && i % 8 == 0 {
            out.push_str("\n   ");
        }
        if i == 0 {
            if coeff < 0.0 {
                let _ = write!(out, " -{} {}", -coeff, name);
            } else {
                let _ = write!(out, " {} {}", coeff, name);
            }
        } else if coeff < 0.0 {
            let _ = write!(out, " - {} {}", -coeff, name);
        } else {
            let _ = write!(out, " + {} {}", coeff, name);
        }
    }
}

/// Renders the model in the industry LP text format: objective, rows,
/// bounds, integrality sections. Binary variables (integral on [0,1]) go to
/// `Binaries`; other integral variables to `Generals` with explicit bounds.
pub fn export_lp_string(model: &MilpModel) -> Result<String, MilpError> {
    for v in model.vars() {
        check_name(&v.name)?;
    }
    for c in model.constraints() {
        check_name(&c.name)?;
    }

    let mut out = String::from("Minimize\n obj:");
    write_terms(
        &mut out,
        model
            .objective()
            .iter()
            .filter(|&(_, &coeff)| coeff != 0.0)
            .map(|(&id, &coeff)| (model.var(id).name.as_str(), coeff)),
    );
    out.push_str("\nSubject To\n");
    for c in model.constraints() {
        let _ = write!(out, " {}:", c.name);
        write_terms(
            &mut out,
            c.terms
                .iter()
                .map(|&(id, coeff)| (model.var(id).name.as_str(), coeff)),
        );
        let op = match c.sense {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        };
        let _ = writeln!(out, " {} {}", op, c.rhs);
    }

    let is_binary =
        |v: &super::VarDef| v.integral && v.lower == 0.0 && v.upper == 1.0;
    let needs_bounds: Vec<_> = model.vars().iter().filter(|v| !is_binary(v)).collect();
    if !needs_bounds.is_empty() {
        out.push_str("Bounds\n");
        for v in needs_bounds {
            match (v.lower.is_finite(), v.upper.is_finite()) {
                (true, true) => {
                    let _ = writeln!(out, " {} <= {} <= {}", v.lower, v.name, v.upper);
                }
                (true, false) => {
                    let _ = writeln!(out, " {} >= {}", v.name, v.lower);
                }
                (false, true) => {
                    let _ = writeln!(out, " {} <= {}", v.name, v.upper);
                }
                (false, false) => {
                    let _ = writeln!(out, " {} free", v.name);
                }
            }
        }
    }
    let generals: Vec<_> = model
        .vars()
        .iter()
        .filter(|v| v.integral && !is_binary(v))
        .collect();
    if !generals.is_empty() {
        out.push_str("Generals\n");
        for v in generals {
            let _ = writeln!(out, " {}", v.name);
        }
    }
    let binaries: Vec<_> = model.vars().iter().filter(|v| is_binary(v)).collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for v in binaries {
            let _ = writeln!(out, " {}", v.name);
        }
    }
    out.push_str("End\n");
    Ok(out)
}

pub fn export_lp_file(model: &MilpModel, path: &Path) -> Result<(), MilpError> {
    let text = export_lp_string(model)?;
    std::fs::write(path, text).map_err(|source| MilpError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Reads a solution as `name value` lines (blank lines and lines starting
/// with `#` or `\` are skipped; extra columns are ignored). Variables the
/// file does not mention default to 0.
pub fn import_solution_file(model: &MilpModel, path: &Path) -> Result<Vec<f64>, MilpError> {
    let text = std::fs::read_to_string(path).map_err(|source| MilpError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut values = vec![0.0; model.var_count()];
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('\\') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let (Some(name), Some(value)) = (tokens.next(), tokens.next()) else {
            return Err(MilpError::SolutionLine {
                line_no,
                line: raw.to_string(),
            });
        };
        let value: f64 = value.parse().map_err(|_| MilpError::SolutionLine {
            line_no,
            line: raw.to_string(),
        })?;
        let id = model
            .find_var(name)
            .ok_or_else(|| MilpError::UnknownVariable {
                line_no,
                name: name.to_string(),
            })?;
        values[id.index()] = value;
    }
    Ok(values)
}
