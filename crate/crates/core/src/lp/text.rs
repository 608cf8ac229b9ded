//! Plain-text dump of a linear program, for cross-checking against external
//! solvers.
//!
//! ```text
//! vars 3
//! obj 0:1 2:-2.5
//! eq 1 0:1 1:1
//! le 0.5 2:1
//! ge 0 0:1 2:-1
//! bound 2 0 10
//! bound 1 -1 inf
//! ```
//!
//! The objective is always minimized. `obj` and each row line carry sparse
//! `index:value` pairs; `bound j lo hi` lines override the default bounds
//! `[0, inf)`. Values are printed with 17 significant digits so a dump/parse
//! round trip is bit-exact.

use super::{LinearProgram, LpError, Relation};
use std::fmt::Write as _;

pub fn format_lp(lp: &LinearProgram) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "vars {}", lp.num_vars);
    let mut line = String::from("obj");
    for (j, c) in lp.objective.iter().enumerate() {
        if *c != 0.0 {
            let _ = write!(line, " {}:{:.16e}", j, c);
        }
    }
    out.push_str(&line);
    out.push('\n');
    for row in &lp.rows {
        let rel = match row.relation {
            Relation::Eq => "eq",
            Relation::Le => "le",
            Relation::Ge => "ge",
        };
        let mut line = format!("{} {:.16e}", rel, row.rhs);
        for (j, v) in &row.coeffs {
            let _ = write!(line, " {}:{:.16e}", j, v);
        }
        out.push_str(&line);
        out.push('\n');
    }
    for j in 0..lp.num_vars {
        let lo = lp.lower[j];
        let up = lp.upper[j];
        if lo != 0.0 || up.is_some() {
            match up {
                Some(u) => {
                    let _ = writeln!(out, "bound {} {:.16e} {:.16e}", j, lo, u);
                }
                None => {
                    let _ = writeln!(out, "bound {} {:.16e} inf", j, lo);
                }
            }
        }
    }
    out
}

pub fn parse_lp(text: &str) -> Result<LinearProgram, LpError> {
    let mut lp: Option<LinearProgram> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let head = parts.next().unwrap();
        let err = |msg: &str| LpError::Malformed(format!("line {}: {}", lineno + 1, msg));
        match head {
            "vars" => {
                let n: usize = parts
                    .next()
                    .ok_or_else(|| err("missing var count"))?
                    .parse()
                    .map_err(|_| err("bad var count"))?;
                lp = Some(LinearProgram::new(n));
            }
            "obj" => {
                let lp = lp.as_mut().ok_or_else(|| err("`vars` must come first"))?;
                for pair in parts {
                    let (j, v) = parse_pair(pair).ok_or_else(|| err("bad index:value pair"))?;
                    if j >= lp.num_vars {
                        return Err(err("objective index out of range"));
                    }
                    lp.objective[j] = v;
                }
            }
            "eq" | "le" | "ge" => {
                let relation = match head {
                    "eq" => Relation::Eq,
                    "le" => Relation::Le,
                    _ => Relation::Ge,
                };
                let lp = lp.as_mut().ok_or_else(|| err("`vars` must come first"))?;
                let rhs: f64 = parts
                    .next()
                    .ok_or_else(|| err("missing rhs"))?
                    .parse()
                    .map_err(|_| err("bad rhs"))?;
                let mut coeffs = Vec::new();
                for pair in parts {
                    let (j, v) = parse_pair(pair).ok_or_else(|| err("bad index:value pair"))?;
                    coeffs.push((j, v));
                }
                lp.add_row(relation, rhs, coeffs);
            }
            "bound" => {
                let lp = lp.as_mut().ok_or_else(|| err("`vars` must come first"))?;
                let j: usize = parts
                    .next()
                    .ok_or_else(|| err("missing bound index"))?
                    .parse()
                    .map_err(|_| err("bad bound index"))?;
                if j >= lp.num_vars {
                    return Err(err("bound index out of range"));
                }
                let lo: f64 = parts
                    .next()
                    .ok_or_else(|| err("missing lower bound"))?
                    .parse()
                    .map_err(|_| err("bad lower bound"))?;
                let hi_text = parts.next().ok_or_else(|| err("missing upper bound"))?;
                lp.lower[j] = lo;
                lp.upper[j] = if hi_text == "inf" {
                    None
                } else {
                    Some(hi_text.parse().map_err(|_| err("bad upper bound"))?)
                };
            }
            other => {
                return Err(err(&format!("unknown directive `{other}`")));
            }
        }
    }
    let lp = lp.ok_or_else(|| LpError::Malformed("missing `vars` line".into()))?;
    lp.validate()?;
    Ok(lp)
}

fn parse_pair(pair: &str) -> Option<(usize, f64)> {
    let (j, v) = pair.split_once(':')?;
    Some((j.parse().ok()?, v.parse().ok()?))
}
