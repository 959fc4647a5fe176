//! JSON form of connections.
//!
//! ```json
//! {"vars": ["h", "q"], "rank": 2, "omega": [[["0", "q"], ["1", "0"]]]}
//! ```
//!
//! `omega[i][k][j]` is row `k`, column `j` of the matrix of direction `i`.
//! Optional fields: `"directions"` lists the differentiated variables (default:
//! every variable except `h`) either as names or as objects
//! `{"name": "D", "euler": {"s": "1/2"}}` / `{"name": "dx", "partial": "x"}`;
//! `"derivation"` is `"theta"` (`v d/dv`, default) or `"d"` (`d/dv`) for
//! directions given by name; `"labels"` names the basis vectors.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dmod::ConnData;
use crate::exact::rat_int;
use crate::rings::linalg::Matrix;
use crate::rings::{DerivKind, Direction, RFunc, VarTable, Vars};

use super::{parse_coeff, parse_rat};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DirSpec {
    Var(String),
    Euler {
        name: String,
        euler: BTreeMap<String, String>,
    },
    Partial {
        name: String,
        partial: String,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConnJson {
    pub vars: Vec<String>,
    pub rank: usize,
    pub omega: Vec<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directions: Option<Vec<DirSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derivation: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

fn var_index(names: &[String], v: &str) -> Result<usize, String> {
    names
        .iter()
        .position(|n| n == v)
        .ok_or_else(|| format!("direction refers to unknown variable `{v}`"))
}

fn build_vars(raw: &ConnJson) -> Result<Vars, String> {
    let partial = match raw.derivation.as_deref() {
        None | Some("theta") => false,
        Some("d") => true,
        Some(other) => return Err(format!("unknown derivation `{other}` (expected theta or d)")),
    };
    let dirspecs: Vec<DirSpec> = match &raw.directions {
        Some(d) => d.clone(),
        None => raw
            .vars
            .iter()
            .filter(|v| v.as_str() != "h")
            .map(|v| DirSpec::Var(v.clone()))
            .collect(),
    };
    let single = dirspecs.len() == 1;
    let mut dirs = Vec::new();
    for (k, d) in dirspecs.iter().enumerate() {
        let dir = match d {
            DirSpec::Var(v) => {
                let idx = var_index(&raw.vars, v)?;
                if partial {
                    Direction {
                        name: format!("d{v}"),
                        kind: DerivKind::Partial(idx),
                    }
                } else {
                    Direction {
                        name: if single { "D".into() } else { format!("D{}", k + 1) },
                        kind: DerivKind::Euler(vec![(idx, rat_int(1))]),
                    }
                }
            }
            DirSpec::Euler { name, euler } => {
                let mut ls = Vec::new();
                for (v, l) in euler {
                    let l = parse_rat(l).ok_or_else(|| format!("bad rational `{l}`"))?;
                    ls.push((var_index(&raw.vars, v)?, l));
                }
                Direction {
                    name: name.clone(),
                    kind: DerivKind::Euler(ls),
                }
            }
            DirSpec::Partial { name, partial } => Direction {
                name: name.clone(),
                kind: DerivKind::Partial(var_index(&raw.vars, partial)?),
            },
        };
        dirs.push(dir);
    }
    Ok(Arc::new(
        VarTable::new(raw.vars.clone(), dirs).map_err(|e| e.to_string())?,
    ))
}

/// Parses a connection; the error string says what is wrong.
pub fn conn_from_json(text: &str) -> Result<ConnData<RFunc>, String> {
    let raw: ConnJson = serde_json::from_str(text).map_err(|e| format!("invalid JSON: {e}"))?;
    let vars = build_vars(&raw)?;
    if raw.omega.len() > vars.ndirs() {
        return Err(format!(
            "{} matrices but only {} directions",
            raw.omega.len(),
            vars.ndirs()
        ));
    }
    let mut omega = Vec::new();
    for (i, m) in raw.omega.iter().enumerate() {
        if m.len() != raw.rank || m.iter().any(|row| row.len() != raw.rank) {
            return Err(format!("matrix {i} is not {0}x{0}", raw.rank));
        }
        let mut rows = Vec::new();
        for (k, row) in m.iter().enumerate() {
            let mut out = Vec::new();
            for (j, e) in row.iter().enumerate() {
                let v = parse_coeff::<RFunc>(e, &vars).map_err(|err| format!("omega[{i}][{k}][{j}] `{e}` {err}"))?;
                out.push(v);
            }
            rows.push(out);
        }
        omega.push(Matrix::from_rows(&vars, rows).map_err(|e| e.to_string())?);
    }
    let labels = raw.labels.clone().unwrap_or_default();
    ConnData::new(&vars, omega, labels).map_err(|e| e.to_string())
}

/// Serializes a connection; `transpose` writes the matrix system `A = Omega^t`.
pub fn conn_to_json(c: &ConnData<RFunc>, transpose: bool) -> serde_json::Value {
    let vars = c.ctx();
    let mats = if transpose {
        c.matrix_system()
    } else {
        c.omega().to_vec()
    };
    let omega: Vec<Vec<Vec<String>>> = mats
        .iter()
        .map(|m| {
            m.rows()
                .iter()
                .map(|r| r.iter().map(|x| x.to_string()).collect())
                .collect()
        })
        .collect();
    let directions = vars
        .dirs()
        .iter()
        .map(|d| match &d.kind {
            DerivKind::Euler(ls) => DirSpec::Euler {
                name: d.name.clone(),
                euler: ls
                    .iter()
                    .map(|(v, l)| (vars.name(*v).to_string(), l.to_string()))
                    .collect(),
            },
            DerivKind::Partial(v) => DirSpec::Partial {
                name: d.name.clone(),
                partial: vars.name(*v).to_string(),
            },
        })
        .collect();
    let raw = ConnJson {
        vars: vars.names().to_vec(),
        rank: c.rank(),
        omega,
        directions: Some(directions),
        derivation: None,
        labels: Some(c.labels().to_vec()),
    };
    serde_json::to_value(raw).expect("serializable")
}
