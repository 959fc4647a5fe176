//! `qdm` subcommands. [`run`] takes the argument vector and returns the exit
//! status with the text meant for stdout and stderr, so tests can drive the
//! tool without spawning a process.
//!
//! Exit status: 0 success, 1 mathematical failure (non-flat, not
//! normalizable, WDVV violated, ...), 2 usage or parse error.

use std::collections::HashMap;
use std::fmt::Write as _;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use qdm_core::birkhoff::{hbar_normalize, monomial_connection, BirkhoffError};
use qdm_core::catalog::{crepant_pipeline, load, quantization_gate, SpaceEntry, SpaceId};
use qdm_core::dmod::{cyclic_extract, ConnData, Presentation};
use qdm_core::evolve::{extend, lax_bracket, parse_jet_ops};
use qdm_core::gw::{kontsevich, residual_by_degree, GWPotential};
use qdm_core::rings::linalg::Matrix;
use qdm_core::rings::{DiffRing, LPoly, RFunc, Vars};
use qdm_core::text::json::{conn_from_json, conn_to_json};
use qdm_core::text::{infer_quantum_vars, parse_dop};
use qdm_core::weyl::DOp;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

/// Exact computer algebra for quantum D-modules.
#[derive(Parser, Debug)]
#[command(name = "qdm", version)]
struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Check the zero-curvature condition of a connection given as JSON.
    Flat { file: String },
    /// Scalar operator annihilating a basis vector of a connection.
    Cyclic {
        /// Connection JSON; omit when using --space.
        file: Option<String>,
        #[arg(long)]
        space: Option<String>,
        #[arg(long, default_value_t = 0)]
        start: usize,
        #[arg(long, default_value_t = 0)]
        dir: usize,
    },
    /// h-gauge normalization of the monomial connection of a presentation.
    Birkhoff {
        #[arg(long)]
        space: Option<String>,
        /// Relation in the operator grammar; repeat for several.
        #[arg(long = "rel")]
        rels: Vec<String>,
        /// Monomial basis, comma separated (default: standard monomials).
        #[arg(long)]
        basis: Option<String>,
        /// Weights such as `d=0,h=2,q=4` (default: the catalog's).
        #[arg(long)]
        weights: Option<String>,
    },
    /// Normal form of an operator modulo a presentation.
    Reduce {
        op: String,
        #[arg(long)]
        space: Option<String>,
        #[arg(long = "rel")]
        rels: Vec<String>,
        /// JSON file `{"relations": [...]}`.
        #[arg(long)]
        presentation: Option<String>,
    },
    /// Genus-zero counts of rational plane curves.
    Nd {
        #[arg(long)]
        dmax: usize,
    },
    /// WDVV residual of the plane potential, per q-degree.
    Wdvv {
        #[arg(long)]
        dmax: usize,
        /// Replacement counts `N1,N2,...`; missing degrees use the recursion.
        #[arg(long)]
        invariants: Option<String>,
    },
    /// Derive the F2 relation, specialize it and compare basis classes.
    Crepant,
    /// Extend d_x/(T1) by d_t - P and derive the evolution equation.
    Extend {
        #[arg(long = "T1")]
        t1: String,
        #[arg(long = "P")]
        p: String,
    },
    /// Commutator [P, T1] and its reduction modulo T1.
    Lax {
        #[arg(long = "P")]
        p: String,
        #[arg(long = "T1")]
        t1: String,
    },
    /// Weighted homogeneity and formal self-adjointness of an operator.
    Gate {
        op: String,
        #[arg(long, default_value = "d=0,h=2,q=4")]
        weights: String,
    },
    /// Print a catalog entry.
    Space { id: String },
}

enum Fail {
    Usage(String),
    Math(String, Value),
}

type Report = Result<(String, Value), Fail>;

fn usage<E: ToString>(e: E) -> Fail {
    Fail::Usage(e.to_string())
}

pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome {
                    code,
                    stdout: text,
                    stderr: String::new(),
                }
            } else {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: text,
                }
            };
        }
    };
    let json = cli.format == Format::Json;
    let render = |text: String, v: Value| {
        if json {
            serde_json::to_string_pretty(&v).expect("serializable") + "\n"
        } else {
            text
        }
    };
    match dispatch(cli.cmd) {
        Ok((text, v)) => Outcome {
            code: 0,
            stdout: render(text, v),
            stderr: String::new(),
        },
        Err(Fail::Math(text, v)) => Outcome {
            code: 1,
            stdout: render(text, v),
            stderr: String::new(),
        },
        Err(Fail::Usage(msg)) => Outcome {
            code: 2,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        },
    }
}

fn dispatch(cmd: Cmd) -> Report {
    match cmd {
        Cmd::Flat { file } => flat(&file),
        Cmd::Cyclic {
            file,
            space,
            start,
            dir,
        } => cyclic(file.as_deref(), space.as_deref(), start, dir),
        Cmd::Birkhoff {
            space,
            rels,
            basis,
            weights,
        } => birkhoff(space.as_deref(), &rels, basis.as_deref(), weights.as_deref()),
        Cmd::Reduce {
            op,
            space,
            rels,
            presentation,
        } => reduce(&op, space.as_deref(), &rels, presentation.as_deref()),
        Cmd::Nd { dmax } => nd(dmax),
        Cmd::Wdvv { dmax, invariants } => wdvv(dmax, invariants.as_deref()),
        Cmd::Crepant => crepant(),
        Cmd::Extend { t1, p } => extend_cmd(&t1, &p),
        Cmd::Lax { p, t1 } => lax(&p, &t1),
        Cmd::Gate { op, weights } => gate(&op, &weights),
        Cmd::Space { id } => space(&id),
    }
}

fn read(path: &str) -> Result<String, Fail> {
    std::fs::read_to_string(path).map_err(|e| Fail::Usage(format!("{path}: {e}")))
}

fn space_entry(id: &str) -> Result<SpaceEntry, Fail> {
    let id: SpaceId = id.parse().map_err(usage)?;
    load(id).map_err(usage)
}

fn matrix_rows<R: DiffRing>(m: &Matrix<R>) -> Value {
    json!(m
        .rows()
        .iter()
        .map(|r| r.iter().map(|x| x.to_string()).collect::<Vec<_>>())
        .collect::<Vec<_>>())
}

fn write_matrix<R: DiffRing>(out: &mut String, name: &str, m: &Matrix<R>) {
    let rows: Vec<Vec<String>> = m
        .rows()
        .iter()
        .map(|r| r.iter().map(|x| x.to_string()).collect())
        .collect();
    let width = rows.iter().flatten().map(|s| s.len()).max().unwrap_or(1);
    let _ = writeln!(out, "{name}:");
    for r in rows {
        let cells: Vec<String> = r.iter().map(|s| format!("{s:>width$}")).collect();
        let _ = writeln!(out, "  [ {} ]", cells.join("  "));
    }
}

fn flat(file: &str) -> Report {
    let c = conn_from_json(&read(file)?).map_err(Fail::Usage)?;
    let rep = c.flatness_check().map_err(usage)?;
    let mut text = String::new();
    let mut pairs = Vec::new();
    for pr in &rep.residuals {
        let entries: Vec<Value> = pr
            .entries
            .iter()
            .map(|(k, j, x)| json!({"row": k, "col": j, "value": x.to_string()}))
            .collect();
        for (k, j, x) in &pr.entries {
            let _ = writeln!(text, "R[{},{}][{k}][{j}] = {x}", pr.i, pr.j);
        }
        pairs.push(json!({"i": pr.i, "j": pr.j, "entries": entries}));
    }
    let v = json!({"flat": rep.is_flat(), "residuals": pairs});
    if rep.is_flat() {
        Ok(("flat\n".into(), v))
    } else {
        Err(Fail::Math(format!("not flat\n{text}"), v))
    }
}

fn cyclic(file: Option<&str>, space: Option<&str>, start: usize, dir: usize) -> Report {
    let c: ConnData<RFunc> = match (file, space) {
        (Some(f), None) => conn_from_json(&read(f)?).map_err(Fail::Usage)?,
        (None, Some(id)) => space_entry(id)?.connection(),
        _ => return Err(Fail::Usage("give either a connection file or --space".into())),
    };
    let cy = cyclic_extract(&c, start, dir).map_err(usage)?;
    let basis: Vec<String> = cy.basis_ops.iter().map(|b| b.to_string()).collect();
    let mut text = format!("operator: {}\n", cy.op);
    if let Some(k) = cy.early_dependence {
        let _ = writeln!(text, "dependent at order {k} (rank {})", c.rank());
    } else {
        for (k, b) in basis.iter().enumerate() {
            let _ = writeln!(text, "e{k} = ({b}) e{start}");
        }
    }
    let v = json!({"operator": cy.op.to_string(), "basis": basis, "early_dependence": cy.early_dependence});
    Ok((text, v))
}

fn parse_weights(s: &str) -> Result<HashMap<String, i64>, Fail> {
    let mut out = HashMap::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, w) = part
            .split_once('=')
            .ok_or_else(|| Fail::Usage(format!("weight `{part}` is not name=value")))?;
        let w: i64 = w
            .trim()
            .parse()
            .map_err(|_| Fail::Usage(format!("weight `{part}` is not an integer")))?;
        out.insert(k.trim().to_string(), w);
    }
    Ok(out)
}

type Parsed = (Vars, usize, Vec<DOp<LPoly>>, Vec<DOp<LPoly>>);

/// Relations and extra operator texts parsed over one inferred table.
fn quantum_ops(rels: &[String], extra: &[&str]) -> Result<Parsed, Fail> {
    let texts: Vec<&str> = rels.iter().map(String::as_str).chain(extra.iter().copied()).collect();
    let (vars, r) = infer_quantum_vars(&texts).map_err(usage)?;
    let parse = |t: &str| parse_dop::<LPoly>(t, &vars, r).map_err(|e| Fail::Usage(format!("`{t}`: {e}")));
    let a = rels.iter().map(|t| parse(t)).collect::<Result<Vec<_>, _>>()?;
    let b = extra.iter().map(|t| parse(t)).collect::<Result<Vec<_>, _>>()?;
    Ok((vars, r, a, b))
}

fn birkhoff(space: Option<&str>, rels: &[String], basis: Option<&str>, weights: Option<&str>) -> Report {
    let basis_texts: Vec<&str> = basis.map(|b| b.split(',').map(str::trim).collect()).unwrap_or_default();
    let (pres, w, basis_ops) = match (space, rels.is_empty()) {
        (Some(id), true) => {
            let e = space_entry(id)?;
            let b = basis_texts
                .iter()
                .map(|t| parse_dop::<LPoly>(t, &e.vars, e.presentation.r()).map_err(usage))
                .collect::<Result<Vec<_>, _>>()?;
            let w = match weights {
                Some(s) => parse_weights(s)?,
                None => e.weights.clone(),
            };
            (e.presentation, w, b)
        }
        (None, false) => {
            let (_, _, ops, b) = quantum_ops(rels, &basis_texts)?;
            let w = parse_weights(weights.ok_or_else(|| Fail::Usage("--weights is required with --rel".into()))?)?;
            (Presentation::new(ops).map_err(usage)?, w, b)
        }
        _ => return Err(Fail::Usage("give either --space or --rel".into())),
    };
    let basis_ops = if basis_ops.is_empty() {
        pres.basis_ops()
    } else {
        basis_ops
    };
    let om = monomial_connection(&pres, &basis_ops).map_err(usage)?;
    let res = match hbar_normalize(&om, &basis_ops, &w) {
        Ok(r) => r,
        Err(BirkhoffError::NotNormalizable(why)) => {
            let msg = format!("not normalizable: {why}\n");
            return Err(Fail::Math(msg, json!({"normalizable": false, "reason": why})));
        }
        Err(e) => return Err(usage(e)),
    };
    let mut text = String::new();
    for (k, q) in res.gauge.q.iter().enumerate() {
        write_matrix(&mut text, &format!("Q{k}"), q);
    }
    for (i, m) in res.omega.omega().iter().enumerate() {
        write_matrix(&mut text, &format!("omega{}", i + 1), m);
    }
    let basis: Vec<String> = res.basis.iter().map(|b| b.to_string()).collect();
    let _ = writeln!(text, "basis: {}", basis.join(", "));
    let v = json!({
        "normalizable": true,
        "Q": res.gauge.q.iter().map(matrix_rows).collect::<Vec<_>>(),
        "omega": res.omega.omega().iter().map(matrix_rows).collect::<Vec<_>>(),
        "basis": basis,
    });
    Ok((text, v))
}

fn reduce(op: &str, space: Option<&str>, rels: &[String], presentation: Option<&str>) -> Report {
    let (pres, a) = match (space, presentation, rels.is_empty()) {
        (Some(id), None, true) => {
            let e = space_entry(id)?;
            let a = parse_dop::<LPoly>(op, &e.vars, e.presentation.r()).map_err(usage)?;
            (e.presentation, a)
        }
        (None, file, empty) if file.is_some() != !empty => {
            let rels: Vec<String> = match file {
                Some(f) => {
                    let v: Value =
                        serde_json::from_str(&read(f)?).map_err(|e| Fail::Usage(format!("invalid JSON: {e}")))?;
                    let list = v
                        .get("relations")
                        .and_then(Value::as_array)
                        .ok_or_else(|| Fail::Usage("presentation JSON needs a `relations` list".into()))?;
                    list.iter()
                        .map(|x| {
                            x.as_str()
                                .map(str::to_string)
                                .ok_or_else(|| Fail::Usage("relations must be strings".into()))
                        })
                        .collect::<Result<_, _>>()?
                }
                None => rels.to_vec(),
            };
            let (_, _, ops, mut extra) = quantum_ops(&rels, &[op])?;
            (Presentation::new(ops).map_err(usage)?, extra.remove(0))
        }
        _ => {
            return Err(Fail::Usage(
                "give exactly one of --space, --rel or --presentation".into(),
            ))
        }
    };
    let coeffs = match pres.reduce(&a) {
        Ok(c) => c,
        Err(e @ qdm_core::dmod::DmodError::NonTerminating(_)) => {
            return Err(Fail::Math(format!("{e}\n"), json!({"error": e.to_string()})));
        }
        Err(e) => return Err(usage(e)),
    };
    let nf = pres.normal_form(&a, Default::default()).map_err(usage)?;
    let basis: Vec<String> = pres.basis_ops().iter().map(|b| b.to_string()).collect();
    let mut text = format!("normal form: {nf}\n");
    for (b, c) in basis.iter().zip(&coeffs) {
        let _ = writeln!(text, "  [{b}]: {c}");
    }
    let v = json!({
        "normal_form": nf.to_string(),
        "basis": basis,
        "coefficients": coeffs.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
    });
    Ok((text, v))
}

fn nd(dmax: usize) -> Report {
    if dmax == 0 {
        return Err(Fail::Usage("--dmax must be at least 1".into()));
    }
    let n = kontsevich(dmax);
    let parts: Vec<String> = n.iter().enumerate().map(|(d, x)| format!("N{}={x}", d + 1)).collect();
    let v = json!(n
        .iter()
        .enumerate()
        .map(|(d, x)| (format!("N{}", d + 1), json!(x.to_string())))
        .collect::<serde_json::Map<_, _>>());
    Ok((parts.join(" ") + "\n", v))
}

fn wdvv(dmax: usize, invariants: Option<&str>) -> Report {
    if dmax == 0 {
        return Err(Fail::Usage("--dmax must be at least 1".into()));
    }
    let mut n = kontsevich(dmax);
    if let Some(s) = invariants {
        for (d, t) in s.split(',').map(str::trim).enumerate().take(dmax) {
            n[d] = t.parse().map_err(|_| Fail::Usage(format!("`{t}` is not an integer")))?;
        }
    }
    let f = GWPotential::with_invariants(n);
    let res = residual_by_degree(&f.wdvv_residual(), dmax);
    let mut text = String::new();
    for (d, ok) in &res {
        let _ = writeln!(text, "q^{d}: {}", if *ok { "ok" } else { "violated" });
    }
    let all = res.iter().all(|(_, ok)| *ok);
    let v =
        json!({"holds": all, "degrees": res.iter().map(|(d, ok)| json!({"degree": d, "ok": ok})).collect::<Vec<_>>()});
    if all {
        Ok((text, v))
    } else {
        Err(Fail::Math(text, v))
    }
}

fn crepant() -> Report {
    let rep = crepant_pipeline().map_err(usage)?;
    let mut text = String::new();
    for c in &rep.checks {
        let _ = writeln!(text, "{} {}: {}", if c.pass { "ok  " } else { "FAIL" }, c.name, c.got);
        if !c.pass {
            let _ = writeln!(text, "     expected {}", c.expected);
        }
    }
    for (op, class) in &rep.correspondence {
        let _ = writeln!(text, "{op} <-> {class}");
    }
    let v = json!({
        "pass": rep.pass(),
        "checks": rep.checks.iter().map(|c| json!({"name": c.name, "expected": c.expected, "got": c.got, "pass": c.pass})).collect::<Vec<_>>(),
        "correspondence": rep.correspondence.iter().map(|(a, b)| json!([a, b])).collect::<Vec<_>>(),
    });
    if rep.pass() {
        Ok((text, v))
    } else {
        Err(Fail::Math(text, v))
    }
}

fn extend_cmd(t1: &str, p: &str) -> Report {
    let (_, ops) = parse_jet_ops(&[t1, p]).map_err(usage)?;
    let ext = extend(&ops[0], &ops[1]).map_err(usage)?;
    let mut text = String::new();
    write_matrix(&mut text, "Omega_x", &ext.omega[0]);
    write_matrix(&mut text, "Omega_t", &ext.omega[1]);
    for c in &ext.constraints {
        let _ = writeln!(text, "constraint: 0 = {c}");
    }
    for (s, v) in &ext.eliminated {
        let _ = writeln!(text, "eliminated: {s} = {v}");
    }
    for e in &ext.evolution {
        let _ = writeln!(text, "{e}");
    }
    for u in &ext.unresolved {
        let _ = writeln!(text, "unresolved: {u}");
    }
    let v = json!({
        "omega_x": matrix_rows(&ext.omega[0]),
        "omega_t": matrix_rows(&ext.omega[1]),
        "constraints": ext.constraints.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "eliminated": ext.eliminated.iter().map(|(s, v)| json!([s, v.to_string()])).collect::<Vec<_>>(),
        "evolution": ext.evolution.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
        "unresolved": ext.unresolved.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "closed": ext.closed(),
    });
    if ext.closed() {
        Ok((text, v))
    } else {
        Err(Fail::Math(text, v))
    }
}

fn lax(p: &str, t1: &str) -> Report {
    let (_, ops) = parse_jet_ops(&[p, t1]).map_err(usage)?;
    let b = lax_bracket(&ops[0], &ops[1]).map_err(usage)?;
    let reduced: Vec<String> = b.reduced.iter().map(|c| c.to_string()).collect();
    let mut text = format!("[P, T1] = {}\n", b.commutator);
    for (k, c) in reduced.iter().enumerate() {
        let name = match k {
            0 => "1".to_string(),
            1 => "d".to_string(),
            _ => format!("d^{k}"),
        };
        let _ = writeln!(text, "  [{name}]: {c}");
    }
    let v = json!({"commutator": b.commutator.to_string(), "reduced": reduced});
    Ok((text, v))
}

fn gate(op: &str, weights: &str) -> Report {
    let w = parse_weights(weights)?;
    let (_, _, mut ops, _) = quantum_ops(&[op.to_string()], &[])?;
    let rep = quantization_gate(&ops.remove(0), &w).map_err(usage)?;
    let degrees: Vec<i64> = rep.degrees.iter().copied().collect();
    let yn = |b: bool| if b { "yes" } else { "no" };
    let mut text = format!(
        "weights: {degrees:?}\nhomogeneous: {}\nself-adjoint: {}\n",
        yn(rep.homogeneous),
        yn(rep.self_adjoint)
    );
    for c in &rep.constraints {
        let _ = writeln!(text, "constraint: {c} = 0");
    }
    for (p, x) in &rep.fixed {
        let _ = writeln!(text, "fixed: {p} = {x}");
    }
    for p in &rep.free {
        let _ = writeln!(text, "free: {p}");
    }
    let v = json!({
        "degrees": degrees,
        "homogeneous": rep.homogeneous,
        "self_adjoint": rep.self_adjoint,
        "constraints": rep.constraints.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "fixed": rep.fixed.iter().map(|(p, x)| json!([p, x.to_string()])).collect::<Vec<_>>(),
        "free": rep.free,
        "solvable": rep.solvable,
    });
    if rep.homogeneous && rep.solvable {
        Ok((text, v))
    } else {
        Err(Fail::Math(text, v))
    }
}

fn space(id: &str) -> Report {
    let e = space_entry(id)?;
    let rels: Vec<String> = e.presentation.relations().iter().map(|r| r.to_string()).collect();
    let basis: Vec<String> = e.basis.iter().map(|b| b.to_string()).collect();
    let mut text = format!("{}\nvariables: {}\n", e.id, e.vars.names().join(", "));
    for r in &rels {
        let _ = writeln!(text, "relation: {r}");
    }
    for (b, l) in basis.iter().zip(&e.labels) {
        let _ = writeln!(text, "basis: {b}  ~  {l}");
    }
    for (i, m) in e.omega.iter().enumerate() {
        write_matrix(&mut text, &format!("omega{}", i + 1), m);
    }
    let mut weights: Vec<(&String, &i64)> = e.weights.iter().collect();
    weights.sort();
    let v = json!({
        "id": e.id.to_string(),
        "relations": rels,
        "basis": basis,
        "connection": conn_to_json(&e.connection(), false),
        "weights": weights.iter().map(|(k, w)| (k.to_string(), json!(w))).collect::<serde_json::Map<_, _>>(),
    });
    Ok((text, v))
}
