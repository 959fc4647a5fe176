use std::sync::Arc;

use crate::exact::Rat;

use super::RingError;

/// How a direction acts on the commuting variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DerivKind {
    /// Euler-type derivation `sum_v lambda_v * v d/dv`; `q d/dq` is `[(q, 1)]`.
    /// With `q = s^2` the same direction acts on `s` with `lambda = 1/2`.
    Euler(Vec<(usize, Rat)>),
    /// Plain partial derivative `d/dv`.
    Partial(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Direction {
    pub name: String,
    pub kind: DerivKind,
}

/// Ordered variable names shared by all values of a computation.
///
/// A variable named `h` plays the role of the loop parameter: it is never
/// differentiated and operator generators are `h * d_i` when it is present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarTable {
    names: Vec<String>,
    weights: Option<Vec<i64>>,
    dirs: Vec<Direction>,
    hbar: Option<usize>,
}

pub type Vars = Arc<VarTable>;

impl VarTable {
    pub fn new(names: Vec<String>, dirs: Vec<Direction>) -> Result<Self, RingError> {
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(RingError::DuplicateVariable(n.clone()));
            }
        }
        for d in &dirs {
            let ok = match &d.kind {
                DerivKind::Euler(ls) => ls.iter().all(|(v, _)| *v < names.len()),
                DerivKind::Partial(v) => *v < names.len(),
            };
            if !ok {
                return Err(RingError::UnknownDirection(d.name.clone()));
            }
        }
        let hbar = names.iter().position(|n| n == "h");
        Ok(VarTable {
            names,
            weights: None,
            dirs,
            hbar,
        })
    }

    /// Table with `h` first, then `q` (one direction) or `q1..qr`, then `extra`.
    /// Each direction is `q_k d/dq_k`; with one direction an `s` among `extra`
    /// is treated as `q^{1/2}`.
    pub fn quantum(r: usize, extra: &[&str]) -> Vars {
        let mut names = vec!["h".to_string()];
        let qnames: Vec<String> = if r == 1 {
            vec!["q".to_string()]
        } else {
            (1..=r).map(|k| format!("q{k}")).collect()
        };
        names.extend(qnames.iter().cloned());
        names.extend(extra.iter().map(|s| s.to_string()));
        let s_idx = names.iter().position(|n| n == "s");
        let dirs = (0..r)
            .map(|k| {
                let mut ls = vec![(1 + k, Rat::from_integer(1.into()))];
                if r == 1 {
                    if let Some(si) = s_idx {
                        ls.push((si, crate::exact::rat(1, 2)));
                    }
                }
                Direction {
                    name: if r == 1 { "D".into() } else { format!("D{}", k + 1) },
                    kind: DerivKind::Euler(ls),
                }
            })
            .collect();
        Arc::new(VarTable::new(names, dirs).expect("well-formed quantum table"))
    }

    /// `h` plus `s` with a single direction `q d/dq` where `q = s^2`.
    pub fn half_power() -> Vars {
        let names = vec!["h".to_string(), "s".to_string()];
        let dirs = vec![Direction {
            name: "D".into(),
            kind: DerivKind::Euler(vec![(1, crate::exact::rat(1, 2))]),
        }];
        Arc::new(VarTable::new(names, dirs).expect("well-formed table"))
    }

    /// Plain partial derivatives with respect to every listed variable.
    pub fn plain(names: &[&str]) -> Vars {
        let dirs = names
            .iter()
            .enumerate()
            .map(|(i, n)| Direction {
                name: format!("d{n}"),
                kind: DerivKind::Partial(i),
            })
            .collect();
        Arc::new(VarTable::new(names.iter().map(|s| s.to_string()).collect(), dirs).expect("well-formed table"))
    }

    pub fn with_weights(mut self, weights: Vec<i64>) -> Self {
        assert_eq!(weights.len(), self.names.len());
        self.weights = Some(weights);
        self
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn weights(&self) -> Option<&[i64]> {
        self.weights.as_deref()
    }

    pub fn dirs(&self) -> &[Direction] {
        &self.dirs
    }

    pub fn ndirs(&self) -> usize {
        self.dirs.len()
    }

    pub fn hbar(&self) -> Option<usize> {
        self.hbar
    }

    /// Variables that some direction differentiates.
    pub fn is_moving(&self, v: usize) -> bool {
        self.dirs.iter().any(|d| match &d.kind {
            DerivKind::Euler(ls) => ls.iter().any(|(w, l)| *w == v && !num_traits::Zero::is_zero(l)),
            DerivKind::Partial(w) => *w == v,
        })
    }
}
