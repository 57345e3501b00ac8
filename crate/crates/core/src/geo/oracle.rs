//! A deliberately naive reference interpreter used only by tests.
//!
//! Instead of propagating environment sets, it grounds every predicate by
//! enumerating candidate bindings over the whole value domain (all entities
//! plus all cell values) and checking each ground atom against the raw
//! tables. Slow, obvious, and independent of the engine in `eval`.

use std::collections::{BTreeMap, BTreeSet};

use super::eval::EvalError;
use super::{Cell, ColumnKind, Denotation, GeoDatabase, Value};
use crate::logic_form::{LogicForm, Term};

type Asg = BTreeMap<char, Value>;

pub fn oracle_evaluate(lf: &LogicForm, db: &GeoDatabase) -> Result<Denotation, EvalError> {
    let Term::Predicate { name, args } = &lf.root else {
        return Err(EvalError::UnknownPredicate("non-predicate root".into()));
    };
    if name != "answer" || args.len() < 2 {
        return Err(EvalError::UnknownPredicate(name.clone()));
    }
    let Term::Variable(ans) = args[0] else {
        return Err(EvalError::TypeMismatch {
            predicate: "answer".into(),
            arg: 1,
        });
    };
    let domain = full_domain(db);
    let mut asgs = vec![Asg::new()];
    for goal in &args[1..] {
        asgs = solve(goal, asgs, db, &domain)?;
    }
    let mut out = Denotation::new();
    for a in asgs {
        match a.get(&ans) {
            Some(v) => {
                out.insert(v.clone());
            }
            None => return Err(EvalError::UnboundVariable(ans)),
        }
    }
    Ok(out)
}

/// Every value that can ever be bound: entities of every table plus every
/// cell value (numbers, strings, references as typed entities).
fn full_domain(db: &GeoDatabase) -> Vec<Value> {
    let mut dom = BTreeSet::new();
    for t in &db.tables {
        for row in &t.rows {
            dom.insert(Value::entity(&t.name, t.entity_name(row)));
            for (ci, cell) in row.cells.iter().enumerate().skip(1) {
                match cell {
                    Cell::Num(x) => {
                        dom.insert(Value::num(*x));
                    }
                    Cell::Str(s) => {
                        dom.insert(Value::Str(s.to_lowercase()));
                    }
                    Cell::Refs(list) => {
                        let target = match &t.columns[ci].kind {
                            ColumnKind::Ref(tt) => tt,
                            _ => unreachable!(),
                        };
                        for r in list {
                            dom.insert(Value::entity(target, r));
                        }
                    }
                }
            }
        }
    }
    dom.into_iter().collect()
}

fn solve(
    goal: &Term,
    asgs: Vec<Asg>,
    db: &GeoDatabase,
    domain: &[Value],
) -> Result<Vec<Asg>, EvalError> {
    match goal {
        Term::Conjunction(gs) => {
            let mut asgs = asgs;
            for g in gs {
                asgs = solve(g, asgs, db, domain)?;
            }
            Ok(asgs)
        }
        Term::Predicate { name, args } => solve_predicate(name, args, asgs, db, domain),
        Term::Variable(v) => Err(EvalError::UnboundVariable(*v)),
        Term::Constant(c) => Err(EvalError::UnknownPredicate(format!("constant {c}"))),
    }
}

fn solve_predicate(
    name: &str,
    args: &[Term],
    asgs: Vec<Asg>,
    db: &GeoDatabase,
    domain: &[Value],
) -> Result<Vec<Asg>, EvalError> {
    match (name, args.len()) {
        ("const", 2) => {
            let Term::Predicate { name: ctor, args: inner } = &args[1] else {
                return Err(EvalError::TypeMismatch {
                    predicate: "const".into(),
                    arg: 2,
                });
            };
            let table = db
                .ctor_table(ctor)
                .ok_or_else(|| EvalError::UnknownPredicate(ctor.clone()))?;
            let text = match inner.first() {
                Some(Term::Constant(c)) => c.clone(),
                Some(Term::Variable(v)) => v.to_string(),
                _ => {
                    return Err(EvalError::TypeMismatch {
                        predicate: ctor.clone(),
                        arg: 1,
                    })
                }
            };
            let value = Value::entity(table, &text);
            let mut out = Vec::new();
            for a in asgs {
                out.extend(bind(&a, &args[0], &value));
            }
            Ok(out)
        }
        ("not", 1) => {
            let mut out = Vec::new();
            for a in asgs {
                if solve(&args[0], vec![a.clone()], db, domain)?.is_empty() {
                    out.push(a);
                }
            }
            Ok(out)
        }
        ("count", 3) => {
            let Term::Variable(b) = args[0] else {
                return Err(EvalError::TypeMismatch {
                    predicate: "count".into(),
                    arg: 1,
                });
            };
            let mut out = Vec::new();
            for a in asgs {
                // Count domain elements for which the goal is satisfiable.
                let mut n = 0usize;
                for candidate in domain {
                    let mut trial = a.clone();
                    if let Some(prev) = trial.insert(b, candidate.clone()) {
                        if prev != *candidate {
                            continue;
                        }
                    }
                    if !solve(&args[1], vec![trial], db, domain)?.is_empty() {
                        n += 1;
                    }
                }
                out.extend(bind(&a, &args[2], &Value::num(n as f64)));
            }
            Ok(out)
        }
        ("sum", 3) => {
            let Term::Variable(b) = args[0] else {
                return Err(EvalError::TypeMismatch {
                    predicate: "sum".into(),
                    arg: 1,
                });
            };
            let mut out = Vec::new();
            for a in asgs {
                let sols = dedup(solve(&args[1], vec![a.clone()], db, domain)?);
                let mut total = 0.0;
                for s in &sols {
                    match s.get(&b) {
                        Some(Value::Num(n)) => total += n.0,
                        Some(_) => {
                            return Err(EvalError::TypeMismatch {
                                predicate: "sum".into(),
                                arg: 1,
                            })
                        }
                        None => return Err(EvalError::UnboundVariable(b)),
                    }
                }
                out.extend(bind(&a, &args[2], &Value::num(total)));
            }
            Ok(out)
        }
        ("largest", 2) | ("smallest", 2) | ("highest", 2) | ("lowest", 2) | ("longest", 2)
        | ("shortest", 2) => {
            let Term::Variable(v) = args[0] else {
                return Err(EvalError::TypeMismatch {
                    predicate: name.to_string(),
                    arg: 1,
                });
            };
            let (column, maximize) = match name {
                "largest" => (None, true),
                "smallest" => (None, false),
                "highest" => (Some("elevation"), true),
                "lowest" => (Some("elevation"), false),
                "longest" => (Some("len"), true),
                "shortest" => (Some("len"), false),
                _ => unreachable!(),
            };
            let mut out = Vec::new();
            for a in asgs {
                let sols = solve(&args[1], vec![a], db, domain)?;
                if sols.is_empty() {
                    continue;
                }
                let mut keyed = Vec::new();
                for s in sols {
                    let val = s.get(&v).ok_or(EvalError::UnboundVariable(v))?;
                    let key = naive_magnitude(val, db, column).ok_or(EvalError::TypeMismatch {
                        predicate: name.to_string(),
                        arg: 1,
                    })?;
                    keyed.push((key, s));
                }
                let best = keyed
                    .iter()
                    .map(|(k, _)| *k)
                    .fold(
                        if maximize { f64::NEG_INFINITY } else { f64::INFINITY },
                        |x, y| if maximize { x.max(y) } else { x.min(y) },
                    );
                out.extend(keyed.into_iter().filter(|(k, _)| *k == best).map(|(_, s)| s));
            }
            Ok(dedup(out))
        }
        ("most", 3) | ("fewest", 3) => {
            let (Term::Variable(v), Term::Variable(w)) = (&args[0], &args[1]) else {
                return Err(EvalError::TypeMismatch {
                    predicate: name.to_string(),
                    arg: 1,
                });
            };
            let maximize = name == "most";
            let mut out = Vec::new();
            for a in asgs {
                let sols = solve(&args[2], vec![a], db, domain)?;
                if sols.is_empty() {
                    continue;
                }
                let mut groups: BTreeMap<Value, BTreeSet<Value>> = BTreeMap::new();
                for s in &sols {
                    let key = s.get(v).ok_or(EvalError::UnboundVariable(*v))?.clone();
                    let cnt = s.get(w).ok_or(EvalError::UnboundVariable(*w))?.clone();
                    groups.entry(key).or_default().insert(cnt);
                }
                let best = groups
                    .values()
                    .map(|s| s.len())
                    .fold(if maximize { usize::MIN } else { usize::MAX }, |x, y| {
                        if maximize {
                            x.max(y)
                        } else {
                            x.min(y)
                        }
                    });
                let winners: BTreeSet<Value> = groups
                    .into_iter()
                    .filter(|(_, s)| s.len() == best)
                    .map(|(k, _)| k)
                    .collect();
                out.extend(
                    sols.into_iter()
                        .filter(|s| winners.contains(s.get(v).unwrap())),
                );
            }
            Ok(dedup(out))
        }
        _ => {
            // Plain relation: enumerate the domain for unbound variables and
            // check the ground atom against the tables.
            let mut out = Vec::new();
            for a in asgs {
                ground_and_check(name, args, &a, db, domain, 0, &mut Vec::new(), &mut out)?;
            }
            Ok(out)
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn ground_and_check(
    name: &str,
    args: &[Term],
    asg: &Asg,
    db: &GeoDatabase,
    domain: &[Value],
    idx: usize,
    ground: &mut Vec<Value>,
    out: &mut Vec<Asg>,
) -> Result<(), EvalError> {
    if idx == args.len() {
        if holds(name, ground, db)? {
            let mut a = asg.clone();
            for (slot, val) in args.iter().zip(ground.iter()) {
                if let Term::Variable(v) = slot {
                    a.insert(*v, val.clone());
                }
            }
            out.push(a);
        }
        return Ok(());
    }
    match &args[idx] {
        Term::Variable(v) => {
            if let Some(val) = asg.get(v) {
                ground.push(val.clone());
                ground_and_check(name, args, asg, db, domain, idx + 1, ground, out)?;
                ground.pop();
            } else {
                for candidate in domain {
                    ground.push(candidate.clone());
                    ground_and_check(name, args, asg, db, domain, idx + 1, ground, out)?;
                    ground.pop();
                }
            }
        }
        Term::Constant(c) => {
            ground.push(Value::Str(c.to_lowercase()));
            ground_and_check(name, args, asg, db, domain, idx + 1, ground, out)?;
            ground.pop();
        }
        _ => {
            return Err(EvalError::TypeMismatch {
                predicate: name.to_string(),
                arg: idx + 1,
            })
        }
    }
    Ok(())
}

/// Truth of a fully ground atom, by scanning the raw tables.
fn holds(name: &str, ground: &[Value], db: &GeoDatabase) -> Result<bool, EvalError> {
    match (name, ground.len()) {
        ("major", 1) => {
            let rules: &[(&str, &str, f64)] =
                &[("city", "population", 150_000.0), ("river", "len", 750.0)];
            for (tname, col, thr) in rules {
                if let (Value::Entity { table, name }, Some(t)) = (&ground[0], db.table(tname)) {
                    if table == tname {
                        if let (Some(ci), Some(row)) = (t.column_index(col), t.row_of(name)) {
                            if matches!(row.cells[ci], Cell::Num(x) if x > *thr) {
                                return Ok(true);
                            }
                        }
                    }
                }
            }
            Ok(false)
        }
        ("size", 2) => {
            let Some(mag) = naive_magnitude(&ground[0], db, None) else {
                return Ok(false);
            };
            Ok(matches!(&ground[1], Value::Num(n) if n.0 == mag))
        }
        (_, 1) => {
            if let Some(t) = db.table(name) {
                if let Value::Entity { table, name: n } = &ground[0] {
                    return Ok(table == &t.name && t.row_of(n).is_some());
                }
                return Ok(false);
            }
            let tables = db.tables_with_column(name);
            if tables.is_empty() {
                return Err(EvalError::UnknownPredicate(name.to_string()));
            }
            for t in tables {
                let ci = t.column_index(name).unwrap();
                for row in &t.rows {
                    if cell_contains(t, ci, &row.cells[ci], &ground[0]) {
                        return Ok(true);
                    }
                }
            }
            Ok(false)
        }
        (_, 2) => {
            let tables = db.tables_with_column(name);
            if tables.is_empty() {
                return Err(EvalError::UnknownPredicate(name.to_string()));
            }
            let Value::Entity { table, name: ent } = &ground[0] else {
                return Ok(false);
            };
            for t in tables {
                if &t.name != table {
                    continue;
                }
                let ci = t.column_index(name).unwrap();
                if let Some(row) = t.row_of(ent) {
                    if cell_contains(t, ci, &row.cells[ci], &ground[1]) {
                        return Ok(true);
                    }
                }
            }
            Ok(false)
        }
        _ => Err(EvalError::UnknownPredicate(name.to_string())),
    }
}

/// Does this cell contain the value? Reimplemented here rather than shared
/// with the engine so the two interpreters cannot hide each other's bugs.
fn cell_contains(table: &super::Table, col: usize, cell: &Cell, value: &Value) -> bool {
    match cell {
        Cell::Num(x) => matches!(value, Value::Num(n) if n.0 == *x),
        Cell::Str(s) => {
            if col == 0 {
                matches!(value, Value::Entity { table: t, name }
                    if t == &table.name && name.eq_ignore_ascii_case(s))
            } else {
                matches!(value, Value::Str(v) if v.eq_ignore_ascii_case(s))
            }
        }
        Cell::Refs(list) => {
            let target = match &table.columns[col].kind {
                ColumnKind::Ref(t) => t,
                _ => return false,
            };
            matches!(value, Value::Entity { table: t, name }
                if t == target && list.iter().any(|r| r.eq_ignore_ascii_case(name)))
        }
    }
}

fn naive_magnitude(value: &Value, db: &GeoDatabase, column: Option<&str>) -> Option<f64> {
    match value {
        Value::Num(n) => Some(n.0),
        Value::Entity { table, name } => {
            let t = db.table(table)?;
            let ci = match column {
                Some(c) => t.column_index(c)?,
                None => t.columns.iter().position(|c| c.salient)?,
            };
            match t.row_of(name)?.cells.get(ci)? {
                Cell::Num(x) => Some(*x),
                _ => None,
            }
        }
        Value::Str(_) => None,
    }
}

fn bind(asg: &Asg, slot: &Term, value: &Value) -> Option<Asg> {
    match slot {
        Term::Variable(v) => match asg.get(v) {
            Some(bound) if bound == value => Some(asg.clone()),
            Some(_) => None,
            None => {
                let mut a = asg.clone();
                a.insert(*v, value.clone());
                Some(a)
            }
        },
        Term::Constant(c) => {
            let ok = match value {
                Value::Str(s) => s.eq_ignore_ascii_case(c),
                Value::Entity { name, .. } => name.eq_ignore_ascii_case(c),
                Value::Num(n) => c.parse::<f64>().map(|x| x == n.0).unwrap_or(false),
            };
            ok.then(|| asg.clone())
        }
        _ => None,
    }
}

fn dedup(asgs: Vec<Asg>) -> Vec<Asg> {
    let mut seen = BTreeSet::new();
    asgs.into_iter().filter(|a| seen.insert(a.clone())).collect()
}
