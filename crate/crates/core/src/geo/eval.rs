//! Denotation semantics for logic forms.
//!
//! A form is evaluated by propagating a set of partial variable environments
//! through its goals left to right. Aggregates (`count`, `sum`) close over
//! their inner variables and expose only the output variable; superlatives
//! and `most`/`fewest` filter the solution set and keep all bindings.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use super::{Cell, ColumnKind, Denotation, GeoDatabase, Table, Value};
use crate::logic_form::{LogicForm, Term};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("unknown predicate {0}")]
    UnknownPredicate(String),
    #[error("unbound variable {0}")]
    UnboundVariable(char),
    #[error("type mismatch in {predicate} at argument {arg}")]
    TypeMismatch { predicate: String, arg: usize },
}

/// Cities above this population and rivers above this length count as major.
const MAJOR_CITY_POPULATION: f64 = 150_000.0;
const MAJOR_RIVER_LEN: f64 = 750.0;

pub(crate) type Env = BTreeMap<char, Value>;

/// Evaluate a logic form whose root is `answer(V, goal, ...)` and return the
/// set of values bound to the answer variable.
pub fn evaluate(lf: &LogicForm, db: &GeoDatabase) -> Result<Denotation, EvalError> {
    let Term::Predicate { name, args } = &lf.root else {
        return Err(EvalError::UnknownPredicate(render_kind(&lf.root)));
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
    let mut envs = vec![Env::new()];
    for goal in &args[1..] {
        envs = eval_goal(goal, envs, db)?;
    }
    let mut out = Denotation::new();
    for env in envs {
        match env.get(&ans) {
            Some(v) => {
                out.insert(v.clone());
            }
            None => return Err(EvalError::UnboundVariable(ans)),
        }
    }
    Ok(out)
}

/// True iff both forms evaluate to identical answer sets. An unevaluable
/// prediction scores false; an unevaluable gold form is an error.
pub fn denotation_match(
    pred: &LogicForm,
    gold: &LogicForm,
    db: &GeoDatabase,
) -> Result<bool, EvalError> {
    let gold_set = evaluate(gold, db)?;
    match evaluate(pred, db) {
        Ok(pred_set) => Ok(pred_set == gold_set),
        Err(_) => Ok(false),
    }
}

fn render_kind(t: &Term) -> String {
    match t {
        Term::Variable(v) => format!("variable {v}"),
        Term::Constant(c) => format!("constant {c}"),
        Term::Conjunction(_) => "conjunction".into(),
        Term::Predicate { name, .. } => name.clone(),
    }
}

fn eval_goal(goal: &Term, envs: Vec<Env>, db: &GeoDatabase) -> Result<Vec<Env>, EvalError> {
    match goal {
        Term::Conjunction(goals) => {
            let mut envs = envs;
            for g in goals {
                envs = eval_goal(g, envs, db)?;
            }
            Ok(envs)
        }
        Term::Predicate { name, args } => eval_predicate(name, args, envs, db),
        Term::Variable(v) => Err(EvalError::UnboundVariable(*v)),
        Term::Constant(c) => Err(EvalError::UnknownPredicate(format!("constant {c}"))),
    }
}

fn eval_predicate(
    name: &str,
    args: &[Term],
    envs: Vec<Env>,
    db: &GeoDatabase,
) -> Result<Vec<Env>, EvalError> {
    match (name, args.len()) {
        ("const", 2) => eval_const(args, envs, db),
        ("count", 3) => eval_count(args, envs, db),
        ("sum", 3) => eval_sum(args, envs, db),
        ("not", 1) => {
            let mut out = Vec::new();
            for env in envs {
                if eval_goal(&args[0], vec![env.clone()], db)?.is_empty() {
                    out.push(env);
                }
            }
            Ok(out)
        }
        ("largest", 2) | ("smallest", 2) | ("highest", 2) | ("lowest", 2) | ("longest", 2)
        | ("shortest", 2) => eval_superlative(name, args, envs, db),
        ("most", 3) | ("fewest", 3) => eval_most(name, args, envs, db),
        ("major", 1) => eval_major(args, envs, db),
        ("size", 2) => eval_size(args, envs, db),
        _ => {
            if db.is_ctor(name) {
                // Constructors are only meaningful inside const(...).
                return Err(EvalError::TypeMismatch {
                    predicate: name.to_string(),
                    arg: 0,
                });
            }
            if args.len() == 1 {
                if db.table(name).is_some() {
                    return eval_type(name, &args[0], envs, db);
                }
                if !db.tables_with_column(name).is_empty() {
                    return eval_column_unary(name, &args[0], envs, db);
                }
            }
            if args.len() == 2 && !db.tables_with_column(name).is_empty() {
                return eval_column_binary(name, args, envs, db);
            }
            Err(EvalError::UnknownPredicate(name.to_string()))
        }
    }
}

/// Unify `slot` (a variable or embedded constant) with a concrete value.
fn unify(env: &Env, slot: &Term, value: &Value) -> Option<Env> {
    match slot {
        Term::Variable(v) => match env.get(v) {
            Some(bound) if bound == value => Some(env.clone()),
            Some(_) => None,
            None => {
                let mut e = env.clone();
                e.insert(*v, value.clone());
                Some(e)
            }
        },
        Term::Constant(c) => {
            let ok = match value {
                Value::Str(s) => s.eq_ignore_ascii_case(c),
                Value::Entity { name, .. } => name.eq_ignore_ascii_case(c),
                Value::Num(n) => c.parse::<f64>().map(|x| x == n.0).unwrap_or(false),
            };
            ok.then(|| env.clone())
        }
        _ => None,
    }
}

fn cell_values(table: &Table, col: usize, cell: &Cell) -> Vec<Value> {
    match cell {
        Cell::Num(x) => vec![Value::num(*x)],
        Cell::Str(s) => {
            if col == 0 {
                vec![Value::entity(&table.name, s)]
            } else {
                vec![Value::Str(s.to_lowercase())]
            }
        }
        Cell::Refs(list) => {
            let target = match &table.columns[col].kind {
                ColumnKind::Ref(t) => t.as_str(),
                _ => unreachable!(),
            };
            list.iter().map(|n| Value::entity(target, n)).collect()
        }
    }
}

fn eval_const(args: &[Term], envs: Vec<Env>, db: &GeoDatabase) -> Result<Vec<Env>, EvalError> {
    let Term::Predicate {
        name: ctor,
        args: inner,
    } = &args[1]
    else {
        return Err(EvalError::TypeMismatch {
            predicate: "const".into(),
            arg: 2,
        });
    };
    let table = db
        .ctor_table(ctor)
        .ok_or_else(|| EvalError::UnknownPredicate(ctor.clone()))?;
    if inner.len() != 1 {
        return Err(EvalError::TypeMismatch {
            predicate: ctor.clone(),
            arg: 1,
        });
    }
    let text = match &inner[0] {
        Term::Constant(c) => c.clone(),
        Term::Variable(v) => v.to_string(),
        _ => {
            return Err(EvalError::TypeMismatch {
                predicate: ctor.clone(),
                arg: 1,
            })
        }
    };
    let value = Value::entity(table, &text);
    Ok(envs
        .iter()
        .filter_map(|env| unify(env, &args[0], &value))
        .collect())
}

/// `state(A)`: membership of the table's entities.
fn eval_type(
    table_name: &str,
    arg: &Term,
    envs: Vec<Env>,
    db: &GeoDatabase,
) -> Result<Vec<Env>, EvalError> {
    let table = db.table(table_name).unwrap();
    let mut out = Vec::new();
    for env in envs {
        if let Term::Variable(v) = arg {
            if let Some(val) = env.get(v) {
                if matches!(val, Value::Entity { table: t, name }
                    if t == table_name && table.row_of(name).is_some())
                {
                    out.push(env);
                }
                continue;
            }
        }
        for row in &table.rows {
            let value = Value::entity(table_name, table.entity_name(row));
            if let Some(e) = unify(&env, arg, &value) {
                out.push(e);
            }
        }
    }
    Ok(out)
}

/// `capital(A)`: membership of a column's values across all tables that
/// declare the column.
fn eval_column_unary(
    column: &str,
    arg: &Term,
    envs: Vec<Env>,
    db: &GeoDatabase,
) -> Result<Vec<Env>, EvalError> {
    let mut members = BTreeSet::new();
    for table in db.tables_with_column(column) {
        let ci = table.column_index(column).unwrap();
        for row in &table.rows {
            members.extend(cell_values(table, ci, &row.cells[ci]));
        }
    }
    let mut out = Vec::new();
    for env in envs {
        if let Term::Variable(v) = arg {
            if let Some(val) = env.get(v) {
                if members.contains(val) {
                    out.push(env);
                }
                continue;
            }
        }
        for m in &members {
            if let Some(e) = unify(&env, arg, m) {
                out.push(e);
            }
        }
    }
    Ok(out)
}

/// `population(B,A)`: row/value pairs of a named column.
fn eval_column_binary(
    column: &str,
    args: &[Term],
    envs: Vec<Env>,
    db: &GeoDatabase,
) -> Result<Vec<Env>, EvalError> {
    let mut out = Vec::new();
    for env in envs {
        for table in db.tables_with_column(column) {
            let ci = table.column_index(column).unwrap();
            // Entity argument already bound: look up its row directly.
            if let Term::Variable(v) = &args[0] {
                if let Some(Value::Entity { table: t, name }) = env.get(v) {
                    if t != &table.name {
                        continue;
                    }
                    if let Some(row) = table.row_of(name) {
                        for val in cell_values(table, ci, &row.cells[ci]) {
                            if let Some(e) = unify(&env, &args[1], &val) {
                                out.push(e);
                            }
                        }
                    }
                    continue;
                }
            }
            for row in &table.rows {
                let left = Value::entity(&table.name, table.entity_name(row));
                let Some(env1) = unify(&env, &args[0], &left) else {
                    continue;
                };
                for val in cell_values(table, ci, &row.cells[ci]) {
                    if let Some(e) = unify(&env1, &args[1], &val) {
                        out.push(e);
                    }
                }
            }
        }
    }
    Ok(out)
}

fn eval_major(args: &[Term], envs: Vec<Env>, db: &GeoDatabase) -> Result<Vec<Env>, EvalError> {
    let rules: &[(&str, &str, f64)] = &[
        ("city", "population", MAJOR_CITY_POPULATION),
        ("river", "len", MAJOR_RIVER_LEN),
    ];
    let mut out = Vec::new();
    for env in envs {
        for (table_name, column, threshold) in rules {
            let Some(table) = db.table(table_name) else {
                continue;
            };
            let Some(ci) = table.column_index(column) else {
                continue;
            };
            for row in &table.rows {
                if !matches!(row.cells[ci], Cell::Num(x) if x > *threshold) {
                    continue;
                }
                let value = Value::entity(table_name, table.entity_name(row));
                if let Some(e) = unify(&env, &args[0], &value) {
                    out.push(e);
                }
            }
        }
    }
    Ok(out)
}

fn eval_size(args: &[Term], envs: Vec<Env>, db: &GeoDatabase) -> Result<Vec<Env>, EvalError> {
    let mut out = Vec::new();
    for env in envs {
        let Term::Variable(v) = &args[0] else {
            return Err(EvalError::TypeMismatch {
                predicate: "size".into(),
                arg: 1,
            });
        };
        let Some(val) = env.get(v) else {
            return Err(EvalError::UnboundVariable(*v));
        };
        let magnitude = salient_magnitude(val, db).ok_or(EvalError::TypeMismatch {
            predicate: "size".into(),
            arg: 1,
        })?;
        if let Some(e) = unify(&env, &args[1], &Value::num(magnitude)) {
            out.push(e);
        }
    }
    Ok(out)
}

/// The table's `!`-marked column for entities, the number itself for numbers.
pub(crate) fn salient_magnitude(value: &Value, db: &GeoDatabase) -> Option<f64> {
    column_magnitude(value, db, None)
}

/// Magnitude used by a superlative: an explicit column (`elevation` for
/// highest/lowest, `len` for longest/shortest) or the salient column.
pub(crate) fn column_magnitude(value: &Value, db: &GeoDatabase, column: Option<&str>) -> Option<f64> {
    match value {
        Value::Num(n) => Some(n.0),
        Value::Entity { table, name } => {
            let t = db.table(table)?;
            let ci = match column {
                Some(c) => t.column_index(c)?,
                None => t.salient_column()?,
            };
            match t.row_of(name)?.cells.get(ci)? {
                Cell::Num(x) => Some(*x),
                _ => None,
            }
        }
        Value::Str(_) => None,
    }
}

fn eval_superlative(
    name: &str,
    args: &[Term],
    envs: Vec<Env>,
    db: &GeoDatabase,
) -> Result<Vec<Env>, EvalError> {
    let Term::Variable(v) = &args[0] else {
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
    for env in envs {
        let sols = eval_goal(&args[1], vec![env], db)?;
        if sols.is_empty() {
            continue; // vacuous superlative: no candidates, no answers
        }
        let mut keyed = Vec::with_capacity(sols.len());
        for sol in sols {
            let val = sol.get(v).ok_or(EvalError::UnboundVariable(*v))?;
            let key = column_magnitude(val, db, column).ok_or(EvalError::TypeMismatch {
                predicate: name.to_string(),
                arg: 1,
            })?;
            keyed.push((key, sol));
        }
        let best = keyed
            .iter()
            .map(|(k, _)| *k)
            .fold(if maximize { f64::NEG_INFINITY } else { f64::INFINITY }, |a, b| {
                if maximize {
                    a.max(b)
                } else {
                    a.min(b)
                }
            });
        // Ties keep every co-extreme solution.
        out.extend(keyed.into_iter().filter(|(k, _)| *k == best).map(|(_, s)| s));
    }
    Ok(dedup_envs(out))
}

fn eval_most(
    name: &str,
    args: &[Term],
    envs: Vec<Env>,
    db: &GeoDatabase,
) -> Result<Vec<Env>, EvalError> {
    let (Term::Variable(v), Term::Variable(w)) = (&args[0], &args[1]) else {
        return Err(EvalError::TypeMismatch {
            predicate: name.to_string(),
            arg: 1,
        });
    };
    let maximize = name == "most";
    let mut out = Vec::new();
    for env in envs {
        let sols = eval_goal(&args[2], vec![env], db)?;
        if sols.is_empty() {
            continue;
        }
        let mut groups: BTreeMap<Value, BTreeSet<Value>> = BTreeMap::new();
        for sol in &sols {
            let key = sol.get(v).ok_or(EvalError::UnboundVariable(*v))?;
            let counted = sol.get(w).ok_or(EvalError::UnboundVariable(*w))?;
            groups
                .entry(key.clone())
                .or_default()
                .insert(counted.clone());
        }
        let best = groups
            .values()
            .map(|s| s.len())
            .fold(if maximize { usize::MIN } else { usize::MAX }, |a, b| {
                if maximize {
                    a.max(b)
                } else {
                    a.min(b)
                }
            });
        let winners: BTreeSet<&Value> = groups
            .iter()
            .filter(|(_, s)| s.len() == best)
            .map(|(k, _)| k)
            .collect();
        out.extend(
            sols.into_iter()
                .filter(|sol| winners.contains(sol.get(v).unwrap())),
        );
    }
    Ok(dedup_envs(out))
}

fn eval_count(args: &[Term], envs: Vec<Env>, db: &GeoDatabase) -> Result<Vec<Env>, EvalError> {
    let Term::Variable(counted) = &args[0] else {
        return Err(EvalError::TypeMismatch {
            predicate: "count".into(),
            arg: 1,
        });
    };
    let mut out = Vec::new();
    for env in envs {
        let sols = eval_goal(&args[1], vec![env.clone()], db)?;
        let mut distinct = BTreeSet::new();
        for sol in &sols {
            distinct.insert(
                sol.get(counted)
                    .ok_or(EvalError::UnboundVariable(*counted))?
                    .clone(),
            );
        }
        if let Some(e) = unify(&env, &args[2], &Value::num(distinct.len() as f64)) {
            out.push(e);
        }
    }
    Ok(out)
}

fn eval_sum(args: &[Term], envs: Vec<Env>, db: &GeoDatabase) -> Result<Vec<Env>, EvalError> {
    let Term::Variable(summed) = &args[0] else {
        return Err(EvalError::TypeMismatch {
            predicate: "sum".into(),
            arg: 1,
        });
    };
    let mut out = Vec::new();
    for env in envs {
        let sols = dedup_envs(eval_goal(&args[1], vec![env.clone()], db)?);
        let mut total = 0.0;
        for sol in &sols {
            match sol.get(summed) {
                Some(Value::Num(n)) => total += n.0,
                Some(_) => {
                    return Err(EvalError::TypeMismatch {
                        predicate: "sum".into(),
                        arg: 1,
                    })
                }
                None => return Err(EvalError::UnboundVariable(*summed)),
            }
        }
        if let Some(e) = unify(&env, &args[2], &Value::num(total)) {
            out.push(e);
        }
    }
    Ok(out)
}

fn dedup_envs(envs: Vec<Env>) -> Vec<Env> {
    let mut seen = BTreeSet::new();
    envs.into_iter()
        .filter(|e| seen.insert(e.clone()))
        .collect()
}
