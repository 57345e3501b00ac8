//! Training-pair augmentation: prepositional-phrase shuffling plus three
//! recombination strategies (entity replacement, nested relative clauses,
//! and conjunction of same-type questions).

use std::collections::BTreeMap;

use crate::geo::{evaluate, GeoDatabase, Value};
use crate::logic_form::{LogicForm, Term};
use crate::text::{capitalize, is_punct};

/// A question paired with its gold logic form.
#[derive(Debug, Clone, PartialEq)]
pub struct QaPair {
    pub question: Vec<String>,
    pub form: LogicForm,
}

const PREPOSITIONS: &[&str] = &[
    "in", "on", "at", "of", "through", "over", "from", "to", "near", "between", "by", "into",
    "across", "along", "around", "inside", "within",
];

const VERBS: &[&str] = &[
    "is", "are", "was", "were", "do", "does", "did", "has", "have", "had", "run", "runs", "flow",
    "flows", "traverse", "traverses", "border", "borders", "live", "lives", "lie", "lies", "pass",
    "passes", "go", "goes", "serve", "serves", "name",
];

const COPULAS: &[&str] = &["is", "are", "was", "were"];

/// Words safe to lowercase when they lose sentence-initial position.
const FUNCTION_WORDS: &[&str] = &[
    "what", "which", "where", "how", "who", "name", "give", "list", "show", "in", "on", "at",
    "of", "through", "over", "from", "to", "the", "a", "an", "is", "are", "does", "do",
];

fn is_prep(tok: &str) -> bool {
    PREPOSITIONS.contains(&tok.to_lowercase().as_str())
}

fn is_verb(tok: &str) -> bool {
    VERBS.contains(&tok.to_lowercase().as_str())
}

/// Move an edge-anchored prepositional phrase to the opposite edge. Returns
/// `None` when neither sentence edge carries one. The paired logic form is
/// left untouched by construction.
pub fn pp_shuffle(question: &[String]) -> Option<Vec<String>> {
    let (body, punct) = split_terminal_punct(question);
    if body.len() < 2 {
        return None;
    }

    // Leading PP: starts with a preposition, runs until the first verb.
    if is_prep(&body[0]) {
        let verb_at = body.iter().position(|t| is_verb(t))?;
        if verb_at >= 1 && verb_at <= 4 && verb_at < body.len() {
            let pp = &body[..verb_at];
            let mut suffix: Vec<String> = body[verb_at..].to_vec();
            // "is Mount Mckinley" reads better re-inverted: "Mount Mckinley is".
            if COPULAS.contains(&suffix[0].to_lowercase().as_str()) && suffix.len() > 1 {
                let cop = suffix.remove(0);
                suffix.push(cop);
            }
            let mut out = suffix;
            out.extend(pp.iter().cloned());
            return Some(fix_case(question, out, punct));
        }
        return None;
    }

    // Trailing PP: the last preposition with no verb after it.
    let last_prep = body.iter().rposition(|t| is_prep(t))?;
    if last_prep == 0 || body[last_prep..].iter().any(|t| is_verb(t)) {
        return None;
    }
    if body.len() - last_prep > 4 {
        return None;
    }
    let mut out: Vec<String> = body[last_prep..].to_vec();
    out.extend(body[..last_prep].iter().cloned());
    Some(fix_case(question, out, punct))
}

fn split_terminal_punct(tokens: &[String]) -> (&[String], Option<&String>) {
    match tokens.last() {
        Some(t) if is_punct(t) => (&tokens[..tokens.len() - 1], Some(t)),
        _ => (tokens, None),
    }
}

fn fix_case(original: &[String], mut out: Vec<String>, punct: Option<&String>) -> Vec<String> {
    let old_first = original[0].clone();
    for tok in out.iter_mut() {
        if *tok == old_first && FUNCTION_WORDS.contains(&tok.to_lowercase().as_str()) {
            *tok = tok.to_lowercase();
            break;
        }
    }
    if let Some(first) = out.first_mut() {
        *first = capitalize(first);
    }
    if let Some(p) = punct {
        out.push(p.clone());
    }
    out
}

/// Every `const(_, ctor(X))` in the form, with its constructor and table.
fn const_mentions(form: &LogicForm, db: &GeoDatabase) -> Vec<(String, String)> {
    fn walk(t: &Term, db: &GeoDatabase, out: &mut Vec<(String, String)>) {
        match t {
            Term::Predicate { name, args } if name == "const" && args.len() == 2 => {
                if let Term::Predicate { name: ctor, args: inner } = &args[1] {
                    if let (Some(table), Some(Term::Constant(x))) =
                        (db.ctor_table(ctor), inner.first())
                    {
                        out.push((table.to_string(), x.clone()));
                    }
                }
            }
            Term::Predicate { args, .. } => args.iter().for_each(|a| walk(a, db, out)),
            Term::Conjunction(ts) => ts.iter().for_each(|a| walk(a, db, out)),
            _ => {}
        }
    }
    let mut out = Vec::new();
    walk(&form.root, db, &mut out);
    out
}

fn replace_constant(term: &Term, from: &str, to: &str) -> Term {
    match term {
        Term::Constant(c) if c.eq_ignore_ascii_case(from) => Term::Constant(to.to_string()),
        Term::Constant(c) => Term::Constant(c.clone()),
        Term::Variable(v) => Term::Variable(*v),
        Term::Predicate { name, args } => Term::Predicate {
            name: name.clone(),
            args: args.iter().map(|a| replace_constant(a, from, to)).collect(),
        },
        Term::Conjunction(ts) => {
            Term::Conjunction(ts.iter().map(|a| replace_constant(a, from, to)).collect())
        }
    }
}

/// Find the token span of a multi-word value in the question.
fn find_span(question: &[String], value: &str) -> Option<(usize, usize)> {
    let value_toks: Vec<String> = value.split_whitespace().map(|t| t.to_lowercase()).collect();
    if value_toks.is_empty() {
        return None;
    }
    (0..question.len()).find_map(|start| {
        let end = start + value_toks.len();
        if end > question.len() {
            return None;
        }
        let matches = question[start..end]
            .iter()
            .zip(&value_toks)
            .all(|(a, b)| a.to_lowercase() == *b);
        matches.then_some((start, end))
    })
}

/// Type-1 recombination: swap each mentioned entity for every other entity
/// of the same table, rewriting both question and form.
pub fn entity_replace(pair: &QaPair, db: &GeoDatabase) -> Vec<QaPair> {
    let mut out = Vec::new();
    for (table_name, value) in const_mentions(&pair.form, db) {
        let Some((start, end)) = find_span(&pair.question, &value) else {
            continue;
        };
        let Some(table) = db.table(&table_name) else {
            continue;
        };
        for row in &table.rows {
            let replacement = table.entity_name(row);
            if replacement.eq_ignore_ascii_case(&value) {
                continue;
            }
            let mut question = pair.question[..start].to_vec();
            question.extend(replacement.split_whitespace().map(str::to_string));
            question.extend(pair.question[end..].iter().cloned());
            let form = LogicForm {
                root: replace_constant(&pair.form.root, &value, replacement),
            };
            out.push(QaPair { question, form });
        }
    }
    out
}

/// The unary table predicate applied to the answer variable, if any.
fn head_type(form: &LogicForm, db: &GeoDatabase) -> Option<String> {
    let Term::Predicate { name, args } = &form.root else {
        return None;
    };
    if name != "answer" || args.is_empty() {
        return None;
    }
    let Term::Variable(ans) = args[0] else {
        return None;
    };
    fn walk(t: &Term, ans: char, db: &GeoDatabase) -> Option<String> {
        match t {
            Term::Predicate { name, args }
                if args.len() == 1
                    && args[0] == Term::Variable(ans)
                    && db.table(name).is_some() =>
            {
                Some(name.clone())
            }
            Term::Predicate { args, .. } => args.iter().find_map(|a| walk(a, ans, db)),
            Term::Conjunction(ts) => ts.iter().find_map(|a| walk(a, ans, db)),
            _ => None,
        }
    }
    args[1..].iter().find_map(|g| walk(g, ans, db))
}

/// Question minus its wh-word and type noun ("what state has X" -> "has X").
fn strip_wh_prefix(question: &[String], table: &str) -> Option<Vec<String>> {
    let (body, _) = split_terminal_punct(question);
    if body.len() < 3 {
        return None;
    }
    let wh = body[0].to_lowercase();
    if wh != "what" && wh != "which" {
        return None;
    }
    let noun = body[1].to_lowercase();
    if noun != table && noun != format!("{table}s") {
        return None;
    }
    Some(body[2..].to_vec())
}

fn fresh_renaming(body: &Term, taken: &mut Vec<char>, keep: char) -> BTreeMap<char, char> {
    let mut map = BTreeMap::new();
    for v in body.variables() {
        if v == keep {
            continue;
        }
        let mut candidate = 'A';
        while taken.contains(&candidate) || map.values().any(|&c| c == candidate) {
            candidate = ((candidate as u8) + 1) as char;
        }
        map.insert(v, candidate);
        taken.push(candidate);
    }
    map
}

/// Type-2 recombination: replace an entity mention in `outer` with a
/// relative-clause rendering of `inner`, splicing inner's body into the
/// outer form. Requires inner to denote exactly one entity of the same table
/// as the mention.
pub fn nested_replace(outer: &QaPair, inner: &QaPair, db: &GeoDatabase) -> Option<QaPair> {
    let inner_table = head_type(&inner.form, db)?;
    let denotation = evaluate(&inner.form, db).ok()?;
    if denotation.len() != 1 {
        return None;
    }
    match denotation.iter().next() {
        Some(Value::Entity { table, .. }) if *table == inner_table => {}
        _ => return None,
    }

    // First outer mention of the same table.
    let (_, value) = const_mentions(&outer.form, db)
        .into_iter()
        .find(|(t, _)| *t == inner_table)?;
    let (start, end) = find_span(&outer.question, &value)?;

    let clause_tail = strip_wh_prefix(&inner.question, &inner_table)?;
    let mut question = outer.question[..start].to_vec();
    question.push(inner_table.clone());
    question.push("that".to_string());
    question.extend(clause_tail);
    question.extend(outer.question[end..].iter().cloned());

    let form = splice_inner_body(outer, inner, db, &inner_table, &value)?;
    Some(QaPair { question, form })
}

fn splice_inner_body(
    outer: &QaPair,
    inner: &QaPair,
    db: &GeoDatabase,
    table: &str,
    value: &str,
) -> Option<LogicForm> {
    let Term::Predicate { name, args } = &inner.form.root else {
        return None;
    };
    if name != "answer" || args.len() != 2 {
        return None;
    }
    let Term::Variable(inner_ans) = args[0] else {
        return None;
    };
    let inner_body = &args[1];

    // Locate the const term in the outer form and grab its variable.
    let ctor = db.ctor_for_table(table)?.to_string();
    let target_var = find_const_var(&outer.form.root, &ctor, value)?;

    let mut taken = outer.form.root.variables();
    let mut rename = fresh_renaming(inner_body, &mut taken, inner_ans);
    rename.insert(inner_ans, target_var);
    let renamed = inner_body.rename_vars(&rename);

    // Replace the const goal with the inner body, putting the body first in
    // its conjunction so it binds the variable before the siblings use it.
    let root = replace_const_goal(&outer.form.root, &ctor, value, &renamed)?;
    Some(LogicForm { root })
}

fn find_const_var(t: &Term, ctor: &str, value: &str) -> Option<char> {
    match t {
        Term::Predicate { name, args } if name == "const" && args.len() == 2 => {
            if let (Term::Variable(v), Term::Predicate { name: c, args: inner }) =
                (&args[0], &args[1])
            {
                if c == ctor
                    && matches!(inner.first(), Some(Term::Constant(x)) if x.eq_ignore_ascii_case(value))
                {
                    return Some(*v);
                }
            }
            None
        }
        Term::Predicate { args, .. } => args.iter().find_map(|a| find_const_var(a, ctor, value)),
        Term::Conjunction(ts) => ts.iter().find_map(|a| find_const_var(a, ctor, value)),
        _ => None,
    }
}

fn replace_const_goal(t: &Term, ctor: &str, value: &str, body: &Term) -> Option<Term> {
    fn is_target(t: &Term, ctor: &str, value: &str) -> bool {
        if let Term::Predicate { name, args } = t {
            if name == "const" && args.len() == 2 {
                if let Term::Predicate { name: c, args: inner } = &args[1] {
                    return c == ctor
                        && matches!(inner.first(), Some(Term::Constant(x)) if x.eq_ignore_ascii_case(value));
                }
            }
        }
        false
    }
    match t {
        Term::Conjunction(ts) if ts.iter().any(|g| is_target(g, ctor, value)) => {
            let mut out = vec![body.clone()];
            out.extend(
                ts.iter()
                    .filter(|g| !is_target(g, ctor, value))
                    .cloned(),
            );
            Some(Term::Conjunction(out))
        }
        Term::Conjunction(ts) => {
            let mut changed = false;
            let mut out = Vec::with_capacity(ts.len());
            for g in ts {
                match replace_const_goal(g, ctor, value, body) {
                    Some(ng) if !changed => {
                        out.push(ng);
                        changed = true;
                    }
                    _ => out.push(g.clone()),
                }
            }
            changed.then_some(Term::Conjunction(out))
        }
        Term::Predicate { name, args } => {
            let mut changed = false;
            let mut out = Vec::with_capacity(args.len());
            for a in args {
                if !changed && is_target(a, ctor, value) {
                    out.push(body.clone());
                    changed = true;
                    continue;
                }
                match replace_const_goal(a, ctor, value, body) {
                    Some(na) if !changed => {
                        out.push(na);
                        changed = true;
                    }
                    _ => out.push(a.clone()),
                }
            }
            changed.then_some(Term::Predicate {
                name: name.clone(),
                args: out,
            })
        }
        _ => None,
    }
}

/// Type-3 recombination: conjoin two questions asking for the same answer
/// type; the second question loses its wh-prefix.
pub fn conjunction_combine(a: &QaPair, b: &QaPair, db: &GeoDatabase) -> Option<QaPair> {
    let ta = head_type(&a.form, db)?;
    let tb = head_type(&b.form, db)?;
    if ta != tb {
        return None;
    }
    let (Term::Predicate { name: na, args: aa }, Term::Predicate { name: nb, args: ab }) =
        (&a.form.root, &b.form.root)
    else {
        return None;
    };
    if na != "answer" || nb != "answer" || aa.len() != 2 || ab.len() != 2 {
        return None;
    }
    let (Term::Variable(va), Term::Variable(vb)) = (&aa[0], &ab[0]) else {
        return None;
    };

    let mut taken = a.form.root.variables();
    let mut rename = fresh_renaming(&ab[1], &mut taken, *vb);
    rename.insert(*vb, *va);
    let body_b = ab[1].rename_vars(&rename);

    let mut goals = conjuncts(&aa[1]);
    for g in conjuncts(&body_b) {
        if !goals.contains(&g) {
            goals.push(g);
        }
    }
    let form = LogicForm {
        root: Term::Predicate {
            name: "answer".into(),
            args: vec![Term::Variable(*va), Term::Conjunction(goals)],
        },
    };

    let (body_a, punct) = split_terminal_punct(&a.question);
    let tail_b = strip_wh_prefix(&b.question, &ta)?;
    let mut question = body_a.to_vec();
    question.push("and".to_string());
    question.extend(tail_b);
    if let Some(p) = punct {
        question.push(p.clone());
    }
    Some(QaPair { question, form })
}

fn conjuncts(t: &Term) -> Vec<Term> {
    match t {
        Term::Conjunction(ts) => ts.clone(),
        other => vec![other.clone()],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{join, tokenize};

    #[test]
    fn shuffles_trailing_preposition() {
        let q = tokenize("Which states does the Mississippi river run through ?");
        let out = pp_shuffle(&q).unwrap();
        assert_eq!(
            join(&out),
            "Through which states does the Mississippi river run ?"
        );
    }

    #[test]
    fn shuffles_leading_pp_with_copula_inversion() {
        let q = tokenize("In what state is Mount Mckinley ?");
        let out = pp_shuffle(&q).unwrap();
        assert_eq!(join(&out), "Mount Mckinley is in what state ?");
    }

    #[test]
    fn no_edge_pp_gives_none() {
        let q = tokenize("Name all the rivers .");
        assert_eq!(pp_shuffle(&q), None);
    }

    #[test]
    fn pp_shuffle_preserves_token_multiset() {
        let q = tokenize("Which states does the Mississippi river run through ?");
        let out = pp_shuffle(&q).unwrap();
        let mut a: Vec<String> = q.iter().map(|t| t.to_lowercase()).collect();
        let mut b: Vec<String> = out.iter().map(|t| t.to_lowercase()).collect();
        a.sort();
        b.sort();
        assert_eq!(a, b);
    }
}
