//! Random mini-databases and random well-scoped logic forms, used by the
//! engine/oracle equivalence tests.

use rand::Rng;

use super::{Cell, ColumnKind, ColumnSchema, GeoDatabase, Row, Table};
use crate::logic_form::{LogicForm, Term};

const REALM_NAMES: &[&str] = &["arden", "brakk", "corin", "dulth", "evero", "farn"];
const TOWN_NAMES: &[&str] = &["gosse", "hilm", "irth", "jona", "kellin", "arden"];
const STREAM_NAMES: &[&str] = &["lurra", "mosk", "nerbe", "olm", "corin", "brakk"];
const PEAK_NAMES: &[&str] = &["pister", "quom", "rhett", "sarn", "dulth"];

fn column(name: &str, kind: ColumnKind, salient: bool) -> ColumnSchema {
    ColumnSchema {
        name: name.to_string(),
        kind,
        salient,
    }
}

/// Build a random four-table database with at most `max_rows` rows per table.
/// Numeric cells are drawn from a tiny range so ties actually happen.
pub fn random_db<R: Rng>(rng: &mut R, max_rows: usize) -> GeoDatabase {
    let n_realms = rng.gen_range(1..=max_rows);
    let realms: Vec<&str> = REALM_NAMES[..n_realms].to_vec();
    let pick_realms = |rng: &mut R| -> Vec<String> {
        let k = rng.gen_range(0..=2.min(n_realms));
        let mut out = Vec::new();
        while out.len() < k {
            let r = realms[rng.gen_range(0..n_realms)].to_string();
            if !out.contains(&r) {
                out.push(r);
            }
        }
        out
    };

    let mut tables = Vec::new();

    let mut rows = Vec::new();
    for name in &realms {
        rows.push(Row {
            cells: vec![
                Cell::Str(name.to_string()),
                Cell::Num(rng.gen_range(1..=6) as f64),
                Cell::Refs(pick_realms(rng)),
            ],
        });
    }
    tables.push(make_table(
        "realm",
        vec![
            column("name", ColumnKind::Name, false),
            column("extent", ColumnKind::Num, true),
            column("adjoin", ColumnKind::Ref("realm".into()), false),
        ],
        rows,
    ));

    let mut rows = Vec::new();
    for name in TOWN_NAMES.iter().take(rng.gen_range(0..=max_rows)) {
        rows.push(Row {
            cells: vec![
                Cell::Str(name.to_string()),
                Cell::Refs(pick_realms(rng)),
                Cell::Num(rng.gen_range(1..=6) as f64),
            ],
        });
    }
    tables.push(make_table(
        "town",
        vec![
            column("name", ColumnKind::Name, false),
            column("within", ColumnKind::Ref("realm".into()), false),
            column("pop", ColumnKind::Num, true),
        ],
        rows,
    ));

    let mut rows = Vec::new();
    for name in STREAM_NAMES.iter().take(rng.gen_range(0..=max_rows)) {
        rows.push(Row {
            cells: vec![
                Cell::Str(name.to_string()),
                Cell::Num(rng.gen_range(1..=6) as f64),
                Cell::Refs(pick_realms(rng)),
            ],
        });
    }
    tables.push(make_table(
        "stream",
        vec![
            column("name", ColumnKind::Name, false),
            column("len", ColumnKind::Num, true),
            column("crosses", ColumnKind::Ref("realm".into()), false),
        ],
        rows,
    ));

    let mut rows = Vec::new();
    for name in PEAK_NAMES.iter().take(rng.gen_range(0..=max_rows.min(5))) {
        rows.push(Row {
            cells: vec![
                Cell::Str(name.to_string()),
                Cell::Num(rng.gen_range(1..=6) as f64),
                Cell::Refs(pick_realms(rng)),
            ],
        });
    }
    tables.push(make_table(
        "peak",
        vec![
            column("name", ColumnKind::Name, false),
            column("elevation", ColumnKind::Num, true),
            column("within", ColumnKind::Ref("realm".into()), false),
        ],
        rows,
    ));

    GeoDatabase::from_tables(tables)
}

fn make_table(name: &str, columns: Vec<ColumnSchema>, rows: Vec<Row>) -> Table {
    Table::from_rows(name, columns, rows)
}

/// A random evaluable form of aggregate depth at most 3.
///
/// All forms are "safe": every counted or summed variable is bound by a
/// relational goal, so the engine and the naive oracle agree on scope.
pub fn random_form<R: Rng>(rng: &mut R, db: &GeoDatabase) -> LogicForm {
    let mut gen = FormGen { rng, db };
    let root = gen.answer(3);
    LogicForm { root }
}

struct FormGen<'a, R: Rng> {
    rng: &'a mut R,
    db: &'a GeoDatabase,
}

impl<'a, R: Rng> FormGen<'a, R> {
    fn answer(&mut self, depth: usize) -> Term {
        let (goal, ans) = self.goal_binding(depth, 'A');
        Term::predicate("answer", vec![Term::Variable(ans), goal])
    }

    /// A goal that binds and exposes `var`; returns (goal, exposed var).
    fn goal_binding(&mut self, depth: usize, var: char) -> (Term, char) {
        let choices: u32 = if depth > 1 { 9 } else { 5 };
        match self.rng.gen_range(0..choices) {
            0..=4 => (self.base_goal(var), var),
            5 => {
                // count(B, body, A); the body stays purely relational so the
                // counted variable is bound by table membership.
                let inner = self.next_var(var);
                let body = self.base_goal(inner);
                (
                    Term::predicate(
                        "count",
                        vec![Term::Variable(inner), body, Term::Variable(var)],
                    ),
                    var,
                )
            }
            6 => {
                // sum over an attribute of a typed set
                let inner = self.next_var(var);
                let subject = self.next_var(inner);
                let (table, attr) = self.numeric_attr();
                let body = Term::Conjunction(vec![
                    Term::predicate(table, vec![Term::Variable(subject)]),
                    Term::predicate(attr, vec![Term::Variable(subject), Term::Variable(inner)]),
                ]);
                (
                    Term::predicate(
                        "sum",
                        vec![Term::Variable(inner), body, Term::Variable(var)],
                    ),
                    var,
                )
            }
            7 => {
                // superlative wrapping anything, including other aggregates
                let (body, _) = self.goal_binding(depth - 1, var);
                let name = ["largest", "smallest"][self.rng.gen_range(0..2)];
                (
                    Term::predicate(name, vec![Term::Variable(var), body]),
                    var,
                )
            }
            _ => {
                // most/fewest over an adjacency-style relation
                let other = self.next_var(var);
                let body = Term::Conjunction(vec![
                    Term::predicate("realm", vec![Term::Variable(var)]),
                    Term::predicate(
                        "adjoin",
                        vec![Term::Variable(var), Term::Variable(other)],
                    ),
                ]);
                let name = ["most", "fewest"][self.rng.gen_range(0..2)];
                (
                    Term::predicate(
                        name,
                        vec![Term::Variable(var), Term::Variable(other), body],
                    ),
                    var,
                )
            }
        }
    }

    /// A purely relational goal binding `var`.
    fn base_goal(&mut self, var: char) -> Term {
        match self.rng.gen_range(0..8) {
            0 => Term::predicate(self.any_table(), vec![Term::Variable(var)]),
            1 => {
                let aux = self.next_var(var);
                Term::Conjunction(vec![
                    Term::predicate("town", vec![Term::Variable(var)]),
                    Term::predicate("within", vec![Term::Variable(var), Term::Variable(aux)]),
                    self.const_goal(aux, "realm"),
                ])
            }
            2 => {
                let aux = self.next_var(var);
                Term::Conjunction(vec![
                    Term::predicate("stream", vec![Term::Variable(var)]),
                    Term::predicate("crosses", vec![Term::Variable(var), Term::Variable(aux)]),
                    Term::predicate("realm", vec![Term::Variable(aux)]),
                ])
            }
            3 => {
                let aux = self.next_var(var);
                let (table, attr) = self.numeric_attr();
                Term::Conjunction(vec![
                    Term::predicate(table, vec![Term::Variable(aux)]),
                    Term::predicate(attr, vec![Term::Variable(aux), Term::Variable(var)]),
                ])
            }
            4 => {
                let aux = self.next_var(var);
                Term::Conjunction(vec![
                    Term::predicate("realm", vec![Term::Variable(var)]),
                    Term::predicate("adjoin", vec![Term::Variable(var), Term::Variable(aux)]),
                    self.const_goal(aux, "realm"),
                ])
            }
            5 => {
                let aux = self.next_var(var);
                Term::Conjunction(vec![
                    Term::predicate("realm", vec![Term::Variable(var)]),
                    Term::predicate(
                        "not",
                        vec![Term::Conjunction(vec![
                            Term::predicate("stream", vec![Term::Variable(aux)]),
                            Term::predicate(
                                "crosses",
                                vec![Term::Variable(aux), Term::Variable(var)],
                            ),
                        ])],
                    ),
                ])
            }
            6 => {
                let aux = self.next_var(var);
                Term::Conjunction(vec![
                    Term::predicate("peak", vec![Term::Variable(var)]),
                    Term::predicate("within", vec![Term::Variable(var), Term::Variable(aux)]),
                    self.const_goal(aux, "realm"),
                ])
            }
            _ => Term::Conjunction(vec![
                Term::predicate("town", vec![Term::Variable(var)]),
                Term::predicate("major", vec![Term::Variable(var)]),
            ]),
        }
    }

    fn const_goal(&mut self, var: char, table: &str) -> Term {
        let name = self.entity_of(table);
        let ctor = self.db.ctor_for_table(table).unwrap().to_string();
        Term::predicate(
            "const",
            vec![
                Term::Variable(var),
                Term::predicate(&ctor, vec![Term::Constant(name)]),
            ],
        )
    }

    fn entity_of(&mut self, table: &str) -> String {
        let t = self.db.table(table).unwrap();
        if t.rows.is_empty() {
            return "nowhere".to_string();
        }
        let row = &t.rows[self.rng.gen_range(0..t.rows.len())];
        t.entity_name(row).to_string()
    }

    fn any_table(&mut self) -> &'static str {
        ["realm", "town", "stream", "peak"][self.rng.gen_range(0..4)]
    }

    fn numeric_attr(&mut self) -> (&'static str, &'static str) {
        [
            ("realm", "extent"),
            ("town", "pop"),
            ("stream", "len"),
            ("peak", "elevation"),
        ][self.rng.gen_range(0..4)]
    }

    fn next_var(&mut self, var: char) -> char {
        ((var as u8) + 1) as char
    }
}
