//! The spatial database: tables, typed rows, value/keyword indexes, and the
//! logic-form denotation engine.
//!
//! The storage format is deliberately plain: a schema file declaring one
//! table per line, plus one CSV of facts per table. Reference columns
//! (`loc:ref(state)`) hold `;`-separated lists of entity names from the
//! target table; a `!` suffix marks the column used as the table's salient
//! magnitude for superlatives (`area` for states, `population` for cities).

mod eval;
#[cfg(any(test, feature = "test-oracle"))]
pub mod oracle;
#[cfg(any(test, feature = "test-oracle"))]
pub mod testgen;

pub use eval::{denotation_match, evaluate, EvalError};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{file}:{row}: {reason}")]
    Format {
        file: String,
        row: usize,
        reason: String,
    },
    #[error("duplicate table {0}")]
    DuplicateTable(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ColumnKind {
    /// Entity name, always the first column.
    Name,
    Num,
    Str,
    /// Reference(s) into another table; cells are `;`-separated lists.
    Ref(String),
}

#[derive(Debug, Clone)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
    /// Salient magnitude column for largest/smallest over this table.
    pub salient: bool,
}

#[derive(Debug, Clone)]
pub enum Cell {
    Str(String),
    Num(f64),
    Refs(Vec<String>),
}

#[derive(Debug, Clone)]
pub struct Row {
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone)]
pub struct Table {
    pub name: String,
    pub columns: Vec<ColumnSchema>,
    pub rows: Vec<Row>,
    row_by_name: BTreeMap<String, usize>,
}

impl Table {
    /// Assemble a table directly from rows (first cell must be the name).
    pub fn from_rows(name: &str, columns: Vec<ColumnSchema>, rows: Vec<Row>) -> Table {
        let mut row_by_name = BTreeMap::new();
        for (i, r) in rows.iter().enumerate() {
            if let Cell::Str(s) = &r.cells[0] {
                row_by_name.insert(s.to_lowercase(), i);
            }
        }
        Table {
            name: name.to_string(),
            columns,
            rows,
            row_by_name,
        }
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn salient_column(&self) -> Option<usize> {
        self.columns.iter().position(|c| c.salient)
    }

    /// Row lookup by entity name, case-insensitive.
    pub fn row_of(&self, entity: &str) -> Option<&Row> {
        self.row_by_name
            .get(&entity.to_lowercase())
            .map(|&i| &self.rows[i])
    }

    pub fn entity_name<'a>(&self, row: &'a Row) -> &'a str {
        match &row.cells[0] {
            Cell::Str(s) => s,
            _ => unreachable!("first column is always the entity name"),
        }
    }
}

/// A value in a denotation or variable binding.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    /// A typed entity; `name` is lowercased for comparison.
    Entity { table: String, name: String },
    Num(OrderedF64),
    Str(String),
}

impl Value {
    pub fn entity(table: &str, name: &str) -> Value {
        Value::Entity {
            table: table.to_string(),
            name: name.to_lowercase(),
        }
    }

    pub fn num(x: f64) -> Value {
        Value::Num(OrderedF64(x))
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Entity { name, .. } => write!(f, "{name}"),
            Value::Num(OrderedF64(x)) => {
                if x.fract() == 0.0 && x.abs() < 1e15 {
                    write!(f, "{}", *x as i64)
                } else {
                    write!(f, "{x}")
                }
            }
            Value::Str(s) => write!(f, "{s}"),
        }
    }
}

/// f64 with a total order so denotations can live in ordered sets.
/// Loaded facts are always finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderedF64(pub f64);

impl Eq for OrderedF64 {}
impl PartialOrd for OrderedF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for OrderedF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}
impl std::hash::Hash for OrderedF64 {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.to_bits().hash(state)
    }
}

/// An answer set. Set semantics: duplicate-free, order-insensitive.
pub type Denotation = BTreeSet<Value>;

#[derive(Debug, Clone)]
pub struct GeoDatabase {
    pub tables: Vec<Table>,
    table_by_name: BTreeMap<String, usize>,
    /// Lowercased value string -> tables it occurs in (any column).
    pub entity_index: BTreeMap<String, BTreeSet<String>>,
    /// All table and column names.
    pub keyword_set: BTreeSet<String>,
    /// Constructor name (`stateid`) -> table (`state`), and the reverse.
    ctor_to_table: BTreeMap<String, String>,
    table_to_ctor: BTreeMap<String, String>,
    /// (table, lowercased name) -> display form as written in the facts.
    canonical: BTreeMap<(String, String), String>,
}

impl GeoDatabase {
    /// Assemble a database from in-memory tables with default constructors.
    pub fn from_tables(tables: Vec<Table>) -> GeoDatabase {
        let mut db = GeoDatabase {
            tables,
            table_by_name: BTreeMap::new(),
            entity_index: BTreeMap::new(),
            keyword_set: BTreeSet::new(),
            ctor_to_table: BTreeMap::new(),
            table_to_ctor: BTreeMap::new(),
            canonical: BTreeMap::new(),
        };
        for (i, t) in db.tables.iter().enumerate() {
            db.table_by_name.insert(t.name.clone(), i);
            let ctor = format!("{}id", t.name);
            db.ctor_to_table.insert(ctor.clone(), t.name.clone());
            db.table_to_ctor.insert(t.name.clone(), ctor);
        }
        db.build_indexes();
        db
    }

    /// Load a database from a schema file and a directory holding one
    /// `<table>.csv` per declared table. `ctor_overrides` replaces the
    /// default `<table>id` constructor spelling for the named tables.
    pub fn load(
        schema_path: &Path,
        facts_dir: &Path,
        ctor_overrides: &BTreeMap<String, String>,
    ) -> Result<GeoDatabase, StoreError> {
        let schema_text = read(schema_path)?;
        let mut db = GeoDatabase {
            tables: Vec::new(),
            table_by_name: BTreeMap::new(),
            entity_index: BTreeMap::new(),
            keyword_set: BTreeSet::new(),
            ctor_to_table: BTreeMap::new(),
            table_to_ctor: BTreeMap::new(),
            canonical: BTreeMap::new(),
        };
        for (lineno, line) in schema_text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let table = parse_schema_line(line, schema_path, lineno + 1)?;
            if db.table_by_name.contains_key(&table.name) {
                return Err(StoreError::DuplicateTable(table.name));
            }
            db.table_by_name.insert(table.name.clone(), db.tables.len());
            db.tables.push(table);
        }
        for t in &mut db.tables {
            let csv_path = facts_dir.join(format!("{}.csv", t.name));
            load_facts(t, &csv_path)?;
        }
        for t in &db.tables {
            let ctor = ctor_overrides
                .get(&t.name)
                .cloned()
                .unwrap_or_else(|| format!("{}id", t.name));
            db.ctor_to_table.insert(ctor.clone(), t.name.clone());
            db.table_to_ctor.insert(t.name.clone(), ctor);
        }
        db.build_indexes();
        Ok(db)
    }

    fn build_indexes(&mut self) {
        for t in &self.tables {
            self.keyword_set.insert(t.name.clone());
            for c in &t.columns {
                self.keyword_set.insert(c.name.clone());
            }
            for row in &t.rows {
                for (ci, cell) in row.cells.iter().enumerate() {
                    match cell {
                        Cell::Num(_) => {}
                        Cell::Str(s) => {
                            let low = s.to_lowercase();
                            self.entity_index
                                .entry(low.clone())
                                .or_default()
                                .insert(t.name.clone());
                            if ci == 0 {
                                self.canonical
                                    .insert((t.name.clone(), low), s.clone());
                            }
                        }
                        Cell::Refs(list) => {
                            // References count toward the table they point
                            // at: a capital in state.capital is a city.
                            let target = match &t.columns[ci].kind {
                                ColumnKind::Ref(tt) => tt.clone(),
                                _ => unreachable!(),
                            };
                            for r in list {
                                self.entity_index
                                    .entry(r.to_lowercase())
                                    .or_default()
                                    .insert(target.clone());
                            }
                        }
                    }
                }
            }
        }
    }

    pub fn table(&self, name: &str) -> Option<&Table> {
        self.table_by_name.get(name).map(|&i| &self.tables[i])
    }

    pub fn is_ctor(&self, name: &str) -> bool {
        self.ctor_to_table.contains_key(name)
    }

    pub fn ctor_table(&self, ctor: &str) -> Option<&str> {
        self.ctor_to_table.get(ctor).map(String::as_str)
    }

    pub fn ctor_for_table(&self, table: &str) -> Option<&str> {
        self.table_to_ctor.get(table).map(String::as_str)
    }

    /// Tables whose own rows carry the value, i.e. the candidate types of an
    /// ambiguous phrase.
    pub fn value_types(&self, value: &str) -> Vec<String> {
        self.entity_index
            .get(&value.to_lowercase())
            .map(|s| s.iter().cloned().collect())
            .unwrap_or_default()
    }

    /// Display form of an entity name as spelled in the facts for `table`,
    /// falling back to any table that defines it.
    pub fn canonical_value(&self, value: &str) -> Option<&str> {
        let low = value.to_lowercase();
        self.canonical
            .iter()
            .find(|((_, name), _)| *name == low)
            .map(|(_, display)| display.as_str())
    }

    pub fn canonical_value_in(&self, table: &str, value: &str) -> Option<&str> {
        self.canonical
            .get(&(table.to_string(), value.to_lowercase()))
            .map(String::as_str)
    }

    /// All tables that declare a column with this name.
    pub fn tables_with_column(&self, column: &str) -> Vec<&Table> {
        self.tables
            .iter()
            .filter(|t| t.columns.iter().skip(1).any(|c| c.name == column))
            .collect()
    }
}

fn read(path: &Path) -> Result<String, StoreError> {
    std::fs::read_to_string(path).map_err(|source| StoreError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_schema_line(line: &str, path: &Path, lineno: usize) -> Result<Table, StoreError> {
    let mut fields = line.split(',').map(str::trim);
    let name = fields.next().unwrap_or("").to_string();
    let mut columns = Vec::new();
    for (i, spec) in fields.enumerate() {
        let (spec, salient) = match spec.strip_suffix('!') {
            Some(s) => (s, true),
            None => (spec, false),
        };
        let (col_name, kind) = match spec.split_once(':') {
            None => (
                spec,
                if i == 0 {
                    ColumnKind::Name
                } else {
                    ColumnKind::Str
                },
            ),
            Some((n, "num")) => (n, ColumnKind::Num),
            Some((n, "str")) => (n, ColumnKind::Str),
            Some((n, rest)) => {
                let target = rest
                    .strip_prefix("ref(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| StoreError::Format {
                        file: path.display().to_string(),
                        row: lineno,
                        reason: format!("bad column spec {spec:?}"),
                    })?;
                (n, ColumnKind::Ref(target.to_string()))
            }
        };
        columns.push(ColumnSchema {
            name: col_name.to_string(),
            kind,
            salient,
        });
    }
    if name.is_empty() || columns.is_empty() {
        return Err(StoreError::Format {
            file: path.display().to_string(),
            row: lineno,
            reason: "table needs a name and at least one column".into(),
        });
    }
    Ok(Table {
        name,
        columns,
        rows: Vec::new(),
        row_by_name: BTreeMap::new(),
    })
}

fn load_facts(table: &mut Table, path: &Path) -> Result<(), StoreError> {
    let text = read(path)?;
    let file = path.display().to_string();
    let mut lines = text.lines().enumerate();
    let header = loop {
        match lines.next() {
            Some((_, l)) if l.trim().is_empty() => continue,
            Some((_, l)) => break l,
            // Declared table with an empty file: zero rows is fine.
            None => return Ok(()),
        }
    };
    let header_cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let expected: Vec<&str> = table.columns.iter().map(|c| c.name.as_str()).collect();
    if header_cols != expected {
        return Err(StoreError::Format {
            file,
            row: 1,
            reason: format!("header {header_cols:?} does not match schema {expected:?}"),
        });
    }
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != table.columns.len() {
            return Err(StoreError::Format {
                file,
                row: lineno + 1,
                reason: format!(
                    "expected {} fields, found {}",
                    table.columns.len(),
                    fields.len()
                ),
            });
        }
        let mut cells = Vec::with_capacity(fields.len());
        for (col, field) in table.columns.iter().zip(&fields) {
            let cell = match &col.kind {
                ColumnKind::Name | ColumnKind::Str => Cell::Str(field.to_string()),
                ColumnKind::Num => {
                    let x: f64 = field.parse().map_err(|_| StoreError::Format {
                        file: file.clone(),
                        row: lineno + 1,
                        reason: format!("column {} is numeric, got {field:?}", col.name),
                    })?;
                    if !x.is_finite() {
                        return Err(StoreError::Format {
                            file: file.clone(),
                            row: lineno + 1,
                            reason: format!("non-finite number in column {}", col.name),
                        });
                    }
                    Cell::Num(x)
                }
                ColumnKind::Ref(_) => Cell::Refs(
                    field
                        .split(';')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(str::to_string)
                        .collect(),
                ),
            };
            cells.push(cell);
        }
        let name = match &cells[0] {
            Cell::Str(s) => s.to_lowercase(),
            _ => unreachable!(),
        };
        table.row_by_name.insert(name, table.rows.len());
        table.rows.push(Row { cells });
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod test_fixtures {
    use super::*;
    use std::io::Write;

    /// A small two-table database written to a temp dir:
    /// states Iowa/Ohio/Mississippi, rivers Mississippi/Ohio.
    pub fn toy_db(dir: &Path) -> GeoDatabase {
        let schema = "state,name,capital:ref(city),population:num,area:num!\n\
                      city,name,loc:ref(state),population:num!\n\
                      river,name,len:num!,traverse:ref(state),loc:ref(state)\n";
        std::fs::write(dir.join("schema.txt"), schema).unwrap();
        let facts = dir.join("facts");
        std::fs::create_dir_all(&facts).unwrap();
        let mut f = std::fs::File::create(facts.join("state.csv")).unwrap();
        writeln!(f, "name,capital,population,area").unwrap();
        writeln!(f, "Iowa,Des Moines,100,56").unwrap();
        writeln!(f, "Ohio,Columbus,200,44").unwrap();
        writeln!(f, "Mississippi,Jackson,50,48").unwrap();
        writeln!(f, "Utah,Salt Lake City,80,30").unwrap();
        let mut f = std::fs::File::create(facts.join("city.csv")).unwrap();
        writeln!(f, "name,loc,population").unwrap();
        writeln!(f, "Des Moines,Iowa,20").unwrap();
        writeln!(f, "Columbus,Ohio,60").unwrap();
        writeln!(f, "Jackson,Mississippi,30").unwrap();
        writeln!(f, "Salt Lake City,Utah,40").unwrap();
        let mut f = std::fs::File::create(facts.join("river.csv")).unwrap();
        writeln!(f, "name,len,traverse,loc").unwrap();
        writeln!(f, "Mississippi,3778,Mississippi;Iowa,Mississippi;Iowa").unwrap();
        writeln!(f, "Ohio,1579,Ohio,Ohio").unwrap();
        GeoDatabase::load(&dir.join("schema.txt"), &facts, &BTreeMap::new()).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexes_ambiguous_values_by_table() {
        let dir = tempdir();
        let db = test_fixtures::toy_db(dir.path());
        assert_eq!(
            db.value_types("mississippi"),
            vec!["river".to_string(), "state".to_string()]
        );
        assert_eq!(db.value_types("Iowa"), vec!["state"]);
        assert_eq!(db.value_types("Des Moines"), vec!["city"]);
        assert!(db.keyword_set.contains("traverse"));
        assert!(db.keyword_set.contains("population"));
        assert_eq!(db.ctor_table("riverid"), Some("river"));
    }

    #[test]
    fn empty_facts_file_gives_empty_table() {
        let dir = tempdir();
        std::fs::write(dir.path().join("schema.txt"), "lake,name,area:num!\n").unwrap();
        let facts = dir.path().join("facts");
        std::fs::create_dir_all(&facts).unwrap();
        std::fs::write(facts.join("lake.csv"), "").unwrap();
        let db = GeoDatabase::load(&dir.path().join("schema.txt"), &facts, &BTreeMap::new())
            .unwrap();
        assert_eq!(db.table("lake").unwrap().rows.len(), 0);
        assert!(db.entity_index.is_empty());
    }

    #[test]
    fn rejects_bad_numeric_cell() {
        let dir = tempdir();
        std::fs::write(dir.path().join("schema.txt"), "lake,name,area:num!\n").unwrap();
        let facts = dir.path().join("facts");
        std::fs::create_dir_all(&facts).unwrap();
        std::fs::write(facts.join("lake.csv"), "name,area\nErie,big\n").unwrap();
        let err = GeoDatabase::load(&dir.path().join("schema.txt"), &facts, &BTreeMap::new())
            .unwrap_err();
        assert!(matches!(err, StoreError::Format { row: 2, .. }));
    }

    #[test]
    fn rejects_duplicate_table() {
        let dir = tempdir();
        std::fs::write(dir.path().join("schema.txt"), "lake,name\nlake,name\n").unwrap();
        let facts = dir.path().join("facts");
        std::fs::create_dir_all(&facts).unwrap();
        std::fs::write(facts.join("lake.csv"), "name\n").unwrap();
        let err = GeoDatabase::load(&dir.path().join("schema.txt"), &facts, &BTreeMap::new())
            .unwrap_err();
        assert!(matches!(err, StoreError::DuplicateTable(_)));
    }

    fn tempdir() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }
}
