//! Bit-stable text output: CSV tables and `key=value` records.

pub use aclab_core::numerics::fmt17;

/// One line of `key=value` pairs in insertion order.
#[derive(Debug, Clone, Default)]
pub struct Record {
    fields: Vec<(String, String)>,
}

impl Record {
    pub fn new(kind: &str) -> Self {
        Self::default().text("record", kind)
    }

    pub fn float(mut self, key: &str, v: f64) -> Self {
        self.fields.push((key.into(), fmt17(v)));
        self
    }

    pub fn int(mut self, key: &str, v: impl Into<i128>) -> Self {
        self.fields.push((key.into(), v.into().to_string()));
        self
    }

    pub fn flag(mut self, key: &str, v: bool) -> Self {
        self.fields.push((key.into(), v.to_string()));
        self
    }

    /// Whitespace in values is replaced so records stay one-per-line and splittable.
    pub fn text(mut self, key: &str, v: &str) -> Self {
        self.fields.push((key.into(), v.replace(char::is_whitespace, "_")));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn line(&self) -> String {
        let parts: Vec<String> = self.fields.iter().map(|(k, v)| format!("{k}={v}")).collect();
        parts.join(" ")
    }
}

/// Column-ordered CSV with a fixed header.
#[derive(Debug, Clone)]
pub struct Csv {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

#[derive(Debug, Clone)]
pub enum Cell {
    F(f64),
    I(i128),
    S(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::F(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::I(v as i128)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::I(v as i128)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::S(v.to_string())
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::S(v.to_string())
    }
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        assert_eq!(cells.len(), self.header.len(), "row width does not match header");
        self.rows.push(
            cells
                .into_iter()
                .map(|c| match c {
                    Cell::F(v) => fmt17(v),
                    Cell::I(v) => v.to_string(),
                    Cell::S(s) => s,
                })
                .collect(),
        );
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

/// Shorthand for building a row of cells.
#[macro_export]
macro_rules! cells {
    ($($x:expr),* $(,)?) => { vec![$($crate::emit::Cell::from($x)),*] };
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 13.62284555] {
            assert_eq!(fmt17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn record_and_csv_layout() {
        let r = Record::new("demo").float("x", 0.5).int("n", 3).text("note", "a b");
        assert_eq!(r.line(), "record=demo x=5.0000000000000000e-1 n=3 note=a_b");
        let mut c = Csv::new(&["eps", "ok"]);
        c.row(cells![0.25, true]);
        assert_eq!(c.render(), "eps,ok\n2.5000000000000000e-1,true\n");
    }
}
