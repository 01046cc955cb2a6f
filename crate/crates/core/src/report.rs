//! Tabular output shared by the CSV and plain-text emitters.

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push<S: ToString>(&mut self, row: impl IntoIterator<Item = S>) {
        let row: Vec<String> = row.into_iter().map(|c| c.to_string()).collect();
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Two-column `field,value` table.
    pub fn fields<K: ToString, V: ToString>(items: impl IntoIterator<Item = (K, V)>) -> Self {
        let mut t = Table::new(["field", "value"]);
        for (k, v) in items {
            t.push([k.to_string(), v.to_string()]);
        }
        t
    }

    /// RFC 4180 CSV with a header row.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| crate::error::Error::Serialize(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| crate::error::Error::Serialize(e.to_string()))
    }

    /// Left-aligned columns separated by two spaces.
    pub fn to_text(&self) -> String {
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.chars().count()).collect();
        for r in &self.rows {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        let line = |cells: &[String]| {
            let mut s = String::new();
            for (i, (c, w)) in cells.iter().zip(&widths).enumerate() {
                if i + 1 == cells.len() {
                    s.push_str(c);
                } else {
                    s.push_str(&format!("{c:<w$}  "));
                }
            }
            s.push('\n');
            s
        };
        let mut out = line(&self.header);
        for r in &self.rows {
            out.push_str(&line(r));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_and_text_aligns() {
        let mut t = Table::new(["a", "bb"]);
        t.push(["1,2", "x"]);
        t.push(["333", "y"]);
        assert_eq!(t.to_csv().unwrap(), "a,bb\n\"1,2\",x\n333,y\n");
        assert_eq!(t.to_text(), "a    bb\n1,2  x\n333  y\n");
    }
}
