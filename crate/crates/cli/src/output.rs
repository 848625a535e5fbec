//! Human-readable tables. Only the JSON and CSV outputs are stable formats.

pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn row(&mut self, cells: Vec<String>) {
        self.rows.push(cells);
    }

    /// Aligned columns under a header, or tab-separated rows when `plain`.
    pub fn render(&self, plain: bool) -> String {
        let mut out = String::new();
        if plain {
            for row in &self.rows {
                out.push_str(&row.join("\t"));
                out.push('\n');
            }
            return out;
        }
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.chars().count()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        for line in std::iter::once(&self.header).chain(&self.rows) {
            let cells: Vec<String> = line
                .iter()
                .zip(&widths)
                .map(|(cell, w)| format!("{cell:<w$}"))
                .collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aligned_and_plain() {
        let mut t = Table::new(&["id", "title"]);
        t.row(vec!["7".into(), "Ozone".into()]);
        t.row(vec!["12".into(), "Sea ice".into()]);
        assert_eq!(t.render(false), "id  title\n7   Ozone\n12  Sea ice\n");
        assert_eq!(t.render(true), "7\tOzone\n12\tSea ice\n");
    }
}
