use std::fmt::Write as _;

use crate::econ::stars;

/// One table entry: a value, an optional parenthetical and an optional
/// p-value that decides the stars.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub value: f64,
    pub paren: Option<f64>,
    pub p: Option<f64>,
}

impl Cell {
    pub fn value(value: f64) -> Self {
        Cell {
            value,
            paren: None,
            p: None,
        }
    }

    pub fn with(value: f64, paren: f64, p: f64) -> Self {
        Cell {
            value,
            paren: Some(paren),
            p: Some(p),
        }
    }

    pub fn stars(&self) -> &'static str {
        self.p.map_or("", stars)
    }

    pub fn render(&self) -> String {
        let mut s = format_number(self.value);
        s.push_str(self.stars());
        if let Some(p) = self.paren {
            s.push_str(&format!(" ({})", format_number(p)));
        }
        s
    }
}

/// Three decimals from 1 upward, four significant figures below; trailing
/// zeros dropped.
pub fn format_number(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() {
            "NaN".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let a = v.abs();
    let s = if a == 0.0 {
        "0".to_string()
    } else if a >= 1.0 {
        format!("{v:.3}")
    } else {
        let decimals = (3 - a.log10().floor() as i32).max(0) as usize;
        format!("{v:.decimals$}")
    };
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

/// Parsed form of a rendered cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedCell {
    pub value: f64,
    pub stars: usize,
    pub paren: Option<f64>,
}

/// Inverse of [`Cell::render`] at the printed precision.
pub fn parse_cell(s: &str) -> Option<ParsedCell> {
    let s = s.trim();
    let (head, paren) = match s.split_once(" (") {
        Some((h, rest)) => (h, Some(rest.strip_suffix(')')?.parse::<f64>().ok()?)),
        None => (s, None),
    };
    let body = head.trim_end_matches('*');
    let stars = head.len() - body.len();
    Some(ParsedCell {
        value: body.parse().ok()?,
        stars,
        paren,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyTable {
    pub title: String,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    /// `cells[row][col]`; `None` renders empty.
    pub cells: Vec<Vec<Option<Cell>>>,
    pub footnotes: Vec<String>,
}

impl StudyTable {
    pub fn new(title: impl Into<String>, row_labels: Vec<String>, col_labels: Vec<String>) -> Self {
        let cells = vec![vec![None; col_labels.len()]; row_labels.len()];
        StudyTable {
            title: title.into(),
            row_labels,
            col_labels,
            cells,
            footnotes: Vec::new(),
        }
    }

    pub fn set(&mut self, row: usize, col: usize, cell: Cell) {
        self.cells[row][col] = Some(cell);
    }

    pub fn get(&self, row: &str, col: &str) -> Option<Cell> {
        let r = self.row_labels.iter().position(|l| l == row)?;
        let c = self.col_labels.iter().position(|l| l == col)?;
        self.cells[r][c]
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.footnotes.push(s.into());
    }

    pub fn is_rectangular(&self) -> bool {
        self.cells.len() == self.row_labels.len()
            && self.cells.iter().all(|r| r.len() == self.col_labels.len())
    }

    fn rendered(&self) -> Vec<Vec<String>> {
        self.cells
            .iter()
            .map(|r| {
                r.iter()
                    .map(|c| c.map(|c| c.render()).unwrap_or_default())
                    .collect()
            })
            .collect()
    }

    /// Header row, one row per label, then footnotes as `#` lines.
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let mut header = vec![String::new()];
        header.extend(self.col_labels.iter().cloned());
        w.write_record(&header).expect("in-memory write");
        for (label, row) in self.row_labels.iter().zip(self.rendered()) {
            let mut rec = vec![label.clone()];
            rec.extend(row);
            w.write_record(&rec).expect("in-memory write");
        }
        let mut out =
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input");
        for f in &self.footnotes {
            let _ = writeln!(out, "# {f}");
        }
        out
    }

    /// Title, aligned columns, footnotes.
    pub fn to_text(&self) -> String {
        let body = self.rendered();
        let lw = self
            .row_labels
            .iter()
            .map(|l| l.chars().count())
            .max()
            .unwrap_or(0);
        let widths: Vec<usize> = (0..self.col_labels.len())
            .map(|c| {
                body.iter()
                    .map(|r| r[c].chars().count())
                    .chain([self.col_labels[c].chars().count()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let mut out = format!("{}\n", self.title);
        let mut line = format!("{:lw$}", "");
        for (c, l) in self.col_labels.iter().enumerate() {
            let _ = write!(line, "  {:>w$}", l, w = widths[c]);
        }
        out.push_str(line.trim_end());
        out.push('\n');
        for (label, row) in self.row_labels.iter().zip(&body) {
            let mut line = format!("{label:lw$}");
            for (c, v) in row.iter().enumerate() {
                let _ = write!(line, "  {:>w$}", v, w = widths[c]);
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        for f in &self.footnotes {
            let _ = writeln!(out, "Note: {f}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reference_cells() {
        assert_eq!(Cell::with(18.741, 7.01, 0.004).render(), "18.741*** (7.01)");
        assert_eq!(Cell::with(3.85, 6.284, 0.54).render(), "3.85 (6.284)");
        assert_eq!(Cell::with(14.904, 7.56, 0.03).render(), "14.904** (7.56)");
        assert_eq!(Cell::with(-28.912, 9.1, 0.002).render(), "-28.912*** (9.1)");
        assert_eq!(Cell::value(0.0925).render(), "0.0925");
    }

    #[test]
    fn number_format() {
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(-0.00001), "-0.00001");
        assert_eq!(format_number(0.123456), "0.1235");
        assert_eq!(format_number(1234.5678), "1234.568");
        assert_eq!(format_number(2.0), "2");
        assert_eq!(format_number(-1e-20), "-0.00000000000000000001");
    }

    #[test]
    fn csv_and_text_layout() {
        let mut t = StudyTable::new(
            "T",
            vec!["a".into(), "b".into()],
            vec!["x".into(), "y, z".into()],
        );
        t.set(0, 0, Cell::with(1.5, 0.5, 0.01));
        t.set(1, 1, Cell::value(-0.25));
        t.note("n = 2");
        assert!(t.is_rectangular());
        assert_eq!(
            t.to_csv(),
            ",x,\"y, z\"\na,1.5** (0.5),\nb,,-0.25\n# n = 2\n"
        );
        let text = t.to_text();
        assert!(text.starts_with("T\n"));
        assert!(text.contains("1.5** (0.5)"));
        assert!(text.ends_with("Note: n = 2\n"));
        assert_eq!(t.get("b", "y, z"), Some(Cell::value(-0.25)));
    }

    proptest! {
        #[test]
        fn render_parse_round_trip(v in -1e4f64..1e4, se in 0.0f64..1e3, p in 0.0f64..1.0) {
            let c = Cell::with(v, se, p);
            let parsed = parse_cell(&c.render()).unwrap();
            prop_assert_eq!(parsed.value, format_number(v).parse::<f64>().unwrap());
            prop_assert_eq!(parsed.paren, Some(format_number(se).parse::<f64>().unwrap()));
            prop_assert_eq!(parsed.stars, c.stars().len());
            // Re-rendering the parsed numbers reproduces the text.
            let again = format!("{}{} ({})", format_number(parsed.value), "*".repeat(parsed.stars), format_number(parsed.paren.unwrap()));
            prop_assert_eq!(again, c.render());
        }
    }
}
