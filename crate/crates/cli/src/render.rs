//! CSV and aligned-text rendering of row tables.

use crate::options::Format;

pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&'static str]) -> Table {
        Table {
            headers: headers.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Text => self.text(),
            _ => self.csv(),
        }
    }

    fn csv(&self) -> String {
        let mut out = self.headers.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(
                &row.iter()
                    .map(|cell| csv_cell(cell))
                    .collect::<Vec<_>>()
                    .join(","),
            );
            out.push('\n');
        }
        out
    }

    fn text(&self) -> String {
        let widths: Vec<usize> = (0..self.headers.len())
            .map(|c| {
                self.rows
                    .iter()
                    .map(|r| r[c].chars().count())
                    .chain([self.headers[c].chars().count()])
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        // Numeric columns align right, text columns left.
        let numeric: Vec<bool> = (0..self.headers.len())
            .map(|c| {
                self.rows
                    .iter()
                    .all(|r| r[c].parse::<f64>().is_ok() || r[c] == "n/a")
            })
            .collect();
        let line = |cells: Vec<&str>| {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .zip(&numeric)
                .map(|((cell, w), right)| {
                    if *right {
                        format!("{cell:>w$}")
                    } else {
                        format!("{cell:<w$}")
                    }
                })
                .collect();
            padded.join("  ").trim_end().to_string() + "\n"
        };
        let mut out = line(self.headers.clone());
        for row in &self.rows {
            out.push_str(&line(row.iter().map(String::as_str).collect()));
        }
        out
    }
}

fn csv_cell(cell: &str) -> String {
    if cell.contains([',', '"', '\n']) {
        format!("\"{}\"", cell.replace('"', "\"\""))
    } else {
        cell.to_string()
    }
}

/// `mmmm.mm e k` with a four-digit integer part, as the norm tables print.
pub fn mantissa_exponent(x: f64) -> (f64, i32) {
    if x == 0.0 || !x.is_finite() {
        return (x, 0);
    }
    let mut exponent = x.abs().log10().floor() as i32 - 3;
    let mut mantissa = (x / 10f64.powi(exponent) * 100.0).round() / 100.0;
    if mantissa.abs() >= 10000.0 {
        exponent += 1;
        mantissa = (x / 10f64.powi(exponent) * 100.0).round() / 100.0;
    }
    (mantissa, exponent)
}

pub fn scientific(x: f64, format: Format) -> String {
    let (mantissa, exponent) = mantissa_exponent(x);
    match format {
        Format::Text => format!("{mantissa:.2}x10^{exponent}"),
        _ => format!("{mantissa:.2}e{exponent}"),
    }
}

pub fn optional(value: Option<f64>, show: impl Fn(f64) -> String) -> String {
    value.map(show).unwrap_or_else(|| "n/a".into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mantissa_has_four_integer_digits() {
        assert_eq!(scientific(1.93587e-3, Format::Csv), "1935.87e-6");
        assert_eq!(scientific(4.84086e-4, Format::Csv), "4840.86e-7");
        assert_eq!(scientific(1.8911e-6, Format::Text), "1891.10x10^-9");
        assert_eq!(mantissa_exponent(9.999999e-3), (1000.0, -5));
    }

    #[test]
    fn csv_and_text() {
        let mut t = Table::new(&["N", "value"]);
        t.push(vec!["2".into(), "a,b".into()]);
        assert_eq!(t.render(Format::Csv), "N,value\n2,\"a,b\"\n");
        assert_eq!(t.render(Format::Text), "N  value\n2  a,b\n");
    }
}
