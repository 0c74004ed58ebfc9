//! Fixed-format CSV assembly. Numbers carry 17 significant digits and
//! undefined values print as `nan`, so output is byte-stable for a config.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Default)]
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn comment(&mut self, line: impl AsRef<str>) {
        for l in line.as_ref().lines() {
            let _ = writeln!(self.text, "# {l}");
        }
    }

    pub fn header(&mut self, cols: &[&str]) {
        self.text += &cols.join(",");
        self.text.push('\n');
    }

    pub fn row(&mut self, fields: &[String]) {
        self.text += &fields.join(",");
        self.text.push('\n');
    }

    pub fn numbers(&mut self, values: &[f64]) {
        self.row(&values.iter().map(|&v| num(v)).collect::<Vec<_>>());
    }

    #[cfg(test)]
    pub fn as_str(&self) -> &str {
        &self.text
    }

    /// Writes to `path`, or standard output when `None`.
    pub fn emit(&self, path: Option<&Path>) -> std::io::Result<()> {
        match path {
            Some(p) => {
                if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    std::fs::create_dir_all(dir)?;
                }
                std::fs::write(p, &self.text)
            }
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(self.text.as_bytes())?;
                out.flush()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(5.0 / 9.0), "5.5555555555555558e-1");
        assert_eq!(num(0.0), "0.0000000000000000e0");
        assert_eq!(num(f64::NAN), "nan");
        assert_eq!(num(-f64::INFINITY), "-inf");
        for x in [1e-300, -2.5, std::f64::consts::PI, 6.02e23] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn layout() {
        let mut c = Csv::default();
        c.comment("a\nb");
        c.header(&["t", "x"]);
        c.numbers(&[1.0, f64::NAN]);
        assert_eq!(c.as_str(), "# a\n# b\nt,x\n1.0000000000000000e0,nan\n");
    }
}
