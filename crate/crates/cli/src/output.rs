use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

/// 17 significant digits in scientific notation.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `header` and `rows` as `\n`-terminated CSV lines.
pub fn write_csv<W: Write>(mut w: W, header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()
}

pub fn write_csv_to(path: Option<&Path>, header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
    match path {
        Some(p) => write_csv(BufWriter::new(File::create(p)?), header, rows),
        None => write_csv(io::stdout().lock(), header, rows),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        assert_eq!(fmt_float(16.0), "1.6000000000000000e1");
        assert_eq!(fmt_float(0.0), "0.0000000000000000e0");
        assert_eq!(fmt_float(f64::NAN), "NaN");
        for x in [std::f64::consts::PI, 1.0 / 3.0, -2.5e-300, 131.00300978075168] {
            assert_eq!(fmt_float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &["a", "b"], &[vec!["1".into(), "2".into()]]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n1,2\n");
    }
}
