//! Plain-text output formats shared by the library and the command line.
//!
//! Machine formats write 17 significant digits so that every `f64` survives
//! a round trip through text.

use std::io::{self, Write};

/// Formats `x` with 17 significant digits: positional notation for moderate
/// exponents, scientific otherwise. Trailing zeros are kept so columns line up.
pub fn fmt_sig17(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0.0000000000000000".into() } else { "0.0000000000000000".into() };
    }
    let sci = format!("{x:.16e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

/// Writes a CSV with the given header and rows of numbers.
pub fn write_numeric_csv<W: Write>(mut out: W, header: &[&str], rows: &[Vec<f64>]) -> io::Result<()> {
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| fmt_sig17(*v)).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

/// Density grid as CSV with header `x,pdf`. Points where the density has no
/// finite value are written with an empty `pdf` cell.
pub fn write_density_csv<W: Write>(mut out: W, points: &[(f64, Option<f64>)]) -> io::Result<()> {
    writeln!(out, "x,pdf")?;
    for (x, p) in points {
        match p {
            Some(v) => writeln!(out, "{},{}", fmt_sig17(*x), fmt_sig17(*v))?,
            None => writeln!(out, "{},", fmt_sig17(*x))?,
        }
    }
    Ok(())
}

/// Header names and rows of a parsed CSV.
pub type NumericTable = (Vec<String>, Vec<Vec<Option<f64>>>);

/// Parses a CSV written by [`write_numeric_csv`]; empty cells become `None`.
pub fn read_numeric_csv(text: &str) -> Result<NumericTable, String> {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or("empty csv")?
        .split(',')
        .map(str::to_owned)
        .collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let cells = line
            .split(',')
            .map(|c| {
                if c.is_empty() {
                    Ok(None)
                } else {
                    c.parse::<f64>().map(Some).map_err(|e| format!("row {}: {e}", i + 1))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        if cells.len() != header.len() {
            return Err(format!("row {} has {} cells, header has {}", i + 1, cells.len(), header.len()));
        }
        rows.push(cells);
    }
    Ok((header, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, -2.5e-7, 1.0 / 3.0, 123456.789, 6.02e23, -1e-300, 0.31008018840844587] {
            let s = fmt_sig17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_sig17(0.5), "0.50000000000000000");
        assert_eq!(fmt_sig17(12.0), "12.000000000000000");
        assert_eq!(fmt_sig17(6.02e23), "6.0200000000000000e23");
    }

    #[test]
    fn csv_round_trip() {
        let mut buf = Vec::new();
        write_density_csv(&mut buf, &[(-1.0, Some(0.25)), (0.0, None)]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let (header, rows) = read_numeric_csv(&text).unwrap();
        assert_eq!(header, ["x", "pdf"]);
        assert_eq!(rows, vec![vec![Some(-1.0), Some(0.25)], vec![Some(0.0), None]]);
    }
}
