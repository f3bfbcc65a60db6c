//! Plain-ASCII PGM (P2) export of density fields, plus the matching CSV
//! writer. Pixels map linearly from [0, max(c)] to [255, 0] so high density
//! renders dark; rows run from v = 1 at the top down to v = 0, columns from
//! u = 0 to u = 1.

use std::io::Write;
use std::path::Path;

use crate::Result;

/// Writes an n×n density field (row-major, `c[i*n+j]` with i the u index and
/// j the v index) as a P2 PGM. Returns the maximum density used for the
/// normalization.
pub fn write_density_pgm<W: Write>(mut w: W, n: usize, c: &[f64]) -> Result<f64> {
    assert_eq!(c.len(), n * n);
    let max = c.iter().cloned().fold(0.0f64, f64::max);
    writeln!(w, "P2")?;
    writeln!(w, "{n} {n}")?;
    writeln!(w, "255")?;
    let mut line = String::new();
    for j in (0..n).rev() {
        line.clear();
        for i in 0..n {
            if i > 0 {
                line.push(' ');
            }
            let gray = if max > 0.0 {
                (255.0 * (1.0 - c[i * n + j] / max)).round().clamp(0.0, 255.0) as u8
            } else {
                255
            };
            line.push_str(&gray.to_string());
        }
        writeln!(w, "{line}")?;
    }
    Ok(max)
}

/// Writes the PGM together with a sidecar JSON recording the normalization
/// maximum (`<path>.json`).
pub fn write_density_pgm_path(path: &Path, n: usize, c: &[f64]) -> Result<f64> {
    let f = std::fs::File::create(path)?;
    let max = write_density_pgm(std::io::BufWriter::new(f), n, c)?;
    let sidecar = path.with_extension("pgm.json");
    std::fs::write(
        &sidecar,
        serde_json::to_string_pretty(&serde_json::json!({ "max_density": max }))?,
    )?;
    Ok(max)
}

/// Writes an n×n matrix as CSV with a `# <label> n=<n>` header, one row per
/// u index.
pub fn write_matrix_csv<W: Write>(mut w: W, label: &str, n: usize, c: &[f64]) -> Result<()> {
    assert_eq!(c.len(), n * n);
    writeln!(w, "# {label} n={n}")?;
    let mut line = String::new();
    for i in 0..n {
        line.clear();
        for j in 0..n {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&format!("{}", c[i * n + j]));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn write_matrix_csv_path(path: &Path, label: &str, n: usize, c: &[f64]) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_matrix_csv(std::io::BufWriter::new(f), label, n, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_header_and_orientation() {
        // 2x2 density with all mass at (u=1, v=0) -> dark pixel bottom-right
        let c = vec![0.0, 0.0, 4.0, 0.0]; // c[i*2+j]: (i=1,j=0) = 4
        let mut buf = Vec::new();
        let max = write_density_pgm(&mut buf, 2, &c).unwrap();
        assert_eq!(max, 4.0);
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "P2");
        assert_eq!(lines[1], "2 2");
        assert_eq!(lines[2], "255");
        // top row is v=1 (j=1): both cells zero density -> white 255
        assert_eq!(lines[3], "255 255");
        // bottom row is v=0 (j=0): (i=0) zero -> 255, (i=1) max -> 0
        assert_eq!(lines[4], "255 0");
    }

    #[test]
    fn degenerate_all_zero_field() {
        let mut buf = Vec::new();
        let max = write_density_pgm(&mut buf, 2, &[0.0; 4]).unwrap();
        assert_eq!(max, 0.0);
    }
}
