//! Result emission: CSV (12 significant digits), JSON, and a binary matrix
//! container for kernel dumps.
//!
//! CSV schemas (headers are part of the contract):
//!
//! * sir:  `case,compensated,branch,symbol,signal_db,interference_db,sir_db`
//! * ber:  `scheme,ebn0_db,bits,errors,ber,wilson_low,wilson_high,converged,cp_warning`
//! * se:   `scheme,snr_db,block_len,alpha,eta_eq7,eta_alpha,overhead_ratio,se_bits_per_hz`
//!
//! The matrix container is `FBMCMAT1` followed by a little-endian u32 entry
//! count, then per entry: u16 name length, name bytes, u32 rows, u32 cols,
//! and rows*cols f64 values in row-major order.

use std::io::{Read, Write};

use crate::analysis::ber::BerPoint;
use crate::analysis::se::SePoint;
use crate::analysis::sir::SirReport;
use crate::error::FbmcError;
use crate::Result;

/// Decimal with 12 significant digits, no exponent for ordinary magnitudes.
pub fn sig12(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let s = format!("{v:.12e}");
    let parsed: f64 = s.parse().unwrap_or(v);
    let mag = parsed.abs();
    if (1e-6..1e15).contains(&mag) {
        let digits = (12 - 1 - mag.log10().floor() as i32).max(0) as usize;
        let t = format!("{parsed:.digits$}");
        if t.contains('.') {
            t.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            t
        }
    } else {
        s
    }
}

pub fn sir_csv(report: &SirReport, case_name: &str) -> String {
    let mut out =
        String::from("case,compensated,branch,symbol,signal_db,interference_db,sir_db\n");
    for e in &report.entries {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            case_name,
            report.compensated,
            e.branch,
            e.symbol,
            sig12(e.signal_db),
            sig12(e.interference_db),
            sig12(e.sir_db)
        ));
    }
    out
}

pub fn ber_csv(points: &[BerPoint]) -> String {
    let mut out = String::from(
        "scheme,ebn0_db,bits,errors,ber,wilson_low,wilson_high,converged,cp_warning\n",
    );
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            p.scheme,
            sig12(p.ebn0_db),
            p.bits,
            p.errors,
            sig12(p.ber),
            sig12(p.wilson_low),
            sig12(p.wilson_high),
            p.converged,
            p.cp_warning
        ));
    }
    out
}

pub fn se_csv(points: &[SePoint]) -> String {
    let mut out = String::from(
        "scheme,snr_db,block_len,alpha,eta_eq7,eta_alpha,overhead_ratio,se_bits_per_hz\n",
    );
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            p.scheme,
            sig12(p.snr_db),
            p.block_len,
            p.alpha,
            sig12(p.eta_eq7),
            sig12(p.eta_alpha),
            sig12(p.overhead_ratio),
            sig12(p.se_bits_per_hz)
        ));
    }
    out
}

/// One named matrix for the binary container.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixEntry {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    /// Row-major values, rows * cols.
    pub data: Vec<f64>,
}

const MAGIC: &[u8; 8] = b"FBMCMAT1";

pub fn write_matrix_container<W: Write>(mut w: W, entries: &[MatrixEntry]) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&(entries.len() as u32).to_le_bytes())?;
    for e in entries {
        if e.data.len() != e.rows * e.cols {
            return Err(FbmcError::DimensionMismatch(format!(
                "matrix '{}' data length {} != {}x{}",
                e.name,
                e.data.len(),
                e.rows,
                e.cols
            )));
        }
        let name = e.name.as_bytes();
        w.write_all(&(name.len() as u16).to_le_bytes())?;
        w.write_all(name)?;
        w.write_all(&(e.rows as u32).to_le_bytes())?;
        w.write_all(&(e.cols as u32).to_le_bytes())?;
        for v in &e.data {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_matrix_container<R: Read>(mut r: R) -> Result<Vec<MatrixEntry>> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(FbmcError::Format("bad matrix container magic".into()));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let count = u32::from_le_bytes(b4) as usize;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let mut b2 = [0u8; 2];
        r.read_exact(&mut b2)?;
        let name_len = u16::from_le_bytes(b2) as usize;
        let mut name = vec![0u8; name_len];
        r.read_exact(&mut name)?;
        r.read_exact(&mut b4)?;
        let rows = u32::from_le_bytes(b4) as usize;
        r.read_exact(&mut b4)?;
        let cols = u32::from_le_bytes(b4) as usize;
        let mut data = vec![0.0f64; rows * cols];
        let mut b8 = [0u8; 8];
        for v in data.iter_mut() {
            r.read_exact(&mut b8)?;
            *v = f64::from_le_bytes(b8);
        }
        out.push(MatrixEntry {
            name: String::from_utf8(name)
                .map_err(|_| FbmcError::Format("non-utf8 matrix name".into()))?,
            rows,
            cols,
            data,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig12_formats() {
        assert_eq!(sig12(0.0), "0");
        assert_eq!(sig12(1.0), "1");
        assert_eq!(sig12(0.05), "0.05");
        assert_eq!(sig12(-3.25), "-3.25");
        assert!(sig12(1.234567890123).starts_with("1.23456789012"));
    }

    #[test]
    fn matrix_container_roundtrip() {
        let entries = vec![
            MatrixEntry {
                name: "dq_re_ii_0_1".into(),
                rows: 2,
                cols: 3,
                data: vec![1.0, -2.0, 3.5, 0.0, 1e-12, 7.0],
            },
            MatrixEntry {
                name: "a_inv_0".into(),
                rows: 1,
                cols: 1,
                data: vec![2.0],
            },
        ];
        let mut buf = Vec::new();
        write_matrix_container(&mut buf, &entries).unwrap();
        let back = read_matrix_container(&buf[..]).unwrap();
        assert_eq!(entries, back);
    }

    #[test]
    fn bad_magic_rejected() {
        let buf = b"NOTMAGIC\0\0\0\0".to_vec();
        assert!(read_matrix_container(&buf[..]).is_err());
    }
}
