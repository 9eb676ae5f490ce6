//! CSV exports in long format, one observation per row. Floats use Rust's
//! shortest round-trip formatting, so reading a file back gives the exact
//! values that were written.

use std::io::Write;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::Result;
use crate::grid::SamplePath;
use crate::kac_stroock::PoissonRealization;
use crate::levy_area::AreaField;

fn writer<W: Write>(w: W, header: &[&str]) -> Result<csv::Writer<W>> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header)?;
    Ok(out)
}

/// Columns `component, jump_index, internal_time`.
pub fn write_jumps<W: Write>(w: W, pr: &PoissonRealization) -> Result<()> {
    let mut out = writer(w, &["component", "jump_index", "internal_time"])?;
    for i in 0..pr.dim() {
        for (k, tau) in pr.jumps(i).iter().enumerate() {
            out.write_record([i.to_string(), (k + 1).to_string(), tau.to_string()])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Columns `t, component, value`.
pub fn write_path<W: Write>(w: W, path: &SamplePath) -> Result<()> {
    let mut out = writer(w, &["t", "component", "value"])?;
    for k in 0..path.grid().len() {
        let t = path.grid().node(k).to_string();
        for (i, v) in path.point(k).iter().enumerate() {
            out.write_record([t.clone(), i.to_string(), v.to_string()])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Columns `row, col, value`.
pub fn write_matrix<W: Write>(w: W, m: &DMatrix<f64>) -> Result<()> {
    let mut out = writer(w, &["row", "col", "value"])?;
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            out.write_record([r.to_string(), c.to_string(), m[(r, c)].to_string()])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Columns `t, i, j, anchored_value, method`, the anchors `x²_{0t}(i, j)`.
pub fn write_area<W: Write>(w: W, af: &AreaField) -> Result<()> {
    let mut out = writer(w, &["t", "i", "j", "anchored_value", "method"])?;
    let d = af.path().dim();
    let method = af.method().to_string();
    for k in 0..af.grid().len() {
        let t = af.grid().node(k).to_string();
        for i in 0..d {
            for j in 0..d {
                out.write_record([
                    t.clone(),
                    i.to_string(),
                    j.to_string(),
                    af.anchor_entry(k, i, j).to_string(),
                    method.clone(),
                ])?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Any sequence of flat serializable rows, header taken from field names.
pub fn write_rows<W: Write, S: Serialize>(w: W, rows: &[S]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::kac_stroock::{sample_poisson, Epsilon};

    fn text(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> String {
        let mut buf = Vec::new();
        f(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn jumps_round_trip() {
        let pr = sample_poisson(2, 1.0, Epsilon::new(0.3).unwrap(), 5).unwrap();
        let s = text(|b| write_jumps(b, &pr));
        let mut rdr = csv::Reader::from_reader(s.as_bytes());
        assert_eq!(rdr.headers().unwrap(), vec!["component", "jump_index", "internal_time"]);
        let mut back = vec![Vec::new(); 2];
        for rec in rdr.records() {
            let rec = rec.unwrap();
            let i: usize = rec[0].parse().unwrap();
            back[i].push(rec[2].parse::<f64>().unwrap());
        }
        assert_eq!(back[0], pr.jumps(0));
        assert_eq!(back[1], pr.jumps(1));
    }

    #[test]
    fn path_and_matrix_layout() {
        let g = Grid::with_cells(1.0, 2).unwrap();
        let p = SamplePath::from_fn(g, 2, |t, i| t + i as f64 / 3.0).unwrap();
        let s = text(|b| write_path(b, &p));
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "t,component,value");
        assert_eq!(lines[2], format!("0,1,{}", 1.0 / 3.0));
        assert_eq!(lines.len(), 7);
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 0.1, 0.1, 2.0]);
        let s = text(|b| write_matrix(b, &m));
        assert_eq!(s.lines().nth(2).unwrap(), "0,1,0.1");
    }

    #[test]
    fn area_columns() {
        let g = Grid::with_cells(1.0, 4).unwrap();
        let p = SamplePath::from_fn(g, 2, |t, i| if i == 0 { t } else { t * t }).unwrap();
        let af = AreaField::piecewise_linear(p);
        let s = text(|b| write_area(b, &af));
        assert!(s.starts_with("t,i,j,anchored_value,method\n0,0,0,0,piecewise-linear"));
        assert_eq!(s.lines().count(), 1 + 5 * 4);
    }
}
