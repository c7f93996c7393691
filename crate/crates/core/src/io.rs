//! Plain-text field serialization.
//!
//! ```text
//! # grid: N,R,dx,T,dt,mask
//! # columns: t,x1[,x2],value
//! 0.0000000000000000e0,-1.0000000000000000e0,0.0000000000000000e0
//! ...
//! ```
//!
//! One row per active space-time node, numbers printed with 17 significant
//! digits so that a write/read round trip is exact.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::grid::{Grid, GridSpec, ScalarField};

/// Formats a float with 17 significant digits.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn grid_header(spec: &GridSpec) -> String {
    format!(
        "# grid: {},{},{},{},{},{}",
        spec.dim,
        fmt_num(spec.half_width),
        fmt_num(spec.dx),
        fmt_num(spec.horizon),
        fmt_num(spec.dt),
        if spec.ball_mask { "ball" } else { "box" }
    )
}

pub fn write_field<W: Write>(out: &mut W, u: &ScalarField) -> Result<()> {
    let g = u.grid();
    let mut buf = String::new();
    writeln!(buf, "{}", grid_header(g.spec())).unwrap();
    let cols = if g.dim() == 1 {
        "t,x1,value"
    } else {
        "t,x1,x2,value"
    };
    writeln!(buf, "# columns: {cols}").unwrap();
    for level in 0..g.n_levels() {
        let t = fmt_num(g.time(level));
        for node in g.active_nodes() {
            let x = g.coords(node);
            buf.push_str(&t);
            for xk in &x[..g.dim()] {
                buf.push(',');
                buf.push_str(&fmt_num(*xk));
            }
            buf.push(',');
            buf.push_str(&fmt_num(u.get(level, node)));
            buf.push('\n');
        }
    }
    out.write_all(buf.as_bytes())?;
    Ok(())
}

fn parse_f64(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| LabError::Parse(format!("bad number for {what}: {s:?}")))
}

pub fn parse_grid_header(line: &str) -> Result<GridSpec> {
    let body = line
        .trim()
        .strip_prefix("# grid:")
        .ok_or_else(|| LabError::Parse("missing '# grid:' header".into()))?;
    let parts: Vec<&str> = body.split(',').map(str::trim).collect();
    if parts.len() != 6 {
        return Err(LabError::Parse(format!(
            "grid header needs 6 fields, got {}",
            parts.len()
        )));
    }
    let dim = parts[0]
        .parse::<usize>()
        .map_err(|_| LabError::Parse(format!("bad dimension {:?}", parts[0])))?;
    let ball = match parts[5] {
        "ball" => true,
        "box" => false,
        other => return Err(LabError::Parse(format!("unknown mask {other:?}"))),
    };
    let spec = GridSpec::new(
        dim,
        parse_f64(parts[1], "R")?,
        parse_f64(parts[2], "dx")?,
        parse_f64(parts[3], "T")?,
        parse_f64(parts[4], "dt")?,
    )
    .with_ball_mask(ball);
    spec.validate()?;
    Ok(spec)
}

pub fn read_field<R: BufRead>(input: R) -> Result<ScalarField> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| LabError::Parse("empty field file".into()))??;
    let grid = Arc::new(Grid::new(parse_grid_header(&header)?)?);
    let mut u = ScalarField::zeros(grid.clone());
    let mut seen = vec![false; grid.n_space() * grid.n_levels()];
    let width = grid.dim() + 2;
    for line in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != width {
            return Err(LabError::Parse(format!(
                "expected {width} columns, got {}: {line:?}",
                cells.len()
            )));
        }
        let t = parse_f64(cells[0], "t")?;
        let mut x = [0.0; 2];
        for k in 0..grid.dim() {
            x[k] = parse_f64(cells[k + 1], "x")?;
        }
        let v = parse_f64(cells[width - 1], "value")?;
        let level = grid
            .level_at(t)
            .ok_or_else(|| LabError::Parse(format!("t = {t} is not a grid level")))?;
        let node = grid
            .node_at(&x)
            .filter(|&n| grid.is_active(n))
            .ok_or_else(|| LabError::Parse(format!("x = {x:?} is not an active node")))?;
        u.set(level, node, v);
        seen[level * grid.n_space() + node] = true;
    }
    for level in 0..grid.n_levels() {
        for node in grid.active_nodes() {
            if !seen[level * grid.n_space() + node] {
                return Err(LabError::Parse(format!(
                    "missing value at node {node}, level {level}"
                )));
            }
        }
    }
    u.check_finite()?;
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact() {
        let g = Arc::new(
            Grid::new(GridSpec::new(2, 1.0, 0.25, 0.5, 0.25).with_ball_mask(true)).unwrap(),
        );
        let u = ScalarField::from_fn(g.clone(), |x, t| (x[0] * 7.1).sin() + x[1] / 3.0 - t.exp());
        let mut buf = Vec::new();
        write_field(&mut buf, &u).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# grid: 2,"));
        assert_eq!(
            text.lines().filter(|l| !l.starts_with('#')).count(),
            g.n_active() * 3
        );
        let v = read_field(buf.as_slice()).unwrap();
        assert_eq!(u.values(), v.values());
    }

    #[test]
    fn rejects_bad_headers() {
        assert!(parse_grid_header("# grid: 1,1,0.3,1,0.5,box").is_err());
        assert!(parse_grid_header("# grid: 1,1,0.25,1,0.5,disk").is_err());
        assert!(parse_grid_header("grid: 1,1,0.25,1,0.5,box").is_err());
    }
}
