//! Field snapshots as CSV: header `x,A,rho,v`, one node per row,
//! 17-significant-digit floats, `.` decimal separator, `\n` endings.

use std::fmt::Write as _;
use std::path::Path;

use hotspot_core::{FieldState, Grid1D};

use crate::fail::Failure;

/// Renders a snapshot; `v = ρ/A²` is derived, not stored state.
pub fn render_snapshot(state: &FieldState, grid: &Grid1D) -> Result<String, Failure> {
    let v = state
        .to_v(grid)
        .map_err(|e| Failure::Config(format!("snapshot does not fit the grid: {e}")))?;
    let mut text = String::from("x,A,rho,v\n");
    for (i, &x) in grid.nodes().iter().enumerate() {
        writeln!(
            text,
            "{x:.16e},{:.16e},{:.16e},{:.16e}",
            state.a[i], state.rho[i], v[i]
        )
        .expect("string writes cannot fail");
    }
    Ok(text)
}

pub fn write_snapshot(path: &Path, state: &FieldState, grid: &Grid1D) -> Result<(), Failure> {
    let text = render_snapshot(state, grid)?;
    std::fs::write(path, text).map_err(|e| Failure::io(&format!("cannot write {}", path.display()), e))
}

/// Reads a snapshot back as initial data.  The `x` column must match
/// the grid nodes (so a file from one resolution cannot silently seed
/// another); the `v` column is ignored in favor of `ρ/A²`.
pub fn read_snapshot(path: &Path, grid: &Grid1D) -> Result<FieldState, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::io(&format!("cannot read {}", path.display()), e))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header.trim() == "x,A,rho,v" => {}
        other => {
            return Err(Failure::Config(format!(
                "{}: expected header 'x,A,rho,v', found {:?}",
                path.display(),
                other.unwrap_or("")
            )));
        }
    }

    let nodes = grid.nodes();
    let mut a = Vec::with_capacity(nodes.len());
    let mut rho = Vec::with_capacity(nodes.len());
    for (row, line) in lines.filter(|l| !l.trim().is_empty()).enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Failure::Config(format!(
                "{}: row {} has {} fields, expected 4",
                path.display(),
                row + 1,
                fields.len()
            )));
        }
        let parse = |s: &str, name: &str| -> Result<f64, Failure> {
            s.trim().parse::<f64>().map_err(|_| {
                Failure::Config(format!(
                    "{}: row {}: cannot parse {name} value {s:?}",
                    path.display(),
                    row + 1
                ))
            })
        };
        let x = parse(fields[0], "x")?;
        if row >= nodes.len() {
            return Err(Failure::Config(format!(
                "{}: more rows than the {}-node grid",
                path.display(),
                nodes.len()
            )));
        }
        if (x - nodes[row]).abs() > 1e-9 * grid.h().max(1.0) {
            return Err(Failure::Config(format!(
                "{}: row {}: x = {x} does not match grid node {}",
                path.display(),
                row + 1,
                nodes[row]
            )));
        }
        a.push(parse(fields[1], "A")?);
        rho.push(parse(fields[2], "rho")?);
    }
    if a.len() != nodes.len() {
        return Err(Failure::Config(format!(
            "{}: {} rows for a {}-node grid",
            path.display(),
            a.len(),
            nodes.len()
        )));
    }

    let state = FieldState {
        a,
        rho,
        time: 0.0,
    };
    state
        .validate(grid)
        .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> (Grid1D, FieldState) {
        let grid = Grid1D::new(1.0, 4);
        let a: Vec<f64> = grid.nodes().iter().map(|x| 2.0 + x * x).collect();
        let rho: Vec<f64> = grid.nodes().iter().map(|x| 0.5 + 0.1 * x).collect();
        (grid, FieldState { a, rho, time: 3.0 })
    }

    #[test]
    fn snapshot_round_trips_exactly() {
        let (grid, state) = sample();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snap.csv");
        write_snapshot(&path, &state, &grid).unwrap();
        let back = read_snapshot(&path, &grid).unwrap();
        assert_eq!(back.a, state.a);
        assert_eq!(back.rho, state.rho);
        assert_eq!(back.time, 0.0);
    }

    #[test]
    fn header_and_line_endings_are_pinned() {
        let (grid, state) = sample();
        let text = render_snapshot(&state, &grid).unwrap();
        assert!(text.starts_with("x,A,rho,v\n"));
        assert!(!text.contains('\r'));
        assert_eq!(text.lines().count(), 1 + grid.len());
    }

    #[test]
    fn mismatched_grid_is_rejected() {
        let (grid, state) = sample();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snap.csv");
        write_snapshot(&path, &state, &grid).unwrap();
        let other = Grid1D::new(1.0, 8);
        let err = read_snapshot(&path, &other).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn garbage_rows_are_reported_with_position() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "x,A,rho,v\n-1.0,nope,1.0,1.0\n").unwrap();
        let grid = Grid1D::new(1.0, 4);
        let err = read_snapshot(&path, &grid).unwrap_err();
        assert!(err.to_string().contains("parse A"), "{err}");
    }
}
