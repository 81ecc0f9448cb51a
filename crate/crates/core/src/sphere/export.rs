//! Mesh and field snapshots. Every file is written to a sibling temporary
//! path and renamed into place.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use super::field::{embed, SupportField};
use super::grid::GridShape;

/// Writes `contents` to `path` via temp-and-rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)
}

/// Wavefront OBJ of the reconstructed surface (`S²` grids). Vertices follow
/// grid order; two extra vertices close the polar caps at the centroid of
/// the first and last rows.
pub fn obj_string(u: &SupportField) -> Option<String> {
    let GridShape::LatLong { n_theta, n_phi } = u.grid().shape() else {
        return None;
    };
    let pts = embed(u);
    let mut out = String::with_capacity(pts.len() * 48);
    let _ = writeln!(out, "# t = {}", u.time());
    for p in &pts {
        let _ = writeln!(out, "v {:.12e} {:.12e} {:.12e}", p[0], p[1], p[2]);
    }
    let centroid = |row: usize| {
        let mut c = [0.0; 3];
        for p in &pts[row * n_phi..(row + 1) * n_phi] {
            for a in 0..3 {
                c[a] += p[a] / n_phi as f64;
            }
        }
        c
    };
    for c in [centroid(0), centroid(n_theta - 1)] {
        let _ = writeln!(out, "v {:.12e} {:.12e} {:.12e}", c[0], c[1], c[2]);
    }
    // OBJ indices are 1-based
    let id = |j: usize, k: usize| j * n_phi + (k % n_phi) + 1;
    for j in 0..n_theta - 1 {
        for k in 0..n_phi {
            let (a, b, c, d) = (id(j, k), id(j, k + 1), id(j + 1, k + 1), id(j + 1, k));
            let _ = writeln!(out, "f {a} {d} {c}");
            let _ = writeln!(out, "f {a} {c} {b}");
        }
    }
    let (north, south) = (pts.len() + 1, pts.len() + 2);
    for k in 0..n_phi {
        let _ = writeln!(out, "f {north} {} {}", id(0, k), id(0, k + 1));
        let s = n_theta - 1;
        let _ = writeln!(out, "f {south} {} {}", id(s, k + 1), id(s, k));
    }
    Some(out)
}

/// Two-column `x,y` CSV polyline of the reconstructed curve (`S¹` grids).
pub fn polyline_string(u: &SupportField) -> Option<String> {
    if !matches!(u.grid().shape(), GridShape::Circle { .. }) {
        return None;
    }
    let mut out = String::from("x,y\n");
    for p in embed(u) {
        let _ = writeln!(out, "{:.12e},{:.12e}", p[0], p[1]);
    }
    Some(out)
}

/// `node_index,theta,phi,u` CSV.
pub fn field_csv_string(u: &SupportField) -> String {
    let mut out = String::from("node_index,theta,phi,u\n");
    for (i, v) in u.values().iter().enumerate() {
        let (t, p) = u.grid().angles(i);
        let _ = writeln!(out, "{i},{t:.15e},{p:.15e},{v:.17e}");
    }
    out
}

/// Writes the mesh (OBJ or polyline CSV, by dimension) to `path`.
pub fn write_mesh(u: &SupportField, path: &Path) -> io::Result<()> {
    let text = obj_string(u)
        .or_else(|| polyline_string(u))
        .expect("grid is either a circle or a lat-long grid");
    write_atomic(path, text.as_bytes())
}

pub fn write_field_csv(u: &SupportField, path: &Path) -> io::Result<()> {
    write_atomic(path, field_csv_string(u).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::grid::SphereGrid;

    #[test]
    fn obj_counts() {
        let g = SphereGrid::lat_long(16, 32).unwrap().into_shared();
        let u = SupportField::constant(g, 2.0).unwrap();
        let obj = obj_string(&u).unwrap();
        let verts = obj.lines().filter(|l| l.starts_with("v ")).count();
        let faces = obj.lines().filter(|l| l.starts_with("f ")).count();
        assert_eq!(verts, 16 * 32 + 2);
        assert_eq!(faces, 2 * 15 * 32 + 2 * 32);
        // closed triangulated sphere: V − E + F = 2 with E = 3F/2
        assert_eq!(verts as i64 - (3 * faces / 2) as i64 + faces as i64, 2);
        assert!(polyline_string(&u).is_none());
    }

    #[test]
    fn polyline_and_field_files() {
        let dir = tempfile::tempdir().unwrap();
        let g = SphereGrid::circle(16).unwrap().into_shared();
        let u = SupportField::constant(g, 1.0).unwrap();
        let mesh = dir.path().join("curve.csv");
        write_mesh(&u, &mesh).unwrap();
        let text = fs::read_to_string(&mesh).unwrap();
        assert_eq!(text.lines().count(), 17);
        let field = dir.path().join("field.csv");
        write_field_csv(&u, &field).unwrap();
        let text = fs::read_to_string(&field).unwrap();
        assert!(text.starts_with("node_index,theta,phi,u\n"));
        assert_eq!(text.lines().count(), 17);
        assert!(!dir.path().join("field.csv.tmp").exists());
    }
}
