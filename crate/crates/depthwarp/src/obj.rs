//! Wavefront OBJ dump of a warp mesh, for inspection in a mesh viewer.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use depthwarp_core::WarpMesh;

use crate::FormatError;

/// Vertices in world meters; stretched triangles go to group `stretched`,
/// the rest to group `surface`.
pub fn mesh_to_obj(mesh: &WarpMesh) -> String {
    let mut s = String::with_capacity(mesh.vertices.len() * 40 + mesh.triangles.len() * 24);
    let _ = writeln!(s, "# source frame {}", mesh.source_frame);
    for v in &mesh.vertices {
        let _ = writeln!(s, "v {} {} {}", v.x, v.y, v.z);
    }
    for (group, want) in [("surface", false), ("stretched", true)] {
        let _ = writeln!(s, "g {group}");
        for (t, _) in mesh.triangles.iter().zip(&mesh.stretched).filter(|(_, &st)| st == want) {
            let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
    }
    s
}

pub fn write_obj(mesh: &WarpMesh, path: &Path) -> Result<(), FormatError> {
    fs::write(path, mesh_to_obj(mesh)).map_err(|e| FormatError::io(path, e))
}
