//! Marching-cubes triangulation of a zero level set, written as OBJ.
//!
//! The case table is generated once from the cube topology instead of being
//! spelled out. On each cube face the sign changes are joined into segments;
//! faces with two diagonal inside corners cut those corners off. The rule
//! only looks at the face, so the two cells sharing a face always agree and
//! the mesh has no cracks. Segments are directed with the inside on their
//! left, chained into loops and fanned into triangles that face the
//! positive side.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::grid::{Point, ScalarGrid};

/// Corner `c` of a cell sits at offset `(c & 1, c >> 1 & 1, c >> 2 & 1)`.
const EDGES: [[usize; 2]; 12] = [
    [0, 1],
    [2, 3],
    [4, 5],
    [6, 7],
    [0, 2],
    [1, 3],
    [4, 6],
    [5, 7],
    [0, 4],
    [1, 5],
    [2, 6],
    [3, 7],
];

#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Point>,
    /// Vertex indices, counter-clockwise seen from the positive side.
    pub triangles: Vec<[u32; 3]>,
}

fn corner_offset(c: usize) -> [i32; 3] {
    [(c & 1) as i32, (c >> 1 & 1) as i32, (c >> 2 & 1) as i32]
}

fn edge_between(a: usize, b: usize) -> usize {
    EDGES
        .iter()
        .position(|e| (e[0] == a && e[1] == b) || (e[0] == b && e[1] == a))
        .expect("corners share an edge")
}

/// The six faces, corners listed counter-clockwise seen from outside.
fn faces() -> Vec<[usize; 4]> {
    let mut out = Vec::new();
    for axis in 0..3 {
        for side in 0..2 {
            let (u, v) = ((axis + 1) % 3, (axis + 2) % 3);
            let at = |du: usize, dv: usize| (side << axis) | (du << u) | (dv << v);
            // (u, v, axis) is right-handed, so this order faces +axis
            let mut quad = [at(0, 0), at(1, 0), at(1, 1), at(0, 1)];
            if side == 0 {
                quad.reverse();
            }
            out.push(quad);
        }
    }
    out
}

/// Triangles (as cell-edge triples) for an inside-corner bitmask.
fn triangulate_case(inside: u8) -> Vec<[usize; 3]> {
    let is_in = |c: usize| inside >> c & 1 == 1;
    let mut next = [usize::MAX; 12];
    for quad in faces() {
        for i in 0..4 {
            let (a, b) = (quad[i], quad[(i + 1) % 4]);
            if !(is_in(a) && !is_in(b)) {
                continue;
            }
            // leaving the inside at (a, b); walk back to where it was entered.
            // On diagonal faces the inside corners are isolated, so the walk
            // stops after one step there.
            let mut j = i;
            loop {
                j = (j + 3) % 4;
                let (p, q) = (quad[j], quad[(j + 1) % 4]);
                if !is_in(p) && is_in(q) {
                    next[edge_between(a, b)] = edge_between(p, q);
                    break;
                }
            }
        }
    }
    let mut used = [false; 12];
    let mut tris = Vec::new();
    for start in 0..12 {
        if next[start] == usize::MAX || used[start] {
            continue;
        }
        let mut ring = vec![start];
        used[start] = true;
        let mut e = next[start];
        while e != start {
            used[e] = true;
            ring.push(e);
            e = next[e];
        }
        for k in 1..ring.len() - 1 {
            tris.push([ring[0], ring[k + 1], ring[k]]);
        }
    }
    tris
}

fn case_table() -> &'static [Vec<[usize; 3]>] {
    static TABLE: OnceLock<Vec<Vec<[usize; 3]>>> = OnceLock::new();
    TABLE.get_or_init(|| (0..=255u8).map(triangulate_case).collect())
}

/// Triangulates `{f = 0}`, treating nodes with `f < 0` as inside. Vertices
/// are shared between cells and placed by linear interpolation along grid
/// edges.
pub fn marching_cubes(f: &ScalarGrid) -> Result<TriangleMesh> {
    let geom = f.geometry();
    if geom.ndim() != 3 {
        return Err(Error::invalid("mesh export needs a 3D grid"));
    }
    let dims = geom.dims();
    let v = f.values();
    let table = case_table();
    let mut vertex_of_edge: HashMap<(usize, usize), u32> = HashMap::new();
    let mut mesh = TriangleMesh {
        vertices: Vec::new(),
        triangles: Vec::new(),
    };
    for i in 0..dims[0] - 1 {
        for j in 0..dims[1] - 1 {
            for k in 0..dims[2] - 1 {
                let node = |c: usize| {
                    let o = corner_offset(c);
                    geom.index([i + o[0] as usize, j + o[1] as usize, k + o[2] as usize])
                };
                let mut mask = 0u8;
                for c in 0..8 {
                    if v[node(c)] < 0.0 {
                        mask |= 1 << c;
                    }
                }
                let tris = &table[mask as usize];
                if tris.is_empty() {
                    continue;
                }
                let mut vertex = |e: usize| -> u32 {
                    let (a, b) = (node(EDGES[e][0]), node(EDGES[e][1]));
                    let axis = (0..3).find(|&ax| EDGES[e][0] ^ EDGES[e][1] == 1 << ax).unwrap();
                    *vertex_of_edge.entry((a, axis)).or_insert_with(|| {
                        let (pa, pb) = (geom.node_position(a), geom.node_position(b));
                        let t = v[a] / (v[a] - v[b]);
                        mesh.vertices.push(std::array::from_fn(|d| pa[d] + t * (pb[d] - pa[d])));
                        (mesh.vertices.len() - 1) as u32
                    })
                };
                for t in tris {
                    let tri = [vertex(t[0]), vertex(t[1]), vertex(t[2])];
                    mesh.triangles.push(tri);
                }
            }
        }
    }
    if mesh.triangles.is_empty() {
        return Err(Error::NoZeroCrossing);
    }
    Ok(mesh)
}

/// OBJ text with `v` and `f` records only.
pub fn obj_string(mesh: &TriangleMesh) -> String {
    let mut s = String::new();
    for p in &mesh.vertices {
        writeln!(s, "v {} {} {}", p[0], p[1], p[2]).unwrap();
    }
    for t in &mesh.triangles {
        writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1).unwrap();
    }
    s
}

/// Triangulates the zero level set of `f` and writes it to `path`.
pub fn export_mesh(f: &ScalarGrid, path: &Path) -> Result<TriangleMesh> {
    let mesh = marching_cubes(f)?;
    std::fs::write(path, obj_string(&mesh)).map_err(|e| Error::io(path, e))?;
    Ok(mesh)
}
