//! Indexed triangle meshes with derived edges, incidence tables and patches.
//!
//! Connectivity is built purely from incidence, so non-manifold input is
//! accepted. Edges are canonical `(i, j)` pairs with `i < j`, sorted
//! lexicographically; an edge id is its position in that list.

mod generate;
mod patch;

pub use generate::{generate_grid, generate_grid_rect, generate_icosphere};
pub use patch::{partition_patches, PatchAssignment};

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

/// Default patch size in faces.
pub const DEFAULT_PATCH_FACES: usize = 512;
/// Default bound on one-ring query results.
pub const DEFAULT_VALENCE_CAP: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MeshError {
    #[error("no faces")]
    NoFaces,
    #[error("no edges")]
    NoEdges,
    #[error("face {face} references vertex {index} but the mesh has {vertex_count} vertices")]
    IndexOutOfRange { face: usize, index: usize, vertex_count: usize },
    #[error("face {face} repeats a vertex")]
    DegenerateFace { face: usize },
    #[error("vertex {vertex} has {count} neighbors, above the cap of {cap}")]
    ValenceExceeded { vertex: usize, count: usize, cap: usize },
    #[error("{op:?} expects a {expected:?} handle, got {got:?}")]
    KindMismatch { op: NeighborhoodOp, expected: ElementKind, got: ElementKind },
    #[error("{kind:?} {index} is out of range")]
    HandleOutOfRange { kind: ElementKind, index: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ElementKind {
    Vertex,
    Edge,
    Face,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElementHandle {
    pub kind: ElementKind,
    pub index: usize,
}

impl ElementHandle {
    pub const fn vertex(index: usize) -> Self {
        ElementHandle { kind: ElementKind::Vertex, index }
    }

    pub const fn edge(index: usize) -> Self {
        ElementHandle { kind: ElementKind::Edge, index }
    }

    pub const fn face(index: usize) -> Self {
        ElementHandle { kind: ElementKind::Face, index }
    }
}

impl fmt::Display for ElementHandle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.kind {
            ElementKind::Vertex => "v",
            ElementKind::Edge => "e",
            ElementKind::Face => "f",
        };
        write!(f, "{tag}{}", self.index)
    }
}

/// Fixed local neighborhood an energy term reads. The first letter is the
/// source element kind, the second the kind of the returned elements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NeighborhoodOp {
    /// Face to its three vertices, in winding order.
    FV,
    /// Edge to its two endpoints.
    EV,
    /// Vertex to its one-ring vertices, ascending.
    VV,
    /// Vertex to its incident faces, ascending.
    VF,
    /// Vertex to its incident edges, ascending.
    VE,
    /// Vertex to itself.
    V,
}

impl NeighborhoodOp {
    pub fn source(self) -> ElementKind {
        match self {
            NeighborhoodOp::FV => ElementKind::Face,
            NeighborhoodOp::EV => ElementKind::Edge,
            _ => ElementKind::Vertex,
        }
    }

    /// Result count for fixed-arity ops, `None` for the one-ring ops.
    pub fn fixed_arity(self) -> Option<usize> {
        match self {
            NeighborhoodOp::FV => Some(3),
            NeighborhoodOp::EV => Some(2),
            NeighborhoodOp::V => Some(1),
            _ => None,
        }
    }
}

/// Offset-indexed adjacency table.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Adjacency {
    offsets: Vec<usize>,
    indices: Vec<usize>,
}

impl Adjacency {
    fn from_lists(count: usize, pairs: impl Iterator<Item = (usize, usize)> + Clone) -> Self {
        let mut offsets = vec![0usize; count + 1];
        for (row, _) in pairs.clone() {
            offsets[row + 1] += 1;
        }
        for i in 0..count {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets.clone();
        let mut indices = vec![0usize; offsets[count]];
        for (row, value) in pairs {
            indices[cursor[row]] = value;
            cursor[row] += 1;
        }
        Adjacency { offsets, indices }
    }

    #[inline]
    pub fn get(&self, i: usize) -> &[usize] {
        &self.indices[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn len(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug)]
pub struct Mesh {
    positions: Vec<[f64; 3]>,
    faces: Vec<[usize; 3]>,
    edges: Vec<[usize; 2]>,
    face_edges: Vec<[usize; 3]>,
    edge_faces: Adjacency,
    vertex_vertices: Adjacency,
    vertex_edges: Adjacency,
    vertex_faces: Adjacency,
    patches: PatchAssignment,
    valence_cap: usize,
}

impl Mesh {
    /// Builds a triangle mesh; edges, incidence and patches are derived.
    pub fn new(positions: Vec<[f64; 3]>, faces: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        if faces.is_empty() {
            return Err(MeshError::NoFaces);
        }
        let n = positions.len();
        for (fi, f) in faces.iter().enumerate() {
            if let Some(&index) = f.iter().find(|&&v| v >= n) {
                return Err(MeshError::IndexOutOfRange { face: fi, index, vertex_count: n });
            }
            if f[0] == f[1] || f[1] == f[2] || f[0] == f[2] {
                return Err(MeshError::DegenerateFace { face: fi });
            }
        }

        let mut edges: Vec<[usize; 2]> = faces
            .iter()
            .flat_map(|f| [(f[0], f[1]), (f[1], f[2]), (f[2], f[0])])
            .map(|(a, b)| if a < b { [a, b] } else { [b, a] })
            .collect();
        edges.sort_unstable();
        edges.dedup();

        let edge_id = |a: usize, b: usize| -> usize {
            let key = if a < b { [a, b] } else { [b, a] };
            edges.binary_search(&key).expect("face edge is in the derived edge set")
        };
        let face_edges: Vec<[usize; 3]> =
            faces.iter().map(|f| [edge_id(f[0], f[1]), edge_id(f[1], f[2]), edge_id(f[2], f[0])]).collect();

        let edge_faces = Adjacency::from_lists(
            edges.len(),
            face_edges.iter().enumerate().flat_map(|(fi, fe)| fe.iter().map(move |&e| (e, fi))),
        );
        let vertex_faces =
            Adjacency::from_lists(n, faces.iter().enumerate().flat_map(|(fi, f)| f.iter().map(move |&v| (v, fi))));

        let mut mesh = Self::assemble(positions, faces, edges, face_edges, edge_faces, vertex_faces);
        mesh.patches = partition_patches(&mesh, DEFAULT_PATCH_FACES);
        Ok(mesh)
    }

    /// Builds an edge-only graph (no faces), e.g. a single spring.
    pub fn from_edges(positions: Vec<[f64; 3]>, edges: Vec<[usize; 2]>) -> Result<Self, MeshError> {
        if edges.is_empty() {
            return Err(MeshError::NoEdges);
        }
        let n = positions.len();
        let mut canonical = Vec::with_capacity(edges.len());
        for (ei, e) in edges.iter().enumerate() {
            if let Some(&index) = e.iter().find(|&&v| v >= n) {
                return Err(MeshError::IndexOutOfRange { face: ei, index, vertex_count: n });
            }
            if e[0] == e[1] {
                return Err(MeshError::DegenerateFace { face: ei });
            }
            canonical.push(if e[0] < e[1] { *e } else { [e[1], e[0]] });
        }
        canonical.sort_unstable();
        canonical.dedup();
        let edge_faces = Adjacency::from_lists(canonical.len(), core::iter::empty());
        let vertex_faces = Adjacency::from_lists(n, core::iter::empty());
        let mut mesh = Self::assemble(positions, Vec::new(), canonical, Vec::new(), edge_faces, vertex_faces);
        mesh.patches = partition_patches(&mesh, DEFAULT_PATCH_FACES);
        Ok(mesh)
    }

    fn assemble(
        positions: Vec<[f64; 3]>,
        faces: Vec<[usize; 3]>,
        edges: Vec<[usize; 2]>,
        face_edges: Vec<[usize; 3]>,
        edge_faces: Adjacency,
        vertex_faces: Adjacency,
    ) -> Self {
        let n = positions.len();
        // Edges are sorted, so pushing both endpoints in edge order yields
        // ascending neighbor lists.
        let vertex_vertices = Adjacency::from_lists(n, edges.iter().flat_map(|&[a, b]| [(a, b), (b, a)]));
        let vertex_edges =
            Adjacency::from_lists(n, edges.iter().enumerate().flat_map(|(ei, &[a, b])| [(a, ei), (b, ei)]));
        Mesh {
            positions,
            faces,
            edges,
            face_edges,
            edge_faces,
            vertex_vertices,
            vertex_edges,
            vertex_faces,
            patches: PatchAssignment::default(),
            valence_cap: DEFAULT_VALENCE_CAP,
        }
    }

    /// Re-partitions faces into patches of about `target_faces`.
    pub fn with_patch_size(mut self, target_faces: usize) -> Self {
        self.patches = partition_patches(&self, target_faces.max(1));
        self
    }

    pub fn with_valence_cap(mut self, cap: usize) -> Self {
        self.valence_cap = cap;
        self
    }

    pub fn valence_cap(&self) -> usize {
        self.valence_cap
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn element_count(&self, kind: ElementKind) -> usize {
        match kind {
            ElementKind::Vertex => self.vertex_count(),
            ElementKind::Edge => self.edge_count(),
            ElementKind::Face => self.face_count(),
        }
    }

    pub fn face_edges(&self) -> &[[usize; 3]] {
        &self.face_edges
    }

    pub fn edge_faces(&self, e: usize) -> &[usize] {
        self.edge_faces.get(e)
    }

    pub fn vertex_vertices(&self, v: usize) -> &[usize] {
        self.vertex_vertices.get(v)
    }

    pub fn vertex_edges(&self, v: usize) -> &[usize] {
        self.vertex_edges.get(v)
    }

    pub fn vertex_faces(&self, v: usize) -> &[usize] {
        self.vertex_faces.get(v)
    }

    pub fn patches(&self) -> &PatchAssignment {
        &self.patches
    }

    /// Patch that owns an element: faces by assignment, edges and vertices
    /// through their lowest-index incident face (patch 0 if none).
    pub fn patch_of(&self, handle: ElementHandle) -> usize {
        let face = match handle.kind {
            ElementKind::Face => Some(handle.index),
            ElementKind::Edge => self.edge_faces.get(handle.index).first().copied(),
            ElementKind::Vertex => self.vertex_faces.get(handle.index).first().copied(),
        };
        face.map_or(0, |f| self.patches.patch_of_face[f])
    }

    /// `V - E + F`.
    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count() as i64 - self.edge_count() as i64 + self.face_count() as i64
    }

    /// Edges with exactly one incident face.
    pub fn boundary_edges(&self) -> Vec<usize> {
        (0..self.edge_count()).filter(|&e| self.edge_faces.get(e).len() == 1).collect()
    }

    pub fn face_area(&self, f: usize) -> f64 {
        let [a, b, c] = self.faces[f].map(|v| self.positions[v]);
        let u = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
        let w = [c[0] - a[0], c[1] - a[1], c[2] - a[2]];
        let n = [u[1] * w[2] - u[2] * w[1], u[2] * w[0] - u[0] * w[2], u[0] * w[1] - u[1] * w[0]];
        0.5 * crate::real::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2])
    }

    /// Elements adjacent to `handle` under `op`, in deterministic order.
    pub fn query(&self, op: NeighborhoodOp, handle: ElementHandle) -> Result<Vec<ElementHandle>, MeshError> {
        if handle.kind != op.source() {
            return Err(MeshError::KindMismatch { op, expected: op.source(), got: handle.kind });
        }
        if handle.index >= self.element_count(handle.kind) {
            return Err(MeshError::HandleOutOfRange { kind: handle.kind, index: handle.index });
        }
        let i = handle.index;
        let capped = |list: &[usize], make: fn(usize) -> ElementHandle| {
            if list.len() > self.valence_cap {
                Err(MeshError::ValenceExceeded { vertex: i, count: list.len(), cap: self.valence_cap })
            } else {
                Ok(list.iter().map(|&x| make(x)).collect())
            }
        };
        match op {
            NeighborhoodOp::FV => Ok(self.faces[i].iter().map(|&v| ElementHandle::vertex(v)).collect()),
            NeighborhoodOp::EV => Ok(self.edges[i].iter().map(|&v| ElementHandle::vertex(v)).collect()),
            NeighborhoodOp::V => Ok(vec![ElementHandle::vertex(i)]),
            NeighborhoodOp::VV => capped(self.vertex_vertices.get(i), ElementHandle::vertex),
            NeighborhoodOp::VE => capped(self.vertex_edges.get(i), ElementHandle::edge),
            NeighborhoodOp::VF => capped(self.vertex_faces.get(i), ElementHandle::face),
        }
    }

    /// Vertices whose variables an element reads under `op`: the queried
    /// vertices for `FV`/`EV`/`V`, and for the one-ring ops the center vertex
    /// followed by every other vertex reachable through the result.
    pub fn selection(&self, op: NeighborhoodOp, handle: ElementHandle) -> Result<Vec<usize>, MeshError> {
        let neighbors = self.query(op, handle)?;
        let i = handle.index;
        Ok(match op {
            NeighborhoodOp::FV | NeighborhoodOp::EV | NeighborhoodOp::V => neighbors.iter().map(|h| h.index).collect(),
            NeighborhoodOp::VV => core::iter::once(i).chain(neighbors.iter().map(|h| h.index)).collect(),
            NeighborhoodOp::VE => core::iter::once(i)
                .chain(neighbors.iter().map(|h| {
                    let [a, b] = self.edges[h.index];
                    if a == i {
                        b
                    } else {
                        a
                    }
                }))
                .collect(),
            NeighborhoodOp::VF => {
                let mut out = vec![i];
                for h in &neighbors {
                    for &v in &self.faces[h.index] {
                        if !out.contains(&v) {
                            out.push(v);
                        }
                    }
                }
                out
            }
        })
    }
}
