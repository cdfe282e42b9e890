//! Greedy BFS partitioning of faces into face-connected patches.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use super::Mesh;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PatchAssignment {
    pub patch_of_face: Vec<usize>,
    pub patch_count: usize,
}

impl PatchAssignment {
    /// Faces of each patch, ascending.
    pub fn faces_by_patch(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.patch_count];
        for (f, &p) in self.patch_of_face.iter().enumerate() {
            out[p].push(f);
        }
        out
    }
}

/// Grows patches by breadth-first search over edge-adjacent faces, each seeded
/// at the lowest unassigned face and closed at `target_faces`. Fragments below
/// half the target are then folded into an adjacent patch when the merged size
/// stays within `2 * target_faces`.
pub fn partition_patches(mesh: &Mesh, target_faces: usize) -> PatchAssignment {
    let target = target_faces.max(1);
    let nf = mesh.face_count();
    if nf == 0 {
        return PatchAssignment { patch_of_face: Vec::new(), patch_count: 1 };
    }
    const UNASSIGNED: usize = usize::MAX;
    let mut patch_of_face = vec![UNASSIGNED; nf];
    let mut sizes = Vec::new();
    let mut queue = VecDeque::new();
    let mut scratch = Vec::new();

    for seed in 0..nf {
        if patch_of_face[seed] != UNASSIGNED {
            continue;
        }
        let patch = sizes.len();
        let mut size = 0;
        patch_of_face[seed] = patch;
        queue.clear();
        queue.push_back(seed);
        while let Some(f) = queue.pop_front() {
            size += 1;
            if size + queue.len() >= target {
                continue;
            }
            face_neighbors(mesh, f, &mut scratch);
            for &g in &scratch {
                if patch_of_face[g] == UNASSIGNED && size + queue.len() < target {
                    patch_of_face[g] = patch;
                    queue.push_back(g);
                }
            }
        }
        sizes.push(size);
    }

    // fold small fragments into a neighbor
    let mut relabel: Vec<usize> = (0..sizes.len()).collect();
    let faces_by_patch = {
        let mut out = vec![Vec::new(); sizes.len()];
        for (f, &p) in patch_of_face.iter().enumerate() {
            out[p].push(f);
        }
        out
    };
    let find = |relabel: &[usize], mut p: usize| {
        while relabel[p] != p {
            p = relabel[p];
        }
        p
    };
    for p in 0..sizes.len() {
        if sizes.len() == 1 || 2 * sizes[find(&relabel, p)] >= target {
            continue;
        }
        let root = find(&relabel, p);
        let mut best: Option<usize> = None;
        for &f in &faces_by_patch[p] {
            face_neighbors(mesh, f, &mut scratch);
            for &g in &scratch {
                let q = find(&relabel, patch_of_face[g]);
                if q != root && sizes[q] + sizes[root] <= 2 * target && best.is_none_or(|b| sizes[q] < sizes[b]) {
                    best = Some(q);
                }
            }
        }
        if let Some(q) = best {
            relabel[root] = q;
            sizes[q] += sizes[root];
            sizes[root] = 0;
        }
    }

    let mut compact = vec![UNASSIGNED; sizes.len()];
    let mut count = 0;
    for p in 0..sizes.len() {
        let r = find(&relabel, p);
        if compact[r] == UNASSIGNED {
            compact[r] = count;
            count += 1;
        }
    }
    for p in patch_of_face.iter_mut() {
        *p = compact[find(&relabel, *p)];
    }
    PatchAssignment { patch_of_face, patch_count: count }
}

/// Faces sharing an edge with `f`, ascending, without duplicates.
fn face_neighbors(mesh: &Mesh, f: usize, out: &mut Vec<usize>) {
    out.clear();
    for &e in &mesh.face_edges()[f] {
        out.extend(mesh.edge_faces(e).iter().copied().filter(|&g| g != f));
    }
    out.sort_unstable();
    out.dedup();
}
