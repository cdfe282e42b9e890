//! Distortion-minimizing UV maps with the area-weighted symmetric Dirichlet
//! energy `sum_t area_t (|J_t|^2 + |J_t^-1|^2)`, minimized matrix-free.

use alloc::vec;
use alloc::vec::Vec;

use super::AppError;
use crate::active::{Active, SmallMatrix};
use crate::mesh::{Mesh, NeighborhoodOp};
use crate::problem::{EvalMode, LocalVars, Problem};
use crate::solvers::{cg_linear_solve, newton_cg_solve, SolverConfig, SolverReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParamInit {
    /// Uniform-weight Tutte embedding with the boundary on the unit circle.
    Tutte,
    /// Drop the `z` coordinate.
    PlanarProject,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamConfig {
    pub init: ParamInit,
    pub solver: SolverConfig,
}

impl Default for ParamConfig {
    fn default() -> Self {
        ParamConfig { init: ParamInit::Tutte, solver: SolverConfig { max_iters: 50, ..SolverConfig::default() } }
    }
}

/// Rest shape of one triangle after isometric flattening.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RestTriangle {
    /// Inverse of `[b_r - a_r, c_r - a_r]`.
    pub inv_rest: [[f64; 2]; 2],
    pub area: f64,
}

/// Flattens every face into a local frame with its first edge along `x`.
pub fn rest_triangles(mesh: &Mesh) -> Result<Vec<RestTriangle>, AppError> {
    let p = mesh.positions();
    mesh.faces()
        .iter()
        .enumerate()
        .map(|(fi, f)| {
            let e1: [f64; 3] = core::array::from_fn(|c| p[f[1]][c] - p[f[0]][c]);
            let e2: [f64; 3] = core::array::from_fn(|c| p[f[2]][c] - p[f[0]][c]);
            let len = crate::real::sqrt(e1.iter().map(|v| v * v).sum());
            let cross = [e1[1] * e2[2] - e1[2] * e2[1], e1[2] * e2[0] - e1[0] * e2[2], e1[0] * e2[1] - e1[1] * e2[0]];
            let twice_area = crate::real::sqrt(cross.iter().map(|v| v * v).sum());
            if !(len > 0.0) || !(twice_area > 1e-300) {
                return Err(AppError::DegenerateFace { face: fi });
            }
            let cx = e1.iter().zip(&e2).map(|(a, b)| a * b).sum::<f64>() / len;
            let cy = twice_area / len;
            // [[len, cx], [0, cy]]^-1
            let inv_rest = [[1.0 / len, -cx / (len * cy)], [0.0, 1.0 / cy]];
            Ok(RestTriangle { inv_rest, area: 0.5 * twice_area })
        })
        .collect()
}

/// Symmetric Dirichlet problem over UV variables (two per vertex), starting
/// at `uv`. The energy is `+inf` on any face with `det J <= 0`.
pub fn param_problem<'m>(mesh: &'m Mesh, uv: &[[f64; 2]]) -> Result<Problem<'m, 2>, AppError> {
    let rest = rest_triangles(mesh)?;
    let mut problem = Problem::<2>::new(mesh, EvalMode::GradientOnly);
    problem.set_x(&super::flatten(uv))?;
    problem.add_term::<6, _>(NeighborhoodOp::FV, move |f, _, l: &LocalVars<'_, 6, 2>| {
        let t = &rest[f.index];
        let a = l.get(0);
        let m = SmallMatrix::from_columns([l.get(1) - a, l.get(2) - a]);
        let j = m.matmul_passive(&SmallMatrix(t.inv_rest));
        let det = j.determinant();
        if !(det.value() > 0.0) {
            return Active::constant(f64::INFINITY);
        }
        // |J^-1|_F = |J|_F / det J for 2x2 matrices
        let fro = j.frobenius_sq();
        (fro + fro / det.sqr()) * t.area
    })?;
    Ok(problem)
}

/// `det J_t` of every face for the map `uv` (vertex-major, two per vertex).
pub fn jacobian_dets(mesh: &Mesh, rest: &[RestTriangle], uv: &[f64]) -> Vec<f64> {
    mesh.faces()
        .iter()
        .zip(rest)
        .map(|(f, t)| {
            let signed = signed_area2(uv, f);
            signed * t.inv_rest[0][0] * t.inv_rest[1][1]
        })
        .collect()
}

/// Twice the signed area of face `f` in the plane.
fn signed_area2(uv: &[f64], f: &[usize; 3]) -> f64 {
    let (a, b, c) = (&uv[2 * f[0]..], &uv[2 * f[1]..], &uv[2 * f[2]..]);
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Faces with non-positive signed area.
pub fn inverted_faces(mesh: &Mesh, uv: &[f64]) -> Vec<usize> {
    mesh.faces().iter().enumerate().filter(|(_, f)| !(signed_area2(uv, f) > 0.0)).map(|(i, _)| i).collect()
}

/// Boundary vertices in order, walking with the interior on the left.
/// Fails unless the boundary is a single loop.
pub fn boundary_loop(mesh: &Mesh) -> Result<Vec<usize>, AppError> {
    let boundary = mesh.boundary_edges();
    if boundary.is_empty() {
        return Err(AppError::NotDisk);
    }
    let mut next = vec![usize::MAX; mesh.vertex_count()];
    for f in mesh.faces() {
        for k in 0..3 {
            let (a, b) = (f[k], f[(k + 1) % 3]);
            let key = if a < b { [a, b] } else { [b, a] };
            if let Ok(e) = mesh.edges().binary_search(&key) {
                if mesh.edge_faces(e).len() == 1 {
                    if next[a] != usize::MAX {
                        return Err(AppError::NotDisk);
                    }
                    next[a] = b;
                }
            }
        }
    }
    let start = mesh.edges()[boundary[0]][0];
    let mut out = vec![start];
    let mut v = next[start];
    while v != start {
        if v == usize::MAX || out.len() > boundary.len() {
            return Err(AppError::NotDisk);
        }
        out.push(v);
        v = next[v];
    }
    if out.len() != boundary.len() {
        return Err(AppError::NotDisk);
    }
    Ok(out)
}

/// Tutte embedding: boundary on the unit circle by arc length, interior
/// vertices at the average of their neighbors.
pub fn tutte_embedding(mesh: &Mesh) -> Result<Vec<[f64; 2]>, AppError> {
    if mesh.euler_characteristic() != 1 {
        return Err(AppError::NotDisk);
    }
    let loop_ = boundary_loop(mesh)?;
    let p = mesh.positions();
    let dist = |a: usize, b: usize| crate::real::sqrt((0..3).map(|c| (p[a][c] - p[b][c]) * (p[a][c] - p[b][c])).sum());
    let lengths: Vec<f64> = (0..loop_.len()).map(|k| dist(loop_[k], loop_[(k + 1) % loop_.len()])).collect();
    let total: f64 = lengths.iter().sum();

    let nv = mesh.vertex_count();
    let mut uv = vec![[0.0; 2]; nv];
    let mut on_boundary = vec![false; nv];
    let mut s = 0.0;
    for (k, &v) in loop_.iter().enumerate() {
        let theta = 2.0 * core::f64::consts::PI * s / total;
        uv[v] = [crate::real::cos(theta), crate::real::sin(theta)];
        on_boundary[v] = true;
        s += lengths[k];
    }

    let interior: Vec<usize> = (0..nv).filter(|&v| !on_boundary[v]).collect();
    if !interior.is_empty() {
        let mut slot = vec![usize::MAX; nv];
        for (i, &v) in interior.iter().enumerate() {
            slot[v] = i;
        }
        let apply = |x: &[f64], out: &mut [f64]| {
            for (i, &v) in interior.iter().enumerate() {
                let nbrs = mesh.vertex_vertices(v);
                let mut acc = nbrs.len() as f64 * x[i];
                for &w in nbrs {
                    if slot[w] != usize::MAX {
                        acc -= x[slot[w]];
                    }
                }
                out[i] = acc;
            }
        };
        for c in 0..2 {
            let rhs: Vec<f64> = interior
                .iter()
                .map(|&v| mesh.vertex_vertices(v).iter().filter(|&&w| on_boundary[w]).map(|&w| uv[w][c]).sum())
                .collect();
            let sol = cg_linear_solve(apply, &rhs, 1e-14, 20 * interior.len() + 100);
            for (i, &v) in interior.iter().enumerate() {
                uv[v][c] = sol.x[i];
            }
        }
    }
    orient_and_check(mesh, uv)
}

/// Drops `z`, mirroring if needed so faces are counter-clockwise.
pub fn planar_projection(mesh: &Mesh) -> Result<Vec<[f64; 2]>, AppError> {
    orient_and_check(mesh, mesh.positions().iter().map(|p| [p[0], p[1]]).collect())
}

fn orient_and_check(mesh: &Mesh, mut uv: Vec<[f64; 2]>) -> Result<Vec<[f64; 2]>, AppError> {
    let flat = super::flatten(&uv);
    let total: f64 = mesh.faces().iter().map(|f| signed_area2(&flat, f)).sum();
    if total < 0.0 {
        uv.iter_mut().for_each(|p| p[1] = -p[1]);
    }
    let faces = inverted_faces(mesh, &super::flatten(&uv));
    if !faces.is_empty() {
        return Err(AppError::InvertedFaces { faces });
    }
    Ok(uv)
}

/// Result of [`parameterize`].
#[derive(Clone, Debug)]
pub struct ParamResult {
    pub uv: Vec<[f64; 2]>,
    pub report: SolverReport,
    /// `4 * sum_t area_t`, the energy of an isometric map.
    pub lower_bound: f64,
}

/// Initializes a flip-free map and minimizes the energy with Newton-CG.
pub fn parameterize(mesh: &Mesh, cfg: &ParamConfig) -> Result<ParamResult, AppError> {
    let uv0 = initial_uv(mesh, cfg.init)?;
    let mut problem = param_problem(mesh, &uv0)?;
    let report = newton_cg_solve(&mut problem, &cfg.solver)?;
    let lower_bound = 4.0 * rest_triangles(mesh)?.iter().map(|t| t.area).sum::<f64>();
    Ok(ParamResult { uv: super::unflatten(problem.x()), report, lower_bound })
}

pub fn initial_uv(mesh: &Mesh, init: ParamInit) -> Result<Vec<[f64; 2]>, AppError> {
    match init {
        ParamInit::Tutte => tutte_embedding(mesh),
        ParamInit::PlanarProject => planar_projection(mesh),
    }
}
