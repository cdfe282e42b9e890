//! Spherical embedding of genus-0 meshes by optimization on the sphere.
//!
//! Each vertex lives at a base point `s_i` on the unit sphere with an
//! orthonormal tangent basis `(b1_i, b2_i)`; the variables are tangent
//! offsets `x_i` and positions are `p_i = R(s_i, x_i) =
//! normalize(s_i + x_i1 b1_i + x_i2 b2_i)`. The energy per face is
//! `-ln det[p_i, p_j, p_k] + |p_i - p_j|^2 + |p_j - p_k|^2 + |p_k - p_i|^2`.
//! After every L-BFGS step the offsets are folded into the base points.

use alloc::vec::Vec;

use super::AppError;
use crate::active::{Active, Vector};
use crate::mesh::{Mesh, NeighborhoodOp};
use crate::problem::{EvalMode, LocalVars, Problem, ProblemError};
use crate::real;
use crate::solvers::{lbfgs_solve, SolverConfig, SolverReport};

/// Attribute layout per vertex: `s`, `b1`, `b2`.
const STRIDE: usize = 9;

#[derive(Clone, Debug, PartialEq)]
pub struct SphereConfig {
    pub solver: SolverConfig,
}

impl Default for SphereConfig {
    fn default() -> Self {
        SphereConfig { solver: SolverConfig { max_iters: 200, ..SolverConfig::default() } }
    }
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn normalize(a: [f64; 3]) -> [f64; 3] {
    let n = real::sqrt(dot(&a, &a));
    [a[0] / n, a[1] / n, a[2] / n]
}

/// `R(s, x)` in plain arithmetic.
pub fn retract(s: &[f64; 3], b1: &[f64; 3], b2: &[f64; 3], x: [f64; 2]) -> [f64; 3] {
    normalize(core::array::from_fn(|c| s[c] + x[0] * b1[c] + x[1] * b2[c]))
}

/// Orthonormal tangent basis at unit `s`. With `previous`, `b1` is that
/// vector projected onto the tangent plane, so bases vary smoothly.
pub fn tangent_basis(s: &[f64; 3], previous: Option<&[f64; 3]>) -> ([f64; 3], [f64; 3]) {
    let project = |a: &[f64; 3]| {
        let d = dot(a, s);
        let t = [a[0] - d * s[0], a[1] - d * s[1], a[2] - d * s[2]];
        let n = real::sqrt(dot(&t, &t));
        (t, n)
    };
    let (t, n) = match previous.map(project) {
        Some((t, n)) if n > 0.5 => (t, n),
        _ => {
            // the axis least aligned with s
            let k = (0..3).min_by(|&i, &j| s[i].abs().total_cmp(&s[j].abs())).unwrap_or(0);
            let mut axis = [0.0; 3];
            axis[k] = 1.0;
            project(&axis)
        }
    };
    let b1 = [t[0] / n, t[1] / n, t[2] / n];
    (b1, cross(s, &b1))
}

/// Per-face `det[p_i, p_j, p_k]`.
pub fn face_determinants(mesh: &Mesh, points: &[[f64; 3]]) -> Vec<f64> {
    mesh.faces().iter().map(|f| dot(&points[f[0]], &cross(&points[f[1]], &points[f[2]]))).collect()
}

/// Centers the mesh at its vertex centroid and projects it onto the unit
/// sphere. Requires a closed genus-0 mesh whose projection has positive
/// face determinants.
pub fn initial_points(mesh: &Mesh) -> Result<Vec<[f64; 3]>, AppError> {
    let euler = mesh.euler_characteristic();
    let boundary_edges = mesh.boundary_edges().len();
    if euler != 2 || boundary_edges != 0 {
        return Err(AppError::NotSphere { euler, boundary_edges });
    }
    let n = mesh.vertex_count() as f64;
    let mut c = [0.0; 3];
    for p in mesh.positions() {
        for k in 0..3 {
            c[k] += p[k] / n;
        }
    }
    let points: Vec<[f64; 3]> =
        mesh.positions().iter().map(|p| normalize([p[0] - c[0], p[1] - c[1], p[2] - c[2]])).collect();
    let faces: Vec<usize> =
        face_determinants(mesh, &points).iter().enumerate().filter(|(_, d)| !(**d > 0.0)).map(|(i, _)| i).collect();
    if !faces.is_empty() {
        return Err(AppError::InvertedFaces { faces });
    }
    Ok(points)
}

/// The tangent-space problem around base points `points`, with `x = 0`.
pub fn sphere_problem<'m>(mesh: &'m Mesh, points: &[[f64; 3]]) -> Result<Problem<'m, 2>, AppError> {
    if points.len() != mesh.vertex_count() {
        return Err(AppError::LengthMismatch { expected: mesh.vertex_count(), got: points.len() });
    }
    let mut attributes = Vec::with_capacity(STRIDE * points.len());
    for s in points {
        let (b1, b2) = tangent_basis(s, None);
        attributes.extend_from_slice(s);
        attributes.extend_from_slice(&b1);
        attributes.extend_from_slice(&b2);
    }
    let mut problem = Problem::<2>::new(mesh, EvalMode::GradientOnly);
    problem.set_vertex_attributes(STRIDE, attributes)?;
    problem.add_term::<6, _>(NeighborhoodOp::FV, |_, _, l: &LocalVars<'_, 6, 2>| {
        let p: [Vector<Active<6>, 3>; 3] = core::array::from_fn(|k| {
            let (a, x) = (l.attribute(k), l.get(k));
            Vector(core::array::from_fn(|c| x[0] * a[3 + c] + x[1] * a[6 + c] + a[c])).normalized()
        });
        let det = p[0].dot(&p[1].cross(&p[2]));
        if !(det.value() > 0.0) {
            return Active::constant(f64::INFINITY);
        }
        -det.ln() + (p[0] - p[1]).squared_norm() + (p[1] - p[2]).squared_norm() + (p[2] - p[0]).squared_norm()
    })?;
    Ok(problem)
}

/// Current sphere positions `R(s_i, x_i)` of a problem from [`sphere_problem`].
pub fn current_points(problem: &Problem<'_, 2>) -> Vec<[f64; 3]> {
    let (x, attrs) = (problem.x(), problem.attributes());
    (0..x.len() / 2)
        .map(|i| {
            let a = attrs.get(i);
            let (s, b1, b2) = (&a[..3], &a[3..6], &a[6..9]);
            retract(&[s[0], s[1], s[2]], &[b1[0], b1[1], b1[2]], &[b2[0], b2[1], b2[2]], [x[2 * i], x[2 * i + 1]])
        })
        .collect()
}

/// Folds the offsets into the base points (`s_i <- R(s_i, x_i)`), resets
/// `x = 0` and transports the tangent bases.
pub fn rebase(problem: &mut Problem<'_, 2>) -> Result<(), ProblemError> {
    let points = current_points(problem);
    let attrs = problem.attributes_mut();
    for (i, s) in points.iter().enumerate() {
        let a = &mut attrs.data[STRIDE * i..STRIDE * (i + 1)];
        let (b1, b2) = tangent_basis(s, Some(&[a[3], a[4], a[5]]));
        a[..3].copy_from_slice(s);
        a[3..6].copy_from_slice(&b1);
        a[6..9].copy_from_slice(&b2);
    }
    problem.x_mut().fill(0.0);
    Ok(())
}

#[derive(Clone, Debug)]
pub struct SphereResult {
    pub points: Vec<[f64; 3]>,
    pub report: SolverReport,
}

/// Projects the mesh onto the sphere and runs L-BFGS with a rebase after
/// every step. `on_step` sees each accepted iterate.
pub fn spherical_parameterize(
    mesh: &Mesh,
    cfg: &SphereConfig,
    mut on_step: impl FnMut(&[[f64; 3]]),
) -> Result<SphereResult, AppError> {
    let points = initial_points(mesh)?;
    let mut problem = sphere_problem(mesh, &points)?;
    let mut hook = |p: &mut Problem<'_, 2>| {
        rebase(p)?;
        on_step(&current_points(p));
        Ok(())
    };
    let report = lbfgs_solve(&mut problem, &cfg.solver, Some(&mut hook))?;
    Ok(SphereResult { points: current_points(&problem), report })
}
