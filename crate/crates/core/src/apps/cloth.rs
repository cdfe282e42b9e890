//! Mass-spring cloth advanced with implicit Euler.
//!
//! Each time step minimizes the incremental potential
//! `E(x) = 1/2 |x - (x_n + h v_n)|^2_M + h^2 P(x)` with Newton's method, where
//! `P` holds one spring per mesh edge and a gravity term per vertex. Pinned
//! vertices are removed from the system.

use alloc::vec::Vec;

use super::{flatten, AppError};
use crate::active::Active;
use crate::mesh::{generate_grid, Mesh, MeshError, NeighborhoodOp};
use crate::problem::{EvalMode, LocalVars, Problem};
use crate::solvers::{newton_solve, LinearSolver, SolverConfig, SolverReport, Termination};

#[derive(Clone, Debug, PartialEq)]
pub struct ClothConfig {
    /// Vertices per side of the square cloth.
    pub grid_n: usize,
    /// Side length of the undeformed cloth.
    pub width: f64,
    pub h: f64,
    pub k: f64,
    pub mass_density: f64,
    pub gravity: [f64; 3],
    pub steps: usize,
    /// Pinned vertex ids; `None` pins the two far corners of the grid.
    pub pinned: Option<Vec<usize>>,
    pub solver: SolverConfig,
    pub linear: LinearSolver,
}

impl Default for ClothConfig {
    fn default() -> Self {
        ClothConfig {
            grid_n: 10,
            width: 1.0,
            h: 0.01,
            k: 1e4,
            mass_density: 1.0,
            gravity: [0.0, -9.8, 0.0],
            steps: 100,
            pinned: None,
            solver: SolverConfig { max_iters: 50, cg_tol: 1e-6, cg_max_iters: 1000, ..SolverConfig::default() },
            linear: LinearSolver::Cg,
        }
    }
}

impl ClothConfig {
    pub fn validate(&self) -> Result<(), AppError> {
        if !(self.h > 0.0 && self.h.is_finite()) {
            return Err(AppError::InvalidConfig("time step must be positive"));
        }
        if !(self.k > 0.0 && self.k.is_finite()) {
            return Err(AppError::InvalidConfig("stiffness must be positive"));
        }
        if !(self.mass_density > 0.0 && self.mass_density.is_finite()) {
            return Err(AppError::InvalidConfig("mass density must be positive"));
        }
        if self.gravity.iter().any(|g| !g.is_finite()) {
            return Err(AppError::InvalidConfig("gravity must be finite"));
        }
        self.solver.validate()?;
        Ok(())
    }
}

/// Square grid of `n x n` vertices spanning `width`, lying in the horizontal
/// `y = 0` plane.
pub fn cloth_mesh(n: usize, width: f64) -> Result<Mesh, MeshError> {
    if n < 2 {
        return Err(MeshError::InvalidArgument("grid needs at least 2 vertices per side"));
    }
    let grid = generate_grid(n, width / (n - 1) as f64)?;
    let positions = grid.positions().iter().map(|p| [p[0], 0.0, p[1]]).collect();
    Mesh::new(positions, grid.faces().to_vec())
}

/// The two corners of the last grid row.
pub fn default_pins(n: usize) -> Vec<usize> {
    alloc::vec![n * (n - 1), n * n - 1]
}

/// Lumped vertex masses: a third of the incident face area times `density`.
pub fn lumped_masses(mesh: &Mesh, density: f64) -> Vec<f64> {
    let mut m = alloc::vec![0.0; mesh.vertex_count()];
    for (f, face) in mesh.faces().iter().enumerate() {
        let share = density * mesh.face_area(f) / 3.0;
        for &v in face {
            m[v] += share;
        }
    }
    m
}

/// Cloth state and the incremental-potential problem it is advanced with.
pub struct ClothSim<'m> {
    problem: Problem<'m, 3>,
    x: Vec<f64>,
    v: Vec<f64>,
    masses: Vec<f64>,
    pinned: Vec<usize>,
    cfg: ClothConfig,
    steps_taken: usize,
}

impl<'m> ClothSim<'m> {
    /// Starts at rest in the mesh's positions with lumped masses.
    pub fn new(mesh: &'m Mesh, cfg: ClothConfig) -> Result<Self, AppError> {
        let masses = lumped_masses(mesh, cfg.mass_density);
        Self::with_masses(mesh, cfg, masses)
    }

    /// Like [`new`](Self::new) with explicit vertex masses, e.g. for
    /// edge-only meshes that have no area.
    pub fn with_masses(mesh: &'m Mesh, cfg: ClothConfig, masses: Vec<f64>) -> Result<Self, AppError> {
        cfg.validate()?;
        let nv = mesh.vertex_count();
        if masses.len() != nv {
            return Err(AppError::LengthMismatch { expected: nv, got: masses.len() });
        }
        if masses.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
            return Err(AppError::InvalidConfig("vertex masses must be positive"));
        }
        let pinned = match &cfg.pinned {
            Some(p) => p.clone(),
            None if nv == cfg.grid_n * cfg.grid_n => default_pins(cfg.grid_n),
            None => Vec::new(),
        };
        if pinned.iter().any(|&p| p >= nv) {
            return Err(AppError::InvalidConfig("pinned vertex out of range"));
        }

        let x = flatten(mesh.positions());
        let rest: Vec<f64> = mesh
            .edges()
            .iter()
            .map(|&[a, b]| {
                let (p, q) = (mesh.positions()[a], mesh.positions()[b]);
                crate::real::sqrt((0..3).map(|c| (p[c] - q[c]) * (p[c] - q[c])).sum())
            })
            .collect();
        if rest.iter().any(|l| !(*l > 0.0)) {
            return Err(AppError::InvalidConfig("edge with zero rest length"));
        }

        let mut problem = Problem::<3>::new(mesh, EvalMode::GradientAndHessian);
        problem.set_x(&x)?;
        let mut attributes = Vec::with_capacity(4 * nv);
        for (i, m) in masses.iter().enumerate() {
            attributes.extend_from_slice(&x[3 * i..3 * i + 3]);
            attributes.push(*m);
        }
        problem.set_vertex_attributes(4, attributes)?;

        problem.add_term::<3, _>(NeighborhoodOp::V, |_, _, l: &LocalVars<'_, 3, 3>| {
            let (p, a) = (l.get(0), l.attribute(0));
            let mut e = Active::constant(0.0);
            for c in 0..3 {
                e += (p[c] - a[c]).sqr();
            }
            e * (0.5 * a[3])
        })?;

        let hk = cfg.h * cfg.h * cfg.k;
        problem.add_term::<6, _>(NeighborhoodOp::EV, move |edge, _, l: &LocalVars<'_, 6, 3>| {
            let l0 = rest[edge.index];
            let strain = (l.get(0) - l.get(1)).squared_norm() / (l0 * l0) - 1.0;
            strain.sqr() * (0.5 * hk * l0 * l0)
        })?;

        let (g, h2) = (cfg.gravity, cfg.h * cfg.h);
        problem.add_term::<3, _>(NeighborhoodOp::V, move |_, _, l: &LocalVars<'_, 3, 3>| {
            let p = l.get(0);
            (p[0] * g[0] + p[1] * g[1] + p[2] * g[2]) * (-h2 * l.attribute(0)[3])
        })?;

        for &p in &pinned {
            problem.fix_vertex(p);
        }
        Ok(ClothSim { problem, v: alloc::vec![0.0; x.len()], x, masses, pinned, cfg, steps_taken: 0 })
    }

    /// Advances one time step and returns the Newton report.
    pub fn step(&mut self) -> Result<SolverReport, AppError> {
        let h = self.cfg.h;
        let attributes = self.problem.attributes_mut();
        for i in 0..self.masses.len() {
            for c in 0..3 {
                attributes.data[4 * i + c] = self.x[3 * i + c] + h * self.v[3 * i + c];
            }
        }
        self.problem.set_x(&self.x)?;
        let report = newton_solve(&mut self.problem, &self.cfg.solver, self.cfg.linear)?;
        let step = self.steps_taken;
        if report.termination == Termination::LineSearchFailed {
            return Err(AppError::StepFailed { step });
        }
        let next = self.problem.x();
        if next.iter().any(|v| !v.is_finite()) {
            return Err(AppError::NonFinite { step });
        }
        for i in 0..next.len() {
            self.v[i] = (next[i] - self.x[i]) / h;
        }
        self.x.copy_from_slice(next);
        self.steps_taken += 1;
        Ok(report)
    }

    /// Runs `cfg.steps` steps, calling `on_step` after each.
    pub fn run(&mut self, mut on_step: impl FnMut(usize, &Self, &SolverReport)) -> Result<(), AppError> {
        for i in 0..self.cfg.steps {
            let report = self.step()?;
            on_step(i, self, &report);
        }
        Ok(())
    }

    pub fn positions(&self) -> &[f64] {
        &self.x
    }

    pub fn velocities(&self) -> &[f64] {
        &self.v
    }

    pub fn set_velocities(&mut self, v: &[f64]) -> Result<(), AppError> {
        if v.len() != self.v.len() {
            return Err(AppError::LengthMismatch { expected: self.v.len(), got: v.len() });
        }
        self.v.copy_from_slice(v);
        for &p in &self.pinned {
            self.v[3 * p..3 * p + 3].fill(0.0);
        }
        Ok(())
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn pinned(&self) -> &[usize] {
        &self.pinned
    }

    pub fn steps_taken(&self) -> usize {
        self.steps_taken
    }

    /// The incremental-potential problem of the current step.
    pub fn problem_mut(&mut self) -> &mut Problem<'m, 3> {
        &mut self.problem
    }
}
