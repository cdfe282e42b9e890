//! Registration, evaluation and assembly of per-element energy terms.
//!
//! A [`Problem`] owns the optimization state `x` (vertex-major, `N` values per
//! vertex), a list of energy terms, and the global energy, gradient and block
//! sparse Hessian. Each term is a callback over one [`NeighborhoodOp`]; for
//! every element the problem gathers the element's variables, lifts them into
//! [`Active`] scalars, runs the callback and scatters the local gradient and
//! Hessian back by index. The Hessian pattern is fixed from topology by
//! [`Problem::precompute_sparsity`] together with per-element scatter offsets,
//! so assembly performs no searches.
//!
//! Elements are evaluated patch by patch. In [`Accumulation::Atomic`] mode
//! patches scatter straight into shared buffers with atomic adds; in
//! [`Accumulation::Deterministic`] mode each patch stages its local results
//! and the stages are merged in patch order, which makes results bitwise
//! reproducible. Energies are always reduced from per-patch partial sums with
//! a pairwise tree.
//!
//! Energy callbacks must be pure functions of their arguments.

mod accumulate;
mod sparse;
mod term;

pub use sparse::BlockSparseMatrix;
pub use term::{LocalVars, SelectionMap, VertexAttributes};

use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;

use accumulate::{tree_sum, AtomicBuffer};
use term::{EvalInput, Kernel, TypedKernel};

use crate::active::{Active, Order};
use crate::mesh::{ElementHandle, ElementKind, Mesh, MeshError, NeighborhoodOp};
use crate::timer::Stopwatch;

pub type TermId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalMode {
    GradientOnly,
    GradientAndHessian,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Accumulation {
    /// Scatter with atomic adds; summation order depends on scheduling.
    Atomic,
    /// Per-patch staging merged in patch order.
    Deterministic,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProblemError {
    #[error("{op:?} reads {expected:?} elements, not {got:?}")]
    KindMismatch { op: NeighborhoodOp, expected: ElementKind, got: ElementKind },
    #[error("{op:?} with {n} variables per vertex cannot have local size {local}")]
    ArityMismatch { op: NeighborhoodOp, n: usize, local: usize },
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("no energy terms registered")]
    NoTerms,
    #[error("expected a vector of length {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("no Hessian assembled")]
    NoHessian,
}

/// Counters for evaluation passes.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EvalStats {
    /// Gradient/Hessian assembly passes.
    pub evaluations: usize,
    /// Hessian-vector products.
    pub hvp_products: usize,
    /// Energy-only passes.
    pub energy_probes: usize,
    /// Wall time spent in assembly and products.
    pub derivative_ms: f64,
}

struct Term<'a, const N: usize> {
    op: NeighborhoodOp,
    kernel: Box<dyn Kernel<N> + 'a>,
    topology: Option<TermTopology>,
    /// Per element, `slots * slots` block indices into the Hessian values,
    /// `usize::MAX` where a slot vertex is fixed.
    scatter: Vec<usize>,
    scatter_offsets: Vec<usize>,
}

struct TermTopology {
    elements: Vec<ElementHandle>,
    patch_offsets: Vec<usize>,
    neighbors: Vec<ElementHandle>,
    neighbor_offsets: Vec<usize>,
    selection: SelectionMap,
}

#[derive(Clone, Copy)]
enum Pass<'v> {
    Energy,
    Derivatives,
    Hvp(&'v [f64]),
}

pub struct Problem<'a, const N: usize> {
    mesh: &'a Mesh,
    x: Vec<f64>,
    grad: Vec<f64>,
    energy: f64,
    mode: EvalMode,
    accumulation: Accumulation,
    terms: Vec<Term<'a, N>>,
    fixed: Vec<bool>,
    attributes: VertexAttributes,
    hess: Option<BlockSparseMatrix<N>>,
    hess_assembled: bool,
    vector_scratch: AtomicBuffer,
    hess_scratch: AtomicBuffer,
    stats: EvalStats,
    #[cfg(feature = "std")]
    pool: Option<alloc::sync::Arc<rayon::ThreadPool>>,
}

impl<'a, const N: usize> Problem<'a, N> {
    /// A problem with `N` variables per vertex, all zero.
    pub fn new(mesh: &'a Mesh, mode: EvalMode) -> Self {
        let len = N * mesh.vertex_count();
        Problem {
            mesh,
            x: vec![0.0; len],
            grad: vec![0.0; len],
            energy: 0.0,
            mode,
            accumulation: Accumulation::Atomic,
            terms: Vec::new(),
            fixed: vec![false; mesh.vertex_count()],
            attributes: VertexAttributes::default(),
            hess: None,
            hess_assembled: false,
            vector_scratch: AtomicBuffer::default(),
            hess_scratch: AtomicBuffer::default(),
            stats: EvalStats::default(),
            #[cfg(feature = "std")]
            pool: None,
        }
    }

    pub fn mesh(&self) -> &'a Mesh {
        self.mesh
    }

    pub fn mode(&self) -> EvalMode {
        self.mode
    }

    pub fn set_mode(&mut self, mode: EvalMode) {
        self.mode = mode;
    }

    pub fn accumulation(&self) -> Accumulation {
        self.accumulation
    }

    pub fn set_accumulation(&mut self, accumulation: Accumulation) {
        self.accumulation = accumulation;
    }

    /// Runs parallel passes on a dedicated pool of `threads` workers.
    #[cfg(feature = "std")]
    pub fn set_threads(&mut self, threads: usize) -> Result<(), rayon::ThreadPoolBuildError> {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build()?;
        self.pool = Some(alloc::sync::Arc::new(pool));
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn x_mut(&mut self) -> &mut [f64] {
        &mut self.x
    }

    pub fn set_x(&mut self, x: &[f64]) -> Result<(), ProblemError> {
        self.check_len(x.len())?;
        self.x.copy_from_slice(x);
        Ok(())
    }

    /// Gradient from the last [`eval_terms`](Self::eval_terms); zero on fixed vertices.
    pub fn grad(&self) -> &[f64] {
        &self.grad
    }

    /// Energy from the last [`eval_terms`](Self::eval_terms).
    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// The assembled Hessian, if a Hessian pass has run since the pattern was built.
    pub fn hessian(&self) -> Option<&BlockSparseMatrix<N>> {
        if self.hess_assembled {
            self.hess.as_ref()
        } else {
            None
        }
    }

    pub fn stats(&self) -> EvalStats {
        self.stats
    }

    pub fn reset_stats(&mut self) {
        self.stats = EvalStats::default();
    }

    pub fn attributes(&self) -> &VertexAttributes {
        &self.attributes
    }

    pub fn attributes_mut(&mut self) -> &mut VertexAttributes {
        &mut self.attributes
    }

    /// Installs per-vertex passive data, `stride` values per vertex.
    pub fn set_vertex_attributes(&mut self, stride: usize, data: Vec<f64>) -> Result<(), ProblemError> {
        let expected = stride * self.mesh.vertex_count();
        if data.len() != expected {
            return Err(ProblemError::LengthMismatch { expected, got: data.len() });
        }
        self.attributes = VertexAttributes { stride, data };
        Ok(())
    }

    /// Removes a vertex's variables from the system: its gradient entries and
    /// Hessian rows and columns are never assembled.
    pub fn fix_vertex(&mut self, v: usize) {
        if !self.fixed[v] {
            self.fixed[v] = true;
            self.invalidate_pattern();
        }
    }

    pub fn is_fixed(&self, v: usize) -> bool {
        self.fixed[v]
    }

    pub fn fixed(&self) -> &[bool] {
        &self.fixed
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Element selection of a term, once its topology has been built.
    pub fn selection(&self, term: TermId) -> Option<&SelectionMap> {
        self.terms.get(term)?.topology.as_ref().map(|t| &t.selection)
    }

    /// Registers an energy term over the source elements of `op`.
    ///
    /// `K` is the local variable count: `N` times the neighborhood arity for
    /// `FV`/`EV`/`V`, or `N` times the slot budget (center plus one-ring) for
    /// the one-ring ops.
    pub fn add_term<const K: usize, F>(&mut self, op: NeighborhoodOp, f: F) -> Result<TermId, ProblemError>
    where
        F: Fn(ElementHandle, &[ElementHandle], &LocalVars<'_, K, N>) -> Active<K> + Send + Sync + 'a,
    {
        self.add_term_on::<K, F>(op.source(), op, f)
    }

    /// Like [`add_term`](Self::add_term) with an explicit element kind, which
    /// must match the source kind of `op`.
    pub fn add_term_on<const K: usize, F>(
        &mut self,
        kind: ElementKind,
        op: NeighborhoodOp,
        f: F,
    ) -> Result<TermId, ProblemError>
    where
        F: Fn(ElementHandle, &[ElementHandle], &LocalVars<'_, K, N>) -> Active<K> + Send + Sync + 'a,
    {
        if kind != op.source() {
            return Err(ProblemError::KindMismatch { op, expected: op.source(), got: kind });
        }
        let ok = match op.fixed_arity() {
            Some(a) => K == N * a,
            None => N > 0 && K.is_multiple_of(N) && K / N >= 2 && K / N <= self.mesh.valence_cap() + 1,
        };
        if !ok {
            return Err(ProblemError::ArityMismatch { op, n: N, local: K });
        }
        self.terms.push(Term {
            op,
            kernel: Box::new(TypedKernel::<F, K> { f }),
            topology: None,
            scatter: Vec::new(),
            scatter_offsets: Vec::new(),
        });
        self.invalidate_pattern();
        Ok(self.terms.len() - 1)
    }

    fn invalidate_pattern(&mut self) {
        self.hess = None;
        self.hess_assembled = false;
    }

    fn check_len(&self, got: usize) -> Result<(), ProblemError> {
        if got != self.x.len() {
            return Err(ProblemError::LengthMismatch { expected: self.x.len(), got });
        }
        Ok(())
    }

    /// Builds element lists, neighborhoods and selections for new terms.
    fn prepare(&mut self) -> Result<(), ProblemError> {
        if self.terms.is_empty() {
            return Err(ProblemError::NoTerms);
        }
        let mesh = self.mesh;
        for term in self.terms.iter_mut().filter(|t| t.topology.is_none()) {
            let slots = term.kernel.local_size() / N;
            term.topology = Some(build_topology(mesh, term.op, slots)?);
        }
        Ok(())
    }

    /// Fixes the block pattern of the Hessian from the terms' neighborhoods and
    /// caches per-element scatter offsets.
    pub fn precompute_sparsity(&mut self) -> Result<&BlockSparseMatrix<N>, ProblemError> {
        self.prepare()?;
        if self.hess.is_none() {
            let nv = self.mesh.vertex_count();
            let mut rows: Vec<Vec<usize>> = vec![Vec::new(); nv];
            for term in &self.terms {
                let sel = &term.topology.as_ref().expect("prepared").selection;
                for j in 0..sel.len() {
                    let verts = sel.get(j);
                    for &a in verts.iter().filter(|&&a| !self.fixed[a]) {
                        rows[a].extend(verts.iter().copied().filter(|&b| !self.fixed[b]));
                    }
                }
            }
            let pattern = BlockSparseMatrix::<N>::from_rows(rows);

            for term in self.terms.iter_mut() {
                let sel = &term.topology.as_ref().expect("prepared").selection;
                let mut scatter = Vec::new();
                let mut offsets = Vec::with_capacity(sel.len() + 1);
                offsets.push(0);
                for j in 0..sel.len() {
                    let verts = sel.get(j);
                    for &a in verts {
                        for &b in verts {
                            let idx = if self.fixed[a] || self.fixed[b] {
                                usize::MAX
                            } else {
                                pattern.block_index(a, b).expect("pair is in the pattern")
                            };
                            scatter.push(idx);
                        }
                    }
                    offsets.push(scatter.len());
                }
                term.scatter = scatter;
                term.scatter_offsets = offsets;
            }
            self.hess = Some(pattern);
            self.hess_assembled = false;
        }
        Ok(self.hess.as_ref().expect("just built"))
    }

    /// Evaluates every term at the current state, filling energy, gradient and
    /// (in [`EvalMode::GradientAndHessian`]) the Hessian. Previous contents are
    /// cleared first. A non-finite local energy surfaces in the returned total.
    pub fn eval_terms(&mut self) -> Result<f64, ProblemError> {
        self.evaluate(None)
    }

    /// Like [`eval_terms`](Self::eval_terms), but every local Hessian has its
    /// eigenvalues clamped to at least `floor` before it is scattered.
    pub fn eval_terms_projected(&mut self, floor: f64) -> Result<f64, ProblemError> {
        self.evaluate(Some(floor))
    }

    fn evaluate(&mut self, psd_floor: Option<f64>) -> Result<f64, ProblemError> {
        let clock = Stopwatch::start();
        self.prepare()?;
        let with_hessian = self.mode == EvalMode::GradientAndHessian;
        if with_hessian {
            self.precompute_sparsity()?;
        }
        let order = if with_hessian { Order::Hessian } else { Order::Gradient };

        let mut grad = core::mem::take(&mut self.grad);
        let mut hess = if with_hessian { self.hess.take() } else { None };
        let hess_values = hess.as_mut().map(|h| h.values_mut());
        let x = core::mem::take(&mut self.x);
        let attributes = core::mem::take(&mut self.attributes);
        let input = EvalInput { x: &x, attributes: &attributes, order, psd_floor };
        let (engine, vs, hs) = self.scratch();
        let energy = engine.run(vs, hs, &input, Pass::Derivatives, &mut grad, hess_values);
        self.x = x;
        self.attributes = attributes;
        self.grad = grad;
        if with_hessian {
            self.hess = hess;
            self.hess_assembled = true;
        }
        self.energy = energy;
        self.stats.evaluations += 1;
        self.stats.derivative_ms += clock.elapsed_ms();
        Ok(energy)
    }

    /// Total energy at `x_trial` with derivative tracking disabled. Problem
    /// state is left untouched.
    pub fn eval_energy_only(&mut self, x_trial: &[f64]) -> Result<f64, ProblemError> {
        self.check_len(x_trial.len())?;
        self.prepare()?;
        let attributes = core::mem::take(&mut self.attributes);
        let input = EvalInput { x: x_trial, attributes: &attributes, order: Order::Value, psd_floor: None };
        let (engine, vs, hs) = self.scratch();
        let energy = engine.run(vs, hs, &input, Pass::Energy, &mut [], None);
        self.attributes = attributes;
        self.stats.energy_probes += 1;
        Ok(energy)
    }

    /// `sum_j S_j^T H_j S_j v` evaluated at `x` without assembling the Hessian.
    pub fn hvp(&mut self, x: &[f64], v: &[f64]) -> Result<Vec<f64>, ProblemError> {
        let mut out = vec![0.0; self.x.len()];
        self.hvp_into(x, v, None, &mut out)?;
        Ok(out)
    }

    /// Hessian-vector product into `out`, optionally with projected local Hessians.
    pub fn hvp_into(
        &mut self,
        x: &[f64],
        v: &[f64],
        psd_floor: Option<f64>,
        out: &mut [f64],
    ) -> Result<(), ProblemError> {
        self.check_len(x.len())?;
        self.check_len(v.len())?;
        self.check_len(out.len())?;
        let clock = Stopwatch::start();
        self.prepare()?;
        let attributes = core::mem::take(&mut self.attributes);
        let input = EvalInput { x, attributes: &attributes, order: Order::Hessian, psd_floor };
        let (engine, vs, hs) = self.scratch();
        engine.run(vs, hs, &input, Pass::Hvp(v), out, None);
        self.attributes = attributes;
        self.stats.hvp_products += 1;
        self.stats.derivative_ms += clock.elapsed_ms();
        Ok(())
    }

    fn scratch(&mut self) -> (Engine<'_, 'a, N>, &mut AtomicBuffer, &mut AtomicBuffer) {
        let engine = Engine {
            terms: &self.terms,
            fixed: &self.fixed,
            accumulation: self.accumulation,
            #[cfg(feature = "std")]
            pool: self.pool.as_deref(),
        };
        (engine, &mut self.vector_scratch, &mut self.hess_scratch)
    }
}

/// Borrowed view of a problem's terms used to run one pass.
struct Engine<'r, 'a, const N: usize> {
    terms: &'r [Term<'a, N>],
    fixed: &'r [bool],
    accumulation: Accumulation,
    #[cfg(feature = "std")]
    pool: Option<&'r rayon::ThreadPool>,
}

impl<const N: usize> Engine<'_, '_, N> {
    /// One pass over all terms. `vector` receives the gradient or the product
    /// (ignored for energy passes); `hess_values` the Hessian values if given.
    fn run(
        &self,
        vector_scratch: &mut AtomicBuffer,
        hess_scratch: &mut AtomicBuffer,
        input: &EvalInput<'_>,
        pass: Pass<'_>,
        vector: &mut [f64],
        mut hess_values: Option<&mut [f64]>,
    ) -> f64 {
        let atomic = self.accumulation == Accumulation::Atomic;
        let scatter_vector = !matches!(pass, Pass::Energy);
        if atomic {
            if scatter_vector {
                vector_scratch.reset(vector.len());
            }
            if let Some(h) = hess_values.as_deref() {
                hess_scratch.reset(h.len());
            }
        } else {
            vector.iter_mut().for_each(|g| *g = 0.0);
            if let Some(h) = hess_values.as_deref_mut() {
                h.iter_mut().for_each(|v| *v = 0.0);
            }
        }
        let with_hess = hess_values.is_some();

        let mut energy = 0.0;
        for term in self.terms {
            let ctx = PatchContext {
                term,
                input,
                pass,
                fixed: self.fixed,
                with_hess,
                atomic,
                vector: vector_scratch,
                hess: hess_scratch,
            };
            let topo = term.topology.as_ref().expect("prepared");
            let patches = topo.patch_offsets.len() - 1;
            let results = self.map_patches(patches, |p| ctx.run_patch(p));

            let partials: Vec<f64> = results.iter().map(|r| r.0).collect();
            energy += tree_sum(&partials);

            if !atomic && scatter_vector {
                let k = term.kernel.local_size();
                merge_staged::<N>(term, k, &results, pass, self.fixed, vector, hess_values.as_deref_mut());
            }
        }

        if atomic {
            if scatter_vector {
                vector_scratch.copy_to(vector);
            }
            if let Some(h) = hess_values {
                hess_scratch.copy_to(h);
            }
        }
        energy
    }

    fn map_patches<T: Send>(&self, count: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
        #[cfg(feature = "std")]
        {
            use rayon::prelude::*;
            let run = || (0..count).into_par_iter().map(&f).collect::<Vec<T>>();
            match self.pool {
                Some(pool) => pool.install(run),
                None => run(),
            }
        }
        #[cfg(not(feature = "std"))]
        {
            (0..count).map(f).collect()
        }
    }
}

fn build_topology(mesh: &Mesh, op: NeighborhoodOp, slots: usize) -> Result<TermTopology, ProblemError> {
    let kind = op.source();
    let count = mesh.element_count(kind);
    let make = |i: usize| ElementHandle { kind, index: i };

    // counting sort by patch keeps ascending ids within a patch
    let patch_count = mesh.patches().patch_count.max(1);
    let mut patch_offsets = vec![0usize; patch_count + 1];
    let patch_of: Vec<usize> = (0..count).map(|i| mesh.patch_of(make(i))).collect();
    for &p in &patch_of {
        patch_offsets[p + 1] += 1;
    }
    for p in 0..patch_count {
        patch_offsets[p + 1] += patch_offsets[p];
    }
    let mut cursor = patch_offsets.clone();
    let mut elements = vec![make(0); count];
    for (i, &p) in patch_of.iter().enumerate() {
        elements[cursor[p]] = make(i);
        cursor[p] += 1;
    }

    let mut neighbors = Vec::new();
    let mut neighbor_offsets = vec![0];
    let mut selection = SelectionMap::new();
    for &h in &elements {
        neighbors.extend(mesh.query(op, h)?);
        neighbor_offsets.push(neighbors.len());
        let verts = mesh.selection(op, h)?;
        if verts.len() > slots {
            return Err(MeshError::ValenceExceeded { vertex: h.index, count: verts.len() - 1, cap: slots - 1 }.into());
        }
        selection.push(&verts);
    }
    Ok(TermTopology { elements, patch_offsets, neighbors, neighbor_offsets, selection })
}

/// Everything a worker needs to evaluate one patch of one term.
struct PatchContext<'p, 'a, const N: usize> {
    term: &'p Term<'a, N>,
    input: &'p EvalInput<'p>,
    pass: Pass<'p>,
    fixed: &'p [bool],
    with_hess: bool,
    atomic: bool,
    vector: &'p AtomicBuffer,
    hess: &'p AtomicBuffer,
}

impl<const N: usize> PatchContext<'_, '_, N> {
    /// Returns the patch's partial energy and, in deterministic mode, its
    /// staged local results.
    fn run_patch(&self, p: usize) -> (f64, Vec<f64>) {
        let term = self.term;
        let topo = term.topology.as_ref().expect("prepared");
        let k = term.kernel.local_size();
        let mut g = vec![0.0; k];
        let mut h = vec![0.0; if self.input.order == Order::Hessian { k * k } else { 0 }];
        let mut y = vec![0.0; k];
        let mut local_v = vec![0.0; k];
        let mut staged = Vec::new();
        let mut partial = 0.0;

        for j in topo.patch_offsets[p]..topo.patch_offsets[p + 1] {
            let verts = topo.selection.get(j);
            let neighbors = &topo.neighbors[topo.neighbor_offsets[j]..topo.neighbor_offsets[j + 1]];
            partial += term.kernel.evaluate(topo.elements[j], neighbors, verts, self.input, &mut g, &mut h);

            match self.pass {
                Pass::Energy => {}
                Pass::Derivatives => {
                    if self.atomic {
                        scatter_vector::<N>(verts, self.fixed, &g, |i, v| self.vector.add(i, v));
                        if self.with_hess {
                            scatter_hessian::<N>(term, j, k, verts.len(), &h, |i, v| self.hess.add(i, v));
                        }
                    } else {
                        staged.extend_from_slice(&g);
                        if self.with_hess {
                            staged.extend_from_slice(&h);
                        }
                    }
                }
                Pass::Hvp(v) => {
                    local_v.iter_mut().for_each(|e| *e = 0.0);
                    for (slot, &vert) in verts.iter().enumerate() {
                        if !self.fixed[vert] {
                            local_v[slot * N..(slot + 1) * N].copy_from_slice(&v[vert * N..(vert + 1) * N]);
                        }
                    }
                    for r in 0..k {
                        y[r] = (0..k).map(|c| h[r * k + c] * local_v[c]).sum();
                    }
                    if self.atomic {
                        scatter_vector::<N>(verts, self.fixed, &y, |i, v| self.vector.add(i, v));
                    } else {
                        staged.extend_from_slice(&y);
                    }
                }
            }
        }
        (partial, staged)
    }
}

#[inline]
fn scatter_vector<const N: usize>(verts: &[usize], fixed: &[bool], local: &[f64], mut add: impl FnMut(usize, f64)) {
    for (slot, &v) in verts.iter().enumerate() {
        if fixed[v] {
            continue;
        }
        for c in 0..N {
            add(v * N + c, local[slot * N + c]);
        }
    }
}

#[inline]
fn scatter_hessian<const N: usize>(
    term: &Term<'_, N>,
    j: usize,
    k: usize,
    slots: usize,
    h: &[f64],
    mut add: impl FnMut(usize, f64),
) {
    let blocks = &term.scatter[term.scatter_offsets[j]..term.scatter_offsets[j + 1]];
    for a in 0..slots {
        for b in 0..slots {
            let blk = blocks[a * slots + b];
            if blk == usize::MAX {
                continue;
            }
            for r in 0..N {
                for c in 0..N {
                    add(blk * N * N + r * N + c, h[(a * N + r) * k + b * N + c]);
                }
            }
        }
    }
}

/// Replays staged per-element results in patch order.
fn merge_staged<const N: usize>(
    term: &Term<'_, N>,
    k: usize,
    results: &[(f64, Vec<f64>)],
    pass: Pass<'_>,
    fixed: &[bool],
    vector: &mut [f64],
    mut hess: Option<&mut [f64]>,
) {
    let topo = term.topology.as_ref().expect("prepared");
    let with_hess = hess.is_some() && matches!(pass, Pass::Derivatives);
    let stride = if with_hess { k + k * k } else { k };
    for (p, (_, staged)) in results.iter().enumerate() {
        for (local, j) in (topo.patch_offsets[p]..topo.patch_offsets[p + 1]).enumerate() {
            let verts = topo.selection.get(j);
            let chunk = &staged[local * stride..(local + 1) * stride];
            scatter_vector::<N>(verts, fixed, &chunk[..k], |i, v| vector[i] += v);
            if with_hess {
                let h = hess.as_deref_mut().expect("checked");
                scatter_hessian::<N>(term, j, k, verts.len(), &chunk[k..], |i, v| h[i] += v);
            }
        }
    }
}
