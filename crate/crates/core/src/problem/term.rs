//! Energy terms: user callbacks erased over their local arity.

use alloc::vec::Vec;

use crate::active::{project_psd, Active, Order, Vector};
use crate::mesh::ElementHandle;

/// Per-vertex passive data readable from energy callbacks (rest data, bases,
/// targets). `stride` values per vertex.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VertexAttributes {
    pub stride: usize,
    pub data: Vec<f64>,
}

impl VertexAttributes {
    #[inline]
    pub fn get(&self, vertex: usize) -> &[f64] {
        &self.data[vertex * self.stride..(vertex + 1) * self.stride]
    }
}

/// For every element of a term, the global vertices whose variables form the
/// element's local vector. Local slot `p` maps to global entries
/// `N * vertices[p] .. N * vertices[p] + N`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SelectionMap {
    offsets: Vec<usize>,
    vertices: Vec<usize>,
}

impl SelectionMap {
    pub(crate) fn new() -> Self {
        SelectionMap { offsets: alloc::vec![0], vertices: Vec::new() }
    }

    pub(crate) fn push(&mut self, vertices: &[usize]) {
        self.vertices.extend_from_slice(vertices);
        self.offsets.push(self.vertices.len());
    }

    /// Vertices of the `j`-th element (in evaluation order).
    #[inline]
    pub fn get(&self, j: usize) -> &[usize] {
        &self.vertices[self.offsets[j]..self.offsets[j + 1]]
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Lifted local variables handed to an energy callback.
///
/// Slot order follows the element's neighborhood: the queried vertices for
/// `FV`/`EV`/`V`, or the center vertex first for the one-ring ops.
pub struct LocalVars<'a, const K: usize, const N: usize> {
    vars: &'a [Active<K>; K],
    vertices: &'a [usize],
    attributes: &'a VertexAttributes,
}

impl<'a, const K: usize, const N: usize> LocalVars<'a, K, N> {
    /// Number of vertex slots in use.
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn vertex_id(&self, slot: usize) -> usize {
        self.vertices[slot]
    }

    pub fn slot_of(&self, vertex: usize) -> Option<usize> {
        self.vertices.iter().position(|&v| v == vertex)
    }

    /// The `N` active variables of a slot.
    #[inline]
    pub fn get(&self, slot: usize) -> Vector<Active<K>, N> {
        Vector(core::array::from_fn(|c| self.vars[slot * N + c]))
    }

    /// Current values of a slot without derivative tracking.
    pub fn value(&self, slot: usize) -> [f64; N] {
        core::array::from_fn(|c| self.vars[slot * N + c].value())
    }

    pub fn attribute(&self, slot: usize) -> &'a [f64] {
        self.attributes.get(self.vertices[slot])
    }
}

/// Inputs shared by every element evaluation of one pass.
pub(crate) struct EvalInput<'a> {
    pub x: &'a [f64],
    pub attributes: &'a VertexAttributes,
    pub order: Order,
    pub psd_floor: Option<f64>,
}

/// A term's callback with its arity erased. Writes the local gradient
/// (`K` values) and row-major local Hessian (`K * K`) into the given buffers
/// according to `input.order` and returns the local energy.
pub(crate) trait Kernel<const N: usize>: Send + Sync {
    fn local_size(&self) -> usize;

    fn evaluate(
        &self,
        element: ElementHandle,
        neighbors: &[ElementHandle],
        vertices: &[usize],
        input: &EvalInput<'_>,
        grad: &mut [f64],
        hess: &mut [f64],
    ) -> f64;
}

pub(crate) struct TypedKernel<F, const K: usize> {
    pub f: F,
}

impl<F, const K: usize, const N: usize> Kernel<N> for TypedKernel<F, K>
where
    F: Fn(ElementHandle, &[ElementHandle], &LocalVars<'_, K, N>) -> Active<K> + Send + Sync,
{
    fn local_size(&self) -> usize {
        K
    }

    fn evaluate(
        &self,
        element: ElementHandle,
        neighbors: &[ElementHandle],
        vertices: &[usize],
        input: &EvalInput<'_>,
        grad: &mut [f64],
        hess: &mut [f64],
    ) -> f64 {
        let used = vertices.len() * N;
        let vars: [Active<K>; K] = core::array::from_fn(|i| {
            if i < used {
                let (slot, c) = (i / N, i % N);
                Active::variable(input.x[vertices[slot] * N + c], i, input.order)
            } else {
                Active::constant(0.0)
            }
        });
        let local = LocalVars::<K, N> { vars: &vars, vertices, attributes: input.attributes };
        let e = (self.f)(element, neighbors, &local);

        if input.order >= Order::Gradient {
            grad[..K].copy_from_slice(e.grad());
        }
        if input.order == Order::Hessian {
            let h = e.hess();
            let h = match input.psd_floor {
                Some(floor) => project_psd(h, floor),
                None => *h,
            };
            for i in 0..K {
                for j in i..K {
                    let s = 0.5 * (h[i][j] + h[j][i]);
                    hess[i * K + j] = s;
                    hess[j * K + i] = s;
                }
            }
        }
        e.value()
    }
}
