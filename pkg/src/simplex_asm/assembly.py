"""Global matrix assembly strategies over generic element kernels.

Five strategies build the same matrix with different loop and storage
structure:

* ``base``   - per-element, per-entry accumulation into a dictionary of keys;
* ``optv1``  - per-element fill of full-length triplet arrays, one
  constructor call at the end;
* ``optv2``  - batched kernel fills one triplet row per local index pair,
  one constructor call on the flattened arrays;
* ``optv``   - one short triplet batch per local index pair, accumulated
  into the result matrix as it goes;
* ``optvs``  - like ``optv`` but exploiting symmetry: strict-triangle pairs
  only, one transpose-add, then the diagonal pairs.

The scalar drivers take kernels with ``batched(alpha, beta)`` /
``single(alpha, beta, k)``; the vector drivers take kernels that also carry
the system size ``m`` and evaluate ``(l, alpha, n, beta)``.  Vector degrees
of freedom are interleaved: component l of node i is row m*i + l.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import NonSymmetricKernelError
from .kernels import PkCoeffTable
from .mesh import Mesh, PkMesh
from .sparse import (
    SparseMatrix,
    TripletBatch,
    add,
    empty_matrix,
    sparse_from_triplets,
    transpose,
)


def _from_dok(dok: dict, ndof: int) -> SparseMatrix:
    rows = np.fromiter((ij[0] for ij in dok), dtype=np.int64, count=len(dok))
    cols = np.fromiter((ij[1] for ij in dok), dtype=np.int64, count=len(dok))
    vals = np.fromiter(dok.values(), dtype=np.float64, count=len(dok))
    return sparse_from_triplets(TripletBatch(ndof, ndof, rows, cols, vals))


# ---------------------------------------------------------------------------
# Scalar case


def assemble_base(mesh: Mesh, kernel) -> SparseMatrix:
    """Classical assembly: one entry inserted at a time."""
    dp1 = mesh.d + 1
    conn = mesh.me.T.tolist()
    dok: dict = {}
    get = dok.get
    single = kernel.single
    for k in range(mesh.nme):
        verts = conn[k]
        for alpha in range(dp1):
            i = verts[alpha]
            for beta in range(dp1):
                key = (i, verts[beta])
                dok[key] = get(key, 0.0) + single(alpha, beta, k)
    return _from_dok(dok, mesh.nq)


def assemble_optv1(mesh: Mesh, kernel) -> SparseMatrix:
    """Per-element fill of full-length triplet arrays, single constructor
    call.  Triplets are element-major, column-wise within each local block."""
    dp1 = mesh.d + 1
    conn = mesh.me.T.tolist()
    rows: list = []
    cols: list = []
    vals: list = []
    single = kernel.single
    for k in range(mesh.nme):
        verts = conn[k]
        for beta in range(dp1):
            j = verts[beta]
            for alpha in range(dp1):
                rows.append(verts[alpha])
                cols.append(j)
                vals.append(single(alpha, beta, k))
    return sparse_from_triplets(TripletBatch(mesh.nq, mesh.nq,
                                             np.array(rows, dtype=np.int64),
                                             np.array(cols, dtype=np.int64),
                                             np.array(vals)))


def assemble_optv2(mesh: Mesh, kernel) -> SparseMatrix:
    """Batched row-wise fill of (d+1)^2-by-nme triplet arrays, single
    constructor call."""
    dp1 = mesh.d + 1
    nme = mesh.nme
    vals = np.empty((dp1 * dp1, nme))
    rows = np.empty((dp1 * dp1, nme), dtype=np.int64)
    cols = np.empty((dp1 * dp1, nme), dtype=np.int64)
    l = 0
    for beta in range(dp1):
        for alpha in range(dp1):
            vals[l] = kernel.batched(alpha, beta)
            rows[l] = mesh.me[alpha]
            cols[l] = mesh.me[beta]
            l += 1
    # column-major flattening keeps the triplets element-major
    return sparse_from_triplets(TripletBatch(mesh.nq, mesh.nq,
                                             rows.ravel(order="F"),
                                             cols.ravel(order="F"),
                                             vals.ravel(order="F")))


def assemble_optv(mesh: Mesh, kernel) -> SparseMatrix:
    """One nme-length batch per local index pair, accumulated immediately."""
    nq = mesh.nq
    out = empty_matrix(nq, nq)
    for beta in range(mesh.d + 1):
        for alpha in range(mesh.d + 1):
            batch = TripletBatch(nq, nq, mesh.me[alpha], mesh.me[beta],
                                 kernel.batched(alpha, beta))
            out = add(out, sparse_from_triplets(batch))
    return out


def assemble_optvs(mesh: Mesh, kernel) -> SparseMatrix:
    """Symmetry-exploiting variant of ``optv``: strictly-upper pairs, a
    transpose-add, then the diagonal pairs."""
    if not kernel.symmetric:
        raise NonSymmetricKernelError(
            "the symmetrized driver requires a kernel flagged symmetric"
        )
    nq = mesh.nq
    out = empty_matrix(nq, nq)
    for alpha in range(mesh.d + 1):
        for beta in range(alpha + 1, mesh.d + 1):
            batch = TripletBatch(nq, nq, mesh.me[alpha], mesh.me[beta],
                                 kernel.batched(alpha, beta))
            out = add(out, sparse_from_triplets(batch))
    out = add(out, transpose(out))
    for alpha in range(mesh.d + 1):
        batch = TripletBatch(nq, nq, mesh.me[alpha], mesh.me[alpha],
                             kernel.batched(alpha, alpha))
        out = add(out, sparse_from_triplets(batch))
    return out


# ---------------------------------------------------------------------------
# Vector case (m coupled unknowns per node)


class ScalarAsVectorKernel:
    """Present a scalar kernel as an m = 1 vector kernel."""

    m = 1

    def __init__(self, kernel):
        self._kernel = kernel
        self.symmetric = kernel.symmetric

    def batched(self, l, alpha, n, beta):
        return self._kernel.batched(alpha, beta)

    def single(self, l, alpha, n, beta, k):
        return self._kernel.single(alpha, beta, k)


def assemble_vector_base(mesh: Mesh, kernel) -> SparseMatrix:
    m = kernel.m
    dp1 = mesh.d + 1
    ndof = m * mesh.nq
    conn = mesh.me.T.tolist()
    dok: dict = {}
    get = dok.get
    single = kernel.single
    for k in range(mesh.nme):
        verts = conn[k]
        for l in range(m):
            for n in range(m):
                for alpha in range(dp1):
                    r = m * verts[alpha] + l
                    for beta in range(dp1):
                        key = (r, m * verts[beta] + n)
                        dok[key] = get(key, 0.0) + single(l, alpha, n, beta, k)
    return _from_dok(dok, ndof)


def assemble_vector_optv2(mesh: Mesh, kernel) -> SparseMatrix:
    m = kernel.m
    dp1 = mesh.d + 1
    nme = mesh.nme
    ndof = m * mesh.nq
    npairs = (m * dp1) ** 2
    vals = np.empty((npairs, nme))
    rows = np.empty((npairs, nme), dtype=np.int64)
    cols = np.empty((npairs, nme), dtype=np.int64)
    p = 0
    for l in range(m):
        for n in range(m):
            for beta in range(dp1):
                for alpha in range(dp1):
                    vals[p] = kernel.batched(l, alpha, n, beta)
                    rows[p] = m * mesh.me[alpha] + l
                    cols[p] = m * mesh.me[beta] + n
                    p += 1
    return sparse_from_triplets(TripletBatch(ndof, ndof,
                                             rows.ravel(order="F"),
                                             cols.ravel(order="F"),
                                             vals.ravel(order="F")))


def assemble_vector_optv(mesh: Mesh, kernel) -> SparseMatrix:
    m = kernel.m
    dp1 = mesh.d + 1
    ndof = m * mesh.nq
    out = empty_matrix(ndof, ndof)
    for l in range(m):
        for alpha in range(dp1):
            rows = m * mesh.me[alpha] + l
            for n in range(m):
                for beta in range(dp1):
                    batch = TripletBatch(ndof, ndof, rows,
                                         m * mesh.me[beta] + n,
                                         kernel.batched(l, alpha, n, beta))
                    out = add(out, sparse_from_triplets(batch))
    return out


def assemble_vector_optvs(mesh: Mesh, kernel) -> SparseMatrix:
    """Vector analogue of ``optvs``; the pre-transpose sweep keeps exactly
    the local pairs with row index strictly below the column index."""
    if not kernel.symmetric:
        raise NonSymmetricKernelError(
            "the symmetrized driver requires a kernel flagged symmetric"
        )
    m = kernel.m
    dp1 = mesh.d + 1
    ndof = m * mesh.nq
    out = empty_matrix(ndof, ndof)
    for l in range(m):
        for alpha in range(dp1):
            rows = m * mesh.me[alpha] + l
            ii = m * alpha + l
            for n in range(m):
                for beta in range(dp1):
                    if ii > m * beta + n:
                        batch = TripletBatch(ndof, ndof, rows,
                                             m * mesh.me[beta] + n,
                                             kernel.batched(l, alpha, n, beta))
                        out = add(out, sparse_from_triplets(batch))
    out = add(out, transpose(out))
    for l in range(m):
        for alpha in range(dp1):
            rows = m * mesh.me[alpha] + l
            batch = TripletBatch(ndof, ndof, rows, rows,
                                 kernel.batched(l, alpha, l, alpha))
            out = add(out, sparse_from_triplets(batch))
    return out


# ---------------------------------------------------------------------------
# Pk mass matrix


def assemble_mass_pk(pkmesh: PkMesh, coeffs: PkCoeffTable) -> SparseMatrix:
    """Mass matrix on an order-k node lattice, batched-row strategy.

    Every local entry is the element-independent coefficient d!*C[a, b]
    scaled by the element volume.
    """
    if (pkmesh.d, pkmesh.k) != (coeffs.d, coeffs.k):
        raise ValueError(
            f"coefficient table (d={coeffs.d}, k={coeffs.k}) does not match "
            f"lattice mesh (d={pkmesh.d}, k={pkmesh.k})"
        )
    ndfe = pkmesh.ndfe
    nme = pkmesh.nme
    dfact = float(math.factorial(pkmesh.d))
    vals = np.empty((ndfe * ndfe, nme))
    rows = np.empty((ndfe * ndfe, nme), dtype=np.int64)
    cols = np.empty((ndfe * ndfe, nme), dtype=np.int64)
    l = 0
    for beta in range(ndfe):
        for alpha in range(ndfe):
            vals[l] = dfact * coeffs.C[alpha, beta] * pkmesh.vols
            rows[l] = pkmesh.me[alpha]
            cols[l] = pkmesh.me[beta]
            l += 1
    return sparse_from_triplets(TripletBatch(pkmesh.nq, pkmesh.nq,
                                             rows.ravel(order="F"),
                                             cols.ravel(order="F"),
                                             vals.ravel(order="F")))


SCALAR_DRIVERS = {
    "base": assemble_base,
    "optv1": assemble_optv1,
    "optv2": assemble_optv2,
    "optv": assemble_optv,
    "optvs": assemble_optvs,
}

VECTOR_DRIVERS = {
    "base": assemble_vector_base,
    "optv2": assemble_vector_optv2,
    "optv": assemble_vector_optv,
    "optvs": assemble_vector_optvs,
}
