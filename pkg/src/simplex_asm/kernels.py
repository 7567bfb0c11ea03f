"""Per-element mathematics for P1 assembly and the Pk mass extension.

Everything here is a pure function of immutable inputs.  The batched
evaluators return one value per mesh element so that assembly drivers can
stay free of per-element loops; the matching single-element evaluators on
the kernel classes reproduce the batched arithmetic term by term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .errors import DegenerateSimplexError, RangeGuardError
from .mesh import Mesh, multi_index_lattice


def barycentric_moment(d: int, vol: float, exponents) -> float:
    """Integral of a barycentric monomial over a d-simplex of volume vol.

    With exponents (n_1, ..., n_{d+1}) the value is
    d! * vol * (prod n_i!) / (d + sum n_i)!.  Factorials are evaluated over
    exact integers, which restricts d + sum(n_i) to at most 20.
    """
    exponents = tuple(int(e) for e in exponents)
    if len(exponents) != d + 1:
        raise ValueError(f"expected {d + 1} exponents, got {len(exponents)}")
    if any(e < 0 for e in exponents):
        raise ValueError(f"exponents must be nonnegative, got {exponents}")
    total = sum(exponents)
    if d + total > 20:
        raise RangeGuardError(
            f"d + sum(exponents) = {d + total} exceeds the exact-factorial range (20)"
        )
    num = math.factorial(d) * math.prod(math.factorial(e) for e in exponents)
    return vol * (num / math.factorial(d + total))


def reference_gradients(d: int) -> np.ndarray:
    """Gradients of the barycentric coordinates on the reference simplex,
    one per column: [-1 | I_d], shape (d, d+1)."""
    return np.hstack([-np.ones((d, 1)), np.eye(d)])


def compute_gradients(mesh: Mesh) -> np.ndarray:
    """Gradients of the local basis functions on every element.

    Returns grads with shape (nme, d+1, d) where grads[k, a, :] is the
    (constant) gradient of the a-th barycentric coordinate on element k,
    obtained by solving B_k^t G_k = [-1 | I_d] element by element.
    """
    d = mesh.d
    edges = mesh.q[:, mesh.me[1:]] - mesh.q[:, mesh.me[0]][:, None, :]
    bmats = np.moveaxis(edges, 2, 0)           # (nme, d, d)
    dets = np.linalg.det(bmats)
    degenerate = np.flatnonzero(dets == 0.0)
    if degenerate.size:
        raise DegenerateSimplexError(int(degenerate[0]))
    rhs = np.broadcast_to(reference_gradients(d), (mesh.nme, d, d + 1))
    solved = np.linalg.solve(bmats.transpose(0, 2, 1), rhs)
    return np.ascontiguousarray(solved.transpose(0, 2, 1))


def mass_kernel(alpha: int, beta: int, mesh: Mesh,
                W: np.ndarray, wsum: np.ndarray) -> np.ndarray:
    """Batched (alpha, beta) entries of the local weighted mass matrix.

    W holds the nodal weight values per element, W[a, k] = w(vertex a of
    element k), and wsum its column sums.  The weight is integrated through
    its nodal interpolant, which is exact for affine weights.
    """
    d = mesh.d
    coef = (2.0 if alpha == beta else 1.0) / ((d + 1) * (d + 2) * (d + 3))
    return coef * mesh.vols * (wsum + W[alpha] + W[beta])


def stiffness_kernel(alpha: int, beta: int, grads: np.ndarray,
                     vols: np.ndarray) -> np.ndarray:
    """Batched (alpha, beta) entries |K| <grad phi_beta, grad phi_alpha>."""
    d = grads.shape[2]
    acc = np.zeros(len(vols))
    for i in range(d):
        acc += grads[:, beta, i] * grads[:, alpha, i]
    return acc * vols


# ---------------------------------------------------------------------------
# Linear elasticity tables


@dataclass(frozen=True, eq=False)
class ElasticTables:
    """Constant matrices that reduce the elastic bilinear form to weighted
    gradient products.

    Bl[l] maps a basis gradient to the Voigt strain of that basis function
    times the l-th coordinate direction.  C0 and C1 split the isotropic
    elasticity matrix as C = lamb*C0 + mu*C1, and Q[n][l] = Bl[n]^t C0 Bl[l],
    S[n][l] = Bl[n]^t C1 Bl[l].
    """

    d: int
    Bl: tuple
    C0: np.ndarray
    C1: np.ndarray
    Q: tuple
    S: tuple


def build_elastic_tables(d: int) -> ElasticTables:
    if d not in (2, 3):
        raise ValueError(f"elastic tables are defined for d in {{2, 3}}, got {d}")
    nv = 3 * (d - 1)  # Voigt length
    shear_pairs = [(0, 1)] if d == 2 else [(0, 1), (1, 2), (0, 2)]

    bls = []
    for l in range(d):
        b = np.zeros((nv, d))
        b[l, l] = 1.0
        for row, (i, j) in enumerate(shear_pairs, start=d):
            if l == i:
                b[row, j] = 1.0
            elif l == j:
                b[row, i] = 1.0
        bls.append(b)

    c0 = np.zeros((nv, nv))
    c0[:d, :d] = 1.0
    c1 = np.eye(nv)
    c1[:d, :d] *= 2.0

    q = tuple(tuple(bls[n].T @ c0 @ bls[l] for l in range(d)) for n in range(d))
    s = tuple(tuple(bls[n].T @ c1 @ bls[l] for l in range(d)) for n in range(d))
    return ElasticTables(d, tuple(bls), c0, c1, q, s)


def dot_mat_vec_g(A: np.ndarray, grads: np.ndarray,
                  alpha: int, beta: int) -> np.ndarray:
    """Batched <grad phi_beta, A grad phi_alpha> for an element-independent
    d-by-d matrix A."""
    d = grads.shape[2]
    acc = np.zeros(grads.shape[0])
    for i in range(d):
        for j in range(d):
            aji = A[j, i]
            if aji != 0.0:
                acc += aji * (grads[:, alpha, i] * grads[:, beta, j])
    return acc


def elastic_kernel(l: int, alpha: int, n: int, beta: int,
                   tables: ElasticTables, grads: np.ndarray,
                   lambs: np.ndarray, mus: np.ndarray) -> np.ndarray:
    """Batched local elastic stiffness entries for component pair (l, n)
    and vertex pair (alpha, beta).

    lambs and mus must hold the element averages of the Lame fields already
    scaled by vols/(d+1), i.e. lambs[k] = vols[k]/(d+1) * sum of lamb at the
    vertices of element k.

    The tables enter as Q[n][l] / S[n][l]: the strain of the row basis
    function (component l) sits on the right of the elasticity matrix, the
    column one (component n) on the left.  With spatially varying Lame
    fields the transposed pairing would assemble a different (wrong)
    matrix; the rigid-mode tests catch that.
    """
    return (lambs * dot_mat_vec_g(tables.Q[n][l], grads, alpha, beta)
            + mus * dot_mat_vec_g(tables.S[n][l], grads, alpha, beta))


# ---------------------------------------------------------------------------
# Pk mass coefficients

_moment_cache: dict[tuple[int, tuple[int, ...]], Fraction] = {}


def _moment_fraction(d: int, exponents: tuple[int, ...]) -> Fraction:
    """(prod n_i!) / (d + sum n_i)! as an exact rational."""
    key = (d, tuple(sorted(exponents)))
    hit = _moment_cache.get(key)
    if hit is None:
        num = math.prod(math.factorial(e) for e in exponents)
        hit = Fraction(num, math.factorial(d + sum(exponents)))
        _moment_cache[key] = hit
    return hit


def _basis_polynomial(alpha: tuple[int, ...], k: int) -> dict:
    """Monomial expansion of the lattice basis function for multi-index
    alpha, as a map from exponent tuples to rational coefficients.

    The basis function is the product over slots l of
    (k*x_l)(k*x_l - 1)...(k*x_l - alpha_l + 1) / alpha_l!  evaluated in the
    barycentric variables, which is 1 at the lattice point alpha/k and 0 at
    every other lattice point.
    """
    d1 = len(alpha)
    poly = {(0,) * d1: Fraction(1)}
    for slot in range(d1):
        for j in range(alpha[slot]):
            lin = Fraction(k, j + 1)
            const = Fraction(-j, j + 1)
            new: dict = {}
            for mu, c in poly.items():
                up = mu[:slot] + (mu[slot] + 1,) + mu[slot + 1:]
                new[up] = new.get(up, Fraction(0)) + c * lin
                if j:
                    new[mu] = new.get(mu, Fraction(0)) + c * const
            poly = new
    return poly


@dataclass(frozen=True, eq=False)
class PkCoeffTable:
    """Element-independent mass coefficients for the order-k lattice basis.

    The local mass matrix of any d-simplex K is d! * |K| * C in the lattice
    ordering given by `lattice` (the index map: local index -> multi-index).
    C is exact-rational arithmetic rounded once to float; the unrounded
    values are kept in `exact`.
    """

    d: int
    k: int
    ndfe: int
    lattice: tuple
    C: np.ndarray
    exact: tuple


def pk_mass_coeffs(d: int, k: int) -> PkCoeffTable:
    """Coefficient table such that the local mass matrix is d!*|K|*C."""
    if not 1 <= d <= 3:
        raise RangeGuardError(f"mass coefficients support 1 <= d <= 3, got d={d}")
    if not 1 <= k <= 6:
        raise RangeGuardError(f"mass coefficients support 1 <= k <= 6, got k={k}")
    lattice = multi_index_lattice(d, k)
    polys = [list(_basis_polynomial(a, k).items()) for a in lattice]
    ndfe = len(lattice)
    exact = [[Fraction(0)] * ndfe for _ in range(ndfe)]
    for a in range(ndfe):
        for b in range(a, ndfe):
            total = Fraction(0)
            for mu, cmu in polys[a]:
                for nu, cnu in polys[b]:
                    merged = tuple(m + v for m, v in zip(mu, nu))
                    total += cmu * cnu * _moment_fraction(d, merged)
            exact[a][b] = exact[b][a] = total
    cfloat = np.array([[float(x) for x in row] for row in exact])
    return PkCoeffTable(d, k, ndfe, tuple(lattice), cfloat,
                        tuple(tuple(row) for row in exact))


# ---------------------------------------------------------------------------
# Kernel objects consumed by the assembly drivers
#
# A scalar kernel exposes `batched(alpha, beta) -> (nme,)`,
# `single(alpha, beta, k) -> float` and a `symmetric` flag; a vector kernel
# additionally carries the system size `m` and takes (l, alpha, n, beta).
# Coefficient functions are evaluated at the mesh nodes once, here, so the
# evaluators are pure array transforms.


def _nodal_values(value, q: np.ndarray) -> np.ndarray:
    """Evaluate a coefficient at all nodes: accepts a constant or a callable
    mapping the (d, nq) coordinate array to nq values."""
    if callable(value):
        out = np.asarray(value(q), dtype=np.float64)
        if out.shape != (q.shape[1],):
            raise ValueError(
                f"coefficient returned shape {out.shape}, expected ({q.shape[1]},)"
            )
        return out
    return np.full(q.shape[1], float(value))


class MassKernel:
    """Weighted mass entries with the weight interpolated at the vertices."""

    symmetric = True

    def __init__(self, mesh: Mesh, weight=1.0):
        self.mesh = mesh
        nodal = _nodal_values(weight, mesh.q)
        self.W = nodal[mesh.me]
        self.wsum = self.W.sum(axis=0)

    def batched(self, alpha: int, beta: int) -> np.ndarray:
        return mass_kernel(alpha, beta, self.mesh, self.W, self.wsum)

    @cached_property
    def _flat(self):
        return self.W.tolist(), self.wsum.tolist(), self.mesh.vols.tolist()

    def single(self, alpha: int, beta: int, k: int) -> float:
        W, wsum, vols = self._flat
        d = self.mesh.d
        coef = (2.0 if alpha == beta else 1.0) / ((d + 1) * (d + 2) * (d + 3))
        return coef * vols[k] * (wsum[k] + W[alpha][k] + W[beta][k])


class StiffnessKernel:
    """Gradient-product entries of the scalar stiffness matrix."""

    symmetric = True

    def __init__(self, mesh: Mesh):
        self.d = mesh.d
        self.vols = mesh.vols
        self.grads = compute_gradients(mesh)

    def batched(self, alpha: int, beta: int) -> np.ndarray:
        return stiffness_kernel(alpha, beta, self.grads, self.vols)

    @cached_property
    def _flat(self):
        return self.grads.tolist(), self.vols.tolist()

    def single(self, alpha: int, beta: int, k: int) -> float:
        grads, vols = self._flat
        ga, gb = grads[k][alpha], grads[k][beta]
        acc = 0.0
        for i in range(self.d):
            acc += gb[i] * ga[i]
        return acc * vols[k]


class ElasticKernel:
    """Isotropic elastic stiffness entries; system size m = d.

    The Lame parameters may vary over the domain; they are interpolated at
    the vertices and averaged per element.
    """

    symmetric = True

    def __init__(self, mesh: Mesh, lamb=1.0, mu=1.0):
        d = mesh.d
        self.d = self.m = d
        self.tables = build_elastic_tables(d)
        self.grads = compute_gradients(mesh)
        lamb_nodal = _nodal_values(lamb, mesh.q)
        mu_nodal = _nodal_values(mu, mesh.q)
        if np.any(lamb_nodal + mu_nodal <= 0.0):
            node = int(np.flatnonzero(lamb_nodal + mu_nodal <= 0.0)[0])
            raise ValueError(
                f"Lame parameters must satisfy lamb + mu > 0; violated at "
                f"node {node}"
            )
        scale = mesh.vols / (d + 1)
        self.lambs = lamb_nodal[mesh.me].sum(axis=0) * scale
        self.mus = mu_nodal[mesh.me].sum(axis=0) * scale

    def batched(self, l: int, alpha: int, n: int, beta: int) -> np.ndarray:
        return elastic_kernel(l, alpha, n, beta, self.tables, self.grads,
                              self.lambs, self.mus)

    @cached_property
    def _flat(self):
        qmats = [[m.tolist() for m in row] for row in self.tables.Q]
        smats = [[m.tolist() for m in row] for row in self.tables.S]
        return (self.grads.tolist(), self.lambs.tolist(), self.mus.tolist(),
                qmats, smats)

    def single(self, l: int, alpha: int, n: int, beta: int, k: int) -> float:
        grads, lambs, mus, qmats, smats = self._flat
        ga, gb = grads[k][alpha], grads[k][beta]
        d = self.d
        acc_q = 0.0
        qmat = qmats[n][l]
        for i in range(d):
            for j in range(d):
                aji = qmat[j][i]
                if aji != 0.0:
                    acc_q += aji * (ga[i] * gb[j])
        acc_s = 0.0
        smat = smats[n][l]
        for i in range(d):
            for j in range(d):
                aji = smat[j][i]
                if aji != 0.0:
                    acc_s += aji * (ga[i] * gb[j])
        return lambs[k] * acc_q + mus[k] * acc_s
