"""Tangential and circle-valued angle structures.

Angles are stored as real arguments ``theta`` (radians, numpy arrays indexed
by global quad number). Exact data (TAS bases, initial points in units of
pi) stay rational.
"""
import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

import numpy as np

from . import linalg
from .errors import InitFailure

SAS_TOL = 1e-9


def _cache(tri):
    c = tri.__dict__.get("_spine3_cache")
    if c is None:
        c = tri.__dict__["_spine3_cache"] = {}
    return c


@dataclass(frozen=True)
class TASBasis:
    basis: list  # rational vectors over quads
    dim: int

    def as_array(self):
        return np.array([[float(x) for x in v] for v in self.basis], dtype=float).reshape(self.dim, -1)


def constraint_matrix(tri):
    """Rows: one per tet (quad sum), then one per edge (weighted incidence sum)."""
    nq = tri.num_quads
    rows = [[int(q // 3 == t) for q in range(nq)] for t in range(tri.num_tets)]
    rows += [list(r) for r in tri.incidence]
    return rows


def constraint_rhs(tri):
    """Right-hand side of the SAS congruences, in units of pi."""
    return [1] * tri.num_tets + [2] * tri.num_edges


def tas_basis(tri):
    cache = _cache(tri)
    if "tas" not in cache:
        basis = linalg.nullspace(constraint_matrix(tri), tri.num_quads)
        cache["tas"] = TASBasis(basis, len(basis))
    return cache["tas"]


def orthonormal_tas(tri):
    """Float matrix whose columns are an orthonormal basis of TAS."""
    cache = _cache(tri)
    if "tas_q" not in cache:
        tb = tas_basis(tri)
        if tb.dim == 0:
            Q = np.zeros((tri.num_quads, 0))
        else:
            Q, _ = np.linalg.qr(tb.as_array().T)
        Q.setflags(write=False)
        cache["tas_q"] = Q
    return cache["tas_q"]


def project_to_tas(tri, g):
    Q = orthonormal_tas(tri)
    return Q @ (Q.T @ np.asarray(g, dtype=float))


def dimension_check(tri):
    expected = tri.euler_characteristic + tri.num_tets
    actual = tas_basis(tri).dim
    return {"expected": expected, "actual": actual, "match": expected == actual}


def _lattice_data(tri):
    cache = _cache(tri)
    if "lattice" not in cache:
        M = constraint_matrix(tri)
        U, D, V = linalg.smith_form(M)
        beta = constraint_rhs(tri)
        Ub = linalg.matvec(U, beta)
        m, n = len(M), tri.num_quads
        diag = [D[i][i] if i < n else 0 for i in range(m)]
        cache["lattice"] = (V, diag, Ub, n)
    return cache["lattice"]


def _lattice_solution(tri, offsets):
    """theta / pi for the lattice solution picked by ``offsets`` (one per nonzero pivot)."""
    V, diag, Ub, n = _lattice_data(tri)
    psi = [Fraction(0)] * n
    it = iter(offsets)
    for i, d in enumerate(diag):
        if d == 0:
            if Ub[i] % 2:
                raise InitFailure(f"parity obstruction in row {i} of the congruence system")
            continue
        psi[i] = Fraction(Ub[i] + 2 * next(it), d)
    return linalg.matvec(V, psi)


def sas_init_exact(tri):
    """A rational vector ``phi`` with ``pi * phi`` an S^1-angle structure.

    Tries the real system first (tet sums pi, edge sums 2pi); falls back to
    the integer lattice relaxation when that system is inconsistent.
    """
    cache = _cache(tri)
    if "phi0" not in cache:
        M = constraint_matrix(tri)
        phi = linalg.solve(M, constraint_rhs(tri), tri.num_quads)
        if phi is None:
            _, diag, _, _ = _lattice_data(tri)
            phi = _lattice_solution(tri, [0] * sum(1 for d in diag if d))
        cache["phi0"] = phi
    return cache["phi0"]


def sas_init(tri):
    phi = sas_init_exact(tri)
    theta = np.array([math.pi * float(x) for x in phi])
    res = sas_residual(tri, theta)
    if res > SAS_TOL:
        raise InitFailure(f"initial point violates the congruences by {res:.3g}")
    return theta


def num_components(tri):
    _, diag, _, _ = _lattice_data(tri)
    n = 1
    for d in diag:
        if d:
            n *= abs(d)
    return n


def _offsets_of(tri, phi):
    """Lattice offsets (mod the pivots) of the component containing ``phi``."""
    V, diag, Ub, n = _lattice_data(tri)
    psi = linalg.matvec(linalg.inverse(V), phi)
    out = []
    for i, d in enumerate(diag):
        if d:
            c = Fraction(d * psi[i] - Ub[i], 2)
            if c.denominator != 1:
                raise InitFailure("point is not on the congruence lattice")
            out.append(int(c) % abs(d))
    return tuple(out)


def sas_components(tri, limit=64):
    """One exact representative ``phi`` (theta / pi) per connected component of SAS.

    Components are the cosets of TAS; they are in bijection with the lattice
    offsets taken modulo the nonzero pivots. The component of ``sas_init``
    comes first; at most ``limit`` are returned.
    """
    _, diag, _, _ = _lattice_data(tri)
    phi0 = sas_init_exact(tri)
    first = _offsets_of(tri, phi0)
    out = [phi0]
    for offsets in product(*[range(abs(d)) for d in diag if d]):
        if len(out) >= limit:
            break
        if offsets != first:
            out.append(_lattice_solution(tri, offsets))
    return out


def congruence_residuals(tri, theta):
    """Distances of tet sums to pi + 2piZ and of edge sums to 2piZ."""
    theta = np.asarray(theta, dtype=float)
    tets = theta.reshape(-1, 3).sum(axis=1) - math.pi
    edges = np.array(tri.incidence, dtype=float) @ theta
    vals = np.concatenate([tets, edges])
    return np.abs(vals - 2 * math.pi * np.round(vals / (2 * math.pi)))


def sas_residual(tri, theta):
    r = congruence_residuals(tri, theta)
    return float(r.max()) if r.size else 0.0


def is_sas(tri, theta, tol=SAS_TOL):
    return sas_residual(tri, theta) < tol
