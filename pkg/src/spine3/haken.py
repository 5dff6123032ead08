"""Haken's normal surface equations, their quad projection, and 2-quad-type solutions.

Normal coordinates are laid out as ``[triangles (4n) | quads (3n)]`` and are
exact rationals throughout.
"""
from dataclasses import dataclass
from fractions import Fraction

from . import linalg, nzform
from .angles import _cache, tas_basis
from .errors import DualityViolation, NotInTASperp


@dataclass(frozen=True)
class TwoQuadSolution:
    vector: tuple  # normal coordinates, triangles then quads
    support: tuple  # global quad indices with nonzero coordinate
    target: int

    def quads(self, num_tets):
        return self.vector[4 * num_tets:]


def standard_matrix(tri):
    """One row per arc class (3 per face), one column per normal disk type."""
    ncols = 7 * tri.num_tets
    rows = []
    for a in range(tri.num_arcs):
        row = [0] * ncols
        for col, c in tri.arc_equation(a).items():
            row[col] = c
        rows.append(row)
    return rows


def quad_matrix(tri):
    """Rows W(e, .) of the quad-space edge equations."""
    return [list(r) for r in nzform.build_forms(tri).W]


def matching_systems(tri):
    return {"standard_matrix": standard_matrix(tri), "quad_matrix": quad_matrix(tri)}


def vertex_link_vectors(tri):
    """Normal vectors of the vertex-linking surfaces (triangles only)."""
    out = []
    for slots in tri.vertex_slots:
        v = [Fraction(0)] * (7 * tri.num_tets)
        for t, k in slots:
            v[4 * t + k] += 1
        out.append(v)
    return out


def matching_residual(tri, y):
    """Residual of every arc equation at normal vector ``y`` (exact when ``y`` is)."""
    return [sum(c * y[col] for col, c in tri.arc_equation(a).items()) for a in range(tri.num_arcs)]


def solves_matching(tri, y):
    return all(r == 0 for r in matching_residual(tri, y))


@dataclass
class SolutionBases:
    sns_basis: list
    tas_basis: list
    tas_perp_basis: list
    projected: list  # quad parts of sns_basis
    duality_report: dict


def solution_bases(tri):
    cache = _cache(tri)
    if "bases" in cache:
        return cache["bases"]
    n = tri.num_tets
    nq = 3 * n
    sns = linalg.nullspace(standard_matrix(tri), 7 * n)
    proj = [v[4 * n:] for v in sns]
    tas = tas_basis(tri).basis
    perp = linalg.orthogonal_complement(tas, nq)

    rank_proj = linalg.rank(proj, nq) if proj else 0
    orth_bad = [
        [i, j] for i, p in enumerate(proj) for j, u in enumerate(tas) if linalg.dot(p, u) != 0
    ]
    rank_joint = linalg.rank(proj + perp, nq) if proj + perp else 0
    report = {
        "dim_sns": len(sns),
        "dim_proj": rank_proj,
        "dim_tas": len(tas),
        "dim_tas_perp": len(perp),
        # Proj(S) is inside TAS-perp ...
        "proj_orthogonal_to_tas": not orth_bad,
        # ... and TAS-perp is inside Proj(S)
        "tas_perp_in_proj": rank_joint == rank_proj,
        "dimension_sum": rank_proj + len(tas) == nq,
    }
    report["ok"] = all(
        report[k] for k in ("proj_orthogonal_to_tas", "tas_perp_in_proj", "dimension_sum")
    )
    if not report["ok"]:
        raise DualityViolation("quad projection of normal solutions differs from TAS-perp", orth_bad or [report])
    out = SolutionBases(sns, tas, perp, proj, report)
    cache["bases"] = out
    return out


def in_tas_perp(tri, v):
    return all(linalg.dot(v, u) == 0 for u in tas_basis(tri).basis)


def lift_quad_to_full(tri, v):
    """Normal vector with quad part ``v`` solving the matching equations.

    Triangle coordinates are the particular solution with every free
    variable of the reduced echelon form set to zero.
    """
    n = tri.num_tets
    v = [Fraction(x) for x in v]
    if len(v) != 3 * n:
        raise ValueError(f"expected {3 * n} quad coordinates, got {len(v)}")
    if not in_tas_perp(tri, v):
        raise NotInTASperp("quad vector is not orthogonal to the tangential angle structures")
    M = standard_matrix(tri)
    tri_part = [row[: 4 * n] for row in M]
    rhs = [-sum(c * x for c, x in zip(row[4 * n:], v)) for row in M]
    t = linalg.solve(tri_part, rhs, 4 * n)
    if t is None:
        # unreachable when the duality holds
        raise DualityViolation("no triangle coordinates complete a TAS-perp quad vector", [v])
    return t + v


def _tas_columns(tri):
    basis = tas_basis(tri).basis
    return [[u[q] for u in basis] for q in range(tri.num_quads)]


def two_quad_search(tri, q_target):
    """All supports {q_target} or {q_target, q1} carried by a solution.

    For each partner the test is whether the TAS coordinate functionals at
    ``q_target`` and ``q1`` are proportional with nonzero ratio (or both
    vanish); the single-quad case asks that the functional at ``q_target``
    vanish. Every hit is lifted to a full normal vector.
    """
    cols = _tas_columns(tri)
    nq = tri.num_quads
    ct = cols[q_target]
    t_zero = all(x == 0 for x in ct)
    out = []
    for q1 in range(nq):
        if q1 == q_target:
            if t_zero:
                v = [Fraction(0)] * nq
                v[q_target] = Fraction(1)
                out.append(_solution(tri, v, q_target))
            continue
        c1 = cols[q1]
        c1_zero = all(x == 0 for x in c1)
        if t_zero and c1_zero:
            lam = Fraction(-1)
        elif t_zero or c1_zero:
            continue
        elif linalg.rank([ct, c1], len(ct)) == 1:
            j = next(i for i, x in enumerate(c1) if x != 0)
            lam = ct[j] / c1[j]
        else:
            continue
        # v = q_target* - lam q1* is orthogonal to TAS
        v = [Fraction(0)] * nq
        v[q_target] = Fraction(1)
        v[q1] = -lam
        out.append(_solution(tri, v, q_target))
    return out


def _solution(tri, v, target):
    y = lift_quad_to_full(tri, v)
    support = tuple(q for q, x in enumerate(v) if x != 0)
    return TwoQuadSolution(tuple(y), support, target)


def cluster_search(tri):
    """Tets whose three quads each carry a 2-quad-type solution."""
    out = []
    for t in range(tri.num_tets):
        sols = []
        for q in tri.tet_quads(t):
            found = two_quad_search(tri, q)
            if not found:
                break
            sols.append(found[0])
        else:
            distinct = len({s.vector for s in sols})
            out.append({"tet": t, "solutions": sols, "distinct": distinct})
    return out


def serialize_vector(v):
    return [linalg.fraction_str(x) for x in v]


def solution_to_dict(tri, s):
    return {
        "target": s.target,
        "support": list(s.support),
        "vector": serialize_vector(s.vector),
    }
