"""Thurston's gluing equations on the quads of a triangulation.

A shape assignment is a complex numpy vector indexed by global quad number.
Per tet, going round the cyclic order q -> q' we expect z(q') = 1/(1 - z(q)).
"""
import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import nzform
from .errors import DegenerateShape, NotDegenerating, PreconditionError
from .lobachevsky import lobachevsky

PASS_TOL = 1e-8
DEGEN_TOL = 1e-12


@dataclass
class ResidualReport:
    mode: str
    tet: list  # one coherence residual per quad
    edge: list
    max_tet: float
    max_edge: float
    passed: bool

    def to_dict(self):
        return {
            "mode": self.mode,
            "tet_residuals": self.tet,
            "edge_residuals": self.edge,
            "max_tet": self.max_tet,
            "max_edge": self.max_edge,
            "pass": self.passed,
        }


def _check_shapes(z):
    z = np.asarray(z, dtype=complex)
    bad = [int(q) for q in np.flatnonzero((np.abs(z) < DEGEN_TOL) | (np.abs(z - 1) < DEGEN_TOL))]
    if bad:
        raise DegenerateShape(f"shape parameters at 0 or 1 on quads {bad}")
    return z


def coherence_residuals(tri, z):
    return [abs(z[tri.quad_successor(q)] * (1 - z[q]) - 1) for q in range(tri.num_quads)]


def edge_products(tri, z):
    out = []
    for row in tri.incidence:
        p = complex(1)
        for q, i in enumerate(row):
            if i:
                p *= z[q] ** i
        out.append(p)
    return out


def residuals(tri, z, mode="strict"):
    if mode not in ("strict", "generalized"):
        raise ValueError(f"unknown mode {mode!r}")
    z = _check_shapes(z)
    tet = [float(r) for r in coherence_residuals(tri, z)]
    edge = []
    for p in edge_products(tri, z):
        r = abs(p - 1)
        if mode == "generalized":
            r = min(r, abs(p + 1))
        edge.append(float(r))
    mt = max(tet, default=0.0)
    me = max(edge, default=0.0)
    return ResidualReport(mode, tet, edge, mt, me, mt < PASS_TOL and me < PASS_TOL)


def shapes_from_params(tri, x):
    """Full shape vector from one complex log-parameter per tet (type-0 quad)."""
    z = np.empty(tri.num_quads, dtype=complex)
    for t in range(tri.num_tets):
        q0 = 3 * t
        q1 = tri.quad_successor(q0)
        q2 = tri.quad_successor(q1)
        w = cmath.exp(x[t])
        z[q0] = w
        z[q1] = 1 / (1 - w)
        z[q2] = (w - 1) / w
    return z


def _jacobian(tri, z):
    J = np.zeros((tri.num_edges, tri.num_tets), dtype=complex)
    for t in range(tri.num_tets):
        q0 = 3 * t
        q1 = tri.quad_successor(q0)
        q2 = tri.quad_successor(q1)
        w = z[q0]
        # d Log z(q) / d Log w for the three shapes of the tet
        der = {q0: 1.0, q1: w / (1 - w), q2: 1 / (w - 1)}
        for e, row in enumerate(tri.incidence):
            J[e, t] = sum(row[q] * d for q, d in der.items())
    return J


def _log_sums(tri, z):
    L = np.log(np.asarray(z, dtype=complex))
    return np.array(tri.incidence, dtype=float) @ L


@dataclass
class NewtonResult:
    z: np.ndarray
    report: ResidualReport
    iterations: int
    converged: bool
    flags: list

    def to_dict(self):
        return {
            "z": [[float(c.real), float(c.imag)] for c in self.z],
            "residuals": self.report.to_dict(),
            "iterations": self.iterations,
            "converged": self.converged,
            "flags": self.flags,
        }


def newton_refine(tri, z0, mode="strict", max_iter=50, tol=1e-14):
    """Damped Newton on the logarithmic edge equations.

    Unknowns are the logs of the type-0 shapes; branch integers are frozen
    from ``z0``. Steps that would raise the largest edge residual are
    halved until they do not, so the residual never goes up.
    """
    z = _check_shapes(z0)
    if max(coherence_residuals(tri, z), default=0.0) > PASS_TOL:
        raise PreconditionError("start shapes are not coherent within each tetrahedron")
    rep = residuals(tri, z, mode)
    if rep.max_edge >= 0.5:
        raise PreconditionError(f"edge residual {rep.max_edge:.3g} is outside the Newton basin")
    period = 2 * math.pi if mode == "strict" else math.pi
    target = 1j * period * np.round(_log_sums(tri, z).imag / period)
    x = np.log(z[[3 * t for t in range(tri.num_tets)]])
    flags = []
    it = 0
    while it < max_iter and rep.max_edge > tol:
        it += 1
        F = _log_sums(tri, z) - target
        J = _jacobian(tri, z)
        step = -np.linalg.pinv(J) @ F
        if not np.all(np.isfinite(step)):
            flags.append("singular_update")
            break
        alpha = 1.0
        accepted = False
        while alpha > 1e-10:
            xn = x + alpha * step
            try:
                zn = _check_shapes(shapes_from_params(tri, xn))
            except (DegenerateShape, ZeroDivisionError):
                alpha *= 0.5
                continue
            rn = residuals(tri, zn, mode)
            if rn.max_edge <= rep.max_edge:
                x, z, rep = xn, zn, rn
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            flags.append("no_progress")
            break
        if alpha < 1.0 and "damped" not in flags:
            flags.append("damped")
    return NewtonResult(z, rep, it, rep.max_edge <= max(tol, 1e-12), flags)


@dataclass
class ShapeVolume:
    volume: float
    in_W: bool
    coherent: bool
    edge_products: list

    def to_dict(self):
        return {
            "volume": self.volume,
            "in_W": self.in_W,
            "coherent": self.coherent,
            "edge_products": [[p.real, p.imag] for p in self.edge_products],
        }


def shape_volume(tri, z):
    """Sum of Lambda(arg z(q)) with principal arguments, plus W(T) membership."""
    z = _check_shapes(z)
    vol = float(np.sum(lobachevsky(np.angle(z))))
    coherent = max(coherence_residuals(tri, z), default=0.0) < PASS_TOL
    prods = edge_products(tri, z)
    positive = all(p.real > 0 and abs(p.imag) <= PASS_TOL * abs(p) for p in prods)
    return ShapeVolume(vol, coherent and positive, coherent, prods)


@dataclass
class DegenerationVector:
    u: np.ndarray
    I_set: list
    a: dict  # q -> a_q for q in I_set
    v: np.ndarray
    edge_residual: float  # sum_q i(e,q) u(q)
    haken_residual: float  # sum_{q in I} v(q) W(e,q)
    log_norms: list

    def to_dict(self):
        return {
            "u": [float(x) for x in self.u],
            "I_set": self.I_set,
            "a": {str(q): float(x) for q, x in self.a.items()},
            "v": [float(x) for x in self.v],
            "edge_residual": self.edge_residual,
            "haken_residual": self.haken_residual,
            "log_norms": self.log_norms,
        }


def degeneration_analysis(tri, sequence):
    """Normalised logarithmic limit of a degenerating sequence of shapes.

    Uses the last entry as the proxy for the limit; ``I_set`` takes in each
    tet the quad with shape closest to 1 and ``a_q = u(succ q)``.
    """
    if len(sequence) < 2:
        raise NotDegenerating("need at least two shape assignments")
    logs = []
    for z in sequence:
        a = np.abs(np.asarray(z, dtype=complex))
        # shapes near 1 are expected here; only zero or infinite ones break the logs
        if not np.all(np.isfinite(a)) or np.any(a == 0):
            raise DegenerateShape("shape parameter 0 or infinite in the sequence")
        logs.append(np.log(a))
    norms = [float(math.sqrt(1 + float(np.dot(L, L)))) for L in logs]
    if any(b <= a for a, b in zip(norms, norms[1:])):
        raise NotDegenerating("log-norms of the sequence are not growing")
    z = np.asarray(sequence[-1], dtype=complex)
    u = logs[-1] / norms[-1]
    inc = np.array(tri.incidence, dtype=float)
    edge_res = float(np.max(np.abs(inc @ u))) if tri.num_edges else 0.0

    I_set = []
    for t in range(tri.num_tets):
        qs = tri.tet_quads(t)
        I_set.append(min(qs, key=lambda q: abs(z[q] - 1)))
    a = {q: float(u[tri.quad_successor(q)]) for q in I_set}
    v = np.zeros(tri.num_quads)
    for q, x in a.items():
        v[q] = x
    W = np.array(nzform.build_forms(tri).W, dtype=float)
    haken_res = float(np.max(np.abs(W @ v))) if tri.num_edges else 0.0
    return DegenerationVector(u, I_set, a, v, edge_res, haken_res, norms)
