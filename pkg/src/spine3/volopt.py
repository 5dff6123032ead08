"""Volume on S^1-angle structures: evaluation, maximisation, classification,
extraction of shapes or normal solutions, and the flattening path.

A point is a real vector ``theta`` of quad arguments; only ``theta`` mod
``2 pi`` (and, for the volume, mod ``pi``) matters.
"""
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.linalg import null_space

from . import angles, haken, linalg, nzform
from .errors import ClaimViolation, InconsistentReport, NotApplicable, PreconditionError
from .lobachevsky import lobachevsky

EPS_FLAT = 1e-7
SNAP_EPS = 1e-5
DD_TOL = 1e-6
LOG_GUARD = 1e-300


@dataclass
class MaximizeConfig:
    restarts: int = 20
    seed: int = 0
    tol: float = 1e-9
    max_iter: int = 5000
    step0: float = 1.0
    step_floor: float = 1e-14
    eps_flat: float = EPS_FLAT
    snap_eps: float = SNAP_EPS
    threads: int = None


@dataclass
class VolumeReport:
    point: np.ndarray
    volume: float
    grad_norm_in_TAS: float
    flat_quads: list
    flat_tets: list
    partially_flat_tets: list  # partially flat but not flat
    classification: str
    restart: int = 0
    iterations: int = 0
    productive_steps: int = 0
    max_iterations: bool = False
    near_singular: bool = False
    start_volume: float = None
    trace: list = field(default_factory=list, repr=False)

    def to_dict(self):
        return {
            "point": [float(x) for x in self.point],
            "volume": self.volume,
            "grad_norm_in_TAS": self.grad_norm_in_TAS,
            "flat_quads": list(self.flat_quads),
            "flat_tets": list(self.flat_tets),
            "partially_flat_tets": list(self.partially_flat_tets),
            "classification": self.classification,
            "restart": self.restart,
            "iterations": self.iterations,
            "productive_steps": self.productive_steps,
            "max_iterations": self.max_iterations,
            "near_singular": self.near_singular,
        }


def dist_to_pi_z(theta):
    theta = np.asarray(theta, dtype=float)
    return np.abs(theta - math.pi * np.round(theta / math.pi))


def flat_quads(theta, eps=EPS_FLAT):
    return [int(q) for q in np.flatnonzero(dist_to_pi_z(theta) < eps)]


def flat_structure(tri, theta, eps=EPS_FLAT):
    """(flat quads, flat tets, partially-flat-but-not-flat tets)."""
    fq = flat_quads(theta, eps)
    per_tet = [0] * tri.num_tets
    for q in fq:
        per_tet[q // 3] += 1
    flat = [t for t, c in enumerate(per_tet) if c == 3]
    partial = [t for t, c in enumerate(per_tet) if 0 < c < 3]
    return fq, flat, partial


def volume(tri, theta):
    return float(np.sum(lobachevsky(np.asarray(theta, dtype=float))))


def gradient(theta):
    """Smooth-part gradient -ln|2 sin theta| and a flag for guarded entries."""
    s = np.abs(2 * np.sin(np.asarray(theta, dtype=float)))
    near = bool(np.any(s < 2 * LOG_GUARD))
    return -np.log(np.maximum(s, 2 * LOG_GUARD)), near


def directional_derivative(tri, theta, u, flats=None, eps=EPS_FLAT):
    """One-sided derivative of t -> vol(theta + t u) at t = 0+.

    Returns +inf or -inf when the logarithmic terms at flat quads do not
    cancel, and the finite limit otherwise.
    """
    theta = np.asarray(theta, dtype=float)
    u = np.asarray(u, dtype=float)
    if flats is None:
        flats = flat_quads(theta, eps)
    mask = np.zeros(len(theta), dtype=bool)
    mask[list(flats)] = True
    s = float(u[mask].sum())
    if abs(s) > 1e-12:
        # leading term is -s ln t with t -> 0+
        return math.inf if s > 0 else -math.inf
    uf = u[mask]
    nz = uf != 0
    finite = -float(np.sum(uf[nz] * np.log(np.abs(uf[nz]))))
    g, _ = gradient(theta[~mask])
    return finite + float(np.dot(g, u[~mask]))


def volume_and_grad(tri, theta):
    theta = np.asarray(theta, dtype=float)
    g, near = gradient(theta)
    fq = flat_quads(theta)
    return {
        "vol": volume(tri, theta),
        "grad": g,
        "near_singular": near,
        "flat_quads": fq,
        "directional": lambda u: directional_derivative(tri, theta, u, fq),
    }


def _face_basis(Q, S):
    """Orthonormal basis of {u in TAS : u(q) = 0 for q in S}, as quad vectors."""
    if not S:
        return Q
    if Q.shape[1] == 0:
        return Q
    N = null_space(Q[sorted(S), :])
    return Q @ N


def _face_gradient(theta, B, S):
    keep = np.ones(len(theta), dtype=bool)
    keep[sorted(S)] = False
    g, near = gradient(np.where(keep, theta, math.pi / 2))
    g[~keep] = 0.0
    return B @ (B.T @ g), near


def _snap(tri, theta, Q, S, vol):
    """Move exactly onto the flats ``S`` along TAS, if that does not lose volume."""
    idx = sorted(S)
    target = math.pi * np.round(theta[idx] / math.pi)
    A = Q[idx, :]
    y, *_ = np.linalg.lstsq(A, target - theta[idx], rcond=None)
    new = theta + Q @ y
    if np.max(np.abs(new[idx] - target)) > 1e-12:
        return None
    new[idx] = target
    vn = volume(tri, new)
    if vn < vol - 1e-14:
        return None
    return new, vn


def _newton(tri, theta, B, S, vol, gn):
    """One Newton step for the volume restricted to the current face."""
    if B.shape[1] == 0:
        return None
    g, _ = gradient(theta)
    with np.errstate(divide="ignore", invalid="ignore"):
        h = -1.0 / np.tan(theta)
    if S:
        g[sorted(S)] = 0.0
        h[sorted(S)] = 0.0
    if not np.all(np.isfinite(h)):
        return None
    H = B.T @ (h[:, None] * B)
    try:
        step = np.linalg.solve(H, -(B.T @ g))
    except np.linalg.LinAlgError:
        return None
    new = theta + B @ step
    vn = volume(tri, new)
    if vn < vol - 1e-14:
        return None
    d, _ = _face_gradient(new, B, S)
    if np.linalg.norm(d) >= gn:
        return None
    return new, vn


def _escape(tri, theta, S, vol, basis, cfg):
    """Try to leave a stationary point along a +/- TAS basis direction with positive slope."""
    for u in basis:
        for sgn in (1.0, -1.0):
            d = sgn * u
            dd = directional_derivative(tri, theta, d, S)
            if not dd > DD_TOL:
                continue
            s = cfg.step0
            while s >= cfg.step_floor:
                new = theta + s * d
                vn = volume(tri, new)
                if vn > vol:
                    return new, vn
                s *= 0.5
    return None


def _ascend(tri, theta, cfg, restart=0):
    Q = angles.orthonormal_tas(tri)
    basis = angles.tas_basis(tri).as_array()
    theta = np.array(theta, dtype=float)
    vol = volume(tri, theta)
    start_vol = vol
    trace = [vol]
    productive = 0
    it = 0
    hit_max = False
    while True:
        if it >= cfg.max_iter:
            hit_max = True
            break
        it += 1
        S = set(flat_quads(theta, cfg.eps_flat))
        B = _face_basis(Q, S)
        d, _ = _face_gradient(theta, B, S)
        gn = float(np.linalg.norm(d))
        moved = False
        if gn >= cfg.tol:
            if gn < 1e-3:
                res = _newton(tri, theta, B, S, vol, gn)
                if res is not None:
                    theta, vol = res
                    moved = True
            if not moved:
                s = cfg.step0
                while s >= cfg.step_floor:
                    new = theta + s * d
                    vn = volume(tri, new)
                    if vn >= vol + 1e-4 * s * gn * gn:
                        theta, vol = new, vn
                        moved = True
                        break
                    s *= 0.5
        if not moved and S:
            res = _escape(tri, theta, S, vol, basis, cfg)
            if res is not None:
                theta, vol = res
                moved = True
        if not moved:
            break
        productive += 1
        trace.append(vol)
        # snap quads that are approaching pi Z
        near = set(np.flatnonzero(dist_to_pi_z(theta) < cfg.snap_eps).tolist())
        new_flats = near - set(flat_quads(theta, cfg.eps_flat))
        if new_flats:
            res = _snap(tri, theta, Q, near, vol)
            if res is None:
                for q in sorted(new_flats):
                    res = _snap(tri, theta, Q, set(flat_quads(theta, cfg.eps_flat)) | {q}, vol)
                    if res is not None:
                        theta, vol = res
            else:
                theta, vol = res
    rep = evaluate(tri, theta, cfg)
    rep.restart = restart
    rep.iterations = it
    rep.productive_steps = productive
    rep.max_iterations = hit_max
    rep.start_volume = start_vol
    rep.trace = trace
    return rep


def _reduce(theta):
    # representative in (-pi, pi]; congruences are unchanged
    return theta - 2 * math.pi * np.ceil((theta - math.pi) / (2 * math.pi))


def evaluate(tri, theta, cfg=None):
    """Volume report with classification at ``theta``."""
    cfg = cfg or MaximizeConfig()
    theta = np.asarray(theta, dtype=float)
    Q = angles.orthonormal_tas(tri)
    fq, flat, partial = flat_structure(tri, theta, cfg.eps_flat)
    S = set(fq)
    B = _face_basis(Q, S)
    d, near = _face_gradient(theta, B, S)
    gn = float(np.linalg.norm(d))
    if not S:
        cls = "smooth-critical" if gn < cfg.tol else "non-critical"
    else:
        ok = gn < DD_TOL
        for u in angles.tas_basis(tri).as_array():
            for sgn in (1.0, -1.0):
                dd = directional_derivative(tri, theta, sgn * u, fq)
                if dd > DD_TOL:
                    ok = False
        cls = "nonsmooth-critical" if ok else "non-critical"
    return VolumeReport(
        point=_reduce(theta),
        volume=volume(tri, theta),
        grad_norm_in_TAS=gn,
        flat_quads=fq,
        flat_tets=flat,
        partially_flat_tets=partial,
        classification=cls,
        near_singular=near,
    )


def _threads(cfg):
    if cfg.threads:
        return max(1, int(cfg.threads))
    env = os.environ.get("SPINE3_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def start_points(tri, theta0, cfg):
    """Deterministic restart points spread over the components of SAS."""
    comps = [math.pi * np.array([float(x) for x in phi]) for phi in angles.sas_components(tri)]
    Q = angles.orthonormal_tas(tri)
    pts = []
    for i in range(max(1, cfg.restarts)):
        if i == 0 and theta0 is not None:
            pts.append(np.array(theta0, dtype=float))
            continue
        rng = np.random.default_rng([cfg.seed, i])
        base = comps[i % len(comps)]
        pts.append(base + Q @ rng.uniform(-math.pi, math.pi, Q.shape[1]))
    return pts


def maximize(tri, theta0=None, config=None):
    """Multi-start projected gradient ascent of the volume over SAS.

    Returns the best report found; ties go to the lowest restart index.
    """
    cfg = config or MaximizeConfig()
    if theta0 is None:
        theta0 = angles.sas_init(tri)
    elif not angles.is_sas(tri, theta0):
        raise PreconditionError("start point is not an S^1-angle structure")
    pts = start_points(tri, theta0, cfg)
    # warm caches before any worker touches them
    angles.orthonormal_tas(tri)
    angles.tas_basis(tri)
    n = min(_threads(cfg), len(pts))
    if n > 1:
        with ThreadPoolExecutor(max_workers=n) as ex:
            reports = list(ex.map(lambda a: _ascend(tri, a[1], cfg, a[0]), enumerate(pts)))
    else:
        reports = [_ascend(tri, p, cfg, i) for i, p in enumerate(pts)]
    best = reports[0]
    for r in reports[1:]:
        if r.volume > best.volume + 1e-12:
            best = r
    return best


def extract_shapes(tri, theta):
    """z(q) = sin(theta(pred q)) / sin(theta(succ q)) * exp(i theta(q))."""
    theta = np.asarray(theta, dtype=float)
    z = np.empty(len(theta), dtype=complex)
    for q in range(len(theta)):
        p, s = tri.quad_predecessor(q), tri.quad_successor(q)
        z[q] = math.sin(theta[p]) / math.sin(theta[s]) * complex(math.cos(theta[q]), math.sin(theta[q]))
    return z


def classify_and_extract(tri, report):
    """Shapes at a smooth critical point; 2-quad solutions at a non-smooth one."""
    from . import thurston

    if report.classification == "smooth-critical":
        if report.flat_quads:
            raise InconsistentReport("smooth-critical report lists flat quads")
        z = extract_shapes(tri, report.point)
        strict = thurston.residuals(tri, z, "strict")
        gen = thurston.residuals(tri, z, "generalized")
        return {
            "kind": "shapes",
            "z": z,
            "strict": strict,
            "generalized": gen,
            "extraction_mismatch": gen.max_edge > 1e-6,
        }
    if report.classification == "nonsmooth-critical":
        if not report.flat_quads:
            raise InconsistentReport("nonsmooth-critical report has no flat quads")
        sols = {q: haken.two_quad_search(tri, q) for q in report.flat_quads}
        clusters = []
        for t in report.flat_tets:
            qs = tri.tet_quads(t)
            if all(sols[q] for q in qs):
                members = [sols[q][0] for q in qs]
                clusters.append({"tet": t, "solutions": members, "distinct": len({m.vector for m in members})})
        return {"kind": "two_quad", "solutions": sols, "clusters": clusters}
    raise PreconditionError("report is not a critical point")


@dataclass
class FlatteningLeg:
    v: list  # exact integer direction
    t0: float
    start: np.ndarray
    end: np.ndarray
    n_start: int
    n_end: int
    volume_deviation: float


@dataclass
class FlatteningPath:
    legs: list

    @property
    def end(self):
        return self.legs[-1].end

    def to_dict(self):
        return {
            "legs": [
                {
                    "v": [linalg.fraction_str(x) for x in leg.v],
                    "t0": leg.t0,
                    "start": [float(x) for x in leg.start],
                    "end": [float(x) for x in leg.end],
                    "N_start": leg.n_start,
                    "N_end": leg.n_end,
                    "volume_deviation": leg.volume_deviation,
                }
                for leg in self.legs
            ]
        }


def flattening_direction(tri, theta, eps=EPS_FLAT):
    """The exact vector v(q) = sum over W of w(q', q), plus the set W."""
    fq, _, partial = flat_structure(tri, theta, eps)
    U = set(partial)
    Wset = [q for q in fq if q // 3 in U]
    w = nzform.build_forms(tri).w
    v = [Fraction(sum(w[qq][q] for qq in Wset)) for q in range(tri.num_quads)]
    return v, Wset


def _first_hit(theta, v, Wset, tri):
    """Smallest |t| at which a non-flat quad of a tet in U reaches pi Z."""
    best = None
    for qq in Wset:
        for q in tri.tet_quads(qq // 3):
            if q == qq or v[q] == 0:
                continue
            a, c = theta[q], float(v[q])
            for sgn in (1.0, -1.0):
                # smallest s > 0 with a + sgn*s*c in pi Z
                x = sgn * c
                k = math.floor(a / math.pi) + 1 if x > 0 else math.ceil(a / math.pi) - 1
                s = (k * math.pi - a) / x
                if s <= 0:
                    s += math.pi / abs(x)
                t = sgn * s
                if best is None or abs(t) < abs(best) - 1e-15:
                    best = t
    return best


def fg_flatten(tri, report, samples=64, eps=EPS_FLAT):
    """Follow the flattening direction until every partially flat tet is flat.

    Each leg moves along the exact direction v and stops at the first
    parameter where another tet becomes flat; the closed form of that
    parameter is used instead of a numerical root search.
    """
    theta = np.array(report.point, dtype=float)
    _, _, partial = flat_structure(tri, theta, eps)
    if not partial:
        raise NotApplicable("no partially flat tetrahedra to flatten")
    M = angles.constraint_matrix(tri)
    legs = []
    while partial:
        v, Wset = flattening_direction(tri, theta, eps)
        bad = [i for i, r in enumerate(linalg.matvec(M, v)) if r != 0]
        if bad:
            raise ClaimViolation("flattening direction is not tangential", bad)
        t0 = _first_hit(theta, v, Wset, tri)
        vf = np.array([float(x) for x in v])
        vol0 = volume(tri, theta)
        ts = np.linspace(0.0, t0, samples)
        dev = max(abs(volume(tri, theta + t * vf) - vol0) for t in ts)
        end = theta + t0 * vf
        # land exactly on pi Z for the quads that just became flat
        for q in np.flatnonzero(dist_to_pi_z(end) < 1e-9):
            end[q] = math.pi * round(end[q] / math.pi)
        n0 = len(partial)
        _, _, partial = flat_structure(tri, end, eps)
        legs.append(FlatteningLeg(v, float(t0), theta, end, n0, len(partial), float(dev)))
        if len(partial) >= n0:
            raise ClaimViolation("flattening leg did not reduce the partially flat count", [n0, len(partial)])
        theta = end
    return FlatteningPath(legs)
