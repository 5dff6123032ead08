"""Z/2-taut structures: one chosen quad per tet, even incidence around every edge."""
import math
from dataclasses import dataclass, field
from itertools import product

EXACT_COUNT_MAX_TETS = 20


@dataclass
class TautResult:
    structures: list  # sorted lists of chosen quads, one per tet
    count: int = None  # exact total, when computed
    exhausted: bool = True
    deepest_failures: list = field(default_factory=list)

    def to_dict(self):
        out = {"count": self.count, "structures": self.structures}
        if not self.structures:
            out["deepest_failures"] = self.deepest_failures
        return out


def is_taut(tri, f):
    """Check both conditions for an assignment f given as a 0/1 list over quads."""
    for t in range(tri.num_tets):
        if sum(f[q] for q in tri.tet_quads(t)) != 1:
            return False
    return all(sum(i * f[q] for q, i in enumerate(row)) % 2 == 0 for row in tri.incidence)


def _edge_plan(tri):
    """For each tet, the edges whose parity is fully decided once it is chosen."""
    last = [-1] * tri.num_edges
    for e, row in enumerate(tri.incidence):
        for q, i in enumerate(row):
            if i % 2:
                last[e] = max(last[e], q // 3)
    done_at = [[] for _ in range(tri.num_tets)]
    for e, t in enumerate(last):
        if t >= 0:
            done_at[t].append(e)
    # an incidence of 2 never changes the parity
    odd = [[e for e in range(tri.num_edges) if tri.incidence[e][q] % 2] for q in range(tri.num_quads)]
    return done_at, odd


def enumerate_taut(tri, limit=None, count_exact=None):
    """Backtracking search over the per-tet choices with edge-parity pruning.

    Collects up to ``limit`` structures. The exact count is computed when
    ``count_exact`` is true, which defaults to ``|T| <= 20``.
    """
    n = tri.num_tets
    if count_exact is None:
        count_exact = n <= EXACT_COUNT_MAX_TETS
    done_at, odd = _edge_plan(tri)
    parity = [0] * tri.num_edges
    chosen = []
    found = []
    total = 0
    deepest = [-1, set()]
    stop = False

    def rec(t):
        nonlocal total, stop
        if t == n:
            total += 1
            if limit is None or len(found) < limit:
                found.append(sorted(chosen))
            elif not count_exact:
                stop = True
            return
        for k in range(3):
            q = 3 * t + k
            for e in odd[q]:
                parity[e] ^= 1
            bad = [e for e in done_at[t] if parity[e]]
            if bad:
                if t > deepest[0]:
                    deepest[0], deepest[1] = t, set(bad)
                elif t == deepest[0]:
                    deepest[1].update(bad)
            else:
                chosen.append(q)
                rec(t + 1)
                chosen.pop()
            for e in odd[q]:
                parity[e] ^= 1
            if stop:
                return

    rec(0)
    found.sort()
    fails = [] if found else sorted(deepest[1])
    return TautResult(found, total if (count_exact or not stop) else None, not stop, fails)


def brute_force_taut(tri):
    """Every choice of one quad per tet, filtered by the parity condition."""
    out = []
    for choice in product(range(3), repeat=tri.num_tets):
        f = [0] * tri.num_quads
        for t, k in enumerate(choice):
            f[3 * t + k] = 1
        if is_taut(tri, f):
            out.append([3 * t + k for t, k in enumerate(choice)])
    return sorted(out)


def verify_quadratic_equiv():
    """Over GF(2)^3: (sum f = 1 and sum_{i<j} f_i f_j = 0) iff exactly one f_i = 1."""
    for f in product((0, 1), repeat=3):
        quad = sum(f) % 2 == 1 and (f[0] * f[1] + f[0] * f[2] + f[1] * f[2]) % 2 == 0
        if quad != (sum(f) == 1):
            return False
    return True


def from_taut_angles(g, tol=1e-12):
    """Map a taut angle vector with values in {0, pi} to its 0/1 assignment."""
    out = []
    for x in g:
        if abs(x) < tol:
            out.append(0)
        elif abs(x - math.pi) < tol:
            out.append(1)
        else:
            raise ValueError(f"taut angle {x} is not 0 or pi")
    return out
