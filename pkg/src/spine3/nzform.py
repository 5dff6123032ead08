"""The Neumann-Zagier form and the chain maps around it, over exact integers/rationals."""
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

from . import linalg
from .errors import IdentityViolation


@dataclass(frozen=True)
class NZMatrix:
    w: tuple  # quads x quads, entries in {-1, 0, 1}
    W: tuple  # edges x quads

    def pairing(self, x, y):
        """w(x, y) = sum w(q, q') x(q) y(q')."""
        total = 0
        for q, row in enumerate(self.w):
            if not x[q]:
                continue
            for qq, c in enumerate(row):
                if c and y[qq]:
                    total += c * x[q] * y[qq]
        return total


def build_forms(tri):
    nq = tri.num_quads
    w = [[0] * nq for _ in range(nq)]
    for q in range(nq):
        s = tri.quad_successor(q)
        w[q][s] = 1
        w[s][q] = -1
    I = tri.incidence
    W = [[sum(I[e][qq] * w[qq][q] for qq in range(nq)) for q in range(nq)] for e in range(tri.num_edges)]
    return NZMatrix(tuple(map(tuple, w)), tuple(map(tuple, W)))


def z_basis(tri):
    """Rational basis of Z = {x : per-tet sums vanish}."""
    return linalg.nullspace(tet_sum_matrix(tri), tri.num_quads)


def tet_sum_matrix(tri):
    nq = tri.num_quads
    return [[int(q // 3 == t) for q in range(nq)] for t in range(tri.num_tets)]


def A_matrix(tri):
    """Matrix of x -> A(x)(e) = sum_q i(e,q) x(q); edges x quads."""
    return [list(row) for row in tri.incidence]


def B_matrix(tri):
    """Vertices x edges; an edge with both ends at v counts twice."""
    B = [[0] * tri.num_edges for _ in range(tri.num_vertices)]
    for e, (a, b) in enumerate(tri.edge_endpoints):
        B[a][e] += 1
        B[b][e] += 1
    return B


def A_star_matrix(tri, forms=None):
    """Quads x edges, A*(x)(q) = (1/3) sum_e W(e,q) x(e)."""
    forms = forms or build_forms(tri)
    third = Fraction(1, 3)
    return [[third * forms.W[e][q] for e in range(tri.num_edges)] for q in range(tri.num_quads)]


def B_star_matrix(tri):
    return linalg.transpose(B_matrix(tri), tri.num_vertices)


@dataclass
class IdentityReport:
    results: dict = field(default_factory=dict)

    def add(self, name, violations):
        self.results[name] = {"status": "pass" if not violations else "fail", "violations": violations}

    @property
    def ok(self):
        return all(r["status"] == "pass" for r in self.results.values())

    def to_dict(self):
        return self.results

    def raise_on_violation(self):
        bad = {k: v["violations"] for k, v in self.results.items() if v["status"] != "pass"}
        if bad:
            raise IdentityViolation(f"identities violated: {sorted(bad)}", [bad])


def pairing_identities(tri, forms=None, raise_on_violation=False):
    """Check the Neumann-Zagier pairing identities exactly.

    Covered: column sums of ``w``, the edge-pair identity, the value table of
    ``w @ w``, ``w @ w @ y = -3 y`` on a basis of Z, and ``w^3 = -3 w``.
    """
    forms = forms or build_forms(tri)
    w, I = forms.w, tri.incidence
    nq, ne = tri.num_quads, tri.num_edges
    rep = IdentityReport()

    rep.add("antisymmetry", [[q, r] for q, r in product(range(nq), repeat=2) if w[q][r] != -w[r][q]])
    rep.add("column_sums", [[r] for r in range(nq) if sum(w[q][r] for q in range(nq)) != 0])

    viol = []
    for e, f in product(range(ne), repeat=2):
        s = sum(I[e][q] * I[f][r] * w[q][r] for q in range(nq) if I[e][q] for r in range(nq) if I[f][r])
        if s:
            viol.append([e, f, s])
    rep.add("edge_pairing", viol)

    ww = linalg.matmul(w, w)
    viol = []
    for q1, q2 in product(range(nq), repeat=2):
        if q1 == q2:
            want = -2
        elif q1 // 3 == q2 // 3:
            want = 1
        else:
            want = 0
        if ww[q1][q2] != want:
            viol.append([q1, q2, ww[q1][q2], want])
    rep.add("square_values", viol)

    viol = []
    for i, y in enumerate(z_basis(tri)):
        lhs = linalg.matvec(ww, y)
        if any(a != -3 * b for a, b in zip(lhs, y)):
            viol.append([i])
    rep.add("square_on_Z", viol)

    www = linalg.matmul(ww, w)
    rep.add(
        "cube",
        [[q1, q4] for q1, q4 in product(range(nq), repeat=2) if www[q1][q4] != -3 * w[q1][q4]],
    )
    if raise_on_violation:
        rep.raise_on_violation()
    return rep


@dataclass
class ExactnessReport:
    ranks: dict
    checks: dict
    tas_basis: list

    @property
    def ok(self):
        return all(self.checks.values())

    def to_dict(self):
        return {
            "ranks": self.ranks,
            "checks": self.checks,
            "dim_tas": len(self.tas_basis),
        }


def chain_analysis(tri, forms=None):
    """Exact ranks for both Neumann-Zagier sequences plus isotropy of im(A*)."""
    forms = forms or build_forms(tri)
    nq, ne, nv = tri.num_quads, tri.num_edges, tri.num_vertices
    Zb = z_basis(tri)
    A = A_matrix(tri)
    B = B_matrix(tri)
    As = A_star_matrix(tri, forms)
    Bs = B_star_matrix(tri)

    # columns of AZ are images of the Z basis
    AZ = linalg.matmul(A, linalg.transpose(Zb, nq))
    rank_AZ = linalg.rank(AZ, len(Zb))
    rank_B = linalg.rank(B, ne)
    rank_As = linalg.rank(As, ne)
    rank_Bs = linalg.rank(Bs, nv)

    # kernel of A restricted to Z, expressed in quad coordinates
    tas = linalg.nullspace(linalg.frac_matrix(tet_sum_matrix(tri)) + linalg.frac_matrix(A), nq)

    isotropy = linalg.matmul(linalg.transpose(As, ne), linalg.matmul(forms.w, As))
    checks = {
        "BA_zero": linalg.is_zero(linalg.matmul(B, AZ)) if AZ and AZ[0] else True,
        "im_A_eq_ker_B": rank_AZ == ne - rank_B,
        "B_surjective": rank_B == nv,
        "B_star_injective": rank_Bs == nv,
        "A_star_B_star_zero": linalg.is_zero(linalg.matmul(As, Bs)),
        "ker_A_star_eq_im_B_star": ne - rank_As == rank_Bs,
        "A_star_lands_in_Z": linalg.is_zero(linalg.matmul(tet_sum_matrix(tri), As)),
        "isotropy": linalg.is_zero(isotropy),
        "rank_nullity": rank_AZ + len(tas) == len(Zb),
    }
    ranks = {
        "dim_Z": len(Zb),
        "rank_A": rank_AZ,
        "rank_B": rank_B,
        "rank_A_star": rank_As,
        "rank_B_star": rank_Bs,
        "dim_ker_A_star": ne - rank_As,
        "dim_im_B_star": rank_Bs,
    }
    return ExactnessReport(ranks, checks, tas)


def adjoint_check(tri, forms=None):
    """(A(y), x) == w(y, A*(x)) for basis vectors y of Z and x of R^E."""
    forms = forms or build_forms(tri)
    A = A_matrix(tri)
    As = A_star_matrix(tri, forms)
    bad = []
    for i, y in enumerate(z_basis(tri)):
        Ay = linalg.matvec(A, y)
        for e in range(tri.num_edges):
            col = [As[q][e] for q in range(tri.num_quads)]
            if Ay[e] != forms.pairing(y, col):
                bad.append([i, e])
    return bad


def edge_vectors(tri, forms=None):
    """u_e = sum_q W(e, q) q*, one integer vector per edge."""
    forms = forms or build_forms(tri)
    return [list(row) for row in forms.W]


def selftest(tri):
    """Combined JSON-ready identity report used by the CLI."""
    forms = build_forms(tri)
    rep = pairing_identities(tri, forms)
    chain = chain_analysis(tri, forms)
    for name, ok in chain.checks.items():
        rep.add(name, [] if ok else [chain.ranks])
    rep.add("adjoint", adjoint_check(tri, forms))
    return rep
