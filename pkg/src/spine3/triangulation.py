"""Closed oriented triangulated pseudo 3-manifolds given by face pairings.

Conventions
-----------
* Tetrahedron vertices are 0..3 and face ``f`` is the face opposite vertex ``f``.
* A gluing ``(t, f) -> (t2, f2, perm)`` sends vertex ``a`` of tet ``t`` to
  vertex ``perm[a]`` of tet ``t2``; ``perm[f] == f2``.
* Edge slots inside a tet are indexed by ``EDGES``; quad type ``k`` is the
  quad disjoint from the opposite edge pair ``QUAD_EDGES[k]``
  (0: {01|23}, 1: {02|13}, 2: {03|12}).
* Global indices: quad ``3*t + k``, normal triangle ``4*t + v``.
* Every derived class (vertex, edge, face, arc) is numbered in order of its
  lexicographically least slot, so numbering is independent of how the
  gluing list is ordered.
"""
import json
from collections import deque
from itertools import permutations

from .errors import (
    BadPermutation,
    NonOrientable,
    SelfFaceGluing,
    UngluedFace,
    ValidationError,
)

EDGES = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
EDGE_INDEX = {e: i for i, e in enumerate(EDGES)}
EDGE_INDEX.update({(b, a): i for (a, b), i in list(EDGE_INDEX.items())})
QUAD_EDGES = (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2)))
# quad type disjoint from each edge slot
EDGE_QUAD = tuple(next(k for k, pr in enumerate(QUAD_EDGES) if e in pr) for e in EDGES)


def pair_type(a, b):
    """Quad type separating vertices {a, b} from the other two."""
    return EDGE_QUAD[EDGE_INDEX[(a, b)]]


def perm_sign(p):
    sign = 1
    p = list(p)
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


def perm_inverse(p):
    inv = [0] * len(p)
    for i, x in enumerate(p):
        inv[x] = i
    return tuple(inv)


class UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # keep the least slot as representative
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra

    def classes(self):
        """Map slot -> class number, classes ordered by least slot."""
        groups = {}
        for x in sorted(self.parent):
            groups.setdefault(self.find(x), []).append(x)
        ordered = sorted(groups.values(), key=lambda g: g[0])
        label = {}
        for n, g in enumerate(ordered):
            for x in g:
                label[x] = n
        return label, len(ordered)


class Triangulation:
    """A validated, oriented triangulation with all derived tables.

    Instances are treated as immutable once built.
    """

    def __init__(self, num_tets, gluings):
        self.num_tets = num_tets
        # (t, f) -> (t2, f2, perm)
        self.gluings = dict(gluings)
        self._orient()
        self._build_classes()
        self._build_incidence()

    # -- construction -----------------------------------------------------

    def _orient(self):
        signs = [0] * self.num_tets
        for start in range(self.num_tets):
            if signs[start]:
                continue
            signs[start] = 1
            queue = deque([start])
            while queue:
                t = queue.popleft()
                for f in range(4):
                    t2, _, perm = self.gluings[(t, f)]
                    # gluing must be orientation reversing between the signed tets
                    want = -perm_sign(perm) * signs[t]
                    if signs[t2] == 0:
                        signs[t2] = want
                        queue.append(t2)
                    elif signs[t2] != want:
                        raise NonOrientable(
                            f"no consistent orientation across face {f} of tet {t}"
                        )
        self.orientation = tuple(signs)

    def _build_classes(self):
        n = self.num_tets
        verts = UnionFind([(t, v) for t in range(n) for v in range(4)])
        edges = UnionFind([(t, k) for t in range(n) for k in range(6)])
        faces = UnionFind([(t, f) for t in range(n) for f in range(4)])
        arcs = UnionFind([(t, f, v) for t in range(n) for f in range(4) for v in range(4) if v != f])
        ends = UnionFind([(t, a, b) for t in range(n) for a in range(4) for b in range(4) if a != b])
        for (t, f), (t2, f2, p) in self.gluings.items():
            faces.union((t, f), (t2, f2))
            others = [v for v in range(4) if v != f]
            for v in others:
                verts.union((t, v), (t2, p[v]))
                arcs.union((t, f, v), (t2, f2, p[v]))
                for w in others:
                    if w != v:
                        ends.union((t, v, w), (t2, p[v], p[w]))
            for a, b in ((others[0], others[1]), (others[0], others[2]), (others[1], others[2])):
                edges.union((t, EDGE_INDEX[(a, b)]), (t2, EDGE_INDEX[(p[a], p[b])]))

        vlabel, self.num_vertices = verts.classes()
        elabel, self.num_edges = edges.classes()
        flabel, self.num_faces = faces.classes()
        alabel, self.num_arcs = arcs.classes()
        endlabel, num_ends = ends.classes()

        self.vertex_class = tuple(tuple(vlabel[(t, v)] for v in range(4)) for t in range(n))
        self.edge_class = tuple(tuple(elabel[(t, k)] for k in range(6)) for t in range(n))
        self.face_class = tuple(tuple(flabel[(t, f)] for f in range(4)) for t in range(n))

        self.edge_slots = [[] for _ in range(self.num_edges)]
        for t in range(n):
            for k in range(6):
                self.edge_slots[self.edge_class[t][k]].append((t, k))
        self.vertex_slots = [[] for _ in range(self.num_vertices)]
        for t in range(n):
            for v in range(4):
                self.vertex_slots[self.vertex_class[t][v]].append((t, v))

        # endpoints of each edge class as vertex classes (with repetition)
        self.edge_endpoints = []
        for slots in self.edge_slots:
            t, k = slots[0]
            a, b = EDGES[k]
            self.edge_endpoints.append((self.vertex_class[t][a], self.vertex_class[t][b]))

        # arc classes: each holds exactly two arc slots, the least first
        self.arc_slots = [[] for _ in range(self.num_arcs)]
        for slot in sorted(alabel):
            self.arc_slots[alabel[slot]].append(slot)

        # vertex links: triangles = corners, edges = 3/2 corners, vertices = edge ends
        link_vertices = [0] * self.num_vertices
        seen = set()
        for (t, a, b), c in endlabel.items():
            if c not in seen:
                seen.add(c)
                link_vertices[self.vertex_class[t][a]] += 1
        self.link_euler = []
        for v in range(self.num_vertices):
            corners = len(self.vertex_slots[v])
            self.link_euler.append(link_vertices[v] - 3 * corners // 2 + corners)
        del num_ends

    def _build_incidence(self):
        n = self.num_tets
        # class level i(e, q)
        inc = [[0] * (3 * n) for _ in range(self.num_edges)]
        for t in range(n):
            for k in range(6):
                inc[self.edge_class[t][k]][3 * t + EDGE_QUAD[k]] += 1
        self.incidence = tuple(tuple(row) for row in inc)

    # -- counts -----------------------------------------------------------

    @property
    def num_quads(self):
        return 3 * self.num_tets

    @property
    def num_triangles(self):
        return 4 * self.num_tets

    @property
    def euler_characteristic(self):
        return self.num_vertices - self.num_edges + self.num_faces - self.num_tets

    def counts(self):
        return {
            "V": self.num_vertices,
            "E": self.num_edges,
            "F": self.num_faces,
            "T": self.num_tets,
            "chi": self.euler_characteristic,
        }

    # -- local combinatorics ----------------------------------------------

    def slot_incidence(self, t, k, q):
        """i(y, q) for edge slot ``y = (t, k)`` and global quad ``q``."""
        return int(q // 3 == t and q % 3 == EDGE_QUAD[k])

    def quad_successor(self, q):
        t, k = divmod(q, 3)
        step = 1 if self.orientation[t] > 0 else 2
        return 3 * t + (k + step) % 3

    def quad_predecessor(self, q):
        return self.quad_successor(self.quad_successor(q))

    def quad_cyclic_order(self, t):
        """Quads of tet ``t`` listed along the cyclic order, starting at type 0."""
        q0 = 3 * t
        q1 = self.quad_successor(q0)
        return (q0, q1, self.quad_successor(q1))

    def successor_map(self, t):
        return {q: self.quad_successor(q) for q in range(3 * t, 3 * t + 3)}

    def tet_quads(self, t):
        return (3 * t, 3 * t + 1, 3 * t + 2)

    def edge_degree(self, e):
        return len(self.edge_slots[e])

    def opposite_edge_pairs(self, t):
        """Per quad type, the two edge classes of tet ``t`` disjoint from it."""
        return tuple(
            tuple(self.edge_class[t][EDGE_INDEX[pr]] for pr in QUAD_EDGES[k]) for k in range(3)
        )

    def arc_equation(self, a):
        """Coefficients {column: coeff} of the matching equation of arc class ``a``.

        Columns follow the normal coordinate layout: triangles ``0..4n-1``
        then quads ``4n..7n-1``.
        """
        n = self.num_tets
        (t, f, v), (t2, f2, v2) = self.arc_slots[a]
        row = {}

        def add(col, c):
            row[col] = row.get(col, 0) + c
            if row[col] == 0:
                del row[col]

        add(4 * t + v, 1)
        add(4 * n + 3 * t + pair_type(v, f), 1)
        add(4 * t2 + v2, -1)
        add(4 * n + 3 * t2 + pair_type(v2, f2), -1)
        return row

    # -- serialisation ----------------------------------------------------

    def to_spec(self):
        out = []
        for (t, f), (t2, f2, p) in sorted(self.gluings.items()):
            if (t, f) <= (t2, f2):
                out.append({"tet": t, "face": f, "to_tet": t2, "to_face": f2, "perm": list(p)})
        return {"tets": self.num_tets, "gluings": out}

    def __repr__(self):
        c = self.counts()
        return "Triangulation(T={T}, V={V}, E={E}, chi={chi})".format(**c)


def _as_int(x, what):
    if isinstance(x, bool) or not isinstance(x, int):
        raise ValidationError(f"{what} must be an integer, got {x!r}")
    return x


def from_spec(spec):
    """Validate a gluing specification (already decoded JSON) and build the triangulation."""
    if not isinstance(spec, dict) or "tets" not in spec or "gluings" not in spec:
        raise ValidationError('expected an object with keys "tets" and "gluings"')
    n = _as_int(spec["tets"], "tets")
    if n <= 0:
        raise ValidationError("tets must be positive")
    table = {}
    for g in spec["gluings"]:
        try:
            t, f = _as_int(g["tet"], "tet"), _as_int(g["face"], "face")
            t2, f2 = _as_int(g["to_tet"], "to_tet"), _as_int(g["to_face"], "to_face")
            perm = g["perm"]
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed gluing record {g!r}") from exc
        for tt in (t, t2):
            if not 0 <= tt < n:
                raise ValidationError(f"tet index {tt} out of range")
        for ff in (f, f2):
            if not 0 <= ff < 4:
                raise ValidationError(f"face index {ff} out of range")
        if not isinstance(perm, (list, tuple)) or sorted(perm) != [0, 1, 2, 3]:
            raise BadPermutation(f"{perm!r} is not a permutation of 0..3")
        perm = tuple(perm)
        if perm[f] != f2:
            raise BadPermutation(f"perm {list(perm)} does not send face {f} to face {f2}")
        if (t, f) == (t2, f2):
            raise SelfFaceGluing(f"face {f} of tet {t} glued to itself")
        for src, dst in (((t, f), (t2, f2, perm)), ((t2, f2), (t, f, perm_inverse(perm)))):
            if src in table and table[src] != dst:
                raise BadPermutation(f"conflicting gluings for face {src[1]} of tet {src[0]}")
            table[src] = dst
    for t in range(n):
        for f in range(4):
            if (t, f) not in table:
                raise UngluedFace(f"face {f} of tet {t} is not glued")
    return Triangulation(n, table)


def parse_and_validate(text):
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"not valid JSON: {exc}") from exc
    return from_spec(spec)


def load(path):
    with open(path, encoding="utf-8") as fh:
        return parse_and_validate(fh.read())


def fixture_path(name):
    from importlib.resources import files

    return str(files("spine3") / "data" / f"{name}.json")


def fixture(name):
    """One of the shipped fixtures: ``fig8``, ``s3_2tet``, ``p1``."""
    return load(fixture_path(name))


FIXTURES = ("fig8", "s3_2tet", "p1")


def random_spec(num_tets, rng, connected=True, relabel=True):
    """Random closed orientable gluing specification.

    All tets are first glued with odd permutations (so the all-positive
    orientation works), then each tet optionally gets a random vertex
    relabelling, which scrambles orientation signs and permutation parities.
    ``rng`` is a ``random.Random``.
    """
    while True:
        slots = [(t, f) for t in range(num_tets) for f in range(4)]
        rng.shuffle(slots)
        pairs = [(slots[i], slots[i + 1]) for i in range(0, len(slots), 2)]
        table = {}
        for (t, f), (t2, f2) in pairs:
            src = [v for v in range(4) if v != f]
            dst = [v for v in range(4) if v != f2]
            rng.shuffle(dst)
            p = [0] * 4
            p[f] = f2
            for a, b in zip(src, dst):
                p[a] = b
            if perm_sign(p) > 0:
                p[src[0]], p[src[1]] = p[src[1]], p[src[0]]
            table[(t, f)] = (t2, f2, tuple(p))
            table[(t2, f2)] = (t, f, perm_inverse(p))
        if connected and not _connected(num_tets, table):
            continue
        break
    if relabel:
        rho = [tuple(rng.sample(range(4), 4)) for _ in range(num_tets)]
        new = {}
        for (t, f), (t2, f2, p) in table.items():
            rinv = perm_inverse(rho[t])
            q = tuple(rho[t2][p[rinv[a]]] for a in range(4))
            new[(t, rho[t][f])] = (t2, rho[t2][f2], q)
        table = new
    gl = []
    for (t, f), (t2, f2, p) in sorted(table.items()):
        if (t, f) <= (t2, f2):
            gl.append({"tet": t, "face": f, "to_tet": t2, "to_face": f2, "perm": list(p)})
    return {"tets": num_tets, "gluings": gl}


def _connected(n, table):
    uf = UnionFind(range(n))
    for (t, _), (t2, _, _) in table.items():
        uf.union(t, t2)
    return len({uf.find(t) for t in range(n)}) == 1


def all_one_tet_specs():
    """Every orientable closed 1-tet gluing spec (used by fixture searches and tests)."""
    out = []
    for pairing in (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))):
        choices = []
        for f, f2 in pairing:
            choices.append([p for p in permutations(range(4)) if p[f] == f2 and perm_sign(p) < 0])
        for p1 in choices[0]:
            for p2 in choices[1]:
                gl = [
                    {"tet": 0, "face": pairing[0][0], "to_tet": 0, "to_face": pairing[0][1], "perm": list(p1)},
                    {"tet": 0, "face": pairing[1][0], "to_tet": 0, "to_face": pairing[1][1], "perm": list(p2)},
                ]
                out.append({"tets": 1, "gluings": gl})
    return out
