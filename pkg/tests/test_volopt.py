import math

import numpy as np
import pytest

import oracles
from spine3 import angles, haken, linalg, volopt
from spine3.errors import NotApplicable, InconsistentReport, PreconditionError
from spine3.triangulation import all_one_tet_specs, fixture, from_spec


@pytest.fixture(scope="module")
def fig8_best():
    return volopt.maximize(fixture("fig8"), config=volopt.MaximizeConfig(restarts=20, seed=0))


def test_fig8_regular_volume():
    tri = fixture("fig8")
    vg = volopt.volume_and_grad(tri, np.full(6, math.pi / 3))
    assert abs(vg["vol"] - 6 * oracles.lobachevsky_mp(math.pi / 3)) < 1e-12
    assert abs(vg["vol"] - 2.0298832128) < 1e-9


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(1)
    for name in ("fig8", "p1"):
        tri = fixture(name)
        Q = angles.orthonormal_tas(tri)
        for theta in oracles.random_smooth_points(tri, 20, rng):
            u = Q @ rng.normal(size=Q.shape[1])
            fd = oracles.central_difference(lambda x: volopt.volume(tri, x), theta, u)
            g, _ = volopt.gradient(theta)
            assert abs(fd - g @ u) < 1e-6 * max(1.0, abs(g @ u))


def test_directional_derivative_divergence_sign():
    tri = fixture("p1")
    theta = np.array([0.0, math.pi / 2, math.pi / 2])  # tet sum pi; not a constraint check here
    u = np.array([1.0, -0.5, -0.5])
    assert volopt.directional_derivative(tri, theta, u) == math.inf
    assert volopt.directional_derivative(tri, theta, -u) == -math.inf


def test_directional_derivative_one_dimensional_limit():
    # d/dt Lambda(t a) at 0+ behaves like -a ln t, so the one-sided slope diverges with sign a
    for a in (0.5, 2.0):
        t = 1e-9
        slope = oracles.lobachevsky_mp(t * a) / t
        assert slope > 0
        tri = fixture("p1")
        theta = np.array([0.0, math.pi / 2, math.pi / 2])
        assert volopt.directional_derivative(tri, theta, np.array([a, -a / 2, -a / 2])) == math.inf


def test_directional_derivative_finite_case():
    tri = fixture("p1")
    theta = np.array([0.0, math.pi, 0.0])
    u = np.array([-2.0, 1.0, 1.0])
    got = volopt.directional_derivative(tri, theta, u)
    assert abs(got - 2 * math.log(2)) < 1e-12
    # compare with a one-sided difference quotient
    t = 1e-7
    fd = (volopt.volume(tri, theta + t * u) - volopt.volume(tri, theta)) / t
    assert abs(fd - got) < 1e-5


def test_guarded_gradient_never_crashes():
    g, near = volopt.gradient(np.array([0.0, 1e-320, 1.0]))
    assert np.all(np.isfinite(g)) and near


def test_fig8_maximum(fig8_best):
    assert fig8_best.classification == "smooth-critical"
    assert abs(fig8_best.volume - 2.0298832128193) < 1e-6
    d = volopt.dist_to_pi_z(fig8_best.point - math.pi / 3)
    assert d.max() < 1e-6


def test_fig8_extraction(fig8_best):
    ex = volopt.classify_and_extract(fixture("fig8"), fig8_best)
    assert ex["kind"] == "shapes"
    assert ex["strict"].passed and ex["strict"].max_edge < 1e-9
    assert np.abs(ex["z"] - np.exp(1j * math.pi / 3)).max() < 1e-5


def test_start_at_critical_point_takes_no_steps():
    tri = fixture("fig8")
    theta = np.full(6, math.pi / 3)
    rep = volopt.maximize(tri, theta, volopt.MaximizeConfig(restarts=1))
    assert rep.productive_steps == 0
    assert rep.classification == "smooth-critical"


def test_ascent_is_monotone():
    tri = fixture("fig8")
    cfg = volopt.MaximizeConfig(restarts=1)
    for theta0 in volopt.start_points(tri, None, volopt.MaximizeConfig(restarts=6, seed=3)):
        rep = volopt._ascend(tri, theta0, cfg)
        assert rep.volume >= volopt.volume(tri, theta0) - 1e-12
        assert all(b >= a - 1e-12 for a, b in zip(rep.trace, rep.trace[1:]))


def test_maximize_is_deterministic():
    tri = fixture("p1")
    cfg = volopt.MaximizeConfig(restarts=6, seed=11)
    a = volopt.maximize(tri, config=cfg).to_dict()
    b = volopt.maximize(tri, config=volopt.MaximizeConfig(restarts=6, seed=11, threads=1)).to_dict()
    assert a == b


def test_maximize_rejects_bad_start():
    with pytest.raises(PreconditionError):
        volopt.maximize(fixture("fig8"), np.zeros(6))


def test_volume_depends_on_theta_mod_pi():
    tri = fixture("fig8")
    rng = np.random.default_rng(4)
    for theta in oracles.random_smooth_points(tri, 10, rng):
        shift = math.pi * rng.integers(-3, 4, size=6)
        assert abs(volopt.volume(tri, theta + shift) - volopt.volume(tri, theta)) < 1e-10


def test_p1_smooth_maximum_is_generalized_solution():
    tri = fixture("p1")
    rep = volopt.maximize(tri)
    assert rep.classification == "smooth-critical"
    ex = volopt.classify_and_extract(tri, rep)
    assert ex["generalized"].passed
    assert not ex["extraction_mismatch"]


def test_synthetic_nonsmooth_point_on_p1():
    tri = fixture("p1")
    rep = volopt.evaluate(tri, np.array([0.0, math.pi, 0.0]))
    assert rep.flat_quads == [0, 1, 2]
    rep.classification = "nonsmooth-critical"
    ex = volopt.classify_and_extract(tri, rep)
    assert ex["kind"] == "two_quad"
    for q, sols in ex["solutions"].items():
        assert sols
        for s in sols:
            assert len(s.support) <= 2 and s.quads(tri.num_tets)[q] != 0
            assert all(r == 0 for r in haken.matching_residual(tri, s.vector))
    assert ex["clusters"] and ex["clusters"][0]["tet"] == 0


def test_nonsmooth_report_without_flats_is_rejected():
    tri = fixture("fig8")
    rep = volopt.evaluate(tri, np.full(6, math.pi / 3))
    rep.classification = "nonsmooth-critical"
    with pytest.raises(InconsistentReport):
        volopt.classify_and_extract(tri, rep)


def test_flatten_not_applicable_without_partial_tets():
    tri = fixture("fig8")
    rep = volopt.evaluate(tri, np.full(6, math.pi / 3))
    with pytest.raises(NotApplicable):
        volopt.fg_flatten(tri, rep)


def _flat_line_specs():
    # one-tet spaces whose tangent direction keeps a quad in pi Z: volume is 0 along them
    out = []
    for s in all_one_tet_specs():
        tri = from_spec(s)
        u = angles.tas_basis(tri).basis[0]
        if any(x == 0 for x in u):
            out.append(tri)
    return out


def test_flatten_on_partially_flat_maxima():
    specs = _flat_line_specs()
    assert specs
    for tri in specs:
        phi = angles.sas_init_exact(tri)
        u = np.array([float(x) for x in angles.tas_basis(tri).basis[0]])
        theta = math.pi * np.array([float(x) for x in phi]) + 0.7 * u
        rep = volopt.evaluate(tri, theta)
        assert rep.classification == "nonsmooth-critical"
        assert rep.partially_flat_tets == [0]
        path = volopt.fg_flatten(tri, rep)
        M = angles.constraint_matrix(tri)
        for leg in path.legs:
            assert all(x == 0 for x in linalg.matvec(M, leg.v))
            assert leg.n_end < leg.n_start
            assert leg.volume_deviation < 1e-8
        assert volopt.evaluate(tri, path.end).partially_flat_tets == []
        assert abs(volopt.volume(tri, path.end) - rep.volume) < 1e-8


def test_threads_env(monkeypatch):
    monkeypatch.setenv("SPINE3_THREADS", "1")
    assert volopt._threads(volopt.MaximizeConfig()) == 1
