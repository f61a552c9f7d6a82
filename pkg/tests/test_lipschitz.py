"""Map constants, scalar envelope extensions, cone and face extensions."""

from fractions import Fraction

import numpy as np
import pytest

from germlens.lipschitz import (
    banach_extension,
    cone_extension,
    cone_lift,
    constants_estimate,
    linear_map,
    simplicial_extension,
    with_estimated_constants,
)
from oracles import envelope_1d_exact


def test_linear_map_constants_exact_for_diagonal():
    h = linear_map(np.diag([2.0, 5.0]))
    assert h.K1 == pytest.approx(2.0)
    assert h.K2 == pytest.approx(5.0)
    assert h.provenance == "analytic"


def test_linear_map_constants_bound_random_quotients():
    rng = np.random.default_rng(0)
    M = rng.normal(size=(3, 3)) + 3 * np.eye(3)
    h = linear_map(M)
    X = rng.normal(size=(500, 3))
    Y = rng.normal(size=(500, 3))
    q = np.linalg.norm(h.apply(X) - h.apply(Y), axis=1) / np.linalg.norm(X - Y, axis=1)
    assert np.all(q <= h.K2 * (1 + 1e-12))
    assert np.all(q >= h.K1 * (1 - 1e-12))
    # roundtrip through the inverse
    assert np.allclose(h.apply_inverse(h.apply(X)), X, atol=1e-9)


def test_linear_map_rejects_singular():
    with pytest.raises(ValueError):
        linear_map([[1.0, 0.0], [2.0, 0.0]])


def test_constants_estimate_brackets_linear_map():
    h = linear_map(np.diag([1.0, 3.0]))
    rep = constants_estimate(h, region=0.5, pair_count=6000, seed=1)
    assert 0.99 <= rep.k_lower <= rep.k_upper <= 3.01
    assert not rep.forward_unbounded
    assert not rep.inverse_unbounded


def test_constants_estimate_flags_vanishing_quotients():
    def squash(p):
        p = np.asarray(p, float)
        return p * np.linalg.norm(p)

    rep = constants_estimate(squash, region={"radius": 0.5, "ambient_dim": 2}, seed=2)
    assert rep.inverse_unbounded
    assert not rep.forward_unbounded


def test_with_estimated_constants():
    h = linear_map(np.diag([1.0, 2.0]))
    g = with_estimated_constants(h, seed=3)
    assert g.provenance == "estimated"
    assert 0.9 <= g.K1 <= g.K2 <= 2.1


def test_banach_extension_restriction_and_quotient():
    rng = np.random.default_rng(4)
    anchors = rng.normal(size=(30, 3))
    u = np.array([0.6, -0.3, 0.2])
    L = 1.0
    vals = 0.7 * anchors @ u  # 0.7|u| < 1, so the data is 1-Lipschitz
    for mode in ("inf", "sup", 0.37):
        ext = banach_extension(vals, anchors, L, mode=mode)
        assert np.max(np.abs(ext(anchors) - vals)) <= 1e-12
        X = rng.normal(size=(2000, 3))
        Y = rng.normal(size=(2000, 3))
        lhs = np.abs(ext(X) - ext(Y))
        assert np.all(lhs <= L * np.linalg.norm(X - Y, axis=1) * (1 + 1e-6) + 1e-12)


def test_banach_envelope_ordering():
    rng = np.random.default_rng(5)
    anchors = rng.normal(size=(12, 2))
    vals = np.sin(anchors[:, 0])
    upper = banach_extension(vals, anchors, 1.5, mode="inf")
    lower = banach_extension(vals, anchors, 1.5, mode="sup")
    X = rng.normal(size=(500, 2)) * 2
    assert np.all(lower(X) <= upper(X) + 1e-12)


def test_banach_matches_exact_1d_envelopes():
    anchors = [Fraction(0), Fraction(1, 2), Fraction(2)]
    values = [Fraction(1, 3), Fraction(0), Fraction(3, 4)]
    L = Fraction(2)
    ext_up = banach_extension(
        [float(v) for v in values], [[float(a)] for a in anchors], float(L), mode="inf"
    )
    ext_lo = banach_extension(
        [float(v) for v in values], [[float(a)] for a in anchors], float(L), mode="sup"
    )
    for x in [Fraction(-1), Fraction(1, 4), Fraction(3, 4), Fraction(5, 2)]:
        want_up = envelope_1d_exact(anchors, values, L, x, upper=True)
        want_lo = envelope_1d_exact(anchors, values, L, x, upper=False)
        assert ext_up(np.array([float(x)])) == pytest.approx(float(want_up), abs=1e-12)
        assert ext_lo(np.array([float(x)])) == pytest.approx(float(want_lo), abs=1e-12)


def test_banach_rejects_inconsistent_data():
    anchors = np.array([[0.0], [1.0]])
    with pytest.raises(ValueError):
        banach_extension([0.0, 10.0], anchors, 1.0)
    with pytest.raises(ValueError):
        banach_extension([0.0, 0.5], anchors, 1.0, mode=1.5)


def test_banach_callable_data_and_attributes():
    anchors = np.array([[0.0, 0.0], [1.0, 0.0]])
    ext = banach_extension(lambda a: a[0], anchors, 2.0, mode=0.5)
    assert ext.L == 2.0 and ext.mix == 0.5
    assert np.allclose(ext.values, [0.0, 1.0])
    assert ext(np.array([0.5, 0.0])) == pytest.approx(0.5)


def test_cone_lift_shape():
    z = cone_lift(np.array([[1.0, 2.0]]), np.array([0.5]))
    assert z.shape == (1, 3)
    assert np.allclose(z, [[0.5, 1.0, 0.5]])


def test_cone_extension_homogeneity_and_bound():
    h = linear_map(np.diag([2.0, 0.5]))
    rng = np.random.default_rng(6)
    X = rng.uniform(-1, 1, size=(200, 2))
    ext = cone_extension(h, X, c=h.K2, name="cone")
    assert ext.provenance == "analytic"
    x = np.array([0.3, -0.4])
    for t in (1.0, 0.25, 0.01):
        got = ext.forward(np.append(t * x, t))
        want = np.append(t * h.apply(x[None])[0], t)
        assert np.allclose(got, want, atol=1e-12)
    assert np.allclose(ext.forward(np.array([0.3, 0.3, 0.0])), 0.0)
    assert np.allclose(ext.forward(np.array([0.3, 0.3, -1.0])), 0.0)

    # the declared ceiling dominates sampled quotients on the cone
    ts = rng.uniform(0.0, 1.0, size=400)
    Z = cone_lift(X[rng.integers(0, len(X), size=400)], ts)
    W = cone_lift(X[rng.integers(0, len(X), size=400)], rng.uniform(0.0, 1.0, size=400))
    fz = np.array([ext.forward(z) for z in Z])
    fw = np.array([ext.forward(w) for w in W])
    den = np.linalg.norm(Z - W, axis=1)
    keep = den > 1e-12
    q = np.linalg.norm(fz - fw, axis=1)[keep] / den[keep]
    assert np.all(q <= ext.K2 * (1 + 1e-9))


def test_cone_extension_estimates_c_when_missing():
    h = linear_map(np.diag([2.0, 0.5]))
    rng = np.random.default_rng(7)
    X = rng.uniform(-1, 1, size=(300, 2))
    ext = cone_extension(h, X)
    assert ext.provenance == "estimated"
    assert 0.5 <= ext.meta["c"] <= 2.0 + 1e-9


def test_simplicial_extension_face_identity_and_collapse():
    V = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    h = lambda p: np.array([p[0] ** 2])
    ext = simplicial_extension(h, V, [0, 1])
    assert np.allclose(ext(np.array([0.3, 0.0])), [0.09], atol=1e-9)
    assert np.allclose(ext(V[2]), [0.0])
    # interior points renormalize onto the face and scale by the weight
    got = ext(np.array([0.25, 0.5]))
    assert np.allclose(got, 0.5 * h(np.array([0.5, 0.0])), atol=1e-9)


def test_simplicial_extension_rejects_off_span_points():
    V = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    ext = simplicial_extension(lambda p: np.array([p[0]]), V, [0, 1])
    with pytest.raises(ValueError):
        ext(np.array([0.2, 0.2, 0.5]))
