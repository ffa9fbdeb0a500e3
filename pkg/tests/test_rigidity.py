from __future__ import annotations

import numpy as np
import pytest

from carnotw1.carnot_core import multiply
from carnotw1.errors import PreconditionError
from carnotw1.geodesics import tilde_related
from carnotw1.norms import distance, pmax
from carnotw1.rigidity import (
    HEISENBERG_SWAP,
    IsometrySpec,
    heisenberg_rotation,
    make_left_translation,
    make_linear_isometry,
    perturb_to_tilde_position,
    push_forward,
    rigidity_demo,
    verify_pushforward_isometry,
)
from carnotw1.wasserstein import dirac, make_measure, match_dirac_pair_form, random_measure


@pytest.fixture(scope="module")
def isometries(heis1, kor):
    return {
        "identity": make_left_translation(heis1, [0, 0, 0]),
        "translation": make_left_translation(heis1, [0, 0, 1]),
        "rotation": make_linear_isometry(kor, heisenberg_rotation(0.7)),
        "swap": make_linear_isometry(kor, HEISENBERG_SWAP),
    }


def test_left_translation_examples(heis1):
    assert make_left_translation(heis1, [0, 0, 1]).apply([1, 0, 0]).tolist() == [1, 0, 1]
    assert make_left_translation(heis1, [0, 0, 0]).apply([1, 2, 3]).tolist() == [1, 2, 3]
    g1, g2 = np.array([1.0, -2, 0.5]), np.array([0.3, 0.3, -1])
    composed = make_left_translation(heis1, g1).compose(make_left_translation(heis1, g2))
    np.testing.assert_allclose(composed.translation, multiply(heis1, g1, g2))


def test_linear_isometry_acceptance(kor):
    assert make_linear_isometry(kor, heisenberg_rotation(1.1)).validated
    assert make_linear_isometry(kor, HEISENBERG_SWAP).validated
    with pytest.raises(PreconditionError, match="norm preserving"):
        make_linear_isometry(kor, np.diag([2.0, 2.0, 4.0]))
    with pytest.raises(PreconditionError, match="homomorphism"):
        make_linear_isometry(kor, np.diag([1.0, -1.0, 1.0]))
    with pytest.raises(PreconditionError, match="block-diagonal"):
        make_linear_isometry(kor, [[1, 0, 1], [0, 1, 0], [0, 0, 1]])


def test_isometries_preserve_distance(isometries, kor):
    rng = np.random.default_rng(40)
    p, q = rng.normal(size=(2, 200, 3))
    for iso in isometries.values():
        np.testing.assert_allclose(distance(kor, iso(p), iso(q)), distance(kor, p, q), rtol=1e-12)


def test_push_forward_examples(isometries):
    mu = make_measure([[0, 0, 0], [1, 2, 3]], [0.25, 0.75])
    assert push_forward(isometries["identity"], mu).allclose(mu)
    iso = isometries["translation"]
    assert push_forward(iso, dirac([1, 0, 0])).allclose(dirac([1, 0, 1]))
    assert push_forward(iso, mu).total == mu.total


def test_push_forward_is_homomorphism(isometries):
    rng = np.random.default_rng(41)
    mu = random_measure(3, rng, 6)
    for a in isometries.values():
        for b in isometries.values():
            lhs = push_forward(a.compose(b), mu)
            rhs = push_forward(a, push_forward(b, mu))
            assert lhs.allclose(rhs, 1e-12)


def test_unvalidated_map_refused(heis1):
    raw = IsometrySpec(heis1, np.zeros(3), np.diag([2.0, 2.0, 4.0]), validated=False)
    with pytest.raises(PreconditionError):
        push_forward(raw, dirac([0, 0, 0]))
    with pytest.raises(PreconditionError):
        verify_pushforward_isometry(raw, None)


def test_pushforward_preserves_w1(isometries, kor):
    for iso in isometries.values():
        rep = verify_pushforward_isometry(iso, kor, pair_count=20)
        assert rep.passed, rep.summary()


def test_dirac_pairs_stay_in_pair_form(isometries, kor):
    q, qp = np.array([0.0, 0, 0]), np.array([0.3, -0.2, 1.0])
    assert tilde_related(kor, q, qp)
    for iso in isometries.values():
        form = match_dirac_pair_form(push_forward(iso, dirac(q)), push_forward(iso, dirac(qp)))
        assert form is not None and form.eta.is_empty


def test_perturb_examples(kor):
    pts = np.array([[0.0, 0, 0], [1, 0, 0]])
    out = perturb_to_tilde_position(kor, pts, 0.1)
    assert np.all(distance(kor, pts, out) < 0.1)
    assert tilde_related(kor, out[0], out[1])
    single = perturb_to_tilde_position(kor, pts[:1], 0.1)
    assert np.array_equal(single, pts[:1])


def test_perturb_collinear_horizontal_points(kor):
    pts = np.array([[0.0, 0, 0], [1, 0, 0], [2, 0, 0]])
    out = perturb_to_tilde_position(kor, pts, 0.01)
    assert np.all(distance(kor, pts, out) < 0.01)
    for i in range(3):
        for j in range(i + 1, 3):
            assert tilde_related(kor, out[i], out[j])


def test_perturb_on_step2_group(step2):
    from carnotw1.norms import hebisch_sikora, hs_r0

    N = hebisch_sikora(step2, hs_r0(step2) / 2)
    pts = np.random.default_rng(42).uniform(-1, 1, (5, 5))
    pts[:, 3:] = 0.0
    out = perturb_to_tilde_position(N, pts, 0.05)
    assert np.all(distance(N, pts, out) < 0.05)


def test_perturb_refuses_non_hsc(heis1):
    with pytest.raises(PreconditionError):
        perturb_to_tilde_position(pmax(heis1, 2, 1), [[0, 0, 0], [1, 0, 0]], 0.1)


def test_rigidity_demo_small(isometries, kor):
    for name, iso in isometries.items():
        rep = rigidity_demo(kor, iso, measure_count=15, reconstruction_count=3)
        assert rep.passed, (name, rep.summary())
        assert rep.to_csv().splitlines()[0] == "check_name,status,worst_deviation"
