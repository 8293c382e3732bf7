import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from facemesh.errors import InvariantError, TopologyError
from facemesh.metrics import (EyeCornerSpec, eye_centers, format_percent, inter_annotator_mad, iod_3d,
                              iod_mad_2d, jitter_rms)
from facemesh.mesh import MeshTopology, SurfaceMesh, grid_mesh

from conftest import random_rotation
from oracles import mad_percent, pairwise_mad

SPEC = EyeCornerSpec(0, 1, 2, 3)


def mesh_from(points):
    return SurfaceMesh(np.asarray(points, dtype=float))


def eyes_mesh(left, right, n_extra=4):
    """Corners placed so the eye centers land exactly on ``left`` and ``right``."""
    left, right = np.asarray(left, float), np.asarray(right, float)
    d = np.array([1.0, 0.0, 0.0])
    extra = np.zeros((n_extra, 3))
    return mesh_from(np.vstack([left - d, left + d, right - d, right + d, extra]))


def test_spec_validation():
    with pytest.raises(InvariantError):
        EyeCornerSpec(0, 1, 1, 2)
    with pytest.raises(IndexError):
        eye_centers(mesh_from(np.zeros((3, 3))), SPEC)


def test_eye_center_midpoint():
    m = mesh_from([[0, 0, 0], [2, 0, 0], [5, 1, 0], [7, 1, 0]])
    left, right = eye_centers(m, SPEC)
    np.testing.assert_array_equal(left, [1, 0, 0])
    np.testing.assert_array_equal(right, [6, 1, 0])


def test_eye_centers_symmetric():
    m = mesh_from([[-10, 0, 1], [-4, 0, 2], [4, 0, 2], [10, 0, 1]])
    left, right = eye_centers(m, SPEC)
    np.testing.assert_array_equal(left * [-1, 1, 1], right)


def test_eye_centers_random(rng):
    v = rng.normal(0, 50, (20, 3))
    spec = EyeCornerSpec(3, 7, 11, 2)
    left, right = eye_centers(mesh_from(v), spec)
    assert np.abs(left - (v[3] + v[7]) / 2).max() <= 1e-12
    assert np.abs(right - (v[11] + v[2]) / 2).max() <= 1e-12


@pytest.mark.parametrize("right,expected", [((3, 4, 0), 5.0), ((0, 0, 2), 2.0)])
def test_iod(right, expected):
    assert iod_3d(eyes_mesh((0, 0, 0), right), SPEC) == pytest.approx(expected, rel=1e-15)


def test_iod_zero():
    with pytest.raises(InvariantError):
        iod_3d(eyes_mesh((1, 1, 1), (1, 1, 1)), SPEC)


def test_iod_rotation_invariant(face, rng):
    mesh, spec = face
    r = random_rotation(rng)
    rotated = mesh.with_vertices(mesh.vertices @ r.T)
    assert iod_3d(rotated, spec) == pytest.approx(iod_3d(mesh, spec), abs=1e-9)


def test_mad_zero_for_identical(face):
    mesh, spec = face
    assert iod_mad_2d(mesh, mesh, spec) == 0.0


def test_mad_uniform_offset():
    gt = eyes_mesh((0, 0, 0), (100, 0, 0))
    pred = gt.with_vertices(gt.vertices + [1, 0, 0])
    assert iod_mad_2d(pred, gt, SPEC) == pytest.approx(1.0, rel=1e-12)
    assert format_percent(iod_mad_2d(pred, gt, SPEC)) == "1.0000%"


def test_mad_half_vertices_offset():
    gt = eyes_mesh((0, 0, 0), (100, 0, 0), n_extra=4)
    off = np.zeros((8, 3))
    off[::2] = [3, 4, 0]
    pred = gt.with_vertices(gt.vertices + off)
    assert iod_mad_2d(pred, gt, SPEC) == pytest.approx(2.5, rel=1e-12)


def test_mad_ignores_z():
    gt = eyes_mesh((0, 0, 0), (100, 0, 0))
    pred = gt.with_vertices(gt.vertices + [0, 0, 50])
    assert iod_mad_2d(pred, gt, SPEC) == 0.0


def test_mad_topology_mismatch():
    with pytest.raises(TopologyError):
        iod_mad_2d(mesh_from(np.zeros((9, 3))), mesh_from(np.zeros((8, 3))), SPEC)
    a = grid_mesh(3, 3)
    flipped = MeshTopology(9, a.topology.quads[::-1])
    with pytest.raises(TopologyError):
        iod_mad_2d(a, SurfaceMesh(a.vertices, flipped), SPEC)


@settings(max_examples=60, deadline=None)
@given(st.integers(4, 20), st.integers(2, 5), st.integers(0, 2**32 - 1))
def test_metrics_match_brute_force(n, k, seed):
    rng = np.random.default_rng(seed)
    spec = EyeCornerSpec(*rng.choice(n, 4, replace=False).tolist())
    base = rng.normal(0, 50, (n, 3))
    anns = [base + rng.normal(0, 3, (n, 3)) for _ in range(k)]
    for a, b in zip(anns, anns[1:]):
        assert iod_mad_2d(a, b, spec) == pytest.approx(mad_percent(a.tolist(), b.tolist(), spec.indices), rel=1e-13)
    assert inter_annotator_mad([mesh_from(a) for a in anns], spec) == pytest.approx(
        pairwise_mad([a.tolist() for a in anns], spec.indices), rel=1e-13)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 100), st.integers(0, 2**32 - 1))
def test_mad_scale_invariant(s, seed):
    rng = np.random.default_rng(seed)
    gt = rng.normal(0, 50, (12, 3))
    pred = gt + rng.normal(0, 2, (12, 3))
    a = iod_mad_2d(pred, gt, SPEC)
    assert iod_mad_2d(s * pred, s * gt, SPEC) == pytest.approx(a, rel=1e-9)
    assert a > 0


def test_inter_annotator_cases():
    gt = eyes_mesh((0, 0, 0), (100, 0, 0))
    shifted = gt.with_vertices(gt.vertices + [1, 0, 0])
    assert inter_annotator_mad([gt, gt, gt], SPEC) == 0.0
    assert inter_annotator_mad([gt, shifted], SPEC) == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(InvariantError):
        inter_annotator_mad([gt], SPEC)


def test_inter_annotator_three_by_hand():
    gt = eyes_mesh((0, 0, 0), (100, 0, 0))
    a = gt
    b = gt.with_vertices(gt.vertices + [1, 0, 0])
    c = gt.with_vertices(gt.vertices + [0, 3, 0])
    # Every member has IOD 100; pairwise mean distances are 1, 3 and sqrt(10).
    want = (2 * 1 + 2 * 3 + 2 * np.sqrt(10)) / 6
    assert inter_annotator_mad([a, b, c], SPEC) == pytest.approx(want, rel=1e-12)


def test_jitter_static_and_alternating():
    m = mesh_from(np.zeros((5, 3)))
    assert jitter_rms([m, m, m]) == 0.0
    seq = [m.with_vertices(np.tile([(-1) ** k, 0, 0], (5, 1))) for k in range(10)]
    assert jitter_rms(seq) == pytest.approx(2.0, rel=1e-15)
    with pytest.raises(InvariantError):
        jitter_rms([m])


def test_jitter_gaussian(rng):
    sigma = 1.5
    seq = [rng.normal(0, sigma, (50, 3)) for _ in range(1000)]
    assert jitter_rms(seq) == pytest.approx(sigma * np.sqrt(4), rel=0.1)
