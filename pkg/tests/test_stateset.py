import numpy as np
import pytest

from conftest import random_parameters
from opqkd import (
    DominoLayout,
    InvalidSetError,
    SetParameters,
    StateSet,
    Tile,
    UnsupportedDimensionError,
    basis_ket,
    bob_basis,
    born_probabilities,
    build_3x3,
    build_symmetric,
    check_conditions,
    inner,
    is_four_fold_symmetric,
    states_equivalent,
    states_from_tiles,
    stateset_from_text,
    stateset_to_text,
)


def assert_complete_orthogonal(state_set, ortho_tol=1e-10, complete_tol=1e-9):
    joints = state_set.joint_matrix
    gram = joints.conj() @ joints.T
    off = gram - np.diag(np.diag(gram))
    assert np.max(np.abs(off)) < ortho_tol
    assert np.max(np.abs(gram - np.eye(len(state_set)))) < complete_tol


def test_set_parameters_validation():
    SetParameters.symmetric()
    with pytest.raises(ValueError):
        SetParameters(1.0, 1.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0)


def test_set_parameters_accepts_complex():
    p = SetParameters(0.6 + 0.8j, 0.0, 1.0, 0.0, 0.0, 1.0j, 0.8, 0.6j)
    assert p.as_tuple()[0] == 0.6 + 0.8j


def test_build_3x3_structure():
    s = build_3x3()
    assert s.n == 3 and len(s) == 9
    # the corner state is a plain product of basis vectors
    assert states_equivalent(s[8].ket_a, basis_ket(3, 0))
    assert states_equivalent(s[8].ket_b, basis_ket(3, 0))
    # the first pair rides on A = |1>
    assert states_equivalent(s[0].ket_a, basis_ket(3, 1))
    assert states_equivalent(s[1].ket_a, basis_ket(3, 1))
    assert_complete_orthogonal(s)


@pytest.mark.parametrize("seed", range(8))
def test_build_3x3_random_parameters_orthogonal_complete(seed):
    rng = np.random.default_rng(seed)
    s = build_3x3(random_parameters(rng))
    for i in range(9):
        for j in range(i + 1, 9):
            assert abs(inner(s[i].joint(), s[j].joint())) < 1e-10
    assert_complete_orthogonal(s)


def test_build_3x3_pair_relations():
    rng = np.random.default_rng(123)
    p = random_parameters(rng)
    s = build_3x3(p)
    # partner states within a tile are orthogonal on the varying subsystem
    assert abs(inner(s[0].ket_b, s[1].ket_b)) < 1e-12
    assert abs(inner(s[2].ket_a, s[3].ket_a)) < 1e-12
    assert abs(inner(s[4].ket_b, s[5].ket_b)) < 1e-12
    assert abs(inner(s[6].ket_a, s[7].ket_a)) < 1e-12
    assert s[0].ket_b.amps[1] == pytest.approx(p.a)
    assert s[0].ket_b.amps[0] == pytest.approx(p.b)


@pytest.mark.parametrize("n", [3, 4, 5, 6, 7, 8, 9])
def test_build_symmetric_valid(n):
    s = build_symmetric(n)
    assert s.n == n and len(s) == n * n
    assert_complete_orthogonal(s)
    assert is_four_fold_symmetric(s.layout)
    assert check_conditions(s).passed


@pytest.mark.parametrize("n", [0, 1, 2])
def test_build_symmetric_unsupported(n):
    with pytest.raises(UnsupportedDimensionError):
        build_symmetric(n)


def test_symmetric_tiles_never_span_full_row():
    for n in (4, 5, 8, 9):
        layout = build_symmetric(n).layout
        assert max(len(t) for t in layout.tiles) == n - 1
        singles = [t for t in layout.tiles if len(t) == 1]
        assert len(singles) == (1 if n % 2 else 4)


def test_tile_validation():
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    Tile("row", 0, ((0, 0), (0, 1)), h, (0, 1))
    with pytest.raises(ValueError):
        Tile("row", 0, ((0, 0), (1, 1)), h, (0, 1))  # leaves the row
    with pytest.raises(ValueError):
        Tile("col", 0, ((0, 0), (1, 1)), h, (0, 1))  # leaves the column
    with pytest.raises(ValueError):
        Tile("row", 0, ((0, 0), (0, 1)), np.eye(2) * 2.0, (0, 1))  # not unitary
    with pytest.raises(ValueError):
        Tile("diag", 0, ((0, 0),), np.eye(1), (0,))
    with pytest.raises(ValueError):
        Tile("singleton", 1, ((0, 0),), np.eye(1), (0,))
    with pytest.raises(ValueError):
        Tile("row", 0, ((0, 0), (0, 0)), h, (0, 1))  # repeated cell


def test_layout_validation():
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    good = build_symmetric(3).layout
    DominoLayout(3, good.tiles)
    # a 3-cell run would fill a whole row of a 3x3 grid
    f3 = np.exp(2j * np.pi * np.outer(np.arange(3), np.arange(3)) / 3) / np.sqrt(3)
    with pytest.raises(ValueError):
        DominoLayout(3, (Tile("row", 0, ((0, 0), (0, 1), (0, 2)), f3, (0, 1, 2)),) + good.tiles[1:])
    with pytest.raises(ValueError):
        DominoLayout(3, good.tiles[:-1])  # hole in the cover
    overlapping = (Tile("row", 1, ((1, 1), (1, 0)), h, (0, 1)),) + good.tiles
    with pytest.raises(ValueError):
        DominoLayout(3, overlapping)
    relabeled = (Tile("singleton", 1, ((1, 1),), np.eye(1), (0,)),) + good.tiles[:-1]
    with pytest.raises(ValueError):
        DominoLayout(3, relabeled)  # label 0 hosted twice, label 8 missing


def test_stateset_rejects_layout_mismatch():
    s3 = build_symmetric(3)
    other = build_3x3()
    with pytest.raises(InvalidSetError):
        StateSet(other.states, s3.layout)


def test_stateset_rejects_wrong_order():
    s3 = build_symmetric(3)
    shuffled = s3.states[1:] + s3.states[:1]
    with pytest.raises(InvalidSetError):
        StateSet(shuffled, s3.layout)


def test_states_from_tiles_ordering():
    layout = build_symmetric(5).layout
    states = states_from_tiles(5, layout.tiles)
    assert [st.index for st in states] == list(range(25))


def test_four_fold_symmetry_of_parameterized_layout():
    # not a literal quarter-turn fixture, but one after relabeling the axes
    layout = build_3x3().layout
    rot = {(b, 2 - a) for t in layout.tiles for a, b in t.cells if len(t) == 2}
    assert rot != {c for t in layout.tiles for c in t.cells if len(t) == 2}
    assert is_four_fold_symmetric(layout)


def test_four_fold_symmetry_respects_relabeling():
    rng = np.random.default_rng(17)
    layout = build_symmetric(5).layout
    for _ in range(3):
        sigma_a = rng.permutation(5)
        sigma_b = rng.permutation(5)
        tiles = []
        for t in layout.tiles:
            cells = tuple((int(sigma_a[a]), int(sigma_b[b])) for a, b in t.cells)
            if t.orientation == "row":
                fixed = int(sigma_a[t.fixed_index])
            elif t.orientation == "col":
                fixed = int(sigma_b[t.fixed_index])
            else:
                fixed = cells[0][0]
            tiles.append(Tile(t.orientation, fixed, cells, t.amplitudes, t.state_indices))
        assert is_four_fold_symmetric(DominoLayout(5, tuple(tiles)))


def test_four_fold_symmetry_counterexample():
    # split one pair into singletons: rows and columns can no longer swap
    h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
    tiles = (
        Tile("row", 1, ((1, 1), (1, 0)), h, (0, 1)),
        Tile("col", 2, ((1, 2), (0, 2)), h, (2, 3)),
        Tile("row", 2, ((2, 0), (2, 2)), h, (4, 5)),
        Tile("singleton", 0, ((0, 1),), np.eye(1), (6,)),
        Tile("singleton", 2, ((2, 1),), np.eye(1), (7,)),
        Tile("singleton", 0, ((0, 0),), np.eye(1), (8,)),
    )
    assert not is_four_fold_symmetric(DominoLayout(3, tiles))


def test_check_conditions_degenerate_family():
    s = build_3x3(SetParameters(1, 0, 1, 0, 1, 0, 1, 0))
    report = check_conditions(s)
    assert not report.passed
    assert len(report.failures()) == 18  # every state, both subsystems


def test_check_conditions_passes_generic():
    rng = np.random.default_rng(31)
    report = check_conditions(build_3x3(random_parameters(rng)))
    assert report.passed
    assert report.failures() == ()


def test_bob_basis_identifies_each_state():
    for n in (3, 4):
        s = build_symmetric(n)
        basis = bob_basis(s)
        for st in s:
            probs = born_probabilities(st.joint(), basis)
            expected = np.zeros(n * n)
            expected[st.index] = 1.0
            assert np.allclose(probs, expected, atol=1e-12)


def test_serialization_round_trip():
    rng = np.random.default_rng(41)
    s = build_3x3(random_parameters(rng))
    text = stateset_to_text(s)
    back = stateset_from_text(text)
    assert back.n == s.n
    for a, b in zip(s.states, back.states):
        assert np.array_equal(a.ket_a.amps, b.ket_a.amps)
        assert np.array_equal(a.ket_b.amps, b.ket_b.amps)
    assert stateset_to_text(back) == text


def test_serialization_rejects_corruption():
    text = stateset_to_text(build_symmetric(3))
    with pytest.raises(InvalidSetError):
        stateset_from_text(text.replace('"opqkd-stateset-1"', '"something-else"'))
    with pytest.raises(InvalidSetError):
        stateset_from_text("{not json")
    broken = text.replace("0.7071067811865475", "0.9071067811865475", 2)
    with pytest.raises((InvalidSetError, ValueError)):
        stateset_from_text(broken)
