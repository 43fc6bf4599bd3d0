import numpy as np
import pytest

from opqkd import (
    Ket,
    MeasurementBasis,
    RngStream,
    basis_ket,
    born_probabilities,
    canonical_phase,
    inner,
    normalize,
    projective_measure,
    states_equivalent,
    states_orthogonal,
    tensor,
)


def random_ket(rng, dim):
    return normalize(rng.standard_normal(dim) + 1j * rng.standard_normal(dim))


def random_basis(rng, dim):
    m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, _ = np.linalg.qr(m)
    return MeasurementBasis([Ket(row) for row in q])


def test_ket_requires_normalization():
    with pytest.raises(ValueError):
        Ket([1.0, 1.0])
    Ket([1.0, 0.0])


def test_ket_rejects_scalars_and_nonfinite():
    with pytest.raises(ValueError):
        Ket([1.0])
    with pytest.raises(ValueError):
        Ket([np.nan, 0.0])
    with pytest.raises(ValueError):
        normalize([0.0, 0.0])


def test_ket_is_immutable():
    k = basis_ket(3, 0)
    with pytest.raises(AttributeError):
        k.amps = np.zeros(3)
    with pytest.raises(ValueError):
        k.amps[0] = 2.0  # read-only buffer


def test_normalize_unit_norm():
    rng = np.random.default_rng(7)
    for _ in range(20):
        k = random_ket(rng, 5)
        assert abs(np.linalg.norm(k.amps) - 1.0) < 1e-12


def test_inner_conjugate_linear():
    rng = np.random.default_rng(11)
    x, y = random_ket(rng, 4), random_ket(rng, 4)
    assert inner(x, y) == pytest.approx(np.conj(inner(y, x)))
    with pytest.raises(ValueError):
        inner(random_ket(rng, 3), random_ket(rng, 4))


@pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
def test_tensor_inner_factorizes(seed):
    rng = np.random.default_rng(seed)
    a, c = random_ket(rng, 3), random_ket(rng, 3)
    b, d = random_ket(rng, 4), random_ket(rng, 4)
    lhs = inner(tensor(a, b), tensor(c, d))
    rhs = inner(a, c) * inner(b, d)
    assert abs(lhs - rhs) < 1e-12


def test_tensor_index_convention():
    # first factor is the major index
    joint = tensor(basis_ket(3, 1), basis_ket(4, 2))
    expected = np.zeros(12)
    expected[1 * 4 + 2] = 1.0
    assert np.allclose(joint.amps, expected)


def test_canonical_phase_leading_amplitude():
    rng = np.random.default_rng(3)
    for _ in range(20):
        k = random_ket(rng, 4)
        rotated = Ket(k.amps * np.exp(0.37j))
        fixed = canonical_phase(rotated)
        lead = next(z for z in fixed.amps if abs(z) > 1e-12)
        assert abs(lead.imag) < 1e-12 and lead.real >= 0.0
        assert states_equivalent(fixed, k)


def test_equivalence_and_orthogonality():
    k = basis_ket(3, 0)
    assert states_equivalent(k, Ket(k.amps * np.exp(1.2j)))
    assert states_orthogonal(k, basis_ket(3, 2))
    assert not states_equivalent(k, basis_ket(3, 1))
    assert not states_orthogonal(k, normalize([1.0, 1.0, 0.0]))
    assert not states_equivalent(k, basis_ket(4, 0))


def test_basis_rejects_bad_vectors():
    with pytest.raises(ValueError):
        MeasurementBasis([basis_ket(3, 0), basis_ket(3, 0), basis_ket(3, 2)])
    with pytest.raises(ValueError):
        MeasurementBasis([basis_ket(3, 0), basis_ket(3, 1)])  # incomplete
    with pytest.raises(ValueError):
        MeasurementBasis([basis_ket(3, 0), basis_ket(3, 1), basis_ket(2, 0)])


def test_born_probabilities_sum_to_one():
    rng = np.random.default_rng(5)
    for dim in (2, 3, 5, 9):
        basis = random_basis(rng, dim)
        state = random_ket(rng, dim)
        probs = born_probabilities(state, basis)
        assert np.all(probs >= 0.0)
        assert abs(probs.sum() - 1.0) < 1e-10


def test_born_probabilities_dimension_mismatch():
    with pytest.raises(ValueError):
        born_probabilities(basis_ket(4, 0), MeasurementBasis.computational(3))


def test_projective_measure_deterministic_on_eigenstate():
    basis = MeasurementBasis.computational(5)
    rng = RngStream(1, 0)
    for k in range(5):
        idx, collapsed = projective_measure(basis_ket(5, k), basis, rng)
        assert idx == k
        assert states_equivalent(collapsed, basis_ket(5, k))


def test_projective_measure_matches_born_frequencies():
    rng = np.random.default_rng(19)
    basis = random_basis(rng, 3)
    state = random_ket(rng, 3)
    probs = born_probabilities(state, basis)
    stream = RngStream(99, 0)
    draws = 20000
    counts = np.zeros(3)
    for _ in range(draws):
        idx, _ = projective_measure(state, basis, stream)
        counts[idx] += 1
    assert np.allclose(counts / draws, probs, atol=0.02)


def test_projective_measure_collapse_is_basis_vector():
    rng = np.random.default_rng(23)
    basis = random_basis(rng, 4)
    idx, collapsed = projective_measure(random_ket(rng, 4), basis, RngStream(5, 1))
    assert states_equivalent(collapsed, basis[idx])
    lead = next(z for z in collapsed.amps if abs(z) > 1e-12)
    assert lead.real >= 0.0 and abs(lead.imag) < 1e-12


def test_rngstream_reproducible():
    a = RngStream(42, 7)
    b = RngStream(42, 7)
    assert [a.integers(100) for _ in range(10)] == [b.integers(100) for _ in range(10)]
    assert a.random() == b.random()


def test_rngstream_streams_differ():
    a = RngStream(42, 0)
    b = RngStream(42, 1)
    assert [a.integers(1000) for _ in range(8)] != [b.integers(1000) for _ in range(8)]


def test_rngstream_draw_sequence_independent_of_interleaving():
    # consuming one stream must not shift another
    a = RngStream(3, 5)
    expected = [a.random() for _ in range(5)]
    b = RngStream(3, 5)
    noise = RngStream(3, 6)
    got = []
    for _ in range(5):
        noise.random()
        got.append(b.random())
    assert got == expected


def test_rngstream_validation():
    with pytest.raises(ValueError):
        RngStream(-1)
    with pytest.raises(ValueError):
        RngStream(0, -2)
    with pytest.raises(ValueError):
        RngStream(2**64)
    with pytest.raises(ValueError):
        RngStream(0).integers(0)


def test_rngstream_permutation_and_spawn():
    stream = RngStream(8, 0)
    perm = stream.permutation(50)
    assert sorted(perm.tolist()) == list(range(50))
    child = stream.spawn(9)
    assert child.seed == 8 and child.stream_id == 9
