"""Shared test helpers: random set parameters and an independent
brute-force enumeration of attack survival probabilities.

The enumerator below deliberately avoids the library's analysis code: it
walks the full outcome tree with explicit joint-space vectors, so it can
serve as an oracle for the closed-form and formula-based paths.
"""
from __future__ import annotations

import math

import numpy as np

from opqkd import SetParameters


def random_unit_pair(rng: np.random.Generator) -> tuple[complex, complex]:
    x = rng.standard_normal(4)
    a = complex(x[0], x[1])
    b = complex(x[2], x[3])
    norm = math.sqrt(abs(a) ** 2 + abs(b) ** 2)
    return a / norm, b / norm


def random_parameters(rng: np.random.Generator) -> SetParameters:
    (a, b), (c, d), (e, f), (g, h) = (random_unit_pair(rng) for _ in range(4))
    return SetParameters(a, b, c, d, e, f, g, h)


def _eve_b_vectors(states, m: int, n: int) -> list[np.ndarray]:
    # Distinct B-parts of the states whose A-part overlaps |m>, then a
    # deterministic completion; mirrors the attack definition, not the code.
    vecs: list[np.ndarray] = []
    for st in states:
        if abs(st.ket_a.amps[m]) < 1e-12:
            continue
        v = st.ket_b.amps
        if any(abs(abs(np.vdot(u, v)) - 1.0) < 1e-9 for u in vecs):
            continue
        vecs.append(np.array(v))
    for k in range(n):
        if len(vecs) == n:
            break
        e = np.zeros(n, dtype=complex)
        e[k] = 1.0
        for u in vecs:
            e = e - np.vdot(u, e) * u
        norm = np.linalg.norm(e)
        if norm > 1e-6:
            vecs.append(e / norm)
    assert len(vecs) == n
    return vecs


def survival_by_enumeration(state_set, variant: str) -> float:
    """Probability that the receiver's outcome equals the prepared label,
    by summing every branch of the attack's outcome tree."""
    n = state_set.n
    states = list(state_set)
    joint = [np.kron(st.ket_a.amps, st.ket_b.amps) for st in states]
    basis_cache = {}
    total = 0.0
    for i, st in enumerate(states):
        a, b = st.ket_a.amps, st.ket_b.amps
        acc = 0.0
        if variant == "intercept":
            for m in range(n):
                p_m = abs(a[m]) ** 2
                if p_m < 1e-15:
                    continue
                if m not in basis_cache:
                    basis_cache[m] = _eve_b_vectors(states, m, n)
                e_m = np.zeros(n, dtype=complex)
                e_m[m] = 1.0
                for v in basis_cache[m]:
                    p_v = abs(np.vdot(v, b)) ** 2
                    if p_v < 1e-30:
                        continue
                    forwarded = np.kron(e_m, v)
                    p_bob = abs(np.vdot(joint[i], forwarded)) ** 2
                    acc += p_m * p_v * p_bob
        elif variant == "complementary":
            for l in range(n):
                p_l = abs(b[l]) ** 2
                if p_l < 1e-30:
                    continue
                e_l = np.zeros(n, dtype=complex)
                e_l[l] = 1.0
                forwarded = np.kron(a, e_l)
                p_bob = abs(np.vdot(joint[i], forwarded)) ** 2
                acc += p_l * p_bob
        elif variant == "substitute":
            for r in range(n):
                e_r = np.zeros(n, dtype=complex)
                e_r[r] = 1.0
                for j in range(len(states)):
                    p_eve = abs(np.vdot(joint[j], joint[i])) ** 2
                    if p_eve < 1e-30:
                        continue
                    forwarded = np.kron(e_r, states[j].ket_b.amps)
                    p_bob = abs(np.vdot(joint[i], forwarded)) ** 2
                    acc += p_eve * p_bob / n
        else:
            raise ValueError(f"no enumeration for {variant!r}")
        total += acc
    return total / len(states)
