import io
import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phaseqec.qstate import (
    LABELS,
    ProductOperatorSum,
    SpinAxis,
    check_density_matrix,
    coherence_decompose,
    coherence_project,
    dump_matrix,
    load_matrix,
    matrix_to_po,
    operator_matrix,
    partial_trace_to_spin1,
    po,
    po_to_matrix,
    pseudopure_input,
)

from conftest import IX, IY, IZ, ONE, kron, random_hermitian, random_state


def _same_sum(a: ProductOperatorSum, b: ProductOperatorSum, atol=1e-12):
    da, db = a.as_dict(), b.as_dict()
    for lab in set(da) | set(db):
        assert abs(da.get(lab, 0) - db.get(lab, 0)) <= atol, lab


def test_spin_axis_has_four_values_and_identity_is_unit():
    assert len(SpinAxis) == 4
    for axis in SpinAxis:
        assert np.allclose(SpinAxis.IDENTITY.matrix @ axis.matrix, axis.matrix)


def test_iz1_deviation_matrix():
    m = po_to_matrix(po({"z11": 1.0}), "deviation")
    assert np.allclose(m, np.diag([0.5] * 4 + [-0.5] * 4), atol=0)


def test_rho_a_four_terms():
    s = po({"z11": 0.25, "zz1": 0.5, "z1z": 0.5, "zzz": 1.0})
    expected = (0.25 * kron(IZ, ONE, ONE) + 0.5 * kron(IZ, IZ, ONE)
                + 0.5 * kron(IZ, ONE, IZ) + kron(IZ, IZ, IZ))
    assert np.allclose(po_to_matrix(s), expected, atol=1e-15)
    assert np.allclose(pseudopure_input(IZ), expected, atol=1e-15)


def test_empty_sum_conventions():
    empty = ProductOperatorSum()
    assert np.array_equal(po_to_matrix(empty, "deviation"), np.zeros((8, 8)))
    assert np.allclose(po_to_matrix(empty, "full"), np.eye(8) / 8)


def test_deviation_drops_unit_term_and_full_adds_eighth():
    s = po({"111": 0.3, "x11": 1.0})
    assert np.allclose(po_to_matrix(s, "deviation"), kron(IX, ONE, ONE))
    full = po_to_matrix(s, "full")
    assert np.isclose(np.trace(full), 1)
    assert np.allclose(po_to_matrix(s, "literal"), kron(IX, ONE, ONE) + 0.3 * np.eye(8))


def test_unknown_convention():
    with pytest.raises(ValueError):
        po_to_matrix(po({"x11": 1}), "bogus")


def test_duplicates_merge():
    s = ProductOperatorSum.from_terms([("x11", 1.0), ("x11", 0.5), ("zz1", 2.0)])
    assert s.as_dict() == {"x11": 1.5, "zz1": 2.0}


def test_matrix_to_po_single_term():
    s = matrix_to_po(kron(IX, ONE, ONE))
    assert s.as_dict() == pytest.approx({"x11": 1.0})


def test_matrix_to_po_rho_b():
    rho_b = 0.25 * (kron(IX, ONE, ONE) + kron(ONE, IX, ONE) + kron(ONE, ONE, IX)
                    + 4 * kron(IX, IX, IX))
    s = matrix_to_po(rho_b, atol=1e-14)
    _same_sum(s, po({"x11": 0.25, "1x1": 0.25, "11x": 0.25, "xxx": 1.0}))


def test_random_hermitian_round_trip(rng):
    for _ in range(100):
        m = random_hermitian(rng)
        s = matrix_to_po(m, atol=None)
        assert len(s) == 64
        assert np.allclose(po_to_matrix(s), m, atol=1e-12, rtol=0)


def test_non_hermitian_round_trip(rng):
    m = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    assert np.allclose(po_to_matrix(matrix_to_po(m)), m, atol=1e-12, rtol=0)


coefficients = st.floats(-10, 10, allow_nan=False)


@settings(max_examples=100, deadline=None)
@given(st.dictionaries(st.sampled_from(LABELS), coefficients, max_size=12))
def test_sum_round_trip(coeffs):
    s = po(coeffs)
    back = matrix_to_po(po_to_matrix(s), atol=None)
    _same_sum(back, s, atol=1e-12)


def test_basis_pairwise_orthogonal():
    mats = [operator_matrix(lab) for lab in LABELS]
    gram = np.array([[np.trace(a.conj().T @ b) for b in mats] for a in mats])
    off = gram - np.diag(np.diag(gram))
    assert np.max(np.abs(off)) == 0
    assert np.all(np.diag(gram).real > 0)


def test_coherence_zzz_is_zero_quantum():
    comps = coherence_decompose(kron(IZ, IZ, IZ))
    assert set(comps) == set(range(-3, 4))
    for n, c in comps.items():
        assert np.any(c) == (n == 0)


def test_coherence_unit_is_zero_quantum():
    comps = coherence_decompose(np.eye(8))
    assert all(not np.any(c) for n, c in comps.items() if n != 0)


def test_coherence_groups_of_xxx():
    xxx = 4 * kron(IX, IX, IX)
    comps = coherence_decompose(xxx)
    single = comps[1] + comps[-1]
    triple = comps[3] + comps[-3]
    assert not np.any(comps[0]) and not np.any(comps[2]) and not np.any(comps[-2])
    xyy = kron(IX, IY, IY) + kron(IY, IX, IY) + kron(IY, IY, IX)
    assert np.allclose(single, 0.25 * 4 * (3 * kron(IX, IX, IX) + xyy))
    assert np.allclose(triple, 0.25 * 4 * (kron(IX, IX, IX) - xyy))


def test_coherence_order_sign_convention():
    # |0><1| on one spin raises m_z: order +1
    raising = np.array([[0, 1], [0, 0]], dtype=complex)
    comps = coherence_decompose(kron(raising, ONE, ONE))
    assert np.any(comps[1]) and not np.any(comps[-1])


def test_coherence_entries_match_order(rng):
    m = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    comps = coherence_decompose(m)
    pop = [bin(b).count("1") for b in range(8)]
    for n, c in comps.items():
        for b, bp in itertools.product(range(8), repeat=2):
            if pop[bp] - pop[b] != n:
                assert c[b, bp] == 0


def test_coherence_components_sum_exactly(rng):
    for _ in range(100):
        m = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
        total = sum(coherence_decompose(m).values())
        assert np.max(np.abs(total - m)) <= 1e-14


def test_coherence_project_subset():
    xxx = kron(IX, IX, IX)
    parts = coherence_decompose(xxx)
    assert np.array_equal(coherence_project(xxx, [1, -1]), parts[1] + parts[-1])


def _partial_trace_loop(rho):
    out = np.zeros((2, 2), dtype=complex)
    for a, b in itertools.product(range(2), repeat=2):
        for r in range(4):
            out[a, b] += rho[a * 4 + r, b * 4 + r]
    return out


def test_partial_trace_matches_loop(rng):
    m = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
    assert np.allclose(partial_trace_to_spin1(m), _partial_trace_loop(m))


def test_partial_trace_of_product(rng):
    for _ in range(100):
        a = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        b = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        assert np.allclose(partial_trace_to_spin1(np.kron(a, b)), a * np.trace(b), atol=1e-12)


def test_partial_trace_of_pseudopure_iz():
    assert np.allclose(partial_trace_to_spin1(pseudopure_input(IZ)), IZ)


def test_partial_trace_maximally_mixed():
    assert np.allclose(partial_trace_to_spin1(np.eye(8) / 8), np.eye(2) / 2)


def test_pseudopure_unit_input():
    rho = pseudopure_input(ONE / 2)
    anc = np.diag([1, 0]).astype(complex)
    assert np.allclose(rho, kron(ONE / 2, anc, anc))
    check_density_matrix(rho)


def test_pseudopure_ix_expansion():
    # I_x (1/2 + I_z)(1/2 + I_z) expanded by hand
    s = matrix_to_po(pseudopure_input(IX), atol=1e-14)
    _same_sum(s, po({"x11": 0.25, "xz1": 0.5, "x1z": 0.5, "xzz": 1.0}))
    assert all(t.label[0] == "x" for t in s.terms)


def test_pseudopure_rejects_bad_shape():
    with pytest.raises(ValueError):
        pseudopure_input(np.eye(3))


def test_check_density_matrix(rng):
    check_density_matrix(random_state(rng))
    check_density_matrix(kron(IZ, ONE, ONE), deviation=True)
    with pytest.raises(ValueError, match="trace"):
        check_density_matrix(2 * random_state(rng))
    with pytest.raises(ValueError, match="Hermitian"):
        check_density_matrix(np.triu(np.ones((8, 8))) / 8)
    with pytest.raises(ValueError, match="negative"):
        check_density_matrix(np.diag([1.5, -0.5, 0, 0, 0, 0, 0, 0]))
    with pytest.raises(ValueError, match="trace"):
        check_density_matrix(np.eye(8), deviation=True)


def test_dump_load_round_trip(rng):
    m = random_state(rng)
    text = dump_matrix(m)
    lines = text.strip().splitlines()
    assert len(lines) == 8 and all(len(ln.split()) == 8 for ln in lines)
    assert np.array_equal(load_matrix(text), m)
    buf = io.StringIO()
    dump_matrix(m, buf)
    buf.seek(0)
    assert np.array_equal(load_matrix(buf), m)


def test_bad_label():
    with pytest.raises(ValueError):
        operator_matrix("xq1")
