"""Three-spin density matrices and the product-operator formalism.

States are plain ``(8, 8)`` complex numpy arrays in the basis
``|b1 b2 b3>`` with spin 1 the most significant bit, so the matrix of a
product ``A(1) B(2) C(3)`` is ``kron(A, B, C)``.  Single-spin operators
follow ``I_u = sigma_u / 2``.

Product-operator sums are keyed by a three-character axis label, one
character per spin from ``"1xyz"`` (``"1"`` is the identity).  For example
``"zz1"`` is ``I_z(1) I_z(2)`` and ``"111"`` is the unit operator.
"""

from __future__ import annotations

import enum
import io
import itertools
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Mapping

import numpy as np

NSPIN = 3
DIM = 2 ** NSPIN

ALGEBRA_ATOL = 1e-12
POSITIVITY_ATOL = 1e-10


class SpinAxis(enum.Enum):
    IDENTITY = "1"
    X = "x"
    Y = "y"
    Z = "z"

    @property
    def matrix(self) -> np.ndarray:
        return _SINGLE[self.value]


_SINGLE = {
    "1": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex) / 2,
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex) / 2,
    "z": np.array([[1, 0], [0, -1]], dtype=complex) / 2,
}
for _m in _SINGLE.values():
    _m.setflags(write=False)

UNIT_LABEL = "1" * NSPIN
LABELS: tuple[str, ...] = tuple("".join(p) for p in itertools.product("1xyz", repeat=NSPIN))


def _label(axes) -> str:
    if isinstance(axes, str):
        label = axes.lower()
    else:
        label = "".join(SpinAxis(a).value if not isinstance(a, SpinAxis) else a.value for a in axes)
    if len(label) != NSPIN or any(ch not in "1xyz" for ch in label):
        raise ValueError(f"bad product-operator label {axes!r}")
    return label


def operator_matrix(axes) -> np.ndarray:
    """Kronecker-product matrix of a single product operator (unit coefficient)."""
    label = _label(axes)
    return reduce(np.kron, (_SINGLE[ch] for ch in label))


def spin_operator(axis: str, spin: int) -> np.ndarray:
    """``I_axis`` acting on ``spin`` (1-based) as an 8x8 matrix."""
    label = ["1"] * NSPIN
    label[spin - 1] = axis
    return operator_matrix("".join(label))


_BASIS = np.stack([operator_matrix(lab) for lab in LABELS])
_BASIS_NORM = np.einsum("kij,kij->k", _BASIS.conj(), _BASIS).real
_BASIS.setflags(write=False)


@dataclass(frozen=True)
class ProductOperatorTerm:
    axes: tuple[SpinAxis, SpinAxis, SpinAxis]
    coefficient: complex | float

    @property
    def label(self) -> str:
        return "".join(a.value for a in self.axes)

    def matrix(self) -> np.ndarray:
        return self.coefficient * operator_matrix(self.label)


@dataclass(frozen=True)
class ProductOperatorSum:
    """Weighted sum of product operators.

    ``terms`` is kept canonical: one entry per axis label, in the fixed
    lexicographic label order.  Build one with :meth:`from_terms` or
    :meth:`from_dict`; both merge duplicates by adding coefficients.
    """

    terms: tuple[ProductOperatorTerm, ...] = ()

    @classmethod
    def from_dict(cls, coeffs: Mapping[str, complex | float]) -> "ProductOperatorSum":
        return cls.from_terms(coeffs.items())

    @classmethod
    def from_terms(cls, pairs: Iterable) -> "ProductOperatorSum":
        merged: dict[str, complex] = {}
        for item in pairs:
            if isinstance(item, ProductOperatorTerm):
                lab, c = item.label, item.coefficient
            else:
                lab, c = item
                lab = _label(lab)
            merged[lab] = merged.get(lab, 0) + c
        order = {lab: i for i, lab in enumerate(LABELS)}
        terms = tuple(
            ProductOperatorTerm(tuple(SpinAxis(ch) for ch in lab), merged[lab])
            for lab in sorted(merged, key=order.__getitem__)
        )
        return cls(terms)

    def as_dict(self) -> dict[str, complex | float]:
        return {t.label: t.coefficient for t in self.terms}

    def coefficient(self, axes) -> complex | float:
        return self.as_dict().get(_label(axes), 0.0)

    def dropping_small(self, atol: float = ALGEBRA_ATOL) -> "ProductOperatorSum":
        return ProductOperatorSum(tuple(t for t in self.terms if abs(t.coefficient) > atol))

    def __add__(self, other: "ProductOperatorSum") -> "ProductOperatorSum":
        return ProductOperatorSum.from_terms(self.terms + other.terms)

    def __mul__(self, scalar) -> "ProductOperatorSum":
        return ProductOperatorSum(
            tuple(ProductOperatorTerm(t.axes, t.coefficient * scalar) for t in self.terms)
        )

    __rmul__ = __mul__

    def __len__(self) -> int:
        return len(self.terms)


def po(coeffs: Mapping[str, complex | float]) -> ProductOperatorSum:
    """Shorthand for :meth:`ProductOperatorSum.from_dict`."""
    return ProductOperatorSum.from_dict(coeffs)


def po_to_matrix(s: ProductOperatorSum, convention: str = "literal") -> np.ndarray:
    """Matrix realization of a product-operator sum.

    ``convention``:

    * ``"literal"``: every term, the unit term included, as written.
    * ``"deviation"``: the unit term is dropped, leaving the traceless part.
    * ``"full"``: deviation part plus ``1/8`` times the unit matrix, so the
      result has unit trace.
    """
    if convention not in ("literal", "deviation", "full"):
        raise ValueError(f"unknown convention {convention!r}")
    out = np.zeros((DIM, DIM), dtype=complex)
    for t in s.terms:
        if convention != "literal" and t.label == UNIT_LABEL:
            continue
        out += t.matrix()
    if convention == "full":
        out += np.eye(DIM) / DIM
    return out


def matrix_to_po(rho: np.ndarray, atol: float | None = 0.0) -> ProductOperatorSum:
    """Hilbert-Schmidt projection of an 8x8 matrix onto the 64 product operators.

    Coefficients come out real when ``rho`` is Hermitian (to 1e-12), complex
    otherwise.  Terms with ``|c| <= atol`` are dropped; pass ``atol=None`` to
    keep all 64.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (DIM, DIM):
        raise ValueError(f"expected an {DIM}x{DIM} matrix, got {rho.shape}")
    coeffs = np.einsum("kij,ij->k", _BASIS.conj(), rho) / _BASIS_NORM
    if np.allclose(rho, rho.conj().T, atol=ALGEBRA_ATOL, rtol=0):
        coeffs = coeffs.real
    pairs = [
        (lab, c.item())
        for lab, c in zip(LABELS, coeffs)
        if atol is None or abs(c) > atol
    ]
    return ProductOperatorSum.from_terms(pairs)


# z angular momentum of each basis state in units of hbar: +1/2 per |0>
_POPCOUNT = np.array([bin(b).count("1") for b in range(DIM)])
COHERENCE_ORDER = _POPCOUNT[None, :] - _POPCOUNT[:, None]
COHERENCE_ORDER.setflags(write=False)
ORDERS = tuple(range(-NSPIN, NSPIN + 1))


def coherence_decompose(rho: np.ndarray) -> dict[int, np.ndarray]:
    """Split ``rho`` into its coherence-order components ``n = -3 .. 3``.

    Entry ``(b, b')`` belongs to order ``n = M(b) - M(b')`` where ``M`` is the
    total z angular momentum in units of hbar (``|0>`` counts +1/2).  So
    ``|0><1|`` on one spin has order +1.  The components sum exactly to
    ``rho``; individual components are generally not Hermitian.
    """
    rho = np.asarray(rho, dtype=complex)
    return {n: np.where(COHERENCE_ORDER == n, rho, 0) for n in ORDERS}


def coherence_project(rho: np.ndarray, orders: Iterable[int]) -> np.ndarray:
    """Keep only the entries whose coherence order is in ``orders``."""
    return np.where(np.isin(COHERENCE_ORDER, list(orders)), np.asarray(rho, dtype=complex), 0)


def partial_trace_to_spin1(rho: np.ndarray) -> np.ndarray:
    """Reduced 2x2 matrix of spin 1 (trace over spins 2 and 3)."""
    rho = np.asarray(rho)
    return np.trace(rho.reshape(2, 4, 2, 4), axis1=1, axis2=3)


ANCILLA_GROUND = np.eye(2, dtype=complex) / 2 + _SINGLE["z"]


def pseudopure_input(rho1: np.ndarray) -> np.ndarray:
    """``rho1 (1/2 + I_z(2)) (1/2 + I_z(3))``: data on spin 1, ancillas in |0>."""
    rho1 = np.asarray(rho1, dtype=complex)
    if rho1.shape != (2, 2):
        raise ValueError(f"rho1 must be 2x2, got {rho1.shape}")
    return np.kron(rho1, np.kron(ANCILLA_GROUND, ANCILLA_GROUND))


def check_density_matrix(rho: np.ndarray, deviation: bool = False) -> None:
    """Raise ``ValueError`` unless ``rho`` satisfies the state invariants.

    Full-trace states must be Hermitian with unit trace and eigenvalues
    above ``-1e-10``; deviation states must be Hermitian and traceless.
    """
    rho = np.asarray(rho)
    if rho.shape != (DIM, DIM):
        raise ValueError(f"expected an {DIM}x{DIM} matrix, got {rho.shape}")
    if not np.allclose(rho, rho.conj().T, atol=ALGEBRA_ATOL, rtol=0):
        raise ValueError("matrix is not Hermitian")
    tr = np.trace(rho)
    if deviation:
        if abs(tr) > ALGEBRA_ATOL:
            raise ValueError(f"deviation matrix has trace {tr:.3g}")
        return
    if abs(tr - 1) > ALGEBRA_ATOL:
        raise ValueError(f"density matrix has trace {tr:.3g}")
    lowest = np.linalg.eigvalsh(rho).min()
    if lowest < -POSITIVITY_ATOL:
        raise ValueError(f"density matrix has negative eigenvalue {lowest:.3g}")


def dump_matrix(rho: np.ndarray, fh=None) -> str | None:
    """Write ``rho`` as text rows of ``re,im`` pairs separated by spaces.

    Values use ``repr`` so :func:`load_matrix` round-trips exactly.  With no
    file handle the text is returned.
    """
    rho = np.asarray(rho, dtype=complex)
    lines = [
        " ".join(f"{float(z.real)!r},{float(z.imag)!r}" for z in row) for row in rho
    ]
    text = "\n".join(lines) + "\n"
    if fh is None:
        return text
    fh.write(text)
    return None


def load_matrix(source) -> np.ndarray:
    """Inverse of :func:`dump_matrix`; accepts text, a path-like or a file."""
    if isinstance(source, str) and "," in source:
        fh = io.StringIO(source)
    elif hasattr(source, "read"):
        fh = source
    else:
        with open(source, encoding="utf-8") as f:
            return load_matrix(f)
    rows = []
    for line in fh:
        line = line.strip()
        if not line:
            continue
        row = []
        for pair in line.split():
            re_, im_ = pair.split(",")
            row.append(complex(float(re_), float(im_)))
        rows.append(row)
    return np.array(rows, dtype=complex)
