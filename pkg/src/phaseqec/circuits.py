"""Ideal gates on three spins and the phase-code network.

Rotations use ``R_u(theta) = exp(-i theta I_u)`` with ``theta`` in degrees,
so ``RY 90`` takes ``|0>`` to ``|+>``.  Gates are applied to density
matrices by conjugation, ``U rho U^dagger``.

Text format, one gate per line (``#`` starts a comment)::

    RZ 180 1        # angle (degrees), spin
    CNOT 1 2        # control, target
    TOFFOLI 2 3 1   # control, control, target
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce

import numpy as np

from .qstate import DIM, NSPIN, operator_matrix

ROTATIONS = ("RX", "RY", "RZ")
KINDS = ROTATIONS + ("CNOT", "TOFFOLI")
_ARITY = {"RX": 1, "RY": 1, "RZ": 1, "CNOT": 2, "TOFFOLI": 3}


class CircuitParseError(ValueError):
    def __init__(self, lineno: int, line: str, reason: str):
        super().__init__(f"line {lineno}: {reason}: {line.strip()!r}")
        self.lineno = lineno


def _bits(b: int) -> list[int]:
    return [(b >> (NSPIN - 1 - k)) & 1 for k in range(NSPIN)]


def _index(bits) -> int:
    return reduce(lambda acc, x: acc * 2 + x, bits, 0)


def _permutation(flip_if) -> np.ndarray:
    u = np.zeros((DIM, DIM), dtype=complex)
    for b in range(DIM):
        u[_index(flip_if(_bits(b))), b] = 1
    return u


@dataclass(frozen=True)
class Gate:
    """One ideal gate.  ``spins`` are 1-based; for controlled gates the
    target is last."""

    kind: str
    spins: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(self.spins) != _ARITY[self.kind]:
            raise ValueError(f"{self.kind} takes {_ARITY[self.kind]} spin(s), got {self.spins}")
        if any(not 1 <= s <= NSPIN for s in self.spins):
            raise ValueError(f"spin index out of range in {self.spins}")
        if len(set(self.spins)) != len(self.spins):
            raise ValueError(f"repeated spin in {self.spins}")
        if (self.angle is None) == (self.kind in ROTATIONS):
            raise ValueError(f"{self.kind}: angle must be given for rotations only")

    def matrix(self) -> np.ndarray:
        if self.kind in ROTATIONS:
            axis = self.kind[1].lower()
            label = ["1"] * NSPIN
            label[self.spins[0] - 1] = axis
            theta = np.deg2rad(self.angle)
            # exp(-i theta I_u) = cos(theta/2) 1 - 2i sin(theta/2) I_u
            return (np.cos(theta / 2) * np.eye(DIM)
                    - 2j * np.sin(theta / 2) * operator_matrix("".join(label)))
        *controls, target = (s - 1 for s in self.spins)

        def flip(bits):
            if all(bits[c] for c in controls):
                bits = list(bits)
                bits[target] ^= 1
            return bits

        return _permutation(flip)

    def inverse(self) -> "Gate":
        if self.kind in ROTATIONS:
            return Gate(self.kind, self.spins, -self.angle)
        return self

    def to_text(self) -> str:
        if self.kind in ROTATIONS:
            return f"{self.kind} {self.angle:g} {self.spins[0]}"
        return " ".join([self.kind, *map(str, self.spins)])


def RX(angle, spin):
    return Gate("RX", (spin,), float(angle))


def RY(angle, spin):
    return Gate("RY", (spin,), float(angle))


def RZ(angle, spin):
    return Gate("RZ", (spin,), float(angle))


def CNOT(control, target):
    return Gate("CNOT", (control, target))


def TOFFOLI(control1, control2, target):
    return Gate("TOFFOLI", (control1, control2, target))


@dataclass(frozen=True)
class Circuit:
    gates: tuple[Gate, ...] = ()

    def unitary(self) -> np.ndarray:
        u = np.eye(DIM, dtype=complex)
        for g in self.gates:
            u = g.matrix() @ u
        return u

    def inverse(self) -> "Circuit":
        return Circuit(tuple(g.inverse() for g in reversed(self.gates)))

    def __add__(self, other: "Circuit") -> "Circuit":
        return Circuit(self.gates + other.gates)

    def __len__(self) -> int:
        return len(self.gates)

    def to_text(self) -> str:
        return "".join(g.to_text() + "\n" for g in self.gates)


def apply_circuit(rho: np.ndarray, circuit: Circuit) -> np.ndarray:
    u = circuit.unitary()
    return u @ np.asarray(rho, dtype=complex) @ u.conj().T


def encoder_circuit() -> Circuit:
    """Maps ``a|000> + b|100>`` to ``a|+++> + b|--->``.

    The leading ``RZ 180`` on spin 1 cancels the ``(-1)^3`` that three
    ``RY 90`` rotations put on ``|111>``; it leaves ``I_z`` inputs alone.
    """
    return Circuit((
        RZ(180, 1),
        CNOT(1, 2),
        CNOT(1, 3),
        RY(90, 1),
        RY(90, 2),
        RY(90, 3),
    ))


def decoder_circuit() -> Circuit:
    return encoder_circuit().inverse()


def correction_circuit() -> Circuit:
    """Toffoli flipping spin 1 on the ``|11>`` syndrome, which is what a
    phase error on spin 1 leaves on spins 2 and 3 after decoding."""
    return Circuit((TOFFOLI(2, 3, 1),))


def parse_circuit(text: str) -> Circuit:
    gates = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        kind, *args = line.split()
        kind = kind.upper()
        if kind not in KINDS:
            raise CircuitParseError(lineno, raw, f"unknown gate {kind!r}")
        want = _ARITY[kind] + (kind in ROTATIONS)
        if len(args) != want:
            raise CircuitParseError(lineno, raw, f"{kind} expects {want} argument(s)")
        try:
            if kind in ROTATIONS:
                gate = Gate(kind, (int(args[1]),), float(args[0]))
            else:
                gate = Gate(kind, tuple(int(a) for a in args))
        except ValueError as exc:
            raise CircuitParseError(lineno, raw, str(exc)) from None
        gates.append(gate)
    return Circuit(tuple(gates))


def load_circuit(path) -> Circuit:
    with open(path, encoding="utf-8") as f:
        return parse_circuit(f.read())
