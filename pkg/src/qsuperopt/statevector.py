"""Dense state-vector simulation; qubit 0 is the most significant bit."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .circuit import Circuit, Instruction


def instruction_matrix(ins: Instruction, params: Sequence[float] = ()) -> np.ndarray:
    return ins.gate.numeric(tuple(a.eval(params) for a in ins.args))


def apply_instruction(state: np.ndarray, ins: Instruction, q: int, params: Sequence[float] = ()) -> np.ndarray:
    """Apply one gate to ``state`` of shape ``(2**q,)`` or ``(2**q, k)``."""
    u = instruction_matrix(ins, params)
    d = len(ins.qubits)
    extra = state.shape[1:]
    t = state.reshape((2,) * q + extra)
    t = np.tensordot(u.reshape((2,) * (2 * d)), t, axes=(list(range(d, 2 * d)), list(ins.qubits)))
    # tensordot puts the gate's output axes first; move them back into place
    t = np.moveaxis(t, list(range(d)), list(ins.qubits))
    return t.reshape(state.shape)


def apply_circuit(state: np.ndarray, c: Circuit, params: Sequence[float] = ()) -> np.ndarray:
    for ins in c.instrs:
        state = apply_instruction(state, ins, c.q, params)
    return state


def unitary(c: Circuit, params: Sequence[float] = ()) -> np.ndarray:
    return apply_circuit(np.eye(1 << c.q, dtype=complex), c, params)


def random_state(q: int, rng: np.random.Generator, count: int | None = None) -> np.ndarray:
    shape = (1 << q,) if count is None else (1 << q, count)
    v = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    return v / np.linalg.norm(v, axis=0)


def phase_aligned_distance(a: np.ndarray, b: np.ndarray) -> float:
    """``min_beta max|a - e^{i beta} b|`` approximated by aligning on the largest overlap."""
    overlap = np.vdot(b.ravel(), a.ravel())
    phase = overlap / abs(overlap) if abs(overlap) > 1e-300 else 1.0
    return float(np.max(np.abs(a - phase * b)))


def equivalent_up_to_phase(
    c1: Circuit,
    c2: Circuit,
    params: Sequence[float] = (),
    trials: int = 5,
    tol: float = 1e-8,
    seed: int = 0,
) -> bool:
    """State-vector check: one global phase must explain ``trials`` random inputs."""
    if c1.q != c2.q:
        return False
    rng = np.random.default_rng(seed)
    states = random_state(c1.q, rng, trials)
    out1 = apply_circuit(states, c1, params)
    out2 = apply_circuit(states, c2, params)
    return phase_aligned_distance(out1, out2) < tol
