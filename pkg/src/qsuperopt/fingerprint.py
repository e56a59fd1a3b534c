"""Random-evaluation fingerprints used to bucket possibly-equivalent circuits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import Circuit, Instruction
from .statevector import apply_circuit, apply_instruction

DEFAULT_SEED = 20220613
DEFAULT_EMAX = 1e-15


@dataclass(frozen=True)
class FingerprintContext:
    """Fixed random inputs: ``p0`` uniform in [0, 2pi)^m, ``psi0``/``psi1`` normalized complex Gaussians."""

    q: int
    m: int
    seed: int = DEFAULT_SEED
    emax: float = DEFAULT_EMAX
    p0: tuple[float, ...] = field(init=False, repr=False)
    psi0: np.ndarray = field(init=False, repr=False, compare=False)
    psi1: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.q < 1 or self.m < 0 or self.emax <= 0:
            raise ValueError("need q >= 1, m >= 0 and emax > 0")
        rng = np.random.default_rng(self.seed)
        p0 = tuple(float(x) for x in rng.uniform(0.0, 2 * math.pi, size=self.m))
        dim = 1 << self.q
        psi = []
        for _ in range(2):
            v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
            v = v / np.linalg.norm(v)
            v.setflags(write=False)
            psi.append(v)
        object.__setattr__(self, "p0", p0)
        object.__setattr__(self, "psi0", psi[0])
        object.__setattr__(self, "psi1", psi[1])

    def key(self, fp: float) -> int:
        return math.floor(fp / (2 * self.emax))

    def start_state(self) -> np.ndarray:
        return self.psi1.copy()

    def advance(self, state: np.ndarray, ins: Instruction) -> np.ndarray:
        return apply_instruction(state, ins, self.q, self.p0)

    def amplitude_of_state(self, state: np.ndarray) -> complex:
        return complex(np.vdot(self.psi0, state))


def amplitude(c: Circuit, ctx: FingerprintContext) -> complex:
    """``<psi0| [[c]](p0) |psi1>`` by state-vector application."""
    return ctx.amplitude_of_state(apply_circuit(ctx.start_state(), c, ctx.p0))


def fingerprint(c: Circuit, ctx: FingerprintContext) -> tuple[float, int]:
    fp = abs(amplitude(c, ctx))
    return fp, ctx.key(fp)
