"""Planted-cluster multivariate series for validation.

Each cluster gets one prototype per dimension. Members are the prototype
jointly shifted by a random ``q`` (the same for all dimensions unless
``independent_shifts`` is set), rescaled per dimension, then perturbed by
Gaussian noise proportional to the row peak and truncated at zero.
Prototypes keep zero margins at least ``shift_jitter`` wide, so shifting
never pushes mass out of the window.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import SpecError
from .io import save_tensor
from .tensor import SeriesTensor

FAMILIES = ("gaussian-pulse", "double-pulse", "ramp", "periodic")


@dataclass(frozen=True)
class GeneratorSpec:
    K_true: int = 3
    N_per: int = 40
    D: int = 2
    T: int = 48
    shape_family: str = "gaussian-pulse"
    shift_jitter: int = 2
    scale_jitter: float = 3.0
    noise_sigma: float = 0.05
    seed: int = 0
    pulse_width: int = 8
    independent_shifts: bool = False

    def validate(self) -> None:
        if min(self.K_true, self.N_per, self.D, self.T, self.pulse_width) < 1:
            raise SpecError("counts must be positive")
        if self.T < 2:
            raise SpecError("T must be >= 2")
        if self.shift_jitter < 0 or 4 * self.shift_jitter >= self.T:
            raise SpecError(f"shift_jitter must satisfy 0 <= shift_jitter < T/4, got {self.shift_jitter}")
        if self.noise_sigma < 0:
            raise SpecError("noise_sigma must be >= 0")
        if self.scale_jitter < 1:
            raise SpecError("scale_jitter must be >= 1")
        if self.shape_family not in FAMILIES:
            raise SpecError(f"shape_family must be one of {FAMILIES}")
        need = self._slot_width() * self.K_true + 2 * self.shift_jitter
        if self.shape_family != "periodic" and need > self.T:
            raise SpecError(
                f"{self.K_true} clusters need {need} steps "
                f"(pulse width {self._slot_width() - 2 * self.shift_jitter} + 2 x jitter per slot), T={self.T}"
            )
        if self.shape_family == "periodic" and len(self._periods()) < self.K_true:
            raise SpecError(f"T={self.T} leaves room for only {len(self._periods())} distinct periods")

    def _slot_width(self) -> int:
        w = self.pulse_width * (2 if self.shape_family == "double-pulse" else 1)
        return w + 2 * self.shift_jitter

    def _periods(self):
        interior = self.T - 2 * self.shift_jitter
        return [p for p in range(3, interior // 2 + 1)]


def _pulse(t, center, width):
    sigma = width / 6.0
    y = np.exp(-0.5 * ((t - center) / sigma) ** 2)
    y[np.abs(t - center) > width / 2.0] = 0.0
    return y


def _prototype(spec: GeneratorSpec, slot: int, d: int) -> np.ndarray:
    T, j, w = spec.T, spec.shift_jitter, spec.pulse_width
    t = np.arange(T, dtype=np.float64)
    start = j + slot * spec._slot_width() + j
    if spec.shape_family == "gaussian-pulse":
        return _pulse(t, start + (w - 1) / 2.0, w - 1)
    if spec.shape_family == "double-pulse":
        return _pulse(t, start + (w - 1) / 2.0, w - 1) + 0.5 * _pulse(t, start + w + (w - 1) / 2.0, w - 1)
    if spec.shape_family == "ramp":
        y = np.zeros(T)
        peak = start + (w - 1) // 3
        rise = np.arange(start, peak + 1)
        fall = np.arange(peak, start + w)
        y[rise] = (rise - start + 1) / (peak - start + 1)
        y[fall] = np.minimum(y[fall], (start + w - fall) / (start + w - peak))
        return y
    # periodic: distinct period per slot, zero margins at both ends
    periods = spec._periods()
    p = periods[slot % len(periods)]
    y = np.zeros(T)
    inner = np.arange(j, T - j)
    y[inner] = 1.0 + np.sin(2 * np.pi * (inner - j) / p + 0.3 * d)
    return y


def generate(spec: GeneratorSpec | None = None):
    """Return ``(tensor, truth, prototypes)`` for a planted-cluster dataset."""
    spec = spec or GeneratorSpec()
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    K, D, T = spec.K_true, spec.D, spec.T

    # every dimension assigns the clusters to slots in its own random order
    protos = np.zeros((K, D, T))
    for d in range(D):
        order = rng.permutation(K) if d > 0 else np.arange(K)
        for k in range(K):
            protos[k, d] = _prototype(spec, int(order[k]), d)

    N = K * spec.N_per
    truth = np.repeat(np.arange(K), spec.N_per)
    values = np.zeros((N, D, T))
    j = spec.shift_jitter
    log_s = np.log(spec.scale_jitter)
    for n in range(N):
        base = protos[truth[n]]
        qs = rng.integers(-j, j + 1, size=D if spec.independent_shifts else 1)
        qs = np.broadcast_to(qs, (D,))
        for d in range(D):
            row = np.roll(base[d], int(qs[d]))  # margins are zero, so the roll is a zero-fill shift
            row = row * float(np.exp(rng.uniform(-log_s, log_s)))
            if spec.noise_sigma > 0:
                row = row + rng.normal(0.0, spec.noise_sigma * row.max(), size=T)
            row = np.maximum(row, 0.0)
            if not np.any(row):
                row = base[d].copy()
            values[n, d] = row

    ids = tuple(f"s{n:05d}" for n in range(N))
    dims = tuple(f"dim{d}" for d in range(D))
    return SeriesTensor(values, ids, dims, "step"), truth, protos


def write_dataset(spec: GeneratorSpec, out_path, format: str | None = None, truth_path=None):
    tensor, truth, _ = generate(spec)
    save_tensor(tensor, out_path, format)
    truth_path = Path(truth_path) if truth_path else Path(str(out_path) + ".truth.json")
    with open(truth_path, "w", encoding="utf-8") as fh:
        json.dump({"truth": [int(v) for v in truth], "spec": asdict(spec)}, fh)
        fh.write("\n")
    return tensor, truth
