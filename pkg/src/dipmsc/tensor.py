"""The N x D x T activity tensor and per-entity preprocessing."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .errors import DegenerateEntityError, ShapeError, ValidationError, WindowError


@dataclass(frozen=True, eq=False)
class SeriesTensor:
    """Immutable container for N entities x D dimensions x T time steps.

    ``values[n, d, t]`` is the non-negative activity of entity ``n`` in
    dimension ``d`` at time ``t``. Construction validates the invariants
    the distance relies on, in particular that no (entity, dimension) row
    is identically zero.
    """

    values: np.ndarray
    entity_ids: tuple = ()
    dimension_names: tuple = ()
    time_unit: str = "step"

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64, copy=True)
        if values.ndim != 3:
            raise ShapeError(f"expected a 3-d array (N, D, T), got shape {values.shape}")
        n, d, t = values.shape
        if n < 1 or d < 1 or t < 2:
            raise ShapeError(f"need N >= 1, D >= 1, T >= 2; got {values.shape}")
        ids = tuple(self.entity_ids) if len(self.entity_ids) else tuple(f"e{i}" for i in range(n))
        dims = tuple(self.dimension_names) if len(self.dimension_names) else tuple(f"d{i}" for i in range(d))
        if len(ids) != n:
            raise ShapeError(f"{len(ids)} entity ids for {n} entities")
        if len(dims) != d:
            raise ShapeError(f"{len(dims)} dimension names for {d} dimensions")
        if len(set(ids)) != n:
            raise ValidationError("entity ids must be unique")
        if len(set(dims)) != d:
            raise ValidationError("dimension names must be unique")
        if not np.all(np.isfinite(values)):
            raise ValidationError("tensor contains non-finite values")
        if np.any(values < 0):
            raise ValidationError("tensor contains negative values")
        zero = ~np.any(values != 0.0, axis=2)
        if zero.any():
            raise DegenerateEntityError([(ids[i], dims[j]) for i, j in zip(*np.nonzero(zero))])
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "entity_ids", ids)
        object.__setattr__(self, "dimension_names", dims)
        object.__setattr__(self, "time_unit", str(self.time_unit))

    @property
    def shape(self):
        return self.values.shape

    @property
    def n_entities(self) -> int:
        return self.values.shape[0]

    @property
    def n_dims(self) -> int:
        return self.values.shape[1]

    @property
    def length(self) -> int:
        return self.values.shape[2]

    def __len__(self):
        return self.values.shape[0]

    def __getitem__(self, i) -> np.ndarray:
        return self.values[i]

    def __eq__(self, other):
        if not isinstance(other, SeriesTensor):
            return NotImplemented
        return (
            self.entity_ids == other.entity_ids
            and self.dimension_names == other.dimension_names
            and self.time_unit == other.time_unit
            and self.values.shape == other.values.shape
            and bool(np.array_equal(self.values, other.values))
        )

    __hash__ = None

    def subset(self, index) -> "SeriesTensor":
        index = np.asarray(index, dtype=np.int64)
        return SeriesTensor(
            self.values[index],
            tuple(self.entity_ids[i] for i in index),
            self.dimension_names,
            self.time_unit,
        )

    def with_values(self, values) -> "SeriesTensor":
        return SeriesTensor(values, self.entity_ids, self.dimension_names, self.time_unit)

    def map_entities(self, func) -> "SeriesTensor":
        """Apply ``func`` to every D x T slice and rebuild the tensor."""
        return self.with_values(np.stack([func(x) for x in self.values]))


def check_multiseries(x) -> np.ndarray:
    """Validate one entity's D x T slice and return it as float64."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2:
        raise ShapeError(f"expected a D x T matrix, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValidationError("series contains non-finite values")
    return x


def gaussian_kernel(window: int) -> np.ndarray:
    """Normalised, symmetric Gaussian taps spanning ``window`` steps.

    sigma is window / 4. Odd windows use ``window`` taps at integer offsets.
    Even windows use ``window + 1`` taps with the two outermost taps at half
    weight, so the kernel stays centred on an integer offset.
    """
    if window < 1:
        raise WindowError("window must be >= 1")
    if window == 1:
        return np.ones(1)
    sigma = window / 4.0
    half = window // 2
    offsets = np.arange(-half, half + 1, dtype=np.float64)
    w = np.exp(-0.5 * (offsets / sigma) ** 2)
    if window % 2 == 0:
        w[0] *= 0.5
        w[-1] *= 0.5
    return w / w.sum()


def gaussian_smooth(x, window: int) -> np.ndarray:
    """Smooth every dimension row with a truncated Gaussian kernel.

    Boundaries are handled by half-sample reflection. With a symmetric
    kernel this makes the smoothing operator doubly stochastic, so constant
    rows are preserved and row sums are conserved.
    """
    x = check_multiseries(x)
    window = int(window)
    if window < 1:
        raise WindowError(f"window must be >= 1, got {window}")
    if window > x.shape[1]:
        raise WindowError(f"window {window} exceeds series length {x.shape[1]}")
    if window == 1:
        return x.copy()
    return correlate1d(x, gaussian_kernel(window), axis=1, mode="reflect")


def zscore_free_normalize(x) -> np.ndarray:
    """Scale every dimension row to unit Euclidean norm."""
    x = check_multiseries(x)
    norms = np.linalg.norm(x, axis=1)
    if np.any(norms == 0):
        raise DegenerateEntityError([("<series>", int(d)) for d in np.nonzero(norms == 0)[0]])
    return x / norms[:, None]


def smooth_tensor(tensor: SeriesTensor, window: int) -> SeriesTensor:
    if window in (0, 1, None):
        return tensor
    return tensor.map_entities(lambda x: gaussian_smooth(x, window))
