"""Coupling strategies and modularity parameters.

A coupling between layer cells carries a signed strength: ``+e`` when the
coupling is present and ``-e`` when it is absent, where the amplitude ``e``
depends on the chosen strategy.  Absent couplings therefore actively
penalise co-assignment of node copies instead of being silent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Mapping

import numpy as np

from .errors import DomainError

if TYPE_CHECKING:  # pragma: no cover
    from .network import MultilayerNetwork

COUPLING_STRATEGIES = ("uniform", "closeness", "temporal", "explicit")
NORMALIZATION_MODES = ("raw", "normalized")


@dataclass(frozen=True)
class CouplingSpec:
    """How coupling amplitudes ``e`` are assigned to node-copy pairs.

    strategy
        ``uniform``: every candidate pair has amplitude ``omega``.
        ``closeness``: ``omega * M[a, b] / max(M)`` where ``M`` is a symmetric
        non-negative layer-cell closeness matrix.
        ``temporal``: ``omega`` for consecutive layers of the same aspect,
        0 otherwise.
        ``explicit``: per ``(node, cell_a, cell_b)`` amplitudes from a map;
        pairs missing from the map get amplitude 0.
    """

    strategy: str = "uniform"
    omega: float = 1.0
    closeness: np.ndarray | None = None
    explicit: Mapping[tuple[int, int, int], float] = field(default_factory=dict)

    def __post_init__(self):
        if self.strategy not in COUPLING_STRATEGIES:
            raise DomainError(f"unknown coupling strategy {self.strategy!r}")
        if not np.isfinite(self.omega) or self.omega < 0:
            raise DomainError(f"omega must be finite and >= 0, got {self.omega}")
        if self.strategy == "closeness":
            if self.closeness is None:
                raise DomainError("closeness strategy requires a closeness matrix")
            m = np.asarray(self.closeness, dtype=float)
            if m.ndim != 2 or m.shape[0] != m.shape[1]:
                raise DomainError("closeness matrix must be square")
            if not np.allclose(m, m.T):
                raise DomainError("closeness matrix must be symmetric")
            if (m < 0).any():
                raise DomainError("closeness matrix must be non-negative")
            if m.max(initial=0.0) <= 0:
                raise DomainError("closeness matrix must have a strictly positive maximum")
            m = m.copy()
            m.setflags(write=False)
            object.__setattr__(self, "closeness", m)
        for key, val in self.explicit.items():
            if val < 0 or not np.isfinite(val):
                raise DomainError(f"explicit amplitude for {key} must be finite and >= 0")

    def amplitude(self, net: "MultilayerNetwork", node: int, cell_a: int, cell_b: int) -> float:
        """Amplitude ``e >= 0`` for the candidate pair, 0-based indices."""
        if cell_a == cell_b:
            raise DomainError("coupling amplitude asked for a cell paired with itself")
        if self.strategy == "uniform":
            return self.omega
        if self.strategy == "closeness":
            m = self.closeness
            t = net.n_cells
            if m.shape != (t, t):
                raise DomainError(
                    f"closeness matrix shape {m.shape} does not match {t} layer cells"
                )
            return self.omega * float(m[cell_a, cell_b]) / float(m.max())
        if self.strategy == "temporal":
            va, sa = net.cell_of(cell_a)
            vb, sb = net.cell_of(cell_b)
            if va == vb and abs(sa - sb) == 1:
                return self.omega
            return 0.0
        # explicit
        key = (node, cell_a, cell_b) if cell_a < cell_b else (node, cell_b, cell_a)
        return float(self.explicit.get(key, 0.0))

    def strength(self, net: "MultilayerNetwork", node: int, cell_a: int, cell_b: int,
                 present: bool) -> float:
        """Signed coupling strength: ``+e`` if present, ``-e`` if absent."""
        e = self.amplitude(net, node, cell_a, cell_b)
        return e if present else -e


@dataclass(frozen=True)
class ModularityParams:
    """Per-layer-cell resolution and weight parameters.

    ``gamma`` and ``lam`` are tuples with one entry per layer cell in global
    cell order.  ``gamma_plus`` / ``gamma_minus`` are only consulted when
    ``signed`` is set; they default to ``gamma``.
    """

    gamma: tuple[float, ...]
    lam: tuple[float, ...]
    normalization: str = "raw"
    signed: bool = False
    gamma_plus: tuple[float, ...] | None = None
    gamma_minus: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.normalization not in NORMALIZATION_MODES:
            raise DomainError(f"unknown normalization mode {self.normalization!r}")
        if len(self.gamma) != len(self.lam):
            raise DomainError("gamma and lambda must have one entry per layer cell")
        for g in self.gamma:
            if not np.isfinite(g) or g <= 0:
                raise DomainError(f"resolution gamma must be finite and > 0, got {g}")
        for l in self.lam:
            if not np.isfinite(l) or l < 0:
                raise DomainError(f"layer weight lambda must be finite and >= 0, got {l}")
        for name in ("gamma_plus", "gamma_minus"):
            vals = getattr(self, name)
            if vals is None:
                continue
            if len(vals) != len(self.gamma):
                raise DomainError(f"{name} must have one entry per layer cell")
            for g in vals:
                if not np.isfinite(g) or g <= 0:
                    raise DomainError(f"{name} entries must be finite and > 0, got {g}")

    @classmethod
    def for_network(cls, net: "MultilayerNetwork", gamma=1.0, lam=1.0,
                    normalization: str = "raw", signed: bool = False,
                    gamma_plus=None, gamma_minus=None) -> "ModularityParams":
        """Build params for ``net``, broadcasting scalars over layer cells."""
        t = net.n_cells

        def broadcast(value, default=None):
            if value is None:
                return default
            if np.isscalar(value):
                return (float(value),) * t
            vals = tuple(float(v) for v in value)
            if len(vals) != t:
                raise DomainError(f"expected {t} per-layer values, got {len(vals)}")
            return vals

        return cls(
            gamma=broadcast(gamma),
            lam=broadcast(lam),
            normalization=normalization,
            signed=signed,
            gamma_plus=broadcast(gamma_plus),
            gamma_minus=broadcast(gamma_minus),
        )

    def gamma_signed(self) -> tuple[tuple[float, ...], tuple[float, ...]]:
        """(gamma_plus, gamma_minus) with defaults applied."""
        gp = self.gamma_plus if self.gamma_plus is not None else self.gamma
        gm = self.gamma_minus if self.gamma_minus is not None else self.gamma
        return gp, gm
