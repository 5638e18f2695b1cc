from __future__ import annotations

from dataclasses import dataclass

from ..errors import InvalidInputError


@dataclass(frozen=True)
class TileCoder:
    """Exact (hash-free) grid tile coder.

    Each tiling is a joint grid with ``bins[d]`` cells along feature ``d``.
    Tiling ``k`` is shifted by ``k * (2d + 1) / tilings`` of a cell along
    dimension ``d`` (the usual asymmetric displacement), and indices from
    tiling ``k`` live in their own block ``[k * cells, (k + 1) * cells)``.
    Inputs outside ``[low, high]`` are clipped.
    """

    bins: tuple[int, ...]
    low: tuple[float, ...]
    high: tuple[float, ...]
    tilings: int = 1

    def __post_init__(self):
        if not (len(self.bins) == len(self.low) == len(self.high)):
            raise InvalidInputError("bins, low and high must have equal length")
        if self.tilings < 1 or any(b < 1 for b in self.bins):
            raise InvalidInputError("tilings and bins must be positive")
        if any(h <= lo for lo, h in zip(self.low, self.high)):
            raise InvalidInputError("each feature range needs high > low")

    @property
    def cells_per_tiling(self) -> int:
        n = 1
        for b in self.bins:
            n *= b
        return n

    @property
    def size(self) -> int:
        return self.tilings * self.cells_per_tiling

    def encode(self, features) -> tuple[int, ...]:
        if len(features) != len(self.bins):
            raise InvalidInputError(f"expected {len(self.bins)} features, got {len(features)}")
        scaled = []
        for x, lo, hi, b in zip(features, self.low, self.high, self.bins):
            x = min(max(x, lo), hi)
            scaled.append((x - lo) / (hi - lo) * b)
        cells = self.cells_per_tiling
        out = []
        for k in range(self.tilings):
            idx = 0
            for d, (u, b) in enumerate(zip(scaled, self.bins)):
                b_idx = min(int(u + k * (2 * d + 1) / self.tilings % 1.0), b - 1)
                idx = idx * b + b_idx
            out.append(k * cells + idx)
        return tuple(out)


def tile_encode(coder: TileCoder, features) -> tuple[int, ...]:
    return coder.encode(features)
