"""Counter-based random streams: one Philox generator per simulated path.

Reproducibility contract: every random draw in the package comes from a
Philox bit generator keyed by (master_seed, stream_id).  Stream ids pack a
small "lane" (which ensemble inside an experiment) and a path index, so a
path's draws depend only on (master_seed, lane, path) and never on worker
scheduling or on how many other paths were simulated.

Consumption layout per path is fixed by the consuming operation and is the
same for both kernel backends: first all its normal draws, then all its
uniform draws, then (first-passage only) all its bridge uniforms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["RngStream", "compose_stream_id", "philox", "generator"]

_LANE_BITS = 24
_PATH_BITS = 40
MAX_PATHS_PER_LANE = 1 << _PATH_BITS
_U64 = 1 << 64


def _check_u64(name: str, value: int) -> int:
    value = int(value)
    if not 0 <= value < _U64:
        raise ValueError(f"{name} must be a 64-bit unsigned integer, got {value}")
    return value


def compose_stream_id(lane: int, path: int) -> int:
    """Pack (lane, path) into one 64-bit stream id: lane<<40 | path."""
    lane = int(lane)
    path = int(path)
    if not 0 <= lane < (1 << _LANE_BITS):
        raise ValueError(f"lane must lie in [0, 2^{_LANE_BITS}), got {lane}")
    if not 0 <= path < MAX_PATHS_PER_LANE:
        raise ValueError(f"path must lie in [0, 2^{_PATH_BITS}), got {path}")
    return (lane << _PATH_BITS) | path


def philox(master_seed: int, stream_id: int) -> np.random.Philox:
    """Fresh Philox bit generator keyed by (master_seed, stream_id), counter at zero."""
    master_seed = _check_u64("master_seed", master_seed)
    stream_id = _check_u64("stream_id", stream_id)
    key = np.array([master_seed, stream_id], dtype=np.uint64)
    return np.random.Philox(key=key)


def generator(master_seed: int, stream_id: int) -> np.random.Generator:
    return np.random.Generator(philox(master_seed, stream_id))


@dataclass
class RngStream:
    """A consumable random stream identified by (master_seed, stream_id).

    Two streams with different stream_id under the same master_seed are
    statistically independent; output depends only on the key pair and the
    position (counter) within the stream.
    """

    master_seed: int
    stream_id: int
    _bitgen: np.random.Philox = field(init=False, repr=False)
    _gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        self.master_seed = _check_u64("master_seed", self.master_seed)
        self.stream_id = _check_u64("stream_id", self.stream_id)
        self._bitgen = philox(self.master_seed, self.stream_id)
        self._gen = np.random.Generator(self._bitgen)

    @property
    def bit_generator(self) -> np.random.Philox:
        """Underlying Philox generator (shared state with the draw methods)."""
        return self._bitgen

    @property
    def counter(self):
        """Current Philox counter, exposed for diagnostics."""
        return tuple(self._bitgen.state["state"]["counter"])

    def normals(self, n: int) -> np.ndarray:
        return self._gen.standard_normal(int(n))

    def uniforms(self, n: int) -> np.ndarray:
        return self._gen.random(int(n))
