"""Global maps on finite tori and windows, translate detection, PGM output.

Coordinate conventions: a d-dimensional configuration is a dense array
indexed cells[i1, ..., id] with axis 1 in the first slot.  Tori are
periodic in every axis.  PGM output maps the first coordinate to image
columns (left to right) and the second to rows with the top row at the
highest second coordinate.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import (
    EmptyOutputError,
    IncompatibleOperandsError,
    TorusTooSmallError,
    UnsupportedDepthError,
    UnsupportedDimensionError,
)
from .rule_model import LocalRule, symbol_dtype


@dataclass(frozen=True)
class Box:
    """An axis-aligned lattice box with inclusive bounds."""

    lo: tuple[int, ...]
    hi: tuple[int, ...]

    def __post_init__(self):
        lo = tuple(int(c) for c in self.lo)
        hi = tuple(int(c) for c in self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if len(lo) != len(hi) or not lo:
            raise ValueError("box bounds must share a positive arity")
        if any(l > h for l, h in zip(lo, hi)):
            raise ValueError(f"empty box {lo}..{hi}")

    @property
    def d(self) -> int:
        return len(self.lo)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(h - l + 1 for l, h in zip(self.lo, self.hi))

    @property
    def size(self) -> int:
        out = 1
        for s in self.shape:
            out *= s
        return out

    def cells(self):
        """All coordinates, row-major (last axis fastest)."""
        return (
            tuple(l + i for l, i in zip(self.lo, idx))
            for idx in product(*(range(s) for s in self.shape))
        )

    def __contains__(self, coord) -> bool:
        return all(l <= c <= h for c, l, h in zip(coord, self.lo, self.hi))

    def shift(self, vec) -> "Box":
        return Box(
            tuple(l + v for l, v in zip(self.lo, vec)),
            tuple(h + v for h, v in zip(self.hi, vec)),
        )


@dataclass(frozen=True)
class Window:
    """A box together with the symbols assigned on it."""

    box: Box
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values)  # private copy; frozen afterwards
        if vals.shape != self.box.shape:
            raise ValueError(
                f"values shape {vals.shape} does not match box shape {self.box.shape}"
            )
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __getitem__(self, coord) -> int:
        idx = tuple(c - l for c, l in zip(coord, self.box.lo))
        return int(self.values[idx])


@dataclass(frozen=True)
class TorusConfig:
    """A d-dimensional periodic configuration over symbols 0..m-1."""

    sides: tuple[int, ...]
    m: int
    cells: np.ndarray

    def __post_init__(self):
        sides = tuple(int(s) for s in self.sides)
        object.__setattr__(self, "sides", sides)
        if not sides or any(s < 1 for s in sides):
            raise ValueError("torus sides must be positive")
        arr = np.array(self.cells, dtype=symbol_dtype(self.m))
        if arr.shape != sides:
            raise ValueError(f"cells shape {arr.shape} does not match sides {sides}")
        if arr.size and int(arr.max()) >= self.m:
            raise ValueError(f"symbols must be below m={self.m}")
        arr.setflags(write=False)
        object.__setattr__(self, "cells", arr)

    @property
    def d(self) -> int:
        return len(self.sides)

    @staticmethod
    def zeros(sides, m: int) -> "TorusConfig":
        sides = tuple(sides)
        return TorusConfig(sides, m, np.zeros(sides, dtype=symbol_dtype(m)))

    @staticmethod
    def with_window(sides, m: int, window: Window) -> "TorusConfig":
        """Zeros everywhere except the window, placed mod the sides."""
        sides = tuple(sides)
        cells = np.zeros(sides, dtype=symbol_dtype(m))
        for coord in window.box.cells():
            idx = tuple(c % s for c, s in zip(coord, sides))
            cells[idx] = window[coord]
        return TorusConfig(sides, m, cells)

    def __getitem__(self, coord) -> int:
        idx = tuple(c % s for c, s in zip(coord, self.sides))
        return int(self.cells[idx])


def _check_rule_torus(rule: LocalRule, cfg: TorusConfig):
    if rule.d != cfg.d:
        raise IncompatibleOperandsError(
            f"rule dimension {rule.d} does not match torus dimension {cfg.d}"
        )
    if rule.m != cfg.m:
        raise IncompatibleOperandsError(
            f"rule alphabet {rule.m} does not match torus alphabet {cfg.m}"
        )
    for side, ext in zip(cfg.sides, rule.neighborhood.extent):
        if side < ext + 1:
            raise TorusTooSmallError(
                f"side {side} cannot hold a neighborhood spanning {ext + 1} cells"
            )


def apply_rule_grid(rule: LocalRule, grid: np.ndarray, batch_axes: int = 0) -> np.ndarray:
    """One synchronous update of a periodic grid (leading axes are batch)."""
    d = rule.d
    axes = tuple(range(batch_axes, batch_axes + d))
    arrays = {
        o: np.roll(grid, shift=tuple(-c for c in o), axis=axes)
        for o in rule.neighborhood
    }
    out = rule.evaluate_arrays(arrays)
    return np.broadcast_to(out, grid.shape)


def step(rule: LocalRule, cfg: TorusConfig) -> TorusConfig:
    """One synchronous application of the global map."""
    _check_rule_torus(rule, cfg)
    return TorusConfig(cfg.sides, cfg.m, apply_rule_grid(rule, cfg.cells))


def iterate(rule: LocalRule, cfg: TorusConfig, n: int) -> TorusConfig:
    """n-fold application of the global map."""
    if n < 0:
        raise ValueError("iteration count must be nonnegative")
    if n:
        _check_rule_torus(rule, cfg)
    cells = cfg.cells
    for _ in range(n):
        cells = apply_rule_grid(rule, cells)
    return TorusConfig(cfg.sides, cfg.m, cells)


def window_eval(rule: LocalRule, window: Window, n: int) -> Window:
    """Evaluate n steps on a finite window without periodicity.

    The output box is the input box shrunk by the dependency cone: cells
    whose whole n-step cone lies inside the input.
    """
    if n < 1:
        raise ValueError("step count must be positive")
    if rule.d != window.box.d:
        raise IncompatibleOperandsError(
            f"rule dimension {rule.d} does not match window dimension {window.box.d}"
        )
    nb_lo = [lo for lo, _ in rule.neighborhood.bounds]
    nb_hi = [hi for _, hi in rule.neighborhood.bounds]
    box = window.box
    out_lo = tuple(l - n * lo for l, lo in zip(box.lo, nb_lo))
    out_hi = tuple(h - n * hi for h, hi in zip(box.hi, nb_hi))
    if any(l > h for l, h in zip(out_lo, out_hi)):
        raise EmptyOutputError(
            f"window {box.lo}..{box.hi} leaves no output after {n} steps"
        )
    vals = window.values
    cur_lo = box.lo
    for _ in range(n):
        new_lo = tuple(l - lo for l, lo in zip(cur_lo, nb_lo))
        new_shape = tuple(
            s - (hi - lo) for s, lo, hi in zip(vals.shape, nb_lo, nb_hi)
        )
        arrays = {}
        for o in rule.neighborhood:
            start = tuple(c - lo for c, lo in zip(o, nb_lo))
            arrays[o] = vals[
                tuple(slice(s, s + w) for s, w in zip(start, new_shape))
            ]
        vals = np.broadcast_to(rule.evaluate_arrays(arrays), new_shape)
        cur_lo = new_lo
    return Window(Box(out_lo, out_hi), vals)


def detect_translates(cfg: TorusConfig, motif: Window) -> list[tuple[int, ...]]:
    """All torus shifts t where the motif pattern recurs at box + t.

    Shifts are canonical representatives in 0..side-1, ascending.
    """
    if cfg.d != motif.box.d:
        raise IncompatibleOperandsError("motif dimension does not match the torus")
    shape = motif.box.shape
    if any(b > s for b, s in zip(shape, cfg.sides)):
        raise IncompatibleOperandsError("motif does not fit in the torus")
    padded = np.pad(cfg.cells, [(0, b - 1) for b in shape], mode="wrap")
    windows = np.lib.stride_tricks.sliding_window_view(padded, shape)
    match_axes = tuple(range(cfg.d, 2 * cfg.d))
    hits = np.argwhere((windows == motif.values).all(axis=match_axes))
    out = [
        tuple((int(p) - l) % s for p, l, s in zip(pos, motif.box.lo, cfg.sides))
        for pos in hits
    ]
    return sorted(out)


def write_pgm(cfg: TorusConfig, path) -> None:
    """Binary PGM (P5) snapshot of a 2-d configuration.

    Width is sides[0], height sides[1], maxval m-1; the top image row is
    the highest second coordinate.
    """
    if cfg.d != 2:
        raise UnsupportedDimensionError("PGM output needs a 2-d configuration")
    if cfg.m > 256:
        raise UnsupportedDepthError(f"PGM supports at most 256 symbols, got m={cfg.m}")
    header = f"P5\n{cfg.sides[0]} {cfg.sides[1]}\n{cfg.m - 1}\n".encode()
    img = cfg.cells.T[::-1, :]
    with open(path, "wb") as fh:
        fh.write(header + np.ascontiguousarray(img, dtype=np.uint8).tobytes())


# ---------------------------------------------------------------------------
# Text formats: "sides=(s1,...,sd)" / "lo=", "hi=" headers followed by the
# symbols row-major, whitespace-separated.
# ---------------------------------------------------------------------------

def format_config(cfg: TorusConfig) -> str:
    from .rule_lang import format_vector

    body = "\n".join(
        " ".join(str(v) for v in row) for row in cfg.cells.reshape(-1, cfg.sides[-1])
    )
    return f"sides={format_vector(cfg.sides)}\n{body}\n"


def parse_config(text: str, m: int) -> TorusConfig:
    from .rule_lang import parse_vector

    header, _, rest = text.strip().partition("\n")
    if not header.startswith("sides="):
        raise ValueError("configuration text must start with sides=(...)")
    sides = parse_vector(header[len("sides="):])
    vals = np.array([int(t) for t in rest.split()], dtype=np.int64)
    expected = int(np.prod(sides))
    if vals.size != expected:
        raise ValueError(f"expected {expected} symbols, found {vals.size}")
    return TorusConfig(sides, m, vals.reshape(sides))


def format_window(window: Window) -> str:
    from .rule_lang import format_vector

    body = "\n".join(
        " ".join(str(v) for v in row)
        for row in window.values.reshape(-1, window.box.shape[-1])
    )
    return (
        f"lo={format_vector(window.box.lo)}\n"
        f"hi={format_vector(window.box.hi)}\n{body}\n"
    )


def parse_window(text: str) -> Window:
    from .rule_lang import parse_vector

    lines = text.strip().splitlines()
    stripped = [ln.split("#", 1)[0].strip() for ln in lines]
    stripped = [ln for ln in stripped if ln]
    if len(stripped) < 3 or not stripped[0].startswith("lo=") or not stripped[1].startswith("hi="):
        raise ValueError("window text needs lo=(...), hi=(...) and symbols")
    lo = parse_vector(stripped[0][len("lo="):])
    hi = parse_vector(stripped[1][len("hi="):])
    box = Box(lo, hi)
    vals = np.array([int(t) for t in " ".join(stripped[2:]).split()], dtype=np.int64)
    if vals.size != box.size:
        raise ValueError(f"expected {box.size} symbols, found {vals.size}")
    return Window(box, vals.reshape(box.shape))
