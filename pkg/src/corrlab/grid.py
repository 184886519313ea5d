"""Pixel grids over complex rectangles and classified rasters.

The pixel-to-point mapping is exact and documented: pixel (i, j) with
column i and row j (row-major, y increasing downward) maps to

    center + step*(i - (pixels_x - 1)/2) - 1j*step*(j - (pixels_y - 1)/2)

with step = width / pixels_x.  Renderers and test oracles share this
formula verbatim so rasters can be compared bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class GridSpec:
    center: complex
    width: float
    pixels_x: int
    pixels_y: int

    def __post_init__(self):
        if self.width <= 0:
            raise ConfigError("grid width must be positive")
        if self.pixels_x < 1 or self.pixels_y < 1:
            raise ConfigError("grid needs at least one pixel per side")

    @property
    def step(self) -> float:
        return self.width / self.pixels_x

    @property
    def height(self) -> float:
        return self.step * self.pixels_y

    def point(self, i: int, j: int) -> complex:
        s = self.step
        re = self.center.real + (i - (self.pixels_x - 1) / 2.0) * s
        im = self.center.imag - (j - (self.pixels_y - 1) / 2.0) * s
        return complex(re, im)

    def index_of(self, z: complex) -> tuple[int, int]:
        s = self.step
        i = round((z.real - self.center.real) / s + (self.pixels_x - 1) / 2.0)
        j = round((self.center.imag - z.imag) / s + (self.pixels_y - 1) / 2.0)
        return int(i), int(j)

    def complex_grid(self) -> np.ndarray:
        """(pixels_y, pixels_x) array of pixel centers, same formula as point()."""
        s = self.step
        xs = self.center.real + (np.arange(self.pixels_x) - (self.pixels_x - 1) / 2.0) * s
        ys = self.center.imag - (np.arange(self.pixels_y) - (self.pixels_y - 1) / 2.0) * s
        return xs[None, :] + 1j * ys[:, None]


@dataclass
class Raster:
    """Per-pixel class codes plus an optional scalar channel.

    The meaning of the class codes is documented per job kind in
    `class_names`; scalar channels hold escape indices, escape rates, or
    heuristic values depending on the kind.
    """

    width: int
    height: int
    classes: np.ndarray
    scalar: np.ndarray | None = None
    class_names: dict = field(default_factory=dict)

    def class_counts(self) -> dict:
        codes, counts = np.unique(self.classes, return_counts=True)
        return {int(c): int(n) for c, n in zip(codes, counts)}
