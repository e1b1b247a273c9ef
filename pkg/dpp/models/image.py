from dataclasses import dataclass

import numpy as np

from dpp.utils.errors import ValidationError


@dataclass(frozen=True)
class GrayImage:
    """Row-major intensities in [0, 1], shape (height, width)"""
    pixels: np.ndarray

    def __post_init__(self):
        pixels = np.asarray(self.pixels, dtype=np.float64)
        if pixels.ndim != 2 or pixels.size == 0:
            raise ValidationError(f'image must be a non-empty 2-D array, got shape {pixels.shape}')
        if np.any(pixels < 0.0) or np.any(pixels > 1.0) or np.any(np.isnan(pixels)):
            raise ValidationError('image intensities must lie in [0, 1]')
        object.__setattr__(self, 'pixels', pixels)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @classmethod
    def from_uint8(cls, values) -> 'GrayImage':
        return cls(pixels=np.asarray(values, dtype=np.float64) / 255.0)

    def to_uint8(self) -> np.ndarray:
        return np.clip(np.rint(self.pixels * 255.0), 0, 255).astype(np.uint8)

    def __repr__(self):
        return f'<GrayImage {self.width}x{self.height}>'


@dataclass(frozen=True)
class PatchSet:
    """w x w patches: `positions[i]` is the (row, col) top-left corner of `vectors[i]`"""
    w: int
    positions: np.ndarray
    vectors: np.ndarray

    def __len__(self):
        return self.vectors.shape[0]

    def __repr__(self):
        return f'<PatchSet w={self.w} count={len(self)}>'
