"""Map the raw, noise-corrupted state map to a clean binary image.

The default backend is a deterministic classical pipeline: morphological
closing with a small disk, then removal of 8-connected components below an
area threshold.  Background activity from an isolated Poisson process shows
up as lone pixels and is removed exactly; closing first heals small gaps in
genuine markers so the area filter cannot delete them.

A learned model can be plugged in through register_denoiser; it must map a
binary image to a binary image of the same shape.  The classical path is a
pure function and safe to run concurrently; external backends must provide
their own thread safety.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import cv2
import numpy as np

from .errors import ConfigurationError, ContractError, ParameterError

BACKEND_CLASSICAL = "classical"
BACKEND_EXTERNAL = "external-model"


@dataclass(frozen=True)
class DenoiserConfig:
    min_component_area: int = 12
    closing_radius: int = 1
    backend: str = BACKEND_CLASSICAL

    def __post_init__(self):
        if self.min_component_area < 1:
            raise ParameterError("min_component_area must be at least 1")
        if self.closing_radius < 0:
            raise ParameterError("closing_radius must be non-negative")
        if self.backend not in (BACKEND_CLASSICAL, BACKEND_EXTERNAL):
            raise ParameterError(f"unknown denoiser backend {self.backend!r}")


_external_backend: Callable[[np.ndarray], np.ndarray] | None = None


def register_denoiser(backend: Callable[[np.ndarray], np.ndarray]):
    """Install an external denoiser; later calls with backend=external-model
    dispatch to it.  Returns the callable as an opaque handle."""
    global _external_backend
    _external_backend = backend
    return backend


def clear_denoiser() -> None:
    global _external_backend
    _external_backend = None


@lru_cache(maxsize=None)
def _disk_kernel_cached(radius: int) -> np.ndarray:
    span = np.arange(-radius, radius + 1)
    yy, xx = np.meshgrid(span, span, indexing="ij")
    kernel = (yy * yy + xx * xx <= radius * radius).astype(np.uint8)
    kernel.setflags(write=False)
    return kernel


def disk_kernel(radius: int) -> np.ndarray:
    """Structuring element: pixels within Euclidean distance radius."""
    return _disk_kernel_cached(int(radius))


def _as_binary(image: np.ndarray) -> np.ndarray:
    img = np.asarray(image)
    if img.ndim != 2:
        raise ParameterError("denoiser expects a 2-D image")
    return (img > 0).astype(np.uint8)


def _classical(img: np.ndarray, cfg: DenoiserConfig) -> np.ndarray:
    if cfg.closing_radius > 0:
        kernel = disk_kernel(cfg.closing_radius)
        # explicit border values: nothing white outside the frame for the
        # dilation, everything white outside for the erosion, so closing
        # never eats pixels that touch the image border
        dilated = cv2.dilate(img, kernel, borderType=cv2.BORDER_CONSTANT, borderValue=0)
        img = cv2.erode(dilated, kernel, borderType=cv2.BORDER_CONSTANT, borderValue=1)
    n, labels, stats, _ = cv2.connectedComponentsWithStats(img, connectivity=8)
    if n == 1:
        return np.zeros_like(img)
    keep = np.zeros(n, dtype=np.uint8)
    keep[1:] = stats[1:, cv2.CC_STAT_AREA] >= cfg.min_component_area
    return keep[labels]


def denoise(image: np.ndarray, cfg: DenoiserConfig | None = None) -> np.ndarray:
    """Return the denoised binary image (0/1 uint8).  Deterministic."""
    cfg = cfg or DenoiserConfig()
    img = _as_binary(image)
    if cfg.backend == BACKEND_CLASSICAL:
        return _classical(img, cfg)
    if _external_backend is None:
        raise ConfigurationError(
            "backend is external-model but no denoiser is registered"
        )
    out = np.asarray(_external_backend(img))
    if out.shape != img.shape:
        raise ContractError(
            f"external denoiser changed image shape {img.shape} -> {out.shape}"
        )
    return (out > 0).astype(np.uint8)


def close_image(image: np.ndarray, closing_radius: int) -> np.ndarray:
    """Just the morphological closing stage of the classical backend."""
    img = _as_binary(image)
    if closing_radius <= 0:
        return img
    kernel = disk_kernel(closing_radius)
    dilated = cv2.dilate(img, kernel, borderType=cv2.BORDER_CONSTANT, borderValue=0)
    return cv2.erode(dilated, kernel, borderType=cv2.BORDER_CONSTANT, borderValue=1)
