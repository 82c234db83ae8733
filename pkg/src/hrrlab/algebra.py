"""Core algebra for holographic reduced representations (HRR).

Vectors live in R^D and are handled as plain 1-D numpy float64 arrays.
The algebra consists of

* binding: circular convolution, computed in the Fourier domain,
* superposition: componentwise addition (never normalized here),
* similarity: the raw dot product,
* convolutive powers: exponentiation of the Fourier coefficients, which
  turns a unitary base vector into an encoder for continuous values.

The DFT convention is numpy's: unnormalized forward transform, 1/D on the
inverse. Under this convention ``bind`` equals the textbook circular
convolution sum exactly, and a vector whose Fourier coefficients all have
magnitude 1 ("unitary") has Euclidean norm 1.

All operations are pure: inputs are never mutated and results are freshly
allocated, so values can be shared freely across threads.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import BinaryIO, Iterable, Sequence

import numpy as np

__all__ = [
    "NotUnitaryError",
    "SimilarityThresholds",
    "SingularSpectrumError",
    "bind",
    "involution",
    "is_unitary",
    "load_vector",
    "power",
    "random_unit",
    "random_unitary",
    "save_vector",
    "similarity",
    "spectrum",
    "superpose",
    "thresholds",
]

# Slack allowed on spectral magnitudes when a fractional power requires a
# unitary base. Repeated binds drift magnitudes by a few ulp only, so this
# is generous without accepting genuinely non-unitary vectors.
UNITARY_ATOL = 1e-6


class SingularSpectrumError(ValueError):
    """A power that must invert the spectrum hit a zero Fourier coefficient."""


class NotUnitaryError(ValueError):
    """A fractional convolutive power was requested for a non-unitary vector."""


def _as_vector(x, name: str = "vector") -> np.ndarray:
    """Validate and return ``x`` as a 1-D float64 array of dimension >= 2."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"{name} must be 1-dimensional, got shape {v.shape}")
    if v.size < 2:
        raise ValueError(f"{name} must have dimension >= 2, got {v.size}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite components")
    return v


def _check_same_dim(v: np.ndarray, w: np.ndarray) -> None:
    if v.size != w.size:
        raise ValueError(f"dimension mismatch: {v.size} vs {w.size}")


def _check_dim(dim: int) -> int:
    if int(dim) != dim:
        raise ValueError(f"dimension must be an integer, got {dim!r}")
    dim = int(dim)
    if dim < 2:
        raise ValueError(f"dimension must be >= 2, got {dim}")
    return dim


def random_unit(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Draw a vector uniformly from the unit sphere in R^dim.

    Components are i.i.d. standard normal, then the vector is scaled to
    Euclidean norm 1.
    """
    dim = _check_dim(dim)
    v = rng.standard_normal(dim)
    n = float(np.linalg.norm(v))
    while n == 0.0:  # probability zero, but keep the contract airtight
        v = rng.standard_normal(dim)
        n = float(np.linalg.norm(v))
    return v / n


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Draw a random unitary vector: every Fourier coefficient has magnitude 1.

    The spectrum is built directly with uniformly random phases on the free
    (conjugate-paired) frequencies. The self-conjugate coefficients at
    frequency 0 and, for even dim, dim/2 are fixed to +1 so that fractional
    powers compose exactly (phase 0 stays 0 under any exponent). Binding
    with the result preserves norms, and the vector itself has norm 1.
    """
    dim = _check_dim(dim)
    n_free = (dim - 1) // 2
    spec = np.ones(dim // 2 + 1, dtype=np.complex128)
    spec[1 : n_free + 1] = np.exp(1j * rng.uniform(-np.pi, np.pi, n_free))
    return np.fft.irfft(spec, n=dim)


def spectrum(v) -> np.ndarray:
    """Forward DFT of a vector (unnormalized convention), length D complex."""
    return np.fft.fft(_as_vector(v))


def is_unitary(v, atol: float = 1e-10) -> bool:
    """True if every Fourier coefficient of ``v`` has magnitude 1 within atol."""
    mags = np.abs(spectrum(v))
    return bool(np.all(np.abs(mags - 1.0) <= atol))


def bind(v, w) -> np.ndarray:
    """Bind two vectors by circular convolution.

    Equivalent to ``result[k] = sum_j v[j] * w[(k - j) mod D]``; computed as
    the inverse DFT of the elementwise product of the spectra. Commutative
    and associative.
    """
    v = _as_vector(v, "v")
    w = _as_vector(w, "w")
    _check_same_dim(v, w)
    return np.fft.irfft(np.fft.rfft(v) * np.fft.rfft(w), n=v.size)


def superpose(vs: Sequence) -> np.ndarray:
    """Componentwise sum of a non-empty sequence of equal-dimension vectors.

    The result is deliberately not normalized; callers that need cosine
    readings divide by the norm themselves.
    """
    vecs = [_as_vector(v, f"vs[{i}]") for i, v in enumerate(vs)]
    if not vecs:
        raise ValueError("superpose requires at least one vector")
    out = np.zeros_like(vecs[0])
    for v in vecs:
        _check_same_dim(vecs[0], v)
        out += v
    return out


def power(v, p: float) -> np.ndarray:
    """Convolutive power: raise every Fourier coefficient of ``v`` to ``p``.

    Integer exponents are valid for any vector (negative ones require a
    zero-free spectrum). Non-integer exponents are only defined here for
    unitary vectors; the principal complex logarithm fixes the branch, so
    phases are taken in (-pi, pi]. The real part of the inverse transform
    is returned.

    Raises:
        SingularSpectrumError: spectrum has a zero coefficient that the
            exponent would need to invert or root.
        NotUnitaryError: non-integer ``p`` on a non-unitary vector.
    """
    v = _as_vector(v)
    p = float(p)
    if not np.isfinite(p):
        raise ValueError(f"exponent must be finite, got {p}")
    spec = np.fft.fft(v)
    if p == round(p):
        n = int(round(p))
        if n < 0 and np.any(spec == 0):
            raise SingularSpectrumError(
                "negative power of a vector with a zero Fourier coefficient"
            )
        powered = spec**n
    else:
        mags = np.abs(spec)
        if np.any(mags == 0.0):
            raise SingularSpectrumError(
                "fractional power of a vector with a zero Fourier coefficient"
            )
        if np.any(np.abs(mags - 1.0) > UNITARY_ATOL):
            raise NotUnitaryError(
                "fractional powers are only defined for unitary vectors "
                "(all spectral magnitudes 1); got magnitudes in "
                f"[{mags.min():.6g}, {mags.max():.6g}]"
            )
        powered = np.power(spec, p)
    return np.real(np.fft.ifft(powered))


def involution(v) -> np.ndarray:
    """Index-reversed vector: result[0] = v[0], result[k] = v[D-k].

    This conjugates the spectrum, so for a unitary vector it is the exact
    binding inverse: bind(u, involution(u)) is the identity vector
    (1, 0, ..., 0). For general vectors it is the usual approximate
    unbinding key.
    """
    v = _as_vector(v)
    return np.concatenate((v[:1], v[:0:-1]))


def similarity(v, w) -> float:
    """Raw dot product of two equal-dimension vectors.

    Atomic vectors are unit norm throughout this package, so this doubles
    as cosine similarity for them; callers normalize explicitly when a
    cosine reading of a non-unit vector is required.
    """
    v = _as_vector(v, "v")
    w = _as_vector(w, "w")
    _check_same_dim(v, w)
    return float(v @ w)


@dataclass(frozen=True)
class SimilarityThresholds:
    """Similarity levels below which vectors are considered unrelated.

    The dot product of two independent random unit vectors in R^D is
    approximately normal with mean 0 and standard deviation 1/sqrt(D);
    ``weak`` and ``strong`` are the 2-sigma and 3-sigma levels.
    """

    weak: float
    strong: float


def thresholds(dim: int) -> SimilarityThresholds:
    """Weak (2/sqrt(D)) and strong (3/sqrt(D)) similarity thresholds."""
    dim = _check_dim(dim)
    root = float(np.sqrt(dim))
    return SimilarityThresholds(weak=2.0 / root, strong=3.0 / root)


def save_vector(file: str | Path | BinaryIO, v) -> None:
    """Write a vector as a little-endian uint64 dimension followed by D
    little-endian float64 components."""
    v = _as_vector(v)
    if isinstance(file, (str, Path)):
        with open(file, "wb") as fh:
            save_vector(fh, v)
        return
    file.write(struct.pack("<Q", v.size))
    file.write(v.astype("<f8").tobytes())


def load_vector(file: str | Path | BinaryIO) -> np.ndarray:
    """Read a vector written by :func:`save_vector`."""
    if isinstance(file, (str, Path)):
        with open(file, "rb") as fh:
            return load_vector(fh)
    header = file.read(8)
    if len(header) != 8:
        raise ValueError("truncated vector file: missing dimension header")
    (dim,) = struct.unpack("<Q", header)
    raw = file.read(8 * dim)
    if len(raw) != 8 * dim:
        raise ValueError(
            f"truncated vector file: expected {dim} components, "
            f"got {len(raw) // 8}"
        )
    return np.frombuffer(raw, dtype="<f8").astype(np.float64)
