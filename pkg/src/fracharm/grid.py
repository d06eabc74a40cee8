"""
Periodic grids, sampled functions, spectra, and reproducible test-function
families.

Functions on R^n are modeled on a torus of period L per axis, with test
functions supported well inside one period so that periodization error is
negligible.  All multiplier operators downstream act on the integer frequency
lattice k in [-N/2, N/2)^n with physical frequency xi = k/L, following the
Fourier convention exp(-2*pi*i*x.xi).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np


def _is_power_of_two(m: int) -> bool:
    return m >= 1 and (m & (m - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    """
    A periodic grid on the n-torus of period L.

    Parameters
    ----------
    n : int
        Dimension, 1 or 2.
    N : int
        Points per axis; power of two, >= 8.
    L : float
        Period per axis, > 0.
    """

    n: int
    N: int
    L: float

    def __post_init__(self) -> None:
        if self.n not in (1, 2):
            raise ValueError(f"dimension n must be 1 or 2, got {self.n}")
        if not _is_power_of_two(self.N) or self.N < 8:
            raise ValueError(f"N must be a power of two >= 8, got {self.N}")
        if not (self.L > 0):
            raise ValueError(f"period L must be positive, got {self.L}")

    @property
    def h(self) -> float:
        """Grid spacing L/N."""
        return self.L / self.N

    @property
    def cell_volume(self) -> float:
        """Volume h^n of one grid cell."""
        return self.h**self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.n

    def axes(self) -> list[np.ndarray]:
        """Physical coordinates 0, h, 2h, ... per axis."""
        x = np.arange(self.N) * self.h
        return [x for _ in range(self.n)]

    def coords(self) -> list[np.ndarray]:
        """Coordinate arrays of full grid shape, one per axis."""
        if self.n == 1:
            return [np.arange(self.N) * self.h]
        x = np.arange(self.N) * self.h
        X, Y = np.meshgrid(x, x, indexing="ij")
        return [X, Y]

    def wavenumbers(self) -> list[np.ndarray]:
        """Integer frequency arrays k_j of full grid shape."""
        k1 = np.fft.fftfreq(self.N) * self.N
        if self.n == 1:
            return [k1]
        KX, KY = np.meshgrid(k1, k1, indexing="ij")
        return [KX, KY]

    def frequencies(self) -> list[np.ndarray]:
        """Physical frequency arrays xi_j = k_j / L of full grid shape."""
        return [k / self.L for k in self.wavenumbers()]

    def frequency_magnitude(self) -> np.ndarray:
        """|xi| on the full grid."""
        xs = self.frequencies()
        return np.sqrt(sum(x**2 for x in xs))

    def nyquist_mask(self) -> np.ndarray:
        """Boolean mask of lattice points with k_j = -N/2 on any axis."""
        mask = np.zeros(self.shape, dtype=bool)
        for k in self.wavenumbers():
            mask |= k == -self.N // 2
        return mask


@dataclass(frozen=True)
class GridFunction:
    """Real samples of a function on a GridSpec; value index j is x = j*h."""

    spec: GridSpec
    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.spec.shape:
            if v.size == self.spec.N**self.spec.n:
                v = v.reshape(self.spec.shape)
            else:
                raise ValueError(
                    f"values must have {self.spec.N ** self.spec.n} entries, "
                    f"got shape {v.shape}"
                )
        if not np.all(np.isfinite(v)):
            raise ValueError("GridFunction values must all be finite")
        object.__setattr__(self, "values", v)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(self.spec, self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(self.spec, self.values - other.values)

    def __mul__(self, other):
        if isinstance(other, GridFunction):
            return GridFunction(self.spec, self.values * other.values)
        return GridFunction(self.spec, self.values * float(other))

    __rmul__ = __mul__

    def __neg__(self) -> "GridFunction":
        return GridFunction(self.spec, -self.values)

    def mean(self) -> float:
        return float(np.mean(self.values))


@dataclass(frozen=True)
class Spectrum:
    """Complex Fourier coefficients in numpy FFT layout; coeff k is the
    coefficient of exp(2*pi*i*k.j/N)."""

    spec: GridSpec
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.coeffs, dtype=complex)
        if c.shape != self.spec.shape:
            raise ValueError(
                f"coeffs shape {c.shape} does not match grid {self.spec.shape}"
            )
        object.__setattr__(self, "coeffs", c)


def hermitian_asymmetry(coeffs: np.ndarray) -> float:
    """Max |c(k) - conj(c(-k))| over the lattice."""
    flipped = coeffs
    for ax in range(coeffs.ndim):
        flipped = np.roll(np.flip(flipped, axis=ax), 1, axis=ax)
    return float(np.max(np.abs(coeffs - np.conj(flipped))))


def fft_forward(f: GridFunction) -> Spectrum:
    """Forward transform; coefficient k is (1/N^n) sum f(x_j) e^{-2pi i k.j/N}."""
    coeffs = np.fft.fftn(f.values) / f.values.size
    return Spectrum(f.spec, coeffs)


def fft_inverse(S: Spectrum) -> GridFunction:
    """Inverse transform back to real samples; rejects non-Hermitian input."""
    scale = max(float(np.max(np.abs(S.coeffs))), 1e-300)
    asym = hermitian_asymmetry(S.coeffs)
    if asym > 1e-10 * scale:
        raise ValueError(
            f"spectrum is not Hermitian-symmetric: max asymmetry {asym:.3e} "
            f"(coefficient scale {scale:.3e})"
        )
    values = np.fft.ifftn(S.coeffs * S.coeffs.size)
    return GridFunction(S.spec, values.real)


def spectral_gradient(f: GridFunction) -> list[GridFunction]:
    """Gradient components via multipliers 2*pi*i*xi_j; Nyquist row zeroed."""
    S = fft_forward(f)
    nyq = f.spec.nyquist_mask()
    out = []
    for xi in f.spec.frequencies():
        m = 2j * np.pi * xi
        m = np.where(nyq, 0.0, m)
        g = np.fft.ifftn(m * S.coeffs * S.coeffs.size)
        out.append(GridFunction(f.spec, g.real))
    return out


@dataclass(frozen=True)
class TestFunctionDescriptor:
    """
    Deterministic recipe for a test function.

    kind is one of:
      - "gaussian": params center (tuple), width
      - "smooth-bump": params center (tuple), radius
      - "sine": params kvec (integer tuple)
      - "random-bandlimited": params seed, max_k
      - "constant": the value amplitude everywhere

    Modifiers: translate tau (tuple), dilate lam > 0 (shrinks support by the
    factor lam about the center; multiplies sine/bandlimited frequencies by
    lam), amplitude a.
    """

    kind: str
    center: tuple[float, ...] | None = None
    width: float | None = None
    radius: float | None = None
    kvec: tuple[int, ...] | None = None
    seed: int | None = None
    max_k: int | None = None
    translate: tuple[float, ...] = ()
    dilate: float = 1.0
    amplitude: float = 1.0

    def dilated(self, lam: float) -> "TestFunctionDescriptor":
        return replace(self, dilate=self.dilate * lam)


def _wrapped_displacement(spec: GridSpec, center: tuple[float, ...],
                          translate: tuple[float, ...]) -> list[np.ndarray]:
    """Minimum-image displacement of each grid point from center+translate."""
    coords = spec.coords()
    tau = translate if translate else (0.0,) * spec.n
    out = []
    for j in range(spec.n):
        d = coords[j] - center[j] - tau[j]
        d = (d + spec.L / 2) % spec.L - spec.L / 2
        out.append(d)
    return out


def _bandlimited_values(desc: TestFunctionDescriptor, spec: GridSpec) -> np.ndarray:
    if desc.seed is None or desc.max_k is None:
        raise ValueError("random-bandlimited requires seed and max_k")
    lam = desc.dilate
    rng = np.random.default_rng(desc.seed)
    coeffs = np.zeros(spec.shape, dtype=complex)
    kmax = desc.max_k
    if spec.n == 1:
        modes = [(k,) for k in range(1, kmax + 1)]
    else:
        modes = [
            (kx, ky)
            for kx in range(-kmax, kmax + 1)
            for ky in range(-kmax, kmax + 1)
            if (kx, ky) > (0, 0)
        ]
    tau = desc.translate if desc.translate else (0.0,) * spec.n
    for mode in modes:
        re, im = rng.standard_normal(2)
        scaled = tuple(lam * m for m in mode)
        idx_f = [round(s) for s in scaled]
        if any(abs(s - i) > 1e-9 for s, i in zip(scaled, idx_f)):
            raise ValueError(
                f"dilate {lam} maps mode {mode} to non-integer frequency"
            )
        if any(abs(i) > spec.N // 2 - 1 for i in idx_f):
            raise ValueError(
                f"dilated mode {idx_f} exceeds resolvable band of N={spec.N}"
            )
        c = (re + 1j * im) / 2
        phase = np.exp(-2j * np.pi * sum(i * t for i, t in zip(idx_f, tau)) / spec.L)
        c = c * phase
        pos = tuple(i % spec.N for i in idx_f)
        neg = tuple((-i) % spec.N for i in idx_f)
        coeffs[pos] += c
        coeffs[neg] += np.conj(c)
    values = np.fft.ifftn(coeffs * coeffs.size).real
    peak = np.max(np.abs(values))
    if peak > 0:
        values = values / peak
    return desc.amplitude * values


def make_function(desc: TestFunctionDescriptor, spec: GridSpec) -> GridFunction:
    """Sample a test function; bit-identical output for equal (desc, spec)."""
    lam = desc.dilate
    if not (lam > 0):
        raise ValueError(f"dilate must be positive, got {lam}")

    if desc.kind == "gaussian":
        if desc.center is None or desc.width is None:
            raise ValueError("gaussian requires center and width")
        w_eff = desc.width / lam
        if w_eff > spec.L / 12:
            raise ValueError(
                f"gaussian effective width {w_eff:.4g} too large for period "
                f"{spec.L} (must be <= L/12 to keep support inside one period)"
            )
        d = _wrapped_displacement(spec, desc.center, desc.translate)
        r2 = sum((lam * dj) ** 2 for dj in d)
        values = desc.amplitude * np.exp(-r2 / (2 * desc.width**2))
        return GridFunction(spec, values)

    if desc.kind == "smooth-bump":
        if desc.center is None or desc.radius is None:
            raise ValueError("smooth-bump requires center and radius")
        r_eff = desc.radius / lam
        if r_eff > spec.L / 2.5:
            raise ValueError(
                f"bump effective radius {r_eff:.4g} too large for period "
                f"{spec.L} (support must stay inside one period)"
            )
        d = _wrapped_displacement(spec, desc.center, desc.translate)
        rho2 = sum((lam * dj / desc.radius) ** 2 for dj in d)
        values = np.zeros(spec.shape)
        inside = rho2 < 1.0
        values[inside] = np.exp(1.0 - 1.0 / (1.0 - rho2[inside]))
        return GridFunction(spec, desc.amplitude * values)

    if desc.kind == "sine":
        if desc.kvec is None:
            raise ValueError("sine requires kvec")
        scaled = tuple(lam * k for k in desc.kvec)
        kl = [round(s) for s in scaled]
        if any(abs(s - i) > 1e-9 for s, i in zip(scaled, kl)):
            raise ValueError(f"dilate {lam} maps kvec {desc.kvec} off the lattice")
        if any(abs(i) > spec.N // 2 - 1 for i in kl):
            raise ValueError(f"dilated kvec {kl} exceeds resolvable band")
        coords = spec.coords()
        tau = desc.translate if desc.translate else (0.0,) * spec.n
        phase = sum(k * (x - t) for k, x, t in zip(kl, coords, tau))
        values = desc.amplitude * np.sin(2 * np.pi * phase / spec.L)
        return GridFunction(spec, values)

    if desc.kind == "random-bandlimited":
        return GridFunction(spec, _bandlimited_values(desc, spec))

    if desc.kind == "constant":
        return GridFunction(spec, np.full(spec.shape, desc.amplitude))

    raise ValueError(f"unknown test-function kind: {desc.kind!r}")
