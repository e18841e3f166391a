"""Dense complex linear algebra helpers.

Everything here operates on plain ``numpy`` complex arrays.  Entropies are in
nats.  The Schatten exponent ``p = inf`` is passed as the module-level
sentinel :data:`INF`, never as a large float.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

INF = float("inf")

# eigenvalues below this are treated as exact zeros in entropies
ENTROPY_CLAMP = 1e-14
DENSITY_TOL = 1e-8


class DensityError(ValueError):
    pass


def kron(a, b):
    return np.kron(np.asarray(a), np.asarray(b))


def kron_all(*ms):
    out = np.ones((1, 1), dtype=complex)
    for m in ms:
        out = np.kron(out, m)
    return out


def dag(a):
    return np.conj(np.swapaxes(a, -1, -2))


def partial_trace(m, dims, keep):
    """Trace out every tensor factor of ``m`` whose index is not in ``keep``.

    ``dims`` lists the factor dimensions in order; the kept factors retain
    their original order.
    """
    m = np.asarray(m)
    dims = [int(d) for d in dims]
    total = int(np.prod(dims))
    if m.ndim != 2 or m.shape != (total, total):
        raise ValueError(f"matrix shape {m.shape} does not match dims {dims}")
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= len(dims) for k in keep):
        raise ValueError(f"keep indices {keep} out of range for {len(dims)} factors")
    n = len(dims)
    t = m.reshape(dims + dims)
    # contract traced factors pairwise, highest index first so positions stay valid
    traced = [i for i in range(n) if i not in keep]
    cur = n
    for i in reversed(traced):
        t = np.trace(t, axis1=i, axis2=i + cur)
        cur -= 1
    d = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(d, d)


def is_hermitian(a, tol=1e-12):
    a = np.asarray(a)
    return a.shape[0] == a.shape[1] and np.max(np.abs(a - dag(a)), initial=0.0) <= tol


def herm(a):
    return 0.5 * (a + dag(a))


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # columns


def eigh(a) -> Spectrum:
    """Hermitian eigendecomposition, eigenvalues in descending order."""
    w, v = np.linalg.eigh(herm(np.asarray(a, dtype=complex)))
    return Spectrum(w[::-1].copy(), v[:, ::-1].copy())


def jacobi_eigh(a, tol=1e-13, max_sweeps=100) -> Spectrum:
    """Cyclic Jacobi eigensolver for Hermitian matrices.

    Slow but independent of LAPACK; used as a cross-check for :func:`eigh`.
    """
    a = herm(np.array(a, dtype=complex))
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    scale = max(np.linalg.norm(a), 1e-300)
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off < tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    continue
                # remove the phase so the 2x2 block is real symmetric
                phase = apq / abs(apq)
                app, aqq = a[p, p].real, a[q, q].real
                theta = 0.5 * np.arctan2(2 * abs(apq), aqq - app)
                c, s = np.cos(theta), np.sin(theta)
                r = np.eye(n, dtype=complex)
                r[p, p] = c
                r[q, q] = c
                r[p, q] = s * phase
                r[q, p] = -s * np.conj(phase)
                # rotation zeroes a[p, q] for this convention
                a = dag(r) @ a @ r
                v = v @ r
    w = np.real(np.diag(a))
    order = np.argsort(w)[::-1]
    return Spectrum(w[order], v[:, order])


def psd_power(a, s):
    """a**s for a PSD matrix, negative eigenvalues clamped to zero."""
    w, v = np.linalg.eigh(herm(a))
    if s <= 0:
        raise ValueError("psd_power needs a positive exponent")
    return (v * np.clip(w, 0.0, None) ** s) @ dag(v)


def psd_log(a, floor=1e-12):
    w, v = np.linalg.eigh(herm(a))
    return (v * np.log(np.clip(w, floor, None))) @ dag(v)


def singular_values(a):
    return np.linalg.svd(np.asarray(a), compute_uv=False)


def schatten_norm(a, p):
    if p != INF and not p >= 1:
        raise ValueError(f"Schatten exponent must be >= 1, got {p}")
    a = np.asarray(a)
    if a.shape[0] == a.shape[1] and is_hermitian(a, 1e-12 * max(1.0, np.abs(a).max(initial=0))):
        s = np.abs(np.linalg.eigvalsh(herm(a)))
    else:
        s = singular_values(a)
    return lp_norm(s, p)


def lp_norm(s, p):
    s = np.abs(np.asarray(s, dtype=float))
    if s.size == 0:
        return 0.0
    top = s.max()
    if p == INF or top == 0.0:
        return float(top)
    # factor out the largest entry to avoid overflow for large p
    return float(top * np.sum((s / top) ** p) ** (1.0 / p))


def shannon(prob):
    prob = np.asarray(prob, dtype=float)
    prob = prob[prob > ENTROPY_CLAMP]
    return float(-np.sum(prob * np.log(prob)))


def spectrum_entropy(a):
    """Entropy of the spectrum of a PSD matrix, without validation."""
    return shannon(np.linalg.eigvalsh(herm(a)))


def validate_density(rho, tol=DENSITY_TOL):
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DensityError(f"density must be square, got shape {rho.shape}")
    if not is_hermitian(rho, max(tol, 1e-12)):
        raise DensityError("density is not Hermitian")
    w = np.linalg.eigvalsh(herm(rho))
    if w.min() < -tol:
        raise DensityError(f"negative eigenvalue {w.min():.3e}")
    t = float(np.sum(w))
    if abs(t - 1.0) > tol:
        raise DensityError(f"trace {t!r} deviates from 1")
    return herm(rho) / t


def von_neumann_entropy(rho):
    rho = validate_density(rho)
    return spectrum_entropy(rho)


def binary_entropy(x):
    return shannon([x, 1.0 - x])


@dataclass
class RandomSource:
    """Seeded sample stream.  Parallel consumers take ``child(i)``."""

    seed: int
    gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        self.seed = int(self.seed) & 0xFFFFFFFFFFFFFFFF
        self.gen = np.random.Generator(np.random.PCG64(self.seed))

    def child(self, index):
        return RandomSource(self.seed ^ int(index))

    def normal(self, *shape):
        return self.gen.standard_normal(shape)

    def ginibre(self, rows, cols):
        return (self.gen.standard_normal((rows, cols)) + 1j * self.gen.standard_normal((rows, cols))) / np.sqrt(2)

    def uniform(self, *shape):
        return self.gen.random(shape)


def haar_unitary(d, rng: RandomSource):
    q, r = np.linalg.qr(rng.ginibre(d, d))
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_density(d, rng: RandomSource, rank=None):
    g = rng.ginibre(d, rank or d)
    rho = g @ dag(g)
    return herm(rho / np.trace(rho).real)


def random_pure_bipartite(da, db, rng: RandomSource):
    v = rng.ginibre(da * db, 1)[:, 0]
    return v / np.linalg.norm(v)


def random_prob_vector(n, rng: RandomSource):
    x = rng.gen.exponential(size=n)
    return x / x.sum()


def sample(kind, *dims, rng: RandomSource):
    """Dispatch on ``kind`` in {haar_unitary, density, pure_bipartite, prob_vector}."""
    if any(int(d) < 1 for d in dims):
        raise ValueError("dimensions must be positive")
    table = {
        "haar_unitary": haar_unitary,
        "density": random_density,
        "pure_bipartite": random_pure_bipartite,
        "prob_vector": random_prob_vector,
    }
    if kind not in table:
        raise ValueError(f"unknown sample kind {kind!r}")
    return table[kind](*dims, rng=rng)


def max_entangled(d):
    v = np.zeros(d * d, dtype=complex)
    v[:: d + 1] = 1.0
    return v / np.sqrt(d)


def proj(v):
    v = np.asarray(v).reshape(-1, 1)
    return v @ dag(v)


def basis(d, i):
    e = np.zeros(d, dtype=complex)
    e[i] = 1.0
    return e


def unit(d, i, j):
    e = np.zeros((d, d), dtype=complex)
    e[i, j] = 1.0
    return e
