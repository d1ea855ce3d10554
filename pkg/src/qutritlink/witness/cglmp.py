"""CGLMP Bell expression for two qutrits.

    I3 = + [P(A1 = B1) + P(B1 = A2 + 1) + P(A2 = B2) + P(B2 = A1)]
         - [P(A1 = B1 - 1) + P(B1 = A2) + P(A2 = B2 - 1) + P(B2 = A1 - 1)]

where ``P(X = Y + k)`` is the probability that the outcomes satisfy
``X - Y = k (mod 3)``. Local realism bounds ``I3 <= 2``.

Measurements are orthonormal bases stored as 3x3 unitaries whose column
``j`` is the ket for outcome ``j`` (computational index ``m`` = OAM label + 1).
The Fourier family ``|j>_alpha = sum_m exp(2 pi i m (j + alpha) / 3) |m> / sqrt3``
is parameterized by :class:`CGLMPSettings`; :class:`LocalBases` holds four
arbitrary bases.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize

from ..qstate import GELL_MANN, as_matrix

_M = np.arange(3)

# W[a, b, j, k]: weight of P(A_a = j, B_b = k) in I3 (a, b are 0-based settings)
_W = np.zeros((2, 2, 3, 3))
for _j in range(3):
    for _k in range(3):
        _d = (_j - _k) % 3  # A - B
        _W[0, 0, _j, _k] = (_d == 0) - (_d == 2)  # +P(A1=B1) - P(A1=B1-1)
        _W[1, 1, _j, _k] = (_d == 0) - (_d == 2)  # +P(A2=B2) - P(A2=B2-1)
        _W[1, 0, _j, _k] = (_d == 2) - (_d == 0)  # +P(B1=A2+1) - P(B1=A2)
        _W[0, 1, _j, _k] = (_d == 0) - (_d == 1)  # +P(B2=A1) - P(B2=A1-1)
CGLMP_WEIGHTS = _W
CGLMP_WEIGHTS.flags.writeable = False

LOCAL_BOUND = 2.0
MES_OPTIMUM = 4.0 / (6.0 * np.sqrt(3.0) - 9.0)


def fourier_basis(alpha: float) -> np.ndarray:
    """Unitary with columns ``|j>_alpha``."""
    return np.exp(2j * np.pi * np.outer(_M, _M + alpha) / 3) / np.sqrt(3)


@dataclass(frozen=True, eq=False)
class LocalBases:
    """Arbitrary measurement bases ``A1, A2`` (Alice) and ``B1, B2`` (Bob)."""

    a1: np.ndarray
    a2: np.ndarray
    b1: np.ndarray
    b2: np.ndarray

    def __post_init__(self):
        for name in ("a1", "a2", "b1", "b2"):
            u = np.array(getattr(self, name), dtype=np.complex128)
            if u.shape != (3, 3) or np.max(np.abs(u.conj().T @ u - np.eye(3))) > 1e-10:
                raise ValueError(f"basis {name} is not a 3x3 unitary")
            u.flags.writeable = False
            object.__setattr__(self, name, u)

    def bases(self) -> "LocalBases":
        return self

    def to_dict(self) -> dict:
        out: dict = {"family": "unitary"}
        for name in ("a1", "a2", "b1", "b2"):
            u = getattr(self, name)
            out[name.upper()] = {"re": u.real.tolist(), "im": u.imag.tolist()}
        return out


@dataclass(frozen=True)
class CGLMPSettings:
    """Fourier-family phases for Alice (``alpha1``, ``alpha2``) and Bob (``beta1``, ``beta2``)."""

    alpha1: float
    alpha2: float
    beta1: float
    beta2: float

    def bases(self) -> LocalBases:
        return LocalBases(*(fourier_basis(x) for x in (self.alpha1, self.alpha2, self.beta1, self.beta2)))

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.alpha1, self.alpha2, self.beta1, self.beta2)

    def to_dict(self) -> dict:
        return {"family": "fourier", "alpha1": self.alpha1, "alpha2": self.alpha2,
                "beta1": self.beta1, "beta2": self.beta2}


# Attains 4 / (6 sqrt3 - 9) on the OAM-anticorrelated MES with the conventions above.
STANDARD_SETTINGS = CGLMPSettings(0.0, 0.5, -0.25, 0.25)


def _joint(r4: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    # P[j, k] = sum conj(u[m,j]) conj(v[n,k]) rho[m n, p q] u[p,j] v[q,k]
    return np.einsum("mj,nk,mnpq,pj,qk->jk", u.conj(), v.conj(), r4, u, v, optimize=True).real


def joint_probabilities(rho, settings) -> np.ndarray:
    """Array ``P[a, b, j, k]`` of outcome probabilities for setting pair ``(a, b)`` (0-based)."""
    r4 = as_matrix(rho).reshape(3, 3, 3, 3)
    b = settings.bases()
    alice, bob = (b.a1, b.a2), (b.b1, b.b2)
    return np.array([[_joint(r4, alice[a], bob[c]) for c in range(2)] for a in range(2)])


def cglmp_probability(rho, settings, a: int, b: int, j: int, k: int) -> float:
    """``P(A_a = j, B_b = k)`` with ``a, b`` in {1, 2} and ``j, k`` in {0, 1, 2}."""
    if a not in (1, 2) or b not in (1, 2):
        raise ValueError("setting labels are 1 or 2")
    if j not in range(3) or k not in range(3):
        raise ValueError("outcomes are 0, 1 or 2")
    return float(joint_probabilities(rho, settings)[a - 1, b - 1, j, k])


def cglmp_value(rho, settings) -> float:
    return float(np.sum(CGLMP_WEIGHTS * joint_probabilities(rho, settings)))


class CGLMPOptimum(NamedTuple):
    value: float
    settings: CGLMPSettings | LocalBases


def _optimize_fourier(rho, n_starts: int, rng: np.random.Generator) -> CGLMPOptimum:
    def neg(x):
        return -cglmp_value(rho, CGLMPSettings(*x))

    starts = [np.array(STANDARD_SETTINGS.as_tuple())] + [rng.uniform(-1.5, 1.5, 4) for _ in range(n_starts)]
    best = CGLMPOptimum(-np.inf, STANDARD_SETTINGS)
    for x0 in starts:
        res = minimize(neg, x0, method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 4000})
        if -res.fun > best.value + 1e-12:
            best = CGLMPOptimum(float(-res.fun), CGLMPSettings(*(float(v) for v in res.x)))
    return best


def _expm_i_and_grad_map(h: np.ndarray):
    """``E = exp(iH)`` plus a function mapping ``dF/dconj(E)`` to ``dF/dH``-coefficients."""
    w, v = np.linalg.eigh(h)
    ew = np.exp(1j * w)
    e = (v * ew) @ v.conj().T
    half = 0.5 * np.subtract.outer(w, w)
    # divided differences of exp(i x), written in a form stable at degeneracy
    phi = 1j * np.exp(0.5j * np.add.outer(w, w)) * np.sinc(half / np.pi)

    def pull_back(g: np.ndarray) -> np.ndarray:
        a = v.conj().T @ g @ v
        c = np.conj(phi) * a
        wmat = v @ c @ v.conj().T
        return 2.0 * np.einsum("ab,pab->p", wmat.conj(), GELL_MANN).real

    return e, pull_back


class _UnitaryObjective:
    """Negative I3 as a function of 4 x 9 Hermitian generators, ``U_s = exp(i H_s) U_ref_s``."""

    def __init__(self, rho: np.ndarray, refs: list[np.ndarray]):
        self.r4 = rho.reshape(3, 3, 3, 3)
        self.refs = refs

    def unitaries(self, x: np.ndarray):
        out, maps = [], []
        for s in range(4):
            h = np.einsum("p,pab->ab", x[9 * s: 9 * s + 9], GELL_MANN)
            e, pull = _expm_i_and_grad_map(h)
            out.append(e @ self.refs[s])
            maps.append(pull)
        return out, maps

    def __call__(self, x: np.ndarray):
        us, maps = self.unitaries(x)
        alice, bob = us[:2], us[2:]
        grads = [np.zeros((3, 3), dtype=np.complex128) for _ in range(4)]
        value = 0.0
        for a in range(2):
            u = alice[a]
            for b in range(2):
                v = bob[b]
                w = CGLMP_WEIGHTS[a, b]
                # Alice-side operator conditioned on Bob outcome k: X[m, p, k]
                xa = np.einsum("nk,mnpq,qk->mpk", v.conj(), self.r4, v, optimize=True)
                probs = np.einsum("mj,mpk,pj->jk", u.conj(), xa, u, optimize=True).real
                value += np.sum(w * probs)
                grads[a] += np.einsum("jk,mpk,pj->mj", w, xa, u, optimize=True)
                xb = np.einsum("mj,mnpq,pj->nqj", u.conj(), self.r4, u, optimize=True)
                grads[2 + b] += np.einsum("jk,nqj,qk->nk", w, xb, v, optimize=True)
        grad = np.concatenate([maps[s](grads[s] @ self.refs[s].conj().T) for s in range(4)])
        return -value, -grad


def _haar_unitary(rng: np.random.Generator) -> np.ndarray:
    z = (rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _polish(u: np.ndarray) -> np.ndarray:
    """Nearest unitary (removes accumulated rounding)."""
    w, _, vh = np.linalg.svd(u)
    return w @ vh


def _optimize_unitary(rho, n_starts: int, rng: np.random.Generator, seeds) -> CGLMPOptimum:
    m = as_matrix(rho)
    starts = [[b.a1, b.a2, b.b1, b.b2] for b in (s.bases() for s in seeds)]
    starts += [[_haar_unitary(rng) for _ in range(4)] for _ in range(n_starts)]
    best = CGLMPOptimum(-np.inf, STANDARD_SETTINGS.bases())
    for refs in starts:
        obj = _UnitaryObjective(m, refs)
        res = minimize(obj, np.zeros(36), jac=True, method="L-BFGS-B",
                       options={"maxiter": 3000, "ftol": 1e-15, "gtol": 1e-10})
        us, _ = obj.unitaries(res.x)
        cand = LocalBases(*(_polish(u) for u in us))
        val = cglmp_value(m, cand)
        if val > best.value + 1e-12:
            best = CGLMPOptimum(val, cand)
    return best


def cglmp_optimize(rho, family: str = "unitary", n_starts: int = 32, seed: int = 0,
                   initial=None) -> CGLMPOptimum:
    """Maximize I3 over measurement settings.

    ``family="fourier"`` searches the four Fourier phases with Nelder-Mead
    from the standard settings plus ``n_starts`` seeded random starts.
    ``family="unitary"`` searches arbitrary local projective measurements:
    it runs the Fourier search, then gradient ascent over four unitaries
    started from the Fourier optimum, the standard settings, ``initial``
    (if given) and ``n_starts`` Haar-random bases. Deterministic for a
    fixed ``seed``.
    """
    rng = np.random.default_rng(seed)
    if family == "fourier":
        return _optimize_fourier(rho, n_starts, rng)
    if family != "unitary":
        raise ValueError(f"unknown settings family {family!r}")
    fourier = _optimize_fourier(rho, n_starts, rng)
    seeds = [fourier.settings, STANDARD_SETTINGS] + ([initial] if initial is not None else [])
    best = _optimize_unitary(rho, n_starts, rng, seeds)
    if fourier.value > best.value:
        return CGLMPOptimum(fourier.value, fourier.settings.bases())
    return best
