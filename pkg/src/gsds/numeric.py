"""Floating-point helpers shared by the solvers and the tracer.

:class:`PolyEval` compiles an exact :class:`~gsds.polycore.Poly` into numpy
arrays for vectorised complex evaluation over many points at once;
:func:`damped_newton` runs Newton (square systems) or Gauss-Newton
(overdetermined systems) from a batch of starts; :func:`dedup` merges
nearby roots deterministically.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from .polycore import Poly

_CHUNK = 4096


class PolyEval:
    """A polynomial frozen to double-precision complex coefficients.

    With ``normalize=True`` coefficients are divided by the largest absolute
    coefficient first (exactly, so huge rationals do not overflow).
    """

    def __init__(self, p: Poly, variables: Sequence[str], normalize: bool = False,
                 scale: Optional[Fraction] = None):
        p = p.with_variables(tuple(variables))
        self.variables = tuple(variables)
        if scale is None:
            scale = p.max_abs_coeff() if (normalize and not p.is_zero()) else Fraction(1)
        self.scale = scale
        items = list(p.terms.items())
        n = len(self.variables)
        self.exps = np.array([e for e, _ in items], dtype=np.int64).reshape(len(items), n)
        self.coef = np.array([complex(c / scale) for _, c in items], dtype=complex)
        self.maxdeg = self.exps.max(axis=0) if len(items) else np.zeros(n, dtype=np.int64)

    def _monomials(self, X: np.ndarray) -> np.ndarray:
        out = np.ones((X.shape[0], len(self.coef)), dtype=complex)
        for i in range(X.shape[1]):
            k = int(self.maxdeg[i])
            if k == 0:
                continue
            pw = X[:, i, None] ** np.arange(k + 1)
            out *= pw[:, self.exps[:, i]]
        return out

    def __call__(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=complex))
        if not len(self.coef):
            return np.zeros(X.shape[0], dtype=complex)
        res = np.empty(X.shape[0], dtype=complex)
        for s in range(0, X.shape[0], _CHUNK):
            res[s:s + _CHUNK] = self._monomials(X[s:s + _CHUNK]) @ self.coef
        return res

    def magnitude(self, X) -> np.ndarray:
        """``sum |c| |monomial|``: the natural scale for a relative residual."""
        X = np.atleast_2d(np.asarray(X, dtype=complex))
        if not len(self.coef):
            return np.ones(X.shape[0])
        res = np.empty(X.shape[0])
        ac = np.abs(self.coef)
        for s in range(0, X.shape[0], _CHUNK):
            res[s:s + _CHUNK] = np.abs(self._monomials(X[s:s + _CHUNK])) @ ac
        return res


@dataclass
class System:
    """Equations ``F`` and Jacobian ``J[i][j] = dF_i/dx_j`` as compiled evaluators."""
    F: List[PolyEval]
    J: List[List[PolyEval]]

    @classmethod
    def build(cls, polys: Sequence[Poly], variables: Sequence[str],
              normalize: bool = True) -> "System":
        F, J = [], []
        for p in polys:
            p = p.with_variables(tuple(variables))
            s = p.max_abs_coeff() if normalize and not p.is_zero() else Fraction(1)
            F.append(PolyEval(p, variables, scale=s))
            J.append([PolyEval(p.diff(v), variables, scale=s) for v in variables])
        return cls(F, J)

    def values(self, X: np.ndarray) -> np.ndarray:
        return np.stack([f(X) for f in self.F], axis=1)

    def jacobian(self, X: np.ndarray) -> np.ndarray:
        return np.stack([np.stack([d(X) for d in row], axis=1) for row in self.J], axis=1)

    def relative_residual(self, X: np.ndarray) -> np.ndarray:
        vals = np.abs(self.values(X))
        mags = np.stack([f.magnitude(X) for f in self.F], axis=1)
        return (vals / np.maximum(mags, 1e-300)).max(axis=1)


@dataclass
class NewtonResult:
    X: np.ndarray
    residual: np.ndarray
    converged: np.ndarray
    iterations: int


def damped_newton(system: System, X0: np.ndarray, *, max_iter: int = 200,
                  max_halvings: int = 40, step_tol: float = 1e-14,
                  blowup: float = 1e12,
                  linear: Optional[Tuple[np.ndarray, np.ndarray]] = None) -> NewtonResult:
    """Damped (Gauss-)Newton from every row of ``X0``.

    Each step solves ``J dx = F`` in the least-squares sense and is halved
    until ``|F|`` decreases (at most ``max_halvings`` times).  A start stops
    when the accepted step is below ``step_tol * (1 + |x|)``; starts whose
    residual cannot be decreased or whose iterates exceed ``blowup`` are
    marked as not converged.

    ``linear = (A, b)`` appends per-start affine equations ``A[n] x + b[n] = 0``
    (shapes ``(N, k, dim)`` and ``(N, k)``), e.g. random slicing hyperplanes.
    """
    X = np.array(X0, dtype=complex, copy=True)
    N = X.shape[0]
    if linear is None:
        vals, jac = system.values, system.jacobian
    else:
        A_all, b_all = linear
        sel = {"idx": np.arange(N)}

        def vals(x):
            i = sel["idx"]
            return np.concatenate([system.values(x), np.einsum("nkj,nj->nk", A_all[i], x) + b_all[i]], axis=1)

        def jac(x):
            return np.concatenate([system.jacobian(x), A_all[sel["idx"]]], axis=1)
    res = np.linalg.norm(vals(X), axis=1)
    active = np.isfinite(res)
    converged = np.zeros(N, dtype=bool)
    it = 0
    for it in range(1, max_iter + 1):
        idx = np.nonzero(active)[0]
        if not len(idx):
            break
        x = X[idx]
        if linear is not None:
            sel["idx"] = idx
        F = vals(x)
        J = jac(x)
        step = np.einsum("nij,nj->ni", np.linalg.pinv(J, rcond=1e-14), F)
        r0 = res[idx]
        lam = np.ones(len(idx))
        xn = x - step
        rn = np.linalg.norm(vals(xn), axis=1)
        bad = ~(rn < r0)
        for _ in range(max_halvings):
            if not bad.any():
                break
            lam[bad] *= 0.5
            xb = x[bad] - lam[bad, None] * step[bad]
            xn[bad] = xb
            if linear is not None:
                sel["idx"] = idx[bad]
            rn[bad] = np.linalg.norm(vals(xb), axis=1)
            bad = ~(rn < r0)
        # a zero residual cannot decrease; such starts are already solved
        solved = r0 == 0
        moved = ~bad
        X[idx[moved]] = xn[moved]
        res[idx[moved]] = rn[moved]
        size = lam * np.linalg.norm(step, axis=1)
        small = size <= step_tol * (1 + np.linalg.norm(x, axis=1))
        done = solved | (moved & small) | (bad & (size <= 1e-10 * (1 + np.linalg.norm(x, axis=1))))
        converged[idx[done]] = True
        active[idx[done]] = False
        stuck = bad & ~done
        active[idx[stuck]] = False
        big = ~np.isfinite(X[idx]).all(axis=1) | (np.abs(X[idx]).max(axis=1) > blowup)
        active[idx[big]] = False
    finite = np.isfinite(X).all(axis=1)
    converged &= finite
    return NewtonResult(X, res, converged, it)


def dedup(points: np.ndarray, tol: float, score: Optional[np.ndarray] = None
          ) -> Tuple[np.ndarray, List[List[int]]]:
    """Merge points closer than ``tol`` (Euclidean in C^n).

    Points are first sorted lexicographically by (real, imaginary) parts of
    each coordinate so the result does not depend on input order.  Each
    cluster (transitive closure of the ``tol`` relation) is represented by
    its member with the smallest ``score`` (default: first in sorted order).
    Returns the representatives' indices into ``points`` and the clusters.
    """
    pts = np.asarray(points, dtype=complex)
    if not len(pts):
        return np.zeros(0, dtype=np.int64), []
    real = np.concatenate([pts.real, pts.imag], axis=1)
    keys = []
    for j in range(pts.shape[1]):
        keys += [pts[:, j].real, pts[:, j].imag]
    order = np.lexsort(tuple(reversed(keys)))
    parent = list(range(len(pts)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    tree = cKDTree(real)
    for i, j in sorted(tree.query_pairs(tol)):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    clusters: dict = {}
    for i in order:
        clusters.setdefault(find(int(i)), []).append(int(i))
    groups = list(clusters.values())  # already in sorted order of first member
    reps = []
    for g in groups:
        if score is None:
            reps.append(g[0])
        else:
            reps.append(min(g, key=lambda k: (score[k], g.index(k))))
    return np.array(reps, dtype=np.int64), groups


def complex_box(rng: np.random.Generator, n: int, dim: int, radius: float,
                inner: float = 1e-2) -> np.ndarray:
    """Random complex points with log-uniform moduli in ``[inner, radius]``."""
    radius = max(radius, inner * 10)
    mod = np.exp(rng.uniform(np.log(inner), np.log(radius), size=(n, dim)))
    ang = rng.uniform(0, 2 * np.pi, size=(n, dim))
    return mod * np.exp(1j * ang)


def roots_in(poly_coeffs_desc: np.ndarray) -> np.ndarray:
    """numpy roots that tolerate leading zeros and all-zero input."""
    c = np.trim_zeros(np.asarray(poly_coeffs_desc, dtype=complex), "f")
    if len(c) <= 1:
        return np.zeros(0, dtype=complex)
    return np.roots(c)
