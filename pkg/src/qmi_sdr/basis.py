"""Gaussian basis functions on (z, y) pairs and their analytic Gram matrices.

The k-th basis is exp(-(|z - u_k|^2 + |y - v_k|^2) / (2 sigma^2)) with centers
(u_k, v_k) drawn jointly from the sample.  The derivative basis is its partial
derivative in a single z coordinate.  Because the basis factorizes over the z
and y blocks, products integrated over all of (z, y) space have closed forms,
which `gram_h` and `gram_d` implement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionMismatch, TooManyCenters

DEFAULT_MAX_CENTERS = 200


@dataclass(frozen=True)
class BasisModel:
    """Gaussian basis for one output coordinate `ell` (0-based, < dz)."""

    centers_u: np.ndarray  # (b, dz)
    centers_v: np.ndarray  # (b, dy)
    sigma: float
    ell: int

    def __post_init__(self):
        u = np.atleast_2d(np.asarray(self.centers_u, dtype=float))
        v = np.atleast_2d(np.asarray(self.centers_v, dtype=float))
        if u.shape[0] != v.shape[0]:
            raise DimensionMismatch("centers_u and centers_v row counts differ")
        if u.shape[0] < 1:
            raise DimensionMismatch("need at least one center")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if not 0 <= self.ell < u.shape[1]:
            raise DimensionMismatch(f"ell={self.ell} out of range for dz={u.shape[1]}")
        u.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "centers_u", u)
        object.__setattr__(self, "centers_v", v)

    @property
    def b(self):
        return self.centers_u.shape[0]

    @property
    def dz(self):
        return self.centers_u.shape[1]

    @property
    def dy(self):
        return self.centers_v.shape[1]


def default_basis_count(n: int) -> int:
    return min(n, DEFAULT_MAX_CENTERS)


def select_centers(z, y, b, seed):
    """Draw b distinct paired centers (u_k, v_k) uniformly without replacement."""
    z = np.atleast_2d(np.asarray(z, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    n = z.shape[0]
    if b > n:
        raise TooManyCenters(f"b={b} exceeds sample count n={n}")
    idx = np.random.default_rng(seed).choice(n, size=b, replace=False)
    return z[idx].copy(), y[idx].copy()


def _sq_dists(points, centers):
    # (n, d) x (b, d) -> (n, b), clipped at 0 against rounding.
    d2 = (
        np.sum(points**2, axis=1)[:, None]
        - 2.0 * points @ centers.T
        + np.sum(centers**2, axis=1)[None, :]
    )
    return np.maximum(d2, 0.0)


def gauss_block(points, centers, sigma):
    """exp(-|p_i - c_k|^2 / (2 sigma^2)) as an (n, b) matrix."""
    return np.exp(-_sq_dists(points, centers) / (2.0 * sigma**2))


def _check_batch(m: BasisModel, z, y):
    z = np.atleast_2d(np.asarray(z, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    if z.shape[1] != m.dz:
        raise DimensionMismatch(f"z has {z.shape[1]} columns, basis expects {m.dz}")
    if y.shape[1] != m.dy:
        raise DimensionMismatch(f"y has {y.shape[1]} columns, basis expects {m.dy}")
    if z.shape[0] != y.shape[0]:
        raise DimensionMismatch("z and y row counts differ")
    return z, y


def phi_matrix(m: BasisModel, z, y):
    """Joint Gaussian basis evaluated at paired rows: (n, b) matrix."""
    z, y = _check_batch(m, z, y)
    return gauss_block(z, m.centers_u, m.sigma) * gauss_block(y, m.centers_v, m.sigma)


def varphi_matrix(m: BasisModel, z, y):
    """Derivative basis d(phi_k)/dz^(ell) at paired rows: (n, b) matrix."""
    z, y = _check_batch(m, z, y)
    pref = -(z[:, m.ell][:, None] - m.centers_u[:, m.ell][None, :]) / m.sigma**2
    return pref * phi_matrix(m, z, y)


def eval_phi(m: BasisModel, z, y):
    """Joint Gaussian basis at a single (z, y) point: length-b vector."""
    return phi_matrix(m, np.atleast_2d(z), np.atleast_2d(y))[0]


def eval_varphi(m: BasisModel, z, y):
    """Derivative basis at a single (z, y) point: length-b vector."""
    return varphi_matrix(m, np.atleast_2d(z), np.atleast_2d(y))[0]


def _pairwise_center_sq_dists(m: BasisModel):
    du2 = _sq_dists(m.centers_u, m.centers_u)
    dv2 = _sq_dists(m.centers_v, m.centers_v)
    return du2, dv2


def gram_d(m: BasisModel):
    """Closed form of the integral of psi_k psi_k' over all (z, y).

    Entry (k, k') = (sqrt(pi) sigma)^(dz+dy)
                    exp(-(|u_k - u_k'|^2 + |v_k - v_k'|^2) / (4 sigma^2)).
    """
    du2, dv2 = _pairwise_center_sq_dists(m)
    s = m.sigma
    d = (np.sqrt(np.pi) * s) ** (m.dz + m.dy) * np.exp(-(du2 + dv2) / (4.0 * s**2))
    return 0.5 * (d + d.T)


def gram_h(m: BasisModel):
    """Closed form of the integral of varphi_k varphi_k' over all (z, y).

    Entry (k, k') = sigma^-4 (sqrt(pi) sigma)^(dz+dy)
                    exp(-(|u_k - u_k'|^2 + |v_k - v_k'|^2) / (4 sigma^2))
                    (sigma^2 / 2 - (u_k^(ell) - u_k'^(ell))^2 / 4).
    """
    du2, dv2 = _pairwise_center_sq_dists(m)
    s = m.sigma
    ul = m.centers_u[:, m.ell]
    dul = ul[:, None] - ul[None, :]
    h = (
        s**-4
        * (np.sqrt(np.pi) * s) ** (m.dz + m.dy)
        * np.exp(-(du2 + dv2) / (4.0 * s**2))
        * (s**2 / 2.0 - dul**2 / 4.0)
    )
    return 0.5 * (h + h.T)
