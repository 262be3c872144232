"""One-step transfer-matrix discretizations of the Zakharov-Shabat system.

All kernels act on the rotated solution ``psi = (phi1*exp(j*lam*t),
phi2*exp(-j*lam*t))`` whose equation has the purely off-diagonal matrix

    F(t; lam) = [[0, q(t)*exp(2j*lam*t)], [-conj(q(t))*exp(-2j*lam*t), 0]].

Every step matrix has the shape

    [[D,            S*e ],
     [-S/e,         D   ]],   e = exp(j*theta_n + 2j*lam*t_n),

with real ``D`` and ``S`` that depend on the kernel and on ``|q_n|*h`` only.
Only the off-diagonal entries depend on ``lam``, which makes the derivative
``dG/dlam = [[0, 2j*t*G12], [-2j*t*G21, 0]]`` the same for every kernel.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numba
import numpy as np

from .exceptions import ScatteringOverflowError
from .spectra import SampledPulse, ScatteringData, TransferMatrix

# exp(709) is the largest finite double; leave headroom for the accumulators
MAX_EXPONENT = 650.0


class KernelKind(str, enum.Enum):
    TRAPEZOID = "trapezoid"
    EULER = "euler"
    CRANK_NICOLSON = "cn"
    ABLOWITZ_LADIK = "al"

    @classmethod
    def parse(cls, value) -> "KernelKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {"td": "trapezoid", "crank-nicolson": "cn", "crank_nicolson": "cn",
                   "ablowitz-ladik": "al", "forward": "euler"}
        return cls(aliases.get(key, key))

    @property
    def has_half_steps(self) -> bool:
        return self is KernelKind.TRAPEZOID

    @property
    def unit_determinant(self) -> bool:
        return self is not KernelKind.EULER


def _diag_offdiag(kind: KernelKind, qh):
    """``(D, S)`` for step matrices with signed ``|q|*h`` values ``qh``."""
    qh = np.asarray(qh, dtype=float)
    if kind is KernelKind.TRAPEZOID:
        return np.cos(qh), np.sin(qh)
    if kind is KernelKind.EULER:
        return np.ones_like(qh), qh
    if kind is KernelKind.CRANK_NICOLSON:
        x = 0.25 * qh * qh
        return (1.0 - x) / (1.0 + x), qh / (1.0 + x)
    if kind is KernelKind.ABLOWITZ_LADIK:
        r = np.sqrt(1.0 + qh * qh)
        return 1.0 / r, qh / r
    raise ValueError(f"unknown kernel {kind!r}")


def _phase(q):
    # theta = arg(q) is undefined at q = 0 where S = 0 anyway; pick 0
    return np.where(q == 0, 0.0, np.angle(q))


def step_matrix(kind, q_n: complex, t_n: float, lam: complex, h: float) -> TransferMatrix:
    """Single step matrix ``G_n``.

    ``h`` may be negative, which yields ``G_n^{-1}`` for the unit-determinant
    kernels, and ``+-h/2`` gives the trapezoid half steps ``G_n^{+-1/2}``.
    """
    kind = KernelKind.parse(kind)
    D, S = _diag_offdiag(kind, abs(q_n) * h)
    D, S = float(D), float(S)
    if S == 0.0:
        return TransferMatrix(D, 0.0, 0.0, D)
    e = np.exp(1j * float(_phase(q_n)) + 2j * lam * t_n)
    return TransferMatrix(D, S * e, -S / e, D)


def step_matrix_dlambda(kind, q_n: complex, t_n: float, lam: complex, h: float) -> TransferMatrix:
    """Exact ``d G_n / d lambda``."""
    g = step_matrix(kind, q_n, t_n, lam, h)
    return TransferMatrix(0.0, 2j * t_n * g.m12, -2j * t_n * g.m21, 0.0)


@dataclass(frozen=True)
class FactorChain:
    """The ordered list of step matrices whose product maps ``t=-T0`` to ``t=T0``.

    Trapezoid: ``G_0^{1/2}, G_1, ..., G_N, G_N^{-1/2}`` (``N + 2`` factors).
    Other kernels: ``G_0, ..., G_{N-1}`` (``N`` factors, no end corrections).
    """

    kind: KernelKind
    D: np.ndarray
    S: np.ndarray
    theta: np.ndarray
    t: np.ndarray
    log_det: np.ndarray

    @classmethod
    def build(cls, pulse: SampledPulse, kind) -> "FactorChain":
        kind = KernelKind.parse(kind)
        q, t, h = pulse.samples, pulse.t, pulse.step
        absq, theta = np.abs(q), _phase(q)
        if kind.has_half_steps:
            qh = np.concatenate(([absq[0] * h / 2], absq[1:] * h, [-absq[-1] * h / 2]))
            theta = np.concatenate(([theta[0]], theta[1:], [theta[-1]]))
            t = np.concatenate(([t[0]], t[1:], [t[-1]]))
        else:
            qh, theta, t = absq[:-1] * h, theta[:-1], t[:-1]
        D, S = _diag_offdiag(kind, qh)
        log_det = np.log(D * D + S * S)
        return cls(kind, D, S, np.ascontiguousarray(theta, float), np.ascontiguousarray(t, float), log_det)

    def __len__(self) -> int:
        return self.D.size

    def split_factor(self, m: int) -> int:
        """Number of leading factors that make up ``L`` when splitting at grid index ``m``."""
        return m + 1 if self.kind.has_half_steps else m

    def check_range(self, lam) -> None:
        lam = np.asarray(lam, dtype=complex)
        tmax = float(np.max(np.abs(self.t))) if self.t.size else 0.0
        worst = 2.0 * float(np.max(np.abs(lam.imag), initial=0.0)) * tmax
        if worst > MAX_EXPONENT:
            raise ScatteringOverflowError(
                f"2*|Im(lambda)|*T0 = {worst:.0f} overflows double precision; "
                "shrink the window or use the forward-backward method with a centred split"
            )


@numba.njit(cache=True)
def _sweep(D, S, theta, t, lams, ksplit, out_w, out_wp, out_v, out_vp, out_u):
    """Forward pass over factors ``[0, ksplit)`` and adjugate backward pass over the rest.

    For each lambda writes ``w = L (1,0)``, ``w' = dw/dlam``,
    ``v = adj(R) (0,1) = (-R12, R11)``, ``v'`` and ``u = adj(R) (1,0) = (R22, -R21)``.
    """
    K = D.size
    for i in range(lams.size):
        lam = lams[i]
        ks = ksplit[i]
        w1 = 1.0 + 0.0j
        w2 = 0.0j
        d1 = 0.0j
        d2 = 0.0j
        for k in range(ks):
            s = S[k]
            if s == 0.0:
                continue
            dk = D[k]
            e = np.exp(1j * (theta[k] + 2.0 * lam * t[k]))
            g12 = s * e
            g21 = -s / e
            jt = 2j * t[k]
            n1 = dk * d1 + g12 * d2 + jt * g12 * w2
            n2 = g21 * d1 + dk * d2 - jt * g21 * w1
            d1 = n1
            d2 = n2
            n1 = dk * w1 + g12 * w2
            n2 = g21 * w1 + dk * w2
            w1 = n1
            w2 = n2
        v1 = 0.0j
        v2 = 1.0 + 0.0j
        p1 = 0.0j
        p2 = 0.0j
        u1 = 1.0 + 0.0j
        u2 = 0.0j
        for k in range(K - 1, ks - 1, -1):
            s = S[k]
            if s == 0.0:
                continue
            dk = D[k]
            e = np.exp(1j * (theta[k] + 2.0 * lam * t[k]))
            a12 = -s * e
            a21 = s / e
            jt = 2j * t[k]
            n1 = dk * p1 + a12 * p2 + jt * a12 * v2
            n2 = a21 * p1 + dk * p2 - jt * a21 * v1
            p1 = n1
            p2 = n2
            n1 = dk * v1 + a12 * v2
            n2 = a21 * v1 + dk * v2
            v1 = n1
            v2 = n2
            n1 = dk * u1 + a12 * u2
            n2 = a21 * u1 + dk * u2
            u1 = n1
            u2 = n2
        out_w[i, 0] = w1
        out_w[i, 1] = w2
        out_wp[i, 0] = d1
        out_wp[i, 1] = d2
        out_v[i, 0] = v1
        out_v[i, 1] = v2
        out_vp[i, 0] = p1
        out_vp[i, 1] = p2
        out_u[i, 0] = u1
        out_u[i, 1] = u2


@dataclass(frozen=True)
class SweepResult:
    """Raw forward/backward vectors for a batch of spectral parameters."""

    lam: np.ndarray
    w: np.ndarray
    w_prime: np.ndarray
    v: np.ndarray
    v_prime: np.ndarray
    u: np.ndarray
    log_det_right: np.ndarray


def sweep(chain: FactorChain, lams, ksplit) -> SweepResult:
    lams = np.ascontiguousarray(np.atleast_1d(np.asarray(lams, dtype=complex)))
    chain.check_range(lams)
    ks = np.ascontiguousarray(np.broadcast_to(np.asarray(ksplit, dtype=np.int64), lams.shape))
    if np.any(ks < 0) or np.any(ks > len(chain)):
        raise ValueError("split factor out of range")
    n = lams.size
    w, wp, v, vp, u = (np.empty((n, 2), dtype=complex) for _ in range(5))
    _sweep(chain.D, chain.S, chain.theta, chain.t, lams, ks, w, wp, v, vp, u)
    csum = np.concatenate(([0.0], np.cumsum(chain.log_det[::-1])))[::-1]
    return SweepResult(lams, w, wp, v, vp, u, csum[ks])


def forward_scatter_many(pulse: SampledPulse, lams, kind=KernelKind.TRAPEZOID):
    """Vectorised :func:`forward_scatter`; returns arrays ``(a, b, a', b')``."""
    chain = FactorChain.build(pulse, kind)
    res = sweep(chain, lams, len(chain))
    return res.w[:, 0], res.w[:, 1], res.w_prime[:, 0], res.w_prime[:, 1]


def forward_scatter(pulse: SampledPulse, lam: complex, kind=KernelKind.TRAPEZOID) -> ScatteringData:
    """Propagate ``(1, 0)`` from ``-T0`` to ``T0`` and read off ``a, b, a', b'``."""
    a, b, ap, bp = forward_scatter_many(pulse, [lam], kind)
    return ScatteringData(complex(a[0]), complex(b[0]), complex(ap[0]), complex(bp[0]))


@dataclass(frozen=True)
class DemoErrors:
    """Absolute errors of the scalar schemes; ``values`` holds the computed ``x(T)`` per scheme."""

    trapezoid: float
    euler: float
    cn: float
    exact: float = float("nan")
    values: tuple = ()


def scalar_trapezoid_demo(f, T: float, N: int, exact: float | None = None) -> DemoErrors:
    """Errors of three one-step schemes for ``x' = f(t) x``, ``x(0) = 1`` on ``[0, T]``.

    trapezoid: ``x_{n+1} = exp(h f_{n+1}/2) exp(h f_n/2) x_n``
    euler:     ``x_{n+1} = (1 + h f_n) x_n``
    cn:        ``x_{n+1} = (1 + h f_n/2) / (1 - h f_{n+1}/2) x_n``

    ``exact`` defaults to ``exp(quad(f, 0, T))``.
    """
    if exact is None:
        from scipy.integrate import quad

        integral, _ = quad(f, 0.0, T, epsabs=1e-14, epsrel=1e-14, limit=200)
        exact = float(np.exp(integral))
    t = np.linspace(0.0, T, N + 1)
    h = T / N
    fv = np.asarray(f(t), dtype=float) * np.ones_like(t)
    x_tr = x_eu = x_cn = 1.0
    for n in range(N):
        x_tr = np.exp(0.5 * h * fv[n + 1]) * np.exp(0.5 * h * fv[n]) * x_tr
        x_eu = (1.0 + h * fv[n]) * x_eu
        x_cn = (1.0 + 0.5 * h * fv[n]) / (1.0 - 0.5 * h * fv[n + 1]) * x_cn
    return DemoErrors(abs(x_tr - exact), abs(x_eu - exact), abs(x_cn - exact), exact,
                      (("trapezoid", x_tr), ("euler", x_eu), ("cn", x_cn)))
