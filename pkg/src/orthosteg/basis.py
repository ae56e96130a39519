"""Orthonormal discrete polynomial kernels on the 8-point support.

Every kernel is an 8x8 matrix ``K`` with ``K[n, x] = P_n(z_x) * sqrt(w(x)) / d_n``:
row ``n`` is the weighted, normalized polynomial of order ``n`` and column
``x`` is the spatial sample.  Classical families (ids 1..5) use the node
``z_x = x``; the q-families (ids 6..9) use ``z_x = q**-x``; id 10 is the
orthonormal DCT-II, built from its closed form.

Rows are produced by a Stieltjes/Lanczos process with full
reorthogonalization, which yields the same matrix as the QR factorization of
the weighted Vandermonde matrix with a positive triangular diagonal (every
row has a positive leading polynomial coefficient) while staying stable for
the wide node spreads of the q-families.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

SUPPORT = 8
_X = np.arange(SUPPORT, dtype=np.float64)


class BasisId(IntEnum):
    KRAWTCHOUK = 1
    TCHEBICHEF = 2
    HAHN = 3
    CHARLIER = 4
    MEIXNER = 5
    Q_KRAWTCHOUK = 6
    Q_HAHN = 7
    Q_CHARLIER = 8
    Q_MEIXNER = 9
    DCT = 10

    @property
    def abbrev(self) -> str:
        return _ABBREV[self]

    @property
    def is_q(self) -> bool:
        return 6 <= self.value <= 9

    @classmethod
    def parse(cls, value) -> "BasisId":
        """Accept an id (1..10), an abbreviation (``qK``, ``DCT``) or a full name."""
        if isinstance(value, BasisId):
            return value
        if isinstance(value, (int, np.integer)):
            return cls(int(value))
        text = str(value).strip()
        if text.isdigit():
            return cls(int(text))
        for member, short in _ABBREV.items():
            if text == short:
                return member
        key = text.lower().replace("-", "").replace("_", "").replace(" ", "")
        for member in cls:
            if key == member.name.lower().replace("_", ""):
                return member
        raise ValueError(f"unknown basis {value!r}")


_ABBREV = {
    BasisId.KRAWTCHOUK: "K",
    BasisId.TCHEBICHEF: "T",
    BasisId.HAHN: "H",
    BasisId.CHARLIER: "C",
    BasisId.MEIXNER: "M",
    BasisId.Q_KRAWTCHOUK: "qK",
    BasisId.Q_HAHN: "qH",
    BasisId.Q_CHARLIER: "qC",
    BasisId.Q_MEIXNER: "qM",
    BasisId.DCT: "DCT",
}

# Families whose natural support is infinite; 8-point truncation changes them.
TRUNCATED = frozenset(
    {BasisId.CHARLIER, BasisId.MEIXNER, BasisId.Q_CHARLIER, BasisId.Q_MEIXNER}
)


def parse_pair(text: str) -> tuple[BasisId, BasisId]:
    """Parse a basis-pair label such as ``"MDCT"``, ``"qCT"``, ``"T"`` or ``"4,7"``.

    A single family label denotes the symmetric pair.
    """
    text = text.strip()
    for sep in (",", "/", ":"):
        if sep in text:
            left, right = text.split(sep, 1)
            return BasisId.parse(left), BasisId.parse(right)
    tokens = []
    rest = text
    shorts = sorted(_ABBREV.items(), key=lambda kv: -len(kv[1]))
    while rest:
        for member, short in shorts:
            if rest.startswith(short):
                tokens.append(member)
                rest = rest[len(short):]
                break
        else:
            return (BasisId.parse(text),) * 2
    if len(tokens) == 1:
        return tokens[0], tokens[0]
    if len(tokens) == 2:
        return tokens[0], tokens[1]
    raise ValueError(f"cannot parse basis pair {text!r}")


def pair_label(bx: BasisId, by: BasisId) -> str:
    if bx == by:
        return bx.abbrev
    return bx.abbrev + by.abbrev


@dataclass(frozen=True)
class BasisParams:
    """Family parameters. Out-of-range values raise ``ValueError``."""

    p: float = 0.5
    alpha: float = 10.0
    beta: float = 10.0
    a_charlier: float = 10.0
    beta_meixner: float = 10.0
    gamma_meixner: float = 0.5
    q: float = 0.5
    p_qk: float = 1.0
    alpha_qh: float = 0.5
    beta_qh: float = 0.5
    a_qc: float = 1.0
    b_qm: float = 0.5
    c_qm: float = 1.0
    support_size: int = SUPPORT

    def __post_init__(self):
        checks = [
            (0.0 < self.p < 1.0, "Krawtchouk p must lie in (0, 1)"),
            (self.alpha >= -1.0 and self.beta >= -1.0, "Hahn alpha, beta must be >= -1"),
            (self.a_charlier > 0.0, "Charlier a must be > 0"),
            (self.beta_meixner > 0.0, "Meixner beta must be > 0"),
            (0.0 < self.gamma_meixner < 1.0, "Meixner gamma must lie in (0, 1)"),
            (0.0 < self.q < 1.0, "q must lie in (0, 1)"),
            (self.p_qk > 0.0, "q-Krawtchouk p must be > 0"),
            (0.0 < self.alpha_qh * self.q < 1.0, "q-Hahn needs 0 < alpha*q < 1"),
            (0.0 < self.beta_qh * self.q < 1.0, "q-Hahn needs 0 < beta*q < 1"),
            (self.a_qc > 0.0, "q-Charlier a must be > 0"),
            (0.0 < self.b_qm * self.q < 1.0, "q-Meixner needs 0 < b*q < 1"),
            (self.c_qm > 0.0, "q-Meixner c must be > 0"),
            (self.support_size == SUPPORT, "support_size must be 8"),
        ]
        for ok, message in checks:
            if not ok:
                raise ValueError(message)
        for name in self.__dataclass_fields__:
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite")


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    entries: np.ndarray
    basis: BasisId
    params: BasisParams
    gram_deviation: float
    reorthonormalized: bool = field(default=False)

    def __post_init__(self):
        self.entries.setflags(write=False)


def q_pochhammer(a: float, q: float, n) -> float:
    """q-shifted factorial ``(a; q)_n``; ``n = math.inf`` gives the infinite product."""
    if n == math.inf:
        if abs(q) >= 1.0:
            raise ValueError("infinite q-Pochhammer needs |q| < 1")
        result = 1.0
        term = a
        while abs(term) >= 1e-16:
            result *= 1.0 - term
            term *= q
        return result
    n = int(n)
    if n < 0:
        raise ValueError("n must be >= 0")
    result = 1.0
    for k in range(n):
        result *= 1.0 - a * q**k
    return result


def _poch(a: float, n: int) -> float:
    result = 1.0
    for k in range(n):
        result *= a + k
    return result


def gram_deviation(K) -> float:
    """``max |K K^T - I|`` for a kernel matrix or plain array."""
    K = np.asarray(K.entries if isinstance(K, KernelMatrix) else K, dtype=np.float64)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError("gram_deviation needs a square matrix")
    return float(np.abs(K @ K.T - np.eye(K.shape[0])).max())


# -- weights ---------------------------------------------------------------


def _weights(basis: BasisId, prm: BasisParams) -> np.ndarray:
    """Weight w(x) on x = 0..7, up to a positive constant factor."""
    xs = range(SUPPORT)
    q = prm.q
    if basis == BasisId.KRAWTCHOUK:
        N, p = SUPPORT - 1, prm.p
        logw = [
            math.log(math.comb(N, x)) + x * math.log(p) + (N - x) * math.log1p(-p)
            for x in xs
        ]
        return _from_log(logw)
    if basis == BasisId.TCHEBICHEF:
        return np.ones(SUPPORT)
    if basis == BasisId.HAHN:
        N, al, be = SUPPORT - 1, prm.alpha, prm.beta
        w = [
            _poch(al + 1, x) * _poch(be + 1, N - x) / (math.factorial(N - x) * math.factorial(x))
            for x in xs
        ]
        return np.array(w)
    if basis == BasisId.CHARLIER:
        a = prm.a_charlier
        return _from_log([x * math.log(a) - math.lgamma(x + 1) for x in xs])
    if basis == BasisId.MEIXNER:
        be, ga = prm.beta_meixner, prm.gamma_meixner
        logw = [
            x * math.log(ga) + math.lgamma(be + x) - math.lgamma(be) - math.lgamma(x + 1)
            for x in xs
        ]
        return _from_log(logw)
    if basis == BasisId.Q_KRAWTCHOUK:
        N, p = SUPPORT - 1, prm.p_qk
        w = [
            (-p) ** (-x) * q_pochhammer(q**-N, q, x) / q_pochhammer(q, q, x) for x in xs
        ]
        return np.array(w)
    if basis == BasisId.Q_HAHN:
        N, al, be = SUPPORT - 1, prm.alpha_qh, prm.beta_qh
        w = [
            q_pochhammer(al * q, q, x) * q_pochhammer(q**-N, q, x)
            / (q_pochhammer(q, q, x) * q_pochhammer(q**-N / be, q, x))
            * (al * be * q) ** (-x)
            for x in xs
        ]
        return np.array(w)
    if basis == BasisId.Q_CHARLIER:
        a = prm.a_qc
        return np.array([a**x / q_pochhammer(q, q, x) * q ** math.comb(x, 2) for x in xs])
    if basis == BasisId.Q_MEIXNER:
        b, c = prm.b_qm, prm.c_qm
        w = [
            q_pochhammer(b * q, q, x)
            / (q_pochhammer(q, q, x) * q_pochhammer(-b * c * q, q, x))
            * c**x
            * q ** math.comb(x, 2)
            for x in xs
        ]
        return np.array(w)
    raise ValueError(f"no weight for {basis!r}")


def _from_log(logw) -> np.ndarray:
    logw = np.asarray(logw, dtype=np.float64)
    return np.exp(logw - logw.max())


def nodes(basis: BasisId, params: BasisParams) -> np.ndarray:
    if basis.is_q:
        return params.q ** (-_X)
    return _X.copy()


def _stieltjes(z: np.ndarray, w: np.ndarray) -> np.ndarray:
    # Affine node rescaling leaves the orthonormal rows unchanged.
    zs = (z - z.mean()) / (np.ptp(z) or 1.0)
    v = np.sqrt(w)
    v = v / np.linalg.norm(v)
    rows = np.zeros((SUPPORT, SUPPORT))
    rows[0] = v
    for n in range(1, SUPPORT):
        u = zs * rows[n - 1]
        for _ in range(2):
            u -= rows[:n].T @ (rows[:n] @ u)
        norm = np.linalg.norm(u)
        if not norm > 1e-300:
            raise ValueError("degenerate weight: fewer than 8 independent samples")
        rows[n] = u / norm
    return rows


def _dct_rows() -> np.ndarray:
    n = _X[:, None]
    sigma = np.where(n == 0, math.sqrt(1.0 / SUPPORT), math.sqrt(2.0 / SUPPORT))
    return sigma * np.cos(np.pi * n * (2 * _X[None, :] + 1) / (2 * SUPPORT))


def build_kernel(basis, params: BasisParams | None = None) -> KernelMatrix:
    basis = BasisId.parse(basis)
    params = params or BasisParams()
    if basis == BasisId.DCT:
        rows = _dct_rows()
    else:
        with np.errstate(over="raise", invalid="raise", divide="raise"):
            try:
                w = _weights(basis, params)
            except (FloatingPointError, OverflowError, ZeroDivisionError) as exc:
                raise ValueError(f"weight evaluation failed for {basis.name}: {exc}") from None
        if not np.all(np.isfinite(w)):
            raise ValueError(f"non-finite weight for {basis.name}")
        if np.any(w < 0):
            raise ValueError(f"negative weight for {basis.name}")
        if not np.any(w > 0):
            raise ValueError(f"weight underflows to 0 on every support point for {basis.name}")
        if np.count_nonzero(w) < SUPPORT:
            raise ValueError(f"weight vanishes on part of the support for {basis.name}")
        rows = _stieltjes(nodes(basis, params), w / w.max())
    return KernelMatrix(
        entries=rows,
        basis=basis,
        params=params,
        gram_deviation=gram_deviation(rows),
        reorthonormalized=basis in TRUNCATED,
    )


# -- recurrence cross-check ------------------------------------------------


def _sign_vectors():
    for m in range(1 << (SUPPORT - 1)):
        yield np.array([1.0] + [(-1.0 if (m >> i) & 1 else 1.0) for i in range(SUPPORT - 1)])


def _classical_terms(basis: BasisId, prm: BasisParams):
    """Yield (coefficients, row indices) so that sum(c_i * K[r_i]) == 0."""
    x = _X
    if basis == BasisId.KRAWTCHOUK:
        N, p = SUPPORT - 1, prm.p
        for n in range(1, N):
            lhs = (N * p - 2 * n * p + n - x) * math.sqrt((1 - p) * (n + 1) / (p * (N - n)))
            up = (1 - p) * (n + 1)
            down = (1 - p) * math.sqrt(n * (n + 1) * (N - n + 1) / (N - n))
            yield (lhs, -up, -down), (n, n + 1, n - 1)
    elif basis == BasisId.TCHEBICHEF:
        N = SUPPORT
        for n in range(2, SUPPORT):
            b = (2 * x - N + 1) / n * math.sqrt((4 * n * n - 1) / (N * N - n * n))
            g = -(n - 1) / n * math.sqrt((2 * n + 1) / (2 * n - 3)) * math.sqrt(
                (N * N - (n - 1) ** 2) / (N * N - n * n)
            )
            yield (1.0, -b, -g), (n, n - 1, n - 2)
    elif basis == BasisId.HAHN:
        N, al, be = SUPPORT - 1, prm.alpha, prm.beta

        def d2(n):
            return (
                (-1) ** n * math.factorial(n) * _poch(be + 1, n) * _poch(al + be + n + 1, N + 1)
                / (_poch(-N, n) * (2 * n + al + be + 1) * math.factorial(N) * _poch(al + 1, n))
            )

        for n in range(2, SUPPORT):
            m = n - 1
            B = (
                m * (m + be) * (N + m + al + be + 1) / ((2 * m + al + be) * (m + al + be + 1))
                * (2 * m + al + be + 2) / ((m + al + 1) * (N - m))
            )
            A = 1 + B - x * (2 * m + al + be + 1) * (2 * m + al + be + 2) / (
                (m + al + be + 1) * (m + al + 1) * (N - m)
            )
            b = A * math.sqrt(d2(n - 1) / d2(n))
            g = -B * math.sqrt(d2(n - 2) / d2(n))
            yield (1.0, -b, -g), (n, n - 1, n - 2)
    elif basis == BasisId.CHARLIER:
        a = prm.a_charlier
        for n in range(2, SUPPORT):
            b = (a - x + n - 1) / a * math.sqrt(a / n)
            g = -math.sqrt((n - 1) / n)
            yield (1.0, -b, -g), (n, n - 1, n - 2)
    elif basis == BasisId.MEIXNER:
        be, ga = prm.beta_meixner, prm.gamma_meixner
        for n in range(2, SUPPORT):
            b = ((ga - 1) * x + n - 1 + ga * (n - 1 + be)) / ga * math.sqrt(ga / (n * (be + n - 1)))
            g = -math.sqrt((n - 1) * (n - 2 + be) / (n * (n - 1 + be)))
            yield (1.0, -b, -g), (n, n - 1, n - 2)
    else:
        raise ValueError(f"no classical recurrence for {basis!r}")


def _q_terms(basis: BasisId, prm: BasisParams):
    """Coefficients of the q-recurrence rescaled by sqrt(w)/d_n onto kernel rows."""
    q, N = prm.q, SUPPORT - 1
    z = q ** (-_X)
    if basis == BasisId.Q_KRAWTCHOUK:
        p = prm.p_qk

        def d2(n):
            return (
                (1 + p) * q_pochhammer(q, q, n) * q_pochhammer(-p * q ** (N + 1), q, n)
                * q_pochhammer(-p * q, q, N) * (-p * q**-N) ** n
                / (p**N * (1 + p * q ** (2 * n)) * q_pochhammer(-p, q, n) * q_pochhammer(q**-N, q, n))
                * q ** (n * n - math.comb(N + 1, 2))
            )

        def E(n):
            return (1 - q ** (n - N)) * (1 + p * q**n) / ((1 + p * q ** (2 * n)) * (1 + p * q ** (2 * n + 1)))

        def F(n):
            return -p * q ** (2 * n - N - 1) * (1 + p * q ** (n + N)) * (1 - q**n) / (
                (1 + p * q ** (2 * n - 1)) * (1 + p * q ** (2 * n))
            )

        lhs = z - 1
    elif basis == BasisId.Q_HAHN:
        al, be = prm.alpha_qh, prm.beta_qh

        def d2(n):
            num = (
                q_pochhammer(al * be * q * q, q, N) * q_pochhammer(q, q, n)
                * q_pochhammer(al * be * q ** (N + 2), q, n) * q_pochhammer(be * q, q, n)
                * (1 - al * be * q) * (-al * q) ** n
            )
            den = (
                q_pochhammer(be * q, q, N) * q_pochhammer(al * q, q, n) * q_pochhammer(al * be * q, q, n)
                * q_pochhammer(q**-N, q, n) * (al * q) ** N * (1 - al * be * q ** (2 * n + 1))
            )
            return num / den * q ** (math.comb(n, 2) - N * n)

        def E(n):
            return (1 - q ** (n - N)) * (1 - al * q ** (n + 1)) * (1 - al * be * q ** (n + 1)) / (
                (1 - al * be * q ** (2 * n + 1)) * (1 - al * be * q ** (2 * n + 2))
            )

        def F(n):
            return -al * q ** (n - N) * (1 - q**n) * (1 - al * be * q ** (n + N + 1)) * (1 - be * q**n) / (
                (1 - al * be * q ** (2 * n)) * (1 - al * be * q ** (2 * n + 1))
            )

        lhs = z - 1
    elif basis == BasisId.Q_CHARLIER:
        a = prm.a_qc

        def d2(n):
            return q**-n * q_pochhammer(-a, q, math.inf) * q_pochhammer(-q / a, q, n) * q_pochhammer(q, q, n)

        def E(n):
            return a * q ** (-2 * n - 1)

        def F(n):
            return (1 - q**n) * (a + q**n) / q ** (2 * n)

        # left side sign: (1 - q^-x) for this family
        lhs = 1 - z
    elif basis == BasisId.Q_MEIXNER:
        b, c = prm.b_qm, prm.c_qm

        def d2(n):
            return (
                q_pochhammer(-c, q, math.inf) / q_pochhammer(-b * c * q, q, math.inf)
                * q_pochhammer(q, q, n) * q_pochhammer(-q / c, q, n) / q_pochhammer(b * q, q, n) * q**-n
            )

        def E(n):
            return c * (1 - b * q ** (n + 1)) / q ** (2 * n + 1)

        def F(n):
            return (1 - q**n) * (c + q**n) / q ** (2 * n)

        lhs = 1 - z
    else:
        raise ValueError(f"no q-recurrence for {basis!r}")

    for n in range(1, SUPPORT - 1):
        up = math.sqrt(d2(n + 1) / d2(n))
        down = math.sqrt(d2(n - 1) / d2(n))
        yield (lhs + E(n) + F(n), -E(n) * up, -F(n) * down), (n, n + 1, n - 1)


def recurrence_residual(K: KernelMatrix) -> float:
    """Max residual of the family's three-term recurrence on the kernel rows.

    Each row is only defined up to sign, so the smallest residual over all
    row-sign assignments is returned (row 0 is held positive).
    """
    if K.basis == BasisId.DCT:
        raise ValueError("the DCT kernel has no three-term recurrence check")
    gen = _q_terms if K.basis.is_q else _classical_terms
    with np.errstate(over="ignore", invalid="ignore"):
        terms = [
            ([np.broadcast_to(np.asarray(c, dtype=np.float64), (SUPPORT,)) for c in coefs], rows)
            for coefs, rows in gen(K.basis, K.params)
        ]
    entries = np.asarray(K.entries)
    best = math.inf
    for s in _sign_vectors():
        signed = entries * s[:, None]
        worst = 0.0
        for coefs, rows in terms:
            total = sum(c * signed[r] for c, r in zip(coefs, rows))
            worst = max(worst, float(np.abs(total).max()))
            if worst >= best:
                break
        best = min(best, worst)
    return best
