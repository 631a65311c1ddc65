"""Exact truncated-Fock-space oracle.

Dense matrix representations of the two-mode ladder algebra, the full
interaction Hamiltonian, and the composite-operator machinery: commutator
closure verification, Heisenberg + damping drifts, and equivalence checks of
the composite-basis coefficient matrices against the exact drift.

Truncation-edge policy: ladder truncation corrupts the top states, and
order-4 operator products reach two levels up, so identities are asserted
only on basis states at least 2 below the requested truncation per mode.
Checkers that form products of two such operators build their
representations with 4 extra levels of internal headroom, which makes every
asserted matrix element exact in float arithmetic.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .exceptions import ValidationError
from .params import SystemParams

DEFAULT_TRUNC = 14
SAFE_MARGIN = 2
_PAD = 4  # internal headroom for product exactness
_DEGREE_MAX = 4

BASIS_NAMES = ("second_order_mixed", "quadratic_six", "minimal_fourth", "reduced")


@dataclass(frozen=True, eq=False)
class FockRep:
    """Two-mode truncated Fock representation (photon x phonon).

    Ladder matrices act on the product space; derived operators are exact
    polynomial products of the ladders. idx_a/idx_b give the per-mode
    excitation index of each product-basis state.
    """

    n_trunc_a: int
    n_trunc_b: int
    a: np.ndarray
    adag: np.ndarray
    b: np.ndarray
    bdag: np.ndarray
    n: np.ndarray
    m: np.ndarray
    c: np.ndarray
    d: np.ndarray
    e: np.ndarray
    f: np.ndarray
    B: np.ndarray
    N: np.ndarray
    idx_a: np.ndarray
    idx_b: np.ndarray

    @property
    def dim(self) -> int:
        return self.n_trunc_a * self.n_trunc_b

    @property
    def identity(self) -> np.ndarray:
        return np.eye(self.dim, dtype=np.complex128)


def build_mode_ops(n_trunc_a: int = DEFAULT_TRUNC, n_trunc_b: int | None = None) -> FockRep:
    """Build ladder and derived operators at the given truncations."""
    if n_trunc_b is None:
        n_trunc_b = n_trunc_a
    if n_trunc_a < 4 or n_trunc_b < 4:
        raise ValidationError("truncation below 4 cannot host the composite operators")

    def ladder(k: int) -> np.ndarray:
        return np.diag(np.sqrt(np.arange(1, k, dtype=np.float64)), 1).astype(np.complex128)

    ia = np.eye(n_trunc_a, dtype=np.complex128)
    ib = np.eye(n_trunc_b, dtype=np.complex128)
    a = np.kron(ladder(n_trunc_a), ib)
    b = np.kron(ia, ladder(n_trunc_b))
    adag = a.conj().T
    bdag = b.conj().T
    n = adag @ a
    m = bdag @ b
    c = 0.5 * (a @ a)
    d = 0.5 * (b @ b)
    idx_a = np.repeat(np.arange(n_trunc_a), n_trunc_b)
    idx_b = np.tile(np.arange(n_trunc_b), n_trunc_a)
    return FockRep(n_trunc_a=n_trunc_a, n_trunc_b=n_trunc_b, a=a, adag=adag,
                   b=b, bdag=bdag, n=n, m=m, c=c, d=d,
                   e=c + c.conj().T, f=d + d.conj().T,
                   B=n @ b, N=n @ n, idx_a=idx_a, idx_b=idx_b)


def commutator(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return x @ y - y @ x


def safe_columns(rep: FockRep, margin_a: int = SAFE_MARGIN, margin_b: int = SAFE_MARGIN,
                 trunc_a: int | None = None, trunc_b: int | None = None) -> np.ndarray:
    """Boolean mask of product-basis states safely below the truncation edge.

    trunc_a/trunc_b default to the representation's own truncations; checkers
    working in a padded representation pass the requested (smaller) ones."""
    ta = rep.n_trunc_a if trunc_a is None else trunc_a
    tb = rep.n_trunc_b if trunc_b is None else trunc_b
    return (rep.idx_a <= ta - 1 - margin_a) & (rep.idx_b <= tb - 1 - margin_b)


def build_hamiltonian(rep: FockRep, params: SystemParams, t: float = 0.0,
                      frame: str = "lab") -> np.ndarray:
    """Full interaction Hamiltonian (hbar-normalized, zero-point dropped):

        H = H_s - H0 + (H1 - H2) - (H3 + H4) + H_drive

    with H_s = omega*n + Omega*m, H0 = g0*n*X, H1 = g1*n*X^2,
    H2 = g2*(a+a*)^2*P^2, H3 = g3*n*X^3, H4 = g4*(a+a*)^2*(P^2X+XP^2+PXP),
    where X = b+b*, P = b-b*, and H_drive = i(alpha(t)* a - alpha(t) a*).

    frame="lab" uses the absolute optical frequency with the drive phase
    alpha(t) = alpha e^{-i w_drive t}; frame="rotating" replaces omega -> -Delta
    and freezes the drive phase.
    """
    if frame not in ("lab", "rotating"):
        raise ValidationError(f"unknown frame {frame!r}")
    X = rep.b + rep.bdag
    P = rep.b - rep.bdag
    Q = rep.a + rep.adag
    X2 = X @ X
    P2 = P @ P
    Q2 = Q @ Q
    delta = params.bare_detuning()
    if frame == "lab":
        omega_coeff = params.omega
        alpha_t = params.alpha * np.exp(-1j * (params.omega + delta) * t)
    else:
        omega_coeff = -delta
        alpha_t = params.alpha
    h = omega_coeff * rep.n + params.Omega * rep.m
    if params.g0:
        h = h - params.g0 * (rep.n @ X)
    if params.g1:
        h = h + params.g1 * (rep.n @ X2)
    if params.g2:
        h = h - params.g2 * (Q2 @ P2)
    if params.g3:
        h = h - params.g3 * (rep.n @ (X2 @ X))
    if params.g4:
        h = h - params.g4 * (Q2 @ (P2 @ X + X @ P2 + P @ X @ P))
    if alpha_t:
        h = h + 1j * (np.conj(alpha_t) * rep.a - alpha_t * rep.adag)
    return h


def heisenberg_drift(z: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Closed-system part of the operator equation of motion, -i[z, H]."""
    return -1j * commutator(z, h)


def _normal_monomials(rep: FockRep, max_degree: int) -> list[tuple[tuple[int, int, int, int], np.ndarray]]:
    """Normal-ordered monomials adag^p a^q bdag^r b^s with p+q+r+s <= max_degree."""
    pa = [np.linalg.matrix_power(rep.adag, k) for k in range(max_degree + 1)]
    qa = [np.linalg.matrix_power(rep.a, k) for k in range(max_degree + 1)]
    rb = [np.linalg.matrix_power(rep.bdag, k) for k in range(max_degree + 1)]
    sb = [np.linalg.matrix_power(rep.b, k) for k in range(max_degree + 1)]
    out = []
    for p, q, r, s in itertools.product(range(max_degree + 1), repeat=4):
        if p + q + r + s <= max_degree:
            out.append(((p, q, r, s), pa[p] @ qa[q] @ rb[r] @ sb[s]))
    return out


def _lstsq_expand(target: np.ndarray, columns: list[np.ndarray],
                  mask: np.ndarray) -> tuple[np.ndarray, float]:
    """Least-squares expansion of target over columns, restricted to the safe
    columns of the state space. Returns (coefficients, Frobenius residual)."""
    A = np.stack([col[:, mask].ravel() for col in columns], axis=1)
    y = target[:, mask].ravel()
    coef, _, _, _ = np.linalg.lstsq(A, y, rcond=None)
    return coef, float(np.linalg.norm(y - A @ coef))


def _operator_degree(rep: FockRep, z: np.ndarray, mask: np.ndarray) -> int:
    """Smallest total monomial degree whose span contains z on the safe states."""
    scale = max(float(np.linalg.norm(z[:, mask])), 1.0)
    for deg in range(_DEGREE_MAX + 1):
        cols = [mat for _, mat in _normal_monomials(rep, deg)]
        _, res = _lstsq_expand(z, cols, mask)
        if res <= 1e-8 * scale:
            return deg
    raise ValidationError("operator degree exceeds the supported maximum of 4")


@dataclass
class DampingDrift:
    """Dissipative drift of a composite operator and its rate decomposition."""

    drift: np.ndarray
    leading_rate: float
    remainder: np.ndarray
    residual: float


def damping_drift(rep: FockRep, z: np.ndarray, rates: dict[str, float]) -> DampingDrift:
    """Damping contribution sum_j { -[z, x_j*] (g_j/2) x_j + (g_j/2) x_j* [z, x_j] }
    for bath channels x_j in {a, b} with rates = {"a": kappa, "b": Gamma}.

    The leading rate lam is extracted from the exact decomposition
    drift = -lam*z + remainder, where the remainder is confined to monomials
    of strictly lower total degree than z; for polynomial z the decomposition
    is exact and the reported residual is at rounding level.
    """
    channels = {"a": (rep.a, rep.adag), "b": (rep.b, rep.bdag)}
    drift = np.zeros_like(z)
    for label, gamma in rates.items():
        if label not in channels:
            raise ValidationError(f"unknown bath channel {label!r}")
        x, xdag = channels[label]
        drift = drift - commutator(z, xdag) @ (0.5 * gamma * x) \
            + (0.5 * gamma * xdag) @ commutator(z, x)
    mask = safe_columns(rep)
    deg = _operator_degree(rep, z, mask)
    lower = [mat for _, mat in _normal_monomials(rep, max(deg - 1, 0))]
    coef, residual = _lstsq_expand(drift, [z] + lower, mask)
    lam = -coef[0]
    remainder = drift + lam * z
    return DampingDrift(drift=drift, leading_rate=float(lam.real),
                        remainder=remainder, residual=residual)


# ---------------------------------------------------------------------------
# commutator closure


@dataclass
class ClosureRelation:
    left: str
    right: str
    coefficients: dict[str, complex]
    residual: float


@dataclass
class ClosureReport:
    basis: str
    n_trunc: int
    tol: float
    relations: list[ClosureRelation] = field(default_factory=list)
    closed: bool = False

    def coefficient(self, left: str, right: str, label: str) -> complex:
        """Expansion coefficient of [left, right], following the requested
        orientation even when the stored relation is the reversed pair."""
        for rel in self.relations:
            if (rel.left, rel.right) == (left, right):
                return rel.coefficients.get(label, 0.0)
            if (rel.left, rel.right) == (right, left):
                return -rel.coefficients.get(label, 0.0)
        raise KeyError(f"no relation for pair ({left}, {right})")

    def max_residual(self) -> float:
        return max(rel.residual for rel in self.relations)


def basis_elements(rep: FockRep, basis_name: str) -> list[tuple[str, np.ndarray]]:
    """Labeled operator list for a named composite basis."""
    cdag = rep.c.conj().T
    ddag = rep.d.conj().T
    table = {
        "second_order_mixed": [
            ("a", rep.a), ("b", rep.b), ("ab", rep.a @ rep.b),
            ("ab_dag", rep.a @ rep.bdag), ("n", rep.n), ("c", rep.c)],
        "quadratic_six": [
            ("c", rep.c), ("c_dag", cdag), ("n", rep.n),
            ("d", rep.d), ("d_dag", ddag), ("m", rep.m)],
        "minimal_fourth": [("N", rep.N), ("B", rep.B), ("B_dag", rep.B.conj().T)],
        "reduced": [("a", rep.a), ("ab", rep.a @ rep.b), ("ab_dag", rep.a @ rep.bdag)],
    }
    if basis_name not in table:
        raise ValidationError(f"unknown basis {basis_name!r}; "
                              f"expected one of {sorted(table)}")
    return table[basis_name]


def verify_basis_closure(basis_name: str, n_trunc: int = DEFAULT_TRUNC,
                         tol: float = 1e-10) -> ClosureReport:
    """Expand every pairwise commutator of the named basis over the basis plus
    identity and report the least-squares residuals on the safe subspace.
    closed is True when every commutator lies in the span."""
    rep = build_mode_ops(n_trunc + _PAD, n_trunc + _PAD)
    mask = safe_columns(rep, trunc_a=n_trunc, trunc_b=n_trunc)
    elems = basis_elements(rep, basis_name)
    labels = [lab for lab, _ in elems]
    columns = [mat for _, mat in elems] + [rep.identity]
    report = ClosureReport(basis=basis_name, n_trunc=n_trunc, tol=tol)
    for (li, zi), (lj, zj) in itertools.combinations(elems, 2):
        comm = commutator(zi, zj)
        coef, residual = _lstsq_expand(comm, columns, mask)
        coeffs = {lab: coef[k] for k, lab in enumerate(labels + ["I"])
                  if abs(coef[k]) > 1e-12}
        report.relations.append(ClosureRelation(left=li, right=lj,
                                                coefficients=coeffs,
                                                residual=residual))
    report.closed = all(rel.residual < tol for rel in report.relations)
    return report


# ---------------------------------------------------------------------------
# composite-basis coefficient matrices (operator-valued, coefficients LEFT)


def reduced_coefficient_matrix(rep: FockRep, params: SystemParams):
    """Operator-valued 3x3 coefficient matrix, decay matrix, and drive vector
    of the reduced composite system over {a, ab, ab_dag}. Scalar entries are
    returned as scalars; operator entries as matrices. gamma = kappa + Gamma."""
    delta = params.bare_detuning()
    g0, kappa, Gamma = params.g0, params.kappa, params.Gamma
    Omega = params.Omega
    gamma = kappa + Gamma
    I = rep.identity
    M = [
        [(1j * delta - kappa / 2) * I, 1j * g0 * I, 1j * g0 * I],
        [1j * g0 * (rep.m + rep.n + I),
         (-1j * (Omega - delta) - gamma / 2) * I + 1j * g0 * rep.b,
         None],
        [1j * g0 * (rep.m - rep.n),
         None,
         (1j * (Omega + delta) - gamma / 2) * I + 1j * g0 * rep.bdag],
    ]
    decay = [
        [kappa * I, None, None],
        [kappa * rep.b, Gamma * rep.a, None],
        [kappa * rep.b, None, Gamma * rep.a],
    ]
    drive = [params.alpha * I, params.alpha * rep.b, params.alpha * rep.bdag]
    return M, decay, drive


def quadratic_coefficient_matrix(rep: FockRep, params: SystemParams):
    """Operator-valued 6x6 coefficient matrix of the quadratic system over
    {c, c_dag, n, d, d_dag, m}, assembled in the photon/phonon block
    partition. The two quadratic rates enter through the combinations
    g2*beta_plus = g1+g2 and g2*beta_minus = g1-g2, so g2=0 is admissible."""
    w, W = params.omega, params.Omega
    kappa, Gamma = params.kappa, params.Gamma
    g1, g2 = params.g1, params.g2
    gp = g1 + g2  # g2 * beta_plus
    gm = g1 - g2  # g2 * beta_minus
    I = rep.identity
    fm = rep.f - rep.m
    cc = rep.c - rep.c.conj().T
    ddag = rep.d.conj().T
    Maa = [
        [(-2j * w - kappa) * I, None, 0.5j * g2 * fm],
        [None, (2j * w - kappa) * I, -0.5j * g2 * fm],
        [-1j * g2 * fm, 1j * g2 * fm, -kappa * I],
    ]
    Mab = [
        [-1j * gm * cc, -1j * gm * cc, 1j * gp * cc],
        [1j * gm * cc, 1j * gm * cc, -1j * gp * cc],
        [None, None, None],
    ]
    ba_top = rep.m - 2 * rep.d + 0.5 * I
    ba_mid = -rep.m + 2 * ddag - 0.5 * I
    Mba = [
        [0.5j * g2 * ba_top] * 3,
        [0.5j * g2 * ba_mid] * 3,
        [None, None, None],
    ]
    en = g2 * rep.e - gm * rep.n  # g2 * (e - beta_minus * n)
    Mbb = [
        [(-2j * W - Gamma) * I, None, -0.5j * g2 * rep.n],
        [None, (2j * W - Gamma) * I, 0.5j * g2 * rep.n],
        [-1j * en, 1j * en, -Gamma * I],
    ]
    M = [[None] * 6 for _ in range(6)]
    for i in range(3):
        for j in range(3):
            M[i][j] = Maa[i][j]
            M[i][j + 3] = Mab[i][j]
            M[i + 3][j] = Mba[i][j]
            M[i + 3][j + 3] = Mbb[i][j]
    return M


def coupling_perturbation_blocks(rep: FockRep, params: SystemParams):
    """Operator-valued correction to the quadratic coefficient matrix from a
    non-vanishing cubic coupling g0: only the photon-photon diagonal and the
    phonon-photon block change."""
    g0 = params.g0
    X = rep.b + rep.bdag
    zero = None
    dMaa = [
        [2j * g0 * X, zero, zero],
        [zero, -2j * g0 * X, zero],
        [zero, zero, zero],
    ]
    dMba = [
        [zero, zero, 1j * g0 * rep.b],
        [zero, zero, -1j * g0 * rep.bdag],
        [zero, zero, 1j * g0 * (rep.bdag - rep.b)],
    ]
    return dMaa, dMba


# ---------------------------------------------------------------------------
# drift-matrix equivalence


@dataclass
class DriftRowCheck:
    label: str
    residual_left: float
    residual_best: float
    orderings_best: tuple[str, ...]
    scale: float


@dataclass
class DriftMatrixReport:
    system: str
    n_trunc: int
    tol: float
    rows: list[DriftRowCheck] = field(default_factory=list)
    fit: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.residual_left < self.tol for r in self.rows)

    def max_residual(self) -> float:
        return max(r.residual_left for r in self.rows)


def _row_product(entries, basis_mats, orderings):
    total = None
    for ent, z, side in zip(entries, basis_mats, orderings):
        if ent is None:
            continue
        term = ent @ z if side == "left" else z @ ent
        total = term if total is None else total + term
    if total is None:
        total = np.zeros_like(basis_mats[0])
    return total


def drift_equivalence(system: str, params: SystemParams,
                      n_trunc: int = DEFAULT_TRUNC, tol: float = 1e-9,
                      search_orderings: bool = True) -> DriftMatrixReport:
    """Check, row by row, that the exact Heisenberg + damping drift of each
    composite basis element equals the coefficient matrix applied to the
    basis with coefficients on the left, on the safe subspace.

    system="reduced": rotating-frame cubic-coupling Hamiltonian over
    {a, ab, ab_dag} (drive excluded; it enters the drive vector, not M).
    system="quadratic": absolute-frame quadratic Hamiltonian over the
    six-operator basis; a non-zero g0 adds the perturbation blocks.

    When the left-placed form misses, an exhaustive per-entry left/right
    search reports the best ordering per row, and a least-squares fit of the
    exact drift over coefficient-dictionary x basis products is stored in
    .fit as the diagnostic of what each entry would need to be.
    """
    if system not in ("reduced", "quadratic"):
        raise ValidationError(f"unknown drift system {system!r}")
    rep = build_mode_ops(n_trunc + _PAD, n_trunc + _PAD)
    mask = safe_columns(rep, trunc_a=n_trunc, trunc_b=n_trunc)
    rates = {"a": params.kappa, "b": params.Gamma}

    if system == "reduced":
        h = build_hamiltonian(rep, params.replace(alpha=0j, g1=0.0, g2=0.0,
                                                  g3=0.0, g4=0.0),
                              frame="rotating")
        elems = basis_elements(rep, "reduced")
        M, _, _ = reduced_coefficient_matrix(rep, params)
    else:
        h = build_hamiltonian(rep, params.replace(alpha=0j, g3=0.0, g4=0.0),
                              frame="lab")
        elems = basis_elements(rep, "quadratic_six")
        M = quadratic_coefficient_matrix(rep, params)
        if params.g0:
            dMaa, dMba = coupling_perturbation_blocks(rep, params)
            for i in range(3):
                for j in range(3):
                    if dMaa[i][j] is not None:
                        M[i][j] = dMaa[i][j] if M[i][j] is None else M[i][j] + dMaa[i][j]
                    if dMba[i][j] is not None:
                        jj = j  # phonon rows, photon columns
                        M[i + 3][jj] = dMba[i][j] if M[i + 3][jj] is None \
                            else M[i + 3][jj] + dMba[i][j]

    labels = [lab for lab, _ in elems]
    basis_mats = [mat for _, mat in elems]
    scalar_like = [np.asarray(ent) * rep.identity if ent is not None and np.ndim(ent) == 0
                   else ent for row in M for ent in row]
    M = [scalar_like[i * len(labels):(i + 1) * len(labels)] for i in range(len(labels))]

    report = DriftMatrixReport(system=system, n_trunc=n_trunc, tol=tol)
    nb = len(labels)
    for i, (label, z) in enumerate(elems):
        exact = heisenberg_drift(z, h) + damping_drift(rep, z, rates).drift
        exact_v = exact[:, mask]
        scale = max(float(np.linalg.norm(exact_v)), 1.0)
        left = _row_product(M[i], basis_mats, ("left",) * nb)
        res_left = float(np.linalg.norm(exact_v - left[:, mask]))
        res_best, best = res_left, ("left",) * nb
        if search_orderings and res_left >= tol:
            active = [j for j in range(nb) if M[i][j] is not None]
            for combo in itertools.product(("left", "right"), repeat=len(active)):
                orderings = ["left"] * nb
                for k, j in enumerate(active):
                    orderings[j] = combo[k]
                cand = _row_product(M[i], basis_mats, orderings)
                res = float(np.linalg.norm(exact_v - cand[:, mask]))
                if res < res_best:
                    res_best, best = res, tuple(orderings)
        report.rows.append(DriftRowCheck(label=label, residual_left=res_left,
                                         residual_best=res_best,
                                         orderings_best=best, scale=scale))
        if res_left >= tol:
            report.fit[label] = _fit_drift_row(rep, exact, basis_mats, labels, mask)
    return report


def _fit_drift_row(rep: FockRep, exact: np.ndarray, basis_mats, labels, mask):
    """Expand an exact drift row over products (coefficient dictionary) x
    (basis element), left-placed. Returns {(coeff_label, basis_label): value}
    for the dominant terms, plus the fit residual under key ("residual", "")."""
    cdag = rep.c.conj().T
    ddag = rep.d.conj().T
    coeff_dict = [("I", rep.identity), ("n", rep.n), ("m", rep.m),
                  ("c", rep.c), ("c_dag", cdag), ("d", rep.d), ("d_dag", ddag),
                  ("b", rep.b), ("b_dag", rep.bdag)]
    cols, keys = [], []
    for wl, W in coeff_dict:
        for zl, z in zip(labels, basis_mats):
            cols.append(W @ z)
            keys.append((wl, zl))
    coef, residual = _lstsq_expand(exact, cols, mask)
    out = {k: v for k, v in zip(keys, coef) if abs(v) > 1e-6}
    out[("residual", "")] = residual
    return out


def quadratic_phase_map_residuals(n_trunc: int = DEFAULT_TRUNC) -> tuple[float, float]:
    """Residuals of the quarter-period phase map U = exp(i pi/2 n) acting on
    the squared field quadratures: U* (a-a*)^2 U + (a+a*)^2 -> 0, and
    U* n U - n -> 0, both on the safe subspace."""
    k = np.arange(n_trunc + _PAD)
    rep = build_mode_ops(n_trunc + _PAD, 4)
    u = np.kron(np.diag(np.exp(0.5j * np.pi * k)), np.eye(4)).astype(np.complex128)
    mask = safe_columns(rep, trunc_a=n_trunc, trunc_b=4, margin_b=0)
    P = rep.a - rep.adag
    Q = rep.a + rep.adag
    mapped = u.conj().T @ (P @ P) @ u
    res_field = float(np.linalg.norm((mapped + Q @ Q)[:, mask]))
    mapped_n = u.conj().T @ rep.n @ u
    res_n = float(np.linalg.norm((mapped_n - rep.n)[:, mask]))
    return res_field, res_n
