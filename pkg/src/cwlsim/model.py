"""Time-dependent generator for the driven emitter chain + capture cavity.

Each emitter has levels G (ground), W (radiating excited) and, when dark-state
decay is enabled, D (non-radiating).  All rates are stored relative to the
collective coupling ``kappa``: ``alpha`` is in units of sqrt(kappa), ``Gamma``
and ``gamma_D`` in units of kappa.  Bin times are absolute (kappa sets the
time unit, default 1).

The Liouvillian depends on time only through the real cavity coupling g(t) of
the flat capture mode, so it is assembled once per (config, bin) as a
superoperator polynomial L0 + g L1 + g^2 L2 and cached.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache, reduce

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError
from .hilbert import annihilation, identity, tensor

G_MAX_DEFAULT = 1.0e3  # clamp on |g| in units sqrt(kappa)


@dataclass(frozen=True)
class Numerics:
    """Integration controls shared by all propagations."""

    rtol: float = 1e-8
    atol: float = 1e-10
    max_step_bin_frac: float = 0.02  # max step inside the bin, as fraction of tau
    dim_limit: int = 4096
    output_points: int = 500


@dataclass(frozen=True)
class SystemConfig:
    alpha: complex = 0.9  # drive amplitude, units sqrt(kappa)
    kappa: float = 1.0
    Gamma: float = 0.0  # waveguide loss, units kappa
    gamma_D: float = 0.0  # dark-state transfer, units kappa
    M: int = 1
    emitter_levels: int | None = None  # 2 or 3; None resolves per gamma_D
    cavity_cutoff: int | None = None  # None resolves per bin
    numerics: Numerics = Numerics()

    def __post_init__(self):
        if self.kappa <= 0:
            raise ConfigError("kappa must be positive")
        if self.Gamma < 0 or self.gamma_D < 0:
            raise ConfigError("Gamma and gamma_D must be non-negative")
        if self.M < 0:
            raise ConfigError("emitter count M must be non-negative")
        if self.emitter_levels not in (None, 2, 3):
            raise ConfigError("emitter_levels must be 2 or 3")
        if self.emitter_levels == 2 and self.gamma_D > 0:
            raise ConfigError("two-level emitters require gamma_D = 0")
        if self.cavity_cutoff is not None and self.cavity_cutoff < 2:
            raise ConfigError("cavity_cutoff must be at least 2")

    @property
    def levels(self) -> int:
        if self.emitter_levels is not None:
            return self.emitter_levels
        return 3 if self.gamma_D > 0 else 2

    @property
    def alpha_phys(self) -> complex:
        return complex(self.alpha) * math.sqrt(self.kappa)

    @property
    def Gamma_phys(self) -> float:
        return self.Gamma * self.kappa

    @property
    def gamma_D_phys(self) -> float:
        return self.gamma_D * self.kappa


@dataclass(frozen=True)
class BinSpec:
    """Flat capture mode v(t) = 1/sqrt(tau) on (t0, t0 + tau]."""

    t0: float
    tau: float
    g_max: float | None = None  # clamp on |g|, units sqrt(kappa); default 1e3
    mode: str = "flat"

    def __post_init__(self):
        if self.t0 < 0:
            raise ConfigError("bin start t0 must be non-negative")
        if self.tau <= 0:
            raise ConfigError("bin width tau must be positive")
        if self.mode != "flat":
            raise ConfigError("only the flat capture mode is supported")
        if self.g_max is not None and self.g_max <= 0:
            raise ConfigError("g_max must be positive")

    @property
    def t_end(self) -> float:
        return self.t0 + self.tau

    def g_max_phys(self, kappa: float) -> float:
        rel = G_MAX_DEFAULT if self.g_max is None else self.g_max
        return rel * math.sqrt(kappa)


def mode_gv(bin: BinSpec, t: float, kappa: float = 1.0) -> complex:
    """Cavity coupling g(t) = -1/sqrt(t - t0) on (t0, t0 + tau], clamped.

    Zero outside the bin; the magnitude is clamped to ``bin.g_max_phys`` near
    the opening edge where the exact coupling diverges.
    """
    if t < 0:
        raise ConfigError("time must be non-negative")
    if not (bin.t0 < t <= bin.t_end):
        return 0.0 + 0.0j
    g = -1.0 / math.sqrt(t - bin.t0)
    gmax = bin.g_max_phys(kappa)
    if abs(g) > gmax:
        g = -gmax
    return complex(g)


def default_cutoff(cfg: SystemConfig, bin: BinSpec) -> int:
    """Cavity cutoff covering the coherent amplitude plus up to M added photons."""
    x = bin.tau * abs(cfg.alpha_phys) ** 2
    c = math.ceil(x + cfg.M + 6.0 * math.sqrt(x + cfg.M)) + 2
    return max(int(c), 2)


def resolve_cutoff(cfg: SystemConfig, bin: BinSpec) -> int:
    return cfg.cavity_cutoff if cfg.cavity_cutoff is not None else default_cutoff(cfg, bin)


# ---------------------------------------------------------------------------
# operator assembly


def _single_emitter_ops(levels: int):
    lower = np.zeros((levels, levels), dtype=complex)
    lower[0, 1] = 1.0  # |G><W|
    proj_w = np.zeros((levels, levels), dtype=complex)
    proj_w[1, 1] = 1.0
    dark = None
    if levels == 3:
        dark = np.zeros((levels, levels), dtype=complex)
        dark[2, 1] = 1.0  # |D><W|
    return lower, proj_w, dark


@lru_cache(maxsize=64)
def chain_operators(M: int, levels: int, cav_dim: int):
    """Sparse operators on the full space (emitters first, cavity last).

    Returns a dict with the collective lowering operator ``S``, the cavity
    ``b``, per-emitter lowering/dark/population operators, and identities.
    """
    if cav_dim < 1:
        raise ConfigError("cavity dimension must be positive")
    lower, proj_w, dark = _single_emitter_ops(levels)
    ident_e = np.eye(levels, dtype=complex)
    a = annihilation(cav_dim - 1)
    ident_c = identity(cav_dim)

    def embed(op_site: np.ndarray, site: int):
        facs = [sp.csr_matrix(ident_e)] * M + [ident_c]
        facs[site] = sp.csr_matrix(op_site)
        return tensor(facs) if M > 0 else ident_c.copy()

    sigmas = [embed(lower, i) for i in range(M)]
    pops = [embed(proj_w, i) for i in range(M)]
    darks = [embed(dark, i) for i in range(M)] if levels == 3 else []
    dim = levels**M * cav_dim
    if M > 0:
        S = reduce(lambda x, y: x + y, sigmas)
        b = tensor([sp.csr_matrix(sp.identity(levels**M, dtype=complex)), a])
    else:
        S = sp.csr_matrix((dim, dim), dtype=complex)
        b = a.copy()
    return {
        "S": S.tocsr(),
        "b": b.tocsr(),
        "sigmas": [s.tocsr() for s in sigmas],
        "darks": [d.tocsr() for d in darks],
        "pops": [p.tocsr() for p in pops],
        "dim": dim,
        "dims": tuple([levels] * M + [cav_dim]),
    }


def _hamiltonian_parts(cfg: SystemConfig, cav_dim: int, displaced: bool):
    """Static part H0 and the coefficient H1 of the real coupling g(t).

    H(t) = H0 + g(t) H1 with
      H0 = i sqrt(k) (a* S - a S+) + chiral exchange between emitters,
      H1 = i (a* b - a b+) + (i/2) sqrt(k) (S+ b - b+ S).
    In the displaced frame the cavity drive term of H1 is dropped.
    """
    ops = chain_operators(cfg.M, cfg.levels, cav_dim)
    S, b = ops["S"], ops["b"]
    Sd, bd = S.conj().T.tocsr(), b.conj().T.tocsr()
    sqk = math.sqrt(cfg.kappa)
    al = cfg.alpha_phys
    dim = ops["dim"]

    H0 = sp.csr_matrix((dim, dim), dtype=complex)
    if cfg.M > 0:
        H0 = H0 + 1j * sqk * (np.conj(al) * S - al * Sd)
        # cascaded exchange: - i k/2 sum_{i>j} (s_i+ s_j- - s_j+ s_i-)
        for i in range(cfg.M):
            for j in range(i):
                sij = ops["sigmas"][i].conj().T @ ops["sigmas"][j]
                H0 = H0 - 1j * (cfg.kappa / 2.0) * (sij - sij.conj().T)

    H1 = (1j / 2.0) * sqk * (Sd @ b - bd @ S)
    if not displaced:
        H1 = H1 + 1j * (np.conj(al) * b - al * bd)
    return H0.tocsr(), H1.tocsr(), ops


def build_hamiltonian(cfg: SystemConfig, bin: BinSpec, t: float):
    """Full Hamiltonian H(t) = H_drive + H_sys + H_exc as a sparse matrix."""
    cav_dim = resolve_cutoff(cfg, bin) + 1
    _check_dim(cfg, cav_dim)
    H0, H1, _ = _hamiltonian_parts(cfg, cav_dim, displaced=False)
    g = mode_gv(bin, t, cfg.kappa).real
    return (H0 + g * H1).tocsr()


def build_jump_operators(cfg: SystemConfig, bin: BinSpec, t: float):
    """Jump operators with rates: [(L(t), 1)] + [(s_i-, Gamma)] + [(d_i, gamma_D)]."""
    cav_dim = resolve_cutoff(cfg, bin) + 1
    _check_dim(cfg, cav_dim)
    ops = chain_operators(cfg.M, cfg.levels, cav_dim)
    g = mode_gv(bin, t, cfg.kappa)
    L = math.sqrt(cfg.kappa) * ops["S"] + np.conj(g) * ops["b"]
    out = [(L.tocsr(), 1.0)]
    out += [(s, cfg.Gamma_phys) for s in ops["sigmas"]]
    if cfg.gamma_D > 0:
        if cfg.levels != 3:
            raise ConfigError("gamma_D > 0 requires three-level emitters")
        out += [(d, cfg.gamma_D_phys) for d in ops["darks"]]
    return out


def _check_dim(cfg: SystemConfig, cav_dim: int):
    dim = cfg.levels**cfg.M * cav_dim
    if dim > cfg.numerics.dim_limit:
        raise ConfigError(
            f"Hilbert-space dimension {dim} exceeds configured limit "
            f"{cfg.numerics.dim_limit}"
        )


# ---------------------------------------------------------------------------
# superoperator assembly (row-major vec convention)


def _left(A):
    n = A.shape[0]
    return sp.kron(A, sp.identity(n, dtype=complex, format="csr"), format="csr")


def _right(A):
    n = A.shape[0]
    return sp.kron(sp.identity(n, dtype=complex, format="csr"), A.T, format="csr")


def _dissipator_super(A):
    AdA = (A.conj().T @ A).tocsr()
    return (
        sp.kron(A, A.conj(), format="csr")
        - 0.5 * (_left(AdA) + _right(AdA))
    ).tocsr()


def _commutator_super(H):
    return (-1j * (_left(H) - _right(H))).tocsr()


class Generator:
    """Cached Liouvillian L(t) = L0 + g(t) L1 + g(t)^2 L2 acting on vec(rho)."""

    def __init__(self, cfg: SystemConfig, bin: BinSpec, cav_dim: int, displaced: bool):
        self.cfg = cfg
        self.bin = bin
        self.displaced = displaced
        H0, H1, ops = _hamiltonian_parts(cfg, cav_dim, displaced)
        S, b = ops["S"], ops["b"]
        Sd, bd = S.conj().T.tocsr(), b.conj().T.tocsr()
        sqk = math.sqrt(cfg.kappa)
        self.dim = ops["dim"]
        self.dims = ops["dims"]
        self.ops = ops

        L0 = _commutator_super(H0) + cfg.kappa * _dissipator_super(S)
        for s in ops["sigmas"]:
            if cfg.Gamma_phys > 0:
                L0 = L0 + cfg.Gamma_phys * _dissipator_super(s)
        for d in ops["darks"]:
            if cfg.gamma_D_phys > 0:
                L0 = L0 + cfg.gamma_D_phys * _dissipator_super(d)

        cross = (Sd @ b + bd @ S).tocsr()
        L1 = (
            _commutator_super(H1)
            + sqk
            * (
                sp.kron(S, b.conj(), format="csr")
                + sp.kron(b, S.conj(), format="csr")
                - 0.5 * (_left(cross) + _right(cross))
            )
        ).tocsr()
        L2 = _dissipator_super(b)

        self.L0, self.L1, self.L2 = L0.tocsr(), L1, L2.tocsr()

    def g(self, t: float) -> float:
        return mode_gv(self.bin, t, self.cfg.kappa).real

    def apply_vec(self, t: float, y: np.ndarray) -> np.ndarray:
        g = self.g(t)
        out = self.L0 @ y
        if g != 0.0:
            out = out + g * (self.L1 @ y) + (g * g) * (self.L2 @ y)
        return out


@lru_cache(maxsize=16)
def _generator(cfg: SystemConfig, bin: BinSpec, cav_dim: int, displaced: bool) -> Generator:
    _check_dim(cfg, cav_dim)
    return Generator(cfg, bin, cav_dim, displaced)


def get_generator(cfg: SystemConfig, bin: BinSpec, cav_dim: int | None = None,
                  displaced: bool = False) -> Generator:
    if cav_dim is None:
        cav_dim = resolve_cutoff(cfg, bin) + 1
    return _generator(cfg, bin, cav_dim, displaced)


def liouvillian_apply(cfg: SystemConfig, bin: BinSpec, t: float, rho: np.ndarray) -> np.ndarray:
    """Right-hand side d(rho)/dt of the master equation at time t."""
    arr = rho.mat if hasattr(rho, "mat") else np.asarray(rho, dtype=complex)
    gen = get_generator(cfg, bin)
    if arr.shape != (gen.dim, gen.dim):
        raise ConfigError(
            f"state dimension {arr.shape} does not match generator dim {gen.dim}"
        )
    return gen.apply_vec(t, arr.reshape(-1)).reshape(arr.shape)
