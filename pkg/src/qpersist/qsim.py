"""Exact statevector simulation of the Dirac-operator phase-estimation pipeline.

The simulated circuit, for a Dirac operator B on an N-dimensional composite
basis embedded in ceil(log2 N) qubits per register:

  1. register 1 holds the uniform state over the N composite basis states,
  2. a CNOT fan-out copies it to register 2, entangling the two maximally,
  3. the readout register R of log2(M) qubits is put in a uniform
     superposition by Hadamards,
  4. controlled powers of U = exp(2*pi*i*l*B/M) act on register 2, each R
     qubit controlling U^(2^j),
  5. the Fourier transform |y> -> M^(-1/2) sum_p exp(-2*pi*i*p*y/M) |p> is
     applied to R, whose exact marginal distribution P(p) is returned.

P(p) shows a peak near p = l*lambda for every eigenvalue lambda of B, of
height multiplicity/N, so N*P(l*xi) recovers the multiplicity of the
eigenvalue +xi: the persistent Betti number.

The controlled evolution can also be run through the SWAP-channel
construction (`evolution="trotter=K"`): each small-time step attaches a
fresh uniform ancilla, evolves the doubled register under the one-sparse
SWAP matrix built from B's entries, and traces the ancilla out again. That
path tracks the full density operator, so it is capped at small composite
dimensions.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import (AmbiguousRounding, BadM, EmptyBasis, NoMarkedStates,
                     NotSymmetric, TooLarge)
from .operators import DiracOperator

DEFAULT_MAX_DIM = 1 << 26      # composite statevector cap (overridable)
DENSE_UNITARY_CAP = 4096       # dense exponentials via eigendecomposition
TROTTER_DIM_CAP = 64           # SWAP-channel construction, doubled register
TROTTER_COMPOSITE_CAP = 4096   # density-matrix phase estimation

_NORM_TOL = 1e-10


@dataclass(eq=False)
class StateVector:
    """Complex amplitudes over a composite register."""

    amplitudes: np.ndarray
    register_layout: tuple[tuple[str, int], ...]

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        total = 1
        for _, d in self.register_layout:
            total *= d
        if amps.size != total:
            raise ValueError(f"{amps.size} amplitudes do not fill layout {self.register_layout}")
        norm = float(np.sum(np.abs(amps) ** 2))
        if abs(norm - 1.0) > _NORM_TOL:
            raise ValueError(f"state norm {norm} deviates from 1")
        self.amplitudes = amps

    @property
    def dim(self) -> int:
        return self.amplitudes.size


@dataclass(eq=False)
class PhaseDistribution:
    """The exact readout distribution P(p), p = 0..M-1, with its run metadata."""

    probs: np.ndarray
    l: int
    M: int
    xi: float
    hilbert_dim: int

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.size != self.M:
            raise ValueError(f"{p.size} probabilities for M={self.M}")
        if np.any(p < -1e-12):
            raise ValueError("negative probability")
        if abs(float(p.sum()) - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {p.sum()}, not 1")
        self.probs = np.clip(p, 0.0, None)

    def to_json_dict(self) -> dict:
        return {"l": self.l, "M": self.M, "xi": self.xi, "N": self.hilbert_dim,
                "P": [float(x) for x in self.probs]}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    def to_csv(self) -> str:
        lines = ["p,probability"]
        lines += [f"{p},{float(v)!r}" for p, v in enumerate(self.probs)]
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class BettiEstimate:
    """Rounded Betti number with the raw N*P(l*xi) value and its leakage."""

    value: int
    unrounded: float
    leakage: float


def _dirac_dense(B) -> np.ndarray:
    if isinstance(B, DiracOperator):
        return B.to_dense()
    m = np.asarray(B, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {m.shape}")
    if m.size and not np.allclose(m, m.T, atol=1e-12, rtol=0.0):
        raise NotSymmetric("matrix is not symmetric")
    return m


def _register_size(n: int) -> int:
    """Dimension of the qubit register embedding n basis states."""
    return 1 << (n - 1).bit_length() if n > 1 else 1


def uniform_projected_state(B: DiracOperator) -> StateVector:
    """Equal amplitudes over the composite Dirac basis, zero on the padding."""
    n = B.dim if isinstance(B, DiracOperator) else int(B)
    if n == 0:
        raise EmptyBasis("the composite Dirac basis is empty")
    reg = _register_size(n)
    amps = np.zeros(reg, dtype=complex)
    amps[:n] = 1.0 / math.sqrt(n)
    return StateVector(amps, (("system", reg),))


def grover_project(psi: StateVector, oracle) -> tuple[StateVector, int]:
    """Rotate `psi` toward the oracle-marked subspace with K = floor(pi/4theta) steps.

    One step reflects about the marked subspace (phase flip on marked basis
    states) and then about the initial state, with an overall sign flip.
    The final overlap with the marked subspace is sin((2K+1)*theta) where
    sin(theta) is the initial overlap.
    """
    amps = psi.amplitudes
    if callable(oracle):
        marked = np.fromiter((bool(oracle(i)) for i in range(amps.size)),
                             dtype=bool, count=amps.size)
    else:
        marked = np.asarray(oracle, dtype=bool)
        if marked.size != amps.size:
            raise ValueError("oracle mask size does not match the state")
    overlap = float(np.sqrt(np.sum(np.abs(amps[marked]) ** 2)))
    if overlap <= 0.0:
        raise NoMarkedStates("the state has no overlap with the marked subspace")
    theta = math.asin(min(overlap, 1.0))
    steps = int(math.floor(math.pi / (4.0 * theta)))
    initial = amps.copy()
    v = amps.copy()
    for _ in range(steps):
        v = np.where(marked, -v, v)             # I - 2P
        v = 2.0 * np.vdot(initial, v) * initial - v  # -(I - 2|psi0><psi0|)
    return StateVector(v, psi.register_layout), steps


def exact_exponential(B, t: float, max_dim: int = DENSE_UNITARY_CAP) -> np.ndarray:
    """Dense unitary exp(i*t*B) via eigendecomposition."""
    m = _dirac_dense(B)
    if m.shape[0] > max_dim:
        raise TooLarge(f"dimension {m.shape[0]} exceeds the dense cap {max_dim}")
    if m.size == 0:
        return np.zeros((0, 0), dtype=complex)
    vals, vecs = np.linalg.eigh(m)
    return (vecs * np.exp(1j * t * vals)) @ vecs.conj().T


def _swap_exponential(m: np.ndarray, dt: float) -> sp.csr_matrix:
    """exp(-i*dt*S) for the one-sparse SWAP matrix S[(y,x),(x,y)] = m[x,y].

    S couples each unordered pair {(x,y), (y,x)} through the real entry
    m[x,y], so the exponential is assembled from closed-form 2x2 blocks.
    """
    n = m.shape[0]
    rows, cols, data = [], [], []
    for x in range(n):
        rows.append(x * n + x)
        cols.append(x * n + x)
        data.append(np.exp(-1j * dt * m[x, x]))
    for x in range(n):
        for y in range(x + 1, n):
            i, j = x * n + y, y * n + x
            w = m[x, y]
            if w == 0.0:
                rows += [i, j]
                cols += [i, j]
                data += [1.0, 1.0]
                continue
            c, s = math.cos(w * dt), math.sin(w * dt)
            rows += [i, j, i, j]
            cols += [i, j, j, i]
            data += [c, c, -1j * s, -1j * s]
    return sp.csr_matrix((data, (rows, cols)), shape=(n * n, n * n))


def _swap_channel_kraus(m: np.ndarray, dt: float) -> np.ndarray:
    """Kraus operators of one SWAP-channel step: attach the uniform ancilla,
    evolve under exp(-i*dt*S), trace the ancilla out."""
    n = m.shape[0]
    exp_s = _swap_exponential(m, dt)
    ks = np.empty((n, n, n), dtype=complex)
    for a in range(n):
        block = exp_s[a * n:(a + 1) * n, :].toarray().reshape(n, n, n)  # [i, x, j]
        ks[a] = block.sum(axis=1) / math.sqrt(n)
    return ks


def trotter_exponential(B, t: float, steps: int, max_dim: int = TROTTER_DIM_CAP):
    """Channel approximating rho -> exp(-i*t*B/N) rho exp(+i*t*B/N) by `steps`
    SWAP-channel repetitions with dt = t/steps.

    Returns a linear transformer taking a StateVector, an amplitude vector,
    or a density matrix over the N-dimensional composite basis, and
    returning the output density matrix. The per-step defect is second
    order in dt. The subspace re-projection between steps is the identity
    here because the simulation tracks composite-basis coordinates only.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    m = _dirac_dense(B)
    n = m.shape[0]
    if n > max_dim:
        raise TooLarge(f"dimension {n} exceeds the SWAP-channel cap {max_dim}")
    ks = _swap_channel_kraus(m, t / steps)

    def channel(state) -> np.ndarray:
        if isinstance(state, StateVector):
            vec = state.amplitudes[:n]
            rho = np.outer(vec, vec.conj())
        else:
            arr = np.asarray(state, dtype=complex)
            rho = np.outer(arr, arr.conj()) if arr.ndim == 1 else arr.copy()
        if rho.shape != (n, n):
            raise ValueError(f"state of shape {rho.shape} does not match dimension {n}")
        for _ in range(steps):
            rho = np.einsum("aij,jk,alk->il", ks, rho, ks.conj(), optimize=True)
        return rho

    return channel


def _parse_evolution(evolution) -> tuple[str, int | None]:
    if evolution == "exact":
        return "exact", None
    if isinstance(evolution, str) and evolution.startswith("trotter"):
        _, _, arg = evolution.partition("=")
        steps = int(arg) if arg else 1
        if steps < 1:
            raise ValueError("trotter steps must be >= 1")
        return "trotter", steps
    raise ValueError(f"unknown evolution {evolution!r}; use 'exact' or 'trotter=N'")


def _check_m(m_val: int) -> int:
    if m_val < 2 or (m_val & (m_val - 1)) != 0:
        raise BadM(f"M must be a power of two >= 2, got {m_val}")
    return int(math.log2(m_val))


def phase_estimation(B: DiracOperator, l: int, M: int, evolution="exact",
                     max_dim: int = DEFAULT_MAX_DIM) -> PhaseDistribution:
    """Exact readout distribution of the phase-estimation circuit for B."""
    mode, steps = _parse_evolution(evolution)
    m_qubits = _check_m(M)
    if l < 1:
        raise ValueError("l must be >= 1")
    dense = _dirac_dense(B)
    n = dense.shape[0]
    if n == 0:
        raise EmptyBasis("the composite Dirac basis is empty")
    xi = B.xi if isinstance(B, DiracOperator) else 0.0
    reg = _register_size(n)
    total = reg * reg * M
    if total > max_dim:
        raise TooLarge(f"composite dimension {total} exceeds the cap {max_dim}")
    if mode == "trotter":
        probs = _phase_estimation_trotter(dense, n, reg, l, M, steps)
        return PhaseDistribution(probs, l=l, M=M, xi=xi, hilbert_dim=n)

    # |s~>_12 (x) |R>_R: uniform over the N diagonal pairs times the R register
    psi = np.zeros((reg, reg, M), dtype=complex)
    amp = 1.0 / math.sqrt(n * M)
    for x in range(n):
        psi[x, x, :] = amp
    vals, vecs = np.linalg.eigh(dense)
    phases = np.exp(2j * np.pi * l * vals / M)
    for j in range(m_qubits):
        u_sub = (vecs * (phases ** (1 << j))) @ vecs.conj().T
        u_full = np.eye(reg, dtype=complex)
        u_full[:n, :n] = u_sub
        ys = [y for y in range(M) if (y >> j) & 1]
        psi[:, :, ys] = np.einsum("st,aty->asy", u_full, psi[:, :, ys], optimize=True)
    psi = np.fft.fft(psi, axis=2, norm="ortho")
    probs = (np.abs(psi) ** 2).sum(axis=(0, 1))
    return PhaseDistribution(probs, l=l, M=M, xi=xi, hilbert_dim=n)


def _phase_estimation_trotter(dense: np.ndarray, n: int, reg: int, l: int, M: int,
                              steps: int) -> np.ndarray:
    """Density-matrix phase estimation with the SWAP-channel evolution.

    Each unit of controlled evolution applies `steps` channel steps to the
    register-2 slices whose R value is at least the unit index, so slice y
    receives y units, approximating U^y with U = exp(2*pi*i*l*B/M).
    """
    total = reg * reg * M
    if total > TROTTER_COMPOSITE_CAP:
        raise TooLarge(
            f"composite dimension {total} exceeds the density-matrix cap "
            f"{TROTTER_COMPOSITE_CAP} for trotter evolution")
    # exp(-i*t_unit*B/N) = exp(+2*pi*i*l*B/M) needs t_unit = -2*pi*l*N/M
    dt = -2.0 * math.pi * l * n / (M * steps)
    ks = _swap_channel_kraus(dense, dt)
    pad = 1.0 / math.sqrt(n)
    kraus = np.zeros((n, reg, reg), dtype=complex)
    kraus[:, :n, :n] = ks
    for x in range(n, reg):
        kraus[:, x, x] = pad  # padding states pass through, weight <a|s>
    kbar = kraus.sum(axis=0) * pad  # cross-slice factor sum_a <a|s> K_a

    vec = np.zeros((reg, reg, M), dtype=complex)
    amp = 1.0 / math.sqrt(n * M)
    for x in range(n):
        vec[x, x, :] = amp
    # rho indexed (x1, x2, y, x1', x2', y'); the channel acts on x2 per y slice
    rho = np.einsum("aty,bsz->atybsz", vec, vec.conj())
    for unit in range(1, M):
        act, ina = slice(unit, M), slice(0, unit)
        for _ in range(steps):
            aa = rho[:, :, act, :, :, act]
            acc = np.zeros_like(aa)
            for a in range(n):
                tmp = np.einsum("st,atybuz->asybuz", kraus[a], aa, optimize=True)
                acc += np.einsum("asybuz,vu->asybvz", tmp, kraus[a].conj(), optimize=True)
            rho[:, :, act, :, :, act] = acc
            rho[:, :, act, :, :, ina] = np.einsum(
                "st,atybuz->asybuz", kbar, rho[:, :, act, :, :, ina], optimize=True)
            rho[:, :, ina, :, :, act] = np.einsum(
                "atybuz,vu->atybvz", rho[:, :, ina, :, :, act], kbar.conj(), optimize=True)
    rho = np.fft.fft(rho, axis=2, norm="ortho")
    rho = np.fft.ifft(rho, axis=5, norm="ortho")
    probs = np.einsum("atpatp->p", rho).real
    trace = probs.sum()
    if abs(trace - 1.0) > 1e-6:
        raise ValueError(f"density trace drifted to {trace}")
    return probs / trace


def analytic_distribution(eigenvalues, l: int, M: int) -> np.ndarray:
    """P(p) evaluated from a spectrum via the finite geometric sum.

    Each eigenvalue contributes |M^(-1) sum_y exp(2*pi*i*(l*lambda - p)y/M)|^2,
    which is well defined at the peaks where the closed form would be 0/0.
    """
    lam = np.asarray(eigenvalues, dtype=float)
    y = np.arange(M)
    probs = np.zeros(M)
    for p in range(M):
        amps = np.exp(2j * np.pi * (l * lam[:, None] - p) * y[None, :] / M).sum(axis=1) / M
        probs[p] = float(np.sum(np.abs(amps) ** 2))
    return probs / lam.size


def betti_from_distribution(dist: PhaseDistribution) -> BettiEstimate:
    """Round N*P(l*xi) to the persistent Betti number, reporting the leakage."""
    peak = dist.l * dist.xi
    p = int(round(peak))
    if abs(peak - p) > 1e-9:
        raise ValueError(f"l*xi = {peak} is not an integer bin position")
    if not 0 <= p < dist.M:
        raise ValueError(f"peak bin {p} outside 0..{dist.M - 1}")
    unrounded = float(dist.hilbert_dim * dist.probs[p])
    value = int(round(unrounded))
    if abs(unrounded - value) > 0.3:
        raise AmbiguousRounding(
            f"N*P({p}) = {unrounded} is not within 0.3 of an integer")
    return BettiEstimate(value=value, unrounded=unrounded, leakage=unrounded - value)


def sample_counts(dist: PhaseDistribution, shots: int, seed: int) -> np.ndarray:
    """Multinomial counts over p = 0..M-1, deterministic per seed."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = np.random.default_rng(seed)
    probs = dist.probs / dist.probs.sum()
    return rng.multinomial(shots, probs)
