"""Normalized MPO Hamiltonians for the benchmark models.

Builds the 1D and 2D transverse-field Ising models and generic Pauli-sum
operators as matrix product operators, divided by a triangle-inequality
norm bound so the spectrum is certified to lie in [-1, 1].
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, StructuralError
from .mps import Mpo, _select_rank, _svd

_PAULI = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128),
    "Y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128),
    "Z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128),
}


@dataclass(frozen=True)
class PauliSum:
    """A real-weighted sum of Pauli strings.

    ``terms`` is a list of (coefficient, label string) pairs where each
    label string has one character in {I, X, Y, Z} per site.
    """

    terms: tuple[tuple[float, str], ...]
    n_sites: int

    def __post_init__(self):
        if not self.terms:
            raise ParameterError("a PauliSum needs at least one term")
        for coeff, labels in self.terms:
            if len(labels) != self.n_sites:
                raise StructuralError(
                    f"term {labels!r} has length {len(labels)}, expected {self.n_sites}")
            if any(ch not in _PAULI for ch in labels):
                raise ParameterError(f"invalid Pauli label in {labels!r}")
            if not np.isfinite(coeff) or coeff == 0.0:
                raise ParameterError(f"coefficient {coeff} must be finite and nonzero")

    @classmethod
    def from_terms(cls, terms, n_sites: int) -> "PauliSum":
        return cls(tuple((float(c), str(s).upper()) for c, s in terms), n_sites)

    @property
    def coeff_norm_bound(self) -> float:
        """Triangle-inequality bound on the operator norm."""
        return float(sum(abs(c) for c, _ in self.terms))

    def scaled(self, divisor: float) -> "PauliSum":
        return PauliSum(tuple((c / divisor, s) for c, s in self.terms), self.n_sites)

    @classmethod
    def from_text(cls, text: str) -> "PauliSum":
        """Parse the one-term-per-line format ``coeff  IXZY...``."""
        terms = []
        n_sites = None
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ParameterError(f"line {lineno}: expected 'coeff PAULISTRING', got {line!r}")
            coeff_str, labels = parts
            try:
                coeff = float(coeff_str)
            except ValueError as exc:
                raise ParameterError(f"line {lineno}: bad coefficient {coeff_str!r}") from exc
            labels = labels.upper()
            if n_sites is None:
                n_sites = len(labels)
            terms.append((coeff, labels))
        if not terms:
            raise ParameterError("no terms found in Pauli-sum text")
        return cls.from_terms(terms, n_sites)

    def to_text(self) -> str:
        return "\n".join(f"{c:.17g}  {s}" for c, s in self.terms) + "\n"


@dataclass(frozen=True)
class NormalizedHamiltonian:
    """An MPO Hamiltonian divided by ``scale`` so its spectrum is in [-1, 1].

    ``pauli_sum`` holds the already-scaled term list; the dense oracle uses
    it for matrix-free application.  ``scale`` converts normalized energies
    back to raw model units.
    """

    mpo: Mpo
    scale: float
    pauli_sum: PauliSum
    model_meta: dict = field(default_factory=dict)

    @property
    def n_sites(self) -> int:
        return self.mpo.n_sites

    @property
    def growth_factor(self) -> int:
        return self.mpo.growth_factor


def tfim_1d(L: int, J: float, h: float) -> NormalizedHamiltonian:
    """Open-chain transverse-field Ising model, -J sum XX - h sum Z.

    The MPO has bond dimension 3; the normalization divisor is
    |J|(L-1) + |h|L.
    """
    if L < 2:
        raise ParameterError(f"need L >= 2, got {L}")
    scale = abs(J) * (L - 1) + abs(h) * L
    if scale == 0.0:
        raise ParameterError("J and h cannot both be zero")
    jj, hh = J / scale, h / scale
    eye, x, z = _PAULI["I"], _PAULI["X"], _PAULI["Z"]

    w = np.zeros((3, 2, 2, 3), dtype=np.complex128)
    w[0, :, :, 0] = eye
    w[0, :, :, 1] = x
    w[0, :, :, 2] = -hh * z
    w[1, :, :, 2] = -jj * x
    w[2, :, :, 2] = eye
    first = w[0:1]
    last = w[:, :, :, 2:3]
    mpo = Mpo([first] + [w] * (L - 2) + [last])

    terms = []
    if jj != 0.0:
        terms += [(-jj, _string(L, {i: "X", i + 1: "X"})) for i in range(L - 1)]
    if hh != 0.0:
        terms += [(-hh, _string(L, {i: "Z"})) for i in range(L)]
    return NormalizedHamiltonian(
        mpo=mpo,
        scale=scale,
        pauli_sum=PauliSum.from_terms(terms, L),
        model_meta={"model": "tfim1d", "L": L, "J": J, "h": h, "ordering": "chain"},
    )


def _string(n: int, ops: dict[int, str]) -> str:
    chars = ["I"] * n
    for i, op in ops.items():
        chars[i] = op
    return "".join(chars)


def _snake_position(r: int, c: int, L: int) -> int:
    return r * L + (c if r % 2 == 0 else L - 1 - c)


def tfim_2d(L: int, J: float, h: float) -> NormalizedHamiltonian:
    """L x L open-lattice transverse-field Ising model on a snake-ordered chain.

    Vertical lattice bonds become range-dependent couplings along the
    snake.  The MPO is a finite-state automaton with one pending state per
    lattice column, so the bond dimension is at most L + 2.
    """
    if L < 2:
        raise ParameterError(f"need L >= 2, got {L}")
    n = L * L
    n_edges = 2 * L * (L - 1)
    scale = abs(J) * n_edges + abs(h) * n
    if scale == 0.0:
        raise ParameterError("J and h cannot both be zero")
    jj, hh = J / scale, h / scale
    eye, x, z = _PAULI["I"], _PAULI["X"], _PAULI["Z"]

    pos_of = {}
    site_of = {}
    for r in range(L):
        for c in range(L):
            p = _snake_position(r, c, L)
            pos_of[(r, c)] = p
            site_of[p] = (r, c)

    # Each lattice XX edge becomes an automaton interval [open, close] on a
    # pending state labeled by the opening site's column.
    bonds = []
    for r in range(L):
        for c in range(L):
            if c + 1 < L:
                bonds.append((pos_of[(r, c)], pos_of[(r, c + 1)]))
            if r + 1 < L:
                bonds.append((pos_of[(r, c)], pos_of[(r + 1, c)]))
    bonds = [(min(p, q), max(p, q)) for p, q in bonds]
    assert len(bonds) == n_edges

    # transitions[p] maps (state_in, state_out) -> 2x2 operator
    IDLE, FINAL = 0, L + 1
    pend = lambda col: 1 + col
    transitions = [dict() for _ in range(n)]
    for p in range(n):
        transitions[p][(IDLE, IDLE)] = eye
        transitions[p][(FINAL, FINAL)] = eye
        transitions[p][(IDLE, FINAL)] = -hh * z
    for p_open, p_close in bonds:
        label = pend(site_of[p_open][1])
        transitions[p_open][(IDLE, label)] = x
        transitions[p_close][(label, FINAL)] = -jj * x
        for q in range(p_open + 1, p_close):
            transitions[q][(label, label)] = eye

    dim = L + 2
    tensors = []
    for p in range(n):
        w = np.zeros((dim, 2, 2, dim), dtype=np.complex128)
        for (a, b), op in transitions[p].items():
            w[a, :, :, b] = op
        if p == 0:
            w = w[IDLE:IDLE + 1]
        if p == n - 1:
            w = w[:, :, :, FINAL:FINAL + 1]
        tensors.append(w)
    mpo = Mpo(tensors)

    terms = []
    if jj != 0.0:
        for p_open, p_close in bonds:
            terms.append((-jj, _string(n, {p_open: "X", p_close: "X"})))
    if hh != 0.0:
        for p in range(n):
            terms.append((-hh, _string(n, {p: "Z"})))
    return NormalizedHamiltonian(
        mpo=mpo,
        scale=scale,
        pauli_sum=PauliSum.from_terms(terms, n),
        model_meta={"model": "tfim2d", "L": L, "J": J, "h": h, "ordering": "row-snake"},
    )


def paulisum_to_mpo(ps: PauliSum, compress_tol: float = 0.0) -> Mpo:
    """Sum-of-strings MPO; each string costs one unit of bond dimension.

    With ``compress_tol`` > 0 the stacked operator is recompressed by SVD
    sweeps at that relative singular-value tolerance.
    """
    n = ps.n_sites
    tensors = None
    for coeff, labels in ps.terms:
        term = [_PAULI[ch].reshape(1, 2, 2, 1).copy() for ch in labels]
        term[0] = term[0] * coeff
        tensors = term if tensors is None else _mpo_stack(tensors, term)
    if compress_tol > 0.0 and n > 1:
        tensors = _mpo_compress(tensors, compress_tol)
    return Mpo(tensors)


def _mpo_stack(a: list, b: list) -> list:
    """Direct sum of two MPO tensor chains (operator addition)."""
    n = len(a)
    if n == 1:
        return [a[0] + b[0]]
    out = []
    for i in range(n):
        ta, tb = a[i], b[i]
        if i == 0:
            out.append(np.concatenate([ta, tb], axis=3))
        elif i == n - 1:
            out.append(np.concatenate([ta, tb], axis=0))
        else:
            la, _, _, ra = ta.shape
            lb, _, _, rb = tb.shape
            blk = np.zeros((la + lb, 2, 2, ra + rb), dtype=np.complex128)
            blk[:la, :, :, :ra] = ta
            blk[la:, :, :, ra:] = tb
            out.append(blk)
    return out


def _mpo_compress(tensors: list, svd_tol: float) -> list:
    """Frobenius-norm SVD compression, sweeping right-to-left then left-to-right."""
    n = len(tensors)
    work = [t.copy() for t in tensors]
    for i in range(n - 1, 0, -1):
        dl = work[i].shape[0]
        mat = work[i].reshape(dl, -1)
        u, s, vh = _svd(mat)
        k = _select_rank(s, None, svd_tol)
        work[i] = vh[:k].reshape(k, 2, 2, work[i].shape[3])
        work[i - 1] = np.tensordot(work[i - 1], u[:, :k] * s[:k], axes=(3, 0))
    for i in range(n - 1):
        dr = work[i].shape[3]
        mat = work[i].reshape(-1, dr)
        u, s, vh = _svd(mat)
        k = _select_rank(s, None, svd_tol)
        work[i] = u[:, :k].reshape(work[i].shape[0], 2, 2, k)
        carry = s[:k, None] * vh[:k]
        work[i + 1] = np.tensordot(carry, work[i + 1], axes=(1, 0))
    return work


def normalize_pauli_sum(ps: PauliSum, compress_tol: float = 1e-12,
                        model_meta: dict | None = None) -> NormalizedHamiltonian:
    """Wrap a raw Pauli sum as a normalized Hamiltonian (divide by sum |c_i|)."""
    scale = ps.coeff_norm_bound
    scaled = ps.scaled(scale)
    meta = {"model": "pauli", "n_sites": ps.n_sites}
    if model_meta:
        meta.update(model_meta)
    return NormalizedHamiltonian(
        mpo=paulisum_to_mpo(scaled, compress_tol=compress_tol),
        scale=scale,
        pauli_sum=scaled,
        model_meta=meta,
    )
