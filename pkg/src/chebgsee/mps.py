"""Matrix product state / operator core.

Dense small-tensor algebra for open-boundary chains of qubits: inner
products, MPO application, weighted addition, SVD truncation, canonical
forms, dense conversion, and a versioned binary container format.

Conventions
-----------
* MPS site tensors have shape ``(D_left, 2, D_right)``; MPO site tensors
  have shape ``(D_left, 2, 2, D_right)`` with index order
  (left bond, physical out, physical in, right bond).
* Boundary bonds have dimension 1.
* ``to_dense`` orders amplitudes with site 0 as the most significant bit.
* States carry an optional ``log_norm``: the represented vector is
  ``exp(log_norm)`` times the contraction of the site tensors.  This keeps
  site tensors O(1) even when the represented norm drifts.
* All values are treated as immutable; every operation returns new objects.
"""

from __future__ import annotations

import io
import json
import math
import os
import struct
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, FormatError, ParameterError, StructuralError

_MAGIC = b"TNSC"
_FORMAT_VERSION = 1

DENSE_SITE_LIMIT = 20
_DENSE_LIMIT_ENV = "CHEBGSEE_DENSE_LIMIT"


def dense_site_limit() -> int:
    """Dense-conversion capacity, overridable via CHEBGSEE_DENSE_LIMIT."""
    value = os.environ.get(_DENSE_LIMIT_ENV)
    if value is None:
        return DENSE_SITE_LIMIT
    return int(value)


def _as_complex(a) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.complex128)


class Mps:
    """An open-boundary matrix product state on qubits.

    Parameters
    ----------
    tensors:
        Site tensors of shape ``(D_left, 2, D_right)`` with matching
        adjacent bonds and boundary bonds of dimension 1.
    log_norm:
        Stored log-scale; the represented state is
        ``exp(log_norm) * contract(tensors)``.
    ortho_center:
        Site index around which the chain is known to be in mixed
        canonical form, or None when unknown.
    """

    __slots__ = ("tensors", "log_norm", "ortho_center")

    def __init__(self, tensors, log_norm: float = 0.0, ortho_center: int | None = None):
        tensors = tuple(_as_complex(t) for t in tensors)
        if not tensors:
            raise StructuralError("an MPS needs at least one site")
        for i, t in enumerate(tensors):
            if t.ndim != 3:
                raise StructuralError(f"site {i}: expected rank-3 tensor, got shape {t.shape}")
            if t.shape[1] != 2:
                raise StructuralError(f"site {i}: physical dimension must be 2, got {t.shape[1]}")
            if i > 0 and t.shape[0] != tensors[i - 1].shape[2]:
                raise StructuralError(
                    f"bond mismatch between sites {i - 1} and {i}: "
                    f"{tensors[i - 1].shape[2]} vs {t.shape[0]}"
                )
        if tensors[0].shape[0] != 1 or tensors[-1].shape[2] != 1:
            raise StructuralError("boundary bonds must have dimension 1")
        if ortho_center is not None and not (0 <= ortho_center < len(tensors)):
            raise ParameterError(f"ortho_center {ortho_center} out of range")
        self.tensors = tensors
        self.log_norm = float(log_norm)
        self.ortho_center = ortho_center

    @property
    def n_sites(self) -> int:
        return len(self.tensors)

    @property
    def bond_dims(self) -> tuple[int, ...]:
        """Bond dimensions including the two trivial boundary bonds."""
        return (1,) + tuple(t.shape[2] for t in self.tensors)

    @property
    def max_bond(self) -> int:
        return max(self.bond_dims)

    def norm(self) -> float:
        """Euclidean norm of the represented state."""
        return math.sqrt(max(inner(self, self).real, 0.0))

    def __repr__(self) -> str:
        return f"Mps(n_sites={self.n_sites}, max_bond={self.max_bond}, log_norm={self.log_norm:g})"

    @classmethod
    def product_state(cls, local_states) -> "Mps":
        """Product state from per-site 2-vectors (or 0/1 basis labels)."""
        tensors = []
        for s in local_states:
            if isinstance(s, (int, np.integer)):
                v = np.zeros(2, dtype=np.complex128)
                v[int(s)] = 1.0
            else:
                v = _as_complex(s).reshape(2)
            tensors.append(v.reshape(1, 2, 1))
        return cls(tensors, ortho_center=0)

    @classmethod
    def basis_state(cls, bits: str) -> "Mps":
        """Computational basis state from a bit string like ``"0100"``."""
        return cls.product_state([int(b) for b in bits])

    @classmethod
    def random(cls, n_sites: int, bond_dim: int, rng=None) -> "Mps":
        """Random normalized MPS with bonds capped at the physical maximum."""
        rng = np.random.default_rng(rng)
        dims = [1]
        for i in range(1, n_sites):
            dims.append(min(bond_dim, 2 ** i, 2 ** (n_sites - i)))
        dims.append(1)
        tensors = [
            rng.standard_normal((dims[i], 2, dims[i + 1]))
            + 1j * rng.standard_normal((dims[i], 2, dims[i + 1]))
            for i in range(n_sites)
        ]
        psi = cls(tensors)
        nrm = psi.norm()
        first = psi.tensors[0] / nrm
        return cls((first,) + psi.tensors[1:], ortho_center=None)

    @classmethod
    def from_dense(cls, vec, chi_max: int | None = None, svd_tol: float = 0.0) -> "Mps":
        """Exact (or truncated) MPS factorization of a dense state vector."""
        vec = _as_complex(vec).ravel()
        n = int(round(math.log2(vec.size)))
        if 2 ** n != vec.size:
            raise ParameterError(f"vector length {vec.size} is not a power of two")
        tensors = []
        rest = vec.reshape(1, -1)
        d_left = 1
        for _ in range(n - 1):
            mat = rest.reshape(d_left * 2, -1)
            u, s, vh = _svd(mat)
            k = _select_rank(s, chi_max, svd_tol)
            tensors.append(u[:, :k].reshape(d_left, 2, k))
            rest = s[:k, None] * vh[:k]
            d_left = k
        tensors.append(rest.reshape(d_left, 2, 1))
        return cls(tensors, ortho_center=n - 1)


class Mpo:
    """An open-boundary matrix product operator on qubits."""

    __slots__ = ("tensors",)

    def __init__(self, tensors):
        tensors = tuple(_as_complex(t) for t in tensors)
        if not tensors:
            raise StructuralError("an MPO needs at least one site")
        for i, t in enumerate(tensors):
            if t.ndim != 4:
                raise StructuralError(f"site {i}: expected rank-4 tensor, got shape {t.shape}")
            if t.shape[1] != 2 or t.shape[2] != 2:
                raise StructuralError(f"site {i}: physical dimensions must be 2x2, got {t.shape[1:3]}")
            if i > 0 and t.shape[0] != tensors[i - 1].shape[3]:
                raise StructuralError(
                    f"bond mismatch between sites {i - 1} and {i}: "
                    f"{tensors[i - 1].shape[3]} vs {t.shape[0]}"
                )
        if tensors[0].shape[0] != 1 or tensors[-1].shape[3] != 1:
            raise StructuralError("boundary bonds must have dimension 1")
        self.tensors = tensors

    @property
    def n_sites(self) -> int:
        return len(self.tensors)

    @property
    def bond_dims(self) -> tuple[int, ...]:
        return (1,) + tuple(t.shape[3] for t in self.tensors)

    @property
    def growth_factor(self) -> int:
        """Bond-growth factor D_H: the largest MPO bond dimension."""
        return max(self.bond_dims)

    def __repr__(self) -> str:
        return f"Mpo(n_sites={self.n_sites}, max_bond={self.growth_factor})"

    @classmethod
    def identity(cls, n_sites: int) -> "Mpo":
        eye = np.eye(2, dtype=np.complex128).reshape(1, 2, 2, 1)
        return cls([eye] * n_sites)

    def to_dense(self, site_limit: int | None = None) -> np.ndarray:
        """Dense matrix of the operator; site 0 is the most significant bit."""
        limit = dense_site_limit() if site_limit is None else site_limit
        if self.n_sites > limit:
            raise CapacityError(f"dense conversion of {self.n_sites} sites exceeds limit {limit}")
        mat = np.ones((1, 1, 1), dtype=np.complex128)  # (out, in, bond)
        for t in self.tensors:
            mat = np.einsum("pqa,astb->psqtb", mat, t)
            p, s, q, tt, b = mat.shape
            mat = mat.reshape(p * s, q * tt, b)
        return mat[:, :, 0]


def _svd(mat: np.ndarray):
    """SVD with a fallback driver for the rare gesdd convergence failure."""
    try:
        return np.linalg.svd(mat, full_matrices=False)
    except np.linalg.LinAlgError:
        from scipy.linalg import svd as scipy_svd

        return scipy_svd(mat, full_matrices=False, lapack_driver="gesvd")


def _select_rank(s: np.ndarray, chi_max: int | None, svd_tol: float) -> int:
    """Number of singular values kept under the cap + relative-tolerance rule."""
    if s.size == 0:
        return 1
    k = s.size
    if svd_tol > 0.0 and s[0] > 0.0:
        k = int(np.count_nonzero(s >= svd_tol * s[0]))
    if chi_max is not None:
        k = min(k, int(chi_max))
    return max(k, 1)


def inner(a: Mps, b: Mps) -> complex:
    """Inner product <a|b> by left-to-right transfer contraction."""
    if a.n_sites != b.n_sites:
        raise StructuralError(f"site counts differ: {a.n_sites} vs {b.n_sites}")
    env = np.ones((1, 1), dtype=np.complex128)
    for ta, tb in zip(a.tensors, b.tensors):
        # env (alpha, beta) -> contract with conj(A) (alpha,s,alpha') and B (beta,s,beta')
        tmp = np.tensordot(env, tb, axes=(1, 0))           # (alpha, s, beta')
        env = np.tensordot(ta.conj(), tmp, axes=([0, 1], [0, 1]))  # (alpha', beta')
    return complex(env[0, 0]) * math.exp(a.log_norm + b.log_norm)


def apply_mpo(op: Mpo, psi: Mps) -> Mps:
    """Exact MPO application; every bond dimension multiplies by the MPO's."""
    if op.n_sites != psi.n_sites:
        raise StructuralError(f"site counts differ: {op.n_sites} vs {psi.n_sites}")
    out = []
    for w, a in zip(op.tensors, psi.tensors):
        wl, _, _, wr = w.shape
        al, _, ar = a.shape
        c = np.tensordot(w, a, axes=(2, 1))        # (wl, s_out, wr, al, ar)
        c = c.transpose(0, 3, 1, 2, 4)             # (wl, al, s_out, wr, ar)
        out.append(np.ascontiguousarray(c.reshape(wl * al, 2, wr * ar)))
    return Mps(out, log_norm=psi.log_norm)


def add(a: Mps, b: Mps, coeff_a: complex = 1.0, coeff_b: complex = 1.0) -> Mps:
    """Direct-sum construction of coeff_a*|a> + coeff_b*|b>."""
    if a.n_sites != b.n_sites:
        raise StructuralError(f"site counts differ: {a.n_sites} vs {b.n_sites}")
    wa = complex(coeff_a) * math.exp(a.log_norm)
    wb = complex(coeff_b) * math.exp(b.log_norm)
    n = a.n_sites
    if n == 1:
        return Mps([wa * a.tensors[0] + wb * b.tensors[0]], ortho_center=0)
    out = []
    for i in range(n):
        ta, tb = a.tensors[i], b.tensors[i]
        if i == 0:
            out.append(np.concatenate([wa * ta, wb * tb], axis=2))
        elif i == n - 1:
            out.append(np.concatenate([ta, tb], axis=0))
        else:
            la, _, ra = ta.shape
            lb, _, rb = tb.shape
            blk = np.zeros((la + lb, 2, ra + rb), dtype=np.complex128)
            blk[:la, :, :ra] = ta
            blk[la:, :, ra:] = tb
            out.append(blk)
    return Mps(out)


@dataclass
class TruncReport:
    """Diagnostics from one truncation sweep.

    The sweep discards mutually orthogonal components (each bond's SVD is a
    Schmidt decomposition of the current state), so the global truncation
    error satisfies ||psi - psi_trunc||^2 = sum of discarded weights
    exactly, and <psi|psi_trunc> = ||psi_trunc||^2.  ``delta_t`` and
    ``cosine_error`` are computed through these identities, which stay
    accurate when the error is far below the state norm.
    ``discarded_weights`` holds the per-bond sum of squared discarded
    singular values (in the chain's internal scale).
    """

    delta_t: float
    norm_in: float
    norm_out: float
    overlap: complex
    discarded_weights: np.ndarray
    bond_dims: tuple[int, ...]

    @property
    def cosine_error(self) -> float:
        """Local fitting error |1 - <out|in> / (||out|| ||in||)|."""
        if self.norm_in == 0.0 or self.norm_out == 0.0:
            return 0.0
        q = min((self.delta_t / self.norm_in) ** 2, 1.0)
        return q / (1.0 + math.sqrt(1.0 - q))


def _right_canonicalize_tensors(tensors: list[np.ndarray]) -> list[np.ndarray]:
    """Sweep right-to-left, leaving sites 1..n-1 right-isometric (in place)."""
    for i in range(len(tensors) - 1, 0, -1):
        dl, _, dr = tensors[i].shape
        mat = tensors[i].reshape(dl, 2 * dr)
        q1, r1 = np.linalg.qr(mat.conj().T)        # mat = r1^H q1^H
        k = q1.shape[1]
        tensors[i] = np.ascontiguousarray(q1.conj().T.reshape(k, 2, dr))
        tensors[i - 1] = np.tensordot(tensors[i - 1], r1.conj().T, axes=(2, 0))
    return tensors


def truncate(psi: Mps, chi_max: int | None = None, svd_tol: float = 0.0) -> tuple[Mps, TruncReport]:
    """Compress an MPS with one left-to-right SVD sweep.

    Keeps at most ``chi_max`` singular values per bond and drops values
    below ``svd_tol`` times the bond's largest one.  The output is in mixed
    canonical form with the center on the last site and unit-norm site
    tensors; the represented norm moves into ``log_norm``.
    """
    if chi_max is not None and chi_max < 1:
        raise ParameterError(f"chi_max must be >= 1, got {chi_max}")
    if svd_tol < 0.0:
        raise ParameterError(f"svd_tol must be >= 0, got {svd_tol}")
    n = psi.n_sites
    tensors = _right_canonicalize_tensors([t.copy() for t in psi.tensors])
    chain_norm_in = float(np.linalg.norm(tensors[0]))
    norm_in = chain_norm_in * math.exp(psi.log_norm)

    discarded = np.zeros(max(n - 1, 1))
    for i in range(n - 1):
        dl, _, dr = tensors[i].shape
        u, s, vh = _svd(tensors[i].reshape(dl * 2, dr))
        k = _select_rank(s, chi_max, svd_tol)
        discarded[i] = float(np.sum(s[k:] ** 2))
        tensors[i] = u[:, :k].reshape(dl, 2, k)
        carry = s[:k, None] * vh[:k]
        tensors[i + 1] = np.tensordot(carry, tensors[i + 1], axes=(1, 0))

    chain_norm_out = float(np.linalg.norm(tensors[-1]))
    if chain_norm_out > 0.0:
        tensors[-1] = tensors[-1] / chain_norm_out
        log_out = psi.log_norm + math.log(chain_norm_out)
    else:
        log_out = psi.log_norm
    out = Mps(tensors, log_norm=log_out, ortho_center=n - 1)

    scale = math.exp(psi.log_norm)
    norm_out = chain_norm_out * scale
    delta_t = math.sqrt(float(discarded.sum())) * scale
    report = TruncReport(
        delta_t=delta_t,
        norm_in=norm_in,
        norm_out=norm_out,
        overlap=complex(norm_out ** 2),
        discarded_weights=discarded if n > 1 else np.zeros(0),
        bond_dims=out.bond_dims,
    )
    return out, report


def canonicalize(psi: Mps, center: int) -> Mps:
    """Mixed canonical form around ``center`` (pure gauge, state unchanged)."""
    if not (0 <= center < psi.n_sites):
        raise ParameterError(f"center {center} out of range for {psi.n_sites} sites")
    tensors = [t.copy() for t in psi.tensors]
    for i in range(center):
        dl, _, dr = tensors[i].shape
        q, r = np.linalg.qr(tensors[i].reshape(dl * 2, dr))
        k = q.shape[1]
        tensors[i] = q.reshape(dl, 2, k)
        tensors[i + 1] = np.tensordot(r, tensors[i + 1], axes=(1, 0))
    for i in range(psi.n_sites - 1, center, -1):
        dl, _, dr = tensors[i].shape
        mat = tensors[i].reshape(dl, 2 * dr)
        q1, r1 = np.linalg.qr(mat.conj().T)
        k = q1.shape[1]
        tensors[i] = q1.conj().T.reshape(k, 2, dr)
        tensors[i - 1] = np.tensordot(tensors[i - 1], r1.conj().T, axes=(2, 0))
    return Mps(tensors, log_norm=psi.log_norm, ortho_center=center)


def isometry_residuals(psi: Mps, center: int) -> tuple[list[float], list[float]]:
    """Frobenius deviations from left/right isometry around ``center``.

    Returns residuals for sites left of the center (left-isometry check)
    and right of it (right-isometry check); both lists are empty when the
    chain has a single site.
    """
    left = []
    for i in range(center):
        t = psi.tensors[i]
        mat = t.reshape(-1, t.shape[2])
        left.append(float(np.linalg.norm(mat.conj().T @ mat - np.eye(t.shape[2]))))
    right = []
    for i in range(psi.n_sites - 1, center, -1):
        t = psi.tensors[i]
        mat = t.reshape(t.shape[0], -1)
        right.append(float(np.linalg.norm(mat @ mat.conj().T - np.eye(t.shape[0]))))
    return left, right


def to_dense(psi: Mps, site_limit: int | None = None) -> np.ndarray:
    """Full amplitude vector; site 0 is the most significant bit."""
    limit = dense_site_limit() if site_limit is None else site_limit
    if psi.n_sites > limit:
        raise CapacityError(f"dense conversion of {psi.n_sites} sites exceeds limit {limit}")
    vec = np.ones((1, 1), dtype=np.complex128)
    for t in psi.tensors:
        vec = np.tensordot(vec, t, axes=(1, 0))    # (p, s, D_right)
        vec = vec.reshape(-1, t.shape[2])
    return vec[:, 0] * math.exp(psi.log_norm)


def mpo_expectation(op: Mpo, psi: Mps) -> complex:
    """<psi|op|psi> by a single three-layer transfer contraction."""
    if op.n_sites != psi.n_sites:
        raise StructuralError(f"site counts differ: {op.n_sites} vs {psi.n_sites}")
    env = np.ones((1, 1, 1), dtype=np.complex128)  # (bra, mpo, ket)
    for w, a in zip(op.tensors, psi.tensors):
        tmp = np.tensordot(env, a, axes=(2, 0))            # (bra, mpo, s_in, ket')
        tmp = np.tensordot(tmp, w, axes=([1, 2], [0, 2]))  # (bra, ket', s_out, mpo')
        env = np.tensordot(a.conj(), tmp, axes=([0, 1], [0, 2]))  # (bra', ket', mpo')
        env = env.transpose(0, 2, 1)
    return complex(env[0, 0, 0]) * math.exp(2.0 * psi.log_norm)


# ---------------------------------------------------------------------------
# Binary container format
# ---------------------------------------------------------------------------

def _write_container(stream, kind: str, tensors, log_norm: float) -> None:
    header = {
        "kind": kind,
        "n_sites": len(tensors),
        "bond_dims": [1] + [int(t.shape[-1]) for t in tensors],
        "phys_dim": 2,
        "log_norm": float(log_norm),
        "dtype": "complex128",
        "byte_order": "little",
    }
    payload = json.dumps(header, sort_keys=True).encode("utf-8")
    stream.write(_MAGIC)
    stream.write(struct.pack("<I", _FORMAT_VERSION))
    stream.write(struct.pack("<I", len(payload)))
    stream.write(payload)
    for t in tensors:
        stream.write(np.ascontiguousarray(t, dtype="<c16").tobytes())


def _read_exact(stream, count: int, offset: int) -> bytes:
    data = stream.read(count)
    if len(data) != count:
        raise FormatError(f"truncated container: wanted {count} bytes, got {len(data)}",
                          offset=offset + len(data))
    return data


def _read_container(stream, expected_kind: str):
    offset = 0
    magic = _read_exact(stream, 4, offset)
    if magic != _MAGIC:
        raise FormatError(f"bad magic {magic!r}", offset=0)
    offset += 4
    version, = struct.unpack("<I", _read_exact(stream, 4, offset))
    if version != _FORMAT_VERSION:
        raise FormatError(f"unsupported container version {version}", offset=offset)
    offset += 4
    hlen, = struct.unpack("<I", _read_exact(stream, 4, offset))
    offset += 4
    try:
        header = json.loads(_read_exact(stream, hlen, offset).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"unreadable header: {exc}", offset=offset) from exc
    offset += hlen
    if header.get("kind") != expected_kind:
        raise FormatError(f"container holds {header.get('kind')!r}, expected {expected_kind!r}",
                          offset=offset)
    if header.get("dtype") != "complex128" or header.get("byte_order") != "little":
        raise FormatError("unsupported payload encoding", offset=offset)
    n = header["n_sites"]
    bonds = header["bond_dims"]
    if len(bonds) != n + 1 or bonds[0] != 1 or bonds[-1] != 1 or any(b < 1 for b in bonds):
        raise FormatError("inconsistent bond dimensions in header", offset=offset)
    phys = (2, 2) if expected_kind == "mpo" else (2,)
    tensors = []
    for i in range(n):
        shape = (bonds[i], *phys, bonds[i + 1])
        count = int(np.prod(shape)) * 16
        data = _read_exact(stream, count, offset)
        offset += count
        tensors.append(np.frombuffer(data, dtype="<c16").reshape(shape).astype(np.complex128))
    trailing = stream.read(1)
    if trailing:
        raise FormatError("trailing bytes after payload", offset=offset)
    return tensors, float(header.get("log_norm", 0.0))


def save_mps(psi: Mps, path) -> None:
    """Write an MPS to the versioned binary container format."""
    with open(path, "wb") as fh:
        _write_container(fh, "mps", psi.tensors, psi.log_norm)


def load_mps(path) -> Mps:
    """Read an MPS container; structural invariants are re-validated."""
    with open(path, "rb") as fh:
        tensors, log_norm = _read_container(fh, "mps")
    try:
        return Mps(tensors, log_norm=log_norm)
    except StructuralError as exc:
        raise FormatError(f"container violates MPS invariants: {exc}") from exc


def save_mpo(op: Mpo, path) -> None:
    """Write an MPO to the versioned binary container format."""
    with open(path, "wb") as fh:
        _write_container(fh, "mpo", op.tensors, 0.0)


def load_mpo(path) -> Mpo:
    """Read an MPO container; structural invariants are re-validated."""
    with open(path, "rb") as fh:
        tensors, _ = _read_container(fh, "mpo")
    try:
        return Mpo(tensors)
    except StructuralError as exc:
        raise FormatError(f"container violates MPO invariants: {exc}") from exc


def mps_to_bytes(psi: Mps) -> bytes:
    buf = io.BytesIO()
    _write_container(buf, "mps", psi.tensors, psi.log_norm)
    return buf.getvalue()


def mps_from_bytes(data: bytes) -> Mps:
    tensors, log_norm = _read_container(io.BytesIO(data), "mps")
    return Mps(tensors, log_norm=log_norm)
