"""Exhaustive orbit-separation certification for sorted embeddings.

For A = (I_d | a_1 ... a_{D-d}) in identity-augmented form, the sorted
embedding fails to separate orbits at some cloud (written here as
X in R^{d x n}, rows x_i holding the i-th coordinates of the n points)
exactly when permutation matrices (P_1..P_d) and (Q_1..Q_{D-d}) exist
with

    for every tail column j:   sum_i a_j[i] (P_i - Q_j) x_i = 0, and
    for every P in S_n there is an i with (P - P_i) x_i != 0.

``certify_separation`` enumerates the permutation tuples exhaustively
(left-coset reduced: P_1 is pinned to the identity, which is harmless
because replacing every P_i, Q_j by sigma P_i, sigma Q_j preserves both
conditions), intersects the per-column null spaces incrementally, and
tests generic elements of any surviving solution space against the second
condition.  Three verdicts are possible:

* ``Separating``    -- the tuple space is exhausted without a witness;
* ``WitnessFound``  -- a concrete (P-tuple, Q-tuple, X) is returned,
  re-verified against both conditions at tolerance 1e-8;
* ``Inconclusive``  -- the tuple budget ran out first.

Enumeration order is lexicographic in the per-level permutation ranks
(each level is a base-n! digit; the linear index of a tuple is the value
of its digit string).  Subtrees whose partial solution space is already
trivial are skipped in bulk; their leaves still count as examined since
they are decided.  The incremental pruning uses a deliberately loose
rank tolerance so marginal directions stay alive; every surviving leaf is
re-verified against the full system at the strict tolerance before any
witness is accepted.  Long runs checkpoint their position to a JSON file
and can resume; partitioned runs split the top-level digits across
processes, and a found witness always reports the smallest leaf index
among the partitions, so the verdict does not depend on scheduling.

The search runs inside the translation-free subspace where every
coordinate vector x_i sums to zero.  This loses nothing: permutation
differences annihilate constant vectors, so splitting x_i into mean plus
centered part shows that X satisfies either condition exactly when its
centered part does, and a witness can always be taken centered.  Without
the reduction every tuple keeps the d-dimensional space of constant
solutions alive and no subtree can ever be pruned.
"""

from __future__ import annotations

import enum
import hashlib
import itertools
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import (
    UnsupportedFormError,
    as_matrix,
    default_enumeration_budget,
    json_dumps,
    make_rng,
)
from .metrics import orbit_distance

__all__ = [
    "SeparationStatus",
    "SeparationWitness",
    "SeparationVerdict",
    "InjectivityReport",
    "certify_separation",
    "min_injective_D_upper",
    "non_injective_D_threshold",
    "spot_check_injectivity",
    "KNOWN_SEPARATING_CASES",
    "KNOWN_NONSEPARATING_DIMS",
    "known_separating_matrix",
    "DEFAULT_TUPLE_BUDGET",
]

DEFAULT_TUPLE_BUDGET = 10**9

# Full S_n enumeration in the witness test; refuse rather than approximate
# beyond this.
_MAX_N = 6

# Loose relative rank cutoff for incremental pruning (keeps marginal
# directions alive; false survivors only cost time).
_PRUNE_TOL = 1e-8

# Strict relative cutoff for the full-system null space backing a witness.
_NULL_TOL = 1e-10

# Residual / nonzeroness tolerance for witness re-verification.
_WITNESS_TOL = 1e-8

_NULL_SAMPLES = 8

_CHECKPOINT_FORMAT = 1


class SeparationStatus(str, enum.Enum):
    SEPARATING = "Separating"
    WITNESS_FOUND = "WitnessFound"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class SeparationWitness:
    """Permutation tuples plus a cloud certifying failure of separation.

    ``X`` is d x n (row i holds the i-th coordinates of the n points),
    unit Frobenius norm.  Permutations are 0-based index arrays; P_tuple
    has d entries (the first is the identity in reduced runs) and Q_tuple
    has D - d.
    """

    P_tuple: list
    Q_tuple: list
    X: np.ndarray
    leaf_index: int


@dataclass
class SeparationVerdict:
    status: SeparationStatus
    witness: SeparationWitness | None
    tuples_examined: int
    budget: int
    total_tuples: int
    n: int
    d: int
    D: int
    seed: int
    reduced: bool
    next_index: int | None = None


@dataclass(frozen=True)
class InjectivityReport:
    """Collision counts from randomized injectivity spot checks."""

    kind: str
    n: int
    d: int
    D: int
    M: int | None
    trials: int
    collisions: int
    false_separations: int
    seed: int


# Reference identity-augmented matrices whose verdicts are certified by
# this module's own exhaustive search; kept as regression anchors.
KNOWN_SEPARATING_CASES: dict[tuple[int, int, int], tuple[tuple[float, ...], ...]] = {
    (3, 3, 6): (
        (1.0, 0.0, 0.0, 0.56, 0.66, 0.21),
        (0.0, 1.0, 0.0, 0.24, 0.58, 0.0),
        (0.0, 0.0, 1.0, 0.71, 0.53, 0.45),
    ),
    (3, 4, 8): (
        (1.0, 0.0, 0.0, 0.0, 0.32, 0.38, 0.49, 0.75),
        (0.0, 1.0, 0.0, 0.0, 0.95, 0.77, 0.45, 0.28),
        (0.0, 0.0, 1.0, 0.0, 0.03, 0.80, 0.65, 0.68),
        (0.0, 0.0, 0.0, 1.0, 0.44, 0.19, 0.71, 0.66),
    ),
    (4, 2, 4): (
        (1.0, 0.0, 0.83, 0.16),
        (0.0, 1.0, 0.95, 0.78),
    ),
    (5, 2, 5): (
        (1.0, 0.0, 0.814724, 0.126987, 0.632359),
        (0.0, 1.0, 0.905792, 0.913376, 0.097540),
    ),
}

# Dimensions at which random identity-augmented tails typically fail to
# separate orbits (a witness is expected for most seeds).
KNOWN_NONSEPARATING_DIMS: tuple[tuple[int, int, int], ...] = (
    (3, 2, 3),
    (3, 3, 5),
    (3, 4, 7),
    (5, 2, 5),
)


def known_separating_matrix(n: int, d: int, D: int) -> np.ndarray:
    try:
        rows = KNOWN_SEPARATING_CASES[(n, d, D)]
    except KeyError as exc:
        raise KeyError(f"no reference matrix for (n={n}, d={d}, D={D})") from exc
    return np.asarray(rows, dtype=float)


def min_injective_D_upper(n: int, d: int) -> int:
    """Direction count at which full-spark sorted embeddings must separate.

    n (d - 1) + 1; the trivial single-point case n = 1 needs just one
    direction.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n == 1:
        return 1
    if d < 2:
        raise ValueError(f"need d >= 2, got d = {d}")
    return n * (d - 1) + 1


def non_injective_D_threshold(n: int, d: int) -> int:
    """Largest D at which NO direction matrix can separate orbits.

    (d - 1) * floor(log2(n) + 1); n.bit_length() computes the floor term
    exactly.
    """
    if n < 2 or d < 2:
        raise ValueError(f"need n >= 2 and d >= 2, got n = {n}, d = {d}")
    return (d - 1) * n.bit_length()


# ---------------------------------------------------------------------------
# Exhaustive certification
# ---------------------------------------------------------------------------


def _perm_tables(n: int):
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.intp)
    mats = np.eye(n)[perms]  # mats[r] applies sigma_r: (P v)[t] = v[sigma_r[t]]
    return perms, mats


def _centered_basis(n: int, d: int) -> np.ndarray:
    """Orthonormal basis of the solutions with zero-sum coordinate vectors.

    Block diagonal over the d coordinates; each block spans the orthogonal
    complement of the all-ones vector in R^n.
    """
    centering = np.eye(n) - np.full((n, n), 1.0 / n)
    u, sv, _ = np.linalg.svd(centering)
    block = u[:, : n - 1] if n > 1 else np.zeros((1, 0))
    return np.kron(np.eye(d), block)  # (d*n, d*(n-1))


def _hash_coefficients(seed: int, index: int, rows: int, cols: int) -> np.ndarray:
    """Deterministic generic coefficients in (-1, 1), keyed by (seed, index).

    A vectorized splitmix-style mix; the draw is independent of visit
    order, so resumed or partitioned searches test identical elements.
    """
    base = (seed * 0xD1342543DE82EF95 + index * 0x9E3779B97F4A7C15 + 0x632BE59BD9B4E019) % 2**64
    x = np.uint64(base) + np.arange(1, rows * cols + 1, dtype=np.uint64) * np.uint64(
        0x9E3779B97F4A7C15
    )
    x ^= x >> np.uint64(30)
    x *= np.uint64(0xBF58476D1CE4E5B9)
    x ^= x >> np.uint64(27)
    x *= np.uint64(0x94D049BB133111EB)
    x ^= x >> np.uint64(31)
    u = (x >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))
    return (2.0 * u - 1.0).reshape(rows, cols)


class _Search:
    """State for one (possibly partial) enumeration of the tuple space."""

    def __init__(
        self,
        A: np.ndarray,
        n: int,
        budget: int,
        seed: int,
        reduced: bool,
        start: int,
        stop_digit_lo: int,
        stop_digit_hi: int,
        examined_base: int,
        checkpoint_path=None,
        checkpoint_every: int = 1_000_000,
    ):
        d, D = A.shape
        self.A = A
        self.n, self.d, self.D = n, d, D
        self.tail = A[:, d:]
        scales = np.linalg.norm(self.tail, axis=0)
        self.tail_scales = scales
        safe = np.where(scales > 0, scales, 1.0)
        self.tail_n = self.tail / safe
        self.perms, self.Pmats = _perm_tables(n)
        self.nfact = len(self.perms)
        self.n_p = d if not reduced else d - 1
        self.n_q = D - d
        self.L = self.n_p + self.n_q
        self.reduced = reduced
        self.spans = [self.nfact ** (self.L - 1 - lv) for lv in range(self.L)]
        self.total = self.nfact**self.L if self.L > 0 else 1
        # worker window, expressed in leaf indices
        top_span = self.spans[0] if self.L > 0 else 1
        self.window_lo = stop_digit_lo * top_span
        self.window_hi = stop_digit_hi * top_span if self.L > 0 else 1
        self.start = max(start, self.window_lo)
        self.budget = budget
        self.seed = seed
        self.digits = [0] * self.L
        self.C = _centered_basis(n, d)
        self.Vs: list[np.ndarray] | None = None
        if self.n_p == 0:
            self.Vs = self._build_Vs([0] * d if reduced else [])
        # precompute W_j[q] = hstack_i tail_n[i, j] * Pmats[q]
        self.Ws = [
            np.einsum("i,qts->qtis", self.tail_n[:, j], self.Pmats).reshape(
                self.nfact, n, d * n
            )
            for j in range(self.n_q)
        ]
        self.covered = 0  # leaves decided in this run/window
        self.examined_base = examined_base  # carried over from checkpoints
        self.witness: SeparationWitness | None = None
        self.stopped = False
        self.next_index: int | None = None
        self.checkpoint_path = checkpoint_path
        self.checkpoint_every = checkpoint_every
        self._since_checkpoint = 0

    # -- helpers ----------------------------------------------------------

    def _p_full(self) -> list[int]:
        if self.reduced:
            return [0] + self.digits[: self.n_p]
        return self.digits[: self.n_p]

    def _build_Vs(self, p_full: list[int]) -> list[np.ndarray]:
        d, n = self.d, self.n
        out = []
        for j in range(self.n_q):
            blocks = [self.tail_n[i, j] * self.Pmats[p_full[i]] for i in range(d)]
            out.append(np.concatenate(blocks, axis=1))  # (n, d*n)
        return out

    def _cover(self, leaves: int, boundary: int, allow_checkpoint: bool = True) -> None:
        self.covered += leaves
        self._since_checkpoint += leaves
        if (
            allow_checkpoint
            and self.checkpoint_path is not None
            and self._since_checkpoint >= self.checkpoint_every
        ):
            self._write_checkpoint(boundary)
            self._since_checkpoint = 0

    def _write_checkpoint(self, next_index: int) -> None:
        payload = {
            "format": _CHECKPOINT_FORMAT,
            "n": self.n,
            "d": self.d,
            "D": self.D,
            "reduced": self.reduced,
            "seed": self.seed,
            "matrix_sha256": _matrix_digest(self.A),
            "next_index": int(next_index),
            "tuples_examined": int(self.examined_base + self.covered),
        }
        tmp = str(self.checkpoint_path) + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(json_dumps(payload))
        os.replace(tmp, self.checkpoint_path)

    def _stop(self, next_index: int) -> None:
        # the checkpoint for a budget stop is written by the caller once
        # every counted leaf has actually been decided
        self.stopped = True
        self.next_index = next_index

    # -- search -----------------------------------------------------------

    def run(self) -> None:
        if self.L == 0:
            # no free tuples at all: a single leaf with the full centered space
            if self.start == 0 and self.window_hi > 0:
                self._leaf(0, self.C)
            return
        self._node(0, 0, self.C)

    def _node(self, level: int, base: int, K: np.ndarray) -> None:
        if self.witness is not None or self.stopped:
            return
        if level == self.L:
            self._leaf(base, K)
            return
        span = self.spans[level]
        is_p_level = level < self.n_p
        last = level + 1 == self.L and not is_p_level
        svals = vhs = None
        dim_in = K.shape[1]
        if not is_p_level:
            j = level - self.n_p
            T = self.Vs[j][None, :, :] - self.Ws[j]  # (nfact, n, d*n)
            R = T @ K  # (nfact, n, dim)
            _, svals, vhs = np.linalg.svd(R, full_matrices=True)
        # candidate leaves of the final level are verified in one batch
        pending: list[tuple[int, int, np.ndarray]] = []
        boundary = base
        for digit in range(self.nfact):
            lo = base + digit * span
            hi = lo + span
            if hi <= self.start or lo >= self.window_hi:
                continue
            if self.witness is not None or self.stopped:
                break
            if self.covered + self.examined_base >= self.budget:
                self._stop(max(lo, self.start))
                break
            self.digits[level] = digit
            if is_p_level:
                if level + 1 == self.n_p:
                    self.Vs = self._build_Vs(self._p_full())
                self._node(level + 1, lo, K)
                boundary = hi
                continue
            sv = svals[digit]
            top = float(sv[0]) if sv.size else 0.0
            # anchored at the O(1) block scale so a nearly zero constraint
            # counts as rank 0 instead of pruning its (unconstrained) subtree
            rank = int(np.count_nonzero(sv > _PRUNE_TOL * max(top, 1.0)))
            if rank >= dim_in:
                self._cover(hi - max(lo, self.start), hi, allow_checkpoint=not last)
                boundary = hi
                continue
            null = vhs[digit, rank:, :].T  # (dim, dim - rank), orthonormal
            if last:
                pending.append((digit, lo, K @ null))
                # counted now, decided by the batch below; checkpoints wait
                self._cover(1, hi, allow_checkpoint=False)
            else:
                self._node(level + 1, lo, K @ null)
            boundary = hi
        if pending and self.witness is None:
            self._batch_verify(level, pending)
        if (
            last
            and self.witness is None
            and not self.stopped
            and self.checkpoint_path is not None
            and self._since_checkpoint >= self.checkpoint_every
        ):
            self._write_checkpoint(boundary)
            self._since_checkpoint = 0

    def _leaf(self, index: int, K: np.ndarray) -> None:
        if index < self.start or index >= self.window_hi:
            return
        self._cover(1, index + 1)
        if K.shape[1] == 0:
            return
        candidate = self._verify_candidate(index, K)
        if candidate is not None:
            self.witness = candidate

    def _batch_verify(self, level: int, pending: list) -> None:
        """Decide all candidate leaves of one final-level node together.

        Samples are keyed by leaf index exactly as in the per-leaf path;
        the batch only amortizes the array work of the defeat test.  Each
        candidate's first sample is tested against every permutation;
        when it is defeated, the remaining samples are first checked
        against that same defeating permutation (generic solution spaces
        are defeated uniformly), and only mismatches fall back to the
        full sweep, so exactness is preserved.
        """
        d, n = self.d, self.n
        tol = _WITNESS_TOL
        p_full = self._p_full()
        perm_rows = self.perms[np.asarray(p_full)]  # (d, n)

        first = np.empty((len(pending), d * n))
        extra_blocks = []
        extra_owner = []
        for pos, (digit, lo, basis) in enumerate(pending):
            k = basis.shape[1]
            if k == 1:
                first[pos] = basis[:, 0]
            else:
                sams = _hash_coefficients(self.seed, lo, _NULL_SAMPLES, k) @ basis.T
                first[pos] = sams[0]
                extra_blocks.append(sams[1:])
                extra_owner.extend([pos] * (_NULL_SAMPLES - 1))

        norms = np.linalg.norm(first, axis=1)
        usable_first = norms > 1e-12
        XF = (first / np.maximum(norms, 1e-300)[:, None]).reshape(-1, d, n)
        bases_f = np.take_along_axis(XF, perm_rows[None, :, :], axis=2)
        moved_f = XF[:, :, self.perms]  # (C, d, n!, n)
        match_f = (np.abs(moved_f - bases_f[:, :, None, :]).max(axis=3) <= tol).all(axis=1)
        defeated_f = match_f.any(axis=1) | ~usable_first
        star = np.argmax(match_f, axis=1)  # first defeating permutation

        extra_alive: dict[int, list[np.ndarray]] = {}
        if extra_blocks:
            owner = np.asarray(extra_owner)
            E = np.concatenate(extra_blocks, axis=0)
            norms_e = np.linalg.norm(E, axis=1)
            usable_e = norms_e > 1e-12
            XE = (E / np.maximum(norms_e, 1e-300)[:, None]).reshape(-1, d, n)
            # extras only matter when the owner's first sample was defeated
            relevant = defeated_f[owner] & usable_e
            bases_e = np.take_along_axis(XE, perm_rows[None, :, :], axis=2)
            star_idx = self.perms[star[owner]]  # (E, n)
            moved_star = np.take_along_axis(XE, star_idx[:, None, :], axis=2)
            starred = np.abs(moved_star - bases_e).max(axis=(1, 2)) <= tol
            defeated_e = starred | ~usable_e
            need_full = relevant & ~starred
            if np.any(need_full):
                XQ = XE[need_full]
                moved_q = XQ[:, :, self.perms]
                bases_q = bases_e[need_full]
                full_hit = (
                    (np.abs(moved_q - bases_q[:, :, None, :]).max(axis=3) <= tol)
                    .all(axis=1)
                    .any(axis=1)
                )
                defeated_e[need_full] = full_hit
            for row in np.flatnonzero(relevant & ~defeated_e):
                extra_alive.setdefault(int(owner[row]), []).append(XE[row].reshape(-1))

        for pos, (digit, lo, basis) in enumerate(pending):
            if self.witness is not None:
                return
            ordered = []
            if usable_first[pos] and not defeated_f[pos]:
                ordered.append(XF[pos].reshape(-1))
            ordered.extend(extra_alive.get(pos, ()))
            if not ordered:
                continue
            witness = self._attempt_witness(level, digit, lo, basis, ordered)
            if witness is not None:
                self.witness = witness
                return

    def _attempt_witness(
        self, level: int, digit: int, lo: int, basis: np.ndarray, ordered_samples
    ) -> SeparationWitness | None:
        """Final strict checks for samples that already pass the defeat test."""
        d, n = self.d, self.n
        self.digits[level] = digit
        S_norm = self._full_system(normalized=True)
        if S_norm.shape[0] and float(np.linalg.norm(S_norm @ basis)) > _NULL_TOL:
            # some basis direction is not strictly null; redo exactly
            return self._verify_candidate(lo, basis)
        S_orig = self._full_system(normalized=False)
        a_norm = float(np.linalg.norm(self.A))
        p_full = self._p_full()
        q_digits = self.digits[self.n_p :]
        for x in ordered_samples:
            if S_orig.shape[0]:
                residual = float(np.linalg.norm(S_orig @ x))
                if residual > _WITNESS_TOL * a_norm:
                    continue
            return SeparationWitness(
                P_tuple=[self.perms[p].copy() for p in p_full],
                Q_tuple=[self.perms[q].copy() for q in q_digits],
                X=x.reshape(d, n).copy(),
                leaf_index=lo,
            )
        return None

    # -- leaf verification --------------------------------------------------

    def _full_system(self, normalized: bool) -> np.ndarray:
        d, n = self.d, self.n
        q_digits = self.digits[self.n_p :]
        if self.n_q == 0:
            return np.zeros((0, d * n))
        rows = []
        for j, q in enumerate(q_digits):
            block = self.Vs[j] - self.Ws[j][q]
            if not normalized:
                block = block * self.tail_scales[j]
            rows.append(block)
        return np.concatenate(rows, axis=0)

    def _verify_candidate(self, index: int, K: np.ndarray) -> SeparationWitness | None:
        d, n = self.d, self.n
        dim = K.shape[1]
        S = self._full_system(normalized=True)
        if S.shape[0] == 0:
            null_basis = K
        else:
            # strict re-verification restricted to the surviving subspace;
            # any true solution survived the looser incremental cuts, so
            # null(S) = K @ null(S K)
            _, sv, vh = np.linalg.svd(S @ K, full_matrices=True)
            top = float(sv[0]) if sv.size else 0.0
            rank = int(np.count_nonzero(sv > _NULL_TOL * max(top, 1.0)))
            if rank >= dim:
                return None
            null_basis = K @ vh[rank:].T  # (d*n, k), orthonormal columns
        k = null_basis.shape[1]
        if k == 1:
            # a line has one generic element up to scaling
            samples = null_basis.T
        else:
            samples = _hash_coefficients(self.seed, index, _NULL_SAMPLES, k) @ null_basis.T
        norms = np.linalg.norm(samples, axis=1)
        keep = norms > 1e-12
        if not np.any(keep):
            return None
        Xs = (samples[keep] / norms[keep, None]).reshape(-1, d, n)

        p_full = self._p_full()
        perm_rows = self.perms[np.asarray(p_full)]  # (d, n): row i is P_{p_i}
        bases = np.take_along_axis(Xs, perm_rows[None, :, :], axis=2)  # (s, d, n)
        moved = Xs[:, :, self.perms]  # (s, d, n!, n): coordinate i under every sigma
        diffs = np.abs(moved - bases[:, :, None, :]).max(axis=3)  # (s, d, n!)
        defeated = (diffs <= _WITNESS_TOL).all(axis=1).any(axis=1)  # (s,)
        if bool(defeated.all()):
            return None

        S_orig = self._full_system(normalized=False)
        a_norm = float(np.linalg.norm(self.A))
        q_digits = self.digits[self.n_p :]
        for s_idx in np.flatnonzero(~defeated):
            X = Xs[s_idx]
            if S_orig.shape[0]:
                residual = float(np.linalg.norm(S_orig @ X.reshape(d * n)))
                if residual > _WITNESS_TOL * a_norm:
                    continue
            return SeparationWitness(
                P_tuple=[self.perms[p].copy() for p in p_full],
                Q_tuple=[self.perms[q].copy() for q in q_digits],
                X=X.copy(),
                leaf_index=index,
            )
        return None


def _matrix_digest(A: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(A).tobytes()).hexdigest()


def _load_checkpoint(path, A: np.ndarray, n: int, reduced: bool, seed: int):
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if data.get("format") != _CHECKPOINT_FORMAT:
        raise ValueError(f"unsupported checkpoint format in {path}")
    expectation = {
        "n": n,
        "d": A.shape[0],
        "D": A.shape[1],
        "reduced": reduced,
        "seed": seed,
        "matrix_sha256": _matrix_digest(A),
    }
    for key, want in expectation.items():
        if data.get(key) != want:
            raise ValueError(
                f"checkpoint {path} does not match this run ({key}: {data.get(key)!r} != {want!r})"
            )
    return int(data["next_index"]), int(data["tuples_examined"])


def _certify_window(args):
    (A, n, budget, seed, reduced, digit_lo, digit_hi, start, examined_base) = args
    search = _Search(
        A,
        n,
        budget,
        seed,
        reduced,
        start=start,
        stop_digit_lo=digit_lo,
        stop_digit_hi=digit_hi,
        examined_base=examined_base,
    )
    search.run()
    witness = None
    if search.witness is not None:
        w = search.witness
        witness = (
            [p.tolist() for p in w.P_tuple],
            [q.tolist() for q in w.Q_tuple],
            w.X.tolist(),
            w.leaf_index,
        )
    return search.covered, witness, search.stopped, search.next_index


def _check_identity_augmented(A: np.ndarray) -> None:
    d, D = A.shape
    if D < d:
        raise UnsupportedFormError(f"matrix must be d x D with D >= d, got {A.shape}")
    if not np.array_equal(A[:, :d], np.eye(d)):
        raise UnsupportedFormError(
            "certification requires the identity-augmented normal form (I_d | tail)"
        )


def certify_separation(
    A,
    n: int,
    budget: int | None = None,
    seed: int = 0,
    *,
    threads: int = 1,
    checkpoint_path=None,
    checkpoint_every: int = 1_000_000,
    reduce_coset: bool = True,
) -> SeparationVerdict:
    """Exhaustively decide orbit separation of the sorted embedding of A.

    ``A`` must be identity-augmented and ``n`` at most 6 (the witness test
    enumerates all of S_n).  ``budget`` caps the number of tuples decided
    (default 1e9, overridable via the PERMORB_BUDGET environment
    variable).  ``threads`` > 1 splits the top-level digits across
    processes; checkpointing is only available single-threaded.
    """
    A = as_matrix(A, "A")
    _check_identity_augmented(A)
    if n < 1 or n > _MAX_N:
        raise ValueError(f"n must lie in 1..{_MAX_N}, got {n}")
    if budget is None:
        budget = default_enumeration_budget(DEFAULT_TUPLE_BUDGET)
    if budget < 1:
        raise ValueError(f"budget must be >= 1, got {budget}")
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    if threads > 1 and checkpoint_path is not None:
        raise ValueError("checkpointing is only supported single-threaded")

    d, D = A.shape
    nfact = math.factorial(n)
    n_levels = (d - 1 if reduce_coset else d) + (D - d)
    total = nfact**n_levels if n_levels > 0 else 1

    start = 0
    examined_base = 0
    if checkpoint_path is not None and os.path.exists(checkpoint_path):
        start, examined_base = _load_checkpoint(checkpoint_path, A, n, reduce_coset, seed)

    if threads == 1 or n_levels == 0:
        search = _Search(
            A,
            n,
            budget,
            seed,
            reduce_coset,
            start=start,
            stop_digit_lo=0,
            stop_digit_hi=nfact if n_levels > 0 else 1,
            examined_base=examined_base,
            checkpoint_path=checkpoint_path,
            checkpoint_every=checkpoint_every,
        )
        search.run()
        examined = examined_base + search.covered
        witness = search.witness
        stopped = search.stopped
        next_index = search.next_index
        if checkpoint_path is not None and stopped and next_index is not None:
            search._write_checkpoint(next_index)
    else:
        boundaries = np.linspace(0, nfact, min(threads, nfact) + 1).astype(int)
        share = math.ceil(budget / (len(boundaries) - 1))
        jobs = [
            (A, n, share, seed, reduce_coset, int(lo), int(hi), start, 0)
            for lo, hi in zip(boundaries[:-1], boundaries[1:])
            if hi > lo
        ]
        with ProcessPoolExecutor(max_workers=len(jobs)) as pool:
            results = list(pool.map(_certify_window, jobs))
        examined = examined_base + sum(r[0] for r in results)
        stopped = any(r[2] for r in results)
        next_candidates = [r[3] for r in results if r[3] is not None]
        next_index = min(next_candidates) if next_candidates else None
        found = [r[1] for r in results if r[1] is not None]
        witness = None
        if found:
            p_t, q_t, x, idx = min(found, key=lambda w: w[3])
            witness = SeparationWitness(
                P_tuple=[np.asarray(p, dtype=np.intp) for p in p_t],
                Q_tuple=[np.asarray(q, dtype=np.intp) for q in q_t],
                X=np.asarray(x, dtype=float),
                leaf_index=idx,
            )

    if witness is not None:
        status = SeparationStatus.WITNESS_FOUND
    elif stopped:
        status = SeparationStatus.INCONCLUSIVE
    else:
        status = SeparationStatus.SEPARATING
        next_index = None
    return SeparationVerdict(
        status=status,
        witness=witness,
        tuples_examined=int(examined),
        budget=int(budget),
        total_tuples=int(total),
        n=n,
        d=d,
        D=D,
        seed=int(seed),
        reduced=reduce_coset,
        next_index=next_index,
    )


# ---------------------------------------------------------------------------
# Randomized injectivity spot checks
# ---------------------------------------------------------------------------


def spot_check_injectivity(
    kind: str,
    n: int,
    d: int,
    D: int,
    *,
    M: int | None = None,
    trials: int = 1000,
    seed: int = 0,
    extra_pairs=None,
) -> InjectivityReport:
    """Randomized search for collisions of an embedding on distinct orbits.

    Draws the embedding parameters (directions plus pooling matrix or
    sketch, per ``kind`` in {"sorted", "pooled", "sketched"}) from the
    seeded stream, then tests ``trials`` cloud pairs with orbit distance
    at least 0.1: a pair whose embedding difference norm is <= 1e-8
    counts as a collision.  Every trial also checks a same-orbit pair,
    whose embeddings must agree to 1e-9 relative (a failure counts as a
    false separation; invariance makes this impossible).  ``extra_pairs``
    are audited with the distinct-orbit rule, so a known indistinguishable
    pair shows up as exactly one collision.
    """
    from .embeddings import pooled_embedding, sketched_embedding, sorted_embedding

    if kind not in ("sorted", "pooled", "sketched"):
        raise ValueError(f"unknown kind {kind!r}")
    if n < 2 or d < 1 or D < 1:
        raise ValueError("need n >= 2 and positive d, D")
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if kind == "pooled" and D < (2 * n - 1) * d:
        raise ValueError(
            f"pooled spot check expects D >= (2n-1)d = {(2 * n - 1) * d}, got {D}"
        )
    rng = make_rng(seed)
    A = rng.standard_normal((d, D))
    if kind == "pooled":
        B = rng.standard_normal((n, D))
        embed = lambda X: pooled_embedding(A, B, X)  # noqa: E731
    elif kind == "sketched":
        if M is None:
            raise ValueError("sketched spot check needs the sketch row count M")
        L = rng.standard_normal((M, n * D)) / math.sqrt(M)
        embed = lambda X: sketched_embedding(A, L, X)  # noqa: E731
    else:
        embed = lambda X: sorted_embedding(A, X).ravel(order="F")  # noqa: E731

    collisions = 0
    false_separations = 0
    for _ in range(trials):
        X = rng.standard_normal((n, d))
        Y = rng.standard_normal((n, d))
        attempts = 0
        while orbit_distance(X, Y).distance < 0.1:
            Y = rng.standard_normal((n, d))
            attempts += 1
            if attempts > 100:
                raise RuntimeError("could not sample a distant pair")
        ex = embed(X)
        if float(np.linalg.norm(ex - embed(Y))) <= 1e-8:
            collisions += 1
        same = X[rng.permutation(n)]
        scale = max(1.0, float(np.linalg.norm(ex)))
        if float(np.linalg.norm(ex - embed(same))) > 1e-9 * scale:
            false_separations += 1
    for X, Y in extra_pairs or ():
        if float(np.linalg.norm(embed(X) - embed(Y))) <= 1e-8:
            collisions += 1
    return InjectivityReport(
        kind=kind,
        n=n,
        d=d,
        D=D,
        M=M,
        trials=trials,
        collisions=collisions,
        false_separations=false_separations,
        seed=int(seed),
    )
