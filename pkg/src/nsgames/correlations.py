"""Finite no-signalling correlations: validation, class builders, membership.

A correlation is the tensor p(a,b|x,y) over four finite alphabets.  Builders
produce members of the local / quantum-spatial / quantum-commuting classes
from their defining data; ``is_local`` decides membership in the local
polytope exactly via a linear program over the deterministic vertices.

Index convention (used consistently across games and the CLI): a pair (i, j)
drawn from alphabets of sizes (n1, n2) is encoded row-major as i * n2 + j.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import FiniteChannel, channels_commute
from .errors import ParseError, PreconditionError, TooLargeError, ValidationError

SUM_TOL = 1e-9
CLIP_TOL = 1e-12
IMAG_TOL = 1e-10
VERTEX_CAP = 10 ** 7


@dataclass(frozen=True, eq=False, repr=False)
class Correlation:
    """Conditional probability tensor p(a,b|x,y) with shape (nX, nY, nA, nB).

    Entries below -1e-12 are rejected; round-off negatives above that are
    clipped to zero and each (x,y) slice renormalized.  Every slice must sum
    to one within 1e-9.
    """

    p: np.ndarray

    def __init__(self, p):
        arr = np.array(p, dtype=float)
        if arr.ndim != 4:
            raise ValidationError("rank-4 tensor", detail=f"shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("finite entries")
        lowest = float(arr.min())
        if lowest < -CLIP_TOL:
            raise ValidationError("probabilities nonnegative", residual=lowest)
        if lowest < 0.0:
            arr = np.clip(arr, 0.0, None)
            arr /= arr.sum(axis=(2, 3), keepdims=True)
        sums = arr.sum(axis=(2, 3))
        defect = float(np.max(np.abs(sums - 1.0)))
        if defect > SUM_TOL:
            raise ValidationError("per-(x,y) normalization", residual=defect)
        arr.setflags(write=False)
        object.__setattr__(self, "p", arr)

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.p.shape

    @property
    def nX(self) -> int:
        return self.p.shape[0]

    @property
    def nY(self) -> int:
        return self.p.shape[1]

    @property
    def nA(self) -> int:
        return self.p.shape[2]

    @property
    def nB(self) -> int:
        return self.p.shape[3]

    def __repr__(self) -> str:
        return f"Correlation(nX={self.nX}, nY={self.nY}, nA={self.nA}, nB={self.nB})"


@dataclass(frozen=True)
class NsCertificate:
    """Worst no-signalling defects with the indices witnessing them."""

    max_alice: float
    max_bob: float
    witness_alice: tuple[int, int, int, int] | None  # (x, a, y, y')
    witness_bob: tuple[int, int, int, int] | None    # (y, b, x, x')

    @property
    def worst(self) -> float:
        return max(self.max_alice, self.max_bob)


def is_no_signalling(corr: Correlation, tol: float = SUM_TOL) -> tuple[bool, NsCertificate]:
    """Check the marginal equalities; returns (verdict, certificate).

    The Alice defect is max over (x, a, y, y') of the difference between the
    y- and y'-marginals of a, and symmetrically for Bob.
    """
    marg_a = corr.p.sum(axis=3)              # (nX, nY, nA)
    marg_b = corr.p.sum(axis=2)              # (nX, nY, nB)

    def _defect(marg: np.ndarray) -> tuple[float, tuple[int, int, int, int] | None]:
        # marg indexed (context, other, outcome): max-min over `other`.
        hi, lo = marg.max(axis=1), marg.min(axis=1)
        gaps = hi - lo
        worst = float(gaps.max(initial=0.0))
        if worst <= 0.0:
            return 0.0, None
        ctx, out = np.unravel_index(int(np.argmax(gaps)), gaps.shape)
        hi_at = int(np.argmax(marg[ctx, :, out]))
        lo_at = int(np.argmin(marg[ctx, :, out]))
        return worst, (int(ctx), int(out), hi_at, lo_at)

    alice, wa = _defect(marg_a)
    bob, wb = _defect(np.swapaxes(marg_b, 0, 1))
    cert = NsCertificate(alice, bob, wa, wb)
    return cert.worst <= tol, cert


def marginal_A(corr: Correlation, tol: float = 1e-7) -> np.ndarray:
    """Alice's marginal q(a|x), well defined by no-signalling (checked)."""
    ok, cert = is_no_signalling(corr, tol)
    if not ok:
        raise PreconditionError(
            f"correlation is signalling (defect {cert.worst:.3e})", witness=cert)
    return corr.p[:, 0, :, :].sum(axis=2)


def marginal_B(corr: Correlation, tol: float = 1e-7) -> np.ndarray:
    """Bob's marginal r(b|y)."""
    ok, cert = is_no_signalling(corr, tol)
    if not ok:
        raise PreconditionError(
            f"correlation is signalling (defect {cert.worst:.3e})", witness=cert)
    return corr.p[0, :, :, :].sum(axis=1)


def _check_stochastic(table: np.ndarray, name: str, tol: float = SUM_TOL) -> np.ndarray:
    table = np.asarray(table, dtype=float)
    if table.ndim != 2:
        raise ValidationError("stochastic table", detail=f"{name} must be 2-d")
    if float(table.min()) < -CLIP_TOL:
        raise ValidationError(f"{name} nonnegative", residual=float(table.min()))
    defect = float(np.max(np.abs(table.sum(axis=1) - 1.0)))
    if defect > tol:
        raise ValidationError(f"{name} rows sum to 1", residual=defect)
    return np.clip(table, 0.0, None)


def from_local(weights, alice_channels, bob_channels) -> Correlation:
    """Convex mixture of product channels: p = sum_i w_i q_i(a|x) r_i(b|y).

    The result is no-signalling essentially exactly (checked at 1e-12).
    """
    weights = np.asarray(weights, dtype=float)
    if weights.ndim != 1 or weights.size == 0:
        raise ValidationError("weights are a nonempty vector")
    if float(weights.min()) < 0.0:
        raise ValidationError("weights nonnegative", residual=float(weights.min()))
    total = float(weights.sum())
    if abs(total - 1.0) > 1e-12:
        raise ValidationError("weights sum to 1", residual=abs(total - 1.0))
    if len(alice_channels) != weights.size or len(bob_channels) != weights.size:
        raise ValidationError("one channel pair per weight")
    qs = [_check_stochastic(q, "alice channel") for q in alice_channels]
    rs = [_check_stochastic(r, "bob channel") for r in bob_channels]
    p = sum(w * np.einsum("xa,yb->xyab", q, r)
            for w, q, r in zip(weights, qs, rs))
    corr = Correlation(p)
    ok, cert = is_no_signalling(corr, tol=1e-12)
    if not ok:  # pragma: no cover - mixtures of products cannot signal
        raise ValidationError("no-signalling", residual=cert.worst)
    return corr


def qs_probabilities(alice_effects: np.ndarray, bob_effects: np.ndarray,
                     psi: np.ndarray) -> np.ndarray:
    """Raw kernel: p(x,y,a,b) = <psi| E(a|x) (x) F(b|y) |psi> as a real tensor.

    ``alice_effects``/``bob_effects`` are (inputs, outcomes, d, d) stacks; the
    imaginary residue must stay below 1e-10 or Hermiticity broke upstream.
    """
    d_a = alice_effects.shape[2]
    d_b = bob_effects.shape[2]
    mat = np.asarray(psi, dtype=complex).reshape(d_a, d_b)
    # <psi| M (x) N |psi> = sum_{jl} N_jl (Psi* M Psi)_jl  with Psi* = conj-transpose
    reduced = np.einsum("ij,xaik,kl->xajl", mat.conj(), alice_effects, mat)
    p = np.einsum("xajl,ybjl->xyab", reduced, bob_effects)
    residue = float(np.max(np.abs(p.imag), initial=0.0))
    if residue > IMAG_TOL:
        raise ValidationError("real probabilities", residual=residue)
    return p.real


def from_qs(e: FiniteChannel, f: FiniteChannel, psi) -> Correlation:
    """Quantum spatial correlation p(a,b|x,y) = <psi|E(a|x) (x) F(b|y)|psi>."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    norm = float(np.linalg.norm(psi))
    if abs(norm - 1.0) > 1e-10:
        raise PreconditionError(f"state is not a unit vector (norm {norm!r})")
    if psi.size != e.dim * f.dim:
        raise ValidationError("state lives on the tensor product",
                              detail=f"{psi.size} != {e.dim}*{f.dim}")
    p = qs_probabilities(e.effects_array(), f.effects_array(), psi)
    corr = Correlation(p)
    ok, cert = is_no_signalling(corr, SUM_TOL)
    if not ok:  # pragma: no cover - impossible for valid channels
        raise ValidationError("no-signalling", residual=cert.worst)
    return corr


def from_qc(e: FiniteChannel, f: FiniteChannel, xi) -> Correlation:
    """Quantum commuting correlation p(a,b|x,y) = <xi| E(a|x) F(b|y) xi>.

    Requires channels with commuting ranges on one space.
    """
    report = channels_commute(e, f)
    if not report.commutes:
        raise PreconditionError(
            f"channels do not commute (residual {report.residual:.3e} at "
            f"(x,a,y,b)={report.witness})", witness=report.witness)
    xi = np.asarray(xi, dtype=complex).reshape(-1)
    norm = float(np.linalg.norm(xi))
    if abs(norm - 1.0) > 1e-10:
        raise PreconditionError(f"state is not a unit vector (norm {norm!r})")
    if xi.size != e.dim:
        raise ValidationError("state lives on the channel space",
                              detail=f"{xi.size} != {e.dim}")
    left = np.einsum("xaij,j->xai", e.effects_array(), xi)
    right = np.einsum("ybij,j->ybi", f.effects_array(), xi)
    p = np.einsum("xai,ybi->xyab", left.conj(), right)
    residue = float(np.max(np.abs(p.imag), initial=0.0))
    if residue > IMAG_TOL:
        raise ValidationError("real probabilities", residual=residue)
    corr = Correlation(p.real)
    ok, cert = is_no_signalling(corr, SUM_TOL)
    if not ok:  # pragma: no cover - impossible once commuting holds
        raise ValidationError("no-signalling", residual=cert.worst)
    return corr


@dataclass(frozen=True)
class LocalityReport:
    """Outcome of the local-polytope membership LP.

    ``gap`` is the minimal achievable max-entry deviation between p and a
    convex combination of deterministic vertices; ``weights`` lists the
    decomposition as (f, g, weight) triples when membership holds.
    """

    local: bool
    gap: float
    weights: tuple[tuple[tuple[int, ...], tuple[int, ...], float], ...]


def deterministic_correlation(f, g, nA: int, nB: int) -> Correlation:
    """p(a,b|x,y) = [a = f(x)][b = g(y)] for deterministic strategies f, g."""
    f = np.asarray(f, dtype=int)
    g = np.asarray(g, dtype=int)
    p = np.zeros((f.size, g.size, nA, nB))
    p[np.arange(f.size)[:, None], np.arange(g.size)[None, :], f[:, None], g[None, :]] = 1.0
    return Correlation(p)


def _strategy_tables(n_inputs: int, n_outputs: int) -> np.ndarray:
    """All deterministic maps as rows of digits, first input most significant."""
    count = n_outputs ** n_inputs
    idx = np.arange(count)
    digits = np.empty((count, n_inputs), dtype=np.int64)
    for pos in range(n_inputs):
        power = n_outputs ** (n_inputs - 1 - pos)
        digits[:, pos] = (idx // power) % n_outputs
    return digits


# Entry budget (matrix cells) below which the membership LP is solved with
# every vertex column materialized; larger instances go through lazy column
# generation.  The hard vertex cap stays at 10^7 either way.
DIRECT_ENTRY_BUDGET = 40_000_000


def _membership_lp(d_mat: np.ndarray, target: np.ndarray):
    """min t  s.t. |D w - p|_max <= t, w in the simplex; solved with HiGHS.

    Returns (t*, w*, dual_ub, dual_eq); the duals price vertex columns during
    column generation.
    """
    from scipy.optimize import linprog

    entries, width = d_mat.shape
    c = np.zeros(width + 1)
    c[-1] = 1.0
    a_ub = np.zeros((2 * entries, width + 1))
    a_ub[:entries, :-1] = d_mat
    a_ub[:entries, -1] = -1.0
    a_ub[entries:, :-1] = -d_mat
    a_ub[entries:, -1] = -1.0
    b_ub = np.concatenate([target, -target])
    a_eq = np.zeros((1, width + 1))
    a_eq[0, :-1] = 1.0
    result = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0],
                     bounds=(0, None), method="highs")
    if not result.success:  # pragma: no cover - LP is always feasible
        raise PreconditionError(f"membership LP failed: {result.message}")
    return (float(result.fun), result.x[:-1],
            np.asarray(result.ineqlin.marginals),
            float(np.asarray(result.eqlin.marginals)[0]))


def is_local(corr: Correlation, tol: float = 1e-8) -> tuple[bool, LocalityReport]:
    """Exact local-polytope membership: an LP over the deterministic vertices.

    The LP minimizes the largest entrywise deviation t between p and a convex
    combination of the nA^nX * nB^nY deterministic vertices (cap 10^7);
    membership holds when the optimum is at most ``tol``, and the optimum is
    reported as the separation gap otherwise.  Instances whose vertex matrix
    exceeds the direct budget are solved by lazy column generation: pricing
    scans all of Alice's maps at once (Bob's best reply is closed-form per
    question), and termination is certified when no vertex improves the
    master, so the result is the optimum of the same full LP.
    """
    nX, nY, nA, nB = corr.shape
    n_f = nA ** nX
    n_g = nB ** nY
    if n_f * n_g > VERTEX_CAP:
        raise TooLargeError(
            f"deterministic vertex count {n_f * n_g} exceeds cap {VERTEX_CAP}")
    entries = nX * nY * nA * nB
    target = corr.p.reshape(entries)

    if 2 * entries * (n_f * n_g) <= DIRECT_ENTRY_BUDGET:
        fs = _strategy_tables(nX, nA)
        gs = _strategy_tables(nY, nB)
        one_hot_f = np.zeros((n_f, nX, nA))
        one_hot_f[np.arange(n_f)[:, None], np.arange(nX)[None, :], fs] = 1.0
        one_hot_g = np.zeros((n_g, nY, nB))
        one_hot_g[np.arange(n_g)[:, None], np.arange(nY)[None, :], gs] = 1.0
        d_mat = np.einsum("fxa,gyb->xyabfg", one_hot_f, one_hot_g).reshape(entries, -1)
        gap, lam, _, _ = _membership_lp(d_mat, target)
        gap = max(gap, 0.0)
        if gap > tol:
            return False, LocalityReport(False, gap, ())
        weights = []
        for v in np.flatnonzero(lam > 1e-12):
            fi, gi = divmod(int(v), n_g)
            weights.append((tuple(int(d) for d in fs[fi]),
                            tuple(int(d) for d in gs[gi]), float(lam[v])))
        return True, LocalityReport(True, gap, tuple(weights))
    return _is_local_generated(corr, target, tol)


def _is_local_generated(corr: Correlation, target: np.ndarray,
                        tol: float) -> tuple[bool, LocalityReport]:
    """Column generation for the membership LP at large vertex counts."""
    from .strategies import top_strategies

    nX, nY, nA, nB = corr.shape
    entries = target.size

    def price(phi: np.ndarray, count: int):
        return top_strategies(phi.reshape(corr.shape).transpose(0, 2, 1, 3), count)

    working: list[tuple[tuple[int, ...], tuple[int, ...]]] = []
    columns: list[np.ndarray] = []
    seen: set = set()

    def add_vertices(ranked, threshold: float) -> int:
        added = 0
        for score, f, g in ranked:
            if score <= threshold + 1e-9 or (f, g) in seen:
                continue
            seen.add((f, g))
            working.append((f, g))
            columns.append(deterministic_correlation(f, g, nA, nB).p.reshape(entries))
            added += 1
        return added

    batch = min(512, nA ** nX)
    add_vertices(price(target, batch), -np.inf)
    for _ in range(2000):
        gap, lam, dual_ub, dual_eq = _membership_lp(np.column_stack(columns), target)
        # Reduced cost of a vertex column v (minimization, scipy marginals):
        #   0 - (m_ub . [D_v; -D_v] + m_eq) < 0  <=>  phi . D_v > -m_eq
        # with phi = m_plus - m_minus; those columns improve the master.
        phi = dual_ub[:entries] - dual_ub[entries:]
        if add_vertices(price(phi, batch), -dual_eq) == 0:
            break
    else:  # pragma: no cover - column generation failed to settle
        raise PreconditionError("local membership did not converge")
    gap = max(float(gap), 0.0)
    if gap > tol:
        return False, LocalityReport(False, gap, ())
    weights = tuple((working[v][0], working[v][1], float(lam[v]))
                    for v in np.flatnonzero(lam > 1e-12))
    return True, LocalityReport(True, gap, weights)


def product_correlation(p1: Correlation, p2: Correlation) -> Correlation:
    """Tensor of two correlations on row-major paired alphabets."""
    p = np.einsum("xyab,XYAB->xXyYaAbB", p1.p, p2.p)
    return Correlation(p.reshape(p1.nX * p2.nX, p1.nY * p2.nY,
                                 p1.nA * p2.nA, p1.nB * p2.nB))


def section(corr: Correlation, first_sizes: tuple[int, int, int, int],
            x_prime: int, y_prime: int) -> Correlation:
    """Section of a product-structured correlation at fixed (x', y').

    ``first_sizes`` gives (nX1, nY1, nA1, nB1); the complementary factor sizes
    are inferred and must divide the alphabets exactly.  The section fixes the
    second input factors and sums out the second output factors.
    """
    nX1, nY1, nA1, nB1 = first_sizes
    sizes = corr.shape
    for total, part, name in zip(sizes, first_sizes, "XYAB"):
        if part < 1 or total % part:
            raise ValidationError("factorization matches sizes",
                                  detail=f"n{name}={total} not divisible by {part}")
    nX2, nY2 = sizes[0] // nX1, sizes[1] // nY1
    nA2, nB2 = sizes[2] // nA1, sizes[3] // nB1
    if not (0 <= x_prime < nX2 and 0 <= y_prime < nY2):
        raise ValidationError("section index in range",
                              detail=f"(x',y')=({x_prime},{y_prime})")
    cube = corr.p.reshape(nX1, nX2, nY1, nY2, nA1, nA2, nB1, nB2)
    return Correlation(cube[:, x_prime, :, y_prime].sum(axis=(3, 5)))


# ---------------------------------------------------------------------------
# Text dump: header "corr nX nY nA nB"; one line per (x, y) in row-major
# order carrying the nA*nB probabilities ordered a*nB + b, printed with 17
# significant digits.
# ---------------------------------------------------------------------------


def dump_correlation(corr: Correlation) -> str:
    lines = [f"corr {corr.nX} {corr.nY} {corr.nA} {corr.nB}"]
    for x in range(corr.nX):
        for y in range(corr.nY):
            lines.append(" ".join(f"{v:.17g}" for v in corr.p[x, y].reshape(-1)))
    return "\n".join(lines) + "\n"


def load_correlation(text: str) -> Correlation:
    rows = []
    header = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if header is None:
            tokens = line.split()
            if len(tokens) != 5 or tokens[0] != "corr":
                raise ParseError("expected header 'corr nX nY nA nB'", line=lineno)
            try:
                header = tuple(int(t) for t in tokens[1:])
            except ValueError as exc:
                raise ParseError("bad alphabet size", line=lineno) from exc
            if any(n < 1 for n in header):
                raise ParseError("alphabet sizes must be positive", line=lineno)
            continue
        try:
            values = [float(t) for t in line.split()]
        except ValueError as exc:
            raise ParseError("bad probability entry", line=lineno) from exc
        if len(values) != header[2] * header[3]:
            raise ParseError(
                f"expected {header[2] * header[3]} probabilities, got {len(values)}",
                line=lineno)
        rows.append(values)
    if header is None:
        raise ParseError("empty correlation file", line=1)
    nX, nY, nA, nB = header
    if len(rows) != nX * nY:
        raise ParseError(f"expected {nX * nY} probability lines, got {len(rows)}",
                         line=len(text.splitlines()))
    p = np.array(rows, dtype=float).reshape(nX, nY, nA, nB)
    return Correlation(p)
