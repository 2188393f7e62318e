"""Finite games, cylinder games, values, products, iterates, and memory games.

A finite game is a rule predicate over (x, y, a, b) plus a question
distribution.  A cylinder game is a window-w predicate over the corresponding
bi-infinite sequence spaces with the product question measure; its n-th
iterate intersects n backward-shifted copies of the winning set and is again
a finite game, over tuple alphabets of width w + n - 1.  Tuple alphabets are
always encoded row-major (first coordinate most significant), matching the
correlation module.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import optimize
from .correlations import Correlation, deterministic_correlation, from_qs
from .errors import NumericError, ParseError, TooLargeError, ValidationError

DIST_TOL = 1e-12
VALUE_TOL = 1e-9
PREDICATE_CAP = 10 ** 9


@dataclass(frozen=True, eq=False, repr=False)
class FiniteGame:
    """Rule predicate ``win`` over (x,y,a,b) and question distribution ``dist``."""

    win: np.ndarray
    dist: np.ndarray
    name: str = field(default="", compare=False)

    def __init__(self, win, dist, name: str = ""):
        win = np.array(win, dtype=bool)
        dist = np.array(dist, dtype=float)
        if win.ndim != 4:
            raise ValidationError("rank-4 predicate", detail=f"shape {win.shape}")
        if dist.shape != win.shape[:2]:
            raise ValidationError("distribution over question pairs",
                                  detail=f"{dist.shape} vs {win.shape[:2]}")
        if float(dist.min()) < 0.0:
            raise ValidationError("distribution nonnegative", residual=float(dist.min()))
        defect = abs(float(dist.sum()) - 1.0)
        if defect > DIST_TOL:
            raise ValidationError("distribution sums to 1", residual=defect)
        win.setflags(write=False)
        dist.setflags(write=False)
        object.__setattr__(self, "win", win)
        object.__setattr__(self, "dist", dist)
        object.__setattr__(self, "name", name)

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.win.shape

    @property
    def nX(self) -> int:
        return self.win.shape[0]

    @property
    def nY(self) -> int:
        return self.win.shape[1]

    @property
    def nA(self) -> int:
        return self.win.shape[2]

    @property
    def nB(self) -> int:
        return self.win.shape[3]

    def __repr__(self) -> str:
        label = f" {self.name!r}" if self.name else ""
        return f"FiniteGame{label}(shape={self.shape})"


@dataclass(frozen=True, eq=False, repr=False)
class CylinderGame:
    """A shift-window game over Cantor spaces with product question measure.

    ``win`` is the predicate over the windowed tuple alphabets (sizes
    base^window); ``base_dist`` is the single-site question distribution, so
    the reference measure is its bi-infinite product, invariant under the
    backward shifts.
    """

    window: int
    base_shape: tuple[int, int, int, int]
    win: np.ndarray
    base_dist: np.ndarray
    name: str = field(default="", compare=False)

    def __init__(self, window, base_shape, win, base_dist, name: str = ""):
        window = int(window)
        if window < 1:
            raise ValidationError("window >= 1", residual=float(window))
        base_shape = tuple(int(n) for n in base_shape)
        win = np.array(win, dtype=bool)
        expected = tuple(n ** window for n in base_shape)
        if win.shape != expected:
            raise ValidationError("windowed predicate shape",
                                  detail=f"{win.shape} vs {expected}")
        base_dist = np.array(base_dist, dtype=float)
        if base_dist.shape != base_shape[:2]:
            raise ValidationError("distribution over base question pairs",
                                  detail=f"{base_dist.shape} vs {base_shape[:2]}")
        if float(base_dist.min()) < 0.0:
            raise ValidationError("distribution nonnegative",
                                  residual=float(base_dist.min()))
        defect = abs(float(base_dist.sum()) - 1.0)
        if defect > DIST_TOL:
            raise ValidationError("distribution sums to 1", residual=defect)
        win.setflags(write=False)
        base_dist.setflags(write=False)
        object.__setattr__(self, "window", window)
        object.__setattr__(self, "base_shape", base_shape)
        object.__setattr__(self, "win", win)
        object.__setattr__(self, "base_dist", base_dist)
        object.__setattr__(self, "name", name)

    def __repr__(self) -> str:
        label = f" {self.name!r}" if self.name else ""
        return f"CylinderGame{label}(window={self.window}, base={self.base_shape})"


@dataclass(frozen=True, eq=False)
class ValueReport:
    """A computed game value with its certificate.

    ``kind`` is "loc", "ns", or "qs-lb"; ``exact`` is True for the first two.
    The certificate always re-evaluates to the reported value within 1e-9
    (checked at construction by :func:`value`).
    """

    game_id: str
    kind: str
    value: float
    certificate: object
    exact: bool


def payoff(game: FiniteGame, corr: Correlation) -> float:
    """Winning probability sum_{x,y} pi0(x,y) sum_{win} p(a,b|x,y)."""
    if corr.shape != game.shape:
        raise ValidationError("matching alphabets",
                              detail=f"{corr.shape} vs {game.shape}")
    total = float(np.sum(game.dist[:, :, None, None] * game.win * corr.p))
    if not -VALUE_TOL <= total <= 1.0 + VALUE_TOL:
        raise NumericError("payoff escaped [0,1]", residual=total)
    return min(max(total, 0.0), 1.0)


def value(game: FiniteGame, kind: str, *, dim: int = 2, seeds: int = 20,
          max_sweeps: int = 200, rng_seed: int = 0) -> ValueReport:
    """Compute a game value: exact for "loc"/"ns", a lower bound for "qs"."""
    if kind == "loc":
        val, (f, g) = optimize.local_value(game)
        certificate = (f, g)
        corr = deterministic_correlation(f, g, game.nA, game.nB)
        tag, exact = "loc", True
    elif kind == "ns":
        val, corr = optimize.ns_value(game)
        certificate = corr
        tag, exact = "ns", True
    elif kind == "qs":
        state = optimize.qs_seesaw(game, dim=dim, seeds=seeds,
                                   max_sweeps=max_sweeps, rng_seed=rng_seed)
        val = state.value
        certificate = state
        corr = from_qs(state.alice, state.bob, state.psi)
        tag, exact = "qs-lb", False
    else:
        raise ValueError(f"unknown value type {kind!r}")
    check = payoff(game, corr)
    if abs(check - val) > VALUE_TOL:
        raise NumericError("certificate does not reproduce the value",
                           residual=abs(check - val))
    return ValueReport(game.name, tag, min(max(val, 0.0), 1.0), certificate, exact)


def product_game(g1: FiniteGame, g2: FiniteGame) -> FiniteGame:
    """Product game: win both coordinates; questions drawn independently."""
    size = int(np.prod([a * b for a, b in zip(g1.shape, g2.shape)], dtype=object))
    if size > PREDICATE_CAP:
        raise TooLargeError(f"product predicate would hold {size} entries")
    win = np.logical_and(
        g1.win.reshape(g1.nX, 1, g1.nY, 1, g1.nA, 1, g1.nB, 1),
        g2.win.reshape(1, g2.nX, 1, g2.nY, 1, g2.nA, 1, g2.nB),
    ).reshape(g1.nX * g2.nX, g1.nY * g2.nY, g1.nA * g2.nA, g1.nB * g2.nB)
    dist = np.einsum("xy,XY->xXyY", g1.dist, g2.dist).reshape(
        g1.nX * g2.nX, g1.nY * g2.nY)
    name = f"{g1.name}*{g2.name}" if g1.name or g2.name else ""
    return FiniteGame(win, dist, name=name)


def embed(game: FiniteGame) -> CylinderGame:
    """The window-1 cylinder game whose iterates are the parallel repetitions."""
    return CylinderGame(1, game.shape, game.win, game.dist, name=game.name)


def memory_game(game: FiniteGame) -> CylinderGame:
    """Window-2 game winning a slot when the current or next coordinate wins.

    Its iterates demand, for every offset k below n, a win at slot k or k+1,
    which lets strategies concentrate wins on alternating slots.
    """
    nX, nY, nA, nB = game.shape
    win2 = np.logical_or(
        game.win.reshape(nX, 1, nY, 1, nA, 1, nB, 1),
        game.win.reshape(1, nX, 1, nY, 1, nA, 1, nB),
    ).reshape(nX * nX, nY * nY, nA * nA, nB * nB)
    name = f"memory({game.name})" if game.name else ""
    return CylinderGame(2, game.shape, win2, game.dist, name=name)


def iterate(cylinder: CylinderGame, n: int) -> FiniteGame:
    """The finite game realizing the n-th iterate of a cylinder game.

    The predicate depends on coordinates 0 .. window+n-2, so the result lives
    over tuple alphabets of exactly that width: slot k contributes the window
    predicate applied to coordinates k .. k+window-1, and every slot must win.
    The question distribution is the product of the base distribution over the
    width.
    """
    if n < 1:
        raise ValidationError("n >= 1", residual=float(n))
    w = cylinder.window
    width = w + n - 1
    nX, nY, nA, nB = cylinder.base_shape
    total = int(np.prod([int(s) ** width for s in cylinder.base_shape], dtype=object))
    if total > PREDICATE_CAP:
        raise TooLargeError(
            f"iterate predicate would hold {total} entries (width {width})")

    def group_axes(base: int) -> tuple[int, ...]:
        return (base,) * width

    multi_shape = group_axes(nX) + group_axes(nY) + group_axes(nA) + group_axes(nB)
    window_multi = cylinder.win.reshape((nX,) * w + (nY,) * w + (nA,) * w + (nB,) * w)
    result = np.ones(multi_shape, dtype=bool)
    for k in range(n):
        view_shape = []
        for base in (nX, nY, nA, nB):
            view_shape += [1] * k + [base] * w + [1] * (width - w - k)
        result &= window_multi.reshape(view_shape)
    dist = np.ones((nX,) * width + (nY,) * width)
    for i in range(width):
        shape = [nX if j == i else 1 for j in range(width)]
        shape += [nY if j == i else 1 for j in range(width)]
        dist = dist * cylinder.base_dist.reshape(shape)
    name = f"{cylinder.name}^({n})" if cylinder.name else ""
    return FiniteGame(
        result.reshape(nX ** width, nY ** width, nA ** width, nB ** width),
        dist.reshape(nX ** width, nY ** width),
        name=name,
    )


@dataclass(frozen=True)
class SequenceEntry:
    """One row of a value sequence: the raw value of the n-th stage game and
    its n-th root; ``running_max`` tracks the inner-value lower estimate."""

    n: int
    value: float
    normalized: float
    running_max: float | None = None


def asymptotic_sequence(game: FiniteGame, kind: str, n_max: int,
                        **opts) -> tuple[list[SequenceEntry], bool]:
    """Normalized values of the n-fold parallel repetitions, n = 1..n_max.

    Returns (entries, truncated); truncated is True when a size cap stopped
    the sequence early.  Entries of kind "qs" are see-saw lower bounds.
    """
    return inner_value_sequence(embed(game), kind, n_max, **opts)


def inner_value_sequence(cylinder: CylinderGame, kind: str, n_max: int,
                         **opts) -> tuple[list[SequenceEntry], bool]:
    """Values of the cylinder-game iterates with their n-th roots.

    The raw iterate values are non-increasing in n (each iterate's winning set
    contains the next); this is verified for the exact engines and a violation
    beyond 1e-9 raises, since it can only come from an engine defect.
    """
    entries: list[SequenceEntry] = []
    truncated = False
    running = None
    previous = None
    for n in range(1, n_max + 1):
        try:
            stage = iterate(cylinder, n)
            report = value(stage, kind, **opts)
        except TooLargeError:
            truncated = True
            break
        raw = report.value
        if kind != "qs" and previous is not None and raw > previous + VALUE_TOL:
            raise NumericError("iterate values must be non-increasing",
                               residual=raw - previous)
        previous = raw
        normalized = raw ** (1.0 / n) if raw > 0.0 else 0.0
        running = normalized if running is None else max(running, normalized)
        entries.append(SequenceEntry(n, raw, normalized, running))
    return entries, truncated


# ---------------------------------------------------------------------------
# Stock games and the text format
# ---------------------------------------------------------------------------


def chsh() -> FiniteGame:
    """Binary game, uniform questions, win when a XOR b equals x AND y."""
    win = np.zeros((2, 2, 2, 2), dtype=bool)
    for x in range(2):
        for y in range(2):
            for a in range(2):
                for b in range(2):
                    win[x, y, a, b] = (a ^ b) == (x & y)
    return FiniteGame(win, np.full((2, 2), 0.25), name="chsh")


def all_win(nX: int = 1, nY: int = 1, nA: int = 1, nB: int = 1) -> FiniteGame:
    shape = (nX, nY, nA, nB)
    return FiniteGame(np.ones(shape, dtype=bool),
                      np.full((nX, nY), 1.0 / (nX * nY)), name="all-win")


def never_win(nX: int = 1, nY: int = 1, nA: int = 1, nB: int = 1) -> FiniteGame:
    shape = (nX, nY, nA, nB)
    return FiniteGame(np.zeros(shape, dtype=bool),
                      np.full((nX, nY), 1.0 / (nX * nY)), name="never-win")


def random_game(shape: tuple[int, int, int, int], rng: np.random.Generator,
                win_probability: float = 0.5, uniform_dist: bool = False,
                name: str = "") -> FiniteGame:
    """Random rule predicate with a random (or uniform) question distribution."""
    win = rng.random(shape) < win_probability
    nX, nY = shape[:2]
    if uniform_dist:
        dist = np.full((nX, nY), 1.0 / (nX * nY))
    else:
        raw = rng.random((nX, nY)) + 0.1
        dist = raw / raw.sum()
    return FiniteGame(win, dist, name=name)


def dump_game(game: FiniteGame | CylinderGame) -> str:
    """Serialize to the line format understood by :func:`load_game`."""
    if isinstance(game, CylinderGame):
        nX, nY, nA, nB = game.base_shape
        header = f"game {nX} {nY} {nA} {nB} window {game.window}"
        dist = game.base_dist
        win = game.win
    else:
        nX, nY, nA, nB = game.shape
        header = f"game {nX} {nY} {nA} {nB}"
        dist = game.dist
        win = game.win
    lines = [header,
             "dist " + " ".join(f"{v:.17g}" for v in dist.reshape(-1))]
    for x, y, a, b in np.argwhere(win):
        lines.append(f"win {x} {y} {a} {b}")
    return "\n".join(lines) + "\n"


def load_game(text: str) -> FiniteGame | CylinderGame:
    """Parse the game file format.

    Line 1: ``game nX nY nA nB`` with an optional ``window w`` suffix (the
    cylinder case; the predicate is then over the windowed tuple alphabets).
    Line 2: ``dist`` followed by the nX*nY question probabilities row-major.
    Then one ``win x y a b`` line per winning quadruple.  '#' starts a
    comment; blank lines are ignored.
    """
    header: tuple[int, ...] | None = None
    window: int | None = None
    dist: np.ndarray | None = None
    wins: list[tuple[int, int, int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if header is None:
            if tokens[0] != "game" or len(tokens) not in (5, 7):
                raise ParseError("expected 'game nX nY nA nB [window w]'", line=lineno)
            try:
                sizes = tuple(int(t) for t in tokens[1:5])
            except ValueError as exc:
                raise ParseError("bad alphabet size", line=lineno) from exc
            if any(n < 1 for n in sizes):
                raise ParseError("alphabet sizes must be positive", line=lineno)
            if len(tokens) == 7:
                if tokens[5] != "window":
                    raise ParseError("expected 'window w' suffix", line=lineno)
                try:
                    window = int(tokens[6])
                except ValueError as exc:
                    raise ParseError("bad window", line=lineno) from exc
                if window < 1:
                    raise ParseError("window must be >= 1", line=lineno)
            header = sizes
            continue
        if tokens[0] == "dist":
            if dist is not None:
                raise ParseError("duplicate dist line", line=lineno)
            try:
                values = [float(t) for t in tokens[1:]]
            except ValueError as exc:
                raise ParseError("bad probability", line=lineno) from exc
            if len(values) != header[0] * header[1]:
                raise ParseError(
                    f"expected {header[0] * header[1]} probabilities, got {len(values)}",
                    line=lineno)
            dist = np.array(values).reshape(header[0], header[1])
            continue
        if tokens[0] == "win":
            if len(tokens) != 5:
                raise ParseError("expected 'win x y a b'", line=lineno)
            try:
                quad = tuple(int(t) for t in tokens[1:])
            except ValueError as exc:
                raise ParseError("bad win quadruple", line=lineno) from exc
            w = window or 1
            limits = tuple(n ** w for n in header)
            for v, limit in zip(quad, limits):
                if not 0 <= v < limit:
                    raise ParseError(f"win index {v} out of range [0,{limit})",
                                     line=lineno)
            wins.append(quad)
            continue
        raise ParseError(f"unknown directive {tokens[0]!r}", line=lineno)
    if header is None:
        raise ParseError("missing game header", line=1)
    if dist is None:
        raise ParseError("missing dist line", line=1)
    w = window or 1
    shape = tuple(n ** w for n in header)
    win = np.zeros(shape, dtype=bool)
    for quad in wins:
        win[quad] = True
    try:
        if window is None:
            return FiniteGame(win, dist)
        return CylinderGame(window, header, win, dist)
    except ValidationError as exc:
        raise ParseError(str(exc), line=1) from exc
