"""POVMs, PVMs, finite operator-valued channels, and the measure <-> unital
completely positive map correspondence at finite level.

Outcome sets are finite, so a measurable set of outcomes is just a subset and
the measure of a subset is the sum of its atomic effects.  All container types
are immutable after construction (arrays are frozen), so values can be shared
freely across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import NotPsdError, ParseError, ValidationError
from .linalg import commutator_norm, max_abs, require_hermitian

OPERATOR_TOL = 1e-9


def _freeze(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


def _stack_effects(effects, dim_hint: int | None = None) -> np.ndarray:
    """Normalize an effects argument to a frozen (outcomes, dim, dim) array."""
    if isinstance(effects, np.ndarray) and effects.ndim == 3:
        arr = np.array(effects, dtype=complex)
    else:
        mats = [np.asarray(e, dtype=complex) for e in effects]
        if not mats:
            raise ValidationError("outcomes >= 1")
        arr = np.stack(mats)
    if arr.shape[0] < 1:
        raise ValidationError("outcomes >= 1")
    if arr.shape[1] != arr.shape[2]:
        raise ValidationError("square effects", detail=f"shape {arr.shape}")
    if dim_hint is not None and arr.shape[1] != dim_hint:
        raise ValidationError("dimension mismatch", detail=f"{arr.shape[1]} != {dim_hint}")
    for a in range(arr.shape[0]):
        arr[a] = require_hermitian(arr[a], tol=1e-8)
    return arr


@dataclass(frozen=True, eq=False, repr=False)
class Povm:
    """Finite positive operator-valued measure: PSD effects summing to I.

    ``effects`` has shape (outcomes, dim, dim).  Validation is total: the
    constructor either returns a value satisfying the invariants or raises a
    ValidationError naming the violated invariant and its residual.
    """

    effects: np.ndarray

    def __repr__(self) -> str:
        return f"{type(self).__name__}(dim={self.dim}, outcomes={self.outcomes})"

    def __init__(self, effects):
        arr = _stack_effects(effects)
        object.__setattr__(self, "effects", _freeze(arr))
        self._validate()

    def _validate(self) -> None:
        for a in range(self.outcomes):
            smallest = float(np.linalg.eigvalsh(self.effects[a])[0])
            if smallest < -OPERATOR_TOL:
                raise NotPsdError(smallest, detail=f"effect {a}")
        completeness = max_abs(self.effects.sum(axis=0) - np.eye(self.dim))
        if completeness > OPERATOR_TOL:
            raise ValidationError("effects sum to identity", residual=completeness)

    @property
    def dim(self) -> int:
        return self.effects.shape[1]

    @property
    def outcomes(self) -> int:
        return self.effects.shape[0]

    def measure(self, subset: Iterable[int]) -> np.ndarray:
        """E(delta) for a subset of outcomes, as the sum of atomic effects."""
        indices = sorted(set(int(a) for a in subset))
        if any(a < 0 or a >= self.outcomes for a in indices):
            raise ValidationError("subset of outcomes", detail=str(indices))
        result = np.zeros((self.dim, self.dim), dtype=complex)
        for a in indices:
            result = result + self.effects[a]
        return result

    def padded(self, outcomes: int) -> "Povm":
        """Same POVM with zero effects appended up to ``outcomes``."""
        if outcomes < self.outcomes:
            raise ValidationError("padding cannot drop outcomes")
        if outcomes == self.outcomes:
            return self
        extra = np.zeros((outcomes - self.outcomes, self.dim, self.dim), dtype=complex)
        return type(self)(np.concatenate([self.effects, extra]))


class Pvm(Povm):
    """Projection-valued measure: mutually orthogonal projections summing to I."""

    def _validate(self) -> None:
        super()._validate()
        for a in range(self.outcomes):
            proj = self.effects[a]
            defect = max_abs(proj @ proj - proj)
            if defect > OPERATOR_TOL:
                raise ValidationError("effects are projections", residual=defect,
                                      detail=f"effect {a}")
        for a in range(self.outcomes):
            for b in range(a + 1, self.outcomes):
                cross = max_abs(self.effects[a] @ self.effects[b])
                if cross > OPERATOR_TOL:
                    raise ValidationError("effects are orthogonal", residual=cross,
                                          detail=f"effects {a},{b}")


@dataclass(frozen=True, eq=False, repr=False)
class UcpOnFunctions:
    """Unital completely positive map on functions over a finite outcome set.

    Determined by the images of the indicator functions of the atoms; the data
    is identical to a POVM's and the correspondence is a role change only.
    """

    effects: np.ndarray

    def __repr__(self) -> str:
        return f"UcpOnFunctions(dim={self.dim}, outcomes={self.outcomes})"

    def __init__(self, effects):
        arr = _stack_effects(effects)
        object.__setattr__(self, "effects", _freeze(arr))
        Povm(arr)  # same invariants

    @property
    def dim(self) -> int:
        return self.effects.shape[1]

    @property
    def outcomes(self) -> int:
        return self.effects.shape[0]


@dataclass(frozen=True, eq=False, repr=False)
class FiniteChannel:
    """Operator-valued information channel with a finite input alphabet.

    One POVM per input, all acting on the same space.  Members may have
    different outcome counts; :meth:`padded` aligns them with zero effects.
    """

    povms: tuple[Povm, ...]
    name: str = field(default="", compare=False)

    def __init__(self, povms: Sequence[Povm], name: str = ""):
        povms = tuple(povms)
        if not povms:
            raise ValidationError("inputs >= 1")
        dim = povms[0].dim
        for i, p in enumerate(povms):
            if not isinstance(p, Povm):
                raise ValidationError("members are POVMs", detail=f"input {i}")
            if p.dim != dim:
                raise ValidationError("members share one dimension",
                                      detail=f"input {i}: {p.dim} != {dim}")
        object.__setattr__(self, "povms", povms)
        object.__setattr__(self, "name", name)

    def __repr__(self) -> str:
        return f"FiniteChannel(inputs={self.inputs}, dim={self.dim})"

    @property
    def inputs(self) -> int:
        return len(self.povms)

    @property
    def dim(self) -> int:
        return self.povms[0].dim

    @property
    def max_outcomes(self) -> int:
        return max(p.outcomes for p in self.povms)

    def effect(self, outcome: int, inp: int) -> np.ndarray:
        """E(a|x); zero operator for padded outcomes beyond the member's count."""
        povm = self.povms[inp]
        if outcome >= povm.outcomes:
            return np.zeros((self.dim, self.dim), dtype=complex)
        return povm.effects[outcome]

    def padded(self, outcomes: int | None = None) -> "FiniteChannel":
        """Channel with every member zero-padded to a common outcome count."""
        target = self.max_outcomes if outcomes is None else outcomes
        return FiniteChannel([p.padded(target) for p in self.povms], name=self.name)

    def effects_array(self) -> np.ndarray:
        """Dense (inputs, max_outcomes, dim, dim) array of effects."""
        padded = self.padded()
        return np.stack([p.effects for p in padded.povms])


def povm_to_ucp(povm: Povm) -> UcpOnFunctions:
    """The unital CP map determined by a POVM; effects carried over unchanged."""
    return UcpOnFunctions(povm.effects)


def ucp_to_povm(ucp: UcpOnFunctions) -> Povm:
    """The POVM recovered from a unital CP map: E({a}) = phi(indicator of a)."""
    return Povm(ucp.effects)


def apply_ucp(ucp: UcpOnFunctions, f: Callable[[int], complex] | Sequence[complex]) -> np.ndarray:
    """Apply the map to a function on outcomes: phi(f) = sum_a f(a) E_a.

    ``f`` may be a callable on outcome indices or a sequence of values.  On the
    indicator of a subset this returns the measure of that subset.
    """
    if callable(f):
        values = np.array([f(a) for a in range(ucp.outcomes)], dtype=complex)
    else:
        values = np.asarray(f, dtype=complex)
        if values.shape != (ucp.outcomes,):
            raise ValidationError("f defined on all outcomes",
                                  detail=f"got {values.shape}, need ({ucp.outcomes},)")
    return np.tensordot(values, ucp.effects, axes=1)


def commutes_with(povm: Povm, operator: np.ndarray, tol: float = OPERATOR_TOL) -> tuple[bool, float]:
    """Whether S commutes with every effect; returns (verdict, worst residual).

    By linearity a True verdict certifies S lies in the commutant of the range
    of the associated unital CP map.
    """
    operator = require_hermitian(operator, tol=1e-8)
    if operator.shape[0] != povm.dim:
        raise ValidationError("equal dimensions",
                              detail=f"{operator.shape[0]} != {povm.dim}")
    worst = max(commutator_norm(povm.effects[a], operator) for a in range(povm.outcomes))
    return worst <= tol, worst


@dataclass(frozen=True)
class CommutationReport:
    commutes: bool
    residual: float
    witness: tuple[int, int, int, int] | None  # (x, a, y, b) of the worst pair


def channels_commute(
    e: FiniteChannel, f: FiniteChannel, tol: float = OPERATOR_TOL
) -> CommutationReport:
    """Check that all cross effects E(a|x), F(b|y) commute within ``tol``."""
    if e.dim != f.dim:
        raise ValidationError("equal dimensions", detail=f"{e.dim} != {f.dim}")
    worst = 0.0
    witness = None
    for x, pe in enumerate(e.povms):
        for y, pf in enumerate(f.povms):
            for a in range(pe.outcomes):
                for b in range(pf.outcomes):
                    r = commutator_norm(pe.effects[a], pf.effects[b])
                    if r > worst:
                        worst = r
                        witness = (x, a, y, b)
    return CommutationReport(worst <= tol, worst, witness)


# ---------------------------------------------------------------------------
# Text serialization.  One POVM:
#
#   povm dim=<d> outcomes=<k>
#   <row of d entries> x d rows, repeated per effect
#
# where each entry is "<re>,<im>" in C99 hex-float notation, giving lossless
# round-trips at full double precision.  A channel is a "channel dim=<d>
# inputs=<m>" header followed by its member POVM blocks.  Blank lines and
# lines starting with '#' are ignored.
# ---------------------------------------------------------------------------


def _format_entry(value: complex) -> str:
    return f"{float(value.real).hex()},{float(value.imag).hex()}"


def _parse_entry(token: str, lineno: int) -> complex:
    try:
        re_part, im_part = token.split(",")
        return complex(float.fromhex(re_part), float.fromhex(im_part))
    except ValueError as exc:
        raise ParseError(f"bad matrix entry {token!r}", line=lineno) from exc


def dump_povm(povm: Povm) -> str:
    lines = [f"povm dim={povm.dim} outcomes={povm.outcomes}"]
    for a in range(povm.outcomes):
        for i in range(povm.dim):
            lines.append(" ".join(_format_entry(v) for v in povm.effects[a][i]))
    return "\n".join(lines) + "\n"


def dump_channel(channel: FiniteChannel) -> str:
    parts = [f"channel dim={channel.dim} inputs={channel.inputs}"]
    for povm in channel.povms:
        parts.append(dump_povm(povm).rstrip("\n"))
    return "\n".join(parts) + "\n"


def _content_lines(text: str) -> list[tuple[int, str]]:
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append((lineno, line))
    return out


def _parse_header(line: str, lineno: int, kind: str, keys: tuple[str, ...]) -> dict[str, int]:
    tokens = line.split()
    if not tokens or tokens[0] != kind:
        raise ParseError(f"expected {kind!r} header, got {line!r}", line=lineno)
    values: dict[str, int] = {}
    for token in tokens[1:]:
        if "=" not in token:
            raise ParseError(f"bad header field {token!r}", line=lineno)
        key, _, val = token.partition("=")
        try:
            values[key] = int(val)
        except ValueError as exc:
            raise ParseError(f"bad header value {token!r}", line=lineno) from exc
    for key in keys:
        if key not in values:
            raise ParseError(f"missing header field {key!r}", line=lineno)
        if values[key] < 1:
            raise ParseError(f"header field {key!r} must be positive", line=lineno)
    return values


def _parse_povm_block(lines: list[tuple[int, str]], start: int, cls=Povm) -> tuple[Povm, int]:
    lineno, header = lines[start]
    fields = _parse_header(header, lineno, "povm", ("dim", "outcomes"))
    dim, outcomes = fields["dim"], fields["outcomes"]
    needed = outcomes * dim
    if len(lines) - (start + 1) < needed:
        raise ParseError(f"povm block truncated: need {needed} matrix rows", line=lineno)
    effects = np.zeros((outcomes, dim, dim), dtype=complex)
    pos = start + 1
    for a in range(outcomes):
        for i in range(dim):
            row_lineno, row = lines[pos]
            tokens = row.split()
            if len(tokens) != dim:
                raise ParseError(f"expected {dim} entries, got {len(tokens)}", line=row_lineno)
            effects[a, i] = [_parse_entry(tok, row_lineno) for tok in tokens]
            pos += 1
    return cls(effects), pos


def load_povm(text: str, cls=Povm) -> Povm:
    lines = _content_lines(text)
    if not lines:
        raise ParseError("empty povm file", line=1)
    povm, pos = _parse_povm_block(lines, 0, cls=cls)
    if pos != len(lines):
        raise ParseError("trailing content after povm block", line=lines[pos][0])
    return povm


def load_channel(text: str) -> FiniteChannel:
    """Parse a channel dump; a bare povm block loads as a one-input channel."""
    lines = _content_lines(text)
    if not lines:
        raise ParseError("empty channel file", line=1)
    lineno, header = lines[0]
    if header.split()[0] == "povm":
        return FiniteChannel([load_povm(text)])
    fields = _parse_header(header, lineno, "channel", ("dim", "inputs"))
    povms = []
    pos = 1
    for _ in range(fields["inputs"]):
        if pos >= len(lines):
            raise ParseError("channel block truncated", line=lines[-1][0])
        povm, pos = _parse_povm_block(lines, pos)
        if povm.dim != fields["dim"]:
            raise ParseError(f"member dim {povm.dim} != channel dim {fields['dim']}",
                             line=lineno)
        povms.append(povm)
    if pos != len(lines):
        raise ParseError("trailing content after channel block", line=lines[pos][0])
    return FiniteChannel(povms)
