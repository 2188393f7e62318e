"""Finite-dimensional dilation theory and products of operator measures.

Construction used throughout: the block square-root Naimark dilation.  For a
POVM E with k effects on C^d, the isometry V : C^d -> C^{dk} stacks the PSD
square roots of the effects,

    V h = (E_0^{1/2} h, ..., E_{k-1}^{1/2} h),

and P_a is the projection onto coordinate block a, so V* P_a V = E_a and
V* V = sum_a E_a = I.  Everything else here (simultaneous and joint commuting
dilations) is assembled from this brick plus unitary rotations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import FiniteChannel, Povm, Pvm, channels_commute
from .errors import PreconditionError, ValidationError
from .linalg import extend_isometry_to_unitary, hermitize, hermiticity_defect, kron, max_abs, psd_sqrt

ISOMETRY_TOL = 1e-10
RECONSTRUCTION_TOL = 1e-9
HERMITIZE_DEFECT_TOL = 1e-8


@dataclass(frozen=True, eq=False, repr=False)
class Dilation:
    """An isometry V : H -> K together with projective data dilating a POVM.

    ``dilated`` is a single Pvm (naimark) or a tuple of Pvm (one per channel
    input, sharing the isometry).  ``residual`` is the worst entrywise error
    max ||V* P_a V - E_a||_max over all dilated families.
    """

    isometry: np.ndarray
    dilated: Pvm | tuple[Pvm, ...]
    residual: float

    def __init__(self, isometry: np.ndarray, dilated, residual: float):
        isometry = np.asarray(isometry, dtype=complex)
        defect = max_abs(isometry.conj().T @ isometry - np.eye(isometry.shape[1]))
        if defect > ISOMETRY_TOL:
            raise ValidationError("isometry", residual=defect)
        if residual > RECONSTRUCTION_TOL:
            raise ValidationError("dilation reconstruction", residual=residual)
        isometry.setflags(write=False)
        object.__setattr__(self, "isometry", isometry)
        object.__setattr__(self, "dilated", dilated)
        object.__setattr__(self, "residual", float(residual))

    @property
    def dilation_dim(self) -> int:
        return self.isometry.shape[0]

    @property
    def source_dim(self) -> int:
        return self.isometry.shape[1]

    def __repr__(self) -> str:
        return (f"Dilation(H=C^{self.source_dim}, K=C^{self.dilation_dim}, "
                f"residual={self.residual:.2e})")


@dataclass(frozen=True, eq=False, repr=False)
class CommutingDilation:
    """Joint dilation of a commuting POVM pair to commuting PVMs P, Q on K.

    Satisfies V* P_a Q_b V = E_a F_b within the reconstruction tolerance;
    ``cross_residual`` is max_{a,b} ||[P_a, Q_b]||_max (zero by construction
    here, since P and Q are marginals of one orthogonal family).
    """

    isometry: np.ndarray
    pvm_p: Pvm
    pvm_q: Pvm
    cross_residual: float
    residual: float

    def __init__(self, isometry, pvm_p, pvm_q, cross_residual, residual):
        isometry = np.asarray(isometry, dtype=complex)
        defect = max_abs(isometry.conj().T @ isometry - np.eye(isometry.shape[1]))
        if defect > ISOMETRY_TOL:
            raise ValidationError("isometry", residual=defect)
        if cross_residual > RECONSTRUCTION_TOL:
            raise ValidationError("commuting dilation", residual=cross_residual)
        if residual > RECONSTRUCTION_TOL:
            raise ValidationError("dilation reconstruction", residual=residual)
        isometry.setflags(write=False)
        object.__setattr__(self, "isometry", isometry)
        object.__setattr__(self, "pvm_p", pvm_p)
        object.__setattr__(self, "pvm_q", pvm_q)
        object.__setattr__(self, "cross_residual", float(cross_residual))
        object.__setattr__(self, "residual", float(residual))

    @property
    def dilation_dim(self) -> int:
        return self.isometry.shape[0]

    def __repr__(self) -> str:
        return (f"CommutingDilation(K=C^{self.dilation_dim}, "
                f"cross={self.cross_residual:.2e}, residual={self.residual:.2e})")


def _block_projections(dim: int, blocks: int) -> np.ndarray:
    """Coordinate-block projections on C^{dim*blocks}, shape (blocks, K, K)."""
    total = dim * blocks
    effects = np.zeros((blocks, total, total), dtype=complex)
    for a in range(blocks):
        sl = slice(a * dim, (a + 1) * dim)
        effects[a, sl, sl] = np.eye(dim)
    return effects


def naimark(povm: Povm) -> Dilation:
    """Block square-root Naimark dilation of a POVM to a PVM on C^{d*k}."""
    d, k = povm.dim, povm.outcomes
    isometry = np.vstack([psd_sqrt(povm.effects[a]) for a in range(k)])
    projections = Pvm(_block_projections(d, k))
    residual = max(
        max_abs(isometry.conj().T @ projections.effects[a] @ isometry - povm.effects[a])
        for a in range(k)
    )
    return Dilation(isometry, projections, residual)


def simultaneous_naimark(channel: FiniteChannel) -> Dilation:
    """Dilate every POVM of a channel with one input-independent isometry.

    Per input x the naimark isometry V_x is completed to a unitary U_x; the
    rotated block projections P(a|x) = U_x* B_a U_x then satisfy
    W* P(a|x) W = V_x* B_a V_x = E(a|x) for the fixed coordinate inclusion
    W : C^d -> C^{dk}.  Requires a common outcome count across inputs (pad the
    channel first if members differ).
    """
    counts = {p.outcomes for p in channel.povms}
    if len(counts) != 1:
        raise ValidationError("common outcome count",
                              detail=f"counts {sorted(counts)}; use FiniteChannel.padded()")
    d, k = channel.dim, channel.povms[0].outcomes
    total = d * k
    inclusion = np.zeros((total, d), dtype=complex)
    inclusion[:d, :] = np.eye(d)
    blocks = _block_projections(d, k)
    dilated = []
    residual = 0.0
    for x, povm in enumerate(channel.povms):
        v_x = np.vstack([psd_sqrt(povm.effects[a]) for a in range(k)])
        u_x = extend_isometry_to_unitary(v_x)
        rotated = np.einsum("ji,ajk,kl->ail", u_x.conj(), blocks, u_x)
        pvm_x = Pvm(rotated)
        dilated.append(pvm_x)
        for a in range(k):
            err = max_abs(inclusion.conj().T @ pvm_x.effects[a] @ inclusion
                          - povm.effects[a])
            residual = max(residual, err)
    return Dilation(inclusion, tuple(dilated), residual)


def product_povm_commuting(e: Povm, f: Povm, tol: float = RECONSTRUCTION_TOL) -> Povm:
    """Product measure of a commuting pair: G_(a,b) = E_a F_b over A x B.

    The products are Hermitized; a pre-symmetrization defect above 1e-8 is an
    error (it signals genuinely non-commuting inputs rather than round-off).
    Outcome pairs are encoded row-major: (a, b) -> a * outcomes(F) + b.
    """
    if e.dim != f.dim:
        raise ValidationError("equal dimensions", detail=f"{e.dim} != {f.dim}")
    worst = 0.0
    effects = np.zeros((e.outcomes * f.outcomes, e.dim, e.dim), dtype=complex)
    for a in range(e.outcomes):
        for b in range(f.outcomes):
            prod = e.effects[a] @ f.effects[b]
            defect = hermiticity_defect(prod)
            worst = max(worst, defect)
            if defect > HERMITIZE_DEFECT_TOL:
                raise PreconditionError(
                    f"effects do not commute: Hermiticity defect {defect:.3e} "
                    f"at pair ({a},{b})", witness=(a, b))
            effects[a * f.outcomes + b] = hermitize(prod)
    return Povm(effects)


def joint_commuting_dilation(e: Povm, f: Povm, tol: float = RECONSTRUCTION_TOL) -> CommutingDilation:
    """Dilate a commuting POVM pair to exactly commuting PVMs on one space.

    The product POVM G_(a,b) = E_a F_b is Naimark-dilated to an orthogonal
    family R_(a,b); the marginals P_a = sum_b R_(a,b) and Q_b = sum_a R_(a,b)
    are PVMs that commute exactly (they are block sums of one orthogonal
    family) and reconstruct the products: V* P_a Q_b V = V* R_(a,b) V = E_a F_b.
    """
    if e.dim != f.dim:
        raise ValidationError("equal dimensions", detail=f"{e.dim} != {f.dim}")
    worst = max(
        max_abs(e.effects[a] @ f.effects[b] - f.effects[b] @ e.effects[a])
        for a in range(e.outcomes) for b in range(f.outcomes)
    )
    if worst > tol:
        arg = max(
            ((a, b) for a in range(e.outcomes) for b in range(f.outcomes)),
            key=lambda ab: max_abs(e.effects[ab[0]] @ f.effects[ab[1]]
                                   - f.effects[ab[1]] @ e.effects[ab[0]]),
        )
        raise PreconditionError(
            f"POVMs do not commute (residual {worst:.3e} at pair {arg})", witness=arg)
    product = product_povm_commuting(e, f)
    base = naimark(product)
    k_f = f.outcomes
    joint = base.dilated.effects  # (e.outcomes * f.outcomes, K, K)
    p_effects = np.stack([joint[a * k_f:(a + 1) * k_f].sum(axis=0)
                          for a in range(e.outcomes)])
    q_effects = np.stack([joint[b::k_f].sum(axis=0) for b in range(k_f)])
    pvm_p, pvm_q = Pvm(p_effects), Pvm(q_effects)
    cross = max(
        max_abs(pvm_p.effects[a] @ pvm_q.effects[b] - pvm_q.effects[b] @ pvm_p.effects[a])
        for a in range(e.outcomes) for b in range(k_f)
    )
    v = base.isometry
    residual = max(
        max_abs(v.conj().T @ (pvm_p.effects[a] @ pvm_q.effects[b]) @ v
                - e.effects[a] @ f.effects[b])
        for a in range(e.outcomes) for b in range(k_f)
    )
    return CommutingDilation(v, pvm_p, pvm_q, cross, residual)


def tensor_povm(e: Povm, f: Povm) -> Povm:
    """Tensor product POVM on H (x) K with effects E_a (x) F_b.

    Spectral measures are preserved: two Pvm inputs yield a Pvm.
    """
    effects = np.stack([
        kron(e.effects[a], f.effects[b])
        for a in range(e.outcomes) for b in range(f.outcomes)
    ])
    cls = Pvm if isinstance(e, Pvm) and isinstance(f, Pvm) else Povm
    return cls(effects)


def product_channel(e: FiniteChannel, f: FiniteChannel, mode: str = "tensor") -> FiniteChannel:
    """Pointwise product channel over inputs X x Y and outcomes A x B.

    mode "tensor" uses E(a|x) (x) F(b|y) on the tensor product space; mode
    "commuting" uses the operator products E(a|x) F(b|y) on the common space
    (requires commuting ranges).  Members are zero-padded to common outcome
    counts first so the product has a rectangular outcome alphabet; inputs and
    outcomes are encoded row-major, (x, y) -> x * inputs(F) + y.
    """
    if mode not in ("tensor", "commuting"):
        raise ValueError(f"unknown mode {mode!r}")
    e, f = e.padded(), f.padded()
    if mode == "commuting":
        report = channels_commute(e, f)
        if not report.commutes:
            raise PreconditionError(
                f"channels do not commute (residual {report.residual:.3e} "
                f"at (x,a,y,b)={report.witness})", witness=report.witness)
        build = product_povm_commuting
    else:
        build = tensor_povm
    povms = [build(pe, pf) for pe in e.povms for pf in f.povms]
    return FiniteChannel(povms)
