"""Rebuilding mapping cones when either end of the gluing map is replaced.

``mapping_cone(phi: X -> W)`` glues a shifted copy of ``X`` onto ``W``.
When ``X`` or ``W`` is swapped for a complex it is interleaved with, the
cone over the rewritten gluing map stays interleaved with the original
cone.  Both comparison maps have closed-form block matrices, and one of
the two composite relations then holds on the nose; the other needs a
homotopy that we obtain from the certificate search, seeding it with the
block maps and walking a short ladder of shift cells when the tightest
cell is infeasible.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Tuple

from .barcode import CertificateError
from .interleave import (Certificate, compose_certificates,
                         identity_certificate, search_cells,
                         translate_certificate)
from .twisted import ChainMap, TwistedComplex, mapping_cone, translate_map

DEFAULT_CONE_CAP = 1 << 16

Cell = Tuple[Fraction, Fraction]


class ConeTransportError(CertificateError):
    """No cone certificate was found inside the advertised shift budget."""


@dataclass(frozen=True)
class ConeStep:
    """One rebuilt cone.

    ``certificate`` relates ``mapping_cone(map_old)`` to
    ``mapping_cone(map_new)``.  ``base_lift`` records how far the part of
    the cone that was *kept* got pushed up in the new gluing map: the old
    target sits at ``T_base_lift`` after a source replacement, and the new
    target does after a target replacement.  ``attempts`` lists the shift
    cells probed, cheapest first, with the search status at each.
    """

    map_old: ChainMap
    map_new: ChainMap
    certificate: Certificate
    base_lift: Fraction
    attempts: Tuple[Tuple[Fraction, Fraction, str], ...]


def _cells(a0: Fraction, b0: Fraction, step: Fraction) -> List[Cell]:
    """Shift cells to probe, cheapest total first, within 4x the gap."""
    if step == 0:
        return [(a0, b0)]
    cells = [(a0 + i * step, b0 + j * step)
             for i in range(4) for j in range(4) if i + j <= 3]
    cells.sort(key=lambda c: (c[0] + c[1], c[0]))
    return cells


def _orient(cert: Certificate, end: TwistedComplex, what: str) -> Certificate:
    if cert.source == end:
        return cert
    if cert.target == end:
        return cert.flipped()
    raise CertificateError(f"certificate does not mention the cone's {what}")


def replace_source(phi: ChainMap, cert: Certificate, *,
                   cap: int = DEFAULT_CONE_CAP) -> ConeStep:
    """Rebuild ``cone(phi)`` after swapping the source of ``phi``.

    ``cert`` must relate ``phi.src`` to its replacement ``X'`` (either
    orientation).  The new gluing map is ``T_b(phi) ∘ v : X' -> T_b W``.
    The forward comparison map carries ``u`` on the glued part plus a
    correction through the gluing built from the source homotopy; the
    reverse one is ``v`` plus the canonical lift and commutes strictly,
    because the new gluing map factors through ``v``.
    """
    if phi.shift != 0:
        raise CertificateError("can only transport cones of chain maps")
    cert = _orient(cert, phi.src, "source")
    X, W = phi.src, phi.dst
    Xp = cert.target
    a, b = cert.a, cert.b
    s = a + b
    phi_new = translate_map(phi, b).compose(cert.v)
    A = mapping_cone(phi)
    B = mapping_cone(phi_new)
    offA, offB = X.n(), Xp.n()

    corr = translate_map(phi, s).compose(cert.h_src)        # X -> T_s W
    alpha_cols = tuple(
        [cert.u.cols[j] | (corr.cols[j] << offB) for j in range(X.n())]
        + [1 << (offB + j) for j in range(W.n())])
    beta_cols = tuple(
        [cert.v.cols[j] for j in range(Xp.n())]
        + [1 << (offA + j) for j in range(W.n())])

    found, attempts = search_cells(A, B, _cells(a, b, s),
                                   u_cols=alpha_cols, v_cols=beta_cols, cap=cap)
    if found is None:
        raise ConeTransportError(
            "source replacement found no certificate within shift budget "
            f"({attempts[-1][0]}, {attempts[-1][1]})")
    return ConeStep(phi, phi_new, found, b, attempts)


def replace_target(phi: ChainMap, cert: Certificate, *,
                   cap: int = DEFAULT_CONE_CAP) -> ConeStep:
    """Rebuild ``cone(phi)`` after swapping the target of ``phi``.

    ``cert`` must relate ``phi.dst`` to its replacement ``W'`` (either
    orientation).  The new gluing map is ``u ∘ phi : X -> T_a W'``.  Here
    the *forward* comparison map is the strict one — canonical lift on the
    glued part, ``u`` on the base — already at shift zero; the reverse one
    carries ``v`` plus a correction through the gluing.
    """
    if phi.shift != 0:
        raise CertificateError("can only transport cones of chain maps")
    cert = _orient(cert, phi.dst, "target")
    X, W = phi.src, phi.dst
    Wp = cert.target
    a, b = cert.a, cert.b
    s = a + b
    phi_new = cert.u.compose(phi)
    A = mapping_cone(phi)
    B = mapping_cone(phi_new)
    offA = offB = X.n()

    corr = cert.h_src.compose(phi)                          # X -> T_s W
    alpha_cols = tuple(
        [1 << j for j in range(X.n())]
        + [cert.u.cols[j] << offB for j in range(W.n())])
    beta_cols = tuple(
        [(1 << j) | (corr.cols[j] << offA) for j in range(X.n())]
        + [cert.v.cols[j] << offA for j in range(Wp.n())])

    found, attempts = search_cells(A, B, _cells(Fraction(0), s, s),
                                   u_cols=alpha_cols, v_cols=beta_cols, cap=cap)
    if found is None:
        raise ConeTransportError(
            "target replacement found no certificate within shift budget "
            f"({attempts[-1][0]}, {attempts[-1][1]})")
    return ConeStep(phi, phi_new, found, a, attempts)


@dataclass(frozen=True)
class ConeTransportRecord:
    map_old: ChainMap
    map_new: ChainMap
    certificate: Certificate
    source_step: Optional[ConeStep]
    target_step: Optional[ConeStep]


def transport_cone(phi: ChainMap,
                   source_cert: Optional[Certificate] = None,
                   target_cert: Optional[Certificate] = None, *,
                   cap: int = DEFAULT_CONE_CAP) -> ConeTransportRecord:
    """Replace either or both ends of a gluing map, certifying the cones.

    Source first, then target (on the lifted copy of the old target).
    Each half costs at most four times its certificate's gap, so the
    composite stays within eight times the larger of the two gaps.
    """
    if source_cert is None and target_cert is None:
        cone = mapping_cone(phi)
        return ConeTransportRecord(phi, phi, identity_certificate(cone),
                                   None, None)
    step1 = (replace_source(phi, source_cert, cap=cap)
             if source_cert is not None else None)
    phi1 = step1.map_new if step1 is not None else phi
    step2 = None
    if target_cert is not None:
        lift = step1.base_lift if step1 is not None else Fraction(0)
        step2 = replace_target(phi1, translate_certificate(target_cert, lift),
                               cap=cap)
    phi2 = step2.map_new if step2 is not None else phi1
    if step1 is not None and step2 is not None:
        cert = compose_certificates(step1.certificate, step2.certificate)
    elif step1 is not None:
        cert = step1.certificate
    else:
        assert step2 is not None
        cert = step2.certificate
    return ConeTransportRecord(phi, phi2, cert, step1, step2)


@dataclass(frozen=True)
class ConeTowerRecord:
    certificate: Certificate
    maps: Tuple[ChainMap, ...]
    steps: Tuple[ConeTransportRecord, ...]


def transport_tower(base_cert: Certificate,
                    layers: Iterable[Tuple[ChainMap, Optional[Certificate]]],
                    *, cap: int = DEFAULT_CONE_CAP) -> ConeTowerRecord:
    """Transport an iterated cone, upgrading the base certificate per level.

    ``layers`` holds ``(phi, cert)`` pairs: ``phi`` glues a new piece onto
    the previous stage (the base complex for the first layer), and ``cert``
    replaces the glued piece (``None`` keeps it).  The gap compounds by a
    factor of at most eight per level.
    """
    cum = base_cert
    maps: List[ChainMap] = []
    steps: List[ConeTransportRecord] = []
    for phi, piece_cert in layers:
        if phi.dst != cum.source:
            raise CertificateError("tower map does not land in the current stage")
        rec = transport_cone(phi, source_cert=piece_cert, target_cert=cum,
                             cap=cap)
        maps.append(rec.map_new)
        steps.append(rec)
        cum = rec.certificate
    return ConeTowerRecord(cum, tuple(maps), tuple(steps))
