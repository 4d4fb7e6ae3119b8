"""Exact activation probabilities under independent random assignments.

With every edge's spreading value drawn independently from the scheme's
distribution and every lift shift uniform on [0, Z), a candidate walk is
*active* when its signed coefficient sum hits zero (over the integers for
spreading, mod Z for lifting).  Both probabilities are computed exactly as
rationals:

* spreading: convolve the per-edge distributions of coeff * value and read
  off the mass at zero;
* lifting: the coefficient form c . L mod Z is uniform on the subgroup
  d * Z_Z where d = gcd(coefficients, Z), so the mass at zero is
  gcd(c_1, ..., c_n, Z) / Z.

The closed form for a 4-cycle under the full uniform pattern
(0, 1, ..., m), each edge equally likely,

    P = (2 m^2 + 4 m + 3) / (3 (m + 1)^3),

is reproduced (and unit-tested) against the generic convolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .model import CouplingScheme
from .walks import WalkCandidate


def _zero_mass_of_sum(terms: Sequence[tuple[int, ...]],
                      scheme: CouplingScheme) -> Fraction:
    """P[sum of coeff*value = 0] for independent pattern-distributed values.

    ``terms`` lists the nonzero coefficients, one per independent edge.
    """
    dist: dict[int, Fraction] = {0: Fraction(1)}
    for coef in terms:
        nxt: dict[int, Fraction] = {}
        for s, p in dist.items():
            for a, q in zip(scheme.pattern, scheme.probs):
                key = s + coef * a
                nxt[key] = nxt.get(key, Fraction(0)) + p * q
        dist = nxt
    return dist.get(0, Fraction(0))


def spreading_prob_exact(cand: WalkCandidate,
                         scheme: CouplingScheme) -> Fraction:
    """Exact probability that the walk survives random edge spreading."""
    if not cand.coeffs:
        raise ValueError("candidate has no edges")
    return _zero_mass_of_sum([c for _, c in cand.coeffs if c != 0], scheme)


def spreading_prob_c4_uniform(memory: int) -> Fraction:
    """Closed form for a 4-cycle under the uniform full pattern."""
    if memory < 0:
        raise ValueError("memory must be non-negative")
    m = memory
    return Fraction(2 * m * m + 4 * m + 3, 3 * (m + 1) ** 3)


def lift_prob_exact(cand: WalkCandidate, z: int) -> Fraction:
    """Exact probability that the walk survives a uniform random lift."""
    if z < 1:
        raise ValueError("lifting degree must be at least 1")
    if not cand.coeffs:
        raise ValueError("candidate has no edges")
    g = z
    for _, c in cand.coeffs:
        g = math.gcd(g, c)
    return Fraction(g, z)


def lift_prob_bound(cycle_lengths: Sequence[int], z: int) -> Fraction:
    """Upper bound prod len(c_i) / (4 Z)^{n} over the fundamental cycles.

    For a single 2g-walk the bound is 2g / (4 Z); for an avoidable walk it
    dominates the exact gcd value because the gcd of the nonzero
    coefficients never exceeds g/2.  Can exceed 1 for tiny Z; consumers
    report min(1, bound).
    """
    if z < 1:
        raise ValueError("lifting degree must be at least 1")
    if not cycle_lengths:
        raise ValueError("need at least one cycle")
    if any(n < 4 for n in cycle_lengths):
        raise ValueError("cycle lengths must be at least 4")
    num = 1
    for n in cycle_lengths:
        num *= n
    return Fraction(num, (4 * z) ** len(cycle_lengths))


@dataclass(frozen=True)
class ActivationProbability:
    """Exact spread/lift survival probabilities for one candidate."""

    spread: Fraction
    lift: Fraction
    lift_bound: Fraction

    @property
    def joint(self) -> Fraction:
        return self.spread * self.lift


def joint_prob(cand: WalkCandidate,
               scheme: CouplingScheme) -> ActivationProbability:
    """Spread and lift probabilities (independent stages, so they multiply)."""
    return ActivationProbability(
        spread=spreading_prob_exact(cand, scheme),
        lift=lift_prob_exact(cand, scheme.lifting_degree),
        lift_bound=lift_prob_bound([cand.two_g], scheme.lifting_degree),
    )


@dataclass(frozen=True)
class HarmfulStructure:
    """A union of fundamental cycles treated as one object.

    Exploratory: multi-cycle structures are not resampling targets, but
    their activation probability is still useful for bound studies.
    """

    cycles: tuple[WalkCandidate, ...]
    label: str = ""

    def __post_init__(self) -> None:
        if not self.cycles:
            raise ValueError("structure needs at least one cycle")


def structure_joint_prob(struct: HarmfulStructure,
                         scheme: CouplingScheme
                         ) -> Optional[ActivationProbability]:
    """Exact joint activation when the cycles' supports are edge-disjoint.

    Disjoint supports make the per-cycle events independent, so the
    probabilities multiply.  Returns None when supports overlap; use
    mc_structure_prob (plus lift_prob_bound) there.
    """
    seen: set = set()
    for c in struct.cycles:
        for e in c.support:
            if e in seen:
                return None
            seen.add(e)
    spread = Fraction(1)
    lift = Fraction(1)
    for c in struct.cycles:
        p = joint_prob(c, scheme)
        spread *= p.spread
        lift *= p.lift
    bound = lift_prob_bound([c.two_g for c in struct.cycles],
                            scheme.lifting_degree)
    return ActivationProbability(spread, lift, bound)


def mc_structure_prob(struct: HarmfulStructure, scheme: CouplingScheme,
                      trials: int, seed: int) -> float:
    """Monte Carlo estimate of P[every cycle active] for overlapping supports."""
    if trials < 1:
        raise ValueError("need at least one trial")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    edges = sorted({e for c in struct.cycles for e in c.edges})
    index = {e: k for k, e in enumerate(edges)}
    pattern = np.array(scheme.pattern, dtype=np.int64)
    denom = math.lcm(*(p.denominator for p in scheme.probs))
    weights = np.cumsum([int(p * denom) for p in scheme.probs])
    z = scheme.lifting_degree
    hits = 0
    for _ in range(trials):
        u = rng.integers(0, denom, size=len(edges))
        spread_vals = pattern[np.searchsorted(weights, u, side="right")]
        lift_vals = rng.integers(0, z, size=len(edges))
        ok = True
        for c in struct.cycles:
            s_int = sum(coef * int(spread_vals[index[e]])
                        for e, coef in c.coeffs)
            s_mod = sum(coef * int(lift_vals[index[e]])
                        for e, coef in c.coeffs)
            if s_int != 0 or s_mod % z != 0:
                ok = False
                break
        if ok:
            hits += 1
    return hits / trials


def probability_report(cands: Sequence[WalkCandidate],
                       scheme: CouplingScheme) -> str:
    """CSV batch report: exact rationals as "num/den" plus float columns."""
    lines = ["key,two_g,spread,spread_float,lift,lift_float,"
             "lift_bound,joint,joint_float"]
    for c in cands:
        p = joint_prob(c, scheme)
        capped = min(Fraction(1), p.lift_bound)
        lines.append(",".join([
            c.key, str(c.two_g),
            f"{p.spread.numerator}/{p.spread.denominator}",
            repr(float(p.spread)),
            f"{p.lift.numerator}/{p.lift.denominator}",
            repr(float(p.lift)),
            f"{capped.numerator}/{capped.denominator}",
            f"{p.joint.numerator}/{p.joint.denominator}",
            repr(float(p.joint)),
        ]))
    return "\n".join(lines) + "\n"
