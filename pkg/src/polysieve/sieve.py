"""Local sieve data for the derivative of an auxiliary polynomial.

For each prime p, gamma(p) is the smallest exponent such that h' is not
identically zero as a function modulo p**gamma, and j(p) counts the residues
mod p**gamma where h' vanishes. Membership in the sieved sets W(U) and
W^q(U), the normalization J, and an audit of the weighted Brun-type count
live here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .intersective import AuxiliaryContext
from .nt import gcd_many, primes_upto, roots_mod, v_p
from .polycore import IntPoly


@dataclass(frozen=True)
class LocalSieveDatum:
    p: int
    gamma: int
    j: int
    roots: tuple[int, ...]  # residues mod p**gamma with derivative = 0

    @property
    def modulus(self) -> int:
        return self.p**self.gamma


@dataclass(frozen=True)
class SieveTable:
    aux: AuxiliaryContext
    U: float
    entries: dict[int, LocalSieveDatum]
    period: int

    @classmethod
    def build(cls, aux: AuxiliaryContext, U: float) -> "SieveTable":
        entries = {}
        period = 1
        for p in primes_upto(int(U)):
            datum = local_datum(aux.aux, p)
            entries[p] = datum
            period *= datum.modulus
        return cls(aux, U, entries, period)

    def to_jsonable(self) -> dict:
        return {
            "ell": self.aux.ell,
            "U": self.U,
            "entries": [
                {"p": p, "gamma": d.gamma, "j": d.j} for p, d in sorted(self.entries.items())
            ],
            "period": str(self.period),
        }


def fixed_divisor(h: IntPoly) -> int:
    """gcd of all integer values of h, via values at 0..deg."""
    if h.is_zero:
        raise ValueError("zero polynomial has no fixed divisor")
    return gcd_many(h(n) for n in range(h.degree + 1))


def local_datum(aux: IntPoly, p: int) -> LocalSieveDatum:
    """Exact (gamma, j, root set) for the derivative of aux at prime p."""
    d = aux.derivative()
    if d.is_zero:
        raise ValueError("derivative is identically zero")
    gamma = v_p(fixed_divisor(d), p) + 1
    m = p**gamma
    roots = tuple(roots_mod(list(d.coeffs), m))
    return LocalSieveDatum(p, gamma, len(roots), roots)


def local_data(aux: AuxiliaryContext, p: int) -> tuple[int, int]:
    datum = local_datum(aux.aux, p)
    return datum.gamma, datum.j


def _applicable(table: SieveTable, q: Optional[int]):
    for p in sorted(table.entries):
        datum = table.entries[p]
        if q is None or q % datum.modulus == 0:
            yield datum


def in_W(n: int, table: SieveTable, q: Optional[int] = None) -> bool:
    """Membership in W(U), or in W^q(U) when q is given."""
    for datum in _applicable(table, q):
        if n % datum.modulus in datum.roots:
            return False
    return True


def w_mask(table: SieveTable, N: int, q: Optional[int] = None) -> np.ndarray:
    """Boolean array of length N+1; index n says whether n is in W (index 0 False)."""
    mask = np.ones(N + 1, dtype=bool)
    mask[0] = False
    for datum in _applicable(table, q):
        m = datum.modulus
        for r in datum.roots:
            start = r if r >= 1 else m
            if start <= N:
                mask[start :: m] = False
    return mask


def J_factor(table: SieveTable, q: Optional[int] = None) -> Fraction:
    """Exact product of (1 - j/p**gamma)^(-1) over applicable primes."""
    out = Fraction(1)
    for p in sorted(table.entries):
        datum = table.entries[p]
        if q is not None and q % datum.modulus == 0:
            continue
        out *= Fraction(datum.modulus, datum.modulus - datum.j)
    return out


def J_factor_float(table: SieveTable, q: Optional[int] = None) -> float:
    """Float J for large sieve levels where the exact rational is unwieldy."""
    acc = 0.0
    for p in sorted(table.entries):
        datum = table.entries[p]
        if q is not None and q % datum.modulus == 0:
            continue
        acc += math.log(datum.modulus) - math.log(datum.modulus - datum.j)
    return math.exp(acc)


@dataclass
class BrunReport:
    q: int
    b: int
    t: int
    U: float
    empirical: int
    main_term: Fraction  # refined, residue-aware local factors
    main_term_paper: Fraction  # product restricted only by p**gamma | q
    b_in_Wq: bool
    blocked_prime: Optional[int]
    abs_error: float
    rel_error: float

    @property
    def paper_formula_matches(self) -> bool:
        return self.main_term == self.main_term_paper


def _refined_local_factor(datum: LocalSieveDatum, q: int, b: int) -> Fraction:
    """Density of the condition at p among n = b (mod q).

    With e = min(v_p(q), gamma): the congruence pins n mod p**e, leaving
    p**(gamma-e) admissible lifts, of which the roots congruent to b mod p**e
    are excluded.
    """
    p, gamma = datum.p, datum.gamma
    e = min(v_p(q, p) if q % p == 0 else 0, gamma)
    pe = p**e
    j_b = sum(1 for r in datum.roots if (r - b) % pe == 0)
    total = p ** (gamma - e)
    return Fraction(total - j_b, total)


def brun_sum_audit(table: SieveTable, q: int, b: int, t: int) -> BrunReport:
    """Compare the exact sum of h'(n) over W(U) in a residue class with the
    sieve main term h(t)/q times the product of local densities.

    ``main_term_paper`` keeps only the local factors at primes whose modulus
    does not divide q, as printed; ``main_term`` refines the factors at primes
    sharing a power with q, which is the density the count actually has.
    """
    if not (t >= q >= 1):
        raise ValueError("need t >= q >= 1")
    aux = table.aux.aux
    d = aux.derivative()
    mask = w_mask(table, t)
    idx = np.arange(t + 1)
    sel = mask & (idx % q == b % q)
    empirical = sum(d(int(n)) for n in np.nonzero(sel)[0])

    paper = Fraction(aux(t), q)
    refined = Fraction(aux(t), q)
    blocked = None
    for p in sorted(table.entries):
        datum = table.entries[p]
        if q % datum.modulus != 0:
            paper *= Fraction(datum.modulus - datum.j, datum.modulus)
        factor = _refined_local_factor(datum, q, b)
        refined *= factor
        if factor == 0 and blocked is None:
            blocked = p
    b_in = in_W(b, table, q)
    abs_err = abs(empirical - refined)
    if refined != 0:
        rel = float(abs_err / abs(refined))
    else:
        rel = 0.0 if empirical == 0 else math.inf
    return BrunReport(
        q=q,
        b=b,
        t=t,
        U=table.U,
        empirical=empirical,
        main_term=refined,
        main_term_paper=paper,
        b_in_Wq=b_in,
        blocked_prime=blocked,
        abs_error=float(abs_err),
        rel_error=rel,
    )


def w_count_in_period(table: SieveTable, enumerate_cap: int = 10**7) -> int:
    """Count of W members in one full period, by direct enumeration."""
    if table.period > enumerate_cap:
        raise ValueError("period too large to enumerate; use J_factor instead")
    period = int(table.period)
    return int(np.count_nonzero(w_mask(table, period)[1 : period + 1]))
