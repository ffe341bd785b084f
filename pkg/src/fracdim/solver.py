"""Dimension solver: mesh validation, eigenvalue bracketing across s, and
bisection to a certified dimension interval.

Certified mode scales the collocation matrix L_h(s) by (1 -/+ err) into the
pair (A_h, B_h); the cone bracket of A_h below 1 certifies s >= s*, that of
B_h above 1 certifies s <= s*.  Two independent bisections locate the
endpoints.  Point-estimate mode sets err = 0 and bisects the eigenvalue
estimate itself (what convergence tables measure).
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

from .assembly import OperatorCache
from .bspline import KnotSequence, TensorGrid, make_uniform_knots
from .constants import (RigorProfile, admissible_h, cone_image_parameter,
                        make_profile)
from .maps import Alphabet
from .spectral import cone_membership, power_iteration, spectral_bracket


class InadmissibleMeshError(RuntimeError):
    def __init__(self, h: float, breakdown: dict[str, float]):
        self.h = h
        self.breakdown = breakdown
        msg = ", ".join(f"{k}: {v:.6g}" for k, v in breakdown.items())
        super().__init__(f"h = {h:.6g} exceeds the admissible bound "
                         f"{breakdown['overall']:.6g} ({msg})")


class CertificationError(RuntimeError):
    """A rigor precondition failed at some probe (cone, positivity, err)."""


class MonotonicityError(RuntimeError):
    """Recorded eigenvalue estimates were not decreasing in s."""


def make_geometry(d: int, J: int, n: int):
    """Standard domains: [0,1] for 1D, [0,1] x [-1/2,1/2] for 2D."""
    if d == 1:
        return make_uniform_knots(0.0, 1.0, J, n)
    if d == 2:
        return TensorGrid((make_uniform_knots(0.0, 1.0, J, n),
                           make_uniform_knots(-0.5, 0.5, J, n)))
    raise ValueError("only d in {1, 2} supported")


def make_certified_geometry(d: int, J: int, n: int):
    """Standard domains padded by n extra subintervals of the same width on
    every edge that contraction images can spill past (beyond x = 1 in 1D;
    beyond x = 1 and both y edges in 2D).

    With the padding, every image of every full-basis collocation midpoint
    lands inside the padded partition-of-unity region, so the hidden
    positivity and cone-contraction bounds apply at all collocation points
    and the power iterates genuinely satisfy the certified cone check.
    """
    h = 1.0 / J
    if d == 1:
        return make_uniform_knots(0.0, 1.0 + n * h, J + n, n)
    if d == 2:
        return TensorGrid((make_uniform_knots(0.0, 1.0 + n * h, J + n, n),
                           make_uniform_knots(-0.5 - n * h, 0.5 + n * h,
                                              J + 2 * n, n)))
    raise ValueError("only d in {1, 2} supported")


@dataclass(frozen=True)
class SolveConfig:
    alphabet: Alphabet
    n: int = 2
    h: float | None = None
    J: int | None = None
    mode: str = "certified"  # certified | point-estimate
    tol_s: float | None = None
    s_min: float = 1e-6
    s_max: float | None = None
    s_cap: float | None = None
    alpha: float | None = None
    beta: float | None = None
    M: float | None = None
    unsafe_h: bool = False
    mesh: str = "intervals"  # intervals | nodes
    power_tol: float = 1e-14
    max_power_iter: int = 100_000

    def resolve_mesh(self) -> int:
        """Number of subintervals J, from J or an exact-reciprocal h.

        mesh='intervals' reads h = 1/J exactly; mesh='nodes' reads 1/h as the
        number of mesh NODES, i.e. J = 1/h - 1 subintervals (the convention
        of linspace-style grids, used by the published-table reproductions).
        """
        if self.mesh not in ("intervals", "nodes"):
            raise ValueError("mesh must be 'intervals' or 'nodes'")
        if self.J is not None:
            if self.h is not None and abs(self.h * self.J - 1.0) > 1e-9:
                raise ValueError("h and J disagree")
            return self.J
        if self.h is None:
            raise ValueError("one of h or J is required")
        J = round(1.0 / self.h)
        if J < 1 or abs(self.h * J - 1.0) > 1e-9:
            raise ValueError(f"h = {self.h} is not the reciprocal of an integer")
        if self.mesh == "nodes":
            J -= 1
        if J < 1:
            raise ValueError("mesh has no subintervals")
        return J

    def resolve_tol(self) -> float:
        if self.tol_s is not None:
            return self.tol_s
        if self.mode == "point-estimate":
            return 1e-15
        return 1e-14 if self.alphabet.d == 1 else 1e-10


@dataclass(frozen=True)
class DimensionBracket:
    s_lo: float
    s_hi: float
    mode: str
    h: float
    n: int
    d: int
    alphabet: str
    err: float
    probes: list
    constants: dict
    admissibility: dict
    wall_ms: float
    first_pass: "DimensionBracket | None" = field(default=None, repr=False)

    @property
    def width(self) -> float:
        return self.s_hi - self.s_lo

    def to_record(self) -> dict:
        rec = {
            "alphabet": self.alphabet,
            "d": self.d,
            "n": self.n,
            "h": self.h,
            "mode": self.mode,
            "s_lo": self.s_lo,
            "s_hi": self.s_hi,
            "err": self.err,
            "probes": self.probes,
            "constants": self.constants,
            "admissibility": self.admissibility,
            "wall_ms": self.wall_ms,
        }
        if self.first_pass is not None:
            rec["first_pass"] = self.first_pass.to_record()
        return rec


class ProbeEngine:
    """Caches probes by s and warm-starts power iteration across probes.

    The warm start is pure acceleration: the cone bracket is valid at any
    positive iterate, and the probe sequence is deterministic from the
    config, so results stay reproducible.
    """

    def __init__(self, cache: OperatorCache, geometry, profile: RigorProfile,
                 err: float, check_cone: bool, power_tol: float, max_iter: int):
        self.cache = cache
        self.geometry = geometry
        self.profile = profile
        self.err = err
        self.check_cone = check_cone
        self.power_tol = power_tol
        self.max_iter = max_iter
        self.records: dict[float, dict] = {}
        self._warm = None

    def probe(self, s: float) -> dict:
        s = float(s)
        if s in self.records:
            return self.records[s]
        m = self.cache.matrix(s)
        res = power_iteration(m, tol=self.power_tol, max_iter=self.max_iter,
                              start=self._warm)
        self._warm = res.w
        sizes = None
        if self.cache.d == 2:
            sizes = (self.cache.m1s[1], self.cache.m1s[0])
        cone = cone_membership(res.w, self.geometry, self.profile.M,
                               sizes=sizes)
        if self.check_cone and not cone.member:
            raise CertificationError(
                f"eigenvector left the cone at s = {s}: adjacent log ratio "
                f"{cone.adjacent_ratio_max:.6g} > M = {self.profile.M}")
        br = spectral_bracket(m, res.w, res.iterations)
        rec = {
            "s": s,
            "alpha": br.alpha,
            "beta": br.beta,
            "lam": res.lam,
            "lam_lo": (1.0 - self.err) * br.alpha,
            "lam_hi": (1.0 + self.err) * br.beta,
            "iterations": res.iterations,
            "spread": br.residual,
            "cone_ratio": cone.adjacent_ratio_max,
            "converged": res.converged,
        }
        self.records[s] = rec
        return rec

    def audit_monotonicity(self) -> None:
        recs = sorted(self.records.values(), key=lambda r: r["s"])
        for r1, r2 in zip(recs[:-1], recs[1:]):
            allowance = (r2["beta"] - r2["alpha"]) + (r1["beta"] - r1["alpha"])
            if r2["lam"] > r1["lam"] + allowance + 1e-12 * abs(r1["lam"]):
                raise MonotonicityError(
                    f"eigenvalue estimate rose from s={r1['s']!r} "
                    f"({r1['lam']!r}) to s={r2['s']!r} ({r2['lam']!r})")


def _bisect_lower(probe, a: float, b: float, tol: float) -> float:
    """sup{s : lam_lo(s) >= 1}; returns a as the certified lower endpoint."""
    if probe(a)["lam_lo"] < 1.0:
        return a  # dimension is at or below the search floor
    if probe(b)["lam_lo"] >= 1.0:
        raise ValueError(f"search interval does not straddle: lam_lo >= 1 at s = {b}")
    while b - a > tol:
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            break
        if probe(mid)["lam_lo"] >= 1.0:
            a = mid
        else:
            b = mid
    return a


def _bisect_upper(probe, a: float, b: float, tol: float) -> float:
    """inf{s : lam_hi(s) <= 1}; returns b as the certified upper endpoint."""
    if probe(a)["lam_hi"] <= 1.0:
        return a
    if probe(b)["lam_hi"] > 1.0:
        raise ValueError(f"search interval does not straddle: lam_hi > 1 at s = {b}")
    while b - a > tol:
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            break
        if probe(mid)["lam_hi"] <= 1.0:
            b = mid
        else:
            a = mid
    return b


def _bisect_point(probe, a: float, b: float, tol: float) -> float:
    """Root of lam(s) = 1 by bisection on the point eigenvalue estimate."""
    if probe(a)["lam"] < 1.0:
        return a
    if probe(b)["lam"] >= 1.0:
        raise ValueError(f"search interval does not straddle: lam >= 1 at s = {b}")
    while b - a > tol:
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            break
        if probe(mid)["lam"] >= 1.0:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def _prepare(config: SolveConfig):
    alphabet = config.alphabet
    d = alphabet.d
    J = config.resolve_mesh()
    profile = make_profile(alphabet, n=config.n, s_cap=config.s_cap,
                           alpha=config.alpha, beta=config.beta, M=config.M)
    # certified runs use the padded-domain full-basis scheme so the cone
    # certificates genuinely hold; point estimates use the nominal domain
    if config.mode == "certified":
        geometry = make_certified_geometry(d, J, config.n)
    else:
        geometry = make_geometry(d, J, config.n)
    h = 1.0 / J
    breakdown = admissible_h(profile, alphabet)
    return alphabet, d, J, h, profile, geometry, breakdown


def solve_dimension(config: SolveConfig,
                    cache: OperatorCache | None = None) -> DimensionBracket:
    t0 = time.perf_counter()
    alphabet, d, J, h, profile, geometry, breakdown = _prepare(config)
    certified = config.mode == "certified"
    if h > breakdown["overall"] and (certified or not config.unsafe_h):
        raise InadmissibleMeshError(h, breakdown)
    constants = {
        "K": profile.K, "A": profile.A, "B": profile.B, "D": profile.D,
        "M": profile.M, "alpha": profile.alpha, "beta": profile.beta,
        "C1": profile.C1, "C2": profile.C2, "s_cap": profile.s_cap,
        "err_coeff": profile.err_coefficient,
    }
    if certified:
        m_prime = cone_image_parameter(profile, h)
        constants["M_prime"] = m_prime
        if m_prime >= profile.M:
            raise CertificationError(
                f"image cone parameter M' = {m_prime:.6g} is not below M = {profile.M}")
        err = profile.err(h)
        if err >= 1:
            raise CertificationError(f"err = {err:.6g} >= 1: mesh too coarse")
    else:
        err = 0.0
    if cache is None:
        cache = OperatorCache(alphabet, geometry, profile.q,
                              basis="full" if certified else "trim")
    engine = ProbeEngine(cache, geometry, profile, err, check_cone=certified,
                         power_tol=config.power_tol,
                         max_iter=config.max_power_iter)
    tol = config.resolve_tol()
    s_min = config.s_min
    if config.s_max is not None:
        s_max = config.s_max
    else:
        s_max = min(float(d), profile.s_cap) if certified else float(d)
    if certified:
        s_lo = _bisect_lower(engine.probe, s_min, s_max, tol)
        s_hi = _bisect_upper(engine.probe, s_min, s_max, tol)
    else:
        s_lo = s_hi = _bisect_point(engine.probe, s_min, s_max, tol)
    engine.audit_monotonicity()
    probes = [engine.records[k] for k in sorted(engine.records)]
    return DimensionBracket(
        s_lo=s_lo, s_hi=s_hi, mode=config.mode, h=h, n=config.n, d=d,
        alphabet=alphabet.describe(), err=err, probes=probes,
        constants=constants, admissibility=breakdown,
        wall_ms=(time.perf_counter() - t0) * 1000.0)


def lambda_bracket(config: SolveConfig, s: float,
                   cache: OperatorCache | None = None) -> tuple[float, float]:
    """One certified probe: (lam_lo, lam_hi) bracketing the eigenvalue of the
    scaled pair at s."""
    alphabet, d, J, h, profile, geometry, breakdown = _prepare(config)
    if h > breakdown["overall"] and not config.unsafe_h:
        raise InadmissibleMeshError(h, breakdown)
    err = profile.err(h) if config.mode == "certified" else 0.0
    if err >= 1:
        raise CertificationError(f"err = {err:.6g} >= 1: mesh too coarse")
    if cache is None:
        cache = OperatorCache(
            alphabet, geometry, profile.q,
            basis="full" if config.mode == "certified" else "trim")
    engine = ProbeEngine(cache, geometry, profile, err,
                         check_cone=config.mode == "certified",
                         power_tol=config.power_tol,
                         max_iter=config.max_power_iter)
    rec = engine.probe(s)
    return rec["lam_lo"], rec["lam_hi"]


def two_step_refinement(config: SolveConfig) -> DimensionBracket:
    """Certified 2D solve in two passes: pass 1 bounds err with the default
    s cap; pass 2 reruns with the cap lowered to just above pass 1's upper
    endpoint, shrinking err (which can only move s_lo up and s_hi down)."""
    if config.alphabet.d != 2:
        raise ValueError("two-step refinement applies to 2D systems")
    if config.mode != "certified":
        raise ValueError("two-step refinement is a certified-mode procedure")
    tol = config.resolve_tol()
    first_cfg = replace(config, tol_s=max(tol, 1e-6))
    first = solve_dimension(first_cfg)
    margin = 1e-3
    s_cap_2 = min(first.constants["s_cap"], first.s_hi + margin)
    second_cfg = replace(config, s_cap=s_cap_2, s_min=first.s_lo,
                         s_max=min(first.s_hi + margin, 2.0))
    second = solve_dimension(second_cfg)
    return replace(second, first_pass=first,
                   wall_ms=first.wall_ms + second.wall_ms)


def convergence_study(config: SolveConfig, h_list,
                      reference: float | None = None) -> list[dict]:
    """Point-estimate s_h across meshes, with deltas and empirical orders.

    With a reference value: delta_i = |s_i - ref| and rate_i =
    log2(delta_{i-1}/delta_i).  Without: delta_i = |s_i - s_{i-1}| and the
    same log-ratio of successive deltas (needs >= 3 meshes)."""
    h_list = list(h_list)
    if reference is None and len(h_list) < 3:
        raise ValueError("Richardson-style rates need at least 3 meshes")
    rows = []
    for h in h_list:
        cfg = replace(config, h=float(h), J=None, mode="point-estimate",
                      unsafe_h=True)
        b = solve_dimension(cfg)
        rows.append({"h": float(h), "s_h": b.s_lo, "delta": None, "rate": None,
                     "wall_ms": b.wall_ms})
    if reference is not None:
        for r in rows:
            r["delta"] = abs(r["s_h"] - reference)
    else:
        for i in range(1, len(rows)):
            rows[i]["delta"] = abs(rows[i]["s_h"] - rows[i - 1]["s_h"])
    prev = None
    for r in rows:
        if r["delta"] is not None and prev not in (None, 0.0) and r["delta"] > 0:
            r["rate"] = math.log2(prev / r["delta"])
        prev = r["delta"]
    return rows
