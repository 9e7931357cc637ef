"""Rule engine: operator classification plus geometry reports -> cited conclusions.

Each conclusion is Yes, No or Unknown.  No is only issued by a rule that is an
equivalence, and only with a failing slice certificate that replays at half
spacing.  Yes answers resting on a grid scan carry a resolution qualifier.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .geometry import (
    Domain,
    FamilyReport,
    min_principle_family,
    replay_certificate,
)
from .geometry.slices import default_offsets
from .poly import (
    EllipticityReport,
    NotActingAlong,
    Polynomial,
    SemiEllipticity,
    Subspace,
    ZeroSetReport,
    dependence_subspace,
    is_elliptic_on,
    principal_part,
    semi_elliptic_weights,
    zero_set_structure,
)
from .sigma import SigmaZeroSet, sigma_zero_subspace_exact

YES, NO, UNKNOWN = "Yes", "No", "Unknown"

RULES = {
    "R1": "elliptic operator: every open set is P-convex for supports and for singular supports",
    "R2": "P acts along W and is elliptic on W: P-convexity for supports, P-convexity for singular "
          "supports and the minimum principle for d_X on every translate x+W are equivalent",
    "R3": "principal zero set is a line: P-convexity for supports holds iff d_X satisfies the "
          "minimum principle in every characteristic hyperplane",
    "R4": "{sigma_P = 0} = W^perp with sigma_P(W^perp) = 0: P-convexity for singular supports "
          "holds iff d_X satisfies the minimum principle on every translate x+W",
    "R5": "zero set of P_m (resp. of sigma_P) inside W^perp plus the minimum principle on every "
          "translate x+W gives P-convexity for supports (resp. singular supports); sufficient only",
    "R6": "convex open sets are P-convex for supports and for singular supports",
    "S": "P(D) is surjective on distributions over X iff X is P-convex for supports and for "
         "singular supports",
    "A-i": "P acts along W and is elliptic on W: the same holds for P+, and X x R is P+-convex iff "
           "d_X satisfies the minimum principle on every x+W (boundary distance lifts to X x R)",
    "A-ii": "P semi-elliptic with a one-dimensional principal zero set: surjectivity of P(D) on X "
            "implies surjectivity of P+(D) on X x R",
    "A-iv": "P semi-elliptic with principal zero set Z: X x R is P+-convex for singular supports "
            "iff d_X satisfies the minimum principle on every translate x+Z^perp",
    "A-sup": "X x R is P+-convex for supports whenever X is P-convex for supports",
}


def surjectivity_verdict(supports: str, sing_supports: str) -> str:
    if supports == YES and sing_supports == YES:
        return YES
    if NO in (supports, sing_supports):
        return NO
    return UNKNOWN


# -- classification ---------------------------------------------------------

@dataclass
class OperatorClass:
    polynomial: Polynomial
    elliptic: bool | None
    ellipticity: EllipticityReport
    acts_along: Subspace
    elliptic_on_W: EllipticityReport | None
    semi_elliptic: SemiEllipticity | None
    principal_zero_set: ZeroSetReport
    first_order: tuple | None
    sigma_zero: SigmaZeroSet | None
    refusals: list = field(default_factory=list)

    @property
    def elliptic_along(self) -> bool:
        return bool(self.elliptic_on_W is not None and self.elliptic_on_W.elliptic)

    @property
    def zero_subspace(self) -> Subspace | None:
        zs = self.principal_zero_set
        if zs.kind == "subspace":
            return zs.subspace
        if zs.kind == "trivial":
            return Subspace.trivial(self.polynomial.nvars)
        return None

    def to_json(self) -> dict:
        fo = None
        if self.first_order is not None:
            N, c = self.first_order
            fo = {"N": [[z.real, z.imag] for z in N], "c": [c.real, c.imag]}
        return {
            "polynomial": str(self.polynomial),
            "nvars": self.polynomial.nvars,
            "degree": self.polynomial.degree,
            "elliptic": self.elliptic,
            "ellipticity": self.ellipticity.to_json(),
            "acts_along": self.acts_along.to_json(),
            "elliptic_on_W": None if self.elliptic_on_W is None else self.elliptic_on_W.to_json(),
            "semi_elliptic": None if self.semi_elliptic is None else self.semi_elliptic.to_json(),
            "principal_zero_set": self.principal_zero_set.to_json(),
            "first_order": fo,
            "sigma_zero_exact": None if self.sigma_zero is None else self.sigma_zero.to_json(),
            "refusals": self.refusals,
        }


@lru_cache(maxsize=64)
def _classify_cached(P: Polynomial) -> OperatorClass:
    n = P.nvars
    refusals = []
    Pm = principal_part(P)
    ell = is_elliptic_on(P, Subspace.full(n))
    if ell.elliptic is None:
        refusals.append("ellipticity on R^n: sphere minimum inside the tolerance band")
    W = dependence_subspace(P)
    ell_W = None
    if not W.is_trivial:
        try:
            ell_W = is_elliptic_on(P, W)
        except NotActingAlong:
            ell_W = None
        if ell_W is not None and ell_W.elliptic is None:
            refusals.append("ellipticity on the dependence subspace: minimum inside the tolerance band")
    semi = semi_elliptic_weights(P) if P.degree > 0 else None
    if semi is not None and semi.status == "unknown":
        refusals.append("semi-ellipticity: weighted minimum inside the tolerance band")
    if ell.elliptic:
        zs = ZeroSetReport("trivial", Subspace.trivial(n), None, ell.c_lower, "elliptic")
    else:
        zs = zero_set_structure(Pm)
        if zs.kind == "unknown":
            refusals.append(f"principal zero set undecided: {zs.reason}")
    first = None
    if P.degree == 1:
        N = []
        for j in range(n):
            a = [0] * n
            a[j] = 1
            N.append(complex(P.coefficient(tuple(a))))
        first = (N, complex(P.coefficient((0,) * n)))
    return OperatorClass(P, ell.elliptic, ell, W, ell_W, semi, zs, first, sigma_zero_subspace_exact(P), refusals)


def classify_operator(P: Polynomial) -> OperatorClass:
    if P.is_zero:
        raise ValueError("the zero polynomial does not define an operator to classify")
    if P.degree == 0:
        raise ValueError("constant symbols are trivially surjective multiples of the identity; nothing to classify")
    return _classify_cached(P)


# -- geometry parameters and verdicts -----------------------------------------

@dataclass(frozen=True)
class GeomParams:
    h: float = 0.05
    extent: float = 2.0
    steps: tuple = (0.0, 0.25, -0.25, 0.5, -0.5, 1.0, -1.0)
    offsets: tuple | None = None      # explicit translates, overriding ``steps``
    seed: int = 0

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("h must be positive")
        if not self.extent > 0:
            raise ValueError("extent must be positive")

    def offsets_for(self, X: Domain, W: Subspace) -> list:
        if self.offsets is not None:
            return [np.asarray(o, dtype=float) for o in self.offsets]
        return default_offsets(X, W, self.steps)

    def to_json(self):
        return {"h": self.h, "extent": self.extent, "steps": list(self.steps),
                "offsets": None if self.offsets is None else [list(map(float, o)) for o in self.offsets],
                "seed": self.seed}


@dataclass
class RuleEntry:
    id: str
    outcome: str
    aspect: str
    detail: str = ""

    def to_json(self):
        return {"id": self.id, "citation": RULES[self.id], "aspect": self.aspect,
                "outcome": self.outcome, "detail": self.detail}


@dataclass
class Verdict:
    supports: str = UNKNOWN
    sing_supports: str = UNKNOWN
    surjective: str = UNKNOWN
    augmented_surjective: str = UNKNOWN
    augmented_supports: str = UNKNOWN
    augmented_sing_supports: str = UNKNOWN
    rules: list = field(default_factory=list)
    certificates: list = field(default_factory=list)
    qualifiers: list = field(default_factory=list)
    operator_class: OperatorClass | None = None
    families: dict = field(default_factory=dict)     # label -> FamilyReport
    conditions: dict = field(default_factory=dict)

    @property
    def refusals(self) -> list:
        return [] if self.operator_class is None else self.operator_class.refusals

    def to_json(self) -> dict:
        return {
            "supports": self.supports,
            "sing_supports": self.sing_supports,
            "surjective": self.surjective,
            "augmented_surjective": self.augmented_surjective,
            "augmented_supports": self.augmented_supports,
            "augmented_sing_supports": self.augmented_sing_supports,
            "rules": [r.to_json() for r in self.rules],
            "certificates": self.certificates,
            "qualifiers": self.qualifiers,
            "conditions": self.conditions,
            "operator_class": None if self.operator_class is None else self.operator_class.to_json(),
            "slices": {k: [{"slice_id": s, "status": r.status} for s, r in f.slices]
                       for k, f in self.families.items()},
        }


class _Geometry:
    """Memoized minimum-principle families for one domain."""

    def __init__(self, X: Domain, geom: GeomParams, verdict: Verdict, share=None):
        self.X = X
        self.geom = geom
        self.v = verdict
        self._cache: dict = {} if share is None else share._cache

    def family(self, W: Subspace, label: str) -> FamilyReport:
        key = np.round(W.basis, 12).tobytes() + bytes([W.dim])
        if key not in self._cache:
            g = self.geom
            self._cache[key] = min_principle_family(self.X, W, g.offsets_for(self.X, W), g.h, g.extent, g.seed)
        rep = self._cache[key]
        self.v.families.setdefault(label, rep)
        return rep

    def decide(self, W: Subspace, rule: str, aspect: str, label: str, iff: bool = True) -> str:
        """Yes / No / Unknown from the family on x + W, recording certificates and qualifiers."""
        rep = self.family(W, label)
        if rep.status == "fails":
            if not iff:
                return UNKNOWN
            cert = rep.failures[0]
            replays = [replay_certificate(self.X, c) for c in rep.failures]
            if not replays[0].ok:
                self.v.qualifiers.append(f"{rule}: certificate {cert.slice_id} did not replay at h/2; No withheld")
                return UNKNOWN
            ids = []
            for c, r in zip(rep.failures, replays):
                if r.ok:
                    ref = f"{label}/{c.slice_id}"
                    ids.append(ref)
                    if not any(e["ref"] == ref for e in self.v.certificates):
                        self.v.certificates.append({"ref": ref, "rule": rule, "aspect": aspect,
                                                    "family": label, "certificate": c.to_json(),
                                                    "replay": r.to_json()})
            return NO
        if rep.status == "holds":
            res = rep.result
            self.v.qualifiers.append(
                f"{rule} ({aspect}): minimum principle holds up to h={res.h} on extent {res.extent} "
                f"over {res.slices_checked} slices of x+W, dim W={W.dim}")
            return YES
        return UNKNOWN


def _set(v: Verdict, aspect: str, value: str):
    if getattr(v, aspect) == UNKNOWN and value != UNKNOWN:
        setattr(v, aspect, value)


def convexity_verdict(P: Polynomial, X: Domain, geom: GeomParams | None = None, _geo=None) -> Verdict:
    """P-convexity for supports and singular supports of X, and surjectivity of P(D)."""
    geom = geom or GeomParams()
    if X.ambient != P.nvars:
        raise ValueError(f"operator has {P.nvars} variables, domain lives in R^{X.ambient}")
    oc = classify_operator(P)
    v = Verdict(operator_class=oc)
    g = _Geometry(X, geom, v, _geo)
    v._geo = g
    n = P.nvars

    def decided():
        return v.supports != UNKNOWN and v.sing_supports != UNKNOWN

    # R1
    if oc.elliptic:
        v.rules.append(RuleEntry("R1", YES, "both"))
        _set(v, "supports", YES)
        _set(v, "sing_supports", YES)

    # R2
    if not decided() and oc.elliptic_along:
        W = oc.acts_along
        out = g.decide(W, "R2", "both", "R2:x+W")
        v.rules.append(RuleEntry("R2", out, "both", f"W dim {W.dim}"))
        _set(v, "supports", out)
        _set(v, "sing_supports", out)

    # R3
    Z = oc.zero_subspace
    if v.supports == UNKNOWN and Z is not None and Z.dim == 1:
        out = g.decide(Z.complement(), "R3", "supports", "R3:characteristic")
        v.rules.append(RuleEntry("R3", out, "supports", f"characteristic normal {np.round(Z.basis[0], 6).tolist()}"))
        _set(v, "supports", out)

    # R4
    sz = oc.sigma_zero
    if v.sing_supports == UNKNOWN and sz is not None and not sz.acting_subspace.is_trivial:
        out = g.decide(sz.acting_subspace, "R4", "sing_supports", "R4:x+W")
        v.rules.append(RuleEntry("R4", out, "sing_supports", f"sigma zero set by rule {sz.rule}"))
        _set(v, "sing_supports", out)

    # R6
    if not decided() and X.is_convex:
        v.rules.append(RuleEntry("R6", YES, "both", type(X).__name__))
        _set(v, "supports", YES)
        _set(v, "sing_supports", YES)

    # R5 (sufficiency only)
    if v.supports == UNKNOWN and Z is not None and not Z.is_full:
        out = g.decide(Z.complement(), "R5", "supports", "R5:supports", iff=False)
        v.rules.append(RuleEntry("R5", out, "supports", f"zero set of P_m has dim {Z.dim}"))
        _set(v, "supports", out)
    if v.sing_supports == UNKNOWN and sz is not None and not sz.subspace.is_full:
        out = g.decide(sz.subspace.complement(), "R5", "sing_supports", "R5:sing", iff=False)
        v.rules.append(RuleEntry("R5", out, "sing_supports", "sigma zero set from the exact table"))
        _set(v, "sing_supports", out)

    v.surjective = surjectivity_verdict(v.supports, v.sing_supports)
    v.rules.append(RuleEntry("S", v.surjective, "surjective"))
    if n and v.surjective == UNKNOWN and not v.rules[:-1]:
        v.qualifiers.append("no rule applies to this operator class")
    return v


def augmented_verdict(P: Polynomial, X: Domain, geom: GeomParams | None = None) -> Verdict:
    """Adds surjectivity of the augmented operator P+(D) on X x R to the base verdict."""
    geom = geom or GeomParams()
    v = convexity_verdict(P, X, geom)
    oc = v.operator_class
    g = v._geo
    Z = oc.zero_subspace
    semi = oc.semi_elliptic is not None and oc.semi_elliptic.accepted

    # supports lift from X to X x R
    if v.supports == YES:
        v.augmented_supports = YES
        v.rules.append(RuleEntry("A-sup", YES, "augmented_supports"))

    if oc.elliptic_along:
        # case i): mirror of the subspace-elliptic equivalence on X x R
        base = v.supports if any(r.id in ("R1", "R2") for r in v.rules) else UNKNOWN
        if base != UNKNOWN:
            _set(v, "augmented_supports", base)
            _set(v, "augmented_sing_supports", base)
            v.rules.append(RuleEntry("A-i", base, "augmented", f"W dim {oc.acts_along.dim}"))

    if semi and Z is not None and not Z.is_full:
        # condition iv) of the semi-elliptic equivalence, evaluated on its own
        out = g.decide(Z.complement(), "A-iv", "augmented_sing_supports", "A-iv:x+Z^perp")
        v.rules.append(RuleEntry("A-iv", out, "augmented_sing_supports", f"Z dim {Z.dim}"))
        _set(v, "augmented_sing_supports", out)
        v.conditions = _semi_elliptic_conditions(oc, X, geom, out, g)
        if Z.dim == 1 and v.surjective == YES:
            v.rules.append(RuleEntry("A-ii", YES, "augmented", "one-dimensional principal zero set"))
            _set(v, "augmented_supports", YES)
            _set(v, "augmented_sing_supports", YES)

    v.augmented_surjective = surjectivity_verdict(v.augmented_supports, v.augmented_sing_supports)
    return v


def _semi_elliptic_conditions(oc: OperatorClass, X: Domain, geom: GeomParams, iv: str, g) -> dict:
    """Independent evaluations of the P_m-convexity conditions for a semi-elliptic P."""
    Pm = principal_part(oc.polynomial)
    try:
        vm = convexity_verdict(Pm, X, geom, _geo=g)
        ii, iii = vm.supports, vm.sing_supports
    except ValueError:
        ii = iii = UNKNOWN
    return {"ii_Pm_supports": ii, "iii_Pm_sing_supports": iii, "iv_min_principle": iv,
            "coherent": len({ii, iii, iv} - {UNKNOWN}) <= 1}
