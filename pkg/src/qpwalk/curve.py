"""Kernel curve analysis: quadratics, branch points, tracing, boundaries.

The kernel of a walk is the polynomial

    Q(x, y) = x*y*(sum_{s,t} x^{-s} y^{-t} p[s][t] - 1)
            = sum_{a,b in {0,1,2}} c[a][b] x^a y^b,

with ``c[a][b] = p[1-a][1-b]`` except ``c[1][1] = p[0][0] - 1``.  A
geometric measure ``rho^i sigma^j`` satisfies the interior balance
equations exactly when ``Q(rho, sigma) = 0``, so the positive branch of
the zero set of Q carries every candidate term.

At fixed x the kernel is a quadratic in y whose discriminant is a quartic
in x; its real roots are the branch points that bound the positive
component of the curve.  The boundary polynomials H and V play the same
role for the balance equations on the two axes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import (
    ComplexRoots,
    EmptyComponent,
    InconsistentSingularity,
    SingularWalk,
)
from .model import WalkSpec, drift, singular_class

REAL_IMAG_TOL = 1e-9     # admit an eigenvalue as a real root candidate below this
UNIT_ROOT_TOL = 1e-8     # |x - 1| below this counts as the unit branch point
DEGREE_DROP_TOL = 1e-12  # leading coefficient cutoff, relative to max |coeff|
DOUBLE_ROOT_TOL = 1e-8   # cluster width for multiplicity detection
ONCURVE_TOL = 1e-10
EQUALITY_TOL = 1e-12     # sub-case boundary p0 = 2*sqrt(pm*pp)


@dataclass(frozen=True)
class KernelPoly:
    """Coefficients ``c[a][b]`` of the kernel polynomial."""

    c: np.ndarray

    @property
    def scale(self) -> float:
        return float(np.abs(self.c).max())

    def value(self, x, y):
        """Evaluate Q; broadcasts over array inputs."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        total = np.zeros(np.broadcast(x, y).shape)
        for a in range(3):
            for b in range(3):
                total += self.c[a, b] * x**a * y**b
        return total if total.shape else float(total)


def kernel(spec: WalkSpec) -> KernelPoly:
    """Kernel polynomial of a nonsingular walk.

    Raises
    ------
    SingularWalk
        If the walk is singular; the branch-point theory below assumes a
        kernel of full degree in both variables.
    """
    sc = singular_class(spec)
    if sc.singular:
        raise SingularWalk(f"{sc.tag}: {sc.reason}")
    c = np.empty((3, 3))
    for a in range(3):
        for b in range(3):
            c[a, b] = spec.p(1 - a, 1 - b)
    c[1, 1] = spec.p(0, 0) - 1.0
    c.flags.writeable = False
    return KernelPoly(c)


def y_quadratic(ker: KernelPoly, x):
    """Coefficients ``(A, B, C)`` of ``Q(x, .)`` as ``A y^2 + B y + C``."""
    x = np.asarray(x, dtype=float)
    c = ker.c
    A = c[0, 2] + x * (c[1, 2] + x * c[2, 2])
    B = c[0, 1] + x * (c[1, 1] + x * c[2, 1])
    C = c[0, 0] + x * (c[1, 0] + x * c[2, 0])
    return A, B, C


def x_quadratic(ker: KernelPoly, y):
    """Coefficients ``(A, B, C)`` of ``Q(., y)`` as ``A x^2 + B x + C``."""
    y = np.asarray(y, dtype=float)
    c = ker.c
    A = c[2, 0] + y * (c[2, 1] + y * c[2, 2])
    B = c[1, 0] + y * (c[1, 1] + y * c[1, 2])
    C = c[0, 0] + y * (c[0, 1] + y * c[0, 2])
    return A, B, C


def disc_y_coeffs(ker: KernelPoly) -> np.ndarray:
    """Ascending coefficients of the quartic ``B(x)^2 - 4 A(x) C(x)``."""
    c = ker.c
    A = np.array([c[0, 2], c[1, 2], c[2, 2]])
    B = np.array([c[0, 1], c[1, 1], c[2, 1]])
    C = np.array([c[0, 0], c[1, 0], c[2, 0]])
    return np.convolve(B, B) - 4.0 * np.convolve(A, C)


def disc_x_coeffs(ker: KernelPoly) -> np.ndarray:
    """Ascending coefficients of the quartic discriminant in y."""
    c = ker.c
    A = np.array([c[2, 0], c[2, 1], c[2, 2]])
    B = np.array([c[1, 0], c[1, 1], c[1, 2]])
    C = np.array([c[0, 0], c[0, 1], c[0, 2]])
    return np.convolve(B, B) - 4.0 * np.convolve(A, C)


def _polyval(coeffs: np.ndarray, x: float) -> float:
    return float(npoly.polyval(x, coeffs))


def quartic_real_roots(coeffs: np.ndarray) -> tuple[list[float], int]:
    """All real roots of a real quartic, with multiplicity, plus the count
    of roots at infinity.

    The polynomial is normalized to monic form and its companion matrix
    eigenvalues are taken; a leading coefficient smaller than
    ``DEGREE_DROP_TOL`` times the largest one drops the degree and records
    a root at infinity instead.  Candidates with small imaginary part are
    polished by Newton iteration on the real axis and accepted only if the
    polished residual vanishes at scale.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    scale = float(np.abs(coeffs).max())
    if scale == 0.0:
        raise ComplexRoots("identically zero discriminant")
    deg = coeffs.size - 1
    n_inf = 0
    while deg > 0 and abs(coeffs[deg]) < DEGREE_DROP_TOL * scale:
        deg -= 1
        n_inf += 1
    if deg == 0:
        return [], n_inf

    monic = coeffs[: deg + 1] / coeffs[deg]
    companion = np.zeros((deg, deg))
    companion[1:, :-1] = np.eye(deg - 1)
    companion[:, -1] = -monic[:deg]
    eigs = np.linalg.eigvals(companion)

    deriv = npoly.polyder(coeffs[: deg + 1])
    roots: list[float] = []
    for z in eigs:
        # Double roots perturb into conjugate pairs with |Im| ~ sqrt(eps),
        # so the pre-filter is loose and the residual test decides.
        if abs(z.imag) > 1e-5 * max(1.0, abs(z)):
            continue
        r = float(z.real)
        for _ in range(60):
            fr = _polyval(coeffs[: deg + 1], r)
            dr = _polyval(deriv, r)
            if dr == 0.0:
                break
            step = fr / dr
            if abs(step) > 1.0 + abs(r):
                break
            r -= step
            if abs(step) <= 1e-16 * max(1.0, abs(r)):
                break
        residual = abs(_polyval(coeffs[: deg + 1], r))
        if residual <= 1e-9 * scale * max(1.0, abs(r)) ** deg:
            roots.append(r)
    if len(roots) != deg:
        raise ComplexRoots(
            f"found {len(roots)} real roots of a degree-{deg} discriminant"
        )
    roots.sort()
    return roots, n_inf


@dataclass(frozen=True)
class RootLabel:
    """Unit-circle position and sign of one branch point."""

    value: float  # math.inf for a root at infinity
    modulus: str  # inside | unit | outside
    sign: str     # negative | zero | positive | infinite

    def to_dict(self) -> dict:
        return {"value": self.value, "modulus": self.modulus, "sign": self.sign}


def _label(value: float) -> RootLabel:
    if math.isinf(value):
        return RootLabel(value, "outside", "infinite")
    if abs(abs(value) - 1.0) <= UNIT_ROOT_TOL:
        modulus = "unit"
    elif abs(value) < 1.0:
        modulus = "inside"
    else:
        modulus = "outside"
    if abs(value) <= DOUBLE_ROOT_TOL:
        sign = "zero"
    elif value > 0:
        sign = "positive"
    else:
        sign = "negative"
    return RootLabel(value, modulus, sign)


def _sign_case(p0: float, pm: float, pp: float) -> str:
    """Sub-case of the pair classification: compare p0 with 2*sqrt(pm*pp)."""
    bound = 2.0 * math.sqrt(pm * pp)
    if abs(p0 - bound) <= EQUALITY_TOL:
        return "b"
    return "a" if p0 > bound else "c"


def _pair_matches_case(labels: list[RootLabel], case: str, inner: bool) -> bool:
    """Check an inside or outside pair against its predicted sign pattern."""
    signs = sorted(lab.sign for lab in labels)
    if case == "a":
        return signs == ["positive", "positive"]
    if case == "c":
        return signs == ["negative", "positive"]
    if inner:
        # Boundary case: one root is zero, the other nonnegative.
        return "zero" in signs and all(s in ("zero", "positive") for s in signs)
    return "infinite" in signs and all(s in ("infinite", "positive") for s in signs)


@dataclass(frozen=True)
class AxisBranchData:
    roots: tuple[float, ...]
    labels: tuple[RootLabel, ...]
    case_inner: str
    case_outer: str
    consistent: bool
    low: float   # branch point just below 1 bounding the positive component
    high: float  # branch point just above 1


def _axis_branch_data(
    coeffs: np.ndarray, cross_drift: float, along_drift: float,
    case_inner: str, case_outer: str,
) -> AxisBranchData:
    finite, n_inf = quartic_real_roots(coeffs)
    values = list(finite) + [math.inf] * n_inf
    labels = [_label(v) for v in values]

    unit = [r for r in finite if abs(r - 1.0) <= UNIT_ROOT_TOL]
    inside = [lab for lab in labels if lab.modulus == "inside"]
    outside = [lab for lab in labels if lab.modulus == "outside"]

    if abs(cross_drift) > UNIT_ROOT_TOL and not unit:
        consistent = (
            len(inside) == 2
            and len(outside) == 2
            and _pair_matches_case(inside, case_inner, inner=True)
            and _pair_matches_case(outside, case_outer, inner=False)
        )
    elif unit:
        # Zero cross drift pins a branch point at 1.  The remaining three
        # split by the sign of the along drift: negative drift leaves two
        # inside the unit circle, positive drift leaves two outside.
        others = [lab for lab in labels if abs(abs(lab.value) - 1.0) > UNIT_ROOT_TOL]
        n_in = sum(1 for lab in others if lab.modulus == "inside")
        n_out = len(others) - n_in
        if along_drift < 0:
            consistent = len(unit) >= 1 and n_in == 2 and n_out == 1
        elif along_drift > 0:
            consistent = len(unit) >= 1 and n_in == 1 and n_out == 2
        else:
            consistent = True  # both drifts vanish: no prediction applies
    else:
        consistent = False

    below = [r for r in finite if r < 1.0 - UNIT_ROOT_TOL]
    above = [r for r in finite if r > 1.0 + UNIT_ROOT_TOL]
    if unit:
        # Decide which side of the unit root the positive component extends.
        probe = _polyval(coeffs, 1.0 + 1e-6)
        if probe > 0.0:
            low = 1.0
            high = min(above) if above else math.inf
        else:
            low = max(below) if below else 0.0
            high = 1.0
    else:
        low = max(below) if below else 0.0
        high = min(above) if above else math.inf
    return AxisBranchData(
        tuple(values), tuple(labels), case_inner, case_outer, consistent, low, high
    )


def _double_root_of_quadratic(A: float, B: float, C: float) -> float:
    """Root of a quadratic at a point where its discriminant vanishes."""
    if abs(A) > 1e-13 * max(abs(A), abs(B), abs(C), 1e-300):
        return -B / (2.0 * A)
    if B != 0.0:
        return -C / B
    return 0.0


@dataclass(frozen=True)
class BranchPointReport:
    """Roots of both discriminants with labels and the four curve corners."""

    roots_x: tuple[float, ...]
    roots_y: tuple[float, ...]
    labels_x: tuple[RootLabel, ...]
    labels_y: tuple[RootLabel, ...]
    case_x_inner: str
    case_x_outer: str
    case_y_inner: str
    case_y_outer: str
    consistent_x: bool
    consistent_y: bool
    x_l: float
    x_r: float
    y_b: float
    y_t: float
    corners: tuple[tuple[float, float], ...]  # left, bottom, right, top

    def to_dict(self) -> dict:
        return {
            "roots_x": list(self.roots_x),
            "roots_y": list(self.roots_y),
            "labels": {
                "x": [lab.to_dict() for lab in self.labels_x],
                "y": [lab.to_dict() for lab in self.labels_y],
                "case_x_inner": self.case_x_inner,
                "case_x_outer": self.case_x_outer,
                "case_y_inner": self.case_y_inner,
                "case_y_outer": self.case_y_outer,
                "consistent_x": self.consistent_x,
                "consistent_y": self.consistent_y,
            },
            "interval": {
                "x_l": self.x_l,
                "x_r": self.x_r,
                "y_b": self.y_b,
                "y_t": self.y_t,
            },
            "corners": [list(c) for c in self.corners],
        }


def branch_points(spec: WalkSpec) -> BranchPointReport:
    """Branch points of both discriminants, classified and with corners.

    The x-roots are the branch points of the algebraic function Y(x), the
    y-roots those of X(y).  For nonzero vertical drift exactly two x-roots
    lie inside and two outside the unit circle (infinity counts as
    outside); the sign patterns of each pair follow from comparing the
    straight-ahead probability with twice the geometric mean of its
    diagonal neighbors.  The corners are the points of the positive
    component where the two y-roots (or x-roots) collide.
    """
    ker = kernel(spec)
    d = drift(spec)

    data_x = _axis_branch_data(
        disc_y_coeffs(ker), d.my, d.mx,
        _sign_case(spec.p(1, 0), spec.p(1, -1), spec.p(1, 1)),
        _sign_case(spec.p(-1, 0), spec.p(-1, -1), spec.p(-1, 1)),
    )
    data_y = _axis_branch_data(
        disc_x_coeffs(ker), d.mx, d.my,
        _sign_case(spec.p(0, 1), spec.p(-1, 1), spec.p(1, 1)),
        _sign_case(spec.p(0, -1), spec.p(-1, -1), spec.p(1, -1)),
    )

    x_l, x_r = data_x.low, data_x.high
    y_b, y_t = data_y.low, data_y.high

    y_l = _double_root_of_quadratic(*(float(v) for v in y_quadratic(ker, x_l)))
    y_r = (
        _double_root_of_quadratic(*(float(v) for v in y_quadratic(ker, x_r)))
        if math.isfinite(x_r)
        else math.nan
    )
    x_b = _double_root_of_quadratic(*(float(v) for v in x_quadratic(ker, y_b)))
    x_t = (
        _double_root_of_quadratic(*(float(v) for v in x_quadratic(ker, y_t)))
        if math.isfinite(y_t)
        else math.nan
    )

    return BranchPointReport(
        roots_x=data_x.roots,
        roots_y=data_y.roots,
        labels_x=data_x.labels,
        labels_y=data_y.labels,
        case_x_inner=data_x.case_inner,
        case_x_outer=data_x.case_outer,
        case_y_inner=data_y.case_inner,
        case_y_outer=data_y.case_outer,
        consistent_x=data_x.consistent,
        consistent_y=data_y.consistent,
        x_l=x_l,
        x_r=x_r,
        y_b=y_b,
        y_t=y_t,
        corners=((x_l, y_l), (x_b, y_b), (x_r, y_r), (x_t, y_t)),
    )


def _y_roots_on_interval(ker: KernelPoly, xs: np.ndarray):
    """Stable lower and upper y-roots of the kernel along an x-grid.

    Negative discriminant values within rounding of zero are clipped; the
    quadratic formula uses the sign trick to avoid cancellation.
    """
    A, B, C = y_quadratic(ker, xs)
    disc = B * B - 4.0 * A * C
    clip = 1e-13 * ker.scale**2 * np.maximum(1.0, xs) ** 4
    disc = np.where(disc > -clip, np.maximum(disc, 0.0), disc)
    valid = disc >= 0.0
    sq = np.sqrt(np.maximum(disc, 0.0))
    q = -0.5 * (B + np.where(B >= 0.0, 1.0, -1.0) * sq)

    tiny = 1e-300
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = np.where(np.abs(A) > tiny, q / np.where(A == 0.0, 1.0, A), np.nan)
        r2 = np.where(np.abs(q) > tiny, C / np.where(q == 0.0, 1.0, q), np.nan)
    # Degree drops: A ~ 0 leaves the single root -C/B, q ~ 0 means C ~ 0
    # so y = 0 pairs with -B/A.
    linear = np.abs(A) <= 1e-14 * ker.scale * np.maximum(1.0, xs) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        lin_root = np.where(B != 0.0, -C / np.where(B == 0.0, 1.0, B), 0.0)
    r1 = np.where(linear, lin_root, r1)
    r2 = np.where(linear, lin_root, r2)
    both = np.isnan(r2) & ~np.isnan(r1)
    r2 = np.where(both, np.where(np.abs(A) > tiny, 0.0 * r1, r1), r2)
    r1 = np.where(np.isnan(r1), r2, r1)

    lower = np.minimum(r1, r2)
    upper = np.maximum(r1, r2)
    return lower, upper, valid


@dataclass(frozen=True)
class QPlusTrace:
    """Ordered closed-loop sample of the positive curve component."""

    points: np.ndarray  # (N, 2)
    arcs: tuple[str, ...]  # per point: Q00 | Q10 | Q11 | Q01
    report: BranchPointReport

    def arc_points(self, name: str) -> np.ndarray:
        mask = np.array([a == name for a in self.arcs])
        return self.points[mask]


def _trace_grid(x_l: float, x_r: float, n_points: int) -> np.ndarray:
    # Chebyshev clustering concentrates samples at the corners where the
    # two y-roots collide and the curve turns vertical.
    k = np.arange(n_points)
    theta = np.pi * (1.0 - k / (n_points - 1))
    xs = 0.5 * (x_l + x_r) + 0.5 * (x_r - x_l) * np.cos(theta)
    extra = [np.array([1.0])] if x_l < 1.0 < x_r else []
    # Square-law ladders refine the first and last base segments further.
    u = np.linspace(0.0, 1.0, 33)[1:-1] ** 2
    span = x_r - x_l
    first = x_l + (xs[1] - x_l) * u
    last = x_r - (x_r - xs[-2]) * u
    xs = np.concatenate([xs, first, last] + extra)
    xs = np.unique(np.clip(xs, x_l, x_r))
    if span > 0:
        keep = np.concatenate([[True], np.diff(xs) > 1e-15 * max(1.0, abs(x_r))])
        xs = xs[keep]
    return xs


def trace_qplus(spec: WalkSpec, n_points: int = 2048) -> QPlusTrace:
    """Trace the positive component of the kernel curve as a closed loop.

    Samples x between the two central branch points, takes both real
    y-roots, and orders the points along the loop starting at the left
    corner and running through the lower branch first.  Arc labels split
    the loop at the four corners: Q00 from the left corner down to the
    bottom corner, Q10 up to the right corner, Q11 on to the top corner
    and Q01 back to the left corner.

    Raises
    ------
    EmptyComponent
        If no real points are found; the positive component of an ergodic
        nonsingular walk is never empty, so this signals a failure worth
        surfacing.
    """
    report = branch_points(spec)
    ker = kernel(spec)
    x_l, x_r = report.x_l, report.x_r
    if not (math.isfinite(x_l) and math.isfinite(x_r)) or x_r <= x_l:
        raise EmptyComponent(f"degenerate branch interval [{x_l}, {x_r}]")

    xs = _trace_grid(x_l, x_r, n_points)
    lower, upper, valid = _y_roots_on_interval(ker, xs)
    if not valid.any():
        raise EmptyComponent("no real y-roots between the branch points")
    xs, lower, upper = xs[valid], lower[valid], upper[valid]

    residual_scale = ker.scale * (1.0 + xs**2)
    ok_low = np.abs(ker.value(xs, lower)) <= ONCURVE_TOL * residual_scale * (1.0 + lower**2)
    ok_up = np.abs(ker.value(xs, upper)) <= ONCURVE_TOL * residual_scale * (1.0 + upper**2)

    x_b = report.corners[1][0]
    x_t = report.corners[3][0]

    pts: list[tuple[float, float]] = []
    arcs: list[str] = []
    for x, y in zip(xs[ok_low], lower[ok_low]):
        pts.append((float(x), float(y)))
        arcs.append("Q00" if x <= x_b else "Q10")
    for x, y in zip(xs[ok_up][::-1], upper[ok_up][::-1]):
        pts.append((float(x), float(y)))
        arcs.append("Q11" if x >= x_t else "Q01")
    if not pts:
        raise EmptyComponent("all sampled points failed the on-curve residual")
    return QPlusTrace(np.array(pts), tuple(arcs), report)


def detect_singularity(spec: WalkSpec) -> Optional[tuple[float, float]]:
    """Self-intersection of the curve in the closed unit square, if any.

    The curve has one exactly when the walk takes no north, northeast or
    east interior steps, in which case both branches pass through the
    origin.  The symbolic support test is cross-checked numerically: Q and
    both partials must vanish at the reported point and the Hessian
    determinant must be negative (two real crossing branches, not an
    isolated point or a cusp).

    Raises
    ------
    InconsistentSingularity
        If the symbolic and numeric verdicts disagree, or the crossing
        fails the negative-Hessian test.
    """
    ker = kernel(spec)
    c = ker.c
    symbolic = spec.p(1, 0) == 0.0 and spec.p(1, 1) == 0.0 and spec.p(0, 1) == 0.0
    # Q(0,0) = c00, Qx(0,0) = c10, Qy(0,0) = c01.
    numeric = max(abs(c[0, 0]), abs(c[1, 0]), abs(c[0, 1])) <= 1e-12
    if symbolic != numeric:
        raise InconsistentSingularity(
            f"support test says {symbolic}, derivative test says {numeric}"
        )
    if not symbolic:
        return None
    hessian_det = 4.0 * c[2, 0] * c[0, 2] - c[1, 1] ** 2
    if not hessian_det < -1e-12:
        raise InconsistentSingularity(
            f"origin crossing is not a two-branch node: Hessian det {hessian_det}"
        )
    return (0.0, 0.0)


def boundary_h(spec: WalkSpec, x, y):
    """Horizontal-axis balance polynomial.

    ``boundary_h(rho, sigma) = 0`` says the geometric term ``rho^i sigma^j``
    satisfies the balance equation on the horizontal axis by itself.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    total = -x
    for s in (-1, 0, 1):
        total = total + x ** (1 - s) * (spec.h(s) + y * spec.p(s, -1))
    return total if np.ndim(total) else float(total)


def boundary_v(spec: WalkSpec, x, y):
    """Vertical-axis balance polynomial, the mirror image of boundary_h."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    total = -y
    for t in (-1, 0, 1):
        total = total + y ** (1 - t) * (spec.v(t) + x * spec.p(-1, t))
    return total if np.ndim(total) else float(total)


@dataclass(frozen=True)
class Intersection:
    """A point of the positive curve component on one boundary polynomial."""

    x: float
    y: float
    which: str  # "H" | "V"

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "which": self.which}


U_MARGIN = 1e-9
_BISECT_STEPS = 200


def curve_boundary_intersections(
    spec: WalkSpec, n_samples: int = 4001
) -> list[Intersection]:
    """All boundary zeros on the positive curve component inside the open
    unit square.

    Scans both branches of the curve for sign changes of each boundary
    polynomial and bisects each bracket down to machine width.  The point
    (1, 1) always solves the interior balance but lies on the closed
    square's boundary, so it is excluded along with everything else within
    ``U_MARGIN`` of the unit square's edge.
    """
    report = branch_points(spec)
    ker = kernel(spec)
    x_l, x_r = report.x_l, report.x_r
    xs = _trace_grid(x_l, x_r, n_samples)
    lower, upper, valid = _y_roots_on_interval(ker, xs)
    xs, lower, upper = xs[valid], lower[valid], upper[valid]

    def branch_root(x: float, use_lower: bool) -> float:
        lo, up, _ = _y_roots_on_interval(ker, np.array([x]))
        return float(lo[0] if use_lower else up[0])

    found: list[Intersection] = []
    for which, poly in (("H", boundary_h), ("V", boundary_v)):
        for use_lower, ys in ((True, lower), (False, upper)):
            vals = poly(spec, xs, ys)
            signs = np.sign(vals)
            for i in np.flatnonzero(signs[:-1] * signs[1:] < 0):
                a, b = float(xs[i]), float(xs[i + 1])
                fa = float(vals[i])
                for _ in range(_BISECT_STEPS):
                    mid = 0.5 * (a + b)
                    fm = float(poly(spec, mid, branch_root(mid, use_lower)))
                    if fa * fm <= 0.0:
                        b = mid
                    else:
                        a, fa = mid, fm
                    if b - a <= 1e-15 * max(1.0, abs(b)):
                        break
                x_star = 0.5 * (a + b)
                y_star = branch_root(x_star, use_lower)
                if not (
                    U_MARGIN < x_star < 1.0 - U_MARGIN
                    and U_MARGIN < y_star < 1.0 - U_MARGIN
                ):
                    continue
                if any(
                    inter.which == which
                    and abs(inter.x - x_star) <= 1e-10
                    and abs(inter.y - y_star) <= 1e-10
                    for inter in found
                ):
                    continue
                found.append(Intersection(x_star, y_star, which))
    found.sort(key=lambda p: (p.which, p.x, p.y))
    return found
