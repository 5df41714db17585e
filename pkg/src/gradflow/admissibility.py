"""Admissibility measure of a gradient flow for the unicycle.

For a potential V on a box X the cost is the normalized integral

    J_X[V] = (1/mu(X)) * integral over X of rho(x, grad V(x))^q / |grad V(x)|^q

where rho(x, p) is the distance from -p to span{f1(x), f2(x)}, i.e. the
part of the requested gradient direction the unicycle cannot realize
instantaneously. With controls unrestricted (U = R^2) the infimum has the
closed form rho(x, p) = |p1*sin x3 - p2*cos x3|; a brute-force minimizer
over u is kept alongside as an independent oracle.

J is zero iff the gradient flow is realizable everywhere; for q = 2 the
integrand lies in [0, 1], hence J in [0, 1]. Multiplying V by a positive
constant leaves J unchanged.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from gradflow import _kernels
from gradflow.kinematics import as_state, vector_fields
from gradflow.potential import Potential, make_quadratic

MC_CHUNK = 1 << 18  # fixed Monte-Carlo reduction chunk, independent of workers

# Coefficient triples (c1, c2, c3) of the published quadratic-form sweep,
# in presentation order.
TABLE1_COEFFS = (
    (1.0, 1.0, 1.0),
    (2.0, 1.0, 1.0),
    (0.5, 1.0, 1.0),
    (1.0, 2.0, 1.0),
    (1.0, 0.5, 1.0),
    (1.0, 1.0, 2.0),
    (1.0, 1.0, 0.5),
)

SWEEP_CSV_HEADER = "c1,c2,c3,q,method,points,J,stderr,excluded"


@dataclass(frozen=True)
class BoxDomain:
    """Axis-aligned box lo <= x <= hi with positive volume."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", as_state(self.lo))
        object.__setattr__(self, "hi", as_state(self.hi))
        self.lo.flags.writeable = False
        self.hi.flags.writeable = False
        if not np.all(self.lo < self.hi):
            raise ValueError("box requires lo < hi componentwise")

    @property
    def measure(self) -> float:
        return float(np.prod(self.hi - self.lo))

    @classmethod
    def cube(cls, half_width: float = 1.0) -> "BoxDomain":
        """The symmetric cube [-w, w]^3."""
        if not half_width > 0:
            raise ValueError(f"half_width must be positive, got {half_width}")
        w = float(half_width)
        return cls(lo=np.full(3, -w), hi=np.full(3, w))


@dataclass(frozen=True)
class AdmissibilityConfig:
    """Quadrature settings for the admissibility integral.

    grid_n is the midpoint cell count per axis and must be even so cell
    centers avoid the origin, where grad V vanishes for the quadratic
    families. grad_floor excludes points with |grad V| at or below it from
    the integrand (they contribute zero and are counted separately).
    """

    q: float = 2.0
    method: str = "midpoint"
    grid_n: int = 200
    samples: int = 1_000_000
    seed: int = 2025
    grad_floor: float = 1e-12

    def __post_init__(self):
        if not self.q > 0:
            raise ValueError(f"exponent q must be positive, got {self.q}")
        if self.method not in ("midpoint", "monte_carlo"):
            raise ValueError(f"method must be 'midpoint' or 'monte_carlo', got {self.method!r}")
        if not (isinstance(self.grid_n, int) and self.grid_n >= 2 and self.grid_n % 2 == 0):
            raise ValueError(f"grid_n must be an even integer >= 2, got {self.grid_n}")
        if not (isinstance(self.samples, int) and self.samples >= 1):
            raise ValueError(f"samples must be a positive integer, got {self.samples}")
        if not self.grad_floor >= 0:
            raise ValueError(f"grad_floor must be nonnegative, got {self.grad_floor}")


@dataclass(frozen=True)
class AdmissibilityResult:
    """Quadrature estimate of J plus audit counters.

    stderr is the Monte-Carlo standard error (None for midpoint); excluded
    counts quadrature points dropped by the gradient floor.
    """

    value: float
    points: int
    excluded: int
    method: str
    stderr: float | None = None

    def __float__(self) -> float:
        return self.value


def rho(x, p) -> float:
    """Distance from -p to span{f1(x), f2(x)}: |p1*sin x3 - p2*cos x3|."""
    x = as_state(x)
    p = np.asarray(p, dtype=float)
    return abs(p[0] * math.sin(x[2]) - p[1] * math.cos(x[2]))


def rho_bruteforce(x, p, coarse_range: float | None = None,
                   refine_iters: int = 4, grid_points: int = 51) -> float:
    """Independent oracle: minimize |u1*f1(x) + u2*f2(x) + p| over u by search.

    Nested grid search: a grid_points^2 grid over the square of half-width
    coarse_range, re-centered on the best point and shrunk 10x for each of
    refine_iters refinements. coarse_range must be at least |p| so the
    square contains the unconstrained minimizer; by default it is
    max(1, |p|).
    """
    x = as_state(x)
    p = np.asarray(p, dtype=float)
    p_norm = float(np.linalg.norm(p))
    if coarse_range is None:
        coarse_range = max(1.0, p_norm)
    elif coarse_range < p_norm:
        raise ValueError(
            f"coarse_range={coarse_range} must cover |p|={p_norm} so the "
            f"minimizer lies inside the search box"
        )
    f1, f2 = vector_fields(x)
    c1 = c2 = 0.0
    half = float(coarse_range)
    best = math.inf
    for _ in range(refine_iters + 1):
        g1 = np.linspace(c1 - half, c1 + half, grid_points)
        g2 = np.linspace(c2 - half, c2 + half, grid_points)
        u1 = np.repeat(g1, grid_points)
        u2 = np.tile(g2, grid_points)
        res = (np.outer(u1, f1) + np.outer(u2, f2)) + p
        norms = np.sqrt(np.einsum("ij,ij->i", res, res))
        i = int(np.argmin(norms))
        best = min(best, float(norms[i]))
        c1, c2 = float(u1[i]), float(u2[i])  # re-center, then shrink 10x
        half /= 10.0
    return best


def _grid_centers(lo: float, hi: float, n: int) -> np.ndarray:
    step = (hi - lo) / n
    return lo + (np.arange(n) + 0.5) * step


def _generic_integrand(potential: Potential, pts: np.ndarray, q: float,
                       grad_floor: float):
    """Integrand values over pts for a potential without quadratic coeffs."""
    grads = _gradient_batch(potential, pts)
    gn = np.sqrt(np.einsum("ij,ij->i", grads, grads))
    keep = gn > grad_floor
    num = np.abs(grads[:, 0] * np.sin(pts[:, 2]) - grads[:, 1] * np.cos(pts[:, 2]))
    r = np.where(keep, num / np.where(keep, gn, 1.0), 0.0)
    vals = r * r if q == 2.0 else r ** q
    return vals, int(np.count_nonzero(~keep))


def _gradient_batch(potential: Potential, pts: np.ndarray) -> np.ndarray:
    try:
        g = np.asarray(potential.gradient(pts), dtype=float)
        if g.shape == pts.shape:
            return g
    except Exception:
        pass
    return np.stack([np.asarray(potential.gradient(p), dtype=float) for p in pts])


def admissibility_measure(potential: Potential, domain: BoxDomain | None = None,
                          cfg: AdmissibilityConfig | None = None,
                          jobs: int = 1) -> AdmissibilityResult:
    """Estimate J over `domain` (default [-1, 1]^3) with settings `cfg`.

    Midpoint: tensor grid of cell centers, grid_n per axis, accumulated in
    x3-slab order. Monte Carlo: `samples` uniform draws from a Philox
    stream keyed by `seed`, reduced in fixed-size chunks so the estimate is
    independent of `jobs`. Raises if every point is excluded by the
    gradient floor (the potential is flat on the domain).
    """
    domain = BoxDomain.cube(1.0) if domain is None else domain
    cfg = AdmissibilityConfig() if cfg is None else cfg
    if cfg.method == "midpoint":
        value, points, excluded = _midpoint(potential, domain, cfg)
        stderr = None
    else:
        value, points, excluded, stderr = _monte_carlo(potential, domain, cfg, jobs)
    if excluded >= points:
        raise ValueError(
            "all quadrature points were excluded by the gradient floor; "
            "the potential is degenerate on this domain"
        )
    return AdmissibilityResult(value=value, points=points, excluded=excluded,
                               method=cfg.method, stderr=stderr)


def _midpoint(potential, domain, cfg):
    n = cfg.grid_n
    xs1 = _grid_centers(domain.lo[0], domain.hi[0], n)
    xs2 = _grid_centers(domain.lo[1], domain.hi[1], n)
    xs3 = _grid_centers(domain.lo[2], domain.hi[2], n)
    points = n ** 3
    if potential.coeffs is not None:
        c1, c2, c3 = potential.coeffs
        total, excluded = _kernels.midpoint_quadratic(
            xs1, xs2, xs3, c1, c2, c3, cfg.q, cfg.grad_floor
        )
    else:
        total = 0.0
        excluded = 0
        plane = np.empty((n * n, 3))
        plane[:, 0] = np.repeat(xs1, n)
        plane[:, 1] = np.tile(xs2, n)
        for x3 in xs3:
            plane[:, 2] = x3
            vals, exc = _generic_integrand(potential, plane, cfg.q, cfg.grad_floor)
            total += float(vals.sum())
            excluded += exc
    return total / points, points, excluded


def _monte_carlo(potential, domain, cfg, jobs):
    rng = np.random.Generator(np.random.Philox(cfg.seed))
    pts = rng.uniform(size=(cfg.samples, 3))
    pts = domain.lo + pts * (domain.hi - domain.lo)
    chunks = [pts[i:i + MC_CHUNK] for i in range(0, cfg.samples, MC_CHUNK)]

    if potential.coeffs is not None:
        c1, c2, c3 = potential.coeffs

        def eval_chunk(chunk):
            return _kernels.mc_chunk_quadratic(chunk, c1, c2, c3, cfg.q, cfg.grad_floor)
    else:
        def eval_chunk(chunk):
            vals, exc = _generic_integrand(potential, chunk, cfg.q, cfg.grad_floor)
            return float(vals.sum()), float((vals * vals).sum()), exc

    if jobs > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            partials = list(pool.map(eval_chunk, chunks))
    else:
        partials = [eval_chunk(chunk) for chunk in chunks]

    total = 0.0
    total_sq = 0.0
    excluded = 0
    for s, s2, exc in partials:  # chunk index order, independent of jobs
        total += s
        total_sq += s2
        excluded += exc
    n = cfg.samples
    mean = total / n
    if n > 1:
        var = max(total_sq - total * total / n, 0.0) / (n - 1)
        stderr = math.sqrt(var / n)
    else:
        stderr = math.inf
    return mean, n, excluded, stderr


def table1(domain: BoxDomain | None = None, cfg: AdmissibilityConfig | None = None,
           jobs: int = 1) -> list[tuple[tuple[float, float, float], AdmissibilityResult]]:
    """Evaluate J for the published seven-triple quadratic sweep.

    Defaults reproduce the reference setting: X = [-1, 1]^3, q = 2,
    unrestricted controls, 200 midpoint cells per axis.
    """
    domain = BoxDomain.cube(1.0) if domain is None else domain
    cfg = AdmissibilityConfig() if cfg is None else cfg

    def cell(coeffs):
        potential = make_quadratic(*coeffs)
        return coeffs, admissibility_measure(potential, domain, cfg)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(cell, TABLE1_COEFFS))
    return [cell(coeffs) for coeffs in TABLE1_COEFFS]


def write_sweep_csv(rows, path) -> None:
    """Write sweep results as CSV rows (c1,c2,c3,q,method,points,J,stderr,excluded).

    `rows` is an iterable of (coeffs, q, result) triples; stderr is left
    empty for midpoint estimates.
    """
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(SWEEP_CSV_HEADER + "\n")
        for coeffs, q, res in rows:
            stderr = "" if res.stderr is None else format(res.stderr, ".9g")
            f.write(
                f"{coeffs[0]:.9g},{coeffs[1]:.9g},{coeffs[2]:.9g},{q:.9g},"
                f"{res.method},{res.points},{res.value:.9g},{stderr},{res.excluded}\n"
            )
