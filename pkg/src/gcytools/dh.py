"""
Duistermaat-Heckman check on the polydisc with the diagonal circle action.

Two estimators run on independent random streams:

* ``pushforward_density`` bins uniform samples by the moment map and
  weights them by the natural volume density, giving f(a).
* ``reduced_volume`` keeps samples in a slab around each level and weights
  them by the volume density of the reduced spinor (obtained through
  :func:`gcytools.reduction.reduce`) over the local coordinate Jacobian.

Lattice normalisation: the generator acts by z -> exp(2 pi i t) z, so the
fundamental field and moment map carry a factor 2 pi and the orbits have
Haar volume 1. With that choice f = 1 on the disc and f(a) = -a on the
bidisc.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ContractError, DomainError
from .multivector import ComplexForm, mukai_pair
from .reduction import reduce
from .scenarios import ScenarioDomain, fiber_spinor, kernel_eval, moment_point_data
from .spinor import RTOL, is_gcy, type_of

LATTICE_SCALE = 2.0 * math.pi
CRITICAL_MARGIN = 0.05
CHUNK = 1 << 17


def volume_density(phi: ComplexForm, k: int, rtol: float = RTOL) -> float:
    """Coefficient of (i^n / 2^(n-k)) <phi, phibar> against e^1 ^ ... ^ e^2n."""
    if phi.dim % 2:
        raise DomainError("volume density needs an even-dimensional space")
    if not is_gcy(phi, rtol):
        raise DomainError("volume density needs a generalized Calabi-Yau spinor")
    actual = type_of(phi, rtol, check_pure=False)
    if actual != k:
        raise DomainError(f"spinor has type {actual}, not {k}")
    n = phi.dim // 2
    val = (1j**n / 2.0 ** (n - k)) * mukai_pair(phi, phi.conjugate())
    if abs(val.imag) > 1e-9 * max(1.0, abs(val)):
        raise ArithmeticError(f"volume density is not real: {val}")
    return float(val.real)


def liouville_density(omega_matrix: np.ndarray) -> float:
    """Coefficient of omega^n / n! against the coordinate volume: Pf(omega)."""
    M = np.asarray(omega_matrix, dtype=float)
    N = M.shape[0]
    if N % 2:
        raise DomainError("odd dimension")
    # Pfaffian via the skew-symmetric Parlett-Reid elimination
    A = M.copy()
    pf = 1.0
    for k in range(0, N - 1, 2):
        p = k + 1 + int(np.argmax(np.abs(A[k, k + 1 :])))
        if p != k + 1:
            A[[k + 1, p]] = A[[p, k + 1]]
            A[:, [k + 1, p]] = A[:, [p, k + 1]]
            pf = -pf
        if A[k, k + 1] == 0.0:
            return 0.0
        pf *= A[k, k + 1]
        if k + 2 < N:
            tau = A[k, k + 2 :] / A[k, k + 1]
            A[k + 2 :, k + 2 :] += np.outer(tau, A[k + 2 :, k + 1]) - np.outer(A[k + 2 :, k + 1], tau)
    return float(pf)


@dataclass(frozen=True)
class DHScenario:
    """Polydisc D^n with the diagonal circle action on all coordinates."""

    n: int
    kind: str = "polydisc"

    def __post_init__(self):
        if self.kind != "polydisc":
            raise ContractError("the DH experiment is implemented for the polydisc only")
        if self.n < 1:
            raise ContractError("need n >= 1")

    def moment(self, z: np.ndarray) -> np.ndarray:
        """Lattice-normalised moment map on an (S, n) array of points."""
        a = np.abs(z) ** 2
        return -LATTICE_SCALE * np.sum(a / (1.0 - a), axis=1)

    def density_closed_form(self, z: np.ndarray) -> np.ndarray:
        """prod_j 1/(1-|z_j|^2)^2; multiply by :meth:`density_scale` for dm."""
        return np.prod(1.0 / (1.0 - np.abs(z) ** 2) ** 2, axis=1)

    def density_scale(self) -> float:
        origin = ScenarioDomain("polydisc", 0, self.n, (0.0,) * self.n)
        return volume_density(fiber_spinor(origin), 0)

    def density_at(self, point) -> float:
        """dm at a single point through the spinor route."""
        dom = ScenarioDomain("polydisc", 0, self.n, tuple(point))
        return volume_density(fiber_spinor(dom, kernel_eval(dom)), 0)

    def region_radius(self, a_lo: float) -> float:
        """Radius r with mu_L >= a_lo contained in the polydisc of radius r."""
        T = -a_lo / LATTICE_SCALE
        if T <= 0:
            return 0.0
        return math.sqrt(T / (1.0 + T))

    def exact_density(self, a) -> np.ndarray:
        """Analytic f(a) = (-a)^(n-1)/(n-1)! for a < 0 and 0 otherwise."""
        a = np.asarray(a, dtype=float)
        return np.where(a < 0, (-a) ** (self.n - 1) / math.factorial(self.n - 1), 0.0)


@dataclass(frozen=True)
class DHConfig:
    samples: int
    bins: tuple
    seed: int = 0
    level_thickness: float | None = None
    partitions: int = 4
    reduced_samples: int = 50_000
    workers: int = 1
    sigmas: float = 3.0
    slack: float = 0.0

    def __post_init__(self):
        edges = tuple(float(b) for b in self.bins)
        object.__setattr__(self, "bins", edges)
        object.__setattr__(self, "samples", int(self.samples))
        object.__setattr__(self, "reduced_samples", int(self.reduced_samples))
        if self.samples <= 0 or self.reduced_samples <= 0:
            raise ContractError("sample counts must be positive")
        if len(edges) < 2 or any(b <= a for a, b in zip(edges, edges[1:])):
            raise ContractError("bin edges must be strictly increasing")
        if self.partitions < 1 or self.workers < 1:
            raise ContractError("partitions and workers must be positive")
        if self.level_thickness is not None and self.level_thickness <= 0:
            raise ContractError("level_thickness must be positive")
        if self.sigmas <= 0 or self.slack < 0:
            raise ContractError("sigmas must be positive and slack non-negative")

    @classmethod
    def uniform(cls, lo: float, hi: float, nbins: int, **kw) -> "DHConfig":
        return cls(bins=tuple(np.linspace(lo, hi, nbins + 1)), **kw)

    @property
    def edges(self) -> np.ndarray:
        return np.array(self.bins)

    @property
    def centers(self) -> np.ndarray:
        e = self.edges
        return 0.5 * (e[:-1] + e[1:])

    @property
    def thickness(self) -> float:
        if self.level_thickness is not None:
            return self.level_thickness
        return 0.5 * float(np.min(np.diff(self.edges)))


@dataclass
class DHReport:
    config: dict
    bin_centers: list
    f_hat: list
    vol_hat: list = field(default_factory=list)
    stderr: list = field(default_factory=list)
    f_stderr: list = field(default_factory=list)
    vol_stderr: list = field(default_factory=list)
    rel_error: list = field(default_factory=list)
    counts: list = field(default_factory=list)
    slab_counts: list = field(default_factory=list)
    flags: list = field(default_factory=list)
    passed: bool | None = None
    normalization: str = "lattice: xi and mu scaled by 2*pi, orbit volume 1"
    timings: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


def _split(total: int, parts: int) -> list[int]:
    base, extra = divmod(total, parts)
    return [base + (1 if i < extra else 0) for i in range(parts)]


def _streams(seed: int, partitions: int):
    root = np.random.SeedSequence(seed)
    push, red = root.spawn(2)
    return push.spawn(partitions), red.spawn(partitions)


def _uniform_polydisc(rng: np.random.Generator, count: int, n: int, R: float) -> np.ndarray:
    r = R * np.sqrt(rng.random((count, n)))
    return r * np.exp(2j * np.pi * rng.random((count, n)))


def _map_partitions(fn, jobs, workers: int):
    if workers == 1:
        return [fn(*j) for j in jobs]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(lambda j: fn(*j), jobs))


def _bin_flags(sc: DHScenario, edges: np.ndarray) -> list[str]:
    flags = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        if lo >= 0:
            flags.append("outside_image")
        elif hi > -CRITICAL_MARGIN:
            flags.append("critical")
        else:
            flags.append("")
    return flags


def _push_partition(sc: DHScenario, seq, count: int, edges: np.ndarray, R: float):
    rng = np.random.default_rng(seq)
    nb = len(edges) - 1
    s1 = np.zeros(nb)
    s2 = np.zeros(nb)
    hits = np.zeros(nb, dtype=np.int64)
    done = 0
    while done < count:
        c = min(CHUNK, count - done)
        z = _uniform_polydisc(rng, c, sc.n, R)
        mu = sc.moment(z)
        w = sc.density_closed_form(z)
        idx = np.searchsorted(edges, mu, side="right") - 1
        ok = (idx >= 0) & (idx < nb)
        s1 += np.bincount(idx[ok], weights=w[ok], minlength=nb)
        s2 += np.bincount(idx[ok], weights=w[ok] ** 2, minlength=nb)
        hits += np.bincount(idx[ok], minlength=nb)
        done += c
    return s1, s2, hits


def pushforward_density(sc: DHScenario, cfg: DHConfig) -> DHReport:
    """Monte-Carlo estimate of f with per-bin standard errors."""
    t0 = time.perf_counter()
    edges = cfg.edges
    widths = np.diff(edges)
    nb = len(widths)
    R = sc.region_radius(edges[0])
    flags = _bin_flags(sc, edges)
    if R == 0.0:
        z = np.zeros(nb)
        return DHReport(_config_dict(sc, cfg), cfg.centers.tolist(), z.tolist(), f_stderr=z.tolist(),
                        counts=[0] * nb, flags=flags)
    push, _ = _streams(cfg.seed, cfg.partitions)
    jobs = [(sc, s, c, edges, R) for s, c in zip(push, _split(cfg.samples, cfg.partitions))]
    s1 = np.zeros(nb)
    s2 = np.zeros(nb)
    hits = np.zeros(nb, dtype=np.int64)
    for a, b, h in _map_partitions(_push_partition, jobs, cfg.workers):
        s1 += a
        s2 += b
        hits += h
    N = cfg.samples
    vol = (math.pi * R * R) ** sc.n
    c = sc.density_scale()
    mean = s1 / N
    var = np.maximum(s2 / N - mean**2, 0.0)
    f = c * vol * mean / widths
    se = c * vol * np.sqrt(var / N) / widths
    flags = [fl or ("empty" if h == 0 else "") for fl, h in zip(flags, hits)]
    return DHReport(
        _config_dict(sc, cfg), cfg.centers.tolist(), f.tolist(), f_stderr=se.tolist(),
        counts=hits.tolist(), flags=flags, timings={"pushforward_s": time.perf_counter() - t0},
    )


def reduced_density(sc: DHScenario, point) -> float:
    """Density of dm_a at the level through ``point`` w.r.t. coordinate volume.

    The coordinate volume splits as |det[Q | xi | g]| dq dtau dmu, where Q
    spans the reduced slice, tau is the orbit parameter and g satisfies
    dmu(g) = 1. Dividing the reduced volume density by the Jacobian gives
    a weight whose slab average, divided by the slab width, is vol(M_a).
    """
    dom = ScenarioDomain("polydisc", 0, sc.n, tuple(point))
    d = moment_point_data(dom, scale=LATTICE_SCALE)
    res = reduce(d)
    rho = volume_density(res.reduced_phi, res.reduced_type)
    dmu = d.dmu[0]
    g = dmu / (dmu @ dmu)
    J = np.column_stack([res.quotient_basis, d.xi_M[0], g])
    # orientation is immaterial for a measure
    return abs(rho) / abs(np.linalg.det(J))


def _reduced_partition(sc: DHScenario, seq, count: int, centers: np.ndarray, h: float, R: float):
    rng = np.random.default_rng(seq)
    nb = len(centers)
    s1 = np.zeros(nb)
    s2 = np.zeros(nb)
    hits = np.zeros(nb, dtype=np.int64)
    done = 0
    while done < count:
        c = min(CHUNK, count - done)
        z = _uniform_polydisc(rng, c, sc.n, R)
        mu = sc.moment(z)
        near = np.abs(mu[:, None] - centers[None, :]) <= h
        rows = np.flatnonzero(near.any(axis=1))
        for i in rows:
            w = reduced_density(sc, z[i])
            for b in np.flatnonzero(near[i]):
                s1[b] += w
                s2[b] += w * w
                hits[b] += 1
        done += c
    return s1, s2, hits


def reduced_volumes(sc: DHScenario, centers, cfg: DHConfig) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Slab estimates of vol(M_a) at each centre: (values, stderr, slab counts)."""
    centers = np.atleast_1d(np.asarray(centers, dtype=float))
    h = cfg.thickness
    for a in centers:
        if abs(a) <= h:
            raise DomainError(f"level {a} is within the slab width of the critical value 0")
    nb = len(centers)
    inside = centers < 0
    if not inside.any():
        return np.zeros(nb), np.zeros(nb), np.zeros(nb, dtype=np.int64)
    R = sc.region_radius(float(centers[inside].min()) - h)
    _, red = _streams(cfg.seed, cfg.partitions)
    jobs = [(sc, s, c, centers, h, R) for s, c in zip(red, _split(cfg.reduced_samples, cfg.partitions))]
    s1 = np.zeros(nb)
    s2 = np.zeros(nb)
    hits = np.zeros(nb, dtype=np.int64)
    for a, b, k in _map_partitions(_reduced_partition, jobs, cfg.workers):
        s1 += a
        s2 += b
        hits += k
    N = cfg.reduced_samples
    vol = (math.pi * R * R) ** sc.n
    mean = s1 / N
    var = np.maximum(s2 / N - mean**2, 0.0)
    val = vol * mean / (2 * h)
    se = vol * np.sqrt(var / N) / (2 * h)
    return val, se, hits


def reduced_volume(sc: DHScenario, a: float, cfg: DHConfig) -> float:
    return float(reduced_volumes(sc, [a], cfg)[0][0])


def dh_compare(sc: DHScenario, cfg: DHConfig) -> DHReport:
    """Run both estimators and compare them bin by bin.

    A bin passes when ``|f_hat - vol_hat| <= sigmas * stderr + slack * max(f_hat)``
    with ``stderr`` the combined standard error; the report passes when
    there is at least one unflagged bin and every unflagged bin passes.
    """
    rep = pushforward_density(sc, cfg)
    t0 = time.perf_counter()
    centers = np.array(rep.bin_centers)
    h = cfg.thickness
    flags = list(rep.flags)
    for i, a in enumerate(centers):
        if not flags[i] and abs(a) <= h + CRITICAL_MARGIN:
            flags[i] = "critical"
    valid = np.array([not fl for fl in flags])
    vol = np.zeros(len(centers))
    vse = np.zeros(len(centers))
    slab = np.zeros(len(centers), dtype=np.int64)
    if valid.any():
        v, s, k = reduced_volumes(sc, centers[valid], cfg)
        vol[valid], vse[valid], slab[valid] = v, s, k
    for i in np.flatnonzero(valid):
        if slab[i] == 0:
            flags[i] = "empty"
    valid = np.array([not fl for fl in flags])
    f = np.array(rep.f_hat)
    fse = np.array(rep.f_stderr)
    comb = np.sqrt(fse**2 + vse**2)
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(f > 0, np.abs(f - vol) / f, np.where(vol > 0, np.inf, 0.0))
    fmax = float(f[valid].max()) if valid.any() else 0.0
    ok = np.abs(f - vol) <= cfg.sigmas * comb + cfg.slack * fmax
    rep.vol_hat = vol.tolist()
    rep.vol_stderr = vse.tolist()
    rep.stderr = comb.tolist()
    rep.rel_error = [float(x) if np.isfinite(x) else None for x in rel]
    rep.slab_counts = slab.tolist()
    rep.flags = flags
    rep.passed = bool(valid.any() and ok[valid].all())
    rep.timings["reduced_s"] = time.perf_counter() - t0
    return rep


def _config_dict(sc: DHScenario, cfg: DHConfig) -> dict:
    return {
        "scenario": sc.kind,
        "n": sc.n,
        "samples": cfg.samples,
        "reduced_samples": cfg.reduced_samples,
        "bins": list(cfg.bins),
        "seed": cfg.seed,
        "level_thickness": cfg.thickness,
        "partitions": cfg.partitions,
        "sigmas": cfg.sigmas,
        "slack": cfg.slack,
    }
