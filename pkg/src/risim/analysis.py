"""Closed-form and semi-analytical performance analysis.

Spectral efficiency and detector operation counts are exact combinatorial
formulas.  The average bit error rate is upper-bounded by a union bound over
pairwise error probabilities, each obtained from the moment generating
function of the squared decision distance through a finite-limit quadrature
of the Gaussian tail integral.

Two MGF models are available per context.  "sampled" (the default) estimates
the MGF from cached draws of the exact distance law, one set per structurally
distinct hypothesis pair; the resulting pairwise errors are unbiased, so the
union bound genuinely dominates simulation.  "gaussian" is the closed-form
route: the two selected-antenna coordinates become a noncentral quadratic
form of a fitted 4-dim Gaussian and the remaining antennas a central
chi-square style factor.  The Gaussian fit is optimistic on hypothesis pairs
whose antenna sets overlap (the distance law there is a variance mixture
with a heavier lower tail than any second-moment fit), which is why it is
not the default for the bound.

Moments entering the Gaussian route: a product of two independent unit-power
Rayleigh amplitudes has mean pi/4 and variance 1 - pi^2/16, and misaligned
cascade terms carry uniformly random phase, hence zero mean and unit variance
per complex dimension pair.  The analysis assumes i.i.d. Rayleigh links.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field

import numpy as np

from .frontend import partition_res

__all__ = [
    "AnalysisError",
    "GaussianQuadraticForm",
    "mgf_noncentral_quadratic",
    "spectral_efficiency",
    "detection_complexity",
    "AberContext",
    "build_z1_mgf",
    "build_z2_mgf",
    "pep_unconditional",
    "aber_union_bound",
    "aber_bound_curve",
]

RECEIVED_SCHEMES = ("rasm", "rassk", "rsm", "rssk", "rgsm", "rgssk")

_RAYLEIGH_PROD_MEAN = np.pi / 4.0
_MOMENT_STREAM_TAG = 18
# Extra sampling depth by union size; union bounds at these operating points
# are nearly tight, so estimator noise on the dominant structures decides
# whether dominance is resolvable against a simulated curve.
_SAMPLE_BOOST = {1: 6, 2: 6, 3: 3}


class AnalysisError(ValueError):
    pass


def spectral_efficiency(scheme, n_r, m=None, n_s=None):
    """Bits per channel use of a receive-side index modulation scheme."""
    if n_r < 1:
        raise AnalysisError("n_r must be >= 1")
    sym_bits = 0
    if scheme in ("rasm", "rsm", "rgsm"):
        if m is None or m < 2 or m & (m - 1):
            raise AnalysisError(f"{scheme} needs a power-of-two constellation order")
        sym_bits = m.bit_length() - 1
    elif m is not None:
        raise AnalysisError(f"{scheme} carries no constellation symbol")
    if scheme in ("rasm", "rassk"):
        if n_r < 2:
            raise AnalysisError("adaptive schemes need n_r >= 2")
        ac_bits = ((1 << n_r) - 1).bit_length() - 1
    elif scheme in ("rsm", "rssk"):
        if n_r & (n_r - 1):
            raise AnalysisError(f"{scheme} needs a power-of-two antenna count")
        ac_bits = n_r.bit_length() - 1
    elif scheme in ("rgsm", "rgssk"):
        if n_s is None or not 1 <= n_s <= n_r:
            raise AnalysisError(f"{scheme} needs 1 <= n_s <= n_r")
        count = math.comb(n_r, n_s)
        ac_bits = count.bit_length() - 1
    else:
        raise AnalysisError(f"unknown scheme {scheme!r}")
    return ac_bits + sym_bits


def detection_complexity(scheme, n_r, n, d, m=None):
    """Real-operation count of the exhaustive ML scan."""
    if min(n_r, n, d) < 1:
        raise AnalysisError("sizes must be positive")
    per_hypothesis = 2 * n_r * (2 * n + 1 + 2 * n_r) + n - 1
    if scheme == "rasm":
        if m is None or m < 2:
            raise AnalysisError("rasm complexity needs the constellation order")
        return per_hypothesis * d * m
    if scheme == "rassk":
        if m is not None:
            raise AnalysisError("rassk carries no constellation symbol")
        return per_hypothesis * d
    raise AnalysisError(f"unknown scheme {scheme!r}")


@dataclass(frozen=True)
class GaussianQuadraticForm:
    """Sum of squares of jointly Gaussian coordinates, kept as (mean, cov)."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        if cov.shape != (mean.size, mean.size):
            raise AnalysisError("covariance shape does not match the mean")
        if not np.allclose(cov, cov.T, atol=1e-10):
            raise AnalysisError("covariance must be symmetric")
        sym = 0.5 * (cov + cov.T)
        lam, vec = np.linalg.eigh(sym)
        scale = max(1.0, float(lam[-1]))
        if lam[0] < -1e-8 * scale:
            raise AnalysisError("covariance is not positive semidefinite")
        lam = np.clip(lam, 0.0, None)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", sym)
        object.__setattr__(self, "_lam", lam)
        object.__setattr__(self, "_mu_rot", vec.T @ mean)


def mgf_noncentral_quadratic(form, t):
    """E[exp(t * X'X)] for X ~ N(mean, cov), valid left of the smallest pole.

    Evaluated in the covariance eigenbasis:
    prod_i (1 - 2 t lam_i)^(-1/2) * exp(t * sum_i mu_i^2 / (1 - 2 t lam_i)).
    """
    t = np.asarray(t, dtype=float)
    lam = form._lam
    mu2 = form._mu_rot**2
    denom = 1.0 - 2.0 * t[..., None] * lam
    if np.any(denom <= 0.0):
        raise AnalysisError("MGF argument at or beyond a pole")
    log_m = -0.5 * np.sum(np.log(denom), axis=-1) + t * np.sum(mu2 / denom, axis=-1)
    return np.exp(log_m)


def _central_factor(t, scale, exponent):
    # (1 - t * scale)^(-exponent); exponent 0 contributes nothing.
    if exponent == 0:
        return np.ones_like(np.asarray(t, dtype=float))
    base = 1.0 - np.asarray(t, dtype=float) * scale
    if np.any(base <= 0.0):
        raise AnalysisError("MGF argument at or beyond a pole")
    return base ** (-float(exponent))


@dataclass
class AberContext:
    """Precomputed state for bound evaluation on one scheme configuration.

    constellation None means the carrier-only scheme (every hypothesis sends
    sqrt(e_s)).  pep_model "sampled" estimates each pairwise MGF from draws
    of the exact distance; "gaussian" uses the fitted quadratic-form closed
    form.  For the gaussian route, mean_scale picks the mean convention:
    "aligned" counts the coherently aligned reflector blocks of each
    hypothesis pair exactly, "nominal" applies the full-array scale to both
    coordinates.  cov_mode "hybrid" keeps closed-form variances with sampled
    cross terms, "sampled" takes all second moments from the draws.
    """

    table: object
    n: int
    constellation: object = None
    e_s: float = 1.0
    quadrature_points: int = 64
    pep_model: str = "sampled"
    mean_scale: str = "aligned"
    cov_mode: str = "hybrid"
    samples: int = 50000
    moment_seed: int = 0
    _rows: dict = field(default_factory=dict, repr=False)
    _mgfs: dict = field(default_factory=dict, repr=False)
    _parts: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.pep_model not in ("sampled", "gaussian"):
            raise AnalysisError("pep_model must be 'sampled' or 'gaussian'")
        if self.mean_scale not in ("aligned", "nominal"):
            raise AnalysisError("mean_scale must be 'aligned' or 'nominal'")
        if self.cov_mode not in ("hybrid", "sampled"):
            raise AnalysisError("cov_mode must be 'hybrid' or 'sampled'")
        if self.quadrature_points < 16:
            raise AnalysisError("need at least 16 quadrature nodes")
        if self.samples < 1000:
            raise AnalysisError("need at least 1000 moment samples")
        if self.constellation is None and self.e_s <= 0:
            raise AnalysisError("carrier energy must be positive")

    @property
    def n_r(self):
        return self.table.n_r

    def partition(self, r):
        if r not in self._parts:
            self._parts[r] = partition_res(self.n, self.table.entries[r])
        return self._parts[r]

    def symbols(self):
        if self.constellation is None:
            return np.array([np.sqrt(self.e_s) + 0j])
        return self.constellation.points


def _pair_structure(ctx, r, r_hat):
    part_r = ctx.partition(r)
    part_h = ctx.partition(r_hat)
    v_r = set(part_r.ac.indices)
    v_h = set(part_h.ac.indices)
    union = v_r | v_h
    tr = part_r.targets
    th = part_h.targets
    used_r = int(np.sum(tr >= 0))
    used_h = int(np.sum(th >= 0))
    # Aligned reflectors of the wrong hypothesis that land inside the true
    # AC's antennas; those subtract coherently inside the first coordinate.
    c1 = int(np.sum(np.isin(th, list(v_r)) & (th >= 0)))
    # Joint law of the pair depends on the two target maps only up to a
    # relabeling of antennas (receive rows are exchangeable), so rename
    # antennas by first appearance and key the sample cache on that.
    relabel = {}
    for i in range(ctx.n):
        for t in (int(tr[i]), int(th[i])):
            if t >= 0 and t not in relabel:
                relabel[t] = len(relabel)
    canon_tr = np.array([relabel[int(t)] if t >= 0 else -1 for t in tr], dtype=np.int32)
    canon_th = np.array([relabel[int(t)] if t >= 0 else -1 for t in th], dtype=np.int32)
    key = (ctx.n, ctx.n_r, canon_tr.tobytes(), canon_th.tobytes())
    return {
        "v_r": sorted(v_r),
        "v_h": sorted(v_h),
        "v_h_only": sorted(v_h - v_r),
        "rows_r": sorted(relabel[a] for a in v_r),
        "rows_h_only": sorted(relabel[a] for a in (v_h - v_r)),
        "n_a_r": part_r.ac.n_a,
        "n_a_h": part_h.ac.n_a,
        "n_e_r": part_r.n_e,
        "n_e_h": part_h.n_e,
        "used_r": used_r,
        "used_h": used_h,
        "c1": c1,
        "n_union": len(union),
        "n_out": ctx.n_r - len(union),
        "canon_tr": canon_tr,
        "canon_th": canon_th,
        "key": key,
    }


def _pair_rows(ctx, struct):
    """Shared-channel draws for one canonical pair structure, cached.

    Only the antennas actually targeted by either hypothesis ("the union")
    get sampled candidate-row values; every remaining antenna sees pure
    phase-scrambled leakage, and conditioned on the draw that leakage is
    exactly complex Gaussian with a per-draw variance assembled from the
    first-hop powers and the two phase profiles.  Returns a dict with
    "inside" (S, 2, n_union) candidate rows at the union antennas (columns
    indexed by canonical label) plus the conditional-variance aggregates:
    s_out = a |x|^2 + b |x_hat|^2 - 2 Re(x conj(x_hat) g).
    """
    key = struct["key"]
    if key in ctx._rows:
        return ctx._rows[key]
    n_u = struct["n_union"]
    # Small-union structures dominate the bound and are cheap to draw, so
    # they get proportionally deeper sampling.
    s = ctx.samples * _SAMPLE_BOOST.get(n_u, 1)
    seed_ctx = zlib.crc32(repr(key).encode())
    rng = np.random.default_rng((ctx.moment_seed, _MOMENT_STREAM_TAG, seed_ctx))
    h1 = (rng.standard_normal((s, ctx.n)) + 1j * rng.standard_normal((s, ctx.n))) / np.sqrt(2)
    h2 = (rng.standard_normal((s, n_u, ctx.n)) + 1j * rng.standard_normal((s, n_u, ctx.n))) / np.sqrt(2)
    casc = h2 * h1[:, None, :]
    cols = np.arange(ctx.n)
    inside = np.empty((s, 2, n_u), dtype=complex)
    phase = np.zeros((s, 2, ctx.n), dtype=complex)
    for slot, targets in enumerate((struct["canon_tr"], struct["canon_th"])):
        sel = targets >= 0
        u = casc[:, targets[sel], cols[sel]]
        u = u.conj() / np.abs(u)
        inside[:, slot, :] = np.einsum("sji,si->sj", casc[:, :, cols[sel]], u)
        phase[:, slot, sel] = u
    pow1 = h1.real**2 + h1.imag**2
    active_r = struct["canon_tr"] >= 0
    active_h = struct["canon_th"] >= 0
    data = {
        "inside": inside,
        "a": pow1[:, active_r].sum(axis=1),
        "b": pow1[:, active_h].sum(axis=1),
        "g": np.einsum(
            "si,si,si->s",
            pow1[:, active_r & active_h],
            phase[:, 0, active_r & active_h],
            phase[:, 1, active_r & active_h].conj(),
        ),
    }
    ctx._rows[key] = data
    return data


def _pair_tail(ctx, struct, x_k, x_hat):
    """Per-draw decision-distance split for one hypothesis pair: the exact
    squared distance over the union antennas, and the conditional leakage
    variance governing every antenna outside it."""
    data = _pair_rows(ctx, struct)
    inside = data["inside"]
    diff = inside[:, 0, :] * x_k - inside[:, 1, :] * x_hat
    z_in = np.sum(diff.real**2 + diff.imag**2, axis=1)
    s_out = (
        abs(x_k) ** 2 * data["a"]
        + abs(x_hat) ** 2 * data["b"]
        - 2.0 * (x_k * np.conj(x_hat) * data["g"]).real
    )
    return z_in, np.clip(s_out, 0.0, None)


def _sampled_mgf(ctx, struct, x_k, x_hat):
    """MGF estimator mixing the sampled union-antenna distance with the
    closed-form conditional factor for the leakage-only antennas."""
    n_out = struct["n_out"]

    def mgf(t):
        z_in, s_out = _pair_tail(ctx, struct, x_k, x_hat)
        t = np.asarray(t, dtype=float)
        with np.errstate(under="ignore"):
            if n_out:
                base = 1.0 - np.multiply.outer(t, s_out)
                if np.any(base <= 0.0):
                    raise AnalysisError("MGF argument at or beyond a pole")
            vals = np.exp(np.multiply.outer(t, z_in))
            if n_out:
                vals = vals * base ** (-float(n_out))
            return vals.mean(axis=-1)

    return mgf


def _aggregate_samples(ctx, struct):
    """The four per-pair channel aggregates behind the gaussian fit (own and
    cross-hypothesis responses summed over the true AC's antennas and over
    the extra antennas of the wrong one), as an (S, 8) real matrix."""
    inside = _pair_rows(ctx, struct)["inside"]
    a = inside[:, 0, struct["rows_r"]].sum(axis=1)
    b = inside[:, 1, struct["rows_r"]].sum(axis=1)
    c = inside[:, 0, struct["rows_h_only"]].sum(axis=1)
    d = inside[:, 1, struct["rows_h_only"]].sum(axis=1)
    return np.column_stack([a.real, a.imag, b.real, b.imag, c.real, c.imag, d.real, d.imag])


def _rot(x):
    return np.array([[x.real, -x.imag], [x.imag, x.real]])


def _identity_cov(z):
    """Covariance assembled coordinate-pair-wise from sampled dispersions,
    via 2 Cov(X, Y) = D[X + Y] - D[X] - D[Y]."""
    p = z.shape[1]
    var = np.var(z, axis=0)
    cov = np.diag(var)
    for i in range(p):
        for j in range(i + 1, p):
            both = np.var(z[:, i] + z[:, j])
            cov[i, j] = cov[j, i] = 0.5 * (both - var[i] - var[j])
    return cov


def _z1_form(ctx, struct, x_k, x_hat):
    mean_scale = _RAYLEIGH_PROD_MEAN
    if ctx.mean_scale == "nominal":
        mu_q1 = ctx.n * mean_scale * x_k
        mu_q2 = -ctx.n * mean_scale * x_hat
    else:
        mu_q1 = mean_scale * (struct["used_r"] * x_k - struct["c1"] * x_hat)
        mu_q2 = -mean_scale * (struct["used_h"] - struct["c1"]) * x_hat
    mean = np.array([mu_q1.real, mu_q1.imag, mu_q2.real, mu_q2.imag])

    samples = _aggregate_samples(ctx, struct)
    lmap = np.zeros((4, 8))
    lmap[0:2, 0:2] = _rot(x_k)
    lmap[0:2, 2:4] = -_rot(x_hat)
    lmap[2:4, 4:6] = _rot(x_k)
    lmap[2:4, 6:8] = -_rot(x_hat)
    cov = _identity_cov(samples @ lmap.T)

    if ctx.cov_mode == "hybrid":
        na_r, ne_r = struct["n_a_r"], struct["n_e_r"]
        na_h, ne_h = struct["n_a_h"], struct["n_e_h"]
        coh = na_r - np.pi**2 / 16.0
        cov[0, 0] = na_r * (coh * ne_r * x_k.real**2 + struct["used_h"] * abs(x_hat) ** 2 / 2.0)
        cov[1, 1] = na_r * (coh * ne_r * x_k.imag**2 + struct["used_h"] * abs(x_hat) ** 2 / 2.0)
        coh = na_h - np.pi**2 / 16.0
        cov[2, 2] = na_h * (coh * ne_h * x_hat.real**2 + struct["used_r"] * abs(x_k) ** 2 / 2.0)
        cov[3, 3] = na_h * (coh * ne_h * x_hat.imag**2 + struct["used_r"] * abs(x_k) ** 2 / 2.0)
        lam = np.linalg.eigvalsh(0.5 * (cov + cov.T))
        if lam[0] < 0:
            # Closed-form variances can undercut the sampled cross terms on
            # strongly overlapping pairs; project back to the PSD cone.
            lam2, vec = np.linalg.eigh(0.5 * (cov + cov.T))
            cov = (vec * np.clip(lam2, 0.0, None)) @ vec.T
    return GaussianQuadraticForm(mean=mean, cov=cov)


def build_z1_mgf(ctx, r, r_hat, k=0, k_hat=0):
    """MGF of the squared candidate distance for a wrong-AC hypothesis pair."""
    if r == r_hat:
        raise AnalysisError("wrong-AC builder needs distinct table rows")
    symbols = ctx.symbols()
    cache_key = ("z1", r, r_hat, k, k_hat)
    if cache_key not in ctx._mgfs:
        x_k = complex(symbols[k])
        x_hat = complex(symbols[k_hat])
        struct = _pair_structure(ctx, r, r_hat)
        if ctx.pep_model == "sampled":
            mgf = _sampled_mgf(ctx, struct, x_k, x_hat)
        else:
            form = _z1_form(ctx, struct, x_k, x_hat)
            cross_scale = struct["used_r"] * abs(x_k) ** 2 + struct["used_h"] * abs(x_hat) ** 2
            n_out = struct["n_out"]

            def mgf(t, form=form, cross_scale=cross_scale, n_out=n_out):
                t = np.asarray(t, dtype=float)
                return mgf_noncentral_quadratic(form, t) * _central_factor(t, cross_scale, n_out)

        _check_unit_at_zero(mgf)
        ctx._mgfs[cache_key] = mgf
    return ctx._mgfs[cache_key]


def build_z2_mgf(ctx, r, k, k_hat):
    """MGF of the squared candidate distance for a wrong-symbol hypothesis on
    the correct AC."""
    if ctx.constellation is None:
        raise AnalysisError("carrier-only scheme has no symbol error events")
    if k == k_hat:
        raise AnalysisError("wrong-symbol builder needs distinct symbols")
    cache_key = ("z2", r, k, k_hat)
    if cache_key not in ctx._mgfs:
        x_k = complex(ctx.symbols()[k])
        x_hat = complex(ctx.symbols()[k_hat])
        if ctx.pep_model == "sampled":
            struct = _pair_structure(ctx, r, r)
            mgf = _sampled_mgf(ctx, struct, x_k, x_hat)
        else:
            part = ctx.partition(r)
            used = int(np.sum(part.targets >= 0))
            dx = abs(x_k - x_hat)
            mu = used * np.pi * dx / 4.0
            var = dx**2 * used * (32.0 - np.pi**2) / 16.0
            selected = GaussianQuadraticForm(mean=[mu], cov=[[var]])
            cross_scale = part.ac.n_a * ctx.n * dx**2
            expo = (ctx.n_r - part.ac.n_a) / 2.0

            def mgf(t, form=selected, cross_scale=cross_scale, expo=expo):
                t = np.asarray(t, dtype=float)
                return mgf_noncentral_quadratic(form, t) * _central_factor(t, cross_scale, expo)

        _check_unit_at_zero(mgf)
        ctx._mgfs[cache_key] = mgf
    return ctx._mgfs[cache_key]


def _check_unit_at_zero(mgf):
    val = float(mgf(np.array(0.0)))
    if abs(val - 1.0) > 1e-9:
        raise AnalysisError(f"MGF must equal 1 at t=0, got {val}")


def _leggauss_nodes(points):
    x, w = np.polynomial.legendre.leggauss(points)
    tau = (x + 1.0) * (np.pi / 4.0)
    weight = w * (np.pi / 4.0) / np.pi
    return tau, weight


def pep_unconditional(mgf, n0, method="quadrature", points=64):
    """Average pairwise error probability from the distance MGF.

    quadrature: finite-limit form of the Gaussian tail integral,
    (1/pi) * int_0^{pi/2} M(-1 / (4 sin^2 tau N0)) dtau.
    q_bound: three-term exponential upper bound on the Q function.
    """
    if n0 <= 0:
        raise AnalysisError("noise level must be positive")
    t, w = _pep_nodes(n0, method, points)
    return float(np.sum(w * mgf(t)))


def _pep_nodes(n0, method, points):
    """MGF argument/weight pairs so that sum(w * M(t)) is the PEP estimate."""
    if method == "quadrature":
        tau, w = _leggauss_nodes(points)
        return -1.0 / (4.0 * np.sin(tau) ** 2 * n0), w
    if method == "q_bound":
        t = np.array([-1.0 / n0, -1.0 / (2.0 * n0), -1.0 / (4.0 * n0)])
        return t, np.array([1.0 / 6.0, 1.0 / 12.0, 1.0 / 4.0])
    raise AnalysisError(f"unknown PEP method {method!r}")


def _hamming(a, b):
    return bin(int(a) ^ int(b)).count("1")


def _pair_iter(ctx):
    """Ordered hypothesis pairs with their bit-distance weights."""
    d = len(ctx.table)
    symbols = ctx.symbols()
    m = len(symbols)
    if ctx.constellation is None:
        labels = [0]
    else:
        labels = [int(ctx.constellation.labels[p]) for p in range(m)]
    for r in range(d):
        for r_hat in range(d):
            for k in range(m):
                for k_hat in range(m):
                    if r == r_hat and k == k_hat:
                        continue
                    weight = _hamming(r, r_hat) + _hamming(labels[k], labels[k_hat])
                    yield r, r_hat, k, k_hat, weight


def aber_union_bound(ctx, n0, method="quadrature", with_se=False):
    """Union bound on average BER: pairwise errors weighted by bit distance,
    normalized by the bits carried per channel use.

    with_se additionally returns the standard error of the estimate.  Under
    the sampled PEP model the per-draw conditional error rates are aggregated
    per shared draw set (pairs with the same canonical structure reuse the
    same draws, so their fluctuations are fully correlated and must be summed
    before taking the variance); independent draw sets then add in
    quadrature.  The closed-form model has no sampling error in its PEP
    stage, so its se is reported as zero.
    """
    d = len(ctx.table)
    m = len(ctx.symbols())
    bits_total = (d * m).bit_length() - 1
    norm = d * m * bits_total
    if ctx.pep_model == "sampled":
        t, w = _pep_nodes(n0, method, ctx.quadrature_points)
        acc = {}
        symbols = ctx.symbols()
        for r, r_hat, k, k_hat, weight in _pair_iter(ctx):
            struct = _pair_structure(ctx, r, r_hat)
            z_in, s_out = _pair_tail(ctx, struct, complex(symbols[k]), complex(symbols[k_hat]))
            with np.errstate(under="ignore"):
                vals = np.exp(np.multiply.outer(t, z_in))
                if struct["n_out"]:
                    vals *= (1.0 - np.multiply.outer(t, s_out)) ** (-float(struct["n_out"]))
            q = w @ vals
            key = struct["key"]
            if key in acc:
                acc[key] += weight * q
            else:
                acc[key] = weight * q
        total = sum(float(np.mean(v)) for v in acc.values())
        var = sum(float(np.var(v)) / v.size for v in acc.values())
        if with_se:
            return total / norm, float(np.sqrt(var)) / norm
        return total / norm
    total = 0.0
    for r, r_hat, k, k_hat, weight in _pair_iter(ctx):
        if r == r_hat:
            mgf = build_z2_mgf(ctx, r, k, k_hat)
        else:
            mgf = build_z1_mgf(ctx, r, r_hat, k, k_hat)
        total += weight * pep_unconditional(mgf, n0, method=method, points=ctx.quadrature_points)
    if with_se:
        return total / norm, 0.0
    return total / norm


def aber_bound_curve(ctx, snr_db, method="quadrature", with_se=False):
    """Bound over an SNR grid (dB, with snr = e_s / n0)."""
    snr_db = np.atleast_1d(np.asarray(snr_db, dtype=float))
    e_s = 1.0 if ctx.constellation is not None else ctx.e_s
    out = [
        aber_union_bound(ctx, e_s * 10.0 ** (-s / 10.0), method=method, with_se=with_se)
        for s in snr_db
    ]
    if with_se:
        return np.array([v for v, _ in out]), np.array([s for _, s in out])
    return np.array(out)
