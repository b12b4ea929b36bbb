"""Non-stationary m-dependent random fields.

A field is a finite moving average over independent mean-zero innovations,

    x_{i,j} = sum_{0 <= k1,k2 <= m} a_{k1,k2} * eps_{i-k1, j-k2},

where eps_{i,j} has variance v(i/n1, j/n2) for a positive profile v on
[0,1]^2.  Innovations with indices <= 0 (the boundary padding) are
materialized, so the moving average is exact everywhere and the field is
exactly m-dependent: sites farther than m apart in Chebyshev distance share
no innovations.

Innovations are derived counter-style from (seed, stream, i, j): each site's
value is a pure hash of its lattice coordinates, which makes generation
reproducible, order-independent, and safe under replication parallelism.
The hash produces uniforms; the law transforms below run in shared numpy
code so results do not depend on the active kernel backend.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels

LAWS = ("gaussian", "rademacher", "uniform")

# midpoint-rule resolution for the long-run variance quadrature
QUAD_N = 512


class VarianceProfile:
    """Positive variance surface v(t1, t2) on [0,1]^2.

    Built-in kinds (serializable to the experiment config):
      constant     v = c
      affine       v = c0 + c1*t1 + c2*t2
      sinusoidal   v = base + amp*sin(2*pi*(f1*t1 + f2*t2))
    A custom callable is accepted via from_callable but cannot be
    serialized.  Values must be finite and strictly positive wherever the
    profile is evaluated.
    """

    def __init__(self, kind, params=(), fn=None):
        if kind not in ("constant", "affine", "sinusoidal", "custom"):
            raise ValueError("unknown variance profile kind: %r" % (kind,))
        if kind == "custom" and fn is None:
            raise ValueError("custom profile requires a callable")
        self.kind = kind
        self.params = tuple(float(p) for p in params)
        self.fn = fn

    @classmethod
    def constant(cls, value=1.0):
        return cls("constant", (value,))

    @classmethod
    def affine(cls, c0, c1=0.0, c2=0.0):
        return cls("affine", (c0, c1, c2))

    @classmethod
    def sinusoidal(cls, base, amp, freq1=1.0, freq2=0.0):
        return cls("sinusoidal", (base, amp, freq1, freq2))

    @classmethod
    def from_callable(cls, fn):
        return cls("custom", (), fn)

    def __call__(self, t1, t2):
        t1 = np.asarray(t1, dtype=np.float64)
        t2 = np.asarray(t2, dtype=np.float64)
        if self.kind == "constant":
            out = np.broadcast_to(self.params[0], np.broadcast_shapes(t1.shape, t2.shape)).copy()
        elif self.kind == "affine":
            c0, c1, c2 = self.params
            out = c0 + c1 * t1 + c2 * t2
        elif self.kind == "sinusoidal":
            base, amp, f1, f2 = self.params
            out = base + amp * np.sin(2.0 * np.pi * (f1 * t1 + f2 * t2))
        else:
            out = np.asarray(self.fn(t1, t2), dtype=np.float64)
        out = np.asarray(out, dtype=np.float64)
        if not np.all(np.isfinite(out)) or np.any(out <= 0.0):
            raise ValueError("variance profile produced a non-finite or non-positive value")
        return out

    def integral(self, quad_n=QUAD_N):
        # midpoint rule on a quad_n x quad_n grid; exact for constant/affine
        t = (np.arange(quad_n) + 0.5) / quad_n
        vals = self(t[:, None], t[None, :])
        return float(vals.mean())

    def to_config(self):
        if self.kind == "custom":
            raise ValueError("custom variance profiles are not serializable")
        d = {"kind": self.kind}
        names = {
            "constant": ("value",),
            "affine": ("c0", "c1", "c2"),
            "sinusoidal": ("base", "amp", "freq1", "freq2"),
        }[self.kind]
        d.update(dict(zip(names, self.params)))
        return d

    @classmethod
    def from_config(cls, d):
        kind = d.get("kind")
        if kind == "constant":
            return cls.constant(d["value"])
        if kind == "affine":
            return cls.affine(d["c0"], d.get("c1", 0.0), d.get("c2", 0.0))
        if kind == "sinusoidal":
            return cls.sinusoidal(d["base"], d["amp"], d.get("freq1", 1.0), d.get("freq2", 0.0))
        raise ValueError("unknown variance profile config: %r" % (d,))

    def __repr__(self):
        return "VarianceProfile(%r, %r)" % (self.kind, self.params)


@dataclass(frozen=True)
class InnovationSpec:
    """Innovation law plus variance profile; entries are independent,
    mean zero, with variance v(i/n1, j/n2) and finite fourth moment."""

    law: str
    profile: VarianceProfile

    def __post_init__(self):
        if self.law not in LAWS:
            raise ValueError("law must be one of %s, got %r" % (LAWS, self.law))

    def to_config(self):
        return {"law": self.law, "variance_profile": self.profile.to_config()}

    @classmethod
    def from_config(cls, d):
        return cls(d["law"], VarianceProfile.from_config(d["variance_profile"]))


class MAKernel:
    """Moving-average coefficients a_{k1,k2}, 0 <= k1,k2 <= m.

    The kernel sum A = sum a_{k1,k2} is stored as .total; sigma^2 of the
    limiting process is A^2 times the integrated variance profile.
    """

    def __init__(self, coeffs):
        coeffs = np.asarray(coeffs, dtype=np.float64)
        if coeffs.ndim != 2 or coeffs.shape[0] != coeffs.shape[1]:
            raise ValueError("coeffs must be a square (m+1)x(m+1) array")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("coeffs must be finite")
        if not np.any(coeffs != 0.0):
            raise ValueError("at least one coefficient must be nonzero")
        self.coeffs = coeffs.copy()
        self.coeffs.setflags(write=False)
        self.m = coeffs.shape[0] - 1
        self.total = float(coeffs.sum())

    @classmethod
    def identity(cls):
        return cls(np.ones((1, 1)))

    def to_config(self):
        return {"m": self.m, "coeffs": [[float(c) for c in row] for row in self.coeffs]}

    @classmethod
    def from_config(cls, d):
        coeffs = np.asarray(d["coeffs"], dtype=np.float64)
        if "m" in d and int(d["m"]) != coeffs.shape[0] - 1:
            raise ValueError("declared m does not match coefficient array shape")
        return cls(coeffs)

    def __repr__(self):
        return "MAKernel(m=%d, total=%g)" % (self.m, self.total)


@dataclass(frozen=True)
class FieldSpec:
    """Generative description of an m-dependent field."""

    innovations: InnovationSpec
    kernel: MAKernel

    @property
    def m(self):
        return self.kernel.m

    def to_config(self):
        return {"innovations": self.innovations.to_config(), "kernel": self.kernel.to_config()}

    @classmethod
    def from_config(cls, d):
        return cls(InnovationSpec.from_config(d["innovations"]), MAKernel.from_config(d["kernel"]))


@dataclass(frozen=True)
class FieldSample:
    """Realized field values together with the innovations that made them.

    values[u, v] is x_{u+1, v+1}; innovations[r, c] is eps_{r+1-m, c+1-m}
    (lattice indices 1-m .. n on each padded axis), so
    values[u, v] = sum_k coeffs[k1, k2] * innovations[u + m - k1, v + m - k2].
    """

    n1: int
    n2: int
    values: np.ndarray
    innovations: np.ndarray
    spec: object
    seed: int


def site_variances(spec, n1, n2, m):
    """Variance v at every padded lattice site, clamped at the boundary.

    Returns the (n1+m) x (n2+m) array of E[eps_{i,j}^2] for lattice indices
    i in {1-m..n1}, j in {1-m..n2}; padding sites (indices <= 0) evaluate v
    at the clamped coordinate 0.
    """
    i = np.arange(1 - m, n1 + 1, dtype=np.float64)
    j = np.arange(1 - m, n2 + 1, dtype=np.float64)
    t1 = np.clip(i / n1, 0.0, 1.0)
    t2 = np.clip(j / n2, 0.0, 1.0)
    return spec.profile(t1[:, None], t2[None, :])


def _gaussian_from_uniforms(seed, streams, i0, j0, ni, nj):
    """Standard-normal lattice from two counter-RNG uniform streams.

    Box-Muller over per-site uniforms; u1 in (0,1] keeps the log finite.
    """
    u1 = kernels.uniform_lattice(seed, streams[0], i0, j0, ni, nj)
    u2 = kernels.uniform_lattice(seed, streams[1], i0, j0, ni, nj)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def gen_innovations(spec, n1, n2, m, seed):
    """Padded (n1+m) x (n2+m) innovation array for the given spec.

    Deterministic in (spec, n1, n2, m, seed); entry (i, j) depends on the
    lattice coordinates only through the counter hash and the variance
    profile, so enlarging the lattice preserves shared sites.
    """
    if n1 < 1 or n2 < 1:
        raise ValueError("lattice dimensions must be >= 1")
    if m < 0:
        raise ValueError("m must be >= 0")
    v = site_variances(spec, n1, n2, m)
    i0 = 1 - m
    if spec.law == "gaussian":
        z = _gaussian_from_uniforms(seed, (0, 1), i0, i0, n1 + m, n2 + m)
        return np.sqrt(v) * z
    u1 = kernels.uniform_lattice(seed, 0, i0, i0, n1 + m, n2 + m)
    if spec.law == "rademacher":
        # u <= 0.5 hits exactly half of the 2^53 lattice of uniform values
        s = np.where(u1 > 0.5, 1.0, -1.0)
        return np.sqrt(v) * s
    # uniform on (-sqrt(3v), sqrt(3v)]: variance v
    return np.sqrt(3.0 * v) * (2.0 * u1 - 1.0)


def apply_ma_kernel(innovations, kernel, spec=None, seed=None):
    """Run the causal moving average over a padded innovation array.

    The array must be padded by kernel.m on the low side of each axis;
    the resulting field is m-dependent by construction.  spec/seed are
    optional provenance carried into the FieldSample.
    """
    innovations = np.asarray(innovations, dtype=np.float64)
    if innovations.ndim != 2:
        raise ValueError("innovations must be a 2-d array")
    m = kernel.m
    n1 = innovations.shape[0] - m
    n2 = innovations.shape[1] - m
    if n1 < 1 or n2 < 1:
        raise ValueError(
            "innovation array of shape %s is too small for padding m=%d" % (innovations.shape, m)
        )
    values = kernels.ma_shift_accumulate(innovations, kernel.coeffs)
    return FieldSample(n1=n1, n2=n2, values=values, innovations=innovations, spec=spec, seed=seed)


def generate_field(spec, n1, n2, seed):
    """gen_innovations + apply_ma_kernel with provenance attached."""
    eps = gen_innovations(spec.innovations, n1, n2, spec.kernel.m, seed)
    return apply_ma_kernel(eps, spec.kernel, spec=spec, seed=seed)


def long_run_variance(spec, quad_n=QUAD_N):
    """sigma^2 = A^2 * integral of v over [0,1]^2.

    The integral uses the midpoint rule on a fixed quad_n x quad_n grid
    (default 512); this is exact for constant and affine profiles and
    O(quad_n^-2) for smooth ones.
    """
    return spec.kernel.total ** 2 * spec.innovations.profile.integral(quad_n)
