"""Entropic functionals on quantum and classical-quantum states.

Von Neumann entropy, Holevo information, conditional/mutual informations on
block-diagonal embeddings of classical registers, coherent information, the
entropy gap H(Q) - H(RQ), and a family of exact non-asymptotic inequality
checkers run over seeded random trials.

All logarithms are base 2; entropies are in bits.  Eigenvalues below 1e-14
contribute zero (the 0 log 0 convention).
"""

import hashlib
import json
import re
from dataclasses import dataclass, field

import numpy as np

from . import channel as channel_mod
from . import qmat
from .qmat import DensityOperator, SubsystemShape
from .seeding import substream

ENTROPY_EIG_FLOOR = 1e-14
PASS_SLACK = 1e-8


def eta(x):
    """-x log2 x elementwise, with eta(0) = 0."""
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    mask = x > ENTROPY_EIG_FLOOR
    out[mask] = -x[mask] * np.log2(x[mask])
    return out if out.ndim else float(out)


def shannon(p):
    """Shannon entropy of a distribution, in bits."""
    return float(np.sum(eta(np.asarray(p, dtype=np.float64))))


def von_neumann(rho):
    """H(rho) = -Tr rho log2 rho."""
    mat = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho)
    vals = np.linalg.eigvalsh(mat)
    return float(np.sum(eta(np.clip(vals, 0.0, None))))


def holevo_chi(ensemble):
    """chi = H(average state) - average H(rho_x); always >= 0."""
    avg = ensemble.average()
    return von_neumann(avg) - float(
        np.dot(ensemble.probs, [von_neumann(s) for s in ensemble.states])
    )


# ---------------------------------------------------------------------------
# classical-quantum (block-diagonal) embeddings

@dataclass(frozen=True)
class CQState:
    """A multipartite state with the classical registers embedded as
    orthonormal-basis quantum factors, so the density operator is
    block-diagonal in those factors."""

    state: DensityOperator
    shape: SubsystemShape

    @classmethod
    def from_ensemble(cls, ensemble):
        """sum_x p(x) |x><x| (x) rho_x on (X, Q)."""
        dim_q = ensemble.dim
        nx = ensemble.size
        m = np.zeros((nx * dim_q, nx * dim_q), dtype=np.complex128)
        for x, (p, s) in enumerate(zip(ensemble.probs, ensemble.states)):
            m[x * dim_q : (x + 1) * dim_q, x * dim_q : (x + 1) * dim_q] = p * s.matrix
        return cls(DensityOperator(m), SubsystemShape((nx, dim_q)))

    @classmethod
    def from_markov_ensemble(cls, ensemble):
        """sum_{t,x} Q(t|x) p(x) |t><t| (x) |x><x| (x) rho_x on (T, X, Q).

        Requires the ensemble's classical pre-channel.
        """
        if ensemble.pre_channel is None:
            raise ValueError("ensemble has no classical pre-channel")
        q = ensemble.pre_channel
        nt, nx = q.shape
        dim_q = ensemble.dim
        d = nt * nx * dim_q
        m = np.zeros((d, d), dtype=np.complex128)
        for t in range(nt):
            for x in range(nx):
                w = q[t, x] * ensemble.probs[x]
                if w <= 0.0:
                    continue
                off = (t * nx + x) * dim_q
                m[off : off + dim_q, off : off + dim_q] = w * ensemble.states[x].matrix
        return cls(DensityOperator(m), SubsystemShape((nt, nx, dim_q)))


_QUERY_RE = re.compile(
    r"^\s*(H|I)\s*\(\s*([0-9,\s]+)\s*(?:;\s*([0-9,\s]+)\s*)?(?:\|\s*([0-9,\s]+)\s*)?\)\s*$"
)


def _parse_group(text, n_factors):
    if text is None:
        return None
    idx = sorted({int(tok) for tok in text.replace(",", " ").split()})
    for i in idx:
        if i < 0 or i >= n_factors:
            raise ValueError("unknown factor %d (state has %d factors)" % (i, n_factors))
    if not idx:
        raise ValueError("empty factor group in query")
    return idx


def cq_informations(state, shape=None, query="H(0)"):
    """Evaluate H(A), H(A|B), I(A;B) or I(A;B|C) on a multipartite state.

    ``query`` names tensor factors by index, e.g. ``"I(0;1|2)"`` or
    ``"H(1|0,2)"``.  Multi-factor groups are comma-separated.
    """
    if isinstance(state, CQState):
        shape = state.shape
        state = state.state
    mat = state.matrix if isinstance(state, DensityOperator) else np.asarray(state)
    shape.check(mat.shape[0])
    m = _QUERY_RE.match(query)
    if not m:
        raise ValueError("cannot parse query %r" % query)
    kind, g1, g2, g3 = m.groups()
    a = _parse_group(g1, len(shape))
    b = _parse_group(g2, len(shape))
    c = _parse_group(g3, len(shape))

    def h(groups):
        keep = sorted(set().union(*groups)) if groups else []
        if not keep:
            return 0.0
        return von_neumann(qmat._partial_trace_array(mat, shape.dims, keep))

    if kind == "H":
        if b is not None:
            raise ValueError("entropy query takes no ';' group: %r" % query)
        if c is None:
            return h([a])
        return h([a, c]) - h([c])
    if b is None:
        raise ValueError("mutual-information query needs two ';' groups: %r" % query)
    if c is None:
        return h([a]) + h([b]) - h([a, b])
    return h([a, c]) + h([b, c]) - h([a, b, c]) - h([c])


# ---------------------------------------------------------------------------
# coherent information and the entropy gap

def coherent_information(rho, chan):
    """I_c(rho, N) = H(Bob's output) - H(environment output).

    Computed through an isometric extension; the value is independent of
    which extension realizes the channel.
    """
    ext = chan if isinstance(chan, channel_mod.IsometricExtension) else (
        channel_mod.isometric_extension(chan)
    )
    mat = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho)
    if mat.shape[0] != ext.dim_in:
        raise ValueError("input dimension does not match the channel")
    joint = ext.joint(mat)
    shape = (ext.dim_q, ext.dim_e)
    h_q = von_neumann(qmat._partial_trace_array(joint, shape, [0]))
    h_e = von_neumann(qmat._partial_trace_array(joint, shape, [1]))
    return h_q - h_e


def delta_h(state, shape):
    """Entropy gap H(rho^Q) - H(rho^{RQ}) for a bipartite state on (R, Q)."""
    mat = state.matrix if isinstance(state, DensityOperator) else np.asarray(state)
    if len(shape) != 2:
        raise ValueError("delta_h needs a bipartite shape")
    shape.check(mat.shape[0])
    h_q = von_neumann(qmat._partial_trace_array(mat, shape.dims, [1]))
    return h_q - von_neumann(mat)


def fannes_delta_h_bound(dim, fid):
    """Continuity bound 2/e + 4 log2(d) sqrt(1 - f) on the entropy-gap change."""
    return 2.0 / np.e + 4.0 * np.log2(dim) * np.sqrt(max(0.0, 1.0 - fid))


# ---------------------------------------------------------------------------
# inequality checkers

@dataclass
class InequalityReport:
    kind: str
    trials: int
    min_margin: float
    violations: int
    passed: bool
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "kind": self.kind,
            "trials": self.trials,
            "min_margin": self.min_margin,
            "violations": self.violations,
            "passed": self.passed,
            "details": self.details,
        }


def _fvdg_margins(rho, sigma):
    f = qmat.fidelity(rho, sigma)
    half_dist = 0.5 * qmat.trace_distance(rho, sigma)
    lower = half_dist - (1.0 - np.sqrt(f))
    upper = np.sqrt(max(0.0, 1.0 - f)) - half_dist
    return lower, upper


def _trial_dims(rng, dims):
    lo, hi = dims
    return int(rng.integers(lo, hi + 1))


def check_inequality(kind, instance=None, dims=(2, 8), trials=1000, seed=0):
    """Exact margin checks for the toolkit's analytic inequalities.

    ``kind`` is one of ``fvdg``, ``fvdg-pure`` (equality case),
    ``fannes-delta-h``, ``data-processing``, ``fidelity-monotone``,
    ``triangle``.  Either pass an explicit ``instance`` tuple or let the
    checker run ``trials`` seeded random instances with per-trial streams.
    Margin is RHS - LHS; a trial passes iff margin >= -1e-8.
    """
    margins = []
    details = {}

    def run(trial_fn):
        if instance is not None:
            margins.append(trial_fn(None, instance))
            return
        for t in range(trials):
            rng = substream(seed, t)
            margins.append(trial_fn(rng, None))

    if kind == "fvdg":

        def trial(rng, inst):
            rho, sigma = inst if inst else (
                qmat.random_density(_trial_dims(rng, dims), rng),
                None,
            )
            if sigma is None:
                sigma = qmat.random_density(rho.dim, rng)
            return min(_fvdg_margins(rho, sigma))

        run(trial)

    elif kind == "fvdg-pure":
        # second inequality is an equality on pure pairs
        def trial(rng, inst):
            if inst:
                rho, sigma = inst
            else:
                d = _trial_dims(rng, dims)
                rho = qmat.random_pure(d, rng).density()
                sigma = qmat.random_pure(d, rng).density()
            _, upper = _fvdg_margins(rho, sigma)
            return -abs(upper)

        run(trial)

    elif kind == "fannes-delta-h":

        def trial(rng, inst):
            if inst:
                rho, sigma, shape = inst
            else:
                dr = int(rng.integers(2, 4))
                dq = int(rng.integers(2, 4))
                shape = SubsystemShape((dr, dq))
                rho = qmat.random_density(dr * dq, rng)
                sigma = qmat.random_density(dr * dq, rng)
            f = qmat.fidelity(rho, sigma)
            gap = abs(delta_h(rho, shape) - delta_h(sigma, shape))
            return fannes_delta_h_bound(shape.dim, f) - gap

        run(trial)

    elif kind == "data-processing":
        # post-processing cannot increase the coherent information
        def trial(rng, inst):
            if inst:
                rho, chan, post = inst
            else:
                d = int(rng.integers(2, 5))
                chan = channel_mod.random_channel(d, d, int(rng.integers(2, 4)), rng)
                post = channel_mod.random_channel(d, d, int(rng.integers(2, 4)), rng)
                rho = qmat.random_density(d, rng)
            return coherent_information(rho, chan) - coherent_information(
                rho, channel_mod.compose(post, chan)
            )

        run(trial)

    elif kind == "fidelity-monotone":

        def trial(rng, inst):
            if inst:
                rho, sigma, shape = inst
            else:
                dr = int(rng.integers(2, 4))
                dq = int(rng.integers(2, 4))
                shape = SubsystemShape((dr, dq))
                rho = qmat.random_density(dr * dq, rng)
                sigma = qmat.random_density(dr * dq, rng)
            f_joint = qmat.fidelity(rho, sigma)
            f_reduced = qmat.fidelity(
                qmat.partial_trace(rho, shape, [1]), qmat.partial_trace(sigma, shape, [1])
            )
            return f_reduced - f_joint

        run(trial)

    elif kind == "triangle":

        def trial(rng, inst):
            if inst:
                a, b, c = inst
            else:
                d = _trial_dims(rng, dims)
                a, b, c = (
                    rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
                    for _ in range(3)
                )
                a, b, c = (m.matrix if isinstance(m, DensityOperator) else m for m in (a, b, c))
            return (
                qmat.trace_norm(a - b)
                + qmat.trace_norm(b - c)
                - qmat.trace_norm(a - c)
            )

        run(trial)

    else:
        raise ValueError("unknown inequality kind %r" % kind)

    margins = np.asarray(margins, dtype=np.float64)
    violations = int((margins < -PASS_SLACK).sum())
    return InequalityReport(
        kind=kind,
        trials=len(margins),
        min_margin=float(margins.min()),
        violations=violations,
        passed=violations == 0,
        details=details,
    )


INEQUALITY_KINDS = (
    "fvdg",
    "fvdg-pure",
    "fannes-delta-h",
    "data-processing",
    "fidelity-monotone",
    "triangle",
)


# ---------------------------------------------------------------------------
# named scalar reports

@dataclass
class EntropicReport:
    """Named scalar results in bits, plus digests of the inputs."""

    values: dict
    digests: dict = field(default_factory=dict)

    def __post_init__(self):
        for k, v in self.values.items():
            if not np.isfinite(v):
                raise ValueError("non-finite entry %r=%r" % (k, v))

    @staticmethod
    def digest(obj):
        """Short stable digest of a serializable input."""
        blob = json.dumps(obj, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]

    def to_dict(self):
        return {"values": dict(self.values), "digests": dict(self.digests)}
