"""Typical sequences, typical projectors and their finite-blocklength bounds.

Typicality is the counting kind: a sequence is typical when every symbol's
occurrence count is within n*delta of its expectation, and symbols of zero
probability may not occur at all.  The zero-probability exclusion is what
makes a pure state's typical projector rank one and keeps the counting
bounds below exact.

Nothing here is asymptotic: sets are enumerated exactly, projector ranks are
counted exactly and the operator bounds are checked against exponents whose
constants are computed from the instance (and recorded), not assumed.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import qmat
from .guards import check_dim, check_enum
from .qmat import DensityOperator

ZERO_PROB_TOL = 1e-12
COUNT_SLACK = 1e-9


def enumerate_sequences(alphabet_size, n, limit=None):
    """All length-n sequences over range(alphabet_size), as an (N, n) array."""
    check_enum(alphabet_size ** n, limit)
    if n == 0:
        return np.zeros((1, 0), dtype=np.intp)
    grids = np.meshgrid(*([np.arange(alphabet_size)] * n), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


def _counts(seqs, alphabet_size):
    return np.stack(
        [(seqs == k).sum(axis=1) for k in range(alphabet_size)], axis=1
    )


def typical_mask(p, n, delta, seqs):
    """Boolean mask of counting-typical sequences for distribution p."""
    p = np.asarray(p, dtype=np.float64)
    counts = _counts(seqs, p.size)
    ok = np.all(np.abs(counts - n * p) <= n * delta + COUNT_SLACK, axis=1)
    zero = p <= ZERO_PROB_TOL
    if zero.any():
        ok &= np.all(counts[:, zero] == 0, axis=1)
    return ok


@dataclass
class TypicalSet:
    """An exactly enumerated typical set with its total probability."""

    sequences: np.ndarray  # (M, n) member sequences
    probability: float
    p: np.ndarray
    n: int
    delta: float

    @property
    def size(self):
        return self.sequences.shape[0]

    def members(self):
        return [tuple(int(v) for v in row) for row in self.sequences]

    def __contains__(self, seq):
        seq = np.asarray(seq)
        return bool((self.sequences == seq).all(axis=1).any())


def typical_set(p, n, delta, limit=None):
    """T^n_{p,delta}: all sequences whose symbol counts sit within n*delta
    of n*p(x) for every x (zero-probability symbols excluded)."""
    p = np.asarray(p, dtype=np.float64)
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    seqs = enumerate_sequences(p.size, n, limit)
    mask = typical_mask(p, n, delta, seqs)
    member_probs = np.prod(p[seqs[mask]], axis=1) if mask.any() else np.zeros(0)
    return TypicalSet(
        sequences=seqs[mask],
        probability=float(member_probs.sum()),
        p=p,
        n=int(n),
        delta=float(delta),
    )


def conditionally_typical_mask(P, u_n, delta, seqs):
    """Mask of x-sequences conditionally typical for the stochastic map P
    (rows P[u] are the distributions P(.|u)) given the conditioning word."""
    P = np.asarray(P, dtype=np.float64)
    u_n = np.asarray(u_n, dtype=np.intp)
    n = u_n.size
    nx = P.shape[1]
    ok = np.ones(seqs.shape[0], dtype=bool)
    for u in np.unique(u_n):
        cols = np.nonzero(u_n == u)[0]
        counts = _counts(seqs[:, cols], nx)
        target = P[u] * cols.size
        ok &= np.all(np.abs(counts - target) <= n * delta + COUNT_SLACK, axis=1)
        zero = P[u] <= ZERO_PROB_TOL
        if zero.any():
            ok &= np.all(counts[:, zero] == 0, axis=1)
    return ok


def conditionally_typical_set(P, u_n, delta, limit=None):
    """Conditionally typical x-sequences: every pair count N((u,x)) is
    within n*delta of P(x|u) N(u|u^n)."""
    P = np.asarray(P, dtype=np.float64)
    if np.abs(P.sum(axis=1) - 1.0).max() > 1e-10 or P.min() < -1e-12:
        raise ValueError("rows of P must be probability distributions")
    u_n = np.asarray(u_n, dtype=np.intp)
    seqs = enumerate_sequences(P.shape[1], u_n.size, limit)
    mask = conditionally_typical_mask(P, u_n, delta, seqs)
    # mass under the product conditional distribution prod_i P(x_i | u_i)
    members = seqs[mask]
    probs = (
        np.prod(P[u_n[None, :], members], axis=1) if members.size else np.zeros(0)
    )
    return TypicalSet(
        sequences=seqs[mask],
        probability=float(probs.sum()),
        p=P,
        n=int(u_n.size),
        delta=float(delta),
    )


@dataclass
class TypicalProjector:
    """Projector onto a span of eigen-sequences, kept in factored form.

    ``factor_bases[i]`` is the eigenbasis used at position i and ``mask``
    selects the included eigen-index sequences (row-major ordering).  The
    dense matrix is assembled on demand and guarded.
    """

    factor_bases: tuple
    mask: np.ndarray
    dim: int
    n: int
    delta: float

    @property
    def rank(self):
        return int(self.mask.sum())

    @property
    def full_dim(self):
        return self.dim ** self.n

    def basis_matrix(self):
        return qmat.tensor_many(self.factor_bases)

    def masked_isometry(self, guard=None):
        """Columns of the product eigenbasis selected by the mask."""
        check_dim(self.full_dim, guard, "projector ambient dimension")
        u = self.basis_matrix()
        return u[:, self.mask]

    def matrix(self, guard=None):
        check_dim(self.full_dim, guard, "projector ambient dimension")
        w = self.masked_isometry(guard)
        return w @ w.conj().T

    def diagonal_weights(self, eigenvalue_rows):
        """prod_i eigenvalue_rows[i][k_i] over all index sequences.

        Used for exact traces against operators diagonal in the same
        product eigenbasis.
        """
        out = np.ones(1, dtype=np.float64)
        for row in eigenvalue_rows:
            out = np.multiply.outer(out, np.asarray(row)).ravel()
        return out


def typical_projector(rho, n, delta, limit=None, guard=None):
    """Typical projector of rho^{(x)n} in its canonical eigenbasis."""
    if not isinstance(rho, DensityOperator):
        rho = DensityOperator(rho)
    check_dim(rho.dim ** n, guard, "typical projector dimension")
    vals, vecs = rho.eig()
    seqs = enumerate_sequences(rho.dim, n, limit)
    mask = typical_mask(np.clip(vals, 0.0, None), n, delta, seqs)
    return TypicalProjector(
        factor_bases=tuple([vecs] * n),
        mask=mask,
        dim=rho.dim,
        n=int(n),
        delta=float(delta),
    )


def conditionally_typical_projector(states, u_n, delta, limit=None, guard=None):
    """Conditionally typical projector for the collection {rho_u} along u^n.

    Tensor-factored over the position classes I_u = {i : u_i = u}; within
    each class the typical counting is done against the conditioning
    symbol's spectrum, with the global slack n*delta.
    """
    states = [s if isinstance(s, DensityOperator) else DensityOperator(s) for s in states]
    u_n = np.asarray(u_n, dtype=np.intp)
    d = states[0].dim
    if any(s.dim != d for s in states):
        raise ValueError("all conditional states must share one dimension")
    check_dim(d ** u_n.size, guard, "conditional projector dimension")
    eigs = [s.eig() for s in states]
    spectra = np.stack([np.clip(e[0], 0.0, None) for e in eigs])
    seqs = enumerate_sequences(d, u_n.size, limit)
    mask = conditionally_typical_mask(spectra, u_n, delta, seqs)
    return TypicalProjector(
        factor_bases=tuple(eigs[u][1] for u in u_n),
        mask=mask,
        dim=d,
        n=int(u_n.size),
        delta=float(delta),
    )


# ---------------------------------------------------------------------------
# pruned distribution

@dataclass
class PrunedDistribution:
    """p^{(x)n} conditioned on the typical set and renormalized."""

    sequences: np.ndarray
    probs: np.ndarray
    s: float
    n: int
    delta: float

    @property
    def size(self):
        return self.sequences.shape[0]

    def sample(self, rng, size=None):
        idx = rng.choice(self.size, size=size, p=self.probs)
        if size is None:
            return tuple(int(v) for v in self.sequences[idx])
        return [tuple(int(v) for v in self.sequences[i]) for i in np.atleast_1d(idx)]


def pruned_distribution(p, n, delta, limit=None):
    """p'(x^n) = p(x^n)/s on the typical set, 0 elsewhere."""
    ts = typical_set(p, n, delta, limit)
    if ts.size == 0 or ts.probability <= 0.0:
        raise ValueError("typical set is empty; cannot prune")
    member_probs = np.prod(np.asarray(ts.p)[ts.sequences], axis=1)
    return PrunedDistribution(
        sequences=ts.sequences,
        probs=member_probs / ts.probability,
        s=ts.probability,
        n=int(n),
        delta=float(delta),
    )


# ---------------------------------------------------------------------------
# finite-n exponents and the property suite

def _abs_log_sum(p):
    p = np.asarray(p, dtype=np.float64)
    sup = p > ZERO_PROB_TOL
    return float(np.abs(np.log2(p[sup])).sum())


@dataclass
class TypicalityParams:
    """Blocklength, slack and the four exponent bounds with their constants.

    The constants are computed from the instance (support log-ranges plus
    conditional entropies), so each bound provably holds at this (n, delta);
    nothing is borrowed from an asymptotic regime.
    """

    n: int
    delta: float
    h_e: float
    h_e_given_x: float
    h_q: float
    h_q_given_x: float
    c_alpha: float
    c_beta: float
    c_alpha_tilde: float
    c_beta_tilde: float

    @property
    def c(self):
        return max(self.c_alpha, self.c_beta, self.c_alpha_tilde, self.c_beta_tilde)

    @property
    def alpha(self):
        return 2.0 ** (-self.n * (self.h_e + self.c_alpha * self.delta))

    @property
    def beta(self):
        return 2.0 ** (-self.n * (self.h_e_given_x - self.c_beta * self.delta))

    @property
    def alpha_tilde(self):
        return 2.0 ** (-self.n * (self.h_q - self.c_alpha_tilde * self.delta))

    @property
    def beta_tilde(self):
        return 2.0 ** (-self.n * (self.h_q_given_x + self.c_beta_tilde * self.delta))


def params_for(wiretap, ensemble, n, delta):
    """Exponent parameters for a wiretap channel and input distribution."""
    from .entropy import von_neumann  # local import to avoid a cycle

    probs = ensemble.probs
    nx = probs.size
    sup = probs > ZERO_PROB_TOL

    def side(states):
        avg = sum(p * s.matrix for p, s in zip(probs, states))
        avg_eigs = np.clip(np.linalg.eigvalsh(avg), 0.0, None)
        h_avg = float(np.sum(-avg_eigs[avg_eigs > ZERO_PROB_TOL]
                             * np.log2(avg_eigs[avg_eigs > ZERO_PROB_TOL])))
        h_cond = float(np.dot(probs, [von_neumann(s) for s in states]))
        c_uncond = (nx + 1) * _abs_log_sum(avg_eigs)
        c_cond = h_cond + sum(
            _abs_log_sum(np.linalg.eigvalsh(states[x].matrix))
            for x in range(nx)
            if sup[x]
        )
        return h_avg, h_cond, c_uncond, c_cond

    h_e, h_e_x, c_alpha, c_beta = side(wiretap.eve_states)
    h_q, h_q_x, c_alpha_t, c_beta_t = side(wiretap.bob_states)
    return TypicalityParams(
        n=int(n),
        delta=float(delta),
        h_e=h_e,
        h_e_given_x=h_e_x,
        h_q=h_q,
        h_q_given_x=h_q_x,
        c_alpha=c_alpha,
        c_beta=c_beta,
        c_alpha_tilde=c_alpha_t,
        c_beta_tilde=c_beta_t,
    )


@dataclass
class PropertyMargin:
    name: str
    kind: str  # mass | count | operator
    achieved: float
    bound: float
    margin: float

    def to_dict(self):
        return {
            "name": self.name,
            "kind": self.kind,
            "achieved": self.achieved,
            "bound": self.bound,
            "margin": self.margin,
        }


PROPERTY_NAMES = (
    "input-mass",
    "eve-cond-mass",
    "eve-typ-mass",
    "bob-cond-mass",
    "bob-typ-mass",
    "eve-typ-rank",
    "eve-cond-operator",
    "bob-cond-rank",
    "bob-typ-operator",
)


def verify_properties(wiretap, ensemble, n, delta, epsilon=None, limit=None, guard=None):
    """Exact margins for the nine finite-blocklength typicality properties.

    Mass properties report the worst deficit over all typical inputs; if an
    ``epsilon`` budget is given their margin is mass - (1 - epsilon),
    otherwise the mass itself.  Counting and operator-order properties are
    checked against the instance-derived exponents of
    :func:`params_for`.  Everything is computed by exact linear algebra and
    combinatorics; nothing is sampled.
    """
    probs = ensemble.probs
    nx = probs.size
    de, dq = wiretap.dim_e, wiretap.dim_q
    check_dim(de ** n, guard, "Eve block dimension")
    check_dim(dq ** n, guard, "Bob block dimension")
    params = params_for(wiretap, ensemble, n, delta)

    ts = typical_set(probs, n, delta, limit)
    if ts.size == 0:
        raise ValueError("typical input set is empty at this (n, delta)")

    def side_tables(states):
        eigs = [qmat.canonical_eigh(s.matrix) for s in states]
        spectra = np.stack([np.clip(e[0], 0.0, None) for e in eigs])
        avg = sum(p * s.matrix for p, s in zip(probs, states))
        avg_vals, avg_vecs = qmat.canonical_eigh(avg)
        avg_vals = np.clip(avg_vals, 0.0, None)
        # diagonal of each sigma_x in the average state's eigenbasis
        diags = np.stack(
            [np.diag(avg_vecs.conj().T @ s.matrix @ avg_vecs).real for s in states]
        )
        return spectra, avg_vals, diags

    spec_e, avg_e, diag_e = side_tables(wiretap.eve_states)
    spec_q, avg_q, diag_q = side_tables(wiretap.bob_states)

    eseq = enumerate_sequences(de, n, limit)
    qseq = enumerate_sequences(dq, n, limit)
    d_wide = delta * (nx + 1)
    mask_e_typ = typical_mask(avg_e, n, d_wide, eseq)
    mask_q_typ = typical_mask(avg_q, n, d_wide, qseq)

    pos = np.arange(n)

    def per_input(x_n):
        res = {}
        for label, spectra, diags, seqs, umask in (
            ("e", spec_e, diag_e, eseq, mask_e_typ),
            ("q", spec_q, diag_q, qseq, mask_q_typ),
        ):
            cmask = conditionally_typical_mask(spectra, x_n, delta, seqs)
            lam = np.prod(spectra[x_n][pos[None, :], seqs], axis=1)
            dia = np.prod(diags[x_n][pos[None, :], seqs], axis=1)
            res[label + "_cond_mass"] = float(lam[cmask].sum())
            res[label + "_typ_mass"] = float(dia[umask].sum())
            res[label + "_rank"] = int(cmask.sum())
            res[label + "_maxeig"] = float(lam[cmask].max()) if cmask.any() else 0.0
        return res

    worst = {
        "e_cond_mass": 1.0,
        "e_typ_mass": 1.0,
        "q_cond_mass": 1.0,
        "q_typ_mass": 1.0,
        "e_maxeig": 0.0,
        "q_rank": 0,
    }
    for row in ts.sequences:
        r = per_input(np.asarray(row, dtype=np.intp))
        for key in ("e_cond_mass", "e_typ_mass", "q_cond_mass", "q_typ_mass"):
            worst[key] = min(worst[key], r[key])
        worst["e_maxeig"] = max(worst["e_maxeig"], r["e_maxeig"])
        worst["q_rank"] = max(worst["q_rank"], r["q_rank"])

    avg_q_prod_max = float(
        np.prod(avg_q[qseq[mask_q_typ]], axis=1).max()
    ) if mask_q_typ.any() else 0.0

    def mass(name, achieved):
        bound = 1.0 - epsilon if epsilon is not None else 0.0
        return PropertyMargin(name, "mass", achieved, bound, achieved - bound)

    margins = [
        mass("input-mass", ts.probability),
        mass("eve-cond-mass", worst["e_cond_mass"]),
        mass("eve-typ-mass", worst["e_typ_mass"]),
        mass("bob-cond-mass", worst["q_cond_mass"]),
        mass("bob-typ-mass", worst["q_typ_mass"]),
        PropertyMargin(
            "eve-typ-rank", "count", float(mask_e_typ.sum()), 1.0 / params.alpha,
            1.0 / params.alpha - float(mask_e_typ.sum()),
        ),
        PropertyMargin(
            "eve-cond-operator", "operator", worst["e_maxeig"], params.beta,
            params.beta - worst["e_maxeig"],
        ),
        PropertyMargin(
            "bob-cond-rank", "count", float(worst["q_rank"]), 1.0 / params.beta_tilde,
            1.0 / params.beta_tilde - float(worst["q_rank"]),
        ),
        PropertyMargin(
            "bob-typ-operator", "operator", avg_q_prod_max, params.alpha_tilde,
            params.alpha_tilde - avg_q_prod_max,
        ),
    ]
    return margins, params
