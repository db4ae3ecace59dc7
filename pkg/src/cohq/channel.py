"""Quantum channels as Kraus families.

Covers isometric extensions with an explicit environment, complementary
outputs, tensor powers, classical-quantum wiretap channels built from a
channel plus an input alphabet, and a small gallery of example channels.
Channels are immutable after construction.
"""

import re

import numpy as np

from . import qmat
from .guards import check_dim
from .qmat import DensityOperator, PureState

COMPLETENESS_REJECT = 1e-8
MARGINAL_TOL = 1e-10


class QuantumChannel:
    """Completely positive trace-preserving map given by operation elements.

    The Kraus family must satisfy sum_i A_i^dag A_i = I on the input space;
    construction rejects anything with completeness residual above 1e-8.
    Input and output Hilbert spaces may differ.
    """

    __slots__ = ("kraus", "dim_in", "dim_out")

    def __init__(self, kraus):
        ops = [np.asarray(k, dtype=np.complex128) for k in kraus]
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        shape = ops[0].shape
        if len(shape) != 2 or any(op.shape != shape for op in ops):
            raise ValueError("all Kraus operators must share one (out x in) shape")
        dim_out, dim_in = shape
        total = sum(op.conj().T @ op for op in ops)
        residual = np.abs(total - np.eye(dim_in)).max()
        if residual > COMPLETENESS_REJECT:
            raise ValueError(
                "Kraus family is not trace preserving: completeness residual %.3e"
                % residual
            )
        for op in ops:
            op.flags.writeable = False
        self.kraus = tuple(ops)
        self.dim_in = dim_in
        self.dim_out = dim_out

    def apply(self, rho):
        """N(rho) = sum_i A_i rho A_i^dag."""
        mat = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho)
        if mat.shape[0] != self.dim_in:
            raise ValueError(
                "input dimension %d does not match channel input %d"
                % (mat.shape[0], self.dim_in)
            )
        out = sum(a @ mat @ a.conj().T for a in self.kraus)
        if isinstance(rho, DensityOperator):
            return DensityOperator(out)
        return out

    def __repr__(self):
        return "QuantumChannel(%d->%d, %d Kraus)" % (
            self.dim_in,
            self.dim_out,
            len(self.kraus),
        )


def from_kraus(kraus):
    """Build a channel, verifying the completeness invariant."""
    return QuantumChannel(kraus)


def apply(chan, rho):
    return chan.apply(rho)


class IsometricExtension:
    """Isometry V: input -> Bob (x) environment realizing a channel.

    The environment dimension equals the Kraus count; no minimization is
    attempted because the entropic quantities computed downstream are
    independent of the choice of extension.
    """

    __slots__ = ("dim_in", "dim_q", "dim_e", "isometry")

    def __init__(self, dim_in, dim_q, dim_e, isometry):
        v = np.asarray(isometry, dtype=np.complex128)
        if v.shape != (dim_q * dim_e, dim_in):
            raise ValueError("isometry has shape %r, expected (%d, %d)"
                             % (v.shape, dim_q * dim_e, dim_in))
        if np.abs(v.conj().T @ v - np.eye(dim_in)).max() > 1e-10:
            raise ValueError("V^dag V deviates from the identity beyond 1e-10")
        v.flags.writeable = False
        self.dim_in = dim_in
        self.dim_q = dim_q
        self.dim_e = dim_e
        self.isometry = v

    def apply_vector(self, vec):
        """Image of a pure input, as a vector on (Q, E)."""
        return self.isometry @ np.asarray(vec, dtype=np.complex128)

    def joint(self, rho):
        """V rho V^dag on (Q, E)."""
        mat = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho)
        if mat.shape[0] != self.dim_in:
            raise ValueError("dimension mismatch for isometric extension input")
        return self.isometry @ mat @ self.isometry.conj().T

    def bob(self, rho):
        joint = self.joint(rho)
        return qmat._partial_trace_array(joint, (self.dim_q, self.dim_e), [0])

    def eve(self, rho):
        joint = self.joint(rho)
        return qmat._partial_trace_array(joint, (self.dim_q, self.dim_e), [1])

    def __repr__(self):
        return "IsometricExtension(%d -> %d x %d)" % (
            self.dim_in,
            self.dim_q,
            self.dim_e,
        )


def isometric_extension(chan):
    """Stack the Kraus operators into the Stinespring isometry.

    V[(q, e), p] = A_e[q, p], so tracing out the environment index e of
    V rho V^dag reproduces the channel.
    """
    dq, de, din = chan.dim_out, len(chan.kraus), chan.dim_in
    v = np.zeros((dq * de, din), dtype=np.complex128)
    view = v.reshape(dq, de, din)
    for e, a in enumerate(chan.kraus):
        view[:, e, :] = a
    return IsometricExtension(din, dq, de, v)


def complementary_state(ext, rho):
    """Eve's output Tr_Q V rho V^dag as a DensityOperator."""
    return DensityOperator(ext.eve(rho))


def tensor_power(chan, n, guard=None):
    """n-fold tensor power; the Kraus family is all n-fold products."""
    n = int(n)
    if n < 1:
        raise ValueError("tensor power needs n >= 1")
    if n == 1:
        return chan
    check_dim(chan.dim_in ** n, guard, "tensor-power input dimension")
    check_dim(chan.dim_out ** n, guard, "tensor-power output dimension")
    check_dim(len(chan.kraus) ** n, guard, "tensor-power Kraus count")
    ops = [np.ones((1, 1), dtype=np.complex128)]
    for _ in range(n):
        ops = [np.kron(a, b) for a in ops for b in chan.kraus]
    return QuantumChannel(ops)


def compose(after, before):
    """Channel composition (after o before) via Kraus products."""
    if after.dim_in != before.dim_out:
        raise ValueError("composition dimension mismatch")
    return QuantumChannel([b @ a for b in after.kraus for a in before.kraus])


# ---------------------------------------------------------------------------
# ensembles and classical-quantum wiretap channels

class Ensemble:
    """{p(x), rho_x} with an optional classical pre-channel Q(t|x).

    The pre-channel models a coarser classical variable T correlated with X
    through a conditional distribution, used for the classical-quantum
    Markov-chain construction.
    """

    __slots__ = ("probs", "states", "pre_channel")

    def __init__(self, probs, states, pre_channel=None):
        p = np.asarray(probs, dtype=np.float64)
        if p.ndim != 1 or len(states) != p.size:
            raise ValueError("need one probability per state")
        if p.min() < -1e-12:
            raise ValueError("negative probability %.3e" % p.min())
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities sum to %.15f, not 1" % p.sum())
        p = np.clip(p, 0.0, None)
        p.flags.writeable = False
        self.probs = p
        self.states = tuple(
            s if isinstance(s, DensityOperator) else DensityOperator(s)
            for s in states
        )
        if pre_channel is not None:
            q = np.asarray(pre_channel, dtype=np.float64)
            if q.ndim != 2 or q.shape[1] != p.size:
                raise ValueError("pre-channel must be a (|T| x |X|) column-stochastic map")
            if np.abs(q.sum(axis=0) - 1.0).max() > 1e-12 or q.min() < -1e-12:
                raise ValueError("pre-channel columns must be distributions")
            q.flags.writeable = False
            pre_channel = q
        self.pre_channel = pre_channel

    @property
    def size(self):
        return self.probs.size

    @property
    def dim(self):
        return self.states[0].dim

    def average(self):
        m = sum(p * s.matrix for p, s in zip(self.probs, self.states))
        return DensityOperator(m)

    def __repr__(self):
        return "Ensemble(size=%d, dim=%d)" % (self.size, self.dim)


def eigen_ensemble(rho, drop_zero=True, tol=1e-12):
    """Orthonormal pure-state ensemble from the eigendecomposition of rho."""
    if not isinstance(rho, DensityOperator):
        rho = DensityOperator(rho)
    vals, vecs = rho.eig()
    keep = vals > tol if drop_zero else np.ones_like(vals, dtype=bool)
    probs = np.clip(vals[keep], 0.0, None)
    probs = probs / probs.sum()
    states = [
        DensityOperator(np.outer(vecs[:, i], vecs[:, i].conj()))
        for i in np.nonzero(keep)[0]
    ]
    vectors = [vecs[:, i].copy() for i in np.nonzero(keep)[0]]
    return Ensemble(probs, states), vectors


class CQWiretapChannel:
    """Map x -> rho_x^{QE}; Bob holds Q, Eve holds E.

    Stores the joint output per symbol together with both marginals, which
    are checked to be partial traces of the joint.
    """

    __slots__ = ("joints", "bob_states", "eve_states", "dim_q", "dim_e", "size")

    def __init__(self, joints, dim_q, dim_e):
        self.size = len(joints)
        self.dim_q = int(dim_q)
        self.dim_e = int(dim_e)
        self.joints = tuple(
            j if isinstance(j, DensityOperator) else DensityOperator(j)
            for j in joints
        )
        shape = (self.dim_q, self.dim_e)
        bob, eve = [], []
        for j in self.joints:
            if j.dim != self.dim_q * self.dim_e:
                raise ValueError("joint state dimension does not factor as Q x E")
            bob.append(qmat._partial_trace_array(j.matrix, shape, [0]))
            eve.append(qmat._partial_trace_array(j.matrix, shape, [1]))
        self.bob_states = tuple(DensityOperator(b) for b in bob)
        self.eve_states = tuple(DensityOperator(e) for e in eve)

    def check_marginals(self, bob=None, eve=None, tol=MARGINAL_TOL):
        """Verify externally supplied marginals against the joints."""
        for given, computed in ((bob, self.bob_states), (eve, self.eve_states)):
            if given is None:
                continue
            for g, c in zip(given, computed):
                gm = g.matrix if isinstance(g, DensityOperator) else np.asarray(g)
                if np.abs(gm - c.matrix).max() > tol:
                    raise ValueError("marginal deviates from the joint's partial trace")
        return True

    def __repr__(self):
        return "CQWiretapChannel(|X|=%d, Q=%d, E=%d)" % (
            self.size,
            self.dim_q,
            self.dim_e,
        )


def wiretap_from_alphabet(ext, states, probs):
    """Prepend a classical->quantum alphabet to an isometric extension.

    Returns the induced wiretap channel x -> U_N rho_x U_N^dag together
    with the input ensemble.
    """
    ensemble = states if isinstance(states, Ensemble) else Ensemble(probs, states)
    joints = [ext.joint(s) for s in ensemble.states]
    wiretap = CQWiretapChannel(joints, ext.dim_q, ext.dim_e)
    return wiretap, ensemble


# ---------------------------------------------------------------------------
# example gallery

_PAULI = {
    "I": np.eye(2, dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
}


def _identity_channel(d):
    return QuantumChannel([np.eye(d)])


def _depolarizing_channel(d):
    # completely depolarizing: rho -> I/d, Kraus {|i><j| / sqrt(d)}
    ops = []
    for i in range(d):
        for j in range(d):
            k = np.zeros((d, d), dtype=np.complex128)
            k[i, j] = 1.0 / np.sqrt(d)
            ops.append(k)
    return QuantumChannel(ops)


def _block_example_channel():
    """4-dim channel: preserves span{|0>,|1>}, completely depolarizes span{|2>,|3>}.

    Kraus realization: the projector onto the preserved block, plus the four
    (1/2) Pauli operators embedded in the depolarized block.
    """
    p12 = np.zeros((4, 4), dtype=np.complex128)
    p12[0, 0] = p12[1, 1] = 1.0
    ops = [p12]
    for name in ("I", "X", "Y", "Z"):
        k = np.zeros((4, 4), dtype=np.complex128)
        k[2:, 2:] = 0.5 * _PAULI[name]
        ops.append(k)
    return QuantumChannel(ops)


def block_states(eps=0.0):
    """The canonical 4-dim inputs for the example channel.

    Returns (pi12, pi34, pi12', pi34') where the primed states mix in a
    fraction ``eps`` of the opposite block.
    """
    pi12 = np.diag([0.5, 0.5, 0.0, 0.0]).astype(np.complex128)
    pi34 = np.diag([0.0, 0.0, 0.5, 0.5]).astype(np.complex128)
    p12 = DensityOperator((1 - eps) * pi12 + eps * pi34)
    p34 = DensityOperator((1 - eps) * pi34 + eps * pi12)
    return (
        DensityOperator(pi12),
        DensityOperator(pi34),
        p12,
        p34,
    )


_NAME_RE = re.compile(r"^(identity|depolarizing)\((\d+)\)$")


def make_example(name):
    """Channel gallery: 'appendix-c', 'identity(d)', 'depolarizing(d)'."""
    name = name.strip()
    if name == "appendix-c":
        return _block_example_channel()
    m = _NAME_RE.match(name)
    if m:
        d = int(m.group(2))
        if d < 1:
            raise ValueError("dimension must be positive in %r" % name)
        return _identity_channel(d) if m.group(1) == "identity" else _depolarizing_channel(d)
    raise ValueError(
        "unknown example channel %r (expected appendix-c, identity(d) or depolarizing(d))"
        % name
    )


def random_channel(dim_in, dim_out, dim_env, rng):
    """Haar-random channel via a random isometry into output x environment."""
    if dim_out * dim_env < dim_in:
        raise ValueError("need dim_out * dim_env >= dim_in")
    v = qmat.random_isometry(dim_out * dim_env, dim_in, rng)
    view = v.reshape(dim_out, dim_env, dim_in)
    return QuantumChannel([view[:, e, :] for e in range(dim_env)])


# ---------------------------------------------------------------------------
# JSON wire format

def channel_to_json(chan):
    return {
        "dim_in": chan.dim_in,
        "dim_out": chan.dim_out,
        "kraus": [qmat.matrix_to_json(k) for k in chan.kraus],
    }


def channel_from_json(data):
    if not isinstance(data, dict) or "kraus" not in data:
        raise ValueError("channel JSON must be an object with a 'kraus' list")
    chan = QuantumChannel([qmat.matrix_from_json(k) for k in data["kraus"]])
    for key, expect in (("dim_in", chan.dim_in), ("dim_out", chan.dim_out)):
        if key in data and int(data[key]) != expect:
            raise ValueError(
                "channel JSON declares %s=%s but the Kraus shapes give %d"
                % (key, data[key], expect)
            )
    return chan
