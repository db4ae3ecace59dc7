"""Dense complex-matrix and quantum-state primitives.

Tensor products, partial traces, Hermitian matrix functions, trace norm,
fidelity, purification and the reference-side unitary realizing Uhlmann's
theorem.  All operations are pure functions on immutable values; entropies
elsewhere are in bits (base-2 logs).

Matrix functions go through Hermitian eigendecomposition only: dimensions
are small (<= 4096) and exactness matters more than scale.
"""

import numpy as np

HERMITICITY_TOL = 1e-10
EIG_CLIP_TOL = 1e-10
TRACE_TOL = 1e-10
NORM_TOL = 1e-12
RANK_TOL = 1e-12


def _as_complex(a):
    return np.asarray(a, dtype=np.complex128)


def canonical_eigh(h):
    """Eigendecomposition with a reproducible convention.

    Eigenvalues are sorted in descending order (stable under ties) and each
    eigenvector's global phase is fixed by making its largest-magnitude
    component real and positive.

    Returns
    -------
    (vals, vecs) : eigenvalues (descending) and eigenvectors as columns.
    """
    vals, vecs = np.linalg.eigh(h)
    order = np.argsort(-vals, kind="stable")
    vals = vals[order]
    vecs = vecs[:, order]
    lead = np.argmax(np.abs(vecs), axis=0)
    phases = vecs[lead, np.arange(vecs.shape[1])]
    phases = np.where(np.abs(phases) < 1e-300, 1.0, phases / np.abs(phases))
    return vals, vecs / phases


class DensityOperator:
    """Trace-one positive Hermitian matrix.

    Construction validates Hermiticity (1e-10), positivity (eigenvalues
    >= -1e-10) and unit trace (1e-10).  Eigenvalues in [-1e-10, 0) are
    clipped to zero and the spectrum renormalized; anything more negative
    is an error, not numerical drift.
    """

    __slots__ = ("matrix", "dim")

    def __init__(self, matrix):
        m = _as_complex(matrix)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density operator must be a square matrix")
        if np.abs(m - m.conj().T).max() > HERMITICITY_TOL:
            raise ValueError(
                "matrix is not Hermitian (residual %.3e)"
                % np.abs(m - m.conj().T).max()
            )
        m = 0.5 * (m + m.conj().T)
        tr = m.trace().real
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError("trace %.12f is not 1 within %.0e" % (tr, TRACE_TOL))
        vals = np.linalg.eigvalsh(m)
        if vals.min() < -EIG_CLIP_TOL:
            raise ValueError(
                "matrix has eigenvalue %.3e below the -%.0e positivity floor"
                % (vals.min(), EIG_CLIP_TOL)
            )
        if vals.min() < 0.0:
            vals2, vecs = canonical_eigh(m)
            vals2 = np.clip(vals2, 0.0, None)
            vals2 = vals2 / vals2.sum()
            m = (vecs * vals2) @ vecs.conj().T
        m.flags.writeable = False
        self.matrix = m
        self.dim = m.shape[0]

    def eig(self):
        """Canonical (descending, phase-fixed) eigendecomposition."""
        return canonical_eigh(self.matrix)

    def rank(self, tol=RANK_TOL):
        return int((np.linalg.eigvalsh(self.matrix) > tol).sum())

    def __repr__(self):
        return "DensityOperator(dim=%d)" % self.dim


class PureState:
    """Unit vector (norm within 1e-12)."""

    __slots__ = ("vector", "dim")

    def __init__(self, vector):
        v = _as_complex(vector).ravel()
        nrm = np.linalg.norm(v)
        if abs(nrm - 1.0) > NORM_TOL:
            raise ValueError("vector norm %.15f is not 1 within %.0e" % (nrm, NORM_TOL))
        v.flags.writeable = False
        self.vector = v
        self.dim = v.size

    def density(self):
        return DensityOperator(np.outer(self.vector, self.vector.conj()))

    def __repr__(self):
        return "PureState(dim=%d)" % self.dim


class SubsystemShape:
    """Ordered tensor factorization of an ambient dimension."""

    __slots__ = ("dims",)

    def __init__(self, dims):
        dims = tuple(int(d) for d in dims)
        if not dims or any(d < 1 for d in dims):
            raise ValueError("factor dimensions must be positive integers")
        self.dims = dims

    @property
    def dim(self):
        return int(np.prod(self.dims))

    def __len__(self):
        return len(self.dims)

    def check(self, ambient_dim):
        if self.dim != ambient_dim:
            raise ValueError(
                "shape %r has product %d, inconsistent with dimension %d"
                % (self.dims, self.dim, ambient_dim)
            )
        return self

    def __repr__(self):
        return "SubsystemShape(%r)" % (self.dims,)


def tensor(a, b):
    """Kronecker product; dimensions multiply."""
    return np.kron(_as_complex(a), _as_complex(b))


def tensor_many(mats):
    """Left-to-right Kronecker product of a sequence of matrices/vectors."""
    mats = list(mats)
    out = _as_complex(mats[0])
    for m in mats[1:]:
        out = np.kron(out, _as_complex(m))
    return out


def _partial_trace_array(mat, dims, keep):
    dims = list(dims)
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise ValueError("keep indices %r out of range for %d factors" % (keep, n))
    if not keep:
        raise ValueError("cannot trace out every factor")
    a = _as_complex(mat).reshape(dims + dims)
    drop = [i for i in range(n) if i not in keep]
    for idx in sorted(drop, reverse=True):
        a = np.trace(a, axis1=idx, axis2=idx + len(dims))
        dims = dims[:idx] + dims[idx + 1 :]
    d = int(np.prod(dims))
    return a.reshape(d, d)


def partial_trace(state, shape, keep):
    """Reduced state on the kept factors.

    Parameters
    ----------
    state : DensityOperator or ndarray
    shape : SubsystemShape (product must match the state dimension)
    keep : iterable of factor indices to keep

    Returns the same kind of object it was given.
    """
    if isinstance(state, DensityOperator):
        shape.check(state.dim)
        return DensityOperator(_partial_trace_array(state.matrix, shape.dims, keep))
    a = _as_complex(state)
    shape.check(a.shape[0])
    return _partial_trace_array(a, shape.dims, keep)


def trace_norm(a):
    """Sum of singular values, ||A||_1 = Tr sqrt(A A^dag)."""
    return float(np.linalg.svd(_as_complex(a), compute_uv=False).sum())


def trace_distance(a, b):
    ma = a.matrix if isinstance(a, DensityOperator) else _as_complex(a)
    mb = b.matrix if isinstance(b, DensityOperator) else _as_complex(b)
    return trace_norm(ma - mb)


def psd_sqrt(mat, clip=0.0):
    """Hermitian PSD square root via eigendecomposition."""
    vals, vecs = np.linalg.eigh(_as_complex(mat))
    vals = np.sqrt(np.clip(vals, clip, None))
    return (vecs * vals) @ vecs.conj().T


def pinv_sqrt(mat, tol=RANK_TOL):
    """Pseudo-inverse square root on the support; zero off-support.

    Also returns the support projector so callers can absorb the deficiency
    into a null outcome.
    """
    vals, vecs = np.linalg.eigh(_as_complex(mat))
    pos = vals > tol
    inv = np.zeros_like(vals)
    inv[pos] = 1.0 / np.sqrt(vals[pos])
    root = (vecs * inv) @ vecs.conj().T
    support = (vecs * pos.astype(float)) @ vecs.conj().T
    return root, support


def fidelity(rho, sigma):
    """F(rho, sigma) = ||sqrt(rho) sqrt(sigma)||_1^2, in [0, 1].

    Symmetric, equal to 1 iff the states coincide, and for a pure pair it
    reduces to the squared overlap.
    """
    ra = rho.matrix if isinstance(rho, DensityOperator) else _as_complex(rho)
    sa = sigma.matrix if isinstance(sigma, DensityOperator) else _as_complex(sigma)
    if ra.shape != sa.shape:
        raise ValueError("fidelity requires equal dimensions")
    s = np.linalg.svd(psd_sqrt(ra) @ psd_sqrt(sa), compute_uv=False)
    return float(min(1.0, s.sum() ** 2))


def purify(rho):
    """Purification on reference (x) system with reference dim = rank(rho).

    Uses the canonical eigendecomposition, so the purification of a given
    matrix is reproducible.
    """
    if not isinstance(rho, DensityOperator):
        rho = DensityOperator(rho)
    vals, vecs = rho.eig()
    r = max(1, int((vals > RANK_TOL).sum()))
    amps = np.sqrt(np.clip(vals[:r], 0.0, None))
    amps = amps / np.linalg.norm(amps)
    vec = (amps[:, None] * vecs[:, :r].T).ravel()
    return PureState(vec)


def uhlmann_unitary(phi, psi, shape, reference):
    """Reference-side unitary U maximizing |<psi| (U (x) I) |phi>|.

    ``phi`` and ``psi`` purify states on the non-reference factors of
    ``shape``; ``reference`` is the index of the reference factor.  The
    maximizer comes from the SVD of the cross-Gram operator on the
    reference, with the phase fixed to make the achieved overlap real and
    positive; the achieved squared overlap equals the fidelity of the
    reduced states (Uhlmann's theorem).
    """
    pv = phi.vector if isinstance(phi, PureState) else _as_complex(phi).ravel()
    sv = psi.vector if isinstance(psi, PureState) else _as_complex(psi).ravel()
    dims = shape.check(pv.size).dims
    if sv.size != pv.size:
        raise ValueError("purifications must live on the same space")
    reference = int(reference)
    if reference < 0 or reference >= len(dims):
        raise ValueError("reference index %d out of range" % reference)
    perm = [reference] + [i for i in range(len(dims)) if i != reference]
    d_ref = dims[reference]
    d_rest = pv.size // d_ref

    def as_matrix(v):
        t = v.reshape(dims).transpose(perm)
        return t.reshape(d_ref, d_rest)

    m_phi = as_matrix(pv)
    m_psi = as_matrix(sv)
    a = m_phi @ m_psi.conj().T
    w, _, vh = np.linalg.svd(a)
    return vh.conj().T @ w.conj().T


def apply_to_factor(op, vec, dims, index):
    """Apply ``op`` (out x in) to tensor factor ``index`` of a vector.

    Returns (new_vector, new_dims); the transformed factor keeps its slot.
    """
    dims = list(dims)
    op = _as_complex(op)
    t = _as_complex(vec).reshape(dims)
    t = np.tensordot(op, t, axes=([1], [index]))
    t = np.moveaxis(t, 0, index)
    dims[index] = op.shape[0]
    return t.ravel(), tuple(dims)


def permute_factors_vec(vec, dims, perm):
    """Reorder the tensor factors of a vector."""
    t = _as_complex(vec).reshape(list(dims))
    t = t.transpose(perm)
    return t.ravel(), tuple(dims[p] for p in perm)


def permute_factors_mat(mat, dims, perm):
    """Reorder the tensor factors of an operator."""
    n = len(dims)
    dims = list(dims)
    a = _as_complex(mat).reshape(dims + dims)
    perm = list(perm)
    a = a.transpose(perm + [p + n for p in perm])
    d = int(np.prod(dims))
    return a.reshape(d, d)


def maximally_entangled(k):
    """|Phi^k> = k^{-1/2} sum_i |i>|i> on a k*k-dimensional space."""
    v = np.zeros(k * k, dtype=np.complex128)
    v[:: k + 1] = 1.0 / np.sqrt(k)
    return PureState(v)


# ---------------------------------------------------------------------------
# seeded random objects (used by trial suites and tests)

def random_pure(dim, rng):
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return PureState(v / np.linalg.norm(v))


def random_density(dim, rng, rank=None):
    rank = dim if rank is None else int(rank)
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    m = g @ g.conj().T
    return DensityOperator(m / m.trace().real)


def random_unitary(dim, rng):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_isometry(dim_out, dim_in, rng):
    if dim_out < dim_in:
        raise ValueError("isometry needs dim_out >= dim_in")
    g = rng.standard_normal((dim_out, dim_in)) + 1j * rng.standard_normal(
        (dim_out, dim_in)
    )
    q, r = np.linalg.qr(g)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_effect(dim, rng):
    """Random operator with 0 <= Lambda <= I."""
    u = random_unitary(dim, rng)
    return (u * rng.uniform(0.0, 1.0, size=dim)) @ u.conj().T


# ---------------------------------------------------------------------------
# JSON wire format: complex matrices as nested [re, im] pairs, row-major

def matrix_to_json(mat):
    m = _as_complex(mat)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_json(data):
    try:
        m = np.asarray(data, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ValueError("malformed matrix JSON: %s" % exc) from exc
    if m.ndim != 3 or m.shape[2] != 2:
        raise ValueError(
            "matrix JSON must be a nested array of [re, im] pairs, got shape %r"
            % (m.shape,)
        )
    return m[:, :, 0] + 1j * m[:, :, 1]
