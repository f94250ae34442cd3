"""BD-RIS architecture catalog.

Every architecture is described by the sparsity pattern of its susceptance
matrix. From that pattern we derive the indicator matrix, the non-zero
counting matrix, the transformation matrix mapping independent variables to
``vec(B)`` and the circuit complexity.
"""

import enum
import json
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np
import scipy.sparse as sp

from .errors import InvalidGrouping, InvalidStemCount, MaskViolation


class Kind(str, enum.Enum):
    SINGLE = "single"
    FULLY = "fully"
    GROUP = "group"
    TREE = "tree"
    FOREST = "forest"
    STEM = "stem"
    CLUSTER = "cluster"


_ALIASES = {
    "single": Kind.SINGLE,
    "fully": Kind.FULLY,
    "group": Kind.GROUP,
    "tree": Kind.TREE,
    "treearrowhead": Kind.TREE,
    "tree_arrowhead": Kind.TREE,
    "forest": Kind.FOREST,
    "stem": Kind.STEM,
    "cluster": Kind.CLUSTER,
}

GROUPED = (Kind.GROUP, Kind.FOREST, Kind.CLUSTER)


def parse_kind(kind):
    if isinstance(kind, Kind):
        return kind
    try:
        return _ALIASES[str(kind).strip().lower()]
    except KeyError:
        raise ValueError(f"unknown architecture kind {kind!r}") from None


@dataclass(frozen=True)
class ArchSpec:
    kind: Kind
    n: int
    g: int | None = None
    q: int | None = None
    q_g: int | None = None

    @property
    def group_size(self):
        if self.kind in GROUPED:
            return self.n // self.g
        if self.kind is Kind.SINGLE:
            return 1
        return self.n

    @property
    def n_groups(self):
        if self.kind in GROUPED:
            return self.g
        if self.kind is Kind.SINGLE:
            return self.n
        return 1

    @property
    def stems_per_block(self):
        """Stem count of each diagonal block when viewed as a cluster."""
        return {
            Kind.SINGLE: 0,
            Kind.FULLY: self.n - 1,
            Kind.TREE: 1,
            Kind.STEM: self.q,
            Kind.GROUP: self.group_size - 1,
            Kind.FOREST: 1,
            Kind.CLUSTER: self.q_g,
        }[self.kind]

    def label(self):
        parts = [self.kind.value, f"N={self.n}"]
        if self.g is not None:
            parts.append(f"G={self.g}")
        if self.q is not None:
            parts.append(f"Q={self.q}")
        if self.q_g is not None:
            parts.append(f"QG={self.q_g}")
        return ",".join(parts)

    def to_dict(self):
        d = {"kind": self.kind.value, "n": self.n}
        for key in ("g", "q", "q_g"):
            val = getattr(self, key)
            if val is not None:
                d[key] = val
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        kind = d.pop("kind")
        n = d.pop("n")
        unknown = set(d) - {"g", "q", "q_g"}
        if unknown:
            raise ValueError(f"unknown architecture fields {sorted(unknown)}")
        return make_arch(kind, n, **d)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def make_arch(kind, n, g=None, q=None, q_g=None):
    """Validated :class:`ArchSpec`.

    ``g`` is required for group, forest and cluster; ``q`` for stem; ``q_g``
    for cluster. Parameters irrelevant to ``kind`` are dropped.
    """
    kind = parse_kind(kind)
    n = int(n)
    if n < 1:
        raise ValueError(f"element count must be positive, got {n}")
    if kind in GROUPED:
        if g is None:
            raise InvalidGrouping(f"{kind.value} architecture needs a group count g")
        g = int(g)
        if g < 1 or n % g:
            raise InvalidGrouping(f"N={n} is not divisible into G={g} equal groups")
    else:
        g = None
    if kind is Kind.STEM:
        if q is None:
            raise InvalidStemCount("stem architecture needs a stem count q")
        q = int(q)
        if not 0 <= q <= n - 1:
            raise InvalidStemCount(f"stem count Q={q} outside [0, {n - 1}]")
    else:
        q = None
    if kind is Kind.CLUSTER:
        if q_g is None:
            raise InvalidStemCount("cluster architecture needs a per-group stem count q_g")
        q_g = int(q_g)
        if not 0 <= q_g <= n // g - 1:
            raise InvalidStemCount(f"per-group stem count Q_G={q_g} outside [0, {n // g - 1}]")
    else:
        q_g = None
    return ArchSpec(kind, n, g, q, q_g)


def _stem_block(size, stems):
    m = np.eye(size, dtype=np.int8)
    m[:stems, :] = 1
    m[:, :stems] = 1
    return m


def mask(spec):
    """Binary symmetric matrix marking entries of ``B`` that may be non-zero."""
    block = _stem_block(spec.group_size, spec.stems_per_block)
    return np.kron(np.eye(spec.n_groups, dtype=np.int8), block)


def counting_matrix(indicator):
    """Non-zero counting matrix of a symmetric indicator matrix.

    Row-major walk over the upper triangle (diagonal included): the counter
    increments on every 1 and is carried forward unchanged on every 0. The
    lower triangle mirrors the upper one.
    """
    a = np.asarray(indicator)
    n = a.shape[0]
    c = np.zeros((n, n), dtype=np.int64)
    count = 0
    for i in range(n):
        for j in range(i, n):
            if a[i, j]:
                count += 1
            c[i, j] = count
    iu = np.triu_indices(n, 1)
    c[iu[1], iu[0]] = c[iu]
    return c


@dataclass(frozen=True, eq=False)
class StructureMaps:
    """Indicator/counting matrices and the transformation matrix of one architecture.

    The transformation matrix has at most one non-zero per row and is stored
    as ``row_col``: for every row ``m`` of ``vec(B)`` (column-major) the
    0-based column index of its variable, or -1 for a structural zero.
    """

    indicator: np.ndarray
    counting: np.ndarray
    row_col: np.ndarray
    n_b: int

    @property
    def n(self):
        return self.indicator.shape[0]

    @cached_property
    def transform(self):
        rows = np.flatnonzero(self.row_col >= 0)
        data = np.ones(rows.size, dtype=np.int8)
        return sp.csr_matrix(
            (data, (rows, self.row_col[rows])), shape=(self.n * self.n, self.n_b)
        )

    def dense_transform(self):
        return self.transform.toarray()

    @cached_property
    def upper_positions(self):
        """(rows, cols) of the independent variables, in variable order."""
        n = self.n
        iu = np.triu_indices(n)
        keep = self.indicator[iu] == 1
        return iu[0][keep], iu[1][keep]

    @cached_property
    def entry_positions(self):
        """(rows, cols, var) for every non-zero entry of ``B`` (both triangles)."""
        m = np.flatnonzero(self.row_col >= 0)
        n = self.n
        return m % n, m // n, self.row_col[m]

    def vec_i(self, b_mat, atol=0.0):
        b_mat = np.asarray(b_mat, dtype=float)
        outside = np.abs(b_mat[self.indicator == 0])
        if outside.size and outside.max() > atol:
            raise MaskViolation(
                f"matrix has entries up to {outside.max():.3e} outside the architecture mask"
            )
        r, c = self.upper_positions
        return b_mat[r, c].copy()

    def expand(self, b_vec):
        b_vec = np.asarray(b_vec, dtype=float).ravel()
        if b_vec.size != self.n_b:
            raise ValueError(f"expected {self.n_b} independent variables, got {b_vec.size}")
        out = np.zeros(self.n * self.n)
        hit = self.row_col >= 0
        out[hit] = b_vec[self.row_col[hit]]
        return out.reshape((self.n, self.n), order="F")


def structure_from_indicator(indicator):
    ind = np.asarray(indicator, dtype=np.int8)
    cnt = counting_matrix(ind)
    a_vec = ind.reshape(-1, order="F")
    c_vec = cnt.reshape(-1, order="F")
    row_col = np.where(a_vec == 1, c_vec - 1, -1).astype(np.int64)
    n_b = int(np.count_nonzero(np.triu(ind)))
    return StructureMaps(ind, cnt, row_col, n_b)


@lru_cache(maxsize=256)
def transform_matrix(spec):
    return structure_from_indicator(mask(spec))


def vec_i(b_mat, spec):
    return transform_matrix(spec).vec_i(b_mat)


def expand(b_vec, spec):
    return transform_matrix(spec).expand(b_vec)


def circuit_complexity(spec):
    """Number of independent tunable admittances (closed form)."""
    n = spec.n
    if spec.kind is Kind.SINGLE:
        return n
    if spec.kind is Kind.FULLY:
        return n * (n + 1) // 2
    if spec.kind is Kind.TREE:
        return 2 * n - 1
    if spec.kind is Kind.FOREST:
        return 2 * n - spec.g
    if spec.kind is Kind.GROUP:
        return n * (n // spec.g + 1) // 2
    if spec.kind is Kind.STEM:
        q = spec.q
        return q * n + n - q * (q + 1) // 2
    qg = spec.q_g
    return qg * n + n - spec.g * qg * (qg + 1) // 2


def mask_count(spec):
    """Brute-force count of upper-triangular mask entries."""
    return int(np.count_nonzero(np.triu(mask(spec))))
