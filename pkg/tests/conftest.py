import numpy as np
import pytest

from bdris import arch


def specs_for(n):
    """One representative spec per architecture kind at size ``n`` (n divisible by 4)."""
    return [
        arch.make_arch("single", n),
        arch.make_arch("fully", n),
        arch.make_arch("group", n, g=n // 4),
        arch.make_arch("tree", n),
        arch.make_arch("forest", n, g=n // 4),
        arch.make_arch("stem", n, q=3),
        arch.make_arch("cluster", n, g=2, q_g=2),
    ]


def random_masked_b(spec, rng, scale=0.05):
    """Random symmetric susceptance obeying the architecture mask."""
    maps = arch.transform_matrix(spec)
    return maps.expand(scale * rng.standard_normal(maps.n_b))


def random_complex(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def all_specs(n):
    """Every valid architecture at size ``n``."""
    out = [arch.make_arch("single", n), arch.make_arch("fully", n), arch.make_arch("tree", n)]
    out += [arch.make_arch("stem", n, q=q) for q in range(n)]
    for g in range(1, n + 1):
        if n % g:
            continue
        out += [arch.make_arch("group", n, g=g), arch.make_arch("forest", n, g=g)]
        out += [arch.make_arch("cluster", n, g=g, q_g=qg) for qg in range(n // g)]
    return out
