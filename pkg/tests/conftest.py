import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("ci", deadline=None, max_examples=25)
settings.load_profile("ci")


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def random_hermitian(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (a + a.conj().T) / 2


def random_density(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / rho.trace()


def random_xstate(rng):
    from discordlab.dynamics import XState

    pops = rng.dirichlet(np.ones(4))
    a, b, c, d = pops
    delta = rng.uniform(0, np.sqrt(a * d)) * np.exp(2j * np.pi * rng.uniform())
    beta = rng.uniform(0, np.sqrt(b * c)) * np.exp(2j * np.pi * rng.uniform())
    return XState(a=a, b=b, c=c, d=d, delta=delta, beta_c=beta)


def bell_phi_plus():
    m = np.zeros((4, 4), dtype=complex)
    m[0, 0] = m[0, 3] = m[3, 0] = m[3, 3] = 0.5
    return m


def random_cq_state(rng):
    """Random classical-quantum state from its defining parameters."""
    from discordlab.measures import CQStateParams, Measurement

    r0 = rng.normal(size=3)
    r0 *= rng.uniform() / max(1.0, np.linalg.norm(r0))
    r1 = rng.normal(size=3)
    r1 *= rng.uniform() / max(1.0, np.linalg.norm(r1))
    params = CQStateParams(
        basis=Measurement(theta=rng.uniform(0, np.pi / 2), phi=rng.uniform(0, np.pi)),
        p=rng.uniform(),
        bloch0=r0,
        bloch1=r1,
    )
    return params.to_matrix()
