import pytest

from cverasure.plon import fidelity_ansatz


@pytest.fixture(scope="session")
def fidelity_endpoints():
    """The slow fidelity evaluations, shared by every test that needs them."""
    return {
        (100, 1.0): fidelity_ansatz(100, 0.5),
        (100, 9.0): fidelity_ansatz(100, 0.9),
        (200, 1.0): fidelity_ansatz(200, 0.5),
        (1000, 1.0): fidelity_ansatz(1000, 0.5),
    }
