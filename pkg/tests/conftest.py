import numpy as np
import pytest

from cavkerr import reference_cavity, reference_trap

TWO_PI = 2 * np.pi


@pytest.fixture
def cavity30():
    """Reference cavity at delta_ca = -2pi x 30 GHz (asymmetric lineshapes)."""
    return reference_cavity(delta_ca=-TWO_PI * 30e9)


@pytest.fixture
def cavity101():
    """Reference cavity at delta_ca = -2pi x 101 GHz (hysteresis sweeps)."""
    return reference_cavity(delta_ca=-TWO_PI * 101e9)


@pytest.fixture
def cavity260():
    """Reference cavity at delta_ca = -2pi x 260 GHz (ring-up transients)."""
    return reference_cavity(delta_ca=-TWO_PI * 260e9)


@pytest.fixture
def trap42():
    return reference_trap(omega_z=TWO_PI * 42e3)


@pytest.fixture
def trap49():
    return reference_trap(omega_z=TWO_PI * 49e3)
