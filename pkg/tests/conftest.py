import numpy as np
import pytest

from elliptica import Lattice, build_symmetric_wp
from elliptica.catenoid_field import (
    FieldConfig,
    build_field_data,
    mesh_fundamental_domain,
    replicate,
    translation_periods,
)
from elliptica.gammafn import build_gamma, rescale_lattice_for_unit_c0

RHOMBIC = (np.exp(1j * np.pi / 6), -np.exp(-1j * np.pi / 6))


@pytest.fixture(scope="session")
def wp_square():
    return build_symmetric_wp(Lattice(1.0, 1j))


@pytest.fixture(scope="session")
def wp_rect():
    return build_symmetric_wp(Lattice(1.0, 2j))


@pytest.fixture(scope="session")
def wp_rhombic():
    return build_symmetric_wp(Lattice(*RHOMBIC))


@pytest.fixture(scope="session")
def all_wps(wp_square, wp_rect, wp_rhombic):
    return {"square": wp_square, "rectangular": wp_rect, "rhombic": wp_rhombic}


@pytest.fixture(scope="session")
def gamma_square(wp_square):
    return build_gamma(wp_square)


@pytest.fixture(scope="session")
def gamma_rect(wp_rect):
    return build_gamma(wp_rect)


@pytest.fixture(scope="session")
def gamma_unit_c0(gamma_square):
    return rescale_lattice_for_unit_c0(gamma_square)


@pytest.fixture(scope="session")
def field(gamma_unit_c0):
    return build_field_data(FieldConfig(mesh_nu=20, mesh_nv=20, copies=(1, 1)),
                            gamma=gamma_unit_c0)


@pytest.fixture(scope="session")
def field_periods(field):
    return translation_periods(field)


@pytest.fixture(scope="session")
def mesh_r(field):
    return mesh_fundamental_domain(field)


@pytest.fixture(scope="session")
def block_2x2(field, mesh_r):
    return replicate(field, mesh_r)


@pytest.fixture(scope="session")
def block_single(gamma_unit_c0, mesh_r):
    f = build_field_data(FieldConfig(mesh_nu=20, mesh_nv=20, copies=(0, 0)),
                         gamma=gamma_unit_c0)
    return replicate(f, mesh_r)
