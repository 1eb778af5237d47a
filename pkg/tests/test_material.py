import numpy as np
import pytest
from pydantic import ValidationError
from scipy import integrate

from errors import ConfigError, DomainError, ThetaRangeError
from material import (
    T_REF,
    MaterialModel,
    conductivity,
    kirchhoff_derivative,
    kirchhoff_inverse,
    kirchhoff_theta,
    preset,
    volumetric_heat_capacity,
)


class TestKirchhoffTheta:
    def test_constant_conductivity_is_a_shift(self, constant_material):
        assert kirchhoff_theta(constant_material, 350.0) == pytest.approx(51.85, abs=1e-12)

    @pytest.mark.parametrize("name", ["constant", "pmma-default"])
    def test_zero_at_reference(self, name):
        assert kirchhoff_theta(preset(name), T_REF) == 0.0

    def test_linear_conductivity_closed_form(self, linear_k_material):
        expected = (350.0 ** 2 - T_REF ** 2) / (2 * T_REF)
        assert kirchhoff_theta(linear_k_material, 350.0) == pytest.approx(expected, rel=1e-14)
        assert expected == pytest.approx(56.35, abs=0.01)

    def test_matches_quadrature(self, pmma_material):
        for T in (260.0, 320.0, 440.0):
            integral, _ = integrate.quad(lambda s: conductivity(pmma_material, s), T_REF, T, epsabs=1e-13)
            assert kirchhoff_theta(pmma_material, T) == pytest.approx(integral / pmma_material.k_ref, rel=1e-10)

    def test_strictly_increasing(self, pmma_material):
        T = np.linspace(250.0, 450.0, 500)
        assert np.all(np.diff(kirchhoff_theta(pmma_material, T)) > 0)

    def test_out_of_range_temperature(self, constant_material):
        with pytest.raises(DomainError, match="460"):
            kirchhoff_theta(constant_material, 460.0)


class TestKirchhoffInverse:
    def test_constant_case(self, constant_material):
        assert kirchhoff_inverse(constant_material, 51.85) == pytest.approx(350.0, abs=1e-10)

    def test_zero_maps_to_reference(self, pmma_material):
        assert kirchhoff_inverse(pmma_material, 0.0) == pytest.approx(T_REF, abs=1e-10)

    def test_linear_conductivity(self, linear_k_material):
        theta = kirchhoff_theta(linear_k_material, 350.0)
        assert kirchhoff_inverse(linear_k_material, theta) == pytest.approx(350.0, abs=1e-8)

    def test_round_trip_many_samples(self, pmma_material):
        rng = np.random.default_rng(0)
        T = rng.uniform(250.0, 450.0, 1000)
        recovered = kirchhoff_inverse(pmma_material, kirchhoff_theta(pmma_material, T))
        assert np.max(np.abs(recovered - T)) < 1e-9

    def test_poor_guess_still_converges(self, pmma_material):
        theta = kirchhoff_theta(pmma_material, 420.0)
        assert kirchhoff_inverse(pmma_material, theta, guess=251.0) == pytest.approx(420.0, abs=1e-9)

    def test_exact_guess_is_returned_unchanged(self, pmma_material):
        T = np.array([300.0, 333.3, 401.7])
        assert np.array_equal(kirchhoff_inverse(pmma_material, kirchhoff_theta(pmma_material, T), guess=T), T)

    def test_outside_image(self, constant_material):
        with pytest.raises(ThetaRangeError):
            kirchhoff_inverse(constant_material, 200.0)


def test_conductivity_normalized_at_reference(pmma_material, linear_k_material):
    for model in (pmma_material, linear_k_material):
        assert conductivity(model, T_REF) == pytest.approx(model.k_ref, rel=1e-15)
        assert volumetric_heat_capacity(model, T_REF) == pytest.approx(model.rho_cp_ref, rel=1e-15)


def test_derivative_matches_finite_differences(pmma_material):
    h = 1e-4
    for T in (260.0, 300.0, 390.0, 445.0):
        numeric = (kirchhoff_theta(pmma_material, T + h) - kirchhoff_theta(pmma_material, T - h)) / (2 * h)
        assert kirchhoff_derivative(pmma_material, T) == pytest.approx(numeric, rel=1e-8)
        assert kirchhoff_derivative(pmma_material, T) == pytest.approx(
            conductivity(pmma_material, T) / pmma_material.k_ref, rel=1e-15
        )


class TestMaterialModel:
    def test_coefficients_must_sum_to_one(self):
        with pytest.raises(ValidationError, match="sum"):
            MaterialModel(k_ref=0.2, k_coeffs=(0.5, 0.4), rho_cp_ref=1e6)

    def test_property_must_stay_positive(self):
        # 2 - s vanishes at T = 2 * 298.15 > 450 K, but 3 - 2s vanishes at 447 K
        with pytest.raises(ValidationError, match="non-positive"):
            MaterialModel(k_ref=0.2, k_coeffs=(3.0, -2.0), rho_cp_ref=1e6)

    def test_frozen(self, constant_material):
        with pytest.raises(ValidationError):
            constant_material.k_ref = 1.0

    def test_unknown_preset(self):
        with pytest.raises(ConfigError, match="unknown material preset"):
            preset("steel")

    def test_preset_override(self):
        model = preset("pmma-default", k_ref=0.25)
        assert model.k_ref == 0.25
        assert model.k_coeffs == (0.7, 0.3)
