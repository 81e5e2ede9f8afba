"""Fourier transforms of regular semisimple orbital integrals on sl2(Q_p), p odd."""

from .characters import AdditiveCharacter, ComplexValue, MultiplicativeCharacter, standard_character, twist
from .local_field import LocalField, PAdic, SquareClass
from .orbits import AlgebraElement, DualElement, TorusType, gamma_wald, gl2_reduce
from .transform import Regime, mock_mu_oracle, mu_hat, mu_hat_closed, regime, second_orbital_form

__version__ = "0.1.0"
