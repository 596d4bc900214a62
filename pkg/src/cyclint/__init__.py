"""Cycle integrals of the modular j-function and their extended limits over word streams."""

__version__ = "0.1.0"

from .words import EvenWord, UnimodularMatrix, WordError, WordStream, periodic_stream, theorem1_stream
from .quadratic import QuadraticSurd, purely_periodic_value, epsilon_hat_quadratic
from .modj import j_eval
from .contour import cycle_integrals, geodesic_val
from .extended import accumulate_extended, epsilon_hat_denominators, theorem1_reference
from .levy import levy_monte_carlo
