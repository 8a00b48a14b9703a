from abc import ABC, abstractmethod

from loop_rmatrix.orbit import LoopOrbitPoint


class ILoopBracket(ABC):
    """
    Abstract base class for the r-matrix bracket on the SL2 loop group.
    Defines the coefficient brackets and the reduced bracket of invariant functionals.
    """

    @abstractmethod
    def coeff_bracket_cc(self, pt: LoopOrbitPoint, m: int, n: int) -> complex:
        """
        Evaluate {c_m, c_n} at an orbit point.

        Args:
            pt (LoopOrbitPoint): The point of the orbit lift.
            m (int): Index of the first coefficient.
            n (int): Index of the second coefficient.

        Returns:
            complex: The bracket value.
        """
        ...

    @abstractmethod
    def coeff_bracket_ac(self, pt: LoopOrbitPoint, m: int, n: int) -> complex:
        """
        Evaluate {a_m, c_n} at an orbit point.

        Args:
            pt (LoopOrbitPoint): The point of the orbit lift.
            m (int): Index of the diagonal coefficient a_m.
            n (int): Index of the off-diagonal coefficient c_n.

        Returns:
            complex: The bracket value.
        """
        ...

    @abstractmethod
    def coeff_bracket_aa(self, pt: LoopOrbitPoint, m: int, n: int) -> complex:
        """
        Evaluate {a_m, a_n} at an orbit point.

        Returns:
            complex: The bracket value.
        """
        ...

    @abstractmethod
    def invariant_functional(self, pt: LoopOrbitPoint, n: int) -> complex:
        """
        Evaluate the LN_- invariant functional theta_n.

        Args:
            pt (LoopOrbitPoint): The point of the orbit lift.
            n (int): Index of the functional.

        Returns:
            complex: The value of theta_n at the point.
        """
        ...

    @abstractmethod
    def reduced_bracket(self, pt: LoopOrbitPoint, m: int, n: int) -> complex:
        """
        Evaluate the reduced bracket {theta_m, theta_n} at an orbit point.

        Args:
            pt (LoopOrbitPoint): The point of the orbit lift.
            m (int): Index of the first functional.
            n (int): Index of the second functional.

        Returns:
            complex: The bracket value.
        """
        ...
