"""
.. module:: coefficient
    :platform: Linux
    :synopsis: exact Laurent polynomial coefficients of graphs
"""
import typing
from fractions import Fraction
from libbandgraph import BandGraphException

# m, conj(m), (1 - m^2)^-1, (1 - conj(m)^2)^-1, (1 - |m|^2)^-1
GENERATORS = ("m", "mb", "i1m2", "i1mb2", "i1mm")

# generator swapped by complex conjugation
_CONJUGATE = (1, 0, 3, 2, 4)


class CoefficientError(BandGraphException):
    """
    Raised when a coefficient is malformed.
    """


def _exponents(**kwargs: dict) -> tuple:
    for name in kwargs:
        if name not in GENERATORS:
            raise CoefficientError(f"Unknown generator '{name}'")

    return tuple(int(kwargs.get(name, 0)) for name in GENERATORS)


class Coefficient:
    """
    A finite sum of rational multiples of monomials in ``GENERATORS``.
    Exponents of ``m`` and ``mb`` may be negative. Coefficients are
    immutable and always kept in canonical form, i.e. without zero
    scalars.
    """

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: dict = None) -> None:
        canon = {}
        for exps, scalar in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != len(GENERATORS):
                raise CoefficientError(f"exponents {exps} have wrong size")

            if any(e < 0 for e in exps[2:]):
                raise CoefficientError(
                    f"only m and mb may have negative exponents: {exps}")

            scalar = Fraction(scalar)
            if scalar == 0:
                continue

            canon[exps] = canon.get(exps, Fraction(0)) + scalar
            if canon[exps] == 0:
                canon.pop(exps)

        self._terms = canon
        self._hash = None

    @classmethod
    def monomial(cls, scalar: typing.Any = 1, **kwargs: dict) -> "Coefficient":
        """
        Build ``scalar * prod g^e`` from generator exponents.
        """
        return cls({_exponents(**kwargs): Fraction(scalar)})

    @classmethod
    def zero(cls) -> "Coefficient":
        """
        The zero coefficient.
        """
        return cls({})

    @classmethod
    def one(cls) -> "Coefficient":
        """
        The unit coefficient.
        """
        return cls.monomial(1)

    @classmethod
    def coerce(cls, value: typing.Any) -> "Coefficient":
        """
        Convert integers and fractions into coefficients.
        """
        if isinstance(value, Coefficient):
            return value

        if isinstance(value, (int, Fraction)):
            return cls.monomial(value)

        raise CoefficientError(f"Can't convert {repr(value)} to coefficient")

    @property
    def terms(self) -> dict:
        """
        Mapping from exponent tuples to rational scalars.
        """
        return dict(self._terms)

    def is_zero(self) -> bool:
        """
        True if the coefficient is zero.
        """
        return not self._terms

    def is_monomial(self) -> bool:
        """
        True if the coefficient has a single term.
        """
        return len(self._terms) == 1

    def __add__(self, other: typing.Any) -> "Coefficient":
        other = Coefficient.coerce(other)
        terms = dict(self._terms)
        for exps, scalar in other._terms.items():
            terms[exps] = terms.get(exps, Fraction(0)) + scalar

        return Coefficient(terms)

    __radd__ = __add__

    def __neg__(self) -> "Coefficient":
        return Coefficient({e: -s for e, s in self._terms.items()})

    def __sub__(self, other: typing.Any) -> "Coefficient":
        return self + (-Coefficient.coerce(other))

    def __rsub__(self, other: typing.Any) -> "Coefficient":
        return Coefficient.coerce(other) - self

    def __mul__(self, other: typing.Any) -> "Coefficient":
        other = Coefficient.coerce(other)
        terms = {}
        for exps1, scalar1 in self._terms.items():
            for exps2, scalar2 in other._terms.items():
                exps = tuple(a + b for a, b in zip(exps1, exps2))
                terms[exps] = terms.get(exps, Fraction(0)) + scalar1 * scalar2

        return Coefficient(terms)

    __rmul__ = __mul__

    def __pow__(self, power: int) -> "Coefficient":
        if power < 0:
            raise CoefficientError("negative powers are not supported")

        result = Coefficient.one()
        for _ in range(power):
            result = result * self

        return result

    def conjugate(self) -> "Coefficient":
        """
        Complex conjugate: ``m`` and ``mb`` are swapped, as well as the
        two ``(1 - m^2)^-1`` generators.
        """
        terms = {}
        for exps, scalar in self._terms.items():
            terms[tuple(exps[i] for i in _CONJUGATE)] = scalar

        return Coefficient(terms)

    def evaluate(self, m: complex) -> complex:
        """
        Numeric value at ``m``.
        """
        m = complex(m)
        mb = m.conjugate()
        values = (
            m,
            mb,
            1.0 / (1.0 - m * m),
            1.0 / (1.0 - mb * mb),
            1.0 / (1.0 - abs(m) ** 2),
        )

        total = 0j
        for exps, scalar in self._terms.items():
            term = complex(float(scalar))
            for value, exp in zip(values, exps):
                if exp:
                    term *= value ** exp

            total += term

        return total

    def to_dict(self) -> typing.Any:
        """
        Export as ``{"num", "den", "exp"}`` for monomials or as a list of
        such objects otherwise.
        """
        items = []
        for exps, scalar in sorted(self._terms.items()):
            items.append({
                "num": scalar.numerator,
                "den": scalar.denominator,
                "exp": {
                    name: exp
                    for name, exp in zip(GENERATORS, exps)
                    if exp != 0
                },
            })

        if len(items) == 1:
            return items[0]

        return items

    @classmethod
    def from_dict(cls, data: typing.Any) -> "Coefficient":
        """
        Import a coefficient exported by ``to_dict``.
        """
        if isinstance(data, dict):
            data = [data]

        if not isinstance(data, list):
            raise CoefficientError("coefficient must be an object or a list")

        terms = {}
        for item in data:
            if not isinstance(item, dict):
                raise CoefficientError("coefficient term must be an object")

            try:
                num = int(item["num"])
                den = int(item.get("den", 1))
            except (KeyError, TypeError, ValueError) as err:
                raise CoefficientError(
                    f"malformed coefficient term {item}") from err

            if den == 0:
                raise CoefficientError("coefficient denominator is zero")

            exps = _exponents(**item.get("exp", {}))
            terms[exps] = terms.get(exps, Fraction(0)) + Fraction(num, den)

        return cls(terms)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Coefficient.coerce(other)

        if not isinstance(other, Coefficient):
            return False

        return self._terms == other._terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))

        return self._hash

    def __repr__(self) -> str:
        if not self._terms:
            return "0"

        parts = []
        for exps, scalar in sorted(self._terms.items()):
            factors = []
            if scalar != 1 or not any(exps):
                factors.append(str(scalar))

            for name, exp in zip(GENERATORS, exps):
                if exp == 1:
                    factors.append(name)
                elif exp != 0:
                    factors.append(f"{name}^{exp}")

            parts.append("*".join(factors))

        return " + ".join(parts)


# shortcuts used by the expansion operators
ONE = Coefficient.one()
M = Coefficient.monomial(1, m=1)
MB = Coefficient.monomial(1, mb=1)
