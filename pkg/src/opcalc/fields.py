"""Exact scalar arithmetic over Q and prime fields F_p.

Every scalar in the library is either a ``fractions.Fraction`` (over Q) or a
plain int reduced mod p (over F_p).  No floating point anywhere.
"""

from fractions import Fraction


def _is_prime(p):
    if p < 2:
        return False
    if p % 2 == 0:
        return p == 2
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


class Field:
    """Base class; subclasses supply exact arithmetic on their scalars."""

    p = None  # characteristic marker: None for Q, the prime for F_p

    def __call__(self, x):
        raise NotImplementedError

    def is_zero(self, x):
        return x == self.zero


class RationalField(Field):
    zero = Fraction(0)
    one = Fraction(1)

    def __call__(self, x):
        return Fraction(x)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of 0")
        return 1 / Fraction(a)

    def div(self, a, b):
        return Fraction(a) / b

    def format(self, a):
        a = Fraction(a)
        if a.denominator == 1:
            return str(a.numerator)
        return "%d/%d" % (a.numerator, a.denominator)

    def __repr__(self):
        return "QQ"

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("QQ")


class PrimeField(Field):
    """F_p with elements stored as ints in ``range(p)``."""

    def __init__(self, p):
        if not _is_prime(p):
            raise ValueError("not a prime: %r" % (p,))
        self.p = p
        self.zero = 0
        self.one = 1 % p

    def __call__(self, x):
        if isinstance(x, Fraction):
            num = x.numerator % self.p
            den = x.denominator % self.p
            return (num * pow(den, -1, self.p)) % self.p
        return int(x) % self.p

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def inv(self, a):
        a %= self.p
        if a == 0:
            raise ZeroDivisionError("inverse of 0 in F_%d" % self.p)
        return pow(a, -1, self.p)

    def div(self, a, b):
        return (a * self.inv(b)) % self.p

    def format(self, a):
        return str(a % self.p)

    def __repr__(self):
        return "GF(%d)" % self.p

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("GF", self.p))


QQ = RationalField()


def GF(p):
    return PrimeField(p)


def parse_field(name):
    """Parse a field tag: ``Q`` or ``Fp:<prime>`` (also accepts ``F<p>``)."""
    s = name.strip()
    if s in ("Q", "QQ", "q"):
        return QQ
    if s.lower().startswith("fp:"):
        return PrimeField(int(s[3:]))
    if s[0] in "fF" and s[1:].isdigit():
        return PrimeField(int(s[1:]))
    raise ValueError("unknown field %r" % name)
