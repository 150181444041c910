"""Exact rational helpers shared by every module.

All public interfaces speak `fractions.Fraction` (or anything Fraction
accepts); internally we switch to gmpy2.mpq when it is importable because it
is several times faster on the simplex hot path.  Both types implement the
same rational arithmetic, compare equal to each other, and round-trip through
the "p/q" string form used in every JSON file this package reads or writes.
"""

from fractions import Fraction

try:
    from gmpy2 import mpq as _mpq

    def rat(p, q=None):
        if q is None:
            if isinstance(p, float):
                raise TypeError("refusing float -> rational conversion: %r" % (p,))
            return _mpq(p)
        return _mpq(p, q)

except ImportError:  # pragma: no cover - exercised only without gmpy2
    def rat(p, q=None):
        if q is None:
            if isinstance(p, float):
                raise TypeError("refusing float -> rational conversion: %r" % (p,))
            return Fraction(p)
        return Fraction(p, q)

ZERO = rat(0)
ONE = rat(1)
HALF = rat(1, 2)


def parse_rat(text):
    """Parse 'p/q' (or a bare integer string) into an exact rational."""
    s = text.strip()
    if "/" in s:
        p, q = s.split("/", 1)
        den = int(q)
        if den <= 0:
            raise ValueError("denominator must be positive in %r" % (text,))
        return rat(int(p), den)
    return rat(int(s))


def format_rat(x):
    """Canonical 'p/q' form, reduced, denominator always explicit."""
    f = Fraction(x)
    return "%d/%d" % (f.numerator, f.denominator)


def as_fraction(x):
    # rebuild from plain ints: Fraction(mpq) would smuggle mpz components in
    return Fraction(int(x.numerator), int(x.denominator))


def is_unit_interval(x):
    return 0 <= x <= 1
