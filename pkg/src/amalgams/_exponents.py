import math


def inv(p):
    """Reciprocal exponent with ``1/inf == 0`` exactly."""
    p = parse_exponent(p)
    return 0.0 if math.isinf(p) else 1.0 / p


def parse_exponent(p):
    if isinstance(p, str):
        if p.strip().lower() in ("inf", "infinity", "∞"):
            return math.inf
        return float(p)
    return float(p)


def conj(q):
    """Hölder conjugate exponent q' with 1/q + 1/q' = 1."""
    s = 1.0 - inv(q)
    return math.inf if s == 0 else 1.0 / s


def from_inv(x):
    """Exponent whose reciprocal is ``x`` (``x == 0`` gives infinity)."""
    return math.inf if x == 0 else 1.0 / x
