from math import gcd, isqrt

import pytest

from avsub.configfile import reference_config

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def oracle_non_cm(t_max):
    """N(t) for E x E over Z, principal: 2 + primitive (a, b) up to sign, a^2 + b^2 <= t."""
    by_norm = [0] * (t_max + 1)
    r = isqrt(t_max)
    for a in range(-r, r + 1):
        for b in range(-r, r + 1):
            n = a * a + b * b
            if 0 < n <= t_max and gcd(a, b) == 1:
                by_norm[n] += 1
    out, acc = {}, 0
    for t in range(1, t_max + 1):
        acc += by_norm[t]
        out[t] = 2 + acc // 2
    return out


def oracle_gaussian(t_max):
    """N(t) for E x E with CM by Z[i], principal.

    ``(alpha, beta)`` is primitive iff ``alpha, i alpha, beta, i beta`` span
    ``Z^2``, i.e. the 2x2 minors of those four vectors have gcd 1.
    """
    by_norm = [0] * (t_max + 1)
    r = isqrt(t_max)
    pts = [(a, b, a * a + b * b) for a in range(-r, r + 1) for b in range(-r, r + 1)
           if a * a + b * b <= t_max]
    for a, b, na in pts:
        for c, d, nb in pts:
            n = na + nb
            if n == 0 or n > t_max:
                continue
            if gcd(gcd(na, nb), gcd(a * d - b * c, a * c + b * d)) == 1:
                by_norm[n] += 1
    out, acc = {}, 0
    for t in range(1, t_max + 1):
        acc += by_norm[t]
        assert acc % 4 == 0
        out[t] = 2 + acc // 4
    return out


@pytest.fixture(scope="session")
def non_cm():
    return reference_config("ExE_Z_principal")


@pytest.fixture(scope="session")
def gaussian():
    return reference_config("ExE_gaussian_principal")


@pytest.fixture(scope="session")
def two_block():
    return reference_config("two_block")
