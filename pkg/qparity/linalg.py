"""
Exact rational linear algebra on top of sympy.

Inputs and outputs are ``fractions.Fraction``; sympy only ever sees
``Rational`` entries, so no floating point enters a solve.
"""
from fractions import Fraction

import sympy


def to_rational(x):
    x = Fraction(x)
    return sympy.Rational(x.numerator, x.denominator)


def to_fraction(v):
    v = sympy.Rational(v)
    return Fraction(int(v.p), int(v.q))


def solve(rows, rhs):
    """

    Solves the square system ``A x = b``.

    rows - one mapping column -> coefficient per equation (sparse rows)
    rhs  - right-hand side, one value per equation

    Raises ``ValueError`` when the system is singular.

    """
    n = len(rows)
    if n == 0:
        return []
    a = sympy.zeros(n, n)
    b = sympy.zeros(n, 1)
    for i, row in enumerate(rows):
        for j, coeff in row.items():
            a[i, j] = to_rational(coeff)
        b[i, 0] = to_rational(rhs[i])
    x = a.LUsolve(b)
    return [to_fraction(x[i, 0]) for i in range(n)]


def stationary(states, rows):
    """

    Stationary distribution of a closed, irreducible class of a Markov chain.

    states - the class, in a fixed order
    rows   - mapping state -> {successor: probability}

    """
    states = list(states)
    pos = dict((q, i) for i, q in enumerate(states))
    # pi (I - P) = 0 column-wise for every state but the first, plus sum(pi) = 1
    equations, rhs = [], []
    for j in states[1:]:
        row = {pos[j]: Fraction(1)}
        for i in states:
            p = rows[i].get(j)
            if p:
                row[pos[i]] = row.get(pos[i], Fraction(0)) - p
        equations.append(row)
        rhs.append(Fraction(0))
    equations.append(dict((i, Fraction(1)) for i in range(len(states))))
    rhs.append(Fraction(1))
    return dict(zip(states, solve(equations, rhs)))
