#!/usr/bin/env python

import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.stats as scs

from .combinat import (ENUMERATION_CAP, STIRLING_CAP, enumerate_star2,
                       star2_table, stirling2)
from .util import PreconditionError

_LOG_MAX = math.log(np.finfo(float).max)


def _exp_or_inf(x):
    return math.exp(x) if x < _LOG_MAX else math.inf


class KernelIntegrals(object):
    """Provider of the integral of the sigma-contracted kernel tensor."""
    flavor = 'callback'

    def integral(self, sigma, ell, k):
        raise NotImplementedError

    def __call__(self, sigma, ell, k):
        return self.integral(sigma=sigma, ell=ell, k=k)


class ConstantKernel(KernelIntegrals):
    flavor = 'constant'

    def __init__(self, c, a):
        if not a > 0:
            raise ValueError(f'invalid total mass: {a}')
        self.c = c
        self.a = a

    def integral(self, sigma, ell, k):
        return self.c ** ell * self.a ** k


class TabulatedKernel(KernelIntegrals):
    flavor = 'tabulated'

    def __init__(self, table):
        self.table = dict(table)

    def integral(self, sigma, ell, k):
        key = (ell, sigma.blocks)
        if key in self.table:
            return self.table[key]
        elif (ell, k) in self.table:
            return self.table[(ell, k)]
        else:
            raise KeyError(f'no tabulated integral for {key}')


class CallbackKernel(KernelIntegrals):
    flavor = 'callback'

    def __init__(self, fn):
        self.fn = fn

    def integral(self, sigma, ell, k):
        return self.fn(sigma, ell, k)


@dataclass(frozen=True)
class MomentResult:
    ell: int
    value: float
    term_count: int

    def to_dict(self):
        return {
            'ell': self.ell, 'value': self.value, 'term_count': self.term_count
        }


def poisson_raw_moment(alpha, n, cap=STIRLING_CAP):
    if not alpha > 0:
        raise ValueError(f'invalid alpha: {alpha}')
    elif n == 0:
        return 1.0
    else:
        return math.fsum(
            stirling2(n, k, cap=cap) * alpha ** k for k in range(1, n + 1)
        )


def poisson_moment_bound(alpha, n):
    if not alpha > 0:
        raise ValueError(f'invalid alpha: {alpha}')
    elif n < 1:
        raise ValueError(f'invalid n: {n}')
    else:
        return (n / math.log1p(n / alpha)) ** n


def centred_moment_exact(ki, gamma, m, ell, cap=ENUMERATION_CAP):
    logger = logging.getLogger(__name__)
    terms = [
        gamma ** s.k * ki(s, ell, s.k)
        for s in enumerate_star2(m=m, ell=ell, cap=cap)
    ]
    logger.debug(f'summed {len(terms)} subpartitions for ell={ell}')
    return MomentResult(ell=ell, value=math.fsum(terms), term_count=len(terms))


def centred_moment_constant_kernel(alpha1, alpha2, gamma, m, ell,
                                   cap=STIRLING_CAP):
    return alpha2 ** ell * math.fsum(
        n * (gamma * alpha1) ** k
        for k, n in star2_table(m, ell, cap=cap).items()
    )


def variance_exact(fk_norms, gamma, m):
    if len(fk_norms) != m:
        raise ValueError(f'expected {m} norms: {fk_norms}')
    elif min(fk_norms) < 0:
        raise ValueError(f'invalid norms: {fk_norms}')
    return math.fsum(
        gamma ** (2 * m - k) * math.factorial(k) * v
        for k, v in enumerate(fk_norms, start=1)
    )


def centred_moment_upper(p, gamma, m, ell, regime='general', corollary=False):
    logger = logging.getLogger(__name__)
    gb = gamma * p.beta1
    if ell < 2:
        raise ValueError(f'invalid ell: {ell}')
    elif corollary and ell < max(math.log(p.beta0), 2):
        raise PreconditionError(
            f'ell = {ell} is below max(log beta0, 2) = {math.log(p.beta0)}'
        )
    if regime == 'general':
        log_base = (
            p.q * m * math.log(2) + m * math.log(m * ell) + math.log(p.beta2)
            + (m - 0.5) * p.q * math.log(max(1.0, gb / (m * ell)))
            - m * (1 - p.q) * math.log(math.log1p(m * ell / gb))
        )
        log_value = ell * (log_base + (1 if corollary else 0))
    elif regime == 'high-intensity':
        if gb < 2 * m * ell:
            raise PreconditionError(
                f'high-intensity regime needs gamma * beta1 >= 2 m ell:'
                f' {gb} < {2 * m * ell}'
            )
        log_base = (
            (2 * m + 1) * math.log(2) + math.log(m * ell)
            + 2 * math.log(p.beta2) + (2 * m - 1) * math.log(gb)
        )
        log_value = ell / 2 * (log_base + (2 if corollary else 0))
    else:
        raise ValueError(f'invalid regime: {regime}')
    if not corollary:
        log_value += math.log(p.beta0)
    logger.debug(f'log centred moment bound: {log_value}')
    return _exp_or_inf(log_value)


def moment_chain_bounds(p, gamma, m, ell):
    """
    Return the intermediate quantities of the chain bounding the ell-th
    centred moment by a raw Poisson moment.
    """
    gb = gamma * p.beta1
    prefactor = p.beta0 * p.beta2 ** ell * ell ** (p.q * m * ell)
    return {
        'star2_sum': prefactor * math.fsum(
            n * gb ** k for k, n in star2_table(m, ell).items()
        ),
        'stirling_sum': prefactor * math.fsum(
            stirling2(m * ell, k) * gb ** k for k in range(1, m * ell + 1)
        ),
        'poisson_form': (
            p.beta0 * (p.beta2 * ell ** (p.q * m)) ** ell
            * poisson_raw_moment(gb, m * ell)
        )
    }


def falling_factorial_moment(alpha, m, ell):
    """
    E[((P)_m - E (P)_m)^ell] for P ~ Poisson(alpha) by direct summation of
    the probability mass function.
    """
    n_max = int(alpha + 20 * math.sqrt(alpha) + 40) + 10 * ell * m
    n = np.arange(n_max + 1, dtype=float)
    ff = np.prod([n - i for i in range(m)], axis=0)
    return float(
        np.sum(scs.poisson.pmf(n, alpha) * (ff - alpha ** m) ** ell)
    )
