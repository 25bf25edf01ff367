# -*- coding: utf-8 -*-
"""
Command-line front end. Results go to stdout in the chosen format, logs to
stderr. Exit status is 0 on success, 1 when an input is rejected and 2 when
a certificate or internal consistency check fails.
"""
from typing import Callable, Dict, List, Optional, TextIO, Union
from fractions import Fraction
import argparse
import csv
import json
import logging
import pathlib
import sys

import sympy

import diagaps
from diagaps import (counting, cyclotomic, equidist, exceptional, gapcraft,
                     sieve)
from diagaps.cache import SampleCache
from diagaps.entities import DiagonalForm
from diagaps.errors import CertificateError, DiagapsError, DomainError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_REJECTED = 1
EXIT_INCONSISTENT = 2

Result = Union[str, Dict[str, object]]


class RunConfig:
    """
    Everything a subcommand needs, validated before dispatch.
    """

    def __init__(self, command: str, action: Optional[str] = None,
                 form: Optional[DiagonalForm] = None,
                 modulus: Optional[int] = None, residue: int = 0,
                 limit: Optional[int] = None, beta: Optional[Fraction] = None,
                 gap_length: Optional[int] = None,
                 size: Optional[int] = None,
                 epsilon: Optional[Fraction] = None,
                 budget: Optional[int] = None, h_max: int = 200,
                 out: str = 'text', cache_dir: Optional[str] = None,
                 threads: int = 1, file: Optional[pathlib.Path] = None,
                 export: Optional[pathlib.Path] = None):
        self.command = command
        self.action = action
        self.form = form
        self.modulus = modulus
        self.residue = residue
        self.limit = limit
        self.beta = beta
        self.gap_length = gap_length
        self.size = size
        self.epsilon = epsilon
        self.budget = budget
        self.h_max = h_max
        self.out = out
        self.cache_dir = cache_dir
        self.threads = threads
        self.file = file
        self.export = export

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> 'RunConfig':
        """
        :param args: Parsed command-line arguments.
        :return: The config.
        :raises DomainError: If the form spec or a number is malformed.
        """
        form = DiagonalForm.from_spec(args.form) if args.form else None

        def fraction(value: Optional[str]) -> Optional[Fraction]:
            if value is None:
                return None
            try:
                return Fraction(value)
            except (ValueError, ZeroDivisionError):
                raise DomainError(f'{value!r} is not a number') from None

        if args.threads < 1:
            raise DomainError(f'--threads must be positive, got '
                              f'{args.threads}')
        return cls(args.command, getattr(args, 'action', None), form,
                   args.modulus, args.residue, args.limit,
                   fraction(args.beta), args.gap_length, args.size,
                   fraction(args.epsilon), args.budget, args.hmax, args.out,
                   args.cache_dir, args.threads, args.file, args.export)

    def require(self, *names: str) -> None:
        """
        :raises DomainError: Naming the first flag the subcommand needs but
                             did not get.
        """
        for name in names:
            if getattr(self, name) is None:
                flag = '--' + name.replace('_', '-')
                raise DomainError(f'{self.command} needs {flag}')

    @property
    def cache(self) -> SampleCache:
        return SampleCache.from_directory(self.cache_dir)


def _count(config: RunConfig) -> Result:
    config.require('form', 'modulus')
    form, modulus = config.form, config.modulus
    if modulus < 1:
        raise DomainError(f'--modulus must be positive, got {modulus}')
    m = config.residue % modulus
    factors = sympy.factorint(modulus)
    if len(factors) == 1 and modulus in factors:
        result = counting.count_general(form, m, modulus)
    elif all(e == 1 for e in factors.values()):
        result = counting.count_squarefree(form, m, factors)
    else:
        result = counting.CountResult(
            form.degree, modulus, counting.CountResult.BRUTE,
            int(counting.value_distribution(form, modulus)[m]))
    return {'form': form.spec, 'modulus': modulus, 'residue': m,
            'count': result.count, 'lower': result.lower,
            'upper': result.upper, 'method': result.method}


def _jacobi(config: RunConfig) -> Result:
    config.require('form', 'modulus')
    form, p = config.form, config.modulus
    ctx = cyclotomic.make_context(form.degree, p)
    pi = cyclotomic.pi_element(ctx)
    result = {'form': form.spec, 'prime': p, 'root': ctx.root,
              'jacobi': str(pi), 'norm': pi.norm(),
              'chi': [cyclotomic.chi(ctx, a) for a in form.coefficients],
              'h_trace': cyclotomic.h_trace(form, ctx)}
    if form.degree == 4:
        cls, sign = cyclotomic.tuple_class_at(form, ctx)
        result.update({'class': cls.name, 'chi_minus_one': sign,
                       'k': cls.k(sign)})
    return result


def _classify(config: RunConfig) -> Result:
    config.require('form')
    form = config.form
    verdict = exceptional.is_exceptional_kummer(form)
    decomposition = exceptional.exceptional_decomposition(form)
    if verdict.exceptional != (decomposition is not None):
        raise CertificateError(f'Classifiers disagree on {form}: kummer says '
                               f'{verdict.exceptional}, pattern says '
                               f'{decomposition is not None}')
    return {'form': form.spec, 'exceptional': verdict.exceptional,
            'decomposition': None if decomposition is None
            else str(decomposition),
            'image': sorted(str(point)
                            for point in exceptional.char_image(form)),
            'chosen': None if verdict.certificate is None
            else str(verdict.certificate)}


def _equidist(config: RunConfig) -> Result:
    config.require('form', 'limit')
    beta = Fraction(0) if config.beta is None else config.beta
    report = equidist.density_report(config.form, config.limit, beta,
                                     cache=config.cache,
                                     workers=config.threads)
    result = {'form': config.form.spec}
    result.update(report.to_dict())
    return result


def _policy(config: RunConfig) -> gapcraft.SelectionPolicy:
    u_class = None
    if config.form.degree == 4:
        u_class = exceptional.pick_good_u(config.form)
    return gapcraft.SelectionPolicy(
        Fraction(1, 2) if config.beta is None else config.beta, config.limit,
        max_primes=config.budget, u_class=u_class)


def _read_witness(config: RunConfig) -> gapcraft.GapWitness:
    config.require('file')
    try:
        text = config.file.read_text()
    except OSError as e:
        raise DomainError(f'Cannot read {config.file}: {e.strerror}') \
            from None
    return gapcraft.GapWitness.from_json(text)


def _witness(config: RunConfig) -> Result:
    if config.action == 'check':
        witness = _read_witness(config)
        epsilon = gapcraft.check_witness(config.form or witness.form,
                                         witness)
        return {'form': witness.form.spec, 'valid': True,
                'epsilon': str(epsilon), 'certified': witness.certified}

    config.require('form', 'gap_length', 'limit')
    witness = gapcraft.build_witness(config.form, config.gap_length,
                                     _policy(config), config.epsilon,
                                     cache=config.cache,
                                     workers=config.threads)
    document = witness.to_json()
    if config.file is not None:
        config.file.write_text(document + '\n')
    if config.out == 'json':
        return document
    return {'form': config.form.spec, 'gap_length': witness.gap_length,
            'primes': len(witness.primes), 'm': str(witness.m),
            'M': str(witness.modulus), 'epsilon': str(witness.epsilon),
            'target': str(witness.target), 'certified': witness.certified}


def _sieve(config: RunConfig) -> Result:
    config.require('form', 'size')
    bitset = sieve.sieve_values(config.form, config.size,
                                workers=config.threads)
    if config.export is not None:
        with config.export.open('wb') as f:
            bitset.export(f)
    return {'form': config.form.spec, 'N': config.size,
            'values': bitset.count()}


def _maxgap(config: RunConfig) -> Result:
    config.require('form', 'size')
    bitset = sieve.sieve_values(config.form, config.size,
                                workers=config.threads)
    gap = sieve.max_gap(bitset)
    return {'form': config.form.spec, 'N': config.size, 'start': gap.start,
            'length': gap.length}


def _findgap(config: RunConfig) -> Result:
    witness = _read_witness(config)
    kwargs = {} if config.budget is None else {'budget': config.budget}
    report = sieve.find_explicit_gap(config.form or witness.form, witness,
                                     config.h_max, **kwargs)
    if config.out == 'json':
        return report.to_json()
    return {'form': witness.form.spec, 'found': report.found,
            'a': None if report.start is None else str(report.start),
            'h': report.h, 'windows': len(report.hits),
            'hit_rate': round(report.hit_rate, 6)}


_HANDLERS: Dict[str, Callable[[RunConfig], Result]] = {
    'count': _count,
    'jacobi': _jacobi,
    'classify': _classify,
    'equidist': _equidist,
    'witness': _witness,
    'sieve': _sieve,
    'maxgap': _maxgap,
    'findgap': _findgap,
}


def _render(result: Result, out: str, stream: TextIO) -> None:
    if isinstance(result, str):
        stream.write(result + '\n')
    elif out == 'json':
        json.dump(result, stream, sort_keys=True, indent=2)
        stream.write('\n')
    elif out == 'csv':
        writer = csv.writer(stream, lineterminator='\n')
        writer.writerow(result.keys())
        writer.writerow(result.values())
    else:
        for key, value in result.items():
            if isinstance(value, bool):
                value = str(value).lower()
            stream.write(f'{key}: {value}\n')


def run(config: RunConfig, stream: Optional[TextIO] = None) -> int:
    """
    Execute a subcommand and write its report.

    :param config: The run configuration.
    :param stream: Where to write the report; stdout by default.
    :return: The exit status.
    """
    logger.debug('Running %s %s', config.command, config.action or '')
    try:
        result = _HANDLERS[config.command](config)
    except CertificateError as e:
        print(f'error: {e}', file=sys.stderr)
        return EXIT_INCONSISTENT
    except DiagapsError as e:
        print(f'error: {e}', file=sys.stderr)
        return EXIT_REJECTED
    _render(result, config.out, stream or sys.stdout)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    """
    Exits 1 on usage errors, as they are rejected inputs; 2 is reserved for
    failed checks.
    """

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_REJECTED, f'{self.prog}: error: {message}\n')


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--form', help='the form, e.g. 3:1,1,1 or 4:1,1,4,4')
    common.add_argument('--modulus', type=int, help='modulus or prime')
    common.add_argument('--residue', type=int, default=0,
                        help='residue to count (default: 0)')
    common.add_argument('--limit', '-T', type=int, help='prime scan bound')
    common.add_argument('--beta', help='selection or density threshold, '
                                       'e.g. 1/2')
    common.add_argument('--gap-length', '-K', type=int, dest='gap_length',
                        help='gap length K')
    common.add_argument('--size', '-N', type=int,
                        help='sieve range [0, N)')
    common.add_argument('--epsilon', help='target epsilon (default: 1/(2K))')
    common.add_argument('--budget', type=int,
                        help='most primes in a witness, or search steps per '
                             'window for findgap')
    common.add_argument('--hmax', type=int, default=200,
                        help='most windows to scan (default: 200)')
    common.add_argument('--out', choices=('json', 'csv', 'text'),
                        default='text', help='output format')
    common.add_argument('--cache-dir', dest='cache_dir',
                        help='scan cache directory (default: '
                             '$DIAGAPS_CACHE_DIR)')
    common.add_argument('--threads', type=int, default=1,
                        help='worker count (default: 1)')
    common.add_argument('--file', type=pathlib.Path,
                        help='witness file to read or write')
    common.add_argument('--export', type=pathlib.Path,
                        help='write the sieved bitset here')

    parser = _Parser(prog='diagaps', description='Gaps between values of '
                                                 'diagonal forms.')
    parser.add_argument('--version', action='version',
                        version=f'%(prog)s {diagaps.__version__}')
    parser.add_argument('-v', '--verbose', action='count', default=0,
                        help='log progress; repeat for detail')
    subparsers = parser.add_subparsers(dest='command', required=True,
                                       parser_class=_Parser)
    for name, help_ in (('count', 'count solutions modulo M'),
                        ('jacobi', 'Jacobi sum data at a prime'),
                        ('classify', 'decide exceptionality of a quartic'),
                        ('equidist', 'Re H density against the arccos law'),
                        ('sieve', 'sieve the values below N'),
                        ('maxgap', 'longest gap below N'),
                        ('findgap', 'explicit gap from a witness file')):
        subparsers.add_parser(name, parents=[common], help=help_)
    witness = subparsers.add_parser('witness', help='build or check a gap '
                                                    'witness')
    actions = witness.add_subparsers(dest='action', required=True,
                                     parser_class=_Parser)
    actions.add_parser('build', parents=[common])
    actions.add_parser('check', parents=[common])
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = _parser().parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose,
                                                      logging.DEBUG)
    logging.basicConfig(level=level, stream=sys.stderr,
                        format='%(levelname)s %(name)s: %(message)s')
    try:
        config = RunConfig.from_args(args)
    except DomainError as e:
        print(f'error: {e}', file=sys.stderr)
        return EXIT_REJECTED
    return run(config)


if __name__ == '__main__':
    sys.exit(main())
