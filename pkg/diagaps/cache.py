# -*- coding: utf-8 -*-
"""
On-disk cache for prime scans, keyed by form and prime range.

Each file holds the rows of one (form, [lo, hi)) chunk as CSV:

    # diagaps-scan v1
    p,trace,k,uclass,u5
    7,1,,,
    13,-5,,,

The last three columns are empty for cubic forms.
"""
from typing import List, Optional, Sequence, Tuple
import abc
import csv
import io
import logging
import os
import pathlib
import tempfile

import backoff

from diagaps.entities import DiagonalForm
from diagaps.errors import CacheError

logger = logging.getLogger(__name__)

# overrides the cache directory when no explicit one is given
ENVIRONMENT_VARIABLE = 'DIAGAPS_CACHE_DIR'

Row = Tuple[Optional[int], ...]


class SampleCache(metaclass=abc.ABCMeta):
    """
    Implemented by things that can remember the samples of a scanned chunk.
    """

    @abc.abstractmethod
    def load(self, form: DiagonalForm, lo: int, hi: int) \
            -> Optional[List[Row]]:
        """
        Retrieve the rows for a chunk.

        :param form: The scanned form.
        :param lo: The inclusive start of the prime range.
        :param hi: The exclusive end of the prime range.
        :return: The rows, or None if the chunk is not cached.
        """
        raise NotImplementedError()

    @abc.abstractmethod
    def store(self, form: DiagonalForm, lo: int, hi: int,
              rows: Sequence[Row]) -> None:
        """
        Remember the rows for a chunk.

        :param form: The scanned form.
        :param lo: The inclusive start of the prime range.
        :param hi: The exclusive end of the prime range.
        :param rows: The rows to store.
        """
        raise NotImplementedError()

    @classmethod
    def from_directory(cls, directory: Optional[str] = None) \
            -> 'SampleCache':
        """
        Create the cache to use for a run.

        :param directory: An explicit cache directory; if None, the
                          DIAGAPS_CACHE_DIR environment variable is consulted.
        :return: A directory cache, or a null cache if neither is set.
        """
        directory = directory or os.environ.get(ENVIRONMENT_VARIABLE)
        if not directory:
            return NullCache()
        return DirectoryCache(pathlib.Path(directory).expanduser())


class NullCache(SampleCache):
    """
    Remembers nothing.
    """

    def load(self, form: DiagonalForm, lo: int, hi: int) \
            -> Optional[List[Row]]:
        return None

    def store(self, form: DiagonalForm, lo: int, hi: int,
              rows: Sequence[Row]) -> None:
        pass


class DirectoryCache(SampleCache):
    """
    Keeps one CSV file per chunk in a directory. Files are written to a
    temporary name and renamed into place, so readers never see a partial
    file and concurrent writers of the same chunk simply replace each other
    with identical content.
    """

    _FORMAT_VERSION = 1
    _MAGIC = '# diagaps-scan v'
    _FIELDS = ('p', 'trace', 'k', 'uclass', 'u5')

    def __init__(self, directory: pathlib.Path):
        """
        Initialise a new directory cache.

        :param directory: Where to keep the files. Created on first store.
        """
        self.directory = directory

    def path(self, form: DiagonalForm, lo: int, hi: int) -> pathlib.Path:
        """
        :return: The file holding a chunk.
        """
        return self.directory / f'{form.digest}_{lo}_{hi}.csv'

    def load(self, form: DiagonalForm, lo: int, hi: int) \
            -> Optional[List[Row]]:
        path = self.path(form, lo, hi)
        try:
            text = path.read_text(encoding='ascii')
        except FileNotFoundError:
            return None
        try:
            rows = self._parse(text, form.degree)
        except CacheError as e:
            logger.warning('Ignoring cache file %s: %s', path, e)
            return None
        logger.debug('Cache hit for %s on [%d, %d): %d rows', form, lo, hi,
                     len(rows))
        return rows

    def _parse(self, text: str, degree: int) -> List[Row]:
        """
        :param text: The file contents.
        :param degree: The degree of the form the file is keyed by; cubic
                       rows leave the last three columns empty, quartic rows
                       fill all five.
        :return: The rows.
        :raises CacheError: If the file is from another format version or
                            is malformed.
        """
        first, _, body = text.partition('\n')
        if first != f'{self._MAGIC}{self._FORMAT_VERSION}':
            raise CacheError(f'unsupported header {first!r}')
        reader = csv.reader(io.StringIO(body))
        if tuple(next(reader, ())) != self._FIELDS:
            raise CacheError('unexpected column names')
        filled = 2 if degree == 3 else len(self._FIELDS)
        rows = []
        for row in filter(None, reader):
            if len(row) != len(self._FIELDS) or \
                    sum(1 for field in row if field) != filled or \
                    not all(row[:filled]):
                raise CacheError(f'row {row} does not fit a degree {degree} '
                                 f'form')
            try:
                rows.append(tuple(int(field) if field else None
                                  for field in row))
            except ValueError as e:
                raise CacheError(f'malformed row: {e}') from None
        return rows

    def store(self, form: DiagonalForm, lo: int, hi: int,
              rows: Sequence[Row]) -> None:
        self.directory.mkdir(parents=True, exist_ok=True)
        buffer = io.StringIO()
        buffer.write(f'{self._MAGIC}{self._FORMAT_VERSION}\n')
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(self._FIELDS)
        writer.writerows(['' if field is None else field for field in row]
                         for row in rows)

        temporary = None
        try:
            with tempfile.NamedTemporaryFile('w', encoding='ascii',
                                             dir=self.directory,
                                             suffix='.tmp', delete=False) as f:
                temporary = pathlib.Path(f.name)
                f.write(buffer.getvalue())
            self._replace(temporary, self.path(form, lo, hi))
        except BaseException:
            # nothing half-written stays behind
            if temporary is not None:
                temporary.unlink(missing_ok=True)
            raise
        logger.debug('Cached %d rows for %s on [%d, %d)', len(rows), form, lo,
                     hi)

    @staticmethod
    @backoff.on_exception(backoff.expo, OSError, max_tries=5)
    def _replace(source: pathlib.Path, destination: pathlib.Path) -> None:
        """
        Atomically move a finished file into place. Retried with a back-off,
        as the destination may be transiently locked by another process.

        :param source: The temporary file.
        :param destination: The final name.
        :raises OSError: If the move fails on the 5th attempt.
        """
        os.replace(source, destination)
