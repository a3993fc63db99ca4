import gzip
import io
import logging
import os
import ssl
import sys
import typing
from urllib.request import urlopen

import certifi

PathOrHandle = typing.Union[str, os.PathLike, typing.IO]


def looks_like_url(file: str) -> bool:
    """
    Checks if the `file` looks like a URL.

    :param file: file to check.
    :return: `True` if the `file` starts with `http://` or `https://`.
    """
    return file.startswith('http://') or file.startswith('https://')


def looks_gzipped(file: str) -> bool:
    """
    Checks file suffix to determine if it looks gzipped.

    :param file: file path to check.
    :return: `True` if the `file` ends with `.gz`.
    """
    return file.endswith('.gz')


def _parse_encoding(encoding, logger) -> str:
    if encoding is None:
        encoding = sys.getdefaultencoding()
        logger.debug('Using default encoding %r', encoding)
    else:
        logger.debug('Using provided encoding %r', encoding)
    return encoding


def open_text_io_handle_for_reading(
        fh: PathOrHandle,
        timeout: int = 30,
        encoding: typing.Optional[str] = None,
) -> typing.TextIO:
    """
    Open a `io.TextIO` file handle based on `fh`.

    Manifests, stain profiles, statistics priors and model parameters are all read through this function.

    :param fh: a `str`, a path-like object, or `typing.IO` to read from. If `str`, then it should be a path
      to a local file or a URL of a remote resource. Either `http` or `https` protocols are supported.
      The content will be uncompressed on the fly if the file name ends with `.gz`.
      If `fh` is an IO wrapper, the function ensures we get a text wrapper that uses given encoding.
    :param timeout: timeout in seconds used when accessing a remote resource.
    :param encoding: encoding used to decode the input or the system preferred encoding if unset.
    :return: the :class:`io.TextIO` wrapper.
    """
    logger = logging.getLogger('staintk.util')
    encoding = _parse_encoding(encoding, logger)

    if isinstance(fh, os.PathLike):
        fh = os.fspath(fh)

    logger.debug('Opening %s', fh)
    if isinstance(fh, str):
        # Can be a path to local file or URL
        if looks_like_url(fh):
            ctx = ssl.create_default_context(cafile=certifi.where())
            logger.debug('Looks like a URL: %s', fh)
            if not isinstance(timeout, int) or timeout <= 0:
                raise ValueError(f'If {fh} looks like URL then timeout {timeout} must be a positive `int`')
            logger.debug('Downloading with timeout=%ds', timeout)
            handle = urlopen(
                fh,
                timeout=timeout,
                context=ctx,
            )
        else:
            logger.debug('Looks like a local file: %s', fh)
            handle = open(fh, 'rb')

        if looks_gzipped(fh):
            logger.debug('Looks like a gzipped data, decompressing on the fly')
            return gzip.open(handle, mode='rt', newline='', encoding=encoding)
        else:
            logger.debug('Looks like decompressed data')
            return io.TextIOWrapper(handle, encoding=encoding, newline='')
    elif isinstance(fh, io.TextIOBase):
        return fh
    elif isinstance(fh, (io.BufferedIOBase, io.RawIOBase)):
        logger.debug('Looks like a binary IO')
        return io.TextIOWrapper(fh, encoding=encoding, newline='')
    else:
        raise ValueError(f'Unexpected type {type(fh)}')


def open_text_io_handle_for_writing(
        fh: PathOrHandle,
        encoding: typing.Optional[str] = None,
) -> typing.TextIO:
    """
    Open a `io.TextIO` file handle based on `fh`.

    :param fh: a `str` or a path-like object pointing to a local file, or an open IO handle.
      The content will be compressed on the fly if the file name ends with `.gz`.
    :param encoding: encoding used to encode the output or the system preferred encoding if unset.
    :return: a :class:`io.TextIO` wrapper.
    """
    logger = logging.getLogger('staintk.util')
    encoding = _parse_encoding(encoding, logger)

    if isinstance(fh, os.PathLike):
        fh = os.fspath(fh)

    if isinstance(fh, str):
        if looks_gzipped(fh):
            logger.debug('Looks like a gzipped data, compressing on the fly')
            # `mtime=0` keeps the gzip header free of timestamps.
            return io.TextIOWrapper(
                gzip.GzipFile(fh, mode='wb', mtime=0),
                encoding=encoding, newline='',
            )
        else:
            return open(fh, 'w', encoding=encoding, newline='')
    elif isinstance(fh, io.TextIOBase):
        return fh
    elif isinstance(fh, (io.BufferedIOBase, io.RawIOBase)):
        logger.debug('Looks like a binary IO')
        return io.TextIOWrapper(fh, encoding=encoding, newline='')
    else:
        raise ValueError(f'Unexpected type {type(fh)}')
