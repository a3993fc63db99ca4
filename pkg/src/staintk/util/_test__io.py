import io

import pytest

from ._io import open_text_io_handle_for_reading, open_text_io_handle_for_writing, looks_like_url, looks_gzipped


@pytest.mark.parametrize('file, expected', [
    ('https://example.com/manifest.csv', True),
    ('http://example.com/manifest.csv', True),
    ('data/manifest.csv', False),
])
def test_looks_like_url(file: str, expected: bool):
    assert looks_like_url(file) == expected


def test_looks_gzipped():
    assert looks_gzipped('trace.csv.gz')
    assert not looks_gzipped('trace.csv')


@pytest.mark.parametrize('name', ['payload.csv', 'payload.csv.gz'])
def test_write_then_read(tmp_path, name: str):
    path = tmp_path / name

    with open_text_io_handle_for_writing(path, encoding='utf-8') as fh:
        fh.write('id,scanner\nä,A\n')
    with open_text_io_handle_for_reading(path, encoding='utf-8') as fh:
        assert fh.read() == 'id,scanner\nä,A\n'


def test_gzip_output_is_reproducible(tmp_path):
    payloads = []
    for name in ('a', 'b'):
        (tmp_path / name).mkdir()
        path = tmp_path / name / 'folds.json.gz'
        with open_text_io_handle_for_writing(path, encoding='utf-8') as fh:
            fh.write('{"k": 4}\n')
        payloads.append(path.read_bytes())

    assert payloads[0] == payloads[1]


def test_text_handles_are_passed_through():
    handle = io.StringIO('x')

    assert open_text_io_handle_for_reading(handle) is handle
    assert open_text_io_handle_for_writing(handle) is handle


def test_binary_handle_is_wrapped():
    handle = open_text_io_handle_for_reading(io.BytesIO('ok'.encode('utf-8')), encoding='utf-8')

    assert handle.read() == 'ok'


def test_unexpected_type():
    with pytest.raises(ValueError):
        open_text_io_handle_for_reading(42)
