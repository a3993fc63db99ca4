import io
import os

import pytest

from staintk.errors import ParseError, DuplicateIdError, MissingColumnError

from ._manifest import read_manifest, Manifest, ManifestRow

VALID = """id,image_path,mask_path,scanner
a,images/a.png,masks/a.png,s1
b,images/b.png,,s2
c,/data/c.png,masks/c.png,s1
"""


class TestReadManifest:

    def test_valid(self):
        manifest = read_manifest(io.StringIO(VALID))

        assert len(manifest) == 3
        assert manifest.ids() == ('a', 'b', 'c')
        assert manifest[1].mask_path is None
        assert manifest[0].scanner == 's1'
        assert manifest[0].fold is None

    def test_paths_are_relative_to_the_manifest(self, tmp_path):
        path = tmp_path / 'manifest.csv'
        path.write_text(VALID)

        manifest = read_manifest(str(path))

        assert manifest[0].image_path == os.path.join(str(tmp_path), 'images/a.png')
        assert manifest[2].image_path == '/data/c.png'

    def test_fold_and_labels(self):
        text = 'id,image_path,mask_path,scanner,fold,organ\na,a.png,,s1,2,kidney\nb,b.png,,s1,,skin\n'

        manifest = read_manifest(io.StringIO(text))

        assert manifest[0].fold == 2
        assert manifest[1].fold is None
        assert manifest[0].labels == {'organ': 'kidney'}
        assert manifest[0].groups() == {'scanner': 's1', 'fold': '2', 'organ': 'kidney'}
        assert manifest.label_columns() == ('organ',)

    def test_duplicate_id(self):
        text = VALID + 'b,images/b2.png,,s1\n'

        with pytest.raises(DuplicateIdError) as e:
            read_manifest(io.StringIO(text))

        assert e.value.identifier == 'b'
        assert e.value.line_number == 5

    def test_missing_scanner_column(self):
        text = 'id,image_path,mask_path\na,a.png,\n'

        with pytest.raises(MissingColumnError) as e:
            read_manifest(io.StringIO(text))

        assert e.value.column == 'scanner'

    @pytest.mark.parametrize('line', [
        'd,d.png,,s1,extra',
        'd,d.png',
        ',d.png,,s1',
        'd,,,s1',
    ])
    def test_malformed_row(self, line: str):
        with pytest.raises(ParseError) as e:
            read_manifest(io.StringIO(VALID + line + '\n'))

        assert e.value.line_number == 5

    def test_bad_fold(self):
        text = 'id,image_path,mask_path,scanner,fold\na,a.png,,s1,first\n'

        with pytest.raises(ParseError) as e:
            read_manifest(io.StringIO(text))

        assert e.value.line_number == 2

    def test_header_only(self):
        assert len(read_manifest(io.StringIO('id,image_path,mask_path,scanner\n'))) == 0


class TestManifest:

    def test_csv_round_trip(self):
        manifest = Manifest([
            ManifestRow('a', 'a.png', 's1', mask_path='a_mask.png', fold=1, labels={'organ': 'kidney'}),
            ManifestRow('b', 'b.png', 's2', labels={'organ': 'skin'}),
        ])
        buf = io.StringIO()

        manifest.to_csv(buf)

        assert read_manifest(io.StringIO(buf.getvalue())) == manifest

    def test_duplicates_are_rejected(self):
        with pytest.raises(DuplicateIdError):
            Manifest([ManifestRow('a', 'a.png', 's1'), ManifestRow('a', 'b.png', 's1')])

    def test_label_lookup(self):
        row = ManifestRow('a', 'a.png', 's1', labels={'organ': 'kidney'})

        assert row.label('scanner') == 's1'
        assert row.label('organ') == 'kidney'
        with pytest.raises(MissingColumnError):
            row.label('fold')
