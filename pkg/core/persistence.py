"""
Versioned index files.

An index file is two parts: a one-line JSON header and a JSON body. The
header carries the format version, the index kind, caller-supplied hashes
and the SHA-256 of the body bytes, so truncation or tampering is detected
before the body is parsed.
"""
import hashlib
import json
import logging

from django.core.exceptions import ValidationError

from .serialization import dumps

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


def sha256_text(text):
    return hashlib.sha256(text.encode('utf-8')).hexdigest()


def write_versioned(path, kind, body, **header):
    payload = dumps(body)
    head = {
        'format_version': FORMAT_VERSION,
        'kind': kind,
        **header,
        'checksum': sha256_text(payload),
    }
    with open(path, 'w', encoding='utf-8', newline='\n') as handle:
        handle.write(dumps(head))
        handle.write('\n')
        handle.write(payload)
    logger.info("Wrote %s index to %s", kind, path)


def read_versioned(path, kind):
    """Return `(header, body)`; raises on version, kind or checksum problems."""
    with open(path, encoding='utf-8') as handle:
        head_line = handle.readline()
        payload = handle.read()
    try:
        head = json.loads(head_line)
    except json.JSONDecodeError:
        raise ValidationError("%(path)s has a corrupt header.", code='checksum', params={'path': path})

    version = head.get('format_version')
    if version != FORMAT_VERSION:
        raise ValidationError(
            "%(path)s has format version %(found)s, expected %(expected)s.",
            code='version_mismatch',
            params={'path': path, 'found': version, 'expected': FORMAT_VERSION},
        )
    if head.get('kind') != kind:
        raise ValidationError(
            "%(path)s holds a %(found)s index, not %(expected)s.",
            code='wrong_kind',
            params={'path': path, 'found': head.get('kind'), 'expected': kind},
        )
    if sha256_text(payload) != head.get('checksum'):
        raise ValidationError(
            "%(path)s failed its checksum; the file is truncated or corrupt.", code='checksum', params={'path': path}
        )
    return head, json.loads(payload)
