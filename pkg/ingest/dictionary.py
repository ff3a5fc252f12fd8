"""
Per-source label dictionaries that map raw field labels onto w5h dimensions.
"""
import json
from dataclasses import dataclass, field

from django.core.exceptions import ValidationError

from core.models import DimensionTag


@dataclass(frozen=True)
class LabelDictionary:
    sources: dict = field(default_factory=dict)
    fallback: dict = field(default_factory=dict)
    date_formats: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data):
        sources, date_formats = {}, {}
        for source, labels in (data.get('sources') or {}).items():
            key = source.casefold()
            date_formats[key] = tuple(labels.get('_dates') or ())
            sources[key] = {
                label.casefold(): _tag(value, source, label)
                for label, value in labels.items()
                if not label.startswith('_')
            }
        fallback = {label.casefold(): _tag(value, 'fallback', label) for label, value in (data.get('fallback') or {}).items()}
        return cls(sources=sources, fallback=fallback, date_formats=date_formats)

    def knows(self, source):
        return source.casefold() in self.sources or bool(self.fallback)

    def formats_for(self, source):
        return self.date_formats.get(source.casefold(), ())


def _tag(value, source, label):
    try:
        return DimensionTag(value.casefold())
    except (ValueError, AttributeError):
        raise ValidationError(
            "Label %(label)r of %(source)s maps to %(value)r, which is not a w5h dimension.",
            code='invalid_dictionary',
            params={'label': label, 'source': source, 'value': value},
        )


def load_dictionary(path):
    with open(path, encoding='utf-8') as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ValidationError(
                "Dictionary %(path)s is not valid JSON: %(error)s",
                code='malformed_json',
                params={'path': path, 'error': exc.msg},
            )
    return LabelDictionary.from_dict(data)


def classify_label(dictionary, source, label):
    """
    The dimension for `label` in `source`, or None when the label is unmapped.
    A source-specific entry wins over the fallback.
    """
    key = label.casefold()
    specific = dictionary.sources.get(source.casefold(), {})
    if key in specific:
        return specific[key]
    return dictionary.fallback.get(key)
