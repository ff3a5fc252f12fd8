"""
Tokenization and the mapping from a trace object to its text fields.
"""
import re

from core.models import DimensionTag

_TOKEN_RE = re.compile(r'[^\W_]+')

# Off unless a caller asks for it; the indexes never drop stopwords.
STOPWORDS = frozenset("""
a about above after again against all am an and any are as at be because been before being below between both
but by can did do does doing down during each few for from further had has have having he her here hers herself
him himself his how i if in into is it its itself just me more most my myself no nor not now of off on once only
or other our ours ourselves out over own same she should so some such than that the their theirs them themselves
then there these they this those through to too under until up very was we were what when where which while who
whom why will with you your yours yourself yourselves
""".split())

TEXT_FIELDS = ('what', 'who', 'when', 'where', 'how')
ALL_FIELD = 'all'


def tokenize(text, stopwords=None):
    """Casefolded alphanumeric runs, in order. No stemming."""
    tokens = _TOKEN_RE.findall(text.casefold())
    if stopwords:
        return [token for token in tokens if token not in stopwords]
    return tokens


def field_texts(record):
    """
    The indexed text of each w5h field. People contribute names and emails,
    times their ISO form split at the T, locations their raw text; how also carries the
    source name. Works for TraceObjects and Queries alike.
    """
    texts = {
        'what': list(record.what),
        'who': [part for ref in record.who for part in (ref.raw_name, *ref.raw_emails) if part],
        'when': [point.isoformat().replace('T', ' ') for point in record.when],
        'where': [ref.raw_text for ref in record.where],
        'how': list(record.how) + ([record.source] if record.source else []),
    }
    return texts


def field_tokens(record, stopwords=None):
    return {name: tokenize(' '.join(texts), stopwords) for name, texts in field_texts(record).items()}


def query_terms(query, tag=None):
    """Query tokens of one field, or of every field when `tag` is None."""
    tokens = field_tokens(query)
    if tag is not None:
        return tokens[DimensionTag(tag).value]
    return [token for name in TEXT_FIELDS for token in tokens[name]]
