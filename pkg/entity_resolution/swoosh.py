"""
Person matching and merging, and the R-Swoosh fixpoint over them.

Two records match when they share an email or have an equal normalized
name token set. Merging unions names and emails and keeps the smallest id.
Because a merged record matches exactly what either half matched, the
fixpoint is unique and does not depend on the order records arrive in.
"""
import hashlib

from django.utils.text import slugify

from core.models import PersonRef

from .models import PersonEntity, name_key


def stable_id(prefix, label, key):
    digest = hashlib.sha1(key.encode('utf-8')).hexdigest()[:8]
    slug = slugify(label)[:40] or prefix
    return f"{slug}-{digest}"


def person_id(ref):
    """Deterministic id for one distinct surface form of a person."""
    emails = sorted(email.casefold() for email in ref.raw_emails)
    key = '|'.join(emails) + '#' + ' '.join(ref.raw_name.casefold().split())
    return stable_id('person', ref.raw_name or (emails[0] if emails else ''), key)


def as_entity(record):
    if isinstance(record, PersonEntity):
        return record
    if isinstance(record, PersonRef):
        names = {record.raw_name.strip()} if record.raw_name.strip() else set()
        return PersonEntity(
            entity_id=record.entity_id or person_id(record),
            names=names,
            emails={email.strip() for email in record.raw_emails if email.strip()},
        )
    raise TypeError(f"Cannot treat {type(record).__name__} as a person.")


def match_person(a, b):
    a, b = as_entity(a), as_entity(b)
    if a.emails & b.emails:
        return True
    return bool(a.name_keys & b.name_keys)


def merge_person(a, b):
    a, b = as_entity(a), as_entity(b)
    if a == b:
        return a
    return PersonEntity(
        entity_id=min(a.entity_id, b.entity_id),
        names=a.names | b.names,
        emails=a.emails | b.emails,
    )


class KeyIndex:
    """Email and name-key lookup over the resolved set; keys never collide there."""

    def __init__(self):
        self.by_email = {}
        self.by_name = {}

    def find(self, entity):
        for email in entity.emails:
            if email in self.by_email:
                return self.by_email[email]
        for key in entity.name_keys:
            if key in self.by_name:
                return self.by_name[key]
        return None

    def add(self, entity):
        for email in entity.emails:
            self.by_email[email] = entity
        for key in entity.name_keys:
            self.by_name[key] = entity

    def remove(self, entity):
        for email in entity.emails:
            self.by_email.pop(email, None)
        for key in entity.name_keys:
            self.by_name.pop(key, None)


def rswoosh(records):
    """
    Resolve person records into entities (R-Swoosh). The result is sorted by
    entity id and no two of its entities match.
    """
    seeds = {}
    for record in records:
        entity = as_entity(record)
        previous = seeds.get(entity.entity_id)
        seeds[entity.entity_id] = entity if previous is None else merge_person(previous, entity)

    pending = [seeds[key] for key in sorted(seeds)]
    resolved = {}
    index = KeyIndex()
    while pending:
        current = pending.pop()
        partner = index.find(current)
        if partner is None:
            resolved[current.entity_id] = current
            index.add(current)
            continue
        index.remove(partner)
        del resolved[partner.entity_id]
        pending.append(merge_person(current, partner))
    return [resolved[key] for key in sorted(resolved)]
