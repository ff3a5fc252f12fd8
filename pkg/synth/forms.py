from django import forms

from .pools import MAX_ENTITIES, PLACES

# --- DEFAULTS ---

DEFAULT_SOURCES = {
    'gmail': 0.45,
    'facebook': 0.25,
    'twitter': 0.15,
    'dropbox': 0.10,
    'calendar': 0.05,
}

DEFAULT_GROUPS = [
    {'members': [0, 1, 2], 'rate': 0.10, 'source': 'gmail'},
    {'members': [3, 4], 'rate': 0.08, 'source': 'facebook'},
    {'members': [5, 6, 7], 'rate': 0.06, 'source': 'calendar'},
]

DEFAULT_SPEC = {
    'objects': 5000,
    'sources': DEFAULT_SOURCES,
    'entities': 40,
    'groups': DEFAULT_GROUPS,
    'source_affinity': 0.9,
    'who_rate': 0.95,
    'when_rate': 0.957,
    'what_rate': 0.999,
    'where_rate': 0.015,
    'alias_rate': 0.3,
    'start_year': 2012,
    'end_year': 2017,
    'locations': len(PLACES),
    'vocabulary': 3000,
    'zipf_exponent': 1.1,
    'text_length_mu': 1.8,
    'text_length_sigma': 0.9,
    'name_mention_rate': 0.3,
    'number_rate': 0.25,
    'seed': 42,
}


# --- FORMS ---

def _rate(**kwargs):
    return forms.FloatField(min_value=0, max_value=1, **kwargs)


class SynthSpecForm(forms.Form):
    """Validates a synthetic corpus spec merged over DEFAULT_SPEC."""
    objects = forms.IntegerField(min_value=0)
    sources = forms.JSONField()
    entities = forms.IntegerField(min_value=1, max_value=MAX_ENTITIES)
    groups = forms.JSONField(required=False)
    source_affinity = _rate()
    who_rate = _rate()
    when_rate = _rate()
    what_rate = _rate()
    where_rate = _rate()
    alias_rate = _rate()
    start_year = forms.IntegerField(min_value=1900, max_value=2100)
    end_year = forms.IntegerField(min_value=1900, max_value=2100)
    locations = forms.IntegerField(min_value=1, max_value=len(PLACES))
    vocabulary = forms.IntegerField(min_value=10)
    zipf_exponent = forms.FloatField(min_value=0)
    text_length_mu = forms.FloatField(min_value=0)
    text_length_sigma = forms.FloatField(min_value=0)
    name_mention_rate = _rate()
    number_rate = _rate()
    seed = forms.IntegerField(min_value=0)

    def clean_sources(self):
        sources = self.cleaned_data.get('sources')
        if not isinstance(sources, dict) or not sources:
            raise forms.ValidationError("Expected a mapping of source names to mixture weights.")
        if any(not isinstance(value, (int, float)) or value < 0 for value in sources.values()):
            raise forms.ValidationError("Mixture weights must be non-negative numbers.")
        if abs(sum(sources.values()) - 1.0) > 1e-6:
            raise forms.ValidationError("Mixture weights must sum to 1.")
        return {str(name): float(value) for name, value in sources.items()}

    def clean_groups(self):
        groups = self.cleaned_data.get('groups') or []
        if not isinstance(groups, list):
            raise forms.ValidationError("Expected a list of frequent groups.")
        for group in groups:
            if not isinstance(group, dict) or not isinstance(group.get('members'), list) or len(group['members']) < 2:
                raise forms.ValidationError("Each group needs a list of at least two member indexes.")
            if not 0 <= group.get('rate', 0) <= 1:
                raise forms.ValidationError("Group rates must lie in [0, 1].")
        if sum(group.get('rate', 0) for group in groups) > 1:
            raise forms.ValidationError("Group rates must not sum past 1.")
        return groups

    def clean(self):
        cleaned_data = super().clean()
        entities = cleaned_data.get('entities')
        sources = cleaned_data.get('sources')
        for group in cleaned_data.get('groups') or []:
            members = group['members']
            if entities is not None and (len(set(members)) != len(members) or len(members) > entities):
                raise forms.ValidationError(
                    "Group %(members)s is larger than the entity pool or repeats a member.",
                    code='infeasible_spec', params={'members': members},
                )
            if entities is not None and any(not isinstance(m, int) or not 0 <= m < entities for m in members):
                raise forms.ValidationError(
                    "Group %(members)s names an entity outside the pool.",
                    code='infeasible_spec', params={'members': members},
                )
            if sources is not None and group.get('source') and group['source'] not in sources:
                raise forms.ValidationError(
                    "Group source %(source)s is not one of the spec's sources.",
                    code='infeasible_spec', params={'source': group['source']},
                )
        who_rate = cleaned_data.get('who_rate')
        group_rate = sum(group.get('rate', 0) for group in cleaned_data.get('groups') or [])
        if who_rate is not None and group_rate > who_rate:
            raise forms.ValidationError(
                "Group objects alone exceed who_rate %(rate)s.", code='infeasible_spec', params={'rate': who_rate}
            )
        start, end = cleaned_data.get('start_year'), cleaned_data.get('end_year')
        if start is not None and end is not None and start > end:
            raise forms.ValidationError("start_year must not come after end_year.", code='infeasible_spec')
        return cleaned_data
