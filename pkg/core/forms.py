from django import forms

# --- CHOICES ---

SCORER_CHOICES = [
    ('w5hf', 'w5h-f frequency score'),
    ('fieldbm25', 'Field-based BM25'),
    ('bm25', 'BM25'),
    ('tfidf', 'TF.IDF'),
    ('w5hf-noer', 'w5h-f without entity resolution'),
]

TERM_FAMILIES = [
    'group', 'user', 'user_src', 'user_time', 'user_time_src',
    'group_time', 'location', 'when', 'how', 'what',
]

TEXT_FIELDS = ['what', 'who', 'when', 'where', 'how']

PATH_KEYS = ['corpus', 'index', 'geocache', 'dictionary', 'entities']


# --- FORMS ---

class ConfigForm(forms.Form):
    """
    Validates a merged configuration mapping (settings defaults, then the
    --config file, then command-line flags) before it becomes a Config.
    """
    paths = forms.JSONField(required=False)
    k1 = forms.FloatField(min_value=0)
    b = forms.FloatField(min_value=0, max_value=1)
    field_weights = forms.JSONField(required=False)
    term_weights = forms.JSONField(required=False)
    role_weights = forms.JSONField(required=False)
    groups = forms.JSONField(required=False)
    seed = forms.IntegerField()
    scorers = forms.JSONField(required=False)
    threads = forms.IntegerField(min_value=1)

    def _clean_weights(self, name, allowed=None):
        weights = self.cleaned_data.get(name) or {}
        if not isinstance(weights, dict):
            raise forms.ValidationError("Expected a mapping of names to weights.")
        for key, value in weights.items():
            if allowed is not None and key not in allowed:
                raise forms.ValidationError(f"Unknown key '{key}'.")
            if not isinstance(value, (int, float)) or isinstance(value, bool) or value < 0:
                raise forms.ValidationError(f"Weight for '{key}' must be a non-negative number.")
        return {key: float(value) for key, value in weights.items()}

    def clean_paths(self):
        paths = self.cleaned_data.get('paths')
        if not isinstance(paths, dict):
            raise forms.ValidationError("Expected a mapping of path names.")
        unknown = sorted(set(paths) - set(PATH_KEYS))
        if unknown:
            raise forms.ValidationError(f"Unknown path keys: {', '.join(unknown)}.")
        return {key: str(paths.get(key) or '') for key in PATH_KEYS}

    def clean_field_weights(self):
        return self._clean_weights('field_weights', TEXT_FIELDS)

    def clean_term_weights(self):
        return self._clean_weights('term_weights', TERM_FAMILIES)

    def clean_role_weights(self):
        # Roles are free text from the dictionary, so any key is allowed.
        return {key.casefold(): value for key, value in self._clean_weights('role_weights').items()}

    def clean_groups(self):
        groups = self.cleaned_data.get('groups')
        if not isinstance(groups, list) or not groups:
            raise forms.ValidationError("Expected a non-empty list of query groups.")
        if any(not isinstance(group, int) or not 1 <= group <= 5 for group in groups):
            raise forms.ValidationError("Query groups are numbered 1 to 5.")
        return sorted(set(groups))

    def clean_scorers(self):
        scorers = self.cleaned_data.get('scorers')
        known = {value for value, _ in SCORER_CHOICES}
        if not isinstance(scorers, list) or not scorers:
            raise forms.ValidationError("Expected a non-empty list of scorers.")
        unknown = [name for name in scorers if name not in known]
        if unknown:
            raise forms.ValidationError(f"Unknown scorers: {', '.join(map(str, unknown))}.")
        # Keep the caller's order; it is the column order of every report.
        return list(dict.fromkeys(scorers))
