"""
Fixed name, place and syllable pools the generator draws from.

First names, middle names and surnames are pairwise disjoint, so two
synthetic people never share a name token set by accident.
"""
from dataclasses import dataclass

FIRST_NAMES = (
    'John', 'Anna', 'Maria', 'Peter', 'Sofia', 'Nikos', 'Elena', 'David', 'Laura', 'Carlos',
    'Irene', 'Marco', 'Helen', 'Jorge', 'Clara', 'Tomas', 'Alice', 'Victor', 'Julia', 'Pablo',
    'Emma', 'Oscar', 'Nora', 'Felix', 'Diana', 'Hugo', 'Vera', 'Ivan', 'Rosa', 'Omar',
    'Lucia', 'Simon', 'Ada', 'Bruno', 'Greta', 'Kostas', 'Mia', 'Rafael', 'Tina', 'Leo',
    'Olga', 'Andre', 'Paula', 'Stefan', 'Ines', 'Yusuf', 'Katya', 'Dimitri', 'Lena', 'Mateo',
    'Zoe', 'Henrik', 'Amara', 'Boris', 'Celia', 'Elias', 'Fiona', 'Gustav', 'Hana', 'Igor',
)

MIDDLE_NAMES = (
    'Ambrose', 'Beatrix', 'Cosmo', 'Delphine', 'Evander', 'Florian', 'Gwendolyn', 'Horatio', 'Isolde',
)

SURNAMES = (
    'Smith', 'Papas', 'Campos', 'Jones', 'Garcia', 'Muller', 'Rossi', 'Silva',
    'Novak', 'Kowalski', 'London', 'Petrou', 'Tanaka', 'Okafor',
)

EMAIL_DOMAINS = ('mail.example', 'inbox.example', 'post.example')

SYLLABLES = (
    'ka', 'lo', 'mi', 'ren', 'tu', 'sa', 'vel', 'do', 'ri', 'pan',
    'e', 'zo', 'gra', 'lin', 'mor', 'ti', 'bes', 'nu', 'fa', 'quo',
)

SOURCE_LABELS = {
    'gmail': 'Gmail message',
    'facebook': 'Facebook post',
    'twitter': 'Tweet',
    'dropbox': 'Dropbox file',
    'calendar': 'Calendar event',
    'foursquare': 'Foursquare check-in',
}


@dataclass(frozen=True)
class Place:
    """
    One location of the pool. `hint` is the word where-objects mention so
    an ambiguous name can be told apart from its `decoy`.
    """
    surfaces: tuple
    address: str | None
    coords: tuple | None = None
    decoy: tuple | None = None
    hint: str = ''


PLACES = (
    Place(('Campos',), 'Campos, Rio de Janeiro, Brazil', (-21.75, -41.32),
          decoy=('Campos, Balearic Islands, Spain', (39.43, 3.02)), hint='Brazil'),
    Place(('Athens',), 'Athens, Attica, Greece', (37.98, 23.73),
          decoy=('Athens, Ohio, USA', (39.33, -82.10)), hint='Attica'),
    Place(('Greece', 'Hellas'), 'Greece', (39.07, 21.82)),
    Place(('New York', 'NYC'), 'New York, New York, USA', (40.71, -74.01)),
    Place(('Paris',), 'Paris, Ile-de-France, France', (48.86, 2.35),
          decoy=('Paris, Texas, USA', (33.66, -95.56)), hint='France'),
    Place(('London',), 'London, England, UK', (51.51, -0.13),
          decoy=('London, Ontario, Canada', (42.98, -81.25)), hint='England'),
    Place(('Springfield',), 'Springfield, Illinois, USA', (39.80, -89.64),
          decoy=('Springfield, Missouri, USA', (37.21, -93.29)), hint='Illinois'),
    Place(('Student Center', 'Student Ctr'), 'Student Center, Campus Drive', (40.10, -88.23)),
    Place(('Main Library',), 'Main Library, Campus Drive', (40.11, -88.23)),
    Place(('JFK', 'JFK Airport'), 'JFK Airport, New York, USA', (40.64, -73.78)),
    Place(('Berlin',), 'Berlin, Germany', (52.52, 13.40)),
    Place(('Madrid',), 'Madrid, Spain', (40.42, -3.70)),
    Place(('Lisbon', 'Lisboa'), 'Lisbon, Portugal', (38.72, -9.14)),
    Place(('Rome',), 'Rome, Lazio, Italy', (41.90, 12.50),
          decoy=('Rome, Georgia, USA', (34.26, -85.16)), hint='Italy'),
    Place(('Cambridge',), 'Cambridge, Massachusetts, USA', (42.37, -71.11),
          decoy=('Cambridge, Ontario, Canada', (43.36, -80.31)), hint='Massachusetts'),
    Place(('Toronto',), 'Toronto, Ontario, Canada', (43.65, -79.38)),
    Place(('Gym', 'Campus Gym'), 'Campus Gym, Campus Drive', (40.10, -88.24)),
    Place(('Home',), None),
    Place(('Office',), None),
    Place(('Coffee Lab',), 'Coffee Lab, Main Street', (40.12, -88.24)),
    Place(('Thessaloniki',), 'Thessaloniki, Greece', (40.64, 22.94)),
    Place(('Boston',), 'Boston, Massachusetts, USA', (42.36, -71.06)),
    Place(('Dublin',), 'Dublin, Ireland', (53.35, -6.26),
          decoy=('Dublin, Ohio, USA', (40.10, -83.11)), hint='Ireland'),
    Place(('Stadium', 'City Stadium'), 'City Stadium, Main Street', (40.09, -88.25)),
)

MAX_ENTITIES = len(FIRST_NAMES) * (len(MIDDLE_NAMES) + 1)


def syllable_word(number):
    """The `number`-th synthetic word: its base-len(SYLLABLES) digits, two syllables at least."""
    base = len(SYLLABLES)
    number += base
    parts = []
    while number:
        number, digit = divmod(number, base)
        parts.append(SYLLABLES[digit])
    return ''.join(reversed(parts))
