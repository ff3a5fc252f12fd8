#!/usr/bin/env python
"""Django's command-line utility; the pipeline subcommands plus Django's own."""
import sys

from TraceSearch.cli import main

if __name__ == '__main__':
    sys.exit(main(django_commands=True))
